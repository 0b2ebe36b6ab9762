use std::sync::Arc;

use crate::algebra::MatrixGroup;
use crate::error::{Error, Result};
use crate::matexp::{symmetric_eigen, Matrix, TAG_TOLERANCE};
use crate::skeleton::IsotropyChoice;

use super::{require_shape, Connection, HomogeneousSpace};

/// Symmetric matrices with a prescribed spectrum under `R ⊳ P = R P Rᵀ`.
#[derive(Clone, Debug)]
pub struct Isospectral {
    spectrum: Vec<(f64, usize)>,
    n: usize,
    origin_diag: Vec<f64>,
    sorted: Vec<f64>,
    initial: Option<Matrix>,
    label: Option<String>,
    group: MatrixGroup,
}

impl Isospectral {
    /// `spectrum` lists (eigenvalue, multiplicity); the origin is the
    /// diagonal matrix of eigenvalues in the given order.
    pub fn new(spectrum: &[(f64, usize)]) -> Result<Self> {
        if spectrum.iter().any(|&(v, m)| m == 0 || !v.is_finite()) {
            return Err(Error::invalid("spectrum", "multiplicities must be positive and values finite"));
        }
        for (i, (v, _)) in spectrum.iter().enumerate() {
            if spectrum[..i].iter().any(|(w, _)| w == v) {
                return Err(Error::invalid("spectrum", format!("eigenvalue {v} listed twice")));
            }
        }
        if spectrum.len() < 2 {
            return Err(Error::invalid(
                "spectrum",
                "at least two distinct eigenvalues are needed (otherwise the manifold reduces to one point)",
            ));
        }
        let origin_diag: Vec<f64> = spectrum
            .iter()
            .flat_map(|&(v, m)| std::iter::repeat_n(v, m))
            .collect();
        let mut sorted = origin_diag.clone();
        sorted.sort_by(f64::total_cmp);
        let n = origin_diag.len();
        Ok(Isospectral {
            spectrum: spectrum.to_vec(),
            n,
            origin_diag,
            sorted,
            initial: None,
            label: None,
            group: MatrixGroup::SpecialOrthogonal(n),
        })
    }

    /// Projectors of rank `k` in `ℝⁿ`.
    pub fn grassmann(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k >= n {
            return Err(Error::invalid("grassmann", format!("need 0 < k < n, got n = {n}, k = {k}")));
        }
        let mut s = Isospectral::new(&[(1.0, k), (0.0, n - k)])?;
        s.label = Some(format!("grassmann:{n},{k}"));
        Ok(s)
    }

    /// Isospectral manifold of an `n×n` tridiagonal Toda starting matrix,
    /// which becomes the space's initial point.
    pub fn toda(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("toda", "need n >= 2"));
        }
        let l0 = Matrix::from_fn(n, n, |i, j| {
            if i == j {
                0.5 * (i as f64 - (n - 1) as f64 / 2.0)
            } else if i.abs_diff(j) == 1 {
                1.0
            } else {
                0.0
            }
        });
        let (values, _) = symmetric_eigen(&l0);
        let spectrum: Vec<(f64, usize)> = values.iter().map(|&v| (v, 1)).collect();
        let mut s = Isospectral::new(&spectrum)?;
        s.initial = Some(l0);
        s.label = Some(format!("toda:{n}"));
        Ok(s)
    }

    pub fn spectrum(&self) -> &[(f64, usize)] {
        &self.spectrum
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Largest deviation of the sorted eigenvalues from the prescribed ones.
    pub fn spectrum_drift(&self, p: &Matrix) -> f64 {
        if p.shape() != (self.n, self.n) {
            return f64::INFINITY;
        }
        let (values, _) = symmetric_eigen(p);
        values
            .iter()
            .zip(&self.sorted)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl HomogeneousSpace for Isospectral {
    fn name(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        let parts: Vec<String> = self.spectrum.iter().map(|(v, m)| format!("{v}*{m}")).collect();
        format!("isospectral:{}", parts.join(","))
    }

    fn group(&self) -> &MatrixGroup {
        &self.group
    }

    fn origin(&self) -> Matrix {
        Matrix::diagonal(&self.origin_diag)
    }

    fn initial_point(&self) -> Matrix {
        self.initial.clone().unwrap_or_else(|| self.origin())
    }

    fn act(&self, g: &Matrix, x: &Matrix) -> Matrix {
        &(g * x) * &g.transpose()
    }

    fn push_tangent(&self, g: &Matrix, _x: &Matrix, v: &Matrix) -> Matrix {
        &(g * v) * &g.transpose()
    }

    fn inf_act(&self, xi: &Matrix, x: &Matrix) -> Matrix {
        xi * x - x * xi
    }

    fn distance_to_manifold(&self, x: &Matrix) -> f64 {
        if x.shape() != (self.n, self.n) {
            return f64::INFINITY;
        }
        (x - &x.transpose()).norm() + self.spectrum_drift(x)
    }

    fn invariant_name(&self) -> &'static str {
        "spectrum_drift"
    }

    fn invariant_residual(&self, x: &Matrix) -> f64 {
        self.spectrum_drift(x)
    }

    /// Eigenvector matrix ordered to match the origin's diagonal.
    fn lift_point(&self, x: &Matrix) -> Result<Matrix> {
        require_shape(x, (self.n, self.n), "isospectral point")?;
        let (_, vectors) = symmetric_eigen(x);
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|&a, &b| self.origin_diag[a].total_cmp(&self.origin_diag[b]));
        let mut g = Matrix::zeros(self.n, self.n);
        for (rank, &slot) in order.iter().enumerate() {
            g.set_block((0, slot), &vectors.block((0, rank), (self.n, 1)));
        }
        if g.determinant() < 0.0 {
            let flipped = -g.block((0, 0), (self.n, 1));
            g.set_block((0, 0), &flipped);
        }
        Ok(g)
    }
}

/// `ω(P, δP) = (δP·P − P·δP) / Δλ²` on a two-eigenvalue isospectral space.
#[derive(Clone, Debug)]
pub struct GrassmannConnection {
    space: Isospectral,
    inv_gap_sq: f64,
}

impl GrassmannConnection {
    pub fn new(space: Isospectral) -> Result<Self> {
        if space.spectrum.len() != 2 {
            return Err(Error::Unsupported(format!(
                "no closed-form connection on {} ({} distinct eigenvalues); \
                 use a Lax-type choice when all multiplicities are one",
                space.name(),
                space.spectrum.len()
            )));
        }
        let gap = space.spectrum[0].0 - space.spectrum[1].0;
        Ok(GrassmannConnection {
            space,
            inv_gap_sq: 1.0 / (gap * gap),
        })
    }
}

impl Connection for GrassmannConnection {
    fn name(&self) -> String {
        "grassmann".into()
    }

    fn space(&self) -> &dyn HomogeneousSpace {
        &self.space
    }

    fn eval(&self, p: &Matrix, dp: &Matrix) -> Result<Matrix> {
        let n = self.space.n;
        require_shape(p, (n, n), "isospectral point")?;
        require_shape(dp, (n, n), "isospectral tangent")?;
        Ok((dp * p - p * dp).scale(self.inv_gap_sq))
    }
}

/// Skew generator `ξ(P) = P₊ − P₋` of the Toda lattice, with `P₊`/`P₋` the
/// strictly upper/lower triangular parts.
pub fn toda_generator(p: &Matrix) -> Matrix {
    Matrix::from_fn(p.rows(), p.cols(), |i, j| {
        if i < j {
            p[(i, j)]
        } else if i > j {
            -p[(i, j)]
        } else {
            0.0
        }
    })
}

type LaxFn = dyn Fn(&Matrix) -> Matrix + Send + Sync;

/// Isotropy choice `ν(P) = h · ξ(P)` from a Lax generator.
#[derive(Clone)]
pub struct LaxChoice {
    generator: Arc<LaxFn>,
    step: f64,
}

pub fn lax_choice<F>(generator: F, step: f64) -> LaxChoice
where
    F: Fn(&Matrix) -> Matrix + Send + Sync + 'static,
{
    LaxChoice {
        generator: Arc::new(generator),
        step,
    }
}

impl IsotropyChoice for LaxChoice {
    fn eval(&self, p: &Matrix) -> Result<Matrix> {
        let xi = (self.generator)(p);
        let defect = (&xi + &xi.transpose()).norm();
        if defect > TAG_TOLERANCE * xi.norm().max(1.0) {
            return Err(Error::NotInSet {
                what: "Lax generator output".into(),
                expected: "skew-symmetric",
                defect,
            });
        }
        Ok(xi.scale(self.step))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matexp::seeded_rng;

    #[test]
    fn two_by_two_projector() {
        let s = Isospectral::grassmann(2, 1).unwrap();
        assert_eq!(s.origin(), Matrix::diagonal(&[1.0, 0.0]));
        let c = GrassmannConnection::new(s.clone()).unwrap();
        let p = s.origin();
        let dp = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        let w = c.eval(&p, &dp).unwrap();
        assert_eq!(w, Matrix::from_rows(&[[0.0, -1.0], [1.0, 0.0]]));
        assert_eq!(s.inf_act(&w, &p), dp);
    }

    #[test]
    fn spectrum_validation() {
        assert!(Isospectral::new(&[(1.0, 3)]).is_err());
        assert!(Isospectral::new(&[(1.0, 1), (1.0, 2)]).is_err());
        assert!(Isospectral::new(&[(1.0, 0), (2.0, 1)]).is_err());
        let general = Isospectral::new(&[(3.0, 1), (1.0, 2), (0.0, 1)]).unwrap();
        assert!(matches!(GrassmannConnection::new(general), Err(Error::Unsupported(_))));
    }

    #[test]
    fn gap_prefactor() {
        let s = Isospectral::new(&[(3.0, 2), (1.0, 2)]).unwrap();
        let c = GrassmannConnection::new(s.clone()).unwrap();
        let mut rng = seeded_rng(4);
        for _ in 0..10 {
            let p = s.sample_point(&mut rng);
            let v = s.sample_tangent(&p, &mut rng);
            let w = c.eval(&p, &v).unwrap();
            assert!((&w + &w.transpose()).norm() < 1e-13);
            assert!(s.inf_act(&w, &p).distance(&v).unwrap() < 1e-12);
        }
    }

    #[test]
    fn action_and_lift() {
        let s = Isospectral::new(&[(2.0, 1), (-1.0, 2), (0.5, 1)]).unwrap();
        let mut rng = seeded_rng(5);
        for _ in 0..5 {
            let p = s.sample_point(&mut rng);
            assert!(s.spectrum_drift(&p) < 1e-11);
            let g = s.lift_point(&p).unwrap();
            assert!(s.group().membership_defect(&g) < 1e-12);
            assert!(s.act(&g, &s.origin()).distance(&p).unwrap() < 1e-12);
        }
    }

    #[test]
    fn toda_setup() {
        let s = Isospectral::toda(4).unwrap();
        let l0 = s.initial_point();
        assert!(s.distance_to_manifold(&l0) < 1e-12);
        let b = toda_generator(&l0);
        assert_eq!(&b + &b.transpose(), Matrix::zeros(4, 4));
        assert!(s.isotropy_basis().is_empty());
        let choice = lax_choice(|_| Matrix::identity(4), 0.1);
        assert!(choice.eval(&l0).is_err());
    }
}
