use crate::algebra::MatrixGroup;
use crate::error::{Error, Result};
use crate::matexp::Matrix;

use super::{require_shape, Connection, HomogeneousSpace};

/// Orthonormal `n×k` frames under left multiplication by SO(n), `k < n`.
/// The sphere `S^{n−1}` is the case `k = 1`.
#[derive(Clone, Debug)]
pub struct Stiefel {
    n: usize,
    k: usize,
    group: MatrixGroup,
}

impl Stiefel {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k >= n {
            return Err(Error::invalid(
                "stiefel",
                format!("need 1 <= k < n, got n = {n}, k = {k} (k = n is not a homogeneous space of SO(n))"),
            ));
        }
        Ok(Stiefel {
            n,
            k,
            group: MatrixGroup::SpecialOrthogonal(n),
        })
    }

    pub fn sphere(ambient: usize) -> Result<Self> {
        Stiefel::new(ambient, 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub(crate) fn frame_defect(&self, q: &Matrix) -> f64 {
        if q.shape() != (self.n, self.k) {
            return f64::INFINITY;
        }
        (&(&q.transpose() * q) - &Matrix::identity(self.k)).norm()
    }

    pub(crate) fn check_frame(&self, q: &Matrix) -> Result<()> {
        require_shape(q, (self.n, self.k), "stiefel point")?;
        let defect = self.frame_defect(q);
        if defect > 1e-8 {
            return Err(Error::NotInSet {
                what: "stiefel point".into(),
                expected: "orthonormal (QᵀQ = I)",
                defect,
            });
        }
        Ok(())
    }
}

impl HomogeneousSpace for Stiefel {
    fn name(&self) -> String {
        if self.k == 1 {
            format!("sphere:{}", self.n)
        } else {
            format!("stiefel:{},{}", self.n, self.k)
        }
    }

    fn group(&self) -> &MatrixGroup {
        &self.group
    }

    fn origin(&self) -> Matrix {
        let mut q = Matrix::zeros(self.n, self.k);
        q.set_block((self.n - self.k, 0), &Matrix::identity(self.k));
        q
    }

    fn act(&self, g: &Matrix, x: &Matrix) -> Matrix {
        g * x
    }

    fn push_tangent(&self, g: &Matrix, _x: &Matrix, v: &Matrix) -> Matrix {
        g * v
    }

    fn inf_act(&self, xi: &Matrix, x: &Matrix) -> Matrix {
        xi * x
    }

    fn distance_to_manifold(&self, x: &Matrix) -> f64 {
        self.frame_defect(x)
    }

    fn invariant_name(&self) -> &'static str {
        "orthonormality_defect"
    }

    fn invariant_residual(&self, x: &Matrix) -> f64 {
        self.frame_defect(x)
    }

    /// Completes `Q` to a rotation `[C | Q]`.
    fn lift_point(&self, x: &Matrix) -> Result<Matrix> {
        self.check_frame(x)?;
        let (n, k) = (self.n, self.k);
        // Gram–Schmidt the standard basis against the span of Q, twice for
        // stability, keeping the n − k directions with the largest residual.
        let mut basis: Vec<Matrix> = (0..k).map(|j| x.block((0, j), (n, 1))).collect();
        let mut candidates: Vec<(f64, Matrix)> = (0..n)
            .map(|i| {
                let e = Matrix::unit(n, 1, i, 0);
                let r = orthogonalize(&e, &basis);
                (r.norm(), e)
            })
            .collect();
        candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut complement = Vec::new();
        for (_, e) in candidates {
            if complement.len() == n - k {
                break;
            }
            let r = orthogonalize(&orthogonalize(&e, &basis), &basis);
            let nr = r.norm();
            if nr > 1e-6 {
                let u = r.scale(1.0 / nr);
                basis.push(u.clone());
                complement.push(u);
            }
        }
        let mut g = Matrix::zeros(n, n);
        for (j, c) in complement.iter().enumerate() {
            g.set_block((0, j), c);
        }
        g.set_block((0, n - k), x);
        if g.determinant() < 0.0 {
            let flipped = -g.block((0, 0), (n, 1));
            g.set_block((0, 0), &flipped);
        }
        Ok(g)
    }
}

fn orthogonalize(v: &Matrix, basis: &[Matrix]) -> Matrix {
    let mut r = v.clone();
    for b in basis {
        r -= &b.scale(b.dot(&r));
    }
    r
}

/// `ω(Q, δQ) = δQ Qᵀ − Q δQᵀ + Q δQᵀ Q Qᵀ`, which lies in so(n) and
/// reproduces `δQ` when applied to `Q`.
#[derive(Clone, Debug)]
pub struct StiefelConnection {
    space: Stiefel,
}

impl StiefelConnection {
    pub fn new(space: Stiefel) -> Self {
        StiefelConnection { space }
    }
}

impl Connection for StiefelConnection {
    fn name(&self) -> String {
        "stiefel".into()
    }

    fn space(&self) -> &dyn HomogeneousSpace {
        &self.space
    }

    fn eval(&self, q: &Matrix, dq: &Matrix) -> Result<Matrix> {
        self.space.check_frame(q)?;
        require_shape(dq, (self.space.n, self.space.k), "stiefel tangent")?;
        let qt = q.transpose();
        let dqt = dq.transpose();
        let qdqt = q * &dqt;
        Ok(dq * &qt - &qdqt + &(&qdqt * q) * &qt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matexp::seeded_rng;

    #[test]
    fn sphere_at_north_pole() {
        let s = Stiefel::sphere(3).unwrap();
        let c = StiefelConnection::new(s.clone());
        let (a, b) = (0.3, -1.7);
        let w = c
            .eval(&Matrix::column(&[0.0, 0.0, 1.0]), &Matrix::column(&[a, b, 0.0]))
            .unwrap();
        let expected = Matrix::from_rows(&[[0.0, 0.0, a], [0.0, 0.0, b], [-a, -b, 0.0]]);
        assert!(w.distance(&expected).unwrap() < 1e-16);
        assert_eq!(s.origin(), Matrix::column(&[0.0, 0.0, 1.0]));
    }

    #[test]
    fn rejects_square_frames() {
        assert!(Stiefel::new(3, 3).is_err());
        assert!(Stiefel::new(3, 0).is_err());
    }

    #[test]
    fn skew_and_consistent() {
        let s = Stiefel::new(5, 2).unwrap();
        let c = StiefelConnection::new(s.clone());
        let mut rng = seeded_rng(3);
        for _ in 0..20 {
            let q = s.sample_point(&mut rng);
            let v = s.sample_tangent(&q, &mut rng);
            let w = c.eval(&q, &v).unwrap();
            assert!((&w + &w.transpose()).norm() < 1e-13);
            assert!((&w * &q).distance(&v).unwrap() < 1e-13);
        }
    }

    #[test]
    fn annihilates_orthogonal_frames() {
        // Q' ⊥ Q and Q' ⊥ δQ ⇒ ω Q' = 0
        let s = Stiefel::new(5, 2).unwrap();
        let c = StiefelConnection::new(s.clone());
        let q = s.origin();
        let mut dq = Matrix::zeros(5, 2);
        dq[(0, 0)] = 1.0;
        dq[(1, 1)] = -2.0;
        let w = c.eval(&q, &dq).unwrap();
        let qp = Matrix::column(&[0.0, 0.0, 1.0, 0.0, 0.0]);
        assert!((&w * &qp).norm() < 1e-15);
    }

    #[test]
    fn lift_reaches_the_point() {
        let mut rng = seeded_rng(9);
        for (n, k) in [(3, 1), (5, 2), (4, 3)] {
            let s = Stiefel::new(n, k).unwrap();
            for _ in 0..5 {
                let q = s.sample_point(&mut rng);
                let g = s.lift_point(&q).unwrap();
                assert!(s.group().membership_defect(&g) < 1e-12);
                assert!(s.act(&g, &s.origin()).distance(&q).unwrap() < 1e-14);
            }
        }
    }

    #[test]
    fn isotropy_dimension() {
        // dim SO(n−k) = (n−k)(n−k−1)/2
        assert_eq!(Stiefel::new(5, 2).unwrap().isotropy_basis().len(), 3);
        assert_eq!(Stiefel::sphere(3).unwrap().isotropy_basis().len(), 1);
    }
}
