//! Reductive, symmetric and flat splittings `𝔤 = 𝔥 ⊕ 𝔪` of matrix Lie
//! algebras, and the search for `Ad(H)`-invariant complements.
//!
//! Inclusions are decided on brackets of unit-norm basis elements by the
//! least-squares residual of projecting onto the target span. The test is
//! infinitesimal (`[𝔥, 𝔪] ⊂ 𝔪`), which is equivalent to group invariance only
//! when the isotropy group is connected; for disconnected groups a list of
//! component representatives can be supplied and is checked as well.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matexp::{bracket, columns_of, flatten, least_squares, null_space, orthonormal_range, rank, Matrix};
use crate::spaces::{Connection, HomogeneousSpace};

pub const INCLUSION_TOLERANCE: f64 = 1e-9;
pub const BASIS_TOLERANCE: f64 = 1e-10;
/// Best-fit residual above which no complement exists.
pub const EMPTY_TOLERANCE: f64 = 1e-7;

/// Bases for `𝔤`, an isotropy subalgebra `𝔥`, and optionally a candidate
/// complement `𝔪`, all as square matrices of one size.
#[derive(Clone, Debug)]
pub struct SubalgebraSplit {
    g: Vec<Matrix>,
    h: Vec<Matrix>,
    m: Option<Vec<Matrix>>,
    components: Vec<Matrix>,
}

fn unit(ms: &[Matrix]) -> Vec<Matrix> {
    ms.iter().map(|m| m.scale(1.0 / m.norm())).collect()
}

/// Residual of the best approximation of `y` from `span(basis)`.
fn projection_residual(basis_cols: &Matrix, y: &Matrix) -> f64 {
    if basis_cols.cols() == 0 {
        return y.norm();
    }
    least_squares(basis_cols, &Matrix::column(&flatten(y))).1
}

impl SubalgebraSplit {
    pub fn new(g: Vec<Matrix>, h: Vec<Matrix>, m: Option<Vec<Matrix>>) -> Result<Self> {
        let bad = |reason: String| Error::invalid("subalgebra split", reason);
        let first = g.first().ok_or_else(|| bad("empty algebra basis".into()))?;
        let n = first.rows();
        let all = g.iter().chain(&h).chain(m.iter().flatten());
        for x in all {
            if x.shape() != (n, n) {
                return Err(bad(format!("all basis matrices must be {n}x{n}")));
            }
            if x.norm() == 0.0 || !x.is_finite() {
                return Err(bad("basis matrices must be finite and nonzero".into()));
            }
        }
        let (g, h, m) = (unit(&g), unit(&h), m.map(|m| unit(&m)));
        let gc = columns_of(&g);
        if rank(&gc, BASIS_TOLERANCE) != g.len() {
            return Err(bad("algebra basis is linearly dependent".into()));
        }
        for (i, a) in g.iter().enumerate() {
            for b in &g[i + 1..] {
                let r = projection_residual(&gc, &bracket(a, b));
                if r > INCLUSION_TOLERANCE {
                    return Err(bad(format!("algebra basis is not closed under the bracket (residual {r:.2e})")));
                }
            }
        }
        let hc = columns_of(&h);
        if !h.is_empty() && rank(&hc, BASIS_TOLERANCE) != h.len() {
            return Err(bad("isotropy basis is linearly dependent".into()));
        }
        for x in h.iter().chain(m.iter().flatten()) {
            let r = projection_residual(&gc, x);
            if r > BASIS_TOLERANCE {
                return Err(bad(format!("element outside the algebra (residual {r:.2e})")));
            }
        }
        for a in &h {
            for b in &h {
                let r = projection_residual(&hc, &bracket(a, b));
                if r > BASIS_TOLERANCE {
                    return Err(bad(format!("isotropy basis is not closed under the bracket (residual {r:.2e})")));
                }
            }
        }
        if let Some(m) = &m {
            if h.len() + m.len() != g.len() {
                return Err(bad(format!("dim 𝔥 + dim 𝔪 = {} + {} differs from dim 𝔤 = {}", h.len(), m.len(), g.len())));
            }
            let joint: Vec<Matrix> = h.iter().chain(m).cloned().collect();
            if rank(&columns_of(&joint), BASIS_TOLERANCE) != g.len() {
                return Err(bad("𝔥 and 𝔪 do not span 𝔤".into()));
            }
        }
        Ok(SubalgebraSplit {
            g,
            h,
            m,
            components: vec![],
        })
    }

    /// `𝔤 = 𝔥 ⊕ 𝔪` with both parts given.
    pub fn from_parts(h: Vec<Matrix>, m: Vec<Matrix>) -> Result<Self> {
        let g = h.iter().chain(&m).cloned().collect();
        SubalgebraSplit::new(g, h, Some(m))
    }

    /// Representatives of the components of a disconnected isotropy group.
    pub fn with_components(mut self, reps: Vec<Matrix>) -> Result<Self> {
        let n = self.g[0].rows();
        if reps.iter().any(|r| r.shape() != (n, n)) {
            return Err(Error::invalid("subalgebra split", "component representatives have the wrong size"));
        }
        for r in &reps {
            r.try_inverse()?;
        }
        self.components = reps;
        Ok(self)
    }

    /// Split read off a connection: `𝔥` is the isotropy algebra at the
    /// origin and `𝔪` the image of `v ↦ ω(origin, v)`.
    pub fn from_connection(conn: &dyn Connection) -> Result<Self> {
        let space = conn.space();
        let o = space.origin();
        let g = space.algebra().basis();
        let h = space.isotropy_basis();
        let images = g
            .iter()
            .map(|b| conn.eval(&o, &space.inf_act(b, &o)))
            .collect::<Result<Vec<_>>>()?;
        let range = orthonormal_range(&columns_of(&images), BASIS_TOLERANCE);
        let n = g[0].rows();
        let m = (0..range.cols())
            .map(|c| Matrix::from_fn(n, n, |i, j| range[(i + j * n, c)]))
            .collect();
        SubalgebraSplit::new(g, h, Some(m))
    }

    /// Split of a space's algebra into its isotropy algebra and the
    /// orthogonal complement (in the Frobenius inner product).
    pub fn orthogonal(space: &dyn HomogeneousSpace) -> Result<Self> {
        let g = space.algebra().basis();
        let h = space.isotropy_basis();
        let m = orthogonal_complement(&g, &h);
        SubalgebraSplit::new(g, h, Some(m))
    }

    pub fn g_basis(&self) -> &[Matrix] {
        &self.g
    }

    pub fn h_basis(&self) -> &[Matrix] {
        &self.h
    }

    pub fn m_basis(&self) -> Option<&[Matrix]> {
        self.m.as_deref()
    }
}

/// Orthonormal basis of the complement of `span(h)` inside `span(g)`.
fn orthogonal_complement(g: &[Matrix], h: &[Matrix]) -> Vec<Matrix> {
    let n = g[0].rows();
    let gc = columns_of(g);
    let mut off = gc.clone();
    if !h.is_empty() {
        let hc = columns_of(h);
        let (coef, _) = least_squares(&hc, &gc);
        off = &gc - &(&hc * &coef);
    }
    let range = orthonormal_range(&off, BASIS_TOLERANCE);
    (0..range.cols())
        .map(|c| Matrix::from_fn(n, n, |i, j| range[(i + j * n, c)]))
        .collect()
}

/// Which invariance criterion a verdict rests on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// `[𝔥, 𝔪] ⊂ 𝔪` only.
    Infinitesimal,
    /// Additionally `Ad_c 𝔪 ⊂ 𝔪` for every supplied component representative.
    WithComponents,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub reductive: bool,
    pub symmetric: bool,
    pub flat: bool,
    /// Worst residuals of `[𝔥,𝔪] → 𝔪`, `[𝔪,𝔪] → 𝔥`, `[𝔪,𝔪] → 𝔪`.
    pub residuals: [f64; 3],
    pub criterion: Criterion,
}

impl Classification {
    /// Table-style row with check marks.
    pub fn row(&self) -> String {
        let mark = |b: bool| if b { "✓" } else { "✗" };
        format!(
            "reductive {} symmetric {} flat {}",
            mark(self.reductive),
            mark(self.symmetric),
            mark(self.flat)
        )
    }
}

pub fn classify(split: &SubalgebraSplit) -> Result<Classification> {
    let m = split
        .m
        .as_ref()
        .ok_or_else(|| Error::invalid("classification", "a complement 𝔪 is required"))?;
    let hc = columns_of(&split.h);
    let mc = columns_of(m);
    let mut red: f64 = 0.0;
    for a in &split.h {
        for b in m {
            red = red.max(projection_residual(&mc, &bracket(a, b)));
        }
    }
    for c in &split.components {
        let c_inv = c.try_inverse()?;
        for b in m {
            let ad = &(c * b) * &c_inv;
            red = red.max(projection_residual(&mc, &ad) / ad.norm().max(1.0));
        }
    }
    let (mut sym, mut flat): (f64, f64) = (0.0, 0.0);
    for (i, a) in m.iter().enumerate() {
        for b in &m[i + 1..] {
            let br = bracket(a, b);
            sym = sym.max(projection_residual(&hc, &br));
            flat = flat.max(projection_residual(&mc, &br));
        }
    }
    Ok(Classification {
        reductive: red <= INCLUSION_TOLERANCE,
        symmetric: sym <= INCLUSION_TOLERANCE,
        flat: flat <= INCLUSION_TOLERANCE,
        residuals: [red, sym, flat],
        criterion: if split.components.is_empty() {
            Criterion::Infinitesimal
        } else {
            Criterion::WithComponents
        },
    })
}

/// Affine family of invariant complements `𝔪_t = span{c_x + α_t(c_x)}`,
/// where `c_x` spans the orthogonal complement of `𝔥` and
/// `α_t = α₀ + Σ tᵢ Dᵢ` maps it into `𝔥`.
///
/// `α₀` is the minimum-norm solution for this particular seed complement; it
/// has no intrinsic meaning beyond that.
#[derive(Clone, Debug)]
pub struct AffineSolution {
    h: Vec<Matrix>,
    seed: Vec<Matrix>,
    particular: Vec<f64>,
    directions: Vec<Vec<f64>>,
    residual: f64,
}

impl AffineSolution {
    pub fn direction_dim(&self) -> usize {
        self.directions.len()
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Seed complement (orthogonal complement of `𝔥`).
    pub fn seed_complement(&self) -> &[Matrix] {
        &self.seed
    }

    fn alpha(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut a = self.particular.clone();
        for (t, d) in coeffs.iter().zip(&self.directions) {
            for (ai, di) in a.iter_mut().zip(d) {
                *ai += t * di;
            }
        }
        a
    }

    /// Basis of `𝔪_t` for direction coordinates `t` (missing entries are 0).
    pub fn representative(&self, coeffs: &[f64]) -> Vec<Matrix> {
        let a = self.alpha(coeffs);
        let p = self.h.len();
        self.seed
            .iter()
            .enumerate()
            .map(|(x, c)| {
                let mut m = c.clone();
                for (k, hk) in self.h.iter().enumerate() {
                    m += &hk.scale(a[x * p + k]);
                }
                m
            })
            .collect()
    }

    /// Direction coordinates of a given complement, if it belongs to the
    /// family.
    pub fn locate(&self, m_basis: &[Matrix]) -> Result<Option<Vec<f64>>> {
        let (p, q) = (self.h.len(), self.seed.len());
        if m_basis.len() != q {
            return Ok(None);
        }
        // Coordinates of span(m) elements in the basis (h, seed).
        let joint: Vec<Matrix> = self.h.iter().chain(&self.seed).cloned().collect();
        let jc = columns_of(&joint);
        let mut coords = Matrix::zeros(p + q, q);
        for (j, mj) in m_basis.iter().enumerate() {
            let (c, r) = least_squares(&jc, &Matrix::column(&flatten(mj)));
            if r > 1e-8 * mj.norm().max(1.0) {
                return Ok(None);
            }
            coords.set_block((0, j), &c);
        }
        // Element of span(m) with seed class e_x: coords_seed · β = e_x.
        let seed_part = coords.block((p, 0), (q, q));
        let h_part = coords.block((0, 0), (p, q));
        let beta = seed_part.try_inverse().map_err(|_| Error::invalid("complement", "does not project onto 𝔤/𝔥"))?;
        let alpha = &h_part * &beta; // p×q, column x = α(c_x)
        let target: Vec<f64> = (0..q)
            .flat_map(|x| (0..p).map(move |k| (x, k)))
            .map(|(x, k)| alpha[(k, x)])
            .zip(&self.particular)
            .map(|(a, a0)| a - a0)
            .collect();
        if self.directions.is_empty() {
            let off = target.iter().map(|v| v * v).sum::<f64>().sqrt();
            return Ok((off <= 1e-8).then(Vec::new));
        }
        let dirs = Matrix::from_fn(target.len(), self.directions.len(), |r, c| self.directions[c][r]);
        let (t, r) = least_squares(&dirs, &Matrix::column(&target));
        Ok((r <= 1e-8).then(|| t.as_col_slice().to_vec()))
    }
}

#[derive(Clone, Debug)]
pub enum ComplementSearch {
    /// No invariant complement; carries the best-fit residual.
    Empty { residual: f64 },
    Found(AffineSolution),
}

impl ComplementSearch {
    pub fn is_empty(&self) -> bool {
        matches!(self, ComplementSearch::Empty { .. })
    }

    pub fn solution(&self) -> Option<&AffineSolution> {
        match self {
            ComplementSearch::Found(s) => Some(s),
            ComplementSearch::Empty { .. } => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ComplementSearch::Empty { residual } => {
                format!("no reductive complement exists (best residual {residual:.2e})")
            }
            ComplementSearch::Found(s) if s.direction_dim() == 0 => "unique complement".into(),
            ComplementSearch::Found(s) => format!("affine family of complements of dimension {}", s.direction_dim()),
        }
    }
}

/// Solves for all `α: 𝔤/𝔥 → 𝔥` such that `𝔪 = span{c_x + α(c_x)}` satisfies
/// `[𝔥, 𝔪] ⊂ 𝔪`. For each `ξ ∈ 𝔥` and quotient basis element `x`, with
/// `q = π([ξ, c_x])`, the condition reads
/// `[ξ, α(x)] − Σ_y q_y α(y) = Σ_y q_y c_y − [ξ, c_x]`.
pub fn find_reductive_complements(g_basis: &[Matrix], h_basis: &[Matrix]) -> Result<ComplementSearch> {
    let split = SubalgebraSplit::new(g_basis.to_vec(), h_basis.to_vec(), None)?;
    let (g, h) = (&split.g, &split.h);
    let p = h.len();
    // Seed: orthogonal complement of 𝔥 inside 𝔤.
    let seed = orthogonal_complement(g, h);
    let q = seed.len();
    if p + q != g.len() {
        return Err(Error::invalid("complement search", "could not build a complement of 𝔥"));
    }
    let joint: Vec<Matrix> = h.iter().chain(&seed).cloned().collect();
    let jc = columns_of(&joint);
    let coords = |y: &Matrix| -> Vec<f64> { least_squares(&jc, &Matrix::column(&flatten(y))).0.as_col_slice().to_vec() };
    // Structure constants of 𝔥: [h_a, h_k] = Σ_l s[a][k][l] h_l.
    let s: Vec<Vec<Vec<f64>>> = h
        .iter()
        .map(|a| h.iter().map(|b| coords(&bracket(a, b))[..p].to_vec()).collect())
        .collect();
    // Unknown index of α(c_x) coefficient on h_k: x·p + k.
    let unknowns = p * q;
    let rows = p * q * p;
    let mut a = Matrix::zeros(rows.max(1), unknowns.max(1));
    let mut rhs = Matrix::zeros(rows.max(1), 1);
    for (ai, xi) in h.iter().enumerate() {
        for x in 0..q {
            let c = coords(&bracket(xi, &seed[x]));
            let (hpart, qpart) = c.split_at(p);
            for l in 0..p {
                let r = (ai * q + x) * p + l;
                for k in 0..p {
                    a[(r, x * p + k)] += s[ai][k][l];
                }
                for y in 0..q {
                    a[(r, y * p + l)] -= qpart[y];
                }
                // Σ q_y c_y − [ξ, c_x] has h-coordinates −hpart.
                rhs[(r, 0)] = -hpart[l];
            }
        }
    }
    if unknowns == 0 {
        return Ok(ComplementSearch::Found(AffineSolution {
            h: h.clone(),
            seed,
            particular: vec![],
            directions: vec![],
            residual: 0.0,
        }));
    }
    let (sol, residual) = least_squares(&a, &rhs);
    if residual > EMPTY_TOLERANCE {
        return Ok(ComplementSearch::Empty { residual });
    }
    Ok(ComplementSearch::Found(AffineSolution {
        h: h.clone(),
        seed,
        particular: sol.as_col_slice().to_vec(),
        directions: null_space(&a, 1e-9),
        residual,
    }))
}

/// Structured-text description of a split: named square matrices tagged as
/// isotropy (`h`), complement (`m`) or other algebra elements (`g`).
#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct BasisFile {
    pub name: String,
    pub size: usize,
    #[serde(rename = "matrix")]
    pub matrices: Vec<NamedMatrix>,
    #[serde(default, rename = "component")]
    pub components: Vec<NamedMatrix>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct NamedMatrix {
    pub name: String,
    #[serde(default)]
    pub role: Option<String>,
    pub rows: Vec<Vec<f64>>,
}

impl NamedMatrix {
    fn to_matrix(&self, size: usize) -> Result<Matrix> {
        if self.rows.len() != size || self.rows.iter().any(|r| r.len() != size) {
            return Err(Error::invalid("basis file", format!("matrix '{}' is not {size}x{size}", self.name)));
        }
        let flat: Vec<f64> = self.rows.iter().flatten().copied().collect();
        Matrix::from_row_slice(size, size, &flat)
    }
}

impl BasisFile {
    /// The split described by the file; `𝔪` is present when any matrix is
    /// tagged `m`.
    pub fn split(&self) -> Result<SubalgebraSplit> {
        let (mut g, mut h, mut m) = (vec![], vec![], vec![]);
        for nm in &self.matrices {
            let mat = nm.to_matrix(self.size)?;
            match nm.role.as_deref().unwrap_or("g") {
                "h" => {
                    h.push(mat.clone());
                    g.push(mat);
                }
                "m" => {
                    m.push(mat.clone());
                    g.push(mat);
                }
                "g" => g.push(mat),
                other => return Err(Error::unknown("basis role", other, &["g", "h", "m"])),
            }
        }
        let m = if m.is_empty() { None } else { Some(m) };
        let comps = self
            .components
            .iter()
            .map(|c| c.to_matrix(self.size))
            .collect::<Result<Vec<_>>>()?;
        SubalgebraSplit::new(g, h, m)?.with_components(comps)
    }
}

/// Classification (when a complement is given) and complement search.
#[derive(Clone, Debug)]
pub struct BasisReport {
    pub name: String,
    pub classification: Option<Classification>,
    pub search: ComplementSearch,
}

pub fn analyze(file: &BasisFile) -> Result<BasisReport> {
    let split = file.split()?;
    let classification = if split.m.is_some() {
        Some(classify(&split)?)
    } else {
        None
    };
    let search = find_reductive_complements(&split.g, &split.h)?;
    Ok(BasisReport {
        name: file.name.clone(),
        classification,
        search,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matexp::hat;

    fn e(i: usize, j: usize) -> Matrix {
        Matrix::unit(2, 2, i, j)
    }

    fn sl2() -> Vec<Matrix> {
        vec![e(0, 1), e(1, 0), Matrix::diagonal(&[1.0, -1.0])]
    }

    #[test]
    fn sphere_split() {
        let h = vec![hat(&[0.0, 0.0, 1.0])];
        let m = vec![hat(&[1.0, 0.0, 0.0]), hat(&[0.0, 1.0, 0.0])];
        let c = classify(&SubalgebraSplit::from_parts(h, m).unwrap()).unwrap();
        assert!(c.reductive && c.symmetric && !c.flat, "{c:?}");
        assert_eq!(c.row(), "reductive ✓ symmetric ✓ flat ✗");
    }

    #[test]
    fn nilpotent_isotropy_has_no_complement() {
        let r = find_reductive_complements(&sl2(), &[e(0, 1)]).unwrap();
        assert!(r.is_empty(), "{r:?}");
    }

    #[test]
    fn diagonal_isotropy_has_a_unique_complement() {
        // 𝔥 = span(diag(1,−1)); ad_H has eigenvalues ±2 on E12, E21, so the
        // only invariant complement is span(E12, E21).
        let r = find_reductive_complements(&sl2(), &[Matrix::diagonal(&[1.0, -1.0])]).unwrap();
        let sol = r.solution().unwrap();
        assert_eq!(sol.direction_dim(), 0);
        let m = sol.representative(&[]);
        let split = SubalgebraSplit::from_parts(vec![Matrix::diagonal(&[1.0, -1.0])], m).unwrap();
        assert!(classify(&split).unwrap().reductive);
    }

    #[test]
    fn trivial_isotropy() {
        let r = find_reductive_complements(&sl2(), &[]).unwrap();
        assert_eq!(r.solution().unwrap().direction_dim(), 0);
    }

    #[test]
    fn split_validation() {
        assert!(SubalgebraSplit::new(vec![e(0, 1), e(0, 1).scale(2.0)], vec![], None).is_err());
        // span(E12, E21) is not a subalgebra
        assert!(SubalgebraSplit::new(sl2(), vec![e(0, 1), e(1, 0)], None).is_err());
        assert!(SubalgebraSplit::from_parts(vec![e(0, 1)], vec![e(0, 1)]).is_err());
    }
}
