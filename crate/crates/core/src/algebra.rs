//! Matrix Lie groups and their algebras as used by the space catalog.

use std::fmt;

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matexp::{gaussian_matrix, special_orthogonal_from_rng, Matrix, TAG_TOLERANCE};

/// Identifies a matrix Lie algebra by its defining linear constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlgebraTag {
    /// so(d): skew-symmetric d×d.
    Skew(usize),
    /// sl(d): traceless d×d.
    Traceless(usize),
    /// gl(d).
    General(usize),
    /// 𝔥 ⋉ ℝᵈ embedded as (d+1)×(d+1) matrices `[[A, b], [0, 0]]`.
    Affine(Box<AlgebraTag>),
    /// 𝔤 × 𝔤 embedded block-diagonally.
    Product(Box<AlgebraTag>),
}

impl AlgebraTag {
    /// Size of the square matrices carrying the algebra.
    pub fn matrix_size(&self) -> usize {
        match self {
            AlgebraTag::Skew(d) | AlgebraTag::Traceless(d) | AlgebraTag::General(d) => *d,
            AlgebraTag::Affine(inner) => inner.matrix_size() + 1,
            AlgebraTag::Product(inner) => 2 * inner.matrix_size(),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis().len()
    }

    /// A fixed basis of unit-norm-ish generators.
    pub fn basis(&self) -> Vec<Matrix> {
        match self {
            AlgebraTag::Skew(d) => {
                let d = *d;
                let mut out = Vec::new();
                for i in 0..d {
                    for j in (i + 1)..d {
                        out.push(Matrix::unit(d, d, j, i) - Matrix::unit(d, d, i, j));
                    }
                }
                out
            }
            AlgebraTag::General(d) => {
                let d = *d;
                (0..d)
                    .flat_map(|i| (0..d).map(move |j| Matrix::unit(d, d, i, j)))
                    .collect()
            }
            AlgebraTag::Traceless(d) => {
                let d = *d;
                let mut out = Vec::new();
                for i in 0..d {
                    for j in 0..d {
                        if i != j {
                            out.push(Matrix::unit(d, d, i, j));
                        }
                    }
                }
                for i in 0..d.saturating_sub(1) {
                    out.push(Matrix::unit(d, d, i, i) - Matrix::unit(d, d, d - 1, d - 1));
                }
                out
            }
            AlgebraTag::Affine(inner) => {
                let d = inner.matrix_size();
                let mut out: Vec<Matrix> = inner
                    .basis()
                    .into_iter()
                    .map(|a| Matrix::block_diag(&a, &Matrix::zeros(1, 1)))
                    .collect();
                for i in 0..d {
                    out.push(Matrix::unit(d + 1, d + 1, i, d));
                }
                out
            }
            AlgebraTag::Product(inner) => {
                let d = inner.matrix_size();
                let z = Matrix::zeros(d, d);
                let b = inner.basis();
                b.iter()
                    .map(|a| Matrix::block_diag(a, &z))
                    .chain(b.iter().map(|a| Matrix::block_diag(&z, a)))
                    .collect()
            }
        }
    }

    /// Frobenius distance from `m` to the algebra (zero-padded shape errors
    /// count as infinite).
    pub fn defect(&self, m: &Matrix) -> f64 {
        let n = self.matrix_size();
        if m.shape() != (n, n) {
            return f64::INFINITY;
        }
        (m - &self.project(m)).norm()
    }

    /// Orthogonal projection of a square matrix onto the algebra.
    pub fn project(&self, m: &Matrix) -> Matrix {
        match self {
            AlgebraTag::Skew(_) => m.skew(),
            AlgebraTag::General(_) => m.clone(),
            AlgebraTag::Traceless(d) => m - &Matrix::identity(*d).scale(m.trace() / *d as f64),
            AlgebraTag::Affine(inner) => {
                let d = inner.matrix_size();
                let mut out = Matrix::zeros(d + 1, d + 1);
                out.set_block((0, 0), &inner.project(&m.block((0, 0), (d, d))));
                out.set_block((0, d), &m.block((0, d), (d, 1)));
                out
            }
            AlgebraTag::Product(inner) => {
                let d = inner.matrix_size();
                Matrix::block_diag(
                    &inner.project(&m.block((0, 0), (d, d))),
                    &inner.project(&m.block((d, d), (d, d))),
                )
            }
        }
    }

    pub fn contains(&self, m: &Matrix) -> bool {
        self.defect(m) <= TAG_TOLERANCE
    }

    /// Random element with Frobenius norm `norm`.
    pub fn sample(&self, norm: f64, rng: &mut ChaCha8Rng) -> Matrix {
        let n = self.matrix_size();
        loop {
            let m = self.project(&gaussian_matrix(n, n, rng));
            let nm = m.norm();
            if nm > 1e-8 {
                return m.scale(norm / nm);
            }
        }
    }
}

impl fmt::Display for AlgebraTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraTag::Skew(d) => write!(f, "so({d})"),
            AlgebraTag::Traceless(d) => write!(f, "sl({d})"),
            AlgebraTag::General(d) => write!(f, "gl({d})"),
            AlgebraTag::Affine(inner) => write!(f, "{inner}⋉R^{}", inner.matrix_size()),
            AlgebraTag::Product(inner) => write!(f, "{inner}×{inner}"),
        }
    }
}

/// A matrix checked to lie in a tagged Lie algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    value: Matrix,
    tag: AlgebraTag,
}

impl AlgebraElement {
    pub fn new(value: Matrix, tag: AlgebraTag) -> Result<Self> {
        let defect = tag.defect(&value);
        if defect > TAG_TOLERANCE {
            return Err(Error::NotInSet {
                what: "algebra element".into(),
                expected: tag_description(&tag),
                defect,
            });
        }
        Ok(AlgebraElement { value, tag })
    }

    pub fn value(&self) -> &Matrix {
        &self.value
    }

    pub fn tag(&self) -> &AlgebraTag {
        &self.tag
    }

    pub fn into_value(self) -> Matrix {
        self.value
    }
}

fn tag_description(tag: &AlgebraTag) -> &'static str {
    match tag {
        AlgebraTag::Skew(_) => "skew-symmetric",
        AlgebraTag::Traceless(_) => "traceless",
        AlgebraTag::General(_) => "square of the right size",
        AlgebraTag::Affine(_) => "an affine algebra element",
        AlgebraTag::Product(_) => "a block-diagonal product element",
    }
}

/// Matrix groups acting in the catalog.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatrixGroup {
    /// SO(d).
    SpecialOrthogonal(usize),
    /// GL(d); samples are drawn from the identity component.
    General(usize),
    /// H ⋉ ℝᵈ as `[[h, a], [0, 1]]` with H one of the linear groups above.
    Affine(Box<MatrixGroup>),
    /// G × G embedded block-diagonally.
    Product(Box<MatrixGroup>),
}

impl MatrixGroup {
    pub fn parse(tag: &str) -> Result<MatrixGroup> {
        let t = tag.trim().to_ascii_lowercase();
        let (head, digits) = t.split_at(t.find(|c: char| c.is_ascii_digit()).unwrap_or(t.len()));
        let d: usize = digits
            .trim_matches(|c| c == '(' || c == ')')
            .parse()
            .map_err(|_| Error::invalid("group tag", format!("'{tag}' (expected e.g. so3, gl2)")))?;
        if d == 0 {
            return Err(Error::invalid("group tag", "dimension must be positive"));
        }
        match head.trim_end_matches('(') {
            "so" => Ok(MatrixGroup::SpecialOrthogonal(d)),
            "gl" => Ok(MatrixGroup::General(d)),
            _ => Err(Error::unknown("group", tag, &["so<d>", "gl<d>"])),
        }
    }

    pub fn matrix_size(&self) -> usize {
        self.algebra().matrix_size()
    }

    pub fn algebra(&self) -> AlgebraTag {
        match self {
            MatrixGroup::SpecialOrthogonal(d) => AlgebraTag::Skew(*d),
            MatrixGroup::General(d) => AlgebraTag::General(*d),
            MatrixGroup::Affine(inner) => AlgebraTag::Affine(Box::new(inner.algebra())),
            MatrixGroup::Product(inner) => AlgebraTag::Product(Box::new(inner.algebra())),
        }
    }

    /// Distance from `g` to the group; `INFINITY` for a wrong shape.
    pub fn membership_defect(&self, g: &Matrix) -> f64 {
        let n = self.matrix_size();
        if g.shape() != (n, n) {
            return f64::INFINITY;
        }
        match self {
            MatrixGroup::SpecialOrthogonal(d) => {
                let orth = (&(&g.transpose() * g) - &Matrix::identity(*d)).norm();
                orth + (g.determinant() - 1.0).abs()
            }
            MatrixGroup::General(_) => {
                if g.determinant().abs() > 1e-12 * g.norm().powi(n as i32).max(1e-300) {
                    0.0
                } else {
                    1.0
                }
            }
            MatrixGroup::Affine(inner) => {
                let d = n - 1;
                let bottom = g.block((d, 0), (1, d + 1)) - Matrix::unit(1, d + 1, 0, d);
                bottom.norm() + inner.membership_defect(&g.block((0, 0), (d, d)))
            }
            MatrixGroup::Product(inner) => {
                let d = n / 2;
                let off = g.block((0, d), (d, d)).norm() + g.block((d, 0), (d, d)).norm();
                off + inner.membership_defect(&g.block((0, 0), (d, d)))
                    + inner.membership_defect(&g.block((d, d), (d, d)))
            }
        }
    }

    /// Well-conditioned random element.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Matrix {
        match self {
            MatrixGroup::SpecialOrthogonal(d) => special_orthogonal_from_rng(*d, rng),
            MatrixGroup::General(d) => {
                // Q1 · diag(s) · Q2 with singular values in [0.5, 2].
                let q1 = special_orthogonal_from_rng(*d, rng);
                let q2 = special_orthogonal_from_rng(*d, rng);
                let u = gaussian_matrix(*d, 1, rng);
                let s: Vec<f64> = (0..*d).map(|i| 2f64.powf(u[(i, 0)].tanh())).collect();
                &(&q1 * &Matrix::diagonal(&s)) * &q2
            }
            MatrixGroup::Affine(inner) => {
                let d = inner.matrix_size();
                let mut g = Matrix::identity(d + 1);
                g.set_block((0, 0), &inner.sample(rng));
                g.set_block((0, d), &gaussian_matrix(d, 1, rng));
                g
            }
            MatrixGroup::Product(inner) => {
                let a = inner.sample(rng);
                let b = inner.sample(rng);
                Matrix::block_diag(&a, &b)
            }
        }
    }
}

impl fmt::Display for MatrixGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixGroup::SpecialOrthogonal(d) => write!(f, "SO({d})"),
            MatrixGroup::General(d) => write!(f, "GL({d})"),
            MatrixGroup::Affine(inner) => write!(f, "{inner}⋉R^{}", inner.matrix_size()),
            MatrixGroup::Product(inner) => write!(f, "{inner}×{inner}"),
        }
    }
}
