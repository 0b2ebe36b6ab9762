use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matexp::{gaussian_matrix, seeded_rng, Matrix};

use super::{toda_generator, HomogeneousSpace, VectorField};

pub const FIELD_NAMES: &[&str] = &["constant_rotation", "toda", "gradient_like", "coefficients", "zero"];

/// Named test fields. Every one is written as `f(x) = ξ(x) ⊳ x`.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldKind {
    /// Constant random generator of unit norm drawn from the seed.
    ConstantRotation,
    /// `ξ(P) = P₊ − P₋` on isospectral spaces.
    Toda,
    /// Smooth nonlinear generator `Σₖ tanh(⟨Cₖ, x⟩ + cₖ) Bₖ` with seeded `Bₖ, Cₖ, cₖ`.
    GradientLike,
    /// Constant generator with the given coordinates in the algebra basis.
    Coefficients(Vec<f64>),
    Zero,
}

impl FieldKind {
    pub fn parse(name: &str, coefficients: Option<&[f64]>) -> Result<Self> {
        match name {
            "constant_rotation" => Ok(FieldKind::ConstantRotation),
            "toda" => Ok(FieldKind::Toda),
            "gradient_like" => Ok(FieldKind::GradientLike),
            "zero" => Ok(FieldKind::Zero),
            "coefficients" => coefficients
                .map(|c| FieldKind::Coefficients(c.to_vec()))
                .ok_or_else(|| Error::invalid("field", "'coefficients' needs a coefficient list")),
            _ => Err(Error::unknown("field", name, FIELD_NAMES)),
        }
    }

    /// The constant generator, when the field has one; the exact flow is then
    /// `exp(tξ) ⊳ x0`.
    pub fn constant_generator(&self, space: &dyn HomogeneousSpace, seed: u64) -> Result<Option<Matrix>> {
        let alg = space.algebra();
        match self {
            FieldKind::ConstantRotation => Ok(Some(alg.sample(1.0, &mut seeded_rng(seed)))),
            FieldKind::Zero => Ok(Some(alg.basis()[0].scale(0.0))),
            FieldKind::Coefficients(c) => {
                let basis = alg.basis();
                if c.len() != basis.len() {
                    return Err(Error::invalid(
                        "field",
                        format!("{} coefficients given but {alg} has dimension {}", c.len(), basis.len()),
                    ));
                }
                let mut xi = basis[0].scale(0.0);
                for (ci, b) in c.iter().zip(&basis) {
                    xi += &b.scale(*ci);
                }
                Ok(Some(xi))
            }
            FieldKind::Toda | FieldKind::GradientLike => Ok(None),
        }
    }
}

/// Field backed by a closure.
pub struct FnField<F>(pub F);

impl<F> VectorField for FnField<F>
where
    F: Fn(&Matrix) -> Result<Matrix> + Send + Sync,
{
    fn eval(&self, x: &Matrix) -> Result<Matrix> {
        (self.0)(x)
    }
}

/// Instantiates a named field on `space`.
pub fn test_field(kind: &FieldKind, space: Arc<dyn HomogeneousSpace>, seed: u64) -> Result<Arc<dyn VectorField>> {
    if let Some(xi) = kind.constant_generator(space.as_ref(), seed)? {
        return Ok(Arc::new(FnField(move |x: &Matrix| Ok(space.inf_act(&xi, x)))));
    }
    match kind {
        FieldKind::Toda => {
            if space.invariant_name() != "spectrum_drift" {
                return Err(Error::invalid(
                    "field",
                    format!("'toda' needs an isospectral space, not {}", space.name()),
                ));
            }
            Ok(Arc::new(FnField(move |p: &Matrix| Ok(space.inf_act(&toda_generator(p), p)))))
        }
        FieldKind::GradientLike => {
            let mut rng = seeded_rng(seed);
            let alg = space.algebra();
            let x0 = space.origin();
            let (r, c) = x0.shape();
            let terms: Vec<(Matrix, Matrix, f64)> = (0..3)
                .map(|_| {
                    let b = alg.sample(1.0, &mut rng);
                    let w = gaussian_matrix(r, c, &mut rng).scale(1.0 / ((r * c) as f64).sqrt());
                    let off = gaussian_matrix(1, 1, &mut rng)[(0, 0)];
                    (b, w, off)
                })
                .collect();
            Ok(Arc::new(FnField(move |x: &Matrix| {
                let mut xi = terms[0].0.scale(0.0);
                for (b, w, off) in &terms {
                    xi += &b.scale((w.dot(x) + off).tanh());
                }
                Ok(space.inf_act(&xi, x))
            })))
        }
        _ => unreachable!("constant fields handled above"),
    }
}
