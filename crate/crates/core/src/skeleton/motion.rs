use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matexp::{cayley, expm, Matrix};

/// Map from the algebra to the group with `Ψ(−ξ) = Ψ(ξ)⁻¹`.
pub trait MotionMap: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;
    fn apply(&self, xi: &Matrix) -> Result<Matrix>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Exponential;

impl MotionMap for Exponential {
    fn name(&self) -> &'static str {
        "exponential"
    }
    fn apply(&self, xi: &Matrix) -> Result<Matrix> {
        expm(xi)
    }
}

/// Cayley transform; only valid on quadratic groups and carries no order
/// guarantee for the catalog methods.
#[derive(Debug, Clone, Copy, Default)]
pub struct Cayley;

impl MotionMap for Cayley {
    fn name(&self) -> &'static str {
        "cayley"
    }
    fn apply(&self, xi: &Matrix) -> Result<Matrix> {
        cayley(xi)
    }
}

pub const MOTION_NAMES: &[&str] = &["exponential", "cayley"];

pub fn motion_map(name: &str) -> Result<Arc<dyn MotionMap>> {
    match name {
        "exponential" | "exp" => Ok(Arc::new(Exponential)),
        "cayley" => Ok(Arc::new(Cayley)),
        _ => Err(Error::unknown("motion map", name, MOTION_NAMES)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matexp::hat;

    #[test]
    fn lookup() {
        assert_eq!(motion_map("exponential").unwrap().name(), "exponential");
        assert_eq!(motion_map("cayley").unwrap().name(), "cayley");
        assert!(matches!(motion_map("pade"), Err(Error::UnknownName { .. })));
    }

    #[test]
    fn both_maps_are_odd_inverse() {
        let xi = hat(&[0.3, -0.2, 0.5]);
        for m in [motion_map("exponential").unwrap(), motion_map("cayley").unwrap()] {
            let prod = &m.apply(&xi).unwrap() * &m.apply(&-&xi).unwrap();
            assert!(prod.distance(&Matrix::identity(3)).unwrap() < 1e-14, "{}", m.name());
            assert_eq!(m.apply(&Matrix::zeros(3, 3)).unwrap(), Matrix::identity(3));
        }
    }
}
