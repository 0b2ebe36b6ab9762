//! Deliberately broken connections used to show that the checks can fail.

use std::sync::Arc;

use crate::error::Result;
use crate::matexp::Matrix;

use super::{require_shape, Connection, HomogeneousSpace, Stiefel};

/// Stiefel form without its cubic term, `δQ Qᵀ − Q δQᵀ`. Not consistent once
/// `k ≥ 2`.
#[derive(Clone, Debug)]
pub struct DroppedTermStiefel {
    space: Stiefel,
}

impl DroppedTermStiefel {
    pub fn new(space: Stiefel) -> Self {
        DroppedTermStiefel { space }
    }
}

impl Connection for DroppedTermStiefel {
    fn name(&self) -> String {
        "stiefel_dropped_term".into()
    }

    fn space(&self) -> &dyn HomogeneousSpace {
        &self.space
    }

    fn eval(&self, q: &Matrix, dq: &Matrix) -> Result<Matrix> {
        require_shape(q, (self.space.n(), self.space.k()), "stiefel point")?;
        require_shape(dq, (self.space.n(), self.space.k()), "stiefel tangent")?;
        Ok(dq * &q.transpose() - q * &dq.transpose())
    }
}

/// Another connection plus the same fixed algebra element at every point,
/// which breaks covariance.
#[derive(Clone, Debug)]
pub struct ShiftedConnection {
    inner: Arc<dyn Connection>,
    shift: Matrix,
}

impl ShiftedConnection {
    pub fn new(inner: Arc<dyn Connection>, shift: Matrix) -> Self {
        ShiftedConnection { inner, shift }
    }

    /// Shift by the first isotropy generator at the origin; with no isotropy,
    /// by the first algebra basis element.
    pub fn by_isotropy(inner: Arc<dyn Connection>) -> Self {
        let space = inner.space();
        let shift = space
            .isotropy_basis()
            .into_iter()
            .next()
            .unwrap_or_else(|| space.algebra().basis()[0].clone());
        let shift = shift.scale(1.0 / shift.norm());
        ShiftedConnection { inner, shift }
    }
}

impl Connection for ShiftedConnection {
    fn name(&self) -> String {
        format!("{}_shifted", self.inner.name())
    }

    fn space(&self) -> &dyn HomogeneousSpace {
        self.inner.space()
    }

    fn eval(&self, x: &Matrix, v: &Matrix) -> Result<Matrix> {
        Ok(self.inner.eval(x, v)? + &self.shift)
    }
}
