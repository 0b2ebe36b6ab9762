use crate::algebra::MatrixGroup;
use crate::error::{Error, Result};
use crate::matexp::{solve_sylvester_spd, symmetric_eigen, Matrix};

use super::{require_shape, Connection, HomogeneousSpace};

/// Symmetric positive definite matrices under `A ⊳ P = A P Aᵀ`, `A ∈ GL(d)`.
#[derive(Clone, Debug)]
pub struct Spd {
    d: usize,
    group: MatrixGroup,
}

impl Spd {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("spd", "need d >= 1"));
        }
        Ok(Spd {
            d,
            group: MatrixGroup::General(d),
        })
    }

    pub fn min_eigenvalue(p: &Matrix) -> f64 {
        symmetric_eigen(p).0[0]
    }

    fn check(&self, p: &Matrix, dp: &Matrix) -> Result<()> {
        require_shape(p, (self.d, self.d), "spd point")?;
        require_shape(dp, (self.d, self.d), "spd tangent")?;
        let asym = (dp - &dp.transpose()).norm();
        if asym > 1e-10 * dp.norm().max(1.0) {
            return Err(Error::NotInSet {
                what: "spd tangent".into(),
                expected: "symmetric",
                defect: asym,
            });
        }
        let d = self.distance_to_manifold(p);
        if d > 0.0 {
            return Err(Error::NotInSet {
                what: "spd point".into(),
                expected: "symmetric positive definite",
                defect: d,
            });
        }
        Ok(())
    }
}

impl HomogeneousSpace for Spd {
    fn name(&self) -> String {
        format!("spd:{}", self.d)
    }

    fn group(&self) -> &MatrixGroup {
        &self.group
    }

    fn origin(&self) -> Matrix {
        Matrix::identity(self.d)
    }

    fn act(&self, g: &Matrix, x: &Matrix) -> Matrix {
        &(g * x) * &g.transpose()
    }

    fn push_tangent(&self, g: &Matrix, _x: &Matrix, v: &Matrix) -> Matrix {
        &(g * v) * &g.transpose()
    }

    fn inf_act(&self, xi: &Matrix, x: &Matrix) -> Matrix {
        xi * x + x * &xi.transpose()
    }

    /// Symmetry defect beyond `1e-10` (relative) plus the amount by which the
    /// smallest eigenvalue falls short of `1e-12`.
    fn distance_to_manifold(&self, x: &Matrix) -> f64 {
        if x.shape() != (self.d, self.d) || !x.is_finite() {
            return f64::INFINITY;
        }
        let asym = (x - &x.transpose()).norm();
        let asym_excess = if asym > 1e-10 * x.norm().max(1.0) { asym } else { 0.0 };
        let shortfall = (1e-12 - Spd::min_eigenvalue(x)).max(0.0);
        asym_excess + shortfall
    }

    fn invariant_name(&self) -> &'static str {
        "min_eigenvalue"
    }

    fn invariant_residual(&self, x: &Matrix) -> f64 {
        Spd::min_eigenvalue(x)
    }

    /// Cholesky factor `L` with `L Lᵀ = P`.
    fn lift_point(&self, x: &Matrix) -> Result<Matrix> {
        require_shape(x, (self.d, self.d), "spd point")?;
        let chol = x
            .sym()
            .into_dmatrix()
            .cholesky()
            .ok_or_else(|| Error::NotInSet {
                what: "spd point".into(),
                expected: "positive definite",
                defect: Spd::min_eigenvalue(x),
            })?;
        Ok(Matrix::from_dmatrix(chol.l()))
    }
}

/// `ω(P, δP) = ½ δP P⁻¹`. Its values at the origin are the symmetric
/// matrices, and it is equivariant under all of GL(d).
#[derive(Clone, Debug)]
pub struct SpdConnection {
    space: Spd,
}

impl SpdConnection {
    pub fn new(space: Spd) -> Self {
        SpdConnection { space }
    }
}

impl Connection for SpdConnection {
    fn name(&self) -> String {
        "spd".into()
    }

    fn space(&self) -> &dyn HomogeneousSpace {
        &self.space
    }

    fn eval(&self, p: &Matrix, dp: &Matrix) -> Result<Matrix> {
        self.space.check(p, dp)?;
        let w = p.solve(&dp.transpose())?;
        Ok(w.transpose().scale(0.5))
    }
}

/// Symmetric solution of `P ξ + ξ P = δP`. Consistent, but only covariant
/// under the orthogonal subgroup.
#[derive(Clone, Debug)]
pub struct SpdSylvesterForm {
    space: Spd,
}

impl SpdSylvesterForm {
    pub fn new(space: Spd) -> Self {
        SpdSylvesterForm { space }
    }
}

impl Connection for SpdSylvesterForm {
    fn name(&self) -> String {
        "spd_sylvester".into()
    }

    fn space(&self) -> &dyn HomogeneousSpace {
        &self.space
    }

    fn eval(&self, p: &Matrix, dp: &Matrix) -> Result<Matrix> {
        self.space.check(p, dp)?;
        solve_sylvester_spd(p, dp)
    }
}
