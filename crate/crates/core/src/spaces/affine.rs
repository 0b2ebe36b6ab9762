use crate::algebra::MatrixGroup;
use crate::error::Result;
use crate::matexp::Matrix;

use super::{require_shape, Connection, HomogeneousSpace};

/// Linear part of the isotropy group of the origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AffineIsotropy {
    Orthogonal,
    General,
}

/// `ℝᵈ` under `x ↦ h x + a`, with group elements `[[h, a], [0, 1]]` and
/// points stored as `d×1` columns.
#[derive(Clone, Debug)]
pub struct AffineSpace {
    d: usize,
    isotropy: AffineIsotropy,
    group: MatrixGroup,
}

impl AffineSpace {
    pub fn new(isotropy: AffineIsotropy, d: usize) -> Self {
        assert!(d >= 1, "affine space needs d >= 1");
        let linear = match isotropy {
            AffineIsotropy::Orthogonal => MatrixGroup::SpecialOrthogonal(d),
            AffineIsotropy::General => MatrixGroup::General(d),
        };
        AffineSpace {
            d,
            isotropy,
            group: MatrixGroup::Affine(Box::new(linear)),
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn isotropy(&self) -> AffineIsotropy {
        self.isotropy
    }

    fn linear(&self, g: &Matrix) -> Matrix {
        g.block((0, 0), (self.d, self.d))
    }

    fn translation(&self, g: &Matrix) -> Matrix {
        g.block((0, self.d), (self.d, 1))
    }
}

impl HomogeneousSpace for AffineSpace {
    fn name(&self) -> String {
        match self.isotropy {
            AffineIsotropy::Orthogonal => format!("affine:{}", self.d),
            AffineIsotropy::General => format!("affine_gl:{}", self.d),
        }
    }

    fn group(&self) -> &MatrixGroup {
        &self.group
    }

    fn origin(&self) -> Matrix {
        Matrix::zeros(self.d, 1)
    }

    fn act(&self, g: &Matrix, x: &Matrix) -> Matrix {
        &self.linear(g) * x + self.translation(g)
    }

    fn push_tangent(&self, g: &Matrix, _x: &Matrix, v: &Matrix) -> Matrix {
        &self.linear(g) * v
    }

    fn inf_act(&self, xi: &Matrix, x: &Matrix) -> Matrix {
        &self.linear(xi) * x + self.translation(xi)
    }

    fn distance_to_manifold(&self, x: &Matrix) -> f64 {
        if x.shape() == (self.d, 1) && x.is_finite() {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn invariant_name(&self) -> &'static str {
        "none"
    }

    fn invariant_residual(&self, _x: &Matrix) -> f64 {
        0.0
    }

    fn lift_point(&self, x: &Matrix) -> Result<Matrix> {
        require_shape(x, (self.d, 1), "affine point")?;
        let mut g = Matrix::identity(self.d + 1);
        g.set_block((0, self.d), x);
        Ok(g)
    }
}

/// Pure translation `ω(x, δx) = [[0, δx], [0, 0]]`.
#[derive(Clone, Debug)]
pub struct AffineTranslation {
    space: AffineSpace,
}

impl AffineTranslation {
    pub fn new(space: AffineSpace) -> Self {
        AffineTranslation { space }
    }
}

impl Connection for AffineTranslation {
    fn name(&self) -> String {
        "translation".into()
    }

    fn space(&self) -> &dyn HomogeneousSpace {
        &self.space
    }

    fn eval(&self, x: &Matrix, v: &Matrix) -> Result<Matrix> {
        let d = self.space.d;
        require_shape(x, (d, 1), "affine point")?;
        require_shape(v, (d, 1), "affine tangent")?;
        let mut w = Matrix::zeros(d + 1, d + 1);
        w.set_block((0, d), v);
        Ok(w)
    }
}
