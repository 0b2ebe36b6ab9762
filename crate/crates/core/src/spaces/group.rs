use crate::algebra::MatrixGroup;
use crate::error::{Error, Result};
use crate::matexp::Matrix;

use super::{require_shape, Connection, HomogeneousSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `a ⊳ g = a g`.
    Left,
    /// `a ⊳ g = g a⁻¹`.
    Right,
}

/// A matrix group acting on itself from one side; the isotropy is trivial.
#[derive(Clone, Debug)]
pub struct LieGroupSpace {
    group: MatrixGroup,
    side: Side,
}

impl LieGroupSpace {
    pub fn new(group: MatrixGroup, side: Side) -> Result<Self> {
        Ok(LieGroupSpace { group, side })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    fn n(&self) -> usize {
        self.group.matrix_size()
    }
}

fn group_slug(group: &MatrixGroup) -> String {
    match group {
        MatrixGroup::SpecialOrthogonal(d) => format!("so:{d}"),
        MatrixGroup::General(d) => format!("gl:{d}"),
        other => other.to_string(),
    }
}

fn group_invariant(group: &MatrixGroup, g: &Matrix) -> f64 {
    match group {
        MatrixGroup::SpecialOrthogonal(d) => (&(&g.transpose() * g) - &Matrix::identity(*d)).norm(),
        _ => group.membership_defect(g),
    }
}

fn inverse_or_nan(g: &Matrix) -> Matrix {
    g.try_inverse()
        .unwrap_or_else(|_| Matrix::from_fn(g.rows(), g.cols(), |_, _| f64::NAN))
}

impl HomogeneousSpace for LieGroupSpace {
    fn name(&self) -> String {
        match self.side {
            Side::Left => group_slug(&self.group),
            Side::Right => format!("{}:right", group_slug(&self.group)),
        }
    }

    fn group(&self) -> &MatrixGroup {
        &self.group
    }

    fn origin(&self) -> Matrix {
        Matrix::identity(self.n())
    }

    fn act(&self, a: &Matrix, g: &Matrix) -> Matrix {
        match self.side {
            Side::Left => a * g,
            Side::Right => g * &inverse_or_nan(a),
        }
    }

    fn push_tangent(&self, a: &Matrix, _g: &Matrix, v: &Matrix) -> Matrix {
        match self.side {
            Side::Left => a * v,
            Side::Right => v * &inverse_or_nan(a),
        }
    }

    fn inf_act(&self, xi: &Matrix, g: &Matrix) -> Matrix {
        match self.side {
            Side::Left => xi * g,
            Side::Right => -(g * xi),
        }
    }

    fn distance_to_manifold(&self, x: &Matrix) -> f64 {
        self.group.membership_defect(x)
    }

    fn invariant_name(&self) -> &'static str {
        match self.group {
            MatrixGroup::SpecialOrthogonal(_) => "orthogonality_defect",
            _ => "membership_defect",
        }
    }

    fn invariant_residual(&self, x: &Matrix) -> f64 {
        group_invariant(&self.group, x)
    }

    fn lift_point(&self, x: &Matrix) -> Result<Matrix> {
        require_shape(x, (self.n(), self.n()), "group point")?;
        match self.side {
            Side::Left => Ok(x.clone()),
            Side::Right => x.try_inverse(),
        }
    }
}

/// Maurer–Cartan form: `δg g⁻¹` on the left-acted group, `−g⁻¹ δg` on the
/// right-acted one.
#[derive(Clone, Debug)]
pub struct MaurerCartan {
    space: LieGroupSpace,
}

impl MaurerCartan {
    pub fn new(space: LieGroupSpace) -> Self {
        MaurerCartan { space }
    }
}

impl Connection for MaurerCartan {
    fn name(&self) -> String {
        match self.space.side {
            Side::Left => "maurer_cartan_plus".into(),
            Side::Right => "maurer_cartan_minus".into(),
        }
    }

    fn space(&self) -> &dyn HomogeneousSpace {
        &self.space
    }

    fn eval(&self, g: &Matrix, dg: &Matrix) -> Result<Matrix> {
        let n = self.space.n();
        require_shape(g, (n, n), "group point")?;
        require_shape(dg, (n, n), "group tangent")?;
        match self.space.side {
            Side::Left => Ok(g.transpose().solve(&dg.transpose())?.transpose()),
            Side::Right => Ok(-g.solve(dg)?),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CartanVariant {
    Plus,
    Minus,
    Mean,
}

impl CartanVariant {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "plus" => Ok(CartanVariant::Plus),
            "minus" => Ok(CartanVariant::Minus),
            "mean" => Ok(CartanVariant::Mean),
            _ => Err(Error::unknown("cartan-schouten variant", s, &["plus", "minus", "mean"])),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            CartanVariant::Plus => "plus",
            CartanVariant::Minus => "minus",
            CartanVariant::Mean => "mean",
        }
    }
}

/// `G` under `(g₁, g₂) ⊳ g = g₁ g g₂⁻¹`, with pairs stored block-diagonally.
#[derive(Clone, Debug)]
pub struct CartanSchouten {
    base: MatrixGroup,
    group: MatrixGroup,
    variant: CartanVariant,
}

impl CartanSchouten {
    pub fn new(base: MatrixGroup, variant: CartanVariant) -> Result<Self> {
        match base {
            MatrixGroup::SpecialOrthogonal(_) | MatrixGroup::General(_) => Ok(CartanSchouten {
                group: MatrixGroup::Product(Box::new(base.clone())),
                base,
                variant,
            }),
            _ => Err(Error::invalid("cartan-schouten", format!("unsupported group {base}"))),
        }
    }

    pub fn variant(&self) -> CartanVariant {
        self.variant
    }

    pub fn with_variant(&self, variant: CartanVariant) -> Self {
        CartanSchouten {
            variant,
            ..self.clone()
        }
    }

    fn d(&self) -> usize {
        self.base.matrix_size()
    }

    fn halves(&self, pair: &Matrix) -> (Matrix, Matrix) {
        let d = self.d();
        (pair.block((0, 0), (d, d)), pair.block((d, d), (d, d)))
    }
}

impl HomogeneousSpace for CartanSchouten {
    fn name(&self) -> String {
        let slug = group_slug(&self.base).replace(':', "");
        format!("cartan_schouten:{slug}:{}", self.variant.as_str())
    }

    fn group(&self) -> &MatrixGroup {
        &self.group
    }

    fn origin(&self) -> Matrix {
        Matrix::identity(self.d())
    }

    fn act(&self, pair: &Matrix, g: &Matrix) -> Matrix {
        let (a, b) = self.halves(pair);
        &(&a * g) * &inverse_or_nan(&b)
    }

    fn push_tangent(&self, pair: &Matrix, _g: &Matrix, v: &Matrix) -> Matrix {
        self.act(pair, v)
    }

    fn inf_act(&self, pair: &Matrix, g: &Matrix) -> Matrix {
        let (xi, zeta) = self.halves(pair);
        &xi * g - g * &zeta
    }

    fn distance_to_manifold(&self, x: &Matrix) -> f64 {
        self.base.membership_defect(x)
    }

    fn invariant_name(&self) -> &'static str {
        match self.base {
            MatrixGroup::SpecialOrthogonal(_) => "orthogonality_defect",
            _ => "membership_defect",
        }
    }

    fn invariant_residual(&self, x: &Matrix) -> f64 {
        group_invariant(&self.base, x)
    }

    fn lift_point(&self, x: &Matrix) -> Result<Matrix> {
        require_shape(x, (self.d(), self.d()), "group point")?;
        Ok(Matrix::block_diag(x, &Matrix::identity(self.d())))
    }
}

/// `ω₊ = (δg g⁻¹, 0)`, `ω₋ = (0, −g⁻¹ δg)`, or their mean, chosen by the
/// space's variant.
#[derive(Clone, Debug)]
pub struct CartanSchoutenConnection {
    space: CartanSchouten,
}

impl CartanSchoutenConnection {
    pub fn new(space: CartanSchouten) -> Self {
        CartanSchoutenConnection { space }
    }
}

impl Connection for CartanSchoutenConnection {
    fn name(&self) -> String {
        format!("cartan_schouten_{}", self.space.variant.as_str())
    }

    fn space(&self) -> &dyn HomogeneousSpace {
        &self.space
    }

    fn eval(&self, g: &Matrix, dg: &Matrix) -> Result<Matrix> {
        let d = self.space.d();
        require_shape(g, (d, d), "group point")?;
        require_shape(dg, (d, d), "group tangent")?;
        let plus = || -> Result<Matrix> { Ok(g.transpose().solve(&dg.transpose())?.transpose()) };
        let minus = || -> Result<Matrix> { Ok(-g.solve(dg)?) };
        let z = Matrix::zeros(d, d);
        Ok(match self.space.variant {
            CartanVariant::Plus => Matrix::block_diag(&plus()?, &z),
            CartanVariant::Minus => Matrix::block_diag(&z, &minus()?),
            CartanVariant::Mean => Matrix::block_diag(&plus()?, &minus()?).scale(0.5),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matexp::{hat, seeded_rng};

    #[test]
    fn maurer_cartan_at_identity() {
        let s = LieGroupSpace::new(MatrixGroup::SpecialOrthogonal(3), Side::Left).unwrap();
        let c = MaurerCartan::new(s.clone());
        let dg = hat(&[1.0, 2.0, 3.0]);
        assert_eq!(c.eval(&s.origin(), &dg).unwrap(), dg);
        let r = LieGroupSpace::new(MatrixGroup::SpecialOrthogonal(3), Side::Right).unwrap();
        assert_eq!(MaurerCartan::new(r).eval(&s.origin(), &dg).unwrap(), -dg);
    }

    #[test]
    fn both_sides_consistent() {
        let mut rng = seeded_rng(11);
        for side in [Side::Left, Side::Right] {
            let s = LieGroupSpace::new(MatrixGroup::General(3), side).unwrap();
            let c = MaurerCartan::new(s.clone());
            for _ in 0..10 {
                let g = s.sample_point(&mut rng);
                let v = s.sample_tangent(&g, &mut rng);
                let w = c.eval(&g, &v).unwrap();
                assert!(s.inf_act(&w, &g).distance(&v).unwrap() < 1e-12);
                let lifted = s.lift_point(&g).unwrap();
                assert!(s.act(&lifted, &s.origin()).distance(&g).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn cartan_schouten_mean_at_identity() {
        let s = CartanSchouten::new(MatrixGroup::SpecialOrthogonal(3), CartanVariant::Mean).unwrap();
        assert_eq!(s.name(), "cartan_schouten:so3:mean");
        let c = CartanSchoutenConnection::new(s.clone());
        let dg = hat(&[0.5, -1.0, 2.0]);
        let w = c.eval(&s.origin(), &dg).unwrap();
        assert_eq!(w, Matrix::block_diag(&dg.scale(0.5), &dg.scale(-0.5)));
        assert_eq!(s.inf_act(&w, &s.origin()), dg);
        // isotropy is the diagonal copy of so(3)
        assert_eq!(s.isotropy_basis().len(), 3);
    }
}
