//! Homogeneous spaces, their connections, and test vector fields.
//!
//! Points are stored as concrete matrices (columns, orthonormal frames,
//! symmetric matrices, group elements). A connection is an algebra-valued
//! one-form `ω(x, v)` with `inf_act(ω(x, v), x) = v` that transforms by
//! conjugation under the group.

mod affine;
mod controls;
mod fields;
mod group;
mod isospectral;
mod registry;
mod spd;
mod stiefel;

use std::fmt;
use std::sync::Arc;

use rand_chacha::ChaCha8Rng;

use crate::algebra::{AlgebraTag, MatrixGroup};
use crate::error::{Error, Result};
use crate::matexp::{columns_of, null_space, Matrix};
use crate::skeleton::IsotropyChoice;

pub use affine::{AffineIsotropy, AffineSpace, AffineTranslation};
pub use controls::{DroppedTermStiefel, ShiftedConnection};
pub use fields::{test_field, FieldKind, FnField, FIELD_NAMES};
pub use group::{CartanSchouten, CartanSchoutenConnection, CartanVariant, LieGroupSpace, MaurerCartan, Side};
pub use isospectral::{lax_choice, toda_generator, GrassmannConnection, Isospectral, LaxChoice};
pub use registry::{resolve_space, SpaceEntry, SpaceRegistry, SPACE_EXAMPLES};
pub use spd::{Spd, SpdConnection, SpdSylvesterForm};
pub use stiefel::{Stiefel, StiefelConnection};

/// Transitive action of a matrix group on a set of matrices.
pub trait HomogeneousSpace: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    fn group(&self) -> &MatrixGroup;

    fn algebra(&self) -> AlgebraTag {
        self.group().algebra()
    }

    fn origin(&self) -> Matrix;

    /// `g ⊳ x`.
    fn act(&self, g: &Matrix, x: &Matrix) -> Matrix;

    /// Tangent map of `x ↦ g ⊳ x` applied to `v ∈ T_x M`.
    fn push_tangent(&self, g: &Matrix, x: &Matrix, v: &Matrix) -> Matrix;

    /// `ξ ⊳ x`, the derivative of `t ↦ exp(tξ) ⊳ x` at zero.
    fn inf_act(&self, xi: &Matrix, x: &Matrix) -> Matrix;

    /// Zero on the manifold, growing with the violation of its defining
    /// constraints.
    fn distance_to_manifold(&self, x: &Matrix) -> f64;

    /// Name of the quantity reported by [`invariant_residual`](Self::invariant_residual).
    fn invariant_name(&self) -> &'static str;

    /// Quantity that an exact flow on the manifold keeps fixed (or, for SPD,
    /// the smallest eigenvalue which must stay positive).
    fn invariant_residual(&self, x: &Matrix) -> f64;

    /// A group element `g` with `g ⊳ origin = x`.
    fn lift_point(&self, x: &Matrix) -> Result<Matrix>;

    /// A typical starting point for experiments.
    fn initial_point(&self) -> Matrix {
        self.origin()
    }

    fn sample_group(&self, rng: &mut ChaCha8Rng) -> Matrix {
        self.group().sample(rng)
    }

    fn sample_point(&self, rng: &mut ChaCha8Rng) -> Matrix {
        let g = self.sample_group(rng);
        self.act(&g, &self.origin())
    }

    /// Random tangent vector at `x`, generated as `ξ ⊳ x` for a random `ξ`.
    fn sample_tangent(&self, x: &Matrix, rng: &mut ChaCha8Rng) -> Matrix {
        let xi = self.algebra().sample(1.0, rng);
        self.inf_act(&xi, x)
    }

    /// Basis of the isotropy algebra at the origin, the kernel of
    /// `ξ ↦ ξ ⊳ origin`.
    fn isotropy_basis(&self) -> Vec<Matrix> {
        isotropy_basis_at(self, &self.origin())
    }

    fn check_point(&self, x: &Matrix) -> Result<()> {
        let d = self.distance_to_manifold(x);
        if d.is_finite() && d <= 1e-8 {
            Ok(())
        } else {
            Err(Error::NotInSet {
                what: format!("point of {}", self.name()),
                expected: "on the manifold",
                defect: d,
            })
        }
    }
}

/// Kernel of `ξ ↦ ξ ⊳ x` expressed in the algebra's matrix form.
pub fn isotropy_basis_at<S: HomogeneousSpace + ?Sized>(space: &S, x: &Matrix) -> Vec<Matrix> {
    let basis = space.algebra().basis();
    let images: Vec<Matrix> = basis.iter().map(|b| space.inf_act(b, x)).collect();
    let a = columns_of(&images);
    null_space(&a, 1e-10)
        .into_iter()
        .map(|coef| {
            let mut m = basis[0].scale(0.0);
            for (c, b) in coef.iter().zip(&basis) {
                m += &b.scale(*c);
            }
            m
        })
        .collect()
}

/// Algebra-valued one-form on a homogeneous space.
pub trait Connection: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    fn space(&self) -> &dyn HomogeneousSpace;

    /// `ω(x, v)` for a tangent vector `v` at `x`.
    fn eval(&self, x: &Matrix, v: &Matrix) -> Result<Matrix>;
}

/// Shared handle to the space underlying a connection.
pub fn space_of(connection: &Arc<dyn Connection>) -> Arc<dyn HomogeneousSpace> {
    Arc::new(ConnectionSpace(connection.clone()))
}

#[derive(Debug)]
struct ConnectionSpace(Arc<dyn Connection>);

impl HomogeneousSpace for ConnectionSpace {
    fn name(&self) -> String {
        self.0.space().name()
    }
    fn group(&self) -> &MatrixGroup {
        self.0.space().group()
    }
    fn algebra(&self) -> AlgebraTag {
        self.0.space().algebra()
    }
    fn origin(&self) -> Matrix {
        self.0.space().origin()
    }
    fn act(&self, g: &Matrix, x: &Matrix) -> Matrix {
        self.0.space().act(g, x)
    }
    fn push_tangent(&self, g: &Matrix, x: &Matrix, v: &Matrix) -> Matrix {
        self.0.space().push_tangent(g, x, v)
    }
    fn inf_act(&self, xi: &Matrix, x: &Matrix) -> Matrix {
        self.0.space().inf_act(xi, x)
    }
    fn distance_to_manifold(&self, x: &Matrix) -> f64 {
        self.0.space().distance_to_manifold(x)
    }
    fn invariant_name(&self) -> &'static str {
        self.0.space().invariant_name()
    }
    fn invariant_residual(&self, x: &Matrix) -> f64 {
        self.0.space().invariant_residual(x)
    }
    fn lift_point(&self, x: &Matrix) -> Result<Matrix> {
        self.0.space().lift_point(x)
    }
    fn initial_point(&self) -> Matrix {
        self.0.space().initial_point()
    }
    fn sample_group(&self, rng: &mut ChaCha8Rng) -> Matrix {
        self.0.space().sample_group(rng)
    }
    fn sample_point(&self, rng: &mut ChaCha8Rng) -> Matrix {
        self.0.space().sample_point(rng)
    }
    fn sample_tangent(&self, x: &Matrix, rng: &mut ChaCha8Rng) -> Matrix {
        self.0.space().sample_tangent(x, rng)
    }
    fn isotropy_basis(&self) -> Vec<Matrix> {
        self.0.space().isotropy_basis()
    }
}

/// Tangent vector field on a space.
pub trait VectorField: Send + Sync {
    fn eval(&self, x: &Matrix) -> Result<Matrix>;
}

impl<T: VectorField + ?Sized> VectorField for Arc<T> {
    fn eval(&self, x: &Matrix) -> Result<Matrix> {
        (**self).eval(x)
    }
}

/// `ν(x) = h · ω(x, f(x))`.
#[derive(Clone)]
pub struct ConnectionChoice {
    pub connection: Arc<dyn Connection>,
    pub field: Arc<dyn VectorField>,
    pub step: f64,
}

impl ConnectionChoice {
    pub fn new(connection: Arc<dyn Connection>, field: Arc<dyn VectorField>, step: f64) -> Self {
        ConnectionChoice { connection, field, step }
    }
}

impl IsotropyChoice for ConnectionChoice {
    fn eval(&self, x: &Matrix) -> Result<Matrix> {
        let v = self.field.eval(x)?;
        Ok(self.connection.eval(x, &v)?.scale(self.step))
    }
}

/// Transported field `(g·f)(x) = Tg · f(g⁻¹ ⊳ x)`.
pub struct TransportedField {
    space: Arc<dyn HomogeneousSpace>,
    field: Arc<dyn VectorField>,
    g: Matrix,
    g_inv: Matrix,
}

impl TransportedField {
    pub fn new(space: Arc<dyn HomogeneousSpace>, field: Arc<dyn VectorField>, g: Matrix) -> Result<Self> {
        let g_inv = g.try_inverse()?;
        Ok(TransportedField { space, field, g, g_inv })
    }
}

impl VectorField for TransportedField {
    fn eval(&self, x: &Matrix) -> Result<Matrix> {
        let y = self.space.act(&self.g_inv, x);
        let v = self.field.eval(&y)?;
        Ok(self.space.push_tangent(&self.g, &y, &v))
    }
}

/// Horizontal lift `g ↦ ω(π(g), f(π(g))) · g` of a field on `M` to the group,
/// with `π(g) = g ⊳ origin`.
pub struct LiftedField {
    connection: Arc<dyn Connection>,
    field: Arc<dyn VectorField>,
    origin: Matrix,
}

pub fn lift(connection: Arc<dyn Connection>, field: Arc<dyn VectorField>) -> LiftedField {
    let origin = connection.space().origin();
    LiftedField {
        connection,
        field,
        origin,
    }
}

impl LiftedField {
    pub fn project(&self, g: &Matrix) -> Matrix {
        self.connection.space().act(g, &self.origin)
    }
}

impl VectorField for LiftedField {
    fn eval(&self, g: &Matrix) -> Result<Matrix> {
        let x = self.project(g);
        let v = self.field.eval(&x)?;
        Ok(&self.connection.eval(&x, &v)? * g)
    }
}

pub(crate) fn require_shape(x: &Matrix, shape: (usize, usize), what: &str) -> Result<()> {
    if x.shape() == shape {
        Ok(())
    } else {
        Err(Error::Shape(format!(
            "{what}: expected {}x{}, got {}x{}",
            shape.0,
            shape.1,
            x.rows(),
            x.cols()
        )))
    }
}
