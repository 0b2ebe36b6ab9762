//! Equivariant integrators on homogeneous spaces.
//!
//! A method is a [`skeleton::Skeleton`] (stage tree, transition functions,
//! motion map) fed by an isotropy choice, usually built from a
//! [`spaces::Connection`] and a vector field. [`algebrachk`] classifies
//! reductive splittings of Lie algebras and [`verify`] turns the defining
//! properties into numerical checks.

pub mod acceptance;
pub mod algebra;
pub mod algebrachk;
pub mod error;
pub mod matexp;
pub mod skeleton;
pub mod spaces;
pub mod verify;

pub use error::{Error, Result};
pub use matexp::Matrix;
