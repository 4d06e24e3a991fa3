//! Numerical verification of harmonic and biharmonic maps between
//! Riemannian manifolds, and of the biharmonic graph equations for
//! hypersurfaces in Euclidean space.
//!
//! Everything rests on [`taylor::Jet`]: closed-form programs are evaluated
//! in truncated multivariate Taylor arithmetic, so all derivatives up to
//! order four are exact up to rounding.

pub mod catalog;
pub mod error;
pub mod expr;
pub mod fields;
pub mod geometry;
pub mod graph;
pub mod sampling;
pub mod taylor;

pub use error::{Error, Result};
pub use expr::{parse_expr, Expr};
pub use geometry::ManifoldSpec;
pub use taylor::{seed, Jet, MultiIndex};
