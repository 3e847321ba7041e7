//! Monge–Ampère constrained plate model: discretization, constrained
//! minimization, radial closed forms, analytic solution families and the
//! 3D prestrained-elasticity energy whose thin limit the 2D model is.

pub mod discretization;
pub mod elasticity3d;
pub mod error;
pub mod expr;
pub mod families;
pub mod harness;
pub mod poly;
pub mod quadrature;
pub mod radial;
pub mod solver;

pub use error::{Error, Result};
