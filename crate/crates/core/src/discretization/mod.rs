//! Grids, nodal fields, finite-difference operators and masked quadrature.

mod field;
mod grid;
mod ops;

pub use field::{ScalarField, SymMatrixField};
pub use grid::{make_grid, DomainKind, Grid2D, NodeKind, SparseOp, Stencils, MIN_NODES};
pub use ops::{
    bilaplacian, cof2, curlT_curl, det2, gauss_curvature_metric, gradient, hessian, integrate,
    laplacian, sym_outer,
};
pub(crate) use ops::curvature_parts;
