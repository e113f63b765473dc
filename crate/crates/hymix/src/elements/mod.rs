//! Polynomial bases, quadrature, and element-local matrix blocks.

pub mod basis;
pub mod local;
pub mod quadrature;

pub use basis::{DisplacementBasis, ScalarBasisEdge, ScalarBasisTri, StressBasis, TraceBasis, SYM_GENERATORS};
pub use local::{coarse_p2_matrices, local_matrices, ElementBases, ElementGeometry, ElementMatrices};
pub use quadrature::{EdgeRule, QuadratureRule};
