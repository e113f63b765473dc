//! Hybridized mixed finite elements for planar linear elasticity.
//!
//! The discretization approximates the stress by symmetric-matrix-valued
//! polynomials of degree `k+1` and the displacement by vector-valued
//! polynomials of degree `k`, both discontinuous across elements. Normal
//! continuity of the stress is enforced weakly through a vector-valued
//! Lagrange multiplier of degree `k+1` living on interior edges. Eliminating
//! the element-local unknowns (static condensation) leaves a symmetric
//! positive-semidefinite system for the multiplier alone, whose kernel is
//! supported at so-called singular vertices of the grid.
//!
//! Module map:
//! - [`mesh`]: triangle meshes, built-in generators, refinement, and the
//!   vertex-singularity diagnostic.
//! - [`elements`]: quadrature and polynomial bases on the reference triangle
//!   and edge, plus the per-element matrix blocks.
//! - [`localcond`]: element-local saddle solves, static condensation, field
//!   recovery, and the local norm machinery.
//! - [`schur`]: the global multiplier space, the condensed interface operator,
//!   its right-hand side, and kernel detection.
//! - [`solvers`]: preconditioned conjugate gradients together with one-level,
//!   two-level, and multilevel overlapping Schwarz preconditioners.
//! - [`app`]: manufactured solutions, error evaluation, study drivers, and
//!   the configuration format used by the command line interface.

pub mod app;
pub mod elements;
pub mod localcond;
pub mod material;
pub mod mesh;
pub mod schur;
pub mod solvers;
pub mod sparse;

pub use material::{MaterialParams, SymMat2};
pub use mesh::{TriMesh, VertexSingularityReport};

/// Errors produced by mesh construction, assembly, and solvers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid material parameters: {0}")]
    InvalidMaterial(String),
    #[error("mesh file format error: {0}")]
    MeshFormat(String),
    #[error("mesh is not conforming: {0}")]
    NonConforming(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("degenerate element {index}: twice the signed area is {doubled_area:.3e}")]
    DegenerateElement { index: usize, doubled_area: f64 },
    #[error("unsupported polynomial degree k={0} (supported: 0, 1, 2, 3)")]
    UnsupportedDegree(usize),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("solver stopped after {iterations} iterations with relative residual {residual:.3e}")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("conjugate gradient breakdown: {0}")]
    Breakdown(String),
    #[error("incompatible degree-of-freedom layouts: {0}")]
    DofMismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
