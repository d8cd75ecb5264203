//! Mixed-dimensional Darcy flow in fractured porous media.
//!
//! Fractures and their intersections are meshed as lower-dimensional
//! subdomains coupled by mortar fluxes. Each subdomain carries a lowest-order
//! Raviart-Thomas / piecewise-constant pair, and the resulting saddle-point
//! system is solved with FGMRES and block preconditioners whose Schur
//! complement block uses algebraic multigrid.
//!
//! Geometry and meshes are always `f64`. Linear algebra, assembly output and
//! the preconditioners are generic over [`Real`]; the aliases below fix the
//! scalar for the common cases.

pub mod bench;
pub mod discretization;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod meshing;
pub mod precond;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type SparseMatrixF64 = linalg::SparseMatrix<f64>;
pub type SparseMatrixF32 = linalg::SparseMatrix<f32>;
pub type BlockSystemF64 = discretization::BlockSystem<f64>;
pub type BlockSystemF32 = discretization::BlockSystem<f32>;
pub type AmgHierarchyF64 = linalg::AmgHierarchy<f64>;
pub type AmgHierarchyF32 = linalg::AmgHierarchy<f32>;
pub type PressureBlockF64 = precond::PressureBlock<f64>;
pub type PressureBlockF32 = precond::PressureBlock<f32>;
