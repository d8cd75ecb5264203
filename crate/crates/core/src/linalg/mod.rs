//! Sparse kernels and iterative solvers.

pub mod amg;
pub mod dense;
pub mod krylov;
pub mod lanczos;
pub mod mtx;
pub mod operator;
pub mod sparse;

pub use amg::{amg_setup, AmgConfig, AmgHierarchy, AmgLevel, CycleKind};
pub use krylov::{check_symmetry, fgmres, gmres, minres, Breakdown, PrecondSide, SolveReport};
pub use lanczos::{est_extreme_eigs, EigenEstimate};
pub use operator::{DiagonalScaling, FnOperator, FnPreconditioner, Identity, LinearOperator, Preconditioner};
pub use sparse::SparseMatrix;
