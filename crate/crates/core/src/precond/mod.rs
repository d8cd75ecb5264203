//! Block diagonal and block triangular preconditioners for the saddle-point
//! system, plus probes that measure their spectral behaviour.

mod block;
mod probes;

pub use block::{build_pressure_block, build_preconditioner, BlockPreconditioner, InnerStats, PressureBlock};
pub use probes::{block_fov, cond_estimate, flux_contraction, fov_probe, FovEstimate};

use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::linalg::AmgConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PrecondKind {
    Diag,
    Lower,
    Upper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PrecondMode {
    Exact,
    Inexact,
}

/// Inner solver for the flux block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FluxSolver {
    /// GMRES on `A`, preconditioned by `D_A⁻¹`.
    Gmres { tol: f64, max_iter: usize },
    /// `D_A⁻¹` alone.
    DiagonalScaling,
}

/// GMRES on `S` preconditioned by one AMG cycle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PressureSolver {
    pub tol: f64,
    pub max_iter: usize,
}

#[derive(Clone, Debug)]
pub struct PrecondConfig {
    pub kind: PrecondKind,
    pub mode: PrecondMode,
    pub flux: FluxSolver,
    pub pressure: PressureSolver,
    pub amg: AmgConfig,
}

pub const EXACT_INNER_TOL: f64 = 1e-10;
pub const INEXACT_INNER_TOL: f64 = 1e-3;
const INNER_MAX_ITER: usize = 200;

impl PrecondConfig {
    pub fn new(kind: PrecondKind, mode: PrecondMode) -> Self {
        let tol = match mode {
            PrecondMode::Exact => EXACT_INNER_TOL,
            PrecondMode::Inexact => INEXACT_INNER_TOL,
        };
        Self {
            kind,
            mode,
            flux: FluxSolver::Gmres {
                tol,
                max_iter: INNER_MAX_ITER,
            },
            pressure: PressureSolver {
                tol,
                max_iter: INNER_MAX_ITER,
            },
            amg: AmgConfig::default(),
        }
    }

    pub fn exact(kind: PrecondKind) -> Self {
        Self::new(kind, PrecondMode::Exact)
    }

    pub fn inexact(kind: PrecondKind) -> Self {
        Self::new(kind, PrecondMode::Inexact)
    }

    /// Override both inner tolerances.
    pub fn with_inner_tol(mut self, tol: f64) -> Self {
        if let FluxSolver::Gmres { tol: t, .. } = &mut self.flux {
            *t = tol;
        }
        self.pressure.tol = tol;
        self
    }

    pub fn with_diagonal_flux(mut self) -> Self {
        self.flux = FluxSolver::DiagonalScaling;
        self
    }

    /// All six variants in table order.
    pub fn all() -> Vec<Self> {
        ["BD", "BL", "BU", "MD", "ML", "MU"].iter().map(|s| s.parse().expect("known name")).collect()
    }

    pub fn validate(&self) -> Result<(), Error> {
        let tols = [
            match self.flux {
                FluxSolver::Gmres { tol, .. } => tol,
                FluxSolver::DiagonalScaling => 0.5,
            },
            self.pressure.tol,
        ];
        if tols.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
            return Err(Error::Config(format!("inner tolerances {tols:?} must lie in (0, 1)")));
        }
        Ok(())
    }
}

impl fmt::Display for PrecondConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = match self.mode {
            PrecondMode::Exact => 'B',
            PrecondMode::Inexact => 'M',
        };
        let k = match self.kind {
            PrecondKind::Diag => 'D',
            PrecondKind::Lower => 'L',
            PrecondKind::Upper => 'U',
        };
        write!(f, "{m}{k}")
    }
}

impl FromStr for PrecondConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim().to_ascii_uppercase();
        let mut c = s.chars();
        let mode = match c.next() {
            Some('B') => PrecondMode::Exact,
            Some('M') => PrecondMode::Inexact,
            _ => return Err(Error::Config(format!("unknown preconditioner `{s}`"))),
        };
        let kind = match c.next() {
            Some('D') => PrecondKind::Diag,
            Some('L') => PrecondKind::Lower,
            Some('U') => PrecondKind::Upper,
            _ => return Err(Error::Config(format!("unknown preconditioner `{s}`"))),
        };
        if c.next().is_some() {
            return Err(Error::Config(format!("unknown preconditioner `{s}`")));
        }
        Ok(Self::new(kind, mode))
    }
}
