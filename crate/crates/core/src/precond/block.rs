use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use super::{FluxSolver, PrecondConfig, PrecondKind};
use crate::discretization::BlockSystem;
use crate::error::{Error, Result};
use crate::linalg::{amg_setup, gmres, AmgConfig, AmgHierarchy, DiagonalScaling, PrecondSide, Preconditioner, SparseMatrix};
use crate::scalar::Real;

/// Schur complement approximation `S = B D_A⁻¹ Bᵀ` and its AMG hierarchy,
/// shareable between preconditioners of the same system.
pub struct PressureBlock<T> {
    pub s: SparseMatrix<T>,
    pub amg: AmgHierarchy<T>,
}

pub fn build_pressure_block<T: Real>(sys: &BlockSystem<T>, amg: &AmgConfig) -> Result<PressureBlock<T>> {
    let s = sys.schur();
    let amg = amg_setup(&s, amg).map_err(|e| Error::Config(format!("AMG setup on the Schur complement: {e}")))?;
    Ok(PressureBlock { s, amg })
}

/// One of the six block preconditioners, applied to `r = (r_w, r_p)`.
pub struct BlockPreconditioner<'a, T: Real> {
    sys: &'a BlockSystem<T>,
    pressure: Arc<PressureBlock<T>>,
    config: PrecondConfig,
    diag: DiagonalScaling<T>,
    failures: AtomicUsize,
    flux_iterations: AtomicUsize,
    pressure_iterations: AtomicUsize,
    applications: AtomicUsize,
}

/// Inner solver work accumulated by a [`BlockPreconditioner`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct InnerStats {
    pub applications: usize,
    pub flux_iterations: usize,
    pub pressure_iterations: usize,
    pub failures: usize,
}

pub fn build_preconditioner<'a, T: Real>(sys: &'a BlockSystem<T>, config: PrecondConfig) -> Result<BlockPreconditioner<'a, T>> {
    let pressure = Arc::new(build_pressure_block(sys, &config.amg)?);
    BlockPreconditioner::with_pressure(sys, pressure, config)
}

impl<'a, T: Real> BlockPreconditioner<'a, T> {
    pub fn with_pressure(sys: &'a BlockSystem<T>, pressure: Arc<PressureBlock<T>>, config: PrecondConfig) -> Result<Self> {
        config.validate()?;
        if pressure.s.nrows() != sys.n_p() {
            return Err(Error::Shape {
                expected: sys.n_p(),
                got: pressure.s.nrows(),
            });
        }
        Ok(Self {
            sys,
            diag: DiagonalScaling::new(&sys.d_a),
            pressure,
            config,
            failures: AtomicUsize::new(0),
            flux_iterations: AtomicUsize::new(0),
            pressure_iterations: AtomicUsize::new(0),
            applications: AtomicUsize::new(0),
        })
    }

    pub fn config(&self) -> &PrecondConfig {
        &self.config
    }

    pub fn pressure(&self) -> &PressureBlock<T> {
        &self.pressure
    }

    pub fn shared_pressure(&self) -> Arc<PressureBlock<T>> {
        self.pressure.clone()
    }

    /// Inner solves that stopped at their iteration limit so far.
    pub fn inner_failures(&self) -> usize {
        self.failures.load(Ordering::Relaxed)
    }

    pub fn stats(&self) -> InnerStats {
        InnerStats {
            applications: self.applications.load(Ordering::Relaxed),
            flux_iterations: self.flux_iterations.load(Ordering::Relaxed),
            pressure_iterations: self.pressure_iterations.load(Ordering::Relaxed),
            failures: self.failures.load(Ordering::Relaxed),
        }
    }

    /// Zero every counter.
    pub fn reset_stats(&self) {
        for c in [&self.failures, &self.flux_iterations, &self.pressure_iterations, &self.applications] {
            c.store(0, Ordering::Relaxed);
        }
    }

    /// `z ≈ A⁻¹ r`.
    pub fn solve_flux(&self, r: &[T], z: &mut [T]) {
        match self.config.flux {
            FluxSolver::DiagonalScaling => self.diag.apply(r, z),
            FluxSolver::Gmres { tol, max_iter } => {
                let (x, rep) = gmres(&self.sys.a, &self.diag, r, tol, max_iter, PrecondSide::Right);
                self.flux_iterations.fetch_add(rep.iterations, Ordering::Relaxed);
                if !rep.converged {
                    self.failures.fetch_add(1, Ordering::Relaxed);
                }
                z.copy_from_slice(&x);
            }
        }
    }

    /// `z ≈ S⁻¹ r`.
    pub fn solve_pressure(&self, r: &[T], z: &mut [T]) {
        let p = self.config.pressure;
        let (x, rep) = gmres(&self.pressure.s, &self.pressure.amg, r, p.tol, p.max_iter, PrecondSide::Right);
        self.pressure_iterations.fetch_add(rep.iterations, Ordering::Relaxed);
        if !rep.converged {
            self.failures.fetch_add(1, Ordering::Relaxed);
        }
        z.copy_from_slice(&x);
    }
}

impl<T: Real> Preconditioner<T> for BlockPreconditioner<'_, T> {
    fn apply(&self, r: &[T], z: &mut [T]) {
        self.applications.fetch_add(1, Ordering::Relaxed);
        let nw = self.sys.n_w();
        let (rw, rp) = r.split_at(nw);
        let (zw, zp) = z.split_at_mut(nw);
        match self.config.kind {
            PrecondKind::Diag => {
                self.solve_flux(rw, zw);
                self.solve_pressure(rp, zp);
            }
            PrecondKind::Lower => {
                self.solve_flux(rw, zw);
                let mut t = rp.to_vec();
                self.sys.b.mul_add_into(T::one(), zw, &mut t);
                self.solve_pressure(&t, zp);
            }
            PrecondKind::Upper => {
                self.solve_pressure(rp, zp);
                let mut t = rw.to_vec();
                self.sys.bt.mul_add_into(-T::one(), zp, &mut t);
                self.solve_flux(&t, zw);
            }
        }
    }
}
