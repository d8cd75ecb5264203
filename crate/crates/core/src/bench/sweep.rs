use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use super::cases::{case_geiger2d, case_geiger3d, flow_bc};
use super::config::{CaseConfig, CaseName};
use crate::discretization::{assemble_system, BlockSystem, PhysicalParams};
use crate::error::Result;
use crate::linalg::{fgmres, SolveReport};
use crate::meshing::{import_mesh, mesh_structured, MdMesh};
use crate::precond::{build_pressure_block, BlockPreconditioner, PrecondConfig, PressureBlock};
use crate::scalar::Real;

/// Mesh and parameters of a configured case.
pub fn prepare(cfg: &CaseConfig) -> Result<(MdMesh, PhysicalParams)> {
    cfg.validate()?;
    let (mesh, mut params) = match &cfg.case {
        CaseName::Geiger2d | CaseName::Geiger3d => {
            let (geom, params) = physics(cfg)?;
            (mesh_structured(&geom, cfg.m)?, params)
        }
        CaseName::Import(path) => {
            let mesh = import_mesh(path)?;
            let n = mesh.dim;
            let params = PhysicalParams::uniform(&mesh, cfg.k_rock, cfg.k_f, cfg.k_nu, cfg.gamma, flow_bc(n))
                .scale_neumann_by_aperture(&mesh.subdomain_dims.clone(), n, cfg.gamma);
            (mesh, params)
        }
    };
    set_rock_k(&mut params, &mesh.subdomain_dims, mesh.dim, cfg.k_rock);
    Ok((mesh, params))
}

fn set_rock_k(params: &mut PhysicalParams, dims: &[usize], n: usize, k_rock: f64) {
    for (k, &d) in params.k.iter_mut().zip(dims) {
        if d == n {
            *k = k_rock;
        }
    }
}

fn physics(cfg: &CaseConfig) -> Result<(crate::geometry::MdGeometry, PhysicalParams)> {
    let (geom, mut params) = match cfg.case {
        CaseName::Geiger3d => case_geiger3d(cfg.m, cfg.gamma, cfg.k_f, cfg.k_nu)?,
        _ => case_geiger2d(cfg.m, cfg.gamma, cfg.k_f, cfg.k_nu)?,
    };
    let dims: Vec<usize> = geom.subdomains.iter().map(|s| s.dim).collect();
    set_rock_k(&mut params, &dims, geom.dim(), cfg.k_rock);
    Ok((geom, params))
}

/// Outer FGMRES solve of `sys` with one preconditioner.
pub fn solve<T: Real>(
    sys: &BlockSystem<T>,
    pressure: Arc<PressureBlock<T>>,
    config: PrecondConfig,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<T>, SolveReport)> {
    let p = BlockPreconditioner::with_pressure(sys, pressure, config)?;
    let (x, mut rep) = fgmres(&sys.operator(), &p, &sys.rhs(), tol, max_iter);
    rep.inner_failures = p.inner_failures();
    Ok((x, rep))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub param: f64,
    pub precond: String,
    pub iterations: usize,
    pub residual: f64,
    /// Outer solve time.
    pub seconds: f64,
    /// Schur complement and AMG setup time, shared by all rows of a value.
    pub setup_seconds: f64,
    pub ndof: usize,
    pub converged: bool,
    pub inner_failures: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepTable {
    pub param: String,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn rows_for<'a>(&'a self, precond: &'a str) -> impl Iterator<Item = &'a SweepRow> + 'a {
        self.rows.iter().filter(move |r| r.precond == precond)
    }

    /// `max - min` of the iteration counts of one preconditioner.
    pub fn spread(&self, precond: &str) -> usize {
        let it: Vec<usize> = self.rows_for(precond).map(|r| r.iterations).collect();
        it.iter().max().unwrap_or(&0) - it.iter().min().unwrap_or(&0)
    }

    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    /// Values are cells per unit length.
    MeshSize,
    Gamma,
    Kf,
    Knu,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            Self::MeshSize => "m",
            Self::Gamma => "gamma",
            Self::Kf => "kf",
            Self::Knu => "knu",
        }
    }

    fn apply(self, cfg: &mut CaseConfig, v: f64) {
        match self {
            Self::MeshSize => cfg.m = v as usize,
            Self::Gamma => cfg.gamma = v,
            Self::Kf => cfg.k_f = v,
            Self::Knu => cfg.k_nu = v,
        }
    }
}

impl std::str::FromStr for SweepParam {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        [Self::MeshSize, Self::Gamma, Self::Kf, Self::Knu]
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| crate::Error::Config(format!("unknown sweep parameter `{s}`")))
    }
}

/// Result of solving one system with several preconditioners.
pub struct CaseRun {
    pub mesh: MdMesh,
    pub system: BlockSystem<f64>,
    pub setup_seconds: f64,
    pub solves: Vec<(String, Vec<f64>, SolveReport)>,
}

impl CaseRun {
    /// One row per solve, tagged with the parameter value `param`.
    pub fn rows(&self, param: f64) -> Vec<SweepRow> {
        let ndof = self.system.dim();
        self.solves
            .iter()
            .map(|(name, _, rep)| SweepRow {
                param,
                precond: name.clone(),
                iterations: rep.iterations,
                residual: rep.final_residual(),
                seconds: rep.seconds,
                setup_seconds: self.setup_seconds,
                ndof,
                converged: rep.converged,
                inner_failures: rep.inner_failures,
            })
            .collect()
    }

    pub fn all_converged(&self) -> bool {
        self.solves.iter().all(|(_, _, r)| r.converged)
    }
}

fn run_on_mesh(cfg: &CaseConfig, mesh: MdMesh, params: &PhysicalParams) -> Result<CaseRun> {
    let system = assemble_system(&mesh, params)?;
    let t = Instant::now();
    let pcs = cfg.effective_preconds();
    let pressure = Arc::new(build_pressure_block(&system, &pcs.first().map(|p| p.amg.clone()).unwrap_or_default())?);
    let setup_seconds = t.elapsed().as_secs_f64();
    let mut solves = Vec::new();
    for pc in pcs {
        let name = pc.to_string();
        let (x, rep) = solve(&system, pressure.clone(), pc, cfg.tol, cfg.max_iter)?;
        solves.push((name, x, rep));
    }
    Ok(CaseRun {
        mesh,
        system,
        setup_seconds,
        solves,
    })
}

/// Build, assemble and solve one configured case with all its
/// preconditioners.
pub fn run_case(cfg: &CaseConfig) -> Result<CaseRun> {
    let (mesh, params) = prepare(cfg)?;
    run_on_mesh(cfg, mesh, &params)
}

/// Run `base` once per value of `param`. Meshes are reused when only the
/// physics changes; non-converged solves are recorded, not raised.
pub fn run_sweep(base: &CaseConfig, param: SweepParam, values: &[f64]) -> Result<SweepTable> {
    let mut table = SweepTable {
        param: param.name().into(),
        rows: Vec::new(),
    };
    let mut meshes: HashMap<usize, MdMesh> = HashMap::new();
    for &v in values {
        let mut cfg = base.clone();
        param.apply(&mut cfg, v);
        let (mesh, params) = match (&cfg.case, meshes.get(&cfg.m)) {
            (CaseName::Import(_), _) | (_, None) => prepare(&cfg)?,
            (_, Some(mesh)) => {
                cfg.validate()?;
                let (_, params) = physics(&cfg)?;
                (mesh.clone(), params)
            }
        };
        let run = run_on_mesh(&cfg, mesh, &params)?;
        table.rows.extend(run.rows(v));
        meshes.insert(cfg.m, run.mesh);
    }
    Ok(table)
}
