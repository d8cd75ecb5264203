use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use fracflow::bench::config::parse_list;
use fracflow::bench::export::{write_residual_csv, write_solution_vtk, write_system_mtx, write_table_csv, write_table_markdown};
use fracflow::bench::{run_case, run_sweep, verify_solution, CaseConfig, CaseRun, ExportFormat, SweepParam, SweepTable};

#[derive(Parser)]
#[command(name = "fracflow", version, about = "Block-preconditioned solves of mixed-dimensional Darcy flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one case with every requested preconditioner.
    Run(CaseArgs),
    /// Repeat a case over a list of values of one parameter.
    Sweep {
        /// One of m, gamma, kf, knu.
        #[arg(long)]
        param: String,
        /// Comma separated values.
        #[arg(long)]
        values: String,
        #[command(flatten)]
        case: CaseArgs,
    },
}

/// Flags mirror the case file keys and override them.
#[derive(Args)]
struct CaseArgs {
    /// `key = value` case file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// geiger2d, geiger3d or import:<path>.
    #[arg(long)]
    case: Option<String>,
    /// Cells per unit length.
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    /// Rock permeability.
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    kf: Option<String>,
    #[arg(long)]
    knu: Option<String>,
    /// Comma list of BD, BL, BU, MD, ML, MU, or `all`.
    #[arg(long)]
    precond: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    maxit: Option<String>,
    #[arg(long)]
    inner_tol: Option<String>,
    /// gmres or diag, for the inexact flux block.
    #[arg(long)]
    flux_solver: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// Comma list of mtx, vtk, csv, md.
    #[arg(long)]
    export: Option<String>,
}

impl CaseArgs {
    fn config(&self) -> Result<CaseConfig> {
        let mut cfg = match &self.config {
            Some(p) => CaseConfig::from_file(p)?,
            None => CaseConfig::default(),
        };
        let flags = [
            ("case", &self.case),
            ("m", &self.m),
            ("gamma", &self.gamma),
            ("k", &self.k),
            ("kf", &self.kf),
            ("knu", &self.knu),
            ("precond", &self.precond),
            ("tol", &self.tol),
            ("maxit", &self.maxit),
            ("inner_tol", &self.inner_tol),
            ("flux_solver", &self.flux_solver),
            ("out", &self.out),
            ("export", &self.export),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v).with_context(|| format!("--{}", key.replace('_', "-")))?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print_run(run: &CaseRun) {
    let sys = &run.system;
    println!(
        "dofs {} (flux {}, pressure {}), setup {:.3}s",
        sys.dim(),
        sys.n_w(),
        sys.n_p(),
        run.setup_seconds
    );
    for (name, x, rep) in &run.solves {
        let c = verify_solution(sys, x);
        println!(
            "{name:>3}  iters {:>4}  resid {:.2e}  time {:.3}s  {}  mass {:.1e}  balance {:.1e}{}",
            rep.iterations,
            rep.final_residual(),
            rep.seconds,
            if rep.converged { "converged" } else { "NOT CONVERGED" },
            c.max_cell_residual,
            c.balance,
            if rep.inner_failures > 0 { format!("  inner failures {}", rep.inner_failures) } else { String::new() },
        );
    }
}

fn export_table(table: &SweepTable, formats: &[ExportFormat], out: &Path) -> Result<()> {
    if formats.contains(&ExportFormat::Csv) {
        write_table_csv(table, out.join("results.csv"))?;
    }
    if formats.contains(&ExportFormat::Md) {
        write_table_markdown(table, out.join("results.md"))?;
    }
    Ok(())
}

fn export_run(run: &CaseRun, cfg: &CaseConfig) -> Result<()> {
    let out = &cfg.out;
    if cfg.export.contains(&ExportFormat::Csv) {
        write_residual_csv(run.solves.iter().map(|(n, _, r)| (n.as_str(), r)), out.join("residuals.csv"))?;
    }
    if cfg.export.contains(&ExportFormat::Mtx) {
        write_system_mtx(&run.system, out.join("system"))?;
    }
    if cfg.export.contains(&ExportFormat::Vtk) {
        for (name, x, _) in &run.solves {
            write_solution_vtk(&run.mesh, &run.system, x, out.join("vtk"), name)?;
        }
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.config()?;
            let run = run_case(&cfg)?;
            print_run(&run);
            if !cfg.export.is_empty() {
                fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
                let table = SweepTable {
                    param: "m".into(),
                    rows: run.rows(cfg.m as f64),
                };
                export_table(&table, &cfg.export, &cfg.out)?;
                export_run(&run, &cfg)?;
            }
            Ok(run.all_converged())
        }
        Command::Sweep { param, values, case } => {
            let cfg = case.config()?;
            let param: SweepParam = param.parse()?;
            let values: Vec<f64> = parse_list::<Value>(&values)?.into_iter().map(|v| v.0).collect();
            let table = run_sweep(&cfg, param, &values)?;
            print!("{}", fracflow::bench::export::table_markdown(&table));
            if !cfg.export.is_empty() {
                fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
                export_table(&table, &cfg.export, &cfg.out)?;
            }
            Ok(table.all_converged())
        }
    }
}

struct Value(f64);

impl std::str::FromStr for Value {
    type Err = fracflow::Error;

    fn from_str(s: &str) -> fracflow::Result<Self> {
        s.parse()
            .map(Value)
            .map_err(|_| fracflow::Error::Config(format!("cannot parse value `{s}`")))
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
