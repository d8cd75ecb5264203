//! Run configuration and the `key = value` case file.
//!
//! Recognised keys: `case` (`geiger2d`, `geiger3d`, `import:<path>`), `m`,
//! `gamma`, `k`, `kf`, `knu`, `precond` (comma list of `BD BL BU MD ML MU`
//! or `all`), `tol`, `maxit`, `inner_tol`, `flux_solver` (`gmres` or
//! `diag`), `out`, `export` (comma list of `mtx vtk csv md`). Blank lines
//! and lines starting with `#` are ignored.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::precond::PrecondConfig;

#[derive(Clone, Debug, PartialEq)]
pub enum CaseName {
    Geiger2d,
    Geiger3d,
    Import(PathBuf),
}

impl FromStr for CaseName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "geiger2d" => Ok(Self::Geiger2d),
            "geiger3d" => Ok(Self::Geiger3d),
            t => match t.strip_prefix("import:") {
                Some(p) if !p.is_empty() => Ok(Self::Import(PathBuf::from(p))),
                _ => Err(Error::Config(format!("unknown case `{t}`"))),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExportFormat {
    Mtx,
    Vtk,
    Csv,
    Md,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mtx" => Ok(Self::Mtx),
            "vtk" => Ok(Self::Vtk),
            "csv" => Ok(Self::Csv),
            "md" => Ok(Self::Md),
            t => Err(Error::Config(format!("unknown export format `{t}`"))),
        }
    }
}

pub fn parse_list<T: FromStr<Err = Error>>(s: &str) -> Result<Vec<T>> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(str::parse).collect()
}

pub fn parse_preconds(s: &str) -> Result<Vec<PrecondConfig>> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(PrecondConfig::all());
    }
    let v: Vec<PrecondConfig> = parse_list(s)?;
    if v.is_empty() {
        return Err(Error::Config("empty preconditioner list".into()));
    }
    Ok(v)
}

#[derive(Clone, Debug)]
pub struct CaseConfig {
    pub case: CaseName,
    pub m: usize,
    pub gamma: f64,
    pub k_rock: f64,
    pub k_f: f64,
    pub k_nu: f64,
    pub preconds: Vec<PrecondConfig>,
    pub tol: f64,
    pub max_iter: usize,
    pub inner_tol: Option<f64>,
    pub diagonal_flux: bool,
    pub out: PathBuf,
    pub export: Vec<ExportFormat>,
}

impl Default for CaseConfig {
    fn default() -> Self {
        Self {
            case: CaseName::Geiger2d,
            m: 16,
            gamma: 1e-2,
            k_rock: 1.0,
            k_f: 1.0,
            k_nu: 1.0,
            preconds: PrecondConfig::all(),
            tol: 1e-6,
            max_iter: 500,
            inner_tol: None,
            diagonal_flux: false,
            out: PathBuf::from("out"),
            export: Vec::new(),
        }
    }
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Config(format!("{key}: cannot parse `{v}`")))
}

impl CaseConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.trim() {
            "case" => self.case = value.parse()?,
            "m" => self.m = num(key, value)?,
            "gamma" => self.gamma = num(key, value)?,
            "k" => self.k_rock = num(key, value)?,
            "kf" => self.k_f = num(key, value)?,
            "knu" => self.k_nu = num(key, value)?,
            "precond" => self.preconds = parse_preconds(value)?,
            "tol" => self.tol = num(key, value)?,
            "maxit" => self.max_iter = num(key, value)?,
            "inner_tol" => self.inner_tol = Some(num(key, value)?),
            "flux_solver" => {
                self.diagonal_flux = match value.trim() {
                    "gmres" => false,
                    "diag" => true,
                    v => return Err(Error::Config(format!("flux_solver: unknown value `{v}`"))),
                }
            }
            "out" => self.out = PathBuf::from(value.trim()),
            "export" => self.export = parse_list(value)?,
            k => return Err(Error::Config(format!("unknown key `{k}`"))),
        }
        Ok(())
    }

    /// Apply every `key = value` line of `text`.
    pub fn apply_text(&mut self, path: &Path, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg,
            };
            let (k, v) = t.split_once('=').ok_or_else(|| err("expected `key = value`".into()))?;
            self.set(k, v).map_err(|e| err(e.to_string()))?;
        }
        Ok(())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut c = Self::default();
        c.apply_text(path, &text)?;
        Ok(c)
    }

    /// Preconditioners with inner options applied.
    pub fn effective_preconds(&self) -> Vec<PrecondConfig> {
        self.preconds
            .iter()
            .map(|p| {
                let mut p = p.clone();
                if let Some(t) = self.inner_tol {
                    p = p.with_inner_tol(t);
                }
                if self.diagonal_flux && p.mode == crate::precond::PrecondMode::Inexact {
                    p = p.with_diagonal_flux();
                }
                p
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("gamma", self.gamma), ("k", self.k_rock), ("kf", self.k_f), ("knu", self.k_nu)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} = {v} must be positive")));
            }
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::Config(format!("tol = {} must lie in (0, 1)", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("maxit must be positive".into()));
        }
        for p in self.effective_preconds() {
            p.validate()?;
        }
        Ok(())
    }
}
