//! Unsmoothed aggregation algebraic multigrid.
//!
//! Greedy aggregation over the strength graph `|m_ij| ≥ θ √(m_ii m_jj)` in
//! natural row order, piecewise-constant prolongation, Galerkin coarse
//! operators and symmetric Gauss-Seidel smoothing. The default cycle is a
//! W-cycle, which unsmoothed aggregation needs for level-independent rates.

use crate::error::{Error, Result};
use crate::linalg::dense::DenseLu;
use crate::linalg::operator::Preconditioner;
use crate::linalg::sparse::SparseMatrix;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycleKind {
    V,
    W,
}

impl CycleKind {
    fn coarse_visits(self) -> usize {
        match self {
            CycleKind::V => 1,
            CycleKind::W => 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AmgConfig {
    pub strength_threshold: f64,
    /// Coarsening stops once a level has at most this many rows.
    pub max_coarse: usize,
    /// Coarsening stops when `n_fine / n_coarse` drops below this ratio.
    pub min_coarsening_ratio: f64,
    pub max_levels: usize,
    pub pre_sweeps: usize,
    pub post_sweeps: usize,
    pub cycle: CycleKind,
    /// Coarsest levels larger than this are relaxed with
    /// `coarse_relax_sweeps` symmetric Gauss-Seidel sweeps instead of an LU
    /// factorization.
    pub dense_coarse_limit: usize,
    pub coarse_relax_sweeps: usize,
}

impl Default for AmgConfig {
    fn default() -> Self {
        Self {
            strength_threshold: 0.08,
            max_coarse: 64,
            min_coarsening_ratio: 1.2,
            max_levels: 25,
            pre_sweeps: 1,
            post_sweeps: 1,
            cycle: CycleKind::W,
            dense_coarse_limit: 3000,
            coarse_relax_sweeps: 20,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AmgLevel<T> {
    pub op: SparseMatrix<T>,
    /// Fine row → aggregate id on the next level (empty on the coarsest).
    pub aggregates: Vec<usize>,
    pub n_aggregates: usize,
    diag: Vec<T>,
}

impl<T: Real> AmgLevel<T> {
    pub fn aggregate_sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.n_aggregates];
        for &a in &self.aggregates {
            s[a] += 1;
        }
        s
    }
}

#[derive(Clone, Debug)]
enum CoarseSolver<T> {
    Dense(DenseLu<T>),
    Relax(usize),
}

/// Multigrid hierarchy; the last level is solved directly.
#[derive(Clone, Debug)]
pub struct AmgHierarchy<T> {
    levels: Vec<AmgLevel<T>>,
    coarse: CoarseSolver<T>,
    config: AmgConfig,
}

/// Builds the hierarchy for a symmetric, essentially positive definite matrix.
pub fn amg_setup<T: Real>(m: &SparseMatrix<T>, config: &AmgConfig) -> Result<AmgHierarchy<T>> {
    if m.nrows() != m.ncols() {
        return Err(Error::Shape {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    if !(0.0..1.0).contains(&config.strength_threshold) {
        return Err(Error::Config(format!(
            "strength threshold {} outside [0, 1)",
            config.strength_threshold
        )));
    }
    let mut levels = Vec::new();
    let mut current = m.clone();
    loop {
        let n = current.nrows();
        let diag = current.diagonal();
        if n <= config.max_coarse || levels.len() + 1 >= config.max_levels {
            levels.push(AmgLevel {
                op: current,
                aggregates: Vec::new(),
                n_aggregates: 0,
                diag,
            });
            break;
        }
        let (agg, na) = aggregate(&current, &diag, T::of(config.strength_threshold));
        if na == 0 || (n as f64) / (na as f64) < config.min_coarsening_ratio {
            levels.push(AmgLevel {
                op: current,
                aggregates: Vec::new(),
                n_aggregates: 0,
                diag,
            });
            break;
        }
        let coarse = galerkin(&current, &agg, na);
        levels.push(AmgLevel {
            op: current,
            aggregates: agg,
            n_aggregates: na,
            diag,
        });
        current = coarse;
    }
    let last = &levels.last().expect("at least one level").op;
    let coarse = if last.nrows() <= config.dense_coarse_limit {
        CoarseSolver::Dense(DenseLu::factor(last.nrows(), last.to_dense()).map_err(|e| {
            Error::Config(format!("coarsest level ({} rows) not factorizable: {e}", last.nrows()))
        })?)
    } else {
        CoarseSolver::Relax(config.coarse_relax_sweeps)
    };
    if levels.iter().any(|l| l.diag.iter().any(|&d| d <= T::zero())) {
        return Err(Error::Config("nonpositive diagonal entry; smoother undefined".into()));
    }
    Ok(AmgHierarchy {
        levels,
        coarse,
        config: config.clone(),
    })
}

/// Three-pass greedy aggregation.
fn aggregate<T: Real>(m: &SparseMatrix<T>, diag: &[T], theta: T) -> (Vec<usize>, usize) {
    let n = m.nrows();
    const NONE: usize = usize::MAX;
    let strong = |i: usize| {
        let (cols, vals) = m.row(i);
        let di = diag[i];
        cols.iter()
            .zip(vals)
            .filter(move |(&j, &v)| j != i && v.abs() >= theta * (di * diag[j]).abs().sqrt() && v != T::zero())
            .map(|(&j, _)| j)
    };
    let mut agg = vec![NONE; n];
    let mut na = 0;

    // pass 1: seed aggregates from nodes whose strong neighborhood is free
    for i in 0..n {
        if agg[i] != NONE {
            continue;
        }
        if strong(i).all(|j| agg[j] == NONE) {
            agg[i] = na;
            for j in strong(i) {
                agg[j] = na;
            }
            na += 1;
        }
    }
    // pass 2: attach leftovers to the aggregate of their strongest neighbor
    let snapshot = agg.clone();
    for i in 0..n {
        if agg[i] != NONE {
            continue;
        }
        let (cols, vals) = m.row(i);
        let mut best: Option<(T, usize)> = None;
        for (&j, &v) in cols.iter().zip(vals) {
            if j == i || snapshot[j] == NONE {
                continue;
            }
            let s = v.abs() / (diag[i] * diag[j]).abs().sqrt();
            if s >= theta && best.map_or(true, |(bs, _)| s > bs) {
                best = Some((s, snapshot[j]));
            }
        }
        if let Some((_, a)) = best {
            agg[i] = a;
        }
    }
    // pass 3: whatever remains forms aggregates with its free strong neighbors
    for i in 0..n {
        if agg[i] != NONE {
            continue;
        }
        agg[i] = na;
        for j in strong(i) {
            if agg[j] == NONE {
                agg[j] = na;
            }
        }
        na += 1;
    }
    (agg, na)
}

/// `Pᵀ M P` for piecewise-constant `P`.
fn galerkin<T: Real>(m: &SparseMatrix<T>, agg: &[usize], na: usize) -> SparseMatrix<T> {
    let mut trip = Vec::with_capacity(m.nnz());
    for (i, j, v) in m.iter() {
        trip.push((agg[i], agg[j], v));
    }
    SparseMatrix::from_triplets(na, na, &trip).expect("aggregate ids in range")
}

fn gauss_seidel_forward<T: Real>(a: &SparseMatrix<T>, diag: &[T], b: &[T], x: &mut [T]) {
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        let mut s = b[i];
        for (&j, &v) in cols.iter().zip(vals) {
            s -= v * x[j];
        }
        x[i] += s / diag[i];
    }
}

fn gauss_seidel_backward<T: Real>(a: &SparseMatrix<T>, diag: &[T], b: &[T], x: &mut [T]) {
    for i in (0..a.nrows()).rev() {
        let (cols, vals) = a.row(i);
        let mut s = b[i];
        for (&j, &v) in cols.iter().zip(vals) {
            s -= v * x[j];
        }
        x[i] += s / diag[i];
    }
}

fn symmetric_gauss_seidel<T: Real>(a: &SparseMatrix<T>, diag: &[T], b: &[T], x: &mut [T]) {
    gauss_seidel_forward(a, diag, b, x);
    gauss_seidel_backward(a, diag, b, x);
}

impl<T: Real> AmgHierarchy<T> {
    pub fn levels(&self) -> &[AmgLevel<T>] {
        &self.levels
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn config(&self) -> &AmgConfig {
        &self.config
    }

    /// Prolongation of level `l` as an explicit sparse matrix (fine × coarse).
    pub fn prolongation(&self, l: usize) -> SparseMatrix<T> {
        let lev = &self.levels[l];
        let trip: Vec<_> = lev.aggregates.iter().enumerate().map(|(i, &a)| (i, a, T::one())).collect();
        SparseMatrix::from_triplets(lev.op.nrows(), lev.n_aggregates, &trip).expect("in range")
    }

    /// Total nonzeros over all levels divided by the finest level's.
    pub fn operator_complexity(&self) -> f64 {
        let total: usize = self.levels.iter().map(|l| l.op.nnz()).sum();
        total as f64 / self.levels[0].op.nnz().max(1) as f64
    }

    /// One multigrid cycle with zero initial guess: `z = Cycle(r)`.
    pub fn cycle(&self, r: &[T]) -> Vec<T> {
        let mut z = vec![T::zero(); r.len()];
        self.apply(r, &mut z);
        z
    }

    fn coarse_solve(&self, b: &[T], x: &mut [T]) {
        match &self.coarse {
            CoarseSolver::Dense(lu) => lu.solve_into(b, x),
            CoarseSolver::Relax(sweeps) => {
                let lev = self.levels.last().unwrap();
                x.iter_mut().for_each(|v| *v = T::zero());
                for _ in 0..*sweeps {
                    symmetric_gauss_seidel(&lev.op, &lev.diag, b, x);
                }
            }
        }
    }

    fn workspace(&self) -> Vec<LevelWork<T>> {
        self.levels[..self.levels.len() - 1]
            .iter()
            .map(|lev| LevelWork {
                r: vec![T::zero(); lev.op.nrows()],
                rc: vec![T::zero(); lev.n_aggregates],
                ec: vec![T::zero(); lev.n_aggregates],
                tmp: vec![T::zero(); lev.n_aggregates],
                dc: vec![T::zero(); lev.n_aggregates],
            })
            .collect()
    }

    fn cycle_level(&self, l: usize, b: &[T], x: &mut [T], work: &mut [LevelWork<T>]) {
        if l + 1 == self.levels.len() {
            self.coarse_solve(b, x);
            return;
        }
        let lev = &self.levels[l];
        let (w, rest) = work.split_first_mut().expect("one workspace per level");
        x.iter_mut().for_each(|v| *v = T::zero());
        for _ in 0..self.config.pre_sweeps {
            symmetric_gauss_seidel(&lev.op, &lev.diag, b, x);
        }
        lev.op.mul_into(x, &mut w.r);
        for (ri, &bi) in w.r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        w.rc.iter_mut().for_each(|v| *v = T::zero());
        for (i, &a) in lev.aggregates.iter().enumerate() {
            w.rc[a] += w.r[i];
        }

        let coarse_is_direct = l + 2 == self.levels.len() && matches!(self.coarse, CoarseSolver::Dense(_));
        let visits = if coarse_is_direct { 1 } else { self.config.cycle.coarse_visits() };
        self.cycle_level(l + 1, &w.rc, &mut w.ec, rest);
        let coarse_op = &self.levels[l + 1].op;
        for _ in 1..visits {
            coarse_op.mul_into(&w.ec, &mut w.tmp);
            for (t, &r) in w.tmp.iter_mut().zip(&w.rc) {
                *t = r - *t;
            }
            self.cycle_level(l + 1, &w.tmp, &mut w.dc, rest);
            for (e, &d) in w.ec.iter_mut().zip(&w.dc) {
                *e += d;
            }
        }
        for (i, &a) in lev.aggregates.iter().enumerate() {
            x[i] += w.ec[a];
        }
        for _ in 0..self.config.post_sweeps {
            symmetric_gauss_seidel(&lev.op, &lev.diag, b, x);
        }
    }
}

/// Per-level scratch vectors for one cycle.
struct LevelWork<T> {
    r: Vec<T>,
    rc: Vec<T>,
    ec: Vec<T>,
    tmp: Vec<T>,
    dc: Vec<T>,
}

impl<T: Real> Preconditioner<T> for AmgHierarchy<T> {
    fn apply(&self, r: &[T], z: &mut [T]) {
        let mut work = self.workspace();
        self.cycle_level(0, r, z, &mut work);
    }
}
