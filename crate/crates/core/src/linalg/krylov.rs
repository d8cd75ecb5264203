//! Full (unrestarted) GMRES, flexible GMRES and preconditioned MINRES.
//!
//! All methods start from the zero vector and measure convergence on the
//! relative residual `‖r_k‖ / ‖r_0‖`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::operator::{LinearOperator, Preconditioner};
use crate::scalar::{axpy, dot, norm2, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Breakdown {
    /// The Krylov space became invariant; the iterate is exact.
    Happy,
    /// Non-finite quantity or loss of definiteness in the recurrence.
    Numerical,
}

/// Outcome of one Krylov solve.
#[derive(Clone, Debug, Default)]
pub struct SolveReport {
    pub iterations: usize,
    /// Relative residual history; entry 0 is the initial residual (1.0).
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub seconds: f64,
    pub breakdown: Option<Breakdown>,
    /// Inner solves inside the preconditioner that hit their iteration cap.
    pub inner_failures: usize,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PrecondSide {
    Left,
    #[default]
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Left,
    Right,
    Flexible,
}

/// Full GMRES with left or right preconditioning.
///
/// Left preconditioning monitors `‖M⁻¹ r‖`, right preconditioning the true
/// residual.
pub fn gmres<T: Real>(
    op: &impl LinearOperator<T>,
    precond: &impl Preconditioner<T>,
    b: &[T],
    tol: f64,
    max_iter: usize,
    side: PrecondSide,
) -> (Vec<T>, SolveReport) {
    let mode = match side {
        PrecondSide::Left => Mode::Left,
        PrecondSide::Right => Mode::Right,
    };
    arnoldi(op, precond, b, tol, max_iter, mode)
}

/// Flexible GMRES: right preconditioning where every application may differ,
/// so the preconditioned directions are stored explicitly.
pub fn fgmres<T: Real>(
    op: &impl LinearOperator<T>,
    precond: &impl Preconditioner<T>,
    b: &[T],
    tol: f64,
    max_iter: usize,
) -> (Vec<T>, SolveReport) {
    arnoldi(op, precond, b, tol, max_iter, Mode::Flexible)
}

fn arnoldi<T: Real>(
    op: &impl LinearOperator<T>,
    precond: &impl Preconditioner<T>,
    b: &[T],
    tol: f64,
    max_iter: usize,
    mode: Mode,
) -> (Vec<T>, SolveReport) {
    let start = Instant::now();
    let n = op.dim();
    assert_eq!(b.len(), n, "right-hand side length");
    let mut report = SolveReport {
        residuals: vec![1.0],
        ..Default::default()
    };
    let mut x = vec![T::zero(); n];

    let mut r0 = vec![T::zero(); n];
    match mode {
        Mode::Left => precond.apply(b, &mut r0),
        _ => r0.copy_from_slice(b),
    }
    let beta = norm2(&r0);
    if beta == T::zero() {
        report.converged = true;
        report.residuals[0] = 0.0;
        report.seconds = start.elapsed().as_secs_f64();
        return (x, report);
    }
    if !beta.is_finite() {
        report.breakdown = Some(Breakdown::Numerical);
        report.seconds = start.elapsed().as_secs_f64();
        return (x, report);
    }

    let tol_t = T::of(tol);
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(max_iter.min(512) + 1);
    let mut zdirs: Vec<Vec<T>> = Vec::new();
    let mut hess: Vec<Vec<T>> = Vec::new();
    let mut cs: Vec<T> = Vec::new();
    let mut sn: Vec<T> = Vec::new();
    let mut g = vec![beta];
    {
        let mut v = r0;
        let inv = T::one() / beta;
        v.iter_mut().for_each(|e| *e *= inv);
        basis.push(v);
    }

    let mut tmp = vec![T::zero(); n];
    let mut k = 0;
    while k < max_iter {
        let mut w = vec![T::zero(); n];
        match mode {
            Mode::Left => {
                op.apply(&basis[k], &mut tmp);
                precond.apply(&tmp, &mut w);
            }
            Mode::Right => {
                precond.apply(&basis[k], &mut tmp);
                op.apply(&tmp, &mut w);
            }
            Mode::Flexible => {
                let mut z = vec![T::zero(); n];
                precond.apply(&basis[k], &mut z);
                op.apply(&z, &mut w);
                zdirs.push(z);
            }
        }

        let wnorm0 = norm2(&w);
        // modified Gram-Schmidt
        let mut h = Vec::with_capacity(k + 2);
        for v in basis.iter() {
            let hij = dot(&w, v);
            axpy(-hij, v, &mut w);
            h.push(hij);
        }
        let hnext = norm2(&w);
        h.push(hnext);

        for i in 0..k {
            let (a, bb) = (h[i], h[i + 1]);
            h[i] = cs[i] * a + sn[i] * bb;
            h[i + 1] = -sn[i] * a + cs[i] * bb;
        }
        let (a, bb) = (h[k], h[k + 1]);
        let denom = a.hypot(bb);
        let (c, s) = if denom == T::zero() {
            (T::one(), T::zero())
        } else {
            (a / denom, bb / denom)
        };
        h[k] = c * a + s * bb;
        h[k + 1] = T::zero();
        cs.push(c);
        sn.push(s);
        let gk = g[k];
        g[k] = c * gk;
        g.push(-s * gk);
        hess.push(h);
        k += 1;

        let rel = (g[k].abs() / beta).as_f64();
        report.residuals.push(rel);
        if !rel.is_finite() || !hnext.is_finite() {
            report.breakdown = Some(Breakdown::Numerical);
            break;
        }
        if T::of(rel) <= tol_t {
            report.converged = true;
            break;
        }
        if hnext <= T::epsilon() * wnorm0 {
            report.breakdown = Some(Breakdown::Happy);
            break;
        }
        let inv = T::one() / hnext;
        w.iter_mut().for_each(|e| *e *= inv);
        basis.push(w);
    }
    report.iterations = k;

    // back substitution on the rotated Hessenberg matrix
    let mut y = vec![T::zero(); k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for j in i + 1..k {
            s -= hess[j][i] * y[j];
        }
        let d = hess[i][i];
        y[i] = if d == T::zero() { T::zero() } else { s / d };
    }
    match mode {
        Mode::Left => {
            for (j, &yj) in y.iter().enumerate() {
                axpy(yj, &basis[j], &mut x);
            }
        }
        Mode::Right => {
            let mut comb = vec![T::zero(); n];
            for (j, &yj) in y.iter().enumerate() {
                axpy(yj, &basis[j], &mut comb);
            }
            precond.apply(&comb, &mut x);
        }
        Mode::Flexible => {
            for (j, &yj) in y.iter().enumerate() {
                axpy(yj, &zdirs[j], &mut x);
            }
        }
    }
    if report.breakdown == Some(Breakdown::Happy) {
        // invariant subspace: the least-squares iterate is the exact solution
        report.converged = true;
    }
    report.seconds = start.elapsed().as_secs_f64();
    (x, report)
}

/// Preconditioned MINRES for symmetric (possibly indefinite) operators with
/// a symmetric positive definite preconditioner `M`. The monitored residual
/// is `‖r‖_M = sqrt(⟨M r, r⟩)`, which the recurrence produces for free.
pub fn minres<T: Real>(
    op: &impl LinearOperator<T>,
    precond: &impl Preconditioner<T>,
    b: &[T],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<T>, SolveReport)> {
    let start = Instant::now();
    let n = op.dim();
    if b.len() != n {
        return Err(Error::Shape {
            expected: n,
            got: b.len(),
        });
    }
    check_symmetry(op)?;

    let mut report = SolveReport {
        residuals: vec![1.0],
        ..Default::default()
    };
    let mut x = vec![T::zero(); n];
    let mut r1 = b.to_vec();
    let mut y = vec![T::zero(); n];
    precond.apply(&r1, &mut y);
    let beta1_sq = dot(&r1, &y);
    if beta1_sq < T::zero() {
        return Err(Error::Contract("preconditioner is not positive definite".into()));
    }
    let beta1 = beta1_sq.sqrt();
    if beta1 == T::zero() {
        report.converged = true;
        report.residuals[0] = 0.0;
        return Ok((x, report));
    }

    let mut r2 = r1.clone();
    let mut oldb = T::zero();
    let mut beta = beta1;
    let mut dbar = T::zero();
    let mut epsln = T::zero();
    let mut phibar = beta1;
    let mut cs = -T::one();
    let mut sn = T::zero();
    let mut w = vec![T::zero(); n];
    let mut w2 = vec![T::zero(); n];
    let mut v = vec![T::zero(); n];
    let tol_t = T::of(tol);

    let mut k = 0;
    while k < max_iter {
        k += 1;
        let s = T::one() / beta;
        for (vi, &yi) in v.iter_mut().zip(&y) {
            *vi = s * yi;
        }
        op.apply(&v, &mut y);
        if k >= 2 {
            axpy(-(beta / oldb), &r1, &mut y);
        }
        let alfa = dot(&v, &y);
        axpy(-(alfa / beta), &r2, &mut y);
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        precond.apply(&r2, &mut y);
        oldb = beta;
        let bsq = dot(&r2, &y);
        if bsq < T::zero() {
            return Err(Error::Contract("preconditioner is not positive definite".into()));
        }
        beta = bsq.sqrt();

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(T::epsilon());
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar = sn * phibar;

        let denom = T::one() / gamma;
        // w_new = (v - oldeps*w1 - delta*w2) / gamma, with (w1, w2) = (w2, w)
        let w1 = std::mem::replace(&mut w2, w.clone());
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) * denom;
        }
        axpy(phi, &w, &mut x);

        let rel = (phibar / beta1).as_f64();
        report.residuals.push(rel);
        if !rel.is_finite() {
            report.breakdown = Some(Breakdown::Numerical);
            break;
        }
        if T::of(rel) <= tol_t {
            report.converged = true;
            break;
        }
        if beta == T::zero() {
            report.breakdown = Some(Breakdown::Happy);
            report.converged = true;
            break;
        }
    }
    report.iterations = k;
    report.seconds = start.elapsed().as_secs_f64();
    Ok((x, report))
}

/// Probes `⟨Ax, y⟩ = ⟨x, Ay⟩` on random vectors.
pub fn check_symmetry<T: Real>(op: &impl LinearOperator<T>) -> Result<()> {
    let n = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    for _ in 0..2 {
        let x: Vec<T> = (0..n).map(|_| T::of(rng.gen_range(-1.0..1.0))).collect();
        let y: Vec<T> = (0..n).map(|_| T::of(rng.gen_range(-1.0..1.0))).collect();
        let mut ax = vec![T::zero(); n];
        let mut ay = vec![T::zero(); n];
        op.apply(&x, &mut ax);
        op.apply(&y, &mut ay);
        let lhs = dot(&ax, &y);
        let rhs = dot(&x, &ay);
        let scale = norm2(&ax) * norm2(&y) + norm2(&x) * norm2(&ay);
        let tol = T::epsilon().sqrt() * scale;
        if (lhs - rhs).abs() > tol {
            return Err(Error::Contract(format!(
                "operator is not symmetric: <Ax,y> = {lhs:e}, <x,Ay> = {rhs:e}"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::operator::{DiagonalScaling, Identity};
    use crate::linalg::sparse::SparseMatrix;

    #[test]
    fn identity_converges_in_one_step() {
        let a = SparseMatrix::<f64>::identity(5);
        let b = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let (x, rep) = gmres(&a, &Identity, &b, 1e-12, 50, PrecondSide::Right);
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
        assert!(x.iter().zip(&b).all(|(u, v)| (u - v).abs() < 1e-14));
        let (_, rep) = fgmres(&a, &Identity, &b, 1e-12, 50);
        assert_eq!(rep.iterations, 1);
        let (_, rep) = minres(&a, &Identity, &b, 1e-12, 50).unwrap();
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn two_distinct_eigenvalues() {
        let a = SparseMatrix::from_diagonal(&[1.0f64, 2.0]);
        let (x, rep) = gmres(&a, &Identity, &[1.0, 1.0], 1e-12, 10, PrecondSide::Left);
        assert!(rep.iterations <= 2 && rep.converged);
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn minres_indefinite_diagonal() {
        let a = SparseMatrix::from_diagonal(&[1.0f64, -1.0]);
        let (x, rep) = minres(&a, &Identity, &[3.0, 2.0], 1e-12, 10).unwrap();
        assert!(rep.iterations <= 2 && rep.converged);
        assert!((x[0] - 3.0).abs() < 1e-13 && (x[1] + 2.0).abs() < 1e-13);
    }

    #[test]
    fn minres_rejects_nonsymmetric() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 5.0), (1, 1, 1.0)]).unwrap();
        assert!(matches!(minres(&a, &Identity, &[1.0, 1.0], 1e-8, 10), Err(Error::Contract(_))));
    }

    #[test]
    fn zero_rhs_is_immediate() {
        let a = SparseMatrix::<f64>::identity(3);
        let (x, rep) = gmres(&a, &Identity, &[0.0; 3], 1e-8, 10, PrecondSide::Right);
        assert!(rep.converged && rep.iterations == 0 && x == vec![0.0; 3]);
    }

    #[test]
    fn residual_history_monotone_and_diag_scaling() {
        let n = 30;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 + i as f64));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -0.5));
            }
        }
        let a = SparseMatrix::from_triplets(n, n, &t).unwrap();
        let b = vec![1.0; n];
        let p = DiagonalScaling::new(&a.diagonal());
        let (x, rep) = gmres(&a, &p, &b, 1e-10, 100, PrecondSide::Right);
        assert!(rep.converged);
        for w in rep.residuals.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        let r: Vec<f64> = a.spmv(&x).unwrap().iter().zip(&b).map(|(p, q)| q - p).collect();
        assert!(norm2(&r) / norm2(&b) <= 1e-10 * 1.0001);
    }

    #[test]
    fn maxit_reports_nonconvergence() {
        let a = SparseMatrix::from_diagonal(&[1.0, 2.0, 3.0, 4.0]);
        let (_, rep) = gmres(&a, &Identity, &[1.0; 4], 1e-14, 2, PrecondSide::Right);
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 2);
        assert!(rep.final_residual() > 1e-14);
    }

    #[test]
    fn works_in_single_precision() {
        let a = SparseMatrix::<f32>::from_diagonal(&[1.0, 3.0, 9.0]);
        let (x, rep) = gmres(&a, &Identity, &[1.0, 3.0, 9.0], 1e-5, 10, PrecondSide::Right);
        assert!(rep.converged);
        assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-5));
    }
}
