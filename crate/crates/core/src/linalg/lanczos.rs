//! Lanczos estimates of extreme eigenvalues of a preconditioned symmetric
//! operator. The results are Ritz values, not rigorous bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::dense::symmetric_tridiagonal_eigenvalues;
use crate::linalg::operator::{LinearOperator, Preconditioner};
use crate::scalar::{dot, Real};

/// Ritz-value estimate of the spectrum of `M·Op` where `M` is SPD.
#[derive(Clone, Debug)]
pub struct EigenEstimate {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    /// All Ritz values of the final tridiagonal matrix, ascending.
    pub ritz: Vec<f64>,
}

impl EigenEstimate {
    /// `max |θ| / min |θ|` over the Ritz values.
    pub fn abs_ratio(&self) -> f64 {
        let lo = self.ritz.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        let hi = self.ritz.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        hi / lo
    }
}

/// `k` steps of Lanczos on `M·Op` in the `M⁻¹` inner product, where
/// `metric` applies `M`. `Op` must be symmetric; `M` symmetric positive
/// definite. Full reorthogonalization keeps the Ritz values clean.
pub fn est_extreme_eigs<T: Real>(
    op: &impl LinearOperator<T>,
    metric: &impl Preconditioner<T>,
    k: usize,
    seed: u64,
) -> Result<EigenEstimate> {
    let n = op.dim();
    let k = k.min(n).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u: Vec<T> = (0..n).map(|_| T::of(rng.gen_range(-1.0..1.0))).collect();
    let mut q = vec![T::zero(); n];
    metric.apply(&u, &mut q);
    let b0 = dot(&u, &q);
    if !(b0 > T::zero()) {
        return Err(Error::Contract("metric is not positive definite".into()));
    }
    let b0 = b0.sqrt();
    u.iter_mut().for_each(|v| *v /= b0);
    q.iter_mut().for_each(|v| *v /= b0);

    let mut us: Vec<Vec<T>> = vec![u];
    let mut qs: Vec<Vec<T>> = vec![q];
    let mut alpha: Vec<T> = Vec::new();
    let mut beta: Vec<T> = Vec::new();
    let mut w = vec![T::zero(); n];
    let mut z = vec![T::zero(); n];
    for j in 0..k {
        op.apply(&qs[j], &mut w);
        let a = dot(&w, &qs[j]);
        alpha.push(a);
        for (wi, &ui) in w.iter_mut().zip(&us[j]) {
            *wi -= a * ui;
        }
        if j > 0 {
            let b = beta[j - 1];
            for (wi, &ui) in w.iter_mut().zip(&us[j - 1]) {
                *wi -= b * ui;
            }
        }
        for _ in 0..2 {
            for i in 0..=j {
                let c = dot(&w, &qs[i]);
                for (wi, &ui) in w.iter_mut().zip(&us[i]) {
                    *wi -= c * ui;
                }
            }
        }
        if j + 1 == k {
            break;
        }
        metric.apply(&w, &mut z);
        let bsq = dot(&w, &z);
        if bsq < T::zero() {
            return Err(Error::Contract("metric is not positive definite".into()));
        }
        let b = bsq.sqrt();
        let scale = alpha.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if b <= T::epsilon() * T::of(100.0) * scale.max(T::min_positive_value()) {
            break;
        }
        beta.push(b);
        us.push(w.iter().map(|&v| v / b).collect());
        qs.push(z.iter().map(|&v| v / b).collect());
    }
    let steps = alpha.len();
    beta.truncate(steps - 1);
    let ritz = symmetric_tridiagonal_eigenvalues(&alpha, &beta)?;
    let ritz: Vec<f64> = ritz.into_iter().map(|v| v.as_f64()).collect();
    Ok(EigenEstimate {
        min: ritz[0],
        max: *ritz.last().unwrap(),
        steps,
        ritz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::operator::Identity;
    use crate::linalg::sparse::SparseMatrix;

    #[test]
    fn identity_spectrum() {
        let a = SparseMatrix::<f64>::identity(20);
        let e = est_extreme_eigs(&a, &Identity, 10, 1).unwrap();
        assert!((e.min - 1.0).abs() < 1e-12 && (e.max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_full_krylov_is_exact() {
        let d: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let a = SparseMatrix::from_diagonal(&d);
        let e = est_extreme_eigs(&a, &Identity, 10, 7).unwrap();
        assert!((e.min - 1.0).abs() < 1e-8, "{}", e.min);
        assert!((e.max - 10.0).abs() < 1e-8, "{}", e.max);
    }
}
