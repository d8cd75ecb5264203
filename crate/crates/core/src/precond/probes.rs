use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BlockPreconditioner, PrecondConfig, PrecondKind};
use crate::discretization::BlockSystem;
use crate::error::Result;
use crate::linalg::{est_extreme_eigs, EigenEstimate, FnOperator, FnPreconditioner, Identity, LinearOperator, Preconditioner};
use crate::scalar::{dot, Real};

/// Field-of-values bounds sampled over random vectors: `sigma` is the
/// smallest `(P𝒜x, x)_M / (x, x)_M`, `upsilon` the largest `‖P𝒜x‖_M / ‖x‖_M`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FovEstimate {
    pub sigma: f64,
    pub upsilon: f64,
    pub samples: usize,
}

fn random_vec<T: Real>(rng: &mut ChaCha8Rng, n: usize) -> Vec<T> {
    (0..n).map(|_| T::of(rng.gen_range(-1.0..1.0))).collect()
}

/// Sample the field of values of `P𝒜` in the inner product defined by the
/// SPD matrix action `metric`.
pub fn fov_probe<T: Real>(
    op: &impl LinearOperator<T>,
    p: &impl Preconditioner<T>,
    metric: &impl Preconditioner<T>,
    samples: usize,
    seed: u64,
) -> FovEstimate {
    let n = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sigma = f64::INFINITY;
    let mut upsilon: f64 = 0.0;
    let (mut y, mut z, mut mx, mut mz) = (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]);
    for _ in 0..samples {
        let x: Vec<T> = random_vec(&mut rng, n);
        op.apply(&x, &mut y);
        p.apply(&y, &mut z);
        metric.apply(&x, &mut mx);
        metric.apply(&z, &mut mz);
        let xx = dot(&x, &mx).as_f64();
        let zx = dot(&z, &mx).as_f64();
        let zz = dot(&z, &mz).as_f64();
        sigma = sigma.min(zx / xx);
        upsilon = upsilon.max((zz / xx).sqrt());
    }
    FovEstimate { sigma, upsilon, samples }
}

/// Field of values of a block preconditioner on the nonsymmetric system.
/// Diagonal and lower variants act from the left and are measured in the
/// `diag(A, S)` inner product; upper variants act from the right, measured
/// in the inner product of the exact block diagonal inverse.
pub fn block_fov<T: Real>(sys: &BlockSystem<T>, p: &BlockPreconditioner<'_, T>, samples: usize, seed: u64) -> Result<FovEstimate> {
    let op = sys.operator();
    let n = op.dim();
    let nw = sys.n_w();
    if p.config().kind == PrecondKind::Upper {
        let exact = BlockPreconditioner::with_pressure(sys, p.shared_pressure(), PrecondConfig::exact(PrecondKind::Diag))?;
        let right = FnOperator {
            dim: n,
            f: |x: &[T], y: &mut [T]| {
                let mut t = vec![T::zero(); n];
                p.apply(x, &mut t);
                op.apply(&t, y);
            },
        };
        return Ok(fov_probe(&right, &Identity, &exact, samples, seed));
    }
    let s = &p.pressure().s;
    let metric = FnPreconditioner(|x: &[T], y: &mut [T]| {
        let (xw, xp) = x.split_at(nw);
        let (yw, yp) = y.split_at_mut(nw);
        sys.a.mul_into(xw, yw);
        s.mul_into(xp, yp);
    });
    Ok(fov_probe(&op, p, &metric, samples, seed))
}

/// Condition number estimate `|λ|max / |λ|min` of `P𝒜_sym` for an SPD block
/// diagonal `P`, from Lanczos on the square `(P𝒜_sym)²`, whose extreme
/// eigenvalues are the squares of the extreme magnitudes.
pub fn cond_estimate<T: Real>(sys: &BlockSystem<T>, p_diag: &impl Preconditioner<T>, steps: usize, seed: u64) -> Result<(f64, EigenEstimate)> {
    let a = sys.symmetric_operator();
    let n = a.dim();
    let squared = FnOperator {
        dim: n,
        f: |x: &[T], y: &mut [T]| {
            let mut t = vec![T::zero(); n];
            let mut u = vec![T::zero(); n];
            a.apply(x, &mut t);
            p_diag.apply(&t, &mut u);
            a.apply(&u, y);
        },
    };
    let est = est_extreme_eigs(&squared, p_diag, steps, seed)?;
    Ok(((est.max / est.min).sqrt(), est))
}

/// Empirical `‖I - H_w A‖_A` from a few power steps on random starts.
pub fn flux_contraction<T: Real>(sys: &BlockSystem<T>, p: &BlockPreconditioner<'_, T>, steps: usize, seed: u64) -> f64 {
    let n = sys.n_w();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e: Vec<T> = random_vec(&mut rng, n);
    let (mut ae, mut he) = (vec![T::zero(); n], vec![T::zero(); n]);
    let energy = |v: &[T], tmp: &mut [T]| {
        sys.a.mul_into(v, tmp);
        dot(v, tmp).as_f64().sqrt()
    };
    let mut rho: f64 = 0.0;
    for _ in 0..steps.max(1) {
        let norm = energy(&e, &mut ae);
        e.iter_mut().for_each(|x| *x /= T::of(norm));
        sys.a.mul_into(&e, &mut ae);
        p.solve_flux(&ae, &mut he);
        for (x, h) in e.iter_mut().zip(&he) {
            *x -= *h;
        }
        rho = rho.max(energy(&e, &mut ae));
    }
    rho
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SparseMatrix;

    #[test]
    fn exact_inverse_has_unit_field_of_values() {
        let a = SparseMatrix::from_dense(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let inv = SparseMatrix::from_dense(2, 2, &[0.6, -0.2, -0.2, 0.4]);
        let fov = fov_probe(&a, &inv, &Identity, 10, 1);
        assert!((fov.sigma - 1.0).abs() < 1e-10 && (fov.upsilon - 1.0).abs() < 1e-10);
    }
}
