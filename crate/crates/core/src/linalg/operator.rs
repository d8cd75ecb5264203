use crate::linalg::sparse::SparseMatrix;
use crate::scalar::Real;

/// A square linear map applied matrix-free.
pub trait LinearOperator<T: Real> {
    fn dim(&self) -> usize;
    /// `y = Op x`; `y` is overwritten.
    fn apply(&self, x: &[T], y: &mut [T]);
}

/// Approximate inverse action `z ≈ M⁻¹ r`. May vary between calls (inner
/// Krylov solves), which only the flexible outer method tolerates.
pub trait Preconditioner<T: Real> {
    fn apply(&self, r: &[T], z: &mut [T]);
}

impl<T: Real> LinearOperator<T> for SparseMatrix<T> {
    fn dim(&self) -> usize {
        debug_assert_eq!(self.nrows(), self.ncols());
        self.nrows()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        self.mul_into(x, y);
    }
}

/// An explicit matrix used as an approximate inverse.
impl<T: Real> Preconditioner<T> for SparseMatrix<T> {
    fn apply(&self, r: &[T], z: &mut [T]) {
        self.mul_into(r, z);
    }
}

impl<T: Real, O: LinearOperator<T> + ?Sized> LinearOperator<T> for &O {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &[T], y: &mut [T]) {
        (**self).apply(x, y)
    }
}

impl<T: Real, P: Preconditioner<T> + ?Sized> Preconditioner<T> for &P {
    fn apply(&self, r: &[T], z: &mut [T]) {
        (**self).apply(r, z)
    }
}

impl<T: Real, P: Preconditioner<T> + ?Sized> Preconditioner<T> for Box<P> {
    fn apply(&self, r: &[T], z: &mut [T]) {
        (**self).apply(r, z)
    }
}

/// Wraps a closure as an operator of fixed dimension.
pub struct FnOperator<F> {
    pub dim: usize,
    pub f: F,
}

impl<T: Real, F: Fn(&[T], &mut [T])> LinearOperator<T> for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, x: &[T], y: &mut [T]) {
        (self.f)(x, y)
    }
}

/// Wraps a closure as a preconditioner.
pub struct FnPreconditioner<F>(pub F);

impl<T: Real, F: Fn(&[T], &mut [T])> Preconditioner<T> for FnPreconditioner<F> {
    fn apply(&self, r: &[T], z: &mut [T]) {
        (self.0)(r, z)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Identity;

impl<T: Real> Preconditioner<T> for Identity {
    fn apply(&self, r: &[T], z: &mut [T]) {
        z.copy_from_slice(r);
    }
}

/// Diagonal scaling `z = D⁻¹ r`.
#[derive(Clone, Debug)]
pub struct DiagonalScaling<T> {
    inv: Vec<T>,
}

impl<T: Real> DiagonalScaling<T> {
    pub fn new(diag: &[T]) -> Self {
        Self {
            inv: diag.iter().map(|&d| T::one() / d).collect(),
        }
    }

    pub fn from_inverse(inv: Vec<T>) -> Self {
        Self { inv }
    }
}

impl<T: Real> Preconditioner<T> for DiagonalScaling<T> {
    fn apply(&self, r: &[T], z: &mut [T]) {
        for ((zi, &ri), &di) in z.iter_mut().zip(r).zip(&self.inv) {
            *zi = ri * di;
        }
    }
}
