//! Compressed sparse row storage.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Compressed sparse row matrix.
///
/// Column indices are sorted within each row and never duplicated.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> SparseMatrix<T> {
    /// Builds a matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, T)]) -> Result<Self> {
        let mut counts = vec![0usize; nrows + 1];
        for &(i, j, _) in triplets {
            if i >= nrows || j >= ncols {
                return Err(Error::Shape {
                    expected: if i >= nrows { nrows } else { ncols },
                    got: if i >= nrows { i } else { j },
                });
            }
            counts[i + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![T::zero(); triplets.len()];
        for &(i, j, v) in triplets {
            let k = next[i];
            cols[k] = j;
            vals[k] = v;
            next[i] += 1;
        }

        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut scratch: Vec<(usize, T)> = Vec::new();
        for i in 0..nrows {
            scratch.clear();
            scratch.extend((counts[i]..counts[i + 1]).map(|k| (cols[k], vals[k])));
            // stable: equal columns keep insertion order, so sums are reproducible
            scratch.sort_by_key(|e| e.0);
            let mut iter = scratch.iter().copied();
            if let Some((mut cj, mut cv)) = iter.next() {
                for (j, v) in iter {
                    if j == cj {
                        cv += v;
                    } else {
                        col_idx.push(cj);
                        values.push(cv);
                        cj = j;
                        cv = v;
                    }
                }
                col_idx.push(cj);
                values.push(cv);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Builds directly from CSR arrays, validating the storage invariants.
    pub fn from_csr(
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<T>,
    ) -> Result<Self> {
        let m = Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        };
        m.check()?;
        Ok(m)
    }

    fn check(&self) -> Result<()> {
        if self.row_ptr.len() != self.nrows + 1 || self.row_ptr[0] != 0 {
            return Err(Error::Contract("row offsets malformed".into()));
        }
        if *self.row_ptr.last().unwrap() != self.col_idx.len() || self.col_idx.len() != self.values.len() {
            return Err(Error::Contract("row offsets do not match entry count".into()));
        }
        for i in 0..self.nrows {
            let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
            if a > b {
                return Err(Error::Contract(format!("row {i} offsets decrease")));
            }
            for k in a..b {
                if self.col_idx[k] >= self.ncols {
                    return Err(Error::Contract(format!("row {i}: column {} out of range", self.col_idx[k])));
                }
                if k > a && self.col_idx[k] <= self.col_idx[k - 1] {
                    return Err(Error::Contract(format!("row {i}: columns not strictly increasing")));
                }
            }
        }
        Ok(())
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![T::one(); n])
    }

    pub fn from_diagonal(d: &[T]) -> Self {
        let n = d.len();
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: d.to_vec(),
        }
    }

    /// Dense row-major input; exact zeros are dropped.
    pub fn from_dense(nrows: usize, ncols: usize, dense: &[T]) -> Self {
        assert_eq!(dense.len(), nrows * ncols);
        let mut trip = Vec::new();
        for i in 0..nrows {
            for j in 0..ncols {
                let v = dense[i * ncols + j];
                if v != T::zero() {
                    trip.push((i, j, v));
                }
            }
        }
        Self::from_triplets(nrows, ncols, &trip).expect("indices in range")
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    #[inline]
    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[a..b], &self.values[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => T::zero(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    /// `y = M x`, checking shapes.
    pub fn spmv(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.ncols {
            return Err(Error::Shape {
                expected: self.ncols,
                got: x.len(),
            });
        }
        let mut y = vec![T::zero(); self.nrows];
        self.mul_into(x, &mut y);
        Ok(y)
    }

    /// `y = M x` without shape checks beyond debug assertions.
    #[inline]
    pub fn mul_into(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    /// `y += alpha * M x`
    #[inline]
    pub fn mul_add_into(&self, alpha: T, x: &[T], y: &mut [T]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi += alpha * acc;
        }
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![T::zero(); self.nnz()];
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                col_idx[next[j]] = i;
                values[next[j]] = self.values[k];
                next[j] += 1;
            }
        }
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr: counts,
            col_idx,
            values,
        }
    }

    /// Main diagonal (zeros where no entry is stored).
    pub fn diagonal(&self) -> Vec<T> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<T> {
        let mut d = vec![T::zero(); self.nrows * self.ncols];
        for (i, j, v) in self.iter() {
            d[i * self.ncols + j] = v;
        }
        d
    }

    /// Largest entrywise difference `max |M - Mᵀ|`; requires a square matrix.
    pub fn asymmetry(&self) -> T {
        let t = self.transpose();
        let mut m = T::zero();
        for (i, j, v) in self.iter() {
            m = m.max((v - t.get(i, j)).abs());
        }
        for (i, j, v) in t.iter() {
            m = m.max((v - self.get(i, j)).abs());
        }
        m
    }

    pub fn map_values<U: Real>(&self, f: impl Fn(T) -> U) -> SparseMatrix<U> {
        SparseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `M · diag(d) · Mᵀ`, with each entry summed in ascending inner index so
    /// the result is bitwise symmetric.
    pub fn scaled_gram(&self, d: &[T]) -> Self {
        assert_eq!(d.len(), self.ncols);
        let mt = self.transpose();
        let mut marker = vec![usize::MAX; self.nrows];
        let mut acc = vec![T::zero(); self.nrows];
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        let mut touched: Vec<usize> = Vec::new();
        for i in 0..self.nrows {
            touched.clear();
            let (cols, vals) = self.row(i);
            for (&k, &bik) in cols.iter().zip(vals) {
                let (rows_k, vals_k) = mt.row(k);
                for (&j, &bjk) in rows_k.iter().zip(vals_k) {
                    let contrib = (bik * bjk) * d[k];
                    if marker[j] != i {
                        marker[j] = i;
                        acc[j] = contrib;
                        touched.push(j);
                    } else {
                        acc[j] += contrib;
                    }
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                col_idx.push(j);
                values.push(acc[j]);
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            nrows: self.nrows,
            ncols: self.nrows,
            row_ptr,
            col_idx,
            values,
        }
    }
}
