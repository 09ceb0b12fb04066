//! Minimal complex CSC matrices for assembly and verification.
//!
//! Factorizations are delegated to faer; this type only covers what
//! assembly and the verification checks need (triplet accumulation,
//! matvec, adjoint, block composition, dense conversion). A matrix that
//! happens to be real is flagged so solvers can stay in real arithmetic.

use faer::Mat;

use crate::Complex;

#[derive(Debug, Clone)]
pub struct SparseMat {
    pub nrows: usize,
    pub ncols: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub values: Vec<Complex>,
    pub is_real: bool,
}

impl SparseMat {
    /// Build from triplets, summing duplicates. Entries below 1e-300 in
    /// magnitude after accumulation are kept (structural zeros are
    /// harmless).
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, Complex)],
    ) -> Self {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_unstable_by_key(|&i| (triplets[i].1, triplets[i].0));
        let mut col_ptr = vec![0usize; ncols + 1];
        let mut row_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<Complex> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for &i in &order {
            let (r, c, v) = triplets[i];
            debug_assert!(r < nrows && c < ncols);
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_idx.push(r);
                values.push(v);
                col_ptr[c + 1] += 1;
                last = Some((r, c));
            }
        }
        for c in 0..ncols {
            col_ptr[c + 1] += col_ptr[c];
        }
        let is_real = values.iter().all(|v| v.im == 0.0);
        Self {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            values,
            is_real,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn col(&self, j: usize) -> impl Iterator<Item = (usize, Complex)> + '_ {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        self.row_idx[range.clone()]
            .iter()
            .zip(&self.values[range])
            .map(|(&r, &v)| (r, v))
    }

    pub fn matvec(&self, x: &[Complex]) -> Vec<Complex> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![Complex::ZERO; self.nrows];
        for j in 0..self.ncols {
            let xj = x[j];
            if xj == Complex::ZERO {
                continue;
            }
            for (r, v) in self.col(j) {
                y[r] += v * xj;
            }
        }
        y
    }

    /// y = Aᴴ x, computed column-wise without forming the adjoint.
    pub fn adjoint_matvec(&self, x: &[Complex]) -> Vec<Complex> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![Complex::ZERO; self.ncols];
        for (j, yj) in y.iter_mut().enumerate() {
            for (r, v) in self.col(j) {
                *yj += v.conj() * x[r];
            }
        }
        y
    }

    pub fn adjoint(&self) -> SparseMat {
        let triplets: Vec<(usize, usize, Complex)> = (0..self.ncols)
            .flat_map(|j| self.col(j).map(move |(r, v)| (j, r, v.conj())))
            .collect();
        SparseMat::from_triplets(self.ncols, self.nrows, &triplets)
    }

    pub fn scale(&self, s: Complex) -> SparseMat {
        let mut out = self.clone();
        for v in out.values.iter_mut() {
            *v *= s;
        }
        out.is_real = out.values.iter().all(|v| v.im == 0.0);
        out
    }

    pub fn to_dense(&self) -> Mat<Complex> {
        let mut m = Mat::zeros(self.nrows, self.ncols);
        for j in 0..self.ncols {
            for (r, v) in self.col(j) {
                m[(r, j)] += v;
            }
        }
        m
    }

    pub fn to_triplets(&self) -> Vec<(usize, usize, Complex)> {
        (0..self.ncols)
            .flat_map(|j| self.col(j).map(move |(r, v)| (r, j, v)))
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// max |A_ij - conj(A_ji)| over the sparsity pattern.
    pub fn hermitian_error(&self) -> f64 {
        let adj = self.adjoint();
        let mut err: f64 = 0.0;
        for j in 0..self.ncols {
            let a: Vec<(usize, Complex)> = self.col(j).collect();
            let b: Vec<(usize, Complex)> = adj.col(j).collect();
            // merge the two sorted sparse columns
            let (mut i, mut k) = (0, 0);
            while i < a.len() || k < b.len() {
                match (a.get(i), b.get(k)) {
                    (Some(&(ra, va)), Some(&(rb, vb))) if ra == rb => {
                        err = err.max((va - vb).norm());
                        i += 1;
                        k += 1;
                    }
                    (Some(&(ra, va)), Some(&(rb, _))) if ra < rb => {
                        err = err.max(va.norm());
                        i += 1;
                    }
                    (Some(_), Some(&(_, vb))) => {
                        err = err.max(vb.norm());
                        k += 1;
                    }
                    (Some(&(_, va)), None) => {
                        err = err.max(va.norm());
                        i += 1;
                    }
                    (None, Some(&(_, vb))) => {
                        err = err.max(vb.norm());
                        k += 1;
                    }
                    (None, None) => unreachable!(),
                }
            }
        }
        err
    }

    /// Assemble a 2×2 block matrix; `None` blocks are zero. Dimensions are
    /// taken from the present blocks and must be consistent.
    pub fn block2x2(
        blocks: [[Option<&SparseMat>; 2]; 2],
        row_dims: [usize; 2],
        col_dims: [usize; 2],
    ) -> SparseMat {
        let mut triplets = Vec::new();
        for bi in 0..2 {
            for bj in 0..2 {
                if let Some(m) = blocks[bi][bj] {
                    assert_eq!(m.nrows, row_dims[bi]);
                    assert_eq!(m.ncols, col_dims[bj]);
                    let (ro, co) = (bi * row_dims[0], bj * col_dims[0]);
                    for j in 0..m.ncols {
                        for (r, v) in m.col(j) {
                            triplets.push((r + ro, j + co, v));
                        }
                    }
                }
            }
        }
        SparseMat::from_triplets(
            row_dims[0] + row_dims[1],
            col_dims[0] + col_dims[1],
            &triplets,
        )
    }
}
