//! Compressed sparse row matrices over `Complex64`, with the kernels the
//! Lindblad solver needs: Kronecker products, sparse-times-dense from either
//! side, and sparse matrix products for operator assembly.

use num_complex::Complex64 as C64;

use crate::linalg::DMat;

#[derive(Debug, Clone, PartialEq)]
pub struct SpMat {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<u32>,
    pub data: Vec<C64>,
}

impl SpMat {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n as u32).collect(),
            data: vec![C64::new(1.0, 0.0); n],
        }
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    /// Build from (row, col, value) triplets; duplicates are summed and exact
    /// zeros dropped.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Self {
        let mut items: Vec<(usize, usize, C64)> = triplets.into_iter().collect();
        items.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(items.len());
        let mut data: Vec<C64> = Vec::with_capacity(items.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in items {
            debug_assert!(r < nrows && c < ncols);
            if last == Some((r, c)) {
                *data.last_mut().unwrap() += v;
            } else {
                indptr[r + 1] += 1;
                indices.push(c as u32);
                data.push(v);
                last = Some((r, c));
            }
        }
        // Drop exact zeros produced by cancellation.
        let mut out = Self {
            nrows,
            ncols,
            indptr: Vec::new(),
            indices: Vec::new(),
            data: Vec::new(),
        };
        out.indptr = vec![0; nrows + 1];
        let mut row = 0usize;
        let mut k = 0usize;
        let mut cum = vec![0usize; nrows + 1];
        for i in 1..=nrows {
            cum[i] = cum[i - 1] + indptr[i];
        }
        for i in 0..nrows {
            while row < i {
                row += 1;
            }
            for idx in cum[i]..cum[i + 1] {
                let v = data[idx];
                if v != C64::new(0.0, 0.0) {
                    out.indices.push(indices[idx]);
                    out.data.push(v);
                    k += 1;
                }
            }
            out.indptr[i + 1] = k;
        }
        out
    }

    pub fn to_dense(&self) -> DMat {
        let mut m = DMat::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                m[(i, self.indices[k] as usize)] = self.data[k];
            }
        }
        m
    }

    pub fn scale(&mut self, s: C64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn adjoint(&self) -> SpMat {
        let mut triplets = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                triplets.push((self.indices[k] as usize, i, self.data[k].conj()));
            }
        }
        SpMat::from_triplets(self.ncols, self.nrows, triplets)
    }

    pub fn transpose(&self) -> SpMat {
        let mut triplets = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                triplets.push((self.indices[k] as usize, i, self.data[k]));
            }
        }
        SpMat::from_triplets(self.ncols, self.nrows, triplets)
    }

    pub fn conj(&self) -> SpMat {
        let mut out = self.clone();
        for v in &mut out.data {
            *v = v.conj();
        }
        out
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: C64, other: &SpMat) -> SpMat {
        assert_eq!(self.nrows, other.nrows);
        assert_eq!(self.ncols, other.ncols);
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                triplets.push((i, self.indices[k] as usize, self.data[k]));
            }
            for k in other.indptr[i]..other.indptr[i + 1] {
                triplets.push((i, other.indices[k] as usize, s * other.data[k]));
            }
        }
        SpMat::from_triplets(self.nrows, self.ncols, triplets)
    }

    pub fn matmul(&self, other: &SpMat) -> SpMat {
        assert_eq!(self.ncols, other.nrows);
        let mut triplets = Vec::new();
        for i in 0..self.nrows {
            for ka in self.indptr[i]..self.indptr[i + 1] {
                let k = self.indices[ka] as usize;
                let va = self.data[ka];
                for kb in other.indptr[k]..other.indptr[k + 1] {
                    triplets.push((i, other.indices[kb] as usize, va * other.data[kb]));
                }
            }
        }
        SpMat::from_triplets(self.nrows, other.ncols, triplets)
    }

    /// Kronecker product; `self` indexes the slow factor.
    pub fn kron(&self, other: &SpMat) -> SpMat {
        let nrows = self.nrows * other.nrows;
        let ncols = self.ncols * other.ncols;
        let mut triplets = Vec::with_capacity(self.nnz() * other.nnz());
        for ia in 0..self.nrows {
            for ka in self.indptr[ia]..self.indptr[ia + 1] {
                let ja = self.indices[ka] as usize;
                let va = self.data[ka];
                for ib in 0..other.nrows {
                    for kb in other.indptr[ib]..other.indptr[ib + 1] {
                        let jb = other.indices[kb] as usize;
                        triplets.push((
                            ia * other.nrows + ib,
                            ja * other.ncols + jb,
                            va * other.data[kb],
                        ));
                    }
                }
            }
        }
        SpMat::from_triplets(nrows, ncols, triplets)
    }

    /// Dense diagonal, if the matrix has no off-diagonal entries.
    pub fn as_diagonal(&self) -> Option<Vec<C64>> {
        let mut diag = vec![C64::new(0.0, 0.0); self.nrows.min(self.ncols)];
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                let j = self.indices[k] as usize;
                if i != j {
                    return None;
                }
                diag[i] = self.data[k];
            }
        }
        Some(diag)
    }

    /// Diagonal entries (matrix need not be diagonal).
    pub fn diagonal(&self) -> Vec<C64> {
        let mut diag = vec![C64::new(0.0, 0.0); self.nrows.min(self.ncols)];
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                if self.indices[k] as usize == i {
                    diag[i] = self.data[k];
                }
            }
        }
        diag
    }

    /// Split into diagonal and strictly off-diagonal parts.
    pub fn split_diagonal(&self) -> (Vec<C64>, SpMat) {
        let diag = self.diagonal();
        let mut triplets = Vec::new();
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                let j = self.indices[k] as usize;
                if i != j {
                    triplets.push((i, j, self.data[k]));
                }
            }
        }
        (diag, SpMat::from_triplets(self.nrows, self.ncols, triplets))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let adj = self.adjoint();
        if adj.indptr != self.indptr || adj.indices != self.indices {
            // Patterns can differ by explicit zeros; fall back to dense check
            // only for small matrices.
            if self.nrows <= 512 {
                let a = self.to_dense();
                let b = adj.to_dense();
                return a
                    .data
                    .iter()
                    .zip(&b.data)
                    .all(|(x, y)| (x - y).norm() <= tol);
            }
            return false;
        }
        self.data
            .iter()
            .zip(&adj.data)
            .all(|(x, y)| (x - y).norm() <= tol)
    }

    /// `y = self * x` for a dense vector.
    pub fn spmv(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for i in 0..self.nrows {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.indptr[i]..self.indptr[i + 1] {
                acc += self.data[k] * x[self.indices[k] as usize];
            }
            y[i] = acc;
        }
    }

    /// `out += alpha * self * x` column by column.
    pub fn mul_dense_left(&self, alpha: C64, x: &DMat, out: &mut DMat) {
        debug_assert_eq!(self.ncols, x.nrows);
        debug_assert_eq!(self.nrows, out.nrows);
        debug_assert_eq!(x.ncols, out.ncols);
        for c in 0..x.ncols {
            let xcol = x.col(c);
            let ocol = out.col_mut(c);
            for i in 0..self.nrows {
                let mut acc = C64::new(0.0, 0.0);
                for k in self.indptr[i]..self.indptr[i + 1] {
                    acc += self.data[k] * xcol[self.indices[k] as usize];
                }
                ocol[i] += alpha * acc;
            }
        }
    }

    /// `out += alpha * x * self`, implemented as column updates
    /// `out[:, j] += alpha * self[k, j] * x[:, k]`.
    pub fn mul_dense_right(&self, alpha: C64, x: &DMat, out: &mut DMat) {
        debug_assert_eq!(x.ncols, self.nrows);
        debug_assert_eq!(self.ncols, out.ncols);
        debug_assert_eq!(x.nrows, out.nrows);
        let n = x.nrows;
        for k in 0..self.nrows {
            let xcol = &x.data[k * n..(k + 1) * n];
            for e in self.indptr[k]..self.indptr[k + 1] {
                let j = self.indices[e] as usize;
                let v = alpha * self.data[e];
                let ocol = &mut out.data[j * n..(j + 1) * n];
                for i in 0..n {
                    ocol[i] += v * xcol[i];
                }
            }
        }
    }
}
