//! Minimal dense complex linear algebra: column-major matrices, Hermitian
//! eigenvalues via cyclic Jacobi, and a few vector kernels used by the
//! integrators and iterative solvers.

use num_complex::Complex64;

pub type C64 = Complex64;

/// Dense column-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DMat {
    pub nrows: usize,
    pub ncols: usize,
    pub data: Vec<C64>,
}

impl DMat {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            data: vec![C64::new(0.0, 0.0); nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nrows && j < self.ncols);
        i + j * self.nrows
    }

    pub fn col(&self, j: usize) -> &[C64] {
        &self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [C64] {
        &mut self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn trace(&self) -> C64 {
        (0..self.nrows.min(self.ncols))
            .map(|i| self[(i, i)])
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn adjoint(&self) -> DMat {
        let mut out = DMat::zeros(self.ncols, self.nrows);
        for j in 0..self.ncols {
            for i in 0..self.nrows {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// `(A + A†)/2`; requires a square matrix.
    pub fn hermitize(&mut self) {
        debug_assert_eq!(self.nrows, self.ncols);
        for j in 0..self.ncols {
            for i in 0..=j {
                let avg = 0.5 * (self[(i, j)] + self[(j, i)].conj());
                self[(i, j)] = avg;
                self[(j, i)] = avg.conj();
            }
        }
    }

    pub fn scale(&mut self, s: C64) {
        for z in &mut self.data {
            *z *= s;
        }
    }

    pub fn fill_zero(&mut self) {
        self.data.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
    }

    pub fn matmul(&self, other: &DMat) -> DMat {
        assert_eq!(self.ncols, other.nrows);
        let mut out = DMat::zeros(self.nrows, other.ncols);
        for j in 0..other.ncols {
            for k in 0..self.ncols {
                let b = other[(k, j)];
                if b == C64::new(0.0, 0.0) {
                    continue;
                }
                let col = &self.data[k * self.nrows..(k + 1) * self.nrows];
                let out_col = &mut out.data[j * self.nrows..(j + 1) * self.nrows];
                for i in 0..self.nrows {
                    out_col[i] += col[i] * b;
                }
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for DMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i + j * self.nrows]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        let idx = self.idx(i, j);
        &mut self.data[idx]
    }
}

/// `y += a * x` over raw complex slices.
pub fn axpy(y: &mut [C64], a: C64, x: &[C64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn dot_conj(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations, ascending.
///
/// Quadratically convergent and dependency-free; used for positivity checks
/// of density operators and small Hamiltonian diagonalizations (n up to a few
/// hundred).
pub fn hermitian_eigenvalues(mat: &DMat) -> Vec<f64> {
    assert_eq!(mat.nrows, mat.ncols);
    let n = mat.nrows;
    let mut a = mat.clone();
    a.hermitize();

    let off = |a: &DMat| -> f64 {
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..j {
                s += a[(i, j)].norm_sqr();
            }
        }
        s.sqrt()
    };
    let scale = a.frobenius_norm().max(1e-300);

    for _sweep in 0..60 {
        if off(&a) <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.norm() <= 1e-300 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Phase that makes the pivot real, then a real Jacobi rotation.
                let phase = apq / apq.norm();
                let tau = (aqq - app) / (2.0 * apq.norm());
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Column rotation: [p q] <- [p q] * [[c, s*phase],[-s*conj(phase), c]]... applied as
                // G† A G with G[p][p]=c, G[p][q]=s*phase, G[q][p]=-s*conj(phase), G[q][q]=c.
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = c * aip - s * phase.conj() * aiq;
                    a[(i, q)] = s * phase * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = c * apj - s * phase * aqj;
                    a[(q, j)] = s * phase.conj() * apj + c * aqj;
                }
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    eig.sort_by(|x, y| x.total_cmp(y));
    eig
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn jacobi_diagonal_matrix() {
        let mut m = DMat::zeros(3, 3);
        m[(0, 0)] = C64::new(3.0, 0.0);
        m[(1, 1)] = C64::new(-1.0, 0.0);
        m[(2, 2)] = C64::new(0.5, 0.0);
        let e = hermitian_eigenvalues(&m);
        assert_relative_eq!(e[0], -1.0, max_relative = 1e-12);
        assert_relative_eq!(e[1], 0.5, max_relative = 1e-12);
        assert_relative_eq!(e[2], 3.0, max_relative = 1e-12);
    }

    #[test]
    fn jacobi_pauli_like() {
        // [[0, 1-i], [1+i, 0]] has eigenvalues +-sqrt(2).
        let mut m = DMat::zeros(2, 2);
        m[(0, 1)] = C64::new(1.0, -1.0);
        m[(1, 0)] = C64::new(1.0, 1.0);
        let e = hermitian_eigenvalues(&m);
        assert_relative_eq!(e[0], -std::f64::consts::SQRT_2, max_relative = 1e-12);
        assert_relative_eq!(e[1], std::f64::consts::SQRT_2, max_relative = 1e-12);
    }

    #[test]
    fn jacobi_random_hermitian_trace_preserved() {
        // Deterministic pseudo-random Hermitian matrix.
        let n = 24;
        let mut m = DMat::zeros(n, n);
        let mut seed = 0x12345u64;
        let mut rng = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for j in 0..n {
            for i in 0..=j {
                let z = C64::new(rng(), if i == j { 0.0 } else { rng() });
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        let e = hermitian_eigenvalues(&m);
        let tr: f64 = (0..n).map(|i| m[(i, i)].re).sum();
        assert_relative_eq!(e.iter().sum::<f64>(), tr, max_relative = 1e-10);
    }

    #[test]
    fn matmul_identity() {
        let mut a = DMat::zeros(2, 3);
        a[(0, 0)] = C64::new(1.0, 2.0);
        a[(1, 2)] = C64::new(-3.0, 0.5);
        let id = DMat::identity(2);
        assert_eq!(id.matmul(&a), a);
    }
}
