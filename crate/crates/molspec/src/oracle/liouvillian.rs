//! Lindblad generator acting on density operators, with a matrix-free apply
//! and an optional materialized superoperator.
//!
//! Vectorization is column-stacking throughout: `vec(rho)[i + d*j] = rho_ij`,
//! so `vec(A rho B) = (B^T kron A) vec(rho)` and the superoperator reads
//! `L = -i [(I kron H) - (H^T kron I)]
//!      + sum_O g_O [2 (conj(O) kron O) - I kron O†O - (O†O)^T kron I]`.

use num_complex::Complex64 as C64;

use crate::linalg::DMat;
use crate::sparse::SpMat;

/// A superoperator of the form
/// `X -> field .* X + L_off X + X R_off + sum_c 2 g_c O_c X O_c†`,
/// where `field[i + d j] = Ldiag_i + Rdiag_j` carries every diagonal
/// contribution. This covers the full Lindblad generator and the conditioned
/// (sector-restricted) generators used for correlation functions.
pub struct Generator {
    pub dim: usize,
    field: Vec<C64>,
    left_off: SpMat,
    right_off: SpMat,
    recycles: Vec<(f64, SpMat, SpMat)>,
}

impl Generator {
    /// Build from one-sided multipliers: `X -> L X + X R + sum 2 g O X O†`.
    pub fn from_sides(left: &SpMat, right: &SpMat, recycles: Vec<(f64, SpMat)>) -> Self {
        let dim = left.nrows;
        assert_eq!(left.ncols, dim);
        assert_eq!(right.nrows, dim);
        assert_eq!(right.ncols, dim);
        let (ldiag, left_off) = left.split_diagonal();
        let (rdiag, right_off) = right.split_diagonal();
        let mut field = vec![C64::new(0.0, 0.0); dim * dim];
        for j in 0..dim {
            for i in 0..dim {
                field[i + j * dim] = ldiag[i] + rdiag[j];
            }
        }
        let recycles = recycles
            .into_iter()
            .filter(|(g, op)| *g != 0.0 && op.nnz() > 0)
            .map(|(g, op)| {
                let adj = op.adjoint();
                (g, op, adj)
            })
            .collect();
        Self {
            dim,
            field,
            left_off,
            right_off,
            recycles,
        }
    }

    /// The full Lindblad generator for Hamiltonian `h` and collapse operators
    /// at their rates: `drho/dt = -i[h, rho] + sum g (2 O rho O† - {O†O, rho})`.
    pub fn lindblad(h: &SpMat, collapses: &[(f64, SpMat)]) -> Self {
        let minus_i = C64::new(0.0, -1.0);
        let plus_i = C64::new(0.0, 1.0);
        let mut left = h.clone();
        left.scale(minus_i);
        let mut right = h.clone();
        right.scale(plus_i);
        let one = C64::new(1.0, 0.0);
        for (g, op) in collapses {
            let mut anticomm = op.adjoint().matmul(op);
            anticomm.scale(C64::new(-*g, 0.0));
            left = left.add_scaled(one, &anticomm);
            right = right.add_scaled(one, &anticomm);
        }
        let recycles = collapses.to_vec();
        Self::from_sides(&left, &right, recycles)
    }

    /// `out = generator(x)`; `scratch` must match the state shape.
    pub fn apply(&self, x: &DMat, out: &mut DMat, scratch: &mut DMat) {
        debug_assert_eq!(x.nrows, self.dim);
        debug_assert_eq!(x.ncols, self.dim);
        for (o, (f, xi)) in out.data.iter_mut().zip(self.field.iter().zip(&x.data)) {
            *o = f * xi;
        }
        let one = C64::new(1.0, 0.0);
        if self.left_off.nnz() > 0 {
            self.left_off.mul_dense_left(one, x, out);
        }
        if self.right_off.nnz() > 0 {
            self.right_off.mul_dense_right(one, x, out);
        }
        for (g, op, adj) in &self.recycles {
            scratch.fill_zero();
            op.mul_dense_left(one, x, scratch);
            adj.mul_dense_right(C64::new(2.0 * g, 0.0), scratch, out);
        }
    }

    /// Diagonal of the superoperator in the column-stacking convention
    /// (the off-diagonal one-sided parts contribute nothing to it).
    pub fn field_diagonal(&self) -> &[C64] {
        &self.field
    }

    /// Estimate of the spectral bound `max |eigenvalue|` by power iteration
    /// on a deterministic pseudo-random start.
    pub fn spectral_bound_estimate(&self) -> f64 {
        let d = self.dim;
        let mut x = DMat::zeros(d, d);
        let mut seed = 0x9e3779b97f4a7c15u64;
        for z in &mut x.data {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let a = ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let b = ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            *z = C64::new(a, b);
        }
        let mut out = DMat::zeros(d, d);
        let mut scratch = DMat::zeros(d, d);
        let mut bound: f64 = 0.0;
        for _ in 0..12 {
            let nx = x.frobenius_norm();
            if nx == 0.0 {
                break;
            }
            x.scale(C64::new(1.0 / nx, 0.0));
            out.fill_zero();
            self.apply(&x, &mut out, &mut scratch);
            bound = out.frobenius_norm();
            std::mem::swap(&mut x, &mut out);
        }
        // Power iteration approaches the dominant magnitude from below.
        bound * 1.1
    }
}

/// The Lindblad generator together with its ingredients and bookkeeping.
pub struct Liouvillian {
    pub dim: usize,
    pub hamiltonian: SpMat,
    pub collapse_registry: Vec<(String, f64)>,
    pub generator: Generator,
    collapses: Vec<(f64, SpMat)>,
}

impl Liouvillian {
    pub fn new(h: SpMat, collapses: Vec<(String, f64, SpMat)>) -> crate::error::Result<Self> {
        let dim = h.nrows;
        if h.ncols != dim {
            return Err(crate::error::Error::Layout(
                "Hamiltonian must be square".into(),
            ));
        }
        for (label, _, op) in &collapses {
            if op.nrows != dim || op.ncols != dim {
                return Err(crate::error::Error::Layout(format!(
                    "collapse operator {label} has shape {}x{}, expected {dim}x{dim}",
                    op.nrows, op.ncols
                )));
            }
        }
        let registry: Vec<(String, f64)> = collapses
            .iter()
            .map(|(label, g, _)| (label.clone(), *g))
            .collect();
        let pairs: Vec<(f64, SpMat)> = collapses.into_iter().map(|(_, g, op)| (g, op)).collect();
        let generator = Generator::lindblad(&h, &pairs);
        Ok(Self {
            dim,
            hamiltonian: h,
            collapse_registry: registry,
            generator,
            collapses: pairs,
        })
    }

    pub fn apply(&self, x: &DMat, out: &mut DMat, scratch: &mut DMat) {
        self.generator.apply(x, out, scratch);
    }

    pub fn apply_alloc(&self, x: &DMat) -> DMat {
        let mut out = DMat::zeros(self.dim, self.dim);
        let mut scratch = DMat::zeros(self.dim, self.dim);
        self.apply(x, &mut out, &mut scratch);
        out
    }

    /// Materialize the `d^2 x d^2` superoperator in the column-stacking
    /// convention. Intended for small systems (direct solves, structural
    /// tests); the matrix-free apply serves everything else.
    pub fn superoperator(&self) -> SpMat {
        let d = self.dim;
        let id = SpMat::identity(d);
        let minus_i = C64::new(0.0, -1.0);
        let plus_i = C64::new(0.0, 1.0);
        let one = C64::new(1.0, 0.0);

        let mut ham_part = id.kron(&self.hamiltonian);
        ham_part.scale(minus_i);
        let mut ham_t = self.hamiltonian.transpose().kron(&id);
        ham_t.scale(plus_i);
        let mut l = ham_part.add_scaled(one, &ham_t);

        for (g, op) in &self.collapses {
            let mut recycle = op.conj().kron(op);
            recycle.scale(C64::new(2.0 * g, 0.0));
            l = l.add_scaled(one, &recycle);
            let dag_op = op.adjoint().matmul(op);
            let mut left = id.kron(&dag_op);
            left.scale(C64::new(-*g, 0.0));
            l = l.add_scaled(one, &left);
            let mut right = dag_op.transpose().kron(&id);
            right.scale(C64::new(-*g, 0.0));
            l = l.add_scaled(one, &right);
        }
        l
    }

    /// Maximum absolute column sum of the trace functional applied to the
    /// superoperator: zero for a trace-preserving generator.
    pub fn trace_preservation_defect(&self) -> f64 {
        let l = self.superoperator();
        let d = self.dim;
        let mut acc = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            let row = i + i * d;
            for k in l.indptr[row]..l.indptr[row + 1] {
                acc[l.indices[k] as usize] += l.data[k];
            }
        }
        acc.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn spectral_bound_estimate(&self) -> f64 {
        self.generator.spectral_bound_estimate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::hilbert::{fock_annihilation, lowering_qubit};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Dense reference for the Lindblad action.
    fn dense_lindblad(h: &SpMat, collapses: &[(f64, SpMat)], x: &DMat) -> DMat {
        let hd = h.to_dense();
        let mut out = DMat::zeros(x.nrows, x.ncols);
        let hx = hd.matmul(x);
        let xh = x.matmul(&hd);
        for i in 0..out.data.len() {
            out.data[i] = c(0.0, -1.0) * (hx.data[i] - xh.data[i]);
        }
        for (g, op) in collapses {
            let od = op.to_dense();
            let odag = od.adjoint();
            let oxo = od.matmul(x).matmul(&odag);
            let pop = odag.matmul(&od);
            let px = pop.matmul(x);
            let xp = x.matmul(&pop);
            for i in 0..out.data.len() {
                out.data[i] += *g * (2.0 * oxo.data[i] - px.data[i] - xp.data[i]);
            }
        }
        out
    }

    #[test]
    fn matrix_free_apply_matches_dense_reference() {
        let sigma = lowering_qubit();
        let b = fock_annihilation(3);
        let h_small = SpMat::from_triplets(
            2,
            2,
            vec![(1, 1, c(2.0, 0.0)), (0, 1, c(0.3, 0.1)), (1, 0, c(0.3, -0.1))],
        );
        let h = h_small.kron(&SpMat::identity(3));
        let sigma_full = sigma.kron(&SpMat::identity(3));
        let b_full = SpMat::identity(2).kron(&b);
        let collapses = vec![(0.5, sigma_full.clone()), (1.3, b_full.clone())];
        let liouv = Liouvillian::new(
            h.clone(),
            vec![
                ("sigma".into(), 0.5, sigma_full),
                ("b".into(), 1.3, b_full),
            ],
        )
        .unwrap();

        let d = 6;
        let mut x = DMat::zeros(d, d);
        for j in 0..d {
            for i in 0..d {
                x[(i, j)] = c((i * 7 % 5) as f64 - 1.5, (j * 3 % 4) as f64 * 0.5 - 0.7);
            }
        }
        let fast = liouv.apply_alloc(&x);
        let slow = dense_lindblad(&h, &collapses, &x);
        for (a, b) in fast.data.iter().zip(&slow.data) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn superoperator_matches_matrix_free() {
        let sigma = lowering_qubit();
        let h = SpMat::from_triplets(2, 2, vec![(1, 1, c(1.7, 0.0)), (0, 1, c(0.2, 0.0)), (1, 0, c(0.2, 0.0))]);
        let liouv =
            Liouvillian::new(h, vec![("sigma".into(), 0.8, sigma)]).unwrap();
        let l = liouv.superoperator();
        let mut x = DMat::zeros(2, 2);
        x[(0, 0)] = c(0.25, 0.0);
        x[(1, 1)] = c(0.75, 0.0);
        x[(0, 1)] = c(0.1, -0.2);
        x[(1, 0)] = c(0.1, 0.2);
        let fast = liouv.apply_alloc(&x);
        let mut vec_out = vec![c(0.0, 0.0); 4];
        l.spmv(&x.data, &mut vec_out);
        for (a, b) in fast.data.iter().zip(&vec_out) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn trace_preservation() {
        let sigma = lowering_qubit();
        let h = SpMat::from_triplets(2, 2, vec![(1, 1, c(3.0, 0.0)), (0, 1, c(0.0, 0.4)), (1, 0, c(0.0, -0.4))]);
        let liouv = Liouvillian::new(h, vec![("sigma".into(), 1.0, sigma)]).unwrap();
        assert!(liouv.trace_preservation_defect() < 1e-12);
    }

    #[test]
    fn rejects_shape_mismatch() {
        let h = SpMat::identity(2);
        let bad = SpMat::identity(3);
        assert!(Liouvillian::new(h, vec![("bad".into(), 1.0, bad)]).is_err());
    }

    #[test]
    fn spectral_bound_dominates_rayleigh_samples() {
        let sigma = lowering_qubit();
        let h = SpMat::from_triplets(2, 2, vec![(1, 1, c(5.0, 0.0))]);
        let liouv = Liouvillian::new(h, vec![("sigma".into(), 0.7, sigma)]).unwrap();
        let bound = liouv.spectral_bound_estimate();
        // Largest generator eigenvalue magnitude here is |i*5 + ...| ~ 5.2.
        assert!(bound >= 5.0 && bound < 12.0, "bound {bound}");
    }
}
