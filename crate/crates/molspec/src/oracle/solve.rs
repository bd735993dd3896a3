//! Density operators, time integration, steady states and two-time
//! correlations for the Lindblad reference solver.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, DMat};
use crate::oracle::liouvillian::{Generator, Liouvillian};
use crate::series::TruncationReport;
use crate::sparse::SpMat;
use crate::spectra::{SpectrumResult, SpectrumValues};

/// A (numerically) Hermitian, unit-trace, positive operator.
#[derive(Debug, Clone)]
pub struct DensityOp {
    pub dim: usize,
    pub mat: DMat,
}

impl DensityOp {
    /// Pure state `|index><index|`.
    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut mat = DMat::zeros(dim, dim);
        mat[(index, index)] = C64::new(1.0, 0.0);
        Self { dim, mat }
    }

    /// Statistical mixture of basis states with the given weights.
    pub fn mixture(dim: usize, weights: &[(usize, f64)]) -> Self {
        let mut mat = DMat::zeros(dim, dim);
        for &(index, w) in weights {
            mat[(index, index)] = C64::new(w, 0.0);
        }
        Self { dim, mat }
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// `Tr[op rho]` for a sparse observable.
    pub fn expectation(&self, op: &SpMat) -> C64 {
        trace_of_product(op, &self.mat)
    }

    /// Hermiticity defect, trace defect, and most negative eigenvalue.
    pub fn invariant_defects(&self) -> (f64, f64, f64) {
        let mut herm: f64 = 0.0;
        for j in 0..self.dim {
            for i in 0..=j {
                herm = herm.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        let trace_defect = (self.trace() - C64::new(1.0, 0.0)).norm();
        let min_eig = hermitian_eigenvalues(&self.mat)[0];
        (herm, trace_defect, min_eig)
    }

    /// Enforce the type invariants within the stated numerical slack.
    pub fn check_invariants(&self) -> Result<()> {
        let (herm, trace_defect, min_eig) = self.invariant_defects();
        if herm > 1e-12 {
            return Err(Error::Solve(format!("density operator not Hermitian: defect {herm:e}")));
        }
        if trace_defect > 1e-10 {
            return Err(Error::Solve(format!("density operator trace defect {trace_defect:e}")));
        }
        if min_eig < -1e-8 {
            return Err(Error::Solve(format!("density operator indefinite: min eigenvalue {min_eig:e}")));
        }
        Ok(())
    }
}

/// `Tr[A X]` with sparse `A`.
pub fn trace_of_product(a: &SpMat, x: &DMat) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows {
        for k in a.indptr[i]..a.indptr[i + 1] {
            acc += a.data[k] * x[(a.indices[k] as usize, i)];
        }
    }
    acc
}

// Dormand-Prince 5(4) coefficients.
const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-12,
            max_steps: 2_000_000,
        }
    }
}

/// Adaptive Dormand-Prince propagator for a fixed generator, reusing its
/// stage storage across calls.
pub struct Propagator<'a> {
    gen: &'a Generator,
    k: Vec<DMat>,
    ytmp: DMat,
    scratch: DMat,
    /// Step cap from the spectral bound: explicit stages are only stable for
    /// |eigenvalue| * dt below the method's imaginary-axis limit.
    pub dt_cap: f64,
    pub opts: IntegratorOptions,
    fsal_valid: bool,
}

impl<'a> Propagator<'a> {
    pub fn new(gen: &'a Generator, opts: IntegratorOptions) -> Self {
        let d = gen.dim;
        let bound = gen.spectral_bound_estimate().max(1e-12);
        Self {
            gen,
            k: (0..7).map(|_| DMat::zeros(d, d)).collect(),
            ytmp: DMat::zeros(d, d),
            scratch: DMat::zeros(d, d),
            dt_cap: 2.8 / bound,
            opts,
            fsal_valid: false,
        }
    }

    /// Invalidate the first-same-as-last cache (after the state was changed
    /// externally).
    pub fn reset(&mut self) {
        self.fsal_valid = false;
    }

    /// Advance `state` from `t0` to `t1` in place.
    pub fn advance(&mut self, state: &mut DMat, t0: f64, t1: f64) -> Result<()> {
        if t1 <= t0 {
            return Ok(());
        }
        let mut t = t0;
        let mut dt = self.dt_cap.min(t1 - t0);
        let dt_floor = (t1 - t0) * 1e-13;
        let mut steps = 0usize;

        if !self.fsal_valid {
            self.k[0].fill_zero();
            let (k0, scratch) = (&mut self.k[0], &mut self.scratch);
            self.gen.apply(state, k0, scratch);
        }

        while t < t1 {
            if steps >= self.opts.max_steps {
                return Err(Error::Stiffness {
                    t,
                    message: format!("step budget {} exhausted", self.opts.max_steps),
                });
            }
            steps += 1;
            dt = dt.min(t1 - t);

            for stage in 1..7 {
                self.ytmp.data.copy_from_slice(&state.data);
                for (j, kj) in self.k.iter().take(stage).enumerate() {
                    let a = DP_A[stage - 1][j];
                    if a != 0.0 {
                        crate::linalg::axpy(&mut self.ytmp.data, C64::new(dt * a, 0.0), &kj.data);
                    }
                }
                let _ = DP_C; // stage times unused: the generator is autonomous
                self.k[stage].fill_zero();
                let (ks, scratch) = (&mut self.k[stage], &mut self.scratch);
                self.gen.apply(&self.ytmp, ks, scratch);
            }

            // 5th-order solution is the last stage evaluation point (FSAL).
            // Error = y5 - y4 = dt * sum (a7 - b4)_j k_j.
            let mut err2 = 0.0;
            let mut ynorm2 = 0.0;
            for idx in 0..state.data.len() {
                let mut e = C64::new(0.0, 0.0);
                for j in 0..6 {
                    let w = DP_A[5][j] - DP_B4[j];
                    if w != 0.0 {
                        e += self.k[j].data[idx] * w;
                    }
                }
                e -= self.k[6].data[idx] * DP_B4[6];
                err2 += (e * dt).norm_sqr();
                ynorm2 += state.data[idx].norm_sqr();
            }
            let scale = self.opts.atol + self.opts.rtol * ynorm2.sqrt();
            let err_norm = err2.sqrt() / scale;

            if err_norm <= 1.0 {
                // Accept: y5 = ytmp of stage 7 pivot = state + dt sum a7 k.
                for idx in 0..state.data.len() {
                    let mut acc = C64::new(0.0, 0.0);
                    for j in 0..6 {
                        let w = DP_A[5][j];
                        if w != 0.0 {
                            acc += self.k[j].data[idx] * w;
                        }
                    }
                    state.data[idx] += acc * dt;
                }
                t += dt;
                self.k.swap(0, 6); // FSAL
                self.fsal_valid = true;
            }

            let factor = if err_norm > 0.0 {
                (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
            } else {
                5.0
            };
            dt = (dt * factor).min(self.dt_cap);
            if dt < dt_floor {
                return Err(Error::Stiffness {
                    t,
                    message: format!(
                        "step size collapsed to {dt:e}; shorten the horizon or rescale rates"
                    ),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteadyMethod {
    /// Direct sparse LU below the dimension limit, then iterative, then
    /// time marching.
    Auto,
    Direct,
    Iterative,
    March,
}

#[derive(Debug, Clone)]
pub struct SteadyOptions {
    pub method: SteadyMethod,
    pub init: Option<DMat>,
    /// Residual target for `||L rho|| / ||L||`.
    pub residual_target: f64,
    pub max_bicg_iters: usize,
    /// Krylov subspace size per GMRES cycle.
    pub gmres_restart: usize,
    /// March at least this long before trusting the residual: slow modes can
    /// carry large state error at a small generator residual.
    pub min_march_time: f64,
    /// Hard cap on the marched horizon, in inverse-rate units.
    pub max_march_time: f64,
    /// Largest superoperator dimension (`d^2`) for the direct path.
    pub direct_dim_limit: usize,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self {
            method: SteadyMethod::Auto,
            init: None,
            residual_target: 1e-9,
            max_bicg_iters: 1200,
            gmres_restart: 120,
            min_march_time: 0.0,
            max_march_time: 1e5,
            direct_dim_limit: 20_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SteadyReport {
    pub method: &'static str,
    /// `||L rho||_F / ||L||_est`.
    pub residual: f64,
    pub iterations: usize,
}

/// Solve `L rho = 0` with `Tr rho = 1`.
pub fn steady_state(liouv: &Liouvillian, opts: &SteadyOptions) -> Result<(DensityOp, SteadyReport)> {
    let d = liouv.dim;
    let d2 = d * d;
    let bound = liouv.spectral_bound_estimate().max(1e-300);

    let finish = |mat: DMat, method: &'static str, iterations: usize| -> Result<(DensityOp, SteadyReport)> {
        let mut mat = mat;
        mat.hermitize();
        let tr = mat.trace().re;
        if tr.abs() < 1e-300 {
            return Err(Error::Solve("steady solve produced a traceless operator".into()));
        }
        mat.scale(C64::new(1.0 / tr, 0.0));
        let residual = liouv.apply_alloc(&mat).frobenius_norm() / bound;
        let rho = DensityOp { dim: d, mat };
        Ok((rho, SteadyReport { method, residual, iterations }))
    };

    let try_direct = || -> Result<(DensityOp, SteadyReport)> {
        let mat = direct_solve(liouv)?;
        finish(mat, "direct-lu", 1)
    };
    let try_bicg = || -> Result<(DensityOp, SteadyReport)> {
        let (mat, iters) = gmres_traced(liouv, opts)
            .or_else(|_| bicgstab_traced(liouv, opts))?;
        finish(mat, "krylov", iters)
    };
    let try_march = || -> Result<(DensityOp, SteadyReport)> {
        let (mat, steps) = march_to_stationarity(liouv, opts, bound)?;
        finish(mat, "march", steps)
    };
    let check = |r: Result<(DensityOp, SteadyReport)>| -> Result<(DensityOp, SteadyReport)> {
        match r {
            Ok((rho, rep)) if rep.residual <= opts.residual_target * 10.0 => Ok((rho, rep)),
            Ok((_, rep)) => Err(Error::Solve(format!(
                "{} residual {:e} above target {:e}",
                rep.method, rep.residual, opts.residual_target
            ))),
            Err(e) => Err(e),
        }
    };

    let result = match opts.method {
        SteadyMethod::Direct => check(try_direct()),
        SteadyMethod::Iterative => check(try_bicg()),
        SteadyMethod::March => check(try_march()),
        SteadyMethod::Auto => {
            // Krylov solvers stagnate on the strongly non-normal traced
            // system for large vibronic spaces, so the automatic path goes
            // straight from the factorization to relaxation.
            if d2 <= opts.direct_dim_limit {
                check(try_direct()).or_else(|_| check(try_march()))
            } else {
                check(try_march())
            }
        }
    };

    // A consistent singular system lets iterative and marching solvers land
    // on one of many fixed points without complaint; for small systems the
    // uniqueness probe runs unconditionally.
    if d <= 48 {
        if let Some(gap) = degeneracy_probe(liouv, bound) {
            return Err(Error::Solve(format!(
                "steady state not unique: independent relaxations differ by {gap:e} \
                 (nullity estimate >= 2)"
            )));
        }
    }
    result
}

fn direct_solve(liouv: &Liouvillian) -> Result<DMat> {
    use faer::prelude::*;
    use faer::sparse::{SparseColMat, Triplet};

    let d = liouv.dim;
    let n = d * d;
    let trace_row = n - 1; // replaces the equation for the top Fock population
    let l = liouv.superoperator();
    let mut trip: Vec<Triplet<usize, usize, C64>> = Vec::with_capacity(l.nnz() + d);
    for i in 0..n {
        if i == trace_row {
            continue;
        }
        for k in l.indptr[i]..l.indptr[i + 1] {
            trip.push(Triplet::new(i, l.indices[k] as usize, l.data[k]));
        }
    }
    for i in 0..d {
        trip.push(Triplet::new(trace_row, i * (d + 1), C64::new(1.0, 0.0)));
    }
    let a = SparseColMat::<usize, C64>::try_new_from_triplets(n, n, &trip)
        .map_err(|e| Error::Solve(format!("assembling the traced system failed: {e:?}")))?;
    let lu = a
        .sp_lu()
        .map_err(|e| Error::Solve(format!("sparse LU failed (singular traced system?): {e:?}")))?;
    let mut rhs = faer::Mat::<C64>::zeros(n, 1);
    rhs[(trace_row, 0)] = C64::new(1.0, 0.0);
    let x = lu.solve(&rhs);
    let mut mat = DMat::zeros(d, d);
    for idx in 0..n {
        mat.data[idx] = x[(idx, 0)];
    }
    Ok(mat)
}

/// BiCGStab on the trace-replaced system with Jacobi preconditioning,
/// matrix-free. Returns the solution and the iteration count.
fn bicgstab_traced(liouv: &Liouvillian, opts: &SteadyOptions) -> Result<(DMat, usize)> {
    let d = liouv.dim;
    let n = d * d;
    let trace_row = n - 1;

    let mut precond: Vec<C64> = liouv.generator.field_diagonal().to_vec();
    precond[trace_row] = C64::new(1.0, 0.0);
    for p in &mut precond {
        let m = p.norm();
        *p = if m > 1e-12 {
            1.0 / *p
        } else {
            C64::new(1.0, 0.0)
        };
    }

    let mut scratch = DMat::zeros(d, d);
    let mut apply = |x: &DMat, out: &mut DMat| {
        out.fill_zero();
        liouv.apply(x, out, &mut scratch);
        let mut tr = C64::new(0.0, 0.0);
        for i in 0..d {
            tr += x.data[i * (d + 1)];
        }
        out.data[trace_row] = tr;
    };

    let mut b = DMat::zeros(d, d);
    b.data[trace_row] = C64::new(1.0, 0.0);
    let bnorm = 1.0f64;

    let mut x = opts.init.clone().unwrap_or_else(|| {
        let mut x0 = DMat::zeros(d, d);
        x0.data[0] = C64::new(1.0, 0.0); // vacuum projector
        x0
    });
    let mut r = DMat::zeros(d, d);
    apply(&x, &mut r);
    for (ri, bi) in r.data.iter_mut().zip(&b.data) {
        *ri = bi - *ri;
    }
    let mut rhat = r.clone();
    let mut rho = C64::new(1.0, 0.0);
    let mut alpha = C64::new(1.0, 0.0);
    let mut omega = C64::new(1.0, 0.0);
    let mut v = DMat::zeros(d, d);
    let mut p = DMat::zeros(d, d);
    let mut y = DMat::zeros(d, d);
    let mut z = DMat::zeros(d, d);
    let mut t = DMat::zeros(d, d);
    let mut s = DMat::zeros(d, d);

    // Lewis-group breakdown remedy: restart with a rotated shadow residual.
    let mut shadow_seed = 0x2545f4914f6cdd1du64;
    let mut restart = |rhat: &mut DMat, r: &DMat| {
        for (h, ri) in rhat.data.iter_mut().zip(&r.data) {
            shadow_seed = shadow_seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let a = ((shadow_seed >> 11) as f64 / (1u64 << 53) as f64) + 0.25;
            shadow_seed = shadow_seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let b = ((shadow_seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            *h = ri * C64::new(a, b);
        }
    };

    let tol = (opts.residual_target * 1e-1).max(1e-13);
    let mut restarts = 0usize;
    let mut iter = 0usize;
    while iter < opts.max_bicg_iters {
        iter += 1;
        let rho_new = crate::linalg::dot_conj(&rhat.data, &r.data);
        let rnorm = crate::linalg::norm2(&r.data);
        if rho_new.norm() < 1e-8 * rnorm * crate::linalg::norm2(&rhat.data) {
            if rnorm <= tol * bnorm {
                return Ok((x, iter));
            }
            if restarts >= 8 {
                return Err(Error::Solve(format!(
                    "BiCGStab stagnated after {restarts} restarts at residual {rnorm:e}"
                )));
            }
            restarts += 1;
            restart(&mut rhat, &r);
            rho = C64::new(1.0, 0.0);
            alpha = C64::new(1.0, 0.0);
            omega = C64::new(1.0, 0.0);
            p.fill_zero();
            v.fill_zero();
            continue;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p.data[i] = r.data[i] + beta * (p.data[i] - omega * v.data[i]);
        }
        for i in 0..n {
            y.data[i] = precond[i] * p.data[i];
        }
        apply(&y, &mut v);
        let denom = crate::linalg::dot_conj(&rhat.data, &v.data);
        if denom.norm() < 1e-14 * crate::linalg::norm2(&rhat.data) * crate::linalg::norm2(&v.data)
        {
            if restarts >= 8 {
                return Err(Error::Solve("BiCGStab breakdown (r_hat . v ~ 0)".into()));
            }
            restarts += 1;
            restart(&mut rhat, &r);
            rho = C64::new(1.0, 0.0);
            alpha = C64::new(1.0, 0.0);
            omega = C64::new(1.0, 0.0);
            p.fill_zero();
            v.fill_zero();
            continue;
        }
        alpha = rho / denom;
        for i in 0..n {
            s.data[i] = r.data[i] - alpha * v.data[i];
        }
        if crate::linalg::norm2(&s.data) <= tol * bnorm {
            for i in 0..n {
                x.data[i] += alpha * y.data[i];
            }
            return Ok((x, iter));
        }
        for i in 0..n {
            z.data[i] = precond[i] * s.data[i];
        }
        apply(&z, &mut t);
        let tt = crate::linalg::dot_conj(&t.data, &t.data);
        if tt.norm() < 1e-300 {
            return Err(Error::Solve("BiCGStab breakdown (t ~ 0)".into()));
        }
        omega = crate::linalg::dot_conj(&t.data, &s.data) / tt;
        for i in 0..n {
            x.data[i] += alpha * y.data[i] + omega * z.data[i];
            r.data[i] = s.data[i] - omega * t.data[i];
        }
        if crate::linalg::norm2(&r.data) <= tol * bnorm {
            return Ok((x, iter));
        }
    }
    Err(Error::Solve(format!(
        "BiCGStab did not reach {tol:e} within {} iterations",
        opts.max_bicg_iters
    )))
}

/// Restarted GMRES on the trace-replaced system with Jacobi preconditioning,
/// matrix-free. More robust than BiCGStab on strongly non-normal generators.
fn gmres_traced(liouv: &Liouvillian, opts: &SteadyOptions) -> Result<(DMat, usize)> {
    let d = liouv.dim;
    let n = d * d;
    let trace_row = n - 1;
    let m = opts.gmres_restart.min(n);

    let mut precond: Vec<C64> = liouv.generator.field_diagonal().to_vec();
    precond[trace_row] = C64::new(1.0, 0.0);
    for p in &mut precond {
        let mag = p.norm();
        *p = if mag > 1e-12 {
            1.0 / *p
        } else {
            C64::new(1.0, 0.0)
        };
    }

    let mut scratch = DMat::zeros(d, d);
    let mut tmp = DMat::zeros(d, d);
    // Right-preconditioned operator x -> A M^-1 x, so the residual tracked is
    // the true one.
    let mut apply = |x: &DMat, out: &mut DMat, tmp: &mut DMat| {
        for i in 0..n {
            tmp.data[i] = precond[i] * x.data[i];
        }
        out.fill_zero();
        liouv.apply(tmp, out, &mut scratch);
        let mut tr = C64::new(0.0, 0.0);
        for i in 0..d {
            tr += tmp.data[i * (d + 1)];
        }
        out.data[trace_row] = tr;
    };

    let mut x = opts.init.clone().unwrap_or_else(|| {
        let mut x0 = DMat::zeros(d, d);
        x0.data[0] = C64::new(1.0, 0.0);
        x0
    });
    // Work in the preconditioned variable u with x = M^-1 u.
    let mut u = DMat::zeros(d, d);
    for i in 0..n {
        u.data[i] = x.data[i] / precond[i];
    }

    let tol = (opts.residual_target * 1e-1).max(1e-13);
    let mut total_iters = 0usize;
    let max_cycles = opts.max_bicg_iters / m + 1;

    let mut basis: Vec<DMat> = Vec::with_capacity(m + 1);
    for _cycle in 0..max_cycles {
        // r = b - A M^-1 u
        let mut r = DMat::zeros(d, d);
        apply(&u, &mut r, &mut tmp);
        for i in 0..n {
            r.data[i] = -r.data[i];
        }
        r.data[trace_row] += C64::new(1.0, 0.0);
        let beta = crate::linalg::norm2(&r.data);
        if beta <= tol {
            break;
        }
        basis.clear();
        r.scale(C64::new(1.0 / beta, 0.0));
        basis.push(r);
        let mut h = vec![vec![C64::new(0.0, 0.0); m]; m + 1];
        let mut cs = vec![C64::new(0.0, 0.0); m];
        let mut sn = vec![C64::new(0.0, 0.0); m];
        let mut g = vec![C64::new(0.0, 0.0); m + 1];
        g[0] = C64::new(beta, 0.0);
        let mut k_used = 0usize;
        let mut converged = false;

        for k in 0..m {
            total_iters += 1;
            let mut w = DMat::zeros(d, d);
            apply(&basis[k], &mut w, &mut tmp);
            for (j, vj) in basis.iter().enumerate() {
                let hjk = crate::linalg::dot_conj(&vj.data, &w.data);
                h[j][k] = hjk;
                crate::linalg::axpy(&mut w.data, -hjk, &vj.data);
            }
            let hk1 = crate::linalg::norm2(&w.data);
            h[k + 1][k] = C64::new(hk1, 0.0);
            // Givens rotations to keep the least-squares triangular.
            for j in 0..k {
                let temp = cs[j].conj() * h[j][k] + sn[j].conj() * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = temp;
            }
            let denom = (h[k][k].norm_sqr() + h[k + 1][k].norm_sqr()).sqrt();
            if denom > 1e-300 {
                cs[k] = h[k][k] / denom;
                sn[k] = h[k + 1][k] / denom;
                h[k][k] = C64::new(denom, 0.0);
                h[k + 1][k] = C64::new(0.0, 0.0);
                let temp = cs[k].conj() * g[k];
                g[k + 1] = -sn[k] * g[k];
                g[k] = temp;
            }
            k_used = k + 1;
            let res = g[k + 1].norm();
            if res <= tol {
                converged = true;
                break;
            }
            if hk1 <= 1e-300 {
                converged = true;
                break;
            }
            w.scale(C64::new(1.0 / hk1, 0.0));
            basis.push(w);
        }

        // Back-substitute y and update u.
        let mut y = vec![C64::new(0.0, 0.0); k_used];
        for j in (0..k_used).rev() {
            let mut acc = g[j];
            for l in j + 1..k_used {
                acc -= h[j][l] * y[l];
            }
            y[j] = if h[j][j].norm() > 1e-300 {
                acc / h[j][j]
            } else {
                C64::new(0.0, 0.0)
            };
        }
        for (j, yj) in y.iter().enumerate() {
            crate::linalg::axpy(&mut u.data, *yj, &basis[j].data);
        }
        if converged {
            break;
        }
        if total_iters >= opts.max_bicg_iters {
            // Final residual check decides below.
            break;
        }
    }

    for i in 0..n {
        x.data[i] = precond[i] * u.data[i];
    }
    // True unpreconditioned residual of the traced system.
    let mut r = DMat::zeros(d, d);
    {
        let mut s2 = DMat::zeros(d, d);
        r.fill_zero();
        liouv.apply(&x, &mut r, &mut s2);
        let mut tr = C64::new(0.0, 0.0);
        for i in 0..d {
            tr += x.data[i * (d + 1)];
        }
        r.data[trace_row] = tr - C64::new(1.0, 0.0);
    }
    let res = crate::linalg::norm2(&r.data);
    if res <= tol * 10.0 {
        Ok((x, total_iters))
    } else {
        Err(Error::Solve(format!(
            "GMRES stalled at residual {res:e} after {total_iters} iterations"
        )))
    }
}

/// Relax toward stationarity by integrating the master equation with loose
/// tolerances, checking the residual after each chunk.
fn march_to_stationarity(
    liouv: &Liouvillian,
    opts: &SteadyOptions,
    bound: f64,
) -> Result<(DMat, usize)> {
    let d = liouv.dim;
    let mut state = opts.init.clone().unwrap_or_else(|| {
        let mut x0 = DMat::zeros(d, d);
        x0.data[0] = C64::new(1.0, 0.0);
        x0
    });
    let mut prop = Propagator::new(
        &liouv.generator,
        IntegratorOptions {
            rtol: 1e-6,
            atol: 1e-12,
            max_steps: 400_000,
        },
    );
    let chunk = 150.0 * prop.dt_cap;
    let mut t = 0.0;
    let mut chunks = 0usize;
    let mut last_res = f64::INFINITY;
    let mut stalls = 0usize;
    loop {
        prop.advance(&mut state, t, t + chunk)?;
        t += chunk;
        chunks += 1;
        let res = liouv.apply_alloc(&state).frobenius_norm() / bound;
        if res <= opts.residual_target && t >= opts.min_march_time {
            return Ok((state, chunks));
        }
        if res > last_res * 0.97 && t >= opts.min_march_time {
            stalls += 1;
            if stalls >= 4 {
                return Err(Error::Solve(format!(
                    "march stalled at residual {res:e} (target {:e})",
                    opts.residual_target
                )));
            }
        } else if res <= last_res * 0.97 {
            stalls = 0;
        }
        last_res = res;
        if t > opts.max_march_time {
            return Err(Error::Solve(format!(
                "march exceeded horizon {:e} at residual {res:e}",
                opts.max_march_time
            )));
        }
    }
}

/// Evolve two different initial states; a gap between them that stops
/// contracting signals a degenerate steady manifold.
fn degeneracy_probe(liouv: &Liouvillian, bound: f64) -> Option<f64> {
    let d = liouv.dim;
    let mut a = DMat::zeros(d, d);
    a.data[0] = C64::new(1.0, 0.0);
    let mut b = DMat::zeros(d, d);
    b.data[(d - 1) * (d + 1)] = C64::new(1.0, 0.0);
    let opts = IntegratorOptions {
        rtol: 1e-9,
        atol: 1e-13,
        max_steps: 400_000,
    };
    let mut prop_a = Propagator::new(&liouv.generator, opts);
    let mut prop_b = Propagator::new(&liouv.generator, opts);
    let gap_of = |a: &DMat, b: &DMat| -> f64 {
        a.data
            .iter()
            .zip(&b.data)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    let chunk = 500.0 / bound;
    let mut t = 0.0;
    let mut best = gap_of(&a, &b);
    let mut stalled = 0usize;
    for _ in 0..200 {
        prop_a.advance(&mut a, t, t + chunk).ok()?;
        prop_b.advance(&mut b, t, t + chunk).ok()?;
        t += chunk;
        let gap = gap_of(&a, &b);
        if gap < 1e-7 {
            return None; // unique attractor
        }
        // Non-normal generators can grow transients, and the integration
        // error floors the reachable gap; only a persistent stall at a
        // macroscopic gap counts as degeneracy.
        if gap < 0.995 * best {
            best = gap;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= 8 {
                return (gap > 1e-4).then_some(gap);
            }
        }
    }
    None
}

/// Integrate `drho/dt = L rho` and sample at the requested times
/// (non-decreasing, starting at or after zero).
pub fn evolve(
    liouv: &Liouvillian,
    rho0: &DensityOp,
    times: &[f64],
    opts: &IntegratorOptions,
) -> Result<Vec<DensityOp>> {
    if rho0.dim != liouv.dim {
        return Err(Error::Layout("initial state dimension mismatch".into()));
    }
    if times.windows(2).any(|w| w[0] > w[1]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::invalid("times", "must be non-negative and non-decreasing"));
    }
    let mut prop = Propagator::new(&liouv.generator, *opts);
    let mut state = rho0.mat.clone();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        prop.advance(&mut state, t, target)?;
        t = target;
        out.push(DensityOp {
            dim: liouv.dim,
            mat: state.clone(),
        });
    }
    if let Some(last) = out.last() {
        let drift = (last.trace() - C64::new(1.0, 0.0)).norm();
        if drift > 1e-8 {
            return Err(Error::Solve(format!(
                "trace drifted by {drift:e} over the evolution horizon"
            )));
        }
    }
    Ok(out)
}

/// Quantum regression: `<A(tau) B(0)> = Tr[A exp(L tau) (B rho)]` on a grid of
/// non-negative, increasing delays.
pub fn two_time_correlation(
    liouv: &Liouvillian,
    rho_ref: &DensityOp,
    a_op: &SpMat,
    b_op: &SpMat,
    taus: &[f64],
    opts: &IntegratorOptions,
) -> Result<Vec<C64>> {
    if taus.windows(2).any(|w| w[0] > w[1]) || taus.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::invalid("taus", "must be non-negative and non-decreasing"));
    }
    let d = liouv.dim;
    let mut x = DMat::zeros(d, d);
    b_op.mul_dense_left(C64::new(1.0, 0.0), &rho_ref.mat, &mut x);
    let mut prop = Propagator::new(&liouv.generator, *opts);
    let mut t = 0.0;
    let mut out = Vec::with_capacity(taus.len());
    for &tau in taus {
        prop.advance(&mut x, t, tau)?;
        t = tau;
        out.push(trace_of_product(a_op, &x));
    }
    Ok(out)
}

/// Trapezoidal one-sided transform `int_0^inf corr(tau) exp(i s omega tau)
/// dtau` for every grid frequency, with `s = +-1`.
pub fn one_sided_transform(
    taus: &[f64],
    corr: &[C64],
    omega_grid: &[f64],
    sign: f64,
) -> Result<Vec<C64>> {
    if taus.len() != corr.len() || taus.len() < 2 {
        return Err(Error::invalid("taus", "need at least two matching samples"));
    }
    if omega_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("omega_grid", "must be strictly increasing"));
    }
    let scale = corr.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let tail = corr.last().unwrap().norm();
    if scale > 0.0 && tail > 1e-6 * scale {
        return Err(Error::Windowing {
            residual: tail / scale,
            limit: 1e-6,
        });
    }
    Ok(omega_grid
        .iter()
        .map(|&omega| {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..taus.len() - 1 {
                let h = taus[i + 1] - taus[i];
                let f0 = corr[i] * (C64::i() * sign * omega * taus[i]).exp();
                let f1 = corr[i + 1] * (C64::i() * sign * omega * taus[i + 1]).exp();
                acc += 0.5 * h * (f0 + f1);
            }
            acc
        })
        .collect())
}

/// One-sided Fourier transform `S(omega) = 2 Re int_0^inf corr(tau)
/// exp(-i omega tau) dtau` by trapezoidal quadrature.
///
/// Requires the correlation to have decayed below `1e-6` of its peak by the
/// end of the window.
pub fn spectrum_from_correlation(
    taus: &[f64],
    corr: &[C64],
    omega_grid: &[f64],
) -> Result<SpectrumResult> {
    let transformed = one_sided_transform(taus, corr, omega_grid, -1.0)?;
    Ok(SpectrumResult {
        grid: omega_grid.to_vec(),
        values: SpectrumValues::Real(transformed.iter().map(|z| 2.0 * z.re).collect()),
        truncation: TruncationReport::exact(),
        warnings: Vec::new(),
    })
}
