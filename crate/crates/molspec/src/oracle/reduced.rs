//! Exact sector reductions of the Lindblad dynamics.
//!
//! Without a drive the generator never mixes certain operator blocks, so the
//! quantities needed for emission spectra and transfer dynamics can be
//! propagated on much smaller spaces. These are linear-algebra identities on
//! the generator, not physical approximations; equivalence against the
//! full-space solver is checked in the tests.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::DMat;
use crate::model::{FretSpec, MoleculeSpec};
use crate::oracle::hilbert::{fock_annihilation, fock_number};
use crate::oracle::liouvillian::Generator;
use crate::oracle::solve::{IntegratorOptions, Propagator};
use crate::sparse::SpMat;

/// Normalized coherent-state vector `|alpha>` on a truncated Fock space.
fn coherent_vector(dim: usize, alpha: f64) -> Vec<C64> {
    let mut v = Vec::with_capacity(dim);
    let mut amp = 1.0f64;
    for n in 0..dim {
        if n > 0 {
            amp *= alpha / (n as f64).sqrt();
        }
        v.push(C64::new(amp, 0.0));
    }
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= norm;
    }
    v
}

/// Projector onto the product of per-mode displaced vacua (the relaxed
/// vibrational state of the excited manifold, `b|alpha_k = lambda_k>`).
fn displaced_vacuum_projector(dims: &[usize], lambdas: &[f64]) -> DMat {
    let mut vector = vec![C64::new(1.0, 0.0)];
    for (&d, &lambda) in dims.iter().zip(lambdas) {
        let mode = coherent_vector(d, lambda);
        let mut next = Vec::with_capacity(vector.len() * d);
        for v in &vector {
            for m in &mode {
                next.push(v * m);
            }
        }
        vector = next;
    }
    let n = vector.len();
    let mut y = DMat::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            y[(i, j)] = vector[i] * vector[j].conj();
        }
    }
    y
}

/// Kron chain over a list of factor operators.
fn chain(ops: &[SpMat]) -> SpMat {
    let mut acc = SpMat::identity(1);
    for op in ops {
        acc = acc.kron(op);
    }
    acc
}

fn embed_mode(dims: &[usize], which: usize, op: &SpMat) -> SpMat {
    let ops: Vec<SpMat> = dims
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            if k == which {
                op.clone()
            } else {
                SpMat::identity(d)
            }
        })
        .collect();
    chain(&ops)
}

/// Dipole correlation `<sigma†(tau) sigma(0)>` of an undriven molecule
/// prepared with excited population `p0` and vibrations relaxed within the
/// excited-state geometry (the displaced vacuum). That preparation is the
/// fluorescent state whose lines sit on the red Stokes ladder; starting from
/// the bare vacuum instead would describe unrelaxed hot luminescence with
/// anti-Stokes-sided lines.
///
/// The regression operator `sigma rho(0)` lives in the ground-excited
/// coherence block, which closes under the generator; only the vibrational
/// factors need to be carried:
/// `dY/dtau = -i (H_g Y - Y H_e) - gamma Y + sum_k Gamma_k D[b_k] Y`,
/// with `corr = p0 Tr Y`.
pub fn transient_emission_correlation(
    mol: &MoleculeSpec,
    vib_dims: &[usize],
    p0: f64,
    taus: &[f64],
    opts: &IntegratorOptions,
) -> Result<Vec<C64>> {
    if vib_dims.len() != mol.modes.len() {
        return Err(Error::Layout(format!(
            "{} vibrational dimensions for {} modes",
            vib_dims.len(),
            mol.modes.len()
        )));
    }
    if taus.windows(2).any(|w| w[0] > w[1]) || taus.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::invalid("taus", "must be non-negative and non-decreasing"));
    }
    let dim: usize = vib_dims.iter().product();
    let one = C64::new(1.0, 0.0);

    // Vibrational Hamiltonians conditioned on the electronic state.
    let mut h_g = SpMat::zeros(dim, dim);
    let mut h_e = SpMat::from_triplets(
        dim,
        dim,
        (0..dim).map(|i| {
            (
                i,
                i,
                C64::new(mol.omega_e + mol.polaron_shift(), 0.0),
            )
        }),
    );
    let mut recycles = Vec::new();
    for (k, mode) in mol.modes.iter().enumerate() {
        let d = vib_dims[k];
        let mut number = embed_mode(vib_dims, k, &fock_number(d));
        number.scale(C64::new(mode.nu, 0.0));
        h_g = h_g.add_scaled(one, &number);
        h_e = h_e.add_scaled(one, &number);
        let b = embed_mode(vib_dims, k, &fock_annihilation(d));
        let mut displacement = b.add_scaled(one, &b.adjoint());
        displacement.scale(C64::new(-mode.lambda * mode.nu, 0.0));
        h_e = h_e.add_scaled(one, &displacement);
        recycles.push((mode.gamma_vib, b));
    }

    // left = -i H_g - gamma - sum Gamma b†b ; right = +i H_e - sum Gamma b†b.
    let mut left = h_g;
    left.scale(C64::new(0.0, -1.0));
    let mut right = h_e;
    right.scale(C64::new(0.0, 1.0));
    let gamma_id = SpMat::from_triplets(
        dim,
        dim,
        (0..dim).map(|i| (i, i, C64::new(mol.gamma_rad, 0.0))),
    );
    left = left.add_scaled(-one, &gamma_id);
    for (rate, b) in &recycles {
        let mut pop = b.adjoint().matmul(b);
        pop.scale(C64::new(-rate, 0.0));
        left = left.add_scaled(one, &pop);
        right = right.add_scaled(one, &pop);
    }
    let gen = Generator::from_sides(&left, &right, recycles);

    let lambdas: Vec<f64> = mol.modes.iter().map(|m| m.lambda).collect();
    let mut y = displaced_vacuum_projector(vib_dims, &lambdas);
    let mut prop = Propagator::new(&gen, *opts);
    let mut t = 0.0;
    let mut out = Vec::with_capacity(taus.len());
    for &tau in taus {
        prop.advance(&mut y, t, tau)?;
        t = tau;
        out.push(p0 * y.trace());
    }
    Ok(out)
}

/// Per-mode factorized conditional correlations.
///
/// The coherence-block generator is a sum of commuting single-mode pieces
/// plus a scalar, so a product initial state stays a product and the trace
/// factorizes: `corr(tau) = prefactor(tau) prod_k Tr Y_k(tau)` with each
/// `Y_k` a Fock-space matrix obeying
/// `dY/dtau = -i (nu b†b Y - Y (nu b†b - lambda nu (b + b†))) + Gamma D[b] Y`.
/// This makes deep truncations cheap; equivalence with the unfactorized block
/// is covered by tests.
///
/// The two directions differ in their initial vibrational state: emission
/// starts from the relaxed (displaced) vacuum of the excited manifold,
/// absorption from the bare ground-state vacuum.
pub struct ConditionalCorrelations {
    /// `Tr[sigma† exp(L tau) (sigma rho_0)] / p0`: emission direction.
    pub emission: Vec<C64>,
    /// `Tr[sigma exp(L tau) (sigma† rho_vac)]`: absorption response.
    pub absorption: Vec<C64>,
    pub taus: Vec<f64>,
}

pub fn factorized_conditional_correlations(
    mol: &MoleculeSpec,
    vib_dims: &[usize],
    taus: &[f64],
    opts: &IntegratorOptions,
) -> Result<ConditionalCorrelations> {
    if vib_dims.len() != mol.modes.len() {
        return Err(Error::Layout(format!(
            "{} vibrational dimensions for {} modes",
            vib_dims.len(),
            mol.modes.len()
        )));
    }
    if taus.windows(2).any(|w| w[0] > w[1]) || taus.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::invalid("taus", "must be non-negative and non-decreasing"));
    }
    let one = C64::new(1.0, 0.0);
    let mut per_mode: Vec<Vec<(C64, C64)>> = Vec::with_capacity(mol.modes.len());
    for (k, mode) in mol.modes.iter().enumerate() {
        let d = vib_dims[k];
        let number = fock_number(d);
        let b = fock_annihilation(d);
        let mut h_g = number.clone();
        h_g.scale(C64::new(mode.nu, 0.0));
        let mut h_e = number;
        h_e.scale(C64::new(mode.nu, 0.0));
        let mut displacement = b.add_scaled(one, &b.adjoint());
        displacement.scale(C64::new(-mode.lambda * mode.nu, 0.0));
        h_e = h_e.add_scaled(one, &displacement);

        let mut left = h_g;
        left.scale(C64::new(0.0, -1.0));
        let mut right = h_e;
        right.scale(C64::new(0.0, 1.0));
        let mut pop = b.adjoint().matmul(&b);
        pop.scale(C64::new(-mode.gamma_vib, 0.0));
        left = left.add_scaled(one, &pop);
        right = right.add_scaled(one, &pop);
        let gen = Generator::from_sides(&left, &right, vec![(mode.gamma_vib, b)]);

        let mut prop = Propagator::new(&gen, *opts);
        let mut y_disp = displaced_vacuum_projector(&[d], &[mode.lambda]);
        let mut y_bare = DMat::zeros(d, d);
        y_bare[(0, 0)] = one;
        let mut prop_bare = Propagator::new(&gen, *opts);
        let mut t = 0.0;
        let mut traces = Vec::with_capacity(taus.len());
        for &tau in taus {
            prop.advance(&mut y_disp, t, tau)?;
            prop_bare.advance(&mut y_bare, t, tau)?;
            t = tau;
            traces.push((y_disp.trace(), y_bare.trace()));
        }
        per_mode.push(traces);
    }

    let shifted = mol.polaron_shifted_transition();
    let mut emission = Vec::with_capacity(taus.len());
    let mut absorption = Vec::with_capacity(taus.len());
    for (i, &tau) in taus.iter().enumerate() {
        let mut disp = C64::new(1.0, 0.0);
        let mut bare = C64::new(1.0, 0.0);
        for traces in &per_mode {
            disp *= traces[i].0;
            bare *= traces[i].1;
        }
        let envelope = (C64::new(-mol.gamma_rad, shifted) * tau).exp();
        emission.push(disp * envelope);
        // The absorption flow is the conjugate block evolution from the bare
        // ground vacuum.
        absorption.push((bare * envelope).conj());
    }
    Ok(ConditionalCorrelations {
        emission,
        absorption,
        taus: taus.to_vec(),
    })
}

/// Weak-drive absorption population from the linear-response correlation:
/// the exact population equation gives
/// `P_ss = (eta / gamma) Re <sigma>_ss` with
/// `<sigma>_ss = eta int_0^inf e^{i omega_l tau} Tr[sigma e^{L tau}(sigma† rho_vac)] dtau + O(eta^3)`.
pub fn absorption_from_response(
    mol: &MoleculeSpec,
    vib_dims: &[usize],
    eta: f64,
    omega_grid: &[f64],
    taus: &[f64],
    opts: &IntegratorOptions,
) -> Result<Vec<f64>> {
    let corr = factorized_conditional_correlations(mol, vib_dims, taus, opts)?;
    let chi = crate::oracle::solve::one_sided_transform(taus, &corr.absorption, omega_grid, 1.0)?;
    Ok(chi
        .iter()
        .map(|z| eta * eta / mol.gamma_rad * z.re)
        .collect())
}

/// Cavity transmission from linear response: one correlation propagation of
/// the undriven system serves every probe frequency,
/// `t_c(omega_l) = kappa int_0^inf e^{i omega_l tau} Tr[a e^{L tau}(a† rho_vac)] dtau`.
pub fn transmission_from_response(
    mol: &MoleculeSpec,
    cav: &crate::model::CavitySpec,
    layout: &crate::oracle::hilbert::HilbertLayout,
    omega_grid: &[f64],
    taus: &[f64],
    opts: &IntegratorOptions,
) -> Result<Vec<C64>> {
    let liouv = crate::oracle::build_system(
        std::slice::from_ref(mol),
        Some(cav),
        None,
        None,
        &crate::model::ThermalBath::zero(),
        layout,
    )?;
    let a = layout.photon_annihilation()?;
    let rho0 = crate::oracle::solve::DensityOp::basis_state(liouv.dim, 0);
    let corr = crate::oracle::solve::two_time_correlation(
        &liouv,
        &rho0,
        &a,
        &a.adjoint(),
        taus,
        opts,
    )?;
    let chi = crate::oracle::solve::one_sided_transform(taus, &corr, omega_grid, 1.0)?;
    Ok(chi.iter().map(|z| cav.kappa * z).collect())
}

/// Donor/acceptor populations of an undriven transfer pair from the
/// single-excitation sector.
///
/// With at most one electronic excitation and no drive, the excited-sector
/// block `{|D>, |A>} (x) vibrations` evolves closed (it leaks to the ground
/// sector but receives nothing back), and both populations are read from it.
pub struct SectorTrace {
    pub times: Vec<f64>,
    pub p_donor: Vec<f64>,
    pub p_acceptor: Vec<f64>,
}

pub fn fret_sector_trace(
    spec: &FretSpec,
    vib_dim_donor: usize,
    vib_dim_acceptor: usize,
    p_d0: f64,
    times: &[f64],
    opts: &IntegratorOptions,
) -> Result<SectorTrace> {
    let d_mode = match spec.donor.modes.as_slice() {
        [m] => *m,
        _ => {
            return Err(Error::UnsupportedConfiguration(
                "sector trace expects one mode per molecule".into(),
            ))
        }
    };
    let a_mode = match spec.acceptor.modes.as_slice() {
        [m] => *m,
        _ => {
            return Err(Error::UnsupportedConfiguration(
                "sector trace expects one mode per molecule".into(),
            ))
        }
    };
    if times.windows(2).any(|w| w[0] > w[1]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::invalid("times", "must be non-negative and non-decreasing"));
    }

    // Factors: electronic {|D> = 0, |A> = 1} (slow), donor vibration,
    // acceptor vibration (fast). Energies measured from the acceptor
    // transition.
    let dims = [2usize, vib_dim_donor, vib_dim_acceptor];
    let dim: usize = dims.iter().product();
    let one = C64::new(1.0, 0.0);
    let elec = |m: SpMat| -> SpMat { chain(&[m, SpMat::identity(dims[1]), SpMat::identity(dims[2])]) };
    let proj_d = elec(SpMat::from_triplets(2, 2, vec![(0, 0, one)]));
    let proj_a = elec(SpMat::from_triplets(2, 2, vec![(1, 1, one)]));
    let exch = elec(SpMat::from_triplets(2, 2, vec![(0, 1, one), (1, 0, one)]));
    let b_d = chain(&[
        SpMat::identity(2),
        fock_annihilation(dims[1]),
        SpMat::identity(dims[2]),
    ]);
    let b_a = chain(&[
        SpMat::identity(2),
        SpMat::identity(dims[1]),
        fock_annihilation(dims[2]),
    ]);
    let n_d = chain(&[
        SpMat::identity(2),
        fock_number(dims[1]),
        SpMat::identity(dims[2]),
    ]);
    let n_a = chain(&[
        SpMat::identity(2),
        SpMat::identity(dims[1]),
        fock_number(dims[2]),
    ]);

    let mut h = SpMat::zeros(dim, dim);
    let mut term = proj_d.clone();
    term.scale(C64::new(spec.delta + d_mode.huang_rhys() * d_mode.nu, 0.0));
    h = h.add_scaled(one, &term);
    let mut term = proj_a.clone();
    term.scale(C64::new(a_mode.huang_rhys() * a_mode.nu, 0.0));
    h = h.add_scaled(one, &term);
    let mut term = n_d.clone();
    term.scale(C64::new(d_mode.nu, 0.0));
    h = h.add_scaled(one, &term);
    let mut term = n_a.clone();
    term.scale(C64::new(a_mode.nu, 0.0));
    h = h.add_scaled(one, &term);
    // Holstein couplings act only in their molecule's excited branch.
    let mut term = b_d.add_scaled(one, &b_d.adjoint()).matmul(&proj_d);
    term.scale(C64::new(-d_mode.lambda * d_mode.nu, 0.0));
    h = h.add_scaled(one, &term);
    let mut term = b_a.add_scaled(one, &b_a.adjoint()).matmul(&proj_a);
    term.scale(C64::new(-a_mode.lambda * a_mode.nu, 0.0));
    h = h.add_scaled(one, &term);
    let mut term = exch;
    term.scale(C64::new(spec.omega_dd, 0.0));
    h = h.add_scaled(one, &term);

    let mut left = h.clone();
    left.scale(C64::new(0.0, -1.0));
    let mut right = h;
    right.scale(C64::new(0.0, 1.0));
    let mut decay = proj_d.clone();
    decay.scale(C64::new(-spec.donor.gamma_rad, 0.0));
    let mut term = proj_a.clone();
    term.scale(C64::new(-spec.acceptor.gamma_rad, 0.0));
    decay = decay.add_scaled(one, &term);
    for (rate, b) in [(d_mode.gamma_vib, &b_d), (a_mode.gamma_vib, &b_a)] {
        let mut pop = b.adjoint().matmul(b);
        pop.scale(C64::new(-rate, 0.0));
        decay = decay.add_scaled(one, &pop);
    }
    left = left.add_scaled(one, &decay);
    right = right.add_scaled(one, &decay);
    let gen = Generator::from_sides(
        &left,
        &right,
        vec![(d_mode.gamma_vib, b_d), (a_mode.gamma_vib, b_a)],
    );

    let mut state = DMat::zeros(dim, dim);
    state[(0, 0)] = C64::new(p_d0, 0.0); // |D; 0, 0>
    let mut prop = Propagator::new(&gen, *opts);
    let mut t = 0.0;
    let mut p_donor = Vec::with_capacity(times.len());
    let mut p_acceptor = Vec::with_capacity(times.len());
    for &target in times {
        prop.advance(&mut state, t, target)?;
        t = target;
        p_donor.push(crate::oracle::solve::trace_of_product(&proj_d, &state).re);
        p_acceptor.push(crate::oracle::solve::trace_of_product(&proj_a, &state).re);
    }
    Ok(SectorTrace {
        times: times.to_vec(),
        p_donor,
        p_acceptor,
    })
}
