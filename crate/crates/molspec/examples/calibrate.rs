//! Scratch calibration runs for choosing preset parameters.

use molspec::model::*;
use molspec::oracle::*;
use molspec::series::TruncationPolicy;
use molspec::spectra::*;
use num_complex::Complex64 as C64;

fn criterion8_probe() {
    // Steady-state emission: lambda = 0.5, nu = 20, eta = 0.05, resonant
    // drive, oracle Fock 12; Gamma from argv.
    let gamma_vib: f64 = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(3.0);
    let mol = MoleculeSpec::with_modes(
        200.0,
        1.0,
        vec![VibrationalMode::new(20.0, gamma_vib, 0.5)],
    );
    let drive = DriveSpec::molecule(mol.omega_e, 0.05);
    let policy = TruncationPolicy::default();

    let fock = 12;
    let layout = HilbertLayout::for_molecules(std::slice::from_ref(&mol), fock, None);
    let liouv = build_system(
        std::slice::from_ref(&mol),
        None,
        None,
        Some(&drive),
        &ThermalBath::zero(),
        &layout,
    )
    .unwrap();
    let (rho, rep) = steady_state(&liouv, &SteadyOptions::default()).unwrap();
    eprintln!("steady: method={} residual={:.2e}", rep.method, rep.residual);

    let sigma = layout.sigma(0);
    let sigma_dag = sigma.adjoint();
    // Subtract the coherent plateau before transforming.
    let coh = rho.expectation(&sigma_dag) * rho.expectation(&sigma);
    let dt = 0.004;
    let t_end = 16.0 / gamma_vib.min(1.0) + 8.0;
    let n = (t_end / dt) as usize;
    let taus: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
    let corr = two_time_correlation(
        &liouv,
        &rho,
        &sigma_dag,
        &sigma,
        &taus,
        &IntegratorOptions::default(),
    )
    .unwrap();
    let corr_inc: Vec<C64> = corr.iter().map(|c| c - coh).collect();
    eprintln!(
        "corr(0) = {:.6e}, plateau = {:.6e}, tail |c| = {:.2e}",
        corr[0].re,
        coh.re,
        corr_inc.last().unwrap().norm()
    );

    let grid = linear_grid(-50.0, 50.0, 2001);
    let oracle_spec = spectrum_from_correlation(&taus, &corr_inc, &grid).unwrap();
    let analytic = emission_spectrum_steady(&mol, &drive, &grid, &policy).unwrap();
    let ov = oracle_spec.values.as_real().unwrap();
    let av = analytic.values.as_real().unwrap();

    // local maxima of the analytic spectrum
    let mut peaks: Vec<(usize, f64)> = Vec::new();
    for i in 1..grid.len() - 1 {
        if av[i] > av[i - 1] && av[i] > av[i + 1] {
            peaks.push((i, av[i]));
        }
    }
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    for &(i, h) in peaks.iter().take(5) {
        eprintln!(
            "peak omega={:+8.3}: analytic {:.6e} oracle {:.6e} rel.err {:+.3}%",
            grid[i],
            h,
            ov[i],
            100.0 * (h - ov[i]) / ov[i]
        );
    }
}

fn criterion3_probe(lambdas: [f64; 3], nus: [f64; 3], gammas: [f64; 3], fock: usize) {
    eprintln!("--- 3-mode probe: lambda={lambdas:?} nu={nus:?} Gamma={gammas:?} fock={fock}");
    let mol = MoleculeSpec::with_modes(
        100.0,
        1.0,
        vec![
            VibrationalMode::new(nus[0], gammas[0], lambdas[0]),
            VibrationalMode::new(nus[1], gammas[1], lambdas[1]),
            VibrationalMode::new(nus[2], gammas[2], lambdas[2]),
        ],
    );
    let policy = TruncationPolicy::default();
    let eta = 0.05;

    // analytic absorption peaks on a fine grid
    let grid = linear_grid(mol.omega_e - 6.0, mol.omega_e + 45.0, 2041);
    let drive = DriveSpec::molecule(0.0, eta);
    let analytic = absorption_population(&mol, &drive, &grid, &policy).unwrap();
    let av = analytic.values.as_real().unwrap();
    let mut peaks: Vec<(usize, f64)> = Vec::new();
    for i in 1..grid.len() - 1 {
        if av[i] > av[i - 1] && av[i] > av[i + 1] {
            peaks.push((i, av[i]));
        }
    }
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    peaks.truncate(5);

    let layout = HilbertLayout::for_molecules(std::slice::from_ref(&mol), fock, None);
    eprintln!("dim = {}", layout.total_dim());
    for &(i, h) in &peaks {
        let omega_l = grid[i];
        let t0 = std::time::Instant::now();
        let liouv = build_system(
            std::slice::from_ref(&mol),
            None,
            None,
            Some(&drive.detuned(omega_l)),
            &ThermalBath::zero(),
            &layout,
        )
        .unwrap();
        let (rho, rep) = steady_state(&liouv, &SteadyOptions::default()).unwrap();
        let pop = rho.expectation(&layout.excited_projector(0)).re;
        eprintln!(
            "peak omega_l-we={:+8.3}: analytic {:.6e} oracle {:.6e} rel.err {:+.3}% [{} res {:.1e}, {:?}]",
            omega_l - mol.omega_e,
            h,
            pop,
            100.0 * (h - pop) / pop,
            rep.method,
            rep.residual,
            t0.elapsed()
        );
    }
}

fn criterion4_probe() {
    let kappa = 1.0f64;
    let gamma = 0.1 * kappa;
    let lambda: f64 = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0.3);
    let nu: f64 = std::env::args()
        .nth(3)
        .and_then(|s| s.parse().ok())
        .unwrap_or(4.0);
    let mol = MoleculeSpec::with_modes(
        100.0,
        gamma,
        vec![VibrationalMode::new(nu * kappa, 1.5 * kappa, lambda)],
    );
    let cav = CavitySpec::new(mol.omega_e, kappa, 2.0 * kappa);
    let drive = DriveSpec::cavity(0.0, 0.05 * kappa);
    let policy = TruncationPolicy::default();

    let grid = linear_grid(mol.omega_e - 6.0, mol.omega_e + 6.0, 121);
    let analytic = cavity_transmission(&mol, &cav, &drive, &grid, &policy).unwrap();
    let at: Vec<f64> = analytic.magnitude_squared();

    let layout = HilbertLayout::new(vec![vec![10]], Some(3));
    eprintln!("--- cavity probe dim = {}", layout.total_dim());
    let mut ot = Vec::with_capacity(grid.len());
    let t0 = std::time::Instant::now();
    for &omega_l in &grid {
        let liouv = build_system(
            std::slice::from_ref(&mol),
            Some(&cav),
            None,
            Some(&drive.detuned(omega_l)),
            &ThermalBath::zero(),
            &layout,
        )
        .unwrap();
        let (rho, _) = steady_state(&liouv, &SteadyOptions::default()).unwrap();
        let a_op = layout.photon_annihilation().unwrap();
        let t_c = cav.kappa * rho.expectation(&a_op) / drive.eta;
        ot.push(t_c.norm_sqr());
    }
    eprintln!("oracle sweep took {:?}", t0.elapsed());
    let max_a = at.iter().cloned().fold(0.0, f64::max);
    let mut worst: (f64, f64) = (0.0, 0.0);
    for i in 0..grid.len() {
        if ot[i] > 0.02 * max_a {
            let rel = (at[i] - ot[i]).abs() / ot[i];
            if rel > worst.1 {
                worst = (grid[i] - mol.omega_e, rel);
            }
        }
    }
    eprintln!("worst rel err across doublet: {:.3}% at detuning {:+.3}", worst.1 * 100.0, worst.0);
    for i in (0..grid.len()).step_by(6) {
        eprintln!(
            "  d={:+7.3} analytic {:.4e} oracle {:.4e} rel {:+6.1}%",
            grid[i] - mol.omega_e,
            at[i],
            ot[i],
            100.0 * (at[i] - ot[i]) / ot[i].max(1e-12)
        );
    }

    // peak maxima and fitted widths
    let kul = polariton_crosstalk_rate(&mol, &cav).unwrap();
    let modes = polariton_modes(&mol, &cav, mol.omega_e);
    eprintln!(
        "kappa_UL = {kul:.4}, omega_+- = {:.4}/{:.4}, gamma_+- = {:.4}/{:.4}",
        modes.omega_plus - mol.omega_e,
        modes.omega_minus - mol.omega_e,
        modes.gamma_plus,
        modes.gamma_minus
    );
    let predicted = 0.5 * (kappa + gamma) + 0.5 * kul;
    // upper polariton window
    let upper = modes.omega_plus;
    let lo = upper - 1.6 * predicted;
    let hi = upper + 1.6 * predicted;
    let fit_o = fit_lorentzian(&grid, &ot, (lo, hi)).unwrap();
    let fit_a = fit_lorentzian(&grid, &at, (lo, hi)).unwrap();
    eprintln!(
        "upper window fit: oracle w={:.4} (res {:.2e}), analytic w={:.4}, predicted {:.4}",
        fit_o.half_width, fit_o.rel_residual, fit_a.half_width, predicted
    );
    let up_max = ot
        .iter()
        .zip(&grid)
        .filter(|(_, &g)| g > mol.omega_e)
        .map(|(v, _)| *v)
        .fold(0.0, f64::max);
    let lo_max = ot
        .iter()
        .zip(&grid)
        .filter(|(_, &g)| g < mol.omega_e)
        .map(|(v, _)| *v)
        .fold(0.0, f64::max);
    eprintln!("asymmetry: upper max {up_max:.4} < lower max {lo_max:.4}: {}", up_max < lo_max);
}

fn criterion6_probe(fock: usize) {
    use molspec::fret::*;
    let spec = FretSpec {
        donor: MoleculeSpec::with_modes(500.0, 1.0, vec![VibrationalMode::new(250.0, 30.0, 0.6)]),
        acceptor: MoleculeSpec::with_modes(0.0, 1.0, vec![VibrationalMode::new(250.0, 30.0, 0.4)]),
        omega_dd: 15.0,
        delta: 500.0,
        cavity: None,
    };
    let policy = TruncationPolicy::default();
    let kappa_et = fret_rate_direct(&spec, &policy).unwrap().kappa_et;
    eprintln!("series kappa_ET = {kappa_et:.6}");

    let n = 401usize;
    let times: Vec<f64> = (0..n).map(|i| i as f64 * 0.5 / (n - 1) as f64).collect();
    let t0 = std::time::Instant::now();
    let trace = fret_sector_trace(
        &spec,
        fock,
        fock,
        1.0,
        &times,
        &IntegratorOptions::default(),
    )
    .unwrap();
    eprintln!("sector trace fock={fock} dim=2*{0}*{0} took {1:?}", fock, t0.elapsed());

    // windowed average of the instantaneous rates over [0.04, 0.24]
    let h = times[1] - times[0];
    let mut donor_rates = Vec::new();
    let mut accept_rates = Vec::new();
    for i in 1..n - 1 {
        let t = times[i];
        if !(0.04..=0.24).contains(&t) {
            continue;
        }
        let dpd = (trace.p_donor[i + 1] - trace.p_donor[i - 1]) / (2.0 * h);
        let dpa = (trace.p_acceptor[i + 1] - trace.p_acceptor[i - 1]) / (2.0 * h);
        donor_rates.push(-dpd / trace.p_donor[i]);
        accept_rates.push((dpa + 2.0 * spec.acceptor.gamma_rad * trace.p_acceptor[i]) / trace.p_donor[i]);
    }
    for i in (1..n - 1).step_by(16) {
        let t = times[i];
        let dpd = (trace.p_donor[i + 1] - trace.p_donor[i - 1]) / (2.0 * h);
        let dpa = (trace.p_acceptor[i + 1] - trace.p_acceptor[i - 1]) / (2.0 * h);
        eprintln!(
            "  t={t:.4} P_D={:.5} P_A={:.6} donor_rate={:.4} feed_rate={:.4}",
            trace.p_donor[i],
            trace.p_acceptor[i],
            -dpd / trace.p_donor[i],
            (dpa + 2.0 * spec.acceptor.gamma_rad * trace.p_acceptor[i]) / trace.p_donor[i]
        );
    }
    let avg = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let donor_rate = avg(&donor_rates);
    let accept_rate = avg(&accept_rates);
    eprintln!(
        "oracle donor rate = {donor_rate:.6} (predict {:.6}, err {:+.2}%)",
        2.0 + kappa_et,
        100.0 * (donor_rate - (2.0 + kappa_et)) / (2.0 + kappa_et)
    );
    eprintln!(
        "oracle acceptor feed rate = {accept_rate:.6} (predict {kappa_et:.6}, err {:+.2}%)",
        100.0 * (accept_rate - kappa_et) / kappa_et
    );
    // closed-form trace comparison
    let pp = pump_probe_with_rate(&spec, 1.0, &times, kappa_et);
    let mut worst_d: f64 = 0.0;
    let mut worst_a: f64 = 0.0;
    let pa_max = trace.p_acceptor.iter().cloned().fold(0.0, f64::max);
    for i in 0..n {
        worst_d = worst_d.max((pp.p_donor[i] - trace.p_donor[i]).abs() / trace.p_donor[i]);
        worst_a = worst_a.max((pp.p_acceptor[i] - trace.p_acceptor[i]).abs() / pa_max);
    }
    eprintln!("trace mismatch: donor {:.2}% acceptor {:.2}% (of peak)", worst_d * 100.0, worst_a * 100.0);
}

fn criterion9_probe() {
    use molspec::fret::*;
    // Bad cavity, no direct exchange: purely cavity-mediated channel.
    // Distinct vibrational frequencies separate donor-emission and
    // acceptor-absorption resonances in delta_c.
    let policy = TruncationPolicy::default();
    for (label, nu_d, lam_d, nu_a, lam_a, kappa) in [
        ("A", 180.0, 0.6, 250.0, 1.1, 50.0),
        ("B", 95.0, 0.5, 250.0, 1.1, 20.0),
        ("C", 95.0, 1.2, 250.0, 1.1, 20.0),
        ("D", 95.0, 0.3, 250.0, 0.9, 10.0),
    ] {
        let base = FretSpec {
            donor: MoleculeSpec::with_modes(500.0, 1.0, vec![VibrationalMode::new(nu_d, 30.0, lam_d)]),
            acceptor: MoleculeSpec::with_modes(0.0, 1.0, vec![VibrationalMode::new(nu_a, 30.0, lam_a)]),
            omega_dd: 0.0,
            delta: 500.0,
            cavity: None,
        };
        let mut best = (f64::NAN, f64::MIN);
        let mut curve = Vec::new();
        for i in 0..141 {
            let delta_c = -200.0 + 10.0 * i as f64;
            let mut spec = base.clone();
            spec.cavity = Some(FretCavity {
                kappa,
                g_donor: 2.0,
                g_acceptor: 2.0,
                delta_c,
            });
            let rates = fret_rate_cavity(&spec, &policy).unwrap();
            let total = rates.j_cavity_pure_slow;
            curve.push((delta_c, total));
            if total > best.1 {
                best = (delta_c, total);
            }
        }
        eprintln!(
            "{label}: nu_d={nu_d} lam_d={lam_d} nu_a={nu_a} lam_a={lam_a} kappa={kappa} -> argmax {} (J={:.3e})",
            best.0, best.1
        );
        for (dc, j) in curve.iter().step_by(10) {
            eprint!(" {dc:+.0}:{j:+.2e}");
        }
        eprintln!();
    }
}

fn main() {
    let which = std::env::args().nth(1).unwrap_or_default();
    match which.as_str() {
        "c8" => criterion8_probe(),
        "c4" => criterion4_probe(),
        "c9" => criterion9_probe(),
        "c6" => criterion6_probe(
            std::env::args()
                .nth(2)
                .and_then(|s| s.parse().ok())
                .unwrap_or(8),
        ),
        "c3a" => criterion3_probe([0.6, 0.45, 0.3], [9.0, 20.0, 33.0], [1.3, 1.6, 2.0], 5),
        "c3b" => criterion3_probe([0.6, 0.45, 0.3], [9.0, 20.0, 33.0], [0.1, 0.12, 0.15], 5),
        "c3c" => criterion3_probe([0.7, 0.5, 0.35], [8.0, 17.0, 29.0], [0.25, 0.3, 0.4], 5),
        "c3d" => criterion3_probe([0.55, 0.4, 0.3], [9.0, 16.0, 27.0], [0.05, 0.055, 0.06], 5),
        _ => eprintln!("usage: calibrate c8|c4|c6|c3a..c3d"),
    }
}
