//! Acceptance suite: every exit criterion implemented at its stated
//! tolerance, one PASS/FAIL line per criterion (run with `--nocapture` to see
//! them on success).
//!
//! Four sub-criteria compare the perturbative closed forms against the strict
//! Lindblad reference at parameter points where the dipole-vibration
//! back-action terms dropped by the closed-form derivation are not small
//! (the model's documented `lambda^2 Gamma` dephasing artifact, plus the
//! resonant polariton cross-talk those series omit). Those assertions are
//! expected to fail and are kept verbatim; companion tests demonstrate the
//! same machinery agreeing in the regime where the derivation is controlled.

use std::path::Path;
use std::time::Instant;

use num_complex::Complex64 as C64;
use once_cell::sync::Lazy;

use molspec::config::parse_config;
use molspec::fret;
use molspec::model::*;
use molspec::oracle::{self, HilbertLayout, IntegratorOptions, SteadyMethod, SteadyOptions};
use molspec::series::{enumerate_indices, poisson_weight, TruncationPolicy};
use molspec::spectra::{self, linear_grid};

fn report(name: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {name}: {} {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn preset(name: &str) -> molspec::config::ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("presets").join(name);
    parse_config(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Indices of local maxima, strongest first.
fn local_maxima(values: &[f64]) -> Vec<usize> {
    let mut peaks: Vec<usize> = (1..values.len() - 1)
        .filter(|&i| values[i] > values[i - 1] && values[i] > values[i + 1])
        .collect();
    peaks.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    peaks
}

// ---------------------------------------------------------------------------
// Criterion 1: exact two-level absorption.

#[test]
fn criterion_01_two_level_lorentzian() {
    let start = Instant::now();
    let mol = MoleculeSpec::two_level(100.0, 1.0);
    let drive = DriveSpec::molecule(0.0, 0.03);
    let grid = linear_grid(60.0, 140.0, 1001);
    let spec =
        spectra::absorption_population(&mol, &drive, &grid, &TruncationPolicy::default()).unwrap();
    let values = spec.values.as_real().unwrap();
    let mut worst = 0.0f64;
    for (&omega_l, &v) in grid.iter().zip(values) {
        let d: f64 = omega_l - mol.omega_e;
        let exact = 0.03f64.powi(2) / (1.0 + d * d);
        worst = worst.max((v - exact).abs() / exact);
    }
    let elapsed = start.elapsed();
    let pass = worst < 1e-12 && elapsed.as_secs_f64() < 1.0;
    report(
        "criterion 1 (two-level absorption)",
        pass,
        &format!("worst rel err {worst:.2e}, {elapsed:?}"),
    );
    assert!(pass, "worst {worst:e}, elapsed {elapsed:?}");
}

// ---------------------------------------------------------------------------
// Criterion 2: Poisson normalization and certified per-mode orders.

#[test]
fn criterion_02_poisson_normalization() {
    let start = Instant::now();
    let policy = TruncationPolicy::with_epsilon(1e-12);
    let mut pass = true;
    let mut detail = String::new();
    for &lambda in &[0.1, 0.5, 1.0, 2.0] {
        let series =
            enumerate_indices(&[VibrationalMode::new(1.0, 0.1, lambda)], &policy).unwrap();
        let weight_ok = series.report.retained_weight >= 1.0 - 1e-12;

        // 500-term reference: smallest order whose tail drops below epsilon.
        let mut acc = 0.0;
        let mut reference = 0;
        for m in 0..500u32 {
            acc += poisson_weight(lambda, m);
            if 1.0 - acc < 1e-12 {
                reference = m;
                break;
            }
        }
        let cap = series.report.per_mode_orders[0];
        // The certified cap must cover the reference and stay close to it.
        let order_ok = cap >= reference && cap <= reference + 6;
        pass &= weight_ok && order_ok;
        detail.push_str(&format!(
            "[lambda={lambda}: weight {:.15}, cap {cap} vs ref {reference}] ",
            series.report.retained_weight
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed.as_secs_f64() < 1.0;
    report("criterion 2 (Poisson normalization)", pass, &detail);
    assert!(pass, "{detail}");
}

// ---------------------------------------------------------------------------
// Criterion 3: three-mode preset, analytic vs master equation.

struct Crit3 {
    mol: MoleculeSpec,
    eta: f64,
    abs_grid: Vec<f64>,
    abs_values: Vec<f64>,
    /// (grid index, analytic value, oracle stencil values at -h, 0, +h).
    abs_peaks: Vec<(usize, f64, [f64; 3])>,
    em_grid: Vec<f64>,
    em_values: Vec<f64>,
    em_oracle: Vec<f64>,
    stencil_step: f64,
    steady_drift: f64,
}

static CRIT3: Lazy<Crit3> = Lazy::new(|| {
    let config = preset("fig1c_absorption.toml");
    let mol = config.molecule.clone().unwrap();
    let policy = config.policy;
    let eta = config.drive.as_ref().unwrap().eta;
    let abs_grid = config.grid_points().unwrap();
    let drive = DriveSpec::molecule(0.0, eta);
    let abs_values = spectra::absorption_population(&mol, &drive, &abs_grid, &policy)
        .unwrap()
        .values
        .as_real()
        .unwrap()
        .to_vec();

    let peaks: Vec<usize> = local_maxima(&abs_values).into_iter().take(4).collect();
    let fock = config.oracle.as_ref().unwrap().vib_dim.unwrap();
    let layout = HilbertLayout::for_molecules(std::slice::from_ref(&mol), fock, None);
    let stencil_step = 0.25;

    // The populations relax at 2 gamma while the probe-side residual floors
    // at the integrator noise, so the march runs a fixed physical horizon and
    // the drift certificate below bounds what is left.
    let steady_pop = |omega_l: f64| -> f64 {
        let liouv = oracle::build_system(
            std::slice::from_ref(&mol),
            None,
            None,
            Some(&drive.detuned(omega_l)),
            &ThermalBath::zero(),
            &layout,
        )
        .unwrap();
        let opts = SteadyOptions {
            method: SteadyMethod::March,
            residual_target: 1e-4,
            min_march_time: 8.0 / mol.gamma_rad,
            ..Default::default()
        };
        let (rho, _) = oracle::steady_state(&liouv, &opts).unwrap();
        rho.expectation(&layout.excited_projector(0)).re
    };

    let mut abs_peaks = Vec::new();
    for &i in &peaks {
        let w = abs_grid[i];
        let stencil = [
            steady_pop(w - stencil_step),
            steady_pop(w),
            steady_pop(w + stencil_step),
        ];
        abs_peaks.push((i, abs_values[i], stencil));
    }

    // Drift certificate on the strongest line: marching 2/gamma further moves
    // the population by well under the comparison tolerance.
    let steady_drift = {
        let omega_l = abs_grid[peaks[0]];
        let liouv = oracle::build_system(
            std::slice::from_ref(&mol),
            None,
            None,
            Some(&drive.detuned(omega_l)),
            &ThermalBath::zero(),
            &layout,
        )
        .unwrap();
        let opts = SteadyOptions {
            method: SteadyMethod::March,
            residual_target: 1e-4,
            min_march_time: 8.0 / mol.gamma_rad,
            ..Default::default()
        };
        let (rho, _) = oracle::steady_state(&liouv, &opts).unwrap();
        let before = rho.expectation(&layout.excited_projector(0)).re;
        let later = oracle::evolve(
            &liouv,
            &rho,
            &[2.0 / mol.gamma_rad],
            &IntegratorOptions {
                rtol: 1e-6,
                ..Default::default()
            },
        )
        .unwrap();
        let after = later[0].expectation(&layout.excited_projector(0)).re;
        (after - before).abs() / before
    };

    // Emission: regression correlation on the conditioned coherence block.
    let em_config = preset("fig1c_emission.toml");
    let em_grid = em_config.grid_points().unwrap();
    let p0 = em_config.initial_population.unwrap();
    let em_values = spectra::emission_spectrum_transient(&mol, p0, &em_grid, &policy)
        .unwrap()
        .values
        .as_real()
        .unwrap()
        .to_vec();
    let dt = 0.008;
    let n = (16.0 / dt) as usize;
    let taus: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
    let corr = oracle::transient_emission_correlation(
        &mol,
        &vec![fock; 3],
        p0,
        &taus,
        &IntegratorOptions::default(),
    )
    .unwrap();
    let em_oracle = oracle::spectrum_from_correlation(&taus, &corr, &em_grid)
        .unwrap()
        .values
        .as_real()
        .unwrap()
        .to_vec();

    Crit3 {
        mol,
        eta,
        abs_grid,
        abs_values,
        abs_peaks,
        em_grid,
        em_values,
        em_oracle,
        stencil_step,
        steady_drift,
    }
});

#[test]
fn criterion_03_three_mode_absorption_and_emission() {
    let start = Instant::now();
    let c = &*CRIT3;
    let mut pass = true;
    let mut detail = String::new();

    assert!(
        c.steady_drift < 3e-3,
        "steady-state march not converged: drift {}",
        c.steady_drift
    );

    for &(i, analytic, stencil) in &c.abs_peaks {
        // Peak position: the oracle stencil around the analytic position must
        // peak at its centre (position agreement within the stencil step).
        let position_ok = stencil[1] >= stencil[0] && stencil[1] >= stencil[2];
        let rel = (analytic - stencil[1]).abs() / stencil[1];
        let height_ok = rel < 0.05;
        pass &= position_ok && height_ok;
        detail.push_str(&format!(
            "[abs @{:.2}: err {:+.2}%{}] ",
            c.abs_grid[i],
            rel * 100.0,
            if position_ok { "" } else { " POSITION" }
        ));
    }

    let analytic_peaks: Vec<usize> = local_maxima(&c.em_values).into_iter().take(4).collect();
    let grid_step = c.em_grid[1] - c.em_grid[0];
    for &i in &analytic_peaks {
        // Oracle argmax near the analytic peak.
        let lo = i.saturating_sub((1.0 / grid_step) as usize);
        let hi = (i + (1.0 / grid_step) as usize).min(c.em_grid.len() - 1);
        let oracle_argmax = (lo..=hi)
            .max_by(|&a, &b| c.em_oracle[a].total_cmp(&c.em_oracle[b]))
            .unwrap();
        let position_ok = oracle_argmax.abs_diff(i) <= 1;
        let rel = (c.em_values[i] - c.em_oracle[i]).abs() / c.em_oracle[i];
        let height_ok = rel < 0.05;
        pass &= position_ok && height_ok;
        detail.push_str(&format!(
            "[em @{:.2}: err {:+.2}%, pos off {} steps] ",
            c.em_grid[i],
            rel * 100.0,
            oracle_argmax.abs_diff(i)
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed.as_secs_f64() < 600.0;
    report(
        "criterion 3 (three-mode spectra vs oracle)",
        pass,
        &format!("{detail}{elapsed:?}"),
    );
    assert!(pass, "{detail}");
}

// ---------------------------------------------------------------------------
// Criterion 4: cavity transmission doublet.

struct Crit4 {
    grid: Vec<f64>,
    analytic_abs2: Vec<f64>,
    oracle_abs2: Vec<f64>,
    omega_e: f64,
    kappa: f64,
    gamma: f64,
    kappa_ul: f64,
    upper_center: f64,
}

static CRIT4: Lazy<Crit4> = Lazy::new(|| {
    let config = preset("fig1d_transmission.toml");
    let mol = config.molecule.clone().unwrap();
    let cav = config.cavity.unwrap();
    let policy = config.policy;
    let eta = config.drive.as_ref().unwrap().eta;
    let drive = DriveSpec::cavity(0.0, eta);
    // 0.1 kappa sampling across the doublet.
    let grid = linear_grid(mol.omega_e - 6.0, mol.omega_e + 6.0, 121);
    let analytic_abs2 = spectra::cavity_transmission(&mol, &cav, &drive, &grid, &policy)
        .unwrap()
        .magnitude_squared();

    let oracle_section = config.oracle.as_ref().unwrap();
    let layout = HilbertLayout::new(
        vec![vec![oracle_section.vib_dim.unwrap()]],
        oracle_section.cavity_dim,
    );
    let a_op = layout.photon_annihilation().unwrap();
    let oracle_abs2: Vec<f64> = grid
        .iter()
        .map(|&omega_l| {
            let liouv = oracle::build_system(
                std::slice::from_ref(&mol),
                Some(&cav),
                None,
                Some(&drive.detuned(omega_l)),
                &ThermalBath::zero(),
                &layout,
            )
            .unwrap();
            let (rho, _) = oracle::steady_state(&liouv, &SteadyOptions::default()).unwrap();
            (cav.kappa * rho.expectation(&a_op) / eta).norm_sqr()
        })
        .collect();

    let kappa_ul = spectra::polariton_crosstalk_rate(&mol, &cav).unwrap();
    let modes = spectra::polariton_modes(&mol, &cav, mol.omega_e);
    Crit4 {
        grid,
        analytic_abs2,
        oracle_abs2,
        omega_e: mol.omega_e,
        kappa: cav.kappa,
        gamma: mol.gamma_rad,
        kappa_ul,
        upper_center: modes.omega_plus,
    }
});

#[test]
fn criterion_04a_transmission_matches_oracle() {
    let c = &*CRIT4;
    let max_o = c.oracle_abs2.iter().cloned().fold(0.0, f64::max);
    let mut worst = (0.0f64, 0.0f64);
    for i in 0..c.grid.len() {
        if c.oracle_abs2[i] > 0.02 * max_o {
            let rel = (c.analytic_abs2[i] - c.oracle_abs2[i]).abs() / c.oracle_abs2[i];
            if rel > worst.1 {
                worst = (c.grid[i] - c.omega_e, rel);
            }
        }
    }
    let pass = worst.1 < 0.05;
    report(
        "criterion 4a (|t_c|^2 vs oracle across doublet)",
        pass,
        &format!("worst rel err {:.1}% at detuning {:+.2}", worst.1 * 100.0, worst.0),
    );
    // The polariton series carries neither the resonant upper-to-lower
    // cross-talk (kappa_UL = 0.48 kappa at nu = 2g) nor the vibrational
    // back-action linewidth; both exceed the stated 5% at these parameters.
    assert!(
        pass,
        "series vs Lindblad mismatch {:.1}% (resonant cross-talk regime)",
        worst.1 * 100.0
    );
}

#[test]
fn criterion_04b_upper_polariton_linewidth() {
    let c = &*CRIT4;
    let predicted = 0.5 * (c.kappa + c.gamma) + 0.5 * c.kappa_ul;
    let window = (c.upper_center - 1.6 * predicted, c.upper_center + 1.6 * predicted);
    let fit = oracle::fit_lorentzian(&c.grid, &c.oracle_abs2, window).unwrap();
    let rel = (fit.half_width - predicted).abs() / predicted;
    let pass = rel < 0.10;
    report(
        "criterion 4b (upper polariton width = (kappa+gamma)/2 + kappa_UL/2)",
        pass,
        &format!(
            "fit {:.4} vs predicted {:.4} ({:+.1}%), kappa_UL = {:.4}",
            fit.half_width,
            predicted,
            rel * 100.0,
            c.kappa_ul
        ),
    );
    assert!(pass, "fit {} vs {predicted}", fit.half_width);
}

#[test]
fn criterion_04c_doublet_asymmetry() {
    let c = &*CRIT4;
    let upper_max = c
        .grid
        .iter()
        .zip(&c.oracle_abs2)
        .filter(|(&g, _)| g > c.omega_e)
        .map(|(_, &v)| v)
        .fold(0.0, f64::max);
    let lower_max = c
        .grid
        .iter()
        .zip(&c.oracle_abs2)
        .filter(|(&g, _)| g < c.omega_e)
        .map(|(_, &v)| v)
        .fold(0.0, f64::max);
    let pass = upper_max < lower_max;
    report(
        "criterion 4c (upper peak suppressed)",
        pass,
        &format!("upper {upper_max:.4} < lower {lower_max:.4}"),
    );
    assert!(pass);
}

// ---------------------------------------------------------------------------
// Criterion 5: branching ratios.

#[test]
fn criterion_05_branching_ratios() {
    let mol = |lambda: f64| {
        MoleculeSpec::with_modes(0.0, 1.0, vec![VibrationalMode::new(100.0, 1.0, lambda)])
    };
    let m = mol(0.5);
    let alpha = spectra::branching_ratio(&m);
    let exact = (-0.25f64).exp();
    let a_ok = (alpha - exact).abs() < 1e-15;

    let bare = spectra::purcell_branching_ratio(&m, &CavitySpec::new(0.0, 1.0, 0.0));
    let b_ok = (bare.alpha_cav - alpha).abs() < 1e-14;

    // C00 = 1e6 via g chosen on the reduced coupling.
    let g = (1e6f64).sqrt() * (0.25f64 / 2.0).exp();
    let big = spectra::purcell_branching_ratio(&m, &CavitySpec::new(0.0, 1.0, g));
    let c_ok = (big.c00 - 1e6).abs() < 1e-6 * 1e6 && (big.alpha_cav - 1.0).abs() < 1e-3;

    let pass = a_ok && b_ok && c_ok;
    report(
        "criterion 5 (branching ratios)",
        pass,
        &format!(
            "alpha {alpha:.15}, alpha_cav(C=0) gap {:.1e}, alpha_cav(C=1e6) = {:.6}",
            (bare.alpha_cav - alpha).abs(),
            big.alpha_cav
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------------------
// Criterion 6: pump-probe transfer dynamics.

struct Crit6 {
    spec: FretSpec,
    kappa_et: f64,
    times: Vec<f64>,
    trace: oracle::SectorTrace,
    donor_rate: f64,
    feed_rate: f64,
}

fn fig2c_rates(trace: &oracle::SectorTrace, spec: &FretSpec) -> (f64, f64) {
    let times = &trace.times;
    let h = times[1] - times[0];
    let mut donor_rates = Vec::new();
    let mut feed_rates = Vec::new();
    for i in 1..times.len() - 1 {
        let t = times[i];
        // Secular window: past the vibrational transient, well inside the
        // radiative decay.
        if !(0.04..=0.24).contains(&t) {
            continue;
        }
        let dpd = (trace.p_donor[i + 1] - trace.p_donor[i - 1]) / (2.0 * h);
        let dpa = (trace.p_acceptor[i + 1] - trace.p_acceptor[i - 1]) / (2.0 * h);
        donor_rates.push(-dpd / trace.p_donor[i]);
        feed_rates
            .push((dpa + 2.0 * spec.acceptor.gamma_rad * trace.p_acceptor[i]) / trace.p_donor[i]);
    }
    let avg = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    (avg(&donor_rates), avg(&feed_rates))
}

static CRIT6: Lazy<Crit6> = Lazy::new(|| {
    let config = preset("fig2c_pump_probe.toml");
    let spec = config.fret.clone().unwrap();
    let kappa_et = fret::fret_rate_direct(&spec, &config.policy).unwrap().kappa_et;
    let times = config.grid_points().unwrap();
    let fock = config.oracle.as_ref().unwrap().vib_dim.unwrap();
    let trace = oracle::fret_sector_trace(
        &spec,
        fock,
        fock,
        config.initial_population.unwrap(),
        &times,
        &IntegratorOptions::default(),
    )
    .unwrap();
    let (donor_rate, feed_rate) = fig2c_rates(&trace, &spec);
    Crit6 {
        spec,
        kappa_et,
        times,
        trace,
        donor_rate,
        feed_rate,
    }
});

#[test]
fn criterion_06a_donor_decay_rate() {
    let c = &*CRIT6;
    let predicted = 2.0 * c.spec.donor.gamma_rad + c.kappa_et;
    let rel = (c.donor_rate - predicted).abs() / predicted;
    let pass = rel < 0.05;
    report(
        "criterion 6a (donor log-slope = 2 gamma + kappa_ET)",
        pass,
        &format!("oracle {:.4} vs {:.4} ({:+.2}%)", c.donor_rate, predicted, rel * 100.0),
    );
    assert!(pass, "donor rate {} vs {predicted}", c.donor_rate);
}

#[test]
fn criterion_06b_acceptor_feed_rate() {
    let c = &*CRIT6;
    let rel = (c.feed_rate - c.kappa_et).abs() / c.kappa_et;
    let pass = rel < 0.05;
    report(
        "criterion 6b (acceptor rise = kappa_ET)",
        pass,
        &format!("oracle {:.4} vs {:.4} ({:+.2}%)", c.feed_rate, c.kappa_et, rel * 100.0),
    );
    // The strict Lindblad evolution transfers slower than the perturbative
    // overlap series: the dropped back-action terms broaden both ladders by
    // lambda^2 Gamma_eff (~15 gamma against the 60 gamma resonant width).
    assert!(pass, "feed rate {} vs {} (back-action regime)", c.feed_rate, c.kappa_et);
}

#[test]
fn criterion_06c_closed_form_traces() {
    let c = &*CRIT6;
    let closed = fret::pump_probe_with_rate(&c.spec, 1.0, &c.times, c.kappa_et);
    let pa_max = c.trace.p_acceptor.iter().cloned().fold(0.0, f64::max);
    let mut worst_donor = 0.0f64;
    let mut worst_acceptor = 0.0f64;
    for i in 0..c.times.len() {
        worst_donor = worst_donor
            .max((closed.p_donor[i] - c.trace.p_donor[i]).abs() / c.trace.p_donor[i]);
        worst_acceptor =
            worst_acceptor.max((closed.p_acceptor[i] - c.trace.p_acceptor[i]).abs() / pa_max);
    }
    let pass = worst_donor < 0.05 && worst_acceptor < 0.05;
    report(
        "criterion 6c (closed-form traces vs oracle)",
        pass,
        &format!(
            "donor worst {:.2}%, acceptor worst {:.2}% of peak",
            worst_donor * 100.0,
            worst_acceptor * 100.0
        ),
    );
    assert!(
        pass,
        "donor {worst_donor:.4}, acceptor {worst_acceptor:.4} (acceptor channel carries the \
         back-action mismatch)"
    );
}

// ---------------------------------------------------------------------------
// Criterion 7: displacement-correlator equivalences.

#[test]
fn criterion_07_displacement_equivalences() {
    let start = Instant::now();
    let mut worst_series = 0.0f64;
    for &lambda in &[0.0, 0.25, 0.5, 1.0, 1.5, 2.0] {
        let mode = VibrationalMode::new(10.0, 1.0, lambda);
        let cap = molspec::series::per_mode_order(lambda, 1e-14);
        for i in 0..=50 {
            let tau = 10.0 * i as f64 / 50.0; // Gamma tau in [0, 10]
            let closed = molspec::series::displacement_correlation(&mode, tau).unwrap();
            let series: C64 = (0..=cap)
                .map(|m| {
                    poisson_weight(lambda, m)
                        * (-C64::new(mode.gamma_vib, mode.nu) * tau * m as f64).exp()
                })
                .sum();
            worst_series = worst_series.max((closed - series).norm());
        }
    }
    let series_ok = worst_series < 1e-10;

    let mut worst_pp = 0.0f64;
    let mode = VibrationalMode::new(7.0, 0.8, 1.3);
    for i in -40..=40 {
        let tau = i as f64 * 0.25;
        let langevin = molspec::series::pp_correlation_langevin(&mode, tau);
        let brownian = molspec::series::pp_correlation_brownian(&mode, tau);
        worst_pp = worst_pp.max((langevin - brownian).norm());
    }
    let pp_ok = worst_pp < 1e-12;
    let pass = series_ok && pp_ok;
    report(
        "criterion 7 (displacement correlator equivalences)",
        pass,
        &format!(
            "closed-vs-series {worst_series:.2e}, momentum correlators {worst_pp:.2e}, {:?}",
            start.elapsed()
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------------------
// Criterion 8: steady-state emission vs regression oracle.

struct Crit8 {
    grid: Vec<f64>,
    analytic: Vec<f64>,
    oracle: Vec<f64>,
}

fn steady_emission_pair(gamma_vib: f64, fock: usize) -> Crit8 {
    let mol = MoleculeSpec::with_modes(
        200.0,
        1.0,
        vec![VibrationalMode::new(20.0, gamma_vib, 0.5)],
    );
    let drive = DriveSpec::molecule(mol.omega_e, 0.05);
    let policy = TruncationPolicy::default();
    let grid = linear_grid(-75.0, 35.0, 1101);
    let analytic = spectra::emission_spectrum_steady(&mol, &drive, &grid, &policy)
        .unwrap()
        .values
        .as_real()
        .unwrap()
        .to_vec();

    let layout = HilbertLayout::for_molecules(std::slice::from_ref(&mol), fock, None);
    let liouv = oracle::build_system(
        std::slice::from_ref(&mol),
        None,
        None,
        Some(&drive),
        &ThermalBath::zero(),
        &layout,
    )
    .unwrap();
    let (rho, _) = oracle::steady_state(&liouv, &SteadyOptions::default()).unwrap();
    let sigma = layout.sigma(0);
    let sigma_dag = sigma.adjoint();
    let elastic = rho.expectation(&sigma_dag) * rho.expectation(&sigma);
    let dt = 0.004;
    let t_end = 16.0 / gamma_vib.min(1.0) + 8.0;
    let n = (t_end / dt) as usize;
    let taus: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
    let corr = oracle::two_time_correlation(
        &liouv,
        &rho,
        &sigma_dag,
        &sigma,
        &taus,
        &IntegratorOptions::default(),
    )
    .unwrap();
    let inelastic: Vec<C64> = corr.iter().map(|c| c - elastic).collect();
    let oracle = oracle::spectrum_from_correlation(&taus, &inelastic, &grid)
        .unwrap()
        .values
        .as_real()
        .unwrap()
        .to_vec();
    Crit8 {
        grid,
        analytic,
        oracle,
    }
}

static CRIT8: Lazy<Crit8> = Lazy::new(|| steady_emission_pair(3.0, 12));

fn crit8_peak_errors(c: &Crit8) -> Vec<(f64, f64)> {
    local_maxima(&c.analytic)
        .into_iter()
        .take(3)
        .map(|i| {
            (
                c.grid[i],
                (c.analytic[i] - c.oracle[i]).abs() / c.oracle[i],
            )
        })
        .collect()
}

#[test]
fn criterion_08_steady_emission_vs_oracle() {
    let c = &*CRIT8;
    let errors = crit8_peak_errors(c);
    let pass = errors.iter().all(|&(_, rel)| rel < 0.10);
    let detail: String = errors
        .iter()
        .map(|(w, rel)| format!("[{w:+.1}: {:.1}%] ", rel * 100.0))
        .collect();
    report("criterion 8 (steady emission vs oracle)", pass, &detail);
    // At Gamma = 3 gamma the dropped back-action terms put lambda^2 Gamma =
    // 0.75 gamma of artificial dephasing into the oracle's zero-phonon
    // dynamics; the stated 10% holds only for Gamma << gamma (see the
    // companion regime test).
    assert!(pass, "{detail}");
}

#[test]
fn steady_emission_oracle_agreement_in_weak_damping_regime() {
    // Identical machinery in the regime where the closed-form derivation is
    // controlled (lambda^2 Gamma << gamma): agreement at every peak.
    let c = steady_emission_pair(0.1, 12);
    let errors = crit8_peak_errors(&c);
    for (w, rel) in errors {
        assert!(rel < 0.10, "peak at {w}: {:.1}%", rel * 100.0);
    }
}

// ---------------------------------------------------------------------------
// Criterion 9: cavity-assisted transfer limits.

#[test]
fn criterion_09a_decoupled_cavity_reduces_to_direct() {
    let config = preset("fig2c_pump_probe.toml");
    let mut spec = config.fret.clone().unwrap();
    spec.cavity = Some(FretCavity {
        kappa: 100.0,
        g_donor: 0.0,
        g_acceptor: 0.0,
        delta_c: 100.0,
    });
    let policy = config.policy;
    let rates = fret::fret_rate_cavity(&spec, &policy).unwrap();
    let direct = fret::fret_rate_direct(&spec, &policy).unwrap().kappa_et;
    let gap = (rates.j_cavity_dd - direct).abs();
    let pass = gap <= 1e-12 * direct
        && rates.j_cavity_pure_slow == 0.0
        && rates.j_cavity_pure_fast == 0.0;
    report(
        "criterion 9a (g = 0 reduces to direct rate)",
        pass,
        &format!("gap {gap:.2e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_09b_cavity_scan_peaks_at_acceptor_line() {
    // Purely cavity-mediated channel: scan the donor-cavity detuning and
    // compare the argmax against the resonance condition
    // omega_c = omega_a + n_a nu_a with n_a the acceptor's dominant
    // absorption line.
    let policy = TruncationPolicy::default();
    let base = FretSpec {
        donor: MoleculeSpec::with_modes(
            500.0,
            1.0,
            vec![VibrationalMode::new(180.0, 30.0, 0.6)],
        ),
        acceptor: MoleculeSpec::with_modes(
            0.0,
            1.0,
            vec![VibrationalMode::new(250.0, 30.0, 1.1)],
        ),
        omega_dd: 0.0,
        delta: 500.0,
        cavity: None,
    };
    // Dominant acceptor line: the largest Poisson weight, n_a ~ lambda_a^2.
    let lambda_a = base.acceptor.modes[0].lambda;
    let n_star = (0..6u32)
        .max_by(|&a, &b| poisson_weight(lambda_a, a).total_cmp(&poisson_weight(lambda_a, b)))
        .unwrap();
    let predicted = base.delta - n_star as f64 * base.acceptor.modes[0].nu;

    let step = 25.0;
    let mut best = (f64::NAN, f64::MIN);
    let mut i = 0;
    loop {
        let delta_c = -200.0 + step * i as f64;
        if delta_c > 700.0 {
            break;
        }
        i += 1;
        let mut spec = base.clone();
        spec.cavity = Some(FretCavity {
            kappa: 50.0,
            g_donor: 5.0,
            g_acceptor: 5.0,
            delta_c,
        });
        let rates = fret::fret_rate_cavity(&spec, &policy).unwrap();
        if rates.j_cavity_pure_slow > best.1 {
            best = (delta_c, rates.j_cavity_pure_slow);
        }
    }
    let pass = (best.0 - predicted).abs() <= step;
    report(
        "criterion 9b (J_A argmax at acceptor absorption line)",
        pass,
        &format!(
            "scan argmax delta_c = {} vs predicted {} (n_a = {n_star})",
            best.0, predicted
        ),
    );
    // The printed channel coefficients peak with the cavity on the donor's
    // strongest emission line instead; the acceptor-line resonances enter
    // only through odd (dispersive) numerators.
    assert!(pass, "argmax {} vs predicted {predicted}", best.0);
}

// ---------------------------------------------------------------------------
// Criterion 10: truncation-convergence gate.

#[test]
fn criterion_10_truncation_convergence() {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = String::new();

    // --- Criterion 3 observables. Both truncations evaluated through the
    // linear-response route (block-reduced, factorized per mode), so the
    // comparison isolates the Fock truncation alone.
    {
        let c = &*CRIT3;
        let dt = 0.008;
        let n = (16.0 / dt) as usize;
        let taus: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
        let peak_omegas: Vec<f64> = c.abs_peaks.iter().map(|&(i, _, _)| c.abs_grid[i]).collect();
        let opts = IntegratorOptions::default();
        let mut abs_worst = 0.0f64;
        let mut em_worst = 0.0f64;
        let em_peaks: Vec<usize> = local_maxima(&c.em_values).into_iter().take(4).collect();
        let mut results = Vec::new();
        for fock in [5usize, 10] {
            let pops = oracle::absorption_from_response(
                &c.mol,
                &vec![fock; 3],
                c.eta,
                &peak_omegas,
                &taus,
                &opts,
            )
            .unwrap();
            let corr = oracle::factorized_conditional_correlations(
                &c.mol,
                &vec![fock; 3],
                &taus,
                &opts,
            )
            .unwrap();
            let em = oracle::spectrum_from_correlation(&taus, &corr.emission, &c.em_grid)
                .unwrap()
                .values
                .as_real()
                .unwrap()
                .to_vec();
            results.push((pops, em));
        }
        for k in 0..peak_omegas.len() {
            abs_worst = abs_worst
                .max((results[1].0[k] - results[0].0[k]).abs() / results[0].0[k]);
        }
        for &i in &em_peaks {
            em_worst = em_worst.max((results[1].1[i] - results[0].1[i]).abs() / results[0].1[i]);
        }
        pass &= abs_worst < 0.025 && em_worst < 0.025;
        detail.push_str(&format!(
            "[c3: abs {:.3}%, em {:.3}%] ",
            abs_worst * 100.0,
            em_worst * 100.0
        ));
    }

    // --- Criterion 4 observables via the response-route transmission.
    {
        let config = preset("fig1d_transmission.toml");
        let mol = config.molecule.clone().unwrap();
        let cav = config.cavity.unwrap();
        let grid = linear_grid(mol.omega_e - 6.0, mol.omega_e + 6.0, 121);
        let dt = 0.02;
        let n = (170.0 / dt) as usize;
        let taus: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
        let opts = IntegratorOptions::default();
        let mut curves = Vec::new();
        for (vib, phot) in [(10usize, 3usize), (20, 6)] {
            let layout = HilbertLayout::new(vec![vec![vib]], Some(phot));
            let t_c = oracle::transmission_from_response(&mol, &cav, &layout, &grid, &taus, &opts)
                .unwrap();
            curves.push(t_c.iter().map(|z| z.norm_sqr()).collect::<Vec<f64>>());
        }
        let max_b = curves[0].iter().cloned().fold(0.0, f64::max);
        let mut t_worst = 0.0f64;
        for i in 0..grid.len() {
            if curves[0][i] > 0.02 * max_b {
                t_worst = t_worst.max((curves[1][i] - curves[0][i]).abs() / curves[0][i]);
            }
        }
        // Fitted upper width and asymmetry stability.
        let c4 = &*CRIT4;
        let predicted = 0.5 * (c4.kappa + c4.gamma) + 0.5 * c4.kappa_ul;
        let window = (c4.upper_center - 1.6 * predicted, c4.upper_center + 1.6 * predicted);
        let fit_base = oracle::fit_lorentzian(&grid, &curves[0], window).unwrap();
        let fit_doubled = oracle::fit_lorentzian(&grid, &curves[1], window).unwrap();
        let w_change = (fit_doubled.half_width - fit_base.half_width).abs() / fit_base.half_width;
        let asym = |curve: &[f64]| {
            let up = grid
                .iter()
                .zip(curve)
                .filter(|(&g, _)| g > c4.omega_e)
                .map(|(_, &v)| v)
                .fold(0.0, f64::max);
            let lo = grid
                .iter()
                .zip(curve)
                .filter(|(&g, _)| g < c4.omega_e)
                .map(|(_, &v)| v)
                .fold(0.0, f64::max);
            up < lo
        };
        pass &= t_worst < 0.025 && w_change < 0.05 && asym(&curves[0]) == asym(&curves[1]);
        detail.push_str(&format!(
            "[c4: |t|^2 {:.3}%, width {:.3}%] ",
            t_worst * 100.0,
            w_change * 100.0
        ));
    }

    // --- Criterion 6 observables at doubled Fock.
    {
        let c = &*CRIT6;
        let trace16 = oracle::fret_sector_trace(
            &c.spec,
            16,
            16,
            1.0,
            &c.times,
            &IntegratorOptions::default(),
        )
        .unwrap();
        let (donor16, feed16) = fig2c_rates(&trace16, &c.spec);
        let donor_change = (donor16 - c.donor_rate).abs() / c.donor_rate;
        let feed_change = (feed16 - c.feed_rate).abs() / c.feed_rate;
        let mut trace_change = 0.0f64;
        let pa_max = c.trace.p_acceptor.iter().cloned().fold(0.0, f64::max);
        for i in 0..c.times.len() {
            trace_change = trace_change
                .max((trace16.p_donor[i] - c.trace.p_donor[i]).abs() / c.trace.p_donor[i])
                .max((trace16.p_acceptor[i] - c.trace.p_acceptor[i]).abs() / pa_max);
        }
        pass &= donor_change < 0.025 && feed_change < 0.025 && trace_change < 0.025;
        detail.push_str(&format!(
            "[c6: donor {:.3}%, feed {:.3}%, traces {:.3}%] ",
            donor_change * 100.0,
            feed_change * 100.0,
            trace_change * 100.0
        ));
    }

    // --- Criterion 8 peak heights at doubled Fock.
    {
        let base = &*CRIT8;
        let doubled = steady_emission_pair(3.0, 24);
        let peaks = local_maxima(&base.analytic);
        let mut worst = 0.0f64;
        for &i in peaks.iter().take(3) {
            worst = worst.max((doubled.oracle[i] - base.oracle[i]).abs() / base.oracle[i]);
        }
        pass &= worst < 0.05;
        detail.push_str(&format!("[c8: peaks {:.3}%] ", worst * 100.0));
    }

    report(
        "criterion 10 (truncation-convergence gate)",
        pass,
        &format!("{detail}{:?}", start.elapsed()),
    );
    assert!(pass, "{detail}");
}
