//! Steady-state fluorescence of a continuously driven single-mode molecule.
//!
//! The dipole autocorrelation under weak continuous driving is a six-fold
//! phonon-order sum coming from the four-point correlator of displacement
//! operators across the three relevant time orderings. Each term decays with
//! one of two complex rates, so the one-sided Fourier transform is available
//! in closed form. The purely elastic line (the constant part of the
//! correlation, a delta at the drive frequency with weight `|<sigma>|^2`) is
//! reported separately and omitted from the sampled spectrum, where it
//! contributes nothing at nonzero detuning from the drive.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{validate_drive, DriveSpec, DriveTarget, MoleculeSpec, VibrationalMode};
use crate::series::{per_mode_order, poisson_weight, TruncationPolicy, TruncationReport};
use crate::spectra::{SpectrumResult, SpectrumValues};

/// Collapsed six-index sum: every term's frequency dependence is
/// `1/(X + i omega)` for one of the two decay exponents, so coefficients are
/// accumulated per distinct exponent.
struct SteadyEmissionTerms {
    /// Transient-free exponents `X1 = q (Gamma + i nu)`, keyed by `q >= 1`.
    a_buckets: Vec<(Complex64, Complex64)>,
    /// Dipole-like exponents `X2 = gamma + a Gamma + i(delta_e + d nu)`.
    b_buckets: Vec<(Complex64, Complex64)>,
    /// Weight of the elastic delta line at the drive frequency, `|<sigma>|^2`.
    elastic_weight: f64,
    report: TruncationReport,
}

fn build_terms(
    mol: &MoleculeSpec,
    drive: &DriveSpec,
    policy: &TruncationPolicy,
) -> Result<(SteadyEmissionTerms, VibrationalMode)> {
    if drive.target != DriveTarget::Molecule {
        return Err(Error::invalid(
            "drive.target",
            "steady-state emission requires molecular driving",
        ));
    }
    let mode = match mol.modes.as_slice() {
        [m] => *m,
        other => {
            return Err(Error::UnsupportedConfiguration(format!(
                "steady-state emission is derived for exactly one vibrational mode, got {}",
                other.len()
            )))
        }
    };
    let gamma = mol.gamma_rad;
    let gv = mode.gamma_vib;
    let nu = mode.nu;
    let lambda = mode.lambda;
    let delta_e = drive.omega_l - mol.omega_e;

    // Six independent phonon indices share the per-index tail budget.
    let cap = per_mode_order(lambda, policy.epsilon / 6.0).min(policy.max_order);
    let s: Vec<f64> = (0..=cap).map(|m| poisson_weight(lambda, m)).collect();
    let partial: f64 = s.iter().sum();
    let prefactor = (4.0 * lambda * lambda).exp();
    let scale = gamma.max(gv).max(nu);

    let mut a_buckets: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); 4 * cap as usize + 1];
    let mut b_map: HashMap<(u32, i64), Complex64> = HashMap::new();

    let n = cap as usize + 1;
    for n2 in 0..n {
        for n3 in 0..n {
            for n4 in 0..n {
                let sign = if (n3 + n4) % 2 == 0 { 1.0 } else { -1.0 };
                for n5 in 0..n {
                    let w2345 = s[n2] * s[n3] * s[n4] * s[n5];
                    for n6 in 0..n {
                        let d2 = Complex64::new(
                            gamma + (n4 + n5 + n6) as f64 * gv,
                            -(delta_e - (n4 + n5 + n6) as f64 * nu),
                        );
                        for n7 in 0..n {
                            let w = prefactor * sign * w2345 * s[n6] * s[n7];
                            let d1 = Complex64::new(
                                gamma + (n7 as f64 - n3 as f64 - n5 as f64) * gv,
                                delta_e - (n3 + n5 + n7) as f64 * nu,
                            );
                            let d3 = Complex64::new(
                                gamma + (n3 + n5 + n7) as f64 * gv,
                                delta_e - (n3 + n5 + n7) as f64 * nu,
                            );
                            let dc = Complex64::new(
                                2.0 * gamma + (n3 + n4 + n6 + n7) as f64 * gv,
                                (n4 as f64 + n6 as f64 - n3 as f64 - n7 as f64) * nu,
                            );
                            if d1.norm() < 1e-12 * scale {
                                return Err(Error::Conditioning(format!(
                                    "vanishing denominator at indices \
                                     (n3={n3}, n5={n5}, n7={n7}) for detuning {delta_e}"
                                )));
                            }
                            let inv_d1d2 = 1.0 / (d1 * d2);
                            let a_coef = w * inv_d1d2;
                            let b_coef = w * ((d2 + d3) / (dc * d2 * d3) - inv_d1d2);

                            let q = n2 + n3 + n4 + n5;
                            a_buckets[q] += a_coef;
                            let key = (
                                (n2 + n4 + n7) as u32,
                                n2 as i64 + n4 as i64 - n7 as i64,
                            );
                            *b_map.entry(key).or_insert(Complex64::new(0.0, 0.0)) += b_coef;
                        }
                    }
                }
            }
        }
    }

    let elastic_weight =
        drive.eta * drive.eta * a_buckets[0].re;
    let a_out: Vec<(Complex64, Complex64)> = a_buckets
        .iter()
        .enumerate()
        .skip(1)
        .map(|(q, &coef)| (Complex64::new(q as f64 * gv, q as f64 * nu), coef))
        .collect();
    let mut b_out: Vec<((u32, i64), Complex64)> = b_map.into_iter().collect();
    b_out.sort_by_key(|&(k, _)| k);
    let b_out = b_out
        .into_iter()
        .map(|((a, d), coef)| {
            (
                Complex64::new(gamma + a as f64 * gv, delta_e + d as f64 * nu),
                coef,
            )
        })
        .collect();

    Ok((
        SteadyEmissionTerms {
            a_buckets: a_out,
            b_buckets: b_out,
            elastic_weight,
            report: TruncationReport {
                retained_weight: partial.powi(6),
                per_mode_orders: vec![cap; 6],
                max_total_order: 6 * cap,
            },
        },
        mode,
    ))
}

/// Steady-state emission spectrum on a grid of frequencies measured in the
/// frame rotating with the drive (`omega = 0` is the laser frequency).
///
/// Returns `2 Re` of the one-sided transform of the dipole autocorrelation.
/// The elastic delta line is excluded from the samples; its weight is
/// available through [`steady_emission_correlation`] as the long-time plateau.
pub fn emission_spectrum_steady(
    mol: &MoleculeSpec,
    drive: &DriveSpec,
    grid: &[f64],
    policy: &TruncationPolicy,
) -> Result<SpectrumResult> {
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("grid", "must be non-empty and strictly increasing"));
    }
    let (terms, _mode) = build_terms(mol, drive, policy)?;
    let eta2 = drive.eta * drive.eta;
    let warnings: Vec<String> = validate_drive(drive, Some(mol), None)
        .into_iter()
        .map(|v| v.to_string())
        .collect();

    let values: Vec<f64> = grid
        .iter()
        .map(|&omega| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(x, coef) in &terms.a_buckets {
                acc += coef / (x + Complex64::new(0.0, omega));
            }
            for &(x, coef) in &terms.b_buckets {
                acc += coef / (x + Complex64::new(0.0, omega));
            }
            2.0 * eta2 * acc.re
        })
        .collect();

    Ok(SpectrumResult {
        grid: grid.to_vec(),
        values: SpectrumValues::Real(values),
        truncation: terms.report,
        warnings,
    })
}

/// Steady-state dipole autocorrelation `<sigma†(tau) sigma(0)>` in the
/// rotating frame, on a grid of non-negative delays. The constant plateau is
/// the elastic weight `|<sigma>|^2`.
pub fn steady_emission_correlation(
    mol: &MoleculeSpec,
    drive: &DriveSpec,
    taus: &[f64],
    policy: &TruncationPolicy,
) -> Result<Vec<Complex64>> {
    if taus.iter().any(|&t| t < 0.0) {
        return Err(Error::invalid("taus", "delays must be non-negative"));
    }
    let (terms, _mode) = build_terms(mol, drive, policy)?;
    let eta2 = drive.eta * drive.eta;
    Ok(taus
        .iter()
        .map(|&tau| {
            let mut acc = Complex64::new(terms.elastic_weight / eta2, 0.0);
            for &(x, coef) in &terms.a_buckets {
                acc += coef * (-x * tau).exp();
            }
            for &(x, coef) in &terms.b_buckets {
                acc += coef * (-x * tau).exp();
            }
            eta2 * acc
        })
        .collect())
}
