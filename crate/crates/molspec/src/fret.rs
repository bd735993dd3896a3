//! Donor-acceptor energy-transfer rates, direct and cavity-assisted, and the
//! resulting pump-probe population dynamics.
//!
//! Rates follow from a perturbative treatment of the dipole-dipole exchange:
//! the donor emission ladder overlaps the acceptor absorption ladder, giving a
//! double sum of Lorentzian resonances at `Delta = n_d nu_d + n_a nu_a`. The
//! cavity-assisted expressions keep, per the derivation, only the
//! contributions decaying with `exp(-2 gamma_d t)` and `exp(-2 kappa t)`;
//! oscillatory cross terms are dropped. Sums run in fixed lexicographic order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FretSpec, MoleculeSpec, Validate, VibrationalMode};
use crate::series::{per_mode_order, poisson_weight, TruncationPolicy};

/// Direct transfer rate with advisory notes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectRate {
    pub kappa_et: f64,
    pub warnings: Vec<String>,
}

/// Channel coefficients of the cavity-assisted transfer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferRates {
    /// Direct dipole-dipole rate (no cavity).
    pub kappa_et: f64,
    /// Dipole-dipole channel including the cavity cross-correction
    /// (coefficient of `P_D(0) exp(-2 gamma_d t)`).
    pub j_cavity_dd: f64,
    /// Purely cavity-mediated channel, `exp(-2 gamma_d t)` part.
    pub j_cavity_pure_slow: f64,
    /// Purely cavity-mediated channel, `exp(-2 kappa t)` part.
    pub j_cavity_pure_fast: f64,
    pub warnings: Vec<String>,
}

/// Donor and acceptor excited populations on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PumpProbeTrace {
    pub times: Vec<f64>,
    pub p_donor: Vec<f64>,
    pub p_acceptor: Vec<f64>,
}

fn single_mode(mol: &MoleculeSpec, which: &'static str) -> Result<VibrationalMode> {
    match mol.modes.as_slice() {
        [m] => Ok(*m),
        other => Err(Error::UnsupportedConfiguration(format!(
            "{which} must carry exactly one vibrational mode for the transfer expressions, got {}",
            other.len()
        ))),
    }
}

fn advisory_warnings(spec: &FretSpec) -> Vec<String> {
    spec.validate()
        .into_iter()
        .filter(|v| v.rule.contains("advisory"))
        .map(|v| v.to_string())
        .collect()
}

struct LadderTerms {
    /// (n_donor, n_acceptor, s_d * s_a) in lexicographic order.
    terms: Vec<(u32, u32, f64)>,
    donor: VibrationalMode,
    acceptor: VibrationalMode,
}

fn ladder(spec: &FretSpec, policy: &TruncationPolicy) -> Result<LadderTerms> {
    let donor = single_mode(&spec.donor, "donor")?;
    let acceptor = single_mode(&spec.acceptor, "acceptor")?;
    let cap_d = per_mode_order(donor.lambda, policy.epsilon / 2.0).min(policy.max_order);
    let cap_a = per_mode_order(acceptor.lambda, policy.epsilon / 2.0).min(policy.max_order);
    let s_d: Vec<f64> = (0..=cap_d).map(|m| poisson_weight(donor.lambda, m)).collect();
    let s_a: Vec<f64> = (0..=cap_a)
        .map(|m| poisson_weight(acceptor.lambda, m))
        .collect();
    let mut terms = Vec::with_capacity(s_d.len() * s_a.len());
    for (nd, &wd) in s_d.iter().enumerate() {
        for (na, &wa) in s_a.iter().enumerate() {
            terms.push((nd as u32, na as u32, wd * wa));
        }
    }
    Ok(LadderTerms {
        terms,
        donor,
        acceptor,
    })
}

/// Direct Förster rate
/// `kappa_ET = sum_(n_d, n_a) 2 s_(n_d) s_(n_a) (gamma_a - gamma_d + n_d Gamma_d + n_a Gamma_a) Omega^2 /
///  [(gamma_a - gamma_d + n_d Gamma_d + n_a Gamma_a)^2 + (Delta - n_d nu_d - n_a nu_a)^2]`.
///
/// The `(0,0)` term vanishes for equal radiative rates and is excluded (with a
/// warning) when `gamma_a < gamma_d` would make its numerator negative; the
/// surviving oscillatory piece of that term carries no secular rate.
pub fn fret_rate_direct(spec: &FretSpec, policy: &TruncationPolicy) -> Result<DirectRate> {
    let ladder = ladder(spec, policy)?;
    let mut warnings = advisory_warnings(spec);
    let kappa_et = direct_sum(spec, &ladder, &mut warnings);
    Ok(DirectRate { kappa_et, warnings })
}

fn direct_sum(spec: &FretSpec, ladder: &LadderTerms, warnings: &mut Vec<String>) -> f64 {
    let gd = spec.donor.gamma_rad;
    let ga = spec.acceptor.gamma_rad;
    let omega2 = spec.omega_dd * spec.omega_dd;
    let mut acc = 0.0;
    for &(nd, na, w) in &ladder.terms {
        let width = ga - gd + nd as f64 * ladder.donor.gamma_vib + na as f64 * ladder.acceptor.gamma_vib;
        if nd == 0 && na == 0 {
            if width < 0.0 {
                warnings.push(format!(
                    "(0,0) term excluded: gamma_a - gamma_d = {width} is negative"
                ));
            }
            // Equal rates make the numerator vanish identically; the residual
            // oscillates at Delta and carries no transfer.
            continue;
        }
        let detune = spec.delta - nd as f64 * ladder.donor.nu - na as f64 * ladder.acceptor.nu;
        acc += 2.0 * w * width * omega2 / (width * width + detune * detune);
    }
    // The excluded (0,0) term re-enters only through its non-oscillatory part,
    // present when the radiative rates differ.
    let width00 = ga - gd;
    if width00 > 0.0 {
        let w00 = poisson_weight(ladder.donor.lambda, 0) * poisson_weight(ladder.acceptor.lambda, 0);
        acc += 2.0 * w00 * width00 * omega2 / (width00 * width00 + spec.delta * spec.delta);
    }
    acc
}

/// Shared constructor for the conjugate pair of cavity poles
/// `kappa - gamma_d + n Gamma_d -+ i (delta_c - n nu_d)`: both members come
/// from one evaluation, so transcription drift between them is impossible.
pub fn cavity_pole_pair(
    kappa: f64,
    gamma_d: f64,
    n_gamma: f64,
    delta_c: f64,
    n_nu: f64,
) -> (num_complex::Complex64, num_complex::Complex64) {
    let z = num_complex::Complex64::new(kappa - gamma_d + n_gamma, -(delta_c - n_nu));
    (z, z.conj())
}

/// Cavity-assisted transfer coefficients.
///
/// `j_cavity_dd` is the dipole-dipole channel with its cavity cross-term;
/// the `j_cavity_pure_*` coefficients come from the field-mediated pathway,
/// split by decay exponent. All three multiply `P_D(0)` in the acceptor rate
/// equation.
pub fn fret_rate_cavity(spec: &FretSpec, policy: &TruncationPolicy) -> Result<TransferRates> {
    let cav = spec.cavity.as_ref().ok_or_else(|| {
        Error::invalid("cavity", "fret_rate_cavity requires cavity parameters")
    })?;
    let ladder = ladder(spec, policy)?;
    let mut warnings = advisory_warnings(spec);
    let kappa_et = direct_sum(spec, &ladder, &mut warnings);

    let gd = spec.donor.gamma_rad;
    let ga = spec.acceptor.gamma_rad;
    let kappa = cav.kappa;
    let delta = spec.delta;
    let delta_c = cav.delta_c;
    let omega = spec.omega_dd;
    let g_prod = cav.g_acceptor * cav.g_donor;
    let g2_prod = (cav.g_acceptor * cav.g_donor).powi(2);
    let scale = [gd, ga, kappa, delta.abs(), delta_c.abs()]
        .into_iter()
        .fold(0.0f64, f64::max);
    let floor = 1e-12 * scale * scale;

    let mut j_dd = 0.0;
    let mut j_pure_slow = 0.0;
    let mut j_pure_fast = 0.0;

    for &(nd, na, w) in &ladder.terms {
        let ngd = nd as f64 * ladder.donor.gamma_vib;
        let nga = na as f64 * ladder.acceptor.gamma_vib;
        let nnd = nd as f64 * ladder.donor.nu;
        let nna = na as f64 * ladder.acceptor.nu;

        let dd_re = ga - gd + ngd + nga;
        let dd_im = delta - nnd - nna;
        let dd2 = dd_re * dd_re + dd_im * dd_im;

        let (cav_p, _cav_p_conj) = cavity_pole_pair(kappa, gd, ngd, delta_c, nnd);
        let cavp2 = cav_p.norm_sqr();
        let cav_m_re = kappa - gd - ngd;
        let cavm2 = cav_m_re * cav_m_re + (delta_c - nnd) * (delta_c - nnd);

        let xc_re = ga + kappa - 2.0 * gd + nga;
        let xc_im = delta - delta_c - nna;
        let xc2 = xc_re * xc_re + xc_im * xc_im;

        let xk_re = ga - kappa + nga;
        let xk2 = xk_re * xk_re + xc_im * xc_im;

        for (name, d2) in [
            ("dipole-dipole", dd2),
            ("cavity(+)", cavp2),
            ("cavity(-)", cavm2),
            ("cross", xc2),
            ("fast", xk2),
        ] {
            if d2 < floor {
                return Err(Error::PoleProximity {
                    n_donor: nd as usize,
                    n_acceptor: na as usize,
                    message: format!("{name} denominator vanishes"),
                });
            }
        }

        // Dipole-dipole channel: the direct Lorentzian is handled by
        // direct_sum; here only the -2 Omega g_a g_d cross correction.
        let cross_num =
            dd_im * (kappa - gd + ngd) + (delta_c - nnd) * dd_re;
        j_dd -= w * 2.0 * omega * g_prod * cross_num / (dd2 * cavp2);

        // Purely cavity-mediated pathway.
        let t1_num = xc_re * (kappa - gd + ngd) + xc_im * (delta_c - nnd);
        let t1 = t1_num / (xc2 * cavp2);
        let t2_num = xc_re * dd_re - xc_im * dd_im;
        let t2 = t2_num / (xc2 * dd2);
        j_pure_slow -= w * 2.0 * omega * g_prod * (t1 + t2);

        let q1 = (kappa - gd) * (kappa - gd) - ngd * ngd + (delta_c - nnd) * (delta_c - nnd);
        let r1 = 2.0 * (delta_c - nnd) * ngd;
        let t3 = (xc_im * q1 + xc_re * r1) / (xc2 * cavp2 * cavm2);
        let t4 = (dd_im * q1 - dd_re * r1) / (dd2 * cavp2 * cavm2);
        j_pure_slow += w * 2.0 * g2_prod * (t3 + t4);

        let t5 = (xc_im * q1 + xk_re * r1) / (xk2 * cavp2 * cavm2);
        let t6 = (xc_im * q1 - xk_re * r1) / (xk2 * cavp2 * cavm2);
        j_pure_fast += w * 2.0 * g2_prod * (t5 + t6);
    }

    Ok(TransferRates {
        kappa_et,
        j_cavity_dd: kappa_et + j_dd,
        j_cavity_pure_slow: j_pure_slow,
        j_cavity_pure_fast: j_pure_fast,
        warnings,
    })
}

/// Closed-form solution of the transfer rate equations
/// `dP_D/dt = -(2 gamma_d + kappa_ET) P_D`,
/// `dP_A/dt = -2 gamma_a P_A + kappa_ET P_D`.
pub fn pump_probe_dynamics(
    spec: &FretSpec,
    p_d0: f64,
    times: &[f64],
    policy: &TruncationPolicy,
) -> Result<PumpProbeTrace> {
    if !(0.0..=1.0).contains(&p_d0) {
        return Err(Error::invalid(
            "p_d0",
            format!("initial donor population must lie in [0, 1], got {p_d0}"),
        ));
    }
    if times.iter().any(|&t| t < 0.0) {
        return Err(Error::invalid("times", "must be non-negative"));
    }
    let kappa_et = fret_rate_direct(spec, policy)?.kappa_et;
    Ok(pump_probe_with_rate(spec, p_d0, times, kappa_et))
}

/// Same closed form with an externally supplied rate.
pub fn pump_probe_with_rate(
    spec: &FretSpec,
    p_d0: f64,
    times: &[f64],
    kappa_et: f64,
) -> PumpProbeTrace {
    let gd = spec.donor.gamma_rad;
    let ga = spec.acceptor.gamma_rad;
    let donor_rate = 2.0 * gd + kappa_et;
    let denom = 2.0 * ga - donor_rate;
    let degenerate = denom.abs() < 1e-12 * ga;

    let p_donor: Vec<f64> = times.iter().map(|&t| p_d0 * (-donor_rate * t).exp()).collect();
    let p_acceptor: Vec<f64> = times
        .iter()
        .map(|&t| {
            if degenerate {
                // Removable singularity: the limit form t exp(-2 gamma_a t).
                kappa_et * p_d0 * t * (-2.0 * ga * t).exp()
            } else {
                kappa_et * p_d0 * ((-donor_rate * t).exp() - (-2.0 * ga * t).exp()) / denom
            }
        })
        .collect();
    PumpProbeTrace {
        times: times.to_vec(),
        p_donor,
        p_acceptor,
    }
}
