//! Poisson weights, multi-index enumeration with certified truncation, and
//! displacement-operator correlation functions — the combinatorial core shared
//! by every spectrum.
//!
//! Each damped mode contributes a Poissonian ladder of weights
//! `s_m = exp(-lambda^2) lambda^(2m) / m!` which sum to one. A
//! [`TruncationPolicy`] turns the formally infinite sums into finite ones with
//! a certificate: the retained weight is at least `1 - epsilon`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ThermalBath, VibrationalMode};

/// One combination of per-mode phonon orders `{m_k}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Aggregate linewidth `sum_k m_k Gamma_k`.
    pub fn gamma_total(&self, modes: &[VibrationalMode]) -> f64 {
        self.0
            .iter()
            .zip(modes)
            .map(|(&m, mode)| m as f64 * mode.gamma_vib)
            .sum()
    }

    /// Aggregate shift `sum_k m_k nu_k`.
    pub fn nu_total(&self, modes: &[VibrationalMode]) -> f64 {
        self.0
            .iter()
            .zip(modes)
            .map(|(&m, mode)| m as f64 * mode.nu)
            .sum()
    }
}

/// Tail-mass bound and hard order cap for series truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationPolicy {
    /// Total tail mass allowed across all modes.
    #[serde(default = "TruncationPolicy::default_epsilon")]
    pub epsilon: f64,
    /// Hard cap on `sum_k m_k`.
    #[serde(default = "TruncationPolicy::default_max_order")]
    pub max_order: u32,
}

impl TruncationPolicy {
    fn default_epsilon() -> f64 {
        1e-10
    }

    fn default_max_order() -> u32 {
        200
    }

    pub fn with_epsilon(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            epsilon: Self::default_epsilon(),
            max_order: Self::default_max_order(),
        }
    }
}

/// What a truncated enumeration actually achieved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    /// `sum over kept indices of prod_k s_(m_k)`; certified `>= 1 - epsilon`.
    pub retained_weight: f64,
    /// Per-mode order caps that were enumerated.
    pub per_mode_orders: Vec<u32>,
    /// Largest total order among kept indices.
    pub max_total_order: u32,
}

impl TruncationReport {
    /// Report for a sum with no vibrational content (single empty index).
    pub fn exact() -> Self {
        Self {
            retained_weight: 1.0,
            per_mode_orders: Vec::new(),
            max_total_order: 0,
        }
    }
}

/// Finite multi-index sum with its certificate.
#[derive(Debug, Clone)]
pub struct IndexSeries {
    pub indices: Vec<(MultiIndex, f64)>,
    pub report: TruncationReport,
}

/// Poissonian weight `s_m = exp(-lambda^2) lambda^(2m) / m!`.
///
/// Evaluated in log space beyond `m = 20` so large `lambda^(2m)` cannot
/// overflow before the factorial catches up.
pub fn poisson_weight(lambda: f64, m: u32) -> f64 {
    debug_assert!(lambda >= 0.0);
    let l2 = lambda * lambda;
    if l2 == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    if m <= 20 {
        let mut fact = 1.0;
        for i in 1..=m {
            fact *= i as f64;
        }
        (-l2).exp() * l2.powi(m as i32) / fact
    } else {
        (-l2 + m as f64 * l2.ln() - ln_factorial(m)).exp()
    }
}

fn ln_factorial(m: u32) -> f64 {
    (2..=m as u64).map(|i| (i as f64).ln()).sum()
}

/// Smallest per-mode order `M` with Poisson tail mass below `share`:
/// `sum_(m > M) s_m < share`.
///
/// Certified two ways: a Chernoff bound for the Poisson(`lambda^2`)
/// distribution when `lambda^2 >= 5`, and explicit summation with a geometric
/// remainder bound below that.
pub fn per_mode_order(lambda: f64, share: f64) -> u32 {
    let l2 = lambda * lambda;
    if l2 == 0.0 {
        return 0;
    }
    if l2 >= 5.0 {
        // P(X >= k) <= exp(-l2) (e l2 / k)^k for k > l2.
        let mut k = l2.ceil() as u32 + 1;
        loop {
            let bound = (-l2 + k as f64 * (1.0 + (l2 / k as f64).ln())).exp();
            if bound < share {
                return k - 1;
            }
            k += 1;
        }
    } else {
        // Beyond m the ladder is dominated by a geometric series of ratio
        // l2/(m+2) < 1, so tail(M) <= s_(M+1) / (1 - l2/(M+2)).
        let mut m = l2.ceil() as u32;
        loop {
            let ratio = l2 / (m + 2) as f64;
            if ratio < 1.0 {
                let bound = poisson_weight(lambda, m + 1) / (1.0 - ratio);
                if bound < share {
                    return m;
                }
            }
            m += 1;
        }
    }
}

/// Enumerate every multi-index within the per-mode caps implied by `policy`,
/// in lexicographic order, together with its product weight.
///
/// The per-mode tail budget is `epsilon / n` so the total retained weight is
/// certified `>= 1 - epsilon`; if the `max_order` cap cuts into that budget
/// the achieved weight is reported in the error.
pub fn enumerate_indices(
    modes: &[VibrationalMode],
    policy: &TruncationPolicy,
) -> Result<IndexSeries> {
    if !(policy.epsilon >= 0.0) {
        return Err(Error::invalid("epsilon", "must be non-negative"));
    }
    if modes.is_empty() {
        return Ok(IndexSeries {
            indices: vec![(MultiIndex(Vec::new()), 1.0)],
            report: TruncationReport::exact(),
        });
    }
    let n = modes.len();
    let share = policy.epsilon / n as f64;
    let caps: Vec<u32> = modes
        .iter()
        .map(|m| per_mode_order(m.lambda, share))
        .collect();
    let weights: Vec<Vec<f64>> = modes
        .iter()
        .zip(&caps)
        .map(|(m, &cap)| (0..=cap).map(|k| poisson_weight(m.lambda, k)).collect())
        .collect();

    let mut indices = Vec::new();
    let mut current = vec![0u32; n];
    let mut retained = 0.0;
    let mut max_total = 0u32;
    'outer: loop {
        let total: u32 = current.iter().sum();
        if total <= policy.max_order {
            let w: f64 = current
                .iter()
                .zip(&weights)
                .map(|(&m, ws)| ws[m as usize])
                .product();
            retained += w;
            max_total = max_total.max(total);
            indices.push((MultiIndex(current.clone()), w));
        }
        // lexicographic increment over the box [0, caps]
        for k in (0..n).rev() {
            if current[k] < caps[k] {
                current[k] += 1;
                current[k + 1..].iter_mut().for_each(|c| *c = 0);
                continue 'outer;
            }
        }
        break;
    }

    if retained < 1.0 - policy.epsilon {
        return Err(Error::Truncation {
            achieved: retained,
            epsilon: policy.epsilon,
        });
    }
    Ok(IndexSeries {
        indices,
        report: TruncationReport {
            retained_weight: retained,
            per_mode_orders: caps,
            max_total_order: max_total,
        },
    })
}

/// Two-time displacement correlation `<D(t) D†(t - tau)>` of one mode in its
/// vacuum steady state:
/// `exp(-lambda^2) exp(lambda^2 exp(-(Gamma + i nu) tau))`.
///
/// Only `tau >= 0` is accepted; the opposite ordering is the complex
/// conjugate and callers conjugate explicitly.
pub fn displacement_correlation(mode: &VibrationalMode, tau: f64) -> Result<Complex64> {
    if !(tau >= 0.0) {
        return Err(Error::invalid(
            "tau",
            format!("must be non-negative, got {tau}; conjugate for the reversed ordering"),
        ));
    }
    let l2 = mode.lambda * mode.lambda;
    let decay = (-Complex64::new(mode.gamma_vib, mode.nu) * tau).exp();
    Ok((Complex64::new(-l2, 0.0) + l2 * decay).exp())
}

/// Product of [`displacement_correlation`] over all modes of a molecule.
pub fn displacement_correlation_product(
    modes: &[VibrationalMode],
    tau: f64,
) -> Result<Complex64> {
    let mut acc = Complex64::new(1.0, 0.0);
    for mode in modes {
        acc *= displacement_correlation(mode, tau)?;
    }
    Ok(acc)
}

/// Power spectrum of the vibrational force on the excited orbital:
/// `F(omega; T) = 2 lambda^2 nu^2 Gamma / (Gamma^2 + (omega - nu)^2) * (1 + 2 nbar)`.
pub fn force_spectrum(mode: &VibrationalMode, omega: f64, bath: &ThermalBath) -> f64 {
    let l2 = mode.lambda * mode.lambda;
    let d = omega - mode.nu;
    2.0 * l2 * mode.nu * mode.nu * mode.gamma_vib / (mode.gamma_vib.powi(2) + d * d)
        * (1.0 + 2.0 * bath.nbar)
}

/// Thermal-noise spectrum of the Brownian dissipation model,
/// `S_th(omega) = (2 Gamma omega / nu) [coth(omega / 2T) + 1]`,
/// which reduces to `(4 omega Gamma / nu) theta(omega)` at `T = 0`.
///
/// The bath's `nbar` is interpreted at the mode frequency `nu` and fixes the
/// temperature.
pub fn brownian_thermal_spectrum(mode: &VibrationalMode, omega: f64, bath: &ThermalBath) -> f64 {
    let prefactor = 2.0 * mode.gamma_vib / mode.nu;
    match bath.temperature(mode.nu) {
        None => {
            if omega > 0.0 {
                2.0 * prefactor * omega
            } else {
                0.0
            }
        }
        Some(t) => {
            if omega == 0.0 {
                // coth(x) -> 1/x: the spectrum tends to 4 Gamma T / nu.
                return 2.0 * prefactor * t;
            }
            let x = omega / (2.0 * t);
            prefactor * omega * (coth(x) + 1.0)
        }
    }
}

fn coth(x: f64) -> f64 {
    // 1/tanh overflows gracefully: tanh saturates to +-1.
    1.0 / x.tanh()
}

/// Damping rate recovered from the spectrum asymmetry,
/// `(S_th(nu) - S_th(-nu)) / 2`; equals `2 Gamma` identically.
pub fn brownian_damping_estimate(mode: &VibrationalMode, bath: &ThermalBath) -> f64 {
    (brownian_thermal_spectrum(mode, mode.nu, bath)
        - brownian_thermal_spectrum(mode, -mode.nu, bath))
        / 2.0
}

/// Occupancy estimator `S_th(-nu) / [S_th(nu) + S_th(-nu)]` as printed in the
/// source model; evaluates to `nbar / (2 nbar + 1)`.
pub fn brownian_occupancy_ratio(mode: &VibrationalMode, bath: &ThermalBath) -> f64 {
    let up = brownian_thermal_spectrum(mode, mode.nu, bath);
    let down = brownian_thermal_spectrum(mode, -mode.nu, bath);
    if up + down == 0.0 {
        0.0
    } else {
        down / (up + down)
    }
}

/// Momentum-quadrature correlation `<p(t) p(t')>` at `T = 0` from the damped
/// ladder-operator picture: with `p = i (b† - b)/sqrt(2)` the only surviving
/// second moment is `<b(t) b†(t')>`, leaving `exp(-(Gamma + i nu) |tau|) / 2`
/// with conjugation for `tau < 0`.
pub fn pp_correlation_langevin(mode: &VibrationalMode, tau: f64) -> Complex64 {
    // -(1/2) [ <b† b†> - <b† b> - <b b†> + <b b> ] with all but <b b†> zero.
    let bbdag = if tau >= 0.0 {
        (-Complex64::new(mode.gamma_vib, mode.nu) * tau).exp()
    } else {
        (-Complex64::new(mode.gamma_vib, -mode.nu) * (-tau)).exp()
    };
    0.5 * bbdag
}

/// The same correlation in the Brownian noise model (quadrature equations of
/// motion with thermal forcing), in its closed piecewise form.
pub fn pp_correlation_brownian(mode: &VibrationalMode, tau: f64) -> Complex64 {
    if tau >= 0.0 {
        0.5 * (-Complex64::new(mode.gamma_vib, mode.nu) * tau).exp()
    } else {
        0.5 * (-Complex64::new(mode.gamma_vib, -mode.nu) * (-tau)).exp()
    }
}
