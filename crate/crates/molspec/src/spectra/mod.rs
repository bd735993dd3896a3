//! Closed-form molecular and cavity-QED observables: absorption, emission
//! (transient and steady-state), cavity transmission, polariton rates and
//! branching ratios.
//!
//! Every spectrum is a finite, certified multi-index sum over phonon orders.
//! Grid points are evaluated independently with a fixed lexicographic term
//! order, so results are deterministic regardless of evaluation strategy.

mod polariton;
mod steady_emission;

pub use polariton::{polariton_modes, PolaritonModes};
pub use steady_emission::{emission_spectrum_steady, steady_emission_correlation};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    validate_drive, CavitySpec, DriveSpec, DriveTarget, MoleculeSpec, VibrationalMode,
};
use crate::series::{enumerate_indices, TruncationPolicy, TruncationReport};

/// A sampled spectrum plus the truncation certificate and advisory notes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub grid: Vec<f64>,
    pub values: SpectrumValues,
    pub truncation: TruncationReport,
    #[serde(default)]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumValues {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl SpectrumValues {
    pub fn len(&self) -> usize {
        match self {
            SpectrumValues::Real(v) => v.len(),
            SpectrumValues::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_real(&self) -> Option<&[f64]> {
        match self {
            SpectrumValues::Real(v) => Some(v),
            SpectrumValues::Complex(_) => None,
        }
    }

    pub fn as_complex(&self) -> Option<&[Complex64]> {
        match self {
            SpectrumValues::Complex(v) => Some(v),
            SpectrumValues::Real(_) => None,
        }
    }
}

impl SpectrumResult {
    /// Structural invariants: strictly increasing grid, matching lengths,
    /// non-negative real values.
    pub fn check_invariants(&self) -> Result<()> {
        if self.grid.len() != self.values.len() {
            return Err(Error::invalid("values", "length differs from grid"));
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("grid", "must be strictly increasing"));
        }
        if let SpectrumValues::Real(v) = &self.values {
            if v.iter().any(|&x| x < 0.0) {
                return Err(Error::invalid("values", "real spectrum has negative entries"));
            }
        }
        Ok(())
    }

    /// `|t|^2` for complex spectra, identity for real ones.
    pub fn magnitude_squared(&self) -> Vec<f64> {
        match &self.values {
            SpectrumValues::Real(v) => v.clone(),
            SpectrumValues::Complex(v) => v.iter().map(|z| z.norm_sqr()).collect(),
        }
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "must not be empty"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("grid", "must be strictly increasing"));
    }
    Ok(())
}

/// Precomputed per-index resonance data shared by the molecular spectra.
struct ResonanceTerms {
    /// (weight, aggregate linewidth, aggregate shift) per kept index.
    terms: Vec<(f64, f64, f64)>,
    report: TruncationReport,
}

fn resonance_terms(modes: &[VibrationalMode], policy: &TruncationPolicy) -> Result<ResonanceTerms> {
    let series = enumerate_indices(modes, policy)?;
    let terms = series
        .indices
        .iter()
        .map(|(idx, w)| (*w, idx.gamma_total(modes), idx.nu_total(modes)))
        .collect();
    Ok(ResonanceTerms {
        terms,
        report: series.report,
    })
}

/// Steady-state excited population under weak continuous driving, per probe
/// frequency:
/// `P(omega_l) = eta^2 sum_m (prod_k s_(m_k)) [(gamma + Gamma_m)/gamma] /
///  [(gamma + Gamma_m)^2 + (omega_l - omega_e - nu_m)^2]`.
///
/// Resonances sit at the up-shifted absorption lines `omega_e + nu_m`.
pub fn absorption_population(
    mol: &MoleculeSpec,
    drive: &DriveSpec,
    grid: &[f64],
    policy: &TruncationPolicy,
) -> Result<SpectrumResult> {
    if drive.target != DriveTarget::Molecule {
        return Err(Error::invalid(
            "drive.target",
            "absorption profiles require molecular driving",
        ));
    }
    check_grid(grid)?;
    let gamma = mol.gamma_rad;
    let eta2 = drive.eta * drive.eta;
    let res = resonance_terms(&mol.modes, policy)?;
    let warnings = validate_drive(drive, Some(mol), None)
        .into_iter()
        .map(|v| v.to_string())
        .collect();

    let values = grid
        .iter()
        .map(|&omega_l| {
            let detuning = omega_l - mol.omega_e;
            res.terms
                .iter()
                .map(|&(w, gm, nm)| {
                    let width = gamma + gm;
                    let d = detuning - nm;
                    w * (width / gamma) / (width * width + d * d)
                })
                .sum::<f64>()
                * eta2
        })
        .collect();

    Ok(SpectrumResult {
        grid: grid.to_vec(),
        values: SpectrumValues::Real(values),
        truncation: res.report,
        warnings,
    })
}

/// Fluorescence spectrum of a molecule prepared with excited population `p0`
/// and relaxed vibrations:
/// `S(omega) = sum_m (prod_k s_(m_k)) 2 p0 (gamma + Gamma_m) /
///  [(gamma + Gamma_m)^2 + (omega - omega_e + nu_m)^2]`.
///
/// Stokes lines sit red-shifted at `omega_e - nu_m`.
pub fn emission_spectrum_transient(
    mol: &MoleculeSpec,
    p0: f64,
    grid: &[f64],
    policy: &TruncationPolicy,
) -> Result<SpectrumResult> {
    if !(0.0..=1.0).contains(&p0) {
        return Err(Error::invalid(
            "p0",
            format!("initial excited population must lie in [0, 1], got {p0}"),
        ));
    }
    check_grid(grid)?;
    let gamma = mol.gamma_rad;
    let res = resonance_terms(&mol.modes, policy)?;

    let values = grid
        .iter()
        .map(|&omega| {
            let detuning = omega - mol.omega_e;
            res.terms
                .iter()
                .map(|&(w, gm, nm)| {
                    let width = gamma + gm;
                    let d = detuning + nm;
                    w * 2.0 * p0 * width / (width * width + d * d)
                })
                .sum::<f64>()
        })
        .collect();

    Ok(SpectrumResult {
        grid: grid.to_vec(),
        values: SpectrumValues::Real(values),
        truncation: res.report,
        warnings: Vec::new(),
    })
}

/// Cavity transmission amplitude `t_c = kappa <a> / eta_c` for a cavity-driven
/// molecule-cavity system, evaluated per probe frequency with the polariton
/// decomposition recomputed in each rotating frame.
pub fn cavity_transmission(
    mol: &MoleculeSpec,
    cav: &CavitySpec,
    drive: &DriveSpec,
    grid: &[f64],
    policy: &TruncationPolicy,
) -> Result<SpectrumResult> {
    if drive.target != DriveTarget::Cavity {
        return Err(Error::invalid(
            "drive.target",
            "transmission requires cavity driving",
        ));
    }
    check_grid(grid)?;
    let res = resonance_terms(&mol.modes, policy)?;
    let mut warnings: Vec<String> = validate_drive(drive, Some(mol), Some(cav))
        .into_iter()
        .map(|v| v.to_string())
        .collect();

    let mut values = Vec::with_capacity(grid.len());
    let mut degenerate_seen = false;
    for &omega_l in grid {
        let modes = polariton_modes(mol, cav, omega_l);
        values.push(transmission_amplitude(&modes, cav, &res, omega_l)?);
        degenerate_seen |= modes.degenerate;
    }
    if degenerate_seen {
        warnings.push(
            "polariton decomposition degenerate at one or more grid points; \
             resolvent evaluation used there"
                .to_string(),
        );
    }

    Ok(SpectrumResult {
        grid: grid.to_vec(),
        values: SpectrumValues::Complex(values),
        truncation: res.report,
        warnings,
    })
}

/// One transmission amplitude from an already-computed mode decomposition.
fn transmission_amplitude(
    modes: &PolaritonModes,
    cav: &CavitySpec,
    res: &ResonanceTerms,
    omega_l: f64,
) -> Result<Complex64> {
    if modes.degenerate {
        // At an exceptional point the eigenvector expansion breaks down; the
        // resolvent form integrates the same propagator without it.
        return Ok(transmission_resolvent(modes, cav, res, omega_l));
    }
    let det = modes.det_t;
    let scale = modes.t_matrix[0][0].norm() * modes.t_matrix[1][1].norm()
        + modes.t_matrix[0][1].norm() * modes.t_matrix[1][0].norm();
    if det.norm() < 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Conditioning(format!(
            "eigenvector matrix nearly singular (|det T| = {:.3e}) away from the flagged \
             degeneracy threshold",
            det.norm()
        )));
    }
    let c_minus = modes.t_matrix[0][0] * modes.t_matrix[1][1] / det;
    let c_plus = modes.t_matrix[0][1] * modes.t_matrix[1][0] / det;
    let mut acc = Complex64::new(0.0, 0.0);
    for &(w, gm, nm) in &res.terms {
        let d_minus = Complex64::new(
            modes.gamma_minus + gm,
            -(omega_l - modes.omega_minus - nm),
        );
        let d_plus = Complex64::new(modes.gamma_plus + gm, -(omega_l - modes.omega_plus - nm));
        acc += cav.kappa * w * (c_minus / d_minus - c_plus / d_plus);
    }
    Ok(acc)
}

/// Resolvent form `t_c = kappa sum_m w_m [((Gamma_m + i nu_m) I - M)^-1]_22`,
/// valid at exceptional points.
fn transmission_resolvent(
    modes: &PolaritonModes,
    cav: &CavitySpec,
    res: &ResonanceTerms,
    _omega_l: f64,
) -> Complex64 {
    let m = modes.drift;
    let mut acc = Complex64::new(0.0, 0.0);
    for &(w, gm, nm) in &res.terms {
        let z = Complex64::new(gm, nm);
        // B = z I - M; [B^-1]_22 = B_11 / det B.
        let b11 = z - m[0][0];
        let b22 = z - m[1][1];
        let det = b11 * b22 - m[0][1] * m[1][0];
        acc += cav.kappa * w * b11 / det;
    }
    acc
}

/// Dissipative upper-to-lower polariton cross-talk rate for a single-mode
/// molecule at cavity resonance:
/// `kappa_UL = (lambda^2 nu^2 Gamma / 2) / (Gamma^2 + (omega_+ - omega_- - nu)^2)`,
/// with the polariton splitting taken from the drift matrix in the resonant
/// frame `omega_l = omega_e` (and the vibrationally renormalized cavity
/// frequency).
pub fn polariton_crosstalk_rate(mol: &MoleculeSpec, cav: &CavitySpec) -> Result<f64> {
    let mode = single_mode(mol)?;
    let modes = polariton_modes(mol, cav, mol.omega_e);
    let splitting = modes.omega_plus - modes.omega_minus;
    Ok(crosstalk_rate_for_splitting(&mode, splitting))
}

/// The cross-talk closed form for an externally supplied polariton splitting.
pub fn crosstalk_rate_for_splitting(mode: &VibrationalMode, splitting: f64) -> f64 {
    let l2 = mode.lambda * mode.lambda;
    let d = splitting - mode.nu;
    0.5 * l2 * mode.nu * mode.nu * mode.gamma_vib / (mode.gamma_vib.powi(2) + d * d)
}

fn single_mode(mol: &MoleculeSpec) -> Result<VibrationalMode> {
    match mol.modes.as_slice() {
        [m] => Ok(*m),
        other => Err(Error::UnsupportedConfiguration(format!(
            "this expression is derived for exactly one vibrational mode, got {}",
            other.len()
        ))),
    }
}

/// Zero-phonon branching ratio `alpha = exp(-sum_k lambda_k^2)`.
pub fn branching_ratio(mol: &MoleculeSpec) -> f64 {
    (-mol.total_huang_rhys()).exp()
}

/// Cavity-modified branching ratio in the fast-cavity regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurcellBranching {
    /// Coupling to the zero-phonon line, `g00 = g exp(-sum lambda^2 / 2)`.
    pub g00: f64,
    /// Cooperativity `C00 = g00^2 / (kappa gamma)`.
    pub c00: f64,
    /// `alpha_cav = (1 + C00) e^(-sum lambda^2) / (1 + C00 e^(-sum lambda^2))`.
    pub alpha_cav: f64,
    /// Regime advisories; the value is returned regardless.
    pub advisories: Vec<String>,
}

/// `alpha_cav` with its cooperativity, plus advisories when the parameters
/// leave the `kappa >> g00 >> gamma`, `kappa << nu_k` regime the expression
/// assumes.
pub fn purcell_branching_ratio(mol: &MoleculeSpec, cav: &CavitySpec) -> PurcellBranching {
    let s = mol.total_huang_rhys();
    let reduction = (-s).exp();
    let g00 = cav.g * (-s / 2.0).exp();
    let c00 = g00 * g00 / (cav.kappa * mol.gamma_rad);
    let alpha_cav = (1.0 + c00) * reduction / (1.0 + c00 * reduction);

    let mut advisories = Vec::new();
    if g00 > 0.0 && cav.kappa < 10.0 * g00 {
        advisories.push(format!(
            "advisory: kappa = {} is not large against g00 = {g00}; the system may resolve polaritons",
            cav.kappa
        ));
    }
    if g00 > 0.0 && g00 < 10.0 * mol.gamma_rad {
        advisories.push(format!(
            "advisory: g00 = {g00} is not large against gamma = {}",
            mol.gamma_rad
        ));
    }
    if let Some(nu_min) = mol
        .modes
        .iter()
        .map(|m| m.nu)
        .min_by(|a, b| a.total_cmp(b))
    {
        if 10.0 * cav.kappa > nu_min {
            advisories.push(format!(
                "advisory: kappa = {} does not resolve the lowest vibration nu = {nu_min}",
                cav.kappa
            ));
        }
    }

    PurcellBranching {
        g00,
        c00,
        alpha_cav,
        advisories,
    }
}

/// Extra dephasing of the dipole implied by a Lindblad treatment of the
/// vibrational relaxation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DephasingEstimate {
    /// `lambda_k^2 Gamma_k` per mode.
    pub per_mode: Vec<f64>,
    pub total: f64,
    /// The Brownian-noise dissipation model cancels the same contribution
    /// exactly; its estimate is identically zero.
    pub brownian_total: f64,
}

pub fn langevin_dephasing_estimate(mol: &MoleculeSpec) -> DephasingEstimate {
    let per_mode: Vec<f64> = mol
        .modes
        .iter()
        .map(|m| m.huang_rhys() * m.gamma_vib)
        .collect();
    DephasingEstimate {
        total: per_mode.iter().sum(),
        per_mode,
        brownian_total: 0.0,
    }
}

/// Uniform grid helper: `points` samples from `start` to `stop` inclusive.
pub fn linear_grid(start: f64, stop: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2, "grids need at least two points");
    let step = (stop - start) / (points - 1) as f64;
    (0..points).map(|i| start + step * i as f64).collect()
}
