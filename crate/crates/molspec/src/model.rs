//! Domain types shared by every other module, plus parameter validation.
//!
//! All types are immutable value objects. Validation never panics and never
//! errors: [`Validate::validate`] returns the list of violated rules so a
//! caller can decide whether to proceed. Hard errors are reserved for
//! operations that cannot produce a value at all.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One damped vibrational mode of the Holstein model.
///
/// `lambda` is dimensionless (square root of the Huang-Rhys factor); `nu` and
/// `gamma_vib` share the global rate unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VibrationalMode {
    pub nu: f64,
    pub gamma_vib: f64,
    pub lambda: f64,
}

impl VibrationalMode {
    pub fn new(nu: f64, gamma_vib: f64, lambda: f64) -> Self {
        Self {
            nu,
            gamma_vib,
            lambda,
        }
    }

    /// Huang-Rhys factor `lambda^2`.
    pub fn huang_rhys(&self) -> f64 {
        self.lambda * self.lambda
    }
}

/// Electronic two-level system with its vibrational environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoleculeSpec {
    pub omega_e: f64,
    pub gamma_rad: f64,
    #[serde(default)]
    pub modes: Vec<VibrationalMode>,
}

impl MoleculeSpec {
    pub fn two_level(omega_e: f64, gamma_rad: f64) -> Self {
        Self {
            omega_e,
            gamma_rad,
            modes: Vec::new(),
        }
    }

    pub fn with_modes(omega_e: f64, gamma_rad: f64, modes: Vec<VibrationalMode>) -> Self {
        Self {
            omega_e,
            gamma_rad,
            modes,
        }
    }

    /// Sum of Huang-Rhys factors `sum_k lambda_k^2`.
    pub fn total_huang_rhys(&self) -> f64 {
        self.modes.iter().map(VibrationalMode::huang_rhys).sum()
    }

    /// Vibronic frequency shift `sum_k lambda_k^2 nu_k`.
    pub fn polaron_shift(&self) -> f64 {
        self.modes.iter().map(|m| m.huang_rhys() * m.nu).sum()
    }

    /// Shifted electronic transition `omega_e + sum_k lambda_k^2 nu_k`,
    /// derived on demand and never stored.
    pub fn polaron_shifted_transition(&self) -> f64 {
        self.omega_e + self.polaron_shift()
    }
}

/// Single optical cavity mode coupled via excitation exchange at rate `g`.
///
/// `g` is real and non-negative; for one or two emitters a global phase
/// rotation removes any coupling phase, and no observable in this crate
/// depends on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySpec {
    pub omega_c: f64,
    pub kappa: f64,
    pub g: f64,
}

impl CavitySpec {
    pub fn new(omega_c: f64, kappa: f64, g: f64) -> Self {
        Self { omega_c, kappa, g }
    }
}

/// What the laser addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriveTarget {
    Molecule,
    Cavity,
}

/// Classical pump at frequency `omega_l` with amplitude `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSpec {
    pub target: DriveTarget,
    pub omega_l: f64,
    pub eta: f64,
}

impl DriveSpec {
    pub fn molecule(omega_l: f64, eta: f64) -> Self {
        Self {
            target: DriveTarget::Molecule,
            omega_l,
            eta,
        }
    }

    pub fn cavity(omega_l: f64, eta: f64) -> Self {
        Self {
            target: DriveTarget::Cavity,
            omega_l,
            eta,
        }
    }

    pub fn detuned(&self, omega_l: f64) -> Self {
        Self { omega_l, ..*self }
    }
}

/// Thermal occupancy of a vibrational bath. `nbar = 0` is the `T = 0` limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalBath {
    pub nbar: f64,
}

impl ThermalBath {
    pub fn zero() -> Self {
        Self { nbar: 0.0 }
    }

    pub fn from_nbar(nbar: f64) -> Self {
        Self { nbar }
    }

    /// Occupancy of a mode at frequency `nu` for temperature `t`
    /// (`k_B = hbar = 1`): `nbar = 1/(exp(nu/t) - 1)`.
    pub fn from_temperature(t: f64, nu: f64) -> Self {
        if t <= 0.0 {
            return Self::zero();
        }
        Self {
            nbar: 1.0 / ((nu / t).exp() - 1.0),
        }
    }

    /// Temperature that reproduces `nbar` at mode frequency `nu`; `None` at
    /// `nbar = 0` (zero temperature).
    pub fn temperature(&self, nu: f64) -> Option<f64> {
        if self.nbar <= 0.0 {
            None
        } else {
            Some(nu / (1.0 + 1.0 / self.nbar).ln())
        }
    }
}

/// Nuclear-coordinate data from which the vibronic coupling derives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    /// Effective mass of the vibration.
    pub mu: f64,
    /// Vibration frequency.
    pub nu: f64,
    /// Mismatch between ground- and excited-state equilibrium coordinates.
    pub r_ge: f64,
}

impl GeometrySpec {
    /// Zero-point-motion spread `sqrt(1/(2 mu nu))`, derived and never stored.
    pub fn r_zpm(&self) -> f64 {
        (1.0 / (2.0 * self.mu * self.nu)).sqrt()
    }
}

/// Cavity parameters for cavity-assisted energy transfer: per-molecule
/// couplings and the donor-cavity detuning `delta_c = omega_d - omega_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FretCavity {
    pub kappa: f64,
    pub g_donor: f64,
    pub g_acceptor: f64,
    pub delta_c: f64,
}

/// Donor-acceptor pair with dipole-dipole exchange rate `omega_dd` and
/// electronic mismatch `delta = omega_d - omega_a > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FretSpec {
    pub donor: MoleculeSpec,
    pub acceptor: MoleculeSpec,
    pub omega_dd: f64,
    pub delta: f64,
    #[serde(default)]
    pub cavity: Option<FretCavity>,
}

/// A broken invariant: which field, and the rule it violates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl Violation {
    fn new(field: impl Into<String>, rule: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            rule: rule.into(),
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

/// Invariant checking. An empty list means the value is usable as-is;
/// advisory rules (weak drive, perturbative regime) also surface here.
pub trait Validate {
    fn validate(&self) -> Vec<Violation>;
}

impl Validate for VibrationalMode {
    fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if !(self.nu > 0.0) {
            v.push(Violation::new("nu", "must be positive"));
        }
        if !(self.gamma_vib > 0.0) {
            v.push(Violation::new("gamma_vib", "must be positive"));
        }
        if !(self.lambda >= 0.0) {
            v.push(Violation::new("lambda", "must be non-negative"));
        }
        v
    }
}

impl Validate for MoleculeSpec {
    fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if !(self.gamma_rad > 0.0) {
            v.push(Violation::new("gamma_rad", "must be positive"));
        }
        for (k, mode) in self.modes.iter().enumerate() {
            for violation in mode.validate() {
                v.push(Violation::new(
                    format!("modes[{k}].{}", violation.field),
                    violation.rule,
                ));
            }
        }
        v
    }
}

impl Validate for CavitySpec {
    fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if !(self.kappa > 0.0) {
            v.push(Violation::new("kappa", "must be positive"));
        }
        if !(self.g >= 0.0) {
            v.push(Violation::new("g", "must be non-negative"));
        }
        v
    }
}

impl Validate for DriveSpec {
    fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if !(self.eta >= 0.0) {
            v.push(Violation::new("eta", "must be non-negative"));
        }
        v
    }
}

impl Validate for ThermalBath {
    fn validate(&self) -> Vec<Violation> {
        if self.nbar >= 0.0 {
            Vec::new()
        } else {
            vec![Violation::new("nbar", "must be non-negative")]
        }
    }
}

impl Validate for GeometrySpec {
    fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if !(self.mu > 0.0) {
            v.push(Violation::new("mu", "must be positive"));
        }
        if !(self.nu > 0.0) {
            v.push(Violation::new("nu", "must be positive"));
        }
        v
    }
}

impl Validate for FretSpec {
    fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        for (name, mol) in [("donor", &self.donor), ("acceptor", &self.acceptor)] {
            for violation in mol.validate() {
                v.push(Violation::new(
                    format!("{name}.{}", violation.field),
                    violation.rule,
                ));
            }
        }
        if !(self.delta > 0.0) {
            v.push(Violation::new(
                "delta",
                "donor must sit above the acceptor (delta > 0)",
            ));
        }
        let omega_gap = self.donor.omega_e - self.acceptor.omega_e;
        if (omega_gap - self.delta).abs() > 1e-9 * self.delta.abs().max(1.0) {
            v.push(Violation::new(
                "delta",
                format!(
                    "inconsistent with omega_e mismatch (delta = {}, omega_d - omega_a = {omega_gap})",
                    self.delta
                ),
            ));
        }
        if !(self.omega_dd >= 0.0) {
            v.push(Violation::new("omega_dd", "must be non-negative"));
        }
        // Perturbative treatment of the exchange requires the acceptor
        // vibrations to relax faster than the exchange proceeds.
        if let Some(gamma_min) = self
            .acceptor
            .modes
            .iter()
            .map(|m| m.gamma_vib)
            .min_by(|a, b| a.total_cmp(b))
        {
            if self.omega_dd >= gamma_min {
                v.push(Violation::new(
                    "omega_dd",
                    format!(
                        "advisory: exchange rate {} is not small against the acceptor relaxation {gamma_min}",
                        self.omega_dd
                    ),
                ));
            }
        }
        if let Some(cav) = &self.cavity {
            if !(cav.kappa > 0.0) {
                v.push(Violation::new("cavity.kappa", "must be positive"));
            }
            if !(cav.g_donor >= 0.0) {
                v.push(Violation::new("cavity.g_donor", "must be non-negative"));
            }
            if !(cav.g_acceptor >= 0.0) {
                v.push(Violation::new("cavity.g_acceptor", "must be non-negative"));
            }
        }
        v
    }
}

/// Fraction of the relevant linewidth above which a pump stops being "weak".
/// Advisory only; nothing refuses to run above it.
pub const WEAK_DRIVE_FRACTION: f64 = 0.1;

/// Weak-drive advisory for a drive aimed at a specific system. The comparison
/// scale is `gamma_rad` for molecular pumping and `kappa` for cavity pumping.
pub fn validate_drive(
    drive: &DriveSpec,
    molecule: Option<&MoleculeSpec>,
    cavity: Option<&CavitySpec>,
) -> Vec<Violation> {
    let mut v = drive.validate();
    let scale = match drive.target {
        DriveTarget::Molecule => molecule.map(|m| m.gamma_rad),
        DriveTarget::Cavity => cavity.map(|c| c.kappa),
    };
    if let Some(scale) = scale {
        if drive.eta > WEAK_DRIVE_FRACTION * scale {
            v.push(Violation::new(
                "eta",
                format!(
                    "advisory: drive amplitude {} exceeds {}% of the linewidth {scale}; \
                     weak-drive expressions are second order in eta",
                    drive.eta,
                    WEAK_DRIVE_FRACTION * 100.0
                ),
            ));
        }
    }
    v
}

/// Vibronic coupling from nuclear geometry:
/// `lambda = mu nu R_ge r_zpm = R_ge sqrt(mu nu / 2)`.
pub fn huang_rhys_from_geometry(geom: &GeometrySpec) -> Result<f64> {
    if !(geom.mu > 0.0) {
        return Err(Error::invalid("mu", format!("must be positive, got {}", geom.mu)));
    }
    if !(geom.nu > 0.0) {
        return Err(Error::invalid("nu", format!("must be positive, got {}", geom.nu)));
    }
    Ok(geom.r_ge * (geom.mu * geom.nu / 2.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn huang_rhys_zero_displacement() {
        let geom = GeometrySpec {
            mu: 1.0,
            nu: 1.0,
            r_ge: 0.0,
        };
        assert_eq!(huang_rhys_from_geometry(&geom).unwrap(), 0.0);
    }

    #[test]
    fn huang_rhys_closed_form() {
        // lambda = R_ge sqrt(mu nu / 2), evaluated directly.
        let geom = GeometrySpec {
            mu: 2.0,
            nu: 2.0,
            r_ge: 1.0,
        };
        assert_relative_eq!(
            huang_rhys_from_geometry(&geom).unwrap(),
            std::f64::consts::SQRT_2,
            max_relative = 1e-15
        );
        let geom = GeometrySpec {
            mu: 1.0,
            nu: 4.0,
            r_ge: 0.5,
        };
        assert_relative_eq!(
            huang_rhys_from_geometry(&geom).unwrap(),
            0.7071067811865476,
            max_relative = 1e-15
        );
    }

    #[test]
    fn huang_rhys_rejects_bad_geometry() {
        let geom = GeometrySpec {
            mu: -1.0,
            nu: 1.0,
            r_ge: 1.0,
        };
        assert!(matches!(
            huang_rhys_from_geometry(&geom),
            Err(Error::InvalidParameter { field: "mu", .. })
        ));
        let geom = GeometrySpec {
            mu: 1.0,
            nu: 0.0,
            r_ge: 1.0,
        };
        assert!(huang_rhys_from_geometry(&geom).is_err());
    }

    #[test]
    fn mode_validation() {
        assert!(VibrationalMode::new(1.0, 0.1, 0.3).validate().is_empty());
        let bad = VibrationalMode::new(-1.0, 0.1, 0.3).validate();
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].field, "nu");
    }

    #[test]
    fn weak_drive_advisory() {
        let mol = MoleculeSpec::two_level(100.0, 1.0);
        let strong = DriveSpec::molecule(100.0, 0.5);
        let v = validate_drive(&strong, Some(&mol), None);
        assert!(v.iter().any(|x| x.field == "eta" && x.rule.contains("advisory")));
        let weak = DriveSpec::molecule(100.0, 0.05);
        assert!(validate_drive(&weak, Some(&mol), None).is_empty());
    }

    #[test]
    fn polaron_shift_is_derived() {
        let mol = MoleculeSpec::with_modes(
            10.0,
            1.0,
            vec![
                VibrationalMode::new(2.0, 0.5, 1.0),
                VibrationalMode::new(3.0, 0.5, 0.5),
            ],
        );
        assert_relative_eq!(mol.polaron_shift(), 2.0 + 0.75, max_relative = 1e-15);
        assert_relative_eq!(
            mol.polaron_shifted_transition(),
            12.75,
            max_relative = 1e-15
        );
        assert_relative_eq!(mol.total_huang_rhys(), 1.25, max_relative = 1e-15);
    }

    #[test]
    fn thermal_bath_roundtrip() {
        let bath = ThermalBath::from_temperature(2.0, 1.0);
        let t = bath.temperature(1.0).unwrap();
        assert_relative_eq!(t, 2.0, max_relative = 1e-12);
        assert!(ThermalBath::zero().temperature(1.0).is_none());
    }

    #[test]
    fn fret_validation_flags() {
        let donor = MoleculeSpec::with_modes(500.0, 1.0, vec![VibrationalMode::new(250.0, 30.0, 0.6)]);
        let acceptor = MoleculeSpec::with_modes(0.0, 1.0, vec![VibrationalMode::new(250.0, 30.0, 0.4)]);
        let spec = FretSpec {
            donor: donor.clone(),
            acceptor: acceptor.clone(),
            omega_dd: 15.0,
            delta: 500.0,
            cavity: None,
        };
        assert!(spec.validate().is_empty());

        let strong = FretSpec {
            omega_dd: 40.0,
            ..spec.clone()
        };
        assert!(strong
            .validate()
            .iter()
            .any(|v| v.field == "omega_dd" && v.rule.contains("advisory")));

        let upside_down = FretSpec {
            delta: -500.0,
            donor: MoleculeSpec { omega_e: -500.0, ..donor },
            ..spec
        };
        assert!(upside_down.validate().iter().any(|v| v.field == "delta"));
    }

    proptest! {
        // lambda depends on geometry only through mu*nu and R_ge.
        #[test]
        fn huang_rhys_mass_frequency_tradeoff(
            mu in 1e-3f64..1e3,
            nu in 1e-3f64..1e3,
            r in -10.0f64..10.0,
            c in 1e-2f64..1e2,
        ) {
            let a = huang_rhys_from_geometry(&GeometrySpec { mu, nu, r_ge: r }).unwrap();
            let b = huang_rhys_from_geometry(&GeometrySpec { mu: mu * c, nu: nu / c, r_ge: r }).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }
}
