//! Experiment configuration: a strict TOML schema mapping onto the domain
//! types, with full validation before anything runs.
//!
//! All rates are understood in units of the declared `reference_rate` (a
//! purely informational label). Unknown keys are fatal so that misspelled
//! physics parameters cannot be ignored silently.

use serde::{Deserialize, Serialize};

use crate::model::{
    CavitySpec, DriveSpec, DriveTarget, FretSpec, MoleculeSpec, Validate, Violation,
};
use crate::series::TruncationPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Absorption,
    EmissionTransient,
    EmissionSteady,
    CavityTransmission,
    PolaritonRates,
    Branching,
    FretDirect,
    FretCavity,
    PumpProbe,
    OracleCompare,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Absorption => "absorption",
            ExperimentKind::EmissionTransient => "emission-transient",
            ExperimentKind::EmissionSteady => "emission-steady",
            ExperimentKind::CavityTransmission => "cavity-transmission",
            ExperimentKind::PolaritonRates => "polariton-rates",
            ExperimentKind::Branching => "branching",
            ExperimentKind::FretDirect => "fret-direct",
            ExperimentKind::FretCavity => "fret-cavity",
            ExperimentKind::PumpProbe => "pump-probe",
            ExperimentKind::OracleCompare => "oracle-compare",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    pub target: DriveTarget,
    pub eta: f64,
    /// Fixed drive frequency; only meaningful for kinds where the laser is
    /// not swept over the grid (steady-state emission).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_l: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    /// Fock truncation per vibrational mode of each molecule.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vib_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cavity_dim: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Informational name of the rate unit every number is expressed in.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_rate: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub molecule: Option<MoleculeSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cavity: Option<CavitySpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fret: Option<FretSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default)]
    pub policy: TruncationPolicy,
    /// Initial excited (donor) population for transient kinds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_population: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

/// Configuration failure: parse errors carry the TOML context (line/column),
/// semantic failures list every violated rule.
#[derive(Debug)]
pub enum ConfigError {
    Parse(toml::de::Error),
    Invalid(Vec<Violation>),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Parse(e) => write!(f, "config parse error: {e}"),
            ConfigError::Invalid(violations) => {
                writeln!(f, "invalid configuration:")?;
                for v in violations {
                    writeln!(f, "  - {v}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

/// Parse and fully validate a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let config: ExperimentConfig = toml::from_str(text).map_err(ConfigError::Parse)?;
    let violations = config.validate();
    if violations.is_empty() {
        Ok(config)
    } else {
        Err(ConfigError::Invalid(violations))
    }
}

/// Serialize back to TOML; `parse_config(serialize(c)) == c`.
pub fn serialize_config(config: &ExperimentConfig) -> String {
    toml::to_string_pretty(config).expect("config serialization cannot fail")
}

impl ExperimentConfig {
    /// Which sections the kind requires.
    fn requirements(&self) -> (&'static [&'static str], bool) {
        use ExperimentKind::*;
        match self.kind {
            Absorption | EmissionSteady | OracleCompare => (&["molecule", "drive", "grid"], false),
            EmissionTransient => (&["molecule", "grid"], false),
            CavityTransmission => (&["molecule", "cavity", "drive", "grid"], false),
            PolaritonRates | Branching => (&["molecule", "cavity"], false),
            FretDirect => (&["fret"], false),
            FretCavity => (&["fret"], true),
            PumpProbe => (&["fret", "grid"], false),
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let (required, needs_fret_cavity) = self.requirements();
        let has = |name: &str| match name {
            "molecule" => self.molecule.is_some(),
            "cavity" => self.cavity.is_some(),
            "drive" => self.drive.is_some(),
            "grid" => self.grid.is_some(),
            "fret" => self.fret.is_some(),
            _ => unreachable!(),
        };
        for &name in required {
            if !has(name) {
                v.push(Violation {
                    field: name.to_string(),
                    rule: format!("required for kind `{}`", self.kind.as_str()),
                });
            }
        }
        if needs_fret_cavity && self.fret.as_ref().is_some_and(|f| f.cavity.is_none()) {
            v.push(Violation {
                field: "fret.cavity".to_string(),
                rule: "required for kind `fret-cavity`".to_string(),
            });
        }

        if let Some(mol) = &self.molecule {
            for violation in mol.validate() {
                v.push(Violation {
                    field: format!("molecule.{}", violation.field),
                    rule: violation.rule,
                });
            }
        }
        if let Some(cav) = &self.cavity {
            for violation in cav.validate() {
                v.push(Violation {
                    field: format!("cavity.{}", violation.field),
                    rule: violation.rule,
                });
            }
        }
        if let Some(fret) = &self.fret {
            for violation in fret.validate() {
                // Advisory rules are surfaced at run time, not rejected here.
                if !violation.rule.contains("advisory") {
                    v.push(Violation {
                        field: format!("fret.{}", violation.field),
                        rule: violation.rule,
                    });
                }
            }
        }
        if let Some(grid) = &self.grid {
            if grid.points < 2 {
                v.push(Violation {
                    field: "grid.points".to_string(),
                    rule: "need at least two grid points".to_string(),
                });
            }
            if !(grid.start < grid.stop) {
                v.push(Violation {
                    field: "grid.start".to_string(),
                    rule: format!("start ({}) must lie below stop ({})", grid.start, grid.stop),
                });
            }
        }
        if let Some(drive) = &self.drive {
            if !(drive.eta >= 0.0) {
                v.push(Violation {
                    field: "drive.eta".to_string(),
                    rule: "must be non-negative".to_string(),
                });
            }
            if self.kind == ExperimentKind::EmissionSteady && drive.omega_l.is_none() {
                v.push(Violation {
                    field: "drive.omega_l".to_string(),
                    rule: "steady-state emission needs a fixed drive frequency".to_string(),
                });
            }
        }
        if let Some(p0) = self.initial_population {
            if !(0.0..=1.0).contains(&p0) {
                v.push(Violation {
                    field: "initial_population".to_string(),
                    rule: format!("must lie in [0, 1], got {p0}"),
                });
            }
        }
        if !(self.policy.epsilon >= 0.0) {
            v.push(Violation {
                field: "policy.epsilon".to_string(),
                rule: "must be non-negative".to_string(),
            });
        }
        v
    }

    /// The drive with its frequency resolved for a given probe frequency.
    pub fn drive_at(&self, omega_l: f64) -> Option<DriveSpec> {
        self.drive.as_ref().map(|d| DriveSpec {
            target: d.target,
            omega_l: d.omega_l.unwrap_or(omega_l),
            eta: d.eta,
        })
    }

    pub fn grid_points(&self) -> Option<Vec<f64>> {
        self.grid
            .as_ref()
            .map(|g| crate::spectra::linear_grid(g.start, g.stop, g.points))
    }
}
