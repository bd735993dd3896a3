//! Experiment orchestration: run a validated configuration and serialize the
//! results for external plotting.
//!
//! Output is deterministic byte-for-byte for a fixed configuration and crate
//! version: numbers use the shortest round-trip decimal representation and
//! field order is fixed. The JSON form embeds the full configuration, the
//! truncation certificate and every advisory note; CSV columns per kind are
//! documented on [`run`].

use std::io::Write as _;
use std::path::PathBuf;

use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind, OutputFormat};
use crate::error::Error;
use crate::fret;
use crate::model::{validate_drive, ThermalBath};
use crate::oracle;
use crate::series::TruncationReport;
use crate::spectra;

/// Exit codes for the command-line front end.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_TRUNCATION: i32 = 4;

pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Truncation { .. } => EXIT_TRUNCATION,
        Error::InvalidParameter { .. } | Error::UnsupportedConfiguration(_) => EXIT_CONFIG,
        _ => EXIT_NUMERICAL,
    }
}

/// Run-time knobs the CLI may override.
#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub output: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub epsilon: Option<f64>,
    /// Worker-thread cap for grid sweeps (oracle comparisons).
    pub jobs: Option<usize>,
}

/// Result table: named columns over a shared row count, plus metadata.
#[derive(Debug, Clone, Serialize)]
pub struct RunArtifact {
    pub kind: ExperimentKind,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub truncation: TruncationReport,
    pub warnings: Vec<String>,
    pub config: ExperimentConfig,
}

impl RunArtifact {
    fn new(
        kind: ExperimentKind,
        columns: &[&str],
        rows: Vec<Vec<f64>>,
        truncation: TruncationReport,
        warnings: Vec<String>,
        config: &ExperimentConfig,
    ) -> Self {
        Self {
            kind,
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows,
            truncation,
            warnings,
            config: config.clone(),
        }
    }

    /// CSV rendering: a header line and one row per grid point, shortest
    /// round-trip decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for v in row {
                if !first {
                    out.push(',');
                }
                first = false;
                out.push_str(&format!("{v}"));
            }
            out.push('\n');
        }
        out
    }

    /// JSON rendering with the provenance block.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("artifact serialization");
        s.push('\n');
        s
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

/// Execute a validated configuration.
///
/// CSV columns by kind:
/// - `absorption`: `omega_l,population`
/// - `emission-transient`, `emission-steady`: `omega,intensity`
/// - `cavity-transmission`: `omega_l,t_re,t_im,t_abs2`
/// - `polariton-rates`: `omega_plus,omega_minus,gamma_plus,gamma_minus,kappa_ul,degenerate`
/// - `branching`: `alpha,alpha_cav,c00,g00`
/// - `fret-direct`: `kappa_et`
/// - `fret-cavity`: `kappa_et,j_cavity_dd,j_cavity_pure_slow,j_cavity_pure_fast`
/// - `pump-probe`: `t,P_D,P_A,P_D_uncoupled,P_A_tangent`
/// - `oracle-compare`: `omega_l,analytic,oracle,rel_error`
pub fn run(config: &ExperimentConfig, overrides: &RunOverrides) -> crate::Result<RunArtifact> {
    let mut config = config.clone();
    if let Some(eps) = overrides.epsilon {
        config.policy.epsilon = eps;
    }
    let policy = config.policy;

    let artifact = match config.kind {
        ExperimentKind::Absorption => {
            let mol = config.molecule.as_ref().expect("validated");
            let grid = config.grid_points().expect("validated");
            let drive = config.drive_at(0.0).expect("validated");
            let spec = spectra::absorption_population(mol, &drive, &grid, &policy)?;
            let values = spec.values.as_real().unwrap();
            let rows = grid
                .iter()
                .zip(values)
                .map(|(&w, &v)| vec![w, v])
                .collect();
            RunArtifact::new(
                config.kind,
                &["omega_l", "population"],
                rows,
                spec.truncation,
                spec.warnings,
                &config,
            )
        }
        ExperimentKind::EmissionTransient => {
            let mol = config.molecule.as_ref().expect("validated");
            let grid = config.grid_points().expect("validated");
            let p0 = config.initial_population.unwrap_or(1.0);
            let spec = spectra::emission_spectrum_transient(mol, p0, &grid, &policy)?;
            let values = spec.values.as_real().unwrap();
            let rows = grid
                .iter()
                .zip(values)
                .map(|(&w, &v)| vec![w, v])
                .collect();
            RunArtifact::new(
                config.kind,
                &["omega", "intensity"],
                rows,
                spec.truncation,
                spec.warnings,
                &config,
            )
        }
        ExperimentKind::EmissionSteady => {
            let mol = config.molecule.as_ref().expect("validated");
            let grid = config.grid_points().expect("validated");
            let drive = config.drive_at(f64::NAN).expect("validated");
            let spec = spectra::emission_spectrum_steady(mol, &drive, &grid, &policy)?;
            let values = spec.values.as_real().unwrap();
            let rows = grid
                .iter()
                .zip(values)
                .map(|(&w, &v)| vec![w, v])
                .collect();
            RunArtifact::new(
                config.kind,
                &["omega", "intensity"],
                rows,
                spec.truncation,
                spec.warnings,
                &config,
            )
        }
        ExperimentKind::CavityTransmission => {
            let mol = config.molecule.as_ref().expect("validated");
            let cav = config.cavity.as_ref().expect("validated");
            let grid = config.grid_points().expect("validated");
            let drive = config.drive_at(0.0).expect("validated");
            let spec = spectra::cavity_transmission(mol, cav, &drive, &grid, &policy)?;
            let values = spec.values.as_complex().unwrap();
            let rows = grid
                .iter()
                .zip(values)
                .map(|(&w, t)| vec![w, t.re, t.im, t.norm_sqr()])
                .collect();
            RunArtifact::new(
                config.kind,
                &["omega_l", "t_re", "t_im", "t_abs2"],
                rows,
                spec.truncation,
                spec.warnings,
                &config,
            )
        }
        ExperimentKind::PolaritonRates => {
            let mol = config.molecule.as_ref().expect("validated");
            let cav = config.cavity.as_ref().expect("validated");
            let modes = spectra::polariton_modes(mol, cav, mol.omega_e);
            let kappa_ul = if mol.modes.len() == 1 {
                spectra::polariton_crosstalk_rate(mol, cav)?
            } else {
                f64::NAN
            };
            let rows = vec![vec![
                modes.omega_plus,
                modes.omega_minus,
                modes.gamma_plus,
                modes.gamma_minus,
                kappa_ul,
                if modes.degenerate { 1.0 } else { 0.0 },
            ]];
            let mut warnings = Vec::new();
            if modes.degenerate {
                warnings.push("drift matrix degenerate (exceptional point)".to_string());
            }
            if mol.modes.len() != 1 {
                warnings.push(
                    "kappa_ul requires exactly one vibrational mode; reported as NaN".to_string(),
                );
            }
            RunArtifact::new(
                config.kind,
                &[
                    "omega_plus",
                    "omega_minus",
                    "gamma_plus",
                    "gamma_minus",
                    "kappa_ul",
                    "degenerate",
                ],
                rows,
                TruncationReport::exact(),
                warnings,
                &config,
            )
        }
        ExperimentKind::Branching => {
            let mol = config.molecule.as_ref().expect("validated");
            let cav = config.cavity.as_ref().expect("validated");
            let alpha = spectra::branching_ratio(mol);
            let purcell = spectra::purcell_branching_ratio(mol, cav);
            let rows = vec![vec![alpha, purcell.alpha_cav, purcell.c00, purcell.g00]];
            RunArtifact::new(
                config.kind,
                &["alpha", "alpha_cav", "c00", "g00"],
                rows,
                TruncationReport::exact(),
                purcell.advisories,
                &config,
            )
        }
        ExperimentKind::FretDirect => {
            let spec = config.fret.as_ref().expect("validated");
            let rate = fret::fret_rate_direct(spec, &policy)?;
            RunArtifact::new(
                config.kind,
                &["kappa_et"],
                vec![vec![rate.kappa_et]],
                TruncationReport::exact(),
                rate.warnings,
                &config,
            )
        }
        ExperimentKind::FretCavity => {
            let spec = config.fret.as_ref().expect("validated");
            let rates = fret::fret_rate_cavity(spec, &policy)?;
            RunArtifact::new(
                config.kind,
                &[
                    "kappa_et",
                    "j_cavity_dd",
                    "j_cavity_pure_slow",
                    "j_cavity_pure_fast",
                ],
                vec![vec![
                    rates.kappa_et,
                    rates.j_cavity_dd,
                    rates.j_cavity_pure_slow,
                    rates.j_cavity_pure_fast,
                ]],
                TruncationReport::exact(),
                rates.warnings,
                &config,
            )
        }
        ExperimentKind::PumpProbe => {
            let spec = config.fret.as_ref().expect("validated");
            let times = config.grid_points().expect("validated");
            let p0 = config.initial_population.unwrap_or(1.0);
            let rate = fret::fret_rate_direct(spec, &policy)?;
            let trace = fret::pump_probe_with_rate(spec, p0, &times, rate.kappa_et);
            let rows = times
                .iter()
                .enumerate()
                .map(|(i, &t)| {
                    vec![
                        t,
                        trace.p_donor[i],
                        trace.p_acceptor[i],
                        p0 * (-2.0 * spec.donor.gamma_rad * t).exp(),
                        rate.kappa_et * p0 * t,
                    ]
                })
                .collect();
            RunArtifact::new(
                config.kind,
                &["t", "P_D", "P_A", "P_D_uncoupled", "P_A_tangent"],
                rows,
                TruncationReport::exact(),
                rate.warnings,
                &config,
            )
        }
        ExperimentKind::OracleCompare => oracle_compare(&config, overrides)?,
    };

    Ok(artifact)
}

/// Compare the analytic absorption profile against master-equation steady
/// states at the analytic peak positions.
fn oracle_compare(
    config: &ExperimentConfig,
    overrides: &RunOverrides,
) -> crate::Result<RunArtifact> {
    let mol = config.molecule.as_ref().expect("validated");
    let grid = config.grid_points().expect("validated");
    let drive = config.drive_at(0.0).expect("validated");
    let policy = config.policy;
    let spec = spectra::absorption_population(mol, &drive, &grid, &policy)?;
    let values = spec.values.as_real().unwrap();

    // Analytic local maxima, strongest first, at most six.
    let mut peaks: Vec<(usize, f64)> = (1..grid.len() - 1)
        .filter(|&i| values[i] > values[i - 1] && values[i] > values[i + 1])
        .map(|i| (i, values[i]))
        .collect();
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    peaks.truncate(6);
    peaks.sort_by_key(|&(i, _)| i);

    let vib_dim = config
        .oracle
        .as_ref()
        .and_then(|o| o.vib_dim)
        .unwrap_or_else(|| {
            mol.modes
                .iter()
                .map(|m| oracle::HilbertLayout::suggested_vib_dim(m.lambda))
                .max()
                .unwrap_or(2)
        });
    let layout = oracle::HilbertLayout::for_molecules(std::slice::from_ref(mol), vib_dim, None);
    let mut warnings = layout.truncation_advisories(std::slice::from_ref(mol));
    warnings.extend(
        validate_drive(&drive, Some(mol), None)
            .into_iter()
            .map(|v| v.to_string()),
    );

    let jobs = overrides
        .jobs
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
        .max(1);
    let points: Vec<f64> = peaks.iter().map(|&(i, _)| grid[i]).collect();
    let mut oracle_values = vec![0.0f64; points.len()];
    let chunk = points.len().div_ceil(jobs);
    std::thread::scope(|scope| -> crate::Result<()> {
        let mut handles = Vec::new();
        for (cidx, omegas) in points.chunks(chunk).enumerate() {
            let layout = &layout;
            handles.push((
                cidx,
                scope.spawn(move || -> crate::Result<Vec<f64>> {
                    let mut out = Vec::with_capacity(omegas.len());
                    for &omega_l in omegas {
                        let liouv = oracle::build_system(
                            std::slice::from_ref(mol),
                            None,
                            None,
                            Some(&drive.detuned(omega_l)),
                            &ThermalBath::zero(),
                            layout,
                        )?;
                        let opts = oracle::SteadyOptions {
                            residual_target: 1e-4,
                            min_march_time: 8.0 / mol.gamma_rad,
                            ..Default::default()
                        };
                        let (rho, _) = oracle::steady_state(&liouv, &opts)?;
                        out.push(rho.expectation(&layout.excited_projector(0)).re);
                    }
                    Ok(out)
                }),
            ));
        }
        for (cidx, handle) in handles {
            let chunk_values = handle.join().expect("worker panicked")?;
            for (k, v) in chunk_values.into_iter().enumerate() {
                oracle_values[cidx * chunk + k] = v;
            }
        }
        Ok(())
    })?;

    let rows = peaks
        .iter()
        .zip(&oracle_values)
        .map(|(&(i, analytic), &orc)| {
            vec![grid[i], analytic, orc, (analytic - orc).abs() / orc]
        })
        .collect();
    Ok(RunArtifact::new(
        config.kind,
        &["omega_l", "analytic", "oracle", "rel_error"],
        rows,
        spec.truncation,
        warnings,
        config,
    ))
}

/// Render and write the artifact; returns the path written.
pub fn write_artifact(
    artifact: &RunArtifact,
    overrides: &RunOverrides,
) -> std::io::Result<PathBuf> {
    let format = overrides
        .format
        .or_else(|| artifact.config.output.as_ref().and_then(|o| o.format))
        .unwrap_or(OutputFormat::Csv);
    let path = overrides
        .output
        .clone()
        .or_else(|| {
            artifact
                .config
                .output
                .as_ref()
                .and_then(|o| o.path.as_ref().map(PathBuf::from))
        })
        .unwrap_or_else(|| {
            PathBuf::from(format!(
                "{}.{}",
                artifact.kind.as_str(),
                match format {
                    OutputFormat::Csv => "csv",
                    OutputFormat::Json => "json",
                }
            ))
        });
    let rendered = match format {
        OutputFormat::Csv => artifact.to_csv(),
        OutputFormat::Json => artifact.to_json(),
    };
    let mut file = std::fs::File::create(&path)?;
    file.write_all(rendered.as_bytes())?;
    Ok(path)
}
