//! Spectroscopy of molecules as quantum emitters dressed by damped vibrational
//! modes, in free space and in optical cavities.
//!
//! The crate evaluates closed-form observables — absorption profiles, transient
//! and steady-state emission spectra, cavity transmission, polariton cross-talk
//! and Purcell-modified branching ratios, donor-acceptor energy-transfer rates —
//! and cross-validates each of them against a brute-force Lindblad master
//! equation on a truncated Fock space ([`oracle`]).
//!
//! # Conventions
//!
//! * `hbar = 1`. Every frequency and rate is expressed in one shared reference
//!   unit chosen by the caller; `gamma_rad = 1` is a convenient choice. All
//!   outputs are homogeneous in that unit.
//! * Lindblad dissipator for a collapse operator `O` at rate `g`:
//!   `L_O[rho] = g (2 O rho O† - rho O†O - O†O rho)`, so a population decaying
//!   through `O = sigma` at rate `gamma` relaxes as `exp(-2 gamma t)`.
//! * The vibronic coupling `lambda` is the square root of the Huang-Rhys
//!   factor; the zero-phonon line carries weight `exp(-sum lambda_k^2)`.

pub mod config;
pub mod error;
pub mod fret;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod runner;
pub mod series;
pub mod sparse;
pub mod spectra;

pub use error::{Error, Result};
pub use model::{
    CavitySpec, DriveSpec, DriveTarget, FretCavity, FretSpec, GeometrySpec, MoleculeSpec,
    ThermalBath, VibrationalMode,
};
pub use series::{MultiIndex, TruncationPolicy, TruncationReport};
pub use spectra::{PolaritonModes, SpectrumResult, SpectrumValues};
