//! Brute-force quantum-mechanical reference: Holstein(-Tavis-Cummings)
//! Hamiltonians and Lindblad dissipators on a truncated Fock space, steady
//! states, time evolution, and spectra via the quantum regression theorem.
//!
//! This module is the ground truth the closed-form results in [`crate::spectra`]
//! and [`crate::fret`] are validated against. Everything here works at the
//! level of the full density operator; nothing is shared with the series
//! implementations beyond the domain types.
//!
//! Vectorization convention: column stacking, `vec(rho)[i + d*j] = rho_ij`.
//! Hilbert factor ordering: qubits, then vibrations grouped by molecule, then
//! the cavity (see [`HilbertLayout`]).

pub mod fit;
pub mod hilbert;
pub mod liouvillian;
pub mod reduced;
pub mod solve;

pub use fit::{fit_lorentzian, LorentzianFit};
pub use hilbert::{build_hamiltonian, standard_collapses, HilbertLayout};
pub use liouvillian::{Generator, Liouvillian};
pub use reduced::{
    absorption_from_response, factorized_conditional_correlations, fret_sector_trace,
    transient_emission_correlation, transmission_from_response, ConditionalCorrelations,
    SectorTrace,
};
pub use solve::{
    evolve, one_sided_transform, spectrum_from_correlation, steady_state,
    two_time_correlation, DensityOp, IntegratorOptions, SteadyMethod, SteadyOptions,
    SteadyReport,
};

use crate::error::Result;
use crate::model::{CavitySpec, DriveSpec, MoleculeSpec, ThermalBath};

/// Convenience: the Lindblad generator for a set of molecules (optionally in
/// a cavity, optionally driven) with the standard collapse set.
pub fn build_system(
    mols: &[MoleculeSpec],
    cav: Option<&CavitySpec>,
    dipole_dipole: Option<f64>,
    drive: Option<&DriveSpec>,
    bath: &ThermalBath,
    layout: &HilbertLayout,
) -> Result<Liouvillian> {
    let h = build_hamiltonian(mols, cav, dipole_dipole, drive, layout)?;
    let collapses = standard_collapses(mols, cav, bath, layout)?;
    Liouvillian::new(h, collapses)
}
