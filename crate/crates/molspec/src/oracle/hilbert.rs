//! Truncated Hilbert-space layout and operator assembly.
//!
//! Factor ordering is fixed: one qubit per molecule first, then the
//! vibrational Fock factors grouped by molecule in mode order, then the
//! optional cavity factor last. The first factor is the slowest index, so a
//! basis state reads `|qubits...; vibs...; cavity>` with the cavity index
//! varying fastest.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CavitySpec, DriveSpec, DriveTarget, MoleculeSpec};
use crate::sparse::SpMat;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HilbertLayout {
    /// One entry per molecule; always 2.
    pub qubit_dims: Vec<usize>,
    /// Fock truncation per vibrational mode, grouped by molecule.
    pub vib_dims: Vec<Vec<usize>>,
    /// Photon truncation, if a cavity is present.
    pub cavity_dim: Option<usize>,
}

impl HilbertLayout {
    pub fn new(vib_dims: Vec<Vec<usize>>, cavity_dim: Option<usize>) -> Self {
        Self {
            qubit_dims: vec![2; vib_dims.len()],
            vib_dims,
            cavity_dim,
        }
    }

    /// Uniform truncation for a set of molecules.
    pub fn for_molecules(
        mols: &[MoleculeSpec],
        vib_dim: usize,
        cavity_dim: Option<usize>,
    ) -> Self {
        Self::new(
            mols.iter().map(|m| vec![vib_dim; m.modes.len()]).collect(),
            cavity_dim,
        )
    }

    pub fn n_molecules(&self) -> usize {
        self.qubit_dims.len()
    }

    /// All factor dimensions in layout order.
    pub fn factor_dims(&self) -> Vec<usize> {
        let mut dims = self.qubit_dims.clone();
        for v in &self.vib_dims {
            dims.extend_from_slice(v);
        }
        if let Some(c) = self.cavity_dim {
            dims.push(c);
        }
        dims
    }

    pub fn total_dim(&self) -> usize {
        self.factor_dims().iter().product()
    }

    fn qubit_factor(&self, molecule: usize) -> usize {
        molecule
    }

    fn vib_factor(&self, molecule: usize, mode: usize) -> usize {
        let mut idx = self.n_molecules();
        for j in 0..molecule {
            idx += self.vib_dims[j].len();
        }
        idx + mode
    }

    fn cavity_factor(&self) -> usize {
        self.n_molecules() + self.vib_dims.iter().map(Vec::len).sum::<usize>()
    }

    /// Embed a single-factor operator into the full space.
    pub fn embed(&self, factor: usize, op: &SpMat) -> SpMat {
        let dims = self.factor_dims();
        assert_eq!(op.nrows, dims[factor], "factor dimension mismatch");
        let mut acc = SpMat::identity(1);
        for (f, &d) in dims.iter().enumerate() {
            let next = if f == factor {
                op.clone()
            } else {
                SpMat::identity(d)
            };
            acc = acc.kron(&next);
        }
        acc
    }

    /// Electronic lowering operator `sigma_j = |g><e|` of molecule `j`.
    pub fn sigma(&self, molecule: usize) -> SpMat {
        self.embed(self.qubit_factor(molecule), &lowering_qubit())
    }

    /// `sigma_j† sigma_j`, the excited-state projector of molecule `j`.
    pub fn excited_projector(&self, molecule: usize) -> SpMat {
        self.embed(
            self.qubit_factor(molecule),
            &SpMat::from_triplets(2, 2, vec![(1, 1, C64::new(1.0, 0.0))]),
        )
    }

    /// Fock annihilation operator of mode `k` of molecule `j`.
    pub fn annihilation(&self, molecule: usize, mode: usize) -> SpMat {
        let d = self.vib_dims[molecule][mode];
        self.embed(self.vib_factor(molecule, mode), &fock_annihilation(d))
    }

    /// Photon annihilation operator.
    pub fn photon_annihilation(&self) -> Result<SpMat> {
        let d = self
            .cavity_dim
            .ok_or_else(|| Error::Layout("layout has no cavity factor".into()))?;
        Ok(self.embed(self.cavity_factor(), &fock_annihilation(d)))
    }

    /// Coherent-support heuristic: a mode with coupling `lambda` wants at
    /// least `ceil(lambda^2 + 5 lambda + 3)` Fock states.
    pub fn suggested_vib_dim(lambda: f64) -> usize {
        (lambda * lambda + 5.0 * lambda + 3.0).ceil() as usize
    }

    /// Advisory notes where the layout undercuts the support heuristic.
    pub fn truncation_advisories(&self, mols: &[MoleculeSpec]) -> Vec<String> {
        let mut notes = Vec::new();
        for (j, mol) in mols.iter().enumerate() {
            for (k, mode) in mol.modes.iter().enumerate() {
                let want = Self::suggested_vib_dim(mode.lambda);
                let have = self.vib_dims[j][k];
                if have < want {
                    notes.push(format!(
                        "advisory: molecule {j} mode {k} truncated at {have} Fock states, \
                         support heuristic suggests {want}"
                    ));
                }
            }
        }
        notes
    }

    fn check_molecules(&self, mols: &[MoleculeSpec]) -> Result<()> {
        if mols.len() != self.n_molecules() {
            return Err(Error::Layout(format!(
                "layout holds {} molecules, got {}",
                self.n_molecules(),
                mols.len()
            )));
        }
        for (j, mol) in mols.iter().enumerate() {
            if mol.modes.len() != self.vib_dims[j].len() {
                return Err(Error::Layout(format!(
                    "molecule {j} has {} modes, layout allocates {}",
                    mol.modes.len(),
                    self.vib_dims[j].len()
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn lowering_qubit() -> SpMat {
    // Basis |g> = 0, |e> = 1.
    SpMat::from_triplets(2, 2, vec![(0, 1, C64::new(1.0, 0.0))])
}

pub(crate) fn fock_annihilation(dim: usize) -> SpMat {
    SpMat::from_triplets(
        dim,
        dim,
        (1..dim).map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0))),
    )
}

/// Number operator on a single Fock factor.
pub(crate) fn fock_number(dim: usize) -> SpMat {
    SpMat::from_triplets(
        dim,
        dim,
        (1..dim).map(|n| (n, n, C64::new(n as f64, 0.0))),
    )
}

/// Assemble the system Hamiltonian on the truncated space, in the frame
/// rotating with the drive when one is present.
///
/// Per molecule: `(omega_e + sum_k lambda_k^2 nu_k) sigma†sigma
/// + sum_k nu_k b†b - sum_k lambda_k nu_k (b† + b) sigma†sigma`.
/// Cavity: `omega_c a†a + i g sum_j (a† sigma_j - sigma_j† a)`.
/// Dipole-dipole: `Omega (sigma_1 sigma_2† + sigma_2 sigma_1†)`.
/// Drive: `i eta (sigma† - sigma)` on every molecule, or `i eta (a† - a)`.
pub fn build_hamiltonian(
    mols: &[MoleculeSpec],
    cav: Option<&CavitySpec>,
    dipole_dipole: Option<f64>,
    drive: Option<&DriveSpec>,
    layout: &HilbertLayout,
) -> Result<SpMat> {
    layout.check_molecules(mols)?;
    if cav.is_some() && layout.cavity_dim.is_none() {
        return Err(Error::Layout(
            "cavity present but layout has no photon factor".into(),
        ));
    }
    let d = layout.total_dim();
    let frame = drive.map(|dr| dr.omega_l).unwrap_or(0.0);
    let one = C64::new(1.0, 0.0);
    let mut h = SpMat::zeros(d, d);

    for (j, mol) in mols.iter().enumerate() {
        let proj = layout.excited_projector(j);
        let mut proj_shift = proj.clone();
        proj_shift.scale(C64::new(mol.omega_e - frame + mol.polaron_shift(), 0.0));
        h = h.add_scaled(one, &proj_shift);
        for (k, mode) in mol.modes.iter().enumerate() {
            let dim = layout.vib_dims[j][k];
            let mut number = layout.embed(layout.vib_factor(j, k), &fock_number(dim));
            number.scale(C64::new(mode.nu, 0.0));
            h = h.add_scaled(one, &number);

            let b = layout.annihilation(j, k);
            let displacement = b.add_scaled(one, &b.adjoint());
            let mut holstein = displacement.matmul(&proj);
            holstein.scale(C64::new(-mode.lambda * mode.nu, 0.0));
            h = h.add_scaled(one, &holstein);
        }
    }

    if let Some(cav) = cav {
        let a = layout.photon_annihilation()?;
        let mut number = a.adjoint().matmul(&a);
        number.scale(C64::new(cav.omega_c - frame, 0.0));
        h = h.add_scaled(one, &number);
        for j in 0..mols.len() {
            let sigma = layout.sigma(j);
            // i g (a† sigma - sigma† a)
            let mut coupling = a.adjoint().matmul(&sigma);
            coupling = coupling.add_scaled(-one, &sigma.adjoint().matmul(&a));
            coupling.scale(C64::new(0.0, cav.g));
            h = h.add_scaled(one, &coupling);
        }
    }

    if let Some(omega_dd) = dipole_dipole {
        if mols.len() != 2 {
            return Err(Error::Layout(
                "dipole-dipole exchange is implemented for exactly two molecules".into(),
            ));
        }
        let s1 = layout.sigma(0);
        let s2 = layout.sigma(1);
        let mut exchange = s1.matmul(&s2.adjoint());
        exchange = exchange.add_scaled(one, &s2.matmul(&s1.adjoint()));
        exchange.scale(C64::new(omega_dd, 0.0));
        h = h.add_scaled(one, &exchange);
    }

    if let Some(drive) = drive {
        match drive.target {
            DriveTarget::Molecule => {
                for j in 0..mols.len() {
                    let sigma = layout.sigma(j);
                    // i eta (sigma† - sigma)
                    let mut pump = sigma.adjoint().add_scaled(-one, &sigma);
                    pump.scale(C64::new(0.0, drive.eta));
                    h = h.add_scaled(one, &pump);
                }
            }
            DriveTarget::Cavity => {
                let a = layout.photon_annihilation()?;
                let mut pump = a.adjoint().add_scaled(-one, &a);
                pump.scale(C64::new(0.0, drive.eta));
                h = h.add_scaled(one, &pump);
            }
        }
    }

    debug_assert!(h.is_hermitian(1e-12));
    Ok(h)
}

/// The standard collapse set: `sigma_j` at `gamma_j`, `b_jk` at
/// `Gamma_jk (nbar + 1)` plus `b_jk†` at `Gamma_jk nbar` when the bath is
/// warm, and `a` at `kappa`.
pub fn standard_collapses(
    mols: &[MoleculeSpec],
    cav: Option<&CavitySpec>,
    bath: &crate::model::ThermalBath,
    layout: &HilbertLayout,
) -> Result<Vec<(String, f64, SpMat)>> {
    layout.check_molecules(mols)?;
    let mut out = Vec::new();
    for (j, mol) in mols.iter().enumerate() {
        out.push((format!("sigma[{j}]"), mol.gamma_rad, layout.sigma(j)));
        for (k, mode) in mol.modes.iter().enumerate() {
            let b = layout.annihilation(j, k);
            out.push((
                format!("b[{j},{k}]"),
                mode.gamma_vib * (bath.nbar + 1.0),
                b.clone(),
            ));
            if bath.nbar > 0.0 {
                out.push((
                    format!("b_dag[{j},{k}]"),
                    mode.gamma_vib * bath.nbar,
                    b.adjoint(),
                ));
            }
        }
    }
    if let Some(cav) = cav {
        out.push(("a".to_string(), cav.kappa, layout.photon_annihilation()?));
    }
    Ok(out)
}
