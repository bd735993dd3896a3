//! Eigen-decomposition of the 2x2 polaron-frame drift matrix coupling the
//! molecular dipole and the cavity field.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::{CavitySpec, MoleculeSpec};

/// Polariton branches of the coupled dipole-field dynamics in the frame
/// rotating at `omega_l`.
///
/// `eigenvalues[0]` and column 0 of `t_matrix` belong to the upper branch.
/// The eigenvalues are those of the drift matrix, `eps = -(gamma + i w)` with
/// `w` the mode detuning below the drive; `omega_plus`/`omega_minus` are the
/// corresponding lab-frame mode frequencies `omega_l - Im(eps)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolaritonModes {
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub eigenvalues: [Complex64; 2],
    /// Eigenvector matrix, columns ordered (+, -); at a flagged degeneracy the
    /// second column is a generalized eigenvector.
    pub t_matrix: [[Complex64; 2]; 2],
    pub det_t: Complex64,
    /// Exceptional point: the drift matrix is (numerically) defective.
    pub degenerate: bool,
    /// The drift matrix itself, for resolvent evaluations.
    pub drift: [[Complex64; 2]; 2],
}

/// Build the drift matrix
/// `M = [[-(gamma - i(omega_l - omega_e)), g], [-g, -(kappa - i(omega_l - omega_c_bar))]]`
/// with the vibrationally renormalized cavity frequency
/// `omega_c_bar = omega_c - sum_k lambda_k^2 nu_k`, and decompose it.
pub fn polariton_modes(mol: &MoleculeSpec, cav: &CavitySpec, omega_l: f64) -> PolaritonModes {
    let omega_c_bar = cav.omega_c - mol.polaron_shift();
    let m11 = Complex64::new(-mol.gamma_rad, omega_l - mol.omega_e);
    let m22 = Complex64::new(-cav.kappa, omega_l - omega_c_bar);
    let g = Complex64::new(cav.g, 0.0);
    let drift = [[m11, g], [-g, m22]];

    let tr = m11 + m22;
    let disc = (m11 - m22) * (m11 - m22) - 4.0 * g * g;
    let scale = mol.gamma_rad.max(cav.kappa).max(cav.g);
    let degenerate = disc.norm() < 1e-12 * scale * scale;
    let sq = disc.sqrt();
    let eps_a = 0.5 * (tr + sq);
    let eps_b = 0.5 * (tr - sq);

    // Lab-frame mode frequency of an eigenvalue.
    let lab = |eps: Complex64| omega_l - eps.im;
    // "+" is the branch with the larger mode frequency; ties break toward the
    // larger damping.
    let (eps_plus, eps_minus) = if lab(eps_a) > lab(eps_b) + 1e-14 * scale {
        (eps_a, eps_b)
    } else if lab(eps_b) > lab(eps_a) + 1e-14 * scale {
        (eps_b, eps_a)
    } else if -eps_a.re >= -eps_b.re {
        (eps_a, eps_b)
    } else {
        (eps_b, eps_a)
    };

    let col_plus = eigvec(&drift, eps_plus);
    let col_minus_raw = eigvec(&drift, eps_minus);
    // det_t reports the conditioning of the true eigenbasis; it collapses to
    // zero at an exceptional point even when t_matrix carries a generalized
    // eigenvector there.
    let det_t = col_plus[0] * col_minus_raw[1] - col_minus_raw[0] * col_plus[1];
    let col_minus = if degenerate {
        generalized_eigvec(&drift, eps_plus, &col_plus)
    } else {
        col_minus_raw
    };
    let t_matrix = [
        [col_plus[0], col_minus[0]],
        [col_plus[1], col_minus[1]],
    ];

    PolaritonModes {
        omega_plus: lab(eps_plus),
        omega_minus: lab(eps_minus),
        gamma_plus: -eps_plus.re,
        gamma_minus: -eps_minus.re,
        eigenvalues: [eps_plus, eps_minus],
        t_matrix,
        det_t,
        degenerate,
        drift,
    }
}

fn eigvec(m: &[[Complex64; 2]; 2], eps: Complex64) -> [Complex64; 2] {
    // Two candidate null vectors of (M - eps I); take the better conditioned.
    let a = [m[0][1], eps - m[0][0]];
    let b = [m[1][1] - eps, -m[1][0]];
    let na = (a[0].norm_sqr() + a[1].norm_sqr()).sqrt();
    let nb = (b[0].norm_sqr() + b[1].norm_sqr()).sqrt();
    if na >= nb && na > 0.0 {
        [a[0] / na, a[1] / na]
    } else if nb > 0.0 {
        [b[0] / nb, b[1] / nb]
    } else {
        // Fully decoupled: the basis vector matching the diagonal entry.
        if (m[0][0] - eps).norm() <= (m[1][1] - eps).norm() {
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
        } else {
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
        }
    }
}

/// Solve `(M - eps I) w = v` for a generalized eigenvector at a defective
/// point, normalized.
fn generalized_eigvec(
    m: &[[Complex64; 2]; 2],
    eps: Complex64,
    v: &[Complex64; 2],
) -> [Complex64; 2] {
    let a11 = m[0][0] - eps;
    let a12 = m[0][1];
    let a21 = m[1][0];
    let a22 = m[1][1] - eps;
    // The system is singular by construction; pick the row with the largest
    // coefficient and one free component set to zero.
    let w = if a12.norm().max(a11.norm()) >= a21.norm().max(a22.norm()) {
        if a12.norm() >= a11.norm() && a12.norm() > 0.0 {
            [Complex64::new(0.0, 0.0), v[0] / a12]
        } else if a11.norm() > 0.0 {
            [v[0] / a11, Complex64::new(0.0, 0.0)]
        } else {
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
        }
    } else if a21.norm() >= a22.norm() && a21.norm() > 0.0 {
        [v[1] / a21, Complex64::new(0.0, 0.0)]
    } else if a22.norm() > 0.0 {
        [Complex64::new(0.0, 0.0), v[1] / a22]
    } else {
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
    };
    let n = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
    if n > 0.0 {
        [w[0] / n, w[1] / n]
    } else {
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
    }
}

impl PolaritonModes {
    /// Relative residual of `M T = T diag(eps)`; small away from exceptional
    /// points.
    pub fn eigen_residual(&self) -> f64 {
        let m = &self.drift;
        let t = &self.t_matrix;
        let mut num = 0.0;
        let mut den = 0.0;
        for (col, eps) in [(0usize, self.eigenvalues[0]), (1, self.eigenvalues[1])] {
            for row in 0..2 {
                let mt = m[row][0] * t[0][col] + m[row][1] * t[1][col];
                let te = t[row][col] * eps;
                num += (mt - te).norm_sqr();
            }
        }
        for row in 0..2 {
            for colv in 0..2 {
                den += m[row][colv].norm_sqr();
            }
        }
        (num / den).sqrt()
    }
}
