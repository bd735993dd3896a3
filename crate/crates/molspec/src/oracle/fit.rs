//! Least-squares Lorentzian fit `a w^2 / (w^2 + (omega - omega0)^2)` for
//! extracting peak positions and linewidths from sampled spectra.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianFit {
    pub center: f64,
    /// Half width at half maximum (returned positive).
    pub half_width: f64,
    pub amplitude: f64,
    /// `||residual|| / ||data||` over the fitted window.
    pub rel_residual: f64,
}

/// Fit the window by Levenberg-Marquardt with an analytic Jacobian. The
/// window should contain one dominant peak; overlapping structures show up as
/// an elevated residual rather than a failure.
pub fn fit_lorentzian(grid: &[f64], values: &[f64], window: (f64, f64)) -> Result<LorentzianFit> {
    let (lo, hi) = window;
    let pairs: Vec<(f64, f64)> = grid
        .iter()
        .zip(values)
        .filter(|(&w, _)| w >= lo && w <= hi)
        .map(|(&w, &v)| (w, v))
        .collect();
    if pairs.len() < 4 {
        return Err(Error::Fit(format!(
            "window [{lo}, {hi}] holds {} samples, need at least 4",
            pairs.len()
        )));
    }

    // Initial guess: peak location and half-maximum crossings.
    let (mut center, mut amplitude) = (pairs[0].0, pairs[0].1);
    for &(w, v) in &pairs {
        if v > amplitude {
            amplitude = v;
            center = w;
        }
    }
    if amplitude <= 0.0 {
        return Err(Error::Fit("window contains no positive signal".into()));
    }
    let half = amplitude / 2.0;
    let mut left = lo;
    let mut right = hi;
    for win in pairs.windows(2) {
        let (w0, v0) = win[0];
        let (w1, v1) = win[1];
        if v0 < half && v1 >= half && w1 <= center {
            left = w0 + (w1 - w0) * (half - v0) / (v1 - v0);
        }
        if v0 >= half && v1 < half && w0 >= center {
            right = w0 + (w1 - w0) * (half - v0) / (v1 - v0);
        }
    }
    let mut width = (0.5 * (right - left)).abs().max(1e-3 * (hi - lo));

    let data_norm = pairs.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
    let mut params = [center, width, amplitude];
    let residual_norm = |p: &[f64; 3]| -> f64 {
        pairs
            .iter()
            .map(|&(w, v)| {
                let d = p[1] * p[1] + (w - p[0]).powi(2);
                let model = p[2] * p[1] * p[1] / d;
                (model - v).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    };

    let mut mu = 1e-3;
    let mut best = residual_norm(&params);
    let mut converged = false;
    for _ in 0..200 {
        // Normal equations J^T J + mu diag, J^T r for the 3 parameters.
        let mut jtj = [[0.0f64; 3]; 3];
        let mut jtr = [0.0f64; 3];
        for &(w, v) in &pairs {
            let dw = w - params[0];
            let d = params[1] * params[1] + dw * dw;
            let model = params[2] * params[1] * params[1] / d;
            let r = model - v;
            let j = [
                2.0 * params[2] * params[1] * params[1] * dw / (d * d),
                2.0 * params[2] * params[1] * dw * dw / (d * d),
                params[1] * params[1] / d,
            ];
            for i in 0..3 {
                jtr[i] += j[i] * r;
                for k in 0..3 {
                    jtj[i][k] += j[i] * j[k];
                }
            }
        }
        let mut a = jtj;
        for (i, row) in a.iter_mut().enumerate() {
            row[i] += mu * jtj[i][i].max(1e-30);
        }
        let Some(step) = solve3(&a, &jtr) else {
            mu *= 10.0;
            continue;
        };
        let trial = [
            params[0] - step[0],
            params[1] - step[1],
            params[2] - step[2],
        ];
        let trial_res = residual_norm(&trial);
        if trial_res < best {
            let gain = best - trial_res;
            params = trial;
            best = trial_res;
            mu = (mu * 0.3).max(1e-12);
            if gain <= 1e-12 * data_norm.max(1e-300) {
                converged = true;
                break;
            }
        } else {
            mu *= 10.0;
            if mu > 1e12 {
                converged = best.is_finite();
                break;
            }
        }
        width = params[1];
        let _ = width;
    }
    if !converged && best > 0.5 * data_norm {
        return Err(Error::Fit(format!(
            "no convergence: residual {best:e} against data norm {data_norm:e}"
        )));
    }

    Ok(LorentzianFit {
        center: params[0],
        half_width: params[1].abs(),
        amplitude: params[2],
        rel_residual: best / data_norm.max(1e-300),
    })
}

fn solve3(a: &[[f64; 3]; 3], b: &[f64; 3]) -> Option<[f64; 3]> {
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    if det.abs() < 1e-300 {
        return None;
    }
    let inv_det = 1.0 / det;
    let x = [
        (b[0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (b[1] * a[2][2] - a[1][2] * b[2])
            + a[0][2] * (b[1] * a[2][1] - a[1][1] * b[2]))
            * inv_det,
        (a[0][0] * (b[1] * a[2][2] - a[1][2] * b[2])
            - b[0] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * b[2] - b[1] * a[2][0]))
            * inv_det,
        (a[0][0] * (a[1][1] * b[2] - b[1] * a[2][1])
            - a[0][1] * (a[1][0] * b[2] - b[1] * a[2][0])
            + b[0] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]))
            * inv_det,
    ];
    Some(x)
}
