use std::f64::consts::PI;

use crate::em::{f_phys, CircuitParams, FrequencyGrid, SResponse, Topology};
use crate::grad::fit_squared_residual_grad;

use super::DataError;

/// Outcome of a circuit-parameter fit. `residual` is the mean complex
/// |Δs21| at the returned iterate.
#[derive(Clone, Debug)]
pub struct ExtractionResult {
    pub params: CircuitParams,
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Analytic seed: read the slot resonance off the |s21| peak and size a
/// nominal inductance around it. Screens get slightly different seeds to
/// break the swap symmetry of palindromic cascades.
pub fn initial_guess(s: &SResponse, n_screens: usize) -> Result<CircuitParams, DataError> {
    let peak = s
        .points
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.s21.abs().partial_cmp(&b.1.s21.abs()).unwrap())
        .map(|(j, _)| s.grid.point_hz(j))
        .ok_or_else(|| DataError::Usage("empty response".into()))?;
    let pairs: Vec<(f64, f64)> = (0..n_screens)
        .map(|k| {
            let l = 0.5e-9 * (1.0 + 0.02 * k as f64);
            let c = 1.0 / ((2.0 * PI * peak).powi(2) * l);
            (l, c)
        })
        .collect();
    Ok(CircuitParams::from_lc_pairs(&pairs)?)
}

const MAX_ITERS: usize = 5000;
const GRAD_TOL: f64 = 1e-9;

/// Fits circuit parameters to a target response by gradient descent on
/// Σ_f |s21 - ŝ21|² in log-parameter space, with backtracking on the step.
/// Stops at gradient norm < 1e-9 or 5000 iterations, whichever first, and
/// returns the best iterate either way.
pub fn extract_circuit_params(
    s: &SResponse,
    topology: &Topology,
    grid: &FrequencyGrid,
    z0_free: f64,
    init: &CircuitParams,
) -> Result<ExtractionResult, DataError> {
    if s.grid != *grid {
        return Err(DataError::Usage("response grid does not match".into()));
    }
    let objective = |theta: &[f64]| -> Result<(f64, Vec<f64>), DataError> {
        let c = CircuitParams::from_flat(theta.iter().map(|t| t.exp()).collect())?;
        let (f, g) = fit_squared_residual_grad(&c, s, topology, grid, z0_free)?;
        Ok((f, g))
    };

    let mut theta: Vec<f64> = init.as_slice().iter().map(|v| v.ln()).collect();
    let (mut f_cur, mut g) = objective(&theta)?;
    let mut best_theta = theta.clone();
    let mut best_f = f_cur;
    let mut step = 1e-2;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None; // (theta, g)
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..MAX_ITERS {
        iterations = it + 1;
        let g_norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if g_norm < GRAD_TOL {
            converged = true;
            break;
        }
        // Barzilai-Borwein step length from the last secant pair; the
        // valley is badly conditioned and fixed steps crawl
        if let Some((theta_p, g_p)) = &prev {
            let mut sy = 0.0;
            let mut yy = 0.0;
            for i in 0..theta.len() {
                let s = theta[i] - theta_p[i];
                let y = g[i] - g_p[i];
                sy += s * y;
                yy += y * y;
            }
            if sy > 0.0 && yy > 0.0 {
                step = (sy / yy).clamp(1e-12, 1e3);
            }
        }
        let mut accepted = false;
        let mut trial = step;
        for _ in 0..60 {
            let cand: Vec<f64> = theta.iter().zip(&g).map(|(t, gi)| t - trial * gi).collect();
            let (f_new, g_new) = objective(&cand)?;
            if f_new < f_cur {
                prev = Some((theta.clone(), g.clone()));
                theta = cand;
                f_cur = f_new;
                g = g_new;
                accepted = true;
                break;
            }
            trial *= 0.5;
        }
        if f_cur < best_f {
            best_f = f_cur;
            best_theta = theta.clone();
        }
        if !accepted {
            // step collapsed to nothing: numerically at a minimum
            converged = true;
            break;
        }
    }

    let params = CircuitParams::from_flat(best_theta.iter().map(|t| t.exp()).collect())?;
    let fitted = f_phys(&params, topology, grid, z0_free)?;
    let residual = fitted
        .points
        .iter()
        .zip(&s.points)
        .map(|(p, t)| (p.s21 - t.s21).abs())
        .sum::<f64>()
        / grid.n_points() as f64;
    Ok(ExtractionResult {
        params,
        residual,
        converged,
        iterations,
    })
}
