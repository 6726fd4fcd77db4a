use serde::{Deserialize, Serialize};

use crate::em::{CircuitParams, SResponse};

use super::NeuralError;

/// Offset keeping normalized circuit targets strictly positive so the
/// softplus output head can reach them.
pub const LOG_SHIFT: f64 = 3.0;

/// Normalization statistics: geometry features standardized to zero mean /
/// unit variance; circuit parameters handled in log-space (L and C span
/// decades) as u = (ln c - mean)/std + LOG_SHIFT.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub x_mean: Vec<f64>,
    pub x_std: Vec<f64>,
    pub c_log_mean: Vec<f64>,
    pub c_log_std: Vec<f64>,
}

fn moments(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let d = rows[0].len();
    let n = rows.len() as f64;
    let mut mean = vec![0.0; d];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v / n;
        }
    }
    let mut std = vec![0.0; d];
    for r in rows {
        for (s, (v, m)) in std.iter_mut().zip(r.iter().zip(&mean)) {
            *s += (v - m).powi(2) / n;
        }
    }
    for s in &mut std {
        *s = s.sqrt();
        // constant feature: fall back to unit scale
        if *s < 1e-12 {
            *s = 1.0;
        }
    }
    (mean, std)
}

impl Normalization {
    pub fn fit(xs: &[Vec<f64>], cs: &[&CircuitParams]) -> Result<Self, NeuralError> {
        if xs.is_empty() || xs.len() != cs.len() {
            return Err(NeuralError::Usage(
                "empty or mismatched normalization data".into(),
            ));
        }
        let (x_mean, x_std) = moments(xs);
        let logs: Vec<Vec<f64>> = cs
            .iter()
            .map(|c| c.as_slice().iter().map(|v| v.ln()).collect())
            .collect();
        let (c_log_mean, c_log_std) = moments(&logs);
        Ok(Self {
            x_mean,
            x_std,
            c_log_mean,
            c_log_std,
        })
    }

    pub fn normalize_x(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.x_mean.iter().zip(&self.x_std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    /// Circuit parameters to normalized output units.
    pub fn c_to_units(&self, c: &CircuitParams) -> Vec<f64> {
        c.as_slice()
            .iter()
            .zip(self.c_log_mean.iter().zip(&self.c_log_std))
            .map(|(v, (m, s))| (v.ln() - m) / s + LOG_SHIFT)
            .collect()
    }

    /// Normalized output units back to strictly positive circuit parameters.
    pub fn units_to_c(&self, u: &[f64]) -> Result<CircuitParams, NeuralError> {
        let values = u
            .iter()
            .zip(self.c_log_mean.iter().zip(&self.c_log_std))
            .map(|(v, (m, s))| (m + s * (v - LOG_SHIFT)).exp())
            .collect();
        Ok(CircuitParams::from_flat(values)?)
    }

    /// dc_k/du_k at the given circuit point (diagonal map).
    pub fn dc_du(&self, c: &CircuitParams) -> Vec<f64> {
        c.as_slice()
            .iter()
            .zip(&self.c_log_std)
            .map(|(v, s)| v * s)
            .collect()
    }
}

fn check_grids(pred: &SResponse, target: &SResponse) -> Result<(), NeuralError> {
    if pred.grid != target.grid {
        return Err(NeuralError::Usage("prediction/target grid mismatch".into()));
    }
    Ok(())
}

/// Mean complex |S21 - Ŝ21| over the grid; the pre-existing objective kept
/// for ablation.
pub fn loss_eq1(pred: &SResponse, target: &SResponse) -> Result<f64, NeuralError> {
    check_grids(pred, target)?;
    let n = pred.points.len() as f64;
    Ok(pred
        .points
        .iter()
        .zip(&target.points)
        .map(|(p, t)| (p.s21 - t.s21).abs())
        .sum::<f64>()
        / n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Eq2Variant {
    /// Squared l2 norm of the normalized circuit error (the displayed formula).
    SquaredL2,
    /// Mean absolute error variant honoring the prose.
    Mae,
}

/// Circuit-parameter training loss in normalized units, mean over samples:
/// ‖u - û‖² by default, MAE as the selectable variant.
pub fn loss_eq2(
    pred: &[CircuitParams],
    target: &[CircuitParams],
    norm: &Normalization,
    variant: Eq2Variant,
) -> Result<f64, NeuralError> {
    if pred.is_empty() || pred.len() != target.len() {
        return Err(NeuralError::Usage(
            "empty or mismatched circuit batches".into(),
        ));
    }
    let mut acc = 0.0;
    for (p, t) in pred.iter().zip(target) {
        let up = norm.c_to_units(p);
        let ut = norm.c_to_units(t);
        acc += match variant {
            Eq2Variant::SquaredL2 => up
                .iter()
                .zip(&ut)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>(),
            Eq2Variant::Mae => {
                up.iter().zip(&ut).map(|(a, b)| (a - b).abs()).sum::<f64>() / up.len() as f64
            }
        };
    }
    Ok(acc / pred.len() as f64)
}

/// Mean complex |S21 - Ŝ21| applied to the end-to-end prediction. Same form
/// as [`loss_eq1`].
pub fn loss_eq3(pred: &SResponse, target: &SResponse) -> Result<f64, NeuralError> {
    loss_eq1(pred, target)
}

/// Phase-aware loss: mean of |Ŝ21 - S21|² + |Ŝ11 - S11|² (squared complex
/// moduli).
pub fn loss_eq5(pred: &SResponse, target: &SResponse) -> Result<f64, NeuralError> {
    check_grids(pred, target)?;
    let n = pred.points.len() as f64;
    Ok(pred
        .points
        .iter()
        .zip(&target.points)
        .map(|(p, t)| (p.s21 - t.s21).abs_sq() + (p.s11 - t.s11).abs_sq())
        .sum::<f64>()
        / n)
}

/// Mean of a per-pair loss over matched batches.
pub fn batch_mean(
    preds: &[SResponse],
    targets: &[SResponse],
    loss: fn(&SResponse, &SResponse) -> Result<f64, NeuralError>,
) -> Result<f64, NeuralError> {
    if preds.is_empty() || preds.len() != targets.len() {
        return Err(NeuralError::Usage(
            "empty or mismatched response batches".into(),
        ));
    }
    let mut acc = 0.0;
    for (p, t) in preds.iter().zip(targets) {
        acc += loss(p, t)?;
    }
    Ok(acc / preds.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em::{ComplexScalar, FrequencyGrid, SPoint};

    fn flat_response(s11: ComplexScalar, s21: ComplexScalar, n: usize) -> SResponse {
        let grid = FrequencyGrid::new(1e9, 2e9, n).unwrap();
        let p = SPoint {
            s11,
            s21,
            s12: s21,
            s22: s11,
        };
        SResponse::new(grid, vec![p; n]).unwrap()
    }

    #[test]
    fn eq1_zero_on_equal() {
        let r = flat_response(ComplexScalar::zero(), ComplexScalar::one(), 5);
        assert_eq!(loss_eq1(&r, &r).unwrap(), 0.0);
    }

    #[test]
    fn eq1_single_point_toy() {
        // ŝ21 = 1, s21 = 0 at every point -> 1
        let pred = flat_response(ComplexScalar::zero(), ComplexScalar::one(), 4);
        let target = flat_response(ComplexScalar::zero(), ComplexScalar::zero(), 4);
        assert_eq!(loss_eq1(&pred, &target).unwrap(), 1.0);
    }

    #[test]
    fn eq1_matches_hand_computation() {
        // two points with |Δs21| = 5 and 13 (3-4-5 and 5-12-13 triangles)
        let grid = FrequencyGrid::new(1e9, 2e9, 2).unwrap();
        let mk = |re, im| SPoint {
            s11: ComplexScalar::zero(),
            s21: ComplexScalar::new(re, im),
            s12: ComplexScalar::new(re, im),
            s22: ComplexScalar::zero(),
        };
        let pred = SResponse::new(grid, vec![mk(3.0, 4.0), mk(5.0, 12.0)]).unwrap();
        let target = SResponse::new(grid, vec![mk(0.0, 0.0), mk(0.0, 0.0)]).unwrap();
        assert!((loss_eq1(&pred, &target).unwrap() - 9.0).abs() < 1e-15);
    }

    #[test]
    fn eq5_toy_values() {
        let pred = flat_response(ComplexScalar::imag(1.0), ComplexScalar::one(), 3);
        let target = flat_response(ComplexScalar::zero(), ComplexScalar::one(), 3);
        // Δs11 = j -> |Δ|² = 1 per point
        assert!((loss_eq5(&pred, &target).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(loss_eq5(&pred, &pred).unwrap(), 0.0);
    }

    #[test]
    fn eq5_matches_hand_computation() {
        let grid = FrequencyGrid::new(1e9, 2e9, 2).unwrap();
        let mk = |a: (f64, f64), b: (f64, f64)| SPoint {
            s11: ComplexScalar::new(a.0, a.1),
            s21: ComplexScalar::new(b.0, b.1),
            s12: ComplexScalar::new(b.0, b.1),
            s22: ComplexScalar::new(a.0, a.1),
        };
        let pred = SResponse::new(
            grid,
            vec![mk((0.1, 0.2), (0.5, 0.0)), mk((0.0, 0.0), (0.0, 1.0))],
        )
        .unwrap();
        let target = SResponse::new(
            grid,
            vec![mk((0.0, 0.0), (0.0, 0.0)), mk((0.0, 0.0), (0.0, 0.0))],
        )
        .unwrap();
        // point 1: (0.01+0.04) + 0.25 = 0.30; point 2: 0 + 1 = 1.0
        assert!((loss_eq5(&pred, &target).unwrap() - 0.65).abs() < 1e-15);
    }

    fn toy_norm() -> Normalization {
        Normalization {
            x_mean: vec![0.0; 3],
            x_std: vec![1.0; 3],
            c_log_mean: vec![0.0; 2],
            c_log_std: vec![1.0; 2],
        }
    }

    #[test]
    fn eq2_zero_and_unit_vector() {
        let norm = toy_norm();
        let a = CircuitParams::from_flat(vec![1.0, 1.0]).unwrap();
        assert_eq!(
            loss_eq2(
                std::slice::from_ref(&a),
                std::slice::from_ref(&a),
                &norm,
                Eq2Variant::SquaredL2
            )
            .unwrap(),
            0.0
        );
        // u difference = (1, 0): ln e = 1 in normalized units
        let b = CircuitParams::from_flat(vec![std::f64::consts::E, 1.0]).unwrap();
        let l = loss_eq2(&[b], &[a], &norm, Eq2Variant::SquaredL2).unwrap();
        assert!((l - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eq2_mae_variant() {
        let norm = toy_norm();
        let a = CircuitParams::from_flat(vec![1.0, 1.0]).unwrap();
        let b = CircuitParams::from_flat(vec![std::f64::consts::E, 1.0]).unwrap();
        let l = loss_eq2(&[b], &[a], &norm, Eq2Variant::Mae).unwrap();
        assert!((l - 0.5).abs() < 1e-12);
    }

    #[test]
    fn normalization_round_trip() {
        let xs = vec![
            vec![1.0, 2.0, 3.0],
            vec![2.0, 4.0, 3.0],
            vec![3.0, 6.0, 3.0],
        ];
        let c1 = CircuitParams::from_flat(vec![1e-9, 2e-13]).unwrap();
        let c2 = CircuitParams::from_flat(vec![2e-9, 3e-13]).unwrap();
        let c3 = CircuitParams::from_flat(vec![1.5e-9, 2.5e-13]).unwrap();
        let norm = Normalization::fit(&xs, &[&c1, &c2, &c3]).unwrap();
        let u = norm.c_to_units(&c2);
        let back = norm.units_to_c(&u).unwrap();
        for (a, b) in back.as_slice().iter().zip(c2.as_slice()) {
            assert!((a - b).abs() < 1e-12 * b);
        }
        // constant feature falls back to unit scale
        let xn = norm.normalize_x(&[2.0, 4.0, 3.0]);
        assert_eq!(xn[2], 0.0);
    }
}
