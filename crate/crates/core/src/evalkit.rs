//! Evaluation and comparison: complex MAE metrics, physical-consistency
//! residuals, spectral smoothness, model comparison reports, and
//! generalization curves over shrinking training fractions.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Sample;
use crate::em::SResponse;
use crate::neural::{
    train_direct, train_phase1, train_phase2, DirectKind, DirectModel, ModelBased, NeuralError,
    TrainingConfig,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Em(#[from] crate::em::EmError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SComponent {
    S11,
    S21,
}

/// Mean complex-modulus error of the chosen S-parameter over all points of
/// all prediction/target pairs.
pub fn mae_complex(
    preds: &[SResponse],
    targets: &[SResponse],
    which: SComponent,
) -> Result<f64, EvalError> {
    if preds.is_empty() || preds.len() != targets.len() {
        return Err(EvalError::Usage("empty or mismatched response sets".into()));
    }
    let mut acc = 0.0;
    let mut n = 0usize;
    for (p, t) in preds.iter().zip(targets) {
        if p.points.len() != t.points.len() {
            return Err(EvalError::Usage("grid length mismatch".into()));
        }
        for (pp, tp) in p.points.iter().zip(&t.points) {
            let (a, b) = match which {
                SComponent::S11 => (pp.s11, tp.s11),
                SComponent::S21 => (pp.s21, tp.s21),
            };
            acc += (a - b).abs();
            n += 1;
        }
    }
    Ok(acc / n as f64)
}

/// Worst deviation from the lossless identity |S11|² + |S21|² = 1 over a set.
pub fn max_power_residual(set: &[SResponse]) -> f64 {
    set.iter().map(|r| r.power_residual()).fold(0.0, f64::max)
}

/// Mean squared second difference of |S21| across the grid; a proxy for
/// unphysical ripple in a predicted spectrum.
pub fn smoothness(r: &SResponse) -> Result<f64, EvalError> {
    let m: Vec<f64> = r.points.iter().map(|p| p.s21.abs()).collect();
    if m.len() < 3 {
        return Err(EvalError::Usage(
            "smoothness needs at least 3 points".into(),
        ));
    }
    let acc: f64 = m
        .windows(3)
        .map(|w| (w[2] - 2.0 * w[1] + w[0]).powi(2))
        .sum();
    Ok(acc / (m.len() - 2) as f64)
}

pub fn mean_smoothness(set: &[SResponse]) -> Result<f64, EvalError> {
    if set.is_empty() {
        return Err(EvalError::Usage("empty response set".into()));
    }
    let mut acc = 0.0;
    for r in set {
        acc += smoothness(r)?;
    }
    Ok(acc / set.len() as f64)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelRow {
    pub model: String,
    pub n_params: usize,
    pub train_seconds: f64,
    pub test_mae_s21_complex: f64,
    pub test_mae_s11_complex: f64,
    pub test_smoothness: f64,
    pub max_power_residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_train: usize,
    pub n_test: usize,
    pub config: TrainingConfig,
    pub rows: Vec<ModelRow>,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String, EvalError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Fixed-width table for terminal output.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<14} {:>10} {:>10} {:>12} {:>12} {:>12} {:>12}\n",
            "model", "params", "train_s", "mae_s21", "mae_s11", "smoothness", "power_resid"
        ));
        for r in &self.rows {
            out.push_str(&format!(
                "{:<14} {:>10} {:>10.2} {:>12.6} {:>12.6} {:>12.3e} {:>12.3e}\n",
                r.model,
                r.n_params,
                r.train_seconds,
                r.test_mae_s21_complex,
                r.test_mae_s11_complex,
                r.test_smoothness,
                r.max_power_residual
            ));
        }
        out
    }
}

fn model_based_predictions(
    model: &ModelBased,
    set: &[Sample],
    z0_free: f64,
) -> Result<Vec<SResponse>, EvalError> {
    set.iter()
        .map(|s| {
            model
                .predict_response_on(&s.geometry, &s.response.grid, z0_free)
                .map_err(EvalError::from)
        })
        .collect()
}

fn direct_predictions(model: &DirectModel, set: &[Sample]) -> Result<Vec<SResponse>, EvalError> {
    set.iter()
        .map(|s| model.predict(&s.geometry).map_err(EvalError::from))
        .collect()
}

fn row_from_predictions(
    name: &str,
    n_params: usize,
    train_seconds: f64,
    preds: &[SResponse],
    test: &[Sample],
) -> Result<ModelRow, EvalError> {
    let targets: Vec<SResponse> = test.iter().map(|s| s.response.clone()).collect();
    Ok(ModelRow {
        model: name.to_string(),
        n_params,
        train_seconds,
        test_mae_s21_complex: mae_complex(preds, &targets, SComponent::S21)?,
        test_mae_s11_complex: mae_complex(preds, &targets, SComponent::S11)?,
        test_smoothness: mean_smoothness(preds)?,
        max_power_residual: max_power_residual(preds),
    })
}

/// Trains the model-based pipeline (both phases) plus the three direct
/// baselines on the same split and reports test metrics for each.
pub fn compare_models(
    train: &[Sample],
    test: &[Sample],
    z0_free: f64,
    config: &TrainingConfig,
) -> Result<EvalReport, EvalError> {
    let mut rows = Vec::with_capacity(4);

    let t0 = Instant::now();
    let (phase1, _) = train_phase1(train, test, config)?;
    let (model, _) = train_phase2(train, test, &phase1, z0_free, config)?;
    let secs = t0.elapsed().as_secs_f64();
    let preds = model_based_predictions(&model, test, z0_free)?;
    rows.push(row_from_predictions(
        "model-based",
        model.count_params(),
        secs,
        &preds,
        test,
    )?);

    for (name, kind) in [
        ("dnn", DirectKind::Dnn),
        ("dnn-tanh", DirectKind::DnnTanh),
        ("rbfn", DirectKind::Rbfn),
    ] {
        let t0 = Instant::now();
        let (m, _) = train_direct(kind, train, test, config)?;
        let secs = t0.elapsed().as_secs_f64();
        let preds = direct_predictions(&m, test)?;
        rows.push(row_from_predictions(
            name,
            m.count_params(),
            secs,
            &preds,
            test,
        )?);
    }

    Ok(EvalReport {
        n_train: train.len(),
        n_test: test.len(),
        config: config.clone(),
        rows,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveModel {
    ModelBased,
    Dnn,
    DnnTanh,
    Rbfn,
}

impl CurveModel {
    fn name(self) -> &'static str {
        match self {
            CurveModel::ModelBased => "model-based",
            CurveModel::Dnn => "dnn",
            CurveModel::DnnTanh => "dnn-tanh",
            CurveModel::Rbfn => "rbfn",
        }
    }
}

/// Retrains each requested model on shrinking fractions of the training set
/// and reports test-set complex S21 MAE as CSV
/// (`fraction,model,test_mae_s21_complex`).
pub fn generalization_curve(
    train: &[Sample],
    test: &[Sample],
    fractions: &[f64],
    models: &[CurveModel],
    z0_free: f64,
    config: &TrainingConfig,
) -> Result<String, EvalError> {
    if train.is_empty() || test.is_empty() {
        return Err(EvalError::Usage("empty split".into()));
    }
    if fractions.iter().any(|&f| !(0.0 < f && f <= 1.0)) {
        return Err(EvalError::Usage("fractions must lie in (0, 1]".into()));
    }
    if models.is_empty() {
        return Err(EvalError::Usage("no models requested".into()));
    }
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(5));
    order.shuffle(&mut rng);

    let mut csv = String::from("fraction,model,test_mae_s21_complex\n");
    let targets: Vec<SResponse> = test.iter().map(|s| s.response.clone()).collect();
    for &frac in fractions {
        let n = ((frac * train.len() as f64).ceil() as usize).clamp(1, train.len());
        let subset: Vec<Sample> = order[..n].iter().map(|&i| train[i].clone()).collect();
        for &m in models {
            let preds = match m {
                CurveModel::ModelBased => {
                    let (phase1, _) = train_phase1(&subset, test, config)?;
                    let (model, _) = train_phase2(&subset, test, &phase1, z0_free, config)?;
                    model_based_predictions(&model, test, z0_free)?
                }
                CurveModel::Dnn => {
                    let (model, _) = train_direct(DirectKind::Dnn, &subset, test, config)?;
                    direct_predictions(&model, test)?
                }
                CurveModel::DnnTanh => {
                    let (model, _) = train_direct(DirectKind::DnnTanh, &subset, test, config)?;
                    direct_predictions(&model, test)?
                }
                CurveModel::Rbfn => {
                    let (model, _) = train_direct(DirectKind::Rbfn, &subset, test, config)?;
                    direct_predictions(&model, test)?
                }
            };
            let mae = mae_complex(&preds, &targets, SComponent::S21)?;
            csv.push_str(&format!("{},{},{:.8e}\n", frac, m.name(), mae));
        }
    }
    Ok(csv)
}
