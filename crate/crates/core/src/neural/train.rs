use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{topology_for_geometry, Geometry, Sample};
use crate::em::{f_phys, CircuitParams, SPoint, SResponse};
use crate::grad::{loss_grad_circuit, LossKind};

use super::adam::{AdamHyper, AdamState};
use super::losses::{loss_eq2, Eq2Variant, Normalization};
use super::mlp::{Activation, Mlp, OutputKind};
use super::rbfn::Rbfn;
use super::NeuralError;

/// Serializable stand-in for [`LossKind`] used in configs and checkpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseLoss {
    Eq1,
    Eq3,
    Eq5,
}

impl From<PhaseLoss> for LossKind {
    fn from(p: PhaseLoss) -> Self {
        match p {
            PhaseLoss::Eq1 => LossKind::LegacyEq1,
            PhaseLoss::Eq3 => LossKind::S21MaeEq3,
            PhaseLoss::Eq5 => LossKind::PhaseAwareEq5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingConfig {
    pub seed: u64,
    pub epochs_phase1: usize,
    pub epochs_phase2: usize,
    /// None = full batch.
    pub batch_size: Option<usize>,
    pub lr_phase1: f64,
    pub lr_phase2: f64,
    pub phase2_loss: PhaseLoss,
    pub eq2_variant: Eq2Variant,
    pub hidden_sizes: Vec<usize>,
    pub hidden_activation: Activation,
    pub direct_epochs: usize,
    pub direct_lr: f64,
    pub dropout: f64,
    pub dnn_hidden: Vec<usize>,
    pub rbfn_centers: usize,
    pub rbfn_width_scale: f64,
    pub rbfn_ridge: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            epochs_phase1: 2000,
            epochs_phase2: 1000,
            batch_size: None,
            lr_phase1: 4e-4,
            lr_phase2: 3e-4,
            phase2_loss: PhaseLoss::Eq3,
            eq2_variant: Eq2Variant::SquaredL2,
            hidden_sizes: vec![14, 10],
            hidden_activation: Activation::Tanh,
            direct_epochs: 25,
            direct_lr: 1e-3,
            dropout: 0.1,
            dnn_hidden: vec![4, 8, 16, 32, 64, 128, 256, 512],
            rbfn_centers: 200,
            rbfn_width_scale: 1.0,
            rbfn_ridge: 1e-8,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train: f64,
    pub test: f64,
}

/// The geometry-to-circuit network with its normalization; predictions go
/// through the physics, so they satisfy the lossless identity exactly.
#[derive(Clone, Debug)]
pub struct ModelBased {
    pub mlp: Mlp,
    pub norm: Normalization,
}

impl ModelBased {
    pub fn predict_circuit(&self, x: &Geometry) -> Result<CircuitParams, NeuralError> {
        let xn = self.norm.normalize_x(&x.as_vector());
        let u = self.mlp.forward(&xn)?;
        self.norm.units_to_c(&u)
    }

    pub fn predict_response(&self, x: &Geometry, z0_free: f64) -> Result<SResponse, NeuralError> {
        let c = self.predict_circuit(x)?;
        let topo = topology_for_geometry(x).map_err(|e| NeuralError::Usage(e.to_string()))?;
        let grid = crate::em::FrequencyGrid::default_band();
        Ok(f_phys(&c, &topo, &grid, z0_free)?)
    }

    pub fn predict_response_on(
        &self,
        x: &Geometry,
        grid: &crate::em::FrequencyGrid,
        z0_free: f64,
    ) -> Result<SResponse, NeuralError> {
        let c = self.predict_circuit(x)?;
        let topo = topology_for_geometry(x).map_err(|e| NeuralError::Usage(e.to_string()))?;
        Ok(f_phys(&c, &topo, grid, z0_free)?)
    }

    pub fn count_params(&self) -> usize {
        self.mlp.count_params()
    }
}

fn check_dataset(samples: &[Sample]) -> Result<(), NeuralError> {
    if samples.is_empty() {
        return Err(NeuralError::Usage("empty dataset".into()));
    }
    Ok(())
}

fn batches(n: usize, batch_size: Option<usize>, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    match batch_size {
        None => vec![idx],
        Some(b) => {
            idx.shuffle(rng);
            idx.chunks(b.max(1)).map(|c| c.to_vec()).collect()
        }
    }
}

fn eq2_losses(
    model: &ModelBased,
    train: &[Sample],
    test: &[Sample],
    variant: Eq2Variant,
) -> Result<(f64, f64), NeuralError> {
    let eval = |set: &[Sample]| -> Result<f64, NeuralError> {
        let preds = set
            .iter()
            .map(|s| model.predict_circuit(&s.geometry))
            .collect::<Result<Vec<_>, _>>()?;
        let targets: Vec<CircuitParams> = set.iter().map(|s| s.circuit.clone()).collect();
        loss_eq2(&preds, &targets, &model.norm, variant)
    };
    Ok((eval(train)?, eval(test)?))
}

/// Phase 1: fit the MLP to the extracted circuit labels with Adam on the
/// normalized circuit loss. Deterministic for a fixed seed.
pub fn train_phase1(
    train: &[Sample],
    test: &[Sample],
    config: &TrainingConfig,
) -> Result<(ModelBased, Vec<EpochLoss>), NeuralError> {
    check_dataset(train)?;
    check_dataset(test)?;
    let xs: Vec<Vec<f64>> = train
        .iter()
        .map(|s| s.geometry.as_vector().to_vec())
        .collect();
    let cs: Vec<&CircuitParams> = train.iter().map(|s| &s.circuit).collect();
    let norm = Normalization::fit(&xs, &cs)?;

    let n_c = train[0].circuit.len();
    let mut sizes = vec![3];
    sizes.extend_from_slice(&config.hidden_sizes);
    sizes.push(n_c);
    let mlp = Mlp::new(
        sizes,
        config.hidden_activation,
        OutputKind::Softplus,
        config.seed,
    )?;
    let mut model = ModelBased { mlp, norm };

    let xn: Vec<Vec<f64>> = train
        .iter()
        .map(|s| model.norm.normalize_x(&s.geometry.as_vector()))
        .collect();
    let targets: Vec<Vec<f64>> = train
        .iter()
        .map(|s| model.norm.c_to_units(&s.circuit))
        .collect();

    let mut adam = AdamState::new(
        model.mlp.count_params(),
        AdamHyper::with_lr(config.lr_phase1),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let mut history = Vec::with_capacity(config.epochs_phase1);
    for epoch in 0..config.epochs_phase1 {
        for batch in batches(train.len(), config.batch_size, &mut rng) {
            let mut grad = vec![0.0; model.mlp.count_params()];
            let scale = 1.0 / batch.len() as f64;
            for &i in &batch {
                let (u, cache) = model.mlp.forward_cached(&xn[i], None)?;
                let d_u: Vec<f64> = match config.eq2_variant {
                    Eq2Variant::SquaredL2 => u
                        .iter()
                        .zip(&targets[i])
                        .map(|(a, b)| 2.0 * (a - b) * scale)
                        .collect(),
                    Eq2Variant::Mae => u
                        .iter()
                        .zip(&targets[i])
                        .map(|(a, b)| (a - b).signum() * scale / u.len() as f64)
                        .collect(),
                };
                let g = model.mlp.backward(&cache, &d_u)?;
                for (gi, gj) in grad.iter_mut().zip(&g) {
                    *gi += gj;
                }
            }
            adam.step(model.mlp.params_mut(), &grad)?;
        }
        let (train_loss, test_loss) = eq2_losses(&model, train, test, config.eq2_variant)?;
        history.push(EpochLoss {
            epoch,
            train: train_loss,
            test: test_loss,
        });
    }
    Ok((model, history))
}

fn phase2_set_loss(
    model: &ModelBased,
    set: &[Sample],
    z0_free: f64,
    kind: LossKind,
) -> Result<f64, NeuralError> {
    let mut acc = 0.0;
    for s in set {
        let pred = model.predict_response_on(&s.geometry, &s.response.grid, z0_free)?;
        acc += match kind {
            LossKind::LegacyEq1 | LossKind::S21MaeEq3 => {
                super::losses::loss_eq3(&pred, &s.response)?
            }
            LossKind::PhaseAwareEq5 => super::losses::loss_eq5(&pred, &s.response)?,
        };
    }
    Ok(acc / set.len() as f64)
}

/// Phase 2: retrain end-to-end through the physics on the selected
/// S-parameter loss. Keeps the best-test-loss parameters seen, starting
/// from the phase-1 initialization, so the recorded test error never
/// exceeds the starting point.
pub fn train_phase2(
    train: &[Sample],
    test: &[Sample],
    init: &ModelBased,
    z0_free: f64,
    config: &TrainingConfig,
) -> Result<(ModelBased, Vec<EpochLoss>), NeuralError> {
    check_dataset(train)?;
    check_dataset(test)?;
    let kind: LossKind = config.phase2_loss.into();
    let mut model = init.clone();
    let xn: Vec<Vec<f64>> = train
        .iter()
        .map(|s| model.norm.normalize_x(&s.geometry.as_vector()))
        .collect();
    let topos = train
        .iter()
        .map(|s| topology_for_geometry(&s.geometry).map_err(|e| NeuralError::Usage(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;

    let mut adam = AdamState::new(
        model.mlp.count_params(),
        AdamHyper::with_lr(config.lr_phase2),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(2));
    let mut best = model.clone();
    let mut best_test = phase2_set_loss(&model, test, z0_free, kind)?;
    let mut history = Vec::with_capacity(config.epochs_phase2);
    for epoch in 0..config.epochs_phase2 {
        let mut train_acc = 0.0;
        for batch in batches(train.len(), config.batch_size, &mut rng) {
            let mut grad = vec![0.0; model.mlp.count_params()];
            let scale = 1.0 / batch.len() as f64;
            for &i in &batch {
                let s = &train[i];
                let (u, cache) = model.mlp.forward_cached(&xn[i], None)?;
                let c = model.norm.units_to_c(&u)?;
                let (loss, dldc) =
                    loss_grad_circuit(&c, &s.response, &topos[i], &s.response.grid, z0_free, kind)?;
                train_acc += loss;
                let dc_du = model.norm.dc_du(&c);
                let d_u: Vec<f64> = dldc
                    .iter()
                    .zip(&dc_du)
                    .map(|(d, j)| d * j * scale)
                    .collect();
                let g = model.mlp.backward(&cache, &d_u)?;
                for (gi, gj) in grad.iter_mut().zip(&g) {
                    *gi += gj;
                }
            }
            adam.step(model.mlp.params_mut(), &grad)?;
        }
        let test_loss = phase2_set_loss(&model, test, z0_free, kind)?;
        if test_loss < best_test {
            best_test = test_loss;
            best = model.clone();
        }
        history.push(EpochLoss {
            epoch,
            train: train_acc / train.len() as f64,
            test: test_loss,
        });
    }
    Ok((best, history))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectKind {
    Dnn,
    DnnTanh,
    Rbfn,
}

/// A purely data-driven baseline mapping geometry straight to the flattened
/// S-vector (Re/Im of S11 and S21 per frequency).
#[derive(Clone, Debug)]
pub enum DirectModel {
    Dnn {
        mlp: Mlp,
        x_mean: Vec<f64>,
        x_std: Vec<f64>,
        grid: crate::em::FrequencyGrid,
    },
    Rbfn {
        net: Rbfn,
        x_mean: Vec<f64>,
        x_std: Vec<f64>,
        grid: crate::em::FrequencyGrid,
    },
}

/// Per-frequency [Re s11, Im s11, Re s21, Im s21], length 4·N_f.
pub fn flatten_response(r: &SResponse) -> Vec<f64> {
    let mut out = Vec::with_capacity(4 * r.points.len());
    for p in &r.points {
        out.extend_from_slice(&[p.s11.re, p.s11.im, p.s21.re, p.s21.im]);
    }
    out
}

pub fn unflatten_response(
    v: &[f64],
    grid: &crate::em::FrequencyGrid,
) -> Result<SResponse, NeuralError> {
    if v.len() != 4 * grid.n_points() {
        return Err(NeuralError::Usage(
            "flattened S-vector length mismatch".into(),
        ));
    }
    let points = v
        .chunks_exact(4)
        .map(|c| {
            let s11 = crate::em::ComplexScalar::new(c[0], c[1]);
            let s21 = crate::em::ComplexScalar::new(c[2], c[3]);
            // direct models predict only S11/S21; mirror them into the
            // remaining slots so metrics over S11/S21 can share one type
            SPoint {
                s11,
                s21,
                s12: s21,
                s22: s11,
            }
        })
        .collect();
    Ok(SResponse::new(*grid, points)?)
}

fn x_stats(train: &[Sample]) -> (Vec<f64>, Vec<f64>) {
    let d = 3;
    let n = train.len() as f64;
    let mut mean = vec![0.0; d];
    for s in train {
        for (m, v) in mean.iter_mut().zip(s.geometry.as_vector()) {
            *m += v / n;
        }
    }
    let mut std = vec![0.0; d];
    for s in train {
        for (sd, (v, m)) in std.iter_mut().zip(s.geometry.as_vector().iter().zip(&mean)) {
            *sd += (v - m).powi(2) / n;
        }
    }
    for s in &mut std {
        *s = s.sqrt();
        if *s < 1e-12 {
            *s = 1.0;
        }
    }
    (mean, std)
}

fn normalize(x: &[f64], mean: &[f64], std: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(mean.iter().zip(std))
        .map(|(v, (m, s))| (v - m) / s)
        .collect()
}

impl DirectModel {
    pub fn predict(&self, x: &Geometry) -> Result<SResponse, NeuralError> {
        match self {
            DirectModel::Dnn {
                mlp,
                x_mean,
                x_std,
                grid,
            } => {
                let y = mlp.forward(&normalize(&x.as_vector(), x_mean, x_std))?;
                unflatten_response(&y, grid)
            }
            DirectModel::Rbfn {
                net,
                x_mean,
                x_std,
                grid,
            } => {
                let y = net.forward(&normalize(&x.as_vector(), x_mean, x_std));
                unflatten_response(&y, grid)
            }
        }
    }

    pub fn count_params(&self) -> usize {
        match self {
            DirectModel::Dnn { mlp, .. } => mlp.count_params(),
            DirectModel::Rbfn { net, .. } => net.count_params(),
        }
    }
}

fn component_mae(pred: &[f64], target: &[f64]) -> f64 {
    pred.iter()
        .zip(target)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        / pred.len() as f64
}

fn dnn_set_mae(mlp: &Mlp, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> Result<f64, NeuralError> {
    let mut acc = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        acc += component_mae(&mlp.forward(x)?, y);
    }
    Ok(acc / xs.len() as f64)
}

/// Trains a direct baseline: DNN variants with Adam on component MAE and
/// dropout regularization, or an RBFN with k-means centers and ridge
/// least-squares readout.
pub fn train_direct(
    kind: DirectKind,
    train: &[Sample],
    test: &[Sample],
    config: &TrainingConfig,
) -> Result<(DirectModel, Vec<EpochLoss>), NeuralError> {
    check_dataset(train)?;
    check_dataset(test)?;
    let grid = train[0].response.grid;
    let (x_mean, x_std) = x_stats(train);
    let xs: Vec<Vec<f64>> = train
        .iter()
        .map(|s| normalize(&s.geometry.as_vector(), &x_mean, &x_std))
        .collect();
    let ys: Vec<Vec<f64>> = train
        .iter()
        .map(|s| flatten_response(&s.response))
        .collect();
    let xs_test: Vec<Vec<f64>> = test
        .iter()
        .map(|s| normalize(&s.geometry.as_vector(), &x_mean, &x_std))
        .collect();
    let ys_test: Vec<Vec<f64>> = test.iter().map(|s| flatten_response(&s.response)).collect();

    match kind {
        DirectKind::Rbfn => {
            let net = Rbfn::fit(
                &xs,
                &ys,
                config.rbfn_centers,
                config.rbfn_width_scale,
                config.rbfn_ridge,
                config.seed,
            )?;
            let train_mae = xs
                .iter()
                .zip(&ys)
                .map(|(x, y)| component_mae(&net.forward(x), y))
                .sum::<f64>()
                / xs.len() as f64;
            let test_mae = xs_test
                .iter()
                .zip(&ys_test)
                .map(|(x, y)| component_mae(&net.forward(x), y))
                .sum::<f64>()
                / xs_test.len() as f64;
            let history = vec![EpochLoss {
                epoch: 0,
                train: train_mae,
                test: test_mae,
            }];
            Ok((
                DirectModel::Rbfn {
                    net,
                    x_mean,
                    x_std,
                    grid,
                },
                history,
            ))
        }
        DirectKind::Dnn | DirectKind::DnnTanh => {
            let activation = match kind {
                DirectKind::Dnn => Activation::Relu,
                _ => Activation::Tanh,
            };
            let mut sizes = vec![3];
            sizes.extend_from_slice(&config.dnn_hidden);
            sizes.push(4 * grid.n_points());
            let mut mlp = Mlp::new(sizes, activation, OutputKind::Linear, config.seed)?;
            let mut adam = AdamState::new(mlp.count_params(), AdamHyper::with_lr(config.direct_lr));
            let mut batch_rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(3));
            let mut drop_rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(4));
            let mut history = Vec::with_capacity(config.direct_epochs);
            for epoch in 0..config.direct_epochs {
                for batch in batches(train.len(), config.batch_size, &mut batch_rng) {
                    let mut grad = vec![0.0; mlp.count_params()];
                    let scale = 1.0 / batch.len() as f64;
                    for &i in &batch {
                        let dropout = if config.dropout > 0.0 {
                            Some((config.dropout, &mut drop_rng))
                        } else {
                            None
                        };
                        let (y, cache) = mlp.forward_cached(&xs[i], dropout)?;
                        let n_out = y.len() as f64;
                        let d_out: Vec<f64> = y
                            .iter()
                            .zip(&ys[i])
                            .map(|(a, b)| (a - b).signum() * scale / n_out)
                            .collect();
                        let g = mlp.backward(&cache, &d_out)?;
                        for (gi, gj) in grad.iter_mut().zip(&g) {
                            *gi += gj;
                        }
                    }
                    adam.step(mlp.params_mut(), &grad)?;
                }
                // evaluation without dropout; the big baselines are slow
                // enough that per-epoch test sweeps dominate, so sample
                if epoch.is_multiple_of(10) || epoch + 1 == config.direct_epochs {
                    let train_mae = dnn_set_mae(&mlp, &xs, &ys)?;
                    let test_mae = dnn_set_mae(&mlp, &xs_test, &ys_test)?;
                    history.push(EpochLoss {
                        epoch,
                        train: train_mae,
                        test: test_mae,
                    });
                }
            }
            Ok((
                DirectModel::Dnn {
                    mlp,
                    x_mean,
                    x_std,
                    grid,
                },
                history,
            ))
        }
    }
}
