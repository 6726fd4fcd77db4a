//! End-to-end acceptance checks for the whole pipeline. Runs once as a
//! single test so the expensive artifacts (dataset, trained models) are
//! shared; prints one pass/fail line per criterion and fails at the end if
//! any criterion failed. Run with `--nocapture` to watch the lines appear.

use std::fmt::Write as _;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fss_core::data::{
    read_dataset, read_touchstone, select_samples, split_indices, write_dataset, write_touchstone,
    Dataset, SweepSpec,
};
use fss_core::em::{
    abcd_line, abcd_shunt, admittance, cascade, eval_point, f_phys, CircuitParams, FrequencyGrid,
    ResonatorKind, Topology, Z0_FREE_SPACE,
};
use fss_core::evalkit::{
    compare_models, generalization_curve, mae_complex, CurveModel, SComponent,
};
use fss_core::grad::{finite_diff_check, loss_grad_circuit, LossKind};
use fss_core::neural::{
    batch_mean, loss_eq3, train_phase1, train_phase2, Mlp, ModelBased, Normalization, OutputKind,
    PhaseLoss, TrainingConfig,
};

struct Report {
    lines: Vec<(String, bool)>,
}

impl Report {
    fn new() -> Self {
        Report { lines: Vec::new() }
    }

    fn record(&mut self, id: usize, name: &str, pass: bool, detail: String) {
        let verdict = if pass { "PASS" } else { "FAIL" };
        let line = format!("criterion {id:2} {name}: {verdict} ({detail})");
        println!("{line}");
        self.lines.push((line, pass));
    }

    fn finish(self) {
        let mut failed = String::new();
        for (line, pass) in &self.lines {
            if !pass {
                let _ = writeln!(failed, "{line}");
            }
        }
        assert!(failed.is_empty(), "failed criteria:\n{failed}");
    }
}

fn random_circuits(n: usize, seed: u64) -> Vec<CircuitParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |lo: f64, hi: f64| (rng.random_range(lo.ln()..hi.ln())).exp();
    (0..n)
        .map(|_| {
            let pairs = [
                (draw(1e-10, 1e-8), draw(1e-14, 1e-12)),
                (draw(1e-10, 1e-8), draw(1e-14, 1e-12)),
            ];
            CircuitParams::from_lc_pairs(&pairs).unwrap()
        })
        .collect()
}

/// Loss of the model on one sample, recomputed from scratch; used as the
/// finite-difference reference for the end-to-end gradient check.
fn end_to_end_loss(model: &ModelBased, sample: &fss_core::data::Sample, topo: &Topology) -> f64 {
    let xn = model.norm.normalize_x(&sample.geometry.as_vector());
    let u = model.mlp.forward(&xn).unwrap();
    let c = model.norm.units_to_c(&u).unwrap();
    let pred = f_phys(&c, topo, &sample.response.grid, Z0_FREE_SPACE).unwrap();
    loss_eq3(&pred, &sample.response).unwrap()
}

#[test]
fn acceptance() {
    let mut report = Report::new();
    let z0 = Z0_FREE_SPACE;
    let grid = FrequencyGrid::default_band();
    let gap = Topology::two_screen_air(9.545e-3).unwrap();

    // ---- criterion 1: power conservation on 1000 random circuits ----
    let circuits = random_circuits(1000, 11);
    let t0 = Instant::now();
    let responses: Vec<_> = circuits
        .iter()
        .map(|c| f_phys(c, &gap, &grid, z0).unwrap())
        .collect();
    let worst_power = responses
        .iter()
        .map(|r| r.power_residual())
        .fold(0.0f64, f64::max);
    let secs = t0.elapsed().as_secs_f64();
    report.record(
        1,
        "power conservation",
        worst_power < 1e-10 && secs < 5.0,
        format!("max residual {worst_power:.2e}, {secs:.1}s"),
    );

    // ---- criterion 2: unimodularity and reciprocity on the same sweep ----
    let mut worst_det = 0.0f64;
    let mut worst_recip = 0.0f64;
    for (c, r) in circuits.iter().zip(&responses) {
        for p in &r.points {
            worst_recip = worst_recip.max((p.s21 - p.s12).abs());
        }
        for f in grid.points_hz().step_by(20) {
            let y0 = admittance(
                ResonatorKind::ParallelLc,
                c.inductance(0),
                c.capacitance(0),
                f,
            )
            .unwrap();
            let y1 = admittance(
                ResonatorKind::ParallelLc,
                c.inductance(1),
                c.capacitance(1),
                f,
            )
            .unwrap();
            let m = cascade(&[
                abcd_shunt(y0).unwrap(),
                abcd_line::<f64>(9.545e-3, 1.0, f, z0).unwrap(),
                abcd_shunt(y1).unwrap(),
            ])
            .unwrap();
            let det = m.det();
            worst_det = worst_det.max((det.re - 1.0).abs()).max(det.im.abs());
        }
    }
    report.record(
        2,
        "reciprocity and unimodularity",
        worst_det < 1e-12 && worst_recip < 1e-12,
        format!("|det-1| {worst_det:.2e}, |s21-s12| {worst_recip:.2e}"),
    );

    // ---- criterion 3: full transparency of a single screen at resonance ----
    let single = Topology::single_screen(ResonatorKind::ParallelLc);
    let mut worst_res = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let l = rng.random_range((1e-10f64).ln()..(1e-8f64).ln()).exp();
        let cc = rng.random_range((1e-14f64).ln()..(1e-12f64).ln()).exp();
        let f0 = 1.0 / (2.0 * std::f64::consts::PI * (l * cc).sqrt());
        let s = eval_point(&[l, cc], &single, f0, z0).unwrap();
        worst_res = worst_res.max((s.s21.abs() - 1.0).abs());
    }
    report.record(
        3,
        "resonance transparency",
        worst_res < 1e-9,
        format!("max | |s21(f0)|-1 | {worst_res:.2e}"),
    );

    // Dataset used by everything downstream: the default 9x9x9 sweep.
    let spec = SweepSpec::default();
    let dataset = Dataset::generate(&spec).unwrap();
    assert_eq!(dataset.samples.len(), 729);
    let (train_idx, test_idx) = split_indices(dataset.samples.len(), 0.8, 42).unwrap();
    let train = select_samples(&dataset, &train_idx);
    let test = select_samples(&dataset, &test_idx);
    let config = TrainingConfig::default();

    // ---- criterion 4: gradient correctness ----
    let t0 = Instant::now();
    let mut worst_fd = 0.0f64;
    let coarse = FrequencyGrid::new(6e9, 16e9, 41).unwrap();
    for c in random_circuits(100, 17) {
        worst_fd = worst_fd.max(finite_diff_check(&c, &gap, &coarse, z0, 1e-6).unwrap());
    }
    // End to end: network -> circuit -> physics -> loss, gradient with
    // respect to every network weight against central differences.
    let xs: Vec<Vec<f64>> = train
        .iter()
        .map(|s| s.geometry.as_vector().to_vec())
        .collect();
    let cs: Vec<&CircuitParams> = train.iter().map(|s| &s.circuit).collect();
    let norm = Normalization::fit(&xs, &cs).unwrap();
    let mlp = Mlp::new(
        vec![3, 14, 10, 4],
        config.hidden_activation,
        OutputKind::Softplus,
        123,
    )
    .unwrap();
    let mut model = ModelBased { mlp, norm };
    let sample = &train[0];
    let topo = fss_core::data::topology_for_geometry(&sample.geometry).unwrap();
    let xn = model.norm.normalize_x(&sample.geometry.as_vector());
    let (u, cache) = model.mlp.forward_cached(&xn, None).unwrap();
    let c = model.norm.units_to_c(&u).unwrap();
    let (_, dldc) = loss_grad_circuit(
        &c,
        &sample.response,
        &topo,
        &sample.response.grid,
        z0,
        LossKind::S21MaeEq3,
    )
    .unwrap();
    let dc_du = model.norm.dc_du(&c);
    let d_u: Vec<f64> = dldc.iter().zip(&dc_du).map(|(d, j)| d * j).collect();
    let analytic = model.mlp.backward(&cache, &d_u).unwrap();
    let h = 1e-5;
    let mut max_dev = 0.0f64;
    let max_mag = analytic.iter().fold(1e-12f64, |a, g| a.max(g.abs()));
    #[allow(clippy::needless_range_loop)]
    for i in 0..analytic.len() {
        let orig = model.mlp.params()[i];
        model.mlp.params_mut()[i] = orig + h;
        let lp = end_to_end_loss(&model, sample, &topo);
        model.mlp.params_mut()[i] = orig - h;
        let lm = end_to_end_loss(&model, sample, &topo);
        model.mlp.params_mut()[i] = orig;
        max_dev = max_dev.max((analytic[i] - (lp - lm) / (2.0 * h)).abs());
    }
    let end_to_end = max_dev / max_mag;
    let secs = t0.elapsed().as_secs_f64();
    report.record(
        4,
        "gradient correctness",
        worst_fd < 1e-5 && end_to_end < 1e-5 && secs < 30.0,
        format!("jacobian fd {worst_fd:.2e}, end-to-end fd {end_to_end:.2e}, {secs:.1}s"),
    );

    // ---- criterion 5: second phase halves the first-phase error ----
    let t0 = Instant::now();
    let (phase1, _) = train_phase1(&train, &test, &config).unwrap();
    let (phase2, _) = train_phase2(&train, &test, &phase1, z0, &config).unwrap();
    let train_secs = t0.elapsed().as_secs_f64();
    let targets: Vec<_> = test.iter().map(|s| s.response.clone()).collect();
    let predict_all = |m: &ModelBased| -> Vec<_> {
        test.iter()
            .map(|s| {
                m.predict_response_on(&s.geometry, &s.response.grid, z0)
                    .unwrap()
            })
            .collect()
    };
    let p1_preds = predict_all(&phase1);
    let p2_preds = predict_all(&phase2);
    let p1_loss = batch_mean(&p1_preds, &targets, loss_eq3).unwrap();
    let p2_loss = batch_mean(&p2_preds, &targets, loss_eq3).unwrap();
    report.record(
        5,
        "two-phase improvement",
        p2_loss <= 0.6 * p1_loss && train_secs < 300.0,
        format!(
            "phase1 {p1_loss:.3e}, phase2 {p2_loss:.3e}, ratio {:.2}, {train_secs:.0}s",
            p2_loss / p1_loss
        ),
    );

    // ---- criterion 6: phase-aware loss recovers reflection accuracy ----
    let mut config_eq5 = config.clone();
    config_eq5.phase2_loss = PhaseLoss::Eq5;
    let (phase2_eq5, _) = train_phase2(&train, &test, &phase1, z0, &config_eq5).unwrap();
    let eq5_preds = predict_all(&phase2_eq5);
    let s11_eq3 = mae_complex(&p2_preds, &targets, SComponent::S11).unwrap();
    let s11_eq5 = mae_complex(&eq5_preds, &targets, SComponent::S11).unwrap();
    report.record(
        6,
        "phase-aware gain",
        s11_eq5 * 2.0 <= s11_eq3,
        format!(
            "s11 mae {s11_eq3:.3e} -> {s11_eq5:.3e}, gain {:.2}x",
            s11_eq3 / s11_eq5
        ),
    );

    // ---- criteria 7, 8, 11: the full model comparison ----
    let t0 = Instant::now();
    let cmp = compare_models(&train, &test, z0, &config).unwrap();
    let row = |name: &str| cmp.rows.iter().find(|r| r.model == name).unwrap();
    let mb = row("model-based");
    let dnn = row("dnn");
    let dnn_tanh = row("dnn-tanh");
    let rbfn = row("rbfn");
    report.record(
        7,
        "accuracy ordering and parameter budget",
        mb.test_mae_s21_complex < rbfn.test_mae_s21_complex
            && rbfn.test_mae_s21_complex < dnn.test_mae_s21_complex
            && mb.n_params <= 300
            && [dnn, dnn_tanh, rbfn].iter().all(|r| r.n_params > 100_000),
        format!(
            "mae mb {:.3e} < rbfn {:.3e} < dnn {:.3e}; params {} vs {}/{}/{}",
            mb.test_mae_s21_complex,
            rbfn.test_mae_s21_complex,
            dnn.test_mae_s21_complex,
            mb.n_params,
            dnn.n_params,
            dnn_tanh.n_params,
            rbfn.n_params
        ),
    );
    report.record(
        8,
        "prediction smoothness",
        mb.test_smoothness <= 0.1 * dnn.test_smoothness,
        format!(
            "mb {:.2e} vs dnn {:.2e}",
            mb.test_smoothness, dnn.test_smoothness
        ),
    );

    // ---- criterion 9: generalization with limited data ----
    let fractions = [0.1, 0.25, 0.5, 0.75, 0.9];
    let models = [
        CurveModel::ModelBased,
        CurveModel::Dnn,
        CurveModel::DnnTanh,
        CurveModel::Rbfn,
    ];
    let csv = generalization_curve(&train, &test, &fractions, &models, z0, &config).unwrap();
    let compare_secs = t0.elapsed().as_secs_f64();
    let lookup = |frac: &str, model: &str| -> f64 {
        csv.lines()
            .find(|l| l.starts_with(&format!("{frac},{model},")))
            .and_then(|l| l.rsplit(',').next())
            .and_then(|v| v.parse().ok())
            .unwrap()
    };
    let mb_01 = lookup("0.1", "model-based");
    let mb_09 = lookup("0.9", "model-based");
    let dnn_01 = lookup("0.1", "dnn");
    let dnn_09 = lookup("0.9", "dnn");
    report.record(
        9,
        "limited-data generalization",
        mb_01 < dnn_01 && mb_09 <= mb_01 && dnn_09 <= dnn_01,
        format!(
            "at 0.1: mb {mb_01:.3e} vs dnn {dnn_01:.3e}; at 0.9: mb {mb_09:.3e}, dnn {dnn_09:.3e}"
        ),
    );

    // ---- criterion 10: file-format fidelity ----
    let dir = tempfile::tempdir().unwrap();
    let ts_path = dir.path().join("resp.s2p");
    write_touchstone(&dataset.samples[0].response, &ts_path, z0).unwrap();
    let (back, z0_back) = read_touchstone(&ts_path).unwrap();
    let ts_ok = z0_back == z0
        && back
            .points
            .iter()
            .zip(&dataset.samples[0].response.points)
            .all(|(a, b)| {
                (a.s11 - b.s11).abs() < 1e-8
                    && (a.s21 - b.s21).abs() < 1e-8
                    && (a.s12 - b.s12).abs() < 1e-8
                    && (a.s22 - b.s22).abs() < 1e-8
            });
    let ds_path = dir.path().join("data.json");
    write_dataset(&dataset, &ds_path).unwrap();
    let ds_back = read_dataset(&ds_path).unwrap();
    let ds_ok =
        ds_back.samples.len() == dataset.samples.len()
            && ds_back.samples.iter().zip(&dataset.samples).all(|(a, b)| {
                a.circuit.as_slice() == b.circuit.as_slice() && a.response == b.response
            });
    let bad_ts = dir.path().join("bad.s2p");
    std::fs::write(&bad_ts, "! comment\n# GHz S RI R 376\n6.0 0.1 0.2 oops\n").unwrap();
    let ts_err = read_touchstone(&bad_ts).unwrap_err().to_string();
    let bad_ds = dir.path().join("bad.json");
    std::fs::write(&bad_ds, "{ \"format_version\": 1,\n  broken\n").unwrap();
    let ds_err = read_dataset(&bad_ds).unwrap_err().to_string();
    report.record(
        10,
        "format fidelity",
        ts_ok && ds_ok && ts_err.contains("line 3") && ds_err.contains("line"),
        format!("round trips ok: {ts_ok}/{ds_ok}; errors: '{ts_err}', '{ds_err}'"),
    );

    // ---- criterion 11: desk-scale budget ----
    report.record(
        11,
        "runtime budget",
        compare_secs < 1800.0 && train_secs < 120.0,
        format!(
            "comparison {compare_secs:.0}s < 1800s, model-based training {train_secs:.0}s < 120s"
        ),
    );

    report.finish();
}
