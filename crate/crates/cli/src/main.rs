//! Command-line driver: dataset generation, two-phase training, prediction,
//! evaluation, and model comparison. Exit codes: 0 success, 1 runtime
//! failure, 2 usage/config error.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use fss_core::data::{
    read_dataset, select_samples, split_indices, topology_for_geometry, write_dataset,
    write_touchstone, Dataset, Geometry, Sample, SweepSpec,
};
use fss_core::em::f_phys;
use fss_core::evalkit::{
    compare_models, generalization_curve, mae_complex, max_power_residual, mean_smoothness,
    CurveModel, SComponent,
};
use fss_core::neural::{
    loss_eq1, loss_eq3, loss_eq5, read_checkpoint, train_phase1, train_phase2, write_checkpoint,
    EpochLoss, ModelBased, PhaseLoss, TrainingConfig,
};

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

fn usage<T: fmt::Display>(e: T) -> CliError {
    CliError::Usage(e.to_string())
}

fn runtime<T: fmt::Display>(e: T) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Config file contents; command-line flags override these, which override
/// the built-in defaults. The effective config is echoed into artifacts.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RunConfig {
    sweep: SweepSpec,
    training: TrainingConfig,
    split_fraction: f64,
    split_seed: u64,
    fractions: Vec<f64>,
    curve_models: Vec<CurveModel>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sweep: SweepSpec::default(),
            training: TrainingConfig::default(),
            split_fraction: 0.8,
            split_seed: 42,
            fractions: vec![0.1, 0.25, 0.5, 0.75, 0.9],
            curve_models: vec![
                CurveModel::ModelBased,
                CurveModel::Dnn,
                CurveModel::DnnTanh,
                CurveModel::Rbfn,
            ],
        }
    }
}

#[derive(Parser)]
#[command(
    name = "fss",
    about = "FSS equivalent-circuit learning pipeline",
    version
)]
struct Cli {
    /// JSON config file; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed override (oracle, splits, and training)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path (file, or directory for `compare`)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overwrite existing outputs
    #[arg(long, global = true)]
    force: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PhaseArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum LossArg {
    Eq1,
    Eq2,
    Eq3,
    Eq5,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate the sweep dataset with the surrogate oracle and extraction
    GenData {
        /// Override sweep levels, e.g. `2,2,2`
        #[arg(long)]
        levels: Option<String>,
    },
    /// Train the geometry-to-circuit model (phase 1, 2, or both)
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        phase: PhaseArg,
        /// Phase-2 objective (eq1/eq3/eq5); eq2 is the phase-1 objective
        #[arg(long, value_enum)]
        loss: Option<LossArg>,
        /// Phase-1 checkpoint, required when `--phase 2`
        #[arg(long)]
        init: Option<PathBuf>,
    },
    /// Predict S-parameters for a geometry and write a Touchstone file
    Predict {
        #[arg(long)]
        checkpoint: PathBuf,
        /// slot length, separation, second slot length (mm)
        #[arg(num_args = 3, value_names = ["SLOT_MM", "SEP_MM", "SLOT2_MM"])]
        geometry: Vec<f64>,
    },
    /// Evaluate a checkpoint on a dataset's test split
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Train all models and write comparison report plus generalization curve
    Compare {
        #[arg(long)]
        dataset: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            match e {
                CliError::Usage(_) => ExitCode::from(2),
                CliError::Runtime(_) => ExitCode::from(1),
            }
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| usage(format!("invalid config {}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.sweep.oracle_seed = seed;
        config.split_seed = seed;
        config.training.seed = seed;
    }
    config
        .sweep
        .validate()
        .map_err(|e| usage(format!("invalid sweep config: {e}")))?;
    Ok(config)
}

fn check_out(path: &Path, force: bool) -> Result<(), CliError> {
    if path.exists() && !force {
        return Err(usage(format!(
            "output {} exists; pass --force to overwrite",
            path.display()
        )));
    }
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(runtime)?;
        }
    }
    Ok(())
}

fn out_path(cli: &Cli, default: &str) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn load_dataset(path: &Path) -> Result<Dataset, CliError> {
    if !path.exists() {
        return Err(usage(format!("dataset {} does not exist", path.display())));
    }
    read_dataset(path).map_err(runtime)
}

fn split_dataset(ds: &Dataset, config: &RunConfig) -> Result<(Vec<Sample>, Vec<Sample>), CliError> {
    let (tr, te) = split_indices(ds.samples.len(), config.split_fraction, config.split_seed)
        .map_err(runtime)?;
    Ok((select_samples(ds, &tr), select_samples(ds, &te)))
}

fn write_history(path: &Path, history: &[EpochLoss]) -> Result<(), CliError> {
    let mut csv = String::from("epoch,train,test\n");
    for h in history {
        csv.push_str(&format!("{},{:.8e},{:.8e}\n", h.epoch, h.train, h.test));
    }
    fs::write(path, csv).map_err(runtime)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = load_config(&cli)?;
    match &cli.cmd {
        Cmd::GenData { levels } => cmd_gen_data(&cli, config, levels.as_deref()),
        Cmd::Train {
            dataset,
            phase,
            loss,
            init,
        } => cmd_train(&cli, config, dataset, *phase, *loss, init.as_deref()),
        Cmd::Predict {
            checkpoint,
            geometry,
        } => cmd_predict(&cli, config, checkpoint, geometry),
        Cmd::Eval {
            checkpoint,
            dataset,
        } => cmd_eval(config, checkpoint, dataset),
        Cmd::Compare { dataset } => cmd_compare(&cli, config, dataset),
    }
}

fn cmd_gen_data(cli: &Cli, mut config: RunConfig, levels: Option<&str>) -> Result<(), CliError> {
    if let Some(spec) = levels {
        let parsed: Vec<usize> = spec
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|e| usage(format!("bad --levels {spec}: {e}")))?;
        if parsed.len() != 3 {
            return Err(usage("--levels needs exactly three comma-separated counts"));
        }
        for (dim, n) in config.sweep.dims.iter_mut().zip(parsed) {
            dim.n_levels = n;
        }
        config.sweep.validate().map_err(usage)?;
    }
    let out = out_path(cli, "dataset.json");
    check_out(&out, cli.force)?;
    let ds = Dataset::generate(&config.sweep).map_err(runtime)?;
    write_dataset(&ds, &out).map_err(runtime)?;
    println!(
        "wrote {} samples to {} (mean extraction residual {:.4e})",
        ds.samples.len(),
        out.display(),
        ds.mean_extraction_residual()
    );
    Ok(())
}

fn cmd_train(
    cli: &Cli,
    mut config: RunConfig,
    dataset: &Path,
    phase: PhaseArg,
    loss: Option<LossArg>,
    init: Option<&Path>,
) -> Result<(), CliError> {
    if let Some(l) = loss {
        config.training.phase2_loss = match l {
            LossArg::Eq1 => PhaseLoss::Eq1,
            LossArg::Eq3 => PhaseLoss::Eq3,
            LossArg::Eq5 => PhaseLoss::Eq5,
            LossArg::Eq2 => {
                if phase != PhaseArg::One {
                    return Err(usage(
                        "eq2 is the phase-1 circuit loss; phase 2 needs an S-parameter loss",
                    ));
                }
                config.training.phase2_loss
            }
        };
    }
    let ds = load_dataset(dataset)?;
    let (train, test) = split_dataset(&ds, &config)?;
    let out = out_path(cli, "model.json");
    check_out(&out, cli.force)?;

    let phase1 = |hist_suffix: &str| -> Result<ModelBased, CliError> {
        let (model, history) = train_phase1(&train, &test, &config.training).map_err(runtime)?;
        write_history(&out.with_extension(hist_suffix), &history)?;
        Ok(model)
    };
    let model = match phase {
        PhaseArg::One => phase1("phase1.csv")?,
        PhaseArg::Two => {
            let init =
                init.ok_or_else(|| usage("--phase 2 needs --init with a phase-1 checkpoint"))?;
            let (start, _) = read_checkpoint(init).map_err(runtime)?;
            let (model, history) =
                train_phase2(&train, &test, &start, ds.z0_free, &config.training)
                    .map_err(runtime)?;
            write_history(&out.with_extension("phase2.csv"), &history)?;
            model
        }
        PhaseArg::Both => {
            let start = phase1("phase1.csv")?;
            let (model, history) =
                train_phase2(&train, &test, &start, ds.z0_free, &config.training)
                    .map_err(runtime)?;
            write_history(&out.with_extension("phase2.csv"), &history)?;
            model
        }
    };
    write_checkpoint(&out, &model, &config.training).map_err(runtime)?;
    println!("wrote checkpoint {}", out.display());
    Ok(())
}

fn cmd_predict(
    cli: &Cli,
    config: RunConfig,
    checkpoint: &Path,
    geometry: &[f64],
) -> Result<(), CliError> {
    let g = Geometry::from_vector(geometry).map_err(usage)?;
    if !config.sweep.contains(&g) {
        eprintln!("warning: geometry is outside the sweep bounds; extrapolating");
    }
    let (model, _) = read_checkpoint(checkpoint).map_err(runtime)?;
    let out = out_path(cli, "predicted.s2p");
    check_out(&out, cli.force)?;
    let c = model.predict_circuit(&g).map_err(runtime)?;
    let topo = topology_for_geometry(&g).map_err(runtime)?;
    let response = f_phys(&c, &topo, &config.sweep.grid, config.sweep.z0_free).map_err(runtime)?;
    write_touchstone(&response, &out, config.sweep.z0_free).map_err(runtime)?;
    for k in 0..c.n_screens() {
        println!(
            "screen {k}: L = {:.6e} H, C = {:.6e} F (f0 = {:.4} GHz)",
            c.inductance(k),
            c.capacitance(k),
            c.resonance_hz(k) / 1e9
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}

#[derive(Serialize)]
struct EvalOutput {
    n_test: usize,
    loss_eq1: f64,
    loss_eq3: f64,
    loss_eq5: f64,
    test_mae_s21_complex: f64,
    test_mae_s11_complex: f64,
    test_smoothness: f64,
    max_power_residual: f64,
    config: TrainingConfig,
}

fn cmd_eval(config: RunConfig, checkpoint: &Path, dataset: &Path) -> Result<(), CliError> {
    let (model, train_config) = read_checkpoint(checkpoint).map_err(runtime)?;
    let ds = load_dataset(dataset)?;
    let (_, test) = split_dataset(&ds, &config)?;
    let preds = test
        .iter()
        .map(|s| model.predict_response_on(&s.geometry, &s.response.grid, ds.z0_free))
        .collect::<Result<Vec<_>, _>>()
        .map_err(runtime)?;
    let targets: Vec<_> = test.iter().map(|s| s.response.clone()).collect();
    let mean_of = |f: &dyn Fn(usize) -> Result<f64, CliError>| -> Result<f64, CliError> {
        let mut acc = 0.0;
        for i in 0..preds.len() {
            acc += f(i)?;
        }
        Ok(acc / preds.len() as f64)
    };
    let output = EvalOutput {
        n_test: test.len(),
        loss_eq1: mean_of(&|i| loss_eq1(&preds[i], &targets[i]).map_err(runtime))?,
        loss_eq3: mean_of(&|i| loss_eq3(&preds[i], &targets[i]).map_err(runtime))?,
        loss_eq5: mean_of(&|i| loss_eq5(&preds[i], &targets[i]).map_err(runtime))?,
        test_mae_s21_complex: mae_complex(&preds, &targets, SComponent::S21).map_err(runtime)?,
        test_mae_s11_complex: mae_complex(&preds, &targets, SComponent::S11).map_err(runtime)?,
        test_smoothness: mean_smoothness(&preds).map_err(runtime)?,
        max_power_residual: max_power_residual(&preds),
        config: train_config,
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&output).map_err(runtime)?
    );
    Ok(())
}

fn cmd_compare(cli: &Cli, config: RunConfig, dataset: &Path) -> Result<(), CliError> {
    let ds = load_dataset(dataset)?;
    let (train, test) = split_dataset(&ds, &config)?;
    let dir = out_path(cli, "compare");
    fs::create_dir_all(&dir).map_err(runtime)?;
    let report_json = dir.join("report.json");
    let report_txt = dir.join("report.txt");
    let curve_csv = dir.join("curve.csv");
    for p in [&report_json, &report_txt, &curve_csv] {
        check_out(p, cli.force)?;
    }
    let report = compare_models(&train, &test, ds.z0_free, &config.training).map_err(runtime)?;
    fs::write(&report_json, report.to_json().map_err(runtime)?).map_err(runtime)?;
    let text = report.render_text();
    fs::write(&report_txt, &text).map_err(runtime)?;
    print!("{text}");
    let csv = generalization_curve(
        &train,
        &test,
        &config.fractions,
        &config.curve_models,
        ds.z0_free,
        &config.training,
    )
    .map_err(runtime)?;
    fs::write(&curve_csv, csv).map_err(runtime)?;
    println!(
        "wrote {}, {}, {}",
        report_json.display(),
        report_txt.display(),
        curve_csv.display()
    );
    Ok(())
}
