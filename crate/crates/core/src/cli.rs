//! Command-line front end. Every subcommand works on one run directory:
//!
//! ```text
//! simulate  → dataset.csv, dataset.json
//! train     → sp.json, knn.bin, <model>.ckpt, <model>_loss.csv
//! eval      → metrics.csv/json, sca.csv/json, plot_data.csv
//! sca       → sca.csv/json with a custom averaging length
//! report    → summary.txt
//! ```
//!
//! The resolved configuration is written to `run.toml` in the run directory.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::bench::{self, BenchConfig, Method, Sample, Splits, TunedSp};
use crate::dataset::{self, DatasetMetadata};
use crate::error::{Error, Result};
use crate::knn::KnnDenoiser;
use crate::metrics::{MetricsReport, NOISY_ROW};
use crate::nn::{self, checkpoint};
use crate::sca::{self, ScaReport};
use crate::sim::{self, Recording};
use crate::{ingest, Denoiser};

pub const LOG_ENV: &str = "ACCEL_DENOISE_LOG";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_DIVERGENCE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "accel-denoise", version, about = "Accelerometer denoising benchmark")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a simulated dataset.
    Simulate(CommonArgs),
    /// Tune baselines and fit the learning models.
    Train(CommonArgs),
    /// Score all fitted models on the test split.
    Eval(CommonArgs),
    /// Recompute alignment errors with a chosen averaging length.
    Sca(ScaArgs),
    /// Merge metric and alignment tables into a summary.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run directory.
    #[arg(long, default_value = "run")]
    pub out: PathBuf,
    /// Comma-separated subset of ma,sg,dwt,knn,lstm,rnn,gru.
    #[arg(long)]
    pub models: Option<String>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Orientation grid spacing in degrees.
    #[arg(long, allow_hyphen_values = true)]
    pub grid_step: Option<f64>,
    /// Samples per model window.
    #[arg(long)]
    pub window: Option<usize>,
    /// Samples per simulated recording.
    #[arg(long)]
    pub recording_len: Option<usize>,
    /// Epochs for every recurrent model.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Field manifest used instead of simulated data.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ScaArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Samples averaged before alignment (whole window by default).
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[arg(long, default_value = "run")]
    pub out: PathBuf,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub threads: Option<usize>,
    pub manifest: Option<PathBuf>,
    pub bench: BenchConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut bench = BenchConfig::default();
        bench.sim.angle_step_deg = 0.1;
        Self {
            threads: None,
            manifest: None,
            bench,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// Config file (or defaults) with command-line overrides applied.
    pub fn resolve(args: &CommonArgs) -> Result<Self> {
        let mut cfg = match &args.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        let b = &mut cfg.bench;
        if let Some(seed) = args.seed {
            b.sim.seed = seed;
            for t in [&mut b.lstm, &mut b.rnn, &mut b.gru] {
                t.seed = seed;
            }
        }
        if let Some(step) = args.grid_step {
            b.sim.angle_step_deg = step;
        }
        if let Some(w) = args.window {
            b.window = w;
        }
        if let Some(l) = args.recording_len {
            b.sim.window_len = l;
        }
        if let Some(e) = args.epochs {
            for t in [&mut b.lstm, &mut b.rnn, &mut b.gru] {
                t.epochs = e;
            }
        }
        if let Some(list) = &args.models {
            b.methods = bench::parse_methods(list)?;
        }
        if args.threads.is_some() {
            cfg.threads = args.threads;
        }
        if args.manifest.is_some() {
            cfg.manifest = args.manifest.clone();
        }
        if cfg.threads == Some(0) {
            return Err(Error::Config("--threads must be positive".into()));
        }
        Ok(cfg)
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) | Error::Config(_) => EXIT_CONFIG,
        Error::Io { .. } | Error::Parse { .. } | Error::InvalidData(_) | Error::UndefinedMetric(_) => EXIT_DATA,
        Error::Divergence(_) => EXIT_DIVERGENCE,
    }
}

fn init_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already initialized: {e}");
        }
    }
}

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

const DATASET_CSV: &str = "dataset.csv";
const DATASET_JSON: &str = "dataset.json";
const SP_JSON: &str = "sp.json";
const KNN_BIN: &str = "knn.bin";

fn checkpoint_name(m: Method) -> String {
    format!("{}.ckpt", m.label().to_lowercase())
}

pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<String> {
    cfg.bench.sim.validate()?;
    prepare_dir(out)?;
    let recordings = sim::build_dataset(&cfg.bench.sim)?;
    let samples: usize = recordings.iter().map(Recording::len).sum();
    dataset::write_csv(&out.join(DATASET_CSV), &recordings)?;
    dataset::write_metadata(
        &out.join(DATASET_JSON),
        &DatasetMetadata {
            sim: cfg.bench.sim.clone(),
            recordings: recordings.len(),
            samples,
        },
    )?;
    cfg.save(&out.join("run.toml"))?;
    let n = &cfg.bench.sim.noisy_spec;
    Ok(format!(
        "{} recordings, {samples} samples written to {}\nnoisy grade: vrw {} m/s/√s, bi {} m/s², bo {} m/s² at {} Hz",
        recordings.len(),
        out.join(DATASET_CSV).display(),
        n.vrw,
        n.bi,
        n.bo,
        n.sample_rate
    ))
}

/// Recordings of a run: a field manifest, the run's dataset file, or a fresh simulation.
pub fn load_recordings(cfg: &RunConfig, out: &Path) -> Result<Vec<Recording>> {
    if let Some(manifest) = &cfg.manifest {
        return ingest::load_recordings(&ingest::load_manifest(manifest)?);
    }
    let csv = out.join(DATASET_CSV);
    if csv.exists() {
        let meta = dataset::read_metadata(&out.join(DATASET_JSON))?;
        return dataset::read_csv(&csv, meta.sim.sample_rate());
    }
    sim::build_dataset(&cfg.bench.sim)
}

fn load_splits(cfg: &RunConfig, out: &Path) -> Result<Splits> {
    let recordings = load_recordings(cfg, out)?;
    bench::split_windows(&recordings, cfg.bench.window, &cfg.bench.split, cfg.bench.sim.seed)
}

pub fn cmd_train(cfg: &RunConfig, out: &Path) -> Result<String> {
    cfg.bench.validate()?;
    prepare_dir(out)?;
    let splits = load_splits(cfg, out)?;
    let suite = bench::fit_suite(&cfg.bench, &splits)?;
    let json = serde_json::to_string_pretty(&suite.tuned_sp).map_err(|e| Error::Config(e.to_string()))?;
    let sp_path = out.join(SP_JSON);
    std::fs::write(&sp_path, json).map_err(|e| Error::io(&sp_path, e))?;
    let mut lines = vec![format!(
        "{} / {} / {} train/val/test windows",
        splits.train.len(),
        splits.val.len(),
        splits.test.len()
    )];
    if let Some(knn) = &suite.knn {
        knn.save(&out.join(KNN_BIN))?;
        lines.push(format!("kNN: {} samples, k = {}", knn.index.len(), knn.k));
    }
    for (m, model, curve, best) in &suite.recurrent {
        checkpoint::save(&out.join(checkpoint_name(*m)), model)?;
        nn::write_loss_curve(&out.join(format!("{}_loss.csv", m.label().to_lowercase())), curve)?;
        let last = curve.last().map_or(f64::NAN, |s| s.val_rmse);
        lines.push(format!(
            "{m}: {} epochs, best epoch {}, final val RMSE {last:.5} m/s²",
            curve.len(),
            best.map_or("-".into(), |b| b.to_string())
        ));
    }
    for (name, t) in &suite.timings {
        lines.push(format!("{name}: {:.1?}", t));
    }
    cfg.save(&out.join("run.toml"))?;
    Ok(lines.join("\n"))
}

/// Denoisers stored in a run directory, in configured order.
pub fn load_models(cfg: &RunConfig, out: &Path) -> Result<Vec<(Method, Box<dyn Denoiser>)>> {
    let mut models: Vec<(Method, Box<dyn Denoiser>)> = Vec::new();
    let methods = &cfg.bench.methods;
    let needs_sp = methods.iter().any(|m| matches!(m, Method::Ma | Method::Sg | Method::Dwt));
    let tuned: Option<TunedSp> = if needs_sp {
        let path = out.join(SP_JSON);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Some(serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.clone(),
            line: e.line() as u64,
            message: e.to_string(),
        })?)
    } else {
        None
    };
    for &m in methods {
        let missing = || Error::InvalidData(format!("no tuned parameters for {m}; rerun train"));
        let d: Box<dyn Denoiser> = match m {
            Method::Ma => Box::new(tuned.as_ref().and_then(|t| t.ma).ok_or_else(missing)?),
            Method::Sg => Box::new(tuned.as_ref().and_then(|t| t.sg.clone()).ok_or_else(missing)?),
            Method::Dwt => Box::new(tuned.as_ref().and_then(|t| t.dwt).ok_or_else(missing)?),
            Method::Knn => Box::new(KnnDenoiser::load(&out.join(KNN_BIN))?),
            _ => Box::new(checkpoint::load(&out.join(checkpoint_name(m)))?),
        };
        models.push((m, d));
    }
    Ok(models)
}

fn evaluate_run(cfg: &RunConfig, out: &Path) -> Result<(bench::Evaluation, Vec<Sample>)> {
    cfg.bench.validate()?;
    let splits = load_splits(cfg, out)?;
    let models = load_models(cfg, out)?;
    let named: Vec<(String, &dyn Denoiser)> = models
        .iter()
        .map(|(m, d)| (m.label().to_string(), d.as_ref()))
        .collect();
    let eval = bench::evaluate(&named, &splits.test, cfg.bench.sca_samples)?;
    Ok((eval, splits.test))
}

pub fn cmd_eval(cfg: &RunConfig, out: &Path) -> Result<String> {
    let (eval, test) = evaluate_run(cfg, out)?;
    eval.metrics.write(&out.join("metrics.csv"), &out.join("metrics.json"))?;
    eval.sca.write(&out.join("sca.csv"), &out.join("sca.json"))?;
    bench::write_plot_data(
        &out.join("plot_data.csv"),
        &test,
        &eval,
        cfg.bench.plot_windows,
        cfg.bench.sim.sample_rate(),
    )?;
    cfg.save(&out.join("run.toml"))?;
    Ok(format!("{}\n{}", eval.metrics.to_csv(), eval.sca.to_csv()))
}

pub fn cmd_sca(cfg: &RunConfig, out: &Path, samples: Option<usize>) -> Result<String> {
    let mut cfg = cfg.clone();
    if samples.is_some() {
        cfg.bench.sca_samples = samples;
    }
    let (eval, _) = evaluate_run(&cfg, out)?;
    eval.sca.write(&out.join("sca.csv"), &out.join("sca.json"))?;
    Ok(eval.sca.to_csv())
}

pub fn cmd_report(out: &Path) -> Result<String> {
    let metrics = MetricsReport::from_csv(&out.join("metrics.csv"))?;
    let sca = ScaReport::from_csv(&out.join("sca.csv"))?;
    let noisy_rae = metrics
        .row(NOISY_ROW)
        .ok_or_else(|| Error::InvalidData("metrics table has no Noisy row".into()))?
        .rae;
    let mut text = format!(
        "{:<8} {:>12} {:>12} {:>10} {:>9} {:>10} {:>11} {:>11}\n",
        "Model", "RMSE", "MAE", "PSNR dB", "RAE %", "gamma %", "roll ratio", "pitch ratio"
    );
    for r in &metrics.rows {
        let gamma = sca::suppression_ratio(r.rae, noisy_rae)?;
        let (rr, pr) = sca
            .row(&r.model)
            .map_or((f64::NAN, f64::NAN), |s| (s.ratio_roll, s.ratio_pitch));
        text.push_str(&format!(
            "{:<8} {:>12.6} {:>12.6} {:>10.3} {:>9.4} {:>10.2} {:>10.2}% {:>10.2}%\n",
            r.model,
            r.rmse,
            r.mae,
            r.psnr,
            100.0 * r.rae,
            100.0 * gamma,
            100.0 * rr,
            100.0 * pr
        ));
    }
    let path = out.join("summary.txt");
    std::fs::write(&path, &text).map_err(|e| Error::io(&path, e))?;
    Ok(text)
}

pub fn execute(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Report(a) => cmd_report(&a.out),
        Command::Sca(a) => {
            let cfg = RunConfig::resolve(&a.common)?;
            init_threads(cfg.threads);
            cmd_sca(&cfg, &a.common.out, a.samples)
        }
        Command::Simulate(a) => {
            let cfg = RunConfig::resolve(&a)?;
            init_threads(cfg.threads);
            cmd_simulate(&cfg, &a.out)
        }
        Command::Train(a) => {
            let cfg = RunConfig::resolve(&a)?;
            init_threads(cfg.threads);
            cmd_train(&cfg, &a.out)
        }
        Command::Eval(a) => {
            let cfg = RunConfig::resolve(&a)?;
            init_threads(cfg.threads);
            cmd_eval(&cfg, &a.out)
        }
    }
}

/// Parses the process arguments, runs, and returns the exit code.
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(text) => {
            println!("{text}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(out: &Path, extra: &[&str]) -> Cli {
        let mut v = vec!["accel-denoise".to_string()];
        v.extend(extra.iter().map(|s| s.to_string()));
        v.push("--out".into());
        v.push(out.display().to_string());
        Cli::try_parse_from(v).unwrap()
    }

    #[test]
    fn default_grid_is_full_scale() {
        let cfg = RunConfig::default();
        assert_eq!(sim::generate_grid(&cfg.bench.sim).unwrap().len(), 90_000);
        let mut coarse = cfg.clone();
        coarse.bench.sim.angle_step_deg = 3.0;
        assert_eq!(sim::generate_grid(&coarse.bench.sim).unwrap().len(), 100);
    }

    #[test]
    fn invalid_step_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = execute(args(dir.path(), &["simulate", "--grid-step", "-1"])).unwrap_err();
        assert_eq!(exit_code(&err), EXIT_CONFIG);
    }

    #[test]
    fn report_requires_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let err = execute(args(dir.path(), &["report"])).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert_eq!(exit_code(&err), EXIT_DATA);
    }

    #[test]
    fn full_pipeline_on_a_small_grid() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("run");
        let small = [
            "--grid-step", "3", "--recording-len", "100", "--window", "20", "--epochs", "2",
        ];
        let with = |cmd: &str, extra: &[&str]| {
            let mut v = vec![cmd];
            v.extend_from_slice(&small);
            v.extend_from_slice(extra);
            v.iter().map(|s| s.to_string()).collect::<Vec<_>>()
        };
        let run = |v: Vec<String>| {
            let refs: Vec<&str> = v.iter().map(String::as_str).collect();
            execute(args(&out, &refs))
        };
        let text = run(with("simulate", &[])).unwrap();
        assert!(text.starts_with("100 recordings"));
        run(with("train", &["--models", "ma,sg,dwt,knn,gru"])).unwrap();
        let curve = std::fs::read_to_string(out.join("gru_loss.csv")).unwrap();
        assert_eq!(curve.lines().count(), 3);
        let knn = KnnDenoiser::load(&out.join(KNN_BIN)).unwrap();
        assert!(knn.k >= 1);

        run(with("eval", &["--models", "ma,sg,dwt,knn,gru"])).unwrap();
        let first = std::fs::read(out.join("metrics.csv")).unwrap();
        run(with("eval", &["--models", "ma,sg,dwt,knn,gru"])).unwrap();
        assert_eq!(std::fs::read(out.join("metrics.csv")).unwrap(), first);
        assert!(out.join("plot_data.csv").exists());

        run(with("sca", &["--models", "knn", "--samples", "10"])).unwrap();
        let sca_text = std::fs::read_to_string(out.join("sca.csv")).unwrap();
        assert_eq!(sca_text.lines().count(), 3);

        let summary = execute(args(&out, &["report"])).unwrap();
        assert!(summary.contains("Noisy"));

        let saved = RunConfig::load(&out.join("run.toml")).unwrap();
        assert_eq!(saved.bench.window, 20);
        assert_eq!(saved.bench.sim.angle_step_deg, 3.0);
    }
}
