//! End-to-end benchmark: simulate, split, tune the signal-processing
//! baselines, fit the learners, and score everything on the test split.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::knn::{KnnDenoiser, QueryContext};
use crate::metrics::{self, MetricsReport};
use crate::nn::{self, EpochStats, ModelKind, RecurrentDenoiser, TrainConfig};
use crate::sca::{self, ScaReport};
use crate::sim::{self, EulerAngles, Recording, SimConfig};
use crate::sp::{self, DwtConfig, ThresholdRule};
use crate::{ingest, Denoiser, Triad, WindowPair};

const SPLIT_SALT: u64 = 0x5eed_5917_0000_0001;

/// Denoising method selectable in a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ma,
    Sg,
    Dwt,
    Knn,
    Lstm,
    Rnn,
    Gru,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Ma,
        Method::Sg,
        Method::Dwt,
        Method::Knn,
        Method::Lstm,
        Method::Rnn,
        Method::Gru,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Method::Ma => "MA",
            Method::Sg => "SG",
            Method::Dwt => "DWT",
            Method::Knn => "kNN",
            Method::Lstm => "LSTM",
            Method::Rnn => "RNN",
            Method::Gru => "GRU",
        }
    }

    pub fn is_learning(self) -> bool {
        matches!(self, Method::Knn | Method::Lstm | Method::Rnn | Method::Gru)
    }

    pub fn recurrent(self) -> Option<ModelKind> {
        match self {
            Method::Lstm => Some(ModelKind::Lstm2),
            Method::Rnn => Some(ModelKind::BiRnn),
            Method::Gru => Some(ModelKind::BiGru),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown model {s:?}; expected one of ma, sg, dwt, knn, lstm, rnn, gru")))
    }
}

pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    let mut out = Vec::new();
    for item in list.split(',').filter(|s| !s.trim().is_empty()) {
        let m: Method = item.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitMode {
    /// Whole source recordings go to one split.
    Recordings,
    /// Each source recording's windows are spread across all splits.
    Windows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitConfig {
    pub train: f64,
    pub val: f64,
    pub mode: SplitMode,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            train: 0.7,
            val: 0.1,
            mode: SplitMode::Windows,
        }
    }
}

/// Candidate hyperparameters for the signal-processing grid search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpGrid {
    pub ma_windows: Vec<usize>,
    pub sg_windows: Vec<usize>,
    pub sg_degrees: Vec<usize>,
    pub dwt_levels: Vec<usize>,
    pub dwt_thresholds: Vec<ThresholdRule>,
}

impl Default for SpGrid {
    fn default() -> Self {
        Self {
            ma_windows: vec![3, 5, 9, 15, 25, 35, 50, 75, 100],
            sg_windows: vec![5, 11, 21, 31, 51, 71, 99],
            sg_degrees: vec![0, 1, 2, 3],
            dwt_levels: vec![1, 2, 3, 4, 5, 6],
            dwt_thresholds: vec![
                ThresholdRule::Universal,
                ThresholdRule::Fixed(0.05),
                ThresholdRule::Fixed(0.1),
                ThresholdRule::Fixed(0.2),
                ThresholdRule::Fixed(0.5),
                ThresholdRule::Fixed(1.0),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnConfig {
    pub context: QueryContext,
    /// Defaults to `round(√(n/5))`.
    pub k: Option<usize>,
}

impl Default for KnnConfig {
    fn default() -> Self {
        Self {
            context: QueryContext::Window,
            k: None,
        }
    }
}

fn recurrent_defaults(epochs: usize) -> TrainConfig {
    TrainConfig {
        epochs,
        batch_size: 64,
        step_size: 1e-2,
        final_step_size: Some(2e-3),
        seed: 0,
        window_len: 100,
        hidden: 16,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub sim: SimConfig,
    /// Samples per evaluated window; source recordings are cut into these.
    pub window: usize,
    pub split: SplitConfig,
    pub methods: Vec<Method>,
    pub sp_grid: SpGrid,
    pub knn: KnnConfig,
    pub lstm: TrainConfig,
    pub rnn: TrainConfig,
    pub gru: TrainConfig,
    /// Samples averaged before alignment; the whole window when unset.
    pub sca_samples: Option<usize>,
    /// Test windows written to the plot-data file.
    pub plot_windows: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sim: SimConfig {
                angle_step_deg: 1.0,
                window_len: 500,
                ..SimConfig::default()
            },
            window: 100,
            split: SplitConfig::default(),
            methods: Method::ALL.to_vec(),
            sp_grid: SpGrid::default(),
            knn: KnnConfig::default(),
            lstm: recurrent_defaults(45),
            rnn: recurrent_defaults(60),
            gru: recurrent_defaults(15),
            sca_samples: None,
            plot_windows: 5,
        }
    }
}

impl BenchConfig {
    pub fn train_config(&self, kind: ModelKind) -> TrainConfig {
        let mut cfg = match kind {
            ModelKind::Lstm2 => self.lstm,
            ModelKind::BiRnn => self.rnn,
            ModelKind::BiGru => self.gru,
        };
        cfg.window_len = self.window;
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        if self.window == 0 || self.window > self.sim.window_len {
            return Err(Error::Config(format!(
                "window {} must be in [1, recording length {}]",
                self.window, self.sim.window_len
            )));
        }
        let s = &self.split;
        if !(s.train > 0.0 && s.val >= 0.0 && s.train + s.val < 1.0) {
            return Err(Error::Config("split fractions must leave a non-empty test share".into()));
        }
        for m in &self.methods {
            if let Some(kind) = m.recurrent() {
                self.train_config(kind).validate()?;
            }
        }
        Ok(())
    }
}

/// A window together with the orientation it was recorded at.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub angles: EulerAngles,
    pub noisy: Vec<Triad>,
    pub gt: Vec<Triad>,
}

impl Sample {
    pub fn pair(&self) -> WindowPair {
        (self.noisy.clone(), self.gt.clone())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Splits {
    pub train: Vec<Sample>,
    pub val: Vec<Sample>,
    pub test: Vec<Sample>,
}

impl Splits {
    pub fn pairs(set: &[Sample]) -> Vec<WindowPair> {
        set.iter().map(Sample::pair).collect()
    }
}

fn assign(j: usize, n: usize, cfg: &SplitConfig) -> usize {
    let f = (j as f64 + 0.5) / n as f64;
    if f < cfg.train {
        0
    } else if f < cfg.train + cfg.val {
        1
    } else {
        2
    }
}

/// Cuts recordings into non-overlapping windows and splits them.
pub fn split_windows(recordings: &[Recording], h: usize, cfg: &SplitConfig, seed: u64) -> Result<Splits> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ SPLIT_SALT);
    let mut splits = Splits::default();
    let mut push = |slot: usize, s: Sample| match slot {
        0 => splits.train.push(s),
        1 => splits.val.push(s),
        _ => splits.test.push(s),
    };
    let to_samples = |rec: &Recording| -> Result<Vec<Sample>> {
        Ok(ingest::window(rec, h, h)?
            .into_iter()
            .map(|w| Sample {
                angles: w.angles,
                noisy: w.noisy,
                gt: w.gt,
            })
            .collect())
    };
    match cfg.mode {
        SplitMode::Windows => {
            for rec in recordings {
                let mut windows = to_samples(rec)?;
                windows.shuffle(&mut rng);
                let n = windows.len();
                for (j, w) in windows.into_iter().enumerate() {
                    push(assign(j, n, cfg), w);
                }
            }
        }
        SplitMode::Recordings => {
            let mut order: Vec<usize> = (0..recordings.len()).collect();
            order.shuffle(&mut rng);
            let n = order.len();
            for (j, &i) in order.iter().enumerate() {
                let slot = assign(j, n, cfg);
                for w in to_samples(&recordings[i])? {
                    push(slot, w);
                }
            }
        }
    }
    Ok(splits)
}

/// Denoises every window in parallel.
pub fn apply(denoiser: &dyn Denoiser, windows: &[Vec<Triad>]) -> Result<Vec<Vec<Triad>>> {
    windows.par_iter().map(|w| denoiser.denoise(w)).collect()
}

/// RMSE of a denoiser over paired windows.
pub fn window_rmse(denoiser: &dyn Denoiser, pairs: &[WindowPair]) -> Result<f64> {
    let sq: Vec<(f64, usize)> = pairs
        .par_iter()
        .map(|(x, y)| {
            let out = denoiser.denoise(x)?;
            let r = metrics::rmse(&out, y)?;
            Ok((r * r * y.len() as f64, y.len()))
        })
        .collect::<Result<_>>()?;
    let (s, n) = sq.iter().fold((0.0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    if n == 0 {
        return Err(Error::invalid("no windows to score"));
    }
    Ok((s / n as f64).sqrt())
}

/// Lowest-RMSE candidate on `pairs`; the first wins ties.
pub fn grid_search<D: Denoiser>(candidates: Vec<D>, pairs: &[WindowPair]) -> Result<(D, f64)> {
    let mut best: Option<(D, f64)> = None;
    for c in candidates {
        let score = window_rmse(&c, pairs)?;
        log::debug!("{} candidate {score:.6}", c.name());
        if best.as_ref().is_none_or(|b| score < b.1) {
            best = Some((c, score));
        }
    }
    best.ok_or_else(|| Error::Config("empty hyperparameter grid".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunedSp {
    pub ma: Option<sp::MovingAverage>,
    pub sg: Option<sp::SavitzkyGolay>,
    pub dwt: Option<sp::Dwt>,
}

/// Grid-searches the baselines selected in `methods` on the training pairs.
pub fn tune_sp(grid: &SpGrid, methods: &[Method], pairs: &[WindowPair], h: usize) -> Result<TunedSp> {
    let mut tuned = TunedSp {
        ma: None,
        sg: None,
        dwt: None,
    };
    if methods.contains(&Method::Ma) {
        let cands = grid
            .ma_windows
            .iter()
            .filter(|&&t| t >= 1 && t <= h)
            .map(|&window| sp::MovingAverage { window })
            .collect();
        tuned.ma = Some(grid_search(cands, pairs)?.0);
    }
    if methods.contains(&Method::Sg) {
        let mut cands = Vec::new();
        for &m in grid.sg_windows.iter().filter(|&&m| m % 2 == 1 && m <= h) {
            for &p in grid.sg_degrees.iter().filter(|&&p| p < m) {
                cands.push(sp::SavitzkyGolay::new(m, p)?);
            }
        }
        tuned.sg = Some(grid_search(cands, pairs)?.0);
    }
    if methods.contains(&Method::Dwt) {
        let mut cands = Vec::new();
        for &levels in grid.dwt_levels.iter().filter(|&&l| l >= 1 && l <= sp::max_levels(h)) {
            for &threshold in &grid.dwt_thresholds {
                cands.push(sp::Dwt {
                    config: DwtConfig { levels, threshold },
                });
            }
        }
        tuned.dwt = Some(grid_search(cands, pairs)?.0);
    }
    Ok(tuned)
}

/// Fitted denoisers of one run, in the configured method order.
pub struct Suite {
    pub tuned_sp: TunedSp,
    pub knn: Option<KnnDenoiser>,
    pub recurrent: Vec<(Method, RecurrentDenoiser, Vec<EpochStats>, Option<usize>)>,
    pub timings: Vec<(String, Duration)>,
}

impl Suite {
    pub fn denoisers<'a>(&'a self, methods: &[Method]) -> Vec<(Method, &'a dyn Denoiser)> {
        let mut out: Vec<(Method, &dyn Denoiser)> = Vec::new();
        for &m in methods {
            let d: Option<&dyn Denoiser> = match m {
                Method::Ma => self.tuned_sp.ma.as_ref().map(|d| d as &dyn Denoiser),
                Method::Sg => self.tuned_sp.sg.as_ref().map(|d| d as &dyn Denoiser),
                Method::Dwt => self.tuned_sp.dwt.as_ref().map(|d| d as &dyn Denoiser),
                Method::Knn => self.knn.as_ref().map(|d| d as &dyn Denoiser),
                _ => self
                    .recurrent
                    .iter()
                    .find(|r| r.0 == m)
                    .map(|r| &r.1 as &dyn Denoiser),
            };
            if let Some(d) = d {
                out.push((m, d));
            }
        }
        out
    }
}

/// Tunes and trains every configured method on the training split.
pub fn fit_suite(cfg: &BenchConfig, splits: &Splits) -> Result<Suite> {
    let train = Splits::pairs(&splits.train);
    let val = Splits::pairs(&splits.val);
    let mut timings = Vec::new();

    let t0 = Instant::now();
    let tuned_sp = tune_sp(&cfg.sp_grid, &cfg.methods, &train, cfg.window)?;
    timings.push(("sp-tuning".to_string(), t0.elapsed()));
    log::info!("tuned baselines: {tuned_sp:?}");

    let knn = if cfg.methods.contains(&Method::Knn) {
        let t0 = Instant::now();
        let knn = KnnDenoiser::train(&train, cfg.knn.context, cfg.knn.k)?;
        timings.push(("knn-fit".to_string(), t0.elapsed()));
        log::info!("kNN index of {} samples, k = {}", knn.index.len(), knn.k);
        Some(knn)
    } else {
        None
    };

    let mut recurrent = Vec::new();
    for &m in &cfg.methods {
        if let Some(kind) = m.recurrent() {
            let t0 = Instant::now();
            let out = nn::train(kind, &train, &val, &cfg.train_config(kind))?;
            timings.push((format!("{}-train", m.label().to_lowercase()), t0.elapsed()));
            recurrent.push((m, out.denoiser, out.curve, out.best_epoch));
        }
    }
    Ok(Suite {
        tuned_sp,
        knn,
        recurrent,
        timings,
    })
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub metrics: MetricsReport,
    pub sca: ScaReport,
    pub outputs: Vec<(String, Vec<Vec<Triad>>)>,
}

impl Evaluation {
    /// RAE of a model divided by the noisy RAE.
    pub fn suppression(&self, model: &str) -> Result<f64> {
        let m = self
            .metrics
            .row(model)
            .ok_or_else(|| Error::Config(format!("no metrics row for {model}")))?;
        let n = self
            .metrics
            .row(metrics::NOISY_ROW)
            .ok_or_else(|| Error::Config("no noisy row".into()))?;
        sca::suppression_ratio(m.rae, n.rae)
    }
}

/// Scores the given denoisers on test windows.
pub fn evaluate(denoisers: &[(String, &dyn Denoiser)], test: &[Sample], sca_samples: Option<usize>) -> Result<Evaluation> {
    if test.is_empty() {
        return Err(Error::InvalidData("empty test split".into()));
    }
    let noisy: Vec<Vec<Triad>> = test.iter().map(|s| s.noisy.clone()).collect();
    let angles: Vec<EulerAngles> = test.iter().map(|s| s.angles).collect();
    let gt_flat: Vec<Triad> = test.iter().flat_map(|s| s.gt.iter().copied()).collect();
    let noisy_flat: Vec<Triad> = noisy.iter().flatten().copied().collect();

    let mut outputs = Vec::with_capacity(denoisers.len());
    for (name, d) in denoisers {
        outputs.push((name.clone(), apply(*d, &noisy)?));
    }
    let flat: Vec<(String, Vec<Triad>)> = outputs
        .iter()
        .map(|(n, o)| (n.clone(), o.iter().flatten().copied().collect()))
        .collect();
    let metrics = metrics::compare(&flat, &noisy_flat, &gt_flat)?;
    let sca = sca::evaluate_sca(&outputs, &noisy, &angles, sca_samples)?;
    Ok(Evaluation { metrics, sca, outputs })
}

/// Per-sample rows for the first `windows` test windows.
pub fn write_plot_data(path: &Path, test: &[Sample], eval: &Evaluation, windows: usize, sample_rate: f64) -> Result<()> {
    let mut header = vec![
        "window".to_string(),
        "roll_deg".into(),
        "pitch_deg".into(),
        "t_s".into(),
    ];
    for prefix in ["noisy", "gt"] {
        for a in ["x", "y", "z"] {
            header.push(format!("{prefix}_{a}"));
        }
    }
    for (name, _) in &eval.outputs {
        for a in ["x", "y", "z"] {
            header.push(format!("{name}_{a}"));
        }
    }
    let mut out = header.join(",");
    out.push('\n');
    for (w, s) in test.iter().enumerate().take(windows) {
        for t in 0..s.noisy.len() {
            let mut row = vec![
                w.to_string(),
                s.angles.roll_deg.to_string(),
                s.angles.pitch_deg.to_string(),
                (t as f64 / sample_rate).to_string(),
            ];
            row.extend(s.noisy[t].iter().chain(&s.gt[t]).map(f64::to_string));
            for (_, o) in &eval.outputs {
                row.extend(o[w][t].iter().map(f64::to_string));
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone)]
pub struct BenchResult {
    pub suite_timings: Vec<(String, Duration)>,
    pub tuned_sp: TunedSp,
    pub knn_k: Option<usize>,
    pub curves: Vec<(Method, Vec<EpochStats>, Option<usize>)>,
    pub evaluation: Evaluation,
    pub splits: (usize, usize, usize),
}

/// Simulates, splits, fits and evaluates according to `cfg`.
pub fn run(cfg: &BenchConfig) -> Result<(BenchResult, Splits)> {
    cfg.validate()?;
    let t0 = Instant::now();
    let recordings = sim::build_dataset(&cfg.sim)?;
    let splits = split_windows(&recordings, cfg.window, &cfg.split, cfg.sim.seed)?;
    log::info!(
        "{} recordings → {} / {} / {} windows in {:.1?}",
        recordings.len(),
        splits.train.len(),
        splits.val.len(),
        splits.test.len(),
        t0.elapsed()
    );
    let suite = fit_suite(cfg, &splits)?;
    let named: Vec<(String, &dyn Denoiser)> = suite
        .denoisers(&cfg.methods)
        .into_iter()
        .map(|(m, d)| (m.label().to_string(), d))
        .collect();
    let evaluation = evaluate(&named, &splits.test, cfg.sca_samples)?;
    let result = BenchResult {
        suite_timings: suite.timings.clone(),
        tuned_sp: suite.tuned_sp.clone(),
        knn_k: suite.knn.as_ref().map(|k| k.k),
        curves: suite.recurrent.iter().map(|r| (r.0, r.2.clone(), r.3)).collect(),
        evaluation,
        splits: (splits.train.len(), splits.val.len(), splits.test.len()),
    };
    Ok((result, splits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Identity;

    fn tiny() -> BenchConfig {
        BenchConfig {
            sim: SimConfig {
                angle_min_deg: -2.0,
                angle_max_deg: 2.0,
                angle_step_deg: 1.0,
                window_len: 100,
                ..SimConfig::default()
            },
            window: 20,
            methods: vec![Method::Ma, Method::Sg, Method::Dwt, Method::Knn],
            ..BenchConfig::default()
        }
    }

    #[test]
    fn method_parsing() {
        assert_eq!(
            parse_methods("knn, GRU,ma,knn").unwrap(),
            vec![Method::Knn, Method::Gru, Method::Ma]
        );
        assert!(parse_methods("cnn").is_err());
        assert!(parse_methods("").unwrap().is_empty());
    }

    #[test]
    fn stratified_split_shares() {
        let cfg = tiny();
        let recs = sim::build_dataset(&cfg.sim).unwrap();
        let s = split_windows(&recs, 20, &cfg.split, 0).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (16 * 3, 16, 16));
        for a in sim::generate_grid(&cfg.sim).unwrap() {
            assert_eq!(s.test.iter().filter(|w| w.angles == a).count(), 1);
        }
    }

    #[test]
    fn recording_split_keeps_sources_together() {
        let cfg = tiny();
        let recs = sim::build_dataset(&cfg.sim).unwrap();
        let split = SplitConfig {
            mode: SplitMode::Recordings,
            ..SplitConfig::default()
        };
        let s = split_windows(&recs, 20, &split, 0).unwrap();
        assert_eq!(s.train.len() + s.val.len() + s.test.len(), 80);
        for t in &s.test {
            assert!(s.train.iter().all(|w| w.angles != t.angles));
        }
    }

    #[test]
    fn identity_row_equals_noisy() {
        let cfg = tiny();
        let recs = sim::build_dataset(&cfg.sim).unwrap();
        let s = split_windows(&recs, 20, &cfg.split, 0).unwrap();
        let eval = evaluate(&[("Identity".into(), &Identity)], &s.test, None).unwrap();
        let a = eval.metrics.row("Identity").unwrap();
        let b = eval.metrics.row("Noisy").unwrap();
        assert_eq!((a.rmse, a.mae, a.rae), (b.rmse, b.mae, b.rae));
        assert_eq!(eval.sca.row("Identity").unwrap().ratio_roll, 1.0);
    }

    #[test]
    fn baseline_only_report() {
        let cfg = tiny();
        let recs = sim::build_dataset(&cfg.sim).unwrap();
        let s = split_windows(&recs, 20, &cfg.split, 0).unwrap();
        let eval = evaluate(&[], &s.test, None).unwrap();
        assert_eq!(eval.metrics.rows.len(), 1);
        assert_eq!(eval.sca.rows.len(), 1);
    }

    #[test]
    fn tiny_run_is_deterministic() {
        let cfg = tiny();
        let (a, _) = run(&cfg).unwrap();
        let (b, _) = run(&cfg).unwrap();
        assert_eq!(a.evaluation.metrics, b.evaluation.metrics);
        assert_eq!(a.evaluation.sca, b.evaluation.sca);
        assert_eq!(a.evaluation.metrics.rows.len(), 5);
    }

    #[test]
    fn config_toml_round_trip() {
        let cfg = BenchConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        let back: BenchConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        let partial: BenchConfig = toml::from_str("window = 50\n[sim]\nseed = 9\n").unwrap();
        assert_eq!(partial.window, 50);
        assert_eq!(partial.sim.seed, 9);
        assert_eq!(partial.sim.angle_step_deg, SimConfig::default().angle_step_deg);
    }
}
