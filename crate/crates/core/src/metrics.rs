//! Reconstruction metrics and ranked comparison tables.
//!
//! Every metric flattens the three axes of all samples into one residual
//! vector. RAE removes the per-axis reference mean before flattening.

use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::Triad;

fn check(pred: &[Triad], gt: &[Triad]) -> Result<()> {
    if pred.len() != gt.len() {
        return Err(Error::invalid(format!(
            "prediction has {} samples, reference {}",
            pred.len(),
            gt.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::invalid("metrics of an empty series"));
    }
    Ok(())
}

fn residuals<'a>(pred: &'a [Triad], gt: &'a [Triad]) -> impl Iterator<Item = f64> + 'a {
    pred.iter().zip(gt).flat_map(|(p, g)| (0..3).map(move |a| p[a] - g[a]))
}

pub fn rmse(pred: &[Triad], gt: &[Triad]) -> Result<f64> {
    check(pred, gt)?;
    let sum: f64 = residuals(pred, gt).map(|e| e * e).sum();
    Ok((sum / (3 * pred.len()) as f64).sqrt())
}

pub fn mae(pred: &[Triad], gt: &[Triad]) -> Result<f64> {
    check(pred, gt)?;
    let sum: f64 = residuals(pred, gt).map(f64::abs).sum();
    Ok(sum / (3 * pred.len()) as f64)
}

/// `20·log₁₀(max_ref / rmse)`; `+∞` when `rmse` is zero.
pub fn psnr(rmse: f64, max_ref: f64) -> Result<f64> {
    if !(max_ref > 0.0) || !(rmse >= 0.0) {
        return Err(Error::invalid(format!("psnr needs rmse ≥ 0 and max_ref > 0, got {rmse}, {max_ref}")));
    }
    if rmse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(20.0 * (max_ref / rmse).log10())
}

/// Relative absolute error as a fraction.
pub fn rae(pred: &[Triad], gt: &[Triad]) -> Result<f64> {
    check(pred, gt)?;
    let n = gt.len() as f64;
    let mut mu = [0.0; 3];
    for g in gt {
        for a in 0..3 {
            mu[a] += g[a] / n;
        }
    }
    let denom: f64 = gt.iter().flat_map(|g| (0..3).map(move |a| (g[a] - mu[a]).abs())).sum();
    if denom == 0.0 {
        return Err(Error::UndefinedMetric("RAE of a constant reference".into()));
    }
    Ok(residuals(pred, gt).map(f64::abs).sum::<f64>() / denom)
}

/// Largest absolute reference component.
pub fn max_ref(gt: &[Triad]) -> f64 {
    gt.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

fn ser_extended<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str(&v.to_string())
    }
}

fn de_extended<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(v) => Ok(v),
        Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub model: String,
    pub rmse: f64,
    pub mae: f64,
    #[serde(serialize_with = "ser_extended", deserialize_with = "de_extended")]
    pub psnr: f64,
    /// Fraction; rendered as percent in tables.
    pub rae: f64,
}

impl MetricsRow {
    pub fn evaluate(model: &str, pred: &[Triad], gt: &[Triad], max_ref: f64) -> Result<Self> {
        let r = rmse(pred, gt)?;
        Ok(Self {
            model: model.to_string(),
            rmse: r,
            mae: mae(pred, gt)?,
            psnr: psnr(r, max_ref)?,
            rae: rae(pred, gt)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub max_ref: f64,
    pub rows: Vec<MetricsRow>,
}

pub const METRICS_HEADER: [&str; 5] = ["Model", "RMSE [m/s²]", "MAE [m/s²]", "PSNR [dB]", "RAE [%]"];

pub const NOISY_ROW: &str = "Noisy";

/// Scores each model and the raw noisy input, ranked by ascending RMSE.
/// Equal RMSE keeps input order, with the noisy row last.
pub fn compare(models: &[(String, Vec<Triad>)], noisy: &[Triad], gt: &[Triad]) -> Result<MetricsReport> {
    let max_ref = max_ref(gt);
    let mut rows = models
        .iter()
        .map(|(name, pred)| MetricsRow::evaluate(name, pred, gt, max_ref))
        .collect::<Result<Vec<_>>>()?;
    rows.push(MetricsRow::evaluate(NOISY_ROW, noisy, gt, max_ref)?);
    rows.sort_by(|a, b| a.rmse.total_cmp(&b.rmse));
    Ok(MetricsReport { max_ref, rows })
}

impl MetricsReport {
    pub fn row(&self, model: &str) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.model == model)
    }

    pub fn to_csv(&self) -> String {
        let mut out = METRICS_HEADER.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{}\n", r.model, r.rmse, r.mae, r.psnr, 100.0 * r.rae));
        }
        out
    }

    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = crate::dataset::open_csv(path)?;
        let headers = reader.headers().map_err(|e| crate::dataset::csv_error(path, e))?.clone();
        if headers.iter().collect::<Vec<_>>() != METRICS_HEADER {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: "not a metrics table".into(),
            });
        }
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| crate::dataset::csv_error(path, e))?;
            let line = rec.position().map_or(0, |p| p.line());
            let f = |i: usize| crate::dataset::parse_field(path, line, METRICS_HEADER[i], rec.get(i).unwrap_or(""));
            rows.push(MetricsRow {
                model: rec.get(0).unwrap_or("").to_string(),
                rmse: f(1)?,
                mae: f(2)?,
                psnr: f(3)?,
                rae: f(4)? / 100.0,
            });
        }
        let max_ref = rows
            .iter()
            .find(|r| r.rmse > 0.0 && r.psnr.is_finite())
            .map_or(f64::NAN, |r| r.rmse * 10f64.powf(r.psnr / 20.0));
        Ok(Self { max_ref, rows })
    }

    pub fn write(&self, csv_path: &Path, json_path: &Path) -> Result<()> {
        std::fs::write(csv_path, self.to_csv()).map_err(|e| Error::io(csv_path, e))?;
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))?;
        std::fs::write(json_path, json).map_err(|e| Error::io(json_path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn series(n: usize, seed: u64, scale: f64) -> Vec<Triad> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| std::array::from_fn(|_| scale * rng.random_range(-1.0..1.0))).collect()
    }

    #[test]
    fn basic_values() {
        let g = series(10, 1, 1.0);
        assert_eq!(rmse(&g, &g).unwrap(), 0.0);
        assert_eq!(mae(&g, &g).unwrap(), 0.0);
        assert_eq!(rae(&g, &g).unwrap(), 0.0);
        let shifted: Vec<Triad> = g.iter().map(|s| s.map(|v| v + 0.1)).collect();
        assert!((rmse(&shifted, &g).unwrap() - 0.1).abs() < 1e-12);
        let a = [[1.0, 0.0, 0.0]];
        let b = [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]];
        assert!(rmse(&a, &b).is_err());
        assert!(rmse(&[], &[]).is_err());
    }

    #[test]
    fn mae_signs_disregarded() {
        let p = [[1.0, 1.0, 1.0], [-1.0, -1.0, -1.0]];
        let z = [[0.0; 3]; 2];
        assert_eq!(mae(&p, &z).unwrap(), 1.0);
    }

    #[test]
    fn mae_matches_brute_force() {
        let p = series(50, 2, 1.0);
        let g = series(50, 3, 1.0);
        let mut s = 0.0;
        for i in 0..50 {
            for a in 0..3 {
                s += (p[i][a] - g[i][a]).abs();
            }
        }
        assert!((mae(&p, &g).unwrap() - s / 150.0).abs() < 1e-15);
    }

    #[test]
    fn psnr_values() {
        assert_eq!(psnr(2.0, 2.0).unwrap(), 0.0);
        assert!((psnr(0.0251, 9.80).unwrap() - 51.83).abs() < 0.05);
        let a = psnr(0.05, 9.8).unwrap();
        let b = psnr(0.005, 9.8).unwrap();
        assert!((b - a - 20.0).abs() < 1e-12);
        assert_eq!(psnr(0.0, 1.0).unwrap(), f64::INFINITY);
        assert!(psnr(1.0, 0.0).is_err());
    }

    #[test]
    fn rae_of_mean_predictor_is_one() {
        let g = series(40, 4, 1.0);
        let mut mu = [0.0; 3];
        for s in &g {
            for a in 0..3 {
                mu[a] += s[a] / 40.0;
            }
        }
        let pred = vec![mu; 40];
        assert!((rae(&pred, &g).unwrap() - 1.0).abs() < 1e-12);
        let constant = vec![[1.0, 2.0, 3.0]; 5];
        assert!(matches!(rae(&constant, &constant), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn compare_ranks_and_adds_noisy() {
        let g = series(30, 5, 10.0);
        let noisy: Vec<Triad> = g.iter().map(|s| s.map(|v| v + 0.5)).collect();
        let half: Vec<Triad> = g.iter().map(|s| s.map(|v| v + 0.2)).collect();
        let report = compare(
            &[("B".into(), half.clone()), ("A".into(), half), ("Perfect".into(), g.clone())],
            &noisy,
            &g,
        )
        .unwrap();
        let names: Vec<&str> = report.rows.iter().map(|r| r.model.as_str()).collect();
        assert_eq!(names, vec!["Perfect", "B", "A", "Noisy"]);
        assert_eq!(report.rows[0].rmse, 0.0);
        assert_eq!(report.rows[1].rmse, report.rows[2].rmse);
        assert_eq!(report.max_ref, max_ref(&g));
    }

    #[test]
    fn csv_and_json_outputs() {
        let g = series(30, 6, 10.0);
        let report = compare(&[("Perfect".into(), g.clone())], &series(30, 7, 10.0), &g).unwrap();
        let csv = report.to_csv();
        assert!(csv.starts_with("Model,RMSE [m/s²],MAE [m/s²],PSNR [dB],RAE [%]\nPerfect,0,0,inf,0\n"));
        let dir = tempfile::tempdir().unwrap();
        let (c, j) = (dir.path().join("m.csv"), dir.path().join("m.json"));
        report.write(&c, &j).unwrap();
        let back: MetricsReport = serde_json::from_str(&std::fs::read_to_string(&j).unwrap()).unwrap();
        assert_eq!(back, report);
        let parsed = MetricsReport::from_csv(&c).unwrap();
        assert_eq!(parsed.rows, report.rows);
        assert!((parsed.max_ref - report.max_ref).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn rmse_dominates_mae(seed in 0u64..1000, n in 1usize..60) {
            let p = series(n, seed, 3.0);
            let g = series(n, seed + 7, 3.0);
            prop_assert!(rmse(&p, &g).unwrap() >= mae(&p, &g).unwrap() - 1e-15);
        }

        #[test]
        fn psnr_decreasing(a in 1e-6f64..10.0, b in 1e-6f64..10.0) {
            prop_assume!(a < b);
            prop_assert!(psnr(a, 9.8).unwrap() > psnr(b, 9.8).unwrap());
        }

        #[test]
        fn rae_scale_invariant(seed in 0u64..500, lambda in 0.01f64..100.0) {
            let p = series(20, seed, 1.0);
            let g = series(20, seed + 1, 1.0);
            let ps: Vec<Triad> = p.iter().map(|s| s.map(|v| v * lambda)).collect();
            let gs: Vec<Triad> = g.iter().map(|s| s.map(|v| v * lambda)).collect();
            let a = rae(&p, &g).unwrap();
            let b = rae(&ps, &gs).unwrap();
            prop_assert!((a - b).abs() < 1e-12 * a.max(1.0));
        }

        #[test]
        fn psnr_round_trips_from_row(seed in 0u64..300) {
            let g = series(25, seed, 9.0);
            let p = series(25, seed + 3, 9.0);
            let m = max_ref(&g);
            let row = MetricsRow::evaluate("x", &p, &g, m).unwrap();
            prop_assert!((psnr(row.rmse, m).unwrap() - row.psnr).abs() < 1e-9);
        }
    }
}
