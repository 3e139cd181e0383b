//! Stationary coarse alignment: roll and pitch from a specific-force triad,
//! angular errors against the true orientation, and improvement ratios.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::EulerAngles;
use crate::Triad;

/// `atan2(−f_y, −f_z)` in degrees.
pub fn roll_from_f(f: &Triad) -> Result<f64> {
    if f[1] == 0.0 && f[2] == 0.0 {
        return Err(Error::invalid("roll undefined when f_y = f_z = 0"));
    }
    Ok((-f[1]).atan2(-f[2]).to_degrees())
}

/// `atan(f_x / √(f_y² + f_z²))` in degrees.
pub fn pitch_from_f(f: &Triad) -> Result<f64> {
    let horizontal = f[1].hypot(f[2]);
    if horizontal == 0.0 {
        return Err(Error::invalid("pitch undefined when f_y = f_z = 0"));
    }
    Ok((f[0] / horizontal).atan().to_degrees())
}

/// `computed − truth` wrapped to `(−180°, 180°]`.
pub fn angular_error(computed_deg: f64, truth_deg: f64) -> f64 {
    let d = (computed_deg - truth_deg).rem_euclid(360.0);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

/// `model_rae / noisy_rae`; below 1 means the model improved on the input.
pub fn suppression_ratio(model_rae: f64, noisy_rae: f64) -> Result<f64> {
    if !(noisy_rae > 0.0) || !(model_rae >= 0.0) {
        return Err(Error::invalid(format!(
            "suppression ratio needs model ≥ 0 and noisy > 0, got {model_rae}, {noisy_rae}"
        )));
    }
    Ok(model_rae / noisy_rae)
}

/// Mean of the first `t` samples (all when `None`).
pub fn mean_force(series: &[Triad], t: Option<usize>) -> Result<Triad> {
    let n = t.unwrap_or(series.len()).min(series.len());
    if n == 0 {
        return Err(Error::invalid("averaging window is empty"));
    }
    let mut acc = [0.0; 3];
    for s in &series[..n] {
        for a in 0..3 {
            acc[a] += s[a];
        }
    }
    Ok(acc.map(|v| v / n as f64))
}

/// Roll and pitch RMSE in degrees over a set of windows.
pub fn angle_rmse(series: &[Vec<Triad>], truth: &[EulerAngles], t: Option<usize>) -> Result<(f64, f64)> {
    if series.len() != truth.len() || series.is_empty() {
        return Err(Error::invalid("one true orientation per window is required"));
    }
    let (mut sr, mut sp) = (0.0, 0.0);
    for (s, a) in series.iter().zip(truth) {
        let f = mean_force(s, t)?;
        sr += angular_error(roll_from_f(&f)?, a.roll_deg).powi(2);
        sp += angular_error(pitch_from_f(&f)?, a.pitch_deg).powi(2);
    }
    let n = series.len() as f64;
    Ok(((sr / n).sqrt(), (sp / n).sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaRow {
    pub model: String,
    pub rmse_roll_deg: f64,
    pub rmse_pitch_deg: f64,
    pub ratio_roll: f64,
    pub ratio_pitch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaReport {
    pub averaging_samples: Option<usize>,
    pub rows: Vec<ScaRow>,
}

pub const SCA_HEADER: [&str; 5] = [
    "Model",
    "RMSE roll [°]",
    "RMSE pitch [°]",
    "ratio roll [%]",
    "ratio pitch [%]",
];

/// Scores the noisy input and every model; ratios are relative to the noisy row.
pub fn evaluate_sca(
    models: &[(String, Vec<Vec<Triad>>)],
    noisy: &[Vec<Triad>],
    truth: &[EulerAngles],
    t: Option<usize>,
) -> Result<ScaReport> {
    let (nr, np) = angle_rmse(noisy, truth, t)?;
    let ratio = |m: f64, base: f64| if base > 0.0 { m / base } else { f64::NAN };
    let mut rows = vec![ScaRow {
        model: crate::metrics::NOISY_ROW.to_string(),
        rmse_roll_deg: nr,
        rmse_pitch_deg: np,
        ratio_roll: ratio(nr, nr),
        ratio_pitch: ratio(np, np),
    }];
    for (name, series) in models {
        let (r, p) = angle_rmse(series, truth, t)?;
        rows.push(ScaRow {
            model: name.clone(),
            rmse_roll_deg: r,
            rmse_pitch_deg: p,
            ratio_roll: ratio(r, nr),
            ratio_pitch: ratio(p, np),
        });
    }
    Ok(ScaReport {
        averaging_samples: t,
        rows,
    })
}

impl ScaReport {
    pub fn row(&self, model: &str) -> Option<&ScaRow> {
        self.rows.iter().find(|r| r.model == model)
    }

    pub fn to_csv(&self) -> String {
        let mut out = SCA_HEADER.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.model,
                r.rmse_roll_deg,
                r.rmse_pitch_deg,
                100.0 * r.ratio_roll,
                100.0 * r.ratio_pitch
            ));
        }
        out
    }

    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = crate::dataset::open_csv(path)?;
        let headers = reader.headers().map_err(|e| crate::dataset::csv_error(path, e))?.clone();
        if headers.iter().collect::<Vec<_>>() != SCA_HEADER {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: "not an alignment table".into(),
            });
        }
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| crate::dataset::csv_error(path, e))?;
            let line = rec.position().map_or(0, |p| p.line());
            let f = |i: usize| crate::dataset::parse_field(path, line, SCA_HEADER[i], rec.get(i).unwrap_or(""));
            rows.push(ScaRow {
                model: rec.get(0).unwrap_or("").to_string(),
                rmse_roll_deg: f(1)?,
                rmse_pitch_deg: f(2)?,
                ratio_roll: f(3)? / 100.0,
                ratio_pitch: f(4)? / 100.0,
            });
        }
        Ok(Self {
            averaging_samples: None,
            rows,
        })
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
    use crate::sim::{gravity_projection, STANDARD_GRAVITY};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn proj(roll: f64, pitch: f64) -> Triad {
        gravity_projection(EulerAngles::level(roll, pitch), STANDARD_GRAVITY).unwrap()
    }

    #[test]
    fn level_sensor() {
        let f = [0.0, 0.0, -9.8];
        assert_eq!(roll_from_f(&f).unwrap(), 0.0);
        assert_eq!(pitch_from_f(&f).unwrap(), 0.0);
        assert!(roll_from_f(&[1.0, 0.0, 0.0]).is_err());
        assert!(pitch_from_f(&[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn inverse_of_projection() {
        let f = proj(10.0, 5.0);
        assert!((roll_from_f(&f).unwrap() - 10.0).abs() < 1e-9);
        assert!((pitch_from_f(&f).unwrap() - 5.0).abs() < 1e-9);
        // φ = 30°, θ = 0 gives f = [0, −g/2, −g·cos 30°]
        let g = STANDARD_GRAVITY;
        let f = [0.0, -0.5 * g, -g * 3f64.sqrt() / 2.0];
        assert!((roll_from_f(&f).unwrap() - 30.0).abs() < 1e-12);
        assert!((pitch_from_f(&proj(0.0, 15.0)).unwrap() - 15.0).abs() < 1e-9);
        let f = [g * 12f64.to_radians().sin(), g * 7f64.to_radians().sin() * 12f64.to_radians().cos(), -g * 7f64.to_radians().cos() * 12f64.to_radians().cos()];
        assert!((pitch_from_f(&f).unwrap() - 12.0).abs() < 1e-12);
        assert!((roll_from_f(&f).unwrap() + 7.0).abs() < 1e-12);
    }

    #[test]
    fn wrapping() {
        assert_eq!(angular_error(5.0, 5.0), 0.0);
        assert!((angular_error(179.0, -179.0) + 2.0).abs() < 1e-12);
        assert!((angular_error(0.3, 0.1) - 0.2).abs() < 1e-12);
        assert_eq!(angular_error(-90.0, 90.0), 180.0);
    }

    #[test]
    fn ratio_values() {
        assert_eq!(suppression_ratio(0.5, 0.5).unwrap(), 1.0);
        assert!((suppression_ratio(0.444, 1.184).unwrap() - 0.375).abs() < 1e-3);
        assert!((suppression_ratio(0.171, 1.828).unwrap() - 0.0938).abs() < 1e-3);
        assert!(suppression_ratio(0.1, 0.0).is_err());
    }

    #[test]
    fn report_ratios() {
        let truth: Vec<EulerAngles> = (0..5).map(|i| EulerAngles::level(i as f64, -(i as f64))).collect();
        let clean: Vec<Vec<Triad>> = truth.iter().map(|a| vec![proj(a.roll_deg, a.pitch_deg); 10]).collect();
        let noisy: Vec<Vec<Triad>> = clean
            .iter()
            .map(|w| w.iter().map(|s| [s[0] + 0.05, s[1] - 0.03, s[2]]).collect())
            .collect();
        let report = evaluate_sca(
            &[("Perfect".into(), clean), ("Identity".into(), noisy.clone())],
            &noisy,
            &truth,
            None,
        )
        .unwrap();
        let p = report.row("Perfect").unwrap();
        assert!(p.rmse_roll_deg < 1e-12 && p.ratio_roll < 1e-9);
        let id = report.row("Identity").unwrap();
        assert_eq!(id.ratio_roll, 1.0);
        assert_eq!(id.ratio_pitch, 1.0);
        assert!(report.to_csv().starts_with("Model,RMSE roll [°],RMSE pitch [°],ratio roll [%],ratio pitch [%]\nNoisy,"));
    }

    #[test]
    fn averaging_gain_follows_square_root() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let truth = vec![EulerAngles::level(2.0, -3.0); 400];
        let windows: Vec<Vec<Triad>> = truth
            .iter()
            .map(|a| {
                let f = proj(a.roll_deg, a.pitch_deg);
                (0..400)
                    .map(|_| std::array::from_fn(|k| f[k] + 0.05 * rng.sample::<f64, _>(StandardNormal)))
                    .collect()
            })
            .collect();
        let (r25, _) = angle_rmse(&windows, &truth, Some(25)).unwrap();
        let (r400, _) = angle_rmse(&windows, &truth, Some(400)).unwrap();
        let gain = r25 / r400;
        assert!((gain - 4.0).abs() < 0.6, "{gain}");
    }

    proptest! {
        #[test]
        fn round_trip(roll in -89.0f64..89.0, pitch in -89.0f64..89.0) {
            let f = proj(roll, pitch);
            prop_assert!((roll_from_f(&f).unwrap() - roll).abs() < 1e-10);
            prop_assert!((pitch_from_f(&f).unwrap() - pitch).abs() < 1e-10);
        }

        #[test]
        fn scale_invariant(roll in -60.0f64..60.0, pitch in -60.0f64..60.0, lambda in 0.01f64..100.0) {
            let f = proj(roll, pitch);
            let g = f.map(|v| v * lambda);
            prop_assert!((roll_from_f(&f).unwrap() - roll_from_f(&g).unwrap()).abs() < 1e-10);
            prop_assert!((pitch_from_f(&f).unwrap() - pitch_from_f(&g).unwrap()).abs() < 1e-10);
        }
    }
}
