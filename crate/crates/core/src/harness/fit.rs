//! Power-law fits `‖u(t)‖ ≈ c t^{−α}` by least squares in log-log.

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::index::LqIndex;
use crate::semigroup::Trajectory;

/// Fewest points a fit is allowed to use.
pub const MIN_POINTS: usize = 8;

/// Number of geometrically spaced sample times drawn from a dense series.
pub const FIT_SAMPLES: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// `−slope` of `log ‖u‖` against `log t`.
    pub alpha_hat: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Window actually used, after extinction truncation.
    pub window: [f64; 2],
    pub points: usize,
    /// First recorded time at which the norm vanished, if inside the window.
    pub extinction_time: Option<f64>,
    pub predicted_alpha: Option<f64>,
    pub rel_err: Option<f64>,
}

impl DecayFit {
    pub fn with_prediction(mut self, alpha: f64) -> Self {
        self.predicted_alpha = Some(alpha);
        self.rel_err = Some((self.alpha_hat - alpha).abs() / alpha.abs());
        self
    }
}

/// Indices of `times` nearest to `FIT_SAMPLES` geometric targets in
/// `[lo, hi]` (all indices in the window when there are fewer).
fn geometric_subsample(times: &[f64], idx: &[usize], lo: f64, hi: f64) -> Vec<usize> {
    if idx.len() <= FIT_SAMPLES {
        return idx.to_vec();
    }
    let mut out: Vec<usize> = Vec::with_capacity(FIT_SAMPLES);
    let ratio = (hi / lo).ln();
    let mut cursor = 0;
    for j in 0..FIT_SAMPLES {
        let target = lo * (ratio * j as f64 / (FIT_SAMPLES - 1) as f64).exp();
        while cursor + 1 < idx.len() && (times[idx[cursor + 1]] - target).abs() <= (times[idx[cursor]] - target).abs() {
            cursor += 1;
        }
        if out.last() != Some(&idx[cursor]) {
            out.push(idx[cursor]);
        }
    }
    out
}

/// Fit a power law to `(times, values)` restricted to `window`.
///
/// Non-positive values end the usable window (extinction); the fit then
/// uses the part before the first zero if it still has enough points.
pub fn fit_power_law_series(times: &[f64], values: &[f64], window: [f64; 2]) -> Result<DecayFit, HarnessError> {
    let [lo, hi] = window;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(HarnessError::DegenerateWindow(format!(
            "window [{lo}, {hi}] must satisfy 0 < lo < hi < inf"
        )));
    }
    if times.len() != values.len() {
        return Err(HarnessError::DegenerateWindow("times and values differ in length".into()));
    }
    let mut idx: Vec<usize> = (0..times.len()).filter(|&i| times[i] >= lo && times[i] <= hi).collect();
    let mut extinction_time = None;
    if let Some(pos) = idx.iter().position(|&i| !(values[i] > 0.0)) {
        let time = times[idx[pos]];
        extinction_time = Some(time);
        idx.truncate(pos);
        if idx.len() < MIN_POINTS {
            return Err(HarnessError::Extinction {
                time,
                points: idx.len(),
            });
        }
    }
    if idx.len() < MIN_POINTS {
        return Err(HarnessError::DegenerateWindow(format!(
            "{} points in [{lo}, {hi}], need at least {MIN_POINTS}",
            idx.len()
        )));
    }
    let used_hi = times[*idx.last().unwrap()];
    let used_lo = times[idx[0]];
    let sel = geometric_subsample(times, &idx, used_lo, used_hi);
    let xs: Vec<f64> = sel.iter().map(|&i| times[i].ln()).collect();
    let ys: Vec<f64> = sel.iter().map(|&i| values[i].ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(HarnessError::DegenerateWindow("all sample times coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    // A constant series is fitted exactly by a zero slope.
    let r2 = if ss_tot <= f64::EPSILON * ys.iter().map(|y| y * y).sum::<f64>() {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(DecayFit {
        alpha_hat: -slope,
        intercept,
        r2,
        window: [used_lo, used_hi],
        points: sel.len(),
        extinction_time,
        predicted_alpha: None,
        rel_err: None,
    })
}

/// Fit the decay of `‖u(t)‖_q`, `q ∈ {1, 2, ∞}`.
pub fn fit_power_law(traj: &Trajectory, norm: LqIndex, window: [f64; 2]) -> Result<DecayFit, HarnessError> {
    let values = traj
        .series(norm)
        .ok_or_else(|| HarnessError::Config(format!("no recorded norm series for q = {norm}")))?;
    fit_power_law_series(&traj.times, &values, window)
}
