//! Per-run reductions shared by the comparison experiments.

use serde::{Deserialize, Serialize};

use crate::abm::{SimOutput, TrialStats};

/// A run whose final infected fraction exceeds this is a major outbreak.
pub const OUTBREAK_FRACTION: f64 = 0.10;

/// Growth fits use samples with I between these bounds (upper is n/20).
pub const GROWTH_WINDOW_LOW: f64 = 10.0;
pub const GROWTH_WINDOW_HIGH_FRACTION: f64 = 1.0 / 20.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub infected: Vec<f64>,
    pub ever_infected: f64,
    pub growth_rate: Option<f64>,
    pub outbreak: bool,
    pub trials: TrialStats,
}

impl RunSummary {
    pub fn from_output(n: usize, output: &SimOutput) -> Self {
        let infected: Vec<f64> = output.series.infected().collect();
        let ever = output.ever_infected();
        Self {
            growth_rate: fit_growth_rate(&output.series.times, &infected, n),
            infected,
            ever_infected: ever,
            outbreak: ever > OUTBREAK_FRACTION * n as f64,
            trials: output.trials,
        }
    }
}

/// Least-squares slope of ln I(t) over the early-growth window
/// [10, n/20], or `None` if the run never crosses the window.
pub fn fit_growth_rate(times: &[f64], infected: &[f64], n: usize) -> Option<f64> {
    let high = GROWTH_WINDOW_HIGH_FRACTION * n as f64;
    if high <= GROWTH_WINDOW_LOW {
        return None;
    }
    let start = infected.iter().position(|&i| i >= GROWTH_WINDOW_LOW)?;
    let end = start + infected[start..].iter().position(|&i| i > high)?;
    let (ts, is) = (&times[start..end], &infected[start..end]);
    if ts.len() < 2 || is.iter().any(|&i| i <= 0.0) {
        return None;
    }
    let m = ts.len() as f64;
    let t_mean = ts.iter().sum::<f64>() / m;
    let y_mean = is.iter().map(|i| i.ln()).sum::<f64>() / m;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (&t, &i) in ts.iter().zip(is) {
        sxy += (t - t_mean) * (i.ln() - y_mean);
        sxx += (t - t_mean) * (t - t_mean);
    }
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn mean_and_sd(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.into_iter().collect();
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = if v.len() > 1 {
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

/// Pointwise mean of equally long curves.
pub fn mean_curve<'a>(curves: impl IntoIterator<Item = &'a [f64]>) -> Vec<f64> {
    let mut sum: Vec<f64> = Vec::new();
    let mut count = 0usize;
    for c in curves {
        if sum.is_empty() {
            sum = vec![0.0; c.len()];
        }
        assert_eq!(c.len(), sum.len(), "ensemble curves must share one time grid");
        for (s, v) in sum.iter_mut().zip(c) {
            *s += v;
        }
        count += 1;
    }
    sum.iter_mut().for_each(|s| *s /= count.max(1) as f64);
    sum
}
