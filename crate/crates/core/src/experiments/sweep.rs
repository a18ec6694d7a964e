use serde::{Deserialize, Serialize};

use super::analysis::RunSummary;
use super::compare::{metrics_from_summaries, ComparisonMetrics};
use super::ensemble::{run_ensemble_with, EnsembleSpec};
use crate::abm::SimConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// m
    pub radius: f64,
    pub metrics: Option<ComparisonMetrics>,
    /// Why the radius was skipped, if it was.
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn completed(&self) -> impl Iterator<Item = (f64, &ComparisonMetrics)> {
        self.rows
            .iter()
            .filter_map(|r| r.metrics.as_ref().map(|m| (r.radius, m)))
    }

    /// Largest relative deviation of (growth + δ)/R from its mean across the
    /// sweep; zero means perfectly proportional to R.
    pub fn growth_proportionality(&self, delta: f64) -> Option<f64> {
        let ratios: Vec<f64> = self
            .completed()
            .map(|(r, m)| m.growth_rate_sim.map(|g| (g + delta) / r))
            .collect::<Option<_>>()?;
        if ratios.is_empty() {
            return None;
        }
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        Some(ratios.iter().map(|q| (q / mean - 1.0).abs()).fold(0.0, f64::max))
    }

    /// True when peak time falls strictly with each larger radius.
    pub fn peak_time_strictly_decreasing(&self) -> bool {
        let mut pts: Vec<(f64, f64)> = self.completed().map(|(r, m)| (r, m.t_peak_sim)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.windows(2).all(|w| w[1].1 < w[0].1)
    }
}

/// Config for one sweep radius. The step scales with R so every radius
/// resolves its contacts equally well.
pub fn config_for_radius(base: &SimConfig, radius: f64) -> SimConfig {
    SimConfig {
        radius,
        dt: base.dt * radius / base.radius,
        ..base.clone()
    }
}

/// One comparison row per radius, each an ensemble with the template's
/// runs, seeds and parallelism.
pub fn r_sweep(template: &EnsembleSpec, radii: &[f64]) -> Result<SweepTable> {
    if radii.is_empty() {
        return Err(Error::domain("r_sweep", "radius list is empty"));
    }
    let mut rows = Vec::with_capacity(radii.len());
    for &radius in radii {
        let base = config_for_radius(&template.base, radius);
        if let Err(e) = base.validate() {
            rows.push(SweepRow {
                radius,
                metrics: None,
                diagnostic: Some(e.to_string()),
            });
            continue;
        }
        let spec = EnsembleSpec {
            base: base.clone(),
            ..template.clone()
        };
        let n = base.n;
        let summaries = run_ensemble_with(&spec, |_, out| RunSummary::from_output(n, &out))?;
        let (metrics, _) = metrics_from_summaries(&base, &summaries)?;
        rows.push(SweepRow {
            radius,
            metrics: Some(metrics),
            diagnostic: None,
        });
    }
    Ok(SweepTable { rows })
}
