use serde::{Deserialize, Serialize};

use super::analysis::{RunSummary, OUTBREAK_FRACTION};
use super::compare::beta_for;
use super::ensemble::{run_ensemble_with, EnsembleSpec};
use crate::abm::SimConfig;
use crate::error::{Error, Result};
use crate::kinetics::critical_density;
use crate::ode::final_fraction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub factor: f64,
    /// agents/m²
    pub rho: f64,
    pub runs: usize,
    pub outbreaks: usize,
    pub outbreak_probability: f64,
    /// Mean final infected fraction among major outbreaks.
    pub mean_final_fraction: Option<f64>,
    /// Mean final infected fraction over all runs.
    pub mean_final_fraction_all: f64,
    /// Deterministic final fraction at this density's β.
    pub theory_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    /// δ/(2Rv̄p), or `None` when p or δ is zero (densities then scale the base density).
    pub rho_c: Option<f64>,
    pub rows: Vec<ThresholdRow>,
}

impl ThresholdTable {
    pub fn outbreak_probability_non_decreasing(&self) -> bool {
        let mut rows: Vec<&ThresholdRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| a.factor.total_cmp(&b.factor));
        rows.windows(2)
            .all(|w| w[1].outbreak_probability >= w[0].outbreak_probability)
    }
}

/// Outbreak probability and final size at densities `factor·ρ_c`, holding
/// the population size fixed (the domain grows as density falls).
pub fn threshold_scan(template: &EnsembleSpec, density_factors: &[f64]) -> Result<ThresholdTable> {
    let base = &template.base;
    let rho_c = critical_density(base.radius, base.speed.mean(), base.p, base.delta).ok();
    let reference = rho_c.unwrap_or(base.rho);
    let mut rows = Vec::with_capacity(density_factors.len());
    for &factor in density_factors {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::domain(
                "threshold_scan",
                format!("density factors must be positive, got {factor}"),
            ));
        }
        let config = SimConfig {
            rho: factor * reference,
            ..base.clone()
        };
        let spec = EnsembleSpec {
            base: config.clone(),
            ..template.clone()
        };
        let n = config.n;
        let summaries = run_ensemble_with(&spec, |_, out| RunSummary::from_output(n, &out))?;
        let nf = n as f64;
        let outbreaks: Vec<f64> = summaries
            .iter()
            .filter(|s| s.ever_infected > OUTBREAK_FRACTION * nf)
            .map(|s| s.ever_infected / nf)
            .collect();
        let all = summaries.iter().map(|s| s.ever_infected / nf).sum::<f64>() / summaries.len() as f64;
        let theory = if config.delta > 0.0 {
            final_fraction(beta_for(&config) / config.delta)
        } else {
            f64::NAN
        };
        rows.push(ThresholdRow {
            factor,
            rho: config.rho,
            runs: summaries.len(),
            outbreaks: outbreaks.len(),
            outbreak_probability: outbreaks.len() as f64 / summaries.len() as f64,
            mean_final_fraction: (!outbreaks.is_empty())
                .then(|| outbreaks.iter().sum::<f64>() / outbreaks.len() as f64),
            mean_final_fraction_all: all,
            theory_fraction: theory,
        });
    }
    Ok(ThresholdTable { rho_c, rows })
}
