use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use super::analysis::RunSummary;
use super::ensemble::{run_ensemble_with, EnsembleSpec};
use crate::abm::{Profile, SimConfig};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRatio {
    pub reference: Profile,
    pub candidate: Profile,
    pub growth_reference: Option<f64>,
    pub growth_candidate: Option<f64>,
    /// (growth_candidate + δ) / (growth_reference + δ); absent if a fit failed.
    pub ratio: Option<f64>,
    /// Infections per entry trial in the candidate arm, divided by p.
    pub acceptance_ratio: Option<f64>,
    pub entry_trials: u64,
    pub failed_fits: usize,
    /// π/4, the chord-to-uniform reduction.
    pub expected: f64,
}

fn arm(template: &EnsembleSpec, profile: Profile) -> Result<Vec<RunSummary>> {
    let spec = EnsembleSpec {
        base: SimConfig {
            profile,
            ..template.base.clone()
        },
        ..template.clone()
    };
    let n = spec.base.n;
    run_ensemble_with(&spec, |_, out| RunSummary::from_output(n, &out))
}

fn mean_growth(summaries: &[RunSummary]) -> (Option<f64>, usize) {
    let rates: Vec<f64> = summaries.iter().filter_map(|s| s.growth_rate).collect();
    let failed = summaries.len() - rates.len();
    let mean = (!rates.is_empty()).then(|| rates.iter().sum::<f64>() / rates.len() as f64);
    (mean, failed)
}

/// Growth-rate ratio between two profiles run on identical seeds.
pub fn profile_ratio_between(
    template: &EnsembleSpec,
    reference: Profile,
    candidate: Profile,
) -> Result<ProfileRatio> {
    let delta = template.base.delta;
    let ref_runs = arm(template, reference)?;
    let cand_runs = arm(template, candidate)?;
    let (g_ref, f_ref) = mean_growth(&ref_runs);
    let (g_cand, f_cand) = mean_growth(&cand_runs);
    let (trials, successes) = cand_runs.iter().fold((0u64, 0u64), |(t, s), r| {
        (t + r.trials.entry_trials, s + r.trials.entry_successes)
    });
    let p = template.base.p;
    Ok(ProfileRatio {
        reference,
        candidate,
        growth_reference: g_ref,
        growth_candidate: g_cand,
        ratio: g_ref.zip(g_cand).map(|(r, c)| (c + delta) / (r + delta)),
        acceptance_ratio: (trials > 0 && p > 0.0).then(|| successes as f64 / (trials as f64 * p)),
        entry_trials: trials,
        failed_fits: f_ref + f_cand,
        expected: FRAC_PI_4,
    })
}

/// Chord against uniform profile; the ratio should sit near π/4.
pub fn profile_ratio_experiment(template: &EnsembleSpec) -> Result<ProfileRatio> {
    profile_ratio_between(template, Profile::Uniform, Profile::Chord)
}
