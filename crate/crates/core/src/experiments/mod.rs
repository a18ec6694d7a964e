//! Ensembles and simulation-versus-theory comparisons.

mod analysis;
mod compare;
mod ensemble;
mod profile;
mod sweep;
mod threshold;

pub use analysis::{
    fit_growth_rate, mean_and_sd, mean_curve, RunSummary, GROWTH_WINDOW_HIGH_FRACTION,
    GROWTH_WINDOW_LOW, OUTBREAK_FRACTION,
};
pub use compare::{
    beta_for, compare_sim_ode, compare_with_curves, ComparisonMetrics, MeanCurves, ALIGN_FRACTION,
};
pub use ensemble::{run_ensemble, run_ensemble_sequential_with, run_ensemble_with, EnsembleSpec};
pub use profile::{profile_ratio_between, profile_ratio_experiment, ProfileRatio};
pub use sweep::{config_for_radius, r_sweep, SweepRow, SweepTable};
pub use threshold::{threshold_scan, ThresholdRow, ThresholdTable};
