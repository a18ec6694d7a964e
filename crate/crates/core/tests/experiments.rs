use wormsim::abm::{Profile, SimConfig};
use wormsim::experiments::{
    compare_sim_ode, fit_growth_rate, profile_ratio_between, r_sweep, run_ensemble, run_ensemble_sequential_with,
    run_ensemble_with, threshold_scan, EnsembleSpec, RunSummary,
};
use wormsim::files::{experiment_stem, ParamFile};
use wormsim::kinetics::beta_basic;
use wormsim::rng::derive_seed;

fn small(n: usize, t_end: f64) -> SimConfig {
    SimConfig {
        n,
        t_end,
        ..SimConfig::urban_default()
    }
}

#[test]
fn ensemble_results_do_not_depend_on_thread_count() {
    let spec = EnsembleSpec::new(small(300, 1.0), 5, 99);
    let reduce = |k: usize, out: wormsim::abm::SimOutput| (k, out.infection_events.len(), out.series);
    let sequential = run_ensemble_sequential_with(&spec, reduce).unwrap();
    for threads in [1, 2, 5] {
        let parallel = run_ensemble_with(&spec.clone().with_parallelism(threads), reduce).unwrap();
        assert_eq!(sequential, parallel, "{threads} threads");
    }
    let indices: Vec<usize> = sequential.iter().map(|r| r.0).collect();
    assert_eq!(indices, vec![0, 1, 2, 3, 4]);
}

#[test]
fn each_member_gets_its_own_derived_seed() {
    let spec = EnsembleSpec::new(small(300, 1.0), 4, 5);
    let seeds: Vec<u64> = (0..4).map(|k| spec.run_config(k).seed).collect();
    assert_eq!(seeds, (0..4).map(|k| derive_seed(5, k)).collect::<Vec<_>>());
    let mut unique = seeds.clone();
    unique.dedup();
    assert_eq!(unique.len(), 4);
}

#[test]
fn invalid_ensembles_are_rejected() {
    assert!(run_ensemble(&EnsembleSpec::new(small(300, 1.0), 0, 1)).is_err());
    let bad = SimConfig {
        p: 2.0,
        ..small(300, 1.0)
    };
    assert!(run_ensemble(&EnsembleSpec::new(bad, 2, 1)).is_err());
}

#[test]
fn identical_profiles_give_a_unit_ratio() {
    let spec = EnsembleSpec::new(small(2000, 2.0), 3, 17);
    let r = profile_ratio_between(&spec, Profile::Uniform, Profile::Uniform).unwrap();
    if let Some(ratio) = r.ratio {
        assert_eq!(ratio, 1.0);
    }
    assert_eq!(r.growth_reference, r.growth_candidate);
}

#[test]
fn empty_radius_list_is_an_error_and_bad_radii_are_skipped() {
    let spec = EnsembleSpec::new(small(300, 0.5), 2, 3);
    assert!(r_sweep(&spec, &[]).is_err());
    // R = 200 m breaks the minimum-image rule for a 316 m domain.
    let table = r_sweep(&spec, &[5.0, 200.0]).unwrap();
    assert_eq!(table.rows.len(), 2);
    assert!(table.rows[0].metrics.is_some());
    assert!(table.rows[1].metrics.is_none());
    let diag = table.rows[1].diagnostic.as_deref().unwrap();
    assert!(diag.contains("L = sqrt(n/rho)"), "{diag}");
}

#[test]
fn threshold_scan_rejects_nonpositive_factors() {
    let spec = EnsembleSpec::new(small(300, 0.5), 2, 3);
    assert!(threshold_scan(&spec, &[1.0, 0.0]).is_err());
    assert!(threshold_scan(&spec, &[-1.0]).is_err());
}

#[test]
fn below_critical_density_outbreaks_are_rare() {
    let base = SimConfig {
        n: 400,
        profile: Profile::Chord,
        t_end: 20.0,
        ..SimConfig::urban_default()
    };
    let table = threshold_scan(&EnsembleSpec::new(base, 20, 8), &[0.5]).unwrap();
    let row = &table.rows[0];
    assert!(row.outbreak_probability <= 0.05, "{row:?}");
    assert!((table.rho_c.unwrap() - 5e-4).abs() < 1e-12);
    assert!((row.rho - 2.5e-4).abs() < 1e-12);
}

#[test]
fn comparison_without_outbreaks_has_no_growth_rate() {
    let config = SimConfig {
        p: 0.0,
        ..small(300, 1.0)
    };
    let m = compare_sim_ode(&EnsembleSpec::new(config, 3, 2)).unwrap();
    assert_eq!(m.outbreaks, 0);
    assert_eq!(m.averaged_runs, 3);
    assert!(m.growth_rate_sim.is_none());
    assert!(m.linf_aligned.is_none());
}

#[test]
fn ensemble_mean_growth_tracks_beta_minus_delta() {
    let config = small(10_000, 2.5);
    let target = beta_basic(&config.kinetic_params()) - config.delta;
    let spec = EnsembleSpec::new(config.clone(), 10, 1234);
    let rates: Vec<f64> = run_ensemble_with(&spec, |_, out| RunSummary::from_output(config.n, &out).growth_rate)
        .unwrap()
        .into_iter()
        .flatten()
        .collect();
    assert!(rates.len() >= 5, "only {} runs took off", rates.len());
    let mean = rates.iter().sum::<f64>() / rates.len() as f64;
    assert!((mean - target).abs() <= 0.10 * target, "{mean} vs {target}");
}

#[test]
fn growth_fit_ignores_samples_outside_the_window() {
    let times: Vec<f64> = (0..400).map(|k| k as f64 * 0.01).collect();
    let infected: Vec<f64> = times
        .iter()
        .map(|&t| if t < 0.5 { 3.0 } else { (2.0 * (t - 0.5)).exp() * 10.0 })
        .collect();
    let rate = fit_growth_rate(&times, &infected, 10_000).unwrap();
    assert!((rate - 2.0).abs() < 1e-9, "{rate}");
}

#[test]
fn experiment_names_embed_hash_and_seed() {
    let params = ParamFile::from_sim_config(&small(300, 1.0));
    let stem = experiment_stem("rsweep", &params, 42);
    let parts: Vec<&str> = stem.split('_').collect();
    assert_eq!(parts.len(), 3);
    assert_eq!(parts[0], "rsweep");
    assert_eq!(parts[1].len(), 12);
    assert_eq!(parts[2], "42");
    let other = ParamFile {
        p: Some(0.2),
        ..params.clone()
    };
    assert_ne!(experiment_stem("rsweep", &other, 42), stem);
}
