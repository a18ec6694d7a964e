//! `wormsim` command-line front end.

use std::collections::hash_map::RandomState;
use std::fs;
use std::hash::{BuildHasher, Hasher};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use wormsim::abm::{impact_histogram, measure_contact_rate, run_simulation, NeighborSearch, Profile, SimConfig};
use wormsim::experiments::{
    compare_with_curves, profile_ratio_experiment, r_sweep, threshold_scan, EnsembleSpec,
};
use wormsim::files::{experiment_stem, num, write_csv_table, ParamFile, RunManifest, SeedValue};
use wormsim::kinetics::{
    beta_basic, beta_chord, contact_rate_population, critical_density, r0, KineticParams, SpeedModel,
};
use wormsim::ode::{epidemic_threshold, final_fraction};
use wormsim::units::{format_quantity, Dimension};

#[derive(Parser, Debug)]
#[command(name = "wormsim", version, about = "Proximity worm spread: contact rates, SIR model and agent simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print contact rate, infection rates, critical density and final size.
    Analytic(CommonArgs),
    /// Run one agent-based simulation and write series, events and manifest.
    Simulate(CommonArgs),
    /// Run a named experiment and write its tables, summary and manifest.
    Experiment {
        name: ExperimentName,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ExperimentName {
    Compare,
    Rsweep,
    Threshold,
    ProfileRatio,
    ContactRate,
}

impl ExperimentName {
    fn label(self) -> &'static str {
        match self {
            Self::Compare => "compare",
            Self::Rsweep => "rsweep",
            Self::Threshold => "threshold",
            Self::ProfileRatio => "profile-ratio",
            Self::ContactRate => "contact-rate",
        }
    }
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// Parameter file or manifest (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// RNG seed (single run) or seed base (ensembles).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default `out`; `analytic` writes a CSV only when given).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Ensemble size.
    #[arg(long)]
    runs: Option<usize>,
    /// Worker threads for ensembles.
    #[arg(long)]
    parallel: Option<usize>,

    /// Agent count.
    #[arg(long)]
    n: Option<usize>,
    /// Density with unit, e.g. "3000/km^2".
    #[arg(long, allow_hyphen_values = true)]
    density: Option<String>,
    /// Contact radius with unit, e.g. "5 m".
    #[arg(long, allow_hyphen_values = true)]
    radius: Option<String>,
    /// Mean speed with unit, e.g. "2 km/day".
    #[arg(long, allow_hyphen_values = true)]
    speed: Option<String>,
    /// `constant` or `maxwell-boltzmann`.
    #[arg(long)]
    speed_model: Option<String>,
    /// Transmission probability per contact.
    #[arg(long, allow_hyphen_values = true)]
    p: Option<f64>,
    /// Recovery rate with unit, e.g. "1/day".
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    /// Transmission profile inside R: `uniform` or `chord`
    #[arg(long, value_parser = parse_profile)]
    profile: Option<Profile>,
    /// Time step with unit, e.g. "0.0003 day".
    #[arg(long, allow_hyphen_values = true)]
    dt: Option<String>,
    /// Simulated duration with unit, e.g. "20 day".
    #[arg(long, allow_hyphen_values = true)]
    t_end: Option<String>,
    /// Devices infected at t = 0
    #[arg(long)]
    initial_infected: Option<usize>,
    /// Pair search: `grid` or `brute-force`
    #[arg(long, value_parser = parse_search)]
    neighbor_search: Option<NeighborSearch>,
    /// Comma-separated radii for `rsweep`, e.g. "10m,20m,40m".
    #[arg(long, allow_hyphen_values = true)]
    radii: Option<String>,
    /// Comma-separated multiples of the critical density for `threshold`.
    #[arg(long, allow_hyphen_values = true)]
    density_factors: Option<String>,
    /// Observation window for `contact-rate`, e.g. "1 day".
    #[arg(long, allow_hyphen_values = true)]
    t_obs: Option<String>,
    /// Population size used for the final-size figure in `analytic`.
    #[arg(long)]
    population: Option<f64>,
}

fn parse_profile(s: &str) -> Result<Profile, String> {
    match s.to_ascii_lowercase().as_str() {
        "uniform" => Ok(Profile::Uniform),
        "chord" => Ok(Profile::Chord),
        other => Err(format!("unknown profile `{other}` (use uniform or chord)")),
    }
}

fn parse_search(s: &str) -> Result<NeighborSearch, String> {
    match s.to_ascii_lowercase().as_str() {
        "grid" => Ok(NeighborSearch::Grid),
        "brute-force" => Ok(NeighborSearch::BruteForce),
        other => Err(format!("unknown neighbor search `{other}` (use grid or brute-force)")),
    }
}

/// Failure classes mapped to exit codes 1 and 2.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<wormsim::Error> for Failure {
    fn from(e: wormsim::Error) -> Self {
        use wormsim::Error as E;
        match e {
            E::Config(_) | E::Unit(_) | E::Parse(_) | E::Domain { .. } => Failure::Usage(e.to_string()),
            E::Io(_) | E::Csv(_) | E::Run { .. } => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

fn split_list(text: &str) -> Vec<String> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

impl CommonArgs {
    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    fn overrides(&self) -> CliResult<ParamFile> {
        let density_factors = self
            .density_factors
            .as_deref()
            .map(|text| {
                split_list(text)
                    .iter()
                    .map(|f| {
                        f.parse::<f64>()
                            .map_err(|_| Failure::Usage(format!("density factor `{f}` is not a number")))
                    })
                    .collect::<CliResult<Vec<f64>>>()
            })
            .transpose()?;
        Ok(ParamFile {
            n: self.n,
            density: self.density.clone(),
            radius: self.radius.clone(),
            speed: self.speed.clone(),
            speed_model: self.speed_model.clone(),
            p: self.p,
            delta: self.delta.clone(),
            profile: self.profile,
            dt: self.dt.clone(),
            t_end: self.t_end.clone(),
            initial_infected: self.initial_infected,
            neighbor_search: self.neighbor_search,
            radii: self.radii.as_deref().map(split_list),
            density_factors,
            t_obs: self.t_obs.clone(),
            population: self.population,
            ..ParamFile::default()
        })
    }

    /// Parameter file merged with flag overrides, plus the input file hash.
    fn params(&self) -> CliResult<(ParamFile, Option<String>)> {
        let (base, hash) = match &self.config {
            Some(path) => {
                let (file, hash) = ParamFile::load(path).map_err(|e| match e {
                    wormsim::Error::Io(io) => Failure::Usage(format!("cannot read {}: {io}", path.display())),
                    other => Failure::Usage(format!("{}: {other}", path.display())),
                })?;
                (file, Some(hash))
            }
            None => (ParamFile::default(), None),
        };
        Ok((base.merged(self.overrides()?), hash))
    }
}

fn generated_seed() -> u64 {
    let mut h = RandomState::new().build_hasher();
    h.write_u128(
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos())
            .unwrap_or(0),
    );
    h.finish()
}

/// Seed from the flag, else from the file, else freshly generated with a warning.
fn resolve_seed(flag: Option<u64>, file: Option<&SeedValue>, what: &str) -> CliResult<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Some(v) = file {
        return Ok(v.value()?);
    }
    let s = generated_seed();
    eprintln!("warning: no {what} given; using generated {what} {s} (recorded in the manifest)");
    Ok(s)
}

fn print_warnings(config: &SimConfig) -> CliResult<()> {
    for w in config.validate()? {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn create_out(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", dir.display())))
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn cmd_analytic(args: &CommonArgs) -> CliResult<()> {
    let (params, _) = args.params()?;
    let config = params.to_sim_config()?;
    let kp = KineticParams::new(config.rho, config.radius, config.speed.mean(), config.p, config.delta)?;
    let cr = contact_rate_population(&config.speed, &kp)?;
    let bb = beta_basic(&kp);
    let bc = beta_chord(&kp);
    let rho_c = critical_density(config.radius, config.speed.mean(), config.p, config.delta).ok();
    let basic_r0 = r0(bb, config.delta).ok();
    let chord_r0 = r0(bc, config.delta).ok();
    let epidemic = epidemic_threshold(&kp);
    let fraction = chord_r0.map(final_fraction).unwrap_or(if epidemic { 1.0 } else { 0.0 });
    let population = params.population.unwrap_or(config.n as f64);

    let g = |v: f64| format!("{v:.6}");
    println!("contact rate CR        = {} /day", g(cr));
    println!("beta (uniform profile) = {} /day", g(bb));
    println!("beta (chord profile)   = {} /day", g(bc));
    match rho_c {
        Some(rc) => println!("critical density       = {} /m^2 ({} /km^2)", g(rc), g(rc * 1e6)),
        None => println!("critical density       = undefined (needs p > 0, R > 0, speed > 0)"),
    }
    match chord_r0 {
        Some(r) => println!("R0 (chord)             = {}", g(r)),
        None => println!("R0 (chord)             = unbounded (delta = 0)"),
    }
    if let Some(r) = basic_r0 {
        println!("R0 (uniform)           = {}", g(r));
    }
    println!(
        "threshold verdict      = {}",
        if epidemic { "epidemic" } else { "no epidemic" }
    );
    println!("final size P_inf/N     = {}", g(fraction));
    println!("final size P_inf       = {} devices (N = {})", g(fraction * population), population);

    if let Some(dir) = &args.out {
        create_out(dir)?;
        let path = dir.join("analytic.csv");
        let rows = vec![
            vec!["contact_rate".into(), num(cr), "/day".into()],
            vec!["beta_basic".into(), num(bb), "/day".into()],
            vec!["beta_chord".into(), num(bc), "/day".into()],
            vec!["critical_density".into(), rho_c.map(num).unwrap_or_default(), "/m^2".into()],
            vec!["r0_chord".into(), chord_r0.map(num).unwrap_or_default(), "".into()],
            vec!["final_fraction".into(), num(fraction), "".into()],
        ];
        write_csv_table(&path, &["quantity", "value", "unit"], rows)?;
    }
    Ok(())
}

fn cmd_simulate(args: &CommonArgs) -> CliResult<()> {
    let (params, hash) = args.params()?;
    let seed = resolve_seed(args.seed, params.seed.as_ref(), "seed")?;
    let config = SimConfig {
        seed,
        ..params.to_sim_config()?
    };
    print_warnings(&config)?;
    let out = args.out_dir();
    create_out(&out)?;
    let output = run_simulation(&config)?;

    let series_path = out.join("series.csv");
    let events_path = out.join("events.csv");
    output.series.write_csv(fs::File::create(&series_path)?)?;
    output.write_events_csv(fs::File::create(&events_path)?)?;

    let mut manifest = RunManifest::new("simulate", ParamFile::from_sim_config(&config), hash);
    manifest.seeds = vec![seed.to_string()];
    manifest.outputs = vec![file_name(&series_path), file_name(&events_path)];
    manifest.write(&out.join("manifest.toml"))?;

    let (_, last) = output.series.last().expect("series has the initial sample");
    println!(
        "simulated {} days: S = {}, I = {}, P = {}; {} infections, {} contact entries; wrote {}",
        config.t_end,
        last.s,
        last.i,
        last.p_rec,
        output.infection_events.len(),
        output.contact_entries,
        out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct Summary<'a, T: Serialize> {
    experiment: &'a str,
    seed_base: String,
    runs: usize,
    result: T,
}

fn write_summary<T: Serialize>(path: &Path, summary: &Summary<'_, T>) -> CliResult<()> {
    let text = toml::to_string(summary).map_err(|e| Failure::Runtime(format!("summary: {e}")))?;
    fs::write(path, text)?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn cmd_experiment(name: ExperimentName, args: &CommonArgs) -> CliResult<()> {
    let (mut params, hash) = args.params()?;
    let label = name.label();
    let seed_base = resolve_seed(args.seed, params.seed_base.as_ref(), "seed base")?;
    let runs = args.runs.or(params.runs).unwrap_or(10);
    let parallelism = args
        .parallel
        .or(params.parallelism)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if runs == 0 {
        return Err(Failure::Usage("--runs must be at least 1".into()));
    }
    if parallelism == 0 {
        return Err(Failure::Usage("--parallel must be at least 1".into()));
    }

    let mut config = params.to_sim_config()?;
    config.seed = 0;
    print_warnings(&config)?;

    // Experiment-specific inputs, resolved before anything runs.
    let radii = if name == ExperimentName::Rsweep {
        let radii = params.radii_m()?.unwrap_or_else(|| vec![10.0, 20.0, 40.0]);
        if radii.is_empty() {
            return Err(Failure::Usage("rsweep needs at least one radius; the radii list is empty".into()));
        }
        params.radii = Some(radii.iter().map(|&r| format_quantity(r, Dimension::Length)).collect());
        radii
    } else {
        Vec::new()
    };
    let factors = if name == ExperimentName::Threshold {
        let factors = params.density_factors.clone().unwrap_or_else(|| vec![0.5, 1.0, 1.5, 2.0, 3.0]);
        if factors.is_empty() {
            return Err(Failure::Usage("threshold needs at least one density factor".into()));
        }
        params.density_factors = Some(factors.clone());
        factors
    } else {
        Vec::new()
    };
    let t_obs = if name == ExperimentName::ContactRate {
        let t = params.t_obs_days()?.unwrap_or(1.0);
        params.t_obs = Some(format_quantity(t, Dimension::Time));
        t
    } else {
        0.0
    };

    let mut canonical = ParamFile::from_sim_config(&config);
    canonical.seed = None;
    canonical.runs = Some(runs);
    canonical.seed_base = Some(seed_base.into());
    canonical.radii = params.radii.clone();
    canonical.density_factors = params.density_factors.clone();
    canonical.t_obs = params.t_obs.clone();
    let stem = experiment_stem(label, &canonical, seed_base);
    canonical.parallelism = Some(parallelism);

    let out = args.out_dir();
    create_out(&out)?;
    let spec = EnsembleSpec::new(config.clone(), runs, seed_base).with_parallelism(parallelism);
    let path = |suffix: &str| out.join(format!("{stem}_{suffix}"));
    let mut outputs = Vec::new();
    let summary_path = path("summary.toml");

    match name {
        ExperimentName::Compare => {
            let (metrics, curves) = compare_with_curves(&spec)?;
            let table = path("curves.csv");
            let rows = curves
                .times
                .iter()
                .zip(&curves.sim_mean)
                .zip(&curves.ode)
                .map(|((t, s), o)| vec![num(*t), num(*s), num(*o)]);
            write_csv_table(&table, &["t", "i_sim_mean", "i_ode"], rows)?;
            outputs.push(file_name(&table));
            println!(
                "compare: linf {:.4}, peak time err {:.4}, peak height err {:.4}, {} of {} runs took off",
                metrics.linf_norm, metrics.peak_time_err, metrics.peak_height_err, metrics.outbreaks, metrics.runs
            );
            write_summary(&summary_path, &Summary { experiment: label, seed_base: seed_base.to_string(), runs, result: metrics })?;
        }
        ExperimentName::Rsweep => {
            let table = r_sweep(&spec, &radii)?;
            let csv = path("table.csv");
            let rows = table.rows.iter().map(|row| {
                let m = row.metrics.as_ref();
                vec![
                    num(row.radius),
                    opt(m.map(|m| m.linf_norm)),
                    opt(m.map(|m| m.t_peak_sim)),
                    opt(m.map(|m| m.t_peak_ode)),
                    opt(m.map(|m| m.peak_height_err)),
                    opt(m.and_then(|m| m.growth_rate_sim)),
                    opt(m.map(|m| m.beta_model)),
                    row.diagnostic.clone().unwrap_or_default(),
                ]
            });
            write_csv_table(
                &csv,
                &["radius_m", "linf_norm", "t_peak_sim", "t_peak_ode", "peak_height_err", "growth_rate", "beta", "diagnostic"],
                rows,
            )?;
            outputs.push(file_name(&csv));
            for row in &table.rows {
                match (&row.metrics, &row.diagnostic) {
                    (Some(m), _) => println!(
                        "R = {} m: linf {:.4}, peak at {:.3} d (ODE {:.3} d), growth {:?}",
                        row.radius, m.linf_norm, m.t_peak_sim, m.t_peak_ode, m.growth_rate_sim
                    ),
                    (None, Some(d)) => println!("R = {} m: skipped ({d})", row.radius),
                    (None, None) => println!("R = {} m: no result", row.radius),
                }
            }
            write_summary(&summary_path, &Summary { experiment: label, seed_base: seed_base.to_string(), runs, result: table })?;
        }
        ExperimentName::Threshold => {
            let table = threshold_scan(&spec, &factors)?;
            let csv = path("table.csv");
            let rows = table.rows.iter().map(|r| {
                vec![
                    num(r.factor),
                    num(r.rho),
                    r.runs.to_string(),
                    r.outbreaks.to_string(),
                    num(r.outbreak_probability),
                    opt(r.mean_final_fraction),
                    num(r.mean_final_fraction_all),
                    num(r.theory_fraction),
                ]
            });
            write_csv_table(
                &csv,
                &[
                    "density_factor",
                    "density_per_m2",
                    "runs",
                    "outbreaks",
                    "outbreak_probability",
                    "mean_final_fraction",
                    "mean_final_fraction_all",
                    "predicted_final_fraction",
                ],
                rows,
            )?;
            outputs.push(file_name(&csv));
            for r in &table.rows {
                println!(
                    "{:.2} x critical density: outbreak probability {:.2} ({} of {}), final fraction {:?} (predicted {:.4})",
                    r.factor, r.outbreak_probability, r.outbreaks, r.runs, r.mean_final_fraction, r.theory_fraction
                );
            }
            write_summary(&summary_path, &Summary { experiment: label, seed_base: seed_base.to_string(), runs, result: table })?;
        }
        ExperimentName::ProfileRatio => {
            let ratio = profile_ratio_experiment(&spec)?;
            println!(
                "growth-rate ratio chord/uniform {:?} (expected {:.4}); per-entry acceptance {:?} over {} entries",
                ratio.ratio, ratio.expected, ratio.acceptance_ratio, ratio.entry_trials
            );
            write_summary(&summary_path, &Summary { experiment: label, seed_base: seed_base.to_string(), runs, result: ratio })?;
        }
        ExperimentName::ContactRate => {
            let cfg = SimConfig {
                seed: seed_base,
                ..config.clone()
            };
            let stats = measure_contact_rate(&cfg, t_obs)?;
            let theory = 8.0 * cfg.radius * cfg.rho * cfg.speed.mean() / std::f64::consts::PI;
            let hist = impact_histogram(&cfg, t_obs, 20)?;
            let csv = path("impacts.csv");
            let width = cfg.radius / hist.counts.len() as f64;
            let rows = hist
                .counts
                .iter()
                .enumerate()
                .map(|(k, c)| vec![num(k as f64 * width), num((k + 1) as f64 * width), c.to_string()]);
            write_csv_table(&csv, &["impact_lo_m", "impact_hi_m", "count"], rows)?;
            outputs.push(file_name(&csv));
            println!(
                "empirical contact rate {:.3} +/- {:.3} /day (95% CI) vs kinetic prediction {:.3} /day; relative difference {:.4}",
                stats.mean_rate,
                stats.ci_half_width,
                theory,
                (stats.mean_rate - theory) / theory
            );
            if matches!(cfg.speed, SpeedModel::MaxwellBoltzmann2D { .. }) {
                println!(
                    "note: for isotropic Gaussian velocities the mean relative speed is sqrt(2) times the mean speed, \
                     giving {:.3} /day",
                    2.0 * std::f64::consts::SQRT_2 * cfg.radius * cfg.rho * cfg.speed.mean()
                );
            }
            #[derive(Serialize)]
            struct ContactReport {
                stats: wormsim::abm::ContactStats,
                predicted_rate: f64,
                chi_square_uniform: f64,
                impact_bins: usize,
            }
            let report = ContactReport {
                stats,
                predicted_rate: theory,
                chi_square_uniform: hist.chi_square_uniform(),
                impact_bins: hist.counts.len(),
            };
            write_summary(&summary_path, &Summary { experiment: label, seed_base: seed_base.to_string(), runs: 1, result: report })?;
        }
    }
    outputs.push(file_name(&summary_path));

    let mut manifest = RunManifest::new(&format!("experiment {label}"), canonical, hash);
    manifest.seeds = vec![seed_base.to_string()];
    manifest.outputs = outputs;
    manifest.write(&path("manifest.toml"))?;
    println!("wrote {}/{stem}_*", out.display());
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::Analytic(args) => cmd_analytic(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Experiment { name, common } => cmd_experiment(*name, common),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
