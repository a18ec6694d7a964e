//! On-disk formats: unit-tagged parameter files, run manifests and CSV tables.
//!
//! Parameter files are flat TOML with explicit units on every dimensional
//! value, for example
//!
//! ```toml
//! n = 10000
//! density = "3000 /km^2"
//! radius = "5 m"
//! speed = "2 km/day"
//! speed_model = "constant"
//! p = 0.1
//! delta = "1 /day"
//! profile = "uniform"
//! t_end = "20 day"
//! seed = 7
//! ```
//!
//! A manifest carries the same table under `[config]`, so a manifest can be
//! fed back in as a parameter file.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::abm::{default_dt, NeighborSearch, Profile, SimConfig};
use crate::error::{Error, Result};
use crate::kinetics::SpeedModel;
use crate::units::{format_quantity, parse_quantity, Dimension};

/// Version of the CSV column layouts written by this crate.
pub const CSV_SCHEMA_VERSION: u32 = 1;

/// A seed as written in a file: an integer, or a decimal string for values
/// beyond the signed 64-bit range TOML integers allow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedValue {
    Int(i64),
    Text(String),
}

impl SeedValue {
    pub fn value(&self) -> Result<u64> {
        match self {
            SeedValue::Int(v) => u64::try_from(*v)
                .map_err(|_| Error::Parse(format!("seed must be nonnegative, got {v}"))),
            SeedValue::Text(s) => s
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("seed `{s}` is not an unsigned 64-bit integer"))),
        }
    }
}

impl From<u64> for SeedValue {
    fn from(v: u64) -> Self {
        SeedValue::Text(v.to_string())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub speed: Option<String>,
    /// `constant` or `maxwell-boltzmann`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub speed_model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<Profile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<SeedValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_infected: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub neighbor_search: Option<NeighborSearch>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub runs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_base: Option<SeedValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parallelism: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density_factors: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_obs: Option<String>,
    /// Population size used for final-size figures in analytic reports.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub population: Option<f64>,
}

macro_rules! merge_fields {
    ($dst:ident, $src:ident, $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f; } )*
    };
}

fn quantity(value: &Option<String>, dim: Dimension, key: &str) -> Result<Option<f64>> {
    value
        .as_deref()
        .map(|text| parse_quantity(text, dim).map_err(|e| Error::Unit(format!("{key}: {e}"))))
        .transpose()
}

impl ParamFile {
    /// Parses a parameter file or a manifest (whose `[config]` table is used).
    pub fn parse(text: &str) -> Result<Self> {
        let value: toml::Table = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if value.contains_key("config") {
            let manifest: RunManifest = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
            return Ok(manifest.config);
        }
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = fs::read_to_string(path)?;
        let parsed = Self::parse(&text)?;
        Ok((parsed, sha256_hex(text.as_bytes())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("parameter files always serialize")
    }

    /// Fields set in `overrides` replace those in `self`.
    pub fn merged(mut self, overrides: ParamFile) -> Self {
        let o = overrides;
        merge_fields!(
            self, o, n, density, radius, speed, speed_model, p, delta, profile, dt, t_end, seed,
            initial_infected, neighbor_search, runs, seed_base, parallelism, radii,
            density_factors, t_obs, population
        );
        self
    }

    pub fn speed_model(&self, default: SpeedModel) -> Result<SpeedModel> {
        let mean = quantity(&self.speed, Dimension::Speed, "speed")?.unwrap_or(default.mean());
        let kind = self.speed_model.as_deref().map(str::to_ascii_lowercase);
        match kind.as_deref() {
            None => Ok(match default {
                SpeedModel::Constant(_) => SpeedModel::Constant(mean),
                SpeedModel::MaxwellBoltzmann2D { .. } => SpeedModel::MaxwellBoltzmann2D { mean },
            }),
            Some("constant") => Ok(SpeedModel::Constant(mean)),
            Some("maxwell-boltzmann" | "maxwell_boltzmann" | "rayleigh") => {
                Ok(SpeedModel::MaxwellBoltzmann2D { mean })
            }
            Some(other) => Err(Error::Parse(format!(
                "speed_model `{other}` is unknown (use `constant` or `maxwell-boltzmann`)"
            ))),
        }
    }

    /// Resolves against the urban defaults. A missing `dt` becomes
    /// R/(8·mean speed); a missing seed becomes 0.
    pub fn to_sim_config(&self) -> Result<SimConfig> {
        let d = SimConfig::urban_default();
        let radius = quantity(&self.radius, Dimension::Length, "radius")?.unwrap_or(d.radius);
        let speed = self.speed_model(d.speed)?;
        let dt = quantity(&self.dt, Dimension::Time, "dt")?.unwrap_or_else(|| default_dt(radius, &speed));
        Ok(SimConfig {
            n: self.n.unwrap_or(d.n),
            rho: quantity(&self.density, Dimension::Density, "density")?.unwrap_or(d.rho),
            radius,
            p: self.p.unwrap_or(d.p),
            delta: quantity(&self.delta, Dimension::Rate, "delta")?.unwrap_or(d.delta),
            speed,
            profile: self.profile.unwrap_or(d.profile),
            dt,
            t_end: quantity(&self.t_end, Dimension::Time, "t_end")?.unwrap_or(d.t_end),
            seed: self.seed.as_ref().map(SeedValue::value).transpose()?.unwrap_or(0),
            initial_infected: self.initial_infected.unwrap_or(d.initial_infected),
            neighbor_search: self.neighbor_search.unwrap_or_default(),
        })
    }

    /// Canonical, fully specified file for `config` in internal units.
    pub fn from_sim_config(config: &SimConfig) -> Self {
        let (model, mean) = match config.speed {
            SpeedModel::Constant(v) => ("constant", v),
            SpeedModel::MaxwellBoltzmann2D { mean } => ("maxwell-boltzmann", mean),
        };
        Self {
            n: Some(config.n),
            density: Some(format_quantity(config.rho, Dimension::Density)),
            radius: Some(format_quantity(config.radius, Dimension::Length)),
            speed: Some(format_quantity(mean, Dimension::Speed)),
            speed_model: Some(model.into()),
            p: Some(config.p),
            delta: Some(format_quantity(config.delta, Dimension::Rate)),
            profile: Some(config.profile),
            dt: Some(format_quantity(config.dt, Dimension::Time)),
            t_end: Some(format_quantity(config.t_end, Dimension::Time)),
            seed: Some(config.seed.into()),
            initial_infected: Some(config.initial_infected),
            neighbor_search: Some(config.neighbor_search),
            ..Self::default()
        }
    }

    pub fn radii_m(&self) -> Result<Option<Vec<f64>>> {
        self.radii
            .as_ref()
            .map(|rs| {
                rs.iter()
                    .map(|r| parse_quantity(r, Dimension::Length))
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()
    }

    pub fn t_obs_days(&self) -> Result<Option<f64>> {
        quantity(&self.t_obs, Dimension::Time, "t_obs")
    }
}

/// Everything needed to reproduce a set of outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub csv_schema: u32,
    pub timestamp_unix: u64,
    /// sha256 of the input parameter file, or "none".
    pub input_hash: String,
    pub seeds: Vec<String>,
    pub outputs: Vec<String>,
    pub config: ParamFile,
}

impl RunManifest {
    pub fn new(command: &str, config: ParamFile, input_hash: Option<String>) -> Self {
        let timestamp_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            tool: "wormsim".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            csv_schema: CSV_SCHEMA_VERSION,
            timestamp_unix,
            input_hash: input_hash.unwrap_or_else(|| "none".into()),
            seeds: Vec::new(),
            outputs: Vec::new(),
            config,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))?;
        fs::write(path, text)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Parse(e.to_string()))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Short hash used in experiment output names.
pub fn params_hash(params: &ParamFile) -> String {
    sha256_hex(params.to_toml().as_bytes())[..12].to_string()
}

/// `<name>_<hash>_<seed_base>`
pub fn experiment_stem(name: &str, params: &ParamFile, seed_base: u64) -> String {
    format!("{name}_{}_{seed_base}", params_hash(params))
}

pub fn write_csv_table<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut csv = csv::Writer::from_path(path)?;
    csv.write_record(header)?;
    for row in rows {
        csv.write_record(row)?;
    }
    csv.flush()?;
    Ok(())
}

/// Formats a float so that it parses back to the same value.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}
