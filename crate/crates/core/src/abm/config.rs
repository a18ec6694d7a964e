use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};
use crate::kinetics::{mean_spacing, KineticParams, SpeedModel, SPACING_WARN_RATIO};

/// How the per-entry infection probability depends on the impact parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// Probability `p` for every passage within the radius.
    Uniform,
    /// Probability `p·√(R² − r²)/R`, proportional to the chord length.
    Chord,
}

impl Profile {
    pub fn probability(self, p: f64, impact: f64, radius: f64) -> f64 {
        match self {
            Profile::Uniform => p,
            Profile::Chord => {
                let r = impact.min(radius);
                p * (radius * radius - r * r).max(0.0).sqrt() / radius
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Profile::Uniform => "uniform",
            Profile::Chord => "chord",
        }
    }
}

/// Candidate-pair search used for entry detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NeighborSearch {
    #[default]
    Grid,
    /// All pairs; O(n²), for cross-checking the grid.
    BruteForce,
}

/// Full parameterization of one simulation run, in meters and days.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    /// Agents per m².
    pub rho: f64,
    /// Contact radius, m.
    pub radius: f64,
    pub p: f64,
    /// Recovery rate, per day.
    pub delta: f64,
    pub speed: SpeedModel,
    pub profile: Profile,
    /// Step length, days.
    pub dt: f64,
    /// Simulated duration, days.
    pub t_end: f64,
    pub seed: u64,
    pub initial_infected: usize,
    #[serde(default)]
    pub neighbor_search: NeighborSearch,
}

impl SimConfig {
    /// Urban Bluetooth scenario: 3000 devices/km², 2 km/day, R = 5 m,
    /// p = 0.1, δ = 1/day, N = 10⁴, one index case.
    pub fn urban_default() -> Self {
        let speed = SpeedModel::Constant(2000.0);
        let radius = 5.0;
        Self {
            n: 10_000,
            rho: 3e-3,
            radius,
            p: 0.1,
            delta: 1.0,
            speed,
            profile: Profile::Uniform,
            dt: default_dt(radius, &speed),
            t_end: 20.0,
            seed: 1,
            initial_infected: 1,
            neighbor_search: NeighborSearch::Grid,
        }
    }

    /// Side of the square domain, √(n/ρ).
    pub fn side(&self) -> f64 {
        (self.n as f64 / self.rho).sqrt()
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize
    }

    pub fn kinetic_params(&self) -> KineticParams {
        KineticParams {
            rho: self.rho,
            radius: self.radius,
            v_bar: self.speed.mean(),
            p: self.p,
            delta: self.delta,
        }
    }

    /// Checks every invariant; returns advisory warnings on success.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        let push = |bad: &mut Vec<Violation>, field: &'static str, message: String| {
            bad.push(Violation { field, message })
        };

        if self.n == 0 {
            push(&mut bad, "n", "need at least one agent".into());
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            push(&mut bad, "rho", format!("density must be positive, got {}", self.rho));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            push(&mut bad, "radius", format!("radius must be positive, got {}", self.radius));
        }
        if !(0.0..=1.0).contains(&self.p) {
            push(&mut bad, "p", format!("transmission probability must lie in [0, 1], got {}", self.p));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            push(&mut bad, "delta", format!("recovery rate must be nonnegative, got {}", self.delta));
        }
        if let Err(e) = self.speed.validate() {
            push(&mut bad, "speed", e.to_string());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            push(&mut bad, "dt", format!("step must be positive, got {}", self.dt));
        }
        if !(self.t_end >= self.dt && self.t_end.is_finite()) {
            push(&mut bad, "t_end", format!("t_end ({}) must be at least dt ({})", self.t_end, self.dt));
        }
        if self.initial_infected < 1 || self.initial_infected > self.n {
            push(
                &mut bad,
                "initial_infected",
                format!("must lie in [1, n = {}], got {}", self.n, self.initial_infected),
            );
        }
        if bad.is_empty() {
            let side = self.side();
            let reach = self.radius + self.speed.nominal_max() * self.dt;
            if side / 2.0 <= reach {
                push(
                    &mut bad,
                    "side",
                    format!(
                        "domain side L = sqrt(n/rho) = {side:.4} m is too small: the \
                         minimum-image rule needs L/2 > R + v_max*dt = {reach:.4} m"
                    ),
                );
            }
        }
        if !bad.is_empty() {
            return Err(Error::Config(bad));
        }

        let mut warnings = Vec::new();
        let v_max = self.speed.nominal_max();
        if v_max > 0.0 && self.dt > self.radius / (2.0 * v_max) {
            warnings.push(format!(
                "dt = {} day exceeds the recommended R/(2 v_max) = {} day",
                self.dt,
                self.radius / (2.0 * v_max)
            ));
        }
        let spacing = mean_spacing(self.rho)?;
        if self.radius / spacing > SPACING_WARN_RATIO {
            warnings.push(format!(
                "R / mean spacing = {:.3} exceeds {SPACING_WARN_RATIO}; contacts are no longer \
                 mostly pairwise",
                self.radius / spacing
            ));
        }
        Ok(warnings)
    }
}

/// R/(4·v_eff) with v_eff = 2·mean speed.
pub fn default_dt(radius: f64, speed: &SpeedModel) -> f64 {
    let mean = speed.mean();
    if mean > 0.0 {
        radius / (8.0 * mean)
    } else {
        // Nothing moves; the step only paces recovery.
        0.01
    }
}
