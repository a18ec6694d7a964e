//! Contact counting with transmission switched off.

use serde::{Deserialize, Serialize};

use super::agent::init_population;
use super::config::{NeighborSearch, SimConfig};
use super::geometry::detect_entry;
use super::grid::CellGrid;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// One radius crossing between any two agents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactEntry {
    pub t: f64,
    pub a: u32,
    pub b: u32,
    pub impact: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactScan {
    pub n: usize,
    /// Observation time actually covered (whole steps), days.
    pub t_obs: f64,
    pub entries: Vec<ContactEntry>,
}

/// Empirical contact rate per agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactStats {
    /// Mean entries per agent per day.
    pub mean_rate: f64,
    /// 95% confidence half-width from the across-agent spread.
    pub ci_half_width: f64,
    pub agents: usize,
    pub t_obs: f64,
    pub entries: u64,
}

/// Records every pair entry over `t_obs` days. Infection states and `p` are
/// ignored; only motion matters.
pub fn scan_entries(config: &SimConfig, t_obs: f64) -> Result<ContactScan> {
    if !(t_obs > 0.0 && t_obs.is_finite()) {
        return Err(Error::domain("scan_entries", format!("t_obs must be positive, got {t_obs}")));
    }
    let mut rng = rng_from_seed(config.seed);
    let mut pop = init_population(config, &mut rng)?;
    let dt = config.dt;
    let radius = config.radius;
    let steps = (t_obs / dt - 1e-9).ceil() as usize;
    let torus = pop.torus;
    let n = pop.agents.len();
    let reach = radius + 2.0 * pop.max_speed() * dt;
    let spacing = pop.side() / (n as f64).sqrt().floor().max(1.0);
    let mut grid = CellGrid::new(pop.side(), reach.max(spacing));
    let mut entries = Vec::new();
    let mut batch = Vec::new();

    for k in 0..steps {
        let t0 = k as f64 * dt;
        let agents = &pop.agents;
        let mut check = |a: u32, b: u32| {
            let (pa, pb) = (&agents[a as usize], &agents[b as usize]);
            let rel = torus.min_image(pb.pos - pa.pos);
            if let Some(hit) = detect_entry(rel, pb.vel - pa.vel, radius, dt) {
                batch.push(ContactEntry {
                    t: t0 + hit.t,
                    a,
                    b,
                    impact: hit.impact,
                });
            }
        };
        match config.neighbor_search {
            NeighborSearch::Grid => {
                grid.rebuild(agents.iter().map(|a| (a.id, a.pos)));
                for cell in 0..grid.num_cells() {
                    let here = grid.cell(cell);
                    if here.is_empty() {
                        continue;
                    }
                    for nb in grid.stencil(cell) {
                        let there = grid.cell(nb);
                        for &a in here {
                            for &b in there {
                                if b > a {
                                    check(a, b);
                                }
                            }
                        }
                    }
                }
            }
            NeighborSearch::BruteForce => {
                for a in 0..n as u32 {
                    for b in a + 1..n as u32 {
                        check(a, b);
                    }
                }
            }
        }
        batch.sort_by(|x, y| x.t.total_cmp(&y.t).then((x.a, x.b).cmp(&(y.a, y.b))));
        entries.append(&mut batch);
        for a in &mut pop.agents {
            a.pos = torus.wrap(a.pos + a.vel * dt);
        }
    }
    Ok(ContactScan {
        n,
        t_obs: steps as f64 * dt,
        entries,
    })
}

impl ContactScan {
    pub fn stats(&self) -> ContactStats {
        let mut per_agent = vec![0u32; self.n];
        for e in &self.entries {
            per_agent[e.a as usize] += 1;
            per_agent[e.b as usize] += 1;
        }
        let n = self.n as f64;
        let rates = per_agent.iter().map(|&c| f64::from(c) / self.t_obs);
        let mean = rates.clone().sum::<f64>() / n;
        let half = if self.n > 1 {
            let var = rates.map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
            1.96 * (var / n).sqrt()
        } else {
            0.0
        };
        ContactStats {
            mean_rate: mean,
            ci_half_width: half,
            agents: self.n,
            t_obs: self.t_obs,
            entries: self.entries.len() as u64,
        }
    }

    pub fn impacts(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.impact)
    }
}

/// Mean entry rate per agent with a 95% confidence half-width.
pub fn measure_contact_rate(config: &SimConfig, t_obs: f64) -> Result<ContactStats> {
    Ok(scan_entries(config, t_obs)?.stats())
}

/// Equal-width histogram of closest-approach distances on [0, radius].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactHistogram {
    pub radius: f64,
    pub counts: Vec<u64>,
}

impl ImpactHistogram {
    pub fn from_impacts(radius: f64, bins: usize, impacts: impl IntoIterator<Item = f64>) -> Self {
        let mut counts = vec![0u64; bins.max(1)];
        let nb = counts.len();
        for r in impacts {
            let k = ((r / radius * nb as f64) as usize).min(nb - 1);
            counts[k] += 1;
        }
        Self { radius, counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    /// Pearson χ² statistic against equal expected counts per bin.
    pub fn chi_square_uniform(&self) -> f64 {
        let total = self.total() as f64;
        if total == 0.0 {
            return 0.0;
        }
        let expected = total / self.counts.len() as f64;
        self.counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum()
    }
}

pub fn impact_histogram(config: &SimConfig, t_obs: f64, bins: usize) -> Result<ImpactHistogram> {
    let scan = scan_entries(config, t_obs)?;
    Ok(ImpactHistogram::from_impacts(config.radius, bins, scan.impacts()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::SpeedModel;

    #[test]
    fn single_agent_has_no_contacts() {
        let config = SimConfig {
            n: 1,
            ..SimConfig::urban_default()
        };
        let stats = measure_contact_rate(&config, 0.1).unwrap();
        assert_eq!(stats.mean_rate, 0.0);
        assert_eq!(stats.entries, 0);
    }

    #[test]
    fn frozen_population_has_no_contacts() {
        let config = SimConfig {
            n: 2000,
            speed: SpeedModel::Constant(0.0),
            dt: 0.01,
            ..SimConfig::urban_default()
        };
        let stats = measure_contact_rate(&config, 0.5).unwrap();
        assert_eq!(stats.mean_rate, 0.0);
    }

    #[test]
    fn empty_and_head_on_histograms() {
        let empty = ImpactHistogram::from_impacts(5.0, 10, std::iter::empty());
        assert!(empty.is_empty());
        let head_on = ImpactHistogram::from_impacts(5.0, 10, std::iter::repeat_n(0.0, 100));
        assert_eq!(head_on.counts[0], 100);
        assert!(head_on.counts[1..].iter().all(|&c| c == 0));
        let edge = ImpactHistogram::from_impacts(5.0, 10, [5.0]);
        assert_eq!(edge.counts[9], 1);
    }

    #[test]
    fn nonpositive_window_is_rejected() {
        assert!(scan_entries(&SimConfig::urban_default(), 0.0).is_err());
    }
}
