//! Event-ordered stepping of the moving-agent worm model.
//!
//! Within a step every susceptible–infective pair that crosses into contact
//! range is found exactly (quadratic crossing time), and the resulting entry
//! events are processed in time order. Each entry gets one Bernoulli
//! transmission trial. A device infected part-way through a step immediately
//! becomes a source for the rest of that step: susceptibles already inside
//! its radius get a trial at the infection instant, and later crossings are
//! queued like any other entry.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::agent::{init_population, Health, Population};
use super::config::{NeighborSearch, SimConfig};
use super::geometry::{detect_entry, Vec2};
use super::grid::CellGrid;
use crate::error::Result;
use crate::ode::{SirSeries, SirState};
use crate::rng::{rng_from_seed, SimRng};

/// An open contact between two agents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairEpisode {
    pub ids: (u32, u32),
    pub t_entry: f64,
    /// Closest-approach distance predicted at entry, m.
    pub impact: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfectionEvent {
    pub t: f64,
    pub source: u32,
    pub target: u32,
    /// m
    pub impact: f64,
}

/// Column header of the infection-event CSV.
pub const EVENTS_CSV_HEADER: [&str; 4] = ["t", "source", "target", "impact_m"];

/// Transmission trials split by what triggered them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TrialStats {
    /// Trials at radius-crossing entries.
    pub entry_trials: u64,
    pub entry_successes: u64,
    /// Trials for susceptibles already in range when their neighbour became infected.
    pub in_range_trials: u64,
    pub in_range_successes: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SimOutput {
    pub series: SirSeries,
    pub infection_events: Vec<InfectionEvent>,
    /// Susceptible–infective radius entries observed.
    pub contact_entries: u64,
    pub trials: TrialStats,
}

impl SimOutput {
    pub fn write_events_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        csv.write_record(EVENTS_CSV_HEADER)?;
        for ev in &self.infection_events {
            csv.write_record([
                format!("{:?}", ev.t),
                ev.source.to_string(),
                ev.target.to_string(),
                format!("{:?}", ev.impact),
            ])?;
        }
        csv.flush()?;
        Ok(())
    }

    /// Devices ever infected by the end of the run (including index cases).
    pub fn ever_infected(&self) -> f64 {
        self.series
            .last()
            .map(|(_, st)| st.i + st.p_rec)
            .unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Trigger {
    Entry,
    InRange,
}

#[derive(Debug, Clone, Copy)]
struct Pending {
    /// Offset into the current step.
    t: f64,
    source: u32,
    target: u32,
    impact: f64,
    trigger: Trigger,
}

impl Pending {
    fn key(&self) -> (u32, u32) {
        ordered(self.source, self.target)
    }
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        self.t
            .total_cmp(&other.t)
            .then_with(|| self.key().cmp(&other.key()))
            .then_with(|| self.source.cmp(&other.source))
            .then_with(|| self.trigger.cmp(&other.trigger))
    }
}

fn ordered(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn pair_key(a: u32, b: u32) -> u64 {
    let (lo, hi) = ordered(a, b);
    (u64::from(lo) << 32) | u64::from(hi)
}

pub struct Simulation {
    config: SimConfig,
    pop: Population,
    rng: SimRng,
    steps_done: usize,
    episodes: HashMap<u64, PairEpisode>,
    grid: CellGrid,
    queue: BinaryHeap<Reverse<Pending>>,
    counts: [usize; 3],
    output: SimOutput,
    scratch: Vec<u32>,
    infected_now: Vec<u32>,
}

impl Simulation {
    /// Seeds the RNG from `config.seed` and draws the initial population.
    pub fn new(config: SimConfig) -> Result<Self> {
        let mut rng = rng_from_seed(config.seed);
        let pop = init_population(&config, &mut rng)?;
        Ok(Self::from_population(config, pop, rng))
    }

    /// Starts from an explicit population and RNG state.
    pub fn from_population(config: SimConfig, pop: Population, rng: SimRng) -> Self {
        let side = pop.side();
        let reach = config.radius + 2.0 * pop.max_speed() * config.dt;
        let spacing = side / (pop.agents.len() as f64).sqrt().floor().max(1.0);
        let grid = CellGrid::new(side, reach.max(spacing));
        let mut counts = [0usize; 3];
        for a in &pop.agents {
            counts[slot(a.state)] += 1;
        }
        let mut sim = Self {
            output: SimOutput {
                series: SirSeries::with_capacity(config.steps() + 1),
                ..SimOutput::default()
            },
            config,
            pop,
            rng,
            steps_done: 0,
            episodes: HashMap::new(),
            grid,
            queue: BinaryHeap::new(),
            counts,
            scratch: Vec::new(),
            infected_now: Vec::new(),
        };
        sim.seed_initial_contacts();
        sim.record(0.0);
        sim
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn population(&self) -> &Population {
        &self.pop
    }

    pub fn time(&self) -> f64 {
        self.steps_done as f64 * self.config.dt
    }

    pub fn open_episodes(&self) -> impl Iterator<Item = &PairEpisode> {
        self.episodes.values()
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        (self.counts[0], self.counts[1], self.counts[2])
    }

    pub fn output(&self) -> &SimOutput {
        &self.output
    }

    fn record(&mut self, t: f64) {
        let [s, i, p] = self.counts;
        self.output
            .series
            .push(t, SirState::new(s as f64, i as f64, p as f64));
    }

    /// Pairs already within range at t = 0 that involve an index case get a
    /// trial at t = 0.
    fn seed_initial_contacts(&mut self) {
        self.rebuild_susceptible_grid();
        let r2 = self.config.radius * self.config.radius;
        let mut near = std::mem::take(&mut self.scratch);
        for src in self.collect_infected() {
            let here = self.pop.agents[src as usize].pos;
            near.clear();
            self.gather(here, &mut near);
            for &c in &near {
                let other = &self.pop.agents[c as usize];
                if other.state != Health::Susceptible {
                    continue;
                }
                let d2 = self.pop.torus.min_image(other.pos - here).norm_sq();
                let key = pair_key(src, c);
                if d2 <= r2 && !self.episodes.contains_key(&key) {
                    let impact = d2.sqrt();
                    self.episodes.insert(key, PairEpisode { ids: ordered(src, c), t_entry: 0.0, impact });
                    self.queue.push(Reverse(Pending {
                        t: 0.0,
                        source: src,
                        target: c,
                        impact,
                        trigger: Trigger::InRange,
                    }));
                }
            }
        }
        self.scratch = near;
        self.process_queue(0.0, 0.0);
    }

    fn collect_infected(&mut self) -> Vec<u32> {
        let mut ids = std::mem::take(&mut self.infected_now);
        ids.clear();
        ids.extend(
            self.pop
                .agents
                .iter()
                .filter(|a| a.state == Health::Infected)
                .map(|a| a.id),
        );
        ids
    }

    fn rebuild_susceptible_grid(&mut self) {
        if self.config.neighbor_search == NeighborSearch::Grid {
            let agents = &self.pop.agents;
            self.grid.rebuild(
                agents
                    .iter()
                    .filter(|a| a.state == Health::Susceptible)
                    .map(|a| (a.id, a.pos)),
            );
        }
    }

    /// Candidate partners near `pos` (positions as of the step start).
    fn gather(&self, pos: Vec2, out: &mut Vec<u32>) {
        match self.config.neighbor_search {
            NeighborSearch::Grid => self.grid.for_each_near(pos, |id| out.push(id)),
            NeighborSearch::BruteForce => out.extend(0..self.pop.agents.len() as u32),
        }
    }

    /// Advances one step of length `dt`.
    pub fn step(&mut self) {
        let dt = self.config.dt;
        let t0 = self.time();
        let infected = self.collect_infected();

        if !infected.is_empty() {
            self.rebuild_susceptible_grid();
            let mut near = std::mem::take(&mut self.scratch);
            for &src in &infected {
                let a = &self.pop.agents[src as usize];
                near.clear();
                self.gather(a.pos, &mut near);
                for &c in &near {
                    let b = &self.pop.agents[c as usize];
                    if b.state != Health::Susceptible {
                        continue;
                    }
                    let rel = self.pop.torus.min_image(b.pos - a.pos);
                    let Some(hit) = detect_entry(rel, b.vel - a.vel, self.config.radius, dt) else {
                        continue;
                    };
                    if !self.episodes.contains_key(&pair_key(src, c)) {
                        self.queue.push(Reverse(Pending {
                            t: hit.t,
                            source: src,
                            target: c,
                            impact: hit.impact,
                            trigger: Trigger::Entry,
                        }));
                    }
                }
            }
            self.scratch = near;
            self.process_queue(t0, dt);
        }

        let torus = self.pop.torus;
        for a in &mut self.pop.agents {
            a.pos = torus.wrap(a.pos + a.vel * dt);
        }
        let r2 = self.config.radius * self.config.radius;
        let agents = &self.pop.agents;
        self.episodes.retain(|_, ep| {
            let (a, b) = ep.ids;
            torus
                .min_image(agents[b as usize].pos - agents[a as usize].pos)
                .norm_sq()
                <= r2
        });

        self.steps_done += 1;
        let t1 = self.time();
        let recover = -(-self.config.delta * dt).exp_m1();
        if recover > 0.0 {
            for &id in &infected {
                if self.rng.random::<f64>() < recover {
                    let a = &mut self.pop.agents[id as usize];
                    a.state = Health::Patched;
                    a.t_state = t1;
                    self.counts[1] -= 1;
                    self.counts[2] += 1;
                }
            }
        }
        self.infected_now = infected;
        self.record(t1);
    }

    fn process_queue(&mut self, t0: f64, window: f64) {
        let radius = self.config.radius;
        while let Some(Reverse(ev)) = self.queue.pop() {
            let key = pair_key(ev.source, ev.target);
            if ev.trigger == Trigger::Entry {
                if self.episodes.contains_key(&key) {
                    continue;
                }
                self.episodes.insert(
                    key,
                    PairEpisode {
                        ids: ev.key(),
                        t_entry: t0 + ev.t,
                        impact: ev.impact,
                    },
                );
                self.output.contact_entries += 1;
            }
            let src = &self.pop.agents[ev.source as usize];
            let dst = &self.pop.agents[ev.target as usize];
            if src.state != Health::Infected || dst.state != Health::Susceptible {
                continue;
            }
            let prob = self.config.profile.probability(self.config.p, ev.impact, radius);
            let hit = self.rng.random::<f64>() < prob;
            let stats = &mut self.output.trials;
            match ev.trigger {
                Trigger::Entry => {
                    stats.entry_trials += 1;
                    stats.entry_successes += u64::from(hit);
                }
                Trigger::InRange => {
                    stats.in_range_trials += 1;
                    stats.in_range_successes += u64::from(hit);
                }
            }
            if hit {
                self.infect(ev, t0, window);
            }
        }
    }

    fn infect(&mut self, ev: Pending, t0: f64, window: f64) {
        let tau = ev.t;
        let target = ev.target;
        {
            let a = &mut self.pop.agents[target as usize];
            a.state = Health::Infected;
            a.t_state = t0 + tau;
        }
        self.counts[0] -= 1;
        self.counts[1] += 1;
        self.output.infection_events.push(InfectionEvent {
            t: t0 + tau,
            source: ev.source,
            target,
            impact: ev.impact,
        });

        let radius = self.config.radius;
        let me = &self.pop.agents[target as usize];
        let (start, vel) = (me.pos, me.vel);
        let here = start + vel * tau;
        let mut near = std::mem::take(&mut self.scratch);
        near.clear();
        self.gather(start, &mut near);
        for &c in &near {
            let other = &self.pop.agents[c as usize];
            if c == target || other.state != Health::Susceptible {
                continue;
            }
            let key = pair_key(target, c);
            if self.episodes.contains_key(&key) {
                continue;
            }
            let rel = self.pop.torus.min_image(other.pos + other.vel * tau - here);
            let d2 = rel.norm_sq();
            if d2 <= radius * radius {
                let impact = d2.sqrt();
                self.episodes.insert(
                    key,
                    PairEpisode {
                        ids: ordered(target, c),
                        t_entry: t0 + tau,
                        impact,
                    },
                );
                self.queue.push(Reverse(Pending {
                    t: tau,
                    source: target,
                    target: c,
                    impact,
                    trigger: Trigger::InRange,
                }));
            } else if let Some(hit) = detect_entry(rel, other.vel - vel, radius, window - tau) {
                self.queue.push(Reverse(Pending {
                    t: tau + hit.t,
                    source: target,
                    target: c,
                    impact: hit.impact,
                    trigger: Trigger::Entry,
                }));
            }
        }
        self.scratch = near;
    }

    /// Steps until `t_end`. Once no infective remains nothing can change, so
    /// the remaining samples are filled with the final counts.
    pub fn run(mut self) -> SimOutput {
        let steps = self.config.steps();
        while self.steps_done < steps {
            if self.counts[1] == 0 {
                while self.steps_done < steps {
                    self.steps_done += 1;
                    let t = self.time();
                    self.record(t);
                }
                break;
            }
            self.step();
        }
        self.output
    }
}

fn slot(state: Health) -> usize {
    match state {
        Health::Susceptible => 0,
        Health::Infected => 1,
        Health::Patched => 2,
    }
}

/// Draws a population from `config.seed` and runs it to `config.t_end`.
pub fn run_simulation(config: &SimConfig) -> Result<SimOutput> {
    Ok(Simulation::new(config.clone())?.run())
}
