use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use super::geometry::{Torus, Vec2};
use crate::error::{Error, Result, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Health {
    Susceptible,
    Infected,
    Patched,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: u32,
    pub pos: Vec2,
    /// Constant for the whole run.
    pub vel: Vec2,
    pub state: Health,
    /// Time of the last state change, days.
    pub t_state: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub torus: Torus,
    pub agents: Vec<Agent>,
}

impl Population {
    pub fn side(&self) -> f64 {
        self.torus.side
    }

    pub fn max_speed(&self) -> f64 {
        self.agents.iter().map(|a| a.vel.norm()).fold(0.0, f64::max)
    }

    pub fn count(&self, state: Health) -> usize {
        self.agents.iter().filter(|a| a.state == state).count()
    }

    /// Shifts every agent by `offset`, wrapping onto the torus.
    pub fn translated(&self, offset: Vec2) -> Self {
        let mut out = self.clone();
        for agent in &mut out.agents {
            agent.pos = out.torus.wrap(agent.pos + offset);
        }
        out
    }
}

/// Places agents uniformly on the torus with isotropic headings and speeds
/// from the configured model, then infects `initial_infected` of them chosen
/// uniformly at random.
pub fn init_population<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Result<Population> {
    config.validate()?;
    let torus = Torus::new(config.side());
    let side = torus.side;
    let mut agents = Vec::with_capacity(config.n);
    for id in 0..config.n {
        let pos = Vec2::new(rng.random_range(0.0..side), rng.random_range(0.0..side));
        let heading = rng.random_range(0.0..TAU);
        let speed = config.speed.sample(rng);
        agents.push(Agent {
            id: id as u32,
            pos,
            vel: Vec2::from_polar(speed, heading),
            state: Health::Susceptible,
            t_state: 0.0,
        });
    }
    for k in rand::seq::index::sample(rng, config.n, config.initial_infected) {
        agents[k].state = Health::Infected;
    }
    let population = Population { torus, agents };

    // The configured check uses a nominal maximum speed; the drawn speeds
    // are what the minimum-image rule actually has to cover.
    let reach = config.radius + population.max_speed() * config.dt;
    if side / 2.0 <= reach {
        return Err(Error::Config(vec![Violation {
            field: "side",
            message: format!(
                "domain side L = {side:.4} m is too small for the sampled speeds: need \
                 L/2 > R + v_max*dt = {reach:.4} m"
            ),
        }]));
    }
    Ok(population)
}
