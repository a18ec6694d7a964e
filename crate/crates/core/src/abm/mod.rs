//! Individual-based simulation of straight-line movers on a periodic square.

mod agent;
mod config;
mod geometry;
mod grid;
mod measure;
mod sim;

pub use agent::{init_population, Agent, Health, Population};
pub use config::{default_dt, NeighborSearch, Profile, SimConfig};
pub use geometry::{detect_entry, Entry, Torus, Vec2};
pub use grid::CellGrid;
pub use measure::{
    impact_histogram, measure_contact_rate, scan_entries, ContactEntry, ContactScan, ContactStats,
    ImpactHistogram,
};
pub use sim::{
    run_simulation, InfectionEvent, PairEpisode, SimOutput, Simulation, TrialStats,
    EVENTS_CSV_HEADER,
};
