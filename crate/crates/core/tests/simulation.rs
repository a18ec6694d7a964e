mod common;

use common::first_inside_substep;
use proptest::prelude::*;
use wormsim::abm::{
    detect_entry, init_population, run_simulation, scan_entries, Health, NeighborSearch, Profile, SimConfig,
    SimOutput, Simulation, Torus, Vec2,
};
use wormsim::kinetics::SpeedModel;
use wormsim::rng::rng_from_seed;

fn small(n: usize, seed: u64) -> SimConfig {
    SimConfig {
        n,
        seed,
        t_end: 3.0,
        ..SimConfig::urban_default()
    }
}

fn brute(config: &SimConfig) -> SimConfig {
    SimConfig {
        neighbor_search: NeighborSearch::BruteForce,
        ..config.clone()
    }
}

fn check_counts(out: &SimOutput, n: usize) {
    let nf = n as f64;
    for st in &out.series.states {
        assert_eq!(st.s + st.i + st.p_rec, nf);
    }
    for w in out.series.states.windows(2) {
        assert!(w[1].s <= w[0].s);
        assert!(w[1].p_rec >= w[0].p_rec);
    }
}

#[test]
fn grid_and_brute_force_agree_exactly() {
    for (seed, profile, speed) in [
        (1, Profile::Uniform, SpeedModel::Constant(2000.0)),
        (2, Profile::Chord, SpeedModel::Constant(2000.0)),
        (3, Profile::Uniform, SpeedModel::MaxwellBoltzmann2D { mean: 2000.0 }),
    ] {
        let config = SimConfig {
            profile,
            speed,
            ..small(500, seed)
        };
        let a = run_simulation(&config).unwrap();
        let b = run_simulation(&brute(&config)).unwrap();
        assert!(a.infection_events.len() > 10, "seed {seed} never spread");
        assert_eq!(a, b, "seed {seed}");

        let sa = scan_entries(&config, 0.1).unwrap();
        let sb = scan_entries(&brute(&config), 0.1).unwrap();
        assert_eq!(sa, sb);
    }
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let config = small(400, 11);
    let render = || {
        let out = run_simulation(&config).unwrap();
        let mut bytes = Vec::new();
        out.series.write_csv(&mut bytes).unwrap();
        out.write_events_csv(&mut bytes).unwrap();
        bytes
    };
    assert_eq!(render(), render());
    let other = run_simulation(&small(400, 12)).unwrap();
    assert_ne!(run_simulation(&config).unwrap(), other);
}

#[test]
fn translating_the_population_changes_nothing() {
    let config = small(400, 21);
    let mut rng = rng_from_seed(config.seed);
    let pop = init_population(&config, &mut rng).unwrap();
    let shifted = pop.translated(Vec2::new(0.37 * pop.side(), 0.81 * pop.side()));
    let a = Simulation::from_population(config.clone(), pop, rng.clone()).run();
    let b = Simulation::from_population(config, shifted, rng).run();
    assert_eq!(a.series, b.series);
    assert_eq!(a.infection_events.len(), b.infection_events.len());
    for (x, y) in a.infection_events.iter().zip(&b.infection_events) {
        assert_eq!((x.source, x.target), (y.source, y.target));
        assert!((x.t - y.t).abs() < 1e-9);
        assert!((x.impact - y.impact).abs() < 1e-6);
    }
}

#[test]
fn counts_are_conserved_and_events_are_consistent() {
    let config = SimConfig {
        profile: Profile::Chord,
        ..small(500, 31)
    };
    let out = run_simulation(&config).unwrap();
    check_counts(&out, config.n);
    let mut seen = std::collections::HashSet::new();
    for w in out.infection_events.windows(2) {
        assert!(w[1].t >= w[0].t);
    }
    for ev in &out.infection_events {
        assert!(seen.insert(ev.target), "device {} infected twice", ev.target);
        assert!(ev.impact >= 0.0 && ev.impact <= config.radius);
        assert_ne!(ev.source, ev.target);
    }
    let ever = out.ever_infected();
    assert_eq!(ever as usize, out.infection_events.len() + config.initial_infected);
}

#[test]
fn zero_transmission_never_infects() {
    let config = SimConfig {
        p: 0.0,
        ..small(500, 41)
    };
    let out = run_simulation(&config).unwrap();
    assert!(out.infection_events.is_empty());
    assert!(out.series.states.iter().all(|s| s.s == 499.0));
    assert!(out.trials.entry_trials > 0);
    assert_eq!(out.trials.entry_successes + out.trials.in_range_successes, 0);
}

#[test]
fn without_recovery_infectives_only_grow() {
    let config = SimConfig {
        p: 1.0,
        delta: 0.0,
        t_end: 1.0,
        ..small(400, 51)
    };
    let out = run_simulation(&config).unwrap();
    let infected: Vec<f64> = out.series.infected().collect();
    assert!(infected.windows(2).all(|w| w[1] >= w[0]));
    assert!(out.series.states.iter().all(|s| s.p_rec == 0.0));
    assert!(*infected.last().unwrap() > 1.0);
}

#[test]
fn fully_infected_start_just_decays() {
    let config = SimConfig {
        initial_infected: 300,
        t_end: 2.0,
        ..small(300, 61)
    };
    let out = run_simulation(&config).unwrap();
    assert!(out.infection_events.is_empty());
    assert!(out.series.states.iter().all(|s| s.s == 0.0));
    let infected: Vec<f64> = out.series.infected().collect();
    assert!(infected.windows(2).all(|w| w[1] <= w[0]));
    // Expected survivors after two days: 300·e^{-2} ≈ 40.6, sd ≈ 5.9.
    let last = *infected.last().unwrap();
    assert!((last - 300.0 * (-2.0f64).exp()).abs() < 25.0, "{last}");
}

#[test]
fn run_stops_early_but_keeps_the_full_grid() {
    let config = SimConfig {
        initial_infected: 20,
        p: 0.0,
        delta: 50.0,
        t_end: 1.0,
        ..small(300, 71)
    };
    let out = run_simulation(&config).unwrap();
    assert_eq!(out.series.len(), config.steps() + 1);
    let (t_last, last) = out.series.last().unwrap();
    assert!((t_last - config.steps() as f64 * config.dt).abs() < 1e-9);
    assert_eq!(last.i, 0.0);
}

#[test]
fn episodes_are_open_only_within_range() {
    let config = small(400, 81);
    let mut sim = Simulation::new(config.clone()).unwrap();
    let torus = Torus::new(config.side());
    for _ in 0..200 {
        sim.step();
        let agents = &sim.population().agents;
        for ep in sim.open_episodes() {
            let (a, b) = ep.ids;
            let d = torus.min_image(agents[b as usize].pos - agents[a as usize].pos).norm();
            assert!(d <= config.radius + 1e-9);
        }
        let (s, i, p) = sim.counts();
        assert_eq!(s, sim.population().count(Health::Susceptible));
        assert_eq!(i, sim.population().count(Health::Infected));
        assert_eq!(p, sim.population().count(Health::Patched));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn crossing_time_is_bracketed_by_substeps(
        px in -20.0f64..20.0, py in -20.0f64..20.0,
        speed in 0.0f64..60.0, angle in 0.0f64..std::f64::consts::TAU,
    ) {
        let radius = 5.0;
        prop_assume!(px * px + py * py > radius * radius);
        let w = (speed * angle.cos(), speed * angle.sin());
        let exact = detect_entry(Vec2::new(px, py), Vec2::new(w.0, w.1), radius, 1.0);
        let sampled = first_inside_substep((px, py), w, radius, 1.0, 1000);
        match (exact, sampled) {
            (Some(e), Some(k)) => {
                prop_assert!(e.t >= (f64::from(k) - 1.0) / 1000.0 - 1e-12);
                prop_assert!(e.t <= f64::from(k) / 1000.0 + 1e-12);
                prop_assert!(e.impact >= 0.0 && e.impact <= radius);
            }
            (None, Some(_)) => prop_assert!(false, "missed a crossing"),
            (Some(e), None) => {
                let x = px + w.0 * e.t;
                let y = py + w.1 * e.t;
                prop_assert!(((x * x + y * y).sqrt() - radius).abs() <= 1e-9 * radius);
            }
            (None, None) => {}
        }
    }

    #[test]
    fn min_image_is_shortest_and_congruent(dx in -5000.0f64..5000.0, dy in -5000.0f64..5000.0, side in 10.0f64..2000.0) {
        let torus = Torus::new(side);
        let d = torus.min_image(Vec2::new(dx, dy));
        for (orig, img) in [(dx, d.x), (dy, d.y)] {
            prop_assert!(img > -side / 2.0 - 1e-9 && img <= side / 2.0 + 1e-9);
            let k = (orig - img) / side;
            prop_assert!((k - k.round()).abs() < 1e-9);
        }
    }

    #[test]
    fn wrap_lands_inside_the_domain(x in -1e5f64..1e5, y in -1e5f64..1e5, side in 1.0f64..5000.0) {
        let p = Torus::new(side).wrap(Vec2::new(x, y));
        prop_assert!(p.x >= 0.0 && p.x < side && p.y >= 0.0 && p.y < side);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn small_runs_conserve_counts(seed in 0u64..1_000_000, chord in any::<bool>(), p in 0.0f64..1.0) {
        let config = SimConfig {
            p,
            profile: if chord { Profile::Chord } else { Profile::Uniform },
            t_end: 1.0,
            ..small(200, seed)
        };
        let out = run_simulation(&config).unwrap();
        check_counts(&out, config.n);
        prop_assert_eq!(out.series.len(), config.steps() + 1);
    }
}
