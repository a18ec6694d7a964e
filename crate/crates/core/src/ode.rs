//! Deterministic mass-action SIR dynamics for the worm outbreak.
//!
//! S is susceptible, I infected, P patched (immune and no longer infectious).

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetics::{beta_chord, KineticParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SirParams {
    /// Transmission rate, per day.
    pub beta: f64,
    /// Recovery rate, per day.
    pub delta: f64,
    /// Total population.
    pub n: f64,
}

impl SirParams {
    pub fn new(beta: f64, delta: f64, n: f64) -> Result<Self> {
        let params = Self { beta, delta, n };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::domain("SirParams", format!("beta = {}", self.beta)));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::domain("SirParams", format!("delta = {}", self.delta)));
        }
        if !(self.n >= 1.0 && self.n.is_finite()) {
            return Err(Error::domain("SirParams", format!("n = {} (need n >= 1)", self.n)));
        }
        Ok(())
    }

    /// Default integration step, 0.01 / max(β, δ).
    pub fn default_dt(&self) -> f64 {
        let fastest = self.beta.max(self.delta);
        if fastest > 0.0 {
            0.01 / fastest
        } else {
            0.01
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SirState {
    pub s: f64,
    pub i: f64,
    pub p_rec: f64,
}

impl SirState {
    pub fn new(s: f64, i: f64, p_rec: f64) -> Self {
        Self { s, i, p_rec }
    }

    /// A single infected device in an otherwise susceptible population.
    pub fn single_index_case(n: f64) -> Self {
        Self::new(n - 1.0, 1.0, 0.0)
    }

    pub fn total(&self) -> f64 {
        self.s + self.i + self.p_rec
    }

    fn clamped(self) -> Self {
        Self::new(self.s.max(0.0), self.i.max(0.0), self.p_rec.max(0.0))
    }

    fn axpy(self, h: f64, d: (f64, f64, f64)) -> Self {
        Self::new(self.s + h * d.0, self.i + h * d.1, self.p_rec + h * d.2)
    }
}

/// Time-indexed (S, I, P) trajectory.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SirSeries {
    pub times: Vec<f64>,
    pub states: Vec<SirState>,
}

/// Column header of the series CSV.
pub const SERIES_CSV_HEADER: [&str; 4] = ["t", "s", "i", "p"];

impl SirSeries {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            times: Vec::with_capacity(n),
            states: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, t: f64, state: SirState) {
        debug_assert!(self.times.last().is_none_or(|&last| t > last));
        self.times.push(t);
        self.states.push(state);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, SirState)> {
        Some((*self.times.last()?, *self.states.last()?))
    }

    pub fn infected(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(|s| s.i)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        csv.write_record(SERIES_CSV_HEADER)?;
        for (t, st) in self.times.iter().zip(&self.states) {
            csv.write_record([
                format!("{t:?}"),
                format!("{:?}", st.s),
                format!("{:?}", st.i),
                format!("{:?}", st.p_rec),
            ])?;
        }
        csv.flush()?;
        Ok(())
    }
}

/// Right-hand side of the mass-action system. The three rates sum to zero.
pub fn sir_derivative(state: &SirState, params: &SirParams) -> (f64, f64, f64) {
    let incidence = params.beta * state.s * state.i / params.n;
    let recovery = params.delta * state.i;
    (-incidence, incidence - recovery, recovery)
}

fn rk4_step(state: SirState, params: &SirParams, h: f64) -> SirState {
    let k1 = sir_derivative(&state, params);
    let k2 = sir_derivative(&state.axpy(0.5 * h, k1), params);
    let k3 = sir_derivative(&state.axpy(0.5 * h, k2), params);
    let k4 = sir_derivative(&state.axpy(h, k3), params);
    let combine = |a: f64, b: f64, c: f64, d: f64| (a + 2.0 * b + 2.0 * c + d) / 6.0;
    state.axpy(
        h,
        (
            combine(k1.0, k2.0, k3.0, k4.0),
            combine(k1.1, k2.1, k3.1, k4.1),
            combine(k1.2, k2.2, k3.2, k4.2),
        ),
    )
}

/// Classical fourth-order Runge-Kutta with a fixed step, sampled every step
/// from t = 0 through `t_end` (the last step is shortened to land on `t_end`).
pub fn integrate_sir(params: &SirParams, init: SirState, t_end: f64, dt: f64) -> Result<SirSeries> {
    params.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::domain("integrate_sir", format!("dt must be positive, got {dt}")));
    }
    if !(t_end >= dt && t_end.is_finite()) {
        return Err(Error::domain(
            "integrate_sir",
            format!("t_end must be at least dt, got t_end = {t_end}, dt = {dt}"),
        ));
    }
    if init.s < 0.0 || init.i < 0.0 || init.p_rec < 0.0 {
        return Err(Error::domain("integrate_sir", "initial state has a negative component"));
    }
    let steps = (t_end / dt - 1e-9).ceil() as usize;
    let mut series = SirSeries::with_capacity(steps + 1);
    let mut state = init;
    series.push(0.0, state);
    for k in 1..=steps {
        let t_prev = (k - 1) as f64 * dt;
        let t = if k == steps { t_end } else { k as f64 * dt };
        state = rk4_step(state, params, t - t_prev);
        series.push(t, state.clamped());
    }
    Ok(series)
}

/// Integrates with `substeps` RK4 steps per sample and returns `samples + 1`
/// points on the grid t_k = k·`sample_dt`.
pub fn integrate_sir_on_grid(
    params: &SirParams,
    init: SirState,
    sample_dt: f64,
    samples: usize,
    substeps: usize,
) -> Result<SirSeries> {
    params.validate()?;
    if sample_dt.is_nan() || sample_dt <= 0.0 || substeps == 0 {
        return Err(Error::domain(
            "integrate_sir_on_grid",
            "sample_dt must be positive and substeps nonzero",
        ));
    }
    let h = sample_dt / substeps as f64;
    let mut series = SirSeries::with_capacity(samples + 1);
    let mut state = init;
    series.push(0.0, state);
    for k in 1..=samples {
        for _ in 0..substeps {
            state = rk4_step(state, params, h);
        }
        series.push(k as f64 * sample_dt, state.clamped());
    }
    Ok(series)
}

/// True iff the chord-profile transmission rate exceeds the recovery rate.
pub fn epidemic_threshold(params: &KineticParams) -> bool {
    beta_chord(params) > params.delta
}

/// Total number ever infected in the deterministic limit: the largest root of
/// P = N·(1 − exp(−(β/δ)·P/N)). Returns exactly 0 when β/δ ≤ 1.
pub fn final_size(params: &SirParams) -> Result<f64> {
    params.validate()?;
    if params.delta <= 0.0 {
        return Err(Error::domain("final_size", "delta must be positive"));
    }
    let r0 = params.beta / params.delta;
    Ok(params.n * final_fraction(r0))
}

/// Root z ∈ (0, 1) of z = 1 − exp(−r0·z), or 0 for r0 ≤ 1.
pub fn final_fraction(r0: f64) -> f64 {
    if r0 <= 1.0 {
        return 0.0;
    }
    let residual = |z: f64| 1.0 - (-r0 * z).exp() - z;

    // Damped fixed-point iteration from z = 1. The map's slope at the root is
    // r0·(1 − z) < 1, so it contracts; damping helps when the slope is near 1.
    let mut z = 1.0_f64;
    for _ in 0..500 {
        let next = 1.0 - (-r0 * z).exp();
        let slope = r0 * (-r0 * z).exp();
        // Optimal relaxation for a locally linear map with this slope.
        let omega = (1.0 / (1.0 - slope.min(0.9))).min(10.0);
        let z_new = z + omega * (next - z);
        if !(z_new > 0.0 && z_new <= 1.0) {
            break;
        }
        if (z_new - z).abs() < 1e-15 {
            return z_new;
        }
        z = z_new;
    }
    if residual(z).abs() < 1e-13 && z > 0.0 {
        return z;
    }

    // Bisection fallback. Near threshold the root is ≈ 2(r0 − 1)/r0², and the
    // residual is positive below it.
    let mut lo = (r0 - 1.0) / (r0 * r0);
    while residual(lo) <= 0.0 && lo > 1e-300 {
        lo *= 0.5;
    }
    let mut hi = 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Sample with maximal I; ties go to the earliest time.
pub fn peak_infectives(series: &SirSeries) -> Result<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for (&t, st) in series.times.iter().zip(&series.states) {
        if best.is_none_or(|(_, i)| st.i > i) {
            best = Some((t, st.i));
        }
    }
    best.ok_or_else(|| Error::domain("peak_infectives", "series is empty"))
}
