//! Contact and transmission rates for straight-line movers in the plane.
//!
//! Everything here is a pure function of its inputs. Units are meters and
//! days: densities in agents/m², speeds in m/day, rates per day.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use rand::Rng;
use rand_distr::{Distribution, Weibull};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// Inputs shared by every analytic rate formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KineticParams {
    /// Number density, agents per m².
    pub rho: f64,
    /// Contact (communication) radius, m.
    pub radius: f64,
    /// Mean population speed, m/day.
    pub v_bar: f64,
    /// Per-contact transmission probability.
    pub p: f64,
    /// Recovery (patch) rate, per day.
    pub delta: f64,
}

impl KineticParams {
    pub fn new(rho: f64, radius: f64, v_bar: f64, p: f64, delta: f64) -> Result<Self> {
        let params = Self {
            rho,
            radius,
            v_bar,
            p,
            delta,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("rho", self.rho),
            ("radius", self.radius),
            ("v_bar", self.v_bar),
            ("p", self.p),
            ("delta", self.delta),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::domain(
                    "KineticParams",
                    format!("{name} must be finite and nonnegative, got {value}"),
                ));
            }
        }
        if self.p > 1.0 {
            return Err(Error::domain(
                "KineticParams",
                format!("p must not exceed 1, got {}", self.p),
            ));
        }
        Ok(())
    }
}

/// Speed distribution of the moving population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpeedModel {
    /// Every agent moves at this speed (m/day).
    Constant(f64),
    /// 2D Maxwell-Boltzmann (Rayleigh) speeds with the given mean (m/day).
    MaxwellBoltzmann2D { mean: f64 },
}

impl SpeedModel {
    pub fn mean(&self) -> f64 {
        match *self {
            SpeedModel::Constant(v) => v,
            SpeedModel::MaxwellBoltzmann2D { mean } => mean,
        }
    }

    /// Rayleigh scale parameter σ, chosen so that the mean is `mean`.
    pub fn rayleigh_sigma(mean: f64) -> f64 {
        mean * (2.0 / PI).sqrt()
    }

    /// A practical upper bound on sampled speeds, used for configuration checks.
    ///
    /// Exact for [`SpeedModel::Constant`]; the 99.9% quantile for Maxwell-Boltzmann.
    pub fn nominal_max(&self) -> f64 {
        match *self {
            SpeedModel::Constant(v) => v,
            SpeedModel::MaxwellBoltzmann2D { mean } => {
                Self::rayleigh_sigma(mean) * (2.0 * 1000f64.ln()).sqrt()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.mean();
        let ok = match self {
            SpeedModel::Constant(_) => v.is_finite() && v >= 0.0,
            SpeedModel::MaxwellBoltzmann2D { .. } => v.is_finite() && v > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(
                "SpeedModel",
                format!("speed parameter must be positive and finite, got {v}"),
            ))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            SpeedModel::Constant(v) => v,
            SpeedModel::MaxwellBoltzmann2D { mean } => {
                // Rayleigh(σ) is Weibull with shape 2 and scale σ√2.
                let scale = Self::rayleigh_sigma(mean) * SQRT_2;
                Weibull::new(scale, 2.0)
                    .expect("validated speed model")
                    .sample(rng)
            }
        }
    }
}

/// Complete elliptic integral of the second kind,
/// E(m) = ∫₀^{π/2} √(1 − m sin²ω) dω, parameter convention m = k².
///
/// Arithmetic-geometric mean iteration; exact at both endpoints.
pub fn elliptic_e(m: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&m) {
        return Err(Error::domain(
            "elliptic_e",
            format!("parameter m must lie in [0, 1], got {m}"),
        ));
    }
    if m == 0.0 {
        return Ok(FRAC_PI_2);
    }
    if m == 1.0 {
        return Ok(1.0);
    }
    let mut a = 1.0_f64;
    let mut b = (1.0 - m).sqrt();
    let mut c = m.sqrt();
    let mut weight = 0.5;
    let mut sum = weight * c * c;
    for _ in 0..40 {
        let a_next = 0.5 * (a + b);
        let b_next = (a * b).sqrt();
        c = 0.5 * (a - b);
        weight *= 2.0;
        sum += weight * c * c;
        a = a_next;
        b = b_next;
        if c.abs() <= f64::EPSILON * a {
            break;
        }
    }
    let k = FRAC_PI_2 / a;
    Ok(k * (1.0 - sum))
}

/// E(m) by adaptive quadrature of its defining integral. Slower than
/// [`elliptic_e`]; kept as an independent cross-check.
pub fn elliptic_e_quadrature(m: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&m) {
        return Err(Error::domain(
            "elliptic_e_quadrature",
            format!("parameter m must lie in [0, 1], got {m}"),
        ));
    }
    Ok(quadrature::integrate(
        |w: f64| {
            let s = w.sin();
            (1.0 - m * s * s).max(0.0).sqrt()
        },
        0.0,
        FRAC_PI_2,
        1e-14,
    ))
}

fn require_positive(op: &'static str, name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(
            op,
            format!("{name} must be positive, got {value}"),
        ))
    }
}

/// Mean rate at which an agent moving at `v_i` meets agents moving at `v`
/// with isotropic headings: (4/π)·R·ρ·(v_i + v)·E(m), m = 4·v·v_i/(v + v_i)².
pub fn contact_rate_pair(v_i: f64, v: f64, params: &KineticParams) -> Result<f64> {
    if !(v_i >= 0.0 && v >= 0.0 && v_i.is_finite() && v.is_finite()) {
        return Err(Error::domain(
            "contact_rate_pair",
            format!("speeds must be finite and nonnegative, got v_i = {v_i}, v = {v}"),
        ));
    }
    let total = v_i + v;
    if total == 0.0 {
        return Ok(0.0);
    }
    // Symmetric by construction: both the sum and the product are order-free.
    let m = (4.0 * (v * v_i) / (total * total)).min(1.0);
    let e = elliptic_e(m)?;
    Ok(4.0 / PI * params.radius * params.rho * total * e)
}

/// Population contact rate (8/π)·R·ρ·v̄ for the two supported speed models.
pub fn contact_rate_population(speed: &SpeedModel, params: &KineticParams) -> Result<f64> {
    speed.validate()?;
    params.validate()?;
    Ok(8.0 / PI * params.radius * params.rho * speed.mean())
}

/// Mass-action transmission rate with a flat within-radius profile, 8Rv̄ρp/π.
pub fn beta_basic(params: &KineticParams) -> f64 {
    8.0 / PI * params.radius * params.v_bar * params.rho * params.p
}

/// Transmission rate when infection probability follows chord length, 2Rρv̄p.
pub fn beta_chord(params: &KineticParams) -> f64 {
    2.0 * params.radius * params.rho * params.v_bar * params.p
}

/// Transmission rate for an arbitrary impact-parameter profile:
/// (8/π)·ρ·v̄·∫₀^R profile(r) dr.
///
/// `profile` gives the per-encounter infection probability for a passage
/// whose closest approach is `r`; it must stay within [0, 1].
pub fn beta_profile<F>(params: &KineticParams, profile: F) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    params.validate()?;
    let radius = params.radius;
    if radius == 0.0 {
        return Ok(0.0);
    }
    // Probe the profile on a grid before integrating so that bad values are
    // reported instead of silently integrated.
    const PROBES: usize = 257;
    for k in 0..PROBES {
        let r = radius * k as f64 / (PROBES - 1) as f64;
        let value = profile(r);
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::domain(
                "beta_profile",
                format!("profile({r}) = {value} lies outside [0, 1]"),
            ));
        }
    }
    let integral = quadrature::integrate(&profile, 0.0, radius, 1e-12);
    Ok(8.0 / PI * params.rho * params.v_bar * integral)
}

/// Density below which no epidemic can take off, δ/(2Rv̄p).
pub fn critical_density(radius: f64, v_bar: f64, p: f64, delta: f64) -> Result<f64> {
    const OP: &str = "critical_density";
    require_positive(OP, "radius", radius)?;
    require_positive(OP, "v_bar", v_bar)?;
    require_positive(OP, "p", p)?;
    require_positive(OP, "delta", delta)?;
    Ok(delta / (2.0 * radius * v_bar * p))
}

/// Basic reproduction number β/δ.
pub fn r0(beta: f64, delta: f64) -> Result<f64> {
    require_positive("r0", "delta", delta)?;
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::domain("r0", format!("beta must be nonnegative, got {beta}")));
    }
    Ok(beta / delta)
}

/// Mean inter-agent spacing ρ^(-1/2).
pub fn mean_spacing(rho: f64) -> Result<f64> {
    require_positive("mean_spacing", "rho", rho)?;
    Ok(rho.powf(-0.5))
}

/// Ratio R/l above which the low-density picture starts to break down.
pub const SPACING_WARN_RATIO: f64 = 0.25;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn urban_params() -> KineticParams {
        KineticParams::new(3e-3, 5.0, 2000.0, 0.1, 1.0).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn elliptic_endpoints_are_exact() {
        assert_eq!(elliptic_e(0.0).unwrap(), FRAC_PI_2);
        assert_eq!(elliptic_e(1.0).unwrap(), 1.0);
    }

    #[test]
    fn elliptic_rejects_out_of_range() {
        assert!(elliptic_e(-1e-9).is_err());
        assert!(elliptic_e(1.0 + 1e-9).is_err());
        assert!(elliptic_e(f64::NAN).is_err());
    }

    #[test]
    fn elliptic_routes_agree() {
        for k in 0..=100 {
            let m = k as f64 / 100.0;
            let agm = elliptic_e(m).unwrap();
            let quad = elliptic_e_quadrature(m).unwrap();
            assert!((agm - quad).abs() < 1e-13, "m = {m}: {agm} vs {quad}");
        }
    }

    #[test]
    fn elliptic_is_strictly_decreasing() {
        let mut prev = elliptic_e(0.0).unwrap();
        for k in 1..=1000 {
            let e = elliptic_e(k as f64 / 1000.0).unwrap();
            assert!(e < prev);
            prev = e;
        }
    }

    #[test]
    fn pair_rate_limits() {
        let params = urban_params();
        let v = 2000.0;
        let equal = contact_rate_pair(v, v, &params).unwrap();
        assert!(rel(equal, 8.0 / PI * 5.0 * 3e-3 * v) < 1e-12);
        let still = contact_rate_pair(v, 0.0, &params).unwrap();
        assert!(rel(still, 2.0 * 5.0 * 3e-3 * v) < 1e-12);
        assert_eq!(contact_rate_pair(0.0, 0.0, &params).unwrap(), 0.0);
        assert!(contact_rate_pair(-1.0, 0.0, &params).is_err());
    }

    #[test]
    fn population_rate_at_urban_parameters() {
        let params = urban_params();
        let cr = contact_rate_population(&SpeedModel::Constant(2000.0), &params).unwrap();
        assert!((cr - 240.0 / PI).abs() < 1e-10);
        assert!((cr - 76.394).abs() < 1e-3);
        let mb = contact_rate_population(&SpeedModel::MaxwellBoltzmann2D { mean: 2000.0 }, &params)
            .unwrap();
        assert_eq!(cr, mb);
        let zero = contact_rate_population(&SpeedModel::Constant(0.0), &params).unwrap();
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn betas_at_urban_parameters() {
        let params = urban_params();
        assert!((beta_basic(&params) - 24.0 / PI).abs() < 1e-12);
        assert!((beta_chord(&params) - 6.0).abs() < 1e-12);
        let none = KineticParams { p: 0.0, ..params };
        assert_eq!(beta_basic(&none), 0.0);
        assert_eq!(beta_chord(&none), 0.0);
        let wide = KineticParams {
            radius: 10.0,
            ..params
        };
        assert!(rel(beta_basic(&wide), 2.0 * beta_basic(&params)) < 1e-15);
    }

    #[test]
    fn profile_reproduces_closed_forms() {
        let params = urban_params();
        let (r, p) = (params.radius, params.p);
        let chord = beta_profile(&params, |x| p / r * (r * r - x * x).max(0.0).sqrt()).unwrap();
        assert!(rel(chord, beta_chord(&params)) < 1e-9, "{chord}");
        let flat = beta_profile(&params, |_| p).unwrap();
        assert!(rel(flat, beta_basic(&params)) < 1e-12);
        assert_eq!(beta_profile(&params, |_| 0.0).unwrap(), 0.0);
    }

    #[test]
    fn profile_outside_unit_interval_is_rejected() {
        let params = urban_params();
        assert!(beta_profile(&params, |_| 1.5).is_err());
        assert!(beta_profile(&params, |r| if r > 4.0 { -0.1 } else { 0.1 }).is_err());
    }

    #[test]
    fn critical_density_values() {
        let rc = critical_density(5.0, 2000.0, 0.1, 1.0).unwrap();
        assert!((rc - 5e-4).abs() < 1e-18);
        let doubled = critical_density(5.0, 2000.0, 0.1, 2.0).unwrap();
        assert!(rel(doubled, 2.0 * rc) < 1e-15);
        let at = KineticParams::new(rc, 5.0, 2000.0, 0.1, 1.0).unwrap();
        assert!((r0(beta_chord(&at), 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(critical_density(5.0, 0.0, 0.1, 1.0).is_err());
        assert!(critical_density(5.0, 2000.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn r0_values() {
        assert_eq!(r0(6.0, 1.0).unwrap(), 6.0);
        assert_eq!(r0(0.3, 0.3).unwrap(), 1.0);
        assert_eq!(r0(0.0, 1.0).unwrap(), 0.0);
        assert!(r0(1.0, 0.0).is_err());
    }

    #[test]
    fn spacing_values() {
        assert!((mean_spacing(3e-3).unwrap() - 18.257_418_583_505_537).abs() < 1e-9);
        assert_eq!(mean_spacing(1.0).unwrap(), 1.0);
        assert!((mean_spacing(1e-4).unwrap() - 100.0).abs() < 1e-12);
        assert!(mean_spacing(0.0).is_err());
    }

    #[test]
    fn rayleigh_sampling_hits_the_mean() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let model = SpeedModel::MaxwellBoltzmann2D { mean: 2000.0 };
        let n = 200_000;
        let mean = (0..n).map(|_| model.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!(rel(mean, 2000.0) < 0.01, "{mean}");
    }

    proptest! {
        #[test]
        fn pair_rate_is_symmetric(a in 0.0..1e4f64, b in 0.0..1e4f64) {
            let params = urban_params();
            prop_assert_eq!(
                contact_rate_pair(a, b, &params).unwrap(),
                contact_rate_pair(b, a, &params).unwrap()
            );
        }

        #[test]
        fn chord_to_basic_ratio_is_quarter_pi(
            rho in 1e-6..1.0f64, radius in 0.1..100.0f64, v in 1.0..1e5f64, p in 1e-3..1.0f64
        ) {
            let params = KineticParams::new(rho, radius, v, p, 1.0).unwrap();
            let ratio = beta_chord(&params) / beta_basic(&params);
            prop_assert!((ratio - PI / 4.0).abs() < 1e-14);
        }

        #[test]
        fn rates_scale_linearly(
            rho in 1e-5..1e-1f64, radius in 0.5..50.0f64, v in 10.0..1e4f64
        ) {
            let base = KineticParams::new(rho, radius, v, 0.1, 1.0).unwrap();
            let speed = SpeedModel::Constant(v);
            let cr = contact_rate_population(&speed, &base).unwrap();
            let bb = beta_basic(&base);
            let bc = beta_chord(&base);
            let scaled = [
                KineticParams { rho: 2.0 * rho, ..base },
                KineticParams { radius: 2.0 * radius, ..base },
            ];
            for s in scaled {
                prop_assert!(rel(contact_rate_population(&speed, &s).unwrap(), 2.0 * cr) < 1e-14);
                prop_assert!(rel(beta_basic(&s), 2.0 * bb) < 1e-14);
                prop_assert!(rel(beta_chord(&s), 2.0 * bc) < 1e-14);
            }
            let faster = KineticParams { v_bar: 2.0 * v, ..base };
            let cr2 = contact_rate_population(&SpeedModel::Constant(2.0 * v), &faster).unwrap();
            prop_assert!(rel(cr2, 2.0 * cr) < 1e-14);
            prop_assert!(rel(beta_basic(&faster), 2.0 * bb) < 1e-14);
            prop_assert!(rel(beta_chord(&faster), 2.0 * bc) < 1e-14);
        }
    }
}
