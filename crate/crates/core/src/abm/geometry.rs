//! Torus geometry and exact within-step crossing detection.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(length: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(length * c, length * s)
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

/// Square periodic domain `[0, side)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Torus {
    pub side: f64,
}

impl Torus {
    pub fn new(side: f64) -> Self {
        Self { side }
    }

    fn wrap_coord(&self, x: f64) -> f64 {
        if (0.0..self.side).contains(&x) {
            return x;
        }
        let shifted = if x < 0.0 { x + self.side } else { x - self.side };
        if (0.0..self.side).contains(&shifted) {
            return shifted;
        }
        let w = x.rem_euclid(self.side);
        // rem_euclid can round up to exactly `side` for tiny negative inputs.
        if w >= self.side {
            0.0
        } else {
            w
        }
    }

    pub fn wrap(&self, p: Vec2) -> Vec2 {
        Vec2::new(self.wrap_coord(p.x), self.wrap_coord(p.y))
    }

    fn image_coord(&self, d: f64) -> f64 {
        let half = 0.5 * self.side;
        let mut d = d;
        if d.abs() >= 1.5 * self.side {
            d -= self.side * (d / self.side).round();
        }
        if d > half {
            d -= self.side;
        } else if d <= -half {
            d += self.side;
        }
        d
    }

    /// Minimum-image displacement, each component in (−side/2, side/2].
    pub fn min_image(&self, d: Vec2) -> Vec2 {
        Vec2::new(self.image_coord(d.x), self.image_coord(d.y))
    }
}

/// First crossing of the contact circle within a step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    /// Time into the step at which the separation first equals the radius.
    pub t: f64,
    /// Closest-approach distance of the relative straight line, clamped to [0, radius].
    pub impact: f64,
}

/// Solves |relpos + relvel·t| = radius for the earliest t in (0, window].
///
/// `relpos` must already be a minimum-image displacement and the pair must
/// start outside the radius; a pair that starts inside yields `None`.
pub fn detect_entry(relpos: Vec2, relvel: Vec2, radius: f64, window: f64) -> Option<Entry> {
    let c = relpos.norm_sq() - radius * radius;
    if c <= 0.0 {
        return None;
    }
    let a = relvel.norm_sq();
    if a == 0.0 {
        return None;
    }
    let b = relpos.dot(relvel);
    if b >= 0.0 {
        // Separating or moving tangentially away.
        return None;
    }
    let disc = b * b - a * c;
    if disc < 0.0 {
        return None;
    }
    // Smaller root of a·t² + 2b·t + c, in the cancellation-free form.
    let t = c / (-b + disc.sqrt());
    if t > window {
        return None;
    }
    let impact = (relpos.cross(relvel).abs() / a.sqrt()).min(radius);
    Some(Entry { t, impact })
}
