//! Unit-tagged quantity parsing.
//!
//! Internal units are meters and days. Every dimensional value that enters
//! from the outside (config files, CLI flags) carries an explicit unit and is
//! converted here.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Density,
    Speed,
    Rate,
    Time,
}

impl Dimension {
    /// Canonical internal unit, used when writing values back out.
    pub fn internal_unit(self) -> &'static str {
        match self {
            Dimension::Length => "m",
            Dimension::Density => "/m^2",
            Dimension::Speed => "m/day",
            Dimension::Rate => "/day",
            Dimension::Time => "day",
        }
    }

    fn units(self) -> &'static [(&'static str, f64)] {
        const SECONDS_PER_DAY: f64 = 86_400.0;
        match self {
            Dimension::Length => &[("m", 1.0), ("km", 1e3)],
            Dimension::Density => &[
                ("/m^2", 1.0),
                ("/m2", 1.0),
                ("perm^2", 1.0),
                ("perm2", 1.0),
                ("m^-2", 1.0),
                ("/km^2", 1e-6),
                ("/km2", 1e-6),
                ("perkm^2", 1e-6),
                ("perkm2", 1e-6),
                ("km^-2", 1e-6),
            ],
            Dimension::Speed => &[
                ("m/day", 1.0),
                ("m/d", 1.0),
                ("km/day", 1e3),
                ("km/d", 1e3),
                ("m/s", SECONDS_PER_DAY),
                ("km/h", 24e3),
            ],
            Dimension::Rate => &[
                ("/day", 1.0),
                ("/d", 1.0),
                ("perday", 1.0),
                ("day^-1", 1.0),
                ("/h", 24.0),
                ("/hour", 24.0),
                ("perhour", 24.0),
            ],
            Dimension::Time => &[
                ("day", 1.0),
                ("days", 1.0),
                ("d", 1.0),
                ("h", 1.0 / 24.0),
                ("hour", 1.0 / 24.0),
                ("hours", 1.0 / 24.0),
                ("s", 1.0 / SECONDS_PER_DAY),
            ],
        }
    }

    fn accepted(self) -> String {
        self.units()
            .iter()
            .map(|(u, _)| *u)
            .filter(|u| !u.starts_with("per"))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Dimension::Length => "length",
            Dimension::Density => "density",
            Dimension::Speed => "speed",
            Dimension::Rate => "rate",
            Dimension::Time => "time",
        };
        f.write_str(name)
    }
}

fn split_number(text: &str) -> Option<(f64, &str)> {
    let end = text
        .char_indices()
        .take_while(|(_, c)| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-'))
        .map(|(i, c)| i + c.len_utf8())
        .last()?;
    // Back off until the prefix parses ("2e" in "2em" is not a number).
    (1..=end)
        .rev()
        .find_map(|k| text[..k].parse::<f64>().ok().map(|v| (v, &text[k..])))
}

/// Parses `"<number> <unit>"` into internal units for `dim`.
///
/// A bare number is rejected: the unit must be explicit.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64> {
    let trimmed = text.trim();
    let (value, rest) = split_number(trimmed)
        .ok_or_else(|| Error::Unit(format!("`{trimmed}` does not start with a number")))?;
    let unit: String = rest
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect::<String>()
        .to_ascii_lowercase();
    if unit.is_empty() {
        return Err(Error::Unit(format!(
            "`{trimmed}` has no unit; a {dim} needs one of: {}",
            dim.accepted()
        )));
    }
    let factor = dim
        .units()
        .iter()
        .find(|(u, _)| *u == unit)
        .map(|(_, f)| *f)
        .ok_or_else(|| {
            Error::Unit(format!(
                "`{trimmed}`: unit `{unit}` is not a {dim} unit (accepted: {})",
                dim.accepted()
            ))
        })?;
    if !value.is_finite() {
        return Err(Error::Unit(format!("`{trimmed}` is not finite")));
    }
    Ok(value * factor)
}

/// Writes an internal-unit value so that [`parse_quantity`] reads it back exactly.
pub fn format_quantity(value: f64, dim: Dimension) -> String {
    format!("{value:?} {}", dim.internal_unit())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn km_and_m_densities_agree() {
        let a = parse_quantity("3000 /km^2", Dimension::Density).unwrap();
        let b = parse_quantity("0.003/m^2", Dimension::Density).unwrap();
        assert!((a - b).abs() < 1e-18);
    }

    #[test]
    fn speeds() {
        assert_eq!(parse_quantity("2 km/day", Dimension::Speed).unwrap(), 2000.0);
        assert_eq!(parse_quantity("2000 m/day", Dimension::Speed).unwrap(), 2000.0);
        assert_eq!(parse_quantity("1 m/s", Dimension::Speed).unwrap(), 86_400.0);
    }

    #[test]
    fn exponent_numbers() {
        assert_eq!(parse_quantity("3e-3 /m^2", Dimension::Density).unwrap(), 3e-3);
        assert_eq!(parse_quantity("5m", Dimension::Length).unwrap(), 5.0);
    }

    #[test]
    fn missing_unit_is_rejected() {
        let err = parse_quantity("5", Dimension::Length).unwrap_err();
        assert!(err.to_string().contains("has no unit"), "{err}");
    }

    #[test]
    fn wrong_dimension_is_rejected() {
        let err = parse_quantity("5 m", Dimension::Density).unwrap_err();
        assert!(err.to_string().contains("not a density unit"), "{err}");
    }

    #[test]
    fn formatted_values_round_trip() {
        for v in [3e-3, 2000.0, 0.000_312_5, 1.0 / 3.0] {
            for dim in [Dimension::Density, Dimension::Speed, Dimension::Time] {
                assert_eq!(parse_quantity(&format_quantity(v, dim), dim).unwrap(), v);
            }
        }
    }
}
