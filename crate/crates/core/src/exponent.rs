//! Extended exponents for spectral and sequence norms.
//!
//! Exponents live in (0, ∞]. Infinity is a distinct state, never a large
//! float, so `1/p` is exactly zero there and comparisons stay exact.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An exponent in (0, ∞] as used for Schatten and mixed norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpectrumExponent {
    Finite(f64),
    Infinite,
}

impl SpectrumExponent {
    /// Builds a finite exponent; rejects values outside (0, ∞) and NaN.
    pub fn finite(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(SpectrumExponent::Finite(value))
        } else {
            Err(Error::usage(format!(
                "exponent must lie in (0, inf], got {value}"
            )))
        }
    }

    pub fn infinity() -> Self {
        SpectrumExponent::Infinite
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, SpectrumExponent::Infinite)
    }

    /// 1/p with the convention 1/∞ = 0.
    pub fn reciprocal(self) -> f64 {
        match self {
            SpectrumExponent::Finite(p) => 1.0 / p,
            SpectrumExponent::Infinite => 0.0,
        }
    }

    /// Finite value, or None for ∞.
    pub fn finite_value(self) -> Option<f64> {
        match self {
            SpectrumExponent::Finite(p) => Some(p),
            SpectrumExponent::Infinite => None,
        }
    }

    /// True when the exponent is at least `threshold`.
    pub fn at_least(self, threshold: f64) -> bool {
        match self {
            SpectrumExponent::Finite(p) => p >= threshold,
            SpectrumExponent::Infinite => true,
        }
    }

    /// Total order on (0, ∞].
    pub fn le(self, other: SpectrumExponent) -> bool {
        match (self, other) {
            (SpectrumExponent::Infinite, SpectrumExponent::Infinite) => true,
            (SpectrumExponent::Infinite, SpectrumExponent::Finite(_)) => false,
            (SpectrumExponent::Finite(_), SpectrumExponent::Infinite) => true,
            (SpectrumExponent::Finite(a), SpectrumExponent::Finite(b)) => a <= b,
        }
    }

    pub fn lt(self, other: SpectrumExponent) -> bool {
        self.le(other) && self != other
    }
}

impl fmt::Display for SpectrumExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectrumExponent::Finite(p) => write!(f, "{p}"),
            SpectrumExponent::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for SpectrumExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "Inf" | "INF" | "infinity" | "oo" | "∞" => Ok(SpectrumExponent::Infinite),
            other => {
                let v: f64 = other
                    .parse()
                    .map_err(|_| Error::usage(format!("cannot parse exponent '{other}'")))?;
                SpectrumExponent::finite(v)
            }
        }
    }
}

/// Conjugate exponent p* with 1/p + 1/p* = 1.
///
/// Defined for p in [1, ∞]; 1 and ∞ are each other's conjugates and 2 is a
/// fixed point. Quasi-norm exponents p < 1 have no conjugate.
pub fn conjugate_exponent(p: SpectrumExponent) -> Result<SpectrumExponent> {
    match p {
        SpectrumExponent::Infinite => SpectrumExponent::finite(1.0),
        SpectrumExponent::Finite(v) => {
            if v < 1.0 {
                Err(Error::usage(format!(
                    "conjugate exponent requires p >= 1, got {v}"
                )))
            } else if v == 1.0 {
                Ok(SpectrumExponent::Infinite)
            } else {
                SpectrumExponent::finite(v / (v - 1.0))
            }
        }
    }
}
