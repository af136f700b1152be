//! Extended-real Lebesgue exponents.
//!
//! All `1/inf = 0` and `x^(1/inf) = 1` conventions live here so the rest of the
//! crate never has to special-case infinity by hand.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Reciprocals closer than this to an integer boundary are snapped to it.
const RECIP_SNAP: f64 = 1e-14;

/// A Lebesgue exponent in `[1, inf]`.
#[derive(Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub const ONE: Exponent = Exponent(1.0);
    pub const TWO: Exponent = Exponent(2.0);
    pub const INFINITY: Exponent = Exponent(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value < 1.0 {
            return Err(Error::InvalidExponent(value));
        }
        Ok(Exponent(value))
    }

    /// Builds the exponent whose reciprocal is `recip`, with `recip = 0` giving infinity.
    pub fn from_recip(recip: f64) -> Result<Self> {
        let r = snap_recip(recip);
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidExponent(1.0 / recip));
        }
        if r == 0.0 {
            Ok(Exponent::INFINITY)
        } else {
            Ok(Exponent(1.0 / r))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    #[inline]
    pub fn is_one(self) -> bool {
        self.0 == 1.0
    }

    /// `1/p`, zero at infinity.
    #[inline]
    pub fn recip(self) -> f64 {
        if self.is_infinite() {
            0.0
        } else {
            1.0 / self.0
        }
    }

    /// Hölder conjugate `p' = p/(p-1)`, with `1' = inf` and `inf' = 1`.
    pub fn conjugate(self) -> Exponent {
        if self.is_infinite() {
            Exponent::ONE
        } else if self.0 == 1.0 {
            Exponent::INFINITY
        } else {
            Exponent(self.0 / (self.0 - 1.0))
        }
    }

    /// Combines nonnegative values with nonnegative weights into
    /// `(sum w_i v_i^p)^(1/p)`, or `max v_i` over positive weights when `p = inf`.
    pub fn weighted_mean<I>(self, items: I) -> f64
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        if self.is_infinite() {
            items
                .into_iter()
                .filter(|&(w, _)| w > 0.0)
                .fold(0.0, |acc, (_, v)| acc.max(v))
        } else if self.0 == 1.0 {
            items.into_iter().map(|(w, v)| w * v).sum()
        } else {
            let p = self.0;
            let items: Vec<(f64, f64)> = items.into_iter().collect();
            let scale = items.iter().fold(0.0_f64, |acc, &(_, v)| acc.max(v));
            if scale == 0.0 {
                return 0.0;
            }
            let sum: f64 = items.iter().map(|&(w, v)| w * (v / scale).powf(p)).sum();
            scale * sum.powf(1.0 / p)
        }
    }

    /// `x^(1/p)`, equal to 1 for `p = inf` and any `x > 0`.
    pub fn root(self, x: f64) -> f64 {
        if self.is_infinite() {
            if x > 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            x.powf(1.0 / self.0)
        }
    }
}

fn snap_recip(r: f64) -> f64 {
    if r.abs() < RECIP_SNAP {
        0.0
    } else if (r - 1.0).abs() < RECIP_SNAP {
        1.0
    } else {
        r
    }
}

impl fmt::Debug for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for Exponent {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" => Ok(Exponent::INFINITY),
            other => other
                .parse::<f64>()
                .map_err(|_| format!("not an exponent: {s:?}"))
                .and_then(|x| Exponent::new(x).map_err(|e| e.to_string())),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct ExpVisitor;

        impl Visitor<'_> for ExpVisitor {
            type Value = Exponent;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "an exponent in [1, inf] (number or \"inf\")")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Exponent, E> {
                Exponent::new(v).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Exponent, E> {
                self.visit_f64(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Exponent, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Exponent, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(ExpVisitor)
    }
}

/// Exponents `(q, p, theta)` tied by `1/q - 1/p = 1 - 1/theta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentTriple {
    pub q: Exponent,
    pub p: Exponent,
    pub theta: f64,
}

impl ExponentTriple {
    /// Interpolation parameter `theta/p`, in `[0, 1]`.
    pub fn theta_over_p(&self) -> f64 {
        self.theta * self.p.recip()
    }

    pub fn theta_conjugate(&self) -> Exponent {
        Exponent(self.theta).conjugate()
    }
}

/// Solves `1/q - 1/p = 1 - 1/theta` for `p`.
///
/// `theta` must lie in `[1, inf)`. For `theta = 1` any `q` is admissible and
/// `p = q`; otherwise `q < theta/(theta - 1)` is required.
pub fn make_exponents(q: Exponent, theta: f64) -> Result<ExponentTriple> {
    if !(theta.is_finite() && theta >= 1.0) {
        return Err(Error::OutsideAdmissibleRegion(format!(
            "theta = {theta} must lie in [1, inf)"
        )));
    }
    let theta_prime = Exponent(theta).conjugate();
    if theta > 1.0 && q >= theta_prime {
        return Err(Error::OutsideAdmissibleRegion(format!(
            "q = {q} must satisfy 1 <= q < theta/(theta-1) = {theta_prime}"
        )));
    }
    let p_recip = q.recip() - theta_prime.recip();
    let p = Exponent::from_recip(p_recip).map_err(|_| {
        Error::OutsideAdmissibleRegion(format!("no p in [q, inf] for q = {q}, theta = {theta}"))
    })?;
    Ok(ExponentTriple { q, p, theta })
}
