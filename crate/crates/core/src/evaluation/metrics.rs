// SPDX-License-Identifier: MIT OR Apache-2.0

//! Localisation metrics.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A real number or one of `-inf`, `+inf`.
///
/// Serialised as a JSON number when finite and as the strings `"inf"` /
/// `"-inf"` otherwise.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Extended(pub f64);

impl Extended {
    pub const INFINITY: Extended = Extended(f64::INFINITY);
    pub const NEG_INFINITY: Extended = Extended(f64::NEG_INFINITY);

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl From<usize> for Extended {
    fn from(v: usize) -> Self {
        Extended(v as f64)
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            x if x == f64::INFINITY => f.write_str("inf"),
            x if x == f64::NEG_INFINITY => f.write_str("-inf"),
            x => write!(f, "{x}"),
        }
    }
}

impl Serialize for Extended {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            serializer.serialize_f64(self.0)
        } else {
            serializer.collect_str(self)
        }
    }
}

impl<'de> Deserialize<'de> for Extended {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Extended;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number, \"inf\" or \"-inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Extended, E> {
                Ok(Extended(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Extended, E> {
                Ok(Extended(v as f64))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Extended, E> {
                Ok(Extended(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Extended, E> {
                match v {
                    "inf" | "+inf" => Ok(Extended::INFINITY),
                    "-inf" => Ok(Extended::NEG_INFINITY),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        deserializer.deserialize_any(V)
    }
}

pub fn abs_k_error(true_k: usize, est_k: usize) -> usize {
    true_k.abs_diff(est_k)
}

/// `d(inner | outer) = max over eta in outer of min over x in inner of |x - eta|`.
///
/// An empty `inner` gives `+inf`; otherwise an empty `outer` gives `-inf`.
pub fn hausdorff_one_sided(inner: &[usize], outer: &[usize]) -> Extended {
    if inner.is_empty() {
        return Extended::INFINITY;
    }
    if outer.is_empty() {
        return Extended::NEG_INFINITY;
    }
    let mut sorted = inner.to_vec();
    sorted.sort_unstable();
    let nearest = |eta: usize| {
        let i = sorted.partition_point(|&x| x < eta);
        let above = sorted.get(i).map(|&x| x - eta);
        let below = i.checked_sub(1).map(|j| eta - sorted[j]);
        above.into_iter().chain(below).min().expect("inner is nonempty")
    };
    Extended::from(outer.iter().map(|&eta| nearest(eta)).max().expect("outer is nonempty"))
}

/// Median under the order `-inf < reals < +inf`, averaging the two middle
/// values for even counts. Returns `+inf` once at least half the values are
/// `+inf`. `None` for an empty slice.
pub fn extended_median(values: &[Extended]) -> Option<Extended> {
    if values.is_empty() {
        return None;
    }
    let infinite = values.iter().filter(|v| v.0 == f64::INFINITY).count();
    if 2 * infinite >= values.len() {
        return Some(Extended::INFINITY);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(Extended::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        return Some(sorted[n / 2]);
    }
    let (a, b) = (sorted[n / 2 - 1], sorted[n / 2]);
    Some(if a.0 == b.0 { a } else { Extended((a.0 + b.0) / 2.0) })
}
