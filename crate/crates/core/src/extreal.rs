//! Total arithmetic and ordering on the extended real line [-inf, +inf].
//!
//! Every formula in the library evaluates through this type so that infinite
//! values flow explicitly instead of silently turning into NaN. The finite
//! payload is guaranteed NaN-free by construction.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A value in [-inf, +inf]. `Finite` never carries NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

pub use ExtReal::{Finite, NegInf, PosInf};

impl ExtReal {
    /// Wraps a finite real. Errors on NaN or infinite input.
    pub fn finite(v: f64) -> Result<Self> {
        if v.is_nan() {
            return Err(Error::NanValue);
        }
        if v.is_infinite() {
            return Err(Error::ScaleNotPositive(v));
        }
        Ok(Finite(v))
    }

    /// Converts an f64, mapping IEEE infinities to the infinite variants.
    /// NaN is an error.
    pub fn from_f64(v: f64) -> Result<Self> {
        if v.is_nan() {
            return Err(Error::NanValue);
        }
        Ok(if v == f64::INFINITY {
            PosInf
        } else if v == f64::NEG_INFINITY {
            NegInf
        } else {
            Finite(v)
        })
    }

    /// Raw f64 view: infinities map to IEEE infinities.
    pub fn to_f64(self) -> f64 {
        match self {
            NegInf => f64::NEG_INFINITY,
            Finite(v) => v,
            PosInf => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Finite(_))
    }

    pub fn is_pos_inf(self) -> bool {
        matches!(self, PosInf)
    }

    pub fn is_neg_inf(self) -> bool {
        matches!(self, NegInf)
    }

    /// Finite payload, if any.
    pub fn as_finite(self) -> Option<f64> {
        match self {
            Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Extended addition. `(+inf) + (-inf)` (in either order) is an error.
    pub fn add(self, other: ExtReal) -> Result<ExtReal> {
        match (self, other) {
            (PosInf, NegInf) | (NegInf, PosInf) => Err(Error::IndeterminateForm),
            (PosInf, _) | (_, PosInf) => Ok(PosInf),
            (NegInf, _) | (_, NegInf) => Ok(NegInf),
            (Finite(a), Finite(b)) => ExtReal::from_f64(a + b),
        }
    }

    /// Multiplication by a strictly positive finite scalar:
    /// `c * (+-inf) = +-inf`. `c <= 0` or non-finite `c` is a contract error;
    /// the closed forms in this library only ever scale by positive factors,
    /// so anything else signals a dispatcher bug.
    pub fn scale(c: f64, a: ExtReal) -> Result<ExtReal> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::ScaleNotPositive(c));
        }
        Ok(match a {
            NegInf => NegInf,
            PosInf => PosInf,
            Finite(v) => Finite(c * v),
        })
    }

    pub fn neg(self) -> ExtReal {
        match self {
            NegInf => PosInf,
            PosInf => NegInf,
            Finite(v) => Finite(-v),
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            // Finite payloads are never NaN, so total order is safe.
            (Finite(a), Finite(b)) => a.partial_cmp(b).unwrap(),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NegInf => write!(f, "-inf"),
            PosInf => write!(f, "+inf"),
            Finite(v) => write!(f, "{v}"),
        }
    }
}

impl std::str::FromStr for ExtReal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+inf" | "inf" | "\u{2212}inf" => Ok(PosInf),
            "-inf" => Ok(NegInf),
            other => {
                let v: f64 = other
                    .parse()
                    .map_err(|_| Error::ConfigParse(format!("bad extended real: {other:?}")))?;
                ExtReal::from_f64(v)
            }
        }
    }
}

// JSON rendering: finite values as numbers, infinities as "+inf"/"-inf".
impl Serialize for ExtReal {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Finite(v) => ser.serialize_f64(*v),
            PosInf => ser.serialize_str("+inf"),
            NegInf => ser.serialize_str("-inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let v = serde_json::Value::deserialize(de)?;
        match v {
            serde_json::Value::Number(n) => {
                let x = n.as_f64().ok_or_else(|| DeError::custom("bad number"))?;
                ExtReal::from_f64(x).map_err(DeError::custom)
            }
            serde_json::Value::String(s) => s.parse().map_err(DeError::custom),
            other => Err(DeError::custom(format!("bad extended real: {other}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn addition_absorbs_infinities() {
        assert_eq!(Finite(2.0).add(PosInf).unwrap(), PosInf);
        assert_eq!(Finite(1.0).add(Finite(2.0)).unwrap(), Finite(3.0));
        assert_eq!(NegInf.add(Finite(-7.0)).unwrap(), NegInf);
    }

    #[test]
    fn opposite_infinities_are_an_error() {
        assert_eq!(PosInf.add(NegInf), Err(Error::IndeterminateForm));
        assert_eq!(NegInf.add(PosInf), Err(Error::IndeterminateForm));
    }

    #[test]
    fn scale_requires_positive_finite_factor() {
        assert_eq!(ExtReal::scale(0.5, PosInf).unwrap(), PosInf);
        assert_eq!(ExtReal::scale(2.0, Finite(3.0)).unwrap(), Finite(6.0));
        assert!(matches!(
            ExtReal::scale(0.0, Finite(3.0)),
            Err(Error::ScaleNotPositive(_))
        ));
        assert!(matches!(
            ExtReal::scale(-1.0, Finite(3.0)),
            Err(Error::ScaleNotPositive(_))
        ));
        assert!(matches!(
            ExtReal::scale(f64::INFINITY, Finite(3.0)),
            Err(Error::ScaleNotPositive(_))
        ));
    }

    #[test]
    fn nan_is_rejected() {
        assert_eq!(ExtReal::finite(f64::NAN), Err(Error::NanValue));
        assert_eq!(ExtReal::from_f64(f64::NAN), Err(Error::NanValue));
    }

    #[test]
    fn order_is_total() {
        assert!(NegInf < Finite(-1e300));
        assert!(Finite(-1e300) < Finite(0.0));
        assert!(Finite(1e300) < PosInf);
        assert!(NegInf < PosInf);
        assert_eq!(Finite(2.0).max(PosInf), PosInf);
        assert_eq!(Finite(2.0).min(NegInf), NegInf);
    }

    #[test]
    fn rendering_round_trips() {
        assert_eq!(format!("{}", PosInf), "+inf");
        assert_eq!(format!("{}", NegInf), "-inf");
        assert_eq!("-inf".parse::<ExtReal>().unwrap(), NegInf);
        assert_eq!("2.5".parse::<ExtReal>().unwrap(), Finite(2.5));
        let j = serde_json::to_string(&vec![Finite(1.0), PosInf, NegInf]).unwrap();
        let back: Vec<ExtReal> = serde_json::from_str(&j).unwrap();
        assert_eq!(back, vec![Finite(1.0), PosInf, NegInf]);
    }
}
