//! Machine-readable encodings shared by every exported record.
//!
//! Rationals are written as `{"num": "...", "den": "...", "approx": f64}`;
//! the numerator and denominator strings are authoritative and `approx` is
//! informational only.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::combinatorics::ExactRational;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalRepr {
    pub num: String,
    pub den: String,
    #[serde(default)]
    pub approx: Option<f64>,
}

impl From<&ExactRational> for RationalRepr {
    fn from(q: &ExactRational) -> Self {
        Self {
            num: q.numer().to_string(),
            den: q.denom().to_string(),
            approx: q.to_f64().filter(|x| x.is_finite()),
        }
    }
}

impl TryFrom<RationalRepr> for ExactRational {
    type Error = String;

    fn try_from(repr: RationalRepr) -> Result<Self, String> {
        let num: BigInt = repr.num.parse().map_err(|e| format!("bad numerator: {e}"))?;
        let den: BigInt = repr.den.parse().map_err(|e| format!("bad denominator: {e}"))?;
        if den.is_zero() {
            return Err("zero denominator".into());
        }
        Ok(BigRational::new(num, den))
    }
}

/// `#[serde(with = "rational")]` for a single exact rational.
pub mod rational {
    use super::*;

    pub fn serialize<S: Serializer>(q: &ExactRational, s: S) -> Result<S::Ok, S::Error> {
        RationalRepr::from(q).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ExactRational, D::Error> {
        ExactRational::try_from(RationalRepr::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "rational_vec")]` for a list of exact rationals.
pub mod rational_vec {
    use super::*;

    pub fn serialize<S: Serializer>(qs: &[ExactRational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(qs.iter().map(RationalRepr::from))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<ExactRational>, D::Error> {
        Vec::<RationalRepr>::deserialize(d)?
            .into_iter()
            .map(|r| ExactRational::try_from(r).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// `#[serde(with = "rational_map")]` for count-indexed probabilities.
pub mod rational_map {
    use super::*;

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<u64, ExactRational>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        s.collect_map(map.iter().map(|(k, q)| (k.to_string(), RationalRepr::from(q))))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<u64, ExactRational>, D::Error> {
        BTreeMap::<String, RationalRepr>::deserialize(d)?
            .into_iter()
            .map(|(k, r)| {
                let key = k.parse().map_err(serde::de::Error::custom)?;
                let q = ExactRational::try_from(r).map_err(serde::de::Error::custom)?;
                Ok((key, q))
            })
            .collect()
    }
}

/// `num/den` (or just `num` for integers).
pub fn fraction_string(q: &ExactRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `num/den` or an integer.
pub fn parse_fraction(s: &str) -> Option<ExactRational> {
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim().parse().ok()?, b.trim().parse().ok()?),
        None => (s.trim().parse().ok()?, BigInt::from(1)),
    };
    (!BigInt::is_zero(&den)).then(|| BigRational::new(num, den))
}

/// Scientific rendering with `digits` significant digits, computed exactly
/// (so tiny margins do not underflow to zero). Rounds half away from zero.
pub fn decimal_sig(q: &ExactRational, digits: usize) -> String {
    if q.is_zero() {
        return format!("{:.*}e0", digits.saturating_sub(1), 0.0);
    }
    let digits = digits.max(1);
    let sign = if q.is_negative() { "-" } else { "" };
    let num = q.numer().abs();
    let den = q.denom().clone();
    let ten = BigInt::from(10);

    // exponent e with 10^e <= |q| < 10^(e+1)
    let mut e = num.to_string().len() as i64 - den.to_string().len() as i64;
    let at_least = |e: i64| -> bool {
        if e >= 0 {
            num >= &den * ten.pow(e as u32)
        } else {
            &num * ten.pow((-e) as u32) >= den
        }
    };
    while !at_least(e) {
        e -= 1;
    }
    while at_least(e + 1) {
        e += 1;
    }

    // mantissa = round(|q| * 10^(digits - 1 - e))
    let shift = digits as i64 - 1 - e;
    let (scaled_num, scaled_den) = if shift >= 0 {
        (&num * ten.pow(shift as u32), den.clone())
    } else {
        (num.clone(), &den * ten.pow((-shift) as u32))
    };
    let mut mantissa: BigInt = (&scaled_num * 2 + &scaled_den) / (&scaled_den * 2);
    if mantissa >= ten.pow(digits as u32) {
        mantissa /= 10;
        e += 1;
    }
    let text = mantissa.to_str_radix(10);
    let (head, tail) = text.split_at(1);
    if tail.is_empty() {
        format!("{sign}{head}e{e}")
    } else {
        format!("{sign}{head}.{tail}e{e}")
    }
}

/// Twelve significant digits, the precision used for margins.
pub fn decimal12(q: &ExactRational) -> String {
    decimal_sig(q, 12)
}
