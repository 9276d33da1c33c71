//! Exact rationals and the small amount of interval statistics the checkers report.

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

/// Exact non-negative rational. Denominators at desk scale stay far below 2^64.
pub type Fraction = Ratio<u64>;

/// Two-sided normal quantile for 95% intervals.
pub const Z95: f64 = 1.959_963_984_540_054;
/// Two-sided normal quantile for 99% intervals.
pub const Z99: f64 = 2.575_829_303_548_901;

pub fn frac(num: u64, den: u64) -> Fraction {
    Ratio::new(num, den)
}

pub fn to_f64(f: &Fraction) -> f64 {
    f.to_f64().unwrap_or(f64::NAN)
}

/// Wilson score interval for `successes` out of `trials`. `None` when `trials == 0`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> Option<(f64, f64)> {
    if trials == 0 {
        return None;
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Some(((centre - half).max(0.0), (centre + half).min(1.0)))
}

/// A Bernoulli rate with its Wilson interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub hits: u64,
    pub trials: u64,
    pub rate: Option<f64>,
    pub wilson_low: Option<f64>,
    pub wilson_high: Option<f64>,
}

impl RateEstimate {
    pub fn new(hits: u64, trials: u64, z: f64) -> Self {
        let interval = wilson_interval(hits, trials, z);
        Self {
            hits,
            trials,
            rate: (trials > 0).then(|| hits as f64 / trials as f64),
            wilson_low: interval.map(|i| i.0),
            wilson_high: interval.map(|i| i.1),
        }
    }
}

/// Serde adapter rendering a [`Fraction`] as the exact string `"num/den"`.
pub mod fraction_serde {
    use super::Fraction;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(f: &Fraction, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", f.numer(), f.denom()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Fraction, D::Error> {
        let text = String::deserialize(d)?;
        super::parse_fraction(&text).map_err(D::Error::custom)
    }
}

/// `Vec<Fraction>` flavour of [`fraction_serde`].
pub mod fraction_vec_serde {
    use super::Fraction;
    use serde::{ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Fraction], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for f in v {
            seq.serialize_element(&format!("{}/{}", f.numer(), f.denom()))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Fraction>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|t| super::parse_fraction(t).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Parses `"a/b"` or `"a"`.
pub fn parse_fraction(text: &str) -> Result<Fraction, String> {
    let text = text.trim();
    let (n, d) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let n: u64 = n.parse().map_err(|_| format!("bad numerator in {text:?}"))?;
    let d: u64 = d.parse().map_err(|_| format!("bad denominator in {text:?}"))?;
    if d == 0 {
        return Err(format!("zero denominator in {text:?}"));
    }
    Ok(Ratio::new(n, d))
}
