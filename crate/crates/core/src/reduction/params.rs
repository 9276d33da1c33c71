use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ffield::PrimeField;
use crate::stats::{frac, Fraction};

/// The gap function `F` of the hardness statement, evaluated on big integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum GapFunction {
    Identity,
    /// `floor(log2 x)`.
    Log2,
    Constant(u64),
}

impl GapFunction {
    pub fn eval(&self, x: &BigUint) -> Result<BigUint> {
        match self {
            GapFunction::Identity => Ok(x.clone()),
            GapFunction::Log2 => {
                if x.is_zero() {
                    return Err(Error::contract("log2 of zero"));
                }
                Ok(BigUint::from(x.bits() - 1))
            }
            GapFunction::Constant(c) => Ok(BigUint::from(*c)),
        }
    }

    /// `F'(x) = min(F(x), floor(log2(x) / 15))`.
    pub fn normalized(&self, x: &BigUint) -> Result<BigUint> {
        if x.is_zero() {
            return Err(Error::contract("the normalized gap function needs x >= 1"));
        }
        let cap = BigUint::from((x.bits() - 1) / 15);
        Ok(self.eval(x)?.min(cap))
    }
}

const WITNESSES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Miller-Rabin with the first thirteen prime bases, which is a proof of
/// primality below `3.3 * 10^24`.
pub fn is_probable_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u8);
    if *n < two {
        return false;
    }
    for &p in &WITNESSES {
        let p = BigUint::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - 1u8;
    let s = n_minus_1.trailing_zeros().expect("n > 2");
    let d = &n_minus_1 >> s;
    'witness: for &a in &WITNESSES {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn primality_is_proven(n: &BigUint) -> bool {
    n.bits() <= 81
}

/// The smallest prime strictly greater than `n`.
pub fn next_prime_above(n: &BigUint) -> BigUint {
    let mut c = n + 1u8;
    while !is_probable_prime(&c) {
        c += 1u8;
    }
    c
}

/// `q_hat(k)`, the smallest prime above `2^{12k}`.
pub fn q_hat(k: usize) -> BigUint {
    next_prime_above(&(BigUint::one() << (12 * k)))
}

/// `Lambda(k) = q_hat(k)^{2k^2}`.
pub fn lambda(k: usize) -> BigUint {
    q_hat(k).pow(2 * (k * k) as u32)
}

mod big_decimal {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let text = String::deserialize(d)?;
        BigUint::parse_bytes(text.as_bytes(), 10)
            .ok_or_else(|| serde::de::Error::custom(format!("not a decimal integer: {text}")))
    }
}

/// The parameter schedule that ties the field size and clique size to `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperSchedule {
    pub k: usize,
    pub n: usize,
    pub gap: GapFunction,
    #[serde(with = "big_decimal")]
    pub q_hat: BigUint,
    /// False when `q_hat` is only a strong probable prime.
    pub q_hat_proven_prime: bool,
    #[serde(with = "big_decimal")]
    pub lambda: BigUint,
    /// `ceil(12 log_q n)`.
    pub ell: usize,
    /// `F'(Lambda(k))`.
    #[serde(with = "big_decimal")]
    pub normalized_gap: BigUint,
    /// `2k^3`, which the normalized gap must stay strictly below.
    pub gap_bound: u64,
}

/// Computes the schedule exactly and checks `F'(q_hat(k)^{2k^2}) < 2k^3`.
pub fn param_schedule(k: usize, n: usize, gap: GapFunction) -> Result<PaperSchedule> {
    if k == 0 {
        return Err(Error::contract("k must be at least 1"));
    }
    let q_hat = q_hat(k);
    let lambda = q_hat.pow(2 * (k * k) as u32);
    let normalized_gap = gap.normalized(&lambda)?;
    let gap_bound = 2 * (k as u64).pow(3);
    if normalized_gap >= BigUint::from(gap_bound) {
        return Err(Error::PropertyViolation(format!(
            "normalized gap {normalized_gap} is not below 2k^3 = {gap_bound}"
        )));
    }
    let log_q = q_hat.bits() as f64 - 1.0 + leading_fraction(&q_hat);
    let ell = ((12.0 * (n.max(2) as f64).log2() / log_q).ceil() as usize).max(1);
    Ok(PaperSchedule {
        k,
        n,
        gap,
        q_hat_proven_prime: primality_is_proven(&q_hat),
        q_hat,
        lambda,
        ell,
        normalized_gap,
        gap_bound,
    })
}

/// `log2(x) - floor(log2(x))` from the top 53 bits.
fn leading_fraction(x: &BigUint) -> f64 {
    let shift = x.bits().saturating_sub(53);
    let top = (x >> shift).to_f64().expect("53 bits fit");
    top.log2() - (x.bits() - 1 - shift) as f64
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mode {
    /// `q`, `k` and `l` chosen freely.
    Desk,
    PaperFaithful(PaperSchedule),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionParams {
    pub q: u64,
    pub k: usize,
    pub ell: usize,
    pub mode: Mode,
}

impl ReductionParams {
    pub fn desk(q: u64, k: usize, ell: usize) -> Result<Self> {
        PrimeField::new(q)?;
        if k == 0 || ell == 0 {
            return Err(Error::contract("k and l must be at least 1"));
        }
        Ok(Self {
            q,
            k,
            ell,
            mode: Mode::Desk,
        })
    }

    pub fn paper_faithful(k: usize, n: usize, gap: GapFunction) -> Result<Self> {
        let schedule = param_schedule(k, n, gap)?;
        let q = schedule.q_hat.to_u64().ok_or_else(|| {
            Error::Refused(format!(
                "q_hat({k}) = {} does not fit word-sized field arithmetic",
                schedule.q_hat
            ))
        })?;
        Ok(Self {
            q,
            k,
            ell: schedule.ell,
            mode: Mode::PaperFaithful(schedule),
        })
    }

    pub fn field(&self) -> PrimeField {
        PrimeField::new(self.q).expect("validated on construction")
    }

    /// `q^{k^2}`, the size of one coordinate space.
    pub fn cloud_side(&self) -> BigUint {
        BigUint::from(self.q).pow((self.k * self.k) as u32)
    }

    /// `q^{2k^2}`, the clique size in the completeness case.
    pub fn clique_target(&self) -> BigUint {
        BigUint::from(self.q).pow((2 * self.k * self.k) as u32)
    }

    pub fn is_desk(&self) -> bool {
        matches!(self.mode, Mode::Desk)
    }
}

/// The soundness threshold on clique sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "value", rename_all = "snake_case")]
pub enum EpsilonRule {
    /// `eps = q^{-1/k}`.
    Root,
    #[serde(with = "crate::stats::fraction_serde")]
    Fixed(Fraction),
}

impl EpsilonRule {
    /// Whether `size >= eps * q^{2k^2}`, decided exactly.
    pub fn admits(&self, size: usize, q: u64, k: usize) -> bool {
        let q = BigUint::from(q);
        let full = q.pow((2 * k * k) as u32);
        match self {
            EpsilonRule::Root => {
                let lhs = BigUint::from(size).pow(k as u32);
                lhs >= q.pow((2 * k * k * k - 1) as u32)
            }
            EpsilonRule::Fixed(eps) => {
                BigUint::from(size) * BigUint::from(*eps.denom()) >= full * BigUint::from(*eps.numer())
            }
        }
    }

    /// A rational lower bound on `eps`, accurate to about `10^-9`.
    pub fn lower_fraction(&self, q: u64, k: usize) -> Fraction {
        match self {
            EpsilonRule::Fixed(eps) => *eps,
            EpsilonRule::Root => {
                const DEN: u64 = 1_000_000_000;
                let eps = (q as f64).powf(-1.0 / k as f64);
                frac(((eps * DEN as f64).floor() as u64).saturating_sub(1), DEN)
            }
        }
    }
}

/// `kappa = 1 / (8k)`.
pub fn default_kappa(k: usize) -> Fraction {
    frac(1, 8 * k as u64)
}
