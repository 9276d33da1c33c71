use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::params::ReductionParams;
use crate::error::{Error, Result};
use crate::ffield::{checked_pow, PrimeField};

/// A vertex `(alpha, beta, x, y)` with `alpha, beta` in `F_q^{k^2}` and
/// `x, y` in `F_q^l`, constrained by `alpha = beta => x = y`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vertex {
    pub alpha: Vec<u64>,
    pub beta: Vec<u64>,
    pub x: Vec<u64>,
    pub y: Vec<u64>,
}

fn add(field: PrimeField, a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(&s, &t)| field.add(s, t)).collect()
}

impl Vertex {
    pub fn new(params: &ReductionParams, alpha: Vec<u64>, beta: Vec<u64>, x: Vec<u64>, y: Vec<u64>) -> Result<Self> {
        let v = Self { alpha, beta, x, y };
        v.validate(params)?;
        Ok(v)
    }

    pub fn validate(&self, params: &ReductionParams) -> Result<()> {
        let d = params.k * params.k;
        for (part, len) in [
            (&self.alpha, d),
            (&self.beta, d),
            (&self.x, params.ell),
            (&self.y, params.ell),
        ] {
            if part.len() != len {
                return Err(Error::DimensionMismatch {
                    expected: len,
                    found: part.len(),
                });
            }
            if let Some(&c) = part.iter().find(|&&c| c >= params.q) {
                return Err(Error::contract(format!("{c} is not a residue mod {}", params.q)));
            }
        }
        if self.alpha == self.beta && self.x != self.y {
            return Err(Error::contract("alpha = beta requires x = y"));
        }
        Ok(())
    }

    /// `alpha + beta`.
    pub fn sum_point(&self, field: PrimeField) -> Vec<u64> {
        add(field, &self.alpha, &self.beta)
    }

    /// `var(v) = {alpha, beta, alpha + beta}` without repetitions, in that order.
    pub fn var(&self, field: PrimeField) -> Vec<Vec<u64>> {
        let mut out: Vec<Vec<u64>> = Vec::with_capacity(3);
        for p in [self.alpha.clone(), self.beta.clone(), self.sum_point(field)] {
            if !out.contains(&p) {
                out.push(p);
            }
        }
        out
    }

    /// The three `(point, value)` pairs `alpha -> x`, `beta -> y` and
    /// `alpha + beta -> x + y`. Points repeat when they collide.
    pub fn raw_labels(&self, field: PrimeField) -> [(Vec<u64>, Vec<u64>); 3] {
        [
            (self.alpha.clone(), self.x.clone()),
            (self.beta.clone(), self.y.clone()),
            (self.sum_point(field), add(field, &self.x, &self.y)),
        ]
    }

    /// `v` as a function on `var(v)`: each point once, valued by the first of
    /// `alpha -> x`, `beta -> y`, `alpha + beta -> x + y` that names it.
    pub fn assignment(&self, field: PrimeField) -> Vec<(Vec<u64>, Vec<u64>)> {
        let mut out: Vec<(Vec<u64>, Vec<u64>)> = Vec::with_capacity(3);
        for (p, val) in self.raw_labels(field) {
            if out.iter().all(|(q, _)| *q != p) {
                out.push((p, val));
            }
        }
        out
    }

    /// Whether colliding points of `var(v)` are named with equal values.
    pub fn is_self_consistent(&self, field: PrimeField) -> bool {
        let labels = self.raw_labels(field);
        labels
            .iter()
            .all(|(p, val)| labels.iter().all(|(p2, val2)| p != p2 || val == val2))
    }
}

/// `v(rho)`: `x`, `y` or `x + y` for `rho` equal to `alpha`, `beta` or
/// `alpha + beta`, checked in that order.
pub fn vertex_eval(v: &Vertex, rho: &[u64], field: PrimeField) -> Result<Vec<u64>> {
    v.assignment(field)
        .into_iter()
        .find(|(p, _)| p == rho)
        .map(|(_, val)| val)
        .ok_or_else(|| Error::contract(format!("{rho:?} is not in var(v)")))
}

/// Exact `|V| = (q^{2k^2} - q^{k^2}) q^{2l} + q^{k^2} q^l`.
pub fn vertex_count(q: u64, k: usize, ell: usize) -> BigUint {
    let side = BigUint::from(q).pow((k * k) as u32);
    let fiber = BigUint::from(q).pow(ell as u32);
    (&side * &side - &side) * &fiber * &fiber + side * fiber
}

/// Bijection between `V` and `0..|V|`.
///
/// Vertices are grouped into clouds by `(alpha, beta)`, ordered by
/// `index(alpha) * q^{k^2} + index(beta)`. Off-diagonal clouds hold `q^{2l}`
/// vertices ranked by `(x, y)`, diagonal clouds hold `q^l` ranked by `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VertexCodec {
    q: u64,
    d: usize,
    ell: usize,
    side: u64,
    fiber: u64,
    count: u64,
}

impl VertexCodec {
    /// Refuses parameters whose vertex count does not fit in 64 bits.
    pub fn new(params: &ReductionParams) -> Result<Self> {
        let q = params.q as u128;
        let d = params.k * params.k;
        let too_big = || {
            let exact = vertex_count(params.q, params.k, params.ell);
            Error::Refused(format!("|V| = {exact} does not fit a 64-bit vertex index"))
        };
        let side = checked_pow(q, d as u32).ok_or_else(too_big)?;
        let fiber = checked_pow(q, params.ell as u32).ok_or_else(too_big)?;
        let count = side
            .checked_mul(side)
            .and_then(|s2| s2.checked_sub(side))
            .and_then(|off| off.checked_mul(fiber))
            .and_then(|off| off.checked_mul(fiber))
            .and_then(|off| off.checked_add(side.checked_mul(fiber)?))
            .filter(|&c| c <= u64::MAX as u128)
            .ok_or_else(too_big)?;
        Ok(Self {
            q: params.q,
            d,
            ell: params.ell,
            side: side as u64,
            fiber: fiber as u64,
            count: count as u64,
        })
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    fn index_of(&self, point: &[u64]) -> u64 {
        point.iter().fold(0, |acc, &c| acc * self.q + c)
    }

    fn point(&self, mut index: u64, len: usize) -> Vec<u64> {
        let mut p = vec![0; len];
        for slot in p.iter_mut().rev() {
            *slot = index % self.q;
            index /= self.q;
        }
        p
    }

    /// First rank of the cloud with pair index `p = a * side + b`.
    fn cloud_offset(&self, p: u64) -> u64 {
        let (a, b) = (p / self.side, p % self.side);
        let diag = a + u64::from(a < b);
        (p - diag) * self.fiber * self.fiber + diag * self.fiber
    }

    pub fn rank(&self, v: &Vertex) -> Result<u64> {
        if v.alpha.len() != self.d || v.beta.len() != self.d || v.x.len() != self.ell || v.y.len() != self.ell {
            return Err(Error::contract("vertex shape does not match the codec"));
        }
        let (a, b) = (self.index_of(&v.alpha), self.index_of(&v.beta));
        let base = self.cloud_offset(a * self.side + b);
        let (x, y) = (self.index_of(&v.x), self.index_of(&v.y));
        if a == b {
            if x != y {
                return Err(Error::contract("alpha = beta requires x = y"));
            }
            Ok(base + x)
        } else {
            Ok(base + x * self.fiber + y)
        }
    }

    pub fn unrank(&self, r: u64) -> Result<Vertex> {
        if r >= self.count {
            return Err(Error::contract(format!("rank {r} out of range 0..{}", self.count)));
        }
        let (mut lo, mut hi) = (0u64, self.side * self.side - 1);
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            if self.cloud_offset(mid) <= r {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        let (a, b) = (lo / self.side, lo % self.side);
        let within = r - self.cloud_offset(lo);
        let (x, y) = if a == b {
            (within, within)
        } else {
            (within / self.fiber, within % self.fiber)
        };
        Ok(Vertex {
            alpha: self.point(a, self.d),
            beta: self.point(b, self.d),
            x: self.point(x, self.ell),
            y: self.point(y, self.ell),
        })
    }
}
