use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ffield::{FieldVector, PointSpace, PrimeField};

/// Largest domain `q^d` materialized as an explicit table.
pub const MAX_TABLE_POINTS: u128 = 1 << 18;

const TABLE_FORMAT_VERSION: u32 = 1;

/// Explicit value table of a function `F_q^d -> F_q^l`, indexed in
/// lexicographic order of the argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionTable {
    space: PointSpace,
    range: usize,
    values: Vec<u64>,
    scalar_respecting: bool,
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    version: u32,
    q: u64,
    d: usize,
    l: usize,
    values: Vec<u64>,
}

impl FunctionTable {
    pub fn new(field: PrimeField, dim: usize, range: usize, values: Vec<u64>) -> Result<Self> {
        let space = PointSpace::new(field, dim, MAX_TABLE_POINTS)?;
        if range == 0 {
            return Err(Error::contract("function range dimension must be at least 1"));
        }
        if values.len() != space.size() * range {
            return Err(Error::DimensionMismatch {
                expected: space.size() * range,
                found: values.len(),
            });
        }
        let values = values.into_iter().map(|v| field.reduce(v)).collect();
        Ok(Self {
            space,
            range,
            values,
            scalar_respecting: false,
        })
    }

    pub fn from_fn(field: PrimeField, dim: usize, range: usize, mut f: impl FnMut(&[u64]) -> Vec<u64>) -> Result<Self> {
        let space = PointSpace::new(field, dim, MAX_TABLE_POINTS)?;
        let mut values = Vec::with_capacity(space.size() * range);
        let mut point = vec![0; dim];
        for idx in 0..space.size() {
            space.write_point(idx, &mut point);
            let out = f(&point);
            if out.len() != range {
                return Err(Error::DimensionMismatch {
                    expected: range,
                    found: out.len(),
                });
            }
            values.extend(out);
        }
        Self::new(field, dim, range, values)
    }

    /// Uniformly random table with no structure.
    pub fn random<R: Rng + ?Sized>(field: PrimeField, dim: usize, range: usize, rng: &mut R) -> Result<Self> {
        let space = PointSpace::new(field, dim, MAX_TABLE_POINTS)?;
        let values = (0..space.size() * range).map(|_| field.random(rng)).collect();
        Self::new(field, dim, range, values)
    }

    /// Uniformly random scalar-respecting table: one free value per line
    /// through the origin, extended by scalars.
    pub fn random_scalar_respecting<R: Rng + ?Sized>(
        field: PrimeField,
        dim: usize,
        range: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let raw = Self::random(field, dim, range, rng)?;
        Ok(raw.scalar_closure())
    }

    pub fn field(&self) -> PrimeField {
        self.space.field()
    }

    pub fn space(&self) -> &PointSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn range(&self) -> usize {
        self.range
    }

    pub fn domain_size(&self) -> usize {
        self.space.size()
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, index: usize) -> &[u64] {
        &self.values[index * self.range..(index + 1) * self.range]
    }

    pub fn value_vector(&self, index: usize) -> FieldVector {
        FieldVector::new(self.field(), self.value(index).to_vec())
    }

    pub fn eval(&self, point: &[u64]) -> Result<&[u64]> {
        if point.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: point.len(),
            });
        }
        Ok(self.value(self.space.index_of(point)))
    }

    pub fn set_value(&mut self, index: usize, value: &[u64]) -> Result<()> {
        if value.len() != self.range {
            return Err(Error::DimensionMismatch {
                expected: self.range,
                found: value.len(),
            });
        }
        let field = self.field();
        for (slot, &v) in self.values[index * self.range..(index + 1) * self.range]
            .iter_mut()
            .zip(value)
        {
            *slot = field.reduce(v);
        }
        self.scalar_respecting = false;
        Ok(())
    }

    /// The `i`-th output coordinate as a scalar table.
    pub fn coordinate(&self, i: usize) -> FunctionTable {
        FunctionTable {
            space: self.space,
            range: 1,
            values: (0..self.domain_size()).map(|a| self.value(a)[i]).collect(),
            scalar_respecting: self.scalar_respecting,
        }
    }

    /// Splits a point index into its canonical line representative (first
    /// nonzero coordinate equal to 1) and the scalar taking the
    /// representative to the point. The zero point maps to `(0, 0)`.
    pub fn canonical_rep(&self, index: usize) -> (usize, u64) {
        canonical_rep(&self.space, index)
    }

    /// Re-imposes `f(gamma * a) = gamma * f(a)` by keeping the value at each
    /// line representative and extending it along the line; `f(0) = 0`.
    pub fn scalar_closure(&self) -> FunctionTable {
        let field = self.field();
        let mut values = vec![0; self.values.len()];
        for idx in 1..self.domain_size() {
            let (rep, gamma) = self.canonical_rep(idx);
            let base = self.value(rep);
            for (t, slot) in values[idx * self.range..(idx + 1) * self.range].iter_mut().enumerate() {
                *slot = field.mul(gamma, base[t]);
            }
        }
        FunctionTable {
            space: self.space,
            range: self.range,
            values,
            scalar_respecting: true,
        }
    }

    /// First `(gamma, alpha)` with `f(gamma * alpha) != gamma * f(alpha)`, by exhaustion.
    pub fn scalar_violation(&self) -> Option<(u64, usize)> {
        let field = self.field();
        for alpha in 0..self.domain_size() {
            let fa = self.value(alpha);
            for gamma in 0..field.modulus() {
                let scaled = self.value(self.space.scale_index(gamma, alpha));
                if fa.iter().zip(scaled).any(|(&a, &s)| field.mul(gamma, a) != s) {
                    return Some((gamma, alpha));
                }
            }
        }
        None
    }

    pub fn is_scalar_respecting(&self) -> bool {
        self.scalar_respecting || self.scalar_violation().is_none()
    }

    /// Sets the scalar-respecting flag after verifying it exhaustively.
    pub fn into_scalar_respecting(mut self) -> Result<Self> {
        self.require_scalar_respecting()?;
        self.scalar_respecting = true;
        Ok(self)
    }

    pub fn flagged_scalar_respecting(&self) -> bool {
        self.scalar_respecting
    }

    pub(crate) fn require_scalar_respecting(&self) -> Result<()> {
        if self.scalar_respecting {
            return Ok(());
        }
        match self.scalar_violation() {
            None => Ok(()),
            Some((gamma, alpha)) => Err(Error::contract(format!(
                "function is not scalar respecting: f({gamma}*{:?}) != {gamma}*f({:?})",
                self.space.point(alpha),
                self.space.point(alpha)
            ))),
        }
    }

    pub(crate) fn require_scalar_range(&self) -> Result<()> {
        if self.range != 1 {
            return Err(Error::contract(format!(
                "expected a scalar-valued function, found range dimension {}",
                self.range
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&TableFile {
            version: TABLE_FORMAT_VERSION,
            q: self.field().modulus(),
            d: self.dim(),
            l: self.range,
            values: self.values.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TableFile = serde_json::from_str(text)?;
        if file.version != TABLE_FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported function table version {}",
                file.version
            )));
        }
        if file.values.iter().any(|&v| v >= file.q) {
            return Err(Error::Parse("table value outside [0, q)".into()));
        }
        Self::new(PrimeField::new(file.q)?, file.d, file.l, file.values)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

pub(crate) fn canonical_rep(space: &PointSpace, index: usize) -> (usize, u64) {
    if index == 0 {
        return (0, 0);
    }
    let field = space.field();
    let point = space.point(index);
    let lead = point.iter().copied().find(|&c| c != 0).expect("nonzero point");
    let inv = field.inv(lead).expect("nonzero lead");
    (space.scale_index(inv, index), lead)
}
