//! Exact arithmetic over prime fields: scalars, vectors, block vectors,
//! matrices, the inner product, the block operator `M` and relative Hamming
//! distance.
//!
//! Residues are always stored canonically in `[0, q)`. Products are computed in
//! `u64` when `q < 2^32` and widened to `u128` otherwise.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::Fraction;

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    'witness: for a in SMALL {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The field `F_q` for a prime `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct PrimeField {
    q: u64,
}

impl TryFrom<u64> for PrimeField {
    type Error = Error;
    fn try_from(q: u64) -> Result<Self> {
        PrimeField::new(q)
    }
}

impl From<PrimeField> for u64 {
    fn from(f: PrimeField) -> u64 {
        f.q
    }
}

/// Scalar operations exposed by [`PrimeField::apply`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Neg,
    Inv,
}

impl PrimeField {
    pub fn new(q: u64) -> Result<Self> {
        if !is_prime_u64(q) {
            return Err(Error::NotPrime(q));
        }
        Ok(Self { q })
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.q
    }

    #[inline]
    pub fn reduce(&self, a: u64) -> u64 {
        a % self.q
    }

    pub fn from_i64(&self, a: i64) -> u64 {
        a.rem_euclid(self.q as i64) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let (s, overflow) = a.overflowing_add(b);
        if overflow || s >= self.q {
            s.wrapping_sub(self.q)
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.q - (b - a)
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if self.q <= u32::MAX as u64 {
            (a * b) % self.q
        } else {
            ((a as u128 * b as u128) % self.q as u128) as u64
        }
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.q;
        base %= self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inv(&self, a: u64) -> Result<u64> {
        let a = a % self.q;
        if a == 0 {
            return Err(Error::ZeroInverse);
        }
        Ok(self.pow(a, self.q - 2))
    }

    /// Applies a scalar operation; `b` is required for the binary ones.
    pub fn apply(&self, op: FieldOp, a: u64, b: Option<u64>) -> Result<u64> {
        let a = self.reduce(a);
        let rhs = || {
            b.map(|b| self.reduce(b))
                .ok_or_else(|| Error::contract(format!("{op:?} needs two operands")))
        };
        Ok(match op {
            FieldOp::Add => self.add(a, rhs()?),
            FieldOp::Sub => self.sub(a, rhs()?),
            FieldOp::Mul => self.mul(a, rhs()?),
            FieldOp::Neg => self.neg(a),
            FieldOp::Inv => self.inv(a)?,
        })
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.random_range(0..self.q)
    }
}

/// A vector in `F_q^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldVector {
    field: PrimeField,
    entries: Vec<u64>,
}

impl FieldVector {
    /// Builds a vector, reducing every entry into `[0, q)`.
    pub fn new(field: PrimeField, entries: Vec<u64>) -> Self {
        let entries = entries.into_iter().map(|e| field.reduce(e)).collect();
        Self { field, entries }
    }

    pub fn from_i64(field: PrimeField, entries: &[i64]) -> Self {
        Self {
            field,
            entries: entries.iter().map(|&e| field.from_i64(e)).collect(),
        }
    }

    pub fn zeros(field: PrimeField, dim: usize) -> Self {
        Self {
            field,
            entries: vec![0; dim],
        }
    }

    pub fn unit(field: PrimeField, dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(field, dim);
        v.entries[i] = 1 % field.modulus();
        v
    }

    pub fn random<R: Rng + ?Sized>(field: PrimeField, dim: usize, rng: &mut R) -> Self {
        Self {
            field,
            entries: (0..dim).map(|_| field.random(rng)).collect(),
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<u64> {
        self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    fn check_compatible(&self, other: &FieldVector) -> Result<()> {
        if self.field != other.field {
            return Err(Error::ModulusMismatch {
                left: self.field.modulus(),
                right: other.field.modulus(),
            });
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &FieldVector) -> Result<FieldVector> {
        self.check_compatible(other)?;
        let f = self.field;
        Ok(Self {
            field: f,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| f.add(a, b))
                .collect(),
        })
    }

    pub fn sub(&self, other: &FieldVector) -> Result<FieldVector> {
        self.check_compatible(other)?;
        let f = self.field;
        Ok(Self {
            field: f,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| f.sub(a, b))
                .collect(),
        })
    }

    pub fn neg(&self) -> FieldVector {
        let f = self.field;
        Self {
            field: f,
            entries: self.entries.iter().map(|&a| f.neg(a)).collect(),
        }
    }

    pub fn scale(&self, gamma: u64) -> FieldVector {
        let f = self.field;
        let gamma = f.reduce(gamma);
        Self {
            field: f,
            entries: self.entries.iter().map(|&a| f.mul(gamma, a)).collect(),
        }
    }

    /// In-place `self += gamma * other`.
    pub fn add_scaled(&mut self, gamma: u64, other: &FieldVector) -> Result<()> {
        self.check_compatible(other)?;
        let f = self.field;
        for (a, &b) in self.entries.iter_mut().zip(&other.entries) {
            *a = f.add(*a, f.mul(gamma, b));
        }
        Ok(())
    }
}

/// `t` blocks of width `d`, stored contiguously.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockVector {
    vector: FieldVector,
    blocks: usize,
    width: usize,
}

impl BlockVector {
    pub fn new(vector: FieldVector, blocks: usize, width: usize) -> Result<Self> {
        if blocks * width != vector.dim() {
            return Err(Error::BlockShape(format!(
                "{blocks} blocks of width {width} cannot hold a vector of length {}",
                vector.dim()
            )));
        }
        Ok(Self { vector, blocks, width })
    }

    pub fn from_blocks(field: PrimeField, blocks: &[FieldVector]) -> Result<Self> {
        let width = blocks.first().map_or(0, FieldVector::dim);
        let mut entries = Vec::with_capacity(width * blocks.len());
        for b in blocks {
            if b.dim() != width {
                return Err(Error::BlockShape("blocks of unequal width".into()));
            }
            if b.field() != field {
                return Err(Error::ModulusMismatch {
                    left: field.modulus(),
                    right: b.field().modulus(),
                });
            }
            entries.extend_from_slice(b.entries());
        }
        Self::new(FieldVector { field, entries }, blocks.len(), width)
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn block(&self, i: usize) -> &[u64] {
        &self.vector.entries[i * self.width..(i + 1) * self.width]
    }

    pub fn as_vector(&self) -> &FieldVector {
        &self.vector
    }

    pub fn into_vector(self) -> FieldVector {
        self.vector
    }

    pub fn sub(&self, other: &BlockVector) -> Result<BlockVector> {
        if (self.blocks, self.width) != (other.blocks, other.width) {
            return Err(Error::BlockShape(format!(
                "{}x{} vs {}x{}",
                self.blocks, self.width, other.blocks, other.width
            )));
        }
        Ok(Self {
            vector: self.vector.sub(&other.vector)?,
            blocks: self.blocks,
            width: self.width,
        })
    }

    pub fn add(&self, other: &BlockVector) -> Result<BlockVector> {
        if (self.blocks, self.width) != (other.blocks, other.width) {
            return Err(Error::BlockShape(format!(
                "{}x{} vs {}x{}",
                self.blocks, self.width, other.blocks, other.width
            )));
        }
        Ok(Self {
            vector: self.vector.add(&other.vector)?,
            blocks: self.blocks,
            width: self.width,
        })
    }
}

/// A `rows x cols` matrix over `F_q`, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldMatrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    entries: Vec<u64>,
}

impl FieldMatrix {
    pub fn new(field: PrimeField, rows: usize, cols: usize, entries: Vec<u64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        let entries = entries.into_iter().map(|e| field.reduce(e)).collect();
        Ok(Self {
            field,
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self {
            field,
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1 % field.modulus();
        }
        m
    }

    /// Matrix whose rows are the given vectors.
    pub fn from_rows(field: PrimeField, rows: &[FieldVector]) -> Result<Self> {
        let cols = rows.first().map_or(0, FieldVector::dim);
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.dim() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.dim(),
                });
            }
            entries.extend_from_slice(r.entries());
        }
        Self::new(field, rows.len(), cols, entries)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.entries[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }
}

#[inline]
pub(crate) fn dot(field: PrimeField, a: &[u64], b: &[u64]) -> u64 {
    let q = field.modulus();
    if q <= u32::MAX as u64 {
        // Accumulate in u128 and reduce once; entries are < 2^32 so each
        // product is < 2^64.
        let mut acc: u128 = 0;
        for (&x, &y) in a.iter().zip(b) {
            acc += (x * y) as u128;
        }
        (acc % q as u128) as u64
    } else {
        a.iter().zip(b).fold(0, |acc, (&x, &y)| field.add(acc, field.mul(x, y)))
    }
}

/// `<a, b> = sum_i a_i b_i` over `F_q`.
pub fn inner_product(a: &FieldVector, b: &FieldVector) -> Result<u64> {
    a.check_compatible(b)?;
    Ok(dot(a.field, &a.entries, &b.entries))
}

/// The block operator `M(a, b) = (<a, b_1>, ..., <a, b_t>)`.
pub fn block_inner(a: &FieldVector, b: &BlockVector) -> Result<FieldVector> {
    if b.width != a.dim() {
        return Err(Error::BlockShape(format!(
            "block width {} does not match vector length {}",
            b.width,
            a.dim()
        )));
    }
    if a.field != b.vector.field {
        return Err(Error::ModulusMismatch {
            left: a.field.modulus(),
            right: b.vector.field.modulus(),
        });
    }
    Ok(FieldVector {
        field: a.field,
        entries: (0..b.blocks).map(|i| dot(a.field, &a.entries, b.block(i))).collect(),
    })
}

pub fn mat_vec(a: &FieldMatrix, b: &FieldVector) -> Result<FieldVector> {
    if a.cols != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.cols,
            found: b.dim(),
        });
    }
    if a.field != b.field {
        return Err(Error::ModulusMismatch {
            left: a.field.modulus(),
            right: b.field.modulus(),
        });
    }
    Ok(FieldVector {
        field: a.field,
        entries: (0..a.rows).map(|r| dot(a.field, a.row(r), &b.entries)).collect(),
    })
}

/// Relative Hamming distance `|{i : x_i != y_i}| / d`, exactly.
pub fn rel_hamming(x: &FieldVector, y: &FieldVector) -> Result<Fraction> {
    x.check_compatible(y)?;
    if x.dim() == 0 {
        return Err(Error::contract("relative distance of empty vectors"));
    }
    let differing = x.entries.iter().zip(&y.entries).filter(|(a, b)| a != b).count();
    Ok(Fraction::new(differing as u64, x.dim() as u64))
}

/// Relative Hamming weight `||x|| = rel_hamming(x, 0)`.
pub fn weight(x: &FieldVector) -> Result<Fraction> {
    if x.dim() == 0 {
        return Err(Error::contract("relative weight of an empty vector"));
    }
    let nonzero = x.entries.iter().filter(|&&e| e != 0).count();
    Ok(Fraction::new(nonzero as u64, x.dim() as u64))
}

/// Matrix with i.i.d. uniform entries.
pub fn sample_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, field: PrimeField) -> FieldMatrix {
    FieldMatrix {
        field,
        rows,
        cols,
        entries: (0..rows * cols).map(|_| field.random(rng)).collect(),
    }
}

/// Indexing of `F_q^d` in lexicographic order, first coordinate most significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointSpace {
    field: PrimeField,
    dim: usize,
    size: usize,
}

impl PointSpace {
    /// Fails when `q^d` does not fit the index type or exceeds `cap`.
    pub fn new(field: PrimeField, dim: usize, cap: u128) -> Result<Self> {
        let size = checked_pow(field.modulus() as u128, dim as u32)
            .ok_or_else(|| Error::budget("point space", u128::MAX, cap))?;
        crate::error::check_budget("point space", size, cap.min(usize::MAX as u128))?;
        Ok(Self {
            field,
            dim,
            size: size as usize,
        })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn index_of(&self, point: &[u64]) -> usize {
        let q = self.field.modulus() as usize;
        point.iter().fold(0usize, |acc, &c| acc * q + c as usize)
    }

    pub fn write_point(&self, mut index: usize, out: &mut [u64]) {
        let q = self.field.modulus() as usize;
        for slot in out.iter_mut().rev() {
            *slot = (index % q) as u64;
            index /= q;
        }
    }

    pub fn point(&self, index: usize) -> Vec<u64> {
        let mut p = vec![0; self.dim];
        self.write_point(index, &mut p);
        p
    }

    pub fn vector(&self, index: usize) -> FieldVector {
        FieldVector {
            field: self.field,
            entries: self.point(index),
        }
    }

    /// Index of the sum of two points, digit by digit.
    pub fn add_index(&self, mut a: usize, mut b: usize) -> usize {
        let q = self.field.modulus() as usize;
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.dim {
            let s = (a % q + b % q) % q;
            out += s * place;
            place *= q;
            a /= q;
            b /= q;
        }
        out
    }

    pub fn scale_index(&self, gamma: u64, mut a: usize) -> usize {
        let q = self.field.modulus() as usize;
        let gamma = (gamma % q as u64) as usize;
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.dim {
            out += (gamma * (a % q) % q) * place;
            place *= q;
            a /= q;
        }
        out
    }

    pub fn neg_index(&self, a: usize) -> usize {
        self.scale_index(self.field.modulus() - 1, a)
    }
}

pub(crate) fn checked_pow(base: u128, exp: u32) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}
