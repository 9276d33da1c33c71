//! The random linear map `g(b) = (A_1 b, ..., A_l b)` and checkers for the two
//! properties a good map needs: images of small combinations are heavy, and
//! projected images of distinct differences are far apart.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_budget, Error, Result};
use crate::ffield::{
    block_inner, mat_vec, rel_hamming, sample_matrix, weight, BlockVector, FieldMatrix, FieldVector, PrimeField,
};
use crate::rng::{SeedStream, MATRICES};
use crate::stats::{frac, Fraction, RateEstimate, Z95};
use crate::vecsum::VecSumInstance;

/// Default cap on the number of cases an exhaustive check may visit.
pub const DEFAULT_CHECK_BUDGET: u128 = 1 << 26;

const MC_LABEL: &str = "good-map-sampling";
const MC_CHUNK: u64 = 1 << 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearMapG {
    field: PrimeField,
    k: usize,
    m: usize,
    matrices: Vec<FieldMatrix>,
    seed: Option<u64>,
}

impl LinearMapG {
    /// `l` independent uniform `k x m` matrices.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, field: PrimeField, k: usize, m: usize, ell: usize) -> Result<Self> {
        if ell == 0 || k == 0 {
            return Err(Error::contract("the map needs l >= 1 matrices with k >= 1 rows"));
        }
        let matrices = (0..ell).map(|_| sample_matrix(rng, k, m, field)).collect();
        Ok(Self {
            field,
            k,
            m,
            matrices,
            seed: None,
        })
    }

    /// Samples from the `"matrices"` stream of `seed` and records the seed.
    pub fn from_seed(seed: u64, field: PrimeField, k: usize, m: usize, ell: usize) -> Result<Self> {
        let mut rng = SeedStream::new(seed).stream(MATRICES);
        let mut g = Self::sample(&mut rng, field, k, m, ell)?;
        g.seed = Some(seed);
        Ok(g)
    }

    pub fn from_matrices(matrices: Vec<FieldMatrix>) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::contract("the map needs at least one matrix"))?;
        let (field, k, m) = (first.field(), first.rows(), first.cols());
        if k == 0 {
            return Err(Error::contract("matrices need at least one row"));
        }
        for a in &matrices {
            if a.field() != field {
                return Err(Error::ModulusMismatch {
                    left: field.modulus(),
                    right: a.field().modulus(),
                });
            }
            if a.rows() != k || a.cols() != m {
                return Err(Error::BlockShape(format!(
                    "matrix of shape {}x{} among {k}x{m}",
                    a.rows(),
                    a.cols()
                )));
            }
        }
        Ok(Self {
            field,
            k,
            m,
            matrices,
            seed: None,
        })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn ell(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrices(&self) -> &[FieldMatrix] {
        &self.matrices
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// `g(b)` as `l` blocks of width `k`; block `i` is `A_i b`.
    pub fn apply(&self, b: &FieldVector) -> Result<BlockVector> {
        if b.dim() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                found: b.dim(),
            });
        }
        let blocks = self
            .matrices
            .iter()
            .map(|a| mat_vec(a, b))
            .collect::<Result<Vec<_>>>()?;
        BlockVector::from_blocks(self.field, &blocks)
    }
}

pub fn apply_g(g: &LinearMapG, b: &FieldVector) -> Result<BlockVector> {
    g.apply(b)
}

/// `l = ceil(12 log_q n)`, at least 1.
pub fn paper_ell(q: u64, n: usize) -> usize {
    let n = n.max(2) as f64;
    ((12.0 * n.ln() / (q as f64).ln()).ceil() as usize).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CheckMode {
    Exhaustive { budget: u128 },
    MonteCarlo { samples: u64, seed: u64 },
}

impl CheckMode {
    pub fn exhaustive() -> Self {
        CheckMode::Exhaustive {
            budget: DEFAULT_CHECK_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Wellspread,
    PairwiseSeparation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "property", rename_all = "snake_case")]
pub enum Counterexample {
    /// `gammas`, `tuple` index the combination `sum gamma_i u_i` whose image is light.
    Wellspread {
        gammas: Vec<u64>,
        tuple: Vec<usize>,
        combination: Vec<u64>,
        #[serde(with = "crate::stats::fraction_serde")]
        image_weight: Fraction,
    },
    /// Collection `block`, vectors `u1, u2, u3` by index, and coefficients `alpha`, `beta`.
    PairwiseSeparation {
        block: usize,
        triple: [usize; 3],
        alpha: Vec<u64>,
        beta: Vec<u64>,
        #[serde(with = "crate::stats::fraction_serde")]
        distance: Fraction,
    },
}

impl Counterexample {
    /// Re-derives the violation from the definitions, without any of the
    /// checker's precomputation.
    pub fn reverify(&self, g: &LinearMapG, inst: &VecSumInstance) -> Result<bool> {
        let field = g.field();
        match self {
            Counterexample::Wellspread { gammas, tuple, .. } => {
                let mut b = FieldVector::zeros(field, inst.m());
                for (&gamma, u) in gammas.iter().zip(inst.tuple(tuple)?) {
                    b.add_scaled(gamma, u)?;
                }
                if b.is_zero() {
                    return Ok(false);
                }
                Ok(weight(g.apply(&b)?.as_vector())? < frac(2, 3))
            }
            Counterexample::PairwiseSeparation {
                block,
                triple,
                alpha,
                beta,
                ..
            } => {
                let u = inst.collection(*block);
                let (u1, u2, u3) = (&u[triple[0]], &u[triple[1]], &u[triple[2]]);
                let x = u3.sub(u1)?;
                let y = u2.sub(u3)?;
                let (a, b) = (
                    FieldVector::new(field, alpha.clone()),
                    FieldVector::new(field, beta.clone()),
                );
                if x == y || !linearly_independent(&a, &b) {
                    return Ok(false);
                }
                let lhs = block_inner(&a, &g.apply(&x)?)?;
                let rhs = block_inner(&b, &g.apply(&y)?)?;
                Ok(rel_hamming(&lhs, &rhs)? < frac(1, 2))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GoodMapCertificate {
    pub property: Property,
    pub mode: CheckMode,
    /// Number of quantified cases examined.
    pub cases: u128,
    pub counterexample: Option<Counterexample>,
    pub instance_fingerprint: String,
    pub map_seed: Option<u64>,
}

impl GoodMapCertificate {
    pub fn holds(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// True when neither vector is zero and neither is a multiple of the other.
pub fn linearly_independent(a: &FieldVector, b: &FieldVector) -> bool {
    if a.is_zero() || b.is_zero() {
        return false;
    }
    let field = a.field();
    let pivot = a.entries().iter().position(|&x| x != 0).expect("nonzero");
    let ratio = field.mul(b.entries()[pivot], field.inv(a.entries()[pivot]).expect("nonzero"));
    a.scale(ratio) != *b
}

fn check_compat(g: &LinearMapG, inst: &VecSumInstance) -> Result<()> {
    if g.field() != inst.field() {
        return Err(Error::ModulusMismatch {
            left: g.field().modulus(),
            right: inst.field().modulus(),
        });
    }
    if g.m() != inst.m() {
        return Err(Error::DimensionMismatch {
            expected: g.m(),
            found: inst.m(),
        });
    }
    Ok(())
}

fn images(g: &LinearMapG, inst: &VecSumInstance) -> Result<Vec<Vec<Vec<u64>>>> {
    inst.collections()
        .iter()
        .map(|c| c.iter().map(|u| Ok(g.apply(u)?.into_vector().into_entries())).collect())
        .collect()
}

/// Mixed-radix decode of `code` into digits with the given radices, most
/// significant first.
fn digits(mut code: u128, radices: &[u128], out: &mut [usize]) {
    for (slot, &r) in out.iter_mut().zip(radices).rev() {
        *slot = (code % r) as usize;
        code /= r;
    }
}

fn wellspread_case(
    g: &LinearMapG,
    inst: &VecSumInstance,
    imgs: &[Vec<Vec<u64>>],
    tuple: &[usize],
    gammas: &[u64],
) -> Option<Counterexample> {
    let field = g.field();
    let mut comb = vec![0u64; inst.m()];
    let mut image = vec![0u64; g.k() * g.ell()];
    for (i, (&t, &gamma)) in tuple.iter().zip(gammas).enumerate() {
        if gamma == 0 {
            continue;
        }
        for (c, &x) in comb.iter_mut().zip(inst.collection(i)[t].entries()) {
            *c = field.add(*c, field.mul(gamma, x));
        }
        for (c, &x) in image.iter_mut().zip(&imgs[i][t]) {
            *c = field.add(*c, field.mul(gamma, x));
        }
    }
    if comb.iter().all(|&c| c == 0) {
        return None;
    }
    let nonzero = image.iter().filter(|&&x| x != 0).count() as u64;
    let w = frac(nonzero, image.len() as u64);
    (w < frac(2, 3)).then(|| Counterexample::Wellspread {
        gammas: gammas.to_vec(),
        tuple: tuple.to_vec(),
        combination: comb,
        image_weight: w,
    })
}

/// Checks `||g(sum gamma_i u_i)|| >= 2/3` over all `k l` coordinates for every
/// nonzero combination with one vector per collection.
pub fn check_wellspread(g: &LinearMapG, inst: &VecSumInstance, mode: CheckMode) -> Result<GoodMapCertificate> {
    check_compat(g, inst)?;
    let k = inst.k();
    let q = g.field().modulus() as u128;
    let mut radices: Vec<u128> = inst.collections().iter().map(|c| c.len() as u128).collect();
    radices.extend(std::iter::repeat_n(q, k));
    let total = radices
        .iter()
        .try_fold(1u128, |a, &r| a.checked_mul(r))
        .unwrap_or(u128::MAX);
    let imgs = images(g, inst)?;
    let case = |code: u128| {
        let mut d = vec![0usize; 2 * k];
        digits(code, &radices, &mut d);
        let gammas: Vec<u64> = d[k..].iter().map(|&x| x as u64).collect();
        wellspread_case(g, inst, &imgs, &d[..k], &gammas)
    };
    let (cases, counterexample) = run_cases(mode, total, "wellspread check", case)?;
    Ok(GoodMapCertificate {
        property: Property::Wellspread,
        mode,
        cases,
        counterexample,
        instance_fingerprint: inst.fingerprint(),
        map_seed: g.seed(),
    })
}

/// Visits cases in index order (exhaustive) or at random, returning the
/// first counterexample in visiting order.
fn run_cases<F>(mode: CheckMode, total: u128, what: &'static str, case: F) -> Result<(u128, Option<Counterexample>)>
where
    F: Fn(u128) -> Option<Counterexample> + Sync,
{
    match mode {
        CheckMode::Exhaustive { budget } => {
            check_budget(what, total, budget)?;
            let total = total as u64;
            let chunks = total.div_ceil(MC_CHUNK);
            let found = (0..chunks)
                .into_par_iter()
                .find_map_first(|c| (c * MC_CHUNK..((c + 1) * MC_CHUNK).min(total)).find_map(|i| case(i as u128)));
            Ok((total as u128, found))
        }
        CheckMode::MonteCarlo { samples, seed } => {
            if total == 0 {
                return Ok((0, None));
            }
            let streams = SeedStream::new(seed);
            let chunks = samples.div_ceil(MC_CHUNK);
            let found = (0..chunks).into_par_iter().find_map_first(|c| {
                let mut rng = streams.substream(MC_LABEL, c);
                let len = MC_CHUNK.min(samples - c * MC_CHUNK);
                (0..len).find_map(|_| case(rng.random_range(0..total)))
            });
            Ok((samples as u128, found))
        }
    }
}

/// Checks `||M(alpha, g(u3 - u1)) - M(beta, g(u2 - u3))|| >= 1/2` over the `l`
/// output coordinates, for every collection, every triple with
/// `u3 - u1 != u2 - u3`, and every linearly independent `alpha, beta`.
pub fn check_pairwise_separation(g: &LinearMapG, inst: &VecSumInstance, mode: CheckMode) -> Result<GoodMapCertificate> {
    check_compat(g, inst)?;
    let k = inst.k();
    if g.k() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: g.k(),
        });
    }
    let field = g.field();
    let q = field.modulus() as u128;
    let coeffs = q.checked_pow(k as u32).unwrap_or(u128::MAX);
    // ordered pairs (alpha, beta) with alpha nonzero and beta outside its span
    let outside = coeffs.saturating_sub(q);
    let pairs = (coeffs - 1).saturating_mul(outside);
    let per_block: Vec<u128> = inst
        .collections()
        .iter()
        .map(|c| (c.len() as u128).pow(3).saturating_mul(pairs))
        .collect();
    let total = per_block.iter().fold(0u128, |a, &b| a.saturating_add(b));
    let imgs = images(g, inst)?;
    let point = |idx: u128| -> FieldVector {
        let mut v = vec![0u64; k];
        let mut r = idx;
        for slot in v.iter_mut().rev() {
            *slot = (r % q) as u64;
            r /= q;
        }
        FieldVector::new(field, v)
    };
    let case = |code: u128| -> Option<Counterexample> {
        let mut rem = code;
        let mut block = 0;
        while rem >= per_block[block] {
            rem -= per_block[block];
            block += 1;
        }
        let n = inst.collection(block).len() as u128;
        let mut d = [0usize; 5];
        digits(rem, &[n, n, n, coeffs - 1, outside], &mut d);
        let alpha = point(d[3] as u128 + 1);
        let mut span: Vec<u128> = (0..field.modulus())
            .map(|c| {
                alpha
                    .entries()
                    .iter()
                    .fold(0u128, |acc, &a| acc * q + field.mul(c, a) as u128)
            })
            .collect();
        span.sort_unstable();
        let mut b = d[4] as u128;
        for s in span {
            if s <= b {
                b += 1;
            }
        }
        let beta = point(b);
        debug_assert!(linearly_independent(&alpha, &beta));
        let u = inst.collection(block);
        let x = u[d[2]].sub(&u[d[0]]).expect("validated");
        let y = u[d[1]].sub(&u[d[2]]).expect("validated");
        if x == y {
            return None;
        }
        let img = &imgs[block];
        let ell = g.ell();
        let mut differ = 0u64;
        for j in 0..ell {
            let mut lhs = 0;
            let mut rhs = 0;
            for t in 0..k {
                let gx = field.sub(img[d[2]][j * k + t], img[d[0]][j * k + t]);
                let gy = field.sub(img[d[1]][j * k + t], img[d[2]][j * k + t]);
                lhs = field.add(lhs, field.mul(alpha.entries()[t], gx));
                rhs = field.add(rhs, field.mul(beta.entries()[t], gy));
            }
            differ += (lhs != rhs) as u64;
        }
        let distance = frac(differ, ell as u64);
        (distance < frac(1, 2)).then(|| Counterexample::PairwiseSeparation {
            block,
            triple: [d[0], d[1], d[2]],
            alpha: alpha.into_entries(),
            beta: beta.into_entries(),
            distance,
        })
    };
    let (cases, counterexample) = run_cases(mode, total, "pairwise separation check", case)?;
    Ok(GoodMapCertificate {
        property: Property::PairwiseSeparation,
        mode,
        cases,
        counterexample,
        instance_fingerprint: inst.fingerprint(),
        map_seed: g.seed(),
    })
}

/// First nonzero vector of `vectors` whose image has weight below 2/3.
pub fn first_light_image<'a>(
    g: &LinearMapG,
    vectors: impl IntoIterator<Item = &'a FieldVector>,
) -> Result<Option<FieldVector>> {
    for b in vectors {
        if !b.is_zero() && weight(g.apply(b)?.as_vector())? < frac(2, 3) {
            return Ok(Some(b.clone()));
        }
    }
    Ok(None)
}

/// `Pr[Bin(n, 1/q) > n * (1 - threshold)]`: the chance that a fixed nonzero
/// vector's image over `n` independent uniform coordinates has weight below
/// `threshold`.
pub fn single_vector_failure_probability(q: u64, coordinates: usize, threshold: Fraction) -> f64 {
    let n = coordinates as u64;
    let p = 1.0 / q as f64;
    (0..=n)
        .filter(|&z| frac(n - z, n) < threshold)
        .map(|z| binomial(n, z) * p.powi(z as i32) * (1.0 - p).powi((n - z) as i32))
        .sum()
}

fn binomial(n: u64, r: u64) -> f64 {
    let mut acc = BigUint::from(1u32);
    for i in 0..r {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc.to_f64().unwrap_or(f64::INFINITY)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnionBounds {
    /// `(qn)^k * C(kl, kl/3) * q^(-kl/3)`.
    pub wellspread: f64,
    pub wellspread_vacuous: bool,
    /// `n^4 * q^(2k) * 2^l * q^(-l/2)`.
    pub separation: f64,
    pub separation_vacuous: bool,
}

pub fn union_bounds(q: u64, k: usize, ell: usize, n: usize) -> UnionBounds {
    let (qf, kf, lf, nf) = (q as f64, k as f64, ell as f64, n as f64);
    let kl = k * ell;
    let log_w = kf * (qf * nf).ln() + binomial(kl as u64, (kl / 3) as u64).ln() - (kl as f64 / 3.0) * qf.ln();
    let log_s = 4.0 * nf.ln() + 2.0 * kf * qf.ln() + lf * 2f64.ln() - lf / 2.0 * qf.ln();
    let (w, s) = (log_w.exp(), log_s.exp());
    UnionBounds {
        wellspread: w,
        wellspread_vacuous: w >= 1.0,
        separation: s,
        separation_vacuous: s >= 1.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureReport {
    pub q: u64,
    pub k: usize,
    pub m: usize,
    pub ell: usize,
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub wellspread: RateEstimate,
    pub separation: RateEstimate,
    /// Maps failing at least one property.
    pub either: RateEstimate,
    pub bounds: UnionBounds,
    /// Exact failure probability of the weight condition for one fixed nonzero vector.
    pub single_vector_wellspread: f64,
    /// No linearly independent pair exists in `F_q^1`, so separation holds vacuously.
    pub separation_vacuous_at_k1: bool,
}

/// Samples `trials` maps from the `"matrices"` substreams of `seed` and runs
/// both exhaustive checks on each.
pub fn estimate_failure_rate(
    inst: &VecSumInstance,
    ell: usize,
    trials: u64,
    seed: u64,
    budget: u128,
) -> Result<FailureReport> {
    let (field, k, m) = (inst.field(), inst.k(), inst.m());
    let streams = SeedStream::new(seed);
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = streams.substream(MATRICES, t);
            let g = LinearMapG::sample(&mut rng, field, k, m, ell)?;
            let mode = CheckMode::Exhaustive { budget };
            let w = check_wellspread(&g, inst, mode)?.holds();
            let s = check_pairwise_separation(&g, inst, mode)?.holds();
            Ok((!w, !s))
        })
        .collect::<Result<Vec<_>>>()?;
    let count = |f: &dyn Fn(&(bool, bool)) -> bool| outcomes.iter().filter(|o| f(o)).count() as u64;
    let n = inst.size();
    Ok(FailureReport {
        q: field.modulus(),
        k,
        m,
        ell,
        n,
        trials,
        seed,
        wellspread: RateEstimate::new(count(&|o| o.0), trials, Z95),
        separation: RateEstimate::new(count(&|o| o.1), trials, Z95),
        either: RateEstimate::new(count(&|o| o.0 || o.1), trials, Z95),
        bounds: union_bounds(field.modulus(), k, ell, n),
        single_vector_wellspread: single_vector_failure_probability(field.modulus(), k * ell, frac(2, 3)),
        separation_vacuous_at_k1: k == 1,
    })
}

/// `|B~_r| <= (q |B|)^r` as an exact integer.
pub fn sumset_size_bound(q: u64, size: usize, r: usize) -> BigUint {
    let base = BigUint::from(q) * BigUint::from(size);
    if base.is_zero() {
        return BigUint::zero();
    }
    base.pow(r as u32)
}
