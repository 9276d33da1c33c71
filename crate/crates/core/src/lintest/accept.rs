use rayon::prelude::*;
use serde::Serialize;

use super::linear::LinearScalarFn;
use super::table::FunctionTable;
use crate::error::{check_budget, Result};
use crate::rng::SeedStream;
use crate::stats::{frac, wilson_interval, Fraction, Z99};

/// Default cap on the number of `(alpha, beta)` pairs enumerated in exact modes.
pub const DEFAULT_PAIR_BUDGET: u128 = 1 << 30;

const MC_CHUNK: u64 = 1 << 14;
const MC_LABEL: &str = "pass-probability";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PassMode {
    Exact { pair_budget: u128 },
    MonteCarlo { samples: u64, seed: u64 },
}

impl PassMode {
    pub fn exact() -> Self {
        PassMode::Exact {
            pair_budget: DEFAULT_PAIR_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PassProbability {
    Exact {
        #[serde(with = "crate::stats::fraction_serde")]
        value: Fraction,
        pairs: u128,
    },
    MonteCarlo {
        estimate: f64,
        accepted: u64,
        samples: u64,
        ci99_low: f64,
        ci99_high: f64,
    },
}

impl PassProbability {
    pub fn as_f64(&self) -> f64 {
        match self {
            PassProbability::Exact { value, .. } => crate::stats::to_f64(value),
            PassProbability::MonteCarlo { estimate, .. } => *estimate,
        }
    }
}

#[inline]
pub(crate) fn accepts(f: &FunctionTable, alpha: usize, beta: usize) -> bool {
    let field = f.field();
    let sum = f.space().add_index(alpha, beta);
    let (fa, fb, fs) = (f.value(alpha), f.value(beta), f.value(sum));
    (0..f.range()).all(|t| field.add(fa[t], fb[t]) == fs[t])
}

pub(crate) fn pair_count(f: &FunctionTable) -> u128 {
    let n = f.domain_size() as u128;
    n * n
}

/// Number of accepted pairs, by full enumeration.
pub fn accepted_count(f: &FunctionTable, pair_budget: u128) -> Result<u64> {
    check_budget("pair enumeration", pair_count(f), pair_budget)?;
    let n = f.domain_size();
    Ok((0..n)
        .into_par_iter()
        .map(|a| (0..n).filter(|&b| accepts(f, a, b)).count() as u64)
        .sum())
}

pub fn pass_probability(f: &FunctionTable, mode: PassMode) -> Result<PassProbability> {
    match mode {
        PassMode::Exact { pair_budget } => {
            let hits = accepted_count(f, pair_budget)?;
            let pairs = pair_count(f);
            Ok(PassProbability::Exact {
                value: frac(hits, pairs as u64),
                pairs,
            })
        }
        PassMode::MonteCarlo { samples, seed } => {
            let streams = SeedStream::new(seed);
            let n = f.domain_size();
            let chunks = samples.div_ceil(MC_CHUNK);
            let accepted: u64 = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    use rand::Rng;
                    let mut rng = streams.substream(MC_LABEL, c);
                    let len = MC_CHUNK.min(samples - c * MC_CHUNK);
                    (0..len)
                        .filter(|_| accepts(f, rng.random_range(0..n), rng.random_range(0..n)))
                        .count() as u64
                })
                .sum();
            let (lo, hi) = wilson_interval(accepted, samples, Z99).unwrap_or((0.0, 1.0));
            Ok(PassProbability::MonteCarlo {
                estimate: if samples == 0 {
                    0.0
                } else {
                    accepted as f64 / samples as f64
                },
                accepted,
                samples,
                ci99_low: lo,
                ci99_high: hi,
            })
        }
    }
}

/// The accepted pairs of a table together with their first-coordinate projection.
#[derive(Debug, Clone)]
pub struct AcceptedSet {
    domain_size: usize,
    rows: Vec<Vec<u32>>,
    size: u64,
}

impl AcceptedSet {
    pub fn compute(f: &FunctionTable, pair_budget: u128) -> Result<Self> {
        check_budget("pair enumeration", pair_count(f), pair_budget)?;
        let n = f.domain_size();
        let rows: Vec<Vec<u32>> = (0..n)
            .into_par_iter()
            .map(|a| (0..n).filter(|&b| accepts(f, a, b)).map(|b| b as u32).collect())
            .collect();
        let size = rows.iter().map(|r| r.len() as u64).sum();
        Ok(Self {
            domain_size: n,
            rows,
            size,
        })
    }

    pub fn len(&self) -> u64 {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    /// `|S| / q^(2d)`.
    pub fn fraction(&self) -> Fraction {
        let n = self.domain_size as u64;
        frac(self.size, n * n)
    }

    pub fn contains(&self, alpha: usize, beta: usize) -> bool {
        self.rows[alpha].binary_search(&(beta as u32)).is_ok()
    }

    /// Partners `beta` with `(alpha, beta)` accepted, ascending.
    pub fn partners(&self, alpha: usize) -> &[u32] {
        &self.rows[alpha]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(a, r)| r.iter().map(move |&b| (a, b as usize)))
    }

    /// `var(f)`: points occurring as the first coordinate of an accepted pair, ascending.
    pub fn var(&self) -> Vec<usize> {
        (0..self.domain_size).filter(|&a| !self.rows[a].is_empty()).collect()
    }
}

pub fn accepted_set(f: &FunctionTable, pair_budget: u128) -> Result<AcceptedSet> {
    AcceptedSet::compute(f, pair_budget)
}

/// `Pr_alpha[f(alpha) = c(alpha)]` for a scalar table.
pub fn agreement(f: &FunctionTable, c: &LinearScalarFn) -> Result<Fraction> {
    f.require_scalar_range()?;
    if c.dim() != f.dim() {
        return Err(crate::Error::DimensionMismatch {
            expected: f.dim(),
            found: c.dim(),
        });
    }
    let mut point = vec![0; f.dim()];
    let mut hits = 0u64;
    for a in 0..f.domain_size() {
        f.space().write_point(a, &mut point);
        if c.eval_point(&point) == f.value(a)[0] {
            hits += 1;
        }
    }
    Ok(frac(hits, f.domain_size() as u64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::{FieldVector, PrimeField};

    fn f(q: u64) -> PrimeField {
        PrimeField::new(q).unwrap()
    }

    fn linear_table(q: u64, rho: &[u64]) -> FunctionTable {
        let c = LinearScalarFn::new(FieldVector::new(f(q), rho.to_vec()));
        FunctionTable::from_fn(f(q), rho.len(), 1, |p| vec![c.eval_point(p)]).unwrap()
    }

    #[test]
    fn linear_passes_always() {
        let t = linear_table(5, &[2, 3]);
        let p = pass_probability(&t, PassMode::exact()).unwrap();
        assert!(matches!(p, PassProbability::Exact { value, .. } if value == frac(1, 1)));
        let s = accepted_set(&t, DEFAULT_PAIR_BUDGET).unwrap();
        assert_eq!(s.len(), 625);
        assert_eq!(s.var(), (0..25).collect::<Vec<_>>());
    }

    #[test]
    fn nonzero_constant_never_passes() {
        let t = FunctionTable::new(f(5), 1, 1, vec![3; 5]).unwrap();
        let p = pass_probability(&t, PassMode::exact()).unwrap();
        assert_eq!(p.as_f64(), 0.0);
        let s = accepted_set(&t, DEFAULT_PAIR_BUDGET).unwrap();
        assert!(s.is_empty() && s.var().is_empty());
        assert_eq!(s.fraction(), frac(0, 1));
    }

    #[test]
    fn single_corruption_matches_definition() {
        // q=3, d=1, f(a)=a except f(1)=2
        let t = FunctionTable::new(f(3), 1, 1, vec![0, 2, 2]).unwrap();
        let s = accepted_set(&t, DEFAULT_PAIR_BUDGET).unwrap();
        let mut expected = 0;
        for a in 0..3u64 {
            for b in 0..3u64 {
                let fv = |x: u64| t.value(x as usize)[0];
                let ok = (fv(a) + fv(b)) % 3 == fv((a + b) % 3);
                assert_eq!(ok, s.contains(a as usize, b as usize));
                expected += ok as u64;
            }
        }
        assert_eq!(s.len(), expected);
        assert!(s.len() < 9);
        assert!(s.var().contains(&0));
        let exact = pass_probability(&t, PassMode::exact()).unwrap();
        assert!(matches!(exact, PassProbability::Exact { value, .. } if value == s.fraction()));
    }

    #[test]
    fn exact_mode_respects_budget() {
        let t = linear_table(3, &[1, 1, 1]);
        let err = pass_probability(&t, PassMode::Exact { pair_budget: 100 }).unwrap_err();
        assert!(err.is_budget());
        assert!(err.to_string().contains("729"));
    }

    #[test]
    fn monte_carlo_is_deterministic_and_brackets_truth() {
        let t = FunctionTable::new(f(5), 1, 1, vec![0, 1, 2, 3, 1]).unwrap();
        let exact = pass_probability(&t, PassMode::exact()).unwrap().as_f64();
        let mode = PassMode::MonteCarlo {
            samples: 40_000,
            seed: 9,
        };
        let a = pass_probability(&t, mode).unwrap();
        assert_eq!(a, pass_probability(&t, mode).unwrap());
        let PassProbability::MonteCarlo {
            ci99_low, ci99_high, ..
        } = a
        else {
            panic!("wrong mode")
        };
        assert!(ci99_low <= exact && exact <= ci99_high);
    }

    #[test]
    fn agreement_examples() {
        let t = linear_table(3, &[1]);
        let same = LinearScalarFn::new(FieldVector::new(f(3), vec![1]));
        assert_eq!(agreement(&t, &same).unwrap(), frac(1, 1));
        let other = LinearScalarFn::new(FieldVector::new(f(3), vec![2]));
        assert_eq!(agreement(&t, &other).unwrap(), frac(1, 3));
    }
}
