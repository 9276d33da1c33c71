use serde::Serialize;

use super::accept::AcceptedSet;
use super::fourier::{fourier_transform, FourierTable, FOURIER_TOL};
use super::linear::LinearScalarFn;
use super::table::FunctionTable;
use crate::error::{Error, Result};
use crate::stats::{frac, to_f64, Fraction};

/// Default multiplier applied to the decoding radius.
pub fn default_c_list() -> Fraction {
    frac(1, 4)
}

/// All `<rho, .>` whose Fourier coefficient reaches `c_list * delta`, in
/// lexicographic order of `rho`.
pub fn list_decode_scalar(f: &FunctionTable, delta: Fraction, c_list: Fraction) -> Result<Vec<LinearScalarFn>> {
    f.require_scalar_range()?;
    f.require_scalar_respecting()?;
    if *delta.numer() == 0 {
        return Err(Error::contract("decoding radius must be positive"));
    }
    let ft = fourier_transform(f)?;
    Ok(decode_with_threshold(&ft, to_f64(&(c_list * delta))))
}

/// Members of the list `{rho : Re g^(rho) >= threshold}` with no precondition on `f`.
pub fn decode_with_threshold(ft: &FourierTable, threshold: f64) -> Vec<LinearScalarFn> {
    ft.coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.re >= threshold - FOURIER_TOL)
        .map(|(rho, _)| LinearScalarFn::new(ft.space().vector(rho)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    #[serde(with = "crate::stats::fraction_serde")]
    pub fraction: Fraction,
    pub consistent_pairs: u64,
    pub accepted_pairs: u64,
    /// Set when no pair is accepted; `fraction` is then 0.
    pub empty_accepted_set: bool,
}

/// Fraction of accepted pairs `(alpha, beta)` for which exactly one list
/// member agrees with `f` at both `alpha` and `beta`.
pub fn verify_unique_consistency(
    f: &FunctionTable,
    list: &[LinearScalarFn],
    accepted: &AcceptedSet,
) -> Result<ConsistencyReport> {
    f.require_scalar_range()?;
    if let Some(c) = list.iter().find(|c| c.dim() != f.dim()) {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: c.dim(),
        });
    }
    let words = list.len().div_ceil(64).max(1);
    let n = f.domain_size();
    let mut agree = vec![0u64; n * words];
    let mut point = vec![0; f.dim()];
    for a in 0..n {
        f.space().write_point(a, &mut point);
        for (j, c) in list.iter().enumerate() {
            if c.eval_point(&point) == f.value(a)[0] {
                agree[a * words + j / 64] |= 1 << (j % 64);
            }
        }
    }
    let row = |a: usize| &agree[a * words..(a + 1) * words];
    let consistent = accepted
        .pairs()
        .filter(|&(a, b)| {
            row(a)
                .iter()
                .zip(row(b))
                .map(|(x, y)| (x & y).count_ones())
                .sum::<u32>()
                == 1
        })
        .count() as u64;
    let total = accepted.len();
    Ok(ConsistencyReport {
        fraction: if total == 0 {
            frac(0, 1)
        } else {
            frac(consistent, total)
        },
        consistent_pairs: consistent,
        accepted_pairs: total,
        empty_accepted_set: total == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::{FieldVector, PrimeField};
    use crate::lintest::{accepted_set, DEFAULT_PAIR_BUDGET};

    fn f(q: u64) -> PrimeField {
        PrimeField::new(q).unwrap()
    }

    fn linear(q: u64, rho: &[u64]) -> (LinearScalarFn, FunctionTable) {
        let c = LinearScalarFn::new(FieldVector::new(f(q), rho.to_vec()));
        let t = FunctionTable::from_fn(f(q), rho.len(), 1, |p| vec![c.eval_point(p)])
            .unwrap()
            .into_scalar_respecting()
            .unwrap();
        (c, t)
    }

    #[test]
    fn linear_decodes_to_itself() {
        let (c, t) = linear(7, &[2, 6]);
        let list = list_decode_scalar(&t, frac(1, 2), default_c_list()).unwrap();
        assert_eq!(list, vec![c.clone()]);
        let s = accepted_set(&t, DEFAULT_PAIR_BUDGET).unwrap();
        let r = verify_unique_consistency(&t, &list, &s).unwrap();
        assert_eq!(r.fraction, frac(1, 1));
        assert!(!r.empty_accepted_set);
    }

    #[test]
    fn empty_list_gives_zero() {
        let (_, t) = linear(5, &[1]);
        let s = accepted_set(&t, DEFAULT_PAIR_BUDGET).unwrap();
        let r = verify_unique_consistency(&t, &[], &s).unwrap();
        assert_eq!(r.fraction, frac(0, 1));
    }

    #[test]
    fn empty_accepted_set_is_flagged() {
        let t = FunctionTable::new(f(5), 1, 1, vec![3; 5]).unwrap();
        let s = accepted_set(&t, DEFAULT_PAIR_BUDGET).unwrap();
        let r = verify_unique_consistency(&t, &[], &s).unwrap();
        assert!(r.empty_accepted_set);
        assert_eq!(r.fraction, frac(0, 1));
    }

    #[test]
    fn refuses_bad_input() {
        let t = FunctionTable::new(f(5), 1, 1, vec![0, 1, 1, 1, 1]).unwrap();
        assert!(matches!(
            list_decode_scalar(&t, frac(1, 2), default_c_list()),
            Err(Error::Contract(_))
        ));
        let (_, t) = linear(5, &[1]);
        assert!(list_decode_scalar(&t, frac(0, 1), default_c_list()).is_err());
    }
}
