use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::accept::pair_count;
use super::table::FunctionTable;
use crate::error::{check_budget, Error, Result};
use crate::ffield::{PointSpace, PrimeField};
use crate::stats::{frac, Fraction};

/// Absolute tolerance for complex arithmetic.
pub const FOURIER_TOL: f64 = 1e-9;

/// `omega^j` for `j in [0, q)`, with `omega = exp(2 pi i / q)`.
pub fn roots_of_unity(q: u64) -> Vec<Complex64> {
    (0..q)
        .map(|j| Complex64::from_polar(1.0, TAU * j as f64 / q as f64))
        .collect()
}

/// `sum_{i<q} (omega^j)^i`: `q` when `q | j`, otherwise 0.
pub fn root_power_sum(q: u64, j: u64) -> Complex64 {
    let roots = roots_of_unity(q);
    (0..q)
        .map(|i| roots[((i as u128 * j as u128) % q as u128) as usize])
        .sum()
}

/// Coefficients `g^(rho) = E_alpha[omega^(f(alpha) - <rho, alpha>)]` for every `rho`.
#[derive(Debug, Clone)]
pub struct FourierTable {
    space: PointSpace,
    coeffs: Vec<Complex64>,
}

impl FourierTable {
    pub fn field(&self) -> PrimeField {
        self.space.field()
    }

    pub fn space(&self) -> &PointSpace {
        &self.space
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, rho: usize) -> Complex64 {
        self.coeffs[rho]
    }

    /// `sum |g^(rho)|^2`, which is 1 up to rounding.
    pub fn parseval_mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn max_imaginary(&self) -> f64 {
        self.coeffs.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    /// Index and real part of the coefficient with the largest real part,
    /// smallest index on ties.
    pub fn max_real(&self) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.re > best.1 + FOURIER_TOL {
                best = (i, c.re);
            }
        }
        best
    }

    /// `g(alpha) = sum_rho g^(rho) chi_rho(alpha)` for every `alpha`.
    pub fn inverse(&self) -> Vec<Complex64> {
        let mut data = self.coeffs.clone();
        axis_transform(&self.space, &mut data, 1);
        data
    }
}

/// Runs a length-`q` DFT along every axis in place. `sign = -1` computes
/// `sum_a x[a] omega^(-rho a)`, `sign = +1` the conjugate kernel.
fn axis_transform(space: &PointSpace, data: &mut [Complex64], sign: i64) {
    let q = space.field().modulus() as usize;
    let roots = roots_of_unity(q as u64);
    let n = space.size();
    let mut stride = n;
    for _ in 0..space.dim() {
        stride /= q;
        let block = stride * q;
        data.par_chunks_mut(block).for_each(|chunk| {
            let mut line = vec![Complex64::new(0.0, 0.0); q];
            for offset in 0..stride {
                for (a, slot) in line.iter_mut().enumerate() {
                    *slot = chunk[offset + a * stride];
                }
                for rho in 0..q {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (a, v) in line.iter().enumerate() {
                        let e = (rho * a) % q;
                        let e = if sign < 0 { (q - e) % q } else { e };
                        acc += v * roots[e];
                    }
                    chunk[offset + rho * stride] = acc;
                }
            }
        });
    }
}

pub fn fourier_transform(f: &FunctionTable) -> Result<FourierTable> {
    f.require_scalar_range()?;
    let space = *f.space();
    let roots = roots_of_unity(space.field().modulus());
    let scale = 1.0 / space.size() as f64;
    let mut data: Vec<Complex64> = f.values().iter().map(|&v| roots[v as usize] * scale).collect();
    axis_transform(&space, &mut data, -1);
    Ok(FourierTable { space, coeffs: data })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripleCorrelationReport {
    pub lhs: f64,
    #[serde(with = "crate::stats::fraction_serde")]
    pub lhs_exact: Fraction,
    pub rhs: f64,
    pub abs_diff: f64,
    pub budget_used: u128,
    /// Largest real Fourier coefficient of the first function and its index.
    pub max_g1_coefficient: f64,
    pub max_g1_rho: usize,
}

/// Compares `Pr[f1(a) + f2(b) = f3(a + b)]`, by enumeration, with
/// `1/q + (q-1)/q * sum_rho g1^ g2^ g3^`.
pub fn triple_correlation_check(
    f1: &FunctionTable,
    f2: &FunctionTable,
    f3: &FunctionTable,
    pair_budget: u128,
) -> Result<TripleCorrelationReport> {
    for t in [f1, f2, f3] {
        t.require_scalar_range()?;
        t.require_scalar_respecting()?;
    }
    for t in [f2, f3] {
        if t.space() != f1.space() {
            return Err(Error::contract(
                "all three functions must share the field and domain dimension",
            ));
        }
    }
    let required = pair_count(f1);
    check_budget("pair enumeration", required, pair_budget)?;
    let field = f1.field();
    let space = f1.space();
    let n = f1.domain_size();
    let hits: u64 = (0..n)
        .into_par_iter()
        .map(|a| {
            let fa = f1.value(a)[0];
            (0..n)
                .filter(|&b| field.add(fa, f2.value(b)[0]) == f3.value(space.add_index(a, b))[0])
                .count() as u64
        })
        .sum();
    let lhs_exact = frac(hits, (n * n) as u64);
    let lhs = crate::stats::to_f64(&lhs_exact);

    let (h1, h2, h3) = (fourier_transform(f1)?, fourier_transform(f2)?, fourier_transform(f3)?);
    let sum: Complex64 = (0..n).map(|r| h1.coeff(r) * h2.coeff(r) * h3.coeff(r)).sum();
    let q = field.modulus() as f64;
    let rhs = 1.0 / q + (q - 1.0) / q * sum.re;
    let (max_g1_rho, max_g1_coefficient) = h1.max_real();
    Ok(TripleCorrelationReport {
        lhs,
        lhs_exact,
        rhs,
        abs_diff: (lhs - rhs).abs(),
        budget_used: required,
        max_g1_coefficient,
        max_g1_rho,
    })
}

/// `1/q + (q-1)/q * Re g^(rho)`, the agreement with `<rho, .>` predicted by the transform.
pub fn agreement_from_fourier(ft: &FourierTable, rho: usize) -> f64 {
    let q = ft.field().modulus() as f64;
    1.0 / q + (q - 1.0) / q * ft.coeff(rho).re
}
