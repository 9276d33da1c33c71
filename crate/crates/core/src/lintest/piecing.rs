use serde::Serialize;

use super::accept::{accepted_count, accepted_set, DEFAULT_PAIR_BUDGET};
use super::decode::{decode_with_threshold, default_c_list};
use super::fourier::fourier_transform;
use super::linear::{LinearScalarFn, LinearVecFn};
use super::table::FunctionTable;
use crate::error::{Error, Result};
use crate::ffield::{rel_hamming, FieldVector};
use crate::stats::{frac, to_f64, Fraction};

const CMP_TOL: f64 = 1e-12;

/// How the per-coordinate decoding radius `delta_i` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaRule {
    /// `delta_i = constant * eps^exponent * eps_i`.
    Literal { constant: f64, exponent: i32 },
    /// The same radius for every coordinate.
    Fixed(Fraction),
}

impl Default for DeltaRule {
    fn default() -> Self {
        DeltaRule::Literal {
            constant: 1.0,
            exponent: 11,
        }
    }
}

impl DeltaRule {
    fn radius(&self, eps: f64, eps_i: f64) -> f64 {
        match *self {
            DeltaRule::Literal { constant, exponent } => constant * eps.powi(exponent) * eps_i,
            DeltaRule::Fixed(d) => to_f64(&d),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecingConfig {
    /// Required pass probability; the procedure refuses below it.
    pub epsilon: Fraction,
    /// Relative Hamming radius for the final agreement measurement.
    pub kappa: Fraction,
    pub c_list: Fraction,
    pub delta: DeltaRule,
    pub pair_budget: u128,
}

impl PiecingConfig {
    pub fn new(epsilon: Fraction, kappa: Fraction) -> Self {
        Self {
            epsilon,
            kappa,
            c_list: default_c_list(),
            delta: DeltaRule::default(),
            pair_budget: DEFAULT_PAIR_BUDGET,
        }
    }

    pub fn with_delta(mut self, delta: DeltaRule) -> Self {
        self.delta = delta;
        self
    }
}

/// Intermediate objects of the piecing procedure.
#[derive(Debug, Clone)]
pub struct PiecingState {
    /// Decoded list for each output coordinate.
    pub lists: Vec<Vec<LinearScalarFn>>,
    /// `var(f)` in ascending index order.
    pub var: Vec<usize>,
    /// Label vector of each point of `var(f)`; entry `j > 0` names list member `j - 1`.
    pub labels: Vec<Vec<usize>>,
    /// Positions into `var` of the high-weight and high-degree points.
    pub v_star: Vec<usize>,
    pub w_star: Vec<usize>,
    pub anchor: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PiecingStats {
    #[serde(with = "crate::stats::fraction_serde")]
    pub pass_probability: Fraction,
    #[serde(with = "crate::stats::fraction_vec_serde")]
    pub coordinate_pass_probabilities: Vec<Fraction>,
    pub deltas: Vec<f64>,
    pub list_sizes: Vec<usize>,
    pub var_size: usize,
    pub v_star_size: usize,
    pub w_star_size: usize,
    pub intersection_size: usize,
    pub anchor: Option<Vec<u64>>,
    /// `Pr_{alpha ~ var}[dist(f(alpha), c(alpha)) <= kappa]`, when a map was assembled.
    #[serde(with = "opt_fraction")]
    pub agreement: Option<Fraction>,
    /// `eps^2 / 3`, the guaranteed floor for `agreement`.
    pub agreement_floor: f64,
}

mod opt_fraction {
    use super::Fraction;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(f: &Option<Fraction>, s: S) -> Result<S::Ok, S::Error> {
        match f {
            Some(f) => s.serialize_str(&format!("{}/{}", f.numer(), f.denom())),
            None => s.serialize_none(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PiecingOutcome {
    /// The assembled linear map, absent when no anchor exists.
    pub map: Option<LinearVecFn>,
    pub stats: PiecingStats,
    pub state: PiecingState,
}

/// Reconstructs a linear map close to `f` on a large part of `var(f)` by
/// decoding each output coordinate and stitching the decoded lists together
/// at a well-connected anchor point.
pub fn piece_together(f: &FunctionTable, cfg: &PiecingConfig) -> Result<PiecingOutcome> {
    f.require_scalar_respecting()?;
    let accepted = accepted_set(f, cfg.pair_budget)?;
    let pass = accepted.fraction();
    if pass < cfg.epsilon || accepted.is_empty() {
        return Err(Error::Refused(format!(
            "pass probability {}/{} (~{:.6}) is below the required {}/{}",
            pass.numer(),
            pass.denom(),
            to_f64(&pass),
            cfg.epsilon.numer(),
            cfg.epsilon.denom()
        )));
    }
    let eps = to_f64(&pass);
    let ell = f.range();
    let n = f.domain_size() as u64;

    let mut coordinate_pass = Vec::with_capacity(ell);
    let mut deltas = Vec::with_capacity(ell);
    let mut lists = Vec::with_capacity(ell);
    let mut coords = Vec::with_capacity(ell);
    for i in 0..ell {
        let fi = f.coordinate(i);
        let eps_i = frac(accepted_count(&fi, cfg.pair_budget)?, n * n);
        let delta_i = cfg.delta.radius(eps, to_f64(&eps_i));
        let ft = fourier_transform(&fi)?;
        lists.push(decode_with_threshold(&ft, to_f64(&cfg.c_list) * delta_i));
        coordinate_pass.push(eps_i);
        deltas.push(delta_i);
        coords.push(fi);
    }

    let var = accepted.var();
    let mut point = vec![0; f.dim()];
    let labels: Vec<Vec<usize>> = var
        .iter()
        .map(|&a| {
            f.space().write_point(a, &mut point);
            (0..ell)
                .map(|i| {
                    let target = coords[i].value(a)[0];
                    let mut hits = lists[i]
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| c.eval_point(&point) == target);
                    match (hits.next(), hits.next()) {
                        (Some((j, _)), None) => j + 1,
                        _ => 0,
                    }
                })
                .collect()
        })
        .collect();

    let weight_floor = 1.0 - eps.powf(2.5);
    let v_star: Vec<usize> = (0..var.len())
        .filter(|&p| {
            let nz = labels[p].iter().filter(|&&l| l != 0).count();
            nz as f64 / ell as f64 >= weight_floor - CMP_TOL
        })
        .collect();
    let degree_floor = eps * eps / 2.0 * var.len() as f64;
    let w_star: Vec<usize> = (0..var.len())
        .filter(|&p| accepted.partners(var[p]).len() as f64 >= degree_floor - CMP_TOL)
        .collect();
    let intersection: Vec<usize> = v_star
        .iter()
        .copied()
        .filter(|p| w_star.binary_search(p).is_ok())
        .collect();
    let anchor = intersection.first().copied();

    let map = match anchor {
        None => None,
        Some(p) => {
            let rows = (0..ell)
                .map(|i| match labels[p][i] {
                    0 => LinearScalarFn::zero(f.field(), f.dim()),
                    j => lists[i][j - 1].clone(),
                })
                .collect::<Vec<_>>();
            Some(LinearVecFn::from_scalar_fns(&rows)?)
        }
    };

    let agreement = match &map {
        None => None,
        Some(c) => {
            let mut close = 0u64;
            for &a in &var {
                f.space().write_point(a, &mut point);
                let got = FieldVector::new(f.field(), c.eval_point(&point));
                if rel_hamming(&f.value_vector(a), &got)? <= cfg.kappa {
                    close += 1;
                }
            }
            Some(frac(close, var.len() as u64))
        }
    };

    let stats = PiecingStats {
        pass_probability: pass,
        coordinate_pass_probabilities: coordinate_pass,
        deltas,
        list_sizes: lists.iter().map(Vec::len).collect(),
        var_size: var.len(),
        v_star_size: v_star.len(),
        w_star_size: w_star.len(),
        intersection_size: intersection.len(),
        anchor: anchor.map(|p| f.space().point(var[p])),
        agreement,
        agreement_floor: eps * eps / 3.0,
    };
    Ok(PiecingOutcome {
        map,
        stats,
        state: PiecingState {
            lists,
            var,
            labels,
            v_star,
            w_star,
            anchor,
        },
    })
}
