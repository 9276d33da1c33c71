use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::gamma::{build_gamma, FillLog};
use super::graph::CliqueInstance;
use super::params::{default_kappa, EpsilonRule};
use super::vertex::Vertex;
use crate::error::{Error, Result};
use crate::ffield::{block_inner, rel_hamming, weight, BlockVector, FieldVector, PointSpace};
use crate::lintest::{accepted_count, piece_together, DeltaRule, PiecingConfig, PiecingStats};
use crate::stats::{frac, Fraction};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub epsilon: EpsilonRule,
    pub kappa: Fraction,
    pub delta: DeltaRule,
}

impl Thresholds {
    /// `eps = q^{-1/k}`, `kappa = 1/(8k)` and the literal decoding radius.
    pub fn standard(k: usize) -> Self {
        Self {
            epsilon: EpsilonRule::Root,
            kappa: default_kappa(k),
            delta: DeltaRule::default(),
        }
    }

    pub fn with_kappa(mut self, kappa: Fraction) -> Self {
        self.kappa = kappa;
        self
    }
}

/// The best member of `U_i` for one direction `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaChoice {
    pub alpha: Vec<u64>,
    /// Index into `U_i` of the minimizer (lowest index among equal vectors).
    pub index: usize,
    /// `||M(alpha, Theta_i - g(u))||` at the minimizer.
    #[serde(with = "crate::stats::fraction_serde")]
    pub residual: Fraction,
    /// Distinct vectors of `U_i` within `2 kappa`.
    pub within_bound: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionReport {
    pub direction: usize,
    pub choices: Vec<AlphaChoice>,
    /// The common minimizer over all nonzero `alpha`, when they agree.
    pub index: Option<usize>,
    pub vector: Option<Vec<u64>>,
    /// `max_alpha ||M(alpha, Theta_i - g(u_i*))||`.
    #[serde(with = "opt_fraction")]
    pub max_residual: Option<Fraction>,
}

mod opt_fraction {
    use super::Fraction;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(f: &Option<Fraction>, s: S) -> Result<S::Ok, S::Error> {
        match f {
            Some(f) => crate::stats::fraction_serde::serialize(f, s),
            None => s.serialize_none(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum FailureStage {
    Piecing {
        reason: String,
    },
    NoLinearMap,
    AmbiguousMinimizer {
        direction: usize,
        alpha: Vec<u64>,
        candidates: usize,
    },
    InconsistentDirection {
        direction: usize,
        indices: Vec<usize>,
    },
    NonzeroSum,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Witness { tuple: Vec<usize> },
    Failure(FailureStage),
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtractionReport {
    pub clique_size: usize,
    /// `|T| / q^{2k^2}`, the guaranteed lower bound on Gamma's pass probability.
    #[serde(with = "crate::stats::fraction_serde")]
    pub size_fraction: Fraction,
    #[serde(with = "crate::stats::fraction_serde")]
    pub pass_probability: Fraction,
    #[serde(with = "crate::stats::fraction_serde")]
    pub kappa: Fraction,
    pub fill: FillLog,
    pub piecing: Option<PiecingStats>,
    /// `Theta_1, ..., Theta_k`, each `l` blocks of width `k`, flattened.
    pub thetas: Vec<Vec<u64>>,
    pub var_size: usize,
    /// Points of `var(T)` where Gamma is within `kappa` of the decoded map.
    pub r_star_size: usize,
    /// Whether `|R*| / q^{k^2} > 1/q`, the density the line-averaging steps need.
    pub r_star_dense: bool,
    pub directions: Vec<DirectionReport>,
    /// `max_alpha ||M(alpha, Theta_1 + ... + Theta_k)||`.
    #[serde(with = "opt_fraction")]
    pub zero_test_residual: Option<Fraction>,
    pub z_star: Option<Vec<u64>>,
    pub verdict: Verdict,
}

impl ExtractionReport {
    pub fn witness(&self) -> Option<&[usize]> {
        match &self.verdict {
            Verdict::Witness { tuple } => Some(tuple),
            Verdict::Failure(_) => None,
        }
    }
}

/// Decodes a k-Vector-Sum witness from a large clique.
///
/// Builds Gamma, pieces together a linear map `c = sum_i M(., Theta_i)`,
/// picks for every direction `i` and nonzero `alpha` the member of `U_i`
/// minimizing `||M(alpha, Theta_i - g(u))||`, requires those choices to agree
/// per direction and finally checks that the chosen vectors sum to zero.
pub fn extract_witness<R: Rng + ?Sized>(
    clique: &[Vertex],
    inst: &CliqueInstance,
    thresholds: &Thresholds,
    rng: &mut R,
) -> Result<ExtractionReport> {
    let p = inst.params();
    let field = inst.field();
    if !thresholds.epsilon.admits(clique.len(), p.q, p.k) {
        return Err(Error::Refused(format!(
            "clique of size {} is below the soundness threshold {:?} for q = {}, k = {}",
            clique.len(),
            thresholds.epsilon,
            p.q,
            p.k
        )));
    }
    let gamma = build_gamma(clique, inst, rng)?;
    let side = gamma.table.domain_size() as u64;
    let size_fraction = frac(clique.len() as u64, side * side);
    let pass_probability = frac(accepted_count(&gamma.table, u128::MAX)? as u64, side * side);
    let two_kappa = thresholds.kappa * 2;
    let mut report = ExtractionReport {
        clique_size: clique.len(),
        size_fraction,
        pass_probability,
        kappa: thresholds.kappa,
        fill: gamma.log.clone(),
        piecing: None,
        thetas: Vec::new(),
        var_size: gamma.var.len(),
        r_star_size: 0,
        r_star_dense: false,
        directions: Vec::new(),
        zero_test_residual: None,
        z_star: None,
        verdict: Verdict::Failure(FailureStage::NoLinearMap),
    };
    let cfg =
        PiecingConfig::new(thresholds.epsilon.lower_fraction(p.q, p.k), thresholds.kappa).with_delta(thresholds.delta);
    let outcome = match piece_together(&gamma.table, &cfg) {
        Ok(o) => o,
        Err(Error::Refused(reason)) => {
            report.verdict = Verdict::Failure(FailureStage::Piecing { reason });
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    report.piecing = Some(outcome.stats.clone());
    let Some(c) = outcome.map else {
        return Ok(report);
    };
    let thetas = (0..p.k).map(|i| c.theta(i, p.k)).collect::<Result<Vec<_>>>()?;
    report.thetas = thetas.iter().map(|t| t.as_vector().entries().to_vec()).collect();

    let space = gamma.table.space();
    report.r_star_size = gamma
        .var
        .iter()
        .filter(|&&idx| {
            let cv = FieldVector::new(field, c.eval_point(&space.point(idx)));
            rel_hamming(&gamma.table.value_vector(idx), &cv).expect("same length") <= thresholds.kappa
        })
        .count();
    report.r_star_dense = (report.r_star_size as u64) * p.q > side;

    let alphas = PointSpace::new(field, p.k, u128::MAX)?;
    let nonzero: Vec<FieldVector> = (1..alphas.size()).map(|i| alphas.vector(i)).collect();
    let mut chosen = Vec::with_capacity(p.k);
    for (i, theta) in thetas.iter().enumerate() {
        let images = &inst.images()[i];
        let members = inst.source().collection(i);
        let choices = nonzero
            .par_iter()
            .map(|alpha| {
                let residuals: Vec<Fraction> = images
                    .iter()
                    .map(|img| residual(alpha, theta, img))
                    .collect::<Result<_>>()?;
                let best = *residuals.iter().min().expect("collections are nonempty");
                let index = residuals.iter().position(|r| *r == best).expect("present");
                let mut near: Vec<&FieldVector> = residuals
                    .iter()
                    .zip(members)
                    .filter(|(r, _)| **r <= two_kappa)
                    .map(|(_, u)| u)
                    .collect();
                near.sort_by(|a, b| a.entries().cmp(b.entries()));
                near.dedup();
                Ok(AlphaChoice {
                    alpha: alpha.entries().to_vec(),
                    index,
                    residual: best,
                    within_bound: near.len(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut dir = DirectionReport {
            direction: i,
            choices,
            index: None,
            vector: None,
            max_residual: None,
        };
        if let Some(amb) = dir.choices.iter().find(|ch| ch.within_bound > 1) {
            let stage = FailureStage::AmbiguousMinimizer {
                direction: i,
                alpha: amb.alpha.clone(),
                candidates: amb.within_bound,
            };
            report.directions.push(dir);
            report.verdict = Verdict::Failure(stage);
            return Ok(report);
        }
        let first = dir.choices[0].index;
        if dir.choices.iter().any(|ch| members[ch.index] != members[first]) {
            let mut indices: Vec<usize> = dir.choices.iter().map(|ch| ch.index).collect();
            indices.sort_unstable();
            indices.dedup();
            report.directions.push(dir);
            report.verdict = Verdict::Failure(FailureStage::InconsistentDirection { direction: i, indices });
            return Ok(report);
        }
        dir.index = Some(first);
        dir.vector = Some(members[first].entries().to_vec());
        dir.max_residual = dir.choices.iter().map(|ch| ch.residual).max();
        chosen.push(first);
        report.directions.push(dir);
    }

    let mut theta_sum = thetas[0].clone();
    for t in &thetas[1..] {
        theta_sum = theta_sum.add(t)?;
    }
    report.zero_test_residual = nonzero
        .iter()
        .map(|alpha| weight(&block_inner(alpha, &theta_sum)?))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max();
    let mut z = FieldVector::zeros(field, inst.source().m());
    for (i, &j) in chosen.iter().enumerate() {
        z.add_scaled(1, &inst.source().collection(i)[j])?;
    }
    report.z_star = Some(z.entries().to_vec());
    report.verdict = if z.is_zero() {
        Verdict::Witness { tuple: chosen }
    } else {
        Verdict::Failure(FailureStage::NonzeroSum)
    };
    Ok(report)
}

fn residual(alpha: &FieldVector, theta: &BlockVector, image: &BlockVector) -> Result<Fraction> {
    weight(&block_inner(alpha, &theta.sub(image)?)?)
}
