use gapclique::cliquesolve::max_clique_exact;
use gapclique::ffield::{FieldVector, PrimeField};
use gapclique::lintest::{
    accepted_count, agreement, agreement_from_fourier, fourier_transform, triple_correlation_check, FunctionTable,
    LinearScalarFn, FOURIER_TOL,
};
use gapclique::randmap::estimate_failure_rate;
use gapclique::reduction::{find_non_edge, materialize, planted_clique, CliqueInstance, ReductionParams};
use gapclique::rng::{SeedStream, INSTANCE};
use gapclique::stats::to_f64;
use gapclique::vecsum::{generate_planted, generate_unsat, VecSumInstance};
use serde::Serialize;
use serde_json::{json, Value};

use crate::artifact::Writer;
use crate::commands::{random_linear_table, search_map, solver_limits, LINTEST_STREAM};
use crate::config::RunConfig;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Lintest,
    Props,
    Soundness,
    Completeness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    ReportOnly,
}

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub suite: Suite,
    pub name: String,
    pub measured: Value,
    pub expected: Value,
    pub status: Status,
}

fn row(suite: Suite, name: impl Into<String>, measured: Value, expected: Value, status: Status) -> Row {
    Row {
        suite,
        name: name.into(),
        measured,
        expected,
        status,
    }
}

fn pass_if(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

pub fn run(cfg: &RunConfig, suite: Suite, output: Option<&str>) -> Result<()> {
    let rows = match suite {
        Suite::Lintest => lintest_suite(cfg)?,
        Suite::Props => props_suite(cfg)?,
        Suite::Soundness => soundness_suite(cfg)?,
        Suite::Completeness => completeness_suite(cfg)?,
    };
    let name = output.map_or_else(
        || format!("{}.jsonl", serde_json::to_value(suite).unwrap().as_str().unwrap()),
        str::to_owned,
    );
    let path = Writer::new(cfg, "experiment").json_lines(&name, &rows)?;
    let failed = rows.iter().filter(|r| r.status == Status::Fail).count();
    for r in &rows {
        if cfg.verbosity > 0 || r.status == Status::Fail {
            eprintln!(
                "{:?} {} measured={} expected={}",
                r.status, r.name, r.measured, r.expected
            );
        }
    }
    println!("wrote {} ({} rows, {failed} failed)", path.display(), rows.len());
    if failed > 0 {
        return Err(CliError::Property(format!("{failed} experiment rows failed")));
    }
    Ok(())
}

fn lintest_suite(cfg: &RunConfig) -> Result<Vec<Row>> {
    let field = cfg.reduction_params()?.field();
    let q = field.modulus() as f64;
    let dim = cfg.dim;
    let trials = cfg.trials.unwrap_or(50);
    let streams = SeedStream::new(cfg.seed);
    let params = json!({"q": field.modulus(), "d": dim});
    let mut rows = Vec::new();
    let mut pass_rates = Vec::with_capacity(trials as usize);
    for t in 0..trials {
        let mut rng = streams.substream(LINTEST_STREAM, t);
        let f: Vec<FunctionTable> = (0..3)
            .map(|_| FunctionTable::random_scalar_respecting(field, dim, 1, &mut rng))
            .collect::<gapclique::Result<_>>()?;
        let tc = triple_correlation_check(&f[0], &f[1], &f[2], cfg.budgets.pair_enum)?;
        rows.push(row(
            Suite::Lintest,
            format!("triple-correlation/{t}"),
            json!({"params": params, "lhs": tc.lhs, "rhs": tc.rhs, "abs_diff": tc.abs_diff}),
            json!({"abs_diff_at_most": FOURIER_TOL}),
            pass_if(tc.abs_diff <= FOURIER_TOL),
        ));

        let ft = fourier_transform(&f[0])?;
        let mut worst = 0f64;
        for rho in 0..f[0].domain_size() {
            let exact = to_f64(&agreement(&f[0], &LinearScalarFn::new(f[0].space().vector(rho)))?);
            worst = worst.max((exact - agreement_from_fourier(&ft, rho)).abs());
        }
        rows.push(row(
            Suite::Lintest,
            format!("agreement/{t}"),
            json!({"params": params, "max_abs_diff": worst}),
            json!({"abs_diff_at_most": FOURIER_TOL}),
            pass_if(worst <= FOURIER_TOL),
        ));

        let linear = random_linear_table(field, dim, 1, &mut rng)?;
        let side = linear.domain_size() as u64;
        let hits = accepted_count(&linear, cfg.budgets.pair_enum)?;
        rows.push(row(
            Suite::Lintest,
            format!("linear-pass/{t}"),
            json!({"params": params, "accepted": hits, "pairs": side * side}),
            json!({"pass_probability": 1}),
            pass_if(hits == side * side),
        ));

        let random = FunctionTable::random(field, dim, 1, &mut rng)?;
        pass_rates.push(accepted_count(&random, cfg.budgets.pair_enum)? as f64 / (side * side) as f64);
    }
    let mean = pass_rates.iter().sum::<f64>() / trials as f64;
    let var = pass_rates.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (trials.max(2) - 1) as f64;
    let sigma = (var / trials as f64).sqrt();
    rows.push(row(
        Suite::Lintest,
        "random-pass-mean",
        json!({"params": params, "mean": mean, "sigma_of_mean": sigma, "trials": trials}),
        json!({"mean": 1.0 / q, "within_sigmas": 3}),
        pass_if((mean - 1.0 / q).abs() <= 3.0 * sigma + f64::EPSILON),
    ));
    Ok(rows)
}

/// An instance with every vector uniform and no planted structure.
fn uniform_instance(field: PrimeField, k: usize, m: usize, n: usize, seed: u64) -> Result<VecSumInstance> {
    let mut rng = SeedStream::new(seed).stream(INSTANCE);
    let collections = (0..k)
        .map(|_| (0..n).map(|_| FieldVector::random(field, m, &mut rng)).collect())
        .collect();
    Ok(VecSumInstance::new(field, m, collections)?.with_provenance(Some(seed), "uniform"))
}

fn props_suite(cfg: &RunConfig) -> Result<Vec<Row>> {
    let field = cfg.reduction_params()?.field();
    let inst = uniform_instance(field, cfg.k(), cfg.m(), cfg.n(), cfg.seed)?;
    let trials = cfg.trials.unwrap_or(200);
    let mut ells = cfg.ells.clone().unwrap_or_else(|| vec![4, 8, 12]);
    ells.sort_unstable();
    ells.dedup();
    let mut rows = Vec::new();
    let mut rates = Vec::new();
    for &ell in &ells {
        let seed = SeedStream::new(cfg.seed).child_seed("props", ell as u64);
        let report = estimate_failure_rate(&inst, ell, trials, seed, cfg.budgets.map_check)?;
        rates.push(report.either.rate.unwrap_or(0.0));
        rows.push(row(
            Suite::Props,
            format!("failure-rate/ell={ell}"),
            serde_json::to_value(&report).expect("report serializes"),
            json!({"union_bound_wellspread": report.bounds.wellspread, "union_bound_separation": report.bounds.separation}),
            Status::ReportOnly,
        ));
    }
    let monotone = rates.windows(2).all(|w| w[1] <= w[0]);
    rows.push(row(
        Suite::Props,
        "failure-rate-trend",
        json!({"ells": ells, "either_rate": rates}),
        json!({"non_increasing": true}),
        pass_if(monotone),
    ));
    Ok(rows)
}

fn desk_params(cfg: &RunConfig) -> Result<ReductionParams> {
    let p = cfg.reduction_params()?;
    if !p.is_desk() {
        return Err(CliError::Config("experiment suites run at desk parameters only".into()));
    }
    Ok(p)
}

fn soundness_suite(cfg: &RunConfig) -> Result<Vec<Row>> {
    let params = desk_params(cfg)?;
    let field = params.field();
    let target = u64::try_from(&params.clique_target()).unwrap_or(u64::MAX);
    let trials = cfg.trials.unwrap_or(10);
    let attempts = cfg.budgets.map_attempts;
    let mut rows = Vec::new();
    for t in 0..trials {
        let trial = SeedStream::new(SeedStream::new(cfg.seed).child_seed("soundness", t));
        let mut rng = trial.stream(INSTANCE);
        let inst = generate_unsat(
            &mut rng,
            field,
            params.k,
            cfg.m(),
            cfg.n(),
            cfg.budgets.retries,
            cfg.budgets.brute_force,
        )?;
        let found = search_map(&inst, trial, params.ell, attempts, cfg.budgets.map_check)?;
        if !found.good() {
            rows.push(row(
                Suite::Soundness,
                format!("trial/{t}"),
                json!({"good_map": false, "attempts": attempts, "reduced": false}),
                json!({"good_map": true}),
                Status::ReportOnly,
            ));
            continue;
        }
        let ci = CliqueInstance::new(params.clone(), found.map, inst)?;
        let graph = materialize(&ci, cfg.budgets.vertex_cap)?;
        let res = max_clique_exact(&graph, solver_limits(cfg))?;
        let size = res.clique.len() as u64;
        rows.push(row(
            Suite::Soundness,
            format!("trial/{t}"),
            json!({
                "vertices": graph.n(),
                "edges": graph.edge_count(),
                "max_clique": size,
                "optimal": res.optimal,
                "map_attempt": found.attempt,
                "gap": size as f64 / target as f64,
            }),
            json!({"max_clique_below": target, "optimal": true}),
            pass_if(res.optimal && size < target),
        ));
    }
    Ok(rows)
}

fn completeness_suite(cfg: &RunConfig) -> Result<Vec<Row>> {
    let params = desk_params(cfg)?;
    let field = params.field();
    let target = u64::try_from(&params.clique_target()).unwrap_or(u64::MAX);
    let trials = cfg.trials.unwrap_or(20);
    let mut rows = Vec::new();
    for t in 0..trials {
        let trial = SeedStream::new(SeedStream::new(cfg.seed).child_seed("completeness", t));
        let mut rng = trial.stream(INSTANCE);
        let inst = generate_planted(&mut rng, field, params.k, cfg.m(), cfg.n())?;
        let tuple = inst.planted().expect("planted").to_vec();
        let map = gapclique::randmap::LinearMapG::from_seed(
            trial.child_seed("matrices", 0),
            field,
            params.k,
            cfg.m(),
            params.ell,
        )?;
        let ci = CliqueInstance::new(params.clone(), map, inst)?;
        let set = planted_clique(&ci, &tuple, cfg.budgets.vertex_cap.into())?;
        let non_edge = find_non_edge(&set, &ci)?;
        rows.push(row(
            Suite::Completeness,
            format!("trial/{t}"),
            json!({"clique_size": set.len(), "non_edge": non_edge.map(|(a, b, ty)| (a, b, ty.types()))}),
            json!({"clique_size": target}),
            pass_if(non_edge.is_none() && set.len() as u64 == target),
        ));
    }
    Ok(rows)
}
