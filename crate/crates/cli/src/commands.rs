use std::path::Path;
use std::time::Duration;

use gapclique::cliquesolve::{greedy_clique, max_clique_exact, DenseGraph, GraphFile, SolverLimits};
use gapclique::ffield::{FieldVector, PrimeField};
use gapclique::lintest::{
    default_c_list, fourier_transform, list_decode_scalar, pass_probability, FunctionTable, PassMode, PassProbability,
};
use gapclique::randmap::{check_pairwise_separation, check_wellspread, CheckMode, GoodMapCertificate, LinearMapG};
use gapclique::reduction::{
    extract_witness, find_non_edge, graph_meta, materialize, planted_clique, CliqueInstance, ExtractionReport,
    Thresholds, Verdict, Vertex,
};
use gapclique::rng::{SeedStream, StreamRng, GAMMA_FILL, GREEDY, INSTANCE, MATRICES};
use gapclique::stats::{parse_fraction, Fraction};
use gapclique::vecsum::{generate_planted, generate_unsat, VecSumInstance};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::artifact::{read_payload, read_typed, Writer};
use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const LINTEST_STREAM: &str = "lintest";

fn field_of(cfg: &RunConfig) -> Result<PrimeField> {
    Ok(cfg.reduction_params()?.field())
}

fn say(cfg: &RunConfig, level: u8, msg: impl AsRef<str>) {
    if cfg.verbosity >= level {
        eprintln!("{}", msg.as_ref());
    }
}

pub fn gen_vecsum(cfg: &RunConfig, unsat: bool, output: &str) -> Result<()> {
    let field = field_of(cfg)?;
    let mut rng = SeedStream::new(cfg.seed).stream(INSTANCE);
    let (k, m, n) = (cfg.k(), cfg.m(), cfg.n());
    let inst = if unsat {
        generate_unsat(&mut rng, field, k, m, n, cfg.budgets.retries, cfg.budgets.brute_force)?
            .with_provenance(Some(cfg.seed), "unsat")
    } else {
        generate_planted(&mut rng, field, k, m, n)?.with_provenance(Some(cfg.seed), "planted")
    };
    let payload: Value = serde_json::from_str(&inst.to_json()?).expect("instance JSON is valid");
    let path = Writer::new(cfg, "gen-vecsum").json(output, &payload)?;
    println!("wrote {} (fingerprint {})", path.display(), inst.fingerprint());
    Ok(())
}

pub fn load_instance(path: &Path) -> Result<VecSumInstance> {
    let payload = read_payload(path)?;
    Ok(VecSumInstance::from_json(&payload.to_string())?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapArtifact {
    pub q: u64,
    pub k: usize,
    pub m: usize,
    pub ell: usize,
    pub map_seed: u64,
    pub attempt: u64,
    pub instance_hash: String,
    pub good: bool,
    /// `matrices[t][r]` is row `r` of the `t`-th `k x m` matrix.
    pub matrices: Vec<Vec<Vec<u64>>>,
    pub certificates: Vec<Value>,
}

pub struct MapSearch {
    pub map: LinearMapG,
    pub map_seed: u64,
    pub attempt: u64,
    pub certificates: Vec<GoodMapCertificate>,
}

impl MapSearch {
    pub fn good(&self) -> bool {
        self.certificates.iter().all(GoodMapCertificate::holds)
    }
}

/// Samples maps from successive child seeds until both properties hold
/// exhaustively or the attempts run out; returns the last map tried.
pub fn search_map(
    inst: &VecSumInstance,
    seeds: SeedStream,
    ell: usize,
    attempts: u64,
    budget: u128,
) -> Result<MapSearch> {
    let mode = CheckMode::Exhaustive { budget };
    let mut last = None;
    for attempt in 0..attempts {
        let map_seed = seeds.child_seed(MATRICES, attempt);
        let map = LinearMapG::from_seed(map_seed, inst.field(), inst.k(), inst.m(), ell)?;
        let certificates = vec![
            check_wellspread(&map, inst, mode)?,
            check_pairwise_separation(&map, inst, mode)?,
        ];
        let found = MapSearch {
            map,
            map_seed,
            attempt,
            certificates,
        };
        if found.good() {
            return Ok(found);
        }
        last = Some(found);
    }
    Ok(last.expect("at least one attempt"))
}

pub fn check_map(cfg: &RunConfig, instance: &Path, output: &str) -> Result<()> {
    let inst = load_instance(instance)?;
    let params = cfg.reduction_params()?;
    let found = search_map(
        &inst,
        SeedStream::new(cfg.seed),
        params.ell,
        cfg.budgets.map_attempts,
        cfg.budgets.map_check,
    )?;
    let artifact = MapArtifact {
        q: inst.field().modulus(),
        k: inst.k(),
        m: inst.m(),
        ell: params.ell,
        map_seed: found.map_seed,
        attempt: found.attempt,
        instance_hash: inst.fingerprint(),
        good: found.good(),
        matrices: found
            .map
            .matrices()
            .iter()
            .map(|a| (0..a.rows()).map(|r| a.row(r).to_vec()).collect())
            .collect(),
        certificates: found
            .certificates
            .iter()
            .map(|c| serde_json::to_value(c).expect("certificate serializes"))
            .collect(),
    };
    let path = Writer::new(cfg, "check-map").json(output, &artifact)?;
    println!("wrote {}", path.display());
    if !artifact.good {
        let bad: Vec<String> = found
            .certificates
            .iter()
            .filter(|c| !c.holds())
            .map(|c| format!("{:?}", c.counterexample))
            .collect();
        return Err(CliError::Property(format!(
            "no good map among {} attempts; last counterexamples: {}",
            cfg.budgets.map_attempts,
            bad.join("; ")
        )));
    }
    Ok(())
}

/// Regenerates the map recorded in a check-map artifact.
pub fn load_map(path: &Path, inst: &VecSumInstance) -> Result<LinearMapG> {
    let art: MapArtifact = read_typed(path)?;
    if art.instance_hash != inst.fingerprint() {
        return Err(CliError::Config(format!(
            "{} was sampled for instance {}, not {}",
            path.display(),
            art.instance_hash,
            inst.fingerprint()
        )));
    }
    let map = LinearMapG::from_seed(art.map_seed, PrimeField::new(art.q)?, art.k, art.m, art.ell)?;
    let regenerated: Vec<Vec<Vec<u64>>> = map
        .matrices()
        .iter()
        .map(|a| (0..a.rows()).map(|r| a.row(r).to_vec()).collect())
        .collect();
    if regenerated != art.matrices {
        return Err(gapclique::Error::Parse(format!(
            "{}: matrices do not match the recorded map seed",
            path.display()
        ))
        .into());
    }
    Ok(map)
}

fn clique_instance(cfg: &RunConfig, instance: &Path, map: &Path) -> Result<CliqueInstance> {
    let inst = load_instance(instance)?;
    let g = load_map(map, &inst)?;
    Ok(CliqueInstance::new(cfg.reduction_params()?, g, inst)?)
}

pub fn reduce(cfg: &RunConfig, instance: &Path, map: &Path, output: &str) -> Result<()> {
    let ci = clique_instance(cfg, instance, map)?;
    let graph = materialize(&ci, cfg.budgets.vertex_cap)?;
    let file = graph.to_json_file(Some(graph_meta(&ci)?));
    let path = Writer::new(cfg, "reduce").json(output, &file)?;
    println!(
        "wrote {} (|V| = {}, |E| = {})",
        path.display(),
        graph.n(),
        graph.edge_count()
    );
    Ok(())
}

fn load_graph(path: &Path) -> Result<GraphFile> {
    if path.extension().is_some_and(|e| e == "json") {
        read_typed(path)
    } else {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Ok(DenseGraph::from_dimacs(&text)?.to_json_file(None))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ExportFormat {
    Dimacs,
    Json,
}

pub fn export(cfg: &RunConfig, graph: &Path, format: ExportFormat, output: &str) -> Result<()> {
    let file = load_graph(graph)?;
    let writer = Writer::new(cfg, "export");
    let path = writer.path(output)?;
    match format {
        ExportFormat::Dimacs => {
            let g = file.to_graph()?;
            let text = format!(
                "c {} seed={} config_hash={}\n{}",
                crate::artifact::TOOL,
                cfg.seed,
                cfg.hash(),
                g.to_dimacs()
            );
            writer.text(&path, &text)?;
        }
        ExportFormat::Json => {
            let mut text = serde_json::to_string_pretty(&file).map_err(|e| CliError::json(&path, e))?;
            text.push('\n');
            writer.text(&path, &text)?;
        }
    }
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExactOutcome {
    pub size: usize,
    pub clique: Vec<usize>,
    /// Labels of the clique vertices, when the graph carries labels.
    pub labels: Option<Vec<u64>>,
    pub optimal: bool,
    pub nodes: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveArtifact {
    pub n: usize,
    pub edges: usize,
    pub source_instance_hash: Option<String>,
    pub exact: ExactOutcome,
    pub greedy_size: usize,
    pub greedy_restarts: usize,
}

pub fn solver_limits(cfg: &RunConfig) -> SolverLimits {
    SolverLimits {
        max_vertices: usize::try_from(cfg.budgets.vertex_cap).unwrap_or(usize::MAX),
        time_limit: cfg.budgets.solver_time_ms.map(Duration::from_millis),
        node_limit: cfg.budgets.node_limit,
    }
}

pub fn solve(cfg: &RunConfig, graph: &Path, restarts: usize, output: &str) -> Result<()> {
    let file = load_graph(graph)?;
    let g = file.to_graph()?;
    let res = max_clique_exact(&g, solver_limits(cfg))?;
    let mut rng = SeedStream::new(cfg.seed).stream(GREEDY);
    let greedy = greedy_clique(&g, restarts, &mut rng);
    let labels = g.labels().map(|l| res.clique.iter().map(|&v| l[v]).collect());
    let artifact = SolveArtifact {
        n: g.n(),
        edges: g.edge_count(),
        source_instance_hash: file.meta.and_then(|m| m.source_instance_hash),
        exact: ExactOutcome {
            size: res.clique.len(),
            clique: res.clique,
            labels,
            optimal: res.optimal,
            nodes: res.nodes,
        },
        greedy_size: greedy.len(),
        greedy_restarts: restarts,
    };
    let path = Writer::new(cfg, "solve").json(output, &artifact)?;
    println!(
        "wrote {} (clique size {}{}, greedy {})",
        path.display(),
        artifact.exact.size,
        if artifact.exact.optimal {
            ", optimal"
        } else {
            ", not proven optimal"
        },
        artifact.greedy_size
    );
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct CompletenessCertificate {
    pub tuple: Vec<usize>,
    pub clique_size: usize,
    pub expected_size: String,
    pub is_clique: bool,
    pub non_edge: Option<(usize, usize, Vec<u8>)>,
    pub instance_hash: String,
}

fn planted_tuple(ci: &CliqueInstance) -> Result<Vec<usize>> {
    ci.source()
        .planted()
        .map(<[usize]>::to_vec)
        .ok_or_else(|| CliError::Config("the instance records no planted tuple".into()))
}

pub fn verify_complete(cfg: &RunConfig, instance: &Path, map: &Path, output: &str) -> Result<()> {
    let ci = clique_instance(cfg, instance, map)?;
    let tuple = planted_tuple(&ci)?;
    let set = planted_clique(&ci, &tuple, cfg.budgets.vertex_cap.into())?;
    let non_edge = find_non_edge(&set, &ci)?;
    let target = ci.params().clique_target();
    let cert = CompletenessCertificate {
        tuple,
        clique_size: set.len(),
        expected_size: target.to_string(),
        is_clique: non_edge.is_none(),
        non_edge: non_edge.map(|(a, b, t)| (a, b, t.types())),
        instance_hash: ci.source().fingerprint(),
    };
    let path = Writer::new(cfg, "verify-complete").json(output, &cert)?;
    println!("wrote {}", path.display());
    if !cert.is_clique || u64::try_from(&target).ok() != Some(set.len() as u64) {
        return Err(CliError::Property(format!(
            "planted set of size {} is not a clique of size {target}: non-edge {:?}",
            cert.clique_size, cert.non_edge
        )));
    }
    Ok(())
}

pub fn extract(
    cfg: &RunConfig,
    instance: &Path,
    map: &Path,
    clique: Option<&Path>,
    kappa: Option<&str>,
    output: &str,
) -> Result<()> {
    let ci = clique_instance(cfg, instance, map)?;
    let vertices: Vec<Vertex> = match clique {
        Some(path) => {
            let solved: SolveArtifact = read_typed(path)?;
            let labels = solved
                .exact
                .labels
                .ok_or_else(|| CliError::Config(format!("{} carries no vertex labels", path.display())))?;
            let codec = ci.codec()?;
            labels
                .iter()
                .map(|&r| codec.unrank(r))
                .collect::<gapclique::Result<_>>()?
        }
        None => planted_clique(&ci, &planted_tuple(&ci)?, cfg.budgets.vertex_cap.into())?,
    };
    let mut thresholds = Thresholds::standard(ci.params().k);
    if let Some(text) = kappa {
        let kappa: Fraction = parse_fraction(text).map_err(CliError::Config)?;
        thresholds = thresholds.with_kappa(kappa);
    }
    let mut rng = SeedStream::new(cfg.seed).stream(GAMMA_FILL);
    let report: ExtractionReport = extract_witness(&vertices, &ci, &thresholds, &mut rng)?;
    let path = Writer::new(cfg, "extract").json(output, &report)?;
    println!("wrote {}", path.display());
    match &report.verdict {
        Verdict::Witness { tuple } => {
            println!("witness {tuple:?}");
            Ok(())
        }
        Verdict::Failure(stage) => Err(CliError::Property(format!("extraction failed: {stage:?}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TableKind {
    Linear,
    Random,
    ScalarRespecting,
}

#[derive(Debug, Clone, Serialize)]
pub struct LintestReport {
    pub q: u64,
    pub dim: usize,
    pub range: usize,
    pub kind: Option<TableKind>,
    pub scalar_respecting: bool,
    pub pass_probability: PassProbability,
    /// Parseval mass, best coefficient and its point, for scalar tables.
    pub fourier: Option<(f64, f64, Vec<u64>)>,
    /// Points `rho` whose coefficient reaches `c_list * delta`, for scalar-respecting scalar tables.
    pub decoded: Option<Vec<Vec<u64>>>,
}

/// Decoding radius and list constant for the lintest report.
pub struct DecodeArgs<'a> {
    pub delta: &'a str,
    pub c_list: Option<&'a str>,
}

pub fn random_linear_table(field: PrimeField, dim: usize, range: usize, rng: &mut StreamRng) -> Result<FunctionTable> {
    let rows: Vec<FieldVector> = (0..range).map(|_| FieldVector::random(field, dim, rng)).collect();
    Ok(FunctionTable::from_fn(field, dim, range, |a| {
        rows.iter()
            .map(|r| {
                r.entries()
                    .iter()
                    .zip(a)
                    .fold(0, |acc, (&c, &x)| field.add(acc, field.mul(c, x)))
            })
            .collect()
    })?)
}

pub fn lintest(cfg: &RunConfig, kind: TableKind, table: Option<&Path>, decode: DecodeArgs, output: &str) -> Result<()> {
    let delta = parse_fraction(decode.delta).map_err(CliError::Config)?;
    let c_list = decode
        .c_list
        .map(parse_fraction)
        .transpose()
        .map_err(CliError::Config)?
        .unwrap_or_else(default_c_list);
    let (f, kind) = match table {
        Some(path) => (FunctionTable::read(path)?, None),
        None => {
            let field = field_of(cfg)?;
            let mut rng = SeedStream::new(cfg.seed).stream(LINTEST_STREAM);
            let f = match kind {
                TableKind::Linear => random_linear_table(field, cfg.dim, cfg.range, &mut rng)?,
                TableKind::Random => FunctionTable::random(field, cfg.dim, cfg.range, &mut rng)?,
                TableKind::ScalarRespecting => {
                    FunctionTable::random_scalar_respecting(field, cfg.dim, cfg.range, &mut rng)?
                }
            };
            (f, Some(kind))
        }
    };
    let pass = pass_probability(
        &f,
        PassMode::Exact {
            pair_budget: cfg.budgets.pair_enum,
        },
    )?;
    let fourier = if f.range() == 1 {
        let ft = fourier_transform(&f)?;
        let (rho, best) = ft.max_real();
        Some((ft.parseval_mass(), best, f.space().point(rho)))
    } else {
        None
    };
    let decoded = if f.range() == 1 && f.is_scalar_respecting() {
        let list = list_decode_scalar(&f, delta, c_list)?;
        Some(list.iter().map(|c| c.coeffs().entries().to_vec()).collect())
    } else {
        None
    };
    let report = LintestReport {
        q: f.field().modulus(),
        dim: f.dim(),
        range: f.range(),
        kind,
        scalar_respecting: f.is_scalar_respecting(),
        pass_probability: pass,
        fourier,
        decoded,
    };
    let path = Writer::new(cfg, "lintest").json(output, &report)?;
    say(cfg, 1, format!("{report:?}"));
    println!(
        "wrote {} (pass probability {})",
        path.display(),
        report.pass_probability.as_f64()
    );
    Ok(())
}
