use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::params::ReductionParams;
use super::vertex::{vertex_count, Vertex, VertexCodec};
use crate::cliquesolve::{DenseGraph, GraphMeta};
use crate::error::{check_budget, Error, Result};
use crate::ffield::{block_inner, BlockVector, FieldVector, PrimeField};
use crate::randmap::LinearMapG;
use crate::vecsum::VecSumInstance;

/// The reduced graph in implicit form: vertices are indexed by a codec and
/// edges are answered by an oracle.
#[derive(Debug, Clone)]
pub struct CliqueInstance {
    params: ReductionParams,
    g: LinearMapG,
    source: VecSumInstance,
    codec: Option<VertexCodec>,
    /// `images[i][j] = g(U_i[j])`.
    images: Vec<Vec<BlockVector>>,
}

impl CliqueInstance {
    pub fn new(params: ReductionParams, g: LinearMapG, source: VecSumInstance) -> Result<Self> {
        if g.field() != params.field() || source.field() != params.field() {
            return Err(Error::ModulusMismatch {
                left: params.q,
                right: if g.field() != params.field() {
                    g.field().modulus()
                } else {
                    source.field().modulus()
                },
            });
        }
        for (expected, found) in [
            (params.k, g.k()),
            (params.k, source.k()),
            (params.ell, g.ell()),
            (source.m(), g.m()),
        ] {
            if expected != found {
                return Err(Error::DimensionMismatch { expected, found });
            }
        }
        let images = source
            .collections()
            .iter()
            .map(|col| col.iter().map(|u| g.apply(u)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let codec = VertexCodec::new(&params).ok();
        Ok(Self {
            params,
            g,
            source,
            codec,
            images,
        })
    }

    pub fn params(&self) -> &ReductionParams {
        &self.params
    }

    pub fn field(&self) -> PrimeField {
        self.params.field()
    }

    pub fn map(&self) -> &LinearMapG {
        &self.g
    }

    pub fn source(&self) -> &VecSumInstance {
        &self.source
    }

    pub fn images(&self) -> &[Vec<BlockVector>] {
        &self.images
    }

    pub fn codec(&self) -> Result<&VertexCodec> {
        self.codec.as_ref().ok_or_else(|| {
            Error::Refused(format!(
                "|V| = {} does not fit a 64-bit vertex index",
                vertex_count(self.params.q, self.params.k, self.params.ell)
            ))
        })
    }

    /// `M(alpha, g(U_i[j]))`.
    pub fn image_under(&self, i: usize, j: usize, alpha: &[u64]) -> Vec<u64> {
        let a = FieldVector::new(self.field(), alpha.to_vec());
        block_inner(&a, &self.images[i][j])
            .expect("shapes fixed at construction")
            .into_entries()
    }

    fn block<'a>(&self, point: &'a [u64], i: usize) -> &'a [u64] {
        let k = self.params.k;
        &point[i * k..(i + 1) * k]
    }
}

/// The set of non-edge types triggered by a pair, as a bit mask over 1..=5.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct NonEdgeTypes(u8);

impl NonEdgeTypes {
    pub fn contains(&self, t: u8) -> bool {
        (1..=5).contains(&t) && self.0 >> t & 1 == 1
    }

    fn insert(&mut self, t: u8) {
        self.0 |= 1 << t;
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn types(&self) -> Vec<u8> {
        (1..=5).filter(|&t| self.contains(t)).collect()
    }
}

impl Serialize for NonEdgeTypes {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.types().serialize(s)
    }
}

fn sub(field: PrimeField, a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(&s, &t)| field.sub(s, t)).collect()
}

/// `alpha = gamma * alpha'` and `x != gamma * x'` for some `gamma`.
fn scalar_conflict(field: PrimeField, u: &Vertex, v: &Vertex) -> bool {
    let is_multiple = |gamma: u64, a: &[u64], b: &[u64]| a.iter().zip(b).all(|(&s, &t)| s == field.mul(gamma, t));
    (0..field.modulus()).any(|gamma| is_multiple(gamma, &u.alpha, &v.alpha) && !is_multiple(gamma, &u.x, &v.x))
}

/// Every non-edge type triggered between `u` and `v`.
///
/// Type 2 compares `u(rho)` and `v(rho)` as given by [`Vertex::assignment`].
/// Type 3 is tested in both orientations. Type 4
/// applies only when `alpha - alpha'` is nonzero on exactly one block; a
/// zero difference with `x != x'` is already caught by Types 3 and 5.
pub fn non_edge_types(u: &Vertex, v: &Vertex, inst: &CliqueInstance) -> Result<NonEdgeTypes> {
    u.validate(&inst.params)?;
    v.validate(&inst.params)?;
    let field = inst.field();
    Ok(classify(u, v, &u.assignment(field), &v.assignment(field), inst))
}

type Assignment = Vec<(Vec<u64>, Vec<u64>)>;

fn classify(u: &Vertex, v: &Vertex, lu: &Assignment, lv: &Assignment, inst: &CliqueInstance) -> NonEdgeTypes {
    let field = inst.field();
    let k = inst.params.k;
    let mut out = NonEdgeTypes::default();
    if u.alpha == v.alpha && u.beta == v.beta {
        out.insert(1);
    }
    if lu.iter().any(|(p, a)| lv.iter().any(|(p2, b)| p == p2 && a != b)) {
        out.insert(2);
    }
    if scalar_conflict(field, u, v) || scalar_conflict(field, v, u) {
        out.insert(3);
    }
    let diff = sub(field, &u.alpha, &v.alpha);
    let support: Vec<usize> = (0..k)
        .filter(|&i| inst.block(&diff, i).iter().any(|&c| c != 0))
        .collect();
    let dx = sub(field, &u.x, &v.x);
    if let [i] = support[..] {
        let direction = inst.block(&diff, i);
        let explained = inst.images[i].iter().any(|img| {
            img.as_vector().entries().chunks(k).zip(&dx).all(|(blk, &d)| {
                blk.iter()
                    .zip(direction)
                    .fold(0, |acc, (&w, &a)| field.add(acc, field.mul(w, a)))
                    == d
            })
        });
        if !explained {
            out.insert(4);
        }
    }
    let first = inst.block(&diff, 0);
    if (1..k).all(|i| inst.block(&diff, i) == first) && u.x != v.x {
        out.insert(5);
    }
    out
}

/// Adjacency in the reduced graph. Self-loops are undefined.
pub fn is_edge(u: &Vertex, v: &Vertex, inst: &CliqueInstance) -> Result<bool> {
    if u == v {
        return Err(Error::contract("is_edge needs two distinct vertices"));
    }
    Ok(non_edge_types(u, v, inst)?.is_empty())
}

/// The first pair of `set` that is not an edge, with its non-edge types.
pub fn find_non_edge(set: &[Vertex], inst: &CliqueInstance) -> Result<Option<(usize, usize, NonEdgeTypes)>> {
    for v in set {
        v.validate(&inst.params)?;
    }
    let field = inst.field();
    let labels: Vec<Assignment> = set.par_iter().map(|v| v.assignment(field)).collect();
    let found = (0..set.len())
        .into_par_iter()
        .map(|a| {
            (a + 1..set.len()).find_map(|b| {
                let t = classify(&set[a], &set[b], &labels[a], &labels[b], inst);
                (!t.is_empty()).then_some((a, b, t))
            })
        })
        .collect::<Vec<_>>();
    Ok(found.into_iter().flatten().next())
}

/// Exhaustive pairwise clique check over an explicit vertex list.
pub fn is_vertex_clique(set: &[Vertex], inst: &CliqueInstance) -> Result<bool> {
    Ok(find_non_edge(set, inst)?.is_none())
}

/// `T_u = {(alpha, beta, sum_i M(alpha_i, g(u_i)), sum_i M(beta_i, g(u_i)))}`,
/// ordered by `(alpha, beta)`.
pub fn planted_clique(inst: &CliqueInstance, tuple: &[usize], budget: u128) -> Result<Vec<Vertex>> {
    let p = &inst.params;
    if tuple.len() != p.k {
        return Err(Error::DimensionMismatch {
            expected: p.k,
            found: tuple.len(),
        });
    }
    for (i, &j) in tuple.iter().enumerate() {
        if j >= inst.images[i].len() {
            return Err(Error::contract(format!("index {j} out of range for collection {i}")));
        }
    }
    let target = p.clique_target();
    let size: u128 = target.try_into().unwrap_or(u128::MAX);
    check_budget("planted clique", size, budget)?;
    let values = linear_values(inst, tuple);
    let side = values.len();
    let point = |mut idx: usize| {
        let mut pt = vec![0; p.k * p.k];
        for slot in pt.iter_mut().rev() {
            *slot = idx as u64 % p.q;
            idx /= p.q as usize;
        }
        pt
    };
    let mut out = Vec::with_capacity(side * side);
    for a in 0..side {
        for b in 0..side {
            out.push(Vertex {
                alpha: point(a),
                beta: point(b),
                x: values[a].clone(),
                y: values[b].clone(),
            });
        }
    }
    Ok(out)
}

/// `rho -> sum_i M(rho_i, g(u_i))` tabulated over `F_q^{k^2}` in index order.
pub(crate) fn linear_values(inst: &CliqueInstance, tuple: &[usize]) -> Vec<Vec<u64>> {
    let p = &inst.params;
    let field = inst.field();
    let side = (p.q as usize).pow((p.k * p.k) as u32);
    let mut pt = vec![0u64; p.k * p.k];
    (0..side)
        .map(|idx| {
            let mut rest = idx;
            for slot in pt.iter_mut().rev() {
                *slot = rest as u64 % p.q;
                rest /= p.q as usize;
            }
            let mut acc = vec![0u64; p.ell];
            for (i, &j) in tuple.iter().enumerate() {
                let term = inst.image_under(i, j, inst.block(&pt, i));
                for (a, t) in acc.iter_mut().zip(term) {
                    *a = field.add(*a, t);
                }
            }
            acc
        })
        .collect()
}

/// Explicit adjacency over the listed vertices, labelled by codec rank
/// when the codec is available.
pub fn materialize_vertices(inst: &CliqueInstance, vertices: &[Vertex]) -> Result<DenseGraph> {
    let rows = (0..vertices.len())
        .into_par_iter()
        .map(|a| {
            let mut row = Vec::new();
            for b in a + 1..vertices.len() {
                if non_edge_types(&vertices[a], &vertices[b], inst)?.is_empty() {
                    row.push(b);
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let graph = DenseGraph::from_upper_rows(vertices.len(), rows);
    match inst.codec() {
        Ok(codec) => {
            let labels = vertices.iter().map(|v| codec.rank(v)).collect::<Result<Vec<_>>>()?;
            graph.with_labels(labels)
        }
        Err(_) => Ok(graph),
    }
}

/// The whole reduced graph, refused when `|V|` exceeds `budget`.
pub fn materialize(inst: &CliqueInstance, budget: u64) -> Result<DenseGraph> {
    let count = vertex_count(inst.params.q, inst.params.k, inst.params.ell);
    if count > budget.into() {
        return Err(Error::Refused(format!(
            "materialization needs |V| = {count} vertices but the budget is {budget}"
        )));
    }
    let codec = inst.codec()?;
    let vertices = (0..codec.count())
        .map(|r| codec.unrank(r))
        .collect::<Result<Vec<_>>>()?;
    materialize_vertices(inst, &vertices)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphFormat {
    Dimacs,
    Json,
}

/// Provenance for exported graphs: the map seed, the parameters and the
/// fingerprint of the source instance.
pub fn graph_meta(inst: &CliqueInstance) -> Result<GraphMeta> {
    Ok(GraphMeta {
        seed: inst.g.seed(),
        params: serde_json::to_value(&inst.params)?,
        source_instance_hash: Some(inst.source.fingerprint()),
    })
}

pub fn export_graph(graph: &DenseGraph, format: GraphFormat, path: &Path, meta: Option<GraphMeta>) -> Result<()> {
    match format {
        GraphFormat::Dimacs => graph.write_dimacs(path),
        GraphFormat::Json => graph.to_json_file(meta).write(path),
    }
}
