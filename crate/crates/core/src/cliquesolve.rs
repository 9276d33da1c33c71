//! Dense graphs, exact and greedy maximum-clique search, and the DIMACS and
//! JSON graph formats.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_budget, Error, Result};

pub const DEFAULT_MAX_VERTICES: usize = 2000;

/// Undirected simple graph stored as a symmetric adjacency bit matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseGraph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
    labels: Option<Vec<u64>>,
}

impl DenseGraph {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        Self {
            n,
            words,
            bits: vec![0; n * words],
            labels: None,
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.set(u, v);
            }
        }
        g
    }

    /// Builds the graph row by row from a symmetric predicate; only pairs
    /// `u < v` are queried.
    pub fn from_predicate<F>(n: usize, mut adjacent: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Result<bool>,
    {
        let mut g = Self::new(n);
        for u in 0..n {
            for v in u + 1..n {
                if adjacent(u, v)? {
                    g.set(u, v);
                }
            }
        }
        Ok(g)
    }

    /// Assembles a graph from the neighbour lists `rows[u] = {v > u}`.
    pub(crate) fn from_upper_rows(n: usize, rows: Vec<Vec<usize>>) -> Self {
        let mut g = Self::new(n);
        for (u, row) in rows.into_iter().enumerate() {
            for v in row {
                g.set(u, v);
            }
        }
        g
    }

    pub fn with_labels(mut self, labels: Vec<u64>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> Option<&[u64]> {
        self.labels.as_deref()
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.n {
            return Err(Error::contract(format!(
                "vertex {v} out of range for a graph on {} vertices",
                self.n
            )));
        }
        Ok(())
    }

    fn set(&mut self, u: usize, v: usize) {
        self.bits[u * self.words + v / 64] |= 1 << (v % 64);
        self.bits[v * self.words + u / 64] |= 1 << (u % 64);
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(Error::contract(format!("self-loop at vertex {u}")));
        }
        self.set(u, v);
        Ok(())
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.bits[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    fn row(&self, v: usize) -> &[u64] {
        &self.bits[v * self.words..(v + 1) * self.words]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.row(v).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        iter_bits(self.row(v))
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).sum::<usize>() / 2
    }

    /// Every edge once, as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|u| self.neighbors(u).filter(move |&v| v > u).map(move |v| (u, v)))
            .collect()
    }

    pub fn is_clique(&self, set: &[usize]) -> Result<bool> {
        for &v in set {
            self.check_vertex(v)?;
        }
        Ok(set
            .iter()
            .enumerate()
            .all(|(i, &u)| set[i + 1..].iter().all(|&v| self.has_edge(u, v))))
    }

    /// The first non-adjacent pair in `set`, if any.
    pub fn missing_edge(&self, set: &[usize]) -> Option<(usize, usize)> {
        set.iter()
            .enumerate()
            .find_map(|(i, &u)| set[i + 1..].iter().find(|&&v| !self.has_edge(u, v)).map(|&v| (u, v)))
    }

    pub fn to_dimacs(&self) -> String {
        let edges = self.edges();
        let mut out = format!("p edge {} {}\n", self.n, edges.len());
        for (u, v) in edges {
            let _ = writeln!(out, "e {} {}", u + 1, v + 1);
        }
        out
    }

    pub fn from_dimacs(text: &str) -> Result<Self> {
        let mut graph: Option<(DenseGraph, usize)> = None;
        let mut seen = 0usize;
        for (lineno, line) in text.lines().enumerate() {
            let mut parts = line.split_whitespace();
            let bad = |what: &str| Error::Parse(format!("line {}: {what}: {line:?}", lineno + 1));
            match parts.next() {
                None | Some("c") => {}
                Some("p") => {
                    if graph.is_some() {
                        return Err(bad("duplicate problem line"));
                    }
                    let fields: Vec<&str> = parts.collect();
                    if fields.len() != 3 || !matches!(fields[0], "edge" | "col") {
                        return Err(bad("expected `p edge N M`"));
                    }
                    let n = fields[1].parse().map_err(|_| bad("bad vertex count"))?;
                    let m = fields[2].parse().map_err(|_| bad("bad edge count"))?;
                    graph = Some((DenseGraph::new(n), m));
                }
                Some("e") => {
                    let (g, _) = graph.as_mut().ok_or_else(|| bad("edge before problem line"))?;
                    let ends: Vec<usize> = parts
                        .map(|p| p.parse::<usize>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| bad("bad endpoint"))?;
                    if ends.len() != 2 || ends[0] == 0 || ends[1] == 0 {
                        return Err(bad("expected `e u v` with 1-based endpoints"));
                    }
                    g.add_edge(ends[0] - 1, ends[1] - 1).map_err(|e| bad(&e.to_string()))?;
                    seen += 1;
                }
                Some(_) => return Err(bad("unknown line type")),
            }
        }
        let (g, m) = graph.ok_or_else(|| Error::Parse("missing problem line".into()))?;
        if seen != m {
            return Err(Error::Parse(format!(
                "problem line announces {m} edges but {seen} were listed"
            )));
        }
        Ok(g)
    }

    pub fn write_dimacs(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_dimacs())?;
        Ok(())
    }

    pub fn read_dimacs(path: &Path) -> Result<Self> {
        Self::from_dimacs(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_file(&self, meta: Option<GraphMeta>) -> GraphFile {
        GraphFile {
            n: self.n,
            edges: self.edges().into_iter().map(|(u, v)| [u, v]).collect(),
            labels: self.labels.clone(),
            meta,
        }
    }
}

fn iter_bits(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(i, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let b = w.trailing_zeros() as usize;
            w &= w - 1;
            Some(i * 64 + b)
        })
    })
}

/// Provenance carried by JSON graph files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphMeta {
    pub seed: Option<u64>,
    pub params: serde_json::Value,
    pub source_instance_hash: Option<String>,
}

/// The JSON graph format: 0-based edges listed once with `u < v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<u64>>,
    #[serde(default)]
    pub meta: Option<GraphMeta>,
}

impl GraphFile {
    pub fn to_graph(&self) -> Result<DenseGraph> {
        let mut g = DenseGraph::new(self.n);
        for &[u, v] in &self.edges {
            g.add_edge(u, v).map_err(|e| Error::Parse(e.to_string()))?;
        }
        match &self.labels {
            Some(l) => g.with_labels(l.clone()).map_err(|e| Error::Parse(e.to_string())),
            None => Ok(g),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Reads a graph in either format, choosing by the `.json` extension.
pub fn read_graph(path: &Path) -> Result<DenseGraph> {
    if path.extension().is_some_and(|e| e == "json") {
        GraphFile::read(path)?.to_graph()
    } else {
        DenseGraph::read_dimacs(path)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverLimits {
    pub max_vertices: usize,
    pub time_limit: Option<Duration>,
    /// Cap on search-tree nodes; unlike the time limit it is reproducible.
    pub node_limit: Option<u64>,
}

impl Default for SolverLimits {
    fn default() -> Self {
        Self {
            max_vertices: DEFAULT_MAX_VERTICES,
            time_limit: None,
            node_limit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CliqueResult {
    /// Vertices in ascending order.
    pub clique: Vec<usize>,
    /// Set when the search space was exhausted, so the size is the clique number.
    pub optimal: bool,
    pub nodes: u64,
}

struct Search {
    /// `rows[p]` is the neighbourhood of the vertex at position `p`, as positions.
    rows: Vec<Vec<u64>>,
    order: Vec<usize>,
    best: Vec<usize>,
    current: Vec<usize>,
    nodes: u64,
    limits: SolverLimits,
    start: Instant,
    stopped: bool,
}

impl Search {
    fn out_of_budget(&mut self) -> bool {
        if self.stopped {
            return true;
        }
        if self.limits.node_limit.is_some_and(|cap| self.nodes >= cap)
            || (self.nodes.is_multiple_of(1024) && self.limits.time_limit.is_some_and(|t| self.start.elapsed() >= t))
        {
            self.stopped = true;
        }
        self.stopped
    }

    /// Greedy sequential colouring of the candidate positions. Returns the
    /// positions in colour order together with their colour numbers.
    fn color(&self, cand: &[u64]) -> (Vec<usize>, Vec<usize>) {
        let mut uncolored = cand.to_vec();
        let mut positions = Vec::new();
        let mut colors = Vec::new();
        let mut color = 0;
        while uncolored.iter().any(|&w| w != 0) {
            color += 1;
            let mut q = uncolored.clone();
            while let Some(pos) = first_bit(&q) {
                unset(&mut uncolored, pos);
                unset(&mut q, pos);
                for (w, r) in q.iter_mut().zip(&self.rows[pos]) {
                    *w &= !r;
                }
                positions.push(pos);
                colors.push(color);
            }
        }
        (positions, colors)
    }

    fn expand(&mut self, mut cand: Vec<u64>) {
        self.nodes += 1;
        if self.out_of_budget() {
            return;
        }
        let (positions, colors) = self.color(&cand);
        for idx in (0..positions.len()).rev() {
            if self.current.len() + colors[idx] <= self.best.len() {
                return;
            }
            let pos = positions[idx];
            self.current.push(self.order[pos]);
            let next: Vec<u64> = cand.iter().zip(&self.rows[pos]).map(|(a, b)| a & b).collect();
            if next.iter().all(|&w| w == 0) {
                if self.current.len() > self.best.len() {
                    self.best = self.current.clone();
                }
            } else {
                self.expand(next);
            }
            self.current.pop();
            unset(&mut cand, pos);
            if self.stopped {
                return;
            }
        }
    }
}

fn first_bit(words: &[u64]) -> Option<usize> {
    words
        .iter()
        .enumerate()
        .find(|(_, &w)| w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

fn unset(words: &mut [u64], pos: usize) {
    words[pos / 64] &= !(1 << (pos % 64));
}

/// Degeneracy order with the densest core first.
fn degeneracy_order(g: &DenseGraph) -> Vec<usize> {
    let n = g.n;
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut removed = vec![false; n];
    let mut peel = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !removed[v])
            .min_by_key(|&v| (deg[v], v))
            .expect("vertices remain");
        removed[v] = true;
        peel.push(v);
        for u in g.neighbors(v) {
            if !removed[u] {
                deg[u] -= 1;
            }
        }
    }
    peel.reverse();
    peel
}

/// Exact maximum clique by branch and bound with greedy-colouring bounds.
///
/// Refuses graphs above `limits.max_vertices`. When a node or time limit
/// interrupts the search the best clique found so far is returned with
/// `optimal` cleared.
pub fn max_clique_exact(g: &DenseGraph, limits: SolverLimits) -> Result<CliqueResult> {
    check_budget("exact clique search", g.n as u128, limits.max_vertices as u128)?;
    if g.n == 0 {
        return Ok(CliqueResult {
            clique: Vec::new(),
            optimal: true,
            nodes: 0,
        });
    }
    let order = degeneracy_order(g);
    let mut position = vec![0; g.n];
    for (p, &v) in order.iter().enumerate() {
        position[v] = p;
    }
    let rows: Vec<Vec<u64>> = order
        .iter()
        .map(|&v| {
            let mut row = vec![0u64; g.words];
            for u in g.neighbors(v) {
                let p = position[u];
                row[p / 64] |= 1 << (p % 64);
            }
            row
        })
        .collect();
    let mut all = vec![0u64; g.words];
    for p in 0..g.n {
        all[p / 64] |= 1 << (p % 64);
    }
    let mut search = Search {
        rows,
        best: vec![order[0]],
        order,
        current: Vec::new(),
        nodes: 0,
        limits,
        start: Instant::now(),
        stopped: false,
    };
    search.expand(all);
    let mut clique = search.best;
    clique.sort_unstable();
    Ok(CliqueResult {
        clique,
        optimal: !search.stopped,
        nodes: search.nodes,
    })
}

/// Best clique over `restarts` randomized greedy constructions.
///
/// Each restart starts from a random vertex and repeatedly adds the
/// candidate with the most neighbours among the remaining candidates,
/// breaking ties at random.
pub fn greedy_clique<R: Rng + ?Sized>(g: &DenseGraph, restarts: usize, rng: &mut R) -> Vec<usize> {
    let mut best: Vec<usize> = Vec::new();
    if g.n == 0 {
        return best;
    }
    for _ in 0..restarts.max(1) {
        let start = rng.random_range(0..g.n);
        let mut clique = vec![start];
        let mut cand: Vec<usize> = g.neighbors(start).collect();
        while !cand.is_empty() {
            let scores: Vec<usize> = cand
                .iter()
                .map(|&v| cand.iter().filter(|&&u| g.has_edge(u, v)).count())
                .collect();
            let top = *scores.iter().max().expect("nonempty");
            let mut ties: Vec<usize> = cand
                .iter()
                .zip(&scores)
                .filter(|(_, &s)| s == top)
                .map(|(&v, _)| v)
                .collect();
            ties.shuffle(rng);
            let pick = ties[0];
            clique.push(pick);
            cand.retain(|&u| u != pick && g.has_edge(u, pick));
        }
        if clique.len() > best.len() {
            best = clique;
        }
    }
    best.sort_unstable();
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_graphs() {
        let k5 = DenseGraph::complete(5);
        assert_eq!(max_clique_exact(&k5, SolverLimits::default()).unwrap().clique.len(), 5);
        let empty = DenseGraph::new(4);
        assert_eq!(
            max_clique_exact(&empty, SolverLimits::default()).unwrap().clique.len(),
            1
        );
        let c5 = DenseGraph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        let r = max_clique_exact(&c5, SolverLimits::default()).unwrap();
        assert_eq!(r.clique.len(), 2);
        assert!(r.optimal);
    }

    #[test]
    fn wide_rows_cross_word_boundaries() {
        let mut g = DenseGraph::new(130);
        for (u, v) in [(3, 70), (70, 129), (3, 129)] {
            g.add_edge(u, v).unwrap();
        }
        assert_eq!(g.neighbors(70).collect::<Vec<_>>(), vec![3, 129]);
        let r = max_clique_exact(&g, SolverLimits::default()).unwrap();
        assert_eq!(r.clique, vec![3, 70, 129]);
    }
}
