//! The reduction from k-Vector-Sum to gap k-Clique.

mod extract;
mod gamma;
mod graph;
mod params;
mod vertex;

pub use extract::{extract_witness, AlphaChoice, DirectionReport, ExtractionReport, FailureStage, Thresholds, Verdict};
pub use gamma::{build_gamma, FillLog, GammaTable};
pub use graph::{
    export_graph, find_non_edge, graph_meta, is_edge, is_vertex_clique, materialize, materialize_vertices,
    non_edge_types, planted_clique, CliqueInstance, GraphFormat, NonEdgeTypes,
};
pub use params::{
    default_kappa, is_probable_prime, lambda, next_prime_above, param_schedule, primality_is_proven, q_hat,
    EpsilonRule, GapFunction, Mode, PaperSchedule, ReductionParams,
};
pub use vertex::{vertex_count, vertex_eval, Vertex, VertexCodec};
