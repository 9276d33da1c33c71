//! The two-query linearity test over `F_q`, Fourier analysis over `q`-th
//! roots of unity, threshold list decoding and the piecing procedure that
//! lifts scalar decoding to vector-valued functions.

mod accept;
mod decode;
mod fourier;
mod linear;
mod piecing;
mod table;

pub use accept::{
    accepted_count, accepted_set, agreement, pass_probability, AcceptedSet, PassMode, PassProbability,
    DEFAULT_PAIR_BUDGET,
};
pub use decode::{
    decode_with_threshold, default_c_list, list_decode_scalar, verify_unique_consistency, ConsistencyReport,
};
pub use fourier::{
    agreement_from_fourier, fourier_transform, root_power_sum, roots_of_unity, triple_correlation_check, FourierTable,
    TripleCorrelationReport, FOURIER_TOL,
};
pub use linear::{LinearScalarFn, LinearVecFn};
pub use piecing::{piece_together, DeltaRule, PiecingConfig, PiecingOutcome, PiecingState, PiecingStats};
pub use table::{FunctionTable, MAX_TABLE_POINTS};
