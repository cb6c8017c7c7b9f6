//! Satisfiability engine for linear input/output properties of feed-forward
//! ReLU networks.
//!
//! The pipeline mirrors the classic lazy-splitting architecture: a network and
//! a property are lowered into a conjunction of linear equalities, variable
//! bounds and ReLU pairs ([`encode`]), interval propagation tightens bounds and
//! pre-fixes ReLU phases ([`propagate_bounds`]), and a bound-satisfaction
//! simplex over exact rationals ([`simplex::Tableau`]) is driven by a trail
//! based search that splits ReLU pairs into their active/inactive cases only
//! after cheap assignment repairs have failed ([`solve`]).
//!
//! Everything is computed in exact rational arithmetic; a `Sat` verdict comes
//! with a concrete counterexample that replays bit-for-bit through the
//! network's forward pass.

pub mod encode;
pub mod network;
pub mod nnet;
pub mod oracle;
pub mod problem;
pub mod property;
pub mod propagate;
pub mod rat;
pub mod search;
pub mod simplex;
pub mod topology;

pub use encode::{concrete_valuation, encode, EncodeError};
pub use network::{
    derive_seed, generate_network, GenError, NetGenSpec, Network, NetworkError, Normalization,
};
pub use nnet::{parse_network, parse_network_with, serialize_network, NnetError, ParseOptions};
pub use oracle::{
    oracle_solve, pattern_at, OracleError, OracleStats, PhasePattern, DEFAULT_MAX_ORACLE_PAIRS,
};
pub use problem::{ReluPair, Row, VarId, VarRole, VerificationProblem};
pub use property::{parse_property, LinearAtom, Property, PropertyError, Relation, VarRef};
pub use propagate::{propagate_bounds, Infeasible};
pub use rat::{decimal_approx, format_exact, parse_number, Rat};
pub use search::{
    assignment_consistent, check_relus, solve, validate_counterexample, Phase, PhaseOrigin,
    PhaseState, ResourceLimit, SearchState, SolveConfig, SolveStats, Validation, Verdict,
    DEFAULT_SPLIT_THRESHOLD,
};
pub use simplex::{
    BoundKind, BoundsSnapshot, FeasResult, ImmediateConflict, Tableau, UpdateError,
};
pub use topology::{run_bench, BenchReport, InstanceRecord, TopologyAggregate};
