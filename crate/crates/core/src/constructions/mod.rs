//! Explicit witnesses built from sets of naturals, and the two splicing
//! bounds as checkable predicates with seeded instance generators.

mod chopped;
mod cohen;
mod dominator;
mod splice;
mod rconditions;

pub use chopped::{
    factorial_chopped_real, factorial_guarantee, non_meagre_witness, FactorialChop, GuaranteeRow, DEFAULT_BUDGET,
    NonMeagreWitness,
};
pub use cohen::{
    cohen_antisplit_witness, cohen_block_ratio_bound, random_block_trace, AntisplitReport,
    AntisplitRow, BlockFamilyTrace,
};
pub use dominator::{bisect_witness_from_dominator, DominatorWitness};
pub use splice::{
    union_splice_conclusion, union_splice_instance, prefix_splice_conclusion, prefix_splice_instance, UnionSpliceInstance,
    PrefixSpliceInstance,
};
pub use rconditions::{r_conditions_check, RClause, RClauseResult, RTraces};

use crate::sets::SetError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConstructionError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("horizon {0} too small for a single boundary")]
    HorizonTooSmall(u64),
    #[error("function table too short: needs g({needed})")]
    TableTooShort { needed: u64 },
    #[error("function table must be strictly increasing with g(0) > 0")]
    BadTable,
    #[error("missing trace for sign pattern {0}")]
    TraceGap(String),
    #[error("block trace invariant violated at block {block}: {detail}")]
    TraceInvariant { block: usize, detail: String },
    #[error(transparent)]
    Set(#[from] SetError),
}

pub type Result<T, E = ConstructionError> = std::result::Result<T, E>;

fn pre(msg: impl Into<String>) -> ConstructionError {
    ConstructionError::Precondition(msg.into())
}
