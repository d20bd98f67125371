use thiserror::Error;

use crate::attrset::AttrSet;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("{set} is outside the item domain: {reason}")]
    OutOfDomain { set: AttrSet, reason: String },

    #[error("{set} is not a feasible representation (size must be in [{k1}, {k2}])")]
    InfeasibleRepresentation { set: AttrSet, k1: usize, k2: usize },

    #[error("item {item} has fewer than k1 = {k1} attributes")]
    NoFeasibleRepresentation { item: AttrSet, k1: usize },

    #[error("invalid weight scheme: {0}")]
    InvalidWeights(String),

    #[error("universe too large for enumeration: {0}")]
    UniverseTooLarge(String),

    #[error("search space too large: {0}")]
    SearchSpaceTooLarge(String),

    #[error("bad cardinality: {0}")]
    BadCardinality(String),

    #[error("subadditivity violated: g({union}) > g({left}) + g({right})")]
    SubadditivityViolated {
        left: AttrSet,
        right: AttrSet,
        union: AttrSet,
    },

    #[error("no equivalent order-{k} function: item {witness} is engaged but has fewer than {k} attributes")]
    NoEquivalentKOrder { k: usize, witness: AttrSet },

    #[error("sample is not realizable at order {k}: positive item {witness} has no eligible {k}-subset")]
    NotRealizable { k: usize, witness: AttrSet },

    #[error("item {0} appears with both labels")]
    ConflictingLabels(AttrSet),

    #[error("choice memo would hold {needed} entries, cap is {cap}")]
    MemoCapExceeded { needed: usize, cap: usize },

    #[error("divisibility violated: {0}")]
    DivisibilityViolated(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
