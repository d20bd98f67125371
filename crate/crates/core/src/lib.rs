//! A user commits to an accept/reject rule over subset representations; the
//! system then shows each item through whichever truthful representation
//! maximizes engagement. This crate evaluates that game exactly: best
//! responses, payoffs, exact learning of order-`k` rules, and the analyses of
//! how the order trades off user and system payoff.
//!
//! Attribute indices are zero-based. Sets order lexicographically by their
//! sorted members, so `{0} < {0,1} < {0,2} < {1}`, and every tie is broken
//! towards the smallest.

pub mod analysis;
pub mod attrset;
pub mod choice;
pub mod data;
pub mod error;
pub mod formats;
pub mod learner;
pub mod response;
pub mod scenarios;
pub mod universe;
pub mod users;
pub mod value;

/// Exact probabilities and payoffs.
pub type Rational = num_rational::BigRational;

pub use attrset::{enumerate_subsets, AttrSet};
pub use choice::{ChoiceFunction, GeneralChoice, KOrderChoice};
pub use data::{sample_dataset, FiniteDistribution, Sample};
pub use error::{Error, Result};
pub use response::{Responder, ResponderRegistry};
pub use universe::{make_instance, Instance, Label};
pub use users::{UserRegistry, UserStrategy};
pub use value::ValueFunction;
