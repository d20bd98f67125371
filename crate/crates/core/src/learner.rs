//! Exact empirical risk minimization over order-`k` choice functions.
//!
//! A positive item is fit exactly when it contains a `k`-set that no negative
//! item contains, so the learner marks every `k`-set touched by a negative
//! and then keeps the untouched `k`-sets of positive items.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use log::debug;
use num_bigint::BigInt;
use num_traits::Zero;

use crate::analysis::brute_force_min_error;
use crate::attrset::{enumerate_subsets, AttrSet};
use crate::choice::{ChoiceFunction, KOrderChoice};
use crate::data::Sample;
use crate::error::{Error, Result};
use crate::response::best_response;
use crate::universe::{Instance, Label};
use crate::Rational;

/// Everything the learner computed on one sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgState {
    pub k: usize,
    pub s_plus: Vec<AttrSet>,
    pub s_minus: Vec<AttrSet>,
    /// `k`-subsets of sample items that no negative item contains.
    pub z_ks: BTreeSet<AttrSet>,
    pub z_minus: BTreeSet<AttrSet>,
    pub z_plus: BTreeSet<AttrSet>,
    /// Empirical frequency of each distinct item. Not used by the result.
    pub p_hat: BTreeMap<AttrSet, Rational>,
    /// Number of `k`-subsets visited across all passes.
    pub enumerated: u64,
    /// Smallest positive item left without an eligible `k`-set.
    pub witness: Option<AttrSet>,
}

/// Runs the three passes and returns the full state, realizable or not.
pub fn alg_run(sample: &Sample, k: usize, instance: &Instance) -> Result<AlgState> {
    if k < 1 || k > instance.k2 {
        return Err(Error::BadCardinality(format!(
            "order k = {k} must lie in [1, k2 = {}]",
            instance.k2
        )));
    }
    for (x, _) in sample.entries() {
        instance.check_item(x)?;
    }
    let collapsed = sample.collapsed()?;
    let m = BigInt::from(sample.m());
    let mut enumerated = 0u64;

    let mut p_hat = BTreeMap::new();
    let mut z_ks: HashSet<AttrSet> = HashSet::new();
    let (mut s_plus, mut s_minus) = (Vec::new(), Vec::new());
    for (x, (y, count)) in &collapsed {
        p_hat.insert(x.clone(), Rational::new(BigInt::from(*count), m.clone()));
        for z in enumerate_subsets(x, k, k) {
            enumerated += 1;
            z_ks.insert(z);
        }
        match y {
            Label::Pos => s_plus.push(x.clone()),
            Label::Neg => s_minus.push(x.clone()),
        }
    }

    let mut z_minus = BTreeSet::new();
    for x in &s_minus {
        for z in enumerate_subsets(x, k, k) {
            enumerated += 1;
            z_ks.remove(&z);
            z_minus.insert(z);
        }
    }

    let mut z_plus = BTreeSet::new();
    let mut witness = None;
    for x in &s_plus {
        let mut covered = false;
        for z in enumerate_subsets(x, k, k) {
            enumerated += 1;
            if z_ks.contains(&z) {
                covered = true;
                z_plus.insert(z);
            }
        }
        if !covered && witness.is_none() {
            witness = Some(x.clone());
        }
    }
    debug!(
        "learner k={k}: |S+|={} |S-|={} |Z+|={} enumerated={enumerated}",
        s_plus.len(),
        s_minus.len(),
        z_plus.len()
    );

    Ok(AlgState {
        k,
        s_plus,
        s_minus,
        z_ks: z_ks.into_iter().collect(),
        z_minus,
        z_plus,
        p_hat,
        enumerated,
        witness,
    })
}

/// The order-`k` function with zero empirical error, or `NotRealizable`
/// naming the smallest positive item that cannot be fit.
pub fn alg_learn(sample: &Sample, k: usize, instance: &Instance) -> Result<KOrderChoice> {
    let state = alg_run(sample, k, instance)?;
    if let Some(witness) = state.witness {
        return Err(Error::NotRealizable { k, witness });
    }
    KOrderChoice::new(*instance, k, state.z_plus)
}

/// Like [`alg_learn`], but an unrealizable sample falls back to exhaustive
/// search over all order-`k` families when that search is small enough.
pub fn alg_learn_or_brute_force(sample: &Sample, k: usize, instance: &Instance) -> Result<KOrderChoice> {
    match alg_learn(sample, k, instance) {
        Err(Error::NotRealizable { .. }) => {
            let weighted: Vec<(AttrSet, Label, Rational)> = sample
                .collapsed()?
                .into_iter()
                .map(|(x, (y, c))| (x, y, Rational::from_integer(BigInt::from(c))))
                .collect();
            Ok(brute_force_min_error(&weighted, k, instance)?.0)
        }
        other => other,
    }
}

/// Whether some order-`k` function fits the sample exactly, with the smallest
/// unfit positive item when none does.
pub fn realizable(sample: &Sample, k: usize, instance: &Instance) -> Result<(bool, Option<AttrSet>)> {
    let state = alg_run(sample, k, instance)?;
    Ok((state.witness.is_none(), state.witness))
}

/// Fraction of sample entries whose best-responded label disagrees with the
/// recorded label.
pub fn empirical_error(h: &dyn ChoiceFunction, sample: &Sample) -> Result<Rational> {
    if sample.is_empty() {
        return Err(Error::InvalidSample("empty sample".into()));
    }
    let mut engaged: BTreeMap<&AttrSet, Label> = BTreeMap::new();
    let mut wrong = 0usize;
    for (x, y) in sample.entries() {
        let l = match engaged.get(x) {
            Some(l) => *l,
            None => {
                let l = best_response(h, x, sample.instance())?.engaged;
                engaged.insert(x, l);
                l
            }
        };
        if l != *y {
            wrong += 1;
        }
    }
    if wrong == 0 {
        return Ok(Rational::zero());
    }
    Ok(Rational::new(BigInt::from(wrong), BigInt::from(sample.m())))
}
