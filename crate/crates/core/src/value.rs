//! The user's ground-truth worthwhileness `Y(x) = sign(v(x))`.

use std::collections::{BTreeMap, BTreeSet};

use crate::attrset::{enumerate_subsets, AttrSet};
use crate::choice::KOrderChoice;
use crate::error::{Error, Result};
use crate::universe::{Label, ENUMERATION_LIMIT};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValueForm {
    /// Explicit label for every nonempty subset of size at most `n`.
    TruthTable(BTreeMap<AttrSet, Label>),
    /// `+1` iff the set contains a member of `family` (all of size `ell`).
    Induced {
        ell: usize,
        family: BTreeSet<AttrSet>,
    },
    /// The induced table of a choice function.
    KOrder(KOrderChoice),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueFunction {
    form: ValueForm,
    q: usize,
    n: usize,
}

impl ValueFunction {
    /// Wraps an explicit table; it must cover every nonempty subset of the
    /// ground set with at most `n` attributes, and nothing else.
    pub fn truth_table(q: usize, n: usize, table: BTreeMap<AttrSet, Label>) -> Result<Self> {
        guard(q)?;
        if let Some(stray) = table
            .keys()
            .find(|x| x.is_empty() || x.len() > n || x.max_index().is_some_and(|m| m >= q))
        {
            return Err(Error::OutOfDomain {
                set: stray.clone(),
                reason: format!("truth table entries must be nonempty subsets of [0,{q}) of size <= {n}"),
            });
        }
        let expected: u64 = (1..=n).map(|i| num_integer::binomial(q as u64, i as u64)).sum();
        if table.len() as u64 != expected {
            let missing = enumerate_subsets(&AttrSet::prefix(q), 1, n)
                .find(|x| !table.contains_key(x))
                .expect("short table has a missing entry");
            return Err(Error::OutOfDomain {
                set: missing,
                reason: "truth table has no entry for this subset".into(),
            });
        }
        Ok(ValueFunction {
            form: ValueForm::TruthTable(table),
            q,
            n,
        })
    }

    /// Truth table that is `+1` exactly on `positives`.
    pub fn from_positive_sets<I>(q: usize, n: usize, positives: I) -> Result<Self>
    where
        I: IntoIterator<Item = AttrSet>,
    {
        guard(q)?;
        let positives: BTreeSet<AttrSet> = positives.into_iter().collect();
        let mut table: BTreeMap<AttrSet, Label> = enumerate_subsets(&AttrSet::prefix(q), 1, n)
            .map(|x| (x, Label::Neg))
            .collect();
        for p in positives {
            match table.get_mut(&p) {
                Some(l) => *l = Label::Pos,
                None => {
                    return Err(Error::OutOfDomain {
                        set: p,
                        reason: format!("not a nonempty subset of [0,{q}) of size <= {n}"),
                    })
                }
            }
        }
        Self::truth_table(q, n, table)
    }

    pub fn induced(q: usize, n: usize, ell: usize, family: BTreeSet<AttrSet>) -> Result<Self> {
        if let Some(bad) = family.iter().find(|g| g.len() != ell) {
            return Err(Error::BadCardinality(format!("{bad} does not have size {ell}")));
        }
        Ok(ValueFunction {
            form: ValueForm::Induced { ell, family },
            q,
            n,
        })
    }

    pub fn from_choice(h: KOrderChoice) -> Self {
        let inst = *h.instance();
        ValueFunction {
            form: ValueForm::KOrder(h),
            q: inst.q,
            n: inst.n,
        }
    }

    pub fn form(&self) -> &ValueForm {
        &self.form
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `Y(x)`; defined for nonempty `x` with at most `n` attributes.
    pub fn eval_value(&self, x: &AttrSet) -> Result<Label> {
        if x.len() > self.n || x.max_index().is_some_and(|m| m >= self.q) {
            return Err(Error::OutOfDomain {
                set: x.clone(),
                reason: format!("value function is defined on subsets of [0,{}) of size <= {}", self.q, self.n),
            });
        }
        match &self.form {
            ValueForm::TruthTable(t) => t.get(x).copied().ok_or_else(|| Error::OutOfDomain {
                set: x.clone(),
                reason: "truth table has no entry for this subset".into(),
            }),
            ValueForm::Induced { family, .. } => {
                Ok(Label::from_bool(family.iter().any(|g| g.is_subset(x))))
            }
            ValueForm::KOrder(h) => Ok(Label::from_bool(h.positive().iter().any(|p| p.is_subset(x)))),
        }
    }

    /// Explicit table over all nonempty subsets of size at most `n`.
    pub fn to_truth_table(&self) -> Result<BTreeMap<AttrSet, Label>> {
        if let ValueForm::TruthTable(t) = &self.form {
            return Ok(t.clone());
        }
        guard(self.q)?;
        enumerate_subsets(&AttrSet::prefix(self.q), 1, self.n)
            .map(|x| self.eval_value(&x).map(|l| (x, l)))
            .collect()
    }

    pub fn into_truth_table(self) -> Result<ValueFunction> {
        let table = self.to_truth_table()?;
        Self::truth_table(self.q, self.n, table)
    }
}

fn guard(q: usize) -> Result<()> {
    if q > ENUMERATION_LIMIT {
        return Err(Error::UniverseTooLarge(format!(
            "truth tables need q <= {ENUMERATION_LIMIT}, got {q}"
        )));
    }
    Ok(())
}
