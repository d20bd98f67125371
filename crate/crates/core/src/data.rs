//! Item distributions and labeled samples.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::attrset::AttrSet;
use crate::error::{Error, Result};
use crate::universe::{Instance, Label};
use crate::value::ValueFunction;
use crate::Rational;

/// A distribution with finite support and exact rational probabilities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteDistribution {
    instance: Instance,
    support: Vec<(AttrSet, Rational)>,
}

impl FiniteDistribution {
    pub fn new(instance: Instance, support: Vec<(AttrSet, Rational)>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        let mut seen = HashSet::new();
        let mut total = Rational::zero();
        for (x, p) in &support {
            instance.check_item(x)?;
            if p.is_negative() {
                return Err(Error::InvalidDistribution(format!("negative probability {p} on {x}")));
            }
            if !seen.insert(x.clone()) {
                return Err(Error::InvalidDistribution(format!("duplicate item {x}")));
            }
            total += p;
        }
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}, not 1")));
        }
        Ok(FiniteDistribution { instance, support })
    }

    /// Equal mass on every listed item.
    pub fn uniform(instance: Instance, items: Vec<AttrSet>) -> Result<Self> {
        let n = items.len();
        if n == 0 {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        let p = Rational::new(BigInt::one(), BigInt::from(n));
        Self::new(instance, items.into_iter().map(|x| (x, p.clone())).collect())
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn support(&self) -> &[(AttrSet, Rational)] {
        &self.support
    }

    pub fn items(&self) -> impl Iterator<Item = &AttrSet> {
        self.support.iter().map(|(x, _)| x)
    }

    /// Whether every item of the instance has positive mass.
    pub fn has_full_support(&self) -> Result<bool> {
        let positive: HashSet<&AttrSet> = self
            .support
            .iter()
            .filter(|(_, p)| p.is_positive())
            .map(|(x, _)| x)
            .collect();
        Ok(self.instance.items()?.iter().all(|x| positive.contains(x)))
    }
}

/// A labeled training set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    instance: Instance,
    entries: Vec<(AttrSet, Label)>,
}

impl Sample {
    pub fn new(instance: Instance, entries: Vec<(AttrSet, Label)>) -> Result<Self> {
        for (x, _) in &entries {
            instance.check_item(x)?;
        }
        Ok(Sample { instance, entries })
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn entries(&self) -> &[(AttrSet, Label)] {
        &self.entries
    }

    pub fn m(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct items with their label and multiplicity, rejecting any item
    /// that carries both labels.
    pub fn collapsed(&self) -> Result<BTreeMap<AttrSet, (Label, usize)>> {
        let mut out: BTreeMap<AttrSet, (Label, usize)> = BTreeMap::new();
        for (x, y) in &self.entries {
            let slot = out.entry(x.clone()).or_insert((*y, 0));
            if slot.0 != *y {
                return Err(Error::ConflictingLabels(x.clone()));
            }
            slot.1 += 1;
        }
        Ok(out)
    }

    /// Fraction of positive labels.
    pub fn positive_rate(&self) -> Rational {
        if self.entries.is_empty() {
            return Rational::zero();
        }
        let pos = self.entries.iter().filter(|(_, y)| y.is_pos()).count();
        Rational::new(BigInt::from(pos), BigInt::from(self.entries.len()))
    }
}

/// `m` i.i.d. draws from `dist`, labeled by `v`. Deterministic in `seed`.
pub fn sample_dataset(dist: &FiniteDistribution, v: &ValueFunction, m: usize, seed: u64) -> Result<Sample> {
    if m == 0 {
        return Err(Error::InvalidSample("sample size must be at least 1".into()));
    }
    let labels: Vec<Label> = dist
        .items()
        .map(|x| v.eval_value(x))
        .collect::<Result<_>>()?;
    let weights: Vec<f64> = dist
        .support
        .iter()
        .map(|(_, p)| p.to_f64().unwrap_or(0.0))
        .collect();
    let picker = WeightedIndex::new(&weights)
        .map_err(|e| Error::InvalidDistribution(format!("cannot sample: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..m)
        .map(|_| {
            let i = picker.sample(&mut rng);
            (dist.support[i].0.clone(), labels[i])
        })
        .collect();
    Ok(Sample {
        instance: dist.instance,
        entries,
    })
}
