//! Game parameters and the accept/reject label.

use std::fmt;
use std::ops::Neg;

use crate::attrset::{enumerate_subsets, AttrSet};
use crate::error::{Error, Result};

/// Largest ground set whose items or representations we are willing to list.
pub const ENUMERATION_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Neg,
    Pos,
}

impl Label {
    pub fn from_bool(positive: bool) -> Label {
        if positive {
            Label::Pos
        } else {
            Label::Neg
        }
    }

    pub fn is_pos(self) -> bool {
        self == Label::Pos
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Label::Pos => 1,
            Label::Neg => -1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Label::Pos => '+',
            Label::Neg => '-',
        }
    }
}

impl Neg for Label {
    type Output = Label;

    fn neg(self) -> Label {
        match self {
            Label::Pos => Label::Neg,
            Label::Neg => Label::Pos,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.as_i8())
    }
}

/// `|E| = q` attributes, items of at most `n` attributes, and representations
/// of between `k1` and `k2` attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Instance {
    pub q: usize,
    pub n: usize,
    pub k1: usize,
    pub k2: usize,
}

pub fn make_instance(q: usize, n: usize, k1: usize, k2: usize) -> Result<Instance> {
    let bad = |what: &str| Err(Error::InvalidInstance(format!("{what} (q={q}, n={n}, k1={k1}, k2={k2})")));
    if k1 < 1 {
        return bad("k1 >= 1 violated");
    }
    if k1 > k2 {
        return bad("k1 <= k2 violated");
    }
    if k2 > n {
        return bad("k2 <= n violated");
    }
    if n > q {
        return bad("n <= q violated");
    }
    Ok(Instance { q, n, k1, k2 })
}

impl Instance {
    pub fn new(q: usize, n: usize, k1: usize, k2: usize) -> Result<Instance> {
        make_instance(q, n, k1, k2)
    }

    pub fn ground(&self) -> AttrSet {
        AttrSet::prefix(self.q)
    }

    fn in_ground(&self, x: &AttrSet) -> bool {
        x.max_index().is_none_or(|m| m < self.q)
    }

    pub fn is_representation(&self, z: &AttrSet) -> bool {
        (self.k1..=self.k2).contains(&z.len()) && self.in_ground(z)
    }

    pub fn check_representation(&self, z: &AttrSet) -> Result<()> {
        if self.is_representation(z) {
            Ok(())
        } else {
            Err(Error::InfeasibleRepresentation {
                set: z.clone(),
                k1: self.k1,
                k2: self.k2,
            })
        }
    }

    /// Items must have between `k1` and `n` attributes, all inside the ground set.
    pub fn check_item(&self, x: &AttrSet) -> Result<()> {
        if !self.in_ground(x) {
            return Err(Error::OutOfDomain {
                set: x.clone(),
                reason: format!("attribute index >= q = {}", self.q),
            });
        }
        if x.len() > self.n {
            return Err(Error::OutOfDomain {
                set: x.clone(),
                reason: format!("more than n = {} attributes", self.n),
            });
        }
        if x.len() < self.k1 {
            return Err(Error::NoFeasibleRepresentation {
                item: x.clone(),
                k1: self.k1,
            });
        }
        Ok(())
    }

    fn guard(&self) -> Result<()> {
        if self.q > ENUMERATION_LIMIT {
            return Err(Error::UniverseTooLarge(format!(
                "q = {} exceeds {}",
                self.q, ENUMERATION_LIMIT
            )));
        }
        Ok(())
    }

    /// All items: subsets of the ground set with `k1 <= |x| <= n`.
    pub fn items(&self) -> Result<Vec<AttrSet>> {
        self.guard()?;
        Ok(enumerate_subsets(&self.ground(), self.k1, self.n).collect())
    }

    /// Items of exactly `size` attributes.
    pub fn items_of_size(&self, size: usize) -> Result<Vec<AttrSet>> {
        self.guard()?;
        Ok(enumerate_subsets(&self.ground(), size, size).collect())
    }

    /// All feasible representations.
    pub fn representations(&self) -> Result<Vec<AttrSet>> {
        self.guard()?;
        Ok(enumerate_subsets(&self.ground(), self.k1, self.k2).collect())
    }

    /// Feasible representations of `x`, lexicographically.
    pub fn representations_of(&self, x: &AttrSet) -> impl Iterator<Item = AttrSet> {
        enumerate_subsets(x, self.k1, self.k2)
    }
}
