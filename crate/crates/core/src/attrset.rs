//! Subsets of the attribute ground set.
//!
//! An [`AttrSet`] is a bit vector over attribute indices. Up to 128 attributes
//! live inline; larger universes spill to the heap. Trailing zero words are
//! always trimmed so that equal sets have equal representations.
//!
//! Sets are ordered lexicographically by their ascending member sequence,
//! with a proper prefix ordering first: `{0} < {0,1} < {0,2} < {1}`. Every
//! "pick any" in the game (tie-breaks, arbitrary witnesses) resolves to the
//! smallest set in this order.

use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

const WORD: usize = 64;

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct AttrSet {
    words: SmallVec<[u64; 2]>,
}

impl AttrSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// The set `{0, 1, ..., count - 1}`.
    pub fn prefix(count: usize) -> Self {
        let mut s = Self::new();
        for i in 0..count {
            s.insert(i);
        }
        s
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut s = Self::new();
        for i in indices {
            s.insert(i);
        }
        s
    }

    /// Builds a set from the low 64 bits of `mask`.
    pub fn from_mask(mask: u64) -> Self {
        let mut s = Self::new();
        if mask != 0 {
            s.words.push(mask);
        }
        s
    }

    /// Low 64 bits as a mask, or `None` if any member is >= 64.
    pub fn as_mask(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }

    pub fn insert(&mut self, idx: usize) {
        let (w, b) = (idx / WORD, idx % WORD);
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1u64 << b;
    }

    pub fn remove(&mut self, idx: usize) {
        let (w, b) = (idx / WORD, idx % WORD);
        if w < self.words.len() {
            self.words[w] &= !(1u64 << b);
            self.trim();
        }
    }

    pub fn contains(&self, idx: usize) -> bool {
        let (w, b) = (idx / WORD, idx % WORD);
        self.words.get(w).is_some_and(|word| word & (1u64 << b) != 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_subset(&self, other: &AttrSet) -> bool {
        if self.words.len() > other.words.len() {
            return false;
        }
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(a, b)| a & !b == 0)
    }

    pub fn is_superset(&self, other: &AttrSet) -> bool {
        other.is_subset(self)
    }

    pub fn is_disjoint(&self, other: &AttrSet) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(a, b)| a & b == 0)
    }

    pub fn union(&self, other: &AttrSet) -> AttrSet {
        let (long, short) = if self.words.len() >= other.words.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = long.clone();
        for (w, s) in out.words.iter_mut().zip(short.words.iter()) {
            *w |= s;
        }
        out
    }

    pub fn intersection(&self, other: &AttrSet) -> AttrSet {
        let mut out = AttrSet {
            words: self
                .words
                .iter()
                .zip(other.words.iter())
                .map(|(a, b)| a & b)
                .collect(),
        };
        out.trim();
        out
    }

    pub fn difference(&self, other: &AttrSet) -> AttrSet {
        let mut out = self.clone();
        for (w, o) in out.words.iter_mut().zip(other.words.iter()) {
            *w &= !o;
        }
        out.trim();
        out
    }

    /// Largest member, if any.
    pub fn max_index(&self) -> Option<usize> {
        let last = *self.words.last()?;
        Some((self.words.len() - 1) * WORD + (WORD - 1 - last.leading_zeros() as usize))
    }

    /// Members in ascending order.
    pub fn iter(&self) -> Members<'_> {
        Members {
            words: &self.words,
            word_idx: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }
}

pub struct Members<'a> {
    words: &'a [u64],
    word_idx: usize,
    current: u64,
}

impl Iterator for Members<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.word_idx * WORD + bit);
            }
            self.word_idx += 1;
            if self.word_idx >= self.words.len() {
                return None;
            }
            self.current = self.words[self.word_idx];
        }
    }
}

impl Ord for AttrSet {
    /// Compares sorted member lists. At the lowest member `d` in exactly one
    /// set, the set holding `d` is smaller unless the other set stops before `d`.
    fn cmp(&self, other: &Self) -> Ordering {
        let len = self.words.len().max(other.words.len());
        let word = |s: &AttrSet, i: usize| s.words.get(i).copied().unwrap_or(0);
        let Some(w) = (0..len).find(|&i| word(self, i) != word(other, i)) else {
            return Ordering::Equal;
        };
        let diff = word(self, w) ^ word(other, w);
        let d = diff.trailing_zeros();
        let above = |s: &AttrSet| {
            let rest = if d == 63 { 0 } else { word(s, w) >> (d + 1) };
            rest != 0 || s.words.iter().skip(w + 1).any(|&x| x != 0)
        };
        if word(self, w) & (1 << d) != 0 {
            if above(other) {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        } else if above(self) {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
}

impl PartialOrd for AttrSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FromIterator<usize> for AttrSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self::from_indices(iter)
    }
}

impl fmt::Debug for AttrSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for AttrSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, m) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{m}")?;
        }
        f.write_str("}")
    }
}

/// Every subset `s` of `x` with `lo <= |s| <= hi`, in lexicographic order.
pub fn enumerate_subsets(x: &AttrSet, lo: usize, hi: usize) -> Subsets {
    Subsets::new(x, lo, hi)
}

/// Depth-first walk over the subset lattice of a base set.
///
/// Preorder traversal of the "append a larger element" tree visits subsets
/// exactly in lexicographic order. Nodes smaller than `lo` are walked through
/// but not yielded.
pub struct Subsets {
    elems: SmallVec<[usize; 16]>,
    lo: usize,
    hi: usize,
    stack: SmallVec<[usize; 16]>,
    started: bool,
    done: bool,
}

impl Subsets {
    fn new(x: &AttrSet, lo: usize, hi: usize) -> Self {
        let elems: SmallVec<[usize; 16]> = x.iter().collect();
        let hi = hi.min(elems.len());
        Subsets {
            done: lo > hi,
            elems,
            lo,
            hi,
            stack: SmallVec::new(),
            started: false,
        }
    }

    fn advance(&mut self) -> bool {
        if !self.started {
            self.started = true;
            return true;
        }
        let n = self.elems.len();
        if self.stack.len() < self.hi {
            let next = self.stack.last().map_or(0, |&l| l + 1);
            if next < n {
                self.stack.push(next);
                return true;
            }
        }
        while let Some(last) = self.stack.pop() {
            if last + 1 < n {
                self.stack.push(last + 1);
                return true;
            }
        }
        false
    }

    fn current(&self) -> AttrSet {
        let mut out = AttrSet::new();
        for &i in &self.stack {
            out.insert(self.elems[i]);
        }
        out
    }
}

impl Iterator for Subsets {
    type Item = AttrSet;

    fn next(&mut self) -> Option<AttrSet> {
        while !self.done {
            if !self.advance() {
                self.done = true;
                break;
            }
            if self.stack.len() >= self.lo {
                return Some(self.current());
            }
        }
        None
    }
}
