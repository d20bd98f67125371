//! Choice functions over representations.
//!
//! A binary-weighted order-`k` choice function puts weight `a+` on a family of
//! `k`-subsets and `a-` on every other subset of size at most `k`. Because
//! `a+` outweighs any possible amount of negative mass, the sign of the
//! weighted sum reduces to a containment test: `h(z) = +1` iff `|z| >= k` and
//! `z` contains a member of the positive family. [`KOrderChoice`] evaluates
//! that logical form; [`eval_choice_weighted`] keeps the weighted sum around
//! as an independent cross-check.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_integer::binomial;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::attrset::{enumerate_subsets, AttrSet};
use crate::error::{Error, Result};
use crate::universe::{Instance, Label, ENUMERATION_LIMIT};
use crate::Rational;

/// Exact weights for the weighted cross-check.
pub type Weight = Ratio<i128>;

/// A user's committed accept/reject rule on representations.
pub trait ChoiceFunction: Send + Sync {
    /// Label of a representation. Callers are responsible for feasibility.
    fn label(&self, z: &AttrSet) -> Label;

    /// Whether some feasible representation of `x` is accepted.
    fn accepts_some(&self, x: &AttrSet, instance: &Instance) -> bool {
        instance
            .representations_of(x)
            .any(|z| self.label(&z).is_pos())
    }
}

impl<T: ChoiceFunction + ?Sized> ChoiceFunction for &T {
    fn label(&self, z: &AttrSet) -> Label {
        (**self).label(z)
    }
    fn accepts_some(&self, x: &AttrSet, instance: &Instance) -> bool {
        (**self).accepts_some(x, instance)
    }
}

impl<T: ChoiceFunction + ?Sized> ChoiceFunction for Box<T> {
    fn label(&self, z: &AttrSet) -> Label {
        (**self).label(z)
    }
    fn accepts_some(&self, x: &AttrSet, instance: &Instance) -> bool {
        (**self).accepts_some(x, instance)
    }
}

impl<T: ChoiceFunction + ?Sized> ChoiceFunction for Arc<T> {
    fn label(&self, z: &AttrSet) -> Label {
        (**self).label(z)
    }
    fn accepts_some(&self, x: &AttrSet, instance: &Instance) -> bool {
        (**self).accepts_some(x, instance)
    }
}

/// Binary-weighted order-`k` choice function, stored as its positive family.
///
/// The family is kept as given: it is not closed under anything and two
/// different families may induce the same function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KOrderChoice {
    k: usize,
    positive: BTreeSet<AttrSet>,
    instance: Instance,
}

impl KOrderChoice {
    pub fn new<I>(instance: Instance, k: usize, positive: I) -> Result<Self>
    where
        I: IntoIterator<Item = AttrSet>,
    {
        if k < 1 || k > instance.k2 {
            return Err(Error::BadCardinality(format!(
                "order k = {k} must lie in [1, k2 = {}]",
                instance.k2
            )));
        }
        let positive: BTreeSet<AttrSet> = positive.into_iter().collect();
        for p in &positive {
            if p.len() != k {
                return Err(Error::BadCardinality(format!(
                    "positive set {p} has size {} but the order is {k}",
                    p.len()
                )));
            }
            if p.max_index().is_some_and(|m| m >= instance.q) {
                return Err(Error::OutOfDomain {
                    set: p.clone(),
                    reason: format!("attribute index >= q = {}", instance.q),
                });
            }
        }
        Ok(KOrderChoice {
            k,
            positive,
            instance,
        })
    }

    /// The all-negative function of order `k`.
    pub fn empty(instance: Instance, k: usize) -> Result<Self> {
        Self::new(instance, k, std::iter::empty())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn positive(&self) -> &BTreeSet<AttrSet> {
        &self.positive
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    /// Whether some member of the positive family lies inside `s`.
    pub fn contains_positive(&self, s: &AttrSet) -> bool {
        if s.len() < self.k {
            return false;
        }
        if self.positive.len() <= 64 || (self.positive.len() as u128) <= binomial(s.len() as u128, self.k as u128) {
            self.positive.iter().any(|p| p.is_subset(s))
        } else {
            enumerate_subsets(s, self.k, self.k).any(|w| self.positive.contains(&w))
        }
    }

    /// `h(z)` for a feasible representation.
    pub fn eval_choice(&self, z: &AttrSet) -> Result<Label> {
        self.instance.check_representation(z)?;
        Ok(self.label(z))
    }
}

impl ChoiceFunction for KOrderChoice {
    fn label(&self, z: &AttrSet) -> Label {
        Label::from_bool(self.contains_positive(z))
    }

    fn accepts_some(&self, x: &AttrSet, instance: &Instance) -> bool {
        // Any positive k-set inside x can be padded with other attributes of
        // x up to k1, and k <= k2 keeps it feasible.
        if self.k <= instance.k2 && x.len() >= instance.k1 {
            self.contains_positive(x)
        } else {
            instance
                .representations_of(x)
                .any(|z| self.label(&z).is_pos())
        }
    }
}

impl fmt::Display for KOrderChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={} P=[", self.k)?;
        for (i, p) in self.positive.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("]")
    }
}

/// Induced label `f_h(x) = h(phi_h(x))` computed from the positive family
/// alone: +1 iff some positive set lies inside the item.
pub fn induced_eval(h: &KOrderChoice, x: &AttrSet) -> Result<Label> {
    h.instance.check_item(x)?;
    Ok(Label::from_bool(h.positive.iter().any(|p| p.is_subset(x))))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightScheme {
    pub a_plus: Weight,
    pub a_minus: Weight,
}

impl WeightScheme {
    /// `a+ = sum_{i=1..k} C(n, i) + 1` and `a- = -1/2`.
    pub fn default_for(k: usize, n: usize) -> WeightScheme {
        WeightScheme {
            a_plus: Weight::from_integer(negative_mass_bound(k, n) + 1),
            a_minus: Weight::new(-1, 2),
        }
    }

    pub fn validate(&self, k: usize, n: usize) -> Result<()> {
        let minus_ok = self.a_minus < Weight::zero() && self.a_minus > Weight::from_integer(-1);
        if !minus_ok {
            return Err(Error::InvalidWeights(format!(
                "a- = {} must lie in (-1, 0)",
                self.a_minus
            )));
        }
        let bound = Weight::from_integer(negative_mass_bound(k, n));
        if self.a_plus <= bound {
            return Err(Error::InvalidWeights(format!(
                "a+ = {} must exceed sum_(i=1..{k}) C({n}, i) = {bound}",
                self.a_plus
            )));
        }
        Ok(())
    }
}

fn negative_mass_bound(k: usize, n: usize) -> i128 {
    (1..=k).map(|i| binomial(n as i128, i as i128)).sum()
}

fn weighted_sign(h: &KOrderChoice, ws: &WeightScheme, s: &AttrSet) -> Label {
    let (mut plus, mut minus) = (0i128, 0i128);
    for sub in enumerate_subsets(s, 1, h.k) {
        if sub.len() == h.k && h.positive.contains(&sub) {
            plus += 1;
        } else {
            minus += 1;
        }
    }
    let total = ws.a_plus * plus + ws.a_minus * minus;
    Label::from_bool(total.is_positive())
}

/// `h(z)` as the sign of the exact weighted sum over nonempty subsets of `z`
/// of size at most `k`.
pub fn eval_choice_weighted(h: &KOrderChoice, ws: &WeightScheme, z: &AttrSet) -> Result<Label> {
    h.instance.check_representation(z)?;
    ws.validate(h.k, h.instance.n)?;
    Ok(weighted_sign(h, ws, z))
}

/// Induced label as the same weighted sum taken over subsets of the item.
pub fn induced_eval_weighted(h: &KOrderChoice, ws: &WeightScheme, x: &AttrSet) -> Result<Label> {
    h.instance.check_item(x)?;
    ws.validate(h.k, h.instance.n)?;
    Ok(weighted_sign(h, ws, x))
}

/// A labelling of the sets of one exact size, kept as its positive sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictedFn {
    ell: usize,
    positive: BTreeSet<AttrSet>,
}

impl RestrictedFn {
    pub fn new<I: IntoIterator<Item = AttrSet>>(ell: usize, positive: I) -> Result<Self> {
        let positive: BTreeSet<AttrSet> = positive.into_iter().collect();
        if let Some(bad) = positive.iter().find(|p| p.len() != ell) {
            return Err(Error::BadCardinality(format!(
                "{bad} does not have size {ell}"
            )));
        }
        Ok(RestrictedFn { ell, positive })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn positive(&self) -> &BTreeSet<AttrSet> {
        &self.positive
    }

    pub fn eval(&self, z: &AttrSet) -> Label {
        Label::from_bool(self.positive.contains(z))
    }
}

/// Extends `g` from sets of size `ell` to every representation by containment.
pub fn lift(g: &RestrictedFn, _instance: &Instance) -> GeneralChoice {
    let g = g.clone();
    GeneralChoice::new(move |z| {
        Label::from_bool(
            z.len() >= g.ell && enumerate_subsets(z, g.ell, g.ell).any(|w| g.positive.contains(&w)),
        )
    })
}

type Predicate = dyn Fn(&AttrSet) -> Label + Send + Sync;

/// An arbitrary deterministic choice rule, optionally tabulated.
#[derive(Clone)]
pub struct GeneralChoice {
    predicate: Arc<Predicate>,
    table: Option<Arc<HashMap<AttrSet, Label>>>,
}

impl GeneralChoice {
    pub fn new<F>(predicate: F) -> Self
    where
        F: Fn(&AttrSet) -> Label + Send + Sync + 'static,
    {
        GeneralChoice {
            predicate: Arc::new(predicate),
            table: None,
        }
    }

    pub fn constant(label: Label) -> Self {
        Self::new(move |_| label)
    }

    /// Looks `z` up in `table`, falling back to `default`.
    pub fn from_table(table: HashMap<AttrSet, Label>, default: Label) -> Self {
        Self::new(move |z| table.get(z).copied().unwrap_or(default))
    }

    /// Evaluates the predicate once on every feasible representation and
    /// serves later queries from the table. Fails if the table would exceed `cap`.
    pub fn memoized(self, instance: &Instance, cap: usize) -> Result<Self> {
        let reps = instance.representations()?;
        if reps.len() > cap {
            return Err(Error::MemoCapExceeded {
                needed: reps.len(),
                cap,
            });
        }
        let table = reps
            .into_iter()
            .map(|z| {
                let l = (self.predicate)(&z);
                (z, l)
            })
            .collect();
        Ok(GeneralChoice {
            predicate: self.predicate,
            table: Some(Arc::new(table)),
        })
    }

    pub fn is_memoized(&self) -> bool {
        self.table.is_some()
    }
}

impl ChoiceFunction for GeneralChoice {
    fn label(&self, z: &AttrSet) -> Label {
        if let Some(l) = self.table.as_ref().and_then(|t| t.get(z)) {
            return *l;
        }
        (self.predicate)(z)
    }
}

impl fmt::Debug for GeneralChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneralChoice")
            .field("memo_entries", &self.table.as_ref().map(|t| t.len()))
            .finish_non_exhaustive()
    }
}

/// Converts an arbitrary choice rule into a binary-weighted function with the
/// same induced behavior on every item.
///
/// The order is the largest size of an inclusion-minimal accepted
/// representation (`k1` with an empty family if nothing is accepted), and the
/// family is every accepted representation of exactly that size. The result is
/// only equivalent when no accepted representation is smaller than that order;
/// otherwise the smallest such representation is returned as a witness.
pub fn to_k_order(h: &dyn ChoiceFunction, instance: &Instance) -> Result<KOrderChoice> {
    let reps = instance.representations()?;
    let accepted: BTreeSet<AttrSet> = reps.into_iter().filter(|z| h.label(z).is_pos()).collect();
    if accepted.is_empty() {
        return KOrderChoice::empty(*instance, instance.k1);
    }
    let k = accepted
        .iter()
        .filter(|z| {
            enumerate_subsets(z, instance.k1, z.len() - 1).all(|sub| !accepted.contains(&sub))
        })
        .map(AttrSet::len)
        .max()
        .expect("a smallest accepted set is always minimal");
    if let Some(witness) = accepted.iter().find(|z| z.len() < k) {
        return Err(Error::NoEquivalentKOrder {
            k,
            witness: witness.clone(),
        });
    }
    KOrderChoice::new(
        *instance,
        k,
        accepted.into_iter().filter(|z| z.len() == k),
    )
}

/// The single-set function `P = {u}`, which lies in order `k` but not `k - 1`.
pub fn separator(k: usize, u: &AttrSet, instance: &Instance) -> Result<KOrderChoice> {
    if u.len() != k {
        return Err(Error::BadCardinality(format!("|{u}| = {} but k = {k}", u.len())));
    }
    if k > instance.k2 {
        return Err(Error::BadCardinality(format!("k = {k} exceeds k2 = {}", instance.k2)));
    }
    KOrderChoice::new(*instance, k, [u.clone()])
}

/// `z -> sign(g(z))`, with zero mapping to -1.
pub fn threshold_choice<G>(g: G) -> GeneralChoice
where
    G: Fn(&AttrSet) -> Rational + Send + Sync + 'static,
{
    GeneralChoice::new(move |z| Label::from_bool(g(z).is_positive()))
}

/// Number of random disjoint pairs probed by [`subadditive_to_k1`].
pub const SUBADDITIVITY_PROBES: usize = 512;

/// Replaces a threshold-subadditive rule by an order-`k1` function with the
/// same induced behavior: the positive family is every `k1`-set on which `g`
/// is positive.
///
/// Subadditivity is the caller's promise; it is probed (not proven) on random
/// disjoint pairs `A`, `B` with `A`, `B` and `A ∪ B` all feasible.
pub fn subadditive_to_k1<G>(g: G, instance: &Instance) -> Result<KOrderChoice>
where
    G: Fn(&AttrSet) -> Rational,
{
    if instance.q > ENUMERATION_LIMIT {
        return Err(Error::UniverseTooLarge(format!(
            "q = {} exceeds {}",
            instance.q, ENUMERATION_LIMIT
        )));
    }
    probe_subadditivity(&g, instance, SUBADDITIVITY_PROBES, 0x5ad)?;
    let k1 = instance.k1;
    let family = enumerate_subsets(&instance.ground(), k1, k1).filter(|z| g(z).is_positive());
    KOrderChoice::new(*instance, k1, family)
}

fn probe_subadditivity<G>(g: &G, instance: &Instance, probes: usize, seed: u64) -> Result<()>
where
    G: Fn(&AttrSet) -> Rational,
{
    let (k1, k2) = (instance.k1, instance.k2);
    if 2 * k1 > k2 || 2 * k1 > instance.q {
        return Ok(());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attrs: Vec<usize> = (0..instance.q).collect();
    for _ in 0..probes {
        let total_max = k2.min(instance.q);
        let a_len = rng.gen_range(k1..=total_max - k1);
        let b_len = rng.gen_range(k1..=total_max - a_len);
        attrs.shuffle(&mut rng);
        let a: AttrSet = attrs[..a_len].iter().copied().collect();
        let b: AttrSet = attrs[a_len..a_len + b_len].iter().copied().collect();
        let union = a.union(&b);
        if g(&union) > g(&a) + g(&b) {
            return Err(Error::SubadditivityViolated {
                left: a,
                right: b,
                union,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::universe::make_instance;
    use num_bigint::BigInt;

    fn s(ix: &[usize]) -> AttrSet {
        AttrSet::from_indices(ix.iter().copied())
    }

    fn inst(q: usize, n: usize, k1: usize, k2: usize) -> Instance {
        make_instance(q, n, k1, k2).unwrap()
    }

    #[test]
    fn eval_choice_examples() {
        let h1 = KOrderChoice::new(inst(3, 2, 1, 2), 1, [s(&[0])]).unwrap();
        assert_eq!(h1.eval_choice(&s(&[0, 1])).unwrap(), Label::Pos);

        let h2 = KOrderChoice::new(inst(4, 3, 1, 3), 2, [s(&[0, 1])]).unwrap();
        assert_eq!(h2.eval_choice(&s(&[0])).unwrap(), Label::Neg);
        assert_eq!(h2.eval_choice(&s(&[0, 1, 2])).unwrap(), Label::Pos);
        assert!(matches!(
            h2.eval_choice(&s(&[0, 1, 2, 3])),
            Err(Error::InfeasibleRepresentation { .. })
        ));
    }

    #[test]
    fn rejects_wrong_family_sizes() {
        assert!(KOrderChoice::new(inst(4, 3, 1, 2), 2, [s(&[0])]).is_err());
        assert!(KOrderChoice::new(inst(4, 3, 1, 2), 3, [s(&[0, 1, 2])]).is_err());
        assert!(KOrderChoice::new(inst(4, 3, 1, 2), 1, [s(&[7])]).is_err());
    }

    #[test]
    fn weighted_sum_examples() {
        let i = inst(4, 3, 1, 3);
        let h = KOrderChoice::new(i, 2, [s(&[0, 1])]).unwrap();
        let ws = WeightScheme {
            a_plus: Weight::from_integer(7),
            a_minus: Weight::new(-1, 2),
        };
        // 7 + 5 * (-1/2) = 9/2
        assert_eq!(eval_choice_weighted(&h, &ws, &s(&[0, 1, 2])).unwrap(), Label::Pos);
        // 3 * (-1/2) = -3/2
        assert_eq!(eval_choice_weighted(&h, &ws, &s(&[0, 2])).unwrap(), Label::Neg);
        assert_eq!(ws, WeightScheme::default_for(2, 3));
    }

    #[test]
    fn weight_validation() {
        let ok = WeightScheme::default_for(2, 3);
        assert!(ok.validate(2, 3).is_ok());
        let low_plus = WeightScheme {
            a_plus: Weight::from_integer(6),
            a_minus: Weight::new(-1, 2),
        };
        assert!(matches!(low_plus.validate(2, 3), Err(Error::InvalidWeights(_))));
        let bad_minus = WeightScheme {
            a_plus: Weight::from_integer(7),
            a_minus: Weight::from_integer(-1),
        };
        assert!(bad_minus.validate(2, 3).is_err());
        let h = KOrderChoice::new(inst(4, 3, 1, 3), 2, [s(&[0, 1])]).unwrap();
        assert!(eval_choice_weighted(&h, &low_plus, &s(&[0, 1])).is_err());
    }

    #[test]
    fn lift_examples() {
        let i = inst(4, 3, 1, 3);
        let g = RestrictedFn::new(2, [s(&[0, 1])]).unwrap();
        let h = lift(&g, &i);
        assert_eq!(h.label(&s(&[0])), Label::Neg);
        assert_eq!(h.label(&s(&[0, 1, 2])), Label::Pos);
        assert!(RestrictedFn::new(2, [s(&[0])]).is_err());
    }

    #[test]
    fn induced_examples() {
        let i = inst(4, 3, 1, 2);
        let h = KOrderChoice::new(i, 2, [s(&[0, 1])]).unwrap();
        assert_eq!(induced_eval(&h, &s(&[0, 1, 3])).unwrap(), Label::Pos);
        assert_eq!(induced_eval(&h, &s(&[0, 3])).unwrap(), Label::Neg);
        let none = KOrderChoice::empty(i, 2).unwrap();
        for x in i.items().unwrap() {
            assert_eq!(induced_eval(&none, &x).unwrap(), Label::Neg);
        }
        assert!(induced_eval(&h, &s(&[0, 1, 2, 3])).is_err());
    }

    #[test]
    fn to_k_order_all_negative() {
        let i = inst(4, 3, 2, 3);
        let h = to_k_order(&GeneralChoice::constant(Label::Neg), &i).unwrap();
        assert_eq!(h.k(), 2);
        assert!(h.positive().is_empty());
    }

    #[test]
    fn to_k_order_recovers_order() {
        let i = inst(5, 4, 1, 3);
        let c = KOrderChoice::new(i, 2, [s(&[0, 1]), s(&[2, 4])]).unwrap();
        let back = to_k_order(&c, &i).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn to_k_order_flags_mixed_sizes() {
        // Accepts {0} and the pair {1,2} but neither 1 nor 2 alone.
        let i = inst(3, 2, 1, 2);
        let h = GeneralChoice::new(|z: &AttrSet| {
            Label::from_bool(z.contains(0) || (z.contains(1) && z.contains(2)))
        });
        assert_eq!(
            to_k_order(&h, &i),
            Err(Error::NoEquivalentKOrder { k: 2, witness: s(&[0]) })
        );
    }

    #[test]
    fn separator_examples() {
        let i = inst(5, 3, 1, 3);
        let h = separator(2, &s(&[0, 1]), &i).unwrap();
        assert_eq!(h.positive().iter().cloned().collect::<Vec<_>>(), vec![s(&[0, 1])]);
        for x in i.items().unwrap() {
            assert_eq!(induced_eval(&h, &x).unwrap().is_pos(), x.is_superset(&s(&[0, 1])));
        }
        assert!(matches!(separator(2, &s(&[0]), &i), Err(Error::BadCardinality(_))));
    }

    fn modular(c: Vec<i64>) -> impl Fn(&AttrSet) -> Rational + Clone {
        move |z: &AttrSet| Rational::from_integer(BigInt::from(z.iter().map(|e| c[e]).sum::<i64>()))
    }

    #[test]
    fn subadditive_modular() {
        let i = inst(4, 3, 1, 2);
        let h = subadditive_to_k1(modular(vec![1, -2, 1, 1]), &i).unwrap();
        assert_eq!(h.k(), 1);
        assert_eq!(
            h.positive().iter().cloned().collect::<Vec<_>>(),
            vec![s(&[0]), s(&[2]), s(&[3])]
        );
    }

    #[test]
    fn subadditive_shared_cover_is_all_negative() {
        // every attribute covers the same single point: g = |cover| - 1 = 0
        let i = inst(4, 3, 1, 2);
        let h = subadditive_to_k1(|_: &AttrSet| Rational::zero(), &i).unwrap();
        assert!(h.positive().is_empty());
    }

    #[test]
    fn subadditivity_probe_catches_superadditive() {
        // disjoint singleton covers: g({0,1}) = 1 > g({0}) + g({1}) = 0
        let i = inst(4, 3, 1, 2);
        let g = |z: &AttrSet| Rational::from_integer(BigInt::from(z.len() as i64 - 1));
        assert!(matches!(
            subadditive_to_k1(g, &i),
            Err(Error::SubadditivityViolated { .. })
        ));
    }

    #[test]
    fn memo_cap_is_enforced() {
        let i = inst(6, 3, 1, 3);
        let h = GeneralChoice::constant(Label::Pos);
        assert!(matches!(
            h.clone().memoized(&i, 10),
            Err(Error::MemoCapExceeded { needed: 41, cap: 10 })
        ));
        let m = h.memoized(&i, 100).unwrap();
        assert!(m.is_memoized());
        assert_eq!(m.label(&s(&[1, 2])), Label::Pos);
    }
}
