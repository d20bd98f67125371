//! How much each side gains as the user's order `k` changes: induced
//! complexity, exhaustive optimal families, the diminishing-returns
//! construction, and the closed-form curves.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::attrset::{enumerate_subsets, AttrSet};
use crate::choice::{ChoiceFunction, KOrderChoice, RestrictedFn};
use crate::data::FiniteDistribution;
use crate::error::{Error, Result};
use crate::response::best_response;
use crate::universe::{Instance, Label, ENUMERATION_LIMIT};
use crate::value::ValueFunction;
use crate::Rational;

/// Exhaustive family search handles at most this many candidate sets.
pub const BRUTE_FORCE_LIMIT: usize = 22;

fn guard_q(q: usize) -> Result<()> {
    if q > ENUMERATION_LIMIT {
        return Err(Error::UniverseTooLarge(format!("q = {q} exceeds {ENUMERATION_LIMIT}")));
    }
    Ok(())
}

/// `C(n, k)`, zero when `k > n`.
pub fn choose(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    num_integer::binomial(BigUint::from(n), BigUint::from(k))
}

fn ratio(num: BigUint, den: BigUint) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexityReport {
    /// Smallest `ell` at which the function is an existential over
    /// `ell`-sets; `None` if there is none (the function is not monotone).
    pub ell_star: Option<usize>,
    /// The maximal `g` at `ell_star`, restricted to sets inside positive items.
    pub witness_g: Option<RestrictedFn>,
}

/// Induced complexity of `f` over every item of the instance.
pub fn induced_complexity(f: &ValueFunction, instance: &Instance) -> Result<ComplexityReport> {
    guard_q(instance.q)?;
    induced_complexity_over(f, &instance.items()?, instance.n)
}

/// Induced complexity of `f` restricted to `items`, searching `ell` in `[1, max_ell]`.
///
/// At each `ell` the candidate `g` accepts every `ell`-set that no negative
/// item contains; any other feasible `g` accepts a subset of these, so `f`
/// has complexity `ell` iff this `g` covers every positive item.
pub fn induced_complexity_over(f: &ValueFunction, items: &[AttrSet], max_ell: usize) -> Result<ComplexityReport> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for x in items {
        match f.eval_value(x)? {
            Label::Pos => pos.push(x),
            Label::Neg => neg.push(x),
        }
    }
    for ell in 1..=max_ell {
        let blocked: HashSet<AttrSet> = neg.iter().flat_map(|x| enumerate_subsets(x, ell, ell)).collect();
        let mut g = BTreeSet::new();
        let mut all_covered = true;
        for x in &pos {
            let before = g.len();
            let mut covered = false;
            for z in enumerate_subsets(x, ell, ell) {
                if !blocked.contains(&z) {
                    covered = true;
                    g.insert(z);
                }
            }
            if !covered {
                all_covered = false;
                break;
            }
            debug_assert!(g.len() >= before);
        }
        if all_covered {
            return Ok(ComplexityReport {
                ell_star: Some(ell),
                witness_g: Some(RestrictedFn::new(ell, g)?),
            });
        }
    }
    Ok(ComplexityReport {
        ell_star: None,
        witness_g: None,
    })
}

/// Labels `x -> h(phi_h(x))` for each item.
pub fn induced_table(h: &dyn ChoiceFunction, items: &[AttrSet], instance: &Instance) -> Result<Vec<Label>> {
    items
        .iter()
        .map(|x| best_response(h, x, instance).map(|r| r.engaged))
        .collect()
}

fn candidate_sets(k: usize, instance: &Instance) -> Result<Vec<AttrSet>> {
    guard_q(instance.q)?;
    if k < 1 || k > instance.k2 {
        return Err(Error::BadCardinality(format!("order k = {k} must lie in [1, k2 = {}]", instance.k2)));
    }
    let z: Vec<AttrSet> = enumerate_subsets(&instance.ground(), k, k).collect();
    if z.len() > BRUTE_FORCE_LIMIT {
        return Err(Error::SearchSpaceTooLarge(format!(
            "C({}, {k}) = {} candidate sets, limit is {BRUTE_FORCE_LIMIT}",
            instance.q,
            z.len()
        )));
    }
    Ok(z)
}

/// Bit `i` set iff candidate `i` lies inside `x`.
fn containment_mask(candidates: &[AttrSet], x: &AttrSet) -> u32 {
    candidates
        .iter()
        .enumerate()
        .filter(|(_, z)| z.is_subset(x))
        .fold(0u32, |m, (i, _)| m | (1 << i))
}

/// Whether family `a` precedes family `b` when each is read as its sorted
/// list of members (bit order is member order).
fn family_precedes(a: u32, b: u32) -> bool {
    if a == b {
        return false;
    }
    let d = (a ^ b).trailing_zeros();
    let above = |f: u32| d < 31 && (f >> (d + 1)) != 0;
    if a & (1 << d) != 0 {
        above(b)
    } else {
        !above(a)
    }
}

fn family_of(candidates: &[AttrSet], mask: u32) -> impl Iterator<Item = AttrSet> + '_ {
    candidates
        .iter()
        .enumerate()
        .filter(move |(i, _)| mask & (1 << i) != 0)
        .map(|(_, z)| z.clone())
}

/// Order-`k` family with the least weighted error on `weighted`, ties going
/// to the lexicographically smallest family. The error is normalized by the
/// total weight.
pub fn brute_force_min_error(
    weighted: &[(AttrSet, Label, Rational)],
    k: usize,
    instance: &Instance,
) -> Result<(KOrderChoice, Rational)> {
    let candidates = candidate_sets(k, instance)?;
    if weighted.is_empty() {
        return Err(Error::InvalidSample("nothing to fit".into()));
    }
    let lcm = weighted
        .iter()
        .fold(BigInt::one(), |acc, (_, _, w)| acc.lcm(w.denom()));
    let scaled = |w: &Rational| -> Result<u128> {
        (w.numer() * (&lcm / w.denom()))
            .to_u128()
            .ok_or_else(|| Error::SearchSpaceTooLarge("weights do not fit a 128-bit common denominator".into()))
    };

    // Items with the same containment mask are interchangeable.
    let mut groups: BTreeMap<u32, (u128, u128)> = BTreeMap::new();
    let mut total = 0u128;
    for (x, y, w) in weighted {
        instance.check_item(x)?;
        let w = scaled(w)?;
        total = total
            .checked_add(w)
            .ok_or_else(|| Error::SearchSpaceTooLarge("total weight overflows".into()))?;
        let slot = groups.entry(containment_mask(&candidates, x)).or_default();
        match y {
            Label::Pos => slot.0 += w,
            Label::Neg => slot.1 += w,
        }
    }
    let groups: Vec<(u32, u128, u128)> = groups.into_iter().map(|(m, (p, n))| (m, p, n)).collect();
    let error_of = |family: u32| -> u128 {
        groups
            .iter()
            .map(|&(mask, pos_w, neg_w)| if family & mask != 0 { neg_w } else { pos_w })
            .sum()
    };

    let families = 1u64 << candidates.len();
    let better = |a: (u128, u32), b: (u128, u32)| {
        if a.0 < b.0 || (a.0 == b.0 && family_precedes(a.1, b.1)) {
            a
        } else {
            b
        }
    };
    let (err, best) = (0..families)
        .into_par_iter()
        .map(|f| (error_of(f as u32), f as u32))
        .reduce(|| (u128::MAX, 0), better);

    let h = KOrderChoice::new(*instance, k, family_of(&candidates, best))?;
    let err = Rational::new(BigInt::from(err), BigInt::one()) / Rational::new(BigInt::from(total), BigInt::one());
    Ok((h, err))
}

/// Exact minimum expected error over all order-`k` functions under `dist`,
/// with a minimizing family.
pub fn brute_force_optimal(
    dist: &FiniteDistribution,
    v: &ValueFunction,
    k: usize,
    instance: &Instance,
) -> Result<(KOrderChoice, Rational)> {
    let weighted: Vec<(AttrSet, Label, Rational)> = dist
        .support()
        .iter()
        .map(|(x, p)| v.eval_value(x).map(|y| (x.clone(), y, p.clone())))
        .collect::<Result<_>>()?;
    brute_force_min_error(&weighted, k, instance)
}

/// Some order-`order` family whose induced labels equal `target` on every
/// listed item, found by exhaustive search.
pub fn find_matching_family(
    target: &[(AttrSet, Label)],
    order: usize,
    instance: &Instance,
) -> Result<Option<KOrderChoice>> {
    let candidates = candidate_sets(order, instance)?;
    let rows: Vec<(u32, bool)> = target
        .iter()
        .map(|(x, y)| (containment_mask(&candidates, x), y.is_pos()))
        .collect();
    let hit = (0..1u64 << candidates.len())
        .into_par_iter()
        .map(|f| f as u32)
        .filter(|&f| rows.iter().all(|&(mask, pos)| (f & mask != 0) == pos))
        .min_by(|&a, &b| {
            if family_precedes(a, b) {
                std::cmp::Ordering::Less
            } else if a == b {
                std::cmp::Ordering::Equal
            } else {
                std::cmp::Ordering::Greater
            }
        });
    hit.map(|f| KOrderChoice::new(*instance, order, family_of(&candidates, f)))
        .transpose()
}

/// Whether any order-`(k-1)` function reproduces the separator `{u}` on
/// every item; returns the first such function found.
pub fn hierarchy_counterexample(k: usize, u: &AttrSet, instance: &Instance) -> Result<Option<KOrderChoice>> {
    let sep = crate::choice::separator(k, u, instance)?;
    if k == 1 {
        return Ok(None);
    }
    let items = instance.items()?;
    let target: Vec<(AttrSet, Label)> = items
        .into_iter()
        .map(|x| {
            let y = Label::from_bool(sep.contains_positive(&x));
            (x, y)
        })
        .collect();
    find_matching_family(&target, k - 1, instance)
}

/// True iff the `C(q, k)` single-set functions have pairwise distinct induced
/// tables over the items with exactly `n` attributes.
pub fn basis_distinct_check(instance: &Instance, k: usize) -> Result<bool> {
    guard_q(instance.q)?;
    let items = instance.items_of_size(instance.n)?;
    let mut seen = HashSet::new();
    for u in enumerate_subsets(&instance.ground(), k, k) {
        let table: Vec<bool> = items.iter().map(|x| u.is_subset(x)).collect();
        if !seen.insert(table) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    /// Fail unless every three-quarter count is an integer.
    Exact,
    /// Round three-quarter counts up.
    Ceil,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DrRound {
    pub k: usize,
    /// Items per `k`-subset of `z_e` decided in this round.
    pub per_subset: usize,
    /// How many of those are made worthwhile.
    pub per_subset_positive: usize,
    pub fraction: Rational,
}

#[derive(Debug, Clone)]
pub struct DrConstruction {
    pub instance: Instance,
    pub z_e: AttrSet,
    /// Every item has exactly `n` attributes.
    pub items: Vec<AttrSet>,
    pub value: ValueFunction,
    pub rounds: Vec<DrRound>,
}

impl DrConstruction {
    pub fn uniform(&self) -> Result<FiniteDistribution> {
        FiniteDistribution::uniform(self.instance, self.items.clone())
    }

    /// The family of every `k`-subset of `z_e`.
    pub fn z_e_choice(&self, k: usize) -> Result<KOrderChoice> {
        KOrderChoice::new(self.instance, k, enumerate_subsets(&self.z_e, k, k))
    }

    pub fn positives(&self) -> Result<Vec<&AttrSet>> {
        let mut out = Vec::new();
        for x in &self.items {
            if self.value.eval_value(x)?.is_pos() {
                out.push(x);
            }
        }
        Ok(out)
    }
}

/// Builds a value function whose error against the best order-`k` function
/// falls off with `k`.
///
/// Items are the `n`-sets and `z_e = {0, .., k2-1}`. An item meeting `z_e` in
/// exactly `k` attributes is decided in round `k`: for each such intersection
/// the lexicographically first three quarters of the items are worthwhile and
/// the rest are not. Items missing `z_e`, and every set smaller than `n`, are
/// not worthwhile.
pub fn construct_dr_value(instance: &Instance, rounding: Rounding) -> Result<DrConstruction> {
    let Instance { q, n, k2, .. } = *instance;
    guard_q(q)?;
    let z_e = AttrSet::prefix(k2);
    let items = instance.items_of_size(n)?;
    let mut by_core: BTreeMap<AttrSet, Vec<&AttrSet>> = BTreeMap::new();
    for x in &items {
        by_core.entry(x.intersection(&z_e)).or_default().push(x);
    }

    let mut rounds = Vec::new();
    let mut positives = Vec::new();
    for k in (1..=k2).rev() {
        let per_subset = choose(q - k2, n - k).to_usize().unwrap_or(usize::MAX);
        let three = 3 * per_subset;
        let chosen = if three.is_multiple_of(4) {
            three / 4
        } else {
            match rounding {
                Rounding::Exact => {
                    return Err(Error::DivisibilityViolated(format!(
                        "round {k}: 3/4 of C({}, {}) = {per_subset} is not an integer",
                        q - k2,
                        n - k
                    )))
                }
                Rounding::Ceil => three.div_ceil(4),
            }
        };
        for z in enumerate_subsets(&z_e, k, k) {
            let group = by_core.get(&z).map(Vec::as_slice).unwrap_or(&[]);
            debug_assert_eq!(group.len(), per_subset);
            positives.extend(group.iter().take(chosen).map(|x| (*x).clone()));
        }
        let fraction = if per_subset == 0 {
            Rational::zero()
        } else {
            Rational::new(BigInt::from(chosen), BigInt::from(per_subset))
        };
        rounds.push(DrRound {
            k,
            per_subset,
            per_subset_positive: chosen,
            fraction,
        });
    }
    let value = ValueFunction::from_positive_sets(q, n, positives)?;
    Ok(DrConstruction {
        instance: *instance,
        z_e,
        items,
        value,
        rounds,
    })
}

fn check_curve_params(q: usize, n: usize, k2: usize) -> Result<()> {
    if !(1 <= k2 && k2 <= n && n <= q) {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= k2 <= n <= q, got q={q} n={n} k2={k2}"
        )));
    }
    Ok(())
}

/// `sum_{l=k}^{k2} C(k2, l) C(q-k2, n-l)`: the `n`-sets meeting `z_e` in at
/// least `k` attributes.
fn tail_count(q: usize, n: usize, k2: usize, k: usize) -> BigUint {
    (k.max(1)..=k2)
        .filter(|&l| l <= n)
        .map(|l| choose(k2, l) * choose(q - k2, n - l))
        .sum()
}

/// The diminishing-returns error bound at order `k`. Zero past `k2`.
pub fn diminishing_bound(q: usize, n: usize, k2: usize, k: usize) -> Result<Rational> {
    check_curve_params(q, n, k2)?;
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    Ok(ratio(tail_count(q, n, k2, k), choose(q, n) * BigUint::from(4u8)))
}

/// System payoff of the `z_e` family at order `k` under the uniform
/// distribution on `n`-sets.
pub fn system_payoff_closed_form(q: usize, n: usize, k2: usize, k: usize) -> Result<Rational> {
    check_curve_params(q, n, k2)?;
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    Ok(ratio(tail_count(q, n, k2, k), choose(q, n)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundCurve {
    pub params: Vec<(String, String)>,
    pub points: Vec<(usize, Rational)>,
}

impl BoundCurve {
    pub fn values(&self) -> impl Iterator<Item = &Rational> {
        self.points.iter().map(|(_, v)| v)
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].1 <= w[0].1)
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].1 < w[0].1)
    }

    /// Every second difference is `>= 0`.
    pub fn is_convex(&self) -> bool {
        self.points
            .windows(3)
            .all(|w| &w[2].1 - &w[1].1 * BigInt::from(2) + &w[0].1 >= Rational::zero())
    }
}

fn curve_params(q: usize, n: usize, k2: usize) -> Vec<(String, String)> {
    vec![
        ("q".into(), q.to_string()),
        ("n".into(), n.to_string()),
        ("k2".into(), k2.to_string()),
    ]
}

/// [`diminishing_bound`] at `k = 1..=k2`.
pub fn dr_curve(q: usize, n: usize, k2: usize) -> Result<BoundCurve> {
    let points = (1..=k2)
        .map(|k| diminishing_bound(q, n, k2, k).map(|v| (k, v)))
        .collect::<Result<_>>()?;
    Ok(BoundCurve {
        params: curve_params(q, n, k2),
        points,
    })
}

/// [`system_payoff_closed_form`] at `k = 1..=k2`.
pub fn system_payoff_curve(q: usize, n: usize, k2: usize) -> Result<BoundCurve> {
    let points = (1..=k2)
        .map(|k| system_payoff_closed_form(q, n, k2, k).map(|v| (k, v)))
        .collect::<Result<_>>()?;
    Ok(BoundCurve {
        params: curve_params(q, n, k2),
        points,
    })
}

fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of `sqrt(C * (N ln(N/eps) + ln(1/delta)) / m)` with `N = C(q, k)`.
pub fn generalization_bound_ln(q: usize, k: usize, m: usize, delta: f64, epsilon: f64, c: f64) -> Result<f64> {
    if q == 0 || k == 0 || k > q || m == 0 {
        return Err(Error::InvalidParameter(format!("need 1 <= k <= q and m >= 1, got q={q} k={k} m={m}")));
    }
    for (name, x) in [("delta", delta), ("epsilon", epsilon)] {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::InvalidParameter(format!("{name} = {x} must lie in (0, 1)")));
        }
    }
    if c.is_nan() || c <= 0.0 {
        return Err(Error::InvalidParameter(format!("C = {c} must be positive")));
    }
    let ln_n = ln_big(&choose(q, k));
    // ln(N ln(N/eps)) and ln(ln(1/delta)), combined with log-sum-exp.
    let a = ln_n + (ln_n - epsilon.ln()).ln();
    let b = (1.0 / delta).ln().ln();
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    let ln_sum = hi + (lo - hi).exp().ln_1p();
    Ok(0.5 * (c.ln() + ln_sum - (m as f64).ln()))
}

pub fn generalization_bound(q: usize, k: usize, m: usize, delta: f64, epsilon: f64, c: f64) -> Result<f64> {
    generalization_bound_ln(q, k, m, delta, epsilon, c).map(f64::exp)
}
