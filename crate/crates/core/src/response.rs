//! How the system picks a representation for an item, and what each side
//! earns from the resulting choices.
//!
//! Responders are interchangeable behind [`Responder`] and can be looked up by
//! name through a [`ResponderRegistry`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Zero;

use crate::attrset::AttrSet;
use crate::choice::ChoiceFunction;
use crate::data::FiniteDistribution;
use crate::error::Result;
use crate::universe::{Instance, Label};
use crate::value::ValueFunction;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseResult {
    pub representation: AttrSet,
    /// `h(representation)`.
    pub engaged: Label,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    LexMin,
    LexMax,
}

fn pick<I: Iterator<Item = AttrSet>>(mut it: I, tie: TieBreak) -> Option<AttrSet> {
    match tie {
        TieBreak::LexMin => it.next(),
        TieBreak::LexMax => it.last(),
    }
}

/// Engagement-maximizing truthful representation of `x`, ties broken
/// lexicographically smallest. When nothing in `x` is accepted the smallest
/// feasible representation is still returned, with `engaged = -1`.
pub fn best_response(h: &dyn ChoiceFunction, x: &AttrSet, instance: &Instance) -> Result<ResponseResult> {
    best_response_with(h, x, instance, TieBreak::LexMin)
}

pub fn best_response_with(
    h: &dyn ChoiceFunction,
    x: &AttrSet,
    instance: &Instance,
    tie: TieBreak,
) -> Result<ResponseResult> {
    instance.check_item(x)?;
    if h.accepts_some(x, instance) {
        let z = pick(
            instance.representations_of(x).filter(|z| h.label(z).is_pos()),
            tie,
        )
        .expect("accepts_some guarantees an accepted representation");
        return Ok(ResponseResult {
            representation: z,
            engaged: Label::Pos,
        });
    }
    let z = pick(instance.representations_of(x), tie).expect("checked item has a feasible representation");
    let engaged = h.label(&z);
    Ok(ResponseResult {
        representation: z,
        engaged,
    })
}

/// The full argmax set of the engagement objective for `x`.
pub fn all_best_responses(h: &dyn ChoiceFunction, x: &AttrSet, instance: &Instance) -> Result<BTreeSet<AttrSet>> {
    instance.check_item(x)?;
    let labelled: Vec<(AttrSet, Label)> = instance
        .representations_of(x)
        .map(|z| {
            let l = h.label(&z);
            (z, l)
        })
        .collect();
    let best = labelled.iter().map(|(_, l)| *l).max().unwrap_or(Label::Neg);
    Ok(labelled
        .into_iter()
        .filter(|(_, l)| *l == best)
        .map(|(z, _)| z)
        .collect())
}

/// A system acting in the user's interest: shows a representation whose
/// label matches `Y(x)` when one exists, else the smallest feasible one.
pub fn benevolent_response(
    v: &ValueFunction,
    h: &dyn ChoiceFunction,
    x: &AttrSet,
    instance: &Instance,
) -> Result<ResponseResult> {
    instance.check_item(x)?;
    let target = v.eval_value(x)?;
    let mut fallback = None;
    for z in instance.representations_of(x) {
        let l = h.label(&z);
        if l == target {
            return Ok(ResponseResult {
                representation: z,
                engaged: l,
            });
        }
        if fallback.is_none() {
            fallback = Some((z, l));
        }
    }
    let (z, l) = fallback.expect("checked item has a feasible representation");
    Ok(ResponseResult {
        representation: z,
        engaged: l,
    })
}

/// A rule the system follows when choosing representations.
pub trait Responder: Send + Sync {
    fn name(&self) -> &'static str;

    fn respond(
        &self,
        h: &dyn ChoiceFunction,
        v: &ValueFunction,
        x: &AttrSet,
        instance: &Instance,
    ) -> Result<ResponseResult>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StrategicResponder {
    pub tie_break: TieBreak,
}

impl Responder for StrategicResponder {
    fn name(&self) -> &'static str {
        "strategic"
    }

    fn respond(
        &self,
        h: &dyn ChoiceFunction,
        _v: &ValueFunction,
        x: &AttrSet,
        instance: &Instance,
    ) -> Result<ResponseResult> {
        best_response_with(h, x, instance, self.tie_break)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BenevolentResponder;

impl Responder for BenevolentResponder {
    fn name(&self) -> &'static str {
        "benevolent"
    }

    fn respond(
        &self,
        h: &dyn ChoiceFunction,
        v: &ValueFunction,
        x: &AttrSet,
        instance: &Instance,
    ) -> Result<ResponseResult> {
        benevolent_response(v, h, x, instance)
    }
}

type ResponderFactory = fn() -> Box<dyn Responder>;

/// Responders by name.
pub struct ResponderRegistry {
    entries: BTreeMap<&'static str, ResponderFactory>,
}

impl ResponderRegistry {
    pub fn empty() -> Self {
        ResponderRegistry {
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &'static str, factory: ResponderFactory) {
        self.entries.insert(name, factory);
    }

    pub fn get(&self, name: &str) -> Option<Box<dyn Responder>> {
        self.entries.get(name).map(|f| f())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }
}

impl Default for ResponderRegistry {
    fn default() -> Self {
        let mut reg = Self::empty();
        reg.register("strategic", || Box::new(StrategicResponder::default()));
        reg.register("benevolent", || Box::new(BenevolentResponder));
        reg
    }
}

impl fmt::Debug for ResponderRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.keys()).finish()
    }
}

/// Expected user payoff: probability that the choice on the shown
/// representation matches worthwhileness.
pub fn user_payoff(
    h: &dyn ChoiceFunction,
    v: &ValueFunction,
    dist: &FiniteDistribution,
    responder: &dyn Responder,
) -> Result<Rational> {
    let mut total = Rational::zero();
    for (x, p) in dist.support() {
        let r = responder.respond(h, v, x, dist.instance())?;
        if r.engaged == v.eval_value(x)? {
            total += p;
        }
    }
    Ok(total)
}

/// Expected strategic error: the complement of [`user_payoff`].
pub fn expected_error(
    h: &dyn ChoiceFunction,
    v: &ValueFunction,
    dist: &FiniteDistribution,
    responder: &dyn Responder,
) -> Result<Rational> {
    let mut total = Rational::zero();
    for (x, p) in dist.support() {
        let r = responder.respond(h, v, x, dist.instance())?;
        if r.engaged != v.eval_value(x)? {
            total += p;
        }
    }
    Ok(total)
}

/// Expected engagement against a best-responding system.
pub fn system_payoff(h: &dyn ChoiceFunction, dist: &FiniteDistribution) -> Result<Rational> {
    let mut total = Rational::zero();
    for (x, p) in dist.support() {
        if best_response(h, x, dist.instance())?.engaged.is_pos() {
            total += p;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PayoffReport {
    pub user_payoff: Rational,
    pub system_payoff: Rational,
}

/// Both payoffs with representations chosen by `responder`.
pub fn payoff_report(
    h: &dyn ChoiceFunction,
    v: &ValueFunction,
    dist: &FiniteDistribution,
    responder: &dyn Responder,
) -> Result<PayoffReport> {
    let mut user = Rational::zero();
    let mut system = Rational::zero();
    for (x, p) in dist.support() {
        let r = responder.respond(h, v, x, dist.instance())?;
        if r.engaged == v.eval_value(x)? {
            user += p;
        }
        if r.engaged.is_pos() {
            system += p;
        }
    }
    Ok(PayoffReport {
        user_payoff: user,
        system_payoff: system,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choice::{induced_eval, GeneralChoice, KOrderChoice};
    use crate::error::Error;
    use crate::scenarios::example1;
    use crate::universe::make_instance;
    use crate::users::naive_choice;
    use num_bigint::BigInt;

    fn s(ix: &[usize]) -> AttrSet {
        AttrSet::from_indices(ix.iter().copied())
    }

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn example1_strategic_response() {
        let ex = example1(r(1, 5)).unwrap();
        let h = naive_choice(&ex.value, &ex.instance).unwrap();
        let res = best_response(&h, &s(&[0, 1]), &ex.instance).unwrap();
        assert_eq!(res.representation, s(&[0]));
        assert_eq!(res.engaged, Label::Pos);
    }

    #[test]
    fn non_engaging_response_is_smallest_feasible() {
        let i = make_instance(3, 2, 1, 2).unwrap();
        let h = GeneralChoice::constant(Label::Neg);
        let res = best_response(&h, &s(&[0, 1]), &i).unwrap();
        assert_eq!(res, ResponseResult { representation: s(&[0]), engaged: Label::Neg });
    }

    #[test]
    fn smallest_engaging_subset() {
        let i = make_instance(3, 3, 1, 2).unwrap();
        let h = KOrderChoice::new(i, 2, [s(&[0, 1])]).unwrap();
        let res = best_response(&h, &s(&[0, 1, 2]), &i).unwrap();
        assert_eq!(res.representation, s(&[0, 1]));
        assert_eq!(res.engaged, Label::Pos);
        assert_eq!(induced_eval(&h, &s(&[0, 1, 2])).unwrap(), res.engaged);
    }

    #[test]
    fn infeasible_item_is_rejected() {
        let i = make_instance(3, 3, 2, 2).unwrap();
        let h = GeneralChoice::constant(Label::Pos);
        assert!(matches!(
            best_response(&h, &s(&[1]), &i),
            Err(Error::NoFeasibleRepresentation { .. })
        ));
    }

    #[test]
    fn argmax_sets() {
        let i = make_instance(2, 2, 1, 1).unwrap();
        let none = GeneralChoice::constant(Label::Neg);
        assert_eq!(
            all_best_responses(&none, &s(&[0, 1]), &i).unwrap(),
            [s(&[0]), s(&[1])].into()
        );
        let one = KOrderChoice::new(i, 1, [s(&[0])]).unwrap();
        assert_eq!(all_best_responses(&one, &s(&[0, 1]), &i).unwrap(), [s(&[0])].into());
    }

    #[test]
    fn lex_max_tie_break() {
        let i = make_instance(3, 3, 1, 2).unwrap();
        let h = GeneralChoice::constant(Label::Pos);
        let res = best_response_with(&h, &s(&[0, 1, 2]), &i, TieBreak::LexMax).unwrap();
        assert_eq!(res.representation, s(&[2]));
    }

    #[test]
    fn benevolent_examples() {
        let ex = example1(r(1, 5)).unwrap();
        let h = naive_choice(&ex.value, &ex.instance).unwrap();
        let res = benevolent_response(&ex.value, &h, &s(&[0, 1]), &ex.instance).unwrap();
        assert_eq!(res, ResponseResult { representation: s(&[1]), engaged: Label::Neg });

        let always = GeneralChoice::constant(Label::Pos);
        let res = benevolent_response(&ex.value, &always, &s(&[0, 1]), &ex.instance).unwrap();
        assert_eq!(res, ResponseResult { representation: s(&[0]), engaged: Label::Pos });
    }

    #[test]
    fn example1_payoffs() {
        let ex = example1(r(1, 5)).unwrap();
        let h = naive_choice(&ex.value, &ex.instance).unwrap();
        let strategic = StrategicResponder::default();
        assert_eq!(user_payoff(&h, &ex.value, &ex.dist, &strategic).unwrap(), r(1, 5));
        assert_eq!(user_payoff(&h, &ex.value, &ex.dist, &BenevolentResponder).unwrap(), r(1, 1));
        assert_eq!(system_payoff(&h, &ex.dist).unwrap(), r(9, 10));
        let err = expected_error(&h, &ex.value, &ex.dist, &strategic).unwrap();
        assert_eq!(err + r(1, 5), r(1, 1));
    }

    #[test]
    fn constant_system_payoffs() {
        let ex = example1(r(1, 5)).unwrap();
        assert_eq!(system_payoff(&GeneralChoice::constant(Label::Neg), &ex.dist).unwrap(), r(0, 1));
        assert_eq!(system_payoff(&GeneralChoice::constant(Label::Pos), &ex.dist).unwrap(), r(1, 1));
    }

    #[test]
    fn registry_lookup() {
        let reg = ResponderRegistry::default();
        assert_eq!(reg.names().collect::<Vec<_>>(), vec!["benevolent", "strategic"]);
        assert_eq!(reg.get("strategic").unwrap().name(), "strategic");
        assert!(reg.get("adversarial").is_none());
    }
}
