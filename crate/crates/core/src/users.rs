//! The three kinds of user: naive, agnostic and strategic.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use log::warn;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::choice::{ChoiceFunction, GeneralChoice, KOrderChoice};
use crate::data::{sample_dataset, FiniteDistribution, Sample};
use crate::error::{Error, Result};
use crate::learner::alg_learn;
use crate::universe::{Instance, Label, ENUMERATION_LIMIT};
use crate::value::ValueFunction;

/// `h(z) = sign(v(z))`: the user judges each representation as if it were the
/// whole item.
pub fn naive_choice(v: &ValueFunction, instance: &Instance) -> Result<GeneralChoice> {
    if instance.q <= ENUMERATION_LIMIT {
        let mut table = HashMap::new();
        for z in instance.representations()? {
            let l = v.eval_value(&z)?;
            table.insert(z, l);
        }
        return Ok(GeneralChoice::from_table(table, Label::Neg));
    }
    let v = v.clone();
    Ok(GeneralChoice::new(move |z| v.eval_value(z).unwrap_or(Label::Neg)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauReport {
    pub tau: f64,
    /// Whether `2/(2+sqrt(m)) <= delta < 1/8`, the range in which the payoff
    /// guarantee applies.
    pub window_holds: bool,
}

/// `tau = delta/(2(1-delta)) + sqrt(2 ln(1/delta) / m)`, natural log.
pub fn agnostic_tau(m: usize, delta: f64) -> Result<TauReport> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must lie in (0, 1)")));
    }
    let mf = m as f64;
    let tau = delta / (2.0 * (1.0 - delta)) + (2.0 * (1.0 / delta).ln() / mf).sqrt();
    let window_holds = 2.0 / (2.0 + mf.sqrt()) <= delta && delta < 0.125;
    if !window_holds {
        warn!("delta = {delta} is outside [2/(2+sqrt(m)), 1/8) for m = {m}; the payoff guarantee does not apply");
    }
    Ok(TauReport { tau, window_holds })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgnosticMode {
    AlwaysAccept,
    AlwaysReject,
    CoinFlip,
}

impl fmt::Display for AgnosticMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AgnosticMode::AlwaysAccept => "always-accept",
            AgnosticMode::AlwaysReject => "always-reject",
            AgnosticMode::CoinFlip => "coin-flip",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgnosticParams {
    pub delta: f64,
    pub m: usize,
    pub tau: f64,
    pub mu_hat: f64,
    pub window_holds: bool,
}

#[derive(Debug, Clone)]
pub struct AgnosticDecision {
    pub mode: AgnosticMode,
    pub params: AgnosticParams,
    /// The label the committed constant function returns. For a coin flip
    /// this is the single outcome of the flip.
    pub label: Label,
    pub realized_choice: GeneralChoice,
}

/// Commits to a constant rule from the empirical positive rate. A coin flip
/// happens once, for the whole game.
pub fn agnostic_decide(sample: &Sample, delta: f64, seed: u64) -> Result<AgnosticDecision> {
    if sample.is_empty() {
        return Err(Error::InvalidSample("agnostic user needs a nonempty sample".into()));
    }
    let m = sample.m();
    let TauReport { tau, window_holds } = agnostic_tau(m, delta)?;
    let mu_hat = sample.positive_rate().to_f64().unwrap_or(0.0);
    let (mode, label) = if mu_hat >= 0.5 + tau {
        (AgnosticMode::AlwaysAccept, Label::Pos)
    } else if mu_hat <= 0.5 - tau {
        (AgnosticMode::AlwaysReject, Label::Neg)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (AgnosticMode::CoinFlip, Label::from_bool(rng.gen_bool(0.5)))
    };
    Ok(AgnosticDecision {
        mode,
        params: AgnosticParams {
            delta,
            m,
            tau,
            mu_hat,
            window_holds,
        },
        label,
        realized_choice: GeneralChoice::constant(label),
    })
}

/// Order-`k` empirical risk minimizer.
pub fn strategic_choice(sample: &Sample, k: usize, instance: &Instance) -> Result<KOrderChoice> {
    alg_learn(sample, k, instance)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloSummary {
    pub trials: usize,
    pub mean: f64,
    pub std_err: f64,
    pub modes: BTreeMap<String, usize>,
}

/// Repeats sample-then-decide `trials` times; trial `t` uses seed `seed + t`
/// for both the sample and the coin. The payoff of a constant rule is the
/// mass of items whose worthwhileness matches it.
pub fn agnostic_monte_carlo(
    dist: &FiniteDistribution,
    v: &ValueFunction,
    m: usize,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloSummary> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let mut mu = 0.0;
    for (x, p) in dist.support() {
        if v.eval_value(x)?.is_pos() {
            mu += p.to_f64().unwrap_or(0.0);
        }
    }
    let outcomes: Vec<(AgnosticMode, f64)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let s = sample_dataset(dist, v, m, seed.wrapping_add(t))?;
            let d = agnostic_decide(&s, delta, seed.wrapping_add(t))?;
            let payoff = if d.label.is_pos() { mu } else { 1.0 - mu };
            Ok((d.mode, payoff))
        })
        .collect::<Result<_>>()?;
    let n = trials as f64;
    let mean = outcomes.iter().map(|(_, p)| p).sum::<f64>() / n;
    let var = if trials > 1 {
        outcomes.iter().map(|(_, p)| (p - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let mut modes = BTreeMap::new();
    for (mode, _) in &outcomes {
        *modes.entry(mode.to_string()).or_insert(0) += 1;
    }
    Ok(MonteCarloSummary {
        trials,
        mean,
        std_err: (var / n).sqrt(),
        modes,
    })
}

/// What a user may look at before committing.
#[derive(Clone, Copy)]
pub struct UserContext<'a> {
    pub instance: &'a Instance,
    pub value: Option<&'a ValueFunction>,
    pub sample: Option<&'a Sample>,
}

/// Parameters shared by the registered user kinds; each reads what it needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserParams {
    pub k: Option<usize>,
    pub delta: f64,
    pub seed: u64,
}

impl Default for UserParams {
    fn default() -> Self {
        UserParams {
            k: None,
            delta: 0.1,
            seed: 0,
        }
    }
}

/// A way of committing to a choice function.
pub trait UserStrategy: Send + Sync {
    fn name(&self) -> &'static str;

    fn commit(&self, ctx: &UserContext<'_>) -> Result<Box<dyn ChoiceFunction>>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NaiveUser;

impl UserStrategy for NaiveUser {
    fn name(&self) -> &'static str {
        "naive"
    }

    fn commit(&self, ctx: &UserContext<'_>) -> Result<Box<dyn ChoiceFunction>> {
        let v = ctx
            .value
            .ok_or_else(|| Error::InvalidParameter("naive user needs a value function".into()))?;
        Ok(Box::new(naive_choice(v, ctx.instance)?))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AgnosticUser {
    pub delta: f64,
    pub seed: u64,
}

impl UserStrategy for AgnosticUser {
    fn name(&self) -> &'static str {
        "agnostic"
    }

    fn commit(&self, ctx: &UserContext<'_>) -> Result<Box<dyn ChoiceFunction>> {
        let s = ctx
            .sample
            .ok_or_else(|| Error::InvalidParameter("agnostic user needs a sample".into()))?;
        Ok(Box::new(agnostic_decide(s, self.delta, self.seed)?.realized_choice))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StrategicUser {
    pub k: usize,
}

impl UserStrategy for StrategicUser {
    fn name(&self) -> &'static str {
        "strategic"
    }

    fn commit(&self, ctx: &UserContext<'_>) -> Result<Box<dyn ChoiceFunction>> {
        let s = ctx
            .sample
            .ok_or_else(|| Error::InvalidParameter("strategic user needs a sample".into()))?;
        Ok(Box::new(strategic_choice(s, self.k, ctx.instance)?))
    }
}

type UserFactory = fn(&UserParams) -> Result<Box<dyn UserStrategy>>;

/// User kinds by name.
pub struct UserRegistry {
    entries: BTreeMap<&'static str, UserFactory>,
}

impl UserRegistry {
    pub fn empty() -> Self {
        UserRegistry {
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &'static str, factory: UserFactory) {
        self.entries.insert(name, factory);
    }

    pub fn build(&self, name: &str, params: &UserParams) -> Option<Result<Box<dyn UserStrategy>>> {
        self.entries.get(name).map(|f| f(params))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }
}

impl Default for UserRegistry {
    fn default() -> Self {
        let mut reg = Self::empty();
        reg.register("naive", |_| Ok(Box::new(NaiveUser)));
        reg.register("agnostic", |p| {
            Ok(Box::new(AgnosticUser {
                delta: p.delta,
                seed: p.seed,
            }))
        });
        reg.register("strategic", |p| {
            let k = p
                .k
                .ok_or_else(|| Error::InvalidParameter("strategic user needs k".into()))?;
            Ok(Box::new(StrategicUser { k }))
        });
        reg
    }
}

impl fmt::Debug for UserRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.keys()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attrset::AttrSet;
    use crate::response::{user_payoff, BenevolentResponder, StrategicResponder};
    use crate::scenarios::{example1, example2};
    use crate::universe::make_instance;
    use crate::Rational;
    use num_bigint::BigInt;

    fn s(ix: &[usize]) -> AttrSet {
        AttrSet::from_indices(ix.iter().copied())
    }

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn naive_on_examples() {
        let ex = example1(r(1, 5)).unwrap();
        let h = naive_choice(&ex.value, &ex.instance).unwrap();
        assert_eq!(h.label(&s(&[0])), Label::Pos);
        assert_eq!(h.label(&s(&[1])), Label::Neg);

        let ex = example2(r(1, 5)).unwrap();
        let h = naive_choice(&ex.value, &ex.instance).unwrap();
        let got: Vec<Label> = (0..4).map(|i| h.label(&s(&[i]))).collect();
        assert_eq!(got, vec![Label::Neg, Label::Pos, Label::Neg, Label::Pos]);
    }

    #[test]
    fn naive_of_all_negative() {
        let i = make_instance(4, 2, 1, 2).unwrap();
        let v = ValueFunction::from_positive_sets(4, 2, []).unwrap();
        let h = naive_choice(&v, &i).unwrap();
        assert!(i.representations().unwrap().iter().all(|z| h.label(z) == Label::Neg));
    }

    #[test]
    fn tau_values() {
        let t = agnostic_tau(10_000, 0.1).unwrap();
        assert!((t.tau - 0.0770153).abs() < 1e-6, "{}", t.tau);
        assert!(t.window_holds);
        assert!(!agnostic_tau(1, 0.1).unwrap().window_holds);
        let near = agnostic_tau(1_000_000, 0.1249).unwrap();
        assert!(near.window_holds && near.tau < 0.5);
        assert!(agnostic_tau(0, 0.1).is_err());
        assert!(agnostic_tau(10, 1.5).is_err());
    }

    #[test]
    fn tau_decreases_with_m() {
        let mut last = f64::INFINITY;
        for m in [10, 100, 1000, 10_000, 100_000] {
            let t = agnostic_tau(m, 0.05).unwrap().tau;
            assert!(t < last);
            last = t;
        }
    }

    fn labelled(pos: usize, neg: usize) -> Sample {
        let i = make_instance(2, 2, 1, 1).unwrap();
        let mut e = vec![(s(&[0]), Label::Pos); pos];
        e.extend(vec![(s(&[1]), Label::Neg); neg]);
        Sample::new(i, e).unwrap()
    }

    #[test]
    fn agnostic_modes() {
        assert_eq!(agnostic_decide(&labelled(10_000, 0), 0.1, 1).unwrap().mode, AgnosticMode::AlwaysAccept);
        assert_eq!(agnostic_decide(&labelled(5_000, 5_000), 0.1, 1).unwrap().mode, AgnosticMode::CoinFlip);
        assert_eq!(agnostic_decide(&labelled(0, 10_000), 0.1, 1).unwrap().mode, AgnosticMode::AlwaysReject);
        assert!(agnostic_decide(&labelled(0, 0), 0.1, 1).is_err());
    }

    #[test]
    fn agnostic_on_example1_rejects() {
        let ex = example1(r(1, 5)).unwrap();
        let sample = sample_dataset(&ex.dist, &ex.value, 10_000, 42).unwrap();
        let d = agnostic_decide(&sample, 0.1, 42).unwrap();
        assert_eq!(d.mode, AgnosticMode::AlwaysReject);
        assert!((d.params.mu_hat - 0.1).abs() < 0.02);
    }

    #[test]
    fn coin_flip_is_seeded() {
        let s50 = labelled(50, 50);
        let a = agnostic_decide(&s50, 0.1, 7).unwrap();
        let b = agnostic_decide(&s50, 0.1, 7).unwrap();
        assert_eq!(a.label, b.label);
        let labels: std::collections::BTreeSet<Label> =
            (0..32).map(|seed| agnostic_decide(&s50, 0.1, seed).unwrap().label).collect();
        assert_eq!(labels.len(), 2);
    }

    #[test]
    fn agnostic_ignores_responder() {
        let ex = example1(r(1, 5)).unwrap();
        let sample = sample_dataset(&ex.dist, &ex.value, 1000, 5).unwrap();
        let h = agnostic_decide(&sample, 0.1, 5).unwrap().realized_choice;
        assert_eq!(
            user_payoff(&h, &ex.value, &ex.dist, &StrategicResponder::default()).unwrap(),
            user_payoff(&h, &ex.value, &ex.dist, &BenevolentResponder).unwrap()
        );
    }

    #[test]
    fn registry_builds_each_kind() {
        let reg = UserRegistry::default();
        assert_eq!(reg.names().collect::<Vec<_>>(), vec!["agnostic", "naive", "strategic"]);
        let p = UserParams::default();
        assert!(reg.build("strategic", &p).unwrap().is_err());
        let p = UserParams { k: Some(1), ..p };
        let ex = example1(r(1, 5)).unwrap();
        let ctx = UserContext {
            instance: &ex.instance,
            value: Some(&ex.value),
            sample: None,
        };
        let naive = reg.build("naive", &p).unwrap().unwrap();
        assert_eq!(naive.commit(&ctx).unwrap().label(&s(&[0])), Label::Pos);
        let strategic = reg.build("strategic", &p).unwrap().unwrap();
        assert!(strategic.commit(&ctx).is_err());
        assert!(reg.build("skeptical", &p).is_none());
    }
}
