//! Named experiments, each reading what it needs from a [`Config`].

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use num_traits::{One, Zero};

use strepr::analysis::{
    construct_dr_value, dr_curve, generalization_bound, generalization_bound_ln, induced_complexity,
    system_payoff_curve, BoundCurve, Rounding,
};
use strepr::formats::{parse_choice, parse_dataset, parse_distribution, parse_value_table, write_choice};
use strepr::learner::{alg_run, empirical_error};
use strepr::response::{expected_error, payoff_report};
use strepr::scenarios::{example1, example2, Scenario};
use strepr::users::{agnostic_decide, UserContext, UserParams};
use strepr::{
    make_instance, sample_dataset, Error, FiniteDistribution, Instance, KOrderChoice, Rational, ResponderRegistry,
    Sample, UserRegistry, ValueFunction,
};

use crate::config::{Config, ConfigError, DistSource};
use crate::output::{curve_csv, float_f64, Report};

/// Default sample size when a user needs data and no dataset is given.
pub const DEFAULT_SAMPLE_SIZE: usize = 1000;

#[derive(Debug, Default)]
pub struct Outcome {
    pub report: Report,
    /// A `k,value` curve.
    pub csv: Option<String>,
    /// A learned choice-function file.
    pub choice: Option<String>,
}

pub trait Experiment {
    fn name(&self) -> &'static str;

    fn run(&self, cfg: &Config) -> Result<Outcome>;
}

type ExperimentFactory = fn() -> Box<dyn Experiment>;

/// Experiments by name.
pub struct ExperimentRegistry {
    entries: BTreeMap<&'static str, ExperimentFactory>,
}

impl ExperimentRegistry {
    pub fn empty() -> Self {
        ExperimentRegistry {
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &'static str, factory: ExperimentFactory) {
        self.entries.insert(name, factory);
    }

    pub fn get(&self, name: &str) -> Option<Box<dyn Experiment>> {
        self.entries.get(name).map(|f| f())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }
}

impl Default for ExperimentRegistry {
    fn default() -> Self {
        let mut r = ExperimentRegistry::empty();
        r.register("game", || Box::new(Game));
        r.register("learn", || Box::new(Learn));
        r.register("payoff", || Box::new(Payoff));
        r.register("complexity", || Box::new(Complexity));
        r.register("dr-curve", || Box::new(DrCurve));
        r.register("sys-curve", || Box::new(SysCurve));
        r.register("gen-bound", || Box::new(GenBound));
        r.register("agnostic", || Box::new(Agnostic));
        r
    }
}

/// Looks up `experiment` and runs it.
pub fn run(cfg: &Config) -> Result<Outcome> {
    let registry = ExperimentRegistry::default();
    let name = cfg.require("experiment")?;
    let exp = registry.get(name).ok_or_else(|| {
        ConfigError::new(
            "experiment",
            format!("`{name}` is not one of {}", registry.names().collect::<Vec<_>>().join(", ")),
        )
    })?;
    log::info!("running {}", exp.name());
    exp.run(cfg)
}

fn read(key: &str, path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("{key}: cannot read `{}`", path.display()))
}

fn load<T>(cfg: &Config, key: &str, parse: fn(&str) -> strepr::Result<T>) -> Result<T> {
    let path = cfg.require_existing_path(key)?;
    let text = read(key, &path)?;
    parse(&text).with_context(|| format!("{key}: in `{}`", path.display()))
}

fn instance_keys(cfg: &Config) -> Result<Instance> {
    let q = cfg.require_usize("instance.q")?;
    let n = cfg.require_usize("instance.n")?;
    let k1 = cfg.require_usize("instance.k1")?;
    let k2 = cfg.require_usize("instance.k2")?;
    if n == 0 || n > q {
        return Err(ConfigError::new("instance.n", format!("need 1 <= n <= q, got n={n} q={q}")).into());
    }
    if k1 == 0 || k1 > k2 {
        return Err(ConfigError::new("instance.k1", format!("need 1 <= k1 <= k2, got k1={k1} k2={k2}")).into());
    }
    if k2 > n {
        return Err(ConfigError::new("instance.k2", format!("need k2 <= n, got k2={k2} n={n}")).into());
    }
    make_instance(q, n, k1, k2).map_err(|e| ConfigError::new("instance.q", e.to_string()).into())
}

/// Built-in games fix their own instance; stated instance keys must agree.
fn check_instance_keys(cfg: &Config, inst: &Instance) -> Result<()> {
    for (key, want) in [
        ("instance.q", inst.q),
        ("instance.n", inst.n),
        ("instance.k1", inst.k1),
        ("instance.k2", inst.k2),
    ] {
        if let Some(got) = cfg.usize(key)? {
            if got != want {
                return Err(ConfigError::new(key, format!("{got} disagrees with the source's {want}")).into());
            }
        }
    }
    Ok(())
}

fn check_value_shape(v: &ValueFunction, inst: &Instance) -> Result<()> {
    if v.q() != inst.q || v.n() != inst.n {
        return Err(ConfigError::new(
            "value.path",
            format!("value table has q={} n={}, instance has q={} n={}", v.q(), v.n(), inst.q, inst.n),
        )
        .into());
    }
    Ok(())
}

struct GameSetup {
    source: DistSource,
    instance: Instance,
    value: ValueFunction,
    dist: FiniteDistribution,
}

fn game_setup(cfg: &Config) -> Result<GameSetup> {
    let source = DistSource::from_config(cfg)?;
    let (instance, value, dist) = match &source {
        DistSource::Example1(eps) | DistSource::Example2(eps) => {
            let Scenario { instance, value, dist } = match source {
                DistSource::Example1(_) => example1(eps.clone())?,
                _ => example2(eps.clone())?,
            };
            check_instance_keys(cfg, &instance)?;
            (instance, value, dist)
        }
        DistSource::DrConstruct => {
            let inst = instance_keys(cfg)?;
            let rounding = match cfg.get("dr.rounding").unwrap_or("ceil") {
                "ceil" => Rounding::Ceil,
                "exact" => Rounding::Exact,
                other => return Err(ConfigError::new("dr.rounding", format!("`{other}` is not ceil or exact")).into()),
            };
            let dr = construct_dr_value(&inst, rounding).context("dr.rounding")?;
            let dist = dr.uniform()?;
            (inst, dr.value, dist)
        }
        DistSource::Uniform => {
            let inst = instance_keys(cfg)?;
            let v = load(cfg, "value.path", parse_value_table)?;
            check_value_shape(&v, &inst)?;
            let dist = FiniteDistribution::uniform(inst, inst.items()?)?;
            (inst, v, dist)
        }
        DistSource::File(path) => {
            let dist = parse_distribution(&read("distribution.path", path)?)
                .with_context(|| format!("distribution.path: in `{}`", path.display()))?;
            let inst = *dist.instance();
            check_instance_keys(cfg, &inst)?;
            let v = load(cfg, "value.path", parse_value_table)?;
            check_value_shape(&v, &inst)?;
            (inst, v, dist)
        }
    };
    Ok(GameSetup {
        source,
        instance,
        value,
        dist,
    })
}

fn push_instance(rep: &mut Report, inst: &Instance) {
    rep.push("q", inst.q);
    rep.push("n", inst.n);
    rep.push("k1", inst.k1);
    rep.push("k2", inst.k2);
}

fn responder_name(cfg: &Config) -> &str {
    cfg.get("responder").unwrap_or("strategic")
}

fn push_payoffs(
    rep: &mut Report,
    h: &dyn strepr::ChoiceFunction,
    setup_value: &ValueFunction,
    dist: &FiniteDistribution,
    cfg: &Config,
) -> Result<()> {
    let registry = ResponderRegistry::default();
    let name = responder_name(cfg);
    let responder = registry.get(name).ok_or_else(|| {
        ConfigError::new(
            "responder",
            format!("`{name}` is not one of {}", registry.names().collect::<Vec<_>>().join(", ")),
        )
    })?;
    let pr = payoff_report(h, setup_value, dist, responder.as_ref())?;
    let err = expected_error(h, setup_value, dist, responder.as_ref())?;
    rep.push_rational("user_payoff", &pr.user_payoff);
    rep.push_rational("system_payoff", &pr.system_payoff);
    rep.push_rational("expected_error", &err);
    Ok(())
}

fn user_params(cfg: &Config) -> Result<UserParams> {
    let d = UserParams::default();
    Ok(UserParams {
        k: cfg.usize("user.k")?,
        delta: cfg.open_unit("user.delta")?.unwrap_or(d.delta),
        seed: cfg.u64("user.seed")?.unwrap_or(d.seed),
    })
}

/// A user commits to a rule, the responder answers, payoffs are reported.
pub struct Game;

impl Experiment for Game {
    fn name(&self) -> &'static str {
        "game"
    }

    fn run(&self, cfg: &Config) -> Result<Outcome> {
        let setup = game_setup(cfg)?;
        let inst = setup.instance;
        let users = UserRegistry::default();
        let kind = cfg.get("user.type").unwrap_or("naive");
        let params = user_params(cfg)?;
        if kind == "strategic" {
            match params.k {
                None => return Err(ConfigError::new("user.k", "required by the strategic user").into()),
                Some(k) if k < inst.k1 || k > inst.k2 => {
                    return Err(ConfigError::new("user.k", format!("{k} lies outside [k1, k2] = [{}, {}]", inst.k1, inst.k2)).into())
                }
                _ => {}
            }
        }
        let user = users
            .build(kind, &params)
            .ok_or_else(|| {
                ConfigError::new(
                    "user.type",
                    format!("`{kind}` is not one of {}", users.names().collect::<Vec<_>>().join(", ")),
                )
            })??;

        let sample = if kind == "naive" {
            None
        } else if cfg.get("data.path").is_some() {
            let s = load(cfg, "data.path", parse_dataset)?;
            if *s.instance() != inst {
                return Err(ConfigError::new("data.path", "dataset instance differs from the game's").into());
            }
            Some(s)
        } else {
            let m = cfg.usize("data.m")?.unwrap_or(DEFAULT_SAMPLE_SIZE);
            if m == 0 {
                return Err(ConfigError::new("data.m", "must be at least 1").into());
            }
            Some(sample_dataset(&setup.dist, &setup.value, m, params.seed)?)
        };
        let ctx = UserContext {
            instance: &inst,
            value: Some(&setup.value),
            sample: sample.as_ref(),
        };
        let h = user.commit(&ctx).with_context(|| format!("user.type = {kind}"))?;

        let mut rep = Report::new();
        rep.push("experiment", "game");
        rep.push("source", setup.source.name());
        if let DistSource::Example1(e) | DistSource::Example2(e) = &setup.source {
            rep.push_rational("epsilon", e);
        }
        push_instance(&mut rep, &inst);
        rep.push("user", user.name());
        rep.push("responder", responder_name(cfg));
        if let Some(s) = &sample {
            rep.push("m", s.m());
            rep.push("seed", params.seed);
        }
        match kind {
            "strategic" => {
                rep.push("k", params.k.unwrap_or_default());
                if let Some(s) = &sample {
                    rep.push_rational("empirical_error", &empirical_error(h.as_ref(), s)?);
                }
            }
            "agnostic" => {
                if let Some(s) = &sample {
                    let d = agnostic_decide(s, params.delta, params.seed)?;
                    push_agnostic(&mut rep, &d);
                }
            }
            _ => {}
        }
        push_payoffs(&mut rep, h.as_ref(), &setup.value, &setup.dist, cfg)?;
        Ok(Outcome {
            report: rep,
            ..Outcome::default()
        })
    }
}

fn push_agnostic(rep: &mut Report, d: &strepr::users::AgnosticDecision) {
    rep.push("delta", float_f64(d.params.delta));
    rep.push("mu_hat", float_f64(d.params.mu_hat));
    rep.push("tau", float_f64(d.params.tau));
    rep.push("window_holds", d.params.window_holds);
    rep.push("mode", d.mode);
    rep.push("label", d.label);
}

/// Exact order-`k` learning on a dataset.
pub struct Learn;

impl Experiment for Learn {
    fn name(&self) -> &'static str {
        "learn"
    }

    fn run(&self, cfg: &Config) -> Result<Outcome> {
        let sample: Sample = load(cfg, "data.path", parse_dataset)?;
        let inst = *sample.instance();
        let k = cfg.require_usize("user.k")?;
        if k < inst.k1 || k > inst.k2 {
            return Err(ConfigError::new("user.k", format!("{k} lies outside [k1, k2] = [{}, {}]", inst.k1, inst.k2)).into());
        }
        let state = alg_run(&sample, k, &inst)?;
        if let Some(witness) = state.witness {
            return Err(anyhow::Error::from(Error::NotRealizable { k, witness }).context(format!("user.k = {k}")));
        }
        let h = KOrderChoice::new(inst, k, state.z_plus)?;
        let mut rep = Report::new();
        rep.push("experiment", "learn");
        push_instance(&mut rep, &inst);
        rep.push("k", k);
        rep.push("m", sample.m());
        rep.push("positives", h.positive().len());
        rep.push("enumerated", state.enumerated);
        rep.push_rational("empirical_error", &empirical_error(&h, &sample)?);
        Ok(Outcome {
            report: rep,
            choice: Some(write_choice(&h)),
            ..Outcome::default()
        })
    }
}

/// Payoffs of a stored choice function.
pub struct Payoff;

impl Experiment for Payoff {
    fn name(&self) -> &'static str {
        "payoff"
    }

    fn run(&self, cfg: &Config) -> Result<Outcome> {
        let h = load(cfg, "choice.path", parse_choice)?;
        let setup = game_setup(cfg)?;
        if *h.instance() != setup.instance {
            return Err(ConfigError::new("choice.path", "choice instance differs from the distribution's").into());
        }
        let mut rep = Report::new();
        rep.push("experiment", "payoff");
        rep.push("source", setup.source.name());
        push_instance(&mut rep, &setup.instance);
        rep.push("k", h.k());
        rep.push("responder", responder_name(cfg));
        push_payoffs(&mut rep, &h, &setup.value, &setup.dist, cfg)?;
        Ok(Outcome {
            report: rep,
            ..Outcome::default()
        })
    }
}

/// Induced complexity of a value table over every item.
pub struct Complexity;

impl Experiment for Complexity {
    fn name(&self) -> &'static str {
        "complexity"
    }

    fn run(&self, cfg: &Config) -> Result<Outcome> {
        let v = load(cfg, "value.path", parse_value_table)?;
        let inst = make_instance(v.q(), v.n(), 1, v.n())?;
        let c = induced_complexity(&v, &inst).context("value.path")?;
        let mut rep = Report::new();
        rep.push("experiment", "complexity");
        rep.push("q", v.q());
        rep.push("n", v.n());
        match (c.ell_star, &c.witness_g) {
            (Some(ell), Some(g)) => {
                rep.push("ell_star", ell);
                rep.push("witness_size", g.positive().len());
                let sets: Vec<String> = g.positive().iter().map(|z| z.to_string()).collect();
                rep.push("witness", sets.join(" "));
            }
            _ => rep.push("ell_star", "none"),
        }
        Ok(Outcome {
            report: rep,
            ..Outcome::default()
        })
    }
}

fn curve_keys(cfg: &Config) -> Result<(usize, usize, usize)> {
    Ok((
        cfg.require_usize("instance.q")?,
        cfg.require_usize("instance.n")?,
        cfg.require_usize("instance.k2")?,
    ))
}

fn curve_outcome(name: &str, curve: BoundCurve) -> Outcome {
    let mut rep = Report::new();
    rep.push("experiment", name);
    for (k, v) in &curve.params {
        rep.push(k.as_str(), v);
    }
    for (k, v) in &curve.points {
        rep.push_rational(&format!("value_k{k}"), v);
    }
    rep.push("nonincreasing", curve.is_nonincreasing());
    rep.push("convex", curve.is_convex());
    Outcome {
        report: rep,
        csv: Some(curve_csv(&curve.points)),
        ..Outcome::default()
    }
}

/// The diminishing-returns error bound for `k = 1..=k2`.
pub struct DrCurve;

impl Experiment for DrCurve {
    fn name(&self) -> &'static str {
        "dr-curve"
    }

    fn run(&self, cfg: &Config) -> Result<Outcome> {
        let (q, n, k2) = curve_keys(cfg)?;
        let curve = dr_curve(q, n, k2).context("instance.q, instance.n, instance.k2")?;
        Ok(curve_outcome("dr-curve", curve))
    }
}

/// Closed-form system payoff for `k = 1..=k2`.
pub struct SysCurve;

impl Experiment for SysCurve {
    fn name(&self) -> &'static str {
        "sys-curve"
    }

    fn run(&self, cfg: &Config) -> Result<Outcome> {
        let (q, n, k2) = curve_keys(cfg)?;
        let curve = system_payoff_curve(q, n, k2).context("instance.q, instance.n, instance.k2")?;
        Ok(curve_outcome("sys-curve", curve))
    }
}

/// Sample-size bound for the order-`k` learner.
pub struct GenBound;

impl Experiment for GenBound {
    fn name(&self) -> &'static str {
        "gen-bound"
    }

    fn run(&self, cfg: &Config) -> Result<Outcome> {
        let q = cfg.require_usize("instance.q")?;
        let k = cfg.require_usize("user.k")?;
        let m = cfg.require_usize("bound.m")?;
        let delta = cfg
            .open_unit("bound.delta")?
            .ok_or_else(|| ConfigError::new("bound.delta", "required but missing"))?;
        let epsilon = cfg
            .open_unit("bound.epsilon")?
            .ok_or_else(|| ConfigError::new("bound.epsilon", "required but missing"))?;
        let c = cfg.f64("bound.c")?.unwrap_or(1.0);
        if !(c > 0.0 && c.is_finite()) {
            return Err(ConfigError::new("bound.c", format!("{c} must be positive")).into());
        }
        let ln = generalization_bound_ln(q, k, m, delta, epsilon, c).context("instance.q, user.k, bound.m")?;
        let b = generalization_bound(q, k, m, delta, epsilon, c)?;
        let mut rep = Report::new();
        rep.push("experiment", "gen-bound");
        rep.push("q", q);
        rep.push("k", k);
        rep.push("m", m);
        rep.push("delta", float_f64(delta));
        rep.push("epsilon", float_f64(epsilon));
        rep.push("c", float_f64(c));
        rep.push("bound", float_f64(b));
        rep.push("ln_bound", float_f64(ln));
        Ok(Outcome {
            report: rep,
            ..Outcome::default()
        })
    }
}

/// The agnostic user's decision on a dataset.
pub struct Agnostic;

impl Experiment for Agnostic {
    fn name(&self) -> &'static str {
        "agnostic"
    }

    fn run(&self, cfg: &Config) -> Result<Outcome> {
        let sample = load(cfg, "data.path", parse_dataset)?;
        let params = user_params(cfg)?;
        let d = agnostic_decide(&sample, params.delta, params.seed)?;
        let mut rep = Report::new();
        rep.push("experiment", "agnostic");
        rep.push("m", sample.m());
        rep.push("seed", params.seed);
        let rate: Rational = sample.positive_rate();
        rep.push_rational("positive_rate", &rate);
        push_agnostic(&mut rep, &d);
        let payoff_if_constant = if d.label.is_pos() { rate } else { Rational::one() - rate };
        debug_assert!(payoff_if_constant >= Rational::zero());
        rep.push_rational("empirical_payoff", &payoff_if_constant);
        Ok(Outcome {
            report: rep,
            ..Outcome::default()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> Config {
        Config::parse(text, Path::new(".")).unwrap()
    }

    fn report(text: &str) -> String {
        run(&cfg(text)).unwrap().report.render()
    }

    #[test]
    fn registry_lists_everything() {
        let names: Vec<_> = ExperimentRegistry::default().names().collect();
        assert_eq!(
            names,
            ["agnostic", "complexity", "dr-curve", "game", "gen-bound", "learn", "payoff", "sys-curve"]
        );
    }

    #[test]
    fn example1_game() {
        let r = report("experiment = game\ndistribution.source = example1\ndistribution.epsilon = 0.2\n");
        assert!(r.contains("user_payoff=1/5\n"), "{r}");
        assert!(r.contains("system_payoff=9/10\n"), "{r}");
    }

    #[test]
    fn benevolent_example1_game() {
        let r = report("experiment = game\ndistribution.source = example1\ndistribution.epsilon = 1/5\nresponder = benevolent\n");
        assert!(r.contains("user_payoff=1\n"), "{r}");
    }

    #[test]
    fn unknown_names_point_at_keys() {
        let key = |text: &str| run(&cfg(text)).unwrap_err().downcast::<ConfigError>().unwrap().key;
        assert_eq!(key("experiment = nope"), "experiment");
        assert_eq!(
            key("experiment = game\ndistribution.source = example1\ndistribution.epsilon = 0.2\nuser.type = nope"),
            "user.type"
        );
        assert_eq!(
            key("experiment = game\ndistribution.source = example1\ndistribution.epsilon = 0.2\nresponder = nope"),
            "responder"
        );
        assert_eq!(
            key("experiment = game\ndistribution.source = example1\ndistribution.epsilon = 0.2\ninstance.q = 3"),
            "instance.q"
        );
        assert_eq!(
            key("experiment = game\ndistribution.source = example1\ndistribution.epsilon = 0.2\nuser.type = strategic"),
            "user.k"
        );
        assert_eq!(key("experiment = sys-curve\ninstance.q = 5\ninstance.n = 3"), "instance.k2");
    }

    #[test]
    fn strategic_user_fails_on_unrealizable_data() {
        let err = run(&cfg(
            "experiment = game\ndistribution.source = dr_construct\ninstance.q = 6\ninstance.n = 3\ninstance.k1 = 1\ninstance.k2 = 2\nuser.type = strategic\nuser.k = 1\ndata.m = 200\nuser.seed = 7\n",
        ))
        .unwrap_err();
        assert!(matches!(err.downcast_ref::<Error>(), Some(Error::NotRealizable { k: 1, .. })));
    }

    #[test]
    fn strategic_user_learns_a_pair_rule() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("v.txt"), "q=4 n=2 default=-\n+ 0 1\n").unwrap();
        let c = Config::parse(
            "experiment = game\ndistribution.source = uniform\nvalue.path = v.txt\ninstance.q = 4\ninstance.n = 2\ninstance.k1 = 1\ninstance.k2 = 2\nuser.type = strategic\nuser.k = 2\ndata.m = 300\n",
            dir.path(),
        )
        .unwrap();
        let r = run(&c).unwrap().report.render();
        assert!(r.contains("empirical_error=0\n"), "{r}");
        assert!(r.contains("user_payoff=1\n"), "{r}");
    }

    #[test]
    fn agnostic_user_in_game() {
        let r = report(
            "experiment = game\ndistribution.source = example1\ndistribution.epsilon = 0.2\nuser.type = agnostic\nuser.delta = 0.05\ndata.m = 400\n",
        );
        // Only a tenth of items are worthwhile, so the user rejects everything.
        assert!(r.contains("mode=always-reject\n"), "{r}");
        assert!(r.contains("user_payoff=9/10\n"), "{r}");
    }

    #[test]
    fn exact_rounding_guard() {
        let err = run(&cfg(
            "experiment = game\ndistribution.source = dr_construct\ndr.rounding = exact\ninstance.q = 6\ninstance.n = 3\ninstance.k1 = 1\ninstance.k2 = 2\n",
        ))
        .unwrap_err();
        assert!(matches!(err.downcast_ref::<Error>(), Some(Error::DivisibilityViolated(_))));
    }
}
