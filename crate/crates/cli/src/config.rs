//! Flat `key = value` scenario configs.
//!
//! One setting per line, `#` starts a comment, keys carry a section prefix
//! (`instance.q = 400`). Relative paths resolve against the config file's
//! directory.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use strepr::Rational;

pub const KEYS: &[&str] = &[
    "experiment",
    "instance.q",
    "instance.n",
    "instance.k1",
    "instance.k2",
    "user.type",
    "user.k",
    "user.delta",
    "user.seed",
    "responder",
    "distribution.source",
    "distribution.epsilon",
    "distribution.path",
    "dr.rounding",
    "value.path",
    "data.path",
    "data.m",
    "choice.path",
    "bound.m",
    "bound.delta",
    "bound.epsilon",
    "bound.c",
    "output.dir",
];

/// A config problem, tied to the key that caused it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub msg: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, msg: impl Into<String>) -> Self {
        ConfigError {
            key: key.into(),
            msg: msg.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config key `{}`: {}", self.key, self.msg)
    }
}

impl std::error::Error for ConfigError {}

type Res<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
    base: PathBuf,
}

impl Config {
    pub fn parse(text: &str, base: &Path) -> Res<Config> {
        let mut cfg = Config {
            values: BTreeMap::new(),
            base: base.to_path_buf(),
        };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::new(format!("line {}", i + 1), format!("expected `key = value`, got `{line}`")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    /// A config assembled from command-line flags; paths stay as given.
    pub fn from_pairs<'a, I>(pairs: I) -> Res<Config>
    where
        I: IntoIterator<Item = (&'a str, String)>,
    {
        let mut cfg = Config {
            values: BTreeMap::new(),
            base: PathBuf::from("."),
        };
        for (k, v) in pairs {
            cfg.set(k, &v)?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Res<()> {
        if !KEYS.contains(&key) {
            return Err(ConfigError::new(key, "unknown key"));
        }
        if value.is_empty() {
            return Err(ConfigError::new(key, "empty value"));
        }
        if self.values.insert(key.to_string(), value.to_string()).is_some() {
            return Err(ConfigError::new(key, "set twice"));
        }
        Ok(())
    }

    /// Overrides a key, as command-line flags do for `run`.
    pub fn override_with(&mut self, key: &str, value: String) -> Res<()> {
        self.values.remove(key);
        self.set(key, &value)
    }

    pub fn base(&self) -> &Path {
        &self.base
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Res<&str> {
        self.get(key).ok_or_else(|| ConfigError::new(key, "required but missing"))
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str, what: &str) -> Res<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| ConfigError::new(key, format!("`{v}` is not {what}"))),
        }
    }

    pub fn usize(&self, key: &str) -> Res<Option<usize>> {
        self.parsed(key, "a nonnegative integer")
    }

    pub fn require_usize(&self, key: &str) -> Res<usize> {
        self.usize(key)?.ok_or_else(|| ConfigError::new(key, "required but missing"))
    }

    pub fn u64(&self, key: &str) -> Res<Option<u64>> {
        self.parsed(key, "a nonnegative integer")
    }

    pub fn f64(&self, key: &str) -> Res<Option<f64>> {
        self.parsed(key, "a number")
    }

    /// A probability strictly inside (0, 1).
    pub fn open_unit(&self, key: &str) -> Res<Option<f64>> {
        match self.f64(key)? {
            Some(x) if !(x > 0.0 && x < 1.0) => Err(ConfigError::new(key, format!("{x} must lie in (0, 1)"))),
            other => Ok(other),
        }
    }

    /// An exact value written as `a/b` or as a decimal.
    pub fn rational(&self, key: &str) -> Res<Option<Rational>> {
        self.get(key)
            .map(|v| parse_rational(v).ok_or_else(|| ConfigError::new(key, format!("`{v}` is not a fraction or decimal"))))
            .transpose()
    }

    /// A path that must exist.
    pub fn existing_path(&self, key: &str) -> Res<Option<PathBuf>> {
        let Some(v) = self.get(key) else {
            return Ok(None);
        };
        let p = self.resolve(v);
        if !p.exists() {
            return Err(ConfigError::new(key, format!("file `{}` does not exist", p.display())));
        }
        Ok(Some(p))
    }

    pub fn require_existing_path(&self, key: &str) -> Res<PathBuf> {
        self.existing_path(key)?
            .ok_or_else(|| ConfigError::new(key, "required but missing"))
    }

    pub fn resolve(&self, v: &str) -> PathBuf {
        let p = Path::new(v);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let r = Rational::new(digits, den);
    Some(if neg { -r } else { r })
}

/// Where the game's items and weights come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DistSource {
    Example1(Rational),
    Example2(Rational),
    DrConstruct,
    Uniform,
    File(PathBuf),
}

impl DistSource {
    pub fn from_config(cfg: &Config) -> Res<DistSource> {
        let key = "distribution.source";
        let epsilon = || -> Res<Rational> {
            let e = cfg
                .rational("distribution.epsilon")?
                .ok_or_else(|| ConfigError::new("distribution.epsilon", "required by the built-in examples"))?;
            if e <= Rational::zero() || e >= Rational::one() {
                return Err(ConfigError::new("distribution.epsilon", format!("{e} must lie in (0, 1)")));
            }
            Ok(e)
        };
        match cfg.require(key)? {
            "example1" => Ok(DistSource::Example1(epsilon()?)),
            "example2" => Ok(DistSource::Example2(epsilon()?)),
            "dr_construct" => Ok(DistSource::DrConstruct),
            "uniform" => Ok(DistSource::Uniform),
            "file" => Ok(DistSource::File(cfg.require_existing_path("distribution.path")?)),
            other => Err(ConfigError::new(
                key,
                format!("`{other}` is not one of example1, example2, dr_construct, uniform, file"),
            )),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DistSource::Example1(_) => "example1",
            DistSource::Example2(_) => "example2",
            DistSource::DrConstruct => "dr_construct",
            DistSource::Uniform => "uniform",
            DistSource::File(_) => "file",
        }
    }
}
