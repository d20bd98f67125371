//! Plain-text file formats.
//!
//! All files are UTF-8 and line oriented. Blank lines and lines starting with
//! `#` are ignored; tokens are separated by whitespace. Attribute lists are
//! strictly ascending indices.
//!
//! ```text
//! dataset        header line, then   <+|-> <idx> ...
//! distribution   header line, then   <num>/<den> <idx> ...   (or an integer)
//! choice         header line, k=<int>, then one positive set per line: <idx> ...
//! value table    q=<int> n=<int> [default=<+|->], then   <+|-> <idx> ...
//! ```
//!
//! The header line is `q=<int> n=<int> k1=<int> k2=<int>`, keys in any order.
//! A value table must list every nonempty subset of at most `n` attributes
//! unless `default=` supplies the label of the unlisted ones.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use crate::attrset::{enumerate_subsets, AttrSet};
use crate::choice::KOrderChoice;
use crate::data::{FiniteDistribution, Sample};
use crate::error::{Error, Result};
use crate::universe::{make_instance, Instance, Label};
use crate::value::ValueFunction;
use crate::Rational;

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Non-blank, non-comment lines with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_keys<'a>(line: usize, text: &'a str, required: &[&str], optional: &[&str]) -> Result<HashMap<&'a str, &'a str>> {
    let mut out = HashMap::new();
    for tok in text.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| perr(line, format!("expected key=value, got `{tok}`")))?;
        if !required.contains(&k) && !optional.contains(&k) {
            return Err(perr(line, format!("unknown key `{k}`")));
        }
        if out.insert(k, v).is_some() {
            return Err(perr(line, format!("key `{k}` given twice")));
        }
    }
    if let Some(missing) = required.iter().find(|k| !out.contains_key(*k)) {
        return Err(perr(line, format!("missing key `{missing}`")));
    }
    Ok(out)
}

fn parse_usize(line: usize, key: &str, v: &str) -> Result<usize> {
    v.parse()
        .map_err(|_| perr(line, format!("`{key}` must be a nonnegative integer, got `{v}`")))
}

fn parse_header(line: usize, text: &str) -> Result<Instance> {
    let keys = parse_keys(line, text, &["q", "n", "k1", "k2"], &[])?;
    let get = |k: &str| parse_usize(line, k, keys[k]);
    make_instance(get("q")?, get("n")?, get("k1")?, get("k2")?).map_err(|e| perr(line, e.to_string()))
}

fn parse_indices<'a, I: Iterator<Item = &'a str>>(line: usize, toks: I) -> Result<AttrSet> {
    let mut last: Option<usize> = None;
    let mut set = AttrSet::new();
    for tok in toks {
        let i: usize = tok
            .parse()
            .map_err(|_| perr(line, format!("bad attribute index `{tok}`")))?;
        if last.is_some_and(|l| i <= l) {
            return Err(perr(line, "attribute indices must be strictly ascending"));
        }
        last = Some(i);
        set.insert(i);
    }
    Ok(set)
}

fn parse_label(line: usize, tok: &str) -> Result<Label> {
    match tok {
        "+" | "+1" => Ok(Label::Pos),
        "-" | "-1" => Ok(Label::Neg),
        _ => Err(perr(line, format!("expected + or -, got `{tok}`"))),
    }
}

fn parse_probability(line: usize, tok: &str) -> Result<Rational> {
    let bad = || perr(line, format!("bad probability `{tok}`"));
    let (num, den) = match tok.split_once('/') {
        Some((n, d)) => (n.parse::<BigInt>().map_err(|_| bad())?, d.parse::<BigInt>().map_err(|_| bad())?),
        None => (tok.parse::<BigInt>().map_err(|_| bad())?, BigInt::one()),
    };
    if !den.is_positive() {
        return Err(perr(line, format!("denominator of `{tok}` must be positive")));
    }
    Ok(Rational::new(num, den))
}

fn header_of(text: &str) -> Result<(usize, &str, impl Iterator<Item = (usize, &str)>)> {
    let mut lines = content_lines(text);
    let (no, h) = lines.next().ok_or_else(|| perr(1, "missing header line"))?;
    Ok((no, h, lines))
}

pub fn parse_dataset(text: &str) -> Result<Sample> {
    let (no, h, lines) = header_of(text)?;
    let instance = parse_header(no, h)?;
    let mut entries = Vec::new();
    for (no, l) in lines {
        let mut toks = l.split_whitespace();
        let y = parse_label(no, toks.next().unwrap_or_default())?;
        let x = parse_indices(no, toks)?;
        instance.check_item(&x).map_err(|e| perr(no, e.to_string()))?;
        entries.push((x, y));
    }
    if entries.is_empty() {
        return Err(perr(no, "dataset has no entries"));
    }
    Sample::new(instance, entries)
}

pub fn parse_distribution(text: &str) -> Result<FiniteDistribution> {
    let (no, h, lines) = header_of(text)?;
    let instance = parse_header(no, h)?;
    let mut support = Vec::new();
    let mut seen = BTreeSet::new();
    let mut last = no;
    for (no, l) in lines {
        last = no;
        let mut toks = l.split_whitespace();
        let p = parse_probability(no, toks.next().unwrap_or_default())?;
        if p.is_negative() {
            return Err(perr(no, "probabilities must be nonnegative"));
        }
        let x = parse_indices(no, toks)?;
        instance.check_item(&x).map_err(|e| perr(no, e.to_string()))?;
        if !seen.insert(x.clone()) {
            return Err(perr(no, format!("duplicate item {x}")));
        }
        support.push((x, p));
    }
    FiniteDistribution::new(instance, support).map_err(|e| perr(last, e.to_string()))
}

pub fn parse_choice(text: &str) -> Result<KOrderChoice> {
    let (no, h, mut lines) = header_of(text)?;
    let instance = parse_header(no, h)?;
    let (kno, kline) = lines.next().ok_or_else(|| perr(no + 1, "missing k=<int> line"))?;
    let keys = parse_keys(kno, kline, &["k"], &[])?;
    let k = parse_usize(kno, "k", keys["k"])?;
    let mut family = Vec::new();
    for (no, l) in lines {
        let p = parse_indices(no, l.split_whitespace())?;
        if p.len() != k {
            return Err(perr(no, format!("positive set {p} must have {k} attributes")));
        }
        family.push(p);
    }
    KOrderChoice::new(instance, k, family).map_err(|e| perr(kno, e.to_string()))
}

pub fn parse_value_table(text: &str) -> Result<ValueFunction> {
    let (no, h, lines) = header_of(text)?;
    let keys = parse_keys(no, h, &["q", "n"], &["default"])?;
    let q = parse_usize(no, "q", keys["q"])?;
    let n = parse_usize(no, "n", keys["n"])?;
    if n < 1 || n > q {
        return Err(perr(no, format!("need 1 <= n <= q, got q={q} n={n}")));
    }
    let default = keys.get("default").map(|t| parse_label(no, t)).transpose()?;
    let mut table = BTreeMap::new();
    let mut last = no;
    for (no, l) in lines {
        last = no;
        let mut toks = l.split_whitespace();
        let y = parse_label(no, toks.next().unwrap_or_default())?;
        let x = parse_indices(no, toks)?;
        if x.is_empty() || x.len() > n || x.max_index().is_some_and(|m| m >= q) {
            return Err(perr(no, format!("{x} is not a nonempty subset of [0,{q}) with at most {n} attributes")));
        }
        if table.insert(x.clone(), y).is_some() {
            return Err(perr(no, format!("duplicate entry {x}")));
        }
    }
    if let Some(d) = default {
        if q > crate::universe::ENUMERATION_LIMIT {
            return Err(perr(no, "default= needs q <= 20"));
        }
        for x in enumerate_subsets(&AttrSet::prefix(q), 1, n) {
            table.entry(x).or_insert(d);
        }
    }
    ValueFunction::truth_table(q, n, table).map_err(|e| perr(last, e.to_string()))
}

fn header_line(i: &Instance) -> String {
    format!("q={} n={} k1={} k2={}\n", i.q, i.n, i.k1, i.k2)
}

fn indices(x: &AttrSet) -> String {
    x.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn write_dataset(s: &Sample) -> String {
    let mut out = header_line(s.instance());
    for (x, y) in s.entries() {
        let _ = writeln!(out, "{} {}", y.symbol(), indices(x));
    }
    out
}

pub fn write_distribution(d: &FiniteDistribution) -> String {
    let mut out = header_line(d.instance());
    for (x, p) in d.support() {
        let _ = writeln!(out, "{}/{} {}", p.numer(), p.denom(), indices(x));
    }
    out
}

pub fn write_choice(h: &KOrderChoice) -> String {
    let mut out = header_line(h.instance());
    let _ = writeln!(out, "k={}", h.k());
    for p in h.positive() {
        let _ = writeln!(out, "{}", indices(p));
    }
    out
}

/// Lists every entry explicitly.
pub fn write_value_table(v: &ValueFunction) -> Result<String> {
    let mut out = format!("q={} n={}\n", v.q(), v.n());
    for (x, y) in v.to_truth_table()? {
        let _ = writeln!(out, "{} {}", y.symbol(), indices(&x));
    }
    Ok(out)
}
