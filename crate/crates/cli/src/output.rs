//! Report and CSV serialization.
//!
//! Rationals print as `num/den` (integers without a denominator). Floats
//! carry 9 significant digits, rounded half to even from the exact value,
//! in fixed notation for magnitudes in `[1e-5, 1e15)` and scientific
//! notation otherwise.

use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use strepr::Rational;

const SIG_DIGITS: i64 = 9;

pub fn rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn pow10(e: i64) -> Rational {
    let ten = Rational::from_integer(10.into());
    if e >= 0 {
        num_traits::pow(ten, e as usize)
    } else {
        Rational::one() / num_traits::pow(ten, (-e) as usize)
    }
}

fn round_half_even(r: &Rational) -> num_bigint::BigInt {
    let floor = r.floor();
    let frac = r - &floor;
    let half = Rational::new(1.into(), 2.into());
    let mut n = floor.to_integer();
    if frac > half || (frac == half && (&n % 2u8) != num_bigint::BigInt::zero()) {
        n += 1;
    }
    n
}

/// Decimal rendering of an exact value with 9 significant digits.
pub fn float(r: &Rational) -> String {
    if r.is_zero() {
        return "0".into();
    }
    let neg = r.is_negative();
    let a = r.abs();
    // Estimate the decimal exponent from bit lengths, then correct it.
    let bits = a.numer().bits() as i64 - a.denom().bits() as i64;
    let mut e = (bits as f64 * std::f64::consts::LOG10_2).floor() as i64;
    while pow10(e) > a {
        e -= 1;
    }
    while pow10(e + 1) <= a {
        e += 1;
    }
    let mut n = round_half_even(&(&a * pow10(SIG_DIGITS - 1 - e)));
    if n.to_string().len() as i64 > SIG_DIGITS {
        n /= 10;
        e += 1;
    }
    let digits = n.to_string();
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if (-5..15).contains(&e) {
        if e >= SIG_DIGITS - 1 {
            out.push_str(&digits);
            out.extend(std::iter::repeat_n('0', (e - (SIG_DIGITS - 1)) as usize));
        } else if e >= 0 {
            let (int, frac) = digits.split_at(e as usize + 1);
            let _ = write!(out, "{int}.{frac}");
        } else {
            out.push_str("0.");
            out.extend(std::iter::repeat_n('0', (-e - 1) as usize));
            out.push_str(&digits);
        }
    } else {
        let (lead, rest) = digits.split_at(1);
        let _ = write!(out, "{lead}.{rest}e{e}");
    }
    out
}

/// Same rendering for a computed float; non-finite values print as-is.
pub fn float_f64(x: f64) -> String {
    match BigRational::from_float(x) {
        Some(r) => float(&r),
        None => x.to_string(),
    }
}

/// Ordered `key=value` lines.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.lines.push((key.into(), value.to_string()));
    }

    /// The exact value under `key` and its float under `key_float`.
    pub fn push_rational(&mut self, key: &str, r: &Rational) {
        self.push(key, rational(r));
        self.push(format!("{key}_float"), float(r));
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.lines {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }
}

/// A `k,value` curve.
pub fn curve_csv(points: &[(usize, Rational)]) -> String {
    let mut s = String::from("k,value\n");
    for (k, v) in points {
        let _ = writeln!(s, "{k},{}", float(v));
    }
    s
}
