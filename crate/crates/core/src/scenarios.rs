//! Small built-in games where a naive user is exploited by a strategic system.
//!
//! Attribute `a_i` is index `i - 1`.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::attrset::AttrSet;
use crate::data::FiniteDistribution;
use crate::error::{Error, Result};
use crate::universe::{make_instance, Instance};
use crate::value::ValueFunction;
use crate::Rational;

#[derive(Debug, Clone)]
pub struct Scenario {
    pub instance: Instance,
    pub value: ValueFunction,
    pub dist: FiniteDistribution,
}

fn check_epsilon(eps: &Rational) -> Result<()> {
    if *eps <= Rational::zero() || *eps >= Rational::one() {
        return Err(Error::InvalidDistribution(format!("epsilon = {eps} must lie in (0, 1)")));
    }
    Ok(())
}

fn set(ix: &[usize]) -> AttrSet {
    AttrSet::from_indices(ix.iter().copied())
}

/// Items `{a1}`, `{a1,a2}`, `{a2}` with mass `(eps/2, 1-eps, eps/2)`; only
/// `{a1}` is worthwhile; representations are single attributes.
pub fn example1(eps: Rational) -> Result<Scenario> {
    check_epsilon(&eps)?;
    let instance = make_instance(2, 2, 1, 1)?;
    let value = ValueFunction::from_positive_sets(2, 2, [set(&[0])])?;
    let half = &eps / Rational::from_integer(BigInt::from(2));
    let dist = FiniteDistribution::new(
        instance,
        vec![
            (set(&[0]), half.clone()),
            (set(&[0, 1]), Rational::one() - &eps),
            (set(&[1]), half),
        ],
    )?;
    Ok(Scenario {
        instance,
        value,
        dist,
    })
}

/// Five two-attribute items over four attributes with mass
/// `(eps/4, eps/4, 1-eps, eps/4, eps/4)`. `{a1,a2}`, `{a3,a4}`, `{a2}` and
/// `{a4}` are worthwhile; every other set (including the unlisted pair
/// `{a2,a4}`, which carries no mass) is not.
pub fn example2(eps: Rational) -> Result<Scenario> {
    check_epsilon(&eps)?;
    let instance = make_instance(4, 2, 1, 1)?;
    let value = ValueFunction::from_positive_sets(4, 2, [set(&[0, 1]), set(&[2, 3]), set(&[1]), set(&[3])])?;
    let quarter = &eps / Rational::from_integer(BigInt::from(4));
    let dist = FiniteDistribution::new(
        instance,
        vec![
            (set(&[0, 1]), quarter.clone()),
            (set(&[0, 2]), quarter.clone()),
            (set(&[0, 3]), Rational::one() - &eps),
            (set(&[1, 2]), quarter.clone()),
            (set(&[2, 3]), quarter),
        ],
    )?;
    Ok(Scenario {
        instance,
        value,
        dist,
    })
}
