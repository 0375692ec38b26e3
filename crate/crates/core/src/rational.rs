//! Exact rational helpers shared by every module.
//!
//! All unit-interval values are [`Rat`]s. Text form is `"p/q"` (or a bare
//! integer), which is also the serialization used by the file formats.

use alloc::string::String;
use alloc::vec::Vec;
use core::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Arbitrary precision rational number.
pub type Rat = num_rational::BigRational;

pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn zero() -> Rat {
    Rat::zero()
}

pub fn one() -> Rat {
    Rat::one()
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"0.25"`.
pub fn parse_rat(text: &str) -> Option<Rat> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n = BigInt::from_str(n.trim()).ok()?;
        let d = BigInt::from_str(d.trim()).ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rat::new(n, d));
    }
    if let Some((int, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = int.starts_with('-');
        let int_part = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            BigInt::from_str(int).ok()?
        };
        let scale = num_traits::pow(BigInt::from(10u8), frac.len());
        let frac_part = BigInt::from_str(frac).ok()?;
        let magnitude = int_part.abs() * &scale + frac_part;
        let numer = if negative { -magnitude } else { magnitude };
        return Some(Rat::new(numer, scale));
    }
    BigInt::from_str(text).ok().map(Rat::from_integer)
}

/// Canonical `"p/q"` rendering; integers render without a denominator.
pub fn format_rat(value: &Rat) -> String {
    if value.denom().is_one() {
        alloc::format!("{}", value.numer())
    } else {
        alloc::format!("{}/{}", value.numer(), value.denom())
    }
}

/// Lossy conversion used only for human-facing summaries.
pub fn to_f64(value: &Rat) -> f64 {
    let (n, d) = (value.numer(), value.denom());
    // Scale down huge operands before converting so the quotient stays finite.
    let bits = n.bits().max(d.bits());
    if bits > 1000 {
        let shift = bits - 900;
        let n = n >> shift;
        let d = d >> shift;
        if d.is_zero() {
            return if n.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY };
        }
        return big_to_f64(&n) / big_to_f64(&d);
    }
    big_to_f64(n) / big_to_f64(d)
}

fn big_to_f64(value: &BigInt) -> f64 {
    num_traits::ToPrimitive::to_f64(value).unwrap_or(f64::NAN)
}

pub fn min(a: &Rat, b: &Rat) -> Rat {
    if a <= b { a.clone() } else { b.clone() }
}

pub fn max(a: &Rat, b: &Rat) -> Rat {
    if a >= b { a.clone() } else { b.clone() }
}

pub fn clamp01(value: Rat) -> Rat {
    if value < zero() {
        zero()
    } else if value > one() {
        one()
    } else {
        value
    }
}

/// `true` when `step` is positive and `1/step` is an integer.
pub fn divides_one(step: &Rat) -> bool {
    step.is_positive() && (one() / step).is_integer()
}

/// The grid `{0, step, 2 step, ..., 1}`; `step` must divide 1.
pub fn unit_grid(step: &Rat) -> Vec<Rat> {
    debug_assert!(divides_one(step));
    let count = (one() / step).to_integer();
    let count: u64 = num_traits::ToPrimitive::to_u64(&count).unwrap_or(0);
    (0..=count).map(|i| step * Rat::from_integer(BigInt::from(i))).collect()
}

/// Largest grid point `<= value` for a grid of the given step.
pub fn floor_to_grid(value: &Rat, step: &Rat) -> Rat {
    (value / step).floor() * step
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rat("1/2"), Some(rat(1, 2)));
        assert_eq!(parse_rat("-3/12"), Some(rat(-1, 4)));
        assert_eq!(parse_rat("0.25"), Some(rat(1, 4)));
        assert_eq!(parse_rat("-0.5"), Some(rat(-1, 2)));
        assert_eq!(parse_rat("1"), Some(one()));
        assert_eq!(parse_rat("1/0"), None);
        assert_eq!(parse_rat("x"), None);
        assert_eq!(format_rat(&rat(2, 4)), "1/2");
        assert_eq!(format_rat(&rat(4, 2)), "2");
    }

    #[test]
    fn grids() {
        assert!(divides_one(&rat(1, 16)));
        assert!(!divides_one(&rat(2, 3)));
        assert_eq!(unit_grid(&rat(1, 4)).len(), 5);
        assert_eq!(floor_to_grid(&rat(5, 16), &rat(1, 8)), rat(1, 4));
    }

    #[test]
    fn float_rendering_of_huge_values() {
        let big = Rat::new(BigInt::from(1) << 3000usize, (BigInt::from(1) << 3001usize) + 1);
        assert!((to_f64(&big) - 0.5).abs() < 1e-9);
    }
}
