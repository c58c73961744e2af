//! Exact cut points for comparisons against integer norms.

use std::cmp::Ordering;
use std::fmt;

use crate::arith::{cmp_products, gcd_u64};
use crate::error::{Error, Result};

/// A nonnegative rational num/den, or +∞.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cut {
    Finite { num: u128, den: u128 },
    Infinite,
}

const FRAC_BITS: i32 = 32;

impl Cut {
    pub fn ratio(num: u128, den: u128) -> Result<Cut> {
        if den == 0 {
            return Err(Error::Invalid("cut with zero denominator".into()));
        }
        let g = gcd_u128(num, den);
        Ok(Cut::Finite { num: num / g, den: den / g })
    }

    pub fn integer(n: u128) -> Cut {
        Cut::Finite { num: n, den: 1 }
    }

    /// Rounds v to a multiple of 2^-32 (to an integer above 2^63).
    pub fn from_f64(v: f64) -> Result<Cut> {
        if v.is_nan() || v < 0.0 {
            return Err(Error::Invalid(format!("cut point {v} must be ≥ 0")));
        }
        if v.is_infinite() || v >= 2f64.powi(127) {
            return Ok(Cut::Infinite);
        }
        if v < 2f64.powi(63) {
            let scaled = (v * 2f64.powi(FRAC_BITS)).round() as u128;
            Cut::ratio(scaled, 1u128 << FRAC_BITS)
        } else {
            Ok(Cut::integer(v as u128))
        }
    }

    pub fn to_f64(&self) -> f64 {
        match *self {
            Cut::Finite { num, den } => num as f64 / den as f64,
            Cut::Infinite => f64::INFINITY,
        }
    }

    /// How the integer n compares with this cut.
    pub fn compare(&self, n: u128) -> Ordering {
        match *self {
            Cut::Finite { num, den } => cmp_products(n, den, num, 1),
            Cut::Infinite => Ordering::Less,
        }
    }

    /// n ≤ cut.
    pub fn admits(&self, n: u128) -> bool {
        self.compare(n) != Ordering::Greater
    }

    /// n < cut.
    pub fn exceeds(&self, n: u128) -> bool {
        self.compare(n) == Ordering::Less
    }

    /// n > cut.
    pub fn below(&self, n: u128) -> bool {
        self.compare(n) == Ordering::Greater
    }

    /// Order between two cuts.
    pub fn cmp_cut(&self, other: &Cut) -> Ordering {
        match (*self, *other) {
            (Cut::Infinite, Cut::Infinite) => Ordering::Equal,
            (Cut::Infinite, _) => Ordering::Greater,
            (_, Cut::Infinite) => Ordering::Less,
            (Cut::Finite { num: a, den: b }, Cut::Finite { num: c, den: d }) => {
                cmp_products(a, d, c, b)
            }
        }
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    if a <= u64::MAX as u128 && b <= u64::MAX as u128 {
        return gcd_u64(a as u64, b as u64).max(1) as u128;
    }
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

impl fmt::Display for Cut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Cut::Finite { num, den: 1 } => write!(f, "{num}"),
            Cut::Finite { num, den } => write!(f, "{num}/{den}"),
            Cut::Infinite => f.write_str("inf"),
        }
    }
}
