//! Integer binary cubic forms f(x, y) = a x³ + b x²y + c xy² + d y³.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::arith::{divisors, gcd_i128};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BinaryCubicForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
    disc: i128,
}

impl BinaryCubicForm {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        if a == 0 && b == 0 && c == 0 && d == 0 {
            return Err(Error::ZeroForm);
        }
        let disc = discriminant(a, b, c, d)?;
        Ok(BinaryCubicForm { a, b, c, d, disc })
    }

    pub fn coefficients(&self) -> [i64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// b²c² − 4ac³ − 4b³d − 27a²d² + 18abcd.
    pub fn discriminant(&self) -> i128 {
        self.disc
    }

    /// f(x, y), exactly. Overflow of the 128-bit range is an error.
    pub fn evaluate(&self, x: i64, y: i64) -> Result<i128> {
        let (x, y) = (x as i128, y as i128);
        let overflow = || Error::Range(format!("f({x},{y}) exceeds 128-bit range"));
        let x2 = x.checked_mul(x).ok_or_else(overflow)?;
        let y2 = y.checked_mul(y).ok_or_else(overflow)?;
        let terms = [
            x2.checked_mul(x).and_then(|t| t.checked_mul(self.a as i128)),
            x2.checked_mul(y).and_then(|t| t.checked_mul(self.b as i128)),
            y2.checked_mul(x).and_then(|t| t.checked_mul(self.c as i128)),
            y2.checked_mul(y).and_then(|t| t.checked_mul(self.d as i128)),
        ];
        let mut acc = 0i128;
        for t in terms {
            acc = acc.checked_add(t.ok_or_else(overflow)?).ok_or_else(overflow)?;
        }
        Ok(acc)
    }

    /// Upper bound for |f| on the square [−m, m]².
    pub fn value_bound(&self, m: u64) -> Option<u128> {
        let m3 = (m as u128).checked_pow(3)?;
        let coeff_sum = [self.a, self.b, self.c, self.d]
            .iter()
            .map(|&c| c.unsigned_abs() as u128)
            .sum::<u128>();
        coeff_sum.checked_mul(m3)
    }

    /// gcd of the coefficients.
    pub fn content(&self) -> u64 {
        let g = [self.a, self.b, self.c, self.d]
            .iter()
            .fold(0i128, |g, &c| gcd_i128(g, c as i128));
        g as u64
    }

    /// True iff f has no linear factor over Q, which for a cubic is
    /// irreducibility. A vanishing a or d leaves y or x as a factor.
    pub fn is_irreducible(&self) -> bool {
        self.linear_factor().is_none()
    }

    /// A linear factor (q·x − p·y) of f when one exists, found by the
    /// rational root test on f(t, 1).
    pub fn linear_factor(&self) -> Option<(i64, i64)> {
        if self.a == 0 {
            return Some((0, -1)); // y | f
        }
        if self.d == 0 {
            return Some((1, 0)); // x | f
        }
        let nums = divisors(self.d.unsigned_abs());
        let dens = divisors(self.a.unsigned_abs());
        let coeffs = [self.a, self.b, self.c, self.d].map(BigInt::from);
        for &q in &dens {
            for &p in &nums {
                if crate::arith::gcd_u64(p, q) != 1 {
                    continue;
                }
                for sign in [1i64, -1] {
                    let p = sign * p as i64;
                    let (pb, qb) = (BigInt::from(p), BigInt::from(q));
                    // f(p, q) = a p³ + b p²q + c pq² + d q³
                    let val = &coeffs[0] * &pb * &pb * &pb
                        + &coeffs[1] * &pb * &pb * &qb
                        + &coeffs[2] * &pb * &qb * &qb
                        + &coeffs[3] * &qb * &qb * &qb;
                    if val.is_zero() {
                        return Some((q as i64, p));
                    }
                }
            }
        }
        None
    }

    /// The form divided by its content.
    pub fn primitive_part(&self) -> BinaryCubicForm {
        let g = self.content() as i64;
        BinaryCubicForm::new(self.a / g, self.b / g, self.c / g, self.d / g)
            .expect("primitive part of a nonzero form")
    }

    pub fn is_monic(&self) -> bool {
        self.a == 1
    }

    /// Rewrites a²·f(x, y) = g(a·x, y) with g monic.
    pub fn monicize(&self) -> Result<MonicizationData> {
        if !self.is_irreducible() {
            return Err(Error::Reducible(self.to_string()));
        }
        if self.content() != 1 {
            return Err(Error::Invalid(format!("form {self} has content {}", self.content())));
        }
        let a = self.a as i128;
        let overflow = || Error::Range(format!("monic model of {self} exceeds 64-bit coefficients"));
        let c = i64::try_from(a * self.c as i128).map_err(|_| overflow())?;
        let d = a
            .checked_mul(a)
            .and_then(|a2| a2.checked_mul(self.d as i128))
            .and_then(|v| i64::try_from(v).ok())
            .ok_or_else(overflow)?;
        let model = BinaryCubicForm::new(1, self.b, c, d)?;
        let scale = self.a.unsigned_abs().checked_pow(2).ok_or_else(overflow)?;
        Ok(MonicizationData { scale, map: [[self.a, 0], [0, 1]], model })
    }
}

fn discriminant(a: i64, b: i64, c: i64, d: i64) -> Result<i128> {
    let big = |v: i64| BigInt::from(v);
    let (a, b, c, d) = (big(a), big(b), big(c), big(d));
    let disc = &b * &b * &c * &c - 4 * &a * &c * &c * &c - 4 * &b * &b * &b * &d
        - 27 * &a * &a * &d * &d
        + 18 * &a * &b * &c * &d;
    i128::try_from(&disc).map_err(|_| Error::Range("discriminant exceeds 128 bits".into()))
}

impl fmt::Display for BinaryCubicForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.a, self.b, self.c, self.d)
    }
}

impl FromStr for BinaryCubicForm {
    type Err = Error;

    /// Literal syntax "a,b,c,d".
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::Parse(format!("form literal needs 4 coefficients: {s:?}")));
        }
        let mut c = [0i64; 4];
        for (slot, part) in c.iter_mut().zip(&parts) {
            *slot = part
                .parse()
                .map_err(|_| Error::Parse(format!("bad coefficient {part:?} in {s:?}")))?;
        }
        BinaryCubicForm::new(c[0], c[1], c[2], c[3])
    }
}

pub fn parse_form(coeffs: [i64; 4]) -> Result<BinaryCubicForm> {
    BinaryCubicForm::new(coeffs[0], coeffs[1], coeffs[2], coeffs[3])
}

/// The substitution taking an irreducible primitive form to a monic model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonicizationData {
    /// s = a², with s·f(x, y) = model(a·x, y).
    pub scale: u64,
    /// Row-major matrix sending (x, y) to model coordinates.
    pub map: [[i64; 2]; 2],
    pub model: BinaryCubicForm,
}

impl MonicizationData {
    pub fn apply(&self, x: i64, y: i64) -> (i64, i64) {
        (
            self.map[0][0] * x + self.map[0][1] * y,
            self.map[1][0] * x + self.map[1][1] * y,
        )
    }
}
