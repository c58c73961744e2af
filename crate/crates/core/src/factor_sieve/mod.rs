//! Factorizations and parity values (μ, λ, (−1)^ω) of integers and of
//! form values on a grid.

mod dump;
mod grid;

pub use dump::ParityDump;
pub use grid::{parity_sums, sieve_grid, GridTable, ParitySums, SievePlan};

use std::fmt;
use std::str::FromStr;

use crate::arith::{exact_sqrt, icbrt_u128, is_prime_u64, pollard_brent, primes_through};
use crate::error::{Error, Result};

/// Which parity function to sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Alpha {
    Mu,
    Liouville,
    OmegaSign,
}

impl Alpha {
    pub fn code(self) -> u8 {
        match self {
            Alpha::Mu => 0,
            Alpha::Liouville => 1,
            Alpha::OmegaSign => 2,
        }
    }

    pub fn from_code(c: u8) -> Result<Alpha> {
        match c {
            0 => Ok(Alpha::Mu),
            1 => Ok(Alpha::Liouville),
            2 => Ok(Alpha::OmegaSign),
            _ => Err(Error::Parse(format!("unknown parity code {c}"))),
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Alpha::Mu => "mu",
            Alpha::Liouville => "lambda",
            Alpha::OmegaSign => "omega",
        })
    }
}

impl FromStr for Alpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "mu" => Ok(Alpha::Mu),
            "lambda" | "liouville" => Ok(Alpha::Liouville),
            "omega" | "omega_sign" => Ok(Alpha::OmegaSign),
            other => Err(Error::Parse(format!("unknown alpha {other:?}"))),
        }
    }
}

/// Prime factorization of an integer, with its sign carried separately.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub factors: Vec<(u64, u32)>,
    /// −1, +1, or 0 for the integer zero.
    pub sign: i8,
    pub complete: bool,
}

impl Factorization {
    pub fn zero() -> Self {
        Factorization { factors: Vec::new(), sign: 0, complete: true }
    }

    /// sign·∏ pᵉ, or `None` if the product leaves the 128-bit range.
    pub fn value(&self) -> Option<i128> {
        let mut acc: i128 = 1;
        for &(p, e) in &self.factors {
            for _ in 0..e {
                acc = acc.checked_mul(p as i128)?;
            }
        }
        Some(acc * self.sign as i128)
    }

    pub fn parity(&self) -> ParityValues {
        if self.sign == 0 {
            return ParityValues { mu: 0, liouville: 0, omega_sign: 0 };
        }
        let omega = self.factors.len() as u32;
        let big: u32 = self.factors.iter().map(|&(_, e)| e).sum();
        let squarefree = self.factors.iter().all(|&(_, e)| e == 1);
        ParityValues::from_counts(omega, big, squarefree)
    }
}

/// The three parity functions at one integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ParityValues {
    pub mu: i8,
    pub liouville: i8,
    pub omega_sign: i8,
}

impl ParityValues {
    pub fn from_counts(omega: u32, big_omega: u32, squarefree: bool) -> Self {
        let sign = |k: u32| if k % 2 == 0 { 1 } else { -1 };
        ParityValues {
            mu: if squarefree { sign(omega) } else { 0 },
            liouville: sign(big_omega),
            omega_sign: sign(omega),
        }
    }

    pub fn get(&self, alpha: Alpha) -> i8 {
        match alpha {
            Alpha::Mu => self.mu,
            Alpha::Liouville => self.liouville,
            Alpha::OmegaSign => self.omega_sign,
        }
    }
}

/// Completes a factorization once every prime ≤ z has been divided out.
/// Then m < z³ leaves four shapes: 1, p, p², or p·q.
pub fn cofactor_resolve(m: u64, z: u64) -> Result<Vec<(u64, u32)>> {
    if m <= 1 {
        return Ok(Vec::new());
    }
    let z3 = (z as u128).pow(3);
    if (m as u128) >= z3 {
        return Err(Error::Corruption(format!("cofactor {m} is not below the cube of bound {z}")));
    }
    let small = |p: u64| Error::Corruption(format!("cofactor {m} has factor {p} ≤ bound {z}"));
    if is_prime_u64(m) {
        if m <= z {
            return Err(small(m));
        }
        return Ok(vec![(m, 1)]);
    }
    if let Some(s) = exact_sqrt(m) {
        if !is_prime_u64(s) || s <= z {
            return Err(small(s));
        }
        return Ok(vec![(s, 2)]);
    }
    let d = pollard_brent(m).ok_or_else(|| Error::Corruption(format!("could not split {m}")))?;
    let (p, q) = (d.min(m / d), d.max(m / d));
    if p <= z {
        return Err(small(p));
    }
    if !is_prime_u64(p) || !is_prime_u64(q) {
        return Err(Error::Corruption(format!("cofactor {m} has more than two prime factors")));
    }
    Ok(vec![(p, 1), (q, 1)])
}

/// Factorization of n ≠ 0 by trial division through the cube root, with the
/// rest handed to [`cofactor_resolve`].
pub fn factor_integer(n: i128) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::Invalid("zero has no factorization".into()));
    }
    let sign = if n < 0 { -1 } else { 1 };
    let abs = u64::try_from(n.unsigned_abs())
        .map_err(|_| Error::Range(format!("{n} exceeds the 64-bit factoring range")))?;
    let z = icbrt_u128(abs as u128) as u64 + 1;
    let mut m = abs;
    let mut factors = Vec::new();
    let mut exhausted = true;
    for p in primes_through(z) {
        if p * p > m {
            exhausted = false;
            break;
        }
        if m % p == 0 {
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            factors.push((p, e));
        }
    }
    if !exhausted {
        // no factor below √m remains
        if m > 1 {
            factors.push((m, 1));
        }
    } else {
        factors.extend(cofactor_resolve(m, z)?);
    }
    Ok(Factorization { factors, sign, complete: true })
}

/// α(n) for 1 ≤ n ≤ hi through the grid sieve, as the values of x·y² on
/// the row y = 1.
pub fn integer_parities(hi: u64, alpha: Alpha, threads: usize) -> Result<Vec<i8>> {
    if hi == 0 {
        return Ok(Vec::new());
    }
    let form = crate::cubic_form::BinaryCubicForm::new(0, 0, 1, 0)?;
    let row = crate::region_lattice::ConvexRegion::boxed(1.0, hi as f64, 1.0, 1.0)?;
    let whole = crate::region_lattice::LatticeCoset::whole_plane();
    Ok(parity_sums(&form, &row, &whole, false, threads, Some(alpha))?.1)
}

pub fn parity_values(n: i128) -> Result<ParityValues> {
    Ok(factor_integer(n)?.parity())
}

pub fn mu(n: i128) -> Result<i8> {
    Ok(parity_values(n)?.mu)
}

pub fn liouville(n: i128) -> Result<i8> {
    Ok(parity_values(n)?.liouville)
}

pub fn omega_sign(n: i128) -> Result<i8> {
    Ok(parity_values(n)?.omega_sign)
}
