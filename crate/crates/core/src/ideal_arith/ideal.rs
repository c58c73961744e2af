use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// Identifies a prime above p by the factor of the minimal polynomial mod p
/// it comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RootTag {
    /// The linear factor t − r.
    Root(u64),
    /// The unique irreducible factor of this degree (2 or 3).
    Residue(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrimeIdeal {
    pub p: u64,
    pub tag: RootTag,
    pub residue_degree: u32,
    pub ramification: u32,
}

impl PrimeIdeal {
    pub fn norm(&self) -> u128 {
        (self.p as u128).pow(self.residue_degree)
    }
}

impl fmt::Display for PrimeIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tag {
            RootTag::Root(r) => write!(f, "P({},{r})", self.p),
            RootTag::Residue(d) => write!(f, "P({},deg{d})", self.p),
        }
    }
}

/// A nonzero ideal as a product of prime ideal powers, sorted by prime.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ideal {
    factors: Vec<(PrimeIdeal, u32)>,
    norm: u128,
}

pub const DEFAULT_DIVISOR_CAP: u64 = 1 << 16;

fn norm_of(factors: &[(PrimeIdeal, u32)]) -> Result<u128> {
    let mut n: u128 = 1;
    for &(p, e) in factors {
        let pe = p
            .norm()
            .checked_pow(e)
            .ok_or_else(|| Error::Range("ideal norm exceeds 128 bits".into()))?;
        n = n
            .checked_mul(pe)
            .ok_or_else(|| Error::Range("ideal norm exceeds 128 bits".into()))?;
    }
    Ok(n)
}

impl Ideal {
    /// The unit ideal (1).
    pub fn unit() -> Self {
        Ideal { factors: Vec::new(), norm: 1 }
    }

    pub fn prime(p: PrimeIdeal) -> Self {
        Ideal { factors: vec![(p, 1)], norm: p.norm() }
    }

    pub fn prime_power(p: PrimeIdeal, e: u32) -> Result<Self> {
        Ideal::from_factors(vec![(p, e)])
    }

    /// Builds an ideal from (prime, exponent) pairs in any order; repeated
    /// primes are merged and zero exponents dropped.
    pub fn from_factors(mut factors: Vec<(PrimeIdeal, u32)>) -> Result<Self> {
        factors.sort();
        let mut merged: Vec<(PrimeIdeal, u32)> = Vec::with_capacity(factors.len());
        for (p, e) in factors {
            if e == 0 {
                continue;
            }
            match merged.last_mut() {
                Some((q, f)) if *q == p => *f += e,
                _ => merged.push((p, e)),
            }
        }
        let norm = norm_of(&merged)?;
        Ok(Ideal { factors: merged, norm })
    }

    pub fn factors(&self) -> &[(PrimeIdeal, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = PrimeIdeal> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn norm(&self) -> u128 {
        self.norm
    }

    /// v_𝔭 of this ideal.
    pub fn exponent(&self, p: &PrimeIdeal) -> u32 {
        self.factors
            .binary_search_by(|(q, _)| q.cmp(p))
            .map_or(0, |i| self.factors[i].1)
    }

    /// Number of divisors.
    pub fn tau(&self) -> u64 {
        self.factors
            .iter()
            .fold(1u64, |acc, &(_, e)| acc.saturating_mul(e as u64 + 1))
    }

    /// Number of distinct prime divisors.
    pub fn omega(&self) -> u32 {
        self.factors.len() as u32
    }

    pub fn mu(&self) -> i8 {
        if self.factors.iter().any(|&(_, e)| e > 1) {
            0
        } else if self.factors.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn rad(&self) -> Ideal {
        let factors: Vec<_> = self.factors.iter().map(|&(p, _)| (p, 1)).collect();
        let norm = norm_of(&factors).expect("radical divides the ideal");
        Ideal { factors, norm }
    }

    pub fn mul(&self, other: &Ideal) -> Result<Ideal> {
        let mut all = self.factors.clone();
        all.extend_from_slice(&other.factors);
        Ideal::from_factors(all)
    }

    pub fn divides(&self, other: &Ideal) -> bool {
        self.factors.iter().all(|(p, e)| other.exponent(p) >= *e)
    }

    /// other / self when self | other.
    pub fn quotient_of(&self, other: &Ideal) -> Option<Ideal> {
        if !self.divides(other) {
            return None;
        }
        let factors: Vec<_> = other
            .factors
            .iter()
            .map(|&(p, e)| (p, e - self.exponent(&p)))
            .filter(|&(_, e)| e > 0)
            .collect();
        let norm = other.norm / self.norm;
        Some(Ideal { factors, norm })
    }

    /// The part of the ideal made of primes in `set`, and the rest.
    pub fn split_by(&self, set: &BTreeSet<PrimeIdeal>) -> (Ideal, Ideal) {
        let (inside, outside): (Vec<_>, Vec<_>) =
            self.factors.iter().partition(|(p, _)| set.contains(p));
        let mk = |factors: Vec<(PrimeIdeal, u32)>| {
            let norm = norm_of(&factors).expect("part of an ideal");
            Ideal { factors, norm }
        };
        (mk(inside), mk(outside))
    }

    /// The part above the rational prime p.
    pub fn p_part(&self, p: u64) -> Ideal {
        let factors: Vec<_> = self.factors.iter().copied().filter(|(q, _)| q.p == p).collect();
        let norm = norm_of(&factors).expect("part of an ideal");
        Ideal { factors, norm }
    }

    /// All τ divisors, refusing when τ exceeds `cap`.
    pub fn divisors_capped(&self, cap: u64) -> Result<Vec<Ideal>> {
        let tau = self.tau();
        if tau > cap {
            return Err(Error::CapExceeded { tau, cap });
        }
        let mut out = vec![Ideal::unit()];
        for &(p, e) in &self.factors {
            let len = out.len();
            let pn = p.norm();
            for k in 1..=e {
                let pk = pn.pow(k);
                for i in 0..len {
                    let mut factors = out[i].factors.clone();
                    factors.push((p, k));
                    let norm = out[i].norm * pk;
                    out.push(Ideal { factors, norm });
                }
            }
        }
        Ok(out)
    }

    pub fn divisors(&self) -> Result<Vec<Ideal>> {
        self.divisors_capped(DEFAULT_DIVISOR_CAP)
    }

    /// Squarefree divisors with their Möbius values, without the cap (2^ω).
    pub fn squarefree_divisors(&self) -> Vec<(Ideal, i8)> {
        self.rad()
            .divisors_capped(u64::MAX)
            .expect("no cap")
            .into_iter()
            .map(|d| {
                let m = d.mu();
                (d, m)
            })
            .collect()
    }
}

impl fmt::Display for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("(1)");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|(p, e)| if *e == 1 { p.to_string() } else { format!("{p}^{e}") })
            .collect();
        f.write_str(&parts.join("*"))
    }
}

/// r_𝒮(𝔞) and r_∖𝒮(𝔞).
pub fn split_s(a: &Ideal, s: &BTreeSet<PrimeIdeal>) -> (Ideal, Ideal) {
    a.split_by(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pr(p: u64, r: u64) -> PrimeIdeal {
        PrimeIdeal { p, tag: RootTag::Root(r), residue_degree: 1, ramification: 1 }
    }

    #[test]
    fn unit_and_prime_powers() {
        let one = Ideal::unit();
        assert_eq!((one.norm(), one.tau(), one.omega(), one.mu()), (1, 1, 0, 1));
        assert_eq!(one.rad(), one);
        let p = pr(5, 2);
        let p2 = Ideal::prime_power(p, 2).unwrap();
        assert_eq!((p2.tau(), p2.mu(), p2.norm()), (3, 0, 25));
        assert_eq!(p2.rad(), Ideal::prime(p));
        let pq = Ideal::from_factors(vec![(pr(7, 3), 1), (p, 1)]).unwrap();
        assert_eq!((pq.tau(), pq.omega(), pq.mu()), (4, 2, 1));
        assert_eq!(pq.factors()[0].0, p);
    }

    #[test]
    fn splitting() {
        let (p, q) = (pr(5, 2), pr(7, 3));
        let a = Ideal::from_factors(vec![(p, 2), (q, 1)]).unwrap();
        let empty = BTreeSet::new();
        assert_eq!(split_s(&a, &empty), (Ideal::unit(), a.clone()));
        let all: BTreeSet<_> = [p, q, pr(11, 1)].into_iter().collect();
        assert_eq!(split_s(&a, &all), (a.clone(), Ideal::unit()));
        let just_p: BTreeSet<_> = [p].into_iter().collect();
        assert_eq!(
            split_s(&a, &just_p),
            (Ideal::prime_power(p, 2).unwrap(), Ideal::prime(q))
        );
    }

    #[test]
    fn divisor_enumeration() {
        let (p, q) = (pr(5, 2), pr(7, 3));
        assert_eq!(Ideal::unit().divisors().unwrap(), vec![Ideal::unit()]);
        let p2 = Ideal::prime_power(p, 2).unwrap();
        let mut d = p2.divisors().unwrap();
        d.sort();
        let mut want = vec![Ideal::unit(), Ideal::prime(p), p2.clone()];
        want.sort();
        assert_eq!(d, want);
        let pq = Ideal::from_factors(vec![(p, 1), (q, 1)]).unwrap();
        assert_eq!(pq.divisors().unwrap().len(), 4);
        let big = Ideal::from_factors((0..17).map(|i| (pr(2, i), 1)).collect()).unwrap();
        assert!(matches!(big.divisors(), Err(Error::CapExceeded { tau: 131072, .. })));
        for div in pq.divisors().unwrap() {
            assert!(div.divides(&pq));
            let rest = div.quotient_of(&pq).unwrap();
            assert_eq!(div.mul(&rest).unwrap(), pq);
        }
    }
}
