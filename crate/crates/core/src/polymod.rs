//! Low-degree polynomials over F_p: root finding and the factorization
//! pattern of a cubic, used both by the grid sieve and by the Dedekind
//! factorization of rational primes.

use crate::arith::{mul_mod, pow_mod};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Below this bound roots are found by evaluating at every residue.
pub const BRUTE_FORCE_LIMIT: u64 = 1 << 16;

/// Coefficients low to high, reduced mod p, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMod {
    pub p: u64,
    pub c: Vec<u64>,
}

impl PolyMod {
    pub fn new(coeffs: &[i128], p: u64) -> Self {
        let c = coeffs.iter().map(|&a| a.rem_euclid(p as i128) as u64).collect();
        let mut out = PolyMod { p, c };
        out.trim();
        out
    }

    fn from_vec(c: Vec<u64>, p: u64) -> Self {
        let mut out = PolyMod { p, c };
        out.trim();
        out
    }

    fn trim(&mut self) {
        while self.c.last() == Some(&0) {
            self.c.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn eval(&self, t: u64) -> u64 {
        let mut acc = 0u64;
        for &a in self.c.iter().rev() {
            acc = (mul_mod(acc, t, self.p) + a) % self.p;
        }
        acc
    }

    fn monic(&self) -> Self {
        let lead = *self.c.last().expect("monic of zero polynomial");
        let inv = pow_mod(lead, self.p - 2, self.p);
        PolyMod::from_vec(self.c.iter().map(|&a| mul_mod(a, inv, self.p)).collect(), self.p)
    }

    fn sub(&self, other: &Self) -> Self {
        let n = self.c.len().max(other.c.len());
        let p = self.p;
        let c = (0..n)
            .map(|i| {
                let a = self.c.get(i).copied().unwrap_or(0);
                let b = other.c.get(i).copied().unwrap_or(0);
                (a + p - b) % p
            })
            .collect();
        PolyMod::from_vec(c, p)
    }

    fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return PolyMod::from_vec(vec![], self.p);
        }
        let mut c = vec![0u64; self.c.len() + other.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            for (j, &b) in other.c.iter().enumerate() {
                c[i + j] = (c[i + j] + mul_mod(a, b, self.p)) % self.p;
            }
        }
        PolyMod::from_vec(c, self.p)
    }

    /// Euclidean division by a nonzero divisor.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let p = self.p;
        let dd = d.degree().expect("division by zero polynomial");
        let inv = pow_mod(d.c[dd], p - 2, p);
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (PolyMod::from_vec(vec![], p), self.clone());
        }
        let mut q = vec![0u64; r.len() - dd];
        for i in (dd..r.len()).rev() {
            let coef = mul_mod(r[i], inv, p);
            q[i - dd] = coef;
            if coef != 0 {
                for j in 0..=dd {
                    let sub = mul_mod(coef, d.c[j], p);
                    r[i - dd + j] = (r[i - dd + j] + p - sub) % p;
                }
            }
        }
        r.truncate(dd);
        (PolyMod::from_vec(q, p), PolyMod::from_vec(r, p))
    }

    fn rem(&self, d: &Self) -> Self {
        self.div_rem(d).1
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }

    /// base^e mod `modulus`.
    fn pow_rem(base: &Self, mut e: u64, modulus: &Self) -> Self {
        let p = base.p;
        let mut acc = PolyMod::from_vec(vec![1], p);
        let mut b = base.rem(modulus);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b).rem(modulus);
            }
            b = b.mul(&b).rem(modulus);
            e >>= 1;
        }
        acc
    }

    /// Distinct roots in F_p, sorted. The zero polynomial has every residue
    /// as a root; callers handle that case before asking.
    pub fn roots(&self) -> Vec<u64> {
        assert!(!self.is_zero(), "roots of the zero polynomial");
        let p = self.p;
        let mut roots = if p < BRUTE_FORCE_LIMIT {
            (0..p).filter(|&t| self.eval(t) == 0).collect()
        } else {
            self.roots_cantor_zassenhaus()
        };
        roots.sort_unstable();
        roots.dedup();
        roots
    }

    fn roots_cantor_zassenhaus(&self) -> Vec<u64> {
        let p = self.p;
        if self.degree() == Some(0) {
            return Vec::new();
        }
        let x = PolyMod::from_vec(vec![0, 1], p);
        let monic = self.monic();
        // product of the distinct linear factors
        let xp = PolyMod::pow_rem(&x, p, &monic);
        let mut split = monic.gcd(&xp.sub(&x));
        let mut roots = Vec::new();
        if split.degree().unwrap_or(0) == 0 {
            return roots;
        }
        if split.eval(0) == 0 {
            roots.push(0);
            split = split.div_rem(&x).0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(p);
        let mut stack = vec![split];
        while let Some(g) = stack.pop() {
            match g.degree() {
                None | Some(0) => {}
                Some(1) => {
                    let g = g.monic();
                    roots.push((p - g.c[0]) % p);
                }
                Some(_) => loop {
                    let delta = rng.gen_range(0..p);
                    let shifted = PolyMod::from_vec(vec![delta, 1], p);
                    let h = PolyMod::pow_rem(&shifted, (p - 1) / 2, &g)
                        .sub(&PolyMod::from_vec(vec![1], p));
                    let d = g.gcd(&h);
                    let dd = d.degree().unwrap_or(0);
                    if dd > 0 && Some(dd) < g.degree() {
                        let other = g.div_rem(&d).0;
                        stack.push(d);
                        stack.push(other);
                        break;
                    }
                },
            }
        }
        roots
    }
}

/// One irreducible factor of a polynomial mod p together with its multiplicity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalFactor {
    /// `Some(r)` for the linear factor (t − r); `None` for the unique
    /// irreducible factor of degree ≥ 2.
    pub root: Option<u64>,
    pub degree: u32,
    pub multiplicity: u32,
    pub poly: PolyMod,
}

/// Factorization pattern of a polynomial of degree ≤ 3 that stays of the
/// same degree mod p. The non-linear part left after removing every root is
/// irreducible because its degree is at most 3 and it has no roots.
pub fn factor_low_degree(poly: &PolyMod) -> Vec<LocalFactor> {
    let p = poly.p;
    let mut rest = poly.monic();
    let mut out = Vec::new();
    for r in poly.roots() {
        let lin = PolyMod::from_vec(vec![(p - r) % p, 1], p);
        let mut mult = 0;
        loop {
            let (q, rem) = rest.div_rem(&lin);
            if !rem.is_zero() {
                break;
            }
            rest = q;
            mult += 1;
        }
        out.push(LocalFactor { root: Some(r), degree: 1, multiplicity: mult, poly: lin });
    }
    if let Some(d) = rest.degree() {
        if d >= 1 {
            debug_assert!(d <= 3);
            // degree 2 or 3 without roots; a square of a linear would have a root
            out.push(LocalFactor { root: None, degree: d as u32, multiplicity: 1, poly: rest });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_t3_plus_2() {
        // 2³ + 2 = 10 ≡ 0 mod 5
        assert_eq!(PolyMod::new(&[2, 0, 0, 1], 5).roots(), vec![2]);
        // 1 + 2 ≡ 0 mod 3, triple root
        assert_eq!(PolyMod::new(&[2, 0, 0, 1], 3).roots(), vec![1]);
        let roots31 = PolyMod::new(&[2, 0, 0, 1], 31).roots();
        let brute: Vec<u64> = (0..31).filter(|t| (t * t * t + 2) % 31 == 0).collect();
        assert_eq!(roots31, brute);
    }

    #[test]
    fn cantor_zassenhaus_agrees_with_brute_force() {
        for &p in &[65_537u64, 65_539, 65_543, 70_001, 1_000_003] {
            for coeffs in [[2i128, 0, 0, 1], [1, -3, 0, 1], [8, -2, 1, 1], [-6, 11, -6, 1]] {
                let poly = PolyMod::new(&coeffs, p);
                let fast = poly.roots_cantor_zassenhaus();
                let mut fast = fast;
                fast.sort_unstable();
                let brute: Vec<u64> = (0..p).filter(|&t| poly.eval(t) == 0).collect();
                assert_eq!(fast, brute, "p = {p}, coeffs = {coeffs:?}");
            }
        }
    }

    #[test]
    fn factor_patterns() {
        let f5 = factor_low_degree(&PolyMod::new(&[2, 0, 0, 1], 5));
        assert_eq!(f5.len(), 2);
        assert_eq!((f5[0].root, f5[0].multiplicity), (Some(2), 1));
        assert_eq!((f5[1].root, f5[1].degree), (None, 2));

        let f3 = factor_low_degree(&PolyMod::new(&[2, 0, 0, 1], 3));
        assert_eq!(f3.len(), 1);
        assert_eq!((f3[0].root, f3[0].multiplicity), (Some(1), 3));

        // (t-1)(t-2)(t-3) splits completely
        let f7 = factor_low_degree(&PolyMod::new(&[-6, 11, -6, 1], 7));
        assert_eq!(f7.iter().map(|f| f.root).collect::<Vec<_>>(), vec![Some(1), Some(2), Some(3)]);
    }
}
