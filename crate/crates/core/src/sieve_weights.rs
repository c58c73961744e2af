//! Brun pure-sieve weights on ideals, the Buchstab-style opening of a
//! sieve, and the exact anti-sieving identity on integer pairs.

use std::collections::{BTreeMap, BTreeSet};

use crate::cut::Cut;
use crate::error::{Error, Result};
use crate::ideal_arith::{Ideal, PrimeIdeal};

/// Weights λ_𝔡 indexed by ideals.
pub trait DivisorWeights {
    fn weight(&self, d: &Ideal) -> i64;

    /// Σ_{𝔡|𝔟} λ_𝔡.
    fn sieve_value(&self, b: &Ideal) -> Result<i64>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct SieveWeights {
    weights: BTreeMap<Ideal, i64>,
    sieving_set: BTreeSet<PrimeIdeal>,
    lower_gap: Cut,
    upper_cut: Cut,
    depth: u32,
}

/// Smallest even integer ≥ 2·lnln(cut) + 2.
pub fn default_brun_depth(cut: f64) -> u32 {
    let ll = if cut > std::f64::consts::E { cut.ln().ln() } else { 0.0 };
    let t = (2.0 * ll + 2.0).ceil() as u32;
    t + t % 2
}

/// λ_𝔡 = μ(𝔡) for squarefree 𝔡 built from P with ω(𝔡) ≤ depth and
/// N𝔡 ≤ cut; λ_(1) = 1.
pub fn brun_pure_weights(p: &BTreeSet<PrimeIdeal>, cut: Cut, depth: u32) -> Result<SieveWeights> {
    if depth % 2 == 1 {
        return Err(Error::Invalid(format!("Brun depth {depth} must be even")));
    }
    let mut primes: Vec<PrimeIdeal> = p.iter().copied().collect();
    primes.sort_by_key(|q| q.norm());
    let mut weights = BTreeMap::new();
    fn extend(
        primes: &[PrimeIdeal],
        start: usize,
        chosen: &mut Vec<PrimeIdeal>,
        norm: u128,
        cut: &Cut,
        depth: u32,
        out: &mut BTreeMap<Ideal, i64>,
    ) {
        let d = Ideal::from_factors(chosen.iter().map(|&q| (q, 1)).collect()).expect("norm checked");
        let mu = if chosen.len() % 2 == 0 { 1 } else { -1 };
        out.insert(d, mu);
        if chosen.len() as u32 == depth {
            return;
        }
        for i in start..primes.len() {
            let Some(n) = norm.checked_mul(primes[i].norm()) else { break };
            if !cut.admits(n) {
                // sorted by norm, so every later prime overshoots too
                break;
            }
            chosen.push(primes[i]);
            extend(primes, i + 1, chosen, n, cut, depth, out);
            chosen.pop();
        }
    }
    extend(&primes, 0, &mut Vec::new(), 1, &cut, depth, &mut weights);
    Ok(SieveWeights { weights, sieving_set: p.clone(), lower_gap: Cut::integer(1), upper_cut: cut, depth })
}

impl SieveWeights {
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn sieving_set(&self) -> &BTreeSet<PrimeIdeal> {
        &self.sieving_set
    }

    pub fn upper_cut(&self) -> Cut {
        self.upper_cut
    }

    pub fn lower_gap(&self) -> Cut {
        self.lower_gap
    }

    /// Nonzero weights.
    pub fn support(&self) -> impl Iterator<Item = (&Ideal, i64)> {
        self.weights.iter().filter(|(_, &v)| v != 0).map(|(d, &v)| (d, v))
    }

    /// Drops every weight with 1 < N𝔡 ≤ lo or N𝔡 > hi, keeping λ_(1).
    pub fn restrict(&self, lo: Cut, hi: Cut) -> SieveWeights {
        let weights = self
            .weights
            .iter()
            .filter(|(d, _)| d.is_unit() || (lo.below(d.norm()) && hi.admits(d.norm())))
            .map(|(d, &v)| (d.clone(), v))
            .collect();
        SieveWeights { weights, sieving_set: self.sieving_set.clone(), lower_gap: lo, upper_cut: hi, depth: self.depth }
    }

    /// Overwrites one weight; used to check that corrupted weights are caught.
    pub fn set_weight(&mut self, d: Ideal, v: i64) {
        self.weights.insert(d, v);
    }

    /// Checks the declared support: λ_𝔡 = 0 unless 𝔡 = (1) or 𝔡 is a
    /// squarefree product of sieving primes with lower_gap < N𝔡 ≤ upper_cut.
    pub fn check_support(&self) -> Result<()> {
        for (d, _) in self.support() {
            if d.is_unit() {
                continue;
            }
            let inside = d.is_squarefree()
                && d.primes().all(|q| self.sieving_set.contains(&q))
                && self.lower_gap.below(d.norm())
                && self.upper_cut.admits(d.norm());
            if !inside {
                return Err(Error::Invalid(format!("weight at {d} lies outside the declared support")));
            }
        }
        Ok(())
    }
}

impl DivisorWeights for SieveWeights {
    fn weight(&self, d: &Ideal) -> i64 {
        self.weights.get(d).copied().unwrap_or(0)
    }

    fn sieve_value(&self, b: &Ideal) -> Result<i64> {
        let relevant = b.split_by(&self.sieving_set).0;
        let mut total = 0;
        for d in relevant.divisors_capped(u64::MAX)? {
            total += self.weight(&d);
        }
        Ok(total)
    }
}

pub fn sieve_value(w: &impl DivisorWeights, b: &Ideal) -> Result<i64> {
    w.sieve_value(b)
}

/// (Σ_{𝔡|𝔟} λ_𝔡, Σ_{𝔡|𝔟, lo < N𝔡 ≤ hi} λ_𝔡). With λ_(1) = 1 and
/// support in (1) ∪ (lo, hi] the difference is exactly 1.
pub fn buchstab_split(w: &SieveWeights, b: &Ideal, lo: Cut, hi: Cut) -> Result<(i64, i64)> {
    if !lo.admits(1) {
        return Err(Error::Invalid("window must start at or above 1".into()));
    }
    for (d, _) in w.support() {
        if !d.is_unit() && !(lo.below(d.norm()) && hi.admits(d.norm())) {
            return Err(Error::Invalid(format!("weight at {d} (norm {}) outside ({lo}, {hi}]", d.norm())));
        }
    }
    let relevant = b.split_by(&w.sieving_set).0;
    let mut main = 0;
    let mut tail = 0;
    for d in relevant.divisors_capped(u64::MAX)? {
        let v = w.weight(&d);
        main += v;
        if lo.below(d.norm()) && hi.admits(d.norm()) {
            tail += v;
        }
    }
    Ok((main, tail))
}

/// Integer divisor weights λ_d.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntWeights {
    pub weights: BTreeMap<u64, i64>,
}

impl IntWeights {
    pub fn weight(&self, d: u64) -> i64 {
        self.weights.get(&d).copied().unwrap_or(0)
    }
}

/// Brun weights on squarefree products of `primes` with at most `depth`
/// factors and product ≤ cut.
pub fn int_brun_weights(primes: &[u64], cut: u64, depth: u32) -> Result<IntWeights> {
    if depth % 2 == 1 {
        return Err(Error::Invalid(format!("Brun depth {depth} must be even")));
    }
    let mut ps = primes.to_vec();
    ps.sort_unstable();
    ps.dedup();
    let mut weights = BTreeMap::new();
    fn extend(ps: &[u64], start: usize, d: u64, k: u32, cut: u64, depth: u32, out: &mut BTreeMap<u64, i64>) {
        out.insert(d, if k % 2 == 0 { 1 } else { -1 });
        if k == depth {
            return;
        }
        for i in start..ps.len() {
            match d.checked_mul(ps[i]) {
                Some(n) if n <= cut => extend(ps, i + 1, n, k + 1, cut, depth, out),
                _ => break,
            }
        }
    }
    extend(&ps, 0, 1, 0, cut, depth, &mut weights);
    Ok(IntWeights { weights })
}

/// The three sides of the anti-sieving identity plus the re-indexed
/// correction term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AntiSieveRecord {
    /// Σ over the window of F_{ab}.
    pub direct: i64,
    /// Σ over the window of (Σ_{d|a} λ_d) F_{ab}.
    pub sieved: i64,
    /// Σ over the window of Σ_{d|a, d > y²} λ_d F_{ab}.
    pub correction: i64,
    /// The correction with a = d·a′, b′ = d·b, summed over (a′, b′, d).
    pub correction_reindexed: i64,
}

impl AntiSieveRecord {
    pub fn holds(&self) -> bool {
        self.direct == self.sieved - self.correction && self.correction == self.correction_reindexed
    }
}

/// Checks, on the pairs (a, b) with ab ≤ x and x^α/y < a < x^α·y, that
/// Σ F_{ab} = Σ (Σ_{d|a} λ_d) F_{ab} − Σ Σ_{d|a, d>y²} λ_d F_{ab}, and the
/// re-indexed form of the last sum.
pub fn anti_sieve_split(
    f: &BTreeMap<(u64, u64), i64>,
    x: u64,
    alpha: f64,
    yfun: f64,
    w: &IntWeights,
) -> Result<AntiSieveRecord> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Invalid(format!("alpha {alpha} outside [0, 1]")));
    }
    if !(yfun >= 1.0) {
        return Err(Error::Invalid("the window parameter must be ≥ 1".into()));
    }
    let y2 = Cut::from_f64(yfun * yfun)?;
    if w.weight(1) != 1 {
        return Err(Error::Invalid("λ_1 must equal 1".into()));
    }
    for (&d, &v) in &w.weights {
        if v != 0 && d > 1 && y2.admits(d as u128) {
            return Err(Error::Invalid(format!("weight at d = {d} inside the gap (1, y²]")));
        }
    }
    let center = (x as f64).powf(alpha);
    let lo = Cut::from_f64(center / yfun)?;
    let hi = Cut::from_f64(center * yfun)?;
    let in_window = |a: u64| lo.below(a as u128) && hi.exceeds(a as u128);

    let mut direct = 0i64;
    let mut sieved = 0i64;
    let mut correction = 0i64;
    for (&(a, b), &v) in f {
        if a.checked_mul(b).map_or(true, |ab| ab > x) {
            return Err(Error::Invalid(format!("table entry ({a},{b}) has ab > x")));
        }
        if v == 0 || !in_window(a) {
            continue;
        }
        direct += v;
        for (&d, &l) in &w.weights {
            if d > a {
                break;
            }
            if a % d == 0 {
                sieved += l * v;
                if y2.below(d as u128) {
                    correction += l * v;
                }
            }
        }
    }

    // independent enumeration over (a′, b′) with a′b′ ≤ x and d | b′
    let big: Vec<(u64, i64)> = w
        .weights
        .iter()
        .filter(|(&d, &l)| l != 0 && y2.below(d as u128))
        .map(|(&d, &l)| (d, l))
        .collect();
    let mut correction_reindexed = 0i64;
    for a1 in 1..=x {
        for &(d, l) in &big {
            let Some(a) = d.checked_mul(a1) else { break };
            if !in_window(a) {
                continue;
            }
            // b′ = d·b ranges over multiples of d with a′b′ ≤ x
            let mut b1 = d;
            while a1.checked_mul(b1).map_or(false, |v| v <= x) {
                if let Some(&v) = f.get(&(a, b1 / d)) {
                    correction_reindexed += l * v;
                }
                b1 += d;
            }
        }
    }
    Ok(AntiSieveRecord { direct, sieved, correction, correction_reindexed })
}
