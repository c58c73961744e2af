//! A Vaughan-type decomposition of an arbitrary function on ideals into
//! seven windowed divisor sums, with the divisor-window flip and pairing
//! bounds used alongside it.

use std::collections::BTreeSet;
use std::ops::{Add, Neg, Sub};

use crate::arith::cmp_products;
use crate::cut::Cut;
use crate::error::{Error, Result};
use crate::ideal_arith::{Ideal, PrimeIdeal};

/// Values h may take: exact integers or reals.
pub trait Number: Copy + Default + PartialEq + Add<Output = Self> + Sub<Output = Self> + Neg<Output = Self> {
    /// Equality up to the tolerance appropriate for the type.
    fn agrees(self, other: Self) -> bool;
}

impl Number for i64 {
    fn agrees(self, other: Self) -> bool {
        self == other
    }
}

impl Number for i128 {
    fn agrees(self, other: Self) -> bool {
        self == other
    }
}

impl Number for f64 {
    fn agrees(self, other: Self) -> bool {
        let scale = self.abs().max(other.abs()).max(1.0);
        (self - other).abs() <= 1e-9 * scale
    }
}

fn signed<T: Number>(v: T, mu: i8) -> T {
    match mu {
        1 => v,
        -1 => -v,
        _ => T::default(),
    }
}

/// The z, y, u, w of the default schedule at scale x.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Schedule {
    pub z: f64,
    pub y: f64,
    pub u: f64,
    pub w: f64,
}

/// z = exp(lnln x · (lnlnln x)^{ε/2}), y = x^{1/3} z^{-2}, u = x^{1/3} z,
/// w = x^{1/2} z^{-1}. Defined for x > e^e.
pub fn default_schedule(x: f64, epsilon: f64) -> Result<Schedule> {
    if !(epsilon > 0.0) {
        return Err(Error::Invalid("epsilon must be positive".into()));
    }
    if !(x > std::f64::consts::E.powf(std::f64::consts::E)) || !x.is_finite() {
        return Err(Error::Invalid(format!("parameter schedule undefined at x = {x} (needs x > e^e)")));
    }
    let ll = x.ln().ln();
    let z = (ll * ll.ln().powf(epsilon / 2.0)).exp();
    let c = x.cbrt();
    Ok(Schedule { z, y: c / (z * z), u: c * z, w: x.sqrt() / z })
}

#[derive(Clone, Debug, PartialEq)]
pub struct VaughanParams {
    pub y: Cut,
    pub u: Cut,
    pub w: Cut,
    pub q: BTreeSet<PrimeIdeal>,
    pub x_scale: Option<f64>,
    pub epsilon: Option<f64>,
    pub z: Option<f64>,
}

impl VaughanParams {
    pub fn new(y: Cut, u: Cut, w: Cut, q: BTreeSet<PrimeIdeal>) -> Result<Self> {
        if y.cmp_cut(&u).is_gt() || u.cmp_cut(&w).is_gt() {
            return Err(Error::Invalid(format!("cut points must satisfy y ≤ u ≤ w (got {y}, {u}, {w})")));
        }
        Ok(VaughanParams { y, u, w, q, x_scale: None, epsilon: None, z: None })
    }
}

/// Parameters from the default schedule; fails where y ≤ u ≤ w does not hold.
pub fn default_params(x: f64, epsilon: f64, q: BTreeSet<PrimeIdeal>) -> Result<VaughanParams> {
    let s = default_schedule(x, epsilon)?;
    let mut p = VaughanParams::new(Cut::from_f64(s.y)?, Cut::from_f64(s.u)?, Cut::from_f64(s.w)?, q)?;
    p.x_scale = Some(x);
    p.epsilon = Some(epsilon);
    p.z = Some(s.z);
    Ok(p)
}

fn q_part(a: &Ideal, q: &BTreeSet<PrimeIdeal>) -> Ideal {
    a.split_by(q).0
}

/// Pairs (𝔟, 𝔠) with 𝔟𝔠 | 𝔞 and r_Q(𝔟) = r_Q(𝔞).
pub fn sum_star_pairs(a: &Ideal, q: &BTreeSet<PrimeIdeal>) -> Result<Vec<(Ideal, Ideal)>> {
    let target = q_part(a, q);
    let mut out = Vec::new();
    for b in a.divisors()? {
        if q_part(&b, q) != target {
            continue;
        }
        let rest = b.quotient_of(a).expect("b divides a");
        for c in rest.divisors()? {
            out.push((b.clone(), c));
        }
    }
    Ok(out)
}

/// The seven window sums of one ideal, with the two grouped sums.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaTerms<T> {
    pub beta: [T; 7],
    /// Σ_* h(𝔟 > u) μ(𝔠 > u).
    pub upper: T,
    /// Σ_* h(𝔟 ≤ u) μ(𝔠 ≤ u).
    pub lower: T,
    pub h_a: T,
}

impl<T: Number> BetaTerms<T> {
    /// β₁ + β₂ + β₃ + β₄ − β₅ − β₆ − β₇.
    pub fn combination(&self) -> T {
        let b = &self.beta;
        b[0] + b[1] + b[2] + b[3] - b[4] - b[5] - b[6]
    }

    pub fn identity_holds(&self) -> bool {
        self.combination().agrees(self.h_a)
    }

    pub fn grouping_holds(&self) -> bool {
        let b = &self.beta;
        (b[1] + b[2] + b[3]).agrees(self.upper) && (b[4] + b[5] + b[6]).agrees(self.lower)
    }
}

/// Norms and Möbius values of the squarefree divisors of an ideal.
fn squarefree_norms(a: &Ideal) -> Vec<(u128, i8)> {
    let mut out = vec![(1u128, 1i8)];
    for p in a.primes() {
        let n = p.norm();
        let len = out.len();
        for i in 0..len {
            let (m, s) = out[i];
            out.push((m * n, -s));
        }
    }
    out
}

/// All seven terms in one pass. Pairs with μ(𝔠) = 0 contribute to no term,
/// so only squarefree 𝔠 are visited.
pub fn compute_betas<T: Number>(a: &Ideal, h: impl Fn(&Ideal) -> T, p: &VaughanParams) -> Result<BetaTerms<T>> {
    let (y, u, w) = (&p.y, &p.u, &p.w);
    let target = q_part(a, &p.q);
    let mut beta = [T::default(); 7];
    let mut upper = T::default();
    let mut lower = T::default();
    let h_a = h(a);
    if u.admits(a.norm()) {
        beta[0] = h_a;
    }
    for b in a.divisors()? {
        if q_part(&b, &p.q) != target {
            continue;
        }
        let hb = h(&b);
        let nb = b.norm();
        let rest = b.quotient_of(a).expect("b divides a");
        let b_le_y = y.admits(nb);
        let b_le_u = u.admits(nb);
        let b_le_w = w.admits(nb);
        for (nc, mu) in squarefree_norms(&rest) {
            let t = signed(hb, mu);
            let c_le_y = y.admits(nc);
            let c_le_u = u.admits(nc);
            let c_le_w = w.admits(nc);
            if c_le_u {
                beta[0] = beta[0] + t;
            }
            if !b_le_u && b_le_w && !c_le_u {
                beta[1] = beta[1] + t;
            }
            if !b_le_w && !c_le_u && c_le_w {
                beta[2] = beta[2] + t;
            }
            if !b_le_w && !c_le_w {
                beta[3] = beta[3] + t;
            }
            if b_le_u && c_le_y {
                beta[4] = beta[4] + t;
            }
            if b_le_y && !c_le_y && c_le_u {
                beta[5] = beta[5] + t;
            }
            if !b_le_y && b_le_u && !c_le_y && c_le_u {
                beta[6] = beta[6] + t;
            }
            if !b_le_u && !c_le_u {
                upper = upper + t;
            }
            if b_le_u && c_le_u {
                lower = lower + t;
            }
        }
    }
    Ok(BetaTerms { beta, upper, lower, h_a })
}

/// β_j for j in 1..=7.
pub fn beta<T: Number>(j: usize, a: &Ideal, h: impl Fn(&Ideal) -> T, p: &VaughanParams) -> Result<T> {
    if !(1..=7).contains(&j) {
        return Err(Error::Invalid(format!("beta index {j} outside 1..=7")));
    }
    Ok(compute_betas(a, h, p)?.beta[j - 1])
}

pub fn verify_identity<T: Number>(a: &Ideal, h: impl Fn(&Ideal) -> T, p: &VaughanParams) -> Result<bool> {
    Ok(compute_betas(a, h, p)?.identity_holds())
}

/// Both sides of the divisor-window flip for one ideal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlipRecord {
    /// Σ_{𝔠|𝔢} μ(𝔠) over N𝔠 > u.
    pub lhs: i64,
    /// μ(rad 𝔢) Σ_{𝔠|𝔢} μ(𝔠) over N𝔠 < N(rad 𝔢)/u.
    pub rhs: i64,
    /// Σ_{𝔠|𝔢} μ(𝔠), which vanishes for 𝔢 ≠ (1).
    pub mobius_sum: i64,
}

impl FlipRecord {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs && self.mobius_sum == 0
    }
}

pub fn window_flip(e: &Ideal, u: &Cut) -> Result<FlipRecord> {
    if e.is_unit() {
        return Err(Error::Invalid("window flip needs a non-unit ideal".into()));
    }
    let rad = e.rad().norm();
    let mut lhs = 0i64;
    let mut rhs = 0i64;
    let mut total = 0i64;
    for (nc, mu) in squarefree_norms(e) {
        total += mu as i64;
        if u.below(nc) {
            lhs += mu as i64;
        }
        let small = match *u {
            Cut::Infinite => false,
            Cut::Finite { num, den } => cmp_products(nc, num, rad, den).is_lt(),
        };
        if small {
            rhs += mu as i64;
        }
    }
    Ok(FlipRecord { lhs, rhs: rhs * e.rad().mu() as i64, mobius_sum: total })
}

/// (|Σ_{𝔠|𝔢} μ(𝔠) [N𝔠 ≤ y]|, #{𝔠 | 𝔢 : y/l < N𝔠 ≤ y}); needs a prime of
/// 𝔢 with norm ≤ l.
pub fn pairing_bound(e: &Ideal, y: &Cut, l: &Cut) -> Result<(u64, u64)> {
    if !e.primes().any(|p| l.admits(p.norm())) {
        return Err(Error::Invalid(format!("{e} has no prime of norm ≤ {l}")));
    }
    let mut signed_sum = 0i64;
    for (nc, mu) in squarefree_norms(e) {
        if y.admits(nc) {
            signed_sum += mu as i64;
        }
    }
    let mut count = 0u64;
    for c in e.divisors_capped(u64::MAX)? {
        let nc = c.norm();
        if !y.admits(nc) {
            continue;
        }
        // y/l < N𝔠  ⇔  y < N𝔠·l
        let above = match (*y, *l) {
            (_, Cut::Infinite) => true,
            (Cut::Infinite, _) => false,
            (Cut::Finite { num: yn, den: yd }, Cut::Finite { num: ln, den: ld }) => {
                let lhs = nc.checked_mul(yd).ok_or_else(|| Error::Range("pairing window overflow".into()))?;
                cmp_products(yn, ld, lhs, ln).is_lt()
            }
        };
        if above {
            count += 1;
        }
    }
    Ok((signed_sum.unsigned_abs(), count))
}
