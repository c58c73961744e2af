//! The ideal sequence attached to a form, region and coset, its density
//! model, and checks of the sieve postulates on it.

mod checks;
mod density;

use std::collections::{BTreeMap, HashMap};

use crate::cubic_form::BinaryCubicForm;
use crate::error::{Error, Result};
use crate::factor_sieve::sieve_grid;
use crate::ideal_arith::{CubicField, Ideal, PrimeIdeal};
use crate::region_lattice::{ConvexRegion, LatticeCoset};

pub use checks::{
    bilinear_d, check_postulates_123, measure_bilinear, measure_crude, measure_square, measure_type1,
    postulate_report, remainder_law, write_report, Branch, BranchRecord, PostulateReport, RemainderLaw,
    ReportRow,
};
pub use density::{ideal_lattice, prime_power_lattice, Density, DensityModel};

/// Fraction of points allowed in quarantine before the pair is rejected.
pub const QUARANTINE_LIMIT: f64 = 0.01;

/// Counts a_𝔞 of coprime points (x, y) of S ∩ L with (x − yθ) = 𝔞.
#[derive(Clone, Debug)]
pub struct SequenceAF {
    pub support: BTreeMap<Ideal, u64>,
    pub n: u128,
    pub d0: u64,
    pub d1: u64,
    /// Points whose value has a prime that may divide the index.
    pub quarantine: Vec<(i64, i64)>,
    pub points: u64,
    pub field: CubicField,
    pub region: ConvexRegion,
    pub coset: LatticeCoset,
}

pub fn build_sequence(
    field: &CubicField,
    form: &BinaryCubicForm,
    s: &ConvexRegion,
    l: &LatticeCoset,
    threads: usize,
) -> Result<SequenceAF> {
    if !form.is_monic() || form != field.form() {
        return Err(Error::Invalid(format!("{form} is not the monic form of the field")));
    }
    let table = sieve_grid(form, s, l, true, threads)?;
    let mut support = BTreeMap::new();
    let mut quarantine = Vec::new();
    let mut n: u128 = 0;
    let mut points = 0u64;
    for ((&(x, y), &v), fac) in table.points.iter().zip(&table.values).zip(&table.factorizations) {
        if v == 0 {
            continue;
        }
        points += 1;
        match field.ideal_from_factorization(x, y, fac) {
            Ok(ideal) => {
                n = n.max(v.unsigned_abs());
                *support.entry(ideal).or_insert(0) += 1;
            }
            Err(Error::Unsupported(_)) => quarantine.push((x, y)),
            Err(e) => return Err(e),
        }
    }
    if quarantine.len() as f64 > QUARANTINE_LIMIT * points as f64 {
        return Err(Error::Unsupported(format!(
            "{} of {points} points involve primes that may divide the index",
            quarantine.len()
        )));
    }
    Ok(SequenceAF {
        support,
        n,
        d0: field.compute_d0(),
        d1: l.index(),
        quarantine,
        points,
        field: field.clone(),
        region: s.clone(),
        coset: l.clone(),
    })
}

impl SequenceAF {
    /// A(t) = Σ_{N𝔞 ≤ t} a_𝔞.
    pub fn a_total(&self, t: u128) -> u64 {
        self.support.iter().filter(|(i, _)| i.norm() <= t).map(|(_, &c)| c).sum()
    }

    /// A_𝔡(t) = Σ_{𝔡 | 𝔞, N𝔞 ≤ t} a_𝔞.
    pub fn a_divisible(&self, d: &Ideal, t: u128) -> u64 {
        self.support
            .iter()
            .filter(|(i, _)| i.norm() <= t && d.divides(i))
            .map(|(_, &c)| c)
            .sum()
    }

    /// A_𝔡(n) for every 𝔡 with N𝔡 ≤ limit dividing some support ideal.
    pub fn divisor_counts(&self, limit: u128) -> Result<HashMap<Ideal, u64>> {
        let mut out = HashMap::new();
        for (ideal, &c) in &self.support {
            for d in ideal.divisors()? {
                if d.norm() <= limit {
                    *out.entry(d).or_insert(0) += c;
                }
            }
        }
        Ok(out)
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }
}

/// r_𝔡 = A_𝔡(n) − g(𝔡)·A(n).
pub fn remainder(seq: &SequenceAF, model: &DensityModel, d: &Ideal) -> Result<f64> {
    let ad = seq.a_divisible(d, seq.n) as f64;
    let g = model.g(d)?;
    Ok(ad - density_f64(g) * seq.a_total(seq.n) as f64)
}

pub(crate) fn density_f64(g: Density) -> f64 {
    *g.numer() as f64 / *g.denom() as f64
}

/// Every ideal of norm ≤ limit built from `primes` (which must be sorted).
pub fn ideals_up_to(primes: &[PrimeIdeal], limit: u128) -> Vec<Ideal> {
    fn walk(primes: &[PrimeIdeal], start: usize, cur: &mut Vec<(PrimeIdeal, u32)>, norm: u128, limit: u128, out: &mut Vec<Ideal>) {
        out.push(Ideal::from_factors(cur.clone()).expect("norm below limit"));
        for i in start..primes.len() {
            let q = primes[i];
            let qn = q.norm();
            if norm.saturating_mul(qn) > limit {
                continue;
            }
            let mut m = norm;
            let mut e = 0;
            while m.saturating_mul(qn) <= limit {
                m *= qn;
                e += 1;
                cur.push((q, e));
                walk(primes, i + 1, cur, m, limit, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(primes, 0, &mut Vec::new(), 1, limit, &mut out);
    out
}
