use rayon::prelude::*;

use super::{cofactor_resolve, Factorization, ParityValues};
use crate::arith::{exact_sqrt, icbrt_u128, is_prime_u64, mod_inv, primes_through};
use crate::cubic_form::BinaryCubicForm;
use crate::error::{Error, Result};
use crate::polymod::PolyMod;
use crate::region_lattice::{is_coprime_point, row_progression, ConvexRegion, LatticeCoset};

#[derive(Clone, Debug)]
enum Roots {
    /// p divides every coefficient, so every value.
    All,
    /// Roots r of f(t, 1); with p | y the value is ≡ a·x³.
    Some { roots: Vec<u64>, lead_zero: bool },
}

#[derive(Clone, Debug)]
struct SievePrime {
    p: u64,
    roots: Roots,
    /// Inverse of p mod 2^64 and ⌊(2^64 − 1)/p⌋ for division-free tests.
    inv: u64,
    lim: u64,
}

impl SievePrime {
    fn new(p: u64, roots: Roots) -> Self {
        let (inv, lim) = if p % 2 == 1 {
            // Newton iteration for the inverse mod 2^64
            let mut inv = p;
            for _ in 0..5 {
                inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
            }
            (inv, u64::MAX / p)
        } else {
            (0, 0)
        };
        SievePrime { p, roots, inv, lim }
    }

    /// Strips every factor p from *m and returns the exponent.
    #[inline]
    fn strip(&self, m: &mut u64) -> u32 {
        if self.p == 2 {
            let e = m.trailing_zeros();
            *m >>= e;
            return e;
        }
        let mut e = 0;
        loop {
            let q = m.wrapping_mul(self.inv);
            if q > self.lim {
                return e;
            }
            *m = q;
            e += 1;
        }
    }
}

/// Primes and roots shared by every row of a grid sieve.
#[derive(Clone, Debug)]
pub struct SievePlan {
    form: BinaryCubicForm,
    bound: u64,
    z: u64,
    primes: Vec<SievePrime>,
}

impl SievePlan {
    /// Plan for values of `form` on points with max(|x|, |y|) ≤ m.
    pub fn new(form: &BinaryCubicForm, m: u64) -> Result<Self> {
        let bound = form
            .value_bound(m)
            .and_then(|b| u64::try_from(b).ok())
            .ok_or_else(|| Error::Range(format!("values of {form} on [-{m},{m}]² exceed 64 bits")))?;
        let z = icbrt_u128(bound as u128) as u64 + 1;
        let [a, b, c, d] = form.coefficients();
        let primes = primes_through(z)
            .into_iter()
            .map(|p| {
                let poly = PolyMod::new(&[d as i128, c as i128, b as i128, a as i128], p);
                let roots = if poly.is_zero() {
                    Roots::All
                } else {
                    Roots::Some { roots: poly.roots(), lead_zero: (a as i128).rem_euclid(p as i128) == 0 }
                };
                SievePrime::new(p, roots)
            })
            .collect();
        Ok(SievePlan { form: form.clone(), bound, z, primes })
    }

    /// Plan covering every point of a region.
    pub fn for_region(form: &BinaryCubicForm, s: &ConvexRegion) -> Result<Self> {
        let m = s.half_width().ceil();
        if !(m < 2f64.powi(40)) {
            return Err(Error::Range("region too large for the sieve".into()));
        }
        SievePlan::new(form, m as u64)
    }

    /// Every prime ≤ z is sieved; z³ exceeds every value.
    pub fn z(&self) -> u64 {
        self.z
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    /// Sieves the row x = first + k·stride (k < n) at height y.
    fn sieve_row<S: FactorSink>(&self, y: i64, first: i64, stride: i64, n: usize, keep: impl Fn(i64) -> bool, sink: &mut S) -> Result<()> {
        let mut residual = vec![0u64; n];
        for (k, slot) in residual.iter_mut().enumerate() {
            let x = first + k as i64 * stride;
            if !keep(x) {
                sink.skip(k);
                continue;
            }
            let v = self.form.evaluate(x, y)?;
            let abs = u64::try_from(v.unsigned_abs())
                .map_err(|_| Error::Range(format!("f({x},{y}) exceeds 64 bits")))?;
            sink.value(k, v);
            *slot = abs;
        }
        for sp in &self.primes {
            let p = sp.p as i64;
            let yp = y.rem_euclid(p);
            let sp_stride = stride.rem_euclid(p);
            let first_p = first.rem_euclid(p);
            let hit_class = |target: i64, residual: &mut [u64], sink: &mut S| {
                if sp_stride == 0 {
                    if first_p == target {
                        for k in 0..n {
                            hit(sp, k, residual, sink);
                        }
                    }
                    return;
                }
                let inv = mod_inv(sp_stride as i128, p as i128).expect("p prime") as i64;
                let k0 = (((target - first_p).rem_euclid(p) as i128 * inv as i128) % p as i128) as usize;
                let mut k = k0;
                while k < n {
                    hit(sp, k, residual, sink);
                    k += p as usize;
                }
            };
            match &sp.roots {
                Roots::All => {
                    for k in 0..n {
                        hit(sp, k, &mut residual, sink);
                    }
                }
                Roots::Some { roots, lead_zero } => {
                    if yp == 0 {
                        if *lead_zero {
                            for k in 0..n {
                                hit(sp, k, &mut residual, sink);
                            }
                        } else {
                            hit_class(0, &mut residual, sink);
                        }
                    } else {
                        for &r in roots {
                            let target = ((r as i128 * yp as i128) % p as i128) as i64;
                            hit_class(target, &mut residual, sink);
                        }
                    }
                }
            }
        }
        for (k, &m) in residual.iter().enumerate() {
            if m > 1 {
                sink.cofactor(k, m, self.z)?;
            }
        }
        Ok(())
    }
}

#[inline]
fn hit<S: FactorSink>(sp: &SievePrime, k: usize, residual: &mut [u64], sink: &mut S) {
    let m = &mut residual[k];
    if *m == 0 {
        return;
    }
    let e = sp.strip(m);
    if e > 0 {
        sink.prime(k, sp.p, e);
    }
}

/// Receives the sieve's findings for one row.
trait FactorSink {
    fn skip(&mut self, k: usize);
    fn value(&mut self, k: usize, v: i128);
    fn prime(&mut self, k: usize, p: u64, e: u32);
    fn cofactor(&mut self, k: usize, m: u64, z: u64) -> Result<()>;
}

struct FullSink {
    values: Vec<i128>,
    factors: Vec<Vec<(u64, u32)>>,
    kept: Vec<bool>,
}

impl FactorSink for FullSink {
    fn skip(&mut self, _k: usize) {}

    fn value(&mut self, k: usize, v: i128) {
        self.values[k] = v;
        self.kept[k] = true;
    }

    fn prime(&mut self, k: usize, p: u64, e: u32) {
        self.factors[k].push((p, e));
    }

    fn cofactor(&mut self, k: usize, m: u64, z: u64) -> Result<()> {
        self.factors[k].extend(cofactor_resolve(m, z)?);
        Ok(())
    }
}

#[derive(Clone, Copy, Default)]
struct Tally {
    omega: u8,
    big_omega: u8,
    square: bool,
    kept: bool,
    zero: bool,
}

struct TallySink {
    tallies: Vec<Tally>,
}

impl FactorSink for TallySink {
    fn skip(&mut self, _k: usize) {}

    fn value(&mut self, k: usize, v: i128) {
        self.tallies[k].kept = true;
        self.tallies[k].zero = v == 0;
    }

    fn prime(&mut self, k: usize, _p: u64, e: u32) {
        let t = &mut self.tallies[k];
        t.omega += 1;
        t.big_omega += e as u8;
        t.square |= e >= 2;
    }

    fn cofactor(&mut self, k: usize, m: u64, z: u64) -> Result<()> {
        let t = &mut self.tallies[k];
        // every prime factor of m exceeds z and m < z³
        if (m as u128) <= (z as u128) * (z as u128) || is_prime_u64(m) {
            t.omega += 1;
            t.big_omega += 1;
        } else if exact_sqrt(m).is_some() {
            t.omega += 1;
            t.big_omega += 2;
            t.square = true;
        } else {
            t.omega += 2;
            t.big_omega += 2;
        }
        Ok(())
    }
}

/// Points of S ∩ L with their form values and complete factorizations, in
/// row-major order (increasing y, then x).
#[derive(Clone, Debug, PartialEq)]
pub struct GridTable {
    pub points: Vec<(i64, i64)>,
    pub values: Vec<i128>,
    pub factorizations: Vec<Factorization>,
    pub z: u64,
}

impl GridTable {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, x: i64, y: i64) -> Option<&Factorization> {
        self.points
            .binary_search_by(|&(px, py)| (py, px).cmp(&(y, x)))
            .ok()
            .map(|i| &self.factorizations[i])
    }

    pub fn parities(&self) -> impl Iterator<Item = ParityValues> + '_ {
        self.factorizations.iter().map(|f| f.parity())
    }
}

fn rows_of(s: &ConvexRegion, l: &LatticeCoset) -> Vec<(i64, i64, i64, usize)> {
    let Some((y0, y1)) = s.y_range() else { return Vec::new() };
    (y0..=y1)
        .filter_map(|y| row_progression(s, l, y).map(|(first, stride, n)| (y, first, stride, n as usize)))
        .collect()
}

fn with_pool<T: Send>(threads: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    Ok(pool.install(job))
}

/// Complete factorizations of f at every point of S ∩ L (only the points
/// with gcd(x, y) = 1 when `coprime_only`).
pub fn sieve_grid(
    f: &BinaryCubicForm,
    s: &ConvexRegion,
    l: &LatticeCoset,
    coprime_only: bool,
    threads: usize,
) -> Result<GridTable> {
    let plan = SievePlan::for_region(f, s)?;
    let rows = rows_of(s, l);
    let per_row = with_pool(threads, || {
        rows.par_iter()
            .map(|&(y, first, stride, n)| {
                let mut sink = FullSink {
                    values: vec![0; n],
                    factors: vec![Vec::new(); n],
                    kept: vec![false; n],
                };
                let keep = |x: i64| !coprime_only || is_coprime_point(x, y);
                plan.sieve_row(y, first, stride, n, keep, &mut sink)?;
                let mut out = Vec::with_capacity(n);
                for k in 0..n {
                    if !sink.kept[k] {
                        continue;
                    }
                    let v = sink.values[k];
                    let fac = if v == 0 {
                        Factorization::zero()
                    } else {
                        let fac = Factorization {
                            factors: std::mem::take(&mut sink.factors[k]),
                            sign: if v < 0 { -1 } else { 1 },
                            complete: true,
                        };
                        if fac.value() != Some(v) {
                            return Err(Error::Corruption(format!(
                                "factorization of f({},{y}) = {v} does not multiply back",
                                first + k as i64 * stride
                            )));
                        }
                        fac
                    };
                    out.push(((first + k as i64 * stride, y), v, fac));
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let mut table = GridTable { points: Vec::new(), values: Vec::new(), factorizations: Vec::new(), z: plan.z };
    for row in per_row {
        for (pt, v, fac) in row {
            table.points.push(pt);
            table.values.push(v);
            table.factorizations.push(fac);
        }
    }
    Ok(table)
}

/// Sums of μ, λ and (−1)^ω of f over a point set; zero values are
/// excluded from every sum and from `points`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct ParitySums {
    pub points: u64,
    pub zeros: u64,
    pub mu: i64,
    pub liouville: i64,
    pub omega_sign: i64,
    /// Points whose value is divisible by a square > 1.
    pub non_squarefree: u64,
}

impl ParitySums {
    pub fn get(&self, alpha: super::Alpha) -> i64 {
        match alpha {
            super::Alpha::Mu => self.mu,
            super::Alpha::Liouville => self.liouville,
            super::Alpha::OmegaSign => self.omega_sign,
        }
    }

    fn add(&mut self, o: &ParitySums) {
        self.points += o.points;
        self.zeros += o.zeros;
        self.mu += o.mu;
        self.liouville += o.liouville;
        self.omega_sign += o.omega_sign;
        self.non_squarefree += o.non_squarefree;
    }
}

/// Parity sums over S ∩ L without materializing factorizations. With
/// `per_point`, the row-major parity values are also returned.
pub fn parity_sums(
    f: &BinaryCubicForm,
    s: &ConvexRegion,
    l: &LatticeCoset,
    coprime_only: bool,
    threads: usize,
    per_point: Option<super::Alpha>,
) -> Result<(ParitySums, Vec<i8>)> {
    let plan = SievePlan::for_region(f, s)?;
    let rows = rows_of(s, l);
    let per_row = with_pool(threads, || {
        rows.par_iter()
            .map(|&(y, first, stride, n)| {
                let mut sink = TallySink { tallies: vec![Tally::default(); n] };
                let keep = |x: i64| !coprime_only || is_coprime_point(x, y);
                plan.sieve_row(y, first, stride, n, keep, &mut sink)?;
                let mut sums = ParitySums::default();
                let mut values = Vec::new();
                for t in sink.tallies.iter().filter(|t| t.kept) {
                    if t.zero {
                        sums.zeros += 1;
                        if per_point.is_some() {
                            values.push(0);
                        }
                        continue;
                    }
                    let pv = ParityValues::from_counts(t.omega as u32, t.big_omega as u32, !t.square);
                    sums.points += 1;
                    sums.mu += pv.mu as i64;
                    sums.liouville += pv.liouville as i64;
                    sums.omega_sign += pv.omega_sign as i64;
                    sums.non_squarefree += t.square as u64;
                    if let Some(a) = per_point {
                        values.push(pv.get(a));
                    }
                }
                Ok((sums, values))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let mut total = ParitySums::default();
    let mut all_values = Vec::new();
    for (sums, values) in per_row {
        total.add(&sums);
        all_values.extend(values);
    }
    Ok((total, all_values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor_sieve::Alpha;
    use proptest::prelude::*;

    fn trial(n: u64) -> Vec<(u64, u32)> {
        let mut n = n;
        let mut out = Vec::new();
        let mut p = 2;
        while p * p <= n {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            if e > 0 {
                out.push((p, e));
            }
            p += 1;
        }
        if n > 1 {
            out.push((n, 1));
        }
        out
    }

    fn x3_2y3() -> BinaryCubicForm {
        BinaryCubicForm::new(1, 0, 0, 2).unwrap()
    }

    #[test]
    fn small_box_matches_trial_division() {
        let f = x3_2y3();
        let s = ConvexRegion::boxed(1.0, 3.0, 1.0, 3.0).unwrap();
        let t = sieve_grid(&f, &s, &LatticeCoset::whole_plane(), false, 1).unwrap();
        assert_eq!(t.len(), 9);
        for (i, &(x, y)) in t.points.iter().enumerate() {
            let v = f.evaluate(x, y).unwrap();
            assert_eq!(t.factorizations[i].factors, trial(v.unsigned_abs() as u64));
        }
        assert_eq!(t.get(1, 1).unwrap().factors, vec![(3, 1)]);
    }

    #[test]
    fn empty_region_gives_empty_table() {
        let s = ConvexRegion::boxed(1.0, 0.0, 1.0, 3.0).unwrap();
        let t = sieve_grid(&x3_2y3(), &s, &LatticeCoset::whole_plane(), false, 1).unwrap();
        assert!(t.is_empty());
    }

    #[test]
    fn content_and_degenerate_leads() {
        // content 6, leading coefficient divisible by 2, y-only terms
        for coeffs in [(6, 0, 12, 18), (2, 3, 0, 5), (4, -1, 7, 0), (0, 3, -5, 2)] {
            let f = BinaryCubicForm::new(coeffs.0, coeffs.1, coeffs.2, coeffs.3).unwrap();
            let s = ConvexRegion::square(12.0);
            let t = sieve_grid(&f, &s, &LatticeCoset::whole_plane(), false, 1).unwrap();
            for (i, &(x, y)) in t.points.iter().enumerate() {
                let v = f.evaluate(x, y).unwrap();
                if v == 0 {
                    assert_eq!(t.factorizations[i], Factorization::zero());
                } else {
                    assert_eq!(t.factorizations[i].factors, trial(v.unsigned_abs() as u64), "{f} at ({x},{y})");
                }
            }
        }
    }

    #[test]
    fn coprime_only_and_cosets() {
        let f = x3_2y3();
        let s = ConvexRegion::disc(1.0, -2.0, 15.0).unwrap();
        let l: LatticeCoset = "coset:3,0,1,2;1,1".parse().unwrap();
        let t = sieve_grid(&f, &s, &l, true, 2).unwrap();
        let want: Vec<_> = crate::region_lattice::enumerate_coprime_points(&s, &l).collect();
        assert_eq!(t.points, want);
        for (i, &(x, y)) in t.points.iter().enumerate() {
            let v = f.evaluate(x, y).unwrap();
            assert_eq!(t.factorizations[i].factors, trial(v.unsigned_abs() as u64));
        }
    }

    #[test]
    fn sums_agree_with_table() {
        let f = BinaryCubicForm::new(1, -3, 0, 1).unwrap();
        let s = ConvexRegion::square(20.0);
        let z2 = LatticeCoset::whole_plane();
        let t = sieve_grid(&f, &s, &z2, false, 1).unwrap();
        let (sums, mu_values) = parity_sums(&f, &s, &z2, false, 3, Some(Alpha::Mu)).unwrap();
        let mut expect = ParitySums::default();
        let mut expect_values = Vec::new();
        for fac in &t.factorizations {
            let pv = fac.parity();
            expect_values.push(pv.mu);
            if fac.sign == 0 {
                expect.zeros += 1;
                continue;
            }
            expect.points += 1;
            expect.mu += pv.mu as i64;
            expect.liouville += pv.liouville as i64;
            expect.omega_sign += pv.omega_sign as i64;
            expect.non_squarefree += (pv.mu == 0) as u64;
        }
        assert_eq!(sums, expect);
        assert_eq!(mu_values, expect_values);
        assert_eq!(sums.zeros, 1);
    }

    #[test]
    fn value_range_is_enforced() {
        let f = BinaryCubicForm::new(i64::MAX / 4, 0, 0, 1).unwrap();
        let s = ConvexRegion::square(10.0);
        assert!(matches!(sieve_grid(&f, &s, &LatticeCoset::whole_plane(), false, 1), Err(Error::Range(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn random_forms_match_trial_division(
            a in -9i64..10, b in -9i64..10, c in -9i64..10, d in -9i64..10,
            cx in -30i64..30, cy in -30i64..30,
        ) {
            prop_assume!((a, b, c, d) != (0, 0, 0, 0));
            let f = BinaryCubicForm::new(a, b, c, d).unwrap();
            let s = ConvexRegion::boxed(cx as f64, cx as f64 + 6.0, cy as f64, cy as f64 + 6.0).unwrap();
            let t = sieve_grid(&f, &s, &LatticeCoset::whole_plane(), false, 1).unwrap();
            for (i, &(x, y)) in t.points.iter().enumerate() {
                let v = f.evaluate(x, y).unwrap();
                prop_assert_eq!(t.values[i], v);
                if v != 0 {
                    prop_assert_eq!(&t.factorizations[i].factors, &trial(v.unsigned_abs() as u64));
                }
            }
        }
    }
}
