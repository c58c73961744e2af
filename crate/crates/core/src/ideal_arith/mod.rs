//! Ideals of the cubic field attached to a monic form, kept as exact
//! prime-ideal factorizations.

mod ideal;

pub use ideal::{split_s, Ideal, PrimeIdeal, RootTag, DEFAULT_DIVISOR_CAP};

use std::collections::BTreeMap;

use crate::arith::{factorize, gcd_u64, mod_inv, primes_through};
use crate::cubic_form::BinaryCubicForm;
use crate::error::{Error, Result};
use crate::factor_sieve::{factor_integer, Factorization};
use crate::polymod::{factor_low_degree, PolyMod};

/// K = Q(θ) with θ a root of g(t, 1) for a monic irreducible form g.
#[derive(Clone, Debug)]
pub struct CubicField {
    form: BinaryCubicForm,
    /// Coefficients of t³ + b t² + c t + d, low to high.
    min_poly: [i64; 4],
    disc: i128,
    index_bound: Vec<u64>,
    cache: BTreeMap<u64, Vec<PrimeIdeal>>,
}

impl CubicField {
    /// Field of a monic irreducible form; g(x, y) = N(x − yθ).
    pub fn build(g: &BinaryCubicForm) -> Result<Self> {
        if !g.is_monic() {
            return Err(Error::Invalid(format!("form {g} is not monic; monicize it first")));
        }
        if !g.is_irreducible() {
            return Err(Error::Reducible(g.to_string()));
        }
        let [_, b, c, d] = g.coefficients();
        let disc = g.discriminant();
        let abs = u64::try_from(disc.unsigned_abs())
            .map_err(|_| Error::Range(format!("discriminant {disc} exceeds 64 bits")))?;
        let mut field = CubicField {
            form: *g,
            min_poly: [d, c, b, 1],
            disc,
            index_bound: Vec::new(),
            cache: BTreeMap::new(),
        };
        field.index_bound = factorize(abs)
            .into_iter()
            .filter(|&(p, e)| e >= 2 && field.dedekind_flags(p))
            .map(|(p, _)| p)
            .collect();
        Ok(field)
    }

    pub fn form(&self) -> &BinaryCubicForm {
        &self.form
    }

    pub fn min_poly(&self) -> [i64; 4] {
        self.min_poly
    }

    pub fn disc(&self) -> i128 {
        self.disc
    }

    /// g(x, y) = sign · N(x − yθ); always +1 for the monic model.
    pub fn norm_sign(&self) -> i8 {
        1
    }

    /// Primes that may divide [O_K : Z[θ]].
    pub fn index_bound(&self) -> &[u64] {
        &self.index_bound
    }

    pub fn in_index_bound(&self, p: u64) -> bool {
        self.index_bound.binary_search(&p).is_ok()
    }

    fn poly_mod(&self, p: u64) -> PolyMod {
        let c: Vec<i128> = self.min_poly.iter().map(|&v| v as i128).collect();
        PolyMod::new(&c, p)
    }

    /// Dedekind's criterion: true when p divides the index of Z[θ].
    fn dedekind_flags(&self, p: u64) -> bool {
        let pm = p as i128;
        let local = factor_low_degree(&self.poly_mod(p));
        let lift = |f: &PolyMod| -> Vec<i128> { f.c.iter().map(|&v| v as i128).collect() };
        let mut g = vec![1i128];
        let mut h = vec![1i128];
        for lf in &local {
            g = poly_mul(&g, &lift(&lf.poly));
            for _ in 1..lf.multiplicity {
                h = poly_mul(&h, &lift(&lf.poly));
            }
        }
        let gh = poly_mul(&g, &h);
        let m: Vec<i128> = self.min_poly.iter().map(|&v| v as i128).collect();
        let len = m.len().max(gh.len());
        let diff: Vec<i128> = (0..len)
            .map(|i| m.get(i).copied().unwrap_or(0) - gh.get(i).copied().unwrap_or(0))
            .collect();
        debug_assert!(diff.iter().all(|v| v % pm == 0));
        let f_bar = PolyMod::new(&diff.iter().map(|v| v / pm).collect::<Vec<_>>(), p);
        local.iter().filter(|lf| lf.multiplicity >= 2).any(|lf| {
            f_bar.is_zero() || f_bar.div_rem(&lf.poly).1.is_zero()
        })
    }

    /// The primes above p, from the factorization of the minimal polynomial.
    pub fn factor_prime(&self, p: u64) -> Result<Vec<PrimeIdeal>> {
        if let Some(v) = self.cache.get(&p) {
            return Ok(v.clone());
        }
        if self.in_index_bound(p) {
            return Err(Error::Unsupported(format!("{p} may divide the index of Z[θ]")));
        }
        Ok(factor_low_degree(&self.poly_mod(p))
            .into_iter()
            .map(|lf| match lf.root {
                Some(r) => PrimeIdeal { p, tag: RootTag::Root(r), residue_degree: 1, ramification: lf.multiplicity },
                None => PrimeIdeal { p, tag: RootTag::Residue(lf.degree), residue_degree: lf.degree, ramification: 1 },
            })
            .collect())
    }

    /// Caches the factorization of every admissible prime ≤ limit.
    pub fn warm_up(&mut self, limit: u64) {
        for p in primes_through(limit) {
            if let Ok(v) = self.factor_prime(p) {
                self.cache.insert(p, v);
            }
        }
    }

    /// Prime ideals with norm ≤ bound, ordered by (p, tag).
    pub fn prime_ideals_up_to(&self, bound: u64) -> Result<Vec<PrimeIdeal>> {
        let mut out = Vec::new();
        for p in primes_through(bound) {
            if self.in_index_bound(p) {
                continue;
            }
            out.extend(self.factor_prime(p)?.into_iter().filter(|q| q.norm() <= bound as u128));
        }
        Ok(out)
    }

    /// Product of the index-bound primes and the primes dividing the
    /// discriminant; outside it, primes dividing x − yθ with gcd(x, y) = 1
    /// have degree 1.
    pub fn compute_d0(&self) -> u64 {
        let abs = self.disc.unsigned_abs() as u64;
        let mut primes: Vec<u64> = factorize(abs).into_iter().map(|(p, _)| p).collect();
        primes.extend_from_slice(&self.index_bound);
        primes.sort_unstable();
        primes.dedup();
        primes.iter().product()
    }

    /// The ideal (x − yθ) for coprime (x, y).
    pub fn ideal_from_point(&self, x: i64, y: i64) -> Result<Ideal> {
        let v = self.form.evaluate(x, y)?;
        if v == 0 {
            return Err(Error::Invalid(format!("form vanishes at ({x},{y})")));
        }
        self.ideal_from_factorization(x, y, &factor_integer(v)?)
    }

    /// As [`Self::ideal_from_point`], reusing a factorization of g(x, y).
    pub fn ideal_from_factorization(&self, x: i64, y: i64, fac: &Factorization) -> Result<Ideal> {
        if gcd_u64(x.unsigned_abs(), y.unsigned_abs()) != 1 {
            return Err(Error::Invalid(format!("({x},{y}) is not a coprime pair")));
        }
        let mut factors = Vec::with_capacity(fac.factors.len());
        for &(p, e) in &fac.factors {
            if self.in_index_bound(p) {
                return Err(Error::Unsupported(format!("{p} may divide the index of Z[θ]")));
            }
            let ym = (y as i128).rem_euclid(p as i128);
            let yinv = mod_inv(ym, p as i128).ok_or_else(|| {
                Error::Corruption(format!("{p} divides both y and g({x},{y}) for a monic g"))
            })?;
            let r = ((x as i128).rem_euclid(p as i128) * yinv % p as i128) as u64;
            let prime = self
                .factor_prime(p)?
                .into_iter()
                .find(|q| q.tag == RootTag::Root(r))
                .ok_or_else(|| Error::Corruption(format!("x/y ≡ {r} is not a root mod {p}")))?;
            factors.push((prime, e));
        }
        Ideal::from_factors(factors)
    }
}

fn poly_mul(a: &[i128], b: &[i128]) -> Vec<i128> {
    let mut out = vec![0i128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn build_field(g: &BinaryCubicForm) -> Result<CubicField> {
    CubicField::build(g)
}
