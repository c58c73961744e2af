use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::arith::factorize;
use crate::error::{Error, Result};
use crate::ideal_arith::{CubicField, Ideal, PrimeIdeal, RootTag};
use crate::region_lattice::{Hnf, LatticeCoset};

pub type Density = Ratio<i128>;

// Prime powers above this are outside the exact lattice construction.
const MODULUS_LIMIT: i128 = 1 << 40;

fn pow_i128(p: u64, e: u32) -> Result<i128> {
    (p as i128)
        .checked_pow(e)
        .filter(|&v| v <= MODULUS_LIMIT)
        .ok_or_else(|| Error::Range(format!("{p}^{e} exceeds the lattice modulus limit")))
}

fn eval_poly(c: &[i64; 4], t: i128, m: i128) -> i128 {
    c.iter().rev().fold(0i128, |acc, &a| (acc * t + a as i128).rem_euclid(m))
}

fn eval_deriv(c: &[i64; 4], t: i128, m: i128) -> i128 {
    let d = [c[1] as i128, 2 * c[2] as i128, 3 * c[3] as i128];
    d.iter().rev().fold(0i128, |acc, &a| (acc * t + a).rem_euclid(m))
}

/// The simple root r of the minimal polynomial mod p lifted to a root mod p^a.
fn hensel_lift(c: &[i64; 4], p: u64, r: u64, a: u32) -> Result<i128> {
    let m = pow_i128(p, a)?;
    let pm = p as i128;
    let inv = crate::arith::mod_inv(eval_deriv(c, r as i128, pm), pm)
        .ok_or_else(|| Error::Corruption(format!("root {r} mod {p} is not simple")))?;
    let mut t = r as i128;
    let mut mk = pm;
    for _ in 1..a {
        mk *= pm;
        // t ← t − m(t)·m'(r)⁻¹ keeps the root while lifting one p-adic digit
        let fx = eval_poly(c, t, mk);
        t = (t - fx * inv).rem_euclid(mk);
    }
    debug_assert_eq!(eval_poly(c, t, m), 0);
    Ok(t.rem_euclid(m))
}

fn valuation(mut v: i128, p: i128) -> u32 {
    if v == 0 {
        return u32::MAX;
    }
    let mut e = 0;
    while v % p == 0 {
        v /= p;
        e += 1;
    }
    e
}

/// Λ = {(x, y) : 𝔭^a | x − yθ} for one prime power.
pub fn prime_power_lattice(field: &CubicField, prime: &PrimeIdeal, a: u32) -> Result<Hnf> {
    let p = prime.p;
    if a == 0 {
        return Ok(Hnf { p: 1, q: 0, r: 1 });
    }
    match (prime.tag, prime.ramification) {
        (RootTag::Residue(_), _) => {
            let pa = pow_i128(p, a)?;
            Ok(Hnf { p: pa, q: 0, r: pa })
        }
        (RootTag::Root(r), 1) => {
            let pa = pow_i128(p, a)?;
            let ra = hensel_lift(&field.min_poly(), p, r, a)?;
            Ok(Hnf { p: pa, q: ra, r: 1 })
        }
        (RootTag::Root(r), e) => {
            // Λ ⊇ p^K Z² once K·e ≥ a; decide membership on residues mod p^K
            let k = a.div_ceil(e);
            pow_i128(p, 2 * k)?;
            let pk = pow_i128(p, k)?;
            let mut gens = vec![(pk, 0), (0, pk)];
            for x in 0..pk {
                for y in 0..pk {
                    if ramified_valuation(field, p, r, e, x, y)? >= a {
                        gens.push((x, y));
                    }
                }
            }
            Hnf::from_generators(&gens)
        }
    }
}

/// v_𝔭(x − yθ) for the ramified degree-one prime with root r.
fn ramified_valuation(field: &CubicField, p: u64, r: u64, e: u32, x: i128, y: i128) -> Result<u32> {
    if x == 0 && y == 0 {
        return Ok(u32::MAX);
    }
    let pm = p as i128;
    let (mut x1, mut y1, mut j) = (x, y, 0u32);
    while x1 % pm == 0 && y1 % pm == 0 {
        x1 /= pm;
        y1 /= pm;
        j += 1;
    }
    let base = j * e;
    if y1.rem_euclid(pm) == 0 || (x1 - r as i128 * y1).rem_euclid(pm) != 0 {
        return Ok(base);
    }
    let v = field
        .form()
        .evaluate(i64::try_from(x1).map_err(|_| Error::Range("lattice sample".into()))?, y1 as i64)?;
    Ok(base + valuation(v, pm))
}

/// Λ_𝔡 = {(x, y) : 𝔡 | x − yθ}.
pub fn ideal_lattice(field: &CubicField, d: &Ideal) -> Result<Hnf> {
    let mut out = Hnf { p: 1, q: 0, r: 1 };
    for &(prime, a) in d.factors() {
        out = out.intersect(&prime_power_lattice(field, &prime, a)?);
    }
    Ok(out)
}

fn scalar_lattice(m: i128) -> Hnf {
    Hnf { p: m, q: 0, r: m }
}

fn inv_index(c: &Option<LatticeCoset>) -> Density {
    match c {
        Some(c) => Ratio::new(1, c.index() as i128),
        None => Ratio::zero(),
    }
}

/// Densities g(𝔡) for the sequence of coprime points of a coset L.
#[derive(Debug)]
pub struct DensityModel {
    field: CubicField,
    coset: LatticeCoset,
    d0: u64,
    d1: u64,
    cache: Mutex<HashMap<Ideal, Density>>,
}

impl Clone for DensityModel {
    fn clone(&self) -> Self {
        DensityModel {
            field: self.field.clone(),
            coset: self.coset.clone(),
            d0: self.d0,
            d1: self.d1,
            cache: Mutex::new(self.cache.lock().expect("cache").clone()),
        }
    }
}

impl DensityModel {
    pub fn new(field: CubicField, coset: LatticeCoset) -> Self {
        let d0 = field.compute_d0();
        let d1 = coset.index();
        DensityModel { field, coset, d0, d1, cache: Mutex::new(HashMap::new()) }
    }

    pub fn field(&self) -> &CubicField {
        &self.field
    }

    pub fn coset(&self) -> &LatticeCoset {
        &self.coset
    }

    pub fn d0(&self) -> u64 {
        self.d0
    }

    pub fn d1(&self) -> u64 {
        self.d1
    }

    /// gcd(D₀, D₁) = 1, which the postulate system assumes.
    pub fn moduli_coprime(&self) -> bool {
        crate::arith::gcd_u64(self.d0, self.d1) == 1
    }

    /// L_𝔡 = L ∩ Λ_𝔡, or `None` when empty.
    pub fn restricted_coset(&self, d: &Ideal) -> Result<Option<LatticeCoset>> {
        self.coset.intersect_lattice(&ideal_lattice(&self.field, d)?)
    }

    /// Density of the points of C avoiding mZ² for every m in `primes`,
    /// by inclusion–exclusion.
    fn primitive_density(c: &Option<LatticeCoset>, primes: &[u64]) -> Result<Density> {
        let Some(c) = c else { return Ok(Ratio::zero()) };
        let mut total = Ratio::zero();
        for mask in 0u32..(1 << primes.len()) {
            let mut m: i128 = 1;
            for (i, &p) in primes.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    m *= p as i128;
                }
            }
            let term = inv_index(&c.intersect_lattice(&scalar_lattice(m))?);
            if mask.count_ones() % 2 == 0 {
                total += term;
            } else {
                total -= term;
            }
        }
        Ok(total)
    }

    /// The relative density of coprime-to-S points of L_𝔡 inside L, with S
    /// the primes dividing N𝔡. For N𝔡 = p^α this is the defining ratio
    /// ([Z²:L_𝔡]⁻¹ − [Z²:pZ²∩L_𝔡]⁻¹)/([Z²:L]⁻¹ − [Z²:pZ²∩L]⁻¹).
    pub fn g_direct(&self, d: &Ideal) -> Result<Density> {
        let norm = u64::try_from(d.norm()).map_err(|_| Error::Range("norm exceeds 64 bits".into()))?;
        let primes: Vec<u64> = factorize(norm).into_iter().map(|(p, _)| p).collect();
        let whole = Some(self.coset.clone());
        let den = Self::primitive_density(&whole, &primes)?;
        if den.is_zero() {
            return Ok(Ratio::zero());
        }
        let num = Self::primitive_density(&self.restricted_coset(d)?, &primes)?;
        Ok(num / den)
    }

    /// g on prime-power norms from the defining ratio, extended
    /// multiplicatively over the rational primes below 𝔡.
    pub fn g(&self, d: &Ideal) -> Result<Density> {
        let mut parts: BTreeMap<u64, Vec<(PrimeIdeal, u32)>> = BTreeMap::new();
        for &(q, e) in d.factors() {
            parts.entry(q.p).or_default().push((q, e));
        }
        let mut out: Density = Ratio::one();
        for (_, part) in parts {
            let pd = Ideal::from_factors(part)?;
            out *= self.g_prime_power(&pd)?;
        }
        Ok(out)
    }

    fn g_prime_power(&self, d: &Ideal) -> Result<Density> {
        if let Some(v) = self.cache.lock().expect("cache").get(d) {
            return Ok(*v);
        }
        let v = self.g_direct(d)?;
        self.cache.lock().expect("cache").insert(d.clone(), v);
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubic_form::BinaryCubicForm;

    fn field(a: i64, b: i64, c: i64, d: i64) -> CubicField {
        CubicField::build(&BinaryCubicForm::new(a, b, c, d).unwrap()).unwrap()
    }

    /// Membership by brute-force ideal valuation of x − yθ through the norm:
    /// for coprime (x, y), 𝔭^a | x − yθ iff x ≡ r·y (mod p) and a ≤ v_p(g).
    fn brute_member(k: &CubicField, prime: &PrimeIdeal, a: u32, x: i64, y: i64) -> bool {
        if x == 0 && y == 0 {
            return true;
        }
        let p = prime.p as i64;
        let (mut x1, mut y1, mut j) = (x, y, 0u32);
        while x1 % p == 0 && y1 % p == 0 {
            x1 /= p;
            y1 /= p;
            j += 1;
        }
        let scale = match prime.tag {
            RootTag::Residue(_) => j,
            RootTag::Root(_) => j * prime.ramification,
        };
        if scale >= a {
            return true;
        }
        let RootTag::Root(r) = prime.tag else { return false };
        if y1.rem_euclid(p) == 0 || (x1 - r as i64 * y1).rem_euclid(p) != 0 {
            return false;
        }
        let v = k.form().evaluate(x1, y1).unwrap();
        scale + valuation(v, p as i128) >= a
    }

    #[test]
    fn lattices_match_valuations() {
        for k in [field(1, 0, 0, 2), field(1, 0, 1, 1), field(1, 0, -3, 1)] {
            for p in [2u64, 3, 5, 7, 11, 31] {
                let Ok(primes) = k.factor_prime(p) else { continue };
                for prime in primes {
                    for a in 1..=3 {
                        if prime.norm().pow(a) > 40_000 {
                            continue;
                        }
                        let h = prime_power_lattice(&k, &prime, a).unwrap();
                        for x in -40..40 {
                            for y in -40..40 {
                                assert_eq!(
                                    h.contains(x as i128, y as i128),
                                    brute_member(&k, &prime, a, x, y),
                                    "{prime}^{a} at ({x},{y})"
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn prime_densities() {
        let k = field(1, 0, 0, 2);
        let model = DensityModel::new(k.clone(), LatticeCoset::whole_plane());
        let five = k.factor_prime(5).unwrap();
        let lin = Ideal::prime(five[0]);
        assert_eq!(model.g(&lin).unwrap(), Ratio::new(1, 6));
        let sq = Ideal::prime_power(five[0], 2).unwrap();
        // p^-2 / (1 + 1/p)
        assert_eq!(model.g(&sq).unwrap(), Ratio::new(1, 25) / Ratio::new(6, 5));
        assert_eq!(model.g(&Ideal::prime(five[1])).unwrap(), Ratio::zero());
        assert_eq!(model.g(&Ideal::unit()).unwrap(), Ratio::one());
    }

    #[test]
    fn coset_branch() {
        let k = field(1, 0, 0, 2);
        let coset: LatticeCoset = "coset:5,0,0,1;1,0".parse().unwrap();
        let model = DensityModel::new(k.clone(), coset);
        assert!(model.moduli_coprime());
        let five = k.factor_prime(5).unwrap();
        assert_eq!(model.g(&Ideal::prime(five[0])).unwrap(), Ratio::new(1, 5));
        assert_eq!(model.g(&Ideal::prime_power(five[0], 2).unwrap()).unwrap(), Ratio::new(1, 25));
    }
}
