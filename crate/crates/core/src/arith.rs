//! Word-sized integer arithmetic: modular powers, primality, square/cube
//! roots, small prime tables and full factorization of `u64` values.

use std::sync::OnceLock;

pub fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Extended Euclid: returns (g, s, t) with s·a + t·b = g = gcd(a, b) ≥ 0.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inv(a: i128, m: i128) -> Option<i128> {
    let (g, s, _) = ext_gcd(a.rem_euclid(m), m);
    (g == 1).then(|| s.rem_euclid(m))
}

/// Solves x ≡ a1 (mod m1), x ≡ a2 (mod m2) for arbitrary positive moduli.
/// Returns (x mod lcm, lcm) or `None` when the system is inconsistent.
pub fn crt(a1: i128, m1: i128, a2: i128, m2: i128) -> Option<(i128, i128)> {
    let (g, s, _) = ext_gcd(m1, m2);
    let diff = a2 - a1;
    if diff.rem_euclid(g) != 0 {
        return None;
    }
    let lcm = m1 / g * m2;
    let k = ((diff / g) % (m2 / g) * s).rem_euclid(m2 / g);
    Some(((a1 + m1 * k).rem_euclid(lcm), lcm))
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Montgomery form arithmetic modulo an odd 64-bit modulus.
#[derive(Clone, Copy, Debug)]
pub struct Montgomery {
    n: u64,
    // n * n_inv ≡ 1 (mod 2^64)
    n_inv: u64,
    r2: u64,
}

impl Montgomery {
    pub fn new(n: u64) -> Self {
        debug_assert!(n % 2 == 1 && n > 1);
        let mut inv = n;
        for _ in 0..5 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(n.wrapping_mul(inv)));
        }
        let r2 = ((1u128 << 64) % n as u128 * ((1u128 << 64) % n as u128) % n as u128) as u64;
        Montgomery { n, n_inv: inv, r2 }
    }

    #[inline]
    fn reduce(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.n_inv);
        let mn = m as u128 * self.n as u128;
        let (hi_t, lo_t) = ((t >> 64) as u64, t as u64);
        let (hi_mn, lo_mn) = ((mn >> 64) as u64, mn as u64);
        // t - m·n is divisible by 2^64
        let borrow = (lo_t < lo_mn) as u64;
        let (r, under) = hi_t.overflowing_sub(hi_mn);
        let (r, under2) = r.overflowing_sub(borrow);
        if under || under2 {
            r.wrapping_add(self.n)
        } else {
            r
        }
    }

    #[inline]
    pub fn to_mont(&self, a: u64) -> u64 {
        self.reduce(a as u128 * self.r2 as u128)
    }

    #[inline]
    pub fn from_mont(&self, a: u64) -> u64 {
        self.reduce(a as u128)
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.reduce(a as u128 * b as u128)
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let (s, o) = a.overflowing_add(b);
        if o || s >= self.n {
            s.wrapping_sub(self.n)
        } else {
            s
        }
    }

    pub fn pow(&self, base: u64, mut exp: u64) -> u64 {
        let mut acc = self.to_mont(1);
        let mut b = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        acc
    }
}

const SMALL_PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic primality test for all 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    if n < 37 * 37 {
        return true;
    }
    let bases: &[u64] = if n < 4_759_123_141 {
        &[2, 7, 61]
    } else if n < 3_474_749_660_383 {
        &[2, 3, 5, 7, 11, 13]
    } else {
        &[2, 325, 9375, 28178, 450775, 9780504, 1795265022]
    };
    let mont = Montgomery::new(n);
    let d_shift = (n - 1).trailing_zeros();
    let d = (n - 1) >> d_shift;
    let one = mont.to_mont(1);
    let minus_one = mont.to_mont(n - 1);
    'bases: for &a in bases {
        let a = a % n;
        if a == 0 {
            continue;
        }
        let mut x = mont.pow(mont.to_mont(a), d);
        if x == one || x == minus_one {
            continue;
        }
        for _ in 1..d_shift {
            x = mont.mul(x, x);
            if x == minus_one {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

pub fn isqrt_u128(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

pub fn isqrt_u64(n: u64) -> u64 {
    isqrt_u128(n as u128) as u64
}

/// Floor of the real cube root.
pub fn icbrt_u128(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).cbrt() as u128;
    while x.checked_pow(3).map_or(true, |c| c > n) {
        x -= 1;
    }
    while (x + 1).checked_pow(3).map_or(false, |c| c <= n) {
        x += 1;
    }
    x
}

/// Returns `s` when `n = s²`.
pub fn exact_sqrt(n: u64) -> Option<u64> {
    let s = isqrt_u64(n);
    (s * s == n).then_some(s)
}

/// Sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

const TABLE_LIMIT: u64 = 1 << 16;

/// Primes below 2^16, computed once.
pub fn small_primes() -> &'static [u64] {
    static TABLE: OnceLock<Vec<u64>> = OnceLock::new();
    TABLE.get_or_init(|| primes_up_to(TABLE_LIMIT))
}

/// Primes ≤ `limit`, served from the shared table when possible.
pub fn primes_through(limit: u64) -> Vec<u64> {
    if limit <= TABLE_LIMIT {
        let t = small_primes();
        let end = t.partition_point(|&p| p <= limit);
        t[..end].to_vec()
    } else {
        primes_up_to(limit)
    }
}

/// Brent's variant of Pollard rho. Returns a nontrivial factor of the odd
/// composite `n`.
pub fn pollard_brent(n: u64) -> Option<u64> {
    if n % 2 == 0 {
        return Some(2);
    }
    let mont = Montgomery::new(n);
    for c0 in 1..64u64 {
        let c = mont.to_mont(c0);
        let f = |x: u64| mont.add(mont.mul(x, x), c);
        let mut y = mont.to_mont(2);
        let mut r = 1u64;
        let mut q = mont.to_mont(1);
        let mut g = 1u64;
        let mut x = y;
        let mut ys = y;
        const BATCH: u64 = 64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = f(y);
                    let diff = if x > y { x - y } else { y - x };
                    q = mont.mul(q, diff);
                }
                g = gcd_u64(mont.from_mont(q), n);
                k += BATCH;
            }
            r *= 2;
            if r > 1 << 26 {
                break;
            }
        }
        if g == n {
            // backtrack one step at a time
            loop {
                ys = f(ys);
                let diff = if x > ys { x - ys } else { ys - x };
                g = gcd_u64(mont.from_mont(diff), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g > 1 && g < n {
            return Some(g);
        }
    }
    None
}

/// Complete factorization of `n ≥ 1` as sorted (prime, exponent) pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n <= 1 {
        return out;
    }
    for &p in small_primes().iter().take_while(|&&p| p < 1000) {
        if p * p > n {
            break;
        }
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    if n > 1 {
        let mut stack = vec![n];
        let mut big = Vec::new();
        while let Some(m) = stack.pop() {
            if m == 1 {
                continue;
            }
            if is_prime_u64(m) {
                big.push(m);
                continue;
            }
            if let Some(s) = exact_sqrt(m) {
                stack.push(s);
                stack.push(s);
                continue;
            }
            let d = pollard_brent(m).expect("rho failed on a composite");
            stack.push(d);
            stack.push(m / d);
        }
        big.sort_unstable();
        for p in big {
            match out.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => out.push((p, 1)),
            }
        }
    }
    out
}

/// All positive divisors of `n`, sorted.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut divs = vec![1u64];
    for (p, e) in factorize(n) {
        let len = divs.len();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                divs.push(divs[i] * pk);
            }
        }
    }
    divs.sort_unstable();
    divs
}

pub fn is_squarefree(n: u64) -> bool {
    factorize(n).iter().all(|&(_, e)| e == 1)
}

/// Compares a·b with c·d exactly.
pub fn cmp_products(a: u128, b: u128, c: u128, d: u128) -> std::cmp::Ordering {
    widening_mul(a, b).cmp(&widening_mul(c, d))
}

/// 256-bit product as (hi, lo).
pub fn widening_mul(a: u128, b: u128) -> (u128, u128) {
    const MASK: u128 = u64::MAX as u128;
    let (a_hi, a_lo) = (a >> 64, a & MASK);
    let (b_hi, b_lo) = (b >> 64, b & MASK);
    let ll = a_lo * b_lo;
    let lh = a_lo * b_hi;
    let hl = a_hi * b_lo;
    let hh = a_hi * b_hi;
    let mid = (ll >> 64) + (lh & MASK) + (hl & MASK);
    let lo = (ll & MASK) | (mid << 64);
    let hi = hh + (lh >> 64) + (hl >> 64) + (mid >> 64);
    (hi, lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_is_prime(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    #[test]
    fn primality_matches_trial_division() {
        for n in 0..20_000u64 {
            assert_eq!(is_prime_u64(n), trial_is_prime(n), "n = {n}");
        }
        for n in (1_000_000_000u64..1_000_002_000).step_by(7) {
            assert_eq!(is_prime_u64(n), trial_is_prime(n), "n = {n}");
        }
    }

    #[test]
    fn primality_on_known_pseudoprimes() {
        // strong pseudoprimes to several small bases
        for n in [3_215_031_751u64, 2_152_302_898_747, 3_474_749_660_383, 341_550_071_728_321] {
            assert!(!is_prime_u64(n), "{n}");
        }
        assert!(is_prime_u64(18_446_744_073_709_551_557));
        assert!(is_prime_u64((1 << 61) - 1));
    }

    #[test]
    fn montgomery_matches_plain() {
        let m = Montgomery::new(1_000_000_007);
        let a = m.to_mont(123_456_789);
        let b = m.to_mont(987_654_321);
        assert_eq!(m.from_mont(m.mul(a, b)), mul_mod(123_456_789, 987_654_321, 1_000_000_007));
        let big = 18_446_744_073_709_551_557u64;
        let m = Montgomery::new(big);
        let x = big - 3;
        assert_eq!(m.from_mont(m.mul(m.to_mont(x), m.to_mont(x))), mul_mod(x, x, big));
    }

    #[test]
    fn factorize_reconstructs() {
        for n in [1u64, 2, 12, 10403, 10201, 600851475143, 999_999_000_001, u64::MAX] {
            let f = factorize(n);
            let prod: u128 = f.iter().map(|&(p, e)| (p as u128).pow(e)).product();
            assert_eq!(prod, n as u128);
            assert!(f.iter().all(|&(p, _)| is_prime_u64(p)));
        }
    }

    #[test]
    fn roots_are_floors() {
        assert_eq!(icbrt_u128(26), 2);
        assert_eq!(icbrt_u128(27), 3);
        assert_eq!(icbrt_u128(u64::MAX as u128), 2_642_245);
        assert_eq!(isqrt_u64(10_403), 101);
        assert_eq!(exact_sqrt(10_201), Some(101));
    }

    #[test]
    fn crt_general_moduli() {
        assert_eq!(crt(1, 4, 3, 6), Some((9, 12)));
        assert_eq!(crt(1, 4, 2, 6), None);
        assert_eq!(crt(2, 3, 3, 5), Some((8, 15)));
    }

    #[test]
    fn widening_compare() {
        use std::cmp::Ordering;
        let big = u128::MAX / 3;
        assert_eq!(cmp_products(big, 6, big, 5), Ordering::Greater);
        assert_eq!(cmp_products(big, 4, 2 * big, 2), Ordering::Equal);
    }
}
