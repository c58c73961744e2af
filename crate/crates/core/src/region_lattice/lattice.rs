use std::fmt;
use std::str::FromStr;

use crate::arith::{crt, ext_gcd, gcd_i128};
use crate::error::{Error, Result};

/// Hermite normal form of a full-rank sublattice of Z²: the lattice is
/// generated by (p, 0) and (q, r) with p, r > 0 and 0 ≤ q < p.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Hnf {
    pub p: i128,
    pub q: i128,
    pub r: i128,
}

impl Hnf {
    pub fn index(&self) -> i128 {
        self.p * self.r
    }

    /// The lattice generated by an arbitrary finite set of vectors.
    pub fn from_generators(gens: &[(i128, i128)]) -> Result<Hnf> {
        // reduce the second coordinates to a single vector by gcd steps
        let mut pivot: Option<(i128, i128)> = None;
        let mut flat: Vec<i128> = Vec::new();
        for &(x, y) in gens {
            if y == 0 {
                flat.push(x);
                continue;
            }
            match pivot {
                None => pivot = Some((x, y)),
                Some((px, py)) => {
                    let (g, s, t) = ext_gcd(py, y);
                    let new_pivot = (s * px + t * x, g);
                    // the combination with vanishing y
                    let (a, b) = (y / g, py / g);
                    flat.push(a * px - b * x);
                    pivot = Some(new_pivot);
                }
            }
        }
        let (qx, r) = pivot.ok_or_else(|| Error::Invalid("degenerate lattice: rank < 2".into()))?;
        let p = flat.iter().fold(0i128, |g, &x| gcd_i128(g, x));
        if p == 0 {
            return Err(Error::Invalid("degenerate lattice: rank < 2".into()));
        }
        let (qx, r) = if r < 0 { (-qx, -r) } else { (qx, r) };
        Ok(Hnf { p, q: qx.rem_euclid(p), r })
    }

    pub fn contains(&self, x: i128, y: i128) -> bool {
        if y.rem_euclid(self.r) != 0 {
            return false;
        }
        let t = y / self.r;
        (x - t * self.q).rem_euclid(self.p) == 0
    }

    /// Intersection with another lattice. Always nonempty (contains 0).
    pub fn intersect(&self, other: &Hnf) -> Hnf {
        let base = intersect_affine((0, 0), self, (0, 0), other)
            .expect("lattices through the origin always meet");
        base.1
    }
}

/// Intersection of (o1 + Λ1) and (o2 + Λ2): a point of it and the HNF of
/// Λ1 ∩ Λ2, or `None` when the cosets are disjoint.
fn intersect_affine(
    o1: (i128, i128),
    l1: &Hnf,
    o2: (i128, i128),
    l2: &Hnf,
) -> Option<((i128, i128), Hnf)> {
    // rows: y ≡ o.y (mod r); for y = o.y + t r, x ≡ o.x + t q (mod p)
    let (y0, rr) = crt(o1.1, l1.r, o2.1, l2.r)?;
    // y = y0 + k·rr; x ≡ a_i + k·b_i (mod p_i)
    let t1 = (y0 - o1.1) / l1.r;
    let t2 = (y0 - o2.1) / l2.r;
    let a1 = o1.0 + t1 * l1.q;
    let a2 = o2.0 + t2 * l2.q;
    let b1 = rr / l1.r * l1.q;
    let b2 = rr / l2.r * l2.q;
    // compatibility mod g = gcd(p1, p2): (a1 - a2) + k (b1 - b2) ≡ 0
    let g = gcd_i128(l1.p, l2.p);
    let (k0, k_step) = solve_linear(b1 - b2, a2 - a1, g)?;
    let y = y0 + k0 * rr;
    let (x, p) = crt(
        (a1 + k0 * b1).rem_euclid(l1.p),
        l1.p,
        (a2 + k0 * b2).rem_euclid(l2.p),
        l2.p,
    )?;
    let (dq, _) = crt(
        (k_step * b1).rem_euclid(l1.p),
        l1.p,
        (k_step * b2).rem_euclid(l2.p),
        l2.p,
    )?;
    let lattice = Hnf { p, q: dq.rem_euclid(p), r: rr * k_step };
    Some(((x, y), lattice))
}

/// Solutions of b·k ≡ c (mod m) as k ≡ k0 (mod step).
fn solve_linear(b: i128, c: i128, m: i128) -> Option<(i128, i128)> {
    let b = b.rem_euclid(m);
    let c = c.rem_euclid(m);
    let (g, s, _) = ext_gcd(b, m);
    if g == 0 {
        // m == 0 cannot occur; b ≡ 0 and m ≥ 1
        return (c == 0).then_some((0, 1));
    }
    if c % g != 0 {
        return None;
    }
    let step = m / g;
    Some(((c / g * s).rem_euclid(step), step))
}

/// A translate of a finite-index subgroup of Z².
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticeCoset {
    /// Columns of the basis matrix.
    basis: [(i64, i64); 2],
    offset: (i64, i64),
    hnf: Hnf,
}

impl LatticeCoset {
    /// Basis columns (b11, b21) and (b12, b22), offset (ox, oy).
    pub fn new(col1: (i64, i64), col2: (i64, i64), offset: (i64, i64)) -> Result<Self> {
        let det = col1.0 as i128 * col2.1 as i128 - col2.0 as i128 * col1.1 as i128;
        if det == 0 {
            return Err(Error::Invalid("lattice basis has zero determinant".into()));
        }
        let hnf = Hnf::from_generators(&[
            (col1.0 as i128, col1.1 as i128),
            (col2.0 as i128, col2.1 as i128),
        ])?;
        debug_assert_eq!(hnf.index(), det.abs());
        Ok(LatticeCoset { basis: [col1, col2], offset, hnf })
    }

    pub fn whole_plane() -> Self {
        LatticeCoset::new((1, 0), (0, 1), (0, 0)).expect("identity basis")
    }

    pub(crate) fn from_hnf(hnf: Hnf, offset: (i128, i128)) -> Result<Self> {
        let conv = |v: i128| {
            i64::try_from(v).map_err(|_| Error::Range("lattice data exceeds 64 bits".into()))
        };
        let col1 = (conv(hnf.p)?, 0);
        let col2 = (conv(hnf.q)?, conv(hnf.r)?);
        // normalize the offset into the fundamental domain
        let oy = offset.1.rem_euclid(hnf.r);
        let t = (offset.1 - oy) / hnf.r;
        let ox = (offset.0 - t * hnf.q).rem_euclid(hnf.p);
        Ok(LatticeCoset { basis: [col1, col2], offset: (conv(ox)?, conv(oy)?), hnf })
    }

    pub fn basis(&self) -> [(i64, i64); 2] {
        self.basis
    }

    pub fn offset(&self) -> (i64, i64) {
        self.offset
    }

    pub fn hnf(&self) -> Hnf {
        self.hnf
    }

    /// [Z² : L], the index of the underlying lattice.
    pub fn index(&self) -> u64 {
        self.hnf.index() as u64
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        self.hnf
            .contains(x as i128 - self.offset.0 as i128, y as i128 - self.offset.1 as i128)
    }

    /// The x-progression of the coset on row y: x ≡ residue (mod stride).
    pub fn row(&self, y: i64) -> Option<(i64, i64)> {
        let dy = y as i128 - self.offset.1 as i128;
        if dy.rem_euclid(self.hnf.r) != 0 {
            return None;
        }
        let t = dy / self.hnf.r;
        let residue = (self.offset.0 as i128 + t * self.hnf.q).rem_euclid(self.hnf.p);
        Some((residue as i64, self.hnf.p as i64))
    }

    /// Intersection with an arbitrary coset; `None` when disjoint.
    pub fn intersect_general(&self, other: &LatticeCoset) -> Result<Option<LatticeCoset>> {
        let o1 = (self.offset.0 as i128, self.offset.1 as i128);
        let o2 = (other.offset.0 as i128, other.offset.1 as i128);
        match intersect_affine(o1, &self.hnf, o2, &other.hnf) {
            None => Ok(None),
            Some((pt, hnf)) => LatticeCoset::from_hnf(hnf, pt).map(Some),
        }
    }

    /// Intersection with a sublattice given in HNF (a coset through 0).
    pub fn intersect_lattice(&self, lattice: &Hnf) -> Result<Option<LatticeCoset>> {
        let o1 = (self.offset.0 as i128, self.offset.1 as i128);
        match intersect_affine(o1, &self.hnf, (0, 0), lattice) {
            None => Ok(None),
            Some((pt, hnf)) => LatticeCoset::from_hnf(hnf, pt).map(Some),
        }
    }
}

/// L1 ∩ L2 for cosets of coprime index, which is again a coset with
/// index [Z²:L1]·[Z²:L2].
pub fn intersect_cosets(l1: &LatticeCoset, l2: &LatticeCoset) -> Result<LatticeCoset> {
    if gcd_i128(l1.index() as i128, l2.index() as i128) != 1 {
        return Err(Error::Unsupported(format!(
            "indices not coprime ({} and {})",
            l1.index(),
            l2.index()
        )));
    }
    let out = l1
        .intersect_general(l2)?
        .ok_or_else(|| Error::Corruption("coprime cosets must intersect".into()))?;
    debug_assert_eq!(out.index(), l1.index() * l2.index());
    Ok(out)
}

pub fn coset_index(l: &LatticeCoset) -> u64 {
    l.index()
}

impl fmt::Display for LatticeCoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [(b11, b21), (b12, b22)] = self.basis;
        write!(f, "coset:{b11},{b21},{b12},{b22};{},{}", self.offset.0, self.offset.1)
    }
}

impl FromStr for LatticeCoset {
    type Err = Error;

    /// "coset:b11,b21,b12,b22;ox,oy" (basis given column by column).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad coset literal {s:?}"));
        let body = s.trim().strip_prefix("coset:").ok_or_else(bad)?;
        let (basis, offset) = body.split_once(';').ok_or_else(bad)?;
        let nums = |t: &str| -> Result<Vec<i64>> {
            t.split(',').map(|v| v.trim().parse::<i64>().map_err(|_| bad())).collect()
        };
        let b = nums(basis)?;
        let o = nums(offset)?;
        if b.len() != 4 || o.len() != 2 {
            return Err(bad());
        }
        LatticeCoset::new((b[0], b[1]), (b[2], b[3]), (o[0], o[1]))
    }
}
