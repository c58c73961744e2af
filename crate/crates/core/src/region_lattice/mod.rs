//! Convex regions, lattice cosets and exact point enumeration over S ∩ L.

mod lattice;
mod region;

pub use lattice::{coset_index, intersect_cosets, Hnf, LatticeCoset};
pub use region::{ConvexRegion, Shape};

use crate::arith::gcd_u64;

/// First x ≥ lo with x ≡ residue (mod stride).
fn first_in_progression(lo: i64, residue: i64, stride: i64) -> i64 {
    lo + (residue - lo).rem_euclid(stride)
}

/// The points of row y in S ∩ L as (first x, stride, count).
pub fn row_progression(s: &ConvexRegion, l: &LatticeCoset, y: i64) -> Option<(i64, i64, u64)> {
    let (lo, hi) = s.x_range(y)?;
    let (residue, stride) = l.row(y)?;
    let first = first_in_progression(lo, residue, stride);
    if first > hi {
        return None;
    }
    Some((first, stride, ((hi - first) / stride) as u64 + 1))
}

/// Exact number of integer points in S ∩ L.
pub fn count_points(s: &ConvexRegion, l: &LatticeCoset) -> u64 {
    let Some((y0, y1)) = s.y_range() else { return 0 };
    (y0..=y1).filter_map(|y| row_progression(s, l, y)).map(|(_, _, n)| n).sum()
}

/// All integer points of S ∩ L, row by row in increasing y then x.
pub fn enumerate_points<'a>(
    s: &'a ConvexRegion,
    l: &'a LatticeCoset,
) -> impl Iterator<Item = (i64, i64)> + 'a {
    let rows = s.y_range().map(|(a, b)| a..=b).into_iter().flatten();
    rows.flat_map(move |y| {
        let (first, stride, n) = row_progression(s, l, y).unwrap_or((0, 1, 0));
        (0..n as i64).map(move |k| (first + k * stride, y))
    })
}

pub fn is_coprime_point(x: i64, y: i64) -> bool {
    gcd_u64(x.unsigned_abs(), y.unsigned_abs()) == 1
}

/// Points of S ∩ L with gcd(|x|, |y|) = 1; (0, 0) never qualifies.
pub fn enumerate_coprime_points<'a>(
    s: &'a ConvexRegion,
    l: &'a LatticeCoset,
) -> impl Iterator<Item = (i64, i64)> + 'a {
    enumerate_points(s, l).filter(|&(x, y)| is_coprime_point(x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn even_sum() -> LatticeCoset {
        LatticeCoset::new((1, 1), (2, 0), (0, 0)).unwrap()
    }

    fn brute_count(s: &ConvexRegion, l: &LatticeCoset, n: i64) -> u64 {
        let mut c = 0;
        for y in -n..=n {
            for x in -n..=n {
                if s.contains(x, y) && l.contains(x, y) {
                    c += 1;
                }
            }
        }
        c
    }

    #[test]
    fn counts_in_boxes() {
        let b = ConvexRegion::boxed(0.0, 10.0, 0.0, 10.0).unwrap();
        assert_eq!(count_points(&b, &LatticeCoset::whole_plane()), 121);
        assert_eq!(count_points(&b, &even_sum()), 61);
        assert_eq!(brute_count(&b, &even_sum(), 12), 61);
        let empty = ConvexRegion::boxed(1.0, 0.0, 0.0, 5.0).unwrap();
        assert_eq!(count_points(&empty, &LatticeCoset::whole_plane()), 0);
        let gap = ConvexRegion::boxed(0.2, 0.8, 0.0, 5.0).unwrap();
        assert_eq!(count_points(&gap, &LatticeCoset::whole_plane()), 0);
    }

    #[test]
    fn coprime_points() {
        let z2 = LatticeCoset::whole_plane();
        let b = ConvexRegion::boxed(1.0, 4.0, 1.0, 4.0).unwrap();
        let pts: Vec<_> = enumerate_coprime_points(&b, &z2).collect();
        assert_eq!(pts.len(), 11);
        for bad in [(2, 2), (2, 4), (4, 2), (3, 3), (4, 4)] {
            assert!(!pts.contains(&bad));
        }
        let origin = ConvexRegion::boxed(0.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(enumerate_coprime_points(&origin, &z2).count(), 0);
        let disc = ConvexRegion::disc(0.0, 0.0, 1.5).unwrap();
        let mut pts: Vec<_> = enumerate_coprime_points(&disc, &z2).collect();
        pts.sort();
        let mut want = vec![(0, 1), (0, -1), (1, 0), (-1, 0), (1, 1), (1, -1), (-1, 1), (-1, -1)];
        want.sort();
        assert_eq!(pts, want);
    }

    #[test]
    fn coprime_and_shared_partition_the_points() {
        let s: ConvexRegion = "poly:-9,-7;8,-5;9,6;-3,9".parse().unwrap();
        let l: LatticeCoset = "coset:3,0,1,2;1,1".parse().unwrap();
        let all: Vec<_> = enumerate_points(&s, &l).collect();
        let cop: Vec<_> = enumerate_coprime_points(&s, &l).collect();
        let shared = all.iter().filter(|&&(x, y)| !is_coprime_point(x, y)).count();
        assert!(cop.iter().all(|p| all.contains(p)));
        assert_eq!(cop.len() + shared, all.len());
        assert_eq!(all.len() as u64, count_points(&s, &l));
        assert_eq!(all.len() as u64, brute_count(&s, &l, 10));
    }

    fn arb_region() -> impl Strategy<Value = ConvexRegion> {
        prop_oneof![
            (-30.0..30.0f64, 0.0..40.0f64, -30.0..30.0f64, 0.0..40.0f64)
                .prop_map(|(x0, w, y0, h)| ConvexRegion::boxed(x0, x0 + w, y0, y0 + h).unwrap()),
            (-10.0..10.0f64, -10.0..10.0f64, 0.0..25.0f64)
                .prop_map(|(cx, cy, r)| ConvexRegion::disc(cx, cy, r).unwrap()),
            (3usize..9, 1.0..30.0f64, -5.0..5.0f64, -5.0..5.0f64, 0.0..1.0f64).prop_map(
                |(n, r, cx, cy, phase)| {
                    let vs = (0..n)
                        .map(|i| {
                            let t = phase + 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                            (cx + r * t.cos(), cy + r * t.sin())
                        })
                        .collect();
                    ConvexRegion::polygon(vs).unwrap()
                }
            ),
        ]
    }

    fn arb_coset() -> impl Strategy<Value = LatticeCoset> {
        (1i64..7, 0i64..7, 1i64..7, -5i64..5, -5i64..5)
            .prop_map(|(p, q, r, ox, oy)| LatticeCoset::new((p, 0), (q, r), (ox, oy)).unwrap())
    }

    proptest! {
        #[test]
        fn point_count_law(s in arb_region(), l in arb_coset()) {
            let n = s.half_width();
            let count = count_points(&s, &l) as f64;
            let expected = s.area() / l.index() as f64;
            prop_assert!((count - expected).abs() <= 8.0 * (n + 1.0),
                "count {} vs {} for {} / {}", count, expected, s, l);
        }

        #[test]
        fn count_matches_brute_force(s in arb_region(), l in arb_coset()) {
            let n = s.half_width().ceil() as i64 + 1;
            prop_assert_eq!(count_points(&s, &l), brute_count(&s, &l, n));
        }
    }
}
