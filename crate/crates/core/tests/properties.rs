use std::collections::BTreeSet;

use num_rational::Ratio;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use chowla::cut::Cut;
use chowla::experiments::{
    chowla_average, convergence_table, random_cut, random_ideal, sample_primes, table_csv, valued, ExperimentConfig,
};
use chowla::ideal_arith::{CubicField, Ideal, PrimeIdeal};
use chowla::postulates::{bilinear_d, build_sequence, DensityModel};
use chowla::sieve_weights::{brun_pure_weights, buchstab_split, sieve_value};
use chowla::vaughan::{compute_betas, pairing_bound, window_flip, VaughanParams};
use chowla::{Alpha, BinaryCubicForm, ConvexRegion, LatticeCoset};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn primes() -> Vec<PrimeIdeal> {
    sample_primes().unwrap()
}

fn arb_form() -> impl Strategy<Value = BinaryCubicForm> {
    (-9i64..=9, -9i64..=9, -9i64..=9, -9i64..=9)
        .prop_filter_map("nonzero", |(a, b, c, d)| BinaryCubicForm::new(a, b, c, d).ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn content_scales(f in arb_form(), k in -20i64..=20) {
        prop_assume!(k != 0);
        let [a, b, c, d] = f.coefficients();
        let g = BinaryCubicForm::new(k * a, k * b, k * c, k * d).unwrap();
        prop_assert_eq!(g.content(), k.unsigned_abs() * f.content());
    }

    #[test]
    fn zero_end_coefficient_is_reducible(f in arb_form()) {
        let [a, _, _, d] = f.coefficients();
        if a == 0 || d == 0 {
            prop_assert!(!f.is_irreducible());
        }
    }

    #[test]
    fn monic_model_agrees(f in arb_form()) {
        prop_assume!(f.is_irreducible() && f.content() == 1);
        let m = f.monicize().unwrap();
        let a = f.coefficients()[0] as i128;
        for x in -25i64..25 {
            for y in -25i64..25 {
                let (u, v) = m.apply(x, y);
                prop_assert_eq!(a * a * f.evaluate(x, y).unwrap(), m.model.evaluate(u, v).unwrap());
            }
        }
    }

    #[test]
    fn dedekind_completeness(b in -6i64..=6, c in -6i64..=6, d in 1i64..=12) {
        let f = BinaryCubicForm::new(1, b, c, d).unwrap();
        prop_assume!(f.is_irreducible());
        let k = CubicField::build(&f).unwrap();
        for p in [2u64, 3, 5, 7, 11, 13, 101, 997] {
            if k.in_index_bound(p) {
                continue;
            }
            let ef: u32 = k.factor_prime(p).unwrap().iter().map(|q| q.ramification * q.residue_degree).sum();
            prop_assert_eq!(ef, 3);
        }
    }

    #[test]
    fn ideal_multiplicativity(seed in any::<u64>()) {
        let ps = primes();
        let mut r = rng(seed);
        let a = random_ideal(&mut r, &ps, 512, 10u128.pow(20));
        let b = random_ideal(&mut r, &ps, 512, 10u128.pow(20));
        prop_assert_eq!(a.divisors().unwrap().len() as u64, a.tau());
        if a.primes().all(|q| b.exponent(&q) == 0) {
            let ab = a.mul(&b).unwrap();
            prop_assert_eq!(ab.mu(), a.mu() * b.mu());
            prop_assert_eq!(ab.tau(), a.tau() * b.tau());
        }
    }

    #[test]
    fn decomposition_identity(seed in any::<u64>()) {
        let ps = primes();
        let mut r = rng(seed);
        let a = random_ideal(&mut r, &ps, 4096, 10u128.pow(30));
        let mut cuts = [random_cut(&mut r, a.norm() * 2), random_cut(&mut r, a.norm() * 2), random_cut(&mut r, a.norm() * 2)];
        cuts.sort_by(|x, y| x.cmp_cut(y));
        let q: BTreeSet<PrimeIdeal> = a.primes().filter(|_| r.gen_bool(0.4)).collect();
        let params = VaughanParams::new(cuts[0], cuts[1], cuts[2], q).unwrap();
        let t = compute_betas(&a, valued(r.gen()), &params).unwrap();
        prop_assert!(t.identity_holds());
        prop_assert!(t.grouping_holds());
        let real = compute_betas(&a, |i: &Ideal| valued(7)(i) as f64 / 3.0, &params).unwrap();
        prop_assert!(real.identity_holds());
    }

    #[test]
    fn flips_and_pairings(seed in any::<u64>()) {
        let ps = primes();
        let mut r = rng(seed);
        let e = random_ideal(&mut r, &ps, 4096, 10u128.pow(30));
        prop_assume!(!e.is_unit());
        let u = random_cut(&mut r, e.rad().norm() * 2);
        let flip = window_flip(&e, &u).unwrap();
        prop_assert!(flip.holds(), "{:?}", flip);
        let least = e.primes().map(|q| q.norm()).min().unwrap();
        let (lhs, rhs) = pairing_bound(&e, &random_cut(&mut r, e.norm() * 2), &Cut::integer(least)).unwrap();
        prop_assert!(lhs <= rhs);
    }

    #[test]
    fn even_depth_upper_bound(seed in any::<u64>(), half in 1u32..=3) {
        let ps = primes();
        let mut r = rng(seed);
        let pool: Vec<PrimeIdeal> = ps.iter().copied().filter(|q| q.norm() < 120).collect();
        let set: BTreeSet<PrimeIdeal> = pool.iter().copied().filter(|_| r.gen_bool(0.4)).collect();
        let w = brun_pure_weights(&set, Cut::Infinite, 2 * half).unwrap();
        w.check_support().unwrap();
        let b = random_ideal(&mut r, &pool, 1 << 12, 10u128.pow(36));
        prop_assume!(b.omega() <= 12);
        let v = sieve_value(&w, &b).unwrap();
        prop_assert!(v >= 0);
        if b.primes().all(|q| !set.contains(&q)) {
            prop_assert!(v >= 1);
        }
    }

    #[test]
    fn buchstab_difference(seed in any::<u64>()) {
        let ps = primes();
        let mut r = rng(seed);
        let (w, b, lo, hi) = chowla::experiments::buchstab_case(&mut r, &ps).unwrap();
        w.check_support().unwrap();
        let (main, tail) = buchstab_split(&w, &b, lo, hi).unwrap();
        prop_assert_eq!(main - tail, 1);
    }

    #[test]
    fn anti_sieve_reindexing(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (f, x, alpha, y, w) = chowla::experiments::anti_sieve_case(&mut r).unwrap();
        let rec = chowla::sieve_weights::anti_sieve_split(&f, x, alpha, y, &w).unwrap();
        prop_assert!(rec.holds(), "{:?}", rec);
    }

    #[test]
    fn bilinear_against_divisor_sum(seed in any::<u64>(), ell in 1u128..2000) {
        let ps = primes();
        let mut r = rng(seed);
        let a = random_ideal(&mut r, &ps, 256, 10u128.pow(24));
        let c = valued(r.gen());
        let cf = move |i: &Ideal| c(i) as f64;
        for modulus in [1u64, 2, 3, 6] {
            let got = bilinear_d(&cf, modulus, Cut::integer(ell), &a, 6).unwrap();
            let mut want = 0.0;
            for d in a.divisors().unwrap() {
                let coprime = d.primes().all(|q| modulus % q.p != 0);
                if coprime && d.norm() > ell && d.mu() != 0 {
                    want += d.mu() as f64 * cf(&d.quotient_of(&a).unwrap());
                }
            }
            prop_assert_eq!(got, want);
        }
    }
}

fn model_and_sequence(n: f64, coset: &str) -> (DensityModel, chowla::postulates::SequenceAF) {
    let f = BinaryCubicForm::new(1, 0, 0, 2).unwrap();
    let k = CubicField::build(&f).unwrap();
    let l: LatticeCoset = coset.parse().unwrap();
    let seq = build_sequence(&k, &f, &ConvexRegion::square(n), &l, 1).unwrap();
    (DensityModel::new(k, l), seq)
}

#[test]
fn divisible_counts_are_bounded_and_monotone() {
    let (_, seq) = model_and_sequence(25.0, "coset:1,0,0,1;0,0");
    let ps = seq.field.prime_ideals_up_to(60).unwrap();
    let total = seq.a_total(seq.n);
    for q in &ps {
        for e in 1..=3 {
            let d = Ideal::prime_power(*q, e).unwrap();
            assert!(seq.a_divisible(&d, seq.n) <= total);
        }
    }
    let mut last = 0;
    for t in (0..=seq.n).step_by((seq.n / 200).max(1) as usize) {
        let a = seq.a_total(t);
        assert!(a >= last);
        last = a;
    }
    assert_eq!(seq.a_total(seq.n), seq.points - seq.quarantine.len() as u64);
}

#[test]
fn densities_in_range_and_multiplicative() {
    for coset in ["coset:1,0,0,1;0,0", "coset:5,0,0,1;1,0", "coset:7,0,0,1;3,0"] {
        let (model, _) = model_and_sequence(1.0, coset);
        let ps = model.field().prime_ideals_up_to(80).unwrap();
        for (i, a) in ps.iter().enumerate() {
            let ga = model.g(&Ideal::prime(*a)).unwrap();
            assert!(ga >= Ratio::from_integer(0) && ga < Ratio::from_integer(1));
            for b in &ps[i + 1..] {
                if a.p == b.p {
                    continue;
                }
                let ab = Ideal::from_factors(vec![(*a, 1), (*b, 1)]).unwrap();
                let gb = model.g(&Ideal::prime(*b)).unwrap();
                assert_eq!(model.g_direct(&ab).unwrap(), ga * gb, "{coset}: {ab}");
            }
        }
    }
}

#[test]
fn experiment_rows_are_deterministic() {
    let f = BinaryCubicForm::new(1, 0, 0, 2).unwrap();
    for alpha in [Alpha::Mu, Alpha::Liouville, Alpha::OmegaSign] {
        let mut cfg = ExperimentConfig::new(f.clone(), alpha, vec![17, 40, 90]);
        cfg.coprime_only = alpha == Alpha::Liouville;
        let one = convergence_table(&cfg).unwrap();
        cfg.threads = 8;
        let eight = convergence_table(&cfg).unwrap();
        assert_eq!(table_csv(&cfg.n_list, &one).unwrap(), table_csv(&cfg.n_list, &eight).unwrap());
        for (row, &n) in one.iter().zip(&cfg.n_list) {
            assert_eq!(row.as_ref().unwrap(), &chowla_average(&cfg, n).unwrap());
        }
    }
}

#[test]
fn liouville_and_mobius_differ_only_on_non_squarefree_values() {
    let f = BinaryCubicForm::new(1, 0, 0, 2).unwrap();
    for n in [100u64, 300] {
        let s = ConvexRegion::square(n as f64);
        let (sums, _) = chowla::factor_sieve::parity_sums(&f, &s, &LatticeCoset::whole_plane(), false, 1, None).unwrap();
        // count non-squarefree values by factoring each one
        let mut squareful = 0u64;
        for x in -(n as i64)..=n as i64 {
            for y in -(n as i64)..=n as i64 {
                let v = f.evaluate(x, y).unwrap();
                if v != 0 && chowla::factor_sieve::factor_integer(v).unwrap().factors.iter().any(|&(_, e)| e > 1) {
                    squareful += 1;
                }
            }
        }
        assert_eq!(sums.non_squarefree, squareful);
        assert!((sums.liouville - sums.mu).unsigned_abs() <= 2 * squareful);
    }
}
