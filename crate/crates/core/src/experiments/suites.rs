use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::primes_through;
use crate::cubic_form::BinaryCubicForm;
use crate::cut::Cut;
use crate::error::{Error, Result};
use crate::factor_sieve::{integer_parities, sieve_grid, Alpha};
use crate::ideal_arith::{CubicField, Ideal, PrimeIdeal, RootTag};
use crate::postulates::{build_sequence, check_postulates_123, postulate_report, remainder_law, write_report, DensityModel};
use crate::region_lattice::{ConvexRegion, LatticeCoset};
use crate::sieve_weights::{
    anti_sieve_split, brun_pure_weights, buchstab_split, default_brun_depth, int_brun_weights, IntWeights, SieveWeights,
};
use crate::vaughan::{compute_betas, pairing_bound, window_flip, VaughanParams};

/// Result of one randomized or exhaustive check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: String,
    pub checked: u64,
    /// The first counterexample.
    pub failure: Option<String>,
}

impl CheckOutcome {
    fn new(name: &str) -> Self {
        CheckOutcome { name: name.into(), checked: 0, failure: None }
    }

    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) -> bool {
        self.checked += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(what());
        }
        ok
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.failure {
            None => write!(f, "{}: {} checked, ok", self.name, self.checked),
            Some(e) => write!(f, "{}: {} checked, FAILED at {e}", self.name, self.checked),
        }
    }
}

/// Prime ideals of x³ + 2y³ with norm ≤ 400, used to draw random ideals.
pub fn sample_primes() -> Result<Vec<PrimeIdeal>> {
    let field = CubicField::build(&BinaryCubicForm::new(1, 0, 0, 2)?)?;
    field.prime_ideals_up_to(400)
}

/// A random ideal over `primes` with τ ≤ max_tau and norm ≤ max_norm.
pub fn random_ideal(rng: &mut impl Rng, primes: &[PrimeIdeal], max_tau: u64, max_norm: u128) -> Ideal {
    loop {
        let k = rng.gen_range(0..=6usize).min(primes.len());
        let chosen: Vec<PrimeIdeal> = primes.choose_multiple(rng, k).copied().collect();
        let factors = chosen
            .into_iter()
            .map(|q| (q, if rng.gen_bool(0.6) { 1 } else { rng.gen_range(2..=5) }))
            .collect();
        if let Ok(a) = Ideal::from_factors(factors) {
            if a.tau() <= max_tau && a.norm() <= max_norm {
                return a;
            }
        }
    }
}

/// A random cut point in [1, scale]: an integer, a small-denominator
/// rational or a rounded real, and occasionally +∞.
pub fn random_cut(rng: &mut impl Rng, scale: u128) -> Cut {
    let scale = scale.max(2);
    match rng.gen_range(0..20) {
        0 => Cut::Infinite,
        1..=7 => Cut::integer(rng.gen_range(1..=scale)),
        8..=13 => {
            let den = rng.gen_range(1..=7u128);
            Cut::ratio(rng.gen_range(den..=scale.saturating_mul(den)), den).expect("nonzero denominator")
        }
        _ => {
            let t: f64 = rng.gen_range(0.0..(scale as f64).ln());
            Cut::from_f64(t.exp()).expect("finite")
        }
    }
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A fixed pseudo-random function on ideals with values in [−1000, 1000].
pub fn valued(seed: u64) -> impl Fn(&Ideal) -> i64 + Copy {
    move |a: &Ideal| {
        let mut h = mix(seed);
        for &(q, e) in a.factors() {
            let tag = match q.tag {
                RootTag::Root(r) => r,
                RootTag::Residue(d) => u64::MAX - d as u64,
            };
            h = mix(h ^ q.p);
            h = mix(h ^ tag);
            h = mix(h ^ e as u64);
        }
        (h % 2001) as i64 - 1000
    }
}

fn sorted_cuts(rng: &mut impl Rng, scale: u128) -> (Cut, Cut, Cut) {
    let mut v = [random_cut(rng, scale), random_cut(rng, scale), random_cut(rng, scale)];
    v.sort_by(|a, b| a.cmp_cut(b));
    (v[0], v[1], v[2])
}

/// The seven-term decomposition and its two groupings on random instances.
pub fn check_vaughan(rng: &mut impl Rng, primes: &[PrimeIdeal], count: usize) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("vaughan-identity");
    for _ in 0..count {
        let a = random_ideal(rng, primes, 4096, 10u128.pow(30));
        let (y, u, w) = sorted_cuts(rng, a.norm().saturating_mul(2));
        let mut q: BTreeSet<PrimeIdeal> = a.primes().filter(|_| rng.gen_bool(0.3)).collect();
        q.extend(primes.iter().filter(|_| rng.gen_bool(0.02)));
        let params = VaughanParams::new(y, u, w, q)?;
        let h = valued(rng.gen());
        let t = compute_betas(&a, h, &params)?;
        let ok = t.identity_holds() && t.grouping_holds();
        if !out.record(ok, || format!("a = {a}, y = {y}, u = {u}, w = {w}: {t:?}")) {
            break;
        }
    }
    Ok(out)
}

pub fn check_window_flips(rng: &mut impl Rng, primes: &[PrimeIdeal], count: usize) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("window-flip");
    for _ in 0..count {
        let e = loop {
            let e = random_ideal(rng, primes, 4096, 10u128.pow(30));
            if !e.is_unit() {
                break e;
            }
        };
        let u = random_cut(rng, e.rad().norm().saturating_mul(2));
        let r = window_flip(&e, &u)?;
        if !out.record(r.holds(), || format!("e = {e}, u = {u}: {r:?}")) {
            break;
        }
    }
    Ok(out)
}

pub fn check_pairings(rng: &mut impl Rng, primes: &[PrimeIdeal], count: usize) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("pairing-bound");
    for _ in 0..count {
        let e = loop {
            let e = random_ideal(rng, primes, 4096, 10u128.pow(30));
            if !e.is_unit() {
                break e;
            }
        };
        let least = e.primes().map(|q| q.norm()).min().expect("non-unit");
        let l = Cut::integer(least + rng.gen_range(0..=200));
        let y = random_cut(rng, e.norm().saturating_mul(2));
        let (lhs, rhs) = pairing_bound(&e, &y, &l)?;
        if !out.record(lhs <= rhs, || format!("e = {e}, y = {y}, l = {l}: {lhs} > {rhs}")) {
            break;
        }
    }
    Ok(out)
}

/// Brun weights over a random sieving set opened on a random window, and a
/// random ideal to sieve.
pub fn buchstab_case(rng: &mut impl Rng, primes: &[PrimeIdeal]) -> Result<(SieveWeights, Ideal, Cut, Cut)> {
    let pool: Vec<PrimeIdeal> = primes.iter().copied().filter(|q| q.norm() <= 200).collect();
    let set: BTreeSet<PrimeIdeal> = pool.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
    let hi = Cut::integer(rng.gen_range(10..=100_000));
    let lo = Cut::ratio(rng.gen_range(2..=60), 2)?;
    let depth = match rng.gen_range(0..4) {
        0 => default_brun_depth(hi.to_f64()),
        k => 2 * k,
    };
    let w = brun_pure_weights(&set, hi, depth)?.restrict(lo, hi);
    let b = random_ideal(rng, &pool, 4096, 10u128.pow(30));
    Ok((w, b, lo, hi))
}

/// Corruptions the suites can inject to show they catch them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// λ_(1) = 0 in the opened sieve.
    Lambda,
}

impl FromStr for Fault {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "lambda" => Ok(Fault::Lambda),
            other => Err(Error::Parse(format!("unknown fault '{other}'"))),
        }
    }
}

pub fn check_buchstab(rng: &mut impl Rng, primes: &[PrimeIdeal], count: usize, fault: Option<Fault>) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("buchstab-split");
    for _ in 0..count {
        let (mut w, b, lo, hi) = buchstab_case(rng, primes)?;
        if fault == Some(Fault::Lambda) {
            w.set_weight(Ideal::unit(), 0);
        }
        let (main, tail) = buchstab_split(&w, &b, lo, hi)?;
        if !out.record(main - tail == 1, || format!("b = {b}: main {main} - tail {tail} != 1")) {
            break;
        }
    }
    Ok(out)
}

/// A sparse random table F on pairs with ab ≤ x, with window parameters and
/// weights vanishing on (1, y²].
pub fn anti_sieve_case(rng: &mut impl Rng) -> Result<(BTreeMap<(u64, u64), i64>, u64, f64, f64, IntWeights)> {
    let x = rng.gen_range(100..=10_000u64);
    let alpha = rng.gen_range(0.1..0.9);
    let yfun = rng.gen_range(1.0..4.0);
    let primes = primes_through(rng.gen_range(3..=60));
    let mut w = int_brun_weights(&primes, x, 2 * rng.gen_range(1..=3))?;
    let y2 = Cut::from_f64(yfun * yfun)?;
    w.weights.retain(|&d, _| d == 1 || y2.below(d as u128));
    let mut f = BTreeMap::new();
    for _ in 0..rng.gen_range(20..=200) {
        let a = rng.gen_range(1..=x);
        let b = rng.gen_range(1..=x / a);
        f.insert((a, b), rng.gen_range(-3..=3));
    }
    Ok((f, x, alpha, yfun, w))
}

pub fn check_anti_sieve(rng: &mut impl Rng, count: usize) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("anti-sieve");
    for _ in 0..count {
        let (f, x, alpha, yfun, w) = anti_sieve_case(rng)?;
        let r = anti_sieve_split(&f, x, alpha, yfun, &w)?;
        if !out.record(r.holds(), || format!("x = {x}, alpha = {alpha}, y = {yfun}: {r:?}")) {
            break;
        }
    }
    Ok(out)
}

/// Smallest prime factor of every n ≤ limit (spf[0] = spf[1] = 0).
pub fn spf_table(limit: usize) -> Vec<u32> {
    let mut spf = vec![0u32; limit + 1];
    for i in 2..=limit {
        if spf[i] == 0 {
            let mut j = i;
            while j <= limit {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

fn spf_parity(spf: &[u32], mut n: usize) -> [i8; 3] {
    let (mut omega, mut big, mut square) = (0u32, 0u32, false);
    while n > 1 {
        let p = spf[n] as usize;
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        omega += 1;
        big += e;
        square |= e > 1;
    }
    let sign = |k: u32| if k % 2 == 0 { 1 } else { -1 };
    [if square { 0 } else { sign(omega) }, sign(big), sign(omega)]
}

/// μ, λ and (−1)^ω from the integer sieve path against a smallest prime
/// factor table for all n ≤ limit.
pub fn check_parity_oracle(limit: u64, threads: usize) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("parity-oracle");
    let spf = spf_table(limit as usize);
    for (k, alpha) in [Alpha::Mu, Alpha::Liouville, Alpha::OmegaSign].into_iter().enumerate() {
        let row = integer_parities(limit, alpha, threads)?;
        if row.len() as u64 != limit {
            out.record(false, || format!("{alpha}: {} values for {limit} integers", row.len()));
            break;
        }
        for (i, &v) in row.iter().enumerate() {
            let want = spf_parity(&spf, i + 1)[k];
            if !out.record(v == want, || format!("{alpha}({}) = {v}, oracle {want}", i + 1)) {
                return Ok(out);
            }
        }
    }
    Ok(out)
}

fn trial_factor(mut n: u128) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u128;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d as u64, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n as u64, 1));
    }
    out
}

/// Grid factorizations of x³ + 2y³ on [−half, half]² against trial division.
pub fn check_grid_oracle(half: i64, threads: usize) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("grid-oracle");
    let f = BinaryCubicForm::new(1, 0, 0, 2)?;
    let s = ConvexRegion::square(half as f64);
    let table = sieve_grid(&f, &s, &LatticeCoset::whole_plane(), false, threads)?;
    let expected = (2 * half as u64 + 1).pow(2);
    if !out.record(table.len() as u64 == expected, || format!("{} points, expected {expected}", table.len())) {
        return Ok(out);
    }
    for ((&(x, y), &v), fac) in table.points.iter().zip(&table.values).zip(&table.factorizations) {
        let direct = f.evaluate(x, y)?;
        let ok = if direct == 0 {
            v == 0 && fac.value() == Some(0)
        } else {
            v == direct && fac.factors == trial_factor(direct.unsigned_abs()) && fac.value() == Some(direct)
        };
        if !out.record(ok, || format!("({x},{y}): f = {direct}, grid {fac:?}")) {
            break;
        }
    }
    Ok(out)
}

/// The (name, form, coset) triples the postulate suite runs on.
pub fn postulate_configs() -> Result<Vec<(String, BinaryCubicForm, LatticeCoset)>> {
    Ok(vec![
        ("x3+2y3".into(), BinaryCubicForm::new(1, 0, 0, 2)?, LatticeCoset::whole_plane()),
        ("x3+2y3-mod5".into(), BinaryCubicForm::new(1, 0, 0, 2)?, "coset:5,0,0,1;1,0".parse()?),
        ("x3+xy2+y3".into(), BinaryCubicForm::new(1, 0, 1, 1)?, LatticeCoset::whole_plane()),
    ])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Identities,
    Postulates,
    Sieve,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "identities" => Ok(Suite::Identities),
            "postulates" => Ok(Suite::Postulates),
            "sieve" => Ok(Suite::Sieve),
            "all" => Ok(Suite::All),
            other => Err(Error::Parse(format!("unknown suite '{other}'"))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Identities => "identities",
            Suite::Postulates => "postulates",
            Suite::Sieve => "sieve",
            Suite::All => "all",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    pub threads: usize,
    pub fault: Option<Fault>,
    pub postulate_bound: u64,
    pub box_half: i64,
    pub parity_limit: u64,
    /// Random instances per identity check.
    pub instances: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: 20_240_601,
            threads: 1,
            fault: None,
            postulate_bound: 10_000,
            box_half: 100,
            parity_limit: 1_000_000,
            instances: 500,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub checks: Vec<CheckOutcome>,
    pub reports: Vec<PathBuf>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }

    pub fn first_failure(&self) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| !c.passed())
    }
}

fn identities(opts: &SuiteOptions) -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let primes = sample_primes()?;
    Ok(vec![
        check_vaughan(&mut rng, &primes, 2 * opts.instances)?,
        check_window_flips(&mut rng, &primes, opts.instances)?,
        check_pairings(&mut rng, &primes, opts.instances)?,
    ])
}

fn sieve(opts: &SuiteOptions) -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 1);
    let primes = sample_primes()?;
    Ok(vec![
        check_buchstab(&mut rng, &primes, opts.instances, opts.fault)?,
        check_anti_sieve(&mut rng, (opts.instances / 5).max(1))?,
        check_parity_oracle(opts.parity_limit, opts.threads)?,
        check_grid_oracle(50, opts.threads)?,
    ])
}

fn postulates(opts: &SuiteOptions, dir: &Path) -> Result<(Vec<CheckOutcome>, Vec<PathBuf>)> {
    let mut checks = Vec::new();
    let mut reports = Vec::new();
    for (name, form, coset) in postulate_configs()? {
        let field = CubicField::build(&form)?;
        let model = DensityModel::new(field.clone(), coset.clone());
        let rep = check_postulates_123(&model, opts.postulate_bound)?;
        let total: u64 = rep.checked.iter().sum();
        checks.push(CheckOutcome {
            name: format!("postulates-{name}"),
            checked: total,
            failure: rep.failures.first().cloned(),
        });
        let s = ConvexRegion::square(opts.box_half as f64);
        let seq = build_sequence(&field, &form, &s, &coset, opts.threads)?;
        let law = remainder_law(&seq, &model, 1000, opts.box_half as u64)?;
        checks.push(CheckOutcome {
            name: format!("remainder-{name}"),
            checked: law.tested as u64,
            failure: (!law.holds()).then(|| {
                format!("|r| = {} at {} exceeds {}", law.max_abs, law.worst.as_ref().map_or("-".into(), |w| w.to_string()), law.bound)
            }),
        });
        let rows = postulate_report(&seq, &model, opts.postulate_bound.min(1000), opts.box_half as u64)?;
        let path = dir.join(format!("postulates_{name}.csv"));
        write_report(&path, &rows)?;
        reports.push(path);
    }
    Ok((checks, reports))
}

fn write_summary(dir: &Path, outcomes: &[SuiteOutcome]) -> Result<PathBuf> {
    let path = dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["suite", "check", "checked", "status", "detail"])?;
    for o in outcomes {
        for c in &o.checks {
            w.write_record([
                o.suite.to_string(),
                c.name.clone(),
                c.checked.to_string(),
                if c.passed() { "PASS".into() } else { "FAIL".into() },
                c.failure.clone().unwrap_or_default(),
            ])?;
        }
    }
    w.flush()?;
    Ok(path)
}

/// Runs the named suite(s), writing reports to `dir`. A failing check is
/// reported in the outcome, and its first counterexample is also written to
/// `counterexample.txt`.
pub fn run_suite(suite: Suite, dir: &Path, opts: &SuiteOptions) -> Result<Vec<SuiteOutcome>> {
    std::fs::create_dir_all(dir)?;
    let parts = match suite {
        Suite::All => vec![Suite::Identities, Suite::Sieve, Suite::Postulates],
        s => vec![s],
    };
    let mut outcomes = Vec::new();
    for s in parts {
        let (checks, reports) = match s {
            Suite::Identities => (identities(opts)?, Vec::new()),
            Suite::Sieve => (sieve(opts)?, Vec::new()),
            Suite::Postulates => postulates(opts, dir)?,
            Suite::All => unreachable!(),
        };
        outcomes.push(SuiteOutcome { suite: s, checks, reports });
    }
    let summary = write_summary(dir, &outcomes)?;
    if let Some(first) = outcomes.iter().find_map(|o| o.first_failure()) {
        std::fs::write(dir.join("counterexample.txt"), format!("{first}\n"))?;
    }
    if let Some(o) = outcomes.last_mut() {
        o.reports.push(summary);
    }
    Ok(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn random_ideals_respect_caps() {
        let primes = sample_primes().unwrap();
        let mut r = rng();
        for _ in 0..200 {
            let a = random_ideal(&mut r, &primes, 64, 10u128.pow(12));
            assert!(a.tau() <= 64 && a.norm() <= 10u128.pow(12));
        }
    }

    #[test]
    fn checks_pass_on_small_runs() {
        let primes = sample_primes().unwrap();
        let mut r = rng();
        assert!(check_vaughan(&mut r, &primes, 30).unwrap().passed());
        assert!(check_window_flips(&mut r, &primes, 50).unwrap().passed());
        assert!(check_pairings(&mut r, &primes, 50).unwrap().passed());
        assert!(check_buchstab(&mut r, &primes, 30, None).unwrap().passed());
        assert!(check_anti_sieve(&mut r, 3).unwrap().passed());
        assert!(check_parity_oracle(5000, 2).unwrap().passed());
        assert!(check_grid_oracle(8, 1).unwrap().passed());
    }

    #[test]
    fn injected_fault_is_caught() {
        let primes = sample_primes().unwrap();
        let out = check_buchstab(&mut rng(), &primes, 30, Some(Fault::Lambda)).unwrap();
        assert!(!out.passed());
        assert!(out.failure.unwrap().starts_with("b = "));
        assert_eq!(out.checked, 1);
    }

    #[test]
    fn spf_oracle() {
        let spf = spf_table(30);
        assert_eq!(spf_parity(&spf, 1), [1, 1, 1]);
        assert_eq!(spf_parity(&spf, 12), [0, -1, 1]);
        assert_eq!(spf_parity(&spf, 30), [-1, -1, -1]);
        assert_eq!(spf[29], 29);
    }

    #[test]
    fn names_parse() {
        for s in ["identities", "postulates", "sieve", "all"] {
            assert_eq!(s.parse::<Suite>().unwrap().to_string(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
        assert_eq!("lambda".parse::<Fault>().unwrap(), Fault::Lambda);
    }

    #[test]
    fn small_suite_run_writes_reports() {
        let dir = tempfile::tempdir().unwrap();
        let opts = SuiteOptions { instances: 20, parity_limit: 2000, postulate_bound: 200, box_half: 20, ..Default::default() };
        let out = run_suite(Suite::All, dir.path(), &opts).unwrap();
        assert_eq!(out.len(), 3);
        assert!(out.iter().all(|o| o.passed()), "{out:?}");
        for (name, _, _) in postulate_configs().unwrap() {
            assert!(dir.path().join(format!("postulates_{name}.csv")).exists());
        }
        assert!(dir.path().join("summary.csv").exists());
        assert!(!dir.path().join("counterexample.txt").exists());
        let bad = SuiteOptions { fault: Some(Fault::Lambda), ..opts };
        let out = run_suite(Suite::Sieve, dir.path(), &bad).unwrap();
        assert!(!out[0].passed());
        let text = std::fs::read_to_string(dir.path().join("counterexample.txt")).unwrap();
        assert!(text.contains("buchstab-split") && text.contains("b = "));
    }
}
