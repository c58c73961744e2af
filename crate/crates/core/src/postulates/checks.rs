use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::arith::{gcd_u64, primes_through};
use crate::cut::Cut;
use crate::error::{Error, Result};
use crate::ideal_arith::{Ideal, PrimeIdeal};

use super::density::{Density, DensityModel};
use super::{density_f64, ideals_up_to, SequenceAF};

/// Which alternative of the first postulate a prime dividing D₁ follows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Zero,
    Power,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Zero => "zero",
            Branch::Power => "power",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchRecord {
    pub prime: PrimeIdeal,
    pub branch: Branch,
    pub exponents: u32,
}

#[derive(Clone, Debug, Default)]
pub struct PostulateReport {
    /// Instances checked for each of the three postulates.
    pub checked: [u64; 3],
    pub failures: Vec<String>,
    pub branches: Vec<BranchRecord>,
    /// Primes skipped because they divide D₀.
    pub skipped: u64,
    pub moduli_coprime: bool,
}

impl PostulateReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn passed_postulate(&self, k: usize) -> bool {
        let tag = format!("P{k}:");
        !self.failures.iter().any(|f| f.starts_with(&tag))
    }

    fn expect(&mut self, k: usize, ok: bool, what: impl FnOnce() -> String) {
        self.checked[k - 1] += 1;
        if !ok {
            self.failures.push(format!("P{k}: {}", what()));
        }
    }
}

fn power_density(p: u64, a: u32) -> Density {
    Ratio::new(1, (p as i128).pow(a))
}

/// Checks the first three postulates exactly over every prime ideal of norm
/// ≤ bound (bound ≤ 10⁴).
pub fn check_postulates_123(model: &DensityModel, bound: u64) -> Result<PostulateReport> {
    if bound > 10_000 {
        return Err(Error::Invalid(format!("prime norm bound {bound} above 10^4")));
    }
    let field = model.field();
    let (d0, d1) = (model.d0(), model.d1());
    let mut rep = PostulateReport { moduli_coprime: model.moduli_coprime(), ..Default::default() };
    let mut by_p: BTreeMap<u64, Vec<PrimeIdeal>> = BTreeMap::new();
    for p in primes_through(bound) {
        if field.in_index_bound(p) {
            rep.skipped += 1;
            continue;
        }
        by_p.insert(p, field.factor_prime(p)?);
    }

    for (&p, primes) in &by_p {
        if d0 % p == 0 {
            rep.skipped += 1;
            continue;
        }
        for &q in primes {
            let qn = q.norm();
            let max_a = (1..).take_while(|&a| a == 1 || qn.pow(a) <= bound as u128).last().unwrap_or(1);
            if q.residue_degree > 1 {
                for a in 1..=max_a {
                    let g = model.g(&Ideal::prime_power(q, a)?)?;
                    rep.expect(1, g.is_zero(), || format!("g({q}^{a}) = {g}, expected 0"));
                }
                continue;
            }
            if d1 % p != 0 {
                for a in 1..=max_a {
                    let g = model.g(&Ideal::prime_power(q, a)?)?;
                    let want = power_density(p, a) / (Ratio::one() + power_density(p, 1));
                    rep.expect(1, g == want, || format!("g({q}^{a}) = {g}, expected {want}"));
                }
                continue;
            }
            let mut seen: Option<Branch> = None;
            for a in 1..=max_a {
                let g = model.g(&Ideal::prime_power(q, a)?)?;
                let b = if g.is_zero() {
                    Some(Branch::Zero)
                } else if g == power_density(p, a) {
                    Some(Branch::Power)
                } else {
                    None
                };
                let consistent = b.is_some() && (seen.is_none() || seen == b);
                rep.expect(1, consistent, || format!("g({q}^{a}) = {g} fits neither alternative consistently"));
                seen = seen.or(b);
            }
            if let Some(branch) = seen {
                rep.branches.push(BranchRecord { prime: q, branch, exponents: max_a });
            }
        }
    }

    // multiplicativity across coprime norms, against the direct density
    let all: Vec<PrimeIdeal> = by_p.values().flatten().copied().filter(|q| q.norm() <= bound as u128).collect();
    let mut partners: Vec<Ideal> = Vec::new();
    for q in all.iter().filter(|q| q.p <= 7) {
        partners.push(Ideal::prime(*q));
        partners.push(Ideal::prime_power(*q, 2)?);
    }
    let small: Vec<Ideal> = all.iter().filter(|q| q.norm() <= 100).map(|&q| Ideal::prime(q)).collect();
    let mut pairs: Vec<(Ideal, Ideal)> = Vec::new();
    for q in &all {
        for b in &partners {
            if b.factors()[0].0.p != q.p {
                pairs.push((Ideal::prime(*q), b.clone()));
            }
        }
    }
    for (i, a) in small.iter().enumerate() {
        for b in &small[i + 1..] {
            if a.factors()[0].0.p != b.factors()[0].0.p {
                pairs.push((a.clone(), b.clone()));
            }
        }
    }
    for (a, b) in pairs {
        let ab = a.mul(&b)?;
        let lhs = model.g_direct(&ab)?;
        let rhs = model.g(&a)? * model.g(&b)?;
        rep.expect(2, lhs == rhs, || format!("g({ab}) = {lhs} but g({a})g({b}) = {rhs}"));
    }

    // distinct primes above one rational prime
    let extra = all.iter().find(|q| q.p > 7 && d0 % q.p != 0).copied();
    for (&p, primes) in &by_p {
        if d0 % p == 0 {
            continue;
        }
        for i in 0..primes.len() {
            for j in i + 1..primes.len() {
                let (p1, p2) = (primes[i], primes[j]);
                let base = Ideal::from_factors(vec![(p1, 1), (p2, 1)])?;
                if base.norm() > (bound as u128).pow(2) {
                    continue;
                }
                let mut cofactors = vec![Ideal::unit(), Ideal::prime(p1)];
                if let Some(e) = extra.filter(|e| e.p != p) {
                    cofactors.push(Ideal::prime(e));
                }
                for c in cofactors {
                    let d = base.mul(&c)?;
                    let g = model.g_direct(&d)?;
                    rep.expect(3, g.is_zero(), || format!("g({d}) = {g}, expected 0"));
                }
                let g = model.g(&base)?;
                rep.expect(3, g.is_zero(), || format!("g({base}) = {g}, expected 0"));
            }
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug)]
pub struct RemainderLaw {
    pub bound: f64,
    pub max_abs: f64,
    pub worst: Option<Ideal>,
    pub tested: usize,
}

impl RemainderLaw {
    pub fn holds(&self) -> bool {
        self.max_abs <= self.bound
    }
}

/// max |r_𝔡| over ideals of prime-power norm ≤ limit, against 8·(2N+1).
pub fn remainder_law(seq: &SequenceAF, model: &DensityModel, limit: u64, half_width: u64) -> Result<RemainderLaw> {
    let primes = seq.field.prime_ideals_up_to(limit)?;
    let counts = seq.divisor_counts(limit as u128)?;
    let total = seq.a_total(seq.n) as f64;
    let mut law = RemainderLaw { bound: 8.0 * (2 * half_width + 1) as f64, max_abs: 0.0, worst: None, tested: 0 };
    for d in ideals_up_to(&primes, limit as u128) {
        if d.is_unit() || !d.factors().iter().all(|(q, _)| q.p == d.factors()[0].0.p) {
            continue;
        }
        let r = counts.get(&d).copied().unwrap_or(0) as f64 - density_f64(model.g(&d)?) * total;
        law.tested += 1;
        if r.abs() > law.max_abs {
            law.max_abs = r.abs();
            law.worst = Some(d);
        }
    }
    Ok(law)
}

fn log_n(seq: &SequenceAF) -> f64 {
    (seq.n.max(3) as f64).ln()
}

fn tau_weight(d: &Ideal, c1: f64) -> f64 {
    (d.tau() as f64).powf(c1)
}

/// Σ τ(𝔞)^{C₁}|r_𝔞| over N𝔞 ≤ n^{2/3}/(log n)^ϰ, divided by A(n).
pub fn measure_type1(seq: &SequenceAF, model: &DensityModel, kappa: f64, c1: f64) -> Result<f64> {
    let total = seq.a_total(seq.n);
    if total == 0 {
        return Ok(0.0);
    }
    let cutoff = (seq.n as f64).powf(2.0 / 3.0) / log_n(seq).powf(kappa);
    if cutoff < 1.0 {
        return Ok(0.0);
    }
    let limit = cutoff.floor() as u64;
    let primes = seq.field.prime_ideals_up_to(limit)?;
    let counts = seq.divisor_counts(limit as u128)?;
    let mut sum = 0.0;
    for d in ideals_up_to(&primes, limit as u128) {
        let r = counts.get(&d).copied().unwrap_or(0) as f64 - density_f64(model.g(&d)?) * total as f64;
        sum += tau_weight(&d, c1) * r.abs();
    }
    Ok(sum / total as f64)
}

/// Σ_{N𝔡 > threshold} τ(𝔡)^{C₁} A_{𝔡²}(n), divided by A(n).
pub fn measure_square(seq: &SequenceAF, threshold: f64, c1: f64) -> Result<f64> {
    let total = seq.a_total(seq.n);
    if total == 0 {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for (ideal, &c) in &seq.support {
        let half = Ideal::from_factors(ideal.factors().iter().map(|&(q, e)| (q, e / 2)).collect())?;
        for d in half.divisors()? {
            if d.norm() as f64 > threshold {
                sum += tau_weight(&d, c1) * c as f64;
            }
        }
    }
    Ok(sum / total as f64)
}

/// Σ_{N𝔞 ≤ n/(log n)^ϰ} τ(𝔞)^{C₁} a_𝔞, divided by A(n).
pub fn measure_crude(seq: &SequenceAF, kappa: f64, c1: f64) -> Result<f64> {
    let total = seq.a_total(seq.n);
    if total == 0 {
        return Ok(0.0);
    }
    let cutoff = seq.n as f64 / log_n(seq).powf(kappa);
    let sum: f64 = seq
        .support
        .iter()
        .filter(|(i, _)| i.norm() as f64 <= cutoff)
        .map(|(i, &c)| tau_weight(i, c1) * c as f64)
        .sum();
    Ok(sum / total as f64)
}

/// d(𝔞) = Σ_{𝔡 | 𝔞, gcd(N𝔡, D) = 1, N𝔡 > ℓ} c(𝔞/𝔡) μ(𝔡).
pub fn bilinear_d(c: &dyn Fn(&Ideal) -> f64, modulus: u64, ell: Cut, a: &Ideal, d0d1: u64) -> Result<f64> {
    if modulus == 0 || d0d1 % modulus != 0 {
        return Err(Error::Invalid(format!("{modulus} does not divide D0·D1 = {d0d1}")));
    }
    let mut sum = 0.0;
    for (d, mu) in a.squarefree_divisors() {
        let coprime = d.primes().all(|q| gcd_u64(q.p, modulus) == 1);
        if coprime && ell.below(d.norm()) {
            let rest = d.quotient_of(a).expect("divisor");
            sum += mu as f64 * c(&rest);
        }
    }
    Ok(sum)
}

/// Σ b(𝔞) d(𝔟) a_{𝔞𝔟} over factorizations of the support with v ≤ N𝔟 < 2v,
/// divided by A(n).
pub fn measure_bilinear(
    seq: &SequenceAF,
    b: &dyn Fn(&Ideal) -> f64,
    c: &dyn Fn(&Ideal) -> f64,
    modulus: u64,
    ell: Cut,
    v: u128,
) -> Result<f64> {
    let d0d1 = seq.d0.checked_mul(seq.d1).ok_or_else(|| Error::Range("D0·D1 overflows".into()))?;
    if modulus == 0 || d0d1 % modulus != 0 {
        return Err(Error::Invalid(format!("{modulus} does not divide D0·D1 = {d0d1}")));
    }
    let total = seq.a_total(seq.n);
    if total == 0 {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for (ideal, &count) in &seq.support {
        for second in ideal.divisors()? {
            let nb = second.norm();
            if nb < v || nb >= 2 * v {
                continue;
            }
            let first = second.quotient_of(ideal).expect("divisor");
            sum += b(&first) * bilinear_d(c, modulus, ell, &second, d0d1)? * count as f64;
        }
    }
    Ok(sum / total as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub postulate: String,
    pub params: String,
    pub measured: String,
    pub status: String,
}

impl ReportRow {
    fn new(postulate: &str, params: String, measured: String, status: &str) -> Self {
        ReportRow { postulate: postulate.into(), params, measured, status: status.into() }
    }
}

pub const KAPPA_GRID: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 5.0];

fn status(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Exact rows for postulates 1–3 and the remainder law, measured rows for
/// the rest.
pub fn postulate_report(seq: &SequenceAF, model: &DensityModel, bound: u64, half_width: u64) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    let rep = check_postulates_123(model, bound)?;
    for k in 1..=3 {
        rows.push(ReportRow::new(
            &format!("P{k}"),
            format!("B={bound}"),
            format!("{} checked", rep.checked[k - 1]),
            status(rep.passed_postulate(k)),
        ));
    }
    for br in &rep.branches {
        rows.push(ReportRow::new("P1-branch", br.prime.to_string(), br.branch.to_string(), "NA"));
    }
    rows.push(ReportRow::new(
        "D0D1-coprime",
        format!("D0={};D1={}", model.d0(), model.d1()),
        rep.moduli_coprime.to_string(),
        "NA",
    ));
    let law = remainder_law(seq, model, 1000.min(bound), half_width)?;
    rows.push(ReportRow::new(
        "remainder",
        format!("norm<=1000;N={half_width}"),
        format!("{:.3}", law.max_abs),
        status(law.holds()),
    ));
    for kappa in KAPPA_GRID {
        for c1 in [0.0, 1.0] {
            let m = measure_type1(seq, model, kappa, c1)?;
            rows.push(ReportRow::new("P4", format!("kappa={kappa};C1={c1}"), format!("{m:.6}"), "NA"));
        }
    }
    let ln = log_n(seq);
    for kappa in KAPPA_GRID {
        let m = measure_square(seq, ln.powf(kappa), 0.0)?;
        rows.push(ReportRow::new("P5", format!("kappa={kappa};C1=0"), format!("{m:.6}"), "NA"));
    }
    for kappa in KAPPA_GRID {
        let m = measure_crude(seq, kappa, 1.0)?;
        rows.push(ReportRow::new("P6", format!("kappa={kappa};C1=1"), format!("{m:.6}"), "NA"));
    }
    let one = |_: &Ideal| 1.0;
    let v = (seq.n as f64).cbrt().max(1.0) as u128;
    let ell = Cut::integer(v);
    let m = measure_bilinear(seq, &one, &one, 1, ell, v)?;
    rows.push(ReportRow::new("P7", format!("b=1;c=1;D=1;ell={v};v={v}"), format!("{m:.6}"), "NA"));
    let rho = (model.d1() as f64).ln() / ln.ln();
    rows.push(ReportRow::new("rho", format!("D1={}", model.d1()), format!("{rho:.6}"), "NA"));
    Ok(rows)
}

pub fn write_report(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
    w.write_record(["postulate", "params", "measured", "status"]).map_err(|e| Error::Io(e.to_string()))?;
    for r in rows {
        w.write_record([&r.postulate, &r.params, &r.measured, &r.status]).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubic_form::BinaryCubicForm;
    use crate::ideal_arith::CubicField;
    use crate::postulates::build_sequence;
    use crate::region_lattice::{ConvexRegion, LatticeCoset};

    fn model(coset: &str) -> DensityModel {
        let k = CubicField::build(&BinaryCubicForm::new(1, 0, 0, 2).unwrap()).unwrap();
        DensityModel::new(k, coset.parse().unwrap())
    }

    #[test]
    fn postulates_small_bound() {
        let m = model("coset:1,0,0,1;0,0");
        let rep = check_postulates_123(&m, 100).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures);
        assert!(rep.checked.iter().all(|&c| c > 0));
        assert!(rep.branches.is_empty());
    }

    #[test]
    fn postulate_instances() {
        let m = model("coset:1,0,0,1;0,0");
        let k = m.field();
        // 31 splits completely for t³ + 2
        let split = k.factor_prime(31).unwrap();
        assert_eq!(split.len(), 3);
        let pair = Ideal::from_factors(vec![(split[0], 1), (split[1], 1)]).unwrap();
        assert!(m.g_direct(&pair).unwrap().is_zero());
        let p3 = Ideal::prime(k.factor_prime(3).unwrap()[0]);
        let p5 = Ideal::prime(k.factor_prime(5).unwrap()[0]);
        let both = p3.mul(&p5).unwrap();
        assert_eq!(m.g_direct(&both).unwrap(), m.g(&p3).unwrap() * m.g(&p5).unwrap());
    }

    #[test]
    fn coset_records_power_branch() {
        let m = model("coset:5,0,0,1;1,0");
        let rep = check_postulates_123(&m, 200).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures);
        assert_eq!(rep.branches.len(), 1);
        assert_eq!(rep.branches[0].branch, Branch::Power);
        let zero = model("coset:5,0,0,1;0,0");
        let rep = check_postulates_123(&zero, 200).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures);
        assert_eq!(rep.branches[0].branch, Branch::Zero);
    }

    fn seq(n: i64) -> (SequenceAF, DensityModel) {
        let m = model("coset:1,0,0,1;0,0");
        let k = m.field().clone();
        let s = build_sequence(&k, &k.form().clone(), &ConvexRegion::square(n as f64), &LatticeCoset::whole_plane(), 1).unwrap();
        (s, m)
    }

    #[test]
    fn measurements() {
        let (s, m) = seq(50);
        let t0 = measure_type1(&s, &m, 0.0, 0.0).unwrap();
        let t1 = measure_type1(&s, &m, 1.0, 0.0).unwrap();
        let t5 = measure_type1(&s, &m, 5.0, 0.0).unwrap();
        assert!(t0.is_finite() && t0 >= t1 && t1 >= t5);
        assert!(measure_type1(&s, &m, 0.0, 1.0).unwrap() >= t0);
        let sq = measure_square(&s, 1.0, 0.0).unwrap();
        assert!(sq.is_finite() && sq > 0.0);
        assert_eq!(measure_square(&s, f64::INFINITY, 0.0).unwrap(), 0.0);
        let cr = measure_crude(&s, 0.0, 1.0).unwrap();
        assert!(cr.is_finite() && cr >= 1.0);
    }

    #[test]
    fn bilinear_window() {
        let (s, m) = seq(10);
        let k = m.field();
        let q = Ideal::prime(k.factor_prime(11).unwrap()[0]);
        let one = |_: &Ideal| 1.0;
        let zero = |_: &Ideal| 0.0;
        let d0d1 = s.d0 * s.d1;
        assert_eq!(bilinear_d(&one, 1, Cut::integer(20), &q, d0d1).unwrap(), 0.0);
        assert_eq!(bilinear_d(&one, 1, Cut::integer(5), &q, d0d1).unwrap(), -1.0);
        assert_eq!(bilinear_d(&zero, 1, Cut::integer(5), &q, d0d1).unwrap(), 0.0);
        assert!(bilinear_d(&one, 7, Cut::integer(5), &q, d0d1).is_err());
        assert_eq!(measure_bilinear(&s, &one, &zero, 1, Cut::integer(1), 4).unwrap(), 0.0);
        assert!(measure_bilinear(&s, &one, &one, 5, Cut::integer(1), 4).is_err());
    }

    #[test]
    fn report_round_trip() {
        let (s, m) = seq(20);
        let rows = postulate_report(&s, &m, 100, 20).unwrap();
        assert!(rows.iter().filter(|r| r.postulate.starts_with('P') && r.status != "NA").all(|r| r.status == "PASS"));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        write_report(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("postulate,params,measured,status\n"));
        assert_eq!(text.lines().count(), rows.len() + 1);
    }
}
