//! Parity averages over growing boxes and the verification suites.

mod suites;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::cubic_form::BinaryCubicForm;
use crate::error::{Error, Result};
use crate::factor_sieve::{parity_sums, Alpha, ParitySums};
use crate::region_lattice::{ConvexRegion, LatticeCoset};

pub use suites::{
    anti_sieve_case, buchstab_case, check_anti_sieve, check_buchstab, check_grid_oracle, check_pairings,
    check_parity_oracle, check_vaughan, check_window_flips, postulate_configs, random_cut, random_ideal,
    run_suite, sample_primes, spf_table, valued, CheckOutcome, Fault, Suite, SuiteOptions, SuiteOutcome,
};

/// The point set for a given N.
#[derive(Clone, Debug, PartialEq)]
pub enum RegionSpec {
    /// [−N, N]².
    Full,
    /// The disc of radius N about the origin.
    Disc,
    /// A fixed region, independent of N.
    Fixed(ConvexRegion),
}

impl RegionSpec {
    pub fn at(&self, n: u64) -> Result<ConvexRegion> {
        match self {
            RegionSpec::Full => Ok(ConvexRegion::square(n as f64)),
            RegionSpec::Disc => ConvexRegion::disc(0.0, 0.0, n as f64),
            RegionSpec::Fixed(r) => Ok(r.clone()),
        }
    }
}

impl fmt::Display for RegionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionSpec::Full => f.write_str("full"),
            RegionSpec::Disc => f.write_str("disc"),
            RegionSpec::Fixed(r) => write!(f, "{r}"),
        }
    }
}

impl FromStr for RegionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "full" | "box" => Ok(RegionSpec::Full),
            "disc" => Ok(RegionSpec::Disc),
            other => Ok(RegionSpec::Fixed(other.parse()?)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub form: BinaryCubicForm,
    pub alpha: Alpha,
    pub region: RegionSpec,
    pub coset: LatticeCoset,
    pub n_list: Vec<u64>,
    pub coprime_only: bool,
    pub epsilon: f64,
    pub threads: usize,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(form: BinaryCubicForm, alpha: Alpha, n_list: Vec<u64>) -> Self {
        ExperimentConfig {
            form,
            alpha,
            region: RegionSpec::Full,
            coset: LatticeCoset::whole_plane(),
            n_list,
            coprime_only: false,
            epsilon: 1.0,
            threads: 1,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(Error::Invalid("the N list is empty".into()));
        }
        if self.n_list[0] == 0 || self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("N values must be positive and strictly increasing".into()));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::Invalid(format!("epsilon {} must be positive", self.epsilon)));
        }
        if self.threads == 0 {
            return Err(Error::Invalid("thread count must be positive".into()));
        }
        if !self.form.is_irreducible() {
            return Err(Error::Reducible(format!("{} (reducible forms are out of scope)", self.form)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: u64,
    pub points: u64,
    pub sum: i64,
    pub average: f64,
    /// Undefined for N ≤ e^e.
    pub envelope: Option<f64>,
    pub ratio: Option<f64>,
}

/// (log log N)⁴ (log log log N)^ε / log N, natural logs, for N > e^e.
pub fn envelope(n: f64, epsilon: f64) -> Option<f64> {
    if !(n > std::f64::consts::E.powf(std::f64::consts::E)) {
        return None;
    }
    let l = n.ln();
    let ll = l.ln();
    Some(ll.powi(4) * ll.ln().powf(epsilon) / l)
}

/// The row for one N: Σ α(f(x, y)) over the configured points, skipping
/// zero values.
pub fn chowla_average(cfg: &ExperimentConfig, n: u64) -> Result<ConvergenceRow> {
    if !cfg.form.is_irreducible() {
        return Err(Error::Reducible(format!("{} (reducible forms are out of scope)", cfg.form)));
    }
    let region = cfg.region.at(n)?;
    let (sums, _) = parity_sums(&cfg.form, &region, &cfg.coset, cfg.coprime_only, cfg.threads, None)?;
    Ok(row_from_sums(n, &sums, cfg.alpha, cfg.epsilon))
}

fn row_from_sums(n: u64, sums: &ParitySums, alpha: Alpha, epsilon: f64) -> ConvergenceRow {
    let sum = sums.get(alpha);
    let average = if sums.points == 0 { 0.0 } else { sum as f64 / sums.points as f64 };
    let env = envelope(n as f64, epsilon);
    ConvergenceRow { n, points: sums.points, sum, average, envelope: env, ratio: env.map(|e| average / e) }
}

/// One row per N, each computed independently.
pub fn convergence_table(cfg: &ExperimentConfig) -> Result<Vec<Result<ConvergenceRow>>> {
    cfg.validate()?;
    Ok(cfg.n_list.iter().map(|&n| chowla_average(cfg, n)).collect())
}

pub const CSV_HEADER: [&str; 6] = ["N", "points", "sum", "average", "envelope", "ratio"];

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.12e}"))
}

/// CSV text for a table; failed rows keep their N and carry NA elsewhere.
pub fn table_csv(n_list: &[u64], rows: &[Result<ConvergenceRow>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for (&n, row) in n_list.iter().zip(rows) {
        match row {
            Ok(r) => w
                .write_record([
                    r.n.to_string(),
                    r.points.to_string(),
                    r.sum.to_string(),
                    format!("{:.12e}", r.average),
                    fmt_opt(r.envelope),
                    fmt_opt(r.ratio),
                ])
                .map_err(io)?,
            Err(_) => w.write_record([n.to_string(), "NA".into(), "NA".into(), "NA".into(), "NA".into(), "NA".into()]).map_err(io)?,
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn write_table(path: &Path, n_list: &[u64], rows: &[Result<ConvergenceRow>]) -> Result<()> {
    let text = table_csv(n_list, rows)?;
    let mut file = std::fs::File::create(path)?;
    file.write_all(text.as_bytes())?;
    Ok(())
}
