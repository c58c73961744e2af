use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use chowla::experiments::{
    convergence_table, run_suite, table_csv, ExperimentConfig, Fault, RegionSpec, Suite, SuiteOptions,
};
use chowla::{Alpha, BinaryCubicForm, Error, LatticeCoset};

const EXIT_ASSERTION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RANGE: u8 = 3;

#[derive(Parser)]
#[command(name = "chowla", version, about = "Parity averages of binary cubic forms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Average μ, λ or (−1)^ω of f(x, y) over growing regions.
    Avg(AvgArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct AvgArgs {
    /// Coefficients a,b,c,d of ax³ + bx²y + cxy² + dy³.
    #[arg(long, allow_hyphen_values = true)]
    form: Option<String>,
    /// mu, lambda or omega.
    #[arg(long)]
    alpha: Option<String>,
    /// full (the box [−N, N]²), disc (radius N) or a fixed region such as box:0,10,0,10.
    #[arg(long, allow_hyphen_values = true)]
    region: Option<String>,
    /// Lattice coset, e.g. coset:5,0,0,1;1,0.
    #[arg(long, allow_hyphen_values = true)]
    coset: Option<String>,
    /// Comma-separated, strictly increasing.
    #[arg(long = "N")]
    n: Option<String>,
    /// Only points with gcd(x, y) = 1.
    #[arg(long)]
    coprime_only: bool,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value file with the same keys as the flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// identities, postulates, sieve or all.
    #[arg(long)]
    suite: String,
    /// Directory for reports.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, hide = true)]
    inject_fault: Option<String>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Range(_) | Error::CapExceeded { .. } => EXIT_RANGE,
            Error::Corruption(_) => EXIT_ASSERTION,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

fn read_config(path: &PathBuf) -> Result<HashMap<String, String>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
        let key = k.trim().replace('_', "-");
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

fn parse_form(s: &str) -> Result<BinaryCubicForm, Failure> {
    Ok(s.parse::<BinaryCubicForm>()?)
}

fn parse_list(s: &str) -> Result<Vec<u64>, Failure> {
    s.split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|_| usage(format!("bad N value '{t}'"))))
        .collect()
}

fn parse_bool(s: &str) -> Result<bool, Failure> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(usage(format!("bad boolean '{s}'"))),
    }
}

fn build_config(args: AvgArgs) -> Result<ExperimentConfig, Failure> {
    let file = match &args.config {
        Some(p) => read_config(p)?,
        None => HashMap::new(),
    };
    for key in file.keys() {
        if !["form", "alpha", "region", "coset", "n", "coprime-only", "eps", "threads", "out"].contains(&key.to_lowercase().as_str()) {
            return Err(usage(format!("unknown config key '{key}'")));
        }
    }
    let get = |key: &str, flag: Option<String>| flag.or_else(|| file.iter().find(|(k, _)| k.eq_ignore_ascii_case(key)).map(|(_, v)| v.clone()));
    let form = get("form", args.form).ok_or_else(|| usage("--form is required"))?;
    let n = get("n", args.n).ok_or_else(|| usage("--N is required"))?;
    let mut cfg = ExperimentConfig::new(parse_form(&form)?, Alpha::Mu, parse_list(&n)?);
    if let Some(a) = get("alpha", args.alpha) {
        cfg.alpha = a.parse::<Alpha>()?;
    }
    if let Some(r) = get("region", args.region) {
        cfg.region = r.parse::<RegionSpec>()?;
    }
    if let Some(c) = get("coset", args.coset) {
        cfg.coset = c.parse::<LatticeCoset>()?;
    }
    cfg.coprime_only = args.coprime_only || file.get("coprime-only").map(|v| parse_bool(v)).transpose()?.unwrap_or(false);
    if let Some(e) = args.eps.map(Ok).or_else(|| file.get("eps").map(|v| v.parse::<f64>().map_err(|_| usage(format!("bad eps '{v}'"))))) {
        cfg.epsilon = e?;
    }
    if let Some(t) = args.threads.map(Ok).or_else(|| file.get("threads").map(|v| v.parse::<usize>().map_err(|_| usage(format!("bad threads '{v}'"))))) {
        cfg.threads = t?;
    }
    cfg.out = args.out.or_else(|| file.get("out").map(PathBuf::from));
    cfg.validate()?;
    Ok(cfg)
}

fn avg(args: AvgArgs) -> Result<(), Failure> {
    let cfg = build_config(args)?;
    let rows = convergence_table(&cfg)?;
    let text = table_csv(&cfg.n_list, &rows)?;
    match &cfg.out {
        Some(p) => std::fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display())))?,
        None => print!("{text}"),
    }
    let mut worst: Option<Failure> = None;
    for (n, row) in cfg.n_list.iter().zip(rows) {
        if let Err(e) = row {
            eprintln!("N = {n}: {e}");
            worst.get_or_insert(Failure::from(e));
        }
    }
    worst.map_or(Ok(()), Err)
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    let suite: Suite = args.suite.parse()?;
    let mut opts = SuiteOptions { threads: args.threads.max(1), ..Default::default() };
    if let Some(s) = args.seed {
        opts.seed = s;
    }
    if let Some(f) = &args.inject_fault {
        opts.fault = Some(f.parse::<Fault>()?);
    }
    let outcomes = run_suite(suite, &args.out, &opts)?;
    for o in &outcomes {
        for c in &o.checks {
            println!("[{}] {c}", o.suite);
        }
    }
    match outcomes.iter().find_map(|o| o.first_failure()) {
        Some(c) => Err(Failure { code: EXIT_ASSERTION, message: format!("counterexample: {}", c.failure.as_deref().unwrap_or("")) }),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Avg(a) => avg(a),
        Command::Verify(v) => verify(v),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("chowla: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
