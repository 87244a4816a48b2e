//! The `nmecut` command line: `verify`, `kappa`, `cut` and `sweep`.
//!
//! Exit status: 0 on success, 1 on usage or validation errors, 2 when a
//! verification check fails.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channels::{harada_cut, kappa_nme, nme_cut, WireCutDecomposition};
use crate::entangle::{haar_random_state, k_from_robustness, robustness_of_k, NmeResource};
use crate::error::{Error, Result};
use crate::estimator::{allocate_shots, estimate_distribution, l2_error, shots_for_accuracy, AllocationMode};
use crate::experiment::{
    default_shot_budgets, monotonicity_violations, run_sweep, write_records, write_records_to_path, ExperimentConfig,
    OutputFormat, DEFAULT_N_STATES,
};
use crate::qmath::{computational_probs, PureState};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "nmecut", version, about = "Wire cutting with non-maximally entangled resource pairs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that every decomposition reproduces the identity channel (Choi matrices).
    Verify(VerifyArgs),
    /// Print k, robustness, compensation factor, κ and nominal shots.
    Kappa(KappaArgs),
    /// Estimate the outcome distribution of one state through a single cut.
    Cut(CutArgs),
    /// Run the random-state robustness × shot-budget sweep.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Schmidt ratios of the NME cuts to check.
    #[arg(long = "k", value_delimiter = ',', default_value = "0,0.1,0.25,0.5,1,2,10")]
    pub k: Vec<f64>,
    /// Largest accepted entrywise Choi deviation.
    #[arg(long = "tol", default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Args)]
#[group(id = "resource", required = true, multiple = false)]
pub struct KappaArgs {
    /// Schmidt ratio k ≥ 0 of the resource pair.
    #[arg(long = "k", group = "resource")]
    pub k: Option<f64>,
    /// Robustness in [0, 1]; mapped to the branch k ∈ [0, 1].
    #[arg(long = "robustness", group = "resource")]
    pub robustness: Option<f64>,
    /// Target accuracy for the nominal ⌈κ²/ε²⌉ shot count.
    #[arg(long = "epsilon", default_value_t = 0.01)]
    pub epsilon: f64,
}

#[derive(Debug, Args)]
pub struct CutArgs {
    /// Input state: zero, one, plus, i, or haar:<seed> for U|0⟩ with Haar U.
    #[arg(long = "state", default_value = "plus")]
    pub state: StateSpec,
    /// Schmidt ratio k ≥ 0 of the resource pair.
    #[arg(long = "k", default_value_t = 0.5, conflicts_with = "robustness")]
    pub k: f64,
    /// Robustness in [0, 1] (alternative to --k).
    #[arg(long = "robustness")]
    pub robustness: Option<f64>,
    /// Total shot budget shared by all terms.
    #[arg(long = "shots", default_value_t = 4096)]
    pub shots: usize,
    /// Seed of the shot sampler.
    #[arg(long = "seed", default_value_t = 0)]
    pub seed: u64,
    /// Shot allocation: proportional, multinomial or montecarlo.
    #[arg(long = "mode", default_value = "proportional")]
    pub mode: AllocationMode,
    /// Clip the estimate to [0, 1] and renormalize.
    #[arg(long = "clip")]
    pub clip: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Robustness levels of the resource pairs.
    #[arg(long = "robustness", value_delimiter = ',', default_value = "0,0.2,0.4,0.6,0.8,1")]
    pub robustness: Vec<f64>,
    /// Shot budgets (default 2^6 … 2^16).
    #[arg(long = "shots", value_delimiter = ',')]
    pub shots: Option<Vec<usize>>,
    /// Number of Haar-random input states.
    #[arg(long = "states", default_value_t = DEFAULT_N_STATES)]
    pub states: usize,
    /// Master seed; every random draw derives from it.
    #[arg(long = "seed", default_value_t = 0)]
    pub seed: u64,
    /// Shot allocation: proportional, multinomial or montecarlo.
    #[arg(long = "mode", default_value = "proportional")]
    pub mode: AllocationMode,
    /// Clip each estimate to [0, 1] and renormalize before scoring.
    #[arg(long = "clip")]
    pub clip: bool,
    /// Output file; records go to stdout when omitted.
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
    /// csv or json; inferred from the output extension when omitted.
    #[arg(long = "format")]
    pub format: Option<OutputFormat>,
    /// Worker threads (results do not depend on this).
    #[arg(long = "threads")]
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    Zero,
    One,
    Plus,
    PlusI,
    Haar(u64),
}

impl StateSpec {
    pub fn build(&self) -> Result<PureState> {
        Ok(match self {
            Self::Zero => PureState::zero(),
            Self::One => PureState::one(),
            Self::Plus => PureState::plus(),
            Self::PlusI => PureState::plus_i(),
            Self::Haar(seed) => haar_random_state(2, &mut ChaCha8Rng::seed_from_u64(*seed))?,
        })
    }
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" | "0" => Ok(Self::Zero),
            "one" | "1" => Ok(Self::One),
            "plus" | "+" => Ok(Self::Plus),
            "i" | "plus-i" => Ok(Self::PlusI),
            other => match other.strip_prefix("haar:") {
                Some(seed) => seed
                    .parse()
                    .map(Self::Haar)
                    .map_err(|_| Error::Domain(format!("invalid Haar seed '{seed}'"))),
                None => Err(Error::Domain(format!("unknown state '{other}' (zero, one, plus, i or haar:<seed>)"))),
            },
        }
    }
}

/// Parses `args` and runs the chosen subcommand, returning the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{rendered}") } else { write!(err, "{rendered}") };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Verify(a) => cmd_verify(a, out),
        Command::Kappa(a) => cmd_kappa(a, out).map(|_| EXIT_OK),
        Command::Cut(a) => cmd_cut(a, out).map(|_| EXIT_OK),
        Command::Sweep(a) => cmd_sweep(a, out, err).map(|_| EXIT_OK),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e)
}

pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    if !(args.tol > 0.0) {
        return Err(Error::Domain(format!("--tol must be positive, got {}", args.tol)));
    }
    writeln!(out, "{:<8} {:>8} {:>10} {:>10} {:>10} {:>12}  status", "cut", "k", "R", "c", "kappa", "choi_dev").map_err(io)?;
    let mut failures = Vec::new();
    let mut report = |name: &str, k: Option<f64>, d: Result<WireCutDecomposition>, out: &mut dyn Write| -> Result<()> {
        let label = k.map_or_else(|| "-".to_string(), |k| k.to_string());
        match d {
            Ok(d) => {
                let dev = d.identity_deviation();
                let ok = dev <= args.tol;
                let (rob, c) = match k {
                    Some(k) => {
                        let rob = robustness_of_k(k);
                        (format!("{rob:.6}"), format!("{:.6}", 1.0 - rob))
                    }
                    None => ("-".into(), "-".into()),
                };
                writeln!(
                    out,
                    "{name:<8} {label:>8} {rob:>10} {c:>10} {:>10.6} {dev:>12.3e}  {}",
                    d.kappa(),
                    if ok { "ok" } else { "FAIL" }
                )
                .map_err(io)?;
                if !ok {
                    failures.push(format!("{name} k={label}: deviation {dev:e} > {:e}", args.tol));
                }
            }
            Err(e) => {
                writeln!(out, "{name:<8} {label:>8} construction failed: {e}").map_err(io)?;
                failures.push(format!("{name} k={label}: {e}"));
            }
        }
        Ok(())
    };
    report("harada", None, harada_cut(), out)?;
    for &k in &args.k {
        if !(k.is_finite() && k >= 0.0) {
            return Err(Error::Domain(format!("k must be finite and non-negative, got {k}")));
        }
        report("nme", Some(k), nme_cut(k), out)?;
    }
    if failures.is_empty() {
        writeln!(out, "all decompositions reproduce the identity channel within {:e}", args.tol).map_err(io)?;
        Ok(EXIT_OK)
    } else {
        for f in &failures {
            writeln!(out, "verification failed: {f}").map_err(io)?;
        }
        Ok(EXIT_VERIFY_FAILED)
    }
}

fn resolve_k(k: Option<f64>, robustness: Option<f64>) -> Result<f64> {
    match (k, robustness) {
        (_, Some(r)) => k_from_robustness(r),
        (Some(k), None) => Ok(NmeResource::new(k)?.k()),
        (None, None) => Err(Error::Domain("either --k or --robustness is required".into())),
    }
}

/// Twelve decimals with trailing zeros dropped, so `0.5000000000000001`
/// prints as `0.5`.
fn num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

pub fn cmd_kappa(args: &KappaArgs, out: &mut dyn Write) -> Result<()> {
    let k = resolve_k(args.k, args.robustness)?;
    let rob = robustness_of_k(k);
    let kappa = kappa_nme(k);
    let shots = shots_for_accuracy(kappa, args.epsilon)?;
    writeln!(out, "k        {}", num(k)).map_err(io)?;
    writeln!(out, "R        {}", num(rob)).map_err(io)?;
    writeln!(out, "c        {}", num(1.0 - rob)).map_err(io)?;
    writeln!(out, "kappa    {}", num(kappa)).map_err(io)?;
    writeln!(out, "shots    {shots}  (nominal ceil(kappa^2/eps^2) at eps = {})", args.epsilon).map_err(io)?;
    Ok(())
}

pub fn cmd_cut(args: &CutArgs, out: &mut dyn Write) -> Result<()> {
    let k = resolve_k(Some(args.k), args.robustness)?;
    let input = args.state.build()?;
    let d = nme_cut(k)?;
    let exact = computational_probs(&input.density());
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let est = estimate_distribution(&d, &input, args.shots, args.mode, &mut rng)?;
    let probs = if args.clip { est.clipped() } else { est.probs };
    let err = l2_error(&probs, &exact)?;
    let nominal = allocate_shots(&d, args.shots, AllocationMode::Proportional, &mut rng);

    writeln!(out, "state      {:?}", args.state).map_err(io)?;
    writeln!(out, "k          {}", num(k)).map_err(io)?;
    writeln!(out, "R          {}", num(robustness_of_k(k))).map_err(io)?;
    writeln!(out, "kappa      {}", num(d.kappa())).map_err(io)?;
    let labels: Vec<String> = d.terms().iter().map(|t| format!("{}({:+})", t.term.label(), t.coefficient)).collect();
    writeln!(out, "terms      {}", labels.join(" ")).map_err(io)?;
    writeln!(out, "mode       {}", args.mode).map_err(io)?;
    writeln!(out, "shot plan  {:?}", est.shots_used).map_err(io)?;
    if args.mode != AllocationMode::Proportional {
        writeln!(out, "nominal    {:?}", nominal.per_term).map_err(io)?;
    }
    writeln!(out, "exact      {} {}", exact[0], exact[1]).map_err(io)?;
    writeln!(out, "estimate   {} {}", probs[0], probs[1]).map_err(io)?;
    writeln!(out, "l2_error   {err}").map_err(io)?;
    Ok(())
}

pub fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let config = ExperimentConfig {
        robustness_levels: args.robustness.clone(),
        shot_budgets: args.shots.clone().unwrap_or_else(default_shot_budgets),
        n_states: args.states,
        master_seed: args.seed,
        allocation_mode: args.mode,
        clip: args.clip,
    };
    config.validate()?;
    let records = match args.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Validation(format!("cannot build thread pool: {e}")))?
            .install(|| run_sweep(&config))?,
        None => run_sweep(&config)?,
    };

    let format = args.format.unwrap_or_else(|| match &args.output {
        Some(p) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) => OutputFormat::Json,
        _ => OutputFormat::Csv,
    });
    let summary: &mut dyn Write = match &args.output {
        Some(path) => {
            write_records_to_path(&records, format, path)?;
            writeln!(out, "wrote {} records to {}", records.len(), path.display()).map_err(io)?;
            out
        }
        None => {
            write_records(&records, format, &mut *out)?;
            err
        }
    };

    let violations = monotonicity_violations(&records, 2.0);
    let mut budgets: Vec<u64> = records.iter().map(|r| r.shots).collect();
    budgets.dedup();
    for shots in budgets {
        let bad = violations.iter().filter(|v| v.shots == shots).count();
        let curve: Vec<String> = records
            .iter()
            .filter(|r| r.shots == shots)
            .map(|r| format!("{:.4}", r.mean_l2))
            .collect();
        writeln!(
            summary,
            "shots {shots:>7}: mean_l2 by robustness [{}] {}",
            curve.join(", "),
            if bad == 0 { "non-increasing".to_string() } else { format!("{bad} increase(s) beyond 2 stderr") }
        )
        .map_err(io)?;
    }
    Ok(())
}
