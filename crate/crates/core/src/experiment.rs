//! Robustness × shot-budget sweeps over Haar-random input states.
//!
//! For every state index `s` a Haar unitary `U` is drawn from a generator
//! seeded with `derive_seed(master, [0, s])`; the input is `U|0⟩`. Every
//! (robustness, budget) cell of that state runs with its own generator
//! seeded by `derive_seed(master, [1, s, robustness index, budget index])`.
//! The same state is reused across all cells, and results do not depend on
//! how the work is scheduled across threads.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::nme_cut;
use crate::entangle::{haar_random_unitary, k_from_robustness};
use crate::error::{Error, Result};
use crate::estimator::{estimate_distribution, l2_error, AllocationMode};
use crate::qmath::{computational_probs, ComplexMatrix, PureState};

pub const DEFAULT_ROBUSTNESS_LEVELS: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
pub const DEFAULT_N_STATES: usize = 500;

/// `2^6, 2^7, …, 2^16`.
pub fn default_shot_budgets() -> Vec<usize> {
    (6..=16).map(|e| 1usize << e).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub robustness_levels: Vec<f64>,
    pub shot_budgets: Vec<usize>,
    pub n_states: usize,
    pub master_seed: u64,
    pub allocation_mode: AllocationMode,
    /// Clip and renormalize each estimate before measuring its error.
    pub clip: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            robustness_levels: DEFAULT_ROBUSTNESS_LEVELS.to_vec(),
            shot_budgets: default_shot_budgets(),
            n_states: DEFAULT_N_STATES,
            master_seed: 0,
            allocation_mode: AllocationMode::Proportional,
            clip: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.robustness_levels.is_empty() {
            return Err(Error::Validation("at least one robustness level is required".into()));
        }
        if let Some(r) = self.robustness_levels.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(Error::Validation(format!("robustness level {r} outside [0, 1]")));
        }
        if self.shot_budgets.is_empty() || self.shot_budgets.contains(&0) {
            return Err(Error::Validation("shot budgets must be non-empty and at least 1".into()));
        }
        if self.n_states == 0 {
            return Err(Error::Validation("n_states must be at least 1".into()));
        }
        Ok(())
    }
}

/// One aggregated sweep cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub robustness: f64,
    pub k: f64,
    pub shots: u64,
    pub n_states: u64,
    pub mean_l2: f64,
    pub stderr_l2: f64,
    pub seed: u64,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `master` with an index path through chained SplitMix64 rounds.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |h, &x| splitmix64(h ^ splitmix64(x)))
}

pub fn state_rng(master: u64, state: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, &[0, state as u64]))
}

pub fn cell_rng(master: u64, state: usize, robustness_idx: usize, shots_idx: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, &[1, state as u64, robustness_idx as u64, shots_idx as u64]))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrialOptions {
    pub mode: AllocationMode,
    pub clip: bool,
}

/// Cuts `U|0⟩` with the NME pair of the given robustness and returns the L2
/// distance between the estimated and the exact outcome distribution.
pub fn run_trial<R: Rng + ?Sized>(
    u: &ComplexMatrix,
    robustness: f64,
    shots: usize,
    opts: TrialOptions,
    rng: &mut R,
) -> Result<f64> {
    let input = PureState::from_unitary_column(u)?;
    if input.dim() != 2 {
        return Err(Error::Dimension("trial unitary must be 2x2".into()));
    }
    let d = nme_cut(k_from_robustness(robustness)?)?;
    let est = estimate_distribution(&d, &input, shots, opts.mode, rng)?;
    let probs = if opts.clip { est.clipped() } else { est.probs };
    l2_error(&probs, &computational_probs(&input.density()))
}

pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    config.validate()?;
    let opts = TrialOptions { mode: config.allocation_mode, clip: config.clip };
    let n_r = config.robustness_levels.len();
    let n_b = config.shot_budgets.len();

    // errors[s][ri * n_b + bi]
    let errors: Vec<Vec<f64>> = (0..config.n_states)
        .into_par_iter()
        .map(|s| {
            let u = haar_random_unitary(2, &mut state_rng(config.master_seed, s))?;
            let mut row = Vec::with_capacity(n_r * n_b);
            for (ri, &rob) in config.robustness_levels.iter().enumerate() {
                for (bi, &shots) in config.shot_budgets.iter().enumerate() {
                    let mut rng = cell_rng(config.master_seed, s, ri, bi);
                    row.push(run_trial(&u, rob, shots, opts, &mut rng)?);
                }
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let n = config.n_states as f64;
    let mut records = Vec::with_capacity(n_r * n_b);
    for (ri, &rob) in config.robustness_levels.iter().enumerate() {
        let k = k_from_robustness(rob)?;
        for (bi, &shots) in config.shot_budgets.iter().enumerate() {
            let cell = ri * n_b + bi;
            let mean = errors.iter().map(|row| row[cell]).sum::<f64>() / n;
            let stderr = if config.n_states > 1 {
                let var = errors.iter().map(|row| (row[cell] - mean).powi(2)).sum::<f64>() / (n - 1.0);
                (var / n).sqrt()
            } else {
                0.0
            };
            records.push(ExperimentRecord {
                robustness: rob,
                k,
                shots: shots as u64,
                n_states: config.n_states as u64,
                mean_l2: mean,
                stderr_l2: stderr,
                seed: config.master_seed,
            });
        }
    }
    records.sort_by(|a, b| a.robustness.total_cmp(&b.robustness).then(a.shots.cmp(&b.shots)));
    Ok(records)
}

/// A robustness step at one shot budget where the error went up by more
/// than `sigmas` combined standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct TrendViolation {
    pub shots: u64,
    pub lower_robustness: f64,
    pub higher_robustness: f64,
    pub increase: f64,
    pub allowed: f64,
}

/// Checks that mean L2 error does not grow with robustness at any budget.
pub fn monotonicity_violations(records: &[ExperimentRecord], sigmas: f64) -> Vec<TrendViolation> {
    let mut budgets: Vec<u64> = records.iter().map(|r| r.shots).collect();
    budgets.sort_unstable();
    budgets.dedup();
    let mut out = Vec::new();
    for shots in budgets {
        let mut curve: Vec<&ExperimentRecord> = records.iter().filter(|r| r.shots == shots).collect();
        curve.sort_by(|a, b| a.robustness.total_cmp(&b.robustness));
        for w in curve.windows(2) {
            let increase = w[1].mean_l2 - w[0].mean_l2;
            let allowed = sigmas * (w[0].stderr_l2.powi(2) + w[1].stderr_l2.powi(2)).sqrt();
            if increase > allowed {
                out.push(TrendViolation {
                    shots,
                    lower_robustness: w[0].robustness,
                    higher_robustness: w[1].robustness,
                    increase,
                    allowed,
                });
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Csv => "csv",
            Self::Json => "json",
        })
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Domain(format!("unknown output format '{other}' (expected csv or json)"))),
        }
    }
}

pub const CSV_HEADER: [&str; 7] = ["robustness", "k", "shots", "n_states", "mean_l2", "stderr_l2", "seed"];

/// Writes records as CSV (plain decimal floats, one header row) or as a JSON
/// array of objects with the same field names.
pub fn write_records<W: Write>(records: &[ExperimentRecord], format: OutputFormat, out: W) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Validation("no records to write".into()));
    }
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_HEADER)?;
            for r in records {
                // f64 Display never uses exponent notation and round-trips.
                w.write_record([
                    r.robustness.to_string(),
                    r.k.to_string(),
                    r.shots.to_string(),
                    r.n_states.to_string(),
                    r.mean_l2.to_string(),
                    r.stderr_l2.to_string(),
                    r.seed.to_string(),
                ])?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, records)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

pub fn write_records_to_path(records: &[ExperimentRecord], format: OutputFormat, path: &Path) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    write_records(records, format, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(format: OutputFormat, input: R) -> Result<Vec<ExperimentRecord>> {
    match format {
        OutputFormat::Csv => {
            let mut rdr = csv::Reader::from_reader(input);
            rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
        }
        OutputFormat::Json => Ok(serde_json::from_reader(input)?),
    }
}
