//! Finite-shot estimation through a wire cut.
//!
//! Shots are split over the terms of a [`WireCutDecomposition`], each term
//! is sampled on its own, and the per-term outcome frequencies are
//! recombined with the quasi-probability weights. Estimates are unbiased and
//! are not clipped to `[0, 1]` unless asked for.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::channels::{exact_term_distribution, WireCutDecomposition};
use crate::error::{Error, Result};
use crate::qmath::{ComplexMatrix, PureState, EXACT_TOL};

/// How a shot budget is split across terms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum AllocationMode {
    /// Deterministic largest-remainder apportionment over `p_i`; ties go to
    /// the lower term index. Recombines with `Σ c_i f̂_i`.
    #[default]
    Proportional,
    /// Term counts drawn from a multinomial over `p_i`. Recombines with
    /// `Σ c_i f̂_i`.
    Multinomial,
    /// Each shot draws its term from `p_i` and is weighted by
    /// `sign(c_i)·κ`; the estimate is the mean weighted indicator.
    MonteCarlo,
}

impl AllocationMode {
    pub const ALL: [AllocationMode; 3] = [Self::Proportional, Self::Multinomial, Self::MonteCarlo];
}

impl fmt::Display for AllocationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Proportional => "proportional",
            Self::Multinomial => "multinomial",
            Self::MonteCarlo => "montecarlo",
        })
    }
}

impl FromStr for AllocationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proportional" => Ok(Self::Proportional),
            "multinomial" => Ok(Self::Multinomial),
            "montecarlo" | "monte-carlo" => Ok(Self::MonteCarlo),
            other => Err(Error::Domain(format!(
                "unknown allocation mode '{other}' (expected proportional, multinomial or montecarlo)"
            ))),
        }
    }
}

/// Per-term shot counts for a total budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotPlan {
    pub total: usize,
    pub per_term: Vec<usize>,
    pub mode: AllocationMode,
}

pub fn allocate_shots<R: Rng + ?Sized>(
    d: &WireCutDecomposition,
    total: usize,
    mode: AllocationMode,
    rng: &mut R,
) -> ShotPlan {
    let probs = d.probabilities();
    let per_term = match mode {
        AllocationMode::Proportional => largest_remainder(probs, total),
        AllocationMode::Multinomial => multinomial(probs, total, rng),
        AllocationMode::MonteCarlo => {
            let mut counts = vec![0; probs.len()];
            for _ in 0..total {
                counts[draw_index(probs, rng.random())] += 1;
            }
            counts
        }
    };
    ShotPlan { total, per_term, mode }
}

fn largest_remainder(probs: &[f64], total: usize) -> Vec<usize> {
    let quotas: Vec<f64> = probs.iter().map(|p| p * total as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    // Only terms with non-zero probability compete for leftover shots.
    let mut order: Vec<usize> = (0..probs.len()).filter(|&i| probs[i] > 0.0).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    if assigned <= total {
        for &i in order.iter().cycle().take(total - assigned) {
            counts[i] += 1;
        }
    } else {
        // Rounding pushed the floors past the budget; take back from the
        // smallest fractional parts.
        for &i in order.iter().rev().cycle().take(assigned - total) {
            counts[i] -= 1;
        }
    }
    counts
}

fn multinomial<R: Rng + ?Sized>(probs: &[f64], total: usize, rng: &mut R) -> Vec<usize> {
    let mut counts = vec![0; probs.len()];
    let mut remaining = total as u64;
    let mut mass = 1.0;
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let last_positive = probs[i + 1..].iter().all(|&q| q == 0.0);
        let n = if last_positive {
            remaining
        } else if p == 0.0 {
            0
        } else {
            let q = (p / mass).clamp(0.0, 1.0);
            Binomial::new(remaining, q).expect("binomial parameters are valid").sample(rng)
        };
        counts[i] = n as usize;
        remaining -= n;
        mass -= p;
    }
    counts
}

fn draw_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// Result of one cut estimation run.
#[derive(Clone, Debug, PartialEq)]
pub struct CutEstimate {
    /// Quasi-probability estimate of `(P(0), P(1))`; may leave `[0, 1]`.
    pub probs: [f64; 2],
    /// Empirical outcome frequencies per term (zeros for unsampled terms).
    pub per_term_freqs: Vec<[f64; 2]>,
    pub shots_used: Vec<usize>,
    pub kappa: f64,
    pub mode: AllocationMode,
}

impl CutEstimate {
    /// Clips to `[0, 1]` and renormalizes.
    pub fn clipped(&self) -> [f64; 2] {
        let p = self.probs.map(|x| x.clamp(0.0, 1.0));
        let s = p[0] + p[1];
        if s > 0.0 {
            [p[0] / s, p[1] / s]
        } else {
            [0.5, 0.5]
        }
    }
}

pub fn estimate_distribution<R: Rng + ?Sized>(
    d: &WireCutDecomposition,
    input: &PureState,
    total: usize,
    mode: AllocationMode,
    rng: &mut R,
) -> Result<CutEstimate> {
    if total == 0 {
        return Err(Error::Domain("shot budget must be at least 1".into()));
    }
    if input.dim() != 2 {
        return Err(Error::Dimension(format!("cut input must be one qubit, got dimension {}", input.dim())));
    }
    let plan = allocate_shots(d, total, mode, rng);
    let mut counts = Vec::with_capacity(plan.per_term.len());
    for (wt, &n) in d.terms().iter().zip(&plan.per_term) {
        if n == 0 {
            counts.push([0usize, 0]);
            continue;
        }
        let prepared = wt.term.prepare(input)?;
        let zeros = (0..n).filter(|_| prepared.sample(rng) == 0).count();
        counts.push([zeros, n - zeros]);
    }

    let per_term_freqs: Vec<[f64; 2]> = counts
        .iter()
        .zip(&plan.per_term)
        .map(|(c, &n)| if n == 0 { [0.0, 0.0] } else { [c[0] as f64 / n as f64, c[1] as f64 / n as f64] })
        .collect();

    let mut probs = [0.0; 2];
    match mode {
        AllocationMode::Proportional | AllocationMode::Multinomial => {
            for (wt, f) in d.terms().iter().zip(&per_term_freqs) {
                probs[0] += wt.coefficient * f[0];
                probs[1] += wt.coefficient * f[1];
            }
        }
        AllocationMode::MonteCarlo => {
            let kappa = d.kappa();
            for (wt, c) in d.terms().iter().zip(&counts) {
                let w = wt.coefficient.signum() * kappa / total as f64;
                probs[0] += w * c[0] as f64;
                probs[1] += w * c[1] as f64;
            }
        }
    }

    Ok(CutEstimate { probs, per_term_freqs, shots_used: plan.per_term, kappa: d.kappa(), mode })
}

/// The infinite-shot limit of [`estimate_distribution`]: `Σ c_i` times the
/// exact per-term distributions.
pub fn exact_recombination(d: &WireCutDecomposition, input: &PureState) -> Result<[f64; 2]> {
    let mut out = [0.0; 2];
    for wt in d.terms() {
        let p = exact_term_distribution(&wt.term, input)?;
        out[0] += wt.coefficient * p[0];
        out[1] += wt.coefficient * p[1];
    }
    Ok(out)
}

/// A one-qubit Hermitian observable.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    matrix: ComplexMatrix,
}

impl Observable {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.rows() != 2 || matrix.cols() != 2 {
            return Err(Error::Dimension("observables act on one qubit".into()));
        }
        if !matrix.is_hermitian(EXACT_TOL) {
            return Err(Error::Validation("observable is not Hermitian".into()));
        }
        Ok(Self { matrix })
    }

    pub fn identity() -> Self {
        Self { matrix: ComplexMatrix::identity(2) }
    }

    pub fn pauli_z() -> Self {
        Self { matrix: crate::qmath::gates::z() }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    fn diagonal(&self) -> Result<[f64; 2]> {
        if !self.matrix.is_diagonal(EXACT_TOL) {
            return Err(Error::UnsupportedObservable(
                "only computational-basis-diagonal observables can be estimated; rotate the receiver first".into(),
            ));
        }
        Ok([self.matrix[(0, 0)].re, self.matrix[(1, 1)].re])
    }
}

/// `Σ_b P̂(b) O_bb` for an observable diagonal in the computational basis.
pub fn estimate_expectation<R: Rng + ?Sized>(
    d: &WireCutDecomposition,
    input: &PureState,
    obs: &Observable,
    total: usize,
    mode: AllocationMode,
    rng: &mut R,
) -> Result<f64> {
    let diag = obs.diagonal()?;
    let est = estimate_distribution(d, input, total, mode, rng)?;
    Ok(est.probs[0] * diag[0] + est.probs[1] * diag[1])
}

/// Nominal shot count `⌈κ²/ε²⌉` for accuracy `ε`, taking the constant of
/// the `O(κ²/ε²)` scaling as 1.
pub fn shots_for_accuracy(kappa: f64, epsilon: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain(format!("accuracy must be positive, got {epsilon}")));
    }
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(Error::Domain(format!("sampling overhead must be at least 1, got {kappa}")));
    }
    let x = (kappa / epsilon).powi(2);
    // 3/0.01 is not exact in binary; do not let that round up to 90001.
    let nearest = x.round();
    let n = if (x - nearest).abs() <= 1e-9 * x.max(1.0) { nearest } else { x.ceil() };
    Ok(n as u64)
}

/// Euclidean distance between two probability vectors.
pub fn l2_error(estimate: &[f64], exact: &[f64]) -> Result<f64> {
    if estimate.len() != exact.len() {
        return Err(Error::Dimension(format!("lengths {} and {} differ", estimate.len(), exact.len())));
    }
    Ok(estimate.iter().zip(exact).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
}
