//! Cut terms and quasi-probabilistic decompositions of a qubit wire.
//!
//! Each [`CutTerm`] carries a declarative sender/receiver circuit and the
//! exact one-qubit channel derived from it (Kraus operators obtained by
//! simulating the circuit on basis inputs). A [`WireCutDecomposition`] is a
//! real-weighted list of terms whose weighted sum is the identity channel;
//! this is checked on construction through Choi matrices.

mod channel;
mod circuit;

use std::fmt;

use rand::Rng;

pub use channel::{
    choi_input_marginal, choi_of, identity_choi, is_completely_positive, is_trace_preserving, Channel, KrausChannel,
    MeasurePrepareBranch, MeasurePrepareChannel,
};
pub use circuit::{ClassicalControl, Op, PreparedCircuit, TermCircuit};

use crate::entangle::{robustness_of_k, NmeResource};
use crate::error::{Error, Result};
use crate::qmath::{gates, ComplexMatrix, DensityOperator, PureState, EXACT_TOL, STRUCTURAL_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TermLabel {
    /// Teleportation through an NME pair.
    Tele,
    /// Measure and prepare in the X basis.
    Comp1,
    /// Measure in one Y eigenbasis, prepare the flipped one.
    Comp2,
    /// Any other measure-and-prepare term.
    MeasurePrepare,
}

impl fmt::Display for TermLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TermLabel::Tele => "tele",
            TermLabel::Comp1 => "comp1",
            TermLabel::Comp2 => "comp2",
            TermLabel::MeasurePrepare => "mp-general",
        })
    }
}

/// One sub-experiment of a wire cut.
#[derive(Clone, Debug)]
pub struct CutTerm {
    label: TermLabel,
    circuit: TermCircuit,
    channel: KrausChannel,
    choi: ComplexMatrix,
    mp_form: Option<MeasurePrepareChannel>,
}

impl CutTerm {
    /// Derives the exact channel from `circuit` and checks it is CPTP.
    pub fn new(label: TermLabel, circuit: TermCircuit) -> Result<Self> {
        let channel = KrausChannel::new(circuit.kraus_operators())?;
        let choi = channel.choi();
        if !is_completely_positive(&choi, STRUCTURAL_TOL) {
            return Err(Error::Validation(format!("{label} term is not completely positive")));
        }
        if !is_trace_preserving(&choi, STRUCTURAL_TOL) {
            return Err(Error::Validation(format!("{label} term is not trace preserving")));
        }
        Ok(Self { label, circuit, channel, choi, mp_form: None })
    }

    /// Attaches the closed-form measure-and-prepare description the circuit
    /// is meant to realize; the two must agree.
    fn with_mp_form(mut self, mp: MeasurePrepareChannel) -> Result<Self> {
        let dev = mp.choi().max_abs_diff(&self.choi);
        if dev > STRUCTURAL_TOL {
            return Err(Error::Validation(format!(
                "{} circuit deviates from its measure-and-prepare form by {dev:e}",
                self.label
            )));
        }
        self.mp_form = Some(mp);
        Ok(self)
    }

    /// Teleportation through `K(|00⟩ + k|11⟩)`.
    pub fn teleport(k: f64) -> Result<Self> {
        let resource = NmeResource::new(k)?;
        Self::new(TermLabel::Tele, TermCircuit::teleport(resource.state())?)
    }

    /// H, measure; prepare `H|j⟩`.
    pub fn comp1() -> Result<Self> {
        let circuit = TermCircuit::measure_prepare(&[gates::h()], &[gates::h()])?;
        Self::new(TermLabel::Comp1, circuit)?.with_mp_form(MeasurePrepareChannel::in_bases(&gates::h(), &gates::h())?)
    }

    /// S, H, measure; prepare `SH|j⟩`. Measures in the basis `{S†H|j⟩}`.
    pub fn comp2() -> Result<Self> {
        let circuit = TermCircuit::measure_prepare(&[gates::s(), gates::h()], &[gates::h(), gates::s()])?;
        let sh = &gates::s() * &gates::h();
        let sdg_h = &gates::sdg() * &gates::h();
        Self::new(TermLabel::Comp2, circuit)?.with_mp_form(MeasurePrepareChannel::in_bases(&sdg_h, &sh)?)
    }

    /// Generic measure-and-prepare term: `sender` gates then measurement,
    /// `X^j|0⟩` followed by `receiver` gates.
    pub fn measure_prepare(sender: &[ComplexMatrix], receiver: &[ComplexMatrix]) -> Result<Self> {
        Self::new(TermLabel::MeasurePrepare, TermCircuit::measure_prepare(sender, receiver)?)
    }

    pub fn label(&self) -> TermLabel {
        self.label
    }

    pub fn circuit(&self) -> &TermCircuit {
        &self.circuit
    }

    pub fn channel(&self) -> &KrausChannel {
        &self.channel
    }

    pub fn choi_matrix(&self) -> &ComplexMatrix {
        &self.choi
    }

    pub fn measure_prepare_form(&self) -> Option<&MeasurePrepareChannel> {
        self.mp_form.as_ref()
    }

    /// Prepares the sender state for repeated shots on `input`.
    pub fn prepare(&self, input: &PureState) -> Result<PreparedCircuit> {
        self.circuit.prepare(input)
    }
}

impl Channel for CutTerm {
    fn apply_to(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.channel.apply_to(x)
    }

    fn choi(&self) -> ComplexMatrix {
        self.choi.clone()
    }
}

#[derive(Clone, Debug)]
pub struct WeightedTerm {
    pub coefficient: f64,
    pub term: CutTerm,
}

/// `Id = Σ_i c_i E_i` with `Σ c_i = 1`.
#[derive(Clone, Debug)]
pub struct WireCutDecomposition {
    terms: Vec<WeightedTerm>,
    kappa: f64,
    probabilities: Vec<f64>,
}

impl WireCutDecomposition {
    pub fn new(terms: Vec<WeightedTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Validation("a decomposition needs at least one term".into()));
        }
        let sum: f64 = terms.iter().map(|t| t.coefficient).sum();
        if (sum - 1.0).abs() > EXACT_TOL {
            return Err(Error::Validation(format!("coefficients sum to {sum}, not 1")));
        }
        let kappa: f64 = terms.iter().map(|t| t.coefficient.abs()).sum();
        let probabilities = terms.iter().map(|t| t.coefficient.abs() / kappa).collect();
        let d = Self { terms, kappa, probabilities };
        let dev = d.identity_deviation();
        if dev > STRUCTURAL_TOL {
            return Err(Error::Validation(format!("decomposition deviates from the identity channel by {dev:e}")));
        }
        Ok(d)
    }

    pub fn terms(&self) -> &[WeightedTerm] {
        &self.terms
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.coefficient).collect()
    }

    /// Sampling overhead `Σ|c_i|`.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `p_i = |c_i| / κ`.
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Largest entrywise difference between this decomposition's Choi matrix
    /// and the identity channel's.
    pub fn identity_deviation(&self) -> f64 {
        self.choi().max_abs_diff(&identity_choi())
    }
}

impl Channel for WireCutDecomposition {
    fn apply_to(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.terms.iter().fold(ComplexMatrix::zeros(2, 2), |acc, t| {
            &acc + &t.term.apply_to(x).scale(t.coefficient.into())
        })
    }

    fn choi(&self) -> ComplexMatrix {
        self.terms.iter().fold(ComplexMatrix::zeros(4, 4), |acc, t| {
            &acc + &t.term.choi_matrix().scale(t.coefficient.into())
        })
    }
}

/// The three-term optimal cut without entanglement: `κ = 3`.
///
/// Terms: measure/prepare in the X basis, measure/prepare in the Y basis
/// (sender S†·H, receiver H·S), and, with weight −1, a computational
/// measurement followed by preparing the flipped basis state.
pub fn harada_cut() -> Result<WireCutDecomposition> {
    let h = gates::h();
    let sh = &gates::s() * &h;
    let x_basis = CutTerm::measure_prepare(&[h.clone()], &[h.clone()])?
        .with_mp_form(MeasurePrepareChannel::in_bases(&h, &h)?)?;
    let y_basis = CutTerm::measure_prepare(&[gates::sdg(), h.clone()], &[h.clone(), gates::s()])?
        .with_mp_form(MeasurePrepareChannel::in_bases(&sh, &sh)?)?;
    let flip = CutTerm::measure_prepare(&[], &[gates::x()])?
        .with_mp_form(MeasurePrepareChannel::in_bases(&gates::i2(), &gates::x())?)?;
    WireCutDecomposition::new(vec![
        WeightedTerm { coefficient: 1.0, term: x_basis },
        WeightedTerm { coefficient: 1.0, term: y_basis },
        WeightedTerm { coefficient: -1.0, term: flip },
    ])
}

/// Compensation factor `c = 1 - R(Φ^k)`.
pub fn compensation_factor(k: f64) -> Result<f64> {
    let res = NmeResource::new(k)?;
    Ok(1.0 - res.robustness())
}

/// `Id = E_tele + c·E_comp1 − c·E_comp2` with the pair `K(|00⟩ + k|11⟩)`.
pub fn nme_cut(k: f64) -> Result<WireCutDecomposition> {
    let c = compensation_factor(k)?;
    WireCutDecomposition::new(vec![
        WeightedTerm { coefficient: 1.0, term: CutTerm::teleport(k)? },
        WeightedTerm { coefficient: c, term: CutTerm::comp1()? },
        WeightedTerm { coefficient: -c, term: CutTerm::comp2()? },
    ])
}

/// Closed form `κ_NME(k) = 3 − 4k/(1+k²)`.
pub fn kappa_nme(k: f64) -> f64 {
    if k.is_infinite() {
        return 3.0;
    }
    3.0 - 4.0 * k / (1.0 + k * k)
}

/// Closed-form output of NME teleportation: the diagonal is kept and the
/// off-diagonal entries are scaled by `R(Φ^k)`.
pub fn teleport_exact(k: f64, rho: &DensityOperator) -> Result<DensityOperator> {
    NmeResource::new(k)?;
    if rho.dim() != 2 {
        return Err(Error::Dimension(format!("teleportation input must be one qubit, got dimension {}", rho.dim())));
    }
    let rob = robustness_of_k(k);
    let mut m = rho.matrix().clone();
    m[(0, 1)] *= rob;
    m[(1, 0)] *= rob;
    DensityOperator::new(m)
}

fn check_one_qubit(rho: &DensityOperator) -> Result<()> {
    if rho.dim() != 2 {
        return Err(Error::Dimension(format!("cut input must be one qubit, got dimension {}", rho.dim())));
    }
    Ok(())
}

pub fn apply_term_exact(term: &CutTerm, rho: &DensityOperator) -> Result<DensityOperator> {
    check_one_qubit(rho)?;
    DensityOperator::new(term.apply_to(rho.matrix()).hermitian_part())
}

/// `Σ_i c_i E_i(ρ)`; equal to `ρ` for a valid decomposition.
pub fn apply_decomposition_exact(d: &WireCutDecomposition, rho: &DensityOperator) -> Result<DensityOperator> {
    check_one_qubit(rho)?;
    DensityOperator::new(d.apply_to(rho.matrix()).hermitian_part())
}

/// Exact `(P(0), P(1))` of the receiver's computational measurement.
pub fn exact_term_distribution(term: &CutTerm, input: &PureState) -> Result<[f64; 2]> {
    let out = apply_term_exact(term, &input.density())?;
    let p0 = out.matrix()[(0, 0)].re.clamp(0.0, 1.0);
    Ok([p0, 1.0 - p0])
}

/// One shot of `term` on `input`: the receiver's measured bit.
pub fn sample_term<R: Rng + ?Sized>(term: &CutTerm, input: &PureState, rng: &mut R) -> Result<u8> {
    Ok(term.prepare(input)?.sample(rng))
}
