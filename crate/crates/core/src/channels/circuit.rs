//! Declarative sender/receiver circuits and a small state-vector register.
//!
//! Register layout: qubit 0 carries the input. With a resource pair the
//! pair occupies qubits 1 (sender half) and 2 (receiver half); without one,
//! qubit 1 is the receiver and starts in `|0⟩`. The receiver is always the
//! last qubit and every other qubit is measured by the sender.

use rand::Rng;

use crate::error::{Error, Result};
use crate::qmath::{gates, kron, r, ComplexMatrix, PureState, C64};

/// A sender-side operation.
#[derive(Clone, Debug)]
pub enum Op {
    Gate { qubit: usize, gate: ComplexMatrix },
    Cnot { control: usize, target: usize },
}

/// A receiver gate applied when classical bit `bit` is 1.
#[derive(Clone, Debug)]
pub struct ClassicalControl {
    pub bit: usize,
    pub gate: ComplexMatrix,
}

#[derive(Clone, Debug)]
pub struct TermCircuit {
    resource: Option<PureState>,
    sender: Vec<Op>,
    measured: Vec<usize>,
    corrections: Vec<ClassicalControl>,
    receiver: Vec<ComplexMatrix>,
}

impl TermCircuit {
    /// `measured[i]` is the qubit read into classical bit `i`.
    pub fn new(
        resource: Option<PureState>,
        sender: Vec<Op>,
        measured: Vec<usize>,
        corrections: Vec<ClassicalControl>,
        receiver: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        let circuit = Self { resource, sender, measured, corrections, receiver };
        circuit.validate()?;
        Ok(circuit)
    }

    /// Measure the input after `sender` gates, prepare `X^j|0⟩` on the
    /// receiver and apply `receiver` gates.
    pub fn measure_prepare(sender: &[ComplexMatrix], receiver: &[ComplexMatrix]) -> Result<Self> {
        Self::new(
            None,
            sender.iter().map(|g| Op::Gate { qubit: 0, gate: g.clone() }).collect(),
            vec![0],
            vec![ClassicalControl { bit: 0, gate: gates::x() }],
            receiver.to_vec(),
        )
    }

    /// Standard teleportation through `resource`: CNOT input→ancilla, H on
    /// the input, measure both, then X on the ancilla bit and Z on the input
    /// bit.
    pub fn teleport(resource: PureState) -> Result<Self> {
        Self::new(
            Some(resource),
            vec![
                Op::Cnot { control: 0, target: 1 },
                Op::Gate { qubit: 0, gate: gates::h() },
            ],
            vec![0, 1],
            vec![
                ClassicalControl { bit: 1, gate: gates::x() },
                ClassicalControl { bit: 0, gate: gates::z() },
            ],
            Vec::new(),
        )
    }

    pub fn num_qubits(&self) -> usize {
        if self.resource.is_some() {
            3
        } else {
            2
        }
    }

    pub fn receiver_qubit(&self) -> usize {
        self.num_qubits() - 1
    }

    pub fn resource(&self) -> Option<&PureState> {
        self.resource.as_ref()
    }

    pub fn sender_ops(&self) -> &[Op] {
        &self.sender
    }

    pub fn measured_qubits(&self) -> &[usize] {
        &self.measured
    }

    pub fn corrections(&self) -> &[ClassicalControl] {
        &self.corrections
    }

    pub fn receiver_ops(&self) -> &[ComplexMatrix] {
        &self.receiver
    }

    fn validate(&self) -> Result<()> {
        if let Some(res) = &self.resource {
            if res.dim() != 4 {
                return Err(Error::Dimension("resource state must be a two-qubit state".into()));
            }
        }
        let recv = self.receiver_qubit();
        let is_2x2_unitary = |g: &ComplexMatrix| g.rows() == 2 && g.cols() == 2 && g.is_unitary(1e-10);
        for op in &self.sender {
            match op {
                Op::Gate { qubit, gate } => {
                    if *qubit >= recv {
                        return Err(Error::Validation(format!("sender gate on qubit {qubit}")));
                    }
                    if !is_2x2_unitary(gate) {
                        return Err(Error::Validation("sender gate is not a 2x2 unitary".into()));
                    }
                }
                Op::Cnot { control, target } => {
                    if control == target || *control >= recv || *target >= recv {
                        return Err(Error::Validation(format!("invalid sender CNOT {control}->{target}")));
                    }
                }
            }
        }
        let mut sorted = self.measured.clone();
        sorted.sort_unstable();
        if sorted != (0..recv).collect::<Vec<_>>() {
            return Err(Error::Validation("every sender qubit must be measured exactly once".into()));
        }
        for ctl in &self.corrections {
            if ctl.bit >= self.measured.len() {
                return Err(Error::Validation(format!("correction conditioned on missing bit {}", ctl.bit)));
            }
            if !is_2x2_unitary(&ctl.gate) {
                return Err(Error::Validation("correction gate is not a 2x2 unitary".into()));
            }
        }
        if !self.receiver.iter().all(is_2x2_unitary) {
            return Err(Error::Validation("receiver gate is not a 2x2 unitary".into()));
        }
        Ok(())
    }

    fn initial_register(&self, input: &[C64]) -> Register {
        let input = ComplexMatrix::new(2, 1, input.to_vec()).expect("two input amplitudes");
        let rest = match &self.resource {
            Some(res) => ComplexMatrix::new(4, 1, res.amplitudes().to_vec()).expect("four amplitudes"),
            None => ComplexMatrix::new(2, 1, vec![r(1.0), r(0.0)]).expect("two amplitudes"),
        };
        Register { n: self.num_qubits(), amps: kron(&input, &rest).entries().to_vec() }
    }

    fn run_sender(&self, reg: &mut Register) {
        for op in &self.sender {
            match op {
                Op::Gate { qubit, gate } => reg.apply_gate(*qubit, gate),
                Op::Cnot { control, target } => reg.apply_cnot(*control, *target),
            }
        }
    }

    fn run_receiver(&self, reg: &mut Register, bits: &[u8]) {
        let recv = self.receiver_qubit();
        for ctl in &self.corrections {
            if bits[ctl.bit] == 1 {
                reg.apply_gate(recv, &ctl.gate);
            }
        }
        for g in &self.receiver {
            reg.apply_gate(recv, g);
        }
    }

    fn outcome_bits(&self, outcome: usize) -> Vec<u8> {
        (0..self.measured.len()).map(|i| ((outcome >> i) & 1) as u8).collect()
    }

    fn num_outcomes(&self) -> usize {
        1 << self.measured.len()
    }

    /// Kraus operators `input → receiver`, one per classical outcome,
    /// obtained by running the circuit on each input basis vector.
    pub fn kraus_operators(&self) -> Vec<ComplexMatrix> {
        (0..self.num_outcomes())
            .map(|outcome| {
                let bits = self.outcome_bits(outcome);
                let mut k = ComplexMatrix::zeros(2, 2);
                for col in 0..2 {
                    let mut e = [r(0.0); 2];
                    e[col] = r(1.0);
                    let mut reg = self.initial_register(&e);
                    self.run_sender(&mut reg);
                    for (q, &b) in self.measured.iter().zip(&bits) {
                        reg.project(*q, b);
                    }
                    self.run_receiver(&mut reg, &bits);
                    let recv_amps = reg.receiver_amplitudes(&self.measured, &bits);
                    k[(0, col)] = recv_amps[0];
                    k[(1, col)] = recv_amps[1];
                }
                k
            })
            .collect()
    }

    /// Simulates the sender half once for `input` and tabulates, per
    /// classical outcome, its Born probability and the receiver's
    /// probability of reading 0 after the corrections.
    pub fn prepare(&self, input: &PureState) -> Result<PreparedCircuit> {
        if input.dim() != 2 {
            return Err(Error::Dimension(format!("cut input must be one qubit, got dimension {}", input.dim())));
        }
        let mut base = self.initial_register(input.amplitudes());
        self.run_sender(&mut base);
        let recv = self.receiver_qubit();
        let mut branches = Vec::with_capacity(self.num_outcomes());
        for outcome in 0..self.num_outcomes() {
            let bits = self.outcome_bits(outcome);
            let mut reg = base.clone();
            for (q, &b) in self.measured.iter().zip(&bits) {
                reg.project(*q, b);
            }
            let weight = reg.norm_sqr();
            let p0 = if weight > 0.0 {
                reg.scale(1.0 / weight.sqrt());
                self.run_receiver(&mut reg, &bits);
                reg.prob_zero(recv).clamp(0.0, 1.0)
            } else {
                0.0
            };
            branches.push(Branch { weight, p0 });
        }
        let total: f64 = branches.iter().map(|b| b.weight).sum();
        let mut acc = 0.0;
        let cumulative = branches
            .iter()
            .map(|b| {
                acc += b.weight / total;
                acc
            })
            .collect();
        Ok(PreparedCircuit { branches, cumulative })
    }
}

#[derive(Clone, Copy, Debug)]
struct Branch {
    weight: f64,
    p0: f64,
}

/// A circuit with its sender state precomputed for a fixed input; each call
/// to [`PreparedCircuit::sample`] is one shot.
#[derive(Clone, Debug)]
pub struct PreparedCircuit {
    branches: Vec<Branch>,
    cumulative: Vec<f64>,
}

impl PreparedCircuit {
    /// One shot: draw the sender's classical outcome, then the receiver's
    /// computational-basis bit conditioned on it.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u8 {
        let u: f64 = rng.random();
        let idx = self
            .cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.branches.len() - 1);
        let v: f64 = rng.random();
        u8::from(v >= self.branches[idx].p0)
    }

    /// Exact `P(b = 0)` implied by the branch table.
    pub fn p0(&self) -> f64 {
        let total: f64 = self.branches.iter().map(|b| b.weight).sum();
        self.branches.iter().map(|b| b.weight * b.p0).sum::<f64>() / total
    }
}

#[derive(Clone, Debug)]
struct Register {
    n: usize,
    amps: Vec<C64>,
}

impl Register {
    fn mask(&self, q: usize) -> usize {
        1 << (self.n - 1 - q)
    }

    fn apply_gate(&mut self, q: usize, g: &ComplexMatrix) {
        let m = self.mask(q);
        for i in 0..self.amps.len() {
            if i & m == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | m]);
                self.amps[i] = g[(0, 0)] * a0 + g[(0, 1)] * a1;
                self.amps[i | m] = g[(1, 0)] * a0 + g[(1, 1)] * a1;
            }
        }
    }

    fn apply_cnot(&mut self, control: usize, target: usize) {
        let (cm, tm) = (self.mask(control), self.mask(target));
        for i in 0..self.amps.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amps.swap(i, i | tm);
            }
        }
    }

    /// Zeroes every amplitude inconsistent with qubit `q` reading `bit`.
    fn project(&mut self, q: usize, bit: u8) {
        let m = self.mask(q);
        for (i, a) in self.amps.iter_mut().enumerate() {
            if u8::from(i & m != 0) != bit {
                *a = C64::default();
            }
        }
    }

    fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn scale(&mut self, s: f64) {
        for a in &mut self.amps {
            *a *= s;
        }
    }

    fn prob_zero(&self, q: usize) -> f64 {
        let m = self.mask(q);
        self.amps.iter().enumerate().filter(|(i, _)| i & m == 0).map(|(_, a)| a.norm_sqr()).sum::<f64>()
            / self.norm_sqr()
    }

    /// Receiver amplitudes with every measured qubit fixed to its bit.
    fn receiver_amplitudes(&self, measured: &[usize], bits: &[u8]) -> [C64; 2] {
        let mut base = 0;
        for (&q, &b) in measured.iter().zip(bits) {
            if b == 1 {
                base |= self.mask(q);
            }
        }
        let rm = self.mask(self.n - 1);
        [self.amps[base], self.amps[base | rm]]
    }
}
