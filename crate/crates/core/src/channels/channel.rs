//! One-qubit linear maps and their Choi matrices.

use crate::error::{Error, Result};
use crate::qmath::{hermitian_eigenvalues, kron, r, ComplexMatrix, DensityOperator, C64, STRUCTURAL_TOL};

/// A linear map on 2x2 matrices.
pub trait Channel {
    /// Applies the map to an arbitrary (not necessarily Hermitian) operator.
    fn apply_to(&self, x: &ComplexMatrix) -> ComplexMatrix;

    /// `Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)`.
    fn choi(&self) -> ComplexMatrix {
        choi_of(|x| self.apply_to(x))
    }
}

pub fn choi_of(map: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            let unit = ComplexMatrix::unit(2, i, j);
            out = &out + &kron(&unit, &map(&unit));
        }
    }
    out
}

/// Choi matrix of the identity channel, `Σ_ij |ii⟩⟨jj|`.
pub fn identity_choi() -> ComplexMatrix {
    choi_of(|x| x.clone())
}

/// Trace of the Choi matrix over its output factor.
pub fn choi_input_marginal(choi: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            out[(i, j)] = choi[(2 * i, 2 * j)] + choi[(2 * i + 1, 2 * j + 1)];
        }
    }
    out
}

pub fn is_completely_positive(choi: &ComplexMatrix, tol: f64) -> bool {
    choi.is_hermitian(tol)
        && hermitian_eigenvalues(choi)
            .map(|ev| ev.iter().all(|&e| e >= -tol))
            .unwrap_or(false)
}

pub fn is_trace_preserving(choi: &ComplexMatrix, tol: f64) -> bool {
    choi_input_marginal(choi).approx_eq(&ComplexMatrix::identity(2), tol)
}

/// Channel in Kraus form, `ρ ↦ Σ K ρ K†`.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    ops: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::Validation("a channel needs at least one Kraus operator".into()));
        }
        if ops.iter().any(|k| k.rows() != 2 || k.cols() != 2) {
            return Err(Error::Dimension("Kraus operators must be 2x2".into()));
        }
        Ok(Self { ops })
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.ops
    }
}

impl Channel for KrausChannel {
    fn apply_to(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.ops
            .iter()
            .fold(ComplexMatrix::zeros(2, 2), |acc, k| &acc + &(&(k * x) * &k.adjoint()))
    }
}

/// One outcome of a measure-and-prepare channel: `a · Tr[E ·] ρ`.
#[derive(Clone, Debug)]
pub struct MeasurePrepareBranch {
    pub sign: f64,
    pub effect: ComplexMatrix,
    pub prep: DensityOperator,
}

/// `Σ_i a_i Tr[E_i ·] ρ_i` with `{E_i}` a POVM and `a_i = ±1`.
#[derive(Clone, Debug)]
pub struct MeasurePrepareChannel {
    branches: Vec<MeasurePrepareBranch>,
}

impl MeasurePrepareChannel {
    pub fn new(branches: Vec<MeasurePrepareBranch>) -> Result<Self> {
        let mut total = ComplexMatrix::zeros(2, 2);
        for b in &branches {
            if b.sign != 1.0 && b.sign != -1.0 {
                return Err(Error::Validation(format!("branch sign must be ±1, got {}", b.sign)));
            }
            if b.effect.rows() != 2 || b.effect.cols() != 2 || b.prep.dim() != 2 {
                return Err(Error::Dimension("measure-and-prepare branches act on one qubit".into()));
            }
            if !b.effect.is_hermitian(STRUCTURAL_TOL) {
                return Err(Error::Validation("POVM effect is not Hermitian".into()));
            }
            if hermitian_eigenvalues(&b.effect)?.iter().any(|&e| e < -STRUCTURAL_TOL) {
                return Err(Error::Validation("POVM effect is not positive semi-definite".into()));
            }
            total = &total + &b.effect;
        }
        if !total.approx_eq(&ComplexMatrix::identity(2), STRUCTURAL_TOL) {
            return Err(Error::Validation("POVM effects do not sum to the identity".into()));
        }
        Ok(Self { branches })
    }

    /// Measure in the basis `{U|j⟩}` and prepare `W|j⟩` on outcome `j`.
    pub fn in_bases(measure: &ComplexMatrix, prepare: &ComplexMatrix) -> Result<Self> {
        let column = |m: &ComplexMatrix, j: usize| -> Vec<C64> { (0..2).map(|i| m[(i, j)]).collect() };
        let branches = (0..2)
            .map(|j| {
                let e = column(measure, j);
                let p = column(prepare, j);
                Ok(MeasurePrepareBranch {
                    sign: 1.0,
                    effect: ComplexMatrix::outer(&e, &e),
                    prep: DensityOperator::new(ComplexMatrix::outer(&p, &p))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(branches)
    }

    pub fn branches(&self) -> &[MeasurePrepareBranch] {
        &self.branches
    }
}

impl Channel for MeasurePrepareChannel {
    fn apply_to(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.branches.iter().fold(ComplexMatrix::zeros(2, 2), |acc, b| {
            let weight = (&b.effect * x).trace() * r(b.sign);
            &acc + &b.prep.matrix().scale(weight)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::gates;

    #[test]
    fn identity_choi_is_unnormalized_bell_projector() {
        let c = identity_choi();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if (i == 0 || i == 3) && (j == 0 || j == 3) { 1.0 } else { 0.0 };
                assert_eq!(c[(i, j)], r(expect));
            }
        }
        assert!(is_completely_positive(&c, 1e-12));
        assert!(is_trace_preserving(&c, 1e-12));
    }

    #[test]
    fn kraus_unitary_channel() {
        let ch = KrausChannel::new(vec![gates::h()]).unwrap();
        let out = ch.apply_to(&ComplexMatrix::unit(2, 0, 0));
        assert!(out.approx_eq(&ComplexMatrix::from_real_rows([[0.5, 0.5], [0.5, 0.5]]), 1e-15));
        assert!(KrausChannel::new(vec![]).is_err());
        assert!(KrausChannel::new(vec![gates::cnot()]).is_err());
    }

    #[test]
    fn measure_prepare_validation() {
        let zero = DensityOperator::new(ComplexMatrix::unit(2, 0, 0)).unwrap();
        let half_effect = ComplexMatrix::identity(2).scale(r(0.5));
        let ok = MeasurePrepareChannel::new(vec![MeasurePrepareBranch { sign: 1.0, effect: ComplexMatrix::identity(2), prep: zero.clone() }]);
        assert!(ok.is_ok());
        let incomplete = MeasurePrepareChannel::new(vec![MeasurePrepareBranch { sign: 1.0, effect: half_effect.clone(), prep: zero.clone() }]);
        assert!(incomplete.is_err());
        let bad_sign = MeasurePrepareChannel::new(vec![MeasurePrepareBranch { sign: 0.5, effect: ComplexMatrix::identity(2), prep: zero.clone() }]);
        assert!(bad_sign.is_err());
        let negative = ComplexMatrix::from_real_rows([[1.5, 0.0], [0.0, -0.5]]);
        let not_psd = MeasurePrepareChannel::new(vec![
            MeasurePrepareBranch { sign: 1.0, effect: negative, prep: zero.clone() },
            MeasurePrepareBranch { sign: 1.0, effect: ComplexMatrix::from_real_rows([[-0.5, 0.0], [0.0, 1.5]]), prep: zero },
        ]);
        assert!(not_psd.is_err());
    }

    #[test]
    fn dephasing_choi_is_cp_and_tp() {
        let ch = MeasurePrepareChannel::in_bases(&gates::i2(), &gates::i2()).unwrap();
        let c = ch.choi();
        assert!(is_completely_positive(&c, 1e-12));
        assert!(is_trace_preserving(&c, 1e-12));
        assert!(c.approx_eq(&ComplexMatrix::diag(&[r(1.0), r(0.0), r(0.0), r(1.0)]), 1e-15));
    }
}
