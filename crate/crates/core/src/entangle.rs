//! Non-maximally entangled pairs and the robustness of entanglement.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::qmath::{kron, r, svd_2x2, ComplexMatrix, PureState, C64, STRUCTURAL_TOL};

/// The pair `K(|00⟩ + k|11⟩)` with `K = 1/√(1+k²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NmeResource {
    k: f64,
}

impl NmeResource {
    pub fn new(k: f64) -> Result<Self> {
        check_k(k)?;
        Ok(Self { k })
    }

    /// The resource with the given robustness, taking the branch `k ∈ [0, 1]`.
    pub fn with_robustness(r: f64) -> Result<Self> {
        Ok(Self { k: k_from_robustness(r)? })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// `K = 1/√(1+k²)`.
    pub fn normalization(&self) -> f64 {
        1.0 / (1.0 + self.k * self.k).sqrt()
    }

    pub fn robustness(&self) -> f64 {
        robustness_of_k(self.k)
    }

    pub fn state(&self) -> PureState {
        let norm = self.normalization();
        PureState::new(vec![r(norm), r(0.0), r(0.0), r(self.k * norm)])
            .expect("NME amplitudes are normalized")
    }
}

fn check_k(k: f64) -> Result<()> {
    if !k.is_finite() || k < 0.0 {
        return Err(Error::Domain(format!("Schmidt ratio k must be finite and non-negative, got {k}")));
    }
    Ok(())
}

pub fn nme_state(k: f64) -> Result<PureState> {
    Ok(NmeResource::new(k)?.state())
}

/// Robustness `(p0 + p1)² - 1` of a pure two-qubit state with Schmidt
/// coefficients `p0`, `p1`.
pub fn robustness_pure(p0: f64, p1: f64) -> Result<f64> {
    if !(p0 >= 0.0 && p1 >= 0.0) {
        return Err(Error::Domain(format!("Schmidt coefficients must be non-negative, got ({p0}, {p1})")));
    }
    let norm = p0 * p0 + p1 * p1;
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::Domain(format!("Schmidt coefficients are not normalized: p0² + p1² = {norm}")));
    }
    Ok(((p0 + p1).powi(2) - 1.0).clamp(0.0, 1.0))
}

/// `R(Φ^k) = 2k/(1+k²)`. Symmetric under `k ↔ 1/k`; tends to 0 as `k → ∞`.
pub fn robustness_of_k(k: f64) -> f64 {
    if k.is_infinite() {
        return 0.0;
    }
    2.0 * k / (1.0 + k * k)
}

/// Inverse of [`robustness_of_k`] on the branch `k ∈ [0, 1]`.
pub fn k_from_robustness(r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Domain(format!("robustness must lie in [0, 1], got {r}")));
    }
    // (1 - √(1-r²))/r, rewritten to avoid cancellation for small r.
    Ok(r / (1.0 + (1.0 - r * r).sqrt()))
}

/// `|ψ⟩ = (a ⊗ b)(p0|00⟩ + p1|11⟩)` with `p0 ≥ p1 ≥ 0`.
#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    pub p0: f64,
    pub p1: f64,
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
}

impl SchmidtDecomposition {
    pub fn reconstruct(&self) -> Vec<C64> {
        let core = [r(self.p0), r(0.0), r(0.0), r(self.p1)];
        kron(&self.a, &self.b).mul_vec(&core).expect("4x4 times length 4")
    }

    pub fn robustness(&self) -> Result<f64> {
        robustness_pure(self.p0, self.p1)
    }

    /// The equivalent NME resource, `k = p1/p0`, up to the local unitaries.
    pub fn nme_equivalent(&self) -> NmeResource {
        NmeResource { k: self.p1 / self.p0 }
    }
}

pub fn schmidt_decompose(psi: &PureState) -> Result<SchmidtDecomposition> {
    if psi.dim() != 4 {
        return Err(Error::Dimension(format!("Schmidt decomposition needs two qubits, got dimension {}", psi.dim())));
    }
    let amps = psi.amplitudes();
    // M[i][j] = ⟨ij|ψ⟩, so ψ = Σ s_k u_k ⊗ conj(v_k).
    let m = ComplexMatrix::from_rows([[amps[0], amps[1]], [amps[2], amps[3]]]);
    let svd = svd_2x2(&m)?;
    Ok(SchmidtDecomposition { p0: svd.s[0], p1: svd.s[1], a: svd.u, b: svd.v.conj() })
}

/// Haar-distributed unitary from the QR decomposition of a complex Ginibre
/// matrix, with the diagonal of `R` normalized to positive reals.
///
/// The generator is consumed in row-major order, two normals per entry
/// (real part first).
pub fn haar_random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<ComplexMatrix> {
    if dim == 0 {
        return Err(Error::Domain("unitary dimension must be at least 1".into()));
    }
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let data: Vec<C64> = (0..dim * dim)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re * scale, im * scale)
        })
        .collect();
    let z = DMatrix::from_row_slice(dim, dim, &data);
    let qr = z.qr();
    let q = ComplexMatrix::from_nalgebra(&qr.q());
    let rr = qr.r();
    let phases: Vec<C64> = (0..dim)
        .map(|i| {
            let d = rr[(i, i)];
            if d.norm() == 0.0 {
                r(1.0)
            } else {
                d / d.norm()
            }
        })
        .collect();
    let u = &q * &ComplexMatrix::diag(&phases);
    debug_assert!(u.is_unitary(STRUCTURAL_TOL));
    Ok(u)
}

/// Haar-random pure state `U|0⟩` on `dim` levels.
pub fn haar_random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<PureState> {
    PureState::from_unitary_column(&haar_random_unitary(dim, rng)?)
}
