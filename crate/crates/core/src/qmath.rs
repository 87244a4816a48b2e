//! Dense complex linear algebra for one- and two-qubit systems.
//!
//! Everything here works on matrices of dimension at most 4 (8 for the
//! internal circuit register), so the implementations favour clarity over
//! speed. Qubit 0 is the most significant tensor factor.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance for structural checks (unitarity, PSD, channel validity).
pub const STRUCTURAL_TOL: f64 = 1e-10;
/// Tolerance for exact-math identities (norms, traces, hermiticity).
pub const EXACT_TOL: f64 = 1e-12;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows. Panics on ragged input.
    pub fn from_rows<const N: usize>(rows: [[C64; N]; N]) -> Self {
        let data = rows.iter().flat_map(|row| row.iter().copied()).collect();
        Self { rows: N, cols: N, data }
    }

    pub fn from_real_rows<const N: usize>(rows: [[f64; N]; N]) -> Self {
        let data = rows.iter().flat_map(|row| row.iter().map(|&x| r(x))).collect();
        Self { rows: N, cols: N, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::default(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = r(1.0);
        }
        m
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Outer product `|a⟩⟨b|`.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        let mut m = Self::zeros(a.len(), b.len());
        for (i, ai) in a.iter().enumerate() {
            for (j, bj) in b.iter().enumerate() {
                m[(i, j)] = ai * bj.conj();
            }
        }
        m
    }

    /// The matrix unit `|i⟩⟨j|` of dimension `n`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = r(1.0);
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    /// Entrywise complex conjugate (not the adjoint).
    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::default() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if self.cols != v.len() {
            return Err(Error::Dimension(format!(
                "cannot apply {}x{} matrix to a length-{} vector",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect())
    }

    /// Largest absolute entrywise difference; `INFINITY` on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.max_abs_diff(&self.adjoint()) <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square()
            && (self.adjoint().try_mul(self))
                .map(|p| p.approx_eq(&Self::identity(self.rows), tol))
                .unwrap_or(false)
    }

    /// `(M + M†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale(r(0.5))
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].norm() <= tol))
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out[(i, j)] = m[(i, j)];
            }
        }
        out
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of range");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of range");
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_mul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix sum shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix difference shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>9.5}{:+.5}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product; `a` is the more significant factor.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ai in 0..a.rows {
        for aj in 0..a.cols {
            let s = a[(ai, aj)];
            for bi in 0..b.rows {
                for bj in 0..b.cols {
                    out[(ai * b.rows + bi, aj * b.cols + bj)] = s * b[(bi, bj)];
                }
            }
        }
    }
    out
}

/// Standard single- and two-qubit gates.
pub mod gates {
    use super::{c, r, ComplexMatrix};
    use std::f64::consts::FRAC_1_SQRT_2;

    pub fn i2() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows([[0.0, 1.0], [1.0, 0.0]])
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_rows([[r(0.0), c(0.0, -1.0)], [c(0.0, 1.0), r(0.0)]])
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real_rows([[1.0, 0.0], [0.0, -1.0]])
    }

    pub fn h() -> ComplexMatrix {
        ComplexMatrix::from_real_rows([[FRAC_1_SQRT_2, FRAC_1_SQRT_2], [FRAC_1_SQRT_2, -FRAC_1_SQRT_2]])
    }

    pub fn s() -> ComplexMatrix {
        ComplexMatrix::from_rows([[r(1.0), r(0.0)], [r(0.0), c(0.0, 1.0)]])
    }

    pub fn sdg() -> ComplexMatrix {
        ComplexMatrix::from_rows([[r(1.0), r(0.0)], [r(0.0), c(0.0, -1.0)]])
    }

    /// CNOT with qubit 0 as control and qubit 1 as target.
    pub fn cnot() -> ComplexMatrix {
        ComplexMatrix::from_real_rows([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0, 0.0],
        ])
    }
}

/// Normalized state vector on one or two qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amps: Vec<C64>,
}

impl PureState {
    /// Validates the dimension (2 or 4) and unit norm within `1e-12`.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        check_qubit_dim(amps.len())?;
        let norm = norm(&amps);
        if (norm - 1.0).abs() > EXACT_TOL {
            return Err(Error::Validation(format!("state norm {norm} is not 1")));
        }
        Ok(Self { amps })
    }

    /// Rescales `amps` to unit norm.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        check_qubit_dim(amps.len())?;
        let n = norm(&amps);
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Validation("cannot normalize a zero vector".into()));
        }
        Ok(Self { amps: amps.into_iter().map(|a| a / n).collect() })
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        check_qubit_dim(dim)?;
        if index >= dim {
            return Err(Error::Domain(format!("basis index {index} >= {dim}")));
        }
        let mut amps = vec![C64::default(); dim];
        amps[index] = r(1.0);
        Ok(Self { amps })
    }

    pub fn zero() -> Self {
        Self { amps: vec![r(1.0), r(0.0)] }
    }

    pub fn one() -> Self {
        Self { amps: vec![r(0.0), r(1.0)] }
    }

    pub fn plus() -> Self {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        Self { amps: vec![r(a), r(a)] }
    }

    pub fn plus_i() -> Self {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        Self { amps: vec![r(a), c(0.0, a)] }
    }

    /// `U|0⟩`, the first column of a unitary.
    pub fn from_unitary_column(u: &ComplexMatrix) -> Result<Self> {
        if !u.is_unitary(STRUCTURAL_TOL) {
            return Err(Error::Validation("matrix is not unitary".into()));
        }
        Self::normalized((0..u.rows()).map(|i| u[(i, 0)]).collect())
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|⟨self|other⟩|`; equals 1 iff the states agree up to global phase.
    pub fn overlap(&self, other: &Self) -> f64 {
        self.inner(other).norm()
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator { matrix: ComplexMatrix::outer(&self.amps, &self.amps) }
    }

    pub fn apply(&self, u: &ComplexMatrix) -> Result<Self> {
        Self::normalized(u.mul_vec(&self.amps)?)
    }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

fn check_qubit_dim(dim: usize) -> Result<()> {
    match dim {
        2 | 4 => Ok(()),
        d => Err(Error::Dimension(format!("expected dimension 2 or 4, got {d}"))),
    }
}

/// Hermitian, positive semi-definite, unit-trace matrix on one or two qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension("density operator must be square".into()));
        }
        check_qubit_dim(matrix.rows())?;
        if !matrix.is_hermitian(EXACT_TOL) {
            return Err(Error::Validation("density operator is not Hermitian".into()));
        }
        let tr = matrix.trace();
        if (tr - r(1.0)).norm() > EXACT_TOL {
            return Err(Error::Validation(format!("trace {tr} is not 1")));
        }
        let min_eig = hermitian_eigenvalues(&matrix)?.into_iter().fold(f64::INFINITY, f64::min);
        if min_eig < -STRUCTURAL_TOL {
            return Err(Error::Validation(format!("negative eigenvalue {min_eig}")));
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        check_qubit_dim(dim)?;
        Ok(Self { matrix: ComplexMatrix::identity(dim).scale(r(1.0 / dim as f64)) })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.matrix.approx_eq(&other.matrix, tol)
    }
}

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// 2x2 matrices use the closed form; larger ones go through nalgebra's
/// Hermitian eigensolver.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::Dimension("eigenvalues of a non-square matrix".into()));
    }
    match m.rows() {
        1 => Ok(vec![m[(0, 0)].re]),
        2 => {
            let (lo, hi) = eig2_hermitian(m[(0, 0)].re, m[(1, 1)].re, m[(0, 1)]);
            Ok(vec![lo, hi])
        }
        _ => {
            let mut ev: Vec<f64> = m.hermitian_part().to_nalgebra().symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            Ok(ev)
        }
    }
}

/// Eigenvalues `(low, high)` of `[[a, b], [b*, d]]`.
fn eig2_hermitian(a: f64, d: f64, b: C64) -> (f64, f64) {
    let mean = 0.5 * (a + d);
    let rad = (0.5 * (a - d)).hypot(b.norm());
    (mean - rad, mean + rad)
}

/// `U ρ U†`.
pub fn apply_unitary(u: &ComplexMatrix, rho: &DensityOperator) -> Result<DensityOperator> {
    if u.rows() != rho.dim() || u.cols() != rho.dim() {
        return Err(Error::Dimension(format!(
            "{}x{} unitary on a dimension-{} state",
            u.rows(),
            u.cols(),
            rho.dim()
        )));
    }
    if !u.is_unitary(STRUCTURAL_TOL) {
        return Err(Error::Validation("matrix is not unitary".into()));
    }
    let out = &(u * rho.matrix()) * &u.adjoint();
    DensityOperator::new(out.hermitian_part())
}

/// Born-rule probabilities of a computational-basis measurement.
pub fn computational_probs(rho: &DensityOperator) -> Vec<f64> {
    (0..rho.dim()).map(|i| rho.matrix()[(i, i)].re.clamp(0.0, 1.0)).collect()
}

/// Reduced state of qubit `keep` of a two-qubit density operator.
pub fn partial_trace(rho: &DensityOperator, keep: usize) -> Result<DensityOperator> {
    if rho.dim() != 4 {
        return Err(Error::Dimension(format!("partial trace needs a two-qubit state, got dimension {}", rho.dim())));
    }
    let m = rho.matrix();
    let mut out = ComplexMatrix::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            out[(i, j)] = match keep {
                0 => m[(2 * i, 2 * j)] + m[(2 * i + 1, 2 * j + 1)],
                1 => m[(i, j)] + m[(2 + i, 2 + j)],
                q => return Err(Error::Domain(format!("qubit index {q} out of range for two qubits"))),
            };
        }
    }
    DensityOperator::new(out.hermitian_part())
}

/// Singular value decomposition `m = u · diag(s) · v†` of a 2x2 matrix.
#[derive(Clone, Debug)]
pub struct Svd2 {
    pub u: ComplexMatrix,
    /// Singular values, descending.
    pub s: [f64; 2],
    pub v: ComplexMatrix,
}

impl Svd2 {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let sd = ComplexMatrix::diag(&[r(self.s[0]), r(self.s[1])]);
        &(&self.u * &sd) * &self.v.adjoint()
    }
}

/// Closed-form SVD of a 2x2 complex matrix.
///
/// The right singular vectors are eigenvectors of `m†m`. The first left
/// vector is `m v0 / s0`; the second is the orthogonal complement of the
/// first, and `s1` is read off as `|⟨u1|m|v1⟩|` with its phase moved into
/// `u1`. This keeps the reconstruction accurate when `s1` is tiny.
pub fn svd_2x2(m: &ComplexMatrix) -> Result<Svd2> {
    if m.rows() != 2 || m.cols() != 2 {
        return Err(Error::Dimension(format!("svd_2x2 on a {}x{} matrix", m.rows(), m.cols())));
    }
    let scale = m.entries().iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(Svd2 { u: gates::i2(), s: [0.0, 0.0], v: gates::i2() });
    }
    let mn = m.scale(r(1.0 / scale));
    let g = &mn.adjoint() * &mn;
    let (a, d, b) = (g[(0, 0)].re, g[(1, 1)].re, g[(0, 1)]);
    let (_, hi) = eig2_hermitian(a, d, b);

    // Eigenvector of [[a, b], [b*, d]] for `hi`: pick the better conditioned
    // of the two null-space candidates.
    let cand1 = [b, r(hi - a)];
    let cand2 = [r(hi - d), b.conj()];
    let n1 = norm(&cand1);
    let n2 = norm(&cand2);
    let v0 = if n1 == 0.0 && n2 == 0.0 {
        [r(1.0), r(0.0)]
    } else if n1 >= n2 {
        [cand1[0] / n1, cand1[1] / n1]
    } else {
        [cand2[0] / n2, cand2[1] / n2]
    };
    let v1 = orthogonal_complement(v0);

    let mv0 = mn.mul_vec(&v0)?;
    let s0 = norm(&mv0);
    let u0 = [mv0[0] / s0, mv0[1] / s0];
    let mut u1 = orthogonal_complement(u0);
    let mv1 = mn.mul_vec(&v1)?;
    let proj = u1[0].conj() * mv1[0] + u1[1].conj() * mv1[1];
    let s1 = proj.norm();
    if s1 > 0.0 {
        let phase = proj / s1;
        u1 = [u1[0] * phase, u1[1] * phase];
    }

    let u = ComplexMatrix::from_rows([[u0[0], u1[0]], [u0[1], u1[1]]]);
    let v = ComplexMatrix::from_rows([[v0[0], v1[0]], [v0[1], v1[1]]]);
    Ok(Svd2 { u, s: [s0 * scale, s1 * scale], v })
}

/// Unit vector orthogonal to the unit vector `v` in C².
fn orthogonal_complement(v: [C64; 2]) -> [C64; 2] {
    [-v[1].conj(), v[0].conj()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn rand_matrix(seed: u64, n: usize) -> ComplexMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n * n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        ComplexMatrix::new(n, n, data).unwrap()
    }

    #[test]
    fn kron_identity() {
        assert!(kron(&gates::i2(), &gates::i2()).approx_eq(&ComplexMatrix::identity(4), 0.0));
    }

    #[test]
    fn kron_bit_flip_on_first_qubit() {
        let v = kron(&gates::x(), &gates::i2()).mul_vec(PureState::basis(4, 0).unwrap().amplitudes()).unwrap();
        assert_eq!(v, PureState::basis(4, 2).unwrap().amplitudes());
    }

    #[test]
    fn kron_hadamards_uniform() {
        let hh = kron(&gates::h(), &gates::h());
        let v = hh.mul_vec(PureState::basis(4, 0).unwrap().amplitudes()).unwrap();
        // Oracle: explicit 4x4 matrix-vector product with entries ±1/2.
        let signs = [[1.0, 1.0, 1.0, 1.0], [1.0, -1.0, 1.0, -1.0], [1.0, 1.0, -1.0, -1.0], [1.0, -1.0, -1.0, 1.0]];
        for i in 0..4 {
            assert!((v[i] - r(0.5 * signs[i][0])).norm() < 1e-15);
            for j in 0..4 {
                assert!((hh[(i, j)] - r(0.5 * signs[i][j])).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn mixed_product_property() {
        for seed in 0..50 {
            let a = rand_matrix(4 * seed, 2);
            let b = rand_matrix(4 * seed + 1, 2);
            let cm = rand_matrix(4 * seed + 2, 2);
            let d = rand_matrix(4 * seed + 3, 2);
            let lhs = &kron(&a, &b) * &kron(&cm, &d);
            let rhs = kron(&(&a * &cm), &(&b * &d));
            assert!(lhs.approx_eq(&rhs, 1e-12));
            let assoc1 = kron(&kron(&a, &b), &cm);
            let assoc2 = kron(&a, &kron(&b, &cm));
            assert!(assoc1.approx_eq(&assoc2, 1e-12));
        }
    }

    #[test]
    fn apply_unitary_examples() {
        let zero = PureState::zero().density();
        assert_eq!(apply_unitary(&gates::i2(), &zero).unwrap(), zero);
        let flipped = apply_unitary(&gates::x(), &zero).unwrap();
        assert!(flipped.approx_eq(&PureState::one().density(), 1e-15));
        let had = apply_unitary(&gates::h(), &zero).unwrap();
        // Oracle: H|0⟩⟨0|H has every entry equal to (1/√2)^2.
        for z in had.matrix().entries() {
            assert!((z - r(0.5)).norm() < 1e-15);
        }
    }

    #[test]
    fn apply_unitary_errors() {
        let zero = PureState::zero().density();
        let not_unitary = ComplexMatrix::from_real_rows([[1.0, 1.0], [0.0, 1.0]]);
        assert!(matches!(apply_unitary(&not_unitary, &zero), Err(Error::Validation(_))));
        assert!(matches!(apply_unitary(&gates::cnot(), &zero), Err(Error::Dimension(_))));
    }

    #[test]
    fn computational_probs_examples() {
        assert_eq!(computational_probs(&PureState::zero().density()), vec![1.0, 0.0]);
        let p = computational_probs(&PureState::plus().density());
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn partial_trace_examples() {
        let d00 = PureState::basis(4, 0).unwrap().density();
        assert!(partial_trace(&d00, 0).unwrap().approx_eq(&PureState::zero().density(), 0.0));
        let bell = PureState::new(vec![r(FRAC_1_SQRT_2), r(0.0), r(0.0), r(FRAC_1_SQRT_2)]).unwrap();
        let half = DensityOperator::maximally_mixed(2).unwrap();
        assert!(partial_trace(&bell.density(), 1).unwrap().approx_eq(&half, 1e-15));
        // k = 0.5: K² diag(1, k²) with K² = 1/1.25.
        let k2: f64 = 1.0 / 1.25;
        let nme = PureState::new(vec![r(k2.sqrt()), r(0.0), r(0.0), r(0.5 * k2.sqrt())]).unwrap();
        let red = partial_trace(&nme.density(), 1).unwrap();
        assert!(red.approx_eq(&DensityOperator::new(ComplexMatrix::from_real_rows([[0.8, 0.0], [0.0, 0.2]])).unwrap(), 1e-15));
        assert!(matches!(partial_trace(&PureState::zero().density(), 0), Err(Error::Dimension(_))));
        assert!(matches!(partial_trace(&d00, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn partial_trace_product_state() {
        let a = PureState::plus_i();
        let b = PureState::one();
        let joint = DensityOperator::new(kron(a.density().matrix(), b.density().matrix())).unwrap();
        assert!(partial_trace(&joint, 0).unwrap().approx_eq(&a.density(), 1e-15));
        assert!(partial_trace(&joint, 1).unwrap().approx_eq(&b.density(), 1e-15));
    }

    #[test]
    fn svd_examples() {
        let d = svd_2x2(&ComplexMatrix::from_real_rows([[1.0, 0.0], [0.0, 0.0]])).unwrap();
        assert!((d.s[0] - 1.0).abs() < 1e-15 && d.s[1].abs() < 1e-15);

        let scaled = gates::i2().scale(r(FRAC_1_SQRT_2));
        let d = svd_2x2(&scaled).unwrap();
        assert!((d.s[0] - FRAC_1_SQRT_2).abs() < 1e-15 && (d.s[1] - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(d.reconstruct().approx_eq(&scaled, 1e-15));

        let m = ComplexMatrix::from_real_rows([[0.6, 0.0], [0.0, 0.8]]);
        let d = svd_2x2(&m).unwrap();
        assert!((d.s[0] - 0.8).abs() < 1e-15 && (d.s[1] - 0.6).abs() < 1e-15);
        assert!(d.reconstruct().approx_eq(&m, 1e-15));
        assert!(d.u.is_unitary(1e-12) && d.v.is_unitary(1e-12));

        let zero = ComplexMatrix::zeros(2, 2);
        assert_eq!(svd_2x2(&zero).unwrap().s, [0.0, 0.0]);
        assert!(matches!(svd_2x2(&gates::cnot()), Err(Error::Dimension(_))));
    }

    #[test]
    fn svd_random_reconstruction() {
        for seed in 0..1000 {
            let m = rand_matrix(10_000 + seed, 2);
            let d = svd_2x2(&m).unwrap();
            assert!(d.reconstruct().max_abs_diff(&m) <= 1e-10, "seed {seed}");
            assert!(d.u.is_unitary(1e-10) && d.v.is_unitary(1e-10));
            assert!(d.s[0] >= d.s[1] && d.s[1] >= 0.0);
        }
    }

    #[test]
    fn svd_rank_deficient() {
        // Rank one: outer product of two random vectors, plus a tiny perturbation.
        let a = [c(0.3, -0.2), c(0.7, 0.1)];
        let b = [c(-0.5, 0.4), c(0.2, 0.9)];
        for eps in [0.0, 1e-14, 1e-9] {
            let m = &ComplexMatrix::outer(&a, &b) + &ComplexMatrix::unit(2, 1, 1).scale(r(eps));
            let d = svd_2x2(&m).unwrap();
            assert!(d.reconstruct().max_abs_diff(&m) <= 1e-14);
            assert!(d.u.is_unitary(1e-12) && d.v.is_unitary(1e-12));
        }
    }

    #[test]
    fn density_validation() {
        let not_herm = ComplexMatrix::from_rows([[r(0.5), c(0.0, 0.5)], [c(0.0, 0.5), r(0.5)]]);
        assert!(DensityOperator::new(not_herm).is_err());
        assert!(DensityOperator::new(ComplexMatrix::from_real_rows([[0.6, 0.0], [0.0, 0.6]])).is_err());
        assert!(DensityOperator::new(ComplexMatrix::from_real_rows([[1.2, 0.0], [0.0, -0.2]])).is_err());
        let bad4 = ComplexMatrix::diag(&[r(0.6), r(0.6), r(-0.1), r(-0.1)]);
        assert!(DensityOperator::new(bad4).is_err());
        assert!(DensityOperator::new(ComplexMatrix::identity(3).scale(r(1.0 / 3.0))).is_err());
    }

    #[test]
    fn pure_state_validation() {
        assert!(PureState::new(vec![r(1.0), r(1.0)]).is_err());
        assert!(PureState::new(vec![r(1.0); 3]).is_err());
        assert!(PureState::normalized(vec![r(0.0), r(0.0)]).is_err());
        assert!(PureState::basis(2, 2).is_err());
        assert!((PureState::plus().overlap(&PureState::plus_i()) - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn eigenvalues_of_known_spectra() {
        let ev = hermitian_eigenvalues(&gates::y()).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
        let m = kron(&gates::z(), &gates::x());
        let ev = hermitian_eigenvalues(&m).unwrap();
        let expect = [-1.0, -1.0, 1.0, 1.0];
        for (a, b) in ev.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn unitary_from(params: [f64; 4]) -> ComplexMatrix {
            // U = e^{iα} Rz(β) Ry(γ) Rz(δ)
            let [al, be, ga, de] = params;
            let rz = |t: f64| ComplexMatrix::diag(&[C64::from_polar(1.0, -t / 2.0), C64::from_polar(1.0, t / 2.0)]);
            let ry = |t: f64| {
                let (s, co) = (t / 2.0).sin_cos();
                ComplexMatrix::from_real_rows([[co, -s], [s, co]])
            };
            (&(&rz(be) * &ry(ga)) * &rz(de)).scale(C64::from_polar(1.0, al))
        }

        proptest! {
            #[test]
            fn unitary_preserves_trace_and_spectrum(
                params in prop::array::uniform4(-3.2f64..3.2),
                w in 0.0f64..1.0,
                theta in 0.0f64..3.2,
                phi in 0.0f64..6.3,
            ) {
                let u = unitary_from(params);
                let psi = PureState::new(vec![r((theta / 2.0).cos()), C64::from_polar((theta / 2.0).sin(), phi)]).unwrap();
                let mixed = &psi.density().matrix().scale(r(w)) + &gates::i2().scale(r((1.0 - w) / 2.0));
                let rho = DensityOperator::new(mixed).unwrap();
                let out = apply_unitary(&u, &rho).unwrap();
                prop_assert!((out.matrix().trace() - r(1.0)).norm() < 1e-10);
                let e0 = hermitian_eigenvalues(rho.matrix()).unwrap();
                let e1 = hermitian_eigenvalues(out.matrix()).unwrap();
                for (a, b) in e0.iter().zip(&e1) {
                    prop_assert!((a - b).abs() < 1e-10);
                }
                let p = computational_probs(&out);
                prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            }
        }
    }
}
