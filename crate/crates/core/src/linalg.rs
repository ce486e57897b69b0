//! Small dense complex linear algebra over photon-mode bases.
//!
//! Every space in this crate has dimension at most 3 (vacuum plus the two
//! single-photon polarization modes), so operators are stored as flat
//! row-major vectors and all algorithms are exact or iterate to machine
//! precision.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Complex = num_complex::Complex64;

/// Tolerance for Hermiticity, completeness and positivity checks.
pub const TOLERANCE: f64 = 1e-12;

/// Largest operator dimension the eigensolver accepts.
pub const MAX_DIM: usize = 4;

/// Label of one photon-mode basis ket.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// No photon.
    Vac,
    /// One photon, polarization |0⟩.
    Ph0,
    /// One photon, polarization |1⟩.
    Ph1,
}

impl Mode {
    pub const QUTRIT: [Mode; 3] = [Mode::Vac, Mode::Ph0, Mode::Ph1];
    pub const QUBIT: [Mode; 2] = [Mode::Ph0, Mode::Ph1];
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Vac => "VAC",
            Mode::Ph0 => "PH0",
            Mode::Ph1 => "PH1",
        })
    }
}

/// Complex amplitudes over a labeled mode basis.
///
/// Vectors may be subnormalized: a squared norm below one is interpreted as
/// probability weight that lives outside the truncated space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    amplitudes: Vec<Complex>,
    labels: Vec<Mode>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex>, labels: Vec<Mode>) -> Result<Self> {
        if amplitudes.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                left: amplitudes.len(),
                right: labels.len(),
            });
        }
        let state = Self { amplitudes, labels };
        let norm = state.norm_sqr();
        if !(norm <= 1.0 + TOLERANCE) {
            return Err(Error::OverNormalized(norm));
        }
        Ok(state)
    }

    /// Vector on the `{VAC, PH0, PH1}` space.
    pub fn qutrit(amplitudes: [Complex; 3]) -> Result<Self> {
        Self::new(amplitudes.to_vec(), Mode::QUTRIT.to_vec())
    }

    /// Vector on the single-photon `{PH0, PH1}` space.
    pub fn qubit(amplitudes: [Complex; 2]) -> Result<Self> {
        Self::new(amplitudes.to_vec(), Mode::QUBIT.to_vec())
    }

    pub fn zero(labels: &[Mode]) -> Self {
        Self {
            amplitudes: vec![Complex::new(0.0, 0.0); labels.len()],
            labels: labels.to_vec(),
        }
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amplitudes
    }

    pub fn labels(&self) -> &[Mode] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitude(&self, mode: Mode) -> Option<Complex> {
        self.labels
            .iter()
            .position(|&m| m == mode)
            .map(|i| self.amplitudes[i])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Returns the vector scaled to unit norm, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 {
            return None;
        }
        Some(Self {
            amplitudes: self.amplitudes.iter().map(|a| a / norm).collect(),
            labels: self.labels.clone(),
        })
    }

    /// Multiplies by a global phase so the largest-magnitude amplitude is
    /// real and positive. Ties go to the lowest index.
    pub fn with_canonical_phase(&self) -> Self {
        let mut best = 0;
        for (i, a) in self.amplitudes.iter().enumerate() {
            if a.norm() > self.amplitudes[best].norm() * (1.0 + 1e-12) {
                best = i;
            }
        }
        let pivot = self.amplitudes[best];
        if pivot.norm() == 0.0 {
            return self.clone();
        }
        let phase = pivot.conj() / pivot.norm();
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a * phase).collect(),
            labels: self.labels.clone(),
        }
    }
}

/// `⟨a|b⟩ = Σ conj(a_i) b_i`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<Complex> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    if a.labels != b.labels {
        return Err(Error::LabelMismatch);
    }
    Ok(a.amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// Dense Hermitian matrix, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HermitianOperator {
    dim: usize,
    entries: Vec<Complex>,
}

impl HermitianOperator {
    /// Validates `entries` (row-major, `dim * dim`) against its conjugate
    /// transpose to within [`TOLERANCE`].
    pub fn new(dim: usize, entries: Vec<Complex>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                left: entries.len(),
                right: dim * dim,
            });
        }
        let mut deviation: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let d = (entries[i * dim + j] - entries[j * dim + i].conj()).norm();
                deviation = deviation.max(d);
            }
        }
        if !(deviation <= TOLERANCE) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { dim, entries })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut entries = vec![Complex::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex::new(1.0, 0.0);
        }
        Self::new(dim, entries)
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let dim = values.len();
        let mut entries = vec![Complex::new(0.0, 0.0); dim * dim];
        for (i, &v) in values.iter().enumerate() {
            entries[i * dim + i] = Complex::new(v, 0.0);
        }
        Self::new(dim, entries)
    }

    /// `weight · |v⟩⟨v|`.
    pub fn projector(v: &StateVector, weight: f64) -> Result<Self> {
        let dim = v.dim();
        let a = v.amplitudes();
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(a[i] * a[j].conj() * weight);
            }
        }
        Self::new(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex {
        self.entries[row * self.dim + col]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_dim(other.dim)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `op |v⟩` as raw amplitudes.
    pub fn apply(&self, v: &StateVector) -> Result<Vec<Complex>> {
        self.check_dim(v.dim())?;
        Ok((0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| self.get(i, j) * v.amplitudes()[j])
                    .sum()
            })
            .collect())
    }

    /// All eigenvalues in ascending order, from a cyclic Jacobi sweep on the
    /// real symmetric embedding `[[Re, -Im], [Im, Re]]`. Each eigenvalue of
    /// the embedding appears twice; one copy of each pair is returned.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.dim;
        let m = 2 * n;
        let mut a = vec![vec![0.0f64; m]; m];
        for i in 0..n {
            for j in 0..n {
                let z = self.get(i, j);
                a[i][j] = z.re;
                a[i + n][j + n] = z.re;
                a[i][j + n] = -z.im;
                a[i + n][j] = z.im;
            }
        }
        jacobi_symmetric(&mut a);
        let mut values: Vec<f64> = (0..m).map(|i| a[i][i]).collect();
        values.sort_by(|x, y| x.total_cmp(y));
        values.into_iter().step_by(2).collect()
    }

    fn check_dim(&self, other: usize) -> Result<()> {
        if self.dim != other {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other,
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex, Complex) -> Complex) -> Result<Self> {
        self.check_dim(other.dim)?;
        Self::new(
            self.dim,
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }
}

fn jacobi_symmetric(a: &mut [Vec<f64>]) {
    let m = a.len();
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    if scale == 0.0 {
        return;
    }
    for _sweep in 0..64 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-17 * scale {
            return;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = a[p][q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (kp, kq) = (row[p], row[q]);
                    row[p] = c * kp - s * kq;
                    row[q] = s * kp + c * kq;
                }
                for k in 0..m {
                    let (pk, qk) = (a[p][k], a[q][k]);
                    a[p][k] = c * pk - s * qk;
                    a[q][k] = s * pk + c * qk;
                }
            }
        }
    }
}

/// Eigenvalues of a 3×3 Hermitian operator from the trigonometric solution
/// of its characteristic cubic, ascending.
///
/// The normalized half-determinant `r` is clamped to `[-1, 1]`; rounding can
/// push it just outside when two roots (nearly) coincide.
pub fn eigenvalues_closed_form(op: &HermitianOperator) -> Result<[f64; 3]> {
    if op.dim() != 3 {
        return Err(Error::UnsupportedDimension(op.dim()));
    }
    let d = |i: usize| op.get(i, i).re;
    let off = op.get(0, 1).norm_sqr() + op.get(0, 2).norm_sqr() + op.get(1, 2).norm_sqr();
    let q = (d(0) + d(1) + d(2)) / 3.0;
    let p2 = (d(0) - q).powi(2) + (d(1) - q).powi(2) + (d(2) - q).powi(2) + 2.0 * off;
    let p = (p2 / 6.0).sqrt();
    if p == 0.0 {
        return Ok([q, q, q]);
    }
    // B = (A - qI) / p; det(B) is real for Hermitian B.
    let b = |i: usize, j: usize| {
        let z = op.get(i, j);
        if i == j {
            (z - q) / p
        } else {
            z / p
        }
    };
    let det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1))
        - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
        + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
    let r = (det.re / 2.0).clamp(-1.0, 1.0);
    let angle = r.acos() / 3.0;
    let largest = q + 2.0 * p * angle.cos();
    let smallest = q + 2.0 * p * (angle + 2.0 * std::f64::consts::PI / 3.0).cos();
    let middle = 3.0 * q - largest - smallest;
    Ok([smallest, middle, largest])
}

/// Smallest eigenvalue of `op`, to within about `1e-15 · ‖op‖`.
pub fn min_eigenvalue(op: &HermitianOperator) -> Result<f64> {
    if op.dim() > MAX_DIM {
        return Err(Error::UnsupportedDimension(op.dim()));
    }
    Ok(op.eigenvalues()[0])
}

/// `⟨state|op|state⟩`. The imaginary residue of the exact sum is discarded.
pub fn expectation(state: &StateVector, op: &HermitianOperator) -> Result<f64> {
    let image = op.apply(state)?;
    Ok(state
        .amplitudes()
        .iter()
        .zip(&image)
        .map(|(a, b)| a.conj() * b)
        .sum::<Complex>()
        .re)
}

/// Measurement outcome labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Bit0,
    Bit1,
    Dk,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Bit0 => "BIT0",
            Outcome::Bit1 => "BIT1",
            Outcome::Dk => "DK",
        }
    }
}

/// Positive operators summing to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    elements: Vec<(Outcome, HermitianOperator)>,
}

impl Povm {
    pub fn new(elements: Vec<(Outcome, HermitianOperator)>) -> Result<Self> {
        let dim = elements
            .first()
            .map(|(_, e)| e.dim())
            .ok_or(Error::UnsupportedDimension(0))?;
        let mut sum = HermitianOperator::diagonal(&vec![0.0; dim])?;
        for (outcome, element) in &elements {
            let lowest = min_eigenvalue(element)?;
            if lowest < -TOLERANCE {
                return Err(Error::PovmNotPositive {
                    outcome: outcome.name(),
                    eigenvalue: lowest,
                });
            }
            sum = sum.add(element)?;
        }
        let deviation = sum.max_abs_diff(&HermitianOperator::identity(dim)?)?;
        if deviation > TOLERANCE {
            return Err(Error::PovmIncomplete { deviation });
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[(Outcome, HermitianOperator)] {
        &self.elements
    }

    pub fn element(&self, outcome: Outcome) -> Option<&HermitianOperator> {
        self.elements
            .iter()
            .find(|(o, _)| *o == outcome)
            .map(|(_, e)| e)
    }

    /// Outcome probabilities on `state`, in element order. For a
    /// subnormalized state they sum to its squared norm.
    pub fn probabilities(&self, state: &StateVector) -> Result<Vec<f64>> {
        self.elements
            .iter()
            .map(|(_, e)| expectation(state, e))
            .collect()
    }
}

/// Cumulative table for repeated categorical draws.
///
/// When the weights sum to less than one, the residual mass maps to an extra
/// outcome with index `weights.len()`.
#[derive(Clone, Debug)]
pub struct Categorical {
    cumulative: Vec<f64>,
}

impl Categorical {
    pub fn new(weights: &[f64]) -> Result<Self> {
        let mut total = 0.0;
        let mut cumulative = Vec::with_capacity(weights.len());
        for (index, &value) in weights.iter().enumerate() {
            if !(value >= 0.0) {
                return Err(Error::NegativeWeight { index, value });
            }
            total += value;
            cumulative.push(total);
        }
        if total > 1.0 + 1e-9 {
            return Err(Error::WeightsExceedOne(total));
        }
        Ok(Self { cumulative })
    }

    pub fn residual_index(&self) -> usize {
        self.cumulative.len()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.cumulative.len())
    }
}

/// One draw from `weights`; see [`Categorical`] for the residual outcome.
pub fn sample_categorical<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Result<usize> {
    Ok(Categorical::new(weights)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn random_hermitian(dim: usize, seed: u64) -> HermitianOperator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut e = vec![c(0.0, 0.0); dim * dim];
        for i in 0..dim {
            e[i * dim + i] = c(rng.random_range(-1.0..1.0), 0.0);
            for j in (i + 1)..dim {
                let z = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                e[i * dim + j] = z;
                e[j * dim + i] = z.conj();
            }
        }
        HermitianOperator::new(dim, e).unwrap()
    }

    #[test]
    fn orthonormal_basis_kets() {
        let zero = StateVector::qubit([c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let one = StateVector::qubit([c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(inner_product(&zero, &one).unwrap(), c(0.0, 0.0));
        assert_eq!(inner_product(&zero, &zero).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn mismatched_spaces_are_rejected() {
        let qubit = StateVector::qubit([c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let qutrit = StateVector::qutrit([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(matches!(
            inner_product(&qubit, &qutrit),
            Err(Error::DimensionMismatch { .. })
        ));
        let id = HermitianOperator::identity(3).unwrap();
        assert!(expectation(&qubit, &id).is_err());
    }

    #[test]
    fn state_invariants() {
        assert!(StateVector::new(vec![c(1.0, 0.0)], vec![Mode::Vac, Mode::Ph0]).is_err());
        assert!(matches!(
            StateVector::qubit([c(1.0, 0.0), c(0.5, 0.0)]),
            Err(Error::OverNormalized(_))
        ));
        let sub = StateVector::qubit([c(0.5, 0.0), c(0.0, 0.5)]).unwrap();
        assert!((sub.norm_sqr() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn canonical_phase_makes_pivot_real_positive() {
        let v = StateVector::qutrit([c(0.1, 0.1), c(0.0, -0.8), c(0.2, 0.0)]).unwrap();
        let fixed = v.with_canonical_phase();
        let pivot = fixed.amplitudes()[1];
        assert!(pivot.im.abs() < 1e-15 && pivot.re > 0.0);
        assert!((inner_product(&v, &fixed).unwrap().norm() - v.norm_sqr()).abs() < 1e-15);
    }

    #[test]
    fn identity_expectation_is_norm() {
        let v = StateVector::qutrit([c(0.3, 0.1), c(-0.2, 0.4), c(0.1, -0.5)]).unwrap();
        let id = HermitianOperator::identity(3).unwrap();
        assert!((expectation(&v, &id).unwrap() - v.norm_sqr()).abs() < 1e-15);
        let zero = StateVector::zero(&Mode::QUTRIT);
        assert_eq!(expectation(&zero, &random_hermitian(3, 1)).unwrap(), 0.0);
    }

    #[test]
    fn non_hermitian_rejected() {
        let e = vec![c(1.0, 0.0), c(0.5, 0.0), c(0.4, 0.0), c(1.0, 0.0)];
        assert!(matches!(
            HermitianOperator::new(2, e),
            Err(Error::NotHermitian { .. })
        ));
        let e = vec![c(1.0, 1e-3), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        assert!(HermitianOperator::new(2, e).is_err());
        assert!(matches!(
            HermitianOperator::identity(5),
            Err(Error::UnsupportedDimension(5))
        ));
    }

    #[test]
    fn min_eigenvalue_examples() {
        let id = HermitianOperator::identity(3).unwrap();
        assert!((min_eigenvalue(&id).unwrap() - 1.0).abs() < 1e-14);
        let d = HermitianOperator::diagonal(&[0.2, 0.5, -0.1]).unwrap();
        assert!((min_eigenvalue(&d).unwrap() + 0.1).abs() < 1e-14);
        // Pauli Y: eigenvalues ±1.
        let y = HermitianOperator::new(
            2,
            vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)],
        )
        .unwrap();
        let ev = y.eigenvalues();
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_matches_closed_form_cubic() {
        for seed in 0..200 {
            let op = random_hermitian(3, seed);
            let jacobi = op.eigenvalues();
            let cubic = eigenvalues_closed_form(&op).unwrap();
            for (a, b) in jacobi.iter().zip(cubic) {
                assert!((a - b).abs() < 1e-10, "seed {seed}: {jacobi:?} vs {cubic:?}");
            }
            let sum: f64 = jacobi.iter().sum();
            assert!((sum - op.trace()).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_handles_degenerate_spectra() {
        let id = HermitianOperator::identity(3).unwrap();
        assert_eq!(eigenvalues_closed_form(&id).unwrap(), [1.0, 1.0, 1.0]);
        let d = HermitianOperator::diagonal(&[0.5, 0.5, -0.25]).unwrap();
        let ev = eigenvalues_closed_form(&d).unwrap();
        assert!((ev[0] + 0.25).abs() < 1e-12 && (ev[2] - 0.5).abs() < 1e-7);
    }

    #[test]
    fn four_dimensional_spectrum() {
        let op = random_hermitian(4, 7);
        let ev = op.eigenvalues();
        assert_eq!(ev.len(), 4);
        assert!((ev.iter().sum::<f64>() - op.trace()).abs() < 1e-12);
        let frob: f64 = op.entries().iter().map(|z| z.norm_sqr()).sum();
        assert!((ev.iter().map(|x| x * x).sum::<f64>() - frob).abs() < 1e-12);
    }

    #[test]
    fn povm_validation() {
        let half = HermitianOperator::diagonal(&[0.5, 0.5]).unwrap();
        let ok = Povm::new(vec![(Outcome::Bit0, half.clone()), (Outcome::Bit1, half.clone())]);
        assert!(ok.is_ok());
        let short = Povm::new(vec![(Outcome::Bit0, half.clone())]);
        assert!(matches!(short, Err(Error::PovmIncomplete { .. })));
        let neg = HermitianOperator::diagonal(&[1.5, 0.5]).unwrap();
        let bad = HermitianOperator::diagonal(&[-0.5, 0.5]).unwrap();
        assert!(matches!(
            Povm::new(vec![(Outcome::Bit0, neg), (Outcome::Dk, bad)]),
            Err(Error::PovmNotPositive { outcome: "DK", .. })
        ));
    }

    #[test]
    fn categorical_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            assert_eq!(sample_categorical(&[1.0], &mut rng).unwrap(), 0);
            assert_eq!(sample_categorical(&[0.0, 1.0], &mut rng).unwrap(), 1);
            assert_eq!(sample_categorical(&[0.0, 0.0], &mut rng).unwrap(), 2);
        }
        assert!(matches!(
            sample_categorical(&[0.5, -0.1], &mut rng),
            Err(Error::NegativeWeight { index: 1, .. })
        ));
        assert!(matches!(
            sample_categorical(&[0.7, 0.7], &mut rng),
            Err(Error::WeightsExceedOne(_))
        ));
    }

    #[test]
    fn categorical_frequencies() {
        let weights = [0.25, 0.25, 0.5];
        let n = 1_000_000;
        let mut rng = ChaCha8Rng::seed_from_u64(20240601);
        let table = Categorical::new(&weights).unwrap();
        let mut counts = [0u64; 4];
        for _ in 0..n {
            counts[table.sample(&mut rng)] += 1;
        }
        assert_eq!(counts[3], 0);
        for (k, &p) in weights.iter().enumerate() {
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            let freq = counts[k] as f64 / n as f64;
            assert!((freq - p).abs() < 3.0 * sigma, "outcome {k}: {freq}");
        }
    }

    #[test]
    fn categorical_is_reproducible() {
        let draw = || {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            (0..256)
                .map(|_| sample_categorical(&[0.1, 0.3, 0.2], &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(), draw());
    }

    fn arb_qutrit() -> impl Strategy<Value = StateVector> {
        prop::array::uniform6(-1.0f64..1.0).prop_map(|x| {
            let v = StateVector {
                amplitudes: vec![c(x[0], x[1]), c(x[2], x[3]), c(x[4], x[5])],
                labels: Mode::QUTRIT.to_vec(),
            };
            v.normalized().unwrap_or_else(|| StateVector::zero(&Mode::QUTRIT))
        })
    }

    proptest! {
        #[test]
        fn inner_product_is_conjugate_symmetric(a in arb_qutrit(), b in arb_qutrit()) {
            let ab = inner_product(&a, &b).unwrap();
            let ba = inner_product(&b, &a).unwrap();
            prop_assert_eq!(ab, ba.conj());
        }

        #[test]
        fn projector_expectation_is_bounded(a in arb_qutrit(), b in arb_qutrit(), w in 0.0f64..1.0) {
            let op = HermitianOperator::projector(&a, w).unwrap();
            let value = expectation(&b, &op).unwrap();
            prop_assert!(value >= -TOLERANCE);
            prop_assert!(value <= b.norm_sqr() + TOLERANCE);
        }
    }
}
