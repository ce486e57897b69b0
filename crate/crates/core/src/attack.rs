//! Unambiguous key discrimination (UKD) against a phase-coherent source.
//!
//! With the phase known, Eve first separates photon number `< 2` from `≥ 2`
//! and discards the latter. The retained qutrit is measured with a
//! three-outcome POVM whose conclusive elements are weighted projectors onto
//! the vectors perpendicular to both signals of the *other* key bit:
//!
//! ```text
//! E0 = ½ |1⊥⟩⟨1⊥|      |1⊥⟩ ⟂ |~1⟩, |~−⟩
//! E1 = ½ |0⊥⟩⟨0⊥|      |0⊥⟩ ⟂ |~0⟩, |~+⟩
//! EDK = I − E0 − E1
//! ```
//!
//! A conclusive outcome reveals the key bit but not the basis, so Eve resends
//! the equal superposition of the two compatible single-photon states.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    expectation, inner_product, Complex, HermitianOperator, Mode, Outcome, Povm, StateVector,
};
use crate::source::{
    check_mu, coherent_signal, measurement_probabilities, photon_statistics, single_photon_state,
    Basis, KeyBit, SourceConfig,
};

/// `½ − 1/(2√2) = (2 − √2)/4 ≈ 0.146`.
pub const HALF_MINUS: f64 = 0.5 - 0.5 * FRAC_1_SQRT_2;
/// `½ + 1/(2√2) = (2 + √2)/4 ≈ 0.854`.
pub const HALF_PLUS: f64 = 0.5 + 0.5 * FRAC_1_SQRT_2;
/// Weight of each conclusive projector.
pub const CONCLUSIVE_WEIGHT: f64 = 0.5;
/// Bit error rate produced by resending the compatible-state superposition.
pub const UKD_ERROR_RATE: f64 = HALF_MINUS;

/// Eve's measurement for one `(μ, θ, φ)` operating point.
#[derive(Clone, Debug)]
pub struct UkdPovm {
    mu: f64,
    theta: f64,
    phi: f64,
    v0perp: StateVector,
    v1perp: StateVector,
    n0: f64,
    n1: f64,
    povm: Povm,
}

/// Outcome probabilities of one emitted signal, including the multiphoton
/// rejection branch. They sum to one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeProbabilities {
    pub bit0: f64,
    pub bit1: f64,
    pub dk: f64,
    pub multi: f64,
}

impl OutcomeProbabilities {
    pub fn conclusive(&self) -> f64 {
        self.bit0 + self.bit1
    }

    /// Sampling weights for `[BIT0, BIT1, DK]`; rounding residue below zero
    /// is clipped.
    pub fn as_weights(&self) -> [f64; 3] {
        [self.bit0, self.bit1, self.dk].map(|p| p.max(0.0))
    }
}

impl UkdPovm {
    /// Builds the POVM matched to signals `|√μ e^{iθ}⟩` in the plane φ.
    pub fn new(mu: f64, theta: f64, phi: f64) -> Result<Self> {
        check_mu(mu)?;
        if mu == 0.0 {
            return Err(Error::DegenerateSignals { mu });
        }
        let signal = |bit, basis| coherent_signal(bit, basis, mu, theta, phi);
        let v0perp = perpendicular(
            &signal(KeyBit::Zero, Basis::Z)?,
            &signal(KeyBit::Zero, Basis::X)?,
            mu,
        )?;
        let v1perp = perpendicular(
            &signal(KeyBit::One, Basis::Z)?,
            &signal(KeyBit::One, Basis::X)?,
            mu,
        )?;

        let e0 = HermitianOperator::projector(&v1perp, CONCLUSIVE_WEIGHT)?;
        let e1 = HermitianOperator::projector(&v0perp, CONCLUSIVE_WEIGHT)?;
        let edk = HermitianOperator::identity(3)?.sub(&e0)?.sub(&e1)?;
        let povm = Povm::new(vec![
            (Outcome::Bit0, e0),
            (Outcome::Bit1, e1),
            (Outcome::Dk, edk),
        ])?;

        Ok(Self {
            mu,
            theta,
            phi,
            n0: reference_scale(&v0perp),
            n1: reference_scale(&v1perp),
            v0perp,
            v1perp,
            povm,
        })
    }

    pub fn for_source(source: &SourceConfig) -> Result<Self> {
        Self::new(source.mu, source.theta, source.phi)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn e0(&self) -> &HermitianOperator {
        &self.povm.elements()[0].1
    }

    pub fn e1(&self) -> &HermitianOperator {
        &self.povm.elements()[1].1
    }

    pub fn edk(&self) -> &HermitianOperator {
        &self.povm.elements()[2].1
    }

    pub fn element(&self, outcome: Outcome) -> &HermitianOperator {
        match outcome {
            Outcome::Bit0 => self.e0(),
            Outcome::Bit1 => self.e1(),
            Outcome::Dk => self.edk(),
        }
    }

    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    /// Unit vector orthogonal to both bit-0 signals.
    pub fn v0perp(&self) -> &StateVector {
        &self.v0perp
    }

    /// Unit vector orthogonal to both bit-1 signals.
    pub fn v1perp(&self) -> &StateVector {
        &self.v1perp
    }

    /// Normalization of `|0⊥⟩` relative to the unnormalized form whose PH1
    /// amplitude has modulus `1/√2`.
    pub fn n0(&self) -> f64 {
        self.n0
    }

    pub fn n1(&self) -> f64 {
        self.n1
    }

    /// The truncated signal this POVM was built for.
    pub fn signal(&self, bit: KeyBit, basis: Basis) -> StateVector {
        coherent_signal(bit, basis, self.mu, self.theta, self.phi)
            .expect("mu validated at construction")
    }

    pub fn outcome_probabilities(&self, signal: &StateVector) -> Result<OutcomeProbabilities> {
        let multi = photon_statistics(self.mu)?.p_multi;
        Ok(OutcomeProbabilities {
            bit0: expectation(signal, self.e0())?,
            bit1: expectation(signal, self.e1())?,
            dk: expectation(signal, self.edk())?,
            multi,
        })
    }

    /// Outcome probabilities for the matched signal `(bit, basis)`.
    pub fn signal_outcomes(&self, bit: KeyBit, basis: Basis) -> OutcomeProbabilities {
        self.outcome_probabilities(&self.signal(bit, basis))
            .expect("matched dimensions")
    }

    /// Probability that the signal carrying `bit` yields the matching
    /// conclusive outcome, averaged over the two bases.
    pub fn conclusive_probability_for_bit(&self, bit: KeyBit) -> f64 {
        Basis::ALL
            .iter()
            .map(|&basis| {
                let p = self.signal_outcomes(bit, basis);
                match bit {
                    KeyBit::Zero => p.bit0,
                    KeyBit::One => p.bit1,
                }
            })
            .sum::<f64>()
            / 2.0
    }

    /// Conclusive rate over the four equiprobable signals, i.e. the fraction
    /// of emitted pulses Eve forwards.
    pub fn mean_conclusive_rate(&self) -> f64 {
        KeyBit::ALL
            .iter()
            .map(|&b| self.conclusive_probability_for_bit(b))
            .sum::<f64>()
            / 2.0
    }
}

/// Unit vector orthogonal to `a` and `b`: Gram–Schmidt on the two signals,
/// then the standard basis vector with the largest residual is projected
/// onto the complement.
fn perpendicular(a: &StateVector, b: &StateVector, mu: f64) -> Result<StateVector> {
    let e1 = a.normalized().ok_or(Error::DegenerateSignals { mu })?;
    let e2 = {
        let overlap = inner_product(&e1, b)?;
        let residual = subtract_scaled(b.amplitudes(), e1.amplitudes(), overlap);
        let norm = norm(&residual);
        if norm <= 1e-12 * b.norm_sqr().sqrt() {
            return Err(Error::DegenerateSignals { mu });
        }
        scale(&residual, 1.0 / norm)
    };

    let project_out = |v: Vec<Complex>| {
        let mut v = v;
        for basis in [e1.amplitudes(), e2.as_slice()] {
            let overlap: Complex = basis.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            v = subtract_scaled(&v, basis, overlap);
        }
        v
    };

    let dim = a.dim();
    let mut best: Option<Vec<Complex>> = None;
    for k in 0..dim {
        let mut unit = vec![Complex::new(0.0, 0.0); dim];
        unit[k] = Complex::new(1.0, 0.0);
        let r = project_out(unit);
        if best.as_ref().is_none_or(|b| norm(&r) > norm(b)) {
            best = Some(r);
        }
    }
    // A second projection pass removes the rounding left by the first.
    let r = project_out(best.expect("dim >= 1"));
    let r = scale(&r, 1.0 / norm(&r));
    Ok(StateVector::new(r, a.labels().to_vec())?.with_canonical_phase())
}

fn subtract_scaled(v: &[Complex], basis: &[Complex], factor: Complex) -> Vec<Complex> {
    v.iter().zip(basis).map(|(x, e)| x - e * factor).collect()
}

fn scale(v: &[Complex], factor: f64) -> Vec<Complex> {
    v.iter().map(|x| x * factor).collect()
}

fn norm(v: &[Complex]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn reference_scale(v: &StateVector) -> f64 {
    v.amplitude(Mode::Ph1).map_or(f64::NAN, |a| a.norm() * SQRT_2)
}

/// `(|0⊥⟩, |1⊥⟩)` for `θ = 0`.
pub fn perp_vectors(mu: f64, phi: f64) -> Result<(StateVector, StateVector)> {
    let povm = UkdPovm::new(mu, 0.0, phi)?;
    Ok((povm.v0perp, povm.v1perp))
}

pub fn build_ukd_povm(mu: f64, phi: f64) -> Result<UkdPovm> {
    UkdPovm::new(mu, 0.0, phi)
}

/// Closed form of `N⁻²` for `|0⊥⟩` (`bit = Zero`) or `|1⊥⟩` at `φ = 0`:
/// `(2 + √2)[1 + (½ ± 1/(2√2))μ]`.
pub fn normalization_inverse_sq(perp_of: KeyBit, mu: f64) -> f64 {
    let k = match perp_of {
        KeyBit::Zero => HALF_PLUS,
        KeyBit::One => HALF_MINUS,
    };
    (2.0 + SQRT_2) * (1.0 + k * mu)
}

/// Closed-form conclusive probability at `φ = 0` for a signal carrying `bit`.
///
/// Bit 0 is identified by `E0 ∝ |1⊥⟩⟨1⊥|`, so its denominator carries the
/// `|1⊥⟩` normalization `1 + (½ − 1/(2√2))μ`; bit 1 carries
/// `1 + (½ + 1/(2√2))μ` and is the less likely of the two.
pub fn conclusive_probability(bit: KeyBit, mu: f64) -> Result<f64> {
    check_mu(mu)?;
    let k = match bit {
        KeyBit::Zero => HALF_MINUS,
        KeyBit::One => HALF_PLUS,
    };
    Ok(HALF_MINUS * mu * (-mu).exp() / (1.0 + k * mu))
}

/// Lower bound on Eve's forwarding probability that holds for either key
/// bit: `(½ − 1/(2√2)) μ e^{-μ} / [1 + (½ + 1/(2√2))μ]`.
pub fn detection_rate_bound(mu: f64) -> Result<f64> {
    check_mu(mu)?;
    Ok(HALF_MINUS * mu * (-mu).exp() / (1.0 + HALF_PLUS * mu))
}

/// Detection probability without an eavesdropper or loss: every non-vacuum
/// pulse clicks.
pub fn honest_detection_rate(mu: f64) -> Result<f64> {
    check_mu(mu)?;
    Ok(-(-mu).exp_m1())
}

/// Normalized equal superposition of `|z_bit⟩` and `|x_bit⟩_φ`, the single
/// photon Eve forwards after a conclusive outcome. The x component is
/// rephased so that its overlap with `|z_bit⟩` is real and positive; the
/// result then bisects the two compatible states.
pub fn resend_state(bit: KeyBit, phi: f64) -> StateVector {
    let z = single_photon_state(bit, Basis::Z, phi);
    let x = single_photon_state(bit, Basis::X, phi);
    let overlap = inner_product(&x, &z).expect("same qubit space");
    let align = overlap / overlap.norm();
    let sum: Vec<Complex> = z
        .amplitudes()
        .iter()
        .zip(x.amplitudes())
        .map(|(a, b)| a + b * align)
        .collect();
    let n = norm(&sum);
    StateVector::qubit([sum[0] / n, sum[1] / n]).expect("normalized")
}

/// `½ − 1/(2√2)`: the error rate of the resent photon in the `φ = 0` plane.
pub fn induced_error_rate() -> f64 {
    UKD_ERROR_RATE
}

/// Probability that Bob, measuring the resent photon in `basis`, obtains
/// the wrong bit.
pub fn resend_error_probability(bit: KeyBit, basis: Basis, phi: f64) -> f64 {
    measurement_probabilities(&resend_state(bit, phi), basis, phi)[bit.flip().index()]
}

/// Sifted error rate of the resend strategy in plane φ, averaged over the
/// four equiprobable `(bit, basis)` combinations.
pub fn resend_error_rate(phi: f64) -> f64 {
    KeyBit::ALL
        .iter()
        .flat_map(|&bit| Basis::ALL.iter().map(move |&basis| (bit, basis)))
        .map(|(bit, basis)| resend_error_probability(bit, basis, phi))
        .sum::<f64>()
        / 4.0
}
