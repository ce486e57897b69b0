//! Weak coherent-state BB84 sources.
//!
//! Source P emits coherent states `|√μ e^{iθ}⟩` whose phase θ is known to the
//! eavesdropper. Source R randomizes θ, which makes every signal a Poisson
//! mixture of photon-number states; it is modeled by sampling the photon
//! number and attaching the single-photon polarization.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Complex, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SourceKind {
    /// Phase-randomized.
    R,
    /// Fixed phase, known to the eavesdropper.
    P,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

impl Basis {
    pub const ALL: [Basis; 2] = [Basis::Z, Basis::X];

    pub fn from_index(i: usize) -> Self {
        if i & 1 == 0 {
            Basis::Z
        } else {
            Basis::X
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KeyBit {
    Zero,
    One,
}

impl KeyBit {
    pub const ALL: [KeyBit; 2] = [KeyBit::Zero, KeyBit::One];

    pub fn from_index(i: usize) -> Self {
        if i & 1 == 0 {
            KeyBit::Zero
        } else {
            KeyBit::One
        }
    }

    pub fn index(self) -> usize {
        match self {
            KeyBit::Zero => 0,
            KeyBit::One => 1,
        }
    }

    pub fn flip(self) -> Self {
        Self::from_index(self.index() ^ 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceConfig {
    pub kind: SourceKind,
    /// Mean photon number μ.
    pub mu: f64,
    /// Signal phase θ; only meaningful for [`SourceKind::P`].
    pub theta: f64,
    /// Phase φ of the rotated x-basis plane.
    pub phi: f64,
}

impl SourceConfig {
    pub fn new(kind: SourceKind, mu: f64, theta: f64, phi: f64) -> Result<Self> {
        check_mu(mu)?;
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "phases must be finite (theta = {theta}, phi = {phi})"
            )));
        }
        Ok(Self {
            kind,
            mu,
            theta,
            phi,
        })
    }

    /// Coherent amplitude `α = √μ e^{iθ}`.
    pub fn alpha(&self) -> Complex {
        Complex::from_polar(self.mu.sqrt(), self.theta)
    }
}

pub(crate) fn check_mu(mu: f64) -> Result<()> {
    if mu.is_finite() && mu >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidMeanPhotonNumber(mu))
    }
}

/// Photon-number distribution of a phase-randomized coherent state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotonStats {
    pub p0: f64,
    pub p1: f64,
    /// Probability of two or more photons.
    pub p_multi: f64,
}

pub fn photon_statistics(mu: f64) -> Result<PhotonStats> {
    check_mu(mu)?;
    let p0 = (-mu).exp();
    let p1 = mu * p0;
    // 1 - e^{-μ}(1 + μ) without the cancellation in 1 - p0.
    let p_multi = (-(-mu).exp_m1() - p1).max(0.0);
    Ok(PhotonStats { p0, p1, p_multi })
}

/// Draws a photon number from Poisson(μ).
pub fn sample_photon_number<R: Rng + ?Sized>(mu: f64, rng: &mut R) -> Result<u64> {
    Ok(PhotonNumberSampler::new(mu)?.sample(rng))
}

/// Reusable Poisson(μ) sampler for hot loops.
#[derive(Clone, Debug)]
pub struct PhotonNumberSampler {
    poisson: Option<Poisson<f64>>,
}

impl PhotonNumberSampler {
    pub fn new(mu: f64) -> Result<Self> {
        check_mu(mu)?;
        let poisson = if mu > 0.0 {
            Some(Poisson::new(mu).map_err(|e| Error::InvalidConfig(e.to_string()))?)
        } else {
            None
        };
        Ok(Self { poisson })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match &self.poisson {
            Some(p) => p.sample(rng) as u64,
            None => 0,
        }
    }
}

/// Single-photon BB84 polarization. The x basis is the rotated pair
/// `(e^{iφ}|0⟩ ± e^{-iφ}|1⟩)/√2`, `+` carrying bit 0.
pub fn single_photon_state(bit: KeyBit, basis: Basis, phi: f64) -> StateVector {
    let [c0, c1] = polarization(bit, basis, phi);
    StateVector::qubit([c0, c1]).expect("unit polarization vector")
}

/// Born-rule outcome probabilities `[P(0), P(1)]` for an ideal single-photon
/// measurement of `state` in `basis` (plane φ).
pub fn measurement_probabilities(state: &StateVector, basis: Basis, phi: f64) -> [f64; 2] {
    KeyBit::ALL.map(|bit| {
        let [c0, c1] = polarization(bit, basis, phi);
        let a = state.amplitudes();
        (c0.conj() * a[0] + c1.conj() * a[1]).norm_sqr()
    })
}

fn polarization(bit: KeyBit, basis: Basis, phi: f64) -> [Complex; 2] {
    let zero = Complex::new(0.0, 0.0);
    let one = Complex::new(1.0, 0.0);
    match (basis, bit) {
        (Basis::Z, KeyBit::Zero) => [one, zero],
        (Basis::Z, KeyBit::One) => [zero, one],
        (Basis::X, _) => {
            let sign = if bit == KeyBit::Zero { 1.0 } else { -1.0 };
            [
                Complex::from_polar(FRAC_1_SQRT_2, phi),
                Complex::from_polar(sign * FRAC_1_SQRT_2, -phi),
            ]
        }
    }
}

/// Source-P signal truncated to `{VAC, PH0, PH1}` with `θ = 0`:
/// `e^{-μ/2}(1, α c₀, α c₁)`. The missing squared norm is the multiphoton
/// probability.
pub fn bb84_signal_p(bit: KeyBit, basis: Basis, mu: f64, phi: f64) -> Result<StateVector> {
    coherent_signal(bit, basis, mu, 0.0, phi)
}

/// As [`bb84_signal_p`] with an arbitrary signal phase θ.
pub fn coherent_signal(
    bit: KeyBit,
    basis: Basis,
    mu: f64,
    theta: f64,
    phi: f64,
) -> Result<StateVector> {
    check_mu(mu)?;
    let envelope = (-mu / 2.0).exp();
    let alpha = Complex::from_polar(mu.sqrt(), theta);
    let [c0, c1] = polarization(bit, basis, phi);
    StateVector::qutrit([
        Complex::new(envelope, 0.0),
        alpha * c0 * envelope,
        alpha * c1 * envelope,
    ])
}
