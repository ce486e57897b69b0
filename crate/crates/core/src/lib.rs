//! Weak coherent-state BB84 with and without phase randomization.
//!
//! The crate has two halves that are meant to be read side by side:
//!
//! * [`attack`] builds the unambiguous key discrimination (UKD) measurement an
//!   eavesdropper can perform when she knows the optical phase of every pulse,
//!   together with the resend strategy and the error rate it induces.
//! * [`security`] evaluates the multiphoton-fraction bound for a
//!   phase-randomized source at the same operating point and reports whether
//!   two-way post-processing can still distill a key.
//!
//! [`sim`] is a seeded Monte Carlo engine for complete protocol runs, and
//! [`report`] collects the serializable outputs used by the `phaseqkd` binary.

pub mod attack;
pub mod error;
pub mod linalg;
pub mod report;
pub mod security;
pub mod sim;
pub mod source;

pub use attack::{
    build_ukd_povm, conclusive_probability, detection_rate_bound, induced_error_rate,
    perp_vectors, resend_state, UkdPovm,
};
pub use error::{Error, Result};
pub use linalg::{
    expectation, inner_product, min_eigenvalue, sample_categorical, Complex, HermitianOperator,
    Mode, Outcome, Povm, StateVector,
};
pub use security::{
    max_secure_mu, multiphoton_fraction, phase_error_bound, secure_verdict, SecurityReport,
    VerdictP, VerdictR,
};
pub use sim::{estimate_error_rate, run_protocol, sift, Attack, ProtocolStats, RunConfig};
pub use source::{
    bb84_signal_p, photon_statistics, sample_photon_number, single_photon_state, Basis, KeyBit,
    PhotonStats, SourceConfig, SourceKind,
};
