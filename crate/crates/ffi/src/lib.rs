//! C ABI over `phaseqkd`.
//!
//! Every fallible function returns a [`PqStatus`] and writes its result
//! through an out-pointer. On failure a description is available from
//! [`pq_last_error_message`] on the same thread. Objects that outlive a call
//! are handed out as opaque pointers and released with the matching `_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use phaseqkd::{
    Attack, Basis, Error, KeyBit, Outcome, RunConfig, SecurityReport, SourceConfig, SourceKind,
    UkdPovm, VerdictP, VerdictR,
};

pub const PQ_BIT_ZERO: u32 = 0;
pub const PQ_BIT_ONE: u32 = 1;

pub const PQ_OUTCOME_BIT0: u32 = 0;
pub const PQ_OUTCOME_BIT1: u32 = 1;
pub const PQ_OUTCOME_DK: u32 = 2;

pub const PQ_SOURCE_R: u32 = 0;
pub const PQ_SOURCE_P: u32 = 1;

pub const PQ_ATTACK_NONE: u32 = 0;
pub const PQ_ATTACK_UKD: u32 = 1;

/// Side length of a POVM element matrix (vacuum plus two polarization modes).
pub const PQ_POVM_DIM: usize = 3;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PqStatus {
    Ok = 0,
    NullPointer = 1,
    /// An argument was rejected; see the last error message.
    InvalidArgument = 2,
    Internal = 3,
    /// A Rust panic was caught at the boundary.
    Panic = 4,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PqVerdictR {
    Secure = 0,
    NotProven = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PqVerdictP {
    Broken = 0,
    Unknown = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PqPhotonStats {
    pub p0: f64,
    pub p1: f64,
    pub p_multi: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PqComplex {
    pub re: f64,
    pub im: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PqSecurityValues {
    pub mu: f64,
    pub delta: f64,
    pub p_d: f64,
    pub p_m: f64,
    pub big_delta: f64,
    pub delta_p_bound: f64,
    pub threshold_one_way: f64,
    pub threshold_two_way: f64,
    pub mu_star: f64,
    pub verdict_r: PqVerdictR,
    pub verdict_p: PqVerdictP,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PqRunConfig {
    pub n_signals: u64,
    /// `PQ_SOURCE_R` or `PQ_SOURCE_P`.
    pub source: u32,
    pub mu: f64,
    pub theta: f64,
    pub phi: f64,
    /// `PQ_ATTACK_NONE` or `PQ_ATTACK_UKD`.
    pub attack: u32,
    pub channel_transmittance: f64,
    pub seed: u64,
    pub workers: u32,
}

/// Counters and estimates from one run. Estimates that are undefined for
/// the run (nothing sifted, no eavesdropper) are NaN.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PqProtocolStats {
    pub sent: u64,
    pub detected: u64,
    pub sifted: u64,
    pub errors: u64,
    pub detection_rate: f64,
    pub detection_rate_std_err: f64,
    pub error_rate_hat: f64,
    pub error_rate_std_err: f64,
    pub eve_agreement: f64,
    pub sent_by_bit: [u64; 2],
    pub forwarded_by_bit: [u64; 2],
}

/// Opaque handle to the unambiguous-discrimination measurement.
pub struct PqPovm(UkdPovm);

/// Opaque handle to a security verdict.
pub struct PqSecurityReport(SecurityReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(text).ok());
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn status_of(err: &Error) -> PqStatus {
    set_last_error(err.to_string());
    if err.is_usage() {
        PqStatus::InvalidArgument
    } else {
        PqStatus::Internal
    }
}

fn invalid(message: impl Into<String>) -> PqStatus {
    set_last_error(message);
    PqStatus::InvalidArgument
}

/// Runs `body` with the error slot cleared and panics contained.
fn guard(body: impl FnOnce() -> PqStatus) -> PqStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(msg);
            PqStatus::Panic
        }
    }
}

/// Writes `value` through `out`, or reports a null pointer.
///
/// # Safety
/// `out` must be null or valid for a write of `T`.
unsafe fn emit<T>(out: *mut T, value: phaseqkd::Result<T>) -> PqStatus {
    if out.is_null() {
        return invalid_null();
    }
    match value {
        Ok(v) => {
            out.write(v);
            PqStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

fn invalid_null() -> PqStatus {
    set_last_error("null pointer argument");
    PqStatus::NullPointer
}

fn key_bit(raw: u32) -> Option<KeyBit> {
    match raw {
        PQ_BIT_ZERO => Some(KeyBit::Zero),
        PQ_BIT_ONE => Some(KeyBit::One),
        _ => None,
    }
}

fn outcome(raw: u32) -> Option<Outcome> {
    match raw {
        PQ_OUTCOME_BIT0 => Some(Outcome::Bit0),
        PQ_OUTCOME_BIT1 => Some(Outcome::Bit1),
        PQ_OUTCOME_DK => Some(Outcome::Dk),
        _ => None,
    }
}

/// Message describing the most recent failure on this thread, or null.
///
/// The pointer stays valid until the next `pq_*` call on the same thread.
#[no_mangle]
pub extern "C" fn pq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Photon-number distribution of a coherent source with mean `mu`.
///
/// # Safety
/// `out` must be null or point to writable memory for one `PqPhotonStats`.
#[no_mangle]
pub unsafe extern "C" fn pq_photon_statistics(mu: f64, out: *mut PqPhotonStats) -> PqStatus {
    guard(|| {
        let stats = phaseqkd::photon_statistics(mu).map(|s| PqPhotonStats {
            p0: s.p0,
            p1: s.p1,
            p_multi: s.p_multi,
        });
        emit(out, stats)
    })
}

/// Probability that Eve's measurement is conclusive on a signal carrying
/// `bit`, averaged over bases.
///
/// # Safety
/// `out` must be null or point to a writable `double`.
#[no_mangle]
pub unsafe extern "C" fn pq_conclusive_probability(bit: u32, mu: f64, out: *mut f64) -> PqStatus {
    guard(|| match key_bit(bit) {
        Some(bit) => emit(out, phaseqkd::conclusive_probability(bit, mu)),
        None => invalid(format!("unknown key bit {bit}")),
    })
}

/// Bob's detection rate under the attack, as used in the security bound.
///
/// # Safety
/// `out` must be null or point to a writable `double`.
#[no_mangle]
pub unsafe extern "C" fn pq_detection_rate_bound(mu: f64, out: *mut f64) -> PqStatus {
    guard(|| emit(out, phaseqkd::detection_rate_bound(mu)))
}

/// Bit error rate the intercept/resend attack induces in the sifted key.
#[no_mangle]
pub extern "C" fn pq_induced_error_rate() -> f64 {
    phaseqkd::induced_error_rate()
}

/// Largest mean photon number for which source R is provably secure at
/// error rate `delta`.
///
/// # Safety
/// `out` must be null or point to a writable `double`.
#[no_mangle]
pub unsafe extern "C" fn pq_max_secure_mu(delta: f64, out: *mut f64) -> PqStatus {
    guard(|| emit(out, phaseqkd::max_secure_mu(delta)))
}

/// Builds Eve's measurement for source P at mean `mu` and phase `phi`.
///
/// # Safety
/// `out` must be null or point to writable storage for one pointer. The
/// handle written there must be released with `pq_povm_free`.
#[no_mangle]
pub unsafe extern "C" fn pq_povm_new(mu: f64, phi: f64, out: *mut *mut PqPovm) -> PqStatus {
    guard(|| {
        let povm = phaseqkd::build_ukd_povm(mu, phi).map(|p| Box::into_raw(Box::new(PqPovm(p))));
        emit(out, povm)
    })
}

/// Copies one POVM element as a row-major 3×3 complex matrix into
/// `matrix`, which must hold `PQ_POVM_DIM * PQ_POVM_DIM` entries.
///
/// # Safety
/// `povm` must come from `pq_povm_new` and not yet be freed; `matrix` must
/// be null or valid for nine writes.
#[no_mangle]
pub unsafe extern "C" fn pq_povm_element(
    povm: *const PqPovm,
    which: u32,
    matrix: *mut PqComplex,
) -> PqStatus {
    guard(|| {
        if povm.is_null() || matrix.is_null() {
            return invalid_null();
        }
        let Some(outcome) = outcome(which) else {
            return invalid(format!("unknown POVM outcome {which}"));
        };
        let op = (*povm).0.element(outcome);
        let out = std::slice::from_raw_parts_mut(matrix, PQ_POVM_DIM * PQ_POVM_DIM);
        for (slot, z) in out.iter_mut().zip(op.entries()) {
            *slot = PqComplex { re: z.re, im: z.im };
        }
        PqStatus::Ok
    })
}

/// Outcome probabilities `[bit0, bit1, inconclusive]` for the source-P
/// signal carrying `bit` in basis `basis` (0 = Z, 1 = X).
///
/// # Safety
/// `povm` must be a live handle; `probs` must be null or valid for three
/// writes.
#[no_mangle]
pub unsafe extern "C" fn pq_povm_signal_outcomes(
    povm: *const PqPovm,
    bit: u32,
    basis: u32,
    probs: *mut f64,
) -> PqStatus {
    guard(|| {
        if povm.is_null() || probs.is_null() {
            return invalid_null();
        }
        let Some(bit) = key_bit(bit) else {
            return invalid(format!("unknown key bit {bit}"));
        };
        let basis = match basis {
            0 => Basis::Z,
            1 => Basis::X,
            other => return invalid(format!("unknown basis {other}")),
        };
        let p = (*povm).0.signal_outcomes(bit, basis);
        let out = std::slice::from_raw_parts_mut(probs, 3);
        out.copy_from_slice(&[p.bit0, p.bit1, p.dk]);
        PqStatus::Ok
    })
}

/// Releases a handle from `pq_povm_new`. Null is ignored.
///
/// # Safety
/// `povm` must be null or a handle not already freed.
#[no_mangle]
pub unsafe extern "C" fn pq_povm_free(povm: *mut PqPovm) {
    if !povm.is_null() {
        drop(Box::from_raw(povm));
    }
}

/// Security verdict for error rate `delta`, mean `mu` and detection rate
/// `p_d`. A negative `p_d` selects the detection rate the attack itself
/// produces.
///
/// # Safety
/// `out` must be null or point to writable storage for one pointer. The
/// handle must be released with `pq_security_report_free`.
#[no_mangle]
pub unsafe extern "C" fn pq_security_report_new(
    delta: f64,
    mu: f64,
    p_d: f64,
    out: *mut *mut PqSecurityReport,
) -> PqStatus {
    guard(|| {
        let report = if p_d < 0.0 {
            phaseqkd::security::secure_verdict_at_attack_rate(delta, mu)
        } else {
            phaseqkd::secure_verdict(delta, mu, p_d)
        };
        emit(out, report.map(|r| Box::into_raw(Box::new(PqSecurityReport(r)))))
    })
}

/// Copies the numeric fields and verdicts of a report.
///
/// # Safety
/// `report` must be a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn pq_security_report_values(
    report: *const PqSecurityReport,
    out: *mut PqSecurityValues,
) -> PqStatus {
    guard(|| {
        if report.is_null() {
            return invalid_null();
        }
        let r = &(*report).0;
        let values = PqSecurityValues {
            mu: r.mu,
            delta: r.delta,
            p_d: r.p_d,
            p_m: r.p_m,
            big_delta: r.big_delta,
            delta_p_bound: r.delta_p_bound,
            threshold_one_way: r.threshold_one_way,
            threshold_two_way: r.threshold_two_way,
            mu_star: r.mu_star,
            verdict_r: match r.verdict_r {
                VerdictR::Secure => PqVerdictR::Secure,
                VerdictR::NotProven => PqVerdictR::NotProven,
            },
            verdict_p: match r.verdict_p {
                VerdictP::Broken => PqVerdictP::Broken,
                VerdictP::Unknown => PqVerdictP::Unknown,
            },
        };
        emit(out, Ok(values))
    })
}

/// Serializes a report as JSON with nine significant digits. The string
/// must be released with `pq_string_free`.
///
/// # Safety
/// `report` must be a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn pq_security_report_to_json(
    report: *const PqSecurityReport,
    out: *mut *mut c_char,
) -> PqStatus {
    guard(|| {
        if report.is_null() {
            return invalid_null();
        }
        let json = phaseqkd::report::to_json(&(*report).0);
        let json = CString::new(json)
            .map(CString::into_raw)
            .map_err(|e| Error::Output(e.to_string()));
        emit(out, json)
    })
}

/// Releases a handle from `pq_security_report_new`. Null is ignored.
///
/// # Safety
/// `report` must be null or a handle not already freed.
#[no_mangle]
pub unsafe extern "C" fn pq_security_report_free(report: *mut PqSecurityReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not already freed.
#[no_mangle]
pub unsafe extern "C" fn pq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

fn run_config(raw: &PqRunConfig) -> Result<RunConfig, PqStatus> {
    let kind = match raw.source {
        PQ_SOURCE_R => SourceKind::R,
        PQ_SOURCE_P => SourceKind::P,
        other => return Err(invalid(format!("unknown source {other}"))),
    };
    let attack = match raw.attack {
        PQ_ATTACK_NONE => Attack::None,
        PQ_ATTACK_UKD => Attack::Ukd,
        other => return Err(invalid(format!("unknown attack {other}"))),
    };
    let source =
        SourceConfig::new(kind, raw.mu, raw.theta, raw.phi).map_err(|e| status_of(&e))?;
    Ok(RunConfig {
        n_signals: raw.n_signals,
        source,
        attack,
        channel_transmittance: raw.channel_transmittance,
        seed: raw.seed,
        workers: raw.workers as usize,
    })
}

/// Simulates one protocol run.
///
/// # Safety
/// `config` must be null or point to a valid `PqRunConfig`; `out` must be
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn pq_run_protocol(
    config: *const PqRunConfig,
    out: *mut PqProtocolStats,
) -> PqStatus {
    guard(|| {
        if config.is_null() {
            return invalid_null();
        }
        let config = match run_config(&*config) {
            Ok(c) => c,
            Err(status) => return status,
        };
        let stats = phaseqkd::run_protocol(&config).map(|s| PqProtocolStats {
            sent: s.sent,
            detected: s.detected,
            sifted: s.sifted,
            errors: s.errors,
            detection_rate: s.detection_rate,
            detection_rate_std_err: s.detection_rate_std_err,
            error_rate_hat: s.error_rate_hat.unwrap_or(f64::NAN),
            error_rate_std_err: s.error_rate_std_err.unwrap_or(f64::NAN),
            eve_agreement: s.eve_agreement.unwrap_or(f64::NAN),
            sent_by_bit: s.sent_by_bit,
            forwarded_by_bit: s.forwarded_by_bit,
        });
        emit(out, stats)
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pq_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(
        concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes(),
    ) {
        Ok(v) => v,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}
