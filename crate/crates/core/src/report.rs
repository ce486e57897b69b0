//! Serializable reports behind the `phaseqkd` subcommands.
//!
//! Floating-point fields are rounded to 9 significant digits before they are
//! written, so repeated runs produce byte-identical files.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::attack::{
    build_ukd_povm, detection_rate_bound, honest_detection_rate, resend_error_rate,
};
use crate::error::{Error, Result};
use crate::security::{
    max_secure_mu, multiphoton_bound, secure_verdict, SecurityReport, VerdictR,
    MU_STAR_TOLERANCE,
};
use crate::sim::{run_protocol, ProtocolStats, RunConfig};
use crate::source::{photon_statistics, KeyBit};

/// Significant digits kept in every serialized float.
pub const SIGNIFICANT_DIGITS: usize = 9;

/// Stable CSV header of [`SweepRow`].
pub const SWEEP_COLUMNS: [&str; 11] = [
    "mu",
    "p0",
    "p1",
    "pM",
    "p_d_attack",
    "p_d_honest",
    "conclusive_prob_bit0",
    "conclusive_prob_bit1",
    "big_delta",
    "delta_p_bound",
    "verdict_R",
];

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

fn round_value(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                if let Some(r) = serde_json::Number::from_f64(round_sig(x)) {
                    *n = r;
                }
            }
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(round_value),
        serde_json::Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with rounded floats.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("report types serialize");
    round_value(&mut v);
    serde_json::to_string_pretty(&v).expect("value serializes")
}

/// Single-line JSON with rounded floats.
pub fn to_json_line<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("report types serialize");
    round_value(&mut v);
    serde_json::to_string(&v).expect("value serializes")
}

/// Source-P side of an analysis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackSummary {
    pub phi: f64,
    /// Conclusive probability for signals carrying bit 0, mean over bases.
    pub conclusive_prob_bit0: f64,
    pub conclusive_prob_bit1: f64,
    /// Fraction of pulses Eve forwards in plane φ.
    pub p_d_attack: f64,
    /// Bit-independent lower bound on the forwarding rate (plane φ = 0).
    pub p_d_bound: f64,
    /// Detection rate of the lossless, unattacked channel.
    pub p_d_honest: f64,
    pub induced_error_rate: f64,
    /// Fraction of sifted key bits Eve knows.
    pub eve_key_knowledge: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub attack: AttackSummary,
    pub security: SecurityReport,
}

/// Both sides of the comparison at one `(μ, δ, φ)` point.
///
/// The source-R verdict uses the bit-independent forwarding bound as Bob's
/// detection rate.
pub fn cmd_analyze(mu: f64, delta: f64, phi: f64) -> Result<AnalyzeReport> {
    if !(mu > 0.0) {
        return Err(Error::InvalidMeanPhotonNumber(mu));
    }
    let povm = build_ukd_povm(mu, phi)?;
    let p_d_bound = detection_rate_bound(mu)?;
    let attack = AttackSummary {
        phi,
        conclusive_prob_bit0: povm.conclusive_probability_for_bit(KeyBit::Zero),
        conclusive_prob_bit1: povm.conclusive_probability_for_bit(KeyBit::One),
        p_d_attack: povm.mean_conclusive_rate(),
        p_d_bound,
        p_d_honest: honest_detection_rate(mu)?,
        induced_error_rate: resend_error_rate(phi),
        eve_key_knowledge: 1.0,
    };
    let security = secure_verdict(delta, mu, p_d_bound)?;
    Ok(AnalyzeReport { attack, security })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub config: RunConfig,
    pub stats: ProtocolStats,
}

pub fn cmd_simulate(config: &RunConfig) -> Result<SimulateReport> {
    Ok(SimulateReport {
        config: *config,
        stats: run_protocol(config)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub mu: f64,
    pub p0: f64,
    pub p1: f64,
    #[serde(rename = "pM")]
    pub p_m: f64,
    pub p_d_attack: f64,
    pub p_d_honest: f64,
    pub conclusive_prob_bit0: f64,
    pub conclusive_prob_bit1: f64,
    pub big_delta: f64,
    pub delta_p_bound: f64,
    #[serde(rename = "verdict_R")]
    pub verdict_r: VerdictR,
}

/// One row per grid point. `p_d_attack` is the forwarding bound that also
/// feeds `big_delta`; conclusive probabilities are evaluated in plane φ.
/// Where `μ²/2` exceeds the detection rate the bound is vacuous: `big_delta`
/// is reported as is and the verdict is `NOT_PROVEN`.
pub fn cmd_sweep(mu_grid: &[f64], delta: f64, phi: f64) -> Result<Vec<SweepRow>> {
    if mu_grid.is_empty() {
        return Err(Error::InvalidConfig("mu grid is empty".into()));
    }
    if mu_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidConfig("mu grid must be strictly ascending".into()));
    }
    mu_grid
        .iter()
        .map(|&mu| {
            if !(mu > 0.0) {
                return Err(Error::InvalidMeanPhotonNumber(mu));
            }
            let stats = photon_statistics(mu)?;
            let povm = build_ukd_povm(mu, phi)?;
            let p_d = detection_rate_bound(mu)?;
            let (big_delta, delta_p_bound, verdict_r) = match secure_verdict(delta, mu, p_d) {
                Ok(r) => (r.big_delta, r.delta_p_bound, r.verdict_r),
                Err(Error::InconsistentMultiphotonFraction(big_delta)) => (
                    big_delta,
                    delta + big_delta / 2.0,
                    VerdictR::NotProven,
                ),
                Err(e) => return Err(e),
            };
            debug_assert!((big_delta - multiphoton_bound(mu) / p_d).abs() <= 1e-12 * big_delta);
            Ok(SweepRow {
                mu,
                p0: stats.p0,
                p1: stats.p1,
                p_m: stats.p_multi,
                p_d_attack: p_d,
                p_d_honest: honest_detection_rate(mu)?,
                conclusive_prob_bit0: povm.conclusive_probability_for_bit(KeyBit::Zero),
                conclusive_prob_bit1: povm.conclusive_probability_for_bit(KeyBit::One),
                big_delta,
                delta_p_bound,
                verdict_r,
            })
        })
        .collect()
}

/// Writes sweep rows as CSV with the [`SWEEP_COLUMNS`] header.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Output(format!("csv: {e}"));
    w.write_record(SWEEP_COLUMNS).map_err(io)?;
    for r in rows {
        let verdict = match r.verdict_r {
            VerdictR::Secure => "SECURE",
            VerdictR::NotProven => "NOT_PROVEN",
        };
        let nums = [
            r.mu,
            r.p0,
            r.p1,
            r.p_m,
            r.p_d_attack,
            r.p_d_honest,
            r.conclusive_prob_bit0,
            r.conclusive_prob_bit1,
            r.big_delta,
            r.delta_p_bound,
        ];
        let mut record: Vec<String> = nums.iter().map(|&x| round_sig(x).to_string()).collect();
        record.push(verdict.to_string());
        w.write_record(&record).map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::Output(format!("csv: {e}")))?;
    Ok(())
}

/// JSON lines, one object per row.
pub fn write_sweep_json_lines<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    for r in rows {
        writeln!(out, "{}", to_json_line(r))
            .map_err(|e| Error::Output(format!("json: {e}")))?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub delta: f64,
    pub mu_star: f64,
    pub tolerance: f64,
}

pub fn cmd_threshold(delta: f64) -> Result<ThresholdReport> {
    if !(0.0..=crate::security::TWO_WAY_THRESHOLD).contains(&delta) {
        return Err(Error::ProbabilityOutOfRange {
            name: "delta",
            value: delta,
        });
    }
    Ok(ThresholdReport {
        delta,
        mu_star: max_secure_mu(delta)?,
        tolerance: MU_STAR_TOLERANCE,
    })
}

/// Parses `start:stop:step` (inclusive of `stop`), a comma-separated list,
/// or a single value.
pub fn parse_mu_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidConfig(format!("malformed mu grid {spec:?}"));
    let num = |s: &str| -> Result<f64> {
        let x: f64 = s.trim().parse().map_err(|_| bad())?;
        if x.is_finite() {
            Ok(x)
        } else {
            Err(bad())
        }
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let grid = match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0) || stop < start {
                return Err(bad());
            }
            let count = ((stop - start) / step + 1e-9).floor() as u64;
            if count > 1_000_000 {
                return Err(bad());
            }
            (0..=count).map(|i| start + i as f64 * step).collect()
        }
        [list] => list.split(',').map(num).collect::<Result<Vec<_>>>()?,
        _ => return Err(bad()),
    };
    if grid.is_empty() {
        return Err(bad());
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::security::VerdictP;

    #[test]
    fn rounding_keeps_nine_digits() {
        assert_eq!(round_sig(0.14644660940672624), 0.146446609);
        assert_eq!(round_sig(123456789012.0), 123456789000.0);
        assert_eq!(round_sig(0.0), 0.0);
        assert_eq!(round_sig(1e-20 / 3.0), 3.33333333e-21);
    }

    #[test]
    fn analyze_reports_both_sides() {
        let r = cmd_analyze(0.02, 0.146, 0.0).unwrap();
        assert_eq!(r.security.verdict_r, VerdictR::Secure);
        assert_eq!(r.security.verdict_p, VerdictP::Broken);
        assert_eq!(r.attack.eve_key_knowledge, 1.0);
        assert!((r.attack.induced_error_rate - 0.146446609).abs() < 1e-9);

        let r = cmd_analyze(0.03, 0.146, 0.0).unwrap();
        assert_eq!(r.security.verdict_r, VerdictR::NotProven);

        assert!(cmd_analyze(0.0, 0.146, 0.0).is_err());
    }

    #[test]
    fn sweep_flips_between_two_and_three_percent() {
        let grid = parse_mu_grid("0.01:0.05:0.01").unwrap();
        assert_eq!(grid.len(), 5);
        let rows = cmd_sweep(&grid, 0.146, 0.0).unwrap();
        let verdicts: Vec<_> = rows.iter().map(|r| r.verdict_r).collect();
        assert_eq!(
            verdicts,
            [
                VerdictR::Secure,
                VerdictR::Secure,
                VerdictR::NotProven,
                VerdictR::NotProven,
                VerdictR::NotProven
            ]
        );
        assert!((rows[1].big_delta - 0.0710).abs() < 5e-4);

        let single = cmd_sweep(&parse_mu_grid("0.1").unwrap(), 0.146, 0.0).unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn sweep_tolerates_vacuous_bound() {
        let rows = cmd_sweep(&[0.5, 1.0], 0.1, 0.0).unwrap();
        assert!(rows.iter().all(|r| r.big_delta > 1.0));
        assert!(rows.iter().all(|r| r.verdict_r == VerdictR::NotProven));
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_mu_grid("0.1,0.2").unwrap(), vec![0.1, 0.2]);
        for bad in ["", "a:b:c", "0.1:0.05:0.01", "0:1:0", "0:1:-1", "1:2:3:4", "nan"] {
            assert!(parse_mu_grid(bad).is_err(), "{bad}");
        }
        assert!(cmd_sweep(&[0.2, 0.1], 0.1, 0.0).is_err());
        assert!(cmd_sweep(&[0.0, 0.1], 0.1, 0.0).is_err());
    }

    #[test]
    fn threshold_command() {
        assert!((cmd_threshold(0.146).unwrap().mu_star - 0.0240).abs() < 5e-4);
        assert_eq!(cmd_threshold(0.189).unwrap().mu_star, 0.0);
        assert!(cmd_threshold(0.2).is_err());
        assert!(cmd_threshold(-0.1).is_err());
    }

    #[test]
    fn csv_header_is_stable() {
        let rows = cmd_sweep(&[0.02], 0.146, 0.0).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), SWEEP_COLUMNS.join(","));
        assert!(lines.next().unwrap().ends_with(",SECURE"));
    }

    #[test]
    fn json_round_trips() {
        let report = cmd_analyze(0.02, 0.146, 0.0).unwrap();
        let back: AnalyzeReport = serde_json::from_str(&to_json(&report)).unwrap();
        assert_eq!(back.security.verdict_r, report.security.verdict_r);
        assert_eq!(back.security.mu_star, round_sig(report.security.mu_star));
        assert_eq!(to_json(&back), to_json(&report));

        let rows = cmd_sweep(&[0.01, 0.03], 0.146, 0.0).unwrap();
        let mut buf = Vec::new();
        write_sweep_json_lines(&rows, &mut buf).unwrap();
        let parsed: Vec<SweepRow> = String::from_utf8(buf)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[1].verdict_r, VerdictR::NotProven);
    }
}
