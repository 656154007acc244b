//! Report types and the two output formats.
//!
//! CSV output is the determinism surface: numbers are always rendered
//! with 12 significant digits, '.' decimal separator, scenario order
//! preserved, so identical config + seed gives byte-identical files.

use serde::Serialize;

use crate::config::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// Measurement compatible with the predicted exponent.
    Consistent,
    /// Measurement contradicts the prediction beyond noise + tolerance.
    Violation,
    /// Too noisy (or the probe function too far from critical) to decide.
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Consistent => "consistent",
            Verdict::Violation => "violation",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileRow {
    pub radius: f64,
    pub nu: f64,
    pub standard_error: f64,
    pub sample_count: usize,
    pub fallback_pivot: bool,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Diagnostics {
    /// Modulus floor clamps fired during the scenario.
    pub clamp_count: u64,
    /// Scales excluded from the exponent fit (index into the profile).
    pub dropped_scales: Vec<usize>,
    pub used_scales: usize,
    /// Dilate schedules that hit the depth cap without converging.
    pub stalled_dilates: u64,
    /// Free-form notes: importance sampling switches, fallback pivots,
    /// integrability checks, sharpness margins.
    pub notes: Vec<String>,
}

/// One scenario's outcome. The scenario block is echoed whole so the run
/// can be reproduced from the report alone.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub scenario: Scenario,
    pub seed: u64,
    pub predicted: f64,
    pub measured: f64,
    pub halfwidth: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_squared: Option<f64>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<Vec<ProfileRow>>,
    pub diagnostics: Diagnostics,
    pub wall_ms: u128,
    pub versions: Versions,
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub lab: &'static str,
    pub core: &'static str,
}

impl Versions {
    pub fn current() -> Self {
        Versions {
            lab: env!("CARGO_PKG_VERSION"),
            // Single workspace: the core crate carries the same version.
            core: env!("CARGO_PKG_VERSION"),
        }
    }
}

/// A scenario that could not run at all; recorded instead of a Report so
/// the suite summary keeps one row per scenario.
#[derive(Debug, Clone, Serialize)]
pub struct FailureRecord {
    pub scenario_name: String,
    pub tag: String,
    pub error: String,
}

#[derive(Debug)]
pub enum Outcome {
    Done(Box<Report>),
    Failed(FailureRecord),
}

/// 12 significant digits, scientific, locale-free. The fixed width makes
/// CSV output byte-stable across runs and thread counts.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    format!("{x:.11e}")
}

pub const SUMMARY_HEADER: &str = "scenario,tag,predicted,measured,halfwidth,verdict";

/// One summary line per outcome, in input order.
pub fn summary_csv(outcomes: &[Outcome]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for oc in outcomes {
        match oc {
            Outcome::Done(r) => {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.scenario.name,
                    r.scenario.tag.as_str(),
                    fmt_sig(r.predicted),
                    fmt_sig(r.measured),
                    fmt_sig(r.halfwidth),
                    r.verdict.as_str()
                ));
            }
            Outcome::Failed(f) => {
                out.push_str(&format!("{},{},,,,error\n", f.scenario_name, f.tag));
            }
        }
    }
    out
}

/// Profile CSV for the `oscillation` subcommand and report sidecars.
pub fn profile_csv(rows: &[ProfileRow]) -> String {
    let mut out = String::from("radius,nu,standard_error,sample_count,fallback_pivot\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_sig(r.radius),
            fmt_sig(r.nu),
            fmt_sig(r.standard_error),
            r.sample_count,
            r.fallback_pivot
        ));
    }
    out
}

pub fn report_json(report: &Report) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}
