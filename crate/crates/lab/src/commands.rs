//! Library-side implementations of the point-evaluation and fit
//! subcommands, kept out of main.rs so integration tests can call them.

use outerlab_core::function::InteriorFunction;
use outerlab_core::modulus::ModulusProfile;
use outerlab_core::oscillation::{fit_exponent, ExponentFit, FitDiagnostics, OscillationEstimate};
use outerlab_core::outer::{lift_to_ball, BallOuterEvaluator, DiscOuterEvaluator};
use outerlab_core::sampler::Sampler;
use outerlab_core::C64;

use crate::config::{Scenario, Tag};
use crate::error::{LabError, LabResult};
use crate::report::fmt_sig;
use crate::scenario::{circle_modulus, scenario_stream};

#[derive(Debug, Clone, serde::Serialize)]
pub struct EvalRow {
    pub point: String,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
    /// Standard error of the Monte-Carlo exponent, when MC was involved.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent_se: Option<f64>,
}

/// Evaluates the scenario's function at interior points.
pub fn eval_points(s: &Scenario, seed: u64, points: &[Vec<C64>]) -> LabResult<Vec<EvalRow>> {
    let sampler = Sampler::new(seed, scenario_stream(&s.name));
    let mut rows = Vec::with_capacity(points.len());
    match s.tag {
        Tag::A | Tag::B | Tag::Kvm => {
            let psi = circle_modulus(s)?;
            let g = DiscOuterEvaluator::new(&psi, s.eval.quad_nodes, s.modulus.floor)?;
            for z in points {
                let v = g.eval(z[0])?;
                rows.push(row(z, v, None));
            }
        }
        Tag::T1 | Tag::T2 | Tag::T4Sharpness | Tag::SliceB0 => {
            if s.modulus.family == "holder_cusp" {
                let alpha = s
                    .alpha
                    .ok_or_else(|| LabError::config("holder_cusp needs alpha".to_string()))?;
                let phi = ModulusProfile::holder_cusp(alpha, s.dimension, s.modulus.floor)?;
                let ev =
                    BallOuterEvaluator::new(&phi, s.eval.mc_samples, sampler.substream(0xba11))?
                        .with_se_cap(s.eval.se_cap);
                for z in points {
                    let detailed = ev.eval_detailed(z)?;
                    rows.push(row(z, detailed.value, Some(detailed.exponent_se)));
                }
            } else {
                let psi = circle_modulus(s)?;
                let g = DiscOuterEvaluator::new(&psi, s.eval.quad_nodes, s.modulus.floor)?;
                let lift = lift_to_ball(g, s.dimension)?;
                for z in points {
                    let v = lift.eval(z)?;
                    rows.push(row(z, v, None));
                }
            }
        }
        _ => {
            return Err(LabError::config(format!(
                "tag {} has no function to evaluate",
                s.tag.as_str()
            )))
        }
    }
    Ok(rows)
}

fn row(z: &[C64], v: C64, exponent_se: Option<f64>) -> EvalRow {
    let point = z
        .iter()
        .map(|c| format!("{}{}{}i", c.re, if c.im < 0.0 { "" } else { "+" }, c.im))
        .collect::<Vec<_>>()
        .join(",");
    EvalRow {
        point,
        re: v.re,
        im: v.im,
        abs: v.norm(),
        exponent_se,
    }
}

pub fn eval_csv(rows: &[EvalRow]) -> String {
    let mut out = String::from("point,re,im,abs,exponent_se\n");
    for r in rows {
        out.push_str(&format!(
            "\"{}\",{},{},{},{}\n",
            r.point,
            fmt_sig(r.re),
            fmt_sig(r.im),
            fmt_sig(r.abs),
            r.exponent_se.map(fmt_sig).unwrap_or_default()
        ));
    }
    out
}

/// Reads a profile CSV (as written by the oscillation subcommand) back
/// into estimates. Pivots are not stored in the CSV and are not needed
/// for fitting.
pub fn parse_profile_csv(text: &str) -> LabResult<Vec<OscillationEstimate>> {
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if k == 0 || line.trim().is_empty() {
            continue; // header
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 4 {
            return Err(LabError::config(format!(
                "profile line {} has {} fields, expected at least 4",
                k + 1,
                fields.len()
            )));
        }
        let parse = |i: usize| -> LabResult<f64> {
            fields[i]
                .trim()
                .parse()
                .map_err(|_| LabError::config(format!("bad number '{}' on line {}", fields[i], k + 1)))
        };
        rows.push(OscillationEstimate {
            radius: parse(0)?,
            nu: parse(1)?,
            pivot: C64::new(0.0, 0.0),
            standard_error: parse(2)?,
            sample_count: parse(3)? as usize,
            fallback: fields.get(4).map(|f| f.trim() == "true").unwrap_or(false),
        });
    }
    if rows.is_empty() {
        return Err(LabError::config("profile file has no data rows".to_string()));
    }
    Ok(rows)
}

pub fn fit_profile(rows: &[OscillationEstimate]) -> LabResult<(ExponentFit, FitDiagnostics)> {
    Ok(fit_exponent(rows)?)
}
