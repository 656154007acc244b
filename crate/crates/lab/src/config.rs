//! Declarative suite configuration.
//!
//! A suite file is TOML: one `[suite]` header plus `[[scenario]]` blocks.
//! Unknown keys are rejected so typos fail loudly instead of silently
//! running defaults. Field names here are the on-disk interface; the
//! README documents them verbatim.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

/// Built-in suite that exercises every scenario kind; used when no
/// `--config` is given or when `--config builtin:default` is passed.
pub const BUILTIN_DEFAULT: &str = include_str!("../assets/default.toml");

/// Built-in wrong-prediction control: must produce a violation verdict.
/// Guards against a harness that never fails anything.
pub const BUILTIN_NEGATIVE_CONTROL: &str = include_str!("../assets/negative_control.toml");

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub suite: SuiteHeader,
    #[serde(default, rename = "scenario")]
    pub scenarios: Vec<Scenario>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteHeader {
    pub name: String,
    pub seed: u64,
    /// Verdict slack added to the fit confidence halfwidth before a
    /// measured exponent below prediction counts as a violation.
    /// Exponent fits at desk scale carry bias; this absorbs it.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_tolerance() -> f64 {
    0.03
}

/// What a scenario verifies. Tags map to the checks in `scenario::run`:
/// exponent-drop measurements (A, B, KVM, T1, T2, T4-sharpness), the
/// kernel difference bound (L2.2-kernel), Poisson growth (P-lq), and the
/// slice finiteness certificate (slice-B0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
pub enum Tag {
    #[serde(rename = "A")]
    A,
    #[serde(rename = "B")]
    B,
    #[serde(rename = "KVM")]
    Kvm,
    #[serde(rename = "T1")]
    T1,
    #[serde(rename = "T2")]
    T2,
    #[serde(rename = "T4-sharpness")]
    T4Sharpness,
    #[serde(rename = "L2.2-kernel")]
    KernelDiff,
    #[serde(rename = "P-lq")]
    PoissonLq,
    #[serde(rename = "slice-B0")]
    SliceB0,
}

impl Tag {
    pub fn as_str(&self) -> &'static str {
        match self {
            Tag::A => "A",
            Tag::B => "B",
            Tag::Kvm => "KVM",
            Tag::T1 => "T1",
            Tag::T2 => "T2",
            Tag::T4Sharpness => "T4-sharpness",
            Tag::KernelDiff => "L2.2-kernel",
            Tag::PoissonLq => "P-lq",
            Tag::SliceB0 => "slice-B0",
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub tag: Tag,
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    /// Holder exponent of the boundary modulus.
    pub alpha: Option<f64>,
    /// Integrability exponent of log phi (KVM, T1, T4-sharpness).
    pub p: Option<f64>,
    /// Dual exponent; derived from p when absent.
    pub q: Option<f64>,
    /// Sharpness margin for T4: measured must stay within
    /// predicted + delta to count as evidence of sharpness.
    pub delta: Option<f64>,
    /// Replaces the tag's predicted exponent; the negative control plants
    /// a deliberately wrong value here.
    pub predicted_override: Option<f64>,
    #[serde(default)]
    pub modulus: ModulusConfig,
    #[serde(default)]
    pub profile: ProfileConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub poisson: PoissonConfig,
    #[serde(default)]
    pub slice: SliceConfig,
}

fn default_dimension() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModulusConfig {
    /// constant | power_cusp | log_spike | holder_cusp
    pub family: String,
    /// constant: the value c.
    pub value: Option<f64>,
    /// power_cusp: |1 - e^{i theta}|^beta (defaults to alpha).
    pub beta: Option<f64>,
    /// log_spike: exp(-min(|theta|^-gamma, depth)) near 0.
    pub gamma: Option<f64>,
    /// Lower clamp for modulus values and log integrands.
    #[serde(default = "default_floor")]
    pub floor: f64,
}

fn default_floor() -> f64 {
    outerlab_core::modulus::MODULUS_FLOOR
}

impl Default for ModulusConfig {
    fn default() -> Self {
        ModulusConfig {
            family: "power_cusp".into(),
            value: None,
            beta: None,
            gamma: None,
            floor: default_floor(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    /// Dyadic radii 2^-k for k in start_level..=end_level.
    #[serde(default = "default_start_level")]
    pub start_level: u32,
    #[serde(default = "default_end_level")]
    pub end_level: u32,
    /// Samples per ball; 0 picks the built-in schedule that grows as the
    /// ball shrinks.
    #[serde(default)]
    pub samples_per_ball: usize,
    #[serde(default = "default_sample_cap")]
    pub sample_cap: usize,
}

fn default_start_level() -> u32 {
    3
}
fn default_end_level() -> u32 {
    10
}
fn default_sample_cap() -> usize {
    100_000
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig {
            start_level: default_start_level(),
            end_level: default_end_level(),
            samples_per_ball: 0,
            sample_cap: default_sample_cap(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    /// Disc quadrature nodes (power of two).
    #[serde(default = "default_quad_nodes")]
    pub quad_nodes: usize,
    /// Monte-Carlo draws per ball-outer evaluation.
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    /// Stopping tolerance for the radial dilate schedule.
    #[serde(default = "default_boundary_tol")]
    pub boundary_tol: f64,
    /// Reject ball-outer values whose exponent standard error exceeds this.
    #[serde(default = "default_se_cap")]
    pub se_cap: f64,
    /// Switch the ball-outer sampler to the cap importance mixture once
    /// |z| crosses this; unset keeps plain MC everywhere.
    pub importance_threshold: Option<f64>,
}

fn default_quad_nodes() -> usize {
    4096
}
fn default_mc_samples() -> usize {
    20_000
}
fn default_boundary_tol() -> f64 {
    1e-4
}
fn default_se_cap() -> f64 {
    0.5
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            quad_nodes: default_quad_nodes(),
            mc_samples: default_mc_samples(),
            boundary_tol: default_boundary_tol(),
            se_cap: default_se_cap(),
            importance_threshold: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    /// Ball radii 2^-k for each listed k.
    #[serde(default = "default_l_levels")]
    pub l_levels: Vec<u32>,
    /// Annulus indices j = 1..=j_max at dyadic distance 2^j l.
    #[serde(default = "default_j_max")]
    pub j_max: u32,
    #[serde(default = "default_pairs")]
    pub pairs: usize,
}

fn default_l_levels() -> Vec<u32> {
    vec![6, 8, 10]
}
fn default_j_max() -> u32 {
    5
}
fn default_pairs() -> usize {
    3000
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            l_levels: default_l_levels(),
            j_max: default_j_max(),
            pairs: default_pairs(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PoissonConfig {
    #[serde(default = "default_qs")]
    pub qs: Vec<f64>,
    /// Radii 1 - 2^-k for each listed k.
    #[serde(default = "default_r_levels")]
    pub r_levels: Vec<u32>,
    /// Allowed relative deviation of the fitted growth exponent from q - 1.
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
}

fn default_qs() -> Vec<f64> {
    vec![1.5, 2.0, 3.0]
}
fn default_r_levels() -> Vec<u32> {
    (8..=14).collect()
}
fn default_rel_tol() -> f64 {
    0.05
}

impl Default for PoissonConfig {
    fn default() -> Self {
        PoissonConfig {
            qs: default_qs(),
            r_levels: default_r_levels(),
            rel_tol: default_rel_tol(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SliceConfig {
    /// Random directions added to the coordinate axes.
    #[serde(default = "default_extra_directions")]
    pub extra_directions: usize,
    #[serde(default = "default_angular_nodes")]
    pub angular_nodes: usize,
    /// Scan fails soft (inconclusive) when more than this fraction of
    /// nodes sits on the clamp.
    #[serde(default = "default_clamp_budget")]
    pub clamp_budget: f64,
}

fn default_extra_directions() -> usize {
    4
}
fn default_angular_nodes() -> usize {
    1024
}
fn default_clamp_budget() -> f64 {
    0.02
}

impl Default for SliceConfig {
    fn default() -> Self {
        SliceConfig {
            extra_directions: default_extra_directions(),
            angular_nodes: default_angular_nodes(),
            clamp_budget: default_clamp_budget(),
        }
    }
}

impl SuiteConfig {
    /// Parses and validates a suite. `source` names the input in errors.
    pub fn parse(text: &str, source: &str) -> LabResult<Self> {
        let cfg: SuiteConfig = toml::from_str(text)
            .map_err(|e| LabError::config(format!("{source}: {e}")))?;
        cfg.validate(source)?;
        Ok(cfg)
    }

    /// Loads `builtin:default`, `builtin:negative-control`, or a file path.
    pub fn load(source: Option<&str>) -> LabResult<Self> {
        match source {
            None => Self::parse(BUILTIN_DEFAULT, "builtin:default"),
            Some("builtin:default") => Self::parse(BUILTIN_DEFAULT, "builtin:default"),
            Some("builtin:negative-control") => {
                Self::parse(BUILTIN_NEGATIVE_CONTROL, "builtin:negative-control")
            }
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| LabError::config(format!("{path}: {e}")))?;
                Self::parse(&text, path)
            }
        }
    }

    pub fn scenario(&self, name: &str) -> LabResult<&Scenario> {
        self.scenarios
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| LabError::config(format!("no scenario named '{name}'")))
    }

    fn validate(&self, source: &str) -> LabResult<()> {
        if !(self.suite.tolerance >= 0.0) {
            return Err(LabError::config(format!(
                "{source}: suite.tolerance must be nonnegative"
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for s in &self.scenarios {
            if !seen.insert(s.name.as_str()) {
                return Err(LabError::config(format!(
                    "{source}: duplicate scenario name '{}'",
                    s.name
                )));
            }
            s.validate()
                .map_err(|e| LabError::config(format!("{source}: scenario '{}': {e}", s.name)))?;
        }
        Ok(())
    }
}

impl Scenario {
    /// Tag-specific requirements, checked before any work runs.
    pub fn validate(&self) -> Result<(), String> {
        let need_alpha = |range_hi: f64| -> Result<f64, String> {
            let a = self.alpha.ok_or("alpha is required for this tag")?;
            if !(a > 0.0 && a < range_hi) {
                return Err(format!("alpha = {a} outside (0, {range_hi})"));
            }
            Ok(a)
        };
        let need_p = || -> Result<f64, String> {
            let p = self.p.ok_or("p is required for this tag")?;
            if !(p > 1.0) {
                return Err(format!("p = {p} must exceed 1"));
            }
            Ok(p)
        };
        match self.tag {
            Tag::A | Tag::B => {
                need_alpha(1.0 + 1e-12)?;
                if self.dimension != 1 {
                    return Err("disc tags need dimension = 1".into());
                }
            }
            Tag::Kvm => {
                need_alpha(1.0 + 1e-12)?;
                if self.dimension != 1 {
                    return Err("disc tags need dimension = 1".into());
                }
                if self.q.is_none() {
                    need_p()?;
                }
                if let Some(q) = self.q {
                    if !(q > 1.0) {
                        return Err(format!("q = {q} must exceed 1"));
                    }
                }
            }
            Tag::T1 => {
                need_alpha(1.0 + 1e-12)?;
                need_p()?;
                if self.dimension < 2 {
                    return Err("ball tags need dimension >= 2".into());
                }
            }
            Tag::T2 => {
                need_alpha(1.0 + 1e-12)?;
                if self.dimension < 2 {
                    return Err("ball tags need dimension >= 2".into());
                }
            }
            Tag::T4Sharpness => {
                need_alpha(1.0 + 1e-12)?;
                need_p()?;
                if self.dimension < 2 {
                    return Err("ball tags need dimension >= 2".into());
                }
                if let Some(d) = self.delta {
                    if !(d > 0.0) {
                        return Err(format!("delta = {d} must be positive"));
                    }
                }
            }
            Tag::KernelDiff => {
                if self.kernel.l_levels.is_empty() || self.kernel.j_max == 0 {
                    return Err("kernel check needs l_levels and j_max >= 1".into());
                }
                for &k in &self.kernel.l_levels {
                    let l = (0.5f64).powi(k as i32);
                    let outer = (2.0f64).powi(self.kernel.j_max as i32 + 1) * l;
                    if outer > 2.0 {
                        return Err(format!(
                            "annulus 2^{} * 2^-{k} leaves the sphere",
                            self.kernel.j_max + 1
                        ));
                    }
                }
            }
            Tag::PoissonLq => {
                if self.poisson.qs.is_empty() || self.poisson.r_levels.len() < 3 {
                    return Err("poisson check needs qs and >= 3 radius levels".into());
                }
                for &q in &self.poisson.qs {
                    if !(q >= 1.0) {
                        return Err(format!("poisson q = {q} below 1"));
                    }
                }
            }
            Tag::SliceB0 => {
                if self.dimension < 2 {
                    return Err("slice scan needs dimension >= 2".into());
                }
                if self.slice.angular_nodes < 64 {
                    return Err("slice scan needs >= 64 angular nodes".into());
                }
            }
        }
        if self.profile.end_level < self.profile.start_level {
            return Err("profile.end_level below profile.start_level".into());
        }
        match self.modulus.family.as_str() {
            "constant" | "power_cusp" | "log_spike" | "holder_cusp" => {}
            other => {
                return Err(format!(
                    "unknown modulus family '{other}' \
                     (expected constant | power_cusp | log_spike | holder_cusp)"
                ))
            }
        }
        if !(self.modulus.floor > 0.0 && self.modulus.floor < 1.0) {
            return Err(format!("modulus.floor {} outside (0, 1)", self.modulus.floor));
        }
        Ok(())
    }

    /// Dual exponent q: configured directly or derived from p.
    pub fn dual_q(&self) -> Option<f64> {
        self.q
            .or_else(|| self.p.map(|p| p / (p - 1.0)))
            .filter(|q| q.is_finite() && *q > 1.0)
    }

    pub fn radii(&self) -> Vec<f64> {
        (self.profile.start_level..=self.profile.end_level)
            .map(|k| (0.5f64).powi(k as i32))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_configs_parse_and_validate() {
        let d = SuiteConfig::load(Some("builtin:default")).unwrap();
        assert!(!d.scenarios.is_empty());
        let n = SuiteConfig::load(Some("builtin:negative-control")).unwrap();
        assert!(n
            .scenarios
            .iter()
            .any(|s| s.predicted_override.is_some()));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"
[suite]
name = "x"
seed = 1
typo_key = 3
"#;
        assert!(SuiteConfig::parse(text, "inline").is_err());
    }

    #[test]
    fn tag_requirements_are_enforced() {
        let text = r#"
[suite]
name = "x"
seed = 1

[[scenario]]
name = "bad"
tag = "T1"
dimension = 2
alpha = 0.5
"#;
        // T1 without p must fail validation.
        let err = SuiteConfig::parse(text, "inline").unwrap_err();
        assert!(format!("{err}").contains("p is required"));
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let text = r#"
[suite]
name = "x"
seed = 1

[[scenario]]
name = "a"
tag = "B"
dimension = 1
alpha = 0.5

[[scenario]]
name = "a"
tag = "B"
dimension = 1
alpha = 0.5
"#;
        let err = SuiteConfig::parse(text, "inline").unwrap_err();
        assert!(format!("{err}").contains("duplicate"));
    }
}
