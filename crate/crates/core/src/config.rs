//! Versioned JSON run configuration.
//!
//! ```json
//! {
//!   "schema": "kerrslab.run/v1",
//!   "problem": { "kappa": 1.0, "phi_angle": 0.0, "delta": 0.0796, "alpha": 0.05, "a_inc": 1.0 },
//!   "profile": { "kind": "constant", "value": 1.5 },
//!   "grid_n": 1025
//! }
//! ```
//!
//! Complex numbers are written as a number or a `[re, im]` pair. Unknown keys
//! are rejected.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::{Grid, PermittivityProfile, ProblemParams};
use crate::operators::KernelConvention;
use crate::quadrature::QuadratureRule;
use crate::solver::{InitialGuess, Scheme, SolveOptions};
use crate::trig::TrigPolynomial;

pub const RUN_SCHEMA: &str = "kerrslab.run/v1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexValue {
    pub fn value(self) -> Complex64 {
        match self {
            ComplexValue::Real(re) => Complex64::new(re, 0.0),
            ComplexValue::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

impl From<Complex64> for ComplexValue {
    fn from(c: Complex64) -> Self {
        if c.im == 0.0 {
            ComplexValue::Real(c.re)
        } else {
            ComplexValue::Pair([c.re, c.im])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub kappa: f64,
    pub phi_angle: f64,
    pub delta: f64,
    pub alpha: f64,
    pub a_inc: ComplexValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub coeff: ComplexValue,
    pub freq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    Constant { value: ComplexValue },
    /// `Σ coeff exp(i freq z)`.
    Trig { terms: Vec<TermSpec> },
    /// Samples on a uniform closed grid over the layer.
    Sampled { values: Vec<ComplexValue> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Kappa,
    Alpha,
    PhiAngle,
    AInc,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Kappa => "kappa",
            SweepParameter::Alpha => "alpha",
            SweepParameter::PhiAngle => "phi_angle",
            SweepParameter::AInc => "a_inc",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|k| if k + 1 == self.count { self.stop } else { self.start + step * k as f64 })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    FieldProfile,
    Amplitudes,
    Trace,
    ContractionReport,
    Flux,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationSpec {
    /// Kernel convention used against the closed-form images.
    #[serde(default = "default_oracle_convention")]
    pub oracle_convention: u8,
}

impl Default for ValidationSpec {
    fn default() -> Self {
        Self { oracle_convention: default_oracle_convention() }
    }
}

fn default_oracle_convention() -> u8 {
    2
}

fn default_tol() -> f64 {
    1e-10
}

fn default_max_iters() -> usize {
    500
}

fn default_convention() -> u8 {
    1
}

fn default_outputs() -> Vec<OutputKind> {
    vec![OutputKind::Amplitudes, OutputKind::Flux]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    pub problem: ProblemSpec,
    pub profile: ProfileSpec,
    pub grid_n: usize,
    #[serde(default)]
    pub rule: QuadratureRule,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default)]
    pub initial: InitialGuess,
    #[serde(default = "default_convention")]
    pub kernel_convention: u8,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<OutputKind>,
    #[serde(default)]
    pub validation: ValidationSpec,
}

/// A configuration problem, located at a line of the source text when possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub message: String,
    pub line: Option<usize>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "config error at line {line}: {}", self.message),
            None => write!(f, "config error: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// 1-based line of the first occurrence of `"key"` in `text`.
fn line_of_key(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

impl RunConfig {
    /// Parses and validates a configuration document.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError {
            message: e.to_string(),
            line: (e.line() > 0).then_some(e.line()),
        })?;
        cfg.validate().map_err(|(key, message)| ConfigError {
            line: line_of_key(text, key),
            message,
        })?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            message: format!("cannot read {}: {e}", path.display()),
            line: None,
        })?;
        Self::parse(&text)
    }

    /// Checks every field; the error names the offending key.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if self.schema != RUN_SCHEMA {
            return Err(("schema", format!("unsupported schema {:?}, expected {RUN_SCHEMA:?}", self.schema)));
        }
        let pr = &self.problem;
        let named = [("kappa", pr.kappa), ("phi_angle", pr.phi_angle), ("delta", pr.delta), ("alpha", pr.alpha)];
        for (key, v) in named {
            if !v.is_finite() {
                return Err((key, format!("{key} must be finite")));
            }
        }
        if !(pr.kappa > 0.0) {
            return Err(("kappa", format!("kappa must be positive, got {}", pr.kappa)));
        }
        if !(pr.delta > 0.0) {
            return Err(("delta", format!("delta must be positive, got {}", pr.delta)));
        }
        if !(pr.phi_angle.abs() < std::f64::consts::FRAC_PI_2) {
            return Err(("phi_angle", format!("phi_angle must satisfy |phi| < pi/2, got {}", pr.phi_angle)));
        }
        if !(pr.alpha >= 0.0) {
            return Err(("alpha", format!("alpha must be non-negative, got {}", pr.alpha)));
        }
        let a = pr.a_inc.value();
        if !(a.re.is_finite() && a.im.is_finite()) || a.norm() == 0.0 {
            return Err(("a_inc", "a_inc must be finite and nonzero".into()));
        }
        self.profile_for(1.0).map_err(|e| ("profile", e.to_string()))?;
        if self.grid_n < 3 || self.grid_n.is_multiple_of(2) {
            return Err(("grid_n", format!("grid_n must be odd and at least 3, got {}", self.grid_n)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(("tol", format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(("max_iters", "max_iters must be at least 1".into()));
        }
        KernelConvention::new(self.kernel_convention).map_err(|e| ("kernel_convention", e.to_string()))?;
        KernelConvention::new(self.validation.oracle_convention)
            .map_err(|e| ("oracle_convention", e.to_string()))?;
        if let Some(s) = &self.sweep {
            if s.count < 2 {
                return Err(("count", format!("sweep count must be at least 2, got {}", s.count)));
            }
            if !(s.start.is_finite() && s.stop.is_finite()) || s.start == s.stop {
                return Err(("sweep", "sweep start and stop must be finite and distinct".into()));
            }
            for v in [s.start, s.stop] {
                self.params_with(s.parameter, v)
                    .map_err(|e| ("sweep", format!("sweep endpoint {v} is invalid: {e}")))?;
            }
        }
        Ok(())
    }

    pub fn params(&self) -> crate::Result<ProblemParams> {
        let p = &self.problem;
        ProblemParams::new(p.kappa, p.phi_angle, p.delta, p.alpha, p.a_inc.value())
    }

    /// Parameters with one sweep coordinate replaced. `a_inc` sweeps set a real amplitude.
    pub fn params_with(&self, parameter: SweepParameter, value: f64) -> crate::Result<ProblemParams> {
        let p = &self.problem;
        let (mut kappa, mut phi, mut alpha, mut a) = (p.kappa, p.phi_angle, p.alpha, p.a_inc.value());
        match parameter {
            SweepParameter::Kappa => kappa = value,
            SweepParameter::Alpha => alpha = value,
            SweepParameter::PhiAngle => phi = value,
            SweepParameter::AInc => a = Complex64::new(value, 0.0),
        }
        ProblemParams::new(kappa, phi, p.delta, alpha, a)
    }

    /// The permittivity profile on `[-d, d]`.
    pub fn profile_for(&self, d: f64) -> crate::Result<PermittivityProfile> {
        match &self.profile {
            ProfileSpec::Constant { value } => PermittivityProfile::constant(value.value(), d),
            ProfileSpec::Trig { terms } => {
                let poly = TrigPolynomial::from_terms(terms.iter().map(|t| (t.coeff.value(), t.freq)));
                PermittivityProfile::trig(poly, d)
            }
            ProfileSpec::Sampled { values } => {
                PermittivityProfile::sampled(values.iter().map(|v| v.value()).collect(), d)
            }
        }
    }

    pub fn grid_for(&self, d: f64, grid_n: Option<usize>) -> crate::Result<Grid> {
        Grid::new(grid_n.unwrap_or(self.grid_n), d)
    }

    pub fn convention(&self) -> KernelConvention {
        KernelConvention::new(self.kernel_convention).expect("validated")
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            max_iters: self.max_iters,
            tol: self.tol,
            scheme: self.scheme,
            initial: self.initial,
            record_trace: true,
            rule: self.rule,
            convention: self.convention(),
        }
    }

    pub fn wants(&self, kind: OutputKind) -> bool {
        self.outputs.contains(&kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
  "schema": "kerrslab.run/v1",
  "problem": {
    "kappa": 1.0,
    "phi_angle": 0.0,
    "delta": 0.07957747154594767,
    "alpha": 0.05,
    "a_inc": 1.0
  },
  "profile": { "kind": "constant", "value": 1.5 },
  "grid_n": 65
}"#;

    #[test]
    fn parses_with_defaults() {
        let cfg = RunConfig::parse(BASE).unwrap();
        assert_eq!(cfg.tol, 1e-10);
        assert_eq!(cfg.scheme, Scheme::Picard);
        assert_eq!(cfg.convention(), KernelConvention::PHYSICAL);
        assert_eq!(cfg.validation.oracle_convention, 2);
        let p = cfg.params().unwrap();
        assert!((p.d() - 0.5).abs() < 1e-15);
        assert!(cfg.profile_for(p.d()).unwrap().is_real());
    }

    #[test]
    fn complex_values_and_profiles() {
        let text = BASE
            .replace(r#""value": 1.5"#, r#""value": [1.5, 0.05]"#)
            .replace(r#""a_inc": 1.0"#, r#""a_inc": [0.6, 0.8]"#);
        let cfg = RunConfig::parse(&text).unwrap();
        assert_eq!(cfg.params().unwrap().a_inc(), Complex64::new(0.6, 0.8));
        assert!(!cfg.profile_for(0.5).unwrap().is_real());

        let text = BASE.replace(
            r#"{ "kind": "constant", "value": 1.5 }"#,
            r#"{ "kind": "trig", "terms": [{"coeff": 1.3, "freq": 0}, {"coeff": 0.1, "freq": 1}, {"coeff": 0.1, "freq": -1}] }"#,
        );
        let cfg = RunConfig::parse(&text).unwrap();
        let eps = cfg.profile_for(0.5).unwrap();
        assert!(eps.is_real());
        assert!((eps.eval(0.0).unwrap().re - 1.5).abs() < 1e-15);
    }

    #[test]
    fn negative_kappa_names_field_and_line() {
        let text = BASE.replace(r#""kappa": 1.0"#, r#""kappa": -1.0"#);
        let err = RunConfig::parse(&text).unwrap_err();
        assert!(err.message.contains("kappa"));
        assert_eq!(err.line, Some(4));
        assert!(err.to_string().contains("line 4"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = BASE.replace(r#""grid_n": 65"#, "\"grid_n\": 65,\n  \"gird\": 3");
        let err = RunConfig::parse(&text).unwrap_err();
        assert!(err.message.contains("gird"), "{err}");
        assert!(err.line.is_some());
    }

    #[test]
    fn schema_and_sweep_validation() {
        let err = RunConfig::parse(&BASE.replace("run/v1", "run/v0")).unwrap_err();
        assert!(err.message.contains("schema"));

        let sweep = |count: usize| {
            BASE.replace(
                r#""grid_n": 65"#,
                &format!("\"grid_n\": 65,\n  \"sweep\": {{\"parameter\": \"alpha\", \"start\": 0, \"stop\": 0.1, \"count\": {count}}}"),
            )
        };
        let cfg = RunConfig::parse(&sweep(11)).unwrap();
        let values = cfg.sweep.as_ref().unwrap().values();
        assert_eq!(values.len(), 11);
        assert_eq!(values[0], 0.0);
        assert_eq!(values[10], 0.1);
        let err = RunConfig::parse(&sweep(1)).unwrap_err();
        assert!(err.message.contains("count"));
    }

    #[test]
    fn even_grid_is_rejected() {
        let err = RunConfig::parse(&BASE.replace(r#""grid_n": 65"#, r#""grid_n": 64"#)).unwrap_err();
        assert!(err.message.contains("grid_n"));
        assert_eq!(err.line, Some(11));
    }
}
