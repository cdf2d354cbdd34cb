//! Run configuration, parsed from JSON.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use warpband_core::band::ComparisonMap;
use warpband_core::{ModelSign, ModelSpec, SymmetricBand, WarpingProfile};

use crate::error::ConfigError;

pub const DEFAULT_OUTPUT_DIR: &str = "warpband-out";
pub const OUTPUT_DIR_ENV: &str = "WARPBAND_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "parameters", rename_all = "kebab-case")]
pub enum Command {
    Model(ModelParams),
    Spectrum(SpectrumParams),
    Verify(VerifyParams),
    Cone(ConeParams),
    CheckBand(CheckBandParams),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Model(_) => "model",
            Command::Spectrum(_) => "spectrum",
            Command::Verify(_) => "verify",
            Command::Cone(_) => "cone",
            Command::CheckBand(_) => "check-band",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Gate on residuals and margins.
    #[serde(default = "default_tol")]
    pub residual: f64,
    /// Gate on equality flags.
    #[serde(default = "default_tol")]
    pub equality: f64,
}

fn default_tol() -> f64 {
    1e-8
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: default_tol(),
            equality: default_tol(),
        }
    }
}

impl Tolerances {
    pub fn uniform(tol: f64) -> Self {
        Self {
            residual: tol,
            equality: tol,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [("residual", self.residual), ("equality", self.equality)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::Invalid(format!(
                    "tolerance `{name}` must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub n: usize,
    pub gamma: f64,
    pub lambda: f64,
    #[serde(default)]
    pub sign: ModelSign,
    /// Defaults to the full period `[0, π/b]` for the positive family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<[f64; 2]>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    1001
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    pub n: usize,
    pub gamma: f64,
    /// Radius of the round cross-section.
    pub radius: f64,
    /// Model warping value `ξ` at the comparison slice.
    pub xi: f64,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
}

fn default_k_max() -> usize {
    warpband_core::stability::DEFAULT_K_MAX
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyParams {
    pub band: SymmetricBand,
    /// Prescription `μ(t)` for the energy checks.
    pub mu: WarpingProfile,
    /// Slice `s` where the energy is varied.
    pub slice: f64,
    #[serde(default = "default_h_fd")]
    pub h_fd: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Variation `δ` for the integral identities; skipped when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<WarpingProfile>,
    #[serde(default = "default_min_order")]
    pub min_order: f64,
}

fn default_h_fd() -> f64 {
    1e-2
}

fn default_eps() -> f64 {
    1e-2
}

fn default_min_order() -> f64 {
    1.9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeParams {
    pub n: usize,
    pub gamma: f64,
    pub aperture: f64,
    /// Weight exponent; defaults to `1/(2−γ)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Angular profile `p(θ)` on `[0, π]` of the sphere-factor stretch.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<WarpingProfile>,
    #[serde(default = "default_scale")]
    pub t: f64,
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonCone>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonCone {
    pub aperture: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

fn default_scale() -> f64 {
    0.05
}

fn default_modes() -> usize {
    warpband_core::cone::DEFAULT_MODES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckBandParams {
    pub band: SymmetricBand,
    pub model: ModelSpec,
    /// Defaults to `τ = id` on the band interval.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<ComparisonMap>,
    #[serde(default = "default_true")]
    pub sweep: bool,
}

fn default_true() -> bool {
    true
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.tolerances.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialize")
    }

    /// Output directory: `override_dir`, then the environment, then the config.
    pub fn output_dir(&self, override_dir: Option<PathBuf>) -> PathBuf {
        override_dir
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .or_else(|| self.output_path.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use warpband_core::Shape;

    fn sample() -> RunConfig {
        let rho = WarpingProfile::new(
            Shape::Sin {
                a: 1.0,
                b: 1.0,
                offset: 0.0,
            },
            0.5,
            2.5,
        )
        .unwrap();
        let u = WarpingProfile::new(Shape::constant(1.0), 0.5, 2.5).unwrap();
        RunConfig {
            command: Command::CheckBand(CheckBandParams {
                band: SymmetricBand::new(3, rho, u, 0.0).unwrap(),
                model: ModelSpec::new(3, 0.0, 3.0, [0.5, 2.5], ModelSign::Positive),
                map: None,
                sweep: true,
            }),
            output_path: Some("out".into()),
            tolerances: Tolerances::default(),
        }
    }

    #[test]
    fn round_trip() {
        let cfg = sample();
        assert_eq!(RunConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn unknown_command_is_parse_error() {
        let err = RunConfig::from_json(r#"{"command": "foo", "parameters": {}}"#).unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)));
    }

    #[test]
    fn tolerances_must_be_positive() {
        let text = r#"{"command": "spectrum",
            "parameters": {"n": 3, "gamma": 0.0, "radius": 1.0, "xi": 1.0},
            "tolerances": {"residual": 0.0}}"#;
        assert!(matches!(
            RunConfig::from_json(text),
            Err(ConfigError::Invalid(_))
        ));
    }

    #[test]
    fn defaults_fill_in() {
        let text = r#"{"command": "model", "parameters": {"n": 3, "gamma": 1.0, "lambda": 2.0}}"#;
        let cfg = RunConfig::from_json(text).unwrap();
        assert_eq!(cfg.tolerances, Tolerances::default());
        match cfg.command {
            Command::Model(p) => {
                assert_eq!(p.samples, 1001);
                assert_eq!(p.sign, ModelSign::Positive);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_profile_is_rejected() {
        let text = r#"{"command": "verify", "parameters": {
            "band": {"n": 3, "gamma": 1.0,
                     "rho": {"family": "tabulated", "h": 0.1, "values": [1.0, 2.0], "t0": 0.0},
                     "u": {"family": "linear", "a": 0.0, "offset": 1.0}},
            "mu": {"family": "linear", "a": 0.0, "offset": 1.0},
            "slice": 0.1}}"#;
        assert!(RunConfig::from_json(text).is_err());
    }
}
