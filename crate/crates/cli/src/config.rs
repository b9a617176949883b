//! Run configuration, read from TOML (or JSON when the file ends in `.json`).
//!
//! All dimensionful values are in GeV. A run describes its fluid either with
//! a `[state]` table or with a `[vortex]` table, never both.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};
use spinstat_core::thermo::CHECK_NAMES;
use spinstat_core::{eb_compose, FluidState, PerturbationSpec, QuadratureSpec, Statistics, VortexParameters};

/// Problem with the configuration or the command line; maps to exit code 1.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub(crate) fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vortex: Option<VortexParameters>,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSpec>,
    #[serde(default)]
    pub polarization: PolarizationConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub mass: f64,
    pub temperature: f64,
    #[serde(default)]
    pub mu: f64,
    /// Three-velocity of the fluid.
    #[serde(default)]
    pub velocity: [f64; 3],
    #[serde(default)]
    pub omega: OmegaConfig,
}

/// Spin potential through its electric-like and magnetic-like parts.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OmegaConfig {
    pub e: [f64; 3],
    pub b: [f64; 3],
}

/// `[verify]` holds `checks` next to the [`PerturbationSpec`] fields.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub checks: Vec<String>,
    #[serde(flatten)]
    pub perturbation: PerturbationSpec,
}

// serde's `flatten` would accept misspelled step names silently
impl<'de> Deserialize<'de> for VerifyConfig {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let mut table = serde_json::Map::<String, serde_json::Value>::deserialize(d)?;
        let checks = match table.remove("checks") {
            Some(v) => serde_json::from_value(v).map_err(D::Error::custom)?,
            None => all_checks(),
        };
        let perturbation = serde_json::from_value(serde_json::Value::Object(table)).map_err(D::Error::custom)?;
        Ok(VerifyConfig { checks, perturbation })
    }
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            checks: all_checks(),
            perturbation: PerturbationSpec::default(),
        }
    }
}

fn all_checks() -> Vec<String> {
    CHECK_NAMES.iter().map(|s| s.to_string()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// `json` or `csv`; scans default to `csv`, everything else to `json`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Written atomically; standard output when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanParameter {
    T,
    #[serde(rename = "mu")]
    Mu,
    /// Multiplies the configured spin potential.
    #[serde(rename = "omega_scale")]
    OmegaScale,
    /// Requires a `[vortex]` table; sets `Omega0 = value * T0`.
    #[serde(rename = "Omega0_over_T0")]
    Omega0OverT0,
}

impl ScanParameter {
    pub fn name(self) -> &'static str {
        match self {
            ScanParameter::T => "T",
            ScanParameter::Mu => "mu",
            ScanParameter::OmegaScale => "omega_scale",
            ScanParameter::Omega0OverT0 => "Omega0_over_T0",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub parameter: ScanParameter,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl ScanSpec {
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.steps < 2 {
            return Err(config_error(format!(
                "scan.steps must be at least 2, got {}",
                self.steps
            )));
        }
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return Err(config_error("scan.lo and scan.hi must be finite"));
        }
        Ok(())
    }

    /// Evenly spaced values from `lo` to `hi`, both included.
    pub fn values(&self) -> Vec<f64> {
        let n = self.steps - 1;
        (0..self.steps)
            .map(|k| (self.lo * (n - k) as f64 + self.hi * k as f64) / n as f64)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolarizationConfig {
    pub statistics: Statistics,
    pub particles_only: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub seed: u64,
    pub trials: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { seed: 1, trials: 500 }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read config {}: {e}", path.display())))?;
        let parsed = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        let config: RunConfig = parsed.map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.quadrature
            .validate()
            .map_err(|e| config_error(format!("[quadrature]: {e}")))?;
        self.verify
            .perturbation
            .validate()
            .map_err(|e| config_error(format!("[verify]: {e}")))?;
        for c in &self.verify.checks {
            if !CHECK_NAMES.contains(&c.as_str()) {
                return Err(config_error(format!(
                    "unknown check `{c}`; expected one of {}",
                    CHECK_NAMES.join(", ")
                )));
            }
        }
        if let Some(scan) = &self.scan {
            scan.validate()?;
        }
        if self.oracle.trials == 0 {
            return Err(config_error("oracle.trials must be positive"));
        }
        Ok(())
    }

    /// The fluid described by `[state]` or `[vortex]`.
    pub fn fluid_state(&self) -> anyhow::Result<FluidState> {
        let state = match (&self.state, &self.vortex) {
            (Some(s), None) => FluidState::from_velocity(
                s.mass,
                s.temperature,
                s.mu,
                s.velocity,
                eb_compose(s.omega.e, s.omega.b),
            ),
            (None, Some(v)) => spinstat_core::vortex_state(v),
            (Some(_), Some(_)) => return Err(config_error("give either [state] or [vortex], not both")),
            (None, None) => return Err(config_error("the config needs a [state] or a [vortex] table")),
        };
        state.map_err(|e| config_error(e.to_string()))
    }

    /// Copy with the scan parameter set to `value`.
    pub fn with_parameter(&self, parameter: ScanParameter, value: f64) -> anyhow::Result<RunConfig> {
        let mut out = self.clone();
        match (parameter, out.state.as_mut(), out.vortex.as_mut()) {
            (ScanParameter::T, Some(s), _) => s.temperature = value,
            (ScanParameter::T, None, Some(v)) => v.t0 = value,
            (ScanParameter::Mu, Some(s), _) => s.mu = value,
            (ScanParameter::Mu, None, Some(v)) => v.mu0 = value,
            (ScanParameter::OmegaScale, Some(s), _) => {
                s.omega.e = s.omega.e.map(|x| x * value);
                s.omega.b = s.omega.b.map(|x| x * value);
            }
            (ScanParameter::OmegaScale, None, Some(v)) => v.omega0 *= value,
            (ScanParameter::Omega0OverT0, None, Some(v)) => v.omega0 = value * v.t0,
            (ScanParameter::Omega0OverT0, Some(_), _) => {
                return Err(config_error("scanning Omega0_over_T0 requires a [vortex] table"))
            }
            (_, None, None) => return Err(config_error("the config needs a [state] or a [vortex] table")),
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_toml() {
        let c: RunConfig = toml::from_str("[state]\nmass = 1.0\ntemperature = 0.2\n").unwrap();
        let s = c.fluid_state().unwrap();
        assert_eq!(s.mu(), 0.0);
        assert_eq!(c.verify.checks.len(), CHECK_NAMES.len());
        assert_eq!(c.quadrature, QuadratureSpec::default());
    }

    #[test]
    fn verify_table_mixes_checks_and_steps() {
        let c: RunConfig =
            toml::from_str("[state]\nmass = 1.0\ntemperature = 0.2\n[verify]\nchecks = [\"euler\"]\nh_xi = 1e-3\n")
                .unwrap();
        assert_eq!(c.verify.checks, vec!["euler".to_string()]);
        assert_eq!(c.verify.perturbation.h_xi, 1e-3);
    }

    #[test]
    fn unknown_fields_rejected() {
        for text in [
            "[state]\nmass = 1.0\ntemperature = 0.2\ntemprature = 1\n",
            "[state]\nmass = 1.0\ntemperature = 0.2\n[verify]\nh_xii = 1e-3\n",
            "[state]\nmass = 1.0\ntemperature = 0.2\n[quadrature]\nn_radail = 10\n",
            "[vortex]\nT0 = 0.1\nOmega0 = 0.01\nmass = 1.0\nspin = 1\n",
        ] {
            let err = toml::from_str::<RunConfig>(text).unwrap_err().to_string();
            assert!(err.contains("unknown field"), "{err}");
        }
    }

    #[test]
    fn scan_values_include_endpoints() {
        let s = ScanSpec {
            parameter: ScanParameter::T,
            lo: 0.1,
            hi: 0.3,
            steps: 3,
        };
        assert_eq!(s.values(), vec![0.1, 0.2, 0.3]);
    }

    #[test]
    fn omega_ratio_needs_vortex() {
        let c: RunConfig = toml::from_str("[state]\nmass = 1.0\ntemperature = 0.2\n").unwrap();
        assert!(c.with_parameter(ScanParameter::Omega0OverT0, 0.1).is_err());
        let v: RunConfig = toml::from_str("[vortex]\nT0 = 0.2\nOmega0 = 0.0\nmass = 1.0\n").unwrap();
        let moved = v.with_parameter(ScanParameter::Omega0OverT0, 0.1).unwrap();
        assert!((moved.vortex.unwrap().omega0 - 0.02).abs() < 1e-15);
    }
}
