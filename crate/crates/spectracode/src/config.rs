//! Experiment configuration: JSON-serializable, fully optional fields so a
//! config file and command-line overrides compose, with validation deferred
//! to the runner.

use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use spectracode_core::codes::LinearCode;
use spectracode_core::error::{Error, Result};
use spectracode_core::reference::BaselineKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Esd,
    Moments,
    Sweep,
    DualDistance,
    Reference,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Esd => "esd",
            ExperimentKind::Moments => "moments",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::DualDistance => "dual-distance",
            ExperimentKind::Reference => "reference",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "esd" => Ok(ExperimentKind::Esd),
            "moments" => Ok(ExperimentKind::Moments),
            "sweep" => Ok(ExperimentKind::Sweep),
            "dual-distance" => Ok(ExperimentKind::DualDistance),
            "reference" => Ok(ExperimentKind::Reference),
            other => Err(Error::usage(format!(
                "unknown experiment kind '{other}' (expected esd, moments, sweep, dual-distance, or reference)"
            ))),
        }
    }
}

/// Which code family to build, with its parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum CodeDescriptor {
    Gold {
        m: u32,
        #[serde(default = "default_k0")]
        k0: u32,
    },
    Simplex {
        m: u32,
    },
    EvenWeight {
        n: usize,
    },
    Random {
        n: usize,
        k: usize,
        q: u64,
        seed: u64,
    },
}

fn default_k0() -> u32 {
    1
}

impl CodeDescriptor {
    pub fn build(&self) -> Result<LinearCode> {
        match *self {
            CodeDescriptor::Gold { m, k0 } => LinearCode::gold(m, k0),
            CodeDescriptor::Simplex { m } => LinearCode::simplex(m),
            CodeDescriptor::EvenWeight { n } => LinearCode::even_weight(n),
            CodeDescriptor::Random { n, k, q, seed } => LinearCode::random(n, k, q, seed),
        }
    }

    /// The same family at a different size, for sweeps.
    pub fn at_m(&self, m: u32) -> Result<CodeDescriptor> {
        match *self {
            CodeDescriptor::Gold { k0, .. } => Ok(CodeDescriptor::Gold { m, k0 }),
            CodeDescriptor::Simplex { .. } => Ok(CodeDescriptor::Simplex { m }),
            _ => Err(Error::usage("sweeps support only the gold and simplex families")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<ExperimentKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub code_a: Option<CodeDescriptor>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub code_b: Option<CodeDescriptor>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_a: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_b: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_max: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<bool>,
    /// Sweep sizes: m values for the chosen family (n = 2^m - 1).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_m: Option<Vec<u32>>,
    /// rademacher | complex_gaussian
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_big: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_trials: Option<u64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::usage(format!("config parse error: {e}")))
    }

    /// Overlay: fields set in `over` win.
    pub fn merged_with(&self, over: &ExperimentConfig) -> ExperimentConfig {
        macro_rules! pick {
            ($f:ident) => {
                over.$f.clone().or_else(|| self.$f.clone())
            };
        }
        ExperimentConfig {
            kind: pick!(kind),
            code_a: pick!(code_a),
            code_b: pick!(code_b),
            n_a: pick!(n_a),
            n_b: pick!(n_b),
            y_a: pick!(y_a),
            y_b: pick!(y_b),
            trials: pick!(trials),
            l_max: pick!(l_max),
            seed: pick!(seed),
            out: pick!(out),
            oracle: pick!(oracle),
            sweep_m: pick!(sweep_m),
            baseline: pick!(baseline),
            n_big: pick!(n_big),
            reference_trials: pick!(reference_trials),
        }
    }

    pub fn baseline_kind(&self) -> Result<BaselineKind> {
        match self.baseline.as_deref() {
            None | Some("rademacher") => Ok(BaselineKind::Rademacher),
            Some("complex_gaussian") => Ok(BaselineKind::ComplexGaussian),
            Some(other) => Err(Error::usage(format!(
                "unknown baseline '{other}' (expected rademacher or complex_gaussian)"
            ))),
        }
    }

    pub fn seed_or_default(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    pub fn require_code_a(&self) -> Result<&CodeDescriptor> {
        self.code_a
            .as_ref()
            .ok_or_else(|| Error::usage("config field 'code_a' is required for this experiment"))
    }

    /// Side sizes: explicit N wins, otherwise N = round(n / y).
    pub fn resolve_sizes(&self, n: usize) -> Result<(usize, usize)> {
        let one = |explicit: Option<usize>, y: Option<f64>, name: &str| -> Result<usize> {
            if let Some(v) = explicit {
                if v == 0 {
                    return Err(Error::usage(format!("config field '{name}' must be positive")));
                }
                return Ok(v);
            }
            match y {
                Some(y) if y > 0.0 => {
                    let v = (n as f64 / y).round() as usize;
                    if v == 0 {
                        return Err(Error::usage(format!("aspect ratio for '{name}' rounds to size 0")));
                    }
                    Ok(v)
                }
                Some(_) => Err(Error::usage("aspect ratios must be positive")),
                None => Err(Error::usage(format!(
                    "config needs either '{name}' or the matching aspect ratio"
                ))),
            }
        };
        Ok((
            one(self.n_a, self.y_a, "n_a")?,
            one(self.n_b, self.y_b, "n_b")?,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_round_trip() {
        for s in ["esd", "moments", "sweep", "dual-distance", "reference"] {
            assert_eq!(ExperimentKind::from_str(s).unwrap().as_str(), s);
        }
        assert!(ExperimentKind::from_str("spectra").is_err());
    }

    #[test]
    fn code_descriptor_json() {
        let d: CodeDescriptor = serde_json::from_str(r#"{"family":"gold","m":5}"#).unwrap();
        assert_eq!(d, CodeDescriptor::Gold { m: 5, k0: 1 });
        let code = d.build().unwrap();
        assert_eq!((code.length(), code.dimension()), (31, 10));
        let d2: CodeDescriptor = serde_json::from_str(r#"{"family":"even_weight","n":5}"#).unwrap();
        assert_eq!(d2.build().unwrap().length(), 5);
    }

    #[test]
    fn merge_prefers_override() {
        let base = ExperimentConfig {
            seed: Some(3),
            trials: Some(10),
            ..Default::default()
        };
        let over = ExperimentConfig { seed: Some(9), ..Default::default() };
        let merged = base.merged_with(&over);
        assert_eq!(merged.seed, Some(9));
        assert_eq!(merged.trials, Some(10));
    }

    #[test]
    fn sizes_from_aspect_ratio() {
        let cfg = ExperimentConfig {
            y_a: Some(0.5),
            y_b: Some(0.5),
            ..Default::default()
        };
        assert_eq!(cfg.resolve_sizes(31).unwrap(), (62, 62));
        let explicit = ExperimentConfig {
            n_a: Some(10),
            y_a: Some(0.5),
            y_b: Some(1.0),
            ..Default::default()
        };
        assert_eq!(explicit.resolve_sizes(31).unwrap(), (10, 31));
    }

    #[test]
    fn unknown_field_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"tirals": 5}"#).is_err());
    }
}
