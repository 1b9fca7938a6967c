//! Experiment description, loaded from TOML and validated before any trial runs.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::recovery::RecoveryConfig;
use crate::waveform::{Placement, SystemDims, RU_FORMATS};

/// Parameter varied across a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Snr,
    Sir,
    Sparsity,
    #[serde(alias = "r-max")]
    RMax,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Snr => "snr",
            Axis::Sir => "sir",
            Axis::Sparsity => "sparsity",
            Axis::RMax => "r_max",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Axis::Snr => "SNR (dB)",
            Axis::Sir => "SIR (dB)",
            Axis::Sparsity => "occupied subcarriers",
            Axis::RMax => "repetitions per iteration",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "snr" => Ok(Axis::Snr),
            "sir" => Ok(Axis::Sir),
            "sparsity" | "nsc" => Ok(Axis::Sparsity),
            "r_max" | "r-max" | "rmax" => Ok(Axis::RMax),
            _ => Err(Error::InvalidSpec(format!(
                "unknown axis '{s}' (expected snr, sir, sparsity or r_max)"
            ))),
        }
    }
}

/// Recovery method evaluated on every frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Proposed,
    ClassicSamp,
    Cws,
    Genie,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Proposed, Method::ClassicSamp, Method::Cws, Method::Genie];

    pub fn name(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::ClassicSamp => "classic-samp",
            Method::Cws => "cws",
            Method::Genie => "genie",
        }
    }

    pub(crate) fn tag(self) -> u64 {
        match self {
            Method::Proposed => 1,
            Method::ClassicSamp => 2,
            Method::Cws => 3,
            Method::Genie => 4,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase().replace('_', "-"))
            .ok_or_else(|| {
                Error::InvalidSpec(format!(
                    "unknown method '{s}' (expected proposed, classic-samp, cws or genie)"
                ))
            })
    }
}

/// Operating point held fixed while the axis varies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixedParams {
    pub snr_db: f64,
    pub sir_db: f64,
    pub sparsity: usize,
    pub sparsity_known: bool,
    /// Power-delay decay constant in taps; `None` means a third of the channel length.
    pub channel_decay: Option<f64>,
    pub placement: Placement,
}

impl Default for FixedParams {
    fn default() -> Self {
        Self {
            snr_db: 23.0,
            sir_db: 20.0,
            sparsity: 6,
            sparsity_known: false,
            channel_decay: None,
            placement: Placement::Circular,
        }
    }
}

fn default_trials() -> usize {
    200
}

fn default_methods() -> Vec<Method> {
    vec![Method::Proposed, Method::ClassicSamp, Method::Genie]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub axis: Axis,
    pub axis_values: Vec<f64>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub dims: SystemDims,
    #[serde(default)]
    pub fixed: FixedParams,
    #[serde(default)]
    pub recovery: RecoveryConfig,
}

/// Parameters of one axis point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointParams {
    pub axis_value: f64,
    pub snr_db: f64,
    pub sir_db: f64,
    pub sparsity: usize,
    pub r_max: usize,
}

fn as_count(x: f64) -> Option<usize> {
    (x.is_finite() && x >= 1.0 && x.fract() == 0.0 && x <= u32::MAX as f64).then_some(x as usize)
}

impl ExperimentSpec {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    /// SHA-256 of the canonical TOML form.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml_string().as_bytes()))
    }

    pub fn channel_decay(&self) -> f64 {
        self.fixed
            .channel_decay
            .unwrap_or(self.dims.cir_len as f64 / 3.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        self.dims.validate().map_err(|e| Error::InvalidSpec(e.to_string()))?;
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.methods.is_empty() {
            return bad("method set is empty".into());
        }
        let mut m = self.methods.clone();
        m.sort();
        m.dedup();
        if m.len() != self.methods.len() {
            return bad("duplicate method".into());
        }
        if self.axis_values.is_empty() {
            return bad("axis_values is empty".into());
        }
        if self.axis_values.iter().any(|x| x.is_nan()) {
            return bad("axis_values contains NaN".into());
        }
        if self.axis_values.windows(2).any(|w| w[0] >= w[1]) {
            return bad("axis_values must be strictly increasing".into());
        }
        match self.axis {
            Axis::Snr | Axis::Sir => {
                if self.axis_values.contains(&f64::NEG_INFINITY) {
                    return bad("-inf dB is not a valid operating point".into());
                }
            }
            Axis::Sparsity => {
                for &x in &self.axis_values {
                    if !as_count(x).is_some_and(|k| RU_FORMATS.contains(&k)) {
                        return bad(format!("sparsity {x} is not one of {RU_FORMATS:?}"));
                    }
                }
            }
            Axis::RMax => {
                if let Some(x) = self.axis_values.iter().find(|&&x| as_count(x).is_none()) {
                    return bad(format!("r_max value {x} is not a positive integer"));
                }
            }
        }
        if !RU_FORMATS.contains(&self.fixed.sparsity) {
            return bad(format!("fixed sparsity {} is not one of {RU_FORMATS:?}", self.fixed.sparsity));
        }
        for (name, v) in [("snr_db", self.fixed.snr_db), ("sir_db", self.fixed.sir_db)] {
            if v.is_nan() || v == f64::NEG_INFINITY {
                return bad(format!("{name} = {v}"));
            }
        }
        if let Some(d) = self.fixed.channel_decay {
            if !(d > 0.0) {
                return bad(format!("channel_decay must be positive, got {d}"));
            }
        }
        if self.methods.contains(&Method::Cws) && !self.fixed.sparsity_known {
            return bad("cws needs sparsity_known = true".into());
        }
        self.recovery
            .validate(self.dims.zp_len)
            .map_err(|e| Error::InvalidSpec(e.to_string()))?;
        Ok(())
    }

    pub fn point(&self, axis_value: f64) -> PointParams {
        let mut p = PointParams {
            axis_value,
            snr_db: self.fixed.snr_db,
            sir_db: self.fixed.sir_db,
            sparsity: self.fixed.sparsity,
            r_max: self.recovery.r_max,
        };
        match self.axis {
            Axis::Snr => p.snr_db = axis_value,
            Axis::Sir => p.sir_db = axis_value,
            Axis::Sparsity => p.sparsity = axis_value as usize,
            Axis::RMax => p.r_max = axis_value as usize,
        }
        p
    }
}
