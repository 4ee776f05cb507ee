//! Declarative TOML configuration for microfile layout, group definition, mask
//! plan and inverse-mapping options. All sections are optional; each command reads
//! the ones it needs.
//!
//! ```toml
//! [microfile]
//! columns = ["id", "duty", "age"]
//! identifiers = ["id"]
//! delimiter = ","
//!
//! [group]
//! vital_attributes = ["duty"]
//! vital_combinations = [["mil"]]
//! parameter_attribute = "age"
//! parameter_range = [17, 56]        # or parameter_values = ["17", "18", ...]
//!
//! [plan]
//! window_length = 20                # default ⌊N/2⌋
//! grouping = "1,2|3,4|5,6|7-20"
//! trend_subset = 1                  # 1-based, default 1
//!
//! [plan.trend]
//! mode = "explicit"                 # explicit | plateau_smooth | scale
//! file = "trend.txt"                # or values = [...]; relative to the config file
//! # cap = 124.0, half_width = 3     (plateau_smooth)
//! # factor = 1.0                    (scale)
//!
//! [apply]
//! seed = 42
//! donor_policy = "forbid"           # forbid | nearest-parameter
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::anonymity::{MaskPlan, TrendSpec};
use crate::microdata::{DonorPolicy, GroupDefinition, MicrofileConfig};
use crate::ssa::{default_window_length, Grouping};
use crate::{textio, Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub microfile: Option<MicrofileConfig>,
    pub group: Option<GroupConfig>,
    pub plan: Option<PlanConfig>,
    pub apply: Option<ApplyConfig>,
    /// Directory relative paths resolve against; set by [`ConfigFile::load`].
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

/// A categorical code written as a TOML string or integer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Code {
    Text(String),
    Int(i64),
}

impl Code {
    fn into_string(self) -> String {
        match self {
            Code::Text(s) => s,
            Code::Int(i) => i.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    pub vital_attributes: Vec<String>,
    pub vital_combinations: Vec<Vec<Code>>,
    pub parameter_attribute: String,
    #[serde(default)]
    pub parameter_values: Option<Vec<Code>>,
    /// Inclusive integer range, an alternative to `parameter_values`.
    #[serde(default)]
    pub parameter_range: Option<[i64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    pub window_length: Option<usize>,
    pub grouping: String,
    pub trend_subset: Option<usize>,
    pub trend: TrendConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrendConfig {
    pub mode: String,
    pub values: Option<Vec<f64>>,
    pub file: Option<PathBuf>,
    pub cap: Option<f64>,
    pub half_width: Option<usize>,
    pub factor: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApplyConfig {
    pub seed: Option<u64>,
    pub donor_policy: Option<DonorPolicy>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn microfile(&self) -> Result<&MicrofileConfig> {
        self.microfile
            .as_ref()
            .ok_or_else(|| Error::Config("missing [microfile] section".into()))
    }

    pub fn group_definition(&self) -> Result<GroupDefinition> {
        let g = self
            .group
            .clone()
            .ok_or_else(|| Error::Config("missing [group] section".into()))?;
        let values = match (g.parameter_values, g.parameter_range) {
            (Some(v), None) => v.into_iter().map(Code::into_string).collect(),
            (None, Some([lo, hi])) if lo <= hi => (lo..=hi).map(|v| v.to_string()).collect(),
            (None, Some([lo, hi])) => {
                return Err(Error::Config(format!(
                    "parameter_range [{lo}, {hi}] is descending"
                )))
            }
            _ => {
                return Err(Error::Config(
                    "set exactly one of parameter_values and parameter_range".into(),
                ))
            }
        };
        GroupDefinition::new(
            g.vital_attributes,
            g.vital_combinations
                .into_iter()
                .map(|c| c.into_iter().map(Code::into_string).collect())
                .collect(),
            g.parameter_attribute,
            values,
        )
    }

    /// Resolves the plan for a signal of length `n`.
    pub fn mask_plan(&self, n: usize) -> Result<MaskPlan<f64>> {
        let p = self
            .plan
            .as_ref()
            .ok_or_else(|| Error::Config("missing [plan] section".into()))?;
        let grouping: Grouping = p.grouping.parse()?;
        let trend = p.trend_subset.unwrap_or(1);
        if trend == 0 {
            return Err(Error::Config("trend_subset is 1-based".into()));
        }
        let grouping = grouping.with_trend(Some(trend - 1))?;
        let spec = self.trend_spec(&p.trend)?;
        MaskPlan::new(
            p.window_length.unwrap_or_else(|| default_window_length(n)),
            grouping,
            spec,
        )
    }

    fn trend_spec(&self, t: &TrendConfig) -> Result<TrendSpec<f64>> {
        let need = |what: &str| Error::Config(format!("trend mode {:?} needs `{what}`", t.mode));
        match t.mode.as_str() {
            "explicit" => match (&t.values, &t.file) {
                (Some(v), None) => Ok(TrendSpec::Explicit { values: v.clone() }),
                (None, Some(f)) => {
                    let path = match &self.base_dir {
                        Some(dir) if f.is_relative() => dir.join(f),
                        _ => f.clone(),
                    };
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                    Ok(TrendSpec::Explicit {
                        values: textio::read_values::<f64>(&text)?.values,
                    })
                }
                _ => Err(Error::Config(
                    "explicit trend needs exactly one of `values` and `file`".into(),
                )),
            },
            "plateau_smooth" => Ok(TrendSpec::PlateauSmooth {
                cap: t.cap.ok_or_else(|| need("cap"))?,
                half_width: t.half_width.ok_or_else(|| need("half_width"))?,
            }),
            "scale" => Ok(TrendSpec::Scale {
                factor: t.factor.ok_or_else(|| need("factor"))?,
            }),
            other => Err(Error::Config(format!("unknown trend mode {other:?}"))),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        self.apply.as_ref().and_then(|a| a.seed)
    }

    pub fn donor_policy(&self) -> Option<DonorPolicy> {
        self.apply.as_ref().and_then(|a| a.donor_policy)
    }
}
