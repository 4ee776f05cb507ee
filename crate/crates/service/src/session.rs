//! One analyst session: a signal, the chosen window, grouping and replacement
//! trend, and the cached decomposition and preview derived from them.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use ssamask_core::anonymity::{mask_signal, MaskPlan, TrendSpec};
use ssamask_core::config::ConfigFile;
use ssamask_core::microdata::{
    apply_modified_signal, build_quantity_signal, load_microfile, DonorPolicy, GroupDefinition,
    Microfile, MicrofileConfig, QuantitySignal,
};
use ssamask_core::ssa::{
    advise_grouping, decompose_series, default_window_length, reconstruct, Advisory, Grouping,
};
use ssamask_core::{
    Decomposition64, MaskOutcome64, MaskPlan64, Series64, TrendSpec64, MIN_SERIES_LEN,
};

use crate::error::{ServiceError, ServiceResult};
use crate::report::{build_report, masked_signal_text, report_json, MaskReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Loaded,
    Decomposed,
    Grouped,
    Previewed,
    Exported,
}

/// Where a new session's signal comes from.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalSource {
    /// Non-negative integer counts.
    Inline {
        values: Vec<f64>,
        #[serde(default)]
        label: Option<String>,
        #[serde(default)]
        parameter_labels: Option<Vec<String>>,
    },
    /// A microfile plus a config with `[microfile]` and `[group]` sections, each
    /// given inline or as a path on the service host.
    Microfile {
        #[serde(default)]
        config: Option<String>,
        #[serde(default)]
        config_path: Option<PathBuf>,
        #[serde(default)]
        microfile_csv: Option<String>,
        #[serde(default)]
        microfile_path: Option<PathBuf>,
    },
}

/// Grouping given either in the `1,2|3-5` grammar or as explicit index lists.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SubsetsInput {
    Text(String),
    Lists(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Change {
    /// Omitting the window keeps the current one, ⌊N/2⌋ for a new session.
    SetWindow {
        #[serde(default)]
        window_length: Option<usize>,
    },
    SetGrouping {
        subsets: SubsetsInput,
        /// 1-based position of the trend subset, default 1.
        #[serde(default)]
        trend_subset: Option<usize>,
    },
    SetTrend {
        trend: TrendSpec64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViewRequest {
    Spectrum,
    /// 1-based.
    Eigenvector(usize),
    Components,
    Advisory {
        pair_tolerance: f64,
        noise_floor: f64,
    },
    Preview,
}

pub const DEFAULT_PAIR_TOLERANCE: f64 = 0.1;
pub const DEFAULT_NOISE_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "what", rename_all = "snake_case")]
pub enum ExportRequest {
    MaskedSignal,
    /// Seed and donor policy fall back to the `[apply]` section of the session's config.
    ModifiedMicrofile {
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        donor_policy: Option<DonorPolicy>,
    },
    Report,
    /// Writes the session parameters (not the microfile rows) as JSON to `path`.
    Snapshot {
        path: PathBuf,
    },
}

/// Summary returned by create and update.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionView {
    pub id: String,
    pub revision: u64,
    pub stage: Stage,
    pub label: String,
    pub series_len: usize,
    pub window_length: usize,
    pub rank: Option<usize>,
    pub grouping: Option<String>,
    pub trend_subset: Option<usize>,
    pub trend: Option<TrendSpec64>,
    pub has_microfile: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentView {
    /// 1-based.
    pub subset: usize,
    pub indices: Vec<usize>,
    pub label: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "view", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum View {
    Spectrum {
        revision: u64,
        window_length: usize,
        rank: usize,
        singular_values: Vec<f64>,
        eigenvalues: Vec<f64>,
    },
    Eigenvector {
        revision: u64,
        index: usize,
        singular_value: f64,
        left_vector: Vec<f64>,
        factor_vector: Vec<f64>,
        /// The series reconstructed from this eigentriple alone.
        reconstruction: Vec<f64>,
    },
    Components {
        revision: u64,
        grouping: String,
        trend_subset: usize,
        components: Vec<ComponentView>,
    },
    Advisory {
        revision: u64,
        pair_tolerance: f64,
        noise_floor: f64,
        #[serde(flatten)]
        advisory: Advisory,
    },
    Preview {
        revision: u64,
        extracted_trend: Vec<f64>,
        replacement_trend: Vec<f64>,
        unrounded: Vec<f64>,
        report: MaskReport,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exported {
    pub revision: u64,
    pub what: &'static str,
    pub file_name: String,
    pub media_type: &'static str,
    pub content: String,
}

/// Session parameters as written by a snapshot export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub id: String,
    pub revision: u64,
    pub stage: Stage,
    pub label: String,
    pub counts: Vec<u64>,
    pub parameter_labels: Vec<String>,
    pub window_length: usize,
    pub grouping: Option<String>,
    pub trend_subset: Option<usize>,
    pub trend: Option<TrendSpec64>,
}

#[derive(Debug, Clone)]
struct Backing {
    microfile: Microfile,
    group: GroupDefinition,
    delimiter: char,
    seed: Option<u64>,
    donor_policy: Option<DonorPolicy>,
}

#[derive(Debug, Clone)]
struct Preview {
    outcome: MaskOutcome64,
    report: MaskReport,
}

#[derive(Debug, Clone)]
pub struct Session {
    id: String,
    revision: u64,
    stage: Stage,
    signal: QuantitySignal,
    backing: Option<Backing>,
    window_length: usize,
    decomposition: Option<Decomposition64>,
    grouping: Option<Grouping>,
    trend: Option<TrendSpec64>,
    preview: Option<Preview>,
}

impl Session {
    pub fn create(id: String, source: SignalSource) -> ServiceResult<Self> {
        let (signal, backing) = match source {
            SignalSource::Inline {
                values,
                label,
                parameter_labels,
            } => {
                let label = label.unwrap_or_else(|| "signal".into());
                let signal =
                    QuantitySignal::from_values(&values, label.clone()).map_err(load_error)?;
                let signal = match parameter_labels {
                    Some(p) => QuantitySignal::new(signal.counts().to_vec(), p, label)
                        .map_err(load_error)?,
                    None => signal,
                };
                (signal, None)
            }
            SignalSource::Microfile {
                config,
                config_path,
                microfile_csv,
                microfile_path,
            } => {
                let cfg = match (config, config_path) {
                    (Some(text), None) => ConfigFile::parse(&text),
                    (None, Some(path)) => ConfigFile::load(&path),
                    _ => {
                        return Err(ServiceError::Load(
                            "give exactly one of config and config_path".into(),
                        ))
                    }
                }
                .map_err(load_error)?;
                let layout: MicrofileConfig = cfg.microfile().map_err(load_error)?.clone();
                let group = cfg.group_definition().map_err(load_error)?;
                let microfile = match (microfile_csv, microfile_path) {
                    (Some(text), None) => load_microfile(text.as_bytes(), &layout),
                    (None, Some(path)) => {
                        let file = std::fs::File::open(&path)
                            .map_err(|e| ServiceError::Load(format!("{}: {e}", path.display())))?;
                        load_microfile(file, &layout)
                    }
                    _ => {
                        return Err(ServiceError::Load(
                            "give exactly one of microfile_csv and microfile_path".into(),
                        ))
                    }
                }
                .map_err(load_error)?;
                let signal = build_quantity_signal(&microfile, &group).map_err(load_error)?;
                let backing = Backing {
                    microfile,
                    group,
                    delimiter: layout.delimiter,
                    seed: cfg.seed(),
                    donor_policy: cfg.donor_policy(),
                };
                (signal, Some(backing))
            }
        };
        if signal.len() < MIN_SERIES_LEN {
            return Err(ServiceError::Load(format!(
                "signal has {} values, at least {MIN_SERIES_LEN} are needed",
                signal.len()
            )));
        }
        Ok(Self {
            id,
            revision: 1,
            stage: Stage::Loaded,
            window_length: default_window_length(signal.len()),
            signal,
            backing,
            decomposition: None,
            grouping: None,
            trend: None,
            preview: None,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn signal(&self) -> &QuantitySignal {
        &self.signal
    }

    pub fn summary(&self) -> SessionView {
        SessionView {
            id: self.id.clone(),
            revision: self.revision,
            stage: self.stage,
            label: self.signal.label().to_string(),
            series_len: self.signal.len(),
            window_length: self.window_length,
            rank: self.decomposition.as_ref().map(|d| d.rank()),
            grouping: self.grouping.as_ref().map(|g| g.to_string()),
            trend_subset: self
                .grouping
                .as_ref()
                .and_then(|g| g.trend_subset())
                .map(|t| t + 1),
            trend: self.trend.clone(),
            has_microfile: self.backing.is_some(),
        }
    }

    /// Applies one change. On error the session is left as it was.
    pub fn apply(&mut self, base_revision: u64, change: Change) -> ServiceResult<()> {
        if base_revision != self.revision {
            return Err(ServiceError::StaleRevision {
                current: self.revision,
                base: base_revision,
            });
        }
        match change {
            Change::SetWindow { window_length } => {
                let l = window_length.unwrap_or(self.window_length);
                let series: Series64 = self.signal.to_series()?;
                self.decomposition = Some(decompose_series(&series, l)?);
                self.window_length = l;
                self.grouping = None;
                self.trend = None;
                self.preview = None;
                self.stage = Stage::Decomposed;
            }
            Change::SetGrouping {
                subsets,
                trend_subset,
            } => {
                let dec = self.require_decomposition()?;
                let grouping = match subsets {
                    SubsetsInput::Text(text) => text.parse::<Grouping>()?,
                    SubsetsInput::Lists(lists) => Grouping::new(lists, None)?,
                };
                let trend = trend_subset.unwrap_or(1);
                if trend == 0 {
                    return Err(ServiceError::BadRequest("trend_subset is 1-based".into()));
                }
                let grouping = grouping.with_trend(Some(trend - 1))?;
                grouping.validate(dec.rank())?;
                self.grouping = Some(grouping);
                self.preview = None;
                self.stage = Stage::Grouped;
            }
            Change::SetTrend { trend } => {
                self.require_decomposition()?;
                trend.validate()?;
                if let TrendSpec::Explicit { values } = &trend {
                    if values.len() != self.signal.len() {
                        return Err(ssamask_core::Error::Parameter(format!(
                            "explicit trend has {} values, the signal has {}",
                            values.len(),
                            self.signal.len()
                        ))
                        .into());
                    }
                }
                self.trend = Some(trend);
                self.preview = None;
                if self.stage > Stage::Grouped {
                    self.stage = Stage::Grouped;
                }
            }
        }
        self.revision += 1;
        Ok(())
    }

    /// Whether [`Session::view`] can answer `request` without computing a preview.
    pub fn can_view_readonly(&self, request: &ViewRequest) -> bool {
        *request != ViewRequest::Preview || self.preview.is_some()
    }

    /// Answers a view from cached state. Panics if a preview is requested but
    /// not cached; call [`Session::ensure_preview`] first.
    pub fn view(&self, request: &ViewRequest) -> ServiceResult<View> {
        let revision = self.revision;
        Ok(match *request {
            ViewRequest::Spectrum => {
                let dec = self.require_decomposition()?;
                View::Spectrum {
                    revision,
                    window_length: dec.window_length(),
                    rank: dec.rank(),
                    singular_values: dec.singular_values(),
                    eigenvalues: dec.eigenvalues().to_vec(),
                }
            }
            ViewRequest::Eigenvector(index) => {
                let dec = self.require_decomposition()?;
                let (Some(u), Some(v)) = (dec.left_vector(index), dec.factor_vector(index)) else {
                    return Err(ssamask_core::Error::Parameter(format!(
                        "eigenvector index {index} is outside 1..={}",
                        dec.rank()
                    ))
                    .into());
                };
                let single = reconstruct(dec, &Grouping::new(vec![vec![index]], None)?)?;
                View::Eigenvector {
                    revision,
                    index,
                    singular_value: dec.eigenvalues()[index - 1].sqrt(),
                    left_vector: u.to_vec(),
                    factor_vector: v.to_vec(),
                    reconstruction: single.components()[0].values().to_vec(),
                }
            }
            ViewRequest::Components => {
                let dec = self.require_decomposition()?;
                let grouping = self.require_grouping()?;
                let set = reconstruct(dec, grouping)?;
                View::Components {
                    revision,
                    grouping: grouping.to_string(),
                    trend_subset: grouping.trend_subset().map_or(1, |t| t + 1),
                    components: set
                        .components()
                        .iter()
                        .zip(set.labels())
                        .zip(grouping.subsets())
                        .enumerate()
                        .map(|(k, ((c, label), indices))| ComponentView {
                            subset: k + 1,
                            indices: indices.clone(),
                            label: label.clone(),
                            values: c.values().to_vec(),
                        })
                        .collect(),
                }
            }
            ViewRequest::Advisory {
                pair_tolerance,
                noise_floor,
            } => View::Advisory {
                revision,
                pair_tolerance,
                noise_floor,
                advisory: advise_grouping(
                    self.require_decomposition()?,
                    pair_tolerance,
                    noise_floor,
                ),
            },
            ViewRequest::Preview => {
                let preview = self
                    .preview
                    .as_ref()
                    .expect("preview computed before viewing");
                View::Preview {
                    revision,
                    extracted_trend: preview
                        .outcome
                        .components
                        .trend()
                        .expect("plan has a trend")
                        .values()
                        .to_vec(),
                    replacement_trend: preview.outcome.replacement_trend.values().to_vec(),
                    unrounded: preview.outcome.unrounded.clone(),
                    report: preview.report.clone(),
                }
            }
        })
    }

    /// Computes and caches the preview if needed; moves `grouped` to `previewed`.
    pub fn ensure_preview(&mut self) -> ServiceResult<()> {
        if self.preview.is_some() {
            return Ok(());
        }
        let plan = self.plan()?;
        let outcome = mask_signal(&self.signal, &plan, self.decomposition.as_ref())?;
        let report = build_report(&self.signal, &plan, &outcome)?;
        self.preview = Some(Preview { outcome, report });
        if self.stage < Stage::Previewed {
            self.stage = Stage::Previewed;
        }
        Ok(())
    }

    /// The plan the current settings describe.
    pub fn plan(&self) -> ServiceResult<MaskPlan64> {
        self.require_decomposition()?;
        let grouping = self.require_grouping()?.clone();
        let trend = self
            .trend
            .clone()
            .ok_or_else(|| ServiceError::State("set a replacement trend first".into()))?;
        Ok(MaskPlan::new(self.window_length, grouping, trend)?)
    }

    pub fn export(&mut self, request: &ExportRequest) -> ServiceResult<Exported> {
        if let ExportRequest::Snapshot { path } = request {
            let mut content =
                serde_json::to_string_pretty(&self.snapshot()).expect("snapshot serializes");
            content.push('\n');
            std::fs::write(path, &content)
                .map_err(|e| ServiceError::Io(format!("{}: {e}", path.display())))?;
            return Ok(Exported {
                revision: self.revision,
                what: "snapshot",
                file_name: path.display().to_string(),
                media_type: "application/json",
                content,
            });
        }
        let preview = self.preview.as_ref().ok_or_else(|| {
            ServiceError::State("request the preview view before exporting".into())
        })?;
        let exported = match request {
            ExportRequest::MaskedSignal => Exported {
                revision: self.revision,
                what: "masked_signal",
                file_name: "masked.txt".into(),
                media_type: "text/plain",
                content: masked_signal_text(&preview.outcome),
            },
            ExportRequest::Report => Exported {
                revision: self.revision,
                what: "report",
                file_name: "report.json".into(),
                media_type: "application/json",
                content: report_json(&preview.report),
            },
            ExportRequest::ModifiedMicrofile { seed, donor_policy } => {
                let backing = self.backing.as_ref().ok_or_else(|| {
                    ServiceError::State("session has no backing microfile".into())
                })?;
                let seed = seed.or(backing.seed).ok_or_else(|| {
                    ServiceError::BadRequest("microfile export needs a seed".into())
                })?;
                let policy = donor_policy.or(backing.donor_policy).unwrap_or_default();
                let modified = apply_modified_signal(
                    &backing.microfile,
                    &backing.group,
                    &preview.outcome.masked,
                    seed,
                    policy,
                )?;
                Exported {
                    revision: self.revision,
                    what: "modified_microfile",
                    file_name: "microfile.csv".into(),
                    media_type: "text/csv",
                    content: modified.to_delimited(backing.delimiter)?,
                }
            }
            ExportRequest::Snapshot { .. } => unreachable!("handled above"),
        };
        self.stage = Stage::Exported;
        Ok(exported)
    }

    pub fn snapshot(&self) -> Snapshot {
        let view = self.summary();
        Snapshot {
            id: view.id,
            revision: view.revision,
            stage: view.stage,
            label: view.label,
            counts: self.signal.counts().to_vec(),
            parameter_labels: self.signal.parameter_labels().to_vec(),
            window_length: view.window_length,
            grouping: view.grouping,
            trend_subset: view.trend_subset,
            trend: view.trend,
        }
    }

    fn require_decomposition(&self) -> ServiceResult<&Decomposition64> {
        self.decomposition
            .as_ref()
            .ok_or_else(|| ServiceError::State("decompose first: set a window length".into()))
    }

    fn require_grouping(&self) -> ServiceResult<&Grouping> {
        self.grouping
            .as_ref()
            .ok_or_else(|| ServiceError::State("set a grouping first".into()))
    }
}

fn load_error(e: ssamask_core::Error) -> ServiceError {
    ServiceError::Load(e.to_string())
}
