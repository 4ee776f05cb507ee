//! Serialized outputs shared by the session exports and the batch CLI, so both
//! produce the same bytes for the same inputs.

use serde::{Deserialize, Serialize};
use ssamask_core::anonymity::{detect_extremes, evaluate_utility, MaskDiagnostics};
use ssamask_core::microdata::QuantitySignal;
use ssamask_core::{textio, MaskOutcome64, MaskPlan64, Result, TrendSpec64, UtilityReport64};

pub const MASKED_PROVENANCE: &str = "masked by trend replacement";

/// How many extremes the report lists for each signal.
pub const REPORT_EXTREMES: usize = 5;

/// Audit record of one masking run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskReport {
    pub label: String,
    pub series_len: usize,
    pub window_length: usize,
    pub grouping: String,
    /// 1-based.
    pub trend_subset: usize,
    pub trend: TrendSpec64,
    pub masked: Vec<u64>,
    pub diagnostics: MaskDiagnostics,
    /// `(1-based position, value)`, largest first.
    pub extremes_before: Vec<(usize, u64)>,
    pub extremes_after: Vec<(usize, u64)>,
    pub utility: UtilityReport64,
}

pub fn build_report(
    signal: &QuantitySignal,
    plan: &MaskPlan64,
    outcome: &MaskOutcome64,
) -> Result<MaskReport> {
    Ok(MaskReport {
        label: signal.label().to_string(),
        series_len: signal.len(),
        window_length: plan.window_length(),
        grouping: plan.grouping().to_string(),
        trend_subset: plan.trend_position() + 1,
        trend: plan.replacement_trend().clone(),
        masked: outcome.masked.counts().to_vec(),
        diagnostics: outcome.diagnostics.clone(),
        extremes_before: detect_extremes(signal, REPORT_EXTREMES),
        extremes_after: detect_extremes(&outcome.masked, REPORT_EXTREMES),
        utility: evaluate_utility(signal, &outcome.masked, plan)?,
    })
}

pub fn report_json(report: &MaskReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

/// The masked signal in the columnar text format.
pub fn masked_signal_text(outcome: &MaskOutcome64) -> String {
    let values: Vec<f64> = outcome.masked.counts().iter().map(|&c| c as f64).collect();
    textio::write_values(outcome.masked.label(), &values, MASKED_PROVENANCE)
}
