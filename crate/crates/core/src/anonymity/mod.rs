//! Trend-replacement masking of quantity signals, with extremum detection and a
//! utility report comparing the decompositions before and after.

mod trend;
mod utility;

pub use trend::{generate_replacement_trend, TrendSpec};
pub use utility::{evaluate_utility, ComponentUtility, SpectrumEntry, TrendDelta, UtilityReport};

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::microdata::QuantitySignal;
use crate::ssa::{decompose_series, reconstruct, ComponentSet, Grouping, SpectralDecomposition};
use crate::{Error, Result, Scalar, Series};

/// Window length, grouping with a designated trend subset, and the replacement trend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MaskPlan<T> {
    window_length: usize,
    grouping: Grouping,
    replacement_trend: TrendSpec<T>,
}

impl<T: Scalar> MaskPlan<T> {
    pub fn new(
        window_length: usize,
        grouping: Grouping,
        replacement_trend: TrendSpec<T>,
    ) -> Result<Self> {
        if grouping.trend_subset().is_none() {
            return Err(Error::grouping("mask plan needs a trend subset", vec![]));
        }
        replacement_trend.validate()?;
        Ok(Self {
            window_length,
            grouping,
            replacement_trend,
        })
    }

    pub fn window_length(&self) -> usize {
        self.window_length
    }

    pub fn grouping(&self) -> &Grouping {
        &self.grouping
    }

    pub fn replacement_trend(&self) -> &TrendSpec<T> {
        &self.replacement_trend
    }

    /// Position of the trend subset within the grouping.
    pub fn trend_position(&self) -> usize {
        self.grouping
            .trend_subset()
            .expect("validated at construction")
    }
}

/// An element whose masked value would have rounded below zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClampEvent {
    /// 1-based.
    pub position: usize,
    pub unrounded: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MaskDiagnostics {
    pub clamped: Vec<ClampEvent>,
}

impl MaskDiagnostics {
    /// Structured `key=value` lines.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "clamp_count={}", self.clamped.len());
        for c in &self.clamped {
            let _ = writeln!(
                out,
                "clamp position={} unrounded={}",
                c.position, c.unrounded
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskOutcome<T> {
    pub masked: QuantitySignal,
    /// Components of the original signal under the plan's grouping.
    pub components: ComponentSet<T>,
    pub replacement_trend: Series<T>,
    /// `signal − trend + replacement` before rounding and clamping.
    pub unrounded: Vec<T>,
    pub diagnostics: MaskDiagnostics,
}

/// Replaces the trend component and rounds: `round(q − trend + replacement)`, half
/// away from zero, with negatives clamped to zero and reported.
///
/// A cached decomposition is used when its window and length match the signal.
pub fn mask_signal<T: Scalar>(
    signal: &QuantitySignal,
    plan: &MaskPlan<T>,
    cache: Option<&SpectralDecomposition<T>>,
) -> Result<MaskOutcome<T>> {
    let series: Series<T> = signal.to_series()?;
    let computed;
    let decomposition = match cache {
        Some(dec) => {
            if dec.window_length() != plan.window_length || dec.series_len() != series.len() {
                return Err(Error::param(format!(
                    "cached decomposition is for L = {}, N = {}; plan needs L = {}, N = {}",
                    dec.window_length(),
                    dec.series_len(),
                    plan.window_length,
                    series.len()
                )));
            }
            dec
        }
        None => {
            computed = decompose_series(&series, plan.window_length)?;
            &computed
        }
    };
    let components = reconstruct(decomposition, &plan.grouping)?;
    let trend = &components.components()[plan.trend_position()];
    let replacement = generate_replacement_trend(trend, &plan.replacement_trend)?;

    let unrounded: Vec<T> = series
        .values()
        .iter()
        .zip(trend.values())
        .zip(replacement.values())
        .map(|((&q, &t), &r)| q - t + r)
        .collect();

    let mut diagnostics = MaskDiagnostics::default();
    let counts = unrounded
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let r = v.round();
            if r < T::zero() {
                diagnostics.clamped.push(ClampEvent {
                    position: i + 1,
                    unrounded: v.to_f64().unwrap_or(f64::NAN),
                });
                0
            } else {
                r.to_u64().unwrap_or(u64::MAX)
            }
        })
        .collect();

    Ok(MaskOutcome {
        masked: signal.with_counts(counts)?,
        components,
        replacement_trend: replacement,
        unrounded,
        diagnostics,
    })
}

/// The `top_k` largest values as `(1-based position, value)`, descending by value,
/// ties by position.
pub fn detect_extremes(signal: &QuantitySignal, top_k: usize) -> Vec<(usize, u64)> {
    let mut ranked: Vec<(usize, u64)> = signal
        .counts()
        .iter()
        .enumerate()
        .map(|(i, &v)| (i + 1, v))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(top_k);
    ranked
}
