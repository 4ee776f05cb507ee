use serde::{Deserialize, Serialize};

use super::MaskPlan;
use crate::matrix::Matrix;
use crate::microdata::QuantitySignal;
use crate::ssa::diagonal_average;
use crate::ssa::{decompose_series, estimate_period, SpectralDecomposition};
use crate::{Error, Result, Scalar, Series};

/// Before/after comparison of one non-trend subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ComponentUtility<T> {
    /// 1-based position of the subset in the grouping.
    pub subset: usize,
    pub indices: Vec<usize>,
    pub period_before: Option<T>,
    pub period_after: Option<T>,
    /// `max |after| / max |before|`; `None` when the original component is zero.
    pub amplitude_ratio: Option<T>,
    /// Lag (in samples) maximizing the cross-correlation of after against before.
    pub phase_shift: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TrendDelta<T> {
    pub max_abs_change: T,
    /// `max_abs_change / max |trend before|`; `None` for a zero original trend.
    pub max_rel_change: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SpectrumEntry<T> {
    pub index: usize,
    pub before: T,
    pub after: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct UtilityReport<T> {
    pub components: Vec<ComponentUtility<T>>,
    pub trend: TrendDelta<T>,
    pub spectrum: Vec<SpectrumEntry<T>>,
    pub diagnostics: Vec<String>,
}

/// Decomposes both signals under the plan's window and grouping and compares
/// every non-trend component. Reports only; applies no thresholds.
pub fn evaluate_utility<T: Scalar>(
    original: &QuantitySignal,
    masked: &QuantitySignal,
    plan: &MaskPlan<T>,
) -> Result<UtilityReport<T>> {
    if original.len() != masked.len() {
        return Err(Error::param(format!(
            "signals differ in length: {} vs {}",
            original.len(),
            masked.len()
        )));
    }
    let before_series: Series<T> = original.to_series()?;
    let after_series: Series<T> = masked.to_series()?;
    let before = decompose_series(&before_series, plan.window_length())?;
    let after = decompose_series(&after_series, plan.window_length())?;
    plan.grouping().validate(before.rank())?;

    let mut diagnostics = Vec::new();
    let comps_before = lenient_components(&before, plan, "original", &mut diagnostics)?;
    let comps_after = lenient_components(&after, plan, "masked", &mut diagnostics)?;

    let trend_pos = plan.trend_position();
    let mut components = Vec::new();
    for (pos, subset) in plan.grouping().subsets().iter().enumerate() {
        if pos == trend_pos {
            continue;
        }
        let (b, a) = (&comps_before[pos], &comps_after[pos]);
        let peak_b = peak(b);
        let peak_a = peak(a);
        let amplitude_ratio = if peak_b > T::zero() {
            Some(peak_a / peak_b)
        } else {
            diagnostics.push(format!(
                "degenerate: original component {} is zero",
                pos + 1
            ));
            None
        };
        if peak_a == T::zero() {
            diagnostics.push(format!("degenerate: masked component {} is zero", pos + 1));
        }
        components.push(ComponentUtility {
            subset: pos + 1,
            indices: subset.clone(),
            period_before: period_of(b),
            period_after: period_of(a),
            amplitude_ratio,
            phase_shift: best_lag(b, a),
        });
    }

    let (tb, ta) = (&comps_before[trend_pos], &comps_after[trend_pos]);
    let max_abs_change = tb
        .iter()
        .zip(ta)
        .map(|(&x, &y)| (y - x).abs())
        .fold(T::zero(), T::max);
    let trend_peak = peak(tb);
    let trend = TrendDelta {
        max_abs_change,
        max_rel_change: (trend_peak > T::zero()).then(|| max_abs_change / trend_peak),
    };

    let spectrum = before
        .singular_values()
        .into_iter()
        .zip(after.singular_values())
        .enumerate()
        .map(|(i, (b, a))| SpectrumEntry {
            index: i + 1,
            before: b,
            after: a,
        })
        .collect();

    Ok(UtilityReport {
        components,
        trend,
        spectrum,
        diagnostics,
    })
}

/// Reconstructs each subset from the indices that exist at this rank; missing
/// indices are reported and contribute nothing.
fn lenient_components<T: Scalar>(
    dec: &SpectralDecomposition<T>,
    plan: &MaskPlan<T>,
    which: &str,
    diagnostics: &mut Vec<String>,
) -> Result<Vec<Vec<T>>> {
    let n = dec.series_len();
    let mut out = Vec::new();
    for (pos, subset) in plan.grouping().subsets().iter().enumerate() {
        let present: Vec<usize> = subset
            .iter()
            .copied()
            .filter(|&i| i <= dec.rank())
            .collect();
        if present.len() < subset.len() {
            diagnostics.push(format!(
                "degenerate: {which} signal has rank {}; subset {} loses indices {:?}",
                dec.rank(),
                pos + 1,
                subset
                    .iter()
                    .filter(|&&i| i > dec.rank())
                    .collect::<Vec<_>>()
            ));
        }
        let mut acc = Matrix::zeros(dec.window_length(), dec.lag_count());
        for &i in &present {
            acc.add_assign(&dec.elementary_matrix(i).expect("index within rank"));
        }
        let series = if n >= crate::series::MIN_SERIES_LEN {
            diagonal_average(&acc)?.into_values()
        } else {
            vec![T::zero(); n]
        };
        out.push(series);
    }
    Ok(out)
}

fn peak<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

fn period_of<T: Scalar>(v: &[T]) -> Option<T> {
    Series::new(v.to_vec(), "")
        .ok()
        .and_then(|s| estimate_period(&s))
}

/// Lag τ in `(−N/2, N/2]` maximizing `Σ_t before_t · after_{t+τ}`; ties go to the
/// smallest `|τ|`, then the positive lag.
fn best_lag<T: Scalar>(before: &[T], after: &[T]) -> i64 {
    let n = before.len() as i64;
    let mut best = (T::neg_infinity(), 0i64);
    let mut lags: Vec<i64> = (-(n - 1) / 2..=n / 2).collect();
    lags.sort_by_key(|&l| (l.abs(), -l));
    for lag in lags {
        let c: T = (0..n)
            .filter_map(|t| {
                let u = t + lag;
                (0..n)
                    .contains(&u)
                    .then(|| before[t as usize] * after[u as usize])
            })
            .sum();
        if c > best.0 {
            best = (c, lag);
        }
    }
    best.1
}
