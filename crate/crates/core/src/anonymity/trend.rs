use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar, Series};

/// How the replacement trend is produced from the extracted one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", bound = "T: Scalar")]
pub enum TrendSpec<T> {
    /// Use these values verbatim.
    Explicit { values: Vec<T> },
    /// Flatten the leading run above `cap` into an arc that peaks at `cap` and
    /// rejoins the original trend `half_width` samples beyond the run on each side.
    PlateauSmooth { cap: T, half_width: usize },
    /// Multiply the trend element-wise.
    Scale { factor: T },
}

impl<T: Scalar> TrendSpec<T> {
    pub fn validate(&self) -> Result<()> {
        match self {
            TrendSpec::Explicit { values } => {
                if let Some(p) = values.iter().position(|v| !v.is_finite()) {
                    return Err(Error::param(format!(
                        "explicit trend value at position {} is not finite",
                        p + 1
                    )));
                }
            }
            TrendSpec::PlateauSmooth { cap, .. } => {
                if !(cap.is_finite() && *cap > T::zero()) {
                    return Err(Error::param(format!(
                        "plateau cap must be positive, got {cap}"
                    )));
                }
            }
            TrendSpec::Scale { factor } => {
                if !(factor.is_finite() && *factor > T::zero()) {
                    return Err(Error::param(format!(
                        "scale factor must be positive, got {factor}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `scale <factor>` or `plateau_smooth <cap> <half_width>` (alias `plateau`).
/// Explicit trends come from files, not from this syntax.
impl<T: Scalar> FromStr for TrendSpec<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        let num = |t: &str| {
            t.parse::<f64>()
                .map(T::lit)
                .map_err(|_| Error::param(format!("invalid number {t:?} in trend strategy {s:?}")))
        };
        let spec = match parts.as_slice() {
            ["scale", f] => TrendSpec::Scale { factor: num(f)? },
            ["plateau_smooth" | "plateau", cap, hw] => TrendSpec::PlateauSmooth {
                cap: num(cap)?,
                half_width: hw
                    .parse()
                    .map_err(|_| Error::param(format!("invalid half-width {hw:?}")))?,
            },
            _ => {
                return Err(Error::param(format!(
                    "unknown trend strategy {s:?}; expected `scale <factor>` or `plateau_smooth <cap> <half_width>`"
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

pub fn generate_replacement_trend<T: Scalar>(
    trend: &Series<T>,
    spec: &TrendSpec<T>,
) -> Result<Series<T>> {
    spec.validate()?;
    let n = trend.len();
    let values = match spec {
        TrendSpec::Explicit { values } => {
            if values.len() != n {
                return Err(Error::param(format!(
                    "explicit trend has {} values, signal has {n}",
                    values.len()
                )));
            }
            values.clone()
        }
        TrendSpec::Scale { factor } => trend.values().iter().map(|&v| v * *factor).collect(),
        TrendSpec::PlateauSmooth { cap, half_width } => plateau(trend.values(), *cap, *half_width),
    };
    Series::new(values, "replacement trend")
}

fn plateau<T: Scalar>(trend: &[T], cap: T, half_width: usize) -> Vec<T> {
    let mut out = trend.to_vec();
    let n = trend.len();
    let Some(start) = trend.iter().position(|&v| v > cap) else {
        return out;
    };
    let end = (start..n)
        .take_while(|&i| trend[i] > cap)
        .last()
        .unwrap_or(start);

    let left = start.saturating_sub(half_width);
    let mut right = (end + half_width).min(n - 1);
    // Do not land the right anchor on a later excursion above the cap.
    while right < n - 1 && trend[right] > cap {
        right += 1;
    }
    if right == left {
        out[left] = cap;
        return out;
    }
    let anchor = |i: usize| trend[i].min(cap);
    let (y_left, y_right) = (anchor(left), anchor(right));
    let peak = (left + right) / 2;
    let half_pi = T::lit(std::f64::consts::FRAC_PI_2);

    for (i, slot) in out.iter_mut().enumerate().take(right + 1).skip(left) {
        // Quarter-sine ease from each anchor up to the cap at the peak index.
        *slot = if i <= peak {
            if peak == left {
                cap
            } else {
                let t = T::from_count(i - left) / T::from_count(peak - left);
                y_left + (cap - y_left) * (half_pi * t).sin()
            }
        } else {
            let t = T::from_count(right - i) / T::from_count(right - peak);
            y_right + (cap - y_right) * (half_pi * t).sin()
        };
    }
    out
}
