use crate::{Scalar, Series};

/// Mean-removed autocorrelation `r(k) = Σ (x_t − m)(x_{t+k} − m) / Σ (x_t − m)²`
/// for lags `0..N`. Returns `None` for a constant series.
pub fn autocorrelation<T: Scalar>(values: &[T]) -> Option<Vec<T>> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let (lo, hi) = values
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let magnitude = lo.abs().max(hi.abs());
    if hi - lo <= T::lit(8.0) * T::epsilon() * magnitude {
        return None;
    }
    let mean = values.iter().copied().sum::<T>() / T::from_count(n);
    let centered: Vec<T> = values.iter().map(|&v| v - mean).collect();
    let denom: T = centered.iter().map(|&v| v * v).sum();
    if denom <= T::zero() {
        return None;
    }
    Some(
        (0..n)
            .map(|k| {
                centered[..n - k]
                    .iter()
                    .zip(&centered[k..])
                    .map(|(&a, &b)| a * b)
                    .sum::<T>()
                    / denom
            })
            .collect(),
    )
}

/// Dominant period in samples: the lag of the first positive local maximum of the
/// autocorrelation whose rise above the lowest preceding value is at least `2/√N`.
///
/// `None` for series shorter than 4, constant series, or when no maximum qualifies.
pub fn estimate_period<T: Scalar>(series: &Series<T>) -> Option<T> {
    let values = series.values();
    let n = values.len();
    if n < 4 {
        return None;
    }
    let r = autocorrelation(values)?;
    let significance = T::lit(2.0) / T::from_count(n).sqrt();
    let mut trough = r[1];
    for k in 2..n - 1 {
        trough = trough.min(r[k - 1]);
        let peak = r[k] > r[k - 1] && r[k] >= r[k + 1];
        if peak && r[k] > T::zero() && r[k] - trough >= significance {
            return Some(T::from_count(k));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute force: every lag, straight from the definition.
    fn acf_oracle(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let m = x.iter().sum::<f64>() / n as f64;
        let d: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
        (0..n)
            .map(|k| (0..n - k).map(|t| (x[t] - m) * (x[t + k] - m)).sum::<f64>() / d)
            .collect()
    }

    #[test]
    fn sine_period_eight() {
        let x: Vec<f64> = (0..64)
            .map(|k| (2.0 * std::f64::consts::PI * k as f64 / 8.0).sin())
            .collect();
        let oracle = acf_oracle(&x);
        // The oracle's first positive local maximum sits at lag 8.
        let first = (1..63)
            .find(|&k| oracle[k] > oracle[k - 1] && oracle[k] >= oracle[k + 1] && oracle[k] > 0.0)
            .unwrap();
        assert_eq!(first, 8);
        let r = autocorrelation(&x).unwrap();
        for (a, b) in r.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12);
        }
        let s = Series::new(x, "sine").unwrap();
        assert_eq!(estimate_period(&s), Some(8.0));
    }

    #[test]
    fn constant_has_no_period() {
        let s = Series::<f64>::new(vec![0.1; 20], "c").unwrap();
        assert_eq!(estimate_period(&s), None);
    }

    #[test]
    fn too_short() {
        let s = Series::<f64>::from_f64(&[1., 2., 1.], "s").unwrap();
        assert_eq!(estimate_period(&s), None);
    }

    #[test]
    fn alternating_series_has_period_two() {
        let x: Vec<f64> = (0..30)
            .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let s = Series::new(x, "alt").unwrap();
        assert_eq!(estimate_period(&s), Some(2.0));
    }

    #[test]
    fn monotone_ramp_has_no_period() {
        let s = Series::new((0..30).map(f64::from).collect(), "ramp").unwrap();
        assert_eq!(estimate_period(&s), None);
    }
}
