//! Read-only hints for choosing a grouping from the singular spectrum.

use serde::{Deserialize, Serialize};

use super::decompose::SpectralDecomposition;
use crate::Scalar;

/// Candidate structure in a singular spectrum. All indices are 1-based.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Advisory {
    /// Near-equal singular value pairs `(i, i + 1)`, likely periodic components.
    pub pairs: Vec<(usize, usize)>,
    /// First index whose eigenvalue is at or below `noise_floor · λ₁`.
    pub noise_cutoff: Option<usize>,
    pub noise_indices: Vec<usize>,
    /// Leading large eigentriples before the first pair.
    pub trend_candidates: Vec<usize>,
}

/// Symmetric relative gap `(σᵢ − σᵢ₊₁) / (σᵢ + σᵢ₊₁)` between adjacent singular values.
pub fn pair_gap<T: Scalar>(upper: T, lower: T) -> T {
    let total = upper + lower;
    if total > T::zero() {
        (upper - lower).abs() / total
    } else {
        T::zero()
    }
}

pub fn advise_grouping<T: Scalar>(
    decomposition: &SpectralDecomposition<T>,
    pair_tolerance: f64,
    noise_floor: f64,
) -> Advisory {
    advise_spectrum(
        decomposition.eigenvalues(),
        decomposition.rank(),
        pair_tolerance,
        noise_floor,
    )
}

/// Spectrum heuristics over eigenvalues sorted non-increasing, of which the first
/// `rank` are nonzero.
///
/// A pair is reported when its [`pair_gap`] is within `pair_tolerance` and it is
/// isolated: neither neighbouring gap among the non-noise eigentriples is also
/// within tolerance. A run of three or more near-equal values is a plateau, not a
/// pair. Tolerances outside `(0, 1)` and empty spectra give an empty advisory.
pub fn advise_spectrum<T: Scalar>(
    eigenvalues: &[T],
    rank: usize,
    pair_tolerance: f64,
    noise_floor: f64,
) -> Advisory {
    let in_unit = |v: f64| v > 0.0 && v < 1.0;
    let rank = rank.min(eigenvalues.len());
    if !in_unit(pair_tolerance) || !in_unit(noise_floor) || rank == 0 {
        return Advisory::default();
    }
    let lead = eigenvalues[0];
    let floor = T::lit(noise_floor) * lead;

    let noise_indices: Vec<usize> = (0..eigenvalues.len())
        .filter(|&i| i >= rank || eigenvalues[i] <= floor)
        .map(|i| i + 1)
        .collect();
    let signal = eigenvalues[..rank]
        .iter()
        .take_while(|&&v| v > floor)
        .count();

    let sigma: Vec<T> = eigenvalues[..signal].iter().map(|v| v.sqrt()).collect();
    let tol = T::lit(pair_tolerance);
    let close = |i: usize| i + 1 < signal && pair_gap(sigma[i], sigma[i + 1]) <= tol;

    let pairs: Vec<(usize, usize)> = (0..signal.saturating_sub(1))
        .filter(|&i| close(i) && !(i > 0 && close(i - 1)) && !close(i + 1))
        .map(|i| (i + 1, i + 2))
        .collect();

    let trend_candidates = match pairs.first() {
        Some(&(first, _)) => (1..first).collect(),
        None if signal > 0 => vec![1],
        None => vec![],
    };

    Advisory {
        pairs,
        noise_cutoff: noise_indices.first().copied(),
        noise_indices,
        trend_candidates,
    }
}
