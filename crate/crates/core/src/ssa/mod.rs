//! Singular spectrum analysis: embedding, eigendecomposition of the lag-covariance
//! matrix, eigentriple grouping and diagonal averaging, plus spectrum heuristics.

mod advise;
mod decompose;
mod eigen;
mod embed;
mod grouping;
mod hankel;
mod period;

pub use advise::{advise_grouping, advise_spectrum, pair_gap, Advisory};
pub use decompose::{
    decompose, decompose_with, DecomposeOptions, SpectralDecomposition, DEFAULT_RANK_TOLERANCE,
};
pub use eigen::{symmetric_eigen, SymmetricEigen};
pub use embed::{default_window_length, embed, TrajectoryMatrix};
pub use grouping::{reconstruct, ComponentSet, Grouping};
pub use hankel::diagonal_average;
pub use period::{autocorrelation, estimate_period};

use crate::{Result, Scalar, Series};

/// Embeds, decomposes and reconstructs in one call.
pub fn decompose_series<T: Scalar>(
    series: &Series<T>,
    window_length: usize,
) -> Result<SpectralDecomposition<T>> {
    decompose(&embed(series, window_length)?)
}
