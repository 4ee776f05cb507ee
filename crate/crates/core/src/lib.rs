//! Singular spectrum analysis of quantity signals drawn from microdata, and
//! group-anonymity masking by trend replacement.
//!
//! The numeric core ([`ssa`], [`anonymity`]) is generic over [`Scalar`] (`f32` or
//! `f64`); the aliases below name the `f64` instantiations used by the tools.

pub mod anonymity;
pub mod config;
mod error;
pub mod matrix;
pub mod microdata;
mod scalar;
mod series;
pub mod ssa;
pub mod textio;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use series::{Series, MIN_SERIES_LEN};
pub use ssa::{ComponentSet, Grouping, SpectralDecomposition, TrajectoryMatrix};

pub type Series64 = Series<f64>;
pub type Series32 = Series<f32>;
pub type Trajectory64 = TrajectoryMatrix<f64>;
pub type Decomposition64 = SpectralDecomposition<f64>;
pub type Decomposition32 = SpectralDecomposition<f32>;
pub type ComponentSet64 = ComponentSet<f64>;
pub type MaskPlan64 = anonymity::MaskPlan<f64>;
pub type TrendSpec64 = anonymity::TrendSpec<f64>;
pub type UtilityReport64 = anonymity::UtilityReport<f64>;
pub type MaskOutcome64 = anonymity::MaskOutcome<f64>;
