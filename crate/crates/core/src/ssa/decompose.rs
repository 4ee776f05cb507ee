use serde::{Deserialize, Serialize};

use super::eigen::symmetric_eigen;
use super::embed::TrajectoryMatrix;
use crate::matrix::Matrix;
use crate::{Result, Scalar};

/// Relative threshold `ε` in `d = #{i : λᵢ > ε·λ₁}`.
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecomposeOptions {
    pub rank_tolerance: f64,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self {
            rank_tolerance: DEFAULT_RANK_TOLERANCE,
        }
    }
}

/// Eigen-structure of `S = X·Xᵀ` for one trajectory matrix `X`.
///
/// Eigenvalues are sorted non-increasing and clipped at zero. Only the first
/// `rank` eigentriples carry vectors. Each left vector is sign-normalized so its
/// largest-magnitude entry is positive; factor vectors follow as `Xᵀ·Uᵢ / √λᵢ`.
///
/// Equal eigenvalues keep the solver's output order. A reconstruction over a whole
/// tied group is basis-invariant; single eigentriples inside a tie are not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SpectralDecomposition<T> {
    eigenvalues: Vec<T>,
    rank: usize,
    left_vectors: Vec<Vec<T>>,
    factor_vectors: Vec<Vec<T>>,
    window_length: usize,
    lag_count: usize,
    series_len: usize,
}

impl<T: Scalar> SpectralDecomposition<T> {
    /// λ₁ ≥ … ≥ λ_L ≥ 0.
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// √λᵢ for every eigenvalue, the singular spectrum.
    pub fn singular_values(&self) -> Vec<T> {
        self.eigenvalues.iter().map(|v| v.sqrt()).collect()
    }

    /// Effective rank `d`.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `Uᵢ` for a 1-based index `i ≤ d`.
    pub fn left_vector(&self, index: usize) -> Option<&[T]> {
        index
            .checked_sub(1)
            .and_then(|i| self.left_vectors.get(i))
            .map(Vec::as_slice)
    }

    /// `Vᵢ` for a 1-based index `i ≤ d`.
    pub fn factor_vector(&self, index: usize) -> Option<&[T]> {
        index
            .checked_sub(1)
            .and_then(|i| self.factor_vectors.get(i))
            .map(Vec::as_slice)
    }

    pub fn window_length(&self) -> usize {
        self.window_length
    }

    pub fn lag_count(&self) -> usize {
        self.lag_count
    }

    pub fn series_len(&self) -> usize {
        self.series_len
    }

    /// Elementary matrix `Xᵢ = √λᵢ·Uᵢ·Vᵢᵀ` for a 1-based index.
    pub fn elementary_matrix(&self, index: usize) -> Option<Matrix<T>> {
        let u = self.left_vector(index)?;
        let v = self.factor_vector(index)?;
        let sigma = self.eigenvalues[index - 1].sqrt();
        Some(Matrix::from_fn(u.len(), v.len(), |i, j| {
            sigma * u[i] * v[j]
        }))
    }

    /// Anti-diagonal sums of `Σ_{i∈indices} Xᵢ`, without forming the matrix.
    pub(crate) fn antidiagonal_sums(&self, indices: &[usize]) -> Vec<T> {
        let mut sums = vec![T::zero(); self.series_len];
        for &index in indices {
            let u = &self.left_vectors[index - 1];
            let v = &self.factor_vectors[index - 1];
            let sigma = self.eigenvalues[index - 1].sqrt();
            for (i, &ui) in u.iter().enumerate() {
                let su = sigma * ui;
                for (j, &vj) in v.iter().enumerate() {
                    sums[i + j] = sums[i + j] + su * vj;
                }
            }
        }
        sums
    }
}

pub fn decompose<T: Scalar>(trajectory: &TrajectoryMatrix<T>) -> Result<SpectralDecomposition<T>> {
    decompose_with(trajectory, DecomposeOptions::default())
}

pub fn decompose_with<T: Scalar>(
    trajectory: &TrajectoryMatrix<T>,
    options: DecomposeOptions,
) -> Result<SpectralDecomposition<T>> {
    let x = trajectory.cells();
    let l = trajectory.window_length();
    let k = trajectory.lag_count();
    let eig = symmetric_eigen(&x.gram())?;

    let mut order: Vec<usize> = (0..l).collect();
    // Stable: ties keep solver order.
    order.sort_by(|&a, &b| {
        eig.values[b]
            .partial_cmp(&eig.values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigenvalues: Vec<T> = order
        .iter()
        .map(|&i| eig.values[i].max(T::zero()))
        .collect();

    let lead = eigenvalues.first().copied().unwrap_or_else(T::zero);
    let cutoff = T::lit(options.rank_tolerance) * lead;
    let rank = if lead > T::zero() {
        eigenvalues.iter().take_while(|&&v| v > cutoff).count()
    } else {
        0
    };

    let mut left_vectors = Vec::with_capacity(rank);
    let mut factor_vectors = Vec::with_capacity(rank);
    for (slot, &col) in order.iter().take(rank).enumerate() {
        let mut u: Vec<T> = (0..l).map(|i| eig.vectors.get(i, col)).collect();
        let pivot = u
            .iter()
            .copied()
            .fold((T::zero(), T::zero()), |(best, signed), v| {
                if v.abs() > best {
                    (v.abs(), v)
                } else {
                    (best, signed)
                }
            })
            .1;
        if pivot < T::zero() {
            u.iter_mut().for_each(|v| *v = -*v);
        }
        let sigma = eigenvalues[slot].sqrt();
        let v: Vec<T> = (0..k)
            .map(|j| (0..l).map(|i| x.get(i, j) * u[i]).sum::<T>() / sigma)
            .collect();
        left_vectors.push(u);
        factor_vectors.push(v);
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        rank,
        left_vectors,
        factor_vectors,
        window_length: l,
        lag_count: k,
        series_len: trajectory.series_len(),
    })
}
