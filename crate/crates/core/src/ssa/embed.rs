use crate::matrix::Matrix;
use crate::{Error, Result, Scalar, Series};

/// L×K Hankel matrix of lagged windows of a series.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMatrix<T> {
    window_length: usize,
    lag_count: usize,
    cells: Matrix<T>,
}

impl<T: Scalar> TrajectoryMatrix<T> {
    pub fn window_length(&self) -> usize {
        self.window_length
    }

    pub fn lag_count(&self) -> usize {
        self.lag_count
    }

    /// Length of the series this matrix was built from, `L + K - 1`.
    pub fn series_len(&self) -> usize {
        self.window_length + self.lag_count - 1
    }

    pub fn cells(&self) -> &Matrix<T> {
        &self.cells
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.cells.get(i, j)
    }
}

/// Builds the trajectory matrix with `cells[i][j] = values[i + j]`. Requires `1 < L < N`.
pub fn embed<T: Scalar>(series: &Series<T>, window_length: usize) -> Result<TrajectoryMatrix<T>> {
    let n = series.len();
    if window_length <= 1 || window_length >= n {
        return Err(Error::param(format!(
            "window length {window_length} out of range; valid range for N = {n} is 2..={}",
            n - 1
        )));
    }
    let k = n - window_length + 1;
    let v = series.values();
    Ok(TrajectoryMatrix {
        window_length,
        lag_count: k,
        cells: Matrix::from_fn(window_length, k, |i, j| v[i + j]),
    })
}

/// ⌊N/2⌋, raised to 2 so that very short series still get a valid window.
pub fn default_window_length(n: usize) -> usize {
    (n / 2).max(2)
}
