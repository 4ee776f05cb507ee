use crate::matrix::Matrix;
use crate::{Error, Result, Scalar, Series};

/// Diagonal averaging: `g_k` is the mean of the entries with `i + j = k`.
///
/// This is the orthogonal projection onto Hankel matrices, so a Hankel input returns
/// the series that generated it. Works for either orientation (L ≤ K or L > K).
pub fn diagonal_average<T: Scalar>(matrix: &Matrix<T>) -> Result<Series<T>> {
    if matrix.is_empty() {
        return Err(Error::param("cannot diagonal-average an empty matrix"));
    }
    let (l, k) = (matrix.rows(), matrix.cols());
    let mut sums = vec![T::zero(); l + k - 1];
    for i in 0..l {
        for (j, &v) in matrix.row(i).iter().enumerate() {
            sums[i + j] = sums[i + j] + v;
        }
    }
    Series::new(average_antidiagonals(sums, l, k), "diagonal average")
}

/// Divides anti-diagonal sums by the number of cells on each anti-diagonal.
pub(crate) fn average_antidiagonals<T: Scalar>(mut sums: Vec<T>, l: usize, k: usize) -> Vec<T> {
    let n = l + k - 1;
    let short = l.min(k);
    for (idx, s) in sums.iter_mut().enumerate() {
        let count = (idx + 1).min(short).min(n - idx);
        *s = *s / T::from_count(count);
    }
    sums
}

#[cfg(test)]
mod tests {
    use super::*;

    fn avg(rows: &[Vec<f64>]) -> Vec<f64> {
        diagonal_average(&Matrix::from_rows(rows).unwrap())
            .unwrap()
            .into_values()
    }

    #[test]
    fn hankel_inversion() {
        assert_eq!(avg(&[vec![1., 2.], vec![2., 3.]]), vec![1., 2., 3.]);
    }

    #[test]
    fn non_hankel_means() {
        assert_eq!(avg(&[vec![1., 4.], vec![2., 5.]]), vec![1., 3., 5.]);
    }

    #[test]
    fn tall_orientation() {
        // L > K uses the transposed reading; same anti-diagonals either way.
        let rows = vec![vec![1., 2.], vec![2., 3.], vec![3., 4.], vec![4., 5.]];
        assert_eq!(avg(&rows), vec![1., 2., 3., 4., 5.]);
    }

    #[test]
    fn empty_matrix() {
        let m = Matrix::<f64>::zeros(0, 0);
        assert!(matches!(diagonal_average(&m), Err(Error::Parameter(_))));
    }
}
