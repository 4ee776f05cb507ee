//! Cyclic Jacobi eigen-solver for real symmetric matrices.

use crate::matrix::Matrix;
use crate::{Error, Result, Scalar};

/// Eigenpairs in the order the solver produced them; `vectors` holds them column-wise.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
    pub sweeps: usize,
}

const MAX_SWEEPS: usize = 100;

/// Diagonalizes a symmetric matrix by plane rotations until the off-diagonal
/// Frobenius norm falls below `ε·‖A‖_F`.
pub fn symmetric_eigen<T: Scalar>(a: &Matrix<T>) -> Result<SymmetricEigen<T>> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "symmetric_eigen needs a square matrix");
    let mut a = a.clone();
    let mut v = Matrix::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() });

    let scale = a.frobenius_sq().sqrt();
    let threshold = T::epsilon() * scale;
    let two = T::lit(2.0);

    let off_norm = |a: &Matrix<T>| -> T {
        let mut off = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                off = off + a.get(p, q) * a.get(p, q);
            }
        }
        (off * two).sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&a);
        if off <= threshold {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::Numerical {
                sweeps,
                off_diagonal: off.to_f64().unwrap_or(f64::NAN),
            });
        }
        sweeps += 1;

        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq == T::zero() {
                    continue;
                }
                // Below the resolution of both diagonal entries: drop it.
                let g = T::lit(100.0) * apq.abs();
                let (app, aqq) = (a.get(p, p), a.get(q, q));
                if app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a.set(p, q, T::zero());
                    a.set(q, p, T::zero());
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (two * apq);
                let t = if (theta * theta).is_infinite() {
                    T::lit(0.5) / theta
                } else {
                    let t = T::one() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    if theta < T::zero() {
                        -t
                    } else {
                        t
                    }
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                a.set(p, q, T::zero());
                a.set(q, p, T::zero());

                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    Ok(SymmetricEigen {
        values: (0..n).map(|i| a.get(i, i)).collect(),
        vectors: v,
        sweeps,
    })
}
