//! Small dense linear algebra over [`Scalar`] types.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Builds a square matrix from rows, rejecting ragged or non-square grids.
pub fn square_from_rows<T: Scalar>(rows: Vec<Vec<T>>) -> Result<DMatrix<T>> {
    let n = rows.len();
    if let Some(bad) = rows.iter().position(|r| r.len() != n) {
        return Err(Error::Shape(format!(
            "row {bad} has {} entries, expected {n}",
            rows[bad].len()
        )));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j].clone()))
}

pub fn matmul<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    assert_eq!(a.ncols(), b.nrows(), "matmul shape mismatch");
    DMatrix::from_fn(a.nrows(), b.ncols(), |i, j| {
        (0..a.ncols()).fold(T::zero(), |acc, k| acc + a[(i, k)].clone() * b[(k, j)].clone())
    })
}

pub fn trace<T: Scalar>(a: &DMatrix<T>) -> T {
    (0..a.nrows().min(a.ncols())).fold(T::zero(), |acc, i| acc + a[(i, i)].clone())
}

/// `Tr(Y^m)` for `m = 1..=degree` by repeated multiplication.
pub fn power_traces<T: Scalar>(y: &DMatrix<T>, degree: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(degree);
    if degree == 0 {
        return out;
    }
    let mut power = y.clone();
    out.push(trace(&power));
    for _ in 1..degree {
        power = matmul(&power, y);
        out.push(trace(&power));
    }
    out
}

/// Determinant: fraction-free elimination for exact scalars, partial pivoting
/// otherwise.
pub fn determinant<T: Scalar>(m: &DMatrix<T>) -> T {
    assert_eq!(m.nrows(), m.ncols(), "determinant of a non-square matrix");
    let n = m.nrows();
    if n == 0 {
        return T::one();
    }
    let mut a: Vec<Vec<T>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)].clone()).collect()).collect();
    if T::EXACT {
        bareiss(&mut a)
    } else {
        pivoted_elimination(&mut a)
    }
}

fn bareiss<T: Scalar>(a: &mut [Vec<T>]) -> T {
    let n = a.len();
    let mut sign = T::one();
    let mut prev = T::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return T::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (a[i][j].clone() * a[k][k].clone() - a[i][k].clone() * a[k][j].clone())
                    / prev.clone();
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

fn pivoted_elimination<T: Scalar>(a: &mut [Vec<T>]) -> T {
    let n = a.len();
    let mut det = T::one();
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&x, &y| a[x][k].magnitude().total_cmp(&a[y][k].magnitude()))
            .unwrap_or(k);
        if a[pivot][k].magnitude() == 0.0 {
            return T::zero();
        }
        if pivot != k {
            a.swap(k, pivot);
            det = -det;
        }
        let diag = a[k][k].clone();
        det *= diag.clone();
        for i in k + 1..n {
            let factor = a[i][k].clone() / diag.clone();
            if factor.is_zero() {
                continue;
            }
            for j in k + 1..n {
                let v = a[i][j].clone() - factor.clone() * a[k][j].clone();
                a[i][j] = v;
            }
        }
    }
    det
}

pub fn adjoint(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn diagonal(values: &[C64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values))
}

pub fn real_diagonal(values: &[f64]) -> CMatrix {
    let v: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
    diagonal(&v)
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn exact_and_float_determinants_agree() {
        let rows = vec![
            vec![q(0, 1), q(2, 3), q(1, 1)],
            vec![q(1, 2), q(0, 1), q(-1, 1)],
            vec![q(5, 1), q(1, 7), q(3, 1)],
        ];
        let exact = determinant(&square_from_rows(rows.clone()).unwrap());
        // cofactor expansion along the first row
        let m = &rows;
        let minor = |a: &BigRational, b: &BigRational, c: &BigRational, d: &BigRational| {
            a * d - b * c
        };
        let expansion = m[0][0].clone() * minor(&m[1][1], &m[1][2], &m[2][1], &m[2][2])
            - m[0][1].clone() * minor(&m[1][0], &m[1][2], &m[2][0], &m[2][2])
            + m[0][2].clone() * minor(&m[1][0], &m[1][1], &m[2][0], &m[2][1]);
        assert_eq!(exact, expansion);

        let float_rows: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.iter().map(|x| num_traits::ToPrimitive::to_f64(x).unwrap()).collect())
            .collect();
        let approx = determinant(&square_from_rows(float_rows).unwrap());
        let exact_f = num_traits::ToPrimitive::to_f64(&exact).unwrap();
        assert!((approx - exact_f).abs() < 1e-12);
    }

    #[test]
    fn singular_and_empty() {
        let z = square_from_rows(vec![vec![1.0f64, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(determinant(&z).abs() < 1e-15);
        let e = square_from_rows::<f64>(vec![]).unwrap();
        assert_eq!(determinant(&e), 1.0);
        let zr = square_from_rows(vec![vec![q(0, 1), q(1, 1)], vec![q(0, 1), q(2, 1)]]).unwrap();
        assert_eq!(determinant(&zr), q(0, 1));
    }

    #[test]
    fn ragged_grid_is_a_shape_error() {
        let e = square_from_rows(vec![vec![1.0, 2.0], vec![3.0]]);
        assert!(matches!(e, Err(Error::Shape(_))));
    }

    #[test]
    fn traces_of_powers() {
        let y = real_diagonal(&[0.3, 0.2]);
        let t = power_traces(&y, 2);
        assert!((t[0].re - 0.5).abs() < 1e-15);
        assert!((t[1].re - 0.13).abs() < 1e-15);
    }
}
