//! Backend-specific kernels: fraction-free Bareiss and pivoted LDLᵀ for rationals,
//! partial-pivot LU and symmetric eigenvalues for `f64`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::Matrix;
use super::scalar::{Rational, Scalar, TOL_REL};
use crate::error::{Error, Result};

/// Integer rows of `m` after scaling each row by the lcm of its denominators.
fn clear_denominators(m: &Matrix<Rational>) -> (Vec<Vec<BigInt>>, Vec<BigInt>) {
    (0..m.rows())
        .map(|i| {
            let lcm = m.row(i).iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
            let row = m
                .row(i)
                .iter()
                .map(|x| x.numer() * (&lcm / x.denom()))
                .collect();
            (row, lcm)
        })
        .unzip()
}

/// Determinant by Bareiss elimination after clearing row denominators.
pub(crate) fn bareiss_det(m: &Matrix<Rational>) -> Rational {
    let n = m.rows();
    if n == 0 {
        return <Rational as One>::one();
    }
    let (mut a, scales) = clear_denominators(m);
    let row_scale: BigInt = scales.iter().product();

    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n.saturating_sub(1) {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(p) => {
                    a.swap(k, p);
                    negate = !negate;
                }
                None => return <Rational as Zero>::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = t / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let det = Rational::new(a[n - 1][n - 1].clone(), row_scale);
    if negate {
        -det
    } else {
        det
    }
}

/// Fraction-free Gauss-Jordan on `[L A | L]`, where `L` clears row denominators.
///
/// Every intermediate entry is a minor of the augmented matrix, so each division is exact.
pub(crate) fn bareiss_inverse(m: &Matrix<Rational>) -> Option<Matrix<Rational>> {
    let n = m.rows();
    let (left, scales) = clear_denominators(m);
    let mut a: Vec<Vec<BigInt>> = left
        .into_iter()
        .zip(&scales)
        .enumerate()
        .map(|(i, (mut row, l))| {
            row.extend((0..n).map(|j| if i == j { l.clone() } else { BigInt::zero() }));
            row
        })
        .collect();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            let p = (k + 1..n).find(|&i| !a[i][k].is_zero())?;
            a.swap(k, p);
        }
        let (pivot_row, rest) = (a[k].clone(), &mut a);
        for (i, row) in rest.iter_mut().enumerate() {
            if i == k {
                continue;
            }
            let f = row[k].clone();
            for j in 0..2 * n {
                if j == k {
                    continue;
                }
                let t = &row[j] * &pivot_row[k] - &f * &pivot_row[j];
                row[j] = t / &prev;
            }
            row[k] = BigInt::zero();
        }
        prev = pivot_row[k].clone();
    }
    let det = prev;
    Some(Matrix::from_fn(n, n, |i, j| {
        Rational::new(a[i][n + j].clone(), det.clone())
    }))
}

pub(crate) fn lu_det(m: &Matrix<f64>) -> f64 {
    let n = m.rows();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&x, &y| a[x][k].abs().total_cmp(&a[y][k].abs()))
            .unwrap_or(k);
        if a[p][k] == 0.0 {
            return 0.0;
        }
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k + 1..n {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    det
}

/// Symmetric elimination with greatest-diagonal pivoting.
///
/// PSD iff every pivot is non-negative and, once the largest remaining diagonal is zero,
/// the whole remaining block is zero.
pub(crate) fn ldlt_psd(m: &Matrix<Rational>) -> bool {
    let n = m.rows();
    let mut w: Vec<Vec<Rational>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    let mut active: Vec<usize> = (0..n).collect();
    while !active.is_empty() {
        let (pos, &p) = active
            .iter()
            .enumerate()
            .max_by(|(ia, &a), (ib, &b)| w[a][a].cmp(&w[b][b]).then(ib.cmp(ia)))
            .expect("non-empty");
        let pivot = w[p][p].clone();
        if pivot.is_negative() {
            return false;
        }
        if pivot.is_zero() {
            return active
                .iter()
                .all(|&i| active.iter().all(|&j| w[i][j].is_zero()));
        }
        active.remove(pos);
        for &i in &active {
            if w[i][p].is_zero() {
                continue;
            }
            let f = &w[i][p] / &pivot;
            for &j in &active {
                let t = &f * &w[p][j];
                w[i][j] -= t;
            }
        }
    }
    true
}

fn to_nalgebra(m: &Matrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

/// Eigenvalues of a symmetric float matrix, ascending.
pub fn symmetric_eigenvalues(m: &Matrix<f64>) -> Vec<f64> {
    if m.rows() == 0 {
        return Vec::new();
    }
    let mut values: Vec<f64> = SymmetricEigen::new(to_nalgebra(m))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    values.sort_by(f64::total_cmp);
    values
}

pub(crate) fn eigen_psd(m: &Matrix<f64>) -> bool {
    if m.rows() == 0 {
        return true;
    }
    let eig = SymmetricEigen::new(to_nalgebra(m));
    let spread = eig
        .eigenvalues
        .iter()
        .map(|x| f64::abs(*x))
        .fold(0.0, f64::max);
    let floor = -TOL_REL * spread.max(1.0);
    eig.eigenvalues.iter().all(|&l| l >= floor)
}

/// Moore-Penrose inverse of a symmetric float matrix through its eigendecomposition.
///
/// Independent of the closed-form `(S + J)^{-1} - J/n²`, so the float backend uses it as
/// the comparator for that formula.
pub fn eigen_pinv(m: &Matrix<f64>) -> Result<Matrix<f64>> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if !m.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let n = m.rows();
    let eig = SymmetricEigen::new(to_nalgebra(m));
    let spread = eig
        .eigenvalues
        .iter()
        .map(|x| f64::abs(*x))
        .fold(0.0, f64::max);
    let cutoff = spread * n as f64 * f64::EPSILON * 16.0;
    let mut out = Matrix::<f64>::zeros(n, n);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda.abs() <= cutoff {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += v[i] * v[j] / lambda;
            }
        }
    }
    Ok(out)
}

/// Checks `det(A + x y') = det(A) + y' adj(A) x`, both sides computed independently.
pub fn matrix_det_lemma_check<T: Scalar>(
    a: &Matrix<T>,
    x: &Matrix<T>,
    y: &Matrix<T>,
) -> Result<bool> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let m = a.rows();
    for v in [x, y] {
        if v.rows() != m || v.cols() != 1 {
            return Err(Error::DimensionMismatch(format!(
                "vector is {}x{}, expected {m}x1",
                v.rows(),
                v.cols()
            )));
        }
    }
    let lhs = a.try_add(&x.try_mul(&y.transpose())?)?.det()?;
    let rhs = a.det()? + y.transpose().try_mul(&a.adjugate()?)?.try_mul(x)?[(0, 0)].clone();
    let scale = lhs.to_f64().abs().max(rhs.to_f64().abs());
    Ok(lhs.approx_eq(&rhs, scale))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    #[test]
    fn det_lemma_trivial_instances() {
        let i2: Matrix<Rational> = Matrix::identity(2);
        let ones = Matrix::column(vec![q(1), q(1)]);
        assert_eq!(matrix_det_lemma_check(&i2, &ones, &ones), Ok(true));
        assert_eq!(
            i2.try_add(&ones.try_mul(&ones.transpose()).unwrap())
                .unwrap()
                .det()
                .unwrap(),
            q(3)
        );

        let z: Matrix<Rational> = Matrix::zeros(2, 2);
        let x = Matrix::column(vec![q(1), q(0)]);
        let y = Matrix::column(vec![q(0), q(1)]);
        assert_eq!(matrix_det_lemma_check(&z, &x, &y), Ok(true));

        let short = Matrix::column(vec![q(1)]);
        assert!(matches!(
            matrix_det_lemma_check(&i2, &short, &ones),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn bareiss_handles_fractions_and_row_swaps() {
        let m = Matrix::from_rows(vec![
            vec![q(0), Rational::new(1.into(), 2.into())],
            vec![Rational::new(2.into(), 3.into()), q(5)],
        ])
        .unwrap();
        assert_eq!(bareiss_det(&m), Rational::new((-1).into(), 3.into()));
    }

    #[test]
    fn eigen_pinv_of_two_vertex_laplacian() {
        let s: Matrix<f64> = Matrix::from_i64_rows(&[&[3, -3], &[-3, 3]]);
        let p = eigen_pinv(&s).unwrap();
        let expect = 1.0 / 12.0;
        assert!((p[(0, 0)] - expect).abs() < 1e-14);
        assert!((p[(0, 1)] + expect).abs() < 1e-14);
    }
}
