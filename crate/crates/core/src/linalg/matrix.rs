use std::ops::{Add, Index, IndexMut, Mul, Sub};

use serde::ser::{Serialize, SerializeStruct, Serializer};

use super::scalar::{Rational, Scalar};
use crate::error::{Error, Result};

/// Dense row-major matrix over a [`Scalar`].
///
/// Indices are zero-based. Vectors are `k x 1` matrices. A `0 x 0` matrix is allowed and
/// has determinant 1; it shows up as the R matrix of a two-vertex tree.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Builds a matrix from small integers; convenient in tests and fixtures.
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let c = rows.first().map_or(0, |r| r.len());
        Self::from_fn(rows.len(), c, |i, j| T::from_i64(rows[i][j]))
    }

    pub fn column(values: Vec<T>) -> Self {
        Self {
            rows: values.len(),
            cols: 1,
            data: values,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| T::zero())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    /// All-ones matrix `J`.
    pub fn ones(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| T::one())
    }

    pub fn diag(values: &[T]) -> Self {
        let n = values.len();
        Self::from_fn(
            n,
            n,
            |i, j| if i == j { values[i].clone() } else { T::zero() },
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)].clone())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn scale(&self, k: &T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.clone() * k.clone()).collect(),
        }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(|x| x.to_f64())
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.rows)
            .map(|i| self.row(i).iter().cloned().fold(T::zero(), |a, b| a + b))
            .collect()
    }

    /// Sum of all entries, e.g. `1' M 1`.
    pub fn total(&self) -> T {
        self.data.iter().cloned().fold(T::zero(), |a, b| a + b)
    }

    /// `max |m_ij|` as a float; the scale used by float tolerances.
    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .map(|x| x.to_f64().abs())
            .fold(0.0, f64::max)
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Self::from_fn(self.rows, rhs.cols, |i, j| {
            (0..self.cols).fold(T::zero(), |acc, k| {
                acc + self[(i, k)].clone() * rhs[(k, j)].clone()
            })
        }))
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(&T, &T) -> T) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a.clone() + b.clone())
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a.clone() - b.clone())
    }

    /// `M[rows, cols]`, entries taken in the listed order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<Self> {
        for &i in rows {
            if i >= self.rows {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    dim: self.rows,
                });
            }
        }
        for &j in cols {
            if j >= self.cols {
                return Err(Error::IndexOutOfRange {
                    index: j,
                    dim: self.cols,
                });
            }
        }
        Ok(Self::from_fn(rows.len(), cols.len(), |i, j| {
            self[(rows[i], cols[j])].clone()
        }))
    }

    /// `M(i|j)`: delete row `i` and column `j`.
    pub fn delete_rc(&self, i: usize, j: usize) -> Result<Self> {
        if i >= self.rows {
            return Err(Error::IndexOutOfRange {
                index: i,
                dim: self.rows,
            });
        }
        if j >= self.cols {
            return Err(Error::IndexOutOfRange {
                index: j,
                dim: self.cols,
            });
        }
        let rows: Vec<usize> = (0..self.rows).filter(|&r| r != i).collect();
        let cols: Vec<usize> = (0..self.cols).filter(|&c| c != j).collect();
        self.submatrix(&rows, &cols)
    }

    /// `P' M P` for the permutation listing old indices in `order`.
    pub fn permute_symmetric(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.rows || !self.is_square() {
            return Err(Error::DimensionMismatch("permutation length".into()));
        }
        let mut seen = vec![false; order.len()];
        for &o in order {
            if o >= order.len() || std::mem::replace(&mut seen[o], true) {
                return Err(Error::DimensionMismatch(
                    "order is not a permutation".into(),
                ));
            }
        }
        self.submatrix(order, order)
    }

    pub fn is_symmetric(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let scale = self.max_abs();
        (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)].approx_eq(&self[(j, i)], scale)))
    }

    /// Entrywise equality, exact or within the float band scaled by the larger operand.
    pub fn approx_eq(&self, other: &Self) -> bool {
        if self.rows != other.rows || self.cols != other.cols {
            return false;
        }
        let scale = self.max_abs().max(other.max_abs());
        self.data
            .iter()
            .zip(&other.data)
            .all(|(a, b)| a.approx_eq(b, scale))
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn det(&self) -> Result<T> {
        self.require_square()?;
        Ok(T::determinant(self))
    }

    /// Classical adjugate: transpose of the cofactor matrix.
    pub fn adjugate(&self) -> Result<Self> {
        self.require_square()?;
        let n = self.rows;
        if n == 0 {
            return Ok(self.clone());
        }
        if n == 1 {
            return Ok(Self::identity(1));
        }
        if T::EXACT {
            let det = self.det()?;
            if !det.near_zero(0.0) {
                return Ok(self.inverse()?.scale(&det));
            }
        }
        let mut adj = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let minor = self.delete_rc(i, j)?.det()?;
                let cof = if (i + j) % 2 == 0 { minor } else { -minor };
                adj[(j, i)] = cof;
            }
        }
        Ok(adj)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.require_square()?;
        T::inverse_of(self).ok_or(Error::Singular)
    }

    /// Gauss-Jordan inverse with the backend's pivot rule; `None` if singular.
    pub(crate) fn gauss_jordan_inverse(&self) -> Option<Self> {
        let n = self.rows;
        let scale = self.max_abs();
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for k in 0..n {
            let candidates: Vec<&T> = (k..n).map(|i| &a[(i, k)]).collect();
            let p = T::choose_pivot(&candidates, scale)? + k;
            if p != k {
                a.swap_rows(p, k);
                inv.swap_rows(p, k);
            }
            let pivot = a[(k, k)].clone();
            for j in 0..n {
                a[(k, j)] = a[(k, j)].clone() / pivot.clone();
                inv[(k, j)] = inv[(k, j)].clone() / pivot.clone();
            }
            for i in 0..n {
                if i == k || (T::EXACT && a[(i, k)].near_zero(0.0)) {
                    continue;
                }
                let f = a[(i, k)].clone();
                for j in 0..n {
                    let t = a[(k, j)].clone() * f.clone();
                    a[(i, j)] = a[(i, j)].clone() - t;
                    let t = inv[(k, j)].clone() * f.clone();
                    inv[(i, j)] = inv[(i, j)].clone() - t;
                }
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Positive semidefiniteness of a symmetric matrix.
    pub fn is_psd(&self) -> Result<bool> {
        self.require_square()?;
        if !self.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        Ok(T::psd(self))
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i},{j}) out of bounds"
        );
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i},{j}) out of bounds"
        );
        &mut self.data[i * self.cols + j]
    }
}

// Operator forms panic on dimension mismatch; the `try_*` methods return errors.
impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: Self) -> Matrix<T> {
        self.try_mul(rhs).expect("matrix product dimensions")
    }
}

impl<T: Scalar> Add for &Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: Self) -> Matrix<T> {
        self.try_add(rhs).expect("matrix sum dimensions")
    }
}

impl<T: Scalar> Sub for &Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: Self) -> Matrix<T> {
        self.try_sub(rhs).expect("matrix difference dimensions")
    }
}

impl<T: Scalar> Serialize for Matrix<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<Vec<serde_json::Value>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(Scalar::to_json).collect())
            .collect();
        let mut st = serializer.serialize_struct("Matrix", 3)?;
        st.serialize_field("rows", &self.rows)?;
        st.serialize_field("cols", &self.cols)?;
        st.serialize_field("entries", &entries)?;
        st.end()
    }
}

impl Matrix<Rational> {
    /// Inverse of the JSON form written by `Serialize`.
    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("matrix json: {m}"));
        let rows = value["rows"].as_u64().ok_or_else(|| bad("rows"))? as usize;
        let cols = value["cols"].as_u64().ok_or_else(|| bad("cols"))? as usize;
        let entries = value["entries"].as_array().ok_or_else(|| bad("entries"))?;
        let mut data = Vec::with_capacity(rows * cols);
        for row in entries {
            for e in row.as_array().ok_or_else(|| bad("row"))? {
                let s = e.as_str().ok_or_else(|| bad("entry"))?;
                data.push(super::scalar::parse_rational(s).ok_or_else(|| bad(s))?);
            }
        }
        Matrix::new(rows, cols, data)
    }
}
