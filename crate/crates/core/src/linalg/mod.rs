//! Dense linear algebra over exact rationals (default) and `f64`.

mod matrix;
mod ops;
mod scalar;

pub use matrix::Matrix;
pub use ops::{eigen_pinv, matrix_det_lemma_check, symmetric_eigenvalues};
pub use scalar::{float_tolerance, parse_rational, Rational, Scalar, TOL_ABS, TOL_REL};
