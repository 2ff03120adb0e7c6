//! Distance Laplacians of weighted trees in exact arithmetic.
//!
//! Builds `S = Δ - D` for a weighted tree, its Moore-Penrose inverse through the closed
//! form `(S + J)^{-1} - J/n²`, the R matrix attached to a vertex pair together with its
//! vertex partitions, and a seeded harness that checks the Z-matrix property of `S†` and
//! every intermediate identity on random trees.

pub mod cli;
pub mod error;
pub mod laplacian;
pub mod linalg;
pub mod rmatrix;
pub mod tree;
pub mod verify;

pub use error::{Error, Result};
pub use laplacian::{
    check_p1_identity, classical_laplacian, is_m_matrix_symmetric, is_z_matrix, pinv_centered,
    sdag_entry_via_cofactor_path, ClassicalLapBundle, DistLapBundle, Validation,
};
pub use linalg::{Matrix, Rational, Scalar};
pub use tree::{VertexId, Weight, WeightedTree};
