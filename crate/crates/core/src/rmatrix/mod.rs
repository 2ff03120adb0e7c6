//! The R matrix of a vertex pair and the partition chain that exposes its block structure.
//!
//! For the pair `(a, b)`, vertex `a` plays the role of "1" and `b` the role of "2". R is
//! indexed by the remaining `n - 2` vertices in ascending label order:
//!
//! ```text
//! R_xy = -d_ba + d_xa + d_by - d_xy              x != y
//! R_xx = -d_ba + d_xa + d_bx + sum_k d_xk
//! ```
//!
//! `s†_ab <= 0` iff `det R >= 0`, and the vertex partitions in [`partition`] make R block
//! triangular with PSD diagonal blocks.

mod certificate;
mod partition;
mod structure;

pub use certificate::{certificate_domains, psd_certificate, PsdCertificate};
pub use partition::{
    partition_chain, partition_v, q_components, split_ab, u_partition, w_components, PartitionChain,
};
pub use structure::{
    block_triangular_violation, det_factorization_check, verify_block_structure, BlockChecks,
    BlockShape, DetCascade,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::laplacian::{ones_cinv_ones, DistLapBundle};
use crate::linalg::{Matrix, Scalar};
use crate::tree::{VertexId, WeightedTree};

#[derive(Clone, Debug)]
pub struct RMatrix<T> {
    pub pair: (VertexId, VertexId),
    /// Vertices indexing the rows and columns of `entries`, ascending.
    pub index_order: Vec<VertexId>,
    pub entries: Matrix<T>,
    /// Row of each vertex (by zero-based vertex index), `None` for `a` and `b`.
    position: Vec<Option<usize>>,
    distances: Matrix<T>,
}

impl<T: Scalar> RMatrix<T> {
    /// Builds R from a distance matrix; `a`, `b` are validated against its size.
    pub fn from_distances(d: &Matrix<T>, a: VertexId, b: VertexId) -> Result<Self> {
        let n = d.rows();
        for v in [a, b] {
            if v.0 == 0 || v.0 > n {
                return Err(Error::BadVertexId { id: v.0, n });
            }
        }
        if a == b {
            return Err(Error::SameVertex(a.0));
        }
        let (ia, ib) = (a.index(), b.index());
        let index_order: Vec<VertexId> = (1..=n)
            .map(VertexId)
            .filter(|&v| v != a && v != b)
            .collect();
        let mut position = vec![None; n];
        for (k, v) in index_order.iter().enumerate() {
            position[v.index()] = Some(k);
        }
        let eta = d.row_sums();
        let d_ba = d[(ib, ia)].clone();
        let m = index_order.len();
        let entries = Matrix::from_fn(m, m, |r, c| {
            let (x, y) = (index_order[r].index(), index_order[c].index());
            let base = d[(x, ia)].clone() - d_ba.clone();
            if x == y {
                base + d[(ib, x)].clone() + eta[x].clone()
            } else {
                base + d[(ib, y)].clone() - d[(x, y)].clone()
            }
        });
        Ok(Self {
            pair: (a, b),
            index_order,
            entries,
            position,
            distances: d.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.index_order.len()
    }

    pub fn position(&self, v: VertexId) -> Result<usize> {
        self.position
            .get(v.index())
            .copied()
            .flatten()
            .ok_or(Error::InconsistentChain(format!(
                "vertex {v} does not index R for pair {:?}",
                self.pair
            )))
    }

    pub fn entry(&self, x: VertexId, y: VertexId) -> Result<&T> {
        Ok(&self.entries[(self.position(x)?, self.position(y)?)])
    }

    /// `R[rows, cols]` addressed by vertex labels.
    pub fn block(&self, rows: &[VertexId], cols: &[VertexId]) -> Result<Matrix<T>> {
        let r: Vec<usize> = rows
            .iter()
            .map(|&v| self.position(v))
            .collect::<Result<_>>()?;
        let c: Vec<usize> = cols
            .iter()
            .map(|&v| self.position(v))
            .collect::<Result<_>>()?;
        self.entries.submatrix(&r, &c)
    }

    /// Determinant of `R[set, set]`; the empty block has determinant 1.
    pub fn block_det(&self, set: &[VertexId]) -> Result<T> {
        self.block(set, set)?.det()
    }

    pub fn det(&self) -> Result<T> {
        self.entries.det()
    }

    pub fn distance(&self, x: VertexId, y: VertexId) -> &T {
        &self.distances[(x.index(), y.index())]
    }

    /// Tolerance scale for zero tests on entries.
    pub fn scale(&self) -> f64 {
        self.entries.max_abs()
    }
}

/// R for the pair `(a, b)` of `tree`. For `n = 2` the result is the empty matrix.
pub fn build_r<T: Scalar>(tree: &WeightedTree, a: VertexId, b: VertexId) -> Result<RMatrix<T>> {
    tree.check(a)?;
    tree.check(b)?;
    RMatrix::from_distances(&tree.distance_matrix(), a, b)
}

/// Both sides of the sign link between `s†_ab` and `det R`.
#[derive(Clone, Debug, Serialize)]
pub struct SignLink<T: Scalar> {
    pub pair: (VertexId, VertexId),
    #[serde(serialize_with = "ser_scalar")]
    pub sdag_ab: T,
    #[serde(serialize_with = "ser_scalar")]
    pub det_r: T,
    #[serde(serialize_with = "ser_scalar")]
    pub gamma: T,
    #[serde(serialize_with = "ser_scalar")]
    pub ones_cinv_ones: T,
    /// `1' C^{-1} 1 = -det(R) / γ` with `C = S(a|b)`.
    pub identity_holds: bool,
    /// `s†_ab <= 0` iff `det R >= 0`.
    pub consistent: bool,
}

impl<T: Scalar> SignLink<T> {
    pub fn holds(&self) -> bool {
        self.identity_holds && self.consistent
    }
}

pub(crate) fn ser_scalar<T: Scalar, S: serde::Serializer>(
    x: &T,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    x.to_json().serialize(s)
}

pub fn sign_link_check<T: Scalar>(
    tree: &WeightedTree,
    a: VertexId,
    b: VertexId,
) -> Result<SignLink<T>> {
    tree.check(a)?;
    tree.check(b)?;
    if a == b {
        return Err(Error::SameVertex(a.0));
    }
    let bundle = DistLapBundle::<T>::build_with(tree, crate::laplacian::Validation::Structural)?;
    let r = RMatrix::from_distances(&bundle.d, a, b)?;
    sign_link_from(&bundle, &r)
}

/// Sign link for an R already built from `bundle`.
pub fn sign_link_from<T: Scalar>(bundle: &DistLapBundle<T>, r: &RMatrix<T>) -> Result<SignLink<T>> {
    let (a, b) = r.pair;
    let sdag_ab = bundle.s_dag[(a.index(), b.index())].clone();
    let det_r = r.det()?;
    let ones = ones_cinv_ones(&bundle.s, a.index(), b.index())?;
    let predicted = -det_r.clone() / bundle.gamma.clone();
    let scale = ones.to_f64().abs().max(predicted.to_f64().abs());
    let identity_holds = ones.approx_eq(&predicted, scale);
    let sdag_scale = bundle.s_dag.max_abs();
    let consistent = sdag_ab.le_zero(sdag_scale) == det_r.ge_zero(0.0);
    Ok(SignLink {
        pair: r.pair,
        sdag_ab,
        det_r,
        gamma: bundle.gamma.clone(),
        ones_cinv_ones: ones,
        identity_holds,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Rational;
    use crate::tree::{ids, path, t16};

    type Q = Rational;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    #[test]
    fn three_vertex_path() {
        let t = path(3);
        let r: RMatrix<Q> = build_r(&t, VertexId(1), VertexId(2)).unwrap();
        // -d21 + d31 + d23 + (d31 + d32) = -1 + 2 + 1 + 3
        assert_eq!(r.entries, Matrix::from_i64_rows(&[&[5]]));
        let link: SignLink<Q> = sign_link_check(&t, VertexId(1), VertexId(2)).unwrap();
        assert_eq!(link.det_r, q(5));
        assert!(link.sdag_ab <= q(0));
        assert!(link.holds());
    }

    #[test]
    fn two_vertex_tree_has_empty_r() {
        let w = Q::new(3.into(), 2.into());
        let t = WeightedTree::new(2, vec![(1, 2, w.clone())]).unwrap();
        let r: RMatrix<Q> = build_r(&t, VertexId(1), VertexId(2)).unwrap();
        assert_eq!(r.dim(), 0);
        assert_eq!(r.det().unwrap(), q(1));
        let link: SignLink<Q> = sign_link_check(&t, VertexId(2), VertexId(1)).unwrap();
        assert_eq!(link.sdag_ab, -(q(1) / (q(4) * w)));
        assert!(link.holds());
    }

    #[test]
    fn diagonal_is_positive_and_cross_component_entries_vanish() {
        let t = t16();
        let r: RMatrix<Q> = build_r(&t, VertexId(1), VertexId(2)).unwrap();
        assert_eq!(r.dim(), 14);
        assert!(r.entries.diagonal().iter().all(|x| *x > q(0)));
        for y in ids(&[7, 8, 9]) {
            assert_eq!(*r.entry(VertexId(10), y).unwrap(), q(0));
        }
        assert!(r.entry(VertexId(1), VertexId(3)).is_err());
    }

    #[test]
    fn rejects_bad_pairs() {
        let t = path(4);
        assert_eq!(
            build_r::<Q>(&t, VertexId(2), VertexId(2)).unwrap_err(),
            Error::SameVertex(2)
        );
        assert_eq!(
            build_r::<Q>(&t, VertexId(2), VertexId(5)).unwrap_err(),
            Error::BadVertexId { id: 5, n: 4 }
        );
        assert_eq!(
            sign_link_check::<Q>(&t, VertexId(3), VertexId(3)).unwrap_err(),
            Error::SameVertex(3)
        );
    }

    #[test]
    fn every_pair_of_t16_links_consistently() {
        let t = t16();
        let bundle = DistLapBundle::<Q>::build(&t).unwrap();
        for a in t.vertices() {
            for b in t.vertices().filter(|&b| b != a) {
                let r = RMatrix::from_distances(&bundle.d, a, b).unwrap();
                let link = sign_link_from(&bundle, &r).unwrap();
                assert!(link.holds(), "pair ({a},{b})");
                assert!(link.det_r >= q(0));
            }
        }
    }
}
