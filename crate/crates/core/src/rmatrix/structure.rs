use serde::Serialize;

use super::certificate::certificate_domains;
use super::partition::PartitionChain;
use super::RMatrix;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Scalar};
use crate::tree::VertexId;

/// Zero pattern of a matrix relative to a block partition of its indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockShape {
    /// Blocks above the diagonal vanish.
    Lower,
    /// Blocks below the diagonal vanish.
    Upper,
    Diagonal,
}

/// First entry `(row, col)` breaking `shape` for consecutive diagonal blocks of the given sizes.
pub fn block_triangular_violation<T: Scalar>(
    m: &Matrix<T>,
    sizes: &[usize],
    shape: BlockShape,
) -> Option<(usize, usize)> {
    let block_of: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &s)| std::iter::repeat(b).take(s))
        .collect();
    debug_assert_eq!(block_of.len(), m.rows());
    let scale = m.max_abs();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let must_vanish = match shape {
                BlockShape::Lower => block_of[i] < block_of[j],
                BlockShape::Upper => block_of[i] > block_of[j],
                BlockShape::Diagonal => block_of[i] != block_of[j],
            };
            if must_vanish && !m[(i, j)].near_zero(scale) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Outcome of each zero-pattern claim on R; `witnesses` names offending entries.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BlockChecks {
    pub v_lower: bool,
    pub vb_va_zero: bool,
    pub u_upper: bool,
    pub q_diagonal: bool,
    pub w_diagonal: bool,
    pub certificate_symmetric: bool,
    /// The explicit permutations `P' R P` have the claimed block-triangular shape.
    pub permutation_similarity: bool,
    pub witnesses: Vec<String>,
}

impl BlockChecks {
    pub fn all(&self) -> bool {
        self.v_lower
            && self.vb_va_zero
            && self.u_upper
            && self.q_diagonal
            && self.w_diagonal
            && self.certificate_symmetric
            && self.permutation_similarity
    }
}

fn check_consistent<T: Scalar>(r: &RMatrix<T>, chain: &PartitionChain) -> Result<()> {
    if r.pair != chain.pair {
        return Err(Error::InconsistentChain(format!(
            "R is for {:?}, chain for {:?}",
            r.pair, chain.pair
        )));
    }
    let mut all: Vec<VertexId> = chain.v.iter().flatten().copied().collect();
    all.sort();
    if all != r.index_order {
        return Err(Error::InconsistentChain(
            "V-blocks do not cover the index set of R".into(),
        ));
    }
    Ok(())
}

/// First `(x, y)` with `x` in `rows`, `y` in `cols`, `R_xy != 0`.
fn nonzero<T: Scalar>(
    r: &RMatrix<T>,
    rows: &[VertexId],
    cols: &[VertexId],
) -> Result<Option<(VertexId, VertexId)>> {
    let scale = r.scale();
    for &x in rows {
        for &y in cols {
            if !r.entry(x, y)?.near_zero(scale) {
                return Ok(Some((x, y)));
            }
        }
    }
    Ok(None)
}

/// Checks every block-zero claim on R that the partition chain implies.
pub fn verify_block_structure<T: Scalar>(
    r: &RMatrix<T>,
    chain: &PartitionChain,
) -> Result<BlockChecks> {
    check_consistent(r, chain)?;
    let mut out = BlockChecks {
        witnesses: Vec::new(),
        ..Default::default()
    };
    let mut note = |label: &str, hit: Option<(VertexId, VertexId)>| -> bool {
        match hit {
            None => true,
            Some((x, y)) => {
                out.witnesses.push(format!("{label}: R[{x},{y}] != 0"));
                false
            }
        }
    };

    // (i) R[V_i, V_j] = 0 for i < j
    let mut hit = None;
    'v: for i in 0..chain.v.len() {
        for j in i + 1..chain.v.len() {
            hit = nonzero(r, &chain.v[i], &chain.v[j])?;
            if hit.is_some() {
                break 'v;
            }
        }
    }
    let v_lower = note("V lower", hit);

    // (ii) R[V_B, V_A] = 0
    let vb_va_zero = note("V_B x V_A", nonzero(r, &chain.vb, &chain.va)?);

    // (iii) R[U_i, U_j] = 0 for i > j
    let mut hit = None;
    'u: for i in 0..chain.u.len() {
        for j in 0..i {
            hit = nonzero(r, &chain.u[i], &chain.u[j])?;
            if hit.is_some() {
                break 'u;
            }
        }
    }
    let u_upper = note("U upper", hit);

    // (iv) inside U_i: distinct Q blocks and the u_i row/column vanish
    let mut hit = None;
    'q: for (ui, qs) in chain.path_interior.iter().zip(&chain.q) {
        for (k, qk) in qs.iter().enumerate() {
            for (s, qs_) in qs.iter().enumerate() {
                if k != s {
                    hit = nonzero(r, qk, qs_)?;
                    if hit.is_some() {
                        break 'q;
                    }
                }
            }
            hit = nonzero(r, &[*ui], qk)?.or(nonzero(r, qk, &[*ui])?);
            if hit.is_some() {
                break 'q;
            }
        }
    }
    let q_diagonal = note("Q blocks", hit);

    // (v) R[W_i, W_j] = 0 for i != j
    let mut hit = None;
    'w: for (i, wi) in chain.w.iter().enumerate() {
        for (j, wj) in chain.w.iter().enumerate() {
            if i != j {
                hit = nonzero(r, wi, wj)?;
                if hit.is_some() {
                    break 'w;
                }
            }
        }
    }
    let w_diagonal = note("W blocks", hit);

    // (vi) R[E, E] symmetric on every certificate domain
    let mut certificate_symmetric = true;
    for (e, _) in certificate_domains(chain) {
        if !r.block(&e, &e)?.is_symmetric() {
            out.witnesses
                .push(format!("R[E,E] asymmetric for E = {e:?}"));
            certificate_symmetric = false;
        }
    }

    let permutation_similarity = permutation_checks(r, chain, &mut out.witnesses)?;

    out.v_lower = v_lower;
    out.vb_va_zero = vb_va_zero;
    out.u_upper = u_upper;
    out.q_diagonal = q_diagonal;
    out.w_diagonal = w_diagonal;
    out.certificate_symmetric = certificate_symmetric;
    out.permutation_similarity = permutation_similarity;
    Ok(out)
}

/// Builds each permutation explicitly and confirms the permuted block shape.
fn permutation_checks<T: Scalar>(
    r: &RMatrix<T>,
    chain: &PartitionChain,
    witnesses: &mut Vec<String>,
) -> Result<bool> {
    let mut ok = true;
    let mut run = |label: &str,
                   whole: &[VertexId],
                   blocks: Vec<&[VertexId]>,
                   shape: BlockShape|
     -> Result<()> {
        let m = r.block(whole, whole)?;
        let local = |v: &VertexId| {
            whole
                .iter()
                .position(|w| w == v)
                .expect("block inside parent")
        };
        let order: Vec<usize> = blocks.iter().flat_map(|b| b.iter().map(local)).collect();
        let sizes: Vec<usize> = blocks.iter().map(|b| b.len()).collect();
        let permuted = m.permute_symmetric(&order)?;
        if let Some((i, j)) = block_triangular_violation(&permuted, &sizes, shape) {
            let flat: Vec<VertexId> = blocks.iter().flat_map(|b| b.iter().copied()).collect();
            witnesses.push(format!(
                "{label}: P'RP entry ({},{}) != 0",
                flat[i], flat[j]
            ));
            ok = false;
        }
        Ok(())
    };

    run(
        "V blocks",
        &r.index_order,
        chain.v.iter().map(Vec::as_slice).collect(),
        BlockShape::Lower,
    )?;
    run(
        "V_A/V_B",
        &chain.v[0],
        vec![&chain.va, &chain.vb],
        BlockShape::Upper,
    )?;
    let mut va_sorted = chain.va.clone();
    va_sorted.sort();
    run(
        "U blocks",
        &va_sorted,
        chain.u.iter().map(Vec::as_slice).collect(),
        BlockShape::Upper,
    )?;
    for (ui, (set, qs)) in chain.path_interior.iter().zip(chain.u.iter().zip(&chain.q)) {
        let head = [*ui];
        let mut blocks: Vec<&[VertexId]> = vec![&head];
        blocks.extend(qs.iter().map(Vec::as_slice));
        run("U_i / Q blocks", set, blocks, BlockShape::Diagonal)?;
    }
    run(
        "W blocks",
        &chain.vb,
        chain.w.iter().map(Vec::as_slice).collect(),
        BlockShape::Diagonal,
    )?;
    Ok(ok)
}

/// Every determinant in the factorization cascade, plus whether each level holds.
#[derive(Clone, Debug)]
pub struct DetCascade<T> {
    pub det_r: T,
    pub det_v: Vec<T>,
    pub det_va: T,
    pub det_vb: T,
    pub det_u: Vec<T>,
    pub r_uu: Vec<T>,
    pub det_q: Vec<Vec<T>>,
    pub det_w: Vec<T>,
    /// `det R = prod det R[V_i, V_i]`.
    pub v_product: bool,
    /// `det R[V_1, V_1] = det R[V_A, V_A] det R[V_B, V_B]`.
    pub v1_split: bool,
    /// `det R[V_A, V_A] = prod det R[U_i, U_i]`.
    pub va_product: bool,
    /// `det R[U_i, U_i] = R_{u_i u_i} prod_k det R[Q_ik, Q_ik]` for every i.
    pub u_blocks: bool,
    /// `det R[V_B, V_B] = prod det R[W_j, W_j]`.
    pub vb_product: bool,
}

impl<T: Scalar> DetCascade<T> {
    pub fn holds(&self) -> bool {
        self.v_product && self.v1_split && self.va_product && self.u_blocks && self.vb_product
    }

    /// Leaf determinants are the ones the PSD certificates sign.
    pub fn leaves_nonnegative(&self) -> bool {
        self.det_v.iter().skip(1).all(|x| x.ge_zero(0.0))
            && self.det_q.iter().flatten().all(|x| x.ge_zero(0.0))
            && self.det_w.iter().all(|x| x.ge_zero(0.0))
            && self.r_uu.iter().all(|x| x.ge_zero(0.0))
    }
}

fn product<T: Scalar>(xs: &[T]) -> T {
    xs.iter().cloned().fold(T::one(), |a, b| a * b)
}

fn same<T: Scalar>(x: &T, y: &T) -> bool {
    x.approx_eq(y, x.to_f64().abs().max(y.to_f64().abs()))
}

pub fn det_factorization_check<T: Scalar>(
    r: &RMatrix<T>,
    chain: &PartitionChain,
) -> Result<DetCascade<T>> {
    check_consistent(r, chain)?;
    let det_r = r.det()?;
    let det_v = chain
        .v
        .iter()
        .map(|s| r.block_det(s))
        .collect::<Result<Vec<_>>>()?;
    let det_va = r.block_det(&chain.va)?;
    let det_vb = r.block_det(&chain.vb)?;
    let det_u = chain
        .u
        .iter()
        .map(|s| r.block_det(s))
        .collect::<Result<Vec<_>>>()?;
    let r_uu = chain
        .path_interior
        .iter()
        .map(|&u| r.entry(u, u).cloned())
        .collect::<Result<Vec<_>>>()?;
    let det_q = chain
        .q
        .iter()
        .map(|qs| {
            qs.iter()
                .map(|s| r.block_det(s))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let det_w = chain
        .w
        .iter()
        .map(|s| r.block_det(s))
        .collect::<Result<Vec<_>>>()?;

    let v_product = same(&det_r, &product(&det_v));
    let v1_split = same(&det_v[0], &(det_va.clone() * det_vb.clone()));
    let va_product = same(&det_va, &product(&det_u));
    let u_blocks = det_u
        .iter()
        .zip(r_uu.iter().zip(&det_q))
        .all(|(du, (ruu, dq))| same(du, &(ruu.clone() * product(dq))));
    let vb_product = same(&det_vb, &product(&det_w));
    Ok(DetCascade {
        det_r,
        det_v,
        det_va,
        det_vb,
        det_u,
        r_uu,
        det_q,
        det_w,
        v_product,
        v1_split,
        va_product,
        u_blocks,
        vb_product,
    })
}
