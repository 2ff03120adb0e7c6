use serde::Serialize;

use super::partition::PartitionChain;
use super::{ser_scalar, RMatrix};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Scalar};
use crate::tree::{VertexId, WeightedTree};

/// `R[E, E] = P + Λ` with `P` carrying the constant diagonal `2 d(δ, α)`.
#[derive(Clone, Debug, Serialize)]
pub struct PsdCertificate<T: Scalar> {
    pub e: Vec<VertexId>,
    pub alpha: VertexId,
    /// Neighbour of `alpha` inside `E`.
    pub u: VertexId,
    /// Farthest non-pendant vertex of E from `alpha`; `u` when E has none.
    pub delta: VertexId,
    /// Pendant neighbour of `delta` lying farther from `alpha`.
    pub pendant: Option<VertexId>,
    #[serde(skip)]
    pub p: Matrix<T>,
    #[serde(skip)]
    pub lambda: Vec<T>,
    #[serde(serialize_with = "ser_scalar")]
    pub two_d_delta_alpha: T,
    pub symmetric: bool,
    pub decomposition_exact: bool,
    pub lambda_nonneg: bool,
    pub p_psd: bool,
    pub r_psd: bool,
    /// `R_{i δ} = R_{i x_t}` for every other `i` in E.
    pub duplicated_column: Option<bool>,
    /// `R_{δ x_t} = 2 d(δ, α)`.
    pub pendant_entry: Option<bool>,
}

impl<T: Scalar> PsdCertificate<T> {
    pub fn holds(&self) -> bool {
        self.symmetric
            && self.decomposition_exact
            && self.lambda_nonneg
            && self.p_psd
            && self.r_psd
            && self.duplicated_column != Some(false)
            && self.pendant_entry != Some(false)
    }
}

/// Certificate domains used by the sign argument: `(V_j, a)` for `j >= 2`,
/// `(Q_ik, u_i)` and `(W_j, b)`.
pub fn certificate_domains(chain: &PartitionChain) -> Vec<(Vec<VertexId>, VertexId)> {
    let (a, b) = chain.pair;
    let mut out: Vec<(Vec<VertexId>, VertexId)> =
        chain.v.iter().skip(1).map(|s| (s.clone(), a)).collect();
    for (ui, qs) in chain.path_interior.iter().zip(&chain.q) {
        out.extend(qs.iter().map(|s| (s.clone(), *ui)));
    }
    out.extend(chain.w.iter().map(|s| (s.clone(), b)));
    out
}

fn bad(msg: String) -> Error {
    Error::BadCertificateDomain(msg)
}

/// Validates `E` against `alpha` and returns the neighbour of `alpha` in `E`.
fn validate_domain(
    tree: &WeightedTree,
    pair: (VertexId, VertexId),
    e: &[VertexId],
    alpha: VertexId,
) -> Result<VertexId> {
    let (a, b) = pair;
    tree.check(alpha)?;
    for &x in e {
        tree.check(x)?;
    }
    if e.is_empty() {
        return Err(bad("E is empty".into()));
    }
    if !tree.path_vertices(a, b)?.contains(&alpha) {
        return Err(bad(format!("{alpha} is not on the path from {a} to {b}")));
    }
    if e.contains(&a) || e.contains(&b) || e.contains(&alpha) {
        return Err(bad(format!("E = {e:?} contains {a}, {b} or {alpha}")));
    }
    if !tree.is_connected_set(e)? {
        return Err(bad(format!("E = {e:?} is not connected")));
    }
    let comps = tree.components_after_deletion(alpha)?;
    if !comps.iter().any(|c| e.iter().all(|x| c.contains(x))) {
        return Err(bad(format!(
            "E = {e:?} spans several components of T \\ ({alpha})"
        )));
    }
    tree.neighbors(alpha)?
        .into_iter()
        .find(|v| e.contains(v))
        .ok_or_else(|| bad(format!("E = {e:?} has no neighbour of {alpha}")))
}

/// Builds and checks the `P + Λ` certificate that `R[E, E]` is PSD.
///
/// A symmetric `R[E, E]` that fails the PSD test yields [`Error::FoundIndefinite`].
pub fn psd_certificate<T: Scalar>(
    tree: &WeightedTree,
    r: &RMatrix<T>,
    e: &[VertexId],
    alpha: VertexId,
) -> Result<PsdCertificate<T>> {
    let u = validate_domain(tree, r.pair, e, alpha)?;
    let d_alpha = |x: VertexId| r.distance(x, alpha).clone();

    let mut delta = u;
    for &x in e {
        if tree.degree(x)? > 1 {
            let better = d_alpha(x) > d_alpha(delta) || (d_alpha(x) == d_alpha(delta) && x < delta);
            if tree.degree(delta)? == 1 || better {
                delta = x;
            }
        }
    }
    let pendant = if tree.degree(delta)? > 1 {
        tree.neighbors(delta)?
            .into_iter()
            .filter(|y| e.contains(y) && tree.degree(*y).map_or(false, |g| g == 1))
            .min()
    } else {
        None
    };

    let rr = r.block(e, e)?;
    let scale = rr.max_abs();
    let two_d = d_alpha(delta) + d_alpha(delta);
    let k = e.len();
    let lambda: Vec<T> = (0..k).map(|i| rr[(i, i)].clone() - two_d.clone()).collect();
    let p = Matrix::from_fn(k, k, |i, j| {
        if i == j {
            two_d.clone()
        } else {
            rr[(i, j)].clone()
        }
    });

    let symmetric = rr.is_symmetric();
    let rebuilt = p.try_add(&Matrix::diag(&lambda))?;
    let decomposition_exact = rebuilt.approx_eq(&rr);
    let lambda_nonneg = lambda.iter().all(|l| l.ge_zero(scale));
    let p_psd = p.is_symmetric() && p.is_psd()?;
    let r_psd = symmetric && rr.is_psd()?;
    if symmetric && !r_psd {
        return Err(Error::FoundIndefinite(e.iter().map(|v| v.0).collect()));
    }

    let (duplicated_column, pendant_entry) = match pendant {
        Some(xt) => {
            let dup = e
                .iter()
                .filter(|&&i| i != delta && i != xt)
                .map(|&i| Ok(r.entry(i, delta)?.approx_eq(r.entry(i, xt)?, scale)))
                .collect::<Result<Vec<bool>>>()?
                .into_iter()
                .all(|ok| ok);
            (
                Some(dup),
                Some(r.entry(delta, xt)?.approx_eq(&two_d, scale)),
            )
        }
        None => (None, None),
    };

    Ok(PsdCertificate {
        e: e.to_vec(),
        alpha,
        u,
        delta,
        pendant,
        p,
        lambda,
        two_d_delta_alpha: two_d,
        symmetric,
        decomposition_exact,
        lambda_nonneg,
        p_psd,
        r_psd,
        duplicated_column,
        pendant_entry,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Rational;
    use crate::rmatrix::{build_r, partition_chain};
    use crate::tree::{ids, path, t16};

    type Q = Rational;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    #[test]
    fn single_vertex_domain() {
        let t = t16();
        let r: RMatrix<Q> = build_r(&t, VertexId(1), VertexId(2)).unwrap();
        let c = psd_certificate(&t, &r, &ids(&[10]), VertexId(1)).unwrap();
        assert_eq!(c.delta, VertexId(10));
        assert_eq!(c.pendant, None);
        assert_eq!(
            c.p,
            Matrix::diag(&[q(2) * r.distance(VertexId(10), VertexId(1)).clone()])
        );
        assert!(c.holds());
        assert!(*r.entry(VertexId(10), VertexId(10)).unwrap() > q(0));
    }

    #[test]
    fn two_vertex_domain_gives_constant_p() {
        // a=1, b=2 on the path 4-1-2, with the branch 1-5-6 hanging off 1
        let t = WeightedTree::new(
            6,
            vec![
                (1, 2, q(1)),
                (1, 4, q(2)),
                (1, 5, q(3)),
                (5, 6, q(4)),
                (2, 3, q(1)),
            ],
        )
        .unwrap();
        let r: RMatrix<Q> = build_r(&t, VertexId(1), VertexId(2)).unwrap();
        let c = psd_certificate(&t, &r, &ids(&[5, 6]), VertexId(1)).unwrap();
        assert_eq!(c.u, VertexId(5));
        assert_eq!(c.delta, VertexId(5));
        assert_eq!(c.pendant, Some(VertexId(6)));
        assert_eq!(c.p, Matrix::from_i64_rows(&[&[6, 6], &[6, 6]]));
        assert!(c.holds());
        assert_eq!(c.pendant_entry, Some(true));
    }

    #[test]
    fn t16_every_proof_domain() {
        let t = t16();
        let r: RMatrix<Q> = build_r(&t, VertexId(1), VertexId(2)).unwrap();
        let chain = partition_chain(&t, VertexId(1), VertexId(2)).unwrap();
        let domains = certificate_domains(&chain);
        assert_eq!(domains[0], (ids(&[7, 8, 9]), VertexId(1)));
        assert_eq!(domains[1], (ids(&[10]), VertexId(1)));
        assert_eq!(domains.len(), 2 + 3 + 2);
        for (e, alpha) in domains {
            let c = psd_certificate(&t, &r, &e, alpha).unwrap();
            assert!(c.holds(), "E = {e:?}");
        }
    }

    #[test]
    fn rejects_bad_domains() {
        let t = t16();
        let r: RMatrix<Q> = build_r(&t, VertexId(1), VertexId(2)).unwrap();
        let err = |e: &[usize], alpha: usize| {
            psd_certificate(&t, &r, &ids(e), VertexId(alpha)).unwrap_err()
        };
        assert!(matches!(err(&[], 1), Error::BadCertificateDomain(_)));
        assert!(matches!(err(&[10], 7), Error::BadCertificateDomain(_)));
        assert!(matches!(err(&[7, 10], 1), Error::BadCertificateDomain(_)));
        assert!(matches!(err(&[2, 5], 1), Error::BadCertificateDomain(_)));
        assert!(matches!(err(&[8, 9], 1), Error::BadCertificateDomain(_)));
    }

    #[test]
    fn path_tail_domain() {
        let t = path(5);
        let r: RMatrix<Q> = build_r(&t, VertexId(1), VertexId(2)).unwrap();
        let c = psd_certificate(&t, &r, &ids(&[3, 4, 5]), VertexId(2)).unwrap();
        assert_eq!((c.delta, c.pendant), (VertexId(4), Some(VertexId(5))));
        assert!(c.holds());
    }
}
