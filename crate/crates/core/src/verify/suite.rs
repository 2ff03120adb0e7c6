use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{splitmix64, Backend, CheckCount, CheckGroup, PairMode};
use crate::error::Result;
use crate::laplacian::{
    centering, check_p1_identity, classical_laplacian, is_m_matrix_symmetric, moore_penrose_holds,
    ones_cinv_ones, z_violation, DistLapBundle, Validation,
};
use crate::linalg::{eigen_pinv, symmetric_eigenvalues, Matrix, Rational, Scalar, TOL_REL};
use crate::rmatrix::{
    certificate_domains, det_factorization_check, partition_chain, psd_certificate, sign_link_from,
    verify_block_structure, RMatrix,
};
use crate::tree::{VertexId, WeightedTree};

use super::paper::is_euclidean_distance_matrix;

type Pair = (VertexId, VertexId);

/// One failed check with enough context to reproduce it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub check: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<Pair>,
    pub witness: String,
    pub tree: serde_json::Value,
}

/// Outcome of every configured check on one tree.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TreeCheck {
    pub n: usize,
    pub digest: String,
    pub pairs: Vec<Pair>,
    /// Conjunction over all runs of each named check.
    pub checks: BTreeMap<String, bool>,
    #[serde(skip)]
    pub counts: BTreeMap<String, CheckCount>,
    pub failures: Vec<Failure>,
}

impl TreeCheck {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

struct Recorder {
    tree: serde_json::Value,
    out: TreeCheck,
}

impl Recorder {
    fn record(
        &mut self,
        name: &str,
        pair: Option<Pair>,
        ok: bool,
        witness: impl FnOnce() -> String,
    ) {
        let count = self.out.counts.entry(name.to_string()).or_default();
        count.run += 1;
        let slot = self.out.checks.entry(name.to_string()).or_insert(true);
        *slot &= ok;
        if !ok {
            count.failed += 1;
            self.out.failures.push(Failure {
                check: name.to_string(),
                pair,
                witness: witness(),
                tree: self.tree.clone(),
            });
        }
    }

    /// Records `Ok(true)` as a pass; `Ok(false)` and errors as failures.
    fn record_result(
        &mut self,
        name: &str,
        pair: Option<Pair>,
        r: Result<bool>,
        witness: impl FnOnce() -> String,
    ) {
        match r {
            Ok(ok) => self.record(name, pair, ok, witness),
            Err(e) => self.record(name, pair, false, || format!("{}: {e}", witness())),
        }
    }
}

/// Pairs receiving per-pair checks for a tree on `n` vertices.
pub fn select_pairs(n: usize, seed: u64, mode: PairMode) -> Vec<Pair> {
    let all = || -> Vec<Pair> {
        (1..=n)
            .flat_map(|a| {
                (1..=n)
                    .filter(move |&b| b != a)
                    .map(move |b| (VertexId(a), VertexId(b)))
            })
            .collect()
    };
    if n <= 8 || mode == PairMode::All {
        return all();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ 0x7061_6972));
    let mut pairs: Vec<Pair> = rand::seq::index::sample(&mut rng, n * (n - 1), 10)
        .into_iter()
        .map(|k| {
            let a = k / (n - 1);
            let b = k % (n - 1);
            let b = if b < a { b } else { b + 1 };
            (VertexId::from_index(a), VertexId::from_index(b))
        })
        .collect();
    pairs.sort();
    pairs
}

/// Runs the configured check groups on one tree and the given ordered pairs.
pub fn check_tree(
    tree: &WeightedTree,
    pairs: &[Pair],
    backend: Backend,
    groups: &BTreeSet<CheckGroup>,
) -> TreeCheck {
    let mut rec = Recorder {
        tree: tree.to_json(),
        out: TreeCheck {
            n: tree.n(),
            digest: tree.digest(),
            pairs: pairs.to_vec(),
            ..Default::default()
        },
    };
    match backend {
        Backend::Exact => run::<Rational>(tree, pairs, groups, &mut rec),
        Backend::Float => run::<f64>(tree, pairs, groups, &mut rec),
    }
    rec.out
}

fn run<T: Scalar>(
    tree: &WeightedTree,
    pairs: &[Pair],
    groups: &BTreeSet<CheckGroup>,
    rec: &mut Recorder,
) {
    let bundle = match DistLapBundle::<T>::build_with(tree, Validation::Structural) {
        Ok(b) => b,
        Err(e) => {
            rec.record("bundle", None, false, || e.to_string());
            return;
        }
    };
    if groups.contains(&CheckGroup::Lemmas) {
        lemmas(tree, &bundle, pairs, rec);
    }
    if groups.contains(&CheckGroup::Z) {
        let v = z_violation(&bundle.s_dag);
        let witness = match &v {
            Ok(Some((i, j))) => format!("S†({},{}) = {} > 0", i + 1, j + 1, bundle.s_dag[(*i, *j)]),
            _ => String::new(),
        };
        rec.record_result("sdag_z", None, v.map(|x| x.is_none()), || witness);
        rec.record_result("s_m_matrix", None, is_m_matrix_symmetric(&bundle.s), || {
            "S is not an M matrix".into()
        });
        rec.record_result(
            "sdag_m_matrix",
            None,
            is_m_matrix_symmetric(&bundle.s_dag),
            || "S† is not an M matrix".into(),
        );
    }
    if groups.contains(&CheckGroup::Edm) {
        rec.record_result(
            "d_edm",
            None,
            is_euclidean_distance_matrix(&bundle.d),
            || "-J_c D J_c / 2 is not PSD".into(),
        );
    }
    if groups.contains(&CheckGroup::Rstructure) {
        for &pair in pairs {
            rstructure(tree, &bundle, pair, rec);
        }
    }
    if groups.contains(&CheckGroup::Backends) {
        backends(tree, &bundle, rec);
    }
}

fn lemmas<T: Scalar>(
    tree: &WeightedTree,
    b: &DistLapBundle<T>,
    pairs: &[Pair],
    rec: &mut Recorder,
) {
    let n = b.n();
    let nn = T::from_i64((n * n) as i64);
    rec.record_result("s_psd", None, b.s.is_psd(), || {
        "S has a negative eigenvalue".into()
    });

    if T::EXACT {
        let det_s = b.s.det();
        let zero = det_s
            .as_ref()
            .map(|d| d.near_zero(0.0))
            .map_err(Clone::clone);
        rec.record_result("det_s_zero", None, zero.clone(), || {
            format!("det S = {det_s:?}")
        });
        let rank = zero.map(|z| z && !b.gamma.near_zero(0.0));
        rec.record_result("s_rank", None, rank, || format!("gamma = {}", b.gamma));
        rec.record("gamma_positive", None, !b.gamma.le_zero(0.0), || {
            format!("gamma = {}", b.gamma)
        });
        let adj =
            b.s.adjugate()
                .map(|a| a.approx_eq(&Matrix::ones(n, n).scale(&b.gamma)));
        rec.record_result("adj_gamma_j", None, adj, || {
            format!("adj(S) != {} J", b.gamma)
        });
        let det_star = b.s_star.det();
        let ok = det_star
            .as_ref()
            .map(|d| *d == nn.clone() * b.gamma.clone())
            .map_err(Clone::clone);
        rec.record_result("det_sstar", None, ok, || {
            format!(
                "det S* = {det_star:?}, n^2 gamma = {}",
                nn.clone() * b.gamma.clone()
            )
        });
    } else {
        let eig = symmetric_eigenvalues(&b.s.to_f64());
        let spread = eig.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let zeros = eig
            .iter()
            .filter(|l| l.abs() <= TOL_REL * spread.max(1.0))
            .count();
        rec.record("s_rank", None, zeros == 1, || {
            format!("{zeros} near-zero eigenvalues of S")
        });
        if b.gamma.is_finite() {
            rec.record("gamma_positive", None, !b.gamma.le_zero(0.0), || {
                format!("gamma = {}", b.gamma)
            });
            if let Ok(det_star) = b.s_star.det() {
                let target = nn.clone() * b.gamma.clone();
                if det_star.is_finite() && target.is_finite() {
                    let scale = det_star.to_f64().abs().max(target.to_f64().abs());
                    rec.record(
                        "det_sstar",
                        None,
                        det_star.approx_eq(&target, scale),
                        || format!("det S* = {det_star}, n^2 gamma = {target}"),
                    );
                }
            }
        }
    }

    let correction = Matrix::ones(n, n).scale(&(T::one() / nn.clone()));
    let inv = &b.s_dag + &correction;
    rec.record(
        "sstar_inverse",
        None,
        (&b.s_star * &inv).approx_eq(&Matrix::identity(n)),
        || "S* (S† + J/n^2) != I".into(),
    );
    rec.record(
        "s_sdag_centering",
        None,
        (&b.s * &b.s_dag).approx_eq(&centering(n)),
        || "S S† != I - J/n".into(),
    );
    rec.record(
        "moore_penrose",
        None,
        moore_penrose_holds(&b.s, &b.s_dag),
        || "Moore-Penrose identity fails".into(),
    );

    let dag_scale = b.s_dag.max_abs();
    for &(a, c) in pairs {
        let expect = &b.s_dag[(a.index(), c.index())];
        let got = ones_cinv_ones(&b.s, a.index(), c.index()).map(|x| x / nn.clone());
        let witness = format!("S†({a},{c}) = {expect}, 1'C^-1 1 / n^2 = {got:?}");
        rec.record_result(
            "entry_formula",
            Some((a, c)),
            got.map(|g| g.approx_eq(expect, dag_scale)),
            || witness,
        );
    }

    let p1 = classical_laplacian::<T>(tree).and_then(|cl| check_p1_identity(&cl, &b.d));
    rec.record_result("p1_identity", None, p1, || {
        "d_ij != a_ii + a_jj - 2 a_ij".into()
    });
}

fn rstructure<T: Scalar>(
    tree: &WeightedTree,
    b: &DistLapBundle<T>,
    pair: Pair,
    rec: &mut Recorder,
) {
    let (a, c) = pair;
    let r = match RMatrix::from_distances(&b.d, a, c) {
        Ok(r) => r,
        Err(e) => return rec.record("r_matrix", Some(pair), false, || e.to_string()),
    };
    match sign_link_from(b, &r) {
        Ok(link) => {
            let witness = format!(
                "det R = {}, s†_ab = {}, gamma = {}, 1'C^-1 1 = {}",
                link.det_r, link.sdag_ab, link.gamma, link.ones_cinv_ones
            );
            rec.record("sign_link", Some(pair), link.holds(), || witness.clone());
            rec.record("det_r_nonneg", Some(pair), link.det_r.ge_zero(0.0), || {
                witness
            });
        }
        Err(e) => rec.record("sign_link", Some(pair), false, || e.to_string()),
    }
    let chain = match partition_chain(tree, a, c) {
        Ok(ch) => ch,
        Err(e) => return rec.record("partition_chain", Some(pair), false, || e.to_string()),
    };
    match verify_block_structure(&r, &chain) {
        Ok(checks) => {
            let structural = checks.v_lower
                && checks.vb_va_zero
                && checks.u_upper
                && checks.q_diagonal
                && checks.w_diagonal
                && checks.certificate_symmetric;
            let witness = checks.witnesses.join("; ");
            rec.record("block_structure", Some(pair), structural, || {
                witness.clone()
            });
            rec.record(
                "permutation_similarity",
                Some(pair),
                checks.permutation_similarity,
                || witness,
            );
        }
        Err(e) => rec.record("block_structure", Some(pair), false, || e.to_string()),
    }
    let cascade = det_factorization_check(&r, &chain).map(|c| c.holds());
    rec.record_result("det_cascade", Some(pair), cascade, || {
        "determinant cascade mismatch".into()
    });
    for (e, alpha) in certificate_domains(&chain) {
        let cert = psd_certificate(tree, &r, &e, alpha);
        let witness = format!("E = {e:?}, alpha = {alpha}");
        match cert {
            Ok(c) => rec.record("certificates", Some(pair), c.holds(), || {
                format!(
                    "{witness}: {}",
                    serde_json::to_string(&c).unwrap_or_default()
                )
            }),
            Err(err) => rec.record("certificates", Some(pair), false, || {
                format!("{witness}: {err}")
            }),
        }
    }
}

fn backends<T: Scalar>(tree: &WeightedTree, b: &DistLapBundle<T>, rec: &mut Recorder) {
    let ours = b.s_dag.to_f64();
    match eigen_pinv(&b.s.to_f64()) {
        Ok(eig) => {
            let (diff, scale) = max_diff(&ours, &eig);
            let tol = crate::linalg::float_tolerance(scale);
            rec.record("eigen_pinv", None, diff <= tol, || {
                format!("max |S† - pinv_eig(S)| = {diff:e} > {tol:e}")
            });
        }
        Err(e) => rec.record("eigen_pinv", None, false, || e.to_string()),
    }
    let integral = tree.edges().iter().all(|e| e.weight.value().is_integer());
    if tree.n() <= 12 && integral {
        let other: Result<Matrix<f64>> = if T::EXACT {
            DistLapBundle::<f64>::build_with(tree, Validation::Structural).map(|x| x.s_dag)
        } else {
            DistLapBundle::<Rational>::build_with(tree, Validation::Structural)
                .map(|x| x.s_dag.to_f64())
        };
        match other {
            Ok(m) => {
                let (diff, _) = max_diff(&ours, &m);
                rec.record("cross_backend", None, diff <= 1e-9, || {
                    format!("max |exact - float| = {diff:e}")
                });
            }
            Err(e) => rec.record("cross_backend", None, false, || e.to_string()),
        }
    }
}

fn max_diff(x: &Matrix<f64>, y: &Matrix<f64>) -> (f64, f64) {
    let diff = x
        .entries()
        .zip(y.entries())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    (diff, x.max_abs().max(y.max_abs()))
}

/// Partition sets, block checks, `det R` and `s†_ab` for one pair, in exact arithmetic.
pub fn pair_report(tree: &WeightedTree, a: VertexId, b: VertexId) -> Result<serde_json::Value> {
    let bundle = DistLapBundle::<Rational>::build_with(tree, Validation::Structural)?;
    let r = RMatrix::from_distances(&bundle.d, a, b)?;
    let chain = partition_chain(tree, a, b)?;
    let link = sign_link_from(&bundle, &r)?;
    let blocks = verify_block_structure(&r, &chain)?;
    let cascade = det_factorization_check(&r, &chain)?;
    let certificates = certificate_domains(&chain)
        .into_iter()
        .map(|(e, alpha)| psd_certificate(tree, &r, &e, alpha).map(|c| c.holds()))
        .collect::<Result<Vec<bool>>>()?;
    let mut report = chain.to_report();
    report["checks"] = serde_json::json!({
        "v_lower": blocks.v_lower,
        "vb_va_zero": blocks.vb_va_zero,
        "u_upper": blocks.u_upper,
        "q_diagonal": blocks.q_diagonal,
        "w_diagonal": blocks.w_diagonal,
        "certificate_symmetric": blocks.certificate_symmetric,
        "permutation_similarity": blocks.permutation_similarity,
        "det_cascade": cascade.holds(),
        "sign_link": link.holds(),
        "certificates": certificates.iter().all(|&x| x),
    });
    report["detR"] = link.det_r.to_json();
    report["sdag_ab"] = link.sdag_ab.to_json();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{path, t16};

    #[test]
    fn pair_selection() {
        assert_eq!(select_pairs(3, 0, PairMode::Auto).len(), 6);
        assert_eq!(select_pairs(8, 0, PairMode::Auto).len(), 56);
        let p = select_pairs(12, 5, PairMode::Auto);
        assert_eq!(p.len(), 10);
        assert!(p.iter().all(|(a, b)| a != b && a.0 <= 12 && b.0 <= 12));
        assert_eq!(p, select_pairs(12, 5, PairMode::Auto));
        assert_eq!(select_pairs(12, 5, PairMode::All).len(), 132);
    }

    #[test]
    fn t16_all_groups_exact() {
        let t = t16();
        let groups = CheckGroup::defaults(Backend::Exact);
        let res = check_tree(
            &t,
            &[(VertexId(1), VertexId(2)), (VertexId(16), VertexId(9))],
            Backend::Exact,
            &groups,
        );
        assert!(res.passed(), "{:?}", res.failures);
        assert!(res.checks["certificates"]);
        assert_eq!(res.counts["sign_link"].run, 2);
    }

    #[test]
    fn pair_report_has_partitions() {
        let v = pair_report(&t16(), VertexId(1), VertexId(2)).unwrap();
        assert_eq!(v["VB"], serde_json::json!([5, 6, 15, 16]));
        assert_eq!(v["checks"]["det_cascade"], true);
        assert!(v["sdag_ab"].as_str().unwrap().starts_with('-'));
        let p = pair_report(&path(2), VertexId(1), VertexId(2)).unwrap();
        assert_eq!(p["detR"], "1");
    }
}
