use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Rational;
use crate::tree::{VertexId, WeightedTree};

/// Nested vertex partitions for the pair `(a, b)`, all sets sorted by label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartitionChain {
    pub pair: (VertexId, VertexId),
    /// Component of `T \ (a)` containing `b`.
    pub v1_prime: Vec<VertexId>,
    /// `V_1 = V_1' \ {b}`, then the other components of `T \ (a)` by smallest label.
    pub v: Vec<Vec<VertexId>>,
    pub va: Vec<VertexId>,
    pub vb: Vec<VertexId>,
    /// Interior of the `a`-`b` path, in order from `a`.
    pub path_interior: Vec<VertexId>,
    /// `U_i`, the vertices of `V_A` nearest to `path_interior[i]`.
    pub u: Vec<Vec<VertexId>>,
    /// `Q_ik`, components of `[U_i] \ (u_i)`.
    pub q: Vec<Vec<Vec<VertexId>>>,
    /// Components of `[V_B]`.
    pub w: Vec<Vec<VertexId>>,
}

fn distinct(tree: &WeightedTree, a: VertexId, b: VertexId) -> Result<()> {
    tree.check(a)?;
    tree.check(b)?;
    if a == b {
        return Err(Error::SameVertex(a.0));
    }
    Ok(())
}

/// Components of `T \ (a)`: returns `V_1'` and `[V_1, V_2, ..., V_m]`.
pub fn partition_v(
    tree: &WeightedTree,
    a: VertexId,
    b: VertexId,
) -> Result<(Vec<VertexId>, Vec<Vec<VertexId>>)> {
    distinct(tree, a, b)?;
    let mut comps = tree.components_after_deletion(a)?;
    let k = comps
        .iter()
        .position(|c| c.contains(&b))
        .expect("b lies in some component");
    let v1_prime = comps.remove(k);
    let v1: Vec<VertexId> = v1_prime.iter().copied().filter(|&x| x != b).collect();
    let mut v = vec![v1];
    v.extend(comps);
    Ok((v1_prime, v))
}

/// `V_A` (paths from `a` avoid `b`) and `V_B` (paths from `a` pass through `b`).
pub fn split_ab(
    tree: &WeightedTree,
    a: VertexId,
    b: VertexId,
    v1: &[VertexId],
) -> Result<(Vec<VertexId>, Vec<VertexId>)> {
    distinct(tree, a, b)?;
    let mut va = Vec::new();
    let mut vb = Vec::new();
    for &y in v1 {
        if tree.path_vertices(a, y)?.contains(&b) {
            vb.push(y);
        } else {
            va.push(y);
        }
    }
    Ok((va, vb))
}

/// Interior path vertices `u_1..u_q` and the nearest-vertex partition `U_1..U_q` of `V_A`.
pub fn u_partition(
    tree: &WeightedTree,
    a: VertexId,
    b: VertexId,
    va: &[VertexId],
) -> Result<(Vec<VertexId>, Vec<Vec<VertexId>>)> {
    distinct(tree, a, b)?;
    let path = tree.path_vertices(a, b)?;
    let interior: Vec<VertexId> = path[1..path.len() - 1].to_vec();
    if interior.is_empty() {
        if va.is_empty() {
            return Ok((interior, Vec::new()));
        }
        return Err(Error::InconsistentChain(format!(
            "V_A = {va:?} but {a} and {b} are adjacent"
        )));
    }
    let dist: Vec<Vec<Rational>> = interior
        .iter()
        .map(|u| tree.distances_from(u.index()))
        .collect();
    let mut u_sets = vec![Vec::new(); interior.len()];
    for &y in va {
        let mut best = 0;
        for j in 1..interior.len() {
            if dist[j][y.index()] < dist[best][y.index()] {
                best = j;
            }
        }
        if let Some(j) =
            (0..interior.len()).find(|&j| j != best && dist[j][y.index()] == dist[best][y.index()])
        {
            return Err(Error::TieDetected {
                y: y.0,
                first: interior[best].0,
                second: interior[j].0,
            });
        }
        u_sets[best].push(y);
    }
    for set in &mut u_sets {
        set.sort();
    }

    let covered: BTreeSet<VertexId> = u_sets.iter().flatten().copied().collect();
    if covered.len() != va.len() || va.iter().any(|y| !covered.contains(y)) {
        return Err(Error::InconsistentChain(
            "U_1..U_q do not partition V_A".into(),
        ));
    }
    for (ui, set) in interior.iter().zip(&u_sets) {
        if !set.contains(ui) {
            return Err(Error::InconsistentChain(format!(
                "u_i = {ui} is not in its own U_i"
            )));
        }
        if !tree.is_connected_set(set)? {
            return Err(Error::InconsistentChain(format!(
                "[U_i] for u_i = {ui} is not a tree"
            )));
        }
        for &y in set {
            if !tree.path_vertices(y, a)?.contains(ui) || !tree.path_vertices(y, b)?.contains(ui) {
                return Err(Error::InconsistentChain(format!(
                    "{ui} is not on both paths from {y}"
                )));
            }
        }
    }
    Ok((interior, u_sets))
}

/// Components of `[U_i] \ (u_i)`; each must also be a component of `T \ (u_i)`.
pub fn q_components(
    tree: &WeightedTree,
    ui: VertexId,
    set: &[VertexId],
) -> Result<Vec<Vec<VertexId>>> {
    let rest: Vec<VertexId> = set.iter().copied().filter(|&x| x != ui).collect();
    let comps = tree.induced_components(&rest)?;
    let whole = tree.components_after_deletion(ui)?;
    for c in &comps {
        if !whole.contains(c) {
            return Err(Error::InconsistentChain(format!(
                "Q = {c:?} is not a component of T \\ ({ui})"
            )));
        }
    }
    Ok(comps)
}

/// Components of `[V_B]`; each must also be a component of `T \ (b)`.
pub fn w_components(
    tree: &WeightedTree,
    b: VertexId,
    vb: &[VertexId],
) -> Result<Vec<Vec<VertexId>>> {
    let comps = tree.induced_components(vb)?;
    let whole = tree.components_after_deletion(b)?;
    for c in &comps {
        if !whole.contains(c) {
            return Err(Error::InconsistentChain(format!(
                "W = {c:?} is not a component of T \\ ({b})"
            )));
        }
    }
    Ok(comps)
}

pub fn partition_chain(tree: &WeightedTree, a: VertexId, b: VertexId) -> Result<PartitionChain> {
    let (v1_prime, v) = partition_v(tree, a, b)?;
    let (va, vb) = split_ab(tree, a, b, &v[0])?;
    let (path_interior, u) = u_partition(tree, a, b, &va)?;
    let q = path_interior
        .iter()
        .zip(&u)
        .map(|(&ui, set)| q_components(tree, ui, set))
        .collect::<Result<Vec<_>>>()?;
    let w = w_components(tree, b, &vb)?;
    let chain = PartitionChain {
        pair: (a, b),
        v1_prime,
        v,
        va,
        vb,
        path_interior,
        u,
        q,
        w,
    };
    chain.check_cover(tree.n())?;
    Ok(chain)
}

impl PartitionChain {
    /// The V-blocks partition every vertex except `a` and `b`.
    pub fn check_cover(&self, n: usize) -> Result<()> {
        let (a, b) = self.pair;
        let mut seen = BTreeSet::new();
        for x in self.v.iter().flatten() {
            if !seen.insert(*x) || *x == a || *x == b {
                return Err(Error::InconsistentChain(format!(
                    "vertex {x} repeated or reserved"
                )));
            }
        }
        if seen.len() != n - 2 {
            return Err(Error::InconsistentChain("V_1..V_m miss vertices".into()));
        }
        let v1: BTreeSet<VertexId> = self.v[0].iter().copied().collect();
        let split: BTreeSet<VertexId> = self.va.iter().chain(&self.vb).copied().collect();
        if v1 != split || self.va.len() + self.vb.len() != v1.len() {
            return Err(Error::InconsistentChain(
                "V_A, V_B do not partition V_1".into(),
            ));
        }
        Ok(())
    }

    /// The partition-report JSON fragment.
    pub fn to_report(&self) -> serde_json::Value {
        let u: Vec<serde_json::Value> = self
            .path_interior
            .iter()
            .zip(&self.u)
            .map(|(ui, set)| serde_json::json!({ "u": ui, "set": set }))
            .collect();
        serde_json::json!({
            "pair": [self.pair.0, self.pair.1],
            "V1prime": self.v1_prime,
            "V": self.v,
            "VA": self.va,
            "VB": self.vb,
            "U": u,
            "Q": self.q,
            "W": self.w,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{ids, path, t16};

    fn set(labels: &[usize]) -> Vec<VertexId> {
        let mut v = ids(labels);
        v.sort();
        v
    }

    #[test]
    fn t16_chain_matches_worked_example() {
        let c = partition_chain(&t16(), VertexId(1), VertexId(2)).unwrap();
        assert_eq!(c.v1_prime, set(&[3, 13, 11, 12, 4, 14, 2, 5, 6, 15, 16]));
        assert_eq!(c.v[0], set(&[3, 13, 11, 12, 4, 14, 5, 6, 15, 16]));
        assert_eq!(c.v[1..], [set(&[7, 9, 8]), set(&[10])]);
        assert_eq!(c.va, set(&[3, 4, 14, 11, 13, 12]));
        assert_eq!(c.vb, set(&[5, 6, 15, 16]));
        assert_eq!(c.path_interior, ids(&[3, 4]));
        assert_eq!(c.u, vec![set(&[3, 11, 12, 13]), set(&[4, 14])]);
        assert_eq!(c.q[0], vec![set(&[12, 11]), set(&[13])]);
        assert_eq!(c.q[1], vec![set(&[14])]);
        assert_eq!(c.w, vec![set(&[5, 6]), set(&[15, 16])]);
    }

    #[test]
    fn p4_chains() {
        let c = partition_chain(&path(4), VertexId(1), VertexId(2)).unwrap();
        assert_eq!(c.v1_prime, ids(&[2, 3, 4]));
        assert_eq!(c.v, vec![ids(&[3, 4])]);
        assert!(c.va.is_empty());
        assert_eq!(c.vb, ids(&[3, 4]));
        assert!(c.u.is_empty() && c.q.is_empty());
        assert_eq!(c.w, vec![ids(&[3, 4])]);

        let c = partition_chain(&path(4), VertexId(1), VertexId(4)).unwrap();
        assert_eq!(c.path_interior, ids(&[2, 3]));
        assert_eq!(c.u, vec![ids(&[2]), ids(&[3])]);
        assert_eq!(c.q, vec![Vec::<Vec<VertexId>>::new(), Vec::new()]);
        assert!(c.vb.is_empty() && c.w.is_empty());
    }

    #[test]
    fn star_center() {
        let star = WeightedTree::unit(5, &[(1, 2), (1, 3), (1, 4), (1, 5)]).unwrap();
        let (v1p, v) = partition_v(&star, VertexId(1), VertexId(2)).unwrap();
        assert_eq!(v1p, ids(&[2]));
        assert_eq!(v, vec![vec![], ids(&[3]), ids(&[4]), ids(&[5])]);
    }

    #[test]
    fn u_sets_sit_on_both_paths() {
        let t = t16();
        let c = partition_chain(&t, VertexId(1), VertexId(2)).unwrap();
        for (ui, s) in c.path_interior.iter().zip(&c.u) {
            for &y in s {
                assert!(t.path_vertices(y, VertexId(1)).unwrap().contains(ui));
                assert!(t.path_vertices(y, VertexId(2)).unwrap().contains(ui));
            }
        }
        // any x in V_B, y in V_A: b on the x-y path
        for &x in &c.vb {
            for &y in &c.va {
                assert!(t.path_vertices(x, y).unwrap().contains(&VertexId(2)));
            }
        }
    }

    #[test]
    fn detects_bad_inputs() {
        let t = t16();
        assert_eq!(
            partition_v(&t, VertexId(3), VertexId(3)).unwrap_err(),
            Error::SameVertex(3)
        );
        assert!(w_components(&t, VertexId(2), &ids(&[5])).is_err());
        assert!(q_components(&t, VertexId(3), &ids(&[3, 11])).is_err());
        assert_eq!(
            w_components(&t, VertexId(2), &[]).unwrap(),
            Vec::<Vec<VertexId>>::new()
        );
        assert_eq!(
            q_components(&t, VertexId(4), &ids(&[4])).unwrap(),
            Vec::<Vec<VertexId>>::new()
        );
        // 1 and 3 adjacent in T16, so V_A must be empty
        assert!(matches!(
            u_partition(&t, VertexId(1), VertexId(3), &ids(&[11])),
            Err(Error::InconsistentChain(_))
        ));
    }
}
