//! Weighted trees with 1-based vertex labels.

use std::collections::VecDeque;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{parse_rational, Matrix, Rational, Scalar};

/// Vertex label in `1..=n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub usize);

impl VertexId {
    /// Zero-based row/column index of this vertex in `n x n` matrices.
    pub fn index(self) -> usize {
        self.0 - 1
    }

    pub fn from_index(i: usize) -> Self {
        VertexId(i + 1)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Strictly positive edge weight.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Weight(Rational);

impl Weight {
    pub fn new(value: Rational) -> Option<Self> {
        value.is_positive().then_some(Weight(value))
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub weight: Weight,
}

/// Immutable validated tree on vertices `1..=n`, `n >= 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedTree {
    n: usize,
    edges: Vec<Edge>,
    // neighbor index and edge index per vertex
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl WeightedTree {
    pub fn new(n: usize, edges: Vec<(usize, usize, Rational)>) -> Result<Self> {
        if n < 2 {
            return Err(Error::NotATree(format!("n must be >= 2, got {n}")));
        }
        if edges.len() != n - 1 {
            return Err(Error::NotATree(format!(
                "{} edges for {n} vertices",
                edges.len()
            )));
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut checked = Vec::with_capacity(edges.len());
        for (k, (u, v, w)) in edges.into_iter().enumerate() {
            for id in [u, v] {
                if id == 0 || id > n {
                    return Err(Error::BadVertexId { id, n });
                }
            }
            if u == v {
                return Err(Error::NotATree(format!("self-loop at {u}")));
            }
            let weight = Weight::new(w.clone()).ok_or_else(|| Error::NonPositiveWeight {
                u,
                v,
                weight: w.to_string(),
            })?;
            if adjacency[u - 1].iter().any(|&(x, _)| x == v - 1) {
                return Err(Error::NotATree(format!("duplicate edge ({u},{v})")));
            }
            adjacency[u - 1].push((v - 1, k));
            adjacency[v - 1].push((u - 1, k));
            checked.push(Edge {
                u: VertexId(u),
                v: VertexId(v),
                weight,
            });
        }
        let tree = Self {
            n,
            edges: checked,
            adjacency,
        };
        // n - 1 edges + connected => acyclic
        let reached = tree.bfs(0, None).0.iter().filter(|p| p.is_some()).count();
        if reached != n {
            return Err(Error::NotATree(
                "graph is disconnected or has a cycle".into(),
            ));
        }
        Ok(tree)
    }

    /// Unit-weight tree from 1-based edge pairs.
    pub fn unit(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::new(
            n,
            edges
                .iter()
                .map(|&(u, v)| (u, v, Rational::from_integer(1.into())))
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (1..=self.n).map(VertexId)
    }

    pub fn check(&self, v: VertexId) -> Result<usize> {
        if v.0 == 0 || v.0 > self.n {
            Err(Error::BadVertexId { id: v.0, n: self.n })
        } else {
            Ok(v.index())
        }
    }

    pub fn degree(&self, v: VertexId) -> Result<usize> {
        Ok(self.adjacency[self.check(v)?].len())
    }

    pub fn neighbors(&self, v: VertexId) -> Result<Vec<VertexId>> {
        let i = self.check(v)?;
        let mut out: Vec<VertexId> = self.adjacency[i]
            .iter()
            .map(|&(x, _)| VertexId::from_index(x))
            .collect();
        out.sort();
        Ok(out)
    }

    pub fn is_pendant(&self, v: VertexId) -> Result<bool> {
        Ok(self.degree(v)? == 1)
    }

    /// Parent pointers (vertex, edge) from a BFS rooted at `root`, skipping `blocked`.
    /// The root maps to itself.
    fn bfs(
        &self,
        root: usize,
        blocked: Option<usize>,
    ) -> (Vec<Option<(usize, usize)>>, Vec<usize>) {
        let mut parent = vec![None; self.n];
        parent[root] = Some((root, usize::MAX));
        let mut order = vec![root];
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            for &(y, e) in &self.adjacency[x] {
                if parent[y].is_none() && Some(y) != blocked {
                    parent[y] = Some((x, e));
                    order.push(y);
                    queue.push_back(y);
                }
            }
        }
        (parent, order)
    }

    /// The unique path from `a` to `b`, both ends included.
    pub fn path_vertices(&self, a: VertexId, b: VertexId) -> Result<Vec<VertexId>> {
        let (ia, ib) = (self.check(a)?, self.check(b)?);
        let (parent, _) = self.bfs(ia, None);
        let mut path = vec![b];
        let mut x = ib;
        while x != ia {
            x = parent[x].expect("tree is connected").0;
            path.push(VertexId::from_index(x));
        }
        path.reverse();
        Ok(path)
    }

    pub fn distance(&self, a: VertexId, b: VertexId) -> Result<Rational> {
        self.check(b)?;
        let ia = self.check(a)?;
        Ok(self.distances_from::<Rational>(ia)[b.index()].clone())
    }

    /// Weighted distances from zero-based vertex `src` to every vertex.
    pub fn distances_from<T: Scalar>(&self, src: usize) -> Vec<T> {
        let (parent, order) = self.bfs(src, None);
        let mut dist = vec![T::zero(); self.n];
        for &x in order.iter().skip(1) {
            let (p, e) = parent[x].expect("reached");
            dist[x] = dist[p].clone() + T::from_rational(self.edges[e].weight.value());
        }
        dist
    }

    /// `D = [d_ij]`.
    pub fn distance_matrix<T: Scalar>(&self) -> Matrix<T> {
        let rows: Vec<Vec<T>> = (0..self.n).map(|i| self.distances_from(i)).collect();
        Matrix::from_rows(rows).expect("square")
    }

    /// Vertex sets of the components of `T \ (v)`, each sorted, ordered by smallest label.
    pub fn components_after_deletion(&self, v: VertexId) -> Result<Vec<Vec<VertexId>>> {
        let iv = self.check(v)?;
        let mut comps: Vec<Vec<VertexId>> = self.adjacency[iv]
            .iter()
            .map(|&(start, _)| {
                let (_, order) = self.bfs(start, Some(iv));
                let mut c: Vec<VertexId> = order.into_iter().map(VertexId::from_index).collect();
                c.sort();
                c
            })
            .collect();
        comps.sort();
        Ok(comps)
    }

    /// Components of the subgraph induced by `set`, each sorted, ordered by smallest label.
    pub fn induced_components(&self, set: &[VertexId]) -> Result<Vec<Vec<VertexId>>> {
        let mut inside = vec![false; self.n];
        for &v in set {
            inside[self.check(v)?] = true;
        }
        let mut seen = vec![false; self.n];
        let mut comps = Vec::new();
        let mut starts: Vec<usize> = set.iter().map(|v| v.index()).collect();
        starts.sort_unstable();
        for s in starts {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![VertexId::from_index(s)];
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                for &(y, _) in &self.adjacency[x] {
                    if inside[y] && !seen[y] {
                        seen[y] = true;
                        comp.push(VertexId::from_index(y));
                        stack.push(y);
                    }
                }
            }
            comp.sort();
            comps.push(comp);
        }
        comps.sort();
        Ok(comps)
    }

    pub fn is_connected_set(&self, set: &[VertexId]) -> Result<bool> {
        Ok(!set.is_empty() && self.induced_components(set)?.len() == 1)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let edges: Vec<serde_json::Value> = self
            .edges
            .iter()
            .map(|e| serde_json::json!([e.u.0, e.v.0, e.weight.value().to_string()]))
            .collect();
        serde_json::json!({ "n": self.n, "edges": edges })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("json")
    }

    /// Reads `{"n": .., "edges": [[u, v, "w"], ...]}`; weights may be rational or decimal
    /// strings, or JSON integers.
    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let bad = |m: String| Error::Parse(m);
        let n = value
            .get("n")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| bad("missing integer field \"n\"".into()))?;
        let raw = value
            .get("edges")
            .and_then(|x| x.as_array())
            .ok_or_else(|| bad("missing array field \"edges\"".into()))?;
        let mut edges = Vec::with_capacity(raw.len());
        for e in raw {
            let triple = e
                .as_array()
                .filter(|t| t.len() == 3)
                .ok_or_else(|| bad(format!("edge {e} is not [u, v, w]")))?;
            let u = triple[0]
                .as_u64()
                .ok_or_else(|| bad(format!("bad vertex {}", triple[0])))?;
            let v = triple[1]
                .as_u64()
                .ok_or_else(|| bad(format!("bad vertex {}", triple[1])))?;
            let w = match &triple[2] {
                serde_json::Value::String(s) => {
                    parse_rational(s).ok_or_else(|| Error::BadWeight(s.clone()))?
                }
                serde_json::Value::Number(num) if num.is_i64() => {
                    Rational::from_integer(num.as_i64().expect("i64").into())
                }
                other => return Err(Error::BadWeight(other.to_string())),
            };
            edges.push((u as usize, v as usize, w));
        }
        Self::new(n as usize, edges)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_json(&value)
    }

    /// Short content hash of the canonical JSON form.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_json_string().as_bytes());
        hex::encode(&hash[..8])
    }

    pub fn total_weight(&self) -> Rational {
        self.edges
            .iter()
            .fold(<Rational as Zero>::zero(), |acc, e| acc + e.weight.value())
    }
}

/// The tree of the worked partition example: 16 vertices, unit weights.
pub fn t16() -> WeightedTree {
    WeightedTree::unit(
        16,
        &[
            (1, 10),
            (1, 3),
            (3, 4),
            (1, 7),
            (5, 6),
            (5, 2),
            (7, 9),
            (7, 8),
            (4, 2),
            (3, 11),
            (11, 12),
            (3, 13),
            (4, 14),
            (2, 15),
            (15, 16),
        ],
    )
    .expect("valid tree")
}

/// Unit-weight path `1 - 2 - ... - n`.
pub fn path(n: usize) -> WeightedTree {
    let edges: Vec<(usize, usize)> = (1..n).map(|i| (i, i + 1)).collect();
    WeightedTree::unit(n, &edges).expect("valid path")
}

pub fn ids(labels: &[usize]) -> Vec<VertexId> {
    labels.iter().copied().map(VertexId).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn sorted(mut v: Vec<VertexId>) -> Vec<VertexId> {
        v.sort();
        v
    }

    #[test]
    fn builds_small_trees() {
        let t = WeightedTree::unit(2, &[(1, 2)]).unwrap();
        assert_eq!(t.n(), 2);
        let p4 = path(4);
        assert_eq!(p4.edges().len(), 3);
        assert_eq!(t16().n(), 16);
    }

    #[test]
    fn rejects_invalid_trees() {
        assert!(matches!(
            WeightedTree::unit(1, &[]),
            Err(Error::NotATree(_))
        ));
        assert!(matches!(
            WeightedTree::unit(3, &[(1, 2)]),
            Err(Error::NotATree(_))
        ));
        assert!(matches!(
            WeightedTree::unit(4, &[(1, 2), (2, 3), (3, 1)]),
            Err(Error::NotATree(_))
        ));
        assert!(matches!(
            WeightedTree::unit(3, &[(1, 2), (1, 2)]),
            Err(Error::NotATree(_))
        ));
        assert!(matches!(
            WeightedTree::unit(3, &[(1, 1), (2, 3)]),
            Err(Error::NotATree(_))
        ));
        assert_eq!(
            WeightedTree::unit(3, &[(1, 2), (2, 4)]),
            Err(Error::BadVertexId { id: 4, n: 3 })
        );
        assert!(matches!(
            WeightedTree::new(2, vec![(1, 2, q(0))]),
            Err(Error::NonPositiveWeight { .. })
        ));
        assert!(matches!(
            WeightedTree::new(2, vec![(1, 2, q(-3))]),
            Err(Error::NonPositiveWeight { .. })
        ));
        // 4 vertices, 3 edges, but a triangle plus an isolated vertex
        assert!(matches!(
            WeightedTree::unit(4, &[(1, 2), (2, 3), (1, 3)]),
            Err(Error::NotATree(_))
        ));
    }

    #[test]
    fn paths() {
        let t = t16();
        assert_eq!(
            t.path_vertices(VertexId(1), VertexId(2)).unwrap(),
            ids(&[1, 3, 4, 2])
        );
        assert_eq!(
            path(4).path_vertices(VertexId(1), VertexId(4)).unwrap(),
            ids(&[1, 2, 3, 4])
        );
        assert_eq!(
            t.path_vertices(VertexId(7), VertexId(7)).unwrap(),
            ids(&[7])
        );
        assert_eq!(
            t.path_vertices(VertexId(0), VertexId(7)),
            Err(Error::BadVertexId { id: 0, n: 16 })
        );
        assert_eq!(
            t.path_vertices(VertexId(1), VertexId(17)),
            Err(Error::BadVertexId { id: 17, n: 16 })
        );
    }

    #[test]
    fn distances() {
        assert_eq!(path(4).distance(VertexId(1), VertexId(4)).unwrap(), q(3));
        let w = Rational::new(7.into(), 3.into());
        let t = WeightedTree::new(2, vec![(1, 2, w.clone())]).unwrap();
        assert_eq!(t.distance(VertexId(1), VertexId(2)).unwrap(), w);
        // 12-11-3-4-2-15-16: six unit edges
        assert_eq!(t16().distance(VertexId(12), VertexId(16)).unwrap(), q(6));
        assert_eq!(t16().distance(VertexId(5), VertexId(5)).unwrap(), q(0));
    }

    #[test]
    fn components() {
        let t = t16();
        let comps = t.components_after_deletion(VertexId(1)).unwrap();
        assert_eq!(
            comps,
            vec![
                sorted(ids(&[3, 13, 11, 12, 4, 14, 2, 5, 6, 15, 16])),
                ids(&[7, 8, 9]),
                ids(&[10]),
            ]
        );
        assert_eq!(
            path(4).components_after_deletion(VertexId(2)).unwrap(),
            vec![ids(&[1]), ids(&[3, 4])]
        );
        let two = WeightedTree::unit(2, &[(1, 2)]).unwrap();
        assert_eq!(
            two.components_after_deletion(VertexId(1)).unwrap(),
            vec![ids(&[2])]
        );
    }

    #[test]
    fn pendant() {
        let p4 = path(4);
        assert!(p4.is_pendant(VertexId(1)).unwrap());
        assert!(!p4.is_pendant(VertexId(2)).unwrap());
        assert!(t16().is_pendant(VertexId(12)).unwrap());
        assert!(p4.is_pendant(VertexId(9)).is_err());
    }

    #[test]
    fn json_round_trip_and_decimal_weights() {
        let t =
            WeightedTree::from_json_str(r#"{"n":3,"edges":[[1,2,"0.5"],[2,3,"3/2"]]}"#).unwrap();
        assert_eq!(t.distance(VertexId(1), VertexId(3)).unwrap(), q(2));
        let back = WeightedTree::from_json_str(&t.to_json_string()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.digest(), t.digest());
        let int_weights = WeightedTree::from_json_str(r#"{"n":2,"edges":[[1,2,4]]}"#).unwrap();
        assert_eq!(
            int_weights.distance(VertexId(1), VertexId(2)).unwrap(),
            q(4)
        );
        assert!(matches!(
            WeightedTree::from_json_str("{not json"),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            WeightedTree::from_json_str(r#"{"n":2,"edges":[[1,2,"x"]]}"#),
            Err(Error::BadWeight(_))
        ));
    }
}
