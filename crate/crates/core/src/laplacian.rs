//! Distance Laplacian `S = Δ - D`, its closed-form Moore-Penrose inverse, the classical
//! Laplacian, and the Z / M matrix predicates.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Rational, Scalar};
use crate::tree::{VertexId, WeightedTree};

/// `D, η, Δ, S, γ, S* = S + J, S†` for one tree (or one distance-like matrix).
#[derive(Clone, Debug)]
pub struct DistLapBundle<T> {
    pub tree: Option<WeightedTree>,
    pub d: Matrix<T>,
    pub eta: Vec<T>,
    pub delta: Matrix<T>,
    pub s: Matrix<T>,
    /// Common cofactor of `S`, taken as `det S(1|1)`.
    pub gamma: T,
    pub s_star: Matrix<T>,
    pub s_dag: Matrix<T>,
}

/// How much to verify while building a bundle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Validation {
    /// Every type invariant; Moore-Penrose identities only when `n <= 32`.
    Full,
    /// Every type invariant including the Moore-Penrose identities regardless of size.
    FullWithMoorePenrose,
    /// Shape, symmetry and the zero row sums only.
    Structural,
}

impl<T: Scalar> DistLapBundle<T> {
    pub fn build(tree: &WeightedTree) -> Result<Self> {
        Self::build_with(tree, Validation::Full)
    }

    pub fn build_with(tree: &WeightedTree, validation: Validation) -> Result<Self> {
        let mut bundle = Self::assemble(tree.distance_matrix())?;
        bundle.tree = Some(tree.clone());
        bundle.validate(validation, true)?;
        Ok(bundle)
    }

    /// Builds `S = Diag(row sums of D) - D` from an arbitrary symmetric matrix with zero
    /// diagonal, such as a Euclidean distance matrix that is not a tree metric.
    pub fn from_distance_matrix(d: Matrix<T>, validation: Validation) -> Result<Self> {
        let bundle = Self::assemble(d)?;
        bundle.validate(validation, false)?;
        Ok(bundle)
    }

    fn assemble(d: Matrix<T>) -> Result<Self> {
        if !d.is_square() {
            return Err(Error::NotSquare {
                rows: d.rows(),
                cols: d.cols(),
            });
        }
        let n = d.rows();
        if n < 2 {
            return Err(Error::DimensionMismatch(
                "distance matrix needs n >= 2".into(),
            ));
        }
        let eta = d.row_sums();
        let delta = Matrix::diag(&eta);
        let s = &delta - &d;
        let gamma = s.delete_rc(0, 0)?.det()?;
        let s_star = &s + &Matrix::ones(n, n);
        let s_dag = pinv_centered(&s)?;
        Ok(Self {
            tree: None,
            d,
            eta,
            delta,
            s,
            gamma,
            s_star,
            s_dag,
        })
    }

    pub fn n(&self) -> usize {
        self.d.rows()
    }

    fn validate(&self, validation: Validation, tree_metric: bool) -> Result<()> {
        let n = self.n();
        let violated = |what: &str| Err(Error::InvariantViolated(what.to_string()));
        let d_scale = self.d.max_abs();
        if !self.d.is_symmetric() {
            return violated("D symmetric");
        }
        for i in 0..n {
            if !self.d[(i, i)].near_zero(d_scale) {
                return violated("D has zero diagonal");
            }
            if tree_metric && (0..n).any(|j| j != i && self.d[(i, j)].le_zero(0.0)) {
                return violated("D positive off the diagonal");
            }
        }
        let s_scale = self.s.max_abs();
        if !self.s.row_sums().iter().all(|x| x.near_zero(s_scale)) {
            return violated("S 1 = 0");
        }
        if !self.s_dag.is_symmetric() {
            return violated("S† symmetric");
        }
        let dag_scale = self.s_dag.max_abs();
        if !self.s_dag.row_sums().iter().all(|x| x.near_zero(dag_scale)) {
            return violated("S† 1 = 0");
        }
        if validation == Validation::Structural {
            return Ok(());
        }
        if !self.s.is_psd()? {
            return violated("S positive semidefinite");
        }
        if self.gamma.le_zero(0.0) {
            return violated("gamma > 0");
        }
        if T::EXACT {
            if !self.s.det()?.near_zero(0.0) {
                return violated("det S = 0");
            }
            let nn = T::from_i64((n * n) as i64);
            if self.s_star.det()? != nn * self.gamma.clone() {
                return violated("det S* = n^2 gamma");
            }
        }
        let wants_mp = match validation {
            Validation::FullWithMoorePenrose => true,
            Validation::Full => n <= 32,
            Validation::Structural => false,
        };
        if wants_mp {
            if !(&self.s * &self.s_dag).approx_eq(&centering(n)) {
                return violated("S S† = I - J/n");
            }
            if !moore_penrose_holds(&self.s, &self.s_dag) {
                return violated("Moore-Penrose identities");
            }
        }
        Ok(())
    }

    /// `(-1)^{i+j} det S(i|j)`, zero-based indices.
    pub fn cofactor(&self, i: usize, j: usize) -> Result<T> {
        let minor = self.s.delete_rc(i, j)?.det()?;
        Ok(if (i + j) % 2 == 0 { minor } else { -minor })
    }
}

/// `I - J/n`.
pub fn centering<T: Scalar>(n: usize) -> Matrix<T> {
    let inv_n = T::one() / T::from_i64(n as i64);
    Matrix::from_fn(n, n, |i, j| {
        if i == j {
            T::one() - inv_n.clone()
        } else {
            -inv_n.clone()
        }
    })
}

/// `S† = (S + J)^{-1} - J/n²` for symmetric `S` with `S 1 = 0` and rank `n - 1`.
pub fn pinv_centered<T: Scalar>(s: &Matrix<T>) -> Result<Matrix<T>> {
    if !s.is_square() {
        return Err(Error::NotSquare {
            rows: s.rows(),
            cols: s.cols(),
        });
    }
    if !s.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let n = s.rows();
    let scale = s.max_abs();
    if !s.row_sums().iter().all(|x| x.near_zero(scale)) {
        return Err(Error::SingularSstar);
    }
    let s_star = s + &Matrix::ones(n, n);
    let inv = s_star.inverse().map_err(|e| match e {
        Error::Singular => Error::SingularSstar,
        other => other,
    })?;
    let nn = T::from_i64((n * n) as i64);
    let correction = Matrix::ones(n, n).scale(&(T::one() / nn));
    Ok(&inv - &correction)
}

/// The four Moore-Penrose equations for `m` and a candidate `p`.
pub fn moore_penrose_holds<T: Scalar>(m: &Matrix<T>, p: &Matrix<T>) -> bool {
    let mp = m * p;
    let pm = p * m;
    (&mp * m).approx_eq(m) && (&pm * p).approx_eq(p) && mp.is_symmetric() && pm.is_symmetric()
}

/// Classical Laplacian `L = ∇ - A` and its Moore-Penrose inverse `[α_ij]`.
///
/// Edge `(u, v)` of weight `w` contributes conductance `1/w`, so that the resistance
/// distance read off `L†` is the path-weight distance of the tree.
#[derive(Clone, Debug)]
pub struct ClassicalLapBundle<T> {
    pub l: Matrix<T>,
    pub l_dag: Matrix<T>,
}

pub fn classical_laplacian<T: Scalar>(tree: &WeightedTree) -> Result<ClassicalLapBundle<T>> {
    let n = tree.n();
    let mut l = Matrix::<T>::zeros(n, n);
    for e in tree.edges() {
        let c = T::from_rational(&(Rational::from_integer(1.into()) / e.weight.value()));
        let (u, v) = (e.u.index(), e.v.index());
        l[(u, v)] = l[(u, v)].clone() - c.clone();
        l[(v, u)] = l[(v, u)].clone() - c.clone();
        l[(u, u)] = l[(u, u)].clone() + c.clone();
        l[(v, v)] = l[(v, v)].clone() + c;
    }
    let l_dag = pinv_centered(&l)?;
    Ok(ClassicalLapBundle { l, l_dag })
}

/// `d_ij = α_ii + α_jj - 2 α_ij` for every pair.
pub fn check_p1_identity<T: Scalar>(b: &ClassicalLapBundle<T>, d: &Matrix<T>) -> Result<bool> {
    let n = b.l_dag.rows();
    if d.rows() != n || d.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "L† is {n}x{n}, D is {}x{}",
            d.rows(),
            d.cols()
        )));
    }
    let a = &b.l_dag;
    let scale = d.max_abs().max(a.max_abs());
    Ok((0..n).all(|i| {
        (0..n).all(|j| {
            let rhs = a[(i, i)].clone() + a[(j, j)].clone() - T::from_i64(2) * a[(i, j)].clone();
            d[(i, j)].approx_eq(&rhs, scale)
        })
    }))
}

/// First off-diagonal entry (zero-based) that violates the Z sign pattern, if any.
pub fn z_violation<T: Scalar>(m: &Matrix<T>) -> Result<Option<(usize, usize)>> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let scale = m.max_abs();
    let n = m.rows();
    Ok((0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .find(|&(i, j)| i != j && !m[(i, j)].le_zero(scale)))
}

/// Every off-diagonal entry is non-positive.
pub fn is_z_matrix<T: Scalar>(m: &Matrix<T>) -> Result<bool> {
    Ok(z_violation(m)?.is_none())
}

/// Symmetric M matrix: Z sign pattern and positive semidefinite.
pub fn is_m_matrix_symmetric<T: Scalar>(m: &Matrix<T>) -> Result<bool> {
    if !m.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    Ok(is_z_matrix(m)? && m.is_psd()?)
}

/// `S†[a, b]` computed as `1' C^{-1} 1 / n²` with `C = S(a|b)`.
///
/// Relabeling `a -> 1, b -> 2` only permutes the rows and columns of `C`, which leaves
/// `1' C^{-1} 1` unchanged, so the deletion is taken directly at `(a, b)`.
pub fn sdag_entry_via_cofactor_path<T: Scalar>(
    tree: &WeightedTree,
    a: VertexId,
    b: VertexId,
) -> Result<T> {
    let (ia, ib) = (tree.check(a)?, tree.check(b)?);
    if ia == ib {
        return Err(Error::SameVertex(a.0));
    }
    let n = tree.n();
    let d = tree.distance_matrix::<T>();
    let s = &Matrix::diag(&d.row_sums()) - &d;
    ones_cinv_ones(&s, ia, ib).map(|x| x / T::from_i64((n * n) as i64))
}

/// `1' C^{-1} 1` for `C = S(a|b)`, zero-based.
pub fn ones_cinv_ones<T: Scalar>(s: &Matrix<T>, a: usize, b: usize) -> Result<T> {
    Ok(s.delete_rc(a, b)?.inverse()?.total())
}
