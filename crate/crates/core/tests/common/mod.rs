//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use distlap::{Matrix, Rational, WeightedTree};
use num_traits::Zero;

/// Laplace expansion along the first row.
pub fn cofactor_det(m: &Matrix<Rational>) -> Rational {
    let n = m.rows();
    if n == 0 {
        return Rational::from_integer(1.into());
    }
    if n == 1 {
        return m[(0, 0)].clone();
    }
    let mut total = Rational::zero();
    for j in 0..n {
        if m[(0, j)].is_zero() {
            continue;
        }
        let minor = m.delete_rc(0, j).unwrap();
        let term = m[(0, j)].clone() * cofactor_det(&minor);
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix, ascending.
pub fn jacobi_eigenvalues(m: &Matrix<f64>) -> Vec<f64> {
    let n = m.rows();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-22 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// All-pairs shortest paths by Floyd-Warshall over the edge list.
pub fn floyd_warshall(t: &WeightedTree) -> Vec<Vec<Option<Rational>>> {
    let n = t.n();
    let mut d: Vec<Vec<Option<Rational>>> = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(Rational::zero());
    }
    for e in t.edges() {
        let w = e.weight.value().clone();
        d[e.u.index()][e.v.index()] = Some(w.clone());
        d[e.v.index()][e.u.index()] = Some(w);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(x), Some(y)) = (d[i][k].clone(), d[k][j].clone()) {
                    let via = x + y;
                    if d[i][j].as_ref().map_or(true, |cur| via < *cur) {
                        d[i][j] = Some(via);
                    }
                }
            }
        }
    }
    d
}
