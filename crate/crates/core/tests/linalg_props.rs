mod common;

use distlap::linalg::{matrix_det_lemma_check, Matrix, Rational};
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=4).prop_map(|(n, d)| Rational::new(n.into(), d.into()))
}

fn square(lo: usize, hi: usize) -> impl Strategy<Value = Matrix<Rational>> {
    (lo..=hi).prop_flat_map(|n| {
        prop::collection::vec(rational(), n * n).prop_map(move |v| Matrix::new(n, n, v).unwrap())
    })
}

fn symmetric_float(n: usize) -> impl Strategy<Value = Matrix<f64>> {
    prop::collection::vec(-3.0f64..3.0, n * n).prop_map(move |g| {
        let g = Matrix::new(n, n, g).unwrap();
        &g.transpose() * &g
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn det_times_identity_is_m_times_adjugate(m in square(2, 6)) {
        let n = m.rows();
        let lhs = Matrix::identity(n).scale(&m.det().unwrap());
        prop_assert_eq!(lhs, &m * &m.adjugate().unwrap());
    }

    #[test]
    fn inverse_is_exact_when_nonsingular(m in square(1, 6)) {
        match m.inverse() {
            Ok(inv) => prop_assert_eq!(&inv * &m, Matrix::identity(m.rows())),
            Err(_) => prop_assert_eq!(m.det().unwrap(), Rational::from_integer(0.into())),
        }
    }

    #[test]
    fn bareiss_matches_cofactor_expansion(m in square(1, 5)) {
        prop_assert_eq!(m.det().unwrap(), common::cofactor_det(&m));
    }

    #[test]
    fn determinant_lemma(m in square(2, 5), seed in prop::collection::vec(rational(), 10)) {
        let n = m.rows();
        let x = Matrix::column(seed[..n].to_vec());
        let y = Matrix::column(seed[5..5 + n].to_vec());
        prop_assert_eq!(matrix_det_lemma_check(&m, &x, &y), Ok(true));
    }

    #[test]
    fn psd_agrees_with_jacobi_on_gram(eps in 0.05f64..2.0, g in (1usize..7).prop_flat_map(symmetric_float)) {
        let k = g.rows();
        let eig = common::jacobi_eigenvalues(&g);
        let floor = -1e-9 * eig.iter().map(|x| x.abs()).fold(1.0, f64::max);
        prop_assert_eq!(g.is_psd().unwrap(), eig[0] >= floor);
        prop_assert!(g.is_psd().unwrap());

        let shifted = &g - &Matrix::identity(k).scale(&(eig[0] + eps));
        let eig2 = common::jacobi_eigenvalues(&shifted);
        prop_assert!(eig2[0] < 0.0);
        prop_assert!(!shifted.is_psd().unwrap());
    }

    #[test]
    fn exact_psd_on_rational_grams(g in square(1, 5)) {
        let gram = &g.transpose() * &g;
        prop_assert!(gram.is_psd().unwrap());
        let k = gram.rows();
        let neg = &gram - &Matrix::identity(k).scale(&Rational::from_integer(10_000.into()));
        prop_assert!(!neg.is_psd().unwrap());
    }
}
