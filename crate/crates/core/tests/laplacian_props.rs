use distlap::laplacian::{centering, ones_cinv_ones, z_violation};
use distlap::verify::{random_tree, WeightModel};
use distlap::{
    check_p1_identity, classical_laplacian, is_m_matrix_symmetric, sdag_entry_via_cofactor_path,
    DistLapBundle, Matrix, Rational, Scalar, VertexId,
};
use proptest::prelude::*;

type Q = Rational;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn pseudoinverse_is_a_z_matrix(n in 2usize..11, seed in any::<u64>(), hi in 1i64..12) {
        let t = random_tree(n, seed, WeightModel::Int { lo: 1, hi }).unwrap();
        let b = DistLapBundle::<Q>::build(&t).unwrap();
        prop_assert_eq!(z_violation(&b.s_dag).unwrap(), None);
        prop_assert!(is_m_matrix_symmetric(&b.s_dag).unwrap());
        prop_assert!(is_m_matrix_symmetric(&b.s).unwrap());
        prop_assert_eq!(&b.s * &b.s_dag, centering(n));
    }

    #[test]
    fn cofactors_all_equal_gamma(n in 2usize..8, seed in any::<u64>()) {
        let t = random_tree(n, seed, WeightModel::Rat { lo: 1, hi: 3, max_den: 4 }).unwrap();
        let b = DistLapBundle::<Q>::build(&t).unwrap();
        prop_assert_eq!(b.s.adjugate().unwrap(), Matrix::ones(n, n).scale(&b.gamma));
        let nn = Q::from_integer(((n * n) as i64).into());
        prop_assert_eq!(b.s_star.det().unwrap(), nn * b.gamma.clone());
        prop_assert!(b.gamma > Q::from_integer(0.into()));
    }

    #[test]
    fn entry_formula_and_resistance_identity(n in 2usize..10, seed in any::<u64>()) {
        let t = random_tree(n, seed, WeightModel::Int { lo: 1, hi: 7 }).unwrap();
        let b = DistLapBundle::<Q>::build(&t).unwrap();
        let nn = Q::from_integer(((n * n) as i64).into());
        for a in 0..n {
            for c in 0..n {
                if a != c {
                    prop_assert_eq!(ones_cinv_ones(&b.s, a, c).unwrap() / nn.clone(), b.s_dag[(a, c)].clone());
                }
            }
        }
        let via = sdag_entry_via_cofactor_path::<Q>(&t, VertexId(1), VertexId(2)).unwrap();
        prop_assert_eq!(via, b.s_dag[(0, 1)].clone());
        let cl = classical_laplacian::<Q>(&t).unwrap();
        prop_assert!(check_p1_identity(&cl, &b.d).unwrap());
    }

    #[test]
    fn float_backend_tracks_exact(n in 2usize..13, seed in any::<u64>()) {
        let t = random_tree(n, seed, WeightModel::Int { lo: 1, hi: 10 }).unwrap();
        let exact = DistLapBundle::<Q>::build(&t).unwrap();
        let float = DistLapBundle::<f64>::build(&t).unwrap();
        for (x, y) in exact.s_dag.entries().zip(float.s_dag.entries()) {
            prop_assert!((x.to_f64() - y).abs() <= 1e-9);
        }
    }
}
