use distlap::rmatrix::{
    build_r, certificate_domains, det_factorization_check, partition_chain, psd_certificate,
    sign_link_check, verify_block_structure,
};
use distlap::verify::{random_tree, WeightModel};
use distlap::{Rational, VertexId};
use proptest::prelude::*;

type Q = Rational;

fn instance() -> impl Strategy<Value = (usize, u64, usize, usize)> {
    (3usize..11).prop_flat_map(|n| (Just(n), any::<u64>(), 1..=n, 1..n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn r_matches_its_definition((n, seed, a, off) in instance()) {
        let t = random_tree(n, seed, WeightModel::Int { lo: 1, hi: 9 }).unwrap();
        let b = 1 + (a - 1 + off) % n;
        let (a, b) = (VertexId(a), VertexId(b));
        let r = build_r::<Q>(&t, a, b).unwrap();
        let d = |x: VertexId, y: VertexId| t.distance(x, y).unwrap();
        for &x in &r.index_order {
            for &y in &r.index_order {
                let expect = if x == y {
                    let eta: Q = t.vertices().map(|k| d(x, k)).fold(Q::from_integer(0.into()), |s, v| s + v);
                    -d(b, a) + d(x, a) + d(b, x) + eta
                } else {
                    -d(b, a) + d(x, a) + d(b, y) - d(x, y)
                };
                prop_assert_eq!(r.entry(x, y).unwrap().clone(), expect);
            }
        }
    }

    #[test]
    fn proof_structure_holds((n, seed, a, off) in instance()) {
        let t = random_tree(n, seed, WeightModel::Rat { lo: 1, hi: 5, max_den: 3 }).unwrap();
        let b = 1 + (a - 1 + off) % n;
        let (a, b) = (VertexId(a), VertexId(b));
        let r = build_r::<Q>(&t, a, b).unwrap();
        let chain = partition_chain(&t, a, b).unwrap();
        let checks = verify_block_structure(&r, &chain).unwrap();
        prop_assert!(checks.all(), "{:?}", checks.witnesses);
        let cascade = det_factorization_check(&r, &chain).unwrap();
        prop_assert!(cascade.holds());
        prop_assert!(cascade.det_r >= Q::from_integer(0.into()));
        for (e, alpha) in certificate_domains(&chain) {
            let c = psd_certificate(&t, &r, &e, alpha).unwrap();
            prop_assert!(c.holds());
        }
        let link = sign_link_check::<Q>(&t, a, b).unwrap();
        prop_assert!(link.holds());
    }
}
