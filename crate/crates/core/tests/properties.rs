use std::sync::Arc;

use nalgebra::DMatrix;
use proptest::prelude::*;

use slplab_core::conjunction::{abstract_atoms, CompoundQuery};
use slplab_core::factorize::{build_slp_map, BlockSpec};
use slplab_core::featspace::{check_family_kernel_decomposition, check_logical_equivariance, check_slp};
use slplab_core::report::{Detail, Report};
use slplab_core::{EntitySet, Families, Permutation, QuerySpace, Relation, RelationAlgebra};

fn relation(n: usize, code: u64) -> Relation {
    let e = Arc::new(EntitySet::numbered(n).unwrap());
    Relation::from_code(e, code & ((1u64 << (n * n)) - 1))
}

proptest! {
    #[test]
    fn unary_laws(n in 1usize..=5, code in any::<u64>()) {
        let r = relation(n, code);
        prop_assert_eq!(r.negate().negate(), r.clone());
        prop_assert_eq!(r.converse().converse(), r.clone());
        prop_assert_eq!(r.negate().converse(), r.converse().negate());
        prop_assert_ne!(r.converse(), r.negate());
    }

    #[test]
    fn composition_laws(n in 1usize..=5, a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let e = Arc::new(EntitySet::numbered(n).unwrap());
        let mask = (1u64 << (n * n)) - 1;
        let (r, s, t) = (
            Relation::from_code(e.clone(), a & mask),
            Relation::from_code(e.clone(), b & mask),
            Relation::from_code(e.clone(), c & mask),
        );
        prop_assert_eq!(r.compose(&s).unwrap().converse(), s.converse().compose(&r.converse()).unwrap());
        prop_assert_eq!(
            r.compose(&s).unwrap().compose(&t).unwrap(),
            r.compose(&s.compose(&t).unwrap()).unwrap()
        );
        let id = Relation::identity(e);
        prop_assert_eq!(r.compose(&id).unwrap(), r.clone());
    }

    #[test]
    fn closure_is_closed(n in 1usize..=4, codes in prop::collection::vec(any::<u64>(), 1..4)) {
        let rels = codes.iter().map(|&c| relation(n, c)).collect();
        let alg = RelationAlgebra::close_unary(rels).unwrap();
        for i in 0..alg.len() {
            prop_assert_eq!(alg.neg(alg.neg(i)), i);
            prop_assert_eq!(alg.conv(alg.conv(i)), i);
            prop_assert_eq!(alg.relation(alg.neg(i)), &alg.relation(i).negate());
            prop_assert_eq!(alg.relation(alg.conv(i)), &alg.relation(i).converse());
        }
    }

    #[test]
    fn permutation_group_laws(seed in any::<u64>(), n in 1usize..=6) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = Permutation::random(n, &mut rng);
        let b = Permutation::random(n, &mut rng);
        let c = Permutation::random(n, &mut rng);
        prop_assert_eq!(a.compose(&b).compose(&c), a.compose(&b.compose(&c)));
        prop_assert_eq!(a.compose(&a.inverse()), Permutation::identity(n));
        prop_assert_eq!(a.compose(&b).sign(), a.sign() * b.sign());
        for x in 0..n {
            prop_assert_eq!(a.compose(&b).apply(x), a.apply(b.apply(x)));
        }
    }
}

fn compound() -> impl Strategy<Value = CompoundQuery> {
    let leaf = (0usize..3).prop_map(|j| CompoundQuery::atom(abstract_atoms(3)[j]));
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|x| CompoundQuery::Neg(Box::new(x))),
            prop::collection::vec(inner, 1..4).prop_map(CompoundQuery::Conj),
        ]
    })
}

proptest! {
    #[test]
    fn normalization_is_idempotent(x in compound()) {
        let once = x.clone().normalize();
        prop_assert_eq!(once.clone().normalize(), once.clone());
        prop_assert!(once.depth() <= x.depth());
    }

    #[test]
    fn conjunction_is_commutative_and_idempotent(x in compound(), y in compound()) {
        prop_assert_eq!(x.clone().and(y.clone()), y.clone().and(x.clone()));
        let nx = x.clone().normalize();
        prop_assert_eq!(x.clone().and(x.clone()), nx.clone());
        prop_assert_eq!(nx.clone().negate().negate(), nx);
    }
}

fn fixed_space() -> QuerySpace {
    let e = Arc::new(EntitySet::numbered(3).unwrap());
    let r = Relation::from_pairs(e.clone(), [(0, 1), (1, 2)]).unwrap();
    let s = Relation::from_pairs(e, [(0, 2), (2, 0), (1, 1)]).unwrap();
    QuerySpace::new(RelationAlgebra::close_unary(vec![r, s]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn recoordinatization_preserves_slp(seed in 0u64..1000, entries in prop::collection::vec(-1.0f64..1.0, 64)) {
        let space = fixed_space();
        let fams = Families::compute(&space).unwrap();
        let f = build_slp_map(&space, &BlockSpec::generic_slp(&space), seed).unwrap();
        let d = f.dim();
        // Diagonally dominant, hence invertible.
        let a = DMatrix::from_fn(d, d, |i, j| {
            let x = entries[(i * d + j) % entries.len()] * 0.5 / d as f64;
            if i == j { 1.0 + x.abs() } else { x }
        });
        let g = f.features().recoordinatize(&a).unwrap();
        let tol = 1e-12 * g.max_row_norm();
        prop_assert!(check_logical_equivariance(&g, &space, &fams, tol).pass);
        prop_assert!(check_slp(&g, &space, &fams).pass);
        prop_assert!(check_family_kernel_decomposition(&g, &space, &fams).pass);
    }
}

fn detail() -> impl Strategy<Value = Detail> {
    let leaf = prop_oneof![
        any::<bool>().prop_map(Detail::Bool),
        any::<i64>().prop_map(Detail::Int),
        (-1e12f64..1e12).prop_map(Detail::Num),
        "[a-z]{0,8}".prop_map(Detail::Text),
    ];
    leaf.prop_recursive(3, 16, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..4).prop_map(Detail::List),
            prop::collection::btree_map("[a-z]{1,4}", inner, 0..4).prop_map(Detail::Map),
        ]
    })
}

proptest! {
    #[test]
    fn report_json_round_trips(
        pass in any::<bool>(),
        dev in 0.0f64..10.0,
        details in prop::collection::btree_map("[a-z_]{1,6}", detail(), 0..5),
    ) {
        let mut r = Report::new("prop", pass, dev);
        r.details = details;
        let text = r.to_json_pretty().unwrap();
        let back: Report = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &r);
        prop_assert_eq!(back.to_json_pretty().unwrap(), text);
    }
}
