use bddcit::{
    build_handler, check_and, generate, oracle_check, verify, Assignment, BddManager, CmpOp, CompiledConstraints,
    ConstraintExpr, Encoding, EncodingMode, GenerateOptions, HandlerKind, HandlerOptions, Limits, ParamOrdering,
    Parameter, PartialValidityBdd, QuantOrder, Relation, SutModel,
};
use proptest::prelude::*;

fn relation(domains: Vec<u32>) -> impl Strategy<Value = Relation> {
    let n = domains.len();
    let doms = domains.clone();
    let const_rel = (0..n, 0..6usize, any::<u32>()).prop_map(move |(param, op, v)| {
        let ops = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];
        Relation::ParamConst {
            param,
            op: ops[op],
            value: v % doms[param],
        }
    });
    let pair_rel = (0..n, 0..n, any::<bool>()).prop_map(|(left, right, equal)| Relation::ParamParam {
        left,
        right,
        equal,
    });
    prop_oneof![3 => const_rel, 1 => pair_rel]
}

fn expr(domains: Vec<u32>) -> impl Strategy<Value = ConstraintExpr> {
    relation(domains).prop_map(ConstraintExpr::Rel).prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(ConstraintExpr::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| ConstraintExpr::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| ConstraintExpr::or(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| ConstraintExpr::implies(a, b)),
        ]
    })
}

fn model() -> impl Strategy<Value = SutModel> {
    prop::collection::vec(1u32..=4, 1..=5).prop_flat_map(|domains| {
        let params: Vec<Parameter> = domains
            .iter()
            .enumerate()
            .map(|(i, &d)| Parameter::with_size(format!("P{i}"), d).unwrap())
            .collect();
        prop::collection::vec(expr(domains), 0..=3)
            .prop_map(move |cs| SutModel::new(params.clone(), cs).expect("well formed"))
    })
}

fn model_and_assignments() -> impl Strategy<Value = (SutModel, Vec<Assignment>)> {
    model().prop_flat_map(|m| {
        let cell: Vec<_> = m
            .params()
            .iter()
            .map(|p| prop::option::weighted(0.6, 0..p.domain_size()))
            .collect();
        let rows = prop::collection::vec(cell.prop_map(Assignment::new), 1..40);
        (Just(m), rows)
    })
}

fn compiled(m: &SutModel, mode: EncodingMode, ordering: ParamOrdering) -> CompiledConstraints {
    CompiledConstraints::compile(m, Encoding::new(m, mode, ordering), Limits::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn handlers_agree_with_oracle((m, rows) in model_and_assignments()) {
        let mut cc = compiled(&m, EncodingMode::Full, ParamOrdering::Distance);
        let pb = PartialValidityBdd::build(
            compiled(&m, EncodingMode::WithDash, ParamOrdering::Declaration),
            QuantOrder::Down,
        ).unwrap();
        for a in &rows {
            let expected = oracle_check(&m, a);
            prop_assert_eq!(check_and(&mut cc, a).unwrap(), expected, "check_and on {}", a);
            prop_assert_eq!(pb.check_traverse(a).unwrap(), expected, "check_traverse on {}", a);
        }
    }

    #[test]
    fn validity_is_monotone_under_forgetting((m, rows) in model_and_assignments(), drop in any::<prop::sample::Index>()) {
        let pb = PartialValidityBdd::build(
            compiled(&m, EncodingMode::WithDash, ParamOrdering::Distance),
            QuantOrder::Up,
        ).unwrap();
        for a in &rows {
            if pb.check_traverse(a).unwrap() {
                let mut weaker = a.clone();
                weaker.set(drop.index(a.len()), None);
                prop_assert!(pb.check_traverse(&weaker).unwrap(), "{} valid but {} not", a, weaker);
            }
        }
    }

    #[test]
    fn orderings_accept_the_same_full_cases(m in model()) {
        let a = compiled(&m, EncodingMode::Full, ParamOrdering::Distance);
        let b = compiled(&m, EncodingMode::Full, ParamOrdering::Declaration);
        let mut values = vec![0u32; m.param_count()];
        loop {
            prop_assert_eq!(a.accepts(&values).unwrap(), b.accepts(&values).unwrap());
            let mut i = 0;
            while i < values.len() {
                values[i] += 1;
                if values[i] < m.domain_size(i) { break; }
                values[i] = 0;
                i += 1;
            }
            if i == values.len() { break; }
        }
        prop_assert_eq!(a.manager.sat_count(a.f).unwrap(), b.manager.sat_count(b.f).unwrap());
    }

    #[test]
    fn equivalent_constructions_share_a_node(vars in 1usize..8, picks in prop::collection::vec((0usize..8, 0usize..8), 1..6)) {
        let mut mgr = BddManager::new(vars);
        for (i, j) in picks {
            let (x, y) = (mgr.mk_var(i % vars).unwrap(), mgr.mk_var(j % vars).unwrap());
            let xy = mgr.and(x, y).unwrap();
            let yx = mgr.and(y, x).unwrap();
            prop_assert_eq!(xy, yx);
            // De Morgan: ¬(x ∧ y) = ¬x ∨ ¬y
            let lhs = mgr.not(xy).unwrap();
            let (nx, ny) = (mgr.not(x).unwrap(), mgr.not(y).unwrap());
            let rhs = mgr.or(nx, ny).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
        prop_assert!(mgr.check_invariants().is_ok());
    }

    #[test]
    fn generated_suites_verify(m in model(), t in 1usize..=3) {
        prop_assume!(t <= m.param_count());
        let mut h = build_handler(&m, HandlerKind::BddPartialUp, HandlerOptions::default()).unwrap();
        let suite = generate(&m, t, &mut h, &GenerateOptions::default()).unwrap();
        let mut oracle = build_handler(&m, HandlerKind::Oracle, HandlerOptions::default()).unwrap();
        let report = verify(&m, &suite.rows, t, &mut oracle).unwrap();
        prop_assert!(report.accepted(), "{:?}", report);
        let again = generate(&m, t, &mut h, &GenerateOptions::default()).unwrap();
        prop_assert_eq!(suite.rows, again.rows);
    }
}
