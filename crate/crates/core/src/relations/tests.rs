use super::*;
use rand::Rng;
use crate::classgroup::ClassGroupParams;
use crate::field::WeilContext;
use crate::orders::{ofpi_ideal, Order};
use crate::textfmt::Doc;

fn example_field() -> CmField {
    CmField::new(&WeilContext::from_i64(82307, 658, 263610).unwrap()).unwrap()
}

fn l7() -> PrimeOverL {
    PrimeOverL { ell: 7, rpoly: vec![6, 1, 1] }
}

fn power_of_l7(e: u64) -> Relation {
    Relation { entries: vec![RelationEntry { prime: l7(), conjugate: false, exponent: e }], meta: RelationMeta::default() }
}

#[test]
fn worked_example_decision_rule() {
    let cm = example_field();
    let store = ClassGroupStore::new(ClassGroupParams::default(), None);
    let v = ofpi_ideal(&cm).unwrap();
    let divisors = v.divisors(&cm).unwrap();
    assert_eq!(divisors.len(), 4);
    for p in v.factor(&cm).unwrap().into_iter().map(|(p, _)| p) {
        let params = RelationParams { seed: 7, ..Default::default() };
        let r = relation_for_prime_power(&cm, &store, &v, &p, 1, &params).unwrap();
        let o1 = order_from_ideal(&cm, &with_exponent(&cm, &v, &p, 0).unwrap());
        r.check_bounds(&cm, &o1.disc(&cm), params.k0).unwrap();
        for f in &divisors {
            let g = store.get(&cm, &order_from_ideal(&cm, f)).unwrap();
            let divides = p.ideal().divides(f);
            assert_eq!(relation_holds_in_order(&cm, &g, &r).unwrap(), !divides, "{} in O({:?})", p.label(&cm), f);
        }
    }
}

#[test]
fn worked_example_element_relations() {
    let cm = example_field();
    let store = ClassGroupStore::new(ClassGroupParams::default(), None);
    let v = ofpi_ideal(&cm).unwrap();
    let ps: Vec<RealPrime> = v.factor(&cm).unwrap().into_iter().map(|(p, _)| p).collect();
    let o11 = store.get(&cm, &order_from_ideal(&cm, &ps[0].ideal())).unwrap();
    let o131 = store.get(&cm, &order_from_ideal(&cm, &ps[1].ideal())).unwrap();
    assert!(relation_holds_in_order(&cm, &o11, &power_of_l7(60)).unwrap());
    assert!(!relation_holds_in_order(&cm, &o131, &power_of_l7(60)).unwrap());
    assert!(relation_holds_in_order(&cm, &o131, &power_of_l7(55)).unwrap());
    assert!(!relation_holds_in_order(&cm, &o11, &power_of_l7(55)).unwrap());
    assert!(relation_holds_in_order(&cm, &o11, &Relation::default()).unwrap());
    let r = power_of_l7(13);
    assert!(relation_holds_in_order(&cm, &o131, &r.concat(&r.conjugate_inverse())).unwrap());
}

#[test]
fn identical_orders_give_no_relation() {
    let cm = CmField::new(&WeilContext::from_i64(41, 1, 51).unwrap()).unwrap();
    let g = crate::classgroup::compute_class_group(&cm, &Order::maximal(), &ClassGroupParams::default()).unwrap();
    let params = RelationParams { max_trials: 40, ..Default::default() };
    match find_relation(&cm, &g, &g, &params) {
        Err(Error::NoRelationFound { trials, .. }) => assert_eq!(trials, 40),
        other => panic!("{:?}", other),
    }
}

#[test]
fn class_matches_the_ideal_product() {
    let cm = CmField::new(&WeilContext::from_i64(29, 5, 37).unwrap()).unwrap();
    let v = ofpi_ideal(&cm).unwrap();
    let o = order_from_ideal(&cm, &v);
    let g = crate::classgroup::compute_class_group(&cm, &o, &ClassGroupParams::default()).unwrap();
    let fb = factor_base(&cm, &ofpi(&cm), 60).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..30 {
        let items: Vec<(PrimeOverL, i64)> =
            (0..3).map(|_| (fb[rng.gen_range(0..fb.len())].clone(), rng.gen_range(-6..=6i64))).collect();
        let r = Relation::from_exponents(&cm, &items, RelationMeta::default());
        assert!(r.entries.iter().all(|e| !e.prime.canonical(&cm).1));
        let a = relation_ideal(&cm, &o, &r);
        assert_eq!(relation_holds_in_order(&cm, &g, &r).unwrap(), g.is_principal(&cm, &a).unwrap());
        let back = Relation::from_exponents(&cm, &r.items(&cm), RelationMeta::default());
        assert_eq!(back, r);
    }
}

#[test]
fn text_round_trip() {
    let cm = example_field();
    let r = Relation::from_exponents(
        &cm,
        &[(l7().conj(&cm), 4), (PrimeOverL { ell: 29, rpoly: vec![2, 1] }, 3)],
        RelationMeta { bound: 742, seed: 7, trials: 3 },
    );
    let mut d = Doc::new("rel/1");
    write_relation(d.section("relation"), &r);
    let text = d.render();
    assert!(text.contains("entry = 7 6 1 1 1 4\n"));
    let back = Doc::parse(&text, "rel/1").unwrap();
    assert_eq!(read_relation(&cm, &back.sections[0], 0).unwrap(), r);
    let bad = Doc::parse(&text.replace("7 6 1 1 1 4", "7 5 1 1 1 4"), "rel/1").unwrap();
    assert!(matches!(read_relation(&cm, &bad.sections[0], 0), Err(Error::Parse { line: 8, .. })));
}
