use super::*;
use crate::classgroup::ClassGroupParams;
use crate::field::WeilContext;
use crate::ideals::split_symbol;
use crate::oracle::relation_holds_for;
use crate::relations::{Relation, RelationEntry, RelationMeta};

fn field(q: i64, a1: i64, a2: i64) -> Arc<CmField> {
    Arc::new(CmField::new(&WeilContext::from_i64(q, a1, a2).unwrap()).unwrap())
}

fn store() -> Arc<ClassGroupStore> {
    Arc::new(ClassGroupStore::new(ClassGroupParams::default(), None))
}

fn world(cm: &Arc<CmField>, hidden: impl Fn(&OFIdeal) -> OFIdeal, seed: u64) -> (SimWorld, SimVariety) {
    let v = ofpi_ideal(cm).unwrap();
    let f = hidden(&v);
    SimWorld::build(cm.clone(), store(), &v, &f, seed).unwrap()
}

fn level(w: &SimWorld, a: &SimVariety, i: usize) -> u32 {
    w.reveal(a).unwrap().0[i]
}

/// Checks the neighbour structure of every vertex reachable through
/// `p`-isogenies from `a` within a few steps.
fn check_volcano(w: &SimWorld, a: SimVariety, i: usize) {
    let (p, depth) = w.volcano_primes()[i].clone();
    let chi = split_symbol(w.cm(), &p).unwrap();
    let mut todo = vec![a];
    let mut seen = BTreeSet::new();
    while let Some(x) = todo.pop() {
        if !seen.insert(x) || seen.len() > 40 {
            continue;
        }
        let e = level(w, &x, i);
        let ns = w.list_l_neighbors(&x, &p).unwrap();
        let up: Vec<_> = ns.iter().filter(|y| level(w, y, i) + 1 == e).collect();
        let same: Vec<_> = ns.iter().filter(|y| level(w, y, i) == e).collect();
        let down: Vec<_> = ns.iter().filter(|y| level(w, y, i) == e + 1).collect();
        assert_eq!(up.len() + same.len() + down.len(), ns.len());
        assert_eq!(up.len(), usize::from(e > 0));
        assert_eq!(same.len(), if e == 0 { (1 + chi) as usize } else { 0 });
        if e < depth {
            let (lv, _) = w.reveal(&x).unwrap();
            let mut lv2 = lv.clone();
            lv2[i] += 1;
            let h = &w.group(&lv).unwrap().h;
            let h2 = &w.group(&lv2).unwrap().h;
            assert_eq!(Int::from(down.len()), h2 / h);
        } else {
            assert!(down.is_empty());
        }
        for y in &down {
            let back = w.list_l_neighbors(y, &p).unwrap();
            let ups: Vec<_> = back.into_iter().filter(|z| level(w, z, i) == e).collect();
            assert_eq!(ups, vec![x]);
        }
        let mut sorted = ns.clone();
        sorted.sort();
        assert_eq!(sorted, ns);
        todo.extend(ns);
    }
}

#[test]
fn volcano_shape() {
    let cm = field(19, 1, 23);
    let (w, a) = world(&cm, OFIdeal::clone, 1);
    assert_eq!(w.volcano_primes().iter().map(|(_, k)| *k).max(), Some(3));
    let i = w.volcano_primes().iter().position(|(_, k)| *k == 3).unwrap();
    assert_eq!(level(&w, &a, i), 3);
    check_volcano(&w, a, i);

    let cm = field(29, 5, 37);
    let (w, a) = world(&cm, |_| OFIdeal::unit(), 2);
    for i in 0..w.volcano_primes().len() {
        check_volcano(&w, a, i);
    }
}

#[test]
fn surface_and_floor_counts() {
    let cm = field(13, 1, 23);
    let (w, a) = world(&cm, |_| OFIdeal::unit(), 5);
    let (p, depth) = w.volcano_primes()[0].clone();
    assert!(depth >= 2);
    let chi = split_symbol(&cm, &p).unwrap() as i64;
    let n = p.norm_u64() as i64;
    let ns = w.list_l_neighbors(&a, &p).unwrap();
    let mut x = *ns.iter().find(|y| level(&w, y, 0) == 1).unwrap();
    let mid = w.list_l_neighbors(&x, &p).unwrap();
    if depth > 1 {
        // unit indices are trivial here, so the down-degree is N(p)
        assert_eq!(mid.len() as i64, n + 1);
        assert_eq!(ns.len() as i64, 1 + chi + n - chi);
    }
    while level(&w, &x, 0) < depth {
        x = *w.list_l_neighbors(&x, &p).unwrap().iter().find(|y| level(&w, y, 0) > level(&w, &x, 0)).unwrap();
    }
    assert_eq!(w.list_l_neighbors(&x, &p).unwrap().len(), 1);
    assert_eq!(w.reveal_fplus(&x).unwrap(), *w.v());
}

#[test]
fn prime_action_is_a_group_action() {
    let cm = field(29, 5, 37);
    let (w, a) = world(&cm, OFIdeal::clone, 3);
    let l = crate::ideals::primes_over(&cm, &Order::maximal(), 11, 0).unwrap().remove(0);
    let b = w.apply_prime(&a, &l, 4).unwrap();
    assert_eq!(w.apply_prime(&b, &l, -4).unwrap(), a);
    let c = w.apply_prime(&w.apply_prime(&a, &l, 1).unwrap(), &l, 3).unwrap();
    assert_eq!(b, c);
    // conj(L) acts as L^{-1}
    assert_eq!(w.apply_prime(&b, &l.conj(&cm), 4).unwrap(), a);
    assert_eq!(w.reveal(&b).unwrap().0, w.reveal(&a).unwrap().0);
    let before = w.cost();
    w.apply_prime(&a, &l, -2).unwrap();
    let after = w.cost();
    assert_eq!(after.isogenies - before.isogenies, 2);
    assert_eq!(after.degree - before.degree, 2 * prime_below(&cm, &l).unwrap().norm_u64());
}

#[test]
fn inadmissible_primes_are_refused() {
    let cm = field(29, 5, 37);
    let (w, a) = world(&cm, OFIdeal::clone, 3);
    let (p, _) = w.volcano_primes()[0].clone();
    let l = PrimeOverL { ell: p.ell, rpoly: vec![0, 1] };
    assert!(matches!(w.apply_prime(&a, &l, 1), Err(Error::InadmissiblePrime(_))));
    let fake = PrimeOverL { ell: 11, rpoly: vec![0, 1] };
    if !crate::ideals::primes_over(&cm, &Order::maximal(), 11, 0).unwrap().contains(&fake) {
        assert!(matches!(w.apply_prime(&a, &fake, 1), Err(Error::InadmissiblePrime(_))));
    }
    let other = crate::ideals::primes_above(&cm, 2).unwrap().into_iter().find(|q| !q.ideal().divides(w.v())).unwrap();
    assert!(matches!(w.list_l_neighbors(&a, &other), Err(Error::NotVolcanoPrime(_))));
}

#[test]
fn relations_hold_exactly_where_the_class_group_says() {
    let cm = field(82307, 658, 263610);
    let st = store();
    let v = ofpi_ideal(&cm).unwrap();
    let l7 = PrimeOverL { ell: 7, rpoly: vec![6, 1, 1] };
    let pow = |e| Relation { entries: vec![RelationEntry { prime: l7.clone(), conjugate: false, exponent: e }], meta: RelationMeta::default() };
    for f in v.divisors(&cm).unwrap() {
        let (w, a) = SimWorld::build(cm.clone(), st.clone(), &v, &f, 9).unwrap();
        let g = st.get(&cm, &order_from_ideal(&cm, &f)).unwrap();
        for e in [5, 55, 60, 660] {
            let r = pow(e);
            assert_eq!(
                relation_holds_for(&cm, &w, &a, &r).unwrap(),
                crate::relations::relation_holds_in_order(&cm, &g, &r).unwrap()
            );
        }
    }
}

#[test]
fn worlds_are_deterministic() {
    let cm = field(29, 5, 37);
    let (w1, a1) = world(&cm, OFIdeal::clone, 11);
    let (w2, a2) = world(&cm, OFIdeal::clone, 11);
    let (_, a3) = world(&cm, OFIdeal::clone, 12);
    assert_eq!(a1, a2);
    assert_ne!(a1, a3);
    let p = w1.volcano_primes()[0].0.clone();
    assert_eq!(w1.list_l_neighbors(&a1, &p).unwrap(), w2.list_l_neighbors(&a2, &p).unwrap());
    assert!(w2.reveal(&a1).is_ok());
    let (w3, _) = world(&cm, OFIdeal::clone, 12);
    assert!(w3.reveal(&a1).is_err());
}
