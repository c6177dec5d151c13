use std::sync::Arc;

use super::*;
use crate::classgroup::ClassGroupParams;
use crate::field::WeilContext;
use crate::sim::{SimVariety, SimWorld};

fn field(q: i64, a1: i64, a2: i64) -> Arc<CmField> {
    Arc::new(CmField::new(&WeilContext::from_i64(q, a1, a2).unwrap()).unwrap())
}

fn store() -> Arc<ClassGroupStore> {
    Arc::new(ClassGroupStore::new(ClassGroupParams::default(), None))
}

fn forced(c_bound: u64) -> DriverConfig {
    DriverConfig { c_bound, force: true, relation: RelationParams { seed: 7, ..Default::default() } }
}

fn sim(cm: &Arc<CmField>, st: &Arc<ClassGroupStore>, v: &OFIdeal, f: &OFIdeal, seed: u64) -> (SimWorld, SimVariety) {
    SimWorld::build(cm.clone(), st.clone(), v, f, seed).unwrap()
}

#[test]
fn climbing_finds_every_level() {
    let cm = field(19, 1, 23);
    let st = store();
    let v = ofpi_ideal(&cm).unwrap();
    let (p, depth) = v.factor(&cm).unwrap().into_iter().find(|(_, d)| *d == 3).unwrap();
    for e in 0..=depth {
        let f = with_exponent(&cm, &v, &p, e).unwrap();
        for seed in 0..3 {
            let (w, a) = sim(&cm, &st, &v, &f, seed);
            let (got, top) = isogeny_climb(&w, &a, &p, depth).unwrap();
            assert_eq!(got, e);
            assert_eq!(w.reveal_fplus(&top).unwrap().valuation(&cm, &p), 0);
            assert_eq!(w.reveal_fplus(&top).unwrap(), with_exponent(&cm, &f, &p, 0).unwrap());
        }
    }
    let (w, a) = sim(&cm, &st, &v, &OFIdeal::unit(), 0);
    assert_eq!(isogeny_climb(&w, &a, &p, 0).unwrap(), (0, a));
}

#[test]
fn climbing_from_a_depth_one_floor() {
    let cm = field(29, 5, 37);
    let st = store();
    let v = ofpi_ideal(&cm).unwrap();
    let (p, _) = v.factor(&cm).unwrap().into_iter().find(|(_, d)| *d == 1).unwrap();
    let vp = p.ideal();
    let (w, a) = sim(&cm, &st, &vp, &vp, 4);
    let up = w.list_l_neighbors(&a, &p).unwrap();
    assert_eq!(up.len(), 1);
    assert_eq!(isogeny_climb(&w, &a, &p, 1).unwrap(), (1, up[0]));
}

#[test]
fn worked_example_sweep() {
    let cm = field(82307, 658, 263610);
    let st = store();
    let v = ofpi_ideal(&cm).unwrap();
    for f in v.divisors(&cm).unwrap() {
        let (w, a) = sim(&cm, &st, &v, &f, 7);
        let r = compute_endoring(&cm, &st, &w, &a, &v, &forced(3)).unwrap();
        assert_eq!(r.fplus, f);
        assert!(r.climbed.is_empty());
        assert_eq!(r.tests.len(), 2);
    }
}

#[test]
fn requirements_gate_the_driver() {
    let cm = field(11, -9, 41);
    let st = store();
    let v = ofpi_ideal(&cm).unwrap();
    let (w, a) = sim(&cm, &st, &v, &v, 0);
    let cfg = DriverConfig { force: false, ..forced(3) };
    assert!(matches!(compute_endoring(&cm, &st, &w, &a, &v, &cfg), Err(Error::RequirementsViolated(_))));
    assert!(matches!(DriverConfig { c_bound: 2, ..forced(3) }.validate(), Err(Error::Precondition(_))));
}

#[test]
fn cutoff_does_not_change_the_answer() {
    for (q, a1, a2) in [(19, 1, 23), (29, 5, 37)] {
        let cm = field(q, a1, a2);
        let st = store();
        let v = ofpi_ideal(&cm).unwrap();
        for f in v.divisors(&cm).unwrap() {
            for c in [3, 12, 150] {
                let (w, a) = sim(&cm, &st, &v, &f, 3);
                let r = compute_endoring(&cm, &st, &w, &a, &v, &forced(c)).unwrap();
                assert_eq!(r.fplus, f, "C = {}", c);
                assert_eq!(w.reveal_fplus(&r.top).unwrap(), f.div_exact(&cm, &OFIdeal::from_factors(&cm, &r.climbed)).unwrap());
            }
        }
    }
}

#[test]
fn certificates_accept_only_the_truth() {
    let cm = field(82307, 658, 263610);
    let st = store();
    let v = ofpi_ideal(&cm).unwrap();
    let params = RelationParams { seed: 7, ..Default::default() };
    let divisors = v.divisors(&cm).unwrap();
    let certs: Vec<Certificate> = divisors.iter().map(|u| certify(&cm, &st, u, &v, &params).unwrap()).collect();
    assert!(certs[0].entries.iter().all(|e| e.expect == Expect::Holds && e.power == 1));
    assert_eq!(certs[0].entries.len(), 2);
    assert!(certs[3].entries.iter().all(|e| e.expect == Expect::Fails));
    assert_eq!(certs[3].entries.len(), 2);
    for f in &divisors {
        let (w, a) = sim(&cm, &st, &v, f, 1);
        for (u, c) in divisors.iter().zip(&certs) {
            let verdict = verify(&cm, &w, &a, c);
            assert_eq!(verdict.valid, u == f, "u = {:?}, f = {:?}: {:?}", u, f, verdict.reason);
        }
    }
    let again = certify(&cm, &st, &v, &v, &params).unwrap();
    assert_eq!(again.to_text(), certs[3].to_text());
    let text = certs[3].to_text();
    assert_eq!(Certificate::from_text(&cm, &text).unwrap(), certs[3]);
}

#[test]
fn trivial_certificate() {
    let cm = field(41, 1, 51);
    let st = store();
    let one = OFIdeal::unit();
    let c = certify(&cm, &st, &one, &one, &RelationParams::default()).unwrap();
    assert!(c.entries.is_empty());
    let (w, a) = sim(&cm, &st, &one, &one, 0);
    assert!(verify(&cm, &w, &a, &c).valid);
    assert_eq!(Certificate::from_text(&cm, &c.to_text()).unwrap(), c);
}

#[test]
fn malformed_certificates_are_rejected() {
    let cm = field(29, 5, 37);
    let st = store();
    let v = ofpi_ideal(&cm).unwrap();
    let params = RelationParams::default();
    let c = certify(&cm, &st, &v, &v, &params).unwrap();
    let (w, a) = sim(&cm, &st, &v, &v, 2);
    assert!(verify(&cm, &w, &a, &c).valid);

    let mut dropped = c.clone();
    dropped.entries.pop();
    let r = verify(&cm, &w, &a, &dropped);
    assert!(!r.valid && r.reason.unwrap().contains("missing"));

    let mut swapped = c.clone();
    swapped.u = OFIdeal::unit();
    assert!(!verify(&cm, &w, &a, &swapped).valid);

    let text = c.to_text();
    assert!(matches!(Certificate::from_text(&cm, &text.replace("cmendo-cert/1", "cmendo-cert/2")), Err(Error::Parse { line: 1, .. })));
    let bad = text.replace("expect = fails", "expect = maybe");
    match Certificate::from_text(&cm, &bad) {
        Err(Error::Parse { line, col, .. }) => {
            assert_eq!(bad.lines().nth(line - 1).unwrap(), "expect = maybe");
            assert_eq!(col, 10);
        }
        other => panic!("{:?}", other),
    }
    let other = field(41, 1, 51);
    assert!(Certificate::from_text(&other, &text).is_err());
}
