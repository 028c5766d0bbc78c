use super::*;
use crate::dga::{register_adapted, DEFAULT_TRUNCATION};
use crate::gauge::{audit_connection, audit_one_gauge, audit_two_gauge, identity_gauge, make_connection, make_one_gauge, make_two_gauge, Curvature, Scope};
use crate::liecm::instances::{all, cm_a, cm_c, cm_h, cm_t};
use crate::liecm::CrossedModule;

fn fails(s: &Suite) -> Vec<String> {
    s.failures().map(|c| c.id.clone()).collect()
}

struct Fixture {
    s: FieldStore,
    co: AdaptedCoordinates,
    a: TwoConnection,
    p: OneGauge,
    eps: TwoGauge,
}

fn fixture(cm: CrossedModule, seed: u64, curvature: Curvature) -> Fixture {
    let mut s = FieldStore::new(cm, DEFAULT_TRUNCATION, 2, seed).unwrap();
    let co = register_adapted(&mut s, "").unwrap();
    let a = make_connection(&mut s, "", curvature).unwrap();
    let p = make_one_gauge(&mut s, "").unwrap();
    let eps = make_two_gauge(&mut s, &a, "").unwrap();
    Fixture { s, co, a, p, eps }
}

#[test]
fn basic_connection_is_basic_and_structured() {
    for cm in all() {
        let id = cm.id.clone();
        let f = fixture(cm, 3, Curvature::Generic);
        let ab = basicify_connection(&f.s, &f.a, &f.co).unwrap();
        let b = certify_basic(&f.s, &connection_parts(&ab)).unwrap();
        assert!(b.passed(), "{id}: {:?}", fails(&b));
        let r = audit_connection(&f.s, &ab, "basic.", Scope::Structure).unwrap();
        assert_eq!(r.checks.len(), 4);
        assert!(r.passed(), "{id}: {:?}", fails(&r));
    }
}

#[test]
fn coordinate_connection_has_zero_basic_part() {
    let f = fixture(cm_c(), 1, Curvature::Generic);
    let flat = crate::gauge::connection_from(&f.s, f.co.sigma.clone(), f.co.big_sigma.clone()).unwrap();
    let ab = basicify_connection(&f.s, &flat, &f.co).unwrap();
    assert!(f.s.witness(&ab.omega).is_none());
    assert!(f.s.witness(&ab.big_omega).is_none());
}

#[test]
fn basic_gauge_data() {
    for cm in all() {
        let id = cm.id.clone();
        let f = fixture(cm, 5, Curvature::Generic);
        let ab = basicify_connection(&f.s, &f.a, &f.co).unwrap();
        let pb = basicify_gauge(&f.s, &f.p, &f.co).unwrap();
        let eb = basicify_two_gauge(&f.s, &f.eps, &f.a, &ab, &f.co).unwrap();
        let mut parts: Vec<(&str, &Expr)> = gauge_parts(&pb).to_vec();
        parts.extend(two_gauge_parts(&eb));
        let b = certify_basic(&f.s, &parts).unwrap();
        assert!(b.passed(), "{id}: {:?}", fails(&b));
        let r = audit_one_gauge(&f.s, &pb, "basic.", Scope::Structure).unwrap();
        assert!(r.passed(), "{id}: {:?}", fails(&r));
        let r = audit_two_gauge(&f.s, &eb, &ab, "basic.", Scope::Structure).unwrap();
        assert!(r.passed(), "{id}: {:?}", fails(&r));
    }
}

#[test]
fn identity_gauge_basic() {
    let f = fixture(cm_h(), 2, Curvature::Generic);
    let pb = basicify_gauge(&f.s, &identity_gauge(), &f.co).unwrap();
    assert!(f.s.witness(&pb.g.val.sub(&Expr::ident())).is_none());
    assert!(f.s.witness(&pb.j).is_none());
}

#[test]
fn transformation_consistency() {
    for cm in all() {
        let id = cm.id.clone();
        let f = fixture(cm, 7, Curvature::Generic);
        let r = basic_transform_consistency(&f.s, &f.a, &f.p, Some(&f.eps), &f.co).unwrap();
        assert!(r.passed(), "{id}: {:?}", fails(&r));
        let r = basic_transform_consistency(&f.s, &f.a, &identity_gauge(), None, &f.co).unwrap();
        assert!(r.passed());
    }
    let f = fixture(cm_a(), 7, Curvature::FakeFlat);
    assert!(basic_transform_consistency(&f.s, &f.a, &f.p, Some(&f.eps), &f.co).unwrap().passed());
}

fn overlap(cm: CrossedModule, seed: u64) -> (Fixture, AdaptedCoordinates) {
    let mut f = fixture(cm, seed, Curvature::Generic);
    let co2 = register_adapted(&mut f.s, "'").unwrap();
    (f, co2)
}

#[test]
fn matching_data_basic_and_recoverable() {
    for cm in all() {
        let id = cm.id.clone();
        let (f, co2) = overlap(cm, 9);
        let m = matching_data(&f.s, &f.co, &co2).unwrap();
        let b = certify_basic(&f.s, &matching_parts(&m)).unwrap();
        assert!(b.passed(), "{id}: {:?}", fails(&b));
        let r = matching_recovery(&f.s, &m).unwrap();
        assert!(r.passed(), "{id}: {:?}", fails(&r));
    }
}

#[test]
fn identical_coordinates_match_trivially() {
    let f = fixture(cm_c(), 4, Curvature::Generic);
    let m = matching_data(&f.s, &f.co, &f.co).unwrap();
    assert!(f.s.witness(&m.f.val.sub(&Expr::ident())).is_none());
    for e in [&m.big_f, &m.s, &m.big_s] {
        assert!(f.s.witness(e).is_none());
    }
    assert!(matching_check(&f.s, &f.co, &f.co, &f.a, Some(&f.p), Some(&f.eps)).unwrap().passed());
}

#[test]
fn matching_relations() {
    for cm in all() {
        let id = cm.id.clone();
        let (f, co2) = overlap(cm, 10);
        let r = matching_check(&f.s, &f.co, &co2, &f.a, Some(&f.p), Some(&f.eps)).unwrap();
        assert_eq!(r.checks.len(), 10);
        assert!(r.passed(), "{id}: {:?}", fails(&r));
    }
}

#[test]
fn special_coordinates() {
    let (f, co2) = overlap(cm_h(), 11);
    let m = matching_data(&f.s, &f.co, &co2).unwrap();
    let mut kill: Vec<Expr> = special_coordinate_kill(&f.co).to_vec();
    kill.extend(special_coordinate_kill(&co2));
    let r = f.s.restriction(&kill, &[]).unwrap();
    assert!(r.witness(&m.big_f).is_none() && r.witness(&m.big_s).is_none());
    assert!(f.s.witness(&m.big_f).is_some());
    // special connection and gauge too
    kill.extend([f.a.big_omega.clone(), f.a.big_theta.clone(), f.p.j.clone(), f.p.k.clone()]);
    let r = f.s.restriction(&kill, &[]).unwrap();
    let ab = basicify_connection(&r, &f.a, &f.co).unwrap();
    let pb = basicify_gauge(&r, &f.p, &f.co).unwrap();
    for e in [&ab.big_omega, &ab.big_theta, &pb.j, &pb.k] {
        assert!(r.witness(e).is_none());
    }
}

#[test]
fn store_mismatch() {
    let f = fixture(cm_c(), 1, Curvature::Generic);
    let mut other = FieldStore::new(cm_c(), DEFAULT_TRUNCATION, 2, 1).unwrap();
    let co = register_adapted(&mut other, "").unwrap();
    assert!(matches!(basicify_connection(&f.s, &f.a, &co), Err(BasicError::StoreMismatch)));
    assert!(matches!(basicify_gauge(&other, &f.p, &co), Err(BasicError::StoreMismatch)));
}

#[test]
fn tampered_omega_b_is_detected() {
    let mut f = fixture(cm_c(), 6, Curvature::Generic);
    f.s.tamper = Some(Tamper::OmegaB);
    let ab = basicify_connection(&f.s, &f.a, &f.co).unwrap();
    let b = certify_basic(&f.s, &connection_parts(&ab)).unwrap();
    // j_Z kills both factors of the flipped term; l_Z Gamma does not vanish
    assert!(b.find("basic.j.Omega_b").unwrap().passed);
    let c = b.find("basic.l.Omega_b").unwrap();
    assert!(!c.passed && c.witness.is_some());
}

#[test]
fn ordinary_theory_local_description() {
    let (f, co2) = overlap(cm_t(), 12);
    let s = &f.s;
    let ab = basicify_connection(s, &f.a, &f.co).unwrap();
    let pb = basicify_gauge(s, &f.p, &f.co).unwrap();
    let m = matching_data(s, &f.co, &co2).unwrap();
    let gm = &f.co.gamma;
    // ordinary formulas written out
    let eqs = [
        ab.omega.sub(&gm.val.mul(&f.a.omega.sub(&f.co.sigma)).mul(&gm.inv)),
        pb.g.val.sub(&gm.val.mul(&f.p.g.val).mul(&gm.inv)),
        m.f.val.sub(&co2.gamma.val.mul(&gm.inv)),
        m.s.sub(&gm.val.mul(&co2.sigma.sub(&f.co.sigma)).mul(&gm.inv)),
        basicify_connection(s, &f.a, &co2).unwrap().omega.sub(&m.f.ad(&ab.omega.sub(&m.s))),
    ];
    for (i, e) in eqs.iter().enumerate() {
        assert!(s.witness(e).is_none(), "relation {i}");
    }
    assert!(matching_check(s, &f.co, &co2, &f.a, Some(&f.p), None).unwrap().passed());
}

