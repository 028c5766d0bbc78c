use super::*;
use crate::dga::DEFAULT_TRUNCATION;
use crate::liecm::instances::{all, cm_a, cm_c, cm_h, cm_t};
use crate::liecm::CrossedModule;

fn fails(s: &Suite) -> Vec<String> {
    s.failures().map(|c| c.id.clone()).collect()
}

fn base_store(cm: CrossedModule, seed: u64) -> FieldStore {
    FieldStore::new(cm, DEFAULT_TRUNCATION, 2, seed).unwrap()
}

#[test]
fn connection_relations_and_cartan() {
    for cm in all() {
        let id = cm.id.clone();
        let mut s = base_store(cm, 21);
        let a = make_connection(&mut s, "", Curvature::Generic).unwrap();
        let c = s.cartan_check().unwrap();
        assert!(c.passed(), "{id}: {:?}", fails(&c));
        let r = audit_connection(&s, &a, "", Scope::Operation).unwrap();
        assert!(r.passed(), "{id}: {:?}", fails(&r));
        assert_eq!(r.checks.len(), 12);
        let b = bianchi(&s, &a).unwrap();
        assert!(b.passed(), "{id}: {:?}", fails(&b));
    }
}

#[test]
fn flatness_flags() {
    let mut s = base_store(cm_a(), 4);
    let a = make_connection(&mut s, "", Curvature::Generic).unwrap();
    let f = make_connection(&mut s, "f", Curvature::FakeFlat).unwrap();
    let z = make_connection(&mut s, "z", Curvature::Flat).unwrap();
    assert!(!is_fake_flat(&s, &a));
    assert!(is_fake_flat(&s, &f) && !is_flat(&s, &f));
    assert!(is_flat(&s, &z));
    assert!(s.cartan_check().unwrap().passed());
    let mut h = base_store(cm_h(), 4);
    assert!(matches!(make_connection(&mut h, "", Curvature::FakeFlat), Err(GaugeError::FakeFlatNeedsTrivialTau(_))));
}

#[test]
fn zero_connection_on_abelian_module_is_flat() {
    let s = base_store(cm_a(), 2);
    let a = connection_from(&s, Expr::zero(), Expr::zero()).unwrap();
    assert!(is_flat(&s, &a));
    assert!(audit_connection(&s, &a, "", Scope::Structure).unwrap().passed());
}

#[test]
fn one_gauge_relations_and_action() {
    for cm in all() {
        let id = cm.id.clone();
        let mut s = base_store(cm, 33);
        let a = make_connection(&mut s, "", Curvature::Generic).unwrap();
        let p = make_one_gauge(&mut s, "").unwrap();
        let c = s.cartan_check().unwrap();
        assert!(c.passed(), "{id}: {:?}", fails(&c));
        let r = audit_one_gauge(&s, &p, "", Scope::Operation).unwrap();
        assert!(r.passed(), "{id}: {:?}", fails(&r));
        let ga = act_one_gauge(&p, &a);
        let r = audit_connection(&s, &ga, "acted.", Scope::Operation).unwrap();
        assert!(r.passed(), "{id}: {:?}", fails(&r));
    }
}

#[test]
fn tampered_j_k_is_detected() {
    let mut s = base_store(cm_c(), 5);
    s.tamper = Some(Tamper::GaugeJK);
    let _ = make_connection(&mut s, "", Curvature::Generic).unwrap();
    let _ = make_one_gauge(&mut s, "").unwrap();
    let c = s.cartan_check().unwrap();
    assert!(c.failures().any(|f| f.id.ends_with(".K") && f.witness.is_some()), "{:?}", fails(&c));
}

#[test]
fn composition_and_inverse() {
    for cm in [cm_c(), cm_h(), cm_a()] {
        let id = cm.id.clone();
        let mut s = base_store(cm, 8);
        let a = make_connection(&mut s, "", Curvature::Generic).unwrap();
        let p1 = make_one_gauge(&mut s, "1").unwrap();
        let p2 = make_one_gauge(&mut s, "2").unwrap();
        let p21 = compose_one_gauge(&s, &p2, &p1).unwrap();
        let r = audit_one_gauge(&s, &p21, "composite.", Scope::Operation).unwrap();
        assert!(r.passed(), "{id}: {:?}", fails(&r));
        // left action law
        let lhs = act_one_gauge(&p2, &act_one_gauge(&p1, &a));
        let rhs = act_one_gauge(&p21, &a);
        for (x, y) in [(&lhs.omega, &rhs.omega), (&lhs.big_omega, &rhs.big_omega), (&lhs.theta, &rhs.theta), (&lhs.big_theta, &rhs.big_theta)] {
            assert!(s.witness(&x.sub(y)).is_none(), "{id}");
        }
        let inv = invert_one_gauge(&s, &p1).unwrap();
        let back = act_one_gauge(&inv, &act_one_gauge(&p1, &a));
        for (x, y) in [(&back.omega, &a.omega), (&back.big_omega, &a.big_omega), (&back.big_theta, &a.big_theta)] {
            assert!(s.witness(&x.sub(y)).is_none(), "{id}");
        }
        let e = compose_one_gauge(&s, &inv, &p1).unwrap();
        assert!(s.witness(&e.h).is_none() && s.witness(&e.k).is_none() && s.witness(&e.j).is_none());
    }
}

#[test]
fn flat_stays_flat() {
    let mut s = base_store(cm_h(), 12);
    let a = make_connection(&mut s, "", Curvature::Flat).unwrap();
    let p = make_one_gauge(&mut s, "").unwrap();
    assert!(is_flat(&s, &act_one_gauge(&p, &a)));
    let mut s = base_store(cm_a(), 12);
    let p = make_one_gauge(&mut s, "").unwrap();
    let f = make_connection(&mut s, "f", Curvature::FakeFlat).unwrap();
    let gf = act_one_gauge(&p, &f);
    assert!(is_fake_flat(&s, &gf) && !is_flat(&s, &gf));
}

#[test]
fn two_gauge_relations_and_gauge_for_gauge() {
    for cm in all() {
        let id = cm.id.clone();
        let mut s = base_store(cm, 44);
        let a = make_connection(&mut s, "", Curvature::Generic).unwrap();
        let p = make_one_gauge(&mut s, "").unwrap();
        let eps = make_two_gauge(&mut s, &a, "").unwrap();
        let c = s.cartan_check().unwrap();
        assert!(c.passed(), "{id}: {:?}", fails(&c));
        let r = audit_two_gauge(&s, &eps, &a, "", Scope::Operation).unwrap();
        assert!(r.passed(), "{id}: {:?}", fails(&r));
        let ep = act_two_gauge(&s, &eps, &p, &a).unwrap();
        let r = audit_one_gauge(&s, &ep, "2-gauged.", Scope::Operation).unwrap();
        assert!(r.passed(), "{id}: {:?}", fails(&r));
        let r = gauge_for_gauge(&s, &eps, &p, &a).unwrap();
        assert!(r.passed(), "{id}: {:?}", fails(&r));
    }
}

#[test]
fn gauge_for_gauge_collapses_when_fake_flat() {
    for (cm, c) in [(cm_h(), Curvature::Flat), (cm_a(), Curvature::FakeFlat)] {
        let mut s = base_store(cm, 9);
        let a = make_connection(&mut s, "", c).unwrap();
        let p = make_one_gauge(&mut s, "").unwrap();
        let eps = make_two_gauge(&mut s, &a, "").unwrap();
        let ep = act_two_gauge(&s, &eps, &p, &a).unwrap();
        let (a1, a2) = (act_one_gauge(&ep, &a), act_one_gauge(&p, &a));
        assert!(s.witness(&a1.omega.sub(&a2.omega)).is_none());
        assert!(s.witness(&a1.big_omega.sub(&a2.big_omega)).is_none());
        assert!(s.witness(&a1.big_theta.sub(&a2.big_theta)).is_none());
    }
    // with curvature the Omega components differ
    let mut s = base_store(cm_h(), 9);
    let a = make_connection(&mut s, "", Curvature::Generic).unwrap();
    let p = make_one_gauge(&mut s, "").unwrap();
    let eps = make_two_gauge(&mut s, &a, "").unwrap();
    let ep = act_two_gauge(&s, &eps, &p, &a).unwrap();
    let (a1, a2) = (act_one_gauge(&ep, &a), act_one_gauge(&p, &a));
    assert!(s.witness(&a1.big_omega.sub(&a2.big_omega)).is_some());
}

#[test]
fn two_gauge_refuses_other_connection() {
    let mut s = base_store(cm_c(), 1);
    let a = make_connection(&mut s, "a", Curvature::Generic).unwrap();
    let b = make_connection(&mut s, "b", Curvature::Generic).unwrap();
    let p = make_one_gauge(&mut s, "").unwrap();
    let eps = make_two_gauge(&mut s, &a, "").unwrap();
    assert!(matches!(act_two_gauge(&s, &eps, &p, &b), Err(GaugeError::ReferenceMismatch { .. })));
}

#[test]
fn specialty_is_preserved() {
    for cm in [cm_c(), cm_h()] {
        let mut s = base_store(cm, 17);
        let a = make_connection(&mut s, "", Curvature::Generic).unwrap();
        let p = make_one_gauge(&mut s, "").unwrap();
        let generic = specialty_check(&s, &[("Omega", &a.big_omega), ("Theta", &a.big_theta)]);
        assert!(!generic.passed());
        let r = s
            .restriction(&[a.big_omega.clone(), a.big_theta.clone(), p.j.clone(), p.k.clone()], &[])
            .unwrap();
        assert!(r.cartan_check().unwrap().passed());
        let ga = act_one_gauge(&p, &a);
        let sp = specialty_check(&r, &[("Omega", &ga.big_omega), ("Theta", &ga.big_theta)]);
        assert!(sp.passed(), "{:?}", fails(&sp));
        assert!(audit_connection(&r, &ga, "", Scope::Operation).unwrap().passed());
        let gp = specialty_check(&r, &[("J", &p.j), ("K", &p.k)]);
        assert!(gp.passed());
    }
}

#[test]
fn ordinary_theory_degeneration() {
    let mut s = base_store(cm_t(), 3);
    let a = make_connection(&mut s, "", Curvature::Generic).unwrap();
    let p = make_one_gauge(&mut s, "").unwrap();
    assert!(s.field_info(&a.big_omega).unwrap().syms.is_empty());
    let (d, z) = (s.d(), s.z());
    let (j, l) = (s.j(&z), s.l(&z));
    let (w, t, g, h) = (&a.omega, &a.theta, &p.g, &p.h);
    let ap = |dv: &Deriv, e: &Expr| s.apply(dv, e).unwrap();
    let x = j.x();
    // ordinary principal-bundle relations, written out independently
    let eqs = [
        ap(&d, w).sub(&w.comm(w).half().neg().add(t)),
        ap(&d, t).add(&w.comm(t)),
        ap(&j, w).sub(&x),
        ap(&j, t),
        ap(&l, w).add(&x.comm(w)),
        ap(&l, t).add(&x.comm(t)),
        ap(&d, &g.val).mul(&g.inv).add(h),
        ap(&d, h).add(&h.comm(h).half()),
        ap(&j, &g.val),
        ap(&j, h).sub(&x.sub(&g.ad(&x))),
        ap(&l, &g.val).mul(&g.inv).sub(&g.ad(&x).sub(&x)),
        ap(&l, h).add(&x.comm(h)),
        act_one_gauge(&p, &a).omega.sub(&g.ad(w).add(h)),
        act_one_gauge(&p, &a).theta.sub(&g.ad(t)),
    ];
    for (i, e) in eqs.iter().enumerate() {
        assert!(s.witness(e).is_none(), "relation {i}");
    }
    assert!(s.cartan_check().unwrap().passed());
}

