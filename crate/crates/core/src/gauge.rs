//! 2-connections, 1-gauge and 2-gauge transformations as store extensions,
//! their defining relations, actions, group laws and specialty.
//!
//! `theta`, `Theta`, `h`, `K` and `C` are registered as generators whose
//! defining equations are installed as `d`-images of the primary fields; all
//! remaining relations become checks.

use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use crate::dga::{Deriv, DgaError, Expr, FieldStore, GExpr, Images};
use crate::liecm::{Alg, Orientation, TauKind};
use crate::report::Suite;
use crate::tamper::Tamper;

#[derive(Debug, Error)]
pub enum GaugeError {
    #[error(transparent)]
    Dga(#[from] DgaError),
    #[error("2-gauge transformation refers to connection #{expected}, got #{found}")]
    ReferenceMismatch { expected: u64, found: u64 },
    #[error("a fake-flat connection with free Theta needs tau_dot = 0 (crossed module {0})")]
    FakeFlatNeedsTrivialTau(String),
}

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

pub fn fresh_id() -> u64 {
    NEXT_ID.fetch_add(1, Ordering::Relaxed)
}

/// Which defining relations an audit evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    /// `d`, `j_Z` and `l_Z` relations.
    Operation,
    /// `d` relations only, as for basic data.
    Structure,
}

fn push_rows(store: &FieldStore, s: &mut Suite, prefix: &str, scope: Scope, rows: Vec<(&str, &str, Expr, Expr)>) {
    for (id, anchor, lhs, rhs) in rows {
        if scope == Scope::Structure && !id.starts_with("d_") {
            continue;
        }
        s.push(store.check_eq(format!("{prefix}{id}"), anchor, &lhs, &rhs));
    }
}

/// Connection components as expressions; curvature included.
#[derive(Clone, Debug)]
pub struct TwoConnection {
    pub id: u64,
    pub omega: Expr,
    pub big_omega: Expr,
    pub theta: Expr,
    pub big_theta: Expr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Curvature {
    Generic,
    /// `theta = 0`
    FakeFlat,
    /// `theta = 0`, `Theta = 0`
    Flat,
}

#[derive(Clone, Debug)]
pub struct OneGauge {
    pub g: GExpr,
    pub j: Expr,
    pub h: Expr,
    pub k: Expr,
}

#[derive(Clone, Debug)]
pub struct TwoGauge {
    pub e: GExpr,
    pub c: Expr,
    pub reference: u64,
}

pub(crate) fn tau_group(store: &FieldStore, e: &GExpr) -> GExpr {
    match store.cm.tau {
        TauKind::Inclusion => e.clone(),
        TauKind::Trivial => GExpr::one(),
    }
}

/// With `theta = 0` the Bianchi identity forces `tau_dot(Theta) = 0`, so
/// `FakeFlat` is only accepted when `tau_dot` vanishes identically.
pub fn make_connection(store: &mut FieldStore, label: &str, curvature: Curvature) -> Result<TwoConnection, GaugeError> {
    if curvature == Curvature::FakeFlat && store.cm.tau != TauKind::Trivial {
        return Err(GaugeError::FakeFlatNeedsTrivialTau(store.cm.id.clone()));
    }
    let omega = store.add_field(&format!("omega{label}"), Alg::G, 1)?;
    let big_omega = store.add_field(&format!("Omega{label}"), Alg::E, 2)?;
    let theta = match curvature {
        Curvature::Generic => store.add_field(&format!("theta{label}"), Alg::G, 2)?,
        _ => Expr::zero(),
    };
    let big_theta = match curvature {
        Curvature::Flat => Expr::zero(),
        _ => store.add_field(&format!("Theta{label}"), Alg::E, 3)?,
    };
    let (w, bw, t, bt) = (omega.clone(), big_omega.clone(), theta.clone(), big_theta.clone());
    store.set_images(
        &omega,
        Images::new(
            w.comm(&w).half().neg().add(&bw.tau()).add(&t),
            |d| d.x(),
            {
                let w = w.clone();
                move |d| d.x().comm(&w).neg().add(&d.xs().tau())
            },
        ),
    );
    store.set_images(
        &big_omega,
        Images::new(w.comm(&bw).neg().add(&bt), |d| d.xs(), {
            let (w, bw) = (w.clone(), bw.clone());
            move |d| d.x().comm(&bw).neg().add(&w.comm(&d.xs()))
        }),
    );
    if curvature == Curvature::Generic {
        store.set_images(&theta, Images::new(w.comm(&t).neg().sub(&bt.tau()), |_| Expr::zero(), {
            let t = t.clone();
            move |d| d.x().comm(&t).neg()
        }));
    }
    if curvature != Curvature::Flat {
        store.set_images(
            &big_theta,
            Images::new(w.comm(&bt).neg().add(&t.comm(&bw)), |_| Expr::zero(), {
                let (t, bt) = (t.clone(), bt.clone());
                move |d| d.x().comm(&bt).neg().add(&t.comm(&d.xs()))
            }),
        );
    }
    Ok(TwoConnection { id: fresh_id(), omega, big_omega, theta, big_theta })
}

/// Curvature of connection components given as expressions.
pub fn connection_from(store: &FieldStore, omega: Expr, big_omega: Expr) -> Result<TwoConnection, GaugeError> {
    let d = store.d();
    let theta = store.apply(&d, &omega)?.add(&omega.comm(&omega).half()).sub(&big_omega.tau());
    let big_theta = store.apply(&d, &big_omega)?.add(&omega.comm(&big_omega));
    Ok(TwoConnection { id: fresh_id(), omega, big_omega, theta, big_theta })
}

/// The defining relations of a 2-connection (twelve under `Scope::Operation`),
/// evaluated on expressions.
pub fn audit_connection(store: &FieldStore, a: &TwoConnection, prefix: &str, scope: Scope) -> Result<Suite, GaugeError> {
    let mut s = Suite::new(format!("{prefix}connection"));
    let z = store.z();
    let (d, j, l) = (store.d(), store.j(&z), store.l(&z));
    let (w, bw, t, bt) = (&a.omega, &a.big_omega, &a.theta, &a.big_theta);
    let (x, xs) = (j.x(), j.xs());
    let ap = |dv: &Deriv, e: &Expr| store.apply(dv, e);
    let rows: Vec<(&str, &str, Expr, Expr)> = vec![
        ("d_omega", "2-connection: d omega = -[omega,omega]/2 + tau_dot(Omega) + theta", ap(&d, w)?, w.comm(w).half().neg().add(&bw.tau()).add(t)),
        ("d_Omega", "2-connection: d Omega = -.mu.(omega,Omega) + Theta", ap(&d, bw)?, w.comm(bw).neg().add(bt)),
        ("d_theta", "2-connection Bianchi: d theta = -[omega,theta] - tau_dot(Theta)", ap(&d, t)?, w.comm(t).neg().sub(&bt.tau())),
        ("d_Theta", "2-connection Bianchi: d Theta = -.mu.(omega,Theta) + .mu.(theta,Omega)", ap(&d, bt)?, w.comm(bt).neg().add(&t.comm(bw))),
        ("j_omega", "2-connection: j_Z omega = x", ap(&j, w)?, x.clone()),
        ("j_Omega", "2-connection: j_Z Omega = X", ap(&j, bw)?, xs.clone()),
        ("j_theta", "2-connection: j_Z theta = 0", ap(&j, t)?, Expr::zero()),
        ("j_Theta", "2-connection: j_Z Theta = 0", ap(&j, bt)?, Expr::zero()),
        ("l_omega", "2-connection: l_Z omega = -[x,omega] + tau_dot(X)", ap(&l, w)?, x.comm(w).neg().add(&xs.tau())),
        ("l_Omega", "2-connection: l_Z Omega = -.mu.(x,Omega) + .mu.(omega,X)", ap(&l, bw)?, x.comm(bw).neg().add(&w.comm(&xs))),
        ("l_theta", "2-connection: l_Z theta = -[x,theta]", ap(&l, t)?, x.comm(t).neg()),
        ("l_Theta", "2-connection: l_Z Theta = -.mu.(x,Theta) + .mu.(theta,X)", ap(&l, bt)?, x.comm(bt).neg().add(&t.comm(&xs))),
    ];
    push_rows(store, &mut s, &format!("{prefix}connection."), scope, rows);
    Ok(s)
}

/// Bianchi identities through the defining expressions of the curvature:
/// `theta_def = d omega + [omega,omega]/2 - tau_dot Omega`, likewise `Theta_def`.
pub fn bianchi(store: &FieldStore, a: &TwoConnection) -> Result<Suite, GaugeError> {
    let mut s = Suite::new("bianchi");
    let def = connection_from(store, a.omega.clone(), a.big_omega.clone())?;
    let d = store.d();
    let r1 = store.apply(&d, &def.theta)?.add(&a.omega.comm(&def.theta)).add(&def.big_theta.tau());
    let r2 = store.apply(&d, &def.big_theta)?.add(&a.omega.comm(&def.big_theta)).sub(&def.theta.comm(&a.big_omega));
    s.push(store.check_zero("bianchi.theta", "Bianchi: d theta + [omega,theta] + tau_dot(Theta) = 0", &r1));
    s.push(store.check_zero("bianchi.Theta", "Bianchi: d Theta + .mu.(omega,Theta) - .mu.(theta,Omega) = 0", &r2));
    Ok(s)
}

pub fn is_fake_flat(store: &FieldStore, a: &TwoConnection) -> bool {
    store.witness(&a.theta).is_none()
}

pub fn is_flat(store: &FieldStore, a: &TwoConnection) -> bool {
    is_fake_flat(store, a) && store.witness(&a.big_theta).is_none()
}

pub fn make_one_gauge(store: &mut FieldStore, label: &str) -> Result<OneGauge, GaugeError> {
    let g = store.add_group(&format!("g{label}"), Alg::G, Orientation::Right)?;
    let j = store.add_field(&format!("J{label}"), Alg::E, 1)?;
    let h = store.add_field(&format!("h{label}"), Alg::G, 1)?;
    let k = store.add_field(&format!("K{label}"), Alg::E, 2)?;
    let jk_sign = store.tamper == Some(Tamper::GaugeJK);
    // d g g^-1
    store.set_group_images(&g, Images::new(h.neg().sub(&j.tau()), |_| Expr::zero(), {
        let g = g.clone();
        move |d| d.x().neg().add(&g.ad(&d.x()))
    }));
    store.set_images(&j, Images::new(k.neg().sub(&j.comm(&j).half()).sub(&h.comm(&j)), |_| Expr::zero(), {
        let (g, j) = (g.clone(), j.clone());
        move |d| d.x().comm(&j).neg().sub(&d.xs()).add(&g.ad(&d.xs()))
    }));
    store.set_images(
        &h,
        Images::new(
            h.comm(&h).half().neg().add(&k.tau()),
            {
                let g = g.clone();
                move |d| d.x().sub(&g.ad(&d.x()))
            },
            {
                let (g, h) = (g.clone(), h.clone());
                move |d| d.x().comm(&h).neg().add(&d.xs().tau()).sub(&g.ad(&d.xs().tau()))
            },
        ),
    );
    store.set_images(
        &k,
        Images::new(
            h.comm(&k).neg(),
            {
                let (g, j) = (g.clone(), j.clone());
                move |d| {
                    let xs = if jk_sign { d.xs().neg() } else { d.xs() };
                    g.ad(&d.x()).comm(&j).add(&xs).sub(&g.ad(&d.xs()))
                }
            },
            {
                let (g, j, h, k) = (g.clone(), j.clone(), h.clone(), k.clone());
                move |d| d.x().comm(&k).neg().add(&h.comm(&d.xs())).add(&g.ad(&d.xs()).comm(&j))
            },
        ),
    );
    Ok(OneGauge { g, j, h, k })
}

/// A 1-gauge transformation from `(g, J)` with `h`, `K` read off the
/// defining relations.
pub fn one_gauge_from(store: &FieldStore, g: GExpr, j: Expr) -> Result<OneGauge, GaugeError> {
    let d = store.d();
    let h = store.apply(&d, &g.val)?.mul(&g.inv).neg().sub(&j.tau());
    let k = store.apply(&d, &j)?.neg().sub(&j.comm(&j).half()).sub(&h.comm(&j));
    Ok(OneGauge { g, j, h, k })
}

pub fn identity_gauge() -> OneGauge {
    OneGauge { g: GExpr::one(), j: Expr::zero(), h: Expr::zero(), k: Expr::zero() }
}

pub fn audit_one_gauge(store: &FieldStore, p: &OneGauge, prefix: &str, scope: Scope) -> Result<Suite, GaugeError> {
    let mut s = Suite::new(format!("{prefix}gauge1"));
    let z = store.z();
    let (d, jd, l) = (store.d(), store.j(&z), store.l(&z));
    let (g, j, h, k) = (&p.g, &p.j, &p.h, &p.k);
    let (x, xs) = (jd.x(), jd.xs());
    let mc = |dv: &Deriv| -> Result<Expr, DgaError> { Ok(store.apply(dv, &g.val)?.mul(&g.inv)) };
    let ap = |dv: &Deriv, e: &Expr| store.apply(dv, e);
    let rows: Vec<(&str, &str, Expr, Expr)> = vec![
        ("d_g", "1-gauge: d g g^-1 = -h - tau_dot(J)", mc(&d)?, h.neg().sub(&j.tau())),
        ("d_J", "1-gauge: d J = -K - [J,J]/2 - .mu.(h,J)", ap(&d, j)?, k.neg().sub(&j.comm(j).half()).sub(&h.comm(j))),
        ("d_h", "1-gauge: d h = -[h,h]/2 + tau_dot(K)", ap(&d, h)?, h.comm(h).half().neg().add(&k.tau())),
        ("d_K", "1-gauge: d K = -.mu.(h,K)", ap(&d, k)?, h.comm(k).neg()),
        ("j_g", "1-gauge: j_Z g g^-1 = 0", mc(&jd)?, Expr::zero()),
        ("j_J", "1-gauge: j_Z J = 0", ap(&jd, j)?, Expr::zero()),
        ("j_h", "1-gauge: j_Z h = x - Ad g(x)", ap(&jd, h)?, x.sub(&g.ad(&x))),
        ("j_K", "1-gauge: j_Z K = .mu.(Ad g(x),J) + X - mu_dot(g,X)", ap(&jd, k)?, g.ad(&x).comm(j).add(&xs).sub(&g.ad(&xs))),
        ("l_g", "1-gauge: l_Z g g^-1 = -x + Ad g(x)", mc(&l)?, x.neg().add(&g.ad(&x))),
        ("l_J", "1-gauge: l_Z J = -.mu.(x,J) - X + mu_dot(g,X)", ap(&l, j)?, x.comm(j).neg().sub(&xs).add(&g.ad(&xs))),
        ("l_h", "1-gauge: l_Z h = -[x,h] + tau_dot(X) - Ad g(tau_dot(X))", ap(&l, h)?, x.comm(h).neg().add(&xs.tau()).sub(&g.ad(&xs.tau()))),
        ("l_K", "1-gauge: l_Z K = -.mu.(x,K) + .mu.(h,X) + .mu.(mu_dot(g,X),J)", ap(&l, k)?, x.comm(k).neg().add(&h.comm(&xs)).add(&g.ad(&xs).comm(j))),
    ];
    push_rows(store, &mut s, &format!("{prefix}gauge1."), scope, rows);
    Ok(s)
}

pub fn act_one_gauge(p: &OneGauge, a: &TwoConnection) -> TwoConnection {
    let adw = p.g.ad(&a.omega);
    let adt = p.g.ad(&a.theta);
    TwoConnection {
        id: fresh_id(),
        omega: adw.add(&p.h),
        big_omega: p.g.ad(&a.big_omega).sub(&adw.comm(&p.j)).add(&p.k),
        theta: adt.clone(),
        big_theta: p.g.ad(&a.big_theta).sub(&adt.comm(&p.j)),
    }
}

/// `g3 = g2 g1`, `J3 = J2 + mu_dot(g2, J1)`.
pub fn compose_one_gauge(store: &FieldStore, p2: &OneGauge, p1: &OneGauge) -> Result<OneGauge, GaugeError> {
    one_gauge_from(store, p2.g.mul(&p1.g), p2.j.add(&p2.g.ad(&p1.j)))
}

/// `(g^-1, -mu_dot(g^-1, J))`.
pub fn invert_one_gauge(store: &FieldStore, p: &OneGauge) -> Result<OneGauge, GaugeError> {
    let gi = p.g.inverse();
    let j = gi.ad(&p.j).neg();
    one_gauge_from(store, gi, j)
}

pub fn make_two_gauge(store: &mut FieldStore, a: &TwoConnection, label: &str) -> Result<TwoGauge, GaugeError> {
    let e = store.add_group(&format!("E{label}"), Alg::E, Orientation::Right)?;
    let c = store.add_field(&format!("C{label}"), Alg::E, 1)?;
    let (w, bw, t) = (a.omega.clone(), a.big_omega.clone(), a.theta.clone());
    // d E E^-1
    store.set_group_images(&e, Images::new(c.neg().sub(&e.dot_mu(&w)), |_| Expr::zero(), {
        let e = e.clone();
        move |d| e.dot_mu(&d.x()).neg()
    }));
    store.set_images(
        &c,
        Images::new(
            c.comm(&c).half().neg().sub(&w.comm(&c)).sub(&e.dot_mu(&t)).sub(&bw).add(&e.ad(&bw)),
            |_| Expr::zero(),
            {
                let (e, c) = (e.clone(), c.clone());
                move |d| d.x().comm(&c).neg().sub(&d.xs()).add(&e.ad(&d.xs()))
            },
        ),
    );
    Ok(TwoGauge { e, c, reference: a.id })
}

pub fn audit_two_gauge(store: &FieldStore, eps: &TwoGauge, a: &TwoConnection, prefix: &str, scope: Scope) -> Result<Suite, GaugeError> {
    let mut s = Suite::new(format!("{prefix}gauge2"));
    let z = store.z();
    let (d, jd, l) = (store.d(), store.j(&z), store.l(&z));
    let (e, c) = (&eps.e, &eps.c);
    let (w, bw, t) = (&a.omega, &a.big_omega, &a.theta);
    let (x, xs) = (jd.x(), jd.xs());
    let mc = |dv: &Deriv| -> Result<Expr, DgaError> { Ok(store.apply(dv, &e.val)?.mul(&e.inv)) };
    let ap = |dv: &Deriv, f: &Expr| store.apply(dv, f);
    let rows: Vec<(&str, &str, Expr, Expr)> = vec![
        ("d_E", "2-gauge: d E E^-1 = -C - .mu(omega,E)", mc(&d)?, c.neg().sub(&e.dot_mu(w))),
        (
            "d_C",
            "2-gauge: d C = -[C,C]/2 - .mu.(omega,C) - .mu(theta,E) - Omega + Ad E(Omega)",
            ap(&d, c)?,
            c.comm(c).half().neg().sub(&w.comm(c)).sub(&e.dot_mu(t)).sub(bw).add(&e.ad(bw)),
        ),
        ("j_E", "2-gauge: j_Z E E^-1 = 0", mc(&jd)?, Expr::zero()),
        ("j_C", "2-gauge: j_Z C = 0", ap(&jd, c)?, Expr::zero()),
        ("l_E", "2-gauge: l_Z E E^-1 = -.mu(x,E)", mc(&l)?, e.dot_mu(&x).neg()),
        ("l_C", "2-gauge: l_Z C = -.mu.(x,C) - X + Ad E(X)", ap(&l, c)?, x.comm(c).neg().sub(&xs).add(&e.ad(&xs))),
    ];
    push_rows(store, &mut s, &format!("{prefix}gauge2."), scope, rows);
    Ok(s)
}

/// The 2-gauge transform of a 1-gauge transformation, relative to the
/// reference connection of `eps`.
pub fn act_two_gauge(store: &FieldStore, eps: &TwoGauge, p: &OneGauge, a: &TwoConnection) -> Result<OneGauge, GaugeError> {
    if eps.reference != a.id {
        return Err(GaugeError::ReferenceMismatch { expected: eps.reference, found: a.id });
    }
    let te = tau_group(store, &eps.e);
    let adw = p.g.ad(&a.omega);
    let shift = eps.e.dot_mu(&a.omega.sub(&adw).sub(&p.h)).add(&eps.c);
    let g_omega = p.g.ad(&a.big_omega).sub(&adw.comm(&p.j)).add(&p.k);
    Ok(OneGauge {
        g: te.mul(&p.g),
        j: eps.e.ad(&p.j).add(&shift),
        h: te.ad(&p.h).add(&eps.e.dot_mu(&adw.add(&p.h)).tau()),
        k: eps
            .e
            .ad(&p.k)
            .add(&te.mul(&p.g).ad(&a.omega).comm(&shift))
            .add(&eps.e.dot_mu(&p.g.ad(&a.theta).add(&g_omega.tau()))),
    })
}

/// Differences between the action of the 2-gauge transformed 1-gauge
/// transformation and the original, against their predicted corrections.
pub fn gauge_for_gauge(store: &FieldStore, eps: &TwoGauge, p: &OneGauge, a: &TwoConnection) -> Result<Suite, GaugeError> {
    let mut s = Suite::new("gauge-for-gauge");
    let ep = act_two_gauge(store, eps, p, a)?;
    let a1 = act_one_gauge(&ep, a);
    let a2 = act_one_gauge(p, a);
    let corr = eps.e.dot_mu(&p.g.ad(&a.theta));
    let d = store.d();
    s.push(store.check_eq("g4g.omega", "gauge for gauge: omega components agree", &a1.omega, &a2.omega));
    s.push(store.check_eq("g4g.Omega", "gauge for gauge: Omega differs by .mu(Ad g(theta),E)", &a1.big_omega, &a2.big_omega.add(&corr)));
    s.push(store.check_eq("g4g.theta", "gauge for gauge: theta differs by -tau_dot(.mu(Ad g(theta),E))", &a1.theta, &a2.theta.sub(&corr.tau())));
    s.push(store.check_eq(
        "g4g.Theta",
        "gauge for gauge: Theta differs by d .mu(Ad g(theta),E) + .mu.(omega', .mu(Ad g(theta),E))",
        &a1.big_theta,
        &a2.big_theta.add(&store.apply(&d, &corr)?).add(&a2.omega.comm(&corr)),
    ));
    Ok(s)
}

/// Restricted values of the components that specialty requires to vanish.
pub fn specialty_check(restricted: &FieldStore, parts: &[(&str, &Expr)]) -> Suite {
    let mut s = Suite::new("specialty");
    for (name, e) in parts {
        s.push(restricted.check_zero(format!("special.{name}"), format!("specialty: I*{name} = 0"), e));
    }
    s
}

#[cfg(test)]
mod tests;
