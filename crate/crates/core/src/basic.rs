//! Basic components of connections and gauge transformations relative to
//! adapted coordinates, and their matching on overlaps.
//!
//! Basic data reuses the gauge types: the structure equations and actions are
//! formally identical, so the `gauge` auditors run on it with
//! `Scope::Structure`. Basicness is certified by evaluating every `j_Z`,
//! `l_Z` image.

use thiserror::Error;

use crate::dga::{AdaptedCoordinates, DgaError, Expr, FieldStore, GExpr};
use crate::gauge::{act_one_gauge, act_two_gauge, GaugeError, OneGauge, TwoConnection, TwoGauge};
use crate::report::Suite;
use crate::tamper::Tamper;

#[derive(Debug, Error)]
pub enum BasicError {
    #[error("inputs are not registered in the given store")]
    StoreMismatch,
    #[error(transparent)]
    Gauge(#[from] GaugeError),
    #[error(transparent)]
    Dga(#[from] DgaError),
}

pub type BasicConnectionData = TwoConnection;
pub type BasicGaugeData = OneGauge;
pub type BasicTwoGaugeData = TwoGauge;

/// `f_b, F_b, s_b, S_b` on an overlap.
#[derive(Clone, Debug)]
pub struct MatchingData {
    pub f: GExpr,
    pub big_f: Expr,
    pub s: Expr,
    pub big_s: Expr,
}

fn owned(store: &FieldStore, es: &[&Expr]) -> Result<(), BasicError> {
    if es.iter().all(|e| store.owns(e)) {
        Ok(())
    } else {
        Err(BasicError::StoreMismatch)
    }
}

fn coords_parts(co: &AdaptedCoordinates) -> [&Expr; 5] {
    [&co.gamma.val, &co.gamma.inv, &co.big_gamma, &co.sigma, &co.big_sigma]
}

pub fn basicify_connection(store: &FieldStore, a: &TwoConnection, co: &AdaptedCoordinates) -> Result<BasicConnectionData, BasicError> {
    owned(store, &[&a.omega, &a.big_omega, &a.theta, &a.big_theta])?;
    owned(store, &coords_parts(co))?;
    let gm = &co.gamma;
    let omega = gm.ad(&a.omega.sub(&co.sigma));
    let theta = gm.ad(&a.theta);
    let cross = omega.comm(&co.big_gamma);
    let cross = if store.tamper == Some(Tamper::OmegaB) { cross.neg() } else { cross };
    Ok(TwoConnection {
        id: crate::gauge::fresh_id(),
        big_omega: gm.ad(&a.big_omega.sub(&co.big_sigma)).sub(&cross),
        big_theta: gm.ad(&a.big_theta).sub(&theta.comm(&co.big_gamma)),
        omega,
        theta,
    })
}

pub fn basicify_gauge(store: &FieldStore, p: &OneGauge, co: &AdaptedCoordinates) -> Result<BasicGaugeData, BasicError> {
    owned(store, &[&p.g.val, &p.g.inv, &p.j, &p.h, &p.k])?;
    owned(store, &coords_parts(co))?;
    let gm = &co.gamma;
    let gb = gm.mul(&p.g).mul(&gm.inverse());
    let hs = p.h.sub(&co.sigma).add(&p.g.ad(&co.sigma));
    let k_inner = p
        .k
        .sub(&co.big_sigma)
        .add(&p.g.ad(&co.big_sigma))
        .sub(&p.g.ad(&co.sigma).comm(&p.j))
        .sub(&hs.comm(&gm.inverse().ad(&co.big_gamma)));
    Ok(OneGauge {
        j: gm.ad(&p.j).add(&co.big_gamma).sub(&gb.ad(&co.big_gamma)),
        h: gm.ad(&hs),
        k: gm.ad(&k_inner),
        g: gb,
    })
}

/// Basic components of a 2-gauge transformation. The result refers to the
/// basic components `ab` of its reference connection `a`.
pub fn basicify_two_gauge(
    store: &FieldStore,
    eps: &TwoGauge,
    a: &TwoConnection,
    ab: &BasicConnectionData,
    co: &AdaptedCoordinates,
) -> Result<BasicTwoGaugeData, BasicError> {
    if eps.reference != a.id {
        return Err(GaugeError::ReferenceMismatch { expected: eps.reference, found: a.id }.into());
    }
    owned(store, &[&eps.e.val, &eps.e.inv, &eps.c])?;
    owned(store, &coords_parts(co))?;
    let gm = &co.gamma;
    let eb = gm.mul(&eps.e).mul(&gm.inverse());
    Ok(TwoGauge {
        c: gm.ad(&eps.c).add(&co.big_gamma).sub(&eb.ad(&co.big_gamma)),
        e: eb,
        reference: ab.id,
    })
}

/// Every part is annihilated by `j_Z` and `l_Z`.
pub fn certify_basic(store: &FieldStore, parts: &[(&str, &Expr)]) -> Result<Suite, BasicError> {
    let mut s = Suite::new("basicness");
    let z = store.z();
    for (name, e) in parts {
        for d in [store.j(&z), store.l(&z)] {
            let img = store.apply(&d, e)?;
            s.push(store.check_zero(
                format!("basic.{}.{name}", d.kind.name()),
                format!("basicness: {}_Z {name} = 0", d.kind.name()),
                &img,
            ));
        }
    }
    Ok(s)
}

pub fn connection_parts(a: &TwoConnection) -> [(&'static str, &Expr); 4] {
    [("omega_b", &a.omega), ("Omega_b", &a.big_omega), ("theta_b", &a.theta), ("Theta_b", &a.big_theta)]
}

pub fn gauge_parts(p: &OneGauge) -> [(&'static str, &Expr); 4] {
    [("g_b", &p.g.val), ("J_b", &p.j), ("h_b", &p.h), ("K_b", &p.k)]
}

pub fn two_gauge_parts(e: &TwoGauge) -> [(&'static str, &Expr); 2] {
    [("E_b", &e.e.val), ("C_b", &e.c)]
}

fn compare_connections(store: &FieldStore, s: &mut Suite, prefix: &str, what: &str, x: &TwoConnection, y: &TwoConnection) {
    let names = ["omega", "Omega", "theta", "Theta"];
    let xs = [&x.omega, &x.big_omega, &x.theta, &x.big_theta];
    let ys = [&y.omega, &y.big_omega, &y.theta, &y.big_theta];
    for k in 0..4 {
        s.push(store.check_eq(format!("{prefix}.{}", names[k]), format!("{what}: {} component", names[k]), xs[k], ys[k]));
    }
}

fn compare_gauges(store: &FieldStore, s: &mut Suite, prefix: &str, what: &str, x: &OneGauge, y: &OneGauge) {
    let names = ["g", "J", "h", "K"];
    let xs = [&x.g.val, &x.j, &x.h, &x.k];
    let ys = [&y.g.val, &y.j, &y.h, &y.k];
    for k in 0..4 {
        s.push(store.check_eq(format!("{prefix}.{}", names[k]), format!("{what}: {} component", names[k]), xs[k], ys[k]));
    }
}

/// Basic components of a transformed object against the basic-level
/// transformation applied to basic components.
pub fn basic_transform_consistency(
    store: &FieldStore,
    a: &TwoConnection,
    p: &OneGauge,
    eps: Option<&TwoGauge>,
    co: &AdaptedCoordinates,
) -> Result<Suite, BasicError> {
    let mut s = Suite::new("basic-transform");
    let ab = basicify_connection(store, a, co)?;
    let pb = basicify_gauge(store, p, co)?;
    let lhs = basicify_connection(store, &act_one_gauge(p, a), co)?;
    let rhs = act_one_gauge(&pb, &ab);
    compare_connections(store, &mut s, "basic.gauge1", "basic components of the 1-gauge transformed connection", &lhs, &rhs);
    if let Some(eps) = eps {
        let eb = basicify_two_gauge(store, eps, a, &ab, co)?;
        let lhs = basicify_gauge(store, &act_two_gauge(store, eps, p, a)?, co)?;
        let rhs = act_two_gauge(store, &eb, &pb, &ab)?;
        compare_gauges(store, &mut s, "basic.gauge2", "basic components of the 2-gauge transformed 1-gauge transformation", &lhs, &rhs);
    }
    Ok(s)
}

pub fn matching_data(store: &FieldStore, co: &AdaptedCoordinates, co2: &AdaptedCoordinates) -> Result<MatchingData, BasicError> {
    owned(store, &coords_parts(co))?;
    owned(store, &coords_parts(co2))?;
    let f = co2.gamma.mul(&co.gamma.inverse());
    let s = co.gamma.ad(&co2.sigma.sub(&co.sigma));
    Ok(MatchingData {
        big_f: co2.big_gamma.sub(&f.ad(&co.big_gamma)),
        big_s: co.gamma.ad(&co2.big_sigma.sub(&co.big_sigma)).sub(&s.comm(&co.big_gamma)),
        f,
        s,
    })
}

pub fn matching_parts(m: &MatchingData) -> [(&'static str, &Expr); 4] {
    [("f_b", &m.f.val), ("F_b", &m.big_f), ("s_b", &m.s), ("S_b", &m.big_s)]
}

/// `s_b`, `S_b` recovered from `f_b`, `F_b`.
pub fn matching_recovery(store: &FieldStore, m: &MatchingData) -> Result<Suite, BasicError> {
    let mut s = Suite::new("matching-recovery");
    let d = store.d();
    let fi = m.f.inverse();
    let s_rec = m.f.inv.mul(&store.apply(&d, &m.f.val)?).add(&fi.ad(&m.big_f).tau());
    let big_s_rec = fi.ad(&store.apply(&d, &m.big_f)?.add(&m.big_f.comm(&m.big_f).half()));
    s.push(store.check_eq("matching.recover.s", "matching recovery: s_b = f_b^-1 d f_b + tau_dot(mu_dot(f_b^-1,F_b))", &m.s, &s_rec));
    s.push(store.check_eq("matching.recover.S", "matching recovery: S_b = mu_dot(f_b^-1, d F_b + [F_b,F_b]/2)", &m.big_s, &big_s_rec));
    Ok(s)
}

/// Matching of the basic components of one global `(A, Psi, eps)` taken
/// against two coordinate families on the same overlap store.
pub fn matching_check(
    store: &FieldStore,
    co: &AdaptedCoordinates,
    co2: &AdaptedCoordinates,
    a: &TwoConnection,
    p: Option<&OneGauge>,
    eps: Option<&TwoGauge>,
) -> Result<Suite, BasicError> {
    let mut s = Suite::new("matching");
    let m = matching_data(store, co, co2)?;
    let (f, bf, sb, bs) = (&m.f, &m.big_f, &m.s, &m.big_s);
    let ab = basicify_connection(store, a, co)?;
    let ab2 = basicify_connection(store, a, co2)?;
    let wm = f.ad(&ab.omega.sub(sb));
    let tm = f.ad(&ab.theta);
    let want = TwoConnection {
        id: ab2.id,
        omega: wm.clone(),
        big_omega: f.ad(&ab.big_omega.sub(bs)).sub(&wm.comm(bf)),
        theta: tm.clone(),
        big_theta: f.ad(&ab.big_theta).sub(&tm.comm(bf)),
    };
    compare_connections(store, &mut s, "matching.connection", "connection matching", &ab2, &want);
    if let Some(p) = p {
        let pb = basicify_gauge(store, p, co)?;
        let pb2 = basicify_gauge(store, p, co2)?;
        let g2 = f.mul(&pb.g).mul(&f.inverse());
        let hs = pb.h.sub(sb).add(&pb.g.ad(sb));
        let k_inner = pb
            .k
            .sub(bs)
            .add(&pb.g.ad(bs))
            .sub(&pb.g.ad(sb).comm(&pb.j))
            .sub(&hs.comm(&f.inverse().ad(bf)));
        let want = OneGauge {
            j: f.ad(&pb.j).add(bf).sub(&g2.ad(bf)),
            h: f.ad(&hs),
            k: f.ad(&k_inner),
            g: g2,
        };
        compare_gauges(store, &mut s, "matching.gauge1", "1-gauge matching", &pb2, &want);
    }
    if let Some(eps) = eps {
        let eb = basicify_two_gauge(store, eps, a, &ab, co)?;
        let eb2 = basicify_two_gauge(store, eps, a, &ab2, co2)?;
        let e2 = f.mul(&eb.e).mul(&f.inverse());
        let c2 = f.ad(&eb.c).add(bf).sub(&e2.ad(bf));
        s.push(store.check_eq("matching.gauge2.E", "2-gauge matching: E'_b = mu(f_b,E_b)", &eb2.e.val, &e2.val));
        s.push(store.check_eq("matching.gauge2.C", "2-gauge matching: C'_b = mu_dot(f_b,C_b) + F_b - Ad E'_b(F_b)", &eb2.c, &c2));
    }
    Ok(s)
}

/// The fields whose restriction defines special adapted coordinates.
pub fn special_coordinate_kill(co: &AdaptedCoordinates) -> [Expr; 2] {
    [co.big_gamma.clone(), co.big_sigma.clone()]
}

#[cfg(test)]
mod tests;
