//! Adapted coordinates `(u, v; gamma, Gamma, sigma, Sigma)` of a trivial patch.

use super::{DgaError, Expr, FieldStore, GExpr, Images};
use crate::liecm::{Alg, Orientation};
use crate::matrix::QMat;
use crate::superring::Sym;
use crate::tamper::Tamper;

/// Base coordinates `u_i` (degree 0) with differentials `v_i`.
#[derive(Clone, Debug)]
pub struct Base {
    pub u: Vec<Sym>,
    pub v: Vec<Sym>,
}

pub fn register_base(store: &mut FieldStore, m: usize) -> Result<Base, DgaError> {
    let mut base = Base { u: Vec::new(), v: Vec::new() };
    for i in 0..m {
        let (u, v) = store.add_ring_pair(&format!("u{i}"), &format!("v{i}"), 0)?;
        base.u.push(u);
        base.v.push(v);
    }
    Ok(base)
}

#[derive(Clone, Debug)]
pub struct AdaptedCoordinates {
    pub label: String,
    pub gamma: GExpr,
    pub big_gamma: Expr,
    pub sigma: Expr,
    pub big_sigma: Expr,
}

pub fn register_adapted(store: &mut FieldStore, label: &str) -> Result<AdaptedCoordinates, DgaError> {
    let gamma = store.add_group(&format!("gamma{label}"), Alg::G, Orientation::Left)?;
    install(store, label, gamma)
}

pub fn register_adapted_with_bodies(store: &mut FieldStore, label: &str, bodies: Vec<QMat>) -> Result<AdaptedCoordinates, DgaError> {
    let gamma = store.add_group_with_bodies(&format!("gamma{label}"), Alg::G, Orientation::Left, bodies);
    install(store, label, gamma)
}

fn install(store: &mut FieldStore, label: &str, gamma: GExpr) -> Result<AdaptedCoordinates, DgaError> {
    let big_gamma = store.add_field(&format!("Gamma{label}"), Alg::E, 1)?;
    let sigma = store.add_field(&format!("sigma{label}"), Alg::G, 1)?;
    let big_sigma = store.add_field(&format!("Sigma{label}"), Alg::E, 2)?;

    // gamma^-1 D gamma
    let g = gamma.clone();
    store.set_group_images(
        &gamma,
        Images::new(
            sigma.sub(&g.inverse().ad(&big_gamma).tau()),
            |_| Expr::zero(),
            |d| d.x(),
        ),
    );
    let g = gamma.clone();
    store.set_images(
        &big_gamma,
        Images::new(
            gamma.ad(&big_sigma).sub(&big_gamma.comm(&big_gamma).half()),
            |_| Expr::zero(),
            move |d| g.ad(&d.xs()),
        ),
    );
    let tau_sigma = if store.tamper == Some(Tamper::DSigmaTau) { big_sigma.tau().neg() } else { big_sigma.tau() };
    let s = sigma.clone();
    store.set_images(
        &sigma,
        Images::new(
            sigma.comm(&sigma).half().neg().add(&tau_sigma),
            |d| d.x(),
            move |d| d.x().comm(&s).neg().add(&d.xs().tau()),
        ),
    );
    let (s, bs) = (sigma.clone(), big_sigma.clone());
    store.set_images(
        &big_sigma,
        Images::new(
            sigma.comm(&big_sigma).neg(),
            |d| d.xs(),
            move |d| d.x().comm(&bs).neg().add(&s.comm(&d.xs())),
        ),
    );
    Ok(AdaptedCoordinates { label: label.into(), gamma, big_gamma, sigma, big_sigma })
}
