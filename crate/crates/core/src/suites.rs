//! Named identity suites over freshly built fixture stores, shared by the
//! command-line driver and the acceptance tests.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::basic::{
    basic_transform_consistency, basicify_connection, basicify_gauge, basicify_two_gauge, certify_basic, connection_parts, gauge_parts,
    matching_check, matching_data, matching_parts, matching_recovery, special_coordinate_kill, two_gauge_parts, BasicError,
};
use crate::cocycle::{self, CocycleError, Fixture};
use crate::dga::{register_adapted, register_base, DgaError, Expr, FieldStore};
use crate::derived::{check_derived_group, DerivedError};
use crate::gauge::{
    act_one_gauge, act_two_gauge, audit_connection, audit_one_gauge, audit_two_gauge, bianchi, compose_one_gauge, gauge_for_gauge,
    invert_one_gauge, make_connection, make_one_gauge, make_two_gauge, specialty_check, Curvature, GaugeError, Scope, TwoConnection,
};
use crate::liecm::{check_crossed_module, CrossedModule, TauKind};
use crate::matrix::RMat;
use crate::report::{Check, Suite, Witness};
use crate::superring::{GeneratorTable, RingError, Sym};
use crate::tamper::Tamper;
use crate::{Scalar, Q};

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("unknown suite {0:?}")]
    UnknownSuite(String),
    #[error("truncation degree {0} is below the minimum of 4")]
    Truncation(u16),
    #[error("a cover needs at least one patch")]
    Patches,
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Derived(#[from] DerivedError),
    #[error(transparent)]
    Dga(#[from] DgaError),
    #[error(transparent)]
    Gauge(#[from] GaugeError),
    #[error(transparent)]
    Basic(#[from] BasicError),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
}

type Result<T> = std::result::Result<T, SuiteError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SuiteKind {
    /// Ring laws, crossed-module axioms, derived group and the Cartan relations
    /// on adapted coordinates.
    Cartan,
    Connection,
    Gauge1,
    Gauge2,
    Basic,
    Matching,
    Cocycle,
}

impl SuiteKind {
    pub const ALL: [SuiteKind; 7] = [
        SuiteKind::Cartan,
        SuiteKind::Connection,
        SuiteKind::Gauge1,
        SuiteKind::Gauge2,
        SuiteKind::Basic,
        SuiteKind::Matching,
        SuiteKind::Cocycle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteKind::Cartan => "cartan",
            SuiteKind::Connection => "connection",
            SuiteKind::Gauge1 => "gauge1",
            SuiteKind::Gauge2 => "gauge2",
            SuiteKind::Basic => "basic",
            SuiteKind::Matching => "matching",
            SuiteKind::Cocycle => "cocycle",
        }
    }

    /// `all` expands to every suite.
    pub fn parse_selection(s: &str) -> Result<Vec<SuiteKind>> {
        if s == "all" {
            return Ok(SuiteKind::ALL.to_vec());
        }
        Ok(vec![s.parse()?])
    }
}

impl fmt::Display for SuiteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuiteKind {
    type Err = SuiteError;

    fn from_str(s: &str) -> Result<Self> {
        SuiteKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| SuiteError::UnknownSuite(s.into()))
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub truncation: u16,
    pub samples: usize,
    pub seed: u64,
    pub patches: usize,
    pub tamper: Option<Tamper>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { truncation: crate::dga::DEFAULT_TRUNCATION, samples: 3, seed: 0, patches: 3, tamper: None }
    }
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        if self.truncation < 4 {
            return Err(SuiteError::Truncation(self.truncation));
        }
        if self.patches == 0 {
            return Err(SuiteError::Patches);
        }
        Ok(())
    }

    fn store(&self, cm: &CrossedModule) -> Result<FieldStore> {
        let mut s = FieldStore::new(cm.clone(), self.truncation, self.samples, self.seed)?;
        s.tamper = self.tamper;
        Ok(s)
    }
}

fn prefixed(s: &mut Suite, prefix: &str, from: Suite) {
    for c in from.checks {
        s.push(Check { id: format!("{prefix}{}", c.id), ..c });
    }
}

fn scalar_witness(x: &Scalar, sample: usize, table: &GeneratorTable) -> Option<Witness> {
    Witness::from_residual(&RMat::from_entries(x.ctx(), 1, vec![x.clone()]), sample, Some(table))
}

/// Sign rules of the supercommutative ring on random homogeneous elements.
pub fn ring_laws(samples: usize, seed: u64, trunc: u16, tamper: Option<Tamper>) -> Result<Suite> {
    let mut t = GeneratorTable::new();
    let degrees = [1u8, 1, 1, 2, 2, 3];
    let syms: Vec<Sym> = degrees.iter().enumerate().map(|(i, d)| t.fresh(format!("r{i}"), *d)).collect::<std::result::Result<_, _>>()?;
    let ctx = t.ctx(trunc);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mul = |a: &Scalar, b: &Scalar| -> Result<Scalar> {
        Ok(if tamper == Some(Tamper::NaiveProduct) { a.naive_mul(b)? } else { a.try_mul(b)? })
    };
    // homogeneous element: a few monomials of one degree
    let element = |deg: u32, rng: &mut ChaCha8Rng| -> Result<Scalar> {
        let mut x = Scalar::zero(ctx);
        for _ in 0..8 {
            let k = rng.gen_range(1..=3);
            let mut m = Scalar::constant(ctx, Q::from(rng.gen_range(-4i64..=4)));
            for _ in 0..k {
                m = mul(&m, &Scalar::symbol(ctx, syms[rng.gen_range(0..syms.len())]))?;
            }
            x = &x + &m.degree_part(deg);
        }
        Ok(x)
    };
    let mut s = Suite::new("ring");
    for k in 0..samples {
        let (a, b, c) = (element(1, &mut rng)?, element(3, &mut rng)?, element(2, &mut rng)?);
        let ba = mul(&b, &a)?;
        let ba = if a.parity() == Some(true) && b.parity() == Some(true) { -&ba } else { ba };
        let comm = mul(&a, &b)?.try_sub(&ba)?;
        s.push(Check::from_witness(format!("ring.graded_commutativity.{k}"), "graded commutativity: ab = (-1)^{|a||b|} ba", scalar_witness(&comm, k, &t)));
        let assoc = mul(&mul(&a, &b)?, &c)?.try_sub(&mul(&a, &mul(&b, &c)?)?)?;
        s.push(Check::from_witness(format!("ring.associativity.{k}"), "associativity: (ab)c = a(bc)", scalar_witness(&assoc, k, &t)));
        // odd derivation raising degree by one
        let images: Vec<Scalar> = syms.iter().map(|s| element(s.degree() as u32 + 1, &mut rng)).collect::<Result<_>>()?;
        let d = |x: &Scalar| x.derive_with(true, |s| syms.iter().position(|&y| y == s).map(|i| images[i].clone()));
        let leib = d(&mul(&a, &c)?).try_sub(&mul(&d(&a), &c)?.try_sub(&mul(&a, &d(&c))?)?)?;
        s.push(Check::from_witness(format!("ring.leibniz.{k}"), "graded Leibniz rule: d(ab) = (da)b + (-1)^{|a|} a(db)", scalar_witness(&leib, k, &t)));
    }
    Ok(s)
}

fn compare(store: &FieldStore, s: &mut Suite, prefix: &str, anchor: &str, x: &TwoConnection, y: &TwoConnection) {
    let pairs = [("omega", &x.omega, &y.omega), ("Omega", &x.big_omega, &y.big_omega), ("theta", &x.theta, &y.theta), ("Theta", &x.big_theta, &y.big_theta)];
    for (name, a, b) in pairs {
        s.push(store.check_eq(format!("{prefix}.{name}"), format!("{anchor}: {name} component"), a, b));
    }
}

/// Fake-flat curvature available for `cm`: fake flat with `Theta != 0` only
/// when `tau` is trivial, otherwise flat.
fn fake_flat_curvature(cm: &CrossedModule) -> Curvature {
    if cm.tau == TauKind::Trivial {
        Curvature::FakeFlat
    } else {
        Curvature::Flat
    }
}

fn cartan(cm: &CrossedModule, cfg: &RunConfig) -> Result<Suite> {
    let mut s = Suite::new("cartan");
    prefixed(&mut s, "", ring_laws(cfg.samples, cfg.seed, cfg.truncation, cfg.tamper)?);
    let checked = if cfg.tamper == Some(Tamper::TauDot) { cm.with_corrupted_tau_dot() } else { cm.clone() };
    prefixed(&mut s, "cm.", check_crossed_module(&checked, cfg.samples, cfg.seed));
    prefixed(&mut s, "", check_derived_group(cm, cfg.samples, cfg.seed, cfg.tamper)?);
    let mut st = cfg.store(cm)?;
    register_base(&mut st, 1)?;
    register_adapted(&mut st, "")?;
    prefixed(&mut s, "", st.cartan_check()?);
    Ok(s)
}

fn connection(cm: &CrossedModule, cfg: &RunConfig) -> Result<Suite> {
    let mut s = Suite::new("connection");
    let mut st = cfg.store(cm)?;
    let a = make_connection(&mut st, "", Curvature::Generic)?;
    let f = make_connection(&mut st, "f", fake_flat_curvature(cm))?;
    prefixed(&mut s, "", st.cartan_check()?);
    s.extend(audit_connection(&st, &a, "", Scope::Operation)?.checks);
    s.extend(bianchi(&st, &a)?.checks);
    s.extend(audit_connection(&st, &f, "fake_flat.", Scope::Operation)?.checks);
    s.push(st.check_zero("fake_flat.theta", "fake flatness: theta = 0", &f.theta));
    Ok(s)
}

fn gauge1(cm: &CrossedModule, cfg: &RunConfig) -> Result<Suite> {
    let mut s = Suite::new("gauge1");
    let mut st = cfg.store(cm)?;
    let a = make_connection(&mut st, "", Curvature::Generic)?;
    let f = make_connection(&mut st, "f", fake_flat_curvature(cm))?;
    let p1 = make_one_gauge(&mut st, "1")?;
    let p2 = make_one_gauge(&mut st, "2")?;
    prefixed(&mut s, "", st.cartan_check()?);
    s.extend(audit_one_gauge(&st, &p1, "", Scope::Operation)?.checks);
    s.extend(audit_connection(&st, &act_one_gauge(&p1, &a), "acted.", Scope::Operation)?.checks);
    let p21 = compose_one_gauge(&st, &p2, &p1)?;
    s.extend(audit_one_gauge(&st, &p21, "composite.", Scope::Operation)?.checks);
    let lhs = act_one_gauge(&p2, &act_one_gauge(&p1, &a));
    compare(&st, &mut s, "gauge1.left_action", "left action: (p2 p1) A = p2 (p1 A)", &lhs, &act_one_gauge(&p21, &a));
    let inv = invert_one_gauge(&st, &p1)?;
    compare(&st, &mut s, "gauge1.inverse", "inverse: p^-1 (p A) = A", &act_one_gauge(&inv, &act_one_gauge(&p1, &a)), &a);
    let gf = act_one_gauge(&p1, &f);
    s.push(st.check_zero("gauge1.fake_flat.theta", "fake flatness is gauge invariant: theta' = 0", &gf.theta));
    if cm.tau != TauKind::Trivial {
        s.push(st.check_zero("gauge1.flat.Theta", "flatness is gauge invariant: Theta' = 0", &gf.big_theta));
    }
    Ok(s)
}

fn gauge2(cm: &CrossedModule, cfg: &RunConfig) -> Result<Suite> {
    let mut s = Suite::new("gauge2");
    let mut st = cfg.store(cm)?;
    let a = make_connection(&mut st, "", Curvature::Generic)?;
    let f = make_connection(&mut st, "f", fake_flat_curvature(cm))?;
    let p = make_one_gauge(&mut st, "")?;
    let eps = make_two_gauge(&mut st, &a, "")?;
    let eps_f = make_two_gauge(&mut st, &f, "f")?;
    prefixed(&mut s, "", st.cartan_check()?);
    s.extend(audit_two_gauge(&st, &eps, &a, "", Scope::Operation)?.checks);
    let ep = act_two_gauge(&st, &eps, &p, &a)?;
    s.extend(audit_one_gauge(&st, &ep, "acted.", Scope::Operation)?.checks);
    s.extend(gauge_for_gauge(&st, &eps, &p, &a)?.checks);
    let epf = act_two_gauge(&st, &eps_f, &p, &f)?;
    compare(
        &st,
        &mut s,
        "gauge2.fake_flat",
        "gauge for gauge on fake flat connections: the two actions agree",
        &act_one_gauge(&epf, &f),
        &act_one_gauge(&p, &f),
    );
    Ok(s)
}

fn basic(cm: &CrossedModule, cfg: &RunConfig) -> Result<Suite> {
    let mut s = Suite::new("basic");
    let mut st = cfg.store(cm)?;
    let co = register_adapted(&mut st, "")?;
    let a = make_connection(&mut st, "", Curvature::Generic)?;
    let p = make_one_gauge(&mut st, "")?;
    let eps = make_two_gauge(&mut st, &a, "")?;
    let ab = basicify_connection(&st, &a, &co)?;
    let pb = basicify_gauge(&st, &p, &co)?;
    let eb = basicify_two_gauge(&st, &eps, &a, &ab, &co)?;
    let mut parts: Vec<(&str, &Expr)> = connection_parts(&ab).to_vec();
    parts.extend(gauge_parts(&pb));
    parts.extend(two_gauge_parts(&eb));
    s.extend(certify_basic(&st, &parts)?.checks);
    s.extend(audit_connection(&st, &ab, "basic.connection.", Scope::Structure)?.checks);
    s.extend(audit_one_gauge(&st, &pb, "basic.gauge1.", Scope::Structure)?.checks);
    s.extend(audit_two_gauge(&st, &eb, &ab, "basic.gauge2.", Scope::Structure)?.checks);
    prefixed(&mut s, "transform.", basic_transform_consistency(&st, &a, &p, Some(&eps), &co)?);
    let mut kill: Vec<Expr> = special_coordinate_kill(&co).to_vec();
    kill.extend([a.big_omega.clone(), a.big_theta.clone(), p.j.clone(), p.k.clone()]);
    let r = st.restriction(&kill, &[])?;
    let ab0 = basicify_connection(&r, &a, &co)?;
    let pb0 = basicify_gauge(&r, &p, &co)?;
    let sp = specialty_check(&r, &[("Omega_b", &ab0.big_omega), ("Theta_b", &ab0.big_theta), ("J_b", &pb0.j), ("K_b", &pb0.k)]);
    prefixed(&mut s, "basic.", sp);
    Ok(s)
}

fn matching(cm: &CrossedModule, cfg: &RunConfig) -> Result<Suite> {
    let mut s = Suite::new("matching");
    let mut st = cfg.store(cm)?;
    let co = register_adapted(&mut st, "")?;
    let co2 = register_adapted(&mut st, "'")?;
    let a = make_connection(&mut st, "", Curvature::Generic)?;
    let p = make_one_gauge(&mut st, "")?;
    let eps = make_two_gauge(&mut st, &a, "")?;
    let m = matching_data(&st, &co, &co2)?;
    prefixed(&mut s, "matching.", certify_basic(&st, &matching_parts(&m))?);
    s.extend(matching_recovery(&st, &m)?.checks);
    s.extend(matching_check(&st, &co, &co2, &a, Some(&p), Some(&eps))?.checks);
    let mut kill: Vec<Expr> = special_coordinate_kill(&co).to_vec();
    kill.extend(special_coordinate_kill(&co2));
    let r = st.restriction(&kill, &[])?;
    prefixed(&mut s, "matching.", specialty_check(&r, &[("F_b", &m.big_f), ("S_b", &m.big_s)]));
    Ok(s)
}

fn cocycle_suite(cm: &CrossedModule, cfg: &RunConfig) -> Result<Suite> {
    let mut s = Suite::new("cocycle");
    let mut c = cocycle::CoverModel::skeleton(cm.clone(), cfg.patches, cfg.truncation, cfg.samples.min(2), cfg.seed)?;
    let seeds = c.random_cover_seeds(Fixture::Generic)?;
    c.install(&seeds)?;
    c.store.tamper = cfg.tamper;
    s.extend(cocycle::audit_cover(&c)?.checks);
    let overlaps = c.random_overlap_seeds(Fixture::Generic)?;
    let (p, ps) = cocycle::build_paracocycle(&c, &overlaps)?;
    s.extend(ps.checks);
    let (stripped, bs) = cocycle::derive_base_cocycle(&c, &p)?;
    s.extend(bs.checks);
    s.extend(cocycle::compare_base_cocycles(&c, &cocycle::constructed_base_cocycle(&p), &stripped).checks);
    let qs = c.random_paraequivalence_seeds(Fixture::Generic)?;
    let (q, qa) = cocycle::build_paraequivalence(&c, &p, &qs)?;
    s.extend(qa.checks);
    let (_, ts) = cocycle::transform_paracocycle(&c, &p, &q)?;
    prefixed(&mut s, "transform.", ts);
    let q2s = c.random_paraequivalence_seeds(Fixture::Generic)?;
    let (q2, _) = cocycle::build_paraequivalence(&c, &p, &q2s)?;
    s.extend(cocycle::paraequivalence_group_check(&c, &p, &q, &q2)?.checks);
    let tb1 = cocycle::random_equivalence_data(&mut c)?;
    let tb2 = cocycle::random_equivalence_data(&mut c)?;
    s.extend(cocycle::equivalence_check(&c, &p, Some(&q), &tb1)?.2.checks);
    s.extend(cocycle::transitivity_check(&c, &p, &tb1, &tb2)?.checks);

    let mut sc = cocycle::CoverModel::skeleton(cm.clone(), cfg.patches, cfg.truncation, cfg.samples.min(2), cfg.seed ^ 0x5eed)?;
    let seeds = sc.random_cover_seeds(Fixture::Special)?;
    sc.install(&seeds)?;
    let overlaps = sc.random_overlap_seeds(Fixture::Special)?;
    let (sp, _) = cocycle::build_paracocycle(&sc, &overlaps)?;
    let sqs = sc.random_paraequivalence_seeds(Fixture::Special)?;
    let (sq, _) = cocycle::build_paraequivalence(&sc, &sp, &sqs)?;
    s.extend(cocycle::specialty_suite(&sc, &sp, Some(&sq))?.checks);
    let tb = cocycle::random_equivalence_data(&mut sc)?;
    let (spt, sqt, _) = cocycle::equivalence_check(&sc, &sp, Some(&sq), &tb)?;
    prefixed(&mut s, "equivalence.", cocycle::specialty_suite(&sc, &spt, sqt.as_ref())?);
    Ok(s)
}

pub fn run(cm: &CrossedModule, kind: SuiteKind, cfg: &RunConfig) -> Result<Suite> {
    cfg.validate()?;
    match kind {
        SuiteKind::Cartan => cartan(cm, cfg),
        SuiteKind::Connection => connection(cm, cfg),
        SuiteKind::Gauge1 => gauge1(cm, cfg),
        SuiteKind::Gauge2 => gauge2(cm, cfg),
        SuiteKind::Basic => basic(cm, cfg),
        SuiteKind::Matching => matching(cm, cfg),
        SuiteKind::Cocycle => cocycle_suite(cm, cfg),
    }
}

/// The pipeline on the trivial crossed module, checked against the relations
/// of an ordinary principal bundle written out independently of the 2-group
/// formulas.
pub fn ordinary_degeneration(cfg: &RunConfig) -> Result<Suite> {
    let cm = crate::liecm::instances::cm_t();
    let mut s = Suite::new("degeneration");
    let mut st = cfg.store(&cm)?;
    let co = register_adapted(&mut st, "")?;
    let co2 = register_adapted(&mut st, "'")?;
    let a = make_connection(&mut st, "", Curvature::Generic)?;
    let p = make_one_gauge(&mut st, "")?;
    let (d, z) = (st.d(), st.z());
    let (j, l) = (st.j(&z), st.l(&z));
    let x = j.x();
    let (w, t, g, h) = (&a.omega, &a.theta, &p.g, &p.h);
    let ap = |dv: &crate::dga::Deriv, e: &Expr| st.apply(dv, e);
    let acted = act_one_gauge(&p, &a);
    let ab = basicify_connection(&st, &a, &co)?;
    let pb = basicify_gauge(&st, &p, &co)?;
    let m = matching_data(&st, &co, &co2)?;
    let gm = &co.gamma;
    let empty = [&a.big_omega, &a.big_theta, &co.big_gamma, &co.big_sigma, &p.j, &p.k];
    if let Some(e) = empty.iter().find(|e| st.field_info(e).is_some_and(|f| !f.syms.is_empty())) {
        s.push(Check::fail("degeneration.trivial_e", "E-valued fields have no components", format!("{e:?}")));
    } else {
        s.push(Check::pass("degeneration.trivial_e", "E-valued fields have no components"));
    }
    let rels: Vec<(&str, Expr)> = vec![
        ("connection.d_omega", ap(&d, w)?.sub(&w.comm(w).half().neg().add(t))),
        ("connection.bianchi", ap(&d, t)?.add(&w.comm(t))),
        ("connection.j_omega", ap(&j, w)?.sub(&x)),
        ("connection.j_theta", ap(&j, t)?),
        ("connection.l_omega", ap(&l, w)?.add(&x.comm(w))),
        ("connection.l_theta", ap(&l, t)?.add(&x.comm(t))),
        ("gauge.d_g", ap(&d, &g.val)?.mul(&g.inv).add(h)),
        ("gauge.d_h", ap(&d, h)?.add(&h.comm(h).half())),
        ("gauge.j_g", ap(&j, &g.val)?),
        ("gauge.j_h", ap(&j, h)?.sub(&x.sub(&g.ad(&x)))),
        ("gauge.l_g", ap(&l, &g.val)?.mul(&g.inv).sub(&g.ad(&x).sub(&x))),
        ("gauge.l_h", ap(&l, h)?.add(&x.comm(h))),
        ("gauge.act_omega", acted.omega.sub(&g.ad(w).add(h))),
        ("gauge.act_theta", acted.theta.sub(&g.ad(t))),
        ("basic.omega", ab.omega.sub(&gm.val.mul(&a.omega.sub(&co.sigma)).mul(&gm.inv))),
        ("basic.g", pb.g.val.sub(&gm.val.mul(&p.g.val).mul(&gm.inv))),
        ("matching.f", m.f.val.sub(&co2.gamma.val.mul(&gm.inv))),
        ("matching.s", m.s.sub(&gm.val.mul(&co2.sigma.sub(&co.sigma)).mul(&gm.inv))),
        ("matching.omega", basicify_connection(&st, &a, &co2)?.omega.sub(&m.f.ad(&ab.omega.sub(&m.s)))),
    ];
    for (name, e) in &rels {
        s.push(st.check_zero(format!("degeneration.{name}"), "ordinary principal-bundle relation", e));
    }
    prefixed(&mut s, "degeneration.", st.cartan_check()?);

    let mut c = cocycle::CoverModel::skeleton(cm.clone(), cfg.patches, cfg.truncation, cfg.samples.min(2), cfg.seed)?;
    let seeds = c.random_cover_seeds(Fixture::Generic)?;
    c.install(&seeds)?;
    let overlaps = c.random_overlap_seeds(Fixture::Generic)?;
    let (pc, _) = cocycle::build_paracocycle(&c, &overlaps)?;
    let (bc, _) = cocycle::derive_base_cocycle(&c, &pc)?;
    let st = &c.store;
    for (i, om) in bc.big_omega.iter().enumerate() {
        s.push(st.check_zero(format!("degeneration.cocycle.Omega.{i}"), "no 2-form component", om));
    }
    for ((i, j), f) in &bc.big_f {
        s.push(st.check_zero(format!("degeneration.cocycle.F.{i}{j}"), "no E-valued transition form", f));
    }
    for ((i, j, k), t) in &bc.t {
        s.push(st.check_eq(format!("degeneration.cocycle.T.{i}{j}{k}"), "trivial triple-overlap data", &t.val, &Expr::ident()));
        let ordinary = bc.f[&(*i, *j)].val.mul(&bc.f[&(*j, *k)].val);
        s.push(st.check_eq(format!("degeneration.cocycle.f.{i}{j}{k}"), "ordinary Cech cocycle condition", &bc.f[&(*i, *k)].val, &ordinary));
    }
    Ok(s)
}

/// Where each seeded corruption must show up.
pub struct Control {
    pub tamper: Tamper,
    pub cm: &'static str,
    pub suite: SuiteKind,
    pub expect: fn(&str) -> bool,
}

pub const CONTROLS: [Control; 7] = [
    Control { tamper: Tamper::NaiveProduct, cm: "CM-C", suite: SuiteKind::Cartan, expect: |id| id.starts_with("ring.graded_commutativity.") },
    Control { tamper: Tamper::TauDot, cm: "CM-C", suite: SuiteKind::Cartan, expect: |id| id.starts_with("cm.linearization.") },
    Control { tamper: Tamper::DmMulSign, cm: "CM-C", suite: SuiteKind::Cartan, expect: |id| id.starts_with("derived.product.") },
    Control { tamper: Tamper::DSigmaTau, cm: "CM-C", suite: SuiteKind::Cartan, expect: |id| id == "cartan.dd.gamma" },
    Control { tamper: Tamper::GaugeJK, cm: "CM-C", suite: SuiteKind::Gauge1, expect: |id| id.starts_with("cartan.") && id.contains(".K") },
    Control { tamper: Tamper::OmegaB, cm: "CM-C", suite: SuiteKind::Basic, expect: |id| id == "basic.l.Omega_b" },
    Control { tamper: Tamper::TBar, cm: "CM-A", suite: SuiteKind::Cocycle, expect: |id| id == "paracocycle.cond3.012" },
];

/// Run every control: each passes when its corruption produces a failing
/// check at the expected location carrying a witness monomial.
pub fn negative_controls(cfg: &RunConfig) -> Result<Suite> {
    let mut s = Suite::new("negative-controls");
    for c in &CONTROLS {
        let cm = crate::liecm::instances::by_id(c.cm).expect("shipped crossed module");
        let run_cfg = RunConfig { tamper: Some(c.tamper), ..cfg.clone() };
        let r = run(&cm, c.suite, &run_cfg)?;
        let hit = r.failures().find(|f| (c.expect)(&f.id) && f.witness.as_ref().is_some_and(|w| !w.monomial.is_empty()));
        let name = serde_json::to_value(c.tamper).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        let id = format!("control.{name}");
        let anchor = format!("seeded corruption detected by the {} suite on {}", c.suite, c.cm);
        s.push(match hit {
            Some(f) => Check { id, anchor, passed: true, witness: f.witness.clone(), note: Some(f.id.clone()) },
            None => Check::fail(id, anchor, "corruption not detected at the expected check"),
        });
    }
    Ok(s)
}
