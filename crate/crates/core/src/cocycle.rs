//! Finite covers, differential paracocycles, the base-level cocycles they
//! induce, subordinated gauge paraequivalences, equivalences and specialty.
//!
//! A cover lives in one store. Base forms are polynomials in the base ring
//! pairs `(u_a, v_a)`; pullback along the projection is the inclusion of such
//! expressions, and membership is "every monomial uses base symbols only".
//! Each patch also owns a basic non-base pair `(w_i, dw_i)`: annihilated by
//! `j_Z`, `l_Z` but outside the base subalgebra, which is what lets a
//! quasi-trivializer fail to be a pullback.
//!
//! Patch coordinates are `gamma_i = phi_i gamma_r`, `Gamma_i = Phi_i + Ad phi_i
//! Gamma_r` over one registered reference family, with `phi_i = tau(S_i) k_i`.
//! Barred data are built in closed form from seeds; the audits recompute them
//! from total-space data and compare.

use std::collections::BTreeMap;
use std::rc::Rc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basic::{basicify_connection, basicify_gauge, certify_basic, matching_data, matching_parts, BasicError, MatchingData};
use crate::dga::{register_adapted, AdaptedCoordinates, Base, DgaError, Expr, FieldStore, GExpr};
use crate::gauge::{
    act_one_gauge, audit_connection, audit_one_gauge, compose_one_gauge, connection_from, fresh_id, invert_one_gauge, one_gauge_from,
    tau_group, GaugeError, OneGauge, Scope, TwoConnection,
};
use crate::liecm::{random_rational, sample_body_dirs, Alg, CmError, CrossedModule, GroupValuedMap, TauKind};
use crate::matrix::{QMat, RMat};
use crate::report::{Check, Suite, Witness};
use crate::superring::Sym;
use crate::tamper::Tamper;
use crate::{Scalar, Q};

pub type Pair = (usize, usize);
pub type Triple = (usize, usize, usize);

#[derive(Debug, Error)]
pub enum CocycleError {
    #[error("a cover needs at least one patch")]
    NoPatches,
    #[error("{0} uses symbols outside the base subalgebra")]
    NotBase(String),
    #[error("{0} uses symbols that are not basic")]
    NotBasic(String),
    #[error("{name} does not take values in {alg}")]
    WrongAlgebra { name: String, alg: String },
    #[error("{0} must lie in ker tau_dot for the connection to be fake flat")]
    NotFakeFlat(String),
    #[error("expected {expected} seeds for {name}, got {found}")]
    SeedCount { name: String, expected: usize, found: usize },
    #[error("no overlap ({0}, {1}) with {0} < {1} in the cover")]
    NoSuchPair(usize, usize),
    #[error("paraequivalence is subordinated to quasi-trivializer #{expected}, got #{found}")]
    Subordination { expected: u64, found: u64 },
    #[error("data belongs to another cover")]
    CoverMismatch,
    #[error(transparent)]
    Cm(#[from] CmError),
    #[error(transparent)]
    Dga(#[from] DgaError),
    #[error(transparent)]
    Gauge(#[from] GaugeError),
    #[error(transparent)]
    Basic(#[from] BasicError),
}

type Result<T> = std::result::Result<T, CocycleError>;

/// Seed families drawn by the random builders.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fixture {
    /// Identity maps and zero forms.
    Trivial,
    Generic,
    /// Special coordinates and a special connection or gauge transformation.
    Special,
}

/// Per-patch seeds of a cover and its model connection.
#[derive(Clone, Debug)]
pub struct CoverSeeds {
    /// `G`-valued base maps.
    pub k: Vec<GroupValuedMap>,
    /// `e`-valued base 1-forms.
    pub l: Vec<RMat>,
    /// `E`-valued basic maps, free to use the patch's non-base pair.
    pub s: Vec<GroupValuedMap>,
    /// `e`-valued base 2-form in `ker tau_dot`: the curvature of the model connection.
    pub kbar: RMat,
}

/// `E`-valued base maps on overlaps `i < j`; missing pairs are the identity.
#[derive(Clone, Debug, Default)]
pub struct OverlapSeeds {
    pub r: BTreeMap<Pair, GroupValuedMap>,
}

/// Reference data of a paraequivalence.
#[derive(Clone, Debug)]
pub struct ParaequivalenceSeeds {
    pub g: GroupValuedMap,
    pub j: RMat,
}

#[derive(Clone, Debug)]
pub struct Patch {
    pub k: GExpr,
    pub l: Expr,
    pub s: GExpr,
    pub phi: GExpr,
    pub big_phi: Expr,
    pub coords: AdaptedCoordinates,
    pub omega_bar: Expr,
    pub big_omega_bar: Expr,
}

pub struct CoverModel {
    pub id: u64,
    pub store: FieldStore,
    pub base: Base,
    /// `(w_i, dw_i)` per patch.
    pub nonbase: Vec<(Sym, Sym)>,
    pub reference: AdaptedCoordinates,
    pub patches: Vec<Patch>,
    pub kbar: Expr,
    /// Global fake-flat connection whose basic data on the reference family is `(0, kbar)`.
    pub connection: TwoConnection,
    n: usize,
}

#[derive(Clone, Debug)]
pub struct Paracocycle {
    pub id: u64,
    pub cover: u64,
    /// Identity of the quasi-trivializer `{T_bij}`.
    pub t_id: u64,
    pub connection: TwoConnection,
    pub t: BTreeMap<Pair, GExpr>,
    /// `T_bij = T0_bij R_ij^-1`, with `T0` fixed by the cover.
    pub r_bar: BTreeMap<Pair, GExpr>,
    pub omega_bar: Vec<Expr>,
    pub big_omega_bar: Vec<Expr>,
    pub f_bar: BTreeMap<Pair, GExpr>,
    pub big_f_bar: BTreeMap<Pair, Expr>,
    pub t_bar: BTreeMap<Triple, GExpr>,
}

#[derive(Clone, Debug)]
pub struct Paraequivalence {
    pub id: u64,
    pub t_id: u64,
    pub gauge: OneGauge,
    pub g_bar: Vec<GExpr>,
    pub j_bar: Vec<Expr>,
    pub a_bar: BTreeMap<Pair, GExpr>,
}

/// Barred data recovered from total-space data by stripping.
#[derive(Clone, Debug)]
pub struct BaseCocycle {
    pub omega: Vec<Expr>,
    pub big_omega: Vec<Expr>,
    pub f: BTreeMap<Pair, GExpr>,
    pub big_f: BTreeMap<Pair, Expr>,
    pub t: BTreeMap<Triple, GExpr>,
}

fn tag2((i, j): Pair) -> String {
    format!("{i}{j}")
}

fn tag3((i, j, k): Triple) -> String {
    format!("{i}{j}{k}")
}

/// `mu(a, e) = a e a^-1` in the ambient realization.
fn mu(a: &GExpr, e: &GExpr) -> GExpr {
    a.mul(e).mul(&a.inverse())
}

pub fn ring_group(m: &GroupValuedMap) -> GExpr {
    GExpr { val: Expr::ring(m.value()), inv: Expr::ring(m.inverse_value()) }
}

fn dir_matrices(cm: &CrossedModule, alg: Alg, dirs: &[Vec<Q>]) -> Vec<QMat> {
    let spec = cm.alg(alg);
    dirs.iter()
        .map(|c| c.iter().zip(&spec.reps).fold(QMat::zero(cm.n), |acc, (x, r)| acc.add(&r.scale(x))))
        .collect()
}

fn random_combo(rng: &mut rand_chacha::ChaCha8Rng, atoms: &[Scalar], ctx: crate::superring::RingCtx) -> Scalar {
    atoms.iter().fold(Scalar::zero(ctx), |acc, a| &acc + &a.scale(&random_rational(rng)))
}

/// `dg g^-1`.
fn right_mc(store: &FieldStore, g: &GExpr) -> Result<Expr> {
    Ok(store.apply(&store.d(), &g.val)?.mul(&g.inv))
}

/// Gauge action on a pair `(omega, Omega)`:
/// `Ad g omega - dg g^-1 - tau_dot J`, `Ad g Omega - dJ - [J,J]/2 - [omega', J]`.
fn gauge_act(store: &FieldStore, g: &GExpr, j: &Expr, w: &Expr, bw: &Expr) -> Result<(Expr, Expr)> {
    let w2 = g.ad(w).sub(&right_mc(store, g)?).sub(&j.tau());
    let bw2 = g.ad(bw).sub(&store.apply(&store.d(), j)?).sub(&j.comm(j).half()).sub(&w2.comm(j));
    Ok((w2, bw2))
}

/// `Ad T(F) - .mu(omega, T) - dT T^-1`.
fn twist(store: &FieldStore, t: &GExpr, w: &Expr, f: &Expr) -> Result<Expr> {
    Ok(t.ad(f).sub(&t.dot_mu(w)).sub(&right_mc(store, t)?))
}

impl CoverModel {
    /// Store, base and non-base symbols and the reference coordinates; no patches yet.
    pub fn skeleton(cm: CrossedModule, n: usize, trunc: u16, samples: usize, seed: u64) -> Result<CoverModel> {
        if n == 0 {
            return Err(CocycleError::NoPatches);
        }
        let mut store = FieldStore::new(cm, trunc, samples, seed)?;
        let base = crate::dga::register_base(&mut store, 2)?;
        let nonbase = (0..n)
            .map(|i| store.add_ring_pair(&format!("w{i}"), &format!("dw{i}"), 0))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let reference = register_adapted(&mut store, "_r")?;
        let connection = connection_from(&store, reference.sigma.clone(), reference.big_sigma.clone())?;
        Ok(CoverModel {
            id: fresh_id(),
            store,
            base,
            nonbase,
            reference,
            patches: Vec::new(),
            kbar: Expr::zero(),
            connection,
            n,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> Vec<Pair> {
        let n = self.n;
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
    }

    pub fn triples(&self) -> Vec<Triple> {
        let n = self.n;
        let mut v = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    v.push((i, j, k));
                }
            }
        }
        v
    }

    pub fn quadruples(&self) -> Vec<(usize, usize, usize, usize)> {
        let mut v = Vec::new();
        for (i, j, k) in self.triples() {
            for l in k + 1..self.n {
                v.push((i, j, k, l));
            }
        }
        v
    }

    pub fn is_base(&self, s: Sym) -> bool {
        self.base.u.contains(&s) || self.base.v.contains(&s)
    }

    pub fn is_basic(&self, s: Sym) -> bool {
        self.is_base(s) || self.nonbase.iter().any(|&(w, dw)| s == w || s == dw)
    }

    fn cm(&self) -> Rc<CrossedModule> {
        self.store.cm.clone()
    }

    /// Non-base monomials of `e` or dependence on the body sample, if any.
    pub fn base_witness(&self, e: &Expr) -> Option<Witness> {
        if e.is_zero() {
            return None;
        }
        let table = Some(&self.store.table);
        let first = self.store.eval(e, 0);
        for s in 0..self.store.samples {
            let m = if s == 0 { first.clone() } else { self.store.eval(e, s) };
            let stray = m.sub(&m.kill(&|x| !self.is_base(x)));
            if let Some(w) = Witness::from_residual(&stray, s, table) {
                return Some(w);
            }
            if let Some(w) = Witness::from_residual(&m.sub(&first), s, table) {
                return Some(w);
            }
        }
        None
    }

    pub fn pullback_check(&self, id: impl Into<String>, anchor: impl Into<String>, e: &Expr) -> Check {
        Check::from_witness(id, anchor, self.base_witness(e))
    }

    /// Inverse of pullback on its image: the base expression equal to `e`.
    pub fn strip(&self, name: &str, e: &Expr) -> Result<Expr> {
        if self.base_witness(e).is_some() {
            return Err(CocycleError::NotBase(name.into()));
        }
        Ok(Expr::ring(self.store.eval(e, 0)))
    }

    fn strip_group(&self, name: &str, g: &GExpr) -> Result<GExpr> {
        Ok(GExpr { val: self.strip(name, &g.val)?, inv: self.strip(name, &g.inv)? })
    }

    fn validate(&self, name: &str, m: &RMat, alg: Alg, allow_nonbase: bool) -> Result<()> {
        for e in m.entries() {
            for (mono, _) in e.terms() {
                for &s in mono.syms() {
                    if allow_nonbase && !self.is_basic(s) {
                        return Err(CocycleError::NotBasic(name.into()));
                    }
                    if !allow_nonbase && !self.is_base(s) {
                        return Err(CocycleError::NotBase(name.into()));
                    }
                }
            }
        }
        if !self.store.cm.alg(alg).contains(m) {
            return Err(CocycleError::WrongAlgebra { name: name.into(), alg: self.store.cm.alg(alg).name.clone() });
        }
        Ok(())
    }

    fn validate_group(&self, name: &str, g: &GroupValuedMap, allow_nonbase: bool) -> Result<()> {
        self.validate(name, &g.tail, g.group, allow_nonbase)
    }

    fn atoms(&self, syms: &[Sym]) -> Vec<Scalar> {
        let ctx = self.store.ctx();
        syms.iter().map(|&s| Scalar::symbol(ctx, s)).collect()
    }

    fn random_group(&mut self, alg: Alg, dirs: &[QMat], atoms: &[Scalar], body: bool) -> Result<GroupValuedMap> {
        let cm = self.cm();
        let ctx = self.store.ctx();
        let named: Vec<(String, QMat)> = dirs.iter().enumerate().map(|(i, m)| (format!("dir{i}"), m.clone())).collect();
        let body = if body { sample_body_dirs(&named, cm.n, self.store.rng())? } else { QMat::identity(cm.n) };
        let mut tail = RMat::zero(ctx, cm.n);
        for d in dirs {
            let c = random_combo(self.store.rng(), atoms, ctx);
            tail = tail.add(&RMat::combination(ctx, cm.n, &[c], std::slice::from_ref(d)));
        }
        Ok(GroupValuedMap { group: alg, body, tail })
    }

    fn random_form(&mut self, dirs: &[QMat], degree: u32) -> RMat {
        let ctx = self.store.ctx();
        let n = self.store.n();
        let one = Scalar::one(ctx);
        let u = self.atoms(&self.base.u.clone());
        let v = self.atoms(&self.base.v.clone());
        let mut out = RMat::zero(ctx, n);
        for d in dirs {
            let c = match degree {
                1 => {
                    let mut acc = Scalar::zero(ctx);
                    for va in &v {
                        let poly = random_combo(self.store.rng(), &[one.clone(), u[0].clone(), u[1].clone()], ctx);
                        acc = &acc + &(&poly * va);
                    }
                    acc
                }
                _ => {
                    let poly = random_combo(self.store.rng(), &[one.clone(), u[0].clone()], ctx);
                    &poly * &(&v[0] * &v[1])
                }
            };
            out = out.add(&RMat::combination(ctx, n, &[c], std::slice::from_ref(d)));
        }
        out
    }

    fn all_dirs(&self, alg: Alg) -> Vec<QMat> {
        self.store.cm.alg(alg).reps.clone()
    }

    fn sector_dirs(&self, which: fn(&crate::liecm::Sector) -> &Vec<Vec<Q>>, alg: Alg) -> Vec<QMat> {
        let cm = self.cm();
        match &cm.sector {
            Some(s) => dir_matrices(&cm, alg, which(s)),
            None => Vec::new(),
        }
    }

    fn identity_map(&self, alg: Alg) -> GroupValuedMap {
        GroupValuedMap::constant(alg, QMat::identity(self.store.n()), self.store.ctx())
    }

    /// Restart the sampler, so that later draws depend only on `seed`.
    pub fn reseed(&mut self, seed: u64) {
        *self.store.rng() = ChaCha8Rng::seed_from_u64(seed);
    }

    pub fn random_cover_seeds(&mut self, fixture: Fixture) -> Result<CoverSeeds> {
        let n = self.n;
        let ctx = self.store.ctx();
        let zero = RMat::zero(ctx, self.store.n());
        if fixture == Fixture::Trivial {
            return Ok(CoverSeeds {
                k: vec![self.identity_map(Alg::G); n],
                l: vec![zero.clone(); n],
                s: vec![self.identity_map(Alg::E); n],
                kbar: zero,
            });
        }
        let u = self.atoms(&self.base.u.clone());
        let g_all = self.all_dirs(Alg::G);
        let e_all = self.all_dirs(Alg::E);
        let p_dirs = self.sector_dirs(|s| &s.p_dirs, Alg::E);
        let mut seeds = CoverSeeds { k: Vec::new(), l: Vec::new(), s: Vec::new(), kbar: zero.clone() };
        for i in 0..n {
            seeds.k.push(self.random_group(Alg::G, &g_all, &u, true)?);
            seeds.l.push(if fixture == Fixture::Special { zero.clone() } else { self.random_form(&e_all, 1) });
            let w = Scalar::symbol(ctx, self.nonbase[i].0);
            let atoms = [w.clone(), &w * &u[0]];
            // special coordinates need S_i = 1 on the zero section, hence no body
            seeds.s.push(self.random_group(Alg::E, &p_dirs, &atoms, fixture == Fixture::Generic)?);
        }
        if fixture == Fixture::Generic && self.store.cm.tau == TauKind::Trivial {
            seeds.kbar = self.random_form(&e_all, 2);
        }
        Ok(seeds)
    }

    pub fn random_overlap_seeds(&mut self, fixture: Fixture) -> Result<OverlapSeeds> {
        let mut out = OverlapSeeds::default();
        if fixture == Fixture::Trivial {
            return Ok(out);
        }
        let u = self.atoms(&self.base.u.clone());
        let e_all = self.all_dirs(Alg::E);
        for p in self.pairs() {
            out.r.insert(p, self.random_group(Alg::E, &e_all, &u, true)?);
        }
        Ok(out)
    }

    pub fn random_paraequivalence_seeds(&mut self, fixture: Fixture) -> Result<ParaequivalenceSeeds> {
        let zero = RMat::zero(self.store.ctx(), self.store.n());
        if fixture == Fixture::Trivial {
            return Ok(ParaequivalenceSeeds { g: self.identity_map(Alg::G), j: zero });
        }
        let u = self.atoms(&self.base.u.clone());
        let g_dirs = self.sector_dirs(|s| &s.g_dirs, Alg::G);
        let j_dirs = self.sector_dirs(|s| &s.j_dirs, Alg::E);
        let g = self.random_group(Alg::G, &g_dirs, &u, true)?;
        let j = if fixture == Fixture::Special { zero } else { self.random_form(&j_dirs, 1) };
        Ok(ParaequivalenceSeeds { g, j })
    }

    /// Install patch coordinates and the model connection.
    pub fn install(&mut self, seeds: &CoverSeeds) -> Result<()> {
        let n = self.n;
        for (name, len) in [("k", seeds.k.len()), ("L", seeds.l.len()), ("S", seeds.s.len())] {
            if len != n {
                return Err(CocycleError::SeedCount { name: name.into(), expected: n, found: len });
            }
        }
        for i in 0..n {
            self.validate_group(&format!("k{i}"), &seeds.k[i], false)?;
            self.validate(&format!("L{i}"), &seeds.l[i], Alg::E, false)?;
            self.validate_group(&format!("S{i}"), &seeds.s[i], true)?;
        }
        self.validate("Kbar", &seeds.kbar, Alg::E, false)?;
        if !self.store.cm.tau_dot_r(&seeds.kbar).is_zero() {
            return Err(CocycleError::NotFakeFlat("Kbar".into()));
        }
        let store = &self.store;
        let r = &self.reference;
        let kbar = Expr::ring(seeds.kbar.clone());
        let d = store.d();
        let mut patches = Vec::with_capacity(n);
        for i in 0..n {
            let k = ring_group(&seeds.k[i]);
            let l = Expr::ring(seeds.l[i].clone());
            let s = ring_group(&seeds.s[i]);
            let (omega_bar, big_omega_bar) = gauge_act(store, &k, &l, &Expr::zero(), &kbar)?;
            let phi = tau_group(store, &s).mul(&k);
            let big_phi = twist(store, &s, &omega_bar, &l)?;
            let gamma = phi.mul(&r.gamma);
            let big_gamma = big_phi.add(&phi.ad(&r.big_gamma));
            let gi = gamma.inverse();
            let sigma = gamma.inv.mul(&store.apply(&d, &gamma.val)?).add(&gi.ad(&big_gamma).tau());
            let big_sigma = gi.ad(&store.apply(&d, &big_gamma)?.add(&big_gamma.comm(&big_gamma).half()));
            let coords = AdaptedCoordinates { label: format!("_{i}"), gamma, big_gamma, sigma, big_sigma };
            patches.push(Patch { k, l, s, phi, big_phi, coords, omega_bar, big_omega_bar });
        }
        let omega = r.sigma.clone();
        let big_omega = r.big_sigma.add(&r.gamma.inverse().ad(&kbar));
        self.connection = connection_from(store, omega, big_omega)?;
        self.patches = patches;
        self.kbar = kbar;
        Ok(())
    }

    /// `f_bij`, `F_bij` from the patch coordinates, `f_bij = gamma_i gamma_j^-1`.
    pub fn matching(&self, (i, j): Pair) -> Result<MatchingData> {
        Ok(matching_data(&self.store, &self.patches[j].coords, &self.patches[i].coords)?)
    }

    fn f0(&self, (i, j): Pair) -> GExpr {
        self.patches[i].k.mul(&self.patches[j].k.inverse())
    }

    /// Quasi-trivializer part fixed by the cover: `S_i mu(k_i k_j^-1, S_j^-1)`.
    fn t0(&self, (i, j): Pair) -> GExpr {
        self.patches[i].s.mul(&mu(&self.f0((i, j)), &self.patches[j].s.inverse()))
    }
}

/// Random cover with patch coordinates and model connection installed.
pub fn build_cover(n: usize, cm: CrossedModule, seed: u64, fixture: Fixture) -> Result<CoverModel> {
    let mut c = CoverModel::skeleton(cm, n, crate::dga::DEFAULT_TRUNCATION, 2, seed)?;
    let seeds = c.random_cover_seeds(fixture)?;
    c.install(&seeds)?;
    Ok(c)
}

/// Patch coordinates are adapted coordinates, matching data are basic, and
/// `(f_b, F_b)` is a Čech 1-cocycle.
pub fn audit_cover(c: &CoverModel) -> Result<Suite> {
    let store = &c.store;
    let mut s = Suite::new("cover");
    let z = store.z();
    let (jd, l) = (store.j(&z), store.l(&z));
    let (x, xs) = (jd.x(), jd.xs());
    for (i, p) in c.patches.iter().enumerate() {
        let co = &p.coords;
        let pre = format!("cover.coords.{i}");
        let rows = [
            ("j_gamma", "adapted coordinates: j_Z gamma = 0", store.apply(&jd, &co.gamma.val)?, Expr::zero()),
            ("l_gamma", "adapted coordinates: gamma^-1 l_Z gamma = x", co.gamma.inv.mul(&store.apply(&l, &co.gamma.val)?), x.clone()),
            ("j_Gamma", "adapted coordinates: j_Z Gamma = 0", store.apply(&jd, &co.big_gamma)?, Expr::zero()),
            ("l_Gamma", "adapted coordinates: Ad gamma^-1 l_Z Gamma = X", co.gamma.inverse().ad(&store.apply(&l, &co.big_gamma)?), xs.clone()),
            ("j_sigma", "adapted coordinates: j_Z sigma = x", store.apply(&jd, &co.sigma)?, x.clone()),
            ("l_sigma", "adapted coordinates: l_Z sigma = -[x,sigma] + tau_dot X", store.apply(&l, &co.sigma)?, x.comm(&co.sigma).neg().add(&xs.tau())),
        ];
        for (id, anchor, a, b) in rows {
            s.push(store.check_eq(format!("{pre}.{id}"), anchor, &a, &b));
        }
    }
    for p in c.pairs() {
        let m = c.matching(p)?;
        for chk in certify_basic(store, &matching_parts(&m))?.checks {
            s.push(Check { id: format!("cover.{}.{}", tag2(p), chk.id), ..chk });
        }
    }
    for t @ (i, j, k) in c.triples() {
        let (mij, mjk, mik) = (c.matching((i, j))?, c.matching((j, k))?, c.matching((i, k))?);
        s.push(store.check_eq(
            format!("cover.cocycle.f.{}", tag3(t)),
            "total-space cocycle: f_bik = f_bij f_bjk",
            &mik.f.val,
            &mij.f.mul(&mjk.f).val,
        ));
        s.push(store.check_eq(
            format!("cover.cocycle.F.{}", tag3(t)),
            "total-space cocycle: F_bik = F_bij + mu_dot(f_bij, F_bjk)",
            &mik.big_f,
            &mij.big_f.add(&mij.f.ad(&mjk.big_f)),
        ));
    }
    Ok(s)
}

/// Paracocycle with `T_bij = S_i mu(k_i k_j^-1, S_j^-1) R_ij^-1`, followed by
/// its full audit.
pub fn build_paracocycle(c: &CoverModel, seeds: &OverlapSeeds) -> Result<(Paracocycle, Suite)> {
    for (&(i, j), r) in &seeds.r {
        if i >= j || j >= c.n {
            return Err(CocycleError::NoSuchPair(i, j));
        }
        c.validate_group(&format!("R{i}{j}"), r, false)?;
    }
    let r_bar: BTreeMap<Pair, GExpr> =
        c.pairs().into_iter().map(|p| (p, seeds.r.get(&p).map(ring_group).unwrap_or_else(GExpr::one))).collect();
    let p = from_overlaps(c, c.connection.clone(), r_bar, fresh_id())?;
    let s = audit_paracocycle(c, &p)?;
    Ok((p, s))
}

fn from_overlaps(c: &CoverModel, connection: TwoConnection, r_bar: BTreeMap<Pair, GExpr>, t_id: u64) -> Result<Paracocycle> {
    let store = &c.store;
    let omega_bar: Vec<Expr> = c.patches.iter().map(|p| p.omega_bar.clone()).collect();
    let big_omega_bar = c.patches.iter().map(|p| p.big_omega_bar.clone()).collect();
    let (mut t, mut f_bar, mut big_f_bar) = (BTreeMap::new(), BTreeMap::new(), BTreeMap::new());
    for pr @ (i, j) in c.pairs() {
        let r = &r_bar[&pr];
        let f0 = c.f0(pr);
        let big_f0 = c.patches[i].l.sub(&f0.ad(&c.patches[j].l));
        t.insert(pr, c.t0(pr).mul(&r.inverse()));
        f_bar.insert(pr, tau_group(store, r).mul(&f0));
        big_f_bar.insert(pr, twist(store, r, &omega_bar[i], &big_f0)?);
    }
    let mut t_bar = BTreeMap::new();
    for tr @ (i, j, k) in c.triples() {
        let tb = r_bar[&(i, k)].mul(&mu(&c.f0((i, j)), &r_bar[&(j, k)].inverse())).mul(&r_bar[&(i, j)].inverse());
        t_bar.insert(tr, tb);
    }
    if store.tamper == Some(Tamper::TBar) {
        if let (Some(tr), Some(e0)) = (c.triples().first().copied(), store.cm.e.reps.first()) {
            let ctx = store.ctx();
            let bump = RMat::combination(ctx, store.n(), &[Scalar::symbol(ctx, c.base.u[0])], std::slice::from_ref(e0));
            let bump = GroupValuedMap { group: Alg::E, body: QMat::identity(store.n()), tail: bump };
            let tb = t_bar[&tr].mul(&ring_group(&bump));
            t_bar.insert(tr, tb);
        }
    }
    Ok(Paracocycle { id: fresh_id(), cover: c.id, t_id, connection, t, r_bar, omega_bar, big_omega_bar, f_bar, big_f_bar, t_bar })
}

/// Fake flatness, basicness of `T`, base membership of the barred data and
/// the three paracocycle conditions, all by evaluation.
pub fn audit_paracocycle(c: &CoverModel, p: &Paracocycle) -> Result<Suite> {
    if p.cover != c.id {
        return Err(CocycleError::CoverMismatch);
    }
    let store = &c.store;
    let mut s = Suite::new("paracocycle");
    s.extend(audit_connection(store, &p.connection, "paracocycle.", Scope::Operation)?.checks);
    s.push(store.check_zero("paracocycle.fake_flat", "fake flatness: theta = 0", &p.connection.theta));
    for (i, patch) in c.patches.iter().enumerate() {
        let b = basicify_connection(store, &p.connection, &patch.coords)?;
        s.push(c.pullback_check(format!("paracocycle.base.omega_bar.{i}"), "omega_bar_i is a base form", &p.omega_bar[i]));
        s.push(c.pullback_check(format!("paracocycle.base.Omega_bar.{i}"), "Omega_bar_i is a base form", &p.big_omega_bar[i]));
        s.push(store.check_eq(format!("paracocycle.cond1.omega.{i}"), "paracocycle condition 1: omega_bi = pi* omega_bar_i", &b.omega, &p.omega_bar[i]));
        s.push(store.check_eq(
            format!("paracocycle.cond1.Omega.{i}"),
            "paracocycle condition 1: Omega_bi = pi* Omega_bar_i",
            &b.big_omega,
            &p.big_omega_bar[i],
        ));
    }
    let z = store.z();
    for pr @ (i, _) in c.pairs() {
        let tag = tag2(pr);
        let t = &p.t[&pr];
        for d in [store.j(&z), store.l(&z)] {
            s.push(store.check_zero(
                format!("paracocycle.T_basic.{}.{tag}", d.kind.name()),
                format!("quasi-trivializer is basic: {}_Z T_bij = 0", d.kind.name()),
                &store.apply(&d, &t.val)?,
            ));
        }
        s.push(c.pullback_check(format!("paracocycle.base.f_bar.{tag}"), "f_bar_ij is a base map", &p.f_bar[&pr].val));
        s.push(c.pullback_check(format!("paracocycle.base.F_bar.{tag}"), "F_bar_ij is a base form", &p.big_f_bar[&pr]));
        let m = c.matching(pr)?;
        s.push(store.check_eq(
            format!("paracocycle.cond2.f.{tag}"),
            "paracocycle condition 2: f_bij = tau(T_bij) pi* f_bar_ij",
            &m.f.val,
            &tau_group(store, t).mul(&p.f_bar[&pr]).val,
        ));
        s.push(store.check_eq(
            format!("paracocycle.cond2.F.{tag}"),
            "paracocycle condition 2: F_bij = Ad T_bij(F_bar_ij) - .mu(omega_bar_i, T_bij) - dT_bij T_bij^-1",
            &m.big_f,
            &twist(store, t, &p.omega_bar[i], &p.big_f_bar[&pr])?,
        ));
    }
    for tr @ (i, j, k) in c.triples() {
        let tag = tag3(tr);
        let lhs = triple_from_total(c, p, tr)?;
        s.push(c.pullback_check(format!("paracocycle.base.T_bar.{tag}"), "T_bik^-1 mu(f_bij,T_bjk) T_bij is a base map", &lhs.val));
        s.push(store.check_eq(
            format!("paracocycle.cond3.{tag}"),
            "paracocycle condition 3: T_bik^-1 mu(f_bij, T_bjk) T_bij = pi* T_bar_ijk",
            &lhs.val,
            &p.t_bar[&(i, j, k)].val,
        ));
    }
    Ok(s)
}

fn triple_from_total(c: &CoverModel, p: &Paracocycle, (i, j, k): Triple) -> Result<GExpr> {
    let f = c.matching((i, j))?.f;
    Ok(p.t[&(i, k)].inverse().mul(&mu(&f, &p.t[&(j, k)])).mul(&p.t[&(i, j)]))
}

/// Strip the total-space data of `p` to base data and check every
/// base-level cocycle identity on the result.
pub fn derive_base_cocycle(c: &CoverModel, p: &Paracocycle) -> Result<(BaseCocycle, Suite)> {
    if p.cover != c.id {
        return Err(CocycleError::CoverMismatch);
    }
    let store = &c.store;
    let mut bc = BaseCocycle { omega: Vec::new(), big_omega: Vec::new(), f: BTreeMap::new(), big_f: BTreeMap::new(), t: BTreeMap::new() };
    for (i, patch) in c.patches.iter().enumerate() {
        let b = basicify_connection(store, &p.connection, &patch.coords)?;
        bc.omega.push(c.strip(&format!("omega_b{i}"), &b.omega)?);
        bc.big_omega.push(c.strip(&format!("Omega_b{i}"), &b.big_omega)?);
    }
    for pr @ (i, _) in c.pairs() {
        let t = &p.t[&pr];
        let m = c.matching(pr)?;
        let f = tau_group(store, t).inverse().mul(&m.f);
        let big_f = t.inverse().ad(&m.big_f.add(&t.dot_mu(&bc.omega[i])).add(&right_mc(store, t)?));
        bc.f.insert(pr, c.strip_group(&format!("f_bar{}", tag2(pr)), &f)?);
        bc.big_f.insert(pr, c.strip(&format!("F_bar{}", tag2(pr)), &big_f)?);
    }
    for tr in c.triples() {
        let t = triple_from_total(c, p, tr)?;
        bc.t.insert(tr, c.strip_group(&format!("T_bar{}", tag3(tr)), &t)?);
    }
    let s = base_cocycle_identities(c, &bc)?;
    Ok((bc, s))
}

pub fn base_cocycle_identities(c: &CoverModel, bc: &BaseCocycle) -> Result<Suite> {
    let store = &c.store;
    let d = store.d();
    let mut s = Suite::new("base-cocycle");
    for i in 0..c.n {
        let (w, bw) = (&bc.omega[i], &bc.big_omega[i]);
        let curv = store.apply(&d, w)?.add(&w.comm(w).half()).sub(&bw.tau());
        s.push(store.check_zero(format!("base.fake_flat.{i}"), "base fake flatness: d omega_bar + [omega_bar,omega_bar]/2 - tau_dot(Omega_bar) = 0", &curv));
    }
    for pr @ (i, j) in c.pairs() {
        let tag = tag2(pr);
        let (f, bf) = (&bc.f[&pr], &bc.big_f[&pr]);
        let wi = f.ad(&bc.omega[j]).sub(&right_mc(store, f)?).sub(&bf.tau());
        s.push(store.check_eq(
            format!("base.match.omega.{tag}"),
            "base matching: omega_bar_i = Ad f_bar_ij(omega_bar_j) - d f_bar_ij f_bar_ij^-1 - tau_dot(F_bar_ij)",
            &bc.omega[i],
            &wi,
        ));
        let bwi = f
            .ad(&bc.big_omega[j])
            .sub(&store.apply(&d, bf)?)
            .sub(&bf.comm(bf).half())
            .sub(&bc.omega[i].comm(bf));
        s.push(store.check_eq(
            format!("base.match.Omega.{tag}"),
            "base matching: Omega_bar_i = mu_dot(f_bar_ij, Omega_bar_j) - d F_bar_ij - [F_bar_ij,F_bar_ij]/2 - .mu.(omega_bar_i, F_bar_ij)",
            &bc.big_omega[i],
            &bwi,
        ));
    }
    for tr @ (i, j, k) in c.triples() {
        let tag = tag3(tr);
        let t = &bc.t[&tr];
        let (fij, fjk, fik) = (&bc.f[&(i, j)], &bc.f[&(j, k)], &bc.f[&(i, k)]);
        s.push(store.check_eq(
            format!("base.cocycle.f.{tag}"),
            "base cocycle: f_bar_ik = tau(T_bar_ijk) f_bar_ij f_bar_jk",
            &fik.val,
            &tau_group(store, t).mul(fij).mul(fjk).val,
        ));
        let inner = bc.big_f[&(i, j)].add(&fij.ad(&bc.big_f[&(j, k)]));
        s.push(store.check_eq(
            format!("base.cocycle.F.{tag}"),
            "base cocycle: F_bar_ik = Ad T_bar_ijk(F_bar_ij + mu_dot(f_bar_ij, F_bar_jk)) - .mu(omega_bar_i, T_bar_ijk) - dT_bar_ijk T_bar_ijk^-1",
            &bc.big_f[&(i, k)],
            &twist(store, t, &bc.omega[i], &inner)?,
        ));
    }
    for (i, j, k, l) in c.quadruples() {
        let t = &bc.t;
        let lhs = t[&(i, k, l)].mul(&t[&(i, j, k)]);
        let rhs = t[&(i, j, l)].mul(&mu(&bc.f[&(i, j)], &t[&(j, k, l)]));
        s.push(store.check_eq(
            format!("base.tetra.{i}{j}{k}{l}"),
            "tetrahedron: T_bar_ikl T_bar_ijk = T_bar_ijl mu(f_bar_ij, T_bar_jkl)",
            &lhs.val,
            &rhs.val,
        ));
    }
    Ok(s)
}

/// Barred data of the paracocycle as a `BaseCocycle`, without stripping.
pub fn constructed_base_cocycle(p: &Paracocycle) -> BaseCocycle {
    BaseCocycle {
        omega: p.omega_bar.clone(),
        big_omega: p.big_omega_bar.clone(),
        f: p.f_bar.clone(),
        big_f: p.big_f_bar.clone(),
        t: p.t_bar.clone(),
    }
}

/// Compare barred data built in closed form with data recovered by stripping.
pub fn compare_base_cocycles(c: &CoverModel, constructed: &BaseCocycle, stripped: &BaseCocycle) -> Suite {
    let store = &c.store;
    let mut s = Suite::new("base-routes");
    for i in 0..c.n {
        s.push(store.check_eq(format!("routes.omega_bar.{i}"), "constructed omega_bar_i = stripped omega_bi", &constructed.omega[i], &stripped.omega[i]));
        s.push(store.check_eq(
            format!("routes.Omega_bar.{i}"),
            "constructed Omega_bar_i = stripped Omega_bi",
            &constructed.big_omega[i],
            &stripped.big_omega[i],
        ));
    }
    for pr in c.pairs() {
        let tag = tag2(pr);
        s.push(store.check_eq(format!("routes.f_bar.{tag}"), "constructed f_bar_ij = stripped f_bar_ij", &constructed.f[&pr].val, &stripped.f[&pr].val));
        s.push(store.check_eq(format!("routes.F_bar.{tag}"), "constructed F_bar_ij = stripped F_bar_ij", &constructed.big_f[&pr], &stripped.big_f[&pr]));
    }
    for tr in c.triples() {
        s.push(store.check_eq(
            format!("routes.T_bar.{}", tag3(tr)),
            "constructed T_bar_ijk = stripped T_bar_ijk",
            &constructed.t[&tr].val,
            &stripped.t[&tr].val,
        ));
    }
    s
}

/// Paraequivalence built from reference data `(g_r, J_r)` on the reference
/// coordinates; `g_bar_i = k_i g_r k_i^-1`, `J_bar_i = Ad k_i J_r + L_i - Ad g_bar_i L_i`.
pub fn build_paraequivalence(c: &CoverModel, p: &Paracocycle, seeds: &ParaequivalenceSeeds) -> Result<(Paraequivalence, Suite)> {
    if p.cover != c.id {
        return Err(CocycleError::CoverMismatch);
    }
    c.validate_group("g_r", &seeds.g, false)?;
    c.validate("J_r", &seeds.j, Alg::E, false)?;
    let store = &c.store;
    let r = &c.reference;
    let gr = ring_group(&seeds.g);
    let jr = Expr::ring(seeds.j.clone());
    let g = r.gamma.inverse().mul(&gr).mul(&r.gamma);
    let j = r.gamma.inverse().ad(&jr.sub(&r.big_gamma).add(&gr.ad(&r.big_gamma)));
    let gauge = one_gauge_from(store, g, j)?;
    let mut g_bar = Vec::new();
    let mut j_bar = Vec::new();
    for patch in &c.patches {
        let gi = mu(&patch.k, &gr);
        j_bar.push(patch.k.ad(&jr).add(&patch.l).sub(&gi.ad(&patch.l)));
        g_bar.push(gi);
    }
    let a_bar = c.pairs().into_iter().map(|pr| (pr, mu(&g_bar[pr.0], &p.r_bar[&pr]).mul(&p.r_bar[&pr].inverse()))).collect();
    let q = Paraequivalence { id: fresh_id(), t_id: p.t_id, gauge, g_bar, j_bar, a_bar };
    let s = audit_paraequivalence(c, p, &q)?;
    Ok((q, s))
}

fn subordinated(p: &Paracocycle, q: &Paraequivalence) -> Result<()> {
    if q.t_id != p.t_id {
        return Err(CocycleError::Subordination { expected: q.t_id, found: p.t_id });
    }
    Ok(())
}

/// `gF_bar_ij = Ad A_ij^-1(J_bar_i + mu_dot(g_bar_i, F_bar_ij)) - mu_dot(f_bar_ij, J_bar_j)
///  - .mu(g omega_bar_i, A_ij^-1) - d A_ij^-1 A_ij`.
fn transformed_big_f(store: &FieldStore, p: &Paracocycle, q: &Paraequivalence, gw: &[Expr], pr @ (i, j): Pair) -> Result<Expr> {
    let a = &q.a_bar[&pr];
    let ai = a.inverse();
    let inner = q.j_bar[i].add(&q.g_bar[i].ad(&p.big_f_bar[&pr]));
    Ok(ai.ad(&inner).sub(&p.f_bar[&pr].ad(&q.j_bar[j])).sub(&ai.dot_mu(&gw[i])).sub(&right_mc(store, &ai)?))
}

fn transformed_omegas(store: &FieldStore, p: &Paracocycle, q: &Paraequivalence) -> Result<(Vec<Expr>, Vec<Expr>)> {
    let mut w = Vec::new();
    let mut bw = Vec::new();
    for i in 0..p.omega_bar.len() {
        let (a, b) = gauge_act(store, &q.g_bar[i], &q.j_bar[i], &p.omega_bar[i], &p.big_omega_bar[i])?;
        w.push(a);
        bw.push(b);
    }
    Ok((w, bw))
}

pub fn audit_paraequivalence(c: &CoverModel, p: &Paracocycle, q: &Paraequivalence) -> Result<Suite> {
    if p.cover != c.id {
        return Err(CocycleError::CoverMismatch);
    }
    subordinated(p, q)?;
    let store = &c.store;
    let mut s = Suite::new("paraequivalence");
    s.extend(audit_one_gauge(store, &q.gauge, "paraequivalence.", Scope::Operation)?.checks);
    for (i, patch) in c.patches.iter().enumerate() {
        let b = basicify_gauge(store, &q.gauge, &patch.coords)?;
        s.push(c.pullback_check(format!("paraequivalence.base.g_bar.{i}"), "g_bar_i is a base map", &q.g_bar[i].val));
        s.push(c.pullback_check(format!("paraequivalence.base.J_bar.{i}"), "J_bar_i is a base form", &q.j_bar[i]));
        s.push(store.check_eq(format!("paraequivalence.cond1.g.{i}"), "paraequivalence: g_bi = pi* g_bar_i", &b.g.val, &q.g_bar[i].val));
        s.push(store.check_eq(format!("paraequivalence.cond1.J.{i}"), "paraequivalence: J_bi = pi* J_bar_i", &b.j, &q.j_bar[i]));
    }
    let (gw, _) = transformed_omegas(store, p, q)?;
    for pr @ (i, j) in c.pairs() {
        let tag = tag2(pr);
        let gb = basicify_gauge(store, &q.gauge, &c.patches[i].coords)?.g;
        let t = &p.t[&pr];
        let lhs = mu(&gb, &t.inverse()).mul(t);
        let a = &q.a_bar[&pr];
        s.push(c.pullback_check(format!("paraequivalence.base.A_bar.{tag}"), "A_bar_ij is a base map", &a.val));
        s.push(store.check_eq(
            format!("paraequivalence.cond2.A.{tag}"),
            "paraequivalence: mu(g_bi, T_bij^-1) T_bij = pi* A_bar_ij",
            &lhs.val,
            &a.val,
        ));
        let f = &p.f_bar[&pr];
        s.push(store.check_eq(
            format!("paraequivalence.match.g.{tag}"),
            "paraequivalence matching: g_bar_i = tau(A_bar_ij) f_bar_ij g_bar_j f_bar_ij^-1",
            &q.g_bar[i].val,
            &tau_group(store, a).mul(&mu(f, &q.g_bar[j])).val,
        ));
        let gf = transformed_big_f(store, p, q, &gw, pr)?;
        let want = twist(store, a, &gw[i], &f.ad(&q.j_bar[j]).add(&gf))?.sub(&q.g_bar[i].ad(&p.big_f_bar[&pr]));
        s.push(store.check_eq(
            format!("paraequivalence.match.J.{tag}"),
            "paraequivalence matching: J_bar_i = Ad A_bar_ij(mu_dot(f_bar_ij, J_bar_j) + gF_bar_ij) - .mu(g omega_bar_i, A_bar_ij) - dA_bar_ij A_bar_ij^-1 - mu_dot(g_bar_i, F_bar_ij)",
            &q.j_bar[i],
            &want,
        ));
    }
    for tr @ (i, j, k) in c.triples() {
        let tb = &p.t_bar[&tr];
        let rhs = mu(&q.g_bar[i], tb).mul(&q.a_bar[&(i, j)]).mul(&mu(&p.f_bar[&(i, j)], &q.a_bar[&(j, k)])).mul(&tb.inverse());
        s.push(store.check_eq(
            format!("paraequivalence.match.A.{}", tag3(tr)),
            "paraequivalence matching: A_bar_ik = mu(g_bar_i, T_bar_ijk) A_bar_ij mu(f_bar_ij, A_bar_jk) T_bar_ijk^-1",
            &q.a_bar[&(i, k)].val,
            &rhs.val,
        ));
    }
    Ok(s)
}

/// Gauge transform of a paracocycle by a subordinated paraequivalence, with
/// the barred data given by the transformation formulas; the report is the
/// full audit of the result.
pub fn transform_paracocycle(c: &CoverModel, p: &Paracocycle, q: &Paraequivalence) -> Result<(Paracocycle, Suite)> {
    if p.cover != c.id {
        return Err(CocycleError::CoverMismatch);
    }
    subordinated(p, q)?;
    let store = &c.store;
    let (omega_bar, big_omega_bar) = transformed_omegas(store, p, q)?;
    let mut big_f_bar = BTreeMap::new();
    for pr in c.pairs() {
        big_f_bar.insert(pr, transformed_big_f(store, p, q, &omega_bar, pr)?);
    }
    let out = Paracocycle {
        id: fresh_id(),
        cover: c.id,
        t_id: p.t_id,
        connection: act_one_gauge(&q.gauge, &p.connection),
        t: p.t.clone(),
        r_bar: p.r_bar.clone(),
        omega_bar,
        big_omega_bar,
        f_bar: p.f_bar.clone(),
        big_f_bar,
        t_bar: p.t_bar.clone(),
    };
    let s = audit_paracocycle(c, &out)?;
    Ok((out, s))
}

/// `p~` with `T~_bij = T_bij pi* Tbar_ij^-1` and barred data given by the
/// equivalence formulas.
pub fn equivalent_paracocycle(c: &CoverModel, p: &Paracocycle, tb: &BTreeMap<Pair, GExpr>) -> Result<Paracocycle> {
    if p.cover != c.id {
        return Err(CocycleError::CoverMismatch);
    }
    let store = &c.store;
    let one = GExpr::one();
    let get = |pr: &Pair| tb.get(pr).unwrap_or(&one);
    let (mut t, mut r_bar, mut f_bar, mut big_f_bar) = (BTreeMap::new(), BTreeMap::new(), BTreeMap::new(), BTreeMap::new());
    for pr @ (i, _) in c.pairs() {
        let q = get(&pr);
        t.insert(pr, p.t[&pr].mul(&q.inverse()));
        r_bar.insert(pr, q.mul(&p.r_bar[&pr]));
        f_bar.insert(pr, tau_group(store, q).mul(&p.f_bar[&pr]));
        big_f_bar.insert(pr, twist(store, q, &p.omega_bar[i], &p.big_f_bar[&pr])?);
    }
    let mut t_bar = BTreeMap::new();
    for tr @ (i, j, k) in c.triples() {
        let v = get(&(i, k)).mul(&p.t_bar[&tr]).mul(&mu(&p.f_bar[&(i, j)], &get(&(j, k)).inverse())).mul(&get(&(i, j)).inverse());
        t_bar.insert(tr, v);
    }
    Ok(Paracocycle {
        id: fresh_id(),
        cover: c.id,
        t_id: fresh_id(),
        connection: p.connection.clone(),
        t,
        r_bar,
        omega_bar: p.omega_bar.clone(),
        big_omega_bar: p.big_omega_bar.clone(),
        f_bar,
        big_f_bar,
        t_bar,
    })
}

/// `q~` for `p~`: same gauge data, `A~_ij = mu(g_bar_i, Tbar_ij) A_ij Tbar_ij^-1`.
pub fn equivalent_paraequivalence(p_tilde: &Paracocycle, q: &Paraequivalence, tb: &BTreeMap<Pair, GExpr>) -> Paraequivalence {
    let one = GExpr::one();
    let a_bar = q
        .a_bar
        .iter()
        .map(|(pr, a)| {
            let t = tb.get(pr).unwrap_or(&one);
            (*pr, mu(&q.g_bar[pr.0], t).mul(a).mul(&t.inverse()))
        })
        .collect();
    Paraequivalence { id: fresh_id(), t_id: p_tilde.t_id, gauge: q.gauge.clone(), g_bar: q.g_bar.clone(), j_bar: q.j_bar.clone(), a_bar }
}

pub fn random_equivalence_data(c: &mut CoverModel) -> Result<BTreeMap<Pair, GExpr>> {
    Ok(c.random_overlap_seeds(Fixture::Generic)?.r.iter().map(|(p, m)| (*p, ring_group(m))).collect())
}

/// Build `p~` (and `q~`), audit them, and check that the basic connection
/// data agree.
pub fn equivalence_check(
    c: &CoverModel,
    p: &Paracocycle,
    q: Option<&Paraequivalence>,
    tb: &BTreeMap<Pair, GExpr>,
) -> Result<(Paracocycle, Option<Paraequivalence>, Suite)> {
    let store = &c.store;
    let pt = equivalent_paracocycle(c, p, tb)?;
    let mut s = Suite::new("equivalence");
    for (i, patch) in c.patches.iter().enumerate() {
        let a = basicify_connection(store, &p.connection, &patch.coords)?;
        let b = basicify_connection(store, &pt.connection, &patch.coords)?;
        s.push(store.check_eq(format!("equivalence.omega_b.{i}"), "equivalent paracocycles: omega~_bi = omega_bi", &a.omega, &b.omega));
        s.push(store.check_eq(format!("equivalence.Omega_b.{i}"), "equivalent paracocycles: Omega~_bi = Omega_bi", &a.big_omega, &b.big_omega));
    }
    for pr in c.pairs() {
        if let Some(t) = tb.get(&pr) {
            s.push(c.pullback_check(format!("equivalence.base.T_bar.{}", tag2(pr)), "equivalence data T_bar_ij is a base map", &t.val));
        }
    }
    for chk in audit_paracocycle(c, &pt)?.checks {
        s.push(Check { id: format!("equivalence.{}", chk.id), ..chk });
    }
    let qt = match q {
        Some(q) => {
            subordinated(p, q)?;
            let qt = equivalent_paraequivalence(&pt, q, tb);
            for chk in audit_paraequivalence(c, &pt, &qt)?.checks {
                s.push(Check { id: format!("equivalence.{}", chk.id), ..chk });
            }
            Some(qt)
        }
        None => None,
    };
    Ok((pt, qt, s))
}

/// Compare two paracocycles' barred data and quasi-trivializers.
pub fn same_paracocycle(c: &CoverModel, prefix: &str, a: &Paracocycle, b: &Paracocycle) -> Suite {
    let store = &c.store;
    let mut s = Suite::new(prefix);
    for i in 0..c.n {
        s.push(store.check_eq(format!("{prefix}.omega_bar.{i}"), "same omega_bar_i", &a.omega_bar[i], &b.omega_bar[i]));
        s.push(store.check_eq(format!("{prefix}.Omega_bar.{i}"), "same Omega_bar_i", &a.big_omega_bar[i], &b.big_omega_bar[i]));
    }
    for pr in c.pairs() {
        let tag = tag2(pr);
        s.push(store.check_eq(format!("{prefix}.T.{tag}"), "same T_bij", &a.t[&pr].val, &b.t[&pr].val));
        s.push(store.check_eq(format!("{prefix}.f_bar.{tag}"), "same f_bar_ij", &a.f_bar[&pr].val, &b.f_bar[&pr].val));
        s.push(store.check_eq(format!("{prefix}.F_bar.{tag}"), "same F_bar_ij", &a.big_f_bar[&pr], &b.big_f_bar[&pr]));
    }
    for tr in c.triples() {
        s.push(store.check_eq(format!("{prefix}.T_bar.{}", tag3(tr)), "same T_bar_ijk", &a.t_bar[&tr].val, &b.t_bar[&tr].val));
    }
    s
}

/// Chain `p -> p1 -> p2` by `tb1` then `tb2` against `p -> p2'` by `tb2 tb1`.
pub fn transitivity_check(c: &CoverModel, p: &Paracocycle, tb1: &BTreeMap<Pair, GExpr>, tb2: &BTreeMap<Pair, GExpr>) -> Result<Suite> {
    let p1 = equivalent_paracocycle(c, p, tb1)?;
    let p2 = equivalent_paracocycle(c, &p1, tb2)?;
    let one = GExpr::one();
    let composed: BTreeMap<Pair, GExpr> =
        c.pairs().into_iter().map(|pr| (pr, tb2.get(&pr).unwrap_or(&one).mul(tb1.get(&pr).unwrap_or(&one)))).collect();
    let direct = equivalent_paracocycle(c, p, &composed)?;
    let mut s = same_paracocycle(c, "transitivity", &p2, &direct);
    for chk in audit_paracocycle(c, &p2)?.checks {
        s.push(Check { id: format!("transitivity.{}", chk.id), ..chk });
    }
    Ok(s)
}

fn compose_barred(c: &CoverModel, q2: &Paraequivalence, q1: &Paraequivalence, gauge: OneGauge) -> Paraequivalence {
    let g_bar = (0..c.n).map(|i| q2.g_bar[i].mul(&q1.g_bar[i])).collect();
    let j_bar = (0..c.n).map(|i| q2.j_bar[i].add(&q2.g_bar[i].ad(&q1.j_bar[i]))).collect();
    let a_bar = c.pairs().into_iter().map(|pr| (pr, mu(&q2.g_bar[pr.0], &q1.a_bar[&pr]).mul(&q2.a_bar[&pr]))).collect();
    Paraequivalence { id: fresh_id(), t_id: q1.t_id, gauge, g_bar, j_bar, a_bar }
}

fn invert_barred(c: &CoverModel, q: &Paraequivalence, gauge: OneGauge) -> Paraequivalence {
    let g_bar: Vec<GExpr> = q.g_bar.iter().map(GExpr::inverse).collect();
    let j_bar = (0..c.n).map(|i| g_bar[i].ad(&q.j_bar[i]).neg()).collect();
    let a_bar = c.pairs().into_iter().map(|pr| (pr, mu(&g_bar[pr.0], &q.a_bar[&pr].inverse()))).collect();
    Paraequivalence { id: fresh_id(), t_id: q.t_id, gauge, g_bar, j_bar, a_bar }
}

/// The inverse paraequivalence, subordinated to the same quasi-trivializer.
pub fn invert_paraequivalence(c: &CoverModel, q: &Paraequivalence) -> Result<Paraequivalence> {
    Ok(invert_barred(c, q, invert_one_gauge(&c.store, &q.gauge)?))
}

fn relabel(s: &mut Suite, prefix: &str, from: Suite) {
    for chk in from.checks {
        s.push(Check { id: format!("{prefix}.{}", chk.id), ..chk });
    }
}

/// Composite and inverse are subordinated paraequivalences with the
/// group-law barred data; `q q^-1` is the identity; transforming twice
/// equals transforming by the composite.
pub fn paraequivalence_group_check(c: &CoverModel, p: &Paracocycle, q1: &Paraequivalence, q2: &Paraequivalence) -> Result<Suite> {
    subordinated(p, q1)?;
    subordinated(p, q2)?;
    let store = &c.store;
    let mut s = Suite::new("paraequivalence-group");
    let q3 = compose_barred(c, q2, q1, compose_one_gauge(store, &q2.gauge, &q1.gauge)?);
    relabel(&mut s, "group.compose", audit_paraequivalence(c, p, &q3)?);
    let qi = invert_barred(c, q1, invert_one_gauge(store, &q1.gauge)?);
    relabel(&mut s, "group.inverse", audit_paraequivalence(c, p, &qi)?);
    let unit = compose_barred(c, q1, &qi, compose_one_gauge(store, &q1.gauge, &qi.gauge)?);
    for i in 0..c.n {
        s.push(store.check_eq(format!("group.unit.g_bar.{i}"), "q q^-1: g_bar_i = 1", &unit.g_bar[i].val, &Expr::ident()));
        s.push(store.check_zero(format!("group.unit.J_bar.{i}"), "q q^-1: J_bar_i = 0", &unit.j_bar[i]));
        s.push(store.check_eq(format!("group.unit.g.{i}"), "q q^-1: g = 1", &unit.gauge.g.val, &Expr::ident()));
        s.push(store.check_zero(format!("group.unit.J.{i}"), "q q^-1: J = 0", &unit.gauge.j));
    }
    for pr in c.pairs() {
        s.push(store.check_eq(format!("group.unit.A_bar.{}", tag2(pr)), "q q^-1: A_bar_ij = 1", &unit.a_bar[&pr].val, &Expr::ident()));
    }
    let (p1, _) = transform_paracocycle(c, p, q1)?;
    let (p21, _) = transform_paracocycle(c, &p1, q2)?;
    let (p3, _) = transform_paracocycle(c, p, &q3)?;
    s.extend(same_paracocycle(c, "group.transform", &p21, &p3).checks);
    Ok(s)
}

/// Vanishing statements on the zero section: special coordinates kill
/// `Gamma_r`, `Sigma_r` and the non-base pairs.
pub fn specialty_suite(c: &CoverModel, p: &Paracocycle, q: Option<&Paraequivalence>) -> Result<Suite> {
    if p.cover != c.id {
        return Err(CocycleError::CoverMismatch);
    }
    let store = &c.store;
    let kill_ring: Vec<Sym> = c.nonbase.iter().flat_map(|&(w, dw)| [w, dw]).collect();
    let r0 = store.restriction(&crate::basic::special_coordinate_kill(&c.reference), &kill_ring)?;
    let mut s = Suite::new("specialty");
    for (i, patch) in c.patches.iter().enumerate() {
        s.push(r0.check_zero(format!("special.Gamma.{i}"), "special coordinates: I_i* Gamma_i = 0", &patch.coords.big_gamma));
        let b = basicify_connection(store, &p.connection, &patch.coords)?;
        s.push(r0.check_zero(format!("special.Omega_b.{i}"), "special paracocycle: I_i* Omega_bi = 0", &b.big_omega));
        s.push(store.check_zero(format!("special.Omega_bar.{i}"), "special paracocycle: Omega_bar_i = 0", &p.big_omega_bar[i]));
        if let Some(q) = q {
            let gb = basicify_gauge(store, &q.gauge, &patch.coords)?;
            s.push(r0.check_zero(format!("special.J_b.{i}"), "special paraequivalence: I_i* J_bi = 0", &gb.j));
            s.push(store.check_zero(format!("special.J_bar.{i}"), "special paraequivalence: J_bar_i = 0", &q.j_bar[i]));
        }
    }
    s.push(r0.check_zero("special.Omega", "special connection: I* Omega = 0", &p.connection.big_omega));
    for pr @ (i, _) in c.pairs() {
        let tag = tag2(pr);
        let m = c.matching(pr)?;
        s.push(r0.check_zero(format!("special.F_b.{tag}"), "special coordinates: I_ij* F_bij = 0", &m.big_f));
        let t = &p.t[&pr];
        let rel = twist(store, t, &p.omega_bar[i], &p.big_f_bar[&pr])?;
        s.push(r0.check_zero(
            format!("special.T.{tag}"),
            "zero-section constraint: Ad I*T_bij(F_bar_ij) - .mu(omega_bar_i, I*T_bij) - d I*T_bij I*T_bij^-1 = 0",
            &rel,
        ));
    }
    Ok(s)
}

#[cfg(test)]
mod tests;
