//! Lie algebras by structure constants, group-valued maps, and Lie group
//! crossed modules realized inside one ambient matrix group.
//!
//! Every shipped crossed module embeds both `G` and `E` in `GL(n)`. The action
//! `mu` is ambient conjugation, so the derived maps reduce to matrix formulas:
//! `mu_dot(a, Y) = a Y a^-1`, `.mu.(x, Y) = [x, Y]` and `.mu(x, A) = x - A x A^-1`.

use std::collections::HashMap;

use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{q, qf, Decomposer, QMat, RMat};
use crate::report::{Check, Suite, Witness};
use crate::superring::{GeneratorTable, RingCtx, Sym};
use crate::{Scalar, Q};

#[derive(Debug, Error)]
pub enum CmError {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("basis of {0} is linearly dependent")]
    DependentBasis(String),
    #[error("{0} is not closed under the bracket")]
    NotClosed(String),
    #[error("structure constants of {0} disagree with its representation")]
    StructureMismatch(String),
    #[error("cannot sample a group body along basis element {0}: neither nilpotent nor integer diagonal")]
    UnsupportedBasis(String),
    #[error("result is not valued in {0}")]
    NotAlgebraValued(String),
    #[error("target algebra mismatch: {0}")]
    TargetMismatch(String),
    #[error("derivation has no image for symbol {0}")]
    MissingImage(String),
    #[error("crossed-module axiom fails: {0}")]
    Axiom(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Which algebra (or group) of the crossed module an object lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Alg {
    G,
    E,
}

#[derive(Clone, Debug)]
pub struct LieAlgebraSpec {
    pub name: String,
    pub basis_names: Vec<String>,
    pub reps: Vec<QMat>,
    /// `structure[i][j][k] = c^k_{ij}` with `[T_i, T_j] = c^k_{ij} T_k`.
    pub structure: Vec<Vec<Vec<Q>>>,
    decomposer: Decomposer,
    n: usize,
}

impl LieAlgebraSpec {
    /// Structure constants read off the representation.
    pub fn from_reps(name: &str, names: Vec<String>, reps: Vec<QMat>, n: usize) -> Result<Self, CmError> {
        let decomposer =
            Decomposer::new(n, &reps).ok_or_else(|| CmError::DependentBasis(name.to_string()))?;
        let k = reps.len();
        let mut structure = vec![vec![Vec::new(); k]; k];
        for i in 0..k {
            for j in 0..k {
                let c = reps[i].commutator(&reps[j]);
                let coords = decomposer.coords_q(&c);
                if !combine_q(&coords, &reps, n).sub(&c).is_zero() {
                    return Err(CmError::NotClosed(name.to_string()));
                }
                structure[i][j] = coords;
            }
        }
        Ok(LieAlgebraSpec { name: name.into(), basis_names: names, reps, structure, decomposer, n })
    }

    /// Explicit structure constants, validated against the representation.
    pub fn with_structure(
        name: &str,
        names: Vec<String>,
        reps: Vec<QMat>,
        structure: Vec<Vec<Vec<Q>>>,
        n: usize,
    ) -> Result<Self, CmError> {
        let mut spec = Self::from_reps(name, names, reps, n)?;
        let k = spec.dim();
        if structure.len() != k || structure.iter().any(|r| r.len() != k || r.iter().any(|c| c.len() != k)) {
            return Err(CmError::Schema(format!("structure constants of {name} have the wrong shape")));
        }
        spec.structure = structure;
        if !spec.check_representation() {
            return Err(CmError::StructureMismatch(name.to_string()));
        }
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn check_antisymmetry(&self) -> bool {
        let k = self.dim();
        (0..k).all(|i| (0..k).all(|j| (0..k).all(|l| self.structure[i][j][l] == -self.structure[j][i][l].clone())))
    }

    /// Jacobi identity on the structure constants alone.
    pub fn check_jacobi(&self) -> bool {
        let k = self.dim();
        let c = &self.structure;
        #[allow(clippy::needless_range_loop)]
        for a in 0..k {
            for b in 0..k {
                for d in 0..k {
                    for m in 0..k {
                        let mut s = Q::zero();
                        for l in 0..k {
                            s += &c[b][d][l] * &c[a][l][m];
                            s += &c[d][a][l] * &c[b][l][m];
                            s += &c[a][b][l] * &c[d][l][m];
                        }
                        if !s.is_zero() {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    pub fn check_representation(&self) -> bool {
        let k = self.dim();
        (0..k).all(|i| {
            (0..k).all(|j| {
                combine_q(&self.structure[i][j], &self.reps, self.n) == self.reps[i].commutator(&self.reps[j])
            })
        })
    }

    pub fn to_matrix(&self, ctx: RingCtx, coeffs: &[Scalar]) -> RMat {
        RMat::combination(ctx, self.n, coeffs, &self.reps)
    }

    /// Coordinates of an ambient matrix, or `None` if it leaves the span.
    pub fn coords(&self, m: &RMat) -> Option<Vec<Scalar>> {
        let c = self.decomposer.coords(m);
        self.to_matrix(m.ctx(), &c).sub(m).is_zero().then_some(c)
    }

    pub fn coords_q(&self, m: &QMat) -> Option<Vec<Q>> {
        let c = self.decomposer.coords_q(m);
        (combine_q(&c, &self.reps, self.n) == *m).then_some(c)
    }

    pub fn contains(&self, m: &RMat) -> bool {
        self.coords(m).is_some()
    }
}

fn combine_q(c: &[Q], basis: &[QMat], n: usize) -> QMat {
    let mut out = QMat::zero(n);
    for (x, b) in c.iter().zip(basis) {
        if !x.is_zero() {
            out = out.add(&b.scale(x));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TauKind {
    Trivial,
    Inclusion,
}

/// Directions (coefficient vectors over the respective basis) from which the
/// cocycle layer draws subordinated paraequivalences and quasi-trivializer
/// tails. All of them must commute in the way the cocycle audit requires;
/// the audit itself is the check.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Sector {
    /// 𝔢 directions for quasi-trivializer seeds.
    pub p_dirs: Vec<Vec<Q>>,
    /// 𝔤 directions for the body and tail of the paraequivalence group part.
    pub g_dirs: Vec<Vec<Q>>,
    /// 𝔢 directions for the paraequivalence shift part.
    pub j_dirs: Vec<Vec<Q>>,
}

#[derive(Clone, Debug)]
pub struct CrossedModule {
    pub id: String,
    pub n: usize,
    pub g: LieAlgebraSpec,
    pub e: LieAlgebraSpec,
    pub tau: TauKind,
    /// `tau_dot[a][b]`: component along `T_a` of `tau_dot(E_b)`.
    pub tau_dot: Vec<Vec<Q>>,
    pub sector: Option<Sector>,
    tau_amb: Vec<(usize, usize, Q)>,
}

impl CrossedModule {
    pub fn new(
        id: &str,
        n: usize,
        g: LieAlgebraSpec,
        e: LieAlgebraSpec,
        tau: TauKind,
        tau_dot: Vec<Vec<Q>>,
        sector: Option<Sector>,
    ) -> Result<Self, CmError> {
        if g.ambient() != n || e.ambient() != n {
            return Err(CmError::Schema("algebra representations must live in the ambient size".into()));
        }
        if tau_dot.len() != g.dim() || tau_dot.iter().any(|r| r.len() != e.dim()) {
            return Err(CmError::Schema(format!(
                "tau_dot must be {} x {} (dim g x dim e)",
                g.dim(),
                e.dim()
            )));
        }
        let mut cm = CrossedModule { id: id.into(), n, g, e, tau, tau_dot, sector, tau_amb: Vec::new() };
        cm.rebuild_tau_amb();
        Ok(cm)
    }

    fn rebuild_tau_amb(&mut self) {
        // tau_dot(M) entry k = sum_b coord_b(M) * (sum_a tau_dot[a][b] T_a)[k]
        let n = self.n;
        let mut map: HashMap<(usize, usize), Q> = HashMap::new();
        for p in 0..n * n {
            let probe = QMat::unit(n, p / n, p % n);
            let coords = self.e.decomposer.coords_q(&probe);
            for (b, cb) in coords.iter().enumerate() {
                if cb.is_zero() {
                    continue;
                }
                for (a, row) in self.tau_dot.iter().enumerate() {
                    let t = &row[b];
                    if t.is_zero() {
                        continue;
                    }
                    for (k, x) in self.g.reps[a].data().iter().enumerate() {
                        if !x.is_zero() {
                            *map.entry((k, p)).or_insert_with(Q::zero) += cb * t * x;
                        }
                    }
                }
            }
        }
        let mut v: Vec<_> = map.into_iter().filter(|(_, c)| !c.is_zero()).map(|((k, p), c)| (k, p, c)).collect();
        v.sort_by_key(|a| (a.0, a.1));
        self.tau_amb = v;
    }

    pub fn alg(&self, a: Alg) -> &LieAlgebraSpec {
        match a {
            Alg::G => &self.g,
            Alg::E => &self.e,
        }
    }

    /// `tau_dot` on an ambient matrix assumed to lie in 𝔢.
    pub fn tau_dot_r(&self, m: &RMat) -> RMat {
        let n = self.n;
        let mut out = RMat::zero(m.ctx(), n);
        let src = m.entries();
        for (k, p, c) in &self.tau_amb {
            if src[*p].is_zero() {
                continue;
            }
            let cur = out.entries()[*k].clone();
            out.set(k / n, k % n, &cur + &src[*p].scale(c));
        }
        out
    }

    pub fn tau_dot_q(&self, m: &QMat) -> QMat {
        let n = self.n;
        let mut out = QMat::zero(n);
        for (k, p, c) in &self.tau_amb {
            out[(k / n, k % n)] += c * &m.data()[*p];
        }
        out
    }

    /// `tau` on an E-group element.
    pub fn tau_group_q(&self, a: &QMat) -> QMat {
        match self.tau {
            TauKind::Trivial => QMat::identity(self.n),
            TauKind::Inclusion => a.clone(),
        }
    }

    pub fn tau_group_r(&self, a: &RMat) -> RMat {
        match self.tau {
            TauKind::Trivial => RMat::identity(a.ctx(), self.n),
            TauKind::Inclusion => a.clone(),
        }
    }

    /// Negative-control fixture: flip the sign of the last nonzero `tau_dot` entry.
    pub fn with_corrupted_tau_dot(&self) -> CrossedModule {
        let mut cm = self.clone();
        'outer: for a in (0..cm.g.dim()).rev() {
            for b in (0..cm.e.dim()).rev() {
                if !cm.tau_dot[a][b].is_zero() {
                    cm.tau_dot[a][b] = -cm.tau_dot[a][b].clone();
                    break 'outer;
                }
            }
        }
        cm.id = format!("{}-corrupted-tau-dot", self.id);
        cm.rebuild_tau_amb();
        cm
    }

    /// Random body: one factor per basis element, `exp(r T)` for nilpotent `T`
    /// and `lambda^T` for integer diagonal `T`.
    pub fn sample_body(&self, a: Alg, rng: &mut ChaCha8Rng) -> Result<QMat, CmError> {
        let dirs: Vec<usize> = (0..self.alg(a).dim()).collect();
        self.sample_body_along(a, &dirs, rng)
    }

    pub fn sample_body_along(&self, a: Alg, dirs: &[usize], rng: &mut ChaCha8Rng) -> Result<QMat, CmError> {
        let spec = self.alg(a);
        let mats: Vec<(String, QMat)> = dirs.iter().map(|&i| (spec.basis_names[i].clone(), spec.reps[i].clone())).collect();
        sample_body_dirs(&mats, self.n, rng)
    }

    /// Check that every basis element supports body sampling.
    pub fn validate_sampling(&self) -> Result<(), CmError> {
        for spec in [&self.g, &self.e] {
            for (i, t) in spec.reps.iter().enumerate() {
                if !t.is_nilpotent() && t.integer_diagonal().is_none() {
                    return Err(CmError::UnsupportedBasis(spec.basis_names[i].clone()));
                }
            }
        }
        Ok(())
    }
}

/// Product of one random factor per direction: `exp(r T)` for nilpotent `T`,
/// `lambda^T` for integer diagonal `T`.
pub fn sample_body_dirs(dirs: &[(String, QMat)], n: usize, rng: &mut ChaCha8Rng) -> Result<QMat, CmError> {
    let mut out = QMat::identity(n);
    for (name, t) in dirs {
        let f = if t.is_nilpotent() {
            t.scale(&random_rational(rng)).exp_nilpotent().expect("nilpotent")
        } else if let Some(diag) = t.integer_diagonal() {
            let lam = random_nonzero_rational(rng);
            let mut m = QMat::identity(n);
            for (k, e) in diag.iter().enumerate() {
                m[(k, k)] = pow_q(&lam, *e);
            }
            m
        } else {
            return Err(CmError::UnsupportedBasis(name.clone()));
        };
        out = out.mul(&f);
    }
    Ok(out)
}

fn pow_q(x: &Q, e: i64) -> Q {
    let mut r = Q::one();
    let b = if e < 0 { x.recip() } else { x.clone() };
    for _ in 0..e.unsigned_abs() {
        r *= &b;
    }
    r
}

pub fn random_rational(rng: &mut ChaCha8Rng) -> Q {
    let n: i64 = rng.gen_range(-4..=4);
    let d: i64 = rng.gen_range(1..=3);
    qf(n, d)
}

pub fn random_nonzero_rational(rng: &mut ChaCha8Rng) -> Q {
    loop {
        let r = random_rational(rng);
        if !r.is_zero() {
            return r;
        }
    }
}

/// Lie-algebra-valued graded element as a coefficient vector.
#[derive(Clone, Debug, PartialEq)]
pub struct LieValuedForm {
    pub target: Alg,
    pub degree: u32,
    pub coeffs: Vec<Scalar>,
}

impl LieValuedForm {
    pub fn new(target: Alg, degree: u32, coeffs: Vec<Scalar>) -> Result<Self, CmError> {
        for c in &coeffs {
            if !c.is_zero() && c.homogeneous_degree() != Some(degree) {
                return Err(CmError::Schema(format!("coefficient {c:?} is not homogeneous of degree {degree}")));
            }
        }
        Ok(LieValuedForm { target, degree, coeffs })
    }

    pub fn zero(cm: &CrossedModule, target: Alg, degree: u32, ctx: RingCtx) -> Self {
        LieValuedForm { target, degree, coeffs: vec![Scalar::zero(ctx); cm.alg(target).dim()] }
    }

    pub fn to_matrix(&self, cm: &CrossedModule, ctx: RingCtx) -> RMat {
        cm.alg(self.target).to_matrix(ctx, &self.coeffs)
    }

    pub fn from_matrix(cm: &CrossedModule, target: Alg, degree: u32, m: &RMat) -> Result<Self, CmError> {
        let coeffs = cm
            .alg(target)
            .coords(m)
            .ok_or_else(|| CmError::NotAlgebraValued(cm.alg(target).name.clone()))?;
        Ok(LieValuedForm { target, degree, coeffs })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    fn ctx(&self) -> RingCtx {
        self.coeffs.first().map(|c| c.ctx()).unwrap_or(RingCtx::FREE)
    }
}

/// Graded bracket by structure-constant contraction.
pub fn bracket(cm: &CrossedModule, a: &LieValuedForm, b: &LieValuedForm) -> Result<LieValuedForm, CmError> {
    if a.target != b.target {
        return Err(CmError::TargetMismatch(format!("{:?} vs {:?}", a.target, b.target)));
    }
    let spec = cm.alg(a.target);
    let k = spec.dim();
    let ctx = a.ctx().join(b.ctx()).map_err(|e| CmError::Schema(e.to_string()))?;
    let mut out = vec![Scalar::zero(ctx); k];
    for i in 0..k {
        if a.coeffs[i].is_zero() {
            continue;
        }
        for j in 0..k {
            if b.coeffs[j].is_zero() {
                continue;
            }
            let p = &a.coeffs[i] * &b.coeffs[j];
            for (l, c) in spec.structure[i][j].iter().enumerate() {
                if !c.is_zero() {
                    out[l] = &out[l] + &p.scale(c);
                }
            }
        }
    }
    Ok(LieValuedForm { target: a.target, degree: a.degree + b.degree, coeffs: out })
}

/// Graded commutator of homogeneous ring matrices.
pub fn graded_commutator(a: &RMat, b: &RMat) -> RMat {
    let sign_odd = a.parity().unwrap_or(false) && b.parity().unwrap_or(false);
    let ab = a.mul(b);
    let ba = b.mul(a);
    if sign_odd {
        ab.add(&ba)
    } else {
        ab.sub(&ba)
    }
}

/// The map `.mu.(x, Y)`: infinitesimal action of 𝔤 on 𝔢.
pub fn act_alg(cm: &CrossedModule, x: &LieValuedForm, y: &LieValuedForm) -> Result<LieValuedForm, CmError> {
    if x.target != Alg::G || y.target != Alg::E {
        return Err(CmError::TargetMismatch("act_alg expects (g, e)".into()));
    }
    let ctx = x.ctx().join(y.ctx()).map_err(|e| CmError::Schema(e.to_string()))?;
    let m = graded_commutator(&x.to_matrix(cm, ctx), &y.to_matrix(cm, ctx));
    LieValuedForm::from_matrix(cm, Alg::E, x.degree + y.degree, &m)
}

/// Graded-group-valued map `body * exp(tail)` with nilpotent tail.
#[derive(Clone, Debug)]
pub struct GroupValuedMap {
    pub group: Alg,
    pub body: QMat,
    pub tail: RMat,
}

impl GroupValuedMap {
    pub fn constant(group: Alg, body: QMat, ctx: RingCtx) -> Self {
        let n = body.n();
        GroupValuedMap { group, body, tail: RMat::zero(ctx, n) }
    }

    pub fn value(&self) -> RMat {
        self.tail.exp_nilpotent().mul_q_left(&self.body)
    }

    /// `exp(-t) b^-1 = b^-1 exp(-b t b^-1)`.
    pub fn inverse(&self) -> GroupValuedMap {
        let bi = self.body.inverse().expect("group body is invertible");
        GroupValuedMap { group: self.group, tail: self.tail.neg().mul_q_left(&self.body).mul_q_right(&bi), body: bi }
    }

    pub fn inverse_value(&self) -> RMat {
        self.tail.neg().exp_nilpotent().mul_q_right(&self.body.inverse().expect("group body is invertible"))
    }
}

/// `Ad P (a)`: conjugation of a Lie-valued form by a group-valued map.
pub fn ad(cm: &CrossedModule, p: &GroupValuedMap, a: &LieValuedForm) -> Result<LieValuedForm, CmError> {
    match (p.group, a.target) {
        (Alg::G, _) | (Alg::E, Alg::E) => {}
        (Alg::E, Alg::G) => {
            return Err(CmError::TargetMismatch("an E-valued map does not act on g".into()));
        }
    }
    let ctx = a.ctx().join(p.tail.ctx()).map_err(|e| CmError::Schema(e.to_string()))?;
    let m = p.value().mul(&a.to_matrix(cm, ctx)).mul(&p.inverse_value());
    LieValuedForm::from_matrix(cm, a.target, a.degree, &m)
}

/// Scalar-level derivation given by symbol images.
pub trait ScalarDerivation {
    fn is_odd(&self) -> bool;
    fn degree(&self) -> i32;
    fn image(&self, s: Sym) -> Option<Scalar>;
}

/// Derivation prescribed on finitely many symbols; others must not occur.
pub struct SymbolDerivation<'a> {
    pub images: HashMap<Sym, Scalar>,
    pub degree: i32,
    pub table: &'a GeneratorTable,
}

impl ScalarDerivation for SymbolDerivation<'_> {
    fn is_odd(&self) -> bool {
        self.degree.rem_euclid(2) == 1
    }
    fn degree(&self) -> i32 {
        self.degree
    }
    fn image(&self, s: Sym) -> Option<Scalar> {
        self.images.get(&s).cloned()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// `D(P) P^-1`
    Right,
    /// `P^-1 D(P)`
    Left,
}

/// Maurer-Cartan form of `P` along a derivation, certified algebra-valued.
pub fn maurer(
    cm: &CrossedModule,
    d: &SymbolDerivation<'_>,
    p: &GroupValuedMap,
    orientation: Orientation,
) -> Result<LieValuedForm, CmError> {
    for e in p.tail.entries() {
        for (m, _) in e.terms() {
            for s in m.syms() {
                if !d.images.contains_key(s) {
                    return Err(CmError::MissingImage(d.table.name(*s).to_string()));
                }
            }
        }
    }
    let v = p.value();
    let dv = v.map(|x| x.derive_with(d.is_odd(), |s| d.image(s)));
    let m = match orientation {
        Orientation::Right => dv.mul(&p.inverse_value()),
        Orientation::Left => p.inverse_value().mul(&dv),
    };
    let deg = d.degree().max(0) as u32;
    LieValuedForm::from_matrix(cm, p.group, deg, &m)
}

fn push_bool(s: &mut Suite, id: &str, anchor: &str, ok: bool) {
    s.push(if ok { Check::pass(id, anchor) } else { Check::fail(id, anchor, "identity violated") });
}

fn push_zero(s: &mut Suite, id: &str, anchor: &str, m: &RMat, sample: usize, t: &GeneratorTable) {
    s.push(Check::from_witness(id, anchor, Witness::from_residual(m, sample, Some(t))));
}

/// Axiom report for a crossed module; group-level axioms use `samples`
/// random elements with numeric body and symbolic tail.
pub fn check_crossed_module(cm: &CrossedModule, samples: usize, seed: u64) -> Suite {
    let mut s = Suite::new("crossed-module");
    for spec in [&cm.g, &cm.e] {
        let nm = &spec.name;
        push_bool(&mut s, &format!("{nm}.antisymmetry"), "Lie algebra: antisymmetric structure constants", spec.check_antisymmetry());
        push_bool(&mut s, &format!("{nm}.jacobi"), "Lie algebra: Jacobi identity", spec.check_jacobi());
        push_bool(&mut s, &format!("{nm}.representation"), "Lie algebra: matrices represent the bracket", spec.check_representation());
    }
    let n = cm.n;
    // tau_dot consistent with tau and a Lie morphism
    let mut ok = true;
    for (b, eb) in cm.e.reps.iter().enumerate() {
        let want = match cm.tau {
            TauKind::Trivial => QMat::zero(n),
            TauKind::Inclusion => eb.clone(),
        };
        ok &= cm.tau_dot_q(eb) == want;
        for ec in &cm.e.reps[b..] {
            ok &= cm.tau_dot_q(&eb.commutator(ec)) == cm.tau_dot_q(eb).commutator(&cm.tau_dot_q(ec));
        }
    }
    push_bool(&mut s, "tau_dot.derivative_of_tau", "tau_dot is the differential of tau", ok);
    // infinitesimal axioms on basis pairs
    let mut eq = true;
    let mut pf = true;
    let mut closed = true;
    for x in &cm.g.reps {
        for y in &cm.e.reps {
            let xy = x.commutator(y);
            closed &= cm.e.coords_q(&xy).is_some();
            eq &= cm.tau_dot_q(&xy) == x.commutator(&cm.tau_dot_q(y));
        }
    }
    for y in &cm.e.reps {
        for z in &cm.e.reps {
            pf &= cm.tau_dot_q(y).commutator(z) == y.commutator(z);
        }
    }
    push_bool(&mut s, "act_alg.closed", "g acts on e", closed);
    push_bool(&mut s, "infinitesimal.equivariance", "tau_dot(.mu.(x,X)) = [x, tau_dot(X)]", eq);
    push_bool(&mut s, "infinitesimal.peiffer", ".mu.(tau_dot(X),Y) = [X,Y]", pf);

    // group level with symbolic tails
    let mut table = GeneratorTable::new();
    let w: Vec<Sym> = (0..3).map(|i| table.fresh(format!("w{i}"), 2).unwrap()).collect();
    let t = table.fresh("t", 4).unwrap();
    let ctx = table.ctx(6);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rand_tail = |alg: Alg, rng: &mut ChaCha8Rng| -> RMat {
        let spec = cm.alg(alg);
        let coeffs: Vec<Scalar> = (0..spec.dim())
            .map(|_| Scalar::symbol(ctx, w[rng.gen_range(0..w.len())]).scale(&random_rational(rng)))
            .collect();
        spec.to_matrix(ctx, &coeffs)
    };
    let ts = Scalar::symbol(ctx, t);
    for k in 0..samples {
        let a = match cm.sample_body(Alg::G, &mut rng) {
            Ok(a) => GroupValuedMap { group: Alg::G, body: a, tail: rand_tail(Alg::G, &mut rng) },
            Err(e) => {
                s.push(Check::fail("sampling", "group bodies can be sampled", e.to_string()));
                return s;
            }
        };
        let bb = match cm.sample_body(Alg::E, &mut rng) {
            Ok(b) => b,
            Err(e) => {
                s.push(Check::fail("sampling", "group bodies can be sampled", e.to_string()));
                return s;
            }
        };
        let big_a = GroupValuedMap { group: Alg::E, body: bb, tail: rand_tail(Alg::E, &mut rng) };
        let big_b = GroupValuedMap {
            group: Alg::E,
            body: cm.sample_body(Alg::E, &mut rng).unwrap(),
            tail: rand_tail(Alg::E, &mut rng),
        };
        let (av, ai) = (a.value(), a.inverse_value());
        let (bv, bi) = (big_a.value(), big_a.inverse_value());
        let mu = |g: &RMat, gi: &RMat, e: &RMat| g.mul(e).mul(gi);
        // equivariance: tau(mu(a,A)) = a tau(A) a^-1
        let lhs = cm.tau_group_r(&mu(&av, &ai, &bv));
        let rhs = mu(&av, &ai, &cm.tau_group_r(&bv));
        push_zero(&mut s, &format!("equivariance.{k}"), "tau(mu(a,A)) = a tau(A) a^-1", &lhs.sub(&rhs), k, &table);
        // Peiffer: mu(tau(A), B) = A B A^-1
        let tb = cm.tau_group_r(&bv);
        let tbi = cm.tau_group_r(&bi);
        let b2 = big_b.value();
        let lhs = mu(&tb, &tbi, &b2);
        let rhs = mu(&bv, &bi, &b2);
        push_zero(&mut s, &format!("peiffer.{k}"), "mu(tau(A),B) = A B A^-1", &lhs.sub(&rhs), k, &table);
        // membership: mu(a, A) stays in E (its log lies in e when unipotent)
        // mu_dot(a, .) is an automorphism of e
        let mut aut = RMat::zero(ctx, n);
        for y in &cm.e.reps {
            for z in &cm.e.reps {
                let (yr, zr) = (y.to_ring(ctx), z.to_ring(ctx));
                let l = mu(&av, &ai, &yr.mul(&zr).sub(&zr.mul(&yr)));
                let (ya, za) = (mu(&av, &ai, &yr), mu(&av, &ai, &zr));
                aut = aut.add(&l.sub(&ya.mul(&za).sub(&za.mul(&ya))));
                if !cm.e.contains(&ya) {
                    aut = aut.add(&ya);
                }
            }
        }
        push_zero(&mut s, &format!("mu_dot.automorphism.{k}"), "mu_dot(a,-) is an automorphism of e", &aut, k, &table);
        // .mu(x, A) = x - A x A^-1 is e-valued and linearizes mu in the group slot
        let mut dm = RMat::zero(ctx, n);
        for x in &cm.g.reps {
            let xr = x.to_ring(ctx);
            let dotmu = xr.sub(&mu(&bv, &bi, &xr));
            if !cm.e.contains(&dotmu) {
                dm = dm.add(&dotmu);
            }
            // mu(exp(t x), A) A^-1 = 1 + t .mu(x, A) mod t^2
            let ex = xr.lmul_scalar(&ts);
            let exi = ex.neg();
            let one = RMat::identity(ctx, n);
            let lhs = mu(&one.add(&ex), &one.add(&exi), &bv).mul(&bi);
            dm = dm.add(&lhs.sub(&one.add(&dotmu.lmul_scalar(&ts))));
            // .mu(x, exp(t Y)) = t .mu.(x, Y) mod t^2
            for y in &cm.e.reps {
                let ey = one.add(&y.to_ring(ctx).lmul_scalar(&ts));
                let eyi = one.sub(&y.to_ring(ctx).lmul_scalar(&ts));
                let lhs = xr.sub(&mu(&ey, &eyi, &xr));
                let rhs = x.commutator(y).to_ring(ctx).lmul_scalar(&ts);
                dm = dm.add(&lhs.sub(&rhs));
            }
        }
        push_zero(&mut s, &format!("dot_mu.linearization.{k}"), ".mu(x,A) is the derivative of a -> mu(a,A)A^-1", &dm, k, &table);
        // tau_dot and mu_dot as first-order parts of tau and mu
        let mut lin = RMat::zero(ctx, n);
        for y in &cm.e.reps {
            let one = RMat::identity(ctx, n);
            let ty = y.to_ring(ctx).lmul_scalar(&ts);
            let e1 = one.add(&ty);
            let e1i = one.sub(&ty);
            lin = lin.add(&cm.tau_group_r(&e1).sub(&one.add(&cm.tau_dot_r(&ty))));
            let l = mu(&av, &ai, &e1).sub(&one.add(&mu(&av, &ai, &ty)));
            lin = lin.add(&l);
            let _ = e1i;
        }
        push_zero(&mut s, &format!("linearization.{k}"), "tau_dot and mu_dot linearize tau and mu", &lin, k, &table);
    }
    let _ = q(0);
    s
}

pub mod instances;

#[cfg(test)]
mod tests {
    use super::instances::*;
    use super::*;

    #[test]
    fn shipped_instances_pass_axioms() {
        for cm in all() {
            let s = check_crossed_module(&cm, 3, 11);
            assert!(s.passed(), "{}: {:?}", cm.id, s.failures().collect::<Vec<_>>());
        }
    }

    #[test]
    fn corrupted_tau_dot_breaks_equivariance() {
        let cm = cm_c().with_corrupted_tau_dot();
        let s = check_crossed_module(&cm, 1, 3);
        assert!(!s.find("infinitesimal.equivariance").unwrap().passed);
    }

    #[test]
    fn structure_constants_match_ambient_bracket() {
        let cm = cm_h();
        let mut t = GeneratorTable::new();
        let a = t.fresh("a", 1).unwrap();
        let b = t.fresh("b", 1).unwrap();
        let ctx = t.ctx(6);
        let x = LieValuedForm::new(Alg::G, 1, (0..4).map(|i| Scalar::symbol(ctx, a).scale(&q(i + 1))).collect()).unwrap();
        let y = LieValuedForm::new(Alg::G, 1, (0..4).map(|i| Scalar::symbol(ctx, b).scale(&q(2 - i))).collect()).unwrap();
        let br = bracket(&cm, &x, &y).unwrap();
        let amb = graded_commutator(&x.to_matrix(&cm, ctx), &y.to_matrix(&cm, ctx));
        assert_eq!(br.to_matrix(&cm, ctx), amb);
        // graded antisymmetry for odd elements: [x,y] = [y,x]
        assert_eq!(bracket(&cm, &y, &x).unwrap(), br);
    }

    #[test]
    fn bracket_target_mismatch() {
        let cm = cm_c();
        let ctx = RingCtx::FREE;
        let x = LieValuedForm::zero(&cm, Alg::G, 0, ctx);
        let y = LieValuedForm::zero(&cm, Alg::E, 0, ctx);
        assert!(matches!(bracket(&cm, &x, &y), Err(CmError::TargetMismatch(_))));
    }

    #[test]
    fn vector_action_is_matrix_action() {
        // CM-A: .mu.(x, Y) = rho(x) Y with rho the 2x2 block
        let cm = cm_a();
        let mut t = GeneratorTable::new();
        let s = t.fresh("s", 2).unwrap();
        let ctx = t.ctx(6);
        let sc = Scalar::symbol(ctx, s);
        for (i, x) in cm.g.reps.iter().enumerate() {
            for (j, _) in cm.e.reps.iter().enumerate() {
                let mut xc = vec![Scalar::zero(ctx); cm.g.dim()];
                xc[i] = Scalar::one(ctx);
                let mut yc = vec![Scalar::zero(ctx); cm.e.dim()];
                yc[j] = sc.clone();
                let xf = LieValuedForm::new(Alg::G, 0, xc).unwrap();
                let yf = LieValuedForm::new(Alg::E, 2, yc).unwrap();
                let got = act_alg(&cm, &xf, &yf).unwrap();
                // rho(x) acting on the unit vector e_j
                let want: Vec<Scalar> = (0..2).map(|r| sc.scale(&x[(r, j)])).collect();
                assert_eq!(got.coeffs, want);
            }
        }
    }

    #[test]
    fn ad_is_automorphism_and_homomorphism() {
        let cm = cm_c();
        let mut t = GeneratorTable::new();
        let a = t.fresh("a", 1).unwrap();
        let b = t.fresh("b", 1).unwrap();
        let w = t.fresh("w", 2).unwrap();
        let ctx = t.ctx(6);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mk = |s: Sym, k: i64| {
            LieValuedForm::new(Alg::G, 1, (0..3).map(|i| Scalar::symbol(ctx, s).scale(&q(k + i))).collect()).unwrap()
        };
        let (x, y) = (mk(a, 1), mk(b, -1));
        let tail = cm.g.to_matrix(ctx, &[Scalar::zero(ctx), Scalar::symbol(ctx, w), Scalar::symbol(ctx, w)]);
        let p = GroupValuedMap { group: Alg::G, body: cm.sample_body(Alg::G, &mut rng).unwrap(), tail };
        let p2 = GroupValuedMap { group: Alg::G, body: cm.sample_body(Alg::G, &mut rng).unwrap(), tail: RMat::zero(ctx, 2) };
        let lhs = ad(&cm, &p, &bracket(&cm, &x, &y).unwrap()).unwrap();
        let rhs = bracket(&cm, &ad(&cm, &p, &x).unwrap(), &ad(&cm, &p, &y).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
        let pq = GroupValuedMap { group: Alg::G, body: p2.body.clone(), tail: RMat::zero(ctx, 2) };
        let both = GroupValuedMap { group: Alg::G, body: p.body.mul(&pq.body), tail: RMat::zero(ctx, 2) };
        let p0 = GroupValuedMap { group: Alg::G, body: p.body.clone(), tail: RMat::zero(ctx, 2) };
        assert_eq!(ad(&cm, &both, &x).unwrap(), ad(&cm, &p0, &ad(&cm, &pq, &x).unwrap()).unwrap());
        let id = GroupValuedMap::constant(Alg::G, QMat::identity(2), ctx);
        assert_eq!(ad(&cm, &id, &x).unwrap(), x);
        let cma = cm_a();
        let ea = GroupValuedMap::constant(Alg::E, QMat::identity(3), ctx);
        let xa = LieValuedForm::zero(&cma, Alg::G, 1, ctx);
        assert!(matches!(ad(&cma, &ea, &xa), Err(CmError::TargetMismatch(_))));
    }

    #[test]
    fn maurer_examples() {
        let cm = cm_c();
        let mut t = GeneratorTable::new();
        let th = t.fresh("theta", 2).unwrap();
        let w = t.fresh("w", 3).unwrap();
        let ctx = t.ctx(6);
        let mut images = HashMap::new();
        images.insert(th, Scalar::symbol(ctx, w));
        let d = SymbolDerivation { images, degree: 1, table: &t };
        // constant map
        let c = GroupValuedMap::constant(Alg::G, QMat::identity(2), ctx);
        assert!(maurer(&cm, &d, &c, Orientation::Right).unwrap().is_zero());
        // exp(theta e1) with e1 = N: d P P^-1 = w N
        let coeffs = vec![Scalar::zero(ctx), Scalar::zero(ctx), Scalar::symbol(ctx, th)];
        let p = GroupValuedMap { group: Alg::G, body: QMat::identity(2), tail: cm.g.to_matrix(ctx, &coeffs) };
        let m = maurer(&cm, &d, &p, Orientation::Right).unwrap();
        assert_eq!(m.coeffs[2], Scalar::symbol(ctx, w));
        assert!(m.coeffs[0].is_zero() && m.coeffs[1].is_zero());
        // orientation identity P^-1 D P = Ad(P^-1)(D P P^-1)
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let coeffs = vec![Scalar::symbol(ctx, th), Scalar::symbol(ctx, th).scale(&q(2)), Scalar::symbol(ctx, th)];
        let p = GroupValuedMap {
            group: Alg::G,
            body: cm.sample_body(Alg::G, &mut rng).unwrap(),
            tail: cm.g.to_matrix(ctx, &coeffs),
        };
        let left = maurer(&cm, &d, &p, Orientation::Left).unwrap();
        let right = maurer(&cm, &d, &p, Orientation::Right).unwrap();
        let pinv = p.inverse();
        assert_eq!(pinv.value(), p.inverse_value());
        assert_eq!(left, ad(&cm, &pinv, &right).unwrap());
        // a symbol without an image is rejected
        let d2 = SymbolDerivation { images: HashMap::new(), degree: 1, table: &t };
        assert!(matches!(maurer(&cm, &d2, &p, Orientation::Right), Err(CmError::MissingImage(_))));
    }

    #[test]
    fn conjugation_instance_act_alg_is_bracket() {
        let cm = cm_c();
        let ctx = RingCtx::FREE;
        for i in 0..3 {
            for j in 0..3 {
                let mut xc = vec![Scalar::zero(ctx); 3];
                xc[i] = Scalar::one(ctx);
                let mut yc = vec![Scalar::zero(ctx); 3];
                yc[j] = Scalar::one(ctx);
                let x = LieValuedForm::new(Alg::G, 0, xc.clone()).unwrap();
                let y = LieValuedForm::new(Alg::E, 0, yc.clone()).unwrap();
                let yg = LieValuedForm::new(Alg::G, 0, yc).unwrap();
                assert_eq!(act_alg(&cm, &x, &y).unwrap().coeffs, bracket(&cm, &x, &yg).unwrap().coeffs);
            }
        }
        let zero = LieValuedForm::zero(&cm, Alg::G, 0, ctx);
        let y = LieValuedForm::new(Alg::E, 0, vec![Scalar::one(ctx); 3]).unwrap();
        assert!(act_alg(&cm, &zero, &y).unwrap().is_zero());
    }
}
