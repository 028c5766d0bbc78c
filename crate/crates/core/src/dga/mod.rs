//! The operation: a store of generators with images under `d`, `j_Z`, `l_Z`,
//! Leibniz evaluation over expression trees, the six Cartan relations, and
//! restriction to a killed ideal.
//!
//! Derivation indices are generic: `Z = (x, X)` with `x = xi^a T_a` and
//! `X = Xi^b E_b`, where `xi` are even and `Xi` odd parameter symbols of the
//! ring annihilated by every derivation. An identity in the parameters holds
//! for every basis pair at once.

mod adapted;
mod expr;

use std::cell::RefCell;
use std::collections::{HashMap, HashSet};
use std::rc::Rc;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use adapted::{register_adapted, register_adapted_with_bodies, register_base, AdaptedCoordinates, Base};
pub use expr::{Expr, FieldId, GExpr, GroupId, LeafId, Node};

use crate::liecm::{Alg, CmError, CrossedModule, Orientation};
use crate::matrix::{QMat, RMat};
use crate::report::{Check, Suite, Witness};
use crate::superring::{GeneratorTable, RingCtx, RingError, Sym};
use crate::tamper::Tamper;
use crate::Scalar;

pub const DEFAULT_TRUNCATION: u16 = 6;

#[derive(Debug, Error)]
pub enum DgaError {
    #[error("leaf {0} has no registered images")]
    Unregistered(String),
    #[error("expression contains a leaf registered in another store")]
    ForeignLeaf,
    #[error("kill set is not closed: the {kind} image of {name} survives the restriction")]
    NotClosed { name: String, kind: String },
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Cm(#[from] CmError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    D,
    J,
    L,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::D => "d",
            Kind::J => "j",
            Kind::L => "l",
        }
    }
}

/// Parameterized element `Z = (x, X)` of the derived algebra.
#[derive(Clone, Debug)]
pub struct ZPar {
    pub x: RMat,
    pub xs: RMat,
}

impl ZPar {
    /// `([x,y], [x,Y] - [y,X])`.
    pub fn bracket(&self, w: &ZPar) -> ZPar {
        let c = |a: &RMat, b: &RMat| a.mul(b).sub(&b.mul(a));
        ZPar { x: c(&self.x, &w.x), xs: c(&self.x, &w.xs).sub(&c(&w.x, &self.xs)) }
    }
}

#[derive(Clone, Debug)]
pub struct Deriv {
    pub kind: Kind,
    pub z: ZPar,
}

impl Deriv {
    pub fn is_odd(&self) -> bool {
        self.kind != Kind::L
    }

    pub fn x(&self) -> Expr {
        Expr::ring(self.z.x.clone())
    }

    pub fn xs(&self) -> Expr {
        Expr::ring(self.z.xs.clone())
    }
}

pub type ImageFn = Rc<dyn Fn(&Deriv) -> Expr>;

/// Images of a generator. For group leaves these are Maurer-Cartan forms
/// (`D(g) g^-1` or `g^-1 D(g)` per orientation).
#[derive(Clone)]
pub struct Images {
    pub d: Expr,
    pub j: ImageFn,
    pub l: ImageFn,
}

impl Images {
    pub fn new(d: Expr, j: impl Fn(&Deriv) -> Expr + 'static, l: impl Fn(&Deriv) -> Expr + 'static) -> Images {
        Images { d, j: Rc::new(j), l: Rc::new(l) }
    }

    pub fn get(&self, d: &Deriv) -> Expr {
        match d.kind {
            Kind::D => self.d.clone(),
            Kind::J => (self.j)(d),
            Kind::L => (self.l)(d),
        }
    }
}

#[derive(Clone)]
pub struct FieldInfo {
    pub name: String,
    pub alg: Alg,
    pub degree: u32,
    pub syms: Vec<Sym>,
    pub val: RMat,
    images: Option<Images>,
}

#[derive(Clone)]
pub struct GroupInfo {
    pub name: String,
    pub alg: Alg,
    pub orientation: Orientation,
    pub bodies: Vec<QMat>,
    images: Option<Images>,
}

type SharedValues = HashMap<(*const expr::Inner, usize), (Expr, RMat)>;

#[derive(Clone)]
pub struct FieldStore {
    uid: u64,
    pub cm: Rc<CrossedModule>,
    pub table: GeneratorTable,
    pub trunc: u16,
    pub samples: usize,
    pub seed: u64,
    pub tamper: Option<Tamper>,
    rng: ChaCha8Rng,
    fields: Vec<FieldInfo>,
    groups: Vec<GroupInfo>,
    ring_d: HashMap<Sym, Scalar>,
    ring_gens: Vec<Sym>,
    z: ZPar,
    w: ZPar,
    shift_params: Vec<Sym>,
    kill: HashSet<Sym>,
    killed_fields: HashSet<FieldId>,
    // Values of shared interior nodes across `eval` calls. The entry keeps its
    // node alive, so the pointer key cannot be reused while cached.
    shared: RefCell<SharedValues>,
}

static NEXT_STORE: AtomicU64 = AtomicU64::new(1);

impl FieldStore {
    pub fn new(cm: CrossedModule, trunc: u16, samples: usize, seed: u64) -> Result<FieldStore, DgaError> {
        Self::with_cm(Rc::new(cm), trunc, samples, seed)
    }

    pub fn with_cm(cm: Rc<CrossedModule>, trunc: u16, samples: usize, seed: u64) -> Result<FieldStore, DgaError> {
        let mut table = GeneratorTable::new();
        let ctx = table.ctx(trunc);
        let mut shift_params = Vec::new();
        let mut par = |table: &mut GeneratorTable, even: &str, odd: &str| -> Result<ZPar, DgaError> {
            let xs: Vec<Scalar> = (0..cm.g.dim())
                .map(|a| table.fresh(format!("{even}{a}"), 0).map(|s| Scalar::symbol(ctx, s)))
                .collect::<Result<_, _>>()?;
            let mut xss = Vec::new();
            for b in 0..cm.e.dim() {
                let s = table.fresh(format!("{odd}{b}"), 1)?;
                shift_params.push(s);
                xss.push(Scalar::symbol(ctx, s));
            }
            Ok(ZPar { x: cm.g.to_matrix(ctx, &xs), xs: cm.e.to_matrix(ctx, &xss) })
        };
        let z = par(&mut table, "xi", "Xi")?;
        let w = par(&mut table, "eta", "Eta")?;
        Ok(FieldStore {
            uid: NEXT_STORE.fetch_add(1, Ordering::Relaxed),
            cm,
            table,
            trunc,
            samples,
            seed,
            tamper: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
            fields: Vec::new(),
            groups: Vec::new(),
            ring_d: HashMap::new(),
            ring_gens: Vec::new(),
            z,
            w,
            shift_params,
            kill: HashSet::new(),
            killed_fields: HashSet::new(),
            shared: RefCell::default(),
        })
    }

    fn leaf(&self, idx: usize) -> LeafId {
        LeafId { store: self.uid, idx }
    }

    /// Whether every leaf of `e` was registered here (restrictions share leaves).
    pub fn owns(&self, e: &Expr) -> bool {
        match e.node() {
            Node::Zero | Node::Ident | Node::Ring(_) => true,
            Node::Field(id) | Node::Group { id, .. } => id.store == self.uid,
            Node::Add(v) | Node::Prod(v) => v.iter().all(|t| self.owns(t)),
            Node::Scale(_, x) | Node::Tau(x) => self.owns(x),
        }
    }

    pub fn ctx(&self) -> RingCtx {
        self.table.ctx(self.trunc)
    }

    pub fn n(&self) -> usize {
        self.cm.n
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn z(&self) -> ZPar {
        self.z.clone()
    }

    pub fn w(&self) -> ZPar {
        self.w.clone()
    }

    pub fn d(&self) -> Deriv {
        let zero = RMat::zero(self.ctx(), self.n());
        Deriv { kind: Kind::D, z: ZPar { x: zero.clone(), xs: zero } }
    }

    pub fn j(&self, z: &ZPar) -> Deriv {
        Deriv { kind: Kind::J, z: z.clone() }
    }

    pub fn l(&self, z: &ZPar) -> Deriv {
        Deriv { kind: Kind::L, z: z.clone() }
    }

    /// New Lie-valued generator with one fresh coefficient symbol per basis element.
    pub fn add_field(&mut self, name: &str, alg: Alg, degree: u32) -> Result<Expr, DgaError> {
        let ctx = self.ctx();
        let dim = self.cm.alg(alg).dim();
        let mut syms = Vec::with_capacity(dim);
        for a in 0..dim {
            let nm = format!("{name}.{}", self.cm.alg(alg).basis_names[a]);
            syms.push(self.table.fresh(nm, degree as u8)?);
        }
        let coeffs: Vec<Scalar> = syms.iter().map(|s| Scalar::symbol(ctx, *s)).collect();
        let val = self.cm.alg(alg).to_matrix(ctx, &coeffs);
        self.fields.push(FieldInfo { name: name.into(), alg, degree, syms, val, images: None });
        Ok(Expr::field(self.leaf(self.fields.len() - 1), degree % 2 == 1))
    }

    pub fn add_group(&mut self, name: &str, alg: Alg, orientation: Orientation) -> Result<GExpr, DgaError> {
        let mut bodies = Vec::with_capacity(self.samples);
        for _ in 0..self.samples {
            let cm = self.cm.clone();
            bodies.push(cm.sample_body(alg, &mut self.rng)?);
        }
        Ok(self.add_group_with_bodies(name, alg, orientation, bodies))
    }

    pub fn add_group_with_bodies(&mut self, name: &str, alg: Alg, orientation: Orientation, bodies: Vec<QMat>) -> GExpr {
        assert_eq!(bodies.len(), self.samples, "one body per sample");
        self.groups.push(GroupInfo { name: name.into(), alg, orientation, bodies, images: None });
        GExpr::leaf(self.leaf(self.groups.len() - 1))
    }

    /// Ring symbol `u` of degree `deg` with `d u = v`, both annihilated by `j`, `l`.
    /// Degree-0 symbols get weight 1, so polynomials in them are nilpotent.
    pub fn add_ring_pair(&mut self, name: &str, dname: &str, deg: u8) -> Result<(Sym, Sym), DgaError> {
        let u = if deg == 0 { self.table.fresh_infinitesimal(name)? } else { self.table.fresh(name, deg)? };
        let v = self.table.fresh(dname, deg + 1)?;
        self.ring_d.insert(u, Scalar::symbol(self.ctx(), v));
        self.ring_gens.push(u);
        self.ring_gens.push(v);
        Ok((u, v))
    }

    pub fn set_images(&mut self, e: &Expr, images: Images) {
        match e.node() {
            Node::Field(id) if id.store == self.uid => self.fields[id.idx].images = Some(images),
            _ => panic!("set_images expects a field leaf"),
        }
    }

    pub fn set_group_images(&mut self, g: &GExpr, images: Images) {
        match g.val.node() {
            Node::Group { id, inv: false } if id.store == self.uid => self.groups[id.idx].images = Some(images),
            _ => panic!("set_group_images expects a group leaf"),
        }
    }

    pub fn field_info(&self, e: &Expr) -> Option<&FieldInfo> {
        match e.node() {
            Node::Field(id) if id.store == self.uid => self.fields.get(id.idx),
            _ => None,
        }
    }

    pub fn group_info(&self, g: &GExpr) -> Option<&GroupInfo> {
        match g.val.node() {
            Node::Group { id, .. } if id.store == self.uid => self.groups.get(id.idx),
            _ => None,
        }
    }

    pub fn fields(&self) -> impl Iterator<Item = (Expr, &FieldInfo)> {
        self.fields.iter().enumerate().map(|(i, f)| (Expr::field(self.leaf(i), f.degree % 2 == 1), f))
    }

    pub fn groups(&self) -> impl Iterator<Item = (GExpr, &GroupInfo)> {
        self.groups.iter().enumerate().map(|(i, g)| (GExpr::leaf(self.leaf(i)), g))
    }

    pub fn ring_generators(&self) -> &[Sym] {
        &self.ring_gens
    }

    pub fn is_killed(&self, s: Sym) -> bool {
        self.kill.contains(&s)
    }

    pub fn killed(&self) -> &HashSet<Sym> {
        &self.kill
    }

    pub fn apply(&self, d: &Deriv, e: &Expr) -> Result<Expr, DgaError> {
        let mut memo = HashMap::new();
        self.apply_memo(d, e, &mut memo)
    }

    fn images_of_field(&self, id: FieldId) -> Result<&Images, DgaError> {
        if id.store != self.uid {
            return Err(DgaError::ForeignLeaf);
        }
        let f = &self.fields[id.idx];
        f.images.as_ref().ok_or_else(|| DgaError::Unregistered(f.name.clone()))
    }

    fn apply_memo(&self, d: &Deriv, e: &Expr, memo: &mut HashMap<*const expr::Inner, Expr>) -> Result<Expr, DgaError> {
        if let Some(r) = memo.get(&e.ptr()) {
            return Ok(r.clone());
        }
        let out = match e.node() {
            Node::Zero | Node::Ident => Expr::zero(),
            Node::Ring(m) => match d.kind {
                Kind::D => Expr::ring(m.map(|s| s.derive_with(true, |sym| self.ring_d.get(&sym).cloned()))),
                _ => Expr::zero(),
            },
            Node::Field(id) => self.images_of_field(*id)?.get(d),
            Node::Group { id, inv } => {
                if id.store != self.uid {
                    return Err(DgaError::ForeignLeaf);
                }
                let info = &self.groups[id.idx];
                let m = info
                    .images
                    .as_ref()
                    .ok_or_else(|| DgaError::Unregistered(info.name.clone()))?
                    .get(d);
                let g = Expr::group(*id, *inv);
                match (info.orientation, inv) {
                    (Orientation::Right, false) => m.mul(&g),
                    (Orientation::Right, true) => g.mul(&m).neg(),
                    (Orientation::Left, false) => g.mul(&m),
                    (Orientation::Left, true) => m.mul(&g).neg(),
                }
            }
            Node::Add(v) => {
                let mut terms = Vec::with_capacity(v.len());
                for t in v {
                    terms.push(self.apply_memo(d, t, memo)?);
                }
                Expr::sum(terms)
            }
            Node::Scale(c, x) => self.apply_memo(d, x, memo)?.scale(c.clone()),
            Node::Prod(v) => {
                let mut terms = Vec::with_capacity(v.len());
                let mut prefix_odd = false;
                for k in 0..v.len() {
                    let dk = self.apply_memo(d, &v[k], memo)?;
                    if !dk.is_zero() {
                        let mut f: Vec<Expr> = v[..k].to_vec();
                        f.push(dk);
                        f.extend(v[k + 1..].iter().cloned());
                        let t = Expr::prod(f);
                        terms.push(if d.is_odd() && prefix_odd { t.neg() } else { t });
                    }
                    prefix_odd ^= v[k].is_odd();
                }
                Expr::sum(terms)
            }
            Node::Tau(x) => self.apply_memo(d, x, memo)?.tau(),
        };
        memo.insert(e.ptr(), out.clone());
        Ok(out)
    }

    /// Value at body sample `sample`, with the kill set applied.
    pub fn eval(&self, e: &Expr, sample: usize) -> RMat {
        let mut memo = HashMap::new();
        self.eval_memo(e, sample, &mut memo)
    }

    fn eval_memo(&self, e: &Expr, sample: usize, memo: &mut HashMap<*const expr::Inner, RMat>) -> RMat {
        if let Some(r) = memo.get(&e.ptr()) {
            return r.clone();
        }
        let share = e.is_shared_interior();
        if share {
            if let Some((_, r)) = self.shared.borrow().get(&(e.ptr(), sample)) {
                return r.clone();
            }
        }
        let ctx = self.ctx();
        let n = self.n();
        let kill = |s: Sym| self.kill.contains(&s);
        let out = match e.node() {
            Node::Zero => RMat::zero(ctx, n),
            Node::Ident => RMat::identity(ctx, n),
            Node::Ring(m) => {
                if self.kill.is_empty() {
                    m.clone()
                } else {
                    m.kill(&kill)
                }
            }
            Node::Field(id) => {
                if self.killed_fields.contains(id) {
                    RMat::zero(ctx, n)
                } else {
                    assert_eq!(id.store, self.uid, "foreign leaf");
                    self.fields[id.idx].val.clone()
                }
            }
            Node::Group { id, inv } => {
                assert_eq!(id.store, self.uid, "foreign leaf");
                let b = &self.groups[id.idx].bodies[sample];
                if *inv {
                    b.inverse().expect("group body is invertible").to_ring(ctx)
                } else {
                    b.to_ring(ctx)
                }
            }
            Node::Add(v) => {
                let mut acc = self.eval_memo(&v[0], sample, memo);
                for t in &v[1..] {
                    acc = acc.add(&self.eval_memo(t, sample, memo));
                }
                acc
            }
            Node::Scale(c, x) => self.eval_memo(x, sample, memo).scale(c),
            Node::Prod(v) => {
                let mut acc = self.eval_memo(&v[0], sample, memo);
                for t in &v[1..] {
                    if acc.is_zero() {
                        break;
                    }
                    acc = acc.mul(&self.eval_memo(t, sample, memo));
                }
                acc
            }
            Node::Tau(x) => self.cm.tau_dot_r(&self.eval_memo(x, sample, memo)),
        };
        if share {
            self.shared.borrow_mut().insert((e.ptr(), sample), (e.clone(), out.clone()));
        }
        memo.insert(e.ptr(), out.clone());
        out
    }

    /// First nonzero coefficient of `e` over all samples, if any.
    pub fn witness(&self, e: &Expr) -> Option<Witness> {
        if e.is_zero() {
            return None;
        }
        (0..self.samples).find_map(|s| Witness::from_residual(&self.eval(e, s), s, Some(&self.table)))
    }

    pub fn check_zero(&self, id: impl Into<String>, anchor: impl Into<String>, e: &Expr) -> Check {
        Check::from_witness(id, anchor, self.witness(e))
    }

    pub fn check_eq(&self, id: impl Into<String>, anchor: impl Into<String>, a: &Expr, b: &Expr) -> Check {
        self.check_zero(id, anchor, &a.sub(b))
    }

    /// Residuals of the six Cartan relations on one expression.
    pub fn cartan_residuals(&self, e: &Expr) -> Result<[Expr; 6], DgaError> {
        let (z, w) = (self.z(), self.w());
        let d = self.d();
        let (jz, jw, lz, lw) = (self.j(&z), self.j(&w), self.l(&z), self.l(&w));
        let zw = z.bracket(&w);
        let (jzw, lzw) = (self.j(&zw), self.l(&zw));
        let ap = |a: &Deriv, b: &Deriv| -> Result<Expr, DgaError> { self.apply(a, &self.apply(b, e)?) };
        Ok([
            ap(&d, &d)?,
            ap(&d, &jz)?.add(&ap(&jz, &d)?).sub(&self.apply(&lz, e)?),
            ap(&d, &lz)?.sub(&ap(&lz, &d)?),
            ap(&jz, &jw)?.add(&ap(&jw, &jz)?),
            ap(&lz, &jw)?.sub(&ap(&jw, &lz)?).sub(&self.apply(&jzw, e)?),
            ap(&lz, &lw)?.sub(&ap(&lw, &lz)?).sub(&self.apply(&lzw, e)?),
        ])
    }

    /// The six relations on every generator (fields, group leaves, ring pairs).
    pub fn cartan_check(&self) -> Result<Suite, DgaError> {
        let mut s = Suite::new("cartan");
        let mut targets: Vec<(String, Expr)> = Vec::new();
        for (e, f) in self.fields() {
            if !self.killed_fields.contains(&field_id(&e)) {
                targets.push((f.name.clone(), e));
            }
        }
        for (g, info) in self.groups() {
            targets.push((info.name.clone(), g.val));
        }
        let ctx = self.ctx();
        for &u in &self.ring_gens {
            if !self.kill.contains(&u) {
                let m = RMat::identity(ctx, self.n()).lmul_scalar(&Scalar::symbol(ctx, u));
                targets.push((self.table.name(u).to_string(), Expr::ring(m)));
            }
        }
        for (name, e) in targets {
            let res = self.cartan_residuals(&e)?;
            for (k, r) in res.iter().enumerate() {
                s.push(self.check_zero(format!("cartan.{}.{name}", CARTAN_IDS[k]), CARTAN_ANCHORS[k], r));
            }
        }
        Ok(s)
    }

    /// Restrict to the ideal generated by the given fields and ring symbols,
    /// with the odd derivation parameters set to zero. Fails if some killed
    /// generator has an image that survives.
    pub fn restriction(&self, kill_fields: &[Expr], kill_ring: &[Sym]) -> Result<FieldStore, DgaError> {
        if !kill_fields.iter().all(|f| self.owns(f)) {
            return Err(DgaError::ForeignLeaf);
        }
        let mut out = self.clone();
        out.shared = RefCell::default();
        for f in kill_fields {
            let id = field_id(f);
            out.killed_fields.insert(id);
            out.kill.extend(self.fields[id.idx].syms.iter().copied());
        }
        out.kill.extend(kill_ring.iter().copied());
        out.kill.extend(self.shift_params.iter().copied());
        let z = out.z();
        let derivs = [out.d(), out.j(&z), out.l(&z)];
        for f in kill_fields {
            let id = field_id(f);
            for d in &derivs {
                let img = out.apply(d, f)?;
                if out.witness(&img).is_some() {
                    return Err(DgaError::NotClosed { name: self.fields[id.idx].name.clone(), kind: d.kind.name().into() });
                }
            }
        }
        for s in kill_ring {
            if let Some(v) = self.ring_d.get(s) {
                if !v.kill(|x| out.kill.contains(&x)).is_zero() {
                    return Err(DgaError::NotClosed { name: self.table.name(*s).into(), kind: "d".into() });
                }
            }
        }
        Ok(out)
    }
}

pub fn field_id(e: &Expr) -> FieldId {
    match e.node() {
        Node::Field(id) => *id,
        _ => panic!("expected a field leaf"),
    }
}

pub const CARTAN_IDS: [&str; 6] = ["dd", "dj", "dl", "jj", "lj", "ll"];
pub const CARTAN_ANCHORS: [&str; 6] = [
    "six Cartan relations: [d,d] = 0",
    "six Cartan relations: [d,j_Z] = l_Z",
    "six Cartan relations: [d,l_Z] = 0",
    "six Cartan relations: [j_Z,j_W] = 0",
    "six Cartan relations: [l_Z,j_W] = j_[Z,W]",
    "six Cartan relations: [l_Z,l_W] = l_[Z,W]",
];
