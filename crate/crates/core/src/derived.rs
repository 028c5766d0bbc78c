//! The derived group `e[1] x| G`, its Lie algebra, and packing of projected
//! components with an odd parameter.
//!
//! Packed objects live in the ambient matrix algebra: `Z = x + aX`,
//! `Psi = (1 + aX) g`, `A = w - aW`. Component laws are checked against
//! ambient matrix arithmetic in the tests below.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::liecm::{graded_commutator, random_rational, Alg, CmError, CrossedModule, GroupValuedMap, LieValuedForm};
use crate::matrix::RMat;
use crate::superring::{GeneratorTable, RingCtx, RingError, Sym};
use crate::report::{Check, Suite, Witness};
use crate::tamper::Tamper;
use crate::Scalar;

#[derive(Debug, Error)]
pub enum DerivedError {
    #[error("packing parameter already occurs in the packed data")]
    AlphaCollision,
    #[error(transparent)]
    Cm(#[from] CmError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// `e^{aX} g`.
#[derive(Clone, Debug)]
pub struct DerivedGroupElement {
    pub shift: LieValuedForm,
    pub base: GroupValuedMap,
}

/// `x + aX`.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedAlgebraElement {
    pub x: LieValuedForm,
    pub xs: LieValuedForm,
}

/// Product of group-valued maps, re-normalized to `body * exp(tail)`.
pub fn group_mul(a: &GroupValuedMap, b: &GroupValuedMap) -> GroupValuedMap {
    let body = a.body.mul(&b.body);
    let binv = body.inverse().expect("group body is invertible");
    let unip = a.value().mul(&b.value()).mul_q_left(&binv);
    GroupValuedMap { group: a.group, body, tail: unip.log_unipotent() }
}

fn mu_dot(cm: &CrossedModule, a: &GroupValuedMap, y: &LieValuedForm) -> Result<LieValuedForm, CmError> {
    let ctx = y.coeffs.first().map(|c| c.ctx()).unwrap_or(a.tail.ctx()).join(a.tail.ctx()).map_err(|e| CmError::Schema(e.to_string()))?;
    let m = a.value().mul(&y.to_matrix(cm, ctx)).mul(&a.inverse_value());
    LieValuedForm::from_matrix(cm, Alg::E, y.degree, &m)
}

fn form_add(a: &LieValuedForm, b: &LieValuedForm, sign: i64) -> LieValuedForm {
    let coeffs = a
        .coeffs
        .iter()
        .zip(&b.coeffs)
        .map(|(x, y)| if sign > 0 { x + y } else { x - y })
        .collect();
    LieValuedForm { target: a.target, degree: a.degree, coeffs }
}

fn form_neg(a: &LieValuedForm) -> LieValuedForm {
    LieValuedForm { target: a.target, degree: a.degree, coeffs: a.coeffs.iter().map(|c| -c).collect() }
}

pub fn dm_identity(cm: &CrossedModule, ctx: RingCtx, shift_degree: u32) -> DerivedGroupElement {
    DerivedGroupElement {
        shift: LieValuedForm::zero(cm, Alg::E, shift_degree, ctx),
        base: GroupValuedMap::constant(Alg::G, crate::matrix::QMat::identity(cm.n), ctx),
    }
}

/// `(X_p, a_p)(X_q, a_q) = (X_p + mu_dot(a_p, X_q), a_p a_q)`.
pub fn dm_mul(cm: &CrossedModule, p: &DerivedGroupElement, q: &DerivedGroupElement) -> Result<DerivedGroupElement, CmError> {
    dm_mul_tampered(cm, p, q, None)
}

pub fn dm_mul_tampered(
    cm: &CrossedModule,
    p: &DerivedGroupElement,
    q: &DerivedGroupElement,
    tamper: Option<Tamper>,
) -> Result<DerivedGroupElement, CmError> {
    let moved = mu_dot(cm, &p.base, &q.shift)?;
    let sign = if tamper == Some(Tamper::DmMulSign) { -1 } else { 1 };
    Ok(DerivedGroupElement { shift: form_add(&p.shift, &moved, sign), base: group_mul(&p.base, &q.base) })
}

/// `(X, a)^-1 = (-mu_dot(a^-1, X), a^-1)`.
pub fn dm_inverse(cm: &CrossedModule, p: &DerivedGroupElement) -> Result<DerivedGroupElement, CmError> {
    let ai = p.base.inverse();
    Ok(DerivedGroupElement { shift: form_neg(&mu_dot(cm, &ai, &p.shift)?), base: ai })
}

/// `[(x,X),(y,Y)] = ([x,y], .mu.(x,Y) - .mu.(y,X))` with ambient graded commutators.
pub fn dm_bracket(cm: &CrossedModule, z: &DerivedAlgebraElement, w: &DerivedAlgebraElement, ctx: RingCtx) -> Result<DerivedAlgebraElement, CmError> {
    let (x, y) = (z.x.to_matrix(cm, ctx), w.x.to_matrix(cm, ctx));
    let (xx, yy) = (z.xs.to_matrix(cm, ctx), w.xs.to_matrix(cm, ctx));
    let top = graded_commutator(&x, &y);
    let bottom = graded_commutator(&x, &yy).sub(&graded_commutator(&y, &xx));
    Ok(DerivedAlgebraElement {
        x: LieValuedForm::from_matrix(cm, Alg::G, z.x.degree + w.x.degree, &top)?,
        xs: LieValuedForm::from_matrix(cm, Alg::E, z.x.degree + w.xs.degree, &bottom)?,
    })
}

/// `d_tau(x, X) = (tau_dot X, 0)`.
pub fn d_tau(cm: &CrossedModule, z: &DerivedAlgebraElement, ctx: RingCtx) -> Result<DerivedAlgebraElement, CmError> {
    let t = cm.tau_dot_r(&z.xs.to_matrix(cm, ctx));
    Ok(DerivedAlgebraElement {
        x: LieValuedForm::from_matrix(cm, Alg::G, z.xs.degree, &t)?,
        xs: LieValuedForm::zero(cm, Alg::E, z.xs.degree, ctx),
    })
}

/// Odd packing parameter. The ring stores it with degree 1; a shifted
/// parameter (formal degree -1) is flagged in the generator table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Packing {
    pub alpha: Sym,
}

impl Packing {
    pub fn new(table: &mut GeneratorTable, name: &str) -> Result<Packing, DerivedError> {
        Ok(Packing { alpha: table.fresh(name, 1)? })
    }

    pub fn shifted(table: &mut GeneratorTable, name: &str) -> Result<Packing, DerivedError> {
        Ok(Packing { alpha: table.fresh_shifted(name)? })
    }

    fn check_free(&self, m: &RMat) -> Result<(), DerivedError> {
        let hit = m.entries().iter().any(|e| e.terms().iter().any(|(mo, _)| mo.contains(self.alpha)));
        if hit {
            Err(DerivedError::AlphaCollision)
        } else {
            Ok(())
        }
    }

    fn alpha(&self, ctx: RingCtx) -> Scalar {
        Scalar::symbol(ctx, self.alpha)
    }

    /// `a0 + sign * alpha * a1`.
    pub fn pack(&self, a0: &RMat, a1: &RMat, sign: i64) -> Result<RMat, DerivedError> {
        self.check_free(a0)?;
        self.check_free(a1)?;
        let t = a1.lmul_scalar(&self.alpha(a1.ctx()));
        Ok(if sign >= 0 { a0.add(&t) } else { a0.sub(&t) })
    }

    /// Inverse of [`Packing::pack`]: the alpha-free part and the left
    /// `alpha`-derivative times `sign`.
    pub fn unpack(&self, m: &RMat, sign: i64) -> (RMat, RMat) {
        let a = self.alpha;
        let a0 = m.map(|e| e.kill(|s| s == a));
        let d = m.map(|e| e.derive_with(true, |s| (s == a).then(|| Scalar::one(e.ctx()))));
        (a0, if sign >= 0 { d } else { d.neg() })
    }

    pub fn pack_form(&self, cm: &CrossedModule, ctx: RingCtx, a0: &LieValuedForm, a1: &LieValuedForm, sign: i64) -> Result<RMat, DerivedError> {
        self.pack(&a0.to_matrix(cm, ctx), &a1.to_matrix(cm, ctx), sign)
    }

    pub fn pack_algebra(&self, cm: &CrossedModule, ctx: RingCtx, z: &DerivedAlgebraElement) -> Result<RMat, DerivedError> {
        self.pack_form(cm, ctx, &z.x, &z.xs, 1)
    }

    /// `(1 + alpha X) a`.
    pub fn pack_group(&self, cm: &CrossedModule, ctx: RingCtx, p: &DerivedGroupElement) -> Result<RMat, DerivedError> {
        let x = p.shift.to_matrix(cm, ctx);
        let v = p.base.value();
        self.check_free(&x)?;
        self.check_free(&v)?;
        let one = RMat::identity(ctx, cm.n);
        Ok(one.add(&x.lmul_scalar(&self.alpha(ctx))).mul(&v))
    }

    /// Split `(1 + alpha X) a` into `(X, a)` as ambient matrices.
    pub fn unpack_group(&self, m: &RMat) -> (RMat, RMat) {
        let (a, xa) = self.unpack(m, 1);
        // a is invertible with numeric body; X = (X a) a^-1
        let body = crate::matrix::QMat::from_rows(
            &(0..m.n()).map(|i| (0..m.n()).map(|j| a[(i, j)].body()).collect()).collect::<Vec<_>>(),
        );
        let bi = body.inverse().expect("unpacked base is invertible");
        let unip = a.mul_q_left(&bi);
        let ainv = unip.log_unipotent().neg().exp_nilpotent().mul_q_right(&bi);
        (xa.mul(&ainv), a)
    }
}

/// Group laws of the derived group, each compared with the ambient product of
/// packed matrices. `tamper` reaches the component product only.
pub fn check_derived_group(cm: &CrossedModule, samples: usize, seed: u64, tamper: Option<Tamper>) -> Result<Suite, DerivedError> {
    let mut table = GeneratorTable::new();
    let odd: Vec<Sym> = (0..3).map(|i| table.fresh(format!("a{i}"), 1)).collect::<Result<_, _>>()?;
    let even: Vec<Sym> = (0..2).map(|i| table.fresh(format!("w{i}"), 2)).collect::<Result<_, _>>()?;
    let pk = Packing::new(&mut table, "alpha")?;
    let ctx = table.ctx(6);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let form = |alg: Alg, pool: &[Sym], rng: &mut ChaCha8Rng| -> Result<LieValuedForm, CmError> {
        let coeffs = (0..cm.alg(alg).dim())
            .map(|_| pool.iter().fold(Scalar::zero(ctx), |c, &s| &c + &Scalar::symbol(ctx, s).scale(&random_rational(rng))))
            .collect();
        LieValuedForm::new(alg, if pool == odd.as_slice() { 1 } else { 2 }, coeffs)
    };
    let mut s = Suite::new("derived-group");
    let mul = |p: &DerivedGroupElement, q: &DerivedGroupElement| dm_mul_tampered(cm, p, q, tamper);
    for k in 0..samples {
        let elem = |rng: &mut ChaCha8Rng| -> Result<DerivedGroupElement, DerivedError> {
            let shift = form(Alg::E, &odd, rng)?;
            let tail = form(Alg::G, &even, rng)?.to_matrix(cm, ctx);
            Ok(DerivedGroupElement { shift, base: GroupValuedMap { group: Alg::G, body: cm.sample_body(Alg::G, rng)?, tail } })
        };
        let (p, q, r) = (elem(&mut rng)?, elem(&mut rng)?, elem(&mut rng)?);
        let pack = |x: &DerivedGroupElement| pk.pack_group(cm, ctx, x);
        let pq = mul(&p, &q)?;
        let mut push = |id: &str, anchor: &str, a: RMat, b: RMat| {
            let w = Witness::from_residual(&a.sub(&b), k, Some(&table));
            s.push(Check::from_witness(format!("derived.{id}.{k}"), anchor, w));
        };
        push("product", "derived group product: e^{aX}a e^{aY}b = e^{a(X + mu_dot(a,Y))} ab", pack(&p)?.mul(&pack(&q)?), pack(&pq)?);
        let lhs = mul(&pq, &r)?;
        let rhs = mul(&p, &mul(&q, &r)?)?;
        push("associativity", "derived group product is associative", pack(&lhs)?, pack(&rhs)?);
        let pi = dm_inverse(cm, &p)?;
        push("inverse", "derived group inverse: (X,a)^-1 = (-mu_dot(a^-1,X), a^-1)", pack(&mul(&p, &pi)?)?, pack(&dm_identity(cm, ctx, 1))?);
    }
    Ok(s)
}
