//! Truncated free supercommutative polynomial ring over exact coefficients.
//!
//! Every internal function in the engine is expanded in this ring. Generators
//! carry a non-negative degree; odd generators anticommute and square to zero,
//! even generators commute. Products above the truncation degree are dropped.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::atomic::{AtomicU32, Ordering};

use num_traits::Num;
use smallvec::SmallVec;
use thiserror::Error;

/// Coefficient field requirements. Implemented for any exact numeric type.
pub trait Coeff: Num + Neg<Output = Self> + Clone + fmt::Debug + fmt::Display {}
impl<T: Num + Neg<Output = T> + Clone + fmt::Debug + fmt::Display> Coeff for T {}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("operands belong to different generator tables ({0} vs {1})")]
    TableMismatch(u32, u32),
    #[error("operands use different truncation degrees ({0} vs {1})")]
    TruncMismatch(u16, u16),
    #[error("no derivation image supplied for generator {0}")]
    MissingImage(String),
    #[error("image of {name} has degree {found}, expected {expected}")]
    DegreeMismatch { name: String, found: i32, expected: i32 },
    #[error("generator name {0} already registered")]
    DuplicateName(String),
    #[error("generator index space exhausted")]
    Exhausted,
}

/// A generator symbol: `(index << 8) | infinitesimal << 7 | degree`.
///
/// Truncation counts the weight of a monomial: the degree, plus one for every
/// factor flagged infinitesimal. Flagged degree-0 symbols (base coordinates)
/// are therefore nilpotent, and `d` never lowers weight.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sym(u32);

impl Sym {
    pub fn new(index: u32, degree: u8) -> Sym {
        assert!(degree < 0x80, "degree out of range");
        Sym((index << 8) | degree as u32)
    }
    pub fn infinitesimal(index: u32) -> Sym {
        Sym((index << 8) | 0x80)
    }
    pub fn index(self) -> u32 {
        self.0 >> 8
    }
    pub fn degree(self) -> u8 {
        (self.0 & 0x7f) as u8
    }
    pub fn weight(self) -> u8 {
        self.degree() + ((self.0 >> 7) & 1) as u8
    }
    pub fn is_odd(self) -> bool {
        self.0 & 1 == 1
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}[{}]", self.index(), self.degree())
    }
}

static NEXT_TABLE: AtomicU32 = AtomicU32::new(1);

/// Registry of named generators. Append-only, so scalars built early stay valid.
#[derive(Clone, Debug)]
pub struct GeneratorTable {
    id: u32,
    names: Vec<String>,
    syms: Vec<Sym>,
    shifted: Vec<bool>,
    by_name: HashMap<String, Sym>,
}

impl Default for GeneratorTable {
    fn default() -> Self {
        Self::new()
    }
}

impl GeneratorTable {
    pub fn new() -> Self {
        GeneratorTable {
            id: NEXT_TABLE.fetch_add(1, Ordering::Relaxed),
            names: Vec::new(),
            syms: Vec::new(),
            shifted: Vec::new(),
            by_name: HashMap::new(),
        }
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn fresh(&mut self, name: impl Into<String>, degree: u8) -> Result<Sym, RingError> {
        self.register(name.into(), degree, false, false)
    }

    /// Even degree-0 symbol of weight 1.
    pub fn fresh_infinitesimal(&mut self, name: impl Into<String>) -> Result<Sym, RingError> {
        self.register(name.into(), 0, false, true)
    }

    /// Odd degree-1 symbol flagged as standing for a formal degree of -1.
    pub fn fresh_shifted(&mut self, name: impl Into<String>) -> Result<Sym, RingError> {
        self.register(name.into(), 1, true, false)
    }

    fn register(&mut self, name: String, degree: u8, shifted: bool, infinitesimal: bool) -> Result<Sym, RingError> {
        if self.by_name.contains_key(&name) {
            return Err(RingError::DuplicateName(name));
        }
        let index = self.names.len() as u32;
        if index >= 1 << 24 {
            return Err(RingError::Exhausted);
        }
        let s = if infinitesimal { Sym::infinitesimal(index) } else { Sym::new(index, degree) };
        self.names.push(name.clone());
        self.syms.push(s);
        self.shifted.push(shifted);
        self.by_name.insert(name, s);
        Ok(s)
    }

    pub fn lookup(&self, name: &str) -> Option<Sym> {
        self.by_name.get(name).copied()
    }

    pub fn name(&self, s: Sym) -> &str {
        &self.names[s.index() as usize]
    }

    pub fn is_shifted(&self, s: Sym) -> bool {
        self.shifted[s.index() as usize]
    }

    pub fn symbols(&self) -> impl Iterator<Item = Sym> + '_ {
        self.syms.iter().copied()
    }

    pub fn ctx(&self, trunc: u16) -> RingCtx {
        RingCtx { table: self.id, trunc }
    }
}

/// Table id plus truncation degree. Table 0 marks a pure constant that is
/// compatible with every ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RingCtx {
    pub table: u32,
    pub trunc: u16,
}

impl RingCtx {
    pub const FREE: RingCtx = RingCtx { table: 0, trunc: u16::MAX };

    pub fn join(self, other: RingCtx) -> Result<RingCtx, RingError> {
        if self.table == 0 {
            return Ok(other);
        }
        if other.table == 0 {
            return Ok(self);
        }
        if self.table != other.table {
            return Err(RingError::TableMismatch(self.table, other.table));
        }
        if self.trunc != other.trunc {
            return Err(RingError::TruncMismatch(self.trunc, other.trunc));
        }
        Ok(self)
    }
}

/// Monomial in canonical (ascending symbol) order. Even symbols may repeat.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial {
    syms: SmallVec<[Sym; 6]>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn from_sym(s: Sym) -> Self {
        let mut syms = SmallVec::new();
        syms.push(s);
        Monomial { syms }
    }

    /// Normalize an arbitrary product of symbols. Returns `None` when an odd
    /// symbol repeats, otherwise the monomial and whether the sign flipped.
    pub fn from_product(factors: &[Sym]) -> Option<(Monomial, bool)> {
        let mut v: SmallVec<[Sym; 6]> = factors.iter().copied().collect();
        let mut neg = false;
        // insertion sort tracking odd transpositions
        for i in 1..v.len() {
            let mut j = i;
            while j > 0 && v[j - 1] > v[j] {
                if v[j - 1].is_odd() && v[j].is_odd() {
                    neg = !neg;
                }
                v.swap(j - 1, j);
                j -= 1;
            }
        }
        if v.windows(2).any(|w| w[0] == w[1] && w[0].is_odd()) {
            return None;
        }
        Some((Monomial { syms: v }, neg))
    }

    pub fn syms(&self) -> &[Sym] {
        &self.syms
    }

    pub fn degree(&self) -> u32 {
        self.syms.iter().map(|s| s.degree() as u32).sum()
    }

    pub fn weight(&self) -> u32 {
        self.syms.iter().map(|s| s.weight() as u32).sum()
    }

    pub fn is_odd(&self) -> bool {
        self.syms.iter().filter(|s| s.is_odd()).count() % 2 == 1
    }

    pub fn contains(&self, s: Sym) -> bool {
        self.syms.binary_search(&s).is_ok()
    }

    /// Product with Koszul sign; `None` if it vanishes.
    pub fn mul(&self, other: &Monomial) -> Option<(Monomial, bool)> {
        let a = &self.syms;
        let b = &other.syms;
        let mut out: SmallVec<[Sym; 6]> = SmallVec::with_capacity(a.len() + b.len());
        let mut odd_left_in_a = a.iter().filter(|s| s.is_odd()).count();
        let mut neg = false;
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let take_a = j >= b.len() || (i < a.len() && a[i] <= b[j]);
            if take_a {
                if i < a.len() && j < b.len() && a[i] == b[j] && a[i].is_odd() {
                    return None;
                }
                if a[i].is_odd() {
                    odd_left_in_a -= 1;
                }
                out.push(a[i]);
                i += 1;
            } else {
                if b[j].is_odd() && odd_left_in_a % 2 == 1 {
                    neg = !neg;
                }
                out.push(b[j]);
                j += 1;
            }
        }
        Some((Monomial { syms: out }, neg))
    }

    pub fn display(&self, table: Option<&GeneratorTable>) -> String {
        if self.syms.is_empty() {
            return "1".into();
        }
        let mut parts: Vec<String> = Vec::new();
        let mut k = 0;
        while k < self.syms.len() {
            let s = self.syms[k];
            let mut e = 1;
            while k + e < self.syms.len() && self.syms[k + e] == s {
                e += 1;
            }
            let name = match table {
                Some(t) if (s.index() as usize) < t.len() => t.name(s).to_string(),
                _ => format!("{:?}", s),
            };
            if e > 1 {
                parts.push(format!("{name}^{e}"));
            } else {
                parts.push(name);
            }
            k += e;
        }
        parts.join("*")
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display(None))
    }
}

/// Element of the truncated ring: sorted list of (monomial, nonzero coefficient).
#[derive(Clone, PartialEq)]
pub struct GradedScalar<C: Coeff> {
    ctx: RingCtx,
    terms: Vec<(Monomial, C)>,
}

impl<C: Coeff> fmt::Debug for GradedScalar<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display(None))
    }
}

impl<C: Coeff> GradedScalar<C> {
    pub fn zero(ctx: RingCtx) -> Self {
        GradedScalar { ctx, terms: Vec::new() }
    }

    pub fn constant(ctx: RingCtx, c: C) -> Self {
        let terms = if c.is_zero() { Vec::new() } else { vec![(Monomial::one(), c)] };
        GradedScalar { ctx, terms }
    }

    pub fn one(ctx: RingCtx) -> Self {
        Self::constant(ctx, C::one())
    }

    pub fn symbol(ctx: RingCtx, s: Sym) -> Self {
        Self::monomial(ctx, Monomial::from_sym(s), C::one())
    }

    pub fn monomial(ctx: RingCtx, m: Monomial, c: C) -> Self {
        if c.is_zero() || m.weight() > ctx.trunc as u32 {
            return Self::zero(ctx);
        }
        GradedScalar { ctx, terms: vec![(m, c)] }
    }

    /// Build from unsorted terms, combining duplicates and dropping zeros.
    pub fn from_terms(ctx: RingCtx, terms: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        let mut v: Vec<(Monomial, C)> = terms
            .into_iter()
            .filter(|(m, _)| m.weight() <= ctx.trunc as u32)
            .collect();
        Self::normalize(&mut v);
        GradedScalar { ctx, terms: v }
    }

    fn normalize(v: &mut Vec<(Monomial, C)>) {
        v.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Monomial, C)> = Vec::with_capacity(v.len());
        for (m, c) in v.drain(..) {
            match out.last_mut() {
                Some((lm, lc)) if *lm == m => {
                    let s = lc.clone() + c;
                    *lc = s;
                }
                _ => out.push((m, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        *v = out;
    }

    pub fn ctx(&self) -> RingCtx {
        self.ctx
    }

    pub fn terms(&self) -> &[(Monomial, C)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> C {
        match self.terms.binary_search_by(|(x, _)| x.cmp(m)) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => C::zero(),
        }
    }

    /// Constant term.
    pub fn body(&self) -> C {
        self.coefficient(&Monomial::one())
    }

    /// Common degree of all terms, `None` for zero or mixed degree.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let d = self.terms.first()?.0.degree();
        self.terms.iter().all(|(m, _)| m.degree() == d).then_some(d)
    }

    /// Parity if every term has the same one; zero counts as even.
    pub fn parity(&self) -> Option<bool> {
        let p = match self.terms.first() {
            None => return Some(false),
            Some((m, _)) => m.is_odd(),
        };
        self.terms.iter().all(|(m, _)| m.is_odd() == p).then_some(p)
    }

    pub fn degree_part(&self, d: u32) -> Self {
        GradedScalar {
            ctx: self.ctx,
            terms: self.terms.iter().filter(|(m, _)| m.degree() == d).cloned().collect(),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, RingError> {
        let ctx = self.ctx.join(other.ctx)?;
        Ok(self.merge(other, ctx, false))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, RingError> {
        let ctx = self.ctx.join(other.ctx)?;
        Ok(self.merge(other, ctx, true))
    }

    fn merge(&self, other: &Self, ctx: RingCtx, negate: bool) -> Self {
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        let sb = |c: &C| if negate { -c.clone() } else { c.clone() };
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((b[j].0.clone(), sb(&b[j].1)));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = a[i].1.clone() + sb(&b[j].1);
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        out.extend(b[j..].iter().map(|(m, c)| (m.clone(), sb(c))));
        GradedScalar { ctx, terms: out }
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(self.ctx);
        }
        GradedScalar {
            ctx: self.ctx,
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x.clone() * c.clone())).collect(),
        }
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, RingError> {
        let ctx = self.ctx.join(other.ctx)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(ctx));
        }
        if self.terms.len() == 1 && self.terms[0].0.syms.is_empty() {
            return Ok(GradedScalar { ctx, ..other.scale(&self.terms[0].1) });
        }
        if other.terms.len() == 1 && other.terms[0].0.syms.is_empty() {
            return Ok(GradedScalar { ctx, ..self.scale(&other.terms[0].1) });
        }
        let trunc = ctx.trunc as u32;
        let mut v = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            let da = ma.weight();
            for (mb, cb) in &other.terms {
                if da + mb.weight() > trunc {
                    continue;
                }
                if let Some((m, neg)) = ma.mul(mb) {
                    let c = ca.clone() * cb.clone();
                    v.push((m, if neg { -c } else { c }));
                }
            }
        }
        Self::normalize(&mut v);
        Ok(GradedScalar { ctx, terms: v })
    }

    /// Product that reorders symbols without Koszul signs. Negative control only.
    pub fn naive_mul(&self, other: &Self) -> Result<Self, RingError> {
        let ctx = self.ctx.join(other.ctx)?;
        let trunc = ctx.trunc as u32;
        let mut v = Vec::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if ma.weight() + mb.weight() > trunc {
                    continue;
                }
                if let Some((m, _)) = ma.mul(mb) {
                    v.push((m, ca.clone() * cb.clone()));
                }
            }
        }
        Self::normalize(&mut v);
        Ok(GradedScalar { ctx, terms: v })
    }

    /// Graded Leibniz extension of symbol-level images. `op_odd` is the parity
    /// of the derivation; `image` returns `None` for symbols it annihilates.
    pub fn derive_with<F>(&self, op_odd: bool, mut image: F) -> Self
    where
        F: FnMut(Sym) -> Option<Self>,
    {
        let mut acc: Vec<(Monomial, C)> = Vec::new();
        let mut cache: HashMap<Sym, Option<Self>> = HashMap::new();
        let ctx = self.ctx;
        for (m, c) in &self.terms {
            let syms = &m.syms;
            let mut prefix_odd = false;
            for k in 0..syms.len() {
                let s = syms[k];
                let img = cache.entry(s).or_insert_with(|| image(s)).clone();
                if let Some(img) = img {
                    if !img.is_zero() {
                        let sign_neg = op_odd && prefix_odd;
                        let pre = Monomial { syms: syms[..k].iter().copied().collect() };
                        let post = Monomial { syms: syms[k + 1..].iter().copied().collect() };
                        for (mi, ci) in &img.terms {
                            let Some((m1, n1)) = pre.mul(mi) else { continue };
                            let Some((m2, n2)) = m1.mul(&post) else { continue };
                            if m2.weight() > ctx.trunc as u32 {
                                continue;
                            }
                            let mut coef = c.clone() * ci.clone();
                            if sign_neg ^ n1 ^ n2 {
                                coef = -coef;
                            }
                            acc.push((m2, coef));
                        }
                    }
                }
                if s.is_odd() {
                    prefix_odd = !prefix_odd;
                }
            }
        }
        Self::normalize(&mut acc);
        GradedScalar { ctx, terms: acc }
    }

    /// Checked derivation: every occurring symbol needs an image of degree
    /// `deg(symbol) + op_degree` (or zero).
    pub fn derive(
        &self,
        images: &HashMap<Sym, GradedScalar<C>>,
        op_degree: i32,
        table: &GeneratorTable,
    ) -> Result<Self, RingError> {
        for (m, _) in &self.terms {
            for s in m.syms() {
                let img = images
                    .get(s)
                    .ok_or_else(|| RingError::MissingImage(table.name(*s).to_string()))?;
                self.ctx.join(img.ctx)?;
                if img.is_zero() {
                    continue;
                }
                let expected = s.degree() as i32 + op_degree;
                match img.homogeneous_degree() {
                    Some(d) if d as i32 == expected => {}
                    found => {
                        return Err(RingError::DegreeMismatch {
                            name: table.name(*s).to_string(),
                            found: found.map(|d| d as i32).unwrap_or(-1),
                            expected,
                        })
                    }
                }
            }
        }
        Ok(self.derive_with(op_degree.rem_euclid(2) == 1, |s| images.get(&s).cloned()))
    }

    /// Algebra morphism replacing symbols by ring elements; unlisted symbols stay.
    pub fn substitute_with<F>(&self, mut assign: F) -> Self
    where
        F: FnMut(Sym) -> Option<Self>,
    {
        let ctx = self.ctx;
        let mut cache: HashMap<Sym, Option<Self>> = HashMap::new();
        let mut out = Self::zero(ctx);
        for (m, c) in &self.terms {
            let mut prod = Self::constant(ctx, c.clone());
            for s in m.syms() {
                let f = cache
                    .entry(*s)
                    .or_insert_with(|| assign(*s))
                    .clone()
                    .unwrap_or_else(|| Self::symbol(ctx, *s));
                prod = prod.try_mul(&f).expect("substitution image from a foreign ring");
                if prod.is_zero() {
                    break;
                }
            }
            out = out.merge(&prod, ctx, false);
        }
        out
    }

    /// Checked substitution: images must be zero or homogeneous of the symbol's degree.
    pub fn substitute(
        &self,
        assign: &HashMap<Sym, GradedScalar<C>>,
        table: &GeneratorTable,
    ) -> Result<Self, RingError> {
        for (s, v) in assign {
            self.ctx.join(v.ctx)?;
            if v.is_zero() {
                continue;
            }
            match v.homogeneous_degree() {
                Some(d) if d == s.degree() as u32 => {}
                found => {
                    return Err(RingError::DegreeMismatch {
                        name: table.name(*s).to_string(),
                        found: found.map(|d| d as i32).unwrap_or(-1),
                        expected: s.degree() as i32,
                    })
                }
            }
        }
        Ok(self.substitute_with(|s| assign.get(&s).cloned()))
    }

    /// Set every symbol matching `kill` to zero.
    pub fn kill<F: Fn(Sym) -> bool>(&self, kill: F) -> Self {
        GradedScalar {
            ctx: self.ctx,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| !m.syms().iter().any(|s| kill(*s)))
                .cloned()
                .collect(),
        }
    }

    /// True when every monomial only uses symbols accepted by `allowed`.
    pub fn uses_only<F: Fn(Sym) -> bool>(&self, allowed: F) -> bool {
        self.terms.iter().all(|(m, _)| m.syms().iter().all(|s| allowed(*s)))
    }

    pub fn display(&self, table: Option<&GeneratorTable>) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                s.push_str(" + ");
            }
            if m.syms().is_empty() {
                s.push_str(&format!("{c}"));
            } else if c.is_one() {
                s.push_str(&m.display(table));
            } else {
                s.push_str(&format!("({c})*{}", m.display(table)));
            }
        }
        s
    }
}

impl<C: Coeff> Add for &GradedScalar<C> {
    type Output = GradedScalar<C>;
    fn add(self, rhs: Self) -> GradedScalar<C> {
        self.try_add(rhs).expect("ring mismatch in addition")
    }
}

impl<C: Coeff> Sub for &GradedScalar<C> {
    type Output = GradedScalar<C>;
    fn sub(self, rhs: Self) -> GradedScalar<C> {
        self.try_sub(rhs).expect("ring mismatch in subtraction")
    }
}

impl<C: Coeff> Mul for &GradedScalar<C> {
    type Output = GradedScalar<C>;
    fn mul(self, rhs: Self) -> GradedScalar<C> {
        self.try_mul(rhs).expect("ring mismatch in multiplication")
    }
}

impl<C: Coeff> Neg for &GradedScalar<C> {
    type Output = GradedScalar<C>;
    fn neg(self) -> GradedScalar<C> {
        GradedScalar {
            ctx: self.ctx,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Q;

    fn q(n: i64) -> Q {
        Q::from(n)
    }

    fn setup() -> (GeneratorTable, Sym, Sym, Sym) {
        let mut t = GeneratorTable::new();
        let a = t.fresh("t1", 1).unwrap();
        let b = t.fresh("t2", 1).unwrap();
        let w = t.fresh("w", 2).unwrap();
        (t, a, b, w)
    }

    #[test]
    fn naive_product_loses_the_sign() {
        let (t, a, b, _) = setup();
        let ctx = t.ctx(6);
        let (sa, sb) = (GradedScalar::<Q>::symbol(ctx, a), GradedScalar::<Q>::symbol(ctx, b));
        assert_eq!(sa.naive_mul(&sb).unwrap(), sb.naive_mul(&sa).unwrap());
        assert_eq!(sa.naive_mul(&sb).unwrap(), &sa * &sb);
        assert_ne!(sb.naive_mul(&sa).unwrap(), &sb * &sa);
    }

    #[test]
    fn koszul_sign_two_odd() {
        let (t, a, b, _) = setup();
        let ctx = t.ctx(6);
        let sa = GradedScalar::<Q>::symbol(ctx, a);
        let sb = GradedScalar::<Q>::symbol(ctx, b);
        let ab = &sa * &sb;
        let ba = &sb * &sa;
        assert_eq!(ba, -&ab);
        assert!((&sa * &sa).is_zero());
    }

    #[test]
    fn mixed_product_matches_hand_expansion() {
        let (t, a, b, w) = setup();
        let ctx = t.ctx(6);
        let lhs = &(&GradedScalar::<Q>::symbol(ctx, a).scale(&q(2)) + &GradedScalar::symbol(ctx, w))
            * &GradedScalar::symbol(ctx, b).scale(&q(3));
        let ab = Monomial::from_product(&[a, b]).unwrap().0;
        let wb = Monomial::from_product(&[w, b]).unwrap().0;
        assert_eq!(lhs.coefficient(&ab), q(6));
        assert_eq!(lhs.coefficient(&wb), q(3));
        assert_eq!(lhs.len(), 2);
    }

    #[test]
    fn truncation_drops_high_degree() {
        let (t, a, _, w) = setup();
        let ctx = t.ctx(4);
        let sw = GradedScalar::<Q>::symbol(ctx, w);
        assert!((&(&sw * &sw) * &GradedScalar::symbol(ctx, a)).is_zero());
        assert!(!(&sw * &sw).is_zero());
    }

    #[test]
    fn infinitesimal_symbols_are_nilpotent() {
        let mut t = GeneratorTable::new();
        let u = t.fresh_infinitesimal("u").unwrap();
        let v = t.fresh("v", 1).unwrap();
        assert_eq!((u.degree(), u.weight(), v.weight()), (0, 1, 1));
        let ctx = t.ctx(3);
        let su = GradedScalar::<Q>::symbol(ctx, u);
        let cube = &(&su * &su) * &su;
        assert!(!cube.is_zero());
        assert!((&cube * &su).is_zero());
        assert!((&cube * &GradedScalar::symbol(ctx, v)).is_zero());
        assert_eq!(cube.homogeneous_degree(), Some(0));
    }

    #[test]
    fn foreign_tables_rejected() {
        let (t1, a, _, _) = setup();
        let (t2, b, _, _) = setup();
        let x = GradedScalar::<Q>::symbol(t1.ctx(6), a);
        let y = GradedScalar::<Q>::symbol(t2.ctx(6), b);
        assert!(matches!(x.try_mul(&y), Err(RingError::TableMismatch(..))));
    }

    #[test]
    fn derive_single_and_leibniz() {
        let (t, a, b, w) = setup();
        let ctx = t.ctx(6);
        let sw = GradedScalar::<Q>::symbol(ctx, w);
        let mut img = HashMap::new();
        img.insert(a, sw.clone());
        img.insert(b, GradedScalar::zero(ctx));
        let da = GradedScalar::symbol(ctx, a).derive(&img, 1, &t).unwrap();
        assert_eq!(da, sw);
        let ab = &GradedScalar::symbol(ctx, a) * &GradedScalar::symbol(ctx, b);
        let dab = ab.derive(&img, 1, &t).unwrap();
        assert_eq!(dab, &sw * &GradedScalar::symbol(ctx, b));
    }

    #[test]
    fn derive_errors() {
        let (t, a, b, w) = setup();
        let ctx = t.ctx(6);
        let mut img = HashMap::new();
        img.insert(a, GradedScalar::<Q>::symbol(ctx, b));
        let x = GradedScalar::symbol(ctx, a);
        assert!(matches!(x.derive(&img, 1, &t), Err(RingError::DegreeMismatch { .. })));
        let y = GradedScalar::<Q>::symbol(ctx, w);
        assert!(matches!(y.derive(&img, 1, &t), Err(RingError::MissingImage(_))));
    }

    #[test]
    fn substitute_kill_and_identity() {
        let (t, a, b, _) = setup();
        let ctx = t.ctx(6);
        let ab = &GradedScalar::<Q>::symbol(ctx, a) * &GradedScalar::symbol(ctx, b);
        let mut kill = HashMap::new();
        kill.insert(a, GradedScalar::zero(ctx));
        assert!(ab.substitute(&kill, &t).unwrap().is_zero());
        assert_eq!(ab.substitute(&HashMap::new(), &t).unwrap(), ab);
        let mut bad = HashMap::new();
        bad.insert(a, GradedScalar::one(ctx));
        assert!(ab.substitute(&bad, &t).is_err());
    }

    #[test]
    fn from_product_sign_and_vanishing() {
        let (_, a, b, w) = setup();
        assert!(Monomial::from_product(&[b, w, a]).unwrap().1);
        assert!(Monomial::from_product(&[a, w, a]).is_none());
    }

    mod laws {
        use super::*;
        use proptest::prelude::*;

        const DEGREES: [u8; 6] = [1, 1, 1, 2, 2, 3];

        fn table() -> (GeneratorTable, Vec<Sym>) {
            let mut t = GeneratorTable::new();
            let syms = DEGREES.iter().enumerate().map(|(i, d)| t.fresh(format!("s{i}"), *d).unwrap()).collect();
            (t, syms)
        }

        fn poly() -> impl Strategy<Value = Vec<(Vec<usize>, i64)>> {
            prop::collection::vec((prop::collection::vec(0usize..6, 0..4), -5i64..6), 0..5)
        }

        fn build(ctx: RingCtx, syms: &[Sym], p: &[(Vec<usize>, i64)]) -> GradedScalar<Q> {
            p.iter().fold(GradedScalar::zero(ctx), |acc, (m, c)| {
                let mono = m.iter().fold(GradedScalar::constant(ctx, q(*c)), |x, &i| &x * &GradedScalar::symbol(ctx, syms[i]));
                &acc + &mono
            })
        }

        /// Homogeneous of the given parity: keep the terms of that parity.
        fn parity_part(x: &GradedScalar<Q>, odd: bool) -> GradedScalar<Q> {
            GradedScalar::from_terms(x.ctx(), x.terms().iter().filter(|(m, _)| m.is_odd() == odd).cloned())
        }

        proptest! {
            #[test]
            fn associative_and_distributive(a in poly(), b in poly(), c in poly()) {
                let (t, syms) = table();
                let ctx = t.ctx(7);
                let (a, b, c) = (build(ctx, &syms, &a), build(ctx, &syms, &b), build(ctx, &syms, &c));
                prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
                prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            }

            #[test]
            fn graded_commutative(a in poly(), b in poly(), pa in any::<bool>(), pb in any::<bool>()) {
                let (t, syms) = table();
                let ctx = t.ctx(7);
                let a = parity_part(&build(ctx, &syms, &a), pa);
                let b = parity_part(&build(ctx, &syms, &b), pb);
                let ba = &b * &a;
                prop_assert_eq!(&a * &b, if pa && pb { -&ba } else { ba });
                if pa {
                    prop_assert!((&a * &a).is_zero());
                }
            }

            #[test]
            fn odd_derivations_obey_leibniz(a in poly(), b in poly(), imgs in prop::collection::vec(poly(), 6), pa in any::<bool>()) {
                let (t, syms) = table();
                let ctx = t.ctx(7);
                let a = parity_part(&build(ctx, &syms, &a), pa);
                let b = build(ctx, &syms, &b);
                // degree-raising images keep the truncation ideal stable
                let images: Vec<GradedScalar<Q>> = imgs.iter().enumerate().map(|(i, p)| {
                    build(ctx, &syms, p).degree_part(syms[i].degree() as u32 + 1)
                }).collect();
                let d = |x: &GradedScalar<Q>| x.derive_with(true, |s| syms.iter().position(|&y| y == s).map(|i| images[i].clone()));
                let lhs = d(&(&a * &b));
                let rhs = &(&d(&a) * &b) + &(if pa { -&(&a * &d(&b)) } else { &a * &d(&b) });
                prop_assert_eq!(lhs, rhs);
            }
        }
    }
}
