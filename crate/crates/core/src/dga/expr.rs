//! Matrix-valued expression trees over registered fields.

use std::fmt;
use std::rc::Rc;

use num_traits::{One, Zero};

use crate::matrix::RMat;
use crate::Q;

/// Leaf index tagged with the id of the store that registered it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LeafId {
    pub store: u64,
    pub idx: usize,
}

pub type FieldId = LeafId;
pub type GroupId = LeafId;

#[derive(Clone)]
pub enum Node {
    Zero,
    Ident,
    /// Constant-shape matrix over the ring (base symbols, parameters).
    Ring(RMat),
    /// Lie-valued generator.
    Field(FieldId),
    /// Group-valued generator or its inverse.
    Group { id: GroupId, inv: bool },
    Add(Vec<Expr>),
    Scale(Q, Expr),
    Prod(Vec<Expr>),
    /// `tau_dot` applied to an 𝔢-valued expression.
    Tau(Expr),
}

pub struct Inner {
    pub node: Node,
    pub odd: bool,
}

/// Shared expression handle; cloning is cheap.
#[derive(Clone)]
pub struct Expr(pub(crate) Rc<Inner>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.node {
            Node::Zero => write!(f, "0"),
            Node::Ident => write!(f, "1"),
            Node::Ring(_) => write!(f, "ring"),
            Node::Field(i) => write!(f, "F{}", i.idx),
            Node::Group { id, inv } => write!(f, "G{}{}", id.idx, if *inv { "^-1" } else { "" }),
            Node::Add(v) => f.debug_tuple("Add").field(v).finish(),
            Node::Scale(c, e) => write!(f, "({c})*{e:?}"),
            Node::Prod(v) => f.debug_tuple("Prod").field(v).finish(),
            Node::Tau(e) => write!(f, "tau({e:?})"),
        }
    }
}

impl Expr {
    fn mk(node: Node, odd: bool) -> Expr {
        Expr(Rc::new(Inner { node, odd }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn is_odd(&self) -> bool {
        self.0.odd
    }

    pub(crate) fn ptr(&self) -> *const Inner {
        Rc::as_ptr(&self.0)
    }

    /// An interior node referenced from more than one place.
    pub(crate) fn is_shared_interior(&self) -> bool {
        Rc::strong_count(&self.0) > 1 && matches!(self.node(), Node::Add(_) | Node::Prod(_) | Node::Scale(..) | Node::Tau(_))
    }

    pub fn zero() -> Expr {
        Expr::mk(Node::Zero, false)
    }

    pub fn ident() -> Expr {
        Expr::mk(Node::Ident, false)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0.node, Node::Zero)
    }

    pub fn ring(m: RMat) -> Expr {
        if m.is_zero() {
            return Expr::zero();
        }
        let odd = m.parity().expect("ring matrix must be homogeneous in parity");
        Expr::mk(Node::Ring(m), odd)
    }

    pub fn field(id: FieldId, odd: bool) -> Expr {
        Expr::mk(Node::Field(id), odd)
    }

    pub fn group(id: GroupId, inv: bool) -> Expr {
        Expr::mk(Node::Group { id, inv }, false)
    }

    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
        let mut v = Vec::new();
        for t in terms {
            match &t.0.node {
                Node::Zero => {}
                Node::Add(inner) => v.extend(inner.iter().cloned()),
                _ => v.push(t),
            }
        }
        match v.len() {
            0 => Expr::zero(),
            1 => v.pop().unwrap(),
            _ => {
                let odd = v[0].is_odd();
                Expr::mk(Node::Add(v), odd)
            }
        }
    }

    pub fn add(&self, o: &Expr) -> Expr {
        Expr::sum([self.clone(), o.clone()])
    }

    pub fn sub(&self, o: &Expr) -> Expr {
        Expr::sum([self.clone(), o.neg()])
    }

    pub fn scale(&self, c: Q) -> Expr {
        if c.is_zero() || self.is_zero() {
            return Expr::zero();
        }
        if c.is_one() {
            return self.clone();
        }
        if let Node::Scale(c0, e) = &self.0.node {
            return e.scale(c0 * c);
        }
        Expr::mk(Node::Scale(c, self.clone()), self.is_odd())
    }

    pub fn neg(&self) -> Expr {
        self.scale(-Q::one())
    }

    pub fn half(&self) -> Expr {
        self.scale(crate::matrix::qf(1, 2))
    }

    pub fn prod(factors: impl IntoIterator<Item = Expr>) -> Expr {
        let mut v = Vec::new();
        let mut coeff = Q::one();
        for t in factors {
            match &t.0.node {
                Node::Zero => return Expr::zero(),
                Node::Ident => {}
                Node::Prod(inner) => v.extend(inner.iter().cloned()),
                Node::Scale(c, e) => {
                    coeff *= c;
                    match &e.0.node {
                        Node::Prod(inner) => v.extend(inner.iter().cloned()),
                        Node::Ident => {}
                        _ => v.push(e.clone()),
                    }
                }
                _ => v.push(t),
            }
        }
        let e = match v.len() {
            0 => Expr::ident(),
            1 => v.pop().unwrap(),
            _ => {
                let odd = v.iter().fold(false, |p, x| p ^ x.is_odd());
                Expr::mk(Node::Prod(v), odd)
            }
        };
        e.scale(coeff)
    }

    pub fn mul(&self, o: &Expr) -> Expr {
        Expr::prod([self.clone(), o.clone()])
    }

    pub fn tau(&self) -> Expr {
        if self.is_zero() {
            return Expr::zero();
        }
        Expr::mk(Node::Tau(self.clone()), self.is_odd())
    }

    /// Graded commutator `ab - (-1)^{|a||b|} ba`; also realizes `.mu.`.
    pub fn comm(&self, o: &Expr) -> Expr {
        let ab = self.mul(o);
        let ba = o.mul(self);
        if self.is_odd() && o.is_odd() {
            ab.add(&ba)
        } else {
            ab.sub(&ba)
        }
    }
}

/// Group-valued expression carried together with its inverse.
#[derive(Clone, Debug)]
pub struct GExpr {
    pub val: Expr,
    pub inv: Expr,
}

impl GExpr {
    pub fn leaf(id: GroupId) -> GExpr {
        GExpr { val: Expr::group(id, false), inv: Expr::group(id, true) }
    }

    pub fn one() -> GExpr {
        GExpr { val: Expr::ident(), inv: Expr::ident() }
    }

    pub fn mul(&self, o: &GExpr) -> GExpr {
        GExpr { val: self.val.mul(&o.val), inv: o.inv.mul(&self.inv) }
    }

    pub fn inverse(&self) -> GExpr {
        GExpr { val: self.inv.clone(), inv: self.val.clone() }
    }

    /// Conjugation `P y P^-1`: `Ad`, `mu_dot` and `mu` in the ambient realization.
    pub fn ad(&self, y: &Expr) -> Expr {
        Expr::prod([self.val.clone(), y.clone(), self.inv.clone()])
    }

    /// `.mu(x, A) = x - A x A^-1`.
    pub fn dot_mu(&self, x: &Expr) -> Expr {
        x.sub(&self.ad(x))
    }

    /// `(1 + aX)` with `aX` even and square zero: exact inverse `1 - aX`.
    pub fn unipotent(nil: &Expr) -> GExpr {
        GExpr { val: Expr::ident().add(nil), inv: Expr::ident().sub(nil) }
    }
}

#[cfg(test)]
impl Expr {
    /// Binary product node without flattening, to vary tree shape in tests.
    pub(crate) fn mk_test_prod2(a: &Expr, b: &Expr) -> Expr {
        Expr::mk(Node::Prod(vec![a.clone(), b.clone()]), a.is_odd() ^ b.is_odd())
    }
}
