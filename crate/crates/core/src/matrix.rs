//! Square matrices over the rationals and over the graded ring.

use std::fmt;

use num_traits::{One, Zero};

use crate::superring::{RingCtx, Sym};
use crate::{Scalar, Q};

pub fn q(n: i64) -> Q {
    Q::from(n)
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

/// Dense `n x n` rational matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QMat {
    n: usize,
    data: Vec<Q>,
}

impl fmt::Debug for QMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.n {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for QMat {
    type Output = Q;
    fn index(&self, (i, j): (usize, usize)) -> &Q {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Q {
        &mut self.data[i * self.n + j]
    }
}

impl QMat {
    pub fn zero(n: usize) -> Self {
        QMat { n, data: vec![Q::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m[(i, i)] = Q::one();
        }
        m
    }

    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zero(n);
        m[(i, j)] = Q::one();
        m
    }

    pub fn from_rows(rows: &[Vec<Q>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        QMat { n, data: rows.iter().flatten().cloned().collect() }
    }

    pub fn from_ints(rows: &[&[i64]]) -> Self {
        let v: Vec<Vec<Q>> = rows.iter().map(|r| r.iter().map(|x| q(*x)).collect()).collect();
        Self::from_rows(&v)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[Q] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn add(&self, o: &QMat) -> QMat {
        QMat { n: self.n, data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &QMat) -> QMat {
        QMat { n: self.n, data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, c: &Q) -> QMat {
        QMat { n: self.n, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn mul(&self, o: &QMat) -> QMat {
        let n = self.n;
        let mut out = QMat::zero(n);
        for i in 0..n {
            for k in 0..n {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &o[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn commutator(&self, o: &QMat) -> QMat {
        self.mul(o).sub(&o.mul(self))
    }

    /// Gauss-Jordan inverse; `None` when singular.
    pub fn inverse(&self) -> Option<QMat> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = QMat::identity(n);
        for col in 0..n {
            let piv = (col..n).find(|&r| !a[(r, col)].is_zero())?;
            if piv != col {
                for j in 0..n {
                    a.data.swap(piv * n + j, col * n + j);
                    inv.data.swap(piv * n + j, col * n + j);
                }
            }
            let p = a[(col, col)].clone();
            for j in 0..n {
                a[(col, j)] = &a[(col, j)] / &p;
                inv[(col, j)] = &inv[(col, j)] / &p;
            }
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let f = a[(r, col)].clone();
                for j in 0..n {
                    let t = &a[(col, j)] * &f;
                    a[(r, j)] -= t;
                    let t = &inv[(col, j)] * &f;
                    inv[(r, j)] -= t;
                }
            }
        }
        Some(inv)
    }

    /// Exponential of a nilpotent matrix; `None` if not nilpotent.
    pub fn exp_nilpotent(&self) -> Option<QMat> {
        let n = self.n;
        let mut out = QMat::identity(n);
        let mut term = QMat::identity(n);
        for k in 1..=n {
            term = term.mul(self).scale(&qf(1, k as i64));
            if term.is_zero() {
                return Some(out);
            }
            out = out.add(&term);
        }
        term = term.mul(self);
        term.is_zero().then_some(out)
    }

    pub fn is_nilpotent(&self) -> bool {
        let mut p = self.clone();
        for _ in 0..self.n {
            p = p.mul(self);
        }
        p.is_zero()
    }

    /// Integer diagonal entries if the matrix is diagonal with integer entries.
    pub fn integer_diagonal(&self) -> Option<Vec<i64>> {
        let n = self.n;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            for j in 0..n {
                if i != j && !self[(i, j)].is_zero() {
                    return None;
                }
            }
            let d = &self[(i, i)];
            out.push(d.to_i64()?);
        }
        Some(out)
    }

    pub fn to_ring(&self, ctx: RingCtx) -> RMat {
        RMat {
            n: self.n,
            ctx,
            data: self.data.iter().map(|c| Scalar::constant(ctx, c.clone())).collect(),
        }
    }
}

/// Dense matrix with graded-ring entries.
#[derive(Clone, PartialEq)]
pub struct RMat {
    n: usize,
    ctx: RingCtx,
    data: Vec<Scalar>,
}

impl fmt::Debug for RMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.data)
    }
}

impl std::ops::Index<(usize, usize)> for RMat {
    type Output = Scalar;
    fn index(&self, (i, j): (usize, usize)) -> &Scalar {
        &self.data[i * self.n + j]
    }
}

impl RMat {
    pub fn zero(ctx: RingCtx, n: usize) -> Self {
        RMat { n, ctx, data: vec![Scalar::zero(ctx); n * n] }
    }

    pub fn identity(ctx: RingCtx, n: usize) -> Self {
        QMat::identity(n).to_ring(ctx)
    }

    pub fn from_entries(ctx: RingCtx, n: usize, data: Vec<Scalar>) -> Self {
        assert_eq!(data.len(), n * n);
        RMat { n, ctx, data }
    }

    /// `sum_a c_a * basis_a`.
    pub fn combination(ctx: RingCtx, n: usize, coeffs: &[Scalar], basis: &[QMat]) -> Self {
        let mut out = RMat::zero(ctx, n);
        for (c, b) in coeffs.iter().zip(basis) {
            if c.is_zero() {
                continue;
            }
            for (k, e) in b.data.iter().enumerate() {
                if !e.is_zero() {
                    out.data[k] = &out.data[k] + &c.scale(e);
                }
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ctx(&self) -> RingCtx {
        self.ctx
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.data
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.data[i * self.n + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Parity shared by all entries, `None` if mixed.
    pub fn parity(&self) -> Option<bool> {
        let mut p: Option<bool> = None;
        for e in &self.data {
            if e.is_zero() {
                continue;
            }
            let ep = e.parity()?;
            match p {
                None => p = Some(ep),
                Some(x) if x != ep => return None,
                _ => {}
            }
        }
        Some(p.unwrap_or(false))
    }

    pub fn map(&self, f: impl Fn(&Scalar) -> Scalar) -> RMat {
        RMat { n: self.n, ctx: self.ctx, data: self.data.iter().map(f).collect() }
    }

    pub fn add(&self, o: &RMat) -> RMat {
        RMat {
            n: self.n,
            ctx: self.ctx.join(o.ctx).expect("ring mismatch"),
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &RMat) -> RMat {
        RMat {
            n: self.n,
            ctx: self.ctx.join(o.ctx).expect("ring mismatch"),
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn neg(&self) -> RMat {
        self.map(|a| -a)
    }

    pub fn scale(&self, c: &Q) -> RMat {
        self.map(|a| a.scale(c))
    }

    /// Left multiplication of every entry by a ring scalar.
    pub fn lmul_scalar(&self, s: &Scalar) -> RMat {
        self.map(|a| s * a)
    }

    pub fn mul(&self, o: &RMat) -> RMat {
        let n = self.n;
        let ctx = self.ctx.join(o.ctx).expect("ring mismatch");
        let mut data = vec![Scalar::zero(ctx); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = &self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &o.data[k * n + j];
                    if !b.is_zero() {
                        data[i * n + j] = &data[i * n + j] + &(a * b);
                    }
                }
            }
        }
        RMat { n, ctx, data }
    }

    pub fn mul_q_left(&self, m: &QMat) -> RMat {
        m.to_ring(self.ctx).mul(self)
    }

    pub fn mul_q_right(&self, m: &QMat) -> RMat {
        self.mul(&m.to_ring(self.ctx))
    }

    pub fn kill(&self, k: &dyn Fn(Sym) -> bool) -> RMat {
        self.map(|a| a.kill(k))
    }

    /// `exp` of a matrix whose entries have no constant term.
    pub fn exp_nilpotent(&self) -> RMat {
        let n = self.n;
        let mut out = RMat::identity(self.ctx, n);
        let mut term = out.clone();
        let mut k = 1i64;
        loop {
            term = term.mul(self).scale(&qf(1, k));
            if term.is_zero() {
                return out;
            }
            out = out.add(&term);
            k += 1;
            assert!(k < 64, "exp of a non-nilpotent ring matrix");
        }
    }

    /// `log(1 + x)` of a unipotent ring matrix `1 + x` with nilpotent `x`.
    pub fn log_unipotent(&self) -> RMat {
        let n = self.n;
        let x = self.sub(&RMat::identity(self.ctx, n));
        let mut out = RMat::zero(self.ctx, n);
        let mut pow = x.clone();
        let mut k = 1i64;
        while !pow.is_zero() {
            let c = if k % 2 == 1 { qf(1, k) } else { qf(-1, k) };
            out = out.add(&pow.scale(&c));
            pow = pow.mul(&x);
            k += 1;
            assert!(k < 64, "log of a non-unipotent ring matrix");
        }
        out
    }

    /// First nonzero entry as (row, col, entry).
    pub fn first_nonzero(&self) -> Option<(usize, usize, &Scalar)> {
        self.data
            .iter()
            .enumerate()
            .find(|(_, e)| !e.is_zero())
            .map(|(k, e)| (k / self.n, k % self.n, e))
    }
}

/// Coordinates of matrices with respect to a linearly independent basis.
#[derive(Clone, Debug)]
pub struct Decomposer {
    n: usize,
    pivots: Vec<usize>,
    /// rows: basis index, columns: pivot position
    solve: Vec<Vec<Q>>,
}

impl Decomposer {
    /// `None` if the basis is linearly dependent.
    pub fn new(n: usize, basis: &[QMat]) -> Option<Self> {
        let k = basis.len();
        // Row-reduce the k x n^2 matrix whose rows are the flattened basis.
        let mut rows: Vec<Vec<Q>> = basis.iter().map(|b| b.data.clone()).collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..n * n {
            if r == k {
                break;
            }
            let Some(p) = (r..k).find(|&i| !rows[i][col].is_zero()) else { continue };
            rows.swap(r, p);
            let pv = rows[r][col].clone();
            for x in rows[r].iter_mut() {
                *x = &*x / &pv;
            }
            for i in 0..k {
                if i != r && !rows[i][col].is_zero() {
                    let f = rows[i][col].clone();
                    let pr = rows[r].clone();
                    for (x, y) in rows[i].iter_mut().zip(pr) {
                        *x -= y * &f;
                    }
                }
            }
            pivots.push(col);
            r += 1;
        }
        if pivots.len() < k {
            return None;
        }
        // Square system: S[a][p] = basis[a][pivot p]; coefficients c solve c^T S = m[pivots].
        let s = QMat::from_rows(
            &(0..k).map(|a| pivots.iter().map(|&p| basis[a].data[p].clone()).collect()).collect::<Vec<_>>(),
        );
        let inv = if k == 0 { QMat::zero(0) } else { s.inverse()? };
        // c_a = sum_p m_p * inv[p][a]
        let solve = (0..k).map(|a| (0..k).map(|p| inv[(p, a)].clone()).collect()).collect();
        Some(Decomposer { n, pivots, solve })
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn coords_q(&self, m: &QMat) -> Vec<Q> {
        self.solve
            .iter()
            .map(|row| row.iter().zip(&self.pivots).map(|(c, &p)| c * &m.data[p]).sum())
            .collect()
    }

    pub fn coords(&self, m: &RMat) -> Vec<Scalar> {
        self.solve
            .iter()
            .map(|row| {
                let mut acc = Scalar::zero(m.ctx);
                for (c, &p) in row.iter().zip(&self.pivots) {
                    if !c.is_zero() {
                        acc = &acc + &m.data[p].scale(c);
                    }
                }
                acc
            })
            .collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superring::GeneratorTable;

    #[test]
    fn inverse_roundtrip() {
        let m = QMat::from_rows(&[vec![q(2), q(1)], vec![q(0), qf(1, 3)]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), QMat::identity(2));
        assert!(QMat::from_ints(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    #[test]
    fn nilpotent_exponential() {
        let n = QMat::from_ints(&[&[0, 1, 2], &[0, 0, 3], &[0, 0, 0]]);
        let e = n.exp_nilpotent().unwrap();
        // 1 + N + N^2/2, N^2 has a single entry 3 at (0,2)
        assert_eq!(e, QMat::from_rows(&[
            vec![q(1), q(1), qf(7, 2)],
            vec![q(0), q(1), q(3)],
            vec![q(0), q(0), q(1)],
        ]));
        assert!(QMat::identity(2).exp_nilpotent().is_none());
    }

    #[test]
    fn decomposer_coordinates() {
        let basis = vec![QMat::identity(2), QMat::unit(2, 0, 0), QMat::unit(2, 0, 1)];
        let d = Decomposer::new(2, &basis).unwrap();
        let m = QMat::from_rows(&[vec![q(5), q(7)], vec![q(0), q(2)]]);
        assert_eq!(d.coords_q(&m), vec![q(2), q(3), q(7)]);
        assert!(Decomposer::new(2, &[QMat::unit(2, 0, 0), QMat::unit(2, 0, 0)]).is_none());
    }

    #[test]
    fn ring_log_inverts_exp() {
        let mut t = GeneratorTable::new();
        let w = t.fresh("w", 2).unwrap();
        let ctx = t.ctx(6);
        let s = Scalar::symbol(ctx, w);
        let basis = [QMat::unit(2, 0, 1), QMat::unit(2, 0, 0)];
        let x = RMat::combination(ctx, 2, &[s.clone(), s], &basis);
        assert_eq!(x.exp_nilpotent().log_unipotent(), x);
    }
}
