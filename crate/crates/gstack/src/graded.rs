//! The Grothendieck construction of a prestack as a category graded by base
//! arrows, its Hochschild complex, and formal sums of graded strings.

use std::collections::BTreeMap;

use crate::basecat::Simplex;
use crate::combinatorics::{sign_of, PathCache};
use crate::gscomplex::{expand, ranges, Key, Lookup, Space, Sym, Val};
use crate::lincat::Mor;
use crate::linalg::{Scalar, SparseMatrix};
use crate::prestack::{Bimodule, Prestack};
use crate::{Error, Result};

/// A morphism of the graded category: over `grading: V -> U`, from `src`
/// in A(V) to `tgt` in A(U), stored as `mor: src -> grading* tgt` in A(V).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GEntry<S: Scalar> {
    pub grading: usize,
    pub src: usize,
    pub tgt: usize,
    pub mor: Mor<S>,
}

/// A composable string of graded morphisms, entry 0 at the target end.
/// `top` records `(base object, object)` of the target so that empty
/// strings still know where they sit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GString<S: Scalar> {
    pub entries: Vec<GEntry<S>>,
    pub top: (usize, usize),
}

/// Integer-weighted formal sum of strings.
pub type GChain<S> = Vec<(i64, GString<S>)>;

impl<S: Scalar> GString<S> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Gradings reversed: the underlying base simplex.
    pub fn simp<T: Scalar>(&self, p: &Prestack<T>) -> Simplex {
        if self.entries.is_empty() {
            return p.base.point(self.top.0);
        }
        p.base.simplex(self.entries.iter().rev().map(|e| e.grading).collect())
    }

    /// `(base object, object)` at the source end.
    pub fn bottom<T: Scalar>(&self, p: &Prestack<T>) -> (usize, usize) {
        match self.entries.last() {
            Some(e) => (p.base.src(e.grading), e.src),
            None => self.top,
        }
    }

    /// `self ⊔ other`: `other` is attached at the source end.
    pub fn concat(&self, other: &GString<S>) -> GString<S> {
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        GString { entries, top: self.top }
    }
}

/// Graded structure of a prestack together with coefficients.
pub struct Graded<'a, S: Scalar> {
    pub p: &'a Prestack<S>,
    pub m: &'a Bimodule<S>,
    pub cache: PathCache,
}

impl<'a, S: Scalar> Graded<'a, S> {
    pub fn new(p: &'a Prestack<S>, m: &'a Bimodule<S>) -> Self {
        Graded { p, m, cache: PathCache::default() }
    }

    /// `dim Ã_u(x, y) = dim A(V)(x, u* y)`.
    pub fn hom_dim(&self, u: usize, x: usize, y: usize) -> usize {
        self.p.fibers[self.p.base.src(u)].dim(x, self.p.restrict_obj(u, y))
    }

    pub fn basis_entry(&self, u: usize, x: usize, y: usize, i: usize) -> GEntry<S> {
        let fib = &self.p.fibers[self.p.base.src(u)];
        GEntry { grading: u, src: x, tgt: y, mor: fib.basis(x, self.p.restrict_obj(u, y), i) }
    }

    /// `id^A` over the identity of `u`.
    pub fn ident(&self, u: usize, x: usize) -> GEntry<S> {
        GEntry { grading: self.p.base.identities[u], src: x, tgt: x, mor: self.p.fibers[u].identity(x) }
    }

    /// `mu(b, a) = tau(v, u)_C . v*(b) . a` for `a` over `v`, `b` over `u`.
    pub fn mu(&self, b: &GEntry<S>, a: &GEntry<S>) -> GEntry<S> {
        assert_eq!(a.tgt, b.src, "graded composition of non-composable morphisms");
        let p = self.p;
        let (u, v) = (b.grading, a.grading);
        let fib = &p.fibers[p.base.src(v)];
        let t = p.twist(v, u, b.tgt);
        let m = fib.compose(&t, &fib.compose(&p.restrict_mor(v, &b.mor), &a.mor));
        GEntry { grading: p.base.compose(u, v), src: a.src, tgt: b.tgt, mor: m }
    }

    /// Associativity and units of `mu` on all basis triples.
    pub fn validate(&self) -> Result<()> {
        let p = self.p;
        let b = &p.base;
        let err = |m: String| Err(Error::Invalid(format!("graded category: {m}")));
        let basis = |u: usize, x: usize, y: usize| -> Vec<GEntry<S>> {
            (0..self.hom_dim(u, x, y)).map(|i| self.basis_entry(u, x, y, i)).collect()
        };
        for w in 0..b.n_arrows() {
            for v in 0..b.n_arrows() {
                if b.tgt(w) != b.src(v) {
                    continue;
                }
                for u in 0..b.n_arrows() {
                    if b.tgt(v) != b.src(u) {
                        continue;
                    }
                    for a0 in 0..p.fibers[b.src(w)].objects {
                        for a1 in 0..p.fibers[b.tgt(w)].objects {
                            for a2 in 0..p.fibers[b.tgt(v)].objects {
                                for a3 in 0..p.fibers[b.tgt(u)].objects {
                                    for x in basis(w, a0, a1) {
                                        for y in basis(v, a1, a2) {
                                            for z in basis(u, a2, a3) {
                                                if self.mu(&z, &self.mu(&y, &x)) != self.mu(&self.mu(&z, &y), &x) {
                                                    return err(format!("associativity fails over arrows ({w},{v},{u})"));
                                                }
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        for u in 0..b.n_arrows() {
            for x in 0..p.fibers[b.src(u)].objects {
                for y in 0..p.fibers[b.tgt(u)].objects {
                    for a in basis(u, x, y) {
                        let l = self.mu(&self.ident(b.tgt(u), y), &a);
                        let r = self.mu(&a, &self.ident(b.src(u), x));
                        if l != a || r != a {
                            return err(format!("unit law fails over arrow {u}"));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// `dim M̃_{total}(A_0, A_n) = dim M^{U_0}(A_0, total* A_n)`.
    pub fn value_dim(&self, s: &Simplex, a0: usize, an: usize) -> usize {
        self.m.dim(s.start, a0, self.p.word_obj(&[self.p.base.total(s)], an))
    }

    pub fn space(&self, n: usize) -> Space {
        let (p, b) = (self.p, &self.p.base);
        let mut entries = Vec::new();
        for s in b.nerve(n) {
            let obj_counts: Vec<usize> = (0..=n).map(|i| p.fibers[b.vertex(&s, i)].objects).collect();
            for objs in ranges(&obj_counts) {
                let hd: Vec<usize> = (1..=n).map(|i| self.hom_dim(s.arrows[n - i], objs[n - i], objs[n + 1 - i])).collect();
                if hd.iter().any(|&d| d == 0) {
                    continue;
                }
                let d = self.value_dim(&s, objs[0], objs[n]);
                if d == 0 {
                    continue;
                }
                for basis in ranges(&hd) {
                    entries.push((Key { simplex: s.clone(), objs: objs.clone(), basis }, d));
                }
            }
        }
        Space::new(n, entries)
    }

    /// Basis string named by a key.
    pub fn key_string(&self, k: &Key) -> GString<S> {
        let n = k.basis.len();
        let entries = (1..=n)
            .map(|i| self.basis_entry(k.simplex.arrows[n - i], k.objs[n - i], k.objs[n + 1 - i], k.basis[i - 1]))
            .collect();
        GString { entries, top: (self.p.base.end(&k.simplex), k.objs[n]) }
    }

    /// Evaluate a cochain on one string by multilinear expansion.
    pub fn psi<V: Val<S>>(&self, inp: Lookup<V>, s: &GString<S>) -> V {
        let simp = s.simp(self.p);
        let (_, a0) = s.bottom(self.p);
        let dim = self.value_dim(&simp, a0, s.top.1);
        let args: Vec<Mor<S>> = s.entries.iter().map(|e| Mor { src: e.src, tgt: e.tgt, v: e.mor.v.clone() }).collect();
        expand(inp, &simp, &args, s.top.1, dim)
    }

    /// Linear extension over a formal sum; strings of other lengths count
    /// as zero.
    pub fn eval_chain<V: Val<S>>(&self, inp: Lookup<V>, c: &GChain<S>, degree: usize, dim: usize) -> V {
        let mut out = V::zeros(dim);
        for (coef, s) in c {
            if s.len() == degree {
                out.add_scaled(&S::from_i64(*coef), &self.psi(inp, s));
            }
        }
        out
    }

    /// Left action `rho(b, m)`: `m` over `v: U_0 -> V`, `b` over `u: V -> U`.
    pub fn rho_left<V: Val<S>>(&self, b: &GEntry<S>, v_arrow: usize, a0: usize, m: &V) -> V {
        let p = self.p;
        let u0 = p.base.src(v_arrow);
        let fib = &p.fibers[u0];
        let t = p.twist(v_arrow, b.grading, b.tgt);
        let act = fib.compose(&t, &p.restrict_mor(v_arrow, &b.mor));
        m.map(&self.m.left_matrix(u0, &act, a0))
    }

    /// Right action `rho(m, a)`: `m` over `v: V -> U` from `B` to `C`, `a`
    /// over `w: W -> V`.
    pub fn rho_right<V: Val<S>>(&self, m: &V, v_arrow: usize, c: usize, a: &GEntry<S>) -> V {
        let p = self.p;
        let w = a.grading;
        let uw = p.base.src(w);
        let bobj = a.tgt;
        let vc = p.restrict_obj(v_arrow, c);
        let r = m.map(&self.m.restr_matrix(p, w, bobj, vc));
        let t = p.twist(w, v_arrow, c);
        let r = r.map(&self.m.left_matrix(uw, &t, p.restrict_obj(w, bobj)));
        let z = p.word_obj(&[p.base.compose(v_arrow, w)], c);
        r.map(&self.m.right_matrix(p, uw, &a.mor, z))
    }

    /// Face `d_i` of a string of length `n >= 1`.
    pub fn face(&self, s: &GString<S>, i: usize) -> Result<GString<S>> {
        let n = s.len();
        if n == 0 || i > n {
            return Err(Error::Shape(format!("face {i} of a string of length {n}")));
        }
        let mut e = s.entries.clone();
        let top = if i == 0 {
            let first = e.remove(0);
            (self.p.base.src(first.grading), first.src)
        } else if i == n {
            e.pop();
            s.top
        } else {
            let m = self.mu(&e[i - 1], &e[i]);
            e.splice(i - 1..=i, [m]);
            s.top
        };
        Ok(GString { entries: e, top })
    }

    /// `(delta Psi)` at an output key of degree n+1.
    pub fn delta_at<V: Val<S>>(&self, inp: Lookup<V>, k: &Key) -> V {
        let s = self.key_string(k);
        let n1 = s.len();
        let dim = self.value_dim(&k.simplex, k.objs[0], k.objs[n1]);
        let mut out = V::zeros(dim);
        if n1 == 0 {
            return out;
        }
        let p = self.p;
        let a0 = k.objs[0];
        // i = 0
        {
            let rest = self.face(&s, 0).unwrap();
            let v = self.psi(inp, &rest);
            let varrow = p.base.total(&rest.simp(p));
            out.add_scaled(&S::one(), &self.rho_left(&s.entries[0], varrow, a0, &v));
        }
        for i in 1..n1 {
            let v = self.psi(inp, &self.face(&s, i).unwrap());
            out.add_scaled(&S::from_i64(sign_of(i % 2 == 1)), &v);
        }
        {
            let rest = self.face(&s, n1).unwrap();
            let v = self.psi(inp, &rest);
            let varrow = p.base.total(&rest.simp(p));
            let r = self.rho_right(&v, varrow, s.top.1, &s.entries[n1 - 1]);
            out.add_scaled(&S::from_i64(sign_of(n1 % 2 == 1)), &r);
        }
        out
    }

    pub fn assemble(&self, src: &Space, dst: &Space, op: &dyn Fn(Lookup<Sym<S>>, &Key) -> Sym<S>) -> SparseMatrix<S> {
        let look = |k: &Key| src.sym::<S>(k);
        let mut rows = Vec::with_capacity(dst.total);
        for k in &dst.keys {
            rows.extend(op(&look, k).0);
        }
        SparseMatrix::from_rows(src.total, rows)
    }

    /// Matrix of `delta: C^{n-1} -> C^n`.
    pub fn delta_matrix(&self, n: usize) -> SparseMatrix<S> {
        let (src, dst) = (self.space(n - 1), self.space(n));
        self.assemble(&src, &dst, &|l, k| self.delta_at(l, k))
    }

    pub fn delta_apply(&self, src: &Space, dst: &Space, x: &[S]) -> Vec<S> {
        let look = |k: &Key| src.slice(x, k);
        let mut out = Vec::with_capacity(dst.total);
        for k in &dst.keys {
            out.extend(self.delta_at::<Vec<S>>(&look, k));
        }
        out
    }
}

/// Basis-string terms of one string after multilinear expansion.
pub fn string_terms<S: Scalar>(g: &Graded<S>, s: &GString<S>) -> Vec<(Key, S)> {
    let simp = s.simp(g.p);
    let objs: Vec<usize> = s.entries.iter().rev().map(|e| e.src).chain([s.top.1]).collect();
    let supports: Vec<Vec<(usize, S)>> = s.entries.iter().map(|e| e.mor.support().map(|(i, c)| (i, c.clone())).collect()).collect();
    let mut out = vec![(Key { simplex: simp.clone(), objs: objs.clone(), basis: vec![] }, S::one())];
    for sup in &supports {
        let mut next = Vec::with_capacity(out.len() * sup.len());
        for (k, c) in &out {
            for (i, ci) in sup {
                let mut k2 = k.clone();
                k2.basis.push(*i);
                next.push((k2, c.mul(ci)));
            }
        }
        out = next;
    }
    out
}

/// Expand a formal sum into coefficients on basis strings. Two sums agree
/// modulo multilinearity iff their expansions agree.
pub fn expand_chain<S: Scalar>(g: &Graded<S>, c: &GChain<S>) -> BTreeMap<Key, S> {
    let mut out: BTreeMap<Key, S> = BTreeMap::new();
    for (coef, s) in c {
        for (k, v) in string_terms(g, s) {
            let e = out.entry(k).or_insert_with(S::zero);
            *e = e.add(&v.mul(&S::from_i64(*coef)));
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::Q;
    use crate::prestack::diagonal_bimodule;

    #[test]
    fn grothendieck_of_fixtures_is_associative() {
        for (name, p) in fixtures::all::<Q>() {
            let m = diagonal_bimodule(&p);
            Graded::new(&p, &m).validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn incoherent_twist_breaks_associativity() {
        let p = fixtures::scalar_twist_3chain_incoherent::<Q>();
        let m = diagonal_bimodule(&p);
        assert!(Graded::new(&p, &m).validate().is_err());
    }

    #[test]
    fn triv_a2_hom_ranks() {
        let p = fixtures::triv_a2::<Q>();
        let m = diagonal_bimodule(&p);
        let g = Graded::new(&p, &m);
        for u in 0..3 {
            assert_eq!(g.hom_dim(u, 0, 0), 1);
        }
    }

    #[test]
    fn delta_squares_to_zero_small() {
        for (name, p) in fixtures::all::<Q>() {
            let m = diagonal_bimodule(&p);
            let g = Graded::new(&p, &m);
            for n in 1..3 {
                assert!(g.delta_matrix(n + 1).mul(&g.delta_matrix(n)).is_zero(), "{name} at {n}");
            }
        }
    }

    #[test]
    fn faces_commute() {
        let p = fixtures::rank2_fiber::<Q>();
        let m = diagonal_bimodule(&p);
        let g = Graded::new(&p, &m);
        let sp = g.space(3);
        for k in sp.keys.iter().step_by(37) {
            let s = g.key_string(k);
            for j in 1..=3 {
                for i in 0..j {
                    let a = g.face(&g.face(&s, j).unwrap(), i).unwrap();
                    let b = g.face(&g.face(&s, i).unwrap(), j - 1).unwrap();
                    assert_eq!(a, b);
                }
            }
        }
        let empty = GString::<Q> { entries: vec![], top: (0, 0) };
        assert!(g.face(&empty, 0).is_err());
    }
}
