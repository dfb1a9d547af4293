//! Prestacks over a finite base: fibres, restriction functors, twists,
//! the bimodule of coefficients and the file format.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::basecat::{BaseCategory, Simplex};
use crate::lincat::{check_natural, LinFunctor, LinearCategory, Mor};
use crate::linalg::{axpy, zeros, Dense, Scalar};
use crate::{Error, Result};

/// Contravariant pseudofunctor from the base into linear categories.
///
/// `restr[u]` for `u: V -> U` maps A(U) to A(V). Twists are keyed by pairs
/// `(f, g)` of composable arrows `f: X -> Y`, `g: Y -> Z`; the component at
/// `C` in A(Z) is a morphism `f* g* C -> (g f)* C` in A(X).
#[derive(Clone, Debug)]
pub struct Prestack<S: Scalar> {
    pub base: BaseCategory,
    pub fibers: Vec<LinearCategory<S>>,
    pub restr: Vec<LinFunctor<S>>,
    pub twists: HashMap<(usize, usize), Vec<Mor<S>>>,
}

/// `pre . tau(f, g) . post`, a whiskered twist. Words are read as functor
/// composites `w_1* w_2* ... w_m*` (last arrow applied first).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Whisker {
    pub pre: Vec<usize>,
    pub f: usize,
    pub g: usize,
    pub post: Vec<usize>,
}

impl Whisker {
    pub fn source_word(&self) -> Vec<usize> {
        let mut w = self.pre.clone();
        w.extend([self.f, self.g]);
        w.extend(&self.post);
        w
    }

    pub fn target_word(&self, base: &BaseCategory) -> Vec<usize> {
        let mut w = self.pre.clone();
        w.push(base.compose(self.g, self.f));
        w.extend(&self.post);
        w
    }

    /// `eps^{gamma, i}` for 1 <= i < len(gamma).
    pub fn epsilon(gamma: &[usize], i: usize) -> Whisker {
        Whisker { pre: gamma[..i - 1].to_vec(), f: gamma[i - 1], g: gamma[i], post: gamma[i + 1..].to_vec() }
    }
}

impl<S: Scalar> Prestack<S> {
    /// Fibre of base object `u`.
    pub fn fiber(&self, u: usize) -> &LinearCategory<S> {
        &self.fibers[u]
    }

    pub fn restrict_obj(&self, u: usize, c: usize) -> usize {
        self.restr[u].obj[c]
    }

    pub fn restrict_mor(&self, u: usize, m: &Mor<S>) -> Mor<S> {
        self.restr[u].apply(&self.fibers[self.base.src(u)], m)
    }

    pub fn word_obj(&self, word: &[usize], c: usize) -> usize {
        word.iter().rev().fold(c, |c, &u| self.restrict_obj(u, c))
    }

    pub fn word_mor(&self, word: &[usize], m: &Mor<S>) -> Mor<S> {
        word.iter().rev().fold(m.clone(), |m, &u| self.restrict_mor(u, &m))
    }

    /// Component of `tau(f, g)` at `c`.
    pub fn twist(&self, f: usize, g: usize, c: usize) -> Mor<S> {
        let b = &self.base;
        if b.is_identity(f) || b.is_identity(g) {
            let x = self.word_obj(&[f, g], c);
            return self.fibers[b.src(f)].identity(x);
        }
        self.twists[&(f, g)][c].clone()
    }

    pub fn whisker(&self, w: &Whisker, c: usize) -> Mor<S> {
        let d = self.word_obj(&w.post, c);
        self.word_mor(&w.pre, &self.twist(w.f, w.g, d))
    }

    /// `c^{sigma,k}: (L_k sigma)* (R_k sigma)* -> sigma*` at `c`, identity
    /// for k = 0 and k = p.
    pub fn c_split(&self, s: &Simplex, k: usize, c: usize) -> Mor<S> {
        let p = s.arrows.len();
        let b = &self.base;
        if k == 0 || k == p {
            let x = self.word_obj(&[b.total(s)], c);
            return self.fibers[s.start].identity(x);
        }
        let f = b.composite(&s.arrows[..k]).unwrap();
        let g = b.composite(&s.arrows[k..]).unwrap();
        self.twist(f, g, c)
    }

    /// Identity prestack data: every restriction is an identity functor and
    /// every twist an identity. Only meaningful when all fibres are the same
    /// category.
    pub fn constant(base: BaseCategory, fiber: LinearCategory<S>) -> Self {
        let fibers = vec![fiber.clone(); base.objects];
        let restr = (0..base.n_arrows()).map(|_| LinFunctor::identity(&fiber)).collect();
        let mut p = Prestack { base, fibers, restr, twists: HashMap::new() };
        p.fill_identity_twists().expect("constant prestack");
        p
    }

    /// Insert identity twists for every composable non-identity pair that has
    /// none yet.
    pub fn fill_identity_twists(&mut self) -> Result<()> {
        let b = self.base.clone();
        for (g, f, h) in b.compose_triples() {
            if b.is_identity(f) || b.is_identity(g) || self.twists.contains_key(&(f, g)) {
                continue;
            }
            let fib = &self.fibers[b.src(f)];
            let mut comps = Vec::new();
            for c in 0..self.fibers[b.tgt(g)].objects {
                let (x, y) = (self.word_obj(&[f, g], c), self.word_obj(&[h], c));
                if x != y {
                    return Err(Error::Invalid(format!(
                        "no twist given for ({f},{g}) and f*g* differs from (gf)* on object {c}"
                    )));
                }
                comps.push(fib.identity(x));
            }
            self.twists.insert((f, g), comps);
        }
        Ok(())
    }

    /// Check every prestack axiom; the message names the first failure.
    pub fn validate(&self) -> Result<()> {
        let b = &self.base;
        let inv = |m: String| Err(Error::Invalid(m));
        b.validate()?;
        if self.fibers.len() != b.objects || self.restr.len() != b.n_arrows() {
            return inv("need one fibre per object and one restriction per arrow".into());
        }
        for (u, f) in self.fibers.iter().enumerate() {
            f.validate().map_err(|e| Error::Invalid(format!("fibre {u}: {e}")))?;
        }
        for u in 0..b.n_arrows() {
            let (src, tgt) = (&self.fibers[b.src(u)], &self.fibers[b.tgt(u)]);
            self.restr[u].validate(tgt, src).map_err(|e| Error::Invalid(format!("restriction along arrow {u}: {e}")))?;
            if b.is_identity(u) && !self.restr[u].is_identity(tgt) {
                return inv(format!("restriction along identity arrow {u} is not the identity"));
            }
        }
        for (g, f, h) in b.compose_triples() {
            let (xf, zg) = (b.src(f), b.tgt(g));
            let (fx, fz) = (&self.fibers[xf], &self.fibers[zg]);
            if !(b.is_identity(f) || b.is_identity(g)) {
                let Some(comps) = self.twists.get(&(f, g)) else {
                    return inv(format!("missing twist for pair ({f},{g})"));
                };
                if comps.len() != fz.objects {
                    return inv(format!("twist ({f},{g}) needs {} components", fz.objects));
                }
            }
            for c in 0..fz.objects {
                let t = self.twist(f, g, c);
                let (x, y) = (self.word_obj(&[f, g], c), self.word_obj(&[h], c));
                if (t.src, t.tgt) != (x, y) || t.v.len() != fx.dim(x, y) {
                    return inv(format!("twist ({f},{g}) at object {c} has wrong type"));
                }
                if fx.inverse(&t).is_none() {
                    return inv(format!("twist ({f},{g}) at object {c} is not invertible"));
                }
            }
            check_natural(
                fz,
                fx,
                &|a| self.word_mor(&[f, g], a),
                &|a| self.word_mor(&[h], a),
                &|c| self.twist(f, g, c),
            )
            .map_err(|e| Error::Invalid(format!("twist ({f},{g}): {e}")))?;
        }
        // coherence on composable triples w, v, u (w first)
        for (v, w, vw) in b.compose_triples() {
            for u in 0..b.n_arrows() {
                if b.src(u) != b.tgt(v) {
                    continue;
                }
                let uv = b.compose(u, v);
                let fx = &self.fibers[b.src(w)];
                for c in 0..self.fibers[b.tgt(u)].objects {
                    let lhs = fx.compose(&self.twist(vw, u, c), &self.twist(w, v, self.restrict_obj(u, c)));
                    let rhs = fx.compose(&self.twist(w, uv, c), &self.restrict_mor(w, &self.twist(v, u, c)));
                    if lhs != rhs {
                        return inv(format!("coherence fails for arrows ({w},{v},{u}) at object {c}"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Do all fibres have identities that are multiples of basis vectors?
    pub fn identities_are_basic(&self) -> bool {
        self.fibers.iter().all(|f| (0..f.objects).all(|x| f.identity_index(x).is_some()))
    }

    pub fn map_scalars<T: Scalar>(&self, h: &dyn Fn(&S) -> T) -> Prestack<T> {
        let mv = |v: &Vec<S>| v.iter().map(h).collect::<Vec<T>>();
        let mm = |m: &Mor<S>| Mor { src: m.src, tgt: m.tgt, v: mv(&m.v) };
        let fibers = self
            .fibers
            .iter()
            .map(|f| LinearCategory {
                objects: f.objects,
                dims: f.dims.clone(),
                mult: f.mult.iter().map(|(k, t)| (*k, t.iter().map(mv).collect())).collect(),
                ident: f.ident.iter().map(mv).collect(),
            })
            .collect();
        let restr = self
            .restr
            .iter()
            .map(|r| LinFunctor { obj: r.obj.clone(), maps: r.maps.iter().map(|(k, t)| (*k, t.iter().map(mv).collect())).collect() })
            .collect();
        let twists = self.twists.iter().map(|(k, cs)| (*k, cs.iter().map(mm).collect())).collect();
        Prestack { base: self.base.clone(), fibers, restr, twists }
    }
}

// ---------------------------------------------------------------------------
// Bimodules
// ---------------------------------------------------------------------------

/// Coefficients: an A(U)-bimodule M^U per base object with restriction
/// maps `M^u: M^U(x,y) -> M^V(u*x, u*y)`.
///
/// Tables follow the layout of [`LinearCategory::mult`]: for `left`, an
/// element `a_j` of A(y,z) acting on `m_i` in M(x,y) is stored at
/// `j * dim M(x,y) + i`; for `right`, `m_j` in M(y,z) times `a_i` in
/// A(x,y) sits at `j * dim A(x,y) + i`.
#[derive(Clone, Debug)]
pub struct Bimodule<S: Scalar> {
    pub dims: Vec<Vec<Vec<usize>>>,
    pub left: Vec<HashMap<(usize, usize, usize), Vec<Vec<S>>>>,
    pub right: Vec<HashMap<(usize, usize, usize), Vec<Vec<S>>>>,
    pub restr: Vec<HashMap<(usize, usize), Vec<Vec<S>>>>,
}

/// M = A.
pub fn diagonal_bimodule<S: Scalar>(p: &Prestack<S>) -> Bimodule<S> {
    Bimodule {
        dims: p.fibers.iter().map(|f| f.dims.clone()).collect(),
        left: p.fibers.iter().map(|f| f.mult.clone()).collect(),
        right: p.fibers.iter().map(|f| f.mult.clone()).collect(),
        restr: p.restr.iter().map(|r| r.maps.clone()).collect(),
    }
}

impl<S: Scalar> Bimodule<S> {
    pub fn dim(&self, u: usize, x: usize, y: usize) -> usize {
        self.dims[u][x][y]
    }

    /// `m -> a . m` from M^U(x, a.src) to M^U(x, a.tgt).
    pub fn left_matrix(&self, u: usize, a: &Mor<S>, x: usize) -> Dense<S> {
        let (din, dout) = (self.dim(u, x, a.src), self.dim(u, x, a.tgt));
        let mut m: Dense<S> = vec![zeros(din); dout];
        if let Some(t) = self.left[u].get(&(x, a.src, a.tgt)) {
            for (j, aj) in a.support() {
                for i in 0..din {
                    for (k, v) in t[j * din + i].iter().enumerate() {
                        if !v.is_zero() {
                            m[k][i] = m[k][i].add(&aj.mul(v));
                        }
                    }
                }
            }
        }
        m
    }

    /// `m -> m . a` from M^U(a.tgt, z) to M^U(a.src, z).
    pub fn right_matrix(&self, p: &Prestack<S>, u: usize, a: &Mor<S>, z: usize) -> Dense<S> {
        let (din, dout) = (self.dim(u, a.tgt, z), self.dim(u, a.src, z));
        let da = p.fibers[u].dim(a.src, a.tgt);
        let mut m: Dense<S> = vec![zeros(din); dout];
        if let Some(t) = self.right[u].get(&(a.src, a.tgt, z)) {
            for (i, ai) in a.support() {
                for j in 0..din {
                    for (k, v) in t[j * da + i].iter().enumerate() {
                        if !v.is_zero() {
                            m[k][j] = m[k][j].add(&ai.mul(v));
                        }
                    }
                }
            }
        }
        m
    }

    /// `M^u` on M^U(x, y).
    pub fn restr_matrix(&self, p: &Prestack<S>, u: usize, x: usize, y: usize) -> Dense<S> {
        let (tu, su) = (p.base.tgt(u), p.base.src(u));
        let din = self.dim(tu, x, y);
        let dout = self.dim(su, p.restrict_obj(u, x), p.restrict_obj(u, y));
        let mut m: Dense<S> = vec![zeros(din); dout];
        if let Some(imgs) = self.restr[u].get(&(x, y)) {
            for (i, img) in imgs.iter().enumerate() {
                for (k, v) in img.iter().enumerate() {
                    m[k][i] = v.clone();
                }
            }
        }
        m
    }

    fn act_left(&self, u: usize, a: &Mor<S>, x: usize, m: &[S]) -> Vec<S> {
        crate::linalg::dense_apply(&self.left_matrix(u, a, x), m)
    }

    fn act_right(&self, p: &Prestack<S>, u: usize, m: &[S], a: &Mor<S>, z: usize) -> Vec<S> {
        crate::linalg::dense_apply(&self.right_matrix(p, u, a, z), m)
    }

    /// Bimodule axioms, compatibility of restrictions with both actions,
    /// identity restrictions and the twist relation
    /// `c_y . M^w M^v (m) = M^{vw}(m) . c_x` with `c = tau(w, v)`.
    pub fn validate(&self, p: &Prestack<S>) -> Result<()> {
        let b = &p.base;
        let err = |m: String| Err(Error::Invalid(format!("bimodule: {m}")));
        for u in 0..b.objects {
            let a = &p.fibers[u];
            let n = a.objects;
            for x in 0..n {
                for y in 0..n {
                    let d = self.dim(u, x, y);
                    for i in 0..d {
                        let m: Vec<S> = crate::linalg::unit(d, i);
                        if self.act_left(u, &a.identity(y), x, &m) != m || self.act_right(p, u, &m, &a.identity(x), y) != m {
                            return err(format!("unit law fails on M^{u}({x},{y})[{i}]"));
                        }
                        for z in 0..n {
                            for w in 0..n {
                                for j in 0..a.dim(y, z) {
                                    for k in 0..a.dim(w, x) {
                                        let (g, f) = (a.basis(y, z, j), a.basis(w, x, k));
                                        let l1 = self.act_right(p, u, &self.act_left(u, &g, x, &m), &f, z);
                                        let l2 = self.act_left(u, &g, w, &self.act_right(p, u, &m, &f, y));
                                        if l1 != l2 {
                                            return err(format!("actions do not commute on M^{u}({x},{y})[{i}]"));
                                        }
                                    }
                                    for k in 0..a.dim(z, w) {
                                        let (g, h) = (a.basis(y, z, j), a.basis(z, w, k));
                                        let l1 = self.act_left(u, &h, x, &self.act_left(u, &g, x, &m));
                                        let l2 = self.act_left(u, &a.compose(&h, &g), x, &m);
                                        if l1 != l2 {
                                            return err(format!("left action not associative on M^{u}({x},{y})[{i}]"));
                                        }
                                    }
                                }
                                for j in 0..a.dim(w, x) {
                                    for k in 0..a.dim(z, w) {
                                        let (f, e) = (a.basis(w, x, j), a.basis(z, w, k));
                                        let l1 = self.act_right(p, u, &self.act_right(p, u, &m, &f, y), &e, y);
                                        let l2 = self.act_right(p, u, &m, &a.compose(&f, &e), y);
                                        if l1 != l2 {
                                            return err(format!("right action not associative on M^{u}({x},{y})[{i}]"));
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        for arrow in 0..b.n_arrows() {
            let (tu, su) = (b.tgt(arrow), b.src(arrow));
            let a = &p.fibers[tu];
            for x in 0..a.objects {
                for y in 0..a.objects {
                    let r = self.restr_matrix(p, arrow, x, y);
                    if b.is_identity(arrow) {
                        let d = self.dim(tu, x, y);
                        if r != (0..d).map(|i| crate::linalg::unit(d, i)).collect::<Dense<S>>() {
                            return err(format!("restriction along identity {arrow} is not the identity"));
                        }
                    }
                    for i in 0..self.dim(tu, x, y) {
                        let m = crate::linalg::unit(self.dim(tu, x, y), i);
                        let rm = crate::linalg::dense_apply(&r, &m);
                        let (ux, uy) = (p.restrict_obj(arrow, x), p.restrict_obj(arrow, y));
                        for z in 0..a.objects {
                            for j in 0..a.dim(y, z) {
                                let g = a.basis(y, z, j);
                                let lhs = crate::linalg::dense_apply(&self.restr_matrix(p, arrow, x, z), &self.act_left(tu, &g, x, &m));
                                let rhs = self.act_left(su, &p.restrict_mor(arrow, &g), ux, &rm);
                                if lhs != rhs {
                                    return err(format!("restriction along {arrow} does not commute with the left action"));
                                }
                            }
                            for j in 0..a.dim(z, x) {
                                let f = a.basis(z, x, j);
                                let lhs = crate::linalg::dense_apply(&self.restr_matrix(p, arrow, z, y), &self.act_right(p, tu, &m, &f, y));
                                let rhs = self.act_right(p, su, &rm, &p.restrict_mor(arrow, &f), uy);
                                if lhs != rhs {
                                    return err(format!("restriction along {arrow} does not commute with the right action"));
                                }
                            }
                        }
                    }
                }
            }
        }
        for (v, w, vw) in b.compose_triples() {
            let (xu, zu) = (b.src(w), b.tgt(v));
            let a = &p.fibers[zu];
            for x in 0..a.objects {
                for y in 0..a.objects {
                    for i in 0..self.dim(zu, x, y) {
                        let m = crate::linalg::unit(self.dim(zu, x, y), i);
                        let vm = crate::linalg::dense_apply(&self.restr_matrix(p, v, x, y), &m);
                        let wvm = crate::linalg::dense_apply(
                            &self.restr_matrix(p, w, p.restrict_obj(v, x), p.restrict_obj(v, y)),
                            &vm,
                        );
                        let vwm = crate::linalg::dense_apply(&self.restr_matrix(p, vw, x, y), &m);
                        let (cx, cy) = (p.twist(w, v, x), p.twist(w, v, y));
                        let lhs = self.act_left(xu, &cy, cx.src, &wvm);
                        let rhs = self.act_right(p, xu, &vwm, &cx, cy.tgt);
                        if lhs != rhs {
                            return err(format!("restrictions along ({w},{v}) and {vw} disagree through the twist"));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Apply a dense matrix to each coordinate slot; helper for actions.
pub fn apply_into<S: Scalar>(out: &mut [S], c: &S, m: &Dense<S>, v: &[S]) {
    axpy(out, c, &crate::linalg::dense_apply(m, v));
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PrestackFile {
    pub ring: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub base: BaseFile,
    pub fibers: Vec<FiberFile>,
    #[serde(default)]
    pub restrictions: Vec<RestrictionFile>,
    #[serde(default)]
    pub twists: Vec<TwistFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BaseFile {
    pub objects: usize,
    pub arrows: Vec<[usize; 2]>,
    pub identities: Vec<usize>,
    /// `[g, f, g.f]`.
    pub compose: Vec<[usize; 3]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiberFile {
    pub objects: usize,
    /// `[x, y, dim]`; missing pairs have dimension 0.
    pub homs: Vec<[usize; 3]>,
    /// Identity coordinates per object.
    pub identities: Vec<Vec<Value>>,
    /// Nonzero products of basis elements.
    #[serde(default)]
    pub products: Vec<ProductEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProductEntry {
    /// `[x, y, z]`.
    pub objs: [usize; 3],
    /// Basis index of the later factor in hom(y,z).
    pub g: usize,
    /// Basis index of the earlier factor in hom(x,y).
    pub f: usize,
    pub value: Vec<Value>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RestrictionFile {
    pub arrow: usize,
    pub objects: Vec<usize>,
    #[serde(default)]
    pub maps: Vec<MapEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapEntry {
    pub src: usize,
    pub tgt: usize,
    /// Image of each basis element of hom(src, tgt).
    pub images: Vec<Vec<Value>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TwistFile {
    pub f: usize,
    pub g: usize,
    pub components: Vec<Vec<Value>>,
}

fn parse_vec<S: Scalar>(v: &[Value], len: usize, what: &str) -> Result<Vec<S>> {
    if v.len() != len {
        return Err(Error::Parse(format!("{what}: expected {len} coordinates, got {}", v.len())));
    }
    v.iter().map(S::from_json).collect()
}

fn dump_vec<S: Scalar>(v: &[S]) -> Vec<Value> {
    v.iter().map(|x| x.to_json()).collect()
}

impl PrestackFile {
    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("serialisable")
    }

    /// Build the prestack without checking any axiom except shapes.
    pub fn build<S: Scalar>(&self) -> Result<Prestack<S>> {
        let bf = &self.base;
        let compose: Vec<(usize, usize, usize)> = bf.compose.iter().map(|c| (c[0], c[1], c[2])).collect();
        let base = BaseCategory::new(bf.objects, bf.arrows.iter().map(|a| (a[0], a[1])).collect(), bf.identities.clone(), &compose)?;
        if self.fibers.len() != base.objects {
            return Err(Error::Parse(format!("{} fibres for {} objects", self.fibers.len(), base.objects)));
        }
        let mut fibers = Vec::new();
        for (u, ff) in self.fibers.iter().enumerate() {
            let n = ff.objects;
            let mut dims = vec![vec![0; n]; n];
            for h in &ff.homs {
                if h[0] >= n || h[1] >= n {
                    return Err(Error::Parse(format!("fibre {u}: hom entry out of range")));
                }
                dims[h[0]][h[1]] = h[2];
            }
            let mut c = LinearCategory::empty(dims);
            if ff.identities.len() != n {
                return Err(Error::Parse(format!("fibre {u}: need {n} identities")));
            }
            for x in 0..n {
                c.ident[x] = parse_vec(&ff.identities[x], c.dim(x, x), &format!("fibre {u} identity {x}"))?;
            }
            for pe in &ff.products {
                let [x, y, z] = pe.objs;
                if x >= n || y >= n || z >= n || pe.f >= c.dim(x, y) || pe.g >= c.dim(y, z) {
                    return Err(Error::Parse(format!("fibre {u}: product entry out of range")));
                }
                let v = parse_vec(&pe.value, c.dim(x, z), &format!("fibre {u} product"))?;
                c.set_product(x, y, z, pe.g, pe.f, v);
            }
            fibers.push(c);
        }
        let mut restr: Vec<Option<LinFunctor<S>>> = vec![None; base.n_arrows()];
        for r in &self.restrictions {
            if r.arrow >= base.n_arrows() {
                return Err(Error::Parse(format!("restriction for unknown arrow {}", r.arrow)));
            }
            let (src, tgt) = (&fibers[base.src(r.arrow)], &fibers[base.tgt(r.arrow)]);
            if r.objects.len() != tgt.objects || r.objects.iter().any(|&o| o >= src.objects) {
                return Err(Error::Parse(format!("restriction {}: bad object map", r.arrow)));
            }
            let mut maps = HashMap::new();
            for m in &r.maps {
                if m.src >= tgt.objects || m.tgt >= tgt.objects || m.images.len() != tgt.dim(m.src, m.tgt) {
                    return Err(Error::Parse(format!("restriction {}: bad map entry", r.arrow)));
                }
                let d = src.dim(r.objects[m.src], r.objects[m.tgt]);
                let imgs = m.images.iter().map(|v| parse_vec(v, d, "restriction image")).collect::<Result<Vec<_>>>()?;
                maps.insert((m.src, m.tgt), imgs);
            }
            restr[r.arrow] = Some(LinFunctor { obj: r.objects.clone(), maps });
        }
        let restr = restr
            .into_iter()
            .enumerate()
            .map(|(a, r)| match r {
                Some(r) => Ok(r),
                None if base.is_identity(a) => Ok(LinFunctor::identity(&fibers[base.src(a)])),
                None => Err(Error::Parse(format!("missing restriction for arrow {a}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let mut p = Prestack { base, fibers, restr, twists: HashMap::new() };
        for t in &self.twists {
            let b = &p.base;
            if t.f >= b.n_arrows() || t.g >= b.n_arrows() || b.tgt(t.f) != b.src(t.g) {
                return Err(Error::Parse(format!("twist ({},{}) is not a composable pair", t.f, t.g)));
            }
            if b.is_identity(t.f) || b.is_identity(t.g) {
                continue;
            }
            let h = b.compose(t.g, t.f);
            let fz = &p.fibers[b.tgt(t.g)];
            if t.components.len() != fz.objects {
                return Err(Error::Parse(format!("twist ({},{}): need {} components", t.f, t.g, fz.objects)));
            }
            let mut comps = Vec::new();
            for (c, v) in t.components.iter().enumerate() {
                let (x, y) = (p.word_obj(&[t.f, t.g], c), p.word_obj(&[h], c));
                comps.push(Mor { src: x, tgt: y, v: parse_vec(v, p.fibers[b.src(t.f)].dim(x, y), "twist component")? });
            }
            p.twists.insert((t.f, t.g), comps);
        }
        p.fill_identity_twists()?;
        Ok(p)
    }

    pub fn from_prestack<S: Scalar>(p: &Prestack<S>, name: Option<String>) -> Self {
        let b = &p.base;
        let base = BaseFile {
            objects: b.objects,
            arrows: b.arrows.iter().map(|&(s, t)| [s, t]).collect(),
            identities: b.identities.clone(),
            compose: b.compose_triples().into_iter().map(|(g, f, h)| [g, f, h]).collect(),
        };
        let fibers = p
            .fibers
            .iter()
            .map(|c| {
                let n = c.objects;
                let mut homs = Vec::new();
                let mut products = Vec::new();
                for x in 0..n {
                    for y in 0..n {
                        if c.dim(x, y) > 0 {
                            homs.push([x, y, c.dim(x, y)]);
                        }
                    }
                }
                let mut keys: Vec<_> = c.mult.keys().copied().collect();
                keys.sort();
                for (x, y, z) in keys {
                    let t = &c.mult[&(x, y, z)];
                    let dxy = c.dim(x, y);
                    for (k, v) in t.iter().enumerate() {
                        if v.iter().any(|s| !s.is_zero()) {
                            products.push(ProductEntry { objs: [x, y, z], g: k / dxy, f: k % dxy, value: dump_vec(v) });
                        }
                    }
                }
                FiberFile { objects: n, homs, identities: c.ident.iter().map(|v| dump_vec(v)).collect(), products }
            })
            .collect();
        let restrictions = p
            .restr
            .iter()
            .enumerate()
            .filter(|(a, _)| !b.is_identity(*a))
            .map(|(a, r)| {
                let mut keys: Vec<_> = r.maps.keys().copied().collect();
                keys.sort();
                let maps = keys
                    .into_iter()
                    .filter(|k| !r.maps[k].is_empty())
                    .map(|(x, y)| MapEntry { src: x, tgt: y, images: r.maps[&(x, y)].iter().map(|v| dump_vec(v)).collect() })
                    .collect();
                RestrictionFile { arrow: a, objects: r.obj.clone(), maps }
            })
            .collect();
        let mut keys: Vec<_> = p.twists.keys().copied().collect();
        keys.sort();
        let twists = keys
            .into_iter()
            .map(|(f, g)| TwistFile { f, g, components: p.twists[&(f, g)].iter().map(|m| dump_vec(&m.v)).collect() })
            .collect();
        PrestackFile { ring: S::ring_tag(), name, base, fibers, restrictions, twists }
    }
}

/// Ring named in a prestack file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ring {
    Q,
    Fp(u64),
    DualQ,
    DualFp(u64),
}

impl Ring {
    pub fn parse(v: &Value) -> Result<Ring> {
        let prime = |p: &Value| -> Result<u64> {
            p.as_u64().ok_or_else(|| Error::Parse(format!("bad prime {p}")))
        };
        match v {
            Value::String(s) if s == "Q" => Ok(Ring::Q),
            Value::String(s) if s == "Q[e]" => Ok(Ring::DualQ),
            Value::Object(m) if m.len() == 1 => {
                let (k, p) = m.iter().next().unwrap();
                match k.as_str() {
                    "Fp" => Ok(Ring::Fp(prime(p)?)),
                    "Fp[e]" => Ok(Ring::DualFp(prime(p)?)),
                    _ => Err(Error::Parse(format!("unknown ring {v}"))),
                }
            }
            _ => Err(Error::Parse(format!("unknown ring {v}"))),
        }
    }

    pub fn dual(self) -> Ring {
        match self {
            Ring::Q | Ring::DualQ => Ring::DualQ,
            Ring::Fp(p) | Ring::DualFp(p) => Ring::DualFp(p),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::Q;

    #[test]
    fn fixtures_validate_and_roundtrip() {
        for (name, p) in fixtures::all::<Q>() {
            p.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
            diagonal_bimodule(&p).validate(&p).unwrap_or_else(|e| panic!("{name}: {e}"));
            let f = PrestackFile::from_prestack(&p, Some(name.to_string()));
            let back: Prestack<Q> = PrestackFile::from_json_str(&f.to_json_string()).unwrap().build().unwrap();
            back.validate().unwrap();
            assert_eq!(PrestackFile::from_prestack(&back, Some(name.to_string())).to_json_string(), f.to_json_string());
        }
    }

    #[test]
    fn incoherent_twist_rejected() {
        let p = fixtures::scalar_twist_3chain_incoherent::<Q>();
        let e = p.validate().unwrap_err().to_string();
        assert!(e.contains("coherence"), "{e}");
    }

    #[test]
    fn non_natural_twist_rejected() {
        let mut p = fixtures::rank2_fiber::<Q>();
        // make the X component a non-unit scalar multiple: still natural but
        // not invertible
        p.twists.get_mut(&(1, 1)).unwrap()[0].v = vec![Q::zero(), Q::one()];
        assert!(p.validate().unwrap_err().to_string().contains("invertible"));
    }

    #[test]
    fn ring_tags() {
        assert_eq!(Ring::parse(&serde_json::json!("Q")).unwrap(), Ring::Q);
        assert_eq!(Ring::parse(&serde_json::json!({"Fp[e]": 7})).unwrap(), Ring::DualFp(7));
        assert!(Ring::parse(&serde_json::json!("Z")).is_err());
    }
}
