//! Comparison maps between the GS complex and the graded Hochschild
//! complex, and the homotopy between `FG` and the identity.
//!
//! Formal sums used by the homotopy carry a left factor on each string: a
//! term `(e, x)` evaluates to `rho(e, Psi(x))`. The factor absorbs the
//! twist needed to land a string that ends in a restricted object back at
//! the top object; for presheaves it is an identity.

use std::collections::BTreeMap;

use crate::basecat::Simplex;
use crate::combinatorics::{compositions, eval_path, eval_shuffle, Composition, Path, Shuffle};
use crate::graded::{string_terms, GEntry, GString, Graded};
use crate::gscomplex::{expand, key_args, Gs, Key, Lookup, Space, Sym, Val};
use crate::lincat::Mor;
use crate::linalg::{Scalar, SparseMatrix};
use crate::prestack::{Bimodule, Prestack, Whisker};
use crate::{Error, Result};

/// A Seq element: a string of fibre morphisms (entry 1 at the target end)
/// ending at `top`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeqElem<S: Scalar> {
    pub chain: Vec<Mor<S>>,
    pub top: usize,
    pub sign: i64,
}

/// A Seqq element: per block (block 0 = the last arrows) its arrows and
/// path, interleaved by a conditioned shuffle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeqqElem {
    pub blocks: Vec<(Vec<usize>, Path)>,
    pub pattern: Vec<usize>,
    pub sign: i64,
}

/// A string with a left factor `left` over some arrow into the top object.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DString<S: Scalar> {
    pub left: GEntry<S>,
    pub body: GString<S>,
}

pub type DChain<S> = Vec<(i64, DString<S>)>;

pub struct Compare<'a, S: Scalar> {
    pub gs: Gs<'a, S>,
    pub gr: Graded<'a, S>,
}

fn blocks_of(parts: &[usize], arrows: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut off = 0;
    for &m in parts {
        out.push(arrows[off..off + m].to_vec());
        off += m;
    }
    out
}

impl<'a, S: Scalar> Compare<'a, S> {
    pub fn new(p: &'a Prestack<S>, m: &'a Bimodule<S>) -> Self {
        Compare { gs: Gs::new(p, m), gr: Graded::new(p, m) }
    }

    fn p(&self) -> &'a Prestack<S> {
        self.gs.p
    }

    /// `u_1* ... u_{N-i}* a_i` for the string `a` over `tau`.
    fn under(&self, tau: &Simplex, a: &[GEntry<S>], i: usize) -> Mor<S> {
        let n = a.len();
        self.p().word_mor(&tau.arrows[..n - i], &a[i - 1].mor)
    }

    /// `a_{i..N}` as a morphism of the fibre over the start of `tau`.
    fn under_comp(&self, tau: &Simplex, a: &[GEntry<S>], i: usize) -> Mor<S> {
        let fib = &self.p().fibers[tau.start];
        let n = a.len();
        let mut acc = self.under(tau, a, n);
        for j in (i..n).rev() {
            acc = fib.compose(&self.under(tau, a, j), &acc);
        }
        acc
    }

    /// `Seq(tau, a, parts)` with `parts[0] = m_k`.
    pub fn seq(&self, tau: &Simplex, a: &[GEntry<S>], parts: &[usize]) -> Vec<SeqElem<S>> {
        let (p, b) = (self.p(), &self.p().base);
        let n = tau.arrows.len();
        assert_eq!(parts.iter().sum::<usize>(), n);
        assert_eq!(a.len(), n);
        assert!(n >= 1, "Seq of a point is handled by the caller");
        let top_n = a[0].tgt;
        if parts.len() == 1 {
            let comp = self.under_comp(tau, a, 1);
            let top = p.word_obj(&[b.total(tau)], top_n);
            return self
                .gs
                .cache
                .paths(b, &tau.arrows)
                .iter()
                .map(|r| {
                    let mut chain: Vec<Mor<S>> = r.entries().iter().map(|w| p.whisker(w, top_n)).collect();
                    chain.push(comp.clone());
                    SeqElem { chain, top, sign: r.sign }
                })
                .collect();
        }
        let mk = parts[0];
        let rest = b.right(tau, mk);
        let inner = self.seq(&rest, &a[..n - mk], &parts[1..]);
        let mut out = Vec::new();
        if mk == 1 {
            let u1 = tau.arrows[0];
            for x in inner {
                let mut chain: Vec<Mor<S>> = x.chain.iter().map(|m| p.restrict_mor(u1, m)).collect();
                chain.push(a[n - 1].mor.clone());
                out.push(SeqElem { chain, top: p.restrict_obj(u1, x.top), sign: x.sign });
            }
            return out;
        }
        let left = b.left(tau, mk);
        let tail = self.under_comp(tau, a, n + 1 - mk);
        let paths = self.gs.cache.paths(b, &left.arrows);
        let shuf = self.gs.cache.shuffles(&[n - mk, mk - 1]);
        let lt = b.total(&left);
        for x in &inner {
            for s in paths.iter() {
                for beta in shuf.iter() {
                    let mut chain = eval_shuffle(p, &beta.pattern, &x.chain, x.top, s);
                    chain.push(tail.clone());
                    out.push(SeqElem { chain, top: p.restrict_obj(lt, x.top), sign: s.sign * beta.sign * x.sign });
                }
            }
        }
        out
    }

    /// `Seqq(sigma, parts)`; `Part(0)` gives one empty element.
    pub fn seqq(&self, sigma: &Simplex, parts: &[usize]) -> Vec<SeqqElem> {
        let b = &self.p().base;
        let mut blocks = blocks_of(parts, &sigma.arrows);
        blocks.reverse();
        let sizes: Vec<usize> = blocks.iter().map(|x| x.len()).collect();
        let mut choices: Vec<Vec<(Vec<usize>, Path)>> = vec![vec![]];
        for blk in &blocks {
            let ps = self.gs.cache.paths(b, blk);
            let mut next = Vec::new();
            for c in &choices {
                for r in ps.iter() {
                    let mut c2 = c.clone();
                    c2.push((blk.clone(), r.clone()));
                    next.push(c2);
                }
            }
            choices = next;
        }
        let conds = self.gs.cache.conditioned(&sizes);
        let mut out = Vec::new();
        for beta in conds.iter() {
            for c in &choices {
                let sign = beta.sign * c.iter().map(|(_, r)| r.sign).product::<i64>();
                out.push(SeqqElem { blocks: c.clone(), pattern: beta.pattern.clone(), sign });
            }
        }
        out
    }

    /// Shuffle a fibre string `a` over the end of `sigma` with a Seqq
    /// element by `omega` (block 0 = `a`, block 1 = the Seqq entries).
    pub fn graded_shuffle(&self, sigma: &Simplex, a: &[Mor<S>], top: usize, z: &SeqqElem, omega: &[usize]) -> GString<S> {
        let (p, b) = (self.p(), &self.p().base);
        let np = sigma.arrows.len();
        let k = z.blocks.len();
        // vertex index of level l
        let mut level_vertex = vec![np];
        for (blk, _) in &z.blocks {
            level_vertex.push(level_vertex.last().unwrap() - blk.len());
        }
        let level_obj = |l: usize| b.vertex(sigma, level_vertex[l]);
        let mut words: Vec<Vec<usize>> = Vec::with_capacity(k);
        let mut used = vec![0usize; k];
        let (mut ia, mut iz) = (0, 0);
        let mut x = top;
        let mut entries = Vec::with_capacity(omega.len());
        let concat = |ws: &[Vec<usize>]| -> Vec<usize> { ws.iter().rev().flatten().copied().collect() };
        for &slot in omega {
            let level = words.len();
            if slot == 0 {
                let w = concat(&words);
                let m = &a[ia];
                entries.push(GEntry {
                    grading: b.identities[level_obj(level)],
                    src: p.word_obj(&w, m.src),
                    tgt: p.word_obj(&w, x),
                    mor: p.word_mor(&w, m),
                });
                x = m.src;
                ia += 1;
            } else {
                let blk = z.pattern[iz];
                iz += 1;
                let j = used[blk];
                used[blk] += 1;
                if j == 0 {
                    debug_assert_eq!(blk, level);
                    let t = p.word_obj(&concat(&words), x);
                    let g = b.composite(&z.blocks[blk].0).expect("nonempty block");
                    let s = p.restrict_obj(g, t);
                    entries.push(GEntry { grading: g, src: s, tgt: t, mor: p.fibers[b.src(g)].identity(s) });
                    words.push(vec![g]);
                } else {
                    let eps = z.blocks[blk].1.entry(j);
                    let outer = concat(&words[blk + 1..]);
                    let inner = concat(&words[..blk]);
                    let mut pre = outer.clone();
                    pre.extend(&eps.pre);
                    let mut post = eps.post.clone();
                    post.extend(&inner);
                    let wh = Whisker { pre, f: eps.f, g: eps.g, post };
                    let m = p.whisker(&wh, x);
                    entries.push(GEntry {
                        grading: b.identities[level_obj(level)],
                        src: p.word_obj(&wh.source_word(), x),
                        tgt: p.word_obj(&wh.target_word(b), x),
                        mor: m,
                    });
                    words[blk] = eps.source_word();
                }
            }
        }
        GString { entries, top: (b.end(sigma), top) }
    }

    /// `c^{tau, parts}` at `c`: a path over the block composites, the
    /// identity for at most one block.
    pub fn c_partition(&self, tau: &Simplex, parts: &[usize], c: usize) -> Mor<S> {
        let (p, b) = (self.p(), &self.p().base);
        let comps: Vec<usize> = blocks_of(parts, &tau.arrows).iter().map(|x| b.composite(x).unwrap()).collect();
        if comps.len() <= 1 {
            return p.fibers[tau.start].identity(p.word_obj(&[b.total(tau)], c));
        }
        let r = self.gs.cache.paths(b, &comps)[0].clone();
        eval_path(p, &r, c)
    }

    // -----------------------------------------------------------------------
    // F
    // -----------------------------------------------------------------------

    /// `(F phi)` at a graded key of degree n.
    pub fn f_at<V: Val<S>>(&self, inp: Lookup<V>, k: &Key) -> V {
        let (p, b) = (self.p(), &self.p().base);
        let s = &k.simplex;
        let n = s.arrows.len();
        let at = self.gr.key_string(k).entries;
        let (a0, an) = (k.objs[0], k.objs[n]);
        let u0 = s.start;
        let z = p.word_obj(&[b.total(s)], an);
        let mut out = V::zeros(self.gr.value_dim(s, a0, an));
        for pp in 0..=n {
            let lp = b.left(s, pp);
            let rp = b.right(s, pp);
            let ap = k.objs[pp];
            let x = p.word_obj(&lp.arrows, ap);
            let lt = b.total(&lp);
            let c_out = p.c_split(s, pp, an);
            let fib = &p.fibers[u0];
            let mut acc = V::zeros(self.gs.m.dim(u0, x, z));
            let terms: Vec<(Composition, SeqElem<S>)> = if pp == n {
                vec![(Composition { parts: vec![], sign: 1 }, SeqElem { chain: vec![], top: an, sign: 1 })]
            } else {
                compositions(n - pp)
                    .into_iter()
                    .flat_map(|c| self.seq(&rp, &at[..n - pp], &c.parts).into_iter().map(move |e| (c.clone(), e)))
                    .collect()
            };
            for (c, xi) in terms {
                let dim = self.gs.value_dim(&lp, ap, xi.top);
                let v = expand(inp, &lp, &xi.chain, xi.top, dim);
                let cr = p.restrict_mor(lt, &self.c_partition(&rp, &c.parts, an));
                let act = fib.compose(&c_out, &cr);
                let v = v.map(&self.gs.m.left_matrix(u0, &act, x));
                acc.add_scaled(&S::from_i64(c.sign * xi.sign), &v);
            }
            if pp == 0 {
                out.add_scaled(&S::one(), &acc);
            } else {
                let tail = self.under_comp(s, &at, n + 1 - pp);
                out.add_scaled(&S::one(), &acc.map(&self.gs.m.right_matrix(p, u0, &tail, z)));
            }
        }
        out
    }

    pub fn f_matrix(&self, n: usize) -> SparseMatrix<S> {
        let (src, dst) = (self.gs.space(n), self.gr.space(n));
        self.gs.assemble(&src, &dst, &|l, k| self.f_at(l, k))
    }

    // -----------------------------------------------------------------------
    // G
    // -----------------------------------------------------------------------

    /// `(G Psi)` at a GS key.
    pub fn g_at<V: Val<S>>(&self, inp: Lookup<V>, k: &Key) -> V {
        let p = self.p();
        let s = &k.simplex;
        let np = s.arrows.len();
        let fib = &p.fibers[p.base.end(s)];
        let a = key_args(fib, k);
        let q = a.len();
        let top = k.objs[q];
        let mut out = V::zeros(self.gs.value_dim(s, k.objs[0], top));
        let omegas = self.gs.cache.shuffles(&[q, np]);
        for c in compositions(np) {
            for z in self.seqq(s, &c.parts) {
                for w in omegas.iter() {
                    let st = self.graded_shuffle(s, &a, top, &z, &w.pattern);
                    out.add_scaled(&S::from_i64(z.sign * w.sign), &self.gr.psi(inp, &st));
                }
            }
        }
        out
    }

    pub fn g_matrix(&self, n: usize) -> SparseMatrix<S> {
        let (src, dst) = (self.gr.space(n), self.gs.space(n));
        self.gs.assemble(&src, &dst, &|l, k| self.g_at(l, k))
    }

    // -----------------------------------------------------------------------
    // Homotopy
    // -----------------------------------------------------------------------

    fn ident_left(&self, base_obj: usize, x: usize) -> GEntry<S> {
        self.gr.ident(base_obj, x)
    }

    /// `omega_{n,p}(sigma, a)`.
    pub fn omega_np(&self, sigma: &Simplex, a: &[GEntry<S>], pp: usize) -> DChain<S> {
        let (p, b) = (self.p(), &self.p().base);
        let n = sigma.arrows.len();
        let lp = b.left(sigma, pp);
        let rp = b.right(sigma, pp);
        let an = a[0].tgt;
        let ap = a[n - pp].tgt;
        let abar = GEntry {
            grading: b.identities[sigma.start],
            src: a[n - 1].src,
            tgt: p.word_obj(&lp.arrows, ap),
            mor: self.under_comp(sigma, a, n + 1 - pp),
        };
        let xis: Vec<(Composition, SeqElem<S>)> = if pp == n {
            vec![(Composition { parts: vec![], sign: 1 }, SeqElem { chain: vec![], top: an, sign: 1 })]
        } else {
            compositions(n - pp)
                .into_iter()
                .flat_map(|c| self.seq(&rp, &a[..n - pp], &c.parts).into_iter().map(move |e| (c.clone(), e)))
                .collect()
        };
        let shuf: Vec<Shuffle> = self.gs.cache.shuffles(&[n - pp, pp]).to_vec();
        let mut out = Vec::new();
        for (c, xi) in &xis {
            let left = GEntry {
                grading: b.total(&rp),
                src: xi.top,
                tgt: an,
                mor: self.c_partition(&rp, &c.parts, an),
            };
            for c2 in compositions(pp) {
                for z in self.seqq(&lp, &c2.parts) {
                    for beta in &shuf {
                        let body = self.graded_shuffle(&lp, &xi.chain, xi.top, &z, &beta.pattern);
                        let body = body.concat(&GString { entries: vec![abar.clone()], top: (0, 0) });
                        out.push((c.sign * xi.sign * z.sign * beta.sign, DString { left: left.clone(), body }));
                    }
                }
            }
        }
        out
    }

    /// `Omega_n(sigma, a)` for n >= 1.
    pub fn big_omega(&self, sigma: &Simplex, a: &[GEntry<S>]) -> DChain<S> {
        let b = &self.p().base;
        let n = sigma.arrows.len();
        assert!(n >= 1 && a.len() == n);
        let sgn = if n % 2 == 1 { 1 } else { -1 };
        let mut out: DChain<S> = Vec::new();
        for pp in 1..=n {
            out.extend(self.omega_np(sigma, a, pp).into_iter().map(|(c, d)| (sgn * c, d)));
        }
        if n >= 2 {
            let inner = self.big_omega(&b.face(sigma, 0), &a[..n - 1]);
            let last = GString { entries: vec![a[n - 1].clone()], top: (0, 0) };
            out.extend(inner.into_iter().map(|(c, d)| (c, DString { left: d.left, body: d.body.concat(&last) })));
        }
        out
    }

    /// `Delta_n(sigma, a)`: Seq strings with identity gradings at the start,
    /// each carrying `c^{sigma, m}` as its left factor, minus `a` itself.
    pub fn delta_chain(&self, sigma: &Simplex, a: &[GEntry<S>]) -> DChain<S> {
        let b = &self.p().base;
        let n = sigma.arrows.len();
        let an = a[0].tgt;
        let id0 = b.identities[sigma.start];
        let mut out = Vec::new();
        for c in compositions(n) {
            for xi in self.seq(sigma, a, &c.parts) {
                let objs: Vec<usize> = xi.chain.iter().map(|m| m.tgt).collect();
                let entries = xi
                    .chain
                    .iter()
                    .zip(objs)
                    .map(|(m, t)| GEntry { grading: id0, src: m.src, tgt: t, mor: m.clone() })
                    .collect();
                let left = GEntry { grading: b.total(sigma), src: xi.top, tgt: an, mor: self.c_partition(sigma, &c.parts, an) };
                out.push((c.sign * xi.sign, DString { left, body: GString { entries, top: (sigma.start, xi.top) } }));
            }
        }
        out.push((-1, DString { left: self.ident_left(b.end(sigma), an), body: GString { entries: a.to_vec(), top: (b.end(sigma), an) } }));
        out
    }

    /// `rho(e, Psi(x))`.
    pub fn eval_dstring<V: Val<S>>(&self, inp: Lookup<V>, d: &DString<S>) -> V {
        let p = self.p();
        let simp = d.body.simp(p);
        let (_, a0) = d.body.bottom(p);
        let v = self.gr.psi(inp, &d.body);
        self.gr.rho_left(&d.left, p.base.total(&simp), a0, &v)
    }

    /// `(T_{n+1} Psi)` at a graded key of degree n >= 1.
    pub fn t_at<V: Val<S>>(&self, inp: Lookup<V>, k: &Key) -> V {
        let s = &k.simplex;
        let n = s.arrows.len();
        let mut out = V::zeros(self.gr.value_dim(s, k.objs[0], k.objs[n]));
        if n == 0 {
            return out;
        }
        let a = self.gr.key_string(k).entries;
        for (c, d) in self.big_omega(s, &a) {
            out.add_scaled(&S::from_i64(c), &self.eval_dstring(inp, &d));
        }
        out
    }

    /// Matrix of `T_n: C^n -> C^{n-1}` (n >= 1).
    pub fn t_matrix(&self, n: usize) -> SparseMatrix<S> {
        let (src, dst) = (self.gr.space(n), self.gr.space(n - 1));
        self.gs.assemble(&src, &dst, &|l, k| self.t_at(l, k))
    }

    // -----------------------------------------------------------------------
    // Formal identities
    // -----------------------------------------------------------------------

    /// Face of a left-factored string: `d_0` moves the top entry into the
    /// left factor, other faces act on the body.
    pub fn dface(&self, d: &DString<S>, i: usize) -> Result<DString<S>> {
        if i == 0 {
            let first = d.body.entries.first().ok_or_else(|| Error::Shape("face of an empty string".into()))?;
            Ok(DString { left: self.gr.mu(&d.left, first), body: self.gr.face(&d.body, 0)? })
        } else {
            if i >= d.body.len() {
                return Err(Error::Shape(format!("face {i} is not an inner face of a string of length {}", d.body.len())));
            }
            Ok(DString { left: d.left.clone(), body: self.gr.face(&d.body, i)? })
        }
    }

    /// Multilinear expansion of a factored chain into basis terms.
    pub fn expand_dchain(&self, c: &DChain<S>) -> BTreeMap<(usize, usize, usize, usize, Key), S> {
        let mut out: BTreeMap<(usize, usize, usize, usize, Key), S> = BTreeMap::new();
        for (coef, d) in c {
            let terms = string_terms(&self.gr, &d.body);
            for (i, ci) in d.left.mor.support() {
                for (k, v) in &terms {
                    let key = (d.left.grading, d.left.src, d.left.tgt, i, k.clone());
                    let e = out.entry(key).or_insert_with(S::zero);
                    *e = e.add(&ci.mul(v).mul(&S::from_i64(*coef)));
                }
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// Both sides of the chain-level identity behind the homotopy:
    /// `sum (-1)^i d_i Omega_n + sum (-1)^i Omega_{n-1}(d_i a)` (inner faces;
    /// the `d_0` term keeps `a_1` as a left factor) and `Delta_n`.
    pub fn homotopy_identity_sides(&self, sigma: &Simplex, a: &[GEntry<S>]) -> Result<(DChain<S>, DChain<S>)> {
        let n = sigma.arrows.len();
        let om = self.big_omega(sigma, a);
        let mut lhs = Vec::new();
        for i in 0..=n {
            let sg = if i % 2 == 0 { 1 } else { -1 };
            for (c, d) in &om {
                lhs.push((sg * c, self.dface(d, i)?));
            }
        }
        if n >= 2 {
            let s = GString { entries: a.to_vec(), top: (self.p().base.end(sigma), a[0].tgt) };
            for i in 0..n {
                let sg = if i % 2 == 0 { 1 } else { -1 };
                let f = self.gr.face(&s, i)?;
                let fs = f.simp(self.p());
                for (c, d) in self.big_omega(&fs, &f.entries) {
                    let d = if i == 0 { DString { left: self.gr.mu(&a[0], &d.left), body: d.body } } else { d };
                    lhs.push((sg * c, d));
                }
            }
        }
        Ok((lhs, self.delta_chain(sigma, a)))
    }
}

/// Does `T` vanish identically in degree 1 (it is defined to)?
pub fn t1_is_zero<S: Scalar>(c: &Compare<S>) -> bool {
    let sp: Space = c.gr.space(1);
    let look = |k: &Key| sp.sym::<S>(k);
    c.gr.space(0).keys.iter().all(|k| c.t_at::<Sym<S>>(&look, k).0.iter().all(|r| r.is_empty()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::Q;
    use crate::prestack::diagonal_bimodule;

    fn same(a: SparseMatrix<Q>, b: SparseMatrix<Q>) -> bool {
        a.sub(&b).is_zero()
    }

    fn all_ok(name: &str, f: impl Fn(&Compare<Q>) -> bool) {
        for (fx, p) in fixtures::all::<Q>() {
            let m = diagonal_bimodule(&p);
            let c = Compare::new(&p, &m);
            assert!(f(&c), "{name} fails on {fx}");
        }
    }

    #[test]
    fn f_is_a_chain_map() {
        all_ok("F d = delta F", |c| (1..3).all(|n| same(c.f_matrix(n + 1).mul(&c.gs.d_matrix(n + 1)), c.gr.delta_matrix(n + 1).mul(&c.f_matrix(n)))));
    }

    #[test]
    fn g_is_a_chain_map() {
        all_ok("G delta = d G", |c| (1..3).all(|n| same(c.g_matrix(n + 1).mul(&c.gr.delta_matrix(n + 1)), c.gs.d_matrix(n + 1).mul(&c.g_matrix(n)))));
    }

    #[test]
    fn gf_is_identity_on_nr() {
        all_ok("GF = 1 on nr", |c| {
            (0..4).all(|n| {
                let sp = c.gs.space(n);
                let nr = c.gs.nr_coords(&sp).unwrap();
                let gf = c.g_matrix(n).mul(&c.f_matrix(n)).sub(&SparseMatrix::identity(sp.total));
                gf.submatrix(&(0..sp.total).collect::<Vec<_>>(), &nr).is_zero()
            })
        });
    }

    #[test]
    fn homotopy_identity() {
        all_ok("FG - 1 = dT + Td", |c| {
            (0..4).all(|n| {
                let tot = c.gr.space(n).total;
                let lhs = c.f_matrix(n).mul(&c.g_matrix(n)).sub(&SparseMatrix::identity(tot));
                let mut rhs = c.t_matrix(n + 1).mul(&c.gr.delta_matrix(n + 1));
                if n >= 1 {
                    rhs = rhs.add(&c.gr.delta_matrix(n).mul(&c.t_matrix(n)));
                }
                let ok = lhs.sub(&rhs).is_zero();
                if !ok {
                    eprintln!("degree {n}: lhs nnz {} rhs nnz {} diff nnz {}", lhs.nnz(), rhs.nnz(), lhs.sub(&rhs).nnz());
                }
                ok
            })
        });
    }

    #[test]
    fn chain_level_identity_holds() {
        for (fx, p) in fixtures::all::<Q>() {
            let m = diagonal_bimodule(&p);
            let c = Compare::new(&p, &m);
            for n in 1..4 {
                for k in c.gr.space(n).keys.iter().step_by(5) {
                    let a = c.gr.key_string(k).entries;
                    let (l, r) = c.homotopy_identity_sides(&k.simplex, &a).unwrap();
                    let (el, er) = (c.expand_dchain(&l), c.expand_dchain(&r));
                    assert_eq!(el, er, "{fx} n={n} key {k:?}");
                }
            }
        }
    }

    #[test]
    fn emitted_strings_compose_and_fold_to_sigma() {
        let p = fixtures::rank2_fiber::<Q>();
        let m = diagonal_bimodule(&p);
        let c = Compare::new(&p, &m);
        for n in 1..3 {
            for k in c.gr.space(n).keys.iter() {
                let a = c.gr.key_string(k).entries;
                for pp in 0..n {
                    for comp in compositions(n - pp) {
                        for x in c.seq(&p.base.right(&k.simplex, pp), &a[..n - pp], &comp.parts) {
                            for w in x.chain.windows(2) {
                                assert_eq!(w[0].src, w[1].tgt);
                            }
                            assert_eq!(x.chain[0].tgt, x.top);
                        }
                    }
                }
                for pp in 1..=n {
                    for (_, d) in c.omega_np(&k.simplex, &a, pp) {
                        for w in d.body.entries.windows(2) {
                            assert_eq!(w[0].src, w[1].tgt);
                        }
                        assert_eq!(d.left.src, d.body.top.1);
                        let g = p.base.compose(d.left.grading, p.base.total(&d.body.simp(&p)));
                        assert_eq!(g, p.base.total(&k.simplex));
                        assert_eq!(d.body.len(), n + 1);
                    }
                }
            }
        }
    }

    /// Size of `Seq` built from the innermost block outwards, the opposite
    /// order to the recursion in `seq`.
    fn seq_count(parts: &[usize]) -> usize {
        let fact = |n: usize| (1..=n).product::<usize>();
        let choose = |n: usize, k: usize| fact(n) / (fact(k) * fact(n - k));
        let mut it = parts.iter().rev();
        let first = *it.next().unwrap();
        let (mut count, mut len) = (fact(first - 1), first);
        for &m in it {
            if m > 1 {
                count *= fact(m - 1) * choose(len + m - 1, m - 1);
            }
            len += m;
        }
        count
    }

    #[test]
    fn seq_sizes_match_swapped_counter() {
        let p = fixtures::scalar_twist_3chain::<Q>();
        let m = diagonal_bimodule(&p);
        let c = Compare::new(&p, &m);
        let b = &p.base;
        let sigma = b.simplex(vec![b.chain_arrow(0, 1), b.chain_arrow(1, 2), b.chain_arrow(2, 3)]);
        for n in 1..=3 {
            let tau = b.right(&sigma, 3 - n);
            let a: Vec<GEntry<Q>> = (0..n).map(|_| c.gr.ident(tau.start, 0)).collect();
            for comp in compositions(n) {
                let got = c.seq(&tau, &a, &comp.parts);
                assert_eq!(got.len(), seq_count(&comp.parts), "{:?}", comp.parts);
                assert!(got.iter().all(|x| x.chain.len() == n));
            }
        }
        // longer blocks on the idempotent base, where every word composes
        let r2 = fixtures::rank2_fiber::<Q>();
        let m2 = diagonal_bimodule(&r2);
        let c2 = Compare::new(&r2, &m2);
        let k = c2.gr.space(4).keys.into_iter().find(|k| k.simplex.arrows == [1; 4]).unwrap();
        let (tau, a) = (k.simplex.clone(), c2.gr.key_string(&k).entries);
        for comp in compositions(4) {
            assert_eq!(c2.seq(&tau, &a, &comp.parts).len(), seq_count(&comp.parts), "{:?}", comp.parts);
        }
    }
}
