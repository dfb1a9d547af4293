//! The GS complex: cochains on (base simplex, fibre string) pairs with the
//! differential `d = d_Hoch + (-1)^n d_simp + d_2 + d_3 + ...`.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basecat::Simplex;
use crate::combinatorics::{eval_shuffle, sign_of, PathCache};
use crate::lincat::Mor;
use crate::linalg::{row_axpy, unit, zeros, Dense, Scalar, SparseMatrix, SparseRow};
use crate::prestack::{Bimodule, Prestack, Whisker};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Values: concrete vectors or linear forms in the input coordinates
// ---------------------------------------------------------------------------

/// A vector in some coefficient space, either concrete or symbolic.
pub trait Val<S: Scalar>: Clone {
    fn zeros(dim: usize) -> Self;
    fn add_scaled(&mut self, c: &S, o: &Self);
    /// Apply a linear map given as a dense `out x in` matrix.
    fn map(&self, m: &Dense<S>) -> Self;
}

impl<S: Scalar> Val<S> for Vec<S> {
    fn zeros(dim: usize) -> Self {
        zeros(dim)
    }
    fn add_scaled(&mut self, c: &S, o: &Self) {
        crate::linalg::axpy(self, c, o);
    }
    fn map(&self, m: &Dense<S>) -> Self {
        crate::linalg::dense_apply(m, self)
    }
}

/// Each coordinate is a sparse linear form in the input coordinates, so
/// evaluating an operator on `Sym` inputs yields rows of its matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sym<S: Scalar>(pub Vec<SparseRow<S>>);

impl<S: Scalar> Sym<S> {
    /// The generic vector at coordinates `off..off+dim`.
    pub fn generic(off: usize, dim: usize) -> Self {
        Sym((0..dim).map(|i| vec![(off + i, S::one())]).collect())
    }
}

impl<S: Scalar> Val<S> for Sym<S> {
    fn zeros(dim: usize) -> Self {
        Sym(vec![Vec::new(); dim])
    }
    fn add_scaled(&mut self, c: &S, o: &Self) {
        if c.is_zero() {
            return;
        }
        for (x, y) in self.0.iter_mut().zip(&o.0) {
            if !y.is_empty() {
                *x = row_axpy(x, c, y);
            }
        }
    }
    fn map(&self, m: &Dense<S>) -> Self {
        Sym(m
            .iter()
            .map(|row| {
                let mut acc = Vec::new();
                for (i, c) in row.iter().enumerate() {
                    if !c.is_zero() && !self.0[i].is_empty() {
                        acc = row_axpy(&acc, c, &self.0[i]);
                    }
                }
                acc
            })
            .collect())
    }
}

// ---------------------------------------------------------------------------
// Keys and cochain spaces
// ---------------------------------------------------------------------------

/// Position of a cochain component: a base simplex, an object string
/// `A_0..A_q` and basis indices `b_1..b_q` of the arguments (argument 1 at
/// the target end).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Key {
    pub simplex: Simplex,
    pub objs: Vec<usize>,
    pub basis: Vec<usize>,
}

/// An enumerated basis of a cochain space.
#[derive(Clone, Debug)]
pub struct Space {
    pub degree: usize,
    pub keys: Vec<Key>,
    pub dims: Vec<usize>,
    pub offsets: Vec<usize>,
    pub index: HashMap<Key, usize>,
    pub total: usize,
}

impl Space {
    pub fn new(degree: usize, entries: Vec<(Key, usize)>) -> Self {
        let mut keys = Vec::new();
        let mut dims = Vec::new();
        let mut offsets = Vec::new();
        let mut index = HashMap::new();
        let mut total = 0;
        for (k, d) in entries {
            if d == 0 {
                continue;
            }
            index.insert(k.clone(), keys.len());
            keys.push(k);
            dims.push(d);
            offsets.push(total);
            total += d;
        }
        Space { degree, keys, dims, offsets, index, total }
    }

    pub fn offset(&self, k: &Key) -> Option<usize> {
        self.index.get(k).map(|&i| self.offsets[i])
    }

    /// Symbolic lookup: the generic vector at the key's coordinates.
    pub fn sym<S: Scalar>(&self, k: &Key) -> Option<Sym<S>> {
        self.index.get(k).map(|&i| Sym::generic(self.offsets[i], self.dims[i]))
    }

    /// Concrete lookup into a coordinate vector.
    pub fn slice<S: Scalar>(&self, x: &[S], k: &Key) -> Option<Vec<S>> {
        self.index.get(k).map(|&i| x[self.offsets[i]..self.offsets[i] + self.dims[i]].to_vec())
    }

    /// Coordinate indices of the keys accepted by `keep`.
    pub fn coords_where(&self, keep: impl Fn(&Key) -> bool) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, k) in self.keys.iter().enumerate() {
            if keep(k) {
                out.extend(self.offsets[i]..self.offsets[i] + self.dims[i]);
            }
        }
        out
    }

    pub fn to_cochain<S: Scalar>(&self, x: &[S]) -> Cochain<S> {
        let mut comps = BTreeMap::new();
        for (i, k) in self.keys.iter().enumerate() {
            let v = x[self.offsets[i]..self.offsets[i] + self.dims[i]].to_vec();
            if v.iter().any(|c| !c.is_zero()) {
                comps.insert(k.clone(), v);
            }
        }
        Cochain { degree: self.degree, comps }
    }

    pub fn coords<S: Scalar>(&self, c: &Cochain<S>) -> Result<Vec<S>> {
        let mut x = zeros(self.total);
        for (k, v) in &c.comps {
            let Some(&i) = self.index.get(k) else {
                if v.iter().all(|c| c.is_zero()) {
                    continue;
                }
                return Err(Error::Shape(format!("cochain key {k:?} is not a position of degree {}", self.degree)));
            };
            if v.len() != self.dims[i] {
                return Err(Error::Shape(format!("value at {k:?} has {} coordinates, expected {}", v.len(), self.dims[i])));
            }
            x[self.offsets[i]..self.offsets[i] + v.len()].clone_from_slice(v);
        }
        Ok(x)
    }

    /// Seeded random vector with coordinates in {-2..2}, zero outside
    /// `support` when given.
    pub fn random<S: Scalar>(&self, seed: u64, support: Option<&[usize]>) -> Vec<S> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = zeros(self.total);
        match support {
            Some(s) => {
                for &i in s {
                    x[i] = S::from_i64(rng.gen_range(-2..=2));
                }
            }
            None => {
                for xi in x.iter_mut() {
                    *xi = S::from_i64(rng.gen_range(-2..=2));
                }
            }
        }
        x
    }
}

/// Sparse cochain: absent keys are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cochain<S: Scalar> {
    pub degree: usize,
    pub comps: BTreeMap<Key, Vec<S>>,
}

impl<S: Scalar> Cochain<S> {
    /// Text lines `p | simplex | objects | basis | value`. For p = 0 the
    /// simplex field holds the object id.
    pub fn to_text(&self) -> String {
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let mut s = String::new();
        for (k, v) in &self.comps {
            let simp = if k.simplex.arrows.is_empty() { k.simplex.start.to_string() } else { join(&k.simplex.arrows) };
            let val = v.iter().map(|c| c.to_text()).collect::<Vec<_>>().join(" ");
            s.push_str(&format!("{} | {} | {} | {} | {}\n", k.simplex.arrows.len(), simp, join(&k.objs), join(&k.basis), val));
        }
        s
    }

    pub fn from_text(text: &str, degree: usize, src_of: &dyn Fn(usize) -> Option<usize>) -> Result<Self> {
        let mut comps = BTreeMap::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split('|').map(|x| x.trim()).collect();
            if f.len() != 5 {
                return Err(Error::Parse(format!("cochain line needs 5 fields: '{line}'")));
            }
            let nums = |s: &str| -> Result<Vec<usize>> {
                s.split_whitespace().map(|t| t.parse().map_err(|_| Error::Parse(format!("bad id '{t}' in '{line}'")))).collect()
            };
            let p: usize = f[0].parse().map_err(|_| Error::Parse(format!("bad p in '{line}'")))?;
            let ids = nums(f[1])?;
            let simplex = if p == 0 {
                let [o] = ids[..] else { return Err(Error::Parse(format!("p = 0 needs one object id: '{line}'"))) };
                Simplex { start: o, arrows: vec![] }
            } else {
                if ids.len() != p {
                    return Err(Error::Parse(format!("simplex length differs from p in '{line}'")));
                }
                let start = src_of(ids[0]).ok_or_else(|| Error::Parse(format!("unknown arrow in '{line}'")))?;
                Simplex { start, arrows: ids }
            };
            let objs = nums(f[2])?;
            let basis = nums(f[3])?;
            if objs.len() != basis.len() + 1 {
                return Err(Error::Parse(format!("need one more object than basis index in '{line}'")));
            }
            let val = f[4].split_whitespace().map(S::from_text).collect::<Result<Vec<_>>>()?;
            comps.insert(Key { simplex, objs, basis }, val);
        }
        Ok(Cochain { degree, comps })
    }
}

// ---------------------------------------------------------------------------
// The complex
// ---------------------------------------------------------------------------

/// Evaluation context for the GS complex of a prestack with coefficients
/// in a bimodule.
pub struct Gs<'a, S: Scalar> {
    pub p: &'a Prestack<S>,
    pub m: &'a Bimodule<S>,
    pub cache: PathCache,
}

pub type Lookup<'a, V> = &'a dyn Fn(&Key) -> Option<V>;

/// Basis morphisms named by a key; entry 1 at the target end.
pub fn key_args<S: Scalar>(fib: &crate::lincat::LinearCategory<S>, k: &Key) -> Vec<Mor<S>> {
    let q = k.basis.len();
    (1..=q).map(|i| fib.basis(k.objs[q - i], k.objs[q - i + 1], k.basis[i - 1])).collect()
}

/// Objects `A_0..A_q` of a morphism string ending at `top`.
pub fn string_objs<S: Scalar>(args: &[Mor<S>], top: usize) -> Vec<usize> {
    let mut objs: Vec<usize> = args.iter().rev().map(|a| a.src).collect();
    objs.push(top);
    objs
}

/// Multilinear expansion of a cochain on arbitrary (non-basis)
/// arguments. Shared by both complexes.
pub fn expand<S: Scalar, V: Val<S>>(inp: Lookup<V>, simplex: &Simplex, args: &[Mor<S>], top: usize, dim: usize) -> V {
    let objs = string_objs(args, top);
    let supports: Vec<Vec<(usize, S)>> = args.iter().map(|a| a.support().map(|(i, c)| (i, c.clone())).collect()).collect();
    let mut out = V::zeros(dim);
    if supports.iter().any(|s| s.is_empty()) {
        return out;
    }
    let mut idx = vec![0usize; args.len()];
    loop {
        let basis: Vec<usize> = idx.iter().zip(&supports).map(|(&i, s)| s[i].0).collect();
        let coef = idx.iter().zip(&supports).fold(S::one(), |acc, (&i, s)| acc.mul(&s[i].1));
        let key = Key { simplex: simplex.clone(), objs: objs.clone(), basis };
        if let Some(v) = inp(&key) {
            out.add_scaled(&coef, &v);
        }
        // odometer
        let mut pos = args.len();
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < supports[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

impl<'a, S: Scalar> Gs<'a, S> {
    pub fn new(p: &'a Prestack<S>, m: &'a Bimodule<S>) -> Self {
        Gs { p, m, cache: PathCache::default() }
    }

    /// Dimension of `M^{U_0}(sigma* A_0, sigma* A_q)` (left: the composite
    /// of the individual restrictions; right: restriction along the
    /// composite).
    pub fn value_dim(&self, simplex: &Simplex, a0: usize, aq: usize) -> usize {
        let x = self.p.word_obj(&simplex.arrows, a0);
        let y = self.p.word_obj(&[self.p.base.total(simplex)], aq);
        self.m.dim(simplex.start, x, y)
    }

    pub fn space(&self, n: usize) -> Space {
        let b = &self.p.base;
        let mut entries = Vec::new();
        for p in 0..=n {
            let q = n - p;
            for s in b.nerve(p) {
                let fib = &self.p.fibers[b.end(&s)];
                for objs in tuples(fib.objects, q + 1) {
                    let hom_dims: Vec<usize> = (1..=q).map(|i| fib.dim(objs[q - i], objs[q - i + 1])).collect();
                    if hom_dims.iter().any(|&d| d == 0) {
                        continue;
                    }
                    let d = self.value_dim(&s, objs[0], objs[q]);
                    if d == 0 {
                        continue;
                    }
                    for basis in ranges(&hom_dims) {
                        entries.push((Key { simplex: s.clone(), objs: objs.clone(), basis }, d));
                    }
                }
            }
        }
        Space::new(n, entries)
    }

    fn phi<V: Val<S>>(&self, inp: Lookup<V>, simplex: &Simplex, args: &[Mor<S>], top: usize) -> V {
        let a0 = args.last().map_or(top, |a| a.src);
        let dim = self.value_dim(simplex, a0, top);
        expand(inp, simplex, args, top, dim)
    }

    fn left<V: Val<S>>(&self, u: usize, a: &Mor<S>, x: usize, v: &V) -> V {
        v.map(&self.m.left_matrix(u, a, x))
    }

    fn right<V: Val<S>>(&self, u: usize, v: &V, a: &Mor<S>, z: usize) -> V {
        v.map(&self.m.right_matrix(self.p, u, a, z))
    }

    /// `(d_Hoch phi)` at an output key with q >= 1.
    pub fn d_hoch_at<V: Val<S>>(&self, inp: Lookup<V>, k: &Key) -> V {
        let (p, b) = (self.p, &self.p.base);
        let s = &k.simplex;
        let u0 = s.start;
        let fib = &p.fibers[b.end(s)];
        let a = key_args(fib, k);
        let t = a.len();
        let (a0, at) = (k.objs[0], k.objs[t]);
        let total = [b.total(s)];
        let mut out = V::zeros(self.value_dim(s, a0, at));
        if t == 0 {
            return out;
        }
        // i = 0
        let v = self.phi(inp, s, &a[1..], k.objs[t - 1]);
        let x = p.word_obj(&s.arrows, a0);
        out.add_scaled(&S::one(), &self.left(u0, &p.word_mor(&total, &a[0]), x, &v));
        for i in 1..t {
            let mut args = a[..i - 1].to_vec();
            args.push(fib.compose(&a[i - 1], &a[i]));
            args.extend_from_slice(&a[i + 1..]);
            let v = self.phi(inp, s, &args, at);
            out.add_scaled(&S::from_i64(sign_of(i % 2 == 1)), &v);
        }
        let v = self.phi(inp, s, &a[..t - 1], at);
        let z = p.word_obj(&total, at);
        out.add_scaled(&S::from_i64(sign_of(t % 2 == 1)), &self.right(u0, &v, &p.word_mor(&s.arrows, &a[t - 1]), z));
        out
    }

    /// `(d_simp phi) = sum (-1)^i d^i_simp phi` at an output key with p >= 1.
    pub fn d_simp_at<V: Val<S>>(&self, inp: Lookup<V>, k: &Key) -> V {
        let (p, b) = (self.p, &self.p.base);
        let s = &k.simplex;
        let pp = s.arrows.len();
        let u0 = s.start;
        let fib = &p.fibers[b.end(s)];
        let a = key_args(fib, k);
        let t = a.len();
        let (a0, at) = (k.objs[0], k.objs[t]);
        let mut out = V::zeros(self.value_dim(s, a0, at));
        if pp == 0 {
            return out;
        }
        // i = 0: c^{sigma,1} . M^{u_1} phi^{d_0 sigma}(a)
        {
            let f = b.face(s, 0);
            let v = self.phi(inp, &f, &a, at);
            let (x, y) = (p.word_obj(&f.arrows, a0), p.word_obj(&[b.total(&f)], at));
            let v = v.map(&self.m.restr_matrix(p, s.arrows[0], x, y));
            let c = p.c_split(s, 1, at);
            out.add_scaled(&S::one(), &self.left(u0, &c, p.word_obj(&s.arrows, a0), &v));
        }
        for i in 1..pp {
            let f = b.face(s, i);
            let v = self.phi(inp, &f, &a, at);
            let e = p.whisker(&Whisker::epsilon(&s.arrows, i), a0);
            let z = p.word_obj(&[b.total(s)], at);
            out.add_scaled(&S::from_i64(sign_of(i % 2 == 1)), &self.right(u0, &v, &e, z));
        }
        // i = p: c^{sigma,p-1} . phi^{d_p sigma}(u_p* a)
        {
            let f = b.face(s, pp);
            let up = s.arrows[pp - 1];
            let ra: Vec<Mor<S>> = a.iter().map(|m| p.restrict_mor(up, m)).collect();
            let v = self.phi(inp, &f, &ra, p.restrict_obj(up, at));
            let c = p.c_split(s, pp - 1, at);
            out.add_scaled(&S::from_i64(sign_of(pp % 2 == 1)), &self.left(u0, &c, p.word_obj(&s.arrows, a0), &v));
        }
        out
    }

    /// `(d_j phi)` at an output key, j >= 2, input from `C^{P-j, t+j-1}`.
    pub fn d_higher_at<V: Val<S>>(&self, inp: Lookup<V>, k: &Key, j: usize) -> V {
        let (p, b) = (self.p, &self.p.base);
        let s = &k.simplex;
        let pp = s.arrows.len();
        let fib = &p.fibers[b.end(s)];
        let a = key_args(fib, k);
        let t = a.len();
        let (a0, at) = (k.objs[0], k.objs[t]);
        let mut out = V::zeros(self.value_dim(s, a0, at));
        if j < 2 || j > pp {
            return out;
        }
        let lp = b.left(s, pp - j);
        let rp = &s.arrows[pp - j..];
        let c = p.c_split(s, pp - j, at);
        let x = p.word_obj(&s.arrows, a0);
        let paths = self.cache.paths(b, rp);
        let shuf = self.cache.shuffles(&[t, j - 1]);
        let mut acc = V::zeros(self.m.dim(s.start, x, c.src));
        for r in paths.iter() {
            for beta in shuf.iter() {
                let chain = eval_shuffle(p, &beta.pattern, &a, at, r);
                let top = chain.first().map_or(at, |m| m.tgt);
                let v = self.phi(inp, &lp, &chain, top);
                acc.add_scaled(&S::from_i64(r.sign * beta.sign * sign_of(t % 2 == 1)), &v);
            }
        }
        out.add_scaled(&S::one(), &self.left(s.start, &c, x, &acc));
        out
    }

    /// `d: C^{n-1} -> C^n` at an output key of degree n.
    pub fn d_total_at<V: Val<S>>(&self, inp: Lookup<V>, k: &Key) -> V {
        let pp = k.simplex.arrows.len();
        let n = pp + k.basis.len();
        let mut out = self.d_hoch_at(inp, k);
        out.add_scaled(&S::from_i64(sign_of(n % 2 == 1)), &self.d_simp_at(inp, k));
        for j in 2..=pp {
            out.add_scaled(&S::one(), &self.d_higher_at(inp, k, j));
        }
        out
    }

    /// Matrix of an operator `C^{n-1} -> C^n` given pointwise.
    pub fn assemble(&self, src: &Space, dst: &Space, op: &dyn Fn(Lookup<Sym<S>>, &Key) -> Sym<S>) -> SparseMatrix<S> {
        let look = |k: &Key| src.sym::<S>(k);
        let mut rows = Vec::with_capacity(dst.total);
        for k in &dst.keys {
            rows.extend(op(&look, k).0);
        }
        SparseMatrix::from_rows(src.total, rows)
    }

    /// Matrix of `d: C^{n-1} -> C^n` (n >= 1).
    pub fn d_matrix(&self, n: usize) -> SparseMatrix<S> {
        let (src, dst) = (self.space(n - 1), self.space(n));
        self.assemble(&src, &dst, &|l, k| self.d_total_at(l, k))
    }

    /// Apply `d` to a concrete cochain in coordinates.
    pub fn d_apply(&self, src: &Space, dst: &Space, x: &[S]) -> Vec<S> {
        let look = |k: &Key| src.slice(x, k);
        let mut out = Vec::with_capacity(dst.total);
        for k in &dst.keys {
            out.extend(self.d_total_at::<Vec<S>>(&look, k));
        }
        out
    }

    /// Is `k` a normalized-reduced position: nondegenerate simplex and no
    /// argument equal to an identity basis vector.
    pub fn is_nr_key(&self, k: &Key) -> bool {
        let b = &self.p.base;
        if b.is_degenerate(&k.simplex) {
            return false;
        }
        let fib = &self.p.fibers[b.end(&k.simplex)];
        !is_normal_string(fib, &k.objs, &k.basis)
    }

    pub fn nr_coords(&self, sp: &Space) -> Result<Vec<usize>> {
        if !self.p.identities_are_basic() {
            return Err(Error::Unsupported("normalized cochains need identities that are basis vectors".into()));
        }
        Ok(sp.coords_where(|k| self.is_nr_key(k)))
    }

    /// `d` restricted to the normalized-reduced subcomplex; errors when the
    /// image leaves it.
    pub fn nr_d_matrix(&self, n: usize) -> Result<SparseMatrix<S>> {
        let (src, dst) = (self.space(n - 1), self.space(n));
        let d = self.d_matrix(n);
        let (cs, rs) = (self.nr_coords(&src)?, self.nr_coords(&dst)?);
        let inside: std::collections::HashSet<usize> = rs.iter().copied().collect();
        let sub = d.submatrix(&(0..dst.total).collect::<Vec<_>>(), &cs);
        for (i, row) in sub.data.iter().enumerate() {
            if !row.is_empty() && !inside.contains(&i) {
                return Err(Error::Invalid(format!("d leaves the normalized-reduced subcomplex at {:?}", dst.keys[key_of(&dst, i)])));
            }
        }
        Ok(d.submatrix(&rs, &cs))
    }

    pub fn is_normalized(&self, sp: &Space, x: &[S]) -> bool {
        sp.keys.iter().enumerate().all(|(i, k)| {
            let fib = &self.p.fibers[self.p.base.end(&k.simplex)];
            !is_normal_string(fib, &k.objs, &k.basis) || x[sp.offsets[i]..sp.offsets[i] + sp.dims[i]].iter().all(|c| c.is_zero())
        })
    }

    pub fn is_reduced(&self, sp: &Space, x: &[S]) -> bool {
        sp.keys.iter().enumerate().all(|(i, k)| {
            !self.p.base.is_degenerate(&k.simplex) || x[sp.offsets[i]..sp.offsets[i] + sp.dims[i]].iter().all(|c| c.is_zero())
        })
    }
}

/// Some argument is the identity basis vector of an endomorphism space.
pub fn is_normal_string<S: Scalar>(fib: &crate::lincat::LinearCategory<S>, objs: &[usize], basis: &[usize]) -> bool {
    let q = basis.len();
    (1..=q).any(|i| {
        let (x, y) = (objs[q - i], objs[q - i + 1]);
        x == y && fib.identity_index(x) == Some(basis[i - 1])
    })
}

/// Key owning coordinate `c`.
pub fn key_of(sp: &Space, c: usize) -> usize {
    match sp.offsets.binary_search(&c) {
        Ok(i) => i,
        Err(i) => i - 1,
    }
}

/// All tuples in `0..n` of length `len`, lexicographic.
pub fn tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    ranges(&vec![n; len])
}

/// Cartesian product of `0..d_i`, lexicographic.
pub fn ranges(dims: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &d in dims {
        let mut next = Vec::with_capacity(out.len() * d);
        for t in &out {
            for i in 0..d {
                let mut u = t.clone();
                u.push(i);
                next.push(u);
            }
        }
        out = next;
    }
    out
}

/// Unit vector helper used by callers building cochains by hand.
pub fn unit_val<S: Scalar>(dim: usize, i: usize) -> Vec<S> {
    unit(dim, i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::Q;
    use crate::prestack::diagonal_bimodule;

    #[test]
    fn triv_a2_space_census() {
        let p = fixtures::triv_a2::<Q>();
        let m = diagonal_bimodule(&p);
        let gs = Gs::new(&p, &m);
        // C^n = sum_p |N_p| since every fibre is k with one object
        let nerve = |k: usize| p.base.nerve(k).len();
        for n in 0..4 {
            assert_eq!(gs.space(n).total, (0..=n).map(nerve).sum::<usize>());
        }
        // nr positions at n = 2: only nondegenerate simplices with no
        // arguments; N_2 of 0<1 has no nondegenerate simplex
        let sp = gs.space(2);
        assert_eq!(gs.nr_coords(&sp).unwrap().len(), 0);
        let sp1 = gs.space(1);
        assert_eq!(gs.nr_coords(&sp1).unwrap().len(), 1);
    }

    #[test]
    fn hochschild_part_matches_direct_sum_on_algebra() {
        // one base object, fibre k[t]/t^2 viewed on object X only: compare
        // d_Hoch at p = 0 with a direct Hochschild summation
        let p = fixtures::rank2_fiber::<Q>();
        let m = diagonal_bimodule(&p);
        let gs = Gs::new(&p, &m);
        let fib = &p.fibers[0];
        let (s1, s2) = (gs.space(1), gs.space(2));
        let x = s1.random::<Q>(7, None);
        let look = |k: &Key| s1.slice(&x, k);
        let pt = p.base.point(0);
        for b1 in 0..2 {
            for b2 in 0..2 {
                let k = Key { simplex: pt.clone(), objs: vec![0, 0, 0], basis: vec![b1, b2] };
                let got = gs.d_hoch_at::<Vec<Q>>(&look, &k);
                let phi = |b: usize| s1.slice(&x, &Key { simplex: pt.clone(), objs: vec![0, 0], basis: vec![b] }).unwrap();
                let (a1, a2) = (fib.basis(0, 0, b1), fib.basis(0, 0, b2));
                let mor = |v: Vec<Q>| Mor { src: 0, tgt: 0, v };
                let mut want = fib.compose(&a1, &mor(phi(b2))).v;
                let prod = fib.compose(&a1, &a2);
                for (i, c) in prod.support() {
                    crate::linalg::axpy(&mut want, &c.neg(), &phi(i));
                }
                crate::linalg::axpy(&mut want, &Q::one(), &fib.compose(&mor(phi(b1)), &a2).v);
                assert_eq!(got, want);
                let _ = &s2;
            }
        }
    }

    #[test]
    fn cochain_text_roundtrip() {
        let p = fixtures::scalar_twist_2chain::<Q>(Q::from_i64(3));
        let m = diagonal_bimodule(&p);
        let gs = Gs::new(&p, &m);
        let sp = gs.space(2);
        let x = sp.random::<Q>(3, None);
        let c = sp.to_cochain(&x);
        let back = Cochain::<Q>::from_text(&c.to_text(), 2, &|a| (a < p.base.n_arrows()).then(|| p.base.src(a))).unwrap();
        assert_eq!(sp.coords(&back).unwrap(), x);
        assert!(Cochain::<Q>::from_text("1 | 0 | 0 1 | | 1", 1, &|_| Some(0)).is_err());
    }

    #[test]
    fn d_squares_to_zero_small() {
        for (name, p) in fixtures::all::<Q>() {
            let m = diagonal_bimodule(&p);
            let gs = Gs::new(&p, &m);
            for n in 1..5 {
                let prod = gs.d_matrix(n + 1).mul(&gs.d_matrix(n));
                assert!(prod.is_zero(), "{name}: d d != 0 at {n}");
            }
        }
    }

    #[test]
    fn random_is_reproducible() {
        let p = fixtures::triv_a3::<Q>();
        let m = diagonal_bimodule(&p);
        let sp = Gs::new(&p, &m).space(2);
        assert_eq!(sp.random::<Q>(11, None), sp.random::<Q>(11, None));
    }
}
