//! Finite-dimensional linear categories given by structure constants.

use std::collections::HashMap;

use crate::linalg::{axpy, is_zero_vec, unit, zeros, Dense, Scalar};

/// A morphism `src -> tgt` as a coordinate vector in the hom basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mor<S: Scalar> {
    pub src: usize,
    pub tgt: usize,
    pub v: Vec<S>,
}

impl<S: Scalar> Mor<S> {
    pub fn is_zero(&self) -> bool {
        is_zero_vec(&self.v)
    }

    pub fn scale(&self, c: &S) -> Self {
        Mor { src: self.src, tgt: self.tgt, v: self.v.iter().map(|x| x.mul(c)).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.src, self.tgt), (o.src, o.tgt), "adding morphisms with different endpoints");
        Mor { src: self.src, tgt: self.tgt, v: self.v.iter().zip(&o.v).map(|(a, b)| a.add(b)).collect() }
    }

    /// Nonzero coordinates.
    pub fn support(&self) -> impl Iterator<Item = (usize, &S)> {
        self.v.iter().enumerate().filter(|(_, c)| !c.is_zero())
    }
}

/// Objects `0..n`, hom spaces `dims[x][y]`, composition by structure
/// constants.
#[derive(Clone, Debug)]
pub struct LinearCategory<S: Scalar> {
    pub objects: usize,
    pub dims: Vec<Vec<usize>>,
    /// `(x,y,z) -> table[j * dim(x,y) + i]`, the coordinates of
    /// `g_j . f_i` for `f_i` in hom(x,y), `g_j` in hom(y,z).
    pub mult: HashMap<(usize, usize, usize), Vec<Vec<S>>>,
    pub ident: Vec<Vec<S>>,
}

impl<S: Scalar> LinearCategory<S> {
    /// Category with the given hom dimensions and all products zero.
    pub fn empty(dims: Vec<Vec<usize>>) -> Self {
        let n = dims.len();
        let ident = (0..n).map(|x| zeros(dims[x][x])).collect();
        LinearCategory { objects: n, dims, mult: HashMap::new(), ident }
    }

    pub fn dim(&self, x: usize, y: usize) -> usize {
        self.dims[x][y]
    }

    pub fn zero(&self, x: usize, y: usize) -> Mor<S> {
        Mor { src: x, tgt: y, v: zeros(self.dim(x, y)) }
    }

    pub fn basis(&self, x: usize, y: usize, i: usize) -> Mor<S> {
        Mor { src: x, tgt: y, v: unit(self.dim(x, y), i) }
    }

    pub fn identity(&self, x: usize) -> Mor<S> {
        Mor { src: x, tgt: x, v: self.ident[x].clone() }
    }

    /// Set the product of two basis elements.
    pub fn set_product(&mut self, x: usize, y: usize, z: usize, j: usize, i: usize, val: Vec<S>) {
        let (dxy, dyz, dxz) = (self.dim(x, y), self.dim(y, z), self.dim(x, z));
        let t = self.mult.entry((x, y, z)).or_insert_with(|| vec![zeros(dxz); dxy * dyz]);
        t[j * dxy + i] = val;
    }

    /// `g . f`.
    pub fn compose(&self, g: &Mor<S>, f: &Mor<S>) -> Mor<S> {
        assert_eq!(f.tgt, g.src, "composing non-composable morphisms");
        let (x, y, z) = (f.src, f.tgt, g.tgt);
        let mut out = zeros(self.dim(x, z));
        if let Some(t) = self.mult.get(&(x, y, z)) {
            let dxy = self.dim(x, y);
            for (j, gj) in g.support() {
                for (i, fi) in f.support() {
                    axpy(&mut out, &gj.mul(fi), &t[j * dxy + i]);
                }
            }
        }
        Mor { src: x, tgt: z, v: out }
    }

    /// Matrix of `m -> a . m` from hom(x, a.src) to hom(x, a.tgt).
    pub fn left_matrix(&self, a: &Mor<S>, x: usize) -> Dense<S> {
        let (din, dout) = (self.dim(x, a.src), self.dim(x, a.tgt));
        let mut m = vec![zeros(din); dout];
        for i in 0..din {
            let c = self.compose(a, &self.basis(x, a.src, i));
            for (k, v) in c.v.into_iter().enumerate() {
                m[k][i] = v;
            }
        }
        m
    }

    /// Matrix of `m -> m . a` from hom(a.tgt, z) to hom(a.src, z).
    pub fn right_matrix(&self, a: &Mor<S>, z: usize) -> Dense<S> {
        let (din, dout) = (self.dim(a.tgt, z), self.dim(a.src, z));
        let mut m = vec![zeros(din); dout];
        for i in 0..din {
            let c = self.compose(&self.basis(a.tgt, z, i), a);
            for (k, v) in c.v.into_iter().enumerate() {
                m[k][i] = v;
            }
        }
        m
    }

    /// Index of the basis element that is a scalar multiple of the
    /// identity, if the identity has exactly one nonzero coordinate.
    pub fn identity_index(&self, x: usize) -> Option<usize> {
        let mut nz = self.ident[x].iter().enumerate().filter(|(_, c)| !c.is_zero());
        let (i, _) = nz.next()?;
        nz.next().is_none().then_some(i)
    }

    pub fn validate(&self) -> Result<(), String> {
        let n = self.objects;
        for x in 0..n {
            if self.ident[x].len() != self.dim(x, x) {
                return Err(format!("identity of object {x} has wrong length"));
            }
        }
        for (&(x, y, z), t) in &self.mult {
            if t.len() != self.dim(x, y) * self.dim(y, z) || t.iter().any(|v| v.len() != self.dim(x, z)) {
                return Err(format!("structure constants for ({x},{y},{z}) have wrong shape"));
            }
        }
        for x in 0..n {
            for y in 0..n {
                for i in 0..self.dim(x, y) {
                    let f = self.basis(x, y, i);
                    if self.compose(&self.identity(y), &f) != f || self.compose(&f, &self.identity(x)) != f {
                        return Err(format!("unit law fails for basis {i} of hom({x},{y})"));
                    }
                }
            }
        }
        for w in 0..n {
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        for i in 0..self.dim(w, x) {
                            for j in 0..self.dim(x, y) {
                                for k in 0..self.dim(y, z) {
                                    let (f, g, h) = (self.basis(w, x, i), self.basis(x, y, j), self.basis(y, z, k));
                                    let a = self.compose(&h, &self.compose(&g, &f));
                                    let b = self.compose(&self.compose(&h, &g), &f);
                                    if a != b {
                                        return Err(format!("associativity fails on hom({w},{x})[{i}], hom({x},{y})[{j}], hom({y},{z})[{k}]"));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Does `m` have a two-sided inverse? Found by solving `m . x = 1`
    /// and checking `x . m = 1`.
    pub fn inverse(&self, m: &Mor<S>) -> Option<Mor<S>> {
        let a = self.left_matrix(m, m.tgt);
        // a maps hom(tgt, src) -> hom(tgt, tgt)
        let x = crate::linalg::dense_solve(&a, &self.ident[m.tgt])?;
        let inv = Mor { src: m.tgt, tgt: m.src, v: x };
        (self.compose(&inv, m) == self.identity(m.src)).then_some(inv)
    }
}

/// A linear functor between two linear categories.
#[derive(Clone, Debug)]
pub struct LinFunctor<S: Scalar> {
    pub obj: Vec<usize>,
    /// `(x,y) -> images of the basis of hom(x,y)`.
    pub maps: HashMap<(usize, usize), Vec<Vec<S>>>,
}

impl<S: Scalar> LinFunctor<S> {
    pub fn identity(c: &LinearCategory<S>) -> Self {
        let mut maps = HashMap::new();
        for x in 0..c.objects {
            for y in 0..c.objects {
                let d = c.dim(x, y);
                maps.insert((x, y), (0..d).map(|i| unit(d, i)).collect());
            }
        }
        LinFunctor { obj: (0..c.objects).collect(), maps }
    }

    pub fn apply(&self, target: &LinearCategory<S>, m: &Mor<S>) -> Mor<S> {
        let (x, y) = (self.obj[m.src], self.obj[m.tgt]);
        let mut out = zeros(target.dim(x, y));
        if let Some(imgs) = self.maps.get(&(m.src, m.tgt)) {
            for (i, c) in m.support() {
                axpy(&mut out, c, &imgs[i]);
            }
        }
        Mor { src: x, tgt: y, v: out }
    }

    /// Matrix of the action on hom(x,y).
    pub fn matrix(&self, source: &LinearCategory<S>, target: &LinearCategory<S>, x: usize, y: usize) -> Dense<S> {
        let (din, dout) = (source.dim(x, y), target.dim(self.obj[x], self.obj[y]));
        let mut m = vec![zeros(din); dout];
        if let Some(imgs) = self.maps.get(&(x, y)) {
            for (i, img) in imgs.iter().enumerate() {
                for (k, v) in img.iter().enumerate() {
                    m[k][i] = v.clone();
                }
            }
        }
        m
    }

    pub fn is_identity(&self, c: &LinearCategory<S>) -> bool {
        (0..c.objects).all(|x| self.obj[x] == x)
            && (0..c.objects).all(|x| {
                (0..c.objects).all(|y| (0..c.dim(x, y)).all(|i| self.apply(c, &c.basis(x, y, i)) == c.basis(x, y, i)))
            })
    }

    pub fn validate(&self, source: &LinearCategory<S>, target: &LinearCategory<S>) -> Result<(), String> {
        if self.obj.len() != source.objects || self.obj.iter().any(|&o| o >= target.objects) {
            return Err("object map has wrong shape".into());
        }
        for ((x, y), imgs) in &self.maps {
            if imgs.len() != source.dim(*x, *y) || imgs.iter().any(|v| v.len() != target.dim(self.obj[*x], self.obj[*y])) {
                return Err(format!("image table for hom({x},{y}) has wrong shape"));
            }
        }
        for x in 0..source.objects {
            if self.apply(target, &source.identity(x)) != target.identity(self.obj[x]) {
                return Err(format!("identity of object {x} not preserved"));
            }
        }
        let n = source.objects;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    for i in 0..source.dim(x, y) {
                        for j in 0..source.dim(y, z) {
                            let (f, g) = (source.basis(x, y, i), source.basis(y, z, j));
                            let lhs = self.apply(target, &source.compose(&g, &f));
                            let rhs = target.compose(&self.apply(target, &g), &self.apply(target, &f));
                            if lhs != rhs {
                                return Err(format!("composition of hom({y},{z})[{j}] . hom({x},{y})[{i}] not preserved"));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Check naturality of `eta: F => G` with components `eta[x]: F x -> G x`.
pub fn check_natural<S: Scalar>(
    source: &LinearCategory<S>,
    target: &LinearCategory<S>,
    f: &dyn Fn(&Mor<S>) -> Mor<S>,
    g: &dyn Fn(&Mor<S>) -> Mor<S>,
    eta: &dyn Fn(usize) -> Mor<S>,
) -> Result<(), String> {
    for x in 0..source.objects {
        for y in 0..source.objects {
            for i in 0..source.dim(x, y) {
                let a = source.basis(x, y, i);
                let lhs = target.compose(&eta(y), &f(&a));
                let rhs = target.compose(&g(&a), &eta(x));
                if lhs != rhs {
                    return Err(format!("naturality fails on hom({x},{y})[{i}]"));
                }
            }
        }
    }
    Ok(())
}

/// One-object category k.
pub fn ground<S: Scalar>() -> LinearCategory<S> {
    let mut c = LinearCategory::empty(vec![vec![1]]);
    c.ident[0] = vec![S::one()];
    c.set_product(0, 0, 0, 0, 0, vec![S::one()]);
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Q;

    /// Two objects, hom(P,Q) = k[t]/t^2 with basis {1, t}.
    fn matrix_cat() -> LinearCategory<Q> {
        let mut c = LinearCategory::empty(vec![vec![2, 2], vec![2, 2]]);
        for x in 0..2 {
            c.ident[x] = vec![Q::one(), Q::zero()];
            for y in 0..2 {
                for z in 0..2 {
                    for j in 0..2 {
                        for i in 0..2 {
                            let v = if i + j >= 2 { zeros(2) } else { unit(2, i + j) };
                            c.set_product(x, y, z, j, i, v);
                        }
                    }
                }
            }
        }
        c
    }

    #[test]
    fn truncated_polynomial_category_is_valid() {
        let c = matrix_cat();
        c.validate().unwrap();
        let z = Mor { src: 0, tgt: 1, v: vec![Q::from_i64(2), Q::one()] };
        let zi = c.inverse(&z).unwrap();
        assert_eq!(zi.v, vec![Q::new(1, 2), Q::new(-1, 4)]);
        assert!(c.inverse(&Mor { src: 0, tgt: 1, v: vec![Q::zero(), Q::one()] }).is_none());
        assert_eq!(c.identity_index(0), Some(0));
    }

    #[test]
    fn broken_associativity_detected() {
        let mut c = matrix_cat();
        c.set_product(0, 0, 0, 1, 1, unit(2, 1));
        assert!(c.validate().is_err());
    }

    #[test]
    fn identity_functor_is_functor() {
        let c = matrix_cat();
        let f = LinFunctor::identity(&c);
        f.validate(&c, &c).unwrap();
        assert!(f.is_identity(&c));
    }
}
