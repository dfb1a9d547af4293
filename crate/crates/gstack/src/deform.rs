//! First-order deformations.
//!
//! A normalized-reduced 2-cochain `(m, f, c)` of the diagonal GS complex
//! perturbs products (`C^{0,2}`), restriction maps (`C^{1,1}`) and twists
//! (`C^{2,0}`) of a prestack over `k[e]/e^2`. The result satisfies the
//! prestack axioms exactly when the cochain is a cocycle.
//!
//! A 1-cochain `(g, h)` gives a candidate equivalence: `1 - e g` on each
//! fibre and `1 - e h` as the comparison `Phi_V u* => u'* Phi_U`. It
//! identifies the deformations of `x` and `x + d(g, h)`.

use crate::basecat::Simplex;
use crate::gscomplex::{Gs, Key, Space};
use crate::lincat::Mor;
use crate::linalg::{axpy, cohomology_reps, zeros, Dual, Field, Scalar};
use crate::prestack::{diagonal_bimodule, Prestack};
use crate::{Error, Result};

// Restriction and twist perturbations enter with sign +1. The
// equivalence onto `x + d y` is `(1 - e g, 1 - e h)`.
const SIGN_F: i64 = 1;
const SIGN_C: i64 = 1;
const SIGN_G: i64 = -1;
const SIGN_H: i64 = -1;

/// `v + e s w` coordinatewise.
fn add_eps<S: Scalar>(v: &mut [Dual<S>], s: i64, w: &[S]) {
    let s = S::from_i64(s);
    for (x, y) in v.iter_mut().zip(w) {
        x.b = x.b.add(&s.mul(y));
    }
}

fn check_nr<S: Scalar>(p: &Prestack<S>, sp: &Space, x: &[S]) -> Result<()> {
    let m = diagonal_bimodule(p);
    let gs = Gs::new(p, &m);
    for (i, k) in sp.keys.iter().enumerate() {
        let v = &x[sp.offsets[i]..sp.offsets[i] + sp.dims[i]];
        if !gs.is_nr_key(k) && v.iter().any(|c| !c.is_zero()) {
            return Err(Error::Invalid(format!("cochain is nonzero at the non-normalized position {k:?}")));
        }
    }
    Ok(())
}

/// The prestack over dual numbers defined by a normalized-reduced
/// 2-cochain given in coordinates of `sp` (degree 2 of the GS complex).
pub fn build_deformation<S: Scalar>(p: &Prestack<S>, sp: &Space, x: &[S]) -> Result<Prestack<Dual<S>>> {
    if sp.degree != 2 || x.len() != sp.total {
        return Err(Error::Shape("deformations need a 2-cochain".into()));
    }
    if !p.identities_are_basic() {
        return Err(Error::Unsupported("deformations need identities that are basis vectors".into()));
    }
    check_nr(p, sp, x)?;
    let b = &p.base;
    let mut q = p.map_scalars(&|a: &S| Dual::lift(a.clone()));
    for (i, k) in sp.keys.iter().enumerate() {
        let v = &x[sp.offsets[i]..sp.offsets[i] + sp.dims[i]];
        if v.iter().all(|c| c.is_zero()) {
            continue;
        }
        match k.simplex.arrows.len() {
            0 => {
                // m(a_1, a_2): a_1 in hom(A_1, A_2) is applied last
                let fib = &mut q.fibers[k.simplex.start];
                let (x0, x1, x2) = (k.objs[0], k.objs[1], k.objs[2]);
                let (j, i2) = (k.basis[0], k.basis[1]);
                let cur = {
                    let f = fib.basis(x0, x1, i2);
                    let g = fib.basis(x1, x2, j);
                    fib.compose(&g, &f).v
                };
                let mut val = cur;
                add_eps(&mut val, 1, v);
                fib.set_product(x0, x1, x2, j, i2, val);
            }
            1 => {
                let u = k.simplex.arrows[0];
                let (a0, a1) = (k.objs[0], k.objs[1]);
                let d = p.fibers[b.src(u)].dim(p.restrict_obj(u, a0), p.restrict_obj(u, a1));
                let imgs = q.restr[u].maps.entry((a0, a1)).or_insert_with(|| vec![zeros(d); p.fibers[b.tgt(u)].dim(a0, a1)]);
                add_eps(&mut imgs[k.basis[0]], SIGN_F, v);
            }
            _ => {
                let (f, g) = (k.simplex.arrows[0], k.simplex.arrows[1]);
                let comps = q.twists.get_mut(&(f, g)).ok_or_else(|| Error::Invalid(format!("no twist for ({f},{g})")))?;
                add_eps(&mut comps[k.objs[0]].v, SIGN_C, v);
            }
        }
    }
    Ok(q)
}

/// Position and value of every nonzero component of `d x`.
pub fn cocycle_defects<S: Scalar>(p: &Prestack<S>, x: &[S]) -> Vec<(Key, Vec<S>)> {
    let m = diagonal_bimodule(p);
    let gs = Gs::new(p, &m);
    let (s2, s3) = (gs.space(2), gs.space(3));
    let dx = gs.d_apply(&s2, &s3, x);
    s3.to_cochain(&dx).comps.into_iter().collect()
}

/// Data of a candidate first-order equivalence.
pub struct Equivalence<'a, S: Scalar> {
    pub from: &'a Prestack<Dual<S>>,
    pub to: &'a Prestack<Dual<S>>,
    pub sp: &'a Space,
    /// 1-cochain in coordinates of `sp`.
    pub y: &'a [S],
}

impl<S: Scalar> Equivalence<'_, S> {
    fn g(&self, u: usize, a0: usize, a1: usize, i: usize) -> Option<Vec<S>> {
        let k = Key { simplex: Simplex { start: u, arrows: vec![] }, objs: vec![a0, a1], basis: vec![i] };
        self.sp.slice(self.y, &k)
    }

    /// `Phi_U` on a morphism of the fibre over `u`.
    pub fn phi(&self, u: usize, m: &Mor<Dual<S>>) -> Mor<Dual<S>> {
        let mut out = m.v.clone();
        for (i, c) in m.support() {
            if let Some(g) = self.g(u, m.src, m.tgt, i) {
                let mut w = zeros::<S>(out.len());
                axpy(&mut w, &c.a.mul(&S::from_i64(SIGN_G)), &g);
                add_eps(&mut out, 1, &w);
            }
        }
        Mor { src: m.src, tgt: m.tgt, v: out }
    }

    /// Component of the comparison along arrow `u` at object `a`.
    pub fn theta(&self, u: usize, a: usize) -> Mor<Dual<S>> {
        let b = &self.from.base;
        let fib = &self.from.fibers[b.src(u)];
        let x = self.from.restrict_obj(u, a);
        let mut id = fib.identity(x);
        let k = Key { simplex: Simplex { start: b.src(u), arrows: vec![u] }, objs: vec![a], basis: vec![] };
        if let Some(h) = self.sp.slice(self.y, &k) {
            add_eps(&mut id.v, SIGN_H, &h);
        }
        id
    }

    /// First violated axiom, if any.
    pub fn check(&self) -> std::result::Result<(), String> {
        let (p, q) = (self.from, self.to);
        let b = &p.base;
        for u in 0..b.objects {
            let (fp, fq) = (&p.fibers[u], &q.fibers[u]);
            for x in 0..fp.objects {
                if self.phi(u, &fp.identity(x)) != fq.identity(x) {
                    return Err(format!("Phi_{u} does not preserve the identity of {x}"));
                }
                for y in 0..fp.objects {
                    for z in 0..fp.objects {
                        for i in 0..fp.dim(x, y) {
                            for j in 0..fp.dim(y, z) {
                                let (f, g) = (fp.basis(x, y, i), fp.basis(y, z, j));
                                let lhs = self.phi(u, &fp.compose(&g, &f));
                                let rhs = fq.compose(&self.phi(u, &g), &self.phi(u, &f));
                                if lhs != rhs {
                                    return Err(format!("Phi_{u} is not multiplicative on hom({y},{z})[{j}] . hom({x},{y})[{i}]"));
                                }
                            }
                        }
                    }
                }
            }
        }
        for u in 0..b.n_arrows() {
            let (fu, fv) = (&p.fibers[b.tgt(u)], &q.fibers[b.src(u)]);
            for x in 0..fu.objects {
                if b.is_identity(u) && self.theta(u, x) != fv.identity(x) {
                    return Err(format!("comparison along identity arrow {u} is not the identity"));
                }
                for y in 0..fu.objects {
                    for i in 0..fu.dim(x, y) {
                        let a = fu.basis(x, y, i);
                        let lhs = fv.compose(&self.theta(u, y), &self.phi(b.src(u), &p.restrict_mor(u, &a)));
                        let rhs = fv.compose(&q.restrict_mor(u, &self.phi(b.tgt(u), &a)), &self.theta(u, x));
                        if lhs != rhs {
                            return Err(format!("comparison along arrow {u} is not natural on hom({x},{y})[{i}]"));
                        }
                    }
                }
            }
        }
        for (g, f, gf) in b.compose_triples() {
            let fx = &q.fibers[b.src(f)];
            for c in 0..p.fibers[b.tgt(g)].objects {
                let lhs = fx.compose(&self.theta(gf, c), &self.phi(b.src(f), &p.twist(f, g, c)));
                let mid = fx.compose(&q.restrict_mor(f, &self.theta(g, c)), &self.theta(f, p.restrict_obj(g, c)));
                let rhs = fx.compose(&q.twist(f, g, c), &mid);
                if lhs != rhs {
                    return Err(format!("comparison does not respect the twist of ({f},{g}) at object {c}"));
                }
            }
        }
        Ok(())
    }
}

/// Cohomology of the normalized-reduced complex in degree 2.
pub struct H2<S: Scalar> {
    pub space: Space,
    /// Coordinates of the nr positions inside `space`.
    pub nr: Vec<usize>,
    /// Representatives as full-space coordinate vectors.
    pub reps: Vec<Vec<S>>,
}

impl<S: Scalar> H2<S> {
    pub fn dim(&self) -> usize {
        self.reps.len()
    }
}

pub fn lift_nr<S: Scalar>(total: usize, nr: &[usize], v: &[S]) -> Vec<S> {
    let mut x = zeros(total);
    for (&c, a) in nr.iter().zip(v) {
        x[c] = a.clone();
    }
    x
}

pub fn classify_h2<S: Field>(p: &Prestack<S>) -> Result<H2<S>> {
    let m = diagonal_bimodule(p);
    let gs = Gs::new(p, &m);
    let space = gs.space(2);
    let nr = gs.nr_coords(&space)?;
    let (d_in, d_out) = (gs.nr_d_matrix(2)?, gs.nr_d_matrix(3)?);
    let reps = cohomology_reps(&d_in, &d_out).iter().map(|v| lift_nr(space.total, &nr, v)).collect();
    Ok(H2 { space, nr, reps })
}

/// Is `x2 - x1 = d y` for some nr 1-cochain `y`? Decided by solving the
/// equivalence axioms directly: their first-order residual is affine in
/// `y`, so it is sampled at 0 and at each unit vector.
pub fn equivalence_exists<S: Field>(p: &Prestack<S>, x1: &[S], x2: &[S]) -> Result<Option<Vec<S>>> {
    let m = diagonal_bimodule(p);
    let gs = Gs::new(p, &m);
    let (s1, s2) = (gs.space(1), gs.space(2));
    let nr1 = gs.nr_coords(&s1)?;
    let (a, b) = (build_deformation(p, &s2, x1)?, build_deformation(p, &s2, x2)?);
    let resid = |y: &[S]| equivalence_residual(&a, &b, &s1, y);
    let r0 = resid(&zeros(s1.total));
    let mut cols = Vec::new();
    for &c in &nr1 {
        let mut y = zeros(s1.total);
        y[c] = S::one();
        let r = resid(&y);
        cols.push(r.iter().zip(&r0).map(|(u, v)| u.sub(v)).collect::<Vec<_>>());
    }
    let rows = r0.len();
    let mat: Vec<Vec<S>> = (0..rows).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect();
    let rhs: Vec<S> = r0.iter().map(|v| v.neg()).collect();
    if nr1.is_empty() {
        return Ok(r0.iter().all(|v| v.is_zero()).then(Vec::new));
    }
    Ok(crate::linalg::dense_solve(&mat, &rhs).map(|z| lift_nr(s1.total, &nr1, &z)))
}

/// Every first-order coordinate of `lhs - rhs` over all equivalence axioms,
/// in a fixed order.
fn equivalence_residual<S: Scalar>(p: &Prestack<Dual<S>>, q: &Prestack<Dual<S>>, sp: &Space, y: &[S]) -> Vec<S> {
    let e = Equivalence { from: p, to: q, sp, y };
    let b = &p.base;
    let mut out = Vec::new();
    let mut push = |l: Mor<Dual<S>>, r: Mor<Dual<S>>| {
        out.extend(l.v.iter().zip(&r.v).map(|(x, z)| x.b.sub(&z.b)));
    };
    for u in 0..b.objects {
        let (fp, fq) = (&p.fibers[u], &q.fibers[u]);
        for x in 0..fp.objects {
            for y in 0..fp.objects {
                for z in 0..fp.objects {
                    for i in 0..fp.dim(x, y) {
                        for j in 0..fp.dim(y, z) {
                            let (f, g) = (fp.basis(x, y, i), fp.basis(y, z, j));
                            push(e.phi(u, &fp.compose(&g, &f)), fq.compose(&e.phi(u, &g), &e.phi(u, &f)));
                        }
                    }
                }
            }
        }
    }
    for u in 0..b.n_arrows() {
        let (fu, fv) = (&p.fibers[b.tgt(u)], &q.fibers[b.src(u)]);
        for x in 0..fu.objects {
            for y in 0..fu.objects {
                for i in 0..fu.dim(x, y) {
                    let a = fu.basis(x, y, i);
                    push(
                        fv.compose(&e.theta(u, y), &e.phi(b.src(u), &p.restrict_mor(u, &a))),
                        fv.compose(&q.restrict_mor(u, &e.phi(b.tgt(u), &a)), &e.theta(u, x)),
                    );
                }
            }
        }
    }
    for (g, f, gf) in b.compose_triples() {
        let fx = &q.fibers[b.src(f)];
        for c in 0..p.fibers[b.tgt(g)].objects {
            let lhs = fx.compose(&e.theta(gf, c), &e.phi(b.src(f), &p.twist(f, g, c)));
            let mid = fx.compose(&q.restrict_mor(f, &e.theta(g, c)), &e.theta(f, p.restrict_obj(g, c)));
            push(lhs, fx.compose(&q.twist(f, g, c), &mid));
        }
    }
    out
}

/// Run the generic prestack validator over dual numbers.
pub fn validate_deformation<S: Scalar>(q: &Prestack<Dual<S>>) -> Result<()> {
    q.validate()
}

/// Decide whether the 1-cochain `y` relates the deformations of `x1` and
/// `x2`, by two routes: the equivalence axioms and the coboundary identity
/// `x2 - x1 = d y`. Disagreement between the routes is an error.
pub fn equivalence_from_cochain<S: Scalar>(p: &Prestack<S>, y: &[S], x1: &[S], x2: &[S]) -> Result<bool> {
    let m = diagonal_bimodule(p);
    let gs = Gs::new(p, &m);
    let (s1, s2) = (gs.space(1), gs.space(2));
    check_nr(p, &s1, y)?;
    let (a, b) = (build_deformation(p, &s2, x1)?, build_deformation(p, &s2, x2)?);
    let axioms = Equivalence { from: &a, to: &b, sp: &s1, y }.check();
    let dy = gs.d_apply(&s1, &s2, y);
    let cob = x1.iter().zip(&dy).zip(x2).all(|((a, d), b)| a.add(d) == *b);
    if axioms.is_ok() != cob {
        return Err(Error::Invalid(format!("equivalence axioms ({axioms:?}) disagree with the coboundary identity ({cob})")));
    }
    Ok(cob)
}

/// `x + d y` and its deformation, after checking that `y` gives an
/// equivalence onto it.
pub fn shift_by_coboundary<S: Scalar>(p: &Prestack<S>, x: &[S], y: &[S]) -> Result<(Vec<S>, Prestack<Dual<S>>)> {
    let m = diagonal_bimodule(p);
    let gs = Gs::new(p, &m);
    let (s1, s2) = (gs.space(1), gs.space(2));
    let dy = gs.d_apply(&s1, &s2, y);
    let x2: Vec<S> = x.iter().zip(&dy).map(|(a, b)| a.add(b)).collect();
    if !equivalence_from_cochain(p, y, x, &x2)? {
        return Err(Error::Invalid("coboundary shift is not an equivalence".into()));
    }
    Ok((x2.clone(), build_deformation(p, &s2, &x2)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::Q;

    fn nr_samples(p: &Prestack<Q>, seed: u64, n: usize) -> (Space, Vec<Vec<Q>>) {
        let m = diagonal_bimodule(p);
        let gs = Gs::new(p, &m);
        let sp = gs.space(2);
        let nr = gs.nr_coords(&sp).unwrap();
        let d3 = gs.nr_d_matrix(3).unwrap();
        let ker = d3.kernel_basis();
        let mut out = Vec::new();
        for t in 0..n as u64 {
            let x = if t % 2 == 0 && !ker.is_empty() {
                // random cocycle
                let w = crate::gscomplex::Space::new(0, (0..ker.len()).map(|i| (Key { simplex: Simplex { start: 0, arrows: vec![] }, objs: vec![i], basis: vec![] }, 1)).collect());
                let c = w.random::<Q>(seed + t, None);
                let mut v = zeros::<Q>(nr.len());
                for (ci, k) in c.iter().zip(&ker) {
                    axpy(&mut v, ci, k);
                }
                lift_nr(sp.total, &nr, &v)
            } else {
                sp.random::<Q>(seed + t, Some(&nr))
            };
            out.push(x);
        }
        (sp, out)
    }

    #[test]
    fn valid_iff_cocycle() {
        for (name, p) in fixtures::all::<Q>() {
            let (sp, xs) = nr_samples(&p, 40, 12);
            let mut seen = (0, 0);
            for x in xs {
                let cocycle = cocycle_defects(&p, &x).is_empty();
                let valid = validate_deformation(&build_deformation(&p, &sp, &x).unwrap());
                assert_eq!(cocycle, valid.is_ok(), "{name}: {valid:?}");
                if cocycle { seen.0 += 1 } else { seen.1 += 1 }
            }
            assert!(seen.0 > 0, "{name}: no cocycle sampled");
        }
    }

    #[test]
    fn coboundary_shift_is_equivalent() {
        for (name, p) in fixtures::all::<Q>() {
            let m = diagonal_bimodule(&p);
            let gs = Gs::new(&p, &m);
            let s1 = gs.space(1);
            let nr1 = gs.nr_coords(&s1).unwrap();
            let (_, xs) = nr_samples(&p, 5, 4);
            for (t, x) in xs.iter().enumerate().filter(|(_, x)| cocycle_defects(&p, x).is_empty()) {
                let y = s1.random::<Q>(100 + t as u64, Some(&nr1));
                let (x2, _) = shift_by_coboundary(&p, x, &y).unwrap_or_else(|e| panic!("{name}: {e}"));
                assert!(equivalence_exists(&p, x, &x2).unwrap().is_some());
                // the identity does not relate x to a shifted copy unless d y = 0
                let zero = zeros::<Q>(s1.total);
                let dy_zero = x2 == *x;
                assert_eq!(equivalence_from_cochain(&p, &zero, x, &x2).unwrap(), dy_zero);
                // and y relates nothing but x + d y
                if !dy_zero {
                    assert!(!equivalence_from_cochain(&p, &y, x, x).unwrap());
                }
            }
        }
    }

    #[test]
    fn rank2_has_classes_and_they_are_distinct() {
        let p = fixtures::rank2_fiber::<Q>();
        let h = classify_h2(&p).unwrap();
        assert!(h.dim() > 0);
        let zero = zeros::<Q>(h.space.total);
        for r in &h.reps {
            build_deformation(&p, &h.space, r).unwrap().validate().unwrap();
            assert!(equivalence_exists(&p, &zero, r).unwrap().is_none());
        }
    }

    #[test]
    fn non_nr_cochain_rejected() {
        let p = fixtures::triv_a2::<Q>();
        let m = diagonal_bimodule(&p);
        let sp = Gs::new(&p, &m).space(2);
        let x = sp.random::<Q>(1, None);
        assert!(build_deformation(&p, &sp, &x).is_err());
    }
}
