//! Built-in example prestacks.

use std::collections::HashMap;

use crate::basecat::BaseCategory;
use crate::lincat::{ground, LinFunctor, LinearCategory, Mor};
use crate::linalg::{unit, zeros, Scalar};
use crate::prestack::Prestack;

pub const NAMES: [&str; 5] = ["triv-A2", "triv-A3", "scalar-twist-2chain", "scalar-twist-3chain", "rank2-fiber"];

pub fn by_name<S: Scalar>(name: &str) -> Option<Prestack<S>> {
    Some(match name {
        "triv-A2" => triv_a2(),
        "triv-A3" => triv_a3(),
        "scalar-twist-2chain" => scalar_twist_2chain(S::from_i64(3)),
        "scalar-twist-3chain" => scalar_twist_3chain(),
        "scalar-twist-3chain-incoherent" => scalar_twist_3chain_incoherent(),
        "rank2-fiber" => rank2_fiber(),
        _ => return None,
    })
}

pub fn all<S: Scalar>() -> Vec<(&'static str, Prestack<S>)> {
    NAMES.iter().map(|n| (*n, by_name(n).unwrap())).collect()
}

/// Constant presheaf k on 0 < 1.
pub fn triv_a2<S: Scalar>() -> Prestack<S> {
    Prestack::constant(BaseCategory::chain(2), ground())
}

/// Constant presheaf k on 0 < 1 < 2.
pub fn triv_a3<S: Scalar>() -> Prestack<S> {
    Prestack::constant(BaseCategory::chain(3), ground())
}

/// k on 0 < 1 < 2 with the twist of the pair (0<1, 1<2) scaled by `lambda`.
pub fn scalar_twist_2chain<S: Scalar>(lambda: S) -> Prestack<S> {
    let mut p = triv_a3();
    let (a, b) = (p.base.chain_arrow(0, 1), p.base.chain_arrow(1, 2));
    p.twists.insert((a, b), vec![Mor { src: 0, tgt: 0, v: vec![lambda] }]);
    p
}

/// Weights used to build a coherent scalar twist on 0 < 1 < 2 < 3.
fn weight(i: usize, j: usize) -> i64 {
    (2 + i + 2 * j) as i64
}

fn scalar_3chain<S: Scalar>(perturb: bool) -> Prestack<S> {
    let mut p = Prestack::constant(BaseCategory::chain(4), ground());
    let b = p.base.clone();
    let h = |a: usize| {
        let (i, j) = b.arrows[a];
        S::from_i64(weight(i, j))
    };
    for (g, f, gf) in b.compose_triples() {
        if b.is_identity(f) || b.is_identity(g) {
            continue;
        }
        let mut lam = h(gf).mul(&h(f).mul(&h(g)).inv().expect("weights are units"));
        if perturb && b.arrows[f] == (0, 1) && b.arrows[g] == (1, 2) {
            lam = lam.mul(&S::from_i64(2));
        }
        p.twists.insert((f, g), vec![Mor { src: 0, tgt: 0, v: vec![lam] }]);
    }
    p
}

/// k on 0 < 1 < 2 < 3 with twists `h(gf) / (h(f) h(g))`.
pub fn scalar_twist_3chain<S: Scalar>() -> Prestack<S> {
    scalar_3chain(false)
}

/// As [`scalar_twist_3chain`] with one twist doubled, breaking coherence.
pub fn scalar_twist_3chain_incoherent<S: Scalar>() -> Prestack<S> {
    scalar_3chain(true)
}

/// Two objects X, Y with every hom space k[t]/t^2 (basis 1, t) and
/// composition by multiplication.
pub fn truncated_matrix_category<S: Scalar>() -> LinearCategory<S> {
    let mut c = LinearCategory::empty(vec![vec![2, 2], vec![2, 2]]);
    for x in 0..2 {
        c.ident[x] = unit(2, 0);
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

/// Base: the monoid {1, e} with e e = e. Fibre: [`truncated_matrix_category`].
/// `e*` swaps X and Y; `tau(e,e)` has components `2 + t` from C to the
/// other object.
pub fn rank2_fiber<S: Scalar>() -> Prestack<S> {
    let base = BaseCategory::idempotent();
    let fib = truncated_matrix_category::<S>();
    let mut maps = HashMap::new();
    for x in 0..2 {
        for y in 0..2 {
            maps.insert((x, y), vec![unit(2, 0), unit(2, 1)]);
        }
    }
    let swap = LinFunctor { obj: vec![1, 0], maps };
    let restr = vec![LinFunctor::identity(&fib), swap];
    let z = vec![S::from_i64(2), S::one()];
    let mut twists = HashMap::new();
    twists.insert((1, 1), vec![Mor { src: 0, tgt: 1, v: z.clone() }, Mor { src: 1, tgt: 0, v: z }]);
    Prestack { base, fibers: vec![fib], restr, twists }
}
