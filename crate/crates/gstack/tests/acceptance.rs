//! Acceptance run: one PASS/FAIL line per criterion, exact arithmetic
//! throughout. Exits nonzero if any criterion fails.

use std::cell::RefCell;
use std::collections::HashMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gstack::basecat::BaseCategory;
use gstack::cli::{brute_shuffle_count, cohomology, differential, Complex};
use gstack::combinatorics::{conditioned_shuffles, eval_path, flip, paths, shuffles};
use gstack::compare::Compare;
use gstack::deform::{build_deformation, classify_h2, cocycle_defects, equivalence_exists, equivalence_from_cochain, lift_nr, validate_deformation};
use gstack::fixtures;
use gstack::gscomplex::{Gs, Key, Lookup, Space};
use gstack::linalg::{dense_rank, Field, Fp, Scalar, SparseMatrix, Q};
use gstack::prestack::{diagonal_bimodule, Prestack};

type Op<'a> = &'a dyn Fn(Lookup<Vec<Q>>, &Key) -> Vec<Q>;

const SEED: u64 = 20240611;
/// Spaces with more keys than this are checked pointwise at sampled keys.
const FULL_APPLY_LIMIT: usize = 2500;
const SAMPLED_KEYS: usize = 150;

fn fact(n: usize) -> usize {
    (1..=n).product()
}

fn binom(n: usize, k: usize) -> usize {
    fact(n) / (fact(k) * fact(n - k))
}

fn zero(v: &[Q]) -> bool {
    v.iter().all(|c| c.is_zero())
}

/// Output keys to inspect: all of them for small spaces, a seeded sample
/// otherwise.
fn keys_to_check(sp: &Space, seed: u64) -> Vec<Key> {
    if sp.keys.len() <= FULL_APPLY_LIMIT {
        return sp.keys.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..SAMPLED_KEYS).map(|_| sp.keys[rng.gen_range(0..sp.keys.len())].clone()).collect()
}

/// `outer(inner(x))` at `keys`, with `inner` evaluated lazily and memoised
/// over `mid`. Returns the first key where `outer(inner x) - other(x)` is
/// nonzero; `other` defaults to zero.
fn composite_zero(x_space: &Space, x: &[Q], mid: &Space, inner: Op, outer: Op, other: Option<Op>, keys: &[Key]) -> Option<Key> {
    let look0 = |k: &Key| x_space.slice(x, k);
    let memo: RefCell<HashMap<Key, Vec<Q>>> = RefCell::new(HashMap::new());
    let look1 = |k: &Key| -> Option<Vec<Q>> {
        if !mid.index.contains_key(k) {
            return None;
        }
        if let Some(v) = memo.borrow().get(k) {
            return Some(v.clone());
        }
        let v = inner(&look0, k);
        memo.borrow_mut().insert(k.clone(), v.clone());
        Some(v)
    };
    for k in keys {
        let mut v = outer(&look1, k);
        if let Some(o) = other {
            let w = o(&look0, k);
            v = v.iter().zip(&w).map(|(a, b)| a.sub(b)).collect();
        }
        if !zero(&v) {
            return Some(k.clone());
        }
    }
    None
}

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome { ok: true, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { ok: false, detail: detail.into() }
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        if !$cond {
            return fail(format!($($fmt)*));
        }
    };
}

// ---------------------------------------------------------------------------

fn c1_paths() -> Outcome {
    let b = BaseCategory::chain(7);
    let sigma = |n: usize| (0..n).map(|i| b.chain_arrow(i, i + 1)).collect::<Vec<_>>();
    for n in 2..=6 {
        let ps = paths(&b, &sigma(n));
        ensure!(ps.len() == fact(n - 1), "|P| = {} on a {n}-simplex", ps.len());
    }
    let mut flips = 0;
    for n in 3..=5 {
        for r in paths(&b, &sigma(n)) {
            for k in 1..=n - 2 {
                let f = flip(&b, &r, k).unwrap();
                ensure!(f.sign == -r.sign, "flip keeps the sign of {:?}", r.recipe);
                ensure!(flip(&b, &f, k).unwrap() == r, "flip twice moves {:?}", r.recipe);
                flips += 1;
            }
        }
    }
    let mut norms = 0;
    for (name, p) in fixtures::all::<Q>() {
        for n in 2..=5 {
            for s in p.base.nerve(n) {
                let ps = paths(&p.base, &s.arrows);
                for c in 0..p.fibers[p.base.end(&s)].objects {
                    let v0 = eval_path(&p, &ps[0], c);
                    ensure!(ps.iter().all(|r| eval_path(&p, r, c) == v0), "{name}: ||r|| depends on the path over {:?}", s.arrows);
                    norms += 1;
                }
            }
        }
    }
    pass(format!("(p-1)! for p=2..6; {flips} flips; ||r|| constant on {norms} (simplex, object) pairs"))
}

fn c2_shuffles() -> Outcome {
    for m in 0..=5 {
        for n in 0..=5 {
            let got = shuffles(&[m, n]).len();
            let brute = brute_shuffle_count(&[m, n], false);
            ensure!(got == binom(m + n, m) && brute == got, "S({m},{n}): enumerated {got}, brute force {brute}");
            let cg = conditioned_shuffles(&[m, n]).len();
            ensure!(cg == brute_shuffle_count(&[m, n], true), "conditioned S({m},{n}) disagrees with brute force");
        }
    }
    ensure!(shuffles(&[2, 1]).len() == 3, "|S(2,1)| != 3");
    ensure!(conditioned_shuffles(&[2, 2]).len() == 3, "conditioned (2,2) != 3");
    pass("C(m+n,m) for m,n <= 5 against brute force; |S(2,1)| = 3; conditioned (2,2) = 3")
}

/// `D_{n+1} D_n = 0` as matrices (D_n out of C^n) for n <= `mat_max`, and
/// pointwise on 50 random cochains per degree n <= 4.
fn square_zero(graded: bool) -> Outcome {
    let mut notes = Vec::new();
    for (name, p) in fixtures::all::<Q>() {
        let m = diagonal_bimodule(&p);
        let c = Compare::new(&p, &m);
        let space = |n| if graded { c.gr.space(n) } else { c.gs.space(n) };
        let mat = |n| if graded { c.gr.delta_matrix(n) } else { c.gs.d_matrix(n) };
        let op: Op = if graded { &|l, k| c.gr.delta_at(l, k) } else { &|l, k| c.gs.d_total_at(l, k) };
        let mut mat_max = 4;
        for n in 0..=4 {
            let s2 = space(n + 2);
            if s2.total > 150_000 {
                mat_max = n - 1;
                break;
            }
            ensure!(mat(n + 2).mul(&mat(n + 1)).is_zero(), "{name}: matrix product nonzero out of C^{n}");
        }
        if mat_max < 4 {
            notes.push(format!("{name}: matrices n<={mat_max}, pointwise beyond"));
        }
        for n in 0..=4 {
            let (s0, s1, s2) = (space(n), space(n + 1), space(n + 2));
            for t in 0..50 {
                let x = s0.random::<Q>(SEED + 100 * n as u64 + t, None);
                let keys = keys_to_check(&s2, SEED + t);
                if let Some(k) = composite_zero(&s0, &x, &s1, op, op, None, &keys) {
                    return fail(format!("{name}: nonzero at {k:?} for a random cochain in C^{n}"));
                }
            }
        }
    }
    let extra = if notes.is_empty() { String::new() } else { format!(" ({})", notes.join("; ")) };
    pass(format!("matrices n<=4 and 50 random cochains per degree on all fixtures{extra}"))
}

fn c5_chain_maps() -> Outcome {
    for (name, p) in fixtures::all::<Q>() {
        let m = diagonal_bimodule(&p);
        let c = Compare::new(&p, &m);
        for n in 0..=3 {
            let fd = c.f_matrix(n + 1).mul(&c.gs.d_matrix(n + 1));
            let df = c.gr.delta_matrix(n + 1).mul(&c.f_matrix(n));
            ensure!(fd.sub(&df).is_zero(), "{name}: F d != delta F on C^{n}");
            let gd = c.g_matrix(n + 1).mul(&c.gr.delta_matrix(n + 1));
            let dg = c.gs.d_matrix(n + 1).mul(&c.g_matrix(n));
            ensure!(gd.sub(&dg).is_zero(), "{name}: G delta != d G on C^{n}");
        }
    }
    pass("F d = delta F and G delta = d G as matrices on C^0..C^3, all fixtures")
}

fn c6_gf() -> Outcome {
    for (name, p) in fixtures::all::<Q>() {
        let m = diagonal_bimodule(&p);
        let c = Compare::new(&p, &m);
        for n in 0..=3 {
            let sp = c.gs.space(n);
            let nr = c.gs.nr_coords(&sp).unwrap();
            let gf = c.g_matrix(n).mul(&c.f_matrix(n)).sub(&SparseMatrix::identity(sp.total));
            ensure!(gf.submatrix(&(0..sp.total).collect::<Vec<_>>(), &nr).is_zero(), "{name}: GF != 1 on nr C^{n}");
        }
    }
    pass("GF - 1 vanishes on the nr columns of C^0..C^3, all fixtures")
}

fn c7_homotopy() -> Outcome {
    let cases = [("triv-A2", 3), ("triv-A3", 3), ("scalar-twist-2chain", 3), ("rank2-fiber", 2)];
    let mut nnz = 0;
    for (name, max) in cases {
        let p = fixtures::by_name::<Q>(name).unwrap();
        let m = diagonal_bimodule(&p);
        let c = Compare::new(&p, &m);
        for n in 0..=max {
            let tot = c.gr.space(n).total;
            let lhs = c.f_matrix(n).mul(&c.g_matrix(n)).sub(&SparseMatrix::identity(tot));
            let mut rhs = c.t_matrix(n + 1).mul(&c.gr.delta_matrix(n + 1));
            if n >= 1 {
                rhs = rhs.add(&c.gr.delta_matrix(n).mul(&c.t_matrix(n)));
            }
            ensure!(lhs.sub(&rhs).is_zero(), "{name}: FG - 1 != delta T + T delta in degree {n}");
            nnz += lhs.nnz();
        }
    }
    pass(format!("degrees <= 3 (<= 2 on rank2-fiber); FG - 1 has {nnz} nonzeros in total"))
}

fn betti_all<S: Field>(p: &Prestack<S>) -> Vec<[usize; 3]> {
    let g = cohomology(p, Complex::Gs, 3).unwrap();
    let r = cohomology(p, Complex::Nr, 3).unwrap();
    let h = cohomology(p, Complex::Graded, 3).unwrap();
    (0..=3).map(|n| [g[n], r[n], h[n]]).collect()
}

/// Dense oracle: dim H^n from dense ranks, where the matrices are small
/// enough to densify.
fn dense_betti(p: &Prestack<Q>, complex: Complex, n: usize) -> Option<usize> {
    let (a, b) = (differential(p, complex, n).unwrap(), differential(p, complex, n + 1).unwrap());
    if a.rows * a.cols > 1_000_000 || b.rows * b.cols > 1_000_000 {
        return None;
    }
    Some(b.cols - dense_rank(&b.to_dense()) - dense_rank(&a.to_dense()))
}

fn c8_cohomology() -> Outcome {
    let mut table = Vec::new();
    let mut dense_checks = 0;
    for (name, p) in fixtures::all::<Q>() {
        let q = betti_all(&p);
        let fp = betti_all(&fixtures::by_name::<Fp<2147483647>>(name).unwrap());
        for (n, row) in q.iter().enumerate() {
            ensure!(row[0] == row[1] && row[1] == row[2], "{name}: H^{n} dims gs/nr/graded = {row:?}");
            ensure!(fp[n] == *row, "{name}: H^{n} over F_p {:?} vs Q {row:?}", fp[n]);
            for (i, cx) in [Complex::Gs, Complex::Nr, Complex::Graded].into_iter().enumerate() {
                if let Some(d) = dense_betti(&p, cx, n) {
                    ensure!(d == row[i], "{name}: dense oracle gives {d} for H^{n} of {cx:?}, sparse {}", row[i]);
                    dense_checks += 1;
                }
            }
        }
        table.push(format!("{name} {:?}", q.iter().map(|r| r[0]).collect::<Vec<_>>()));
    }
    pass(format!("gs = nr = graded = F_(2^31-1) for n <= 3; {dense_checks} dense cross-checks; {}", table.join(", ")))
}

fn c9_deformations() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut cocycles, mut others, mut shifts, mut classes) = (0, 0, 0, 0);
    for (name, p) in fixtures::all::<Q>() {
        let m = diagonal_bimodule(&p);
        let gs = Gs::new(&p, &m);
        let (s1, s2) = (gs.space(1), gs.space(2));
        let (nr1, nr2) = (gs.nr_coords(&s1).unwrap(), gs.nr_coords(&s2).unwrap());
        let ker = gs.nr_d_matrix(3).unwrap().kernel_basis();
        for v in &ker {
            let x = lift_nr(s2.total, &nr2, v);
            let q = build_deformation(&p, &s2, &x).unwrap();
            ensure!(validate_deformation(&q).is_ok(), "{name}: kernel vector does not give a prestack");
        }
        // biconditional: 30 samples, half drawn from the kernel
        for t in 0..30u64 {
            let x = if t % 2 == 0 && !ker.is_empty() {
                let mut v = vec![Q::zero(); nr2.len()];
                for k in &ker {
                    let c = Q::from_i64(rng.gen_range(-3..=3));
                    gstack::linalg::axpy(&mut v, &c, k);
                }
                lift_nr(s2.total, &nr2, &v)
            } else {
                s2.random::<Q>(SEED + t, Some(&nr2))
            };
            let cocycle = cocycle_defects(&p, &x).is_empty();
            let valid = validate_deformation(&build_deformation(&p, &s2, &x).unwrap()).is_ok();
            ensure!(cocycle == valid, "{name}: sample {t} cocycle={cocycle} valid={valid}");
            if cocycle {
                cocycles += 1;
                let y = s1.random::<Q>(SEED + 7 * t, Some(&nr1));
                let dy = gs.d_apply(&s1, &s2, &y);
                let x2: Vec<Q> = x.iter().zip(&dy).map(|(a, b)| a.add(b)).collect();
                ensure!(equivalence_from_cochain(&p, &y, &x, &x2).unwrap(), "{name}: coboundary shift not an equivalence");
                ensure!(equivalence_exists(&p, &x, &x2).unwrap().is_some(), "{name}: solver finds no equivalence for a shift");
                shifts += 1;
            } else {
                others += 1;
            }
        }
        let h = classify_h2(&p).unwrap();
        // classes 0, r_i and sums of two distinct r_i are pairwise inequivalent
        let mut reps = vec![vec![Q::zero(); s2.total]];
        reps.extend(h.reps.iter().cloned());
        for i in 0..h.reps.len() {
            reps.push(h.reps[i].iter().map(|a| a.add(a)).collect());
        }
        for (i, a) in reps.iter().enumerate() {
            for b in &reps[i + 1..] {
                ensure!(equivalence_exists(&p, a, b).unwrap().is_none(), "{name}: distinct H^2 classes are equivalent");
                classes += 1;
            }
        }
    }
    ensure!(classes > 0, "no fixture with H^2 != 0");
    pass(format!("{cocycles} cocycles and {others} non-cocycles agree with the validator; {shifts} shifts verified; {classes} inequivalent class pairs"))
}

fn c10_presheaf() -> Outcome {
    let mut fired: Vec<&str> = Vec::new();
    let mut checked = 0;
    for (name, p) in fixtures::all::<Q>() {
        let mut q = p.clone();
        for comps in q.twists.values_mut() {
            for c in comps.iter_mut() {
                *c = q.fibers[0].identity(c.src);
            }
        }
        // e* e* is not (ee)* on the nose in rank2-fiber: no identity twist there
        let untwisted = q.validate().is_ok();
        let mut runs = vec![(&p, "twisted")];
        if untwisted {
            runs.insert(0, (&q, "untwisted"));
        }
        for (pp, label) in runs {
            let m = diagonal_bimodule(pp);
            let gs = Gs::new(pp, &m);
            for n in 1..=4 {
                let (s0, s1) = (gs.space(n - 1), gs.space(n));
                let nr = gs.nr_coords(&s0).unwrap();
                for t in 0..5 {
                    let x = s0.random::<Q>(SEED + 10 * n as u64 + t, Some(&nr));
                    let look = |k: &Key| s0.slice(&x, k);
                    for k in &s1.keys {
                        let higher = (2..=k.simplex.arrows.len()).any(|j| !zero(&gs.d_higher_at::<Vec<Q>>(&look, k, j)));
                        if label == "untwisted" {
                            ensure!(!higher, "{name}: d_j != 0 on an nr cochain at {k:?}");
                            let mut want = gs.d_hoch_at::<Vec<Q>>(&look, k);
                            let ds = gs.d_simp_at::<Vec<Q>>(&look, k);
                            let sg = if n % 2 == 1 { Q::from_i64(-1) } else { Q::one() };
                            gstack::linalg::axpy(&mut want, &sg, &ds);
                            ensure!(gs.d_total_at::<Vec<Q>>(&look, k) == want, "{name}: d != d_Hoch +- d_simp at {k:?}");
                            checked += 1;
                        } else if higher && !fired.contains(&name) {
                            fired.push(name);
                        }
                    }
                }
            }
        }
    }
    ensure!(!fired.is_empty(), "higher differentials never fire on any fixture");
    pass(format!("d_j = 0 and d = d_Hoch +- d_simp at {checked} positions; d_j != 0 on {}", fired.join(", ")))
}

fn c11_lemma() -> Outcome {
    let p = fixtures::scalar_twist_2chain::<Q>(Q::from_i64(3));
    let m = diagonal_bimodule(&p);
    let c = Compare::new(&p, &m);
    let mut terms = 0;
    for k in &c.gr.space(2).keys {
        let a = c.gr.key_string(k).entries;
        let (l, r) = c.homotopy_identity_sides(&k.simplex, &a).unwrap();
        let (el, er) = (c.expand_dchain(&l), c.expand_dchain(&r));
        ensure!(el == er, "expansions differ at {k:?}");
        terms += l.len() + r.len();
    }
    pass(format!("both sides agree after expansion on every degree-2 key ({terms} formal terms)"))
}

fn main() {
    // the libtest flags cargo passes are irrelevant here
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("paths", c1_paths),
        ("shuffles", c2_shuffles),
        ("d d = 0", || square_zero(false)),
        ("delta delta = 0", || square_zero(true)),
        ("chain maps", c5_chain_maps),
        ("GF = 1 on nr", c6_gf),
        ("homotopy", c7_homotopy),
        ("cohomology agreement", c8_cohomology),
        ("deformations", c9_deformations),
        ("presheaf degeneration", c10_presheaf),
        ("chain-level identity", c11_lemma),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut all_ok = true;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if only.is_some_and(|o| o != i + 1) {
            continue;
        }
        let t = Instant::now();
        let o = f();
        all_ok &= o.ok;
        println!("criterion {:>2} {:<22} {}  {} [{:.1}s]", i + 1, name, if o.ok { "PASS" } else { "FAIL" }, o.detail, t.elapsed().as_secs_f64());
    }
    if !all_ok {
        std::process::exit(1);
    }
}
