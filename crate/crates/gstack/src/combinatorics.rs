//! Shuffles, compositions and paths of twist isomorphisms.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::basecat::BaseCategory;
use crate::lincat::Mor;
use crate::linalg::Scalar;
use crate::prestack::{Prestack, Whisker};
use crate::{cap, Error, Result};

pub fn sign_of(odd: bool) -> i64 {
    if odd {
        -1
    } else {
        1
    }
}

// ---------------------------------------------------------------------------
// Shuffles
// ---------------------------------------------------------------------------

/// A block shuffle. `pattern[t]` is the block feeding output slot `t`;
/// items of one block keep their order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Shuffle {
    pub sizes: Vec<usize>,
    pub pattern: Vec<usize>,
    pub sign: i64,
}

impl Shuffle {
    /// Input position (blocks concatenated in order) -> output position.
    pub fn perm(&self) -> Vec<usize> {
        let mut offs: Vec<usize> = self.sizes.iter().scan(0, |s, &n| { let o = *s; *s += n; Some(o) }).collect();
        let mut perm = vec![0; self.pattern.len()];
        for (t, &b) in self.pattern.iter().enumerate() {
            perm[offs[b]] = t;
            offs[b] += 1;
        }
        perm
    }

    /// Output slots of the first item of each nonempty block.
    pub fn heads(&self) -> Vec<usize> {
        (0..self.sizes.len())
            .filter_map(|b| self.pattern.iter().position(|&x| x == b))
            .collect()
    }

    pub fn is_conditioned(&self) -> bool {
        self.heads().windows(2).all(|w| w[0] < w[1])
    }
}

fn pattern_sign(pattern: &[usize]) -> i64 {
    let mut inv = 0usize;
    for i in 0..pattern.len() {
        for j in i + 1..pattern.len() {
            if pattern[i] > pattern[j] {
                inv += 1;
            }
        }
    }
    sign_of(inv % 2 == 1)
}

/// All shuffles of blocks with the given sizes, in lexicographic order of
/// their patterns.
pub fn shuffles(sizes: &[usize]) -> Vec<Shuffle> {
    fn rec(left: &mut Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left.iter().all(|&x| x == 0) {
            out.push(cur.clone());
            return;
        }
        for b in 0..left.len() {
            if left[b] > 0 {
                left[b] -= 1;
                cur.push(b);
                rec(left, cur, out);
                cur.pop();
                left[b] += 1;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut sizes.to_vec(), &mut Vec::new(), &mut out);
    out.into_iter()
        .map(|p| Shuffle { sizes: sizes.to_vec(), sign: pattern_sign(&p), pattern: p })
        .collect()
}

/// Shuffles whose block heads appear in block order.
pub fn conditioned_shuffles(sizes: &[usize]) -> Vec<Shuffle> {
    shuffles(sizes).into_iter().filter(|s| s.is_conditioned()).collect()
}

fn check_blocks(n: usize) -> Result<()> {
    let c = cap("GSTACK_PATH_CAP", 8);
    if n > c {
        return Err(Error::TooLarge(format!("{n} blocks exceeds the cap of {c} (set GSTACK_PATH_CAP)")));
    }
    Ok(())
}

pub fn enumerate_shuffles(sizes: &[usize]) -> Result<Vec<Shuffle>> {
    check_blocks(sizes.len())?;
    Ok(shuffles(sizes))
}

pub fn enumerate_conditioned(sizes: &[usize]) -> Result<Vec<Shuffle>> {
    check_blocks(sizes.len())?;
    Ok(conditioned_shuffles(sizes))
}

/// Interleave sequences according to `s`.
pub fn formal_shuffle<T: Clone>(s: &Shuffle, seqs: &[Vec<T>]) -> Result<Vec<T>> {
    if seqs.len() != s.sizes.len() || seqs.iter().zip(&s.sizes).any(|(q, &n)| q.len() != n) {
        return Err(Error::Shape("sequence lengths do not match the shuffle blocks".into()));
    }
    let mut next = vec![0; seqs.len()];
    Ok(s.pattern
        .iter()
        .map(|&b| {
            next[b] += 1;
            seqs[b][next[b] - 1].clone()
        })
        .collect())
}

/// Cut a conditioned shuffle at its block heads. Segment `l` runs from the
/// head of block `l` up to the head of block `l+1`; entries are
/// `(block, index in block)`.
pub fn conditioned_split(s: &Shuffle) -> Result<Vec<Vec<(usize, usize)>>> {
    if !s.is_conditioned() {
        return Err(Error::Shape("shuffle is not conditioned".into()));
    }
    let heads = s.heads();
    let mut next = vec![0; s.sizes.len()];
    let mut segs: Vec<Vec<(usize, usize)>> = vec![Vec::new(); heads.len()];
    let mut level = 0;
    for (t, &b) in s.pattern.iter().enumerate() {
        while level + 1 < heads.len() && heads[level + 1] <= t {
            level += 1;
        }
        segs[level].push((b, next[b]));
        next[b] += 1;
    }
    Ok(segs)
}

// ---------------------------------------------------------------------------
// Compositions
// ---------------------------------------------------------------------------

/// `(m_k, ..., m_1)` with all parts positive; `parts[0]` is `m_k`, the
/// block at the start of the simplex.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Composition {
    pub parts: Vec<usize>,
    pub sign: i64,
}

/// All compositions of `n`; `Part(0) = {()}`.
pub fn compositions(n: usize) -> Vec<Composition> {
    fn rec(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for first in (1..=n).rev() {
            for mut rest in rec(n - first) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
        out
    }
    let mut v: Vec<Composition> = rec(n)
        .into_iter()
        .map(|p| Composition { sign: sign_of((n - p.len()) % 2 == 1), parts: p })
        .collect();
    v.sort_by_key(|c| c.parts.len());
    v
}

// ---------------------------------------------------------------------------
// Paths
// ---------------------------------------------------------------------------

/// A path from `u_1* ... u_n*` to `(u_n ... u_1)*`.
///
/// `recipe[j-1] = i_j` means entry `r_j = eps^{gamma_j, i_j}` where
/// `gamma_{n-1} = sigma` and `gamma_j = d_{i_{j+1}} gamma_{j+1}`. Entry 1
/// is at the target end.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Path {
    pub simplex: Vec<usize>,
    pub recipe: Vec<usize>,
    pub gammas: Vec<Vec<usize>>,
    pub sign: i64,
}

fn merge(base: &BaseCategory, g: &[usize], i: usize) -> Vec<usize> {
    let mut a = g.to_vec();
    let m = base.compose(a[i], a[i - 1]);
    a.splice(i - 1..=i, [m]);
    a
}

impl Path {
    pub fn from_recipe(base: &BaseCategory, simplex: &[usize], recipe: Vec<usize>) -> Path {
        let n = simplex.len();
        assert_eq!(recipe.len(), n.saturating_sub(1), "recipe length");
        let mut gammas = vec![Vec::new(); recipe.len()];
        let mut g = simplex.to_vec();
        for j in (0..recipe.len()).rev() {
            assert!(recipe[j] >= 1 && recipe[j] <= j + 1, "merge index out of range");
            gammas[j] = g.clone();
            g = merge(base, &g, recipe[j]);
        }
        let sign = recipe.iter().map(|&i| sign_of(i % 2 == 1)).product();
        Path { simplex: simplex.to_vec(), recipe, gammas, sign }
    }

    pub fn len(&self) -> usize {
        self.recipe.len()
    }

    pub fn is_empty(&self) -> bool {
        self.recipe.is_empty()
    }

    /// Entry `r_j`, `j` 1-based.
    pub fn entry(&self, j: usize) -> Whisker {
        Whisker::epsilon(&self.gammas[j - 1], self.recipe[j - 1])
    }

    pub fn entries(&self) -> Vec<Whisker> {
        (1..=self.len()).map(|j| self.entry(j)).collect()
    }
}

/// All `(n-1)!` paths of a simplex given by its arrows (n >= 1; a single
/// arrow has the empty path).
pub fn paths(base: &BaseCategory, simplex: &[usize]) -> Vec<Path> {
    fn rec(base: &BaseCategory, g: &[usize]) -> Vec<Vec<usize>> {
        if g.len() <= 1 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for i in 1..g.len() {
            for mut r in rec(base, &merge(base, g, i)) {
                r.push(i);
                out.push(r);
            }
        }
        out
    }
    rec(base, simplex).into_iter().map(|r| Path::from_recipe(base, simplex, r)).collect()
}

pub fn enumerate_paths(base: &BaseCategory, simplex: &[usize]) -> Result<Vec<Path>> {
    if simplex.len() < 2 {
        return Err(Error::Shape("paths need a simplex of length at least 2".into()));
    }
    check_blocks(simplex.len())?;
    Ok(paths(base, simplex))
}

/// Swap the merges at positions `k` and `k+1` (1 <= k <= n-2).
pub fn flip(base: &BaseCategory, r: &Path, k: usize) -> Result<Path> {
    let n = r.simplex.len();
    if k < 1 || k + 2 > n {
        return Err(Error::Shape(format!("flip position {k} out of range for a path of length {}", n - 1)));
    }
    let (i, j) = (r.recipe[k], r.recipe[k - 1]);
    let (i2, j2) = if i > j { (j, i - 1) } else { (j + 1, i) };
    let mut recipe = r.recipe.clone();
    recipe[k] = i2;
    recipe[k - 1] = j2;
    Ok(Path::from_recipe(base, &r.simplex, recipe))
}

/// `(c^{sigma,k}, beta(r, s))` for `r` a path of `R_k sigma`, `s` a path of
/// `L_k sigma` and `beta` a shuffle with blocks `(r, s)`.
pub fn join_paths(base: &BaseCategory, sigma: &[usize], k: usize, r: &Path, s: &Path, beta: &Shuffle) -> Result<Path> {
    let n = sigma.len();
    if k < 1 || k >= n || r.simplex != sigma[k..] || s.simplex != sigma[..k] || beta.sizes != [r.len(), s.len()] {
        return Err(Error::Shape("join_paths: shapes do not match".into()));
    }
    // performed order runs from the source end, i.e. the reversed pattern
    let mut recipe = vec![0; n - 1];
    recipe[0] = 1;
    let (mut nr, mut ns) = (r.len(), s.len());
    let mut left = k;
    for t in (0..beta.pattern.len()).rev() {
        let j = t + 2;
        if beta.pattern[t] == 0 {
            recipe[j - 1] = left + r.recipe[nr - 1];
            nr -= 1;
        } else {
            recipe[j - 1] = s.recipe[ns - 1];
            ns -= 1;
            left -= 1;
        }
    }
    Ok(Path::from_recipe(base, sigma, recipe))
}

/// Inverse of [`join_paths`]: returns `(k, r, s, beta)`.
pub fn split_path(base: &BaseCategory, w: &Path) -> Result<(usize, Path, Path, Shuffle)> {
    let n = w.simplex.len();
    if n < 2 {
        return Err(Error::Shape("split_path needs a path of length at least 1".into()));
    }
    // pieces as intervals [lo, hi) of sigma, merged from the source end
    let mut pieces: Vec<(usize, usize)> = (0..n).map(|i| (i, i + 1)).collect();
    let mut merges: Vec<(usize, usize)> = Vec::new(); // (position of left piece, new hi)
    for j in (2..n).rev() {
        let i = w.recipe[j - 1];
        let (lo, _) = pieces[i - 1];
        let (_, hi) = pieces[i];
        pieces.splice(i - 1..=i, [(lo, hi)]);
        merges.push((lo, hi));
    }
    if pieces.len() != 2 {
        return Err(Error::Shape("malformed path".into()));
    }
    let k = pieces[0].1;
    // merges in performed order; classify and rebuild local recipes
    let mut pat_rev = Vec::new();
    let mut left_pieces: Vec<(usize, usize)> = (0..k).map(|i| (i, i + 1)).collect();
    let mut right_pieces: Vec<(usize, usize)> = (k..n).map(|i| (i, i + 1)).collect();
    let (mut rrec, mut srec) = (Vec::new(), Vec::new());
    for (lo, hi) in merges {
        let (pcs, rec, tag) = if hi <= k { (&mut left_pieces, &mut srec, 1) } else { (&mut right_pieces, &mut rrec, 0) };
        let i = pcs.iter().position(|p| p.0 == lo).ok_or_else(|| Error::Shape("malformed path".into()))? + 1;
        let (_, h2) = pcs[i];
        pcs.splice(i - 1..=i, [(lo, h2)]);
        rec.push(i);
        pat_rev.push(tag);
    }
    rrec.reverse();
    srec.reverse();
    pat_rev.reverse();
    let r = Path::from_recipe(base, &w.simplex[k..], rrec);
    let s = Path::from_recipe(base, &w.simplex[..k], srec);
    let sizes = vec![r.len(), s.len()];
    let beta = Shuffle { sign: pattern_sign(&pat_rev), pattern: pat_rev, sizes };
    Ok((k, r, s, beta))
}

/// Concurrent memo of path sets keyed by simplex.
#[derive(Default)]
pub struct PathCache {
    map: Mutex<HashMap<Vec<usize>, Arc<Vec<Path>>>>,
    shuf: Mutex<HashMap<Vec<usize>, Arc<Vec<Shuffle>>>>,
    cond: Mutex<HashMap<Vec<usize>, Arc<Vec<Shuffle>>>>,
}

impl PathCache {
    pub fn paths(&self, base: &BaseCategory, simplex: &[usize]) -> Arc<Vec<Path>> {
        if let Some(v) = self.map.lock().unwrap().get(simplex) {
            return v.clone();
        }
        let v = Arc::new(paths(base, simplex));
        self.map.lock().unwrap().entry(simplex.to_vec()).or_insert(v).clone()
    }

    pub fn shuffles(&self, sizes: &[usize]) -> Arc<Vec<Shuffle>> {
        if let Some(v) = self.shuf.lock().unwrap().get(sizes) {
            return v.clone();
        }
        let v = Arc::new(shuffles(sizes));
        self.shuf.lock().unwrap().entry(sizes.to_vec()).or_insert(v).clone()
    }

    pub fn conditioned(&self, sizes: &[usize]) -> Arc<Vec<Shuffle>> {
        if let Some(v) = self.cond.lock().unwrap().get(sizes) {
            return v.clone();
        }
        let v = Arc::new(conditioned_shuffles(sizes));
        self.cond.lock().unwrap().entry(sizes.to_vec()).or_insert(v).clone()
    }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// `||r||` at `c`: `r_1(c) . r_2(c) . ... . r_{n-1}(c)`.
pub fn eval_path<S: Scalar>(p: &Prestack<S>, r: &Path, c: usize) -> Mor<S> {
    let fib = &p.fibers[p.base.src(r.simplex[0])];
    let mut acc: Option<Mor<S>> = None;
    for w in r.entries().iter().rev() {
        let m = p.whisker(w, c);
        acc = Some(match acc {
            None => m,
            Some(a) => fib.compose(&m, &a),
        });
    }
    acc.unwrap_or_else(|| fib.identity(p.word_obj(&r.simplex, c)))
}

/// Interleave fibre morphisms `a` (block 0, entry 1 at the target end,
/// ending at object `top`) with the entries of a path over `tau` (block 1)
/// by evaluation: each `a`-step is pushed through the current functor, each
/// path step is evaluated at the current object.
pub fn eval_shuffle<S: Scalar>(p: &Prestack<S>, pattern: &[usize], a: &[Mor<S>], top: usize, r: &Path) -> Vec<Mor<S>> {
    let mut word = vec![p.base.composite(&r.simplex).expect("nonempty simplex")];
    let mut cur = top;
    let (mut ia, mut ir) = (0, 0);
    let mut out = Vec::with_capacity(pattern.len());
    for &b in pattern {
        if b == 0 {
            out.push(p.word_mor(&word, &a[ia]));
            cur = a[ia].src;
            ia += 1;
        } else {
            let w = r.entry(ir + 1);
            out.push(p.whisker(&w, cur));
            word = w.source_word();
            ir += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::Q;
    use proptest::prelude::*;

    /// Brute force: filter all permutations of the input positions.
    fn brute_shuffle_count(sizes: &[usize], conditioned: bool) -> usize {
        fn perms(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in perms(n - 1) {
                for i in 0..n {
                    let mut q = p.clone();
                    q.insert(i, n - 1);
                    out.push(q);
                }
            }
            out
        }
        let n: usize = sizes.iter().sum();
        let mut starts = vec![0];
        for s in sizes {
            starts.push(starts.last().unwrap() + s);
        }
        perms(n)
            .into_iter()
            .filter(|p| (0..sizes.len()).all(|b| (starts[b]..starts[b + 1]).collect::<Vec<_>>().windows(2).all(|w| p[w[0]] < p[w[1]])))
            .filter(|p| {
                !conditioned || {
                    let heads: Vec<usize> = (0..sizes.len()).filter(|&b| sizes[b] > 0).map(|b| p[starts[b]]).collect();
                    heads.windows(2).all(|w| w[0] < w[1])
                }
            })
            .count()
    }

    fn binom(n: usize, k: usize) -> usize {
        (1..=k).fold(1, |acc, i| acc * (n + 1 - i) / i)
    }

    #[test]
    fn shuffle_counts_match_brute_force() {
        for m in 0..=4 {
            for n in 0..=4 {
                assert_eq!(shuffles(&[m, n]).len(), binom(m + n, m));
                assert_eq!(shuffles(&[m, n]).len(), brute_shuffle_count(&[m, n], false));
            }
        }
        assert_eq!(shuffles(&[3, 2]).len(), 10);
        assert_eq!(shuffles(&[0, 0]).len(), 1);
        assert_eq!(conditioned_shuffles(&[2, 2]).len(), 3);
        assert_eq!(conditioned_shuffles(&[2, 1, 1]).len(), brute_shuffle_count(&[2, 1, 1], true));
        assert_eq!(conditioned_shuffles(&[4]).len(), 1);
    }

    #[test]
    fn shuffle_sign_is_permutation_parity() {
        for s in shuffles(&[2, 3]) {
            let p = s.perm();
            let inv = (0..p.len()).flat_map(|i| (i + 1..p.len()).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
            assert_eq!(s.sign, sign_of(inv % 2 == 1));
        }
    }

    #[test]
    fn example_shuffles_of_one_into_two() {
        let s = shuffles(&[1, 2]);
        let seqs = vec![vec!["a"], vec!["e1", "e2"]];
        let outs: Vec<Vec<&str>> = s.iter().map(|b| formal_shuffle(b, &seqs).unwrap()).collect();
        assert_eq!(outs, vec![vec!["a", "e1", "e2"], vec!["e1", "a", "e2"], vec!["e1", "e2", "a"]]);
        assert!(formal_shuffle(&s[0], &[vec!["a"]]).is_err());
    }

    #[test]
    fn conditioned_split_reassembles() {
        for s in conditioned_shuffles(&[2, 2, 1]) {
            let segs = conditioned_split(&s).unwrap();
            let flat: Vec<usize> = segs.iter().flatten().map(|e| e.0).collect();
            assert_eq!(flat, s.pattern);
            for (l, seg) in segs.iter().enumerate() {
                assert_eq!(seg[0], (l, 0));
            }
        }
        let bad = Shuffle { sizes: vec![1, 1], pattern: vec![1, 0], sign: -1 };
        assert!(conditioned_split(&bad).is_err());
    }

    #[test]
    fn compositions_listed() {
        let c = compositions(3);
        let parts: Vec<Vec<usize>> = c.iter().map(|x| x.parts.clone()).collect();
        assert_eq!(parts, vec![vec![3], vec![2, 1], vec![1, 2], vec![1, 1, 1]]);
        assert_eq!(c.iter().map(|x| x.sign).collect::<Vec<_>>(), vec![1, -1, -1, 1]);
        assert_eq!(compositions(6).len(), 32);
        assert_eq!(compositions(0), vec![Composition { parts: vec![], sign: 1 }]);
    }

    fn chain_simplex(b: &BaseCategory, n: usize) -> Vec<usize> {
        (0..n).map(|i| b.chain_arrow(i, i + 1)).collect()
    }

    #[test]
    fn path_counts_and_signs() {
        let b = BaseCategory::chain(7);
        let mut fact = 1;
        for n in 2..=6 {
            fact *= n - 1;
            let ps = paths(&b, &chain_simplex(&b, n));
            assert_eq!(ps.len(), fact);
        }
        let p2 = paths(&b, &chain_simplex(&b, 2));
        assert_eq!(p2[0].sign, -1);
        let p3 = paths(&b, &chain_simplex(&b, 3));
        let mut signs: Vec<i64> = p3.iter().map(|p| p.sign).collect();
        signs.sort();
        assert_eq!(signs, vec![-1, 1]);
        assert!(enumerate_paths(&b, &chain_simplex(&b, 1)).is_err());
    }

    #[test]
    fn flip_is_sign_reversing_involution() {
        let b = BaseCategory::chain(6);
        for n in 3..=5 {
            for r in paths(&b, &chain_simplex(&b, n)) {
                for k in 1..=n - 2 {
                    let f = flip(&b, &r, k).unwrap();
                    assert_eq!(f.sign, -r.sign);
                    assert_eq!(flip(&b, &f, k).unwrap(), r);
                    assert_eq!(f.gammas[..k - 1], r.gammas[..k - 1]);
                }
                assert!(flip(&b, &r, n - 1).is_err());
            }
        }
    }

    #[test]
    fn flip_preserves_adjacent_product() {
        let p = fixtures::scalar_twist_3chain::<Q>();
        let b = &p.base;
        let s = chain_simplex(b, 3);
        for r in paths(b, &s) {
            let f = flip(b, &r, 1).unwrap();
            let fib = &p.fibers[0];
            let prod = |x: &Path| fib.compose(&p.whisker(&x.entry(1), 0), &p.whisker(&x.entry(2), 0));
            assert_eq!(prod(&r), prod(&f));
        }
    }

    #[test]
    fn join_split_roundtrip_and_sign() {
        let b = BaseCategory::chain(6);
        let sigma = chain_simplex(&b, 5);
        for k in 1..5 {
            for r in paths(&b, &sigma[k..]) {
                for s in paths(&b, &sigma[..k]) {
                    for beta in shuffles(&[r.len(), s.len()]) {
                        let w = join_paths(&b, &sigma, k, &r, &s, &beta).unwrap();
                        assert_eq!(w.gammas[0], vec![b.composite(&sigma[..k]).unwrap(), b.composite(&sigma[k..]).unwrap()]);
                        let (k2, r2, s2, b2) = split_path(&b, &w).unwrap();
                        assert_eq!((k2, &r2, &s2, &b2), (k, &r, &s, &beta));
                        assert_eq!(w.sign, sign_of((5 - k) % 2 == 1) * beta.sign * r.sign * s.sign);
                    }
                }
            }
        }
    }

    #[test]
    fn norms_agree_on_twisted_fixtures() {
        let p = fixtures::scalar_twist_3chain::<Q>();
        let s = chain_simplex(&p.base, 3);
        let norms: Vec<_> = paths(&p.base, &s).iter().map(|r| eval_path(&p, r, 0)).collect();
        assert!(norms.windows(2).all(|w| w[0] == w[1]));
        let r2 = fixtures::rank2_fiber::<Q>();
        for n in 2..=5 {
            for c in 0..2 {
                let norms: Vec<_> = paths(&r2.base, &vec![1; n]).iter().map(|r| eval_path(&r2, r, c)).collect();
                assert!(norms.windows(2).all(|w| w[0] == w[1]));
            }
        }
    }

    #[test]
    fn eval_shuffle_composites_agree() {
        // the three interleavings of one morphism with a 2-step path
        let p = fixtures::rank2_fiber::<Q>();
        let fib = &p.fibers[0];
        let r = &paths(&p.base, &[1, 1, 1])[0];
        let a = vec![Mor { src: 0, tgt: 1, v: vec![Q::from_i64(1), Q::from_i64(3)] }];
        let comps: Vec<Mor<Q>> = shuffles(&[1, 2])
            .iter()
            .map(|b| {
                let s = eval_shuffle(&p, &b.pattern, &a, 1, r);
                s.into_iter().reduce(|acc, m| fib.compose(&acc, &m)).unwrap()
            })
            .collect();
        assert!(comps.windows(2).all(|w| w[0] == w[1]));
    }

    proptest! {
        #[test]
        fn shuffle_perm_monotone_on_blocks(m in 0usize..4, n in 0usize..4, k in 0usize..3) {
            for s in shuffles(&[m, n, k]) {
                let p = s.perm();
                prop_assert!(p[..m].windows(2).all(|w| w[0] < w[1]));
                prop_assert!(p[m..m + n].windows(2).all(|w| w[0] < w[1]));
                prop_assert!(p[m + n..].windows(2).all(|w| w[0] < w[1]));
            }
        }
    }
}
