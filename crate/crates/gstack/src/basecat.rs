//! Finite base categories and their nerves.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A finite category with a total composition table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseCategory {
    pub objects: usize,
    /// `(src, tgt)` per arrow id.
    pub arrows: Vec<(usize, usize)>,
    pub identities: Vec<usize>,
    /// `compose[g][f] = g . f` when `tgt f == src g`.
    #[serde(skip)]
    table: Vec<Vec<Option<usize>>>,
}

/// A p-simplex `U_0 -u_1-> U_1 -> ... -u_p-> U_p` of the nerve.
/// `arrows[i]` is `u_{i+1}`; a 0-simplex only records its object.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex {
    pub start: usize,
    pub arrows: Vec<usize>,
}

impl BaseCategory {
    /// `compose` lists triples `(g, f, g . f)`.
    pub fn new(objects: usize, arrows: Vec<(usize, usize)>, identities: Vec<usize>, compose: &[(usize, usize, usize)]) -> Result<Self> {
        let n = arrows.len();
        let mut table = vec![vec![None; n]; n];
        for &(g, f, h) in compose {
            if g >= n || f >= n || h >= n {
                return Err(Error::Invalid(format!("composition ({g},{f},{h}) names an unknown arrow")));
            }
            table[g][f] = Some(h);
        }
        let c = BaseCategory { objects, arrows, identities, table };
        c.validate()?;
        Ok(c)
    }

    pub fn n_arrows(&self) -> usize {
        self.arrows.len()
    }

    pub fn src(&self, a: usize) -> usize {
        self.arrows[a].0
    }

    pub fn tgt(&self, a: usize) -> usize {
        self.arrows[a].1
    }

    pub fn is_identity(&self, a: usize) -> bool {
        self.identities[self.src(a)] == a
    }

    /// `g . f`.
    pub fn compose(&self, g: usize, f: usize) -> usize {
        self.table[g][f].unwrap_or_else(|| panic!("arrows {g} . {f} are not composable"))
    }

    /// Composite of a path given first-arrow-first; `None` for the empty
    /// path.
    pub fn composite(&self, path: &[usize]) -> Option<usize> {
        let mut it = path.iter();
        let first = *it.next()?;
        Some(it.fold(first, |acc, &a| self.compose(a, acc)))
    }

    /// Triples `(g, f, g.f)` in id order.
    pub fn compose_triples(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (g, row) in self.table.iter().enumerate() {
            for (f, h) in row.iter().enumerate() {
                if let Some(h) = h {
                    out.push((g, f, *h));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.arrows.len();
        let bad = |m: String| Err(Error::Invalid(m));
        if self.identities.len() != self.objects {
            return bad("one identity per object required".into());
        }
        for &(s, t) in &self.arrows {
            if s >= self.objects || t >= self.objects {
                return bad("arrow endpoint out of range".into());
            }
        }
        for (o, &i) in self.identities.iter().enumerate() {
            if i >= n || self.arrows[i] != (o, o) {
                return bad(format!("identity of object {o} is not an endomorphism of {o}"));
            }
        }
        for g in 0..n {
            for f in 0..n {
                let composable = self.tgt(f) == self.src(g);
                match (composable, self.table[g][f]) {
                    (true, None) => return bad(format!("missing composition {g} . {f}")),
                    (false, Some(_)) => return bad(format!("composition {g} . {f} of non-composable arrows")),
                    (true, Some(h)) if self.arrows[h] != (self.src(f), self.tgt(g)) => {
                        return bad(format!("{g} . {f} = {h} has wrong endpoints"))
                    }
                    _ => {}
                }
            }
        }
        for a in 0..n {
            if self.compose(a, self.identities[self.src(a)]) != a || self.compose(self.identities[self.tgt(a)], a) != a {
                return bad(format!("identity law fails at arrow {a}"));
            }
        }
        for h in 0..n {
            for g in 0..n {
                if self.tgt(g) != self.src(h) {
                    continue;
                }
                for f in 0..n {
                    if self.tgt(f) == self.src(g)
                        && self.compose(self.compose(h, g), f) != self.compose(h, self.compose(g, f))
                    {
                        return bad(format!("associativity fails at ({h},{g},{f})"));
                    }
                }
            }
        }
        Ok(())
    }

    /// All p-simplices, degenerate ones included, lexicographic in arrow ids
    /// (objects for p = 0).
    pub fn nerve(&self, p: usize) -> Vec<Simplex> {
        if p == 0 {
            return (0..self.objects).map(|o| Simplex { start: o, arrows: vec![] }).collect();
        }
        let mut out: Vec<Vec<usize>> = (0..self.n_arrows()).map(|a| vec![a]).collect();
        for _ in 1..p {
            let mut next = Vec::new();
            for s in &out {
                let end = self.tgt(*s.last().unwrap());
                for a in 0..self.n_arrows() {
                    if self.src(a) == end {
                        let mut t = s.clone();
                        t.push(a);
                        next.push(t);
                    }
                }
            }
            out = next;
        }
        out.into_iter().map(|a| Simplex { start: self.src(a[0]), arrows: a }).collect()
    }

    pub fn simplex(&self, arrows: Vec<usize>) -> Simplex {
        Simplex { start: self.src(arrows[0]), arrows }
    }

    pub fn point(&self, o: usize) -> Simplex {
        Simplex { start: o, arrows: vec![] }
    }

    pub fn end(&self, s: &Simplex) -> usize {
        s.arrows.last().map_or(s.start, |&a| self.tgt(a))
    }

    /// `U_i`.
    pub fn vertex(&self, s: &Simplex, i: usize) -> usize {
        if i == 0 {
            s.start
        } else {
            self.tgt(s.arrows[i - 1])
        }
    }

    /// Composite arrow `u_p ... u_1`, the identity of `U_0` when p = 0.
    pub fn total(&self, s: &Simplex) -> usize {
        self.composite(&s.arrows).unwrap_or(self.identities[s.start])
    }

    /// i-th face: drop `u_1` (i = 0), drop `u_p` (i = p), else merge
    /// `u_{i+1} u_i`.
    pub fn face(&self, s: &Simplex, i: usize) -> Simplex {
        let p = s.arrows.len();
        assert!(p >= 1 && i <= p);
        if p == 1 {
            return self.point(if i == 0 { self.tgt(s.arrows[0]) } else { s.start });
        }
        let mut a = s.arrows.clone();
        if i == 0 {
            a.remove(0);
        } else if i == p {
            a.pop();
        } else {
            let m = self.compose(a[i], a[i - 1]);
            a.splice(i - 1..=i, [m]);
        }
        self.simplex(a)
    }

    /// `(u_1..u_k)`.
    pub fn left(&self, s: &Simplex, k: usize) -> Simplex {
        Simplex { start: s.start, arrows: s.arrows[..k].to_vec() }
    }

    /// `(u_{k+1}..u_p)`.
    pub fn right(&self, s: &Simplex, k: usize) -> Simplex {
        Simplex { start: self.vertex(s, k), arrows: s.arrows[k..].to_vec() }
    }

    /// Some `u_i` with `p-k+1 <= i <= p` is an identity.
    pub fn is_right_degenerate(&self, s: &Simplex, k: usize) -> bool {
        let p = s.arrows.len();
        s.arrows[p - k.min(p)..].iter().any(|&a| self.is_identity(a))
    }

    pub fn is_degenerate(&self, s: &Simplex) -> bool {
        self.is_right_degenerate(s, s.arrows.len())
    }

    /// Linear order `0 < 1 < ... < n-1` as a category.
    pub fn chain(n: usize) -> Self {
        let mut arrows = Vec::new();
        let mut id = vec![0; n];
        for i in 0..n {
            for j in i..n {
                if i == j {
                    id[i] = arrows.len();
                }
                arrows.push((i, j));
            }
        }
        let idx = |a: (usize, usize)| arrows.iter().position(|&b| b == a).unwrap();
        let mut comp = Vec::new();
        for (f, &(i, j)) in arrows.iter().enumerate() {
            for (g, &(j2, k)) in arrows.iter().enumerate() {
                if j == j2 {
                    comp.push((g, f, idx((i, k))));
                }
            }
        }
        BaseCategory::new(n, arrows.clone(), id, &comp).expect("chain category")
    }

    /// One object, arrows `1` (id 0) and `e` (id 1) with `e e = e`.
    pub fn idempotent() -> Self {
        BaseCategory::new(1, vec![(0, 0), (0, 0)], vec![0], &[(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 1)]).expect("idempotent monoid")
    }

    /// Arrow id of `i -> j` in [`BaseCategory::chain`].
    pub fn chain_arrow(&self, i: usize, j: usize) -> usize {
        self.arrows.iter().position(|&a| a == (i, j)).expect("no such arrow")
    }
}
