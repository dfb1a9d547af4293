//! Exact scalars, sparse matrices and elimination.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::Value;

use crate::Error;

/// Commutative ring element with exact arithmetic.
///
/// `inv` returns `None` for non-units. Every algorithm in this crate that
/// divides only ever divides by units, so the same code runs over fields
/// and over dual numbers.
pub trait Scalar: Clone + PartialEq + Eq + fmt::Debug + fmt::Display + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Option<Self>;
    fn from_i64(v: i64) -> Self;
    fn from_json(v: &Value) -> Result<Self, Error>;
    fn to_json(&self) -> Value;
    /// Compact text form used by the triplet and cochain formats.
    fn to_text(&self) -> String {
        self.to_string()
    }
    fn from_text(s: &str) -> Result<Self, Error> {
        Self::from_json(&Value::String(s.to_string()))
    }
    fn is_one(&self) -> bool {
        *self == Self::one()
    }
    /// Tag written into prestack files.
    fn ring_tag() -> Value;
}

/// Marker for scalars where every nonzero element is a unit.
pub trait Field: Scalar {}

// ---------------------------------------------------------------------------
// Q
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Q(pub BigRational);

impl Q {
    pub fn new(n: i64, d: i64) -> Q {
        Q(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }
}

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Q {
    type Err = Error;
    fn from_str(s: &str) -> Result<Q, Error> {
        let s = s.trim();
        let bad = || Error::Parse(format!("bad rational '{s}'"));
        match s.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(bad());
                }
                Ok(Q(BigRational::new(n, d)))
            }
            None => Ok(Q(BigRational::from_integer(s.parse().map_err(|_| bad())?))),
        }
    }
}

impl Scalar for Q {
    fn zero() -> Self {
        Q(BigRational::zero())
    }
    fn one() -> Self {
        Q(BigRational::one())
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        Q(&self.0 + &o.0)
    }
    fn sub(&self, o: &Self) -> Self {
        Q(&self.0 - &o.0)
    }
    fn mul(&self, o: &Self) -> Self {
        Q(&self.0 * &o.0)
    }
    fn neg(&self) -> Self {
        Q(-&self.0)
    }
    fn inv(&self) -> Option<Self> {
        if self.0.is_zero() {
            None
        } else {
            Some(Q(self.0.recip()))
        }
    }
    fn from_i64(v: i64) -> Self {
        Q(BigRational::from_integer(BigInt::from(v)))
    }
    fn from_json(v: &Value) -> Result<Self, Error> {
        match v {
            Value::String(s) => s.parse(),
            Value::Number(n) => match n.as_i64() {
                Some(i) => Ok(Q::from_i64(i)),
                None => Err(Error::Parse(format!("non-integer number {n}, use a \"p/q\" string"))),
            },
            _ => Err(Error::Parse(format!("expected rational, got {v}"))),
        }
    }
    fn to_json(&self) -> Value {
        match (self.0.is_integer(), self.0.numer().to_i64()) {
            (true, Some(i)) => Value::from(i),
            _ => Value::String(self.to_string()),
        }
    }
    fn ring_tag() -> Value {
        Value::from("Q")
    }
}

impl Field for Q {}

// ---------------------------------------------------------------------------
// F_p
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct Fp<const P: u64>(pub u64);

/// Primes the CLI can dispatch to.
pub const SUPPORTED_PRIMES: [u64; 10] = [2, 3, 5, 7, 11, 13, 101, 65521, 1000003, 2147483647];

impl<const P: u64> Fp<P> {
    pub fn new(v: i64) -> Self {
        Fp(v.rem_euclid(P as i64) as u64)
    }
    fn pow(self, mut e: u64) -> Self {
        let (mut b, mut acc) = (self.0, 1u64);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % P;
            }
            b = b * b % P;
            e >>= 1;
        }
        Fp(acc)
    }
}

impl<const P: u64> fmt::Display for Fp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<const P: u64> Scalar for Fp<P> {
    fn zero() -> Self {
        Fp(0)
    }
    fn one() -> Self {
        Fp(1 % P)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
    fn add(&self, o: &Self) -> Self {
        Fp((self.0 + o.0) % P)
    }
    fn sub(&self, o: &Self) -> Self {
        Fp((self.0 + P - o.0) % P)
    }
    fn mul(&self, o: &Self) -> Self {
        Fp(self.0 * o.0 % P)
    }
    fn neg(&self) -> Self {
        Fp((P - self.0) % P)
    }
    fn inv(&self) -> Option<Self> {
        if self.0 == 0 {
            None
        } else {
            Some(self.pow(P - 2))
        }
    }
    fn from_i64(v: i64) -> Self {
        Fp::new(v)
    }
    fn from_json(v: &Value) -> Result<Self, Error> {
        // Rationals reduce mod p when the denominator is a unit.
        let q = Q::from_json(v)?;
        let red = |b: &BigInt| {
            let m = b % BigInt::from(P);
            Fp::<P>::new(m.to_i64().unwrap_or(0))
        };
        let d = red(q.0.denom())
            .inv()
            .ok_or_else(|| Error::Parse(format!("denominator of {q} vanishes mod {P}")))?;
        Ok(red(q.0.numer()).mul(&d))
    }
    fn to_json(&self) -> Value {
        Value::from(self.0)
    }
    fn ring_tag() -> Value {
        serde_json::json!({ "Fp": P })
    }
}

impl<const P: u64> Field for Fp<P> {}

// ---------------------------------------------------------------------------
// Dual numbers
// ---------------------------------------------------------------------------

/// a + b e with e^2 = 0.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Dual<S: Scalar> {
    pub a: S,
    pub b: S,
}

impl<S: Scalar> Dual<S> {
    pub fn new(a: S, b: S) -> Self {
        Dual { a, b }
    }
    pub fn lift(a: S) -> Self {
        Dual { a, b: S::zero() }
    }
}

impl<S: Scalar> fmt::Display for Dual<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else {
            write!(f, "{}+{}e", self.a, self.b)
        }
    }
}

impl<S: Scalar> Scalar for Dual<S> {
    fn zero() -> Self {
        Dual::lift(S::zero())
    }
    fn one() -> Self {
        Dual::lift(S::one())
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        Dual::new(self.a.add(&o.a), self.b.add(&o.b))
    }
    fn sub(&self, o: &Self) -> Self {
        Dual::new(self.a.sub(&o.a), self.b.sub(&o.b))
    }
    fn mul(&self, o: &Self) -> Self {
        Dual::new(self.a.mul(&o.a), self.a.mul(&o.b).add(&self.b.mul(&o.a)))
    }
    fn neg(&self) -> Self {
        Dual::new(self.a.neg(), self.b.neg())
    }
    fn inv(&self) -> Option<Self> {
        let ai = self.a.inv()?;
        Some(Dual::new(ai.clone(), self.b.mul(&ai).mul(&ai).neg()))
    }
    fn from_i64(v: i64) -> Self {
        Dual::lift(S::from_i64(v))
    }
    fn from_json(v: &Value) -> Result<Self, Error> {
        match v {
            Value::Array(xs) if xs.len() == 2 => Ok(Dual::new(S::from_json(&xs[0])?, S::from_json(&xs[1])?)),
            Value::String(s) if s.ends_with('e') => {
                let body = &s[..s.len() - 1];
                // split at the last '+' that is not a leading sign
                let cut = body
                    .char_indices()
                    .skip(1)
                    .filter(|(_, c)| *c == '+')
                    .map(|(i, _)| i)
                    .last()
                    .ok_or_else(|| Error::Parse(format!("bad dual number '{s}'")))?;
                Ok(Dual::new(S::from_text(&body[..cut])?, S::from_text(&body[cut + 1..])?))
            }
            _ => Ok(Dual::lift(S::from_json(v)?)),
        }
    }
    fn to_json(&self) -> Value {
        if self.b.is_zero() {
            self.a.to_json()
        } else {
            Value::Array(vec![self.a.to_json(), self.b.to_json()])
        }
    }
    fn ring_tag() -> Value {
        match S::ring_tag() {
            Value::String(s) => Value::String(format!("{s}[e]")),
            Value::Object(m) => {
                let p = m.get("Fp").cloned().unwrap_or(Value::Null);
                serde_json::json!({ "Fp[e]": p })
            }
            other => other,
        }
    }
}

// ---------------------------------------------------------------------------
// Vectors and dense helpers
// ---------------------------------------------------------------------------

pub fn zeros<S: Scalar>(n: usize) -> Vec<S> {
    vec![S::zero(); n]
}

pub fn unit<S: Scalar>(n: usize, i: usize) -> Vec<S> {
    let mut v = zeros(n);
    v[i] = S::one();
    v
}

pub fn axpy<S: Scalar>(y: &mut [S], c: &S, x: &[S]) {
    if c.is_zero() {
        return;
    }
    for (yi, xi) in y.iter_mut().zip(x) {
        if !xi.is_zero() {
            *yi = yi.add(&c.mul(xi));
        }
    }
}

pub fn is_zero_vec<S: Scalar>(v: &[S]) -> bool {
    v.iter().all(|x| x.is_zero())
}

/// Row-major dense matrix, `rows x cols`.
pub type Dense<S> = Vec<Vec<S>>;

pub fn dense_apply<S: Scalar>(m: &Dense<S>, v: &[S]) -> Vec<S> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                .fold(S::zero(), |acc, (a, b)| acc.add(&a.mul(b)))
        })
        .collect()
}

/// Dense elimination rank. Kept deliberately naive: it is the reference the
/// sparse code is tested against.
pub fn dense_rank<S: Scalar>(m: &Dense<S>) -> usize {
    let mut a = m.clone();
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..rows).find(|&i| a[i][c].inv().is_some()) else { continue };
        a.swap(r, piv);
        let inv = a[r][c].inv().unwrap();
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].mul(&inv);
                let pr = a[r].clone();
                for (x, y) in a[i].iter_mut().zip(&pr) {
                    *x = x.sub(&f.mul(y));
                }
            }
        }
        r += 1;
    }
    r
}

/// Solve `m x = b` over a field or local ring; `None` when inconsistent.
pub fn dense_solve<S: Scalar>(m: &Dense<S>, b: &[S]) -> Option<Vec<S>> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut a: Dense<S> = m.iter().zip(b).map(|(r, x)| {
        let mut r = r.clone();
        r.push(x.clone());
        r
    }).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..rows).find(|&i| a[i][c].inv().is_some()) else { continue };
        a.swap(r, piv);
        let inv = a[r][c].inv().unwrap();
        for x in a[r].iter_mut() {
            *x = x.mul(&inv);
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                let pr = a[r].clone();
                for (x, y) in a[i].iter_mut().zip(&pr) {
                    *x = x.sub(&f.mul(y));
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if a[r..].iter().any(|row| !is_zero_vec(row)) {
        return None;
    }
    let mut x = zeros(cols);
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = a[i][cols].clone();
    }
    Some(x)
}

// ---------------------------------------------------------------------------
// Sparse matrices
// ---------------------------------------------------------------------------

pub type SparseRow<S> = Vec<(usize, S)>;

/// Row-compressed sparse matrix. Rows are sorted by column and never store
/// zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix<S: Scalar> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<SparseRow<S>>,
}

/// `x += c * y` on sorted sparse rows.
pub fn row_axpy<S: Scalar>(x: &SparseRow<S>, c: &S, y: &SparseRow<S>) -> SparseRow<S> {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        if j == y.len() || (i < x.len() && x[i].0 < y[j].0) {
            out.push(x[i].clone());
            i += 1;
        } else if i == x.len() || y[j].0 < x[i].0 {
            let v = c.mul(&y[j].1);
            if !v.is_zero() {
                out.push((y[j].0, v));
            }
            j += 1;
        } else {
            let v = x[i].1.add(&c.mul(&y[j].1));
            if !v.is_zero() {
                out.push((x[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

pub fn row_from_map<S: Scalar>(m: HashMap<usize, S>) -> SparseRow<S> {
    let mut r: SparseRow<S> = m.into_iter().filter(|(_, v)| !v.is_zero()).collect();
    r.sort_by_key(|e| e.0);
    r
}

impl<S: Scalar> SparseMatrix<S> {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, data: vec![Vec::new(); rows] }
    }

    /// Duplicates are summed, zeros dropped.
    pub fn from_triplets(rows: usize, cols: usize, t: impl IntoIterator<Item = (usize, usize, S)>) -> Self {
        let mut acc: Vec<HashMap<usize, S>> = vec![HashMap::new(); rows];
        for (i, j, v) in t {
            assert!(i < rows && j < cols, "triplet ({i},{j}) out of bounds {rows}x{cols}");
            let e = acc[i].entry(j).or_insert_with(S::zero);
            *e = e.add(&v);
        }
        SparseMatrix { rows, cols, data: acc.into_iter().map(row_from_map).collect() }
    }

    pub fn from_rows(cols: usize, data: Vec<SparseRow<S>>) -> Self {
        SparseMatrix { rows: data.len(), cols, data }
    }

    pub fn from_dense(d: &Dense<S>, cols: usize) -> Self {
        let data = d
            .iter()
            .map(|r| r.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(j, v)| (j, v.clone())).collect())
            .collect();
        SparseMatrix { rows: d.len(), cols, data }
    }

    pub fn to_dense(&self) -> Dense<S> {
        let mut d = vec![zeros(self.cols); self.rows];
        for (i, r) in self.data.iter().enumerate() {
            for (j, v) in r {
                d[i][*j] = v.clone();
            }
        }
        d
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(|r| r.len()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|r| r.is_empty())
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        match self.data[i].binary_search_by_key(&j, |e| e.0) {
            Ok(k) => self.data[i][k].1.clone(),
            Err(_) => S::zero(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut data = vec![Vec::new(); self.cols];
        for (i, r) in self.data.iter().enumerate() {
            for (j, v) in r {
                data[*j].push((i, v.clone()));
            }
        }
        SparseMatrix { rows: self.cols, cols: self.rows, data }
    }

    /// `self * other`.
    pub fn mul(&self, other: &SparseMatrix<S>) -> SparseMatrix<S> {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let data = self
            .data
            .iter()
            .map(|r| {
                let mut acc: HashMap<usize, S> = HashMap::new();
                for (k, a) in r {
                    for (j, b) in &other.data[*k] {
                        let e = acc.entry(*j).or_insert_with(S::zero);
                        *e = e.add(&a.mul(b));
                    }
                }
                row_from_map(acc)
            })
            .collect();
        SparseMatrix { rows: self.rows, cols: other.cols, data }
    }

    pub fn sub(&self, other: &SparseMatrix<S>) -> SparseMatrix<S> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let m1 = S::one().neg();
        let data = self.data.iter().zip(&other.data).map(|(a, b)| row_axpy(a, &m1, b)).collect();
        SparseMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn add(&self, other: &SparseMatrix<S>) -> SparseMatrix<S> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| row_axpy(a, &S::one(), b)).collect();
        SparseMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix { rows: n, cols: n, data: (0..n).map(|i| vec![(i, S::one())]).collect() }
    }

    pub fn apply(&self, v: &[S]) -> Vec<S> {
        self.data
            .iter()
            .map(|r| r.iter().fold(S::zero(), |acc, (j, a)| acc.add(&a.mul(&v[*j]))))
            .collect()
    }

    /// Keep the listed rows and columns, in the given order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let cmap: HashMap<usize, usize> = cols.iter().enumerate().map(|(k, &c)| (c, k)).collect();
        let data = rows
            .iter()
            .map(|&i| {
                let mut r: SparseRow<S> =
                    self.data[i].iter().filter_map(|(j, v)| cmap.get(j).map(|&k| (k, v.clone()))).collect();
                r.sort_by_key(|e| e.0);
                r
            })
            .collect();
        SparseMatrix { rows: rows.len(), cols: cols.len(), data }
    }

    /// Echelon form: list of (leading column, row) with distinct leading
    /// columns. Rows enter shortest first.
    fn echelon(&self) -> Vec<(usize, SparseRow<S>)> {
        let mut order: Vec<usize> = (0..self.rows).filter(|&i| !self.data[i].is_empty()).collect();
        order.sort_by_key(|&i| self.data[i].len());
        let mut piv: HashMap<usize, usize> = HashMap::new();
        let mut basis: Vec<(usize, SparseRow<S>)> = Vec::new();
        for i in order {
            let mut row = self.data[i].clone();
            loop {
                let Some(lead) = row.iter().find(|(c, v)| piv.contains_key(c) || v.inv().is_some()).map(|e| e.0)
                else {
                    // only non-unit entries left that no pivot clears; over a
                    // field this means the row is zero
                    if !row.is_empty() {
                        panic!("elimination met a non-unit leading entry outside a field");
                    }
                    break;
                };
                if let Some(&k) = piv.get(&lead) {
                    let (_, prow) = &basis[k];
                    let pv = &prow.iter().find(|e| e.0 == lead).unwrap().1;
                    let rv = &row.iter().find(|e| e.0 == lead).unwrap().1;
                    let f = rv.mul(&pv.inv().unwrap()).neg();
                    row = row_axpy(&row, &f, prow);
                    if row.is_empty() {
                        break;
                    }
                } else {
                    piv.insert(lead, basis.len());
                    basis.push((lead, row));
                    break;
                }
            }
        }
        basis
    }

    pub fn rank(&self) -> usize {
        if self.rows > self.cols {
            self.transpose().echelon().len()
        } else {
            self.echelon().len()
        }
    }

    /// Basis of `{x : self x = 0}`, one vector per free column.
    pub fn kernel_basis(&self) -> Vec<Vec<S>> {
        let mut ech = self.echelon();
        // normalise and back-substitute to reduced echelon form
        for (lead, row) in ech.iter_mut() {
            let inv = row.iter().find(|e| e.0 == *lead).unwrap().1.inv().unwrap();
            for e in row.iter_mut() {
                e.1 = e.1.mul(&inv);
            }
        }
        let leads: HashMap<usize, usize> = ech.iter().enumerate().map(|(k, (l, _))| (*l, k)).collect();
        let n = ech.len();
        for k in 0..n {
            loop {
                let hit = ech[k].1.iter().find(|(c, _)| *c != ech[k].0 && leads.contains_key(c)).cloned();
                let Some((c, v)) = hit else { break };
                let other = ech[leads[&c]].1.clone();
                ech[k].1 = row_axpy(&ech[k].1, &v.neg(), &other);
            }
        }
        let free: Vec<usize> = (0..self.cols).filter(|c| !leads.contains_key(c)).collect();
        free.iter()
            .map(|&f| {
                let mut x = zeros(self.cols);
                x[f] = S::one();
                for (lead, row) in &ech {
                    if let Ok(p) = row.binary_search_by_key(&f, |e| e.0) {
                        x[*lead] = row[p].1.neg();
                    }
                }
                x
            })
            .collect()
    }

    /// Triplet text: header `rows cols nnz`, then `i j value`, 0-based.
    pub fn to_triplets(&self) -> String {
        let mut s = format!("{} {} {}\n", self.rows, self.cols, self.nnz());
        for (i, r) in self.data.iter().enumerate() {
            for (j, v) in r {
                s.push_str(&format!("{i} {j} {}\n", v.to_text()));
            }
        }
        s
    }

    pub fn from_triplet_text(text: &str) -> Result<Self, Error> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head: Vec<usize> = lines
            .next()
            .ok_or_else(|| Error::Parse("empty triplet file".into()))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad header token '{t}'"))))
            .collect::<Result<_, _>>()?;
        let [rows, cols, nnz] = head[..] else {
            return Err(Error::Parse("triplet header needs rows cols nnz".into()));
        };
        let mut t = Vec::with_capacity(nnz);
        for l in lines {
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::Parse(format!("bad triplet line '{l}'")));
            }
            let i = f[0].parse().map_err(|_| Error::Parse(format!("bad row in '{l}'")))?;
            let j = f[1].parse().map_err(|_| Error::Parse(format!("bad column in '{l}'")))?;
            if i >= rows || j >= cols {
                return Err(Error::Parse(format!("entry out of range in '{l}'")));
            }
            t.push((i, j, S::from_text(f[2])?));
        }
        if t.len() != nnz {
            return Err(Error::Parse(format!("header says {nnz} entries, found {}", t.len())));
        }
        Ok(Self::from_triplets(rows, cols, t))
    }
}

/// dim H = dim ker(d_out) - rank(d_in) for `d_in: C^{n-1} -> C^n`,
/// `d_out: C^n -> C^{n+1}`.
pub fn betti<S: Field>(d_in: &SparseMatrix<S>, d_out: &SparseMatrix<S>) -> Result<usize, Error> {
    if d_in.rows != d_out.cols {
        return Err(Error::Shape(format!("d_in has {} rows but d_out has {} columns", d_in.rows, d_out.cols)));
    }
    if !d_out.mul(d_in).is_zero() {
        return Err(Error::NotComplex);
    }
    Ok(d_out.cols - d_out.rank() - d_in.rank())
}

/// Representatives of ker(d_out) / im(d_in): kernel vectors greedily kept
/// when they raise the rank of the running span.
pub fn cohomology_reps<S: Field>(d_in: &SparseMatrix<S>, d_out: &SparseMatrix<S>) -> Vec<Vec<S>> {
    let mut span: Vec<SparseRow<S>> = d_in.transpose().data;
    let mut r = SparseMatrix::from_rows(d_in.rows, span.clone()).rank();
    let mut reps = Vec::new();
    for k in d_out.kernel_basis() {
        let row: SparseRow<S> = k.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(j, v)| (j, v.clone())).collect();
        span.push(row);
        let r2 = SparseMatrix::from_rows(d_in.rows, span.clone()).rank();
        if r2 > r {
            r = r2;
            reps.push(k);
        } else {
            span.pop();
        }
    }
    reps
}

/// Solve `m x = b` with sparse input (dense elimination on the augmented
/// system restricted to nonzero columns would be overkill here).
pub fn sparse_solve<S: Scalar>(m: &SparseMatrix<S>, b: &[S]) -> Option<Vec<S>> {
    dense_solve(&m.to_dense(), b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type F7 = Fp<7>;

    #[test]
    fn rational_text_roundtrip() {
        for s in ["0", "-3", "5/7", "-12/9"] {
            let q: Q = s.parse().unwrap();
            assert_eq!(Q::from_text(&q.to_text()).unwrap(), q);
        }
        assert_eq!("-12/9".parse::<Q>().unwrap().to_string(), "-4/3");
    }

    #[test]
    fn fp_inverse() {
        for v in 1..7 {
            let x = F7::new(v);
            assert_eq!(x.mul(&x.inv().unwrap()), F7::one());
        }
        assert!(F7::zero().inv().is_none());
        assert_eq!(Fp::<7>::from_json(&Value::from("1/2")).unwrap(), F7::new(4));
    }

    #[test]
    fn dual_inverse_and_text() {
        let x = Dual::new(Q::from_i64(2), Q::from_i64(3));
        assert_eq!(x.mul(&x.inv().unwrap()), Dual::one());
        assert!(Dual::new(Q::zero(), Q::one()).inv().is_none());
        assert_eq!(Dual::<Q>::from_json(&Value::from("-1/2+3e")).unwrap(), Dual::new(Q::new(-1, 2), Q::from_i64(3)));
        assert_eq!(Dual::<Q>::ring_tag(), Value::from("Q[e]"));
    }

    #[test]
    fn triplets_roundtrip() {
        let m = SparseMatrix::from_triplets(2, 3, vec![(0, 1, Q::new(1, 2)), (1, 2, Q::from_i64(-4)), (0, 1, Q::zero())]);
        let back = SparseMatrix::<Q>::from_triplet_text(&m.to_triplets()).unwrap();
        assert_eq!(m, back);
        assert!(SparseMatrix::<Q>::from_triplet_text("2 2 1\n0 5 1\n").is_err());
    }

    #[test]
    fn betti_rejects_non_complex() {
        let d = SparseMatrix::from_triplets(1, 1, vec![(0, 0, Q::one())]);
        assert!(matches!(betti(&d, &d), Err(Error::NotComplex)));
    }

    fn small_matrix() -> impl Strategy<Value = Dense<i64>> {
        (1usize..7, 1usize..7).prop_flat_map(|(r, c)| {
            proptest::collection::vec(proptest::collection::vec(prop_oneof![3 => Just(0i64), 1 => -3i64..4], c), r)
        })
    }

    fn lift<S: Scalar>(d: &Dense<i64>) -> Dense<S> {
        d.iter().map(|r| r.iter().map(|&x| S::from_i64(x)).collect()).collect()
    }

    proptest! {
        #[test]
        fn sparse_rank_matches_dense(d in small_matrix()) {
            let cols = d[0].len();
            let q: Dense<Q> = lift(&d);
            let m = SparseMatrix::from_dense(&q, cols);
            prop_assert_eq!(m.rank(), dense_rank(&q));
            prop_assert_eq!(m.transpose().rank(), dense_rank(&q));
            let f: Dense<F7> = lift(&d);
            prop_assert_eq!(SparseMatrix::from_dense(&f, cols).rank(), dense_rank(&f));
        }

        #[test]
        fn kernel_is_kernel(d in small_matrix()) {
            let cols = d[0].len();
            let q: Dense<Q> = lift(&d);
            let m = SparseMatrix::from_dense(&q, cols);
            let k = m.kernel_basis();
            prop_assert_eq!(k.len(), cols - dense_rank(&q));
            for v in &k {
                prop_assert!(is_zero_vec(&m.apply(v)));
            }
        }

        #[test]
        fn solve_finds_preimage(d in small_matrix(), seed in proptest::collection::vec(-2i64..3, 6)) {
            let cols = d[0].len();
            let q: Dense<Q> = lift(&d);
            let x: Vec<Q> = seed.iter().take(cols).map(|&v| Q::from_i64(v)).chain(std::iter::repeat(Q::zero())).take(cols).collect();
            let b = dense_apply(&q, &x);
            let y = dense_solve(&q, &b).unwrap();
            prop_assert_eq!(dense_apply(&q, &y), b);
        }
    }
}
