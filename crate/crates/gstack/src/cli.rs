//! Command line interface.
//!
//! Exit codes: 0 success, 1 a check failed or the input violates an axiom,
//! 2 the input could not be parsed or the arguments are unusable.

use std::io::Write;
use std::path::{Path as FsPath, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basecat::BaseCategory;
use crate::combinatorics::{flip, paths, shuffles, conditioned_shuffles, eval_path};
use crate::compare::Compare;
use crate::deform::{build_deformation, classify_h2, cocycle_defects, validate_deformation};
use crate::fixtures;
use crate::gscomplex::{Cochain, Gs, Key, Lookup, Space};
use crate::linalg::{betti, Dual, Field, Fp, Scalar, SparseMatrix, Q};
use crate::prestack::{diagonal_bimodule, Prestack, PrestackFile, Ring};
use crate::{cap, Error, Result};

#[derive(Parser, Debug)]
#[command(name = "gstack", version, about = "Exact cohomology of prestacks over finite base categories")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Check every prestack axiom.
    Validate { file: PathBuf },
    /// Cohomology dimensions as a TSV table.
    Cohomology {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        max_degree: usize,
        #[arg(long, value_enum, default_value_t = Complex::Gs)]
        complex: Complex,
    },
    /// Run a property suite.
    Verify {
        file: PathBuf,
        #[arg(long, value_enum)]
        law: Law,
        #[arg(long, default_value_t = 3)]
        degree: usize,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// First-order deformations.
    Deform {
        file: PathBuf,
        /// Degree-2 cochain in the text format.
        #[arg(long)]
        from_cocycle: Option<PathBuf>,
        /// Output file (with a cocycle) or directory (without).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the differential `C^N -> C^{N+1}` as triplets.
    ExportMatrix {
        file: PathBuf,
        #[arg(long)]
        degree: usize,
        #[arg(long, value_enum, default_value_t = Complex::Gs)]
        complex: Complex,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a built-in fixture as a prestack file.
    Fixture {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Complex {
    Gs,
    Nr,
    Graded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Law {
    D2,
    Delta2,
    Fd,
    Gd,
    Gf,
    Homotopy,
    Paths,
    Shuffles,
}

/// Degree caps, overridable from the environment.
pub fn gs_cap() -> usize {
    cap("GSTACK_GS_CAP", 5)
}

pub fn fg_cap() -> usize {
    cap("GSTACK_FG_CAP", 4)
}

pub fn t_cap() -> usize {
    cap("GSTACK_T_CAP", 3)
}

/// Outcome of a command: exit code plus what was already written.
enum Fail {
    Check(String),
    Usage(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) => Fail::Usage(e.to_string()),
            _ => Fail::Check(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Fail {
    fn from(e: std::io::Error) -> Self {
        Fail::Usage(format!("i/o error: {e}"))
    }
}

type Out<'a> = &'a mut dyn Write;

/// Run with explicit arguments and sinks; returns the exit code.
pub fn run<I, T>(args: I, out: Out, err: Out) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return 2;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    match dispatch(cli.cmd, out) {
        Ok(code) => code,
        Err(Fail::Check(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
        Err(Fail::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
    }
}

fn read_file(path: &FsPath) -> std::result::Result<(PrestackFile, Ring), Fail> {
    let text = std::fs::read_to_string(path).map_err(|e| Fail::Usage(format!("cannot read {}: {e}", path.display())))?;
    let f = PrestackFile::from_json_str(&text)?;
    let ring = Ring::parse(&f.ring)?;
    Ok((f, ring))
}

/// Call `$f::<S>(args)` for the field named by `$ring`.
macro_rules! with_field {
    ($ring:expr, $f:ident ( $($arg:expr),* )) => {
        match $ring {
            Ring::Q => $f::<Q>($($arg),*),
            Ring::Fp(2) => $f::<Fp<2>>($($arg),*),
            Ring::Fp(3) => $f::<Fp<3>>($($arg),*),
            Ring::Fp(5) => $f::<Fp<5>>($($arg),*),
            Ring::Fp(7) => $f::<Fp<7>>($($arg),*),
            Ring::Fp(11) => $f::<Fp<11>>($($arg),*),
            Ring::Fp(13) => $f::<Fp<13>>($($arg),*),
            Ring::Fp(101) => $f::<Fp<101>>($($arg),*),
            Ring::Fp(65521) => $f::<Fp<65521>>($($arg),*),
            Ring::Fp(1000003) => $f::<Fp<1000003>>($($arg),*),
            Ring::Fp(2147483647) => $f::<Fp<2147483647>>($($arg),*),
            Ring::Fp(p) => Err(Fail::Usage(format!("unsupported prime {p}; supported: {:?}", crate::linalg::SUPPORTED_PRIMES))),
            Ring::DualQ | Ring::DualFp(_) => Err(Fail::Usage("this command needs a field; dual-number files only support validate".into())),
        }
    };
}

/// As `with_field!`, with dual numbers over those fields as well.
macro_rules! with_ring {
    ($ring:expr, $f:ident ( $($arg:expr),* )) => {
        match $ring {
            Ring::DualQ => $f::<Dual<Q>>($($arg),*),
            Ring::DualFp(2) => $f::<Dual<Fp<2>>>($($arg),*),
            Ring::DualFp(3) => $f::<Dual<Fp<3>>>($($arg),*),
            Ring::DualFp(5) => $f::<Dual<Fp<5>>>($($arg),*),
            Ring::DualFp(7) => $f::<Dual<Fp<7>>>($($arg),*),
            Ring::DualFp(11) => $f::<Dual<Fp<11>>>($($arg),*),
            Ring::DualFp(13) => $f::<Dual<Fp<13>>>($($arg),*),
            Ring::DualFp(101) => $f::<Dual<Fp<101>>>($($arg),*),
            Ring::DualFp(65521) => $f::<Dual<Fp<65521>>>($($arg),*),
            Ring::DualFp(1000003) => $f::<Dual<Fp<1000003>>>($($arg),*),
            Ring::DualFp(2147483647) => $f::<Dual<Fp<2147483647>>>($($arg),*),
            Ring::DualFp(p) => Err(Fail::Usage(format!("unsupported prime {p}"))),
            r => with_field!(r, $f($($arg),*)),
        }
    };
}

fn dispatch(cmd: Cmd, out: Out) -> std::result::Result<i32, Fail> {
    match cmd {
        Cmd::Validate { file } => {
            let (f, ring) = read_file(&file)?;
            with_ring!(ring, cmd_validate(&f, out))
        }
        Cmd::Cohomology { file, max_degree, complex } => {
            let c = gs_cap();
            if max_degree > c {
                return Err(Fail::Usage(format!("--max-degree {max_degree} exceeds the cap of {c} (set GSTACK_GS_CAP)")));
            }
            let (f, ring) = read_file(&file)?;
            with_field!(ring, cmd_cohomology(&f, max_degree, complex, out))
        }
        Cmd::Verify { file, law, degree, trials, seed } => {
            let c = law_cap(law);
            if degree > c {
                return Err(Fail::Usage(format!("--degree {degree} exceeds the cap of {c} for this law")));
            }
            let (f, ring) = read_file(&file)?;
            with_field!(ring, cmd_verify(&f, law, degree, trials, seed, out))
        }
        Cmd::Deform { file, from_cocycle, out: dest } => {
            let (f, ring) = read_file(&file)?;
            let stem = file.file_stem().map_or("prestack".into(), |s| s.to_string_lossy().into_owned());
            with_field!(ring, cmd_deform(&f, &stem, from_cocycle.as_deref(), dest.as_deref(), out))
        }
        Cmd::ExportMatrix { file, degree, complex, out: dest } => {
            let c = gs_cap();
            if degree + 1 > c {
                return Err(Fail::Usage(format!("--degree {degree} needs C^{} beyond the cap of {c} (set GSTACK_GS_CAP)", degree + 1)));
            }
            let (f, ring) = read_file(&file)?;
            with_field!(ring, cmd_export(&f, degree, complex, &dest, out))
        }
        Cmd::Fixture { name, out: dest } => {
            let p = fixtures::by_name::<Q>(&name)
                .ok_or_else(|| Fail::Usage(format!("unknown fixture '{name}'; known: {}", fixtures::NAMES.join(", "))))?;
            let text = PrestackFile::from_prestack(&p, Some(name)).to_json_string();
            match dest {
                Some(path) => std::fs::write(path, text + "\n")?,
                None => writeln!(out, "{text}")?,
            }
            Ok(0)
        }
    }
}

pub fn law_cap(law: Law) -> usize {
    match law {
        Law::D2 | Law::Delta2 => gs_cap() - 1,
        Law::Fd | Law::Gd | Law::Gf => fg_cap() - 1,
        Law::Homotopy => t_cap(),
        Law::Paths | Law::Shuffles => cap("GSTACK_PATH_CAP", 8),
    }
}

fn build<S: Scalar>(f: &PrestackFile) -> std::result::Result<Prestack<S>, Fail> {
    Ok(f.build::<S>()?)
}

fn cmd_validate<S: Scalar>(f: &PrestackFile, out: Out) -> std::result::Result<i32, Fail> {
    let p = build::<S>(f)?;
    match p.validate().and_then(|_| diagonal_bimodule(&p).validate(&p)) {
        Ok(()) => {
            writeln!(out, "OK")?;
            Ok(0)
        }
        Err(e) => {
            writeln!(out, "INVALID\t{e}")?;
            Ok(1)
        }
    }
}

fn valid<S: Scalar>(f: &PrestackFile) -> std::result::Result<Prestack<S>, Fail> {
    let p = build::<S>(f)?;
    p.validate().map_err(|e| Fail::Check(format!("input is not a prestack: {e}")))?;
    Ok(p)
}

/// `d: C^{n-1} -> C^n` of the chosen complex; `n = 0` gives the zero map
/// into `C^0`.
pub fn differential<S: Scalar>(p: &Prestack<S>, complex: Complex, n: usize) -> Result<SparseMatrix<S>> {
    let m = diagonal_bimodule(p);
    let c = Compare::new(p, &m);
    if n == 0 {
        let rows = match complex {
            Complex::Gs => c.gs.space(0).total,
            Complex::Nr => c.gs.nr_coords(&c.gs.space(0))?.len(),
            Complex::Graded => c.gr.space(0).total,
        };
        return Ok(SparseMatrix::zero(rows, 0));
    }
    Ok(match complex {
        Complex::Gs => c.gs.d_matrix(n),
        Complex::Nr => c.gs.nr_d_matrix(n)?,
        Complex::Graded => c.gr.delta_matrix(n),
    })
}

/// `dim H^n` for `n = 0..=max`.
pub fn cohomology<S: Field>(p: &Prestack<S>, complex: Complex, max: usize) -> Result<Vec<usize>> {
    let ds: Vec<SparseMatrix<S>> = (0..=max + 1).map(|n| differential(p, complex, n)).collect::<Result<_>>()?;
    (0..=max).map(|n| betti(&ds[n], &ds[n + 1])).collect()
}

fn cmd_cohomology<S: Field>(f: &PrestackFile, max: usize, complex: Complex, out: Out) -> std::result::Result<i32, Fail> {
    let p = valid::<S>(f)?;
    let dims = cohomology(&p, complex, max)?;
    writeln!(out, "degree\tdim")?;
    for (n, d) in dims.iter().enumerate() {
        writeln!(out, "{n}\t{d}")?;
    }
    Ok(0)
}

fn cmd_export<S: Field>(f: &PrestackFile, degree: usize, complex: Complex, dest: &FsPath, out: Out) -> std::result::Result<i32, Fail> {
    let p = valid::<S>(f)?;
    let d = differential(&p, complex, degree + 1)?;
    std::fs::write(dest, d.to_triplets())?;
    writeln!(out, "{}x{}\t{} nonzeros\t{}", d.rows, d.cols, d.nnz(), dest.display())?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// Property suites
// ---------------------------------------------------------------------------

/// One line per check; `ok` is false on the first failure with a witness.
pub struct Report {
    pub lines: Vec<String>,
    pub ok: bool,
}

impl Report {
    fn new() -> Self {
        Report { lines: Vec::new(), ok: true }
    }

    fn check(&mut self, what: String, pass: bool, witness: impl FnOnce() -> String) {
        if pass {
            self.lines.push(format!("PASS\t{what}"));
        } else {
            self.ok = false;
            self.lines.push(format!("FAIL\t{what}\t{}", witness()));
        }
    }
}

/// Nonzero keys of a vector, at most five.
fn support_keys<S: Scalar>(sp: &Space, v: &[S]) -> String {
    let keys: Vec<String> = sp
        .keys
        .iter()
        .enumerate()
        .filter(|(i, _)| v[sp.offsets[*i]..sp.offsets[*i] + sp.dims[*i]].iter().any(|c| !c.is_zero()))
        .take(5)
        .map(|(_, k)| fmt_key(k))
        .collect();
    format!("keys [{}]", keys.join("; "))
}

fn fmt_key(k: &Key) -> String {
    let j = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let s = if k.simplex.arrows.is_empty() { format!("@{}", k.simplex.start) } else { j(&k.simplex.arrows) };
    format!("{s} | {} | {}", j(&k.objs), j(&k.basis))
}

fn matrix_witness<S: Scalar>(m: &SparseMatrix<S>, rows: &Space, cols: &Space) -> String {
    for (i, r) in m.data.iter().enumerate() {
        if let Some((j, _)) = r.first() {
            let rk = &rows.keys[crate::gscomplex::key_of(rows, i)];
            let ck = &cols.keys[crate::gscomplex::key_of(cols, *j)];
            return format!("row {} <- column {}", fmt_key(rk), fmt_key(ck));
        }
    }
    String::new()
}

/// Evaluate a pointwise operator on a concrete vector.
pub fn apply_op<S: Scalar>(src: &Space, dst: &Space, x: &[S], op: &dyn Fn(Lookup<Vec<S>>, &Key) -> Vec<S>) -> Vec<S> {
    let look = |k: &Key| src.slice(x, k);
    let mut out = Vec::with_capacity(dst.total);
    for k in &dst.keys {
        out.extend(op(&look, k));
    }
    out
}

fn sub<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
}

fn add<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
}

fn is_zero<S: Scalar>(v: &[S]) -> bool {
    v.iter().all(|c| c.is_zero())
}

fn trial_seeds(seed: u64, trials: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).map(|_| rng.gen()).collect()
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

fn binom(n: usize, k: usize) -> usize {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Lexicographic successor in place; false after the last permutation.
fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Brute force: permutations of the concatenated blocks that keep each
/// block in order (and, if asked, block heads in block order).
pub fn brute_shuffle_count(sizes: &[usize], conditioned: bool) -> usize {
    let n: usize = sizes.iter().sum();
    let mut block = Vec::new();
    for (b, &m) in sizes.iter().enumerate() {
        block.extend(std::iter::repeat(b).take(m));
    }
    let firsts: Vec<usize> = (0..sizes.len()).filter(|&b| sizes[b] > 0).map(|b| block.iter().position(|&x| x == b).unwrap()).collect();
    // pos[i] = output slot of input item i
    let mut pos: Vec<usize> = (0..n).collect();
    let mut count = 0;
    loop {
        let monotone = (1..n).all(|i| block[i] != block[i - 1] || pos[i - 1] < pos[i]);
        if monotone && (!conditioned || firsts.windows(2).all(|h| pos[h[0]] < pos[h[1]])) {
            count += 1;
        }
        if !next_permutation(&mut pos) {
            return count;
        }
    }
}

/// Run one property suite. Degrees up to `degree`; `trials` seeded random
/// vectors per degree on top of the exact matrix identity.
pub fn check_law<S: Field>(p: &Prestack<S>, law: Law, degree: usize, trials: usize, seed: u64) -> Report {
    let m = diagonal_bimodule(p);
    let c = Compare::new(p, &m);
    let (gs, gr) = (&c.gs, &c.gr);
    let mut r = Report::new();
    let seeds = trial_seeds(seed, trials);
    match law {
        Law::D2 | Law::Delta2 => {
            let graded = law == Law::Delta2;
            let name = if graded { "delta delta" } else { "d d" };
            let space = |n| if graded { gr.space(n) } else { gs.space(n) };
            let mat = |n| if graded { gr.delta_matrix(n) } else { gs.d_matrix(n) };
            let app = |s: &Space, t: &Space, x: &[S]| if graded { gr.delta_apply(s, t, x) } else { gs.d_apply(s, t, x) };
            for n in 0..=degree {
                let (s0, s1, s2) = (space(n), space(n + 1), space(n + 2));
                let d0 = mat(n + 1);
                let prod = mat(n + 2).mul(&d0);
                r.check(format!("{name} = 0 as matrices on C^{n}"), prod.is_zero(), || matrix_witness(&prod, &s2, &s0));
                for (t, &sd) in seeds.iter().enumerate() {
                    let x = s0.random::<S>(sd, None);
                    let y = app(&s1, &s2, &app(&s0, &s1, &x));
                    r.check(format!("{name} x = 0 on C^{n}, trial {t}"), is_zero(&y), || format!("input {} output {}", support_keys(&s0, &x), support_keys(&s2, &y)));
                }
            }
        }
        Law::Fd | Law::Gd => {
            let is_f = law == Law::Fd;
            for n in 0..=degree {
                if is_f {
                    let (a, b) = (gs.space(n), gs.space(n + 1));
                    let (ga, gb) = (gr.space(n), gr.space(n + 1));
                    let lhs = c.f_matrix(n + 1).mul(&gs.d_matrix(n + 1));
                    let rhs = gr.delta_matrix(n + 1).mul(&c.f_matrix(n));
                    let diff = lhs.sub(&rhs);
                    r.check(format!("F d = delta F as matrices on C^{n}"), diff.is_zero(), || matrix_witness(&diff, &gb, &a));
                    for (t, &sd) in seeds.iter().enumerate() {
                        let x = a.random::<S>(sd, None);
                        let l = apply_op(&b, &gb, &gs.d_apply(&a, &b, &x), &|l, k| c.f_at(l, k));
                        let rr = gr.delta_apply(&ga, &gb, &apply_op(&a, &ga, &x, &|l, k| c.f_at(l, k)));
                        let d = sub(&l, &rr);
                        r.check(format!("F d x = delta F x on C^{n}, trial {t}"), is_zero(&d), || format!("input {} defect {}", support_keys(&a, &x), support_keys(&gb, &d)));
                    }
                } else {
                    let (a, b) = (gr.space(n), gr.space(n + 1));
                    let (sa, sb) = (gs.space(n), gs.space(n + 1));
                    let lhs = c.g_matrix(n + 1).mul(&gr.delta_matrix(n + 1));
                    let rhs = gs.d_matrix(n + 1).mul(&c.g_matrix(n));
                    let diff = lhs.sub(&rhs);
                    r.check(format!("G delta = d G as matrices on C^{n}"), diff.is_zero(), || matrix_witness(&diff, &sb, &a));
                    for (t, &sd) in seeds.iter().enumerate() {
                        let x = a.random::<S>(sd, None);
                        let l = apply_op(&b, &sb, &gr.delta_apply(&a, &b, &x), &|l, k| c.g_at(l, k));
                        let rr = gs.d_apply(&sa, &sb, &apply_op(&a, &sa, &x, &|l, k| c.g_at(l, k)));
                        let d = sub(&l, &rr);
                        r.check(format!("G delta x = d G x on C^{n}, trial {t}"), is_zero(&d), || format!("input {} defect {}", support_keys(&a, &x), support_keys(&sb, &d)));
                    }
                }
            }
        }
        Law::Gf => {
            for n in 0..=degree {
                let sp = gs.space(n);
                let nr = match gs.nr_coords(&sp) {
                    Ok(v) => v,
                    Err(e) => {
                        r.check("normalized-reduced subspace exists".into(), false, || e.to_string());
                        return r;
                    }
                };
                let gf = c.g_matrix(n).mul(&c.f_matrix(n)).sub(&SparseMatrix::identity(sp.total));
                let diff = gf.submatrix(&(0..sp.total).collect::<Vec<_>>(), &nr);
                let nr_space = Space::new(n, nr.iter().map(|&i| (sp.keys[crate::gscomplex::key_of(&sp, i)].clone(), 1)).collect());
                r.check(format!("G F = 1 on nr C^{n} as matrices"), diff.is_zero(), || matrix_witness(&diff, &sp, &nr_space));
                let ga = gr.space(n);
                for (t, &sd) in seeds.iter().enumerate() {
                    let x = sp.random::<S>(sd, Some(&nr));
                    let y = apply_op(&ga, &sp, &apply_op(&sp, &ga, &x, &|l, k| c.f_at(l, k)), &|l, k| c.g_at(l, k));
                    let d = sub(&y, &x);
                    r.check(format!("G F x = x on nr C^{n}, trial {t}"), is_zero(&d), || format!("input {} defect {}", support_keys(&sp, &x), support_keys(&sp, &d)));
                }
            }
        }
        Law::Homotopy => {
            for n in 0..=degree {
                let sp = gr.space(n);
                let tot = sp.total;
                let lhs = c.f_matrix(n).mul(&c.g_matrix(n)).sub(&SparseMatrix::identity(tot));
                let mut rhs = c.t_matrix(n + 1).mul(&gr.delta_matrix(n + 1));
                if n >= 1 {
                    rhs = rhs.add(&gr.delta_matrix(n).mul(&c.t_matrix(n)));
                }
                let diff = lhs.sub(&rhs);
                r.check(format!("F G - 1 = delta T + T delta as matrices on C^{n}"), diff.is_zero(), || matrix_witness(&diff, &sp, &sp));
                let (gsn, up) = (gs.space(n), gr.space(n + 1));
                for (t, &sd) in seeds.iter().enumerate() {
                    let x = sp.random::<S>(sd, None);
                    let fg = apply_op(&gsn, &sp, &apply_op(&sp, &gsn, &x, &|l, k| c.g_at(l, k)), &|l, k| c.f_at(l, k));
                    let l = sub(&fg, &x);
                    let mut rr = apply_op(&up, &sp, &gr.delta_apply(&sp, &up, &x), &|l, k| c.t_at(l, k));
                    if n >= 1 {
                        let down = gr.space(n - 1);
                        rr = add(&rr, &gr.delta_apply(&down, &sp, &apply_op(&sp, &down, &x, &|l, k| c.t_at(l, k))));
                    }
                    let d = sub(&l, &rr);
                    r.check(format!("homotopy identity on C^{n}, trial {t}"), is_zero(&d), || format!("input {} defect {}", support_keys(&sp, &x), support_keys(&sp, &d)));
                }
            }
        }
        Law::Paths => {
            let b = BaseCategory::chain(degree + 1);
            let sigma = |n: usize| (0..n).map(|i| b.chain_arrow(i, i + 1)).collect::<Vec<_>>();
            for n in 2..=degree {
                let ps = paths(&b, &sigma(n));
                r.check(format!("|P| = {}! on a {n}-simplex", n - 1), ps.len() == factorial(n - 1), || format!("found {}", ps.len()));
                for q in &ps {
                    for k in 1..n.saturating_sub(1) {
                        let f = flip(&b, q, k);
                        let ok = f.as_ref().is_ok_and(|f| f.sign == -q.sign && flip(&b, f, k).ok().as_ref() == Some(q));
                        if !ok {
                            r.check(format!("flip at {k} on a {n}-simplex"), false, || format!("path recipe {:?}", q.recipe));
                        }
                    }
                }
                r.check(format!("flip negates the sign and is an involution on a {n}-simplex"), r.ok, String::new);
            }
            // ||r|| on every simplex of the prestack's own nerve
            for n in 2..=degree.min(gs_cap()) {
                for s in p.base.nerve(n) {
                    let ps = paths(&p.base, &s.arrows);
                    for cobj in 0..p.fibers[p.base.end(&s)].objects {
                        let v0 = eval_path(p, &ps[0], cobj);
                        if let Some(q) = ps.iter().find(|q| eval_path(p, q, cobj) != v0) {
                            r.check(format!("||r|| constant on {:?} at object {cobj}", s.arrows), false, || format!("paths {:?} and {:?} differ", ps[0].recipe, q.recipe));
                        }
                    }
                }
                r.check(format!("||r|| independent of the path on {n}-simplices"), r.ok, String::new);
            }
        }
        Law::Shuffles => {
            for m in 0..=degree {
                for n in 0..=degree {
                    let got = shuffles(&[m, n]).len();
                    let want = binom(m + n, m);
                    let brute = if m + n <= 10 { brute_shuffle_count(&[m, n], false) } else { want };
                    r.check(format!("|S({m},{n})| = C({},{m})", m + n), got == want && brute == want, || format!("enumerated {got}, brute force {brute}"));
                }
            }
            let cases: [&[usize]; 3] = [&[2, 2], &[1, 2], &[2, 1, 1]];
            for sizes in cases {
                let got = conditioned_shuffles(sizes).len();
                let brute = brute_shuffle_count(sizes, true);
                r.check(format!("conditioned count for {sizes:?} matches brute force"), got == brute, || format!("enumerated {got}, brute force {brute}"));
            }
        }
    }
    r
}

fn cmd_verify<S: Field>(f: &PrestackFile, law: Law, degree: usize, trials: usize, seed: u64, out: Out) -> std::result::Result<i32, Fail> {
    let p = valid::<S>(f)?;
    let rep = check_law(&p, law, degree, trials, seed);
    for l in &rep.lines {
        writeln!(out, "{l}")?;
    }
    writeln!(out, "{}", if rep.ok { "PASS" } else { "FAIL" })?;
    Ok(if rep.ok { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// Deformations
// ---------------------------------------------------------------------------

fn write_prestack<T: Scalar>(q: &Prestack<T>, name: String, path: &FsPath) -> std::io::Result<()> {
    std::fs::write(path, PrestackFile::from_prestack(q, Some(name)).to_json_string() + "\n")
}

fn cmd_deform<S: Field>(f: &PrestackFile, stem: &str, cocycle: Option<&FsPath>, dest: Option<&FsPath>, out: Out) -> std::result::Result<i32, Fail> {
    let p = valid::<S>(f)?;
    let m = diagonal_bimodule(&p);
    let gs = Gs::new(&p, &m);
    let Some(path) = cocycle else {
        let h = classify_h2(&p)?;
        let dir = dest.map_or_else(|| PathBuf::from("."), FsPath::to_path_buf);
        std::fs::create_dir_all(&dir)?;
        writeln!(out, "dim H2\t{}", h.dim())?;
        for (i, x) in h.reps.iter().enumerate() {
            let q = build_deformation(&p, &h.space, x)?;
            validate_deformation(&q).map_err(|e| Fail::Check(format!("representative {i} does not validate: {e}")))?;
            let file = dir.join(format!("{stem}-deform-{i}.json"));
            write_prestack(&q, format!("{stem} deformation {i}"), &file)?;
            std::fs::write(dir.join(format!("{stem}-deform-{i}.cochain")), h.space.to_cochain(x).to_text())?;
            writeln!(out, "class {i}\t{}", file.display())?;
        }
        return Ok(0);
    };
    let text = std::fs::read_to_string(path).map_err(|e| Fail::Usage(format!("cannot read {}: {e}", path.display())))?;
    let b = &p.base;
    let c = Cochain::<S>::from_text(&text, 2, &|a| (a < b.n_arrows()).then(|| b.src(a)))?;
    let sp = gs.space(2);
    let x = sp.coords(&c).map_err(|e| Fail::Usage(e.to_string()))?;
    let defects = cocycle_defects(&p, &x);
    if !defects.is_empty() {
        writeln!(out, "NOT A COCYCLE\t{} nonzero components of d", defects.len())?;
        let dc = Cochain { degree: 3, comps: defects.into_iter().collect() };
        write!(out, "{}", dc.to_text())?;
        return Ok(1);
    }
    let q = build_deformation(&p, &sp, &x)?;
    if let Err(e) = validate_deformation(&q) {
        writeln!(out, "INVALID\t{e}")?;
        return Ok(1);
    }
    let file = dest.map_or_else(|| PathBuf::from(format!("{stem}-deformed.json")), FsPath::to_path_buf);
    write_prestack(&q, format!("{stem} deformed"), &file)?;
    writeln!(out, "OK\t{}", file.display())?;
    Ok(0)
}
