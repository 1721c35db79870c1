//! Multiplicative (in)dependence of α, √5 and τ(t), and exact
//! non-vanishing decisions for the linear forms built from them.
//!
//! Dependence is decided from prime-ideal valuations in Z[α]: an element of
//! Q(√5)* with all valuations zero is a unit, hence `±α^u`. For `t > 15`,
//! `α^t + 1` has a primitive prime divisor other than `(√5)`, so any τ(t)
//! with such an index is independent of everything with smaller index.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arbreal::CertifiedReal;
use crate::error::{FibpowError, Result};
use crate::quadfield::{log_alpha, log_sqrt5, log_tau, tau, tau_norm, QuadElement};

/// Indices above this have a primitive divisor of `α^t + 1`.
pub const PRIMITIVE_DIVISOR_CUTOFF: u64 = 15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Generator {
    Alpha,
    Sqrt5,
    Tau(u64),
}

impl Generator {
    pub fn element(&self) -> QuadElement {
        match self {
            Generator::Alpha => QuadElement::alpha(),
            Generator::Sqrt5 => QuadElement::sqrt5(),
            Generator::Tau(t) => tau(*t),
        }
    }

    pub fn log(&self, bits: u32) -> CertifiedReal {
        match self {
            Generator::Alpha => log_alpha(bits),
            Generator::Sqrt5 => log_sqrt5(bits),
            Generator::Tau(t) => log_tau(*t, bits),
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Alpha => write!(f, "alpha"),
            Generator::Sqrt5 => write!(f, "sqrt5"),
            Generator::Tau(t) => write!(f, "tau({t})"),
        }
    }
}

/// `Π g_i^{e_i} = ±1` with not all `e_i` zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependenceRelation {
    pub generators: Vec<Generator>,
    pub exponents: Vec<BigInt>,
    pub witness: String,
}

impl DependenceRelation {
    /// Exact check in Q(√5).
    pub fn verify(&self) -> bool {
        if self.exponents.iter().all(|e| e.is_zero()) {
            return false;
        }
        let mut acc = QuadElement::one();
        for (g, e) in self.generators.iter().zip(&self.exponents) {
            let Some(e) = e.to_i64() else { return false };
            match g.element().powi(e) {
                Some(p) => acc = acc.mul(&p),
                None => return false,
            }
        }
        acc == QuadElement::one() || acc == QuadElement::one().neg()
    }
}

// ---------------------------------------------------------------------------
// prime ideals and valuations

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum PrimeIdeal {
    /// `(√5)`
    Ramified,
    /// `(p)` for `p ≡ ±2 (mod 5)`
    Inert(u64),
    /// `(p, α - r)` with `r^2 - r - 1 ≡ 0 (mod p)`
    Split(u64, u64),
}

fn factor_u64(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn prime_ideals_over(p: u64) -> Vec<PrimeIdeal> {
    if p == 5 {
        return vec![PrimeIdeal::Ramified];
    }
    let roots: Vec<u64> = (0..p).filter(|r| (r * r + p - r % p + p - 1) % p == 0).collect();
    if roots.is_empty() {
        vec![PrimeIdeal::Inert(p)]
    } else {
        roots.into_iter().map(|r| PrimeIdeal::Split(p, r)).collect()
    }
}

fn vp(n: &BigInt, p: u64) -> i64 {
    if n.is_zero() {
        return i64::MAX;
    }
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut k = 0;
    while (&n % &p).is_zero() {
        n /= &p;
        k += 1;
    }
    k
}

/// `x = z/d` with `z = u + vα` integral and `d >= 1`.
fn integral_parts(x: &QuadElement) -> (BigInt, BigInt, BigInt) {
    let d = x.a().denom().lcm(x.b().denom());
    let a = (x.a() * BigRational::from_integer(d.clone())).to_integer();
    let b = (x.b() * BigRational::from_integer(d.clone())).to_integer();
    // a + b√5 = (a - b) + 2b α
    (&a - &b, b * 2, d)
}

/// Root of `X^2 - X - 1` modulo `p^k` lifting `r`.
fn hensel_root(p: u64, r: u64, k: u32) -> BigInt {
    let modulus = BigInt::from(p).pow(k);
    let mut x = BigInt::from(r);
    let mut prec = BigInt::from(p);
    while prec < modulus {
        prec = (&prec * &prec).min(modulus.clone());
        let f: BigInt = &x * &x - &x - BigInt::one();
        let fp: BigInt = &x * BigInt::from(2) - BigInt::one();
        let inv = fp.extended_gcd(&prec).x;
        x = (&x - f * inv).mod_floor(&prec);
    }
    x.mod_floor(&modulus)
}

fn valuation(x: &QuadElement, ideal: &PrimeIdeal) -> i64 {
    assert!(!x.is_zero());
    let (u, v, d) = integral_parts(x);
    match ideal {
        PrimeIdeal::Ramified => {
            let mut k = 0;
            let mut z = x.scale(&BigRational::from_integer(d.clone()));
            let s5 = QuadElement::sqrt5();
            loop {
                let q = z.div(&s5).expect("sqrt5 is invertible");
                if !q.is_integral() {
                    break;
                }
                z = q;
                k += 1;
            }
            k - 2 * vp(&d, 5)
        }
        PrimeIdeal::Inert(p) => vp(&u, *p).min(vp(&v, *p)) - vp(&d, *p),
        PrimeIdeal::Split(p, r) => {
            let norm = &u * &u + &u * &v - &v * &v;
            let k = vp(&norm, *p) as u32 + 1;
            let root = hensel_root(*p, *r, k);
            let modulus = BigInt::from(*p).pow(k);
            let w = (&u + &v * root).mod_floor(&modulus);
            let val = if w.is_zero() { k as i64 } else { vp(&w, *p) };
            val - vp(&d, *p)
        }
    }
}

fn norm_primes(x: &QuadElement) -> Vec<u64> {
    let n = x.norm();
    let mut ps = BTreeSet::new();
    for part in [n.numer().abs(), n.denom().abs()] {
        let v = part.to_u64().expect("norm too large for trial division");
        ps.extend(factor_u64(v));
    }
    ps.into_iter().collect()
}

// ---------------------------------------------------------------------------
// exact integer linear algebra

/// Basis of the integer kernel `{x : M x = 0}` by unimodular column operations.
pub fn integer_kernel(rows: &[Vec<BigInt>], ncols: usize) -> Vec<Vec<BigInt>> {
    let mut m: Vec<Vec<BigInt>> = rows.to_vec();
    let mut u: Vec<Vec<BigInt>> = (0..ncols)
        .map(|i| (0..ncols).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    // column j of U is u[*][j]; apply the same ops to m and u
    let col_op = |m: &mut Vec<Vec<BigInt>>, dst: usize, src: usize, q: &BigInt| {
        for row in m.iter_mut() {
            let t = &row[src] * q;
            row[dst] -= t;
        }
    };
    let swap = |m: &mut Vec<Vec<BigInt>>, a: usize, b: usize| {
        for row in m.iter_mut() {
            row.swap(a, b);
        }
    };
    let mut pivot = 0;
    for i in 0..m.len() {
        if pivot >= ncols {
            break;
        }
        loop {
            let best = (pivot..ncols)
                .filter(|&j| !m[i][j].is_zero())
                .min_by_key(|&j| m[i][j].abs());
            let Some(best) = best else { break };
            swap(&mut m, pivot, best);
            swap(&mut u, pivot, best);
            let mut done = true;
            for j in pivot + 1..ncols {
                if !m[i][j].is_zero() {
                    let q = m[i][j].div_floor(&m[i][pivot]);
                    col_op(&mut m, j, pivot, &q);
                    col_op(&mut u, j, pivot, &q);
                    if !m[i][j].is_zero() {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if !m[i][pivot].is_zero() {
            pivot += 1;
        }
    }
    (pivot..ncols).map(|j| u.iter().map(|row| row[j].clone()).collect()).collect()
}

/// Solves `E k = c` for rational `k`, `E` given by its columns.
fn solve_columns(cols: &[Vec<BigInt>], c: &[BigInt]) -> Option<Vec<BigRational>> {
    let n = c.len();
    let k = cols.len();
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            let mut row: Vec<BigRational> =
                cols.iter().map(|col| BigRational::from_integer(col[i].clone())).collect();
            row.push(BigRational::from_integer(c[i].clone()));
            row
        })
        .collect();
    let mut r = 0;
    let mut where_: Vec<usize> = Vec::new();
    for col in 0..k {
        let Some(p) = (r..n).find(|&i| !a[i][col].is_zero()) else { continue };
        a.swap(r, p);
        let inv = BigRational::one() / a[r][col].clone();
        for x in a[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..n {
            if i != r && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for j in 0..=k {
                    let t = &a[r][j] * &f;
                    a[i][j] -= t;
                }
            }
        }
        where_.push(col);
        r += 1;
    }
    if (r..n).any(|i| !a[i][k].is_zero()) {
        return None;
    }
    let mut sol = vec![BigRational::zero(); k];
    for (row, &col) in where_.iter().enumerate() {
        sol[col] = a[row][k].clone();
    }
    Some(sol)
}

// ---------------------------------------------------------------------------
// relation lattices

/// Exponent `u` with `x = ±α^u` for a unit `x`.
fn unit_exponent(x: &QuadElement) -> i64 {
    let n = x.norm();
    assert!(n == BigRational::one() || n == -BigRational::one(), "not a unit");
    let bits = 128;
    let l = x.to_real(bits).abs().ln().expect("nonzero unit");
    let u = l.div(&log_alpha(bits)).expect("log alpha > 0").to_f64().round() as i64;
    let au = QuadElement::alpha().powi(u).expect("alpha is invertible");
    assert!(x == &au || x == &au.neg(), "unit exponent verification failed");
    u
}

/// Relations among non-α generators modulo units, with the unit part.
struct Lattice {
    gens: Vec<Generator>,
    ideals: Vec<PrimeIdeal>,
    matrix: Vec<Vec<BigInt>>,
    basis: Vec<Vec<BigInt>>,
    unit_parts: Vec<i64>,
}

impl Lattice {
    fn new(gens: &[Generator]) -> Self {
        let gens: Vec<Generator> = gens.iter().copied().filter(|g| *g != Generator::Alpha).collect();
        let elems: Vec<QuadElement> = gens.iter().map(|g| g.element()).collect();
        let mut ideals = BTreeSet::new();
        for e in &elems {
            for p in norm_primes(e) {
                for ideal in prime_ideals_over(p) {
                    ideals.insert(ideal);
                }
            }
        }
        let ideals: Vec<PrimeIdeal> = ideals.into_iter().collect();
        let matrix: Vec<Vec<BigInt>> = ideals
            .iter()
            .map(|id| elems.iter().map(|e| BigInt::from(valuation(e, id))).collect())
            .collect();
        let basis = integer_kernel(&matrix, gens.len());
        let unit_parts = basis
            .iter()
            .map(|e| {
                let mut acc = QuadElement::one();
                for (g, k) in elems.iter().zip(e) {
                    acc = acc.mul(&g.powi(k.to_i64().expect("small exponent")).expect("nonzero"));
                }
                unit_exponent(&acc)
            })
            .collect();
        Lattice { gens, ideals, matrix, basis, unit_parts }
    }
}

/// All basis relations among `gens`, each verified exactly.
pub fn relations(gens: &[Generator]) -> Vec<DependenceRelation> {
    for g in gens {
        if let Generator::Tau(t) = g {
            assert!(*t <= PRIMITIVE_DIVISOR_CUTOFF, "brute-force search needs t <= 15");
        }
    }
    let with_alpha = gens.contains(&Generator::Alpha);
    let lat = Lattice::new(gens);
    let mut out = Vec::new();
    let push = |out: &mut Vec<DependenceRelation>, coeffs: Vec<BigInt>, alpha_exp: BigInt, tag: &str| {
        let mut exps = Vec::new();
        for g in gens {
            if *g == Generator::Alpha {
                exps.push(alpha_exp.clone());
            } else {
                let i = lat.gens.iter().position(|h| h == g).unwrap();
                exps.push(coeffs[i].clone());
            }
        }
        let rel = DependenceRelation { generators: gens.to_vec(), exponents: exps, witness: tag.into() };
        debug_assert!(rel.verify());
        out.push(rel);
    };
    if with_alpha {
        for (e, &u) in lat.basis.iter().zip(&lat.unit_parts) {
            push(&mut out, e.clone(), BigInt::from(-u), "valuation kernel with unit part");
        }
    } else {
        // combinations whose unit parts cancel
        let row = vec![lat.unit_parts.iter().map(|&u| BigInt::from(u)).collect::<Vec<_>>()];
        for k in integer_kernel(&row, lat.basis.len()) {
            let mut c = vec![BigInt::zero(); lat.gens.len()];
            for (kj, e) in k.iter().zip(&lat.basis) {
                for (ci, ei) in c.iter_mut().zip(e) {
                    *ci += kj * ei;
                }
            }
            push(&mut out, c, BigInt::zero(), "valuation kernel, unit parts cancel");
        }
    }
    out
}

/// A nontrivial relation among α, √5 and the τ(t), if any.
pub fn find_dependence(t_list: &[u64]) -> Option<DependenceRelation> {
    let mut gens = vec![Generator::Alpha, Generator::Sqrt5];
    gens.extend(t_list.iter().map(|&t| Generator::Tau(t)));
    relations(&gens).into_iter().next()
}

/// True iff the given generators are multiplicatively independent.
pub fn independent(gens: &[Generator]) -> bool {
    relations(gens).is_empty()
}

/// τ(t) is a unit exactly when its norm is ±1.
pub fn unit_test_tau(t: u64) -> bool {
    tau_norm(t).abs() == BigRational::one()
}

// ---------------------------------------------------------------------------
// linear forms over α, √5, τ(t)

/// `c_α log α + c_√5 log √5 + Σ c_t log τ(t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TauForm {
    pub c_alpha: BigInt,
    pub c_sqrt5: BigInt,
    pub taus: Vec<(u64, BigInt)>,
}

/// Which combination of the four basic forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FormKind {
    L4a,
    L4b,
    L5,
}

impl TauForm {
    pub fn new(c_alpha: BigInt, c_sqrt5: BigInt, taus: Vec<(u64, BigInt)>) -> Self {
        TauForm { c_alpha, c_sqrt5, taus }.normalized()
    }

    /// `Δ log α - a1 log √5 - a2 log τ(t)`.
    pub fn lambda4a(delta: &BigInt, a1: &BigInt, a2: &BigInt, t: u64) -> Self {
        Self::new(delta.clone(), -a1, vec![(t, -a2)])
    }

    /// `Δ log α - a2 log √5 - a1 log τ(t)`.
    pub fn lambda4b(delta: &BigInt, a1: &BigInt, a2: &BigInt, t: u64) -> Self {
        Self::new(delta.clone(), -a2, vec![(t, -a1)])
    }

    /// `Δ log α - a1 log τ(t1) + a2 log τ(t2)`.
    pub fn lambda5(delta: &BigInt, a1: &BigInt, a2: &BigInt, t1: u64, t2: u64) -> Self {
        Self::new(delta.clone(), BigInt::zero(), vec![(t1, -a1), (t2, a2.clone())])
    }

    pub fn of_kind(kind: FormKind, delta: &BigInt, a1: &BigInt, a2: &BigInt, t1: u64, t2: u64) -> Self {
        match kind {
            FormKind::L4a => Self::lambda4a(delta, a1, a2, t1),
            FormKind::L4b => Self::lambda4b(delta, a1, a2, t1),
            FormKind::L5 => Self::lambda5(delta, a1, a2, t1, t2),
        }
    }

    /// Merges equal indices, drops zero coefficients, sorts by index.
    fn normalized(mut self) -> Self {
        self.taus.sort_by_key(|(t, _)| *t);
        let mut merged: Vec<(u64, BigInt)> = Vec::new();
        for (t, c) in self.taus.drain(..) {
            match merged.last_mut() {
                Some((s, d)) if *s == t => *d += c,
                _ => merged.push((t, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        self.taus = merged;
        self
    }

    /// Certified value.
    pub fn value(&self, bits: u32) -> CertifiedReal {
        let mut v = log_alpha(bits)
            .mul_int(&self.c_alpha)
            .add(&log_sqrt5(bits).mul_int(&self.c_sqrt5));
        for (t, c) in &self.taus {
            v = v.add(&log_tau(*t, bits).mul_int(c));
        }
        v
    }

    /// Replaces every `log τ(t)` with `t ∈ {1, 2, 10}` by its expression in
    /// `log α`, `log √5`.
    pub fn rewrite_all_special(&self) -> Self {
        let mut out = self.clone();
        for t in [1, 2, 10] {
            if out.taus.iter().any(|(s, _)| *s == t) {
                out = rewrite_special_tau(&out, t).expect("special index");
            }
        }
        out
    }

    pub fn is_two_term(&self) -> bool {
        self.taus.is_empty()
    }
}

impl fmt::Display for TauForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*log(alpha) + {}*log(sqrt5)", self.c_alpha, self.c_sqrt5)?;
        for (t, c) in &self.taus {
            write!(f, " + {c}*log(tau({t}))")?;
        }
        Ok(())
    }
}

/// `log τ(t) = u log α + w log √5` for the special indices.
pub fn special_tau_log(t: u64) -> Option<(i64, i64)> {
    match t {
        1 => Some((2, -1)),
        2 => Some((1, 0)),
        10 => Some((5, 2)),
        _ => None,
    }
}

/// Rewrites the `log τ(t)` term of `form` into `log α`, `log √5`.
pub fn rewrite_special_tau(form: &TauForm, t: u64) -> Result<TauForm> {
    let (u, w) = special_tau_log(t)
        .ok_or_else(|| FibpowError::InvalidArgument(format!("tau({t}) has no special rewrite")))?;
    let mut out = form.clone();
    if let Some(pos) = out.taus.iter().position(|(s, _)| *s == t) {
        let (_, c) = out.taus.remove(pos);
        out.c_alpha += &c * u;
        out.c_sqrt5 += &c * w;
    }
    Ok(out)
}

/// Outcome of an exact non-vanishing decision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Vanishing {
    NonZero { reason: String },
    ZeroCase,
}

impl Vanishing {
    pub fn is_nonzero(&self) -> bool {
        matches!(self, Vanishing::NonZero { .. })
    }
}

/// Decides exactly whether `form` vanishes.
pub fn decide_vanishing(form: &TauForm) -> Vanishing {
    let form = form.rewrite_all_special();
    // largest index beyond the cutoff carries a primitive divisor
    if let Some((t, _)) = form.taus.iter().rev().find(|(t, _)| *t > PRIMITIVE_DIVISOR_CUTOFF) {
        return Vanishing::NonZero {
            reason: format!("primitive divisor of alpha^{t}+1 has nonzero valuation"),
        };
    }
    let mut gens = vec![Generator::Sqrt5];
    let mut coeffs = vec![form.c_sqrt5.clone()];
    for (t, c) in &form.taus {
        gens.push(Generator::Tau(*t));
        coeffs.push(c.clone());
    }
    let lat = Lattice::new(&gens);
    for (row, ideal) in lat.matrix.iter().zip(&lat.ideals) {
        let v: BigInt = row.iter().zip(&coeffs).map(|(a, b)| a * b).sum();
        if !v.is_zero() {
            return Vanishing::NonZero { reason: format!("valuation {v} at {ideal:?}") };
        }
    }
    let k = solve_columns(&lat.basis, &coeffs).expect("zero valuations imply kernel membership");
    let mut unit = BigRational::from_integer(form.c_alpha.clone());
    for (kj, &u) in k.iter().zip(&lat.unit_parts) {
        unit += kj * BigRational::from_integer(BigInt::from(u));
    }
    if unit.is_zero() {
        Vanishing::ZeroCase
    } else {
        Vanishing::NonZero { reason: format!("reduces to {unit}*log(alpha)") }
    }
}

/// Non-vanishing of the named form; `t2` is ignored except for `L5`.
pub fn nonvanishing(kind: FormKind, t1: u64, t2: u64, a1: &BigInt, a2: &BigInt, delta: &BigInt) -> Vanishing {
    decide_vanishing(&TauForm::of_kind(kind, delta, a1, a2, t1, t2))
}
