//! Complete solution of `F_n + F_m = y^a` for one fixed `y`.

use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arbreal::CertifiedReal;
use crate::error::{FibpowError, Result};
use crate::linforms::{bravo_luca_n_bound, BOUND_BITS};
use crate::quadfield::{
    bigint_string, fibonacci, log_alpha, log_int, log_sqrt5, log_tau, perfect_power_decompose, tau,
    tau_norm, zeckendorf, QuadElement, SolutionTriple,
};
use crate::reduction::{baker_davenport, build_kappa_list_at, KappaPair};

use super::cascade::{cf_bound_from_table, table_for};

/// Pairs computed before the rest of the list is needed.
const FIRST_PAIRS: usize = 16;

/// Knobs for the per-`y` search.
#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub kappa_count: usize,
    /// Starting precision for the convergent walk.
    pub kappa_bits: u32,
    /// Optional override of the certified bound on `n`; results are then
    /// only complete up to the cap.
    pub n_cap: Option<BigInt>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            kappa_count: crate::reduction::bakdav::DEFAULT_KAPPA_COUNT,
            kappa_bits: crate::reduction::bakdav::KAPPA_BITS,
            n_cap: None,
        }
    }
}

/// Certificate for one pair `(n1, m1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceReport {
    pub n1: u64,
    pub m1: u64,
    #[serde(with = "bigint_string")]
    pub y_tilde: BigInt,
    #[serde(with = "bigint_string")]
    pub y: BigInt,
    pub a1: u32,
    /// The bound `N` the reductions start from.
    #[serde(with = "bigint_string")]
    pub n_start: BigInt,
    pub kappa_pairs_used: usize,
    /// Bound on `n2 - m2` from the form with `log √5`.
    pub gap_bound: u64,
    pub per_t_bounds: BTreeMap<u64, u64>,
    #[serde(rename = "N2_final")]
    pub n2_final: u64,
    #[serde(rename = "A_final")]
    pub a_final: u64,
    pub solutions: Vec<SolutionTriple>,
    pub special_cases: Vec<String>,
    /// Milliseconds.
    pub elapsed: u64,
}

/// `log τ(t) = u log α + v log y` with rational `u`, `v`, when it exists.
pub fn tau_in_alpha_y(t: u64, y: &BigInt) -> Option<(BigRational, BigRational)> {
    let (base, e) = perfect_power_decompose(y);
    tau_dependence(t, y, &base, e)
}

/// [`tau_in_alpha_y`] with `y = base^e` already known.
fn tau_dependence(t: u64, y: &BigInt, base: &BigInt, e: u32) -> Option<(BigRational, BigRational)> {
    let norm = tau_norm(t).abs();
    // |N(τ)| = y^{2v}
    let v = if norm.is_one() {
        BigRational::zero()
    } else if norm.denom().is_one() {
        BigRational::new(BigInt::from(power_of(norm.numer(), base)?), BigInt::from(2 * e))
    } else if norm.numer().is_one() {
        -BigRational::new(BigInt::from(power_of(norm.denom(), base)?), BigInt::from(2 * e))
    } else {
        return None;
    };
    let d = v.denom().clone();
    let dv = (&v * BigRational::from(d.clone())).to_integer();
    let d64 = d.to_u64()?;
    let y_pow = BigRational::from(num_traits::pow(y.clone(), dv.abs().to_usize()?));
    let scale = if dv.is_negative() { y_pow } else { y_pow.recip() };
    let w = tau(t).pow(d64).scale(&scale);
    if !w.is_integral() || !w.norm().abs().is_one() {
        return None;
    }
    let bits = 128 + 2 * d64 as u32 * t as u32;
    let k = w.to_real(bits).ln().ok()?.div(&log_alpha(bits)).ok()?;
    let k = k.upper().round().to_integer().to_i64()?;
    if QuadElement::alpha().powi(k)? != w {
        return None;
    }
    Some((BigRational::new(BigInt::from(k), d), v))
}

/// `k` with `p = b^k`.
fn power_of(p: &BigInt, b: &BigInt) -> Option<u32> {
    let mut p = p.clone();
    let mut k = 0;
    while p > BigInt::one() {
        let (q, r) = p.div_rem(b);
        if !r.is_zero() {
            return None;
        }
        p = q;
        k += 1;
    }
    Some(k)
}

/// Solutions with `y^a = F_n + F_m` for `1 <= a <= a_max`, read off the
/// Zeckendorf expansion.
pub fn scan_powers(y: &BigInt, a_max: u64) -> Vec<SolutionTriple> {
    let mut out = Vec::new();
    let mut p = BigInt::one();
    for a in 1..=a_max {
        p *= y;
        let z = zeckendorf(&p);
        let (n, m) = match z.as_slice() {
            [m, n] => (*n, *m),
            [n] if *n >= 4 => (n - 1, n - 2),
            _ => continue,
        };
        let s = SolutionTriple { n, m, a: a as u32, y: y.clone() };
        debug_assert!(s.verify());
        out.push(s);
    }
    out
}

/// Exact check of `F_n + F_m = y^a` with `n > m > 1`, `a > 0`.
pub fn verify_solution(n: u64, m: u64, a: u32, y: &BigInt) -> bool {
    SolutionTriple { n, m, a, y: y.clone() }.verify()
}

/// Result of the reductions for one `y`.
#[derive(Clone, Debug)]
pub struct YSolution {
    pub n_start: BigInt,
    pub kappa_pairs_used: usize,
    pub gap_bound: u64,
    pub per_t_bounds: BTreeMap<u64, u64>,
    pub n2_final: u64,
    pub a_final: u64,
    pub solutions: Vec<SolutionTriple>,
    pub special_cases: Vec<String>,
}

/// Where a `(n1, m1)` came from, for error messages and case tags.
#[derive(Clone, Copy, Debug, Default)]
pub struct Origin {
    pub n1: u64,
    pub m1: u64,
}

struct Ctx<'a> {
    origin: Origin,
    n_start: BigInt,
    mu: Box<dyn Fn(u32) -> CertifiedReal + Sync + 'a>,
    pairs: Vec<KappaPair>,
    kappa_count: usize,
    kappa_bits: u32,
    used: usize,
}

impl Ctx<'_> {
    fn fail(&self, step: &str, t: u64, detail: String) -> FibpowError {
        FibpowError::StepFailed { step: step.into(), n1: self.origin.n1, m1: self.origin.m1, t, detail }
    }

    /// Baker-Davenport with a short prefix of the list, the full list, then
    /// a four times longer one. Every list is a prefix of the next, so the
    /// first qualifying pair does not depend on how far the walk went.
    fn reduce(&mut self, tau: &dyn Fn(u32) -> CertifiedReal, c1: &CertifiedReal) -> Result<Option<BigInt>> {
        let c2 = log_alpha(BOUND_BITS);
        loop {
            if let Some(b) = baker_davenport(tau, c1, &c2, &self.pairs)? {
                self.used = self.used.max(b.pair + 1);
                return Ok(Some(b.h));
            }
            let next = if self.pairs.len() < self.kappa_count {
                self.kappa_count
            } else if self.pairs.len() < 4 * self.kappa_count {
                4 * self.kappa_count
            } else {
                return Ok(None);
            };
            let longer = build_kappa_list_at(self.kappa_bits, &self.mu, &self.n_start, next)?;
            if longer.len() <= self.pairs.len() {
                return Ok(None);
            }
            self.pairs = longer;
        }
    }
}

fn u64_bound(v: &BigInt) -> u64 {
    v.to_u64().unwrap_or(u64::MAX)
}

/// Bound on `n2` for a gap `t` with `log τ(t) = u log α + v log y`:
/// `|(m2 + u) log α - (a2 - v) log y| < 1.1 α^{-n2}`.
fn dependent_bound(y: &BigInt, u: &BigRational, v: &BigRational, a_max: &BigInt) -> Result<u64> {
    let d = u.denom().lcm(v.denom());
    let c = CertifiedReal::from_ratio(11, 10, BOUND_BITS).mul_int(&d);
    let q_max = (BigRational::from(a_max.clone()) + v.abs()) * BigRational::from(d.clone());
    let q_max = q_max.ceil().to_integer().max(BigInt::one());
    let table = table_for(|bits| log_int(y, bits).div(&log_alpha(bits)).expect("log alpha > 0"), &q_max)?;
    Ok(u64_bound(&cf_bound_from_table(&table, &q_max, &c)?))
}

/// The bound on `n2` for a gap `t` where `log τ(t)` lies in the span of
/// `log α` and `log y`, starting from `n <= n_bound`; `None` otherwise.
pub fn dependent_gap_bound(t: u64, y: &BigInt, n_bound: &BigInt) -> Result<Option<u64>> {
    let Some((u, v)) = tau_in_alpha_y(t, y) else { return Ok(None) };
    let a_max = log_alpha(BOUND_BITS).mul_int(n_bound).div(&log_int(y, BOUND_BITS))?.floor_upper();
    Ok(Some(dependent_bound(y, &u, &v, &a_max)?))
}

/// Tag for a gap handled by an exact rewrite.
fn special_tag(y: &BigInt, t: u64, origin: Origin) -> &'static str {
    if y == &BigInt::from(2) && t == 6 {
        "step-v"
    } else if origin.m1 + 1 == origin.n1 && origin.n1 % 2 == 0 && t == 2 * (origin.n1 + 1) {
        "step-vi"
    } else if t == 2 {
        "tau-unit"
    } else {
        "dependent-tau"
    }
}

/// All solutions for `y`, complete below the bound `n_start` on `n`.
pub fn solve_y_from(y: &BigInt, n_start: &BigInt, origin: Origin, opts: &SolveOptions) -> Result<YSolution> {
    if y < &BigInt::from(2) {
        return Err(FibpowError::InvalidArgument("y must be at least 2".into()));
    }
    let yc = y.clone();
    let mu = Box::new(move |bits: u32| log_alpha(bits).div(&log_int(&yc, bits)).expect("log y > 0"));
    let pairs = build_kappa_list_at(opts.kappa_bits, &mu, n_start, opts.kappa_count.min(FIRST_PAIRS))?;
    let mut ctx = Ctx {
        origin,
        n_start: n_start.clone(),
        mu,
        pairs,
        kappa_count: opts.kappa_count,
        kappa_bits: opts.kappa_bits,
        used: 0,
    };
    let log_y = log_int(y, BOUND_BITS);
    // y^a < α^n
    let a_max = log_alpha(BOUND_BITS).mul_int(n_start).div(&log_y)?.floor_upper();

    let tau3 = |bits: u32| log_sqrt5(bits).div(&log_int(y, bits)).expect("log y > 0");
    let c1 = CertifiedReal::from_ratio(203, 100, BOUND_BITS).div(&log_y)?;
    let gap = match ctx.reduce(&tau3, &c1)? {
        Some(h) => u64_bound(&h).max(2),
        None => return Err(ctx.fail("III", 0, "no pair separates log √5 / log y".into())),
    };

    let c1 = CertifiedReal::from_ratio(11, 10, BOUND_BITS).div(&log_y)?;
    let mut per_t = BTreeMap::new();
    let mut special = Vec::new();
    let (base, e) = perfect_power_decompose(y);
    for t in 1..=gap {
        let b = match tau_dependence(t, y, &base, e) {
            Some((u, v)) => {
                let b = dependent_bound(y, &u, &v, &a_max)?;
                special.push(format!("{}:t={t}:n2<={b}", special_tag(y, t, origin)));
                b
            }
            None => {
                let taut = move |bits: u32| log_tau(t, bits).div(&log_int(y, bits)).expect("log y > 0");
                match ctx.reduce(&taut, &c1)? {
                    Some(h) => u64_bound(&h),
                    None => return Err(ctx.fail("IV", t, "no pair qualifies and no exact rewrite".into())),
                }
            }
        };
        per_t.insert(t, b);
    }
    let n2_final = per_t.values().copied().max().unwrap_or(0).max(gap);
    let a_final = log_alpha(BOUND_BITS)
        .mul_int(&BigInt::from(n2_final))
        .div(&log_y)?
        .floor_upper()
        .to_u64()
        .unwrap_or(0);
    let solutions = scan_powers(y, a_final);
    Ok(YSolution {
        n_start: n_start.clone(),
        kappa_pairs_used: ctx.used,
        gap_bound: gap,
        per_t_bounds: per_t,
        n2_final,
        a_final,
        solutions,
        special_cases: special,
    })
}

/// The starting bound on `n` for `y`: the single-solution bound, or the
/// cap if one is given and smaller.
pub fn starting_bound(y: &BigInt, global_n2: &BigInt, opts: &SolveOptions) -> Result<BigInt> {
    let n = bravo_luca_n_bound(y)?.max(global_n2.clone());
    Ok(match &opts.n_cap {
        Some(cap) => n.min(cap.clone()),
        None => n,
    })
}

/// All solutions for a given `y`.
pub fn solve_y(y: &BigInt, opts: &SolveOptions) -> Result<YSolution> {
    let n = starting_bound(y, &BigInt::zero(), opts)?;
    solve_y_from(y, &n, Origin::default(), opts)
}

/// Certificate for the instance generated by `F_{n1} + F_{m1}`.
///
/// `n2` is the global bound; the single-solution bound for `y` is used when
/// larger, so the search is complete for this `y` regardless.
pub fn solve_instance(n1: u64, m1: u64, n2: &BigInt, opts: &SolveOptions) -> Result<InstanceReport> {
    if !(m1 > 1 && n1 > m1) {
        return Err(FibpowError::InvalidArgument(format!("need 1 < m1 < n1, got ({n1}, {m1})")));
    }
    let clock = Instant::now();
    let y_tilde = fibonacci(n1) + fibonacci(m1);
    let (y, a1) = perfect_power_decompose(&y_tilde);
    let n = starting_bound(&y, n2, opts)?;
    let s = solve_y_from(&y, &n, Origin { n1, m1 }, opts)?;
    if !s.solutions.iter().any(|x| x.n == n1 && x.m == m1 && x.a == a1) {
        return Err(FibpowError::StepFailed {
            step: "VII".into(),
            n1,
            m1,
            t: 0,
            detail: "generating solution not recovered".into(),
        });
    }
    Ok(InstanceReport {
        n1,
        m1,
        y_tilde,
        y,
        a1,
        n_start: s.n_start,
        kappa_pairs_used: s.kappa_pairs_used,
        gap_bound: s.gap_bound,
        per_t_bounds: s.per_t_bounds,
        n2_final: s.n2_final,
        a_final: s.a_final,
        solutions: s.solutions,
        special_cases: s.special_cases,
        elapsed: clock.elapsed().as_millis() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triples(v: &[SolutionTriple]) -> Vec<(u64, u64, u32)> {
        v.iter().map(|s| (s.n, s.m, s.a)).collect()
    }

    #[test]
    fn dependent_gaps() {
        let one = BigRational::one;
        assert_eq!(tau_in_alpha_y(2, &BigInt::from(7)), Some((one(), BigRational::zero())));
        assert_eq!(
            tau_in_alpha_y(6, &BigInt::from(2)),
            Some((BigRational::from(BigInt::from(3)), one()))
        );
        assert_eq!(
            tau_in_alpha_y(10, &BigInt::from(5)),
            Some((BigRational::from(BigInt::from(5)), one()))
        );
        assert_eq!(
            tau_in_alpha_y(1, &BigInt::from(5)),
            Some((BigRational::from(BigInt::from(2)), BigRational::new((-1).into(), 2.into())))
        );
        // n1 = 4: F_5 = 5 and τ(10) = α^5 F_5
        assert!(tau_in_alpha_y(10, &BigInt::from(5)).is_some());
        assert_eq!(tau_in_alpha_y(7, &BigInt::from(3)), None);
        assert_eq!(tau_in_alpha_y(6, &BigInt::from(3)), None);
    }

    #[test]
    fn verify_examples() {
        assert!(verify_solution(7, 4, 4, &BigInt::from(2)));
        assert!(verify_solution(9, 3, 2, &BigInt::from(6)));
        assert!(!verify_solution(5, 3, 2, &BigInt::from(3)));
    }

    #[test]
    fn instance_six_three() {
        let r = solve_instance(6, 3, &BigInt::zero(), &SolveOptions::default()).unwrap();
        assert_eq!(r.y, BigInt::from(10));
        assert_eq!(triples(&r.solutions), vec![(6, 3, 1), (16, 7, 3)]);
    }

    #[test]
    fn instance_four_two() {
        let r = solve_instance(4, 2, &BigInt::zero(), &SolveOptions::default()).unwrap();
        assert_eq!((r.y.clone(), r.a1), (BigInt::from(2), 2));
        assert_eq!(triples(&r.solutions), vec![(4, 2, 2), (5, 4, 3), (7, 4, 4)]);
        assert!(r.special_cases.iter().any(|s| s.starts_with("step-v:t=6")));
    }

    #[test]
    fn instance_five_three() {
        let r = solve_instance(5, 3, &BigInt::zero(), &SolveOptions::default()).unwrap();
        assert_eq!(triples(&r.solutions), vec![(5, 3, 1)]);
    }
}
