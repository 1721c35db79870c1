//! Iterated reduction of the absolute bounds.

use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::arbreal::CertifiedReal;
use crate::error::{FibpowError, Result};
use crate::independence::{find_dependence, special_tau_log, Generator, PRIMITIVE_DIVISOR_CUTOFF};
use crate::linforms::{log_3_11, BOUND_BITS};
use crate::quadfield::{log_alpha, log_sqrt5, log_tau};
use crate::reduction::{cf_gap_bound, ApproxLattice, ConvergentTable};

use super::bounds::{
    close_lambda2, close_lambda2_y2, derive_two_solution_bounds, lambda5_matveev_coefficient, logy_from_n1,
    opt_min, round_up_micro, seven_tenths, BoundState,
};

/// Choices for the reduction passes.
#[derive(Clone, Debug)]
pub struct CascadeOptions {
    pub passes: usize,
    /// `C` for the first sweep over `Λ4`; the rule in [`lattice_scale`] otherwise.
    pub first_lambda4_c: Option<BigInt>,
    /// `C` for the first sweep over pairs.
    pub first_pair_c: Option<BigInt>,
}

impl Default for CascadeOptions {
    fn default() -> Self {
        CascadeOptions {
            passes: 3,
            first_lambda4_c: Some(BigInt::from(10).pow(467)),
            first_pair_c: Some(BigInt::from(10).pow(200)),
        }
    }
}

/// `C = 10^(k d + 3)` where `d` is the number of digits of the largest `X_i`.
pub fn lattice_scale(k: usize, x: &[BigInt]) -> BigInt {
    let d = x.iter().map(|v| v.to_string().len()).max().unwrap_or(1);
    BigInt::from(10).pow((k * d + 3) as u32)
}

fn lit(p: i64, q: i64) -> CertifiedReal {
    CertifiedReal::from_ratio(p, q, BOUND_BITS)
}

/// Expansion of `mu` far enough for denominators up to `q_max`.
pub fn table_for(mu: impl Fn(u32) -> CertifiedReal, q_max: &BigInt) -> Result<ConvergentTable> {
    let start = (2 * q_max.bits() as u32 + 128).max(256);
    crate::reduction::cf::expand_until(start, mu, q_max)
}

/// `H` from `|q μ - p| < (c / log α) α^{-H}` with `|q| <= q_max`; the case
/// `q = 0` gives a smaller bound.
pub fn cf_bound_from_table(table: &ConvergentTable, q_max: &BigInt, c: &CertifiedReal) -> Result<BigInt> {
    let g = cf_gap_bound(table, q_max)?;
    let la = log_alpha(BOUND_BITS);
    let inv_gap = CertifiedReal::from_int((&g.max_quotient + 2u32) * &g.q, BOUND_BITS);
    let h = c.mul(&inv_gap).div(&la)?.ln()?.div(&la)?;
    Ok(h.floor_upper().max(BigInt::zero()))
}

fn cf_bound(mu: impl Fn(u32) -> CertifiedReal, q_max: &BigInt, c: &CertifiedReal) -> Result<BigInt> {
    cf_bound_from_table(&table_for(mu, q_max)?, q_max, c)
}

/// `H` from `0 < |k| log α < c α^{-H}`.
fn integral_bound(c: &CertifiedReal) -> Result<BigInt> {
    let la = log_alpha(BOUND_BITS);
    Ok(c.div(&la)?.ln()?.div(&la)?.floor_upper().max(BigInt::zero()))
}

fn sqrt5_over_alpha(bits: u32) -> CertifiedReal {
    log_sqrt5(bits).div(&log_alpha(bits)).expect("log alpha is positive")
}

fn tau_over_alpha(t: u64) -> impl Fn(u32) -> CertifiedReal {
    move |bits| log_tau(t, bits).div(&log_alpha(bits)).expect("log alpha is positive")
}

/// Number of `10^5` steps for `C` in the sweeps. Pairs `(1, l)` and
/// `(10, l)` come within `α^{-l}` of a relation and need `C` far above the
/// default before the lattice separates them.
pub const SWEEP_ESCALATIONS: u32 = 30;

/// Reduces one lattice against several coefficient boxes at once, raising
/// `C` until every box yields a bound.
fn reduce_boxes(
    eta: &(dyn Fn(usize, u32) -> CertifiedReal + Sync),
    c: &BigInt,
    boxes: &[(Vec<BigInt>, CertifiedReal)],
) -> Result<Vec<BigInt>> {
    let la = log_alpha(BOUND_BITS);
    let mut c = c.clone();
    for _ in 0..=SWEEP_ESCALATIONS {
        let lat = ApproxLattice::build(eta, 3, true, &c)?;
        let mut out = Vec::with_capacity(boxes.len());
        for (x, c3) in boxes {
            match lat.bound(x, c3, &la)? {
                Some(h) => out.push(h),
                None => break,
            }
        }
        if out.len() == boxes.len() {
            return Ok(out);
        }
        c *= BigInt::from(10).pow(5);
    }
    Err(FibpowError::ReductionFailed("distance bound below threshold".into()))
}

/// `min{n1 - m1, n2 - m2}` from `|(a2 - a1) log √5 - Δ log α| < 2.85 n2 α^{-d}`.
pub fn min_gap_bound(n2: &BigInt) -> Result<BigInt> {
    let q = seven_tenths(n2);
    let c = lit(285, 100).mul_int(n2);
    Ok(cf_bound(sqrt5_over_alpha, &q, &c)?.max(BigInt::from(2)))
}

/// Bounds from the three-term forms in `log α`, `log √5`, `log τ(t)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Lambda4Bounds {
    /// `n2 - m2` when the `a1` term dominates.
    pub d2: BigInt,
    /// `n1` when the `a2` term dominates.
    pub n1: BigInt,
    /// `n1 - m1` in the other branch.
    pub d1: BigInt,
}

impl Lambda4Bounds {
    fn max(self, o: Lambda4Bounds) -> Lambda4Bounds {
        Lambda4Bounds { d2: self.d2.max(o.d2), n1: self.n1.max(o.n1), d1: self.d1.max(o.d1) }
    }
}

/// Coefficient boxes `(X, c_3)` for the three cases, in the order
/// `d2`, `n1`, `d1`.
fn lambda4_boxes(n1: &BigInt, n2: &BigInt) -> [(Vec<BigInt>, CertifiedReal); 3] {
    let a1 = seven_tenths(n1);
    let a2 = seven_tenths(n2);
    let delta = seven_tenths(&(n1 * n2));
    [
        (vec![delta.clone(), a1.clone(), a2.clone()], lit(406, 100).mul_int(&a1)),
        (vec![delta.clone(), a1.clone(), a2.clone()], lit(22, 10).mul_int(&a2)),
        (vec![delta, a2.clone(), a1], lit(406, 100).mul_int(&a2)),
    ]
}

/// Bounds for one `t`. Indices with `τ(t)` dependent on `α`, `√5` fall
/// back to continued fractions.
pub fn lambda4_for(t: u64, n1: &BigInt, n2: &BigInt, c: &BigInt, table: &ConvergentTable) -> Result<Lambda4Bounds> {
    let boxes = lambda4_boxes(n1, n2);
    let h = match special_tau_log(t) {
        Some((_, v)) => {
            let v = BigInt::from(v.abs());
            let mut h = Vec::new();
            for (x, c3) in &boxes {
                h.push(cf_bound_from_table(table, &(&x[1] + &v * &x[2]), c3)?);
            }
            h
        }
        None => {
            let eta = move |i: usize, bits: u32| match i {
                1 => log_alpha(bits),
                2 => log_sqrt5(bits),
                _ => log_tau(t, bits),
            };
            reduce_boxes(&eta, c, &boxes).map_err(|e| context(e, &format!("lambda4 t = {t}")))?
        }
    };
    Ok(Lambda4Bounds { d2: h[0].clone(), n1: h[1].clone(), d1: h[2].clone() })
}

/// Sweep over `1 <= t <= d`.
pub fn lambda4_sweep(d: u64, n1: &BigInt, n2: &BigInt, c: &BigInt) -> Result<Lambda4Bounds> {
    let boxes = lambda4_boxes(n1, n2);
    let q_max = boxes.iter().map(|(x, _)| &x[1] + BigInt::from(2) * &x[2]).max().unwrap();
    let table = table_for(sqrt5_over_alpha, &q_max)?;
    (1..=d)
        .into_par_iter()
        .map(|t| lambda4_for(t, n1, n2, c, &table))
        .try_reduce(Lambda4Bounds::default, |a, b| Ok(a.max(b)))
}

/// Shape of the form `Δ log α - a1 log τ(t1) + a2 log τ(t2)` for a pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PairCase {
    /// Three independent logarithms.
    Lattice,
    /// Two logarithms `log α`, `log τ(t)`; coefficient of `log τ(t)` bounded
    /// by `mult · X`.
    TauRatio { t: u64, mult: u32 },
    /// Two logarithms `log α`, `log √5`.
    Sqrt5Ratio { mult: u32 },
    /// Only `log α` survives.
    Integral,
}

/// Classifies an unordered pair `s <= l`.
pub fn pair_case(s: u64, l: u64) -> Result<PairCase> {
    debug_assert!(s <= l);
    Ok(match (s, l) {
        (2, 2) => PairCase::Integral,
        (2, t) | (t, 2) => PairCase::TauRatio { t, mult: 1 },
        (s, l) if s == l => PairCase::TauRatio { t: s, mult: 1 },
        (1, 10) => PairCase::Sqrt5Ratio { mult: 3 },
        (s, l) if l <= PRIMITIVE_DIVISOR_CUTOFF => {
            let gens = [Generator::Alpha, Generator::Tau(s), Generator::Tau(l)];
            if crate::independence::independent(&gens) {
                PairCase::Lattice
            } else {
                return Err(FibpowError::StageFailed {
                    stage: "pairs".into(),
                    detail: format!("unexpected relation for ({s}, {l}): {:?}", find_dependence(&[s, l])),
                });
            }
        }
        _ => PairCase::Lattice,
    })
}

/// `n1` bound for one pair with `a1, a2 <= x` and `|Δ| <= x_delta`.
pub fn pair_bound(s: u64, l: u64, x: &BigInt, x_delta: &BigInt, c: &BigInt) -> Result<BigInt> {
    let c3 = lit(22, 10).mul_int(x);
    match pair_case(s, l)? {
        PairCase::Integral => integral_bound(&c3),
        PairCase::TauRatio { t, mult } => cf_bound(tau_over_alpha(t), &(x * mult), &c3),
        PairCase::Sqrt5Ratio { mult } => cf_bound(sqrt5_over_alpha, &(x * mult), &c3),
        PairCase::Lattice => {
            let eta = move |i: usize, bits: u32| match i {
                1 => log_tau(s, bits),
                2 => log_tau(l, bits),
                _ => log_alpha(bits),
            };
            let boxes = [(vec![x.clone(), x.clone(), x_delta.clone()], c3)];
            Ok(reduce_boxes(&eta, c, &boxes).map_err(|e| context(e, &format!("pair ({s}, {l})")))?.remove(0))
        }
    }
}

/// Largest `n1` bound per kind of pair form.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PairBounds {
    pub lattice: BigInt,
    pub tau_ratio: BigInt,
    pub sqrt5_ratio: BigInt,
    pub integral: BigInt,
}

impl PairBounds {
    fn record(mut self, case: &PairCase, h: BigInt) -> PairBounds {
        let slot = match case {
            PairCase::Lattice => &mut self.lattice,
            PairCase::TauRatio { .. } => &mut self.tau_ratio,
            PairCase::Sqrt5Ratio { .. } => &mut self.sqrt5_ratio,
            PairCase::Integral => &mut self.integral,
        };
        if h > *slot {
            *slot = h;
        }
        self
    }

    fn max(self, o: PairBounds) -> PairBounds {
        PairBounds {
            lattice: self.lattice.max(o.lattice),
            tau_ratio: self.tau_ratio.max(o.tau_ratio),
            sqrt5_ratio: self.sqrt5_ratio.max(o.sqrt5_ratio),
            integral: self.integral.max(o.integral),
        }
    }

    pub fn overall(&self) -> BigInt {
        [&self.lattice, &self.tau_ratio, &self.sqrt5_ratio, &self.integral].into_iter().max().unwrap().clone()
    }
}

/// Sweep over pairs `s <= l` with `s <= d_small`, `l <= d_large`.
pub fn pair_sweep(d_small: u64, d_large: u64, n1: &BigInt, n2: &BigInt, c: &BigInt) -> Result<PairBounds> {
    let x = seven_tenths(n2);
    let x_delta = seven_tenths(&(n1 * n2));
    let pairs: Vec<(u64, u64)> =
        (1..=d_small).flat_map(|s| (s..=d_large.max(s)).map(move |l| (s, l))).collect();
    log::info!("pair sweep over {} pairs", pairs.len());
    pairs
        .into_par_iter()
        .map(|(s, l)| Ok(PairBounds::default().record(&pair_case(s, l)?, pair_bound(s, l, &x, &x_delta, c)?)))
        .try_reduce(PairBounds::default, |a, b| Ok(a.max(b)))
}

fn context(e: FibpowError, what: &str) -> FibpowError {
    match e {
        FibpowError::ReductionFailed(d) => FibpowError::ReductionFailed(format!("{what}: {d}")),
        other => other,
    }
}

fn u64_of(v: &BigInt, what: &str) -> Result<u64> {
    u64::try_from(v).map_err(|_| FibpowError::StageFailed {
        stage: what.into(),
        detail: format!("bound {v} too large to sweep"),
    })
}

/// One reduction pass; `pass` counts from 1.
pub fn reduction_pass(st: &mut BoundState, pass: usize, opts: &CascadeOptions) -> Result<()> {
    let tag = |s: &str| format!("pass{pass}/{s}");
    let n2 = st.n2_max.clone();
    let n1 = st.n1_max.clone().ok_or_else(|| FibpowError::StageFailed {
        stage: tag("start"),
        detail: "no bound on n1".into(),
    })?;
    let clock = Instant::now();

    let dmin = opt_min(&st.d_min_max, min_gap_bound(&n2)?);
    st.push_int(&tag("d-min"), "min{n1-m1, n2-m2}", &dmin);
    st.d_min_max = Some(dmin.clone());

    let boxes = lambda4_boxes(&n1, &n2);
    let c4 = match (&opts.first_lambda4_c, pass) {
        (Some(c), 1) => c.clone(),
        _ => lattice_scale(3, &boxes[0].0),
    };
    let b4 = lambda4_sweep(u64_of(&dmin, &tag("lambda4"))?, &n1, &n2, &c4)?;
    let d2 = opt_min(&st.d2_max, b4.d2.clone().max(dmin.clone()));
    let d1 = opt_min(&st.d1_max, b4.d1.clone().max(dmin.clone()));
    let dmax = opt_min(&st.dmax_max, d1.clone().max(d2.clone()));
    let n1_alt = opt_min(&st.n1_alt, b4.n1.clone());
    st.push_int(&tag("d2"), "n2-m2 when n1-m1 is the smaller gap", &b4.d2);
    st.push_int(&tag("n1-alt"), "n1 when the a2 term dominates", &b4.n1);
    st.push_int(&tag("d1"), "n1-m1 when n2-m2 is the smaller gap", &b4.d1);
    st.d2_max = Some(d2.clone());
    st.d1_max = Some(d1);
    st.dmax_max = Some(dmax.clone());
    st.n1_alt = Some(n1_alt.clone());
    log::info!("{} lambda4 done in {:?}", tag(""), clock.elapsed());

    let la = log_alpha(BOUND_BITS);
    if pass == 1 {
        // Matveev on the pair form, then on the single form
        let k6 = lambda5_matveev_coefficient(&dmax)?;
        st.push(&tag("n1-coefficient"), "n1 < k log(3.11 n2)", k6.to_sci(4));
        let alt = la.mul_int(&n1_alt);
        let ly = |n: &BigInt| -> Result<(CertifiedReal, CertifiedReal)> {
            let l = log_3_11(n, BOUND_BITS)?;
            Ok((k6.mul(&la).mul(&l).add(&alt), k6.mul(&la)))
        };
        let new_n2 = close_lambda2(&d2, &ly)?.min(n2.clone());
        let new_n1 = k6.mul(&log_3_11(&new_n2, BOUND_BITS)?).floor_upper().max(n1_alt.clone()).min(n1);
        finish_pass(st, pass, new_n1, new_n2, &d2)?;
    } else {
        let c5 = match (&opts.first_pair_c, pass) {
            (Some(c), 2) => c.clone(),
            _ => lattice_scale(3, &[seven_tenths(&(&n1 * &n2))]),
        };
        let b5 = pair_sweep(u64_of(&dmin, &tag("pairs"))?, u64_of(&dmax, &tag("pairs"))?, &n1, &n2, &c5)?;
        st.push_int(&tag("n1-lattice"), "n1 from pairs with three logarithms", &b5.lattice);
        st.push_int(&tag("n1-tau-ratio"), "n1 from pairs with log tau(t) and log alpha", &b5.tau_ratio);
        st.push_int(&tag("n1-sqrt5-ratio"), "n1 from the pair (1, 10)", &b5.sqrt5_ratio);
        st.push_int(&tag("n1-integral"), "n1 from the pair (2, 2)", &b5.integral);
        let b5 = b5.overall();
        st.push_int(&tag("n1-pairs"), "n1 from the pair forms", &b5);
        log::info!("{} pairs done in {:?}", tag(""), clock.elapsed());
        let new_n1 = b5.max(n1_alt).min(n1);
        let ly = logy_from_n1(&new_n1);
        let zero = CertifiedReal::zero(BOUND_BITS);
        let new_n2 = close_lambda2(&d2, &|_| Ok((ly.clone(), zero.clone())))?.min(n2);
        finish_pass(st, pass, new_n1, new_n2, &d2)?;
    }
    Ok(())
}

fn finish_pass(st: &mut BoundState, pass: usize, n1: BigInt, n2: BigInt, d2: &BigInt) -> Result<()> {
    let tag = |s: &str| format!("pass{pass}/{s}");
    let logy = round_up_micro(&logy_from_n1(&n1).upper());
    let n2_y2 = close_lambda2_y2(d2)?.min(st.n2_max_y2.clone());
    st.push_int(&tag("n1"), "n1 bound", &n1);
    st.push(&tag("log-y"), "log y bound", crate::arbreal::sci_of_rational(&logy, 6));
    st.push_int(&tag("n2"), "n2 bound", &n2);
    st.push_int(&tag("n2-y2"), "n2 bound for y = 2", &n2_y2);
    st.n1_max = Some(n1);
    st.logy_max = Some(logy);
    st.n2_max = n2;
    st.n2_max_y2 = n2_y2;
    Ok(())
}

/// Runs the initial bounds and `opts.passes` reduction passes.
pub fn global_reduction(opts: &CascadeOptions) -> Result<BoundState> {
    let mut st = derive_two_solution_bounds()?;
    for pass in 1..=opts.passes {
        reduction_pass(&mut st, pass, opts)?;
    }
    if st.n1_max.is_none() {
        st.n1_max = Some(BigInt::one());
    }
    Ok(st)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_cases() {
        assert_eq!(pair_case(2, 2).unwrap(), PairCase::Integral);
        assert_eq!(pair_case(2, 7).unwrap(), PairCase::TauRatio { t: 7, mult: 1 });
        assert_eq!(pair_case(5, 5).unwrap(), PairCase::TauRatio { t: 5, mult: 1 });
        assert_eq!(pair_case(1, 10).unwrap(), PairCase::Sqrt5Ratio { mult: 3 });
        for s in 1..=15u64 {
            for l in s..=15 {
                assert!(pair_case(s, l).is_ok(), "({s}, {l})");
            }
        }
    }

    #[test]
    #[ignore]
    fn timing() {
        let st = derive_two_solution_bounds().unwrap();
        for e in &st.trail {
            eprintln!("{} {}", e.stage, e.value);
        }
        let n1 = st.n1_max.clone().unwrap();
        let t0 = Instant::now();
        let d = min_gap_bound(&st.n2_max).unwrap();
        eprintln!("dmin {d} {:?}", t0.elapsed());
        let t0 = Instant::now();
        let b = lambda4_for(3, &n1, &st.n2_max, &BigInt::from(10).pow(467), &table_for(sqrt5_over_alpha, &BigInt::from(10).pow(120)).unwrap()).unwrap();
        eprintln!("t=3 {b:?} {:?}", t0.elapsed());
        let t0 = Instant::now();
        let x = BigInt::from(10).pow(35);
        let xd = BigInt::from(10).pow(54);
        for l in 20..30 {
            let h = pair_bound(17, l, &x, &xd, &BigInt::from(10).pow(200)).unwrap();
            eprintln!("pair {l} {h}");
        }
        eprintln!("10 pairs {:?}", t0.elapsed());
    }

    #[test]
    #[ignore]
    fn full_cascade() {
        let t0 = Instant::now();
        let opts = CascadeOptions::default();
        let mut st = derive_two_solution_bounds().unwrap();
        for pass in 1..=opts.passes {
            let k = st.trail.len();
            let r = reduction_pass(&mut st, pass, &opts);
            for e in &st.trail[k..] {
                eprintln!("{} {} [{:?}]", e.stage, e.value, t0.elapsed());
            }
            r.unwrap();
        }
        eprintln!("total {:?}", t0.elapsed());
    }
}
