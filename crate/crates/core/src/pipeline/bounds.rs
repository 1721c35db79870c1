//! Absolute bounds for a hypothetical `y` with two solutions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arbreal::{sci_of_rational, CertifiedReal};
use crate::error::Result;
use crate::linforms::{cascade_n2_bound, log_13_81, log_3_11, sublinear_fixed_point, BOUND_BITS};
use crate::quadfield::log_alpha;

/// Matveev's constant for three logarithms in a real quadratic field,
/// rounded up.
pub fn k3() -> CertifiedReal {
    CertifiedReal::from_int(726, BOUND_BITS).mul_int(&BigInt::from(10).pow(8))
}

/// Smallest `n_2` for which the gap bound from two logarithms applies
/// (`log n_2 >= 7.5`); below it there is nothing to prove.
pub const N2_THRESHOLD: u64 = 1809;

/// One line of the bound derivation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrailEntry {
    pub stage: String,
    pub note: String,
    /// Decimal rendering of the bound.
    pub value: String,
}

/// Everything known about a two-solution `y`. Bounds are inclusive.
#[derive(Clone, Debug, Default)]
pub struct BoundState {
    pub n2_max: BigInt,
    /// Separate bound for `y = 2`, where the three-term forms degenerate.
    pub n2_max_y2: BigInt,
    pub n1_max: Option<BigInt>,
    /// Upper bound for `log y`.
    pub logy_max: Option<BigRational>,
    pub d_min_max: Option<BigInt>,
    pub d1_max: Option<BigInt>,
    pub d2_max: Option<BigInt>,
    /// Bound for `max{n1 - m1, n2 - m2}`.
    pub dmax_max: Option<BigInt>,
    /// Bound for `n1` in the branch where the small-gap form is not used.
    pub n1_alt: Option<BigInt>,
    pub trail: Vec<TrailEntry>,
}

impl BoundState {
    pub fn push(&mut self, stage: &str, note: &str, value: String) {
        log::info!("{stage}: {value}");
        self.trail.push(TrailEntry { stage: stage.into(), note: note.into(), value });
    }

    pub fn push_int(&mut self, stage: &str, note: &str, v: &BigInt) {
        self.push(stage, note, v.to_string());
    }

    /// Last trail value with this stage tag.
    pub fn lookup(&self, stage: &str) -> Option<&str> {
        self.trail.iter().rev().find(|e| e.stage == stage).map(|e| e.value.as_str())
    }

    pub fn summary(&self) -> BoundSummary {
        let s = |v: &Option<BigInt>| v.as_ref().map(|x| x.to_string());
        BoundSummary {
            n2_max: self.n2_max.to_string(),
            n2_max_y2: self.n2_max_y2.to_string(),
            n1_max: s(&self.n1_max),
            logy_max: self.logy_max.as_ref().map(rational_decimal),
            d_min_max: s(&self.d_min_max),
            d1_max: s(&self.d1_max),
            d2_max: s(&self.d2_max),
            dmax_max: s(&self.dmax_max),
            n1_alt: s(&self.n1_alt),
            trail: self.trail.clone(),
        }
    }
}

/// Serializable view of a [`BoundState`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundSummary {
    pub n2_max: String,
    pub n2_max_y2: String,
    pub n1_max: Option<String>,
    pub logy_max: Option<String>,
    pub d_min_max: Option<String>,
    pub d1_max: Option<String>,
    pub d2_max: Option<String>,
    pub dmax_max: Option<String>,
    pub n1_alt: Option<String>,
    pub trail: Vec<TrailEntry>,
}

/// Rational rounded up to six decimals.
pub fn round_up_micro(x: &BigRational) -> BigRational {
    let m = BigInt::from(1_000_000);
    BigRational::new((x * BigRational::from(m.clone())).ceil().to_integer(), m)
}

fn rational_decimal(x: &BigRational) -> String {
    let m = BigInt::from(1_000_000);
    let v = (x * BigRational::from(m.clone())).ceil().to_integer();
    let (q, r) = (&v / &m, &v % &m);
    format!("{q}.{:06}", r)
}

fn sci(x: &CertifiedReal) -> String {
    sci_of_rational(&x.upper(), 4)
}

fn int(v: u64) -> BigInt {
    BigInt::from(v)
}

fn lit(p: i64, q: i64) -> CertifiedReal {
    CertifiedReal::from_ratio(p, q, BOUND_BITS)
}

/// `h'(τ(t)) <= t log α + 1.29` for a bound `t <= d`.
pub fn tau_height(d: &BigInt) -> CertifiedReal {
    log_alpha(BOUND_BITS).mul_int(d).add(&lit(129, 100))
}

/// Constants of the first, purely transcendental, stage.
#[derive(Clone, Debug)]
pub struct TwoSolutionConstants {
    /// `min{d1, d2} < k_min (log n2)^2`.
    pub k_min: CertifiedReal,
    /// `max{d1, d2} < k4 (log 3.11 n2)^3`, or `n1` below that.
    pub k4: CertifiedReal,
    /// `n1 < k5 (log 3.11 n2)^6`.
    pub k5: CertifiedReal,
}

/// The constants behind the unconditional bounds, assuming `n2 >= 1809`.
pub fn two_solution_constants() -> Result<TwoSolutionConstants> {
    let b = BOUND_BITS;
    let la = log_alpha(b);
    let l0 = log_3_11(&int(N2_THRESHOLD), b)?;
    let l0_sq = l0.mul(&l0);
    // Laurent: log|Λ3| > -510.37 (log n2)^2 - 1 and |Λ3| < 2.85 α^{-d} n2
    let log_285 = crate::arbreal::log_rational(285, 100, b)?;
    let k_min = lit(51037, 100)
        .add(&lit(2, 15))
        .add(&log_285.div(&lit(5625, 100))?)
        .div(&la)?;
    let h_tau_min = k_min.mul(&la).add(&lit(129, 100).div(&l0_sq)?);
    // Matveev with h'(α) = log α, h'(√5) = log 5, W0 < 2 log(3.11 n2)
    let log5 = crate::arbreal::log_rational(5, 1, b)?;
    let base = k3().mul(&la).mul(&log5);
    let k4 = base
        .mul(&h_tau_min)
        .mul_int(&int(2))
        .add(&l0_sq.recip()?)
        .div(&la)?;
    let h_tau_max = k4.mul(&la).add(&lit(129, 100).div(&l0_sq.mul(&l0))?);
    let k5 = k3()
        .mul(&la)
        .mul(&h_tau_min)
        .mul(&h_tau_max)
        .mul_int(&int(2))
        .add(&l0.pow(5).recip()?)
        .div(&la)?;
    Ok(TwoSolutionConstants { k_min, k4, k5 })
}

/// Unconditional bounds on `n2`, `n1` and `log y`.
pub fn derive_two_solution_bounds() -> Result<BoundState> {
    let b = BOUND_BITS;
    let mut st = BoundState::default();
    let k = two_solution_constants()?;
    st.push("initial/min-gap", "min{n1-m1, n2-m2} < k (log n2)^2", sci(&k.k_min));
    st.push("initial/max-gap", "max{n1-m1, n2-m2} < k (log 3.11 n2)^3", sci(&k.k4));
    st.push("initial/n1-coefficient", "n1 < k (log 3.11 n2)^6", sci(&k.k5));
    // y^a1 <= F_{n1+1} < α^{n1}
    let c_y = k.k5.mul(&log_alpha(b));
    let n2 = cascade_n2_bound(&c_y)?.max(int(N2_THRESHOLD));
    let l = log_3_11(&n2, b)?.pow(6);
    let n1 = k.k5.mul(&l).floor_upper();
    let logy = c_y.mul(&l);
    st.push_int("initial/n2", "n2 bound", &n2);
    st.push("initial/n1", "n1 bound", sci_of_rational(&BigRational::from(n1.clone()), 4));
    st.push("initial/log-y", "log y bound", sci(&logy));
    st.n2_max = n2.clone();
    st.n2_max_y2 = n2;
    st.n1_max = Some(n1);
    st.logy_max = Some(round_up_micro(&logy.upper()));
    Ok(st)
}

/// Upper bound for `log y` as a function of `n2`, with `n · d/dn` of it.
pub type LogYFn<'a> = &'a dyn Fn(&BigInt) -> Result<(CertifiedReal, CertifiedReal)>;

/// Least `N` with `n2 < N` forced by Matveev on
/// `m2 log α - a2 log y + log τ(n2 - m2)`:
/// `n2 log α - log 1.1 < K3 log α · 2 log y · h'(τ) · log(13.81 n2)`.
pub fn close_lambda2(d2_max: &BigInt, log_y: LogYFn<'_>) -> Result<BigInt> {
    let b = BOUND_BITS;
    let la = log_alpha(b);
    let coeff = k3().mul_int(&int(2)).mul(&tau_height(d2_max));
    let log11 = crate::arbreal::log_rational(11, 10, b)?;
    let n = sublinear_fixed_point(int(N2_THRESHOLD), |n| {
        let (ly, ly_slope) = log_y(n)?;
        let w = log_13_81(n, b)?;
        let g = coeff.mul(&ly).mul(&w).add(&log11.div(&la)?);
        let slope = coeff.mul(&ly_slope.mul(&w).add(&ly));
        Ok((g, slope))
    })?;
    Ok(n)
}

/// `n1 < k6 log(3.11 n2)` from Matveev on the form in `log α`, `τ(t1)`,
/// `τ(t2)` with both gaps at most `d`.
pub fn lambda5_matveev_coefficient(d: &BigInt) -> Result<CertifiedReal> {
    let la = log_alpha(BOUND_BITS);
    let h = tau_height(d);
    Ok(k3().mul(&la).mul(&h).mul(&h).mul_int(&int(2)).add(&CertifiedReal::from_int(1, BOUND_BITS)).div(&la)?)
}

/// `log y < n1 log α`.
pub fn logy_from_n1(n1: &BigInt) -> CertifiedReal {
    log_alpha(BOUND_BITS).mul_int(n1)
}

/// `n2` bound for `y = 2`, where `log y` is known exactly.
pub fn close_lambda2_y2(d2_max: &BigInt) -> Result<BigInt> {
    let l2 = crate::arbreal::ln2(BOUND_BITS);
    close_lambda2(d2_max, &|_| Ok((l2.clone(), CertifiedReal::zero(BOUND_BITS))))
}

/// The smaller of an existing bound and a new one.
pub fn opt_min(a: &Option<BigInt>, b: BigInt) -> BigInt {
    match a {
        Some(x) if x < &b => x.clone(),
        _ => b,
    }
}

/// `⌈0.7 x⌉`, the bound on an exponent `a` with `a < 0.7 n`.
pub fn seven_tenths(x: &BigInt) -> BigInt {
    let v = BigRational::new(x * 7, int(10));
    let c = v.ceil().to_integer();
    if c.is_zero() {
        BigInt::one()
    } else {
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_have_expected_size() {
        let k = two_solution_constants().unwrap();
        let kmin = k.k_min.upper();
        assert!(kmin > BigRational::from(int(1060)) && kmin < BigRational::from(int(1063)));
        let k4 = k.k4.upper();
        assert!(k4 < BigRational::from(int(125) * BigInt::from(10).pow(12)));
    }

    #[test]
    fn initial_bounds_are_finite() {
        let st = derive_two_solution_bounds().unwrap();
        assert!(st.n2_max.bits() < 400);
        assert!(st.n1_max.unwrap() < BigInt::from(10).pow(43));
    }
}
