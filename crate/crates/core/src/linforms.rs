//! Linear forms in logarithms and the lower bounds used against them.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::arbreal::{self, refine, refine_from, CertifiedReal};
use crate::error::{FibpowError, Result};
use crate::quadfield::{self, alpha_real, log_alpha, modified_height_deg, QuadElement};

/// Working precision for bound arithmetic; the constants involved are
/// small and the outputs are only ever compared against other bounds.
pub const BOUND_BITS: u32 = 256;

/// Term `b log γ` of a linear form, with `A >= h'(γ)`.
#[derive(Clone, Debug)]
pub struct Term {
    pub coeff: BigInt,
    pub base: QuadElement,
    pub height: CertifiedReal,
    pub log_value: CertifiedReal,
}

impl Term {
    /// Builds a term whose height is the modified height itself.
    pub fn auto(coeff: impl Into<BigInt>, base: QuadElement, degree: u32, bits: u32) -> Result<Self> {
        let height = modified_height_deg(&base, degree, bits)?;
        Self::with_height(coeff, base, height, bits)
    }

    /// Builds a term with a caller-supplied height bound `A`.
    pub fn with_height(
        coeff: impl Into<BigInt>,
        base: QuadElement,
        height: CertifiedReal,
        bits: u32,
    ) -> Result<Self> {
        if base.is_zero() || base == QuadElement::one() {
            return Err(FibpowError::InvalidArgument("base must differ from 0 and 1".into()));
        }
        let log_value = base.to_real(bits).abs().ln()?;
        Ok(Term { coeff: coeff.into(), base, height, log_value })
    }
}

/// `Λ = Σ b_i log γ_i` over a number field of degree `field_degree`.
#[derive(Clone, Debug)]
pub struct LinearForm {
    pub terms: Vec<Term>,
    pub field_degree: u32,
    pub real_field: bool,
}

impl LinearForm {
    pub fn new(field_degree: u32) -> Self {
        LinearForm { terms: Vec::new(), field_degree, real_field: true }
    }

    pub fn push(mut self, term: Term) -> Self {
        self.terms.push(term);
        self
    }

    /// Drops terms with zero coefficient.
    pub fn reduced(&self) -> Self {
        LinearForm {
            terms: self.terms.iter().filter(|t| !t.coeff.is_zero()).cloned().collect(),
            field_degree: self.field_degree,
            real_field: self.real_field,
        }
    }

    /// `B* = max |b_j|`.
    pub fn b_star(&self) -> BigInt {
        self.terms.iter().map(|t| t.coeff.abs()).max().unwrap_or_default()
    }

    /// Certified value of the form at the precision its logs were built with.
    pub fn value(&self) -> CertifiedReal {
        let bits = self.terms.first().map(|t| t.log_value.bits()).unwrap_or(BOUND_BITS);
        self.terms
            .iter()
            .fold(CertifiedReal::zero(bits), |acc, t| acc.add(&t.log_value.mul_int(&t.coeff)))
    }
}

fn e_real(bits: u32) -> CertifiedReal {
    CertifiedReal::from_int(1, bits).exp()
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::from(1), |acc, k| acc * k)
}

/// `log C(n, κ) + log max{1, n/6} + log C0 + 2 log D`: the logarithm of the
/// coefficient in front of `W0 Ω`.
fn matveev_log_coefficient(n: u32, kappa: u32, d: u32, bits: u32) -> Result<CertifiedReal> {
    let e = e_real(bits);
    let nn = CertifiedReal::from_int(n, bits);
    let dd = CertifiedReal::from_int(d, bits);
    // C(n, κ) = 16/(n! κ) e^n (2n+1+2κ)(n+2)(4(n+1))^{n+1}(en/2)^κ
    let mut c = CertifiedReal::from_int(16, bits)
        .div(&CertifiedReal::from_int(factorial(n) * kappa, bits))?
        .mul(&e.pow(n))
        .mul(&CertifiedReal::from_int(2 * n + 1 + 2 * kappa, bits))
        .mul(&CertifiedReal::from_int(n + 2, bits))
        .mul(&CertifiedReal::from_int(BigInt::from(4 * (n + 1)).pow(n + 1), bits));
    let en2 = e.mul(&nn).div_int(&BigInt::from(2));
    c = c.mul(&en2.pow(kappa));
    let c0 = c0_term(n, d, bits)?;
    let maxterm = if n > 6 { nn.div_int(&BigInt::from(6)) } else { CertifiedReal::from_int(1, bits) };
    let total = c.mul(&maxterm).mul(&c0).mul(&dd.mul(&dd));
    Ok(total.ln()?)
}

/// `C0 = log(e^{4.4n+7} n^{5.5} D^2 log(eD))`.
fn c0_term(n: u32, d: u32, bits: u32) -> Result<CertifiedReal> {
    let logn = arbreal::log_rational(n, 1, bits)?;
    let logd = arbreal::log_rational(d, 1, bits)?;
    let one = CertifiedReal::from_int(1, bits);
    Ok(CertifiedReal::from_ratio(44 * n as i64 + 70, 10, bits)
        .add(&logn.mul(&CertifiedReal::from_ratio(11, 2, bits)))
        .add(&logd.mul_int(&BigInt::from(2)))
        .add(&one.add(&logd).ln()?))
}

/// `log(1.5 e D log(eD))`, so that `W0 = this + log B`.
fn w0_offset(d: u32, bits: u32) -> Result<CertifiedReal> {
    let logd = arbreal::log_rational(d, 1, bits)?;
    let one = CertifiedReal::from_int(1, bits);
    Ok(arbreal::log_rational(3, 2, bits)?
        .add(&one)
        .add(&logd)
        .add(&one.add(&logd).ln()?))
}

/// The constant `K` with `log|Λ| >= -K W0 Ω` for `n` logarithms.
pub fn matveev_constant(n: u32, d: u32, real: bool) -> Result<CertifiedReal> {
    if !real {
        return Err(FibpowError::NonRealField);
    }
    Ok(matveev_log_coefficient(n, 1, d, BOUND_BITS)?.exp())
}

/// `1.5 e D log(eD)`, the factor `c` in `W0 = log(c B)`.
pub fn matveev_w0_factor(d: u32) -> Result<CertifiedReal> {
    Ok(w0_offset(d, BOUND_BITS)?.exp())
}

/// Matveev's lower bound for `log|Λ|` with `B = B*`.
pub fn matveev_lower_bound(form: &LinearForm) -> Result<CertifiedReal> {
    if !form.real_field {
        return Err(FibpowError::NonRealField);
    }
    let form = form.reduced();
    let n = form.terms.len() as u32;
    if n == 0 {
        return Err(FibpowError::InvalidArgument("empty linear form".into()));
    }
    let d = form.field_degree;
    let bits = BOUND_BITS;
    let k = matveev_constant(n, d, true)?;
    let b = form.b_star();
    let w0 = w0_offset(d, bits)?.add(&arbreal::log_rational(b, 1, bits)?);
    let omega = form
        .terms
        .iter()
        .fold(CertifiedReal::from_int(1, bits), |acc, t| acc.mul(&t.height.with_bits(bits)));
    Ok(k.mul(&w0).mul(&omega).neg())
}

/// Laurent's two-logarithm lower bound for `log|b2 log γ2 - b1 log γ1|`.
pub fn laurent_lower_bound(
    b1: &BigInt,
    b2: &BigInt,
    log_a1: &CertifiedReal,
    log_a2: &CertifiedReal,
    d: u32,
) -> Result<CertifiedReal> {
    if !b1.is_positive() || !b2.is_positive() {
        return Err(FibpowError::InvalidArgument("Laurent needs b1, b2 > 0".into()));
    }
    let bits = BOUND_BITS;
    let la1 = log_a1.with_bits(bits);
    let la2 = log_a2.with_bits(bits);
    let dd = CertifiedReal::from_int(d, bits);
    let b_prime = CertifiedReal::from_int(b1.clone(), bits)
        .div(&dd.mul(&la2))?
        .add(&CertifiedReal::from_int(b2.clone(), bits).div(&dd.mul(&la1))?);
    let first = b_prime.ln()?.add(&CertifiedReal::from_ratio(38, 100, bits));
    let m = laurent_max_term(&first, d, bits);
    Ok(laurent_from_max(&m, &la1, &la2, d))
}

/// `max{x, 30/D, 1}`.
pub fn laurent_max_term(x: &CertifiedReal, d: u32, bits: u32) -> CertifiedReal {
    x.max(&CertifiedReal::from_ratio(30, d, bits)).max(&CertifiedReal::from_int(1, bits))
}

/// `-17.9 D^4 m^2 log A1 log A2`.
pub fn laurent_from_max(m: &CertifiedReal, la1: &CertifiedReal, la2: &CertifiedReal, d: u32) -> CertifiedReal {
    let bits = m.bits();
    CertifiedReal::from_ratio(179, 10, bits)
        .mul_int(&BigInt::from(d).pow(4))
        .mul(&m.mul(m))
        .mul(la1)
        .mul(la2)
        .neg()
}

/// Which of the two single-solution linear forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LambdaKind {
    /// `n log α - a log y - log √5`
    L1,
    /// `m log α - a log y + log τ(n - m)`
    L2,
}

/// Explicit upper bound for `|Λ1| < 2.03 α^{m-n}` or `|Λ2| < 1.1 α^{-n}`.
pub fn lambda_upper_bound(kind: LambdaKind, n: u64, m: u64, bits: u32) -> Result<CertifiedReal> {
    if !(n > m && m > 1) {
        return Err(FibpowError::InvalidArgument("need n > m > 1".into()));
    }
    let inv_alpha = alpha_real(bits + 32).recip()?;
    let v = match kind {
        LambdaKind::L1 => {
            if n - m < 3 {
                return Err(FibpowError::InvalidArgument(
                    "first form needs n - m >= 3; use the second".into(),
                ));
            }
            CertifiedReal::from_ratio(203, 100, bits + 32).mul(&inv_alpha.pow((n - m) as u32))
        }
        LambdaKind::L2 => CertifiedReal::from_ratio(11, 10, bits + 32).mul(&inv_alpha.pow(n as u32)),
    };
    Ok(v.with_bits(bits))
}

/// `(0.26 α^{1-2n}, 1.01 α^{1-2n})`, the two-sided bounds on
/// `|(n-1) log α - a log y|` when `n - m = 2`.
pub fn lambda2_gap_two_bounds(n: u64, bits: u32) -> Result<(CertifiedReal, CertifiedReal)> {
    let w = bits + 32;
    let p = alpha_real(w).recip()?.pow((2 * n - 1) as u32);
    Ok((
        CertifiedReal::from_ratio(26, 100, w).mul(&p).with_bits(bits),
        CertifiedReal::from_ratio(101, 100, w).mul(&p).with_bits(bits),
    ))
}

/// Value of `Λ1` or `Λ2` for a concrete `(n, m, a, y)`.
pub fn lambda_value(kind: LambdaKind, n: u64, m: u64, a: u32, y: &BigInt, bits: u32) -> CertifiedReal {
    let la = log_alpha(bits);
    let ly = quadfield::log_int(y, bits).mul_int(&BigInt::from(a));
    match kind {
        LambdaKind::L1 => la.mul_int(&BigInt::from(n)).sub(&ly).sub(&quadfield::log_sqrt5(bits)),
        LambdaKind::L2 => la.mul_int(&BigInt::from(m)).sub(&ly).add(&quadfield::log_tau(n - m, bits)),
    }
}

// ---------------------------------------------------------------------------
// the single-solution bound

/// `3.4·10^22`, the leading constant of the single-solution bound.
pub fn bravo_luca_constant(bits: u32) -> CertifiedReal {
    CertifiedReal::from_int(BigInt::from(34) * BigInt::from(10).pow(21), bits)
}

/// `log(13.81 n)`.
pub(crate) fn log_13_81(n: &BigInt, bits: u32) -> Result<CertifiedReal> {
    Ok(arbreal::log_rational(n * 1381, 100, bits)?)
}

/// `n - m < 2.34·10^11 log y log(13.81 n)`.
pub fn bravo_luca_gap_bound(log_y: &CertifiedReal, n: &BigInt) -> Result<CertifiedReal> {
    let bits = BOUND_BITS;
    Ok(CertifiedReal::from_int(BigInt::from(234) * BigInt::from(10).pow(9), bits)
        .mul(&log_y.with_bits(bits))
        .mul(&log_13_81(n, bits)?))
}

/// Least-fixed-point search for `n < g(n)` where `g` is increasing and
/// eventually sublinear. Returns `N` with `N >= g(N)` and `g'(N) <= 1`
/// certified, so that `n < g(n)` fails for every `n >= N`.
///
/// `g` returns `(g(n), n g'(n))`; both must be certified upper bounds.
pub fn sublinear_fixed_point(
    start: BigInt,
    g: impl Fn(&BigInt) -> Result<(CertifiedReal, CertifiedReal)>,
) -> Result<BigInt> {
    let mut x = start;
    for _ in 0..200 {
        let (gx, _) = g(&x)?;
        let next: BigInt = gx.ceil_upper() + 1;
        if (&next - &x).abs() <= BigInt::from(1) {
            x = next.max(x);
            break;
        }
        x = next;
    }
    // walk up until the certificate holds
    loop {
        let (gx, slope) = g(&x)?;
        let xr = CertifiedReal::from_int(x.clone(), BOUND_BITS);
        if gx.lt(&xr).unwrap_or(false) && slope.lt(&xr).unwrap_or(false) {
            return Ok(x);
        }
        x = gx.ceil_upper().max(slope.ceil_upper()) + 1;
    }
}

/// Certified `N` such that no solution with fixed `y` has `n >= N`.
pub fn bravo_luca_n_bound(y: &BigInt) -> Result<BigInt> {
    if y < &BigInt::from(2) {
        return Err(FibpowError::InvalidArgument("y must be at least 2".into()));
    }
    let log_y = quadfield::log_int(y, BOUND_BITS);
    bravo_luca_n_bound_log(&log_y)
}

/// Same as [`bravo_luca_n_bound`] given a certified upper bound for `log y`.
pub fn bravo_luca_n_bound_log(log_y: &CertifiedReal) -> Result<BigInt> {
    let c = bravo_luca_constant(BOUND_BITS).mul(&log_y.mul(log_y));
    // g(n) = c L^2, n g'(n) = 2 c L with L = log(13.81 n)
    sublinear_fixed_point(BigInt::from(1000), |n| {
        let l = log_13_81(n, BOUND_BITS)?;
        Ok((c.mul(&l).mul(&l), c.mul(&l).mul_int(&BigInt::from(2))))
    })
}

/// `log(3.11 n)`.
pub(crate) fn log_3_11(n: &BigInt, bits: u32) -> Result<CertifiedReal> {
    Ok(arbreal::log_rational(n * 311, 100, bits)?)
}

/// The absolute bound obtained by feeding `log y < c_y (log(3.11 n))^6`
/// into the single-solution bound.
pub fn cascade_n2_bound(c_y: &CertifiedReal) -> Result<BigInt> {
    let k = bravo_luca_constant(BOUND_BITS).mul(&c_y.mul(c_y));
    sublinear_fixed_point(BigInt::from(10).pow(30), |n| {
        let l1 = log_3_11(n, BOUND_BITS)?;
        let l2 = log_13_81(n, BOUND_BITS)?;
        // g = k l1^12 l2^2; n g' = k (12 l1^11 l2^2 + 2 l1^12 l2)
        let l1_11 = l1.pow(11);
        let g = k.mul(&l1_11).mul(&l1).mul(&l2).mul(&l2);
        let slope = k
            .mul(&l1_11)
            .mul(&l2)
            .mul(&l2.mul_int(&BigInt::from(12)).add(&l1.mul_int(&BigInt::from(2))));
        Ok((g, slope))
    })
}

// ---------------------------------------------------------------------------
// constants quoted by the bounds, re-certified

/// A named inequality between explicit constants.
#[derive(Clone, Debug)]
pub struct ConstantCheck {
    pub name: &'static str,
    pub holds: bool,
}

/// Certifies every numerical constant the pipeline relies on.
pub fn verify_constants() -> Result<Vec<ConstantCheck>> {
    let mut out = Vec::new();
    let mut push = |name: &'static str, holds: bool| out.push(ConstantCheck { name, holds });
    let checks: Vec<(&'static str, Box<dyn Fn(u32) -> arbreal::ArbResult<bool>>)> = vec![
        ("0.38 < (1 - α^-4)/√5", Box::new(|b| {
            let ia = alpha_real(b).recip()?;
            let v = CertifiedReal::from_int(1, b).sub(&ia.pow(4)).div(&quadfield::sqrt5_real(b))?;
            CertifiedReal::from_ratio(38, 100, b).lt(&v)
        })),
        ("(1 + α^-6)/√5 < 0.48", Box::new(|b| {
            let ia = alpha_real(b).recip()?;
            let v = CertifiedReal::from_int(1, b).add(&ia.pow(6)).div(&quadfield::sqrt5_real(b))?;
            v.lt(&CertifiedReal::from_ratio(48, 100, b))
        })),
        ("0.48 (1 + α^-1) < 0.78", Box::new(|b| {
            let ia = alpha_real(b).recip()?;
            let v = CertifiedReal::from_ratio(48, 100, b).mul(&ia.add(&CertifiedReal::from_int(1, b)));
            v.lt(&CertifiedReal::from_ratio(78, 100, b))
        })),
        ("(1 + α^-6 + α^-5)/(0.38 √5) < 1.35", Box::new(|b| {
            let ia = alpha_real(b).recip()?;
            let v = CertifiedReal::from_int(1, b)
                .add(&ia.pow(6))
                .add(&ia.pow(5))
                .div(&CertifiedReal::from_ratio(38, 100, b).mul(&quadfield::sqrt5_real(b)))?;
            v.lt(&CertifiedReal::from_ratio(135, 100, b))
        })),
        ("1.35 α^-3 <= 0.5 and 1.5·1.35 < 2.03", Box::new(|b| {
            let ia = alpha_real(b).recip()?;
            let v = CertifiedReal::from_ratio(135, 100, b).mul(&ia.pow(3));
            Ok(v.lt(&CertifiedReal::from_ratio(1, 2, b))? && 135 * 15 < 2030)
        })),
        ("(α^-3 + α^-2)/(0.38 √5) < 0.73", Box::new(|b| {
            let ia = alpha_real(b).recip()?;
            let v = ia.pow(3).add(&ia.pow(2))
                .div(&CertifiedReal::from_ratio(38, 100, b).mul(&quadfield::sqrt5_real(b)))?;
            v.lt(&CertifiedReal::from_ratio(73, 100, b))
        })),
        ("0.73 α^-2 < 0.5 and 1.5·0.73 < 1.1", Box::new(|b| {
            let ia = alpha_real(b).recip()?;
            let v = CertifiedReal::from_ratio(73, 100, b).mul(&ia.pow(2));
            Ok(v.lt(&CertifiedReal::from_ratio(1, 2, b))? && 73 * 15 < 1100)
        })),
        ("|log(1 + x)| < 1.5 |x| for |x| < 1/2", Box::new(|b| {
            // the worst case is x = -1/2: log 2 < 0.75
            let l2 = arbreal::log_rational(2, 1, b)?;
            l2.lt(&CertifiedReal::from_ratio(3, 4, b))
        })),
        ("2·2.03·0.7 < 2.85", Box::new(|_| Ok(2 * 203 * 7 < 285 * 10))),
        ("4.06 = 2·2.03 and 2.2 = 2·1.1", Box::new(|_| Ok(2 * 203 == 406 && 2 * 11 == 22))),
        ("log 2.03 < 0.71", Box::new(|b| {
            arbreal::log_rational(203, 100, b)?.lt(&CertifiedReal::from_ratio(71, 100, b))
        })),
        ("log 1.1 < 0.1", Box::new(|b| {
            arbreal::log_rational(11, 10, b)?.lt(&CertifiedReal::from_ratio(1, 10, b))
        })),
        ("log α < 0.4813", Box::new(|b| {
            log_alpha(b).lt(&CertifiedReal::from_ratio(4813, 10000, b))
        })),
    ];
    for (name, f) in checks {
        let holds = refine(|b| f(b))?;
        push(name, holds);
    }
    let k3 = matveev_constant(3, 2, true)?;
    push("Matveev constant for three logarithms < 7.26e10", k3.lt(&CertifiedReal::from_int(726 * 10i64.pow(8), BOUND_BITS))?);
    let w = matveev_w0_factor(2)?;
    push("1.5 e D log(eD) < 13.81 for D = 2", w.lt(&CertifiedReal::from_ratio(1381, 100, BOUND_BITS))?);
    let two_k_log5 = CertifiedReal::from_int(2 * 726 * 10i64.pow(8), BOUND_BITS)
        .mul(&arbreal::log_rational(5, 1, BOUND_BITS)?);
    push("2·7.26e10·log 5 < 2.34e11", two_k_log5.lt(&CertifiedReal::from_int(234 * 10i64.pow(9), BOUND_BITS))?);
    push("2·7.26e10·2.34e11 < 3.4e22", BigInt::from(2 * 726) * BigInt::from(234) < BigInt::from(34) * BigInt::from(10).pow(4));
    Ok(out)
}

/// Upper bound on `log(1.5 e D log(eD) B)` for `D = 2` written as `log(13.81 B)`.
pub fn w0_d2(b: &BigInt) -> Result<CertifiedReal> {
    log_13_81(b, BOUND_BITS)
}

/// Start precision for checks involving `α^n`.
pub fn bits_for_power(n: u64) -> u32 {
    (n.to_u32().unwrap_or(u32::MAX / 2)).saturating_add(128).max(arbreal::START_BITS)
}

/// Ladder wrapper returning the crate error type.
pub fn ladder<T>(start: u32, f: impl FnMut(u32) -> arbreal::ArbResult<T>) -> Result<T> {
    Ok(refine_from(start, f)?)
}
