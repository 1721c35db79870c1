//! Exact arithmetic in Q(√5), Fibonacci and Lucas numbers, Zeckendorf
//! expansions, heights and perfect-power decomposition.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arbreal::{self, memoize, refine_from, ArbResult, CertifiedReal};

/// `a + b√5` with rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadElement {
    a: BigRational,
    b: BigRational,
}

fn rat(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

impl QuadElement {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        QuadElement { a, b }
    }

    pub fn from_ints(a: i64, b: i64) -> Self {
        Self::new(rat(a), rat(b))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Self::new(r, BigRational::zero())
    }

    pub fn zero() -> Self {
        Self::from_ints(0, 0)
    }

    pub fn one() -> Self {
        Self::from_ints(1, 0)
    }

    pub fn sqrt5() -> Self {
        Self::from_ints(0, 1)
    }

    /// The golden ratio `(1 + √5)/2`.
    pub fn alpha() -> Self {
        Self::new(BigRational::new(1.into(), 2.into()), BigRational::new(1.into(), 2.into()))
    }

    pub fn beta() -> Self {
        Self::new(BigRational::new(1.into(), 2.into()), BigRational::new((-1).into(), 2.into()))
    }

    pub fn a(&self) -> &BigRational {
        &self.a
    }

    pub fn b(&self) -> &BigRational {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.a.clone(), -&self.b)
    }

    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - rat(5) * &self.b * &self.b
    }

    pub fn trace(&self) -> BigRational {
        &self.a * rat(2)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(&self.a + &o.a, &self.b + &o.b)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(&self.a - &o.a, &self.b - &o.b)
    }

    pub fn neg(&self) -> Self {
        Self::new(-&self.a, -&self.b)
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(
            &self.a * &o.a + rat(5) * &self.b * &o.b,
            &self.a * &o.b + &self.b * &o.a,
        )
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Self::new(&self.a * r, &self.b * r)
    }

    pub fn inv(&self) -> Option<Self> {
        let n = self.norm();
        if n.is_zero() {
            return None;
        }
        Some(self.conj().scale(&(BigRational::one() / n)))
    }

    pub fn div(&self, o: &Self) -> Option<Self> {
        o.inv().map(|i| self.mul(&i))
    }

    pub fn pow(&self, e: u64) -> Self {
        let mut result = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Integer power allowing negative exponents; `None` for `0^-k`.
    pub fn powi(&self, e: i64) -> Option<Self> {
        if e >= 0 {
            Some(self.pow(e as u64))
        } else {
            self.inv().map(|i| i.pow(e.unsigned_abs()))
        }
    }

    /// Real embedding `a + b√5` as a ball.
    pub fn to_real(&self, bits: u32) -> CertifiedReal {
        let a = CertifiedReal::from_rational(&self.a, bits + 8);
        let b = CertifiedReal::from_rational(&self.b, bits + 8);
        a.add(&b.mul(&sqrt5_real(bits + 8))).with_bits(bits)
    }

    /// True if both coordinates are integers or both are halves of integers
    /// of equal parity, i.e. the element lies in Z[α].
    pub fn is_integral(&self) -> bool {
        let two = rat(2);
        let ta = &self.a * &two;
        let tb = &self.b * &two;
        if !ta.is_integer() || !tb.is_integer() {
            return false;
        }
        (ta.to_integer() - tb.to_integer()).is_even()
    }
}

impl fmt::Display for QuadElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}*sqrt5", self.a, self.b)
    }
}

/// `F_n` by fast doubling.
pub fn fibonacci(n: u64) -> BigInt {
    fib_pair(n).0
}

/// `(F_n, F_{n+1})`.
fn fib_pair(n: u64) -> (BigInt, BigInt) {
    if n == 0 {
        return (BigInt::zero(), BigInt::one());
    }
    let (f, g) = fib_pair(n >> 1);
    // F_2k = F_k (2F_{k+1} - F_k), F_{2k+1} = F_k^2 + F_{k+1}^2
    let c = &f * (&g * 2 - &f);
    let d = &f * &f + &g * &g;
    if n & 1 == 0 {
        (c, d)
    } else {
        let e = &c + &d;
        (d, e)
    }
}

pub fn lucas(n: u64) -> BigInt {
    let (f, g) = fib_pair(n);
    g * 2 - f
}

/// `τ(t) = (α^t + 1)/√5 = F_t/2 + (L_t + 2)/10 · √5`.
pub fn tau(t: u64) -> QuadElement {
    assert!(t >= 1, "tau needs t >= 1");
    QuadElement::new(
        BigRational::new(fibonacci(t), 2.into()),
        BigRational::new(lucas(t) + 2, 10.into()),
    )
}

/// `N(τ(t)) = -(L_t + (-1)^t + 1)/5`.
///
/// The conjugate of `√5` is `-√5`, which supplies the leading sign. The
/// value is an integer exactly when `5 | L_t + (-1)^t + 1`.
pub fn tau_norm(t: u64) -> BigRational {
    let sign = if t % 2 == 0 { 1 } else { -1 };
    let num: BigInt = lucas(t) + sign + 1;
    -BigRational::new(num, 5.into())
}

pub fn norm(x: &QuadElement) -> BigRational {
    x.norm()
}

// ---------------------------------------------------------------------------
// real constants

pub fn sqrt5_real(bits: u32) -> CertifiedReal {
    memoize("sqrt5", 0, bits, || {
        CertifiedReal::from_int(5, bits).sqrt().expect("sqrt 5")
    })
}

pub fn alpha_real(bits: u32) -> CertifiedReal {
    memoize("alpha", 0, bits, || {
        let s = sqrt5_real(bits + 4);
        s.add(&CertifiedReal::from_int(1, bits + 4))
            .div_int(&BigInt::from(2))
            .with_bits(bits)
    })
}

pub fn log_alpha(bits: u32) -> CertifiedReal {
    memoize("log_alpha", 0, bits, || {
        alpha_real(bits + 16).ln().expect("log alpha").with_bits(bits)
    })
}

pub fn log_sqrt5(bits: u32) -> CertifiedReal {
    memoize("log_sqrt5", 0, bits, || {
        arbreal::log_rational(5, 1, bits + 4)
            .expect("log 5")
            .div_int(&BigInt::from(2))
            .with_bits(bits)
    })
}

/// `log τ(t) = t log α - log √5 + log(1 + α^-t)`.
pub fn log_tau(t: u64, bits: u32) -> CertifiedReal {
    assert!(t >= 1);
    memoize("log_tau", t, bits, || {
        let w = bits + 32;
        let inv_alpha = alpha_real(w).sub(&CertifiedReal::from_int(1, w));
        let small = inv_alpha.pow(t as u32);
        let corr = small.add(&CertifiedReal::from_int(1, w)).ln().expect("log(1+x)");
        log_alpha(w)
            .mul_int(&BigInt::from(t))
            .sub(&log_sqrt5(w))
            .add(&corr)
            .with_bits(bits)
    })
}

/// `log y` for an integer `y >= 1`, cached.
pub fn log_int(y: &BigInt, bits: u32) -> CertifiedReal {
    match y.to_u64() {
        Some(v) => memoize("log_int", v, bits, || {
            arbreal::log_rational(y.clone(), 1, bits).expect("log of positive integer")
        }),
        None => arbreal::log_rational(y.clone(), 1, bits).expect("log of positive integer"),
    }
}

// ---------------------------------------------------------------------------
// heights

/// `max(0, log |x|)` for a ball `x` that is certainly nonzero.
fn log_plus_abs(x: &CertifiedReal) -> ArbResult<CertifiedReal> {
    let bits = x.bits();
    let ax = x.abs();
    if !ax.is_positive() {
        return Err(arbreal::ArbError::PrecisionExhausted { bits });
    }
    if ax.upper() <= BigRational::one() {
        return Ok(CertifiedReal::zero(bits));
    }
    let l = ax.ln()?;
    Ok(l.max(&CertifiedReal::zero(bits)))
}

/// Absolute logarithmic Weil height of a nonzero element.
pub fn weil_height(x: &QuadElement, bits: u32) -> ArbResult<CertifiedReal> {
    assert!(!x.is_zero(), "height of zero");
    if x.is_rational() {
        let n = x.a.numer().abs();
        let d = x.a.denom().abs();
        return arbreal::log_rational(n.max(d), 1, bits);
    }
    // content-cleared minimal polynomial L X^2 - L·2a X + L·(a^2 - 5b^2)
    let c1 = -x.trace();
    let c0 = x.norm();
    let l = c1.denom().lcm(c0.denom());
    let coeffs = [
        l.clone(),
        (c1 * rat(l.clone())).to_integer(),
        (c0 * rat(l.clone())).to_integer(),
    ];
    let g = coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    let lead = &coeffs[0] / g;
    let w = bits + 16;
    let r1 = x.to_real(w);
    let r2 = x.conj().to_real(w);
    let s = arbreal::log_rational(lead, 1, w)?
        .add(&log_plus_abs(&r1)?)
        .add(&log_plus_abs(&r2)?);
    Ok(s.div_int(&BigInt::from(2)).with_bits(bits))
}

/// `h'(x) = max{D h(x), |log x|, 0.16}` with ambient degree `d`.
pub fn modified_height_deg(x: &QuadElement, d: u32, bits: u32) -> ArbResult<CertifiedReal> {
    let h = weil_height(x, bits)?.mul_int(&BigInt::from(d));
    let lx = x.to_real(bits).abs().ln()?.abs();
    Ok(h.max(&lx).max(&CertifiedReal::from_ratio(16, 100, bits)))
}

/// `h'` in Q(√5) (degree 2).
pub fn modified_height(x: &QuadElement, bits: u32) -> ArbResult<CertifiedReal> {
    modified_height_deg(x, 2, bits)
}

/// The closed-form upper bound `t log α + 1.29` for `h'(τ(t))`.
pub fn tau_height_bound(t: u64, bits: u32) -> CertifiedReal {
    log_alpha(bits)
        .mul_int(&BigInt::from(t))
        .add(&CertifiedReal::from_ratio(129, 100, bits))
}

// ---------------------------------------------------------------------------
// combinatorics

/// Greedy Zeckendorf indices (all `>= 2`, gaps `> 1`), ascending.
pub fn zeckendorf(n: &BigInt) -> Vec<u64> {
    assert!(n.is_positive(), "zeckendorf needs N >= 1");
    let mut fibs = vec![BigInt::zero(), BigInt::one()];
    while fibs.last().unwrap() <= n {
        let k = fibs.len();
        let next = &fibs[k - 1] + &fibs[k - 2];
        fibs.push(next);
    }
    let mut rest = n.clone();
    let mut out = Vec::new();
    let mut i = fibs.len() - 1;
    while rest.is_positive() {
        while fibs[i] > rest {
            i -= 1;
        }
        out.push(i as u64);
        rest -= &fibs[i];
        i = i.saturating_sub(2);
    }
    out.reverse();
    out
}

fn small_primes_upto(n: u64) -> Vec<u64> {
    (2..=n)
        .filter(|&k| (2..).take_while(|d| d * d <= k).all(|d| k % d != 0))
        .collect()
}

/// `(y, a)` with `y^a = N` and `a` maximal.
pub fn perfect_power_decompose(n: &BigInt) -> (BigInt, u32) {
    assert!(n >= &BigInt::from(2), "perfect_power_decompose needs N >= 2");
    let mut y = n.clone();
    let mut a: u32 = 1;
    let primes = small_primes_upto(n.bits().max(2));
    for &k in &primes {
        let k = k as u32;
        loop {
            if (y.bits() as u32) < k {
                break;
            }
            let r = y.nth_root(k);
            if r > BigInt::one() && num_traits::pow(r.clone(), k as usize) == y {
                y = r;
                a *= k;
            } else {
                break;
            }
        }
    }
    (y, a)
}

/// Certifies `0.38 α^n < F_n < 0.48 α^n`.
pub fn binet_bounds_check(n: u64) -> ArbResult<bool> {
    assert!(n > 1);
    let fib = fibonacci(n);
    let start = (n as u32).saturating_add(128).max(256);
    refine_from(start, |bits| {
        let an = alpha_real(bits).pow(n as u32);
        let f = CertifiedReal::from_int(fib.clone(), bits);
        let lo = an.mul(&CertifiedReal::from_ratio(38, 100, bits));
        let hi = an.mul(&CertifiedReal::from_ratio(48, 100, bits));
        Ok(lo.lt(&f)? && f.lt(&hi)?)
    })
}

/// A verified solution `F_n + F_m = y^a`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SolutionTriple {
    pub n: u64,
    pub m: u64,
    pub a: u32,
    #[serde(with = "bigint_string")]
    pub y: BigInt,
}

impl SolutionTriple {
    /// Checks `n > m > 1`, `a > 0`, `y > 1` and the identity itself.
    pub fn verify(&self) -> bool {
        self.n > self.m
            && self.m > 1
            && self.a > 0
            && self.y > BigInt::one()
            && fibonacci(self.n) + fibonacci(self.m) == num_traits::pow(self.y.clone(), self.a as usize)
    }
}

impl fmt::Display for SolutionTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.n, self.m, self.a)
    }
}

/// Serde adapter storing big integers as decimal strings.
pub mod bigint_string {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}
