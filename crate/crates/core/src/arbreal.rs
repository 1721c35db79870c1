//! Midpoint-radius ("ball") arithmetic over fixed-point big integers.
//!
//! A [`CertifiedReal`] at precision `bits` stores integers `mid` and `rad` and
//! represents every real in `[(mid - rad) / 2^bits, (mid + rad) / 2^bits]`.
//! All operations return a ball that contains the exact image of every point
//! of the input balls. Decisions that cannot be made at the current precision
//! return [`ArbError::PrecisionExhausted`]; [`refine`] climbs the precision
//! ladder for callers that can recompute their inputs.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Extra bits carried internally by the transcendental kernels.
const GUARD_BITS: u32 = 64;

/// First rung of the precision ladder.
pub const START_BITS: u32 = 256;

/// Default ladder cap; overridden by `FIBPOW_MAX_BITS`.
pub const DEFAULT_MAX_BITS: u32 = 8192;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArbError {
    #[error("precision exhausted at {bits} bits")]
    PrecisionExhausted { bits: u32 },
    #[error("argument outside domain: {0}")]
    Domain(&'static str),
}

pub type ArbResult<T> = Result<T, ArbError>;

/// Precision cap for [`refine`], read from `FIBPOW_MAX_BITS`.
pub fn max_bits() -> u32 {
    std::env::var("FIBPOW_MAX_BITS")
        .ok()
        .and_then(|v| v.trim().parse::<u32>().ok())
        .filter(|&b| b >= 64)
        .unwrap_or(DEFAULT_MAX_BITS)
}

/// Runs `f` at 256, 512, ... bits until it stops reporting
/// `PrecisionExhausted` or the cap is passed.
pub fn refine<T>(f: impl FnMut(u32) -> ArbResult<T>) -> ArbResult<T> {
    refine_from(START_BITS, f)
}

pub fn refine_from<T>(start: u32, mut f: impl FnMut(u32) -> ArbResult<T>) -> ArbResult<T> {
    let cap = max_bits();
    let mut bits = start.max(64);
    loop {
        match f(bits) {
            Err(ArbError::PrecisionExhausted { .. }) if bits < cap => {
                bits = (bits * 2).min(cap);
            }
            other => return other,
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct CertifiedReal {
    mid: BigInt,
    rad: BigInt,
    bits: u32,
}

fn pow2(n: u32) -> BigInt {
    BigInt::one() << n
}

/// `ceil(x / 2^n)` for `x >= 0`.
fn ceil_shr(x: &BigInt, n: u32) -> BigInt {
    if n == 0 {
        return x.clone();
    }
    (x + (pow2(n) - 1u32)) >> n
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_ceil(b)
}

/// Round-half-up of `x / 2^n`; the boolean reports whether bits were lost.
fn round_shr(x: &BigInt, n: u32) -> (BigInt, bool) {
    if n == 0 {
        return (x.clone(), false);
    }
    let q = (x + pow2(n - 1)) >> n;
    let exact = (&q << n) == *x;
    (q, !exact)
}

impl CertifiedReal {
    pub fn from_parts(mid: BigInt, rad: BigInt, bits: u32) -> Self {
        assert!(!rad.is_negative(), "radius must be non-negative");
        CertifiedReal { mid, rad, bits }
    }

    pub fn zero(bits: u32) -> Self {
        Self::from_parts(BigInt::zero(), BigInt::zero(), bits)
    }

    pub fn from_int(n: impl Into<BigInt>, bits: u32) -> Self {
        Self::from_parts(n.into() << bits, BigInt::zero(), bits)
    }

    pub fn from_ratio(p: impl Into<BigInt>, q: impl Into<BigInt>, bits: u32) -> Self {
        let p = p.into();
        let q = q.into();
        assert!(!q.is_zero(), "zero denominator");
        let num = p << bits;
        let (mid, rem) = num.div_mod_floor(&q);
        let rad = if rem.is_zero() { BigInt::zero() } else { BigInt::one() };
        Self::from_parts(mid, rad, bits)
    }

    pub fn from_rational(r: &BigRational, bits: u32) -> Self {
        Self::from_ratio(r.numer().clone(), r.denom().clone(), bits)
    }

    /// Ball covering the closed interval `[lo, hi] / 2^bits`.
    fn from_interval(lo: BigInt, hi: BigInt, bits: u32) -> Self {
        debug_assert!(lo <= hi);
        let sum = &lo + &hi;
        let mid = sum.div_floor(&BigInt::from(2));
        let rad = (&hi - &mid).max(&mid - &lo);
        Self::from_parts(mid, rad, bits)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn mid_raw(&self) -> &BigInt {
        &self.mid
    }

    pub fn rad_raw(&self) -> &BigInt {
        &self.rad
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    pub fn lower_raw(&self) -> BigInt {
        &self.mid - &self.rad
    }

    pub fn upper_raw(&self) -> BigInt {
        &self.mid + &self.rad
    }

    /// Exact lower endpoint as a rational.
    pub fn lower(&self) -> BigRational {
        BigRational::new(self.lower_raw(), pow2(self.bits))
    }

    pub fn upper(&self) -> BigRational {
        BigRational::new(self.upper_raw(), pow2(self.bits))
    }

    pub fn radius(&self) -> BigRational {
        BigRational::new(self.rad.clone(), pow2(self.bits))
    }

    /// Exact ball collapsed to the lower endpoint.
    pub fn lower_point(&self) -> Self {
        Self::from_parts(self.lower_raw(), BigInt::zero(), self.bits)
    }

    pub fn upper_point(&self) -> Self {
        Self::from_parts(self.upper_raw(), BigInt::zero(), self.bits)
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lower() <= x && x <= &self.upper()
    }

    /// True if the intervals of `self` and `other` intersect.
    pub fn overlaps(&self, other: &Self) -> bool {
        self.lower() <= other.upper() && other.lower() <= self.upper()
    }

    pub fn to_f64(&self) -> f64 {
        let r = BigRational::new(self.mid.clone(), pow2(self.bits));
        r.to_f64().unwrap_or(f64::NAN)
    }

    /// Moves the ball to `bits` of precision (exact when increasing).
    pub fn with_bits(&self, bits: u32) -> Self {
        match bits.cmp(&self.bits) {
            std::cmp::Ordering::Equal => self.clone(),
            std::cmp::Ordering::Greater => {
                let d = bits - self.bits;
                Self::from_parts(&self.mid << d, &self.rad << d, bits)
            }
            std::cmp::Ordering::Less => {
                let d = self.bits - bits;
                let (mid, lost) = round_shr(&self.mid, d);
                let mut rad = ceil_shr(&self.rad, d);
                if lost {
                    rad += 1;
                }
                Self::from_parts(mid, rad, bits)
            }
        }
    }

    fn aligned(&self, other: &Self) -> (Self, Self, u32) {
        let bits = self.bits.max(other.bits);
        (self.with_bits(bits), other.with_bits(bits), bits)
    }

    pub fn neg(&self) -> Self {
        Self::from_parts(-&self.mid, self.rad.clone(), self.bits)
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b, bits) = self.aligned(other);
        Self::from_parts(a.mid + b.mid, a.rad + b.rad, bits)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let (a, b, bits) = self.aligned(other);
        Self::from_parts(a.mid - b.mid, a.rad + b.rad, bits)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b, bits) = self.aligned(other);
        let prod = &a.mid * &b.mid;
        let mid = &prod >> bits;
        let lost = (&mid << bits) != prod;
        let err = a.mid.abs() * &b.rad + b.mid.abs() * &a.rad + &a.rad * &b.rad;
        let mut rad = ceil_shr(&err, bits);
        if lost {
            rad += 1;
        }
        Self::from_parts(mid, rad, bits)
    }

    /// Multiplication by an exact integer; no rounding.
    pub fn mul_int(&self, k: &BigInt) -> Self {
        Self::from_parts(&self.mid * k, &self.rad * k.abs(), self.bits)
    }

    pub fn div_int(&self, k: &BigInt) -> Self {
        assert!(!k.is_zero(), "division by zero");
        let (mid, rem) = self.mid.div_mod_floor(k);
        let mut rad = ceil_div(&self.rad, &k.abs());
        if !rem.is_zero() {
            rad += 1;
        }
        Self::from_parts(mid, rad, self.bits)
    }

    pub fn div(&self, other: &Self) -> ArbResult<Self> {
        let (a, b, bits) = self.aligned(other);
        let bm = b.mid.abs();
        if bm <= b.rad {
            return Err(ArbError::PrecisionExhausted { bits });
        }
        let (mid, rem) = (&a.mid << bits).div_mod_floor(&b.mid);
        // |x/y - m1/m2| <= (|m1| r2 + |m2| r1) / (|m2| (|m2| - r2)), in ulps.
        let num = (a.mid.abs() * &b.rad + &bm * &a.rad) << bits;
        let den = &bm * (&bm - &b.rad);
        let mut rad = ceil_div(&num, &den);
        if !rem.is_zero() {
            rad += 1;
        }
        Ok(Self::from_parts(mid, rad, bits))
    }

    pub fn recip(&self) -> ArbResult<Self> {
        Self::from_int(1, self.bits).div(self)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut result = Self::from_int(1, self.bits);
        let mut base = self.clone();
        let mut e = n;
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

    pub fn abs(&self) -> Self {
        let lo = self.lower_raw();
        let hi = self.upper_raw();
        if !lo.is_negative() {
            self.clone()
        } else if !hi.is_positive() {
            self.neg()
        } else {
            Self::from_interval(BigInt::zero(), hi.max(-lo), self.bits)
        }
    }

    /// Interval hull of `max(self, other)`.
    pub fn max(&self, other: &Self) -> Self {
        let (a, b, bits) = self.aligned(other);
        let lo = a.lower_raw().max(b.lower_raw());
        let hi = a.upper_raw().max(b.upper_raw());
        Self::from_interval(lo, hi, bits)
    }

    pub fn min(&self, other: &Self) -> Self {
        let (a, b, bits) = self.aligned(other);
        let lo = a.lower_raw().min(b.lower_raw());
        let hi = a.upper_raw().min(b.upper_raw());
        Self::from_interval(lo, hi, bits)
    }

    pub fn sqrt(&self) -> ArbResult<Self> {
        let bits = self.bits;
        let lo = self.lower_raw();
        if self.mid.is_zero() && self.rad.is_zero() {
            return Ok(self.clone());
        }
        if !lo.is_positive() {
            return Err(ArbError::Domain("sqrt of a ball touching zero or negatives"));
        }
        let scaled = &self.mid << bits;
        let mid = scaled.sqrt();
        let lost = &mid * &mid != scaled;
        // |sqrt(x) - sqrt(m)| <= r / sqrt(m - r)
        let mut rad = if self.rad.is_zero() {
            BigInt::zero()
        } else {
            let denom = (&lo << bits).sqrt();
            if denom.is_zero() {
                return Err(ArbError::PrecisionExhausted { bits });
            }
            ceil_div(&(&self.rad << bits), &denom)
        };
        if lost {
            rad += 1;
        }
        Ok(Self::from_parts(mid, rad, bits))
    }

    /// Natural logarithm; fails unless the ball is strictly positive.
    pub fn ln(&self) -> ArbResult<Self> {
        let bits = self.bits;
        let lo = self.lower_raw();
        if !lo.is_positive() {
            if self.mid.is_positive() {
                return Err(ArbError::PrecisionExhausted { bits });
            }
            return Err(ArbError::Domain("log of a non-positive number"));
        }
        if self.mid == pow2(bits) && self.rad.is_zero() {
            return Ok(Self::zero(bits));
        }
        let w = bits + GUARD_BITS;
        let fixed = ln_fixed(&self.mid, bits, w);
        let (mid, _) = round_shr(&fixed, GUARD_BITS);
        // series error (< 2^-30 ulp) plus final rounding
        let mut rad = BigInt::from(2);
        if !self.rad.is_zero() {
            // |log x - log m| <= r / (m - r)
            rad += ceil_div(&(&self.rad << bits), &lo);
        }
        Ok(Self::from_parts(mid, rad, bits))
    }

    pub fn exp(&self) -> Self {
        let bits = self.bits;
        let w = bits + GUARD_BITS;
        let center = exp_fixed(&(&self.mid << GUARD_BITS), w);
        let top = exp_fixed(&(self.upper_raw() << GUARD_BITS), w);
        let (mid, _) = round_shr(&center, GUARD_BITS);
        let spread = ceil_shr(&(top - &center).abs(), GUARD_BITS);
        // kernel error is relative, below 2^-(bits + 20)
        let rel = mid.abs() >> (bits + 20);
        Self::from_parts(mid, spread + rel + 2, bits)
    }

    fn cmp_raw(&self, other: &Self) -> Option<std::cmp::Ordering> {
        let (a, b, _) = self.aligned(other);
        if a.upper_raw() < b.lower_raw() {
            Some(std::cmp::Ordering::Less)
        } else if a.lower_raw() > b.upper_raw() {
            Some(std::cmp::Ordering::Greater)
        } else {
            None
        }
    }

    /// Certified `self < other`; undecidable overlaps report `PrecisionExhausted`.
    pub fn lt(&self, other: &Self) -> ArbResult<bool> {
        match self.cmp_raw(other) {
            Some(std::cmp::Ordering::Less) => Ok(true),
            Some(_) => Ok(false),
            None => Err(ArbError::PrecisionExhausted { bits: self.bits.max(other.bits) }),
        }
    }

    pub fn gt(&self, other: &Self) -> ArbResult<bool> {
        other.lt(self)
    }

    /// Certainly greater than zero.
    pub fn is_positive(&self) -> bool {
        self.lower_raw().is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.upper_raw().is_negative()
    }

    /// Exact floor of the represented value, if the ball pins it down.
    pub fn floor(&self) -> ArbResult<BigInt> {
        let lo = self.lower_raw() >> self.bits;
        let hi = self.upper_raw() >> self.bits;
        if lo == hi {
            Ok(lo)
        } else {
            Err(ArbError::PrecisionExhausted { bits: self.bits })
        }
    }

    /// Floor of the upper endpoint: the largest integer that may be `<= x`.
    pub fn floor_upper(&self) -> BigInt {
        self.upper_raw() >> self.bits
    }

    /// Ceiling of the upper endpoint.
    pub fn ceil_upper(&self) -> BigInt {
        let u = self.upper_raw();
        -((-u) >> self.bits)
    }

    pub fn floor_lower(&self) -> BigInt {
        self.lower_raw() >> self.bits
    }

    /// Scientific-notation rendering of the midpoint with `digits` significant digits.
    pub fn to_sci(&self, digits: usize) -> String {
        sci_of_rational(&BigRational::new(self.mid.clone(), pow2(self.bits)), digits)
    }
}

impl fmt::Debug for CertifiedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CertifiedReal({} ± {} @{}b)",
            self.to_sci(20),
            sci_of_rational(&self.radius(), 3),
            self.bits
        )
    }
}

impl fmt::Display for CertifiedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci(12))
    }
}

/// Decimal scientific rendering such as `2.0300e112`.
pub fn sci_of_rational(r: &BigRational, digits: usize) -> String {
    if r.is_zero() {
        return "0".to_string();
    }
    let neg = r.is_negative();
    let r = r.abs();
    let digits = digits.max(1);
    let ten = BigInt::from(10);
    // estimate the decimal exponent from bit lengths, then correct
    let nb = r.numer().bits() as f64;
    let db = r.denom().bits() as f64;
    let mut e = ((nb - db) * std::f64::consts::LOG10_2).floor() as i64;
    let scaled = |e: i64| -> BigRational {
        if e >= 0 {
            &r / BigRational::from_integer(ten.pow(e as u32))
        } else {
            &r * BigRational::from_integer(ten.pow((-e) as u32))
        }
    };
    let one = BigRational::one();
    let tenr = BigRational::from_integer(ten.clone());
    let mut s = scaled(e);
    while s >= tenr {
        e += 1;
        s = scaled(e);
    }
    while s < one {
        e -= 1;
        s = scaled(e);
    }
    let sig = (s * BigRational::from_integer(ten.pow(digits as u32 - 1))).round().to_integer();
    let mut sig_str = sig.to_string();
    if sig_str.len() > digits {
        e += 1;
        sig_str.truncate(digits);
    }
    let (head, tail) = sig_str.split_at(1);
    let body = if tail.is_empty() { head.to_string() } else { format!("{head}.{tail}") };
    format!("{}{}e{}", if neg { "-" } else { "" }, body, e)
}

// ---------------------------------------------------------------------------
// transcendental kernels on raw fixed-point integers

/// `atanh(s / 2^w) * 2^w` for `0 <= s < 2^w / 2`, truncation error a few ulps per term.
fn atanh_fixed(s: &BigInt, w: u32) -> BigInt {
    debug_assert!(!s.is_negative());
    let s2 = (s * s) >> w;
    let mut term = s.clone();
    let mut sum = s.clone();
    let mut k: u64 = 1;
    loop {
        term = (&term * &s2) >> w;
        if term.is_zero() {
            break;
        }
        sum += &term / BigInt::from(2 * k + 1);
        k += 1;
    }
    sum
}

fn const_cache() -> &'static Mutex<HashMap<(&'static str, u64, u32), CertifiedReal>> {
    static CACHE: OnceLock<Mutex<HashMap<(&'static str, u64, u32), CertifiedReal>>> =
        OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Process-wide memo for constants keyed by `(tag, index, bits)`.
pub fn memoize(
    tag: &'static str,
    index: u64,
    bits: u32,
    compute: impl FnOnce() -> CertifiedReal,
) -> CertifiedReal {
    if let Some(v) = const_cache().lock().unwrap().get(&(tag, index, bits)) {
        return v.clone();
    }
    let v = compute();
    const_cache()
        .lock()
        .unwrap()
        .insert((tag, index, bits), v.clone());
    v
}

/// `ln 2 * 2^w` via `2 atanh(1/3)`.
fn ln2_fixed(w: u32) -> BigInt {
    let ball = memoize("ln2_fixed", 0, w, || {
        let nine = BigInt::from(9);
        let mut term = pow2(w) / BigInt::from(3);
        let mut sum = term.clone();
        let mut k: u64 = 1;
        loop {
            term = &term / &nine;
            if term.is_zero() {
                break;
            }
            sum += &term / BigInt::from(2 * k + 1);
            k += 1;
        }
        CertifiedReal::from_parts(sum * 2, BigInt::zero(), w)
    });
    ball.mid
}

/// `ln(v / 2^vbits) * 2^w` for `v > 0`.
fn ln_fixed(v: &BigInt, vbits: u32, w: u32) -> BigInt {
    let len = v.bits() as i64;
    let mut k = len - 1 - vbits as i64;
    let shift = w as i64 - (len - 1);
    let f = if shift >= 0 { v << (shift as u32) } else { v >> ((-shift) as u32) };
    // f / 2^w lies in [1, 2); fold into [1/sqrt2, sqrt2)
    let mut d = pow2(w);
    if &f * &f > pow2(2 * w + 1) {
        d <<= 1;
        k += 1;
    }
    let num = &f - &d;
    let den = &f + &d;
    let neg = num.is_negative();
    let s = (num.abs() << w) / den;
    let mut at: BigInt = atanh_fixed(&s, w) * 2;
    if neg {
        at = -at;
    }
    at + ln2_fixed(w) * BigInt::from(k)
}

/// `exp(x / 2^w) * 2^w`.
fn exp_fixed(x: &BigInt, w: u32) -> BigInt {
    let ln2 = ln2_fixed(w);
    let k = (x + (&ln2 >> 1u32)).div_floor(&ln2);
    let r = x - &k * &ln2;
    const HALVINGS: u32 = 12;
    let wr = w + HALVINGS + 8;
    let rr = (r << (HALVINGS + 8)) >> HALVINGS;
    // Taylor series for exp(rr) at wr bits
    let one = pow2(wr);
    let mut term = one.clone();
    let mut sum = one.clone();
    let mut n: u64 = 1;
    loop {
        term = (&term * &rr) >> wr;
        term = &term / BigInt::from(n);
        if term.is_zero() {
            break;
        }
        sum += &term;
        n += 1;
    }
    for _ in 0..HALVINGS {
        sum = (&sum * &sum) >> wr;
    }
    let kk = k.to_i64().expect("exponent out of range");
    let total = kk - (HALVINGS + 8) as i64;
    if total >= 0 {
        sum << (total as u32)
    } else {
        sum >> ((-total) as u32)
    }
}

// ---------------------------------------------------------------------------
// public operations

/// `log(p/q)` with radius at most `2^(1-bits) * max(1, |log(p/q)|)`.
pub fn log_rational(p: impl Into<BigInt>, q: impl Into<BigInt>, bits: u32) -> ArbResult<CertifiedReal> {
    let p = p.into();
    let q = q.into();
    if !p.is_positive() || !q.is_positive() {
        return Err(ArbError::Domain("log_rational needs p, q >= 1"));
    }
    if p == q {
        return Ok(CertifiedReal::zero(bits));
    }
    let work = bits + 16;
    let x = CertifiedReal::from_ratio(p, q, work + 64);
    let l = x.ln()?.with_bits(work);
    Ok(l.with_bits(bits))
}

/// Natural log of two, cached per precision.
pub fn ln2(bits: u32) -> CertifiedReal {
    memoize("ln2", 0, bits, || {
        let mid = ln2_fixed(bits + GUARD_BITS);
        let (m, _) = round_shr(&mid, GUARD_BITS);
        CertifiedReal::from_parts(m, BigInt::from(2), bits)
    })
}

/// Exact `floor(C * x)`, or `PrecisionExhausted` when the ball is too wide.
pub fn floor_scaled(x: &CertifiedReal, c: &BigInt) -> ArbResult<BigInt> {
    assert!(c.is_positive(), "scale must be positive");
    let lo = (x.lower_raw() * c) >> x.bits;
    let hi = (x.upper_raw() * c) >> x.bits;
    if lo == hi {
        Ok(lo)
    } else {
        Err(ArbError::PrecisionExhausted { bits: x.bits })
    }
}

/// `floor(C * x)` where `x` is recomputed at increasing precision.
pub fn floor_scaled_with(
    c: &BigInt,
    mut x: impl FnMut(u32) -> ArbResult<CertifiedReal>,
) -> ArbResult<BigInt> {
    let start = (c.bits() as u32 + 64).max(START_BITS);
    refine_from(start, |bits| floor_scaled(&x(bits)?, c))
}

/// Distance to the nearest integer, as a ball.
///
/// A ball whose interval crosses a half-integer still yields a sound
/// enclosure `[min endpoint distance, 1/2]`; only balls wider than `1/4`
/// are rejected.
pub fn nearest_int_distance(x: &CertifiedReal) -> ArbResult<CertifiedReal> {
    let bits = x.bits;
    let one = pow2(bits);
    let half = pow2(bits) >> 1u32;
    if x.rad.clone() * 4 > one {
        return Err(ArbError::PrecisionExhausted { bits });
    }
    let lo = x.lower_raw();
    let hi = x.upper_raw();
    let dist = |v: &BigInt| -> BigInt {
        let r = v.mod_floor(&one);
        r.clone().min(&one - r)
    };
    let dlo = dist(&lo);
    let dhi = dist(&hi);
    let flo = lo.div_floor(&one);
    let fhi = hi.div_floor(&one);
    // does the interval contain an integer or a half-integer?
    let contains_int = flo != fhi || lo.mod_floor(&one).is_zero();
    let lo_h = (&lo - &half).div_floor(&one);
    let hi_h = (&hi - &half).div_floor(&one);
    let contains_half = lo_h != hi_h || (&lo - &half).mod_floor(&one).is_zero();
    let (a, b) = match (contains_int, contains_half) {
        (false, false) => (dlo.clone().min(dhi.clone()), dlo.max(dhi)),
        (true, false) => (BigInt::zero(), dlo.max(dhi)),
        (false, true) => (dlo.min(dhi), half),
        (true, true) => (BigInt::zero(), half),
    };
    Ok(CertifiedReal::from_interval(a, b, bits))
}

/// Certified `x < y`.
pub fn certified_less_than(x: &CertifiedReal, y: &CertifiedReal) -> ArbResult<bool> {
    x.lt(y)
}

/// Ladder form of [`certified_less_than`] for recomputable operands.
pub fn certified_less_than_with(
    mut x: impl FnMut(u32) -> ArbResult<CertifiedReal>,
    mut y: impl FnMut(u32) -> ArbResult<CertifiedReal>,
) -> ArbResult<bool> {
    refine(|bits| certified_less_than(&x(bits)?, &y(bits)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn log_one_is_exact_zero() {
        let l = log_rational(1, 1, 256).unwrap();
        assert!(l.mid_raw().is_zero() && l.rad_raw().is_zero());
    }

    #[test]
    fn log_rejects_zero() {
        assert!(log_rational(0, 1, 128).is_err());
        assert!(log_rational(1, 0, 128).is_err());
    }

    #[test]
    fn half_log_five_matches_high_precision() {
        let low = log_rational(5, 1, 256).unwrap().div_int(&BigInt::from(2));
        let high = log_rational(5, 1, 512).unwrap().div_int(&BigInt::from(2));
        assert!(low.overlaps(&high));
        assert!(low.radius() <= r(1, 1) / BigRational::from_integer(pow2(250)));
        assert!((low.to_f64() - 0.804_718_956_217_050_2).abs() < 1e-15);
    }

    #[test]
    fn log2_at_3000_bits_is_tight_and_consistent() {
        let a = log_rational(2, 1, 3000).unwrap();
        let b = log_rational(2, 1, 3100).unwrap();
        assert!(a.overlaps(&b));
        assert!(a.radius() * BigRational::from_integer(pow2(2990)) <= r(1, 1));
        assert!(a.overlaps(&ln2(3000)));
    }

    #[test]
    fn log_radius_contract() {
        for (p, q) in [(3, 7), (1000, 3), (1, 1_000_000), (123_456_789, 2)] {
            let l = log_rational(p, q, 200).unwrap();
            let mag = l.to_f64().abs().max(1.0);
            let bound = mag * 2f64.powi(1 - 200);
            assert!(l.radius().to_f64().unwrap() <= bound, "{p}/{q}");
        }
    }

    #[test]
    fn exp_inverts_log() {
        let l = log_rational(10, 3, 300).unwrap();
        let e = l.exp();
        assert!(e.contains(&r(10, 3)));
        assert!(e.radius() < r(1, 1) / BigRational::from_integer(pow2(280)));
    }

    #[test]
    fn sqrt_contains_root() {
        let x = CertifiedReal::from_int(5, 300).sqrt().unwrap();
        let sq = x.mul(&x);
        assert!(sq.contains(&r(5, 1)));
    }

    #[test]
    fn floor_scaled_examples() {
        let zero = CertifiedReal::zero(64);
        let c = BigInt::from(10).pow(467);
        assert_eq!(floor_scaled(&zero, &c).unwrap(), BigInt::zero());
        let log_sqrt5 = log_rational(5, 1, 256).unwrap().div_int(&BigInt::from(2));
        assert_eq!(floor_scaled(&log_sqrt5, &BigInt::from(1000)).unwrap(), BigInt::from(804));
    }

    #[test]
    fn nearest_int_examples() {
        let x = CertifiedReal::from_ratio(5, 2, 64);
        let d = nearest_int_distance(&x).unwrap();
        assert!(d.contains(&r(1, 2)) && d.is_exact());
        let y = CertifiedReal::from_ratio(13, 4, 64);
        let d = nearest_int_distance(&y).unwrap();
        assert!(d.contains(&r(1, 4)) && d.is_exact());
        let z = CertifiedReal::from_ratio(-13, 4, 64);
        assert!(nearest_int_distance(&z).unwrap().contains(&r(1, 4)));
    }

    #[test]
    fn less_than_examples() {
        let l2 = log_rational(2, 1, 128).unwrap();
        let l3 = log_rational(3, 1, 128).unwrap();
        assert!(certified_less_than(&l2, &l3).unwrap());
        assert!(!certified_less_than(&l3, &l2).unwrap());
        assert!(matches!(
            certified_less_than(&l2, &l2),
            Err(ArbError::PrecisionExhausted { .. })
        ));
    }

    #[test]
    fn sci_rendering() {
        assert_eq!(sci_of_rational(&r(203, 100), 3), "2.03e0");
        assert_eq!(sci_of_rational(&r(-1, 8), 2), "-1.3e-1");
        let big = BigRational::from_integer(BigInt::from(197) * BigInt::from(10).pow(110));
        assert_eq!(sci_of_rational(&big, 3), "1.97e112");
    }
}
