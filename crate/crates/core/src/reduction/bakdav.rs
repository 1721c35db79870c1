//! Baker-Davenport reduction for `|nμ + τ - x| < c_1 exp(-c_2 H)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arbreal::{max_bits, nearest_int_distance, refine_from, ArbError, CertifiedReal};
use crate::error::Result;

use super::cf::continued_fraction;

/// Working precision for convergent walks.
pub const KAPPA_BITS: u32 = 3072;
pub const DEFAULT_KAPPA_COUNT: usize = 250;

/// A convergent denominator `q` of `μ` with `‖qμ‖ < 1/(2κN)` certified.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KappaPair {
    /// Index of the convergent.
    pub index: usize,
    #[serde(with = "crate::quadfield::bigint_string")]
    pub q: BigInt,
    /// Exact rational just below the computed `κ`.
    #[serde(with = "rational_string")]
    pub kappa: BigRational,
}

mod rational_string {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn shave(x: BigRational) -> BigRational {
    let one = BigInt::one();
    x * BigRational::new((&one << 32u32) - &one, &one << 32u32)
}

/// `κ` for one convergent denominator, or `None` if it is not above one.
fn kappa_for(q: &BigInt, mu: &CertifiedReal, n_bound: &BigInt) -> Option<BigRational> {
    let d = nearest_int_distance(&mu.mul_int(q)).ok()?;
    let up = d.upper();
    if !up.is_positive() {
        return None;
    }
    let k = shave((BigRational::from(BigInt::from(2) * n_bound) * up).recip());
    (k > BigRational::one()).then_some(k)
}

/// Walks the convergents of `μ`, keeping pairs with `κ > 1` in the order found.
pub fn build_kappa_list(
    mu: impl Fn(u32) -> CertifiedReal,
    n_bound: &BigInt,
    count: usize,
) -> Result<Vec<KappaPair>> {
    build_kappa_list_at(KAPPA_BITS, mu, n_bound, count)
}

/// [`build_kappa_list`] starting from `bits` of precision.
pub fn build_kappa_list_at(
    bits: u32,
    mu: impl Fn(u32) -> CertifiedReal,
    n_bound: &BigInt,
    count: usize,
) -> Result<Vec<KappaPair>> {
    let count = count.max(1);
    let start = bits.min(max_bits());
    Ok(refine_from(start, |bits| {
        let m = mu(bits);
        let mut pairs = Vec::with_capacity(count);
        let table = continued_fraction(&m, |l, q| {
            if let Some(kappa) = kappa_for(q, &m, n_bound) {
                pairs.push(KappaPair { index: l, q: q.clone(), kappa });
            }
            pairs.len() >= count
        });
        match table {
            Ok(_) => Ok(pairs),
            Err(crate::error::FibpowError::Arb(e)) => Err(e),
            Err(_) => Err(ArbError::Domain("convergent walk failed")),
        }
    })?)
}

/// Outcome of a successful reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BdBound {
    pub h: BigInt,
    pub pair: usize,
}

/// Certified `‖qτ‖ > 1/κ`, `Some(false)` if certainly not, `None` if the
/// cap is reached undecided.
fn separated(q: &BigInt, tau: &dyn Fn(u32) -> CertifiedReal, kappa: &BigRational) -> Option<bool> {
    let threshold = kappa.recip();
    let start = (q.bits() as u32 + 128).max(256);
    refine_from(start, |bits| {
        let d = nearest_int_distance(&tau(bits).mul_int(q))?;
        if d.lower() > threshold {
            Ok(true)
        } else if d.upper() <= threshold {
            Ok(false)
        } else {
            Err(ArbError::PrecisionExhausted { bits })
        }
    })
    .ok()
}

/// Scans `pairs` in order and returns `H ≤ log(2κqc_1)/c_2` for the first
/// pair with `‖qτ‖ > 1/κ`. Pairs must have been built for a bound at least
/// `n_bound`.
pub fn baker_davenport(
    tau: &dyn Fn(u32) -> CertifiedReal,
    c1: &CertifiedReal,
    c2: &CertifiedReal,
    pairs: &[KappaPair],
) -> Result<Option<BdBound>> {
    for (i, p) in pairs.iter().enumerate() {
        match separated(&p.q, tau, &p.kappa) {
            Some(true) => {
                let bits = c1.bits().max(c2.bits()).max(256);
                let k = CertifiedReal::from_rational(&p.kappa, bits);
                let arg = k.mul_int(&(BigInt::from(2) * &p.q)).mul(&c1.with_bits(bits));
                let h = arg.ln()?.div(&c2.with_bits(bits))?;
                return Ok(Some(BdBound { h: h.floor_upper().max(BigInt::zero()), pair: i }));
            }
            Some(false) => continue,
            None => {
                log::debug!("pair {i}: separation undecided at precision cap, skipped");
                continue;
            }
        }
    }
    Ok(None)
}

/// True when some pair still certifies `‖qμ‖ < 1/(2κN)` for the given `N`.
pub fn pairs_valid_for(pairs: &[KappaPair], mu: &CertifiedReal, n_bound: &BigInt) -> bool {
    pairs.iter().all(|p| match nearest_int_distance(&mu.mul_int(&p.q)) {
        Ok(d) => d.upper() * BigRational::from(BigInt::from(2) * n_bound) * &p.kappa < BigRational::one(),
        Err(_) => false,
    }) && !n_bound.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadfield::{alpha_real, log_alpha, log_int, log_sqrt5};

    #[test]
    fn golden_small_case() {
        let n = BigInt::from(10);
        let pairs = build_kappa_list(alpha_real, &n, 1).unwrap();
        assert_eq!(pairs.len(), 1);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        // direct scan over Fibonacci denominators
        let (mut a, mut b) = (1u64, 1u64);
        let first = loop {
            let d = (b as f64 * phi - (b as f64 * phi).round()).abs();
            if 1.0 / (d * 20.0) > 1.0 {
                break b;
            }
            (a, b) = (b, a + b);
        };
        assert_eq!(pairs[0].q, BigInt::from(first));
    }

    #[test]
    fn integer_tau_never_qualifies() {
        let n = BigInt::from(1000);
        let pairs = build_kappa_list(alpha_real, &n, 10).unwrap();
        let tau = |bits: u32| CertifiedReal::from_int(3, bits);
        let c = CertifiedReal::from_int(1, 256);
        assert_eq!(baker_davenport(&tau, &c, &c, &pairs).unwrap(), None);
    }

    #[test]
    fn pairs_are_certified() {
        let n = BigInt::from(10).pow(17) * 437 / 100;
        let mu = |bits| log_alpha(bits).div(&log_int(&BigInt::from(3), bits)).unwrap();
        let pairs = build_kappa_list(mu, &n, 250).unwrap();
        assert_eq!(pairs.len(), 250);
        assert!(pairs_valid_for(&pairs, &mu(KAPPA_BITS), &n));
        assert!(pairs.windows(2).all(|w| w[0].index < w[1].index));
    }

    #[test]
    fn step_three_instance_y3() {
        let y = BigInt::from(3);
        let n = BigInt::from(10).pow(17) * 437 / 100;
        let mu = |bits| log_alpha(bits).div(&log_int(&y, bits)).unwrap();
        let tau = |bits: u32| log_sqrt5(bits).div(&log_int(&y, bits)).unwrap();
        let pairs = build_kappa_list(mu, &n, 50).unwrap();
        let c1 = CertifiedReal::from_ratio(203, 100, 256).div(&log_int(&y, 256)).unwrap();
        let r = baker_davenport(&tau, &c1, &log_alpha(256), &pairs).unwrap().expect("a pair qualifies");
        assert!(r.h < BigInt::from(200), "{}", r.h);
    }
}
