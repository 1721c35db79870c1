//! Certified continued-fraction expansions.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arbreal::{refine, refine_from, ArbError, CertifiedReal};
use crate::error::{FibpowError, Result};

/// Convergents of a real number known only through a ball.
#[derive(Clone, Debug)]
pub struct ConvergentTable {
    pub mu: CertifiedReal,
    /// `a_0, a_1, ...` with `a_0` the integer part.
    pub partial_quotients: Vec<BigInt>,
    /// `(p_l, q_l)` for each index.
    pub convergents: Vec<(BigInt, BigInt)>,
    /// True if the expansion of both endpoints ended: `mu` is rational.
    pub terminated: bool,
}

impl ConvergentTable {
    pub fn len(&self) -> usize {
        self.convergents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.convergents.is_empty()
    }

    pub fn q(&self, l: usize) -> &BigInt {
        &self.convergents[l].1
    }

    pub fn p(&self, l: usize) -> &BigInt {
        &self.convergents[l].0
    }

    /// `max{a_j : 1 <= j <= l}` (zero when `l = 0`).
    pub fn max_partial_quotient(&self, l: usize) -> BigInt {
        self.partial_quotients[1..=l.min(self.partial_quotients.len() - 1)]
            .iter()
            .max()
            .cloned()
            .unwrap_or_default()
    }

    /// Least `l` with `q_l >= q`.
    pub fn first_index_reaching(&self, q: &BigInt) -> Option<usize> {
        self.convergents.iter().position(|(_, ql)| ql >= q)
    }

    /// Least `l` with `q_l > q`.
    pub fn first_index_exceeding(&self, q: &BigInt) -> Option<usize> {
        self.convergents.iter().position(|(_, ql)| ql > q)
    }
}

/// One endpoint `n/d` of the interval, expanded in lockstep with the other.
struct Endpoint {
    n: BigInt,
    d: BigInt,
}

impl Endpoint {
    fn from(r: BigRational) -> Self {
        Endpoint { n: r.numer().clone(), d: r.denom().clone() }
    }

    fn floor(&self) -> BigInt {
        self.n.div_floor(&self.d)
    }

    /// Replaces `x` by `1/(x - a)`; returns false when `x = a`.
    fn step(&mut self, a: &BigInt) -> bool {
        let rem = &self.n - a * &self.d;
        if rem.is_zero() {
            return false;
        }
        self.n = std::mem::replace(&mut self.d, rem);
        if self.d.is_negative() {
            self.n = -&self.n;
            self.d = -&self.d;
        }
        true
    }
}

/// Expands `mu` until `stop(l, q_l)` returns true for the newest convergent.
///
/// Every partial quotient is the common floor of both interval endpoints,
/// so it is the true partial quotient of every real in the ball. Returns
/// `PrecisionExhausted` if the endpoints diverge before `stop` fires.
pub fn continued_fraction(
    mu: &CertifiedReal,
    mut stop: impl FnMut(usize, &BigInt) -> bool,
) -> Result<ConvergentTable> {
    let mut lo = Endpoint::from(mu.lower());
    let mut hi = Endpoint::from(mu.upper());
    let mut table = ConvergentTable {
        mu: mu.clone(),
        partial_quotients: Vec::new(),
        convergents: Vec::new(),
        terminated: false,
    };
    let (mut p2, mut q2) = (BigInt::zero(), BigInt::one());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    loop {
        let a = lo.floor();
        if a != hi.floor() {
            return Err(ArbError::PrecisionExhausted { bits: mu.bits() }.into());
        }
        let p = &a * &p1 + &p2;
        let q = &a * &q1 + &q2;
        table.partial_quotients.push(a.clone());
        table.convergents.push((p.clone(), q.clone()));
        let l = table.convergents.len() - 1;
        if stop(l, &q) {
            return Ok(table);
        }
        let more_lo = lo.step(&a);
        let more_hi = hi.step(&a);
        if !more_lo && !more_hi {
            table.terminated = true;
            return Ok(table);
        }
        if !more_lo || !more_hi {
            return Err(ArbError::PrecisionExhausted { bits: mu.bits() }.into());
        }
        p2 = std::mem::replace(&mut p1, p);
        q2 = std::mem::replace(&mut q1, q);
    }
}

/// Ladder form of [`continued_fraction`] for a recomputable `mu`.
pub fn continued_fraction_with(
    start_bits: u32,
    mu: impl Fn(u32) -> CertifiedReal,
    stop: impl Fn(usize, &BigInt) -> bool,
) -> Result<ConvergentTable> {
    Ok(refine_from(start_bits, |bits| {
        continued_fraction(&mu(bits), &stop).map_err(|e| match e {
            FibpowError::Arb(a) => a,
            _ => ArbError::Domain("continued fraction failed"),
        })
    })?)
}

/// Data behind a gap bound `1/((2 + A) q_l)`.
#[derive(Clone, Debug)]
pub struct GapBound {
    pub index: usize,
    pub q: BigInt,
    pub max_quotient: BigInt,
    /// The bound itself, exact.
    pub bound: BigRational,
}

impl GapBound {
    pub fn as_real(&self, bits: u32) -> CertifiedReal {
        CertifiedReal::from_rational(&self.bound, bits).lower_point()
    }
}

/// `1/((2 + A) q_l)` for the least `l` with `q_l > Q`; a lower bound for
/// `|qμ - p|` whenever `0 < q < q_l`, in particular for `q <= Q`.
pub fn cf_gap_bound(table: &ConvergentTable, target: &BigInt) -> Result<GapBound> {
    let l = table
        .first_index_exceeding(target)
        .ok_or_else(|| FibpowError::TableTooShort { needed: target.to_string() })?;
    let a = table.max_partial_quotient(l);
    let q = table.q(l).clone();
    let denom = (&a + 2) * &q;
    Ok(GapBound { index: l, q, max_quotient: a, bound: BigRational::new(BigInt::one(), denom) })
}

/// Convenience: expand until `q_l > target`, escalating precision.
pub fn expand_until(
    start_bits: u32,
    mu: impl Fn(u32) -> CertifiedReal,
    target: &BigInt,
) -> Result<ConvergentTable> {
    let t = target.clone();
    continued_fraction_with(start_bits, mu, move |_, q| q > &t)
}

/// `‖x‖` upper and lower bounds for `q x` in one place.
pub fn refine_distance(q: &BigInt, x: impl Fn(u32) -> CertifiedReal) -> Result<CertifiedReal> {
    Ok(refine(|bits| crate::arbreal::nearest_int_distance(&x(bits).mul_int(q)))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadfield::{alpha_real, fibonacci};

    #[test]
    fn golden_ratio_has_all_ones() {
        let t = continued_fraction(&alpha_real(256), |l, _| l == 30).unwrap();
        assert!(t.partial_quotients.iter().all(|a| a == &BigInt::one()));
        for (l, (_, q)) in t.convergents.iter().enumerate() {
            assert_eq!(q, &fibonacci(l as u64 + 1));
        }
    }

    #[test]
    fn rational_input_terminates() {
        // 7/3 is not dyadic: either the walk stops on a wide ball or it ends
        match continued_fraction(&CertifiedReal::from_ratio(7, 3, 64), |_, _| false) {
            Ok(t) => assert!(t.terminated),
            Err(e) => assert!(matches!(e, FibpowError::Arb(ArbError::PrecisionExhausted { .. }))),
        }
        let t = continued_fraction(&CertifiedReal::from_ratio(7, 4, 64), |_, _| false).unwrap();
        assert!(t.terminated);
        assert_eq!(t.partial_quotients, vec![BigInt::from(1), BigInt::from(1), BigInt::from(3)]);
    }

    #[test]
    fn low_precision_is_reported() {
        let x = alpha_real(64);
        assert!(continued_fraction(&x, |_, _| false).is_err());
    }

    #[test]
    fn golden_gap_bound() {
        let t = expand_until(256, alpha_real, &BigInt::from(100)).unwrap();
        let g = cf_gap_bound(&t, &BigInt::from(100)).unwrap();
        assert_eq!(g.q, BigInt::from(144));
        assert_eq!(g.bound, BigRational::new(1.into(), (3 * 144).into()));
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        for q in 1..=144 {
            let d = (q as f64 * phi - (q as f64 * phi).round()).abs();
            assert!(d > 1.0 / 432.0);
        }
        assert!(cf_gap_bound(&t, &BigInt::from(10).pow(40)).is_err());
    }
}
