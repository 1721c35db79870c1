//! Approximation lattices for small linear forms in logarithms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arbreal::{floor_scaled_with, CertifiedReal};
use crate::error::{FibpowError, Result};

use super::lll::{distance_bound_sq, lll_reduce, IntegerLattice};

/// Number of times `C` is multiplied by `10^5` before giving up.
pub const ESCALATIONS: u32 = 3;

/// Real inputs `η_0, η_1, ..., η_k`; index 0 is the constant term.
pub type EtaFn<'a> = &'a (dyn Fn(usize, u32) -> CertifiedReal + Sync);

/// A reduced approximation lattice for one choice of `η` and `C`.
#[derive(Clone, Debug)]
pub struct ApproxLattice {
    pub c: BigInt,
    /// `⌊Cη_1⌋, ..., ⌊Cη_k⌋`.
    pub entries: Vec<BigInt>,
    /// `⌊Cη_0⌋`, absent for homogeneous forms.
    pub eta0_floor: Option<BigInt>,
    pub reduced: IntegerLattice,
    /// Exact `c_1²` for the target `y = (0, ..., 0, -⌊Cη_0⌋)`.
    pub c1_sq: BigRational,
}

/// The lattice spanned by the columns of
/// `[[I_{k-1}, 0], [⌊Cη_1⌋ ... ⌊Cη_{k-1}⌋, ⌊Cη_k⌋]]`.
pub fn approximation_lattice(entries: &[BigInt]) -> Result<IntegerLattice> {
    let k = entries.len();
    let cols = (0..k)
        .map(|j| {
            let mut col = vec![BigInt::zero(); k];
            if j + 1 < k {
                col[j] = BigInt::one();
            }
            col[k - 1] = entries[j].clone();
            col
        })
        .collect();
    IntegerLattice::from_columns(cols)
}

impl ApproxLattice {
    pub fn build(eta: EtaFn<'_>, k: usize, homogeneous: bool, c: &BigInt) -> Result<Self> {
        let entries = (1..=k)
            .map(|i| floor_scaled_with(c, |bits| Ok(eta(i, bits))))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if entries[k - 1].is_zero() {
            return Err(FibpowError::SingularBasis);
        }
        let eta0_floor = if homogeneous { None } else { Some(floor_scaled_with(c, |bits| Ok(eta(0, bits)))?) };
        let reduced = lll_reduce(&approximation_lattice(&entries)?)?;
        let mut y = vec![BigInt::zero(); k];
        if let Some(e0) = &eta0_floor {
            y[k - 1] = -e0;
        }
        let c1_sq = distance_bound_sq(&reduced, &y)?;
        Ok(ApproxLattice { c: c.clone(), entries, eta0_floor, reduced, c1_sq })
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// `x_1 = ... = x_{k-1} = 0` with an admissible integral `x_k` hits the
    /// target exactly; the lattice then says nothing about `H`.
    pub fn degenerate(&self, x: &[BigInt]) -> bool {
        match &self.eta0_floor {
            None => false,
            Some(e0) => {
                let ek = &self.entries[self.dim() - 1];
                let (q, r) = e0.div_rem(ek);
                r.is_zero() && q.abs() <= x[self.dim() - 1]
            }
        }
    }

    /// Applies the reduction bound for coefficient bounds `x`; `None` when
    /// `c_1² > T² + S` fails.
    ///
    /// Entries are floors, so each of the `k + 1` rounding errors is below
    /// one and `T = 1 + ΣX_i`.
    pub fn bound(&self, x: &[BigInt], c3: &CertifiedReal, c4: &CertifiedReal) -> Result<Option<BigInt>> {
        let k = self.dim();
        if x.len() != k {
            return Err(FibpowError::InvalidArgument("need one bound per coefficient".into()));
        }
        let s: BigInt = x[..k - 1].iter().map(|v| v * v).sum();
        let t: BigInt = BigInt::one() + x.iter().sum::<BigInt>();
        let rest = &self.c1_sq - BigRational::from(s);
        if rest <= BigRational::from(&t * &t) {
            return Ok(None);
        }
        let bits = c3.bits().max(c4.bits()).max(256);
        let gap = CertifiedReal::from_rational(&rest, bits).sqrt()?.sub(&CertifiedReal::from_int(t, bits));
        if !gap.is_positive() {
            return Ok(None);
        }
        let cc3 = c3.with_bits(bits).mul_int(&self.c);
        let h = cc3.ln()?.sub(&gap.ln()?).div(&c4.with_bits(bits))?;
        Ok(Some(h.floor_upper().max(BigInt::zero())))
    }
}

/// A linear form `|η_0 + x_1η_1 + ... + x_kη_k| ≤ c_3 exp(-c_4 H)` with
/// `|x_i| ≤ X_i`.
pub struct DeWegerInput<'a> {
    pub eta: EtaFn<'a>,
    pub k: usize,
    pub homogeneous: bool,
    pub x: Vec<BigInt>,
    pub c3: CertifiedReal,
    pub c4: CertifiedReal,
    pub c: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reduced {
    /// `H` is at most this.
    Bound { h: BigInt, c: BigInt },
    DegenerateCase,
}

/// Builds and reduces the lattice, multiplying `C` by `10^5` up to
/// [`ESCALATIONS`] times if the distance bound is too small.
pub fn de_weger_reduce(input: &DeWegerInput<'_>) -> Result<Reduced> {
    let mut c = input.c.clone();
    let step = BigInt::from(10).pow(5);
    for attempt in 0..=ESCALATIONS {
        let lat = ApproxLattice::build(input.eta, input.k, input.homogeneous, &c)?;
        if lat.degenerate(&input.x) {
            return Ok(Reduced::DegenerateCase);
        }
        if let Some(h) = lat.bound(&input.x, &input.c3, &input.c4)? {
            return Ok(Reduced::Bound { h, c });
        }
        log::debug!("reduction attempt {attempt} with C of {} digits failed", c.to_string().len());
        c *= &step;
    }
    Err(FibpowError::ReductionFailed(format!(
        "distance bound below threshold after {ESCALATIONS} escalations"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadfield::{log_alpha, log_int, log_sqrt5};

    #[test]
    fn lattice_shape() {
        let e = [BigInt::from(5), BigInt::from(7), BigInt::from(11)];
        let l = approximation_lattice(&e).unwrap();
        assert_eq!(l.rows()[2], e.to_vec());
        assert_eq!(l.rows()[0], vec![1.into(), BigInt::zero(), BigInt::zero()]);
        assert_eq!(l.determinant(), BigInt::from(11));
    }

    #[test]
    fn three_logs_reduce() {
        // |x1 log 2 + x2 log 3 + x3 log 5| with |x_i| <= 10^6
        let eta = |i: usize, bits: u32| match i {
            1 => log_int(&BigInt::from(2), bits),
            2 => log_int(&BigInt::from(3), bits),
            3 => log_int(&BigInt::from(5), bits),
            _ => CertifiedReal::zero(bits),
        };
        let x = vec![BigInt::from(1_000_000); 3];
        let input = DeWegerInput {
            eta: &eta,
            k: 3,
            homogeneous: true,
            x: x.clone(),
            c3: CertifiedReal::from_int(1, 256),
            c4: CertifiedReal::from_int(1, 256),
            c: BigInt::from(10).pow(24),
        };
        match de_weger_reduce(&input).unwrap() {
            Reduced::Bound { h, .. } => {
                assert!(h < BigInt::from(80), "h = {h}");
                assert!(h > BigInt::from(10));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tiny_c_escalates_or_fails() {
        let eta = |i: usize, bits: u32| match i {
            1 => log_alpha(bits),
            2 => log_sqrt5(bits),
            _ => log_int(&BigInt::from(3), bits),
        };
        let x = vec![BigInt::from(10).pow(30); 3];
        let input = DeWegerInput {
            eta: &eta,
            k: 3,
            homogeneous: true,
            x,
            c3: CertifiedReal::from_int(1, 256),
            c4: CertifiedReal::from_int(1, 256),
            c: BigInt::from(10),
        };
        assert!(matches!(de_weger_reduce(&input), Err(FibpowError::ReductionFailed(_))));
    }
}
