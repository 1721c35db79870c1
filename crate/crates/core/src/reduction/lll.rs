//! Exact integral LLL (δ = 3/4) and the lattice distance bound.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arbreal::CertifiedReal;
use crate::error::{FibpowError, Result};

/// A full-rank lattice in `Z^k`, generated by the columns of `basis`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerLattice {
    /// `cols[j]` is the `j`-th generator.
    pub cols: Vec<Vec<BigInt>>,
    /// Gram determinants `d_0 = 1, d_1, ..., d_k` once reduced.
    gram: Option<Vec<BigInt>>,
    /// Unimodular transform: `reduced_col_j = sum_i transform[j][i] * input_col_i`.
    transform: Option<Vec<Vec<BigInt>>>,
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(dst: &mut [BigInt], q: &BigInt, src: &[BigInt]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d -= q * s;
    }
}

/// Nearest integer to `n/d` for `d > 0`, ties rounded up.
fn round_div(n: &BigInt, d: &BigInt) -> BigInt {
    (BigInt::from(2) * n + d).div_floor(&(BigInt::from(2) * d))
}

impl IntegerLattice {
    pub fn from_columns(cols: Vec<Vec<BigInt>>) -> Result<Self> {
        let k = cols.len();
        if k == 0 || cols.iter().any(|c| c.len() != k) {
            return Err(FibpowError::InvalidArgument("lattice basis must be square".into()));
        }
        Ok(IntegerLattice { cols, gram: None, transform: None })
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let k = rows.len();
        let cols = (0..k).map(|j| rows.iter().map(|r| r.get(j).cloned().unwrap_or_default()).collect()).collect();
        Self::from_columns(cols)
    }

    pub fn identity(k: usize) -> Self {
        let cols = (0..k)
            .map(|j| (0..k).map(|i| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect();
        IntegerLattice { cols, gram: None, transform: None }
    }

    pub fn dim(&self) -> usize {
        self.cols.len()
    }

    pub fn rows(&self) -> Vec<Vec<BigInt>> {
        let k = self.dim();
        (0..k).map(|i| self.cols.iter().map(|c| c[i].clone()).collect()).collect()
    }

    pub fn transform(&self) -> Option<&Vec<Vec<BigInt>>> {
        self.transform.as_ref()
    }

    /// Exact determinant by fraction-free elimination.
    pub fn determinant(&self) -> BigInt {
        determinant(&self.rows())
    }

    /// Squared Gram-Schmidt norms `‖b_j*‖² = d_j / d_{j-1}`.
    pub fn gs_norms_sq(&self) -> Result<Vec<BigRational>> {
        let d = match &self.gram {
            Some(d) => d.clone(),
            None => gram_determinants(&self.cols)?,
        };
        Ok((1..d.len()).map(|j| BigRational::new(d[j].clone(), d[j - 1].clone())).collect())
    }

    /// Exact Gram-Schmidt coefficients `μ_{i,j}` for `j < i`.
    pub fn gs_coefficients(&self) -> Vec<Vec<BigRational>> {
        let k = self.dim();
        let mut star: Vec<Vec<BigRational>> = Vec::with_capacity(k);
        let mut mu = vec![vec![BigRational::zero(); k]; k];
        for i in 0..k {
            let mut v: Vec<BigRational> = self.cols[i].iter().cloned().map(BigRational::from).collect();
            for j in 0..i {
                let bb: BigRational = star[j].iter().map(|x| x * x).sum();
                let num: BigRational =
                    self.cols[i].iter().zip(&star[j]).map(|(a, b)| BigRational::from(a.clone()) * b).sum();
                let m = num / bb;
                for (x, s) in v.iter_mut().zip(&star[j]) {
                    *x -= &m * s;
                }
                mu[i][j] = m;
            }
            star.push(v);
        }
        mu
    }

    /// Checks size reduction and the Lovász condition with δ = 3/4.
    pub fn is_lll_reduced(&self) -> Result<bool> {
        let mu = self.gs_coefficients();
        let norms = self.gs_norms_sq()?;
        let half = BigRational::new(1.into(), 2.into());
        for i in 0..self.dim() {
            for j in 0..i {
                if mu[i][j].abs() > half {
                    return Ok(false);
                }
            }
            if i > 0 {
                let lhs = &norms[i] + &mu[i][i - 1] * &mu[i][i - 1] * &norms[i - 1];
                if lhs < BigRational::new(3.into(), 4.into()) * &norms[i - 1] {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// One row per line, decimal entries separated by spaces.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn parse_text(s: &str) -> Result<Self> {
        s.parse()
    }
}

impl fmt::Display for IntegerLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for IntegerLattice {
    type Err = FibpowError;

    fn from_str(s: &str) -> Result<Self> {
        let rows = s
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                l.split_whitespace()
                    .map(|w| w.parse::<BigInt>().map_err(|e| FibpowError::Format(format!("bad entry {w:?}: {e}"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if rows.iter().any(|r| r.len() != rows.len()) {
            return Err(FibpowError::Format("matrix is not square".into()));
        }
        Self::from_rows(rows)
    }
}

pub fn determinant(rows: &[Vec<BigInt>]) -> BigInt {
    // Bareiss elimination
    let k = rows.len();
    let mut m: Vec<Vec<BigInt>> = rows.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for c in 0..k {
        if m[c][c].is_zero() {
            match (c + 1..k).find(|&r| !m[r][c].is_zero()) {
                Some(r) => {
                    m.swap(c, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for r in c + 1..k {
            for j in c + 1..k {
                let v = (&m[r][j] * &m[c][c] - &m[r][c] * &m[c][j]) / &prev;
                m[r][j] = v;
            }
            m[r][c] = BigInt::zero();
        }
        prev = m[c][c].clone();
    }
    sign * prev
}

fn gram_determinants(cols: &[Vec<BigInt>]) -> Result<Vec<BigInt>> {
    let k = cols.len();
    let mut d = vec![BigInt::one()];
    for i in 1..=k {
        let g: Vec<Vec<BigInt>> = (0..i).map(|a| (0..i).map(|b| dot(&cols[a], &cols[b])).collect()).collect();
        let v = determinant(&g);
        if v.is_zero() {
            return Err(FibpowError::SingularBasis);
        }
        d.push(v);
    }
    Ok(d)
}

/// Integral LLL with δ = 3/4 following the classical all-integer variant:
/// Gram determinants `d_i` and scaled coefficients `λ_{i,j} = d_j μ_{i,j}`
/// stay integral throughout.
pub fn lll_reduce(lattice: &IntegerLattice) -> Result<IntegerLattice> {
    let n = lattice.dim();
    // one-based working arrays, index 0 unused (d[0] = 1)
    let mut b: Vec<Vec<BigInt>> = std::iter::once(Vec::new()).chain(lattice.cols.iter().cloned()).collect();
    let mut h: Vec<Vec<BigInt>> = std::iter::once(Vec::new())
        .chain((0..n).map(|j| (0..n).map(|i| if i == j { BigInt::one() } else { BigInt::zero() }).collect()))
        .collect();
    let mut d = vec![BigInt::zero(); n + 1];
    let mut lam = vec![vec![BigInt::zero(); n + 1]; n + 1];
    d[0] = BigInt::one();
    d[1] = dot(&b[1], &b[1]);
    if d[1].is_zero() {
        return Err(FibpowError::SingularBasis);
    }
    if n == 1 {
        return Ok(IntegerLattice { cols: lattice.cols.clone(), gram: Some(d), transform: Some(vec![vec![BigInt::one()]]) });
    }

    let redi = |k: usize, l: usize, b: &mut Vec<Vec<BigInt>>, h: &mut Vec<Vec<BigInt>>, lam: &mut Vec<Vec<BigInt>>, d: &[BigInt]| {
        if (BigInt::from(2) * &lam[k][l]).abs() <= d[l] {
            return;
        }
        let q = round_div(&lam[k][l], &d[l]);
        let (bl, hl) = (b[l].clone(), h[l].clone());
        axpy(&mut b[k], &q, &bl);
        axpy(&mut h[k], &q, &hl);
        lam[k][l] -= &q * &d[l];
        for i in 1..l {
            let v = &q * &lam[l][i];
            lam[k][i] -= v;
        }
    };

    let mut k = 2;
    let mut kmax = 1;
    while k <= n {
        if k > kmax {
            kmax = k;
            for j in 1..=k {
                let mut u = dot(&b[k], &b[j]);
                for i in 1..j {
                    u = (&d[i] * &u - &lam[k][i] * &lam[j][i]) / &d[i - 1];
                }
                if j < k {
                    lam[k][j] = u;
                } else {
                    if u.is_zero() {
                        return Err(FibpowError::SingularBasis);
                    }
                    d[k] = u;
                }
            }
        }
        loop {
            redi(k, k - 1, &mut b, &mut h, &mut lam, &d);
            let l = &lam[k][k - 1];
            let lhs = BigInt::from(4) * &d[k] * &d[k - 2];
            let rhs = BigInt::from(3) * &d[k - 1] * &d[k - 1] - BigInt::from(4) * l * l;
            if lhs < rhs {
                // SWAPI(k)
                b.swap(k, k - 1);
                h.swap(k, k - 1);
                for j in 1..k - 1 {
                    let tmp = std::mem::take(&mut lam[k][j]);
                    lam[k][j] = std::mem::replace(&mut lam[k - 1][j], tmp);
                }
                let l = lam[k][k - 1].clone();
                let bb = (&d[k - 2] * &d[k] + &l * &l) / &d[k - 1];
                for i in k + 1..=kmax {
                    let t = lam[i][k].clone();
                    lam[i][k] = (&d[k] * &lam[i][k - 1] - &l * &t) / &d[k - 1];
                    lam[i][k - 1] = (&bb * &t + &l * &lam[i][k]) / &d[k];
                }
                d[k - 1] = bb;
                if k > 2 {
                    k -= 1;
                }
            } else {
                for l in (1..k - 1).rev() {
                    redi(k, l, &mut b, &mut h, &mut lam, &d);
                }
                k += 1;
                break;
            }
        }
    }
    b.remove(0);
    h.remove(0);
    Ok(IntegerLattice { cols: b, gram: Some(d), transform: Some(h) })
}

/// Solves `B z = y` exactly.
pub fn solve(lattice: &IntegerLattice, y: &[BigInt]) -> Result<Vec<BigRational>> {
    let k = lattice.dim();
    let mut m: Vec<Vec<BigRational>> = lattice
        .rows()
        .into_iter()
        .zip(y)
        .map(|(r, yi)| r.into_iter().chain(std::iter::once(yi.clone())).map(BigRational::from).collect())
        .collect();
    for c in 0..k {
        let p = (c..k).find(|&r| !m[r][c].is_zero()).ok_or(FibpowError::SingularBasis)?;
        m.swap(c, p);
        let piv = m[c][c].clone();
        for j in c..=k {
            m[c][j] = &m[c][j] / &piv;
        }
        for r in 0..k {
            if r != c && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                for j in c..=k {
                    let v = &f * &m[c][j];
                    m[r][j] -= v;
                }
            }
        }
    }
    Ok(m.into_iter().map(|r| r[k].clone()).collect())
}

/// Lower bound `c_1` for the distance from `y` to the lattice (or for the
/// shortest nonzero vector when `y` lies in it).
///
/// `σ` is the distance to the nearest integer of the last non-integral
/// coordinate of `B⁻¹y`, and `c_1 = σ · min_j ‖b_j*‖`.
pub fn lattice_distance_lower_bound(reduced: &IntegerLattice, y: &[BigInt]) -> Result<CertifiedReal> {
    let c = distance_bound_sq(reduced, y)?;
    let bits = (c.numer().bits().max(c.denom().bits()) as u32).max(256) + 64;
    Ok(CertifiedReal::from_rational(&c, bits).sqrt()?.lower_point())
}

/// `c_1²` as an exact rational.
pub fn distance_bound_sq(reduced: &IntegerLattice, y: &[BigInt]) -> Result<BigRational> {
    if y.len() != reduced.dim() {
        return Err(FibpowError::InvalidArgument("target has wrong dimension".into()));
    }
    let z = solve(reduced, y)?;
    let sigma = z
        .iter()
        .rev()
        .find(|zi| !zi.is_integer())
        .map(|zi| {
            let f = zi - zi.floor();
            let g = BigRational::one() - &f;
            f.min(g)
        })
        .unwrap_or_else(BigRational::one);
    let min_star = reduced.gs_norms_sq()?.into_iter().min().ok_or(FibpowError::SingularBasis)?;
    Ok(&sigma * &sigma * min_star)
}
