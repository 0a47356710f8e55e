//! Exact arithmetic in cyclotomic fields Q(ζ_N), the value domain for every
//! character and inner product in this crate. Values are rational vectors
//! over the power basis 1, ζ, ..., ζ^{φ(N)-1} modulo the N-th cyclotomic
//! polynomial. Conductors are reduced lazily: arithmetic embeds both
//! operands into Q(ζ_lcm) and leaves the result there.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{euler_phi, factorize, gcd};
use crate::error::{Result, SltError};

const CONDUCTOR_BUDGET: u64 = 100_000;

/// Shared per-conductor data: Φ_N and reduction rows for x^k, k ≥ φ(N).
struct Conductor {
    n: u64,
    phi: usize,
    /// monic Φ_N as coefficient vector of length phi + 1 (integers)
    poly: Vec<BigInt>,
    /// lazily extended table of x^k mod Φ_N for k = 0, 1, 2, ...
    powers: Mutex<Vec<Vec<BigInt>>>,
}

impl Conductor {
    fn new(n: u64) -> Result<Arc<Conductor>> {
        if n == 0 {
            return Err(SltError::ZeroConductor(0));
        }
        if n > CONDUCTOR_BUDGET {
            return Err(SltError::Capacity {
                what: format!("cyclotomic conductor {n}"),
                size: n as u128,
                budget: CONDUCTOR_BUDGET as u128,
            });
        }
        let poly = cyclotomic_polynomial(n);
        let phi = poly.len() - 1;
        let powers = {
            let mut v = Vec::with_capacity(phi);
            for k in 0..phi {
                let mut row = vec![BigInt::zero(); phi];
                row[k] = BigInt::one();
                v.push(row);
            }
            Mutex::new(v)
        };
        Ok(Arc::new(Conductor {
            n,
            phi,
            poly,
            powers,
        }))
    }

    /// x^k mod Φ_N as an integer coefficient vector of length phi.
    fn power_row(&self, k: usize) -> Vec<BigInt> {
        let mut table = self.powers.lock().unwrap();
        while table.len() <= k {
            // multiply the last row by x and reduce by the monic Φ_N
            let last = table.last().unwrap().clone();
            let mut row = vec![BigInt::zero(); self.phi];
            for (i, c) in last.iter().enumerate() {
                if i + 1 < self.phi {
                    row[i + 1] += c;
                }
            }
            let lead = last[self.phi - 1].clone();
            if !lead.is_zero() {
                for (r, p) in row.iter_mut().zip(&self.poly) {
                    *r -= &lead * p;
                }
            }
            table.push(row);
        }
        table[k].clone()
    }
}

fn registry() -> &'static Mutex<HashMap<u64, Arc<Conductor>>> {
    static REG: OnceLock<Mutex<HashMap<u64, Arc<Conductor>>>> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(HashMap::new()))
}

fn conductor(n: u64) -> Result<Arc<Conductor>> {
    let mut reg = registry().lock().unwrap();
    if let Some(c) = reg.get(&n) {
        return Ok(c.clone());
    }
    let c = Conductor::new(n)?;
    reg.insert(n, c.clone());
    Ok(c)
}

/// Φ_N over Z via (x^N - 1) / ∏_{d|N, d<N} Φ_d, exact division.
fn cyclotomic_polynomial(n: u64) -> Vec<BigInt> {
    if n == 1 {
        return vec![-BigInt::one(), BigInt::one()]; // x - 1
    }
    let mut num = vec![BigInt::zero(); n as usize + 1];
    num[0] = -BigInt::one();
    num[n as usize] = BigInt::one();
    let mut result = num;
    for d in crate::arith::divisors(n) {
        if d < n {
            let phi_d = cyclotomic_polynomial(d);
            result = poly_div_exact(&result, &phi_d);
        }
    }
    result
}

fn poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let nd = rem.len() - 1;
    let mut quot = vec![BigInt::zero(); nd - dd + 1];
    for k in (0..=nd - dd).rev() {
        let c = rem[k + dd].clone(); // den is monic
        if !c.is_zero() {
            quot[k] = c.clone();
            for (i, dc) in den.iter().enumerate() {
                rem[k + i] -= &c * dc;
            }
        }
    }
    debug_assert!(rem.iter().all(|c| c.is_zero()));
    quot
}

/// Exact element of Q(ζ_N).
#[derive(Clone)]
pub struct CycNum {
    n: u64,
    coeffs: Vec<BigRational>,
}

impl CycNum {
    pub fn zero() -> Self {
        CycNum {
            n: 1,
            coeffs: vec![BigRational::zero()],
        }
    }

    pub fn one() -> Self {
        CycNum {
            n: 1,
            coeffs: vec![BigRational::one()],
        }
    }

    pub fn from_int(v: i64) -> Self {
        CycNum {
            n: 1,
            coeffs: vec![BigRational::from_integer(BigInt::from(v))],
        }
    }

    pub fn from_rational(v: BigRational) -> Self {
        CycNum {
            n: 1,
            coeffs: vec![v],
        }
    }

    pub fn conductor(&self) -> u64 {
        self.n
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// ζ_N^k, reduced to the primitive conductor N/gcd(N, k) before
    /// construction so deep torus levels never materialize huge fields.
    pub fn zeta_pow(n: u64, k: i64) -> Result<Self> {
        if n == 0 {
            return Err(SltError::ZeroConductor(0));
        }
        let kk = k.rem_euclid(n as i64) as u64;
        let g = gcd(n as i128, kk as i128) as u64;
        let (n, kk) = if kk == 0 { (1, 0) } else { (n / g, kk / g) };
        let cond = conductor(n)?;
        let row = cond.power_row(kk as usize);
        Ok(CycNum {
            n,
            coeffs: row.into_iter().map(BigRational::from_integer).collect(),
        })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Embed into Q(ζ_m) for n | m.
    pub fn embed(&self, m: u64) -> Result<Self> {
        if m == self.n {
            return Ok(self.clone());
        }
        assert!(
            m % self.n == 0,
            "embedding requires conductor divisibility: {} into {}",
            self.n,
            m
        );
        let cond = conductor(m)?;
        let step = (m / self.n) as usize;
        let mut coeffs = vec![BigRational::zero(); cond.phi];
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                for (j, b) in cond.power_row(i * step).into_iter().enumerate() {
                    if !b.is_zero() {
                        coeffs[j] += c * BigRational::from_integer(b);
                    }
                }
            }
        }
        Ok(CycNum { n: m, coeffs })
    }

    fn common(a: &CycNum, b: &CycNum) -> Result<(CycNum, CycNum)> {
        let m = crate::arith::lcm(a.n, b.n);
        Ok((a.embed(m)?, b.embed(m)?))
    }

    pub fn add(&self, other: &CycNum) -> CycNum {
        let (mut a, b) = CycNum::common(self, other).expect("conductor budget");
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x += y;
        }
        a
    }

    pub fn sub(&self, other: &CycNum) -> CycNum {
        let (mut a, b) = CycNum::common(self, other).expect("conductor budget");
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x -= y;
        }
        a
    }

    pub fn mul(&self, other: &CycNum) -> CycNum {
        let (a, b) = CycNum::common(self, other).expect("conductor budget");
        let cond = conductor(a.n).expect("conductor budget");
        let phi = cond.phi;
        let mut acc = vec![BigRational::zero(); phi];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let prod = x * y;
                if i + j < phi {
                    acc[i + j] += prod;
                } else {
                    for (k, r) in cond.power_row(i + j).into_iter().enumerate() {
                        if !r.is_zero() {
                            acc[k] += &prod * BigRational::from_integer(r);
                        }
                    }
                }
            }
        }
        CycNum { n: a.n, coeffs: acc }
    }

    pub fn scale(&self, r: &BigRational) -> CycNum {
        CycNum {
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
    }

    pub fn neg(&self) -> CycNum {
        CycNum {
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    /// Galois automorphism ζ ↦ ζ^k for gcd(k, N) = 1.
    pub fn galois(&self, k: u64) -> CycNum {
        assert_eq!(gcd(self.n as i128, k as i128), 1, "galois exponent must be a unit");
        let cond = conductor(self.n).expect("conductor cached");
        let phi = cond.phi;
        let mut acc = vec![BigRational::zero(); phi];
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                let e = (i as u64 * k % self.n) as usize;
                for (j, b) in cond.power_row(e).into_iter().enumerate() {
                    if !b.is_zero() {
                        acc[j] += c * BigRational::from_integer(b);
                    }
                }
            }
        }
        CycNum { n: self.n, coeffs: acc }
    }

    /// Complex conjugation, ζ ↦ ζ^{-1}.
    pub fn conj(&self) -> CycNum {
        if self.n == 1 {
            return self.clone();
        }
        self.galois(self.n - 1)
    }

    /// Some(r) when the value lies in Q.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.coeffs.iter().skip(1).all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    pub fn as_integer(&self) -> Option<BigInt> {
        self.as_rational()
            .filter(|r| r.denom().is_one())
            .map(|r| r.numer().clone())
    }

    /// Reduce to the smallest conductor that holds the value exactly.
    /// Only performed when asked; arithmetic never canonicalizes.
    pub fn reduced(&self) -> CycNum {
        for m in crate::arith::divisors(self.n) {
            if m < self.n {
                if let Some(lower) = self.try_descend(m) {
                    return lower;
                }
            }
        }
        self.clone()
    }

    fn try_descend(&self, m: u64) -> Option<CycNum> {
        if m == self.n || m == 0 || self.n % m != 0 {
            return None;
        }
        let phi_m = euler_phi(m) as usize;
        // candidate: solve for coefficients by embedding the basis of Q(ζ_m)
        let cond = conductor(self.n).ok()?;
        let step = (self.n / m) as usize;
        // basis rows of ζ_m^i embedded at conductor n
        let rows: Vec<Vec<BigInt>> = (0..phi_m).map(|i| cond.power_row(i * step)).collect();
        // Solve rows^T * c = self.coeffs by Gaussian elimination over Q.
        let phi_n = cond.phi;
        let mut aug: Vec<Vec<BigRational>> = (0..phi_n)
            .map(|r| {
                let mut row: Vec<BigRational> = (0..phi_m)
                    .map(|c| BigRational::from_integer(rows[c][r].clone()))
                    .collect();
                row.push(self.coeffs[r].clone());
                row
            })
            .collect();
        let mut pivot_row = 0;
        let mut pivots = Vec::new();
        for col in 0..phi_m {
            let Some(pr) = (pivot_row..phi_n).find(|&r| !aug[r][col].is_zero()) else {
                continue;
            };
            aug.swap(pivot_row, pr);
            let inv = aug[pivot_row][col].clone();
            for v in aug[pivot_row].iter_mut() {
                *v /= &inv;
            }
            for r in 0..phi_n {
                if r != pivot_row && !aug[r][col].is_zero() {
                    let f = aug[r][col].clone();
                    let prow = aug[pivot_row].clone();
                    for (v, pv) in aug[r].iter_mut().zip(prow) {
                        *v -= &f * pv;
                    }
                }
            }
            pivots.push((pivot_row, col));
            pivot_row += 1;
        }
        // consistency: all remaining rhs must be zero
        for r in pivot_row..phi_n {
            if !aug[r][phi_m].is_zero() {
                return None;
            }
        }
        let mut coeffs = vec![BigRational::zero(); phi_m];
        for (r, c) in pivots {
            coeffs[c] = aug[r][phi_m].clone();
        }
        Some(CycNum { n: m, coeffs })
    }

    /// |value|² = value * conj(value); handy for norm checks.
    pub fn norm_squared(&self) -> CycNum {
        self.mul(&self.conj())
    }
}

impl PartialEq for CycNum {
    fn eq(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }
}
impl Eq for CycNum {}

impl fmt::Debug for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " {} ", if c.is_negative() { "-" } else { "+" })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            let a = c.abs();
            if i == 0 {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "z{}^{}", self.n, i)?;
            } else {
                write!(f, "{a}*z{}^{}", self.n, i)?;
            }
            first = false;
        }
        Ok(())
    }
}

impl std::ops::Add for &CycNum {
    type Output = CycNum;
    fn add(self, rhs: &CycNum) -> CycNum {
        CycNum::add(self, rhs)
    }
}
impl std::ops::Sub for &CycNum {
    type Output = CycNum;
    fn sub(self, rhs: &CycNum) -> CycNum {
        CycNum::sub(self, rhs)
    }
}
impl std::ops::Mul for &CycNum {
    type Output = CycNum;
    fn mul(self, rhs: &CycNum) -> CycNum {
        CycNum::mul(self, rhs)
    }
}

/// Wire format: conductor plus numerator/denominator pairs, decimal strings.
#[derive(Serialize, Deserialize)]
pub struct CycNumWire {
    pub n: u64,
    pub coeffs: Vec<(String, String)>,
}

impl From<&CycNum> for CycNumWire {
    fn from(v: &CycNum) -> Self {
        CycNumWire {
            n: v.n,
            coeffs: v
                .coeffs
                .iter()
                .map(|c| (c.numer().to_string(), c.denom().to_string()))
                .collect(),
        }
    }
}

impl TryFrom<&CycNumWire> for CycNum {
    type Error = SltError;
    fn try_from(w: &CycNumWire) -> Result<CycNum> {
        let phi = euler_phi(w.n) as usize;
        if w.coeffs.len() != phi {
            return Err(SltError::Other(format!(
                "cyclotomic payload has {} coefficients, conductor {} needs {}",
                w.coeffs.len(),
                w.n,
                phi
            )));
        }
        let coeffs = w
            .coeffs
            .iter()
            .map(|(n, d)| {
                let num: BigInt = n.parse().map_err(|_| SltError::Other("bad numerator".into()))?;
                let den: BigInt = d.parse().map_err(|_| SltError::Other("bad denominator".into()))?;
                Ok(BigRational::new(num, den))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CycNum { n: w.n, coeffs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zeta(n: u64, k: i64) -> CycNum {
        CycNum::zeta_pow(n, k).unwrap()
    }

    #[test]
    fn primitive_fourth_root_squares_to_minus_one() {
        assert_eq!(zeta(4, 1).mul(&zeta(4, 1)), CycNum::from_int(-1));
    }

    #[test]
    fn vanishing_root_of_unity_sum() {
        let s = CycNum::one().add(&zeta(3, 1)).add(&zeta(3, 2));
        assert!(s.is_zero());
    }

    #[test]
    fn conjugate_gives_unit_modulus() {
        assert_eq!(zeta(5, 1).conj().mul(&zeta(5, 1)), CycNum::one());
    }

    #[test]
    fn zeta_pow_basics() {
        assert_eq!(zeta(7, 0), CycNum::one());
        assert_eq!(zeta(2, 1), CycNum::from_int(-1));
        assert_eq!(zeta(3, 1).mul(&zeta(3, 2)), CycNum::one());
        assert!(CycNum::zeta_pow(0, 1).is_err());
    }

    #[test]
    fn periodicity_and_reduction() {
        assert_eq!(zeta(6, 7), zeta(6, 1));
        // gcd reduction: ζ_6^2 = ζ_3
        assert_eq!(zeta(6, 2).conductor(), 3);
        assert_eq!(zeta(6, 2), zeta(3, 1));
        assert_eq!(zeta(6, 3), CycNum::from_int(-1));
    }

    #[test]
    fn embedding_transitivity() {
        let x = zeta(3, 1);
        let via = x.embed(6).unwrap().embed(12).unwrap();
        let direct = x.embed(12).unwrap();
        assert_eq!(via, direct);
    }

    #[test]
    fn reduced_finds_smallest_conductor() {
        let x = zeta(3, 1).embed(12).unwrap();
        assert_eq!(x.conductor(), 12);
        assert_eq!(x.reduced().conductor(), 3);
    }

    #[test]
    fn wire_roundtrip() {
        let x = zeta(12, 5).add(&CycNum::from_int(2));
        let w = CycNumWire::from(&x);
        let back = CycNum::try_from(&w).unwrap();
        assert_eq!(x, back);
    }
}
