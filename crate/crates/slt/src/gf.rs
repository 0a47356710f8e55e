//! Finite fields GF(p^m) in a compatible tower, the distinguished root of
//! unity ζ, and the chart identifying the multiplicative group of the tower
//! with a subgroup of (Q/Z)_{p'}.
//!
//! Representation rule: Zech-log tables when |field| ≤ 2^20, polynomial
//! arithmetic with Pohlig–Hellman discrete logs above. A tower fixes one
//! top field GF(p^M); every lower level lives inside it as the subfield of
//! p^m-th power fixed points, with generator g_m = g^{(p^M-1)/(p^m-1)}, so
//! the chart is compatible across levels by construction.

use std::collections::HashMap;
use std::sync::Arc;

use crate::arith::{self, factorize, gcd, is_prime, pow_mod};
use crate::error::{Result, SltError};

const ZECH_BUDGET: u64 = 1 << 20;

/// Element of GF(p^m): either a discrete log in a Zech field or a
/// coefficient vector in a polynomial field. Zero is its own case.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum FqElem {
    Zero,
    Log(u64),
    Poly(Box<[u16]>),
}

// ---------------------------------------------------------------------------
// Polynomial arithmetic over F_p (dense, u64 coefficients).
// ---------------------------------------------------------------------------

pub(crate) fn poly_mul_mod(a: &[u64], b: &[u64], modulus: &[u64], p: u64) -> Vec<u64> {
    let m = modulus.len() - 1;
    let mut prod = vec![0u64; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if y != 0 {
                prod[i + j] = (prod[i + j] + x * y) % p;
            }
        }
    }
    poly_rem(&mut prod, modulus, p);
    prod.truncate(m);
    prod.resize(m, 0);
    prod
}

fn poly_rem(a: &mut Vec<u64>, modulus: &[u64], p: u64) {
    let m = modulus.len() - 1;
    let lead_inv = arith::inv_mod(modulus[m] as i128, p as i128).unwrap() as u64;
    while a.len() > m {
        let k = a.len() - 1;
        let c = a[k] * lead_inv % p;
        if c != 0 {
            for (i, &mc) in modulus.iter().enumerate() {
                let idx = k - m + i;
                a[idx] = (a[idx] + p - c * mc % p) % p;
            }
        }
        a.pop();
        while a.len() > m && *a.last().unwrap() == 0 {
            a.pop();
        }
    }
}

fn poly_pow_mod(base: &[u64], mut e: u128, modulus: &[u64], p: u64) -> Vec<u64> {
    let m = modulus.len() - 1;
    let mut acc = vec![0u64; m];
    acc[0] = 1;
    let mut b = base.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mul_mod(&acc, &b, modulus, p);
        }
        b = poly_mul_mod(&b, &b, modulus, p);
        e >>= 1;
    }
    acc
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let trim = |v: &mut Vec<u64>| {
        while v.len() > 1 && *v.last().unwrap() == 0 {
            v.pop();
        }
    };
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !(b.len() == 1 && b[0] == 0) {
        let mut r = a.clone();
        poly_rem_general(&mut r, &b, p);
        trim(&mut r);
        a = b;
        b = r;
    }
    a
}

fn poly_rem_general(a: &mut Vec<u64>, modulus: &[u64], p: u64) {
    let m = modulus.len() - 1;
    if m == 0 {
        a.clear();
        a.push(0);
        return;
    }
    let lead_inv = arith::inv_mod(modulus[m] as i128, p as i128).unwrap() as u64;
    while a.len() > m {
        let k = a.len() - 1;
        let c = a[k] * lead_inv % p;
        if c != 0 {
            for (i, &mc) in modulus.iter().enumerate() {
                let idx = k - m + i;
                a[idx] = (a[idx] + p - c * mc % p) % p;
            }
        }
        a.pop();
        while a.len() > m && *a.last().unwrap() == 0 {
            a.pop();
        }
    }
}

fn is_irreducible(f: &[u64], p: u64) -> bool {
    let m = (f.len() - 1) as u32;
    // x^{p^m} ≡ x (mod f)
    let x = vec![0u64, 1];
    let xpm = poly_pow_mod(&x, (p as u128).pow(m), f, p);
    let mut diff = xpm.clone();
    diff[1] = (diff[1] + p - 1) % p;
    if diff.iter().any(|&c| c != 0) {
        return false;
    }
    // gcd(x^{p^{m/l}} - x, f) = 1 for prime l | m
    for (l, _) in factorize(m as u128) {
        let k = m / l as u32;
        let mut d = poly_pow_mod(&x, (p as u128).pow(k), f, p);
        d[1] = (d[1] + p - 1) % p;
        let g = poly_gcd(&d, f, p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

/// Deterministic defining polynomial: the monic irreducible of degree m over
/// F_p whose non-leading coefficient word c_0 + c_1 p + ... is smallest.
/// The table below pins the outputs this crate relies on; the search is the
/// fallback for anything else and a test asserts the two agree.
pub fn defining_polynomial(p: u64, m: u32) -> Vec<u64> {
    for &(tp, tm, word) in SHIPPED_POLYS {
        if tp == p && tm == m {
            return unpack_poly(p, m, word);
        }
    }
    search_defining_polynomial(p, m)
}

pub fn search_defining_polynomial(p: u64, m: u32) -> Vec<u64> {
    if m == 1 {
        return vec![0, 1]; // x
    }
    let mut word: u128 = 0;
    loop {
        let f = unpack_poly(p, m, word);
        if is_irreducible(&f, p) {
            return f;
        }
        word += 1;
    }
}

fn unpack_poly(p: u64, m: u32, mut word: u128) -> Vec<u64> {
    let mut f = vec![0u64; m as usize + 1];
    for c in f.iter_mut().take(m as usize) {
        *c = (word % p as u128) as u64;
        word /= p as u128;
    }
    f[m as usize] = 1;
    f
}

fn pack_poly(p: u64, f: &[u64]) -> u128 {
    let mut word = 0u128;
    for &c in f[..f.len() - 1].iter().rev() {
        word = word * p as u128 + c as u128;
    }
    word
}

/// Fixed, versioned list of defining polynomials: (p, degree, packed word of
/// non-leading coefficients, little-endian base p). Generated by
/// `search_defining_polynomial` and frozen so cached data stays reproducible.
const SHIPPED_POLYS: &[(u64, u32, u128)] = &[
    (2, 1, 0),
    (2, 2, 3),
    (2, 3, 3),
    (2, 4, 3),
    (2, 6, 3),
    (2, 12, 9),
    (3, 1, 0),
    (3, 2, 1),
    (3, 3, 7),
    (3, 4, 5),
    (3, 6, 5),
    (5, 1, 0),
    (5, 2, 2),
    (5, 4, 2),
    (5, 10, 33),
    (7, 1, 0),
    (7, 2, 1),
    (7, 3, 2),
    (7, 6, 2),
    (7, 12, 58),
    (7, 14, 11),
    (11, 1, 0),
    (11, 2, 1),
    (11, 5, 2),
    (11, 10, 3),
    (13, 1, 0),
    (13, 2, 2),
    (13, 4, 2),
];

// ---------------------------------------------------------------------------
// Field core: one GF(p^m) with Zech or polynomial representation.
// ---------------------------------------------------------------------------

enum Repr {
    Zech {
        /// exp[i] = packed coefficient word of g^i
        exp: Vec<u32>,
        /// log[word] = i such that g^i has that word; u32::MAX for zero
        log: Vec<u32>,
        /// zech[i] = log(1 + g^i); u32::MAX when 1 + g^i = 0
        zech: Vec<u32>,
    },
    Poly {
        modulus: Vec<u64>,
    },
}

pub struct Fq {
    pub p: u64,
    pub m: u32,
    /// p^m - 1
    pub order: u64,
    repr: Repr,
    poly: Vec<u64>,
}

impl Fq {
    fn size(&self) -> u64 {
        self.order + 1
    }

    pub fn new(p: u64, m: u32) -> Result<Fq> {
        if !is_prime(p) {
            return Err(SltError::NotPrime(p));
        }
        let size = (p as u128).checked_pow(m).filter(|&s| s < (1u128 << 62)).ok_or(
            SltError::Capacity {
                what: format!("GF({p}^{m})"),
                size: u128::MAX,
                budget: 1u128 << 62,
            },
        )?;
        let poly = defining_polynomial(p, m);
        if size as u64 <= ZECH_BUDGET {
            Ok(Self::build_zech(p, m, poly))
        } else {
            Ok(Fq {
                p,
                m,
                order: size as u64 - 1,
                repr: Repr::Poly {
                    modulus: poly.clone(),
                },
                poly,
            })
        }
    }

    fn build_zech(p: u64, m: u32, poly: Vec<u64>) -> Fq {
        let size = (p as u64).pow(m);
        let order = size - 1;
        // find a generator by trying packed words in ascending order
        let factors = factorize(order as u128);
        let mut gen_vec = None;
        'cand: for word in 1..size {
            let v = unpack_elem(p, m, word);
            if v.iter().all(|&c| c == 0) {
                continue;
            }
            for (l, _) in &factors {
                let e = (order as u128) / l;
                let pw = poly_pow_mod(&v, e, &poly, p);
                if is_one(&pw) {
                    continue 'cand;
                }
            }
            gen_vec = Some(v);
            break;
        }
        let g = gen_vec.expect("primitive element exists");
        let mut exp = vec![0u32; order as usize];
        let mut log = vec![u32::MAX; size as usize];
        let mut cur = vec![0u64; m as usize];
        cur[0] = 1;
        for (i, e) in exp.iter_mut().enumerate() {
            let word = pack_elem(p, &cur) as u32;
            *e = word;
            log[word as usize] = i as u32;
            cur = poly_mul_mod(&cur, &g, &poly, p);
        }
        debug_assert!(is_one(&cur));
        // zech[i] = log(1 + g^i)
        let mut zech = vec![u32::MAX; order as usize];
        for i in 0..order as usize {
            let mut v = unpack_elem(p, m, exp[i] as u64);
            v[0] = (v[0] + 1) % p;
            let word = pack_elem(p, &v);
            zech[i] = if word == 0 {
                u32::MAX
            } else {
                log[word as usize]
            };
        }
        Fq {
            p,
            m,
            order,
            repr: Repr::Zech { exp, log, zech },
            poly,
        }
    }

    pub fn zero(&self) -> FqElem {
        FqElem::Zero
    }

    pub fn one(&self) -> FqElem {
        match &self.repr {
            Repr::Zech { .. } => FqElem::Log(0),
            Repr::Poly { .. } => {
                let mut v = vec![0u16; self.m as usize];
                v[0] = 1;
                FqElem::Poly(v.into_boxed_slice())
            }
        }
    }

    /// Element of the prime subfield from an integer mod p.
    pub fn from_int(&self, k: u64) -> FqElem {
        let k = k % self.p;
        if k == 0 {
            return FqElem::Zero;
        }
        match &self.repr {
            Repr::Zech { log, .. } => FqElem::Log(log[k as usize] as u64),
            Repr::Poly { .. } => {
                let mut v = vec![0u16; self.m as usize];
                v[0] = k as u16;
                FqElem::Poly(v.into_boxed_slice())
            }
        }
    }

    pub fn is_zero(&self, a: &FqElem) -> bool {
        matches!(a, FqElem::Zero)
    }

    pub fn add(&self, a: &FqElem, b: &FqElem) -> FqElem {
        match (a, b) {
            (FqElem::Zero, _) => b.clone(),
            (_, FqElem::Zero) => a.clone(),
            (FqElem::Log(x), FqElem::Log(y)) => {
                let Repr::Zech { zech, .. } = &self.repr else {
                    unreachable!()
                };
                // g^x + g^y = g^x (1 + g^{y-x})
                let d = (y + self.order - x) % self.order;
                match zech[d as usize] {
                    u32::MAX => FqElem::Zero,
                    z => FqElem::Log((x + z as u64) % self.order),
                }
            }
            (FqElem::Poly(x), FqElem::Poly(y)) => {
                let v: Vec<u16> = x
                    .iter()
                    .zip(y.iter())
                    .map(|(&a, &b)| ((a as u64 + b as u64) % self.p) as u16)
                    .collect();
                self.norm_poly(v)
            }
            _ => unreachable!("mixed representations"),
        }
    }

    fn norm_poly(&self, v: Vec<u16>) -> FqElem {
        if v.iter().all(|&c| c == 0) {
            FqElem::Zero
        } else {
            FqElem::Poly(v.into_boxed_slice())
        }
    }

    pub fn neg(&self, a: &FqElem) -> FqElem {
        match a {
            FqElem::Zero => FqElem::Zero,
            FqElem::Log(x) => {
                if self.p == 2 {
                    a.clone()
                } else {
                    FqElem::Log((x + self.order / 2) % self.order)
                }
            }
            FqElem::Poly(v) => {
                let w: Vec<u16> = v.iter().map(|&c| ((self.p - c as u64) % self.p) as u16).collect();
                self.norm_poly(w)
            }
        }
    }

    pub fn sub(&self, a: &FqElem, b: &FqElem) -> FqElem {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &FqElem, b: &FqElem) -> FqElem {
        match (a, b) {
            (FqElem::Zero, _) | (_, FqElem::Zero) => FqElem::Zero,
            (FqElem::Log(x), FqElem::Log(y)) => FqElem::Log((x + y) % self.order),
            (FqElem::Poly(x), FqElem::Poly(y)) => {
                let Repr::Poly { modulus } = &self.repr else {
                    unreachable!()
                };
                let xs: Vec<u64> = x.iter().map(|&c| c as u64).collect();
                let ys: Vec<u64> = y.iter().map(|&c| c as u64).collect();
                let prod = poly_mul_mod(&xs, &ys, modulus, self.p);
                self.norm_poly(prod.into_iter().map(|c| c as u16).collect())
            }
            _ => unreachable!("mixed representations"),
        }
    }

    pub fn inv(&self, a: &FqElem) -> FqElem {
        match a {
            FqElem::Zero => panic!("inverse of zero"),
            FqElem::Log(x) => FqElem::Log((self.order - x) % self.order),
            FqElem::Poly(_) => self.pow(a, self.order as i128 - 1),
        }
    }

    pub fn pow(&self, a: &FqElem, e: i128) -> FqElem {
        let e = e.rem_euclid(self.order as i128) as u64;
        match a {
            FqElem::Zero => {
                if e == 0 {
                    self.one()
                } else {
                    FqElem::Zero
                }
            }
            FqElem::Log(x) => {
                FqElem::Log(((*x as u128 * e as u128) % self.order as u128) as u64)
            }
            FqElem::Poly(v) => {
                let Repr::Poly { modulus } = &self.repr else {
                    unreachable!()
                };
                let xs: Vec<u64> = v.iter().map(|&c| c as u64).collect();
                let r = poly_pow_mod(&xs, e as u128, modulus, self.p);
                self.norm_poly(r.into_iter().map(|c| c as u16).collect())
            }
        }
    }

    /// The p^e-power map, an automorphism of every level.
    pub fn power_frobenius(&self, a: &FqElem, e: u32) -> FqElem {
        let exp = pow_mod(self.p as u128, e as u128, self.order as u128) as i128;
        self.pow(a, exp)
    }

    /// Canonical packed word for hashing and deterministic ordering.
    pub fn packed(&self, a: &FqElem) -> u64 {
        match a {
            FqElem::Zero => 0,
            FqElem::Log(x) => {
                let Repr::Zech { exp, .. } = &self.repr else {
                    unreachable!()
                };
                exp[*x as usize] as u64
            }
            FqElem::Poly(v) => {
                let mut w = 0u64;
                for &c in v.iter().rev() {
                    w = w * self.p + c as u64;
                }
                w
            }
        }
    }

    pub fn from_packed(&self, word: u64) -> FqElem {
        if word == 0 {
            return FqElem::Zero;
        }
        match &self.repr {
            Repr::Zech { log, .. } => FqElem::Log(log[word as usize] as u64),
            Repr::Poly { .. } => {
                let v = unpack_elem(self.p, self.m, word);
                self.norm_poly(v.into_iter().map(|c| c as u16).collect())
            }
        }
    }

    /// Iterate every field element in packed order (deterministic).
    pub fn elements(&self) -> impl Iterator<Item = FqElem> + '_ {
        (0..self.size()).map(|w| self.from_packed(w))
    }

    pub fn eq(&self, a: &FqElem, b: &FqElem) -> bool {
        a == b
    }
}

fn unpack_elem(p: u64, m: u32, mut word: u64) -> Vec<u64> {
    let mut v = vec![0u64; m as usize];
    for c in v.iter_mut() {
        *c = word % p;
        word /= p;
    }
    v
}

fn pack_elem(p: u64, v: &[u64]) -> u64 {
    let mut w = 0u64;
    for &c in v.iter().rev() {
        w = w * p + c;
    }
    w
}

fn is_one(v: &[u64]) -> bool {
    v[0] == 1 && v[1..].iter().all(|&c| c == 0)
}

// ---------------------------------------------------------------------------
// The tower: top field + compatible subfield generators + chart.
// ---------------------------------------------------------------------------

/// A compatible tower inside one top field GF(p^M). Levels are measured
/// over the base q = p^e: level m means GF(q^m) = GF(p^{em}).
pub struct FieldTower {
    pub p: u64,
    pub q: u64,
    /// log_p q
    pub e: u32,
    /// top level measured over p
    pub top: u32,
    pub field: Arc<Fq>,
    /// requested levels (over q)
    pub levels: Vec<u32>,
    /// generator of the top field
    g_top: FqElem,
    /// generator per p-level: g_m = g_top^{(p^M-1)/(p^m-1)}
    gens: HashMap<u32, FqElem>,
    /// prime factorization of p^M - 1, used by Pohlig–Hellman
    order_factors: Vec<(u64, u32)>,
}

impl FieldTower {
    /// Deterministic tower over GF(q), q = p^e, covering the given levels
    /// (over q). Same inputs produce bit-identical tables.
    pub fn build(p: u64, q: u64, levels: &[u32]) -> Result<FieldTower> {
        if !is_prime(p) {
            return Err(SltError::NotPrime(p));
        }
        let mut e = 0u32;
        let mut t = 1u64;
        while t < q {
            t = t.checked_mul(p).ok_or(SltError::NotAPowerOf { q, p })?;
            e += 1;
        }
        if t != q {
            return Err(SltError::NotAPowerOf { q, p });
        }
        let e = e.max(1);
        let top_over_q = levels.iter().copied().fold(1u64, |a, b| arith::lcm(a, b as u64)) as u32;
        let top = top_over_q * e;
        let field = Arc::new(Fq::new(p, top)?);
        let g_top = Self::find_generator(&field)?;
        let order = field.order;
        let mut gens = HashMap::new();
        let mut plevels: Vec<u32> = Vec::new();
        for &l in levels {
            for d in arith::divisors((l * e) as u64) {
                plevels.push(d as u32);
            }
        }
        plevels.sort_unstable();
        plevels.dedup();
        for &pm in &plevels {
            let sub_order = (p as u64).pow(pm) - 1;
            let idx = order / sub_order;
            gens.insert(pm, field.pow(&g_top, idx as i128));
        }
        let order_factors = factorize(order as u128)
            .into_iter()
            .map(|(l, k)| (l as u64, k))
            .collect();
        Ok(FieldTower {
            p,
            q,
            e,
            top,
            field,
            levels: levels.to_vec(),
            g_top,
            gens,
            order_factors,
        })
    }

    fn find_generator(field: &Fq) -> Result<FqElem> {
        let factors = factorize(field.order as u128);
        for word in 1..field.size() {
            let cand = field.from_packed(word);
            if field.is_zero(&cand) {
                continue;
            }
            let primitive = factors.iter().all(|(l, _)| {
                let e = (field.order as u128 / l) as i128;
                field.pow(&cand, e) != field.one()
            });
            if primitive {
                return Ok(cand);
            }
        }
        Err(SltError::Other("no primitive element found".into()))
    }

    /// Generator of the level-m subfield (m over q).
    pub fn generator(&self, m: u32) -> FqElem {
        self.gens
            .get(&(m * self.e))
            .cloned()
            .unwrap_or_else(|| panic!("level {m} not in tower"))
    }

    pub fn generator_plevel(&self, pm: u32) -> FqElem {
        self.gens
            .get(&pm)
            .cloned()
            .unwrap_or_else(|| panic!("p-level {pm} not in tower"))
    }

    pub fn top_generator(&self) -> FqElem {
        self.g_top.clone()
    }

    /// The distinguished primitive n-th root ζ = g^{(p^M-1)/n}; requires
    /// n | p^M - 1. This is the ζ of the chart: chart(ζ) = 1/n.
    pub fn zeta(&self, n: u64) -> Result<FqElem> {
        if n == 0 || self.field.order % n != 0 {
            return Err(SltError::Other(format!(
                "no primitive {n}-th root in GF({}^{})",
                self.p, self.top
            )));
        }
        Ok(self.field.pow(&self.g_top, (self.field.order / n) as i128))
    }

    /// g_top^k for an exponent k (mod p^M - 1).
    pub fn gen_pow(&self, k: i128) -> FqElem {
        self.field.pow(&self.g_top, k)
    }

    /// Discrete log base the top generator: g^dlog(x) = x.
    pub fn dlog(&self, x: &FqElem) -> Result<u64> {
        if self.field.is_zero(x) {
            return Err(SltError::DlogOfZero);
        }
        match x {
            FqElem::Log(_) => {
                // Zech representation: logs are stored relative to the
                // construction generator, which may differ from g_top only
                // if find_generator picked a different element; it cannot,
                // both scans use packed order, but translate defensively.
                let FqElem::Log(gl) = &self.g_top else {
                    unreachable!()
                };
                let FqElem::Log(xl) = x else { unreachable!() };
                // solve gl * t ≡ xl (mod order)
                let n = self.field.order as i128;
                let t = arith::solve_linear_mod(&[vec![*gl as i128]], &[*xl as i128], n)
                    .ok_or_else(|| SltError::Other("dlog translation failed".into()))?;
                // pick the solution that is a genuine power: any solution of
                // the congruence works since g_top is primitive
                Ok(arith::mod_reduce(t[0], n) as u64)
            }
            _ => self.pohlig_hellman(x),
        }
    }

    /// Pohlig–Hellman discrete log for polynomial-represented fields.
    fn pohlig_hellman(&self, x: &FqElem) -> Result<u64> {
        let n = self.field.order;
        let mut residues: Vec<(i128, i128)> = Vec::new();
        for &(l, k) in &self.order_factors {
            let le = (l as u128).pow(k) as u64;
            let cofactor = n / le;
            let g_i = self.field.pow(&self.g_top, cofactor as i128);
            let x_i = self.field.pow(x, cofactor as i128);
            // digit-lift base l
            let gamma = self.field.pow(&g_i, (le / l) as i128); // order l
            let baby = self.bsgs_table(&gamma, l);
            let mut xk = 0u64;
            let mut cur = x_i.clone();
            let g_inv = self.field.inv(&g_i);
            for j in 0..k {
                let exp = le / l.pow(j + 1);
                let t = self.field.pow(&cur, exp as i128);
                let d = self.bsgs_solve(&gamma, &baby, &t, l)?;
                xk += d * l.pow(j);
                let adj = self.field.pow(&g_inv, (d * l.pow(j)) as i128);
                cur = self.field.mul(&cur, &adj);
            }
            residues.push((xk as i128, le as i128));
        }
        // CRT
        let mut x0: i128 = 0;
        let mut m0: i128 = 1;
        for (r, m) in residues {
            let (g, s, _) = arith::egcd(m0, m);
            debug_assert_eq!(g, 1);
            let diff = arith::mod_reduce(r - x0, m);
            let add = arith::mod_reduce(diff * arith::mod_reduce(s, m), m);
            x0 += m0 * add;
            m0 *= m;
            x0 = arith::mod_reduce(x0, m0);
        }
        Ok(x0 as u64)
    }

    fn bsgs_table(&self, gamma: &FqElem, l: u64) -> HashMap<u64, u64> {
        let s = (l as f64).sqrt().ceil() as u64;
        let mut table = HashMap::new();
        let mut cur = self.field.one();
        for j in 0..s {
            table.entry(self.field.packed(&cur)).or_insert(j);
            cur = self.field.mul(&cur, gamma);
        }
        table
    }

    fn bsgs_solve(
        &self,
        gamma: &FqElem,
        baby: &HashMap<u64, u64>,
        target: &FqElem,
        l: u64,
    ) -> Result<u64> {
        let s = (l as f64).sqrt().ceil() as u64;
        let giant = self.field.inv(&self.field.pow(gamma, s as i128));
        let mut cur = target.clone();
        for i in 0..=s {
            if let Some(&j) = baby.get(&self.field.packed(&cur)) {
                return Ok((i * s + j) % l);
            }
            cur = self.field.mul(&cur, &giant);
        }
        Err(SltError::Other("baby-step giant-step failed".into()))
    }

    /// The chart to (Q/Z)_{p'}: x ↦ dlog(x)/(p^M - 1) as a reduced fraction.
    /// Restricted to the level-m subfield its image is (1/(p^{em}-1))·Z.
    pub fn chart(&self, x: &FqElem) -> Result<(u64, u64)> {
        if self.field.is_zero(x) {
            return Err(SltError::ChartOfZero);
        }
        let d = self.dlog(x)?;
        let n = self.field.order;
        if d == 0 {
            return Ok((0, 1));
        }
        let g = gcd(d as i128, n as i128) as u64;
        Ok((d / g, n / g))
    }

    /// Smallest level (over p) whose subfield contains x.
    pub fn plevel_of(&self, x: &FqElem) -> u32 {
        for d in arith::divisors(self.top as u64) {
            let pm = d as u32;
            let fixed = self.field.pow(x, (self.p as i128).pow(pm));
            if fixed == *x {
                return pm;
            }
        }
        self.top
    }

    /// Field trace from the level-em subfield down to F_p, as an integer.
    pub fn trace_to_prime(&self, x: &FqElem, plevel: u32) -> u64 {
        let mut acc = FqElem::Zero;
        let mut cur = x.clone();
        for _ in 0..plevel {
            acc = self.field.add(&acc, &cur);
            cur = self.field.pow(&cur, self.p as i128);
        }
        // acc lies in F_p: packed word is the residue
        self.field.packed(&acc)
    }

    /// All elements of the level-m (over q) subfield, deterministic order:
    /// zero then ascending powers of the level generator.
    pub fn subfield_elements(&self, m: u32) -> Vec<FqElem> {
        let g = self.generator(m);
        let sub_order = (self.p as u64).pow(m * self.e) - 1;
        let mut out = Vec::with_capacity(sub_order as usize + 1);
        out.push(FqElem::Zero);
        let mut cur = self.field.one();
        for _ in 0..sub_order {
            out.push(cur.clone());
            cur = self.field.mul(&cur, &g);
        }
        out
    }

    /// The q-power Frobenius at the ambient level.
    pub fn frobenius_q(&self, x: &FqElem) -> FqElem {
        self.field.pow(x, self.q as i128)
    }
}

// ---------------------------------------------------------------------------
// Standalone witness fields GF(p^m) with a prime-field embedding only.
// ---------------------------------------------------------------------------

/// A field used for Lang witness solving at levels outside the chart tower.
/// No generator, no chart; just deterministic arithmetic.
pub struct WitnessField {
    pub field: Fq,
}

impl WitnessField {
    pub fn new(p: u64, m: u32) -> Result<WitnessField> {
        Ok(WitnessField {
            field: Fq::new(p, m)?,
        })
    }

    pub fn embed_prime(&self, residue: u64) -> FqElem {
        self.field.from_int(residue)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_polynomials_match_search() {
        for &(p, m, word) in SHIPPED_POLYS {
            let searched = search_defining_polynomial(p, m);
            assert_eq!(pack_poly(p, &searched), word, "GF({p}^{m})");
        }
    }

    #[test]
    fn tower_containment_examples() {
        // (2, 4, {1,2,3}) → GF(4) ⊂ GF(16) ⊂ GF(64)
        let t = FieldTower::build(2, 4, &[1, 2, 3]).unwrap();
        assert_eq!(t.top, 12); // lcm(1,2,3) * e = 6 * 2
        let g1 = t.generator(1);
        assert_eq!(t.field.pow(&g1, 3), t.field.one()); // |GF(4)^x| = 3
        // (3, 3, {1,2}) → |GF(9)^x| = 8
        let t = FieldTower::build(3, 3, &[1, 2]).unwrap();
        let g2 = t.generator(2);
        let mut ord = 1;
        let mut cur = g2.clone();
        while cur != t.field.one() {
            cur = t.field.mul(&cur, &g2);
            ord += 1;
        }
        assert_eq!(ord, 8);
    }

    #[test]
    fn capacity_rule_uses_polynomial_rep() {
        // (7, 7, {1,2,12}): level 12 exceeds the Zech budget
        let t = FieldTower::build(7, 7, &[1, 2, 12]).unwrap();
        assert!(matches!(t.field.repr, Repr::Poly { .. }));
        assert!(matches!(
            FieldTower::build(3, 3, &[1, 2]).unwrap().field.repr,
            Repr::Zech { .. }
        ));
    }

    #[test]
    fn composite_characteristic_rejected() {
        assert!(FieldTower::build(4, 4, &[1]).is_err());
        assert!(FieldTower::build(6, 6, &[1]).is_err());
    }

    #[test]
    fn chart_basics() {
        let t = FieldTower::build(5, 5, &[1, 2]).unwrap();
        assert_eq!(t.chart(&t.field.one()).unwrap(), (0, 1));
        // chart(g_1) = 1/(q-1)
        let g1 = t.generator(1);
        assert_eq!(t.chart(&g1).unwrap(), (1, 4));
        // chart(g_1^2) = 2/(q-1)
        let g1sq = t.field.mul(&g1, &g1);
        assert_eq!(t.chart(&g1sq).unwrap(), (1, 2)); // 2/4 reduced
        // chart(ζ) = 1/n for the distinguished ζ
        let z = t.zeta(2).unwrap();
        assert_eq!(t.chart(&z).unwrap(), (1, 2));
        assert!(t.chart(&FqElem::Zero).is_err());
    }

    #[test]
    fn chart_is_homomorphism_on_level() {
        let t = FieldTower::build(3, 3, &[1, 2]).unwrap();
        let n = t.field.order;
        for x in t.field.elements() {
            for y in t.field.elements() {
                if t.field.is_zero(&x) || t.field.is_zero(&y) {
                    continue;
                }
                let dx = t.dlog(&x).unwrap();
                let dy = t.dlog(&y).unwrap();
                let dxy = t.dlog(&t.field.mul(&x, &y)).unwrap();
                assert_eq!((dx + dy) % n, dxy);
            }
        }
    }

    #[test]
    fn dlog_pohlig_hellman_matches_table_on_embedded_subfield() {
        // exhaustive table on GF(49), embedded into GF(7^12)
        let small = FieldTower::build(7, 7, &[1, 2]).unwrap();
        let big = FieldTower::build(7, 7, &[1, 2, 12]).unwrap();
        let g_small = small.generator(2); // generates GF(49)^x
        let g_big2 = big.generator_plevel(2); // compatible generator inside GF(7^12)
        let small_step = small.field.order / 48;
        let big_step = big.field.order / 48;
        let mut cur_small = small.field.one();
        let mut cur_big = big.field.one();
        for k in 0..48u64 {
            // table dlog in the small tower: cur_small = g_2^k there
            let d_small = small.dlog(&cur_small).unwrap();
            assert_eq!(d_small, k * small_step % small.field.order);
            // Pohlig–Hellman dlog of the embedded element agrees
            let d_big = big.dlog(&cur_big).unwrap();
            assert_eq!(d_big, k * big_step % big.field.order);
            cur_small = small.field.mul(&cur_small, &g_small);
            cur_big = big.field.mul(&cur_big, &g_big2);
        }
    }

    #[test]
    fn frobenius_fixes_exactly_the_subfield() {
        let t = FieldTower::build(3, 3, &[1, 2]).unwrap();
        let mut fixed = 0;
        for x in t.field.elements() {
            if t.frobenius_q(&x) == x {
                fixed += 1;
            }
        }
        assert_eq!(fixed, 3); // F_q inside GF(q^2)
        // frobenius is an automorphism: check additivity exhaustively
        for x in t.field.elements() {
            for y in t.field.elements() {
                let lhs = t.frobenius_q(&t.field.add(&x, &y));
                let rhs = t.field.add(&t.frobenius_q(&x), &t.frobenius_q(&y));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn dlog_is_homomorphism_property() {
        let t = FieldTower::build(2, 2, &[1, 2, 3]).unwrap();
        assert_eq!(t.dlog(&t.top_generator()).unwrap(), 1);
        let n = t.field.order;
        let a = t.gen_pow(17);
        let b = t.gen_pow(23);
        let ab = t.field.mul(&a, &b);
        assert_eq!(t.dlog(&ab).unwrap(), (17 + 23) % n);
    }
}
