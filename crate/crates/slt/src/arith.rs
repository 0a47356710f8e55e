//! Integer and modular arithmetic helpers: gcd/CRT, trial-division
//! factorization, small-prime tests, linear congruence systems via Smith
//! normal form, and dense linear algebra over prime fields.

use crate::error::{Result, SltError};

pub fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Extended gcd: returns (g, x, y) with a*x + b*y = g >= 0.
pub fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = egcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / (gcd(a as i128, b as i128) as u64) * b
}

pub fn mod_reduce(a: i128, n: i128) -> i128 {
    let r = a % n;
    if r < 0 {
        r + n
    } else {
        r
    }
}

/// Inverse of a mod n when gcd(a, n) = 1.
pub fn inv_mod(a: i128, n: i128) -> Option<i128> {
    let (g, x, _) = egcd(mod_reduce(a, n), n);
    if g == 1 {
        Some(mod_reduce(x, n))
    } else {
        None
    }
}

pub fn pow_mod(mut base: u128, mut exp: u128, modulus: u128) -> u128 {
    if modulus == 1 {
        return 0;
    }
    let mut acc: u128 = 1;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, modulus);
        }
        base = mulmod(base, base, modulus);
        exp >>= 1;
    }
    acc
}

fn mulmod(a: u128, b: u128, m: u128) -> u128 {
    // m stays below 2^64 in this crate, so the product fits in u128.
    debug_assert!(m <= u64::MAX as u128);
    (a % m) * (b % m) % m
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    // Deterministic Miller-Rabin for u64.
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a as u128, d as u128, n as u128) as u64;
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = (mulmod(x as u128, x as u128, n as u128)) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization by trial division; sufficient for every modulus this
/// crate touches (largest prime factors are ~1e4).
pub fn factorize(mut n: u128) -> Vec<(u128, u32)> {
    let mut out = Vec::new();
    let mut d: u128 = 2;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn euler_phi(n: u64) -> u64 {
    let mut phi = n as u128;
    for (p, _) in factorize(n as u128) {
        phi = phi / p * (p - 1);
    }
    phi as u64
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, e) in factorize(n as u128) {
        let mut next = Vec::new();
        for d in &ds {
            let mut pk = 1u64;
            for _ in 0..=e {
                next.push(d * pk);
                pk = pk.saturating_mul(p as u64);
            }
        }
        // the inner loop pushes d * p^0 .. d * p^e
        next.sort_unstable();
        next.dedup();
        ds = next;
    }
    ds.sort_unstable();
    ds
}

/// Order of `a` in (Z/n)^x given the factorization of a multiple `m` of it.
pub fn mult_order_mod(a: u128, n: u128, group_order: u128) -> u128 {
    let mut ord = group_order;
    for (p, e) in factorize(group_order) {
        for _ in 0..e {
            if pow_mod(a, ord / p, n) == 1 {
                ord /= p;
            } else {
                break;
            }
        }
    }
    ord
}

// ---------------------------------------------------------------------------
// Linear congruence systems A x ≡ b (mod n) via Smith normal form.
// ---------------------------------------------------------------------------

/// Smith normal form over Z for small dense matrices: returns (u, d, v) with
/// u * a * v = d, u and v unimodular, d diagonal (as a rows x cols matrix).
pub fn smith_normal_form(a: &[Vec<i128>]) -> (Vec<Vec<i128>>, Vec<Vec<i128>>, Vec<Vec<i128>>) {
    let rows = a.len();
    let cols = a[0].len();
    let mut d: Vec<Vec<i128>> = a.to_vec();
    let mut u = identity(rows);
    let mut v = identity(cols);

    let mut t = 0;
    while t < rows.min(cols) {
        // Find a pivot (smallest nonzero magnitude) in the remaining block.
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if d[i][j] != 0
                    && pivot.is_none_or(|(pi, pj)| d[i][j].abs() < d[pi][pj].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        d.swap(t, pi);
        u.swap(t, pi);
        swap_cols(&mut d, t, pj);
        swap_cols(&mut v, t, pj);

        let mut again = true;
        while again {
            again = false;
            for i in t + 1..rows {
                if d[i][t] != 0 {
                    let q = div_round(d[i][t], d[t][t]);
                    row_sub(&mut d, i, t, q);
                    row_sub(&mut u, i, t, q);
                    if d[i][t] != 0 {
                        d.swap(t, i);
                        u.swap(t, i);
                        again = true;
                    }
                }
            }
            for j in t + 1..cols {
                if d[t][j] != 0 {
                    let q = div_round(d[t][j], d[t][t]);
                    col_sub(&mut d, j, t, q);
                    col_sub(&mut v, j, t, q);
                    if d[t][j] != 0 {
                        swap_cols(&mut d, t, j);
                        swap_cols(&mut v, t, j);
                        again = true;
                    }
                }
            }
        }
        t += 1;
    }
    // Fix divisibility chain and signs.
    for i in 0..rows.min(cols) {
        if d[i][i] < 0 {
            for j in 0..cols {
                d[i][j] = -d[i][j];
            }
            for r in &mut u[i] {
                *r = -*r;
            }
        }
    }
    (u, d, v)
}

fn identity(n: usize) -> Vec<Vec<i128>> {
    (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect()
}

fn swap_cols(m: &mut [Vec<i128>], a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

fn row_sub(m: &mut [Vec<i128>], i: usize, t: usize, q: i128) {
    let trow = m[t].clone();
    for (x, tv) in m[i].iter_mut().zip(trow) {
        *x -= q * tv;
    }
}

fn col_sub(m: &mut [Vec<i128>], j: usize, t: usize, q: i128) {
    for row in m.iter_mut() {
        let tv = row[t];
        row[j] -= q * tv;
    }
}

fn div_round(a: i128, b: i128) -> i128 {
    // Round-to-nearest keeps entries small during SNF reduction.
    let q = a / b;
    let r = a - q * b;
    if 2 * r.abs() > b.abs() {
        q + r.signum() * b.signum()
    } else {
        q
    }
}

/// One solution of A x ≡ b (mod n), if any, via SNF. A is rows x cols.
pub fn solve_linear_mod(a: &[Vec<i128>], b: &[i128], n: i128) -> Option<Vec<i128>> {
    let rows = a.len();
    let cols = a[0].len();
    let (u, d, v) = smith_normal_form(a);
    // c = u * b
    let c: Vec<i128> = (0..rows)
        .map(|i| {
            (0..rows)
                .map(|k| mod_reduce(u[i][k] * mod_reduce(b[k], n), n))
                .fold(0, |s, t| mod_reduce(s + t, n))
        })
        .collect();
    // solve d y ≡ c
    let mut y = vec![0i128; cols];
    for i in 0..rows {
        let di = if i < cols { d[i][i] } else { 0 };
        let ci = c[i];
        if di == 0 {
            if ci % n != 0 {
                return None;
            }
            continue;
        }
        let g = gcd(di, n);
        if ci % g != 0 {
            return None;
        }
        let n_g = n / g;
        let inv = inv_mod(di / g, n_g)?;
        y[i] = mod_reduce((ci / g) * inv, n_g);
    }
    // x = v * y
    let x: Vec<i128> = (0..cols)
        .map(|j| {
            (0..cols)
                .map(|k| mod_reduce(v[j][k] * y[k], n))
                .fold(0, |s, t| mod_reduce(s + t, n))
        })
        .collect();
    Some(x)
}

// ---------------------------------------------------------------------------
// Dense linear algebra over a prime field F_p (p < 2^31), row-major u64.
// ---------------------------------------------------------------------------

#[derive(Clone)]
pub struct FpMatrix {
    pub p: u64,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u64>,
}

impl FpMatrix {
    pub fn zero(p: u64, rows: usize, cols: usize) -> Self {
        FpMatrix {
            p,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v % self.p;
    }

    /// Basis of the right kernel, reduced and deterministic.
    pub fn kernel_basis(&self) -> Vec<Vec<u64>> {
        let p = self.p;
        let mut m = self.clone();
        let mut pivots: Vec<(usize, usize)> = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row >= m.rows {
                break;
            }
            let Some(pr) = (row..m.rows).find(|&r| m.at(r, col) != 0) else {
                continue;
            };
            for j in 0..m.cols {
                let tmp = m.at(row, j);
                m.set(row, j, m.at(pr, j));
                m.set(pr, j, tmp);
            }
            let inv = inv_mod(m.at(row, col) as i128, p as i128).expect("prime field") as u64;
            for j in 0..m.cols {
                m.set(row, j, m.at(row, j) * inv % p);
            }
            for r in 0..m.rows {
                if r != row && m.at(r, col) != 0 {
                    let f = m.at(r, col);
                    for j in 0..m.cols {
                        let v = (m.at(r, j) + p - f * m.at(row, j) % p) % p;
                        m.set(r, j, v);
                    }
                }
            }
            pivots.push((row, col));
            row += 1;
        }
        let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
        let free_cols: Vec<usize> = (0..m.cols).filter(|c| !pivot_cols.contains(c)).collect();
        let mut basis = Vec::new();
        for &fc in &free_cols {
            let mut v = vec![0u64; m.cols];
            v[fc] = 1;
            for &(r, c) in &pivots {
                v[c] = (p - m.at(r, fc)) % p;
            }
            basis.push(v);
        }
        basis
    }
}

/// Iterate over all F_p-combinations of `basis` in lexicographic coefficient
/// order (skipping the zero vector), calling `f` until it returns true.
/// Returns the first accepted combination.
pub fn first_kernel_hit<F: FnMut(&[u64]) -> bool>(
    p: u64,
    dim: usize,
    basis: &[Vec<u64>],
    mut f: F,
) -> Option<Vec<u64>> {
    let k = basis.len();
    let mut coeffs = vec![0u64; k];
    let total: u128 = (p as u128).pow(k as u32);
    let mut vec = vec![0u64; dim];
    for step in 1..total {
        // increment base-p counter
        let mut carry = step;
        for c in coeffs.iter_mut() {
            *c = (carry % p as u128) as u64;
            carry /= p as u128;
        }
        for v in vec.iter_mut() {
            *v = 0;
        }
        for (ci, bv) in coeffs.iter().zip(basis) {
            if *ci != 0 {
                for (x, b) in vec.iter_mut().zip(bv) {
                    *x = (*x + ci * b) % p;
                }
            }
        }
        if f(&vec) {
            return Some(vec);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn egcd_and_inverse() {
        let (g, x, y) = egcd(240, 46);
        assert_eq!(g, 2);
        assert_eq!(240 * x + 46 * y, 2);
        assert_eq!(inv_mod(3, 7), Some(5));
        assert_eq!(inv_mod(2, 4), None);
    }

    #[test]
    fn factorize_known() {
        assert_eq!(factorize(4095), vec![(3, 2), (5, 1), (7, 1), (13, 1)]);
        // 11^10 - 1 = 2^3 * 3 * 5^2 * 3221 * 13421
        let n = 11u128.pow(10) - 1;
        assert_eq!(
            factorize(n),
            vec![(2, 3), (3, 1), (5, 2), (3221, 1), (13421, 1)]
        );
    }

    #[test]
    fn primes() {
        assert!(is_prime(2));
        assert!(is_prime(337));
        assert!(is_prime(1093));
        assert!(!is_prime(1));
        assert!(!is_prime(169));
    }

    #[test]
    fn snf_solves_congruences() {
        // 2x + 3y ≡ 1, x + y ≡ 2 (mod 5)
        let a = vec![vec![2, 3], vec![1, 1]];
        let x = solve_linear_mod(&a, &[1, 2], 5).unwrap();
        assert_eq!(mod_reduce(2 * x[0] + 3 * x[1], 5), 1);
        assert_eq!(mod_reduce(x[0] + x[1], 5), 2);
        // unsolvable: 2x ≡ 1 (mod 4)
        assert!(solve_linear_mod(&[vec![2]], &[1], 4).is_none());
        // singular but solvable: 2x + 2y ≡ 2 (mod 4)
        let x = solve_linear_mod(&[vec![2, 2]], &[2], 4).unwrap();
        assert_eq!(mod_reduce(2 * x[0] + 2 * x[1], 4), 2);
    }

    #[test]
    fn fp_kernel() {
        // x + y + z = 0 over F_3 has kernel rank 2
        let mut m = FpMatrix::zero(3, 1, 3);
        m.set(0, 0, 1);
        m.set(0, 1, 1);
        m.set(0, 2, 1);
        let b = m.kernel_basis();
        assert_eq!(b.len(), 2);
        for v in &b {
            assert_eq!((v[0] + v[1] + v[2]) % 3, 0);
        }
    }
}
