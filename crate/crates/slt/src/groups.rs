//! Concrete finite realizations of GL_n, SL_n, PGL_n, U, B, the diagonal
//! tori, both Frobenius maps, and the disconnected centralizer model
//! T* ⋊ ⟨c⟩ in exponent coordinates.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::arith::{self, mod_reduce};
use crate::error::{Result, SltError};
use crate::gf::{FieldTower, Fq, FqElem};

/// Enumeration budget for full element tables.
const TABLE_BUDGET: u128 = 1 << 24;

#[derive(Clone, Copy, PartialEq, Eq, Debug, serde::Serialize, serde::Deserialize)]
pub enum Family {
    Gl,
    Sl,
    Pgl,
    UpperUnipotent,
    Borel,
    TorusSl,
    TorusGl,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, serde::Serialize, serde::Deserialize)]
pub enum Frob {
    Plus,
    Minus,
}

impl Frob {
    pub fn eps(self) -> i64 {
        match self {
            Frob::Plus => 1,
            Frob::Minus => -1,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, serde::Serialize, serde::Deserialize)]
pub struct GroupSpec {
    pub family: Family,
    pub n: u32,
    pub q: u64,
    pub frob: Frob,
    /// realization level: points taken in GF(q^level)
    pub level: u32,
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fam = match self.family {
            Family::Gl => "GL",
            Family::Sl => "SL",
            Family::Pgl => "PGL",
            Family::UpperUnipotent => "U",
            Family::Borel => "B",
            Family::TorusSl => "T",
            Family::TorusGl => "Ttilde",
        };
        let sign = match self.frob {
            Frob::Plus => "+",
            Frob::Minus => "-",
        };
        write!(f, "{}{}(q={},eps={},m={})", fam, self.n, self.q, sign, self.level)
    }
}

// ---------------------------------------------------------------------------
// Matrices over one field instance.
// ---------------------------------------------------------------------------

/// Square matrix with entries in a fixed `Fq`. Operations take the field
/// explicitly so the same type serves tower fields and witness fields.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mat {
    pub n: u32,
    pub e: Vec<FqElem>,
}

impl Mat {
    pub fn identity(fq: &Fq, n: u32) -> Mat {
        let mut e = vec![FqElem::Zero; (n * n) as usize];
        for i in 0..n as usize {
            e[i * n as usize + i] = fq.one();
        }
        Mat { n, e }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &FqElem {
        &self.e[i * self.n as usize + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: FqElem) {
        self.e[i * self.n as usize + j] = v;
    }

    pub fn mul(&self, fq: &Fq, other: &Mat) -> Mat {
        let n = self.n as usize;
        let mut e = vec![FqElem::Zero; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.at(i, k);
                if fq.is_zero(a) {
                    continue;
                }
                for j in 0..n {
                    let b = other.at(k, j);
                    if !fq.is_zero(b) {
                        e[i * n + j] = fq.add(&e[i * n + j], &fq.mul(a, b));
                    }
                }
            }
        }
        Mat { n: self.n, e }
    }

    pub fn det(&self, fq: &Fq) -> FqElem {
        let n = self.n as usize;
        match n {
            1 => self.at(0, 0).clone(),
            2 => fq.sub(
                &fq.mul(self.at(0, 0), self.at(1, 1)),
                &fq.mul(self.at(0, 1), self.at(1, 0)),
            ),
            3 => {
                let m = |i: usize, j: usize| self.at(i, j);
                let t1 = fq.mul(
                    m(0, 0),
                    &fq.sub(&fq.mul(m(1, 1), m(2, 2)), &fq.mul(m(1, 2), m(2, 1))),
                );
                let t2 = fq.mul(
                    m(0, 1),
                    &fq.sub(&fq.mul(m(1, 0), m(2, 2)), &fq.mul(m(1, 2), m(2, 0))),
                );
                let t3 = fq.mul(
                    m(0, 2),
                    &fq.sub(&fq.mul(m(1, 0), m(2, 1)), &fq.mul(m(1, 1), m(2, 0))),
                );
                fq.add(&fq.sub(&t1, &t2), &t3)
            }
            _ => panic!("determinant only implemented for n <= 3"),
        }
    }

    /// Inverse via the adjugate (n ≤ 3).
    pub fn inv(&self, fq: &Fq) -> Mat {
        let n = self.n as usize;
        let det = self.det(fq);
        assert!(!fq.is_zero(&det), "singular matrix");
        let dinv = fq.inv(&det);
        let mut out = Mat {
            n: self.n,
            e: vec![FqElem::Zero; n * n],
        };
        match n {
            1 => out.set(0, 0, dinv),
            2 => {
                out.set(0, 0, fq.mul(self.at(1, 1), &dinv));
                out.set(0, 1, fq.mul(&fq.neg(self.at(0, 1)), &dinv));
                out.set(1, 0, fq.mul(&fq.neg(self.at(1, 0)), &dinv));
                out.set(1, 1, fq.mul(self.at(0, 0), &dinv));
            }
            3 => {
                for i in 0..3 {
                    for j in 0..3 {
                        // inverse entry (i, j) = cofactor C(j, i) / det
                        let rows: Vec<usize> = (0..3).filter(|&r| r != j).collect();
                        let cols: Vec<usize> = (0..3).filter(|&c| c != i).collect();
                        let a = fq.mul(self.at(rows[0], cols[0]), self.at(rows[1], cols[1]));
                        let b = fq.mul(self.at(rows[0], cols[1]), self.at(rows[1], cols[0]));
                        let minor = fq.sub(&a, &b);
                        let c = if (i + j) % 2 == 1 {
                            fq.neg(&minor)
                        } else {
                            minor
                        };
                        out.set(i, j, fq.mul(&c, &dinv));
                    }
                }
            }
            _ => panic!("inverse only implemented for n <= 3"),
        }
        out
    }

    pub fn transpose(&self) -> Mat {
        let n = self.n as usize;
        let mut e = vec![FqElem::Zero; n * n];
        for i in 0..n {
            for j in 0..n {
                e[j * n + i] = self.at(i, j).clone();
            }
        }
        Mat { n: self.n, e }
    }

    pub fn map_entries<F: Fn(&FqElem) -> FqElem>(&self, f: F) -> Mat {
        Mat {
            n: self.n,
            e: self.e.iter().map(f).collect(),
        }
    }

    /// Packed key for hashing and deterministic ordering.
    pub fn key(&self, fq: &Fq) -> Vec<u64> {
        self.e.iter().map(|x| fq.packed(x)).collect()
    }

    pub fn order(&self, fq: &Fq) -> u64 {
        let id = Mat::identity(fq, self.n);
        let mut cur = self.clone();
        let mut k = 1;
        while cur != id {
            cur = cur.mul(fq, self);
            k += 1;
            assert!(k < 1_000_000, "element order runaway");
        }
        k
    }

    pub fn rank(&self, fq: &Fq) -> usize {
        let n = self.n as usize;
        let mut m = self.clone();
        let mut rank = 0;
        for col in 0..n {
            let Some(p) = (rank..n).find(|&r| !fq.is_zero(m.at(r, col))) else {
                continue;
            };
            for j in 0..n {
                let a = m.at(rank, j).clone();
                let b = m.at(p, j).clone();
                m.set(rank, j, b);
                m.set(p, j, a);
            }
            let inv = fq.inv(m.at(rank, col));
            for r in 0..n {
                if r != rank && !fq.is_zero(m.at(r, col)) {
                    let f = fq.mul(m.at(r, col), &inv);
                    for j in 0..n {
                        let v = fq.sub(m.at(r, j), &fq.mul(&f, m.at(rank, j)));
                        m.set(r, j, v);
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn trace(&self, fq: &Fq) -> FqElem {
        let mut t = FqElem::Zero;
        for i in 0..self.n as usize {
            t = fq.add(&t, self.at(i, i));
        }
        t
    }
}

/// F₊ raises all matrix entries to the q-th power; F₋ is F₊ composed with
/// transpose-inverse. On exponent coordinates of T* the same maps act by
/// multiplication by εq (see [`SemidirectTorus::frobenius`]).
pub fn frobenius(fq: &Fq, q: u64, frob: Frob, x: &Mat) -> Mat {
    match frob {
        Frob::Plus => x.map_entries(|v| fq.pow(v, q as i128)),
        Frob::Minus => x
            .inv(fq)
            .transpose()
            .map_entries(|v| fq.pow(v, q as i128)),
    }
}

/// Canonical PGL representative: scale so the first nonzero entry in
/// row-major order equals 1.
pub fn pgl_canonical(fq: &Fq, x: &Mat) -> Mat {
    let first = x.e.iter().find(|v| !fq.is_zero(v)).expect("nonzero matrix");
    let s = fq.inv(first);
    x.map_entries(|v| fq.mul(v, &s))
}

// ---------------------------------------------------------------------------
// Enumerated matrix groups.
// ---------------------------------------------------------------------------

pub struct MatrixGroup {
    pub spec: GroupSpec,
    pub tower: Arc<FieldTower>,
    /// deterministic element list; index 0 is the identity
    pub elems: Vec<Mat>,
    index: HashMap<Vec<u64>, u32>,
    /// PGL-style groups canonicalize after every product
    canonical: bool,
}

impl MatrixGroup {
    pub fn fq(&self) -> &Fq {
        &self.tower.field
    }

    pub fn size(&self) -> usize {
        self.elems.len()
    }

    pub fn id(&self) -> Mat {
        Mat::identity(self.fq(), self.spec.n)
    }

    pub fn mul(&self, a: &Mat, b: &Mat) -> Mat {
        let m = a.mul(self.fq(), b);
        if self.canonical {
            pgl_canonical(self.fq(), &m)
        } else {
            m
        }
    }

    pub fn inv(&self, a: &Mat) -> Mat {
        let m = a.inv(self.fq());
        if self.canonical {
            pgl_canonical(self.fq(), &m)
        } else {
            m
        }
    }

    pub fn contains(&self, a: &Mat) -> bool {
        self.index.contains_key(&a.key(self.fq()))
    }

    pub fn index_of(&self, a: &Mat) -> Option<usize> {
        self.index.get(&a.key(self.fq())).map(|&i| i as usize)
    }

    pub fn order_of(&self, a: &Mat) -> u64 {
        let id = self.id();
        let mut cur = a.clone();
        let mut k = 1u64;
        while cur != id {
            cur = self.mul(&cur, a);
            k += 1;
        }
        k
    }

    /// Build the F_ε-fixed subgroup of the family realized over GF(q^level).
    pub fn build(tower: &Arc<FieldTower>, spec: GroupSpec) -> Result<MatrixGroup> {
        let fq = &tower.field;
        let n = spec.n;
        let qm_sub = tower.subfield_elements(spec.level);
        let qm = qm_sub.len() as u128;

        let fixed = |x: &Mat| frobenius(fq, spec.q, spec.frob, x) == *x;

        let mut elems: Vec<Mat> = Vec::new();
        match spec.family {
            Family::Gl | Family::Sl | Family::Pgl => {
                let cells = n * n;
                let cand = qm.checked_pow(cells).unwrap_or(u128::MAX);
                if cand > TABLE_BUDGET {
                    return Err(SltError::Capacity {
                        what: format!("enumeration of {spec}"),
                        size: cand,
                        budget: TABLE_BUDGET,
                    });
                }
                let mut seen: HashMap<Vec<u64>, ()> = HashMap::new();
                let mut counters = vec![0usize; cells as usize];
                loop {
                    let mat = Mat {
                        n,
                        e: counters.iter().map(|&c| qm_sub[c].clone()).collect(),
                    };
                    let det = mat.det(fq);
                    let ok_det = match spec.family {
                        Family::Sl => det == fq.one(),
                        _ => !fq.is_zero(&det),
                    };
                    if ok_det && fixed(&mat) {
                        if spec.family == Family::Pgl {
                            let c = pgl_canonical(fq, &mat);
                            let k = c.key(fq);
                            if !seen.contains_key(&k) {
                                seen.insert(k, ());
                                elems.push(c);
                            }
                        } else {
                            elems.push(mat);
                        }
                    }
                    if !advance(&mut counters, qm_sub.len()) {
                        break;
                    }
                }
            }
            Family::UpperUnipotent | Family::Borel => {
                let free = n * (n - 1) / 2;
                let positions: Vec<(usize, usize)> = (0..n as usize)
                    .flat_map(|i| ((i + 1)..n as usize).map(move |j| (i, j)))
                    .collect();
                let units: Vec<FqElem> =
                    qm_sub.iter().filter(|x| !fq.is_zero(x)).cloned().collect();
                let diag_choices: Vec<Vec<FqElem>> = if spec.family == Family::UpperUnipotent {
                    vec![vec![fq.one(); n as usize]]
                } else {
                    cartesian(&units, n as usize)
                };
                let cand = qm.pow(free) * diag_choices.len() as u128;
                if cand > TABLE_BUDGET {
                    return Err(SltError::Capacity {
                        what: format!("enumeration of {spec}"),
                        size: cand,
                        budget: TABLE_BUDGET,
                    });
                }
                for diag in &diag_choices {
                    for up in cartesian(&qm_sub, free as usize) {
                        let mut mat = Mat {
                            n,
                            e: vec![FqElem::Zero; (n * n) as usize],
                        };
                        for (i, d) in diag.iter().enumerate() {
                            mat.set(i, i, d.clone());
                        }
                        for (&(i, j), v) in positions.iter().zip(up) {
                            mat.set(i, j, v);
                        }
                        if fixed(&mat) {
                            elems.push(mat);
                        }
                    }
                }
            }
            Family::TorusSl | Family::TorusGl => {
                let units: Vec<FqElem> =
                    qm_sub.iter().filter(|x| !fq.is_zero(x)).cloned().collect();
                for d in cartesian(&units, n as usize) {
                    let mut mat = Mat {
                        n,
                        e: vec![FqElem::Zero; (n * n) as usize],
                    };
                    for (i, v) in d.iter().enumerate() {
                        mat.set(i, i, v.clone());
                    }
                    let ok = match spec.family {
                        Family::TorusSl => mat.det(fq) == fq.one(),
                        _ => true,
                    };
                    if ok && fixed(&mat) {
                        elems.push(mat);
                    }
                }
            }
        }

        let canonical = spec.family == Family::Pgl;
        Ok(Self::finish(tower, spec, elems, canonical))
    }

    /// Wrap an explicit element list (must be closed under product).
    pub fn from_elements(
        tower: &Arc<FieldTower>,
        spec: GroupSpec,
        elems: Vec<Mat>,
        canonical: bool,
    ) -> MatrixGroup {
        Self::finish(tower, spec, elems, canonical)
    }

    fn finish(
        tower: &Arc<FieldTower>,
        spec: GroupSpec,
        mut elems: Vec<Mat>,
        canonical: bool,
    ) -> MatrixGroup {
        let fq = &tower.field;
        let id = Mat::identity(fq, spec.n);
        elems.sort_by_cached_key(|m| m.key(fq));
        elems.dedup();
        if let Some(pos) = elems.iter().position(|m| *m == id) {
            elems.swap(0, pos);
        }
        let mut index = HashMap::with_capacity(elems.len());
        for (i, m) in elems.iter().enumerate() {
            index.insert(m.key(fq), i as u32);
        }
        MatrixGroup {
            spec,
            tower: tower.clone(),
            elems,
            index,
            canonical,
        }
    }

    /// π: GL → PGL on elements (canonical representative).
    pub fn project_pgl(&self, x: &Mat) -> Mat {
        pgl_canonical(self.fq(), x)
    }
}

fn advance(counters: &mut [usize], base: usize) -> bool {
    for c in counters.iter_mut() {
        *c += 1;
        if *c < base {
            return true;
        }
        *c = 0;
    }
    false
}

fn cartesian(choices: &[FqElem], k: usize) -> Vec<Vec<FqElem>> {
    let mut out: Vec<Vec<FqElem>> = vec![vec![]];
    for _ in 0..k {
        let mut next = Vec::with_capacity(out.len() * choices.len());
        for prefix in &out {
            for c in choices {
                let mut v = prefix.clone();
                v.push(c.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

// ---------------------------------------------------------------------------
// Conjugacy classes.
// ---------------------------------------------------------------------------

pub struct ConjClassSet {
    /// element index of the representative, per class
    pub reps: Vec<usize>,
    pub sizes: Vec<usize>,
    /// class index per element index
    pub of_element: Vec<u32>,
}

impl ConjClassSet {
    pub fn count(&self) -> usize {
        self.reps.len()
    }
}

/// Class decomposition by one full conjugation scan per class: for each
/// still-unclassified representative r the orbit {g r g^{-1} : g ∈ G} is
/// computed in a single pass over the group, costing #classes · |G|
/// products.
pub fn conjugacy_classes(g: &MatrixGroup) -> ConjClassSet {
    let nel = g.size();
    let mut of_element = vec![u32::MAX; nel];
    let mut reps = Vec::new();
    let mut sizes = Vec::new();
    for start in 0..nel {
        if of_element[start] != u32::MAX {
            continue;
        }
        let class_idx = reps.len() as u32;
        let r = g.elems[start].clone();
        let mut size = 0;
        for h in &g.elems {
            let conj = g.mul(&g.mul(h, &r), &g.inv(h));
            let idx = g.index_of(&conj).expect("conjugate stays in the group");
            if of_element[idx] == u32::MAX {
                of_element[idx] = class_idx;
                size += 1;
            } else {
                debug_assert_eq!(of_element[idx], class_idx);
            }
        }
        reps.push(start);
        sizes.push(size);
    }
    debug_assert_eq!(sizes.iter().sum::<usize>(), nel);
    ConjClassSet {
        reps,
        sizes,
        of_element,
    }
}

// ---------------------------------------------------------------------------
// The disconnected centralizer model T*^{c^j F} ⋊ ⟨c⟩ in exponent
// coordinates. T* is the diagonal torus of PGL_n: exponent vectors in
// (Z/(q^m - 1))^n modulo the diagonal shift, stored in reduced coordinates
// u_i = v_i - v_n (length n-1). The cycle c acts by
// diag(t_1,…,t_n) ↦ diag(t_n,t_1,…,t_{n-1}); F_ε multiplies exponents by εq.
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SdElem {
    /// reduced torus coordinates, length n-1
    pub v: Vec<i128>,
    /// power of c, 0..n
    pub k: u32,
}

impl PartialOrd for SdElem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for SdElem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.k, &self.v).cmp(&(other.k, &other.v))
    }
}

pub struct SemidirectTorus {
    pub n: u32,
    pub q: u64,
    pub eps: i64,
    /// form index: the torus part is T*^{c^j F}
    pub j: u32,
    /// level m; exponents live mod q^m - 1
    pub level: u32,
    pub modulus: i128,
    /// elements of T*^{c^j F} in reduced coordinates, deterministic order
    pub torus: Vec<Vec<i128>>,
    torus_index: HashMap<Vec<i128>, usize>,
    /// cached powers of the reduced shift matrix
    p_pows: Vec<Vec<Vec<i128>>>,
}

/// Reduced-coordinate matrix of the cyclic shift P on (Z/N)^n / diagonal:
/// P v = (v_n, v_1, …, v_{n-1}); with u_i = v_i - v_n this becomes
/// (Pu)_1 = -u_{n-1}, (Pu)_i = u_{i-1} - u_{n-1} for i ≥ 2.
pub fn shift_reduced(n: usize) -> Vec<Vec<i128>> {
    let d = n - 1;
    let mut m = vec![vec![0i128; d]; d];
    for (i, row) in m.iter_mut().enumerate() {
        if i > 0 {
            row[i - 1] = 1;
        }
        row[d - 1] -= 1;
    }
    m
}

pub fn mat_mul_mod(a: &[Vec<i128>], b: &[Vec<i128>], n: i128) -> Vec<Vec<i128>> {
    let r = a.len();
    let k = b.len();
    let c = b[0].len();
    let mut out = vec![vec![0i128; c]; r];
    for i in 0..r {
        for t in 0..k {
            if a[i][t] == 0 {
                continue;
            }
            for j in 0..c {
                out[i][j] = mod_reduce(out[i][j] + a[i][t] * b[t][j], n);
            }
        }
    }
    out
}

pub fn mat_vec_mod(a: &[Vec<i128>], v: &[i128], n: i128) -> Vec<i128> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(0i128, |s, (&c, &x)| mod_reduce(s + c * x, n))
        })
        .collect()
}

pub fn mat_pow_mod(a: &[Vec<i128>], e: u32, n: i128) -> Vec<Vec<i128>> {
    let d = a.len();
    let mut out: Vec<Vec<i128>> = (0..d)
        .map(|i| (0..d).map(|j| i128::from(i == j)).collect())
        .collect();
    for _ in 0..e {
        out = mat_mul_mod(&out, a, n);
    }
    out
}

impl SemidirectTorus {
    /// Build T*^{c^j F} ⋊ ⟨c⟩ for n prime with n | q - ε; the level is
    /// m = 2n uniformly (one level serves every j).
    pub fn build(n: u32, q: u64, frob: Frob, j: u32) -> Result<SemidirectTorus> {
        let eps = frob.eps();
        let qme = q as i64 - eps;
        if !arith::is_prime(n as u64) || qme.rem_euclid(n as i64) != 0 {
            return Err(SltError::BadCase { n: n as u64, qme });
        }
        let level = 2 * n;
        let modulus = (q as i128).pow(level) - 1;
        let d = (n - 1) as usize;
        let p_red = shift_reduced(n as usize);
        let p_pows: Vec<Vec<Vec<i128>>> = (0..n).map(|k| mat_pow_mod(&p_red, k, modulus)).collect();
        // fixed points solve (εq · P^j - I) u ≡ 0 (mod N)
        let eq = mod_reduce(eps as i128 * q as i128, modulus);
        let mut m_minus_1 = vec![vec![0i128; d]; d];
        for (i, row) in m_minus_1.iter_mut().enumerate() {
            for (jj, cell) in row.iter_mut().enumerate() {
                *cell = mod_reduce(
                    eq * p_pows[j as usize % n as usize][i][jj] - i128::from(i == jj),
                    modulus,
                );
            }
        }
        let torus = kernel_mod(&m_minus_1, modulus);
        let mut torus_index = HashMap::with_capacity(torus.len());
        for (i, v) in torus.iter().enumerate() {
            torus_index.insert(v.clone(), i);
        }
        Ok(SemidirectTorus {
            n,
            q,
            eps,
            j,
            level,
            modulus,
            torus,
            torus_index,
            p_pows,
        })
    }

    pub fn size(&self) -> usize {
        self.torus.len() * self.n as usize
    }

    pub fn torus_order(&self) -> usize {
        self.torus.len()
    }

    pub fn id(&self) -> SdElem {
        SdElem {
            v: vec![0; (self.n - 1) as usize],
            k: 0,
        }
    }

    pub fn c(&self) -> SdElem {
        SdElem {
            v: vec![0; (self.n - 1) as usize],
            k: 1,
        }
    }

    pub fn p_pow(&self, k: u32) -> &[Vec<i128>] {
        &self.p_pows[(k % self.n) as usize]
    }

    /// (v, c^k)(w, c^l) = (v + P^k w, c^{k+l})
    pub fn mul(&self, a: &SdElem, b: &SdElem) -> SdElem {
        let pw = mat_vec_mod(self.p_pow(a.k), &b.v, self.modulus);
        let v = a
            .v
            .iter()
            .zip(pw)
            .map(|(&x, y)| mod_reduce(x + y, self.modulus))
            .collect();
        SdElem {
            v,
            k: (a.k + b.k) % self.n,
        }
    }

    pub fn inv(&self, a: &SdElem) -> SdElem {
        let kinv = (self.n - a.k % self.n) % self.n;
        let pw = mat_vec_mod(self.p_pow(kinv), &a.v, self.modulus);
        SdElem {
            v: pw
                .into_iter()
                .map(|x| mod_reduce(-x, self.modulus))
                .collect(),
            k: kinv,
        }
    }

    /// F_ε in exponent coordinates: multiplies torus exponents by εq and
    /// acts trivially on c.
    pub fn frobenius(&self, a: &SdElem) -> SdElem {
        let eq = mod_reduce(self.eps as i128 * self.q as i128, self.modulus);
        SdElem {
            v: a.v
                .iter()
                .map(|&x| mod_reduce(eq * x, self.modulus))
                .collect(),
            k: a.k,
        }
    }

    pub fn elements(&self) -> Vec<SdElem> {
        let mut out = Vec::with_capacity(self.size());
        for k in 0..self.n {
            for v in &self.torus {
                out.push(SdElem { v: v.clone(), k });
            }
        }
        out
    }

    pub fn torus_index_of(&self, v: &[i128]) -> Option<usize> {
        self.torus_index.get(v).copied()
    }

    /// Conjugacy classes, computed structurally: conjugating (v, c^k) by
    /// (w, c^l) gives (P^l v + (1 - P^k) w, c^k).
    pub fn conjugacy_classes(&self) -> SdClassSet {
        let mut reps = Vec::new();
        let mut sizes = Vec::new();
        let mut class_of: HashMap<SdElem, u32> = HashMap::new();
        for k in 0..self.n {
            let pk = self.p_pow(k).to_vec();
            // image of (1 - P^k) on the fixed torus
            let shifts: Vec<Vec<i128>> = self
                .torus
                .iter()
                .map(|w| {
                    let pkw = mat_vec_mod(&pk, w, self.modulus);
                    w.iter()
                        .zip(&pkw)
                        .map(|(&a, &b)| mod_reduce(a - b, self.modulus))
                        .collect()
                })
                .collect();
            for v in &self.torus {
                let e = SdElem { v: v.clone(), k };
                if class_of.contains_key(&e) {
                    continue;
                }
                let idx = reps.len() as u32;
                let mut members: Vec<SdElem> = Vec::new();
                for l in 0..self.n {
                    let rot = mat_vec_mod(self.p_pow(l), v, self.modulus);
                    for s in &shifts {
                        let u: Vec<i128> = rot
                            .iter()
                            .zip(s)
                            .map(|(&a, &b)| mod_reduce(a + b, self.modulus))
                            .collect();
                        members.push(SdElem { v: u, k });
                    }
                }
                members.sort();
                members.dedup();
                sizes.push(members.len());
                for m in members {
                    class_of.insert(m, idx);
                }
                reps.push(e);
            }
        }
        SdClassSet {
            reps,
            sizes,
            class_of,
        }
    }
}

pub struct SdClassSet {
    pub reps: Vec<SdElem>,
    pub sizes: Vec<usize>,
    pub class_of: HashMap<SdElem, u32>,
}

impl SdClassSet {
    pub fn count(&self) -> usize {
        self.reps.len()
    }
}

/// All solutions of A u ≡ 0 (mod N) via Smith normal form; deterministic
/// enumeration order.
pub fn kernel_mod(a: &[Vec<i128>], n: i128) -> Vec<Vec<i128>> {
    let d = a[0].len();
    let (_, dm, v) = arith::smith_normal_form(a);
    let mut ys = vec![vec![0i128; d]];
    for i in 0..d {
        let di = if i < dm.len() && i < dm[i].len() {
            dm[i][i]
        } else {
            0
        };
        let g = arith::gcd(di, n);
        let step = if g == 0 { 1 } else { n / g };
        let count = if di == 0 { n } else { g };
        let mut next = Vec::with_capacity(ys.len() * count as usize);
        for y in &ys {
            for t in 0..count {
                let mut y2 = y.clone();
                y2[i] = mod_reduce(t * step, n);
                next.push(y2);
            }
        }
        ys = next;
    }
    let mut out: Vec<Vec<i128>> = ys.into_iter().map(|y| mat_vec_mod(v.as_slice(), &y, n)).collect();
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tower(p: u64, q: u64, levels: &[u32]) -> Arc<FieldTower> {
        Arc::new(FieldTower::build(p, q, levels).unwrap())
    }

    fn spec(family: Family, n: u32, q: u64, frob: Frob, level: u32) -> GroupSpec {
        GroupSpec {
            family,
            n,
            q,
            frob,
            level,
        }
    }

    #[test]
    fn sl2_f3_order_24() {
        let t = tower(3, 3, &[1, 2]);
        let g = MatrixGroup::build(&t, spec(Family::Sl, 2, 3, Frob::Plus, 1)).unwrap();
        assert_eq!(g.size(), 24);
    }

    #[test]
    fn su3_2_order_216() {
        let t = tower(2, 2, &[1, 2, 3, 6]);
        let g = MatrixGroup::build(&t, spec(Family::Sl, 3, 2, Frob::Minus, 2)).unwrap();
        // cross-check q^3 (q^2-1)(q^3+1)
        assert_eq!(g.size(), 8 * 3 * 9);
    }

    #[test]
    fn gu2_3_order_96() {
        let t = tower(3, 3, &[1, 2]);
        let g = MatrixGroup::build(&t, spec(Family::Gl, 2, 3, Frob::Minus, 2)).unwrap();
        // cross-check q(q+1)(q^2-1)
        assert_eq!(g.size(), 3 * 4 * 8);
    }

    #[test]
    fn frobenius_properties() {
        let t = tower(2, 2, &[1, 2, 3, 6]);
        let g = MatrixGroup::build(&t, spec(Family::Sl, 3, 2, Frob::Plus, 2)).unwrap();
        let fq = g.fq();
        let id = g.id();
        assert_eq!(frobenius(fq, 2, Frob::Plus, &id), id);
        // F₋ ∘ F₋ = F₊² on SL₃(GF(4))
        for x in g.elems.iter().take(800) {
            let mm = frobenius(fq, 2, Frob::Minus, &frobenius(fq, 2, Frob::Minus, x));
            let pp = frobenius(fq, 2, Frob::Plus, &frobenius(fq, 2, Frob::Plus, x));
            assert_eq!(mm, pp);
        }
    }

    #[test]
    fn class_counts() {
        let t = tower(3, 3, &[1, 2]);
        let g = MatrixGroup::build(&t, spec(Family::Sl, 2, 3, Frob::Plus, 1)).unwrap();
        assert_eq!(conjugacy_classes(&g).count(), 7);

        let t5 = tower(5, 5, &[1, 2]);
        let g5 = MatrixGroup::build(&t5, spec(Family::Sl, 2, 5, Frob::Plus, 1)).unwrap();
        assert_eq!(conjugacy_classes(&g5).count(), 9);

        let u5 =
            MatrixGroup::build(&t5, spec(Family::UpperUnipotent, 2, 5, Frob::Plus, 1)).unwrap();
        assert_eq!(u5.size(), 5);
        assert_eq!(conjugacy_classes(&u5).count(), 5); // abelian
    }

    #[test]
    fn pgl_quotient_properties() {
        let t = tower(3, 3, &[1, 2]);
        let gl = MatrixGroup::build(&t, spec(Family::Gl, 2, 3, Frob::Plus, 1)).unwrap();
        let pgl = MatrixGroup::build(&t, spec(Family::Pgl, 2, 3, Frob::Plus, 1)).unwrap();
        assert_eq!(pgl.size(), 24); // PGL2(F3) ≅ S4
        let fq = gl.fq();
        // π(zx) = π(x) for scalar z
        let z = Mat::identity(fq, 2).map_entries(|v| fq.mul(v, &fq.from_int(2)));
        for x in gl.elems.iter().take(30) {
            assert_eq!(pgl_canonical(fq, &z.mul(fq, x)), pgl_canonical(fq, x));
        }
        // π is a homomorphism and commutes with F
        for x in gl.elems.iter().take(15) {
            for y in gl.elems.iter().take(15) {
                let lhs = pgl_canonical(fq, &x.mul(fq, y));
                let rhs = pgl.mul(&pgl_canonical(fq, x), &pgl_canonical(fq, y));
                assert_eq!(lhs, rhs);
            }
            let lhs = pgl_canonical(fq, &frobenius(fq, 3, Frob::Plus, x));
            let rhs = pgl_canonical(fq, &frobenius(fq, 3, Frob::Plus, &pgl_canonical(fq, x)));
            assert_eq!(lhs, rhs);
        }
        // π surjective on classes: every class of PGL2(F3) is hit from GL2(F3)
        let pcl = conjugacy_classes(&pgl);
        let mut hit = vec![false; pcl.count()];
        for x in &gl.elems {
            let i = pgl.index_of(&pgl_canonical(fq, x)).unwrap();
            hit[pcl.of_element[i] as usize] = true;
        }
        assert!(hit.iter().all(|&h| h));
    }

    #[test]
    fn centralizer_model_orders() {
        // n=3, q=7: |T*^F| = 36 = (q-1)^2, |T*^{cF}| = 57 = (q^3-1)/(q-1)
        let m0 = SemidirectTorus::build(3, 7, Frob::Plus, 0).unwrap();
        assert_eq!(m0.torus_order(), 36);
        let m1 = SemidirectTorus::build(3, 7, Frob::Plus, 1).unwrap();
        assert_eq!(m1.torus_order(), 57);
        let m2 = SemidirectTorus::build(3, 7, Frob::Plus, 2).unwrap();
        assert_eq!(m2.torus_order(), 57);
        // rejected when n does not divide q - ε
        assert!(SemidirectTorus::build(3, 5, Frob::Plus, 0).is_err());
        // ε = -1, n=3, q=2: orders 9, 3, 3
        let u0 = SemidirectTorus::build(3, 2, Frob::Minus, 0).unwrap();
        assert_eq!(u0.torus_order(), 9);
        let u1 = SemidirectTorus::build(3, 2, Frob::Minus, 1).unwrap();
        assert_eq!(u1.torus_order(), 3);
    }

    #[test]
    fn centralizer_model_group_laws() {
        let m = SemidirectTorus::build(2, 5, Frob::Plus, 1).unwrap();
        let els = m.elements();
        assert_eq!(els.len(), m.size());
        // c^n = 1, F fixes c
        let mut cn = m.c();
        for _ in 1..m.n {
            cn = m.mul(&cn, &m.c());
        }
        assert_eq!(cn, m.id());
        assert_eq!(m.frobenius(&m.c()), m.c());
        for a in els.iter().take(12) {
            assert_eq!(m.mul(a, &m.inv(a)), m.id());
            for b in els.iter().take(12) {
                let ab_c = m.mul(&m.mul(a, b), &m.c());
                let a_bc = m.mul(a, &m.mul(b, &m.c()));
                assert_eq!(ab_c, a_bc);
            }
        }
        // the fixed torus is F-stable
        for v in &m.torus {
            let e = SdElem { v: v.clone(), k: 0 };
            let fe = m.frobenius(&e);
            assert!(m.torus_index_of(&fe.v).is_some());
        }
    }

    #[test]
    fn semidirect_classes_partition() {
        for j in 0..2 {
            let m = SemidirectTorus::build(2, 5, Frob::Plus, j).unwrap();
            let cls = m.conjugacy_classes();
            assert_eq!(cls.sizes.iter().sum::<usize>(), m.size());
        }
        let m = SemidirectTorus::build(3, 4, Frob::Plus, 1).unwrap();
        let cls = m.conjugacy_classes();
        assert_eq!(cls.sizes.iter().sum::<usize>(), m.size());
    }
}
