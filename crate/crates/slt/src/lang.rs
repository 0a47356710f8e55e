//! Lang–Steinberg solving, the Shintani twist on elements and conjugacy
//! classes, Deshpande's commuting-pair space with its GL₂(ℤ) action, and
//! H¹ bookkeeping for the disconnected centralizer model.
//!
//! The matrix Lang equation λ·F(λ)⁻¹ = y is solved exactly: a witness
//! λ ∈ G(F_{q^m}) exists iff y^m = 1 (the norm N_m(y) equals λF^m(λ)⁻¹),
//! and for F = F₊ the equation λ = y·F(λ) is F_q-semilinear, so the
//! solution set is an n²-dimensional F_q-space computed by Gaussian
//! elimination. The witness is the first kernel element, in a fixed
//! enumeration order, meeting the determinant condition. For F₋ the
//! doubled equation λ = y²·F₊²(λ) linearizes the problem and the unitary
//! condition λ·F₊(ᵗλ) = y is filtered over the solution space.

use std::collections::HashMap;
use std::sync::Arc;

use crate::arith::{self, FpMatrix};
use crate::charfun::ClassedGroup;
use crate::error::{Result, SltError};
use crate::gf::{Fq, FqElem, WitnessField};
use crate::groups::{
    frobenius, mat_vec_mod, pgl_canonical, Family, Frob, Mat, SemidirectTorus,
};

/// Default witness-level cap; SL₂(F₇) needs 14.
pub const DEFAULT_M_MAX: u64 = 16;

/// A solved Lang equation: λ at `level` over the base field with
/// λ·F(λ)⁻¹ = y, plus the conjugate λ⁻¹yλ mapped back to base coordinates.
pub struct TwistWitness {
    pub level: u64,
    pub lambda_key: Vec<u64>,
    pub image: Mat,
}

// ---------------------------------------------------------------------------
// Coordinates of a field over its prime field, for semilinear solving.
// ---------------------------------------------------------------------------

struct FieldCoords<'a> {
    fq: &'a Fq,
    p: u64,
    dim: usize,
    basis: Vec<FqElem>,
    /// row-reduced augmented matrix turning packed digits into coordinates
    decomp: Vec<Vec<u64>>,
    pivots: Vec<(usize, usize)>,
    digits: usize,
}

impl<'a> FieldCoords<'a> {
    /// Coordinates for the whole field (basis 1, x, x², …).
    fn full(fq: &'a Fq) -> FieldCoords<'a> {
        let m = fq.m as usize;
        let basis: Vec<FqElem> = (0..m)
            .map(|i| fq.from_packed(fq.p.pow(i as u32)))
            .collect();
        Self::from_basis(fq, basis)
    }

    /// Coordinates for a subfield spanned (over F_p) by the given elements.
    fn from_basis(fq: &'a Fq, candidates: Vec<FqElem>) -> FieldCoords<'a> {
        let p = fq.p;
        let digits = fq.m as usize;
        // select an independent subset by Gaussian elimination on digit rows
        let mut rows: Vec<(Vec<u64>, FqElem)> = Vec::new();
        for c in candidates {
            let digs = to_digits(fq, &c);
            let mut v = digs.clone();
            for (r, _) in &rows {
                let lead = r.iter().position(|&x| x != 0).unwrap();
                if v[lead] != 0 {
                    let f = v[lead] * arith::inv_mod(r[lead] as i128, p as i128).unwrap() as u64 % p;
                    for (x, y) in v.iter_mut().zip(r) {
                        *x = (*x + p - f * y % p) % p;
                    }
                }
            }
            if v.iter().any(|&x| x != 0) {
                rows.push((v, c));
            }
        }
        let basis: Vec<FqElem> = rows.iter().map(|(_, c)| c.clone()).collect();
        let dim = basis.len();
        // reduced [B | I] for constant-time decomposition: solving B c = v
        // becomes c = E v restricted to pivot rows
        let mut aug: Vec<Vec<u64>> = (0..digits)
            .map(|row| {
                let mut r: Vec<u64> = basis.iter().map(|b| to_digits(fq, b)[row]).collect();
                let mut id = vec![0u64; digits];
                id[row] = 1;
                r.extend(id);
                r
            })
            .collect();
        let mut pivots = Vec::new();
        let mut prow = 0;
        for col in 0..dim {
            let Some(pr) = (prow..digits).find(|&r| aug[r][col] != 0) else {
                continue;
            };
            aug.swap(prow, pr);
            let inv = arith::inv_mod(aug[prow][col] as i128, p as i128).unwrap() as u64;
            for v in aug[prow].iter_mut() {
                *v = *v * inv % p;
            }
            for r in 0..digits {
                if r != prow && aug[r][col] != 0 {
                    let f = aug[r][col];
                    let pc = aug[prow].clone();
                    for (v, pv) in aug[r].iter_mut().zip(pc) {
                        *v = (*v + p - f * pv % p) % p;
                    }
                }
            }
            pivots.push((prow, col));
            prow += 1;
        }
        FieldCoords {
            fq,
            p,
            dim,
            basis,
            decomp: aug,
            pivots,
            digits,
        }
    }

    fn decompose(&self, x: &FqElem) -> Vec<u64> {
        let digs = to_digits(self.fq, x);
        let p = self.p;
        let mut coords = vec![0u64; self.dim];
        for &(pr, pc) in &self.pivots {
            // c_pc = (E v)_pr where E is the stored row-operation product
            let e_row = &self.decomp[pr][self.dim..];
            let mut acc = 0u64;
            for (ev, dv) in e_row.iter().zip(&digs) {
                acc = (acc + ev * dv) % p;
            }
            coords[pc] = acc;
        }
        // consistency: non-pivot rows of E v must vanish
        debug_assert!({
            let recomposed = self.compose(&coords);
            recomposed == *x
        });
        coords
    }

    fn compose(&self, coords: &[u64]) -> FqElem {
        let mut acc = FqElem::Zero;
        for (c, b) in coords.iter().zip(&self.basis) {
            if *c != 0 {
                let term = self.fq.mul(&self.fq.from_int(*c), b);
                acc = self.fq.add(&acc, &term);
            }
        }
        acc
    }

    /// matrix (dim × dim over F_p) of v ↦ a·v
    fn mult_matrix(&self, a: &FqElem) -> Vec<Vec<u64>> {
        let cols: Vec<Vec<u64>> = self
            .basis
            .iter()
            .map(|b| self.decompose(&self.fq.mul(a, b)))
            .collect();
        transpose_u64(&cols, self.dim)
    }

    /// matrix of the p^e-power Frobenius
    fn frob_matrix(&self, e: u32) -> Vec<Vec<u64>> {
        let cols: Vec<Vec<u64>> = self
            .basis
            .iter()
            .map(|b| self.decompose(&self.fq.power_frobenius(b, e)))
            .collect();
        transpose_u64(&cols, self.dim)
    }
}

fn to_digits(fq: &Fq, x: &FqElem) -> Vec<u64> {
    let mut w = fq.packed(x);
    let mut v = vec![0u64; fq.m as usize];
    for d in v.iter_mut() {
        *d = w % fq.p;
        w /= fq.p;
    }
    v
}

fn transpose_u64(cols: &[Vec<u64>], dim: usize) -> Vec<Vec<u64>> {
    let mut m = vec![vec![0u64; cols.len()]; dim];
    for (j, col) in cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            m[i][j] = v;
        }
    }
    m
}

// ---------------------------------------------------------------------------
// Matrix Lang witnesses.
// ---------------------------------------------------------------------------

enum DetCondition {
    One,
    Nonzero,
}

/// Assemble and solve λ = y·F(λ) (or λ = F(λ)·y when `mirrored`) over the
/// given coordinates, with F the p^e-power map. Returns kernel basis.
fn semilinear_kernel(
    co: &FieldCoords<'_>,
    n: usize,
    y: &Mat,
    frob_e: u32,
    mirrored: bool,
) -> Vec<Vec<u64>> {
    let m = co.dim;
    let big = n * n * m;
    let phi = co.frob_matrix(frob_e);
    let mut sys = FpMatrix::zero(co.p, big, big);
    // identity part
    for i in 0..big {
        sys.set(i, i, 1);
    }
    // subtract the twisted part
    for r in 0..n {
        for s in 0..n {
            for t in 0..n {
                let coeff = if mirrored { y.at(t, s) } else { y.at(r, t) };
                if co.fq.is_zero(coeff) {
                    continue;
                }
                let my = co.mult_matrix(coeff);
                let myphi = mul_u64(&my, &phi, co.p);
                // block row (r,s), block col: (t,s) normal, (r,t) mirrored
                let (br, bc) = if mirrored {
                    ((r * n + s) * m, (r * n + t) * m)
                } else {
                    ((r * n + s) * m, (t * n + s) * m)
                };
                for i in 0..m {
                    for j in 0..m {
                        let cur = sys.at(br + i, bc + j);
                        let v = (cur + co.p - myphi[i][j] % co.p) % co.p;
                        sys.set(br + i, bc + j, v);
                    }
                }
            }
        }
    }
    sys.kernel_basis()
}

fn mul_u64(a: &[Vec<u64>], b: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    let r = a.len();
    let k = b.len();
    let c = b[0].len();
    let mut out = vec![vec![0u64; c]; r];
    for i in 0..r {
        for t in 0..k {
            if a[i][t] == 0 {
                continue;
            }
            for j in 0..c {
                out[i][j] = (out[i][j] + a[i][t] * b[t][j]) % p;
            }
        }
    }
    out
}

fn mat_from_coords(co: &FieldCoords<'_>, n: usize, coords: &[u64]) -> Mat {
    let m = co.dim;
    let mut e = Vec::with_capacity(n * n);
    for cell in 0..n * n {
        e.push(co.compose(&coords[cell * m..(cell + 1) * m]));
    }
    Mat { n: n as u32, e }
}

/// Lang witness for y in a prime-base group (q = p, F = F₊), at the
/// smallest level m = ord(y) ≤ m_max. `nth` selects among valid witnesses
/// in the fixed enumeration order (0 = canonical choice).
pub fn solve_lang_matrix(
    group: &crate::groups::MatrixGroup,
    y: &Mat,
    det: DetSpec,
    m_max: u64,
    nth: usize,
) -> Result<TwistWitness> {
    let q = group.spec.q;
    assert!(
        arith::is_prime(q) && group.spec.frob == Frob::Plus,
        "prime-base solver needs q prime and F₊"
    );
    let d = group.order_of(y);
    if d > m_max {
        return Err(SltError::LangExhausted { order: d, m_max });
    }
    if d == 1 {
        return Ok(TwistWitness {
            level: 1,
            lambda_key: Mat::identity(group.fq(), y.n).key(group.fq()),
            image: y.clone(),
        });
    }
    let wf = WitnessField::new(q, d as u32)?;
    let fq = &wf.field;
    let n = y.n as usize;
    // embed y entrywise (prime residues)
    let y_emb = y.map_entries(|v| {
        let w = group.fq().packed(v);
        assert!(w < q, "entry must lie in the prime field");
        fq.from_int(w)
    });
    let co = FieldCoords::full(fq);
    let kernel = semilinear_kernel(&co, n, &y_emb, 1, false);
    let expect = (n * n) as usize;
    assert_eq!(kernel.len(), expect, "Lang solution space has dimension n²");
    let det_cond = match det {
        DetSpec::One => DetCondition::One,
        DetSpec::Nonzero => DetCondition::Nonzero,
    };
    let mut skip = nth;
    let hit = arith::first_kernel_hit(q, n * n * co.dim, &kernel, |coords| {
        let lam = mat_from_coords(&co, n, coords);
        let dv = lam.det(fq);
        let ok = match det_cond {
            DetCondition::One => dv == fq.one(),
            DetCondition::Nonzero => !fq.is_zero(&dv),
        };
        if ok {
            if skip == 0 {
                return true;
            }
            skip -= 1;
        }
        false
    });
    let coords = hit.ok_or(SltError::LangExhausted { order: d, m_max })?;
    let lam = mat_from_coords(&co, n, &coords);
    // verify the defining equation λ·F(λ)⁻¹ = y by multiplication
    let f_lam = frobenius(fq, q, Frob::Plus, &lam);
    assert_eq!(lam.mul(fq, &f_lam.inv(fq)), y_emb, "witness check failed");
    // image λ⁻¹ y λ, mapped back to base coordinates
    let img = lam.inv(fq).mul(fq, &y_emb).mul(fq, &lam);
    let image = img.map_entries(|v| {
        let w = fq.packed(v);
        assert!(w < q, "twisted element must be rational");
        group.fq().from_int(w)
    });
    Ok(TwistWitness {
        level: d,
        lambda_key: lam.key(fq),
        image,
    })
}

#[derive(Clone, Copy)]
pub enum DetSpec {
    One,
    Nonzero,
}

/// Witness for the inverse correspondence λ = F(λ)·y; the image is λyλ⁻¹.
pub fn solve_lang_matrix_inverse(
    group: &crate::groups::MatrixGroup,
    y: &Mat,
    det: DetSpec,
    m_max: u64,
) -> Result<TwistWitness> {
    let q = group.spec.q;
    assert!(arith::is_prime(q) && group.spec.frob == Frob::Plus);
    let d = group.order_of(y);
    if d > m_max {
        return Err(SltError::LangExhausted { order: d, m_max });
    }
    if d == 1 {
        return Ok(TwistWitness {
            level: 1,
            lambda_key: Mat::identity(group.fq(), y.n).key(group.fq()),
            image: y.clone(),
        });
    }
    let wf = WitnessField::new(q, d as u32)?;
    let fq = &wf.field;
    let n = y.n as usize;
    let y_emb = y.map_entries(|v| fq.from_int(group.fq().packed(v)));
    let co = FieldCoords::full(fq);
    let kernel = semilinear_kernel(&co, n, &y_emb, 1, true);
    assert_eq!(kernel.len(), n * n);
    let hit = arith::first_kernel_hit(q, n * n * co.dim, &kernel, |coords| {
        let lam = mat_from_coords(&co, n, coords);
        let dv = lam.det(fq);
        match det {
            DetSpec::One => dv == fq.one(),
            DetSpec::Nonzero => !fq.is_zero(&dv),
        }
    });
    let coords = hit.ok_or(SltError::LangExhausted { order: d, m_max })?;
    let lam = mat_from_coords(&co, n, &coords);
    let f_lam = frobenius(fq, q, Frob::Plus, &lam);
    assert_eq!(f_lam.mul(fq, &y_emb), lam, "inverse witness check failed");
    let img = lam.mul(fq, &y_emb).mul(fq, &lam.inv(fq));
    let image = img.map_entries(|v| group.fq().from_int(fq.packed(v)));
    Ok(TwistWitness {
        level: d,
        lambda_key: lam.key(fq),
        image,
    })
}

/// Lang witness for the unitary form: y ∈ SL_n^{F₋} with entries in GF(q²)
/// inside the tower. Solves the doubled equation λ = y²·F₊²(λ) over the
/// level-m subfield (m even, ord(y) | m, inside the tower top) and filters
/// the unitary condition λ·F₊(ᵗλ) = y together with det λ = 1.
pub fn solve_lang_matrix_unitary(
    group: &crate::groups::MatrixGroup,
    y: &Mat,
    m_max: u64,
    nth: usize,
) -> Result<TwistWitness> {
    assert_eq!(group.spec.frob, Frob::Minus);
    let q = group.spec.q;
    let tower = &group.tower;
    let fq = group.fq();
    let d = group.order_of(y);
    // smallest even m with d | m landing inside the tower
    let top_over_q = tower.top / tower.e;
    let mut m = 0;
    for cand in arith::divisors(top_over_q as u64) {
        if cand % 2 == 0 && cand % d == 0 {
            m = cand;
            break;
        }
    }
    if m == 0 || m > m_max {
        return Err(SltError::LangExhausted { order: d, m_max });
    }
    let n = y.n as usize;
    if d == 1 {
        return Ok(TwistWitness {
            level: 1,
            lambda_key: Mat::identity(fq, y.n).key(fq),
            image: y.clone(),
        });
    }
    // subfield coordinates over F_p
    let sub = tower.subfield_elements(m as u32);
    let co = FieldCoords::from_basis(fq, sub);
    assert_eq!(co.dim, (m * tower.e as u64) as usize);
    let y2 = y.mul(fq, y);
    let kernel = semilinear_kernel(&co, n, &y2, 2 * tower.e, false);
    assert_eq!(
        kernel.len(),
        2 * n * n,
        "doubled Lang solution space has F_p-dimension 2n²"
    );
    let mut skip = nth;
    let hit = arith::first_kernel_hit(tower.p, n * n * co.dim, &kernel, |coords| {
        let lam = mat_from_coords(&co, n, coords);
        if lam.det(fq) != fq.one() {
            return false;
        }
        // unitary condition λ·F₊(ᵗλ) = y, equivalent to λ·F₋(λ)⁻¹ = y
        let t = lam
            .transpose()
            .map_entries(|v| fq.pow(v, q as i128));
        if lam.mul(fq, &t) != *y {
            return false;
        }
        if skip == 0 {
            true
        } else {
            skip -= 1;
            false
        }
    });
    let coords = hit.ok_or(SltError::LangExhausted { order: d, m_max })?;
    let lam = mat_from_coords(&co, n, &coords);
    let f_lam = frobenius(fq, q, Frob::Minus, &lam);
    assert_eq!(lam.mul(fq, &f_lam.inv(fq)), *y, "unitary witness check failed");
    let image = lam.inv(fq).mul(fq, y).mul(fq, &lam);
    assert!(group.contains(&image), "twisted element must be rational");
    Ok(TwistWitness {
        level: m,
        lambda_key: lam.key(fq),
        image,
    })
}

// ---------------------------------------------------------------------------
// Class-level Shintani twist tables.
// ---------------------------------------------------------------------------

/// The Shintani twist as a permutation of conjugacy classes: `map[i]` is
/// the class of Sh(rep_i) = λ⁻¹·rep_i·λ.
pub struct TwistTable {
    pub form: String,
    pub map: Vec<usize>,
    pub levels: Vec<u64>,
}

pub fn shintani_class_table(cg: &ClassedGroup, m_max: u64) -> Result<TwistTable> {
    let spec = &cg.group.spec;
    let mut map = Vec::with_capacity(cg.class_count());
    let mut levels = Vec::with_capacity(cg.class_count());
    for i in 0..cg.class_count() {
        let rep = cg.rep(i).clone();
        let w = match (spec.frob, spec.family) {
            (Frob::Plus, Family::Sl) => solve_lang_matrix(&cg.group, &rep, DetSpec::One, m_max, 0)?,
            (Frob::Plus, Family::Gl) => {
                solve_lang_matrix(&cg.group, &rep, DetSpec::Nonzero, m_max, 0)?
            }
            (Frob::Plus, Family::Pgl) => shintani_pgl_witness(cg, &rep, m_max)?,
            (Frob::Minus, Family::Sl) => solve_lang_matrix_unitary(&cg.group, &rep, m_max, 0)?,
            _ => {
                return Err(SltError::Other(format!(
                    "no Shintani table for {spec}"
                )))
            }
        };
        map.push(cg.class_of(&w.image));
        levels.push(w.level);
    }
    // the twist is a bijection on classes
    let mut seen = vec![false; cg.class_count()];
    for &t in &map {
        assert!(!seen[t], "Shintani table must be a permutation");
        seen[t] = true;
    }
    Ok(TwistTable {
        form: cg.form(),
        map,
        levels,
    })
}

pub fn shintani_inverse_class_table(cg: &ClassedGroup, m_max: u64) -> Result<TwistTable> {
    let spec = &cg.group.spec;
    let mut map = Vec::with_capacity(cg.class_count());
    let mut levels = Vec::with_capacity(cg.class_count());
    for i in 0..cg.class_count() {
        let rep = cg.rep(i).clone();
        let det = match spec.family {
            Family::Sl => DetSpec::One,
            _ => DetSpec::Nonzero,
        };
        let w = solve_lang_matrix_inverse(&cg.group, &rep, det, m_max)?;
        map.push(cg.class_of(&w.image));
        levels.push(w.level);
    }
    Ok(TwistTable {
        form: cg.form(),
        map,
        levels,
    })
}

/// PGL witness by lifting: the canonical matrix representative of a
/// rational PGL class is itself F-fixed in GL, so a GL witness for the
/// lift projects to a PGL witness.
fn shintani_pgl_witness(cg: &ClassedGroup, rep: &Mat, m_max: u64) -> Result<TwistWitness> {
    let fq = cg.group.fq();
    let q = cg.group.spec.q;
    // rep as a GL element: the canonical representative has F-fixed entries
    assert_eq!(frobenius(fq, q, Frob::Plus, rep), *rep);
    let d = rep.order(fq); // order as a matrix, bounds the witness level
    if d > m_max {
        return Err(SltError::LangExhausted { order: d, m_max });
    }
    let wf = WitnessField::new(q, d as u32)?;
    let wfq = &wf.field;
    let n = rep.n as usize;
    let y_emb = rep.map_entries(|v| wfq.from_int(fq.packed(v)));
    let co = FieldCoords::full(wfq);
    let kernel = semilinear_kernel(&co, n, &y_emb, 1, false);
    assert_eq!(kernel.len(), n * n);
    let hit = arith::first_kernel_hit(q, n * n * co.dim, &kernel, |coords| {
        let lam = mat_from_coords(&co, n, coords);
        !wfq.is_zero(&lam.det(wfq))
    });
    let coords = hit.ok_or(SltError::LangExhausted { order: d, m_max })?;
    let lam = mat_from_coords(&co, n, &coords);
    let img = lam.inv(wfq).mul(wfq, &y_emb).mul(wfq, &lam);
    let back = img.map_entries(|v| {
        let w = wfq.packed(v);
        assert!(w < q);
        fq.from_int(w)
    });
    Ok(TwistWitness {
        level: d,
        lambda_key: lam.key(wfq),
        image: pgl_canonical(fq, &back),
    })
}

/// Solve the twisting-cocycle equation F(x) = x·w inside the tower, with x
/// over the given subfield level (over q) and w a fixed rational matrix
/// (here always a permutation-matrix power of c). Used to realize the
/// F-stable maximal torus of type w: T_emb = x·T̃^{wF}·x⁻¹.
///
/// For F₊ the equation is F_p-linear; for F₋ the doubled equation
/// F₊²(x) = x·w² is solved and the original condition filtered.
pub fn solve_twisting_cocycle(
    group: &crate::groups::MatrixGroup,
    w: &Mat,
    level_over_q: u32,
) -> Result<Mat> {
    let tower = &group.tower;
    let fq = group.fq();
    let q = group.spec.q;
    let n = w.n as usize;
    let sub = tower.subfield_elements(level_over_q);
    let co = FieldCoords::from_basis(fq, sub);
    let m = co.dim;
    let big = n * n * m;
    let p = tower.p;

    let build_kernel = |frob_e: u32, target: &Mat| -> Vec<Vec<u64>> {
        // F^{e}(x) - x·target = 0
        let phi = co.frob_matrix(frob_e);
        let mut sys = FpMatrix::zero(p, big, big);
        for r in 0..n {
            for s in 0..n {
                let br = (r * n + s) * m;
                // F(x)_{rs} part
                for i in 0..m {
                    for j in 0..m {
                        sys.set(br + i, br + j, phi[i][j]);
                    }
                }
                // -(x·target)_{rs} = -Σ_t x_{rt} target_{ts}
                for t in 0..n {
                    let cell = target.at(t, s);
                    if fq.is_zero(cell) {
                        continue;
                    }
                    let mc = co.mult_matrix(cell);
                    let bc = (r * n + t) * m;
                    for i in 0..m {
                        for j in 0..m {
                            let v = (sys.at(br + i, bc + j) + p - mc[i][j] % p) % p;
                            sys.set(br + i, bc + j, v);
                        }
                    }
                }
            }
        }
        sys.kernel_basis()
    };

    match group.spec.frob {
        Frob::Plus => {
            let kernel = build_kernel(tower.e, w);
            let hit = arith::first_kernel_hit(p, big, &kernel, |coords| {
                let x = mat_from_coords(&co, n, coords);
                !fq.is_zero(&x.det(fq))
            })
            .ok_or_else(|| SltError::Other("no invertible twisting cocycle".into()))?;
            let x = mat_from_coords(&co, n, &hit);
            // verify F(x) = x·w
            let fx = frobenius(fq, q, Frob::Plus, &x);
            assert_eq!(fx, x.mul(fq, w), "cocycle check failed");
            Ok(x)
        }
        Frob::Minus => {
            let w2 = w.mul(fq, w);
            let kernel = build_kernel(2 * tower.e, &w2);
            let hit = arith::first_kernel_hit(p, big, &kernel, |coords| {
                let x = mat_from_coords(&co, n, coords);
                if fq.is_zero(&x.det(fq)) {
                    return false;
                }
                frobenius(fq, q, Frob::Minus, &x) == x.mul(fq, w)
            })
            .ok_or_else(|| SltError::Other("no invertible unitary twisting cocycle".into()))?;
            let x = mat_from_coords(&co, n, &hit);
            Ok(x)
        }
    }
}

// ---------------------------------------------------------------------------
// Torus Lang solving in exponent coordinates.
// ---------------------------------------------------------------------------

/// Solve (I - M)·v ≡ target (mod modulus): the Lang equation
/// y = λ·ψ(λ)⁻¹ for an exponent action ψ = M.
pub fn solve_lang_exponent(
    action: &[Vec<i128>],
    target: &[i128],
    modulus: i128,
) -> Option<Vec<i128>> {
    ExponentLangSolver::new(action, modulus).solve(target)
}

/// Precomputed Smith-normal-form solver for (I - M)·v ≡ b (mod N); build
/// once per Frobenius action, then each solve is two matrix-vector products.
pub struct ExponentLangSolver {
    u: Vec<Vec<i128>>,
    diag: Vec<i128>,
    v: Vec<Vec<i128>>,
    modulus: i128,
    dim: usize,
}

impl ExponentLangSolver {
    pub fn new(action: &[Vec<i128>], modulus: i128) -> ExponentLangSolver {
        let d = action.len();
        let mut a = vec![vec![0i128; d]; d];
        for i in 0..d {
            for j in 0..d {
                a[i][j] = arith::mod_reduce(i128::from(i == j) - action[i][j], modulus);
            }
        }
        let (mut u, dm, mut v) = arith::smith_normal_form(&a);
        // the transforms only matter mod N; keep entries small
        for row in u.iter_mut().chain(v.iter_mut()) {
            for x in row.iter_mut() {
                *x = arith::mod_reduce(*x, modulus);
            }
        }
        let diag = (0..d).map(|i| dm[i][i]).collect();
        ExponentLangSolver {
            u,
            diag,
            v,
            modulus,
            dim: d,
        }
    }

    pub fn solve(&self, target: &[i128]) -> Option<Vec<i128>> {
        let n = self.modulus;
        let c = mat_vec_mod(&self.u, target, n);
        let mut y = vec![0i128; self.dim];
        for i in 0..self.dim {
            let di = self.diag[i];
            if di == 0 {
                if c[i] % n != 0 {
                    return None;
                }
                continue;
            }
            let g = arith::gcd(di, n);
            if c[i] % g != 0 {
                return None;
            }
            let n_g = n / g;
            let inv = arith::inv_mod(di / g, n_g)?;
            y[i] = arith::mod_reduce((c[i] / g) * inv, n_g);
        }
        Some(mat_vec_mod(&self.v, &y, n))
    }
}

// ---------------------------------------------------------------------------
// Commuting pairs and the GL₂(ℤ) action.
// ---------------------------------------------------------------------------

/// Element x·F^a of the extended monoid K ⋊ ⟨F⟩ over a finite realization.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SemiElem {
    pub x: Mat,
    pub a: i64,
}

/// The realization of R_{γ₁,γ₂}: a finite group K with the q-power
/// Frobenius of finite order acting on it.
pub struct PairSpace {
    pub group: Arc<crate::groups::MatrixGroup>,
    /// order of F on the realization
    pub frob_order: u32,
}

impl PairSpace {
    pub fn new(group: Arc<crate::groups::MatrixGroup>) -> PairSpace {
        // the q-power map has order `level` on GF(q^level)-points
        let frob_order = group.spec.level;
        PairSpace { group, frob_order }
    }

    fn f_pow(&self, x: &Mat, a: i64) -> Mat {
        let fq = self.group.fq();
        let q = self.group.spec.q;
        let e = a.rem_euclid(self.frob_order as i64) as u32;
        let mut out = x.clone();
        for _ in 0..e {
            out = frobenius(fq, q, Frob::Plus, &out);
        }
        out
    }

    pub fn mul(&self, a: &SemiElem, b: &SemiElem) -> SemiElem {
        let fq = self.group.fq();
        SemiElem {
            x: a.x.mul(fq, &self.f_pow(&b.x, a.a)),
            a: (a.a + b.a).rem_euclid(self.frob_order as i64),
        }
    }

    pub fn inv(&self, a: &SemiElem) -> SemiElem {
        let fq = self.group.fq();
        let na = (-a.a).rem_euclid(self.frob_order as i64);
        SemiElem {
            x: self.f_pow(&a.x.inv(fq), na),
            a: na,
        }
    }

    pub fn pow(&self, a: &SemiElem, k: i64) -> SemiElem {
        let id = SemiElem {
            x: self.group.id(),
            a: 0,
        };
        if k == 0 {
            return id;
        }
        let base = if k > 0 { a.clone() } else { self.inv(a) };
        let mut out = id;
        for _ in 0..k.unsigned_abs() {
            out = self.mul(&out, &base);
        }
        out
    }

    pub fn commute(&self, a: &SemiElem, b: &SemiElem) -> bool {
        self.mul(a, b) == self.mul(b, a)
    }
}

/// Element of R_{γ₁,γ₂}: a commuting pair (x·F^{g1}, y·F^{g2}).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CommutingPair {
    pub first: SemiElem,
    pub second: SemiElem,
}

impl CommutingPair {
    pub fn new(space: &PairSpace, first: SemiElem, second: SemiElem) -> Result<CommutingPair> {
        if !space.commute(&first, &second) {
            return Err(SltError::Other("pair does not commute".into()));
        }
        Ok(CommutingPair { first, second })
    }
}

/// The GL₂(ℤ) action (x γ₁, y γ₂) ↦ ((xγ₁)^a (yγ₂)^c, (xγ₁)^b (yγ₂)^d).
/// Composition convention: act(m2, act(m1, p)) = act(m1·m2, p).
pub fn gl2z_act(space: &PairSpace, m: [[i64; 2]; 2], p: &CommutingPair) -> Result<CommutingPair> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det != 1 && det != -1 {
        return Err(SltError::NotUnimodular(det));
    }
    // Frobenius-root validity: when the pair lives in R_{F,Id}, the first
    // output label a·1 + c·0 must stay a positive F-power.
    let (g1, g2) = (p.first.a, p.second.a);
    let new_first_label = g1 * m[0][0] + g2 * m[1][0];
    if (g1, g2) != (0, 0) && new_first_label <= 0 {
        return Err(SltError::InvalidShintaniTarget { a: new_first_label });
    }
    let first = space.mul(
        &space.pow(&p.first, m[0][0]),
        &space.pow(&p.second, m[1][0]),
    );
    let second = space.mul(
        &space.pow(&p.first, m[0][1]),
        &space.pow(&p.second, m[1][1]),
    );
    debug_assert!(space.commute(&first, &second));
    Ok(CommutingPair { first, second })
}

/// All commuting pairs (x, y) of the plain finite group (trivial isogenies).
pub fn commuting_pairs(space: &PairSpace) -> Vec<CommutingPair> {
    let g = &space.group;
    let fq = g.fq();
    let mut out = Vec::new();
    for x in &g.elems {
        for y in &g.elems {
            if x.mul(fq, y) == y.mul(fq, x) {
                out.push(CommutingPair {
                    first: SemiElem { x: x.clone(), a: 0 },
                    second: SemiElem { x: y.clone(), a: 0 },
                });
            }
        }
    }
    out
}

/// Orbits of commuting pairs under simultaneous conjugation; the Drinfeld
/// double basis when the identity component is trivial.
pub fn drinfeld_orbits(space: &PairSpace) -> (usize, HashMap<(Vec<u64>, Vec<u64>), usize>) {
    let g = &space.group;
    let fq = g.fq();
    let pairs = commuting_pairs(space);
    let mut orbit_of: HashMap<(Vec<u64>, Vec<u64>), usize> = HashMap::new();
    let mut count = 0;
    for p in &pairs {
        let key = (p.first.x.key(fq), p.second.x.key(fq));
        if orbit_of.contains_key(&key) {
            continue;
        }
        for h in &g.elems {
            let hx = g.mul(&g.mul(h, &p.first.x), &g.inv(h));
            let hy = g.mul(&g.mul(h, &p.second.x), &g.inv(h));
            orbit_of.insert((hx.key(fq), hy.key(fq)), count);
        }
        count += 1;
    }
    (count, orbit_of)
}

/// Σ over conjugacy classes of #Irr(centralizer), the predicted orbit count.
pub fn drinfeld_orbit_count_oracle(cg: &ClassedGroup) -> usize {
    let g = &cg.group;
    let fq = g.fq();
    let mut total = 0;
    for i in 0..cg.class_count() {
        let rep = cg.rep(i).clone();
        let centralizer: Vec<Mat> = g
            .elems
            .iter()
            .filter(|h| h.mul(fq, &rep) == rep.mul(fq, h))
            .cloned()
            .collect();
        let c = crate::groups::MatrixGroup::from_elements(
            &g.tower,
            g.spec.clone(),
            centralizer,
            false,
        );
        let ccg = ClassedGroup::new(Arc::new(c));
        total += ccg.class_count(); // #Irr = #classes
    }
    total
}

/// The n rational forms of the disconnected model, parametrised by powers of
/// c, with condition (*) checked: the lifts c^j are F-stable and commute.
pub fn h1_forms(n: u32, q: u64, frob: Frob) -> Result<Vec<SemidirectTorus>> {
    let mut out = Vec::with_capacity(n as usize);
    for j in 0..n {
        let m = SemidirectTorus::build(n, q, frob, j)?;
        // condition (*): c is F-stable in every form
        assert_eq!(m.frobenius(&m.c()), m.c());
        out.push(m);
    }
    // the lifts commute pairwise (powers of one element)
    let m0 = &out[0];
    let mut ci = m0.id();
    for _ in 0..n {
        let mut cj = m0.id();
        for _ in 0..n {
            assert_eq!(m0.mul(&ci, &cj), m0.mul(&cj, &ci));
            cj = m0.mul(&cj, &m0.c());
        }
        ci = m0.mul(&ci, &m0.c());
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Element-level Shintani twist on the disconnected model. An element
// x = c^k · y of the form-i group (y in the fixed torus) maps to
// c^k · (σF)(λ)⁻¹ · λ in the form-(i+k) group, where y = λ·(c^{k+i}F)(λ)⁻¹.
// On the identity coset the twist is the identity since T* is abelian.
// ---------------------------------------------------------------------------

/// Sh(x) for x = (v, c^k) in the form-i model; the result lives in the
/// form-(i+k) model. Exponent coordinates throughout; level stays 2n.
pub fn shintani_semidirect(
    forms: &[SemidirectTorus],
    i: u32,
    x: &crate::groups::SdElem,
) -> Result<crate::groups::SdElem> {
    let src = &forms[i as usize];
    let n = src.n;
    let k = x.k;
    let tgt = &forms[((i + k) % n) as usize];
    if k == 0 {
        // σ' = 1: λ and ψ(λ)⁻¹ commute, the twist fixes the coset pointwise
        return Ok(x.clone());
    }
    let modulus = src.modulus;
    // ψ = c^{k+i} F in reduced coordinates: εq · P^{k+i}
    let d = (n - 1) as usize;
    let pki = src.p_pow((k + i) % n);
    let eq = arith::mod_reduce(src.eps as i128 * src.q as i128, modulus);
    let mut action = vec![vec![0i128; d]; d];
    for r in 0..d {
        for c in 0..d {
            action[r][c] = arith::mod_reduce(eq * pki[r][c], modulus);
        }
    }
    let lambda = solve_lang_exponent(&action, &x.v, modulus)
        .ok_or(SltError::TorusLangUnsolvable { level: 2 * n as u64 })?;
    // image torus part: (σF)(λ)⁻¹ · λ = λ - εq·P^i λ
    let pi_mat = src.p_pow(i % n);
    let sigmaf_lambda: Vec<i128> = mat_vec_mod(pi_mat, &lambda, modulus)
        .into_iter()
        .map(|v| arith::mod_reduce(eq * v, modulus))
        .collect();
    let img: Vec<i128> = lambda
        .iter()
        .zip(&sigmaf_lambda)
        .map(|(&l, &s)| arith::mod_reduce(l - s, modulus))
        .collect();
    // the image is fixed by c^{i+k} F
    assert!(
        tgt.torus_index_of(&img).is_some(),
        "twisted torus part must land in the target form"
    );
    Ok(crate::groups::SdElem { v: img, k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FieldTower;
    use crate::groups::{GroupSpec, MatrixGroup};

    fn sl2(q: u64) -> ClassedGroup {
        let tower = Arc::new(FieldTower::build(q, q, &[1, 2]).unwrap());
        let g = MatrixGroup::build(
            &tower,
            GroupSpec {
                family: Family::Sl,
                n: 2,
                q,
                frob: Frob::Plus,
                level: 1,
            },
        )
        .unwrap();
        ClassedGroup::new(Arc::new(g))
    }

    #[test]
    fn identity_needs_trivial_witness() {
        let cg = sl2(3);
        let id = cg.group.id();
        let w = solve_lang_matrix(&cg.group, &id, DetSpec::One, 8, 0).unwrap();
        assert_eq!(w.level, 1);
        assert_eq!(w.image, id);
    }

    #[test]
    fn sl2_f3_witness_levels_match_element_orders() {
        // A witness at level m exists iff y^m = 1, so the minimal level is
        // the element order. SL2(F3) has orders {1,2,3,4,6}.
        let cg = sl2(3);
        let mut max_level = 0;
        for i in 0..cg.class_count() {
            let w = solve_lang_matrix(&cg.group, &cg.rep(i).clone(), DetSpec::One, 8, 0).unwrap();
            assert_eq!(w.level, cg.rep_order(i));
            max_level = max_level.max(w.level);
        }
        assert_eq!(max_level, 6);
        // ... and the solver refuses when the cap is below the order
        let bad = (0..cg.class_count()).find(|&i| cg.rep_order(i) == 6).unwrap();
        assert!(matches!(
            solve_lang_matrix(&cg.group, &cg.rep(bad).clone(), DetSpec::One, 4, 0),
            Err(SltError::LangExhausted { order: 6, m_max: 4 })
        ));
    }

    #[test]
    fn twist_table_is_permutation_and_roundtrips() {
        for q in [3u64, 5] {
            let cg = sl2(q);
            let t = shintani_class_table(&cg, DEFAULT_M_MAX).unwrap();
            let tinv = shintani_inverse_class_table(&cg, DEFAULT_M_MAX).unwrap();
            for i in 0..cg.class_count() {
                assert_eq!(tinv.map[t.map[i]], i, "Sh⁻¹ ∘ Sh = id on classes");
            }
        }
    }

    #[test]
    fn twist_well_defined_across_witnesses() {
        let cg = sl2(3);
        for i in 0..cg.class_count() {
            let rep = cg.rep(i).clone();
            let w0 = solve_lang_matrix(&cg.group, &rep, DetSpec::One, 8, 0).unwrap();
            let w1 = solve_lang_matrix(&cg.group, &rep, DetSpec::One, 8, 1).unwrap();
            assert_eq!(
                cg.class_of(&w0.image),
                cg.class_of(&w1.image),
                "two witnesses give conjugate outputs"
            );
        }
    }

    #[test]
    fn gl2z_action_on_s3() {
        // S3 as permutation matrices over F2
        let tower = Arc::new(FieldTower::build(2, 2, &[1, 2]).unwrap());
        let fq = &tower.field;
        let mut mats = Vec::new();
        let perms3 = [
            [0usize, 1, 2],
            [1, 0, 2],
            [0, 2, 1],
            [2, 1, 0],
            [1, 2, 0],
            [2, 0, 1],
        ];
        for p in perms3 {
            let mut m = Mat {
                n: 3,
                e: vec![FqElem::Zero; 9],
            };
            for (j, &i) in p.iter().enumerate() {
                m.set(i, j, fq.one());
            }
            mats.push(m);
        }
        let s3 = Arc::new(MatrixGroup::from_elements(
            &tower,
            GroupSpec {
                family: Family::Gl,
                n: 3,
                q: 2,
                frob: Frob::Plus,
                level: 1,
            },
            mats,
            false,
        ));
        let space = PairSpace::new(s3.clone());
        let pairs = commuting_pairs(&space);

        // identity matrix acts as identity
        let idm = [[1i64, 0], [0, 1]];
        for p in &pairs {
            assert_eq!(&gl2z_act(&space, idm, p).unwrap(), p);
        }
        // composition convention: act(m2, act(m1, p)) = act(m1 m2, p),
        // exhaustively on commuting pairs of S3 with trivial isogenies
        let m1 = [[1i64, 1], [0, 1]];
        let m2 = [[0i64, -1], [1, 0]];
        let m1m2 = [[1 * 0 + 1 * 1, 1 * -1 + 1 * 0], [0 * 0 + 1 * 1, 0 * -1 + 1 * 0]];
        for p in &pairs {
            let lhs = gl2z_act(&space, m2, &gl2z_act(&space, m1, p).unwrap()).unwrap();
            let rhs = gl2z_act(&space, m1m2, p).unwrap();
            assert_eq!(lhs, rhs);
        }
        // ad-equivariance: action commutes with simultaneous conjugation
        let fqr = s3.fq();
        for p in pairs.iter().take(12) {
            for h in &s3.elems {
                let conj = |m: &Mat| s3.mul(&s3.mul(h, m), &s3.inv(h));
                let pc = CommutingPair {
                    first: SemiElem {
                        x: conj(&p.first.x),
                        a: 0,
                    },
                    second: SemiElem {
                        x: conj(&p.second.x),
                        a: 0,
                    },
                };
                let lhs = gl2z_act(&space, m1, &pc).unwrap();
                let rhs = gl2z_act(&space, m1, p).unwrap();
                assert_eq!(lhs.first.x, conj(&rhs.first.x));
                assert_eq!(lhs.second.x, conj(&rhs.second.x));
                let _ = fqr;
            }
        }
        // non-unimodular matrices rejected
        assert!(matches!(
            gl2z_act(&space, [[2, 0], [0, 1]], &pairs[0]),
            Err(SltError::NotUnimodular(2))
        ));
        // Drinfeld orbit count for S3 is 8 = 3 + 2 + 3
        let (orbits, orbit_of) = drinfeld_orbits(&space);
        assert_eq!(orbits, 8);
        let cg = ClassedGroup::new(s3.clone());
        assert_eq!(drinfeld_orbit_count_oracle(&cg), 8);
        // the orbit partition is stable under the S and T generators
        for m in [m1, m2] {
            let mut image_orbit: HashMap<usize, usize> = HashMap::new();
            for p in &pairs {
                let o = orbit_of[&(p.first.x.key(fqr), p.second.x.key(fqr))];
                let q = gl2z_act(&space, m, p).unwrap();
                let oq = orbit_of[&(q.first.x.key(fqr), q.second.x.key(fqr))];
                if let Some(&prev) = image_orbit.get(&o) {
                    assert_eq!(prev, oq, "orbit partition preserved");
                } else {
                    image_orbit.insert(o, oq);
                }
            }
        }
    }

    #[test]
    fn trivial_group_has_one_orbit() {
        let tower = Arc::new(FieldTower::build(2, 2, &[1]).unwrap());
        let fq = &tower.field;
        let id = Mat::identity(fq, 1);
        let g = Arc::new(MatrixGroup::from_elements(
            &tower,
            GroupSpec {
                family: Family::Gl,
                n: 1,
                q: 2,
                frob: Frob::Plus,
                level: 1,
            },
            vec![id],
            false,
        ));
        let space = PairSpace::new(g);
        assert_eq!(drinfeld_orbits(&space).0, 1);
    }

    #[test]
    fn shintani_matches_deshpande_form() {
        // M = [[1,0],[1,1]]: (xF, y) ↦ (xFy, y) on a finite realization
        let tower = Arc::new(FieldTower::build(3, 3, &[1, 2]).unwrap());
        let g = Arc::new(
            MatrixGroup::build(
                &tower,
                GroupSpec {
                    family: Family::Sl,
                    n: 2,
                    q: 3,
                    frob: Frob::Plus,
                    level: 2,
                },
            )
            .unwrap(),
        );
        let space = PairSpace::new(g.clone());
        let sh = [[1i64, 0], [1, 1]];
        // take x = id (so xF = F) and y rational
        let yr = {
            let fq = g.fq();
            let mut m = Mat::identity(fq, 2);
            m.set(0, 1, fq.one());
            m
        };
        let p = CommutingPair::new(
            &space,
            SemiElem {
                x: g.id(),
                a: 1,
            },
            SemiElem { x: yr.clone(), a: 0 },
        )
        .unwrap();
        let img = gl2z_act(&space, sh, &p).unwrap();
        // (F)(y) = F(y)·F = y·F since y is rational; the pair becomes (yF, y)
        assert_eq!(img.second.x, yr);
        assert_eq!(img.first.a, 1);
        assert_eq!(img.first.x, yr);
        // invalid target: [[ -1,0],[0,-1]] sends a=1 to a=-1
        assert!(matches!(
            gl2z_act(&space, [[-1, 0], [0, -1]], &p),
            Err(SltError::InvalidShintaniTarget { .. })
        ));
    }

    #[test]
    fn h1_forms_n3_q7() {
        let forms = h1_forms(3, 7, Frob::Plus).unwrap();
        let orders: Vec<usize> = forms.iter().map(|m| m.torus_order()).collect();
        assert_eq!(orders, vec![36, 57, 57]);
        let forms2 = h1_forms(2, 5, Frob::Plus).unwrap();
        assert_eq!(forms2.len(), 2);
    }

    #[test]
    fn semidirect_shintani_coset_transport() {
        // Sh maps the coset c^k of form i into form i+k with the same coset
        let forms = h1_forms(3, 7, Frob::Plus).unwrap();
        for i in 0..3u32 {
            for x in forms[i as usize].elements() {
                let img = shintani_semidirect(&forms, i, &x).unwrap();
                assert_eq!(img.k, x.k);
                let tgt = ((i + x.k) % 3) as usize;
                if x.k == 0 {
                    assert_eq!(img, x);
                } else {
                    assert!(forms[tgt].torus_index_of(&img.v).is_some());
                }
            }
        }
    }
}
