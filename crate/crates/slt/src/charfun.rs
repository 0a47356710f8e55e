//! Exact class functions, inner products, induction/restriction, and full
//! character tables by the Burnside–Dixon method (mod-ℓ class-matrix
//! eigenvectors lifted to Q(ζ) through element-order data).

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::{self, is_prime, lcm, pow_mod};
use crate::cyclotomic::CycNum;
use crate::error::{Result, SltError};
use crate::groups::{conjugacy_classes, ConjClassSet, Mat, MatrixGroup};

/// Exact class function on a fixed rational form.
#[derive(Clone, Debug)]
pub struct ClassFunction {
    /// group/form descriptor; inner products require equal forms
    pub form: String,
    pub values: Vec<CycNum>,
    pub name: Option<String>,
}

/// Equality is exact value equality on the same form; names are labels.
impl PartialEq for ClassFunction {
    fn eq(&self, other: &Self) -> bool {
        self.form == other.form && self.values == other.values
    }
}

impl ClassFunction {
    pub fn new(form: &str, values: Vec<CycNum>) -> Self {
        ClassFunction {
            form: form.to_string(),
            values,
            name: None,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn degree(&self) -> &CycNum {
        &self.values[0]
    }

    pub fn add(&self, other: &ClassFunction) -> ClassFunction {
        assert_eq!(self.form, other.form);
        ClassFunction::new(
            &self.form,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.add(b))
                .collect(),
        )
    }

    pub fn sub(&self, other: &ClassFunction) -> ClassFunction {
        assert_eq!(self.form, other.form);
        ClassFunction::new(
            &self.form,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.sub(b))
                .collect(),
        )
    }

    pub fn scale(&self, c: &CycNum) -> ClassFunction {
        ClassFunction::new(&self.form, self.values.iter().map(|v| v.mul(c)).collect())
    }

    pub fn neg(&self) -> ClassFunction {
        ClassFunction::new(&self.form, self.values.iter().map(|v| v.neg()).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }
}

/// Precompose a class function with a class-level map: (Sh f)(x) = f(Sh x).
/// `table[i]` is the index, in `f`'s form, of the image of class i of the
/// target form.
pub fn precompose(f: &ClassFunction, table: &[usize], target_form: &str) -> ClassFunction {
    ClassFunction::new(
        target_form,
        table.iter().map(|&j| f.values[j].clone()).collect(),
    )
}

// ---------------------------------------------------------------------------
// Matrix group + class data bundle.
// ---------------------------------------------------------------------------

pub struct ClassedGroup {
    pub group: Arc<MatrixGroup>,
    pub classes: ConjClassSet,
    /// cached members per class (element indices)
    members: Vec<Vec<u32>>,
    rep_orders: Vec<u64>,
}

impl ClassedGroup {
    pub fn new(group: Arc<MatrixGroup>) -> ClassedGroup {
        let classes = conjugacy_classes(&group);
        let mut members = vec![Vec::new(); classes.count()];
        for (i, &c) in classes.of_element.iter().enumerate() {
            members[c as usize].push(i as u32);
        }
        let rep_orders = classes
            .reps
            .iter()
            .map(|&r| group.order_of(&group.elems[r]))
            .collect();
        ClassedGroup {
            group,
            classes,
            members,
            rep_orders,
        }
    }

    pub fn form(&self) -> String {
        self.group.spec.to_string()
    }

    pub fn order(&self) -> u64 {
        self.group.size() as u64
    }

    pub fn class_count(&self) -> usize {
        self.classes.count()
    }

    pub fn rep(&self, i: usize) -> &Mat {
        &self.group.elems[self.classes.reps[i]]
    }

    pub fn size(&self, i: usize) -> usize {
        self.classes.sizes[i]
    }

    pub fn rep_order(&self, i: usize) -> u64 {
        self.rep_orders[i]
    }

    pub fn class_of(&self, x: &Mat) -> usize {
        let idx = self
            .group
            .index_of(x)
            .expect("element belongs to the group");
        self.classes.of_element[idx] as usize
    }

    pub fn class_of_index(&self, idx: usize) -> usize {
        self.classes.of_element[idx] as usize
    }

    pub fn members(&self, i: usize) -> impl Iterator<Item = &Mat> {
        self.members[i].iter().map(|&e| &self.group.elems[e as usize])
    }

    /// exponent of the group
    pub fn exponent(&self) -> u64 {
        self.rep_orders.iter().fold(1, |a, &b| lcm(a, b))
    }

    /// class index of rep(i)^l
    pub fn power_class(&self, i: usize, l: u64) -> usize {
        let mut cur = self.group.id();
        let r = self.rep(i).clone();
        for _ in 0..l {
            cur = self.group.mul(&cur, &r);
        }
        self.class_of(&cur)
    }

    pub fn inverse_class(&self, i: usize) -> usize {
        self.class_of(&self.group.inv(self.rep(i)))
    }
}

/// ⟨f, g⟩ = (1/|G|) Σ_i |C_i| f(i) conj(g(i)), exact.
pub fn inner_product(
    cg: &ClassedGroup,
    f: &ClassFunction,
    g: &ClassFunction,
) -> Result<CycNum> {
    if f.form != g.form {
        return Err(SltError::FormMismatch(f.form.clone(), g.form.clone()));
    }
    let mut acc = CycNum::zero();
    for (i, (fv, gv)) in f.values.iter().zip(&g.values).enumerate() {
        if fv.is_zero() || gv.is_zero() {
            continue;
        }
        let term = fv
            .mul(&gv.conj())
            .scale(&BigRational::from_integer(BigInt::from(cg.size(i))));
        acc = acc.add(&term);
    }
    Ok(acc.scale(&BigRational::new(BigInt::one(), BigInt::from(cg.order()))))
}

pub fn trivial_character(cg: &ClassedGroup) -> ClassFunction {
    ClassFunction::new(
        &cg.form(),
        vec![CycNum::one(); cg.class_count()],
    )
    .named("1")
}

/// Induced class function: Ind f(g) = (1/|H|) Σ_{x ∈ G, x⁻¹gx ∈ H} f(x⁻¹gx).
/// The subgroup must consist of matrices over the same field realization;
/// fusion is computed on the fly through the subgroup's class map.
pub fn induce(sub: &ClassedGroup, amb: &ClassedGroup, f: &ClassFunction) -> Result<ClassFunction> {
    if f.form != sub.form() {
        return Err(SltError::FormMismatch(f.form.clone(), sub.form()));
    }
    if !std::ptr::eq(
        Arc::as_ptr(&sub.group.tower),
        Arc::as_ptr(&amb.group.tower),
    ) {
        return Err(SltError::MissingFusion {
            sub: sub.form(),
            amb: amb.form(),
        });
    }
    let mut values = Vec::with_capacity(amb.class_count());
    for i in 0..amb.class_count() {
        let rep = amb.rep(i).clone();
        let mut acc = CycNum::zero();
        for x in &amb.group.elems {
            let conj = amb.group.mul(&amb.group.mul(&amb.group.inv(x), &rep), x);
            if let Some(_) = sub.group.index_of(&conj) {
                acc = acc.add(&f.values[sub.class_of(&conj)]);
            }
        }
        values.push(acc.scale(&BigRational::new(BigInt::one(), BigInt::from(sub.order()))));
    }
    Ok(ClassFunction::new(&amb.form(), values))
}

/// Restriction along the identity embedding of matrix groups.
pub fn restrict(amb: &ClassedGroup, sub: &ClassedGroup, f: &ClassFunction) -> Result<ClassFunction> {
    if f.form != amb.form() {
        return Err(SltError::FormMismatch(f.form.clone(), amb.form()));
    }
    let values = (0..sub.class_count())
        .map(|i| {
            let rep = sub.rep(i);
            f.values[amb.class_of(rep)].clone()
        })
        .collect();
    Ok(ClassFunction::new(&sub.form(), values))
}

// ---------------------------------------------------------------------------
// Burnside–Dixon character tables.
// ---------------------------------------------------------------------------

pub struct CharTable {
    pub form: String,
    /// rows sorted by degree, then lexicographic value list
    pub irreducibles: Vec<ClassFunction>,
    pub conductor: u64,
    pub dixon_prime: u64,
}

impl CharTable {
    pub fn degrees(&self) -> Vec<BigInt> {
        self.irreducibles
            .iter()
            .map(|chi| chi.degree().as_integer().expect("character degree"))
            .collect()
    }
}

/// Smallest prime ℓ ≡ 1 (mod exponent) with ℓ > 2√|G|.
pub fn dixon_prime(exponent: u64, group_order: u64) -> Result<u64> {
    let bound = 2.0 * (group_order as f64).sqrt();
    let mut l = exponent + 1;
    loop {
        if l as f64 > bound && is_prime(l) {
            return Ok(l);
        }
        l = l.checked_add(exponent).ok_or(SltError::DixonPrime { exponent })?;
        if l > 1 << 40 {
            return Err(SltError::DixonPrime { exponent });
        }
    }
}

struct ModP {
    p: u64,
}

impl ModP {
    fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.p
    }
    fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.p - b % self.p) % self.p
    }
    fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.p
    }
    fn inv(&self, a: u64) -> u64 {
        arith::inv_mod(a as i128, self.p as i128).expect("unit mod prime") as u64
    }
    fn pow(&self, a: u64, e: u64) -> u64 {
        pow_mod(a as u128, e as u128, self.p as u128) as u64
    }
}

/// Full character table by the Burnside–Dixon method. Deterministic:
/// class matrices are consumed in index order, eigenvalues scanned
/// ascending, rows sorted by degree then value list.
pub fn character_table(cg: &ClassedGroup) -> Result<CharTable> {
    let k = cg.class_count();
    let exponent = cg.exponent();
    let order = cg.order();
    let l = dixon_prime(exponent, order)?;
    let f = ModP { p: l };

    // z of multiplicative order `exponent` in F_l
    let mut gen = 0;
    for a in 2..l {
        if arith::mult_order_mod(a as u128, l as u128, (l - 1) as u128) == (l - 1) as u128 {
            gen = a;
            break;
        }
    }
    let z = f.pow(gen, (l - 1) / exponent);

    // class matrices: m[i][j][k] = #{x ∈ C_i : x^{-1} rep_k ∈ C_j}
    let class_matrix = |i: usize| -> Vec<Vec<u64>> {
        let mut m = vec![vec![0u64; k]; k];
        let inverses: Vec<Mat> = cg.members(i).map(|x| cg.group.inv(x)).collect();
        for kk in 0..k {
            let repk = cg.rep(kk).clone();
            for xinv in &inverses {
                let y = cg.group.mul(xinv, &repk);
                let j = cg.class_of(&y);
                m[j][kk] += 1;
            }
        }
        m
    };

    // split the K-dimensional space into common eigenvectors
    let mut spaces: Vec<Vec<Vec<u64>>> = vec![(0..k)
        .map(|i| {
            let mut v = vec![0u64; k];
            v[i] = 1;
            v
        })
        .collect()];
    for r in 1..k {
        if spaces.iter().all(|s| s.len() == 1) {
            break;
        }
        let mr = class_matrix(r);
        let mut next = Vec::new();
        for basis in spaces {
            if basis.len() == 1 {
                next.push(basis);
                continue;
            }
            for sub in split_space(&f, &mr, &basis) {
                next.push(sub);
            }
        }
        spaces = next;
    }
    if !spaces.iter().all(|s| s.len() == 1) {
        return Err(SltError::Other(
            "class matrices failed to separate eigenvectors".into(),
        ));
    }

    // normalize: v[identity class] = 1 gives the class-algebra character ω
    let id_class = cg.class_of(&cg.group.id());
    let mut rows = Vec::with_capacity(k);
    for s in &spaces {
        let v = &s[0];
        if v[id_class] == 0 {
            return Err(SltError::Other("eigenvector vanishes at identity".into()));
        }
        let c = f.inv(v[id_class]);
        rows.push(v.iter().map(|&x| f.mul(x, c)).collect::<Vec<u64>>());
    }

    // degrees from Σ_k ω(k) ω(k*) / |C_k| = |G| / d²
    let inv_classes: Vec<usize> = (0..k).map(|i| cg.inverse_class(i)).collect();
    let sqrt_bound = (order as f64).sqrt() as u64 + 1;
    let mut table_rows: Vec<(u64, Vec<u64>)> = Vec::with_capacity(k);
    for omega in rows {
        let mut s = 0u64;
        for i in 0..k {
            let t = f.mul(omega[i], omega[inv_classes[i]]);
            s = f.add(s, f.mul(t, f.inv(cg.size(i) as u64 % l)));
        }
        let target = order % l;
        let mut deg = 0;
        for d in 1..=sqrt_bound {
            if f.mul(f.mul(d % l, d % l), s) == target {
                deg = d;
                break;
            }
        }
        if deg == 0 {
            return Err(SltError::Other("irreducible degree not recovered".into()));
        }
        // θ(k) = d ω(k) / |C_k| mod l
        let theta: Vec<u64> = (0..k)
            .map(|i| f.mul(f.mul(deg % l, omega[i]), f.inv(cg.size(i) as u64 % l)))
            .collect();
        table_rows.push((deg, theta));
    }

    // lift each value through the order-o DFT
    let mut irreducibles = Vec::with_capacity(k);
    for (deg, theta) in &table_rows {
        let mut values = Vec::with_capacity(k);
        for i in 0..k {
            let o = cg.rep_order(i);
            let zo = f.pow(z, exponent / o);
            let zo_inv = f.inv(zo);
            // θ at the classes of rep_i^t
            let theta_pows: Vec<u64> = (0..o).map(|t| theta[cg.power_class(i, t)]).collect();
            let oinv = f.inv(o % l);
            let mut val = CycNum::zero();
            for s in 0..o {
                let mut m_s = 0u64;
                for (t, &th) in theta_pows.iter().enumerate() {
                    m_s = f.add(m_s, f.mul(th, f.pow(zo_inv, s * t as u64 % o)));
                }
                m_s = f.mul(m_s, oinv);
                // multiplicities are bounded by the degree, so the residue
                // is the true integer
                debug_assert!(m_s <= *deg);
                if m_s != 0 {
                    let term = CycNum::zeta_pow(o, s as i64)?
                        .scale(&BigRational::from_integer(BigInt::from(m_s)));
                    val = val.add(&term);
                }
            }
            values.push(val);
        }
        irreducibles.push(ClassFunction::new(&cg.form(), values));
    }

    // deterministic ordering: by degree, then lexicographic value list
    let conductor = exponent;
    irreducibles.sort_by(|a, b| {
        let da = a.degree().as_integer().unwrap();
        let db = b.degree().as_integer().unwrap();
        da.cmp(&db).then_with(|| value_key(a, conductor).cmp(&value_key(b, conductor)))
    });

    let table = CharTable {
        form: cg.form(),
        irreducibles,
        conductor,
        dixon_prime: l,
    };
    validate_table(cg, &table)?;
    Ok(table)
}

fn value_key(f: &ClassFunction, conductor: u64) -> Vec<Vec<(BigInt, BigInt)>> {
    f.values
        .iter()
        .map(|v| {
            v.embed(conductor * v.conductor() / arith::gcd(conductor as i128, v.conductor() as i128) as u64)
                .unwrap()
                .coeffs()
                .iter()
                .map(|c| (c.numer().clone(), c.denom().clone()))
                .collect()
        })
        .collect()
}

fn split_space(f: &ModP, m: &[Vec<u64>], basis: &[Vec<u64>]) -> Vec<Vec<Vec<u64>>> {
    let k = basis[0].len();
    let d = basis.len();
    // images of basis vectors under M
    let images: Vec<Vec<u64>> = basis
        .iter()
        .map(|b| {
            (0..k)
                .map(|row| {
                    (0..k).fold(0u64, |s, col| f.add(s, f.mul(m[row][col], b[col])))
                })
                .collect()
        })
        .collect();
    // restriction matrix R: images[j] = Σ_i R[i][j] basis[i]
    let r = express_in_basis(f, basis, &images);
    // eigenvalues: roots of the characteristic polynomial
    let charpoly = char_poly(f, &r);
    let mut out = Vec::new();
    for lam in 0..f.p {
        if eval_poly(f, &charpoly, lam) != 0 {
            continue;
        }
        // kernel of R - lam inside the subspace
        let mut mat = r.clone();
        for i in 0..d {
            mat[i][i] = f.sub(mat[i][i], lam);
        }
        let kern = kernel(f, &mat);
        if kern.is_empty() {
            continue;
        }
        let sub: Vec<Vec<u64>> = kern
            .iter()
            .map(|coeffs| {
                let mut v = vec![0u64; k];
                for (ci, b) in coeffs.iter().zip(basis) {
                    if *ci != 0 {
                        for (x, y) in v.iter_mut().zip(b) {
                            *x = f.add(*x, f.mul(*ci, *y));
                        }
                    }
                }
                v
            })
            .collect();
        out.push(sub);
    }
    out
}

fn express_in_basis(f: &ModP, basis: &[Vec<u64>], images: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let k = basis[0].len();
    let d = basis.len();
    // solve basis^T · X = images^T column by column (least terms: Gaussian)
    let mut aug: Vec<Vec<u64>> = (0..k)
        .map(|row| {
            let mut r: Vec<u64> = basis.iter().map(|b| b[row]).collect();
            r.extend(images.iter().map(|im| im[row]));
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut prow = 0;
    for col in 0..d {
        let Some(pr) = (prow..k).find(|&r| aug[r][col] != 0) else {
            continue;
        };
        aug.swap(prow, pr);
        let inv = f.inv(aug[prow][col]);
        for v in aug[prow].iter_mut() {
            *v = f.mul(*v, inv);
        }
        for r in 0..k {
            if r != prow && aug[r][col] != 0 {
                let fac = aug[r][col];
                let prow_copy = aug[prow].clone();
                for (v, pv) in aug[r].iter_mut().zip(prow_copy) {
                    *v = f.sub(*v, f.mul(fac, pv));
                }
            }
        }
        pivots.push((prow, col));
        prow += 1;
    }
    let mut x = vec![vec![0u64; d]; d];
    for (pr, pc) in pivots {
        for j in 0..d {
            x[pc][j] = aug[pr][d + j];
        }
    }
    x
}

fn char_poly(f: &ModP, m: &[Vec<u64>]) -> Vec<u64> {
    // Faddeev–LeVerrier; valid since the dimension is below the prime
    let d = m.len();
    let mut coeffs = vec![0u64; d + 1];
    coeffs[d] = 1;
    let mut mk: Vec<Vec<u64>> = vec![vec![0; d]; d]; // M_0 = 0
    let mut c = 1u64; // c_d = 1
    let _ = c;
    let mut prev = vec![vec![0u64; d]; d];
    for i in 0..d {
        prev[i][i] = 0;
    }
    // iterative: M_1 = M, c_{d-1} = -tr(M)/1 ...
    let mut mcur = m.to_vec();
    for kk in 1..=d {
        let tr = (0..d).fold(0u64, |s, i| f.add(s, mcur[i][i]));
        let ck = f.mul(tr, f.inv(kk as u64 % f.p));
        let ck = f.sub(0, ck); // -tr/k
        coeffs[d - kk] = ck;
        if kk == d {
            break;
        }
        // M_{k+1} = M (M_k + c_k I)
        let mut madj = mcur.clone();
        for i in 0..d {
            madj[i][i] = f.add(madj[i][i], ck);
        }
        let mut next = vec![vec![0u64; d]; d];
        for i in 0..d {
            for t in 0..d {
                if m[i][t] == 0 {
                    continue;
                }
                for j in 0..d {
                    next[i][j] = f.add(next[i][j], f.mul(m[i][t], madj[t][j]));
                }
            }
        }
        mcur = next;
        mk = madj;
        let _ = &mk;
    }
    coeffs
}

fn eval_poly(f: &ModP, coeffs: &[u64], x: u64) -> u64 {
    let mut acc = 0u64;
    for &c in coeffs.iter().rev() {
        acc = f.add(f.mul(acc, x), c);
    }
    acc
}

fn kernel(f: &ModP, m: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let rows = m.len();
    let cols = m[0].len();
    let mut a = m.to_vec();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut prow = 0;
    for col in 0..cols {
        let Some(pr) = (prow..rows).find(|&r| a[r][col] != 0) else {
            continue;
        };
        a.swap(prow, pr);
        let inv = f.inv(a[prow][col]);
        for v in a[prow].iter_mut() {
            *v = f.mul(*v, inv);
        }
        for r in 0..rows {
            if r != prow && a[r][col] != 0 {
                let fac = a[r][col];
                let prow_copy = a[prow].clone();
                for (v, pv) in a[r].iter_mut().zip(prow_copy) {
                    *v = f.sub(*v, f.mul(fac, pv));
                }
            }
        }
        pivots.push((prow, col));
        prow += 1;
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec![0u64; cols];
        v[free] = 1;
        for &(pr, pc) in &pivots {
            v[pc] = f.sub(0, a[pr][free]);
        }
        basis.push(v);
    }
    basis
}

/// Exact validation: row orthonormality, column norm at identity, and the
/// degree sum Σ χ(1)² = |G|.
fn validate_table(cg: &ClassedGroup, table: &CharTable) -> Result<()> {
    let mut degsum = BigInt::zero();
    for chi in &table.irreducibles {
        let deg = chi.degree().as_integer().ok_or_else(|| SltError::SelfValidation {
            what: table.form.clone(),
            detail: "non-integer degree".into(),
        })?;
        degsum += &deg * &deg;
        let norm = inner_product(cg, chi, chi)?;
        if norm != CycNum::one() {
            return Err(SltError::SelfValidation {
                what: table.form.clone(),
                detail: format!("row with degree {deg} has norm {norm}"),
            });
        }
    }
    if degsum != BigInt::from(cg.order()) {
        return Err(SltError::SelfValidation {
            what: table.form.clone(),
            detail: format!("degree squares sum to {degsum}, group order {}", cg.order()),
        });
    }
    for i in 0..table.irreducibles.len() {
        for j in 0..i {
            let ip = inner_product(cg, &table.irreducibles[i], &table.irreducibles[j])?;
            if !ip.is_zero() {
                return Err(SltError::SelfValidation {
                    what: table.form.clone(),
                    detail: format!("rows {i}, {j} not orthogonal"),
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FieldTower;
    use crate::groups::{Family, Frob, GroupSpec};

    fn classed(family: Family, n: u32, q: u64, frob: Frob, level: u32) -> ClassedGroup {
        let p = crate::arith::factorize(q as u128)[0].0 as u64;
        let tower = Arc::new(FieldTower::build(p, q, &[1, 2, level.max(1)]).unwrap());
        let g = MatrixGroup::build(
            &tower,
            GroupSpec {
                family,
                n,
                q,
                frob,
                level,
            },
        )
        .unwrap();
        ClassedGroup::new(Arc::new(g))
    }

    #[test]
    fn sl2_f3_table() {
        let cg = classed(Family::Sl, 2, 3, Frob::Plus, 1);
        let t = character_table(&cg).unwrap();
        let mut degs: Vec<i64> = t
            .degrees()
            .iter()
            .map(|d| i64::try_from(d).unwrap())
            .collect();
        degs.sort_unstable();
        assert_eq!(degs, vec![1, 1, 1, 2, 2, 2, 3]);
    }

    #[test]
    fn sl2_f5_table_dixon_prime_61() {
        let cg = classed(Family::Sl, 2, 5, Frob::Plus, 1);
        assert_eq!(cg.exponent(), 60);
        let t = character_table(&cg).unwrap();
        assert_eq!(t.dixon_prime, 61);
        let mut degs: Vec<i64> = t
            .degrees()
            .iter()
            .map(|d| i64::try_from(d).unwrap())
            .collect();
        degs.sort_unstable();
        assert_eq!(degs, vec![1, 2, 2, 3, 3, 4, 4, 5, 6]);
    }

    #[test]
    fn trivial_group_table() {
        let p = 3;
        let tower = Arc::new(FieldTower::build(p, p, &[1]).unwrap());
        let id = Mat::identity(&tower.field, 1);
        let g = MatrixGroup::from_elements(
            &tower,
            GroupSpec {
                family: Family::Gl,
                n: 1,
                q: 3,
                frob: Frob::Plus,
                level: 1,
            },
            vec![id],
            false,
        );
        let cg = ClassedGroup::new(Arc::new(g));
        let t = character_table(&cg).unwrap();
        assert_eq!(t.irreducibles.len(), 1);
        assert_eq!(t.irreducibles[0].values[0], CycNum::one());
    }

    #[test]
    fn induction_from_unipotent_sl2_f3() {
        let p = 3;
        let tower = Arc::new(FieldTower::build(p, p, &[1, 2]).unwrap());
        let sl = Arc::new(
            MatrixGroup::build(
                &tower,
                GroupSpec {
                    family: Family::Sl,
                    n: 2,
                    q: 3,
                    frob: Frob::Plus,
                    level: 1,
                },
            )
            .unwrap(),
        );
        let u = Arc::new(
            MatrixGroup::build(
                &tower,
                GroupSpec {
                    family: Family::UpperUnipotent,
                    n: 2,
                    q: 3,
                    frob: Frob::Plus,
                    level: 1,
                },
            )
            .unwrap(),
        );
        let csl = ClassedGroup::new(sl);
        let cu = ClassedGroup::new(u);
        // Ind of the trivial character of U has degree [G : U] = 8
        let ind = induce(&cu, &csl, &trivial_character(&cu)).unwrap();
        assert_eq!(ind.degree(), &CycNum::from_int(8));
        // Frobenius reciprocity against the whole table
        let table = character_table(&csl).unwrap();
        let triv_u = trivial_character(&cu);
        for chi in &table.irreducibles {
            let lhs = inner_product(&csl, &ind, chi).unwrap();
            let res = restrict(&csl, &cu, chi).unwrap();
            let rhs = inner_product(&cu, &triv_u, &res).unwrap().conj();
            assert_eq!(lhs, rhs.conj());
        }
    }

    #[test]
    fn restriction_of_trivial_is_trivial_and_degree_preserved() {
        let p = 5;
        let tower = Arc::new(FieldTower::build(p, p, &[1, 2]).unwrap());
        let gl = Arc::new(
            MatrixGroup::build(
                &tower,
                GroupSpec {
                    family: Family::Gl,
                    n: 2,
                    q: 5,
                    frob: Frob::Plus,
                    level: 1,
                },
            )
            .unwrap(),
        );
        let sl = Arc::new(
            MatrixGroup::build(
                &tower,
                GroupSpec {
                    family: Family::Sl,
                    n: 2,
                    q: 5,
                    frob: Frob::Plus,
                    level: 1,
                },
            )
            .unwrap(),
        );
        let cgl = ClassedGroup::new(gl);
        let csl = ClassedGroup::new(sl);
        let triv = trivial_character(&cgl);
        let res = restrict(&cgl, &csl, &triv).unwrap();
        assert!(res.values.iter().all(|v| *v == CycNum::one()));
        assert_eq!(res.degree(), triv.degree());
    }
}
