//! Proposition verification: the Jordan bridge J, the per-case check
//! suites, and machine-readable reports. A mismatch never aborts a suite;
//! every requested check runs and the report aggregates.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::charfun::{inner_product, precompose, restrict, ClassedGroup};
use crate::cyclotomic::CycNum;
use crate::error::{Result, SltError};
use crate::gf::FieldTower;
use crate::groups::{Family, Frob, GroupSpec, Mat, MatrixGroup};
use crate::lang::{self, TwistTable};
use crate::sl_side::SlSide;
use crate::torus_side::TorusSide;

pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseId {
    pub n: u32,
    pub q: u64,
    pub frob: Frob,
}

impl std::fmt::Display for CaseId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self.frob {
            Frob::Plus => "+",
            Frob::Minus => "-",
        };
        write!(f, "(n={}, q={}, eps={})", self.n, self.q, s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PropResult {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Serialize, Deserialize)]
pub struct VerificationReport {
    pub version: u32,
    pub case: String,
    pub propositions: Vec<PropResult>,
    pub timings_ms: Vec<(String, u128)>,
    #[serde(default)]
    pub cache_provenance: Vec<String>,
}

impl VerificationReport {
    pub fn new(case: &str) -> VerificationReport {
        VerificationReport {
            version: REPORT_VERSION,
            case: case.to_string(),
            propositions: Vec::new(),
            timings_ms: Vec::new(),
            cache_provenance: Vec::new(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.propositions.iter().all(|p| p.status == Status::Pass)
    }

    fn push(&mut self, name: &str, started: Instant, outcome: Result<Option<String>>) {
        let elapsed = started.elapsed().as_millis();
        let result = match outcome {
            Ok(None) => PropResult {
                name: name.into(),
                status: Status::Pass,
                witness: None,
            },
            Ok(Some(w)) => PropResult {
                name: name.into(),
                status: Status::Fail,
                witness: Some(w),
            },
            Err(e) => PropResult {
                name: name.into(),
                status: Status::Fail,
                witness: Some(format!("error: {e}")),
            },
        };
        self.propositions.push(result);
        self.timings_ms.push((name.into(), elapsed));
    }
}

/// The bijection J: χ_{j,i} ↦ θ_{j,i} between the two labeled Mellin bases,
/// together with the computed Shintani label maps on both sides.
pub struct JordanMap {
    pub case: CaseId,
    /// the n² Mellin labels
    pub labels: Vec<(u32, u32)>,
    /// computed label permutation on the χ side
    pub sh_chi: HashMap<(u32, u32), (u32, u32)>,
    /// computed label permutation on the θ side
    pub sh_theta: HashMap<(u32, u32), (u32, u32)>,
    /// the trivial-ŝ Mellin index e with Σ_z χ_{z,j} = χ_{e,j}
    pub r_index_chi: Vec<u32>,
    /// the Mellin index of the disconnected R per form
    pub r_index_theta: Vec<u32>,
}

impl JordanMap {
    /// J ∘ Sh = Sh ∘ J as an n²×n² permutation-matrix identity.
    pub fn intertwines(&self) -> bool {
        self.labels.iter().all(|l| self.sh_chi[l] == self.sh_theta[l])
    }

    /// J(Σ_z χ_{z,j}) = R of the disconnected model.
    pub fn r_matches(&self) -> bool {
        self.r_index_chi == self.r_index_theta
    }
}

/// Build the Jordan bridge for one case: both sides computed, both label
/// maps derived from the honest twists, and the R-to-R identification.
pub fn build_jordan(side: &SlSide, twist: &TwistTable) -> Result<JordanMap> {
    let n = side.n;
    let case = CaseId {
        n,
        q: side.q,
        frob: side.frob,
    };
    let labels: Vec<(u32, u32)> = (0..n)
        .flat_map(|j| (0..n).map(move |i| (j, i)))
        .collect();

    // χ side: unique Mellin label matching each twisted basis function
    let mut sh_chi = HashMap::new();
    let all_chi: HashMap<(u32, u32), crate::charfun::ClassFunction> = labels
        .iter()
        .map(|&(j, i)| ((j, i), side.mellin_chi(j, i)))
        .collect();
    for &(j, i) in &labels {
        let twisted = precompose(&all_chi[&(j, i)], &twist.map, &side.sl.form());
        let mut hits = Vec::new();
        for &(jp, ip) in &labels {
            if twisted == all_chi[&(jp, ip)] {
                hits.push((jp, ip));
            }
        }
        if hits.len() != 1 {
            return Err(SltError::Identification(format!(
                "Sh chi_{{{j},{i}}} matches {} Mellin labels",
                hits.len()
            )));
        }
        sh_chi.insert((j, i), hits[0]);
    }

    // θ side
    let theta_labels = side.ts.sh_theta_labels()?;
    let mut sh_theta = HashMap::new();
    for &(j, i) in &labels {
        sh_theta.insert((j, i), theta_labels[j as usize][i as usize]);
    }

    // R-to-R: Σ_z χ_{z,j} must be the Mellin transform at the trivial-ŝ
    // index, and the disconnected induction identifies the same index.
    let mut r_index_chi = Vec::with_capacity(n as usize);
    let mut r_index_theta = Vec::with_capacity(n as usize);
    for j in 0..n {
        let res = restrict(&side.gl, &side.sl, &side.r_char[j as usize])?;
        let mut found = None;
        for e in 0..n {
            if side.mellin_chi(e, j) == res {
                found = Some(e);
                break;
            }
        }
        let e = found.ok_or_else(|| {
            SltError::Identification(format!("Σ_z chi_{{z,{j}}} is not a Mellin transform"))
        })?;
        r_index_chi.push(e);
        r_index_theta.push(side.ts.dl_disconnected(j)?);
    }

    Ok(JordanMap {
        case,
        labels,
        sh_chi,
        sh_theta,
        r_index_chi,
        r_index_theta,
    })
}

// ---------------------------------------------------------------------------
// Proposition runners. Each returns Ok(None) on pass, Ok(Some(witness)) on a
// verification mismatch, Err on broken preconditions.
// ---------------------------------------------------------------------------

/// Prop "Sh theta": computed Sh on the θ-Mellin basis equals the predicted
/// index (j, i+j), with the n = 2, q ≡ -1 (mod 4) branch (j, i+j-1).
pub fn check_sh_theta(case: CaseId) -> Result<Option<String>> {
    let ts = TorusSide::build(case.n, case.q, case.frob)?;
    let labels = ts.sh_theta_labels()?;
    let mut bad = Vec::new();
    for j in 0..case.n {
        for i in 0..case.n {
            let computed = labels[j as usize][i as usize];
            let predicted = ts.sh_theta_prediction(j, i);
            if computed != predicted {
                bad.push(format!("Sh θ_{{{j},{i}}} = θ_{{{:?}}} ≠ θ_{{{:?}}}", computed, predicted));
            }
        }
    }
    ts.verify_mellin_invertible()?;
    if bad.is_empty() {
        Ok(None)
    } else {
        Ok(Some(bad.join("; ")))
    }
}

/// Lemma "value of hat s": closed form vs norm-map oracle (enforced inside
/// TorusSide::build) plus the integer congruence instance for n odd.
pub fn check_hat_s(case: CaseId) -> Result<Option<String>> {
    let _ts = TorusSide::build(case.n, case.q, case.frob)?;
    if case.n % 2 == 1 {
        let (quot, ok) = crate::torus_side::hat_s_congruence_instance(case.n, case.q, case.frob);
        if !ok {
            return Ok(Some(format!(
                "((εq)^n - 1)/(n(εq - 1)) = {quot} is not ≡ 1 mod {}",
                case.n
            )));
        }
    }
    Ok(None)
}

/// Prop "Sh chi": the extracted Mellin basis satisfies the predicted index
/// formula under the witness-built twist table.
pub fn check_sh_chi(side: &SlSide, twist: &TwistTable) -> Result<Option<String>> {
    let bad = side.verify_sh_chi(twist)?;
    if bad.is_empty() {
        Ok(None)
    } else {
        Ok(Some(format!("mismatching (j,i): {bad:?}")))
    }
}

/// Final Proposition: J ∘ Sh = Sh ∘ J on the n² labels and the R-to-R match.
pub fn check_jordan(side: &SlSide, twist: &TwistTable) -> Result<Option<String>> {
    let j = build_jordan(side, twist)?;
    if !j.intertwines() {
        let detail: Vec<String> = j
            .labels
            .iter()
            .filter(|l| j.sh_chi[l] != j.sh_theta[l])
            .map(|l| format!("{l:?}: chi→{:?}, theta→{:?}", j.sh_chi[l], j.sh_theta[l]))
            .collect();
        return Ok(Some(format!("intertwining fails at {}", detail.join("; "))));
    }
    if !j.r_matches() {
        return Ok(Some(format!(
            "R-to-R mismatch: chi side {:?}, theta side {:?}",
            j.r_index_chi, j.r_index_theta
        )));
    }
    Ok(None)
}

/// Deshpande's Proposition on disconnected cosets: the element-level twist
/// transports conjugacy classes of coset c^k in form i bijectively onto
/// those of form i+k.
pub fn check_deshpande_prop_sh(case: CaseId) -> Result<Option<String>> {
    let ts = TorusSide::build(case.n, case.q, case.frob)?;
    match ts.verify_coset_transport() {
        Ok(()) => Ok(None),
        Err(SltError::SelfValidation { detail, .. }) => Ok(Some(detail)),
        Err(e) => Err(e),
    }
}

/// Lemma "quotient": π ∘ Sh = Sh ∘ π on all classes of GL₂(F_q)^F, with
/// both twist tables built from independent witnesses.
pub fn check_quotient_commute(q: u64, m_max: u64) -> Result<Option<String>> {
    let tower = Arc::new(FieldTower::build(q, q, &[1, 2])?);
    let gl = ClassedGroup::new(Arc::new(MatrixGroup::build(
        &tower,
        GroupSpec {
            family: Family::Gl,
            n: 2,
            q,
            frob: Frob::Plus,
            level: 1,
        },
    )?));
    let pgl = ClassedGroup::new(Arc::new(MatrixGroup::build(
        &tower,
        GroupSpec {
            family: Family::Pgl,
            n: 2,
            q,
            frob: Frob::Plus,
            level: 1,
        },
    )?));
    let gl_twist = lang::shintani_class_table(&gl, m_max)?;
    let pgl_twist = lang::shintani_class_table(&pgl, m_max)?;
    // Sh is the identity on GL_n (connected centre)
    for (i, &t) in gl_twist.map.iter().enumerate() {
        if t != i {
            return Ok(Some(format!("Sh moved a GL class: {i} → {t}")));
        }
    }
    // π surjective on classes and commuting with Sh
    let mut hit = vec![false; pgl.class_count()];
    for i in 0..gl.class_count() {
        let rep = gl.rep(i).clone();
        let pi_rep = gl.group.project_pgl(&rep);
        let pgl_class = pgl.class_of(&pi_rep);
        hit[pgl_class] = true;
        let sh_gl_img = gl.rep(gl_twist.map[i]).clone();
        let lhs = pgl.class_of(&gl.group.project_pgl(&sh_gl_img));
        let rhs = pgl_twist.map[pgl_class];
        if lhs != rhs {
            return Ok(Some(format!(
                "π∘Sh ≠ Sh∘π at GL class {i}: {lhs} vs {rhs}"
            )));
        }
    }
    if !hit.iter().all(|&h| h) {
        return Ok(Some("π not surjective on classes".into()));
    }
    Ok(None)
}

/// Lemma "restriction": Res of the GL Deligne–Lusztig character is
/// multiplicity-free with exactly n constituents, and ⟨Res χ̃, Res χ̃⟩
/// counts the twist-stabilizing linear characters.
pub fn check_restriction_criterion(side: &SlSide) -> Result<Option<String>> {
    for j in 0..side.n {
        let res = restrict(&side.gl, &side.sl, &side.r_char[j as usize])?;
        let mut count = 0;
        for irr in &side.sl_table.irreducibles {
            let m = inner_product(&side.sl, &res, irr)?;
            if m.is_zero() {
                continue;
            }
            if m != CycNum::one() {
                return Ok(Some(format!(
                    "Res R_{j} has a constituent of multiplicity {m}"
                )));
            }
            count += 1;
        }
        if count != side.n as usize {
            return Ok(Some(format!("Res R_{j} has {count} constituents")));
        }
        if !side.verify_restriction_sum(j)? {
            return Ok(Some(format!("Σ_z chi_{{z,{j}}} ≠ Res R_{j}")));
        }
    }
    // norms of restrictions are the twist-stabilizer counts, which divide n
    for chi_t in &side.gl_table.irreducibles {
        let res = restrict(&side.gl, &side.sl, chi_t)?;
        let ip = inner_product(&side.sl, &res, &res)?;
        let Some(k) = ip.as_integer() else {
            return Ok(Some("non-integral restriction norm".into()));
        };
        let kk: u64 = k.try_into().map_err(|_| SltError::Other("norm overflow".into()))?;
        if kk == 0 || side.n as u64 % kk != 0 {
            return Ok(Some(format!("restriction norm {kk} does not divide n")));
        }
    }
    Ok(None)
}

/// The Drinfeld-double recovery: commuting pairs of S₃ have 8 orbits
/// matching Σ #Irr(centralizer), and the partition is GL₂(ℤ)-stable.
pub fn check_drinfeld_s3() -> Result<Option<String>> {
    let tower = Arc::new(FieldTower::build(2, 2, &[1, 2])?);
    let fq = &tower.field;
    let perms3: [[usize; 3]; 6] = [
        [0, 1, 2],
        [1, 0, 2],
        [0, 2, 1],
        [2, 1, 0],
        [1, 2, 0],
        [2, 0, 1],
    ];
    let mats: Vec<Mat> = perms3
        .iter()
        .map(|p| {
            let mut m = Mat {
                n: 3,
                e: vec![crate::gf::FqElem::Zero; 9],
            };
            for (j, &i) in p.iter().enumerate() {
                m.set(i, j, fq.one());
            }
            m
        })
        .collect();
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
    let space = lang::PairSpace::new(s3.clone());
    let (orbits, orbit_of) = lang::drinfeld_orbits(&space);
    if orbits != 8 {
        return Ok(Some(format!("S₃ has {orbits} orbits, expected 8")));
    }
    let cg = ClassedGroup::new(s3.clone());
    let oracle = lang::drinfeld_orbit_count_oracle(&cg);
    if oracle != 8 {
        return Ok(Some(format!("centralizer oracle gives {oracle}")));
    }
    // stability of the partition under the S and T generators
    let fqr = s3.fq();
    let pairs = lang::commuting_pairs(&space);
    for m in [[[1i64, 1], [0, 1]], [[0, -1], [1, 0]]] {
        let mut image: HashMap<usize, usize> = HashMap::new();
        for p in &pairs {
            let o = orbit_of[&(p.first.x.key(fqr), p.second.x.key(fqr))];
            let q2 = lang::gl2z_act(&space, m, p)?;
            let oq = orbit_of[&(q2.first.x.key(fqr), q2.second.x.key(fqr))];
            if let Some(&prev) = image.get(&o) {
                if prev != oq {
                    return Ok(Some("orbit partition not GL₂(ℤ)-stable".into()));
                }
            } else {
                image.insert(o, oq);
            }
        }
    }
    Ok(None)
}

/// The preserved-inner-product identity ⟨Sh f, Sh g⟩ = ⟨f, g⟩ on the full
/// character table of SL₂(F_q).
pub fn check_sh_preserves_inner_products(side: &SlSide, twist: &TwistTable) -> Result<Option<String>> {
    let rows = &side.sl_table.irreducibles;
    for (a, fa) in rows.iter().enumerate() {
        let sha = precompose(fa, &twist.map, &side.sl.form());
        for (b, fb) in rows.iter().enumerate() {
            let shb = precompose(fb, &twist.map, &side.sl.form());
            let lhs = inner_product(&side.sl, &sha, &shb)?;
            let rhs = inner_product(&side.sl, fa, fb)?;
            if lhs != rhs {
                return Ok(Some(format!("⟨Sh·,Sh·⟩ differs at rows {a}, {b}")));
            }
        }
    }
    Ok(None)
}

/// Regular-unipotent cross-check: witness twist vs the z·u_{z'} ↦ z·u_{zz'}
/// rule.
pub fn check_regular_twist(side: &SlSide, twist: &TwistTable) -> Result<Option<String>> {
    let bad = side.verify_regular_twist_rule(twist)?;
    if bad.is_empty() {
        Ok(None)
    } else {
        Ok(Some(format!("rule fails at (z, z') ∈ {bad:?}")))
    }
}

/// Known proposition names for the CLI.
pub const PROPOSITIONS: &[&str] = &[
    "sh-theta",
    "hat-s",
    "sh-chi",
    "jordan-intertwine",
    "deshpande-prop-sh",
    "quotient-commute",
    "restriction-criterion",
    "drinfeld",
];

/// Run one named proposition for a case and append to a report.
pub fn verify_proposition(name: &str, case: CaseId, m_max: u64) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(&case.to_string());
    let t0 = Instant::now();
    match name {
        "sh-theta" => {
            let r = check_sh_theta(case);
            report.push("sh-theta", t0, r);
        }
        "hat-s" => {
            let r = check_hat_s(case);
            report.push("hat-s", t0, r);
        }
        "deshpande-prop-sh" => {
            let r = check_deshpande_prop_sh(case);
            report.push("deshpande-prop-sh", t0, r);
        }
        "sh-chi" | "jordan-intertwine" | "restriction-criterion" => {
            match SlSide::build(case.n, case.q, case.frob) {
                Ok(side) => {
                    let twist = lang::shintani_class_table(&side.sl, m_max)?;
                    let r = match name {
                        "sh-chi" => check_sh_chi(&side, &twist),
                        "jordan-intertwine" => check_jordan(&side, &twist),
                        _ => check_restriction_criterion(&side),
                    };
                    report.push(name, t0, r);
                }
                Err(e) => report.push(name, t0, Err(e)),
            }
        }
        "quotient-commute" => {
            let r = check_quotient_commute(case.q, m_max.max(lang::DEFAULT_M_MAX) * 2);
            report.push("quotient-commute", t0, r);
        }
        "drinfeld" => {
            let r = check_drinfeld_s3();
            report.push("drinfeld", t0, r);
        }
        other => {
            return Err(SltError::Other(format!(
                "unknown proposition {other}; known: {PROPOSITIONS:?}"
            )))
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jordan_bridge_sl2_f3() {
        let side = SlSide::build(2, 3, Frob::Plus).unwrap();
        let twist = lang::shintani_class_table(&side.sl, lang::DEFAULT_M_MAX).unwrap();
        let j = build_jordan(&side, &twist).unwrap();
        assert_eq!(j.labels.len(), 4);
        assert!(j.intertwines());
        assert!(j.r_matches());
        // q ≡ -1 (mod 4): the R-to-R match uses the (1, j) Mellin index
        assert_eq!(j.r_index_chi, vec![1, 1]);
    }

    #[test]
    fn jordan_bridge_sl2_f5() {
        let side = SlSide::build(2, 5, Frob::Plus).unwrap();
        let twist = lang::shintani_class_table(&side.sl, lang::DEFAULT_M_MAX).unwrap();
        let j = build_jordan(&side, &twist).unwrap();
        assert!(j.intertwines());
        assert!(j.r_matches());
        // ŝ_0 trivial: J maps χ_{0,j} = Σ_z χ_{z,j} to θ_{0,j}
        assert_eq!(j.r_index_chi, vec![0, 0]);
    }

    #[test]
    fn quotient_commute_f3() {
        assert_eq!(check_quotient_commute(3, 32).unwrap(), None);
    }

    #[test]
    fn drinfeld_suite() {
        assert_eq!(check_drinfeld_s3().unwrap(), None);
    }

    #[test]
    fn report_schema() {
        let case = CaseId {
            n: 2,
            q: 13,
            frob: Frob::Plus,
        };
        let rep = verify_proposition("hat-s", case, 16).unwrap();
        assert!(rep.all_pass());
        let json = serde_json::to_string_pretty(&rep).unwrap();
        assert!(json.contains("\"version\": 1"));
        let back: VerificationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.case, rep.case);
    }
}
