//! Positive definite integral Gram matrices of degree at most 3: reduced
//! enumeration by determinant, exact short vectors, SL_m(Z) isometries and
//! automorphism counts, genus labels and the mass identity.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exact_algebra::{phi, q, qf, qpow, xi_tilde, Q};
use crate::local_density::alpha;
use crate::padic_forms::{class_key, in_l_prime, prime_factors, qmat_from, ClassKey};

pub type IMat = Vec<Vec<i64>>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("degree {0} is not supported (1..=3)")]
    Degree(usize),
    #[error("determinant bound {0} exceeds the enumeration budget")]
    Budget(i64),
}

/// Largest determinant accepted by [`enumerate_posdef`].
pub const DET_BUDGET: i64 = 2000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PosDefClass {
    pub gram: IMat,
    /// #{X in SL_m(Z) : A[X] = A}
    pub e: u64,
    pub det: i64,
}

pub fn idet(a: &IMat) -> i64 {
    match a.len() {
        0 => 1,
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        3 => {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        }
        _ => {
            let qm = qmat_from(a);
            let d = crate::padic_forms::det(&qm);
            num_traits::ToPrimitive::to_i64(&d.to_integer()).unwrap()
        }
    }
}

fn minor(a: &IMat, r: usize, c: usize) -> IMat {
    a.iter()
        .enumerate()
        .filter(|(i, _)| *i != r)
        .map(|(_, row)| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, x)| *x).collect())
        .collect()
}

/// Leading principal minors all positive.
pub fn is_posdef(a: &IMat) -> bool {
    (1..=a.len()).all(|k| {
        let s: IMat = a[..k].iter().map(|r| r[..k].to_vec()).collect();
        idet(&s) > 0
    })
}

fn isqrt(n: i64) -> i64 {
    if n <= 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as i64;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

pub fn qform(a: &IMat, u: &[i64], v: &[i64]) -> i64 {
    let m = a.len();
    let mut s = 0;
    for i in 0..m {
        if u[i] == 0 {
            continue;
        }
        for j in 0..m {
            s += u[i] * a[i][j] * v[j];
        }
    }
    s
}

/// All v in Z^m with v^t A v = c. The box |v_i|^2 <= c (A^{-1})_{ii} is computed
/// exactly from the cofactors.
pub fn short_vectors(a: &IMat, c: i64) -> Vec<Vec<i64>> {
    let m = a.len();
    let d = idet(a);
    let bnd: Vec<i64> = (0..m)
        .map(|i| {
            let cof = if m == 1 { 1 } else { idet(&minor(a, i, i)) };
            isqrt(c * cof / d)
        })
        .collect();
    let mut out = Vec::new();
    let mut v: Vec<i64> = bnd.iter().map(|b| -b).collect();
    loop {
        if qform(a, &v, &v) == c {
            out.push(v.clone());
        }
        let mut k = 0;
        while k < m {
            v[k] += 1;
            if v[k] <= bnd[k] {
                break;
            }
            v[k] = -bnd[k];
            k += 1;
        }
        if k == m {
            break;
        }
    }
    out
}

/// Count (or detect) X with X^t A X = B and det X = 1 (or |det X| = 1 when `sl` is false).
fn isometries(a: &IMat, b: &IMat, first_only: bool, sl: bool) -> u64 {
    let m = a.len();
    let cand: Vec<Vec<Vec<i64>>> = (0..m).map(|i| short_vectors(a, b[i][i])).collect();
    let mut count = 0u64;
    fn rec(
        i: usize,
        ch: &mut Vec<Vec<i64>>,
        a: &IMat,
        b: &IMat,
        cand: &[Vec<Vec<i64>>],
        count: &mut u64,
        first_only: bool,
        sl: bool,
    ) -> bool {
        let m = a.len();
        if i == m {
            let x: IMat = (0..m).map(|r| (0..m).map(|j| ch[j][r]).collect()).collect();
            let d = idet(&x);
            if (sl && d == 1) || (!sl && d.abs() == 1) {
                *count += 1;
                return first_only;
            }
            return false;
        }
        for v in &cand[i] {
            if (0..i).all(|j| qform(a, &ch[j], v) == b[j][i]) {
                ch.push(v.clone());
                let stop = rec(i + 1, ch, a, b, cand, count, first_only, sl);
                ch.pop();
                if stop {
                    return true;
                }
            }
        }
        false
    }
    rec(0, &mut Vec::new(), a, b, &cand, &mut count, first_only, sl);
    count
}

pub fn sl_auto_count(a: &IMat) -> u64 {
    isometries(a, a, false, true)
}

pub fn sl_equivalent(a: &IMat, b: &IMat) -> bool {
    a.len() == b.len() && idet(a) == idet(b) && isometries(a, b, true, true) > 0
}

/// Reduced Gram matrices (a <= b <= c, |off-diagonal| bounded by half the
/// earlier diagonal) of degree m with 0 < det <= dmax, grouped by det.
pub fn reduced_upto(m: usize, dmax: i64) -> Result<BTreeMap<i64, Vec<IMat>>, LatticeError> {
    if dmax > DET_BUDGET {
        return Err(LatticeError::Budget(dmax));
    }
    let mut out: BTreeMap<i64, Vec<IMat>> = BTreeMap::new();
    let mut push = |a: IMat| {
        let d = idet(&a);
        if d > 0 && d <= dmax && is_posdef(&a) {
            out.entry(d).or_default().push(a);
        }
    };
    match m {
        1 => {
            for d in 1..=dmax {
                push(vec![vec![d]]);
            }
        }
        2 => {
            let amax = isqrt(4 * dmax / 3) + 1;
            for a in 1..=amax {
                for b in -(a / 2)..=(a / 2) {
                    for c in a..=((dmax + b * b) / a + 1) {
                        push(vec![vec![a, b], vec![b, c]]);
                    }
                }
            }
        }
        3 => {
            let amax = (2.0 * dmax as f64).cbrt() as i64 + 2;
            for a in 1..=amax {
                for b in a..=isqrt(2 * dmax / a) + 2 {
                    for c in b..=(2 * dmax / (a * b) + 2) {
                        for f in -(a / 2)..=(a / 2) {
                            for g in -(a / 2)..=(a / 2) {
                                for h in -(b / 2)..=(b / 2) {
                                    push(vec![vec![a, f, g], vec![f, b, h], vec![g, h, c]]);
                                }
                            }
                        }
                    }
                }
            }
        }
        _ => return Err(LatticeError::Degree(m)),
    }
    Ok(out)
}

/// SL_m(Z) classes among candidate Gram matrices of one determinant.
pub fn classes_from(cands: &[IMat]) -> Vec<PosDefClass> {
    let mut reps: Vec<IMat> = Vec::new();
    for a in cands {
        if reps.iter().any(|r| sl_equivalent(r, a)) {
            continue;
        }
        reps.push(a.clone());
    }
    reps.into_iter()
        .map(|g| {
            let e = sl_auto_count(&g);
            let det = idet(&g);
            PosDefClass { gram: g, e, det }
        })
        .collect()
}

/// All SL_m(Z) classes of positive definite integral Gram matrices with det <= dmax,
/// optionally restricted by a filter applied before deduplication.
pub fn enumerate_posdef_filtered(
    m: usize,
    dmax: i64,
    filter: impl Fn(&IMat) -> bool + Sync,
) -> Result<Vec<PosDefClass>, LatticeError> {
    let red = reduced_upto(m, dmax)?;
    let groups: Vec<(i64, Vec<IMat>)> =
        red.into_iter().map(|(d, v)| (d, v.into_iter().filter(|a| filter(a)).collect())).collect();
    let mut per: Vec<(i64, Vec<PosDefClass>)> =
        groups.par_iter().map(|(d, v)| (*d, classes_from(v))).collect();
    per.sort_by_key(|x| x.0);
    Ok(per.into_iter().flat_map(|x| x.1).collect())
}

pub fn enumerate_posdef(m: usize, dmax: i64) -> Result<Vec<PosDefClass>, LatticeError> {
    enumerate_posdef_filtered(m, dmax, |_| true)
}

/// Local class keys at every p dividing 2 det.
pub type GenusLabel = Vec<(u64, ClassKey)>;

pub fn genus_label(a: &IMat) -> GenusLabel {
    let qm = qmat_from(a);
    prime_factors(2 * idet(a) as u64).into_iter().map(|p| (p, class_key(&qm, p))).collect()
}

/// Classes in the genus of A.
pub fn genus_members(a: &IMat) -> Result<Vec<PosDefClass>, LatticeError> {
    let d = idet(a);
    let lab = genus_label(a);
    let red = reduced_upto(a.len(), d)?;
    let cands: Vec<IMat> = red.get(&d).cloned().unwrap_or_default();
    Ok(classes_from(&cands).into_iter().filter(|c| genus_label(&c.gram) == lab).collect())
}

/// The right-hand side of the mass identity for a Gram matrix of degree n-1.
pub fn mass_rhs(a: &IMat, n: usize) -> Q {
    let qm = qmat_from(a);
    let d = idet(a);
    let mut r = q(1);
    for i in 1..=(n - 2) / 2 {
        r *= xi_tilde(2 * i);
    }
    let delta = if n == 2 { 1 } else { 0 };
    r *= qpow(2, 3 - n as i64 - delta);
    r *= crate::exact_algebra::qbig(num_bigint::BigInt::from(d).pow((n / 2) as u32));
    for p in prime_factors(2 * d as u64) {
        r *= phi(((n - 2) / 2) as i64, &qf(1, (p * p) as i64)) / alpha(&qm, p);
    }
    r
}

#[derive(Clone, Debug, Serialize)]
pub struct MassRecord {
    pub det: i64,
    pub classes: usize,
    pub lhs: String,
    pub rhs: String,
    pub ok: bool,
}

/// sum over the genus of 1/e equals [`mass_rhs`].
pub fn mass_check(members: &[PosDefClass], n: usize) -> MassRecord {
    let lhs: Q = members.iter().map(|c| qf(1, c.e as i64)).fold(q(0), |a, b| a + b);
    let rhs = mass_rhs(&members[0].gram, n);
    MassRecord {
        det: members[0].det,
        classes: members.len(),
        lhs: crate::exact_algebra::qstr(&lhs),
        rhs: crate::exact_algebra::qstr(&rhs),
        ok: lhs == rhs,
    }
}

/// Mass identity for every genus of degree n-1 with det <= dmax.
pub fn mass_check_all(n: usize, dmax: i64) -> Result<Vec<MassRecord>, LatticeError> {
    let cl = enumerate_posdef(n - 1, dmax)?;
    let mut gen: BTreeMap<(i64, GenusLabel), Vec<PosDefClass>> = BTreeMap::new();
    for c in cl {
        gen.entry((c.det, genus_label(&c.gram))).or_default().push(c);
    }
    Ok(gen.values().collect::<Vec<_>>().par_iter().map(|m| mass_check(m, n)).collect())
}

/// Integral A in L'_{m}: A_ii + r_i ≡ 0 mod 4 and A_ij + r_i r_j ≡ 0 mod 2 for some r in {0,1}^m.
pub fn lprime_witness(a: &IMat) -> Option<Vec<u8>> {
    in_l_prime(&qmat_from(a))
}

#[derive(Clone, Debug, Serialize)]
pub struct LPrimeClass {
    pub class: PosDefClass,
    pub witness: Vec<u8>,
    /// det A / 2^{n-2}
    pub index: u64,
}

/// Positive definite L'-classes of degree n-1 with index det A / 2^{n-2} <= nmax.
pub fn enumerate_lprime_classes(n: usize, nmax: u64) -> Result<Vec<LPrimeClass>, LatticeError> {
    let scale = 1i64 << (n - 2);
    let cl = enumerate_posdef_filtered(n - 1, nmax as i64 * scale, |a| lprime_witness(a).is_some())?;
    Ok(cl
        .into_iter()
        .map(|c| {
            assert!(c.det % scale == 0, "index not integral for {:?}", c.gram);
            let witness = lprime_witness(&c.gram).unwrap();
            let index = (c.det / scale) as u64;
            LPrimeClass { class: c, witness, index }
        })
        .collect())
}
