//! Symmetric matrices over Z localized at a prime: valuations, Jordan
//! splittings, Hilbert symbols, Hasse invariants, the 2-adic canonical symbol,
//! class enumeration and the `L'` membership test.
//!
//! Local classes are stored as rational matrices that are integral at `p`.
//! A half-integral form `T` is handled through the integral matrix `2T` when
//! its 2-adic class is needed.

use std::collections::{BTreeMap, HashMap};

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exact_algebra::{q, qpow, qstr, Q};

pub type QMat = Vec<Vec<Q>>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("diagonal entry {0} is not an integer")]
    NonIntegralDiagonal(String),
    #[error("off-diagonal entry {0} is not in (1/2)Z")]
    BadOffDiagonal(String),
    #[error("matrix is singular")]
    Singular,
    #[error("no L' witness exists for this matrix")]
    NotInLPrime,
    #[error("invalid Theta parameters l={l}, d={d}, p={p}")]
    BadTheta { l: usize, d: i64, p: u64 },
}

// ---------------------------------------------------------------------------
// scalars

pub fn val_int(n: &BigInt, p: u64) -> i64 {
    assert!(!n.is_zero(), "valuation of zero");
    let pb = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (qt, r) = n.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        n = qt;
        v += 1;
    }
}

/// p-adic valuation of a nonzero rational.
pub fn val(x: &Q, p: u64) -> i64 {
    val_int(x.numer(), p) - val_int(x.denom(), p)
}

/// x / p^{val(x)}.
pub fn unit_part(x: &Q, p: u64) -> Q {
    x / qpow(p, val(x, p))
}

fn mod_small(n: &BigInt, m: u64) -> u64 {
    n.mod_floor(&BigInt::from(m)).to_u64().unwrap()
}

fn inv_mod(a: u64, m: u64) -> u64 {
    let (mut t, mut nt, mut r, mut nr) = (0i64, 1i64, m as i64, a as i64);
    while nr != 0 {
        let qt = r / nr;
        (t, nt) = (nt, t - qt * nt);
        (r, nr) = (nr, r - qt * nr);
    }
    assert_eq!(r, 1, "not invertible mod {m}");
    t.rem_euclid(m as i64) as u64
}

/// Residue of a p-adic unit (given as a rational) modulo m = p^k.
pub fn unit_mod(u: &Q, m: u64) -> u64 {
    let n = mod_small(u.numer(), m);
    let d = mod_small(u.denom(), m);
    n * inv_mod(d, m) % m
}

/// Residue mod 8 of a 2-adic unit.
pub fn mod8(u: &Q) -> u64 {
    unit_mod(u, 8)
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

/// Legendre symbol of a p-adic unit, p odd.
pub fn legendre_unit(u: &Q, p: u64) -> i32 {
    let n = unit_mod(u, p);
    if pow_mod(n, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Legendre symbol (a/p) for an integer a, p odd.
pub fn legendre(a: i64, p: u64) -> i32 {
    let r = a.rem_euclid(p as i64) as u64;
    if r == 0 {
        0
    } else if pow_mod(r, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

pub fn least_nonresidue(p: u64) -> i64 {
    (2..p as i64).find(|a| legendre(*a, p) == -1).expect("odd prime")
}

/// Unit square class representatives: {1, least nonresidue} for odd p, {1, 5} for p = 2.
pub fn unit_classes(p: u64) -> [i64; 2] {
    if p == 2 {
        [1, 5]
    } else {
        [1, least_nonresidue(p)]
    }
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

pub fn primes_upto(n: u64) -> Vec<u64> {
    (2..=n).filter(|k| is_prime(*k)).collect()
}

pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// True iff x and y (nonzero) lie in the same class of Q_p^x / (Q_p^x)^2.
pub fn same_square_class(x: &Q, y: &Q, p: u64) -> bool {
    if (val(x, p) - val(y, p)).rem_euclid(2) != 0 {
        return false;
    }
    let u = unit_part(x, p) / unit_part(y, p);
    if p == 2 {
        mod8(&u) == 1
    } else {
        legendre_unit(&u, p) == 1
    }
}

/// Hilbert symbol (a, b)_p.
pub fn hilbert(a: &Q, b: &Q, p: u64) -> i32 {
    let (va, vb) = (val(a, p), val(b, p));
    let (ua, ub) = (unit_part(a, p), unit_part(b, p));
    if p != 2 {
        let mut s = if (va * vb * ((p as i64 - 1) / 2)).rem_euclid(2) == 1 { -1 } else { 1 };
        if vb.rem_euclid(2) == 1 {
            s *= legendre_unit(&ua, p);
        }
        if va.rem_euclid(2) == 1 {
            s *= legendre_unit(&ub, p);
        }
        return s;
    }
    let (u, w) = (mod8(&ua) as i64, mod8(&ub) as i64);
    let e = |x: i64| ((x - 1) / 2) % 2;
    let o = |x: i64| ((x * x - 1) / 8) % 2;
    let ex = e(u) * e(w) + va * o(w) + vb * o(u);
    if ex.rem_euclid(2) == 1 {
        -1
    } else {
        1
    }
}

/// chi_p(x): 1 if x is a square, -1 if Q_p(sqrt x) is unramified, 0 otherwise.
pub fn chi_p(x: &Q, p: u64) -> i32 {
    if val(x, p).rem_euclid(2) == 1 {
        return 0;
    }
    let u = unit_part(x, p);
    if p != 2 {
        return legendre_unit(&u, p);
    }
    match mod8(&u) {
        1 => 1,
        5 => -1,
        _ => 0,
    }
}

/// Kronecker symbol (d/n), n > 0.
pub fn kronecker(d: i64, n: u64) -> i32 {
    if n == 1 {
        return 1;
    }
    let mut n = n;
    let mut res = 1;
    while n % 2 == 0 {
        n /= 2;
        if d.rem_euclid(2) == 0 {
            return 0;
        }
        if matches!(d.rem_euclid(8), 3 | 5) {
            res = -res;
        }
    }
    let mut a = d.rem_euclid(n as i64) as u64;
    let mut m = n;
    let mut j = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(m % 8, 3 | 5) {
                j = -j;
            }
        }
        std::mem::swap(&mut a, &mut m);
        if a % 4 == 3 && m % 4 == 3 {
            j = -j;
        }
        a %= m;
    }
    if m == 1 {
        res * j
    } else {
        0
    }
}

/// D = d f^2 with d a fundamental discriminant (or 1). D must be 0 or 1 mod 4.
pub fn fundamental_part(d_in: i64) -> (i64, u64) {
    assert!(d_in != 0 && matches!(d_in.rem_euclid(4), 0 | 1), "not a discriminant: {d_in}");
    let mut d = d_in;
    let mut f = 1u64;
    let mut qd = 2i64;
    while qd * qd <= d.abs() {
        while d % (qd * qd) == 0 && matches!((d / (qd * qd)).rem_euclid(4), 0 | 1) {
            d /= qd * qd;
            f *= qd as u64;
        }
        qd += 1;
    }
    (d, f)
}

pub fn is_fundamental(d: i64) -> bool {
    d != 0 && matches!(d.rem_euclid(4), 0 | 1) && fundamental_part(d) == (d, 1)
}

// ---------------------------------------------------------------------------
// matrices

pub fn qmat(rows: &[&[i64]]) -> QMat {
    rows.iter().map(|r| r.iter().map(|x| q(*x)).collect()).collect()
}

pub fn qmat_from(rows: &[Vec<i64>]) -> QMat {
    rows.iter().map(|r| r.iter().map(|x| q(*x)).collect()).collect()
}

pub fn det(m: &QMat) -> Q {
    let n = m.len();
    if n == 0 {
        return Q::one();
    }
    let mut a = m.clone();
    let mut d = Q::one();
    for c in 0..n {
        let piv = match (c..n).find(|r| !a[*r][c].is_zero()) {
            Some(r) => r,
            None => return Q::zero(),
        };
        if piv != c {
            a.swap(piv, c);
            d = -d;
        }
        d *= &a[c][c];
        for r in c + 1..n {
            if a[r][c].is_zero() {
                continue;
            }
            let f = &a[r][c] / &a[c][c];
            for k in c..n {
                let t = &f * &a[c][k];
                a[r][k] -= t;
            }
        }
    }
    d
}

pub fn transpose(m: &QMat) -> QMat {
    if m.is_empty() {
        return vec![];
    }
    (0..m[0].len()).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn mat_mul(a: &QMat, b: &QMat) -> QMat {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    let mut r = vec![vec![Q::zero(); m]; n];
    for i in 0..n {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..m {
                r[i][j] += &a[i][l] * &b[l][j];
            }
        }
    }
    r
}

/// B[M] = M^t B M.
pub fn gram(b: &QMat, m: &QMat) -> QMat {
    mat_mul(&transpose(m), &mat_mul(b, m))
}

pub fn block_diag(blocks: &[QMat]) -> QMat {
    let n: usize = blocks.iter().map(|b| b.len()).sum();
    let mut m = vec![vec![Q::zero(); n]; n];
    let mut o = 0;
    for b in blocks {
        for i in 0..b.len() {
            for j in 0..b.len() {
                m[o + i][o + j] = b[i][j].clone();
            }
        }
        o += b.len();
    }
    m
}

pub fn scaled(m: &QMat, c: &Q) -> QMat {
    m.iter().map(|r| r.iter().map(|x| x * c).collect()).collect()
}

pub fn identity(n: usize) -> QMat {
    (0..n).map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()).collect()
}

/// Entry-wise p-integrality.
pub fn is_p_integral(m: &QMat, p: u64) -> bool {
    m.iter().flatten().all(|x| x.is_zero() || val(x, p) >= 0)
}

/// Even at 2: all diagonal entries in 2Z_2.
pub fn is_even(m: &QMat) -> bool {
    (0..m.len()).all(|i| m[i][i].is_zero() || val(&m[i][i], 2) >= 1)
}

pub fn mat_to_json(m: &QMat) -> serde_json::Value {
    serde_json::Value::Array(
        m.iter()
            .map(|r| serde_json::Value::Array(r.iter().map(|x| qstr(x).into()).collect()))
            .collect(),
    )
}

/// A symmetric matrix with integer diagonal and half-integral off-diagonal entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HalfIntMat {
    pub entries: QMat,
}

impl HalfIntMat {
    pub fn new(entries: QMat) -> Result<Self, FormError> {
        let n = entries.len();
        for i in 0..n {
            if entries[i].len() != n {
                return Err(FormError::NotSymmetric);
            }
        }
        let two = q(2);
        for i in 0..n {
            if !entries[i][i].denom().is_one() {
                return Err(FormError::NonIntegralDiagonal(qstr(&entries[i][i])));
            }
            for j in 0..n {
                if entries[i][j] != entries[j][i] {
                    return Err(FormError::NotSymmetric);
                }
                if i != j && !(&entries[i][j] * &two).denom().is_one() {
                    return Err(FormError::BadOffDiagonal(qstr(&entries[i][j])));
                }
            }
        }
        Ok(HalfIntMat { entries })
    }
    pub fn degree(&self) -> usize {
        self.entries.len()
    }
    pub fn det(&self) -> Q {
        det(&self.entries)
    }
    /// The even integral matrix 2T.
    pub fn doubled(&self) -> QMat {
        scaled(&self.entries, &q(2))
    }
}

// ---------------------------------------------------------------------------
// Jordan splitting

/// A Jordan splitting over Z_p: blocks p^v * (unimodular), each 1x1 or (p = 2 only) 2x2.
pub fn jordan(a: &QMat, p: u64) -> Vec<(i64, QMat)> {
    let mut a = a.clone();
    let m = a.len();
    let mut idx: Vec<usize> = (0..m).collect();
    let mut blocks = Vec::new();
    while !idx.is_empty() {
        let mut best: Option<(i64, usize, usize)> = None;
        for &i in &idx {
            for &j in &idx {
                if a[i][j].is_zero() {
                    continue;
                }
                let v = val(&a[i][j], p);
                let better = match best {
                    None => true,
                    Some((bv, bi, bj)) => v < bv || (v == bv && i == j && bi != bj),
                };
                if better {
                    best = Some((v, i, j));
                }
            }
        }
        let (v, i, mut j) = best.expect("singular matrix in Jordan splitting");
        if i != j && p != 2 {
            for k in 0..m {
                let t = a[j][k].clone();
                a[i][k] += t;
            }
            for k in 0..m {
                let t = a[k][j].clone();
                a[k][i] += t;
            }
            j = i;
        }
        if i == j {
            let piv = a[i][i].clone();
            let rest: Vec<usize> = idx.iter().copied().filter(|k| *k != i).collect();
            for &k in &rest {
                if a[k][i].is_zero() {
                    continue;
                }
                let c = &a[k][i] / &piv;
                for l in 0..m {
                    let t = &c * &a[i][l];
                    a[k][l] -= t;
                }
                for l in 0..m {
                    let t = &c * &a[l][i];
                    a[l][k] -= t;
                }
            }
            blocks.push((v, vec![vec![a[i][i].clone()]]));
            idx = rest;
        } else {
            let (x, y, z) = (a[i][i].clone(), a[i][j].clone(), a[j][j].clone());
            let dt = &x * &z - &y * &y;
            let inv = [[&z / &dt, -&y / &dt], [-&y / &dt, &x / &dt]];
            let rest: Vec<usize> = idx.iter().copied().filter(|k| *k != i && *k != j).collect();
            for &k in &rest {
                let ci = &a[k][i] * &inv[0][0] + &a[k][j] * &inv[1][0];
                let cj = &a[k][i] * &inv[0][1] + &a[k][j] * &inv[1][1];
                for l in 0..m {
                    let t = &ci * &a[i][l] + &cj * &a[j][l];
                    a[k][l] -= t;
                }
                for l in 0..m {
                    let t = &ci * &a[l][i] + &cj * &a[l][j];
                    a[l][k] -= t;
                }
            }
            blocks.push((v, vec![vec![x, y.clone()], vec![y, z]]));
            idx = rest;
        }
    }
    blocks
}

/// Jordan data for odd p: scale exponent and the unit diagonal entries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JordanForm {
    pub blocks: Vec<(i64, Vec<i64>)>,
}

/// Diagonal Jordan normal form for odd p: within each scale all units are 1
/// except the last, which is 1 or the least nonresidue.
pub fn jordan_decompose(a: &QMat, p: u64) -> JordanForm {
    assert!(p != 2);
    let mut by: BTreeMap<i64, Vec<Q>> = BTreeMap::new();
    for (v, b) in jordan(a, p) {
        by.entry(v).or_default().push(&b[0][0] / qpow(p, v));
    }
    let nr = least_nonresidue(p);
    let blocks = by
        .into_iter()
        .map(|(v, us)| {
            let d: Q = us.iter().fold(Q::one(), |acc, u| acc * u);
            let last = if legendre_unit(&d, p) == 1 { 1 } else { nr };
            let mut units = vec![1; us.len() - 1];
            units.push(last);
            (v, units)
        })
        .collect();
    JordanForm { blocks }
}

/// Diagonalization over Q_p via the Jordan splitting.
pub fn diagonalize(a: &QMat, p: u64) -> Vec<Q> {
    let mut d = Vec::new();
    for (_, b) in jordan(a, p) {
        if b.len() == 1 {
            d.push(b[0][0].clone());
        } else {
            let (x, y, z) = (&b[0][0], &b[0][1], &b[1][1]);
            if !x.is_zero() {
                d.push(x.clone());
                d.push(z - y * y / x);
            } else if !z.is_zero() {
                d.push(z.clone());
                d.push(x - y * y / z);
            } else {
                d.push(y * q(2));
                d.push(y * q(-2));
            }
        }
    }
    d
}

/// Hasse invariant prod_{i<=j} (a_i, a_j)_p.
pub fn hasse(a: &QMat, p: u64) -> Result<i32, FormError> {
    if det(a).is_zero() {
        return Err(FormError::Singular);
    }
    let d = diagonalize(a, p);
    let mut r = 1;
    for i in 0..d.len() {
        for j in i..d.len() {
            r *= hilbert(&d[i], &d[j], p);
        }
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// 2-adic symbol

/// One Jordan constituent of the 2-adic symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Constituent {
    pub scale: i64,
    pub rank: i64,
    /// det of the unit part mod 8 (raw symbol) or +-1 (canonical symbol)
    pub det: i64,
    /// 1 for odd (type I), 0 for even (type II)
    pub odd: i64,
    pub oddity: i64,
}

pub fn symbol_2adic(a: &QMat) -> Vec<Constituent> {
    let mut by: BTreeMap<i64, Vec<QMat>> = BTreeMap::new();
    for (v, b) in jordan(a, 2) {
        by.entry(v).or_default().push(b);
    }
    let mut out = Vec::new();
    for (v, bs) in by {
        let mut rank = 0;
        let mut d = Q::one();
        let mut odd = 0;
        let mut oddity = 0;
        for b in &bs {
            rank += b.len() as i64;
            d *= det(b) / qpow(2, v * b.len() as i64);
            if b.len() == 1 {
                odd = 1;
                oddity += mod8(&(&b[0][0] / qpow(2, v))) as i64;
            }
        }
        out.push(Constituent { scale: v, rank, det: mod8(&d) as i64, odd, oddity: oddity % 8 });
    }
    out
}

fn compartments(s: &[Constituent]) -> Vec<Vec<usize>> {
    let mut comps = Vec::new();
    let mut i = 0;
    while i < s.len() {
        if s[i].odd == 1 {
            let mut v = s[i].scale;
            let mut c = Vec::new();
            while i < s.len() && s[i].odd == 1 && s[i].scale == v {
                c.push(i);
                i += 1;
                v += 1;
            }
            comps.push(c);
        } else {
            i += 1;
        }
    }
    comps
}

fn trains(s: &[Constituent]) -> Vec<Vec<usize>> {
    let mut tr = vec![vec![0]];
    for i in 1..s.len() {
        let (prev, cur) = (&s[i - 1], &s[i]);
        let gap = cur.scale - prev.scale;
        let linked = (gap == 1 && (prev.odd == 1 || cur.odd == 1))
            || (gap == 2 && prev.odd == 1 && cur.odd == 1);
        if linked {
            tr.last_mut().unwrap().push(i);
        } else {
            tr.push(vec![i]);
        }
    }
    tr
}

/// Canonical 2-adic symbol: oddity fusion within compartments and sign walking
/// within trains. Two forms are Z_2-equivalent iff the canonical symbols agree.
pub fn canonical_symbol(sym: &[Constituent]) -> Vec<Constituent> {
    let mut s: Vec<Constituent> = sym.to_vec();
    if s.is_empty() {
        return s;
    }
    for x in s.iter_mut() {
        x.det = if matches!(x.det, 1 | 7) { 1 } else { -1 };
    }
    let comps = compartments(&s);
    for c in &comps {
        let o: i64 = c.iter().map(|i| s[*i].oddity).sum::<i64>() % 8;
        for i in c {
            s[*i].oddity = 0;
        }
        s[c[0]].oddity = o;
    }
    for t in trains(&s) {
        for k in (1..t.len()).rev() {
            let t1 = t[k];
            if s[t1].det == -1 {
                s[t1].det = 1;
                s[t[k - 1]].det *= -1;
                for c in &comps {
                    if c.contains(&t[k - 1]) || c.contains(&t1) {
                        s[c[0]].oddity = (s[c[0]].oddity + 4) % 8;
                    }
                }
            }
        }
    }
    s
}

/// Equivalence key of a nondegenerate p-integral matrix over Z_p.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ClassKey {
    Odd(Vec<(i64, i64, i32)>),
    Two(Vec<Constituent>),
}

pub fn class_key(a: &QMat, p: u64) -> ClassKey {
    if p == 2 {
        return ClassKey::Two(canonical_symbol(&symbol_2adic(a)));
    }
    let mut by: BTreeMap<i64, Vec<Q>> = BTreeMap::new();
    for (v, b) in jordan(a, p) {
        by.entry(v).or_default().push(&b[0][0] / qpow(p, v));
    }
    ClassKey::Odd(
        by.into_iter()
            .map(|(v, us)| {
                let d = us.iter().fold(Q::one(), |acc, u| acc * u);
                (v, us.len() as i64, legendre_unit(&unit_part(&d, p), p))
            })
            .collect(),
    )
}

pub fn zp_equivalent(a: &QMat, b: &QMat, p: u64) -> bool {
    a.len() == b.len() && class_key(a, p) == class_key(b, p)
}

// ---------------------------------------------------------------------------
// canonical 2-adic representative

/// One scale level of the canonical 2-adic form of a half-integral matrix T:
/// `2^i (diag(v) ⊥ (1/2) Theta_{u_rank, u_d})`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WatsonLevel {
    pub v: Vec<i64>,
    pub u_rank: usize,
    pub u_d: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WatsonForm {
    pub levels: BTreeMap<i64, WatsonLevel>,
}

const ODD_SINGLES: [i64; 4] = [1, -1, 3, -3];
const ODD_PAIRS: [(i64, i64); 6] = [(1, 1), (1, -1), (1, 3), (1, -3), (-1, -1), (-1, 3)];

/// Candidate realizations (odd entries, even-part d) of one constituent.
fn constituent_options(c: &Constituent) -> Vec<(Vec<i64>, i64)> {
    let mut out = Vec::new();
    if c.odd == 0 {
        for d in [1, 5] {
            out.push((vec![], d));
        }
        return out;
    }
    let even_rank = if c.rank % 2 == 1 { c.rank - 1 } else { c.rank - 2 };
    let ds: &[i64] = if even_rank > 0 { &[1, 5] } else { &[1] };
    if c.rank % 2 == 1 {
        for u in ODD_SINGLES {
            for d in ds {
                out.push((vec![u], *d));
            }
        }
    } else {
        for (u1, u2) in ODD_PAIRS {
            for d in ds {
                out.push((vec![u1, u2], *d));
            }
        }
    }
    out
}

fn theta2(rank: usize, d: i64) -> QMat {
    let h = qmat(&[&[0, 1], &[1, 0]]);
    let e = qmat(&[&[2, 1], &[1, 2]]);
    let mut bl = vec![h; rank / 2];
    if d == 5 && rank > 0 {
        *bl.last_mut().unwrap() = e;
    }
    block_diag(&bl)
}

fn realize(sym: &[Constituent], choice: &[(Vec<i64>, i64)]) -> QMat {
    let mut blocks = Vec::new();
    for (c, (v, d)) in sym.iter().zip(choice) {
        let s = qpow(2, c.scale);
        for u in v {
            blocks.push(vec![vec![q(*u) * &s]]);
        }
        let er = c.rank as usize - v.len();
        if er > 0 {
            blocks.push(scaled(&theta2(er, *d), &s));
        }
    }
    block_diag(&blocks)
}

/// Canonical representative of the 2-adic class of a half-integral T. Among all
/// block realizations of the constituents of 2T with odd entries normalized to
/// {+-1, +-3}, the first in a fixed order whose canonical symbol matches is chosen.
pub fn watson_canonical(t: &HalfIntMat) -> WatsonForm {
    let m2 = t.doubled();
    let sym = symbol_2adic(&m2);
    let target = canonical_symbol(&sym);
    let opts: Vec<Vec<(Vec<i64>, i64)>> = sym.iter().map(constituent_options).collect();
    let mut chosen = None;
    for choice in opts.iter().map(|o| o.iter().cloned()).multi_cartesian_product() {
        let m = realize(&sym, &choice);
        if canonical_symbol(&symbol_2adic(&m)) == target {
            chosen = Some(choice);
            break;
        }
    }
    let chosen = chosen.unwrap_or_default();
    let mut levels: BTreeMap<i64, WatsonLevel> = BTreeMap::new();
    for (c, (v, d)) in sym.iter().zip(chosen) {
        let er = c.rank as usize - v.len();
        if !v.is_empty() {
            let l = levels.entry(c.scale - 1).or_insert(WatsonLevel { v: vec![], u_rank: 0, u_d: 1 });
            l.v = v.clone();
        }
        if er > 0 {
            let l = levels.entry(c.scale).or_insert(WatsonLevel { v: vec![], u_rank: 0, u_d: 1 });
            l.u_rank = er;
            l.u_d = d;
        }
    }
    WatsonForm { levels }
}

impl WatsonForm {
    /// The half-integral matrix described by this form.
    pub fn to_matrix(&self) -> QMat {
        let mut blocks = Vec::new();
        for (i, l) in &self.levels {
            let s = qpow(2, *i);
            for u in &l.v {
                blocks.push(vec![vec![q(*u) * &s]]);
            }
            if l.u_rank > 0 {
                blocks.push(scaled(&theta2(l.u_rank, l.u_d), &(&s / q(2))));
            }
        }
        block_diag(&blocks)
    }
}

// ---------------------------------------------------------------------------
// standard unimodular blocks and class enumeration

/// Theta_{l,d}: diagonal for odd p; H^{l/2} or H^{l/2-1} ⊥ E for p = 2
/// (an even integral matrix; the half-integral form is Theta/2).
pub fn theta_standard(l: usize, d: i64, p: u64) -> Result<QMat, FormError> {
    if l == 0 {
        return Ok(vec![]);
    }
    if p == 2 {
        if l % 2 == 1 || !(d == 1 || d == 5) {
            return Err(FormError::BadTheta { l, d, p });
        }
        return Ok(theta2(l, d));
    }
    if !unit_classes(p).contains(&d) {
        return Err(FormError::BadTheta { l, d, p });
    }
    let sign = if ((l + 1) / 2) % 2 == 1 { -1 } else { 1 };
    let mut diag = vec![1i64; l - 1];
    diag.push(sign * d);
    Ok(block_diag(&diag.iter().map(|x| vec![vec![q(*x)]]).collect::<Vec<_>>()))
}

fn unimodular_options(k: usize, p: u64) -> Vec<Vec<QMat>> {
    if k == 0 {
        return vec![vec![]];
    }
    if p != 2 {
        return unit_classes(p)
            .iter()
            .map(|u| {
                let mut v = vec![vec![vec![q(1)]]; k - 1];
                v.push(vec![vec![q(*u)]]);
                v
            })
            .collect();
    }
    let mut opts: Vec<Vec<QMat>> = [1i64, 3, 5, 7]
        .iter()
        .combinations_with_replacement(k)
        .map(|ms| ms.into_iter().map(|u| vec![vec![q(*u)]]).collect())
        .collect();
    if k % 2 == 0 {
        opts.push(vec![theta2(k, 1)]);
        opts.push(vec![theta2(k, 5)]);
    }
    opts
}

fn rank_compositions(m: usize, budget: i64) -> Vec<Vec<usize>> {
    fn rec(v: usize, rem: usize, budget: i64, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rem == 0 {
            out.push(cur.clone());
            return;
        }
        for k in 0..=rem {
            if (k * v) as i64 > budget {
                break;
            }
            if k == 0 && v as i64 > budget {
                return;
            }
            cur.push(k);
            rec(v + 1, rem - k, budget - (k * v) as i64, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, budget, &mut vec![], &mut out);
    out
}

/// All Z_p-classes of nondegenerate p-integral symmetric matrices of degree m
/// with det valuation at most `max_val`, one representative each (block diagonal).
pub fn enumerate_padic_classes(m: usize, p: u64, max_val: i64) -> Vec<QMat> {
    if m == 0 {
        return vec![vec![]];
    }
    let mut seen: HashMap<ClassKey, ()> = HashMap::new();
    let mut out = Vec::new();
    for ks in rank_compositions(m, max_val) {
        let per: Vec<Vec<(usize, Vec<QMat>)>> = ks
            .iter()
            .enumerate()
            .map(|(v, k)| unimodular_options(*k, p).into_iter().map(|o| (v, o)).collect())
            .collect();
        for choice in per.iter().map(|x| x.iter()).multi_cartesian_product() {
            let mut blocks = Vec::new();
            for (v, o) in choice {
                let s = qpow(p, *v as i64);
                for b in o {
                    blocks.push(scaled(b, &s));
                }
            }
            let a = block_diag(&blocks);
            let key = class_key(&a, p);
            if seen.insert(key, ()).is_none() {
                out.push(a);
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// L' and T^(1)

/// r in {0,1}^m with A ≡ -r r^t mod 4L (diagonal mod 4, off-diagonal mod 2), 2-adically.
pub fn in_l_prime(a: &QMat) -> Option<Vec<u8>> {
    let m = a.len();
    'outer: for bits in 0..(1u32 << m) {
        let r: Vec<i64> = (0..m).map(|i| ((bits >> i) & 1) as i64).collect();
        for i in 0..m {
            for j in i..m {
                let x = &a[i][j] + q(r[i] * r[j]);
                let need = if i == j { 2 } else { 1 };
                if !x.is_zero() && val(&x, 2) < need {
                    continue 'outer;
                }
            }
        }
        return Some(r.into_iter().map(|x| x as u8).collect());
    }
    None
}

/// Membership in L'_{m,p}: automatic for odd p.
pub fn in_l_prime_at(a: &QMat, p: u64) -> Option<Vec<u8>> {
    if p == 2 {
        in_l_prime(a)
    } else {
        Some(vec![0; a.len()])
    }
}

/// A^(1) = (1, r/2; r^t/2, (r^t r + A)/4).
pub fn t_one(a: &QMat, r: &[u8]) -> Result<HalfIntMat, FormError> {
    let m = a.len();
    let mut t = vec![vec![Q::zero(); m + 1]; m + 1];
    t[0][0] = q(1);
    for i in 0..m {
        t[0][i + 1] = qf2(r[i] as i64);
        t[i + 1][0] = qf2(r[i] as i64);
        for j in 0..m {
            t[i + 1][j + 1] = (q(r[i] as i64 * r[j] as i64) + &a[i][j]) / q(4);
        }
    }
    HalfIntMat::new(t)
}

fn qf2(n: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(2))
}

/// (fundamental discriminant, conductor) of (-1)^{n/2} det(2T), n = deg T even.
pub fn frak_invariants(t: &HalfIntMat) -> (i64, u64) {
    let n = t.degree();
    assert!(n % 2 == 0);
    let d = det(&t.doubled());
    assert!(d.denom().is_one());
    let sign = if (n / 2) % 2 == 1 { -1 } else { 1 };
    let dd = d.numer().to_i64().expect("discriminant fits i64") * sign;
    fundamental_part(dd)
}

/// Local conductor exponent of a discriminant D at p.
pub fn frak_e_of(d: &Q, p: u64) -> i64 {
    let v = val(d, p);
    if p != 2 {
        return v.div_euclid(2);
    }
    let u = mod8(&unit_part(d, 2));
    if v.rem_euclid(2) == 0 {
        if u % 4 == 1 {
            v / 2
        } else {
            (v - 2) / 2
        }
    } else {
        (v - 3) / 2
    }
}

/// e_p of a half-integral T of even degree.
pub fn frak_e_p(t: &HalfIntMat, p: u64) -> i64 {
    let n = t.degree();
    let sign = if (n / 2) % 2 == 1 { q(-1) } else { q(1) };
    frak_e_of(&(sign * det(&t.doubled())), p)
}

/// e^(1)_p(B) for B in L'_{n-1}: the conductor exponent of (-1)^{n/2} 2^{2-n} det B.
pub fn frak_e1(b: &QMat, p: u64, n: usize) -> i64 {
    let sign = if (n / 2) % 2 == 1 { q(-1) } else { q(1) };
    frak_e_of(&(sign * qpow(2, 2 - n as i64) * det(b)), p)
}

/// Square class token of (-1)^{n/2} det(2T) in Q_p^x / (Q_p^x)^2 restricted to the
/// fundamental part: returns the fundamental discriminant's class as (val parity, unit class).
pub fn frak_d_class(t: &HalfIntMat, p: u64) -> (i64, i64) {
    let (d, _) = frak_invariants(t);
    let dq = q(d);
    let v = val(&dq, p);
    let u = unit_part(&dq, p);
    let cls = if p == 2 {
        mod8(&u) as i64
    } else if legendre_unit(&u, p) == 1 {
        1
    } else {
        least_nonresidue(p)
    };
    (v, cls)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LPrimeSplit {
    /// A ~ a ⊥ 4B with a ≡ -1 mod 4
    OddWitness { a: Q, b: QMat },
    /// A ~ 4B
    EvenWitness { b: QMat },
}

/// The split of A in L'_{m,2} as a ⊥ 4B or 4B, read off from a Jordan splitting.
pub fn lprime_split(a: &QMat) -> Result<LPrimeSplit, FormError> {
    if in_l_prime(a).is_none() {
        return Err(FormError::NotInLPrime);
    }
    let mut odd = None;
    let mut rest = Vec::new();
    for (v, b) in jordan(a, 2) {
        if v == 0 && b.len() == 1 && odd.is_none() {
            odd = Some(b[0][0].clone());
        } else {
            rest.push(scaled(&b, &Q::new(BigInt::one(), BigInt::from(4))));
        }
    }
    let b = block_diag(&rest);
    Ok(match odd {
        Some(x) => LPrimeSplit::OddWitness { a: x, b },
        None => LPrimeSplit::EvenWitness { b },
    })
}

/// Split type at p = 2 of B in L'_{n-1,2}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SplitType {
    I,
    II,
    III,
}

/// Unimodular split B ~ Theta ⊥ p B_1 (odd p) or, at p = 2, a ⊥ 2 Theta ⊥ 4 B_2 data.
#[derive(Clone, Debug)]
pub struct SplitShape {
    /// unit entries at scale 0 (odd p) or the odd entry a (p = 2)
    pub units: Vec<Q>,
    /// det of Theta (odd p: product of units; p = 2: det of the 2-scale even part / 4^k)
    pub det_theta: Q,
    pub rank_theta: usize,
    pub n1: usize,
    pub split_type: Option<SplitType>,
}

pub fn split_shape(b: &QMat, p: u64, n: usize) -> SplitShape {
    let m = b.len();
    let bl = jordan(b, p);
    if p != 2 {
        let th: Vec<Q> = bl.iter().filter(|(v, _)| *v == 0).map(|(_, x)| x[0][0].clone()).collect();
        let dth = th.iter().fold(Q::one(), |acc, u| acc * u);
        return SplitShape {
            rank_theta: th.len(),
            n1: m - th.len(),
            units: th,
            det_theta: dth,
            split_type: None,
        };
    }
    let a: Vec<Q> =
        bl.iter().filter(|(v, x)| *v == 0 && x.len() == 1).map(|(_, x)| x[0][0].clone()).collect();
    assert!(a.len() <= 1 && !bl.iter().any(|(v, x)| *v == 0 && x.len() == 2), "not in L'");
    let th: Vec<&QMat> = bl.iter().filter(|(v, _)| *v == 1).map(|(_, x)| x).collect();
    assert!(th.iter().all(|x| x.len() == 2), "odd entry at scale 2 in L'");
    let rth = 2 * th.len();
    let n1 = n - 2 - rth;
    let dth = th.iter().fold(Q::one(), |acc, x| acc * det(x) / q(4));
    let typ = if a.is_empty() {
        SplitType::II
    } else if bl.iter().any(|(v, x)| *v == 2 && x.len() == 1) {
        SplitType::III
    } else {
        SplitType::I
    };
    SplitShape { units: a, det_theta: dth, rank_theta: rth, n1, split_type: Some(typ) }
}

pub fn type_classify_2(b: &QMat, n: usize) -> SplitType {
    split_shape(b, 2, n).split_type.unwrap()
}

/// xi-bar^(1)(B).
pub fn xi_bar_1(b: &QMat, p: u64, n: usize) -> i32 {
    let sh = split_shape(b, p, n);
    let sign = |k: usize| if (k / 2) % 2 == 1 { q(-1) } else { q(1) };
    if p != 2 {
        if sh.n1 % 2 == 1 {
            return 0;
        }
        return chi_p(&(sign(n - sh.n1) * &sh.det_theta), p);
    }
    match sh.split_type.unwrap() {
        SplitType::I => chi_p(&(sign(n - sh.n1) * &sh.units[0] * &sh.det_theta), 2),
        _ => 0,
    }
}

/// xi_0(B) = chi_p((-1)^{n/2} det B).
pub fn xi0(b: &QMat, p: u64, n: usize) -> i32 {
    let sign = if (n / 2) % 2 == 1 { q(-1) } else { q(1) };
    chi_p(&(sign * det(b)), p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_algebra::qf;

    #[test]
    fn hilbert_examples() {
        assert_eq!(hilbert(&q(5), &q(5), 5), 1);
        assert_eq!(hilbert(&q(-1), &q(-1), 2), -1);
        assert_eq!(hilbert(&q(1), &q(7), 3), 1);
        assert_eq!(hilbert(&q(2), &q(3), 3), -1);
    }

    #[test]
    fn chi_examples() {
        assert_eq!(chi_p(&q(1), 7), 1);
        assert_eq!(chi_p(&q(7), 7), 0);
        assert_eq!(chi_p(&q(-1), 3), -1);
        assert_eq!(chi_p(&q(5), 2), -1);
        assert_eq!(chi_p(&q(-3), 2), -1);
        assert_eq!(chi_p(&q(3), 2), 0);
    }

    #[test]
    fn hasse_examples() {
        let i3 = identity(3);
        assert_eq!(hasse(&i3, 2).unwrap(), 1);
        let d = qmat(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, -1]]);
        assert_eq!(hasse(&d, 2).unwrap(), -1);
    }

    #[test]
    fn frak_examples() {
        let t = HalfIntMat::new(vec![vec![q(1), qf(1, 2)], vec![qf(1, 2), q(1)]]).unwrap();
        assert_eq!(frak_invariants(&t), (-3, 1));
        let t = HalfIntMat::new(identity(2)).unwrap();
        assert_eq!(frak_invariants(&t), (-4, 1));
        let t = HalfIntMat::new(qmat(&[&[1, 0], &[0, 4]])).unwrap();
        assert_eq!(frak_invariants(&t), (-4, 2));
        assert_eq!(frak_e_p(&t, 2), 1);
        assert_eq!(frak_e_p(&t, 3), 0);
    }

    #[test]
    fn l_prime_examples() {
        assert_eq!(in_l_prime(&qmat(&[&[3]])), Some(vec![1]));
        assert_eq!(in_l_prime(&qmat(&[&[1]])), None);
        assert_eq!(in_l_prime(&qmat(&[&[4]])), Some(vec![0]));
        let t = t_one(&qmat(&[&[3]]), &[1]).unwrap();
        assert_eq!(t.entries, vec![vec![q(1), qf(1, 2)], vec![qf(1, 2), q(1)]]);
        let t = t_one(&qmat(&[&[4]]), &[0]).unwrap();
        assert_eq!(t.entries, identity(2));
    }

    #[test]
    fn class_counts_degree_one() {
        assert_eq!(enumerate_padic_classes(1, 5, 0).len(), 2);
        assert_eq!(enumerate_padic_classes(1, 5, 2).len(), 6);
        assert_eq!(enumerate_padic_classes(1, 2, 0).len(), 4);
    }

    #[test]
    fn watson_examples() {
        let t = HalfIntMat::new(qmat(&[&[1, 0], &[0, 3]])).unwrap();
        let w = watson_canonical(&t);
        assert_eq!(w.levels[&0].v, vec![1, 3]);
        let t = HalfIntMat::new(qmat(&[&[7]])).unwrap();
        assert_eq!(watson_canonical(&t).levels[&0].v, vec![-1]);
        let t = HalfIntMat::new(vec![vec![q(0), qf(1, 2)], vec![qf(1, 2), q(0)]]).unwrap();
        let w = watson_canonical(&t);
        assert_eq!(w.levels[&0], WatsonLevel { v: vec![], u_rank: 2, u_d: 1 });
    }

    #[test]
    fn equivalence_examples() {
        assert!(!zp_equivalent(&qmat(&[&[1, 0], &[0, 1]]), &qmat(&[&[1, 0], &[0, 5]]), 2));
        assert!(zp_equivalent(&qmat(&[&[1, 0], &[0, 1]]), &qmat(&[&[5, 0], &[0, 5]]), 2));
        assert!(zp_equivalent(&qmat(&[&[1, 0], &[0, 1]]), &qmat(&[&[2, 1], &[1, 1]]), 3));
    }

    #[test]
    fn jordan_examples() {
        let j = jordan_decompose(&qmat(&[&[1, 0], &[0, 5]]), 5);
        assert_eq!(j.blocks, vec![(0, vec![1]), (1, vec![1])]);
        let h = vec![vec![q(0), qf(1, 2)], vec![qf(1, 2), q(0)]];
        let j = jordan_decompose(&h, 5);
        assert_eq!(j.blocks.len(), 1);
        assert_eq!(j.blocks[0].0, 0);
        assert!(same_square_class(&det(&h), &q(-1), 5));
    }

    #[test]
    fn fundamental_parts() {
        assert_eq!(fundamental_part(-16), (-4, 2));
        assert_eq!(fundamental_part(-3), (-3, 1));
        assert_eq!(fundamental_part(12), (12, 1));
        assert_eq!(fundamental_part(45), (5, 3));
        assert_eq!(fundamental_part(1), (1, 1));
        assert_eq!(fundamental_part(-32), (-8, 2));
    }

    #[test]
    fn kronecker_matches_legendre() {
        for p in [3u64, 5, 7, 11] {
            for a in -20..20 {
                assert_eq!(kronecker(a, p), legendre(a, p));
            }
        }
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(-3, 2), -1);
        assert_eq!(kronecker(1, 2), 1);
    }
}
