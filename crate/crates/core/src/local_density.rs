//! Local densities: brute-force counting by layer lifting, the closed formula for
//! alpha_p(B), Hermite-reduced divisor enumeration and the derived pair densities.

use std::collections::{BTreeMap, HashMap};

use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exact_algebra::{q, qf, qpow, qstr, Q};
use crate::padic_forms::{
    block_diag, class_key, det, enumerate_padic_classes, gram, in_l_prime, is_even, is_p_integral,
    jordan, legendre_unit, mod8, scaled, symbol_2adic, val, ClassKey, Constituent, QMat,
};

/// Upper bound on (solutions kept) x (lifts per solution) for brute-force counting.
pub const DEFAULT_BUDGET: u64 = 60_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("brute-force budget {budget} exceeded (needed about {needed})")]
    BudgetExceeded { budget: u64, needed: u64 },
    #[error("matrix entries must be integers")]
    NonIntegral,
    #[error("representing form has smaller degree than the represented one")]
    DegreeMismatch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityMethod {
    Bruteforce,
    Recursion,
    JordanFormula,
    CsFormula,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityResult {
    pub value: Q,
    pub method: DensityMethod,
    pub level: Option<u32>,
}

impl DensityResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "value": qstr(&self.value),
            "method": serde_json::to_value(self.method).unwrap(),
            "a": self.level,
        })
    }
}

// ---------------------------------------------------------------------------
// brute force

fn to_int(m: &QMat) -> Result<Vec<Vec<i64>>, DensityError> {
    m.iter()
        .map(|r| {
            r.iter()
                .map(|x| {
                    if x.denom() == &1.into() {
                        x.numer().to_i64().ok_or(DensityError::NonIntegral)
                    } else {
                        Err(DensityError::NonIntegral)
                    }
                })
                .collect()
        })
        .collect()
}

fn rank_mod_p(x: &[i64], m: usize, n: usize, p: i64) -> usize {
    let mut a: Vec<Vec<i64>> = (0..m).map(|i| (0..n).map(|j| x[i * n + j].rem_euclid(p)).collect()).collect();
    let mut rank = 0;
    for c in 0..n {
        let Some(piv) = (rank..m).find(|r| a[*r][c] != 0) else { continue };
        a.swap(rank, piv);
        let inv = (1..p).find(|t| a[rank][c] * t % p == 1).unwrap();
        for r in 0..m {
            if r != rank && a[r][c] != 0 {
                let f = a[r][c] * inv % p;
                for k in 0..n {
                    a[r][k] = (a[r][k] - f * a[rank][k]).rem_euclid(p);
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Count X in M_{m,n}(Z/p^a) with A[X] ≡ B (off-diagonal mod p^a, diagonal mod
/// p^a for odd p and 2^{a+1} for p = 2), lifting solutions one level at a time.
fn count_solutions(
    a_rep: &[Vec<i64>],
    b: &[Vec<i64>],
    p: u64,
    level: u32,
    primitive: bool,
    budget: u64,
) -> Result<Vec<u64>, DensityError> {
    let m = a_rep.len();
    let n = b.len();
    if m < n {
        return Err(DensityError::DegreeMismatch);
    }
    let pi = p as i64;
    let mn = m * n;
    let lifts = (p as u128).pow(mn as u32);
    let mut sols: Vec<Vec<i64>> = vec![vec![0; mn]];
    let mut counts = Vec::new();
    let ok = |x: &[i64], a: u32| -> bool {
        for i in 0..n {
            for j in i..n {
                let mut s: i128 = 0;
                for r in 0..m {
                    if x[r * n + i] == 0 {
                        continue;
                    }
                    for c in 0..m {
                        s += x[r * n + i] as i128 * a_rep[r][c] as i128 * x[c * n + j] as i128;
                    }
                }
                let md = (pi as i128).pow(a) * if p == 2 && i == j { 2 } else { 1 };
                if (s - b[i][j] as i128).rem_euclid(md) != 0 {
                    return false;
                }
            }
        }
        true
    };
    for a in 1..=level {
        let need = sols.len() as u128 * lifts;
        if (p == 2 || a == 1) && need > budget as u128 {
            return Err(DensityError::BudgetExceeded { budget, needed: need.min(u64::MAX as u128) as u64 });
        }
        let step = pi.pow(a - 1);
        let mut next = Vec::new();
        if p != 2 && a >= 2 {
            counts.resize(level as usize, 0);
            let mut visited = 0u64;
            for x in &sols {
                lift_dfs(x, a_rep, b, pi, a, level, &mut counts, &mut visited, budget)?;
            }
            break;
        }
        for x in &sols {
            let mut y = vec![0i64; mn];
            loop {
                let z: Vec<i64> = x.iter().zip(&y).map(|(u, v)| u + step * v).collect();
                if (!primitive || a > 1 || rank_mod_p(&z, m, n, pi) == n) && ok(&z, a) {
                    next.push(z);
                }
                let mut k = 0;
                while k < mn {
                    y[k] += 1;
                    if y[k] < pi {
                        break;
                    }
                    y[k] = 0;
                    k += 1;
                }
                if k == mn {
                    break;
                }
            }
        }
        sols = next;
        counts.push(sols.len() as u64);
    }
    Ok(counts)
}

/// For odd p and a >= 2 the lifts x + p^{a-1} y of a level a-1 solution x are
/// the solutions y mod p of the linear system y^t A x + x^t A y = R, with
/// R = (B - x^t A x) / p^{a-1}.
fn linear_lifts(x: &[i64], a_rep: &[Vec<i64>], b: &[Vec<i64>], p: i64, step: i64, out: Option<&mut Vec<Vec<i64>>>) -> u64 {
    let m = a_rep.len();
    let n = b.len();
    let mn = m * n;
    let ax: Vec<Vec<i128>> = (0..m)
        .map(|r| (0..n).map(|c| (0..m).map(|t| a_rep[r][t] as i128 * x[t * n + c] as i128).sum()).collect())
        .collect();
    let pm = p as i128;
    let mut rows: Vec<Vec<i64>> = Vec::new();
    for i in 0..n {
        for j in i..n {
            let xax: i128 = (0..m).map(|r| x[r * n + i] as i128 * ax[r][j]).sum();
            let rhs = (b[i][j] as i128 - xax) / step as i128;
            let mut row = vec![0i64; mn + 1];
            for r in 0..m {
                row[r * n + i] = ((row[r * n + i] as i128 + ax[r][j]).rem_euclid(pm)) as i64;
                row[r * n + j] = ((row[r * n + j] as i128 + ax[r][i]).rem_euclid(pm)) as i64;
            }
            row[mn] = rhs.rem_euclid(pm) as i64;
            rows.push(row);
        }
    }
    let inv = |v: i64| -> i64 {
        let (mut r, mut b, mut e) = (1i64, v, p - 2);
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        r
    };
    let mut pivots = Vec::new();
    let mut rank = 0;
    for c in 0..mn {
        let Some(piv) = (rank..rows.len()).find(|r| rows[*r][c] != 0) else { continue };
        rows.swap(rank, piv);
        let iv = inv(rows[rank][c]);
        for k in 0..=mn {
            rows[rank][k] = rows[rank][k] * iv % p;
        }
        for r in 0..rows.len() {
            if r != rank && rows[r][c] != 0 {
                let f = rows[r][c];
                for k in 0..=mn {
                    rows[r][k] = (rows[r][k] - f * rows[rank][k]).rem_euclid(p);
                }
            }
        }
        pivots.push(c);
        rank += 1;
    }
    if rows[rank..].iter().any(|r| r[mn] != 0) {
        return 0;
    }
    let free: Vec<usize> = (0..mn).filter(|c| !pivots.contains(c)).collect();
    let Some(out) = out else { return (p as u64).pow(free.len() as u32) };
    let before = out.len();
    let mut fv = vec![0i64; free.len()];
    loop {
        let mut y = vec![0i64; mn];
        for (k, c) in free.iter().enumerate() {
            y[*c] = fv[k];
        }
        for (r, c) in pivots.iter().enumerate() {
            let s: i64 = free.iter().map(|f| rows[r][*f] * y[*f]).sum();
            y[*c] = (rows[r][mn] - s).rem_euclid(p);
        }
        out.push(x.iter().zip(&y).map(|(u, v)| u + step * v).collect());
        let mut k = 0;
        while k < fv.len() {
            fv[k] += 1;
            if fv[k] < p {
                break;
            }
            fv[k] = 0;
            k += 1;
        }
        if k == fv.len() {
            break;
        }
    }
    (out.len() - before) as u64
}

/// Depth-first lifting from a level a-1 solution; the last level is counted
/// without being enumerated.
#[allow(clippy::too_many_arguments)]
fn lift_dfs(
    x: &[i64],
    a_rep: &[Vec<i64>],
    b: &[Vec<i64>],
    p: i64,
    a: u32,
    level: u32,
    counts: &mut [u64],
    visited: &mut u64,
    budget: u64,
) -> Result<(), DensityError> {
    let step = p.pow(a - 1);
    if a == level {
        counts[a as usize - 1] += linear_lifts(x, a_rep, b, p, step, None);
        return Ok(());
    }
    let mut next = Vec::new();
    linear_lifts(x, a_rep, b, p, step, Some(&mut next));
    *visited += next.len() as u64;
    if *visited > budget {
        return Err(DensityError::BudgetExceeded { budget, needed: *visited });
    }
    counts[a as usize - 1] += next.len() as u64;
    for z in &next {
        lift_dfs(z, a_rep, b, p, a + 1, level, counts, visited, budget)?;
    }
    Ok(())
}

fn normalize(count: u64, m: usize, n: usize, p: u64, a: u32) -> Q {
    let e = -((m * n) as i64) + (n * (n + 1) / 2) as i64;
    let mut v = q(count as i64) * qpow(p, a as i64 * e);
    if m == n {
        v /= q(2);
    }
    v
}

/// alpha_p(A, B) approximated at level a by exact counting.
pub fn alpha_bruteforce(a_rep: &QMat, b: &QMat, p: u64, level: u32) -> Result<DensityResult, DensityError> {
    alpha_bruteforce_budget(a_rep, b, p, level, DEFAULT_BUDGET)
}

pub fn alpha_bruteforce_budget(
    a_rep: &QMat,
    b: &QMat,
    p: u64,
    level: u32,
    budget: u64,
) -> Result<DensityResult, DensityError> {
    let (ai, bi) = (to_int(a_rep)?, to_int(b)?);
    let c = count_solutions(&ai, &bi, p, level, false, budget)?;
    Ok(DensityResult {
        value: normalize(*c.last().unwrap(), ai.len(), bi.len(), p, level),
        method: DensityMethod::Bruteforce,
        level: Some(level),
    })
}

/// The normalized counts for every level 1..=level (used for stabilization checks).
pub fn alpha_bruteforce_levels(a_rep: &QMat, b: &QMat, p: u64, level: u32) -> Result<Vec<Q>, DensityError> {
    let (ai, bi) = (to_int(a_rep)?, to_int(b)?);
    let c = count_solutions(&ai, &bi, p, level, false, DEFAULT_BUDGET)?;
    Ok(c.iter().enumerate().map(|(i, k)| normalize(*k, ai.len(), bi.len(), p, i as u32 + 1)).collect())
}

/// Primitive density: solutions whose reduction mod p has full rank.
pub fn beta_primitive_bruteforce(a_rep: &QMat, b: &QMat, p: u64, level: u32) -> Result<DensityResult, DensityError> {
    let (ai, bi) = (to_int(a_rep)?, to_int(b)?);
    let c = count_solutions(&ai, &bi, p, level, true, DEFAULT_BUDGET)?;
    Ok(DensityResult {
        value: normalize(*c.last().unwrap(), ai.len(), bi.len(), p, level),
        method: DensityMethod::Bruteforce,
        level: Some(level),
    })
}

// ---------------------------------------------------------------------------
// closed formula

/// Local mass factor of one Jordan constituent, indexed by its species s.
pub fn mass_species(s: i64, p: u64) -> Q {
    if s == 0 {
        return q(1);
    }
    let big = (s.abs() + 1) / 2;
    let mut r = q(1);
    for k in 1..big {
        r *= q(1) - qpow(p, -2 * k);
    }
    if s.abs() % 2 == 0 {
        let sg = if s > 0 { 1 } else { -1 };
        r *= q(1) - q(sg) * qpow(p, -big);
    }
    q(1) / (q(2) * r)
}

fn alpha_odd(b: &QMat, p: u64) -> Q {
    let mut by: BTreeMap<i64, Vec<Q>> = BTreeMap::new();
    for (v, blk) in jordan(b, p) {
        by.entry(v).or_default().push(&blk[0][0] / qpow(p, v));
    }
    let n = b.len() as i64;
    let mut mass = q(1);
    for us in by.values() {
        let k = us.len() as i64;
        let d: Q = us.iter().fold(q(1), |a, u| a * u);
        let s = if k % 2 == 1 {
            k
        } else {
            let sg = if (k / 2) % 2 == 1 { q(-1) } else { q(1) };
            k * legendre_unit(&(sg * d), p) as i64
        };
        mass *= mass_species(s, p);
    }
    let sc: Vec<(i64, i64)> = by.iter().map(|(v, us)| (*v, us.len() as i64)).collect();
    let mut cross = 0;
    for i in 0..sc.len() {
        for j in i + 1..sc.len() {
            cross += (sc[j].0 - sc[i].0) * sc[i].1 * sc[j].1;
        }
    }
    let ex = val(&det(b), p) * (n + 1) - cross;
    assert!(ex % 2 == 0);
    qpow(p, ex / 2) / (q(2) * mass)
}

fn alpha_two(b: &QMat) -> Q {
    let sym = symbol_2adic(b);
    let n = b.len() as i64;
    let by: HashMap<i64, &Constituent> = sym.iter().map(|c| (c.scale, c)).collect();
    let lo = sym.first().unwrap().scale - 1;
    let hi = sym.last().unwrap().scale + 1;
    let empty = |v| Constituent { scale: v, rank: 0, det: 1, odd: 0, oddity: 0 };
    let full: Vec<Constituent> = (lo..=hi).map(|v| by.get(&v).map(|c| (*c).clone()).unwrap_or_else(|| empty(v))).collect();
    let mut mass = q(1);
    let mut n_even = 0;
    for i in 0..full.len() {
        let c = &full[i];
        if c.odd == 0 {
            n_even += c.rank;
        }
        let prev_odd = i > 0 && full[i - 1].odd == 1;
        let next_odd = i + 1 < full.len() && full[i + 1].odd == 1;
        let free = !prev_odd && !next_odd;
        let t = if c.odd == 0 || c.rank % 2 == 1 { c.rank / 2 } else { c.rank / 2 - 1 };
        let eps_minus = !matches!(c.det, 1 | 7);
        let o = (c.oddity + if eps_minus { 4 } else { 0 }) % 8;
        let s = if free && matches!(o, 0 | 1 | 7) {
            2 * t
        } else if free && matches!(o, 3 | 4 | 5) {
            -2 * t
        } else {
            2 * t + 1
        };
        mass *= mass_species(s, 2);
    }
    let odd_pairs = (0..full.len() - 1).filter(|i| full[*i].odd == 1 && full[i + 1].odd == 1).count() as i64;
    let mut cross = 0;
    for i in 0..sym.len() {
        for j in i + 1..sym.len() {
            cross += (sym[j].scale - sym[i].scale) * sym[i].rank * sym[j].rank;
        }
    }
    mass *= qpow(2, odd_pairs - n_even);
    let ex = val(&det(b), 2) * (n + 1) - cross;
    assert!(ex % 2 == 0);
    qpow(2, ex / 2) / (qpow(2, n + 1) * mass)
}

/// alpha_p(B) = alpha_p(B, B) for a nondegenerate p-integral B.
pub fn alpha_auto(b: &QMat, p: u64) -> DensityResult {
    if b.is_empty() {
        return DensityResult { value: q(1), method: DensityMethod::JordanFormula, level: None };
    }
    if p == 2 {
        DensityResult { value: alpha_two(b), method: DensityMethod::CsFormula, level: None }
    } else {
        DensityResult { value: alpha_odd(b, p), method: DensityMethod::JordanFormula, level: None }
    }
}

pub fn alpha(b: &QMat, p: u64) -> Q {
    alpha_auto(b, p).value
}

// ---------------------------------------------------------------------------
// reduced matrices and divisors

/// Upper-triangular W with diagonal p^{e_i} and 0 <= W_ij < p^{e_j} for i < j:
/// representatives of GL_m(Z_p) \ M_m(Z_p)^x with sum e_i <= bound.
pub fn reduced_matrices(m: usize, p: u64, bound: u32) -> Vec<Vec<Vec<i64>>> {
    let mut out = Vec::new();
    let mut es = vec![0u32; m];
    fn rec(i: usize, left: u32, es: &mut Vec<u32>, p: u64, out: &mut Vec<Vec<Vec<i64>>>) {
        let m = es.len();
        if i == m {
            let mut w = vec![vec![0i64; m]; m];
            for k in 0..m {
                w[k][k] = (p as i64).pow(es[k]);
            }
            let slots: Vec<(usize, usize)> = (0..m).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
            fill(&slots, 0, &mut w, out);
            return;
        }
        for e in 0..=left {
            es[i] = e;
            rec(i + 1, left - e, es, p, out);
        }
    }
    fn fill(slots: &[(usize, usize)], k: usize, w: &mut Vec<Vec<i64>>, out: &mut Vec<Vec<Vec<i64>>>) {
        if k == slots.len() {
            out.push(w.clone());
            return;
        }
        let (i, j) = slots[k];
        for d in 0..w[j][j] {
            w[i][j] = d;
            fill(slots, k + 1, w, out);
        }
        w[i][j] = 0;
    }
    rec(0, bound, &mut es, p, &mut out);
    out
}

fn inverse_upper(w: &[Vec<i64>]) -> QMat {
    let m = w.len();
    let mut inv = vec![vec![Q::zero(); m]; m];
    for j in 0..m {
        inv[j][j] = qf(1, w[j][j]);
        for i in (0..j).rev() {
            let mut s = Q::zero();
            for k in i + 1..=j {
                s += q(w[i][k]) * &inv[k][j];
            }
            inv[i][j] = -s / q(w[i][i]);
        }
    }
    inv
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DivisorFilter {
    None,
    /// B[W^{-1}] in L' (p = 2)
    L1,
    /// B[W^{-1}] even (p = 2)
    L0,
}

fn passes(b: &QMat, p: u64, f: DivisorFilter) -> bool {
    if !is_p_integral(b, p) {
        return false;
    }
    match f {
        DivisorFilter::None => true,
        DivisorFilter::L1 => p != 2 || in_l_prime(b).is_some(),
        DivisorFilter::L0 => p != 2 || is_even(b),
    }
}

/// A divisor class of B: a representative of B[W^{-1}], k = nu(det W), and the count of W.
#[derive(Clone, Debug)]
pub struct Divisor {
    pub rep: QMat,
    pub k: u32,
    pub count: u64,
}

/// Divisors of B via Hermite-reduced W, grouped by (class, nu(det W)).
pub fn divisors_reduced(b: &QMat, p: u64, filter: DivisorFilter) -> Vec<Divisor> {
    let nu = val(&det(b), p);
    let bound = (nu / 2).max(0) as u32;
    let mut groups: BTreeMap<(u32, ClassKey), Divisor> = BTreeMap::new();
    for w in reduced_matrices(b.len(), p, bound) {
        let k: u32 = (0..w.len()).map(|i| val(&q(w[i][i]), p) as u32).sum();
        let bw = gram(b, &inverse_upper(&w));
        if !passes(&bw, p, filter) {
            continue;
        }
        let key = class_key(&bw, p);
        groups.entry((k, key)).and_modify(|d| d.count += 1).or_insert(Divisor { rep: bw, k, count: 1 });
    }
    groups.into_values().collect()
}

/// Integral overlattices L ⊇ Z^m of B, as basis matrices M with index p^k,
/// found by breadth-first search over one-step extensions.
pub fn overlattices(b: &QMat, p: u64, max_index: u32) -> Vec<(QMat, u32)> {
    let m = b.len();
    let id: QMat = (0..m).map(|i| (0..m).map(|j| if i == j { q(1) } else { q(0) }).collect()).collect();
    let mut seen: HashMap<Vec<Vec<Q>>, ()> = HashMap::new();
    seen.insert(hnf_key(&id), ());
    let mut res = vec![(id.clone(), 0u32)];
    let mut frontier = vec![(id, 0u32)];
    let pq = q(p as i64);
    while !frontier.is_empty() {
        let mut nf = Vec::new();
        for (mb, k) in &frontier {
            if *k >= max_index {
                continue;
            }
            let g = gram(b, mb);
            for c in cartesian(m, p) {
                if c.iter().all(|x| *x == 0) {
                    continue;
                }
                let gc: Vec<Q> = (0..m).map(|i| (0..m).fold(Q::zero(), |s, j| s + &g[i][j] * q(c[j]))).collect();
                if !gc.iter().all(|x| x.is_zero() || val(&(x / &pq), p) >= 0) {
                    continue;
                }
                let cgc = (0..m).fold(Q::zero(), |s, i| s + q(c[i]) * &gc[i]) / (&pq * &pq);
                if !(cgc.is_zero() || val(&cgc, p) >= 0) {
                    continue;
                }
                let v: Vec<Q> = (0..m).map(|i| (0..m).fold(Q::zero(), |s, j| s + &mb[i][j] * q(c[j])) / &pq).collect();
                let nb = basis_with(mb, &v);
                let key = hnf_key(&nb);
                if seen.contains_key(&key) {
                    continue;
                }
                seen.insert(key, ());
                res.push((nb.clone(), k + 1));
                nf.push((nb, k + 1));
            }
        }
        frontier = nf;
    }
    res
}

fn cartesian(m: usize, p: u64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|v: Vec<i64>| (0..p as i64).map(move |x| [v.clone(), vec![x]].concat()))
            .collect();
    }
    out
}

fn lcm_den(rows: &[Vec<Q>]) -> num_bigint::BigInt {
    use num_integer::Integer;
    rows.iter().flatten().fold(num_bigint::BigInt::from(1), |l, x| l.lcm(x.denom()))
}

/// Column Hermite basis of the lattice spanned by the columns of `gens` (m x r).
fn hermite_columns(gens: &[Vec<Q>]) -> QMat {
    use num_bigint::BigInt;
    use num_integer::Integer;
    let m = gens.len();
    let l = lcm_den(gens);
    let lq = Q::from(l.clone());
    let ncol = gens[0].len();
    let mut cols: Vec<Vec<BigInt>> =
        (0..ncol).map(|j| (0..m).map(|i| (&gens[i][j] * &lq).to_integer()).collect()).collect();
    let mut basis: Vec<Vec<BigInt>> = Vec::new();
    for i in 0..m {
        loop {
            let mut nz: Vec<usize> = (0..cols.len()).filter(|c| !cols[*c][i].is_zero()).collect();
            if nz.len() <= 1 {
                break;
            }
            nz.sort_by_key(|c| cols[*c][i].magnitude().clone());
            let piv = cols[nz[0]].clone();
            for &c in &nz[1..] {
                let qt = cols[c][i].div_floor(&piv[i]);
                for k in 0..m {
                    let t = &qt * &piv[k];
                    cols[c][k] -= t;
                }
            }
            cols.retain(|c| c.iter().any(|x| !x.is_zero()));
        }
        if let Some(pos) = cols.iter().position(|c| !c[i].is_zero()) {
            let mut c = cols.remove(pos);
            if c[i] < BigInt::zero() {
                c.iter_mut().for_each(|x| *x = -x.clone());
            }
            basis.push(c);
        }
    }
    assert_eq!(basis.len(), m);
    // reduce entries below each pivot for a canonical form
    for j in 0..m {
        for jj in 0..j {
            let pv = basis[j][j].clone();
            let qt = basis[jj][j].div_floor(&pv);
            if !qt.is_zero() {
                for k in 0..m {
                    let t = &qt * &basis[j][k];
                    basis[jj][k] -= t;
                }
            }
        }
    }
    (0..m).map(|i| (0..m).map(|j| Q::new(basis[j][i].clone(), l.clone())).collect()).collect()
}

fn basis_with(mb: &QMat, v: &[Q]) -> QMat {
    let gens: Vec<Vec<Q>> = mb.iter().enumerate().map(|(i, r)| {
        let mut r = r.clone();
        r.push(v[i].clone());
        r
    }).collect();
    hermite_columns(&gens)
}

fn hnf_key(mb: &QMat) -> Vec<Vec<Q>> {
    hermite_columns(mb)
}

/// Divisors of B via integral overlattices, grouped by (class, index exponent).
pub fn divisors(b: &QMat, p: u64, filter: DivisorFilter) -> Vec<Divisor> {
    let nu = val(&det(b), p);
    let mut groups: BTreeMap<(u32, ClassKey), Divisor> = BTreeMap::new();
    for (mb, k) in overlattices(b, p, (nu / 2).max(0) as u32) {
        let bw = gram(b, &mb);
        if !passes(&bw, p, filter) {
            continue;
        }
        let key = class_key(&bw, p);
        groups.entry((k, key)).and_modify(|d| d.count += 1).or_insert(Divisor { rep: bw, k, count: 1 });
    }
    groups.into_values().collect()
}

/// alpha_p(B', B) = alpha_p(B') * #{W : B' ~ B[W^{-1}]} * p^{(nu det B - nu det B')/2}.
pub fn alpha_pair(bp: &QMat, b: &QMat, p: u64) -> DensityResult {
    let key = class_key(bp, p);
    let count: u64 = divisors(b, p, DivisorFilter::None)
        .iter()
        .filter(|d| class_key(&d.rep, p) == key)
        .map(|d| d.count)
        .sum();
    let e = val(&det(b), p) - val(&det(bp), p);
    let value = if count == 0 {
        Q::zero()
    } else {
        assert!(e % 2 == 0);
        alpha(bp, p) * q(count as i64) * qpow(p, e / 2)
    };
    DensityResult { value, method: DensityMethod::Recursion, level: None }
}

/// Both sides of the identity sum_{B' : 1 ⊥ B' ≈ B} 1/alpha_2(B') = #(unit-scaled classes of B) / (2 alpha_2(B))
/// for an odd B of even degree.
pub fn unit_complement_sides(b: &QMat) -> (Q, Q) {
    let m = b.len();
    let nu = val(&det(b), 2);
    let units = [1i64, 3, 5, 7];
    let scaled_keys: Vec<ClassKey> = units.iter().map(|u| class_key(&scaled(b, &q(*u)), 2)).collect();
    let mut distinct = scaled_keys.clone();
    distinct.sort();
    distinct.dedup();
    let rhs = q(distinct.len() as i64) / (q(2) * alpha(b, 2));
    let mut lhs = Q::zero();
    for bp in enumerate_padic_classes(m - 1, 2, nu) {
        if val(&det(&bp), 2) != nu {
            continue;
        }
        let one = block_diag(&[vec![vec![q(1)]], bp.clone()]);
        if scaled_keys.contains(&class_key(&one, 2)) {
            lhs += q(1) / alpha(&bp, 2);
        }
    }
    (lhs, rhs)
}

pub fn unit_complement_check(b: &QMat) -> bool {
    let (l, r) = unit_complement_sides(b);
    l == r
}

/// Odd at 2: some diagonal entry is a unit.
pub fn is_odd_2(b: &QMat) -> bool {
    (0..b.len()).any(|i| !b[i][i].is_zero() && val(&b[i][i], 2) == 0)
}

/// det class helper shared by tests: the residue of a unit mod 8.
pub fn unit_mod8(x: &Q) -> u64 {
    mod8(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic_forms::qmat;

    #[test]
    fn brute_degree_one() {
        let u = qmat(&[&[1]]);
        assert_eq!(alpha_bruteforce(&u, &u, 5, 2).unwrap().value, q(1));
        assert_eq!(alpha_bruteforce(&u, &u, 2, 3).unwrap().value, q(1));
        assert_eq!(alpha_bruteforce(&u, &qmat(&[&[2]]), 5, 2).unwrap().value, q(0));
    }

    #[test]
    fn closed_formula_small() {
        assert_eq!(alpha(&qmat(&[&[1]]), 2), q(1));
        assert_eq!(alpha(&qmat(&[&[1]]), 5), q(1));
        assert_eq!(alpha(&qmat(&[&[5]]), 5), q(5));
        assert_eq!(alpha(&qmat(&[&[2]]), 3), q(1));
    }

    #[test]
    fn reduced_counts() {
        let c1 = |m, p, b| reduced_matrices(m, p, b).into_iter().filter(|w| {
            (0..m).map(|i| w[i][i]).product::<i64>() == p as i64
        }).count();
        assert_eq!(c1(2, 2, 1), 3);
        assert_eq!(c1(2, 3, 1), 4);
        assert_eq!(reduced_matrices(1, 3, 2).len(), 3);
    }

    #[test]
    fn divisors_degree_one() {
        let b = qmat(&[&[25]]);
        let d = divisors(&b, 5, DivisorFilter::None);
        assert_eq!(d.len(), 2);
        assert_eq!(d.iter().map(|x| x.k).collect::<Vec<_>>(), vec![0, 1]);
        let u = qmat(&[&[1, 0], &[0, 3]]);
        assert_eq!(divisors(&u, 3, DivisorFilter::None).len(), 1);
    }

    #[test]
    fn pair_density_degree_one() {
        let a = alpha_pair(&qmat(&[&[1]]), &qmat(&[&[9]]), 3).value;
        assert_eq!(a, q(3));
        let b = qmat(&[&[1, 0], &[0, 3]]);
        assert_eq!(alpha_pair(&b, &b, 3).value, alpha(&b, 3));
    }

    #[test]
    fn primitive_examples() {
        let one = qmat(&[&[1]]);
        let b = beta_primitive_bruteforce(&one, &qmat(&[&[9]]), 3, 3).unwrap().value;
        assert_eq!(b, q(0));
        let b = beta_primitive_bruteforce(&one, &one, 3, 2).unwrap().value;
        assert_eq!(b, q(1));
    }

    #[test]
    fn unit_complement_degree_two() {
        assert!(unit_complement_check(&qmat(&[&[1, 0], &[0, 3]])));
        assert!(unit_complement_check(&qmat(&[&[1, 0], &[0, 1]])));
    }
}
