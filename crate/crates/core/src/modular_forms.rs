//! Exact q-expansions: level-one forms, Cohen's Eisenstein series, index-1
//! Jacobi forms and the plus-space forms obtained from them, together with
//! Shimura-lift and Dirichlet-series cross-checks.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::exact_algebra::{
    bernoulli, dirichlet_double, dirichlet_mul, q, qbig, qf, qstr, DirichletCoeffs, ExtScalar, Q,
};
use crate::padic_forms::{fundamental_part, is_fundamental, kronecker};
use crate::siegel_series::satake_sum;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModularError {
    #[error("weight {0} is not supported here")]
    Weight(i64),
    #[error("unsupported parameters n={n}, k={k} for the {variant} variant; supported: {supported}")]
    Unsupported { n: usize, k: usize, variant: String, supported: String },
    #[error("coefficient at {0} lies outside the plus-space support")]
    NotPlusForm(u64),
    #[error("index-1 dependence fails at (n, r) = ({0}, {1})")]
    JacobiDependence(u64, i64),
    #[error("coefficient {0} is beyond the available precision")]
    Precision(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Cusp,
    Eisenstein,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Cusp => "cusp",
            Variant::Eisenstein => "eisenstein",
        })
    }
}

// ---------------------------------------------------------------------------
// arithmetic helpers

pub fn sigma(k: u32, n: u64) -> BigInt {
    let mut s = BigInt::zero();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            s += BigInt::from(d).pow(k);
            if d * d != n {
                s += BigInt::from(n / d).pow(k);
            }
        }
        d += 1;
    }
    s
}

pub fn mobius(mut n: u64) -> i64 {
    let mut r = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            r = -r;
        }
        p += 1;
    }
    if n > 1 {
        -r
    } else {
        r
    }
}

fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n % d == 0).collect()
}

// ---------------------------------------------------------------------------
// q-expansions

#[derive(Clone, Debug, PartialEq)]
pub struct QExpansion {
    pub weight: Q,
    /// c(0), ..., c(n_max)
    pub coeffs: Vec<Q>,
}

impl QExpansion {
    pub fn n_max(&self) -> u64 {
        self.coeffs.len() as u64 - 1
    }
    pub fn coeff(&self, n: u64) -> Q {
        assert!(n <= self.n_max(), "coefficient {n} beyond precision {}", self.n_max());
        self.coeffs[n as usize].clone()
    }
    pub fn is_cusp(&self) -> bool {
        self.coeffs[0].is_zero()
    }
    pub fn mul(&self, o: &QExpansion) -> QExpansion {
        let n = self.n_max().min(o.n_max()) as usize;
        let mut r = vec![Q::zero(); n + 1];
        for (i, x) in self.coeffs.iter().enumerate().take(n + 1) {
            if x.is_zero() {
                continue;
            }
            for (j, y) in o.coeffs.iter().enumerate().take(n + 1 - i) {
                if !y.is_zero() {
                    r[i + j] += x * y;
                }
            }
        }
        QExpansion { weight: &self.weight + &o.weight, coeffs: r }
    }
    pub fn scale(&self, c: &Q) -> QExpansion {
        QExpansion { weight: self.weight.clone(), coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }
    pub fn sub(&self, o: &QExpansion) -> QExpansion {
        let n = self.n_max().min(o.n_max()) as usize;
        let coeffs = (0..=n).map(|i| &self.coeffs[i] - &o.coeffs[i]).collect();
        QExpansion { weight: self.weight.clone(), coeffs }
    }
    /// q d/dq
    pub fn derivative(&self) -> QExpansion {
        let coeffs = self.coeffs.iter().enumerate().map(|(i, x)| x * q(i as i64)).collect();
        QExpansion { weight: &self.weight + q(2), coeffs }
    }
    /// f(mz) truncated to n_max.
    pub fn rescale(&self, m: u64, n_max: u64) -> QExpansion {
        let mut coeffs = vec![Q::zero(); n_max as usize + 1];
        for (i, x) in self.coeffs.iter().enumerate() {
            let j = i as u64 * m;
            if j <= n_max {
                coeffs[j as usize] = x.clone();
            }
        }
        assert!(self.n_max() * m + m > n_max, "rescaled expansion lacks precision");
        QExpansion { weight: self.weight.clone(), coeffs }
    }
    /// Divide by the first nonzero coefficient.
    pub fn normalized(&self) -> QExpansion {
        match self.coeffs.iter().find(|x| !x.is_zero()) {
            Some(c) => self.scale(&(Q::one() / c)),
            None => self.clone(),
        }
    }
    pub fn to_json(&self) -> Value {
        json!({
            "weight": qstr(&self.weight),
            "coeffs": self.coeffs.iter().map(qstr).collect::<Vec<_>>(),
        })
    }
}

/// E_k with constant term 1 (E_0 = 1).
pub fn eisenstein_qexp(k: u32, n_max: u64) -> Result<QExpansion, ModularError> {
    if k == 0 {
        let mut coeffs = vec![Q::zero(); n_max as usize + 1];
        coeffs[0] = q(1);
        return Ok(QExpansion { weight: q(0), coeffs });
    }
    if k < 4 || k % 2 == 1 {
        return Err(ModularError::Weight(k as i64));
    }
    let c = q(-2 * k as i64) / bernoulli(k as usize);
    let mut coeffs = vec![q(1)];
    coeffs.extend((1..=n_max).map(|n| &c * qbig(sigma(k - 1, n))));
    Ok(QExpansion { weight: q(k as i64), coeffs })
}

/// Delta = q prod (1 - q^n)^24.
pub fn delta_qexp(n_max: u64) -> QExpansion {
    let n = n_max as usize;
    let mut p = vec![BigInt::zero(); n + 1];
    p[0] = BigInt::one();
    for m in 1..=n {
        for _ in 0..24 {
            for i in (m..=n).rev() {
                let t = p[i - m].clone();
                p[i] -= t;
            }
        }
    }
    let mut coeffs = vec![Q::zero(); n + 1];
    for i in 0..n {
        coeffs[i + 1] = qbig(p[i].clone());
    }
    QExpansion { weight: q(12), coeffs }
}

pub fn theta_qexp(n_max: u64) -> QExpansion {
    let mut coeffs = vec![Q::zero(); n_max as usize + 1];
    coeffs[0] = q(1);
    let mut m = 1u64;
    while m * m <= n_max {
        coeffs[(m * m) as usize] = q(2);
        m += 1;
    }
    QExpansion { weight: qf(1, 2), coeffs }
}

/// Weights of level-one cusp spaces of dimension one.
pub const CUSP_WEIGHTS: [u32; 6] = [12, 16, 18, 20, 22, 26];

/// The normalized eigenform Delta * E_{w-12} of a one-dimensional cusp space.
pub fn cusp_eigenform(w: u32, n_max: u64) -> Result<QExpansion, ModularError> {
    if !CUSP_WEIGHTS.contains(&w) {
        return Err(ModularError::Weight(w as i64));
    }
    Ok(delta_qexp(n_max).mul(&eisenstein_qexp(w - 12, n_max)?))
}

/// The first Rankin-Cohen bracket of E_a(4z) and theta, weight a + 5/2,
/// normalized so that its first nonzero coefficient is 1.
pub fn rankin_cohen_theta(a: u32, n_max: u64) -> Result<QExpansion, ModularError> {
    let e = eisenstein_qexp(a, n_max / 4 + 1)?.rescale(4, n_max);
    let th = theta_qexp(n_max);
    // a f Dg - (1/2) Df g, doubled
    let t1 = e.mul(&th.derivative()).scale(&q(2 * a as i64));
    let t2 = e.derivative().mul(&th);
    let mut r = t1.sub(&t2).normalized();
    r.weight = q(a as i64) + qf(5, 2);
    Ok(r)
}

// ---------------------------------------------------------------------------
// Cohen's function

fn lval_cache() -> &'static Mutex<HashMap<(u32, i64), Q>> {
    static C: OnceLock<Mutex<HashMap<(u32, i64), Q>>> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

/// B_{r,chi_d} = a^{r-1} sum_{t=1}^{a} chi_d(t) B_r(t/a), a = |d|.
pub fn gen_bernoulli(r: u32, d: i64) -> Q {
    let a = d.unsigned_abs();
    // expand B_r(t/a) and collect the power sums sum chi(t) t^{r-j}
    let mut psum = vec![BigInt::zero(); r as usize + 1];
    for t in 1..=a {
        let c = kronecker(d, t);
        if c == 0 {
            continue;
        }
        let mut tp = BigInt::one();
        let bt = BigInt::from(t);
        for e in 0..=r as usize {
            if c > 0 {
                psum[e] += &tp;
            } else {
                psum[e] -= &tp;
            }
            tp *= &bt;
        }
    }
    let mut s = Q::zero();
    let mut binom = BigInt::one();
    for j in 0..=r as usize {
        // C(r, j) B_j a^{j-1} sum chi(t) t^{r-j}
        let term = qbig(binom.clone()) * bernoulli(j) * crate::exact_algebra::qpow(a, j as i64 - 1)
            * qbig(psum[r as usize - j].clone());
        s += term;
        binom = binom * BigInt::from(r as usize - j) / BigInt::from(j + 1);
    }
    s
}

/// L(1-r, chi_d) = -B_{r,chi_d}/r.
pub fn l_value_neg(r: u32, d: i64) -> Q {
    if let Some(v) = lval_cache().lock().unwrap().get(&(r, d)) {
        return v.clone();
    }
    let v = -gen_bernoulli(r, d) / q(r as i64);
    lval_cache().lock().unwrap().insert((r, d), v.clone());
    v
}

/// Cohen's H(r, N).
pub fn cohen_h(r: u32, n: u64) -> Q {
    assert!(r >= 2, "Cohen H needs r >= 2");
    if n == 0 {
        return -bernoulli(2 * r as usize) / q(2 * r as i64);
    }
    let disc = if r % 2 == 0 { n as i64 } else { -(n as i64) };
    if !matches!(disc.rem_euclid(4), 0 | 1) {
        return Q::zero();
    }
    let (d, f) = fundamental_part(disc);
    let mut s = Q::zero();
    for e in divisors(f) {
        let mu = mobius(e);
        if mu == 0 {
            continue;
        }
        let chi = kronecker(d, e);
        if chi == 0 {
            continue;
        }
        let term = qbig(BigInt::from(e).pow(r - 1) * sigma(2 * r - 1, f / e));
        s += q(mu * chi as i64) * term;
    }
    l_value_neg(r, d) * s
}

// ---------------------------------------------------------------------------
// plus-space forms

#[derive(Clone, Debug, PartialEq)]
pub struct PlusFormExpansion {
    /// l - 1/2
    pub weight: Q,
    /// support is on m with sign*m = 0, 1 mod 4
    pub sign: i64,
    pub n_max: u64,
    pub coeffs: BTreeMap<u64, Q>,
}

impl PlusFormExpansion {
    pub fn new(weight: Q, sign: i64, n_max: u64, coeffs: BTreeMap<u64, Q>) -> Result<Self, ModularError> {
        let mut c = coeffs;
        c.retain(|m, v| *m <= n_max && !v.is_zero());
        for m in c.keys() {
            if !matches!((sign * *m as i64).rem_euclid(4), 0 | 1) {
                return Err(ModularError::NotPlusForm(*m));
            }
        }
        Ok(PlusFormExpansion { weight, sign, n_max, coeffs: c })
    }
    pub fn from_qexp(f: &QExpansion, sign: i64) -> Result<Self, ModularError> {
        let c = f.coeffs.iter().enumerate().map(|(i, x)| (i as u64, x.clone())).collect();
        Self::new(f.weight.clone(), sign, f.n_max(), c)
    }
    pub fn coeff(&self, m: u64) -> Q {
        assert!(m <= self.n_max, "coefficient {m} beyond precision {}", self.n_max);
        self.coeffs.get(&m).cloned().unwrap_or_else(Q::zero)
    }
    /// lambda with weight lambda + 1/2.
    pub fn lambda(&self) -> i64 {
        (&self.weight - qf(1, 2)).to_integer().try_into().unwrap()
    }
    pub fn scale(&self, c: &Q) -> PlusFormExpansion {
        let coeffs = self.coeffs.iter().map(|(m, v)| (*m, v * c)).collect();
        PlusFormExpansion::new(self.weight.clone(), self.sign, self.n_max, coeffs).unwrap()
    }
    pub fn to_json(&self) -> Value {
        let m: serde_json::Map<String, Value> =
            self.coeffs.iter().map(|(k, v)| (k.to_string(), Value::String(qstr(v)))).collect();
        json!({"weight": qstr(&self.weight), "sign": self.sign, "n_max": self.n_max, "coeffs": m})
    }
}

/// Cohen's Eisenstein series H_r, weight r + 1/2.
pub fn cohen_eisenstein(r: u32, n_max: u64) -> PlusFormExpansion {
    let sign = if r % 2 == 0 { 1 } else { -1 };
    let coeffs = (0..=n_max).map(|n| (n, cohen_h(r, n))).collect();
    PlusFormExpansion::new(q(r as i64) + qf(1, 2), sign, n_max, coeffs).unwrap()
}

// ---------------------------------------------------------------------------
// index-1 Jacobi forms

#[derive(Clone, Debug, PartialEq)]
pub struct JacobiExpansion {
    pub weight: u32,
    /// n ranges over 0..=n_max
    pub n_max: u64,
    /// D = 4n - r^2 -> c(n, r)
    pub by_disc: BTreeMap<u64, Q>,
}

impl JacobiExpansion {
    /// Largest D for which every (n, r) representative is covered.
    pub fn d_max(&self) -> u64 {
        4 * self.n_max
    }
    pub fn coeff(&self, n: u64, r: i64) -> Q {
        let d = 4 * n as i64 - r * r;
        if d < 0 {
            return Q::zero();
        }
        self.by_disc.get(&(d as u64)).cloned().unwrap_or_else(Q::zero)
    }
    pub fn to_json(&self) -> Value {
        let m: serde_json::Map<String, Value> =
            self.by_disc.iter().map(|(k, v)| (k.to_string(), Value::String(qstr(v)))).collect();
        json!({"weight": self.weight, "index": 1, "n_max": self.n_max, "coeffs": m})
    }
}

/// Rows n <= this are scanned over every r when building a Jacobi table.
pub const JACOBI_SCAN_ROWS: u64 = 40;

/// Build from an (n, r) table, asserting that c(n, r) depends only on 4n - r^2.
/// Rows past [`JACOBI_SCAN_ROWS`] are read at r = 0, 1 only.
fn jacobi_from_table(
    weight: u32,
    n_max: u64,
    c: impl Fn(u64, i64) -> Q,
) -> Result<JacobiExpansion, ModularError> {
    let mut by_disc: BTreeMap<u64, Q> = BTreeMap::new();
    for n in 0..=n_max {
        let rmax = (2.0 * (n as f64).sqrt()) as i64 + 2;
        let rs: Vec<i64> = if n <= JACOBI_SCAN_ROWS { (-rmax..=rmax).collect() } else { vec![0, 1] };
        for r in rs {
            let v = c(n, r);
            let d = 4 * n as i64 - r * r;
            if d < 0 {
                if !v.is_zero() {
                    return Err(ModularError::JacobiDependence(n, r));
                }
                continue;
            }
            match by_disc.get(&(d as u64)) {
                Some(w) if *w != v => return Err(ModularError::JacobiDependence(n, r)),
                Some(_) => {}
                None => {
                    by_disc.insert(d as u64, v);
                }
            }
        }
    }
    by_disc.retain(|_, v| !v.is_zero());
    Ok(JacobiExpansion { weight, n_max, by_disc })
}

/// E_{k,1}, with c(n, r) = H(k-1, 4n - r^2) / H(k-1, 0).
pub fn jacobi_eisenstein(k: u32, n_max: u64) -> Result<JacobiExpansion, ModularError> {
    if k < 4 || k % 2 == 1 {
        return Err(ModularError::Weight(k as i64));
    }
    let z = cohen_h(k - 1, 0);
    let h: Vec<Q> = (0..=4 * n_max).map(|d| cohen_h(k - 1, d) / &z).collect();
    jacobi_from_table(k, n_max, |n, r| {
        let d = 4 * n as i64 - r * r;
        if d < 0 {
            Q::zero()
        } else {
            h[d as usize].clone()
        }
    })
}

/// g(tau) * phi(tau, z) for an elliptic form g.
fn jacobi_times(g: &QExpansion, phi: &JacobiExpansion, n: u64, r: i64) -> Q {
    let mut s = Q::zero();
    for m in 0..=n {
        let a = g.coeff(m);
        if !a.is_zero() {
            s += a * phi.coeff(n - m, r);
        }
    }
    s
}

/// The index-1 cusp form of weight k in {10, 12, 14}: the combination of
/// E_{k-4} E_{4,1} and E_{k-6} E_{6,1} whose D = 0 coefficient vanishes.
pub fn jacobi_cusp(k: u32, n_max: u64) -> Result<JacobiExpansion, ModularError> {
    if ![10, 12, 14].contains(&k) {
        return Err(ModularError::Weight(k as i64));
    }
    let e41 = jacobi_eisenstein(4, n_max)?;
    let e61 = jacobi_eisenstein(6, n_max)?;
    let g4 = eisenstein_qexp(k - 4, n_max)?;
    let g6 = eisenstein_qexp(k - 6, n_max)?;
    // D = 0 coefficients of both products are 1, so (1, -1) is the cusp combination
    let a = jacobi_times(&g4, &e41, 0, 0);
    let b = jacobi_times(&g6, &e61, 0, 0);
    let (ca, cb) = (b.clone(), -a.clone());
    let raw = jacobi_from_table(k, n_max, |n, r| {
        &ca * jacobi_times(&g4, &e41, n, r) + &cb * jacobi_times(&g6, &e61, n, r)
    })?;
    let first = raw.by_disc.values().next().cloned().ok_or(ModularError::Weight(k as i64))?;
    let by_disc = raw.by_disc.iter().map(|(d, v)| (*d, v / &first)).collect();
    Ok(JacobiExpansion { weight: k, n_max, by_disc })
}

/// h with c_h(D) = c_phi((D + r^2)/4, r).
pub fn sigma_1(phi: &JacobiExpansion) -> PlusFormExpansion {
    let n_max = phi.d_max() - 1;
    let mut coeffs = BTreeMap::new();
    for d in 0..=n_max {
        let r = (d % 4 == 3) as i64;
        if (d + (r * r) as u64) % 4 != 0 {
            continue;
        }
        let v = phi.coeff((d + (r * r) as u64) / 4, r);
        if !v.is_zero() {
            coeffs.insert(d, v);
        }
    }
    PlusFormExpansion::new(q(phi.weight as i64) - qf(1, 2), -1, n_max, coeffs)
        .expect("index-1 Jacobi coefficients are plus-space supported")
}

// ---------------------------------------------------------------------------
// Shimura lift and Dirichlet series

/// The D-th Shimura lift: a(m) = sum_{d|m} (D/d) d^{lambda-1} c_h(|D| m^2/d^2), m = 1..count.
pub fn shimura_lift(h: &PlusFormExpansion, d: i64, count: u64) -> Result<Vec<Q>, ModularError> {
    let lam = h.lambda();
    let ad = d.unsigned_abs();
    if ad * count * count > h.n_max {
        return Err(ModularError::Precision(ad * count * count));
    }
    Ok((1..=count)
        .map(|m| {
            let mut s = Q::zero();
            for e in divisors(m) {
                let chi = kronecker(d, e);
                if chi != 0 {
                    let c = h.coeff(ad * (m / e) * (m / e));
                    s += q(chi as i64) * qbig(BigInt::from(e).pow((lam - 1) as u32)) * c;
                }
            }
            s
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShimuraReport {
    pub d: i64,
    pub skipped: bool,
    pub proportional: bool,
    #[serde(serialize_with = "ser_opt_q")]
    pub scalar: Option<Q>,
}

fn ser_opt_q<S: serde::Serializer>(x: &Option<Q>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_str(&qstr(v)),
        None => s.serialize_none(),
    }
}

/// Is the D-th lift of h a multiple of f on the first `count` coefficients?
/// The scalar, when it exists, is c_h(|D|) for an eigenform f.
pub fn shimura_check(h: &PlusFormExpansion, f: &QExpansion, d: i64, count: u64) -> Result<ShimuraReport, ModularError> {
    let ch = h.coeff(d.unsigned_abs());
    if ch.is_zero() {
        return Ok(ShimuraReport { d, skipped: true, proportional: false, scalar: None });
    }
    let lift = shimura_lift(h, d, count)?;
    let c1 = f.coeff(1);
    let scalar = &lift[0] / &c1;
    let proportional = (1..=count).all(|m| lift[m as usize - 1] == &scalar * f.coeff(m));
    Ok(ShimuraReport { d, skipped: false, proportional, scalar: Some(scalar) })
}

/// beta_p + 1/beta_p = p^{(n+1-2k)/2} c_f(p).
pub fn satake_rhs(cf_p: &Q, p: u64, k: usize, n: usize) -> ExtScalar {
    satake_sum(p, n, k, cf_p)
}

pub fn lfunc_coeffs(c: impl Fn(u64) -> Q, n_max: u64) -> DirichletCoeffs {
    DirichletCoeffs::from_fn(n_max, c)
}

/// L(s, (d_0/*)).
pub fn char_l_coeffs(d0: i64, n_max: u64) -> DirichletCoeffs {
    DirichletCoeffs::from_fn(n_max, |m| q(kronecker(d0, m) as i64))
}

/// Fundamental discriminants d_0 with sign d_0 = sign and |d_0| <= n_max; 1 counts when sign > 0.
pub fn fundamental_discs(sign: i64, n_max: u64) -> Vec<i64> {
    (1..=n_max as i64).map(|a| sign * a).filter(|d| *d == 1 || is_fundamental(*d)).collect()
}

/// Both sides of L(s,h) = L(2s,f) sum_{d_0} c_h(|d_0|) |d_0|^{-s} L(2s-lambda+1, (d_0/*))^{-1}.
pub fn l_h_identity_sides(h: &PlusFormExpansion, f: &QExpansion, n_max: u64) -> (DirichletCoeffs, DirichletCoeffs) {
    let lam = h.lambda();
    let lhs = lfunc_coeffs(|m| h.coeff(m), n_max);
    let lf = lfunc_coeffs(|m| f.coeff(m), (n_max as f64).sqrt() as u64 + 1);
    let mut sum = DirichletCoeffs::new(n_max);
    for d0 in fundamental_discs(h.sign, n_max) {
        let a = d0.unsigned_abs();
        let c0 = h.coeff(a);
        if c0.is_zero() {
            continue;
        }
        let mut m = 1u64;
        while a * m * m <= n_max {
            let mu = mobius(m) * kronecker(d0, m) as i64;
            if mu != 0 {
                let v = &c0 * q(mu) * qbig(BigInt::from(m).pow((lam - 1) as u32));
                sum.add_at(a * m * m, &v);
            }
            m += 1;
        }
    }
    let rhs = dirichlet_mul(&dirichlet_double(&lf, n_max), &sum);
    (lhs, rhs)
}

pub fn l_h_identity_check(h: &PlusFormExpansion, f: &QExpansion, n_max: u64) -> bool {
    let (l, r) = l_h_identity_sides(h, f, n_max);
    l.coeffs == r.coeffs
}

// ---------------------------------------------------------------------------
// lift inputs

/// The pair (h, f) feeding the lift of degree n and weight k - 1/2.
#[derive(Clone, Debug)]
pub struct LiftInputs {
    pub n: usize,
    pub k: usize,
    pub variant: Variant,
    pub h: PlusFormExpansion,
    pub f: QExpansion,
}

impl LiftInputs {
    pub fn ch(&self, m: u64) -> Q {
        self.h.coeff(m)
    }
    pub fn cf(&self, m: u64) -> Q {
        self.f.coeff(m)
    }
}

pub const SUPPORTED_CUSP: [(usize, usize); 6] = [(2, 10), (2, 12), (2, 14), (4, 8), (4, 10), (4, 12)];

/// h to precision h_max and f to precision f_max.
pub fn lift_inputs(n: usize, k: usize, variant: Variant, h_max: u64, f_max: u64) -> Result<LiftInputs, ModularError> {
    let unsupported = |s: &str| ModularError::Unsupported { n, k, variant: variant.to_string(), supported: s.into() };
    if n < 2 || n % 2 == 1 || k % 2 == 1 {
        return Err(unsupported("n even, k even"));
    }
    let lam = k as i64 - n as i64 / 2;
    let sign = if lam % 2 == 0 { 1 } else { -1 };
    let (h, f) = match variant {
        Variant::Eisenstein => {
            if k <= n + 1 || lam < 2 {
                return Err(unsupported("k > n + 1"));
            }
            let h = cohen_eisenstein(lam as u32, h_max);
            let w = (2 * k - n) as u32;
            let f = QExpansion {
                weight: q(w as i64),
                coeffs: (0..=f_max).map(|m| if m == 0 { Q::zero() } else { qbig(sigma(w - 1, m)) }).collect(),
            };
            (h, f)
        }
        Variant::Cusp => {
            if !SUPPORTED_CUSP.contains(&(n, k)) {
                return Err(unsupported("(n,k) in (2,10) (2,12) (2,14) (4,8) (4,10) (4,12)"));
            }
            let f = cusp_eigenform((2 * k - n) as u32, f_max)?;
            let h = if n == 2 {
                sigma_1(&jacobi_cusp(k as u32, h_max / 4 + 1)?)
            } else {
                PlusFormExpansion::from_qexp(&rankin_cohen_theta((lam - 2) as u32, h_max)?, sign)?
            };
            (h, f)
        }
    };
    let h = PlusFormExpansion::new(h.weight, sign, h_max.min(h.n_max), h.coeffs)?;
    Ok(LiftInputs { n, k, variant, h, f })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramanujan_tau() {
        let d = delta_qexp(10);
        let tau: Vec<i64> = vec![0, 1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920];
        assert_eq!(d.coeffs, tau.iter().map(|x| q(*x)).collect::<Vec<_>>());
    }

    #[test]
    fn cohen_small() {
        // H(2, 0) = zeta(-3) = 1/120, H(2, 1) = zeta(-1) = -1/12
        assert_eq!(cohen_h(2, 0), qf(1, 120));
        assert_eq!(cohen_h(2, 1), qf(-1, 12));
        assert_eq!(cohen_h(2, 2), q(0));
        // H(3, 3) = L(-2, chi_{-3}) = -2/9
        assert_eq!(cohen_h(3, 3), qf(-2, 9));
    }

    #[test]
    fn mobius_values() {
        let v: Vec<i64> = (1..=10).map(mobius).collect();
        assert_eq!(v, vec![1, -1, -1, 0, -1, 1, -1, 0, 0, 1]);
    }
}
