//! The local polynomials G^(1) and F~^(1), the local series P^(1), K^(1),
//! zeta, zeta* and Q, together with the identity checks relating them.
//!
//! Series in `t` carry Laurent coefficients in `X` over Q(sqrt p); the purely
//! rational series (zeta, Q) use [`PSeries`].

use std::collections::{BTreeMap, HashMap};
use std::sync::{Mutex, OnceLock};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exact_algebra::{phi, q, qf, qpow, AlgebraError, ExtScalar, SymLaurent, TruncSeries, Q};
use crate::local_density::{alpha, overlattices};
use crate::padic_forms::{
    block_diag, chi_p, class_key, det, enumerate_padic_classes, frak_e1, hasse, hilbert, in_l_prime,
    in_l_prime_at, is_even, least_nonresidue, qmat, same_square_class, scaled, split_shape, theta_standard,
    val, xi0, xi_bar_1, ClassKey, QMat, SplitType,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("G polynomial is not divisible by its stated denominator")]
    NonPolynomial,
    #[error("matrix is not in L'")]
    NotInLPrime,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Rational power series in one variable: exponent -> coefficient.
pub type PSeries = BTreeMap<i64, Q>;

fn sign_half(k: usize) -> Q {
    if (k / 2) % 2 == 1 {
        q(-1)
    } else {
        q(1)
    }
}

/// Representatives of the d_0-set F_p.
pub fn f_reps(p: u64) -> Vec<Q> {
    if p == 2 {
        [1, 5, -4, -20, 8, -8, 24, -24].iter().map(|x| q(*x)).collect()
    } else {
        let nr = least_nonresidue(p);
        let pi = p as i64;
        [1, nr, pi, pi * nr].iter().map(|x| q(*x)).collect()
    }
}

/// kappa(d_0, r-1, l) with r = n.
pub fn kappa(d0: &Q, n: usize, l: u8, p: u64) -> Q {
    let r = n as i64;
    let mut v = q(1);
    if p == 2 {
        let e = (l as i64 * r * (r - 2) / 8).rem_euclid(2);
        v *= if e == 1 { q(-1) } else { q(1) };
        v *= qpow(2, -(r - 2) * (r - 1) / 2);
    }
    if l == 1 {
        let s = sign_half(n);
        v *= q(hilbert(&s, &(&s * d0), p) as i64);
        v *= qpow(p, -(r / 2 - 1) * val(d0, p));
    }
    v
}

// ---------------------------------------------------------------------------
// G and F~

fn poly_mul(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut r = vec![q(0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            r[i + j] += x * y;
        }
    }
    r
}

/// poly / (1 + c Y), requiring exact divisibility.
fn div_linear(poly: &[Q], c: &Q) -> Result<Vec<Q>, SeriesError> {
    if c == &q(0) {
        return Ok(poly.to_vec());
    }
    let mut out = Vec::with_capacity(poly.len());
    let mut prev = q(0);
    for a in poly {
        let qi = a - c * &prev;
        out.push(qi.clone());
        prev = qi;
    }
    if out.last() != Some(&q(0)) {
        return Err(SeriesError::NonPolynomial);
    }
    out.pop();
    Ok(out)
}

/// G^(1)_p(B, Y) as coefficients of 1, Y, Y^2, ...
pub fn g1(b: &QMat, p: u64, n: usize) -> Result<Vec<Q>, SeriesError> {
    let x0 = q(xi0(b, p, n) as i64);
    let sh = split_shape(b, p, n);
    let num = vec![q(1), -(x0 * qpow(p, (n / 2) as i64))];
    let quad = |i: usize| vec![q(1), q(0), -qpow(p, (2 * i + n) as i64)];
    let n1 = sh.n1;
    if p != 2 {
        let top = if n1 % 2 == 0 { n1 / 2 } else { (n1 - 1) / 2 };
        let poly = (1..=top).fold(num, |acc, i| poly_mul(&acc, &quad(i)));
        if n1 % 2 == 1 {
            return Ok(poly);
        }
        let xb = q(xi_bar_1(b, p, n) as i64);
        return div_linear(&poly, &(-(qpow(p, (n1 / 2 + n / 2) as i64) * xb)));
    }
    let typ = sh.split_type.unwrap();
    let top = if typ == SplitType::III { (n1 / 2).saturating_sub(1) } else { n1 / 2 };
    let poly = (1..=top).fold(num, |acc, i| poly_mul(&acc, &quad(i)));
    if typ == SplitType::I {
        let xb = q(xi_bar_1(b, p, n) as i64);
        return div_linear(&poly, &(-(qpow(2, (n1 / 2 + n / 2) as i64) * xb)));
    }
    Ok(poly)
}

type FtKey = (u64, usize, ClassKey);

fn ft_cache() -> &'static Mutex<HashMap<FtKey, SymLaurent>> {
    static C: OnceLock<Mutex<HashMap<FtKey, SymLaurent>>> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

/// F~^(1)_p(B, X) for B in L'_{n-1,p}, summed over the integral overlattices of B.
pub fn ftilde1(b: &QMat, p: u64, n: usize) -> Result<SymLaurent, SeriesError> {
    if in_l_prime_at(b, p).is_none() {
        return Err(SeriesError::NotInLPrime);
    }
    let key = (p, n, class_key(b, p));
    if let Some(v) = ft_cache().lock().unwrap().get(&key) {
        return Ok(v.clone());
    }
    let nu = val(&det(b), p);
    let mut r = SymLaurent::zero(p);
    for (mb, k) in overlattices(b, p, (nu / 2).max(0) as u32) {
        let bp = crate::padic_forms::gram(b, &mb);
        if p == 2 && in_l_prime(&bp).is_none() {
            continue;
        }
        let g = g1(&bp, p, n)?;
        let e = frak_e1(&bp, p, n);
        for (i, c) in g.iter().enumerate() {
            let coef = ExtScalar::sqrt_pow(p, -(i as i64) * (n as i64 + 1)).scale(c);
            r.add_term(k as i32 - e as i32 + i as i32, coef);
        }
    }
    ft_cache().lock().unwrap().insert(key, r.clone());
    Ok(r)
}

/// beta + 1/beta = p^{(n+1-2k)/2} c_f(p).
pub fn satake_sum(p: u64, n: usize, k: usize, cf: &Q) -> ExtScalar {
    ExtScalar::sqrt_pow(p, n as i64 + 1 - 2 * k as i64).scale(cf)
}

/// F~ evaluated at the Satake parameter, as an element of Q(sqrt p).
pub fn ftilde_eval_raw(f: &SymLaurent, p: u64, n: usize, k: usize, cf: &Q) -> ExtScalar {
    f.eval_symmetric(&satake_sum(p, n, k, cf))
}

/// p^{e(2k-n-1)/2} F~^(1)_p(B, beta_p), which is rational.
pub fn ftilde_eval_satake(b: &QMat, p: u64, n: usize, k: usize, cf: &Q) -> Result<Q, SeriesError> {
    let f = ftilde1(b, p, n)?;
    let e = frak_e1(b, p, n);
    let v = ftilde_eval_raw(&f, p, n, k, cf);
    let w = &v * &ExtScalar::sqrt_pow(p, e * (2 * k as i64 - n as i64 - 1));
    Ok(crate::exact_algebra::assert_rational(&w)?)
}

// ---------------------------------------------------------------------------
// P and K

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalSeriesParams {
    pub n: usize,
    pub p: u64,
    #[serde(serialize_with = "ser_q")]
    pub d0: Q,
    pub l: u8,
    pub order: i32,
}

fn ser_q<S: serde::Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&crate::exact_algebra::qstr(x))
}

fn t_shift(n: usize, p: u64) -> i32 {
    if p == 2 {
        2 - n as i32
    } else {
        0
    }
}

type ClassListKey = (usize, u64, i64, bool);

fn class_cache() -> &'static Mutex<HashMap<ClassListKey, std::sync::Arc<Vec<QMat>>>> {
    static C: OnceLock<Mutex<HashMap<ClassListKey, std::sync::Arc<Vec<QMat>>>>> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Cached class list of degree m with det valuation <= v, optionally restricted to L'.
pub fn classes(m: usize, p: u64, v: i64, lprime: bool) -> std::sync::Arc<Vec<QMat>> {
    let key = (m, p, v, lprime);
    if let Some(c) = class_cache().lock().unwrap().get(&key) {
        return c.clone();
    }
    let mut cl = enumerate_padic_classes(m, p, v);
    if lprime && p == 2 {
        cl.retain(|a| in_l_prime(a).is_some());
    }
    let arc = std::sync::Arc::new(cl);
    class_cache().lock().unwrap().insert(key, arc.clone());
    arc
}

fn lprime_d0_classes(pr: &LocalSeriesParams) -> Vec<QMat> {
    let shift = t_shift(pr.n, pr.p);
    let cl = classes(pr.n - 1, pr.p, (pr.order - shift) as i64, true);
    let s = sign_half(pr.n);
    cl.iter()
        .filter(|a| same_square_class(&(&s * det(a)), &pr.d0, pr.p))
        .filter(|a| val(&det(a), pr.p) as i32 + shift <= pr.order)
        .cloned()
        .collect()
}

fn weight(a: &QMat, pr: &LocalSeriesParams) -> Q {
    let w = if pr.l == 1 { q(hasse(a, pr.p).unwrap() as i64) } else { q(1) };
    w / alpha(a, pr.p) / kappa(&pr.d0, pr.n, pr.l, pr.p)
}

/// Class-sum definition of P^(1)_{n-1,p}(d_0, eps^l, X, t).
pub fn p1_series(pr: &LocalSeriesParams) -> Result<TruncSeries, SeriesError> {
    let shift = t_shift(pr.n, pr.p);
    let cl = lprime_d0_classes(pr);
    let parts: Vec<Result<TruncSeries, SeriesError>> = cl
        .par_iter()
        .map(|a| {
            let ft = ftilde1(a, pr.p, pr.n)?;
            let c = ExtScalar::rational(pr.p, weight(a, pr));
            let te = val(&det(a), pr.p) as i32 + shift;
            let mut s = TruncSeries::zero(pr.p, pr.order);
            for (xe, v) in &ft.coeffs {
                s.add_term(te, *xe, v * &c);
            }
            Ok(s)
        })
        .collect();
    let mut r = TruncSeries::zero(pr.p, pr.order);
    for s in parts {
        r = r.add(&s?);
    }
    Ok(r)
}

fn expand_denominator(mut r: TruncSeries, facs: &[(Q, i32)], pr: &LocalSeriesParams) -> TruncSeries {
    for (c, xe) in facs {
        r = r.mul(&TruncSeries::geometric(pr.p, pr.order, ExtScalar::rational(pr.p, c.clone()), 2, *xe));
    }
    r
}

/// Closed rational form of P^(1), expanded to the truncation order.
pub fn p1_closed(pr: &LocalSeriesParams) -> TruncSeries {
    let p = pr.p;
    let n = pr.n as i64;
    let x0 = chi_p(&pr.d0, p);
    let nd = val(&pr.d0, p);
    let mut num = TruncSeries::monomial(p, pr.order, nd as i32, 0, ExtScalar::rational(p, qpow(p, -nd)));
    if x0 != 0 {
        let c = if pr.l == 0 { ExtScalar::sqrt_pow(p, -5) } else { ExtScalar::sqrt_pow(p, -1 - 2 * n) };
        let mut f = TruncSeries::one(p, pr.order);
        f.add_term(2, 0, c.scale(&q(-x0 as i64)));
        num = num.mul(&f);
    }
    let r = num.scale_q(&(q(1) / phi((n - 2) / 2, &qf(1, (p * p) as i64))));
    let mut facs = Vec::new();
    if pr.l == 0 {
        facs.push((qpow(p, -2), 1));
        facs.push((qpow(p, -2), -1));
        for i in 1..=(n - 2) / 2 {
            facs.push((qpow(p, -2 * i - 1), 1));
            facs.push((qpow(p, -2 * i - 1), -1));
        }
    } else {
        for i in 1..=n / 2 {
            facs.push((qpow(p, -2 * i), 1));
            facs.push((qpow(p, -2 * i), -1));
        }
    }
    expand_denominator(r, &facs, pr)
}

/// Class-sum definition of K^(1) (G in place of F~, with the X^{-e} twist).
pub fn k1_series(pr: &LocalSeriesParams) -> Result<TruncSeries, SeriesError> {
    let shift = t_shift(pr.n, pr.p);
    let p = pr.p;
    let mut r = TruncSeries::zero(p, pr.order);
    for a in lprime_d0_classes(pr) {
        let g = g1(&a, p, pr.n)?;
        let e = frak_e1(&a, p, pr.n);
        let c = weight(&a, pr);
        let te = val(&det(&a), p) as i32 + shift;
        for (i, gc) in g.iter().enumerate() {
            let v = ExtScalar::sqrt_pow(p, -(i as i64) * (pr.n as i64 + 1)).scale(&(gc * &c));
            r.add_term(te, i as i32 - e as i32, v);
        }
    }
    Ok(r)
}

/// P = prod_{i=1}^{n-1} (1 - t^2 X p^{i-n-1})^{-1} K, compared coefficientwise.
pub fn k_relation_check(pr: &LocalSeriesParams) -> Result<bool, SeriesError> {
    let mut k = k1_series(pr)?;
    let n = pr.n as i64;
    for i in 1..n {
        k = k.mul(&TruncSeries::geometric(pr.p, pr.order, ExtScalar::rational(pr.p, qpow(pr.p, i - n - 1)), 2, 1));
    }
    Ok(p1_series(pr)?.eq_trunc(&k))
}

pub fn p_closed_check(pr: &LocalSeriesParams) -> Result<bool, SeriesError> {
    Ok(p1_series(pr)?.eq_trunc(&p1_closed(pr)))
}

/// All (n, p, d_0, l) parameter sets of the local grid.
pub fn local_grid(order: i32) -> Vec<LocalSeriesParams> {
    let mut out = Vec::new();
    for n in [2usize, 4] {
        for p in [2u64, 3, 5] {
            for d0 in f_reps(p) {
                for l in [0u8, 1] {
                    out.push(LocalSeriesParams { n, p, d0: d0.clone(), l, order });
                }
            }
        }
    }
    out
}

/// F~(X) = F~(1/X) for every class of degree n-1 (in L' at p = 2) with
/// det valuation <= vmax. Returns the number of classes checked.
pub fn ftilde_symmetry_check(n: usize, p: u64, vmax: i64) -> Result<(usize, bool), SeriesError> {
    let cl = classes(n - 1, p, vmax, true);
    let res: Result<Vec<bool>, SeriesError> = cl.par_iter().map(|a| Ok(ftilde1(a, p, n)?.is_symmetric())).collect();
    let res = res?;
    Ok((res.len(), res.iter().all(|x| *x)))
}

/// The Satake value p^{e(2k-n-1)/2} F~(B, beta_p) is rational for every class of
/// the same grid, given c_f(p). Returns the number of classes checked.
pub fn satake_rationality_check(n: usize, p: u64, vmax: i64, k: usize, cf: &Q) -> (usize, bool) {
    let cl = classes(n - 1, p, vmax, true);
    let ok = cl.par_iter().all(|a| ftilde_eval_satake(a, p, n, k, cf).is_ok());
    (cl.len(), ok)
}

/// n = 4, iota, nu(d_0) = 0: the class sum times phi_1(p^-2) and its four
/// denominator factors is exactly the polynomial 1 - xi_0 p^{-5/2} t^2.
pub fn iota_numerator_check(p: u64, d0: &Q, order: i32) -> Result<bool, SeriesError> {
    assert_eq!(val(d0, p), 0);
    let pr = LocalSeriesParams { n: 4, p, d0: d0.clone(), l: 0, order };
    let mut s = p1_series(&pr)?.scale_q(&phi(1, &qf(1, (p * p) as i64)));
    for (e, xe) in [(-2, 1), (-2, -1), (-3, 1), (-3, -1)] {
        let mut f = TruncSeries::one(p, order);
        f.add_term(2, xe, ExtScalar::rational(p, -qpow(p, e)));
        s = s.mul(&f);
    }
    let mut want = TruncSeries::one(p, order);
    want.add_term(2, 0, ExtScalar::sqrt_pow(p, -5).scale(&q(-chi_p(d0, p) as i64)));
    Ok(s.eq_trunc(&want))
}

// ---------------------------------------------------------------------------
// rational power series helpers

pub fn ps_mul(a: &PSeries, b: &PSeries, order: i64) -> PSeries {
    let mut r = PSeries::new();
    for (i, x) in a {
        for (j, y) in b {
            if i + j <= order {
                *r.entry(i + j).or_insert_with(|| q(0)) += x * y;
            }
        }
    }
    r.retain(|_, v| *v != q(0));
    r
}

/// 1 / (1 - c u^e)
pub fn ps_geom(c: &Q, e: i64, order: i64) -> PSeries {
    let mut r = PSeries::new();
    let mut k = 0;
    let mut pw = q(1);
    while k * e <= order {
        r.insert(k * e, pw.clone());
        pw *= c;
        k += 1;
    }
    r
}

pub fn ps_scale(a: &PSeries, c: &Q) -> PSeries {
    a.iter().map(|(k, v)| (*k, v * c)).filter(|(_, v)| *v != q(0)).collect()
}

pub fn ps_eq(a: &PSeries, b: &PSeries) -> bool {
    let clean = |x: &PSeries| -> PSeries { x.iter().filter(|(_, v)| **v != q(0)).map(|(k, v)| (*k, v.clone())).collect() };
    clean(a) == clean(b)
}

fn ps_add(r: &mut PSeries, k: i64, v: Q) {
    let e = r.entry(k).or_insert_with(|| q(0));
    *e += v;
    if *e == q(0) {
        r.remove(&k);
    }
}

// ---------------------------------------------------------------------------
// zeta

/// (-1)^{[(m+1)/2]} det T lies in the square class of d.
pub fn in_det_class(t: &QMat, d: &Q, p: u64) -> bool {
    let m = t.len();
    let s = if ((m + 1) / 2) % 2 == 1 { q(-1) } else { q(1) };
    same_square_class(&(s * det(t)), d, p)
}

fn eps_weight(t: &QMat, l: u8, p: u64) -> Q {
    let w = if l == 1 && !t.is_empty() { q(hasse(t, p).unwrap() as i64) } else { q(1) };
    w / alpha(t, p)
}

/// zeta_m(d_0, eps^l, u) (or zeta*_m when `even_only`), as a class sum.
pub fn zeta_series(m: usize, d0: &Q, l: u8, p: u64, order: i64, even_only: bool) -> PSeries {
    if m == 0 {
        let mut r = PSeries::new();
        if val(d0, p) == 0 {
            r.insert(0, q(1));
        }
        return r;
    }
    let mut r = PSeries::new();
    for t in classes(m, p, order, false).iter() {
        if even_only && !is_even(t) {
            continue;
        }
        if !in_det_class(t, d0, p) {
            continue;
        }
        ps_add(&mut r, val(&det(t), p), eps_weight(t, l, p));
    }
    r
}

/// The closed forms for zeta at odd p.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ZetaKind {
    /// zeta_{2r+1}(p d_0, iota)
    OddUnitIota,
    /// zeta_{2r}(d_0 d, iota), d_0 a unit
    EvenUnitIota,
    /// zeta_{2r+1}(d_0 / p, iota)
    OddRamIota,
    /// zeta_{2r}(d_0 d, iota), d_0 in p Z_p^x
    EvenRamIota,
    /// zeta_{2r}(d_0 d, eps)
    EvenUnitEps,
    /// zeta_{2r+1}(p d_0, eps)
    OddUnitEps,
    /// zeta_{2r+1}(d_0 / p, eps)
    OddRamEps,
}

pub fn zeta_closed(kind: ZetaKind, r: i64, p: u64, xi: i64, order: i64) -> PSeries {
    let qq = qf(1, (p * p) as i64);
    let iota_den = |mut s: PSeries| {
        s = ps_mul(&s, &ps_geom(&qq, 2, order), order);
        for i in 1..=r {
            s = ps_mul(&s, &ps_geom(&qpow(p, 2 * i - 3 - 2 * r), 2, order), order);
        }
        s
    };
    let eps_den = |mut s: PSeries, top: i64| {
        for i in 1..=top {
            s = ps_mul(&s, &ps_geom(&qpow(p, -2 * i), 2, order), order);
        }
        s
    };
    let one = |k: i64, v: Q| -> PSeries { [(k, v)].into_iter().collect() };
    let lead = q(1) + q(xi) * qpow(p, -r);
    match kind {
        ZetaKind::OddUnitIota => iota_den(one(1, qf(1, p as i64) / phi(r, &qq))),
        ZetaKind::EvenUnitIota => {
            let mut s = one(0, &lead / phi(r, &qq));
            s.insert(2, -(&lead * q(xi) * qpow(p, -r - 2)) / phi(r, &qq));
            iota_den(s)
        }
        ZetaKind::OddRamIota => iota_den(one(0, q(1) / phi(r, &qq))),
        ZetaKind::EvenRamIota => iota_den(one(1, qf(1, p as i64) / phi(r - 1, &qq))),
        ZetaKind::EvenUnitEps => eps_den(one(0, &lead / phi(r, &qq)), r),
        ZetaKind::OddUnitEps => eps_den(one(1, qpow(p, -r - 1) / phi(r, &qq)), r + 1),
        ZetaKind::OddRamEps => eps_den(one(0, q(1) / phi(r, &qq)), r + 1),
    }
}

/// eta_m = ((-1)^{(m+1)/2}, p)_p for odd m, 1 otherwise.
pub fn eta_m(m: usize, p: u64) -> i64 {
    if m % 2 == 0 {
        return 1;
    }
    let s = if ((m + 1) / 2) % 2 == 1 { q(-1) } else { q(1) };
    hilbert(&s, &q(p as i64), p) as i64
}

/// The unit-class parametrization: Z_m(w, eps^l, d) sums over classes with
/// det T ≡ p^i d modulo unit squares, weighted by 2^{-delta m} eps^l / alpha (eta^l p^{(m+1)/2} w)^i.
/// Returns 2^{delta m} Z_{m, x(nu(d_0))} at w = p^{-(m+1)/2} c u, with c = eta_m for odd p,
/// odd m and l = 1, and c = 1 otherwise.
pub fn zeta_via_unit_classes(m: usize, d0: &Q, l: u8, p: u64, order: i64, even_only: bool) -> PSeries {
    let nu0 = val(d0, p);
    let sgn = if ((m + 1) / 2) % 2 == 1 { q(-1) } else { q(1) };
    let d = sgn * qpow(p, -nu0) * d0;
    let eta = if l == 1 { eta_m(m, p) } else { 1 };
    let c = if p != 2 && m % 2 == 1 && l == 1 { eta_m(m, p) } else { 1 };
    let two_m = if p == 2 { qpow(2, m as i64) } else { q(1) };
    let mut z = PSeries::new();
    for t in classes(m, p, order, false).iter() {
        if even_only && !is_even(t) {
            continue;
        }
        let dt = det(t);
        let i = val(&dt, p);
        if !same_square_class(&(&dt / qpow(p, i)), &d, p) {
            continue;
        }
        let w = if l == 1 { q(hasse(t, p).unwrap() as i64) } else { q(1) };
        let sign = if (eta * c == -1) && i % 2 == 1 { q(-1) } else { q(1) };
        ps_add(&mut z, i, w / alpha(t, p) / &two_m * sign);
    }
    z.retain(|i, _| (i - nu0).rem_euclid(2) == 0);
    ps_scale(&z, &two_m)
}

/// Named check results for the zeta closed forms (odd p) and the conversion identity (all p).
pub fn zeta_checks(order: i64) -> Vec<(String, bool)> {
    let mut out = Vec::new();
    for p in [3u64, 5] {
        let nr = least_nonresidue(p);
        let pi = p as i64;
        for d0 in [1i64, nr] {
            let xi0 = chi_p(&q(d0), p) as i64;
            for r in 0..=2i64 {
                let m = (2 * r + 1) as usize;
                let z = zeta_series(m, &q(pi * d0), 0, p, order, false);
                out.push((format!("p={p} d0={d0} m={m} odd-unit-iota"), ps_eq(&z, &zeta_closed(ZetaKind::OddUnitIota, r, p, 0, order))));
                let z = zeta_series(m, &q(pi * d0), 1, p, order, false);
                let c = ps_scale(&zeta_closed(ZetaKind::OddUnitEps, r, p, 0, order), &q(eta_m(m, p)));
                out.push((format!("p={p} d0={d0} m={m} odd-unit-eps"), ps_eq(&z, &c)));
            }
            for r in 1..=2i64 {
                let m = (2 * r) as usize;
                for d in [1i64, nr] {
                    let xi = xi0 * chi_p(&q(d), p) as i64;
                    let z = zeta_series(m, &q(d0 * d), 0, p, order, false);
                    out.push((format!("p={p} d0={d0} d={d} m={m} even-unit-iota"), ps_eq(&z, &zeta_closed(ZetaKind::EvenUnitIota, r, p, xi, order))));
                    let z = zeta_series(m, &q(d0 * d), 1, p, order, false);
                    out.push((format!("p={p} d0={d0} d={d} m={m} even-unit-eps"), ps_eq(&z, &zeta_closed(ZetaKind::EvenUnitEps, r, p, xi, order))));
                }
            }
        }
        for d0 in [pi, pi * nr] {
            for r in 0..=2i64 {
                let m = (2 * r + 1) as usize;
                let dq = qf(d0, pi);
                let z = zeta_series(m, &dq, 0, p, order, false);
                out.push((format!("p={p} d0={d0} m={m} odd-ram-iota"), ps_eq(&z, &zeta_closed(ZetaKind::OddRamIota, r, p, 0, order))));
                let z = zeta_series(m, &dq, 1, p, order, false);
                out.push((format!("p={p} d0={d0} m={m} odd-ram-eps"), ps_eq(&z, &zeta_closed(ZetaKind::OddRamEps, r, p, 0, order))));
            }
            for r in 1..=2i64 {
                let m = (2 * r) as usize;
                for d in [1i64, nr] {
                    let z = zeta_series(m, &q(d0 * d), 0, p, order, false);
                    out.push((format!("p={p} d0={d0} d={d} m={m} even-ram-iota"), ps_eq(&z, &zeta_closed(ZetaKind::EvenRamIota, r, p, 0, order))));
                }
            }
        }
    }
    for p in [2u64, 3, 5] {
        for m in 1..=5usize {
            let even_only = p == 2 && m % 2 == 0;
            for d0 in f_reps(p) {
                for l in [0u8, 1] {
                    let a = zeta_series(m, &d0, l, p, order, even_only);
                    let b = zeta_via_unit_classes(m, &d0, l, p, order, even_only);
                    out.push((format!("p={p} m={m} d0={} l={l} conversion", crate::exact_algebra::qstr(&d0)), ps_eq(&a, &b)));
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Q series with constant H

fn unit_reps(p: u64) -> Vec<i64> {
    if p == 2 {
        vec![1, 5]
    } else {
        vec![1, least_nonresidue(p)]
    }
}

fn theta_blocks(l: usize, d: i64, p: u64) -> Vec<QMat> {
    if l == 0 {
        return vec![];
    }
    vec![theta_standard(l, d, p).expect("valid Theta")]
}

fn sum_items(items: &[QMat], l: u8, p: u64, tshift: i64, order: i64) -> PSeries {
    let mut r = PSeries::new();
    for m in items {
        let e = val(&det(m), p) + tshift;
        if e <= order {
            ps_add(&mut r, e, eps_weight(m, l, p));
        }
    }
    r
}

fn sc(m: &QMat, s: i64) -> QMat {
    scaled(m, &q(s))
}

fn kappa0_2(d0: &Q, m: usize, l: u8) -> Q {
    if l == 0 {
        return q(1);
    }
    let s = if (m * (m + 2) / 8) % 2 == 1 { -1 } else { 1 };
    q(s * hilbert(&(sign_half(m) * q(2)), d0, 2) as i64)
}

fn cls(m: usize, p: u64, order: i64) -> std::sync::Arc<Vec<QMat>> {
    classes(m, p, order, false)
}

/// Q^(1)(d_0, 1, 2r+1, eps^l, t)
pub fn q1_odd(d0: &Q, m: usize, r: usize, l: u8, p: u64, order: i64) -> PSeries {
    let mut items = Vec::new();
    if p != 2 {
        let ds = if m > 2 * r + 2 { unit_reps(p) } else { vec![1] };
        for d in ds {
            for b in cls(2 * r + 1, p, order).iter() {
                let pb = sc(b, p as i64);
                if !in_det_class(&pb, &(d0 * q(d)), p) {
                    continue;
                }
                let mut bl = theta_blocks(m - 2 * r - 2, d, p);
                bl.push(pb);
                items.push(block_diag(&bl));
            }
        }
        return ps_scale(&sum_items(&items, l, p, 0, order), &(q(1) / kappa(d0, m, l, p)));
    }
    let ds = if m > 2 * r + 2 { unit_reps(2) } else { vec![1] };
    for d in ds {
        for b in cls(2 * r + 1, 2, order).iter() {
            if !is_even(b) || !in_det_class(b, &(d0 * q(d)), 2) {
                continue;
            }
            let mut bl: Vec<QMat> = theta_blocks(m - 2 * r - 2, d, 2).iter().map(|x| sc(x, 2)).collect();
            bl.push(sc(b, 4));
            items.push(block_diag(&bl));
        }
    }
    for b in cls(2 * r + 1, 2, order).iter() {
        if is_even(b) || !in_det_class(b, d0, 2) {
            continue;
        }
        let mut bl: Vec<QMat> = theta_blocks(m - 2 * r - 2, 1, 2).iter().map(|x| sc(x, 2)).collect();
        bl.push(sc(b, 4));
        items.push(block_diag(&bl));
    }
    if m >= 2 * r + 4 {
        for b in cls(2 * r + 2, 2, order).iter() {
            if is_even(b) || !in_det_class(b, d0, 2) {
                continue;
            }
            let mut bl = vec![qmat(&[&[-1]])];
            bl.extend(theta_blocks(m - 2 * r - 4, 1, 2).iter().map(|x| sc(x, 2)));
            bl.push(sc(b, 4));
            items.push(block_diag(&bl));
        }
    }
    ps_scale(&sum_items(&items, l, 2, 2 - m as i64, order), &(q(1) / kappa(d0, m, l, 2)))
}

/// Q^(1)(d_0, d, 2r, eps^l, t)
pub fn q1_even(d0: &Q, d: i64, m: usize, r: usize, l: u8, p: u64, order: i64) -> PSeries {
    let mut items = Vec::new();
    for b in cls(2 * r, p, order).iter() {
        if p == 2 && !is_even(b) {
            continue;
        }
        if !in_det_class(b, &(d0 * q(d)), p) {
            continue;
        }
        let bl = if p != 2 {
            let mut v = theta_blocks(m - 2 * r - 1, d, p);
            v.push(sc(b, p as i64));
            v
        } else {
            let mut v = vec![qmat(&[&[-d]])];
            v.extend(theta_blocks(m - 2 * r - 2, 1, 2).iter().map(|x| sc(x, 2)));
            v.push(sc(b, 4));
            v
        };
        items.push(block_diag(&bl));
    }
    let shift = if p == 2 { 2 - m as i64 } else { 0 };
    ps_scale(&sum_items(&items, l, p, shift, order), &(q(1) / kappa(d0, m, l, p)))
}

/// Q^(0)(d_0, d, 2r, eps^l, t)
pub fn q0_even(d0: &Q, d: i64, m: usize, r: usize, l: u8, p: u64, order: i64) -> PSeries {
    let mut items = Vec::new();
    for b in cls(2 * r, p, order).iter() {
        if p == 2 && !is_even(b) {
            continue;
        }
        if !in_det_class(b, &(d0 * q(d)), p) {
            continue;
        }
        let mut v = theta_blocks(m - 2 * r, d, p);
        v.push(sc(b, if p == 2 { 2 } else { p as i64 }));
        items.push(block_diag(&v));
    }
    let s = sum_items(&items, l, p, 0, order);
    if p == 2 {
        ps_scale(&s, &(q(1) / kappa0_2(d0, m, l)))
    } else {
        s
    }
}

/// Q^(0)(d_0, 2r+1, eps^l, t)
pub fn q0_odd(d0: &Q, m: usize, r: usize, l: u8, p: u64, order: i64) -> PSeries {
    let mut items = Vec::new();
    if p != 2 {
        for d in unit_reps(p) {
            for b in cls(2 * r + 1, p, order).iter() {
                let pb = sc(b, p as i64);
                if !in_det_class(&pb, &(d0 * q(d)), p) {
                    continue;
                }
                let mut v: Vec<QMat> = theta_blocks(m - 2 * r - 1, d, p).iter().map(|x| sc(x, -1)).collect();
                v.push(pb);
                items.push(block_diag(&v));
            }
        }
        return sum_items(&items, l, p, 0, order);
    }
    for b in cls(2 * r + 2, 2, order).iter() {
        if is_even(b) || !in_det_class(b, d0, 2) {
            continue;
        }
        let mut v = theta_blocks(m - 2 * r - 2, 1, 2);
        v.push(sc(b, 2));
        items.push(block_diag(&v));
    }
    ps_scale(&sum_items(&items, l, 2, 0, order), &(q(1) / kappa0_2(d0, m, l)))
}

/// The reduction identities for Q with constant H on degree m, as named results.
pub fn q_reduction_checks(m: usize, p: u64, order: i64) -> Vec<(String, bool)> {
    let mut out = Vec::new();
    let qq = qf(1, (p * p) as i64);
    let chi_u = |d: i64| if d == 1 { 1 } else { -1 };
    for d0 in f_reps(p) {
        let nd = val(&d0, p);
        let tag = crate::exact_algebra::qstr(&d0);
        for l in [0u8, 1] {
            let vanish = l == 1 && nd > 0;
            for r in [0usize, 1] {
                let lhs = q0_odd(&d0, m, r, l, p, order);
                let rhs = if vanish {
                    PSeries::new()
                } else {
                    ps_scale(&q1_odd(&d0, 2 * r + 2, r, l, p, order), &(q(1) / phi(((m - 2 * r - 2) / 2) as i64, &qq)))
                };
                out.push((format!("p={p} d0={tag} l={l} r={r} Q0-odd"), ps_eq(&lhs, &rhs)));
                let lhs = q1_odd(&d0, m, r, l, p, order);
                let rhs = ps_scale(&q1_odd(&d0, 2 * r + 2, r, l, p, order), &(q(1) / phi(((m - 2 * r - 2) / 2) as i64, &qq)));
                out.push((format!("p={p} d0={tag} l={l} r={r} Q1-odd"), ps_eq(&lhs, &rhs)));
            }
            for r in [1usize, 2] {
                let ds = if m == 2 * r { vec![1] } else { unit_reps(p) };
                for d in ds {
                    let lhs = q0_even(&d0, d, m, r, l, p, order);
                    let rhs = if vanish {
                        PSeries::new()
                    } else {
                        let c = (q(1) + qpow(p, -(((m - 2 * r) / 2) as i64)) * q(chi_u(d))) / (q(2) * phi(((m - 2 * r) / 2) as i64, &qq));
                        ps_scale(&q0_even(&(&d0 * q(d)), 1, 2 * r, r, l, p, order), &c)
                    };
                    out.push((format!("p={p} d0={tag} l={l} r={r} d={d} Q0-even"), ps_eq(&lhs, &rhs)));
                }
            }
            let r = 1usize;
            for d in unit_reps(p) {
                let lhs = q1_even(&d0, d, m, r, l, p, order);
                let rhs = if vanish {
                    PSeries::new()
                } else {
                    let c = q(1) / (q(2) * phi(((m - 2 * r - 2) / 2) as i64, &qq));
                    ps_scale(&q0_even(&(&d0 * q(d)), 1, 2 * r, r, l, p, order), &c)
                };
                out.push((format!("p={p} d0={tag} l={l} r={r} d={d} Q1-even"), ps_eq(&lhs, &rhs)));
            }
        }
    }
    out
}

/// Q^(1) for rank 0 is the indicator of d = d_0.
pub fn q1_rank0(d0: &Q, d: &Q, p: u64) -> Q {
    if same_square_class(d0, d, p) {
        q(1)
    } else {
        q(0)
    }
}
