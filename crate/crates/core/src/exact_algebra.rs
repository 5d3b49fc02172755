//! Exact scalars, Laurent polynomials, truncated power series and Dirichlet
//! coefficient tables.
//!
//! Everything here is exact: rationals are `BigRational`, and the only
//! irrationality ever needed is a single `sqrt(p)` per local computation.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};
use thiserror::Error;

pub type Q = BigRational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("cannot combine scalars over Q(sqrt {0}) and Q(sqrt {1})")]
    PrimeMismatch(u64, u64),
    #[error("irrational residue: sqrt-part {0} is nonzero")]
    IrrationalResidue(String),
    #[error("series constant term is not a unit")]
    NonUnitConstant,
    #[error("division by zero")]
    DivisionByZero,
}

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qbig(n: BigInt) -> Q {
    Q::from_integer(n)
}

/// `p^e` for any integer `e`.
pub fn qpow(p: u64, e: i64) -> Q {
    let base = BigInt::from(p).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        Q::from_integer(base)
    } else {
        Q::new(BigInt::one(), base)
    }
}

/// Serialize as `"num/den"`.
pub fn qstr(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Q::new(n, d))
        }
        None => Some(Q::from_integer(s.parse().ok()?)),
    }
}

/// phi_r(x) = prod_{i=1}^r (1 - x^i).
pub fn phi(r: i64, x: &Q) -> Q {
    let mut v = Q::one();
    let mut xi = Q::one();
    for _ in 0..r.max(0) {
        xi = &xi * x;
        v *= Q::one() - &xi;
    }
    v
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// Bernoulli numbers B_0..B_n with B_1 = -1/2.
pub fn bernoulli_table(n: usize) -> Vec<Q> {
    let mut b = vec![Q::zero(); n + 1];
    b[0] = Q::one();
    for m in 1..=n {
        let mut s = Q::zero();
        for (j, bj) in b.iter().enumerate().take(m) {
            s += Q::from_integer(binomial(m + 1, j)) * bj;
        }
        b[m] = -s / q(m as i64 + 1);
    }
    b
}

static BERNOULLI: OnceLock<Vec<Q>> = OnceLock::new();

pub fn bernoulli(n: usize) -> Q {
    let t = BERNOULLI.get_or_init(|| bernoulli_table(80));
    if n < t.len() {
        t[n].clone()
    } else {
        bernoulli_table(n)[n].clone()
    }
}

/// Bernoulli polynomial B_r(x).
pub fn bernoulli_poly(r: usize, x: &Q) -> Q {
    let mut s = Q::zero();
    let mut xp = Q::one();
    // sum_j C(r,j) B_j x^{r-j}, accumulated from j = r downwards
    for j in (0..=r).rev() {
        s += Q::from_integer(binomial(r, j)) * bernoulli(j) * &xp;
        xp = &xp * x;
    }
    s
}

/// Gamma_C(2i) zeta(2i) = (-1)^{i+1} B_{2i} / (2i).
pub fn xi_tilde(two_i: usize) -> Q {
    let i = two_i / 2;
    let sign = if i % 2 == 1 { q(1) } else { q(-1) };
    sign * bernoulli(two_i) / q(two_i as i64)
}

// ---------------------------------------------------------------------------
// Q(sqrt p)

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExtScalar {
    pub p: u64,
    pub a: Q,
    pub b: Q,
}

impl fmt::Debug for ExtScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else {
            write!(f, "({} + {}*sqrt{})", self.a, self.b, self.p)
        }
    }
}

impl ExtScalar {
    pub fn new(p: u64, a: Q, b: Q) -> Self {
        ExtScalar { p, a, b }
    }
    pub fn rational(p: u64, a: Q) -> Self {
        ExtScalar { p, a, b: Q::zero() }
    }
    pub fn zero(p: u64) -> Self {
        Self::rational(p, Q::zero())
    }
    pub fn one(p: u64) -> Self {
        Self::rational(p, Q::one())
    }
    /// p^{k/2}.
    pub fn sqrt_pow(p: u64, k: i64) -> Self {
        if k.rem_euclid(2) == 0 {
            Self::rational(p, qpow(p, k / 2))
        } else {
            Self::new(p, Q::zero(), qpow(p, (k - 1).div_euclid(2)))
        }
    }
    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
    pub fn scale(&self, c: &Q) -> Self {
        Self::new(self.p, &self.a * c, &self.b * c)
    }
    /// a^2 - p b^2
    pub fn norm(&self) -> Q {
        &self.a * &self.a - &self.b * &self.b * q(self.p as i64)
    }
    pub fn inv(&self) -> Result<Self, AlgebraError> {
        let n = self.norm();
        if n.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        Ok(Self::new(self.p, &self.a / &n, -&self.b / &n))
    }
    pub fn to_json(&self) -> Value {
        json!({"p": self.p, "a": qstr(&self.a), "b": qstr(&self.b)})
    }
}

pub fn ext_mul(x: &ExtScalar, y: &ExtScalar) -> Result<ExtScalar, AlgebraError> {
    if x.p != y.p {
        return Err(AlgebraError::PrimeMismatch(x.p, y.p));
    }
    let p = q(x.p as i64);
    Ok(ExtScalar::new(
        x.p,
        &x.a * &y.a + &x.b * &y.b * p,
        &x.a * &y.b + &x.b * &y.a,
    ))
}

pub fn ext_add(x: &ExtScalar, y: &ExtScalar) -> Result<ExtScalar, AlgebraError> {
    if x.p != y.p {
        return Err(AlgebraError::PrimeMismatch(x.p, y.p));
    }
    Ok(ExtScalar::new(x.p, &x.a + &y.a, &x.b + &y.b))
}

pub fn assert_rational(x: &ExtScalar) -> Result<Q, AlgebraError> {
    if x.b.is_zero() {
        Ok(x.a.clone())
    } else {
        Err(AlgebraError::IrrationalResidue(qstr(&x.b)))
    }
}

impl<'a> Add<&'a ExtScalar> for &'a ExtScalar {
    type Output = ExtScalar;
    fn add(self, o: &ExtScalar) -> ExtScalar {
        ext_add(self, o).expect("prime mismatch")
    }
}
impl<'a> Sub<&'a ExtScalar> for &'a ExtScalar {
    type Output = ExtScalar;
    fn sub(self, o: &ExtScalar) -> ExtScalar {
        assert_eq!(self.p, o.p, "prime mismatch");
        ExtScalar::new(self.p, &self.a - &o.a, &self.b - &o.b)
    }
}
impl<'a> Mul<&'a ExtScalar> for &'a ExtScalar {
    type Output = ExtScalar;
    fn mul(self, o: &ExtScalar) -> ExtScalar {
        ext_mul(self, o).expect("prime mismatch")
    }
}
impl Neg for &ExtScalar {
    type Output = ExtScalar;
    fn neg(self) -> ExtScalar {
        ExtScalar::new(self.p, -&self.a, -&self.b)
    }
}

// ---------------------------------------------------------------------------
// Laurent polynomials in X over Q(sqrt p)

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SymLaurent {
    pub p: u64,
    pub coeffs: BTreeMap<i32, ExtScalar>,
}

impl SymLaurent {
    pub fn zero(p: u64) -> Self {
        SymLaurent { p, coeffs: BTreeMap::new() }
    }
    pub fn constant(c: ExtScalar) -> Self {
        let mut s = Self::zero(c.p);
        s.add_term(0, c);
        s
    }
    pub fn monomial(e: i32, c: ExtScalar) -> Self {
        let mut s = Self::zero(c.p);
        s.add_term(e, c);
        s
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    pub fn add_term(&mut self, e: i32, c: ExtScalar) {
        if c.is_zero() {
            return;
        }
        let done = match self.coeffs.get_mut(&e) {
            Some(v) => {
                *v = &*v + &c;
                v.is_zero()
            }
            None => {
                self.coeffs.insert(e, c);
                false
            }
        };
        if done {
            self.coeffs.remove(&e);
        }
    }
    pub fn add(&self, o: &SymLaurent) -> SymLaurent {
        let mut r = self.clone();
        for (e, c) in &o.coeffs {
            r.add_term(*e, c.clone());
        }
        r
    }
    pub fn sub(&self, o: &SymLaurent) -> SymLaurent {
        let mut r = self.clone();
        for (e, c) in &o.coeffs {
            r.add_term(*e, -c);
        }
        r
    }
    pub fn mul(&self, o: &SymLaurent) -> SymLaurent {
        let mut r = SymLaurent::zero(self.p);
        for (e1, c1) in &self.coeffs {
            for (e2, c2) in &o.coeffs {
                r.add_term(e1 + e2, c1 * c2);
            }
        }
        r
    }
    pub fn scale(&self, c: &ExtScalar) -> SymLaurent {
        let mut r = SymLaurent::zero(self.p);
        for (e, v) in &self.coeffs {
            r.add_term(*e, v * c);
        }
        r
    }
    pub fn coeff(&self, e: i32) -> ExtScalar {
        self.coeffs.get(&e).cloned().unwrap_or_else(|| ExtScalar::zero(self.p))
    }
    /// f(X) == f(X^{-1})
    pub fn is_symmetric(&self) -> bool {
        self.coeffs.iter().all(|(e, c)| self.coeff(-e) == *c)
    }
    /// Evaluate a symmetric Laurent polynomial at X = beta, given s = beta + 1/beta.
    /// Uses X^j + X^{-j} = V_j(s), V_0 = 2, V_1 = s, V_{j+1} = s V_j - V_{j-1}.
    pub fn eval_symmetric(&self, s: &ExtScalar) -> ExtScalar {
        debug_assert!(self.is_symmetric());
        let jmax = self.coeffs.keys().copied().max().unwrap_or(0).max(0) as usize;
        let mut v = vec![ExtScalar::rational(self.p, q(2)), s.clone()];
        for j in 2..=jmax {
            let next = &(s * &v[j - 1]) - &v[j - 2];
            v.push(next);
        }
        let mut r = ExtScalar::zero(self.p);
        for (e, c) in &self.coeffs {
            if *e == 0 {
                r = &r + c;
            } else if *e > 0 {
                r = &r + &(c * &v[*e as usize]);
            }
        }
        r
    }
    pub fn to_json(&self) -> Value {
        let m: serde_json::Map<String, Value> = self
            .coeffs
            .iter()
            .map(|(e, c)| (e.to_string(), c.to_json()))
            .collect();
        Value::Object(m)
    }
}

// ---------------------------------------------------------------------------
// Truncated power series in t with SymLaurent coefficients

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TruncSeries {
    pub p: u64,
    /// Largest t-exponent kept.
    pub order: i32,
    pub coeffs: BTreeMap<i32, SymLaurent>,
}

impl TruncSeries {
    pub fn zero(p: u64, order: i32) -> Self {
        TruncSeries { p, order, coeffs: BTreeMap::new() }
    }
    pub fn one(p: u64, order: i32) -> Self {
        Self::monomial(p, order, 0, 0, ExtScalar::one(p))
    }
    /// c t^te X^xe
    pub fn monomial(p: u64, order: i32, te: i32, xe: i32, c: ExtScalar) -> Self {
        let mut s = Self::zero(p, order);
        s.add_term(te, xe, c);
        s
    }
    pub fn add_term(&mut self, te: i32, xe: i32, c: ExtScalar) {
        if te > self.order || c.is_zero() {
            return;
        }
        let e = self.coeffs.entry(te).or_insert_with(|| SymLaurent::zero(self.p));
        e.add_term(xe, c);
        if e.is_zero() {
            self.coeffs.remove(&te);
        }
    }
    pub fn coeff(&self, te: i32) -> SymLaurent {
        self.coeffs.get(&te).cloned().unwrap_or_else(|| SymLaurent::zero(self.p))
    }
    pub fn min_exp(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }
    pub fn add(&self, o: &TruncSeries) -> TruncSeries {
        let mut r = TruncSeries::zero(self.p, self.order.min(o.order));
        for s in [self, o] {
            for (te, l) in &s.coeffs {
                for (xe, c) in &l.coeffs {
                    r.add_term(*te, *xe, c.clone());
                }
            }
        }
        r
    }
    pub fn sub(&self, o: &TruncSeries) -> TruncSeries {
        self.add(&o.scale(&ExtScalar::rational(self.p, q(-1))))
    }
    pub fn scale(&self, c: &ExtScalar) -> TruncSeries {
        let mut r = TruncSeries::zero(self.p, self.order);
        for (te, l) in &self.coeffs {
            let v = l.scale(c);
            if !v.is_zero() {
                r.coeffs.insert(*te, v);
            }
        }
        r
    }
    pub fn scale_q(&self, c: &Q) -> TruncSeries {
        self.scale(&ExtScalar::rational(self.p, c.clone()))
    }
    /// Cauchy product. The result order accounts for the lowest exponent of each factor.
    pub fn mul(&self, o: &TruncSeries) -> TruncSeries {
        let lo_a = self.min_exp().unwrap_or(0).min(0);
        let lo_b = o.min_exp().unwrap_or(0).min(0);
        let order = (self.order + lo_b).min(o.order + lo_a);
        let mut r = TruncSeries::zero(self.p, order);
        for (t1, l1) in &self.coeffs {
            for (t2, l2) in &o.coeffs {
                let te = t1 + t2;
                if te > order {
                    continue;
                }
                let prod = l1.mul(l2);
                for (xe, c) in prod.coeffs {
                    r.add_term(te, xe, c);
                }
            }
        }
        r
    }
    pub fn shift_t(&self, k: i32) -> TruncSeries {
        let mut r = TruncSeries::zero(self.p, self.order + k);
        for (te, l) in &self.coeffs {
            r.coeffs.insert(te + k, l.clone());
        }
        r
    }
    /// Multiplicative inverse. The constant term must be a single monomial c X^e
    /// with c invertible, and no negative t-powers may be present.
    pub fn inverse(&self) -> Result<TruncSeries, AlgebraError> {
        if self.min_exp().map(|e| e < 0).unwrap_or(true) {
            return Err(AlgebraError::NonUnitConstant);
        }
        let c0 = self.coeff(0);
        if c0.coeffs.len() != 1 {
            return Err(AlgebraError::NonUnitConstant);
        }
        let (&x0, c) = c0.coeffs.iter().next().unwrap();
        let cinv = c.inv().map_err(|_| AlgebraError::NonUnitConstant)?;
        let u0 = SymLaurent::monomial(-x0, cinv);
        // g = u0 * sum_k (-(f u0 - 1))^k, built by g_{j} = -u0 * sum_{i>=1} f_i g_{j-i}
        let mut g: BTreeMap<i32, SymLaurent> = BTreeMap::new();
        g.insert(0, u0.clone());
        for j in 1..=self.order {
            let mut acc = SymLaurent::zero(self.p);
            for i in 1..=j {
                if let (Some(fi), Some(gj)) = (self.coeffs.get(&i), g.get(&(j - i))) {
                    acc = acc.add(&fi.mul(gj));
                }
            }
            let gj = acc.mul(&u0).scale(&ExtScalar::rational(self.p, q(-1)));
            if !gj.is_zero() {
                g.insert(j, gj);
            }
        }
        Ok(TruncSeries { p: self.p, order: self.order, coeffs: g })
    }
    /// 1 / (1 - c t^te X^xe), te >= 1.
    pub fn geometric(p: u64, order: i32, c: ExtScalar, te: i32, xe: i32) -> TruncSeries {
        assert!(te >= 1);
        let mut r = TruncSeries::zero(p, order);
        let mut pow = ExtScalar::one(p);
        let mut k = 0;
        while k * te <= order {
            r.add_term(k * te, k * xe, pow.clone());
            pow = &pow * &c;
            k += 1;
        }
        r
    }
    /// Replace X by X^{-1}.
    pub fn invert_x(&self) -> TruncSeries {
        let mut r = TruncSeries::zero(self.p, self.order);
        for (te, l) in &self.coeffs {
            for (xe, c) in &l.coeffs {
                r.add_term(*te, -xe, c.clone());
            }
        }
        r
    }
    /// Equality of all coefficients up to min(order).
    pub fn eq_trunc(&self, o: &TruncSeries) -> bool {
        let ord = self.order.min(o.order);
        let keys: std::collections::BTreeSet<i32> =
            self.coeffs.keys().chain(o.coeffs.keys()).copied().filter(|k| *k <= ord).collect();
        keys.into_iter().all(|k| self.coeff(k) == o.coeff(k))
    }
    pub fn to_json(&self) -> Value {
        let m: serde_json::Map<String, Value> = self
            .coeffs
            .iter()
            .map(|(t, l)| (t.to_string(), l.to_json()))
            .collect();
        json!({"p": self.p, "order": self.order, "coeffs": Value::Object(m)})
    }
}

pub fn series_mul(f: &TruncSeries, g: &TruncSeries) -> Result<TruncSeries, AlgebraError> {
    if f.p != g.p {
        return Err(AlgebraError::PrimeMismatch(f.p, g.p));
    }
    Ok(f.mul(g))
}

pub fn series_inverse(f: &TruncSeries) -> Result<TruncSeries, AlgebraError> {
    f.inverse()
}

// ---------------------------------------------------------------------------
// Dirichlet coefficients

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DirichletCoeffs {
    pub n_max: u64,
    pub coeffs: BTreeMap<u64, Q>,
    pub prefactor: Vec<String>,
}

impl DirichletCoeffs {
    pub fn new(n_max: u64) -> Self {
        DirichletCoeffs { n_max, coeffs: BTreeMap::new(), prefactor: Vec::new() }
    }
    pub fn unit(n_max: u64) -> Self {
        let mut d = Self::new(n_max);
        d.set(1, Q::one());
        d
    }
    pub fn from_fn(n_max: u64, f: impl Fn(u64) -> Q) -> Self {
        let mut d = Self::new(n_max);
        for n in 1..=n_max {
            d.set(n, f(n));
        }
        d
    }
    pub fn get(&self, n: u64) -> Q {
        self.coeffs.get(&n).cloned().unwrap_or_else(Q::zero)
    }
    pub fn set(&mut self, n: u64, v: Q) {
        if n == 0 || n > self.n_max {
            return;
        }
        if v.is_zero() {
            self.coeffs.remove(&n);
        } else {
            self.coeffs.insert(n, v);
        }
    }
    pub fn add_at(&mut self, n: u64, v: &Q) {
        let cur = self.get(n);
        self.set(n, cur + v);
    }
    pub fn add(&self, o: &DirichletCoeffs) -> DirichletCoeffs {
        let mut r = self.clone();
        r.n_max = self.n_max.min(o.n_max);
        r.coeffs.retain(|n, _| *n <= r.n_max);
        for (n, v) in &o.coeffs {
            r.add_at(*n, v);
        }
        r
    }
    pub fn scale(&self, c: &Q) -> DirichletCoeffs {
        let mut r = DirichletCoeffs::new(self.n_max);
        r.prefactor = self.prefactor.clone();
        for (n, v) in &self.coeffs {
            r.set(*n, v * c);
        }
        r
    }
    pub fn to_json(&self) -> Value {
        let m: serde_json::Map<String, Value> =
            self.coeffs.iter().map(|(n, v)| (n.to_string(), Value::String(qstr(v)))).collect();
        json!({"n_max": self.n_max, "prefactor": self.prefactor, "coeffs": Value::Object(m)})
    }
}

pub fn dirichlet_mul(a: &DirichletCoeffs, b: &DirichletCoeffs) -> DirichletCoeffs {
    let n_max = a.n_max.min(b.n_max);
    let mut r = DirichletCoeffs::new(n_max);
    r.prefactor = a.prefactor.iter().chain(b.prefactor.iter()).cloned().collect();
    for (x, u) in &a.coeffs {
        for (y, v) in &b.coeffs {
            let n = x * y;
            if n > n_max {
                break;
            }
            r.add_at(n, &(u * v));
        }
    }
    r
}

/// Coefficients of L(s - a, .): c(N) N^a.
pub fn dirichlet_shift(a: &DirichletCoeffs, shift: i64) -> DirichletCoeffs {
    let mut r = DirichletCoeffs::new(a.n_max);
    r.prefactor = a.prefactor.clone();
    for (n, v) in &a.coeffs {
        r.set(*n, v * qpow(*n, shift));
    }
    r
}

/// Coefficients of L(2s, .): c'(N^2) = c(N).
pub fn dirichlet_double(a: &DirichletCoeffs, n_max: u64) -> DirichletCoeffs {
    let mut r = DirichletCoeffs::new(n_max);
    r.prefactor = a.prefactor.clone();
    for (n, v) in &a.coeffs {
        if n * n <= n_max {
            r.set(n * n, v.clone());
        }
    }
    r
}

/// Move the coefficient at N to 2^c N.
pub fn dirichlet_rescale2(a: &DirichletCoeffs, c: u32) -> DirichletCoeffs {
    let mut r = DirichletCoeffs::new(a.n_max);
    r.prefactor = a.prefactor.clone();
    let f = 1u64 << c;
    for (n, v) in &a.coeffs {
        r.set(n * f, v.clone());
    }
    r
}

/// A local factor sum_j c_j u^j (u = p^{-s}) as a Dirichlet series on powers of p.
/// `local` holds rational coefficients indexed by j >= 0.
pub fn euler_expand(local: &BTreeMap<i32, Q>, p: u64, n_max: u64) -> DirichletCoeffs {
    let mut r = DirichletCoeffs::new(n_max);
    for (j, c) in local {
        assert!(*j >= 0, "negative exponent in Euler factor");
        let idx = BigInt::from(p).pow(*j as u32);
        if let Some(i) = idx.to_u64() {
            if i <= n_max {
                r.set(i, c.clone());
            }
        }
    }
    r
}

/// Rational coefficients of a series in t with only X^0 terms.
pub fn rational_coeffs(s: &TruncSeries) -> Result<BTreeMap<i32, Q>, AlgebraError> {
    let mut out = BTreeMap::new();
    for (te, l) in &s.coeffs {
        for (xe, c) in &l.coeffs {
            if *xe != 0 {
                return Err(AlgebraError::IrrationalResidue(format!("X^{xe} term at t^{te}")));
            }
            out.insert(*te, assert_rational(c)?);
        }
    }
    Ok(out)
}

pub fn is_integer(x: &Q) -> bool {
    x.denom().is_one()
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn abs_q(x: &Q) -> Q {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ext_examples() {
        let s2 = ExtScalar::new(2, q(0), q(1));
        assert_eq!(&s2 * &s2, ExtScalar::rational(2, q(2)));
        let a = ExtScalar::new(3, q(1), q(1));
        let b = ExtScalar::new(3, q(1), q(-1));
        assert_eq!(&a * &b, ExtScalar::rational(3, q(-2)));
        assert!(ext_mul(&a, &s2).is_err());
        assert!(assert_rational(&s2).is_err());
        assert_eq!(assert_rational(&ExtScalar::rational(2, qf(5, 3))).unwrap(), qf(5, 3));
    }

    #[test]
    fn sqrt_pow_parity() {
        assert_eq!(ExtScalar::sqrt_pow(5, -3), ExtScalar::new(5, q(0), qf(1, 25)));
        assert_eq!(ExtScalar::sqrt_pow(5, 4), ExtScalar::rational(5, q(25)));
        let x = &ExtScalar::sqrt_pow(7, 3) * &ExtScalar::sqrt_pow(7, -1);
        assert_eq!(x, ExtScalar::rational(7, q(7)));
    }

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli(2), qf(1, 6));
        assert_eq!(bernoulli(12), qf(-691, 2730));
        assert_eq!(xi_tilde(2), qf(1, 12));
        assert_eq!(xi_tilde(4), qf(1, 120));
    }

    #[test]
    fn geometric_times_linear_is_one() {
        let p = 3;
        let c = ExtScalar::rational(p, qf(2, 9));
        let g = TruncSeries::geometric(p, 8, c.clone(), 2, 1);
        let mut lin = TruncSeries::one(p, 8);
        lin.add_term(2, 1, -&c);
        assert!(g.mul(&lin).eq_trunc(&TruncSeries::one(p, 8)));
        assert!(lin.inverse().unwrap().eq_trunc(&g));
    }

    #[test]
    fn divisor_count_from_zeta_square() {
        let z = DirichletCoeffs::from_fn(60, |_| q(1));
        let d = dirichlet_mul(&z, &z);
        for n in 1..=60u64 {
            let cnt = (1..=n).filter(|k| n % k == 0).count() as i64;
            assert_eq!(d.get(n), q(cnt));
        }
    }

    #[test]
    fn shifts_and_rescales() {
        let mut a = DirichletCoeffs::new(50);
        a.set(3, q(1));
        assert_eq!(dirichlet_double(&a, 50).coeffs.keys().copied().collect::<Vec<_>>(), vec![9]);
        assert_eq!(dirichlet_rescale2(&a, 2).coeffs.keys().copied().collect::<Vec<_>>(), vec![12]);
        let ones = DirichletCoeffs::from_fn(20, |_| q(1));
        let s = dirichlet_shift(&ones, 1);
        assert_eq!(s.get(17), q(17));
    }

    #[test]
    fn euler_expand_two_primes() {
        let geo: BTreeMap<i32, Q> = (0..10).map(|j| (j, q(1))).collect();
        let prod = dirichlet_mul(&euler_expand(&geo, 2, 100), &euler_expand(&geo, 3, 100));
        for n in 1..=100u64 {
            let mut m = n;
            while m % 2 == 0 {
                m /= 2;
            }
            while m % 3 == 0 {
                m /= 3;
            }
            assert_eq!(prod.get(n), if m == 1 { q(1) } else { q(0) });
        }
    }
}
