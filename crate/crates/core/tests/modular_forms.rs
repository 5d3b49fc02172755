use km_core::exact_algebra::{bernoulli, q, qbig, qf, qpow, ExtScalar, Q};
use km_core::km_pipeline::cross_checks;
use km_core::modular_forms::*;
use km_core::padic_forms::{is_fundamental, kronecker};
use num_bigint::BigInt;
use num_traits::Zero;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn multiplicative(f: &QExpansion) -> bool {
    let n = f.n_max();
    (2..=n).all(|a| (2..=n / a).all(|b| gcd(a, b) != 1 || f.coeff(a * b) == f.coeff(a) * f.coeff(b)))
}

#[test]
fn delta_and_eisenstein() {
    let d = delta_qexp(60);
    assert_eq!(d.coeff(1), q(1));
    assert_eq!(d.coeff(6), d.coeff(2) * d.coeff(3));
    assert!(multiplicative(&d));
    let e4 = eisenstein_qexp(4, 60).unwrap();
    let e8 = eisenstein_qexp(8, 60).unwrap();
    assert_eq!(e4.mul(&e4), e8);
    // E4^3 - E6^2 = 1728 Delta
    let e6 = eisenstein_qexp(6, 60).unwrap();
    let lhs = e4.mul(&e4).mul(&e4).sub(&e6.mul(&e6));
    assert_eq!(lhs, d.scale(&q(1728)));
    for w in CUSP_WEIGHTS {
        let f = cusp_eigenform(w, 40).unwrap();
        assert!(f.is_cusp());
        assert!(multiplicative(&f), "weight {w}");
    }
    let sig = QExpansion { weight: q(16), coeffs: (0..=40).map(|m| if m == 0 { q(0) } else { qbig(sigma(15, m)) }).collect() };
    assert!(multiplicative(&sig));
}

/// B_{r,chi} from power sums S(M) = sum_{t <= M a} chi(t) t^r, which is a
/// polynomial in M whose linear coefficient is a B_{r,chi}.
fn bernoulli_chi_oracle(r: u32, d: i64) -> Q {
    let a = d.unsigned_abs();
    let deg = r as usize + 1;
    let pts: Vec<(Q, Q)> = (1..=deg as u64 + 1)
        .map(|m| {
            let mut s = BigInt::zero();
            for t in 1..=m * a {
                let c = kronecker(d, t);
                if c != 0 {
                    s += BigInt::from(c) * BigInt::from(t).pow(r);
                }
            }
            (q(m as i64), qbig(s))
        })
        .collect();
    // polynomial through (0, 0) and pts; linear coefficient = P'(0) by Lagrange
    let mut xs = vec![q(0)];
    let mut ys = vec![q(0)];
    for (x, y) in pts {
        xs.push(x);
        ys.push(y);
    }
    let mut lin = q(0);
    for i in 0..xs.len() {
        // derivative at 0 of the i-th Lagrange basis polynomial
        let mut denom = q(1);
        for j in 0..xs.len() {
            if j != i {
                denom *= &xs[i] - &xs[j];
            }
        }
        let mut deriv = q(0);
        for skip in 0..xs.len() {
            if skip == i {
                continue;
            }
            let mut prod = q(1);
            for j in 0..xs.len() {
                if j != i && j != skip {
                    prod *= -&xs[j];
                }
            }
            deriv += prod;
        }
        lin += &ys[i] * deriv / denom;
    }
    lin / q(a as i64)
}

#[test]
fn cohen_h_against_power_sum_oracle() {
    for r in [2u32, 3, 4, 5, 6, 7, 8] {
        for ad in 1..=200i64 {
            let d = if r % 2 == 0 { ad } else { -ad };
            if !is_fundamental(d) {
                continue;
            }
            let expect = -bernoulli_chi_oracle(r, d) / q(r as i64);
            assert_eq!(cohen_h(r, ad as u64), expect, "r={r} d={d}");
        }
        assert_eq!(cohen_h(r, 0), -bernoulli(2 * r as usize) / q(2 * r as i64));
        for n in 1..=60u64 {
            let disc = if r % 2 == 0 { n as i64 } else { -(n as i64) };
            if matches!(disc.rem_euclid(4), 2 | 3) {
                assert!(cohen_h(r, n).is_zero());
            }
        }
    }
    // zeta(1-2r) at r = 2: 1/120
    assert_eq!(cohen_h(2, 0), qf(1, 120));
    assert_eq!(l_value_neg(2, 1), qf(-1, 12));
}

#[test]
fn jacobi_forms() {
    for k in [4u32, 6, 8, 10] {
        let e = jacobi_eisenstein(k, 30).unwrap();
        assert_eq!(e.coeff(0, 0), q(1));
        let h = sigma_1(&e);
        assert_eq!(h.sign, -1);
        let z = cohen_h(k - 1, 0);
        for m in 0..=h.n_max {
            assert_eq!(h.coeff(m), cohen_h(k - 1, m) / &z);
        }
    }
    for k in [10u32, 12, 14] {
        let phi = jacobi_cusp(k, 30).unwrap();
        for n in 0..=30u64 {
            for r in -12i64..=12 {
                if 4 * n as i64 - r * r <= 0 {
                    assert!(phi.coeff(n, r).is_zero());
                }
            }
        }
        assert_eq!(phi.coeff(1, 1), q(1));
        let h = sigma_1(&phi);
        for m in h.coeffs.keys() {
            assert!(matches!(m % 4, 0 | 3));
        }
    }
    assert!(jacobi_cusp(16, 5).is_err());
}

#[test]
fn weight_13_2_form() {
    let h = rankin_cohen_theta(4, 20).unwrap();
    assert_eq!(h.weight, qf(13, 2));
    let v: Vec<i64> = vec![0, 1, 0, 0, -56, 120, 0, 0, -240, 9, 0, 0, 1440];
    for (i, x) in v.iter().enumerate() {
        assert_eq!(h.coeff(i as u64), q(*x), "coefficient {i}");
    }
    let p = PlusFormExpansion::from_qexp(&h, 1).unwrap();
    assert!(p.coeffs.keys().all(|m| matches!(m % 4, 0 | 1)));
}

#[test]
fn shimura_and_l_h_identity() {
    for (n, k, v) in [(4, 8, Variant::Cusp), (4, 10, Variant::Eisenstein), (2, 10, Variant::Cusp), (2, 8, Variant::Eisenstein)] {
        let r = cross_checks(n, k, v, 20, 200).unwrap();
        assert_eq!(r.shimura.len(), 2);
        for s in &r.shimura {
            assert!(!s.skipped && s.proportional, "{n} {k} {v:?} D={}", s.d);
        }
        assert!(r.l_h_identity, "{n} {k} {v:?}");
        assert!(r.ok());
    }
    // the scalar is c_h(|D|) for a normalized eigenform
    let inp = lift_inputs(4, 8, Variant::Cusp, 8000, 20).unwrap();
    let rep = shimura_check(&inp.h, &inp.f, 5, 20).unwrap();
    assert_eq!(rep.scalar, Some(inp.ch(5)));
    let rep = shimura_check(&inp.h, &inp.f, 8, 20).unwrap();
    assert_eq!(rep.scalar, Some(inp.ch(8)));
    // c_h(|D|) = 0 is a skip
    let rep = shimura_check(&inp.h, &inp.f, 12, 5).unwrap();
    assert!(rep.skipped || rep.proportional);
}

#[test]
fn l_h_identity_truncation_stable() {
    let inp = lift_inputs(4, 8, Variant::Cusp, 200, 200).unwrap();
    for nm in [50, 100, 200] {
        let h = PlusFormExpansion::new(inp.h.weight.clone(), 1, nm, inp.h.coeffs.clone()).unwrap();
        assert!(l_h_identity_check(&h, &inp.f, nm));
    }
}

#[test]
fn satake_data() {
    // Eisenstein: c = sigma_{2k-n-1}(p) gives beta = p^{(2k-n-1)/2}
    for p in [2u64, 3, 5, 7] {
        let (n, k) = (4usize, 10usize);
        let cf = qbig(sigma((2 * k - n - 1) as u32, p));
        let s = satake_rhs(&cf, p, k, n);
        let e = (2 * k - n - 1) as i64;
        let beta = ExtScalar::sqrt_pow(p, e);
        let binv = ExtScalar::sqrt_pow(p, -e);
        assert_eq!(s, &beta + &binv);
        let sq = &s * &s;
        assert!(sq.b.is_zero());
    }
    let d = delta_qexp(3);
    let s = satake_rhs(&d.coeff(2), 2, 8, 4);
    assert_eq!(s, ExtScalar::new(2, q(0), d.coeff(2) / qpow(2, 6)));
}

#[test]
fn dirichlet_inputs() {
    let ones = char_l_coeffs(1, 30);
    assert!((1..=30).all(|m| ones.get(m) == q(1)));
    let d = delta_qexp(30);
    let l = lfunc_coeffs(|m| d.coeff(m), 30);
    assert_eq!(l.get(2), q(-24));
    let chi = char_l_coeffs(-4, 12);
    assert_eq!(chi.get(3), q(-1));
    assert_eq!(chi.get(2), q(0));
}
