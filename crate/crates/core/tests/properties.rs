use km_core::exact_algebra::*;
use km_core::local_density::alpha;
use km_core::padic_forms::*;
use km_core::siegel_series::{classes, ftilde1};
use proptest::prelude::*;

fn ext(p: u64) -> impl Strategy<Value = ExtScalar> {
    (-20i64..20, 1i64..6, -20i64..20, 1i64..6).prop_map(move |(a, b, c, d)| ExtScalar::new(p, qf(a, b), qf(c, d)))
}

fn series(p: u64) -> impl Strategy<Value = TruncSeries> {
    prop::collection::vec((0i32..6, -2i32..3, -5i64..6, 1i64..4), 0..6).prop_map(move |terms| {
        let mut s = TruncSeries::zero(p, 6);
        for (te, xe, a, b) in terms {
            s.add_term(te, xe, ExtScalar::rational(p, qf(a, b)));
        }
        s
    })
}

fn dirichlet() -> impl Strategy<Value = DirichletCoeffs> {
    prop::collection::vec((1u64..40, -9i64..10), 0..10).prop_map(|v| {
        let mut d = DirichletCoeffs::new(40);
        for (n, c) in v {
            d.add_at(n, &q(c));
        }
        d
    })
}

/// A unimodular integer matrix as a product of elementary operations.
fn unimodular(m: usize) -> impl Strategy<Value = QMat> {
    prop::collection::vec((0..m, 0..m, -2i64..3, any::<bool>()), 0..8).prop_map(move |ops| {
        let mut u = identity(m);
        for (i, j, c, swap) in ops {
            if i == j {
                continue;
            }
            let mut e = identity(m);
            if swap {
                e[i][i] = q(0);
                e[j][j] = q(0);
                e[i][j] = q(1);
                e[j][i] = q(-1);
            } else {
                e[i][j] = q(c);
            }
            u = mat_mul(&u, &e);
        }
        u
    })
}

fn symmetric(m: usize) -> impl Strategy<Value = QMat> {
    prop::collection::vec(-6i64..7, m * m).prop_filter_map("singular", move |v| {
        let mut a = vec![vec![q(0); m]; m];
        for i in 0..m {
            for j in i..m {
                let x = if i == j { 2 * v[i * m + j] } else { v[i * m + j] };
                a[i][j] = q(x);
                a[j][i] = q(x);
            }
        }
        if det(&a) == q(0) {
            None
        } else {
            Some(a)
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ext_ring_axioms(x in ext(3), y in ext(3), z in ext(3)) {
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert_eq!(&x * &y, &y * &x);
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        if !x.is_zero() {
            prop_assert_eq!(&x * &x.inv().unwrap(), ExtScalar::one(3));
        }
    }

    #[test]
    fn series_inverse_roundtrip(mut s in series(5), a in 1i64..9) {
        s.coeffs.remove(&0);
        s.add_term(0, 1, ExtScalar::sqrt_pow(5, a));
        let inv = s.inverse().unwrap();
        prop_assert!(s.mul(&inv).eq_trunc(&TruncSeries::one(5, 6)));
    }

    #[test]
    fn series_mul_commutes(a in series(2), b in series(2)) {
        prop_assert!(a.mul(&b).eq_trunc(&b.mul(&a)));
    }

    #[test]
    fn dirichlet_mul_commutative_associative(a in dirichlet(), b in dirichlet(), c in dirichlet()) {
        prop_assert_eq!(dirichlet_mul(&a, &b), dirichlet_mul(&b, &a));
        prop_assert_eq!(dirichlet_mul(&dirichlet_mul(&a, &b), &c).coeffs, dirichlet_mul(&a, &dirichlet_mul(&b, &c)).coeffs);
    }

    #[test]
    fn class_invariants_under_unimodular_change(a in symmetric(3), u in unimodular(3)) {
        let b = gram(&a, &u);
        for p in [2u64, 3, 5] {
            prop_assert!(zp_equivalent(&a, &b, p));
            prop_assert_eq!(class_key(&a, p), class_key(&b, p));
        }
        prop_assert_eq!(in_l_prime(&a).is_some(), in_l_prime(&b).is_some());
    }

    #[test]
    fn density_invariant_under_unimodular_change(a in symmetric(2), u in unimodular(2)) {
        let b = gram(&a, &u);
        for p in [2u64, 3] {
            prop_assert_eq!(alpha(&a, p), alpha(&b, p));
        }
    }

    #[test]
    fn ftilde_symmetric_on_random_classes(i in 0usize..1000, p in prop::sample::select(vec![2u64, 3, 5])) {
        let cl = classes(3, p, 4, true);
        let a = &cl[i % cl.len()];
        prop_assert!(ftilde1(a, p, 4).unwrap().is_symmetric());
    }

    #[test]
    fn hilbert_symbol_product_formula(a in -60i64..60, b in -60i64..60) {
        prop_assume!(a != 0 && b != 0);
        let (qa, qb) = (q(a), q(b));
        let mut prod = if a < 0 && b < 0 { -1 } else { 1 };
        let mut ps: Vec<u64> = prime_factors(2 * a.unsigned_abs() * b.unsigned_abs());
        ps.dedup();
        for p in ps {
            prod *= hilbert(&qa, &qb, p);
        }
        prop_assert_eq!(prod, 1);
    }
}
