use km_core::siegel_series::*;
use std::time::Instant;

#[test]
fn local_closed_forms_order_eight() {
    let t = Instant::now();
    let mut bad = Vec::new();
    for pr in local_grid(8) {
        if !p_closed_check(&pr).unwrap() {
            bad.push(format!("P {:?}", pr));
        }
        if !k_relation_check(&pr).unwrap() {
            bad.push(format!("K {:?}", pr));
        }
    }
    eprintln!("grid order 8: {:?}", t.elapsed());
    assert!(bad.is_empty(), "{bad:#?}");
}

#[test]
fn zeta_forms() {
    let t = Instant::now();
    let r = zeta_checks(8);
    let bad: Vec<_> = r.iter().filter(|x| !x.1).collect();
    eprintln!("zeta: {} checks {:?}", r.len(), t.elapsed());
    assert!(bad.is_empty(), "{bad:#?}");
}

#[test]
fn q_props() {
    let t = Instant::now();
    let mut r = q_reduction_checks(4, 3, 8);
    r.extend(q_reduction_checks(4, 2, 8));
    let bad: Vec<_> = r.iter().filter(|x| !x.1).collect();
    eprintln!("q: {} checks {:?}", r.len(), t.elapsed());
    assert!(bad.is_empty(), "{bad:#?}");
}

#[test]
fn ftilde_symmetric_and_satake_rational() {
    for n in [2usize, 4] {
        for p in [2u64, 3, 5] {
            let (c, ok) = ftilde_symmetry_check(n, p, 6).unwrap();
            assert!(ok && c > 0, "n={n} p={p}");
        }
    }
    // tau(p) for the weight-12 eigenform, and sigma_15(p)
    let tau = [(2u64, -24i64), (3, 252), (5, 4830)];
    for (p, t) in tau {
        assert!(satake_rationality_check(4, p, 6, 8, &km_core::exact_algebra::q(t)).1);
        let s15 = km_core::modular_forms::sigma(15, p);
        assert!(satake_rationality_check(4, p, 6, 10, &km_core::exact_algebra::qbig(s15)).1);
    }
}

#[test]
fn iota_numerator_recovered() {
    for p in [2u64, 3, 5] {
        for d0 in f_reps(p) {
            if km_core::padic_forms::val(&d0, p) == 0 {
                assert!(iota_numerator_check(p, &d0, 8).unwrap(), "p={p} d0={d0}");
            }
        }
    }
}
