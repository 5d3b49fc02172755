use km_core::exact_algebra::q;
use km_core::km_pipeline::*;
use km_core::modular_forms::{lift_inputs, Variant};

fn show(r: &VerificationReport) {
    for row in r.rows.iter().filter(|x| !x.equal).take(5) {
        eprintln!("N={} lhs={} r32={} r21={}", row.n, row.lhs, row.rhs_euler, row.rhs_closed);
    }
    eprintln!(
        "n={} k={} {:?}: closed {} euler {} genus {} const {} sens {} ({:.1}s)",
        r.n, r.k, r.variant, r.lhs_eq_closed, r.lhs_eq_euler, r.genus_route_eq, r.genus_constant, r.sensitivity, r.seconds
    );
}

#[test]
fn degree_two_cases() {
    for (k, v) in [(8, Variant::Eisenstein), (10, Variant::Cusp), (12, Variant::Cusp), (14, Variant::Cusp)] {
        let r = verify(2, k, 30, v).unwrap();
        show(&r);
        assert!(r.all_ok);
    }
}

#[test]
fn n4_cusp_k8() {
    let r = verify(4, 8, 50, Variant::Cusp).unwrap();
    show(&r);
    assert!(r.all_ok);
}

#[test]
fn n4_eisenstein_k10() {
    let r = verify(4, 10, 50, Variant::Eisenstein).unwrap();
    show(&r);
    assert!(r.all_ok);
}

#[test]
fn n4_cusp_k10_k12() {
    for k in [10, 12] {
        let r = verify(4, k, 30, Variant::Cusp).unwrap();
        show(&r);
        assert!(r.all_ok);
    }
}

#[test]
fn linear_in_h() {
    let inp = lift_inputs(4, 8, Variant::Cusp, 20, 20).unwrap();
    let mut scaled = inp.clone();
    scaled.h = inp.h.scale(&q(3));
    let a = km_lhs(&inp, 20).unwrap().scale(&q(3));
    let b = km_lhs(&scaled, 20).unwrap();
    assert_eq!(a, b);
    assert_eq!(km_rhs_closed(&inp, 20).scale(&q(3)), km_rhs_closed(&scaled, 20));
}

#[test]
fn n4_cusp_k8_to_100_and_pinned_values() {
    let r = verify(4, 8, 100, Variant::Cusp).unwrap();
    show(&r);
    assert!(r.all_ok);
    let pinned = [(1, "0/1"), (4, "-5/1"), (5, "20/1"), (8, "-70/1"), (9, "-60/1"), (12, "660/1")];
    for (n, v) in pinned {
        assert_eq!(r.rows[n - 1].lhs, v, "N = {n}");
    }
}

#[test]
fn eisenstein_pinned_values() {
    let r = verify(4, 10, 12, Variant::Eisenstein).unwrap();
    let pinned = [(4, "2159/384"), (5, "361/3"), (8, "172277/24"), (9, "44813/9"), (12, "2832973/12")];
    for (n, v) in pinned {
        assert_eq!(r.rows[n - 1].lhs, v, "N = {n}");
    }
}

#[test]
fn prefactor_and_sign() {
    assert_eq!(eps_sign(4), q(-1));
    assert_eq!(eps_sign(2), q(1));
    assert_eq!(rhs_prefactor(2), km_core::exact_algebra::qf(1, 2));
    assert_eq!(rhs_prefactor(4), km_core::exact_algebra::qf(1, 24));
}

#[test]
fn unsupported_cusp_combo_is_an_error() {
    assert!(verify(4, 14, 10, Variant::Cusp).is_err());
    assert!(verify(4, 4, 10, Variant::Eisenstein).is_err());
}
