//! One PASS/FAIL line per acceptance criterion. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::{Duration, Instant};

use km_core::exact_algebra::{qbig, qpow, Q};
use num_traits::Zero;
use km_core::km_pipeline::{cross_checks, verify, VerificationReport};
use km_core::lattice_enum::mass_check_all;
use km_core::local_density::{alpha, alpha_bruteforce_levels};
use km_core::modular_forms::{cusp_eigenform, delta_qexp, sigma, Variant};
use km_core::padic_forms::{det, enumerate_padic_classes, qmat, val, zp_equivalent, QMat};
use km_core::siegel_series::{
    ftilde_symmetry_check, local_grid, k_relation_check, q_reduction_checks, satake_rationality_check, p_closed_check,
    zeta_checks,
};

struct Outcome {
    id: u32,
    name: &'static str,
    ok: bool,
    detail: String,
    elapsed: Duration,
    budget: Duration,
}

fn run(id: u32, name: &'static str, budget_s: u64, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let t = Instant::now();
    let (ok, detail) = f();
    let elapsed = t.elapsed();
    let budget = Duration::from_secs(budget_s);
    let o = Outcome { id, name, ok: ok && elapsed <= budget, detail, elapsed, budget };
    println!(
        "criterion {:>2} {} {:<44} {:>8.1}s (budget {}s) {}",
        o.id,
        if o.ok { "PASS" } else { "FAIL" },
        o.name,
        o.elapsed.as_secs_f64(),
        o.budget.as_secs(),
        o.detail
    );
    o
}

/// Counting density at two consecutive levels, equal values required. A common
/// factor p^k is divided out first: the count for p^k B at level a is p^{k mn}
/// times the count for B at level a - k, so alpha scales by p^{k n(n+1)/2}.
fn stable_brute(b: &QMat, p: u64) -> Option<Q> {
    let k = b.iter().flatten().filter(|x| !x.is_zero()).map(|x| val(x, p)).min()?;
    let scale = qpow(p, k);
    let b0: QMat = b.iter().map(|r| r.iter().map(|x| x / &scale).collect()).collect();
    let nu = val(&det(&b0), p) as u32;
    let level = nu + if p == 2 { 3 } else { 2 };
    let lv = alpha_bruteforce_levels(&b0, &b0, p, level).ok()?;
    let (x, y) = (&lv[lv.len() - 1], &lv[lv.len() - 2]);
    let n = b.len() as i64;
    (x == y).then(|| x * qpow(p, k * n * (n + 1) / 2))
}

fn main_ok(r: &VerificationReport) -> bool {
    r.lhs_eq_closed && r.lhs_eq_euler
}

#[test]
fn acceptance() {
    let mut out = Vec::new();

    out.push(run(1, "P closed form on the local grid (order 8)", 300, || {
        let grid = local_grid(8);
        let bad = grid.iter().filter(|pr| !p_closed_check(pr).unwrap()).count();
        (bad == 0, format!("{} parameter sets, {bad} mismatches", grid.len()))
    }));

    out.push(run(2, "K relation on the local grid (order 8)", 120, || {
        let grid = local_grid(8);
        let bad = grid.iter().filter(|pr| !k_relation_check(pr).unwrap()).count();
        (bad == 0, format!("{} parameter sets, {bad} mismatches", grid.len()))
    }));

    out.push(run(3, "Q reductions, p in {2,3}, m = 4", 300, || {
        let mut r = q_reduction_checks(4, 3, 8);
        r.extend(q_reduction_checks(4, 2, 8));
        let bad = r.iter().filter(|x| !x.1).count();
        (bad == 0, format!("{} identities, {bad} mismatches", r.len()))
    }));

    out.push(run(4, "local density: formula vs counting", 600, || {
        let mut n = 0;
        let mut bad = Vec::new();
        for p in [2u64, 3, 5] {
            for m in 1..=2 {
                for b in enumerate_padic_classes(m, p, 4) {
                    n += 1;
                    if stable_brute(&b, p) != Some(alpha(&b, p)) {
                        bad.push(format!("{b:?}@{p}"));
                    }
                }
            }
        }
        let mut spot = enumerate_padic_classes(3, 2, 1);
        for b in [qmat(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 4]]), qmat(&[&[7, 0, 0], &[0, 2, 1], &[0, 1, 2]])] {
            if !spot.iter().any(|a| zp_equivalent(a, &b, 2)) {
                spot.push(b);
            }
        }
        for b in &spot {
            if stable_brute(b, 2) != Some(alpha(b, 2)) {
                bad.push(format!("{b:?}@2"));
            }
        }
        let ok = bad.is_empty() && spot.len() >= 20;
        (ok, format!("{n} classes of degree <= 2, {} degree-3 classes at 2, bad {bad:?}", spot.len()))
    }));

    out.push(run(5, "zeta closed forms and normalization", 300, || {
        let r = zeta_checks(8);
        let bad = r.iter().filter(|x| !x.1).count();
        (bad == 0, format!("{} checks, {bad} mismatches", r.len()))
    }));

    out.push(run(6, "mass identity, ternary genera", 600, || {
        let r = mass_check_all(4, 200).unwrap();
        let bad = r.iter().filter(|x| !x.ok).count();
        (bad == 0, format!("{} genera with det <= 200, {bad} mismatches", r.len()))
    }));

    let mut cusp = None;
    out.push(run(7, "main identity, cusp n=4 k=8 N<=50", 1800, || {
        let r = verify(4, 8, 50, Variant::Cusp).unwrap();
        let ok = main_ok(&r);
        let d = format!("closed {} euler {} genus {}", r.lhs_eq_closed, r.lhs_eq_euler, r.genus_route_eq);
        cusp = Some(r);
        (ok, d)
    }));

    let mut eis = None;
    out.push(run(8, "main identity, Eisenstein n=4 k=10 N<=50", 1800, || {
        let r = verify(4, 10, 50, Variant::Eisenstein).unwrap();
        let ok = main_ok(&r);
        let d = format!("closed {} euler {} genus {}", r.lhs_eq_closed, r.lhs_eq_euler, r.genus_route_eq);
        eis = Some(r);
        (ok, d)
    }));

    out.push(run(9, "n=2: Eisenstein k=8, cusp k=10, N<=30", 300, || {
        let a = verify(2, 8, 30, Variant::Eisenstein).unwrap();
        let b = verify(2, 10, 30, Variant::Cusp).unwrap();
        (main_ok(&a) && main_ok(&b), format!("k=8 {} k=10 {}", main_ok(&a), main_ok(&b)))
    }));

    out.push(run(10, "symmetry, rationality, Shimura, L(s,h), power", 600, || {
        let mut sym = true;
        for n in [2usize, 4] {
            for p in [2u64, 3, 5] {
                sym &= ftilde_symmetry_check(n, p, 6).unwrap().1;
            }
        }
        let delta = delta_qexp(5);
        let f18 = cusp_eigenform(18, 5).unwrap();
        let mut rat = true;
        for p in [2u64, 3, 5] {
            rat &= satake_rationality_check(4, p, 6, 8, &delta.coeff(p)).1;
            rat &= satake_rationality_check(4, p, 6, 10, &qbig(sigma(15, p))).1;
            rat &= satake_rationality_check(2, p, 6, 10, &f18.coeff(p)).1;
        }
        let c1 = cross_checks(4, 8, Variant::Cusp, 20, 200).unwrap();
        let c2 = cross_checks(4, 10, Variant::Eisenstein, 20, 200).unwrap();
        let shim = c1.shimura.len() >= 2 && c2.shimura.len() >= 2 && c1.shimura.iter().chain(&c2.shimura).all(|s| s.proportional);
        let lh = c1.l_h_identity && c2.l_h_identity;
        let power = cusp.as_ref().map(|r| r.sensitivity).unwrap_or(false) && eis.as_ref().map(|r| r.sensitivity).unwrap_or(false);
        let ok = sym && rat && shim && lh && power;
        (ok, format!("symmetry {sym} rationality {rat} shimura {shim} L(s,h) {lh} sensitivity {power}"))
    }));

    let failed: Vec<u32> = out.iter().filter(|o| !o.ok).map(|o| o.id).collect();
    println!("acceptance: {} of {} criteria pass", out.len() - failed.len(), out.len());
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
