use km_core::exact_algebra::q;
use km_core::local_density::*;
use km_core::padic_forms::*;

fn stable_brute(b: &QMat, p: u64) -> km_core::exact_algebra::Q {
    let nu = val(&det(b), p) as u32;
    let a = nu + if p == 2 { 3 } else { 2 };
    let lv = alpha_bruteforce_levels(b, b, p, a).unwrap();
    assert_eq!(lv[lv.len() - 1], lv[lv.len() - 2], "not stable for {b:?} at p={p}");
    lv[lv.len() - 1].clone()
}

#[test]
fn closed_formula_matches_counting_degree_le_two() {
    for p in [2u64, 3, 5] {
        for m in 1..=2 {
            let vmax = if p == 5 { 1 } else { 2 };
            for b in enumerate_padic_classes(m, p, vmax) {
                assert_eq!(alpha(&b, p), stable_brute(&b, p), "{b:?} p={p}");
            }
        }
    }
}

#[test]
fn closed_formula_matches_counting_degree_three_at_two() {
    let spot = [
        qmat(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]),
        qmat(&[&[3, 0, 0], &[0, 1, 0], &[0, 0, 2]]),
        qmat(&[&[1, 0, 0], &[0, 0, 1], &[0, 1, 0]]),
        qmat(&[&[7, 0, 0], &[0, 2, 1], &[0, 1, 2]]),
        qmat(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 4]]),
    ];
    let mut all: Vec<QMat> = enumerate_padic_classes(3, 2, 1);
    for b in spot {
        if !all.iter().any(|a| zp_equivalent(a, &b, 2)) {
            all.push(b);
        }
    }
    assert!(all.len() >= 20);
    for b in &all {
        assert_eq!(alpha(b, 2), stable_brute(b, 2), "{b:?}");
    }
}

#[test]
fn scaling_law() {
    for p in [2u64, 3, 5] {
        for m in 1..=3 {
            for b in enumerate_padic_classes(m, p, 2) {
                let pb = scaled(&b, &q(p as i64));
                let e = (m * (m + 1) / 2) as i64;
                assert_eq!(alpha(&pb, p), alpha(&b, p) * km_core::exact_algebra::qpow(p, e));
            }
        }
    }
}

#[test]
fn five_twist_at_two() {
    for b1 in enumerate_padic_classes(2, 2, 3) {
        for u in [1i64, 3, 5, 7] {
            let a = block_diag(&[qmat(&[&[u]]), b1.clone()]);
            let a5 = block_diag(&[qmat(&[&[u]]), scaled(&b1, &q(5))]);
            assert_eq!(alpha(&a, 2), alpha(&a5, 2));
        }
    }
}

#[test]
fn pair_density_matches_counting() {
    for p in [2u64, 3] {
        for m in 1..=2 {
            let cls = enumerate_padic_classes(m, p, 2);
            for b in &cls {
                for bp in &cls {
                    let nu = val(&det(b), p) as u32;
                    let lvl = nu + if p == 2 { 3 } else { 2 };
                    let brute = alpha_bruteforce(bp, b, p, lvl).unwrap().value;
                    assert_eq!(alpha_pair(bp, b, p).value, brute, "{bp:?} -> {b:?} p={p}");
                }
            }
        }
    }
}

#[test]
fn divisor_routes_agree() {
    for p in [2u64, 3] {
        for m in 1..=3 {
            for b in enumerate_padic_classes(m, p, 4) {
                for f in [DivisorFilter::None, DivisorFilter::L1, DivisorFilter::L0] {
                    let mut a: Vec<(u32, ClassKey, u64)> =
                        divisors(&b, p, f).iter().map(|d| (d.k, class_key(&d.rep, p), d.count)).collect();
                    let mut r: Vec<(u32, ClassKey, u64)> =
                        divisors_reduced(&b, p, f).iter().map(|d| (d.k, class_key(&d.rep, p), d.count)).collect();
                    a.sort();
                    r.sort();
                    assert_eq!(a, r, "{b:?} p={p}");
                }
            }
        }
    }
}

#[test]
fn primitive_below_full_density() {
    let cls = enumerate_padic_classes(1, 3, 2);
    for b in &cls {
        for a in &cls {
            let x = alpha_bruteforce(a, b, 3, 4).unwrap().value;
            let y = beta_primitive_bruteforce(a, b, 3, 4).unwrap().value;
            assert!(y <= x);
        }
    }
}

#[test]
fn unit_complement_degree_two_and_four() {
    for b in enumerate_padic_classes(2, 2, 3) {
        if is_odd_2(&b) {
            assert!(unit_complement_check(&b), "{b:?}");
        }
    }
    let four = [
        qmat(&[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 1]]),
        qmat(&[&[1, 0, 0, 0], &[0, 3, 0, 0], &[0, 0, 2, 0], &[0, 0, 0, 2]]),
        qmat(&[&[3, 0, 0, 0], &[0, 0, 1, 0], &[0, 1, 0, 0], &[0, 0, 0, 4]]),
    ];
    for b in four {
        assert!(unit_complement_check(&b), "{b:?}");
    }
}

#[test]
fn budget_is_enforced() {
    let b = qmat(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
    let r = alpha_bruteforce_budget(&b, &b, 5, 6, 1000);
    assert!(matches!(r, Err(DensityError::BudgetExceeded { .. })));
}

fn naive_count(a: &[[i64; 2]; 2], b: &[Vec<i64>], p: i64, lvl: u32) -> i64 {
    let n = b.len();
    let md = p.pow(lvl);
    let total = (md as usize).pow(2 * n as u32);
    let mut hits = 0;
    for idx in 0..total {
        let mut t = idx;
        let mut x = vec![[0i64; 2]; 2];
        for c in 0..n {
            for r in 0..2 {
                x[c][r] = (t % md as usize) as i64;
                t /= md as usize;
            }
        }
        let ok = (0..n).all(|i| {
            (i..n).all(|j| {
                let s: i64 = (0..2).flat_map(|r| (0..2).map(move |c| (r, c))).map(|(r, c)| x[i][r] * a[r][c] * x[j][c]).sum();
                (s - b[i][j]).rem_euclid(md) == 0
            })
        });
        hits += ok as i64;
    }
    hits
}

#[test]
fn linear_lifting_matches_full_enumeration() {
    let a = [[2i64, 1], [1, 6]];
    let aq = qmat(&[&[2, 1], &[1, 6]]);
    for (b, lvl) in [(vec![vec![2i64]], 3u32), (vec![vec![6]], 3), (vec![vec![9]], 3), (vec![vec![2, 1], vec![1, 6]], 2), (vec![vec![2, 0], vec![0, 18]], 2)] {
        let n = b.len();
        let rows: Vec<&[i64]> = b.iter().map(|r| r.as_slice()).collect();
        let bq = qmat(&rows);
        let got = alpha_bruteforce(&aq, &bq, 3, lvl).unwrap().value;
        let e = -(2 * n as i64) + (n * (n + 1) / 2) as i64;
        let mut want = q(naive_count(&a, &b, 3, lvl)) * km_core::exact_algebra::qpow(3, lvl as i64 * e);
        if n == 2 {
            want /= q(2);
        }
        assert_eq!(got, want, "{b:?} level {lvl}");
    }
}
