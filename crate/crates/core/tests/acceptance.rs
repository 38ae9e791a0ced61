//! One test per acceptance criterion. Each prints a single
//! `criterion N ...: PASS|FAIL` line before asserting.

use std::fs;
use std::time::Instant;

use mtrap::formulas::{brute_force_count, gt_count, mt_count, HiddenChoice};
use mtrap::multipoly::{FieldElem, MultiPoly};
use mtrap::pfaffian::{pf_laplace, pf_matchings, pf_squared_is_det, TriArray};
use mtrap::powerseries::{build_hidden_series, iota_series, HiddenVariant};
use mtrap::trapezoids::{enumerate_gt, enumerate_gt_stream, from_sign_matrix, to_sign_matrix, Trapezoid};
use mtrap::verify::{check_annihilating, run_check, CheckReport};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

fn report(n: u32, name: &str, ok: bool, detail: &str) {
    let status = if ok { "PASS" } else { "FAIL" };
    println!("criterion {n} {name}: {status} {detail}");
    assert!(ok, "criterion {n} {name}: {detail}");
}

fn fixture(name: &str) -> MultiPoly {
    let path = format!("{}/tests/fixtures/{name}.txt", env!("CARGO_MANIFEST_DIR"));
    fs::read_to_string(path).unwrap().trim().parse().unwrap()
}

fn symbolic_mt(h: usize, n: usize, choice: HiddenChoice) -> MultiPoly {
    mt_count(h, n, choice, true, None).unwrap().polynomial().unwrap().clone()
}

fn variants() -> Vec<HiddenChoice> {
    HiddenVariant::ALL.iter().map(|v| HiddenChoice::Series(*v, v.default_factor())).collect()
}

/// All strictly increasing rows of length `n` with entries in `lo..=hi`
/// and `k_n - k_1 <= spread`.
fn rows(n: usize, lo: i64, hi: i64, spread: i64) -> Vec<Vec<i64>> {
    fn rec(n: usize, hi: i64, spread: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        let top = hi.min(cur[0] + spread);
        for v in cur[cur.len() - 1] + 1..=top {
            cur.push(v);
            rec(n, hi, spread, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for start in lo..=hi {
        rec(n, hi, spread, &mut vec![start], &mut out);
    }
    out
}

fn sample_rows(n: usize, want: usize) -> Vec<Vec<i64>> {
    let all = rows(n, -12, 12, 7);
    let stride = (all.len() / want).max(1);
    all.into_iter().step_by(stride).take(want).collect()
}

#[test]
fn criterion_1_golden_polynomials() {
    let t = Instant::now();
    let mut bad = Vec::new();
    for (name, h, n) in [("mt1_k4", 1, 4), ("mt1_k5", 1, 5), ("mt2_k4", 2, 4)] {
        let want = fixture(name);
        for c in variants() {
            if symbolic_mt(h, n, c) != want {
                bad.push(format!("{name}/{}", c.id()));
            }
        }
    }
    let terms = symbolic_mt(2, 5, "p0a".parse().unwrap()).num_terms();
    let ok = bad.is_empty() && terms == 315;
    report(
        1,
        "golden polynomials",
        ok,
        &format!("mismatches {bad:?}, MT_2(k_5) has {terms} terms, {:.1}s", t.elapsed().as_secs_f64()),
    );
}

#[test]
fn criterion_2_oracle_grid() {
    let t = Instant::now();
    let p0a: HiddenChoice = "p0a".parse().unwrap();
    let mut cells = 0;
    let mut bad = Vec::new();
    for n in 1..=6usize {
        for h in 0..=n.min(3) {
            let sample = sample_rows(n, 25);
            assert!(sample.len() >= 25, "only {} rows for n = {n}", sample.len());
            for b in &sample {
                let mt = mt_count(h, n, p0a, false, Some(b)).unwrap();
                let gt = gt_count(h, n, false, Some(b)).unwrap();
                if mt.value != brute_force_count(h, b, true).unwrap().value
                    || gt.value != brute_force_count(h, b, false).unwrap().value
                {
                    bad.push((h, b.clone()));
                }
            }
            cells += 1;
        }
    }
    report(
        2,
        "oracle grid",
        bad.is_empty(),
        &format!("{cells} cells x 25 rows, mismatches {bad:?}, {:.1}s", t.elapsed().as_secs_f64()),
    );
}

#[test]
fn criterion_3_asm_numbers() {
    let asm = [1u64, 2, 7, 42];
    let mut ok = true;
    for n in 1..=4usize {
        let b: Vec<i64> = (1..=n as i64).collect();
        let f = mt_count(n - 1, n, "p0a".parse().unwrap(), false, Some(&b)).unwrap();
        ok &= f.integer() == Some(&BigInt::from(asm[n - 1]));
        ok &= enumerate_gt(n - 1, &b, true).unwrap() == asm[n - 1] as u128;
    }
    for n in 1..=5usize {
        let b: Vec<i64> = (1..=n as i64).collect();
        let g = gt_count(n - 1, n, false, Some(&b)).unwrap();
        ok &= g.integer() == Some(&(BigInt::from(1) << (n * (n - 1) / 2)));
    }
    report(3, "ASM numbers", ok, "MT(n-1, n, 1..n) = 1, 2, 7, 42; GT = 2^C(n,2) for n <= 5");
}

#[test]
fn criterion_4_hidden_series() {
    let order = 8;
    let mut bad = Vec::new();
    let iota = iota_series(order).unwrap();
    for v in HiddenVariant::ALL {
        let a = build_hidden_series(v, v.default_factor(), order).unwrap();
        let r = check_annihilating(&a, 3, 2).unwrap();
        let unit = a.constant_term().is_one();
        let diag = a.diagonal(&iota).unwrap();
        let diag_one = diag.coeffs().iter().enumerate().all(|(i, c)| if i == 0 { c.is_one() } else { c.is_zero() });
        if !(r.passed && unit && diag_one) {
            bad.push(format!("{} {:?}", v.id(), r.witness));
        }
    }
    report(4, "hidden series", bad.is_empty(), &format!("order {order}, h <= 3, pairs <= 2, failures {bad:?}"));
}

fn run(id: &str, params: serde_json::Value, failures: &mut Vec<String>, count: &mut usize) {
    let r: CheckReport = run_check(id, &params).unwrap();
    *count += 1;
    if !r.passed {
        failures.push(format!("{id} {params} {:?}", r.witness));
    }
}

#[test]
fn criterion_5_identity_suite() {
    let mut fails = Vec::new();
    let mut count = 0;
    for h in 0..=3 {
        for h1 in 0..=3 {
            for h2 in 0..=3 {
                run("w12", json!({ "h": h, "h1": h1, "h2": h2, "z_degree": 3 }), &mut fails, &mut count);
            }
        }
    }
    for n in 1..=5usize {
        for h in 0..=n.min(3) {
            for p in 0..=n {
                run("fund", json!({ "h": h, "n": n, "s": [p] }), &mut fails, &mut count);
            }
            if n >= 2 {
                run("fund", json!({ "h": h, "n": n, "s": [1, 1] }), &mut fails, &mut count);
                run("fund", json!({ "h": h, "n": n, "s": [2, 1] }), &mut fails, &mut count);
            }
        }
    }
    for n in 1..=4usize {
        for h in 0..=n.min(2) {
            for a in ["p0a", "q_a"] {
                run("one", json!({ "h": h, "n": n, "A": a }), &mut fails, &mut count);
            }
        }
    }
    for n in 1..=5usize {
        for i in 0..n {
            for j in i + 2..=n + 1 {
                run("eat", json!({ "i": i, "j": j, "n": n, "sample": { "random": 7 * i + j } }), &mut fails, &mut count);
            }
        }
    }
    for n in 2..=5usize {
        for p in 0..=n {
            run("urbanrenewal", json!({ "p": p, "n": n, "sample": { "random": p } }), &mut fails, &mut count);
            run("urbanrenewal", json!({ "p": p, "n": n, "sample": { "overline_gt": 1 } }), &mut fails, &mut count);
        }
    }
    for n in 1..=4usize {
        for h in 0..=2usize {
            for q2 in (3..=2 * n).step_by(2) {
                let i = q2 / 2;
                if h == 0 || (i >= h && i + h <= n) {
                    run("decomposition", json!({ "h": h, "n": n, "q2": q2 }), &mut fails, &mut count);
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut pf_bad = 0;
    for k in 0..30 {
        let order = 2 + 2 * (k % 5);
        let a = TriArray::from_fn(order, |_, _| BigInt::from(rng.gen_range(-4i64..=4))).unwrap();
        let m = pf_matchings(&a).unwrap();
        if (1..=order).any(|e| pf_laplace(&a, e).unwrap() != m) {
            pf_bad += 1;
        }
    }
    for order in (2..=8).step_by(2) {
        for _ in 0..3 {
            let a = TriArray::from_fn(order, |_, _| FieldElem::from_int(rng.gen_range(-4i64..=4))).unwrap();
            if !pf_squared_is_det(&a) {
                pf_bad += 1;
            }
        }
    }
    let ok = fails.is_empty() && pf_bad == 0;
    report(5, "identity suite", ok, &format!("{count} checks, failures {fails:?}, Pfaffian failures {pf_bad}"));
}

/// Operators `prod st^-1` alone, i.e. `A = 1`.
#[test]
fn criterion_6_negative_control() {
    let mut legs = Vec::new();
    for (h, n) in [(1, 1), (1, 2), (1, 3), (1, 4), (1, 5), (2, 2), (2, 3), (2, 4), (2, 5)] {
        let plain = symbolic_mt(h, n, HiddenChoice::Omit);
        let with_a = symbolic_mt(h, n, "p0a".parse().unwrap());
        let equal = plain == with_a;
        let bf_agrees = sample_rows(n, 6).iter().all(|b| {
            let v = plain.eval_integer(&mtrap_row(b)).unwrap();
            brute_force_count(h, b, true).unwrap().integer() == Some(&v)
        });
        legs.push(((h, n), equal && bf_agrees));
    }
    let mut witness = None;
    for b in rows(6, 0, 7, 7) {
        let plain = mt_count(2, 6, HiddenChoice::Omit, false, Some(&b)).unwrap();
        if plain.value != brute_force_count(2, &b, true).unwrap().value {
            witness = Some(b);
            break;
        }
    }
    let failed: Vec<_> = legs.iter().filter(|(_, ok)| !ok).map(|(c, _)| *c).collect();
    let ok = failed.is_empty() && witness.is_some();
    report(
        6,
        "negative control",
        ok,
        &format!("equality fails at {failed:?}; (2,6) discrepancy at bottom row {witness:?}"),
    );
}

fn mtrap_row(b: &[i64]) -> std::collections::BTreeMap<String, i64> {
    b.iter().enumerate().map(|(i, &v)| (format!("k{}", i + 1), v)).collect()
}

#[test]
fn criterion_7_bijection() {
    let shown = Trapezoid::new(vec![
        vec![8, 12, 15, 18],
        vec![7, 10, 15, 17, 19],
        vec![6, 8, 14, 15, 17, 19],
        vec![3, 8, 12, 15, 16, 18, 20],
    ])
    .unwrap();
    let printed: Vec<Vec<i8>> = vec![
        vec![0, 0, 0, 0, 0, 0, 1, -1, 0, 1, 0, -1, 0, 0, 0, 0, 1, -1, 1, 0],
        vec![0, 0, 0, 0, 0, 1, -1, 1, 0, -1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0],
        vec![0, 0, 0, 1, 0, -1, 0, 0, 0, 0, 0, 1, 0, -1, 0, 1, -1, 1, -1, 1],
    ];
    let m = to_sign_matrix(&shown).unwrap();
    let example_ok = m.entries == printed;
    let diff: Vec<(usize, usize)> = (0..3)
        .flat_map(|r| (0..20).map(move |c| (r, c)))
        .filter(|&(r, c)| m.entries[r][c] != printed[r][c])
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut trips = 0;
    let mut trip_bad = 0;
    while trips < 200 {
        let n = rng.gen_range(1..=5usize);
        let h = rng.gen_range(0..=3usize.min(n));
        let mut b: Vec<i64> = Vec::new();
        let mut v = rng.gen_range(1..=3i64);
        for _ in 0..n {
            b.push(v);
            v += rng.gen_range(1..=3i64);
        }
        let mut all = Vec::new();
        enumerate_gt_stream(h, &b, true, 1 << 16, &mut |t| all.push(t.clone())).unwrap();
        let t = &all[rng.gen_range(0..all.len())];
        let m = to_sign_matrix(t).unwrap();
        if m.validate().is_err() || from_sign_matrix(&m).ok().as_ref() != Some(t) {
            trip_bad += 1;
        }
        trips += 1;
    }
    report(
        7,
        "bijection",
        example_ok && trip_bad == 0,
        &format!("displayed trapezoid differs from the printed matrix at (row, col) {diff:?}; {trip_bad}/{trips} round-trip failures"),
    );
}

#[test]
fn criterion_8_ideal_experiments() {
    let mut fails = Vec::new();
    let mut count = 0;
    for n in 1..=5usize {
        for h in 0..=n.min(3) {
            run("ideal_generators", json!({ "h": h, "n": n }), &mut fails, &mut count);
        }
    }
    let mut constants = Vec::new();
    for n in 1..=5usize {
        for h in 0..=n.min(2) {
            for i in 1..=n {
                let r = run_check("first3", &json!({ "h": h, "n": n, "i": i })).unwrap();
                count += 1;
                if !r.passed {
                    fails.push(format!("first3 h={h} n={n} i={i} {:?}", r.witness));
                }
                if let Some(c) = r.constant {
                    constants.push(format!("({h},{n},{i})={c}"));
                }
            }
        }
    }
    println!("first3 constants: {}", constants.join(" "));
    report(8, "ideal experiments", fails.is_empty(), &format!("{count} checks, failures {fails:?}"));
}
