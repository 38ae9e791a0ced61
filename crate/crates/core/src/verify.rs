//! Executable identity checks.
//!
//! Every check builds both sides of an identity as exact polynomials and
//! compares them. A failing report carries the first nonzero term of the
//! difference as its witness.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::diffops::{elementary_sym_op, PairOperator};
use crate::error::{domain, Error, Result};
use crate::formulas::{gt_newton, k_var, k_vars, overline_gt, sgt, HiddenChoice};
use crate::multipoly::{apply_difference_operator, apply_newton, definite_sum, Direction, FieldElem, MultiPoly};
use crate::powerseries::{build_hidden_series, check_equation, BiSeries, HiddenVariant};

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub check_id: String,
    pub params: Map<String, Value>,
    pub passed: bool,
    pub witness: Option<String>,
    pub constant: Option<FieldElem>,
}

impl CheckReport {
    fn new(check_id: &str, params: Value) -> Self {
        let params = match params {
            Value::Object(m) => m,
            _ => Map::new(),
        };
        CheckReport { check_id: check_id.to_string(), params, passed: true, witness: None, constant: None }
    }

    /// Records a failure; only the first witness is kept.
    fn fail(&mut self, witness: String) {
        if self.passed {
            self.passed = false;
            self.witness = Some(witness);
        }
    }

    fn compare(&mut self, label: &str, lhs: &MultiPoly, rhs: &MultiPoly) {
        if let Some(w) = difference_witness(lhs, rhs) {
            self.fail(format!("{label}: {w}"));
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "check_id": self.check_id,
            "params": self.params,
            "passed": self.passed,
            "witness": self.witness,
            "constant": self.constant.as_ref().map(|c| c.to_string()),
        })
    }
}

/// Leading term of `lhs - rhs`, or `None` if the two agree.
pub fn difference_witness(lhs: &MultiPoly, rhs: &MultiPoly) -> Option<String> {
    let d = lhs - rhs;
    let (e, c) = d.sorted_terms().into_iter().next()?;
    let names: Vec<&str> = d.vars().iter().map(|s| s.as_str()).collect();
    let term = MultiPoly::from_terms(&names, [(e.clone(), c.clone())]).expect("distinct names");
    Some(format!("lhs - rhs has leading term {term}"))
}

fn vars_of(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn sgt_in(h: i64, x: &str, y: &str) -> MultiPoly {
    sgt(h).poly.rename(&[("x", x), ("y", y)]).expect("fresh names")
}

/// `overline GT_h` with its arguments renamed to `names`.
fn gtbar_in(h: usize, names: &[String]) -> Result<MultiPoly> {
    if names.is_empty() {
        return if h == 0 { Ok(MultiPoly::one()) } else { domain("no arguments") };
    }
    let p = overline_gt(h, names.len(), true, None)?.polynomial().expect("symbolic").clone();
    let ks = k_vars(names.len());
    let map: Vec<(&str, &str)> = ks.iter().map(|s| s.as_str()).zip(names.iter().map(|s| s.as_str())).collect();
    p.rename(&map)
}

fn shift_all(p: &MultiPoly, vars: &[String], amount: i64) -> MultiPoly {
    vars.iter().fold(p.clone(), |acc, v| acc.shift(v, amount))
}

/// `e_r(E_vars) p`.
fn e_shift(p: &MultiPoly, vars: &[String], r: usize) -> MultiPoly {
    if r > vars.len() {
        return MultiPoly::zero();
    }
    let mut layer = vec![p.clone()];
    for (m, v) in vars.iter().enumerate() {
        let top = (m + 1).min(r);
        let next: Vec<MultiPoly> = (0..=top)
            .map(|k| {
                let keep = layer.get(k).cloned().unwrap_or_default();
                if k == 0 {
                    keep
                } else {
                    &keep + &layer[k - 1].shift(v, 1)
                }
            })
            .collect();
        layer = next;
    }
    layer.swap_remove(r)
}

/// `(T - id)^q p` for the joint shift `T` of `vars`.
fn joint_difference(p: &MultiPoly, vars: &[String], q: usize) -> MultiPoly {
    (0..q).fold(p.clone(), |acc, _| &shift_all(&acc, vars, 1) - &acc)
}

/// Sum of `a(l)` over `k_1 <= l_1 < k_2 <= ... <= l_{n-1} < k_n`.
fn strict_sum(a: &MultiPoly, lv: &[String], kv: &[String]) -> Result<MultiPoly> {
    let mut p = a.clone();
    for t in 0..lv.len() {
        p = definite_sum(&p, &lv[t], &MultiPoly::var(&kv[t]), &MultiPoly::var_plus(&kv[t + 1], -1))?;
    }
    Ok(p)
}

/// `e_r` of the given polynomials.
fn elementary(polys: &[MultiPoly], r: usize) -> MultiPoly {
    let mut layer = vec![MultiPoly::one()];
    for (m, x) in polys.iter().enumerate() {
        let top = (m + 1).min(r);
        layer = (0..=top)
            .map(|k| {
                let keep = layer.get(k).cloned().unwrap_or_default();
                if k == 0 {
                    keep
                } else {
                    &keep + &(&layer[k - 1] * x)
                }
            })
            .collect();
    }
    layer.get(r).cloned().unwrap_or_default()
}

/// Random polynomial of total degree at most 3 with coefficients in `-3..=3`.
pub fn random_poly(rng: &mut ChaCha8Rng, vars: &[String]) -> MultiPoly {
    let names: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
    let terms: Vec<(Vec<u32>, FieldElem)> = (0..6)
        .map(|_| {
            let mut e = vec![0u32; vars.len()];
            if !vars.is_empty() {
                for _ in 0..rng.gen_range(0..=3) {
                    e[rng.gen_range(0..vars.len())] += 1;
                }
            }
            (e, FieldElem::from_int(rng.gen_range(-3..=3)))
        })
        .collect();
    MultiPoly::from_terms(&names, terms).expect("distinct names")
}

/// Input function for the strict-sum lemmas.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sample {
    Unit,
    /// Seeded random polynomial; made to vanish on equal neighbours where required.
    Random(u64),
    /// `overline GT_g(l_1, ..., l_{n-1})`.
    OverlineGt(usize),
}

impl Sample {
    fn to_json(self) -> Value {
        match self {
            Sample::Unit => json!("unit"),
            Sample::Random(seed) => json!({ "random": seed }),
            Sample::OverlineGt(g) => json!({ "overline_gt": g }),
        }
    }

    fn build(self, lv: &[String], vanish_on_ties: bool) -> Result<MultiPoly> {
        match self {
            Sample::Unit => Ok(MultiPoly::one()),
            Sample::Random(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut a = random_poly(&mut rng, lv);
                if vanish_on_ties {
                    for w in lv.windows(2) {
                        a = &a * &(&MultiPoly::var(&w[1]) - &MultiPoly::var(&w[0]));
                    }
                }
                Ok(a)
            }
            Sample::OverlineGt(g) => gtbar_in(g, lv),
        }
    }
}

/// `A_{x,y} sgt_h = sgt_h` for `h <= h_max` and the fourfold `U` identity for
/// `h1, h2 <= h_pair_max`, with `U = W^-1 A`.
pub fn operator_route(a: &BiSeries, h_max: usize, h_pair_max: usize) -> Result<Option<String>> {
    for h in 0..=h_max as i64 {
        let s = sgt_in(h, "x", "y");
        let lhs = PairOperator::series(a.clone(), "x", "y").apply(&s)?;
        if let Some(w) = difference_witness(&lhs, &s) {
            return Ok(Some(format!("condition (1), h = {h}: {w}")));
        }
    }
    let (ox, oy) = (a.order_x(), a.order_y());
    let u = a.div(&BiSeries::parse("1 + x + x y", ox, oy)?)?;
    let pairs = [("x1", "x2"), ("y1", "x2"), ("x1", "y2"), ("y1", "y2")];
    for h1 in 0..=h_pair_max as i64 {
        for h2 in 0..=h_pair_max as i64 {
            let s = &sgt_in(h1, "x1", "y1") * &sgt_in(h2, "x2", "y2");
            let mut lhs = s.clone();
            for (x, y) in pairs {
                lhs = PairOperator::series(u.clone(), x, y).apply(&lhs)?;
            }
            if let Some(w) = difference_witness(&lhs, &s) {
                return Ok(Some(format!("condition (2), h1 = {h1}, h2 = {h2}: {w}")));
            }
        }
    }
    Ok(None)
}

/// Symmetry, `A(0,0) = 1`, `A(x, iota(x)) = 1` and the fourfold product
/// identity, all up to the truncation order of `a`.
pub fn series_route(a: &BiSeries) -> Result<Option<String>> {
    let r = check_equation(a)?;
    let failed: Vec<&str> = [
        (r.constant_term_one, "constant term"),
        (r.symmetric, "symmetry"),
        (r.diagonal_iota_is_one, "A(x, iota(x)) = 1"),
        (r.fourfold_product, "fourfold product"),
    ]
    .into_iter()
    .filter(|(ok, _)| !ok)
    .map(|(_, name)| name)
    .collect();
    Ok((!failed.is_empty()).then(|| format!("series criteria failed: {}", failed.join(", "))))
}

pub fn check_annihilating(a: &BiSeries, h_max: usize, h_pair_max: usize) -> Result<CheckReport> {
    let order = a.order_x().min(a.order_y());
    let mut r = CheckReport::new("annihilating", json!({ "h_max": h_max, "h_pair_max": h_pair_max, "order": order }));
    if let Some(w) = operator_route(a, h_max, h_pair_max)? {
        r.fail(w);
    }
    if let Some(w) = series_route(a)? {
        r.fail(w);
    }
    Ok(r)
}

/// `Delta_x Delta_y sgt_h = sgt_{h-1}` and `(Delta_x + Delta_y) sgt_h = -sgt_{h-1}`.
pub fn check_bsym(h: usize) -> Result<CheckReport> {
    let mut r = CheckReport::new("bsym", json!({ "h": h }));
    let s = sgt_in(h as i64, "x", "y");
    let prev = sgt_in(h as i64 - 1, "x", "y");
    let dxy = s.delta("x", Direction::Forward).delta("y", Direction::Forward);
    r.compare("Delta_x Delta_y", &dxy, &prev);
    let sum = &s.delta("x", Direction::Forward) + &s.delta("y", Direction::Forward);
    r.compare("Delta_x + Delta_y", &sum, &-&prev);
    Ok(r)
}

/// Coefficients `c[u][v]` of `1 / (1 - 3ab + a b^2 + a^2 b)` for `u <= h1`, `v <= h2`.
fn w12_part3_coeffs(h1: usize, h2: usize) -> Vec<Vec<FieldElem>> {
    let mut c = vec![vec![FieldElem::zero(); h2 + 1]; h1 + 1];
    c[0][0] = FieldElem::one();
    for u in 0..=h1 {
        for v in 0..=h2 {
            if u == 0 && v == 0 {
                continue;
            }
            // c = 1 + (3ab - ab^2 - a^2b) c
            let mut acc = FieldElem::zero();
            if u >= 1 && v >= 1 {
                acc += &c[u - 1][v - 1].scale_int(3);
            }
            if u >= 1 && v >= 2 {
                acc -= &c[u - 1][v - 2];
            }
            if u >= 2 && v >= 1 {
                acc -= &c[u - 2][v - 1];
            }
            c[u][v] = acc;
        }
    }
    c
}

fn z_test_function(z_degree: u32) -> MultiPoly {
    (0..=z_degree).fold(MultiPoly::zero(), |acc, t| {
        &acc + &MultiPoly::var("z").pow(t).scale(&FieldElem::from_int(t as i64 + 1))
    })
}

fn delta_pow(p: &MultiPoly, var: &str, m: usize, dir: Direction) -> MultiPoly {
    (0..m).fold(p.clone(), |acc, _| acc.delta(var, dir))
}

/// The three `W^-1` product formulas on `sgt`: parts (1) and (2) at index `h`
/// with `f(z) = sum_{t <= z_degree} (t+1) z^t`, part (3) at `(h1, h2)`.
pub fn check_w12(h: usize, h1: usize, h2: usize, z_degree: u32) -> Result<CheckReport> {
    let mut r = CheckReport::new("w12", json!({ "h": h, "h1": h1, "h2": h2, "z_degree": z_degree }));
    let f = z_test_function(z_degree);
    let target = &sgt_in(h as i64, "x", "y") * &f;

    let lhs1 = PairOperator::w_inv("y", "z").apply(&PairOperator::w_inv("x", "z").apply(&target)?)?;
    let mut rhs1 = MultiPoly::zero();
    for m in 0..=h {
        let g = delta_pow(&f.shift("z", m as i64), "z", m, Direction::Forward);
        let t = &sgt_in(h as i64 - m as i64, "x", "y") * &g;
        rhs1 = if m % 2 == 0 { &rhs1 + &t } else { &rhs1 - &t };
    }
    r.compare("part 1", &lhs1, &rhs1);

    let lhs2 = PairOperator::w_inv("z", "y").apply(&PairOperator::w_inv("z", "x").apply(&target)?)?;
    let mut rhs2 = MultiPoly::zero();
    for m in 0..=h {
        let g = delta_pow(&f.shift("z", -2 * m as i64 - 2), "z", m, Direction::Forward);
        rhs2 = &rhs2 + &(&sgt_in(h as i64 - m as i64, "x", "y") * &g);
    }
    r.compare("part 2", &lhs2, &rhs2);

    let s = &sgt_in(h1 as i64, "x1", "y1") * &sgt_in(h2 as i64, "x2", "y2");
    let mut lhs3 = s;
    for (x, y) in [("x1", "x2"), ("y1", "x2"), ("x1", "y2"), ("y1", "y2")] {
        lhs3 = PairOperator::w_inv(x, y).apply(&lhs3)?;
    }
    let c = w12_part3_coeffs(h1, h2);
    let mut rhs3 = MultiPoly::zero();
    for (u, row) in c.iter().enumerate() {
        for (v, cuv) in row.iter().enumerate() {
            if cuv.is_zero() {
                continue;
            }
            let t = &sgt_in((h1 - u) as i64, "x1", "y1") * &sgt_in((h2 - v) as i64, "x2", "y2");
            rhs3 = &rhs3 + &t.scale(cuv);
        }
    }
    r.compare("part 3", &lhs3, &rhs3);
    Ok(r)
}

fn check_small(h: usize, n: usize, n_max: usize) -> Result<()> {
    if h > n || n > n_max || n == 0 {
        return domain(format!("need 0 <= h <= n <= {n_max} and n >= 1, got h = {h}, n = {n}"));
    }
    Ok(())
}

/// `S(Delta) overline GT_h = S(delta) overline GT_h` for `S = prod e_{s_j}`.
pub fn check_fund(h: usize, n: usize, s: &[usize]) -> Result<CheckReport> {
    check_small(h, n, 5)?;
    if let Some(&p) = s.iter().find(|&&p| p > n) {
        return domain(format!("e_{p} needs at most {n} variables"));
    }
    let r0 = CheckReport::new("fund", json!({ "h": h, "n": n, "s": s }));
    let base = gtbar_in(h, &k_vars(n))?;
    let ks = k_vars(n);
    let names: Vec<&str> = ks.iter().map(|s| s.as_str()).collect();
    let apply = |dir: Direction| -> Result<MultiPoly> {
        s.iter().try_fold(base.clone(), |acc, &p| elementary_sym_op(&acc, &names, p, dir))
    };
    let mut r = r0;
    r.compare("forward vs backward", &apply(Direction::Forward)?, &apply(Direction::Backward)?);
    Ok(r)
}

fn hidden_series(choice: HiddenChoice, order: usize) -> Result<BiSeries> {
    match choice {
        HiddenChoice::Omit => Ok(BiSeries::one(order, order)),
        HiddenChoice::Series(v, f) => build_hidden_series(v, f, order),
    }
}

/// `prod_i A(Delta_{k_i}, 0)^-1 overline GT_h = overline GT_h`.
pub fn check_one(h: usize, n: usize, choice: HiddenChoice) -> Result<CheckReport> {
    check_small(h, n, 5)?;
    let mut r = CheckReport::new("one", json!({ "h": h, "n": n, "A": choice.id() }));
    let base = gtbar_in(h, &k_vars(n))?;
    let order = (2 * h).max(1);
    let inv = hidden_series(choice, order)?.truncate(order, 0).recip()?;
    let mut p = base.clone();
    for v in k_vars(n) {
        p = apply_difference_operator(&p, &inv.to_poly_in(&v, "unused"));
    }
    r.compare("product of inverses", &p, &base);
    Ok(r)
}

/// `(-1)^i Delta_{k_1..k_i} Delta_{k_j..k_n}` of a strict sum equals the
/// trimmed strict sum with `l_t = k_t` for `t <= i` and `l_t = k_{t+1}` for `t >= j-1`.
pub fn check_eat(i: usize, j: usize, n: usize, sample: Sample) -> Result<CheckReport> {
    // j = i + 1 would leave the summand with n arguments
    if n == 0 || n > 5 || i + 2 > j || j > n + 1 {
        return domain(format!("need 0 <= i, i + 2 <= j <= n + 1 and 1 <= n <= 5, got i = {i}, j = {j}, n = {n}"));
    }
    let mut r = CheckReport::new("eat", json!({ "i": i, "j": j, "n": n, "sample": sample.to_json() }));
    let kv = k_vars(n);
    let lv = vars_of("l", n - 1);
    let a = sample.build(&lv, false)?;

    let mut lhs = strict_sum(&a, &lv, &kv)?;
    for t in (1..=i).chain(j..=n) {
        lhs = lhs.delta(&k_var(t), Direction::Forward);
    }
    if i % 2 == 1 {
        lhs = -lhs;
    }

    let mut rhs = a;
    for t in 1..n {
        if t <= i {
            rhs = rhs.substitute(&lv[t - 1], &MultiPoly::var(&kv[t - 1]));
        } else if t + 1 >= j {
            rhs = rhs.substitute(&lv[t - 1], &MultiPoly::var(&kv[t]));
        }
    }
    for t in i + 1..j.saturating_sub(1) {
        rhs = definite_sum(&rhs, &lv[t - 1], &MultiPoly::var(&kv[t - 1]), &MultiPoly::var_plus(&kv[t], -1))?;
    }
    r.compare("strict sum", &lhs, &rhs);
    Ok(r)
}

/// Boxes of the interval identity for `e_p(E_k)` acting on
/// `prod_i [k_i, k_{i+1} - 1]`, indexed by `(I, e)`.
fn interval_boxes(p: usize, k: &[i64]) -> Vec<(usize, Vec<(i64, i64)>)> {
    let n = k.len();
    let middle: Vec<usize> = (2..n).collect();
    let mut out = Vec::new();
    for size in 0..=middle.len().min(p) {
        for iset in subsets(&middle, size) {
            if iset.iter().any(|x| iset.contains(&(x - 1))) {
                continue;
            }
            let blocked: Vec<usize> = iset.iter().flat_map(|&x| [x, x - 1]).collect();
            let free: Vec<usize> = (1..=n).filter(|t| !blocked.contains(t)).collect();
            for e in subsets(&free, p - size) {
                let ranges: Vec<(i64, i64)> = (1..n)
                    .map(|t| {
                        if iset.contains(&t) {
                            (k[t - 1], k[t - 1])
                        } else if iset.contains(&(t + 1)) {
                            (k[t], k[t])
                        } else if e.contains(&t) {
                            (k[t - 1] + 1, k[t])
                        } else {
                            (k[t - 1], k[t] - 1)
                        }
                    })
                    .collect();
                out.push((size, ranges));
            }
        }
    }
    out
}

/// `e_p(E_k) prod_i [k_i, k_{i+1} - 1]` as a multiset of tuples.
pub fn shifted_boxes(p: usize, k: &[i64]) -> BTreeMap<Vec<i64>, u64> {
    let n = k.len();
    let mut acc = BTreeMap::new();
    for s in subsets(&(1..=n).collect::<Vec<_>>(), p) {
        let kk: Vec<i64> = (1..=n).map(|t| k[t - 1] + i64::from(s.contains(&t))).collect();
        let ranges: Vec<(i64, i64)> = (0..n.saturating_sub(1)).map(|t| (kk[t], kk[t + 1] - 1)).collect();
        add_box(&mut acc, &ranges);
    }
    acc
}

/// The interval identity with the `|I|` odd boxes moved to the left:
/// `e_p(E_k) box + sum_{|I| odd} boxes = sum_{|I| even} boxes`.
pub fn urbanrenewal_multisets(p: usize, k: &[i64]) -> (BTreeMap<Vec<i64>, u64>, BTreeMap<Vec<i64>, u64>) {
    let mut lhs = shifted_boxes(p, k);
    let mut rhs = BTreeMap::new();
    for (size, ranges) in interval_boxes(p, k) {
        add_box(if size % 2 == 1 { &mut lhs } else { &mut rhs }, &ranges);
    }
    (lhs, rhs)
}

/// Right side with every `(I, e)` box taken positively.
pub fn urbanrenewal_unsigned_union(p: usize, k: &[i64]) -> BTreeMap<Vec<i64>, u64> {
    let mut acc = BTreeMap::new();
    for (_, ranges) in interval_boxes(p, k) {
        add_box(&mut acc, &ranges);
    }
    acc
}

fn subsets(items: &[usize], size: usize) -> Vec<Vec<usize>> {
    if size == 0 {
        return vec![vec![]];
    }
    if items.len() < size {
        return vec![];
    }
    let mut out = Vec::new();
    for (idx, &x) in items.iter().enumerate() {
        for mut rest in subsets(&items[idx + 1..], size - 1) {
            rest.insert(0, x);
            out.push(rest);
        }
    }
    out
}

fn add_box(acc: &mut BTreeMap<Vec<i64>, u64>, ranges: &[(i64, i64)]) {
    if ranges.iter().any(|(lo, hi)| lo > hi) {
        return;
    }
    let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        *acc.entry(cur.clone()).or_insert(0) += 1;
        let mut t = cur.len();
        loop {
            if t == 0 {
                return;
            }
            t -= 1;
            if cur[t] < ranges[t].1 {
                cur[t] += 1;
                for (c, r) in cur.iter_mut().zip(ranges).skip(t + 1) {
                    *c = r.0;
                }
                break;
            }
        }
    }
}

/// Part (1): `e_p(E_k)` commutes into a strict sum of `a` vanishing on equal
/// neighbours. Part (2): the signed interval identity on every strictly increasing
/// `k` with entries in `0..=n+3`.
pub fn check_urbanrenewal(p: usize, n: usize, sample: Sample) -> Result<CheckReport> {
    if n < 2 || n > 5 || p > n {
        return domain(format!("need 2 <= n <= 5 and p <= n, got p = {p}, n = {n}"));
    }
    if sample == Sample::Unit && n > 2 {
        return domain("the constant sample does not vanish on equal neighbours");
    }
    let mut r = CheckReport::new("urbanrenewal", json!({ "p": p, "n": n, "sample": sample.to_json() }));
    let kv = k_vars(n);
    let lv = vars_of("l", n - 1);
    let a = sample.build(&lv, true)?;
    let lhs = e_shift(&strict_sum(&a, &lv, &kv)?, &kv, p);
    let inner = &e_shift(&a, &lv, p) + &if p == 0 { MultiPoly::zero() } else { e_shift(&a, &lv, p - 1) };
    let rhs = strict_sum(&inner, &lv, &kv)?;
    r.compare("part 1", &lhs, &rhs);

    let top = n as i64 + 3;
    for k in subsets(&(0..=top as usize).collect::<Vec<_>>(), n) {
        let k: Vec<i64> = k.into_iter().map(|x| x as i64).collect();
        let (l, rr) = urbanrenewal_multisets(p, &k);
        if l != rr {
            let diff = l
                .keys()
                .chain(rr.keys())
                .find(|key| l.get(*key) != rr.get(*key))
                .expect("maps differ");
            r.fail(format!(
                "part 2, k = {k:?}: tuple {diff:?} occurs {} times on the left, {} on the right",
                l.get(diff).unwrap_or(&0),
                rr.get(diff).unwrap_or(&0)
            ));
            break;
        }
    }
    Ok(r)
}

fn dec_poly(h: usize, q2: usize, b: &[bool], kv: &[String], mv: &[String]) -> Result<MultiPoly> {
    if h == 0 {
        return Ok(MultiPoly::one());
    }
    let n = kv.len();
    let i = q2 / 2;
    if i < 1 || i + 1 > n {
        return domain(format!("split index {i} outside 1..{}", n.saturating_sub(1)));
    }
    let lv: Vec<String> = (1..n).map(|t| format!("l{h}_{t}")).collect();
    let sub_q2 = if b[h - 1] { q2 - 2 } else { q2 };
    let mut p = dec_poly(h - 1, sub_q2, &b[..h - 1], &lv, &mv[..h - 1])?;
    let m = MultiPoly::var(&mv[h - 1]);
    for t in 1..n {
        let (lo, hi) = match (t == i, b[h - 1]) {
            (true, false) => (MultiPoly::var(&kv[t - 1]), &m - &MultiPoly::one()),
            (true, true) => (m.clone(), MultiPoly::var_plus(&kv[t], -1)),
            _ => (MultiPoly::var(&kv[t - 1]), MultiPoly::var_plus(&kv[t], -1)),
        };
        p = definite_sum(&p, &lv[t - 1], &lo, &hi)?;
    }
    Ok(p)
}

/// The `2^h` pieces of `overline GT_h` split at the half-integer `q = q2 / 2`
/// sum to `overline GT_h`, and each piece factors into two shifted copies of
/// `overline GT_h` in `(k_1..k_i, m_X)` and `(m_Y, k_{i+1}..k_n)`.
pub fn check_decomposition(h: usize, n: usize, q2: usize) -> Result<CheckReport> {
    check_small(h, n, 5)?;
    if h > 3 {
        return domain("decomposition is limited to h <= 3");
    }
    if q2 % 2 == 0 || q2 < 2 || q2 > 2 * n {
        return domain(format!("q = {q2}/2 must be a half-integer in [1, n]"));
    }
    let i = q2 / 2;
    if h > 0 && (i < h || i + h > n) {
        return domain(format!("the split at q = {q2}/2 leaves the pattern before level {h}; need h <= floor(q) <= n - h"));
    }
    let mut r = CheckReport::new("decomposition", json!({ "h": h, "n": n, "q": format!("{q2}/2") }));
    let kv = k_vars(n);
    let mv = vars_of("m", h);
    let mut total = MultiPoly::zero();
    for mask in 0..1u32 << h {
        let b: Vec<bool> = (0..h).map(|t| mask >> t & 1 == 1).collect();
        let piece = dec_poly(h, q2, &b, &kv, &mv)?;
        total = &total + &piece;

        let xs: Vec<usize> = (1..=h).rev().filter(|&l| !b[l - 1]).collect();
        let ys: Vec<usize> = (1..=h).filter(|&l| b[l - 1]).collect();
        let left_args: Vec<String> = kv[..i].iter().cloned().chain(xs.iter().map(|&x| mv[x - 1].clone())).collect();
        let right_args: Vec<String> = ys.iter().map(|&y| mv[y - 1].clone()).chain(kv[i..].iter().cloned()).collect();
        let mut left = gtbar_in(h, &left_args)?;
        for &x in &xs {
            left = delta_pow(&left, &mv[x - 1], h - x, Direction::Forward);
        }
        let mut right = gtbar_in(h, &right_args)?;
        for &y in &ys {
            right = delta_pow(&right, &mv[y - 1], h - y, Direction::Forward);
            if (h - y) % 2 == 1 {
                right = -right;
            }
        }
        r.compare(&format!("factorization for b = {b:?}"), &piece, &(&left * &right));
    }
    r.compare("sum of pieces", &total, &gtbar_in(h, &kv)?);
    Ok(r)
}

fn binom2(m: i64) -> usize {
    if m < 2 {
        0
    } else {
        (m * (m - 1) / 2) as usize
    }
}

/// Exponent of `(E_{k_{i+1..n}} - id)` in the factorization identity.
pub fn first3_exponent(h: usize, n: usize, i: usize) -> usize {
    let (h, n, i) = (h as i64, n as i64, i as i64);
    binom2(h + 1) - binom2(h - i + 1) - binom2(h + i - n + 1)
}

/// `(prod_{j > i} (1 + X_j) - 1)^e` in the `k` variable names.
fn tail_shift_op(n: usize, i: usize, e: usize) -> MultiPoly {
    let prod = (i + 1..=n).fold(MultiPoly::one(), |acc, j| &acc * &MultiPoly::var_plus(&k_var(j), 1));
    (&prod - &MultiPoly::one()).pow(e as u32)
}

/// Tests `(E_{k_{i+1..n}} - id)^e overline GT_h = c * overline GT_{min(h,i)}(k_1..k_i)
/// overline GT_{min(h,n-i)}(k_{i+1..n})` and reports `c`.
pub fn check_first3(h: usize, n: usize, i: usize) -> Result<CheckReport> {
    check_small(h, n, 5)?;
    if h > 3 || i < 1 || i > n {
        return domain(format!("need h <= 3 and 1 <= i <= n, got h = {h}, i = {i}"));
    }
    let e = first3_exponent(h, n, i);
    let mut r = CheckReport::new("first3", json!({ "h": h, "n": n, "i": i, "exponent": e }));
    let kv = k_vars(n);
    let lhs = apply_difference_operator(&gtbar_in(h, &kv)?, &tail_shift_op(n, i, e));
    let rhs = &gtbar_in(h.min(i), &kv[..i])? * &gtbar_in(h.min(n - i), &kv[i..])?;
    let Some((lead, rc)) = rhs.sorted_terms().into_iter().next() else {
        r.fail("right side is zero".to_string());
        return Ok(r);
    };
    let exps: Vec<(&str, u32)> = rhs.vars().iter().map(|v| v.as_str()).zip(lead.iter().copied()).collect();
    let lc = lhs.coeff(&exps);
    let c = lc.checked_div(rc)?;
    r.compare("proportionality", &lhs, &rhs.scale(&c));
    if r.passed && c.is_zero() {
        r.fail("left side vanishes".to_string());
    }
    if r.passed {
        r.constant = Some(c);
    }
    Ok(r)
}

/// `(E_{k_{i+1..n}} - id)^q` of a strict sum, split into the strict sum of
/// the shifted summand plus boundary terms at `l_i = k_i`.
pub fn check_tail_shift_sum(i: usize, n: usize, q: usize, seed: u64) -> Result<CheckReport> {
    if n < 2 || n > 5 || i < 1 || i >= n || q > 3 {
        return domain(format!("need 1 <= i < n <= 5 and q <= 3, got i = {i}, n = {n}, q = {q}"));
    }
    let mut r = CheckReport::new("tail_shift_sum", json!({ "i": i, "n": n, "q": q, "seed": seed }));
    let kv = k_vars(n);
    let lv = vars_of("l", n - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_poly(&mut rng, &lv);

    let lhs = joint_difference(&strict_sum(&a, &lv, &kv)?, &kv[i..], q);
    let mut rhs = strict_sum(&joint_difference(&a, &lv[i - 1..], q), &lv, &kv)?;
    let tail: Vec<String> = lv[i..].to_vec();
    let with_k: Vec<String> = std::iter::once(kv[i - 1].clone()).chain(tail.iter().cloned()).collect();
    let b = a.substitute(&lv[i - 1], &MultiPoly::var(&kv[i - 1]));
    for p in 0..q {
        let t = joint_difference(&joint_difference(&b, &with_k, q - 1 - p), &tail, p);
        let mut t = shift_all(&t, &tail, 1);
        for s in (1..n).filter(|&s| s != i) {
            t = definite_sum(&t, &lv[s - 1], &MultiPoly::var(&kv[s - 1]), &MultiPoly::var_plus(&kv[s], -1))?;
        }
        rhs = &rhs + &t;
    }
    r.compare("boundary expansion", &lhs, &rhs);
    Ok(r)
}

/// Seeds for `I_{h,n}`: the stated base cases plus the listed elements.
fn ideal_seeds(h: usize, n: usize) -> Vec<(String, MultiPoly)> {
    let kv = k_vars(n);
    let xs: Vec<MultiPoly> = kv.iter().map(|v| MultiPoly::var(v)).collect();
    let mut out = Vec::new();
    if h == 0 {
        out.extend(kv.iter().map(|v| (format!("X_{}", &v[1..]), MultiPoly::var(v))));
    }
    if h + 1 >= n {
        out.extend((1..=n).map(|r| (format!("e_{r}"), elementary(&xs, r))));
    }
    out.extend(listed_elements(h, n));
    out
}

/// The listed members of `I_{h,n}`, named.
fn listed_elements(h: usize, n: usize) -> Vec<(String, MultiPoly)> {
    let kv = k_vars(n);
    let shifted: Vec<MultiPoly> = kv.iter().map(|v| MultiPoly::var_plus(v, 1)).collect();
    let e: Vec<MultiPoly> = (0..=n).map(|r| elementary(&shifted, r)).collect();
    let mut out = Vec::new();
    for i in 0..=n {
        out.push((format!("e_{i}(X+1) - e_{}(X+1)", n - i), &e[i] - &e[n - i]));
    }
    let alt = e.iter().enumerate().fold(MultiPoly::zero(), |acc, (i, p)| if i % 2 == 0 { &acc + p } else { &acc - p });
    out.push(("sum (-1)^i e_i(X+1)".to_string(), alt));
    for (j, v) in kv.iter().enumerate() {
        let d = if j == 0 || j + 1 == n { h + 1 } else { 2 * h + 1 };
        out.push((format!("X_{}^{d}", j + 1), MultiPoly::var(v).pow(d as u32)));
    }
    out
}

/// Reindexes `k1..km` of `r` to `k_{offset+1}..`, skipping position `skip`.
fn embed(r: &MultiPoly, m: usize, targets: &[usize]) -> MultiPoly {
    debug_assert_eq!(targets.len(), m);
    let from = k_vars(m);
    let to: Vec<String> = targets.iter().map(|&t| format!("__{t}")).collect();
    let map: Vec<(&str, &str)> = from.iter().map(|s| s.as_str()).zip(to.iter().map(|s| s.as_str())).collect();
    let tmp = r.rename(&map).expect("fresh names");
    let back: Vec<(String, String)> = targets.iter().map(|&t| (format!("__{t}"), k_var(t))).collect();
    let map: Vec<(&str, &str)> = back.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    tmp.rename(&map).expect("fresh names")
}

/// Every listed element and every closure-property construction applied to
/// seeds of smaller ideals annihilates `GT_h(k_n)`.
pub fn check_ideal_generators(h: usize, n: usize) -> Result<CheckReport> {
    check_small(h, n, 5)?;
    if h > 3 {
        return domain("ideal experiments are limited to h <= 3");
    }
    let mut r = CheckReport::new("ideal_generators", json!({ "h": h, "n": n }));
    let np = gt_newton(h, n)?;
    let mut candidates: Vec<(String, MultiPoly)> = listed_elements(h, n);

    // first closure property: seeds of I_{h-1,n-1}
    if h >= 1 && n >= 2 {
        for (name, seed) in ideal_seeds(h - 1, n - 1) {
            for i in 1..=n {
                let others: Vec<usize> = (1..=n).filter(|&j| j != i).collect();
                let prod = others.iter().fold(MultiPoly::one(), |acc, &j| &acc * &MultiPoly::var(&k_var(j)));
                candidates.push((format!("first closure, i = {i}, seed {name}"), &prod * &embed(&seed, n - 1, &others)));
            }
        }
    }
    // second closure property: seeds of I_{h,n-1}
    if n >= 2 && h < n {
        for (name, seed) in ideal_seeds(h, n - 1) {
            let left: Vec<usize> = (1..n).collect();
            let right: Vec<usize> = (2..=n).collect();
            let xn = MultiPoly::var(&k_var(n)).pow(h as u32);
            let x1 = MultiPoly::var(&k_var(1)).pow(h as u32);
            candidates.push((format!("second closure (right), seed {name}"), &embed(&seed, n - 1, &left) * &xn));
            candidates.push((format!("second closure (left), seed {name}"), &x1 * &embed(&seed, n - 1, &right)));
        }
    }
    // third closure property: seeds of I_{min(h,i),i} and I_{min(h,n-i),n-i}
    for i in 1..n {
        let op = tail_shift_op(n, i, first3_exponent(h, n, i));
        let head: Vec<usize> = (1..=i).collect();
        let tail: Vec<usize> = (i + 1..=n).collect();
        for (name, seed) in ideal_seeds(h.min(i), i) {
            candidates.push((format!("third closure, i = {i}, head seed {name}"), &op * &embed(&seed, i, &head)));
        }
        for (name, seed) in ideal_seeds(h.min(n - i), n - i) {
            candidates.push((format!("third closure, i = {i}, tail seed {name}"), &op * &embed(&seed, n - i, &tail)));
        }
    }

    for (name, poly) in &candidates {
        let out = apply_newton(&np, poly);
        if let Some(w) = difference_witness(&out, &MultiPoly::zero()) {
            r.fail(format!("{name} does not annihilate GT_{h}: {w}"));
            break;
        }
    }
    r.params.insert("candidates".to_string(), json!(candidates.len()));
    Ok(r)
}

fn param_usize(params: &Value, key: &str, default: Option<usize>) -> Result<usize> {
    match params.get(key) {
        Some(v) => v
            .as_u64()
            .map(|x| x as usize)
            .ok_or_else(|| Error::Config(format!("parameter {key} must be a non-negative integer"))),
        None => default.ok_or_else(|| Error::Config(format!("missing parameter {key}"))),
    }
}

fn param_sample(params: &Value) -> Result<Sample> {
    let Some(v) = params.get("sample") else {
        return Ok(Sample::Random(param_usize(params, "seed", Some(0))? as u64));
    };
    if v.as_str() == Some("unit") {
        return Ok(Sample::Unit);
    }
    if let Some(s) = v.get("random").and_then(Value::as_u64) {
        return Ok(Sample::Random(s));
    }
    if let Some(g) = v.get("overline_gt").and_then(Value::as_u64) {
        return Ok(Sample::OverlineGt(g as usize));
    }
    Err(Error::Config(format!("unknown sample {v}")))
}

/// `A` for the annihilating check: a hidden-series id, or a polynomial in `x, y`.
pub fn parse_candidate(text: &str, order: usize) -> Result<BiSeries> {
    match text.parse::<HiddenChoice>() {
        Ok(c) => hidden_series(c, order),
        Err(_) => BiSeries::parse(text, order, order),
    }
}

const KNOWN_CHECKS: [&str; 11] = [
    "annihilating",
    "bsym",
    "w12",
    "fund",
    "one",
    "eat",
    "urbanrenewal",
    "decomposition",
    "first3",
    "tail_shift_sum",
    "ideal_generators",
];

/// Runs the check `id` with JSON parameters.
pub fn run_check(id: &str, params: &Value) -> Result<CheckReport> {
    let u = |k: &str| param_usize(params, k, None);
    let ud = |k: &str, d: usize| param_usize(params, k, Some(d));
    match id {
        "annihilating" => {
            let order = ud("order", 8)?;
            let text = params.get("A").and_then(Value::as_str).unwrap_or("p0a");
            let mut r = check_annihilating(&parse_candidate(text, order)?, ud("h_max", 3)?, ud("h_pair_max", 2)?)?;
            r.params.insert("A".to_string(), json!(text));
            Ok(r)
        }
        "bsym" => check_bsym(u("h")?),
        "w12" => check_w12(u("h")?, ud("h1", 1)?, ud("h2", 1)?, ud("z_degree", 4)? as u32),
        "fund" => {
            let s: Vec<usize> = match params.get("s") {
                Some(Value::Array(a)) => a
                    .iter()
                    .map(|v| v.as_u64().map(|x| x as usize))
                    .collect::<Option<_>>()
                    .ok_or_else(|| Error::Config("s must be a list of integers".into()))?,
                Some(_) => return Err(Error::Config("s must be a list of integers".into())),
                None => vec![1],
            };
            check_fund(u("h")?, u("n")?, &s)
        }
        "one" => {
            let choice: HiddenChoice = params.get("A").and_then(Value::as_str).unwrap_or("p0a").parse()?;
            check_one(u("h")?, u("n")?, choice)
        }
        "eat" => check_eat(u("i")?, u("j")?, u("n")?, param_sample(params)?),
        "urbanrenewal" => check_urbanrenewal(u("p")?, u("n")?, param_sample(params)?),
        "decomposition" => check_decomposition(u("h")?, u("n")?, u("q2")?),
        "first3" => check_first3(u("h")?, u("n")?, u("i")?),
        "tail_shift_sum" => check_tail_shift_sum(u("i")?, u("n")?, u("q")?, ud("seed", 0)? as u64),
        "ideal_generators" => check_ideal_generators(u("h")?, u("n")?),
        _ => Err(Error::Config(format!("unknown check {id}; known: {}", KNOWN_CHECKS.join(", ")))),
    }
}

/// Parameter sets of a named suite, `fast` or `full`.
pub fn suite(name: &str) -> Result<Vec<(String, Value)>> {
    let full = match name {
        "fast" => false,
        "full" => true,
        _ => return Err(Error::Config(format!("unknown suite {name}; use fast or full"))),
    };
    let mut jobs: Vec<(String, Value)> = Vec::new();
    let mut push = |id: &str, v: Value| jobs.push((id.to_string(), v));
    let variants: Vec<&str> = if full { HiddenVariant::ALL.iter().map(|v| v.id()).collect() } else { vec!["p0a"] };
    for v in variants {
        push("annihilating", json!({ "A": v, "order": 8, "h_max": 3, "h_pair_max": 2 }));
    }
    for h in 1..=4 {
        push("bsym", json!({ "h": h }));
    }
    let hmax = if full { 3 } else { 2 };
    for h in 0..=hmax {
        push("w12", json!({ "h": h, "h1": h, "h2": hmax - h, "z_degree": 4 }));
    }
    let nmax = if full { 5 } else { 4 };
    for n in 1..=nmax {
        for h in 0..=n.min(hmax) {
            for p in 0..=n {
                push("fund", json!({ "h": h, "n": n, "s": [p] }));
            }
            if n >= 2 {
                push("fund", json!({ "h": h, "n": n, "s": [2, 1] }));
            }
        }
    }
    for n in 1..=4 {
        for h in 0..=n.min(2) {
            for a in ["p0a", "sqrt_a"] {
                push("one", json!({ "h": h, "n": n, "A": a }));
            }
        }
    }
    for n in 1..=nmax {
        for i in 0..n {
            for j in i + 2..=n + 1 {
                push("eat", json!({ "i": i, "j": j, "n": n, "sample": { "random": (10 * i + j) as u64 } }));
            }
        }
    }
    for n in 2..=nmax {
        for p in 0..=n {
            push("urbanrenewal", json!({ "p": p, "n": n, "sample": { "random": p as u64 } }));
            push("urbanrenewal", json!({ "p": p, "n": n, "sample": { "overline_gt": 1 } }));
        }
    }
    for n in 1..=4 {
        for h in 0..=2.min(n / 2) {
            for q2 in (1..=2 * n).filter(|q| q % 2 == 1) {
                let i = q2 / 2;
                if q2 > 1 && (h == 0 || (i >= h && i + h <= n)) {
                    push("decomposition", json!({ "h": h, "n": n, "q2": q2 }));
                }
            }
        }
    }
    for n in 1..=5 {
        for h in 0..=n.min(2) {
            for i in 1..=n {
                push("first3", json!({ "h": h, "n": n, "i": i }));
            }
        }
    }
    for n in 2..=4 {
        for i in 1..n {
            for q in 1..=3 {
                push("tail_shift_sum", json!({ "i": i, "n": n, "q": q, "seed": q as u64 }));
            }
        }
    }
    for n in 1..=nmax {
        for h in 0..=n.min(hmax) {
            push("ideal_generators", json!({ "h": h, "n": n }));
        }
    }
    Ok(jobs)
}

/// Runs jobs on up to `threads` workers; reports come back in job order.
pub fn run_jobs(jobs: &[(String, Value)], threads: usize) -> Vec<Result<CheckReport>> {
    let next = AtomicUsize::new(0);
    let out: Mutex<Vec<Option<Result<CheckReport>>>> = Mutex::new(vec![None; jobs.len()]);
    std::thread::scope(|s| {
        for _ in 0..threads.max(1) {
            s.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                let Some((id, params)) = jobs.get(idx) else { break };
                let r = run_check(id, params);
                out.lock().expect("report lock")[idx] = Some(r);
            });
        }
    });
    out.into_inner().expect("report lock").into_iter().map(|r| r.expect("every job ran")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::powerseries::HiddenFactor;

    fn choice(id: &str) -> HiddenChoice {
        id.parse().unwrap()
    }

    #[test]
    fn annihilating_examples() {
        for v in HiddenVariant::ALL {
            let a = build_hidden_series(v, v.default_factor(), 6).unwrap();
            let r = check_annihilating(&a, 3, 2).unwrap();
            assert!(r.passed, "{}: {:?}", v.id(), r.witness);
        }
        let a = parse_candidate("1 + x + y", 6).unwrap();
        let w = operator_route(&a, 3, 2).unwrap().unwrap();
        assert!(w.starts_with("condition (1)"), "{w}");
        assert!(series_route(&a).unwrap().is_some());

        let one = parse_candidate("1", 6).unwrap();
        let w = operator_route(&one, 3, 2).unwrap().unwrap();
        assert!(w.starts_with("condition (2)"), "{w}");
        assert!(series_route(&one).unwrap().is_some());
    }

    #[test]
    fn routes_agree() {
        let mut cands: Vec<BiSeries> = ["1", "1 + x + y", "1 - x y", "1 + x y", "(1 + x + y)(1 - x y)"]
            .iter()
            .map(|t| parse_candidate(t, 6).unwrap())
            .collect();
        cands.push(build_hidden_series(HiddenVariant::P0a, HiddenFactor::OneMinusXY, 6).unwrap());
        cands.push(build_hidden_series(HiddenVariant::QA, HiddenFactor::OnePlusXPlusY, 6).unwrap());
        for a in &cands {
            let op = operator_route(a, 3, 2).unwrap().is_none();
            let se = series_route(a).unwrap().is_none();
            assert_eq!(op, se, "{a:?}");
        }
    }

    #[test]
    fn bsym_identities() {
        for h in 0..=4 {
            assert!(check_bsym(h).unwrap().passed, "h = {h}");
        }
    }

    #[test]
    fn w12_parts() {
        let r = check_w12(2, 1, 1, 4).unwrap();
        assert!(r.passed, "{:?}", r.witness);
        let r = check_w12(0, 0, 0, 2).unwrap();
        assert!(r.passed, "{:?}", r.witness);
        let r = check_w12(3, 2, 3, 3).unwrap();
        assert!(r.passed, "{:?}", r.witness);
    }

    #[test]
    fn part3_coefficients() {
        // 1/(1 - 3ab + ab^2 + a^2b) = 1 + 3ab - ab^2 - a^2b + 9a^2b^2 + ...
        let c = w12_part3_coeffs(2, 2);
        assert_eq!(c[1][1], FieldElem::from_int(3));
        assert_eq!(c[1][2], FieldElem::from_int(-1));
        assert_eq!(c[2][1], FieldElem::from_int(-1));
        assert_eq!(c[2][2], FieldElem::from_int(9));
        assert!(c[0][1].is_zero() && c[1][0].is_zero());
    }

    #[test]
    fn fund_examples() {
        assert!(check_fund(1, 3, &[1]).unwrap().passed);
        assert!(check_fund(2, 3, &[0]).unwrap().passed);
        assert!(check_fund(2, 4, &[2, 1]).unwrap().passed);
        assert!(check_fund(2, 4, &[3]).unwrap().passed);
    }

    #[test]
    fn fund_fails_for_non_symmetric_operator() {
        let base = gtbar_in(1, &k_vars(3)).unwrap();
        let f = base.delta("k1", Direction::Forward);
        let b = base.delta("k1", Direction::Backward);
        assert!(difference_witness(&f, &b).is_some());
    }

    #[test]
    fn one_examples() {
        assert!(check_one(1, 3, choice("p0a")).unwrap().passed);
        assert!(check_one(0, 2, choice("p0b")).unwrap().passed);
        assert!(check_one(2, 4, choice("sqrt_a")).unwrap().passed);
    }

    #[test]
    fn eat_examples() {
        assert!(check_eat(0, 4, 3, Sample::Random(1)).unwrap().passed);
        assert!(check_eat(1, 3, 3, Sample::Unit).unwrap().passed);
        for seed in 0..10 {
            let n = 3 + (seed as usize % 3);
            let i = seed as usize % n;
            let j = (i + 2 + seed as usize % 2).min(n + 1);
            let r = check_eat(i, j, n, Sample::Random(seed)).unwrap();
            assert!(r.passed, "i={i} j={j} n={n}: {:?}", r.witness);
        }
    }

    #[test]
    fn eat_detects_wrong_sign() {
        let kv = k_vars(2);
        let lv = vars_of("l", 1);
        let s = strict_sum(&MultiPoly::one(), &lv, &kv).unwrap();
        // Delta_{k1} of (k2 - k1) is -1; the lemma carries the sign
        assert_eq!(s.delta("k1", Direction::Forward), MultiPoly::from_int(-1));
    }

    #[test]
    fn urbanrenewal_examples() {
        let (l, r) = urbanrenewal_multisets(1, &[0, 2, 4]);
        assert_eq!(l, r);
        assert_eq!(l.values().sum::<u64>(), 12);
        // taking the tied boxes positively overcounts (2, 2)
        let u = urbanrenewal_unsigned_union(1, &[0, 2, 4]);
        assert_ne!(u, shifted_boxes(1, &[0, 2, 4]));
        assert_eq!(u.get(&vec![2, 2]), Some(&2));
        for p in 0..=4 {
            let r = check_urbanrenewal(p, 4, Sample::OverlineGt(1)).unwrap();
            assert!(r.passed, "p={p}: {:?}", r.witness);
        }
        let r = check_urbanrenewal(2, 3, Sample::Random(5)).unwrap();
        assert!(r.passed, "{:?}", r.witness);
        assert!(check_urbanrenewal(1, 3, Sample::Unit).is_err());
    }

    #[test]
    fn urbanrenewal_part1_needs_vanishing() {
        let kv = k_vars(3);
        let lv = vars_of("l", 2);
        let a = MultiPoly::one();
        let lhs = e_shift(&strict_sum(&a, &lv, &kv).unwrap(), &kv, 1);
        let inner = &e_shift(&a, &lv, 1) + &a;
        let rhs = strict_sum(&inner, &lv, &kv).unwrap();
        assert_ne!(lhs, rhs);
    }

    #[test]
    fn decomposition_examples() {
        let r = check_decomposition(0, 3, 3).unwrap();
        assert!(r.passed);
        let r = check_decomposition(1, 2, 3).unwrap();
        assert!(r.passed, "{:?}", r.witness);
        let r = check_decomposition(2, 4, 5).unwrap();
        assert!(r.passed, "{:?}", r.witness);
        assert!(check_decomposition(2, 3, 3).is_err());
    }

    #[test]
    fn first3_examples() {
        let r = check_first3(1, 3, 1).unwrap();
        assert!(r.passed, "{:?}", r.witness);
        assert!(r.constant.is_some());
        let r = check_first3(0, 3, 2).unwrap();
        assert_eq!(r.constant, Some(FieldElem::one()));
        let r = check_first3(2, 4, 4).unwrap();
        assert_eq!(first3_exponent(2, 4, 4), 0);
        assert_eq!(r.constant, Some(FieldElem::one()));
    }

    #[test]
    fn exponent_values() {
        assert_eq!(first3_exponent(1, 3, 1), 1);
        assert_eq!(first3_exponent(2, 5, 2), 3);
        assert_eq!(first3_exponent(2, 4, 1), 2);
        assert_eq!(first3_exponent(3, 3, 1), 2);
    }

    #[test]
    fn ideal_examples() {
        for (h, n) in [(0, 2), (1, 3), (2, 3), (3, 3), (2, 4)] {
            let r = check_ideal_generators(h, n).unwrap();
            assert!(r.passed, "h={h} n={n}: {:?}", r.witness);
        }
        // X_1^h alone is not in the ideal for h >= 1
        let np = gt_newton(1, 3).unwrap();
        assert!(!apply_newton(&np, &MultiPoly::var("k1")).is_zero());
    }

    #[test]
    fn tail_shift_identity() {
        for q in 1..=3 {
            let r = check_tail_shift_sum(1, 3, q, 7).unwrap();
            assert!(r.passed, "q={q}: {:?}", r.witness);
        }
    }

    #[test]
    fn run_check_dispatch() {
        let r = run_check("fund", &json!({ "h": 1, "n": 3, "s": [1] })).unwrap();
        assert!(r.passed);
        assert!(run_check("nope", &json!({})).is_err());
        assert!(run_check("fund", &json!({ "h": 1 })).is_err());
        let v = r.to_json();
        assert_eq!(v["check_id"], "fund");
        assert_eq!(v["witness"], Value::Null);
    }

    #[test]
    fn reports_are_deterministic() {
        let p = json!({ "i": 1, "j": 3, "n": 4, "sample": { "random": 3 } });
        assert_eq!(run_check("eat", &p).unwrap(), run_check("eat", &p).unwrap());
    }
}
