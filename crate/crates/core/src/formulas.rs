//! Closed forms for trapezoid counts.
//!
//! `GT_h(k_1, ..., k_n)` comes from a Pfaffian of binomial kernels, and
//! `MT_h` from applying one pair operator per `i < j` to it. Both are kept as
//! polynomials in the bottom row `k1, ..., kn` and specialized afterwards.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use serde_json::json;

use crate::diffops::{st_inv_times, PairOperator};
use crate::error::{domain, Error, Result};
use crate::multipoly::{binom_of, definite_sum, eval_newton, from_newton_all, Direction, FieldElem, MultiPoly};
use crate::pfaffian::{pfaffian, CheckedInt, Ring, TriArray};
use crate::powerseries::{build_hidden_series, HiddenFactor, HiddenVariant};
use crate::trapezoids::enumerate_gt;

/// Name of the `i`-th bottom-row variable (1-based).
pub fn k_var(i: usize) -> String {
    format!("k{i}")
}

pub fn k_vars(n: usize) -> Vec<String> {
    (1..=n).map(k_var).collect()
}

/// `gt_h(x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GtKernel {
    pub h: usize,
    pub poly: MultiPoly,
}

/// `sgt_h(x, y)`, the symmetric part of `gt_h`.
#[derive(Clone, Debug, PartialEq)]
pub struct SgtKernel {
    pub h: i64,
    pub poly: MultiPoly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    PfaffianEven,
    OddReduction,
    Weyl,
    OperatorFormula,
    BruteForce,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CountValue {
    Integer(BigInt),
    Polynomial(MultiPoly),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CountResult {
    pub value: CountValue,
    pub provenance: Provenance,
}

impl CountResult {
    pub fn integer(&self) -> Option<&BigInt> {
        match &self.value {
            CountValue::Integer(v) => Some(v),
            CountValue::Polynomial(_) => None,
        }
    }

    pub fn polynomial(&self) -> Option<&MultiPoly> {
        match &self.value {
            CountValue::Polynomial(p) => Some(p),
            CountValue::Integer(_) => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let provenance = serde_json::to_value(self.provenance).expect("plain enum");
        match &self.value {
            CountValue::Integer(v) => json!({ "value": v.to_string(), "provenance": provenance }),
            CountValue::Polynomial(p) => json!({
                "polynomial": p.to_json(),
                "text": p.to_string(),
                "terms": p.num_terms(),
                "provenance": provenance,
            }),
        }
    }
}

impl fmt::Display for CountValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountValue::Integer(v) => write!(f, "{v}"),
            CountValue::Polynomial(p) => write!(f, "{p}"),
        }
    }
}

/// Which hidden series enters the operator formula; `Omit` uses `st^-1` alone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HiddenChoice {
    Omit,
    Series(HiddenVariant, HiddenFactor),
}

impl HiddenChoice {
    pub fn id(&self) -> String {
        match self {
            HiddenChoice::Omit => "none".to_string(),
            HiddenChoice::Series(v, f) if *f == v.default_factor() => v.id().to_string(),
            HiddenChoice::Series(v, HiddenFactor::OnePlusXPlusY) => format!("{}+one_plus_x_plus_y", v.id()),
            HiddenChoice::Series(v, HiddenFactor::OneMinusXY) => format!("{}+one_minus_xy", v.id()),
        }
    }
}

impl FromStr for HiddenChoice {
    type Err = Error;

    /// `none`, a variant id, or `variant+factor`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "none" {
            return Ok(HiddenChoice::Omit);
        }
        match s.split_once('+') {
            Some((v, f)) => Ok(HiddenChoice::Series(v.parse()?, f.parse()?)),
            None => {
                let v: HiddenVariant = s.parse()?;
                Ok(HiddenChoice::Series(v, v.default_factor()))
            }
        }
    }
}

fn cache<K, V>(cell: &'static OnceLock<Mutex<HashMap<K, V>>>) -> &'static Mutex<HashMap<K, V>> {
    cell.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached<K, V>(
    cell: &'static OnceLock<Mutex<HashMap<K, V>>>,
    key: K,
    build: impl FnOnce() -> Result<V>,
) -> Result<V>
where
    K: std::hash::Hash + Eq,
    V: Clone,
{
    if let Some(v) = cache(cell).lock().expect("cache lock").get(&key) {
        return Ok(v.clone());
    }
    let v = build()?;
    cache(cell).lock().expect("cache lock").insert(key, v.clone());
    Ok(v)
}

static KERNELS: OnceLock<Mutex<HashMap<usize, MultiPoly>>> = OnceLock::new();
static GT_NEWTON: OnceLock<Mutex<HashMap<(usize, usize), MultiPoly>>> = OnceLock::new();
static MT_NEWTON: OnceLock<Mutex<HashMap<(usize, usize, HiddenChoice), MultiPoly>>> = OnceLock::new();

/// `gt_h(x, y) = sum_{p=h}^{x-1} [C(x-p+h-1,h) C(y-p+h-2,h) - C(x-p+h-2,h) C(y-p+h-1,h)]`,
/// summed in `q = x - p` over `1..=x-h`.
pub fn gt_kernel(h: usize) -> GtKernel {
    let poly = cached(&KERNELS, h, || {
        if h == 0 {
            return Ok(MultiPoly::one());
        }
        let hh = h as i64;
        let q = MultiPoly::var("q");
        let yx = &MultiPoly::var("y") - &MultiPoly::var("x");
        let c = |shift: i64| binom_of(&(&q + &MultiPoly::from_int(shift)), h as u32);
        let d = |shift: i64| binom_of(&(&(&q + &yx) + &MultiPoly::from_int(shift)), h as u32);
        let summand = &(&c(hh - 1) * &d(hh - 2)) - &(&c(hh - 2) * &d(hh - 1));
        let upper = MultiPoly::var_plus("x", -hh);
        definite_sum(&summand, "q", &MultiPoly::one(), &upper)
    })
    .expect("bounds do not involve the summation variable");
    GtKernel { h, poly }
}

/// `(a)_m = a (a+1) ... (a+m-1)`.
fn pochhammer(a: &MultiPoly, m: u32) -> MultiPoly {
    (0..m).fold(MultiPoly::one(), |acc, t| &acc * &(a + &MultiPoly::from_int(t as i64)))
}

/// `sgt_h = (-1)^h / (2h)! (x-y-h+1)_{2h-1} (x-y)`; `sgt_0 = 1`, zero for `h < 0`.
pub fn sgt(h: i64) -> SgtKernel {
    let poly = match h {
        h if h < 0 => MultiPoly::zero(),
        0 => MultiPoly::one(),
        _ => {
            let d = &MultiPoly::var("x") - &MultiPoly::var("y");
            let base = &d + &MultiPoly::from_int(1 - h);
            let fact: BigInt = (1..=2 * h).map(BigInt::from).product();
            let mut c = FieldElem::from_bigint(fact).inv().expect("nonzero");
            if h % 2 == 1 {
                c = -c;
            }
            (&pochhammer(&base, (2 * h - 1) as u32) * &d).scale(&c)
        }
    };
    SgtKernel { h, poly }
}

fn check_hn(h: usize, n: usize) -> Result<()> {
    if h > n {
        return domain(format!("h = {h} exceeds n = {n}"));
    }
    Ok(())
}

fn check_bottom(n: usize, bottom: &[i64]) -> Result<()> {
    if bottom.len() != n {
        return domain(format!("bottom row has {} entries, expected {n}", bottom.len()));
    }
    Ok(())
}

fn int_binom(a: i64, m: u32) -> BigInt {
    let mut acc = BigRational::one();
    for t in 0..m as i64 {
        acc = acc * BigRational::new(BigInt::from(a - t), BigInt::from(t + 1));
    }
    acc.to_integer()
}

/// Integer values of `gt_h(a, b)` and `C(a, m)` for `0 <= a, b < size`.
struct KernelTable {
    size: usize,
    h: usize,
    vals: Vec<BigInt>,
    small: Vec<Option<i128>>,
    binoms: Vec<BigInt>,
    small_binoms: Vec<Option<i128>>,
}

impl KernelTable {
    fn new(h: usize, size: usize) -> Self {
        let k = gt_kernel(h).poly.with_vars(&["x".to_string(), "y".to_string()]);
        let mut vals = Vec::with_capacity(size * size);
        for a in 0..size as i64 {
            for b in 0..size as i64 {
                vals.push(k.eval_slice(&[a, b]).to_integer().expect("gt_h is integer valued"));
            }
        }
        let binoms: Vec<BigInt> =
            (0..size as i64).flat_map(|a| (0..=h as u32).map(move |m| int_binom(a, m))).collect();
        KernelTable {
            size,
            h,
            small: vals.iter().map(ToPrimitive::to_i128).collect(),
            small_binoms: binoms.iter().map(ToPrimitive::to_i128).collect(),
            vals,
            binoms,
        }
    }

    fn at(&self, a: i64, b: i64) -> usize {
        a as usize * self.size + b as usize
    }

    fn binom_at(&self, a: i64, m: u32) -> usize {
        a as usize * (self.h + 1) + m as usize
    }
}

/// The block Pfaffian at `args[i] = k_i + i`.
fn block_pf<T: Ring>(h: usize, args: &[i64], entry: impl Fn(i64, i64) -> T, binom: impl Fn(i64, u32) -> T) -> T {
    let m = args.len();
    let arr = TriArray::from_fn(m + h, |i, j| {
        if j < m {
            entry(args[i], args[j])
        } else if i < m {
            // column n + c (1-based c = j - m + 1) holds C(k_i + i, h - c)
            binom(args[i], (h - (j - m + 1)) as u32)
        } else {
            T::zero()
        }
    })
    .expect("even order");
    pfaffian(&arr)
}

fn block_pf_int(h: usize, args: &[i64], t: &KernelTable) -> BigInt {
    let small = block_pf(
        h,
        args,
        |a, b| CheckedInt(t.small[t.at(a, b)]),
        |a, m| CheckedInt(t.small_binoms[t.binom_at(a, m)]),
    );
    match small.0 {
        Some(v) => BigInt::from(v),
        None => block_pf(h, args, |a, b| t.vals[t.at(a, b)].clone(), |a, m| t.binoms[t.binom_at(a, m)].clone()),
    }
}

/// Per-variable degree bounds of the block Pfaffian in `m` variables.
fn pf_degree_bounds(h: usize, m: usize) -> Vec<usize> {
    let k = gt_kernel(h).poly;
    let (dx, dy) = (k.degree_in("x") as usize, k.degree_in("y") as usize);
    let db = h.saturating_sub(1);
    (1..=m)
        .map(|i| {
            let as_x = if i < m { dx } else { 0 };
            let as_y = if i > 1 { dy } else { 0 };
            as_x.max(as_y).max(if h > 0 { db } else { 0 })
        })
        .collect()
}

/// Newton coefficients `Delta^alpha p(0)` from the values of `p` on the box
/// `prod 0..=d_i`, stored row-major with the last variable fastest.
fn forward_differences(vals: &mut [BigInt], dims: &[usize]) {
    let mut stride = 1;
    for axis in (0..dims.len()).rev() {
        let len = dims[axis] + 1;
        let block = stride * len;
        for start in (0..vals.len()).step_by(block) {
            for off in 0..stride {
                let base = start + off;
                for s in 1..len {
                    for j in (s..len).rev() {
                        let prev = vals[base + (j - 1) * stride].clone();
                        vals[base + j * stride] -= prev;
                    }
                }
            }
        }
        stride = block;
    }
}

fn grid_points(dims: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = dims.iter().map(|d| d + 1).product();
    (0..total).map(move |mut idx| {
        let mut p = vec![0; dims.len()];
        for axis in (0..dims.len()).rev() {
            p[axis] = idx % (dims[axis] + 1);
            idx /= dims[axis] + 1;
        }
        p
    })
}

fn newton_from_grid(dims: &[usize], vals: Vec<BigInt>) -> BTreeMap<Vec<u32>, FieldElem> {
    grid_points(dims)
        .zip(vals)
        .filter(|(_, v)| !Zero::is_zero(v))
        .map(|(p, v)| (p.into_iter().map(|e| e as u32).collect(), FieldElem::from_bigint(v)))
        .collect()
}

/// `GT_h(k_1..k_n)` in the binomial basis `prod C(k_i, alpha_i)`, obtained by
/// exact interpolation of integer Pfaffians.
pub fn gt_newton(h: usize, n: usize) -> Result<MultiPoly> {
    check_hn(h, n)?;
    cached(&GT_NEWTON, (h, n), || {
        let odd = (h + n) % 2 == 1;
        let m = if odd { n + 1 } else { n };
        let mut dims = pf_degree_bounds(h, m);
        if odd {
            dims[m - 1] = dims[m - 1].max(h);
        }
        let dmax = dims.iter().copied().max().unwrap_or(0);
        let table = KernelTable::new(h, dmax + m + 1);
        let mut vals: Vec<BigInt> = grid_points(&dims)
            .map(|p| {
                let args: Vec<i64> = p.iter().enumerate().map(|(i, &x)| x as i64 + i as i64 + 1).collect();
                block_pf_int(h, &args, &table)
            })
            .collect();
        forward_differences(&mut vals, &dims);
        let mut terms = newton_from_grid(&dims, vals);
        if odd {
            // Delta^h in k_{n+1} lowers its binomial index by h; then k_{n+1} = 0
            let mut reduced = BTreeMap::new();
            for (mut e, c) in terms {
                let last = e.pop().expect("m >= 1") as usize;
                if last < h {
                    continue;
                }
                if last > h {
                    return Err(Error::Domain(format!(
                        "reduction for (h, n) = ({h}, {n}) still depends on the extra variable"
                    )));
                }
                reduced.insert(e, c);
            }
            terms = reduced;
        }
        Ok(MultiPoly::from_raw(k_vars(n), terms))
    })
}

/// `GT_h(k_1..k_n)` in monomial form.
pub fn gt_polynomial(h: usize, n: usize) -> Result<MultiPoly> {
    Ok(from_newton_all(&gt_newton(h, n)?))
}

/// The block Pfaffian built from polynomial entries; the odd case applies
/// `Delta^h` in `k_{n+1}` and substitutes `k_{n+1} = 0`.
pub fn gt_polynomial_direct(h: usize, n: usize) -> Result<MultiPoly> {
    check_hn(h, n)?;
    let odd = (h + n) % 2 == 1;
    let m = if odd { n + 1 } else { n };
    let kernel = gt_kernel(h).poly;
    let shifted: Vec<MultiPoly> = (1..=m).map(|i| MultiPoly::var_plus(&k_var(i), i as i64)).collect();
    let arr = TriArray::from_fn(m + h, |i, j| {
        if j < m {
            kernel.substitute("x", &shifted[i]).substitute("y", &shifted[j])
        } else if i < m {
            binom_of(&shifted[i], (h - (j - m + 1)) as u32)
        } else {
            MultiPoly::zero()
        }
    })?;
    let mut p = pfaffian(&arr);
    if odd {
        let extra = k_var(n + 1);
        for _ in 0..h {
            p = p.delta(&extra, Direction::Forward);
        }
        if p.degree_in(&extra) != 0 {
            return domain(format!("reduction for (h, n) = ({h}, {n}) still depends on {extra}"));
        }
        p = p.specialize(&extra, 0);
    }
    Ok(p.with_vars(&k_vars(n)))
}

fn eval_at(p: &MultiPoly, bottom: &[i64]) -> Result<BigInt> {
    let assignment: BTreeMap<String, i64> = bottom.iter().enumerate().map(|(i, &v)| (k_var(i + 1), v)).collect();
    p.eval_integer(&assignment)
}

/// Number of `(h, n)` GT trapezoids, as a polynomial or at a bottom row.
pub fn gt_count(h: usize, n: usize, symbolic: bool, bottom: Option<&[i64]>) -> Result<CountResult> {
    check_hn(h, n)?;
    let provenance = if (h + n) % 2 == 0 { Provenance::PfaffianEven } else { Provenance::OddReduction };
    if symbolic {
        return Ok(CountResult { value: CountValue::Polynomial(gt_polynomial(h, n)?), provenance });
    }
    let bottom = require_bottom(bottom)?;
    check_bottom(n, bottom)?;
    let value = gt_at(h, bottom);
    Ok(CountResult { value: CountValue::Integer(value), provenance })
}

/// `GT_h` at one bottom row straight from integer Pfaffians.
fn gt_at(h: usize, bottom: &[i64]) -> BigInt {
    let n = bottom.len();
    let args = |extra: Option<i64>| -> Vec<i64> {
        bottom.iter().copied().chain(extra).enumerate().map(|(i, k)| k + i as i64 + 1).collect()
    };
    let span = |a: &[i64]| a.iter().map(|v| v.unsigned_abs() as usize).max().unwrap_or(0) + 1;
    if (h + n) % 2 == 0 {
        let a = args(None);
        if a.iter().all(|&v| v >= 0) {
            return block_pf_int(h, &a, &KernelTable::new(h, span(&a)));
        }
        return eval_at(&gt_polynomial(h, n).expect("h <= n"), bottom).expect("integer valued");
    }
    // Delta^h at k_{n+1} = 0 is an alternating sum over k_{n+1} = 0..=h
    let mut acc: BigInt = Zero::zero();
    for t in 0..=h as i64 {
        let a = args(Some(t));
        if a.iter().any(|&v| v < 0) {
            return eval_at(&gt_polynomial(h, n).expect("h <= n"), bottom).expect("integer valued");
        }
        let v = block_pf_int(h, &a, &KernelTable::new(h, span(&a)));
        let c = int_binom(h as i64, t as u32);
        if (h as i64 - t) % 2 == 0 {
            acc += c * v;
        } else {
            acc -= c * v;
        }
    }
    acc
}

fn require_bottom(bottom: Option<&[i64]>) -> Result<&[i64]> {
    bottom.ok_or_else(|| Error::Config("a bottom row is required unless the count is symbolic".into()))
}

/// `prod_{i<j} (k_j - k_i + j - i) / (j - i)`.
pub fn gt_weyl(n: usize, bottom: Option<&[i64]>) -> Result<CountResult> {
    if n == 0 {
        return domain("the Weyl product needs n >= 1");
    }
    let value = match bottom {
        None => {
            let mut p = MultiPoly::one();
            for i in 1..=n {
                for j in i + 1..=n {
                    let f = &(&MultiPoly::var(&k_var(j)) - &MultiPoly::var(&k_var(i)))
                        + &MultiPoly::from_int((j - i) as i64);
                    p = (&p * &f).scale(&FieldElem::from_ratio(1, (j - i) as i64));
                }
            }
            CountValue::Polynomial(p.with_vars(&k_vars(n)))
        }
        Some(b) => {
            check_bottom(n, b)?;
            let mut acc = BigRational::one();
            for i in 0..n {
                for j in i + 1..n {
                    let num = BigInt::from(b[j] - b[i] + (j - i) as i64);
                    acc = acc * BigRational::new(num, BigInt::from((j - i) as i64));
                }
            }
            CountValue::Integer(acc.to_integer())
        }
    };
    Ok(CountResult { value, provenance: Provenance::Weyl })
}

/// `st^-1 A` truncated at `order`, or `st^-1` alone.
fn pair_symbol_operator(choice: HiddenChoice, order: usize, x: &str, y: &str) -> Result<PairOperator> {
    Ok(match choice {
        HiddenChoice::Omit => PairOperator::st_inv(x, y),
        HiddenChoice::Series(v, f) => {
            let a = build_hidden_series(v, f, order)?;
            PairOperator::series(st_inv_times(&a)?, x, y)
        }
    })
}

/// `prod_{i<j} st^-1_{k_i,k_j} A_{k_i,k_j} GT_h(k_n)` in binomial form.
///
/// Pairs are applied in lexicographic order; each series is truncated at the
/// current degrees of the working polynomial.
pub fn mt_newton(h: usize, n: usize, choice: HiddenChoice) -> Result<MultiPoly> {
    check_hn(h, n)?;
    cached(&MT_NEWTON, (h, n, choice), || {
        let mut p = gt_newton(h, n)?;
        let order = k_vars(n).iter().map(|v| p.degree_in(v) as usize).max().unwrap_or(0);
        let template = pair_symbol_operator(choice, order, "x", "y")?;
        for i in 1..=n {
            for j in i + 1..=n {
                let op = PairOperator::new(template.kind.clone(), &k_var(i), &k_var(j));
                p = op.apply_newton(&p)?;
            }
        }
        Ok(p.with_vars(&k_vars(n)))
    })
}

/// `MT_h(k_1..k_n)` in monomial form; the rho part must vanish.
pub fn mt_polynomial(h: usize, n: usize, choice: HiddenChoice) -> Result<MultiPoly> {
    let p = from_newton_all(&mt_newton(h, n, choice)?);
    if !p.is_rational() {
        return domain(format!("operator formula for (h, n) = ({h}, {n}) left a non-rational part"));
    }
    Ok(p)
}

/// Number of `(h, n)` monotone trapezoids from the operator formula.
pub fn mt_count(
    h: usize,
    n: usize,
    choice: HiddenChoice,
    symbolic: bool,
    bottom: Option<&[i64]>,
) -> Result<CountResult> {
    check_hn(h, n)?;
    let provenance = Provenance::OperatorFormula;
    if symbolic {
        return Ok(CountResult { value: CountValue::Polynomial(mt_polynomial(h, n, choice)?), provenance });
    }
    let bottom = require_bottom(bottom)?;
    check_bottom(n, bottom)?;
    if !bottom.windows(2).all(|w| w[0] < w[1]) {
        return domain("monotone counts need a strictly increasing bottom row");
    }
    let np = mt_newton(h, n, choice)?;
    let vals: Vec<i64> = np.vars().iter().map(|v| bottom[v[1..].parse::<usize>().expect("k var") - 1]).collect();
    let v = eval_newton(&np, &vals);
    if !v.is_rational() {
        return domain("operator formula left a non-rational value");
    }
    let value = v.to_integer().ok_or_else(|| Error::Domain(format!("non-integer count {v}")))?;
    Ok(CountResult { value: CountValue::Integer(value), provenance })
}

/// `GT_h(k_1 - 1, ..., k_n - n)`.
pub fn overline_gt(h: usize, n: usize, symbolic: bool, bottom: Option<&[i64]>) -> Result<CountResult> {
    check_hn(h, n)?;
    let gt = gt_count(h, n, true, None)?;
    let mut p = gt.polynomial().expect("symbolic").clone();
    for i in 1..=n {
        p = p.shift(&k_var(i), -(i as i64));
    }
    let value = if symbolic {
        CountValue::Polynomial(p)
    } else {
        let b = require_bottom(bottom)?;
        check_bottom(n, b)?;
        CountValue::Integer(eval_at(&p, b)?)
    };
    Ok(CountResult { value, provenance: gt.provenance })
}

/// Enumeration count wrapped as a [`CountResult`].
pub fn brute_force_count(h: usize, bottom: &[i64], monotone: bool) -> Result<CountResult> {
    let c = enumerate_gt(h, bottom, monotone)?;
    Ok(CountResult { value: CountValue::Integer(BigInt::from(c)), provenance: Provenance::BruteForce })
}
