use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::field::FieldElem;
use crate::error::{domain, Error, Result};

/// Sparse polynomial over Q(rho) in named variables.
///
/// Variables are kept in lexical order and every exponent vector has one
/// entry per variable. Zero coefficients are never stored.
#[derive(Clone, Default)]
pub struct MultiPoly {
    vars: Vec<String>,
    terms: BTreeMap<Vec<u32>, FieldElem>,
}

/// Equality is by value: variables that do not occur are ignored.
impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        if self.vars == other.vars {
            self.terms == other.terms
        } else {
            let (a, b) = (self.trim(), other.trim());
            a.vars == b.vars && a.terms == b.terms
        }
    }
}

impl Eq for MultiPoly {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyOp {
    Add,
    Sub,
    Mul,
}

/// Direction of a difference operator: forward is `E - id`, backward is `E^-1 - id`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

pub fn poly_arith(p: &MultiPoly, q: &MultiPoly, op: PolyOp) -> MultiPoly {
    match op {
        PolyOp::Add => p + q,
        PolyOp::Sub => p - q,
        PolyOp::Mul => p * q,
    }
}

fn union_vars(a: &[String], b: &[String]) -> Vec<String> {
    let mut v: Vec<String> = a.iter().chain(b.iter()).cloned().collect();
    v.sort();
    v.dedup();
    v
}

impl MultiPoly {
    pub fn zero() -> Self {
        MultiPoly::default()
    }

    pub fn one() -> Self {
        MultiPoly::constant(FieldElem::one())
    }

    pub fn constant(c: FieldElem) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c);
        }
        MultiPoly { vars: Vec::new(), terms }
    }

    pub fn from_int(n: i64) -> Self {
        MultiPoly::constant(FieldElem::from_int(n))
    }

    pub fn var(name: &str) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![1], FieldElem::one());
        MultiPoly { vars: vec![name.to_string()], terms }
    }

    /// `name + offset`, the usual argument of a shifted kernel.
    pub fn var_plus(name: &str, offset: i64) -> Self {
        &MultiPoly::var(name) + &MultiPoly::from_int(offset)
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs in the given
    /// variable order. Repeated exponents are summed.
    pub fn from_terms<I>(vars: &[&str], terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, FieldElem)>,
    {
        let mut sorted: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != vars.len() {
            return domain("duplicate variable name");
        }
        let perm: Vec<usize> = sorted.iter().map(|s| vars.iter().position(|v| v == s).unwrap()).collect();
        let mut out = MultiPoly { vars: sorted, terms: BTreeMap::new() };
        for (e, c) in terms {
            if e.len() != vars.len() {
                return domain(format!("exponent vector of length {} for {} variables", e.len(), vars.len()));
            }
            let e2: Vec<u32> = perm.iter().map(|&i| e[i]).collect();
            out.add_term(e2, &c);
        }
        Ok(out.trim())
    }

    pub(crate) fn from_raw(vars: Vec<String>, terms: BTreeMap<Vec<u32>, FieldElem>) -> Self {
        debug_assert!(vars.windows(2).all(|w| w[0] < w[1]));
        MultiPoly { vars, terms }
    }

    pub(crate) fn raw_terms(&self) -> &BTreeMap<Vec<u32>, FieldElem> {
        &self.terms
    }

    pub(crate) fn add_term(&mut self, e: Vec<u32>, c: &FieldElem) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.binary_search_by(|v| v.as_str().cmp(name)).ok()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &FieldElem)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value if the polynomial is constant.
    pub fn as_constant(&self) -> Option<FieldElem> {
        match self.terms.len() {
            0 => Some(FieldElem::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                e.iter().all(|&x| x == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn coeff(&self, exps: &[(&str, u32)]) -> FieldElem {
        let mut e = vec![0u32; self.vars.len()];
        for (name, k) in exps {
            match self.var_index(name) {
                Some(i) => e[i] = *k,
                None if *k == 0 => {}
                None => return FieldElem::zero(),
            }
        }
        self.terms.get(&e).cloned().unwrap_or_default()
    }

    pub fn degree_in(&self, var: &str) -> u32 {
        match self.var_index(var) {
            Some(i) => self.terms.keys().map(|e| e[i]).max().unwrap_or(0),
            None => 0,
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// True when every coefficient has zero rho-part.
    pub fn is_rational(&self) -> bool {
        self.terms.values().all(|c| c.is_rational())
    }

    /// Re-expresses the polynomial over a superset of its variables.
    pub fn with_vars(&self, vars: &[String]) -> MultiPoly {
        if vars == self.vars.as_slice() {
            return self.clone();
        }
        let map: Vec<usize> = self
            .vars
            .iter()
            .map(|v| vars.iter().position(|w| w == v).expect("variable missing from superset"))
            .collect();
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mut e2 = vec![0u32; vars.len()];
                for (i, &k) in e.iter().enumerate() {
                    e2[map[i]] = k;
                }
                (e2, c.clone())
            })
            .collect();
        MultiPoly { vars: vars.to_vec(), terms }
    }

    /// Adds `name` to the variable list without changing the value.
    pub fn with_var(&self, name: &str) -> MultiPoly {
        if self.var_index(name).is_some() {
            return self.clone();
        }
        self.with_vars(&union_vars(&self.vars, &[name.to_string()]))
    }

    /// Drops variables that do not occur.
    pub fn trim(&self) -> MultiPoly {
        let keep: Vec<usize> = (0..self.vars.len())
            .filter(|&i| self.terms.keys().any(|e| e[i] > 0))
            .collect();
        if keep.len() == self.vars.len() {
            return self.clone();
        }
        let vars = keep.iter().map(|&i| self.vars[i].clone()).collect();
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| (keep.iter().map(|&i| e[i]).collect(), c.clone()))
            .collect();
        MultiPoly { vars, terms }
    }

    pub fn scale(&self, c: &FieldElem) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly { vars: self.vars.clone(), terms: BTreeMap::new() };
        }
        let terms = self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect();
        MultiPoly { vars: self.vars.clone(), terms }
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        let mut acc = MultiPoly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn map_coeffs(&self, f: impl Fn(&FieldElem) -> FieldElem) -> MultiPoly {
        let mut out = MultiPoly { vars: self.vars.clone(), terms: BTreeMap::new() };
        for (e, c) in &self.terms {
            out.add_term(e.clone(), &f(c));
        }
        out
    }

    /// Substitution `var -> var + amount`.
    pub fn shift(&self, var: &str, amount: i64) -> MultiPoly {
        let Some(i) = self.var_index(var) else {
            return self.clone();
        };
        if amount == 0 {
            return self.clone();
        }
        let a = FieldElem::from_int(amount);
        let maxdeg = self.degree_in(var) as usize;
        let mut apow = vec![FieldElem::one()];
        for k in 1..=maxdeg {
            apow.push(&apow[k - 1] * &a);
        }
        let binom = binomial_table(maxdeg);
        let mut out = MultiPoly { vars: self.vars.clone(), terms: BTreeMap::new() };
        for (e, c) in &self.terms {
            let m = e[i] as usize;
            for j in 0..=m {
                let mut e2 = e.clone();
                e2[i] = j as u32;
                let f = &(c * &apow[m - j]) * &FieldElem::from_bigint(binom[m][j].clone());
                out.add_term(e2, &f);
            }
        }
        out
    }

    /// Forward (`E - id`) or backward (`E^-1 - id`) difference in `var`.
    pub fn delta(&self, var: &str, dir: Direction) -> MultiPoly {
        let amount = match dir {
            Direction::Forward => 1,
            Direction::Backward => -1,
        };
        &self.shift(var, amount) - self
    }

    /// Replaces `var` by the polynomial `value`.
    pub fn substitute(&self, var: &str, value: &MultiPoly) -> MultiPoly {
        let Some(i) = self.var_index(var) else {
            return self.clone();
        };
        let mut rest: Vec<String> = self.vars.clone();
        rest.remove(i);
        let mut groups: BTreeMap<u32, MultiPoly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            let m = e2.remove(i);
            groups
                .entry(m)
                .or_insert_with(|| MultiPoly { vars: rest.clone(), terms: BTreeMap::new() })
                .add_term(e2, c);
        }
        let mut out = MultiPoly::zero();
        let mut power = MultiPoly::one();
        let mut at = 0u32;
        for (m, g) in groups {
            while at < m {
                power = &power * value;
                at += 1;
            }
            out = &out + &(&g * &power);
        }
        out
    }

    /// Replaces `var` by an integer.
    pub fn specialize(&self, var: &str, value: i64) -> MultiPoly {
        self.substitute(var, &MultiPoly::from_int(value)).with_vars_removed(var)
    }

    fn with_vars_removed(&self, var: &str) -> MultiPoly {
        match self.var_index(var) {
            Some(i) if self.terms.keys().all(|e| e[i] == 0) => {
                let mut vars = self.vars.clone();
                vars.remove(i);
                let terms = self
                    .terms
                    .iter()
                    .map(|(e, c)| {
                        let mut e2 = e.clone();
                        e2.remove(i);
                        (e2, c.clone())
                    })
                    .collect();
                MultiPoly { vars, terms }
            }
            _ => self.clone(),
        }
    }

    /// Renames variables; the mapping must stay injective.
    pub fn rename(&self, map: &[(&str, &str)]) -> Result<MultiPoly> {
        let new_names: Vec<String> = self
            .vars
            .iter()
            .map(|v| {
                map.iter()
                    .find(|(a, _)| a == v)
                    .map(|(_, b)| b.to_string())
                    .unwrap_or_else(|| v.clone())
            })
            .collect();
        let names: Vec<&str> = new_names.iter().map(|s| s.as_str()).collect();
        MultiPoly::from_terms(&names, self.terms.iter().map(|(e, c)| (e.clone(), c.clone())))
    }

    /// Exact evaluation at an integer point.
    pub fn eval(&self, assignment: &BTreeMap<String, i64>) -> Result<FieldElem> {
        let mut vals = Vec::with_capacity(self.vars.len());
        for v in &self.vars {
            match assignment.get(v) {
                Some(&x) => vals.push(x),
                None => {
                    if self.degree_in(v) == 0 {
                        vals.push(0);
                    } else {
                        return Err(Error::Domain(format!("no value for variable {v}")));
                    }
                }
            }
        }
        Ok(self.eval_slice(&vals))
    }

    /// Evaluates with values given in the polynomial's own variable order.
    pub fn eval_slice(&self, vals: &[i64]) -> FieldElem {
        assert_eq!(vals.len(), self.vars.len());
        let maxdeg: Vec<u32> = (0..self.vars.len())
            .map(|i| self.terms.keys().map(|e| e[i]).max().unwrap_or(0))
            .collect();
        let pows: Vec<Vec<BigInt>> = vals
            .iter()
            .zip(&maxdeg)
            .map(|(&x, &d)| {
                let mut p = vec![BigInt::one()];
                for k in 1..=d as usize {
                    let next = &p[k - 1] * x;
                    p.push(next);
                }
                p
            })
            .collect();
        let mut rat = BigRational::zero();
        let mut rho = BigRational::zero();
        for (e, c) in &self.terms {
            let mut m = BigInt::one();
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    m *= &pows[i][k as usize];
                }
            }
            if m.is_zero() {
                continue;
            }
            let m = BigRational::from_integer(m);
            rat += c.rational_part() * &m;
            if !c.rho_part().is_zero() {
                rho += c.rho_part() * &m;
            }
        }
        FieldElem::new(rat, rho)
    }

    /// Evaluates and requires an integer result.
    pub fn eval_integer(&self, assignment: &BTreeMap<String, i64>) -> Result<BigInt> {
        let v = self.eval(assignment)?;
        v.to_integer()
            .ok_or_else(|| Error::Domain(format!("value {v} is not an integer")))
    }

    /// Complex conjugation applied to every coefficient.
    pub fn conj(&self) -> MultiPoly {
        self.map_coeffs(FieldElem::conj)
    }

    /// Terms in graded-lex descending order, the canonical print order.
    pub fn sorted_terms(&self) -> Vec<(&Vec<u32>, &FieldElem)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| grlex_desc(a.0, b.0));
        v
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<JsonTerm> = self
            .sorted_terms()
            .into_iter()
            .map(|(e, c)| JsonTerm {
                exp: e.clone(),
                coeff: JsonCoeff { rat: c.rational_part().to_string(), rho: c.rho_part().to_string() },
            })
            .collect();
        serde_json::to_value(JsonPoly { vars: self.vars.clone(), terms }).expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<MultiPoly> {
        let jp: JsonPoly = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let names: Vec<&str> = jp.vars.iter().map(|s| s.as_str()).collect();
        let mut terms = Vec::with_capacity(jp.terms.len());
        for t in jp.terms {
            let rat = parse_rational(&t.coeff.rat)?;
            let rho = parse_rational(&t.coeff.rho)?;
            terms.push((t.exp, FieldElem::new(rat, rho)));
        }
        MultiPoly::from_terms(&names, terms)
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

#[derive(Serialize, Deserialize)]
struct JsonCoeff {
    rat: String,
    rho: String,
}

#[derive(Serialize, Deserialize)]
struct JsonTerm {
    exp: Vec<u32>,
    coeff: JsonCoeff,
}

#[derive(Serialize, Deserialize)]
struct JsonPoly {
    vars: Vec<String>,
    terms: Vec<JsonTerm>,
}

fn grlex_desc(a: &[u32], b: &[u32]) -> Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    db.cmp(&da).then_with(|| b.cmp(a))
}

/// Pascal triangle up to row `n`.
fn binomial_table(n: usize) -> Vec<Vec<BigInt>> {
    let mut t: Vec<Vec<BigInt>> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let mut row = vec![BigInt::one(); m + 1];
        for j in 1..m {
            row[j] = &t[m - 1][j - 1] + &t[m - 1][j];
        }
        t.push(row);
    }
    t
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (e, c)) in self.sorted_terms().into_iter().enumerate() {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| if k == 1 { self.vars[i].clone() } else { format!("{}^{}", self.vars[i], k) })
                .collect();
            let mono = mono.join("*");
            let (neg, body) = if c.is_rational() {
                let r = c.rational_part();
                let a = r.abs();
                let body = if mono.is_empty() {
                    a.to_string()
                } else if a.is_one() {
                    mono
                } else {
                    format!("{a}*{mono}")
                };
                (r.is_negative(), body)
            } else if mono.is_empty() {
                (false, format!("({c})"))
            } else {
                (false, format!("({c})*{mono}"))
            };
            match (idx, neg) {
                (0, true) => write!(f, "-{body}")?,
                (0, false) => write!(f, "{body}")?,
                (_, true) => write!(f, " - {body}")?,
                (_, false) => write!(f, " + {body}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly({self})")
    }
}

impl Add<&MultiPoly> for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, o: &MultiPoly) -> MultiPoly {
        let vars = union_vars(&self.vars, &o.vars);
        let mut out = self.with_vars(&vars);
        let o = o.with_vars(&vars);
        for (e, c) in o.terms {
            out.add_term(e, &c);
        }
        out
    }
}

impl Sub<&MultiPoly> for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, o: &MultiPoly) -> MultiPoly {
        self + &(-o)
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect();
        MultiPoly { vars: self.vars.clone(), terms }
    }
}

impl Mul<&MultiPoly> for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, o: &MultiPoly) -> MultiPoly {
        let vars = union_vars(&self.vars, &o.vars);
        if self.is_zero() || o.is_zero() {
            return MultiPoly { vars, terms: BTreeMap::new() };
        }
        let a = self.with_vars(&vars);
        let b = o.with_vars(&vars);
        let mut acc: HashMap<Vec<u32>, FieldElem> = HashMap::with_capacity(a.terms.len() * b.terms.len());
        for (ea, ca) in &a.terms {
            for (eb, cb) in &b.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                let p = ca * cb;
                match acc.entry(e) {
                    std::collections::hash_map::Entry::Occupied(mut slot) => *slot.get_mut() += &p,
                    std::collections::hash_map::Entry::Vacant(slot) => {
                        slot.insert(p);
                    }
                }
            }
        }
        let terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        MultiPoly { vars, terms }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<MultiPoly> for MultiPoly {
            type Output = MultiPoly;
            fn $m(self, o: MultiPoly) -> MultiPoly {
                (&self).$m(&o)
            }
        }
        impl $tr<&MultiPoly> for MultiPoly {
            type Output = MultiPoly;
            fn $m(self, o: &MultiPoly) -> MultiPoly {
                (&self).$m(o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        -&self
    }
}

impl From<i64> for MultiPoly {
    fn from(n: i64) -> Self {
        MultiPoly::from_int(n)
    }
}
