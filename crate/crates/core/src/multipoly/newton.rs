//! Binomial (Newton) basis and difference-operator application.
//!
//! A polynomial "in Newton form with respect to `x`" stores at exponent `j`
//! the coefficient of `C(x, j)` instead of `x^j`. In that basis `Delta_x`
//! lowers the index by one, so any polynomial in forward differences acts by
//! index subtraction.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::field::FieldElem;
use super::poly::MultiPoly;

/// Stirling numbers of the second kind `S(m, j)` for `m, j <= n`.
fn stirling2(n: usize) -> Vec<Vec<BigInt>> {
    let mut s = vec![vec![BigInt::zero(); n + 1]; n + 1];
    s[0][0] = BigInt::one();
    for m in 1..=n {
        for j in 1..=m {
            s[m][j] = &s[m - 1][j - 1] + &s[m - 1][j] * j;
        }
    }
    s
}

/// Signed Stirling numbers of the first kind `s(j, m)`.
fn stirling1(n: usize) -> Vec<Vec<BigInt>> {
    let mut s = vec![vec![BigInt::zero(); n + 1]; n + 1];
    s[0][0] = BigInt::one();
    for j in 1..=n {
        for m in 1..=j {
            s[j][m] = &s[j - 1][m - 1] - &s[j - 1][m] * (j - 1);
        }
    }
    s
}

fn factorials(n: usize) -> Vec<BigInt> {
    let mut f = vec![BigInt::one()];
    for k in 1..=n {
        let next = &f[k - 1] * k;
        f.push(next);
    }
    f
}

/// Per-variable change of basis; `table[m][j]` is the weight of new index `j`
/// for old index `m`.
fn transform_var(p: &MultiPoly, var: &str, table: &[Vec<FieldElem>]) -> MultiPoly {
    let Some(i) = p.var_index(var) else {
        return p.clone();
    };
    let mut acc: HashMap<Vec<u32>, FieldElem> = HashMap::new();
    for (e, c) in p.raw_terms() {
        let m = e[i] as usize;
        for (j, w) in table[m].iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] = j as u32;
            let t = c * w;
            match acc.entry(e2) {
                std::collections::hash_map::Entry::Occupied(mut o) => *o.get_mut() += &t,
                std::collections::hash_map::Entry::Vacant(v) => {
                    v.insert(t);
                }
            }
        }
    }
    let terms: BTreeMap<Vec<u32>, FieldElem> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    MultiPoly::from_raw(p.vars().to_vec(), terms)
}

fn mono_to_newton_table(n: usize) -> Vec<Vec<FieldElem>> {
    let s2 = stirling2(n);
    let f = factorials(n);
    (0..=n)
        .map(|m| (0..=m).map(|j| FieldElem::from_bigint(&s2[m][j] * &f[j])).collect())
        .collect()
}

fn newton_to_mono_table(n: usize) -> Vec<Vec<FieldElem>> {
    let s1 = stirling1(n);
    let f = factorials(n);
    (0..=n)
        .map(|j| {
            let inv = FieldElem::from_bigint(f[j].clone()).inv().expect("nonzero factorial");
            (0..=j).map(|m| &FieldElem::from_bigint(s1[j][m].clone()) * &inv).collect()
        })
        .collect()
}

/// Rewrites `p` in the binomial basis with respect to `var`.
pub fn to_newton(p: &MultiPoly, var: &str) -> MultiPoly {
    let d = p.degree_in(var) as usize;
    transform_var(p, var, &mono_to_newton_table(d))
}

/// Inverse of [`to_newton`].
pub fn from_newton(p: &MultiPoly, var: &str) -> MultiPoly {
    let d = p.degree_in(var) as usize;
    transform_var(p, var, &newton_to_mono_table(d))
}

/// Newton form in every variable of `p`.
pub fn to_newton_all(p: &MultiPoly) -> MultiPoly {
    let vars = p.vars().to_vec();
    vars.iter().fold(p.clone(), |acc, v| to_newton(&acc, v))
}

/// Monomial form from a polynomial in Newton form in every variable.
pub fn from_newton_all(p: &MultiPoly) -> MultiPoly {
    let vars = p.vars().to_vec();
    vars.iter().fold(p.clone(), |acc, v| from_newton(&acc, v))
}

/// `C(q, m)` for a polynomial argument `q`.
pub fn binom_of(q: &MultiPoly, m: u32) -> MultiPoly {
    let mut acc = MultiPoly::one();
    for t in 0..m {
        acc = &acc * &(q - &MultiPoly::from_int(t as i64));
    }
    let f = factorials(m as usize);
    acc.scale(&FieldElem::from_bigint(f[m as usize].clone()).inv().expect("nonzero"))
}

/// `C(var + shift, m)` as a polynomial.
pub fn binom_poly(var: &str, m: u32, shift: &MultiPoly) -> MultiPoly {
    binom_of(&(&MultiPoly::var(var) + shift), m)
}

/// Applies `R(Delta)` to a polynomial that is already in Newton form in the
/// variables of `op`.
///
/// `op` is a polynomial whose variable names are the target variables; its
/// exponent `beta` stands for `prod Delta_v^{beta_v}`. Terms of `op` with an
/// exponent above the degree of `p` contribute nothing, so truncated series
/// act exactly.
pub fn apply_newton(p: &MultiPoly, op: &MultiPoly) -> MultiPoly {
    let mut names: Vec<String> = p.vars().to_vec();
    for v in op.vars() {
        if !names.contains(v) {
            names.push(v.clone());
        }
    }
    names.sort();
    let p = p.with_vars(&names);
    let idx: Vec<usize> = op.vars().iter().map(|v| names.iter().position(|w| w == v).unwrap()).collect();
    let op_terms: Vec<(Vec<u32>, &FieldElem)> = op.terms().map(|(e, c)| (e.to_vec(), c)).collect();
    let mut acc: HashMap<Vec<u32>, FieldElem> = HashMap::with_capacity(p.num_terms());
    for (g, c) in p.raw_terms() {
        'ops: for (beta, oc) in &op_terms {
            let mut e = g.clone();
            for (k, &i) in idx.iter().enumerate() {
                if beta[k] > e[i] {
                    continue 'ops;
                }
                e[i] -= beta[k];
            }
            let t = c * *oc;
            match acc.entry(e) {
                std::collections::hash_map::Entry::Occupied(mut o) => *o.get_mut() += &t,
                std::collections::hash_map::Entry::Vacant(v) => {
                    v.insert(t);
                }
            }
        }
    }
    let terms: BTreeMap<Vec<u32>, FieldElem> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    MultiPoly::from_raw(names, terms)
}

/// Applies `R(Delta)` to a polynomial in monomial form.
pub fn apply_difference_operator(p: &MultiPoly, op: &MultiPoly) -> MultiPoly {
    let vars: Vec<String> = op.vars().iter().filter(|v| p.var_index(v).is_some()).cloned().collect();
    let np = vars.iter().fold(p.clone(), |acc, v| to_newton(&acc, v));
    let out = apply_newton(&np, op);
    vars.iter().fold(out, |acc, v| from_newton(&acc, v)).trim_to(p)
}

impl MultiPoly {
    /// Drops variables not present in `like` when they no longer occur.
    fn trim_to(&self, like: &MultiPoly) -> MultiPoly {
        let t = self.trim();
        let mut vars: Vec<String> = like.vars().to_vec();
        for v in t.vars() {
            if !vars.contains(v) {
                vars.push(v.clone());
            }
        }
        vars.sort();
        t.with_vars(&vars)
    }
}

/// Evaluates a polynomial given in full Newton form at an integer point
/// (values in the polynomial's variable order).
pub fn eval_newton(p: &MultiPoly, vals: &[i64]) -> FieldElem {
    let maxdeg: Vec<u32> = (0..p.vars().len()).map(|i| p.degree_in(&p.vars()[i])).collect();
    let tables: Vec<Vec<BigInt>> = vals
        .iter()
        .zip(&maxdeg)
        .map(|(&x, &d)| {
            let mut row = vec![BigInt::one()];
            for j in 1..=d as i64 {
                let next = &row[(j - 1) as usize] * BigInt::from(x - j + 1) / BigInt::from(j);
                row.push(next);
            }
            row
        })
        .collect();
    let mut acc = FieldElem::zero();
    for (e, c) in p.terms() {
        let mut m = BigInt::one();
        for (i, &k) in e.iter().enumerate() {
            if k > 0 {
                m *= &tables[i][k as usize];
            }
        }
        if !m.is_zero() {
            acc += &(c * &FieldElem::from_bigint(m));
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multipoly::Direction;

    #[test]
    fn newton_round_trip() {
        let x = MultiPoly::var("x");
        let y = MultiPoly::var("y");
        let p = &(&x.pow(4) * &y.pow(2)) - &(&x * &MultiPoly::from_int(3));
        assert_eq!(from_newton_all(&to_newton_all(&p)), p);
        // x^2 = 2 C(x,2) + C(x,1)
        let n = to_newton(&x.pow(2), "x");
        assert_eq!(n.to_string(), "2*x^2 + x");
    }

    #[test]
    fn binomial_conventions() {
        let b = binom_poly("x", 2, &MultiPoly::zero());
        let mut a = BTreeMap::new();
        a.insert("x".to_string(), -1);
        assert_eq!(b.eval(&a).unwrap(), FieldElem::one());
        assert_eq!(binom_poly("x", 0, &MultiPoly::zero()), MultiPoly::one());
        for m in 1..6 {
            let b = binom_poly("x", m, &MultiPoly::zero());
            assert_eq!(b.delta("x", Direction::Forward), binom_poly("x", m - 1, &MultiPoly::zero()));
        }
    }

    #[test]
    fn operator_matches_repeated_difference() {
        let x = MultiPoly::var("x");
        let y = MultiPoly::var("y");
        let p = &(&x.pow(3) * &y) + &y.pow(2);
        // op = 1 + 2 Dx + Dx Dy
        let op = &(&MultiPoly::one() + &x.scale(&FieldElem::from_int(2))) + &(&x * &y);
        let lhs = apply_difference_operator(&p, &op);
        let dx = p.delta("x", Direction::Forward);
        let rhs = &(&p + &dx.scale(&FieldElem::from_int(2))) + &dx.delta("y", Direction::Forward);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn newton_evaluation() {
        let x = MultiPoly::var("x");
        let y = MultiPoly::var("y");
        let p = &(&x.pow(3) * &y) - &y.pow(2);
        let n = to_newton_all(&p);
        for (a, b) in [(-3, 2), (0, 0), (4, -1)] {
            assert_eq!(eval_newton(&n, &[a, b]), p.eval_slice(&[a, b]));
        }
    }
}
