use super::newton::{binom_of, to_newton};
use super::poly::MultiPoly;
use crate::error::{domain, Result};

/// Symbolic `sum_{var = lower}^{upper} p`.
///
/// `p` is expanded in binomial coefficients of `var` and each piece is
/// telescoped with `sum_{v=a}^{b} C(v, j) = C(b+1, j+1) - C(a, j+1)`. The
/// result is the unique polynomial extension, so an empty range `b = a - 1`
/// gives zero and a reversed range gives the negated complementary sum.
pub fn definite_sum(p: &MultiPoly, var: &str, lower: &MultiPoly, upper: &MultiPoly) -> Result<MultiPoly> {
    if lower.var_index(var).is_some_and(|_| lower.degree_in(var) > 0)
        || upper.var_index(var).is_some_and(|_| upper.degree_in(var) > 0)
    {
        return domain(format!("summation bounds must not involve {var}"));
    }
    let Some(i) = p.var_index(var) else {
        // constant in var: multiply by the number of terms
        let len = &(upper - lower) + &MultiPoly::one();
        return Ok(&len * p);
    };
    let np = to_newton(p, var);
    let mut rest = np.vars().to_vec();
    rest.remove(i);
    let mut coeffs: Vec<MultiPoly> = Vec::new();
    for (e, c) in np.terms() {
        let j = e[i] as usize;
        if coeffs.len() <= j {
            coeffs.resize(j + 1, MultiPoly::zero());
        }
        let mut e2 = e.to_vec();
        e2.remove(i);
        let names: Vec<&str> = rest.iter().map(|s| s.as_str()).collect();
        let t = MultiPoly::from_terms(&names, [(e2, c.clone())])?;
        coeffs[j] = &coeffs[j] + &t;
    }
    let top = upper + &MultiPoly::one();
    let mut out = MultiPoly::zero();
    for (j, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let tele = &binom_of(&top, j as u32 + 1) - &binom_of(lower, j as u32 + 1);
        out = &out + &(c * &tele);
    }
    Ok(out.trim())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multipoly::{binom_poly, FieldElem};
    use std::collections::BTreeMap;

    fn v(name: &str) -> MultiPoly {
        MultiPoly::var(name)
    }

    #[test]
    fn counting_sum() {
        let s = definite_sum(&MultiPoly::one(), "l", &MultiPoly::zero(), &v("k")).unwrap();
        assert_eq!(s.to_string(), "k + 1");
    }

    #[test]
    fn empty_range_is_zero() {
        let p = &v("l").pow(3) + &v("a");
        let a = v("a");
        let s = definite_sum(&p, "l", &a, &(&a - &MultiPoly::one())).unwrap();
        assert!(s.is_zero());
    }

    #[test]
    fn binomial_telescoping() {
        let zero = MultiPoly::zero();
        for n in 0..4 {
            let s = definite_sum(&binom_poly("x", n, &zero), "x", &v("a"), &v("b")).unwrap();
            let expect = &binom_poly("b", n + 1, &MultiPoly::one()) - &binom_poly("a", n + 1, &zero);
            assert_eq!(s, expect.trim());
        }
    }

    #[test]
    fn reversed_range_negates() {
        let p = &v("l").pow(2) + &MultiPoly::from_int(1);
        let s = definite_sum(&p, "l", &v("a"), &v("b")).unwrap();
        let mut at = BTreeMap::new();
        at.insert("a".to_string(), 5);
        at.insert("b".to_string(), 1);
        // sum_{5}^{1} = -sum_{2}^{4}
        let direct: i64 = (2..=4).map(|l| l * l + 1).sum();
        assert_eq!(s.eval(&at).unwrap(), FieldElem::from_int(-direct));
    }
}
