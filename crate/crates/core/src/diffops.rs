//! Shift-operator calculus on polynomials.
//!
//! Every operator here is a power series in the forward differences
//! `X = Delta_x`, `Y = Delta_y`. Applied to a polynomial of degree `d` in `x`,
//! powers `X^m` with `m > d` vanish, so the series is truncated at the degrees
//! of the target and applied exactly in the binomial basis.

use crate::error::{domain, Result};
use crate::multipoly::{apply_difference_operator, apply_newton, Direction, MultiPoly};
use crate::powerseries::{iota_series, BiSeries, HiddenVariant, Slot};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PairKind {
    /// `st = E_x^-1 + E_y - E_x^-1 E_y`
    St,
    StInv,
    /// `W = id + Delta_x + Delta_x Delta_y`
    W,
    WInv,
    /// `S(Delta_x, Delta_y)`
    Series(BiSeries),
    /// `S(Delta_x, 0)`
    SeriesAtZero(BiSeries),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairOperator {
    pub kind: PairKind,
    pub var_x: String,
    pub var_y: String,
}

fn st_symbol(ox: usize, oy: usize) -> BiSeries {
    let num = BiSeries::parse("1 + x + x y", ox, oy).expect("literal");
    let den = BiSeries::parse("1 + x", ox, oy).expect("literal");
    num.div(&den).expect("unit")
}

fn w_symbol(ox: usize, oy: usize) -> BiSeries {
    BiSeries::parse("1 + x + x y", ox, oy).expect("literal")
}

impl PairOperator {
    pub fn new(kind: PairKind, var_x: &str, var_y: &str) -> Self {
        PairOperator { kind, var_x: var_x.to_string(), var_y: var_y.to_string() }
    }

    pub fn st(x: &str, y: &str) -> Self {
        PairOperator::new(PairKind::St, x, y)
    }

    pub fn st_inv(x: &str, y: &str) -> Self {
        PairOperator::new(PairKind::StInv, x, y)
    }

    pub fn w(x: &str, y: &str) -> Self {
        PairOperator::new(PairKind::W, x, y)
    }

    pub fn w_inv(x: &str, y: &str) -> Self {
        PairOperator::new(PairKind::WInv, x, y)
    }

    pub fn series(s: BiSeries, x: &str, y: &str) -> Self {
        PairOperator::new(PairKind::Series(s), x, y)
    }

    /// The operator as a series in `(Delta_x, Delta_y)` truncated at `(ox, oy)`.
    pub fn symbol(&self, ox: usize, oy: usize) -> Result<BiSeries> {
        Ok(match &self.kind {
            PairKind::St => st_symbol(ox, oy),
            PairKind::StInv => st_symbol(ox, oy).recip()?,
            PairKind::W => w_symbol(ox, oy),
            PairKind::WInv => w_symbol(ox, oy).recip()?,
            PairKind::Series(s) => {
                if s.order_x() < ox || s.order_y() < oy {
                    return domain(format!(
                        "series of order ({}, {}) is too short for degrees ({ox}, {oy})",
                        s.order_x(),
                        s.order_y()
                    ));
                }
                s.truncate(ox, oy)
            }
            PairKind::SeriesAtZero(s) => {
                if s.order_x() < ox {
                    return domain(format!("series of order {} is too short for degree {ox}", s.order_x()));
                }
                s.truncate(ox, 0).truncate(ox, oy)
            }
        })
    }

    fn check_vars(&self) -> Result<()> {
        if self.var_x == self.var_y {
            return domain("pair operator needs two distinct variables");
        }
        Ok(())
    }

    /// Applies the operator to a polynomial in monomial form.
    pub fn apply(&self, p: &MultiPoly) -> Result<MultiPoly> {
        self.check_vars()?;
        let (dx, dy) = (p.degree_in(&self.var_x) as usize, p.degree_in(&self.var_y) as usize);
        let sym = self.symbol(dx, dy)?;
        Ok(apply_difference_operator(p, &sym.to_poly_in(&self.var_x, &self.var_y)))
    }

    /// Applies the operator to a polynomial already in binomial form in both
    /// of the operator's variables.
    pub fn apply_newton(&self, np: &MultiPoly) -> Result<MultiPoly> {
        self.check_vars()?;
        let (dx, dy) = (np.degree_in(&self.var_x) as usize, np.degree_in(&self.var_y) as usize);
        let sym = self.symbol(dx, dy)?;
        Ok(apply_newton(np, &sym.to_poly_in(&self.var_x, &self.var_y)))
    }
}

/// Applies the operators in list order.
pub fn apply_product(ops: &[PairOperator], p: &MultiPoly) -> Result<MultiPoly> {
    ops.iter().try_fold(p.clone(), |acc, op| op.apply(&acc))
}

/// Applies `e_r` of the forward or backward differences in `vars`.
pub fn elementary_sym_op(p: &MultiPoly, vars: &[&str], r: usize, dir: Direction) -> Result<MultiPoly> {
    if r > vars.len() {
        return domain(format!("e_{r} needs at least {r} variables, got {}", vars.len()));
    }
    // layer[k] = e_k of the differences in the variables seen so far, applied to p
    let mut layer: Vec<MultiPoly> = vec![p.clone()];
    for (m, v) in vars.iter().enumerate() {
        let top = (m + 1).min(r);
        let mut next = Vec::with_capacity(top + 1);
        for k in 0..=top {
            let keep = layer.get(k).cloned().unwrap_or_default();
            let add = if k == 0 { MultiPoly::zero() } else { layer[k - 1].delta(v, dir) };
            next.push(&keep + &add);
        }
        layer = next;
    }
    Ok(layer.swap_remove(r))
}

/// Symbol of `E_x E_y st_{y,x} / (1 + delta_x + delta_y) * Q(X,Y)Q(Y,X)/(Q(iota X,Y)Q(iota Y,X))`.
fn numerator_symbol(q: &BiSeries, order: usize) -> Result<BiSeries> {
    let iota = iota_series(order.max(1))?;
    let lead = BiSeries::parse("(1 + x)(1 + y + x y)", order, order)?;
    let x = BiSeries::parse("x", order, order)?;
    let y = BiSeries::parse("y", order, order)?;
    let den = BiSeries::one(order, order)
        .add(&x.substitute(Slot::First, &iota)?)
        .add(&y.substitute(Slot::Second, &iota)?);
    let qs = q.truncate(order, order);
    let qsw = qs.swap_vars();
    let qnum = qs.mul(&qsw);
    let qden = qs.substitute(Slot::First, &iota)?.mul(&qsw.substitute(Slot::Second, &iota)?);
    Ok(lead.div(&den)?.mul(&qnum.div(&qden)?))
}

/// The combined operator `st^-1_{i,j} A_{i,j}` written with `st_{j,i}` in the
/// numerator, for the hidden series built from `(1 + x + x y) Q` and the
/// factor `1 - x y`.
pub fn numerator_form_mt_op(i: &str, j: &str, variant: HiddenVariant, order: usize) -> Result<PairOperator> {
    let q = variant
        .q_poly()
        .ok_or_else(|| crate::Error::Config(format!("{} has no Q factor", variant.id())))?;
    let qs = BiSeries::from_poly(&q, order, order)?;
    Ok(PairOperator::series(numerator_symbol(&qs, order)?, i, j))
}

/// `st^-1 A` as a single series truncated at `order` in both variables.
pub fn st_inv_times(a: &BiSeries) -> Result<BiSeries> {
    let st = st_symbol(a.order_x(), a.order_y());
    a.div(&st)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multipoly::parse_poly;
    use crate::powerseries::{build_hidden_series, HiddenFactor};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn random_poly(rng: &mut ChaCha8Rng, vars: &[&str], deg: u32) -> MultiPoly {
        let mut p = MultiPoly::zero();
        for _ in 0..6 {
            let mut t = MultiPoly::from_int(rng.gen_range(-3..=3));
            for v in vars {
                t = &t * &MultiPoly::var(v).pow(rng.gen_range(0..=deg));
            }
            p = &p + &t;
        }
        p
    }

    #[test]
    fn small_examples() {
        let c = MultiPoly::from_int(7);
        assert_eq!(PairOperator::st("x", "y").apply(&c).unwrap(), c);
        let xy = parse_poly("x y").unwrap();
        assert_eq!(PairOperator::w("x", "y").apply(&xy).unwrap(), parse_poly("x y + y + 1").unwrap());
    }

    #[test]
    fn st_inverse_and_shift_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let p = random_poly(&mut rng, &["x", "y", "z"], 3);
            let st = PairOperator::st("x", "y").apply(&p).unwrap();
            assert_eq!(PairOperator::st_inv("x", "y").apply(&st).unwrap(), p);
            // st = E_x^-1 (id + E_y Delta_x)
            let inner = &p + &p.delta("x", Direction::Forward).shift("y", 1);
            assert_eq!(st, inner.shift("x", -1));
            let w = PairOperator::w("x", "y").apply(&p).unwrap();
            assert_eq!(PairOperator::w_inv("x", "y").apply(&w).unwrap(), p);
        }
    }

    #[test]
    fn w_on_one_variable_functions() {
        let px = parse_poly("x^3 - 2x + 5").unwrap();
        assert_eq!(PairOperator::w("x", "y").apply(&px).unwrap(), px.shift("x", 1));
        let py = parse_poly("y^2 + y").unwrap();
        assert_eq!(PairOperator::w("x", "y").apply(&py).unwrap(), py);
    }

    #[test]
    fn products_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = build_hidden_series(HiddenVariant::P0a, HiddenFactor::OnePlusXPlusY, 6).unwrap();
        let ops = vec![
            PairOperator::st_inv("a", "b"),
            PairOperator::series(a.clone(), "b", "c"),
            PairOperator::w("a", "c"),
        ];
        for _ in 0..5 {
            let p = random_poly(&mut rng, &["a", "b", "c"], 2);
            let fwd = apply_product(&ops, &p).unwrap();
            let rev: Vec<_> = ops.iter().rev().cloned().collect();
            assert_eq!(apply_product(&rev, &p).unwrap(), fwd);
        }
        assert_eq!(apply_product(&[], &parse_poly("a b").unwrap()).unwrap(), parse_poly("a b").unwrap());
    }

    #[test]
    fn u_fixes_constants() {
        for v in HiddenVariant::ALL {
            let a = build_hidden_series(v, v.default_factor(), 3).unwrap();
            let u = PairOperator::w_inv("x", "y").symbol(3, 3).unwrap().mul(&a);
            let c = MultiPoly::from_int(3);
            assert_eq!(PairOperator::series(u, "x", "y").apply(&c).unwrap(), c);
        }
    }

    #[test]
    fn elementary_symmetric() {
        let p = parse_poly("x + y").unwrap();
        assert_eq!(elementary_sym_op(&p, &["x", "y"], 1, Direction::Forward).unwrap(), MultiPoly::from_int(2));
        assert_eq!(elementary_sym_op(&p, &["x", "y"], 0, Direction::Backward).unwrap(), p);
        assert!(elementary_sym_op(&p, &["x"], 2, Direction::Forward).is_err());
        let q = parse_poly("x^2 y^2 z").unwrap();
        let direct = &(&q.delta("x", Direction::Backward).delta("y", Direction::Backward)
            + &q.delta("x", Direction::Backward).delta("z", Direction::Backward))
            + &q.delta("y", Direction::Backward).delta("z", Direction::Backward);
        assert_eq!(elementary_sym_op(&q, &["x", "y", "z"], 2, Direction::Backward).unwrap(), direct);
    }

    #[test]
    fn numerator_form_equals_st_inverse_times_a() {
        let order = 6;
        for v in [HiddenVariant::QA, HiddenVariant::QB] {
            let a = build_hidden_series(v, HiddenFactor::OneMinusXY, order).unwrap();
            let lhs = numerator_form_mt_op("x", "y", v, order).unwrap();
            let rhs = st_inv_times(&a).unwrap();
            assert_eq!(lhs.symbol(order, order).unwrap(), rhs);
            assert_eq!(lhs.apply(&MultiPoly::from_int(4)).unwrap(), MultiPoly::from_int(4));
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            for _ in 0..10 {
                let p = random_poly(&mut rng, &["x", "y"], 2);
                let other = PairOperator::series(rhs.clone(), "x", "y").apply(&p).unwrap();
                assert_eq!(lhs.apply(&p).unwrap(), other);
            }
        }
    }

    #[test]
    fn short_series_is_rejected() {
        let a = BiSeries::one(1, 1);
        let p = parse_poly("x^3").unwrap();
        assert!(PairOperator::series(a, "x", "y").apply(&p).is_err());
    }

    /// Signed multiset of pairs; `st` acting on the box `[a, kl] x [kr, b]`.
    fn boxed(a: i64, kl: i64, kr: i64, b: i64) -> HashMap<(i64, i64), i64> {
        let mut m = HashMap::new();
        for l1 in a..=kl {
            for l2 in kr..=b {
                *m.entry((l1, l2)).or_insert(0) += 1;
            }
        }
        m
    }

    #[test]
    fn strict_operator_on_multisets() {
        for a in -1..=1 {
            for k in a..=a + 3 {
                for b in k..=k + 3 {
                    let mut acc: HashMap<(i64, i64), i64> = HashMap::new();
                    for (sign, m) in [(1, boxed(a, k - 1, k, b)), (1, boxed(a, k, k + 1, b)), (-1, boxed(a, k - 1, k + 1, b))] {
                        for (key, c) in m {
                            *acc.entry(key).or_insert(0) += sign * c;
                        }
                    }
                    acc.retain(|_, c| *c != 0);
                    let mut expect = HashMap::new();
                    for l1 in a..=k {
                        for l2 in k..=b {
                            if l1 < l2 {
                                expect.insert((l1, l2), 1);
                            }
                        }
                    }
                    assert_eq!(acc, expect);
                }
            }
        }
    }
}
