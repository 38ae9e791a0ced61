//! Truncated formal power series in one and two variables over Q(rho).
//!
//! These hold the hidden series `A(x, y)`, its building blocks `P` and `Q`,
//! and the involution `iota(x) = -x / (1 + x)`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::multipoly::{parse_poly, FieldElem, MultiPoly};

/// Bivariate series with coefficients `c[i][j]` of `x^i y^j`,
/// `0 <= i <= order_x`, `0 <= j <= order_y`.
#[derive(Clone, PartialEq, Eq)]
pub struct BiSeries {
    order_x: usize,
    order_y: usize,
    c: Vec<Vec<FieldElem>>,
}

/// Univariate series `sum c[i] x^i` up to `order`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct UniSeries {
    c: Vec<FieldElem>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    First,
    Second,
}

impl UniSeries {
    pub fn new(c: Vec<FieldElem>) -> Self {
        assert!(!c.is_empty(), "a series needs at least a constant term");
        UniSeries { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> FieldElem {
        self.c.get(i).cloned().unwrap_or_default()
    }

    /// Whether the series can be substituted into another one.
    pub fn composable(&self) -> bool {
        self.c[0].is_zero()
    }

    pub fn from_poly(p: &MultiPoly, var: &str, order: usize) -> Result<Self> {
        let extra = p.vars().iter().any(|v| v != var && p.degree_in(v) > 0);
        if extra {
            return domain(format!("expected a polynomial in {var} only"));
        }
        let c = (0..=order).map(|i| p.coeff(&[(var, i as u32)])).collect();
        Ok(UniSeries { c })
    }

    pub fn mul(&self, o: &UniSeries) -> UniSeries {
        let n = self.order().min(o.order());
        let mut c = vec![FieldElem::zero(); n + 1];
        for i in 0..=n {
            if self.c[i].is_zero() {
                continue;
            }
            for j in 0..=n - i {
                c[i + j] += &(&self.c[i] * &o.c[j]);
            }
        }
        UniSeries { c }
    }

    pub fn recip(&self) -> Result<UniSeries> {
        if self.c[0].is_zero() {
            return domain("series without constant term is not invertible");
        }
        let inv0 = self.c[0].inv()?;
        let n = self.order();
        let mut r = vec![FieldElem::zero(); n + 1];
        r[0] = inv0.clone();
        for k in 1..=n {
            let mut s = FieldElem::zero();
            for i in 1..=k {
                s += &(&self.c[i] * &r[k - i]);
            }
            r[k] = -(&s * &inv0);
        }
        Ok(UniSeries { c: r })
    }

    pub fn div(&self, o: &UniSeries) -> Result<UniSeries> {
        Ok(self.mul(&o.recip()?))
    }

    /// `self(g(x))`; `g` must have zero constant term.
    pub fn compose(&self, g: &UniSeries) -> Result<UniSeries> {
        if !g.composable() {
            return domain("inner series has a nonzero constant term");
        }
        let n = self.order().min(g.order());
        let mut acc = vec![FieldElem::zero(); n + 1];
        let mut pw = UniSeries { c: one_vec(n) };
        let g = UniSeries { c: g.c[..=n].to_vec() };
        for i in 0..=n {
            for (k, v) in pw.c.iter().enumerate() {
                acc[k] += &(&self.c[i] * v);
            }
            pw = pw.mul(&g);
        }
        Ok(UniSeries { c: acc })
    }
}

fn one_vec(n: usize) -> Vec<FieldElem> {
    let mut v = vec![FieldElem::zero(); n + 1];
    v[0] = FieldElem::one();
    v
}

/// `iota(x) = -x/(1+x) = -x + x^2 - x^3 + ...` truncated at `order`.
pub fn iota_series(order: usize) -> Result<UniSeries> {
    if order < 1 {
        return domain("iota needs order at least 1");
    }
    let c = (0..=order)
        .map(|i| match i {
            0 => FieldElem::zero(),
            i if i % 2 == 1 => FieldElem::from_int(-1),
            _ => FieldElem::one(),
        })
        .collect();
    Ok(UniSeries { c })
}

impl BiSeries {
    pub fn zero(order_x: usize, order_y: usize) -> Self {
        BiSeries { order_x, order_y, c: vec![vec![FieldElem::zero(); order_y + 1]; order_x + 1] }
    }

    pub fn constant(c0: FieldElem, order_x: usize, order_y: usize) -> Self {
        let mut s = BiSeries::zero(order_x, order_y);
        s.c[0][0] = c0;
        s
    }

    pub fn one(order_x: usize, order_y: usize) -> Self {
        BiSeries::constant(FieldElem::one(), order_x, order_y)
    }

    /// Truncates a polynomial in the variables `x` and `y`.
    pub fn from_poly(p: &MultiPoly, order_x: usize, order_y: usize) -> Result<Self> {
        if let Some(v) = p.vars().iter().find(|v| *v != "x" && *v != "y" && p.degree_in(v) > 0) {
            return domain(format!("series polynomials use x and y, found {v}"));
        }
        let mut s = BiSeries::zero(order_x, order_y);
        for (i, row) in s.c.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = p.coeff(&[("x", i as u32), ("y", j as u32)]);
            }
        }
        Ok(s)
    }

    pub fn parse(text: &str, order_x: usize, order_y: usize) -> Result<Self> {
        BiSeries::from_poly(&parse_poly(text)?, order_x, order_y)
    }

    /// The truncated series as a polynomial in `x` and `y`.
    pub fn to_poly(&self) -> MultiPoly {
        self.to_poly_in("x", "y")
    }

    /// The truncated series as a polynomial in the given variable names.
    pub fn to_poly_in(&self, vx: &str, vy: &str) -> MultiPoly {
        let mut terms = Vec::new();
        for (i, row) in self.c.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    terms.push((vec![i as u32, j as u32], v.clone()));
                }
            }
        }
        MultiPoly::from_terms(&[vx, vy], terms).expect("distinct names")
    }

    pub fn order_x(&self) -> usize {
        self.order_x
    }

    pub fn order_y(&self) -> usize {
        self.order_y
    }

    pub fn get(&self, i: usize, j: usize) -> FieldElem {
        self.c.get(i).and_then(|r| r.get(j)).cloned().unwrap_or_default()
    }

    pub fn set(&mut self, i: usize, j: usize, v: FieldElem) {
        self.c[i][j] = v;
    }

    pub fn constant_term(&self) -> &FieldElem {
        &self.c[0][0]
    }

    pub fn is_unit(&self) -> bool {
        !self.c[0][0].is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.c.iter().flatten().all(|v| v.is_rational())
    }

    pub fn truncate(&self, order_x: usize, order_y: usize) -> BiSeries {
        let mut s = BiSeries::zero(order_x, order_y);
        for i in 0..=order_x.min(self.order_x) {
            for j in 0..=order_y.min(self.order_y) {
                s.c[i][j] = self.c[i][j].clone();
            }
        }
        s
    }

    fn common(&self, o: &BiSeries) -> (usize, usize) {
        (self.order_x.min(o.order_x), self.order_y.min(o.order_y))
    }

    pub fn add(&self, o: &BiSeries) -> BiSeries {
        let (ox, oy) = self.common(o);
        let mut s = self.truncate(ox, oy);
        for i in 0..=ox {
            for j in 0..=oy {
                s.c[i][j] += &o.c[i][j];
            }
        }
        s
    }

    pub fn neg(&self) -> BiSeries {
        let mut s = self.clone();
        for v in s.c.iter_mut().flatten() {
            *v = -&*v;
        }
        s
    }

    pub fn sub(&self, o: &BiSeries) -> BiSeries {
        self.add(&o.neg())
    }

    pub fn scale(&self, k: &FieldElem) -> BiSeries {
        let mut s = self.clone();
        for v in s.c.iter_mut().flatten() {
            *v = &*v * k;
        }
        s
    }

    pub fn mul(&self, o: &BiSeries) -> BiSeries {
        let (ox, oy) = self.common(o);
        let mut s = BiSeries::zero(ox, oy);
        for a in 0..=ox {
            for b in 0..=oy {
                let u = &self.c[a][b];
                if u.is_zero() {
                    continue;
                }
                for i in 0..=ox - a {
                    for j in 0..=oy - b {
                        let v = &o.c[i][j];
                        if !v.is_zero() {
                            s.c[a + i][b + j] += &(u * v);
                        }
                    }
                }
            }
        }
        s
    }

    /// Multiplicative inverse by triangular solve.
    pub fn recip(&self) -> Result<BiSeries> {
        if !self.is_unit() {
            return domain("series with zero constant term is not invertible");
        }
        let inv0 = self.c[0][0].inv()?;
        let (ox, oy) = (self.order_x, self.order_y);
        let mut r = BiSeries::zero(ox, oy);
        for i in 0..=ox {
            for j in 0..=oy {
                let mut s = if i == 0 && j == 0 { FieldElem::one() } else { FieldElem::zero() };
                for a in 0..=i {
                    for b in 0..=j {
                        if a == 0 && b == 0 {
                            continue;
                        }
                        let u = &self.c[a][b];
                        if !u.is_zero() {
                            s -= &(u * &r.c[i - a][j - b]);
                        }
                    }
                }
                r.c[i][j] = &s * &inv0;
            }
        }
        Ok(r)
    }

    pub fn div(&self, o: &BiSeries) -> Result<BiSeries> {
        let (ox, oy) = self.common(o);
        Ok(self.truncate(ox, oy).mul(&o.truncate(ox, oy).recip()?))
    }

    pub fn pow(&self, e: u32) -> BiSeries {
        let mut acc = BiSeries::one(self.order_x, self.order_y);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// `c'[i][j] = c[j][i]`.
    pub fn swap_vars(&self) -> BiSeries {
        let mut s = BiSeries::zero(self.order_y, self.order_x);
        for i in 0..=self.order_x {
            for j in 0..=self.order_y {
                s.c[j][i] = self.c[i][j].clone();
            }
        }
        s
    }

    /// Substitutes `g` for the first or second variable.
    pub fn substitute(&self, which: Slot, g: &UniSeries) -> Result<BiSeries> {
        if !g.composable() {
            return domain("substituted series must have zero constant term");
        }
        match which {
            Slot::Second => Ok(self.swap_vars().substitute(Slot::First, g)?.swap_vars()),
            Slot::First => {
                let ox = self.order_x.min(g.order());
                let oy = self.order_y;
                let g = UniSeries { c: g.c[..=ox].to_vec() };
                let mut out = BiSeries::zero(ox, oy);
                let mut pw = UniSeries { c: one_vec(ox) };
                for i in 0..=ox {
                    for (k, w) in pw.c.iter().enumerate() {
                        if w.is_zero() {
                            continue;
                        }
                        for j in 0..=oy {
                            let v = &self.c[i][j];
                            if !v.is_zero() {
                                out.c[k][j] += &(v * w);
                            }
                        }
                    }
                    pw = pw.mul(&g);
                }
                Ok(out)
            }
        }
    }

    /// `s(x, g(x))` as a univariate series, exact up to `min(order_x, order_y, order(g))`.
    pub fn diagonal(&self, g: &UniSeries) -> Result<UniSeries> {
        if !g.composable() {
            return domain("substituted series must have zero constant term");
        }
        let n = self.order_x.min(self.order_y).min(g.order());
        let g = UniSeries { c: g.c[..=n].to_vec() };
        let mut acc = vec![FieldElem::zero(); n + 1];
        let mut pw = UniSeries { c: one_vec(n) };
        for j in 0..=n {
            for i in 0..=n {
                let v = &self.c[i][j];
                if v.is_zero() {
                    continue;
                }
                for (k, w) in pw.c.iter().enumerate() {
                    if i + k <= n && !w.is_zero() {
                        acc[i + k] += &(v * w);
                    }
                }
            }
            pw = pw.mul(&g);
        }
        Ok(UniSeries { c: acc })
    }

    /// `s(x, x)`.
    pub fn diagonal_identity(&self) -> UniSeries {
        let n = self.order_x.min(self.order_y);
        let mut acc = vec![FieldElem::zero(); n + 1];
        for i in 0..=n {
            for j in 0..=n - i {
                acc[i + j] += &self.c[i][j];
            }
        }
        UniSeries { c: acc }
    }

    /// Square root with the positive rational branch of the constant term.
    pub fn sqrt(&self) -> Result<BiSeries> {
        let r0 = self.c[0][0]
            .sqrt()
            .ok_or_else(|| Error::Domain(format!("constant term {} is not a square", self.c[0][0])))?;
        let inv2r0 = r0.scale_int(2).inv()?;
        let (ox, oy) = (self.order_x, self.order_y);
        let mut r = BiSeries::zero(ox, oy);
        r.c[0][0] = r0;
        for i in 0..=ox {
            for j in 0..=oy {
                if i == 0 && j == 0 {
                    continue;
                }
                let mut s = self.c[i][j].clone();
                for a in 0..=i {
                    for b in 0..=j {
                        if (a == 0 && b == 0) || (a == i && b == j) {
                            continue;
                        }
                        s -= &(&r.c[a][b] * &r.c[i - a][j - b]);
                    }
                }
                r.c[i][j] = &s * &inv2r0;
            }
        }
        Ok(r)
    }

    /// Dense dump: one row per power of `x`.
    pub fn dump(&self) -> SeriesDump {
        SeriesDump {
            order_x: self.order_x,
            order_y: self.order_y,
            rows: self.c.iter().map(|r| r.iter().map(|v| v.to_string()).collect()).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesDump {
    pub order_x: usize,
    pub order_y: usize,
    pub rows: Vec<Vec<String>>,
}

impl fmt::Debug for BiSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BiSeries[{}x{}]({})", self.order_x, self.order_y, self.to_poly())
    }
}

pub fn series_arith(a: &BiSeries, b: &BiSeries, op: SeriesOp) -> Result<BiSeries> {
    Ok(match op {
        SeriesOp::Add => a.add(b),
        SeriesOp::Sub => a.sub(b),
        SeriesOp::Mul => a.mul(b),
        SeriesOp::Div => a.div(b)?,
    })
}

pub fn sqrt_series(s: &BiSeries) -> Result<BiSeries> {
    s.sqrt()
}

pub fn swap_vars(s: &BiSeries) -> BiSeries {
    s.swap_vars()
}

pub fn substitute(s: &BiSeries, which: Slot, g: &UniSeries) -> Result<BiSeries> {
    s.substitute(which, g)
}

/// The catalogued building blocks `P(x, y)` of hidden series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HiddenVariant {
    P0a,
    P0b,
    SqrtA,
    SqrtB,
    QA,
    QB,
}

/// The prefactor of a hidden series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HiddenFactor {
    OnePlusXPlusY,
    OneMinusXY,
}

impl HiddenVariant {
    pub const ALL: [HiddenVariant; 6] = [
        HiddenVariant::P0a,
        HiddenVariant::P0b,
        HiddenVariant::SqrtA,
        HiddenVariant::SqrtB,
        HiddenVariant::QA,
        HiddenVariant::QB,
    ];

    pub fn id(self) -> &'static str {
        match self {
            HiddenVariant::P0a => "p0a",
            HiddenVariant::P0b => "p0b",
            HiddenVariant::SqrtA => "sqrt_a",
            HiddenVariant::SqrtB => "sqrt_b",
            HiddenVariant::QA => "q_a",
            HiddenVariant::QB => "q_b",
        }
    }

    /// The factor the variant is usually paired with.
    pub fn default_factor(self) -> HiddenFactor {
        match self {
            HiddenVariant::QA | HiddenVariant::QB => HiddenFactor::OneMinusXY,
            _ => HiddenFactor::OnePlusXPlusY,
        }
    }

    /// `Q(x, y)` for the variants of the form `(1 + x + xy) Q(x, y)`.
    pub fn q_poly(self) -> Option<MultiPoly> {
        let text = match self {
            // rho^-1 = 1 - rho
            HiddenVariant::QA => "x y + rho x + (1 - rho) y - 2",
            HiddenVariant::QB => "x y + (1 + rho/2) x + (1 + (1 - rho)/2) y + 1",
            _ => return None,
        };
        Some(parse_poly(text).expect("catalogue polynomial"))
    }

    /// `P(x, y)` as a polynomial, for the variants that are polynomials.
    pub fn p_poly(self) -> Option<MultiPoly> {
        let text = match self {
            HiddenVariant::P0a => "1 - (x+1)(y+1) - rho (x+2)",
            HiddenVariant::P0b => "1 - (x+1)(y+1) + rho (x+1)(x+2)",
            HiddenVariant::QA | HiddenVariant::QB => {
                let w = parse_poly("1 + x + x y").expect("literal");
                return Some(&w * &self.q_poly()?);
            }
            _ => return None,
        };
        Some(parse_poly(text).expect("catalogue polynomial"))
    }

    /// The radicand of the square-root variants, `P0 * conj(P0)`.
    pub fn radicand(self) -> Option<MultiPoly> {
        let base = match self {
            HiddenVariant::SqrtA => HiddenVariant::P0a,
            HiddenVariant::SqrtB => HiddenVariant::P0b,
            _ => return None,
        };
        let p = base.p_poly()?;
        Some(&p * &p.conj())
    }

    /// `P(x, y)` truncated at the given orders.
    pub fn p_series(self, order_x: usize, order_y: usize) -> Result<BiSeries> {
        match self.radicand() {
            Some(r) => BiSeries::from_poly(&r, order_x, order_y)?.sqrt(),
            None => BiSeries::from_poly(&self.p_poly().expect("polynomial variant"), order_x, order_y),
        }
    }
}

impl FromStr for HiddenVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        HiddenVariant::ALL
            .into_iter()
            .find(|v| v.id() == s)
            .ok_or_else(|| Error::Config(format!("unknown hidden series {s:?}")))
    }
}

impl FromStr for HiddenFactor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one_plus_x_plus_y" => Ok(HiddenFactor::OnePlusXPlusY),
            "one_minus_xy" => Ok(HiddenFactor::OneMinusXY),
            _ => Err(Error::Config(format!("unknown factor {s:?}"))),
        }
    }
}

impl HiddenFactor {
    pub fn series(self, order_x: usize, order_y: usize) -> BiSeries {
        let text = match self {
            HiddenFactor::OnePlusXPlusY => "1 + x + y",
            HiddenFactor::OneMinusXY => "1 - x y",
        };
        BiSeries::parse(text, order_x, order_y).expect("literal")
    }
}

/// `P(x,y) P(y,x) / (P(iota(x), y) P(iota(y), x))`.
pub fn iota_quotient(p: &BiSeries) -> Result<BiSeries> {
    let (ox, oy) = (p.order_x(), p.order_y());
    let iota = iota_series(ox.max(oy).max(1))?;
    let swapped = p.swap_vars();
    let num = p.mul(&swapped);
    let d1 = p.substitute(Slot::First, &iota)?;
    let d2 = swapped.substitute(Slot::Second, &iota)?;
    num.div(&d1.mul(&d2))
}

/// `A(x, y) = factor * P(x,y) P(y,x) / (P(iota(x), y) P(iota(y), x))`,
/// truncated at `order` in both variables.
pub fn build_hidden_series(choice: HiddenVariant, factor: HiddenFactor, order: usize) -> Result<BiSeries> {
    let p = choice.p_series(order, order)?;
    Ok(factor.series(order, order).mul(&iota_quotient(&p)?))
}

/// Builds a hidden series from a user supplied `P(x, y)` polynomial.
pub fn build_hidden_from_p(p: &MultiPoly, factor: HiddenFactor, order: usize) -> Result<BiSeries> {
    let p = BiSeries::from_poly(p, order, order)?;
    if !p.is_unit() {
        return domain("P must have a nonzero constant term");
    }
    Ok(factor.series(order, order).mul(&iota_quotient(&p)?))
}

/// Left side of the defining residue equation
/// `P(x,iota(x)) P(iota(x),x) / (P(x,x) P(iota(x),iota(x)))`.
pub fn iota_residue(p: &BiSeries) -> Result<UniSeries> {
    let n = p.order_x().min(p.order_y());
    let iota = iota_series(n.max(1))?;
    let a = p.diagonal(&iota)?;
    let b = p.swap_vars().diagonal(&iota)?;
    let c = p.diagonal_identity();
    let d = p.substitute(Slot::First, &iota)?.substitute(Slot::Second, &iota)?.diagonal_identity();
    a.mul(&b).div(&c.mul(&d))
}

fn uni_from_text(text: &str, order: usize) -> UniSeries {
    UniSeries::from_poly(&parse_poly(text).expect("literal"), "x", order).expect("univariate")
}

/// `(1 + x) / (1 + x + x^2)`, the residue required of `P`.
pub fn p_residue_target(order: usize) -> UniSeries {
    uni_from_text("1 + x", order).div(&uni_from_text("1 + x + x^2", order)).expect("unit")
}

/// `(1 + x + x^2) / ((1 - x)(1 + 2x))`, the residue required of `Q`.
pub fn q_residue_target(order: usize) -> UniSeries {
    uni_from_text("1 + x + x^2", order)
        .div(&uni_from_text("(1 - x)(1 + 2 x)", order))
        .expect("unit")
}

/// Outcome of the series-level criteria for a candidate `A`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquationReport {
    pub constant_term_one: bool,
    pub symmetric: bool,
    pub diagonal_iota_is_one: bool,
    pub fourfold_product: bool,
}

impl EquationReport {
    pub fn passed(&self) -> bool {
        self.constant_term_one && self.symmetric && self.diagonal_iota_is_one && self.fourfold_product
    }
}

/// Right side of the fourfold product identity.
pub fn fourfold_target(order: usize) -> BiSeries {
    let num = BiSeries::parse("(1 + x + y)(1 - x y)(1 + x + x y)(1 + y + x y)", order, order).expect("literal");
    let den = BiSeries::parse("(1 + x)^2 (1 + y)^2", order, order).expect("literal");
    num.div(&den).expect("unit")
}

/// `A(x1,x2) A(x1,iota(x2)) A(iota(x1),x2) A(iota(x1),iota(x2))`.
pub fn fourfold_product(a: &BiSeries) -> Result<BiSeries> {
    let iota = iota_series(a.order_x().max(a.order_y()).max(1))?;
    let a1 = a.substitute(Slot::Second, &iota)?;
    let a2 = a.substitute(Slot::First, &iota)?;
    let a3 = a2.substitute(Slot::Second, &iota)?;
    Ok(a.mul(&a1).mul(&a2).mul(&a3))
}

/// Checks the series criteria for `A` to be annihilating: constant term one,
/// symmetry, `A(x, iota(x)) = 1` and the fourfold product identity.
pub fn check_equation(a: &BiSeries) -> Result<EquationReport> {
    let n = a.order_x().min(a.order_y());
    let a = a.truncate(n, n);
    let iota = iota_series(n.max(1))?;
    let diag = a.diagonal(&iota)?;
    let one = UniSeries { c: one_vec(diag.order()) };
    let four = fourfold_product(&a)?;
    Ok(EquationReport {
        constant_term_one: a.constant_term().is_one(),
        symmetric: a.swap_vars() == a,
        diagonal_iota_is_one: diag == one,
        fourfold_product: four == fourfold_target(n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str, n: usize) -> BiSeries {
        BiSeries::parse(text, n, n).unwrap()
    }

    #[test]
    fn geometric_inverse() {
        let a = s("1 + x", 6);
        let r = a.recip().unwrap();
        assert_eq!(r.get(3, 0), FieldElem::from_int(-1));
        assert_eq!(a.mul(&r), BiSeries::one(6, 6));
        let w = s("1 + x + x y", 5);
        assert_eq!(series_arith(&w, &w, SeriesOp::Div).unwrap(), BiSeries::one(5, 5));
        assert!(series_arith(&w, &s("x", 5), SeriesOp::Div).is_err());
    }

    #[test]
    fn iota_basics() {
        let i3 = iota_series(3).unwrap();
        let expect: Vec<FieldElem> = [0, -1, 1, -1].into_iter().map(FieldElem::from_int).collect();
        assert_eq!(i3.coeffs(), expect.as_slice());
        assert!(i3.composable());
        let i8 = iota_series(8).unwrap();
        let back = i8.compose(&i8).unwrap();
        let mut x = vec![FieldElem::zero(); 9];
        x[1] = FieldElem::one();
        assert_eq!(back.coeffs(), x.as_slice());
        assert!(iota_series(0).is_err());
    }

    #[test]
    fn substitution_of_iota() {
        let n = 6;
        let iota = iota_series(n).unwrap();
        // 1 + iota(x) = 1/(1+x)
        let got = s("1 + x", n).substitute(Slot::First, &iota).unwrap();
        assert_eq!(got, s("1 + x", n).recip().unwrap());
        let p = s("3 + x y^2 - 2 x^3 + y", n);
        let twice = p.substitute(Slot::First, &iota).unwrap().substitute(Slot::First, &iota).unwrap();
        assert_eq!(twice, p);
        let c = s("5", n);
        assert_eq!(c.substitute(Slot::Second, &iota).unwrap(), c);
        let bad = UniSeries::new(vec![FieldElem::one(), FieldElem::one()]);
        assert!(p.substitute(Slot::First, &bad).is_err());
    }

    #[test]
    fn square_roots() {
        let n = 7;
        let a = s("1 + x", n);
        let r = a.sqrt().unwrap();
        assert_eq!(r.mul(&r), a);
        assert_eq!(s("4", n).sqrt().unwrap(), s("2", n));
        let rad = s("4 + 6x + 3x^2 + 2y + y^2 + 5x y + 3x^2 y + 2x y^2 + x^2 y^2", n);
        let root = sqrt_series(&rad).unwrap();
        assert!(root.is_rational());
        assert_eq!(root.mul(&root), rad);
        assert!(s("2 + x", n).sqrt().is_err());
    }

    #[test]
    fn radicands_match_printed_expansions() {
        assert_eq!(
            HiddenVariant::SqrtA.radicand().unwrap(),
            parse_poly("4 + 6x + 3x^2 + 2y + y^2 + 5x y + 3x^2 y + 2x y^2 + x^2 y^2").unwrap()
        );
        assert_eq!(
            HiddenVariant::SqrtB.radicand().unwrap(),
            parse_poly("4 + 10x + 11x^2 + 5x^3 + x^4 - 2y + y^2 - 3x y - 2x^2 y - x^3 y + 2x y^2 + x^2 y^2").unwrap()
        );
    }

    #[test]
    fn swapping() {
        assert_eq!(swap_vars(&s("x", 3)), s("y", 3));
        let p = s("1 + x^2 y + 3 y^3", 4);
        assert_eq!(p.swap_vars().swap_vars(), p);
        let sym = s("x y + x + y", 4);
        assert_eq!(sym.swap_vars(), sym);
    }

    #[test]
    fn hidden_catalogue() {
        let n = 6;
        for v in HiddenVariant::ALL {
            for f in [HiddenFactor::OnePlusXPlusY, HiddenFactor::OneMinusXY] {
                let a = build_hidden_series(v, f, n).unwrap();
                assert!(a.constant_term().is_one(), "{v:?}");
                let rep = check_equation(&a).unwrap();
                assert!(rep.passed(), "{v:?} {f:?} {rep:?}");
            }
        }
    }

    #[test]
    fn residues() {
        let n = 8;
        for v in [HiddenVariant::P0a, HiddenVariant::P0b, HiddenVariant::SqrtA, HiddenVariant::SqrtB] {
            let p = v.p_series(n, n).unwrap();
            assert_eq!(iota_residue(&p).unwrap(), p_residue_target(n), "{v:?}");
        }
        for v in [HiddenVariant::QA, HiddenVariant::QB] {
            let q = BiSeries::from_poly(&v.q_poly().unwrap(), n, n).unwrap();
            assert_eq!(iota_residue(&q).unwrap(), q_residue_target(n), "{v:?}");
            let p = v.p_series(n, n).unwrap();
            assert_eq!(iota_residue(&p).unwrap(), p_residue_target(n), "{v:?}");
        }
    }

    #[test]
    fn non_solutions_fail() {
        let n = 6;
        assert!(!check_equation(&BiSeries::one(n, n)).unwrap().passed());
        let a = s("1 - 3/4 x^2 y^2", n);
        assert!(!check_equation(&a).unwrap().fourfold_product);
    }

    #[test]
    fn unknown_choice_is_config_error() {
        assert!(matches!("p9".parse::<HiddenVariant>(), Err(Error::Config(_))));
    }
}
