//! Pfaffians of upper-triangular arrays.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{domain, Error, Result};
use crate::multipoly::{FieldElem, MultiPoly};

/// Default limit on the order accepted by [`pf_matchings`].
pub const DEFAULT_MATCHING_CAP: usize = 12;

/// The commutative-ring operations a Pfaffian needs.
pub trait Ring: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
}

impl Ring for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

impl Ring for FieldElem {
    fn zero() -> Self {
        FieldElem::zero()
    }
    fn one() -> Self {
        FieldElem::one()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        FieldElem::is_zero(self)
    }
}

impl Ring for MultiPoly {
    fn zero() -> Self {
        MultiPoly::zero()
    }
    fn one() -> Self {
        MultiPoly::one()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        MultiPoly::is_zero(self)
    }
}

/// Machine integer that turns into `None` on overflow.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckedInt(pub Option<i128>);

impl Ring for CheckedInt {
    fn zero() -> Self {
        CheckedInt(Some(0))
    }
    fn one() -> Self {
        CheckedInt(Some(1))
    }
    fn add(&self, o: &Self) -> Self {
        CheckedInt(self.0.zip(o.0).and_then(|(a, b)| a.checked_add(b)))
    }
    fn mul(&self, o: &Self) -> Self {
        CheckedInt(self.0.zip(o.0).and_then(|(a, b)| a.checked_mul(b)))
    }
    fn neg(&self) -> Self {
        CheckedInt(self.0.and_then(|a| a.checked_neg()))
    }
    fn is_zero(&self) -> bool {
        self.0 == Some(0)
    }
}

/// Upper-triangular array `A[i][j]`, `0 <= i < j < order`, of even order.
/// Entries below the diagonal are implied by skew symmetry.
#[derive(Clone, Debug, PartialEq)]
pub struct TriArray<T> {
    order: usize,
    entries: Vec<T>,
}

impl<T: Ring> TriArray<T> {
    /// Builds an array from `f(i, j)` for `i < j` (0-based).
    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        if order % 2 == 1 {
            return domain(format!("Pfaffian of odd order {order}"));
        }
        let mut entries = Vec::with_capacity(order * order.saturating_sub(1) / 2);
        for i in 0..order {
            for j in i + 1..order {
                entries.push(f(i, j));
            }
        }
        Ok(TriArray { order, entries })
    }

    /// Builds an array from rows: row `i` lists `A[i][i+1..order]`.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let order = rows.len() + 1;
        for (i, r) in rows.iter().enumerate() {
            if r.len() != order - 1 - i {
                return domain(format!("row {i} has {} entries, expected {}", r.len(), order - 1 - i));
            }
        }
        if order % 2 == 1 {
            return domain(format!("Pfaffian of odd order {order}"));
        }
        Ok(TriArray { order, entries: rows.into_iter().flatten().collect() })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        // rows before i contribute (order-1) + ... + (order-i) entries
        i * (2 * self.order - i - 1) / 2 + (j - i - 1)
    }

    /// Entry of the skew-symmetric extension.
    pub fn get(&self, i: usize, j: usize) -> T {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.entries[self.idx(i, j)].clone(),
            std::cmp::Ordering::Greater => self.entries[self.idx(j, i)].neg(),
            std::cmp::Ordering::Equal => T::zero(),
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        assert!(i < j);
        let k = self.idx(i, j);
        self.entries[k] = v;
    }

    pub fn map<U: Ring>(&self, f: impl Fn(&T) -> U) -> TriArray<U> {
        TriArray { order: self.order, entries: self.entries.iter().map(f).collect() }
    }
}

fn matchings(rest: &mut Vec<usize>, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if rest.is_empty() {
        out.push(current.clone());
        return;
    }
    let i = rest.remove(0);
    for k in 0..rest.len() {
        let j = rest.remove(k);
        current.push(i);
        current.push(j);
        matchings(rest, current, out);
        current.pop();
        current.pop();
        rest.insert(k, j);
    }
    rest.insert(0, i);
}

fn permutation_sign(seq: &[usize]) -> bool {
    let mut inv = 0usize;
    for a in 0..seq.len() {
        for b in a + 1..seq.len() {
            if seq[a] > seq[b] {
                inv += 1;
            }
        }
    }
    inv % 2 == 0
}

/// Pfaffian as the signed sum over all perfect matchings.
pub fn pf_matchings<T: Ring>(a: &TriArray<T>) -> Result<T> {
    pf_matchings_capped(a, DEFAULT_MATCHING_CAP)
}

pub fn pf_matchings_capped<T: Ring>(a: &TriArray<T>, cap: usize) -> Result<T> {
    if a.order > cap {
        return Err(Error::Resource(format!("matching sum of order {} exceeds cap {cap}", a.order)));
    }
    let mut all = Vec::new();
    matchings(&mut (0..a.order).collect(), &mut Vec::new(), &mut all);
    let mut acc = T::zero();
    for m in all {
        let mut t = T::one();
        for pair in m.chunks(2) {
            t = t.mul(&a.get(pair[0], pair[1]));
        }
        acc = if permutation_sign(&m) { acc.add(&t) } else { acc.sub(&t) };
    }
    Ok(acc)
}

/// Pfaffian by Laplace expansion at `expand_index` (1-based); minors are
/// expanded at their last index and memoised by index subset.
pub fn pf_laplace<T: Ring>(a: &TriArray<T>, expand_index: usize) -> Result<T> {
    if a.order > 64 {
        return Err(Error::Resource(format!("order {} too large for subset memo", a.order)));
    }
    if a.order == 0 {
        return Ok(T::one());
    }
    if expand_index == 0 || expand_index > a.order {
        return domain(format!("expansion index {expand_index} outside 1..={}", a.order));
    }
    let full: u64 = if a.order == 64 { u64::MAX } else { (1u64 << a.order) - 1 };
    let mut memo = Memo::new(a.order);
    let p = expand_index - 1;
    let mut acc = T::zero();
    for q in 0..a.order {
        if q == p {
            continue;
        }
        let entry = a.get(p, q);
        if entry.is_zero() {
            continue;
        }
        let minor = pf_subset(a, full & !(1u64 << p) & !(1u64 << q), &mut memo);
        // (-1)^(p+q+1+theta(p-q)) with 1-based p, q; parity unchanged by the shift
        let theta = usize::from(p > q);
        let t = entry.mul(&minor);
        acc = if (p + q + 1 + theta) % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
    }
    Ok(acc)
}

/// Pfaffian with the default expansion at the last index.
pub fn pfaffian<T: Ring>(a: &TriArray<T>) -> T {
    pf_laplace(a, a.order.max(1)).expect("valid array")
}

enum Memo<T> {
    Dense(Vec<Option<T>>),
    Sparse(HashMap<u64, T>),
}

impl<T: Clone> Memo<T> {
    fn new(order: usize) -> Self {
        if order <= 16 {
            Memo::Dense(vec![None; 1 << order])
        } else {
            Memo::Sparse(HashMap::new())
        }
    }

    fn get(&self, mask: u64) -> Option<&T> {
        match self {
            Memo::Dense(v) => v[mask as usize].as_ref(),
            Memo::Sparse(m) => m.get(&mask),
        }
    }

    fn insert(&mut self, mask: u64, t: T) {
        match self {
            Memo::Dense(v) => v[mask as usize] = Some(t),
            Memo::Sparse(m) => {
                m.insert(mask, t);
            }
        }
    }
}

fn pf_subset<T: Ring>(a: &TriArray<T>, mask: u64, memo: &mut Memo<T>) -> T {
    if mask == 0 {
        return T::one();
    }
    if let Some(v) = memo.get(mask) {
        return v.clone();
    }
    let idx: Vec<usize> = (0..a.order).filter(|&i| mask >> i & 1 == 1).collect();
    let m = idx.len();
    let last = idx[m - 1];
    let mut acc = T::zero();
    for (r, &s) in idx[..m - 1].iter().enumerate() {
        let entry = a.get(s, last);
        if entry.is_zero() {
            continue;
        }
        let minor = pf_subset(a, mask & !(1u64 << s) & !(1u64 << last), memo);
        let t = entry.mul(&minor);
        // sign (-1)^(m + r + 1) with r 1-based is (-1)^(m + r) with r 0-based
        acc = if (m + r) % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
    }
    memo.insert(mask, acc.clone());
    acc
}

/// Determinant of a square matrix by cofactor expansion along the first row.
pub fn det_cofactor<T: Ring>(m: &[Vec<T>]) -> T {
    let n = m.len();
    if n == 0 {
        return T::one();
    }
    let mut memo: HashMap<u64, T> = HashMap::new();
    det_rec(m, 0, (1u64 << n) - 1, &mut memo)
}

fn det_rec<T: Ring>(m: &[Vec<T>], row: usize, cols: u64, memo: &mut HashMap<u64, T>) -> T {
    if cols == 0 {
        return T::one();
    }
    if let Some(v) = memo.get(&cols) {
        return v.clone();
    }
    let mut acc = T::zero();
    let mut pos = 0;
    for c in 0..m.len() {
        if cols >> c & 1 == 0 {
            continue;
        }
        let e = &m[row][c];
        if !e.is_zero() {
            let t = e.mul(&det_rec(m, row + 1, cols & !(1u64 << c), memo));
            acc = if pos % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
        }
        pos += 1;
    }
    memo.insert(cols, acc.clone());
    acc
}

/// Checks `pf(A)^2 = det(A)` for the skew-symmetric extension.
pub fn pf_squared_is_det<T: Ring + PartialEq>(a: &TriArray<T>) -> bool {
    let pf = pfaffian(a);
    let full: Vec<Vec<T>> = (0..a.order).map(|i| (0..a.order).map(|j| a.get(i, j)).collect()).collect();
    pf.mul(&pf) == det_cofactor(&full)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn int(n: i64) -> BigInt {
        BigInt::from(n)
    }

    fn random(rng: &mut ChaCha8Rng, order: usize) -> TriArray<BigInt> {
        TriArray::from_fn(order, |_, _| int(rng.gen_range(-5..=5))).unwrap()
    }

    #[test]
    fn small_orders() {
        let a = TriArray::from_rows(vec![vec![int(7)]]).unwrap();
        assert_eq!(pf_matchings(&a).unwrap(), int(7));
        assert_eq!(pf_laplace(&a, 1).unwrap(), int(7));
        // a12 a34 - a13 a24 + a14 a23
        let b = TriArray::from_rows(vec![vec![int(2), int(3), int(5)], vec![int(7), int(11)], vec![int(13)]]).unwrap();
        let expect = int(2 * 13 - 3 * 11 + 5 * 7);
        assert_eq!(pf_matchings(&b).unwrap(), expect);
        for p in 1..=4 {
            assert_eq!(pf_laplace(&b, p).unwrap(), expect);
        }
    }

    #[test]
    fn all_ones_has_pfaffian_one() {
        for order in [2, 4, 6, 8, 10] {
            let a = TriArray::from_fn(order, |_, _| int(1)).unwrap();
            assert_eq!(pf_matchings(&a).unwrap(), int(1));
            assert_eq!(pfaffian(&a), int(1));
            if order <= 8 {
                assert!(pf_squared_is_det(&a));
            }
        }
    }

    #[test]
    fn engines_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for t in 0..30 {
            let order = 2 * (1 + t % 5);
            let a = random(&mut rng, order);
            let m = pf_matchings(&a).unwrap();
            assert_eq!(pf_laplace(&a, order).unwrap(), m);
            assert_eq!(pf_laplace(&a, 1 + t % order).unwrap(), m);
            let c = a.map(|x| CheckedInt(Some(i128::try_from(x).unwrap())));
            assert_eq!(pfaffian(&c).0.map(BigInt::from), Some(m));
        }
    }

    #[test]
    fn squares_to_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for order in [2, 4, 6, 8] {
            for _ in 0..4 {
                assert!(pf_squared_is_det(&random(&mut rng, order)));
            }
        }
    }

    #[test]
    fn multilinear_in_an_index() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let order = 6;
            let p = rng.gen_range(0..order);
            let base = random(&mut rng, order);
            let v: Vec<BigInt> = (0..order).map(|_| int(rng.gen_range(-4..=4))).collect();
            let w: Vec<BigInt> = (0..order).map(|_| int(rng.gen_range(-4..=4))).collect();
            let with = |vec: &dyn Fn(usize) -> BigInt| {
                TriArray::from_fn(order, |i, j| {
                    if i == p {
                        vec(j)
                    } else if j == p {
                        -vec(i)
                    } else {
                        base.get(i, j)
                    }
                })
                .unwrap()
            };
            let sum = pfaffian(&with(&|k| &v[k] + &w[k]));
            assert_eq!(sum, pfaffian(&with(&|k| v[k].clone())) + pfaffian(&with(&|k| w[k].clone())));
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(TriArray::from_fn(3, |_, _| int(1)), Err(Error::Domain(_))));
        let a = TriArray::from_fn(14, |_, _| int(1)).unwrap();
        assert!(matches!(pf_matchings(&a), Err(Error::Resource(_))));
        assert!(pf_laplace(&a, 15).is_err());
    }

    #[test]
    fn overflow_is_detected() {
        let a = TriArray::from_fn(2, |_, _| CheckedInt(Some(i128::MAX))).unwrap();
        let b = a.map(|x| x.mul(x));
        assert_eq!(pfaffian(&b).0, None);
    }
}
