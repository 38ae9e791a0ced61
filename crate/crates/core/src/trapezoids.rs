//! Brute-force enumeration of Gelfand-Tsetlin and monotone trapezoids, and
//! the bijection between monotone trapezoids and sign matrices.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{domain, Error, Result};

/// Default cap on counts and on the number of streamed trapezoids.
pub const DEFAULT_COUNT_CAP: u128 = 1 << 40;

/// An `(h, n)` trapezoid; `rows[0]` is the (free) top row of length `n - h`
/// and `rows[h]` is the bottom row.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Trapezoid {
    pub h: usize,
    pub n: usize,
    pub rows: Vec<Vec<i64>>,
}

impl Trapezoid {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        let Some(bottom) = rows.last() else {
            return domain("a trapezoid needs a bottom row");
        };
        let n = bottom.len();
        let h = rows.len() - 1;
        if h > n {
            return domain(format!("height {h} exceeds bottom length {n}"));
        }
        for (t, r) in rows.iter().enumerate() {
            if r.len() != n - h + t {
                return domain(format!("row {t} has length {}, expected {}", r.len(), n - h + t));
            }
        }
        for t in 1..rows.len() {
            if !interlaces(&rows[t - 1], &rows[t]) {
                return domain(format!("row {} does not interlace row {t}", t - 1));
            }
        }
        Ok(Trapezoid { h, n, rows })
    }

    pub fn bottom(&self) -> &[i64] {
        &self.rows[self.h]
    }

    pub fn is_monotone(&self) -> bool {
        self.rows.iter().all(|r| r.windows(2).all(|w| w[0] < w[1]))
    }
}

/// `k_1 <= l_1 <= k_2 <= ... <= l_{n-1} <= k_n`.
fn interlaces(l: &[i64], k: &[i64]) -> bool {
    l.len() + 1 == k.len() && l.iter().enumerate().all(|(i, &x)| k[i] <= x && x <= k[i + 1])
}

struct Counter {
    monotone: bool,
    cap: u128,
    memo: HashMap<(usize, Vec<i64>), u128>,
}

impl Counter {
    fn count(&mut self, h: usize, row: &[i64]) -> Result<u128> {
        if h == 0 || row.len() <= 1 {
            return Ok(1);
        }
        if let Some(&c) = self.memo.get(&(h, row.to_vec())) {
            return Ok(c);
        }
        let mut total: u128 = 0;
        let mut l = vec![0i64; row.len() - 1];
        self.rows_above(h, row, 0, &mut l, &mut total)?;
        self.memo.insert((h, row.to_vec()), total);
        Ok(total)
    }

    fn rows_above(&mut self, h: usize, k: &[i64], i: usize, l: &mut Vec<i64>, total: &mut u128) -> Result<()> {
        if i == l.len() {
            let c = self.count(h - 1, &l.clone())?;
            *total = total
                .checked_add(c)
                .filter(|&t| t <= self.cap)
                .ok_or_else(|| Error::Resource(format!("count exceeds cap {}", self.cap)))?;
            return Ok(());
        }
        let mut lo = k[i];
        if self.monotone && i > 0 {
            lo = lo.max(l[i - 1] + 1);
        }
        for v in lo..=k[i + 1] {
            l[i] = v;
            self.rows_above(h, k, i + 1, l, total)?;
        }
        Ok(())
    }
}

fn check_bottom(h: usize, bottom: &[i64], monotone: bool) -> Result<()> {
    if h > bottom.len() {
        return domain(format!("height {h} exceeds bottom length {}", bottom.len()));
    }
    if monotone && !bottom.windows(2).all(|w| w[0] < w[1]) {
        return domain("monotone enumeration needs a strictly increasing bottom row");
    }
    if !bottom.windows(2).all(|w| w[0] <= w[1]) {
        return domain("bottom row must be weakly increasing");
    }
    Ok(())
}

/// Number of `(h, n)` GT (or monotone) trapezoids with the given bottom row.
pub fn enumerate_gt(h: usize, bottom: &[i64], monotone: bool) -> Result<u128> {
    enumerate_gt_capped(h, bottom, monotone, DEFAULT_COUNT_CAP)
}

pub fn enumerate_gt_capped(h: usize, bottom: &[i64], monotone: bool, cap: u128) -> Result<u128> {
    check_bottom(h, bottom, monotone)?;
    Counter { monotone, cap, memo: HashMap::new() }.count(h, bottom)
}

/// Calls `emit` for every trapezoid, at most `cap` of them.
pub fn enumerate_gt_stream(
    h: usize,
    bottom: &[i64],
    monotone: bool,
    cap: u128,
    emit: &mut dyn FnMut(&Trapezoid),
) -> Result<u128> {
    check_bottom(h, bottom, monotone)?;
    let mut rows = vec![bottom.to_vec()];
    let mut seen = 0u128;
    stream_rec(h, monotone, cap, &mut rows, &mut seen, emit)?;
    Ok(seen)
}

fn stream_rec(
    h: usize,
    monotone: bool,
    cap: u128,
    rows: &mut Vec<Vec<i64>>,
    seen: &mut u128,
    emit: &mut dyn FnMut(&Trapezoid),
) -> Result<()> {
    if rows.len() == h + 1 {
        *seen += 1;
        if *seen > cap {
            return Err(Error::Resource(format!("more than {cap} trapezoids")));
        }
        let mut top_down = rows.clone();
        top_down.reverse();
        let n = top_down[h].len();
        emit(&Trapezoid { h, n, rows: top_down });
        return Ok(());
    }
    let k = rows.last().unwrap().clone();
    let mut l = vec![0i64; k.len().saturating_sub(1)];
    next_rows(&k, 0, monotone, &mut l, &mut |row| {
        rows.push(row.to_vec());
        let r = stream_rec(h, monotone, cap, rows, seen, emit);
        rows.pop();
        r
    })
}

fn next_rows(
    k: &[i64],
    i: usize,
    monotone: bool,
    l: &mut Vec<i64>,
    f: &mut dyn FnMut(&[i64]) -> Result<()>,
) -> Result<()> {
    if i == l.len() {
        return f(l);
    }
    let mut lo = k[i];
    if monotone && i > 0 {
        lo = lo.max(l[i - 1] + 1);
    }
    for v in lo..=k[i + 1] {
        l[i] = v;
        next_rows(k, i + 1, monotone, l, f)?;
    }
    Ok(())
}

/// `{0, +1, -1}` matrix with `h` rows and `width = k_n` columns.
///
/// `positions` records the bottom row, which the matrix alone does not
/// determine when a column is empty.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignMatrix {
    pub h: usize,
    pub width: usize,
    pub entries: Vec<Vec<i8>>,
    pub positions: Vec<i64>,
}

impl SignMatrix {
    /// Checks alternation in rows and columns, unit row sums and the rule for
    /// the bottom-most non-zero entry of each column.
    pub fn validate(&self) -> Result<()> {
        if self.entries.len() != self.h || self.entries.iter().any(|r| r.len() != self.width) {
            return domain("matrix shape does not match h x width");
        }
        if self.entries.iter().flatten().any(|&e| !(-1..=1).contains(&e)) {
            return domain("entries must be in {-1, 0, 1}");
        }
        let pos_ok = self.positions.windows(2).all(|w| w[0] < w[1])
            && self.positions.first().is_none_or(|&p| p >= 1)
            && self.positions.last().is_none_or(|&p| p as usize == self.width);
        if !pos_ok {
            return domain("positions must increase strictly within 1..=width and end at width");
        }
        for (t, row) in self.entries.iter().enumerate() {
            if !alternates(row.iter().copied()) {
                return domain(format!("row {} does not alternate", t + 1));
            }
            if row.iter().map(|&e| e as i64).sum::<i64>() != 1 {
                return domain(format!("row {} does not sum to 1", t + 1));
            }
        }
        for c in 0..self.width {
            let col: Vec<i8> = self.entries.iter().map(|r| r[c]).collect();
            if !alternates(col.iter().copied()) {
                return domain(format!("column {} does not alternate", c + 1));
            }
            if let Some(&last) = col.iter().rev().find(|&&e| e != 0) {
                let in_k = self.positions.binary_search(&(c as i64 + 1)).is_ok();
                if (last == 1) != in_k {
                    return domain(format!("bottom entry of column {} has the wrong sign", c + 1));
                }
            }
        }
        Ok(())
    }
}

fn alternates(it: impl Iterator<Item = i8>) -> bool {
    let mut prev = 0i8;
    for e in it.filter(|&e| e != 0) {
        if e == prev {
            return false;
        }
        prev = e;
    }
    true
}

fn indicator(row: &[i64], width: usize) -> Vec<i8> {
    let mut v = vec![0i8; width];
    for &x in row {
        v[(x - 1) as usize] = 1;
    }
    v
}

/// Row `t` of the matrix is `ind(row_t) - ind(row_{t-1})`; the row coming
/// from the top row alone is dropped.
pub fn to_sign_matrix(t: &Trapezoid) -> Result<SignMatrix> {
    if !t.is_monotone() {
        return domain("only monotone trapezoids map to sign matrices");
    }
    if t.rows.iter().flatten().any(|&x| x < 1) {
        return domain("entries must be positive");
    }
    let width = t.bottom().last().map_or(0, |&x| x as usize);
    let entries = (1..=t.h)
        .map(|r| {
            let a = indicator(&t.rows[r], width);
            let b = indicator(&t.rows[r - 1], width);
            a.iter().zip(&b).map(|(x, y)| x - y).collect()
        })
        .collect();
    let m = SignMatrix { h: t.h, width, entries, positions: t.bottom().to_vec() };
    m.validate()?;
    Ok(m)
}

/// Inverse of [`to_sign_matrix`]: partial column sums from the bottom
/// recover the rows.
pub fn from_sign_matrix(m: &SignMatrix) -> Result<Trapezoid> {
    m.validate()?;
    let mut ind: Vec<i8> = vec![0; m.width];
    for &p in &m.positions {
        ind[(p - 1) as usize] = 1;
    }
    let mut rows = vec![m.positions.clone()];
    for r in (0..m.h).rev() {
        for c in 0..m.width {
            ind[c] -= m.entries[r][c];
        }
        if ind.iter().any(|&v| v != 0 && v != 1) {
            return domain("partial column sums leave {0, 1}");
        }
        rows.push((0..m.width).filter(|&c| ind[c] == 1).map(|c| c as i64 + 1).collect());
    }
    rows.reverse();
    let t = Trapezoid::new(rows)?;
    if !t.is_monotone() {
        return domain("reconstructed trapezoid is not monotone");
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> Trapezoid {
        Trapezoid::new(vec![
            vec![8, 12, 15, 18],
            vec![7, 10, 15, 17, 19],
            vec![6, 8, 14, 15, 17, 19],
            vec![3, 8, 12, 15, 16, 18, 20],
        ])
        .unwrap()
    }

    fn printed() -> Vec<Vec<i8>> {
        vec![
            vec![0, 0, 0, 0, 0, 0, 1, -1, 0, 1, 0, -1, 0, 0, 0, 0, 1, -1, 1, 0],
            vec![0, 0, 0, 0, 0, 1, -1, 1, 0, -1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0],
            vec![0, 0, 0, 1, 0, -1, 0, 0, 0, 0, 0, 1, 0, -1, 0, 1, -1, 1, -1, 1],
        ]
    }

    #[test]
    fn small_counts() {
        assert_eq!(enumerate_gt(0, &[1, 5, 9], false).unwrap(), 1);
        assert_eq!(enumerate_gt(1, &[1, 2, 3, 4], false).unwrap(), 8);
        assert_eq!(enumerate_gt(1, &[1, 2, 3, 4], true).unwrap(), 4);
        // monotone triangles with bottom 1..n count alternating sign matrices
        let asm = [1u128, 2, 7, 42, 429];
        for n in 1..=5 {
            let b: Vec<i64> = (1..=n as i64).collect();
            assert_eq!(enumerate_gt(n - 1, &b, true).unwrap(), asm[n - 1]);
            assert_eq!(enumerate_gt(n, &b, true).unwrap(), asm[n - 1]);
        }
    }

    #[test]
    fn stream_matches_count() {
        let b = [1, 3, 4, 7];
        for h in 0..=4 {
            for mono in [false, true] {
                let mut seen = Vec::new();
                let c = enumerate_gt_stream(h, &b, mono, 1 << 20, &mut |t| seen.push(t.clone())).unwrap();
                assert_eq!(c, enumerate_gt(h, &b, mono).unwrap());
                assert!(seen.iter().all(|t| t.is_monotone() || !mono));
                let uniq: std::collections::HashSet<_> = seen.iter().collect();
                assert_eq!(uniq.len() as u128, c);
            }
        }
    }

    #[test]
    fn caps() {
        assert!(matches!(enumerate_gt_capped(3, &[1, 4, 8, 12], false, 10), Err(Error::Resource(_))));
        assert!(matches!(
            enumerate_gt_stream(2, &[1, 4, 8], false, 3, &mut |_| {}),
            Err(Error::Resource(_))
        ));
        assert!(enumerate_gt(1, &[3, 2], false).is_err());
        assert!(enumerate_gt(1, &[2, 2], true).is_err());
    }

    #[test]
    fn example_matrix() {
        let m = to_sign_matrix(&example()).unwrap();
        assert_eq!(m.width, 20);
        // the printed matrix puts the first bottom entry in column 4, not 3
        let mut expected = printed();
        expected[2][2] = 1;
        expected[2][3] = 0;
        assert_eq!(m.entries, expected);
        assert_eq!(from_sign_matrix(&m).unwrap(), example());

        let mut shifted = example().rows;
        shifted[3][0] = 4;
        let shifted = Trapezoid::new(shifted).unwrap();
        let m = to_sign_matrix(&shifted).unwrap();
        assert_eq!(m.entries, printed());
        assert_eq!(from_sign_matrix(&m).unwrap(), shifted);
    }

    #[test]
    fn degenerate_height_zero() {
        let t = Trapezoid::new(vec![vec![2, 5]]).unwrap();
        let m = to_sign_matrix(&t).unwrap();
        assert!(m.entries.is_empty());
        assert_eq!(from_sign_matrix(&m).unwrap(), t);
    }

    #[test]
    fn rejects_bad_input() {
        let weak = Trapezoid::new(vec![vec![2, 2], vec![1, 2, 3]]).unwrap();
        assert!(to_sign_matrix(&weak).is_err());
        let mut bad = printed();
        bad[0][6] = -1;
        let m = SignMatrix { h: 3, width: 20, entries: bad, positions: vec![4, 8, 12, 15, 16, 18, 20] };
        assert!(from_sign_matrix(&m).is_err());
    }

    #[test]
    fn all_small_round_trip() {
        for h in 0..=3 {
            let b = [1, 2, 4, 5, 7];
            enumerate_gt_stream(h, &b, true, 1 << 20, &mut |t| {
                let m = to_sign_matrix(t).unwrap();
                assert_eq!(&from_sign_matrix(&m).unwrap(), t);
            })
            .unwrap();
        }
    }
}
