//! Exact row reduction.
//!
//! Both reducers keep a semi-echelon basis: every stored row has a distinct
//! leading (smallest) column. Pivoting is deterministic: a new vector is
//! reduced against existing rows by its leading column only.

use std::collections::BTreeMap;

use crate::coeff::{mod_inverse, Coeff};

/// Sparse vector over `F_p`, sorted by column, no zero entries.
pub type FpVec = Vec<(u32, u32)>;

#[derive(Clone, Debug)]
pub struct FpEchelon {
    p: u32,
    rows: BTreeMap<u32, FpVec>,
}

impl FpEchelon {
    pub fn new(p: u64) -> FpEchelon {
        FpEchelon {
            p: p as u32,
            rows: BTreeMap::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = u32> + '_ {
        self.rows.keys().copied()
    }

    /// Number of stored rows whose leading column is at least `c0`; this is
    /// the dimension of the intersection with the span of columns `>= c0`.
    pub fn rows_leading_at_least(&self, c0: u32) -> usize {
        self.rows.range(c0..).count()
    }

    /// Inserts `v`; returns true when it was independent of the stored rows.
    pub fn insert(&mut self, v: FpVec) -> bool {
        let p = self.p as u64;
        let mut v = v;
        loop {
            let Some(&(lead, val)) = v.first() else {
                return false;
            };
            match self.rows.get(&lead) {
                Some(row) => {
                    let factor = (p - val as u64) % p;
                    v = axpy(&v, row, factor, p);
                }
                None => {
                    let inv = mod_inverse(val as u64, p).expect("nonzero mod p");
                    for e in v.iter_mut() {
                        e.1 = ((e.1 as u64 * inv) % p) as u32;
                    }
                    self.rows.insert(lead, v);
                    return true;
                }
            }
        }
    }

    /// Reduces `v` by leading columns; zero result means `v` is in the span.
    pub fn contains(&self, v: &FpVec) -> bool {
        let p = self.p as u64;
        let mut v = v.clone();
        loop {
            let Some(&(lead, val)) = v.first() else {
                return true;
            };
            match self.rows.get(&lead) {
                Some(row) => v = axpy(&v, row, (p - val as u64) % p, p),
                None => return false,
            }
        }
    }
}

/// `a + f·b` for sparse vectors.
fn axpy(a: &FpVec, b: &FpVec, f: u64, p: u64) -> FpVec {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push((b[j].0, ((b[j].1 as u64 * f) % p) as u32));
            j += 1;
        } else {
            let v = (a[i].1 as u64 + b[j].1 as u64 * f) % p;
            if v != 0 {
                out.push((a[i].0, v as u32));
            }
            i += 1;
            j += 1;
        }
    }
    out.retain(|e| e.1 != 0);
    out
}

/// Rank of a list of sparse rows over `F_p`.
pub fn fp_rank(p: u64, rows: impl IntoIterator<Item = FpVec>) -> usize {
    let mut e = FpEchelon::new(p);
    for r in rows {
        e.insert(r);
    }
    e.rank()
}

/// Semi-echelon reducer over arbitrary exact coefficients (fields only).
#[derive(Clone, Debug, Default)]
pub struct CoeffEchelon {
    rows: BTreeMap<usize, BTreeMap<usize, Coeff>>,
}

impl CoeffEchelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn insert(&mut self, v: BTreeMap<usize, Coeff>) -> bool {
        let mut v: BTreeMap<usize, Coeff> = v.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        loop {
            let Some((&lead, val)) = v.iter().next() else {
                return false;
            };
            let val = val.clone();
            match self.rows.get(&lead) {
                Some(row) => {
                    for (c, x) in row {
                        let nv = match v.get(c) {
                            Some(y) => y.sub(&x.mul(&val)),
                            None => x.mul(&val).neg(),
                        };
                        if nv.is_zero() {
                            v.remove(c);
                        } else {
                            v.insert(*c, nv);
                        }
                    }
                }
                None => {
                    let inv = val.inverse().expect("field coefficient");
                    let row = v.into_iter().map(|(c, x)| (c, x.mul(&inv))).collect();
                    self.rows.insert(lead, row);
                    return true;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::BaseRing;

    #[test]
    fn rank_over_f3() {
        // [1 2 0; 2 1 0; 0 0 1] has rank 2 over F_3 (row2 = 2*row1).
        let rows = vec![
            vec![(0, 1), (1, 2)],
            vec![(0, 2), (1, 1)],
            vec![(2, 1)],
        ];
        assert_eq!(fp_rank(3, rows), 2);
    }

    #[test]
    fn intersection_with_tail() {
        let mut e = FpEchelon::new(5);
        e.insert(vec![(0, 1), (2, 1)]);
        e.insert(vec![(0, 1), (3, 4)]);
        // second row reduces to (2,-1),(3,4): leading column 2
        assert_eq!(e.rows_leading_at_least(2), 1);
        assert!(e.contains(&vec![(2, 4), (3, 4)]));
    }

    #[test]
    fn rational_rank() {
        let q = BaseRing::PLocal(2);
        let mut e = CoeffEchelon::new();
        let row = |a: i64, b: i64| -> BTreeMap<usize, Coeff> {
            [(0, q.from_i64(a)), (1, q.from_i64(b))].into_iter().collect()
        };
        assert!(e.insert(row(2, 4)));
        assert!(!e.insert(row(1, 2)));
        assert!(e.insert(row(1, 3)));
        assert_eq!(e.rank(), 2);
    }
}
