//! Exact rational linear algebra over sparse rows with arbitrary column keys.
//!
//! Elimination pivots on the first nonzero entry in column order, so the
//! result depends only on the column order, never on row order. Clearing a
//! pivot column from the other rows is done row-parallel; each row update is
//! independent, so the parallel and sequential builds agree bit for bit.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::par;
use crate::term::Q;

/// A sparse row: column key to nonzero rational.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RowVector<K: Ord> {
    entries: BTreeMap<K, Q>,
}

impl<K: Ord> Default for RowVector<K> {
    fn default() -> Self {
        RowVector {
            entries: BTreeMap::new(),
        }
    }
}

impl<K: Ord + Clone> RowVector<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries<I: IntoIterator<Item = (K, Q)>>(it: I) -> Self {
        let mut r = Self::new();
        for (k, v) in it {
            r.add(k, &v);
        }
        r
    }

    pub fn add(&mut self, k: K, v: &Q) {
        if v.is_zero() {
            return;
        }
        let slot = self.entries.entry(k.clone()).or_insert_with(Q::zero);
        *slot += v;
        if slot.is_zero() {
            self.entries.remove(&k);
        }
    }

    pub fn get(&self, k: &K) -> Q {
        self.entries.get(k).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &Q)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &K> {
        self.entries.keys()
    }

    pub fn dot(&self, other: &RowVector<K>) -> Q {
        let mut acc = Q::zero();
        for (k, v) in &self.entries {
            if let Some(w) = other.entries.get(k) {
                acc += v * w;
            }
        }
        acc
    }

    pub fn scale(&self, r: &Q) -> RowVector<K> {
        if r.is_zero() {
            return Self::new();
        }
        RowVector {
            entries: self.entries.iter().map(|(k, v)| (k.clone(), v * r)).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &RowVector<K>, r: &Q) {
        for (k, v) in &other.entries {
            self.add(k.clone(), &(v * r));
        }
    }

    /// If `self = r * other` for some nonzero `r`, return `r`.
    pub fn ratio_to(&self, other: &RowVector<K>) -> Option<Q> {
        if self.len() != other.len() {
            return None;
        }
        let (k, v) = other.entries.iter().next()?;
        let r = self.entries.get(k)? / v;
        (self == &other.scale(&r)).then_some(r)
    }
}

impl<K: Ord + fmt::Debug> fmt::Debug for RowVector<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.entries.iter().map(|(k, v)| (k, v.to_string())))
            .finish()
    }
}

/// Rows over an ordered column set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSystem<K: Ord> {
    pub columns: Vec<K>,
    pub rows: Vec<RowVector<K>>,
}

/// A kernel basis in reduced echelon form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionSpace<K: Ord> {
    pub basis: Vec<RowVector<K>>,
    pub nullity: usize,
}

/// Output of [`rref`].
#[derive(Clone, Debug)]
pub struct Rref<K: Ord> {
    pub system: LinearSystem<K>,
    pub pivots: Vec<K>,
    pub rank: usize,
}

type Sparse = BTreeMap<usize, Q>;

impl<K: Ord + Clone> LinearSystem<K> {
    pub fn new(columns: Vec<K>) -> Self {
        LinearSystem {
            columns,
            rows: Vec::new(),
        }
    }

    /// Panics if `row` mentions a column outside `columns`.
    pub fn push(&mut self, row: RowVector<K>) {
        debug_assert!(row.keys().all(|k| self.columns.contains(k)));
        self.rows.push(row);
    }

    fn index(&self) -> BTreeMap<&K, usize> {
        self.columns.iter().enumerate().map(|(n, k)| (k, n)).collect()
    }

    fn to_sparse(&self) -> Vec<Sparse> {
        let index = self.index();
        self.rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|(k, v)| {
                        let n = *index.get(k).unwrap_or_else(|| panic!("row key outside column set"));
                        (n, v.clone())
                    })
                    .collect()
            })
            .collect()
    }

    fn to_rows(&self, rows: &[Sparse]) -> Vec<RowVector<K>> {
        rows.iter()
            .map(|r| RowVector {
                entries: r.iter().map(|(&n, v)| (self.columns[n].clone(), v.clone())).collect(),
            })
            .collect()
    }

    pub fn rank(&self) -> usize {
        eliminate(self.to_sparse()).1.len()
    }
}

/// Gauss-Jordan elimination. Returns the nonzero reduced rows, ordered by
/// pivot, and the pivot column indices.
fn eliminate(mut rows: Vec<Sparse>) -> (Vec<Sparse>, Vec<usize>) {
    rows.retain(|r| !r.is_empty());
    let mut done: Vec<Sparse> = Vec::new();
    let mut pivots = Vec::new();
    // Next pivot: the smallest leading column among remaining rows.
    while let Some((idx, col)) = rows
        .iter()
        .enumerate()
        .filter_map(|(n, r)| r.keys().next().map(|&c| (n, c)))
        .min_by_key(|&(n, c)| (c, n))
    {
        let mut prow = rows.swap_remove(idx);
        let inv = Q::one() / &prow[&col];
        for v in prow.values_mut() {
            *v *= &inv;
        }
        let clear = |r: &mut Sparse| {
            if let Some(f) = r.get(&col).cloned() {
                for (c, v) in &prow {
                    let slot = r.entry(*c).or_insert_with(Q::zero);
                    *slot -= &f * v;
                    if slot.is_zero() {
                        r.remove(c);
                    }
                }
            }
        };
        par::for_each_mut(&mut rows, clear);
        par::for_each_mut(&mut done, clear);
        rows.retain(|r| !r.is_empty());
        done.push(prow);
        pivots.push(col);
    }
    (done, pivots)
}

/// Reduced row echelon form. Rows of the result are the nonzero reduced rows
/// sorted by pivot column.
pub fn rref<K: Ord + Clone>(sys: &LinearSystem<K>) -> Rref<K> {
    let (rows, pivots) = eliminate(sys.to_sparse());
    let rank = pivots.len();
    Rref {
        system: LinearSystem {
            columns: sys.columns.clone(),
            rows: sys.to_rows(&rows),
        },
        pivots: pivots.iter().map(|&n| sys.columns[n].clone()).collect(),
        rank,
    }
}

/// Exact kernel basis, itself brought to reduced echelon form so it is
/// independent of how the system was presented.
pub fn nullspace<K: Ord + Clone>(sys: &LinearSystem<K>) -> SolutionSpace<K> {
    let n = sys.columns.len();
    let (rows, pivots) = eliminate(sys.to_sparse());
    let is_pivot: Vec<bool> = {
        let mut v = vec![false; n];
        for &p in &pivots {
            v[p] = true;
        }
        v
    };
    let mut basis: Vec<Sparse> = Vec::new();
    for free in (0..n).filter(|&c| !is_pivot[c]) {
        let mut b = Sparse::new();
        b.insert(free, Q::one());
        for (r, &p) in rows.iter().zip(&pivots) {
            if let Some(v) = r.get(&free) {
                b.insert(p, -v.clone());
            }
        }
        basis.push(b);
    }
    let (basis, _) = eliminate(basis);
    let nullity = basis.len();
    SolutionSpace {
        basis: sys.to_rows(&basis),
        nullity,
    }
}

/// Decide whether `v` is a combination of `rows`; on success return the
/// coefficients (one per input row, free choices set to zero).
pub fn in_span<K: Ord + Clone>(rows: &[RowVector<K>], v: &RowVector<K>) -> Option<Vec<Q>> {
    if v.is_zero() {
        return Some(vec![Q::zero(); rows.len()]);
    }
    // Transpose: unknown w_r for each row, one equation per key, last
    // column holds the target.
    let m = rows.len();
    let mut eqs: BTreeMap<&K, Sparse> = BTreeMap::new();
    for (r, row) in rows.iter().enumerate() {
        for (k, x) in row.iter() {
            eqs.entry(k).or_default().insert(r, x.clone());
        }
    }
    for (k, x) in v.iter() {
        eqs.entry(k).or_default().insert(m, x.clone());
    }
    let (red, pivots) = eliminate(eqs.into_values().collect());
    if pivots.last() == Some(&m) {
        return None;
    }
    let mut w = vec![Q::zero(); m];
    for (r, &p) in red.iter().zip(&pivots) {
        w[p] = r.get(&m).cloned().unwrap_or_else(Q::zero);
    }
    Some(w)
}

/// Rank of a bare list of rows.
pub fn rank_of<K: Ord + Clone>(rows: &[RowVector<K>]) -> usize {
    let mut columns: Vec<K> = rows.iter().flat_map(|r| r.keys().cloned()).collect();
    columns.sort();
    columns.dedup();
    let mut sys = LinearSystem::new(columns);
    sys.rows = rows.to_vec();
    sys.rank()
}

/// `dim(span a ∩ span b) = rank a + rank b - rank(a ∪ b)`.
pub fn intersection_dim<K: Ord + Clone>(a: &[RowVector<K>], b: &[RowVector<K>]) -> usize {
    let both: Vec<RowVector<K>> = a.iter().chain(b).cloned().collect();
    rank_of(a) + rank_of(b) - rank_of(&both)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{q, qf};

    fn sys(rows: &[&[i64]]) -> LinearSystem<usize> {
        let n = rows.first().map_or(0, |r| r.len());
        let mut s = LinearSystem::new((0..n).collect());
        for r in rows {
            s.push(RowVector::from_entries(r.iter().enumerate().map(|(k, &v)| (k, q(v)))));
        }
        s
    }

    #[test]
    fn identity_has_full_rank() {
        let r = rref(&sys(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]));
        assert_eq!(r.rank, 3);
        assert_eq!(r.pivots, vec![0, 1, 2]);
    }

    #[test]
    fn duplicate_row_keeps_rank() {
        let a = sys(&[&[1, 2, 3], &[4, 5, 6]]);
        let b = sys(&[&[1, 2, 3], &[4, 5, 6], &[4, 5, 6]]);
        assert_eq!(rref(&a).rank, 2);
        assert_eq!(rref(&b).rank, 2);
        assert_eq!(rref(&a).system.rows, rref(&b).system.rows);
    }

    #[test]
    fn zero_system_has_full_nullity() {
        let mut s = LinearSystem::new(vec![0usize, 1, 2, 3]);
        s.push(RowVector::new());
        let ns = nullspace(&s);
        assert_eq!(ns.nullity, 4);
    }

    #[test]
    fn kernel_vector_is_normalised() {
        let s = sys(&[&[2, 4, -2]]);
        let ns = nullspace(&s);
        assert_eq!(ns.nullity, 2);
        for b in &ns.basis {
            assert!(s.rows[0].dot(b).is_zero());
        }
        let one = sys(&[&[1, 1, 0], &[0, 3, 1]]);
        let ns = nullspace(&one);
        assert_eq!(ns.nullity, 1);
        let b = &ns.basis[0];
        assert_eq!(b.get(&0), q(1));
        assert_eq!(b.get(&1), q(-1));
        assert_eq!(b.get(&2), q(3));
    }

    #[test]
    fn span_membership_with_witness() {
        let rows = sys(&[&[1, 1, 0], &[0, 1, 1]]).rows;
        let v = RowVector::from_entries([(0, q(2)), (1, q(5)), (2, q(3))]);
        let w = in_span(&rows, &v).unwrap();
        assert_eq!(w, vec![q(2), q(3)]);
        let e = RowVector::from_entries([(0, q(1))]);
        assert!(in_span(&rows, &e).is_none());
        assert!(in_span::<usize>(&[], &e).is_none());
        assert_eq!(in_span::<usize>(&[], &RowVector::new()), Some(vec![]));
    }

    #[test]
    fn ratio_detection() {
        let a = RowVector::from_entries([(0, q(2)), (3, qf(1, 2))]);
        let b = RowVector::from_entries([(0, q(-4)), (3, q(-1))]);
        assert_eq!(b.ratio_to(&a), Some(q(-2)));
        let c = RowVector::from_entries([(0, q(-4)), (3, q(1))]);
        assert_eq!(c.ratio_to(&a), None);
    }

    #[test]
    fn subspace_meet() {
        let unit = |k: usize| RowVector::from_entries([(k, q(1))]);
        let rows = sys(&[&[1, 1, 0], &[0, 0, 1], &[1, 0, 0]]).rows;
        assert_eq!(intersection_dim(&rows, &[unit(1), unit(2)]), 2);
        let rows = sys(&[&[1, 1, 0], &[0, 0, 1]]).rows;
        assert_eq!(intersection_dim(&rows, &[unit(1), unit(2)]), 1);
        assert_eq!(intersection_dim(&rows, &[]), 0);
    }
}
