//! Exact sparse linear algebra over ℚ(i).
//!
//! Vectors are sparse maps from an ordered key type to coefficients. The
//! [`Echelon`] basis picks as pivot the smallest key of each row, so callers
//! control which coordinates get eliminated first through the key order. The
//! remainder of a vector after reduction is unique for a given row space and
//! key order; it serves as a normal form modulo the span.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::field::Gq;

pub type SparseVec<K> = BTreeMap<K, Gq>;

fn axpy<K: Ord + Clone>(target: &mut SparseVec<K>, c: &Gq, x: &SparseVec<K>) {
    for (k, v) in x {
        let add = c * v;
        match target.entry(k.clone()) {
            std::collections::btree_map::Entry::Vacant(e) => {
                if !add.is_zero() {
                    e.insert(add);
                }
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += &add;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
struct Row<K> {
    vec: SparseVec<K>,
    combo: SparseVec<usize>,
}

/// An incrementally built echelon basis that remembers how every row is
/// combined from the inserted generators.
#[derive(Clone, Debug)]
pub struct Echelon<K: Ord + Clone> {
    rows: BTreeMap<K, Row<K>>,
    generators: usize,
    kernel: Vec<SparseVec<usize>>,
}

impl<K: Ord + Clone> Default for Echelon<K> {
    fn default() -> Self {
        Echelon { rows: BTreeMap::new(), generators: 0, kernel: Vec::new() }
    }
}

/// Result of reducing a vector against an [`Echelon`] basis.
#[derive(Clone, Debug)]
pub struct Reduction<K> {
    /// What is left after subtracting the span; supported on non-pivot keys.
    pub remainder: SparseVec<K>,
    /// Coefficients `c_g` with `v − remainder = Σ c_g · generator_g`.
    pub combination: SparseVec<usize>,
}

impl<K: Ord + Clone> Echelon<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    /// Linear relations found among the inserted generators.
    pub fn kernel(&self) -> &[SparseVec<usize>] {
        &self.kernel
    }

    pub fn pivots(&self) -> impl Iterator<Item = &K> {
        self.rows.keys()
    }

    pub fn is_pivot(&self, k: &K) -> bool {
        self.rows.contains_key(k)
    }

    /// Reduces `v` against the current rows.
    pub fn reduce(&self, v: &SparseVec<K>) -> Reduction<K> {
        let (remainder, combo) = self.reduce_inner(v.clone(), SparseVec::new());
        let combination = combo.into_iter().map(|(g, c)| (g, -c)).collect();
        Reduction { remainder, combination }
    }

    fn reduce_inner(&self, mut v: SparseVec<K>, mut combo: SparseVec<usize>) -> (SparseVec<K>, SparseVec<usize>) {
        let mut cursor: Option<K> = None;
        loop {
            let next = {
                let mut it: Box<dyn Iterator<Item = (&K, &Gq)>> = match &cursor {
                    None => Box::new(v.iter()),
                    Some(k) => Box::new(v.range(k.clone()..)),
                };
                it.find(|(k, _)| self.rows.contains_key(*k)).map(|(k, c)| (k.clone(), c.clone()))
            };
            let Some((k, c)) = next else { break };
            let row = &self.rows[&k];
            let neg = -c;
            axpy(&mut v, &neg, &row.vec);
            axpy(&mut combo, &neg, &row.combo);
            cursor = Some(k);
        }
        (v, combo)
    }

    /// Inserts a generator and returns its index. A generator in the span
    /// records a kernel relation instead of a new row.
    pub fn insert(&mut self, v: SparseVec<K>) -> usize {
        let id = self.generators;
        self.generators += 1;
        let mut combo = SparseVec::new();
        combo.insert(id, Gq::one());
        let (rem, combo) = self.reduce_inner(v, combo);
        match rem.iter().next() {
            None => self.kernel.push(combo),
            Some((k, lead)) => {
                let k = k.clone();
                let inv = lead.inv().expect("nonzero lead");
                let vec = rem.iter().map(|(kk, c)| (kk.clone(), c * &inv)).collect();
                let combo = combo.iter().map(|(g, c)| (*g, c * &inv)).collect();
                self.rows.insert(k, Row { vec, combo });
            }
        }
        id
    }

    pub fn contains(&self, v: &SparseVec<K>) -> bool {
        self.reduce(v).remainder.is_empty()
    }
}

/// Rank of a family of sparse vectors.
pub fn rank<K: Ord + Clone>(vectors: impl IntoIterator<Item = SparseVec<K>>) -> usize {
    let mut e = Echelon::new();
    for v in vectors {
        e.insert(v);
    }
    e.rank()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(pairs: &[(u32, i64)]) -> SparseVec<u32> {
        pairs.iter().map(|&(k, c)| (k, Gq::from_int(c))).filter(|(_, c)| !c.is_zero()).collect()
    }

    #[test]
    fn rank_and_kernel() {
        let mut e = Echelon::new();
        e.insert(v(&[(0, 1), (1, 2)]));
        e.insert(v(&[(1, 1), (2, 1)]));
        e.insert(v(&[(0, 1), (1, 3), (2, 1)]));
        assert_eq!(e.rank(), 2);
        assert_eq!(e.kernel().len(), 1);
        let rel = &e.kernel()[0];
        assert_eq!(rel.get(&0), Some(&Gq::from_int(-1)));
        assert_eq!(rel.get(&1), Some(&Gq::from_int(-1)));
        assert_eq!(rel.get(&2), Some(&Gq::from_int(1)));
    }

    #[test]
    fn reduction_gives_witness() {
        let mut e = Echelon::new();
        e.insert(v(&[(0, 2), (3, 1)]));
        e.insert(v(&[(1, 1), (3, -1)]));
        let target = v(&[(0, 4), (1, 1), (3, 5)]);
        let red = e.reduce(&target);
        // 2*g0 + 1*g1 = (4, 1, 0, 1); remainder (3) -> 4
        assert_eq!(red.remainder, v(&[(3, 4)]));
        assert_eq!(red.combination.get(&0), Some(&Gq::from_int(2)));
        assert_eq!(red.combination.get(&1), Some(&Gq::from_int(1)));
    }
}
