use std::cmp::Ordering;

use crate::term::Permutation;

use super::World;

pub type Tuple = Vec<World>;

/// A sorted, duplicate-free set of equal-length tuples.
///
/// Boolean operations are linear merges; permuting re-sorts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct TupleSet {
    arity: usize,
    tuples: Vec<Tuple>,
}

impl TupleSet {
    pub fn empty(arity: usize) -> Self {
        Self { arity, tuples: Vec::new() }
    }

    /// Builds a set, sorting and deduplicating. Panics on tuples of the wrong
    /// length.
    pub fn from_tuples(arity: usize, tuples: impl IntoIterator<Item = Tuple>) -> Self {
        let mut tuples: Vec<Tuple> = tuples.into_iter().collect();
        assert!(tuples.iter().all(|t| t.len() == arity), "tuple length differs from arity {arity}");
        tuples.sort_unstable();
        tuples.dedup();
        Self { arity, tuples }
    }

    /// All `worlds^arity` tuples.
    pub fn full(arity: usize, worlds: usize) -> Self {
        let mut tuples = Vec::with_capacity(worlds.pow(arity as u32));
        let mut current = vec![0 as World; arity];
        if worlds == 0 {
            return Self::empty(arity);
        }
        loop {
            tuples.push(current.clone());
            if !advance(&mut current, worlds) {
                break;
            }
        }
        Self { arity, tuples }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Tuple> {
        self.tuples.iter()
    }

    pub fn as_slice(&self) -> &[Tuple] {
        &self.tuples
    }

    pub fn to_vec(&self) -> Vec<Tuple> {
        self.tuples.clone()
    }

    pub fn contains(&self, tuple: &[World]) -> bool {
        self.tuples.binary_search_by(|t| t.as_slice().cmp(tuple)).is_ok()
    }

    pub fn insert(&mut self, tuple: Tuple) -> bool {
        debug_assert_eq!(tuple.len(), self.arity);
        match self.tuples.binary_search(&tuple) {
            Ok(_) => false,
            Err(at) => {
                self.tuples.insert(at, tuple);
                true
            }
        }
    }

    /// The tuples whose first component is `first`.
    pub fn starting_with(&self, first: World) -> &[Tuple] {
        let lo = self.tuples.partition_point(|t| t[0] < first);
        let hi = self.tuples.partition_point(|t| t[0] <= first);
        &self.tuples[lo..hi]
    }

    pub fn permute(&self, perm: &Permutation) -> TupleSet {
        debug_assert_eq!(perm.size(), self.arity);
        let mut tuples: Vec<Tuple> = self.tuples.iter().map(|t| perm.apply(t)).collect();
        tuples.sort_unstable();
        Self { arity: self.arity, tuples }
    }

    pub fn complement(&self, worlds: usize) -> TupleSet {
        TupleSet::full(self.arity, worlds).difference(self)
    }

    pub fn union(&self, other: &TupleSet) -> TupleSet {
        self.merge(other, true, true, true)
    }

    pub fn intersect(&self, other: &TupleSet) -> TupleSet {
        self.merge(other, false, true, false)
    }

    pub fn difference(&self, other: &TupleSet) -> TupleSet {
        self.merge(other, true, false, false)
    }

    /// Sorted merge keeping elements only in `self`, in both, or only in
    /// `other` according to the three flags.
    fn merge(&self, other: &TupleSet, left_only: bool, both: bool, right_only: bool) -> TupleSet {
        debug_assert_eq!(self.arity, other.arity);
        let (a, b) = (&self.tuples, &other.tuples);
        let mut out = Vec::with_capacity(a.len().max(b.len()));
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                Ordering::Less => {
                    if left_only {
                        out.push(a[i].clone());
                    }
                    i += 1;
                }
                Ordering::Greater => {
                    if right_only {
                        out.push(b[j].clone());
                    }
                    j += 1;
                }
                Ordering::Equal => {
                    if both {
                        out.push(a[i].clone());
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        if left_only {
            out.extend(a[i..].iter().cloned());
        }
        if right_only {
            out.extend(b[j..].iter().cloned());
        }
        TupleSet { arity: self.arity, tuples: out }
    }
}

impl<'a> IntoIterator for &'a TupleSet {
    type Item = &'a Tuple;
    type IntoIter = std::slice::Iter<'a, Tuple>;

    fn into_iter(self) -> Self::IntoIter {
        self.tuples.iter()
    }
}

/// Steps `current` to the next tuple in lexicographic order over
/// `0..worlds`; returns `false` after the last one.
pub(crate) fn advance(current: &mut [World], worlds: usize) -> bool {
    for slot in current.iter_mut().rev() {
        if (*slot as usize) + 1 < worlds {
            *slot += 1;
            return true;
        }
        *slot = 0;
    }
    false
}

/// Iterates every tuple in `0..worlds` of the given length, lexicographically.
pub fn all_tuples(arity: usize, worlds: usize) -> impl Iterator<Item = Tuple> {
    let mut current = if worlds == 0 { None } else { Some(vec![0 as World; arity]) };
    std::iter::from_fn(move || {
        let out = current.clone()?;
        let mut next = out.clone();
        current = advance(&mut next, worlds).then_some(next);
        Some(out)
    })
}
