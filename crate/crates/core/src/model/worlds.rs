use std::fmt;

use fixedbitset::FixedBitSet;

use super::World;

/// A set of worlds of a model with a known world count.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WorldSet {
    bits: FixedBitSet,
}

impl WorldSet {
    pub fn empty(worlds: usize) -> Self {
        Self { bits: FixedBitSet::with_capacity(worlds) }
    }

    pub fn full(worlds: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(worlds);
        bits.insert_range(..);
        Self { bits }
    }

    pub fn from_worlds(worlds: usize, members: impl IntoIterator<Item = World>) -> Self {
        let mut out = Self::empty(worlds);
        for w in members {
            out.insert(w);
        }
        out
    }

    pub fn capacity(&self) -> usize {
        self.bits.len()
    }

    pub fn insert(&mut self, w: World) {
        self.bits.insert(w as usize);
    }

    pub fn remove(&mut self, w: World) {
        self.bits.set(w as usize, false);
    }

    pub fn contains(&self, w: World) -> bool {
        self.bits.contains(w as usize)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = World> + '_ {
        self.bits.ones().map(|w| w as World)
    }

    pub fn to_vec(&self) -> Vec<World> {
        self.iter().collect()
    }

    pub fn complement(&self) -> WorldSet {
        let mut bits = self.bits.clone();
        bits.toggle_range(..);
        Self { bits }
    }

    pub fn intersect(&self, other: &WorldSet) -> WorldSet {
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        Self { bits }
    }

    pub fn union(&self, other: &WorldSet) -> WorldSet {
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        Self { bits }
    }

    pub fn is_subset(&self, other: &WorldSet) -> bool {
        self.bits.is_subset(&other.bits)
    }
}

impl fmt::Debug for WorldSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for WorldSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, w) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{w}")?;
        }
        f.write_str("}")
    }
}
