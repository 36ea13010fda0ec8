//! Small set types for automaton states.

use std::fmt;

/// Dense state identifier.
pub type StateId = u32;

/// A sorted, duplicate-free set of states. Neighborhood sets are small,
/// so a sorted vector beats hashing here.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateSet(Vec<StateId>);

impl StateSet {
    pub fn new() -> Self {
        StateSet(Vec::new())
    }

    pub fn singleton(q: StateId) -> Self {
        StateSet(vec![q])
    }

    pub fn contains(&self, q: StateId) -> bool {
        self.0.binary_search(&q).is_ok()
    }

    pub fn insert(&mut self, q: StateId) {
        if let Err(i) = self.0.binary_search(&q) {
            self.0.insert(i, q);
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = StateId> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[StateId] {
        &self.0
    }

    pub fn is_subset(&self, other: &StateSet) -> bool {
        self.iter().all(|q| other.contains(q))
    }
}

impl FromIterator<StateId> for StateSet {
    fn from_iter<I: IntoIterator<Item = StateId>>(iter: I) -> Self {
        let mut v: Vec<StateId> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        StateSet(v)
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

/// Fixed-universe bitset, used for guard sets where membership tests dominate.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    pub fn with_universe(n: usize) -> Self {
        BitSet { words: vec![0; n.div_ceil(64)] }
    }

    pub fn from_states(n: usize, states: impl IntoIterator<Item = StateId>) -> Self {
        let mut s = Self::with_universe(n);
        for q in states {
            s.insert(q);
        }
        s
    }

    pub fn insert(&mut self, q: StateId) {
        let (w, b) = (q as usize / 64, q as usize % 64);
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << b;
    }

    pub fn contains(&self, q: StateId) -> bool {
        let (w, b) = (q as usize / 64, q as usize % 64);
        self.words.get(w).is_some_and(|x| x >> b & 1 == 1)
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = StateId> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            (0..64).filter(move |b| w >> b & 1 == 1).map(move |b| (i * 64 + b) as StateId)
        })
    }
}

impl fmt::Debug for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Iterates over all subsets of `items`, smallest bitmask first.
pub fn subsets<T: Clone>(items: &[T]) -> impl Iterator<Item = Vec<T>> + '_ {
    assert!(items.len() < 32, "subset enumeration over {} items", items.len());
    (0u32..1 << items.len()).map(move |m| {
        items.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, x)| x.clone()).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_set_is_sorted_and_deduplicated() {
        let s: StateSet = [3, 1, 3, 2].into_iter().collect();
        assert_eq!(s.as_slice(), &[1, 2, 3]);
        let mut t = StateSet::singleton(2);
        t.insert(1);
        t.insert(2);
        assert!(t.is_subset(&s));
        assert!(!s.is_subset(&t));
    }

    #[test]
    fn bitset_roundtrip() {
        let b = BitSet::from_states(130, [0, 64, 129]);
        assert_eq!(b.iter().collect::<Vec<_>>(), vec![0, 64, 129]);
        assert_eq!(b.count(), 3);
        assert!(!b.contains(1));
        assert!(!b.contains(500));
    }

    #[test]
    fn subsets_cover_powerset() {
        let all: Vec<Vec<u8>> = subsets(&[1, 2, 3]).collect();
        assert_eq!(all.len(), 8);
        assert!(all.contains(&vec![1, 3]));
    }
}
