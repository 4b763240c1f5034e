//! Small shared utilities.

use std::collections::BTreeMap;
use std::fmt;

/// A multiset over an ordered element type, stored as element -> count.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Multiset<T: Ord> {
    counts: BTreeMap<T, usize>,
}

impl<T: Ord> Multiset<T> {
    pub fn new() -> Self {
        Multiset {
            counts: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, item: T) {
        *self.counts.entry(item).or_insert(0) += 1;
    }

    /// Removes one occurrence. Returns false if the element was absent.
    pub fn remove(&mut self, item: &T) -> bool {
        match self.counts.get_mut(item) {
            Some(n) if *n > 1 => {
                *n -= 1;
                true
            }
            Some(_) => {
                self.counts.remove(item);
                true
            }
            None => false,
        }
    }

    pub fn contains(&self, item: &T) -> bool {
        self.counts.contains_key(item)
    }

    pub fn count(&self, item: &T) -> usize {
        self.counts.get(item).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Total number of elements, counting multiplicity.
    pub fn len(&self) -> usize {
        self.counts.values().sum()
    }

    /// Distinct elements with their counts.
    pub fn entries(&self) -> impl Iterator<Item = (&T, usize)> {
        self.counts.iter().map(|(k, v)| (k, *v))
    }

    /// Iterates elements with multiplicity.
    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.counts
            .iter()
            .flat_map(|(k, v)| std::iter::repeat(k).take(*v))
    }

    /// Multiset difference: counts of `self` minus counts of `other`,
    /// clamped at zero.
    pub fn difference(&self, other: &Self) -> Self
    where
        T: Clone,
    {
        let mut out = Multiset::new();
        for (item, n) in self.entries() {
            let m = other.count(item);
            if n > m {
                out.counts.insert(item.clone(), n - m);
            }
        }
        out
    }

    /// Disjoint union: counts added.
    pub fn union(&self, other: &Self) -> Self
    where
        T: Clone,
    {
        let mut out = self.clone();
        for (item, n) in other.entries() {
            *out.counts.entry(item.clone()).or_insert(0) += n;
        }
        out
    }
}

impl<T: Ord> FromIterator<T> for Multiset<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut ms = Multiset::new();
        for item in iter {
            ms.insert(item);
        }
        ms
    }
}

impl<T: Ord + fmt::Display> fmt::Display for Multiset<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for (item, n) in self.entries() {
            for _ in 0..n {
                if !first {
                    write!(f, ", ")?;
                }
                write!(f, "{item}")?;
                first = false;
            }
        }
        write!(f, "}}")
    }
}

/// 64-bit FNV-1a, used to fingerprint program sources in dump headers.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiset_difference_clamps() {
        let a: Multiset<i32> = [1, 1, 2].into_iter().collect();
        let b: Multiset<i32> = [1, 2, 2].into_iter().collect();
        let d = a.difference(&b);
        assert_eq!(d.count(&1), 1);
        assert_eq!(d.count(&2), 0);
    }

    #[test]
    fn multiset_len_counts_multiplicity() {
        let a: Multiset<&str> = ["x", "x", "y"].into_iter().collect();
        assert_eq!(a.len(), 3);
        assert_eq!(a.iter().count(), 3);
    }
}
