//! Finite multisets over interned places.
//!
//! A [`Multiset`] is the common currency of the crate: markings, pre-sets and
//! post-sets are all multisets. Entries are kept sorted by place index with no
//! zero multiplicities, so structural equality, hashing and the derived
//! ordering are all canonical.

use std::fmt;

use thiserror::Error;

/// Dense index of a place in its net, assigned in declaration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Place(pub u32);

impl Place {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for Place {
    fn from(i: usize) -> Self {
        Place(i as u32)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("multiplicity of place #{place} would exceed the cap of {cap}")]
pub struct Overflow {
    pub place: u32,
    pub cap: u32,
}

/// A finite multiset of places. The empty multiset plays the role of θ.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Multiset {
    entries: Vec<(Place, u32)>,
}

impl Multiset {
    /// The empty multiset θ.
    pub const fn empty() -> Self {
        Multiset {
            entries: Vec::new(),
        }
    }

    pub fn singleton(p: Place) -> Self {
        Multiset {
            entries: vec![(p, 1)],
        }
    }

    pub fn with_count(p: Place, k: u32) -> Self {
        if k == 0 {
            Self::empty()
        } else {
            Multiset {
                entries: vec![(p, k)],
            }
        }
    }

    /// Builds a multiset from `(place, multiplicity)` pairs; repeated places
    /// are summed and zero multiplicities dropped.
    pub fn try_from_counts<I>(counts: I) -> Result<Self, Overflow>
    where
        I: IntoIterator<Item = (Place, u32)>,
    {
        let mut entries: Vec<(Place, u32)> = counts.into_iter().filter(|&(_, k)| k > 0).collect();
        entries.sort_unstable_by_key(|&(p, _)| p);
        let mut out: Vec<(Place, u32)> = Vec::with_capacity(entries.len());
        for (p, k) in entries {
            match out.last_mut() {
                Some((q, acc)) if *q == p => {
                    *acc = acc.checked_add(k).ok_or(Overflow {
                        place: p.0,
                        cap: u32::MAX,
                    })?;
                }
                _ => out.push((p, k)),
            }
        }
        Ok(Multiset { entries: out })
    }

    /// Like [`Multiset::try_from_counts`], panicking on overflow.
    pub fn from_counts<I>(counts: I) -> Self
    where
        I: IntoIterator<Item = (Place, u32)>,
    {
        Self::try_from_counts(counts).expect("multiplicity overflow")
    }

    /// One token per item; repeated places accumulate.
    pub fn from_tokens<I>(tokens: I) -> Self
    where
        I: IntoIterator<Item = Place>,
    {
        Self::from_counts(tokens.into_iter().map(|p| (p, 1)))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of tokens `|m|`.
    pub fn size(&self) -> u64 {
        self.entries.iter().map(|&(_, k)| u64::from(k)).sum()
    }

    /// Multiplicity of `p`, zero when absent.
    pub fn count(&self, p: Place) -> u32 {
        match self.entries.binary_search_by_key(&p, |&(q, _)| q) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0,
        }
    }

    pub fn contains(&self, p: Place) -> bool {
        self.count(p) > 0
    }

    /// `(place, multiplicity)` pairs in increasing place order.
    pub fn iter(&self) -> impl ExactSizeIterator<Item = (Place, u32)> + '_ {
        self.entries.iter().copied()
    }

    /// The support `dom(m)`.
    pub fn support(&self) -> impl Iterator<Item = Place> + '_ {
        self.entries.iter().map(|&(p, _)| p)
    }

    /// Every token separately, in increasing place order.
    pub fn tokens(&self) -> impl Iterator<Item = Place> + '_ {
        self.entries
            .iter()
            .flat_map(|&(p, k)| std::iter::repeat_n(p, k as usize))
    }

    /// `m ⊕ other`, failing instead of wrapping when a multiplicity overflows.
    pub fn try_union(&self, other: &Multiset) -> Result<Multiset, Overflow> {
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.entries, &other.entries);
        while i < a.len() && j < b.len() {
            let (pa, ka) = a[i];
            let (pb, kb) = b[j];
            if pa < pb {
                out.push((pa, ka));
                i += 1;
            } else if pb < pa {
                out.push((pb, kb));
                j += 1;
            } else {
                let k = ka.checked_add(kb).ok_or(Overflow {
                    place: pa.0,
                    cap: u32::MAX,
                })?;
                out.push((pa, k));
                i += 1;
                j += 1;
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Ok(Multiset { entries: out })
    }

    /// `m ⊕ other`. Panics on multiplicity overflow.
    pub fn union(&self, other: &Multiset) -> Multiset {
        self.try_union(other).expect("multiplicity overflow")
    }

    /// Truncated difference `m ⊖ other`.
    pub fn difference(&self, other: &Multiset) -> Multiset {
        let mut out = Vec::with_capacity(self.entries.len());
        let mut j = 0;
        let b = &other.entries;
        for &(p, k) in &self.entries {
            while j < b.len() && b[j].0 < p {
                j += 1;
            }
            let sub = if j < b.len() && b[j].0 == p { b[j].1 } else { 0 };
            if k > sub {
                out.push((p, k - sub));
            }
        }
        Multiset { entries: out }
    }

    /// `m ⊆ other`.
    pub fn is_subset(&self, other: &Multiset) -> bool {
        let mut j = 0;
        let b = &other.entries;
        for &(p, k) in &self.entries {
            while j < b.len() && b[j].0 < p {
                j += 1;
            }
            if j == b.len() || b[j].0 != p || b[j].1 < k {
                return false;
            }
        }
        true
    }

    /// Scalar product `j · m`.
    pub fn try_scale(&self, j: u32) -> Result<Multiset, Overflow> {
        if j == 0 {
            return Ok(Multiset::empty());
        }
        let entries = self
            .entries
            .iter()
            .map(|&(p, k)| {
                k.checked_mul(j)
                    .map(|v| (p, v))
                    .ok_or(Overflow { place: p.0, cap: u32::MAX })
            })
            .collect::<Result<_, _>>()?;
        Ok(Multiset { entries })
    }

    /// Largest multiplicity, zero for θ.
    pub fn max_multiplicity(&self) -> u32 {
        self.entries.iter().map(|&(_, k)| k).max().unwrap_or(0)
    }

    pub(crate) fn add_one(&mut self, p: Place) {
        match self.entries.binary_search_by_key(&p, |&(q, _)| q) {
            Ok(i) => self.entries[i].1 = self.entries[i].1.checked_add(1).expect("multiplicity overflow"),
            Err(i) => self.entries.insert(i, (p, 1)),
        }
    }
}

impl fmt::Debug for Multiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return f.write_str("θ");
        }
        f.write_str("{")?;
        for (i, &(p, k)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            if k > 1 {
                write!(f, "{k}·#{}", p.0)?;
            } else {
                write!(f, "#{}", p.0)?;
            }
        }
        f.write_str("}")
    }
}

impl FromIterator<Place> for Multiset {
    fn from_iter<I: IntoIterator<Item = Place>>(iter: I) -> Self {
        Multiset::from_tokens(iter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const S1: Place = Place(0);
    const S2: Place = Place(1);

    fn ms(counts: &[(u32, u32)]) -> Multiset {
        Multiset::from_counts(counts.iter().map(|&(p, k)| (Place(p), k)))
    }

    #[test]
    fn union_examples() {
        assert_eq!(Multiset::singleton(S1).union(&Multiset::singleton(S1)), Multiset::with_count(S1, 2));
        let m = ms(&[(0, 2), (1, 1)]);
        assert_eq!(m.union(&Multiset::empty()), m);
        assert_eq!(m.union(&Multiset::singleton(S2)), ms(&[(0, 2), (1, 2)]));
    }

    #[test]
    fn difference_examples() {
        assert_eq!(Multiset::with_count(S1, 2).difference(&Multiset::singleton(S1)), Multiset::singleton(S1));
        assert_eq!(Multiset::singleton(S1).difference(&Multiset::singleton(S2)), Multiset::singleton(S1));
        assert_eq!(Multiset::empty().difference(&ms(&[(0, 3)])), Multiset::empty());
    }

    #[test]
    fn empty_has_no_support() {
        let e = Multiset::empty();
        assert_eq!(e.size(), 0);
        assert_eq!(e.support().count(), 0);
        assert_eq!(Multiset::with_count(S1, 0), e);
    }

    #[test]
    fn overflow_is_reported() {
        let big = Multiset::with_count(S1, u32::MAX);
        assert!(big.try_union(&Multiset::singleton(S1)).is_err());
        assert!(big.try_scale(2).is_err());
    }

    fn arb_multiset() -> impl Strategy<Value = Multiset> {
        proptest::collection::vec((0u32..5, 0u32..4), 0..6)
            .prop_map(|v| Multiset::from_counts(v.into_iter().map(|(p, k)| (Place(p), k))))
    }

    proptest! {
        #[test]
        fn union_laws(a in arb_multiset(), b in arb_multiset(), c in arb_multiset()) {
            prop_assert_eq!(a.union(&b), b.union(&a));
            prop_assert_eq!(a.union(&b).union(&c), a.union(&b.union(&c)));
            prop_assert_eq!(a.union(&b).size(), a.size() + b.size());
            prop_assert!(a.iter().all(|(_, k)| k > 0));
        }

        #[test]
        fn difference_is_truncated(a in arb_multiset(), b in arb_multiset()) {
            let d = a.difference(&b);
            for p in 0..5 {
                let p = Place(p);
                prop_assert_eq!(d.count(p), a.count(p).saturating_sub(b.count(p)));
            }
            prop_assert!(d.is_subset(&a));
            prop_assert_eq!(a.union(&b).difference(&b), a.clone());
        }

        #[test]
        fn subset_matches_pointwise(a in arb_multiset(), b in arb_multiset()) {
            let pointwise = (0..5).all(|p| a.count(Place(p)) <= b.count(Place(p)));
            prop_assert_eq!(a.is_subset(&b), pointwise);
        }
    }
}
