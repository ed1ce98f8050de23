//! Place relations over `S`, or over `S ∪ {θ}` for the dummy variants.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::multiset::Place;

/// One side of a relation pair: a real place, or the dummy θ.
///
/// Ordering puts every place before θ, matching θ's index `|S|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Place(Place),
    Theta,
}

impl Slot {
    pub fn place(self) -> Option<Place> {
        match self {
            Slot::Place(p) => Some(p),
            Slot::Theta => None,
        }
    }

    pub fn is_theta(self) -> bool {
        matches!(self, Slot::Theta)
    }
}

impl From<Place> for Slot {
    fn from(p: Place) -> Self {
        Slot::Place(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelationKind {
    /// `R ⊆ S × S`; closed with the additive closure.
    Plain,
    /// `R ⊆ (S ∪ {θ}) × (S ∪ {θ})`; closed with the d-additive closure.
    Dummy,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelationError {
    #[error("θ cannot appear in a plain place relation")]
    ThetaInPlain,
    #[error("place #{0} is outside the relation's place set")]
    PlaceOutOfRange(u32),
    #[error("relations range over {0} and {1} places")]
    PlaceCountMismatch(usize, usize),
    #[error("expected a {expected:?} relation, found {found:?}")]
    KindMismatch {
        expected: RelationKind,
        found: RelationKind,
    },
}

/// A boolean matrix over `(S ∪ {θ}) × (S ∪ {θ})`, θ being index `|S|`.
///
/// Plain relations never set the θ row or column; `(θ, θ)` is never stored
/// since both closures contain `(θ, θ)` unconditionally.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PlaceRelation {
    places: usize,
    kind: RelationKind,
    bits: Vec<u64>,
}

impl PlaceRelation {
    pub fn empty(places: usize, kind: RelationKind) -> Self {
        let dim = places + 1;
        PlaceRelation {
            places,
            kind,
            bits: vec![0; (dim * dim).div_ceil(64)],
        }
    }

    /// `I_S`; the θ pair of the dummy identity is implicit.
    pub fn identity(places: usize, kind: RelationKind) -> Self {
        let mut r = Self::empty(places, kind);
        for i in 0..places {
            r.set(i, i);
        }
        r
    }

    /// Every storable pair of the kind.
    pub fn total(places: usize, kind: RelationKind) -> Self {
        let mut r = Self::empty(places, kind);
        for (a, b) in Self::pair_space(places, kind) {
            r.set(r.slot_index(a), r.slot_index(b));
        }
        r
    }

    pub fn from_pairs<I>(places: usize, kind: RelationKind, pairs: I) -> Result<Self, RelationError>
    where
        I: IntoIterator<Item = (Slot, Slot)>,
    {
        let mut r = Self::empty(places, kind);
        for (a, b) in pairs {
            r.insert(a, b)?;
        }
        Ok(r)
    }

    /// The storable pairs in canonical (row-major, θ last) order. Bit `k` of
    /// a relation's bit pattern corresponds to the `k`-th pair listed here.
    pub fn pair_space(places: usize, kind: RelationKind) -> Vec<(Slot, Slot)> {
        let slots: Vec<Slot> = match kind {
            RelationKind::Plain => (0..places).map(|i| Slot::Place(Place(i as u32))).collect(),
            RelationKind::Dummy => (0..places)
                .map(|i| Slot::Place(Place(i as u32)))
                .chain(std::iter::once(Slot::Theta))
                .collect(),
        };
        let mut out = Vec::with_capacity(slots.len() * slots.len());
        for &a in &slots {
            for &b in &slots {
                if !(a.is_theta() && b.is_theta()) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// The relation whose pairs are the set bits of `pattern` over `space`.
    pub fn from_pattern(places: usize, kind: RelationKind, space: &[(Slot, Slot)], pattern: u64) -> Self {
        let mut r = Self::empty(places, kind);
        let mut rest = pattern;
        while rest != 0 {
            let k = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let (a, b) = space[k];
            let (i, j) = (r.slot_index(a), r.slot_index(b));
            r.set(i, j);
        }
        r
    }

    pub fn places(&self) -> usize {
        self.places
    }

    pub fn kind(&self) -> RelationKind {
        self.kind
    }

    #[inline]
    fn dim(&self) -> usize {
        self.places + 1
    }

    #[inline]
    pub(crate) fn slot_index(&self, s: Slot) -> usize {
        match s {
            Slot::Place(p) => p.index(),
            Slot::Theta => self.places,
        }
    }

    #[inline]
    pub(crate) fn index_slot(&self, i: usize) -> Slot {
        if i == self.places {
            Slot::Theta
        } else {
            Slot::Place(Place(i as u32))
        }
    }

    #[inline]
    pub(crate) fn get(&self, i: usize, j: usize) -> bool {
        let k = i * self.dim() + j;
        self.bits[k / 64] >> (k % 64) & 1 == 1
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize) {
        let k = i * self.dim() + j;
        self.bits[k / 64] |= 1 << (k % 64);
    }

    #[inline]
    fn clear(&mut self, i: usize, j: usize) {
        let k = i * self.dim() + j;
        self.bits[k / 64] &= !(1 << (k % 64));
    }

    pub fn contains(&self, a: Slot, b: Slot) -> bool {
        if a.is_theta() && b.is_theta() {
            return false;
        }
        let (i, j) = (self.slot_index(a), self.slot_index(b));
        i <= self.places && j <= self.places && self.get(i, j)
    }

    fn check_slot(&self, s: Slot) -> Result<(), RelationError> {
        match s {
            Slot::Place(p) if p.index() >= self.places => Err(RelationError::PlaceOutOfRange(p.0)),
            Slot::Theta if self.kind == RelationKind::Plain => Err(RelationError::ThetaInPlain),
            _ => Ok(()),
        }
    }

    /// Adds `(a, b)`; returns whether it was new. `(θ, θ)` is accepted and
    /// ignored.
    pub fn insert(&mut self, a: Slot, b: Slot) -> Result<bool, RelationError> {
        self.check_slot(a)?;
        self.check_slot(b)?;
        if a.is_theta() && b.is_theta() {
            return Ok(false);
        }
        let (i, j) = (self.slot_index(a), self.slot_index(b));
        let fresh = !self.get(i, j);
        self.set(i, j);
        Ok(fresh)
    }

    pub fn remove(&mut self, a: Slot, b: Slot) -> bool {
        if !self.contains(a, b) {
            return false;
        }
        let (i, j) = (self.slot_index(a), self.slot_index(b));
        self.clear(i, j);
        true
    }

    /// The pairs in canonical order.
    pub fn pairs(&self) -> Vec<(Slot, Slot)> {
        let dim = self.dim();
        let mut out = Vec::new();
        for i in 0..dim {
            for j in 0..dim {
                if self.get(i, j) {
                    out.push((self.index_slot(i), self.index_slot(j)));
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    /// Right partners `{b | (a, b) ∈ R}`, θ last.
    pub fn image_of(&self, a: Slot) -> impl Iterator<Item = Slot> + '_ {
        let i = self.slot_index(a);
        (0..self.dim())
            .filter(move |&j| self.get(i, j))
            .map(|j| self.index_slot(j))
    }

    /// Left partners `{a | (a, b) ∈ R}`, θ last.
    pub fn preimage_of(&self, b: Slot) -> impl Iterator<Item = Slot> + '_ {
        let j = self.slot_index(b);
        (0..self.dim())
            .filter(move |&i| self.get(i, j))
            .map(|i| self.index_slot(i))
    }

    /// Both relations range over the same places; kinds may differ.
    pub fn is_subset(&self, other: &PlaceRelation) -> bool {
        self.places == other.places && self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    pub fn is_strict_subset(&self, other: &PlaceRelation) -> bool {
        self.is_subset(other) && self.bits != other.bits
    }

    /// Pairwise union; the result is dummy when either operand is.
    pub fn union(&self, other: &PlaceRelation) -> Result<PlaceRelation, RelationError> {
        if self.places != other.places {
            return Err(RelationError::PlaceCountMismatch(self.places, other.places));
        }
        let mut out = self.clone();
        out.kind = self.kind.max(other.kind);
        for (a, b) in out.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
        Ok(out)
    }

    /// `R⁻¹`.
    pub fn inverse(&self) -> PlaceRelation {
        let mut out = PlaceRelation::empty(self.places, self.kind);
        let dim = self.dim();
        for i in 0..dim {
            for j in 0..dim {
                if self.get(i, j) {
                    out.set(j, i);
                }
            }
        }
        out
    }

    /// `R1 ∘ R2 = {(r, r'') | ∃ r'. (r, r') ∈ R1 ∧ (r', r'') ∈ R2}`.
    ///
    /// For dummy relations `(θ, θ)` counts as a member of both operands, so
    /// that the closure of the composition is the composition of the
    /// closures.
    pub fn compose(&self, other: &PlaceRelation) -> Result<PlaceRelation, RelationError> {
        if self.places != other.places {
            return Err(RelationError::PlaceCountMismatch(self.places, other.places));
        }
        let kind = self.kind.max(other.kind);
        let mut out = PlaceRelation::empty(self.places, kind);
        let dim = self.dim();
        let theta = self.places;
        let has = |r: &PlaceRelation, i: usize, j: usize| (i == theta && j == theta) || r.get(i, j);
        for i in 0..dim {
            for k in 0..dim {
                if i == theta && k == theta {
                    continue;
                }
                if (0..dim).any(|j| has(self, i, j) && has(other, j, k)) {
                    out.set(i, k);
                }
            }
        }
        Ok(out)
    }

    /// The same pairs viewed as a dummy-kind relation.
    pub fn lift(&self) -> PlaceRelation {
        let mut out = self.clone();
        out.kind = RelationKind::Dummy;
        out
    }

    /// Whether the θ row and column are empty.
    pub fn is_theta_free(&self) -> bool {
        let theta = self.places;
        (0..=self.places).all(|k| !self.get(theta, k) && !self.get(k, theta))
    }

    /// The same pairs viewed as a plain relation, if no θ pair is present.
    pub fn lower(&self) -> Option<PlaceRelation> {
        if !self.is_theta_free() {
            return None;
        }
        let mut out = self.clone();
        out.kind = RelationKind::Plain;
        Some(out)
    }

    /// Compares bit patterns as binary numbers (bit `k` = `k`-th pair of
    /// [`PlaceRelation::pair_space`]).
    pub fn cmp_pattern(&self, other: &PlaceRelation) -> Ordering {
        // The flat row-major layout preserves the relative order of the pair
        // space, so comparing words from the top gives the same answer.
        for (a, b) in self.bits.iter().rev().zip(other.bits.iter().rev()) {
            match a.cmp(b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

impl fmt::Debug for PlaceRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, (a, b)) in self.pairs().into_iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            let show = |s: Slot| match s {
                Slot::Place(p) => format!("#{}", p.0),
                Slot::Theta => "θ".to_string(),
            };
            write!(f, "({}, {})", show(a), show(b))?;
        }
        f.write_str("}")
    }
}
