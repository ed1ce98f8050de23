//! Additive (`R⊕`) and d-additive (`R⊙`) closures of place relations.
//!
//! Membership is decided as a transportation problem: tokens of the same place
//! are collapsed into one capacitated node, edges follow the relation, and an
//! augmenting-path max-flow saturating every token yields the pairing. In the
//! dummy case θ contributes one slack node per side, so a token may stay
//! unpaired exactly when the relation pairs its place with θ.

use std::collections::{BTreeMap, HashSet, VecDeque};

use crate::multiset::{Multiset, Place};
use crate::relation::{PlaceRelation, RelationError, RelationKind, Slot};

/// Which side of the relation a given marking sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// A multiset of relation pairs whose components add up to the two markings.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairingWitness {
    pairs: Vec<((Slot, Slot), u32)>,
}

impl PairingWitness {
    pub fn from_pairs<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (Slot, Slot)>,
    {
        let mut map: BTreeMap<(Slot, Slot), u32> = BTreeMap::new();
        for pair in pairs {
            *map.entry(pair).or_default() += 1;
        }
        PairingWitness {
            pairs: map.into_iter().collect(),
        }
    }

    /// `(pair, multiplicity)` in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = ((Slot, Slot), u32)> + '_ {
        self.pairs.iter().copied()
    }

    /// Every pair occurrence separately.
    pub fn expanded(&self) -> impl Iterator<Item = (Slot, Slot)> + '_ {
        self.pairs
            .iter()
            .flat_map(|&(pair, k)| std::iter::repeat_n(pair, k as usize))
    }

    pub fn len(&self) -> usize {
        self.pairs.iter().map(|&(_, k)| k as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Sum of the left components, θ dropped.
    pub fn left_marking(&self) -> Multiset {
        Multiset::from_counts(self.pairs.iter().filter_map(|&((a, _), k)| a.place().map(|p| (p, k))))
    }

    /// Sum of the right components, θ dropped.
    pub fn right_marking(&self) -> Multiset {
        Multiset::from_counts(self.pairs.iter().filter_map(|&((_, b), k)| b.place().map(|p| (p, k))))
    }

    /// Whether every pair is in `r` and the components add up to `m1`, `m2`.
    pub fn proves(&self, r: &PlaceRelation, m1: &Multiset, m2: &Multiset) -> bool {
        self.pairs.iter().all(|&((a, b), _)| r.contains(a, b))
            && &self.left_marking() == m1
            && &self.right_marking() == m2
    }

    /// Pairs with θ on the given side.
    pub fn theta_pairs(&self, side: Side) -> usize {
        self.pairs
            .iter()
            .filter(|&&((a, b), _)| match side {
                Side::Left => a.is_theta(),
                Side::Right => b.is_theta(),
            })
            .count()
    }

    /// The set of distinct pairs used.
    pub fn support(&self, places: usize, kind: RelationKind) -> PlaceRelation {
        let mut r = PlaceRelation::empty(places, kind);
        for &((a, b), _) in &self.pairs {
            r.insert(a, b).expect("witness pair outside the relation's slot space");
        }
        r
    }

    pub fn merge(&self, other: &PairingWitness) -> PairingWitness {
        PairingWitness::from_pairs(self.expanded().chain(other.expanded()))
    }

    /// Swaps the components of every pair.
    pub fn inverse(&self) -> PairingWitness {
        PairingWitness::from_pairs(self.expanded().map(|(a, b)| (b, a)))
    }
}

const UNBOUNDED: u64 = u64::MAX / 4;

/// `(m1, m2) ∈ R⊕` for plain relations, `(m1, m2) ∈ R⊙` for dummy ones,
/// with a pairing proving it.
pub fn closure_contains(r: &PlaceRelation, m1: &Multiset, m2: &Multiset) -> Option<PairingWitness> {
    let dummy = r.kind() == RelationKind::Dummy;
    if !dummy && m1.size() != m2.size() {
        return None;
    }
    if m1.is_empty() && m2.is_empty() {
        return Some(PairingWitness::default());
    }
    let left: Vec<(Place, u32)> = m1.iter().collect();
    let right: Vec<(Place, u32)> = m2.iter().collect();

    // Cheap rejections before building the network.
    for &(p, _) in &left {
        let ok = right.iter().any(|&(q, _)| r.contains(p.into(), q.into())) || (dummy && r.contains(p.into(), Slot::Theta));
        if !ok {
            return None;
        }
    }
    for &(q, _) in &right {
        let ok = left.iter().any(|&(p, _)| r.contains(p.into(), q.into())) || (dummy && r.contains(Slot::Theta, q.into()));
        if !ok {
            return None;
        }
    }

    // Node layout: source, sink, left places, [θ_L], right places, [θ_R].
    let nl = left.len();
    let nr = right.len();
    let source = 0;
    let sink = 1;
    let lbase = 2;
    let theta_l = lbase + nl;
    let rbase = if dummy { theta_l + 1 } else { theta_l };
    let theta_r = rbase + nr;
    let n = if dummy { theta_r + 1 } else { theta_r };
    let mut net = FlowNetwork::new(n);

    let (size1, size2) = (m1.size(), m2.size());
    for (i, &(_, k)) in left.iter().enumerate() {
        net.add(source, lbase + i, u64::from(k));
    }
    for (j, &(_, k)) in right.iter().enumerate() {
        net.add(rbase + j, sink, u64::from(k));
    }
    for (i, &(p, _)) in left.iter().enumerate() {
        for (j, &(q, _)) in right.iter().enumerate() {
            if r.contains(p.into(), q.into()) {
                net.add(lbase + i, rbase + j, UNBOUNDED);
            }
        }
    }
    if dummy {
        net.add(source, theta_l, size2);
        net.add(theta_r, sink, size1);
        net.add(theta_l, theta_r, UNBOUNDED);
        for (i, &(p, _)) in left.iter().enumerate() {
            if r.contains(p.into(), Slot::Theta) {
                net.add(lbase + i, theta_r, UNBOUNDED);
            }
        }
        for (j, &(q, _)) in right.iter().enumerate() {
            if r.contains(Slot::Theta, q.into()) {
                net.add(theta_l, rbase + j, UNBOUNDED);
            }
        }
    }

    let target = if dummy { size1 + size2 } else { size1 };
    if net.max_flow(source, sink) != target {
        return None;
    }

    let mut pairs: Vec<((Slot, Slot), u32)> = Vec::new();
    for (i, &(p, _)) in left.iter().enumerate() {
        for (j, &(q, _)) in right.iter().enumerate() {
            let f = net.flow(lbase + i, rbase + j);
            if f > 0 {
                pairs.push(((p.into(), q.into()), f as u32));
            }
        }
        if dummy {
            let f = net.flow(lbase + i, theta_r);
            if f > 0 {
                pairs.push(((p.into(), Slot::Theta), f as u32));
            }
        }
    }
    if dummy {
        for (j, &(q, _)) in right.iter().enumerate() {
            let f = net.flow(theta_l, rbase + j);
            if f > 0 {
                pairs.push(((Slot::Theta, q.into()), f as u32));
            }
        }
    }
    pairs.sort_unstable();
    Some(PairingWitness { pairs })
}

/// Dense capacity-matrix network; the graphs here have at most `2|S| + 4`
/// nodes.
struct FlowNetwork {
    n: usize,
    cap: Vec<u64>,
    original: Vec<u64>,
}

impl FlowNetwork {
    fn new(n: usize) -> Self {
        FlowNetwork {
            n,
            cap: vec![0; n * n],
            original: vec![0; n * n],
        }
    }

    fn add(&mut self, u: usize, v: usize, c: u64) {
        self.cap[u * self.n + v] += c;
        self.original[u * self.n + v] += c;
    }

    fn flow(&self, u: usize, v: usize) -> u64 {
        let k = u * self.n + v;
        self.original[k].saturating_sub(self.cap[k])
    }

    /// Edmonds-Karp: shortest augmenting paths until none is left.
    fn max_flow(&mut self, s: usize, t: usize) -> u64 {
        let n = self.n;
        let mut total = 0;
        let mut prev = vec![usize::MAX; n];
        let mut queue = VecDeque::with_capacity(n);
        loop {
            prev.iter_mut().for_each(|x| *x = usize::MAX);
            prev[s] = s;
            queue.clear();
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for (v, p) in prev.iter_mut().enumerate() {
                    if *p == usize::MAX && self.cap[u * n + v] > 0 {
                        *p = u;
                        queue.push_back(v);
                    }
                }
            }
            if prev[t] == usize::MAX {
                return total;
            }
            let mut bottleneck = u64::MAX;
            let mut v = t;
            while v != s {
                let u = prev[v];
                bottleneck = bottleneck.min(self.cap[u * n + v]);
                v = u;
            }
            let mut v = t;
            while v != s {
                let u = prev[v];
                self.cap[u * n + v] -= bottleneck;
                self.cap[v * n + u] += bottleneck;
                v = u;
            }
            total += bottleneck;
        }
    }
}

/// All `m'` with `(m, m') ∈ R⊕` (side = left) or `(m', m) ∈ R⊕`
/// (side = right), sorted and deduplicated.
pub fn related_markings(r: &PlaceRelation, m: &Multiset, side: Side) -> Result<Vec<Multiset>, RelationError> {
    if r.kind() != RelationKind::Plain {
        return Err(RelationError::KindMismatch {
            expected: RelationKind::Plain,
            found: r.kind(),
        });
    }
    Ok(images(r, m, side).into_iter().map(|(img, _)| img).collect())
}

/// The markings obtained by replacing each token of `m` with one of its
/// partners through `r` (θ partners are dropped), together with the pairing
/// used. Pairs with θ on the side of `m` are never used. Sorted by image;
/// for each image the least pairing is kept.
pub fn substitution_images(r: &PlaceRelation, m: &Multiset, side: Side) -> Vec<(Multiset, PairingWitness)> {
    images(r, m, side)
}

fn images(r: &PlaceRelation, m: &Multiset, side: Side) -> Vec<(Multiset, PairingWitness)> {
    // Per place of m: every multiset of k partner choices.
    let mut per_place: Vec<Vec<Vec<Slot>>> = Vec::new();
    for (p, k) in m.iter() {
        let partners: Vec<Slot> = match side {
            Side::Left => r.image_of(p.into()).collect(),
            Side::Right => r.preimage_of(p.into()).collect(),
        };
        if partners.is_empty() {
            return Vec::new();
        }
        let mut choices = Vec::new();
        let mut current = Vec::with_capacity(k as usize);
        combinations_with_repetition(&partners, k as usize, 0, &mut current, &mut choices);
        per_place.push(choices);
    }

    let places: Vec<Place> = m.support().collect();
    let mut out: BTreeMap<Multiset, PairingWitness> = BTreeMap::new();
    let mut index = vec![0usize; per_place.len()];
    loop {
        let mut image = Multiset::empty();
        let mut pairs = Vec::with_capacity(m.size() as usize);
        for (slot, &i) in index.iter().enumerate() {
            let own: Slot = places[slot].into();
            for &partner in &per_place[slot][i] {
                if let Slot::Place(q) = partner {
                    image.add_one(q);
                }
                pairs.push(match side {
                    Side::Left => (own, partner),
                    Side::Right => (partner, own),
                });
            }
        }
        let witness = PairingWitness::from_pairs(pairs);
        match out.get_mut(&image) {
            Some(existing) if *existing <= witness => {}
            Some(existing) => *existing = witness,
            None => {
                out.insert(image, witness);
            }
        }

        // Odometer over the per-place choices.
        let mut d = 0;
        while d < index.len() {
            index[d] += 1;
            if index[d] < per_place[d].len() {
                break;
            }
            index[d] = 0;
            d += 1;
        }
        if d == index.len() {
            break;
        }
    }
    out.into_iter().collect()
}

fn combinations_with_repetition(items: &[Slot], k: usize, from: usize, current: &mut Vec<Slot>, out: &mut Vec<Vec<Slot>>) {
    if current.len() == k {
        out.push(current.clone());
        return;
    }
    for i in from..items.len() {
        current.push(items[i]);
        combinations_with_repetition(items, k, i, current, out);
        current.pop();
    }
}

/// Every inclusion-minimal set of pairs `P` (over the whole slot space of the
/// kind) such that `(m1, m2)` is in the closure of `P`, sorted by size and
/// then by bit pattern.
pub fn minimal_pair_sets(places: usize, kind: RelationKind, m1: &Multiset, m2: &Multiset) -> Vec<PlaceRelation> {
    if kind == RelationKind::Plain && m1.size() != m2.size() {
        return Vec::new();
    }
    let left: Vec<Place> = m1.tokens().collect();
    let mut remaining: Vec<(Place, u32)> = m2.iter().collect();
    let mut seen: HashSet<PlaceRelation> = HashSet::new();
    let mut current = PlaceRelation::empty(places, kind);
    assign_tokens(&left, 0, &mut remaining, &mut current, kind, &mut seen);

    let mut all: Vec<PlaceRelation> = seen.into_iter().collect();
    all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp_pattern(b)));
    let mut minimal: Vec<PlaceRelation> = Vec::new();
    for r in all {
        if !minimal.iter().any(|m| m.is_subset(&r)) {
            minimal.push(r);
        }
    }
    minimal
}

fn assign_tokens(
    left: &[Place],
    at: usize,
    remaining: &mut Vec<(Place, u32)>,
    current: &mut PlaceRelation,
    kind: RelationKind,
    out: &mut HashSet<PlaceRelation>,
) {
    if at == left.len() {
        let mut done = current.clone();
        for &(q, k) in remaining.iter() {
            if k > 0 {
                if kind == RelationKind::Plain {
                    return;
                }
                done.insert(Slot::Theta, q.into()).expect("dummy slot");
            }
        }
        out.insert(done);
        return;
    }
    let p = left[at];
    for j in 0..remaining.len() {
        if remaining[j].1 == 0 {
            continue;
        }
        let q = remaining[j].0;
        remaining[j].1 -= 1;
        let fresh = current.insert(p.into(), q.into()).expect("slot in range");
        assign_tokens(left, at + 1, remaining, current, kind, out);
        if fresh {
            current.remove(p.into(), q.into());
        }
        remaining[j].1 += 1;
    }
    if kind == RelationKind::Dummy {
        let fresh = current.insert(p.into(), Slot::Theta).expect("dummy slot");
        assign_tokens(left, at + 1, remaining, current, kind, out);
        if fresh {
            current.remove(p.into(), Slot::Theta);
        }
    }
}
