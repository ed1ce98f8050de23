//! Deciding marking equivalence by searching the finite space of place
//! relations, and enumerating the bisimulations of a net.

use std::collections::HashSet;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::closure::{closure_contains, minimal_pair_sets, substitution_images, PairingWitness};
use crate::multiset::Multiset;
use crate::net::{Net, NetError};
use crate::relation::{PlaceRelation, RelationError, RelationKind, Slot};
use crate::verify::{requirements, unanswered, BisimKind, Obligation};

/// Largest index set (places, plus θ for the dummy kinds) searched by the
/// exhaustive strategy and the enumerators unless configured otherwise.
pub const DEFAULT_MAX_INDEX_SET: usize = 5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Scan every relation of the index set.
    Exhaustive,
    /// Grow a relation from a seed pairing by discharging obligations.
    #[default]
    Saturation,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Exhaustive => "exhaustive",
            Strategy::Saturation => "saturation",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exhaustive" => Ok(Strategy::Exhaustive),
            "saturation" => Ok(Strategy::Saturation),
            other => Err(format!("unknown strategy `{other}` (expected exhaustive or saturation)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecideOptions {
    pub strategy: Strategy,
    /// Report the least accepting relation in bit-pattern order instead of
    /// the first one found. Exhaustive only.
    pub canonical: bool,
    /// Index-set cap for the exhaustive strategy.
    pub max_index_set: usize,
    /// Saturation: give up after examining this many relations.
    pub max_relations: Option<u64>,
    /// Saturation: give up after this much wall-clock time.
    pub time_limit: Option<Duration>,
    /// Worker threads; 1 runs on the calling thread.
    pub threads: usize,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions {
            strategy: Strategy::default(),
            canonical: false,
            max_index_set: DEFAULT_MAX_INDEX_SET,
            max_relations: None,
            time_limit: None,
            threads: 1,
        }
    }
}

impl DecideOptions {
    pub fn with_strategy(strategy: Strategy) -> Self {
        DecideOptions {
            strategy,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error("index set of {index_set} exceeds the cap of {cap}")]
    TooLarge { index_set: usize, cap: usize },
    #[error("budget exhausted after examining {relations_examined} relations")]
    BudgetExceeded { relations_examined: u64 },
    #[error("canonical witnesses are only available with the exhaustive strategy")]
    CanonicalRequiresExhaustive,
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Relation(#[from] RelationError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub equivalent: bool,
    /// An accepted relation whose closure relates the two markings, with the
    /// pairing proving it.
    pub witness: Option<(PlaceRelation, PairingWitness)>,
    pub strategy: Strategy,
    pub relations_examined: u64,
}

/// Decides whether `m1` and `m2` are equivalent under `kind`.
pub fn decide(net: &Net, kind: BisimKind, m1: &Multiset, m2: &Multiset, opts: &DecideOptions) -> Result<Verdict, DecideError> {
    for m in [m1, m2] {
        if let Some(p) = m.support().find(|p| p.index() >= net.place_count()) {
            return Err(NetError::UnknownPlace(p.0).into());
        }
    }
    if opts.canonical && opts.strategy != Strategy::Exhaustive {
        return Err(DecideError::CanonicalRequiresExhaustive);
    }
    let not_equivalent = |relations_examined| Verdict {
        equivalent: false,
        witness: None,
        strategy: opts.strategy,
        relations_examined,
    };
    if kind.relation_kind() == RelationKind::Plain && m1.size() != m2.size() {
        return Ok(not_equivalent(0));
    }
    let search = Search {
        net,
        kind,
        m1,
        m2,
        opts,
        examined: AtomicU64::new(0),
        started: Instant::now(),
    };
    let found = if opts.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.threads)
            .build()
            .expect("thread pool");
        pool.install(|| search.run())?
    } else {
        search.run()?
    };
    let relations_examined = search.examined.load(AtomicOrdering::Relaxed);
    Ok(match found {
        Some(r) => {
            let pairing = closure_contains(&r, m1, m2).expect("witness relates the markings");
            Verdict {
                equivalent: true,
                witness: Some((r, pairing)),
                strategy: opts.strategy,
                relations_examined,
            }
        }
        None => not_equivalent(relations_examined),
    })
}

struct Search<'a> {
    net: &'a Net,
    kind: BisimKind,
    m1: &'a Multiset,
    m2: &'a Multiset,
    opts: &'a DecideOptions,
    examined: AtomicU64,
    started: Instant,
}

impl Search<'_> {
    fn run(&self) -> Result<Option<PlaceRelation>, DecideError> {
        match self.opts.strategy {
            Strategy::Exhaustive => self.exhaustive(),
            Strategy::Saturation => self.saturation(),
        }
    }

    fn places(&self) -> usize {
        self.net.place_count()
    }

    fn relation_kind(&self) -> RelationKind {
        self.kind.relation_kind()
    }

    fn exhaustive(&self) -> Result<Option<PlaceRelation>, DecideError> {
        let index_set = self.places() + usize::from(self.relation_kind() == RelationKind::Dummy);
        let cap = self.opts.max_index_set.min(8);
        if index_set > cap {
            return Err(DecideError::TooLarge { index_set, cap });
        }
        let space = PlaceRelation::pair_space(self.places(), self.relation_kind());
        let width = space.len() as u32;
        let seeds: Vec<u64> = minimal_pair_sets(self.places(), self.relation_kind(), self.m1, self.m2)
            .iter()
            .map(|p| pattern_of(p, &space))
            .collect();
        if seeds.is_empty() {
            return Ok(None);
        }

        let test = |pattern: u64, nogoods: &mut Vec<Nogood>| -> Result<Option<PlaceRelation>, NetError> {
            self.examined.fetch_add(1, AtomicOrdering::Relaxed);
            if !seeds.iter().any(|&s| s & !pattern == 0) {
                return Ok(None);
            }
            if let Some(i) = nogoods.iter().position(|n| n.rejects(pattern)) {
                nogoods.swap(0, i);
                return Ok(None);
            }
            let r = PlaceRelation::from_pattern(self.places(), self.relation_kind(), &space, pattern);
            match unanswered(self.net, &r, &r, self.kind, true)?.into_iter().next() {
                None => Ok(Some(r)),
                Some(o) => {
                    nogoods.push(self.nogood(&r, &o, &space)?);
                    let last = nogoods.len() - 1;
                    nogoods.swap(0, last);
                    Ok(None)
                }
            }
        };

        let parallel = self.opts.threads > 1;
        if self.opts.canonical {
            let end = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
            return Ok(scan(0..=end, &test, parallel)?);
        }
        for k in 0..=width {
            if let Some(r) = scan(SameWeight::new(width, k), &test, parallel)? {
                return Ok(Some(r));
            }
        }
        Ok(None)
    }

    /// The rejection learned from `r` failing obligation `o`: every relation
    /// that still generates `o` but contains none of its answer sets fails
    /// it too.
    fn nogood(&self, r: &PlaceRelation, o: &Obligation, space: &[(Slot, Slot)]) -> Result<Nogood, NetError> {
        let tr = self.net.transition(o.transition)?;
        let (_, pairing) = substitution_images(r, &tr.pre, o.side)
            .into_iter()
            .find(|(m, _)| *m == o.marking)
            .expect("obligation marking is an image of the pre-set");
        let generators = pattern_of(&pairing.support(self.places(), self.relation_kind()), space);
        let mut answers: Vec<u64> = Vec::new();
        for cand in self.net.transitions() {
            let Some((_, reqs)) = requirements(self.kind, o.side, tr, cand, &o.marking)? else {
                continue;
            };
            let mut combos: Vec<u64> = vec![0];
            for (a, b) in &reqs {
                let options: Vec<u64> = minimal_pair_sets(self.places(), self.relation_kind(), a, b)
                    .iter()
                    .map(|p| pattern_of(p, space))
                    .collect();
                combos = combos.iter().flat_map(|&c| options.iter().map(move |&x| c | x)).collect();
            }
            answers.extend(combos);
        }
        answers.sort_by_key(|a| (a.count_ones(), *a));
        answers.dedup();
        let mut minimal: Vec<u64> = Vec::with_capacity(answers.len());
        for a in answers {
            if !minimal.iter().any(|&m| m & !a == 0) {
                minimal.push(a);
            }
        }
        Ok(Nogood {
            generators,
            answers: minimal,
        })
    }

    fn saturation(&self) -> Result<Option<PlaceRelation>, DecideError> {
        let seeds = minimal_pair_sets(self.places(), self.relation_kind(), self.m1, self.m2);
        if self.opts.threads > 1 {
            return seeds
                .into_par_iter()
                .map(|seed| self.grow(vec![seed]))
                .find_map_first(|res| match res {
                    Ok(None) => None,
                    other => Some(other),
                })
                .unwrap_or(Ok(None));
        }
        self.grow(seeds)
    }

    /// Depth-first search from `seeds` (tried in order) for an accepted
    /// relation containing one of them.
    fn grow(&self, seeds: Vec<PlaceRelation>) -> Result<Option<PlaceRelation>, DecideError> {
        let mut stack: Vec<PlaceRelation> = seeds.into_iter().rev().collect();
        let mut visited: HashSet<PlaceRelation> = HashSet::new();
        while let Some(r) = stack.pop() {
            if !visited.insert(r.clone()) {
                continue;
            }
            self.tick()?;
            let Some(obligation) = unanswered(self.net, &r, &r, self.kind, true)?.into_iter().next() else {
                return Ok(Some(r));
            };
            for child in self.extensions(&r, &obligation)?.into_iter().rev() {
                if !visited.contains(&child) {
                    stack.push(child);
                }
            }
        }
        Ok(None)
    }

    fn tick(&self) -> Result<(), DecideError> {
        let n = self.examined.fetch_add(1, AtomicOrdering::Relaxed) + 1;
        let over_count = self.opts.max_relations.is_some_and(|cap| n > cap);
        let over_time = self.opts.time_limit.is_some_and(|limit| self.started.elapsed() > limit);
        if over_count || over_time {
            return Err(DecideError::BudgetExceeded {
                relations_examined: n - 1,
            });
        }
        Ok(())
    }

    /// The minimal ways of extending `r` towards answering `o`: for each
    /// candidate answer, the pair sets discharging its first requirement
    /// that `r` does not meet yet.
    fn extensions(&self, r: &PlaceRelation, o: &Obligation) -> Result<Vec<PlaceRelation>, DecideError> {
        let tr = self.net.transition(o.transition)?;
        let mut children: Vec<PlaceRelation> = Vec::new();
        for cand in self.net.transitions() {
            let Some((_, reqs)) = requirements(self.kind, o.side, tr, cand, &o.marking)? else {
                continue;
            };
            let Some((a, b)) = reqs.into_iter().find(|(a, b)| closure_contains(r, a, b).is_none()) else {
                continue;
            };
            for p in minimal_pair_sets(self.places(), self.relation_kind(), &a, &b) {
                children.push(r.union(&p)?);
            }
        }
        children.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp_pattern(b)));
        children.dedup();
        let mut minimal: Vec<PlaceRelation> = Vec::with_capacity(children.len());
        for c in children {
            if !minimal.iter().any(|m| m.is_subset(&c)) {
                minimal.push(c);
            }
        }
        Ok(minimal)
    }
}

/// A learned rejection: any relation containing `generators` and none of
/// `answers` is not a bisimulation.
struct Nogood {
    generators: u64,
    answers: Vec<u64>,
}

impl Nogood {
    fn rejects(&self, pattern: u64) -> bool {
        pattern & self.generators == self.generators && self.answers.iter().all(|&a| pattern & a != a)
    }
}

/// The first pattern of `patterns` (in iteration order) that `test` accepts.
fn scan<I, F>(patterns: I, test: &F, parallel: bool) -> Result<Option<PlaceRelation>, NetError>
where
    I: Iterator<Item = u64>,
    F: Fn(u64, &mut Vec<Nogood>) -> Result<Option<PlaceRelation>, NetError> + Sync,
{
    if !parallel {
        let mut nogoods = Vec::new();
        for p in patterns {
            if let Some(r) = test(p, &mut nogoods)? {
                return Ok(Some(r));
            }
        }
        return Ok(None);
    }
    const CHUNK: usize = 1 << 14;
    let mut patterns = patterns.peekable();
    while patterns.peek().is_some() {
        let chunk: Vec<u64> = patterns.by_ref().take(CHUNK).collect();
        let hit = chunk
            .par_iter()
            .map_init(Vec::new, |nogoods, &p| test(p, nogoods))
            .find_map_first(|res| match res {
                Ok(None) => None,
                other => Some(other),
            });
        if let Some(res) = hit {
            return res;
        }
    }
    Ok(None)
}

fn pattern_of(r: &PlaceRelation, space: &[(Slot, Slot)]) -> u64 {
    space
        .iter()
        .enumerate()
        .filter(|(_, &(a, b))| r.contains(a, b))
        .fold(0, |acc, (k, _)| acc | 1 << k)
}

/// The `width`-bit patterns with exactly `k` bits set, in increasing order.
struct SameWeight {
    next: Option<u64>,
    limit: u64,
}

impl SameWeight {
    fn new(width: u32, k: u32) -> Self {
        let limit = if width >= 64 { u64::MAX } else { 1u64 << width };
        let first = if k == 0 {
            0
        } else if k >= 64 {
            u64::MAX
        } else {
            (1u64 << k) - 1
        };
        SameWeight {
            next: (k <= width).then_some(first),
            limit,
        }
    }
}

impl Iterator for SameWeight {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let v = self.next?;
        if self.limit != u64::MAX && v >= self.limit {
            self.next = None;
            return None;
        }
        self.next = if v == 0 {
            None
        } else {
            // Gosper's hack.
            let c = v & v.wrapping_neg();
            let r = v.checked_add(c);
            match r {
                Some(r) if r != 0 => Some((((r ^ v) >> 2) / c) | r),
                _ => None,
            }
        };
        Some(v)
    }
}

/// A search-tree node: pairs above `decided` are fixed, `included` holds the
/// chosen ones and `possible` the chosen plus undecided ones.
struct Frame {
    decided: usize,
    included: PlaceRelation,
    possible: PlaceRelation,
}

fn check_index_set(net: &Net, kind: BisimKind, max_index_set: usize) -> Result<(), DecideError> {
    let index_set = net.place_count() + usize::from(kind.relation_kind() == RelationKind::Dummy);
    if index_set > max_index_set {
        return Err(DecideError::TooLarge {
            index_set,
            cap: max_index_set,
        });
    }
    Ok(())
}

fn root(net: &Net, kind: BisimKind) -> Frame {
    Frame {
        decided: 0,
        included: PlaceRelation::empty(net.place_count(), kind.relation_kind()),
        possible: PlaceRelation::total(net.place_count(), kind.relation_kind()),
    }
}

/// Lazily yields every bisimulation of the given kind in increasing
/// bit-pattern order.
pub struct Bisimulations<'a> {
    net: &'a Net,
    kind: BisimKind,
    space: Vec<(Slot, Slot)>,
    stack: Vec<Frame>,
}

impl Iterator for Bisimulations<'_> {
    type Item = Result<PlaceRelation, NetError>;

    fn next(&mut self) -> Option<Self::Item> {
        while let Some(f) = self.stack.pop() {
            match unanswered(self.net, &f.included, &f.possible, self.kind, true) {
                Err(e) => return Some(Err(e)),
                Ok(v) if !v.is_empty() => continue,
                Ok(_) => {}
            }
            if f.decided == self.space.len() {
                return Some(Ok(f.included));
            }
            let (a, b) = self.space[self.space.len() - 1 - f.decided];
            let mut with = f.included.clone();
            with.insert(a, b).expect("pair in space");
            let mut without = f.possible.clone();
            without.remove(a, b);
            self.stack.push(Frame {
                decided: f.decided + 1,
                included: with,
                possible: f.possible,
            });
            self.stack.push(Frame {
                decided: f.decided + 1,
                included: f.included,
                possible: without,
            });
        }
        None
    }
}

/// All bisimulations of the given kind, in increasing bit-pattern order.
pub fn enumerate_bisimulations(net: &Net, kind: BisimKind, max_index_set: usize) -> Result<Bisimulations<'_>, DecideError> {
    check_index_set(net, kind, max_index_set)?;
    Ok(Bisimulations {
        net,
        kind,
        space: PlaceRelation::pair_space(net.place_count(), kind.relation_kind()),
        stack: vec![root(net, kind)],
    })
}

/// The bisimulations of the given kind not strictly contained in another
/// one, in increasing bit-pattern order.
pub fn maximal_bisimulations(net: &Net, kind: BisimKind, max_index_set: usize) -> Result<Vec<PlaceRelation>, DecideError> {
    check_index_set(net, kind, max_index_set)?;
    let space = PlaceRelation::pair_space(net.place_count(), kind.relation_kind());
    let mut found: Vec<PlaceRelation> = Vec::new();
    // Including a pair is tried before excluding it, so every strict
    // superset of an accepted relation is reached before the relation itself.
    let mut stack = vec![root(net, kind)];
    while let Some(f) = stack.pop() {
        if found.iter().any(|m| f.possible.is_subset(m)) {
            continue;
        }
        if !unanswered(net, &f.included, &f.possible, kind, true)?.is_empty() {
            continue;
        }
        if f.decided == space.len() {
            found.push(f.included);
            continue;
        }
        let (a, b) = space[f.decided];
        let mut with = f.included.clone();
        with.insert(a, b).expect("pair in space");
        let mut without = f.possible.clone();
        without.remove(a, b);
        stack.push(Frame {
            decided: f.decided + 1,
            included: f.included,
            possible: without,
        });
        stack.push(Frame {
            decided: f.decided + 1,
            included: with,
            possible: f.possible,
        });
    }
    found.sort_by(|a, b| a.cmp_pattern(b));
    Ok(found)
}
