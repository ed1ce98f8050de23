//! Brute-force reference implementations: closure membership by trying every
//! token assignment, the one-step bisimulation game on a bounded window of
//! related markings, and partition refinement over explicit state spaces.

use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::closure::Side;
use crate::multiset::{Multiset, Place};
use crate::net::{Label, Net, NetError, TransitionId};
use crate::relation::{PlaceRelation, Slot};
use crate::verify::BisimKind;

/// Largest `|m1| + |m2|` the closure oracle accepts.
pub const CLOSURE_ORACLE_LIMIT: u64 = 14;

/// Largest marking size the game oracle enumerates.
pub const GAME_SIZE_LIMIT: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance of size {size} exceeds the oracle limit of {limit}")]
    TooLarge { size: u64, limit: u64 },
    #[error("more than {0} states")]
    BoundExceeded(usize),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Whether `(m1, m2)` is in the closure of `r`, by trying every way of
/// pairing the tokens.
pub fn closure_oracle(r: &PlaceRelation, m1: &Multiset, m2: &Multiset) -> Result<bool, OracleError> {
    let size = m1.size() + m2.size();
    if size > CLOSURE_ORACLE_LIMIT {
        return Err(OracleError::TooLarge {
            size,
            limit: CLOSURE_ORACLE_LIMIT,
        });
    }
    let left: Vec<Place> = m1.tokens().collect();
    let right: Vec<Place> = m2.tokens().collect();
    let mut used = vec![false; right.len()];
    Ok(assign(r, &left, &right, &mut used))
}

fn assign(r: &PlaceRelation, left: &[Place], right: &[Place], used: &mut [bool]) -> bool {
    let Some((&p, rest)) = left.split_first() else {
        return right
            .iter()
            .zip(used.iter())
            .all(|(&q, &u)| u || r.contains(Slot::Theta, Slot::Place(q)));
    };
    for j in 0..right.len() {
        if !used[j] && r.contains(Slot::Place(p), Slot::Place(right[j])) {
            used[j] = true;
            let ok = assign(r, rest, right, used);
            used[j] = false;
            if ok {
                return true;
            }
        }
    }
    r.contains(Slot::Place(p), Slot::Theta) && assign(r, rest, right, used)
}

/// A related pair of markings from which a move of `transition` on `side`
/// cannot be matched.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameViolation {
    pub m1: Multiset,
    pub m2: Multiset,
    pub transition: TransitionId,
    pub side: Side,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GameOutcome {
    Pass,
    Violation(GameViolation),
}

/// Plays the one-step game of `kind` from every closure-related pair of
/// markings with both sizes at most `size_bound`.
pub fn bounded_game_oracle(net: &Net, r: &PlaceRelation, kind: BisimKind, size_bound: usize) -> Result<GameOutcome, OracleError> {
    if size_bound > GAME_SIZE_LIMIT {
        return Err(OracleError::TooLarge {
            size: size_bound as u64,
            limit: GAME_SIZE_LIMIT as u64,
        });
    }
    let markings = markings_up_to(net.place_count(), size_bound);
    for m1 in &markings {
        for m2 in &markings {
            if !closure_oracle(r, m1, m2)? {
                continue;
            }
            if let Some((transition, side)) = game_violation_at(net, r, kind, m1, m2)? {
                return Ok(GameOutcome::Violation(GameViolation {
                    m1: m1.clone(),
                    m2: m2.clone(),
                    transition,
                    side,
                }));
            }
        }
    }
    Ok(GameOutcome::Pass)
}

/// The first move from `(m1, m2)` that cannot be matched under `kind`, if
/// any. Does not check that the pair is related.
pub fn game_violation_at(
    net: &Net,
    r: &PlaceRelation,
    kind: BisimKind,
    m1: &Multiset,
    m2: &Multiset,
) -> Result<Option<(TransitionId, Side)>, OracleError> {
    for side in [Side::Left, Side::Right] {
        let (mover, other) = match side {
            Side::Left => (m1, m2),
            Side::Right => (m2, m1),
        };
        for t in net.transition_ids() {
            if !net.enabled(mover, t)? {
                continue;
            }
            let after = net.fire(mover, t)?;
            let mut matched = false;
            for u in net.transition_ids() {
                if !net.enabled(other, u)? {
                    continue;
                }
                let other_after = net.fire(other, u)?;
                if move_matches(net, r, kind, side, t, &after, u, &other_after)? {
                    matched = true;
                    break;
                }
            }
            if !matched {
                return Ok(Some((t, side)));
            }
        }
    }
    Ok(None)
}

#[allow(clippy::too_many_arguments)]
fn move_matches(
    net: &Net,
    r: &PlaceRelation,
    kind: BisimKind,
    side: Side,
    t: TransitionId,
    after: &Multiset,
    u: TransitionId,
    other_after: &Multiset,
) -> Result<bool, OracleError> {
    let tt = net.transition(t)?;
    let tu = net.transition(u)?;
    if tt.label != tu.label {
        return Ok(false);
    }
    let related = |a: &Multiset, b: &Multiset| match side {
        Side::Left => closure_oracle(r, a, b),
        Side::Right => closure_oracle(r, b, a),
    };
    if matches!(kind, BisimKind::Place | BisimKind::DPlace) && !(related(&tt.pre, &tu.pre)? && related(&tt.post, &tu.post)?) {
        return Ok(false);
    }
    related(after, other_after)
}

/// Every multiset over `places` places with at most `bound` tokens.
pub fn markings_up_to(places: usize, bound: usize) -> Vec<Multiset> {
    let mut out = Vec::new();
    let mut counts = vec![0u32; places];
    fill(&mut counts, 0, bound, &mut out);
    out.sort();
    out
}

fn fill(counts: &mut [u32], at: usize, left: usize, out: &mut Vec<Multiset>) {
    if at == counts.len() {
        out.push(Multiset::from_counts(
            counts.iter().enumerate().map(|(i, &k)| (Place(i as u32), k)),
        ));
        return;
    }
    for k in 0..=left {
        counts[at] = k as u32;
        fill(counts, at + 1, left - k, out);
    }
    counts[at] = 0;
}

/// Explorations refuse once the move count exceeds this multiple of the
/// state bound.
pub const MOVES_PER_STATE: usize = 64;

/// An explicit labeled transition system over markings. Labels are sorted
/// lists of actions: singletons for the interleaving semantics, the step's
/// action multiset for the step semantics.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Lts {
    pub states: Vec<Multiset>,
    pub moves: Vec<(usize, Vec<Label>, usize)>,
}

/// Outgoing moves of a state as (label, target block).
type Signature<'a> = BTreeSet<(&'a [Label], usize)>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Semantics {
    Interleaving,
    Step,
}

impl Lts {
    /// The interleaving state space reachable from `roots`.
    pub fn interleaving(net: &Net, roots: &[Multiset], max_states: usize) -> Result<Lts, OracleError> {
        Self::explore(net, roots, max_states, Semantics::Interleaving)
    }

    /// The step state space reachable from `roots`.
    pub fn step(net: &Net, roots: &[Multiset], max_states: usize) -> Result<Lts, OracleError> {
        Self::explore(net, roots, max_states, Semantics::Step)
    }

    fn explore(net: &Net, roots: &[Multiset], max_states: usize, semantics: Semantics) -> Result<Lts, OracleError> {
        let max_moves = max_states.saturating_mul(MOVES_PER_STATE);
        let mut lts = Lts::default();
        let mut index: HashMap<Multiset, usize> = HashMap::new();
        let mut queue = VecDeque::new();
        let mut intern = |m: Multiset, lts: &mut Lts, queue: &mut VecDeque<usize>| -> Result<usize, OracleError> {
            if let Some(&i) = index.get(&m) {
                return Ok(i);
            }
            if lts.states.len() == max_states {
                return Err(OracleError::BoundExceeded(max_states));
            }
            let i = lts.states.len();
            index.insert(m.clone(), i);
            lts.states.push(m);
            queue.push_back(i);
            Ok(i)
        };
        for m in roots {
            intern(m.clone(), &mut lts, &mut queue)?;
        }
        while let Some(i) = queue.pop_front() {
            let m = lts.states[i].clone();
            let mut successors: Vec<(Vec<Label>, Multiset)> = Vec::new();
            match semantics {
                Semantics::Interleaving => {
                    for t in net.enabled_transitions(&m).collect::<Vec<_>>() {
                        successors.push((vec![net.transition(t)?.label], net.fire(&m, t)?));
                    }
                }
                Semantics::Step => {
                    let steps = net.enabled_steps_within(&m, max_states).map_err(|_| OracleError::BoundExceeded(max_states))?;
                    for g in steps {
                        successors.push((net.step_label(&g), net.fire_step(&m, &g)?));
                    }
                }
            }
            for (label, next) in successors {
                let j = intern(next, &mut lts, &mut queue)?;
                if lts.moves.len() == max_moves {
                    return Err(OracleError::BoundExceeded(max_states));
                }
                lts.moves.push((i, label, j));
            }
        }
        Ok(lts)
    }

    /// The coarsest bisimulation partition, as a block number per state.
    pub fn bisimulation_blocks(&self) -> Vec<usize> {
        let mut block = vec![0usize; self.states.len()];
        let mut count = usize::from(!self.states.is_empty());
        loop {
            let mut signatures: Vec<Signature> = vec![BTreeSet::new(); self.states.len()];
            for (s, label, t) in &self.moves {
                signatures[*s].insert((label.as_slice(), block[*t]));
            }
            let mut ids: HashMap<(usize, &Signature), usize> = HashMap::new();
            let mut next = vec![0usize; self.states.len()];
            for s in 0..self.states.len() {
                let fresh = ids.len();
                next[s] = *ids.entry((block[s], &signatures[s])).or_insert(fresh);
            }
            let refined = ids.len();
            block = next;
            if refined == count {
                return block;
            }
            count = refined;
        }
    }

    fn state(&self, m: &Multiset) -> usize {
        self.states.iter().position(|s| s == m).expect("root state")
    }
}

/// Interleaving bisimilarity of `m1` and `m2`, refusing when more than
/// `max_states` markings (or more than [`MOVES_PER_STATE`] times as many
/// moves) are reachable.
pub fn interleaving_bisimilar(net: &Net, m1: &Multiset, m2: &Multiset, max_states: usize) -> Result<bool, OracleError> {
    let lts = Lts::interleaving(net, &[m1.clone(), m2.clone()], max_states)?;
    let blocks = lts.bisimulation_blocks();
    Ok(blocks[lts.state(m1)] == blocks[lts.state(m2)])
}

/// Step bisimilarity of `m1` and `m2`, refusing when more than
/// `max_states` markings (or more than [`MOVES_PER_STATE`] times as many
/// moves) are reachable.
pub fn step_bisimilar(net: &Net, m1: &Multiset, m2: &Multiset, max_states: usize) -> Result<bool, OracleError> {
    let lts = Lts::step(net, &[m1.clone(), m2.clone()], max_states)?;
    let blocks = lts.bisimulation_blocks();
    Ok(blocks[lts.state(m1)] == blocks[lts.state(m2)])
}
