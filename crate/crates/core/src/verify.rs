//! Finite checks deciding whether a place relation is a place, d-place,
//! i-place or i-d-place bisimulation.
//!
//! Each check ranges over obligations `(t, m)`: a transition `t` together
//! with a marking `m` related to `•t` through the relation. For the plain
//! kinds `m` ranges over the additively related markings of `•t`; for the
//! dummy kinds over the substitution images of `•t`, which never pair a token
//! of `•t`'s side with θ and are therefore finitely many. An obligation is
//! answered by a transition `u` with the same label enabled at `m` whose
//! effect keeps the residual markings related.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::closure::{closure_contains, related_markings, substitution_images, Side};
use crate::multiset::Multiset;
use crate::net::{Net, NetError, Transition, TransitionId};
use crate::relation::{PlaceRelation, RelationError, RelationKind};

/// The four place-relation based equivalences.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BisimKind {
    Place,
    DPlace,
    IPlace,
    IdPlace,
}

impl BisimKind {
    pub const ALL: [BisimKind; 4] = [BisimKind::Place, BisimKind::DPlace, BisimKind::IPlace, BisimKind::IdPlace];

    /// The relation kind the equivalence is defined over.
    pub fn relation_kind(self) -> RelationKind {
        match self {
            BisimKind::Place | BisimKind::IPlace => RelationKind::Plain,
            BisimKind::DPlace | BisimKind::IdPlace => RelationKind::Dummy,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BisimKind::Place => "place",
            BisimKind::DPlace => "dplace",
            BisimKind::IPlace => "iplace",
            BisimKind::IdPlace => "idplace",
        }
    }
}

impl fmt::Display for BisimKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BisimKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "place" | "p" => Ok(BisimKind::Place),
            "dplace" | "d" => Ok(BisimKind::DPlace),
            "iplace" | "i" => Ok(BisimKind::IPlace),
            "idplace" | "id" => Ok(BisimKind::IdPlace),
            other => Err(format!("unknown equivalence `{other}` (expected place, dplace, iplace or idplace)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Relation(#[from] RelationError),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// A transition and a related marking that the relation must answer.
///
/// `side = Left` means `(•t, marking)` is in the closure and the answer is
/// a move of `marking` on the right; `Right` is the mirror image.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Obligation {
    pub transition: TransitionId,
    pub side: Side,
    pub marking: Multiset,
}

impl Obligation {
    /// The related marking pair `(m1, m2)` from which the one-step game
    /// fails.
    pub fn marking_pair(&self, net: &Net) -> (Multiset, Multiset) {
        let pre = net.transitions()[self.transition.index()].pre.clone();
        match self.side {
            Side::Left => (pre, self.marking.clone()),
            Side::Right => (self.marking.clone(), pre),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub kind: BisimKind,
    /// Unanswered obligations in canonical order; empty iff accepted.
    pub violations: Vec<Obligation>,
}

impl CheckReport {
    pub fn accepted(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Collect every violation instead of stopping at the first.
    pub all_violations: bool,
}

pub fn verify_place(net: &Net, r: &PlaceRelation) -> Result<CheckReport, VerifyError> {
    verify(net, r, BisimKind::Place, VerifyOptions::default())
}

pub fn verify_dplace(net: &Net, r: &PlaceRelation) -> Result<CheckReport, VerifyError> {
    verify(net, r, BisimKind::DPlace, VerifyOptions::default())
}

pub fn verify_iplace(net: &Net, r: &PlaceRelation) -> Result<CheckReport, VerifyError> {
    verify(net, r, BisimKind::IPlace, VerifyOptions::default())
}

pub fn verify_idplace(net: &Net, r: &PlaceRelation) -> Result<CheckReport, VerifyError> {
    verify(net, r, BisimKind::IdPlace, VerifyOptions::default())
}

/// Decides whether `r` is a bisimulation of the given kind.
pub fn verify(net: &Net, r: &PlaceRelation, kind: BisimKind, opts: VerifyOptions) -> Result<CheckReport, VerifyError> {
    check_shape(net, r, kind)?;
    let violations = unanswered(net, r, r, kind, !opts.all_violations)?;
    Ok(CheckReport { kind, violations })
}

pub(crate) fn check_shape(net: &Net, r: &PlaceRelation, kind: BisimKind) -> Result<(), RelationError> {
    if r.places() != net.place_count() {
        return Err(RelationError::PlaceCountMismatch(r.places(), net.place_count()));
    }
    if r.kind() != kind.relation_kind() {
        return Err(RelationError::KindMismatch {
            expected: kind.relation_kind(),
            found: r.kind(),
        });
    }
    Ok(())
}

/// The obligations generated by `generators` that `answers` cannot
/// discharge. With `generators = answers = R` this is exactly the
/// verification of `R`; with `generators ⊆ answers` it is a sound pruning
/// test for every relation in between, since both the obligations and their
/// answers only grow with the relation.
pub(crate) fn unanswered(
    net: &Net,
    generators: &PlaceRelation,
    answers: &PlaceRelation,
    kind: BisimKind,
    first_only: bool,
) -> Result<Vec<Obligation>, NetError> {
    let mut out = Vec::new();
    for t in net.transition_ids() {
        for side in [Side::Left, Side::Right] {
            for m in obligation_markings(generators, &net.transitions()[t.index()].pre, side) {
                if !is_answered(net, answers, kind, side, t, &m)? {
                    out.push(Obligation {
                        transition: t,
                        side,
                        marking: m,
                    });
                    if first_only {
                        return Ok(out);
                    }
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

/// The markings `m` forming obligations `(•t, m)` (left) or `(m, •t)`
/// (right), sorted.
pub(crate) fn obligation_markings(r: &PlaceRelation, pre: &Multiset, side: Side) -> Vec<Multiset> {
    match r.kind() {
        RelationKind::Plain => related_markings(r, pre, side).expect("plain relation"),
        RelationKind::Dummy => substitution_images(r, pre, side).into_iter().map(|(m, _)| m).collect(),
    }
}

/// Whether some transition answers the obligation `(t, m)` on `side`
/// through the closure of `r`.
pub fn is_answered(net: &Net, r: &PlaceRelation, kind: BisimKind, side: Side, t: TransitionId, m: &Multiset) -> Result<bool, NetError> {
    let tr = net.transition(t)?;
    for cand in net.transitions() {
        if answering_move(r, kind, side, tr, cand, m)?.is_some() {
            return Ok(true);
        }
    }
    Ok(false)
}

/// If `cand` answers the obligation `(tr, m)`, the marking `m` moves to.
pub(crate) fn answering_move(
    r: &PlaceRelation,
    kind: BisimKind,
    side: Side,
    tr: &Transition,
    cand: &Transition,
    m: &Multiset,
) -> Result<Option<Multiset>, NetError> {
    let Some((after, reqs)) = requirements(kind, side, tr, cand, m)? else {
        return Ok(None);
    };
    let ok = reqs.iter().all(|(a, b)| closure_contains(r, a, b).is_some());
    Ok(ok.then_some(after))
}

/// The marking reached by an answer and the closure memberships it needs.
pub(crate) type Answer = (Multiset, Vec<(Multiset, Multiset)>);

/// The closure memberships, oriented as (left, right), under which `cand`
/// answers the obligation `(tr, m)`, together with the marking `m` moves
/// to; `None` if `cand` cannot answer it under any relation.
pub(crate) fn requirements(
    kind: BisimKind,
    side: Side,
    tr: &Transition,
    cand: &Transition,
    m: &Multiset,
) -> Result<Option<Answer>, NetError> {
    if cand.label != tr.label || !cand.pre.is_subset(m) {
        return Ok(None);
    }
    if kind == BisimKind::Place && &cand.pre != m {
        return Ok(None);
    }
    let after = m.difference(&cand.pre).try_union(&cand.post)?;
    let orient = |own: &Multiset, other: &Multiset| match side {
        Side::Left => (own.clone(), other.clone()),
        Side::Right => (other.clone(), own.clone()),
    };
    let reqs = match kind {
        // •t2 = m, so the residual pair is (t1•, t2•) itself.
        BisimKind::Place => vec![orient(&tr.post, &cand.post)],
        BisimKind::DPlace => vec![
            orient(&tr.pre, &cand.pre),
            orient(&tr.post, &cand.post),
            orient(&tr.post, &after),
        ],
        BisimKind::IPlace | BisimKind::IdPlace => vec![orient(&tr.post, &after)],
    };
    Ok(Some((after, reqs)))
}
