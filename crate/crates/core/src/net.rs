//! Labeled P/T nets and their sequential and step token games.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::multiset::{Multiset, Overflow, Place};

/// Dense index of an action label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(pub u32);

/// Dense index of a transition, in declaration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TransitionId(pub u32);

impl TransitionId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("unknown transition #{0}")]
    UnknownTransition(u32),
    #[error("transition `{0}` is not enabled")]
    NotEnabled(String),
    #[error("step is not enabled")]
    StepNotEnabled,
    #[error("step must contain at least one transition")]
    EmptyStep,
    #[error("more than {0} distinct reachable markings")]
    BoundExceeded(usize),
    #[error("transition `{0}` has an empty pre-set")]
    EmptyPreset(String),
    #[error("place `{0}` is declared twice")]
    DuplicatePlace(String),
    #[error("transition `{0}` is declared twice")]
    DuplicateTransition(String),
    #[error("place #{0} does not belong to the net")]
    UnknownPlace(u32),
    #[error(transparent)]
    Overflow(#[from] Overflow),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub id: String,
    pub pre: Multiset,
    pub label: Label,
    pub post: Multiset,
}

/// A finite labeled P/T net `(S, A, T)`.
///
/// Places, labels and transitions are interned in declaration order; every
/// index handed out by the net stays valid for its lifetime.
#[derive(Clone, Debug)]
pub struct Net {
    places: Vec<String>,
    labels: Vec<String>,
    transitions: Vec<Transition>,
    place_index: HashMap<String, Place>,
    transition_index: HashMap<String, TransitionId>,
    multiplicity_cap: u32,
}

impl PartialEq for Net {
    fn eq(&self, other: &Self) -> bool {
        self.places == other.places
            && self.labels == other.labels
            && self.transitions == other.transitions
            && self.multiplicity_cap == other.multiplicity_cap
    }
}

impl Eq for Net {}

impl Default for Net {
    fn default() -> Self {
        Net::new()
    }
}

impl Net {
    pub fn new() -> Self {
        Net {
            places: Vec::new(),
            labels: Vec::new(),
            transitions: Vec::new(),
            place_index: HashMap::new(),
            transition_index: HashMap::new(),
            multiplicity_cap: u32::MAX,
        }
    }

    /// Sets the largest multiplicity any fired marking may carry.
    pub fn with_multiplicity_cap(mut self, cap: u32) -> Self {
        self.multiplicity_cap = cap;
        self
    }

    pub fn multiplicity_cap(&self) -> u32 {
        self.multiplicity_cap
    }

    pub fn add_place(&mut self, name: impl Into<String>) -> Result<Place, NetError> {
        let name = name.into();
        if self.place_index.contains_key(&name) {
            return Err(NetError::DuplicatePlace(name));
        }
        let p = Place(self.places.len() as u32);
        self.place_index.insert(name.clone(), p);
        self.places.push(name);
        Ok(p)
    }

    /// Interns `name`, returning the existing index when already present.
    pub fn intern_label(&mut self, name: &str) -> Label {
        if let Some(i) = self.labels.iter().position(|l| l == name) {
            return Label(i as u32);
        }
        self.labels.push(name.to_string());
        Label(self.labels.len() as u32 - 1)
    }

    pub fn add_transition(
        &mut self,
        id: impl Into<String>,
        pre: Multiset,
        label: &str,
        post: Multiset,
    ) -> Result<TransitionId, NetError> {
        let id = id.into();
        if self.transition_index.contains_key(&id) {
            return Err(NetError::DuplicateTransition(id));
        }
        if pre.is_empty() {
            return Err(NetError::EmptyPreset(id));
        }
        for p in pre.support().chain(post.support()) {
            if p.index() >= self.places.len() {
                return Err(NetError::UnknownPlace(p.0));
            }
        }
        let label = self.intern_label(label);
        let t = TransitionId(self.transitions.len() as u32);
        self.transition_index.insert(id.clone(), t);
        self.transitions.push(Transition { id, pre, label, post });
        Ok(t)
    }

    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn places(&self) -> impl ExactSizeIterator<Item = Place> {
        (0..self.places.len() as u32).map(Place)
    }

    pub fn place_name(&self, p: Place) -> &str {
        &self.places[p.index()]
    }

    pub fn place_by_name(&self, name: &str) -> Option<Place> {
        self.place_index.get(name).copied()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_name(&self, l: Label) -> &str {
        &self.labels[l.0 as usize]
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition_ids(&self) -> impl ExactSizeIterator<Item = TransitionId> {
        (0..self.transitions.len() as u32).map(TransitionId)
    }

    pub fn transition(&self, t: TransitionId) -> Result<&Transition, NetError> {
        self.transitions
            .get(t.index())
            .ok_or(NetError::UnknownTransition(t.0))
    }

    pub fn transition_by_id(&self, id: &str) -> Option<TransitionId> {
        self.transition_index.get(id).copied()
    }

    /// `m[t⟩`: the pre-set of `t` is contained in `m`.
    pub fn enabled(&self, m: &Multiset, t: TransitionId) -> Result<bool, NetError> {
        Ok(self.transition(t)?.pre.is_subset(m))
    }

    /// Fires `t` at `m`, returning `(m ⊖ •t) ⊕ t•`.
    pub fn fire(&self, m: &Multiset, t: TransitionId) -> Result<Multiset, NetError> {
        let tr = self.transition(t)?;
        if !tr.pre.is_subset(m) {
            return Err(NetError::NotEnabled(tr.id.clone()));
        }
        let next = m.difference(&tr.pre).try_union(&tr.post)?;
        self.check_cap(&next)?;
        Ok(next)
    }

    /// The transitions enabled at `m`, in index order.
    pub fn enabled_transitions<'a>(&'a self, m: &'a Multiset) -> impl Iterator<Item = TransitionId> + 'a {
        self.transition_ids()
            .filter(move |&t| self.transitions[t.index()].pre.is_subset(m))
    }

    /// `•G`, the combined token demand of a step.
    pub fn step_preset(&self, g: &Step) -> Result<Multiset, NetError> {
        let mut acc = Multiset::empty();
        for (t, k) in g.iter() {
            acc = acc.try_union(&self.transition(t)?.pre.try_scale(k)?)?;
        }
        Ok(acc)
    }

    /// `G•`, the combined token production of a step.
    pub fn step_postset(&self, g: &Step) -> Result<Multiset, NetError> {
        let mut acc = Multiset::empty();
        for (t, k) in g.iter() {
            acc = acc.try_union(&self.transition(t)?.post.try_scale(k)?)?;
        }
        Ok(acc)
    }

    /// Fires the step `g` at `m`, returning `(m ⊖ •G) ⊕ G•`.
    pub fn fire_step(&self, m: &Multiset, g: &Step) -> Result<Multiset, NetError> {
        let pre = self.step_preset(g)?;
        if !pre.is_subset(m) {
            return Err(NetError::StepNotEnabled);
        }
        let next = m.difference(&pre).try_union(&self.step_postset(g)?)?;
        self.check_cap(&next)?;
        Ok(next)
    }

    /// The label multiset `l(G)`, as sorted label indices with repetition.
    pub fn step_label(&self, g: &Step) -> Vec<Label> {
        let mut out: Vec<Label> = g
            .iter()
            .flat_map(|(t, k)| std::iter::repeat_n(self.transitions[t.index()].label, k as usize))
            .collect();
        out.sort_unstable();
        out
    }

    /// Every nonempty step enabled at `m`, in lexicographic order of the
    /// `(transition, multiplicity)` sequences.
    pub fn enabled_steps(&self, m: &Multiset) -> Vec<Step> {
        self.enabled_steps_within(m, usize::MAX).expect("unbounded")
    }

    /// As [`Net::enabled_steps`], refusing once more than `limit` steps are
    /// found.
    pub fn enabled_steps_within(&self, m: &Multiset, limit: usize) -> Result<Vec<Step>, NetError> {
        let mut out = Vec::new();
        let mut current: Vec<(TransitionId, u32)> = Vec::new();
        self.collect_steps(0, m.clone(), &mut current, &mut out, limit)?;
        out.sort();
        Ok(out)
    }

    fn collect_steps(
        &self,
        from: usize,
        remaining: Multiset,
        current: &mut Vec<(TransitionId, u32)>,
        out: &mut Vec<Step>,
        limit: usize,
    ) -> Result<(), NetError> {
        if from == self.transitions.len() {
            if !current.is_empty() {
                if out.len() == limit {
                    return Err(NetError::BoundExceeded(limit));
                }
                out.push(Step {
                    occurrences: current.clone(),
                });
            }
            return Ok(());
        }
        // Zero occurrences of this transition.
        self.collect_steps(from + 1, remaining.clone(), current, out, limit)?;
        let pre = &self.transitions[from].pre;
        let mut rest = remaining;
        let mut k = 0u32;
        while pre.is_subset(&rest) {
            rest = rest.difference(pre);
            k += 1;
            current.push((TransitionId(from as u32), k));
            self.collect_steps(from + 1, rest.clone(), current, out, limit)?;
            current.pop();
        }
        Ok(())
    }

    /// Breadth-first exploration of `[m0⟩`, refusing once more than
    /// `max_markings` distinct markings are found.
    pub fn reachable(&self, m0: &Multiset, max_markings: usize) -> Result<Reachability, NetError> {
        let mut graph = Reachability {
            markings: vec![m0.clone()],
            parent: vec![None],
            index: HashMap::from([(m0.clone(), 0)]),
        };
        if max_markings == 0 {
            return Err(NetError::BoundExceeded(0));
        }
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let m = graph.markings[i].clone();
            for t in self.enabled_transitions(&m).collect::<Vec<_>>() {
                let next = self.fire(&m, t)?;
                if graph.index.contains_key(&next) {
                    continue;
                }
                if graph.markings.len() == max_markings {
                    return Err(NetError::BoundExceeded(max_markings));
                }
                let j = graph.markings.len();
                graph.index.insert(next.clone(), j);
                graph.markings.push(next);
                graph.parent.push(Some((i, t)));
                queue.push_back(j);
            }
        }
        Ok(graph)
    }

    fn check_cap(&self, m: &Multiset) -> Result<(), NetError> {
        if self.multiplicity_cap < u32::MAX {
            if let Some((p, _)) = m.iter().find(|&(_, k)| k > self.multiplicity_cap) {
                return Err(Overflow {
                    place: p.0,
                    cap: self.multiplicity_cap,
                }
                .into());
            }
        }
        Ok(())
    }
}

/// A nonempty multiset of transitions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Step {
    occurrences: Vec<(TransitionId, u32)>,
}

impl Step {
    pub fn new<I>(occurrences: I) -> Result<Step, NetError>
    where
        I: IntoIterator<Item = (TransitionId, u32)>,
    {
        let mut v: Vec<(TransitionId, u32)> = occurrences.into_iter().filter(|&(_, k)| k > 0).collect();
        v.sort_unstable_by_key(|&(t, _)| t);
        let mut out: Vec<(TransitionId, u32)> = Vec::with_capacity(v.len());
        for (t, k) in v {
            match out.last_mut() {
                Some((u, acc)) if *u == t => *acc += k,
                _ => out.push((t, k)),
            }
        }
        if out.is_empty() {
            return Err(NetError::EmptyStep);
        }
        Ok(Step { occurrences: out })
    }

    pub fn single(t: TransitionId) -> Step {
        Step {
            occurrences: vec![(t, 1)],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (TransitionId, u32)> + '_ {
        self.occurrences.iter().copied()
    }

    pub fn size(&self) -> u64 {
        self.occurrences.iter().map(|&(_, k)| u64::from(k)).sum()
    }
}

/// The explored reachability set, with a BFS tree for replaying firing
/// sequences.
#[derive(Clone, Debug)]
pub struct Reachability {
    markings: Vec<Multiset>,
    parent: Vec<Option<(usize, TransitionId)>>,
    index: HashMap<Multiset, usize>,
}

impl Reachability {
    pub fn markings(&self) -> &[Multiset] {
        &self.markings
    }

    pub fn len(&self) -> usize {
        self.markings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.markings.is_empty()
    }

    pub fn contains(&self, m: &Multiset) -> bool {
        self.index.contains_key(m)
    }

    /// A firing sequence from the initial marking to `m`, if `m` was reached.
    pub fn path_to(&self, m: &Multiset) -> Option<Vec<TransitionId>> {
        let mut i = *self.index.get(m)?;
        let mut path = Vec::new();
        while let Some((prev, t)) = self.parent[i] {
            path.push(t);
            i = prev;
        }
        path.reverse();
        Some(path)
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {:?} -#{}-> {:?}", self.id, self.pre, self.label.0, self.post)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::corpus_net;
    use proptest::prelude::*;

    fn m(net: &Net, text: &str) -> Multiset {
        crate::format::parse_marking(net, text).unwrap()
    }

    fn t(net: &Net, id: &str) -> TransitionId {
        net.transition_by_id(id).unwrap()
    }

    #[test]
    fn enabling_on_simple_net() {
        let net = corpus_net("fig6");
        let t1 = t(&net, "t1");
        assert!(net.enabled(&m(&net, "s1 + s2"), t1).unwrap());
        assert!(!net.enabled(&m(&net, "2*s1"), t1).unwrap());
        assert!(!net.enabled(&Multiset::empty(), t1).unwrap());
        assert!(matches!(net.enabled(&Multiset::empty(), TransitionId(9)), Err(NetError::UnknownTransition(9))));
    }

    #[test]
    fn firing_examples() {
        let net = corpus_net("fig4");
        assert_eq!(net.fire(&m(&net, "s1"), t(&net, "t1")).unwrap(), m(&net, "2*s2"));
        let net = corpus_net("fig10");
        assert_eq!(net.fire(&m(&net, "s4"), t(&net, "t3")).unwrap(), m(&net, "s5 + s6"));
        let net = corpus_net("fig13");
        assert_eq!(net.fire(&m(&net, "s3 + s4"), t(&net, "t5")).unwrap(), m(&net, "s4"));
        assert!(matches!(net.fire(&m(&net, "s4"), t(&net, "t5")), Err(NetError::NotEnabled(_))));
    }

    #[test]
    fn step_examples() {
        let net = corpus_net("fig13");
        let g = Step::new([(t(&net, "t1"), 1), (t(&net, "t2"), 1)]).unwrap();
        assert_eq!(net.fire_step(&m(&net, "s1 + s2"), &g).unwrap(), Multiset::empty());
        let g = Step::new([(t(&net, "t3"), 1), (t(&net, "t4"), 1)]).unwrap();
        assert_eq!(net.fire_step(&m(&net, "s3 + s4"), &g).unwrap(), Multiset::empty());
        let g = Step::new([(t(&net, "t3"), 1), (t(&net, "t5"), 1)]).unwrap();
        assert_eq!(net.fire_step(&m(&net, "s3 + s4"), &g), Err(NetError::StepNotEnabled));

        let mut n = Net::new();
        let s = n.add_place("s").unwrap();
        let s2 = n.add_place("s'").unwrap();
        let tt = n
            .add_transition("t", Multiset::singleton(s), "a", Multiset::singleton(s2))
            .unwrap();
        let g = Step::new([(tt, 2)]).unwrap();
        assert_eq!(n.fire_step(&Multiset::with_count(s, 2), &g).unwrap(), Multiset::with_count(s2, 2));
        assert_eq!(Step::new([]), Err(NetError::EmptyStep));
    }

    /// Independent enumeration: every multiset over the transitions with
    /// per-transition multiplicity bounded by |m| is tested for enabledness.
    fn steps_by_enumeration(net: &Net, marking: &Multiset) -> Vec<Step> {
        let n = net.transitions().len();
        let bound = marking.size() as u32;
        let mut out = Vec::new();
        let mut counts = vec![0u32; n];
        loop {
            let mut i = 0;
            while i < n && counts[i] == bound {
                counts[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
            counts[i] += 1;
            let step = Step::new(counts.iter().enumerate().map(|(j, &k)| (TransitionId(j as u32), k))).unwrap();
            if net.step_preset(&step).unwrap().is_subset(marking) {
                out.push(step);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn enabled_steps_examples() {
        let net = corpus_net("fig13");
        let tid = |s: &str| t(&net, s);
        let steps = net.enabled_steps(&m(&net, "s1 + s2"));
        let expected = vec![
            Step::single(tid("t1")),
            Step::new([(tid("t1"), 1), (tid("t2"), 1)]).unwrap(),
            Step::single(tid("t2")),
        ];
        let mut expected_sorted = expected.clone();
        expected_sorted.sort();
        assert_eq!(steps, expected_sorted);
        assert_eq!(steps, steps_by_enumeration(&net, &m(&net, "s1 + s2")));

        let steps = net.enabled_steps(&m(&net, "s3 + s4"));
        let mut expected = vec![
            Step::single(tid("t3")),
            Step::single(tid("t4")),
            Step::single(tid("t5")),
            Step::new([(tid("t3"), 1), (tid("t4"), 1)]).unwrap(),
        ];
        expected.sort();
        assert_eq!(steps, expected);
        assert_eq!(steps, steps_by_enumeration(&net, &m(&net, "s3 + s4")));
        assert!(net.enabled_steps(&Multiset::empty()).is_empty());
    }

    #[test]
    fn reachability_examples() {
        let net = corpus_net("fig4");
        let r = net.reachable(&m(&net, "s3"), 100).unwrap();
        let mut got: Vec<_> = r.markings().to_vec();
        got.sort();
        let mut want = vec![m(&net, "s3"), m(&net, "s4"), Multiset::empty()];
        want.sort();
        assert_eq!(got, want);
        for mk in r.markings() {
            let path = r.path_to(mk).unwrap();
            let mut cur = m(&net, "s3");
            for tr in path {
                cur = net.fire(&cur, tr).unwrap();
            }
            assert_eq!(&cur, mk);
        }

        let net = corpus_net("fig8");
        assert_eq!(net.reachable(&m(&net, "P1 + C1"), 1000).unwrap_err(), NetError::BoundExceeded(1000));

        let r = net.reachable(&Multiset::empty(), 1).unwrap();
        assert_eq!(r.markings(), &[Multiset::empty()]);
    }

    #[test]
    fn multiplicity_cap_is_enforced() {
        let net = corpus_net("fig9").with_multiplicity_cap(2);
        let s9 = m(&net, "2*s9");
        let b = net.transition_by_id("t11").unwrap();
        assert!(matches!(net.fire(&s9, b), Err(NetError::Overflow(_))));
    }

    fn arb_marking(places: usize) -> impl Strategy<Value = Vec<u32>> {
        proptest::collection::vec(0u32..3, places)
    }

    proptest! {
        #[test]
        fn firing_laws(counts in arb_marking(9), fig in 0usize..4) {
            let name = ["fig5", "fig9", "fig13", "fig14"][fig];
            let net = corpus_net(name);
            let marking = Multiset::from_counts(counts.iter().take(net.place_count()).enumerate().map(|(i, &k)| (Place(i as u32), k)));
            for t1 in net.enabled_transitions(&marking).collect::<Vec<_>>() {
                let tr = net.transition(t1).unwrap();
                let next = net.fire(&marking, t1).unwrap();
                prop_assert_eq!(next.size() + tr.pre.size(), marking.size() + tr.post.size());
                prop_assert_eq!(&net.fire_step(&marking, &Step::single(t1)).unwrap(), &next);
                for t2 in net.transition_ids() {
                    let pre2 = &net.transition(t2).unwrap().pre;
                    if tr.pre.union(pre2).is_subset(&marking) {
                        let a = net.fire(&net.fire(&marking, t1).unwrap(), t2).unwrap();
                        let b = net.fire(&net.fire(&marking, t2).unwrap(), t1).unwrap();
                        let g = Step::new([(t1, 1), (t2, 1)]).unwrap();
                        prop_assert_eq!(&a, &b);
                        prop_assert_eq!(&a, &net.fire_step(&marking, &g).unwrap());
                    }
                }
            }
        }
    }
}
