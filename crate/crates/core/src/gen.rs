//! Seeded random nets, relations, markings and documents for property
//! suites and benchmarks.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::format::NetDocument;
use crate::multiset::{Multiset, Place};
use crate::net::Net;
use crate::relation::{PlaceRelation, RelationKind};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 0x5eed;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Bounds for [`random_net`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetShape {
    pub places: RangeInclusive<usize>,
    pub transitions: RangeInclusive<usize>,
    pub labels: usize,
    pub pre_size: RangeInclusive<u64>,
    pub post_size: RangeInclusive<u64>,
}

impl Default for NetShape {
    fn default() -> Self {
        NetShape {
            places: 1..=5,
            transitions: 1..=6,
            labels: 2,
            pre_size: 1..=2,
            post_size: 0..=2,
        }
    }
}

impl NetShape {
    pub fn small(max_places: usize, max_transitions: usize) -> Self {
        NetShape {
            places: 1..=max_places,
            transitions: 0..=max_transitions,
            ..Default::default()
        }
    }
}

/// A multiset of exactly `size` tokens over the first `places` places.
pub fn random_multiset<R: Rng>(rng: &mut R, places: usize, size: u64) -> Multiset {
    if places == 0 {
        return Multiset::empty();
    }
    Multiset::from_tokens((0..size).map(|_| Place(rng.gen_range(0..places) as u32)))
}

/// A marking of at most `max_size` tokens.
pub fn random_marking<R: Rng>(rng: &mut R, places: usize, max_size: u64) -> Multiset {
    let size = rng.gen_range(0..=max_size);
    random_multiset(rng, places, size)
}

pub fn random_net<R: Rng>(rng: &mut R, shape: &NetShape) -> Net {
    let mut net = Net::new();
    let places = rng.gen_range(shape.places.clone()).max(1);
    for i in 0..places {
        net.add_place(format!("s{}", i + 1)).expect("fresh place");
    }
    let labels: Vec<String> = (0..shape.labels.max(1)).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
    for i in 0..rng.gen_range(shape.transitions.clone()) {
        let pre_size = rng.gen_range(shape.pre_size.clone()).max(1);
        let pre = random_multiset(rng, places, pre_size);
        let post_size = rng.gen_range(shape.post_size.clone());
        let post = random_multiset(rng, places, post_size);
        let label = labels.choose(rng).expect("labels");
        net.add_transition(format!("t{}", i + 1), pre, label, post).expect("valid transition");
    }
    net
}

/// Each storable pair is included independently with probability `density`.
pub fn random_relation<R: Rng>(rng: &mut R, places: usize, kind: RelationKind, density: f64) -> PlaceRelation {
    let space = PlaceRelation::pair_space(places, kind);
    let pairs: Vec<_> = space.into_iter().filter(|_| rng.gen_bool(density)).collect();
    PlaceRelation::from_pairs(places, kind, pairs).expect("pairs from the kind's space")
}

fn random_ident<R: Rng>(rng: &mut R) -> String {
    const START: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_";
    const REST: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_0123456789'";
    let len = rng.gen_range(0..6);
    let mut s = String::new();
    s.push(*START.choose(rng).expect("alphabet") as char);
    for _ in 0..len {
        s.push(*REST.choose(rng).expect("alphabet") as char);
    }
    s
}

fn fresh_ident<R: Rng>(rng: &mut R, taken: &mut Vec<String>) -> String {
    loop {
        let id = random_ident(rng);
        if !taken.contains(&id) {
            taken.push(id.clone());
            return id;
        }
    }
}

/// A document with random identifiers, weights and named markings.
pub fn random_document<R: Rng>(rng: &mut R) -> NetDocument {
    let mut net = Net::new();
    let mut names = Vec::new();
    let places = rng.gen_range(1..=6);
    for _ in 0..places {
        let name = fresh_ident(rng, &mut names);
        net.add_place(name).expect("fresh place");
    }
    let mut ids = Vec::new();
    for _ in 0..rng.gen_range(0..=6) {
        let pre_size = rng.gen_range(1..=4);
        let pre = random_multiset(rng, places, pre_size);
        let post_size = rng.gen_range(0..=4);
        let post = random_multiset(rng, places, post_size);
        let id = fresh_ident(rng, &mut ids);
        let label = format!("l{}", rng.gen_range(0..3));
        net.add_transition(id, pre, &label, post).expect("valid transition");
    }
    let mut markings = BTreeMap::new();
    let mut marking_names = Vec::new();
    for _ in 0..rng.gen_range(0..=3) {
        let name = fresh_ident(rng, &mut marking_names);
        let size = rng.gen_range(0..=5);
        markings.insert(name, random_multiset(rng, places, size));
    }
    NetDocument { net, markings }
}
