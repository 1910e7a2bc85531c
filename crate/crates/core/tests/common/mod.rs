#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ta_opacity::bundled;
use ta_opacity::fa::FiniteAutomaton;
use ta_opacity::format::parse_model;
use ta_opacity::model::{Label, LocId};
use ta_opacity::{OpacitySpec, TimedAutomaton};

pub fn integer_resets() -> (TimedAutomaton, OpacitySpec) {
    parse_model(bundled::INTEGER_RESETS).unwrap()
}

pub fn discrete_observer() -> (TimedAutomaton, OpacitySpec) {
    parse_model(bundled::DISCRETE_OBSERVER).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn loc(ta: &TimedAutomaton, name: &str) -> LocId {
    ta.find_location(name).unwrap()
}

pub fn locs(ta: &TimedAutomaton, names: &[&str]) -> BTreeSet<LocId> {
    names.iter().map(|n| loc(ta, n)).collect()
}

pub fn word(text: &str) -> Vec<Label> {
    text.split_whitespace()
        .map(|s| match s {
            "δ" => Label::Delta,
            "✓" => Label::Tick,
            "ε" => Label::Silent,
            e => Label::event(e),
        })
        .collect()
}

/// Edges as `(from label, edge label, to label)` triples.
pub fn named_edges(fa: &FiniteAutomaton) -> BTreeSet<(String, String, String)> {
    fa.edges()
        .iter()
        .map(|e| {
            (
                fa.states[e.from].label(),
                e.label.to_string(),
                fa.states[e.to].label(),
            )
        })
        .collect()
}

pub fn triples(list: &[(&str, &str, &str)]) -> BTreeSet<(String, String, String)> {
    list.iter()
        .map(|(a, b, c)| (a.to_string(), b.to_string(), c.to_string()))
        .collect()
}
