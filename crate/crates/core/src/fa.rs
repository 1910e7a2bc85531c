//! Finite automata: ε-closure, subset construction, location projection and
//! DOT export.
//!
//! Silent edges are only ever tagged upstream; everything that interprets them
//! lives here.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{escape, Label, LocId};

pub type StateId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StateInfo {
    /// Name of the automaton location this state belongs to.
    pub location: String,
    /// Region descriptor, if the state carries one.
    pub region: Option<String>,
    /// Underlying user-model locations; empty when no metadata is attached.
    pub bases: BTreeSet<LocId>,
}

impl StateInfo {
    pub fn label(&self) -> String {
        match &self.region {
            Some(r) => format!("{}|{}", self.location, r),
            None => self.location.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Edge {
    pub from: StateId,
    pub label: Label,
    pub to: StateId,
}

#[derive(Clone, Debug, Serialize)]
pub struct FiniteAutomaton {
    pub alphabet: BTreeSet<Label>,
    pub states: Vec<StateInfo>,
    pub initial: BTreeSet<StateId>,
    pub accepting: BTreeSet<StateId>,
    edges: Vec<Edge>,
    #[serde(skip)]
    out: Vec<Vec<usize>>,
}

impl FiniteAutomaton {
    /// Edges are sorted and deduplicated.
    pub fn new(
        alphabet: BTreeSet<Label>,
        states: Vec<StateInfo>,
        initial: BTreeSet<StateId>,
        accepting: BTreeSet<StateId>,
        mut edges: Vec<Edge>,
    ) -> Self {
        edges.sort();
        edges.dedup();
        let mut out = vec![Vec::new(); states.len()];
        for (i, e) in edges.iter().enumerate() {
            assert!(
                e.from < states.len() && e.to < states.len(),
                "edge endpoint out of range"
            );
            out[e.from].push(i);
        }
        FiniteAutomaton {
            alphabet,
            states,
            initial,
            accepting,
            edges,
            out,
        }
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn out_edges(&self, q: StateId) -> impl Iterator<Item = &Edge> {
        self.out[q].iter().map(move |i| &self.edges[*i])
    }

    /// States whose underlying location lies in `locs`.
    pub fn states_at(&self, locs: &BTreeSet<LocId>) -> BTreeSet<StateId> {
        self.states
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.bases.is_disjoint(locs))
            .map(|(i, _)| i)
            .collect()
    }

    /// Same automaton with a different accepting set.
    pub fn with_accepting(&self, accepting: BTreeSet<StateId>) -> Self {
        FiniteAutomaton {
            accepting,
            ..self.clone()
        }
    }

    pub fn is_deterministic(&self) -> bool {
        if self.initial.len() > 1 {
            return false;
        }
        let mut seen = BTreeSet::new();
        self.edges
            .iter()
            .all(|e| !e.label.is_silent() && seen.insert((e.from, &e.label)))
    }
}

/// Least superset of `states` closed under silent edges.
pub fn epsilon_closure(fa: &FiniteAutomaton, states: &BTreeSet<StateId>) -> BTreeSet<StateId> {
    let mut closure = states.clone();
    let mut stack: Vec<StateId> = states.iter().copied().collect();
    while let Some(q) = stack.pop() {
        for e in fa.out_edges(q).filter(|e| e.label.is_silent()) {
            if closure.insert(e.to) {
                stack.push(e.to);
            }
        }
    }
    closure
}

/// States reachable from `states` by one `label` step followed by silent
/// steps.
pub fn step(fa: &FiniteAutomaton, states: &BTreeSet<StateId>, label: &Label) -> BTreeSet<StateId> {
    let moved: BTreeSet<StateId> = states
        .iter()
        .flat_map(|q| fa.out_edges(*q))
        .filter(|e| &e.label == label)
        .map(|e| e.to)
        .collect();
    epsilon_closure(fa, &moved)
}

/// Result of the subset construction. State `i` of `fa` stands for the subset
/// `subsets[i]`; state 0 is the initial subset.
#[derive(Clone, Debug)]
pub struct Dfa {
    pub fa: FiniteAutomaton,
    pub subsets: Vec<Vec<StateId>>,
}

impl Dfa {
    pub fn subset(&self, x: StateId) -> BTreeSet<StateId> {
        self.subsets[x].iter().copied().collect()
    }

    pub fn next(&self, x: StateId, label: &Label) -> Option<StateId> {
        self.fa
            .out_edges(x)
            .find(|e| &e.label == label)
            .map(|e| e.to)
    }

    /// Follows `word` from the initial state.
    pub fn run(&self, word: &[Label]) -> Option<StateId> {
        if self.fa.state_count() == 0 {
            return None;
        }
        word.iter().try_fold(0, |x, l| self.next(x, l))
    }
}

/// Subset construction over the ε-closed reachable subsets.
///
/// Subsets are discovered breadth-first with labels in sorted order, so the
/// state numbering follows the length-lexicographic order of the smallest word
/// reaching each subset. Empty subsets are not materialized.
pub fn determinize(fa: &FiniteAutomaton) -> Dfa {
    let alphabet: Vec<Label> = fa
        .alphabet
        .iter()
        .filter(|l| !l.is_silent())
        .cloned()
        .collect();
    let mut index: HashMap<Vec<StateId>, StateId> = HashMap::new();
    let mut subsets: Vec<Vec<StateId>> = Vec::new();
    let mut edges = Vec::new();
    let mut queue = VecDeque::new();

    let start = epsilon_closure(fa, &fa.initial);
    if !start.is_empty() {
        let key: Vec<StateId> = start.into_iter().collect();
        index.insert(key.clone(), 0);
        subsets.push(key);
        queue.push_back(0);
    }
    while let Some(x) = queue.pop_front() {
        let members: BTreeSet<StateId> = subsets[x].iter().copied().collect();
        // Group moves by label in one pass over the members' edges.
        let mut moves: BTreeMap<&Label, BTreeSet<StateId>> = BTreeMap::new();
        for e in members.iter().flat_map(|q| fa.out_edges(*q)) {
            if !e.label.is_silent() {
                moves.entry(&e.label).or_default().insert(e.to);
            }
        }
        for label in &alphabet {
            let Some(moved) = moves.get(label) else {
                continue;
            };
            let key: Vec<StateId> = epsilon_closure(fa, moved).into_iter().collect();
            let y = match index.get(&key) {
                Some(&y) => y,
                None => {
                    let y = subsets.len();
                    index.insert(key.clone(), y);
                    subsets.push(key);
                    queue.push_back(y);
                    y
                }
            };
            edges.push(Edge {
                from: x,
                label: label.clone(),
                to: y,
            });
        }
    }

    let states = subsets
        .iter()
        .map(|members| StateInfo {
            location: format!(
                "{{{}}}",
                members
                    .iter()
                    .map(|q| format!("({})", fa.states[*q].label().replace('|', ", ")))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
            region: None,
            bases: members
                .iter()
                .flat_map(|q| fa.states[*q].bases.iter().copied())
                .collect(),
        })
        .collect();
    let accepting = subsets
        .iter()
        .enumerate()
        .filter(|(_, m)| m.iter().any(|q| fa.accepting.contains(q)))
        .map(|(i, _)| i)
        .collect();
    let initial = if subsets.is_empty() {
        BTreeSet::new()
    } else {
        [0].into()
    };
    let dfa = FiniteAutomaton::new(
        alphabet.into_iter().collect(),
        states,
        initial,
        accepting,
        edges,
    );
    Dfa { fa: dfa, subsets }
}

/// Underlying user-model locations of the members of a subset, with phase tags
/// and region layers stripped.
pub fn project_locations(fa: &FiniteAutomaton, subset: &[StateId]) -> Result<BTreeSet<LocId>> {
    let mut locs = BTreeSet::new();
    for q in subset {
        let info = fa.states.get(*q).ok_or(Error::MissingMetadata(*q))?;
        if info.bases.is_empty() {
            return Err(Error::MissingMetadata(*q));
        }
        locs.extend(info.bases.iter().copied());
    }
    Ok(locs)
}

/// Deterministic Graphviz text. Accepting states are drawn as double circles;
/// states whose location projection meets `secret` are filled.
pub fn export_dot(fa: &FiniteAutomaton, secret: &BTreeSet<LocId>) -> String {
    let mut out = String::from("digraph fa {\n  rankdir=LR;\n  node [shape=ellipse];\n");
    for (i, s) in fa.states.iter().enumerate() {
        let mut attrs = vec![format!("label=\"{}\"", escape(&s.label()))];
        if fa.accepting.contains(&i) {
            attrs.push("shape=doublecircle".into());
        }
        if !s.bases.is_disjoint(secret) {
            attrs.push("style=filled".into());
            attrs.push("fillcolor=gray80".into());
        }
        out.push_str(&format!("  q{} [{}];\n", i, attrs.join(", ")));
    }
    for q in &fa.initial {
        out.push_str(&format!(
            "  start{q} [shape=point, style=invis];\n  start{q} -> q{q};\n"
        ));
    }
    for e in &fa.edges {
        out.push_str(&format!(
            "  q{} -> q{} [label=\"{}\"];\n",
            e.from,
            e.to,
            escape(&e.label.to_string())
        ));
    }
    out.push_str("}\n");
    out
}
