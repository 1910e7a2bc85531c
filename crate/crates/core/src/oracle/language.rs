use std::collections::{BTreeSet, HashSet, VecDeque};

use crate::fa::{FiniteAutomaton, StateId};
use crate::model::Label;

/// All words of length at most `depth` labelling a path between two state
/// sets. Silent edges contribute no letter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundedLanguage {
    pub words: BTreeSet<Vec<Label>>,
    pub depth: usize,
}

impl BoundedLanguage {
    pub fn contains(&self, word: &[Label]) -> bool {
        self.words.contains(word)
    }

    /// Number of words of each length `0..=depth`.
    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.depth + 1];
        for w in &self.words {
            c[w.len()] += 1;
        }
        c
    }
}

pub fn bounded_language(
    fa: &FiniteAutomaton,
    from: &BTreeSet<StateId>,
    to: &BTreeSet<StateId>,
    k: usize,
) -> BoundedLanguage {
    let mut seen: HashSet<(StateId, Vec<Label>)> = HashSet::new();
    let mut queue: VecDeque<(StateId, Vec<Label>)> = VecDeque::new();
    for q in from {
        if seen.insert((*q, Vec::new())) {
            queue.push_back((*q, Vec::new()));
        }
    }
    let mut words = BTreeSet::new();
    while let Some((q, w)) = queue.pop_front() {
        if to.contains(&q) {
            words.insert(w.clone());
        }
        for e in fa.out_edges(q) {
            let next = if e.label.is_silent() {
                w.clone()
            } else if w.len() < k {
                let mut n = w.clone();
                n.push(e.label.clone());
                n
            } else {
                continue;
            };
            if seen.insert((e.to, next.clone())) {
                queue.push_back((e.to, next));
            }
        }
    }
    BoundedLanguage { words, depth: k }
}
