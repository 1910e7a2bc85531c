//! Brute-force checkers for cross-validation at small scale.
//!
//! Nothing here reuses the closure, subset-construction or shifting code of the
//! main pipeline. Paths are enumerated explicitly as `(state, word)` pairs.

mod language;
mod random;
mod runs;

use std::collections::BTreeSet;

pub use language::{bounded_language, BoundedLanguage};
pub use random::{random_irta, random_spec, random_ta, random_word};
pub use runs::{random_timed_run, TimedRun};

use crate::constructions::{augment, build_ctr, build_integral_automaton};
use crate::error::Result;
use crate::fa::{FiniteAutomaton, StateId};
use crate::model::{Label, LocId, OpacitySpec, TimedAutomaton};
use crate::regions::build_region_automaton;
use crate::word::{Rational, TimedEvent, TimedWord};

/// Default enumeration depth.
pub const DEFAULT_DEPTH: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Phase words of the augmented region automaton; integer-reset models only.
    CltoIrta,
    /// ✓-words of the integral automaton of the (unreduced) closed timed region
    /// automaton.
    CltoIdtp,
}

fn states_at(fa: &FiniteAutomaton, locs: &BTreeSet<LocId>) -> BTreeSet<StateId> {
    (0..fa.state_count())
        .filter(|q| fa.states[*q].bases.iter().any(|b| locs.contains(b)))
        .collect()
}

/// The automaton whose observations the refuter enumerates.
pub fn observation_nfa(
    model: &TimedAutomaton,
    spec: &OpacitySpec,
    mode: Mode,
) -> Result<FiniteAutomaton> {
    model.ensure_valid()?;
    spec.validate_against(model)?;
    let hidden = model.hide_unobservable(spec)?;
    Ok(match mode {
        Mode::CltoIrta => {
            model.ensure_integer_resets()?;
            build_region_automaton(&augment(&hidden)?.ta).fa
        }
        Mode::CltoIdtp => build_integral_automaton(&build_ctr(&hidden).ta).fa,
    })
}

/// Shortest observation of length at most `k` that leads to a secret location
/// but to no non-secret location, if any.
///
/// A returned word refutes opacity. `None` says nothing beyond depth `k`.
pub fn bounded_opacity_refute(
    model: &TimedAutomaton,
    spec: &OpacitySpec,
    mode: Mode,
    k: usize,
) -> Result<Option<Vec<Label>>> {
    let nfa = observation_nfa(model, spec, mode)?;
    Ok(refute_in(&nfa, spec, k))
}

/// Phase-word refutation without the integer-reset precondition.
///
/// The augmented region automaton is built for any timed automaton; this is
/// used to exhibit observations of non-integer-reset models that only a
/// continuous-time observer can tell apart.
pub fn refute_phase_words(
    model: &TimedAutomaton,
    spec: &OpacitySpec,
    k: usize,
) -> Result<Option<Vec<Label>>> {
    model.ensure_valid()?;
    spec.validate_against(model)?;
    let hidden = model.hide_unobservable(spec)?;
    let nfa = build_region_automaton(&augment(&hidden)?.ta).fa;
    Ok(refute_in(&nfa, spec, k))
}

/// Words in `L(secret) \ L(nonsecret)` up to length `k`, least first.
pub fn refute_in(nfa: &FiniteAutomaton, spec: &OpacitySpec, k: usize) -> Option<Vec<Label>> {
    let secret = bounded_language(nfa, &nfa.initial, &states_at(nfa, &spec.secret), k);
    let nonsecret = bounded_language(nfa, &nfa.initial, &states_at(nfa, &spec.nonsecret), k);
    secret
        .words
        .difference(&nonsecret.words)
        .min_by(|a, b| (a.len(), *a).cmp(&(b.len(), *b)))
        .cloned()
}

/// States reached by `word` from the initial states, by explicit path
/// enumeration.
pub fn replay(nfa: &FiniteAutomaton, word: &[Label]) -> BTreeSet<StateId> {
    let silent_closure = |mut set: BTreeSet<StateId>| {
        let mut frontier: Vec<StateId> = set.iter().copied().collect();
        while let Some(q) = frontier.pop() {
            for e in nfa.out_edges(q).filter(|e| e.label.is_silent()) {
                if set.insert(e.to) {
                    frontier.push(e.to);
                }
            }
        }
        set
    };
    let mut current = silent_closure(nfa.initial.clone());
    for l in word {
        let moved = nfa
            .edges()
            .iter()
            .filter(|e| current.contains(&e.from) && &e.label == l)
            .map(|e| e.to)
            .collect();
        current = silent_closure(moved);
    }
    current
}

/// Whether replaying `word` reaches a secret location and no non-secret one.
pub fn witness_replays(nfa: &FiniteAutomaton, spec: &OpacitySpec, word: &[Label]) -> bool {
    let reached = replay(nfa, word);
    let locs: BTreeSet<LocId> = reached
        .iter()
        .flat_map(|q| nfa.states[*q].bases.iter().copied())
        .collect();
    locs.iter().any(|l| spec.secret.contains(l)) && !locs.iter().any(|l| spec.nonsecret.contains(l))
}

/// Integer shifts of `word` for λ on the grid `0, step, 2·step, … < 1`.
pub fn digitize_grid(word: &TimedWord, step: Rational) -> BTreeSet<TimedWord> {
    assert!(
        step > Rational::from(0) && step < Rational::from(1),
        "grid step must lie in (0,1)"
    );
    let mut out = BTreeSet::new();
    let mut lambda = Rational::from(0);
    while lambda < Rational::from(1) {
        let events = word
            .events
            .iter()
            .map(|e| {
                let floor = e.time.floor();
                let time = if e.time - floor <= lambda {
                    floor
                } else {
                    floor + 1
                };
                TimedEvent {
                    symbol: e.symbol.clone(),
                    time,
                }
            })
            .collect();
        out.insert(TimedWord { events });
        lambda += step;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn grid_examples() {
        let half = TimedWord::parse("(a,0.5)").unwrap();
        assert_eq!(
            digitize_grid(&half, r(1, 4)),
            [
                TimedWord::parse("(a,0)").unwrap(),
                TimedWord::parse("(a,1)").unwrap()
            ]
            .into()
        );
        let int = TimedWord::parse("(a,2)(b,3)").unwrap();
        assert_eq!(digitize_grid(&int, r(1, 10)).len(), 1);
        let two = TimedWord::parse("(a,0.3)(b,0.7)").unwrap();
        assert_eq!(digitize_grid(&two, r(1, 100)).len(), 3);
    }
}
