//! Small random models for the property suites: at most 4 locations, 2 clocks
//! and constants up to 2.

use std::collections::BTreeSet;

use rand::Rng;

use crate::model::{
    Atom, ClockId, CmpOp, Guard, Label, LocId, OpacitySpec, TimedAutomaton, Transition,
};
use crate::word::{Rational, TimedEvent, TimedWord};

const EVENTS: [&str; 3] = ["a", "b", "u"];
const OPS: [CmpOp; 5] = [CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ge, CmpOp::Gt];

fn random_model<R: Rng>(rng: &mut R, integer_resets: bool) -> TimedAutomaton {
    let nloc = rng.gen_range(1..=4);
    let mut ta = TimedAutomaton::with_locations((0..nloc).map(|i| format!("l{i}")));
    ta.initial.insert(LocId(0));
    ta.accepting = ta.location_ids().collect();
    let nclocks = rng.gen_range(0..=2);
    ta.clocks = ["x", "y"][..nclocks]
        .iter()
        .map(|s| s.to_string())
        .collect();
    ta.alphabet = EVENTS.iter().map(|e| Label::event(*e)).collect();

    let ntrans = rng.gen_range(1..=6);
    for _ in 0..ntrans {
        let mut atoms = Vec::new();
        let mut resets = BTreeSet::new();
        if nclocks > 0 {
            for _ in 0..rng.gen_range(0..=2) {
                atoms.push(Atom::new(
                    ClockId(rng.gen_range(0..nclocks)),
                    OPS[rng.gen_range(0..OPS.len())],
                    rng.gen_range(0..=2),
                ));
            }
            for c in 0..nclocks {
                if rng.gen_bool(0.3) {
                    resets.insert(ClockId(c));
                }
            }
        }
        if integer_resets && !resets.is_empty() && !atoms.iter().any(|a| a.op == CmpOp::Eq) {
            atoms.push(Atom::new(
                ClockId(rng.gen_range(0..nclocks)),
                CmpOp::Eq,
                rng.gen_range(0..=2),
            ));
        }
        ta.transitions.push(Transition {
            source: LocId(rng.gen_range(0..nloc)),
            label: Label::event(EVENTS[rng.gen_range(0..EVENTS.len())]),
            guard: Guard::new(atoms),
            resets,
            target: LocId(rng.gen_range(0..nloc)),
        });
    }
    ta
}

/// A random automaton in which every resetting transition carries an equality.
pub fn random_irta<R: Rng>(rng: &mut R) -> TimedAutomaton {
    random_model(rng, true)
}

pub fn random_ta<R: Rng>(rng: &mut R) -> TimedAutomaton {
    random_model(rng, false)
}

/// Random observable events and random, possibly overlapping, secret and
/// non-secret location sets.
pub fn random_spec<R: Rng>(rng: &mut R, model: &TimedAutomaton) -> OpacitySpec {
    let observable = model
        .alphabet
        .iter()
        .filter_map(|l| match l {
            Label::Event(name) => Some(name.clone()),
            _ => None,
        })
        .filter(|_| rng.gen_bool(0.7))
        .collect();
    let mut pick =
        || -> BTreeSet<LocId> { model.location_ids().filter(|_| rng.gen_bool(0.4)).collect() };
    let secret = pick();
    let nonsecret = pick();
    OpacitySpec {
        observable,
        secret,
        nonsecret,
    }
}

/// A timed word of length at most `max_len` with timestamps `n/d`, `d ≤ 10`,
/// below 4.
pub fn random_word<R: Rng>(rng: &mut R, max_len: usize) -> TimedWord {
    let len = rng.gen_range(0..=max_len);
    let mut times: Vec<Rational> = (0..len)
        .map(|_| {
            let d = rng.gen_range(1..=10i64);
            Rational::new(rng.gen_range(0..4 * d), d)
        })
        .collect();
    times.sort();
    TimedWord {
        events: times
            .into_iter()
            .map(|time| TimedEvent {
                symbol: EVENTS[rng.gen_range(0..2)].to_string(),
                time,
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_models_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let irta = random_irta(&mut rng);
            assert!(irta.validate().is_empty());
            assert!(irta.check_integer_resets());
            assert!(irta.kappa().iter().all(|k| *k <= 2));
            let ta = random_ta(&mut rng);
            assert!(ta.validate().is_empty());
            let spec = random_spec(&mut rng, &ta);
            spec.validate_against(&ta).unwrap();
        }
    }

    #[test]
    fn generated_words_are_well_formed() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            assert!(random_word(&mut rng, 6).is_well_formed());
        }
    }
}
