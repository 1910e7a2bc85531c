use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{CmpOp, Guard, LocId, TimedAutomaton};
use crate::word::{Rational, TimedEvent, TimedWord};

/// A concrete run: the timed word it reads and where it ends.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimedRun {
    pub word: TimedWord,
    pub location: LocId,
    /// Indices of the transitions taken.
    pub transitions: Vec<usize>,
}

fn holds(guard: &Guard, v: &[Rational]) -> bool {
    guard.atoms.iter().all(|a| {
        let x = v[a.clock.0];
        let k = Rational::from(a.bound as i64);
        match a.op {
            CmpOp::Lt => x < k,
            CmpOp::Le => x <= k,
            CmpOp::Eq => x == k,
            CmpOp::Ge => x >= k,
            CmpOp::Gt => x > k,
        }
    })
}

/// One delay from every stretch of time during which no clock crosses an
/// integer up to its maximal constant plus one: each crossing point itself and
/// a random point strictly between consecutive crossings.
fn candidate_delays(v: &[Rational], kappa: &[u32], rng: &mut ChaCha8Rng) -> Vec<Rational> {
    let mut crossings: BTreeSet<Rational> = BTreeSet::new();
    crossings.insert(Rational::from(0));
    for (x, k) in v.iter().zip(kappa) {
        let mut n = x.ceil();
        while n <= Rational::from(*k as i64 + 1) {
            crossings.insert(n - x);
            n += 1;
        }
    }
    let points: Vec<Rational> = crossings.into_iter().collect();
    let mut out = Vec::new();
    for (i, p) in points.iter().enumerate() {
        out.push(*p);
        let next = points.get(i + 1).copied().unwrap_or(*p + 1);
        let den = rng.gen_range(2..=7i64);
        let num = rng.gen_range(1..den);
        out.push(*p + (next - p) * Rational::new(num, den));
    }
    out
}

/// Samples a run of at most `max_steps` discrete steps. Delays are drawn so
/// that every region on the time-successor path is a possible stopping point.
/// Stops early when no transition can fire after any delay.
pub fn random_timed_run(model: &TimedAutomaton, max_steps: usize, seed: u64) -> TimedRun {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kappa = model.kappa();
    let initial: Vec<LocId> = model.initial.iter().copied().collect();
    let mut location = *initial.choose(&mut rng).expect("no initial location");
    let mut v = vec![Rational::from(0); model.clocks.len()];
    let mut now = Rational::from(0);
    let mut events = Vec::new();
    let mut taken = Vec::new();

    for _ in 0..max_steps {
        let options: Vec<(Rational, Vec<usize>)> = candidate_delays(&v, &kappa, &mut rng)
            .into_iter()
            .map(|d| {
                let shifted: Vec<Rational> = v.iter().map(|x| *x + d).collect();
                let enabled = model
                    .transitions
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| t.source == location && holds(&t.guard, &shifted))
                    .map(|(i, _)| i)
                    .collect();
                (d, enabled)
            })
            .filter(|(_, e): &(Rational, Vec<usize>)| !e.is_empty())
            .collect();
        let Some((d, enabled)) = options.choose(&mut rng) else {
            break;
        };
        let ti = *enabled.choose(&mut rng).unwrap();
        let t = &model.transitions[ti];
        now += d;
        for (c, x) in v.iter_mut().enumerate() {
            *x = if t.resets.iter().any(|r| r.0 == c) {
                Rational::from(0)
            } else {
                *x + d
            };
        }
        if !t.label.is_silent() {
            events.push(TimedEvent {
                symbol: t.label.to_string(),
                time: now,
            });
        }
        taken.push(ti);
        location = t.target;
    }
    TimedRun {
        word: TimedWord { events },
        location,
        transitions: taken,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Atom, ClockId, Label, Transition};

    fn one_loop() -> TimedAutomaton {
        let mut ta = TimedAutomaton::with_locations(["l"]);
        ta.initial.insert(LocId(0));
        ta.clocks.push("x".into());
        ta.alphabet.insert(Label::event("a"));
        ta.transitions.push(Transition {
            source: LocId(0),
            label: Label::event("a"),
            guard: Guard::new(vec![Atom::new(ClockId(0), CmpOp::Eq, 1)]),
            resets: [ClockId(0)].into(),
            target: LocId(0),
        });
        ta
    }

    #[test]
    fn zero_steps_is_empty() {
        let run = random_timed_run(&one_loop(), 0, 7);
        assert!(run.word.is_empty());
        assert_eq!(run.location, LocId(0));
    }

    #[test]
    fn equality_guards_are_hit_exactly() {
        let run = random_timed_run(&one_loop(), 4, 1);
        let times: Vec<i64> = run
            .word
            .events
            .iter()
            .map(|e| e.time.to_integer())
            .collect();
        assert_eq!(times, vec![1, 2, 3, 4]);
        assert!(run.word.is_integral());
    }

    #[test]
    fn reproducible() {
        let ta = one_loop();
        assert_eq!(random_timed_run(&ta, 5, 3), random_timed_run(&ta, 5, 3));
    }
}
