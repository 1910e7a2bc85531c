//! Cross-checks of the constructions against concrete semantics on random
//! models.

mod common;

use std::collections::{BTreeSet, VecDeque};

use common::rng;
use proptest::prelude::*;
use ta_opacity::constructions::{
    augment, build_ctr, build_integral_automaton, decode_phase_word, tick_decode, tick_encode, Ctr,
};
use ta_opacity::model::{Label, LocId};
use ta_opacity::opacity::{idtp_pipeline, irta_pipeline, verify_clto_idtp, verify_clto_irta};
use ta_opacity::oracle::{
    bounded_language, random_irta, random_spec, random_ta, random_timed_run, replay,
    witness_replays,
};
use ta_opacity::reduce::{backward_simulation, forward_simulation, reduce_ctr, SimulationRelation};
use ta_opacity::regions::build_region_automaton;
use ta_opacity::{OpacitySpec, Rational, TimedAutomaton};

fn model(seed: u64, irta: bool) -> (TimedAutomaton, OpacitySpec) {
    let mut r = rng(seed);
    let m = if irta {
        random_irta(&mut r)
    } else {
        random_ta(&mut r)
    };
    let s = random_spec(&mut r, &m);
    (m, s)
}

/// Delays after which the valuation sits on each integer crossing up to κ+1
/// and strictly between consecutive crossings. Every region on the
/// time-successor path of `v` is hit by one of them.
fn region_delays(v: &[Rational], kappa: &[u32]) -> Vec<Rational> {
    let mut points = BTreeSet::from([Rational::from(0)]);
    for (x, k) in v.iter().zip(kappa) {
        let mut n = x.ceil();
        while n <= Rational::from(*k as i64 + 1) {
            points.insert(n - x);
            n += 1;
        }
    }
    let points: Vec<Rational> = points.into_iter().collect();
    let mut out = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let next = points.get(i + 1).copied().unwrap_or(*p + 2);
        out.push(*p);
        out.push((*p + next) / 2);
    }
    out
}

/// Whether some concrete run of `ta` reads exactly `labels` (silent steps
/// included as labels).
fn realizable(
    ta: &TimedAutomaton,
    at: LocId,
    v: &[Rational],
    labels: &[Label],
    kappa: &[u32],
) -> bool {
    let Some((first, rest)) = labels.split_first() else {
        return true;
    };
    for d in region_delays(v, kappa) {
        let shifted: Vec<Rational> = v.iter().map(|x| *x + d).collect();
        for (_, t) in ta.outgoing(at) {
            if &t.label != first
                || !t.guard.atoms.iter().all(|a| {
                    a.op.holds(shifted[a.clock.0], Rational::from(a.bound as i64))
                })
            {
                continue;
            }
            let next: Vec<Rational> = shifted
                .iter()
                .enumerate()
                .map(|(c, x)| {
                    if t.resets.iter().any(|r| r.0 == c) {
                        Rational::from(0)
                    } else {
                        *x
                    }
                })
                .collect();
            if realizable(ta, t.target, &next, rest, kappa) {
                return true;
            }
        }
    }
    false
}

/// Greatest relation over same-location CTR states closed under matching
/// moves, computed by naive refinement. Also returns the pair count after each
/// round.
fn naive_simulation(ctr: &Ctr, backward: bool) -> (BTreeSet<(LocId, LocId)>, Vec<usize>) {
    let ta = &ctr.ta;
    let moves: Vec<(LocId, LocId, usize)> = ta
        .transitions
        .iter()
        .enumerate()
        .map(|(i, t)| {
            if backward {
                (t.target, t.source, i)
            } else {
                (t.source, t.target, i)
            }
        })
        .collect();
    let same = |i: usize, j: usize| {
        let (a, b) = (&ta.transitions[i], &ta.transitions[j]);
        a.label == b.label && a.guard == b.guard && a.resets == b.resets
    };
    let mut rel: BTreeSet<(LocId, LocId)> = BTreeSet::new();
    for q2 in ta.location_ids() {
        for q1 in ta.location_ids() {
            let initial_ok = !backward || !ta.initial.contains(&q2) || ta.initial.contains(&q1);
            if ctr.location_of(q2) == ctr.location_of(q1) && initial_ok {
                rel.insert((q2, q1));
            }
        }
    }
    let mut sizes = vec![rel.len()];
    loop {
        let keep: BTreeSet<(LocId, LocId)> = rel
            .iter()
            .copied()
            .filter(|(q2, q1)| {
                moves.iter().filter(|m| m.0 == *q2).all(|(_, n2, i)| {
                    moves
                        .iter()
                        .any(|(s, n1, j)| s == q1 && same(*i, *j) && rel.contains(&(*n2, *n1)))
                })
            })
            .collect();
        if keep == rel {
            return (rel, sizes);
        }
        rel = keep;
        sizes.push(rel.len());
    }
}

fn pairs(r: &SimulationRelation) -> BTreeSet<(LocId, LocId)> {
    r.pairs().collect()
}

fn reachable(ta: &TimedAutomaton) -> BTreeSet<LocId> {
    let mut seen: BTreeSet<LocId> = ta.initial.clone();
    let mut queue: VecDeque<LocId> = seen.iter().copied().collect();
    while let Some(l) = queue.pop_front() {
        for (_, t) in ta.outgoing(l) {
            if seen.insert(t.target) {
                queue.push_back(t.target);
            }
        }
    }
    seen
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sampled_runs_are_region_paths(seed in any::<u64>(), run_seed in any::<u64>()) {
        let (m, _) = model(seed, seed % 3 == 0);
        let ra = build_region_automaton(&m);
        let run = random_timed_run(&m, 6, run_seed);
        let labels: Vec<Label> = run.transitions.iter().map(|i| m.transitions[*i].label.clone()).collect();
        let reached = replay(&ra.fa, &labels);
        prop_assert!(reached.iter().any(|q| ra.states[*q].0 == run.location));
    }

    #[test]
    fn region_words_have_concrete_runs(seed in any::<u64>()) {
        let (m, _) = model(seed, false);
        let ra = build_region_automaton(&m);
        let all: BTreeSet<usize> = (0..ra.fa.state_count()).collect();
        let kappa = m.kappa();
        let zero = vec![Rational::from(0); m.clocks.len()];
        for w in &bounded_language(&ra.fa, &ra.fa.initial, &all, 3).words {
            let ok = m.initial.iter().any(|l| realizable(&m, *l, &zero, w, &kappa));
            prop_assert!(ok, "no run reads {:?}", w);
        }
    }

    #[test]
    fn tick_words_round_trip(seed in any::<u64>()) {
        let (m, _) = model(seed, false);
        let ia = build_integral_automaton(&build_ctr(&m).ta);
        let all: BTreeSet<usize> = (0..ia.fa.state_count()).collect();
        for w in &bounded_language(&ia.fa, &ia.fa.initial, &all, 6).words {
            let timed = tick_decode(w).unwrap();
            prop_assert!(timed.is_integral() && timed.is_well_formed());
            let back = tick_encode(&timed).unwrap();
            let trailing = w.iter().rev().take_while(|l| **l == Label::Tick).count();
            prop_assert_eq!(&back[..], &w[..w.len() - trailing]);
            prop_assert_eq!(tick_decode(&back).unwrap(), timed);
        }
    }

    #[test]
    fn augmented_words_alternate_phases(seed in any::<u64>()) {
        let (m, s) = model(seed, true);
        let aug = augment(&m.hide_unobservable(&s).unwrap()).unwrap();
        let ra = build_region_automaton(&aug.ta);
        let all: BTreeSet<usize> = (0..ra.fa.state_count()).collect();
        for w in &bounded_language(&ra.fa, &ra.fa.initial, &all, 6).words {
            prop_assert!(decode_phase_word(w).is_some(), "{:?}", w);
        }
        for q in 0..ra.fa.state_count() {
            for e in ra.fa.out_edges(q) {
                let (from, to) = (ra.states[e.from].0 .0 % 2, ra.states[e.to].0 .0 % 2);
                match e.label {
                    Label::Delta => prop_assert_eq!((from, to), (0, 1)),
                    Label::Tick => prop_assert_eq!((from, to), (1, 0)),
                    _ => prop_assert_eq!(from, to),
                }
            }
        }
    }

    #[test]
    fn ctr_keeps_reachable_locations(seed in any::<u64>()) {
        let (m, s) = model(seed, false);
        let hidden = m.hide_unobservable(&s).unwrap();
        let ra = build_region_automaton(&hidden);
        let want: BTreeSet<LocId> = ra.states.iter().map(|(l, _)| *l).collect();
        let ctr = build_ctr(&hidden);
        let got: BTreeSet<LocId> = reachable(&ctr.ta).into_iter().map(|q| ctr.location_of(q)).collect();
        prop_assert_eq!(&got, &want);
        prop_assert_eq!(reachable(&ctr.ta).len(), ctr.ta.locations.len());
    }

    #[test]
    fn simulations_are_greatest_fixpoints(seed in any::<u64>()) {
        let (m, s) = model(seed, false);
        let ctr = build_ctr(&m.hide_unobservable(&s).unwrap());
        for (backward, computed) in [(false, forward_simulation(&ctr)), (true, backward_simulation(&ctr))] {
            let (naive, sizes) = naive_simulation(&ctr, backward);
            prop_assert_eq!(pairs(&computed), naive);
            prop_assert!(sizes.windows(2).all(|w| w[1] < w[0]));
            prop_assert!(sizes.len() <= sizes[0] + 1);
        }
    }

    #[test]
    fn removed_states_have_surviving_simulators(seed in any::<u64>()) {
        let (m, s) = model(seed, false);
        let ctr = build_ctr(&m.hide_unobservable(&s).unwrap());
        let f = forward_simulation(&ctr);
        let b = backward_simulation(&ctr);
        let red = reduce_ctr(&ctr);
        let removed: BTreeSet<LocId> = red.removed.iter().map(|(q, _)| *q).collect();
        for (q2, q1) in &red.removed {
            prop_assert!(!ctr.ta.initial.contains(q2));
            prop_assert!(!removed.contains(q1));
            prop_assert!(q2 != q1);
            prop_assert_eq!(ctr.location_of(*q2), ctr.location_of(*q1));
            prop_assert!(f.contains(*q2, *q1) && b.contains(*q2, *q1));
        }
        let kept: BTreeSet<&str> = red.ctr.ta.locations.iter().map(|l| l.name.as_str()).collect();
        for q in &ctr.ta.initial {
            prop_assert!(kept.contains(ctr.ta.location_name(*q)));
        }
        for q in &removed {
            prop_assert!(!kept.contains(ctr.ta.location_name(*q)));
        }
    }

    #[test]
    fn witnesses_replay(seed in any::<u64>(), irta in any::<bool>()) {
        let (m, s) = model(seed, irta);
        let (verdict, nfa, dfa) = if irta {
            let p = irta_pipeline(&m, &s).unwrap();
            (verify_clto_irta(&m, &s).unwrap(), p.regions.fa, p.dfa)
        } else {
            let p = idtp_pipeline(&m, &s).unwrap();
            (verify_clto_idtp(&m, &s).unwrap(), p.integral.fa, p.dfa)
        };
        prop_assert_eq!(verdict.opaque, verdict.witness.is_none());
        if let Some(w) = verdict.witness {
            prop_assert!(witness_replays(&nfa, &s, &w.observation));
            prop_assert_eq!(dfa.run(&w.observation), Some(w.dfa_state));
            prop_assert!(!w.locations.is_disjoint(&s.secret));
            prop_assert!(w.locations.is_disjoint(&s.nonsecret));
            let n = w.observation.len();
            let to = BTreeSet::from([w.dfa_state]);
            let lang = bounded_language(&dfa.fa, &dfa.fa.initial, &to, n);
            let first = lang.words.iter().min_by(|a, b| (a.len(), *a).cmp(&(b.len(), *b)));
            prop_assert_eq!(first, Some(&w.observation));
        }
    }

    #[test]
    fn more_nonsecret_locations_keep_opacity(seed in any::<u64>(), irta in any::<bool>(), extra in any::<prop::sample::Index>()) {
        let (m, s) = model(seed, irta);
        let verify = if irta { verify_clto_irta } else { verify_clto_idtp };
        let before = verify(&m, &s).unwrap().opaque;
        let mut bigger = s.clone();
        bigger.nonsecret.insert(LocId(extra.index(m.locations.len())));
        let after = verify(&m, &bigger).unwrap().opaque;
        prop_assert!(!before || after);
    }
}
