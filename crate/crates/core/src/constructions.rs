//! Discrete constructions on timed automata: the phase-augmented automaton, the
//! integral (tick) automaton and the closed timed region automaton.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fa::{Edge, FiniteAutomaton, StateInfo};
use crate::model::{
    Atom, ClockId, CmpOp, Guard, Label, LocId, Location, TimedAutomaton, Transition,
};
use crate::regions::{build_region_automaton, IntegerRegion, Region};
use crate::word::{Rational, TimedEvent, TimedWord};

/// Name of the fresh clock added by [`augment`].
pub const PHASE_CLOCK: &str = "~c~";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Phase {
    /// Global time is an integer.
    Integral,
    /// Global time has a non-zero fractional part.
    Fractional,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Integral => "0",
            Phase::Fractional => "+",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PhasedLocation {
    pub base: LocId,
    pub phase: Phase,
}

/// Output of [`augment`]. Location `2l` is `l^0` and `2l+1` is `l^+`.
#[derive(Clone, Debug)]
pub struct Augmented {
    pub ta: TimedAutomaton,
    pub phased: Vec<PhasedLocation>,
    pub phase_clock: ClockId,
}

/// Splits every location into an integral and a fractional phase and adds a
/// fresh clock tracking global time modulo one.
///
/// The transitions are exactly:
/// * `(l1^0, σ, φ ∧ c=0, r, l2^0)` for every `(l1, σ, φ, r, l2)`,
/// * `(l1^+, σ, φ ∧ 0<c<1, r, l2^+)` for every `(l1, σ, φ, r, l2)`,
/// * `(l^0, δ, 0<c<1, ∅, l^+)` for every `l`,
/// * `(l^+, ✓, c=1, {c}, l^0)` for every `l`.
pub fn augment(ta: &TimedAutomaton) -> Result<Augmented> {
    if ta.find_clock(PHASE_CLOCK).is_some() {
        return Err(Error::ReservedClock(PHASE_CLOCK.into()));
    }
    let n = ta.locations.len();
    let phase_clock = ClockId(ta.clocks.len());
    let mut clocks = ta.clocks.clone();
    clocks.push(PHASE_CLOCK.into());

    let at = |l: LocId, p: Phase| {
        LocId(
            2 * l.0
                + match p {
                    Phase::Integral => 0,
                    Phase::Fractional => 1,
                },
        )
    };
    let mut locations = Vec::with_capacity(2 * n);
    let mut phased = Vec::with_capacity(2 * n);
    for (i, l) in ta.locations.iter().enumerate() {
        for p in [Phase::Integral, Phase::Fractional] {
            locations.push(Location {
                name: format!("{}^{}", l.name, p),
                base: l.base,
            });
            phased.push(PhasedLocation {
                base: LocId(i),
                phase: p,
            });
        }
    }

    let c_zero = Atom::new(phase_clock, CmpOp::Eq, 0);
    let c_pos = Atom::new(phase_clock, CmpOp::Gt, 0);
    let c_lt1 = Atom::new(phase_clock, CmpOp::Lt, 1);
    let c_one = Atom::new(phase_clock, CmpOp::Eq, 1);

    let mut transitions = Vec::with_capacity(2 * ta.transitions.len() + 2 * n);
    for t in &ta.transitions {
        transitions.push(Transition {
            source: at(t.source, Phase::Integral),
            guard: t.guard.clone().and(c_zero),
            target: at(t.target, Phase::Integral),
            ..t.clone()
        });
    }
    for t in &ta.transitions {
        transitions.push(Transition {
            source: at(t.source, Phase::Fractional),
            guard: t.guard.clone().and(c_pos).and(c_lt1),
            target: at(t.target, Phase::Fractional),
            ..t.clone()
        });
    }
    for l in ta.location_ids() {
        transitions.push(Transition {
            source: at(l, Phase::Integral),
            label: Label::Delta,
            guard: Guard::new(vec![c_pos, c_lt1]),
            resets: BTreeSet::new(),
            target: at(l, Phase::Fractional),
        });
    }
    for l in ta.location_ids() {
        transitions.push(Transition {
            source: at(l, Phase::Fractional),
            label: Label::Tick,
            guard: Guard::new(vec![c_one]),
            resets: [phase_clock].into(),
            target: at(l, Phase::Integral),
        });
    }

    let mut alphabet = ta.alphabet.clone();
    alphabet.insert(Label::Delta);
    alphabet.insert(Label::Tick);
    let initial = ta.initial.iter().map(|l| at(*l, Phase::Integral)).collect();
    let accepting = ta
        .accepting
        .iter()
        .flat_map(|l| [at(*l, Phase::Integral), at(*l, Phase::Fractional)])
        .collect();
    Ok(Augmented {
        ta: TimedAutomaton {
            alphabet,
            locations,
            initial,
            accepting,
            clocks,
            transitions,
        },
        phased,
        phase_clock,
    })
}

/// The integral automaton: discrete-time behaviour over `Σ ∪ {✓}`.
#[derive(Clone, Debug)]
pub struct IntegralAutomaton {
    pub fa: FiniteAutomaton,
    pub states: Vec<(LocId, IntegerRegion)>,
    pub kappa: Vec<u32>,
}

/// Reachable part of `L × IReg`. Action steps fire when the integer region
/// satisfies the guard; tick steps add one time unit to every clock, clipped at
/// κ(c)+1.
pub fn build_integral_automaton(ta: &TimedAutomaton) -> IntegralAutomaton {
    let kappa = ta.kappa();
    let mut index: HashMap<(LocId, IntegerRegion), usize> = HashMap::new();
    let mut states: Vec<(LocId, IntegerRegion)> = Vec::new();
    let mut queue = VecDeque::new();
    let mut raw = Vec::new();

    let intern = |key: (LocId, IntegerRegion),
                  index: &mut HashMap<(LocId, IntegerRegion), usize>,
                  states: &mut Vec<(LocId, IntegerRegion)>,
                  queue: &mut VecDeque<usize>| {
        *index.entry(key.clone()).or_insert_with(|| {
            states.push(key);
            queue.push_back(states.len() - 1);
            states.len() - 1
        })
    };

    let zero = IntegerRegion::zero(ta.clocks.len());
    for l in &ta.initial {
        intern((*l, zero.clone()), &mut index, &mut states, &mut queue);
    }
    while let Some(s) = queue.pop_front() {
        let (loc, region) = states[s].clone();
        for (_, t) in ta.outgoing(loc) {
            if region.satisfies(&t.guard) {
                let to = intern(
                    (t.target, region.reset(&t.resets)),
                    &mut index,
                    &mut states,
                    &mut queue,
                );
                raw.push((s, t.label.clone(), to));
            }
        }
        let to = intern(
            (loc, region.tick(&kappa)),
            &mut index,
            &mut states,
            &mut queue,
        );
        raw.push((s, Label::Tick, to));
    }

    let mut order: Vec<usize> = (0..states.len()).collect();
    order.sort_by(|a, b| states[*a].cmp(&states[*b]));
    let mut rank = vec![0; states.len()];
    for (new, old) in order.iter().enumerate() {
        rank[*old] = new;
    }
    let sorted: Vec<(LocId, IntegerRegion)> = order.iter().map(|o| states[*o].clone()).collect();
    let edges = raw
        .into_iter()
        .map(|(from, label, to)| Edge {
            from: rank[from],
            label,
            to: rank[to],
        })
        .collect();
    let infos = sorted
        .iter()
        .map(|(l, r)| StateInfo {
            location: ta.location_name(*l).to_string(),
            region: Some(r.describe(&ta.clocks, &kappa)),
            bases: [ta.locations[l.0].base].into(),
        })
        .collect();
    let initial = sorted
        .iter()
        .enumerate()
        .filter(|(_, (l, r))| ta.initial.contains(l) && *r == zero)
        .map(|(i, _)| i)
        .collect();
    let accepting = sorted
        .iter()
        .enumerate()
        .filter(|(_, (l, _))| ta.accepting.contains(l))
        .map(|(i, _)| i)
        .collect();
    let mut alphabet = ta.alphabet.clone();
    alphabet.insert(Label::Tick);
    IntegralAutomaton {
        fa: FiniteAutomaton::new(alphabet, infos, initial, accepting, edges),
        states: sorted,
        kappa,
    }
}

/// A closed timed region automaton: a timed automaton whose locations are the
/// reachable region-automaton states of the input.
#[derive(Clone, Debug)]
pub struct Ctr {
    pub ta: TimedAutomaton,
    /// `(input location, region)` of every location of `ta`.
    pub states: Vec<(LocId, Region)>,
}

impl Ctr {
    /// The input-automaton location a CTR location belongs to.
    pub fn location_of(&self, q: LocId) -> LocId {
        self.states[q.0].0
    }
}

/// Lifts every region-automaton step to a transition carrying the closed guard
/// (strict atoms made non-strict) and the original reset set.
pub fn build_ctr(ta: &TimedAutomaton) -> Ctr {
    let ra = build_region_automaton(ta);
    let locations = ra
        .states
        .iter()
        .map(|(l, r)| Location {
            name: format!(
                "({},{})",
                ta.location_name(*l),
                r.describe(&ta.clocks, &ra.kappa)
            ),
            base: ta.locations[l.0].base,
        })
        .collect();
    let mut transitions: Vec<Transition> = ra
        .moves
        .iter()
        .map(|m| {
            let t = &ta.transitions[m.transition];
            Transition {
                source: LocId(m.from),
                label: t.label.clone(),
                guard: t.guard.closed(),
                resets: t.resets.clone(),
                target: LocId(m.to),
            }
        })
        .collect();
    transitions.sort_by(|a, b| transition_key(a).cmp(&transition_key(b)));
    transitions.dedup();
    let initial = ra.fa.initial.iter().map(|i| LocId(*i)).collect();
    let accepting = ra.fa.accepting.iter().map(|i| LocId(*i)).collect();
    Ctr {
        ta: TimedAutomaton {
            alphabet: ta.alphabet.clone(),
            locations,
            initial,
            accepting,
            clocks: ta.clocks.clone(),
            transitions,
        },
        states: ra.states,
    }
}

type TransitionKey<'a> = (LocId, &'a Label, &'a Guard, &'a BTreeSet<ClockId>, LocId);

pub(crate) fn transition_key(t: &Transition) -> TransitionKey<'_> {
    (t.source, &t.label, &t.guard, &t.resets, t.target)
}

/// Encodes an integral timed word as a ✓-word: before each event, one ✓ per
/// elapsed time unit. `None` if some timestamp is not an integer.
pub fn tick_encode(word: &TimedWord) -> Option<Vec<Label>> {
    let mut out = Vec::new();
    let mut now = 0i64;
    for e in &word.events {
        if !e.time.is_integer() {
            return None;
        }
        let t = e.time.to_integer();
        out.extend(std::iter::repeat_n(Label::Tick, (t - now) as usize));
        now = t;
        out.push(Label::Event(e.symbol.clone()));
    }
    Some(out)
}

/// Inverse of [`tick_encode`] on words without trailing ✓: the timestamp of an
/// event is the number of ✓ before it. Silent labels are dropped; trailing ✓
/// carry no event and are ignored. `None` on δ.
pub fn tick_decode(labels: &[Label]) -> Option<TimedWord> {
    let mut now = 0i64;
    let mut events = Vec::new();
    for l in labels {
        match l {
            Label::Tick => now += 1,
            Label::Event(s) => events.push(TimedEvent {
                symbol: s.clone(),
                time: Rational::from(now),
            }),
            Label::Silent => {}
            Label::Delta => return None,
        }
    }
    Some(TimedWord { events })
}

/// What a phase word (over events, δ and ✓) says about an event's timestamp.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PhaseTime {
    /// Exactly this integer.
    At(u64),
    /// Strictly between this integer and the next.
    Within(u64),
}

impl fmt::Display for PhaseTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseTime::At(n) => write!(f, "{n}"),
            PhaseTime::Within(n) => write!(f, "({n},{})", n + 1),
        }
    }
}

/// Reads the timestamp information off a word of the augmented automaton.
/// `None` if δ and ✓ do not alternate starting with δ.
pub fn decode_phase_word(labels: &[Label]) -> Option<Vec<(String, PhaseTime)>> {
    let mut ticks = 0u64;
    let mut fractional = false;
    let mut out = Vec::new();
    for l in labels {
        match l {
            Label::Delta if !fractional => fractional = true,
            Label::Tick if fractional => {
                fractional = false;
                ticks += 1;
            }
            Label::Delta | Label::Tick => return None,
            Label::Silent => {}
            Label::Event(s) => out.push((
                s.clone(),
                if fractional {
                    PhaseTime::Within(ticks)
                } else {
                    PhaseTime::At(ticks)
                },
            )),
        }
    }
    Some(out)
}
