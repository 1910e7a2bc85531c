//! Clock regions and the region automaton.
//!
//! A region is stored in the classic canonical form: for every clock either the
//! marker "above κ" or its integer part together with the index of its
//! fractional class. Class 0 holds the clocks with zero fractional part; the
//! classes 1, 2, … are the open-interval classes ordered by fractional value and
//! are numbered densely. Two regions are equal iff they denote the same
//! equivalence class, so equality is structural.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fa::{Edge, FiniteAutomaton, StateInfo};
use crate::model::{Atom, ClockId, CmpOp, Guard, LocId, TimedAutomaton};
use crate::word::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ClockRegion {
    Bounded { int: u32, class: u32 },
    Above,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Region {
    clocks: Vec<ClockRegion>,
}

impl Region {
    /// The region of the all-zero valuation.
    pub fn zero(nclocks: usize) -> Region {
        Region {
            clocks: vec![ClockRegion::Bounded { int: 0, class: 0 }; nclocks],
        }
    }

    pub fn from_parts(clocks: Vec<ClockRegion>) -> Region {
        let mut r = Region { clocks };
        r.compact();
        r
    }

    pub fn clocks(&self) -> &[ClockRegion] {
        &self.clocks
    }

    pub fn clock(&self, c: ClockId) -> ClockRegion {
        self.clocks[c.0]
    }

    /// True if every clock is above its maximal constant.
    pub fn is_unbounded(&self) -> bool {
        self.clocks.iter().all(|c| *c == ClockRegion::Above)
    }

    /// Number of non-zero fractional classes.
    fn class_count(&self) -> u32 {
        self.clocks
            .iter()
            .filter_map(|c| match c {
                ClockRegion::Bounded { class, .. } => Some(*class),
                ClockRegion::Above => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Renumbers the non-zero classes densely, preserving their order.
    fn compact(&mut self) {
        let used: BTreeSet<u32> = self
            .clocks
            .iter()
            .filter_map(|c| match c {
                ClockRegion::Bounded { class, .. } if *class > 0 => Some(*class),
                _ => None,
            })
            .collect();
        let remap: HashMap<u32, u32> = used
            .into_iter()
            .enumerate()
            .map(|(i, c)| (c, i as u32 + 1))
            .collect();
        for c in &mut self.clocks {
            if let ClockRegion::Bounded { class, .. } = c {
                if *class > 0 {
                    *class = remap[class];
                }
            }
        }
    }

    /// The canonical region containing `valuation`.
    pub fn of(valuation: &[Rational], kappa: &[u32]) -> Result<Region> {
        if valuation.len() != kappa.len() {
            return Err(Error::ValuationArity {
                expected: kappa.len(),
                got: valuation.len(),
            });
        }
        if let Some(i) = valuation.iter().position(|v| v.is_negative()) {
            return Err(Error::NegativeValuation(format!("#{i}")));
        }
        let fracs: BTreeSet<Rational> = valuation
            .iter()
            .zip(kappa)
            .filter(|(v, k)| **v <= Rational::from(**k as i64))
            .map(|(v, _)| v.fract())
            .filter(|f| !f.is_zero())
            .collect();
        let fracs: Vec<Rational> = fracs.into_iter().collect();
        let clocks = valuation
            .iter()
            .zip(kappa)
            .map(|(v, k)| {
                if *v > Rational::from(*k as i64) {
                    ClockRegion::Above
                } else {
                    let f = v.fract();
                    let class = if f.is_zero() {
                        0
                    } else {
                        fracs.binary_search(&f).expect("fraction collected") as u32 + 1
                    };
                    ClockRegion::Bounded {
                        int: v.to_integer() as u32,
                        class,
                    }
                }
            })
            .collect();
        Ok(Region { clocks })
    }

    /// The next region reached by letting time elapse minimally past this one.
    /// The all-above region is its own successor.
    pub fn time_successor(&self, kappa: &[u32]) -> Region {
        let has_zero = self
            .clocks
            .iter()
            .any(|c| matches!(c, ClockRegion::Bounded { class: 0, .. }));
        let mut clocks = self.clocks.clone();
        if has_zero {
            // Integral clocks leave their integer; they become the smallest
            // fractional class, or go above κ if they sat exactly on it.
            for (c, k) in clocks.iter_mut().zip(kappa) {
                if let ClockRegion::Bounded { int, class } = c {
                    if *class == 0 {
                        if *int >= *k {
                            *c = ClockRegion::Above;
                        } else {
                            *class = 1;
                        }
                    } else {
                        *class += 1;
                    }
                }
            }
        } else {
            let top = self.class_count();
            if top == 0 {
                return self.clone();
            }
            for c in clocks.iter_mut() {
                if let ClockRegion::Bounded { int, class } = c {
                    if *class == top {
                        *int += 1;
                        *class = 0;
                    }
                }
            }
        }
        Region::from_parts(clocks)
    }

    /// This region and all its time successors, ending with the first region
    /// that is its own successor.
    pub fn successor_chain(&self, kappa: &[u32]) -> Vec<Region> {
        let mut chain = vec![self.clone()];
        loop {
            let last = chain.last().expect("non-empty");
            let next = last.time_successor(kappa);
            if &next == last {
                return chain;
            }
            chain.push(next);
        }
    }

    pub fn satisfies_atom(&self, atom: &Atom, kappa: &[u32]) -> bool {
        assert!(
            atom.bound <= kappa[atom.clock.0],
            "guard constant exceeds the maximal constant of its clock"
        );
        let k = atom.bound;
        match self.clocks[atom.clock.0] {
            ClockRegion::Above => matches!(atom.op, CmpOp::Gt | CmpOp::Ge),
            ClockRegion::Bounded { int, class: 0 } => atom.op.holds(int, k),
            // int < value < int + 1
            ClockRegion::Bounded { int, .. } => match atom.op {
                CmpOp::Lt | CmpOp::Le => int < k,
                CmpOp::Eq => false,
                CmpOp::Gt | CmpOp::Ge => int >= k,
            },
        }
    }

    /// True iff every valuation in the region satisfies the guard. Region
    /// granularity refines every atom whose constant is at most κ, so this is
    /// all-or-nothing.
    pub fn satisfies(&self, guard: &Guard, kappa: &[u32]) -> bool {
        guard.atoms.iter().all(|a| self.satisfies_atom(a, kappa))
    }

    /// The region with the given clocks pinned to zero.
    pub fn reset(&self, resets: &BTreeSet<ClockId>) -> Region {
        if resets.is_empty() {
            return self.clone();
        }
        let mut clocks = self.clocks.clone();
        for c in resets {
            clocks[c.0] = ClockRegion::Bounded { int: 0, class: 0 };
        }
        Region::from_parts(clocks)
    }

    /// A representative valuation: class `i` of `m` gets fractional part
    /// `i / (m + 1)`, clocks above κ get `κ + 1`.
    pub fn sample(&self, kappa: &[u32]) -> Vec<Rational> {
        let m = self.class_count() as i64;
        self.clocks
            .iter()
            .zip(kappa)
            .map(|(c, k)| match c {
                ClockRegion::Above => Rational::from(*k as i64 + 1),
                ClockRegion::Bounded { int, class } => {
                    Rational::from(*int as i64) + Rational::new(*class as i64, m + 1)
                }
            })
            .collect()
    }

    /// Human-readable class description, e.g. `x=1 ∧ c=0` or
    /// `0<x<1 ∧ 0<c<1 ∧ frac: x=c`.
    pub fn describe(&self, names: &[String], kappa: &[u32]) -> String {
        if self.clocks.is_empty() {
            return "true".into();
        }
        let mut parts = Vec::new();
        for (i, c) in self.clocks.iter().enumerate() {
            let n = &names[i];
            parts.push(match c {
                ClockRegion::Above => format!("{n}>{}", kappa[i]),
                ClockRegion::Bounded { int, class: 0 } => format!("{n}={int}"),
                ClockRegion::Bounded { int, .. } => format!("{int}<{n}<{}", int + 1),
            });
        }
        let mut out = parts.join(" ∧ ");
        let frac_clocks = self
            .clocks
            .iter()
            .filter(|c| matches!(c, ClockRegion::Bounded { class, .. } if *class > 0))
            .count();
        if frac_clocks > 1 {
            out.push_str(" ∧ frac: ");
            for class in 1..=self.class_count() {
                if class > 1 {
                    out.push('<');
                }
                let members: Vec<&str> = self
                    .clocks
                    .iter()
                    .enumerate()
                    .filter(
                        |(_, c)| matches!(c, ClockRegion::Bounded { class: k, .. } if *k == class),
                    )
                    .map(|(i, _)| names[i].as_str())
                    .collect();
                let _ = write!(out, "{}", members.join("="));
            }
        }
        out
    }
}

/// A region whose valuations are all integral; each clock value lies in
/// `0..=κ(c)+1`, the top value standing for "above κ".
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct IntegerRegion(pub Vec<u32>);

impl IntegerRegion {
    pub fn zero(nclocks: usize) -> Self {
        IntegerRegion(vec![0; nclocks])
    }

    /// One time unit later, clipped at κ+1.
    pub fn tick(&self, kappa: &[u32]) -> Self {
        IntegerRegion(
            self.0
                .iter()
                .zip(kappa)
                .map(|(v, k)| (*v + 1).min(*k + 1))
                .collect(),
        )
    }

    pub fn reset(&self, resets: &BTreeSet<ClockId>) -> Self {
        let mut vals = self.0.clone();
        for c in resets {
            vals[c.0] = 0;
        }
        IntegerRegion(vals)
    }

    /// Any value above κ compares the same as κ+1 against constants ≤ κ, so
    /// evaluating on the clipped value is exact.
    pub fn satisfies(&self, guard: &Guard) -> bool {
        guard.eval(&self.0)
    }

    pub fn describe(&self, names: &[String], kappa: &[u32]) -> String {
        if self.0.is_empty() {
            return "true".into();
        }
        self.0
            .iter()
            .enumerate()
            .map(|(i, v)| {
                if *v > kappa[i] {
                    format!("{}>{}", names[i], kappa[i])
                } else {
                    format!("{}={}", names[i], v)
                }
            })
            .collect::<Vec<_>>()
            .join(" ∧ ")
    }
}

/// All `∏(κ(c)+2)` integer regions, in lexicographic order.
pub fn enumerate_integer_regions(kappa: &[u32]) -> Vec<IntegerRegion> {
    let mut out = vec![IntegerRegion(Vec::new())];
    for k in kappa {
        out = out
            .into_iter()
            .flat_map(|r| {
                (0..=k + 1).map(move |v| {
                    let mut vals = r.0.clone();
                    vals.push(v);
                    IntegerRegion(vals)
                })
            })
            .collect();
    }
    out
}

/// One region-automaton step and the model transition that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RegionMove {
    pub from: usize,
    pub transition: usize,
    pub to: usize,
}

/// The reachable part of the region automaton of a timed automaton.
#[derive(Clone, Debug)]
pub struct RegionAutomaton {
    pub fa: FiniteAutomaton,
    /// `(location, region)` of every state, sorted.
    pub states: Vec<(LocId, Region)>,
    pub kappa: Vec<u32>,
    /// Steps annotated with the originating transition index, sorted.
    pub moves: Vec<RegionMove>,
}

impl RegionAutomaton {
    pub fn state_of(&self, loc: LocId, region: &Region) -> Option<usize> {
        self.states
            .binary_search_by(|(l, r)| (l, r).cmp(&(&loc, region)))
            .ok()
    }

    /// Distinct regions among the reachable states.
    pub fn region_count(&self) -> usize {
        self.states
            .iter()
            .map(|(_, r)| r)
            .collect::<BTreeSet<_>>()
            .len()
    }
}

/// Builds the reachable region automaton.
///
/// From a state `(l, R)` every region `R''` on the time-successor chain of `R`
/// is tried against every transition of `l`; a satisfied guard yields the step
/// to `(l', R''[r ↦ 0])`. States are numbered in lexicographic order of
/// `(location, region)`.
pub fn build_region_automaton(ta: &TimedAutomaton) -> RegionAutomaton {
    let kappa = ta.kappa();
    let mut index: HashMap<(LocId, Region), usize> = HashMap::new();
    let mut states: Vec<(LocId, Region)> = Vec::new();
    let mut queue = VecDeque::new();
    let mut raw_moves = Vec::new();

    let zero = Region::zero(ta.clocks.len());
    for l in &ta.initial {
        let key = (*l, zero.clone());
        if !index.contains_key(&key) {
            index.insert(key.clone(), states.len());
            queue.push_back(states.len());
            states.push(key);
        }
    }
    while let Some(s) = queue.pop_front() {
        let (loc, region) = states[s].clone();
        let chain = region.successor_chain(&kappa);
        for (ti, t) in ta.outgoing(loc) {
            for r in chain.iter().filter(|r| r.satisfies(&t.guard, &kappa)) {
                let key = (t.target, r.reset(&t.resets));
                let to = match index.get(&key) {
                    Some(&to) => to,
                    None => {
                        let to = states.len();
                        index.insert(key.clone(), to);
                        states.push(key);
                        queue.push_back(to);
                        to
                    }
                };
                raw_moves.push(RegionMove {
                    from: s,
                    transition: ti,
                    to,
                });
            }
        }
    }

    // Renumber in sorted order.
    let mut order: Vec<usize> = (0..states.len()).collect();
    order.sort_by(|a, b| states[*a].cmp(&states[*b]));
    let mut rank = vec![0; states.len()];
    for (new, old) in order.iter().enumerate() {
        rank[*old] = new;
    }
    let sorted: Vec<(LocId, Region)> = order.iter().map(|o| states[*o].clone()).collect();
    let mut moves: Vec<RegionMove> = raw_moves
        .into_iter()
        .map(|m| RegionMove {
            from: rank[m.from],
            transition: m.transition,
            to: rank[m.to],
        })
        .collect();
    moves.sort();
    moves.dedup();

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
    let edges = moves
        .iter()
        .map(|m| Edge {
            from: m.from,
            label: ta.transitions[m.transition].label.clone(),
            to: m.to,
        })
        .collect();
    let fa = FiniteAutomaton::new(ta.alphabet.clone(), infos, initial, accepting, edges);
    RegionAutomaton {
        fa,
        states: sorted,
        kappa,
        moves,
    }
}
