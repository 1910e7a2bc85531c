//! Simulation-based state reduction of closed timed region automata.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::constructions::Ctr;
use crate::model::{ClockId, Guard, Label, LocId, TimedAutomaton};

/// A preorder on CTR states. `(q2, q1)` means q1 simulates q2; both sit at the
/// same input location.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimulationRelation {
    n: usize,
    related: Vec<bool>,
}

impl SimulationRelation {
    pub fn contains(&self, q2: LocId, q1: LocId) -> bool {
        self.related[q2.0 * self.n + q1.0]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (LocId, LocId)> + '_ {
        (0..self.n * self.n)
            .filter(|i| self.related[*i])
            .map(|i| (LocId(i / self.n), LocId(i % self.n)))
    }

    pub fn len(&self) -> usize {
        self.related.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

type Step<'a> = (&'a Label, &'a Guard, &'a BTreeSet<ClockId>, LocId);

/// For each state, its steps as `(label, guard, resets, other end)`.
fn adjacency(ta: &TimedAutomaton, forward: bool) -> Vec<Vec<Step<'_>>> {
    let mut adj = vec![Vec::new(); ta.locations.len()];
    for t in &ta.transitions {
        let (at, other) = if forward {
            (t.source, t.target)
        } else {
            (t.target, t.source)
        };
        adj[at.0].push((&t.label, &t.guard, &t.resets, other));
    }
    adj
}

fn same_location_pairs(ctr: &Ctr) -> SimulationRelation {
    let n = ctr.states.len();
    let mut related = vec![false; n * n];
    for a in 0..n {
        for b in 0..n {
            related[a * n + b] = ctr.states[a].0 == ctr.states[b].0;
        }
    }
    SimulationRelation { n, related }
}

/// Refines `rel` to the greatest post-fixpoint of the transfer condition over
/// `adj`. Returns the number of refinement rounds.
fn refine(rel: &mut SimulationRelation, adj: &[Vec<Step<'_>>]) -> usize {
    let n = rel.n;
    let mut rounds = 0;
    loop {
        rounds += 1;
        let mut changed = false;
        for q2 in 0..n {
            for q1 in 0..n {
                if !rel.related[q2 * n + q1] || q1 == q2 {
                    continue;
                }
                let matched = adj[q2].iter().all(|(l, g, r, p2)| {
                    adj[q1].iter().any(|(l1, g1, r1, p1)| {
                        l == l1 && g == g1 && r == r1 && rel.related[p2.0 * n + p1.0]
                    })
                });
                if !matched {
                    rel.related[q2 * n + q1] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return rounds;
        }
    }
}

/// Maximal forward simulation: q1 simulates q2 if every step out of q2 is
/// matched by a step out of q1 with identical label, closed guard and reset
/// whose targets are again related.
pub fn forward_simulation(ctr: &Ctr) -> SimulationRelation {
    let mut rel = same_location_pairs(ctr);
    refine(&mut rel, &adjacency(&ctr.ta, true));
    rel
}

/// Maximal backward simulation: the mirror image of [`forward_simulation`] on
/// incoming steps. An initial state is only simulated by initial states, so
/// that every run into q2 is matched by a run into q1 that also starts at an
/// initial state.
pub fn backward_simulation(ctr: &Ctr) -> SimulationRelation {
    let mut rel = same_location_pairs(ctr);
    let n = rel.n;
    for q2 in ctr.ta.initial.iter() {
        for q1 in 0..n {
            if !ctr.ta.initial.contains(&LocId(q1)) {
                rel.related[q2.0 * n + q1] = false;
            }
        }
    }
    refine(&mut rel, &adjacency(&ctr.ta, false));
    rel
}

/// Result of [`reduce_ctr`].
#[derive(Clone, Debug)]
pub struct Reduction {
    pub ctr: Ctr,
    /// Removed states of the input and the surviving input state that
    /// simulates each of them.
    pub removed: Vec<(LocId, LocId)>,
    /// Input states that survived removal but are not reachable afterwards.
    pub pruned: Vec<LocId>,
}

/// Removes every non-initial state that is both forward- and backward-simulated
/// by another state at the same location, then keeps only reachable states.
///
/// Candidates are visited in state order. A removed state is no longer allowed
/// to act as a simulator, so every class of mutually simulating states keeps a
/// representative.
pub fn reduce_ctr(ctr: &Ctr) -> Reduction {
    let fwd = forward_simulation(ctr);
    let bwd = backward_simulation(ctr);
    let n = ctr.states.len();
    let mut alive = vec![true; n];
    let mut chosen: BTreeMap<usize, usize> = BTreeMap::new();
    for q2 in 0..n {
        if ctr.ta.initial.contains(&LocId(q2)) {
            continue;
        }
        let sim = (0..n).find(|&q1| {
            q1 != q2
                && alive[q1]
                && fwd.contains(LocId(q2), LocId(q1))
                && bwd.contains(LocId(q2), LocId(q1))
        });
        if let Some(q1) = sim {
            alive[q2] = false;
            chosen.insert(q2, q1);
        }
    }
    // A chosen simulator may itself be removed later; follow the chain to the
    // survivor, which simulates by transitivity.
    let removed = chosen
        .keys()
        .map(|&q| {
            let mut s = chosen[&q];
            while let Some(&next) = chosen.get(&s) {
                s = next;
            }
            (LocId(q), LocId(s))
        })
        .collect();

    // Graph reachability over surviving states.
    let mut reach = vec![false; n];
    let mut queue: VecDeque<usize> = ctr.ta.initial.iter().map(|l| l.0).collect();
    for q in &queue {
        reach[*q] = true;
    }
    let mut succ = vec![Vec::new(); n];
    for t in &ctr.ta.transitions {
        if alive[t.source.0] && alive[t.target.0] {
            succ[t.source.0].push(t.target.0);
        }
    }
    while let Some(q) = queue.pop_front() {
        for &p in &succ[q] {
            if !reach[p] {
                reach[p] = true;
                queue.push_back(p);
            }
        }
    }
    let pruned = (0..n)
        .filter(|&q| alive[q] && !reach[q])
        .map(LocId)
        .collect();

    let keep: Vec<usize> = (0..n).filter(|&q| reach[q]).collect();
    let mut rank = vec![usize::MAX; n];
    for (new, old) in keep.iter().enumerate() {
        rank[*old] = new;
    }
    let map = |l: LocId| LocId(rank[l.0]);
    let ta = &ctr.ta;
    let reduced = TimedAutomaton {
        alphabet: ta.alphabet.clone(),
        locations: keep.iter().map(|q| ta.locations[*q].clone()).collect(),
        initial: ta.initial.iter().map(|l| map(*l)).collect(),
        accepting: ta
            .accepting
            .iter()
            .filter(|l| reach[l.0])
            .map(|l| map(*l))
            .collect(),
        clocks: ta.clocks.clone(),
        transitions: ta
            .transitions
            .iter()
            .filter(|t| reach[t.source.0] && reach[t.target.0])
            .map(|t| crate::model::Transition {
                source: map(t.source),
                target: map(t.target),
                ..t.clone()
            })
            .collect(),
    };
    Reduction {
        ctr: Ctr {
            ta: reduced,
            states: keep.iter().map(|q| ctr.states[*q].clone()).collect(),
        },
        removed,
        pruned,
    }
}
