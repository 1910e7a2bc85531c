//! The two opacity decision procedures and witness extraction.

use std::collections::{BTreeSet, VecDeque};
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::constructions::{
    augment, build_ctr, build_integral_automaton, decode_phase_word, tick_decode, Augmented, Ctr,
    IntegralAutomaton, PhaseTime,
};
use crate::error::{Error, Result};
use crate::fa::{determinize, project_locations, Dfa, FiniteAutomaton, StateId};
use crate::model::{Label, LocId, OpacitySpec, TimedAutomaton};
use crate::reduce::{reduce_ctr, Reduction};
use crate::regions::{build_region_automaton, RegionAutomaton};
use crate::word::TimedWord;

/// Size and build time of one pipeline stage.
#[derive(Clone, Debug, Serialize)]
pub struct StageStats {
    pub stage: &'static str,
    pub states: usize,
    pub transitions: usize,
    #[serde(skip)]
    pub elapsed: Duration,
}

/// A theoretical size bound next to the measured value.
#[derive(Clone, Debug, Serialize)]
pub struct SizeBound {
    pub quantity: &'static str,
    pub actual: u128,
    pub bound: u128,
}

impl SizeBound {
    pub fn holds(&self) -> bool {
        self.actual <= self.bound
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Stats {
    pub stages: Vec<StageStats>,
    pub bounds: Vec<SizeBound>,
}

impl Stats {
    pub fn stage(&self, name: &str) -> Option<&StageStats> {
        self.stages.iter().find(|s| s.stage == name)
    }

    pub fn bound(&self, name: &str) -> Option<&SizeBound> {
        self.bounds.iter().find(|b| b.quantity == name)
    }
}

/// A reachable subset of the determinized automaton that contains a
/// secret-location state and no non-secret-location state.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    /// Shortest observation reaching the subset, length-lexicographically least.
    pub observation: Vec<Label>,
    pub dfa_state: StateId,
    /// Members of the subset, as states of the pre-determinization automaton.
    pub violating_subset: Vec<StateId>,
    /// Printable names of those members.
    pub members: Vec<String>,
    pub locations: BTreeSet<LocId>,
    pub secret_hits: BTreeSet<LocId>,
    pub nonsecret_hits: BTreeSet<LocId>,
    /// Integral timed word read off a ✓-observation.
    pub timed: Option<TimedWord>,
    /// Timestamp constraints read off a δ/✓-observation.
    pub phases: Option<Vec<(String, PhaseTime)>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub opaque: bool,
    pub witness: Option<Witness>,
    pub stats: Stats,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn ta_stage(stage: &'static str, ta: &TimedAutomaton, elapsed: Duration) -> StageStats {
    StageStats {
        stage,
        states: ta.locations.len(),
        transitions: ta.transitions.len(),
        elapsed,
    }
}

fn fa_stage(stage: &'static str, fa: &FiniteAutomaton, elapsed: Duration) -> StageStats {
    StageStats {
        stage,
        states: fa.state_count(),
        transitions: fa.edges().len(),
        elapsed,
    }
}

fn product_kappa_plus(kappa: &[u32], add: u128) -> u128 {
    kappa.iter().map(|k| *k as u128 + add).product()
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Every intermediate object of the integer-reset procedure.
#[derive(Clone, Debug)]
pub struct IrtaPipeline {
    pub hidden: TimedAutomaton,
    pub augmented: Augmented,
    pub regions: RegionAutomaton,
    pub dfa: Dfa,
    pub stats: Stats,
}

/// Hides unobservable events, augments with phases, builds the region
/// automaton and determinizes it over `Σo ∪ {δ, ✓}`.
pub fn irta_pipeline(model: &TimedAutomaton, spec: &OpacitySpec) -> Result<IrtaPipeline> {
    model.ensure_valid()?;
    spec.validate_against(model)?;
    model.ensure_integer_resets()?;
    let mut stats = Stats::default();

    let (hidden, t) = timed(|| model.hide_unobservable(spec));
    let hidden = hidden?;
    stats.stages.push(ta_stage("hidden", &hidden, t));
    let (augmented, t) = timed(|| augment(&hidden));
    let augmented = augmented?;
    stats.stages.push(ta_stage("augmented", &augmented.ta, t));
    let (regions, t) = timed(|| build_region_automaton(&augmented.ta));
    stats.stages.push(fa_stage("regions", &regions.fa, t));
    let (dfa, t) = timed(|| determinize(&regions.fa));
    stats.stages.push(fa_stage("dfa", &dfa.fa, t));

    let kappa = model.kappa();
    stats.bounds.push(SizeBound {
        quantity: "region automaton states",
        actual: regions.fa.state_count() as u128,
        bound: 4 * model.locations.len() as u128 * product_kappa_plus(&kappa, 1),
    });
    stats.bounds.push(SizeBound {
        quantity: "distinct regions",
        actual: regions.region_count() as u128,
        bound: 2 * product_kappa_plus(&augmented.ta.kappa(), 1),
    });
    Ok(IrtaPipeline {
        hidden,
        augmented,
        regions,
        dfa,
        stats,
    })
}

/// Every intermediate object of the discrete-time-precision procedure.
#[derive(Clone, Debug)]
pub struct IdtpPipeline {
    pub hidden: TimedAutomaton,
    pub ctr: Ctr,
    pub reduction: Reduction,
    pub integral: IntegralAutomaton,
    pub dfa: Dfa,
    pub stats: Stats,
}

/// Hides unobservable events, builds and reduces the closed timed region
/// automaton, builds its integral automaton and determinizes over `Σo ∪ {✓}`.
pub fn idtp_pipeline(model: &TimedAutomaton, spec: &OpacitySpec) -> Result<IdtpPipeline> {
    model.ensure_valid()?;
    spec.validate_against(model)?;
    let mut stats = Stats::default();

    let (hidden, t) = timed(|| model.hide_unobservable(spec));
    let hidden = hidden?;
    stats.stages.push(ta_stage("hidden", &hidden, t));
    let (ctr, t) = timed(|| build_ctr(&hidden));
    stats.stages.push(ta_stage("ctr", &ctr.ta, t));
    let (reduction, t) = timed(|| reduce_ctr(&ctr));
    stats.stages.push(ta_stage("reduced", &reduction.ctr.ta, t));
    let (integral, t) = timed(|| build_integral_automaton(&reduction.ctr.ta));
    stats.stages.push(fa_stage("integral", &integral.fa, t));
    let (dfa, t) = timed(|| determinize(&integral.fa));
    stats.stages.push(fa_stage("dfa", &dfa.fa, t));

    let kappa = model.kappa();
    let n = model.clocks.len();
    stats.bounds.push(SizeBound {
        quantity: "ctr states",
        actual: ctr.ta.locations.len() as u128,
        bound: model.locations.len() as u128
            * factorial(n)
            * 4u128.pow(n as u32)
            * product_kappa_plus(&kappa, 1),
    });
    stats.bounds.push(SizeBound {
        quantity: "integral automaton states",
        actual: integral.fa.state_count() as u128,
        bound: reduction.ctr.ta.locations.len() as u128 * product_kappa_plus(&kappa, 2),
    });
    Ok(IdtpPipeline {
        hidden,
        ctr,
        reduction,
        integral,
        dfa,
        stats,
    })
}

/// Decides current-location timed opacity of a timed automaton whose resets
/// all carry an equality constraint.
///
/// Rejects other automata with [`Error::NotIntegerResets`]: the phase
/// abstraction is only exact when resets happen at integer times.
pub fn verify_clto_irta(model: &TimedAutomaton, spec: &OpacitySpec) -> Result<Verdict> {
    let p = irta_pipeline(model, spec)?;
    let violating = first_violation(&p.regions.fa, &p.dfa, spec)?;
    let witness = violating
        .map(|x| extract_witness(&p.regions.fa, &p.dfa, x, spec))
        .transpose()?;
    Ok(Verdict {
        opaque: witness.is_none(),
        witness,
        stats: p.stats,
    })
}

/// Decides current-location timed opacity against an observer that only sees
/// digitized timestamps. Applies to any timed automaton.
pub fn verify_clto_idtp(model: &TimedAutomaton, spec: &OpacitySpec) -> Result<Verdict> {
    let p = idtp_pipeline(model, spec)?;
    let violating = first_violation(&p.integral.fa, &p.dfa, spec)?;
    let witness = violating
        .map(|x| extract_witness(&p.integral.fa, &p.dfa, x, spec))
        .transpose()?;
    Ok(Verdict {
        opaque: witness.is_none(),
        witness,
        stats: p.stats,
    })
}

/// `L_X ∩ Ls ≠ ∅ ∧ L_X ∩ Lns = ∅`.
pub fn violates(locations: &BTreeSet<LocId>, spec: &OpacitySpec) -> bool {
    !locations.is_disjoint(&spec.secret) && locations.is_disjoint(&spec.nonsecret)
}

/// The first violating subset in state order, which is also the one with the
/// length-lexicographically least access word.
pub fn first_violation(
    nfa: &FiniteAutomaton,
    dfa: &Dfa,
    spec: &OpacitySpec,
) -> Result<Option<StateId>> {
    for (x, members) in dfa.subsets.iter().enumerate() {
        if violates(&project_locations(nfa, members)?, spec) {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

/// Length-lexicographically least word leading from the initial state to `x`.
pub fn shortest_word(dfa: &Dfa, x: StateId) -> Result<Vec<Label>> {
    let n = dfa.fa.state_count();
    if x >= n {
        return Err(Error::Unreachable(x));
    }
    let mut parent: Vec<Option<(StateId, &Label)>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for q in &dfa.fa.initial {
        seen[*q] = true;
        queue.push_back(*q);
    }
    while let Some(q) = queue.pop_front() {
        if q == x {
            let mut word = Vec::new();
            let mut at = q;
            while let Some((p, l)) = parent[at] {
                word.push(l.clone());
                at = p;
            }
            word.reverse();
            return Ok(word);
        }
        // Edges are stored sorted by label.
        for e in dfa.fa.out_edges(q) {
            if !seen[e.to] {
                seen[e.to] = true;
                parent[e.to] = Some((q, &e.label));
                queue.push_back(e.to);
            }
        }
    }
    Err(Error::Unreachable(x))
}

/// Builds the witness for DFA state `x` of the subset construction of `nfa`.
pub fn extract_witness(
    nfa: &FiniteAutomaton,
    dfa: &Dfa,
    x: StateId,
    spec: &OpacitySpec,
) -> Result<Witness> {
    let observation = shortest_word(dfa, x)?;
    let members = &dfa.subsets[x];
    let locations = project_locations(nfa, members)?;
    // Phase words carry δ in their alphabet; tick words do not.
    let phased = nfa.alphabet.contains(&Label::Delta);
    let timed = if phased {
        None
    } else {
        tick_decode(&observation)
    };
    let phases = if phased {
        decode_phase_word(&observation)
    } else {
        None
    };
    Ok(Witness {
        dfa_state: x,
        violating_subset: members.clone(),
        members: members.iter().map(|q| nfa.states[*q].label()).collect(),
        secret_hits: locations.intersection(&spec.secret).copied().collect(),
        nonsecret_hits: locations.intersection(&spec.nonsecret).copied().collect(),
        locations,
        timed,
        phases,
        observation,
    })
}
