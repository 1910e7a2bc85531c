//! Timed automata, guards, and opacity specifications.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Reserved spelling of the silent label in model files.
pub const SILENT_SPELLING: &str = "~eps~";
/// Reserved spelling of the fractional-phase event.
pub const DELTA_SPELLING: &str = "~delta~";
/// Reserved spelling of the integer-boundary (tick) event.
pub const TICK_SPELLING: &str = "~tick~";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct LocId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ClockId(pub usize);

impl fmt::Display for LocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}", self.0)
    }
}

/// Transition label.
///
/// `Silent` is the empty label ε. `Delta` and `Tick` are the phase events
/// inserted by the augmented construction and the integral automaton; they never
/// occur in user alphabets.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Label {
    Silent,
    Delta,
    Tick,
    Event(String),
}

impl Label {
    pub fn event(name: impl Into<String>) -> Self {
        Label::Event(name.into())
    }

    pub fn is_silent(&self) -> bool {
        matches!(self, Label::Silent)
    }

    /// Spelling used by the model file format.
    pub fn file_spelling(&self) -> &str {
        match self {
            Label::Silent => SILENT_SPELLING,
            Label::Delta => DELTA_SPELLING,
            Label::Tick => TICK_SPELLING,
            Label::Event(name) => name,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Silent => f.write_str("ε"),
            Label::Delta => f.write_str("δ"),
            Label::Tick => f.write_str("✓"),
            Label::Event(name) => f.write_str(name),
        }
    }
}

/// Renders a label sequence as space-separated symbols, `ε` when empty.
pub fn format_word(word: &[Label]) -> String {
    if word.is_empty() {
        return "ε".to_string();
    }
    word.iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn holds<T: PartialOrd>(self, lhs: T, rhs: T) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Gt => lhs > rhs,
        }
    }

    /// The non-strict counterpart (`<` becomes `<=`, `>` becomes `>=`).
    pub fn closed(self) -> Self {
        match self {
            CmpOp::Lt => CmpOp::Le,
            CmpOp::Gt => CmpOp::Ge,
            other => other,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }
}

/// A single clock constraint `clock op bound`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Atom {
    pub clock: ClockId,
    pub op: CmpOp,
    pub bound: u32,
}

impl Atom {
    pub fn new(clock: ClockId, op: CmpOp, bound: u32) -> Self {
        Atom { clock, op, bound }
    }
}

/// Conjunction of atoms; the empty conjunction is `true`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Guard {
    pub atoms: Vec<Atom>,
}

impl Guard {
    pub fn new(atoms: Vec<Atom>) -> Self {
        Guard { atoms }
    }

    pub fn always() -> Self {
        Guard::default()
    }

    pub fn and(mut self, atom: Atom) -> Self {
        self.atoms.push(atom);
        self
    }

    pub fn is_true(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn has_equality(&self) -> bool {
        self.atoms.iter().any(|a| a.op == CmpOp::Eq)
    }

    /// Atoms sorted with duplicates removed. Used wherever guards are compared
    /// syntactically.
    pub fn canonical(&self) -> Guard {
        let mut atoms = self.atoms.clone();
        atoms.sort();
        atoms.dedup();
        Guard { atoms }
    }

    /// Every strict inequality replaced by its non-strict counterpart, in
    /// canonical form.
    pub fn closed(&self) -> Guard {
        Guard {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom::new(a.clock, a.op.closed(), a.bound))
                .collect(),
        }
        .canonical()
    }

    /// Evaluates the guard on a concrete valuation.
    pub fn eval<T: PartialOrd + From<u32> + Copy>(&self, valuation: &[T]) -> bool {
        self.atoms
            .iter()
            .all(|a| a.op.holds(valuation[a.clock.0], T::from(a.bound)))
    }

    pub fn display<'a>(&'a self, clocks: &'a [String]) -> GuardDisplay<'a> {
        GuardDisplay {
            guard: self,
            clocks,
        }
    }
}

pub struct GuardDisplay<'a> {
    guard: &'a Guard,
    clocks: &'a [String],
}

impl fmt::Display for GuardDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.guard.atoms.is_empty() {
            return f.write_str("true");
        }
        for (i, a) in self.guard.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(" && ")?;
            }
            let name = self
                .clocks
                .get(a.clock.0)
                .map(String::as_str)
                .unwrap_or("?");
            write!(f, "{}{}{}", name, a.op.symbol(), a.bound)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Transition {
    pub source: LocId,
    pub label: Label,
    pub guard: Guard,
    pub resets: BTreeSet<ClockId>,
    pub target: LocId,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Location {
    pub name: String,
    /// Location of the user model this one was derived from. For a user model
    /// this is the location itself.
    pub base: LocId,
}

/// A timed automaton `(Σ, L, L0, Lf, C, Δ)`.
///
/// The automaton is an ε-automaton iff `alphabet` contains [`Label::Silent`].
/// The maximal constants κ are always derived from the guards, see
/// [`TimedAutomaton::kappa`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TimedAutomaton {
    pub alphabet: BTreeSet<Label>,
    pub locations: Vec<Location>,
    pub initial: BTreeSet<LocId>,
    pub accepting: BTreeSet<LocId>,
    pub clocks: Vec<String>,
    pub transitions: Vec<Transition>,
}

impl TimedAutomaton {
    /// Locations named `names`, each its own base.
    pub fn with_locations<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        let locations = names
            .into_iter()
            .enumerate()
            .map(|(i, n)| Location {
                name: n.into(),
                base: LocId(i),
            })
            .collect();
        TimedAutomaton {
            alphabet: BTreeSet::new(),
            locations,
            initial: BTreeSet::new(),
            accepting: BTreeSet::new(),
            clocks: Vec::new(),
            transitions: Vec::new(),
        }
    }

    pub fn location_ids(&self) -> impl Iterator<Item = LocId> {
        (0..self.locations.len()).map(LocId)
    }

    pub fn location_name(&self, l: LocId) -> &str {
        &self.locations[l.0].name
    }

    pub fn find_location(&self, name: &str) -> Option<LocId> {
        self.locations
            .iter()
            .position(|l| l.name == name)
            .map(LocId)
    }

    pub fn find_clock(&self, name: &str) -> Option<ClockId> {
        self.clocks.iter().position(|c| c == name).map(ClockId)
    }

    pub fn is_epsilon(&self) -> bool {
        self.alphabet.contains(&Label::Silent)
    }

    /// κ(c): the largest constant compared against `c` in any guard, 0 if none.
    pub fn kappa(&self) -> Vec<u32> {
        let mut kappa = vec![0; self.clocks.len()];
        for t in &self.transitions {
            for a in &t.guard.atoms {
                if let Some(k) = kappa.get_mut(a.clock.0) {
                    *k = (*k).max(a.bound);
                }
            }
        }
        kappa
    }

    pub fn outgoing(&self, l: LocId) -> impl Iterator<Item = (usize, &Transition)> {
        self.transitions
            .iter()
            .enumerate()
            .filter(move |(_, t)| t.source == l)
    }

    pub fn describe_transition(&self, t: &Transition) -> String {
        let resets: Vec<&str> = t.resets.iter().map(|c| self.clocks[c.0].as_str()).collect();
        format!(
            "{} --{} [{}] {{{}}}--> {}",
            self.location_name(t.source),
            t.label.file_spelling(),
            t.guard.display(&self.clocks),
            resets.join(","),
            self.location_name(t.target)
        )
    }

    /// Checks the structural invariants, returning one diagnostic per violation.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        if self.initial.is_empty() {
            diags.push(Diagnostic::new(
                DiagnosticKind::NoInitialLocation,
                "initial set is empty",
            ));
        }
        let nloc = self.locations.len();
        for (set, what) in [(&self.initial, "initial"), (&self.accepting, "accepting")] {
            for l in set.iter().filter(|l| l.0 >= nloc) {
                diags.push(Diagnostic::new(
                    DiagnosticKind::UndeclaredLocation,
                    format!("{what} set refers to location #{}", l.0),
                ));
            }
        }
        for (i, t) in self.transitions.iter().enumerate() {
            for (l, end) in [(t.source, "source"), (t.target, "target")] {
                if l.0 >= nloc {
                    diags.push(Diagnostic::new(
                        DiagnosticKind::UndeclaredLocation,
                        format!("transition {i} {end} refers to location #{}", l.0),
                    ));
                }
            }
            for a in &t.guard.atoms {
                if a.clock.0 >= self.clocks.len() {
                    diags.push(Diagnostic::new(
                        DiagnosticKind::UndeclaredClockInGuard,
                        format!("transition {i} compares clock #{}", a.clock.0),
                    ));
                }
            }
            for c in &t.resets {
                if c.0 >= self.clocks.len() {
                    diags.push(Diagnostic::new(
                        DiagnosticKind::UndeclaredClockInReset,
                        format!("transition {i} resets clock #{}", c.0),
                    ));
                }
            }
            if !self.alphabet.contains(&t.label) {
                diags.push(Diagnostic::new(
                    DiagnosticKind::LabelNotInAlphabet,
                    format!("transition {i} is labelled `{}`", t.label),
                ));
            }
        }
        diags
    }

    /// Fails with [`Error::InvalidModel`] unless [`validate`](Self::validate)
    /// comes back empty.
    pub fn ensure_valid(&self) -> Result<()> {
        let diags = self.validate();
        if diags.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidModel(diags))
        }
    }

    /// Index of the first resetting transition without an equality atom.
    pub fn first_non_integer_reset(&self) -> Option<usize> {
        self.transitions
            .iter()
            .position(|t| !t.resets.is_empty() && !t.guard.has_equality())
    }

    /// Membership test for timed automata with integer resets: every transition
    /// that resets a clock carries at least one atom `c = k`.
    pub fn check_integer_resets(&self) -> bool {
        self.first_non_integer_reset().is_none()
    }

    pub fn ensure_integer_resets(&self) -> Result<()> {
        match self.first_non_integer_reset() {
            None => Ok(()),
            Some(index) => Err(Error::NotIntegerResets {
                index,
                description: self.describe_transition(&self.transitions[index]),
            }),
        }
    }

    /// Relabels every transition whose label is not observable with ε. The
    /// result is an ε-automaton over `Σo ∪ {ε}`.
    pub fn hide_unobservable(&self, spec: &OpacitySpec) -> Result<TimedAutomaton> {
        if self.is_epsilon() {
            return Err(Error::AlreadySilent);
        }
        let observable = |l: &Label| match l {
            Label::Event(name) => spec.observable.contains(name),
            _ => false,
        };
        let mut alphabet: BTreeSet<Label> = self
            .alphabet
            .iter()
            .filter(|l| observable(l))
            .cloned()
            .collect();
        alphabet.insert(Label::Silent);
        let transitions = self
            .transitions
            .iter()
            .map(|t| Transition {
                label: if observable(&t.label) {
                    t.label.clone()
                } else {
                    Label::Silent
                },
                ..t.clone()
            })
            .collect();
        Ok(TimedAutomaton {
            alphabet,
            transitions,
            ..self.clone()
        })
    }

    /// Graphviz rendering with guards and resets on the edges.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph ta {\n  rankdir=LR;\n  node [shape=circle];\n");
        for (i, l) in self.locations.iter().enumerate() {
            let shape = if self.accepting.contains(&LocId(i)) {
                "doublecircle"
            } else {
                "circle"
            };
            out.push_str(&format!(
                "  n{i} [label=\"{}\", shape={shape}];\n",
                escape(&l.name)
            ));
        }
        for l in &self.initial {
            out.push_str(&format!(
                "  init{0} [shape=point, style=invis];\n  init{0} -> n{0};\n",
                l.0
            ));
        }
        for t in &self.transitions {
            let resets: Vec<&str> = t.resets.iter().map(|c| self.clocks[c.0].as_str()).collect();
            out.push_str(&format!(
                "  n{} -> n{} [label=\"{} | {} | {{{}}}\"];\n",
                t.source.0,
                t.target.0,
                escape(&t.label.to_string()),
                escape(&t.guard.display(&self.clocks).to_string()),
                resets.join(",")
            ));
        }
        out.push_str("}\n");
        out
    }
}

pub(crate) fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Observable events plus secret and non-secret locations.
///
/// Secret and non-secret sets may overlap and need not cover all locations.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OpacitySpec {
    pub observable: BTreeSet<String>,
    pub secret: BTreeSet<LocId>,
    pub nonsecret: BTreeSet<LocId>,
}

impl OpacitySpec {
    pub fn validate_against(&self, model: &TimedAutomaton) -> Result<()> {
        for e in &self.observable {
            if !model.alphabet.contains(&Label::Event(e.clone())) {
                return Err(Error::InvalidSpec(format!(
                    "observable event `{e}` is not in the alphabet"
                )));
            }
        }
        for l in self.secret.iter().chain(&self.nonsecret) {
            if l.0 >= model.locations.len() {
                return Err(Error::InvalidSpec(format!(
                    "location #{} is not declared",
                    l.0
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DiagnosticKind {
    NoInitialLocation,
    UndeclaredLocation,
    UndeclaredClockInGuard,
    UndeclaredClockInReset,
    LabelNotInAlphabet,
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiagnosticKind::NoInitialLocation => "no initial location",
            DiagnosticKind::UndeclaredLocation => "undeclared location",
            DiagnosticKind::UndeclaredClockInGuard => "undeclared clock in guard",
            DiagnosticKind::UndeclaredClockInReset => "undeclared clock in reset",
            DiagnosticKind::LabelNotInAlphabet => "label not in alphabet",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub detail: String,
}

impl Diagnostic {
    fn new(kind: DiagnosticKind, detail: impl Into<String>) -> Self {
        Diagnostic {
            kind,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.detail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_loc() -> TimedAutomaton {
        let mut ta = TimedAutomaton::with_locations(["l0"]);
        ta.initial.insert(LocId(0));
        ta.clocks.push("x".into());
        ta.alphabet.insert(Label::event("a"));
        ta
    }

    #[test]
    fn undeclared_reset_clock_is_reported() {
        let mut ta = one_loc();
        ta.transitions.push(Transition {
            source: LocId(0),
            label: Label::event("a"),
            guard: Guard::always(),
            resets: [ClockId(1)].into(),
            target: LocId(0),
        });
        let diags = ta.validate();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].kind, DiagnosticKind::UndeclaredClockInReset);
        assert!(diags[0]
            .to_string()
            .starts_with("undeclared clock in reset"));
    }

    #[test]
    fn empty_initial_set_is_reported() {
        let mut ta = one_loc();
        ta.initial.clear();
        let diags = ta.validate();
        assert_eq!(diags.len(), 1);
        assert_eq!(
            diags[0].to_string(),
            "no initial location: initial set is empty"
        );
    }

    #[test]
    fn kappa_is_largest_constant_per_clock() {
        let mut ta = one_loc();
        ta.clocks.push("y".into());
        let x = ClockId(0);
        ta.transitions.push(Transition {
            source: LocId(0),
            label: Label::event("a"),
            guard: Guard::new(vec![Atom::new(x, CmpOp::Lt, 3), Atom::new(x, CmpOp::Ge, 1)]),
            resets: BTreeSet::new(),
            target: LocId(0),
        });
        assert_eq!(ta.kappa(), vec![3, 0]);
    }

    #[test]
    fn no_resets_is_vacuously_irta() {
        let mut ta = one_loc();
        ta.transitions.push(Transition {
            source: LocId(0),
            label: Label::event("a"),
            guard: Guard::new(vec![Atom::new(ClockId(0), CmpOp::Gt, 1)]),
            resets: BTreeSet::new(),
            target: LocId(0),
        });
        assert!(ta.check_integer_resets());
    }

    #[test]
    fn hiding_rejects_silent_models() {
        let mut ta = one_loc();
        ta.alphabet.insert(Label::Silent);
        assert!(matches!(
            ta.hide_unobservable(&OpacitySpec::default()),
            Err(Error::AlreadySilent)
        ));
    }

    #[test]
    fn closing_a_guard_relaxes_strict_atoms_only() {
        let x = ClockId(0);
        let g = Guard::new(vec![
            Atom::new(x, CmpOp::Gt, 1),
            Atom::new(x, CmpOp::Eq, 1),
            Atom::new(x, CmpOp::Lt, 2),
        ]);
        let closed = g.closed();
        assert_eq!(
            closed.atoms,
            vec![
                Atom::new(x, CmpOp::Le, 2),
                Atom::new(x, CmpOp::Eq, 1),
                Atom::new(x, CmpOp::Ge, 1),
            ]
        );
    }
}
