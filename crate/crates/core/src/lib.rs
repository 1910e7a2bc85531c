//! Opacity verification for timed automata.
//!
//! Two decision procedures are provided:
//!
//! * [`opacity::verify_clto_irta`] decides current-location timed opacity for
//!   timed automata whose clock resets all happen at integer time points. It
//!   works on the region automaton of the phase-augmented automaton.
//! * [`opacity::verify_clto_idtp`] decides the same property for arbitrary timed
//!   automata against an observer that only sees digitized (integer-shifted)
//!   timestamps. It works on the integral (tick) automaton of the closed timed
//!   region automaton after simulation-based reduction.
//!
//! The [`oracle`] module holds brute-force checkers that share nothing with the
//! main pipeline beyond the data model; the test suites use them to
//! cross-validate every construction.

pub mod constructions;
pub mod error;
pub mod fa;
pub mod format;
pub mod model;
pub mod opacity;
pub mod oracle;
pub mod reduce;
pub mod regions;
pub mod word;

pub use error::{Error, Result};
pub use model::{
    Atom, ClockId, CmpOp, Guard, Label, LocId, Location, OpacitySpec, TimedAutomaton, Transition,
};
pub use opacity::{verify_clto_idtp, verify_clto_irta, Verdict, Witness};
pub use word::{Rational, TimedEvent, TimedWord};

/// Model files shipped with the crate.
pub mod bundled {
    /// Integer-reset model that is not opaque: observing `a` at time 1 then a
    /// second `a` within the next unit reveals the secret location.
    pub const INTEGER_RESETS: &str = include_str!("../models/integer_resets.ta");
    /// Model with a non-integer reset that is opaque against a discrete-time
    /// observer but not against a continuous-time one.
    pub const DISCRETE_OBSERVER: &str = include_str!("../models/discrete_observer.ta");
}
