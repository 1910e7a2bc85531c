use thiserror::Error;

use crate::fa::StateId;
use crate::format::ParseError;
use crate::model::Diagnostic;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {}", join(.0))]
    InvalidModel(Vec<Diagnostic>),

    #[error("invalid opacity specification: {0}")]
    InvalidSpec(String),

    #[error("model already contains the silent label; hiding expects a model without it")]
    AlreadySilent,

    #[error("not an automaton with integer resets: transition {index} ({description}) resets clocks without an equality constraint")]
    NotIntegerResets { index: usize, description: String },

    #[error("clock name `{0}` is reserved for the phase clock")]
    ReservedClock(String),

    #[error("negative value for clock `{0}`")]
    NegativeValuation(String),

    #[error("expected {expected} clock values, got {got}")]
    ValuationArity { expected: usize, got: usize },

    #[error("state {0} carries no location metadata")]
    MissingMetadata(StateId),

    #[error("state {0} is not reachable from the initial state")]
    Unreachable(StateId),

    #[error(transparent)]
    Parse(#[from] ParseError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

fn join(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
