use thiserror::Error;

use crate::id::PortId;

/// Errors raised by the structural operations, the expansion and the rebuild.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown port {0}")]
    UnknownPort(String),
    #[error("nets are not gluable: shared port {0} is not a ?-conclusion of both")]
    NotGluable(PortId),
    #[error("adding a wire from {from} to {to} closes a cycle")]
    CycleIntroduced { from: String, to: PortId },
    #[error("wire target {0} is not an exponential port outside the boxes")]
    TargetNotQuest(PortId),
    #[error("{0} is not a conclusion of the net")]
    NotAConclusion(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("name clash on {0}")]
    NameClash(PortId),
    #[error("renaming captures existing port {0}")]
    Capture(PortId),
    #[error("pseudo-experiment does not match the net: {0}")]
    ShapeMismatch(String),
    #[error("value {0} is not a positive power of the base")]
    NonPowerValue(String),
    #[error("co-contraction {port} has arity {arity}, which is not a positive power of {k}")]
    NonPowerArity { port: PortId, arity: usize, k: usize },
    #[error("co-contractions {0} and {1} share the arity {2}")]
    DuplicateArity(PortId, PortId, usize),
    #[error("expansion would have {predicted} ports, over the budget of {budget}")]
    TooLarge { predicted: String, budget: usize },
    #[error("digit mismatch: {0}")]
    DigitMismatch(String),
    #[error("recovered base {k} is below the basis {basis}")]
    BasisViolation { k: usize, basis: usize },
    #[error("the net has cuts")]
    CutPresent,
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid net: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
