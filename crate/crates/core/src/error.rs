use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("graph contains a cycle through {}", .witness.join(" -> "))]
    Cycle { witness: Vec<String> },

    #[error("case {case_id:?}: more than {limit} realizations (stopped after {partial})")]
    TooManyRealizations {
        case_id: String,
        limit: usize,
        partial: usize,
    },

    #[error("net has more than {limit} complete firing sequences")]
    TooManySequences { limit: usize },

    #[error("net is cyclic")]
    CyclicNet,

    #[error("net is malformed: {0}")]
    MalformedNet(String),

    #[error("non-probabilizable trace: case {case_id:?}, event {event_id:?} has strong uncertainty on {attribute}")]
    NonProbabilizable {
        case_id: String,
        event_id: String,
        attribute: String,
    },

    #[error("realization does not belong to case {0:?}")]
    ForeignRealization(String),

    #[error("state space exceeded {max_states} states")]
    StateBoundExceeded { max_states: usize },

    #[error("final marking unreachable")]
    FinalMarkingUnreachable,

    #[error("activity alphabet has {available} labels to add but {needed} requested")]
    AlphabetTooSmall { needed: usize, available: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// Resource bounds, as opposed to bad input.
    pub fn is_resource_bound(&self) -> bool {
        matches!(
            self,
            Error::TooManyRealizations { .. }
                | Error::TooManySequences { .. }
                | Error::StateBoundExceeded { .. }
        )
    }
}
