//! Process mining over uncertain event data.
//!
//! An uncertain event may carry a set of possible activity labels or a
//! distribution over them, an interval or a density for its timestamp, and a
//! mark (or probability) saying it might not have happened at all. Nothing is
//! filtered away: every trace is turned into the behavior it admits.
//!
//! ```text
//! uel-1 log --parse--> UncertainLog
//!   trace --build_optimized--> BehaviorGraph --to_behavior_net--> PetriNet
//!   trace --enumerate--> realizations (+ probabilities)
//!   log   --udfg--> directly-follows bounds
//!   trace + model --conformance_bounds--> alignment cost bounds
//! ```

pub mod behavior_graph;
pub mod behavior_net;
pub mod conformance;
pub mod discovery;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod model;
pub mod petri;
pub mod realizations;
pub mod reduction;
pub mod time;

pub use behavior_graph::{build_baseline, build_optimized, strictly_precedes, BehaviorGraph, BehaviorNode};
pub use behavior_net::to_behavior_net;
pub use conformance::{align, conformance_bounds, AlignmentResult, ConformanceBounds, ConformanceConfig, Move};
pub use discovery::{filter_udfg, udfg, Bounds, DiscoveryConfig, Statistic, Udfg};
pub use error::{Error, Result};
pub use model::{
    classify, support, validate_log, ActivityInfo, Density, IndeterminacyInfo, SupportMass, TimestampInfo,
    UncertainEvent, UncertainLog, UncertainTrace, UncertaintyProfile, Violation,
};
pub use petri::{check_soundness, fire_sequences, Arc, Marking, PetriNet, Soundness};
pub use realizations::{
    enumerate, enumerate_with_probabilities, expected_counts, probability, ProbabilityConfig, Realization, Step,
};
pub use reduction::transitive_reduction;
pub use time::Time;
