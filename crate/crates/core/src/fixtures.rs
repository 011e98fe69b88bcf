//! The two healthcare traces used throughout the docs and tests: one with
//! strong uncertainty (`ID192-1`) and its weakly uncertain counterpart
//! (`ID192-2`). Timestamps are days of the month.

use crate::model::{
    ActivityInfo, Density, IndeterminacyInfo, TimestampInfo, UncertainEvent, UncertainLog,
    UncertainTrace,
};
use crate::time::Time;

pub fn strong_trace() -> UncertainTrace {
    UncertainTrace::new(
        "ID192-1",
        vec![
            UncertainEvent {
                id: "e1".into(),
                timestamp: TimestampInfo::Certain(Time::from_int(5)),
                activity: ActivityInfo::Certain("NightSweats".into()),
                indeterminacy: IndeterminacyInfo::Indeterminate,
            },
            UncertainEvent {
                id: "e2".into(),
                timestamp: TimestampInfo::Certain(Time::from_int(8)),
                activity: ActivityInfo::Set(["PrTP".to_string(), "SecTP".to_string()].into()),
                indeterminacy: IndeterminacyInfo::Determinate,
            },
            UncertainEvent {
                id: "e3".into(),
                timestamp: TimestampInfo::Interval {
                    lo: Time::from_int(4),
                    hi: Time::from_int(10),
                },
                activity: ActivityInfo::Certain("Splenomeg".into()),
                indeterminacy: IndeterminacyInfo::Determinate,
            },
        ],
    )
}

pub fn weak_trace() -> UncertainTrace {
    UncertainTrace::new(
        "ID192-2",
        vec![
            UncertainEvent {
                id: "e4".into(),
                timestamp: TimestampInfo::Certain(Time::from_int(5)),
                activity: ActivityInfo::Certain("NightSweats".into()),
                indeterminacy: IndeterminacyInfo::Probable { p_absent: 0.25 },
            },
            UncertainEvent {
                id: "e5".into(),
                timestamp: TimestampInfo::Certain(Time::from_int(8)),
                activity: ActivityInfo::Pmf(
                    [("PrTP".to_string(), 0.9), ("SecTP".to_string(), 0.1)].into(),
                ),
                indeterminacy: IndeterminacyInfo::Determinate,
            },
            UncertainEvent {
                id: "e6".into(),
                timestamp: TimestampInfo::Density(Density::Normal {
                    mu: Time::from_int(7),
                    sigma: 1.0,
                }),
                activity: ActivityInfo::Certain("Splenomeg".into()),
                indeterminacy: IndeterminacyInfo::Determinate,
            },
        ],
    )
}

pub fn clinical_log() -> UncertainLog {
    UncertainLog::new(vec![strong_trace(), weak_trace()])
}
