//! Synthetic uncertainty for experiments on crisp logs.

use rand::seq::IteratorRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{ActivityInfo, IndeterminacyInfo, TimestampInfo, UncertainLog};
use crate::time::Time;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Injection {
    /// Chance that a certain timestamp `t` becomes `[t - magnitude, t + magnitude]`.
    pub timestamp_rate: f64,
    /// Chance that a certain label gains `extra_labels` others from the alphabet.
    pub activity_rate: f64,
    /// Chance that a determinate event becomes indeterminate (`?`).
    pub indeterminacy_rate: f64,
    pub magnitude: Time,
    pub extra_labels: usize,
    pub seed: u64,
}

/// Adds strong uncertainty to the certain attributes of `log`.
///
/// Each event draws three uniform numbers (timestamp, activity,
/// indeterminacy) in that order, whether or not they apply, so the outcome
/// for one attribute does not shift the stream for later events.
pub fn inject(log: &UncertainLog, cfg: &Injection) -> Result<UncertainLog> {
    for (name, rate) in [
        ("timestamp rate", cfg.timestamp_rate),
        ("activity rate", cfg.activity_rate),
        ("indeterminacy rate", cfg.indeterminacy_rate),
    ] {
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::InvalidParameter(format!("{name} must be in [0,1], got {rate}")));
        }
    }
    if cfg.magnitude < Time::default() {
        return Err(Error::InvalidParameter("magnitude must be non-negative".into()));
    }
    let alphabet = log.alphabet();
    if cfg.activity_rate > 0.0 && cfg.extra_labels > 0 {
        let available = alphabet.len().saturating_sub(1);
        if available < cfg.extra_labels {
            return Err(Error::AlphabetTooSmall { needed: cfg.extra_labels, available });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = log.clone();
    for ev in out.traces.iter_mut().flat_map(|t| t.events.iter_mut()) {
        let (r_ts, r_act, r_ind): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
        if let TimestampInfo::Certain(t) = ev.timestamp {
            if r_ts < cfg.timestamp_rate {
                let lo = t.checked_sub(cfg.magnitude);
                let hi = t.checked_add(cfg.magnitude);
                let (Some(lo), Some(hi)) = (lo, hi) else {
                    return Err(Error::InvalidParameter(format!("interval around {t} overflows")));
                };
                ev.timestamp = TimestampInfo::Interval { lo, hi };
            }
        }
        if let ActivityInfo::Certain(label) = &ev.activity {
            if r_act < cfg.activity_rate && cfg.extra_labels > 0 {
                let mut set: std::collections::BTreeSet<String> = alphabet
                    .iter()
                    .filter(|l| *l != label)
                    .cloned()
                    .choose_multiple(&mut rng, cfg.extra_labels)
                    .into_iter()
                    .collect();
                set.insert(label.clone());
                ev.activity = ActivityInfo::Set(set);
            }
        }
        if ev.indeterminacy == IndeterminacyInfo::Determinate && r_ind < cfg.indeterminacy_rate {
            ev.indeterminacy = IndeterminacyInfo::Indeterminate;
        }
    }
    Ok(out)
}
