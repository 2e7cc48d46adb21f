//! Mean-based bidding policies and the mean-based auditor.
//!
//! Every policy maps the history statistics through round `t - 1` to a mixed
//! strategy for round `t`. The run loop does the sampling.

mod audit;
mod counterexample;
mod policies;

use serde::{Deserialize, Serialize};

pub use audit::{check_round, mean_based_audit, AuditEntry, GammaSchedule, Violation};
pub use counterexample::{counterexample_policy, CounterexampleState};
pub use policies::{eps_greedy_mix, eps_greedy_policy, ftl_policy, leaders, mwu_policy, softmax};

use crate::auction::ValueProfile;
use crate::error::{config, Result};
use crate::stats::HistoryStats;
use crate::strategy::MixedStrategy;

/// `eps_t = min(1, scale * t^(-exponent))`; the default is `t^(-1/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsSchedule {
    pub scale: f64,
    pub exponent: f64,
}

impl Default for EpsSchedule {
    fn default() -> Self {
        Self {
            scale: 1.0,
            exponent: 0.5,
        }
    }
}

impl EpsSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return config(format!("eps scale must be positive, got {}", self.scale));
        }
        if !(self.exponent.is_finite() && self.exponent >= 0.0) {
            return config(format!("eps exponent must be non-negative, got {}", self.exponent));
        }
        Ok(())
    }

    /// `eps_t` for `t >= 1`; `t = 0` is treated as `t = 1`.
    pub fn eps(&self, t: u64) -> f64 {
        let t = t.max(1) as f64;
        (self.scale * t.powf(-self.exponent)).min(1.0)
    }
}

/// How Follow-the-Leader style picks resolve a tie between leaders.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule", content = "sequence")]
pub enum TieBreak {
    #[default]
    LowestBid,
    HighestBid,
    /// Rotate through the leaders, advancing once per tied round.
    RoundRobin,
    /// Round `t` prefers `sequence[(t - 1) % len]` when it is a leader and
    /// falls back to the lowest leader otherwise.
    Scripted(Vec<u32>),
}

/// Which algorithm a bidder runs, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LearnerSpec {
    Ftl {
        #[serde(default)]
        tiebreak: TieBreak,
    },
    EpsGreedy {
        #[serde(default)]
        schedule: EpsSchedule,
        #[serde(default)]
        tiebreak: TieBreak,
    },
    Mwu {
        #[serde(default)]
        schedule: EpsSchedule,
    },
    Counterexample {
        t0: u64,
    },
    /// Plays `bids` cyclically, ignoring the history.
    Scripted {
        bids: Vec<u32>,
    },
}

/// Multiplier on `eps_t` used when auditing MWU by default. Heuristic: no
/// closed-form `gamma_t` is known for this MWU variant.
pub const MWU_AUDIT_FACTOR: f64 = 5.0;

impl LearnerSpec {
    pub fn ftl() -> Self {
        LearnerSpec::Ftl {
            tiebreak: TieBreak::LowestBid,
        }
    }

    pub fn eps_greedy() -> Self {
        LearnerSpec::EpsGreedy {
            schedule: EpsSchedule::default(),
            tiebreak: TieBreak::LowestBid,
        }
    }

    pub fn mwu() -> Self {
        LearnerSpec::Mwu {
            schedule: EpsSchedule::default(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LearnerSpec::Ftl { .. } => "ftl",
            LearnerSpec::EpsGreedy { .. } => "eps-greedy",
            LearnerSpec::Mwu { .. } => "mwu",
            LearnerSpec::Counterexample { .. } => "counterexample",
            LearnerSpec::Scripted { .. } => "scripted",
        }
    }

    /// The `gamma_t` this algorithm is audited against unless overridden.
    /// Scripted players have none.
    pub fn default_gamma(&self) -> Option<GammaSchedule> {
        match self {
            LearnerSpec::Ftl { .. } => Some(GammaSchedule::Zero),
            LearnerSpec::EpsGreedy { schedule, .. } => Some(GammaSchedule::Eps {
                schedule: *schedule,
                factor: 1.0,
            }),
            LearnerSpec::Mwu { schedule } => Some(GammaSchedule::Eps {
                schedule: *schedule,
                factor: MWU_AUDIT_FACTOR,
            }),
            LearnerSpec::Counterexample { t0 } => Some(GammaSchedule::Counterexample { t0: *t0 }),
            LearnerSpec::Scripted { .. } => None,
        }
    }

    pub fn validate(&self, bidder: usize, values: &ValueProfile) -> Result<()> {
        let value = values.value(bidder);
        let check_tiebreak = |tb: &TieBreak| match tb {
            TieBreak::Scripted(seq) if seq.is_empty() => {
                config(format!("bidder {bidder}: scripted tie-break sequence is empty"))
            }
            _ => Ok(()),
        };
        match self {
            LearnerSpec::Ftl { tiebreak } => check_tiebreak(tiebreak),
            LearnerSpec::EpsGreedy { schedule, tiebreak } => {
                schedule.validate()?;
                check_tiebreak(tiebreak)
            }
            LearnerSpec::Mwu { schedule } => schedule.validate(),
            LearnerSpec::Counterexample { t0 } => {
                if value != 3 {
                    return config(format!(
                        "bidder {bidder}: the counterexample algorithm needs value 3, got {value}"
                    ));
                }
                CounterexampleState::new(*t0).map(|_| ())
            }
            LearnerSpec::Scripted { bids } => {
                if bids.is_empty() {
                    return config(format!("bidder {bidder}: empty script"));
                }
                match bids.iter().find(|&&b| b >= value) {
                    Some(b) => config(format!(
                        "bidder {bidder}: scripted bid {b} outside bid set 0..{value}"
                    )),
                    None => Ok(()),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum LearnerState {
    Stateless,
    RoundRobin { cursor: u64 },
    Counterexample(CounterexampleState),
}

/// A learner bound to one bidder of one run, owning its mutable state.
#[derive(Debug, Clone, PartialEq)]
pub struct Learner {
    spec: LearnerSpec,
    bidder: usize,
    cap: u32,
    state: LearnerState,
}

impl Learner {
    pub fn new(spec: LearnerSpec, bidder: usize, values: &ValueProfile) -> Result<Self> {
        spec.validate(bidder, values)?;
        let state = match &spec {
            LearnerSpec::Counterexample { t0 } => {
                LearnerState::Counterexample(CounterexampleState::new(*t0)?)
            }
            LearnerSpec::Ftl {
                tiebreak: TieBreak::RoundRobin,
            }
            | LearnerSpec::EpsGreedy {
                tiebreak: TieBreak::RoundRobin,
                ..
            } => LearnerState::RoundRobin { cursor: 0 },
            _ => LearnerState::Stateless,
        };
        Ok(Self {
            spec,
            bidder,
            cap: values.cap(),
            state,
        })
    }

    pub fn spec(&self) -> &LearnerSpec {
        &self.spec
    }

    pub fn bidder(&self) -> usize {
        self.bidder
    }

    /// Mixed strategy for round `t`, given statistics through round `t - 1`.
    pub fn strategy(&mut self, stats: &HistoryStats, t: u64) -> MixedStrategy {
        let i = self.bidder;
        match (&self.spec, &mut self.state) {
            (LearnerSpec::Ftl { tiebreak }, state) => {
                let pick = pick_leader(stats, i, t, tiebreak, state);
                MixedStrategy::point_mass(stats.bid_count(i), pick)
            }
            (LearnerSpec::EpsGreedy { schedule, tiebreak }, state) => {
                let pick = pick_leader(stats, i, t, tiebreak, state);
                eps_greedy_mix(stats.bid_count(i), pick, schedule.eps(t))
            }
            (LearnerSpec::Mwu { schedule }, _) => mwu_policy(stats, i, t, schedule),
            (LearnerSpec::Counterexample { .. }, LearnerState::Counterexample(cs)) => {
                counterexample_policy(cs, t, stats, i, self.cap)
            }
            (LearnerSpec::Counterexample { .. }, _) => unreachable!("state built in Learner::new"),
            (LearnerSpec::Scripted { bids }, _) => {
                let bid = bids[((t.max(1) - 1) % bids.len() as u64) as usize];
                MixedStrategy::point_mass(stats.bid_count(i), bid)
            }
        }
    }
}

fn pick_leader(stats: &HistoryStats, i: usize, t: u64, tiebreak: &TieBreak, state: &mut LearnerState) -> u32 {
    let leaders = leaders(stats, i);
    match (tiebreak, state) {
        (TieBreak::RoundRobin, LearnerState::RoundRobin { cursor }) => {
            if leaders.len() == 1 {
                leaders[0]
            } else {
                let pick = leaders[(*cursor % leaders.len() as u64) as usize];
                *cursor += 1;
                pick
            }
        }
        (tb, _) => policies::resolve_tie(&leaders, t, tb),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_schedule_defaults_to_inverse_sqrt() {
        let s = EpsSchedule::default();
        assert_eq!(s.eps(1), 1.0);
        assert!((s.eps(4) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for t in 1..1000 {
            let e = s.eps(t);
            assert!(e > 0.0 && e <= prev);
            prev = e;
        }
        let loud = EpsSchedule { scale: 3.0, exponent: 0.5 };
        assert_eq!(loud.eps(1), 1.0);
        assert!(loud.eps(100) < 1.0);
    }

    #[test]
    fn spec_validation() {
        let v = ValueProfile::new(vec![4, 3]).unwrap();
        assert!(LearnerSpec::Counterexample { t0: 1000 }.validate(0, &v).is_err());
        assert!(LearnerSpec::Scripted { bids: vec![3] }.validate(1, &v).is_err());
        assert!(LearnerSpec::Scripted { bids: vec![] }.validate(0, &v).is_err());
        assert!(LearnerSpec::Ftl {
            tiebreak: TieBreak::Scripted(vec![])
        }
        .validate(0, &v)
        .is_err());
        assert!(LearnerSpec::EpsGreedy {
            schedule: EpsSchedule { scale: 0.0, exponent: 0.5 },
            tiebreak: TieBreak::LowestBid
        }
        .validate(0, &v)
        .is_err());
        let v3 = ValueProfile::new(vec![3, 3]).unwrap();
        assert!(LearnerSpec::Counterexample { t0: 3 }.validate(0, &v3).is_err());
        assert!(LearnerSpec::Counterexample { t0: 4 }.validate(0, &v3).is_ok());
    }

    #[test]
    fn spec_json_shape() {
        let spec = LearnerSpec::EpsGreedy {
            schedule: EpsSchedule::default(),
            tiebreak: TieBreak::Scripted(vec![6, 1, 1]),
        };
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(
            json,
            r#"{"kind":"eps-greedy","schedule":{"scale":1.0,"exponent":0.5},"tiebreak":{"rule":"scripted","sequence":[6,1,1]}}"#
        );
        let back: LearnerSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        let short: LearnerSpec = serde_json::from_str(r#"{"kind":"ftl"}"#).unwrap();
        assert_eq!(short, LearnerSpec::ftl());
    }

    #[test]
    fn round_robin_rotates_through_leaders() {
        let v = ValueProfile::new(vec![3, 3]).unwrap();
        let stats = HistoryStats::new(&v);
        let mut l = Learner::new(
            LearnerSpec::Ftl {
                tiebreak: TieBreak::RoundRobin,
            },
            0,
            &v,
        )
        .unwrap();
        let picks: Vec<u32> = (1..=4).map(|t| l.strategy(&stats, t).argmax()).collect();
        assert_eq!(picks, vec![0, 1, 2, 0]);
    }

    #[test]
    fn scripted_learner_cycles() {
        let v = ValueProfile::new(vec![4, 4]).unwrap();
        let stats = HistoryStats::new(&v);
        let mut l = Learner::new(LearnerSpec::Scripted { bids: vec![3, 1] }, 1, &v).unwrap();
        let picks: Vec<u32> = (1..=3).map(|t| l.strategy(&stats, t).argmax()).collect();
        assert_eq!(picks, vec![3, 1, 3]);
    }
}
