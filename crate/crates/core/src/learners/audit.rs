use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Result};
use crate::strategy::MixedStrategy;

use super::{CounterexampleState, EpsSchedule};

/// Slack on the probability bound, absorbing float rounding in the policies.
pub const PROB_SLACK: f64 = 1e-12;

/// `t -> gamma_t`, non-increasing with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GammaSchedule {
    Zero,
    /// `min(1, factor * eps_t)`.
    Eps { schedule: EpsSchedule, factor: f64 },
    /// `1` through `T_0`, then `T_k^(-1/4)` on `(T_k, T_{k+1}]`.
    Counterexample { t0: u64 },
    /// Explicit values for `t = 1..=len`.
    Table { values: Vec<f64> },
}

impl GammaSchedule {
    pub fn validate(&self) -> Result<()> {
        match self {
            GammaSchedule::Zero => Ok(()),
            GammaSchedule::Eps { schedule, factor } => {
                schedule.validate()?;
                if !(factor.is_finite() && *factor > 0.0) {
                    return config(format!("gamma factor must be positive, got {factor}"));
                }
                Ok(())
            }
            GammaSchedule::Counterexample { t0 } => CounterexampleState::new(*t0).map(|_| ()),
            GammaSchedule::Table { values } => {
                if values.iter().any(|g| !(0.0..=1.0).contains(g)) {
                    return config("gamma table entries must lie in [0, 1]");
                }
                if values.windows(2).any(|w| w[1] > w[0]) {
                    return config("gamma table must be non-increasing");
                }
                Ok(())
            }
        }
    }

    /// Number of rounds covered, `None` when unbounded.
    pub fn horizon(&self) -> Option<u64> {
        match self {
            GammaSchedule::Table { values } => Some(values.len() as u64),
            _ => None,
        }
    }

    /// `gamma_t` for `t >= 1`. Table lookups past the end return 0.
    pub fn value(&self, t: u64) -> f64 {
        match self {
            GammaSchedule::Zero => 0.0,
            GammaSchedule::Eps { schedule, factor } => (factor * schedule.eps(t)).min(1.0),
            GammaSchedule::Counterexample { t0 } => CounterexampleState::new(*t0)
                .map(|mut s| s.gamma(t))
                .unwrap_or(1.0),
            GammaSchedule::Table { values } => values
                .get((t.max(1) - 1) as usize)
                .copied()
                .unwrap_or(0.0),
        }
    }
}

/// Pre-round averages `alpha_{t-1}` and the strategy those averages produced
/// for round `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub t: u64,
    pub alphas: Vec<f64>,
    pub strategy: MixedStrategy,
}

/// A bid played with probability above `gamma_t` although another bid led it
/// by more than `V * gamma_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub bidder: usize,
    pub t: u64,
    pub bid: u32,
    pub better_bid: u32,
    pub gap: f64,
    pub prob: f64,
}

/// Violations in a single round, with `gamma = gamma_t` already evaluated.
/// `better_bid` is the bid with the largest lead.
pub fn check_round(bidder: usize, t: u64, alphas: &[f64], strategy: &MixedStrategy, gamma: f64, cap: u32) -> Vec<Violation> {
    let (best_bid, best) = alphas
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (b, a)| if a > acc.1 { (b, a) } else { acc });
    let threshold = cap as f64 * gamma;
    alphas
        .iter()
        .enumerate()
        .filter_map(|(b, &a)| {
            let gap = best - a;
            let prob = strategy.prob(b as u32);
            (gap > threshold && prob > gamma + PROB_SLACK).then_some(Violation {
                bidder,
                t,
                bid: b as u32,
                better_bid: best_bid as u32,
                gap,
                prob,
            })
        })
        .collect()
}

/// Check a bidder's trace against the `gamma_t`-mean-based condition.
/// An empty result means the trace is `gamma_t`-mean-based.
pub fn mean_based_audit(bidder: usize, entries: &[AuditEntry], gamma: &GammaSchedule, cap: u32) -> Result<Vec<Violation>> {
    gamma.validate()?;
    if let (Some(horizon), Some(last)) = (gamma.horizon(), entries.iter().map(|e| e.t).max()) {
        if last > horizon {
            return domain(format!(
                "gamma table covers {horizon} rounds but the trace reaches round {last}"
            ));
        }
    }
    let mut out = Vec::new();
    for e in entries {
        if e.t == 0 {
            return domain("audit entries start at round 1");
        }
        if e.alphas.len() != e.strategy.len() {
            return domain(format!(
                "round {}: {} averages for a strategy over {} bids",
                e.t,
                e.alphas.len(),
                e.strategy.len()
            ));
        }
        out.extend(check_round(bidder, e.t, &e.alphas, &e.strategy, gamma.value(e.t), cap));
    }
    Ok(out)
}
