//! A `gamma_t`-mean-based algorithm for two bidders with value 3 whose
//! mixed strategy returns to the point mass on bid 2 at every epoch boundary
//! `T_k + 1`, with `T_k = 32^k * T_0`, while its time average drifts to bid 1.
//!
//! Phases:
//! - `t <= T_0 - ceil(T_0^(2/3))`: bid 1.
//! - `t <= T_0`: bid 0.
//! - `t = T_k + 1`, the leader is 1 and `alpha(1) - alpha(2) < V * gamma_t`: bid 2.
//! - otherwise: the leader with probability `1 - T_{k+1}^(-1/3)`, else bid 0.

use crate::error::{config, Result};
use crate::stats::HistoryStats;
use crate::strategy::MixedStrategy;

use super::leaders;

/// Epoch bookkeeping for one bidder running the counterexample algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleState {
    t0: u64,
    epoch: u32,
    /// `T_0, T_1, ...`, extended lazily; saturates at `u64::MAX`.
    boundaries: Vec<u64>,
}

impl CounterexampleState {
    pub fn new(t0: u64) -> Result<Self> {
        if t0 < 4 {
            return config(format!("counterexample T0 must be at least 4, got {t0}"));
        }
        Ok(Self {
            t0,
            epoch: 0,
            boundaries: vec![t0],
        })
    }

    pub fn t0(&self) -> u64 {
        self.t0
    }

    /// Epoch of the most recent round handed to the policy.
    pub fn epoch(&self) -> u32 {
        self.epoch
    }

    /// Whether `T_0 > 640` and `exp(-T_0^(1/3) / 900) <= 1/16`, the condition
    /// under which non-convergence has probability at least 1/2.
    pub fn theory_bound_met(&self) -> bool {
        self.t0 > 640 && (-(self.t0 as f64).cbrt() / 900.0).exp() <= 1.0 / 16.0
    }

    /// `ceil(T_0^(2/3))`, the length of the bid-0 warm-up phase.
    pub fn zero_phase_len(&self) -> u64 {
        let square = self.t0 as u128 * self.t0 as u128;
        let mut m = (square as f64).cbrt().floor() as u128;
        while m * m * m < square {
            m += 1;
        }
        while m > 0 && (m - 1) * (m - 1) * (m - 1) >= square {
            m -= 1;
        }
        m as u64
    }

    /// Last round of the bid-1 warm-up phase.
    pub fn one_phase_end(&self) -> u64 {
        self.t0.saturating_sub(self.zero_phase_len())
    }

    /// `T_k = 32^k * T_0`.
    pub fn boundary(&mut self, k: u32) -> u64 {
        while self.boundaries.len() <= k as usize {
            let last = *self.boundaries.last().expect("seeded with T0");
            self.boundaries.push(last.saturating_mul(32));
        }
        self.boundaries[k as usize]
    }

    /// The `k` with `T_k + 1 <= t <= T_{k+1}`, for `t > T_0`. Epochs only
    /// move forward, so the cached index is a starting point.
    pub fn epoch_of(&mut self, t: u64) -> u32 {
        debug_assert!(t > self.t0);
        let mut k = if t > self.boundary(self.epoch) { self.epoch } else { 0 };
        while t > self.boundary(k + 1) {
            k += 1;
        }
        k
    }

    /// `gamma_t`: 1 through `T_0`, then `T_k^(-1/4)` on `(T_k, T_{k+1}]`.
    pub fn gamma(&mut self, t: u64) -> f64 {
        if t <= self.t0 {
            return 1.0;
        }
        let k = self.epoch_of(t);
        (self.boundary(k) as f64).powf(-0.25)
    }
}

/// Mixed strategy of the counterexample algorithm at round `t`.
pub fn counterexample_policy(
    state: &mut CounterexampleState,
    t: u64,
    stats: &HistoryStats,
    i: usize,
    cap: u32,
) -> MixedStrategy {
    let len = stats.bid_count(i);
    if t <= state.one_phase_end() {
        return MixedStrategy::point_mass(len, 1);
    }
    if t <= state.t0 {
        return MixedStrategy::point_mass(len, 0);
    }
    let k = state.epoch_of(t);
    state.epoch = k;
    let start = state.boundary(k);
    let leader = leaders(stats, i)[0];
    if t == start + 1 && leader == 1 {
        let gap = stats.alpha(i, 1) - stats.alpha(i, 2);
        if gap < cap as f64 * state.gamma(t) {
            return MixedStrategy::point_mass(len, 2);
        }
    }
    let lapse = (state.boundary(k + 1) as f64).powf(-1.0 / 3.0);
    let mut probs = vec![0.0; len];
    probs[leader as usize] += 1.0 - lapse;
    probs[0] += lapse;
    MixedStrategy::from_vec_unchecked(probs)
}
