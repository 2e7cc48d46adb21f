//! Incremental history statistics for every bidder.
//!
//! All accumulators are integers. Rewards and tie masses are scaled by
//! `L = lcm(1..=N)` so every tie share is exact; averages are exposed both as
//! exact rationals and as `f64` views.

use serde::{Deserialize, Serialize};

use crate::auction::{max_and_count, scaled_utility, validate_bids, BidProfile, Rational, ValueProfile};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct BidderStats {
    value: u32,
    /// `sum_s u(b, b_s^{-i}) * L` per own bid `b`.
    reward_sum: Vec<u128>,
    /// Rounds in which the opponents' maximum bid was `k`, per level `k`.
    opp_max_count: Vec<u64>,
    /// `sum_s [max_{j != i} b_s^j = k] * L / (|argmax_{j != i}| + 1)` per level `k`.
    tie_mass: Vec<u128>,
    own_count: Vec<u64>,
}

/// `alpha`, `P`, `Q` and `f` for every bidder after `t` rounds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryStats {
    t: u64,
    scale: u128,
    bidders: Vec<BidderStats>,
}

impl HistoryStats {
    pub fn new(values: &ValueProfile) -> Self {
        let levels = values.cap() as usize;
        let bidders = values
            .values()
            .iter()
            .map(|&v| BidderStats {
                value: v,
                reward_sum: vec![0; v as usize],
                opp_max_count: vec![0; levels],
                tie_mass: vec![0; levels],
                own_count: vec![0; v as usize],
            })
            .collect();
        Self {
            t: 0,
            scale: values.tie_scale(),
            bidders,
        }
    }

    /// Replay a whole trace from empty statistics.
    pub fn from_trace<'a>(values: &ValueProfile, trace: impl IntoIterator<Item = &'a [u32]>) -> Result<Self> {
        let mut stats = Self::new(values);
        for bids in trace {
            validate_bids(bids, values)?;
            stats.record(bids);
        }
        Ok(stats)
    }

    /// Fold one realized profile into the statistics.
    pub fn update(&mut self, profile: &BidProfile) {
        self.record(profile.bids());
    }

    pub(crate) fn record(&mut self, bids: &[u32]) {
        debug_assert_eq!(bids.len(), self.bidders.len());
        let scale = self.scale;
        for (i, bs) in self.bidders.iter_mut().enumerate() {
            let (m, c) = max_and_count(
                bids.iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &b)| b),
            );
            for (b, sum) in bs.reward_sum.iter_mut().enumerate() {
                *sum += scaled_utility(bs.value, b as u32, m, c, scale);
            }
            bs.opp_max_count[m as usize] += 1;
            bs.tie_mass[m as usize] += scale / (c as u128 + 1);
            bs.own_count[bids[i] as usize] += 1;
        }
        self.t += 1;
    }

    /// Number of rounds folded in so far.
    pub fn rounds(&self) -> u64 {
        self.t
    }

    pub fn n(&self) -> usize {
        self.bidders.len()
    }

    /// `L`, the common denominator of the scaled accumulators.
    pub fn scale(&self) -> u128 {
        self.scale
    }

    pub fn bid_count(&self, i: usize) -> usize {
        self.bidders[i].reward_sum.len()
    }

    /// Number of levels tracked by `P` and `Q` (the cap `V`).
    pub fn levels(&self) -> usize {
        self.bidders[0].opp_max_count.len()
    }

    /// Cumulative counterfactual rewards of bidder `i`, scaled by `L`.
    pub fn scaled_reward_sums(&self, i: usize) -> &[u128] {
        &self.bidders[i].reward_sum
    }

    /// Cumulative counterfactual reward `S_t(b)` as a float.
    pub fn cumulative_reward(&self, i: usize, bid: u32) -> f64 {
        self.bidders[i].reward_sum[bid as usize] as f64 / self.scale as f64
    }

    pub fn own_counts(&self, i: usize) -> &[u64] {
        &self.bidders[i].own_count
    }

    /// `alpha_t^i(b)`; zero before the first round.
    pub fn alpha(&self, i: usize, bid: u32) -> f64 {
        if self.t == 0 {
            return 0.0;
        }
        self.bidders[i].reward_sum[bid as usize] as f64 / (self.scale as f64 * self.t as f64)
    }

    pub fn alphas(&self, i: usize) -> Vec<f64> {
        (0..self.bid_count(i) as u32).map(|b| self.alpha(i, b)).collect()
    }

    pub fn alpha_exact(&self, i: usize, bid: u32) -> Rational {
        self.ratio(self.bidders[i].reward_sum[bid as usize], self.scale)
    }

    /// `P_t^i(k)`: frequency of the opponents' maximum bid being `k`.
    pub fn p(&self, i: usize, level: u32) -> f64 {
        if self.t == 0 {
            return 0.0;
        }
        self.bidders[i].opp_max_count[level as usize] as f64 / self.t as f64
    }

    pub fn p_exact(&self, i: usize, level: u32) -> Rational {
        self.ratio(self.bidders[i].opp_max_count[level as usize] as u128, 1)
    }

    /// `P_t^i(0:level)`, the cumulative form. `level = -1` is the empty sum,
    /// passed here as `None`.
    pub fn p_upto_exact(&self, i: usize, level: Option<u32>) -> Rational {
        let Some(level) = level else {
            return Rational::from_integer(0);
        };
        let count: u64 = self.bidders[i].opp_max_count[..=level as usize].iter().sum();
        self.ratio(count as u128, 1)
    }

    /// `Q_t^i(k)`: tie-weighted winning mass of bid `k` against the history.
    pub fn q(&self, i: usize, level: u32) -> f64 {
        if self.t == 0 {
            return 0.0;
        }
        self.bidders[i].tie_mass[level as usize] as f64 / (self.scale as f64 * self.t as f64)
    }

    pub fn q_exact(&self, i: usize, level: u32) -> Rational {
        self.ratio(self.bidders[i].tie_mass[level as usize], self.scale)
    }

    /// `f_t^i(b)`: bidder `i`'s own empirical bid frequency.
    pub fn f(&self, i: usize, bid: u32) -> f64 {
        if self.t == 0 {
            return 0.0;
        }
        self.bidders[i].own_count[bid as usize] as f64 / self.t as f64
    }

    pub fn frequencies(&self, i: usize) -> Vec<f64> {
        (0..self.bid_count(i) as u32).map(|b| self.f(i, b)).collect()
    }

    pub fn f_exact(&self, i: usize, bid: u32) -> Rational {
        self.ratio(self.bidders[i].own_count[bid as usize] as u128, 1)
    }

    fn ratio(&self, numer: u128, denom_scale: u128) -> Rational {
        if self.t == 0 {
            return Rational::from_integer(0);
        }
        Rational::new(numer as i128, denom_scale as i128 * self.t as i128)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vp(v: &[u32]) -> ValueProfile {
        ValueProfile::new(v.to_vec()).unwrap()
    }

    #[test]
    fn empty_history_is_all_zero() {
        let v = vp(&[3, 3, 2]);
        let s = HistoryStats::new(&v);
        assert_eq!(s.rounds(), 0);
        for i in 0..3 {
            for b in 0..v.value(i) {
                assert_eq!(s.alpha(i, b), 0.0);
                assert_eq!(s.f(i, b), 0.0);
                assert_eq!(s.alpha_exact(i, b), Rational::from_integer(0));
            }
            for k in 0..3 {
                assert_eq!(s.p(i, k), 0.0);
                assert_eq!(s.q(i, k), 0.0);
            }
        }
    }

    #[test]
    fn one_round_rewards() {
        // Against an opponent bid of 0: bid 0 ties (3/2), bid 1 wins (2), bid 2 wins (1).
        let v = vp(&[3, 3]);
        let mut s = HistoryStats::new(&v);
        s.update(&BidProfile::new(vec![1, 0], &v).unwrap());
        assert_eq!(s.alpha_exact(0, 0), Rational::new(3, 2));
        assert_eq!(s.alpha_exact(0, 1), Rational::from_integer(2));
        assert_eq!(s.alpha_exact(0, 2), Rational::from_integer(1));
        assert_eq!(s.p_exact(0, 0), Rational::from_integer(1));
        assert_eq!(s.q_exact(0, 0), Rational::new(1, 2));
        assert_eq!(s.f_exact(0, 1), Rational::from_integer(1));
    }

    #[test]
    fn two_bidder_alpha_gap_matches_opponent_frequencies() {
        // f^{3-i}(0) - f^{3-i}(2)/2 with opponent history [0, 1].
        let v = vp(&[3, 3]);
        let s = HistoryStats::from_trace(&v, [&[2u32, 0][..], &[2, 1][..]]).unwrap();
        let gap = s.alpha_exact(0, 1) - s.alpha_exact(0, 2);
        let expected = s.f_exact(1, 0) - s.f_exact(1, 2) / 2;
        assert_eq!(gap, expected);
        assert_eq!(gap, Rational::new(1, 2));
    }

    #[test]
    fn from_trace_rejects_invalid_bids() {
        let v = vp(&[3, 3]);
        assert!(HistoryStats::from_trace(&v, [&[3u32, 0][..]]).is_err());
    }
}
