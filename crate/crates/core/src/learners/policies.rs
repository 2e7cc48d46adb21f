use crate::stats::HistoryStats;
use crate::strategy::MixedStrategy;

use super::{EpsSchedule, TieBreak};

/// Bids maximizing `alpha_{t-1}^i`, ascending. Compared on the exact scaled
/// sums, so ties are exact.
pub fn leaders(stats: &HistoryStats, i: usize) -> Vec<u32> {
    let sums = stats.scaled_reward_sums(i);
    let best = sums.iter().copied().max().unwrap_or(0);
    sums.iter()
        .enumerate()
        .filter(|(_, &s)| s == best)
        .map(|(b, _)| b as u32)
        .collect()
}

pub(crate) fn resolve_tie(leaders: &[u32], t: u64, tiebreak: &TieBreak) -> u32 {
    match tiebreak {
        TieBreak::LowestBid | TieBreak::RoundRobin => leaders[0],
        TieBreak::HighestBid => *leaders.last().expect("non-empty bid set"),
        TieBreak::Scripted(seq) => {
            let wanted = seq[((t.max(1) - 1) % seq.len() as u64) as usize];
            if leaders.contains(&wanted) {
                wanted
            } else {
                leaders[0]
            }
        }
    }
}

/// Follow the Leader: point mass on a leader of `alpha_{t-1}^i`.
///
/// Round-robin needs a cursor; through this stateless entry point it
/// behaves like lowest-bid. [`super::Learner`] carries the cursor.
pub fn ftl_policy(stats: &HistoryStats, i: usize, t: u64, tiebreak: &TieBreak) -> MixedStrategy {
    let pick = resolve_tie(&leaders(stats, i), t, tiebreak);
    MixedStrategy::point_mass(stats.bid_count(i), pick)
}

/// `(1 - eps)` on the leader plus `eps / |B|` everywhere.
pub fn eps_greedy_policy(stats: &HistoryStats, i: usize, t: u64, eps: f64, tiebreak: &TieBreak) -> MixedStrategy {
    let pick = resolve_tie(&leaders(stats, i), t, tiebreak);
    eps_greedy_mix(stats.bid_count(i), pick, eps)
}

pub fn eps_greedy_mix(len: usize, pick: u32, eps: f64) -> MixedStrategy {
    let floor = eps / len as f64;
    let mut probs = vec![floor; len];
    probs[pick as usize] += 1.0 - eps;
    MixedStrategy::from_vec_unchecked(probs)
}

/// MWU over cumulative rewards: `x_t(b) ~ exp(eps_{t-1} * S_{t-1}(b))`.
/// Uniform at `t = 1`.
pub fn mwu_policy(stats: &HistoryStats, i: usize, t: u64, schedule: &EpsSchedule) -> MixedStrategy {
    let len = stats.bid_count(i);
    if t <= 1 || stats.rounds() == 0 {
        return MixedStrategy::uniform(len);
    }
    let sums: Vec<f64> = (0..len as u32).map(|b| stats.cumulative_reward(i, b)).collect();
    softmax(&sums, schedule.eps(t - 1))
}

/// `exp(rate * s_b) / sum exp(rate * s_b')`, evaluated after subtracting the
/// maximum.
pub fn softmax(sums: &[f64], rate: f64) -> MixedStrategy {
    let max = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = sums.iter().map(|&s| (rate * (s - max)).exp()).collect();
    let total: f64 = weights.iter().sum();
    MixedStrategy::from_vec_unchecked(weights.into_iter().map(|w| w / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auction::ValueProfile;

    fn stats_for(values: &[u32], trace: &[&[u32]]) -> HistoryStats {
        let v = ValueProfile::new(values.to_vec()).unwrap();
        HistoryStats::from_trace(&v, trace.iter().copied()).unwrap()
    }

    #[test]
    fn ftl_follows_the_unique_leader() {
        // Opponent history [0, 1]: alpha = (0.75, 1.5, 1.0).
        let s = stats_for(&[3, 3], &[&[0, 0], &[0, 1]]);
        let alphas = s.alphas(0);
        assert_eq!(alphas, vec![0.75, 1.5, 1.0]);
        let x = ftl_policy(&s, 0, 3, &TieBreak::HighestBid);
        assert_eq!(x.probs(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn ftl_ties_use_the_rule() {
        let s = stats_for(&[4, 4], &[]);
        assert_eq!(ftl_policy(&s, 0, 1, &TieBreak::LowestBid).argmax(), 0);
        assert_eq!(ftl_policy(&s, 0, 1, &TieBreak::HighestBid).argmax(), 3);
        assert_eq!(ftl_policy(&s, 0, 2, &TieBreak::Scripted(vec![1, 2])).argmax(), 2);
    }

    #[test]
    fn eps_greedy_mass() {
        let s = stats_for(&[4, 4], &[]);
        let x = eps_greedy_policy(&s, 0, 1, 1.0, &TieBreak::LowestBid);
        assert_eq!(x.probs(), &[0.25; 4]);
        let x = eps_greedy_mix(4, 2, 0.5);
        assert_eq!(x.probs(), &[0.125, 0.125, 0.625, 0.125]);
    }

    #[test]
    fn softmax_values() {
        let x = softmax(&[0.0, 2.0, 1.0], 1.0);
        let e = std::f64::consts::E;
        let z = 1.0 + e * e + e;
        let expected = [1.0 / z, e * e / z, e / z];
        for (p, q) in x.probs().iter().zip(expected) {
            assert!((p - q).abs() < 1e-15);
        }
        assert!((x.prob(0) - 0.0900).abs() < 5e-5);
        assert!((x.prob(1) - 0.6652).abs() < 5e-5);
        assert!((x.prob(2) - 0.2447).abs() < 5e-5);
    }

    #[test]
    fn mwu_starts_uniform() {
        let s = stats_for(&[4, 4], &[]);
        let x = mwu_policy(&s, 0, 1, &EpsSchedule { scale: 1.0, exponent: 0.0 });
        assert_eq!(x.probs(), &[0.25; 4]);
        let x = softmax(&[5.0; 3], 2.0);
        for p in x.probs() {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }
}
