//! The one-shot first price auction: values, bid profiles and utilities.
//!
//! The highest bid wins and pays its bid; ties are split uniformly, so the
//! expected utility of a tied winner is `(v - b) / |argmax|`.

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Exact rational used for utilities and statistic views.
pub type Rational = Ratio<i128>;

/// Upper bound on the number of bidders. Tie shares are kept exact by scaling
/// by `lcm(1..=N)`, which must stay small enough for 128-bit accumulators.
pub const MAX_BIDDERS: usize = 32;

/// Fixed private values `v^1..v^N` together with the cap `V`.
///
/// Values are stored in the order they were given; the top and second groups
/// are computed from the values, never assumed from the order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawValueProfile", into = "RawValueProfile")]
pub struct ValueProfile {
    values: Vec<u32>,
    cap: u32,
}

#[derive(Serialize, Deserialize)]
struct RawValueProfile {
    values: Vec<u32>,
    #[serde(default)]
    cap: Option<u32>,
}

impl TryFrom<RawValueProfile> for ValueProfile {
    type Error = Error;

    fn try_from(raw: RawValueProfile) -> Result<Self> {
        match raw.cap {
            Some(cap) => ValueProfile::with_cap(raw.values, cap),
            None => ValueProfile::new(raw.values),
        }
    }
}

impl From<ValueProfile> for RawValueProfile {
    fn from(v: ValueProfile) -> Self {
        RawValueProfile {
            values: v.values,
            cap: Some(v.cap),
        }
    }
}

impl ValueProfile {
    /// Values with the cap set to the largest value.
    pub fn new(values: Vec<u32>) -> Result<Self> {
        let cap = values.iter().copied().max().unwrap_or(0);
        Self::with_cap(values, cap)
    }

    pub fn with_cap(values: Vec<u32>, cap: u32) -> Result<Self> {
        if values.len() < 2 {
            return domain(format!("need at least 2 bidders, got {}", values.len()));
        }
        if values.len() > MAX_BIDDERS {
            return domain(format!(
                "at most {MAX_BIDDERS} bidders supported, got {}",
                values.len()
            ));
        }
        if let Some((i, &v)) = values.iter().enumerate().find(|(_, &v)| v == 0 || v > cap) {
            return domain(format!("value of bidder {i} is {v}, must lie in 1..={cap}"));
        }
        Ok(Self { values, cap })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn value(&self, i: usize) -> u32 {
        self.values[i]
    }

    /// The cap `V` used by the mean-based threshold `V * gamma_t`.
    pub fn cap(&self) -> u32 {
        self.cap
    }

    /// Number of bids available to bidder `i`: the bid set is `0..v^i`.
    pub fn bid_count(&self, i: usize) -> usize {
        self.values[i] as usize
    }

    pub fn contains_bid(&self, i: usize, bid: u32) -> bool {
        bid < self.values[i]
    }

    pub fn top_value(&self) -> u32 {
        *self.values.iter().max().expect("at least two bidders")
    }

    /// `M^1`: indices of the bidders holding the highest value, ascending.
    pub fn top_group(&self) -> Vec<usize> {
        self.group_of(self.top_value())
    }

    /// Highest value strictly below the top value, if any.
    pub fn second_value(&self) -> Option<u32> {
        let top = self.top_value();
        self.values.iter().copied().filter(|&v| v < top).max()
    }

    /// `M^2`: bidders holding the second-highest distinct value.
    pub fn second_group(&self) -> Vec<usize> {
        self.second_value()
            .map(|v| self.group_of(v))
            .unwrap_or_default()
    }

    fn group_of(&self, value: u32) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == value)
            .map(|(i, _)| i)
            .collect()
    }

    /// Number of pure profiles `prod |B^i|`.
    pub fn profile_count(&self) -> u128 {
        self.values.iter().map(|&v| v as u128).product()
    }

    /// `lcm(1..=N)`: every tie share `1/k` with `k <= N` is an integer
    /// multiple of `1/tie_scale`.
    pub fn tie_scale(&self) -> u128 {
        (1..=self.n() as u128).fold(1, |acc, k| acc / gcd(acc, k) * k)
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// One bid per bidder, each inside its bidder's bid set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BidProfile(Vec<u32>);

impl BidProfile {
    pub fn new(bids: Vec<u32>, values: &ValueProfile) -> Result<Self> {
        validate_bids(&bids, values)?;
        Ok(Self(bids))
    }

    pub(crate) fn from_vec_unchecked(bids: Vec<u32>) -> Self {
        Self(bids)
    }

    pub fn bids(&self) -> &[u32] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u32> {
        self.0
    }

    pub fn max_bid(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

pub(crate) fn validate_bids(bids: &[u32], values: &ValueProfile) -> Result<()> {
    if bids.len() != values.n() {
        return domain(format!(
            "profile has {} bids for {} bidders",
            bids.len(),
            values.n()
        ));
    }
    for (i, &b) in bids.iter().enumerate() {
        if !values.contains_bid(i, b) {
            return domain(format!(
                "bid {b} of bidder {i} outside bid set 0..{}",
                values.value(i)
            ));
        }
    }
    Ok(())
}

/// Highest bid among `others` and how many of them hold it. `(0, 0)` when
/// there are no opponents.
pub(crate) fn max_and_count(others: impl IntoIterator<Item = u32>) -> (u32, u32) {
    let mut max = 0;
    let mut count = 0;
    for b in others {
        if count == 0 || b > max {
            max = b;
            count = 1;
        } else if b == max {
            count += 1;
        }
    }
    (max, count)
}

/// Utility of bidding `bid` with value `value` against opponents whose max
/// bid is `opp_max`, held by `opp_count` of them, scaled by `scale`.
#[inline]
pub(crate) fn scaled_utility(value: u32, bid: u32, opp_max: u32, opp_count: u32, scale: u128) -> u128 {
    if opp_count == 0 || bid > opp_max {
        (value - bid) as u128 * scale
    } else if bid == opp_max {
        (value - bid) as u128 * scale / (opp_count as u128 + 1)
    } else {
        0
    }
}

/// `u^i(b, b^{-i})`: bidder `i` bids `bid` while the others bid `others`
/// (listed in bidder order, skipping `i`).
pub fn expected_utility(i: usize, bid: u32, others: &[u32], values: &ValueProfile) -> Result<Rational> {
    if i >= values.n() {
        return domain(format!("bidder index {i} out of range"));
    }
    if others.len() + 1 != values.n() {
        return domain(format!(
            "expected {} opponent bids, got {}",
            values.n() - 1,
            others.len()
        ));
    }
    if !values.contains_bid(i, bid) {
        return domain(format!(
            "bid {bid} of bidder {i} outside bid set 0..{}",
            values.value(i)
        ));
    }
    let opponents = (0..values.n()).filter(|&j| j != i);
    for (j, &b) in opponents.zip(others) {
        if !values.contains_bid(j, b) {
            return domain(format!(
                "bid {b} of bidder {j} outside bid set 0..{}",
                values.value(j)
            ));
        }
    }
    Ok(utility_unchecked(values.value(i), bid, others))
}

pub(crate) fn utility_unchecked(value: u32, bid: u32, others: &[u32]) -> Rational {
    let (m, c) = max_and_count(others.iter().copied());
    utility_against(value, bid, m, c)
}

fn utility_against(value: u32, bid: u32, opp_max: u32, opp_count: u32) -> Rational {
    if opp_count == 0 || bid > opp_max {
        Rational::from_integer((value - bid) as i128)
    } else if bid == opp_max {
        Rational::new((value - bid) as i128, opp_count as i128 + 1)
    } else {
        Rational::from_integer(0)
    }
}

/// Utility of bidder `i` in `profile` after replacing its bid by `bid`.
pub(crate) fn deviation_utility(i: usize, bid: u32, profile: &[u32], values: &ValueProfile) -> Rational {
    let others = profile
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &b)| b);
    let (m, c) = max_and_count(others);
    utility_against(values.value(i), bid, m, c)
}

/// Draw the winner of one auction uniformly among the highest bidders.
pub fn realized_winner<R: Rng + ?Sized>(profile: &BidProfile, rng: &mut R) -> usize {
    let max = profile.max_bid();
    let winners: Vec<usize> = profile
        .bids()
        .iter()
        .enumerate()
        .filter(|(_, &b)| b == max)
        .map(|(i, _)| i)
        .collect();
    if winners.len() == 1 {
        winners[0]
    } else {
        winners[rng.gen_range(0..winners.len())]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn vp(v: &[u32]) -> ValueProfile {
        ValueProfile::new(v.to_vec()).unwrap()
    }

    #[test]
    fn sole_winner_pays_bid() {
        let u = expected_utility(0, 7, &[6, 1], &vp(&[10, 7, 7])).unwrap();
        assert_eq!(u, Rational::from_integer(3));
    }

    #[test]
    fn ties_split_evenly() {
        let three = vp(&[3, 3, 3]);
        assert_eq!(expected_utility(1, 2, &[2, 2], &three).unwrap(), Rational::new(1, 3));
        let two = vp(&[3, 3]);
        assert_eq!(expected_utility(0, 2, &[2], &two).unwrap(), Rational::new(1, 2));
    }

    #[test]
    fn losing_bid_is_worth_nothing() {
        let u = expected_utility(2, 3, &[6, 4], &vp(&[10, 7, 7])).unwrap();
        assert_eq!(u, Rational::from_integer(0));
    }

    #[test]
    fn bid_outside_bid_set_is_rejected() {
        let v = vp(&[4, 4]);
        assert!(matches!(expected_utility(0, 4, &[1], &v), Err(Error::Domain(_))));
        assert!(matches!(expected_utility(0, 1, &[9], &v), Err(Error::Domain(_))));
        assert!(BidProfile::new(vec![3, 4], &v).is_err());
        assert!(BidProfile::new(vec![3], &v).is_err());
    }

    #[test]
    fn value_profile_validation() {
        assert!(ValueProfile::new(vec![3]).is_err());
        assert!(ValueProfile::new(vec![3, 0]).is_err());
        assert!(ValueProfile::with_cap(vec![3, 5], 4).is_err());
        let v = ValueProfile::with_cap(vec![2, 7, 7, 4], 16).unwrap();
        assert_eq!(v.top_group(), vec![1, 2]);
        assert_eq!(v.second_value(), Some(4));
        assert_eq!(v.second_group(), vec![3]);
        assert_eq!(v.cap(), 16);
        assert_eq!(vp(&[5, 5]).second_group(), Vec::<usize>::new());
    }

    #[test]
    fn tie_scale_is_lcm() {
        assert_eq!(vp(&[1, 1]).tie_scale(), 2);
        assert_eq!(vp(&[1, 1, 1, 1]).tie_scale(), 12);
    }

    #[test]
    fn value_profile_json_rejects_bad_values() {
        assert!(serde_json::from_str::<ValueProfile>(r#"{"values":[3,0]}"#).is_err());
        let v: ValueProfile = serde_json::from_str(r#"{"values":[3,2]}"#).unwrap();
        assert_eq!(v.cap(), 3);
    }

    #[test]
    fn unique_max_wins() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = BidProfile::new(vec![3, 1, 0], &vp(&[4, 4, 4])).unwrap();
        assert_eq!(realized_winner(&p, &mut rng), 0);
    }

    #[test]
    fn tie_winner_frequencies_are_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 100_000;
        let p = BidProfile::new(vec![2, 2], &vp(&[3, 3])).unwrap();
        let wins0 = (0..draws).filter(|_| realized_winner(&p, &mut rng) == 0).count();
        assert!((wins0 as f64 / draws as f64 - 0.5).abs() < 0.01);

        let p = BidProfile::new(vec![0, 0, 0], &vp(&[1, 1, 1])).unwrap();
        let mut counts = [0usize; 3];
        for _ in 0..draws {
            counts[realized_winner(&p, &mut rng)] += 1;
        }
        for c in counts {
            assert!((c as f64 / draws as f64 - 1.0 / 3.0).abs() < 0.01);
        }
    }

    #[test]
    fn seeded_winner_is_reproducible() {
        let p = BidProfile::new(vec![2, 2], &vp(&[3, 3])).unwrap();
        let a: Vec<usize> = {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            (0..32).map(|_| realized_winner(&p, &mut rng)).collect()
        };
        let b: Vec<usize> = {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            (0..32).map(|_| realized_winner(&p, &mut rng)).collect()
        };
        assert_eq!(a, b);
    }
}
