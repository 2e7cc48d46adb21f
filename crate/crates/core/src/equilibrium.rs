//! Pure Nash equilibria of the one-shot auction, by closed form and by
//! exhaustive deviation checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::auction::{deviation_utility, validate_bids, BidProfile, Rational, ValueProfile};
use crate::error::{domain, Error, Result};

/// Default guard on the number of profiles either enumerator will visit.
pub const DEFAULT_PROFILE_LIMIT: u128 = 10_000_000;

/// Sorted, deduplicated set of pure equilibria. Serializes as a JSON array
/// of integer arrays.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EquilibriumSet(Vec<BidProfile>);

impl EquilibriumSet {
    pub fn from_profiles(mut profiles: Vec<BidProfile>) -> Self {
        profiles.sort();
        profiles.dedup();
        Self(profiles)
    }

    pub fn profiles(&self) -> &[BidProfile] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, bids: &[u32]) -> bool {
        self.0
            .binary_search_by(|p| p.bids().cmp(bids))
            .is_ok()
    }

    pub fn to_vecs(&self) -> Vec<Vec<u32>> {
        self.0.iter().map(|p| p.bids().to_vec()).collect()
    }
}

/// True iff no bidder has a strictly improving unilateral deviation.
pub fn is_nash(profile: &BidProfile, values: &ValueProfile) -> bool {
    is_nash_bids(profile.bids(), values)
}

pub(crate) fn is_nash_bids(bids: &[u32], values: &ValueProfile) -> bool {
    (0..values.n()).all(|i| {
        let current = deviation_utility(i, bids[i], bids, values);
        (0..values.value(i)).all(|b| deviation_utility(i, b, bids, values) <= current)
    })
}

pub fn brute_force_nash(values: &ValueProfile) -> Result<EquilibriumSet> {
    brute_force_nash_with_limit(values, DEFAULT_PROFILE_LIMIT)
}

/// Visit every profile in `prod B^i` and keep the equilibria.
pub fn brute_force_nash_with_limit(values: &ValueProfile, limit: u128) -> Result<EquilibriumSet> {
    let profiles = values.profile_count();
    if profiles > limit {
        return Err(Error::Capacity { profiles, limit });
    }
    let ranges: Vec<Vec<u32>> = values.values().iter().map(|&v| (0..v).collect()).collect();
    let mut found = Vec::new();
    for_each_product(&ranges, |bids| {
        if is_nash_bids(bids, values) {
            found.push(BidProfile::from_vec_unchecked(bids.to_vec()));
        }
    });
    Ok(EquilibriumSet::from_profiles(found))
}

pub fn enumerate_pure_nash(values: &ValueProfile) -> Result<EquilibriumSet> {
    enumerate_pure_nash_with_limit(values, DEFAULT_PROFILE_LIMIT)
}

/// Closed-form characterization, split on the size of the top group.
///
/// Each family is a product of per-bidder candidate sets, with one extra
/// "somebody in the second group bids `v^2 - 1`" filter when a single bidder
/// holds the top value. `limit` bounds the size of each product.
/// Candidate bids per bidder, plus an optional filter: some bidder in the
/// group must bid the given value.
type Family = (Vec<Vec<u32>>, Option<(Vec<usize>, u32)>);

pub fn enumerate_pure_nash_with_limit(values: &ValueProfile, limit: u128) -> Result<EquilibriumSet> {
    let n = values.n();
    let top = values.top_value();
    let top_group = values.top_group();
    let upto = |j: usize, cap: i64| -> Vec<u32> {
        (0..values.value(j)).filter(|&b| (b as i64) <= cap).collect()
    };

    let mut families: Vec<Family> = Vec::new();
    match top_group.len() {
        1 => {
            let leader = top_group[0];
            let second = values.second_value().expect("a single top bidder implies a second value");
            let second_group = values.second_group();
            let sets = (0..n)
                .map(|j| {
                    if j == leader {
                        vec![second]
                    } else {
                        upto(j, second as i64 - 1)
                    }
                })
                .collect();
            families.push((sets, Some((second_group.clone(), second - 1))));
            if top == second + 1 && second_group.len() == 1 {
                let runner = second_group[0];
                let sets = (0..n)
                    .map(|j| {
                        if j == leader || j == runner {
                            vec![second - 1]
                        } else {
                            upto(j, second as i64 - 2)
                        }
                    })
                    .collect();
                families.push((sets, None));
            }
        }
        2 => {
            let third = values.second_value();
            let close_third = n > 2 && third == Some(top - 1);
            let mut levels = vec![top - 1];
            if !close_third && top >= 2 {
                levels.push(top - 2);
            }
            let others_cap = if close_third { top as i64 - 2 } else { top as i64 - 3 };
            for level in levels {
                let sets = (0..n)
                    .map(|j| {
                        if top_group.contains(&j) {
                            vec![level]
                        } else {
                            upto(j, others_cap)
                        }
                    })
                    .collect();
                families.push((sets, None));
            }
        }
        _ => {
            let sets = (0..n)
                .map(|j| {
                    if top_group.contains(&j) {
                        vec![top - 1]
                    } else {
                        upto(j, top as i64 - 2)
                    }
                })
                .collect();
            families.push((sets, None));
        }
    }

    let mut found = Vec::new();
    for (sets, needs) in families {
        let size: u128 = sets.iter().map(|s| s.len() as u128).product();
        if size > limit {
            return Err(Error::Capacity {
                profiles: size,
                limit,
            });
        }
        for_each_product(&sets, |bids| {
            let keep = match &needs {
                Some((group, level)) => group.iter().any(|&j| bids[j] == *level),
                None => true,
            };
            if keep {
                found.push(BidProfile::from_vec_unchecked(bids.to_vec()));
            }
        });
    }
    Ok(EquilibriumSet::from_profiles(found))
}

/// Call `visit` with every element of `sets[0] x sets[1] x ...` in
/// lexicographic order. Nothing is visited if any set is empty.
fn for_each_product(sets: &[Vec<u32>], mut visit: impl FnMut(&[u32])) {
    if sets.iter().any(|s| s.is_empty()) {
        return;
    }
    let mut idx = vec![0usize; sets.len()];
    let mut bids: Vec<u32> = sets.iter().map(|s| s[0]).collect();
    loop {
        visit(&bids);
        let mut pos = sets.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < sets[pos].len() {
                bids[pos] = sets[pos][idx[pos]];
                break;
            }
            idx[pos] = 0;
            bids[pos] = sets[pos][0];
        }
    }
}

/// Expected utility of bidder `i` bidding `bid` while each opponent draws
/// independently from its empirical distribution.
///
/// `empirical` lists one distribution per opponent, in bidder order skipping
/// `i`; each is indexed by bid and must sum to exactly one.
pub fn empirical_product_utility(
    i: usize,
    bid: u32,
    empirical: &[Vec<Rational>],
    values: &ValueProfile,
) -> Result<Rational> {
    if i >= values.n() {
        return domain(format!("bidder index {i} out of range"));
    }
    if !values.contains_bid(i, bid) {
        return domain(format!("bid {bid} outside bid set of bidder {i}"));
    }
    if empirical.len() + 1 != values.n() {
        return domain(format!(
            "expected {} opponent distributions, got {}",
            values.n() - 1,
            empirical.len()
        ));
    }
    let zero = Rational::from_integer(0);
    let one = Rational::from_integer(1);
    let opponents = (0..values.n()).filter(|&j| j != i);
    for (j, dist) in opponents.zip(empirical) {
        if dist.len() != values.bid_count(j) {
            return domain(format!(
                "distribution of bidder {j} has {} entries, bid set has {}",
                dist.len(),
                values.bid_count(j)
            ));
        }
        if dist.iter().any(|p| *p < zero) || dist.iter().sum::<Rational>() != one {
            return domain(format!("distribution of bidder {j} is not normalized"));
        }
    }

    // Distribution of (opponents' max bid, number holding it).
    let mut state: BTreeMap<(u32, u32), Rational> = BTreeMap::new();
    state.insert((0, 0), one);
    for dist in empirical {
        let mut next: BTreeMap<(u32, u32), Rational> = BTreeMap::new();
        for (&(m, c), &mass) in &state {
            for (b, &p) in dist.iter().enumerate() {
                if p == zero {
                    continue;
                }
                let b = b as u32;
                let key = if c == 0 || b > m {
                    (b, 1)
                } else if b == m {
                    (m, c + 1)
                } else {
                    (m, c)
                };
                *next.entry(key).or_insert(zero) += mass * p;
            }
        }
        state = next;
    }

    let value = values.value(i) as i128;
    let mut total = zero;
    for ((m, c), mass) in state {
        let u = if c == 0 || bid > m {
            Rational::from_integer(value - bid as i128)
        } else if bid == m {
            Rational::new(value - bid as i128, c as i128 + 1)
        } else {
            zero
        };
        total += mass * u;
    }
    Ok(total)
}

/// Check that `bids` is a valid profile and evaluate each bidder's best
/// deviation gain; used by reporting code.
pub fn best_deviation_gains(bids: &[u32], values: &ValueProfile) -> Result<Vec<Rational>> {
    validate_bids(bids, values)?;
    Ok((0..values.n())
        .map(|i| {
            let current = deviation_utility(i, bids[i], bids, values);
            (0..values.value(i))
                .map(|b| deviation_utility(i, b, bids, values) - current)
                .max()
                .unwrap_or_else(|| Rational::from_integer(0))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vp(v: &[u32]) -> ValueProfile {
        ValueProfile::new(v.to_vec()).unwrap()
    }

    fn set(v: &[u32]) -> Vec<Vec<u32>> {
        enumerate_pure_nash(&vp(v)).unwrap().to_vecs()
    }

    fn brute(v: &[u32]) -> Vec<Vec<u32>> {
        brute_force_nash(&vp(v)).unwrap().to_vecs()
    }

    #[test]
    fn three_way_top_group() {
        assert_eq!(set(&[4, 4, 4]), vec![vec![3, 3, 3]]);
        assert_eq!(brute(&[4, 4, 4]), vec![vec![3, 3, 3]]);
    }

    #[test]
    fn two_way_top_group_has_two_equilibria() {
        assert_eq!(set(&[4, 4]), vec![vec![2, 2], vec![3, 3]]);
        assert_eq!(brute(&[4, 4]), vec![vec![2, 2], vec![3, 3]]);
    }

    #[test]
    fn two_low_values_tie_at_zero() {
        // (0,0) pays 1 each; deviating to 1 also pays 1, not strictly more.
        assert_eq!(brute(&[2, 2]), vec![vec![0, 0], vec![1, 1]]);
        assert_eq!(set(&[2, 2]), brute(&[2, 2]));
    }

    #[test]
    fn close_third_bidder_rules_out_low_equilibrium() {
        let expected: Vec<Vec<u32>> = (0..4).map(|b| vec![4, 4, b]).collect();
        assert_eq!(set(&[5, 5, 4]), expected);
        assert_eq!(brute(&[5, 5, 4]), expected);
    }

    #[test]
    fn single_top_bidder_with_adjacent_runner_up() {
        assert_eq!(set(&[3, 2]), vec![vec![1, 1], vec![2, 1]]);
        assert_eq!(brute(&[3, 2]), vec![vec![1, 1], vec![2, 1]]);
    }

    #[test]
    fn example_values_have_thirteen_equilibria() {
        let s = set(&[10, 7, 7]);
        assert_eq!(s.len(), 13);
        assert!(s.iter().all(|p| p[0] == 7 && p[1].max(p[2]) == 6));
        assert_eq!(s, brute(&[10, 7, 7]));
    }

    #[test]
    fn unsorted_values_are_handled() {
        assert_eq!(set(&[7, 10, 7]), brute(&[7, 10, 7]));
        assert!(set(&[7, 10, 7]).iter().all(|p| p[1] == 7));
    }

    #[test]
    fn singleton_bid_sets() {
        assert_eq!(set(&[1, 1]), vec![vec![0, 0]]);
        assert_eq!(brute(&[1, 1]), vec![vec![0, 0]]);
        assert_eq!(set(&[3, 1]), brute(&[3, 1]));
    }

    #[test]
    fn is_nash_examples() {
        let v = vp(&[10, 7, 7]);
        assert!(is_nash(&BidProfile::new(vec![7, 6, 1], &v).unwrap(), &v));
        assert!(!is_nash(&BidProfile::new(vec![7, 1, 1], &v).unwrap(), &v));
        let v = vp(&[4, 4, 4]);
        assert!(is_nash(&BidProfile::new(vec![3, 3, 3], &v).unwrap(), &v));
    }

    #[test]
    fn brute_force_guard() {
        let v = vp(&[10, 10, 10]);
        assert!(matches!(
            brute_force_nash_with_limit(&v, 999),
            Err(Error::Capacity { profiles: 1000, limit: 999 })
        ));
        let big = ValueProfile::new(vec![100; 4]).unwrap();
        assert!(matches!(brute_force_nash(&big), Err(Error::Capacity { .. })));
        // The closed form only materializes the equilibria themselves.
        assert_eq!(enumerate_pure_nash(&big).unwrap().to_vecs(), vec![vec![99; 4]]);
    }

    #[test]
    fn empirical_product_examples() {
        let v = vp(&[10, 7, 7]);
        let mut p = vec![Rational::from_integer(0); 7];
        p[6] = Rational::new(1, 3);
        p[1] = Rational::new(2, 3);
        let dists = vec![p.clone(), p];
        assert_eq!(empirical_product_utility(0, 2, &dists, &v).unwrap(), Rational::new(32, 9));
        assert_eq!(empirical_product_utility(0, 7, &dists, &v).unwrap(), Rational::from_integer(3));

        let v = vp(&[4, 4, 4]);
        let mut zero = vec![Rational::from_integer(0); 4];
        zero[0] = Rational::from_integer(1);
        let dists = vec![zero.clone(), zero];
        assert_eq!(empirical_product_utility(0, 1, &dists, &v).unwrap(), Rational::from_integer(3));
    }

    #[test]
    fn empirical_product_rejects_unnormalized() {
        let v = vp(&[3, 3]);
        let dists = vec![vec![Rational::new(1, 2), Rational::new(1, 3), Rational::from_integer(0)]];
        assert!(matches!(empirical_product_utility(0, 1, &dists, &v), Err(Error::Domain(_))));
    }

    #[test]
    fn deviation_gains_are_zero_at_equilibrium() {
        let v = vp(&[4, 4]);
        let gains = best_deviation_gains(&[3, 3], &v).unwrap();
        assert!(gains.iter().all(|g| *g == Rational::from_integer(0)));
        let gains = best_deviation_gains(&[1, 0], &v).unwrap();
        assert!(gains[1] > Rational::from_integer(0));
    }
}
