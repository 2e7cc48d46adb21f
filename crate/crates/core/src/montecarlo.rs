//! Batches of independent runs: seed derivation, verdict counts and quantile
//! bands over the per-checkpoint frequency series.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{classify_convergence, run, Outcome, RunConfig, RunRecord, DEFAULT_THRESHOLD};
use crate::error::{config, domain, Result};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The SplitMix64 output function.
pub fn splitmix64_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `index` in a batch keyed by `master`.
pub fn derive_run_seed(master: u64, index: u64) -> u64 {
    splitmix64_mix(master ^ index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchConfig {
    /// Template for every run; its `seed` is replaced per run.
    pub base: RunConfig,
    pub runs: usize,
    pub master_seed: u64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Top-group bidder whose frequencies decide the verdict; defaults to
    /// the first one.
    #[serde(default)]
    pub classify_bidder: Option<usize>,
    /// `(bidder, bid)` frequency series to band; defaults to the classified
    /// bidder's `v^1 - 2` and `v^1 - 1`.
    #[serde(default)]
    pub tracked: Vec<(usize, u32)>,
    #[serde(default = "default_quantiles")]
    pub quantiles: (f64, f64),
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

fn default_quantiles() -> (f64, f64) {
    (0.1, 0.9)
}

impl BatchConfig {
    pub fn new(base: RunConfig, runs: usize, master_seed: u64) -> Self {
        Self {
            base,
            runs,
            master_seed,
            threshold: DEFAULT_THRESHOLD,
            classify_bidder: None,
            tracked: Vec::new(),
            quantiles: default_quantiles(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return config("a batch needs at least one run");
        }
        self.base.validate()?;
        let values = &self.base.values;
        if let Some(b) = self.classify_bidder {
            if !values.top_group().contains(&b) {
                return config(format!("bidder {b} is not in the top-value group"));
            }
        }
        for &(i, b) in &self.tracked {
            if i >= values.n() || !values.contains_bid(i, b) {
                return config(format!("tracked bid {b} of bidder {i} is out of range"));
            }
        }
        let (lo, hi) = self.quantiles;
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            return config(format!("quantiles ({lo}, {hi}) must satisfy 0 <= lo < hi <= 1"));
        }
        if !(self.threshold > 0.5 && self.threshold <= 1.0) {
            return config(format!("threshold must lie in (0.5, 1], got {}", self.threshold));
        }
        Ok(())
    }

    pub fn bidder(&self) -> usize {
        self.classify_bidder
            .unwrap_or_else(|| self.base.values.top_group()[0])
    }

    pub fn tracked_bids(&self) -> Vec<(usize, u32)> {
        if !self.tracked.is_empty() {
            return self.tracked.clone();
        }
        let bidder = self.bidder();
        let top = self.base.values.top_value();
        let mut out = Vec::new();
        if top >= 2 {
            out.push((bidder, top - 2));
        }
        out.push((bidder, top - 1));
        out
    }

    pub fn run_config(&self, index: usize) -> RunConfig {
        let mut cfg = self.base.clone();
        cfg.seed = derive_run_seed(self.master_seed, index as u64);
        cfg
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictCounts {
    pub v_minus_1: usize,
    pub v_minus_2: usize,
    pub not_converged: usize,
}

impl VerdictCounts {
    pub fn add(&mut self, outcome: Outcome) {
        match outcome {
            Outcome::ToHighMinusOne => self.v_minus_1 += 1,
            Outcome::ToHighMinusTwo => self.v_minus_2 += 1,
            Outcome::NotConverged => self.not_converged += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.v_minus_1 + self.v_minus_2 + self.not_converged
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub index: usize,
    pub seed: u64,
    pub verdict: Outcome,
}

/// Pointwise quantile band of one tracked frequency series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyBand {
    pub bidder: usize,
    pub bid: u32,
    pub t: Vec<u64>,
    pub lo: Vec<f64>,
    pub median: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub counts: VerdictCounts,
    pub runs: Vec<RunSummary>,
    #[serde(skip)]
    pub bands: Vec<FrequencyBand>,
}

pub fn run_batch(config: &BatchConfig) -> Result<BatchSummary> {
    run_batch_with(config, |_, _| ()).map(|(s, _)| s)
}

/// Run the batch on the rayon pool and also map every completed record
/// through `inspect`. Results come back in run order whatever the
/// scheduling.
pub fn run_batch_with<T, F>(config: &BatchConfig, inspect: F) -> Result<(BatchSummary, Vec<T>)>
where
    T: Send,
    F: Fn(usize, &RunRecord) -> T + Sync,
{
    config.validate()?;
    let bidder = config.bidder();
    let tracked = config.tracked_bids();

    struct Done<T> {
        summary: RunSummary,
        t: Vec<u64>,
        series: Vec<Vec<f64>>,
        extra: T,
    }

    let done: Vec<Done<T>> = (0..config.runs)
        .into_par_iter()
        .map(|index| -> Result<Done<T>> {
            let cfg = config.run_config(index);
            let seed = cfg.seed;
            let record = run(cfg)?;
            let verdict = classify_convergence(&record, bidder, config.threshold)?;
            let t = record.checkpoints.iter().map(|c| c.t).collect();
            let series = tracked
                .iter()
                .map(|&(i, b)| record.checkpoints.iter().map(|c| c.f[i][b as usize]).collect())
                .collect();
            let extra = inspect(index, &record);
            Ok(Done {
                summary: RunSummary {
                    index,
                    seed,
                    verdict: verdict.outcome,
                },
                t,
                series,
                extra,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut counts = VerdictCounts::default();
    let mut runs = Vec::with_capacity(done.len());
    let mut per_tracked: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(done.len()); tracked.len()];
    let mut extras = Vec::with_capacity(done.len());
    let t_axis = done.first().map(|d| d.t.clone()).unwrap_or_default();
    for d in done {
        counts.add(d.summary.verdict);
        runs.push(d.summary);
        for (slot, s) in per_tracked.iter_mut().zip(d.series) {
            slot.push(s);
        }
        extras.push(d.extra);
    }

    let (q_lo, q_hi) = config.quantiles;
    let bands = tracked
        .iter()
        .zip(per_tracked)
        .map(|(&(bidder, bid), series)| {
            let (lo, hi) = quantile_bands(&series, q_lo, q_hi)?;
            let median = quantile_series(&series, 0.5)?;
            Ok(FrequencyBand {
                bidder,
                bid,
                t: t_axis.clone(),
                lo,
                median,
                hi,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok((BatchSummary { counts, runs, bands }, extras))
}

/// Empirical `q`-quantile of `sorted`, interpolating linearly between order
/// statistics at position `q * (n - 1)`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Pointwise `q`-quantile across equal-length series.
pub fn quantile_series(series: &[Vec<f64>], q: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&q) {
        return domain(format!("quantile {q} outside [0, 1]"));
    }
    let Some(first) = series.first() else {
        return domain("no series to band");
    };
    let len = first.len();
    if series.iter().any(|s| s.len() != len) {
        return domain("series have different lengths");
    }
    let mut column = vec![0.0; series.len()];
    Ok((0..len)
        .map(|k| {
            for (slot, s) in column.iter_mut().zip(series) {
                *slot = s[k];
            }
            column.sort_by(f64::total_cmp);
            quantile_sorted(&column, q)
        })
        .collect())
}

/// Pointwise `[q_lo, q_hi]` band across equal-length series.
pub fn quantile_bands(series: &[Vec<f64>], q_lo: f64, q_hi: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(0.0 <= q_lo && q_lo < q_hi && q_hi <= 1.0) {
        return domain(format!("quantiles ({q_lo}, {q_hi}) must satisfy 0 <= lo < hi <= 1"));
    }
    Ok((quantile_series(series, q_lo)?, quantile_series(series, q_hi)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auction::ValueProfile;
    use crate::learners::LearnerSpec;

    #[test]
    fn seed_of_first_run_from_zero_master() {
        // First output of the reference SplitMix64 generator seeded with 0.
        assert_eq!(derive_run_seed(0, 0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(derive_run_seed(0, 0), splitmix64_mix(GOLDEN_GAMMA));
    }

    #[test]
    fn seeds_are_deterministic() {
        assert_eq!(derive_run_seed(42, 7), derive_run_seed(42, 7));
        assert_ne!(derive_run_seed(42, 7), derive_run_seed(42, 8));
    }

    #[test]
    fn quantile_examples() {
        let series: Vec<Vec<f64>> = (1..=10).map(|v| vec![v as f64]).collect();
        let (lo, hi) = quantile_bands(&series, 0.1, 0.9).unwrap();
        assert!((lo[0] - 1.9).abs() < 1e-12);
        assert!((hi[0] - 9.1).abs() < 1e-12);

        let same = vec![vec![0.3, 0.3]; 5];
        let (lo, hi) = quantile_bands(&same, 0.1, 0.9).unwrap();
        assert_eq!(lo, vec![0.3, 0.3]);
        assert_eq!(hi, vec![0.3, 0.3]);

        let two = vec![vec![1.0, 5.0], vec![3.0, 2.0]];
        let (lo, hi) = quantile_bands(&two, 0.0, 1.0).unwrap();
        assert_eq!(lo, vec![1.0, 2.0]);
        assert_eq!(hi, vec![3.0, 5.0]);
    }

    #[test]
    fn ragged_series_rejected() {
        let ragged = vec![vec![1.0, 2.0], vec![1.0]];
        assert!(quantile_bands(&ragged, 0.1, 0.9).is_err());
        assert!(quantile_bands(&[vec![1.0]], 0.9, 0.1).is_err());
    }

    #[test]
    fn scripted_equilibrium_batch() {
        let values = ValueProfile::new(vec![4, 4]).unwrap();
        let base = RunConfig::symmetric(values.clone(), LearnerSpec::Scripted { bids: vec![3] }, 50, 0);
        let s = run_batch(&BatchConfig::new(base, 1, 9)).unwrap();
        assert_eq!(s.counts, VerdictCounts { v_minus_1: 1, v_minus_2: 0, not_converged: 0 });
        let base = RunConfig::symmetric(values, LearnerSpec::Scripted { bids: vec![2] }, 50, 0);
        let s = run_batch(&BatchConfig::new(base, 1, 9)).unwrap();
        assert_eq!(s.counts, VerdictCounts { v_minus_1: 0, v_minus_2: 1, not_converged: 0 });
        assert_eq!(s.bands.len(), 2);
        assert!(s.bands[0].lo.iter().all(|&f| f == 1.0));
    }

    #[test]
    fn summary_json_shape() {
        let values = ValueProfile::new(vec![3, 3]).unwrap();
        let base = RunConfig::symmetric(values, LearnerSpec::Scripted { bids: vec![2] }, 5, 0);
        let s = run_batch(&BatchConfig::new(base, 2, 1)).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.starts_with(r#"{"counts":{"v_minus_1":2,"v_minus_2":0,"not_converged":0},"runs":[{"index":0,"seed":"#));
        assert!(json.contains(r#""verdict":"v_minus_1""#));
        let back: BatchSummary = serde_json::from_str(&json).unwrap();
        assert_eq!(back.counts, s.counts);
        assert_eq!(back.runs, s.runs);
    }
}
