//! The repeated auction: N learners, T rounds, simultaneous sealed bids.
//!
//! Each round every learner commits a mixed strategy computed from the
//! statistics through the previous round, then all bids are sampled in
//! bidder order, then the realized winner is drawn, then the statistics are
//! updated once. One `ChaCha8` stream per run drives all of it.

use std::io::{self, BufRead, Write};
use std::ops::RangeInclusive;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::auction::{realized_winner, validate_bids, BidProfile, ValueProfile};
use crate::equilibrium::EquilibriumSet;
use crate::error::{config, domain, Result};
use crate::learners::{check_round, mean_based_audit, AuditEntry, GammaSchedule, Learner, LearnerSpec, Violation};
use crate::stats::HistoryStats;
use crate::strategy::MixedStrategy;

/// Default classification threshold on the terminal bid frequency.
pub const DEFAULT_THRESHOLD: f64 = 0.9;

/// Checkpoint every round up to this horizon, every tenth round beyond.
pub const DENSE_CHECKPOINT_HORIZON: u64 = 5_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub values: ValueProfile,
    pub learners: Vec<LearnerSpec>,
    pub rounds: u64,
    pub seed: u64,
    /// Rounds between mixed-strategy snapshots; `None` picks 1 for short runs
    /// and 10 otherwise. The final round is always recorded.
    #[serde(default)]
    pub checkpoint_stride: Option<u64>,
    /// Check every round against the mean-based condition while running.
    #[serde(default)]
    pub audit: bool,
    /// Overrides each learner's default `gamma_t` when auditing.
    #[serde(default)]
    pub audit_gamma: Option<GammaSchedule>,
    /// Extra rounds to snapshot besides the stride multiples.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshot_rounds: Vec<u64>,
}

impl RunConfig {
    /// Every bidder runs the same algorithm.
    pub fn symmetric(values: ValueProfile, spec: LearnerSpec, rounds: u64, seed: u64) -> Self {
        let learners = vec![spec; values.n()];
        Self {
            values,
            learners,
            rounds,
            seed,
            checkpoint_stride: None,
            audit: false,
            audit_gamma: None,
            snapshot_rounds: Vec::new(),
        }
    }

    pub fn with_stride(mut self, stride: u64) -> Self {
        self.checkpoint_stride = Some(stride);
        self
    }

    pub fn with_audit(mut self, audit: bool) -> Self {
        self.audit = audit;
        self
    }

    pub fn stride(&self) -> u64 {
        self.checkpoint_stride.unwrap_or(if self.rounds <= DENSE_CHECKPOINT_HORIZON {
            1
        } else {
            10
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return config("rounds must be at least 1");
        }
        if self.learners.len() != self.values.n() {
            return config(format!(
                "{} learner specs for {} bidders",
                self.learners.len(),
                self.values.n()
            ));
        }
        if self.checkpoint_stride == Some(0) {
            return config("checkpoint stride must be positive");
        }
        for (i, spec) in self.learners.iter().enumerate() {
            spec.validate(i, &self.values)?;
        }
        if let Some(g) = &self.audit_gamma {
            g.validate()?;
        }
        Ok(())
    }

    fn is_checkpoint(&self, t: u64) -> bool {
        t.is_multiple_of(self.stride()) || t == self.rounds || self.snapshot_rounds.contains(&t)
    }
}

/// Mixed strategies played at round `t` and the bid frequencies after it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub t: u64,
    pub x: Vec<MixedStrategy>,
    pub f: Vec<Vec<f64>>,
}

/// Everything a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub config: RunConfig,
    bids: Vec<u32>,
    winners: Vec<u32>,
    pub checkpoints: Vec<Checkpoint>,
    pub stats: HistoryStats,
    /// Mean-based violations found while running; empty unless auditing.
    pub violations: Vec<Violation>,
}

impl RunRecord {
    pub fn rounds(&self) -> u64 {
        self.winners.len() as u64
    }

    pub fn n(&self) -> usize {
        self.config.values.n()
    }

    /// Bids of round `t` (1-based).
    pub fn profile(&self, t: u64) -> &[u32] {
        let n = self.n();
        let start = (t as usize - 1) * n;
        &self.bids[start..start + n]
    }

    pub fn profiles(&self) -> impl Iterator<Item = &[u32]> {
        self.bids.chunks(self.n())
    }

    pub fn winner(&self, t: u64) -> usize {
        self.winners[t as usize - 1] as usize
    }

    pub fn terminal_frequencies(&self) -> Vec<Vec<f64>> {
        (0..self.n()).map(|i| self.stats.frequencies(i)).collect()
    }
}

/// What an observer sees once per round, after sampling.
pub struct RoundView<'a> {
    pub t: u64,
    pub strategies: &'a [MixedStrategy],
    pub bids: &'a [u32],
    /// Statistics through round `t - 1`.
    pub stats: &'a HistoryStats,
}

/// Step-wise driver behind [`run`].
pub struct Simulation {
    config: RunConfig,
    learners: Vec<Learner>,
    gammas: Vec<Option<GammaSchedule>>,
    rng: ChaCha8Rng,
    stats: HistoryStats,
    bids: Vec<u32>,
    winners: Vec<u32>,
    checkpoints: Vec<Checkpoint>,
    violations: Vec<Violation>,
    strategies: Vec<MixedStrategy>,
    t: u64,
}

impl Simulation {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let learners = config
            .learners
            .iter()
            .enumerate()
            .map(|(i, spec)| Learner::new(spec.clone(), i, &config.values))
            .collect::<Result<Vec<_>>>()?;
        let gammas = config
            .learners
            .iter()
            .map(|spec| {
                if !config.audit {
                    None
                } else {
                    config.audit_gamma.clone().or_else(|| spec.default_gamma())
                }
            })
            .collect();
        let n = config.values.n();
        let cap = config.rounds as usize * n;
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            stats: HistoryStats::new(&config.values),
            bids: Vec::with_capacity(cap.min(1 << 24)),
            winners: Vec::with_capacity((config.rounds as usize).min(1 << 24)),
            checkpoints: Vec::new(),
            violations: Vec::new(),
            strategies: Vec::with_capacity(n),
            learners,
            gammas,
            config,
            t: 0,
        })
    }

    /// Feed recorded rounds without sampling: learners see the same history
    /// and advance their own state. Continuing afterwards reproduces a
    /// recorded run exactly when every learner is deterministic.
    pub fn with_prefix<'a>(config: RunConfig, prefix: impl IntoIterator<Item = &'a [u32]>) -> Result<Self> {
        let mut sim = Self::new(config)?;
        for bids in prefix {
            validate_bids(bids, &sim.config.values)?;
            if sim.t >= sim.config.rounds {
                return domain("prefix longer than the configured horizon");
            }
            sim.t += 1;
            let t = sim.t;
            sim.strategies.clear();
            for l in &mut sim.learners {
                sim.strategies.push(l.strategy(&sim.stats, t));
            }
            sim.commit(bids.to_vec(), None);
        }
        Ok(sim)
    }

    pub fn round(&self) -> u64 {
        self.t
    }

    pub fn is_done(&self) -> bool {
        self.t >= self.config.rounds
    }

    pub fn stats(&self) -> &HistoryStats {
        &self.stats
    }

    /// Play one round. Returns `false` once the horizon is reached.
    pub fn step(&mut self, observer: &mut impl FnMut(&RoundView)) -> bool {
        if self.is_done() {
            return false;
        }
        self.t += 1;
        let t = self.t;
        self.strategies.clear();
        for l in &mut self.learners {
            self.strategies.push(l.strategy(&self.stats, t));
        }
        let bids: Vec<u32> = self.strategies.iter().map(|x| x.sample(&mut self.rng)).collect();
        let profile = BidProfile::from_vec_unchecked(bids);
        let winner = realized_winner(&profile, &mut self.rng);
        observer(&RoundView {
            t,
            strategies: &self.strategies,
            bids: profile.bids(),
            stats: &self.stats,
        });
        self.commit(profile.into_vec(), Some(winner));
        true
    }

    fn commit(&mut self, bids: Vec<u32>, winner: Option<usize>) {
        let t = self.t;
        let cap = self.config.values.cap();
        for (i, gamma) in self.gammas.iter().enumerate() {
            if let Some(g) = gamma {
                let alphas = self.stats.alphas(i);
                self.violations
                    .extend(check_round(i, t, &alphas, &self.strategies[i], g.value(t), cap));
            }
        }
        let winner = winner.unwrap_or_else(|| {
            let max = bids.iter().copied().max().unwrap_or(0);
            bids.iter().position(|&b| b == max).unwrap_or(0)
        });
        self.stats.record(&bids);
        self.bids.extend_from_slice(&bids);
        self.winners.push(winner as u32);
        if self.config.is_checkpoint(t) {
            let n = self.config.values.n();
            self.checkpoints.push(Checkpoint {
                t,
                x: self.strategies.clone(),
                f: (0..n).map(|i| self.stats.frequencies(i)).collect(),
            });
        }
    }

    pub fn finish(self) -> RunRecord {
        RunRecord {
            config: self.config,
            bids: self.bids,
            winners: self.winners,
            checkpoints: self.checkpoints,
            stats: self.stats,
            violations: self.violations,
        }
    }
}

pub fn run(config: RunConfig) -> Result<RunRecord> {
    run_observed(config, |_| {})
}

/// [`run`], calling `observer` once per round.
pub fn run_observed(config: RunConfig, mut observer: impl FnMut(&RoundView)) -> Result<RunRecord> {
    let mut sim = Simulation::new(config)?;
    while sim.step(&mut observer) {}
    Ok(sim.finish())
}

/// Fraction of rounds `1..=t` whose profile is an equilibrium, at each
/// checkpoint `t`.
pub fn time_average_ne_fraction(record: &RunRecord, ne: &EquilibriumSet) -> Vec<(u64, f64)> {
    let mut out = Vec::with_capacity(record.checkpoints.len());
    let mut marks = record.checkpoints.iter().map(|c| c.t).peekable();
    let mut hits = 0u64;
    for (idx, bids) in record.profiles().enumerate() {
        let t = idx as u64 + 1;
        if ne.contains(bids) {
            hits += 1;
        }
        if marks.peek() == Some(&t) {
            marks.next();
            out.push((t, hits as f64 / t as f64));
        }
    }
    out
}

/// NE fraction over the whole run.
pub fn final_ne_fraction(record: &RunRecord, ne: &EquilibriumSet) -> f64 {
    let hits = record.profiles().filter(|b| ne.contains(b)).count();
    hits as f64 / record.rounds() as f64
}

/// Total-variation distance from `x` to the point mass on `bid`.
pub fn last_iterate_distance(x: &MixedStrategy, bid: u32) -> Result<f64> {
    if bid as usize >= x.len() {
        return domain(format!("target bid {bid} outside a bid set of size {}", x.len()));
    }
    Ok((1.0 - x.prob(bid)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    #[serde(rename = "v_minus_1")]
    ToHighMinusOne,
    #[serde(rename = "v_minus_2")]
    ToHighMinusTwo,
    #[serde(rename = "not_converged")]
    NotConverged,
}

/// Classification of a run with the terminal frequencies behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceVerdict {
    pub outcome: Outcome,
    pub bidder: usize,
    /// `f_T(v^1 - 1)`.
    pub freq_minus_one: f64,
    /// `f_T(v^1 - 2)`; zero when `v^1 = 1`.
    pub freq_minus_two: f64,
}

/// Classify by the terminal frequency of `v^1 - 2` and `v^1 - 1` of a
/// bidder in the top group.
pub fn classify_convergence(record: &RunRecord, bidder: usize, threshold: f64) -> Result<ConvergenceVerdict> {
    let values = &record.config.values;
    if bidder >= values.n() || !values.top_group().contains(&bidder) {
        return domain(format!("bidder {bidder} is not in the top-value group"));
    }
    classify_frequencies(&record.stats.frequencies(bidder), bidder, values.top_value(), threshold)
}

pub fn classify_frequencies(freqs: &[f64], bidder: usize, top_value: u32, threshold: f64) -> Result<ConvergenceVerdict> {
    if !(threshold > 0.5 && threshold <= 1.0) {
        return domain(format!("threshold must lie in (0.5, 1], got {threshold}"));
    }
    if freqs.len() != top_value as usize {
        return domain("frequency vector does not match the top value");
    }
    let top = top_value as usize;
    let minus_one = freqs[top - 1];
    let minus_two = if top >= 2 { freqs[top - 2] } else { 0.0 };
    let outcome = if minus_two > threshold {
        Outcome::ToHighMinusTwo
    } else if minus_one > threshold {
        Outcome::ToHighMinusOne
    } else {
        Outcome::NotConverged
    };
    Ok(ConvergenceVerdict {
        outcome,
        bidder,
        freq_minus_one: minus_one,
        freq_minus_two: minus_two,
    })
}

/// Number of consecutive checkpoint pairs inside `window` whose mixed
/// strategy for `bidder` has a different most likely bid.
pub fn oscillation_indicator(record: &RunRecord, bidder: usize, window: RangeInclusive<u64>) -> Result<usize> {
    if window.is_empty() {
        return domain("empty round window");
    }
    if *window.start() < 1 || *window.end() > record.rounds() {
        return domain(format!(
            "window {}..={} outside rounds 1..={}",
            window.start(),
            window.end(),
            record.rounds()
        ));
    }
    if bidder >= record.n() {
        return domain(format!("bidder {bidder} out of range"));
    }
    let tops: Vec<u32> = record
        .checkpoints
        .iter()
        .filter(|c| window.contains(&c.t))
        .map(|c| c.x[bidder].argmax())
        .collect();
    Ok(argmax_changes(&tops))
}

pub fn argmax_changes(tops: &[u32]) -> usize {
    tops.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Audit recorded strategy snapshots against a recorded trace. The averages
/// for checkpoint `t` are rebuilt from rounds `1..t`. Bidders whose gamma is
/// `None` are skipped.
pub fn audit_checkpoints(
    values: &ValueProfile,
    trace: &[Vec<u32>],
    checkpoints: &[Checkpoint],
    gammas: &[Option<GammaSchedule>],
) -> Result<Vec<Violation>> {
    if checkpoints.is_empty() {
        return domain("the record has no strategy snapshots to audit");
    }
    if gammas.len() != values.n() {
        return domain(format!("{} gamma schedules for {} bidders", gammas.len(), values.n()));
    }
    let last = checkpoints.iter().map(|c| c.t).max().unwrap_or(0);
    if last as usize > trace.len() {
        return domain(format!(
            "snapshots reach round {last} but the trace has {} rounds",
            trace.len()
        ));
    }
    let n = values.n();
    let mut entries: Vec<Vec<AuditEntry>> = vec![Vec::new(); n];
    let mut stats = HistoryStats::new(values);
    let mut snaps = checkpoints.iter().peekable();
    for (idx, bids) in trace.iter().enumerate() {
        let t = idx as u64 + 1;
        while let Some(c) = snaps.next_if(|c| c.t <= t) {
            if c.t < t {
                return domain(format!("snapshots out of order at round {}", c.t));
            }
            if c.x.len() != n {
                return domain(format!("snapshot at round {t} has {} strategies", c.x.len()));
            }
            for (i, slot) in entries.iter_mut().enumerate() {
                if gammas[i].is_some() {
                    slot.push(AuditEntry {
                        t,
                        alphas: stats.alphas(i),
                        strategy: c.x[i].clone(),
                    });
                }
            }
        }
        stats.update(&BidProfile::new(bids.clone(), values)?);
        if snaps.peek().is_none() {
            break;
        }
    }
    let mut out = Vec::new();
    for (i, gamma) in gammas.iter().enumerate() {
        if let Some(g) = gamma {
            out.extend(mean_based_audit(i, &entries[i], g, values.cap())?);
        }
    }
    out.sort_by_key(|v| (v.t, v.bidder, v.bid));
    Ok(out)
}

/// `t,bid_1,...,bid_N,in_ne`, one row per round.
pub fn write_trace_csv<W: Write>(record: &RunRecord, ne: &EquilibriumSet, mut out: W) -> io::Result<()> {
    let n = record.n();
    let mut header = String::from("t");
    for i in 1..=n {
        header.push_str(&format!(",bid_{i}"));
    }
    header.push_str(",in_ne");
    writeln!(out, "{header}")?;
    for (idx, bids) in record.profiles().enumerate() {
        let mut line = (idx + 1).to_string();
        for b in bids {
            line.push(',');
            line.push_str(&b.to_string());
        }
        line.push_str(if ne.contains(bids) { ",1" } else { ",0" });
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Parse a trace written by [`write_trace_csv`] back into per-round bids.
pub fn read_trace_csv<R: BufRead>(input: R) -> Result<Vec<Vec<u32>>> {
    let mut lines = input.lines();
    let header = match lines.next() {
        Some(Ok(h)) => h,
        _ => return domain("trace is empty"),
    };
    let cols: Vec<&str> = header.trim().split(',').collect();
    if cols.len() < 4 || cols[0] != "t" || cols[cols.len() - 1] != "in_ne" {
        return domain(format!("unexpected trace header `{header}`"));
    }
    let n = cols.len() - 2;
    let mut trace = Vec::new();
    for (row, line) in lines.enumerate() {
        let line = line.map_err(|e| crate::error::Error::Domain(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != n + 2 {
            return domain(format!("trace row {} has {} fields", row + 1, fields.len()));
        }
        let t: u64 = fields[0]
            .parse()
            .map_err(|_| crate::error::Error::Domain(format!("bad round `{}`", fields[0])))?;
        if t != row as u64 + 1 {
            return domain(format!("trace row {} is labelled round {t}", row + 1));
        }
        let bids = fields[1..=n]
            .iter()
            .map(|f| {
                f.parse::<u32>()
                    .map_err(|_| crate::error::Error::Domain(format!("bad bid `{f}`")))
            })
            .collect::<Result<Vec<u32>>>()?;
        trace.push(bids);
    }
    Ok(trace)
}
