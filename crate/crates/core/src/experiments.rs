//! Preset experiments and their artifacts.
//!
//! | id               | values     | learners              | T               | R    |
//! |------------------|------------|-----------------------|-----------------|------|
//! | `m2-epsgreedy`   | (4, 4)     | eps-Greedy            | 2000            | 1000 |
//! | `m2-mwu`         | (4, 4)     | MWU                   | 2000            | 1000 |
//! | `m1-epsgreedy`   | (8, 6)     | eps-Greedy            | 20000           | 100  |
//! | `m1-mwu`         | (8, 6)     | MWU                   | 20000           | 100  |
//! | `example1`       | (10, 7, 7) | FTL, scripted ties    | 300             | 1    |
//! | `counterexample` | (3, 3)     | counterexample T0     | 32^2 * T0       | 1    |
//!
//! All eps schedules are `t^(-1/2)`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::auction::ValueProfile;
use crate::dynamics::{final_ne_fraction, oscillation_indicator, RunConfig, RunRecord};
use crate::equilibrium::{enumerate_pure_nash, EquilibriumSet};
use crate::error::{Error, Result};
use crate::learners::{CounterexampleState, LearnerSpec, TieBreak};
use crate::montecarlo::{run_batch_with, BatchConfig, BatchSummary, VerdictCounts};
use crate::output::{self, write_json, write_text, RunDocument};
use crate::svg::{Band, LineChart, Series};

pub const DEFAULT_MASTER_SEED: u64 = 1;
pub const DEFAULT_T0: u64 = 1000;

/// One period of the three-bidder FTL cycle for values (10, 7, 7).
pub const EXAMPLE1_CYCLE: [[u32; 3]; 3] = [[7, 6, 1], [7, 1, 6], [7, 1, 1]];

/// Traces longer than this are not written by [`write_artifacts`].
pub const MAX_TRACE_ROUNDS: u64 = 100_000;

/// Scripted tie-breaks that make FTL on (10, 7, 7) follow [`EXAMPLE1_CYCLE`].
pub fn example1_tiebreaks() -> Vec<TieBreak> {
    vec![
        TieBreak::Scripted(vec![7]),
        TieBreak::Scripted(vec![6, 1, 1]),
        TieBreak::Scripted(vec![1, 6, 1]),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExperimentId {
    #[serde(rename = "m2-epsgreedy")]
    M2EpsGreedy,
    #[serde(rename = "m2-mwu")]
    M2Mwu,
    #[serde(rename = "m1-epsgreedy")]
    M1EpsGreedy,
    #[serde(rename = "m1-mwu")]
    M1Mwu,
    #[serde(rename = "example1")]
    Example1,
    #[serde(rename = "counterexample")]
    Counterexample,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] = [
        ExperimentId::M2EpsGreedy,
        ExperimentId::M2Mwu,
        ExperimentId::M1EpsGreedy,
        ExperimentId::M1Mwu,
        ExperimentId::Example1,
        ExperimentId::Counterexample,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::M2EpsGreedy => "m2-epsgreedy",
            ExperimentId::M2Mwu => "m2-mwu",
            ExperimentId::M1EpsGreedy => "m1-epsgreedy",
            ExperimentId::M1Mwu => "m1-mwu",
            ExperimentId::Example1 => "example1",
            ExperimentId::Counterexample => "counterexample",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnknownExperiment(s.to_string()))
    }
}

/// Overrides on top of a preset. `None` keeps the preset value.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOptions {
    pub master_seed: u64,
    pub runs: Option<usize>,
    pub rounds: Option<u64>,
    pub stride: Option<u64>,
    /// `T_0` of the counterexample experiment.
    pub t0: u64,
    /// Run the online mean-based audit with each learner's default gamma.
    pub audit: bool,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            master_seed: DEFAULT_MASTER_SEED,
            runs: None,
            rounds: None,
            stride: None,
            t0: DEFAULT_T0,
            audit: true,
        }
    }
}

fn values(v: &[u32]) -> ValueProfile {
    ValueProfile::new(v.to_vec()).expect("preset values are valid")
}

/// The batch behind a preset, after applying `opts`.
pub fn batch_config(id: ExperimentId, opts: &ExperimentOptions) -> Result<BatchConfig> {
    let (base, runs, tracked) = match id {
        ExperimentId::M2EpsGreedy | ExperimentId::M2Mwu => {
            let spec = if id == ExperimentId::M2EpsGreedy {
                LearnerSpec::eps_greedy()
            } else {
                LearnerSpec::mwu()
            };
            (RunConfig::symmetric(values(&[4, 4]), spec, 2000, 0), 1000, Vec::new())
        }
        ExperimentId::M1EpsGreedy | ExperimentId::M1Mwu => {
            let spec = if id == ExperimentId::M1EpsGreedy {
                LearnerSpec::eps_greedy()
            } else {
                LearnerSpec::mwu()
            };
            let base = RunConfig::symmetric(values(&[8, 6]), spec, 20_000, 0);
            (base, 100, vec![(0, 6), (1, 5), (1, 3)])
        }
        ExperimentId::Example1 => {
            let learners = example1_tiebreaks()
                .into_iter()
                .map(|tiebreak| LearnerSpec::Ftl { tiebreak })
                .collect();
            let mut base = RunConfig::symmetric(values(&[10, 7, 7]), LearnerSpec::ftl(), 300, 0);
            base.learners = learners;
            (base, 1, vec![(0, 7), (1, 1), (1, 6)])
        }
        ExperimentId::Counterexample => {
            let mut state = CounterexampleState::new(opts.t0)?;
            let rounds = state.boundary(2);
            let spec = LearnerSpec::Counterexample { t0: opts.t0 };
            let mut base = RunConfig::symmetric(values(&[3, 3]), spec, rounds, 0);
            base.checkpoint_stride = Some((rounds / 1000).max(1));
            (base, 1, vec![(0, 1), (0, 2), (1, 1), (1, 2)])
        }
    };
    let mut base = base;
    if let Some(r) = opts.rounds {
        base.rounds = r;
    }
    if let Some(s) = opts.stride {
        base.checkpoint_stride = Some(s);
    }
    if id == ExperimentId::Counterexample {
        let mut state = CounterexampleState::new(opts.t0)?;
        let mut k = 0;
        while state.boundary(k) < base.rounds {
            base.snapshot_rounds.push(state.boundary(k) + 1);
            k += 1;
        }
    }
    base.audit = opts.audit;
    let mut batch = BatchConfig::new(base, opts.runs.unwrap_or(runs), opts.master_seed);
    batch.tracked = tracked;
    batch.validate()?;
    Ok(batch)
}

/// A finished preset: the batch summary, scalar metrics and the first run.
#[derive(Debug, Clone)]
pub struct Reproduction {
    pub id: ExperimentId,
    pub batch: BatchConfig,
    pub summary: BatchSummary,
    pub metrics: BTreeMap<String, f64>,
    pub sample: RunRecord,
}

#[derive(Serialize)]
struct Report<'a> {
    id: ExperimentId,
    runs: usize,
    master_seed: u64,
    counts: VerdictCounts,
    metrics: &'a BTreeMap<String, f64>,
}

struct PerRun {
    violations: usize,
    values: Vec<f64>,
    sample: Option<RunRecord>,
}

/// Per-run scalar measurements, in the order of [`metric_names`].
fn measure(id: ExperimentId, record: &RunRecord, ne: &EquilibriumSet) -> Vec<f64> {
    let t = record.rounds();
    match id {
        ExperimentId::M2EpsGreedy | ExperimentId::M2Mwu => vec![final_ne_fraction(record, ne)],
        ExperimentId::M1EpsGreedy | ExperimentId::M1Mwu => {
            let half = (t / 2).max(1);
            let osc = oscillation_indicator(record, 1, half..=t).unwrap_or(0);
            vec![
                (osc >= 3) as u8 as f64,
                (record.stats.f(1, 5) <= 0.95) as u8 as f64,
                record.stats.f(0, 6),
            ]
        }
        ExperimentId::Example1 => {
            let exact = record
                .profiles()
                .enumerate()
                .all(|(k, bids)| bids == EXAMPLE1_CYCLE[k % 3]);
            vec![final_ne_fraction(record, ne), exact as u8 as f64]
        }
        ExperimentId::Counterexample => {
            let t0 = match record.config.learners[0] {
                LearnerSpec::Counterexample { t0 } => t0,
                _ => 0,
            };
            let state = CounterexampleState::new(t0).expect("validated");
            let one_end = state.one_phase_end();
            let phases = record.profiles().take(t0.min(t) as usize).enumerate().all(|(k, bids)| {
                let want = if (k as u64) < one_end { 1 } else { 0 };
                bids.iter().all(|&b| b == want)
            });
            let excursions = record
                .checkpoints
                .iter()
                .filter(|c| record.config.snapshot_rounds.contains(&c.t))
                .filter(|c| c.x.iter().all(|x| x.prob(2) == 1.0))
                .count();
            let f1 = (0..record.n()).map(|i| record.stats.f(i, 1)).fold(1.0, f64::min);
            vec![phases as u8 as f64, excursions as f64, f1]
        }
    }
}

fn metric_names(id: ExperimentId) -> &'static [&'static str] {
    match id {
        ExperimentId::M2EpsGreedy | ExperimentId::M2Mwu => &["mean_ne_fraction"],
        ExperimentId::M1EpsGreedy | ExperimentId::M1Mwu => {
            &["frac_oscillating", "frac_f2_bid5_le_0.95", "mean_f1_bid6"]
        }
        ExperimentId::Example1 => &["ne_fraction", "cycle_exact"],
        ExperimentId::Counterexample => &["phases_exact", "boundary_point_masses", "min_f_bid1"],
    }
}

/// Run a preset.
pub fn reproduce(id: ExperimentId, opts: &ExperimentOptions) -> Result<Reproduction> {
    let batch = batch_config(id, opts)?;
    let ne = enumerate_pure_nash(&batch.base.values)?;
    let (summary, per_run) = run_batch_with(&batch, |index, record| PerRun {
        violations: record.violations.len(),
        values: measure(id, record, &ne),
        sample: (index == 0).then(|| record.clone()),
    })?;

    let runs = per_run.len() as f64;
    let mut metrics = BTreeMap::new();
    for (k, name) in metric_names(id).iter().enumerate() {
        let mean = per_run.iter().map(|p| p.values[k]).sum::<f64>() / runs;
        metrics.insert(name.to_string(), mean);
    }
    let c = summary.counts;
    metrics.insert("frac_v_minus_1".into(), c.v_minus_1 as f64 / runs);
    metrics.insert("frac_v_minus_2".into(), c.v_minus_2 as f64 / runs);
    metrics.insert("frac_not_converged".into(), c.not_converged as f64 / runs);
    if batch.base.audit {
        let total: usize = per_run.iter().map(|p| p.violations).sum();
        metrics.insert("audit_violations".into(), total as f64);
    }
    let sample = per_run
        .into_iter()
        .find_map(|p| p.sample)
        .expect("a batch has at least one run");
    Ok(Reproduction {
        id,
        batch,
        summary,
        metrics,
        sample,
    })
}

/// Which artifact kinds to write.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub json: bool,
    pub csv: bool,
    pub svg: bool,
}

impl Default for Formats {
    fn default() -> Self {
        Self {
            json: true,
            csv: true,
            svg: true,
        }
    }
}

/// Frequency bands of the batch, one median line and shaded band each.
pub fn bands_chart(summary: &BatchSummary, title: &str) -> LineChart {
    let mut chart = LineChart::new(title, "round t", "frequency");
    chart.y_range = Some((0.0, 1.0));
    for b in &summary.bands {
        let x: Vec<f64> = b.t.iter().map(|&t| t as f64).collect();
        let label = format!("bidder {} bid {}", b.bidder + 1, b.bid);
        chart.bands.push(Band {
            label: format!("{label} band"),
            x: x.clone(),
            lo: b.lo.clone(),
            hi: b.hi.clone(),
        });
        chart.series.push(Series {
            label: format!("{label} median"),
            points: x.into_iter().zip(b.median.iter().copied()).collect(),
        });
    }
    chart
}

/// Mixed strategy (`strategy = true`) or bid frequencies of one bidder over
/// the checkpoints of a run.
pub fn run_chart(record: &RunRecord, bidder: usize, strategy: bool) -> LineChart {
    let what = if strategy { "mixed strategy" } else { "bid frequency" };
    let mut chart = LineChart::new(format!("bidder {} {what}", bidder + 1), "round t", what);
    chart.y_range = Some((0.0, 1.0));
    let bids = record.config.values.bid_count(bidder);
    for b in 0..bids {
        let points = record
            .checkpoints
            .iter()
            // Skip the snapshot-only rounds so the polyline stays on the stride grid.
            .filter(|c| !record.config.snapshot_rounds.contains(&c.t))
            .map(|c| {
                let y = if strategy { c.x[bidder].prob(b as u32) } else { c.f[bidder][b] };
                (c.t as f64, y)
            })
            .collect();
        chart.series.push(Series {
            label: format!("bid {b}"),
            points,
        });
    }
    chart
}

/// Write `summary.json`, `report.json`, band CSVs, the first run's
/// `run.json` and `trace.csv`, and SVG charts into `dir`.
pub fn write_artifacts(rep: &Reproduction, dir: &Path, formats: Formats) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let ne = enumerate_pure_nash(&rep.batch.base.values)?;
    if formats.json {
        let path = dir.join("summary.json");
        write_text(&path, &output::summary_json(&rep.summary)?)?;
        written.push(path);
        let report = Report {
            id: rep.id,
            runs: rep.batch.runs,
            master_seed: rep.batch.master_seed,
            counts: rep.summary.counts,
            metrics: &rep.metrics,
        };
        let path = dir.join("report.json");
        write_json(&path, &report)?;
        written.push(path);
        let verdict = crate::dynamics::classify_convergence(&rep.sample, rep.batch.bidder(), rep.batch.threshold)?;
        let path = dir.join("run.json");
        write_text(&path, &RunDocument::new(&rep.sample, Some(verdict)).to_json()?)?;
        written.push(path);
    }
    if formats.csv {
        for band in &rep.summary.bands {
            let path = dir.join(output::band_file_name(band));
            write_text(&path, &output::band_csv(band, rep.batch.quantiles))?;
            written.push(path);
        }
        if rep.sample.rounds() <= MAX_TRACE_ROUNDS {
            let path = dir.join("trace.csv");
            output::write_trace(&path, &rep.sample, &ne)?;
            written.push(path);
        }
    }
    if formats.svg {
        let path = dir.join("bands.svg");
        write_text(&path, &bands_chart(&rep.summary, &format!("{} frequency bands", rep.id)).render())?;
        written.push(path);
        for i in 0..rep.sample.n() {
            for (strategy, stem) in [(true, "strategy"), (false, "frequency")] {
                let path = dir.join(format!("run_{stem}_bidder{}.svg", i + 1));
                write_text(&path, &run_chart(&rep.sample, i, strategy).render())?;
                written.push(path);
            }
        }
    }
    Ok(written)
}
