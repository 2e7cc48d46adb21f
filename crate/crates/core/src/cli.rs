use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use fpa_core::dynamics::{audit_checkpoints, classify_convergence, read_trace_csv, run, RunConfig, DEFAULT_THRESHOLD};
use fpa_core::equilibrium::{brute_force_nash_with_limit, enumerate_pure_nash_with_limit, DEFAULT_PROFILE_LIMIT};
use fpa_core::experiments::{self, example1_tiebreaks, ExperimentId, ExperimentOptions, Formats};
use fpa_core::learners::{EpsSchedule, GammaSchedule, LearnerSpec, TieBreak, Violation};
use fpa_core::montecarlo::{run_batch, BatchConfig};
use fpa_core::output::{self, write_json, write_text, RunDocument};
use fpa_core::{enumerate_pure_nash, Error, EquilibriumSet, ValueProfile};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CAPACITY: u8 = 3;
const EXIT_VIOLATIONS: u8 = 4;

#[derive(Parser)]
#[command(name = "fpa", version, about = "Repeated first price auctions played by mean-based learners")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pure Nash equilibria of the stage game.
    Equilibria(EquilibriaArgs),
    /// One seeded run; writes run.json and trace.csv.
    Simulate(SimulateArgs),
    /// A batch of seeded runs; writes summary.json and band CSVs.
    Montecarlo(MontecarloArgs),
    /// Run a preset experiment.
    Reproduce(ReproduceArgs),
    /// Check strategy snapshots against the mean-based condition.
    Audit(AuditArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Closed,
    Brute,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SetFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Artifact {
    Json,
    Csv,
    Svg,
}

fn formats(list: &[Artifact]) -> Formats {
    Formats {
        json: list.contains(&Artifact::Json),
        csv: list.contains(&Artifact::Csv),
        svg: list.contains(&Artifact::Svg),
    }
}

#[derive(Args)]
struct EquilibriaArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<u32>,
    #[arg(long, value_enum, default_value = "closed")]
    method: Method,
    /// Format of the set printed on stdout.
    #[arg(long, value_enum, default_value = "json")]
    format: SetFormat,
    /// Also write equilibria.json (and agreement.json for --method both) here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Largest number of profiles an enumeration may visit.
    #[arg(long, default_value_t = DEFAULT_PROFILE_LIMIT)]
    limit: u128,
}

/// Run flags shared by simulate, montecarlo and audit. Unset flags fall back
/// to the `--config` file.
#[derive(Args, Clone, Default)]
struct RunArgs {
    /// TOML file with any of the run and batch flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<u32>>,
    /// ftl, eps-greedy, mwu or counterexample; one per bidder or one for all.
    #[arg(long, value_delimiter = ',')]
    algo: Option<Vec<String>>,
    /// lowest, highest, round-robin, example1, or scripted:B,B;B,B;... with
    /// one sequence per bidder (or one shared).
    #[arg(long)]
    tiebreak: Option<String>,
    #[arg(long)]
    eps_scale: Option<f64>,
    #[arg(long)]
    eps_exponent: Option<f64>,
    #[arg(long)]
    t0: Option<u64>,
    #[arg(long)]
    rounds: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Rounds between strategy snapshots.
    #[arg(long)]
    stride: Option<u64>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Audit every round while running and write violations.json.
    #[arg(long)]
    audit: bool,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "json,csv")]
    format: Vec<Artifact>,
}

#[derive(Args)]
struct MontecarloArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    master_seed: Option<u64>,
    /// Bidder (1-based) whose frequencies decide the verdict.
    #[arg(long)]
    classify_bidder: Option<usize>,
    /// Frequency series to band, as BIDDER:BID with 1-based bidders.
    #[arg(long, value_delimiter = ',')]
    track: Vec<String>,
    #[arg(long, value_delimiter = ',', num_args = 2)]
    quantiles: Option<Vec<f64>>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "json,csv")]
    format: Vec<Artifact>,
}

#[derive(Args)]
struct ReproduceArgs {
    /// m2-epsgreedy, m2-mwu, m1-epsgreedy, m1-mwu, example1 or counterexample.
    id: String,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    rounds: Option<u64>,
    #[arg(long)]
    stride: Option<u64>,
    #[arg(long, default_value_t = experiments::DEFAULT_MASTER_SEED)]
    master_seed: u64,
    #[arg(long, default_value_t = experiments::DEFAULT_T0)]
    t0: u64,
    /// Skip the online mean-based audit.
    #[arg(long)]
    no_audit: bool,
    /// Defaults to out/<id>.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "json,csv,svg")]
    format: Vec<Artifact>,
}

#[derive(Args)]
struct AuditArgs {
    /// A run.json to audit instead of simulating.
    #[arg(long)]
    record: Option<PathBuf>,
    /// Trace of the recorded run; defaults to trace.csv next to the record.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// default, zero, eps[:FACTOR] or counterexample[:T0].
    #[arg(long, default_value = "default")]
    gamma: String,
    /// Exit with status 4 when any violation is found.
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    run: RunArgs,
}

/// Keys accepted in a `--config` TOML file.
#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    values: Option<Vec<u32>>,
    algo: Option<String>,
    tiebreak: Option<String>,
    eps_scale: Option<f64>,
    eps_exponent: Option<f64>,
    t0: Option<u64>,
    rounds: Option<u64>,
    seed: Option<u64>,
    stride: Option<u64>,
    threshold: Option<f64>,
    out: Option<PathBuf>,
    runs: Option<usize>,
    master_seed: Option<u64>,
}

/// A failure with the exit status it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Capacity { .. } => EXIT_CAPACITY,
            Error::Io(_) => EXIT_FAILURE,
            Error::Domain(_) | Error::Config(_) | Error::UnknownExperiment(_) => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: msg.into(),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Equilibria(a) => cmd_equilibria(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Montecarlo(a) => cmd_montecarlo(a),
        Command::Reproduce(a) => cmd_reproduce(a),
        Command::Audit(a) => cmd_audit(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load_file_config(path: Option<&Path>) -> CliResult<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn parse_bid_list(s: &str) -> CliResult<Vec<u32>> {
    s.split(',')
        .map(|b| b.trim().parse::<u32>().map_err(|_| usage(format!("bad bid `{b}` in tie-break script"))))
        .collect()
}

fn parse_tiebreaks(s: &str, n: usize) -> CliResult<Vec<TieBreak>> {
    let shared = |tb: TieBreak| Ok(vec![tb; n]);
    match s {
        "lowest" | "lowest-bid" => shared(TieBreak::LowestBid),
        "highest" | "highest-bid" => shared(TieBreak::HighestBid),
        "round-robin" => shared(TieBreak::RoundRobin),
        "example1" => {
            if n != 3 {
                return Err(usage(format!("tie-break example1 needs 3 bidders, got {n}")));
            }
            Ok(example1_tiebreaks())
        }
        _ => {
            let Some(body) = s.strip_prefix("scripted:") else {
                return Err(usage(format!("unknown tie-break `{s}`")));
            };
            let seqs = body.split(';').map(parse_bid_list).collect::<CliResult<Vec<_>>>()?;
            match seqs.len() {
                1 => shared(TieBreak::Scripted(seqs[0].clone())),
                k if k == n => Ok(seqs.into_iter().map(TieBreak::Scripted).collect()),
                k => Err(usage(format!("{k} tie-break scripts for {n} bidders"))),
            }
        }
    }
}

struct Resolved {
    config: RunConfig,
    threshold: f64,
    out: Option<PathBuf>,
    file: FileConfig,
}

impl RunArgs {
    fn resolve(&self) -> CliResult<Resolved> {
        let file = load_file_config(self.config.as_deref())?;
        let values = self
            .values
            .clone()
            .or_else(|| file.values.clone())
            .ok_or_else(|| usage("missing --values"))?;
        let values = ValueProfile::new(values)?;
        let n = values.n();
        let algos: Vec<String> = match (&self.algo, &file.algo) {
            (Some(a), _) => a.clone(),
            (None, Some(a)) => a.split(',').map(|s| s.trim().to_string()).collect(),
            (None, None) => return Err(usage("missing --algo")),
        };
        let algos = match algos.len() {
            1 => vec![algos[0].clone(); n],
            k if k == n => algos,
            k => return Err(usage(format!("{k} algorithms for {n} bidders"))),
        };
        let tiebreaks = match self.tiebreak.as_deref().or(file.tiebreak.as_deref()) {
            Some(s) => parse_tiebreaks(s, n)?,
            None => vec![TieBreak::LowestBid; n],
        };
        let defaults = EpsSchedule::default();
        let schedule = EpsSchedule {
            scale: self.eps_scale.or(file.eps_scale).unwrap_or(defaults.scale),
            exponent: self.eps_exponent.or(file.eps_exponent).unwrap_or(defaults.exponent),
        };
        let t0 = self.t0.or(file.t0).unwrap_or(experiments::DEFAULT_T0);
        let learners = algos
            .iter()
            .zip(tiebreaks)
            .map(|(a, tiebreak)| match a.as_str() {
                "ftl" => Ok(LearnerSpec::Ftl { tiebreak }),
                "eps-greedy" | "epsgreedy" => Ok(LearnerSpec::EpsGreedy { schedule, tiebreak }),
                "mwu" => Ok(LearnerSpec::Mwu { schedule }),
                "counterexample" => Ok(LearnerSpec::Counterexample { t0 }),
                other => Err(usage(format!("unknown algorithm `{other}`"))),
            })
            .collect::<CliResult<Vec<_>>>()?;
        let rounds = self
            .rounds
            .or(file.rounds)
            .ok_or_else(|| usage("missing --rounds"))?;
        let mut config = RunConfig::symmetric(values, LearnerSpec::ftl(), rounds, self.seed.or(file.seed).unwrap_or(0));
        config.learners = learners;
        config.checkpoint_stride = self.stride.or(file.stride);
        config.validate()?;
        Ok(Resolved {
            config,
            threshold: self.threshold.or(file.threshold).unwrap_or(DEFAULT_THRESHOLD),
            out: self.out.clone().or_else(|| file.out.clone()),
            file,
        })
    }
}

fn out_dir(out: Option<PathBuf>) -> PathBuf {
    out.unwrap_or_else(|| PathBuf::from("out"))
}

fn set_json(set: &EquilibriumSet) -> String {
    serde_json::to_string(set).expect("bid vectors serialize")
}

fn set_csv(set: &EquilibriumSet, n: usize) -> String {
    let mut s = (1..=n).map(|i| format!("bid_{i}")).collect::<Vec<_>>().join(",");
    s.push('\n');
    for p in set.profiles() {
        let row: Vec<String> = p.bids().iter().map(u32::to_string).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct Agreement<'a> {
    values: &'a [u32],
    closed: &'a EquilibriumSet,
    brute: &'a EquilibriumSet,
    agreement: bool,
}

fn cmd_equilibria(a: EquilibriaArgs) -> CliResult<u8> {
    let values = ValueProfile::new(a.values)?;
    let closed = match a.method {
        Method::Closed | Method::Both => Some(enumerate_pure_nash_with_limit(&values, a.limit)?),
        Method::Brute => None,
    };
    let brute = match a.method {
        Method::Brute | Method::Both => Some(brute_force_nash_with_limit(&values, a.limit)?),
        Method::Closed => None,
    };
    let set = closed.as_ref().or(brute.as_ref()).expect("one method ran");
    let stdout = match a.format {
        SetFormat::Json => format!("{}\n", set_json(set)),
        SetFormat::Csv => set_csv(set, values.n()),
    };
    let report = match (&closed, &brute) {
        (Some(c), Some(b)) => Some(Agreement {
            values: values.values(),
            closed: c,
            brute: b,
            agreement: c == b,
        }),
        _ => None,
    };
    print!("{stdout}");
    if let Some(r) = &report {
        println!("agreement: {}", r.agreement);
    }
    if let Some(dir) = a.out {
        let ext = if a.format == SetFormat::Json { "json" } else { "csv" };
        write_text(&dir.join(format!("equilibria.{ext}")), &stdout)?;
        if let Some(r) = &report {
            write_json(&dir.join("agreement.json"), r)?;
        }
    }
    Ok(match report {
        Some(r) if !r.agreement => EXIT_FAILURE,
        _ => 0,
    })
}

fn print_frequencies(freqs: &[Vec<f64>]) {
    println!("terminal frequencies:");
    for (i, f) in freqs.iter().enumerate() {
        let row: Vec<String> = f.iter().map(|p| format!("{p:.4}")).collect();
        println!("  bidder {}: {}", i + 1, row.join(" "));
    }
}

fn report_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn cmd_simulate(a: SimulateArgs) -> CliResult<u8> {
    let resolved = a.run.resolve()?;
    let mut config = resolved.config;
    config.audit = a.audit;
    let fmt = formats(&a.format);
    let dir = out_dir(resolved.out);
    let record = run(config)?;
    let bidder = record.config.values.top_group()[0];
    let verdict = classify_convergence(&record, bidder, resolved.threshold)?;
    let ne = enumerate_pure_nash(&record.config.values)?;

    println!(
        "verdict: {} (bidder {}: f(v-1)={:.4}, f(v-2)={:.4})",
        outcome_name(verdict.outcome),
        bidder + 1,
        verdict.freq_minus_one,
        verdict.freq_minus_two
    );
    print_frequencies(&record.terminal_frequencies());
    let mut written = Vec::new();
    if fmt.json {
        let path = dir.join("run.json");
        output::write_run_json(&path, &record, Some(verdict))?;
        written.push(path);
    }
    if fmt.csv {
        let path = dir.join("trace.csv");
        output::write_trace(&path, &record, &ne)?;
        written.push(path);
    }
    if fmt.svg {
        for i in 0..record.n() {
            for (strategy, stem) in [(true, "strategy"), (false, "frequency")] {
                let path = dir.join(format!("run_{stem}_bidder{}.svg", i + 1));
                write_text(&path, &experiments::run_chart(&record, i, strategy).render())?;
                written.push(path);
            }
        }
    }
    if a.audit {
        println!("audit violations: {}", record.violations.len());
        let path = dir.join("violations.json");
        write_json(&path, &record.violations)?;
        written.push(path);
    }
    report_written(&written);
    Ok(0)
}

fn outcome_name(o: fpa_core::Outcome) -> String {
    serde_json::to_value(o)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn parse_track(s: &str, n: usize) -> CliResult<(usize, u32)> {
    let (i, b) = s
        .split_once(':')
        .ok_or_else(|| usage(format!("--track expects BIDDER:BID, got `{s}`")))?;
    let i: usize = i.trim().parse().map_err(|_| usage(format!("bad bidder in `{s}`")))?;
    let b: u32 = b.trim().parse().map_err(|_| usage(format!("bad bid in `{s}`")))?;
    if i == 0 || i > n {
        return Err(usage(format!("bidder {i} out of range 1..={n}")));
    }
    Ok((i - 1, b))
}

fn cmd_montecarlo(a: MontecarloArgs) -> CliResult<u8> {
    let resolved = a.run.resolve()?;
    let n = resolved.config.values.n();
    let runs = a
        .runs
        .or(resolved.file.runs)
        .ok_or_else(|| usage("missing --runs"))?;
    let master = a.master_seed.or(resolved.file.master_seed).unwrap_or(experiments::DEFAULT_MASTER_SEED);
    let mut batch = BatchConfig::new(resolved.config, runs, master);
    batch.threshold = resolved.threshold;
    batch.classify_bidder = match a.classify_bidder {
        Some(0) => return Err(usage("bidders are numbered from 1")),
        Some(i) => Some(i - 1),
        None => None,
    };
    batch.tracked = a.track.iter().map(|s| parse_track(s, n)).collect::<CliResult<_>>()?;
    if let Some(q) = &a.quantiles {
        batch.quantiles = (q[0], q[1]);
    }
    let summary = run_batch(&batch)?;
    let c = summary.counts;
    println!(
        "counts: v_minus_2={} v_minus_1={} not_converged={} (R={runs}, master seed {master})",
        c.v_minus_2, c.v_minus_1, c.not_converged
    );
    let dir = out_dir(resolved.out);
    let fmt = formats(&a.format);
    let mut written = Vec::new();
    if fmt.json {
        let path = dir.join("summary.json");
        write_text(&path, &output::summary_json(&summary)?)?;
        written.push(path);
    }
    if fmt.csv {
        for band in &summary.bands {
            let path = dir.join(output::band_file_name(band));
            write_text(&path, &output::band_csv(band, batch.quantiles))?;
            written.push(path);
        }
    }
    if fmt.svg {
        let path = dir.join("bands.svg");
        write_text(&path, &experiments::bands_chart(&summary, "frequency bands").render())?;
        written.push(path);
    }
    report_written(&written);
    Ok(0)
}

fn cmd_reproduce(a: ReproduceArgs) -> CliResult<u8> {
    let id: ExperimentId = a.id.parse()?;
    let opts = ExperimentOptions {
        master_seed: a.master_seed,
        runs: a.runs,
        rounds: a.rounds,
        stride: a.stride,
        t0: a.t0,
        audit: !a.no_audit,
    };
    let rep = experiments::reproduce(id, &opts)?;
    let c = rep.summary.counts;
    println!(
        "{id}: v_minus_2={} v_minus_1={} not_converged={} (R={})",
        c.v_minus_2, c.v_minus_1, c.not_converged, rep.batch.runs
    );
    for (k, v) in &rep.metrics {
        println!("  {k} = {v}");
    }
    let dir = a.out.unwrap_or_else(|| Path::new("out").join(id.as_str()));
    let written = experiments::write_artifacts(&rep, &dir, formats(&a.format))?;
    report_written(&written);
    Ok(0)
}

fn parse_gamma(s: &str, spec: &LearnerSpec) -> CliResult<Option<GammaSchedule>> {
    let (name, arg) = match s.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (s, None),
    };
    let schedule = match spec {
        LearnerSpec::EpsGreedy { schedule, .. } | LearnerSpec::Mwu { schedule } => *schedule,
        _ => EpsSchedule::default(),
    };
    let number = |a: &str| a.parse::<f64>().map_err(|_| usage(format!("bad gamma argument `{a}`")));
    let g = match (name, arg) {
        ("default", None) => spec.default_gamma(),
        ("zero", None) => Some(GammaSchedule::Zero),
        ("eps", None) => Some(GammaSchedule::Eps { schedule, factor: 1.0 }),
        ("eps", Some(a)) => Some(GammaSchedule::Eps {
            schedule,
            factor: number(a)?,
        }),
        ("counterexample", arg) => {
            let t0 = match (arg, spec) {
                (Some(a), _) => a.parse().map_err(|_| usage(format!("bad T0 `{a}`")))?,
                (None, LearnerSpec::Counterexample { t0 }) => *t0,
                (None, _) => experiments::DEFAULT_T0,
            };
            Some(GammaSchedule::Counterexample { t0 })
        }
        _ => return Err(usage(format!("unknown gamma `{s}`"))),
    };
    if let Some(g) = &g {
        g.validate()?;
    }
    Ok(g)
}

fn load_record(record: &Path, trace: Option<&Path>) -> CliResult<(RunDocument, Vec<Vec<u32>>)> {
    let text = fs::read_to_string(record).map_err(|e| usage(format!("{}: {e}", record.display())))?;
    let doc = RunDocument::from_json(&text)?;
    let trace_path = trace
        .map(Path::to_path_buf)
        .unwrap_or_else(|| record.with_file_name("trace.csv"));
    let file = fs::File::open(&trace_path).map_err(|e| usage(format!("{}: {e}", trace_path.display())))?;
    let trace = read_trace_csv(BufReader::new(file))?;
    Ok((doc, trace))
}

fn cmd_audit(a: AuditArgs) -> CliResult<u8> {
    let (config, trace, checkpoints, dir) = match &a.record {
        Some(path) => {
            let (doc, trace) = load_record(path, a.trace.as_deref())?;
            let dir = a.run.out.clone().unwrap_or_else(|| path.parent().unwrap_or(Path::new(".")).to_path_buf());
            (doc.config, trace, doc.checkpoints, dir)
        }
        None => {
            let resolved = a.run.resolve()?;
            let mut config = resolved.config;
            if a.run.stride.is_none() && resolved.file.stride.is_none() {
                config.checkpoint_stride = Some(1);
            }
            let record = run(config)?;
            let trace = record.profiles().map(<[u32]>::to_vec).collect();
            (record.config, trace, record.checkpoints, out_dir(resolved.out))
        }
    };
    if checkpoints.is_empty() {
        return Err(usage("the record has no strategy snapshots; rerun with a checkpoint stride"));
    }
    let gammas = config
        .learners
        .iter()
        .map(|spec| parse_gamma(&a.gamma, spec))
        .collect::<CliResult<Vec<_>>>()?;
    let violations: Vec<Violation> = audit_checkpoints(&config.values, &trace, &checkpoints, &gammas)?;

    let audited: Vec<usize> = (0..gammas.len()).filter(|&i| gammas[i].is_some()).collect();
    println!(
        "audited {} snapshots for bidders {:?}",
        checkpoints.len(),
        audited.iter().map(|i| i + 1).collect::<Vec<_>>()
    );
    println!("violations: {}", violations.len());
    let mut stdout = io::stdout().lock();
    for v in violations.iter().take(10) {
        let _ = writeln!(
            stdout,
            "  t={} bidder {} bid {} p={:.4} trails bid {} by {:.4}",
            v.t,
            v.bidder + 1,
            v.bid,
            v.prob,
            v.better_bid,
            v.gap
        );
    }
    drop(stdout);
    let path = dir.join("violations.json");
    write_json(&path, &violations)?;
    println!("wrote {}", path.display());
    Ok(if a.strict && !violations.is_empty() {
        EXIT_VIOLATIONS
    } else {
        0
    })
}
