//! On-disk formats: `run.json`, `trace.csv`, `summary.json` and the band
//! CSVs. Nothing written here carries a timestamp, so identical inputs give
//! byte-identical files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{write_trace_csv, Checkpoint, ConvergenceVerdict, RunConfig, RunRecord};
use crate::equilibrium::EquilibriumSet;
use crate::error::{Error, Result};
use crate::montecarlo::{BatchSummary, FrequencyBand};

/// The `run.json` document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDocument {
    pub config: RunConfig,
    pub verdict: Option<ConvergenceVerdict>,
    pub terminal_frequencies: Vec<Vec<f64>>,
    pub checkpoints: Vec<Checkpoint>,
}

impl RunDocument {
    pub fn new(record: &RunRecord, verdict: Option<ConvergenceVerdict>) -> Self {
        Self {
            config: record.config.clone(),
            verdict,
            terminal_frequencies: record.terminal_frequencies(),
            checkpoints: record.checkpoints.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        to_pretty_json(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("run document: {e}")))
    }
}

pub(crate) fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &to_pretty_json(value)?)
}

pub fn write_run_json(path: &Path, record: &RunRecord, verdict: Option<ConvergenceVerdict>) -> Result<()> {
    write_text(path, &RunDocument::new(record, verdict).to_json()?)
}

pub fn write_trace(path: &Path, record: &RunRecord, ne: &EquilibriumSet) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut out = BufWriter::new(file);
    write_trace_csv(record, ne, &mut out).map_err(|e| io_err(path, e))?;
    out.flush().map_err(|e| io_err(path, e))
}

/// `summary.json`: verdict counts and per-run seeds and verdicts.
pub fn summary_json(summary: &BatchSummary) -> Result<String> {
    to_pretty_json(summary)
}

fn quantile_label(q: f64) -> String {
    let pct = q * 100.0;
    if (pct - pct.round()).abs() < 1e-9 {
        format!("q{}", pct.round() as i64)
    } else {
        format!("q{pct}")
    }
}

/// `t,freq_q10,freq_median,freq_q90` for the default quantiles.
pub fn band_csv(band: &FrequencyBand, quantiles: (f64, f64)) -> String {
    let mut s = format!(
        "t,freq_{},freq_median,freq_{}\n",
        quantile_label(quantiles.0),
        quantile_label(quantiles.1)
    );
    for k in 0..band.t.len() {
        s.push_str(&format!("{},{},{},{}\n", band.t[k], band.lo[k], band.median[k], band.hi[k]));
    }
    s
}

/// File name of a band: bidders and bids are 1-based and 0-based
/// respectively, matching the trace columns and the bid values.
pub fn band_file_name(band: &FrequencyBand) -> String {
    format!("band_bidder{}_bid{}.csv", band.bidder + 1, band.bid)
}

/// Write `summary.json` and one CSV per band into `dir`.
pub fn write_batch(dir: &Path, summary: &BatchSummary, quantiles: (f64, f64)) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let path = dir.join("summary.json");
    write_text(&path, &summary_json(summary)?)?;
    written.push(path);
    for band in &summary.bands {
        let path = dir.join(band_file_name(band));
        write_text(&path, &band_csv(band, quantiles))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auction::ValueProfile;
    use crate::dynamics::run;
    use crate::learners::LearnerSpec;

    #[test]
    fn run_document_round_trips() {
        let values = ValueProfile::new(vec![4, 4]).unwrap();
        let cfg = RunConfig::symmetric(values, LearnerSpec::mwu(), 50, 7);
        let record = run(cfg).unwrap();
        let doc = RunDocument::new(&record, None);
        let text = doc.to_json().unwrap();
        let back = RunDocument::from_json(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn band_csv_layout() {
        let band = FrequencyBand {
            bidder: 0,
            bid: 2,
            t: vec![1, 2],
            lo: vec![0.0, 0.25],
            median: vec![0.5, 0.5],
            hi: vec![1.0, 0.75],
        };
        let csv = band_csv(&band, (0.1, 0.9));
        assert_eq!(csv, "t,freq_q10,freq_median,freq_q90\n1,0,0.5,1\n2,0.25,0.5,0.75\n");
        assert_eq!(band_file_name(&band), "band_bidder1_bid2.csv");
        assert_eq!(quantile_label(0.025), "q2.5");
    }
}
