//! Text serializations of sweep and zero-one reports.
//!
//! CSV files start with a single `# manifest: <json>` comment line followed by
//! the header and data rows; everything after the comment is the "body",
//! which depends only on the resolved configuration and seed. Probabilities
//! are written with six decimals, counts and integer parameters exactly, and
//! channel values in shortest round-trip form.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{SweepReport, ZeroOneReport};

pub const SWEEP_HEADER: &str = "model,alpha_or_rho,K,n,P,trials,count_connected,count_no_isolated,p_connected,p_no_isolated,ci_low,ci_high,threshold_K";
pub const ZEROONE_HEADER: &str = "n,K,P,alpha,achieved_c,p_connected,p_no_isolated";

/// Provenance embedded in every emitted report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Fully resolved configuration, replayable through `--config`.
    pub config: serde_json::Value,
    pub master_seed: u64,
    pub tool_version: String,
    pub duration_secs: f64,
}

impl RunManifest {
    pub fn comment_line(&self) -> String {
        format!("# manifest: {}\n", serde_json::to_string(self).expect("manifest serializes"))
    }
}

fn opt_k(k: Option<u32>) -> String {
    k.map(|k| k.to_string()).unwrap_or_default()
}

/// Header and rows of the sweep CSV, without the manifest line.
pub fn sweep_csv_body(report: &SweepReport) -> String {
    let mut out = String::new();
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for row in &report.rows {
        let e = &row.estimate;
        let key = e.model.key();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{}",
            e.model.kind().as_str(),
            e.model.channel_value(),
            key.k(),
            e.n,
            key.p(),
            e.trials,
            e.count_connected,
            e.count_no_isolated,
            e.p_connected,
            e.p_no_isolated,
            e.ci_low,
            e.ci_high,
            opt_k(row.threshold_k),
        );
    }
    out
}

pub fn sweep_csv(report: &SweepReport, manifest: &RunManifest) -> String {
    manifest.comment_line() + &sweep_csv_body(report)
}

#[derive(Serialize)]
struct JsonEnvelope<'a, T: Serialize> {
    manifest: &'a RunManifest,
    report: &'a T,
}

pub fn sweep_json(report: &SweepReport, manifest: &RunManifest) -> String {
    serde_json::to_string_pretty(&JsonEnvelope { manifest, report }).expect("report serializes")
}

/// Two-column `K p_connected` data for each channel value, headed by a
/// `# threshold=<K*>` comment. Returns `(channel value, file contents)`.
pub fn sweep_plot_data(report: &SweepReport) -> Vec<(f64, String)> {
    report
        .thresholds
        .iter()
        .enumerate()
        .map(|(i, mark)| {
            let mut s = format!(
                "# threshold={}\n",
                mark.threshold_k.map_or_else(|| "none".to_string(), |k| k.to_string())
            );
            for row in report.curve(i) {
                let _ = writeln!(s, "{} {:.6}", row.estimate.model.key().k(), row.estimate.p_connected);
            }
            (mark.channel_value, s)
        })
        .collect()
}

pub fn zeroone_csv_body(report: &ZeroOneReport) -> String {
    let mut out = String::new();
    out.push_str(ZEROONE_HEADER);
    out.push('\n');
    for row in &report.rows {
        let key = row.point.params.key();
        let _ = writeln!(
            out,
            "{},{},{},{},{:.6},{:.6},{:.6}",
            row.point.n,
            key.k(),
            key.p(),
            row.point.params.alpha(),
            row.point.achieved_c,
            row.estimate.p_connected,
            row.estimate.p_no_isolated,
        );
    }
    out
}

pub fn zeroone_csv(report: &ZeroOneReport, manifest: &RunManifest) -> String {
    manifest.comment_line() + &zeroone_csv_body(report)
}

pub fn zeroone_json(report: &ZeroOneReport, manifest: &RunManifest) -> String {
    serde_json::to_string_pretty(&JsonEnvelope { manifest, report }).expect("report serializes")
}

/// One parsed row of a sweep CSV.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SweepCsvRow {
    pub model: String,
    pub alpha_or_rho: f64,
    #[serde(rename = "K")]
    pub k: u32,
    pub n: usize,
    #[serde(rename = "P")]
    pub p: u32,
    pub trials: u64,
    pub count_connected: u64,
    pub count_no_isolated: u64,
    pub p_connected: f64,
    pub p_no_isolated: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    #[serde(rename = "threshold_K")]
    pub threshold_k: Option<u32>,
}

/// Parses a sweep CSV, skipping `#` comment lines.
pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepCsvRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    reader
        .deserialize()
        .map(|r| r.map_err(|e| Error::InvalidArgument(format!("bad sweep csv: {e}"))))
        .collect()
}

/// Extracts the manifest from a report's first comment line.
pub fn parse_manifest_line(text: &str) -> Result<RunManifest> {
    let line = text
        .lines()
        .next()
        .and_then(|l| l.strip_prefix("# manifest: "))
        .ok_or_else(|| Error::InvalidArgument("missing manifest line".into()))?;
    serde_json::from_str(line).map_err(|e| Error::InvalidArgument(format!("bad manifest: {e}")))
}

/// Everything after the leading comment lines.
pub fn csv_body(text: &str) -> &str {
    let mut rest = text;
    while rest.starts_with('#') {
        rest = rest.split_once('\n').map_or("", |(_, tail)| tail);
    }
    rest
}
