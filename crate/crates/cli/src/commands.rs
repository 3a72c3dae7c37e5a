use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use keygraph_core::experiment::{run_sweep, zero_one_probe, ModelKind, SweepConfig, ZeroOneProbeConfig};
use keygraph_core::model::{critical_c, matched_rho, threshold_k, AlphaRule, KeyParams, ModelParams};
use keygraph_core::oracle::suite::{run_suite, Mutant, Suite};
use keygraph_core::report::{self, RunManifest};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::{config, Common, ConfigError, Format, VerifyFailed};

const DEFAULT_SEED: u64 = 2008;
const DEFAULT_ALPHAS: [f64; 4] = [0.2, 0.4, 0.6, 0.8];
/// Matched radii exist only below `alpha = pi / 4`.
const DEFAULT_DISK_ALPHAS: [f64; 3] = [0.2, 0.4, 0.6];

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepOpts {
    /// Channel model: on_off or disk.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<ModelKind>,
    /// Number of nodes.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    /// Key pool size P.
    #[arg(long = "pool-size", visible_alias = "P")]
    #[serde(skip_serializing_if = "Option::is_none", alias = "P")]
    pool_size: Option<u32>,
    /// Channel probabilities; for the disk model, radii matched to them.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<Vec<f64>>,
    /// Transmission radii for the disk model.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    #[serde(skip_serializing_if = "Option::is_none")]
    rho: Option<Vec<f64>>,
    #[arg(long = "k-min")]
    #[serde(skip_serializing_if = "Option::is_none")]
    k_min: Option<u32>,
    #[arg(long = "k-max")]
    #[serde(skip_serializing_if = "Option::is_none")]
    k_max: Option<u32>,
    /// Trials per grid point.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    trials: Option<u32>,
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdOpts {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long = "pool-size", visible_alias = "P")]
    #[serde(skip_serializing_if = "Option::is_none", alias = "P")]
    pool_size: Option<u32>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum SuiteArg {
    Bounds,
    Oracle,
    All,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyOpts {
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    suite: Option<SuiteArg>,
    /// Swap in a deliberately wrong bound to exercise failure reporting.
    #[arg(long = "inject-mutant", hide = true)]
    #[serde(skip)]
    inject_mutant: bool,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZeroOneOpts {
    /// Target constant in alpha (1 - q) = c log n / n.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    /// Pool growth: P = ceil(sigma n).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    /// constant:<a>, inverse_log:<a> or power_law:<gamma>.
    #[arg(long = "alpha-rule")]
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha_rule: Option<String>,
    #[arg(long = "n-list", value_delimiter = ',', num_args = 1..)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n_list: Option<Vec<usize>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    trials: Option<u32>,
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

fn file_layer(common: &Common, command: &str) -> Result<Option<Map<String, Value>>> {
    Ok(match &common.config {
        Some(path) => Some(config::load(path, command)?),
        None => None,
    })
}

fn manifest(command: &str, config: &impl Serialize, seed: u64, start: Instant) -> RunManifest {
    RunManifest {
        command: command.into(),
        config: serde_json::to_value(config).expect("config serializes"),
        master_seed: seed,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        duration_secs: start.elapsed().as_secs_f64(),
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| ConfigError(format!("cannot write {}: {e}", path.display())))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

/// Writes `<stem>.csv`, `<stem>.json` and any extra files under `--out`, or
/// prints the report in the selected format.
fn emit(common: &Common, stem: &str, csv: &str, json: &str, extra: &[(String, String)]) -> Result<()> {
    match &common.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .map_err(|e| ConfigError(format!("cannot create {}: {e}", dir.display())))?;
            write_file(dir, &format!("{stem}.csv"), csv)?;
            write_file(dir, &format!("{stem}.json"), json)?;
            for (name, contents) in extra {
                write_file(dir, name, contents)?;
            }
        }
        None => {
            let text = match common.format {
                Format::Csv => csv.to_string(),
                Format::Json => format!("{json}\n"),
            };
            // A closed pipe (`| head`) is not an error worth reporting.
            if let Err(e) = std::io::stdout().write_all(text.as_bytes()) {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(e.into());
                }
            }
        }
    }
    Ok(())
}

pub fn sweep(flags: &SweepOpts, common: &Common) -> Result<()> {
    let start = Instant::now();
    let mut opts: SweepOpts = config::merge(file_layer(common, "sweep")?, flags)?;
    if common.seed.is_some() {
        opts.seed = common.seed;
    }
    let model = opts.model.unwrap_or(ModelKind::OnOff);
    let channel_values = match (model, opts.alpha.take(), opts.rho.take()) {
        (_, Some(_), Some(_)) => {
            return Err(ConfigError("give either alpha or rho, not both".into()).into())
        }
        (ModelKind::OnOff, _, Some(_)) => {
            return Err(ConfigError("rho applies to the disk model only".into()).into())
        }
        (ModelKind::OnOff, alpha, None) => alpha.unwrap_or(DEFAULT_ALPHAS.to_vec()),
        (ModelKind::Disk, None, rho) => {
            rho.unwrap_or_else(|| DEFAULT_DISK_ALPHAS.iter().map(|&a| matched_rho(a)).collect())
        }
        (ModelKind::Disk, Some(alpha), None) => alpha.iter().map(|&a| matched_rho(a)).collect(),
    };
    let sweep = SweepConfig {
        model,
        n: opts.n.unwrap_or(500),
        pool_size: opts.pool_size.unwrap_or(10_000),
        channel_values,
        k_min: opts.k_min.unwrap_or(1),
        k_max: opts.k_max.unwrap_or(35),
        trials: opts.trials.unwrap_or(200),
        master_seed: opts.seed.unwrap_or(DEFAULT_SEED),
    };
    let resolved = SweepOpts {
        model: Some(sweep.model),
        n: Some(sweep.n),
        pool_size: Some(sweep.pool_size),
        alpha: (model == ModelKind::OnOff).then(|| sweep.channel_values.clone()),
        rho: (model == ModelKind::Disk).then(|| sweep.channel_values.clone()),
        k_min: Some(sweep.k_min),
        k_max: Some(sweep.k_max),
        trials: Some(sweep.trials),
        seed: Some(sweep.master_seed),
    };
    let report = run_sweep(&sweep).context("sweep")?;
    let manifest = manifest("sweep", &resolved, sweep.master_seed, start);
    let label = match model {
        ModelKind::OnOff => "alpha",
        ModelKind::Disk => "rho",
    };
    let plots: Vec<(String, String)> = report::sweep_plot_data(&report)
        .into_iter()
        .map(|(value, text)| (format!("curve_{label}_{value}.dat"), text))
        .collect();
    emit(
        common,
        "sweep",
        &report::sweep_csv(&report, &manifest),
        &report::sweep_json(&report, &manifest),
        &plots,
    )
}

#[derive(Serialize)]
struct ThresholdRow {
    alpha: f64,
    threshold_k: u32,
    /// `(K, critical c)` for `K* - 1`, `K*`, `K* + 1` where defined.
    critical_c: Vec<(u32, f64)>,
}

pub fn threshold(flags: &ThresholdOpts, common: &Common) -> Result<()> {
    let start = Instant::now();
    let opts: ThresholdOpts = config::merge(file_layer(common, "threshold")?, flags)?;
    let n = opts.n.unwrap_or(500);
    let p = opts.pool_size.unwrap_or(10_000);
    let alphas = opts.alpha.unwrap_or(DEFAULT_ALPHAS.to_vec());
    if n < 2 {
        return Err(ConfigError("n must be at least 2".into()).into());
    }
    let mut rows = Vec::new();
    for &alpha in &alphas {
        let k_star = threshold_k(n, p, alpha).with_context(|| format!("alpha={alpha}"))?;
        let mut table = Vec::new();
        for k in k_star.saturating_sub(1).max(1)..=(k_star + 1).min(p) {
            let params = ModelParams::with_closed_alpha(KeyParams::new(k, p)?, alpha)?;
            table.push((k, critical_c(n, params)?));
        }
        rows.push(ThresholdRow { alpha, threshold_k: k_star, critical_c: table });
    }
    let resolved = ThresholdOpts { n: Some(n), pool_size: Some(p), alpha: Some(alphas) };
    let manifest = manifest("threshold", &resolved, 0, start);
    let mut csv = manifest.comment_line();
    csv.push_str("n,P,alpha,K,critical_c,threshold_K\n");
    for row in &rows {
        for &(k, c) in &row.critical_c {
            let _ = writeln!(csv, "{n},{p},{},{k},{c:.6},{}", row.alpha, row.threshold_k);
        }
    }
    let json = serde_json::to_string_pretty(&json!({"manifest": manifest, "report": rows}))?;
    emit(common, "threshold", &csv, &json, &[])
}

pub fn verify(flags: &VerifyOpts, common: &Common) -> Result<()> {
    let start = Instant::now();
    let opts: VerifyOpts = config::merge(file_layer(common, "verify")?, flags)?;
    let suite_arg = opts.suite.unwrap_or(SuiteArg::All);
    let suite = match suite_arg {
        SuiteArg::Bounds => Suite::Bounds,
        SuiteArg::Oracle => Suite::Oracle,
        SuiteArg::All => Suite::All,
    };
    let mutant = if flags.inject_mutant { Mutant::HalvedTreeBound } else { Mutant::None };
    let results = run_suite(suite, mutant);
    let failed: Vec<_> = results.iter().filter(|r| !r.passed).collect();
    let resolved = VerifyOpts { suite: Some(suite_arg), inject_mutant: flags.inject_mutant };
    let manifest = manifest("verify", &resolved, 0, start);
    let mut text = manifest.comment_line();
    for r in &results {
        let _ = writeln!(text, "{r}");
    }
    let _ = writeln!(text, "{} checks, {} failed", results.len(), failed.len());
    let json = serde_json::to_string_pretty(&json!({"manifest": manifest, "report": results}))?;
    emit(common, "verify", &text, &json, &[])?;
    for r in &failed {
        eprintln!("counterexample: {} {}: {}", r.check, r.params, r.detail);
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(VerifyFailed(failed.len()).into())
    }
}

fn parse_alpha_rule(s: &str) -> Result<AlphaRule, ConfigError> {
    let (name, value) = s
        .split_once(':')
        .ok_or_else(|| ConfigError(format!("alpha rule {s:?} is not <rule>:<value>")))?;
    let value: f64 = value
        .parse()
        .map_err(|_| ConfigError(format!("alpha rule value {value:?} is not a number")))?;
    match name.replace('-', "_").as_str() {
        "constant" => Ok(AlphaRule::Constant(value)),
        "inverse_log" => Ok(AlphaRule::InverseLog(value)),
        "power_law" => Ok(AlphaRule::PowerLaw(value)),
        other => Err(ConfigError(format!("unknown alpha rule {other:?}"))),
    }
}

pub fn zeroone(flags: &ZeroOneOpts, common: &Common) -> Result<()> {
    let start = Instant::now();
    let mut opts: ZeroOneOpts = config::merge(file_layer(common, "zeroone")?, flags)?;
    if common.seed.is_some() {
        opts.seed = common.seed;
    }
    let c = opts.c.ok_or_else(|| ConfigError("--c is required".into()))?;
    let rule_text = opts.alpha_rule.unwrap_or_else(|| "constant:0.8".into());
    let probe = ZeroOneProbeConfig {
        c,
        sigma: opts.sigma.unwrap_or(20.0),
        alpha_rule: parse_alpha_rule(&rule_text)?,
        n_list: opts.n_list.unwrap_or_else(|| vec![100, 200, 400, 800]),
        trials: opts.trials.unwrap_or(200),
        master_seed: opts.seed.unwrap_or(DEFAULT_SEED),
    };
    let resolved = ZeroOneOpts {
        c: Some(probe.c),
        sigma: Some(probe.sigma),
        alpha_rule: Some(rule_text),
        n_list: Some(probe.n_list.clone()),
        trials: Some(probe.trials),
        seed: Some(probe.master_seed),
    };
    let report = zero_one_probe(&probe).context("zero-one probe")?;
    let manifest = manifest("zeroone", &resolved, probe.master_seed, start);
    emit(
        common,
        "zeroone",
        &report::zeroone_csv(&report, &manifest),
        &report::zeroone_json(&report, &manifest),
        &[],
    )
}
