//! Monte Carlo estimation of connectivity and node isolation.
//!
//! Trials of a parameter point fan out over the current rayon pool. Each trial
//! draws from its own [`RngStream`] and results are reduced in trial order, so
//! an estimate depends only on `(config, master_seed)`, never on the thread
//! count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::analyze;
use crate::error::{Error, Result};
use crate::model::{
    scaling_schedule, threshold_k, AlphaRule, AlphaStar, DiskParams, KeyParams, ModelParams,
    ScalingPoint,
};
use crate::rng::RngStream;
use crate::sampling::{sample_kg_intersection, sample_kh_intersection};

/// Two-sided 95% normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    OnOff,
    Disk,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::OnOff => "on_off",
            ModelKind::Disk => "disk",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "on_off" | "on-off" | "onoff" => Ok(ModelKind::OnOff),
            "disk" => Ok(ModelKind::Disk),
            other => Err(Error::InvalidArgument(format!("unknown model {other:?}"))),
        }
    }
}

/// A fully specified intersection model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ChannelModel {
    OnOff(ModelParams),
    Disk(DiskParams),
}

impl ChannelModel {
    pub fn build(kind: ModelKind, key: KeyParams, channel_value: f64) -> Result<Self> {
        Ok(match kind {
            ModelKind::OnOff => ChannelModel::OnOff(ModelParams::new(key, channel_value)?),
            ModelKind::Disk => ChannelModel::Disk(DiskParams::new(key, channel_value)?),
        })
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ChannelModel::OnOff(_) => ModelKind::OnOff,
            ChannelModel::Disk(_) => ModelKind::Disk,
        }
    }

    pub fn key(&self) -> KeyParams {
        match self {
            ChannelModel::OnOff(p) => p.key(),
            ChannelModel::Disk(d) => d.key(),
        }
    }

    /// `alpha` for the on/off model, `rho` for the disk model.
    pub fn channel_value(&self) -> f64 {
        match self {
            ChannelModel::OnOff(p) => p.alpha(),
            ChannelModel::Disk(d) => d.rho(),
        }
    }

    /// Probability that a given pair's channel is up.
    pub fn link_probability(&self) -> f64 {
        match self {
            ChannelModel::OnOff(p) => p.alpha(),
            ChannelModel::Disk(d) => d.matched_alpha(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialOutcome {
    pub connected: bool,
    pub no_isolated: bool,
    pub isolated_count: usize,
    pub min_degree: usize,
}

/// Samples one intersection graph from `stream` and records its events.
pub fn run_trial(n: usize, model: &ChannelModel, stream: RngStream) -> Result<TrialOutcome> {
    let mut rng = stream.rng();
    let graph = match model {
        ChannelModel::OnOff(p) => sample_kg_intersection(n, *p, &mut rng)?,
        ChannelModel::Disk(d) => sample_kh_intersection(n, *d, &mut rng)?,
    };
    let s = analyze(&graph);
    Ok(TrialOutcome {
        connected: s.is_connected,
        no_isolated: s.isolated_count == 0,
        isolated_count: s.isolated_count,
        min_degree: s.min_degree,
    })
}

/// 95% Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    assert!(trials > 0, "wilson interval needs at least one trial");
    let t = trials as f64;
    let p = successes as f64 / t;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / t;
    let center = (p + z2 / (2.0 * t)) / denom;
    let half = Z_95 / denom * (p * (1.0 - p) / t + z2 / (4.0 * t * t)).sqrt();
    let low = (center - half).max(0.0).min(p);
    let high = (center + half).min(1.0).max(p);
    (low, high)
}

/// Aggregate of all trials at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointEstimate {
    pub model: ChannelModel,
    pub n: usize,
    pub trials: u64,
    pub count_connected: u64,
    pub count_no_isolated: u64,
    /// Trials in which "connected" and "no isolated node" agreed.
    pub count_equivalent: u64,
    /// Trials that were connected yet had an isolated node; always zero for n >= 2.
    pub count_containment_violations: u64,
    pub sum_isolated: u64,
    pub sum_isolated_sq: u64,
    pub p_connected: f64,
    pub p_no_isolated: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub equivalence_rate: f64,
}

impl PointEstimate {
    fn from_outcomes(model: ChannelModel, n: usize, outcomes: &[TrialOutcome]) -> Self {
        let trials = outcomes.len() as u64;
        let mut est = PointEstimate {
            model,
            n,
            trials,
            count_connected: 0,
            count_no_isolated: 0,
            count_equivalent: 0,
            count_containment_violations: 0,
            sum_isolated: 0,
            sum_isolated_sq: 0,
            p_connected: 0.0,
            p_no_isolated: 0.0,
            ci_low: 0.0,
            ci_high: 0.0,
            equivalence_rate: 0.0,
        };
        for o in outcomes {
            est.count_connected += o.connected as u64;
            est.count_no_isolated += o.no_isolated as u64;
            est.count_equivalent += (o.connected == o.no_isolated) as u64;
            est.count_containment_violations += (o.connected && !o.no_isolated && n >= 2) as u64;
            est.sum_isolated += o.isolated_count as u64;
            est.sum_isolated_sq += (o.isolated_count as u64).pow(2);
        }
        let t = trials as f64;
        est.p_connected = est.count_connected as f64 / t;
        est.p_no_isolated = est.count_no_isolated as f64 / t;
        est.equivalence_rate = est.count_equivalent as f64 / t;
        (est.ci_low, est.ci_high) = wilson_interval(est.count_connected, trials);
        est
    }

    pub fn mean_isolated(&self) -> f64 {
        self.sum_isolated as f64 / self.trials as f64
    }

    /// Standard error of [`Self::mean_isolated`] from the sample variance.
    pub fn isolated_std_error(&self) -> f64 {
        let t = self.trials as f64;
        if self.trials < 2 {
            return f64::INFINITY;
        }
        let mean = self.mean_isolated();
        let var = (self.sum_isolated_sq as f64 - t * mean * mean) / (t - 1.0);
        (var.max(0.0) / t).sqrt()
    }
}

/// Runs `trials` independent trials of one point. Trial `t` uses the stream
/// [`RngStream::for_trial`]`(master_seed, point_index, t)`.
pub fn run_point(
    n: usize,
    model: ChannelModel,
    trials: u32,
    master_seed: u64,
    point_index: u32,
) -> Result<PointEstimate> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(n, &model, RngStream::for_trial(master_seed, point_index, t)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PointEstimate::from_outcomes(model, n, &outcomes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub model: ModelKind,
    pub n: usize,
    pub pool_size: u32,
    /// `alpha` values for the on/off model, `rho` values for the disk model.
    pub channel_values: Vec<f64>,
    pub k_min: u32,
    pub k_max: u32,
    pub trials: u32,
    pub master_seed: u64,
}

impl SweepConfig {
    /// The on/off grid of the classic experiment: `n = 500`, `P = 10^4`,
    /// `alpha in {0.2, 0.4, 0.6, 0.8}`, `K = 1..=35`, 200 trials.
    pub fn on_off_reference(master_seed: u64) -> Self {
        Self {
            model: ModelKind::OnOff,
            n: 500,
            pool_size: 10_000,
            channel_values: vec![0.2, 0.4, 0.6, 0.8],
            k_min: 1,
            k_max: 35,
            trials: 200,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if self.channel_values.is_empty() {
            return Err(Error::InvalidArgument("at least one channel value is required".into()));
        }
        if self.k_min > self.k_max {
            return Err(Error::InvalidArgument(format!(
                "empty ring-size range {}..={}",
                self.k_min, self.k_max
            )));
        }
        if self.pool_size == 0 {
            return Err(Error::InvalidKeyParams { k: 1, p: 0 });
        }
        if self.k_min == 0 || self.k_max > self.pool_size {
            return Err(Error::InvalidKeyParams {
                k: u64::from(if self.k_min == 0 { 0 } else { self.k_max }),
                p: u64::from(self.pool_size),
            });
        }
        let key = KeyParams::new(1, self.pool_size)?;
        for &v in &self.channel_values {
            ChannelModel::build(self.model, key, v)?;
        }
        Ok(())
    }

    pub fn k_values(&self) -> impl Iterator<Item = u32> {
        self.k_min..=self.k_max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub estimate: PointEstimate,
    /// Threshold ring size for this row's channel value, if one exists.
    pub threshold_k: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdMark {
    pub channel_value: f64,
    /// Pair link probability, `alpha` or `pi rho^2`.
    pub link_probability: f64,
    pub threshold_k: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub thresholds: Vec<ThresholdMark>,
    /// Ordered by (channel value, K).
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    /// Rows belonging to the `i`-th channel value.
    pub fn curve(&self, channel_index: usize) -> &[SweepRow] {
        let per = self.rows.len() / self.thresholds.len().max(1);
        &self.rows[channel_index * per..(channel_index + 1) * per]
    }
}

/// One point per (channel value, K), each annotated with its threshold `K*`.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepReport> {
    config.validate()?;
    let mut thresholds = Vec::with_capacity(config.channel_values.len());
    let mut rows = Vec::new();
    let per_curve = config.k_values().count() as u32;
    for (ci, &value) in config.channel_values.iter().enumerate() {
        let probe = ChannelModel::build(config.model, KeyParams::new(1, config.pool_size)?, value)?;
        let link = probe.link_probability();
        let threshold = if config.n >= 2 {
            threshold_k(config.n, config.pool_size, link).ok()
        } else {
            None
        };
        thresholds.push(ThresholdMark {
            channel_value: value,
            link_probability: link,
            threshold_k: threshold,
        });
        for (ki, k) in config.k_values().enumerate() {
            let model = ChannelModel::build(config.model, KeyParams::new(k, config.pool_size)?, value)?;
            let point_index = ci as u32 * per_curve + ki as u32;
            let estimate = run_point(config.n, model, config.trials, config.master_seed, point_index)?;
            rows.push(SweepRow {
                estimate,
                threshold_k: threshold,
            });
        }
    }
    Ok(SweepReport {
        config: config.clone(),
        thresholds,
        rows,
    })
}

/// Smallest `K` on a curve whose empirical connectivity reaches one half.
pub fn crossing_k(curve: &[SweepRow]) -> Option<u32> {
    curve
        .iter()
        .find(|r| r.estimate.p_connected >= 0.5)
        .map(|r| r.estimate.model.key().k())
}

/// Least-squares nondecreasing fit (pool adjacent violators).
pub fn isotonic_fit(values: &[f64]) -> Vec<f64> {
    // Blocks of (mean, weight).
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() >= 2 {
            let (m2, w2) = blocks[blocks.len() - 1];
            let (m1, w1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            let w = w1 + w2;
            blocks.push(((m1 * w1 as f64 + m2 * w2 as f64) / w as f64, w));
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, w)| std::iter::repeat_n(m, w))
        .collect()
}

/// Total absolute deviation of `values` from their nondecreasing fit.
pub fn isotonic_residual(values: &[f64]) -> f64 {
    isotonic_fit(values)
        .iter()
        .zip(values)
        .map(|(f, v)| (f - v).abs())
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroOneProbeConfig {
    pub c: f64,
    pub sigma: f64,
    pub alpha_rule: AlphaRule,
    pub n_list: Vec<usize>,
    pub trials: u32,
    pub master_seed: u64,
}

impl ZeroOneProbeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(Error::InvalidArgument(format!("c must be positive, got {}", self.c)));
        }
        if self.n_list.is_empty() || self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("n list must be nonempty and strictly increasing".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroOneRow {
    pub point: ScalingPoint,
    pub estimate: PointEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroOneReport {
    pub config: ZeroOneProbeConfig,
    pub alpha_star: AlphaStar,
    pub rows: Vec<ZeroOneRow>,
}

impl ZeroOneReport {
    pub fn p_no_isolated(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.estimate.p_no_isolated).collect()
    }

    pub fn p_connected(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.estimate.p_connected).collect()
    }
}

/// Estimates connectivity along a scaling schedule with growing `n`.
pub fn zero_one_probe(config: &ZeroOneProbeConfig) -> Result<ZeroOneReport> {
    config.validate()?;
    let schedule = scaling_schedule(config.c, config.sigma, config.alpha_rule, &config.n_list)?;
    let rows = schedule
        .into_iter()
        .enumerate()
        .map(|(i, point)| {
            let model = ChannelModel::OnOff(point.params);
            let estimate = run_point(point.n, model, config.trials, config.master_seed, i as u32)?;
            Ok(ZeroOneRow { point, estimate })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ZeroOneReport {
        config: config.clone(),
        alpha_star: config.alpha_rule.alpha_star(),
        rows,
    })
}
