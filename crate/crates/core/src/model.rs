//! Closed-form quantities of the key graph / on-off channel model.
//!
//! Everything here is a pure function of its arguments. The key-ring overlap
//! probability is evaluated in log space so pools in the millions never touch
//! a binomial coefficient directly; exact rational versions live in
//! [`crate::oracle`] and are used only for cross-checking.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Key-ring size `K` and key-pool size `P` of the predistribution scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct KeyParams {
    k: u32,
    p: u32,
}

impl KeyParams {
    pub fn new(k: u32, p: u32) -> Result<Self> {
        if k == 0 || k > p {
            return Err(Error::InvalidKeyParams {
                k: u64::from(k),
                p: u64::from(p),
            });
        }
        Ok(Self { k, p })
    }

    /// Keys per ring.
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Pool size.
    pub fn p(&self) -> u32 {
        self.p
    }
}

/// Key parameters plus the on/off channel probability `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    key: KeyParams,
    alpha: f64,
}

impl ModelParams {
    /// Requires `0 < alpha < 1`.
    pub fn new(key: KeyParams, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidAlpha(alpha));
        }
        Ok(Self { key, alpha })
    }

    /// Accepts the closed interval `[0, 1]`.
    ///
    /// The boundary values describe degenerate channels (never on / always
    /// on) that the asymptotic results exclude, but which are useful as
    /// sanity anchors: `alpha = 1` reduces to the plain random key graph.
    pub fn with_closed_alpha(key: KeyParams, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidAlpha(alpha));
        }
        Ok(Self { key, alpha })
    }

    pub fn key(&self) -> KeyParams {
        self.key
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Key parameters plus the disk-model transmission range on the unit torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiskParams {
    key: KeyParams,
    rho: f64,
}

impl DiskParams {
    /// Requires `0 < rho < 0.5`; beyond that the disk wraps onto itself and
    /// the pair-connection probability is no longer `pi * rho^2`.
    pub fn new(key: KeyParams, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 0.5) {
            return Err(Error::InvalidRho(rho));
        }
        Ok(Self { key, rho })
    }

    /// Range whose disk area equals the on/off probability `alpha`.
    pub fn matched(key: KeyParams, alpha: f64) -> Result<Self> {
        Self::new(key, matched_rho(alpha))
    }

    pub fn key(&self) -> KeyParams {
        self.key
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `pi * rho^2`, the probability that two uniform torus points are in range.
    pub fn matched_alpha(&self) -> f64 {
        std::f64::consts::PI * self.rho * self.rho
    }
}

/// `sqrt(alpha / pi)`.
pub fn matched_rho(alpha: f64) -> f64 {
    (alpha / std::f64::consts::PI).sqrt()
}

/// A real number in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const ONE: Probability = Probability(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidProbability(value));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn complement(self) -> Self {
        Self(1.0 - self.0)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(self) -> f64 {
        self.sum + self.compensation
    }
}

/// `log(C(P - s, K) / C(P, K))`, or `None` when the ratio is zero.
fn log_avoidance(key: KeyParams, s: u64) -> Option<f64> {
    let (k, p) = (u64::from(key.k), u64::from(key.p));
    if s > p - k {
        return None;
    }
    let s = s as f64;
    let mut acc = CompensatedSum::default();
    for l in 0..k {
        acc.add((-s / (p - l) as f64).ln_1p());
    }
    Some(acc.total())
}

/// Probability that two independent uniform `K`-subsets of a `P`-pool are
/// disjoint: `C(P-K, K) / C(P, K)`, and exactly zero when `P < 2K`.
pub fn q_theta(key: KeyParams) -> Probability {
    avoidance_probability(key, u64::from(key.k))
}

/// `1 - q_theta(key)`, computed without cancellation when `q` is near one.
pub fn one_minus_q(key: KeyParams) -> f64 {
    match log_avoidance(key, u64::from(key.k)) {
        Some(lq) => -lq.exp_m1(),
        None => 1.0,
    }
}

/// Probability that a uniform `K`-subset avoids a fixed set of `s` keys:
/// `C(P-s, K) / C(P, K)`, zero for `s > P - K`.
pub fn avoidance_probability(key: KeyParams, s: u64) -> Probability {
    match log_avoidance(key, s) {
        Some(l) => Probability(l.exp().min(1.0)),
        None => Probability::ZERO,
    }
}

/// Edge probability of the intersection graph, `alpha * (1 - q)`.
pub fn edge_probability(params: ModelParams) -> Probability {
    Probability(params.alpha * one_minus_q(params.key))
}

/// `(1/alpha) * log(n) / n`, the right-hand side of the threshold condition.
fn threshold_bound(n: usize, alpha: f64) -> f64 {
    let n = n as f64;
    n.ln() / n / alpha
}

/// Smallest ring size `K` with `1 - q(K, P) > (1/alpha) log(n) / n`.
pub fn threshold_k(n: usize, p: u32, alpha: f64) -> Result<u32> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("threshold needs n >= 2, got {n}")));
    }
    if p == 0 {
        return Err(Error::InvalidKeyParams { k: 1, p: 0 });
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let bound = threshold_bound(n, alpha);
    if bound >= 1.0 {
        return Err(Error::NoThreshold { bound });
    }
    let exceeds = |k: u32| one_minus_q(KeyParams { k, p }) > bound;
    // 1 - q is nondecreasing in K and equals 1 once 2K > P.
    let (mut lo, mut hi) = (1u32, p);
    if !exceeds(hi) {
        return Err(Error::NoThreshold { bound });
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if exceeds(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// `alpha * (1 - q) * n / log n`: where a parameter point sits relative to
/// the zero-one threshold at `c = 1`.
pub fn critical_c(n: usize, params: ModelParams) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("critical_c needs n >= 2, got {n}")));
    }
    let n = n as f64;
    Ok(edge_probability(params).value() * n / n.ln())
}

/// Expected number of isolated nodes, `n * (1 - alpha (1 - q))^(n - 1)`.
pub fn expected_isolated(n: usize, params: ModelParams) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p_edge = edge_probability(params).value();
    let exponent = (n - 1) as f64;
    let per_node = if p_edge >= 1.0 {
        if n == 1 {
            1.0
        } else {
            0.0
        }
    } else {
        (exponent * (-p_edge).ln_1p()).exp()
    };
    n as f64 * per_node
}

/// How the channel probability varies with `n` in a scaling schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "value", rename_all = "snake_case")]
pub enum AlphaRule {
    /// `alpha_n = a`.
    Constant(f64),
    /// `alpha_n = a / log n`.
    InverseLog(f64),
    /// `alpha_n = n^(-gamma)`.
    PowerLaw(f64),
}

/// Limit of `alpha_n * log n`, read off the rule rather than estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum AlphaStar {
    Zero,
    Finite(f64),
    Infinite,
}

impl AlphaRule {
    pub fn alpha_at(&self, n: usize) -> f64 {
        let n = n as f64;
        match *self {
            AlphaRule::Constant(a) => a,
            AlphaRule::InverseLog(a) => a / n.ln(),
            AlphaRule::PowerLaw(gamma) => n.powf(-gamma),
        }
    }

    pub fn alpha_star(&self) -> AlphaStar {
        match *self {
            AlphaRule::Constant(_) => AlphaStar::Infinite,
            AlphaRule::InverseLog(a) => AlphaStar::Finite(a),
            AlphaRule::PowerLaw(_) => AlphaStar::Zero,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            AlphaRule::Constant(a) if !(a > 0.0 && a < 1.0) => Err(Error::InvalidAlpha(a)),
            AlphaRule::InverseLog(a) if !(a > 0.0) => Err(Error::InvalidArgument(format!(
                "inverse-log coefficient must be positive, got {a}"
            ))),
            AlphaRule::PowerLaw(g) if !(g > 0.0 && g < 1.0) => Err(Error::InvalidArgument(
                format!("power-law exponent must lie in (0, 1), got {g}"),
            )),
            _ => Ok(()),
        }
    }
}

/// Relative tolerance on the achieved `c_n` of a schedule point.
pub const SCHEDULE_TOLERANCE: f64 = 0.1;

/// One member of an admissible scaling sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub params: ModelParams,
    /// Target constant.
    pub c: f64,
    pub sigma: f64,
    /// `alpha (1 - q) n / log n` for the chosen integer `K`.
    pub achieved_c: f64,
    pub alpha_star: AlphaStar,
}

impl ScalingPoint {
    pub fn relative_error(&self) -> f64 {
        (self.achieved_c - self.c).abs() / self.c
    }
}

/// Builds the parameter sequence `P = ceil(sigma n)`, `alpha = rule(n)` and
/// the ring size `K >= 2` that brings `alpha (1 - q)` closest to `c log n / n`.
pub fn scaling_schedule(
    c: f64,
    sigma: f64,
    alpha_rule: AlphaRule,
    n_list: &[usize],
) -> Result<Vec<ScalingPoint>> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("c must be positive, got {c}")));
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    alpha_rule.validate()?;

    n_list
        .iter()
        .map(|&n| schedule_point(c, sigma, alpha_rule, n))
        .collect()
}

fn schedule_point(c: f64, sigma: f64, rule: AlphaRule, n: usize) -> Result<ScalingPoint> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("schedule needs n >= 2, got {n}")));
    }
    let alpha = rule.alpha_at(n);
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let p_real = (sigma * n as f64).ceil();
    if p_real > f64::from(u32::MAX) {
        return Err(Error::InvalidArgument(format!("pool size {p_real} too large")));
    }
    let p = p_real as u32;
    if p < 2 {
        return Err(Error::Infeasible { n, target: c, achieved: f64::NAN });
    }

    let log_n = (n as f64).ln();
    let target = c * log_n / n as f64;
    let edge = |k: u32| alpha * one_minus_q(KeyParams { k, p });

    // Smallest K in [2, P] whose edge probability reaches the target.
    let (mut lo, mut hi) = (2u32, p);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if edge(mid) >= target {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let mut k = lo;
    if k > 2 && (target - edge(k - 1)).abs() < (edge(k) - target).abs() {
        k -= 1;
    }

    let params = ModelParams::new(KeyParams::new(k, p)?, alpha)?;
    let achieved_c = edge(k) * n as f64 / log_n;
    let point = ScalingPoint {
        n,
        params,
        c,
        sigma,
        achieved_c,
        alpha_star: rule.alpha_star(),
    };
    if point.relative_error() > SCHEDULE_TOLERANCE {
        return Err(Error::Infeasible { n, target: c, achieved: achieved_c });
    }
    Ok(point)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(k: u32, p: u32) -> KeyParams {
        KeyParams::new(k, p).unwrap()
    }

    #[test]
    fn key_params_reject_empty_ring_and_oversized_ring() {
        assert!(KeyParams::new(0, 5).is_err());
        assert!(KeyParams::new(6, 5).is_err());
        assert!(KeyParams::new(5, 5).is_ok());
    }

    #[test]
    fn q_small_cases() {
        assert!((q_theta(key(1, 2)).value() - 0.5).abs() < 1e-15);
        assert_eq!(q_theta(key(3, 5)).value(), 0.0);
        assert_eq!(one_minus_q(key(3, 5)), 1.0);
    }

    #[test]
    fn q_for_reference_pool() {
        let v = q_theta(key(13, 10_000)).value();
        let gap = 1.0 - v;
        assert!(gap > 0.01553 && gap < 0.01684, "1 - q = {gap}");
    }

    #[test]
    fn avoidance_examples() {
        assert!((avoidance_probability(key(1, 2), 1).value() - 0.5).abs() < 1e-15);
        assert_eq!(avoidance_probability(key(4, 9), 0).value(), 1.0);
        assert!((avoidance_probability(key(2, 6), 2).value() - 0.4).abs() < 1e-15);
        assert_eq!(avoidance_probability(key(2, 6), 5).value(), 0.0);
    }

    #[test]
    fn edge_probability_examples() {
        let p = ModelParams::new(key(1, 2), 0.5).unwrap();
        assert!((edge_probability(p).value() - 0.25).abs() < 1e-15);
        let p = ModelParams::new(key(3, 5), 0.7).unwrap();
        assert_eq!(edge_probability(p).value(), 0.7);
        let p = ModelParams::with_closed_alpha(key(4, 40), 1.0).unwrap();
        assert_eq!(edge_probability(p).value(), one_minus_q(key(4, 40)));
    }

    #[test]
    fn alpha_bounds() {
        assert!(ModelParams::new(key(1, 2), 0.0).is_err());
        assert!(ModelParams::new(key(1, 2), 1.0).is_err());
        assert!(ModelParams::with_closed_alpha(key(1, 2), 1.0).is_ok());
        assert!(ModelParams::with_closed_alpha(key(1, 2), 1.01).is_err());
        assert!(ModelParams::new(key(1, 2), f64::NAN).is_err());
    }

    #[test]
    fn disk_params_reject_wrapping_ranges() {
        assert!(DiskParams::new(key(1, 2), 0.5).is_err());
        assert!(DiskParams::new(key(1, 2), 0.0).is_err());
        let d = DiskParams::matched(key(1, 2), 0.2).unwrap();
        assert!((d.matched_alpha() - 0.2).abs() < 1e-15);
        // pi * 0.5^2 < 0.8, so this alpha cannot be matched on the unit torus.
        assert!(DiskParams::matched(key(1, 2), 0.8).is_err());
    }

    #[test]
    fn thresholds_at_reference_grid() {
        assert_eq!(threshold_k(500, 10_000, 0.8).unwrap(), 13);
        assert_eq!(threshold_k(500, 10_000, 0.2).unwrap(), 26);
        assert_eq!(threshold_k(500, 3, 1.0).unwrap(), 1);
    }

    #[test]
    fn threshold_reports_impossible_bound() {
        // log(2)/2 / 0.01 > 1
        assert!(matches!(threshold_k(2, 1, 0.01), Err(Error::NoThreshold { .. })));
        assert!(threshold_k(1, 10, 0.5).is_err());
        assert!(threshold_k(10, 10, 0.0).is_err());
    }

    #[test]
    fn critical_c_brackets_threshold() {
        let above = ModelParams::new(key(13, 10_000), 0.8).unwrap();
        let below = ModelParams::new(key(12, 10_000), 0.8).unwrap();
        let c13 = critical_c(500, above).unwrap();
        let c12 = critical_c(500, below).unwrap();
        assert!(c13 > 1.0 && c13 < 1.1, "{c13}");
        assert!(c12 < 1.0, "{c12}");
    }

    #[test]
    fn critical_c_is_one_on_the_boundary() {
        // K=1, P=2 gives 1 - q = 1/2; pick alpha so that alpha/2 = log n / n.
        let n = 50usize;
        let alpha = 2.0 * (n as f64).ln() / n as f64;
        let params = ModelParams::new(key(1, 2), alpha).unwrap();
        assert!((critical_c(n, params).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expected_isolated_examples() {
        let p = ModelParams::new(key(1, 2), 0.5).unwrap();
        assert_eq!(expected_isolated(1, p), 1.0);
        assert!((expected_isolated(2, p) - 1.5).abs() < 1e-15);
        let p = ModelParams::new(key(13, 10_000), 0.8).unwrap();
        let e = expected_isolated(500, p);
        assert!(e > 0.3 && e < 0.9, "{e}");
    }

    #[test]
    fn schedule_matches_target() {
        let pts = scaling_schedule(2.0, 20.0, AlphaRule::Constant(0.8), &[500]).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].params.key().p(), 10_000);
        assert!(pts[0].relative_error() <= 0.1);
        assert_eq!(pts[0].alpha_star, AlphaStar::Infinite);

        let pts =
            scaling_schedule(0.5, 20.0, AlphaRule::Constant(0.8), &[100, 200, 400, 800]).unwrap();
        assert_eq!(pts.len(), 4);
        for p in &pts {
            assert!((0.45..=0.55).contains(&p.achieved_c), "{p:?}");
            assert!(p.params.key().k() >= 2);
        }
    }

    #[test]
    fn schedule_rejects_bad_rules() {
        assert!(scaling_schedule(1.0, 1.0, AlphaRule::Constant(1.0), &[100]).is_err());
        assert!(scaling_schedule(0.0, 1.0, AlphaRule::Constant(0.5), &[100]).is_err());
        assert!(scaling_schedule(1.0, 1.0, AlphaRule::PowerLaw(1.5), &[100]).is_err());
        // a / log n exceeds one at n = 3 for a = 2
        assert!(scaling_schedule(1.0, 20.0, AlphaRule::InverseLog(2.0), &[3]).is_err());
    }

    #[test]
    fn schedule_flags_infeasible_targets() {
        // With P = 10 the smallest admissible ring K = 2 already overshoots c = 0.01.
        let err = scaling_schedule(0.01, 1.0, AlphaRule::Constant(0.9), &[10]).unwrap_err();
        assert!(matches!(err, Error::Infeasible { n: 10, .. }));
    }

    #[test]
    fn alpha_star_tags() {
        assert_eq!(AlphaRule::InverseLog(3.0).alpha_star(), AlphaStar::Finite(3.0));
        assert_eq!(AlphaRule::PowerLaw(0.5).alpha_star(), AlphaStar::Zero);
        let r = AlphaRule::InverseLog(3.0);
        assert!((r.alpha_at(1000) * (1000f64).ln() - 3.0).abs() < 1e-12);
    }
}
