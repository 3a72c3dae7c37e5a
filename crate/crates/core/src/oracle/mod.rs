//! Exact ground truth for tiny instances.
//!
//! Probabilities here are arbitrary-precision rationals. [`enumerate_exact`]
//! sums the probability mass of every key-ring tuple and every channel state,
//! and the `verify_*` functions decide the model's inequalities without any
//! floating-point rounding: fractional powers are compared after raising
//! both sides to a common integer power, and `exp` is bounded from below by a
//! partial Taylor sum. A `true` answer is therefore always sound.

pub mod suite;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::model::KeyParams;

/// Reduced fraction with positive denominator.
pub type Rational = BigRational;

/// Maximum `C(P, K)^n * 2^C(n, 2)` configurations enumerated.
pub const ENUMERATION_BUDGET: u128 = 100_000_000;

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

fn int(v: u64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Key parameters with an exact channel probability in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactParams {
    pub key: KeyParams,
    pub alpha: Rational,
}

impl ExactParams {
    pub fn new(key: KeyParams, alpha: Rational) -> Result<Self> {
        if alpha < Rational::zero() || alpha > Rational::one() {
            return Err(Error::InvalidArgument(format!("alpha {alpha} outside [0, 1]")));
        }
        Ok(Self { key, alpha })
    }

    /// `alpha` as the nearest double.
    pub fn alpha_f64(&self) -> f64 {
        self.alpha.to_f64().unwrap_or(f64::NAN)
    }

    /// `alpha * (1 - q)`.
    pub fn edge_probability(&self) -> Rational {
        &self.alpha * (Rational::one() - exact_q(self.key))
    }
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `C(P - s, K) / C(P, K)` exactly.
pub fn exact_avoidance(key: KeyParams, s: u64) -> Rational {
    let (k, p) = (u64::from(key.k()), u64::from(key.p()));
    if s > p - k {
        return Rational::zero();
    }
    let mut acc = Rational::one();
    for l in 0..k {
        acc *= rational((p - s - l) as i64, (p - l) as i64);
    }
    acc
}

/// `q(K, P) = C(P - K, K) / C(P, K)` exactly.
pub fn exact_q(key: KeyParams) -> Rational {
    exact_avoidance(key, u64::from(key.k()))
}

/// Threshold ring size found by a linear scan with exact `1 - q`.
///
/// The bound `(1/alpha) log(n) / n` is itself irrational; it is computed as a
/// double and that double is compared exactly.
pub fn exact_threshold_k(n: usize, p: u32, alpha: f64) -> Result<u32> {
    if n < 2 || p == 0 || !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold scan needs n >= 2, P >= 1, alpha in (0, 1]; got n={n}, P={p}, alpha={alpha}"
        )));
    }
    let bound_f = (n as f64).ln() / n as f64 / alpha;
    let bound = Rational::from_float(bound_f).expect("finite bound");
    for k in 1..=p {
        let gap = Rational::one() - exact_q(KeyParams::new(k, p)?);
        if gap > bound {
            return Ok(k);
        }
    }
    Err(Error::NoThreshold { bound: bound_f })
}

/// `n (1 - alpha (1 - q))^(n - 1)`.
pub fn closed_form_expected_isolated(n: usize, params: &ExactParams) -> Rational {
    if n == 0 {
        return Rational::zero();
    }
    let stay = Rational::one() - params.edge_probability();
    int(n as u64) * stay.pow((n - 1) as i32)
}

/// Exact event probabilities of the intersection graph on `n` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactReport {
    pub n: usize,
    pub p_connected: Rational,
    pub p_no_isolated: Rational,
    /// `E[I_n]`, the expected number of isolated nodes.
    pub expected_isolated: Rational,
    /// `E[chi_1]`, probability that node 0 is isolated.
    pub p_isolated_first: Rational,
    /// `E[chi_1 chi_2]`, probability that nodes 0 and 1 are both isolated.
    pub cross_moment: Rational,
    /// Total probability mass enumerated; exactly one.
    pub total_mass: Rational,
}

fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Number of configurations [`enumerate_exact`] would visit, or `None` on overflow.
pub fn enumeration_size(n: usize, key: KeyParams) -> Option<u128> {
    let subsets = binomial(u64::from(key.p()), u64::from(key.k())).to_u128()?;
    let mut total = 1u128.checked_shl(u32::try_from(pair_count(n)).ok()?)?;
    for _ in 0..n {
        total = total.checked_mul(subsets)?;
    }
    Some(total)
}

fn k_subsets(p: u32, k: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current: Vec<u32> = (0..k).collect();
    loop {
        out.push(current.clone());
        // Rightmost position that can still advance.
        let Some(i) = (0..k as usize).rev().find(|&i| current[i] < p - k + i as u32) else {
            return out;
        };
        current[i] += 1;
        for j in i + 1..k as usize {
            current[j] = current[j - 1] + 1;
        }
    }
}

fn rings_overlap(a: &[u32], b: &[u32]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

#[derive(Clone, Copy, Default)]
struct Outcome {
    connected: bool,
    isolated: u32,
    first_isolated: bool,
    first_two_isolated: bool,
}

/// Event outcomes for every edge subset of the `n`-vertex complete graph.
fn outcome_table(n: usize, pairs: &[(usize, usize)]) -> Vec<Outcome> {
    let m = pairs.len();
    (0..1usize << m)
        .map(|mask| {
            let mut parent: Vec<usize> = (0..n).collect();
            fn root(parent: &mut [usize], mut x: usize) -> usize {
                while parent[x] != x {
                    x = parent[x];
                }
                x
            }
            let mut degree = vec![0u32; n];
            let mut comps = n;
            for (bit, &(i, j)) in pairs.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    degree[i] += 1;
                    degree[j] += 1;
                    let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                    if ri != rj {
                        parent[ri] = rj;
                        comps -= 1;
                    }
                }
            }
            Outcome {
                connected: comps == 1,
                isolated: degree.iter().filter(|&&d| d == 0).count() as u32,
                first_isolated: degree[0] == 0,
                first_two_isolated: n >= 2 && degree[0] == 0 && degree[1] == 0,
            }
        })
        .collect()
}

/// Exhaustive sum over all `C(P,K)^n` key-ring tuples and all `2^C(n,2)`
/// channel states.
pub fn enumerate_exact(n: usize, params: &ExactParams) -> Result<ExactReport> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("enumeration needs n >= 2, got {n}")));
    }
    let needed = enumeration_size(n, params.key).unwrap_or(u128::MAX);
    if needed > ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded {
            needed,
            budget: ENUMERATION_BUDGET,
        });
    }

    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let m = pairs.len();
    let table = outcome_table(n, &pairs);
    let subsets = k_subsets(params.key.p(), params.key.k());

    // Counts of (event, number of channels on) over all configurations.
    let mut total = vec![0u64; m + 1];
    let mut connected = vec![0u64; m + 1];
    let mut no_isolated = vec![0u64; m + 1];
    let mut isolated_sum = vec![0u64; m + 1];
    let mut first = vec![0u64; m + 1];
    let mut first_two = vec![0u64; m + 1];

    let mut digits = vec![0usize; n];
    loop {
        let mut key_mask = 0usize;
        for (bit, &(i, j)) in pairs.iter().enumerate() {
            if rings_overlap(&subsets[digits[i]], &subsets[digits[j]]) {
                key_mask |= 1 << bit;
            }
        }
        for channel in 0..1usize << m {
            let on = channel.count_ones() as usize;
            let o = table[key_mask & channel];
            total[on] += 1;
            connected[on] += o.connected as u64;
            no_isolated[on] += (o.isolated == 0) as u64;
            isolated_sum[on] += u64::from(o.isolated);
            first[on] += o.first_isolated as u64;
            first_two[on] += o.first_two_isolated as u64;
        }

        // Mixed-radix increment over ring indices.
        let mut pos = 0;
        loop {
            if pos == n {
                let weigh = |counts: &[u64]| channel_weighted(counts, &params.alpha, m, subsets.len(), n);
                return Ok(ExactReport {
                    n,
                    p_connected: weigh(&connected),
                    p_no_isolated: weigh(&no_isolated),
                    expected_isolated: weigh(&isolated_sum),
                    p_isolated_first: weigh(&first),
                    cross_moment: weigh(&first_two),
                    total_mass: weigh(&total),
                });
            }
            digits[pos] += 1;
            if digits[pos] < subsets.len() {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

/// `sum_j counts[j] alpha^j (1 - alpha)^(m - j) / ring_choices^n`.
fn channel_weighted(
    counts: &[u64],
    alpha: &Rational,
    m: usize,
    ring_choices: usize,
    n: usize,
) -> Rational {
    let off = Rational::one() - alpha;
    let mut acc = Rational::zero();
    for (j, &c) in counts.iter().enumerate() {
        if c != 0 {
            acc += int(c) * alpha.pow(j as i32) * off.pow((m - j) as i32);
        }
    }
    acc / int(ring_choices as u64).pow(n as i32)
}

/// Outcome of one inequality check `lhs <= rhs` (or `>=`, per the check).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

fn split_positive(r: &Rational) -> (u32, u32) {
    let num = r.numer().to_u32().expect("small exponent numerator");
    let den = r.denom().to_u32().expect("small exponent denominator");
    (num, den)
}

fn approx(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `C(P - ceil(aK), K) / C(P, K) <= q^a` for a scalar `a >= 1`.
pub fn ratio_bound_check(key: KeyParams, a: &Rational) -> Result<BoundCheck> {
    if *a < Rational::one() {
        return Err(Error::InvalidArgument(format!("ratio bound needs a >= 1, got {a}")));
    }
    let shifted = (a * int(u64::from(key.k()))).ceil().to_integer();
    let shifted = shifted.to_u64().expect("nonnegative shift");
    let lhs = exact_avoidance(key, shifted);
    let q = exact_q(key);
    let (num, den) = split_positive(a);
    // lhs <= q^(num/den)  <=>  lhs^den <= q^num  (both sides nonnegative)
    let holds = lhs.pow(den as i32) <= q.pow(num as i32);
    Ok(BoundCheck {
        lhs: approx(&lhs),
        rhs: approx(&q).powf(approx(a)),
        holds,
    })
}

pub fn verify_ratio_bound(key: KeyParams, a: &Rational) -> Result<bool> {
    Ok(ratio_bound_check(key, a)?.holds)
}

/// `1 - q^lambda >= lambda (1 - q)` for `0 < lambda < 1`.
///
/// The only hypothesis enforced on `(K, P)` is `K <= 2P`, which every valid
/// [`KeyParams`] already meets.
pub fn lambda_bound_check(key: KeyParams, lambda: &Rational) -> Result<BoundCheck> {
    if *lambda <= Rational::zero() || *lambda >= Rational::one() {
        return Err(Error::InvalidArgument(format!("lambda must lie in (0, 1), got {lambda}")));
    }
    if u64::from(key.k()) > 2 * u64::from(key.p()) {
        return Err(Error::InvalidArgument("lambda bound needs K <= 2P".into()));
    }
    let q = exact_q(key);
    let rest = Rational::one() - lambda * (Rational::one() - &q);
    let (num, den) = split_positive(lambda);
    // 1 - q^l >= l (1 - q)  <=>  q^(num/den) <= rest  <=>  q^num <= rest^den
    let holds = q.pow(num as i32) <= rest.pow(den as i32);
    let qf = approx(&q);
    Ok(BoundCheck {
        lhs: 1.0 - qf.powf(approx(lambda)),
        rhs: approx(lambda) * (1.0 - qf),
        holds,
    })
}

pub fn verify_lambda_bound(key: KeyParams, lambda: &Rational) -> Result<bool> {
    Ok(lambda_bound_check(key, lambda)?.holds)
}

/// Exact `P(r-node intersection graph is connected)` against the spanning-tree
/// bound `r^(r-2) (alpha (1 - q))^(r-1)`.
pub fn tree_bound_check(r: usize, params: &ExactParams) -> Result<BoundCheck> {
    tree_bound_check_scaled(r, params, &Rational::one())
}

/// Same as [`tree_bound_check`] with the bound multiplied by `scale`; a scale
/// below one turns it into a deliberately wrong bound for harness self-tests.
pub(crate) fn tree_bound_check_scaled(
    r: usize,
    params: &ExactParams,
    scale: &Rational,
) -> Result<BoundCheck> {
    let exact = enumerate_exact(r, params)?.p_connected;
    let trees = int(r as u64).pow(r as i32 - 2);
    let bound = trees * params.edge_probability().pow(r as i32 - 1) * scale;
    Ok(BoundCheck {
        lhs: approx(&exact),
        rhs: approx(&bound),
        holds: exact <= bound,
    })
}

pub fn verify_tree_bound(r: usize, params: &ExactParams) -> Result<bool> {
    Ok(tree_bound_check(r, params)?.holds)
}

/// Lower bound on `exp(x)` for rational `x >= 0`: a Taylor partial sum run
/// until the next term is below `2^-96` of the total.
pub fn exp_lower_bound(x: &Rational) -> Rational {
    assert!(*x >= Rational::zero(), "exp_lower_bound needs x >= 0");
    let mut sum = Rational::one();
    let mut term = Rational::one();
    let tiny = Rational::new(BigInt::one(), BigInt::one() << 96u32);
    for k in 1u64.. {
        term = term * x / int(k);
        sum += &term;
        if int(k) > x * int(2) && term < &sum * &tiny {
            break;
        }
    }
    sum
}

/// Exact `E[chi_1 chi_2] / E[chi_1]^2` against
/// `(q + (1 - q) exp(alpha^2 (1 - q) n / s^2)) / s^2` with `s = 1 - alpha (1 - q)`.
pub fn second_moment_check(n: usize, params: &ExactParams) -> Result<BoundCheck> {
    let report = enumerate_exact(n, params)?;
    if report.p_isolated_first.is_zero() {
        return Err(Error::InvalidArgument(
            "second-moment ratio undefined: nodes are never isolated".into(),
        ));
    }
    let ratio = &report.cross_moment / (&report.p_isolated_first * &report.p_isolated_first);

    let q = exact_q(params.key);
    let gap = Rational::one() - &q;
    let s = Rational::one() - &params.alpha * &gap;
    let s2 = &s * &s;
    let x = &params.alpha * &params.alpha * &gap * int(n as u64) / &s2;
    let bound = (&q + &gap * exp_lower_bound(&x)) / &s2;
    let xf = approx(&x);
    Ok(BoundCheck {
        lhs: approx(&ratio),
        rhs: (approx(&q) + approx(&gap) * xf.exp()) / approx(&s2),
        holds: ratio <= bound,
    })
}

pub fn verify_second_moment_bound(n: usize, params: &ExactParams) -> Result<bool> {
    Ok(second_moment_check(n, params)?.holds)
}

/// Whether `r` is in lowest terms with a positive denominator.
pub fn is_reduced(r: &Rational) -> bool {
    r.numer().gcd(r.denom()).is_one() && *r.denom() > BigInt::zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(k: u32, p: u32) -> KeyParams {
        KeyParams::new(k, p).unwrap()
    }

    fn params(k: u32, p: u32, num: i64, den: i64) -> ExactParams {
        ExactParams::new(key(k, p), rational(num, den)).unwrap()
    }

    #[test]
    fn exact_q_values() {
        assert_eq!(exact_q(key(1, 2)), rational(1, 2));
        assert_eq!(exact_q(key(3, 5)), Rational::zero());
        assert_eq!(exact_q(key(2, 10)), rational(28, 45));
        assert_eq!(exact_avoidance(key(2, 6), 2), rational(2, 5));
        assert_eq!(exact_avoidance(key(2, 6), 0), Rational::one());
    }

    #[test]
    fn exact_q_matches_binomial_ratio() {
        for p in 1..=30u32 {
            for k in 1..=p {
                let kp = key(k, p);
                let direct = Rational::new(
                    BigInt::from(binomial(u64::from(p - k), u64::from(k))),
                    BigInt::from(binomial(u64::from(p), u64::from(k))),
                );
                assert_eq!(exact_q(kp), direct, "K={k} P={p}");
            }
        }
    }

    #[test]
    fn scan_thresholds() {
        assert_eq!(exact_threshold_k(500, 10_000, 0.8).unwrap(), 13);
        assert_eq!(exact_threshold_k(500, 10_000, 0.2).unwrap(), 26);
        assert_eq!(exact_threshold_k(500, 3, 1.0).unwrap(), 1);
    }

    #[test]
    fn two_node_instance() {
        let r = enumerate_exact(2, &params(1, 2, 1, 2)).unwrap();
        assert_eq!(r.p_connected, rational(1, 4));
        assert_eq!(r.expected_isolated, rational(3, 2));
        assert_eq!(r.total_mass, Rational::one());

        let r = enumerate_exact(2, &params(1, 1, 1, 2)).unwrap();
        assert_eq!(r.p_connected, rational(1, 2));
    }

    #[test]
    fn three_node_expected_isolated() {
        let p = params(1, 2, 1, 2);
        let r = enumerate_exact(3, &p).unwrap();
        assert_eq!(r.expected_isolated, rational(27, 16));
        assert_eq!(closed_form_expected_isolated(3, &p), rational(27, 16));
        assert_eq!(r.p_isolated_first * int(3), r.expected_isolated);
    }

    #[test]
    fn budget_is_enforced() {
        let big = params(1, 200, 1, 2);
        assert!(matches!(enumerate_exact(4, &big), Err(Error::BudgetExceeded { .. })));
        assert!(enumerate_exact(1, &params(1, 2, 1, 2)).is_err());
        assert_eq!(enumeration_size(3, key(1, 2)), Some(8 * 8));
    }

    #[test]
    fn ratio_bound_examples() {
        assert!(verify_ratio_bound(key(4, 30), &Rational::one()).unwrap());
        assert!(verify_ratio_bound(key(2, 10), &int(2)).unwrap());
        assert!(verify_ratio_bound(key(3, 5), &rational(3, 2)).unwrap());
        assert!(ratio_bound_check(key(3, 5), &rational(1, 2)).is_err());
        let at_one = ratio_bound_check(key(5, 40), &Rational::one()).unwrap();
        assert_eq!(at_one.lhs, at_one.rhs);
    }

    #[test]
    fn lambda_bound_examples() {
        assert!(verify_lambda_bound(key(3, 5), &rational(1, 3)).unwrap());
        assert!(verify_lambda_bound(key(2, 10), &rational(1, 2)).unwrap());
        assert!(lambda_bound_check(key(2, 10), &Rational::one()).is_err());
        assert!(lambda_bound_check(key(2, 10), &Rational::zero()).is_err());
    }

    #[test]
    fn tree_bound_examples() {
        let p = params(2, 7, 1, 3);
        let c = tree_bound_check(2, &p).unwrap();
        assert!(c.holds);
        assert_eq!(c.lhs, c.rhs);
        assert!(verify_tree_bound(3, &params(1, 2, 1, 2)).unwrap());
        assert!(verify_tree_bound(4, &params(1, 3, 1, 3)).unwrap());
        let mutant = tree_bound_check_scaled(2, &p, &rational(1, 2)).unwrap();
        assert!(!mutant.holds);
    }

    #[test]
    fn second_moment_two_nodes_closed_form() {
        let p = params(1, 2, 1, 2);
        let r = enumerate_exact(2, &p).unwrap();
        let stay = Rational::one() - p.edge_probability();
        let ratio = &r.cross_moment / (&r.p_isolated_first * &r.p_isolated_first);
        assert_eq!(ratio, Rational::one() / stay);
        assert!(verify_second_moment_bound(2, &p).unwrap());
        assert!(verify_second_moment_bound(3, &p).unwrap());
        assert!(verify_second_moment_bound(3, &params(2, 4, 1, 4)).unwrap());
    }

    #[test]
    fn exp_lower_bound_is_below_and_close() {
        for (num, den) in [(0, 1), (1, 3), (5, 2), (27, 1)] {
            let x = rational(num, den);
            let lb = approx(&exp_lower_bound(&x));
            let exact = (num as f64 / den as f64).exp();
            assert!(lb <= exact * (1.0 + 1e-15));
            assert!((lb - exact).abs() <= exact * 1e-12, "x={num}/{den}");
        }
    }

    #[test]
    fn rationals_stay_reduced() {
        let r = enumerate_exact(3, &params(2, 4, 3, 4)).unwrap();
        for v in [&r.p_connected, &r.p_no_isolated, &r.expected_isolated, &r.cross_moment] {
            assert!(is_reduced(v));
        }
    }
}
