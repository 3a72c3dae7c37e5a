//! Fixed verification grids over the exact oracle.
//!
//! `bounds` exercises the four inequalities, `oracle` checks the enumerator
//! against the closed forms. Each case yields one [`CaseResult`].

use std::fmt;

use num_traits::One;
use serde::Serialize;

use super::{
    closed_form_expected_isolated, enumerate_exact, lambda_bound_check, rational,
    ratio_bound_check, second_moment_check, tree_bound_check_scaled, BoundCheck, ExactParams,
    Rational,
};
use crate::error::Result;
use crate::model::KeyParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Bounds,
    Oracle,
    All,
}

/// A deliberately broken check, used to prove the harness reports failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mutant {
    #[default]
    None,
    /// Halves the spanning-tree bound, which the two-node case then violates.
    HalvedTreeBound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseResult {
    pub check: &'static str,
    pub params: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CaseResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "ok  " } else { "FAIL" };
        write!(f, "{status} {:<14} {:<28} {}", self.check, self.params, self.detail)
    }
}

/// Ring sizes `1..=10`, pools `K..=60`.
pub fn ratio_lambda_key_grid() -> Vec<KeyParams> {
    (1..=10u32)
        .flat_map(|k| (k..=60).map(move |p| KeyParams::new(k, p).expect("K <= P")))
        .collect()
}

pub fn ratio_exponents() -> Vec<Rational> {
    vec![rational(1, 1), rational(3, 2), rational(2, 1), rational(5, 2)]
}

pub fn lambdas() -> Vec<Rational> {
    (1..=9).map(|i| rational(i, 10)).collect()
}

/// `K in {1, 2}`, `P in K..=4`, `alpha in {1/4, 1/2, 3/4}`.
pub fn small_instance_grid() -> Vec<ExactParams> {
    let mut out = Vec::new();
    for k in 1..=2u32 {
        for p in k.max(2)..=4 {
            for num in 1..=3 {
                let key = KeyParams::new(k, p).expect("K <= P");
                out.push(ExactParams::new(key, rational(num, 4)).expect("alpha in range"));
            }
        }
    }
    out
}

fn describe(key: KeyParams) -> String {
    format!("K={} P={}", key.k(), key.p())
}

fn describe_exact(n: usize, params: &ExactParams) -> String {
    format!("n={n} {} alpha={}", describe(params.key), params.alpha)
}

fn from_check(check: &'static str, params: String, relation: &str, c: BoundCheck) -> CaseResult {
    CaseResult {
        check,
        params,
        passed: c.holds,
        detail: if c.holds {
            format!("lhs={:.6e} {relation} rhs={:.6e}", c.lhs, c.rhs)
        } else {
            format!("lhs={:.6e} violates {relation} rhs={:.6e}", c.lhs, c.rhs)
        },
    }
}

fn from_result(check: &'static str, params: String, relation: &str, r: Result<BoundCheck>) -> CaseResult {
    match r {
        Ok(c) => from_check(check, params, relation, c),
        Err(e) => CaseResult {
            check,
            params,
            passed: false,
            detail: e.to_string(),
        },
    }
}

pub fn bounds_suite(mutant: Mutant) -> Vec<CaseResult> {
    let mut out = Vec::new();
    let keys = ratio_lambda_key_grid();
    for &key in &keys {
        for a in ratio_exponents() {
            let params = format!("{} a={a}", describe(key));
            out.push(from_result("ratio", params, "<=", ratio_bound_check(key, &a)));
        }
    }
    for &key in &keys {
        for lambda in lambdas() {
            let params = format!("{} lambda={lambda}", describe(key));
            out.push(from_result("lambda", params, ">=", lambda_bound_check(key, &lambda)));
        }
    }
    let scale = match mutant {
        Mutant::None => Rational::one(),
        Mutant::HalvedTreeBound => rational(1, 2),
    };
    for params in small_instance_grid() {
        for r in 2..=4 {
            let check = tree_bound_check_scaled(r, &params, &scale);
            out.push(from_result("tree", describe_exact(r, &params), "<=", check));
        }
    }
    for params in small_instance_grid() {
        for n in 2..=3 {
            let check = second_moment_check(n, &params);
            out.push(from_result("second-moment", describe_exact(n, &params), "<=", check));
        }
    }
    out
}

pub fn oracle_suite() -> Vec<CaseResult> {
    let mut out = Vec::new();
    for params in small_instance_grid() {
        for n in 2..=3 {
            let label = describe_exact(n, &params);
            let result = match enumerate_exact(n, &params) {
                Ok(r) => {
                    let closed = closed_form_expected_isolated(n, &params);
                    let mass_ok = r.total_mass == Rational::one();
                    let moment_ok = r.expected_isolated == closed;
                    let order_ok = r.p_connected <= r.p_no_isolated;
                    CaseResult {
                        check: "enumeration",
                        params: label,
                        passed: mass_ok && moment_ok && order_ok,
                        detail: format!(
                            "P(conn)={} P(no-iso)={} E[I]={} closed-form={} mass={}",
                            r.p_connected, r.p_no_isolated, r.expected_isolated, closed, r.total_mass
                        ),
                    }
                }
                Err(e) => CaseResult {
                    check: "enumeration",
                    params: label,
                    passed: false,
                    detail: e.to_string(),
                },
            };
            out.push(result);
        }
    }
    out
}

pub fn run_suite(suite: Suite, mutant: Mutant) -> Vec<CaseResult> {
    match suite {
        Suite::Bounds => bounds_suite(mutant),
        Suite::Oracle => oracle_suite(),
        Suite::All => {
            let mut all = bounds_suite(mutant);
            all.extend(oracle_suite());
            all
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        assert_eq!(ratio_lambda_key_grid().len(), (1..=10).map(|k| 61 - k).sum::<usize>());
        // (K,P) in {(1,2),(1,3),(1,4),(2,2),(2,3),(2,4)} times three alphas
        assert_eq!(small_instance_grid().len(), 18);
    }

    #[test]
    fn oracle_suite_passes() {
        let results = oracle_suite();
        assert_eq!(results.len(), 36);
        assert!(results.iter().all(|r| r.passed), "{results:#?}");
    }

    #[test]
    fn mutant_is_caught() {
        let results = bounds_suite(Mutant::HalvedTreeBound);
        let failures: Vec<_> = results.iter().filter(|r| !r.passed).collect();
        assert!(!failures.is_empty());
        assert!(failures.iter().all(|r| r.check == "tree"));
    }
}
