//! Pilot runs for the zero-one trend check: repeats the probe over many
//! master seeds and reports the worst step against the expected direction.
//!
//! `cargo run --release -p keygraph-core --example zero_one_pilot -- 200`

use keygraph_core::experiment::{zero_one_probe, ZeroOneProbeConfig};
use keygraph_core::model::AlphaRule;

fn main() -> keygraph_core::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    for (c, rising) in [(2.0, true), (0.5, false)] {
        let mut worst_step = Vec::new();
        let mut finals = Vec::new();
        for seed in 0..seeds {
            let report = zero_one_probe(&ZeroOneProbeConfig {
                c,
                sigma: 20.0,
                alpha_rule: AlphaRule::Constant(0.8),
                n_list: vec![100, 200, 400, 800],
                trials: 200,
                master_seed: 0x5eed_0000 + seed,
            })?;
            let p = report.p_no_isolated();
            let step = p
                .windows(2)
                .map(|w| if rising { w[0] - w[1] } else { w[1] - w[0] })
                .fold(f64::NEG_INFINITY, f64::max);
            worst_step.push(step);
            finals.push(*p.last().unwrap());
        }
        worst_step.sort_by(f64::total_cmp);
        finals.sort_by(f64::total_cmp);
        let q = |v: &[f64], f: f64| v[((v.len() - 1) as f64 * f).round() as usize];
        println!(
            "c={c} seeds={seeds} worst step: median {:.4} p99 {:.4} max {:.4} | final: min {:.4} median {:.4} max {:.4}",
            q(&worst_step, 0.5),
            q(&worst_step, 0.99),
            worst_step.last().unwrap(),
            finals[0],
            q(&finals, 0.5),
            finals.last().unwrap(),
        );
    }
    Ok(())
}
