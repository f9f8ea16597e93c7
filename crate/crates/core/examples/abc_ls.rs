//! End-to-end rejection ABC with least-squares extrapolated summaries: build
//! a reference table, simulate an observed network at the truth and accept
//! the nearest entries.

use netabc::abc::{posterior_stats, Method};
use netabc::harness::experiment::{accept, standardization};
use netabc::harness::{build_reference_table, seed_graph, simulate_observed, RunConfig};
use netabc::rng::entry_rng;
use netabc::summaries::evaluate_all;

fn main() -> netabc::Result<()> {
    let cfg = RunConfig::default().with_overrides(&["method=LS", "b=300", "k=30"])?;
    let seed = seed_graph(&cfg)?;
    let truth = cfg.truths[0].clone();

    let built = build_reference_table(&cfg, Method::LS, &seed, None)?;
    println!("table: {} entries, {} failed", built.len(), built.failures.len());

    let observed = simulate_observed(&cfg, &seed, &truth, 2024)?;
    let specs = cfg.summary_specs(Method::LS)?;
    let s_obs = evaluate_all(&specs, &observed, &mut entry_rng(0))?;
    println!("observed summaries {s_obs:?}");

    let sds = standardization(&cfg, Method::LS, &built.table, &seed)?;
    let post = accept(&cfg, Method::LS, &built.table, &s_obs, Some(&sds), 0)?;
    let stats = posterior_stats(&post, Some(&truth))?;
    for (j, name) in cfg.theta_names().iter().enumerate() {
        println!(
            "{name}: truth {:.3}, posterior mean {:.3}, 95% interval [{:.3}, {:.3}]",
            truth[j], stats.mean[j], stats.q025[j], stats.q975[j]
        );
    }
    Ok(())
}
