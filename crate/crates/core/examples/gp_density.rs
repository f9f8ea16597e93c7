//! Density-based acceptance with Gaussian-process predictive distributions.
//! With a tight predictive variance most entries give zero density at the
//! observed point and the accepted set is padded by random fills; inflating
//! the variance removes the fills.

use netabc::abc::{accept_top_k_density, posterior_stats, Method};
use netabc::harness::{build_reference_table, seed_graph, simulate_observed, RunConfig};
use netabc::rng::entry_rng;
use netabc::summaries::evaluate_all;

fn main() -> netabc::Result<()> {
    let cfg = RunConfig::default().with_overrides(&["method=GPc", "b=40", "k=10", "n_s=300", "grid_stop=300"])?;
    let seed = seed_graph(&cfg)?;
    let truth = cfg.truths[0].clone();
    let built = build_reference_table(&cfg, Method::GPc, &seed, None)?;
    println!("GP table: {} entries, {} failed", built.len(), built.failures.len());

    let observed = simulate_observed(&cfg, &seed, &truth, 77)?;
    let s_obs = evaluate_all(&cfg.summary_specs(Method::GPc)?, &observed, &mut entry_rng(0))?;

    for inflate in [1.0, 10.0, 100.0, 1e4] {
        let post = accept_top_k_density(&built.table, &s_obs, cfg.k, inflate, &mut entry_rng(1))?;
        let stats = posterior_stats(&post, Some(&truth))?;
        println!(
            "inflate {inflate:>7}: zero fills {:>2}/{}, posterior mean ({:.3}, {:.3})",
            post.zero_fills, cfg.k, stats.mean[0], stats.mean[1]
        );
    }
    Ok(())
}
