//! Grows a DMC network from an Erdos-Renyi seed and prints the tracked
//! summaries at a few checkpoints.

use netabc::graph::er_seed;
use netabc::models::{grow_dmc, DmcParams, GrowthPlan};
use netabc::rng::entry_rng;
use netabc::summaries::{SummaryKind, SummarySpec};

fn main() -> netabc::Result<()> {
    let seed = er_seed(30, 0.2, 1)?;
    println!("seed: {} nodes, {} edges, connected={}", seed.node_count(), seed.edge_count(), seed.is_connected());

    let specs = vec![SummarySpec::new(SummaryKind::AvgDegree), SummarySpec::new(SummaryKind::TriangleCount)];
    let plan = GrowthPlan::new(1000, GrowthPlan::grid(100, 1000, 100), specs);
    let params = DmcParams::new(0.25, 0.5)?;
    let grown = grow_dmc(seed, &params, &plan, &mut entry_rng(42))?;

    println!("{:>6} {:>10} {:>10}", "n", "avg_deg", "triangles");
    for (n, row) in grown.series.checkpoints.iter().zip(&grown.series.values) {
        println!("{n:>6} {:>10.3} {:>10}", row[0], row[1]);
    }
    Ok(())
}
