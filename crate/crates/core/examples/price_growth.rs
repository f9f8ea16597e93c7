//! Price's model: directed preferential attachment with binomial out-degree.

use netabc::graph::er_seed_directed;
use netabc::models::{grow_price, GrowthPlan, PriceParams};
use netabc::rng::entry_rng;
use netabc::summaries::{SummaryKind, SummarySpec};

fn main() -> netabc::Result<()> {
    let seed = er_seed_directed(30, 0.2, 1)?;
    let specs = vec![
        SummarySpec::new(SummaryKind::InDegreeMean),
        SummarySpec::new(SummaryKind::InDegreeVariance),
        SummarySpec::new(SummaryKind::TriangleCount),
    ];
    let plan = GrowthPlan::new(2000, GrowthPlan::grid(250, 2000, 250), specs);
    for (k0, p) in [(0.9, 0.019), (1.1, 0.021)] {
        let params = PriceParams::new(k0, p, 610)?;
        let grown = grow_price(seed.clone(), &params, &plan, &mut entry_rng(3))?;
        println!("k0={k0} p={p}");
        for (n, row) in grown.series.checkpoints.iter().zip(&grown.series.values) {
            println!("  n={n:>5} in_mean={:>7.3} in_var={:>9.2} triangles={}", row[0], row[1], row[2]);
        }
        let max_in = grown.graph.in_degrees().into_iter().max().unwrap_or(0);
        println!("  largest in-degree {max_in}");
    }
    Ok(())
}
