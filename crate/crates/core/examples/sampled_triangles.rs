//! Triangle counts on induced subgraphs of sampled nodes: cost against a
//! full census and the variance drop from averaging replicates.

use std::time::Instant;

use netabc::graph::er_seed;
use netabc::models::{grow_dmc, DmcParams, GrowthPlan};
use netabc::rng::entry_rng;
use netabc::summaries::{evaluate, replicate_variance_reduction, SummarySpec};

fn main() -> netabc::Result<()> {
    let plan = GrowthPlan::new(3000, vec![3000], vec![]);
    let g = grow_dmc(er_seed(30, 0.2, 1)?, &DmcParams::new(0.25, 0.5)?, &plan, &mut entry_rng(9))?.graph;

    let t = Instant::now();
    let full = g.count_triangles();
    println!("full census: {full} triangles in {:?}", t.elapsed());

    let mut rng = entry_rng(1);
    for n_star in [100, 300] {
        let spec = SummarySpec::sampled(n_star, 5)?;
        let t = Instant::now();
        let value = evaluate(&spec, &g, &mut rng)?;
        println!("n*={n_star}, 5 replicates: mean sample count {value:.1} in {:?}", t.elapsed());
    }

    for k in [1, 5, 20] {
        let (single, averaged) = replicate_variance_reduction(&g, 100, k, &mut rng, 400)?;
        println!("k={k:>2}: var single {single:.2}, var averaged {averaged:.2}, ratio {:.3}", averaged / single);
    }
    Ok(())
}
