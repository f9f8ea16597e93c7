//! Gaussian-process extrapolation of average degree and triangles with each
//! kernel family, seeded from a power-law least-squares fit.

use netabc::gp::{fit_map, predict, KernelFamily, KernelSpec, Warp};
use netabc::graph::er_seed;
use netabc::lsfit::{fit, Family};
use netabc::models::{grow_dmc, DmcParams, GrowthPlan};
use netabc::rng::entry_rng;
use netabc::summaries::{SummaryKind, SummarySpec};

fn main() -> netabc::Result<()> {
    let kinds = [SummaryKind::AvgDegree, SummaryKind::TriangleCount];
    let specs = kinds.iter().map(|&k| SummarySpec::new(k)).collect();
    let mut checkpoints = GrowthPlan::grid(35, 500, 5);
    checkpoints.push(1000);
    let plan = GrowthPlan::new(1000, checkpoints, specs);
    let grown = grow_dmc(er_seed(30, 0.2, 1)?, &DmcParams::new(0.3, 0.6)?, &plan, &mut entry_rng(5))?;
    let mut ns = grown.series.grid();
    ns.pop();

    for (j, &kind) in kinds.iter().enumerate() {
        let mut ys = grown.series.column(j);
        let truth = ys.pop().unwrap();
        let init = fit(&ns, &ys, Family::Power)?;
        println!("{} at 1000: {truth:.3}", kind.name());
        for family in KernelFamily::ALL {
            let gp = fit_map(&ns, &ys, KernelSpec::new(family, Warp::for_summary(kind)), &init)?;
            let p = predict(&gp, 1000.0)?;
            let z = (truth - p.mean) / p.variance.sqrt();
            println!(
                "  {:<18} mean={:>12.3} sd={:>10.3} z={z:>6.2} converged={}",
                family.name(),
                p.mean,
                p.variance.sqrt(),
                gp.converged
            );
        }
    }
    Ok(())
}
