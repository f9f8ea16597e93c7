//! Fits each least-squares form to a triangle curve tracked up to 500 nodes
//! and compares the extrapolation at 1000 nodes with the grown value.

use netabc::graph::er_seed;
use netabc::lsfit::{extrapolate, fit, Family};
use netabc::models::{grow_dmc, DmcParams, GrowthPlan};
use netabc::rng::entry_rng;
use netabc::summaries::{SummaryKind, SummarySpec};

fn main() -> netabc::Result<()> {
    let specs = vec![SummarySpec::new(SummaryKind::TriangleCount)];
    let mut checkpoints = GrowthPlan::grid(35, 500, 5);
    checkpoints.push(1000);
    let plan = GrowthPlan::new(1000, checkpoints, specs);
    let grown = grow_dmc(er_seed(30, 0.2, 1)?, &DmcParams::new(0.25, 0.5)?, &plan, &mut entry_rng(11))?;

    let mut ns = grown.series.grid();
    let mut ys = grown.series.column(0);
    let truth = ys.pop().unwrap();
    ns.pop();

    println!("triangles at 1000 nodes: {truth}");
    for family in [Family::Power, Family::PowerOffset, Family::Inverse, Family::Digamma] {
        match fit(&ns, &ys, family) {
            Ok(f) => {
                let at = extrapolate(&f, 1000.0)?;
                println!(
                    "{:<13} params={:?} sse={:.3e} converged={} -> {at:.1} ({:+.1}%)",
                    family.name(),
                    f.form.params.iter().map(|p| format!("{p:.4}")).collect::<Vec<_>>(),
                    f.residual_sse,
                    f.converged,
                    100.0 * (at - truth) / truth
                );
            }
            Err(e) => println!("{:<13} failed: {e}", family.name()),
        }
    }
    Ok(())
}
