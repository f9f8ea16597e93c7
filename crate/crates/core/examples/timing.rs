//! Per-entry and observed-summary timings, extrapolated to full table sizes.

use netabc::harness::timing::write_timing_csv;
use netabc::harness::{timing_report, RunConfig};

fn main() -> netabc::Result<()> {
    let cfg = RunConfig::default().with_overrides(&[
        "method=S,LS,RE",
        "timing_n_o=1000,3000",
        "timing_table_sizes=100,1000",
        "timing_reps=2",
    ])?;
    let rows = timing_report(&cfg)?;
    write_timing_csv(&rows, std::io::stdout())?;
    Ok(())
}
