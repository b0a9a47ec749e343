//! Multi-seed experiment written as the trace CSV plus the quartile summary.
//!
//! cargo run --release --example regret_experiment -- [out_dir]

use std::path::PathBuf;

use delayed_bobw::config::load_config;
use delayed_bobw::harness::{write_csv, write_summary_csv};
use delayed_bobw::{aggregate, run_experiment};

fn main() {
    let out_dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let config_path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs/stochastic.toml");
    let config = load_config(&config_path).unwrap();

    let trace = run_experiment(&config).unwrap();
    let summary = aggregate(&trace).unwrap();
    let trace_path = out_dir.join("bobw_trace.csv");
    let summary_path = out_dir.join("bobw_summary.csv");
    write_csv(std::slice::from_ref(&trace), &trace_path).unwrap();
    write_summary_csv(std::slice::from_ref(&summary), &summary_path).unwrap();

    for row in &summary.rows {
        println!("t={:>6} q1={:>8.2} median={:>8.2} q3={:>8.2}", row.checkpoint, row.q1, row.median, row.q3);
    }
    println!("wrote {} and {}", trace_path.display(), summary_path.display());
}
