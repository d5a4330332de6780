//! Runs a reduced sweep into a directory and emits the plot bundle.
//!
//! `cargo run --release --example sweep_desk -- [output_dir] [realizations]`

use std::path::PathBuf;

use stochres::sweep::{emit_plots, run_sweep, SweepConfig};

fn main() -> stochres::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut cfg = SweepConfig::desk();
    cfg.output_dir = args.first().map_or_else(|| PathBuf::from("sweep-desk"), PathBuf::from);
    if let Some(n) = args.get(1) {
        cfg.n_realizations = n.parse().expect("realizations");
    }

    let start = std::time::Instant::now();
    let manifest = run_sweep(&cfg)?;
    println!("{} cells in {:.1} s", manifest.cells.len(), start.elapsed().as_secs_f64());
    for c in &manifest.cells {
        println!("  eps {:.2} phi {:>4}: {}", c.epsilon, c.phi, c.error.as_deref().unwrap_or("ok"));
    }
    for f in emit_plots(&manifest, &cfg.output_dir)? {
        println!("{}", f.display());
    }
    Ok(())
}
