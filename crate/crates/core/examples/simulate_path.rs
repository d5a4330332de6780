//! Simulates one forced path at the default step size and reports where it spent its time.
//!
//! `cargo run --release --example simulate_path -- [phi_deg] [epsilon] [periods]`

use std::time::Instant;

use stochres::potential::{critical_forcing, Forcing, ModelParams};
use stochres::reduction::{build_well_tracks, reduce, DEFAULT_RADIUS, DEFAULT_TRACK_POINTS};
use stochres::sde::{simulate, SimConfig};

fn main() -> stochres::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let phi = args.first().copied().unwrap_or(0.0);
    let eps = args.get(1).copied().unwrap_or(0.18);
    let periods = args.get(2).copied().unwrap_or(2.0);

    let params = ModelParams::default();
    let f = 0.7 * critical_forcing(&params)?.min();
    let forcing = Forcing::new(f, phi, 0.001)?;
    let mut config = SimConfig::new(params, forcing, eps);
    config.n_periods = periods;
    config.seed = 42;

    let start = Instant::now();
    let rec = simulate(&config, 0, &mut ())?;
    let secs = start.elapsed().as_secs_f64();
    println!(
        "{} steps in {secs:.2} s ({:.1} ns/step), {} samples kept",
        config.n_steps(),
        1e9 * secs / config.n_steps() as f64,
        rec.len()
    );

    let xmax = rec.xs.iter().copied().fold(f64::MIN, f64::max);
    let xmin = rec.xs.iter().copied().fold(f64::MAX, f64::min);
    println!("x range [{xmin:.3}, {xmax:.3}]");
    let tracks = build_well_tracks(&params, &forcing, DEFAULT_RADIUS, DEFAULT_TRACK_POINTS)?;
    let red = reduce(rec.samples(), &tracks)?;
    let period = forcing.period();
    println!("{} transitions", red.path.n_transitions());
    for r in red.records.iter().take(10) {
        println!(
            "  {:<5} entered at {:.3} T, left after {:.3} T",
            r.well,
            r.u / period,
            r.duration() / period
        );
    }
    Ok(())
}
