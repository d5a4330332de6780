//! Runs one desk-scale ensemble and prints its resonance diagnostics.
//!
//! `cargo run --release --example resonance_cell -- [phi_deg] [epsilon] [seed]`

use stochres::measures::flat_measures;
use stochres::potential::Well;
use stochres::sweep::{simulate_cell, CellSpec};

fn window_fraction(phases: &[f64], lo: f64, hi: f64) -> f64 {
    phases.iter().filter(|p| **p >= lo && **p <= hi).count() as f64 / phases.len().max(1) as f64
}

fn main() -> stochres::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let phi: f64 = args.first().map_or(0.0, |a| a.parse().expect("phi"));
    let eps: f64 = args.get(1).map_or(0.18, |a| a.parse().expect("epsilon"));
    let seed: u64 = args.get(2).map_or(7, |a| a.parse().expect("seed"));

    let spec = CellSpec::desk(phi, eps, seed)?;
    let start = std::time::Instant::now();
    let data = simulate_cell(&spec)?;
    println!(
        "phi = {phi}, eps = {eps}: {} realizations x {} periods in {:.1} s",
        spec.n_realizations,
        spec.n_periods,
        start.elapsed().as_secs_f64()
    );

    let period = data.period();
    let m = data.measures()?;
    let (se1, se3) = data.measure_errors()?;
    let flat = flat_measures(period);
    println!("M1 = {:.4e} +- {se1:.1e}", m.m1);
    println!("M2 = {:.4e}", m.m2);
    println!("M3 = {:.4e} +- {se3:.1e}  (T = {period:.1})", m.m3);
    println!("M4 / (T/2)    = {:.4}", m.m4 / flat.m4);
    println!("M5 / (T ln 2) = {:.4}", m.m5 / flat.m5);
    println!("M6 / (T ln 2) = {:.4}", m.m6 / flat.m6);
    let (d1, d2) = data.diffusion_measures()?;
    println!("diffusion M1 = {d1:.4}, M2 = {d2:.4}");

    let phases = data.duration_phases(None);
    println!("{} escapes", phases.len());
    println!("  durations mod T in [0.35, 0.65]: {:.3}", window_fraction(&phases, 0.35, 0.65));
    println!(
        "  durations mod T in [0, 0.15] or [0.85, 1]: {:.3}",
        window_fraction(&phases, 0.0, 0.15) + window_fraction(&phases, 0.85, 1.0)
    );
    for well in [Well::Left, Well::Right] {
        match data.ks(well) {
            Ok(k) => println!(
                "  conditional KS {well}: n = {}, sqrt(n) S = {:.4}, Q = {:.4}, accepted = {}",
                k.n, k.scaled, k.q_value, k.accepted_99
            ),
            Err(e) => println!("  conditional KS {well}: {e}"),
        }
    }
    Ok(())
}
