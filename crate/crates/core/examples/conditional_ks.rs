//! Conditional Kolmogorov-Smirnov test of simulated escapes against the rate model.
//!
//! `cargo run --release --example conditional_ks -- [phi_deg] [epsilon] [seed]`

use stochres::potential::Well;
use stochres::stats::{kolmogorov_cdf, staircase, THRESHOLD_99};
use stochres::sweep::{simulate_cell, CellSpec};

fn main() -> stochres::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let phi: f64 = args.first().map_or(0.0, |a| a.parse().expect("phi"));
    let eps: f64 = args.get(1).map_or(0.18, |a| a.parse().expect("epsilon"));
    let seed: u64 = args.get(2).map_or(7, |a| a.parse().expect("seed"));

    let data = simulate_cell(&CellSpec::desk(phi, eps, seed)?)?;
    let model = data.escape_model()?;
    println!("threshold {THRESHOLD_99} (Q = {:.6})", kolmogorov_cdf(THRESHOLD_99));
    for well in [Well::Left, Well::Right] {
        let ks = data.ks(well)?;
        println!(
            "{:<5}: n = {}, sqrt(n) S = {:.3}, Q = {:.3}, {}",
            well.as_str(),
            ks.n,
            ks.scaled,
            ks.q_value,
            if ks.accepted_99 { "accepted" } else { "rejected" }
        );
        let v: Vec<f64> = data
            .records(Some(well))
            .iter()
            .map(|r| model.conditional(well, r.u).cdf(r.t))
            .collect();
        let stairs = staircase(&v);
        let worst = stairs.iter().map(|(x, y)| (y - x).abs()).fold(0.0, f64::max);
        println!("        staircase has {} steps, largest gap to the diagonal {worst:.3}", stairs.len());
    }
    Ok(())
}
