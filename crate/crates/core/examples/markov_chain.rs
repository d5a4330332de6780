//! Two-state chain driven by the adiabatic rates: transient, invariant measure and relaxation.
//!
//! `cargo run --release --example markov_chain -- [phi_deg] [epsilon]`

use stochres::ctmc::{invariant_measure, relaxation_time, transient_path, StateProbability};
use stochres::io::rate_pair;
use stochres::kramers::adiabatic_rate_table;
use stochres::potential::{critical_forcing, Forcing, ModelParams};

fn main() -> stochres::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let phi = args.first().copied().unwrap_or(0.0);
    let eps = args.get(1).copied().unwrap_or(0.18);

    let params = ModelParams::default();
    let f = 0.7 * critical_forcing(&params)?.min();
    let forcing = Forcing::new(f, phi, 0.001)?;
    let rates = rate_pair(&adiabatic_rate_table(&params, &forcing, eps, 1024)?)?;
    let period = rates.period();

    let inv = invariant_measure(&rates, 16)?;
    let start = StateProbability::new(0.0, 1.0)?;
    let times: Vec<f64> = (0..=48).map(|k| k as f64 * period / 16.0).collect();
    let path = transient_path(&rates, start, &times)?;
    println!("{:>8} {:>10} {:>10}", "t / T", "nu_-(t)", "nubar_-");
    for (k, s) in path.iter().enumerate() {
        println!("{:>8.4} {:>10.6} {:>10.6}", s.t / period, s.nu_minus, inv.nu_minus_bar[k % 16]);
    }
    let tau = relaxation_time(&rates, start)?;
    println!("\nrelaxation from the left state: {:.4} T", tau / period);
    Ok(())
}
