//! Escape-time densities of the rate model next to a simulated histogram.
//!
//! `cargo run --release --example escape_distributions -- [phi_deg] [epsilon] [seed]`

use stochres::escape::{record_histogram, EntrancePhaseModel, DEFAULT_BIN_WIDTH};
use stochres::potential::Well;
use stochres::sweep::{simulate_cell, CellSpec};

fn main() -> stochres::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let phi: f64 = args.first().map_or(0.0, |a| a.parse().expect("phi"));
    let eps: f64 = args.get(1).map_or(0.18, |a| a.parse().expect("epsilon"));
    let seed: u64 = args.get(2).map_or(7, |a| a.parse().expect("seed"));

    let data = simulate_cell(&CellSpec::desk(phi, eps, seed)?)?;
    let period = data.period();
    let model = data.escape_model()?;
    let records = data.records(None);
    let hist = record_histogram(&records, period, DEFAULT_BIN_WIDTH)?;
    let entrance = EntrancePhaseModel::empirical(&records, period)?;

    // model densities are per unit time; scale to per period
    println!("{} escapes", hist.n);
    println!("{:>7} {:>10} {:>10} {:>10}", "t / T", "simulated", "empirical", "perfect");
    for (i, d) in hist.density().iter().enumerate() {
        let mid = 0.5 * (hist.bin_start(i) + hist.bin_end(i)) * period;
        println!(
            "{:>7.3} {:>10.4} {:>10.4} {:>10.4}",
            mid / period,
            d,
            model.total_pdf(&entrance, mid) * period,
            model.total_pdf(&EntrancePhaseModel::PerfectPhase, mid) * period
        );
    }

    let dist = model.conditional(Well::Left, 0.25 * period);
    println!("\nfrom the left well entered at T/4:");
    for p in [0.1, 0.5, 0.9] {
        println!("  {:.0}% quantile at {:.3} T", 100.0 * p, (dist.quantile(p)? - 0.25 * period) / period);
    }
    Ok(())
}
