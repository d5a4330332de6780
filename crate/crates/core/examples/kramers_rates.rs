//! Frozen-phase escape rates across one forcing period.
//!
//! `cargo run --release --example kramers_rates -- [phi_deg] [epsilon]`

use stochres::kramers::{adiabatic_rate_table, static_rate};
use stochres::potential::{critical_forcing, find_critical_points, Forcing, ModelParams, Vec2, Well};

fn main() -> stochres::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let phi = args.first().copied().unwrap_or(0.0);
    let eps = args.get(1).copied().unwrap_or(0.18);

    let params = ModelParams::default();
    let unforced = static_rate(&find_critical_points(&params, Vec2::ZERO)?, Well::Left, eps)?;
    println!("unforced rate out of each well: {:.4e}", unforced.total);
    for s in &unforced.per_saddle {
        println!("  via {}: barrier {:.4}, rate {:.4e}", s.saddle, s.delta_v, s.rate);
    }

    let f = 0.7 * critical_forcing(&params)?.min();
    let forcing = Forcing::new(f, phi, 0.001)?;
    let table = adiabatic_rate_table(&params, &forcing, eps, 1024)?;
    println!("\n{:>6} {:>12} {:>12}", "phase", "left->right", "right->left");
    for k in (0..1024).step_by(64) {
        println!("{:>6.3} {:>12.4e} {:>12.4e}", k as f64 / 1024.0, table.rates_lr[k], table.rates_rl[k]);
    }
    let peak = |v: &[f64]| v.iter().enumerate().fold((0, 0.0), |m, (i, r)| if *r > m.1 { (i, *r) } else { m });
    let (il, pl) = peak(&table.rates_lr);
    let (ir, pr) = peak(&table.rates_rl);
    println!("\npeak left->right {pl:.4e} at phase {:.3}", il as f64 / 1024.0);
    println!("peak right->left {pr:.4e} at phase {:.3}", ir as f64 / 1024.0);
    Ok(())
}
