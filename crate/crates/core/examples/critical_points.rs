//! Critical forcing thresholds and the frozen critical points over one period.
//!
//! `cargo run --example critical_points -- [phi_deg] [force_fraction]`

use stochres::potential::{critical_forcing, frozen_critical_points, Forcing, Label, ModelParams};

fn main() -> stochres::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let phi = args.first().copied().unwrap_or(84.0);
    let fraction = args.get(1).copied().unwrap_or(0.7);

    let params = ModelParams::default();
    let c = critical_forcing(&params)?;
    println!("x_sad {:.7}  x_crit {:.7}  y_sad {:.7}  y_crit {:.7}", c.x_sad, c.x_crit, c.y_sad, c.y_crit);

    let forcing = Forcing::new(fraction * c.min(), phi, 0.001)?;
    println!("F = {:.7} at {phi} degrees", forcing.magnitude);
    println!("{:>6} {:>22} {:>22} {:>9} {:>9}", "phase", "left well", "right well", "dV up", "dV down");
    for k in 0..8 {
        let phase = k as f64 / 8.0;
        let set = frozen_critical_points(&params, &forcing, phase * forcing.period())?;
        let l = set.get(Label::WellLeft);
        let r = set.get(Label::WellRight);
        let up = set.get(Label::SaddleUpper).value - l.value;
        let down = set.get(Label::SaddleLower).value - l.value;
        println!(
            "{phase:>6.3} ({:>9.5}, {:>9.5}) ({:>9.5}, {:>9.5}) {up:>9.5} {down:>9.5}",
            l.position.x, l.position.y, r.position.x, r.position.y
        );
    }
    Ok(())
}
