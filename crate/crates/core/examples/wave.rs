//! Explicit wave equation on the unit square driven by `p = sin(10 pi t)` on
//! the left edge. Prints field norms and energy every 100 steps.

use opfem::bench::{run_wave, WaveParams};

fn main() -> opfem::Result<()> {
    let run = run_wave(&WaveParams::new(32, 1e-3, 1.0))?;
    println!("{:>6} {:>6} {:>10} {:>10} {:>12}", "step", "t", "|p|inf", "|phi|inf", "energy");
    for s in &run.samples {
        println!("{:>6} {:>6.3} {:>10.4} {:>10.4} {:>12.5e}", s.step, s.t, s.p_max, s.phi_max, s.energy);
    }

    // switch the forcing off after one period and the energy stays put
    let free = run_wave(&WaveParams {
        forcing_until: 0.2,
        ..WaveParams::new(32, 1e-3, 1.0)
    })?;
    let late = &free.energy[free.energy.len() / 2..];
    let (lo, hi) = late.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    println!("unforced after t=0.2: late energy in [{lo:.6e}, {hi:.6e}]");
    Ok(())
}
