// Induced coherence: fringe visibility against attenuator transmission.
//
//     cargo run --example zwm_visibility

use std::error::Error;
use std::io::{self, Write};

use num_complex::Complex64;
use statelab::zwm::{fringe_extremes, fringe_shift, min_time_lag, visibility, ZwmConfig};

fn run(out: &mut dyn Write) -> Result<(), Box<dyn Error>> {
    writeln!(out, "|T|   visibility  I_max       I_min")?;
    for k in 0..=5 {
        let t = k as f64 / 5.0;
        let cfg = ZwmConfig::default().with_transmission(Complex64::new(t, 0.0));
        let (hi, lo) = fringe_extremes(&cfg);
        writeln!(out, "{t:.1}   {:.9}  {hi:.4e}  {lo:.4e}", visibility(&cfg)?)?;
    }
    let cfg = ZwmConfig::default();
    let dt = 2e-16;
    writeln!(
        out,
        "fringe shift for dt = {dt:e} s: {:+.9} rad (omega dt = {:.9})",
        fringe_shift(&cfg, dt, 32)?,
        cfg.omega_i * dt
    )?;
    writeln!(out, "earliest detector response {:.6e} s", min_time_lag(0.3, 0.6)?)?;
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run(&mut io::stdout().lock())
}
