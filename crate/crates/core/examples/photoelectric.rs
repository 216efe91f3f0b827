// Two-site photoelectric model under uniform dim illumination.
//
//     cargo run --example photoelectric

use std::error::Error;
use std::io::{self, Write};

use num_complex::Complex64;
use statelab::photo::{evolve_uniform, pre_image_of_local_electron, uniformity_report, Excitation, PhotoConfig, Site};

fn run(out: &mut dyn Write) -> Result<(), Box<dyn Error>> {
    let cfg = PhotoConfig::default();
    let psi = evolve_uniform(&cfg, 0.3)?;
    for e in Excitation::ALL {
        let z = psi.amps()[e.index()];
        writeln!(
            out,
            "{:?}@{}: {:+.6}{:+.6}i  P = {:.6}",
            e.species,
            e.site,
            z.re,
            z.im,
            z.norm_sqr()
        )?;
    }
    let report = uniformity_report(&cfg, 0.3)?;
    for row in &report.species {
        writeln!(out, "{:?} marginal {:?}", row.species, row.marginal)?;
    }
    let absorber = PhotoConfig {
        a: Complex64::new(0.0, 0.0),
        ..cfg
    };
    for site in Site::BOTH {
        let pre = pre_image_of_local_electron(&absorber, site)?;
        writeln!(out, "pure absorber, electron at {site} came from {:?}", pre.amps())?;
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run(&mut io::stdout().lock())
}
