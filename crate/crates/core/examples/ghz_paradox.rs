// GHZ eigenvalues, the orthogonality test and the site-wise consistency argument.
//
//     cargo run --example ghz_paradox

use std::error::Error;
use std::f64::consts::FRAC_PI_2;
use std::io::{self, Write};

use statelab::ghz::{
    check_defining_eigenvalues, compat_amplitude, mermin_paradox_report, orthogonality_condition, TripleDirections,
};
use statelab::qcore::Sign;

fn run(out: &mut dyn Write) -> Result<(), Box<dyn Error>> {
    for check in check_defining_eigenvalues() {
        writeln!(
            out,
            "{} eigenvalue {:+.12} residual {:.1e}",
            check.operator, check.eigenvalue, check.residual
        )?;
    }
    let equator = TripleDirections::from_angles([(FRAC_PI_2, 0.0), (FRAC_PI_2, 0.0), (FRAC_PI_2, 0.0)])?;
    let tilted = TripleDirections::from_angles([(1.0, 0.0), (2.0, 0.3), (0.5, 1.1)])?;
    for (name, t) in [("x,x,x", equator), ("tilted", tilted)] {
        let amp = compat_amplitude(&t, [Sign::Plus; 3]);
        writeln!(
            out,
            "{name}: orthogonal {} |amplitude| {:.3e}",
            orthogonality_condition(&t),
            amp.norm()
        )?;
    }
    let report = mermin_paradox_report();
    for p in &report.patterns {
        writeln!(
            out,
            "{} XXX {:+.0} P {:.3} contradicts {:?}",
            p.label, p.xxx_eigenvalue, p.ghz_probability, p.contradicts
        )?;
    }
    writeln!(
        out,
        "site-wise consistent pattern {:?}",
        report.sitewise_consistent_pattern
    )?;
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run(&mut io::stdout().lock())
}
