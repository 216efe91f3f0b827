// Consistent spin-assignment sets: construction, Monte-Carlo verification and
// a search for orthogonal triples the sampler cannot reach.
//
//     cargo run --release --example ghz_consistent_sets

use std::error::Error;
use std::f64::consts::FRAC_PI_3;
use std::io::{self, Write};

use statelab::ghz::{
    build_consistent_set, compat_amplitude, find_orthogonal_witness, solve_theta_k, verify_consistent_set,
    ConsistentSet, Pole, DEFAULT_EPSILON,
};
use statelab::qcore::Sign;

fn report(out: &mut dyn Write, name: &str, set: &ConsistentSet) -> Result<(), Box<dyn Error>> {
    let r = verify_consistent_set(set, 4096, 1)?;
    writeln!(
        out,
        "{name}: passed {} with {} orthogonal of {} samples, surface margin {:.2e}",
        r.passed, r.violations, r.samples, r.min_surface_margin
    )?;
    match find_orthogonal_witness(set) {
        Some(t) => {
            let thetas = t.0.map(|n| n.theta());
            let amp = compat_amplitude(&t, [Sign::Plus; 3]).norm();
            writeln!(
                out,
                "  all-up orthogonal triple at thetas {thetas:.6?}, phi = 0, |amplitude| {amp:.1e}"
            )?;
        }
        None => writeln!(out, "  no all-up orthogonal triple inside the bands")?,
    }
    Ok(())
}

fn run(out: &mut dyn Write) -> Result<(), Box<dyn Error>> {
    let theta_k = solve_theta_k(FRAC_PI_3, FRAC_PI_3)?;
    writeln!(out, "theta_k for theta_i = theta_j = pi/3: {theta_k:.12}")?;
    report(
        out,
        "hemisphere",
        &ConsistentSet::hemisphere(Pole::North, DEFAULT_EPSILON)?,
    )?;
    let banded = build_consistent_set(
        FRAC_PI_3,
        FRAC_PI_3,
        [Pole::North, Pole::South, Pole::South],
        DEFAULT_EPSILON,
    )?;
    writeln!(out, "{banded}")?;
    report(out, "banded", &banded)?;
    let closed = ConsistentSet::boundary_inclusive(FRAC_PI_3, FRAC_PI_3, [Pole::North, Pole::South, Pole::South])?;
    report(out, "boundary-inclusive", &closed)?;
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run(&mut io::stdout().lock())
}
