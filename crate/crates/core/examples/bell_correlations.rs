// Singlet correlations from the hidden-variable table and from the operator.
//
//     cargo run --example bell_correlations

use std::error::Error;
use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statelab::bell::{expectation_concurrent, expectation_qm, hidden_variable_table, AxisPair};
use statelab::qcore::Direction;

fn run(out: &mut dyn Write) -> Result<(), Box<dyn Error>> {
    let pair = AxisPair::new(Direction::z(), Direction::new(1.0, 0.5)?);
    writeln!(out, "a = {:?}, b = {:?}", pair.a.cartesian(), pair.b.cartesian())?;
    for entry in &hidden_variable_table(&pair).entries {
        writeln!(
            out,
            "  rho(A={}, B={}) = {:.6}",
            entry.outcome.a, entry.outcome.b, entry.rho
        )?;
    }
    writeln!(out, "table correlation {:+.12}", expectation_concurrent(&pair))?;
    writeln!(out, "operator          {:+.12}", expectation_qm(&pair)?)?;
    writeln!(out, "-a.b              {:+.12}", pair.minus_dot())?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let worst = (0..500)
        .map(|_| AxisPair::random(&mut rng))
        .map(|p| Ok((expectation_concurrent(&p) - expectation_qm(&p)?).abs()))
        .collect::<statelab::Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    writeln!(out, "500 random pairs, worst disagreement {worst:.2e}")?;
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run(&mut io::stdout().lock())
}
