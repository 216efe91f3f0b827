// Joint detector statistics of the two-cavity eraser.
//
//     cargo run --example quantum_eraser

use std::error::Error;
use std::io::{self, Write};

use statelab::cat_eraser::eraser_table;

fn run(out: &mut dyn Write) -> Result<(), Box<dyn Error>> {
    writeln!(out, "basis1 basis2 s1 s2 probability")?;
    for row in eraser_table() {
        writeln!(
            out,
            "{:>6} {:>6} {:>2} {:>2} {:.6}",
            row.basis1.token(),
            row.basis2.token(),
            row.s1.symbol(),
            row.s2.symbol(),
            row.probability
        )?;
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run(&mut io::stdout().lock())
}
