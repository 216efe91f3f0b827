// The cat S-operator: evolution, pre-images and the singlet correspondence.
//
//     cargo run --example cat_evolution

use std::error::Error;
use std::io::{self, Write};

use statelab::bell::singlet;
use statelab::cat_eraser::{build_cat_s, evolve, initial_form_of_final, map_to_singlet, CatLabel, CatPhases};

fn run(out: &mut dyn Write) -> Result<(), Box<dyn Error>> {
    let phases = CatPhases::default();
    let s = build_cat_s(phases)?;
    writeln!(
        out,
        "unitarity residual {:.1e}, hermiticity residual {:.3}",
        s.unitarity_residual(),
        s.hermiticity_residual()
    )?;
    for label in CatLabel::ALL {
        let evolved = evolve(label, phases)?;
        writeln!(out, "S|{label}> amplitudes {:?}", evolved.amps())?;
    }
    for label in CatLabel::ALL {
        let pre = initial_form_of_final(label, phases)?;
        writeln!(out, "<{label}|S as a ket {:?}", pre.amps())?;
    }
    let mapped = map_to_singlet(phases)?;
    writeln!(
        out,
        "distance to the singlet up to phase {:.1e}",
        mapped.distance_up_to_phase(&singlet())?
    )?;
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run(&mut io::stdout().lock())
}
