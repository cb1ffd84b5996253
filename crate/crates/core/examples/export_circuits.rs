//! Writes the level-1 circuits in both readout bases and the level-2 program
//! in the text format, then parses them back.

use surflab::analysis::{export_circuit, level1_measured, Basis};
use surflab::circuit::CliffordCircuit;
use surflab::concat::{EdtMode, Level2Program};

fn main() -> surflab::Result<()> {
    let dir = std::env::temp_dir();
    let circuits = [
        ("l1-z.txt", level1_measured(Basis::Z)),
        ("l1-x.txt", level1_measured(Basis::X)),
        ("l2-edt258.txt", Level2Program::new(EdtMode::Edt258).circuit().clone()),
    ];
    for (name, circuit) in circuits {
        let path = dir.join(name);
        export_circuit(&circuit, &path)?;
        let back = CliffordCircuit::read_from(&path)?;
        println!("{}: {} events, round trip exact: {}", path.display(), back.len(), back == circuit);
    }
    print!("\n{}", level1_measured(Basis::X).to_text());
    Ok(())
}
