//! Exhaustive single and pair fault scans of the level-2 program.

use surflab::concat::EdtMode;
use surflab::faultscan::{level1_single_faults, Level2Scanner};
use surflab::montecarlo::Decoder;

fn main() -> surflab::Result<()> {
    let mode: EdtMode = std::env::args().nth(1).as_deref().unwrap_or("258").parse()?;
    let l1 = level1_single_faults()?;
    println!(
        "level 1: {} faults x {} outcomes, {} failing",
        l1.faults_checked,
        l1.outcomes_per_fault,
        l1.failures.len()
    );
    let scanner = Level2Scanner::new(mode, Decoder::Soft, 0.01)?;
    for k in [1, 2] {
        let s = scanner.exhaustive(k)?;
        println!(
            "level 2, edt {mode}, k={k}: {} sets, {} detected, {} accepted, {} logical errors",
            s.combinations, s.detected, s.accepted, s.logical_errors
        );
        if let Some(f) = s.first_failure {
            println!("  first failing set: {f:?}");
        }
    }
    let samples = 200_000;
    let s = scanner.sampled(3, samples, 7)?;
    println!(
        "level 2, edt {mode}, k=3: {samples} sampled sets, {} accepted, {} logical errors",
        s.accepted, s.logical_errors
    );
    Ok(())
}
