//! Runs the same shots through the frame and tableau backends and compares
//! what each decoded.

use surflab::concat::{Backend, EdtMode};
use surflab::montecarlo::{Decoder, Experiment, ExperimentConfig};

fn main() -> surflab::Result<()> {
    let mut args = std::env::args().skip(1);
    let mode: EdtMode = args.next().as_deref().unwrap_or("28").parse()?;
    let p: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.01);
    let shots: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1000);
    let make = |backend| {
        Experiment::new(ExperimentConfig {
            edt_mode: mode,
            decoder: Decoder::Soft,
            backend,
            ..ExperimentConfig::default()
        })
    };
    let (frame, tableau) = (make(Backend::Frame)?, make(Backend::Tableau)?);
    let (mut failures, mut mismatches) = (0, 0);
    for shot in 0..shots {
        let a = frame.run_trial(p, shot)?;
        let b = tableau.run_trial(p, shot)?;
        failures += a.failed as u64;
        if (a.failed, a.attempts, &a.syndromes) != (b.failed, b.attempts, &b.syndromes) {
            mismatches += 1;
        }
    }
    println!("edt {mode}, p_cnot {p}: {shots} shots, {failures} failures, {mismatches} mismatches");
    Ok(())
}
