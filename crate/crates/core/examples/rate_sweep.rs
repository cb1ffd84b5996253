//! Logical error rate of the level-2 preparation over a few noise strengths.

use surflab::concat::EdtMode;
use surflab::montecarlo::{fit_exponent, write_rate_csv, Decoder, Experiment, ExperimentConfig};

fn main() -> surflab::Result<()> {
    let mut args = std::env::args().skip(1);
    let mode: EdtMode = args.next().as_deref().unwrap_or("none").parse()?;
    let shots: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let p_cnot = match args.next() {
        Some(list) => list
            .split(',')
            .map(|p| p.parse().map_err(|_| surflab::Error::InvalidArgument(format!("bad p_cnot {p:?}"))))
            .collect::<surflab::Result<Vec<f64>>>()?,
        None => vec![3e-3, 1e-2, 3e-2],
    };
    let config = ExperimentConfig {
        p_cnot,
        shots,
        edt_mode: mode,
        decoder: Decoder::Soft,
        ..ExperimentConfig::default()
    };
    let exp = Experiment::new(config)?;
    let points = exp.sweep()?;
    write_rate_csv(&points, std::io::stdout())?;
    match fit_exponent(&points) {
        Ok(fit) => eprintln!("exponent {:.3} (prefactor {:.3e})", fit.exponent, fit.prefactor),
        Err(e) => eprintln!("no fit: {e}"),
    }
    Ok(())
}
