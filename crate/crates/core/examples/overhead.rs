//! Mean restarts and level-1 encodings per accepted level-2 preparation.

use surflab::concat::EdtMode;
use surflab::montecarlo::{overhead_curve, ExperimentConfig};

fn main() -> surflab::Result<()> {
    println!("mode  p_cnot   attempts  level-1 encodings");
    for mode in EdtMode::ALL {
        let config = ExperimentConfig {
            p_cnot: vec![0.0, 1e-3, 3e-3, 1e-2, 2e-2],
            shots: 20_000,
            edt_mode: mode,
            ..ExperimentConfig::default()
        };
        for point in overhead_curve(&config)? {
            println!("{mode:>4}  {:<7.0e}  {:>8.3}  {:>8.2}", point.p_cnot, point.mean_attempts, point.mean_l1preps);
        }
    }
    Ok(())
}
