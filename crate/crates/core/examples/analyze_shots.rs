//! Simulates Z- and X-basis readouts of the noisy level-1 encoder, writes them
//! as shot files and runs the analysis pipeline on the files.

use surflab::analysis::{analyze_shots, simulate_level1_shots, Basis, ShotDataset};
use surflab::noise::NoiseModel;

fn main() -> surflab::Result<()> {
    let dir = std::env::temp_dir();
    for p in [0.0, 0.01, 0.05] {
        let model = NoiseModel::new(p)?;
        let z_path = dir.join("surflab-z.csv");
        let x_path = dir.join("surflab-x.csv");
        simulate_level1_shots(&model, Basis::Z, 8192, 1)?.write_file(&z_path)?;
        simulate_level1_shots(&model, Basis::X, 8192, 2)?.write_file(&x_path)?;
        let a = analyze_shots(&ShotDataset::read_file(&z_path)?, &ShotDataset::read_file(&x_path)?)?;
        println!(
            "p_cnot {p:<5}: p_L {:.4}  p_Z {:.4}  p_X {:.4}  fidelity >= {:.4}",
            a.p_l, a.p_z, a.p_x, a.fidelity_bound
        );
    }
    Ok(())
}
