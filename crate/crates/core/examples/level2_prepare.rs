//! Builds the 81-qubit preparation for every EDT mode, checks the noiseless
//! output state, and decodes one noisy shot.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use surflab::concat::{prepare_logical_zero_l2, EdtMode, Level2Program};
use surflab::montecarlo::{Decoder, Experiment, ExperimentConfig};
use surflab::noise::NoiseModel;
use surflab::pauli::PauliString;
use surflab::tableau::canonical_form;

fn main() -> surflab::Result<()> {
    for mode in EdtMode::ALL {
        let program = Level2Program::new(mode);
        let mut faults = ChaCha8Rng::seed_from_u64(1);
        let mut meas = ChaCha8Rng::seed_from_u64(2);
        let reg = prepare_logical_zero_l2(&NoiseModel::noiseless(), mode, &mut faults, &mut meas)?;
        let live = reg.layout.wires();
        let expected: Vec<PauliString> =
            program.zero_state_generators(&reg.layout).iter().map(|g| g.restrict(&live)).collect();
        let exact = reg.tableau.reduced_stabilizers(&live)? == canonical_form(&expected)?;
        println!(
            "edt {mode:>4}: {} qubits, {} CNOTs, {} records, noiseless output is |0>_L2: {exact}",
            program.num_qubits(),
            program.cnot_events().len(),
            program.num_records()
        );
    }
    let exp = Experiment::new(ExperimentConfig { decoder: Decoder::Soft, ..ExperimentConfig::default() })?;
    let trial = exp.run_trial(0.02, 0)?;
    println!("\none shot at p_cnot = 0.02:\n{}", serde_json::to_string_pretty(&trial)?);
    Ok(())
}
