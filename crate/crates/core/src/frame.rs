//! Pauli-frame propagation through Clifford circuits.
//!
//! A frame is the Pauli error carried alongside a noiseless reference run.
//! Conjugating it through the remaining gates and reading its X component at
//! each Z measurement gives the flips it causes in the measurement record.

use crate::bits::BitVec;
use crate::circuit::{CliffordCircuit, Gate};
use crate::error::{invalid, Result};
use crate::pauli::PauliString;

/// `frame <- U frame U†` for a unitary gate; non-unitary events are ignored.
pub fn conjugate(frame: &mut PauliString, gate: &Gate) {
    match *gate {
        Gate::H(q) => {
            let x = frame.x_bits().get(q);
            let z = frame.z_bits().get(q);
            if x && z {
                frame.negate();
            }
            frame.x_bits_mut().set(q, z);
            frame.z_bits_mut().set(q, x);
        }
        Gate::X(q) => {
            if frame.z_bits().get(q) {
                frame.negate();
            }
        }
        Gate::Z(q) => {
            if frame.x_bits().get(q) {
                frame.negate();
            }
        }
        Gate::Cnot { control, target } => {
            let xc = frame.x_bits().get(control);
            let zc = frame.z_bits().get(control);
            let xt = frame.x_bits().get(target);
            let zt = frame.z_bits().get(target);
            if xc && zt && (xt == zc) {
                frame.negate();
            }
            if xc {
                frame.x_bits_mut().flip(target);
            }
            if zt {
                frame.z_bits_mut().flip(control);
            }
        }
        _ => {}
    }
}

/// Conjugates `pauli` through the unitary events `start..` of `circuit`.
pub fn propagate_from(circuit: &CliffordCircuit, start: usize, pauli: &PauliString) -> PauliString {
    let mut frame = pauli.clone();
    for gate in &circuit.events()[start.min(circuit.len())..] {
        conjugate(&mut frame, gate);
    }
    frame
}

/// Propagates a fault that occurs right after the CNOT at `location` to the end
/// of the circuit. Init and measurement events are passed over untouched.
pub fn propagate_pauli(circuit: &CliffordCircuit, location: usize, fault: &PauliString) -> Result<PauliString> {
    let Some(Gate::Cnot { control, target }) = circuit.events().get(location) else {
        return invalid(format!("event {location} is not a CNOT"));
    };
    if fault.num_qubits() != circuit.num_qubits() {
        return invalid("fault and circuit sizes differ");
    }
    if fault.support().iter().any(|q| q != control && q != target) {
        return invalid(format!(
            "fault {} is not supported on CNOT({}, {})",
            fault.to_sparse_string(),
            control + 1,
            target + 1
        ));
    }
    Ok(propagate_from(circuit, location + 1, fault))
}

/// Record flips caused by a Pauli inserted before event `start`.
///
/// Measurements read the X component of the frame (bit `k` of the result is the
/// `k`-th measurement of the circuit). Measured and re-initialized qubits lose
/// their frame component. The frame left at the end of the circuit is returned
/// alongside the flips.
pub fn record_flips(circuit: &CliffordCircuit, start: usize, pauli: &PauliString) -> (BitVec, PauliString) {
    let measurements: Vec<usize> = circuit
        .events()
        .iter()
        .enumerate()
        .filter_map(|(i, g)| matches!(g, Gate::MeasureZ(_)).then_some(i))
        .collect();
    let mut flips = BitVec::zeros(measurements.len());
    let first_record = measurements.partition_point(|&i| i < start);
    let mut record = first_record;
    let mut frame = pauli.clone();
    for gate in &circuit.events()[start.min(circuit.len())..] {
        match *gate {
            Gate::MeasureZ(q) => {
                flips.set(record, frame.x_bits().get(q));
                record += 1;
                frame.x_bits_mut().set(q, false);
                frame.z_bits_mut().set(q, false);
            }
            Gate::InitZero(q) | Gate::InitPlus(q) => {
                frame.x_bits_mut().set(q, false);
                frame.z_bits_mut().set(q, false);
            }
            ref g => conjugate(&mut frame, g),
        }
    }
    (flips, frame)
}
