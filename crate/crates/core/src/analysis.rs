//! Hardware-facing artifacts: measured level-1 circuits, shot files and
//! their analysis into logical error rate and fidelity bound.
//!
//! A shot file is one JSON metadata line followed by CSV with header
//! `m1,...,m9`; entry `1` means the qubit read -1.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{CliffordCircuit, Gate};
use crate::error::{invalid, Error, Result};
use crate::noise::{sample_faults_at, NoiseModel};
use crate::surface9::{
    decode_mask, encoding_circuit, fidelity_lower_bound, mask_outcomes, syndrome_index, x_syndrome, LOGICAL_Z_MASK, N,
};
use crate::tableau::StabilizerTableau;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

impl FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "Z" => Ok(Basis::Z),
            "X" => Ok(Basis::X),
            _ => invalid(format!("unknown basis {s:?} (expected z or x)")),
        }
    }
}

/// The level-1 encoder followed by a measurement of all nine qubits in
/// `basis`. X-basis readout is H then MEASZ.
pub fn level1_measured(basis: Basis) -> CliffordCircuit {
    let mut c = encoding_circuit();
    c.marker("measure").expect("marker");
    for q in 0..N {
        if basis == Basis::X {
            c.push(Gate::H(q)).expect("qubit in range");
        }
        c.push(Gate::MeasureZ(q)).expect("qubit in range");
    }
    c
}

/// Writes a circuit in the line-oriented text format.
pub fn export_circuit(circuit: &CliffordCircuit, path: impl AsRef<Path>) -> Result<()> {
    circuit.write_to(path)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ShotMetadata {
    pub delay_ns: Option<f64>,
    pub device: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Header {
    basis: Basis,
    #[serde(flatten)]
    metadata: ShotMetadata,
}

/// Nine-qubit readouts in one basis. Row bit j is set when qubit j+1 read -1.
#[derive(Clone, Debug, PartialEq)]
pub struct ShotDataset {
    pub basis: Basis,
    pub metadata: ShotMetadata,
    pub rows: Vec<u16>,
}

impl ShotDataset {
    pub fn new(basis: Basis, rows: Vec<u16>) -> Result<Self> {
        if let Some(r) = rows.iter().find(|&&r| r >> N != 0) {
            return invalid(format!("row {r:#x} has bits beyond nine qubits"));
        }
        Ok(Self { basis, metadata: ShotMetadata::default(), rows })
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let header = Header { basis: self.basis, metadata: self.metadata.clone() };
        writeln!(out, "{}", serde_json::to_string(&header)?)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record((1..=N).map(|j| format!("m{j}")))?;
        for &r in &self.rows {
            w.write_record((0..N).map(|j| if r >> j & 1 == 1 { "1" } else { "0" }))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read<R: Read>(input: R) -> Result<Self> {
        let mut input = BufReader::new(input);
        let mut first = String::new();
        input.read_line(&mut first)?;
        let header: Header = serde_json::from_str(first.trim())?;
        let mut r = csv::Reader::from_reader(input);
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let line = i + 3;
            if rec.len() != N {
                return Err(Error::Parse { line, message: format!("expected {N} entries, got {}", rec.len()) });
            }
            let mut mask = 0u16;
            for (j, v) in rec.iter().enumerate() {
                match v.trim() {
                    "0" => {}
                    "1" => mask |= 1 << j,
                    other => return Err(Error::Parse { line, message: format!("entry {other:?} is not 0 or 1") }),
                }
            }
            rows.push(mask);
        }
        Ok(Self { basis: header.basis, metadata: header.metadata, rows })
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::read(std::fs::File::open(path)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotAnalysis {
    pub z_shots: usize,
    pub x_shots: usize,
    /// Fraction of Z rows whose hard-decoded logical value is -1.
    pub p_l: f64,
    /// Fraction of Z rows with every Z check and the logical Z at +1.
    pub p_z: f64,
    /// Fraction of X rows with every X check at +1.
    pub p_x: f64,
    pub fidelity_bound: f64,
}

pub fn analyze_shots(z_data: &ShotDataset, x_data: &ShotDataset) -> Result<ShotAnalysis> {
    if z_data.basis != Basis::Z || x_data.basis != Basis::X {
        return invalid("expected a Z-basis dataset and an X-basis dataset");
    }
    if z_data.rows.is_empty() || x_data.rows.is_empty() {
        return Err(Error::InsufficientData("both datasets need at least one row".into()));
    }
    let nz = z_data.rows.len() as f64;
    let nx = x_data.rows.len() as f64;
    let p_l = z_data.rows.iter().filter(|&&m| decode_mask(m)).count() as f64 / nz;
    let p_z = z_data
        .rows
        .iter()
        .filter(|&&m| syndrome_index(m) == 0 && (m & LOGICAL_Z_MASK).count_ones().is_multiple_of(2))
        .count() as f64
        / nz;
    let p_x = x_data.rows.iter().filter(|&&m| x_syndrome(&mask_outcomes(m)) == [1; 4]).count() as f64 / nx;
    Ok(ShotAnalysis {
        z_shots: z_data.rows.len(),
        x_shots: x_data.rows.len(),
        p_l,
        p_z,
        p_x,
        fidelity_bound: fidelity_lower_bound(p_z, p_x)?,
    })
}

/// Simulated readouts of the noisy level-1 encoder. Shot `i` uses stream `i`
/// of `seed`.
pub fn simulate_level1_shots(model: &NoiseModel, basis: Basis, shots: usize, seed: u64) -> Result<ShotDataset> {
    let circuit = level1_measured(basis);
    let cnots = circuit.cnot_indices();
    let mut rows = Vec::with_capacity(shots);
    let mut faults = Vec::new();
    for i in 0..shots {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        faults.clear();
        sample_faults_at(&cnots, model.effective_p(), &mut rng, &mut faults);
        let mut t = StabilizerTableau::new_zero_state(N)?;
        let mut rec = Vec::with_capacity(N);
        let mut next = faults.iter().peekable();
        for (ev, g) in circuit.events().iter().enumerate() {
            t.apply_event(g, &mut || rng.gen::<bool>(), &mut rec)?;
            while let Some(f) = next.next_if(|f| f.event_index == ev) {
                t.apply_pauli(&f.pauli_string(&circuit)?);
            }
        }
        rows.push(rec.iter().enumerate().fold(0u16, |m, (j, &b)| m | (b as u16) << j));
    }
    ShotDataset::new(basis, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface9::codeword_outcomes;
    use crate::surface9::outcome_mask;

    #[test]
    fn noiseless_datasets_give_unit_bound() {
        let m = NoiseModel::noiseless();
        let z = simulate_level1_shots(&m, Basis::Z, 200, 1).unwrap();
        let x = simulate_level1_shots(&m, Basis::X, 200, 1).unwrap();
        let a = analyze_shots(&z, &x).unwrap();
        assert_eq!((a.p_l, a.p_z, a.p_x, a.fidelity_bound), (0.0, 1.0, 1.0, 1.0));
        assert!(z.rows.iter().any(|&r| r != 0), "Z readouts should vary over codewords");
    }

    #[test]
    fn reference_bound() {
        let rows = |n_good: usize, good: u16, bad: u16| {
            let mut v = vec![good; n_good];
            v.resize(100, bad);
            v
        };
        let z = ShotDataset::new(Basis::Z, rows(85, 0, 1 << 6)).unwrap();
        let x = ShotDataset::new(Basis::X, rows(68, 0, 1)).unwrap();
        let a = analyze_shots(&z, &x).unwrap();
        assert_eq!((a.p_z, a.p_x), (0.85, 0.68));
        assert!((a.fidelity_bound - 0.53).abs() < 1e-12);
    }

    #[test]
    fn single_flips_are_corrected_but_counted() {
        let rows: Vec<u16> = codeword_outcomes()
            .iter()
            .flat_map(|c| (0..N).map(move |j| outcome_mask(c) ^ 1 << j))
            .collect();
        let z = ShotDataset::new(Basis::Z, rows).unwrap();
        let x = ShotDataset::new(Basis::X, vec![0]).unwrap();
        let a = analyze_shots(&z, &x).unwrap();
        assert_eq!(a.p_l, 0.0);
        assert!(a.p_z < 1.0);
    }

    #[test]
    fn errors() {
        let z = ShotDataset::new(Basis::Z, vec![]).unwrap();
        let x = ShotDataset::new(Basis::X, vec![0]).unwrap();
        assert!(matches!(analyze_shots(&z, &x), Err(Error::InsufficientData(_))));
        assert!(analyze_shots(&x, &z).is_err());
        assert!(ShotDataset::new(Basis::Z, vec![1 << 9]).is_err());
        assert!(ShotDataset::read("{\"basis\":\"Z\"}\nm1,m2\n0,1\n".as_bytes()).is_err());
        assert!(ShotDataset::read("{\"basis\":\"Z\"}\nm1,m2,m3,m4,m5,m6,m7,m8,m9\n0,0,0,0,0,0,0,0,2\n".as_bytes()).is_err());
    }

    #[test]
    fn file_round_trip() {
        let mut d = simulate_level1_shots(&NoiseModel::new(0.05).unwrap(), Basis::X, 50, 3).unwrap();
        d.metadata = ShotMetadata { delay_ns: Some(2147.6), device: Some("chain-9".into()) };
        let mut buf = Vec::new();
        d.write(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("{\"basis\":\"X\",\"delay_ns\":2147.6,\"device\":\"chain-9\"}\nm1,m2,m3,m4,m5,m6,m7,m8,m9\n"));
        assert_eq!(ShotDataset::read(&buf[..]).unwrap(), d);
    }

    #[test]
    fn measured_circuit_shapes() {
        let z = level1_measured(Basis::Z).to_text();
        let x = level1_measured(Basis::X).to_text();
        assert_eq!(z.lines().filter(|l| l.starts_with("MEASZ")).count(), 9);
        assert_eq!(x.lines().filter(|l| l.starts_with("H ")).count(), 9);
        let dir = std::env::temp_dir().join(format!("surflab-export-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("l1.txt");
        export_circuit(&encoding_circuit(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("INIT")).count(), 9);
        assert_eq!(text.lines().filter(|l| l.starts_with("CNOT")).count(), 8);
        assert_eq!(text.lines().filter(|l| l.starts_with("# marker:")).count(), 2);
        assert_eq!(CliffordCircuit::read_from(&path).unwrap(), encoding_circuit());
        export_circuit(&CliffordCircuit::new(0), &path).unwrap();
        assert!(CliffordCircuit::read_from(&path).unwrap().is_empty());
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn simulated_rate_matches_own_decoding() {
        let m = NoiseModel::new(0.05).unwrap();
        let z = simulate_level1_shots(&m, Basis::Z, 4000, 9).unwrap();
        let x = simulate_level1_shots(&m, Basis::X, 10, 9).unwrap();
        let a = analyze_shots(&z, &x).unwrap();
        let direct = z.rows.iter().filter(|&&r| decode_mask(r)).count() as f64 / 4000.0;
        assert_eq!(a.p_l, direct);
        assert!(a.p_z < 1.0 && a.p_l < 1.0 - a.p_z);
    }
}
