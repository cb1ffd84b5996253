//! Exhaustive and sampled fault-set checks on the level-1 encoder and the
//! level-2 program.

use rand::rngs::mock::StepRng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{BitVec, Gf2Basis};
use crate::circuit::{CliffordCircuit, Gate};
use crate::concat::{EdtMode, FrameSimulator, Level2Program};
use crate::error::{invalid, Result};
use crate::frame::record_flips;
use crate::montecarlo::{decode_masks, Decoder};
use crate::noise::{enumerate_faults, sample_fault_combinations, FaultEvent, TwoQubitPauli};
use crate::pauli::{Pauli, PauliString};
use crate::soft::Level1Table;
use crate::surface9::{decode_mask, encoding_circuit, N};
use crate::tableau::StabilizerTableau;

/// The level-1 encoder followed by a Z measurement of all nine qubits.
pub fn measured_encoder() -> CliffordCircuit {
    let mut c = encoding_circuit();
    for q in 0..N {
        c.push(Gate::MeasureZ(q)).expect("qubit in range");
    }
    c
}

/// Every outcome mask the noiseless measured encoder can produce.
pub fn noiseless_outcomes(circuit: &CliffordCircuit) -> Result<Vec<BitVec>> {
    let mut t = StabilizerTableau::new_zero_state(circuit.num_qubits())?;
    let reference = BitVec::from_bools(&t.run(circuit, &mut StepRng::new(0, 0))?);
    let mut basis = Gf2Basis::new();
    for (i, g) in circuit.events().iter().enumerate() {
        let p = match *g {
            Gate::InitZero(q) => PauliString::single(circuit.num_qubits(), q, Pauli::Z),
            Gate::InitPlus(q) => PauliString::single(circuit.num_qubits(), q, Pauli::X),
            _ => continue,
        };
        let v = record_flips(circuit, i + 1, &p).0;
        if !v.is_zero() {
            basis.insert(v);
        }
    }
    let gauges: Vec<BitVec> = basis.vectors().cloned().collect();
    Ok((0u64..1 << gauges.len())
        .map(|sel| {
            let mut v = reference.clone();
            for (i, g) in gauges.iter().enumerate() {
                if sel >> i & 1 == 1 {
                    v.xor_assign(g);
                }
            }
            v
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Level1Report {
    pub faults_checked: usize,
    pub outcomes_per_fault: usize,
    /// Faults that hard-decode to -1 for some noiseless outcome.
    pub failures: Vec<FaultEvent>,
}

/// Injects every single CNOT fault into the level-1 encoder and hard-decodes
/// every outcome the faulty circuit can produce.
pub fn level1_single_faults() -> Result<Level1Report> {
    let circuit = measured_encoder();
    let outcomes = noiseless_outcomes(&circuit)?;
    if let Some(bad) = outcomes.iter().find(|o| decode_mask(o.bits(0, N) as u16)) {
        return Err(crate::error::Error::Internal(format!("noiseless outcome {:09b} decodes to -1", bad.bits(0, N))));
    }
    let mut failures = Vec::new();
    let mut faults_checked = 0;
    for faults in enumerate_faults(&circuit, 1)? {
        let f = faults[0];
        faults_checked += 1;
        let flips = record_flips(&circuit, f.event_index + 1, &f.pauli_string(&circuit)?).0;
        if outcomes.iter().any(|o| decode_mask((o.bits(0, N) ^ flips.bits(0, N)) as u16)) {
            failures.push(f);
        }
    }
    Ok(Level1Report { faults_checked, outcomes_per_fault: outcomes.len(), failures })
}

/// Tally of a fault-set scan over the level-2 program.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultScan {
    pub k: usize,
    pub combinations: u64,
    pub detected: u64,
    pub accepted: u64,
    pub logical_errors: u64,
    /// Lowest-ordered fault set that produced a logical error.
    #[serde(skip)]
    pub first_failure: Option<Vec<FaultEvent>>,
}

impl FaultScan {
    fn merge(mut self, o: FaultScan) -> FaultScan {
        self.combinations += o.combinations;
        self.detected += o.detected;
        self.accepted += o.accepted;
        self.logical_errors += o.logical_errors;
        self.first_failure = self.first_failure.or(o.first_failure);
        self
    }
}

/// Evaluates fault sets against a level-2 program through its frame model.
/// Measurement randomness is irrelevant here: detection, corrections and
/// both decoders depend only on the fault-induced flips.
#[derive(Clone, Debug)]
pub struct Level2Scanner {
    program: Level2Program,
    sim: FrameSimulator,
    decoder: Decoder,
    table: Level1Table,
}

impl Level2Scanner {
    pub fn new(mode: EdtMode, decoder: Decoder, p_e: f64) -> Result<Self> {
        let program = Level2Program::new(mode);
        let sim = FrameSimulator::new(&program)?;
        Ok(Self { program, sim, decoder, table: Level1Table::new(p_e)? })
    }

    pub fn program(&self) -> &Level2Program {
        &self.program
    }

    /// `Some(true)` when the set yields a logical error, `Some(false)` when
    /// it is accepted and decodes to +1, `None` when an EDT detects it.
    pub fn evaluate(&self, faults: &[FaultEvent]) -> Result<Option<bool>> {
        let mut rec = self.sim.raw_record::<StepRng>(faults, None)?;
        self.judge(&mut rec)
    }

    fn judge(&self, rec: &mut [u64]) -> Result<Option<bool>> {
        if self.sim.finish(rec).is_some() {
            return Ok(None);
        }
        Ok(Some(decode_masks(&self.sim.final_masks(rec), self.decoder, &self.table)?.verdict < 0))
    }

    fn tally(&self, faults: &[FaultEvent], rec: &mut [u64], scan: &mut FaultScan) -> Result<()> {
        scan.combinations += 1;
        match self.judge(rec)? {
            None => scan.detected += 1,
            Some(failed) => {
                scan.accepted += 1;
                if failed {
                    scan.logical_errors += 1;
                    if scan.first_failure.is_none() {
                        scan.first_failure = Some(faults.to_vec());
                    }
                }
            }
        }
        Ok(())
    }

    /// Every set of `k` faults on distinct CNOTs, for `k` of 1 or 2.
    pub fn exhaustive(&self, k: usize) -> Result<FaultScan> {
        let cnots = self.program.cnot_events();
        let paulis: Vec<TwoQubitPauli> = TwoQubitPauli::all().collect();
        let fault = |slot: usize, p: TwoQubitPauli| FaultEvent { event_index: cnots[slot], pauli: p };
        let base = self.sim.reference();
        let scan = match k {
            1 => {
                let mut scan = FaultScan { k, ..FaultScan::default() };
                for s in 0..cnots.len() {
                    for &p in &paulis {
                        let f = [fault(s, p)];
                        let mut rec = base.to_vec();
                        xor_into(&mut rec, self.sim.fault_response(&f[0])?);
                        self.tally(&f, &mut rec, &mut scan)?;
                    }
                }
                scan
            }
            2 => (0..cnots.len())
                .into_par_iter()
                .map(|a| -> Result<FaultScan> {
                    let mut scan = FaultScan { k, ..FaultScan::default() };
                    let mut first = base.to_vec();
                    let mut rec = base.to_vec();
                    for &pa in &paulis {
                        let fa = fault(a, pa);
                        first.copy_from_slice(base);
                        xor_into(&mut first, self.sim.fault_response(&fa)?);
                        for b in a + 1..cnots.len() {
                            for &pb in &paulis {
                                let fs = [fa, fault(b, pb)];
                                rec.copy_from_slice(&first);
                                xor_into(&mut rec, self.sim.fault_response(&fs[1])?);
                                self.tally(&fs, &mut rec, &mut scan)?;
                            }
                        }
                    }
                    Ok(scan)
                })
                .try_reduce(|| FaultScan { k, ..FaultScan::default() }, |x, y| Ok(x.merge(y)))?,
            _ => return invalid(format!("exhaustive scans support k = 1 or 2, got {k}")),
        };
        Ok(scan)
    }

    /// `samples` uniformly random sets of `k` faults. Sample `i` draws from
    /// stream `i` of `seed`, so the tally does not depend on thread count.
    pub fn sampled(&self, k: usize, samples: u64, seed: u64) -> Result<FaultScan> {
        let circuit = self.program.circuit();
        (0..samples)
            .into_par_iter()
            .map(|i| -> Result<FaultScan> {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i);
                let faults = sample_fault_combinations(circuit, k, 1, &mut rng)?.pop().unwrap_or_default();
                let mut rec = self.sim.raw_record::<StepRng>(&faults, None)?;
                let mut scan = FaultScan { k, ..FaultScan::default() };
                self.tally(&faults, &mut rec, &mut scan)?;
                Ok(scan)
            })
            .try_reduce(|| FaultScan { k, ..FaultScan::default() }, |x, y| Ok(x.merge(y)))
    }
}

fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encoder_outcomes_are_the_sixteen_codewords() {
        let outs = noiseless_outcomes(&measured_encoder()).unwrap();
        let mut masks: Vec<u16> = outs.iter().map(|o| o.bits(0, N) as u16).collect();
        masks.sort_unstable();
        let mut expect: Vec<u16> = crate::surface9::codeword_outcomes()
            .iter()
            .map(|m| m.iter().enumerate().fold(0u16, |a, (j, &v)| a | ((v < 0) as u16) << j))
            .collect();
        expect.sort_unstable();
        assert_eq!(masks, expect);
    }

    #[test]
    fn level1_single_faults_never_fail() {
        let r = level1_single_faults().unwrap();
        assert_eq!((r.faults_checked, r.outcomes_per_fault), (120, 16));
        assert!(r.failures.is_empty(), "{:?}", r.failures);
    }

    #[test]
    fn single_faults_never_fail_at_level_two() {
        for mode in EdtMode::ALL {
            let s = Level2Scanner::new(mode, Decoder::Hard, 0.01).unwrap();
            let scan = s.exhaustive(1).unwrap();
            assert_eq!(scan.combinations, 15 * s.program().cnot_events().len() as u64);
            assert_eq!(scan.logical_errors, 0, "{mode}: {:?}", scan.first_failure);
            assert_eq!(scan.detected + scan.accepted, scan.combinations);
        }
    }

    #[test]
    fn scanner_matches_engine_attempts() {
        let s = Level2Scanner::new(EdtMode::Edt28, Decoder::Soft, 0.01).unwrap();
        let engine = crate::concat::Level2Engine::new(EdtMode::Edt28, crate::concat::Backend::Tableau).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let table = Level1Table::new(0.01).unwrap();
        for faults in sample_fault_combinations(s.program().circuit(), 2, 40, &mut rng).unwrap() {
            let expect = match engine.attempt(&faults, &mut rng).unwrap() {
                Err(_) => None,
                Ok(rec) => Some(crate::montecarlo::decode_record(engine.program(), &rec, Decoder::Soft, &table).unwrap().verdict < 0),
            };
            assert_eq!(s.evaluate(&faults).unwrap(), expect);
        }
    }
}
