//! Level-2 encoding: the nine-qubit encoder run on encoded blocks, with
//! optional error-detecting teleportations (EDTs) and restart on detection.
//!
//! Every block carries a permutation from logical position (0..9) to physical
//! wire. An encoded Hadamard applies H to the block's wires and relabels the
//! positions by a 90 degree rotation instead of moving any qubit.
//!
//! An EDT on a block prepares two fresh blocks A and B, turns them into a
//! logical Bell pair, and Bell-measures the data block against A. The block's
//! logical state moves to B. Any nontrivial Z parity in the two measured blocks
//! counts as a detection and the whole level-2 attempt starts over.
//!
//! Two backends produce measurement records:
//! * the tableau backend runs the full stabilizer simulation and applies the
//!   teleportation corrections physically;
//! * the frame backend XORs precomputed fault responses into a noiseless
//!   reference record and applies the corrections as a linear post-map.
//!
//! The reference record is sampled once per program. Per-shot measurement
//! randomness comes from random combinations of gauge responses (a Z after
//! each |0> preparation and an X after each |+> preparation leave the state
//! unchanged but move the reference within the outcome distribution).

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{BitVec, Gf2Basis};
use crate::circuit::{CliffordCircuit, Gate};
use crate::error::{invalid, Error, Result};
use crate::frame::record_flips;
use crate::noise::{sample_faults_at, FaultEvent, NoiseModel};
use crate::pauli::{Pauli, PauliString};
use crate::surface9::{self, encoding_gates_on, syndrome_index, LOGICAL_X, LOGICAL_Z, N};
use crate::tableau::StabilizerTableau;

/// Logical position to physical wire for one block.
pub type BlockWires = [usize; N];

/// Image of positions 1..=9 under the encoded-Hadamard relabelling (1-based).
pub const HADAMARD_RENUMBERING: [usize; N] = [7, 6, 1, 2, 5, 8, 9, 4, 3];

/// Wires after the relabelling: the qubit at old position `p` becomes
/// position `map(p)`.
pub fn renumbered(wires: &BlockWires) -> BlockWires {
    let mut out = [0; N];
    for p in 0..N {
        out[HADAMARD_RENUMBERING[p] - 1] = wires[p];
    }
    out
}

fn contiguous(base: usize) -> BlockWires {
    std::array::from_fn(|p| base + p)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockLayout {
    blocks: Vec<BlockWires>,
}

impl BlockLayout {
    /// `num_blocks` blocks on wires `0..9 * num_blocks`, identity permutations.
    pub fn contiguous(num_blocks: usize) -> Self {
        Self { blocks: (0..num_blocks).map(|b| contiguous(N * b)).collect() }
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, b: usize) -> &BlockWires {
        &self.blocks[b]
    }

    pub fn set_block(&mut self, b: usize, wires: BlockWires) {
        self.blocks[b] = wires;
    }

    /// All wires in block order, then logical-position order.
    pub fn wires(&self) -> Vec<usize> {
        self.blocks.iter().flatten().copied().collect()
    }

    fn check(&self, b: usize) -> Result<()> {
        if b >= self.blocks.len() {
            return invalid(format!("block {b} out of range for {} blocks", self.blocks.len()));
        }
        Ok(())
    }
}

/// Transversal H on the block plus relabelling of its positions.
pub fn encoded_hadamard(layout: &mut BlockLayout, block: usize) -> Result<Vec<Gate>> {
    layout.check(block)?;
    let wires = layout.blocks[block];
    layout.blocks[block] = renumbered(&wires);
    Ok(wires.iter().map(|&w| Gate::H(w)).collect())
}

/// Nine CNOTs pairing the blocks position by position.
pub fn encoded_cnot(layout: &BlockLayout, control: usize, target: usize) -> Result<Vec<Gate>> {
    layout.check(control)?;
    layout.check(target)?;
    if control == target {
        return invalid(format!("encoded CNOT needs two distinct blocks, got {control} twice"));
    }
    Ok(transversal_cnot(&layout.blocks[control], &layout.blocks[target]))
}

fn transversal_cnot(control: &BlockWires, target: &BlockWires) -> Vec<Gate> {
    (0..N).map(|p| Gate::cnot(control[p], target[p])).collect()
}

/// Which level-1 blocks are teleported after encoding (blocks are 0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdtMode {
    None,
    Edt5,
    Edt28,
    Edt258,
}

impl EdtMode {
    pub const ALL: [EdtMode; 4] = [EdtMode::None, EdtMode::Edt5, EdtMode::Edt28, EdtMode::Edt258];

    /// Teleported blocks, 0-based, in execution order.
    pub fn blocks(self) -> &'static [usize] {
        match self {
            EdtMode::None => &[],
            EdtMode::Edt5 => &[4],
            EdtMode::Edt28 => &[1, 7],
            EdtMode::Edt258 => &[1, 4, 7],
        }
    }
}

impl fmt::Display for EdtMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdtMode::None => "none",
            EdtMode::Edt5 => "5",
            EdtMode::Edt28 => "28",
            EdtMode::Edt258 => "258",
        })
    }
}

impl FromStr for EdtMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.strip_prefix("edt").filter(|k| !k.is_empty()).unwrap_or(&t) {
            "none" => Ok(EdtMode::None),
            "5" => Ok(EdtMode::Edt5),
            "28" => Ok(EdtMode::Edt28),
            "258" => Ok(EdtMode::Edt258),
            _ => invalid(format!("unknown EDT mode {s:?} (expected none, 5, 28 or 258)")),
        }
    }
}

/// Where one EDT sits in the program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdtSegment {
    /// The teleported block (0-based).
    pub block: usize,
    /// Index of the segment's opening marker.
    pub start_event: usize,
    /// First record of the measured data block, in logical-position order.
    pub data_record: usize,
    /// First record of the measured ancilla block A.
    pub ancilla_record: usize,
    /// Index just past the segment's last measurement.
    pub measure_end: usize,
    /// Wires of block B, which holds the teleported state afterwards.
    pub output_wires: BlockWires,
}

/// The complete level-2 preparation circuit for one EDT mode, with final
/// Z measurement of every live wire.
///
/// Records are laid out as 18 per EDT (data block then ancilla A, each in
/// logical-position order) followed by 81 final records (block by block).
#[derive(Clone, Debug)]
pub struct Level2Program {
    mode: EdtMode,
    circuit: CliffordCircuit,
    cnots: Vec<usize>,
    edts: Vec<EdtSegment>,
    encoded_layout: BlockLayout,
    final_layout: BlockLayout,
    final_event: usize,
    final_record: usize,
    num_records: usize,
}

/// Blocks (0-based) that receive an encoded Hadamard at level 2.
pub fn level2_plus_blocks() -> Vec<usize> {
    surface9::PLUS_QUBITS.iter().map(|q| q - 1).collect()
}

impl Level2Program {
    pub fn new(mode: EdtMode) -> Self {
        let edt_blocks = mode.blocks();
        let n = N * N + 2 * N * edt_blocks.len();
        let mut c = CliffordCircuit::new(n);
        let mut layout = BlockLayout::contiguous(N);
        let push_all = |c: &mut CliffordCircuit, gates: Vec<Gate>| c.extend(gates).expect("valid gates");

        for b in 0..N {
            c.marker(format!("prep-block-{}", b + 1)).unwrap();
            push_all(&mut c, encoding_gates_on(layout.block(b)));
        }
        c.marker("encoded-hadamard").unwrap();
        for b in level2_plus_blocks() {
            let gates = encoded_hadamard(&mut layout, b).unwrap();
            push_all(&mut c, gates);
        }
        for (tag, step) in [("step1", &surface9::STEP1_CNOTS[..]), ("step2", &surface9::STEP2_CNOTS[..])] {
            c.marker(tag).unwrap();
            for &(ctl, tgt) in step {
                push_all(&mut c, encoded_cnot(&layout, ctl - 1, tgt - 1).unwrap());
            }
        }
        let encoded_layout = layout.clone();

        let mut edts = Vec::new();
        let mut records = 0;
        for (e, &block) in edt_blocks.iter().enumerate() {
            let start_event = c.len();
            c.marker(format!("EDT-block-{}", block + 1)).unwrap();
            let mut a = contiguous(N * N + 2 * N * e);
            let b = contiguous(N * N + 2 * N * e + N);
            push_all(&mut c, encoding_gates_on(&a));
            push_all(&mut c, encoding_gates_on(&b));
            c.extend(a.iter().map(|&w| Gate::H(w))).unwrap();
            a = renumbered(&a);
            push_all(&mut c, transversal_cnot(&a, &b));
            let data = *layout.block(block);
            push_all(&mut c, transversal_cnot(&data, &a));
            push_all(&mut c, encoded_hadamard(&mut layout, block).unwrap());
            let data = *layout.block(block);
            c.extend(data.iter().chain(a.iter()).map(|&w| Gate::MeasureZ(w))).unwrap();
            edts.push(EdtSegment {
                block,
                start_event,
                data_record: records,
                ancilla_record: records + N,
                measure_end: c.len(),
                output_wires: b,
            });
            records += 2 * N;
            layout.set_block(block, b);
        }

        let final_event = c.len();
        c.marker("final-measure").unwrap();
        c.extend(layout.wires().into_iter().map(Gate::MeasureZ)).unwrap();
        let cnots = c.cnot_indices();
        Self {
            mode,
            circuit: c,
            cnots,
            edts,
            encoded_layout,
            final_layout: layout,
            final_event,
            final_record: records,
            num_records: records + N * N,
        }
    }

    pub fn mode(&self) -> EdtMode {
        self.mode
    }

    pub fn circuit(&self) -> &CliffordCircuit {
        &self.circuit
    }

    pub fn num_qubits(&self) -> usize {
        self.circuit.num_qubits()
    }

    /// Event indices of all CNOTs, the only noisy locations.
    pub fn cnot_events(&self) -> &[usize] {
        &self.cnots
    }

    pub fn edts(&self) -> &[EdtSegment] {
        &self.edts
    }

    /// Layout right after the level-2 encoder, before any EDT.
    pub fn encoded_layout(&self) -> &BlockLayout {
        &self.encoded_layout
    }

    /// Layout of the live blocks at the final measurement.
    pub fn final_layout(&self) -> &BlockLayout {
        &self.final_layout
    }

    /// Index of the `final-measure` marker.
    pub fn final_event(&self) -> usize {
        self.final_event
    }

    pub fn num_records(&self) -> usize {
        self.num_records
    }

    /// Level-1 encoder invocations when `edts_run` EDTs were executed.
    pub fn level1_preps(&self, edts_run: usize) -> u64 {
        (N + 2 * edts_run) as u64
    }

    /// Outcome mask (bit p set when position p read -1) of final block `b`.
    pub fn final_block_mask(&self, record: &BitVec, b: usize) -> u16 {
        record.bits(self.final_record + N * b, N) as u16
    }

    /// Outcome masks of the data and ancilla blocks measured by EDT `e`.
    pub fn edt_masks(&self, record: &BitVec, e: usize) -> (u16, u16) {
        let s = &self.edts[e];
        (record.bits(s.data_record, N) as u16, record.bits(s.ancilla_record, N) as u16)
    }

    fn edt_detects(&self, record: &BitVec, e: usize) -> bool {
        let (d, a) = self.edt_masks(record, e);
        syndrome_index(d) != 0 || syndrome_index(a) != 0
    }

    /// Runs one attempt on the full tableau. Faults must sit on CNOT events.
    /// With `measure_final = false` the run stops at the final marker, leaving
    /// the prepared state in the returned tableau.
    pub fn run_tableau<R: Rng + ?Sized>(
        &self,
        faults: &[FaultEvent],
        rng: &mut R,
        measure_final: bool,
    ) -> Result<TableauAttempt> {
        let mut faults = faults.to_vec();
        faults.sort_unstable();
        let mut next_fault = faults.iter().peekable();
        let mut t = StabilizerTableau::new_zero_state(self.num_qubits())?;
        let mut raw = Vec::with_capacity(self.num_records);
        let mut edt = 0;
        let stop = if measure_final { self.circuit.len() } else { self.final_event };
        for (i, gate) in self.circuit.events()[..stop].iter().enumerate() {
            t.apply_event(gate, &mut || rng.gen::<bool>(), &mut raw)?;
            while let Some(f) = next_fault.next_if(|f| f.event_index == i) {
                t.apply_pauli(&f.pauli_string(&self.circuit)?);
            }
            if edt < self.edts.len() && i + 1 == self.edts[edt].measure_end {
                let record = BitVec::from_bools(&raw);
                let seg = &self.edts[edt];
                if self.edt_detects(&record, edt) {
                    return Ok(TableauAttempt { tableau: t, record, detected_at: Some(edt), edts_run: edt + 1 });
                }
                let (d, a) = self.edt_masks(&record, edt);
                if logical_parity(a) {
                    for &p in &LOGICAL_X {
                        t.x(seg.output_wires[p - 1]);
                    }
                }
                if logical_parity(d) {
                    for &p in &LOGICAL_Z {
                        t.z(seg.output_wires[p - 1]);
                    }
                }
                edt += 1;
            }
        }
        if let Some(f) = next_fault.next() {
            return invalid(format!("fault at event {} lies outside the executed circuit", f.event_index));
        }
        let mut record = BitVec::zeros(self.num_records);
        for (k, &b) in raw.iter().enumerate() {
            record.set(k, b);
        }
        Ok(TableauAttempt { tableau: t, record, detected_at: None, edts_run: self.edts.len() })
    }

    /// Stabilizer generators of |0>_L2 on the register, for the given layout of
    /// live blocks: each block's eight stabilizers, plus the nine level-1
    /// generators of |0>_L with every Z_k (X_k) replaced by block k's Z_L (X_L).
    pub fn zero_state_generators(&self, layout: &BlockLayout) -> Vec<PauliString> {
        let n = self.num_qubits();
        let code = surface9::CodeDefinition::new();
        let on_block = |p: &PauliString, wires: &BlockWires| p.embed(n, wires);
        let mut gens = Vec::new();
        for b in 0..N {
            for s in code.z_stabilizers.iter().chain(&code.x_stabilizers) {
                gens.push(on_block(s, layout.block(b)));
            }
        }
        for g in code.zero_state_generators() {
            let mut big = PauliString::identity(n);
            for k in 0..N {
                let logical = match g.get(k) {
                    Pauli::I => continue,
                    Pauli::Z => &code.logical_z,
                    Pauli::X => &code.logical_x,
                    Pauli::Y => unreachable!("CSS generators"),
                };
                big.mul_assign_right(&on_block(logical, layout.block(k)));
            }
            gens.push(big);
        }
        gens
    }
}

fn logical_parity(mask: u16) -> bool {
    (mask & surface9::LOGICAL_Z_MASK).count_ones() & 1 == 1
}

/// Result of one tableau-backend attempt.
#[derive(Clone, Debug)]
pub struct TableauAttempt {
    pub tableau: StabilizerTableau,
    /// Measurement records so far (unset records are zero).
    pub record: BitVec,
    /// EDT index whose measurement tripped a check, if any.
    pub detected_at: Option<usize>,
    pub edts_run: usize,
}

/// Precomputed linear model of the program for the frame backend.
#[derive(Clone, Debug)]
pub struct FrameSimulator {
    words: usize,
    num_records: usize,
    /// `responses[(slot * 16 + code) * words ..]`, one vector per CNOT slot and Pauli code.
    responses: Vec<u64>,
    /// CNOT slot of each event index, `u32::MAX` for other events.
    slot: Vec<u32>,
    gauges: Vec<Vec<u64>>,
    reference: Vec<u64>,
    feedforward: Vec<Feedforward>,
    edt_offsets: Vec<(usize, usize)>,
    final_record: usize,
}

#[derive(Clone, Debug)]
struct Feedforward {
    x_response: Vec<u64>,
    z_response: Vec<u64>,
}

fn bits_at(words: &[u64], start: usize) -> u16 {
    let (w, off) = (start >> 6, start & 63);
    let mut v = words[w] >> off;
    if off + N > 64 {
        v |= words[w + 1] << (64 - off);
    }
    (v & 0x1ff) as u16
}

fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

impl FrameSimulator {
    pub fn new(program: &Level2Program) -> Result<Self> {
        let c = program.circuit();
        let n = c.num_qubits();
        let num_records = program.num_records();
        let words = num_records.div_ceil(64);
        let flips = |start: usize, p: &PauliString| record_flips(c, start, p).0.words().to_vec();

        let mut slot = vec![u32::MAX; c.len()];
        let mut responses = vec![0u64; program.cnot_events().len() * 16 * words];
        for (s, &ev) in program.cnot_events().iter().enumerate() {
            slot[ev] = s as u32;
            let Gate::Cnot { control, target } = c.events()[ev] else {
                return Err(Error::Internal("CNOT list out of sync".into()));
            };
            let basis = [
                flips(ev + 1, &PauliString::single(n, control, Pauli::X)),
                flips(ev + 1, &PauliString::single(n, control, Pauli::Z)),
                flips(ev + 1, &PauliString::single(n, target, Pauli::X)),
                flips(ev + 1, &PauliString::single(n, target, Pauli::Z)),
            ];
            for code in 1..16u8 {
                let (pc, pt) = (code >> 2, code & 3);
                let dst = &mut responses[(s * 16 + code as usize) * words..][..words];
                // I=0, X=1, Y=2, Z=3 on each side.
                if pc == 1 || pc == 2 {
                    xor_into(dst, &basis[0]);
                }
                if pc == 2 || pc == 3 {
                    xor_into(dst, &basis[1]);
                }
                if pt == 1 || pt == 2 {
                    xor_into(dst, &basis[2]);
                }
                if pt == 2 || pt == 3 {
                    xor_into(dst, &basis[3]);
                }
            }
        }

        let mut gauge_basis = Gf2Basis::new();
        for (i, g) in c.events().iter().enumerate() {
            let p = match *g {
                Gate::InitZero(q) => PauliString::single(n, q, Pauli::Z),
                Gate::InitPlus(q) => PauliString::single(n, q, Pauli::X),
                _ => continue,
            };
            let v = record_flips(c, i + 1, &p).0;
            if !v.is_zero() {
                gauge_basis.insert(v);
            }
        }
        let gauges = gauge_basis.vectors().map(|v| v.words().to_vec()).collect();

        let mut fixed = rand::rngs::mock::StepRng::new(0, 0);
        let reference = Level2Program::raw_reference(program, &mut fixed)?;

        let feedforward = program
            .edts()
            .iter()
            .map(|seg| {
                let on_b = |qs: &[usize], kind| {
                    let wires: Vec<usize> = qs.iter().map(|p| seg.output_wires[p - 1]).collect();
                    PauliString::uniform(n, kind, &wires)
                };
                Feedforward {
                    x_response: flips(seg.measure_end, &on_b(&LOGICAL_X, Pauli::X)),
                    z_response: flips(seg.measure_end, &on_b(&LOGICAL_Z, Pauli::Z)),
                }
            })
            .collect();
        let edt_offsets = program.edts().iter().map(|s| (s.data_record, s.ancilla_record)).collect();
        Ok(Self {
            words,
            num_records,
            responses,
            slot,
            gauges,
            reference: reference.words().to_vec(),
            feedforward,
            edt_offsets,
            final_record: program.final_record,
        })
    }

    /// Number of independent random bits in the noiseless record distribution.
    pub fn gauge_rank(&self) -> usize {
        self.gauges.len()
    }

    /// Record flips caused by one fault.
    pub fn fault_response(&self, fault: &FaultEvent) -> Result<&[u64]> {
        let s = *self.slot.get(fault.event_index).unwrap_or(&u32::MAX);
        if s == u32::MAX {
            return invalid(format!("event {} is not a CNOT", fault.event_index));
        }
        let off = (s as usize * 16 + fault.pauli.code() as usize) * self.words;
        Ok(&self.responses[off..off + self.words])
    }

    /// Raw record words: the reference, optionally moved by a random gauge,
    /// with every fault response applied.
    pub fn raw_record<R: Rng + ?Sized>(&self, faults: &[FaultEvent], gauge_rng: Option<&mut R>) -> Result<Vec<u64>> {
        let mut rec = self.reference.clone();
        if let Some(rng) = gauge_rng {
            for g in &self.gauges {
                if rng.gen::<bool>() {
                    xor_into(&mut rec, g);
                }
            }
        }
        for f in faults {
            let resp = self.fault_response(f)?;
            xor_into(&mut rec, resp);
        }
        Ok(rec)
    }

    /// Runs detection and teleportation corrections over a raw record in EDT
    /// order. Returns the index of the first detecting EDT, if any; on
    /// acceptance `rec` holds the corrected record.
    pub fn finish(&self, rec: &mut [u64]) -> Option<usize> {
        for (e, &(d_off, a_off)) in self.edt_offsets.iter().enumerate() {
            let d = bits_at(rec, d_off);
            let a = bits_at(rec, a_off);
            if syndrome_index(d) != 0 || syndrome_index(a) != 0 {
                return Some(e);
            }
            let ff = &self.feedforward[e];
            if logical_parity(a) {
                xor_into(rec, &ff.x_response);
            }
            if logical_parity(d) {
                xor_into(rec, &ff.z_response);
            }
        }
        None
    }

    /// Noiseless record with every gauge bit at zero.
    pub fn reference(&self) -> &[u64] {
        &self.reference
    }

    /// Final outcome masks of the nine blocks, read from record words.
    pub fn final_masks(&self, rec: &[u64]) -> [u16; N] {
        std::array::from_fn(|b| bits_at(rec, self.final_record + N * b))
    }

    pub fn to_bitvec(&self, rec: &[u64]) -> BitVec {
        let mut v = BitVec::zeros(self.num_records);
        for i in 0..self.num_records {
            v.set(i, rec[i >> 6] >> (i & 63) & 1 == 1);
        }
        v
    }
}

impl Level2Program {
    /// One noiseless tableau run without teleportation corrections.
    fn raw_reference<R: Rng + ?Sized>(program: &Level2Program, rng: &mut R) -> Result<BitVec> {
        let mut t = StabilizerTableau::new_zero_state(program.num_qubits())?;
        let mut raw = Vec::with_capacity(program.num_records);
        for g in program.circuit.events() {
            t.apply_event(g, &mut || rng.gen::<bool>(), &mut raw)?;
        }
        Ok(BitVec::from_bools(&raw))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Frame,
    Tableau,
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "frame" => Ok(Backend::Frame),
            "tableau" => Ok(Backend::Tableau),
            _ => invalid(format!("unknown backend {s:?} (expected frame or tableau)")),
        }
    }
}

/// Accepted level-2 preparation with its cost counters.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodingOutcome {
    pub attempts: u64,
    pub level1_preps: u64,
    /// Corrected measurement record of the accepted attempt.
    pub record: BitVec,
    /// Faults injected in the accepted attempt.
    pub faults: Vec<FaultEvent>,
}

/// Default cap on restarts before a preparation gives up.
pub const DEFAULT_MAX_ATTEMPTS: u64 = 10_000_000;

/// A program bound to a backend, ready to sample preparations.
#[derive(Clone, Debug)]
pub struct Level2Engine {
    program: Level2Program,
    backend: Backend,
    frame: Option<FrameSimulator>,
    pub max_attempts: u64,
}

impl Level2Engine {
    pub fn new(mode: EdtMode, backend: Backend) -> Result<Self> {
        let program = Level2Program::new(mode);
        let frame = match backend {
            Backend::Frame => Some(FrameSimulator::new(&program)?),
            Backend::Tableau => None,
        };
        Ok(Self { program, backend, frame, max_attempts: DEFAULT_MAX_ATTEMPTS })
    }

    pub fn program(&self) -> &Level2Program {
        &self.program
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn frame(&self) -> Option<&FrameSimulator> {
        self.frame.as_ref()
    }

    /// One attempt with the given faults: `Ok(Err(edts_run))` on detection,
    /// `Ok(Ok(record))` with the corrected record on acceptance.
    pub fn attempt<R: Rng + ?Sized>(
        &self,
        faults: &[FaultEvent],
        meas_rng: &mut R,
    ) -> Result<std::result::Result<BitVec, usize>> {
        match &self.frame {
            Some(sim) => {
                let mut rec = sim.raw_record(faults, Some(meas_rng))?;
                Ok(match sim.finish(&mut rec) {
                    Some(e) => Err(e + 1),
                    None => Ok(sim.to_bitvec(&rec)),
                })
            }
            None => {
                let run = self.program.run_tableau(faults, meas_rng, true)?;
                Ok(match run.detected_at {
                    Some(_) => Err(run.edts_run),
                    None => Ok(run.record),
                })
            }
        }
    }

    /// Samples faults and restarts until an attempt passes every EDT.
    pub fn prepare<R1: Rng + ?Sized, R2: Rng + ?Sized>(
        &self,
        model: &NoiseModel,
        fault_rng: &mut R1,
        meas_rng: &mut R2,
    ) -> Result<EncodingOutcome> {
        let p = model.effective_p();
        let all_edts = self.program.edts().len();
        let mut level1_preps = 0;
        let mut faults = Vec::new();
        for attempt in 1..=self.max_attempts {
            faults.clear();
            sample_faults_at(self.program.cnot_events(), p, fault_rng, &mut faults);
            match self.attempt(&faults, meas_rng)? {
                Ok(record) => {
                    level1_preps += self.program.level1_preps(all_edts);
                    return Ok(EncodingOutcome { attempts: attempt, level1_preps, record, faults });
                }
                Err(edts_run) => level1_preps += self.program.level1_preps(edts_run),
            }
        }
        Err(Error::InsufficientData(format!(
            "no attempt passed the EDT checks within {} tries",
            self.max_attempts
        )))
    }
}

/// The prepared |0>_L2 register from the tableau backend, before the final
/// measurement.
#[derive(Clone, Debug)]
pub struct PreparedRegister {
    pub tableau: StabilizerTableau,
    pub layout: BlockLayout,
    pub attempts: u64,
    pub level1_preps: u64,
}

/// Prepares |0>_L2 with restarts on the tableau backend and returns the state.
pub fn prepare_logical_zero_l2<R1: Rng + ?Sized, R2: Rng + ?Sized>(
    model: &NoiseModel,
    mode: EdtMode,
    fault_rng: &mut R1,
    meas_rng: &mut R2,
) -> Result<PreparedRegister> {
    let program = Level2Program::new(mode);
    let p = model.effective_p();
    let mut level1_preps = 0;
    let mut faults = Vec::new();
    for attempts in 1..=DEFAULT_MAX_ATTEMPTS {
        faults.clear();
        sample_faults_at(program.cnot_events(), p, fault_rng, &mut faults);
        // Faults after the final marker cannot exist: only measurements follow it.
        let run = program.run_tableau(&faults, meas_rng, false)?;
        level1_preps += program.level1_preps(run.edts_run);
        if run.detected_at.is_none() {
            return Ok(PreparedRegister {
                tableau: run.tableau,
                layout: program.final_layout().clone(),
                attempts,
                level1_preps,
            });
        }
    }
    Err(Error::InsufficientData("no attempt passed the EDT checks".into()))
}
