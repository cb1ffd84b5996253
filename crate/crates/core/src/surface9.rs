//! The nine-qubit surface code: stabilizers, the measurement-free encoder,
//! syndromes, the lookup-table decoder and the fidelity bound.
//!
//! Qubits are labelled 1..=9 in the public data tables and 0..9 in memory.
//! The layout is a snake over a 3x3 grid:
//!
//! ```text
//! 1 2 3
//! 6 5 4
//! 7 8 9
//! ```
//!
//! Outcome vectors hold `+1`/`-1` entries. Internally an outcome pattern is a
//! 9-bit mask whose bit `j` is set when qubit `j + 1` read `-1`.

use std::io::Write;

use crate::circuit::{CliffordCircuit, Gate};
use crate::error::{invalid, Result};
use crate::pauli::PauliString;
use crate::tableau::{canonical_form, StabilizerTableau};
use serde::Serialize;

pub const N: usize = 9;

/// Supports of the Z stabilizers, 1-based, in syndrome order s1..s4.
pub const Z_CHECKS: [&[usize]; 4] = [&[6, 7], &[1, 2, 5, 6], &[4, 5, 8, 9], &[3, 4]];
/// Supports of the X stabilizers, 1-based.
pub const X_CHECKS: [&[usize]; 4] = [&[1, 2], &[2, 3, 4, 5], &[5, 6, 7, 8], &[8, 9]];
pub const LOGICAL_Z: [usize; 3] = [1, 2, 3];
pub const LOGICAL_X: [usize; 3] = [1, 6, 7];

/// Qubits prepared in |+>; all others start in |0>.
pub const PLUS_QUBITS: [usize; 4] = [1, 4, 6, 8];
/// (control, target) pairs of the first layer. They act on disjoint targets
/// and commute with each other.
pub const STEP1_CNOTS: [(usize, usize); 6] = [(1, 2), (4, 3), (4, 5), (6, 5), (6, 7), (8, 9)];
/// The two CNOTs applied after step 1.
pub const STEP2_CNOTS: [(usize, usize); 2] = [(3, 2), (7, 8)];

/// The lookup table: syndrome (s1, s2, s3, s4) to the X correction support.
pub const LOOKUP_TABLE: [([i8; 4], &[usize]); 16] = [
    ([1, 1, 1, 1], &[]),
    ([-1, 1, 1, 1], &[7]),
    ([1, -1, 1, 1], &[2]),
    ([1, 1, -1, 1], &[8]),
    ([1, 1, 1, -1], &[3]),
    ([-1, -1, 1, 1], &[6]),
    ([-1, 1, -1, 1], &[7, 8]),
    ([-1, 1, 1, -1], &[3, 7]),
    ([1, -1, -1, 1], &[5]),
    ([1, -1, 1, -1], &[2, 3]),
    ([1, 1, -1, -1], &[4]),
    ([-1, -1, -1, 1], &[5, 7]),
    ([-1, -1, 1, -1], &[3, 6]),
    ([-1, 1, -1, -1], &[4, 7]),
    ([1, -1, -1, -1], &[3, 5]),
    ([-1, -1, -1, -1], &[4, 6]),
];

const fn mask_of(qubits: &[usize]) -> u16 {
    let mut m = 0u16;
    let mut i = 0;
    while i < qubits.len() {
        m |= 1 << (qubits[i] - 1);
        i += 1;
    }
    m
}

const Z_CHECK_MASKS: [u16; 4] = [
    mask_of(Z_CHECKS[0]),
    mask_of(Z_CHECKS[1]),
    mask_of(Z_CHECKS[2]),
    mask_of(Z_CHECKS[3]),
];
const X_CHECK_MASKS: [u16; 4] = [
    mask_of(X_CHECKS[0]),
    mask_of(X_CHECKS[1]),
    mask_of(X_CHECKS[2]),
    mask_of(X_CHECKS[3]),
];
pub const LOGICAL_Z_MASK: u16 = mask_of(&LOGICAL_Z);

const fn syndrome_bits(v: [i8; 4]) -> usize {
    let mut idx = 0;
    let mut i = 0;
    while i < 4 {
        if v[i] < 0 {
            idx |= 1 << i;
        }
        i += 1;
    }
    idx
}

/// Correction masks indexed by syndrome bits (bit i set when s_{i+1} = -1).
const CORRECTIONS: [u16; 16] = {
    let mut out = [0u16; 16];
    let mut r = 0;
    while r < 16 {
        out[syndrome_bits(LOOKUP_TABLE[r].0)] = mask_of(LOOKUP_TABLE[r].1);
        r += 1;
    }
    out
};

/// Stabilizer generators at the end of step 1, derived gate by gate from the
/// initial product state.
pub const STEP1_GENERATORS: [&str; N] = [
    "+XXIIIIIII",
    "+ZZIIIIIII",
    "+IIXXXIIII",
    "+IIZZIIIII",
    "+IIIZZZIII",
    "+IIIIXXXII",
    "+IIIIIZZII",
    "+IIIIIIIXX",
    "+IIIIIIIZZ",
];

/// Packs outcomes into a mask with bit j set when m_{j+1} = -1.
pub fn outcome_mask(m: &[i8; N]) -> u16 {
    m.iter().enumerate().fold(0, |acc, (j, &v)| if v < 0 { acc | 1 << j } else { acc })
}

/// Inverse of [`outcome_mask`].
pub fn mask_outcomes(mask: u16) -> [i8; N] {
    std::array::from_fn(|j| if mask >> j & 1 == 1 { -1 } else { 1 })
}

fn parity(mask: u16) -> bool {
    mask.count_ones() & 1 == 1
}

/// Syndrome bits of an outcome (or X-error) mask.
pub fn syndrome_index(mask: u16) -> usize {
    Z_CHECK_MASKS
        .iter()
        .enumerate()
        .fold(0, |acc, (i, &c)| if parity(mask & c) { acc | 1 << i } else { acc })
}

/// Correction mask chosen by the lookup table for a syndrome index.
pub fn correction_mask(syndrome: usize) -> u16 {
    CORRECTIONS[syndrome & 15]
}

/// Hard-decoded logical Z of an outcome mask; `true` means `-1`.
pub fn decode_mask(mask: u16) -> bool {
    parity((mask ^ correction_mask(syndrome_index(mask))) & LOGICAL_Z_MASK)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeDefinition {
    pub z_stabilizers: Vec<PauliString>,
    pub x_stabilizers: Vec<PauliString>,
    pub logical_z: PauliString,
    pub logical_x: PauliString,
}

fn zero_based(qubits: &[usize]) -> Vec<usize> {
    qubits.iter().map(|q| q - 1).collect()
}

impl CodeDefinition {
    pub fn new() -> Self {
        Self {
            z_stabilizers: Z_CHECKS.iter().map(|s| PauliString::z_on(N, &zero_based(s))).collect(),
            x_stabilizers: X_CHECKS.iter().map(|s| PauliString::x_on(N, &zero_based(s))).collect(),
            logical_z: PauliString::z_on(N, &zero_based(&LOGICAL_Z)),
            logical_x: PauliString::x_on(N, &zero_based(&LOGICAL_X)),
        }
    }

    /// Generators of |0>_L: the eight stabilizers and Z_L.
    pub fn zero_state_generators(&self) -> Vec<PauliString> {
        let mut g = self.z_stabilizers.clone();
        g.extend(self.x_stabilizers.iter().cloned());
        g.push(self.logical_z.clone());
        g
    }

    /// Generators of |+>_L: the eight stabilizers and X_L.
    pub fn plus_state_generators(&self) -> Vec<PauliString> {
        let mut g = self.z_stabilizers.clone();
        g.extend(self.x_stabilizers.iter().cloned());
        g.push(self.logical_x.clone());
        g
    }

    /// Minimum weight over all stabilizer-equivalent representatives of a logical.
    pub fn min_logical_weight(&self, logical: &PauliString) -> usize {
        let stabs: Vec<&PauliString> = if logical.z_bits().is_zero() {
            self.x_stabilizers.iter().collect()
        } else {
            self.z_stabilizers.iter().collect()
        };
        (0u32..1 << stabs.len())
            .map(|sel| {
                let mut rep = logical.clone();
                for (i, s) in stabs.iter().enumerate() {
                    if sel >> i & 1 == 1 {
                        rep.mul_assign_right(s);
                    }
                }
                rep.weight()
            })
            .min()
            .unwrap_or(0)
    }

    pub fn distance(&self) -> usize {
        self.min_logical_weight(&self.logical_z).min(self.min_logical_weight(&self.logical_x))
    }
}

impl Default for CodeDefinition {
    fn default() -> Self {
        Self::new()
    }
}

/// The measurement-free |0>_L encoder. Markers `step1` and `step2` open the
/// two CNOT layers.
pub fn encoding_circuit() -> CliffordCircuit {
    let mut c = CliffordCircuit::new(N);
    for q in 1..=N {
        let gate = if PLUS_QUBITS.contains(&q) { Gate::InitPlus(q - 1) } else { Gate::InitZero(q - 1) };
        c.push(gate).expect("valid qubit");
    }
    c.marker("step1").expect("valid marker");
    for &(ctl, tgt) in &STEP1_CNOTS {
        c.push(Gate::cnot(ctl - 1, tgt - 1)).expect("valid cnot");
    }
    c.marker("step2").expect("valid marker");
    for &(ctl, tgt) in &STEP2_CNOTS {
        c.push(Gate::cnot(ctl - 1, tgt - 1)).expect("valid cnot");
    }
    c
}

/// Encoder gates with qubit `j` relabelled to `wires[j]`, markers dropped.
pub fn encoding_gates_on(wires: &[usize; N]) -> Vec<Gate> {
    encoding_circuit()
        .events()
        .iter()
        .filter_map(|g| match *g {
            Gate::InitZero(q) => Some(Gate::InitZero(wires[q])),
            Gate::InitPlus(q) => Some(Gate::InitPlus(wires[q])),
            Gate::Cnot { control, target } => Some(Gate::cnot(wires[control], wires[target])),
            _ => None,
        })
        .collect()
}

/// Stabilizer evolution of the noiseless encoder against the expected groups.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EncodeCheck {
    pub step1_cnots: usize,
    pub step2_cnots: usize,
    /// Canonical generators after step 1 and after step 2.
    pub step1: Vec<String>,
    pub step2: Vec<String>,
    /// Weights of the [`STEP1_GENERATORS`] set that the step-1 group is
    /// compared against.
    pub step1_weights: Vec<usize>,
    pub step1_matches: bool,
    pub step2_matches: bool,
}

impl EncodeCheck {
    pub fn passed(&self) -> bool {
        self.step1_matches && self.step2_matches && self.step1_cnots == 6 && self.step2_cnots == 2
    }
}

/// Runs the encoder on |0...0> and compares the canonical stabilizers after
/// each step with [`STEP1_GENERATORS`] and the |0>_L group.
pub fn encode_check() -> Result<EncodeCheck> {
    let c = encoding_circuit();
    let boundary = c
        .marker_index("step2")
        .ok_or_else(|| crate::error::Error::Internal("encoder lacks a step2 marker".into()))?;
    let mut rng = rand::rngs::mock::StepRng::new(0, 0);
    let mut t = StabilizerTableau::new_zero_state(N)?;
    t.run(&c.prefix(boundary), &mut rng)?;
    let step1 = t.canonical_stabilizers();
    let mut t = StabilizerTableau::new_zero_state(N)?;
    t.run(&c, &mut rng)?;
    let step2 = t.canonical_stabilizers();
    let expect1 = STEP1_GENERATORS.iter().map(|g| g.parse()).collect::<Result<Vec<PauliString>>>()?;
    let expect2 = CodeDefinition::new().zero_state_generators();
    let cnots = c.cnot_indices();
    let show = |v: &[PauliString]| v.iter().map(|p| p.to_dense_string()).collect();
    Ok(EncodeCheck {
        step1_cnots: cnots.iter().filter(|&&i| i < boundary).count(),
        step2_cnots: cnots.iter().filter(|&&i| i > boundary).count(),
        step1_weights: expect1.iter().map(PauliString::weight).collect(),
        step1_matches: step1 == canonical_form(&expect1)?,
        step2_matches: step2 == canonical_form(&expect2)?,
        step1: show(&step1),
        step2: show(&step2),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ZSyndrome {
    pub s1: i8,
    pub s2: i8,
    pub s3: i8,
    pub s4: i8,
}

impl ZSyndrome {
    pub fn from_values(v: [i8; 4]) -> Result<Self> {
        if v.iter().any(|&s| s != 1 && s != -1) {
            return invalid(format!("syndrome entries must be +1 or -1, got {v:?}"));
        }
        Ok(Self::from_index(syndrome_bits(v)))
    }

    /// Bit `i` of the index is set when `s_{i+1} = -1`.
    pub fn from_index(idx: usize) -> Self {
        let s = |i: usize| if idx >> i & 1 == 1 { -1 } else { 1 };
        Self { s1: s(0), s2: s(1), s3: s(2), s4: s(3) }
    }

    pub fn index(&self) -> usize {
        syndrome_bits(self.values())
    }

    pub fn values(&self) -> [i8; 4] {
        [self.s1, self.s2, self.s3, self.s4]
    }

    pub fn is_trivial(&self) -> bool {
        self.index() == 0
    }

    pub fn all() -> impl Iterator<Item = ZSyndrome> {
        (0..16).map(Self::from_index)
    }
}

/// s1 = m6 m7, s2 = m1 m2 m5 m6, s3 = m4 m5 m8 m9, s4 = m3 m4.
///
/// Entries below zero read as `-1`; everything else reads as `+1`.
pub fn z_syndrome(m: &[i8; N]) -> ZSyndrome {
    ZSyndrome::from_index(syndrome_index(outcome_mask(m)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HardDecodeResult {
    pub correction: PauliString,
    pub logical_value: i8,
}

fn x_error(mask: u16) -> PauliString {
    PauliString::x_on(N, &(0..N).filter(|j| mask >> j & 1 == 1).collect::<Vec<_>>())
}

/// The lookup-table correction for a syndrome.
pub fn table_correction(s: ZSyndrome) -> PauliString {
    x_error(correction_mask(s.index()))
}

/// Looks up the correction for the outcome's syndrome and returns the
/// corrected value of m1 m2 m3.
pub fn hard_decode(m: &[i8; N]) -> HardDecodeResult {
    let mask = outcome_mask(m);
    let correction = correction_mask(syndrome_index(mask));
    HardDecodeResult {
        correction: x_error(correction),
        logical_value: if parity((mask ^ correction) & LOGICAL_Z_MASK) { -1 } else { 1 },
    }
}

/// Minimum-weight X error with syndrome `s`, found by trying all 512 patterns.
/// Ties go to the smallest pattern value (bit `j` is qubit `j + 1`).
pub fn brute_force_decode(s: ZSyndrome) -> PauliString {
    let target = s.index();
    let best = (0u16..1 << N)
        .filter(|&p| syndrome_index(p) == target)
        .min_by_key(|&p| (p.count_ones(), p))
        .expect("every syndrome is reachable");
    x_error(best)
}

/// Parities of X-basis outcomes over the four X-stabilizer supports.
pub fn x_syndrome(mx: &[i8; N]) -> [i8; 4] {
    let mask = outcome_mask(mx);
    X_CHECK_MASKS.map(|c| if parity(mask & c) { -1 } else { 1 })
}

/// `p_z + p_x - 1`, unclamped.
pub fn fidelity_lower_bound(p_z: f64, p_x: f64) -> Result<f64> {
    for (name, p) in [("p_z", p_z), ("p_x", p_x)] {
        if !(0.0..=1.0).contains(&p) {
            return invalid(format!("{name} = {p} is outside [0, 1]"));
        }
    }
    Ok(p_z + p_x - 1.0)
}

/// Writes the lookup table as CSV with columns `s1,s2,s3,s4,correction`.
/// Corrections use sparse labels such as `X2 X3`; the empty correction is `I`.
pub fn write_table_csv<W: Write>(out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["s1", "s2", "s3", "s4", "correction"])?;
    for (s, support) in LOOKUP_TABLE {
        let label = if support.is_empty() {
            "I".to_string()
        } else {
            support.iter().map(|q| format!("X{q}")).collect::<Vec<_>>().join(" ")
        };
        let mut row: Vec<String> = s.iter().map(|v| format!("{v:+}")).collect();
        row.push(label);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Every outcome pattern of a noiseless |0>_L Z-basis measurement, as ±1 vectors.
pub fn codeword_outcomes() -> Vec<[i8; N]> {
    (0u16..1 << N)
        .filter(|&p| syndrome_index(p) == 0 && !parity(p & LOGICAL_Z_MASK))
        .map(|p| std::array::from_fn(|j| if p >> j & 1 == 1 { -1 } else { 1 }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableau::{canonical_form, StabilizerTableau};

    fn flipped(qubits: &[usize]) -> [i8; N] {
        let mut m = [1i8; N];
        for q in qubits {
            m[q - 1] = -1;
        }
        m
    }

    #[test]
    fn code_definition_is_consistent() {
        let code = CodeDefinition::new();
        let all: Vec<_> = code.z_stabilizers.iter().chain(&code.x_stabilizers).collect();
        for a in &all {
            for b in &all {
                assert!(a.commutes_with(b));
            }
            assert!(a.commutes_with(&code.logical_z));
            assert!(a.commutes_with(&code.logical_x));
        }
        assert!(code.logical_z.anticommutes_with(&code.logical_x));
        assert_eq!(code.distance(), 3);
    }

    #[test]
    fn encoder_shape() {
        let c = encoding_circuit();
        let inits = c.events().iter().filter(|g| matches!(g, Gate::InitZero(_) | Gate::InitPlus(_))).count();
        assert_eq!(inits, 9);
        let step2 = c.marker_index("step2").unwrap();
        let cnots = c.cnot_indices();
        assert_eq!(cnots.len(), 8);
        assert_eq!(cnots.iter().filter(|&&i| i < step2).count(), 6);
        assert_eq!(c.step_label(cnots[0]), Some("step1"));
        assert_eq!(c.step_label(cnots[7]), Some("step2"));
    }

    #[test]
    fn encode_check_passes() {
        let c = encode_check().unwrap();
        assert!(c.passed(), "{c:?}");
        assert!(c.step1_weights.iter().all(|w| (2..=3).contains(w)));
    }

    #[test]
    fn encoder_reaches_zero_state() {
        let mut t = StabilizerTableau::new_zero_state(N).unwrap();
        let mut rng = rand::rngs::mock::StepRng::new(0, 1);
        t.run(&encoding_circuit(), &mut rng).unwrap();
        let expected = canonical_form(&CodeDefinition::new().zero_state_generators()).unwrap();
        assert_eq!(t.canonical_stabilizers(), expected);
    }

    #[test]
    fn syndrome_examples() {
        assert!(z_syndrome(&[1; N]).is_trivial());
        assert_eq!(z_syndrome(&flipped(&[7])).values(), [-1, 1, 1, 1]);
        assert_eq!(z_syndrome(&flipped(&[2, 3])).values(), [1, -1, 1, -1]);
        assert_eq!(z_syndrome(&flipped(&[7, 8])).values(), [-1, 1, -1, 1]);
    }

    #[test]
    fn table_rows_are_consistent() {
        let mut seen = [false; 16];
        for (s, support) in LOOKUP_TABLE {
            let s = ZSyndrome::from_values(s).unwrap();
            assert!(!seen[s.index()]);
            seen[s.index()] = true;
            assert_eq!(syndrome_index(mask_of(support)), s.index());
            assert!(support.len() <= 2);
        }
        let last = hard_decode(&flipped(&[4, 6]));
        assert_eq!(last.correction.to_sparse_string(), "+X4 X6");
    }

    fn x_stabilizer_span() -> Vec<u16> {
        (0..16u32)
            .map(|sel| (0..4).filter(|i| sel >> i & 1 == 1).fold(0, |acc, i| acc ^ X_CHECK_MASKS[i]))
            .collect()
    }

    #[test]
    fn table_matches_brute_force_weights() {
        for s in ZSyndrome::all() {
            let table = table_correction(s);
            let oracle = brute_force_decode(s);
            assert_eq!(table.weight(), oracle.weight(), "{s:?}");
            let diff = (&table * &oracle).x_bits().words()[0] as u16;
            assert!(x_stabilizer_span().contains(&diff), "{s:?}");
        }
        assert_eq!(brute_force_decode(ZSyndrome::from_index(1)).to_sparse_string(), "+X7");
    }

    #[test]
    fn codewords_decode_cleanly() {
        let words = codeword_outcomes();
        assert_eq!(words.len(), 16);
        for m in &words {
            let r = hard_decode(m);
            assert!(r.correction.is_identity());
            assert_eq!(r.logical_value, 1);
            for j in 0..N {
                let mut e = *m;
                e[j] = -e[j];
                assert_eq!(hard_decode(&e).logical_value, 1);
            }
        }
    }

    #[test]
    fn x_syndrome_sees_z_errors() {
        assert_eq!(x_syndrome(&[1; N]), [1; 4]);
        assert_eq!(x_syndrome(&flipped(&[2])), [-1, -1, 1, 1]);
    }

    #[test]
    fn fidelity_bound_values() {
        assert_eq!(fidelity_lower_bound(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(fidelity_lower_bound(0.5, 0.5).unwrap(), 0.0);
        assert!((fidelity_lower_bound(0.85, 0.68).unwrap() - 0.53).abs() < 1e-12);
        assert!(fidelity_lower_bound(0.1, 0.2).unwrap() < 0.0);
        assert!(fidelity_lower_bound(1.1, 0.5).is_err());
        assert!(fidelity_lower_bound(0.5, -0.1).is_err());
    }

    #[test]
    fn table_csv_has_sixteen_rows() {
        let mut buf = Vec::new();
        write_table_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 17);
        assert_eq!(lines[0], "s1,s2,s3,s4,correction");
        assert_eq!(lines[16], "-1,-1,-1,-1,X4 X6");
    }
}
