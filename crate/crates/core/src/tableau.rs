//! Stabilizer-state simulation with destabilizer bookkeeping.
//!
//! Rows `0..n` hold destabilizers, rows `n..2n` the stabilizer generators and
//! row `2n` is scratch space for deterministic measurements. Each row is a
//! word-packed `(x | z)` pair plus a sign bit. Destabilizer signs are not
//! meaningful and are never read.

use rand::Rng;

use crate::bits::{BitVec, Gf2Basis};
use crate::circuit::{CliffordCircuit, Gate};
use crate::error::{invalid, Error, Result};
use crate::pauli::{product_phase, Pauli, PauliString};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    r: Vec<bool>,
}

/// Result of a single Z measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Measurement {
    /// `true` for eigenvalue `-1`.
    pub flipped: bool,
    pub deterministic: bool,
}

impl Measurement {
    pub fn value(&self) -> i8 {
        if self.flipped {
            -1
        } else {
            1
        }
    }
}

impl StabilizerTableau {
    /// The all-zeros state `|0...0>`.
    pub fn new_zero_state(n: usize) -> Result<Self> {
        if n == 0 {
            return invalid("a tableau needs at least one qubit");
        }
        let words = n.div_ceil(64);
        let rows = 2 * n + 1;
        let mut t = Self {
            n,
            words,
            x: vec![0; rows * words],
            z: vec![0; rows * words],
            r: vec![false; rows],
        };
        for q in 0..n {
            t.x[q * words + q / 64] |= 1 << (q % 64);
            t.z[(n + q) * words + q / 64] |= 1 << (q % 64);
        }
        Ok(t)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    fn row_x(&self, row: usize) -> &[u64] {
        &self.x[row * self.words..(row + 1) * self.words]
    }

    #[inline]
    fn row_z(&self, row: usize) -> &[u64] {
        &self.z[row * self.words..(row + 1) * self.words]
    }

    #[inline]
    fn xbit(&self, row: usize, q: usize) -> bool {
        (self.x[row * self.words + q / 64] >> (q % 64)) & 1 == 1
    }

    #[inline]
    fn zbit(&self, row: usize, q: usize) -> bool {
        (self.z[row * self.words + q / 64] >> (q % 64)) & 1 == 1
    }

    fn row_pauli(&self, row: usize) -> PauliString {
        let mut x = BitVec::zeros(self.n);
        let mut z = BitVec::zeros(self.n);
        for q in 0..self.n {
            x.set(q, self.xbit(row, q));
            z.set(q, self.zbit(row, q));
        }
        PauliString::from_parts(x, z, self.r[row])
    }

    /// `row[h] <- row[i] * row[h]`.
    fn rowsum(&mut self, h: usize, i: usize) {
        let w = self.words;
        let extra = product_phase(self.row_x(i), self.row_z(i), self.row_x(h), self.row_z(h));
        let phase = (2 * self.r[h] as u32 + 2 * self.r[i] as u32 + extra) % 4;
        self.r[h] = phase == 2;
        for k in 0..w {
            self.x[h * w + k] ^= self.x[i * w + k];
            self.z[h * w + k] ^= self.z[i * w + k];
        }
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            invalid(format!("qubit {} out of range for {} qubits", q + 1, self.n))
        } else {
            Ok(())
        }
    }

    pub fn h(&mut self, q: usize) {
        let (wi, mask) = (q / 64, 1u64 << (q % 64));
        for row in 0..2 * self.n {
            let k = row * self.words + wi;
            let xb = self.x[k] & mask;
            let zb = self.z[k] & mask;
            if xb != 0 && zb != 0 {
                self.r[row] ^= true;
            }
            self.x[k] = (self.x[k] & !mask) | zb;
            self.z[k] = (self.z[k] & !mask) | xb;
        }
    }

    pub fn x(&mut self, q: usize) {
        for row in 0..2 * self.n {
            if self.zbit(row, q) {
                self.r[row] ^= true;
            }
        }
    }

    pub fn z(&mut self, q: usize) {
        for row in 0..2 * self.n {
            if self.xbit(row, q) {
                self.r[row] ^= true;
            }
        }
    }

    pub fn cnot(&mut self, control: usize, target: usize) {
        for row in 0..2 * self.n {
            let xc = self.xbit(row, control);
            let zc = self.zbit(row, control);
            let xt = self.xbit(row, target);
            let zt = self.zbit(row, target);
            if xc && zt && (xt == zc) {
                self.r[row] ^= true;
            }
            if xc {
                self.x[row * self.words + target / 64] ^= 1 << (target % 64);
            }
            if zt {
                self.z[row * self.words + control / 64] ^= 1 << (control % 64);
            }
        }
    }

    /// Conjugates the state by a Pauli operator; only signs change.
    pub fn apply_pauli(&mut self, p: &PauliString) {
        assert_eq!(p.num_qubits(), self.n);
        let px = p.x_bits().words();
        let pz = p.z_bits().words();
        for row in 0..2 * self.n {
            let mut acc = 0u64;
            for k in 0..self.words {
                acc ^= (self.x[row * self.words + k] & pz[k]) ^ (self.z[row * self.words + k] & px[k]);
            }
            if acc.count_ones() & 1 == 1 {
                self.r[row] ^= true;
            }
        }
    }

    /// Applies a unitary gate event. Init, measurement and markers are rejected.
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        for q in gate.qubits() {
            self.check_qubit(q)?;
        }
        match *gate {
            Gate::H(q) => self.h(q),
            Gate::X(q) => self.x(q),
            Gate::Z(q) => self.z(q),
            Gate::Cnot { control, target } => {
                if control == target {
                    return invalid("CNOT control equals target");
                }
                self.cnot(control, target)
            }
            ref other => return invalid(format!("{other:?} is not a unitary gate")),
        }
        Ok(())
    }

    /// Measures `Z_q`. `choose` is consulted only for random outcomes and
    /// returns `true` for `-1`.
    pub fn measure_z_with(&mut self, q: usize, choose: impl FnOnce() -> bool) -> Measurement {
        let n = self.n;
        let w = self.words;
        if let Some(p) = (n..2 * n).find(|&row| self.xbit(row, q)) {
            for i in 0..2 * n {
                if i != p && self.xbit(i, q) {
                    self.rowsum(i, p);
                }
            }
            let d = p - n;
            self.x.copy_within(p * w..(p + 1) * w, d * w);
            self.z.copy_within(p * w..(p + 1) * w, d * w);
            self.r[d] = self.r[p];
            self.x[p * w..(p + 1) * w].fill(0);
            self.z[p * w..(p + 1) * w].fill(0);
            self.z[p * w + q / 64] |= 1 << (q % 64);
            let flipped = choose();
            self.r[p] = flipped;
            Measurement { flipped, deterministic: false }
        } else {
            let s = 2 * n;
            self.x[s * w..(s + 1) * w].fill(0);
            self.z[s * w..(s + 1) * w].fill(0);
            self.r[s] = false;
            for i in 0..n {
                if self.xbit(i, q) {
                    self.rowsum(s, i + n);
                }
            }
            Measurement { flipped: self.r[s], deterministic: true }
        }
    }

    pub fn measure_z<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Measurement {
        self.measure_z_with(q, || rng.gen::<bool>())
    }

    /// Measures every qubit in Z, in index order.
    pub fn measure_all_z<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<i8> {
        (0..self.n).map(|q| self.measure_z(q, rng).value()).collect()
    }

    /// Resets `q` to `|0>`.
    pub fn reset_zero(&mut self, q: usize) {
        if self.measure_z_with(q, || false).flipped {
            self.x(q);
        }
    }

    /// Runs a whole circuit. Measurement outcomes are returned in event order.
    pub fn run<R: Rng + ?Sized>(&mut self, circuit: &CliffordCircuit, rng: &mut R) -> Result<Vec<bool>> {
        if circuit.num_qubits() != self.n {
            return invalid("circuit and tableau sizes differ");
        }
        let mut records = Vec::new();
        for gate in circuit.events() {
            self.apply_event(gate, &mut || rng.gen::<bool>(), &mut records)?;
        }
        Ok(records)
    }

    pub(crate) fn apply_event(
        &mut self,
        gate: &Gate,
        choose: &mut dyn FnMut() -> bool,
        records: &mut Vec<bool>,
    ) -> Result<()> {
        match *gate {
            Gate::InitZero(q) => self.reset_zero(q),
            Gate::InitPlus(q) => {
                self.reset_zero(q);
                self.h(q);
            }
            Gate::MeasureZ(q) => records.push(self.measure_z_with(q, choose).flipped),
            Gate::Marker(_) => {}
            ref g => self.apply_gate(g)?,
        }
        Ok(())
    }

    pub fn stabilizers(&self) -> Vec<PauliString> {
        (self.n..2 * self.n).map(|row| self.row_pauli(row)).collect()
    }

    pub fn destabilizers(&self) -> Vec<PauliString> {
        (0..self.n).map(|row| self.row_pauli(row)).collect()
    }

    /// Row-reduced generators; equal for two tableaus iff they describe the same state.
    pub fn canonical_stabilizers(&self) -> Vec<PauliString> {
        canonical_form(&self.stabilizers()).expect("tableau generators are consistent")
    }

    /// Stabilizer generators of the qubits in `keep`, relabelled `0..keep.len()`.
    ///
    /// Fails unless the state factorizes as (state of `keep`) ⊗ (rest).
    pub fn reduced_stabilizers(&self, keep: &[usize]) -> Result<Vec<PauliString>> {
        let mut kept = vec![false; self.n];
        for &q in keep {
            self.check_qubit(q)?;
            if kept[q] {
                return invalid(format!("qubit {} listed twice", q + 1));
            }
            kept[q] = true;
        }
        let rest: Vec<usize> = (0..self.n).filter(|&q| !kept[q]).collect();
        let mut columns: Vec<(usize, Pauli)> = Vec::with_capacity(2 * self.n);
        columns.extend(rest.iter().map(|&q| (q, Pauli::X)));
        columns.extend(rest.iter().map(|&q| (q, Pauli::Z)));
        columns.extend(keep.iter().map(|&q| (q, Pauli::X)));
        columns.extend(keep.iter().map(|&q| (q, Pauli::Z)));
        let reduced = reduce_by_columns(&self.stabilizers(), &columns)?;
        let local: Vec<PauliString> = reduced
            .into_iter()
            .filter(|g| rest.iter().all(|&q| g.get(q) == Pauli::I))
            .map(|g| g.restrict(keep))
            .collect();
        if local.len() != keep.len() {
            return Err(Error::InvalidArgument(format!(
                "subsystem is entangled with the rest ({} of {} local generators)",
                local.len(),
                keep.len()
            )));
        }
        canonical_form(&local)
    }

    /// The exact Z-basis outcome distribution: uniform over `reference + span`.
    pub fn z_outcome_space(&self) -> OutcomeSpace {
        let mut probe = self.clone();
        let mut reference = BitVec::zeros(self.n);
        for q in 0..self.n {
            reference.set(q, probe.measure_z_with(q, || false).flipped);
        }
        let directions = Gf2Basis::from_vectors(self.stabilizers().iter().map(|g| g.x_bits()));
        OutcomeSpace { reference, directions }
    }
}

/// An affine subspace of outcome bit strings, each equally likely.
#[derive(Clone, Debug)]
pub struct OutcomeSpace {
    pub reference: BitVec,
    pub directions: Gf2Basis,
}

impl OutcomeSpace {
    pub fn contains(&self, outcome: &BitVec) -> bool {
        let mut d = outcome.clone();
        d.xor_assign(&self.reference);
        self.directions.contains(&d)
    }

    pub fn size_log2(&self) -> usize {
        self.directions.rank()
    }

    pub fn same_distribution(&self, other: &OutcomeSpace) -> bool {
        self.directions.same_span(&other.directions) && self.contains(&other.reference)
    }

    /// Shifts every outcome by `flip`.
    pub fn shifted(&self, flip: &BitVec) -> OutcomeSpace {
        let mut reference = self.reference.clone();
        reference.xor_assign(flip);
        OutcomeSpace { reference, directions: self.directions.clone() }
    }

    /// Every outcome in the space; only sensible for small ranks.
    pub fn enumerate(&self) -> Vec<BitVec> {
        let dirs: Vec<&BitVec> = self.directions.vectors().collect();
        assert!(dirs.len() < 24, "outcome space too large to enumerate");
        (0u32..1 << dirs.len())
            .map(|mask| {
                let mut v = self.reference.clone();
                for (i, d) in dirs.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        v.xor_assign(d);
                    }
                }
                v
            })
            .collect()
    }
}

/// Gaussian elimination with X-part pivots first, then Z-part, lowest qubit first.
///
/// Every pivot column is cleared in all other rows, so the output is the unique
/// reduced row-echelon generating set of the group; identity rows are dropped.
/// Fails if `-I` is in the generated group.
pub fn canonical_form(generators: &[PauliString]) -> Result<Vec<PauliString>> {
    let Some(first) = generators.first() else {
        return Ok(Vec::new());
    };
    let n = first.num_qubits();
    let columns: Vec<(usize, Pauli)> = (0..n)
        .map(|q| (q, Pauli::X))
        .chain((0..n).map(|q| (q, Pauli::Z)))
        .collect();
    reduce_by_columns(generators, &columns)
}

fn column_bit(p: &PauliString, (q, part): (usize, Pauli)) -> bool {
    match part {
        Pauli::X => p.x_bits().get(q),
        _ => p.z_bits().get(q),
    }
}

fn reduce_by_columns(generators: &[PauliString], columns: &[(usize, Pauli)]) -> Result<Vec<PauliString>> {
    let mut rows: Vec<PauliString> = generators.to_vec();
    let mut top = 0;
    for &col in columns {
        let Some(pivot) = (top..rows.len()).find(|&i| column_bit(&rows[i], col)) else {
            continue;
        };
        rows.swap(top, pivot);
        let pivot_row = rows[top].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != top && column_bit(row, col) {
                let mut prod = pivot_row.clone();
                prod.mul_assign_right(row);
                *row = prod;
            }
        }
        top += 1;
    }
    for row in &rows[top..] {
        if !row.is_identity() {
            return Err(Error::Internal("column list does not cover every qubit".into()));
        }
        if row.phase() != 0 {
            return invalid("generators are inconsistent (-I in the group)");
        }
    }
    rows.truncate(top);
    if rows.iter().any(|r| !r.is_hermitian()) {
        return invalid("generators do not commute");
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn zero_state_generators() {
        assert!(StabilizerTableau::new_zero_state(0).is_err());
        let t = StabilizerTableau::new_zero_state(1).unwrap();
        assert_eq!(t.stabilizers(), vec![p("+Z")]);
        let t = StabilizerTableau::new_zero_state(9).unwrap();
        let stabs = t.stabilizers();
        assert_eq!(stabs.len(), 9);
        for (j, s) in stabs.iter().enumerate() {
            assert_eq!(*s, PauliString::z_on(9, &[j]));
        }
        assert_eq!(t.canonical_stabilizers(), stabs);
    }

    #[test]
    fn hadamard_turns_z_into_x() {
        let mut t = StabilizerTableau::new_zero_state(9).unwrap();
        t.apply_gate(&Gate::H(0)).unwrap();
        assert_eq!(t.stabilizers()[0], PauliString::x_on(9, &[0]));
    }

    #[test]
    fn conjugation_examples() {
        let mut t = StabilizerTableau::new_zero_state(2).unwrap();
        t.h(0);
        t.apply_gate(&Gate::cnot(0, 1)).unwrap();
        assert_eq!(t.canonical_stabilizers(), vec![p("+XX"), p("+ZZ")]);

        // |00> is stabilized by Z_2; after CNOT(1,2) the group contains Z_1 Z_2.
        let mut t = StabilizerTableau::new_zero_state(2).unwrap();
        t.apply_gate(&Gate::cnot(0, 1)).unwrap();
        let group = t.canonical_stabilizers();
        assert_eq!(canonical_form(&[p("+ZI"), p("+ZZ")]).unwrap(), group);

        let mut t = StabilizerTableau::new_zero_state(1).unwrap();
        t.apply_gate(&Gate::X(0)).unwrap();
        assert_eq!(t.stabilizers(), vec![p("-Z")]);
    }

    #[test]
    fn non_unitary_events_are_rejected() {
        let mut t = StabilizerTableau::new_zero_state(2).unwrap();
        assert!(t.apply_gate(&Gate::MeasureZ(0)).is_err());
        assert!(t.apply_gate(&Gate::InitZero(0)).is_err());
        assert!(t.apply_gate(&Gate::H(5)).is_err());
    }

    #[test]
    fn zero_state_measures_all_plus() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut t = StabilizerTableau::new_zero_state(6).unwrap();
        assert_eq!(t.measure_all_z(&mut rng), vec![1; 6]);
    }

    #[test]
    fn plus_state_is_fair() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let shots = 10_000;
        let mut plus = 0;
        for _ in 0..shots {
            let mut t = StabilizerTableau::new_zero_state(1).unwrap();
            t.h(0);
            let m = t.measure_z(0, &mut rng);
            assert!(!m.deterministic);
            if !m.flipped {
                plus += 1;
            }
        }
        let sigma = (shots as f64 * 0.25).sqrt();
        assert!((plus as f64 - 5000.0).abs() < 3.0 * sigma, "{plus}");
    }

    #[test]
    fn bell_pair_outcomes_correlate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let mut t = StabilizerTableau::new_zero_state(2).unwrap();
            t.h(0);
            t.cnot(0, 1);
            let a = t.measure_z(0, &mut rng);
            let b = t.measure_z(1, &mut rng);
            assert!(b.deterministic);
            assert_eq!(a.flipped, b.flipped);
        }
    }

    #[test]
    fn canonical_form_ignores_order_and_products() {
        let gens = vec![p("+XXI"), p("+ZZI"), p("-IZZ")];
        let c1 = canonical_form(&gens).unwrap();
        let c2 = canonical_form(&[gens[2].clone(), gens[0].clone(), &gens[1] * &gens[2]]).unwrap();
        assert_eq!(c1, c2);
        assert_eq!(canonical_form(&c1).unwrap(), c1);
        assert!(canonical_form(&[p("+Z"), p("-Z")]).is_err());
    }

    #[test]
    fn reduced_stabilizers_of_product_state() {
        let mut t = StabilizerTableau::new_zero_state(4).unwrap();
        t.h(1);
        t.cnot(1, 3);
        t.x(0);
        let local = t.reduced_stabilizers(&[3, 1]).unwrap();
        assert_eq!(local, canonical_form(&[p("+XX"), p("+ZZ")]).unwrap());
        assert_eq!(t.reduced_stabilizers(&[0]).unwrap(), vec![p("-Z")]);
        assert!(t.reduced_stabilizers(&[1]).is_err());
    }

    #[test]
    fn outcome_space_of_ghz() {
        let mut t = StabilizerTableau::new_zero_state(3).unwrap();
        t.h(0);
        t.cnot(0, 1);
        t.cnot(1, 2);
        let space = t.z_outcome_space();
        let all = space.enumerate();
        assert_eq!(all.len(), 2);
        assert!(space.contains(&BitVec::from_indices(3, [0, 1, 2])));
        assert!(space.contains(&BitVec::zeros(3)));
    }
}
