//! Depolarizing CNOT noise and systematic fault enumeration.
//!
//! Only CNOTs fail. A failing CNOT is an ideal CNOT followed by one of the 15
//! non-identity two-qubit Paulis, chosen uniformly.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{CliffordCircuit, Gate};
use crate::error::{invalid, Error, Result};
use crate::pauli::{Pauli, PauliString};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p_cnot: f64,
    pub enabled: bool,
}

impl NoiseModel {
    pub fn new(p_cnot: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_cnot) {
            return invalid(format!("p_cnot = {p_cnot} is outside [0, 1]"));
        }
        Ok(Self { p_cnot, enabled: true })
    }

    pub fn noiseless() -> Self {
        Self { p_cnot: 0.0, enabled: false }
    }

    /// Probability that a given CNOT fails.
    pub fn effective_p(&self) -> f64 {
        if self.enabled {
            self.p_cnot
        } else {
            0.0
        }
    }
}

/// A non-identity Pauli on a CNOT's (control, target) pair.
///
/// Encoded as `4 * control + target` with I=0, X=1, Y=2, Z=3 per factor,
/// so codes run from 1 (`IX`) to 15 (`ZZ`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TwoQubitPauli(u8);

const ORDER: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

fn pauli_code(p: Pauli) -> u8 {
    ORDER.iter().position(|&q| q == p).unwrap() as u8
}

impl TwoQubitPauli {
    pub fn from_code(code: u8) -> Result<Self> {
        if !(1..16).contains(&code) {
            return invalid(format!("two-qubit Pauli code {code} is outside 1..=15"));
        }
        Ok(Self(code))
    }

    pub fn new(on_control: Pauli, on_target: Pauli) -> Result<Self> {
        Self::from_code(4 * pauli_code(on_control) + pauli_code(on_target))
    }

    pub fn all() -> impl Iterator<Item = TwoQubitPauli> {
        (1..16).map(TwoQubitPauli)
    }

    pub fn code(self) -> u8 {
        self.0
    }

    pub fn on_control(self) -> Pauli {
        ORDER[(self.0 >> 2) as usize]
    }

    pub fn on_target(self) -> Pauli {
        ORDER[(self.0 & 3) as usize]
    }

    /// Embeds the Pauli into an `n`-qubit string.
    pub fn to_pauli_string(self, n: usize, control: usize, target: usize) -> PauliString {
        let mut p = PauliString::identity(n);
        p.set(control, self.on_control());
        p.set(target, self.on_target());
        p
    }

    /// Draws one of the 15 Paulis uniformly.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self(rng.gen_range(1..16))
    }
}

impl fmt::Display for TwoQubitPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.on_control().symbol(), self.on_target().symbol())
    }
}

impl FromStr for TwoQubitPauli {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.trim().chars();
        let (Some(a), Some(b), None) = (chars.next(), chars.next(), chars.next()) else {
            return invalid(format!("expected a two-letter Pauli label, got {s:?}"));
        };
        match (Pauli::from_symbol(a), Pauli::from_symbol(b)) {
            (Some(a), Some(b)) => Self::new(a, b),
            _ => invalid(format!("bad Pauli label {s:?}")),
        }
    }
}

/// One injected error: `pauli` acts right after the CNOT at `event_index`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FaultEvent {
    pub event_index: usize,
    pub pauli: TwoQubitPauli,
}

impl FaultEvent {
    /// Checks that `event_index` names a CNOT of `circuit`.
    pub fn new(circuit: &CliffordCircuit, event_index: usize, pauli: TwoQubitPauli) -> Result<Self> {
        match circuit.events().get(event_index) {
            Some(Gate::Cnot { .. }) => Ok(Self { event_index, pauli }),
            _ => invalid(format!("event {event_index} is not a CNOT")),
        }
    }

    /// The fault as an `n`-qubit Pauli on the CNOT's wires.
    pub fn pauli_string(&self, circuit: &CliffordCircuit) -> Result<PauliString> {
        match circuit.events().get(self.event_index) {
            Some(&Gate::Cnot { control, target }) => {
                Ok(self.pauli.to_pauli_string(circuit.num_qubits(), control, target))
            }
            _ => invalid(format!("event {} is not a CNOT", self.event_index)),
        }
    }
}

/// `event_index:label`, for example `12:XZ`.
impl fmt::Display for FaultEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.event_index, self.pauli)
    }
}

/// Independently for every CNOT (in circuit order), fails with probability
/// `p_cnot` and attaches a uniform non-identity Pauli.
pub fn sample_cnot_faults<R: Rng + ?Sized>(
    circuit: &CliffordCircuit,
    model: &NoiseModel,
    rng: &mut R,
) -> Vec<FaultEvent> {
    let mut out = Vec::new();
    sample_faults_at(&circuit.cnot_indices(), model.effective_p(), rng, &mut out);
    out
}

/// Sampling core over a precomputed list of CNOT event indices.
///
/// Gaps between failing CNOTs are drawn from the geometric distribution, which
/// gives the same law as one Bernoulli trial per CNOT with far fewer draws.
pub fn sample_faults_at<R: Rng + ?Sized>(cnots: &[usize], p: f64, rng: &mut R, out: &mut Vec<FaultEvent>) {
    if p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        for &event_index in cnots {
            out.push(FaultEvent { event_index, pauli: TwoQubitPauli::sample(rng) });
        }
        return;
    }
    let ln_q = (1.0 - p).ln();
    let mut i = 0usize;
    while i < cnots.len() {
        let u: f64 = rng.gen();
        let gap = ((1.0 - u).ln() / ln_q).floor();
        if gap >= (cnots.len() - i) as f64 {
            break;
        }
        i += gap as usize;
        out.push(FaultEvent { event_index: cnots[i], pauli: TwoQubitPauli::sample(rng) });
        i += 1;
    }
}

/// Iterator over all k-fault combinations: every k-subset of CNOT locations
/// in lexicographic order, and for each subset all 15^k Pauli assignments with
/// the last location varying fastest.
#[derive(Clone, Debug)]
pub struct FaultCombinations {
    cnots: Vec<usize>,
    locs: Vec<usize>,
    paulis: Vec<u8>,
    done: bool,
}

impl FaultCombinations {
    /// Number of combinations a fresh iterator yields.
    pub fn total(&self) -> u128 {
        binomial(self.cnots.len() as u128, self.locs.len() as u128) * 15u128.pow(self.locs.len() as u32)
    }

    fn advance(&mut self) {
        let k = self.locs.len();
        for i in (0..k).rev() {
            if self.paulis[i] < 15 {
                self.paulis[i] += 1;
                return;
            }
            self.paulis[i] = 1;
        }
        let n = self.cnots.len();
        for i in (0..k).rev() {
            if self.locs[i] < n - k + i {
                self.locs[i] += 1;
                for j in i + 1..k {
                    self.locs[j] = self.locs[j - 1] + 1;
                }
                return;
            }
        }
        self.done = true;
    }
}

impl Iterator for FaultCombinations {
    type Item = Vec<FaultEvent>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = self
            .locs
            .iter()
            .zip(&self.paulis)
            .map(|(&l, &p)| FaultEvent { event_index: self.cnots[l], pauli: TwoQubitPauli(p) })
            .collect();
        self.advance();
        Some(item)
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// All combinations of `k` faults on distinct CNOTs of `circuit`.
pub fn enumerate_faults(circuit: &CliffordCircuit, k: usize) -> Result<FaultCombinations> {
    if k == 0 {
        return invalid("fault count must be at least 1");
    }
    let cnots = circuit.cnot_indices();
    Ok(FaultCombinations {
        done: k > cnots.len(),
        locs: (0..k).collect(),
        paulis: vec![1; k],
        cnots,
    })
}

/// `samples` independent draws of a uniformly random k-subset of CNOT
/// locations with uniform Paulis; each draw is sorted by event index.
pub fn sample_fault_combinations<R: Rng + ?Sized>(
    circuit: &CliffordCircuit,
    k: usize,
    samples: usize,
    rng: &mut R,
) -> Result<Vec<Vec<FaultEvent>>> {
    let cnots = circuit.cnot_indices();
    if k == 0 || k > cnots.len() {
        return invalid(format!("cannot place {k} faults on {} CNOTs", cnots.len()));
    }
    Ok((0..samples)
        .map(|_| {
            let mut locs = sample(rng, cnots.len(), k).into_vec();
            locs.sort_unstable();
            locs.into_iter()
                .map(|l| FaultEvent { event_index: cnots[l], pauli: TwoQubitPauli::sample(rng) })
                .collect()
        })
        .collect())
}

/// Writes faults as CSV with columns `event_index,pauli_label`.
/// Event indices are 0-based positions in the circuit's event list.
pub fn write_faults_csv<W: Write>(faults: &[FaultEvent], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["event_index", "pauli_label"])?;
    for f in faults {
        w.write_record([f.event_index.to_string(), f.pauli.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_faults_csv<R: Read>(input: R) -> Result<Vec<FaultEvent>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in r.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let event_index = row
            .get(0)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Parse { line, message: "bad event_index".into() })?;
        let pauli = row
            .get(1)
            .ok_or_else(|| Error::Parse { line, message: "missing pauli_label".into() })?
            .parse()?;
        out.push(FaultEvent { event_index, pauli });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface9::encoding_circuit;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn model_validates_probability() {
        assert!(NoiseModel::new(-0.1).is_err());
        assert!(NoiseModel::new(1.5).is_err());
        assert_eq!(NoiseModel::noiseless().effective_p(), 0.0);
    }

    #[test]
    fn labels_round_trip() {
        let labels: Vec<String> = TwoQubitPauli::all().map(|p| p.to_string()).collect();
        assert_eq!(labels.len(), 15);
        assert_eq!(labels[0], "IX");
        assert_eq!(labels[14], "ZZ");
        for p in TwoQubitPauli::all() {
            assert_eq!(p.to_string().parse::<TwoQubitPauli>().unwrap(), p);
        }
        assert!("II".parse::<TwoQubitPauli>().is_err());
    }

    #[test]
    fn sampling_extremes() {
        let c = encoding_circuit();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_cnot_faults(&c, &NoiseModel::new(0.0).unwrap(), &mut rng).is_empty());
        let all = sample_cnot_faults(&c, &NoiseModel::new(1.0).unwrap(), &mut rng);
        let locs: Vec<usize> = all.iter().map(|f| f.event_index).collect();
        assert_eq!(locs, c.cnot_indices());
    }

    #[test]
    fn sampled_paulis_are_uniform() {
        let mut c = CliffordCircuit::new(2);
        c.push(Gate::cnot(0, 1)).unwrap();
        let model = NoiseModel::new(0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let shots = 100_000;
        let mut counts = [0usize; 16];
        for _ in 0..shots {
            for f in sample_cnot_faults(&c, &model, &mut rng) {
                counts[f.pauli.code() as usize] += 1;
            }
        }
        let p = 0.02;
        let sigma = (shots as f64 * p * (1.0 - p)).sqrt();
        for &n in &counts[1..] {
            assert!((n as f64 - shots as f64 * p).abs() < 5.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn per_cnot_failure_rate() {
        let mut c = CliffordCircuit::new(2);
        for _ in 0..50 {
            c.push(Gate::cnot(0, 1)).unwrap();
        }
        let model = NoiseModel::new(0.05).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let shots = 20_000;
        let mut per_loc = vec![0usize; 50];
        for _ in 0..shots {
            for f in sample_cnot_faults(&c, &model, &mut rng) {
                per_loc[f.event_index] += 1;
            }
        }
        let sigma = (shots as f64 * 0.05 * 0.95).sqrt();
        for &n in &per_loc {
            assert!((n as f64 - shots as f64 * 0.05).abs() < 5.0 * sigma, "{per_loc:?}");
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let c = encoding_circuit();
        let model = NoiseModel::new(0.2).unwrap();
        let a = sample_cnot_faults(&c, &model, &mut ChaCha8Rng::seed_from_u64(3));
        let b = sample_cnot_faults(&c, &model, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
    }

    #[test]
    fn enumeration_counts() {
        let c = encoding_circuit();
        let singles: Vec<_> = enumerate_faults(&c, 1).unwrap().collect();
        assert_eq!(singles.len(), 120);
        let pairs = enumerate_faults(&c, 2).unwrap();
        assert_eq!(pairs.total(), 6300);
        let pairs: Vec<_> = pairs.collect();
        assert_eq!(pairs.len(), 6300);
        let mut dedup = pairs.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), 6300);
        assert!(pairs.iter().all(|p| p[0].event_index < p[1].event_index));
        assert!(enumerate_faults(&c, 0).is_err());
        assert_eq!(enumerate_faults(&c, 9).unwrap().count(), 0);
        assert_eq!(enumerate_faults(&CliffordCircuit::new(3), 1).unwrap().count(), 0);
    }

    #[test]
    fn random_combinations_use_distinct_locations() {
        let c = encoding_circuit();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for combo in sample_fault_combinations(&c, 3, 200, &mut rng).unwrap() {
            assert_eq!(combo.len(), 3);
            assert!(combo.windows(2).all(|w| w[0].event_index < w[1].event_index));
        }
    }

    #[test]
    fn csv_round_trip() {
        let c = encoding_circuit();
        let faults: Vec<_> = enumerate_faults(&c, 2).unwrap().nth(4000).unwrap();
        let mut buf = Vec::new();
        write_faults_csv(&faults, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("event_index,pauli_label\n"));
        assert_eq!(read_faults_csv(&buf[..]).unwrap(), faults);
    }

    #[test]
    fn fault_events_must_sit_on_cnots() {
        let c = encoding_circuit();
        let p = TwoQubitPauli::from_code(5).unwrap();
        assert!(FaultEvent::new(&c, 0, p).is_err());
        let idx = c.cnot_indices()[0];
        let f = FaultEvent::new(&c, idx, p).unwrap();
        assert_eq!(f.pauli_string(&c).unwrap().to_sparse_string(), "+X1 X2");
    }
}
