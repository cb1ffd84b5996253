//! Clifford circuits and their line-oriented text format.
//!
//! # Text format
//!
//! ```text
//! # qubits 9
//! INITP 1
//! INITZ 2
//! CNOT 1 2
//! H 3
//! X 4
//! Z 5
//! MEASZ 7
//! # marker:step1
//! ```
//!
//! * The first non-blank line must be the header `# qubits <n>`.
//! * Every other line holds one event. Qubit indices are 1-based.
//! * `# marker:<tag>` is a [`Gate::Marker`] event; the tag runs to the end of the
//!   line with surrounding whitespace trimmed and may not be empty.
//! * Any other line starting with `#` is a comment and is dropped by the parser.
//! * Tokens are separated by ASCII whitespace; blank lines are ignored.
//!
//! [`CliffordCircuit::to_text`] writes exactly one event per line, so
//! `parse(to_text(c)) == c` for every valid circuit.

use std::fmt;
use std::path::Path;

use crate::error::{invalid, Error, Result};

/// One circuit event. Qubit indices are 0-based in memory.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    InitZero(usize),
    InitPlus(usize),
    H(usize),
    X(usize),
    Z(usize),
    Cnot { control: usize, target: usize },
    MeasureZ(usize),
    Marker(String),
}

impl Gate {
    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control, target }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::InitZero(q)
            | Gate::InitPlus(q)
            | Gate::H(q)
            | Gate::X(q)
            | Gate::Z(q)
            | Gate::MeasureZ(q) => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Marker(_) => vec![],
        }
    }

    pub fn is_unitary(&self) -> bool {
        matches!(self, Gate::H(_) | Gate::X(_) | Gate::Z(_) | Gate::Cnot { .. })
    }

    pub fn is_cnot(&self) -> bool {
        matches!(self, Gate::Cnot { .. })
    }

    fn write_line(&self, out: &mut String) {
        use std::fmt::Write;
        let _ = match self {
            Gate::InitZero(q) => writeln!(out, "INITZ {}", q + 1),
            Gate::InitPlus(q) => writeln!(out, "INITP {}", q + 1),
            Gate::H(q) => writeln!(out, "H {}", q + 1),
            Gate::X(q) => writeln!(out, "X {}", q + 1),
            Gate::Z(q) => writeln!(out, "Z {}", q + 1),
            Gate::Cnot { control, target } => writeln!(out, "CNOT {} {}", control + 1, target + 1),
            Gate::MeasureZ(q) => writeln!(out, "MEASZ {}", q + 1),
            Gate::Marker(tag) => writeln!(out, "# marker:{tag}"),
        };
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CliffordCircuit {
    n: usize,
    events: Vec<Gate>,
}

impl CliffordCircuit {
    pub fn new(n: usize) -> Self {
        Self { n, events: Vec::new() }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn events(&self) -> &[Gate] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Appends an event after validating its qubit indices.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        for q in gate.qubits() {
            if q >= self.n {
                return invalid(format!("qubit {} out of range for {} qubits", q + 1, self.n));
            }
        }
        if let Gate::Cnot { control, target } = gate {
            if control == target {
                return invalid(format!("CNOT control equals target ({})", control + 1));
            }
        }
        if let Gate::Marker(tag) = &gate {
            if tag.trim().is_empty() || tag.contains('\n') || tag.trim() != tag {
                return invalid(format!("bad marker tag {tag:?}"));
            }
        }
        self.events.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    pub fn marker(&mut self, tag: impl Into<String>) -> Result<()> {
        self.push(Gate::Marker(tag.into()))
    }

    /// Event indices of every CNOT, in circuit order.
    pub fn cnot_indices(&self) -> Vec<usize> {
        self.events
            .iter()
            .enumerate()
            .filter_map(|(i, g)| g.is_cnot().then_some(i))
            .collect()
    }

    /// Index of the first marker carrying `tag`.
    pub fn marker_index(&self, tag: &str) -> Option<usize> {
        self.events.iter().position(|g| matches!(g, Gate::Marker(t) if t == tag))
    }

    /// Label of the most recent marker at or before `index`.
    pub fn step_label(&self, index: usize) -> Option<&str> {
        self.events[..=index.min(self.events.len().saturating_sub(1))]
            .iter()
            .rev()
            .find_map(|g| match g {
                Gate::Marker(t) => Some(t.as_str()),
                _ => None,
            })
    }

    /// The events before index `end`.
    pub fn prefix(&self, end: usize) -> CliffordCircuit {
        CliffordCircuit { n: self.n, events: self.events[..end].to_vec() }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# qubits {}\n", self.n);
        for g in &self.events {
            g.write_line(&mut out);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut circuit: Option<CliffordCircuit> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = lineno + 1;
            if line.is_empty() {
                continue;
            }
            let perr = |message: String| Error::Parse { line: lineno, message };
            let Some(c) = circuit.as_mut() else {
                let n = line
                    .strip_prefix('#')
                    .map(str::trim)
                    .and_then(|rest| rest.strip_prefix("qubits"))
                    .map(str::trim)
                    .and_then(|n| n.parse::<usize>().ok())
                    .ok_or_else(|| perr(format!("expected `# qubits <n>` header, got {line:?}")))?;
                circuit = Some(CliffordCircuit::new(n));
                continue;
            };
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(tag) = comment.trim_start().strip_prefix("marker:") {
                    c.push(Gate::Marker(tag.trim().to_string()))
                        .map_err(|e| perr(e.to_string()))?;
                }
                continue;
            }
            let mut tokens = line.split_ascii_whitespace();
            let op = tokens.next().unwrap_or_default();
            let mut qubit = || -> Result<usize> {
                let tok = tokens.next().ok_or_else(|| perr(format!("{op}: missing qubit index")))?;
                let q: usize = tok.parse().map_err(|_| perr(format!("bad qubit index {tok:?}")))?;
                if q == 0 {
                    return Err(perr("qubit indices are 1-based".into()));
                }
                Ok(q - 1)
            };
            let gate = match op {
                "INITZ" => Gate::InitZero(qubit()?),
                "INITP" => Gate::InitPlus(qubit()?),
                "H" => Gate::H(qubit()?),
                "X" => Gate::X(qubit()?),
                "Z" => Gate::Z(qubit()?),
                "MEASZ" => Gate::MeasureZ(qubit()?),
                "CNOT" => {
                    let control = qubit()?;
                    let target = qubit()?;
                    Gate::cnot(control, target)
                }
                other => return Err(perr(format!("unknown operation {other:?}"))),
            };
            if tokens.next().is_some() {
                return Err(perr(format!("trailing tokens after {op}")));
            }
            c.push(gate).map_err(|e| perr(e.to_string()))?;
        }
        circuit.ok_or_else(|| Error::Parse { line: 0, message: "missing `# qubits <n>` header".into() })
    }

    pub fn write_to(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read_from(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

impl fmt::Display for CliffordCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_events() {
        let mut c = CliffordCircuit::new(3);
        assert!(c.push(Gate::H(3)).is_err());
        assert!(c.push(Gate::cnot(1, 1)).is_err());
        assert!(c.push(Gate::Marker(String::new())).is_err());
        assert!(c.push(Gate::cnot(0, 2)).is_ok());
    }

    #[test]
    fn parses_documented_grammar() {
        let text = "# qubits 9\n\nH 3\nCNOT 1 2\nINITP 4\n# a comment\nMEASZ 7\n# marker:step1\n";
        let c = CliffordCircuit::parse(text).unwrap();
        assert_eq!(
            c.events(),
            &[
                Gate::H(2),
                Gate::cnot(0, 1),
                Gate::InitPlus(3),
                Gate::MeasureZ(6),
                Gate::Marker("step1".into())
            ]
        );
        assert_eq!(c.step_label(4), Some("step1"));
        assert_eq!(c.step_label(0), None);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = CliffordCircuit::parse("# qubits 2\nCNOT 1 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(CliffordCircuit::parse("H 1\n").is_err());
        assert!(CliffordCircuit::parse("# qubits 2\nH 0\n").is_err());
        assert!(CliffordCircuit::parse("# qubits 2\nFOO 1\n").is_err());
        assert!(CliffordCircuit::parse("# qubits 2\nH 1 2\n").is_err());
    }

    #[test]
    fn empty_circuit_is_header_only() {
        let c = CliffordCircuit::new(4);
        assert_eq!(c.to_text(), "# qubits 4\n");
        assert_eq!(CliffordCircuit::parse(&c.to_text()).unwrap(), c);
    }

    fn arb_gate(n: usize) -> impl Strategy<Value = Gate> {
        prop_oneof![
            (0..n).prop_map(Gate::InitZero),
            (0..n).prop_map(Gate::InitPlus),
            (0..n).prop_map(Gate::H),
            (0..n).prop_map(Gate::X),
            (0..n).prop_map(Gate::Z),
            (0..n).prop_map(Gate::MeasureZ),
            (0..n, 1..n).prop_map(move |(c, d)| Gate::cnot(c, (c + d) % n)),
            "[a-z0-9:_-]{1,12}".prop_map(Gate::Marker),
        ]
    }

    proptest! {
        #[test]
        fn text_round_trip(gates in proptest::collection::vec(arb_gate(7), 0..40)) {
            let mut c = CliffordCircuit::new(7);
            c.extend(gates).unwrap();
            let back = CliffordCircuit::parse(&c.to_text()).unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
