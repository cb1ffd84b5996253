//! Signed n-qubit Pauli operators in the binary symplectic representation.
//!
//! A [`PauliString`] stores an operator `i^phase * P_0 ⊗ ... ⊗ P_{n-1}` where each
//! single-qubit factor is encoded by a pair of bits `(x, z)`:
//! `(0,0) = I`, `(1,0) = X`, `(0,1) = Z`, `(1,1) = Y`. Hermitian operators have
//! `phase ∈ {0, 2}`, i.e. a sign of `+1` or `-1`. Products of anticommuting
//! operators carry an odd phase; those are representable but have no sign.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use crate::bits::BitVec;
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    #[inline]
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    #[inline]
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            'I' | '_' | '.' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    x: BitVec,
    z: BitVec,
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self { x: BitVec::zeros(n), z: BitVec::zeros(n), phase: 0 }
    }

    pub fn from_parts(x: BitVec, z: BitVec, negative: bool) -> Self {
        assert_eq!(x.len(), z.len(), "x and z parts must have equal length");
        Self { x, z, phase: if negative { 2 } else { 0 } }
    }

    /// The operator `P` acting on every qubit in `qubits` (0-based).
    pub fn uniform(n: usize, kind: Pauli, qubits: &[usize]) -> Self {
        let mut p = Self::identity(n);
        for &q in qubits {
            p.set(q, kind);
        }
        p
    }

    pub fn single(n: usize, qubit: usize, kind: Pauli) -> Self {
        Self::uniform(n, kind, &[qubit])
    }

    pub fn x_on(n: usize, qubits: &[usize]) -> Self {
        Self::uniform(n, Pauli::X, qubits)
    }

    pub fn z_on(n: usize, qubits: &[usize]) -> Self {
        Self::uniform(n, Pauli::Z, qubits)
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    #[inline]
    pub fn x_bits(&self) -> &BitVec {
        &self.x
    }

    #[inline]
    pub fn z_bits(&self) -> &BitVec {
        &self.z
    }

    #[inline]
    pub(crate) fn x_bits_mut(&mut self) -> &mut BitVec {
        &mut self.x
    }

    #[inline]
    pub(crate) fn z_bits_mut(&mut self) -> &mut BitVec {
        &mut self.z
    }

    /// Exponent `k` of the global factor `i^k`.
    #[inline]
    pub fn phase(&self) -> u8 {
        self.phase
    }

    #[inline]
    pub fn is_hermitian(&self) -> bool {
        self.phase.is_multiple_of(2)
    }

    /// `+1` or `-1`; `None` for operators carrying a factor of `±i`.
    pub fn sign(&self) -> Option<i8> {
        match self.phase {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    #[inline]
    pub fn is_negative(&self) -> bool {
        self.phase == 2
    }

    pub fn negate(&mut self) {
        self.phase = (self.phase + 2) % 4;
    }

    pub fn negated(mut self) -> Self {
        self.negate();
        self
    }

    pub fn with_sign_positive(mut self) -> Self {
        self.phase = 0;
        self
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x.get(q), self.z.get(q))
    }

    pub fn set(&mut self, q: usize, kind: Pauli) {
        let (x, z) = kind.bits();
        self.x.set(q, x);
        self.z.set(q, z);
    }

    pub fn weight(&self) -> usize {
        self.x
            .words()
            .iter()
            .zip(self.z.words())
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.num_qubits()).filter(|&q| self.get(q) != Pauli::I).collect()
    }

    /// Symplectic inner product; `true` means the operators anticommute.
    pub fn anticommutes_with(&self, other: &PauliString) -> bool {
        assert_eq!(self.num_qubits(), other.num_qubits());
        self.x.dot(&other.z) ^ self.z.dot(&other.x)
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        !self.anticommutes_with(other)
    }

    /// `self <- self * other`, tracking the phase exactly.
    pub fn mul_assign_right(&mut self, other: &PauliString) {
        assert_eq!(self.num_qubits(), other.num_qubits());
        let extra =
            product_phase(self.x.words(), self.z.words(), other.x.words(), other.z.words());
        self.phase = ((self.phase as u32 + other.phase as u32 + extra) % 4) as u8;
        self.x.xor_assign(&other.x);
        self.z.xor_assign(&other.z);
    }

    /// The same operator on a larger register, with qubit `q` moved to `map[q]`.
    pub fn embed(&self, n: usize, map: &[usize]) -> PauliString {
        assert_eq!(map.len(), self.num_qubits());
        let mut out = PauliString::identity(n);
        for (q, &target) in map.iter().enumerate() {
            out.set(target, self.get(q));
        }
        out.phase = self.phase;
        out
    }

    /// Restriction to `qubits`, in that order. The phase is kept.
    pub fn restrict(&self, qubits: &[usize]) -> PauliString {
        let mut out = PauliString::identity(qubits.len());
        for (i, &q) in qubits.iter().enumerate() {
            out.set(i, self.get(q));
        }
        out.phase = self.phase;
        out
    }

    /// Dense label such as `+XZIY`.
    pub fn to_dense_string(&self) -> String {
        let prefix = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        let mut s = String::from(prefix);
        for q in 0..self.num_qubits() {
            s.push(self.get(q).symbol());
        }
        s
    }

    /// Sparse label with 1-based indices, e.g. `+X1 X6 X7`; identity prints as `+I`.
    pub fn to_sparse_string(&self) -> String {
        let sign = if self.is_negative() { "-" } else { "+" };
        let terms: Vec<String> = (0..self.num_qubits())
            .filter_map(|q| match self.get(q) {
                Pauli::I => None,
                p => Some(format!("{}{}", p.symbol(), q + 1)),
            })
            .collect();
        if terms.is_empty() {
            format!("{sign}I")
        } else {
            format!("{sign}{}", terms.join(" "))
        }
    }
}

/// Sum of the per-qubit `i`-exponents picked up by `(x1,z1) * (x2,z2)`, mod 4.
#[inline]
pub(crate) fn product_phase(x1: &[u64], z1: &[u64], x2: &[u64], z2: &[u64]) -> u32 {
    let mut plus = 0u32;
    let mut minus = 0u32;
    for i in 0..x1.len() {
        let (a, b, c, d) = (x1[i], z1[i], x2[i], z2[i]);
        let px = a & !b;
        let py = a & b;
        let pz = !a & b;
        let qx = c & !d;
        let qy = c & d;
        let qz = !c & d;
        // XY = iZ, YZ = iX, ZX = iY; reversed orders give -i.
        plus += ((px & qy) | (py & qz) | (pz & qx)).count_ones();
        minus += ((px & qz) | (py & qx) | (pz & qy)).count_ones();
    }
    (plus + 3 * minus) % 4
}

impl Mul for &PauliString {
    type Output = PauliString;

    fn mul(self, rhs: &PauliString) -> PauliString {
        let mut out = self.clone();
        out.mul_assign_right(rhs);
        out
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_dense_string())
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_dense_string())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses dense labels: an optional sign (`+`, `-`, `i`, `+i`, `-i`) followed by
    /// one of `IXYZ` per qubit.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (1, rest)
        } else {
            (0, s)
        };
        let mut p = PauliString::identity(body.chars().count());
        for (q, c) in body.chars().enumerate() {
            match Pauli::from_symbol(c) {
                Some(kind) => p.set(q, kind),
                None => return invalid(format!("bad Pauli symbol {c:?} in {s:?}")),
            }
        }
        p.phase = phase;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn single_qubit_products() {
        assert_eq!(&p("X") * &p("Y"), p("+iZ"));
        assert_eq!(&p("Y") * &p("X"), p("-iZ"));
        assert_eq!(&p("Y") * &p("Z"), p("+iX"));
        assert_eq!(&p("Z") * &p("X"), p("+iY"));
        assert_eq!(&p("X") * &p("Z"), p("-iY"));
        assert_eq!(&p("X") * &p("X"), p("I"));
        assert_eq!(&p("Y") * &p("Y"), p("I"));
        assert_eq!(&p("-Z") * &p("Z"), p("-I"));
    }

    #[test]
    fn swapped_products_differ_by_symplectic_sign() {
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                let pa = PauliString::single(1, 0, a);
                let pb = PauliString::single(1, 0, b);
                let ab = &pa * &pb;
                let ba = &pb * &pa;
                assert_eq!(ab.x_bits(), ba.x_bits());
                let diff = (4 + ab.phase() - ba.phase()) % 4;
                let expected = if pa.anticommutes_with(&pb) { 2 } else { 0 };
                assert_eq!(diff, expected, "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn weight_counts_non_identity_sites() {
        assert_eq!(p("IXYZI").weight(), 3);
        assert_eq!(p("IIII").weight(), 0);
        assert_eq!(p("IIII").sign(), Some(1));
        assert_eq!(p("-IIII").sign(), Some(-1));
    }

    #[test]
    fn sparse_labels_are_one_based() {
        let xl = PauliString::x_on(9, &[0, 5, 6]);
        assert_eq!(xl.to_sparse_string(), "+X1 X6 X7");
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliString> {
        (proptest::collection::vec(0u8..4, n), 0u8..4).prop_map(move |(v, ph)| {
            let mut p = PauliString::identity(n);
            for (q, k) in v.into_iter().enumerate() {
                p.set(q, Pauli::ALL[k as usize]);
            }
            p.phase = ph % 4;
            p
        })
    }

    proptest! {
        #[test]
        fn product_is_associative(a in arb_pauli(70), b in arb_pauli(70), c in arb_pauli(70)) {
            let left = &(&a * &b) * &c;
            let right = &a * &(&b * &c);
            prop_assert_eq!(left, right);
        }

        #[test]
        fn commutation_matches_products(a in arb_pauli(5), b in arb_pauli(5)) {
            let ab = &a * &b;
            let ba = &b * &a;
            prop_assert_eq!(ab == ba, a.commutes_with(&b));
        }
    }
}
