//! Word-packed bit vectors used for Pauli components and measurement records.

use std::fmt;

/// A fixed-length bit vector packed into 64-bit words.
///
/// Bits past `len` in the last word are always zero, so word-wise equality and
/// hashing agree with bit-wise equality.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self { len, words: vec![0; words_for(len)] }
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in indices {
            v.set(i, true);
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Bits `start..start + count` packed into the low end of a word.
    #[inline]
    pub fn bits(&self, start: usize, count: usize) -> u64 {
        debug_assert!(count <= 64 && start + count <= self.len);
        if count == 0 {
            return 0;
        }
        let (w, off) = (start >> 6, start & 63);
        let mut v = self.words[w] >> off;
        if off + count > 64 {
            v |= self.words[w + 1] << (64 - off);
        }
        if count == 64 {
            v
        } else {
            v & ((1u64 << count) - 1)
        }
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i & 63);
        if value {
            self.words[i >> 6] |= mask;
        } else {
            self.words[i >> 6] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i >> 6] ^= 1u64 << (i & 63);
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn and(&self, other: &BitVec) -> BitVec {
        debug_assert_eq!(self.len, other.len);
        BitVec {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    #[inline]
    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Parity of `popcount(self & other)`.
    #[inline]
    pub fn dot(&self, other: &BitVec) -> bool {
        let mut acc = 0u64;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= a & b;
        }
        acc.count_ones() & 1 == 1
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let tz = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + tz)
                }
            })
        })
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// An incrementally built, fully reduced basis of a subspace of GF(2)^n.
#[derive(Clone, Debug, Default)]
pub struct Gf2Basis {
    rows: Vec<(usize, BitVec)>,
}

impl Gf2Basis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_vectors<'a>(vectors: impl IntoIterator<Item = &'a BitVec>) -> Self {
        let mut basis = Self::new();
        for v in vectors {
            basis.insert(v.clone());
        }
        basis
    }

    fn reduce(&self, v: &mut BitVec) {
        for (pivot, row) in &self.rows {
            if v.get(*pivot) {
                v.xor_assign(row);
            }
        }
    }

    /// Adds `v` to the basis; returns false if it was already in the span.
    pub fn insert(&mut self, mut v: BitVec) -> bool {
        self.reduce(&mut v);
        let Some(pivot) = v.iter_ones().next() else {
            return false;
        };
        for (_, row) in self.rows.iter_mut() {
            if row.get(pivot) {
                row.xor_assign(&v);
            }
        }
        self.rows.push((pivot, v));
        true
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        let mut v = v.clone();
        self.reduce(&mut v);
        v.is_zero()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn vectors(&self) -> impl Iterator<Item = &BitVec> {
        self.rows.iter().map(|(_, v)| v)
    }

    /// Same subspace, regardless of how either basis was built.
    pub fn same_span(&self, other: &Gf2Basis) -> bool {
        self.rank() == other.rank() && other.vectors().all(|v| self.contains(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_and_count() {
        let mut v = BitVec::zeros(130);
        v.set(0, true);
        v.set(64, true);
        v.set(129, true);
        assert_eq!(v.count_ones(), 3);
        assert_eq!(v.iter_ones().collect::<Vec<_>>(), vec![0, 64, 129]);
        v.flip(64);
        assert!(!v.get(64));
    }

    #[test]
    fn packed_ranges_cross_words() {
        let v = BitVec::from_indices(130, [0, 62, 63, 64, 66, 129]);
        assert_eq!(v.bits(62, 5), 0b10111);
        assert_eq!(v.bits(0, 1), 1);
        assert_eq!(v.bits(121, 9), 1 << 8);
        assert_eq!(v.bits(1, 0), 0);
    }

    #[test]
    fn span_membership() {
        let a = BitVec::from_indices(5, [1, 2]);
        let b = BitVec::from_indices(5, [0, 1]);
        let c = BitVec::from_indices(5, [0, 2]);
        let basis = Gf2Basis::from_vectors([&a, &b, &c]);
        assert_eq!(basis.rank(), 2);
        assert!(basis.contains(&c));
        assert!(!basis.contains(&BitVec::from_indices(5, [3])));
        let other = Gf2Basis::from_vectors([&c, &a]);
        assert!(basis.same_span(&other));
    }
}
