//! Computational basis states packed into machine words.
//!
//! Qubit `i` is stored in bit `i % 64` of word `i / 64`. The textual form
//! lists qubit 0 first, so `"1100"` has qubits 0 and 1 set. The hex form is
//! the little-endian integer `Σ x_i 2^i`, most significant digit first.

use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};

const WORD: usize = 64;

/// An `n`-qubit computational basis state `|x⟩`, `x ∈ {0,1}^n`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitConfiguration {
    n: usize,
    words: SmallVec<[u64; 1]>,
}

fn word_count(n: usize) -> usize {
    n.div_ceil(WORD).max(1)
}

impl BitConfiguration {
    /// The all-zeros state `0^n`.
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            words: SmallVec::from_elem(0, word_count(n)),
        }
    }

    /// Builds a state from the low `n` bits of `value` (requires `n <= 64`).
    pub fn from_u64(n: usize, value: u64) -> Self {
        assert!(n <= WORD, "from_u64 needs n <= 64, got {n}");
        let masked = if n == WORD { value } else { value & ((1u64 << n) - 1) };
        let mut s = Self::zeros(n);
        s.words[0] = masked;
        s
    }

    /// Builds a state with the listed qubits set.
    pub fn from_ones(n: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::zeros(n);
        for i in ones {
            s.set(i, true);
        }
        s
    }

    /// Parses a `0`/`1` string, qubit 0 first.
    pub fn parse(text: &str) -> Result<Self> {
        let n = text.len();
        let mut s = Self::zeros(n);
        for (i, c) in text.chars().enumerate() {
            match c {
                '0' => {}
                '1' => s.set(i, true),
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "invalid bit character {other:?} in {text:?}"
                    )))
                }
            }
        }
        Ok(s)
    }

    /// Parses the hex form produced by [`BitConfiguration::to_hex`].
    pub fn from_hex(n: usize, hex: &str) -> Result<Self> {
        let digits = hex.trim_start_matches("0x");
        let mut s = Self::zeros(n);
        for (k, c) in digits.chars().rev().enumerate() {
            let v = c
                .to_digit(16)
                .ok_or_else(|| Error::InvalidArgument(format!("invalid hex digit {c:?}")))?;
            for b in 0..4 {
                if v >> b & 1 == 1 {
                    let i = 4 * k + b;
                    if i >= n {
                        return Err(Error::InvalidArgument(format!(
                            "hex state {hex} does not fit in {n} qubits"
                        )));
                    }
                    s.set(i, true);
                }
            }
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// The single packed word, for states with `n <= 64`.
    pub fn as_u64(&self) -> u64 {
        debug_assert!(self.n <= WORD);
        self.words[0]
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.n);
        self.words[i / WORD] >> (i % WORD) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.n, "qubit {i} out of range for {} qubits", self.n);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.n);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    /// Exchanges the values of qubits `i` and `j`.
    pub fn swap(&mut self, i: usize, j: usize) {
        let (a, b) = (self.get(i), self.get(j));
        if a != b {
            self.flip(i);
            self.flip(j);
        }
    }

    /// Hamming weight `|x|`.
    #[inline]
    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Parity of `|x ∧ mask|`; `true` when odd.
    #[inline]
    pub fn and_parity(&self, mask: &Self) -> bool {
        let ones: u32 = self
            .words
            .iter()
            .zip(mask.words.iter())
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    #[inline]
    pub fn xor(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &Self) {
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Indices of set qubits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let b = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(k * WORD + b)
                }
            })
        })
    }

    /// Indices of unset qubits, ascending.
    pub fn zeros_iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&i| !self.get(i))
    }

    /// Little-endian integer value as lowercase hex.
    pub fn to_hex(&self) -> String {
        let mut out = String::new();
        for (k, w) in self.words.iter().enumerate().rev() {
            if out.is_empty() {
                if *w != 0 || k == 0 {
                    out.push_str(&format!("{w:x}"));
                }
            } else {
                out.push_str(&format!("{w:016x}"));
            }
        }
        out
    }

    /// Appends one extra qubit (index `n`) with the given value.
    pub fn extended(&self, value: bool) -> Self {
        let mut out = Self::zeros(self.n + 1);
        for i in self.ones() {
            out.set(i, true);
        }
        out.set(self.n, value);
        out
    }

    /// Drops the last qubit, returning the shorter state and the dropped bit.
    pub fn split_last(&self) -> (Self, bool) {
        assert!(self.n >= 1);
        let last = self.get(self.n - 1);
        let mut out = Self::zeros(self.n - 1);
        for i in self.ones().filter(|&i| i < self.n - 1) {
            out.set(i, true);
        }
        (out, last)
    }
}

impl fmt::Display for BitConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{self}⟩")
    }
}

/// All `n`-qubit states of Hamming weight `k`, in increasing integer order.
///
/// Returns `None` when there are more than `cap` of them.
pub fn fixed_weight_states(n: usize, k: usize, cap: usize) -> Option<Vec<BitConfiguration>> {
    if k > n {
        return Some(Vec::new());
    }
    let count = binomial(n, k)?;
    if count > cap as u128 {
        return None;
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(BitConfiguration::from_ones(n, idx.iter().copied()));
        // next k-combination in colex order of the index vector
        let mut i = k;
        loop {
            if i == 0 {
                out.sort_by(|a, b| a.words.iter().rev().cmp(b.words.iter().rev()));
                return Some(out);
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// All `2^n` states in increasing integer order, or `None` above `cap`.
pub fn all_states(n: usize, cap: usize) -> Option<Vec<BitConfiguration>> {
    if n >= 64 || (1u128 << n) > cap as u128 {
        return None;
    }
    Some((0..1u64 << n).map(|v| BitConfiguration::from_u64(n, v)).collect())
}

/// `C(n, k)` as `u128`, `None` on overflow.
pub fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}
