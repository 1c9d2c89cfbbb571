//! Brute-force GF(2) linear-span oracle.
//!
//! Each known symbol is a 0/1 vector over a chunk universe, augmented with
//! its payload. Elimination tells which chunks (or XOR combinations) are
//! recoverable and what their bytes are, independently of any
//! scheme-specific decoding argument.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{xor_into, ChunkId, CodedSymbol};

/// Row-echelon basis over GF(2) with byte payloads. Each stored row has a
/// distinct pivot, its lowest set column.
#[derive(Debug, Clone)]
pub struct Span {
    width: usize,
    payload_len: usize,
    rows: Vec<(Vec<u64>, Vec<u8>)>,
    pivot_row: Vec<Option<usize>>,
    consistent: bool,
}

fn lowest_bit(words: &[u64]) -> Option<usize> {
    words.iter().enumerate().find(|(_, &w)| w != 0).map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

impl Span {
    pub fn new(width: usize, payload_len: usize) -> Self {
        Span { width, payload_len, rows: Vec::new(), pivot_row: vec![None; width], consistent: true }
    }

    fn vector(&self, cols: &[usize]) -> Vec<u64> {
        let mut v = vec![0u64; self.width.div_ceil(64)];
        for &c in cols {
            assert!(c < self.width, "column {c} outside span width {}", self.width);
            v[c / 64] ^= 1 << (c % 64);
        }
        v
    }

    /// Reduces `(v, p)` against the basis; returns the residual vector.
    fn reduce(&self, v: &mut [u64], p: &mut [u8]) {
        while let Some(c) = lowest_bit(v) {
            let Some(r) = self.pivot_row[c] else { return };
            let (row, payload) = &self.rows[r];
            for (a, b) in v.iter_mut().zip(row) {
                *a ^= b;
            }
            xor_into(p, payload);
        }
    }

    /// Adds the XOR of `cols` with value `payload`. Returns whether the rank
    /// grew. A dependent row whose payload disagrees marks the span
    /// inconsistent.
    pub fn insert(&mut self, cols: &[usize], payload: &[u8]) -> bool {
        assert_eq!(payload.len(), self.payload_len, "payload length mismatch");
        let mut v = self.vector(cols);
        let mut p = payload.to_vec();
        self.reduce(&mut v, &mut p);
        match lowest_bit(&v) {
            Some(c) => {
                self.pivot_row[c] = Some(self.rows.len());
                self.rows.push((v, p));
                true
            }
            None => {
                if p.iter().any(|&b| b != 0) {
                    self.consistent = false;
                }
                false
            }
        }
    }

    /// Value of the XOR of `cols` if it lies in the span.
    pub fn solve(&self, cols: &[usize]) -> Option<Vec<u8>> {
        let mut v = self.vector(cols);
        let mut p = vec![0u8; self.payload_len];
        self.reduce(&mut v, &mut p);
        lowest_bit(&v).is_none().then_some(p)
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_consistent(&self) -> bool {
        self.consistent
    }
}

/// [`Span`] keyed by [`ChunkId`] over a fixed universe of equally sized chunks.
#[derive(Debug, Clone)]
pub struct ChunkSpan {
    index: BTreeMap<ChunkId, usize>,
    span: Span,
}

impl ChunkSpan {
    pub fn new<I: IntoIterator<Item = ChunkId>>(universe: I, payload_len: usize) -> Self {
        let index: BTreeMap<ChunkId, usize> = universe.into_iter().enumerate().map(|(i, c)| (c, i)).collect();
        let span = Span::new(index.len(), payload_len);
        ChunkSpan { index, span }
    }

    fn columns(&self, gens: &[ChunkId]) -> Result<Vec<usize>> {
        gens.iter()
            .map(|g| {
                self.index.get(g).copied().ok_or_else(|| Error::Range(format!("{g} is outside the oracle universe")))
            })
            .collect()
    }

    pub fn insert_symbol(&mut self, s: &CodedSymbol) -> Result<bool> {
        let cols = self.columns(s.generators())?;
        Ok(self.span.insert(&cols, &s.payload))
    }

    /// Value of the XOR of `gens`, if determined by the inserted symbols.
    pub fn solve(&self, gens: &[ChunkId]) -> Option<Vec<u8>> {
        let cols = self.columns(gens).ok()?;
        self.span.solve(&cols)
    }

    /// Every single chunk in the span, with its bytes.
    pub fn decodable_chunks(&self) -> BTreeMap<ChunkId, Vec<u8>> {
        self.index.iter().filter_map(|(c, &i)| self.span.solve(&[i]).map(|p| (*c, p))).collect()
    }

    pub fn rank(&self) -> usize {
        self.span.rank()
    }

    pub fn is_consistent(&self) -> bool {
        self.span.is_consistent()
    }
}
