//! Binary strings stored one bit per byte.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid character {found:?} at offset {offset}: expected '0' or '1'")]
pub struct BitParseError {
    pub offset: usize,
    pub found: char,
}

/// A finite binary string. Each byte holds `0` or `1`.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitString(Vec<u8>);

impl BitString {
    pub fn new() -> Self {
        BitString(Vec::new())
    }

    pub fn zeros(len: usize) -> Self {
        BitString(vec![0; len])
    }

    /// Builds from raw bit values; any nonzero byte is read as `1`.
    pub fn from_bits<I: IntoIterator<Item = u8>>(bits: I) -> Self {
        BitString(bits.into_iter().map(|b| (b != 0) as u8).collect())
    }

    /// The low `len` bits of `value`, most significant first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        debug_assert!(len <= 64);
        BitString((0..len).rev().map(|i| ((value >> i) & 1) as u8).collect())
    }

    /// Inverse of [`BitString::from_u64`]. Panics on strings longer than 64 bits.
    pub fn to_u64(&self) -> u64 {
        assert!(self.0.len() <= 64, "bit string too long for u64");
        self.0.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [u8] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.0
    }

    pub fn push(&mut self, bit: u8) {
        self.0.push((bit != 0) as u8);
    }

    pub fn get(&self, index: usize) -> Option<u8> {
        self.0.get(index).copied()
    }

    pub fn slice(&self, start: usize, end: usize) -> BitString {
        BitString(self.0[start..end].to_vec())
    }

    pub fn flip(&mut self, index: usize) {
        self.0[index] ^= 1;
    }
}

impl From<Vec<u8>> for BitString {
    fn from(bits: Vec<u8>) -> Self {
        BitString::from_bits(bits)
    }
}

impl FromStr for BitString {
    type Err = BitParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .enumerate()
            .map(|(offset, c)| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                found => Err(BitParseError { offset, found }),
            })
            .collect::<Result<Vec<u8>, _>>()
            .map(BitString)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.0.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl std::ops::Index<usize> for BitString {
    type Output = u8;

    fn index(&self, index: usize) -> &u8 {
        &self.0[index]
    }
}


/// A rectangular bit grid stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitGrid {
    rows: usize,
    cols: usize,
    cells: Vec<u8>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GridParseError {
    #[error("line {line}: {source}")]
    Bits { line: usize, source: BitParseError },
    #[error("line {line}: row has {found} cells, expected {expected}")]
    Ragged { line: usize, expected: usize, found: usize },
}

impl BitGrid {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitGrid { rows, cols, cells: vec![0; rows * cols] }
    }

    pub fn from_cells(rows: usize, cols: usize, cells: Vec<u8>) -> Self {
        assert_eq!(cells.len(), rows * cols, "cell count does not match shape");
        BitGrid { rows, cols, cells: cells.into_iter().map(|b| (b != 0) as u8).collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.cells[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, bit: u8) {
        self.cells[row * self.cols + col] = (bit != 0) as u8;
    }

    /// The `side x side` square with top-left corner `(row, col)`, row-major.
    pub fn square(&self, row: usize, col: usize, side: usize) -> BitString {
        let mut out = Vec::with_capacity(side * side);
        for r in row..row + side {
            out.extend_from_slice(&self.cells[r * self.cols + col..r * self.cols + col + side]);
        }
        BitString(out)
    }

    /// Same cells packed into a `u64` (row-major, first cell most significant).
    pub fn square_key(&self, row: usize, col: usize, side: usize) -> u64 {
        debug_assert!(side * side <= 64);
        let mut key = 0u64;
        for r in row..row + side {
            for &b in &self.cells[r * self.cols + col..r * self.cols + col + side] {
                key = (key << 1) | b as u64;
            }
        }
        key
    }

    /// One line per row, no header.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.rows * (self.cols + 1));
        for row in self.cells.chunks(self.cols.max(1)).take(self.rows) {
            out.extend(row.iter().map(|&b| if b == 0 { '0' } else { '1' }));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, GridParseError> {
        let mut cells = Vec::new();
        let mut cols = None;
        let mut rows = 0;
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let row: BitString = line.trim().parse().map_err(|source| GridParseError::Bits { line: i + 1, source })?;
            let expected = *cols.get_or_insert(row.len());
            if row.len() != expected {
                return Err(GridParseError::Ragged { line: i + 1, expected, found: row.len() });
            }
            cells.extend(row.into_vec());
            rows += 1;
        }
        Ok(BitGrid { rows, cols: cols.unwrap_or(0), cells })
    }
}

impl fmt::Debug for BitGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitGrid {}x{}\n{}", self.rows, self.cols, self.to_text())
    }
}
