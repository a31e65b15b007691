//! Moore-neighborhood rule tables and synchronous CA updates.
//!
//! A 3x3 window is packed into a 9-bit code in row-major order with the
//! top-left cell as the most significant bit:
//!
//! ```text
//!   b8 b7 b6
//!   b5 b4 b3
//!   b2 b1 b0
//! ```
//!
//! Cells outside the grid read as 0. Persisted rule tables depend on this
//! ordering, so it must not change.

use std::fmt;

use rand::Rng;

use crate::grid::BinaryGrid;

/// Number of distinct 3x3 binary windows.
pub const RULE_COUNT: usize = 512;

/// Bit position of the center cell inside a window code.
pub const CENTER_BIT: u32 = 4;

/// Next-state lookup for every 9-bit window code.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RuleTable {
    entries: [u8; RULE_COUNT],
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuleTableError {
    #[error("rule table needs exactly {RULE_COUNT} entries, got {0}")]
    Length(usize),
    #[error("rule entry {index} is {value}, expected 0 or 1")]
    NonBinary { index: usize, value: u8 },
}

impl RuleTable {
    pub fn from_entries(entries: &[u8]) -> Result<Self, RuleTableError> {
        let entries: [u8; RULE_COUNT] = entries
            .try_into()
            .map_err(|_| RuleTableError::Length(entries.len()))?;
        if let Some(index) = entries.iter().position(|&v| v > 1) {
            return Err(RuleTableError::NonBinary {
                index,
                value: entries[index],
            });
        }
        Ok(Self { entries })
    }

    pub fn filled(state: bool) -> Self {
        Self {
            entries: [state as u8; RULE_COUNT],
        }
    }

    pub fn zeros() -> Self {
        Self::filled(false)
    }

    pub fn ones() -> Self {
        Self::filled(true)
    }

    /// Copies the center cell, so every grid is a fixed point.
    pub fn identity() -> Self {
        Self::from_fn(|code| (code >> CENTER_BIT) & 1 == 1)
    }

    pub fn from_fn(mut f: impl FnMut(u16) -> bool) -> Self {
        let mut entries = [0u8; RULE_COUNT];
        for (code, e) in entries.iter_mut().enumerate() {
            *e = f(code as u16) as u8;
        }
        Self { entries }
    }

    pub fn get(&self, code: usize) -> u8 {
        self.entries[code]
    }

    pub fn set(&mut self, code: usize, state: bool) {
        self.entries[code] = state as u8;
    }

    pub fn entries(&self) -> &[u8; RULE_COUNT] {
        &self.entries
    }

    pub fn count_ones(&self) -> usize {
        self.entries.iter().filter(|&&e| e == 1).count()
    }

    /// The table as 512 bits, entry `i` at bit `i % 64` of word `i / 64`.
    /// Two tables are equal iff their packed forms are equal.
    pub fn packed(&self) -> [u64; RULE_COUNT / 64] {
        let mut words = [0u64; RULE_COUNT / 64];
        for (i, &e) in self.entries.iter().enumerate() {
            words[i / 64] |= (e as u64) << (i % 64);
        }
        words
    }
}

impl Default for RuleTable {
    fn default() -> Self {
        Self::zeros()
    }
}

impl fmt::Debug for RuleTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits: String = self
            .entries
            .iter()
            .map(|&e| char::from(b'0' + e))
            .collect();
        write!(f, "RuleTable({bits})")
    }
}

/// Draws every entry independently and uniformly from {0, 1}.
pub fn random_rule<R: Rng + ?Sized>(rng: &mut R) -> RuleTable {
    let mut entries = [0u8; RULE_COUNT];
    for chunk in entries.chunks_exact_mut(64) {
        let word: u64 = rng.gen();
        for (i, e) in chunk.iter_mut().enumerate() {
            *e = ((word >> i) & 1) as u8;
        }
    }
    RuleTable { entries }
}

/// 9-bit code of the window centered on `(row, col)`.
pub fn encode_window(grid: &BinaryGrid, row: usize, col: usize) -> u16 {
    let (w, h) = (grid.width() as isize, grid.height() as isize);
    let mut code = 0u16;
    for dr in -1isize..=1 {
        for dc in -1isize..=1 {
            let (r, c) = (row as isize + dr, col as isize + dc);
            let bit = if (0..h).contains(&r) && (0..w).contains(&c) {
                grid.get(r as usize, c as usize) as u16
            } else {
                0
            };
            code = (code << 1) | bit;
        }
    }
    code
}

/// Keeps the left and center columns when the window slides one cell right.
const SLIDE_MASK: u16 = 0b110_110_110;

/// Writes one synchronous update of `src` into `dst`. Both slices are
/// row-major `width * height` buffers; `src` is never written.
fn step_rows(src: &[u8], dst: &mut [u8], width: usize, rule: &RuleTable) {
    let height = src.len() / width;
    let zero_row = vec![0u8; width];
    let table = &rule.entries;
    for (r, out) in dst.chunks_exact_mut(width).enumerate() {
        let above = if r > 0 {
            &src[(r - 1) * width..r * width]
        } else {
            &zero_row[..]
        };
        let mid = &src[r * width..(r + 1) * width];
        let below = if r + 1 < height {
            &src[(r + 1) * width..(r + 2) * width]
        } else {
            &zero_row[..]
        };
        let column =
            |c: usize| ((above[c] as u16) << 6) | ((mid[c] as u16) << 3) | below[c] as u16;

        // Left padding column is zero, so the first window holds only
        // the center and right columns.
        let mut code = column(0) << 1;
        for (c, cell) in out.iter_mut().enumerate() {
            if c + 1 < width {
                code |= column(c + 1);
            }
            *cell = table[code as usize];
            code = (code << 1) & SLIDE_MASK;
        }
    }
}

/// One synchronous pass: every output cell is `rule[encode_window(grid, r, c)]`.
pub fn step(grid: &BinaryGrid, rule: &RuleTable) -> BinaryGrid {
    let mut out = vec![0u8; grid.len()];
    step_rows(grid.cells(), &mut out, grid.width(), rule);
    BinaryGrid::from_raw(grid.width(), grid.height(), out)
}

/// Applies [`step`] `passes` times. Panics if `passes` is zero.
pub fn run(grid: &BinaryGrid, rule: &RuleTable, passes: usize) -> BinaryGrid {
    assert!(passes >= 1, "run needs at least one pass");
    let width = grid.width();
    let mut front = grid.cells().to_vec();
    let mut back = vec![0u8; front.len()];
    for _ in 0..passes {
        step_rows(&front, &mut back, width, rule);
        std::mem::swap(&mut front, &mut back);
    }
    BinaryGrid::from_raw(width, grid.height(), front)
}
