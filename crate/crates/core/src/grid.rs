//! Binary images and Netpbm (PBM/PGM) I/O.
//!
//! Cell state 1 means "edge present". On disk this is PBM's black pixel
//! (bit 1), and for PGM any gray value at or above [`GRAY_THRESHOLD`].

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

/// Gray values at or above this binarize to cell state 1.
pub const GRAY_THRESHOLD: u8 = 128;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid dimensions must be at least 1x1, got {width}x{height}")]
    EmptyDimensions { width: usize, height: usize },
    #[error("cell buffer has {actual} cells, expected {expected}")]
    CellCount { expected: usize, actual: usize },
    #[error("cell {index} has state {value}, expected 0 or 1")]
    NonBinaryCell { index: usize, value: u8 },
    #[error("dimension mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },
    #[error("unsupported magic number {found:?} at byte 0 (expected P1, P2, P4 or P5)")]
    UnsupportedMagic { found: String },
    #[error("malformed header at byte {offset}: {reason}")]
    MalformedHeader { offset: usize, reason: String },
    #[error("truncated pixel data at byte {offset}: expected {expected} more pixel(s)")]
    Truncated { offset: usize, expected: usize },
    #[error("invalid pixel value {value:?} at byte {offset}")]
    InvalidPixel { offset: usize, value: String },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Rectangular lattice of 0/1 cells stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryGrid {
    width: usize,
    height: usize,
    cells: Vec<u8>,
}

impl BinaryGrid {
    pub fn new(width: usize, height: usize, cells: Vec<u8>) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::EmptyDimensions { width, height });
        }
        let expected = width
            .checked_mul(height)
            .ok_or(GridError::EmptyDimensions { width, height })?;
        if cells.len() != expected {
            return Err(GridError::CellCount {
                expected,
                actual: cells.len(),
            });
        }
        if let Some((index, &value)) = cells.iter().enumerate().find(|(_, &v)| v > 1) {
            return Err(GridError::NonBinaryCell { index, value });
        }
        Ok(Self {
            width,
            height,
            cells,
        })
    }

    /// Caller guarantees the invariants.
    pub(crate) fn from_raw(width: usize, height: usize, cells: Vec<u8>) -> Self {
        debug_assert_eq!(cells.len(), width * height);
        debug_assert!(cells.iter().all(|&c| c <= 1));
        Self {
            width,
            height,
            cells,
        }
    }

    pub fn filled(width: usize, height: usize, state: bool) -> Result<Self, GridError> {
        Self::new(width, height, vec![state as u8; width * height])
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self, GridError> {
        Self::filled(width, height, false)
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self, GridError> {
        let mut cells = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                cells.push(f(r, c) as u8);
            }
        }
        Self::new(width, height, cells)
    }

    /// Binarizes 8-bit gray values: `v >= GRAY_THRESHOLD` becomes 1.
    pub fn from_gray(width: usize, height: usize, gray: &[u8]) -> Result<Self, GridError> {
        let cells = gray.iter().map(|&v| (v >= GRAY_THRESHOLD) as u8).collect();
        Self::new(width, height, cells)
    }

    /// Expands cells to gray values 0 and 255.
    pub fn to_gray(&self) -> Vec<u8> {
        self.cells.iter().map(|&c| c * 255).collect()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<u8> {
        self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.cells[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &[u8] {
        &self.cells[row * self.width..(row + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        self.cells.chunks_exact(self.width)
    }

    pub fn count_ones(&self) -> usize {
        self.cells.iter().filter(|&&c| c == 1).count()
    }

    pub fn complement(&self) -> Self {
        Self::from_raw(
            self.width,
            self.height,
            self.cells.iter().map(|&c| c ^ 1).collect(),
        )
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn check_same_shape(&self, other: &Self) -> Result<(), GridError> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(GridError::DimensionMismatch {
                left_width: self.width,
                left_height: self.height,
                right_width: other.width,
                right_height: other.height,
            })
        }
    }
}

impl fmt::Debug for BinaryGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryGrid {}x{}", self.width, self.height)?;
        for row in self.rows() {
            let line: String = row.iter().map(|&c| if c == 1 { '#' } else { '.' }).collect();
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

/// Number of cells whose states differ.
pub fn hamming(a: &BinaryGrid, b: &BinaryGrid) -> Result<u64, GridError> {
    a.check_same_shape(b)?;
    Ok(a
        .cells
        .iter()
        .zip(&b.cells)
        .filter(|(x, y)| x != y)
        .count() as u64)
}

/// Output encodings supported by [`save_image`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PbmFormat {
    /// Plain text PBM.
    P1,
    /// Packed binary PBM.
    P4,
}

impl std::str::FromStr for PbmFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "p1" | "plain" => Ok(Self::P1),
            "p4" | "raw" | "binary" => Ok(Self::P4),
            other => Err(format!("unknown PBM format {other:?} (expected p1 or p4)")),
        }
    }
}

pub fn load_image(path: impl AsRef<Path>) -> Result<BinaryGrid, GridError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| GridError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode_image(&bytes)
}

pub fn save_image(
    grid: &BinaryGrid,
    path: impl AsRef<Path>,
    format: PbmFormat,
) -> Result<(), GridError> {
    let path = path.as_ref();
    let io_err = |source| GridError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut file = fs::File::create(path).map_err(io_err)?;
    file.write_all(&encode_image(grid, format)).map_err(io_err)?;
    file.flush().map_err(io_err)
}

pub fn encode_image(grid: &BinaryGrid, format: PbmFormat) -> Vec<u8> {
    match format {
        PbmFormat::P1 => {
            let mut out = format!("P1\n{} {}\n", grid.width, grid.height).into_bytes();
            out.reserve(grid.len() * 2);
            for row in grid.rows() {
                for (i, &c) in row.iter().enumerate() {
                    if i > 0 {
                        out.push(b' ');
                    }
                    out.push(b'0' + c);
                }
                out.push(b'\n');
            }
            out
        }
        PbmFormat::P4 => {
            let mut out = format!("P4\n{} {}\n", grid.width, grid.height).into_bytes();
            let row_bytes = grid.width.div_ceil(8);
            out.reserve(row_bytes * grid.height);
            for row in grid.rows() {
                for chunk in row.chunks(8) {
                    let byte = chunk
                        .iter()
                        .enumerate()
                        .fold(0u8, |acc, (i, &c)| acc | (c << (7 - i)));
                    out.push(byte);
                }
            }
            out
        }
    }
}

/// Decodes P1, P2, P4 or P5 from an in-memory buffer.
pub fn decode_image(bytes: &[u8]) -> Result<BinaryGrid, GridError> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(GridError::UnsupportedMagic {
            found: String::from_utf8_lossy(&bytes[..bytes.len().min(2)]).into_owned(),
        });
    }
    let mut reader = Reader { bytes, pos: 2 };
    match bytes[1] {
        b'1' => {
            let (w, h) = reader.dimensions()?;
            reader.plain_bits(w, h)
        }
        b'4' => {
            let (w, h) = reader.dimensions()?;
            reader.single_whitespace()?;
            reader.packed_bits(w, h)
        }
        b'2' => {
            let (w, h) = reader.dimensions()?;
            reader.maxval()?;
            reader.plain_gray(w, h)
        }
        b'5' => {
            let (w, h) = reader.dimensions()?;
            reader.maxval()?;
            reader.single_whitespace()?;
            reader.packed_gray(w, h)
        }
        _ => Err(GridError::UnsupportedMagic {
            found: String::from_utf8_lossy(&bytes[..2]).into_owned(),
        }),
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn header_err(&self, reason: impl Into<String>) -> GridError {
        GridError::MalformedHeader {
            offset: self.pos,
            reason: reason.into(),
        }
    }

    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&b) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if b == b'\n' || b == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    /// Returns the parsed value and the byte offset where it starts.
    fn header_number(&mut self, what: &str) -> Result<(usize, usize), GridError> {
        let before = self.pos;
        self.skip_whitespace_and_comments();
        if self.pos == before {
            return Err(self.header_err(format!("expected whitespace before {what}")));
        }
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.header_err(format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .map(|v| (v, start))
            .ok_or_else(|| GridError::MalformedHeader {
                offset: start,
                reason: format!("{what} out of range"),
            })
    }

    fn dimensions(&mut self) -> Result<(usize, usize), GridError> {
        let (width, width_at) = self.header_number("width")?;
        let (height, _) = self.header_number("height")?;
        if width == 0 || height == 0 || width.checked_mul(height).is_none() {
            return Err(GridError::MalformedHeader {
                offset: width_at,
                reason: format!("invalid dimensions {width}x{height}"),
            });
        }
        Ok((width, height))
    }

    fn maxval(&mut self) -> Result<(), GridError> {
        let (maxval, at) = self.header_number("maxval")?;
        if maxval != 255 {
            return Err(GridError::MalformedHeader {
                offset: at,
                reason: format!("maxval {maxval} unsupported, only 255 is accepted"),
            });
        }
        Ok(())
    }

    fn single_whitespace(&mut self) -> Result<(), GridError> {
        match self.bytes.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.header_err("expected single whitespace before raster")),
        }
    }

    fn plain_bits(&mut self, width: usize, height: usize) -> Result<BinaryGrid, GridError> {
        let total = width * height;
        let mut cells = Vec::with_capacity(total);
        while cells.len() < total {
            self.skip_whitespace_and_comments();
            match self.bytes.get(self.pos) {
                None => {
                    return Err(GridError::Truncated {
                        offset: self.pos,
                        expected: total - cells.len(),
                    })
                }
                Some(b'0') => cells.push(0),
                Some(b'1') => cells.push(1),
                Some(&other) => {
                    return Err(GridError::InvalidPixel {
                        offset: self.pos,
                        value: (other as char).to_string(),
                    })
                }
            }
            self.pos += 1;
        }
        Ok(BinaryGrid::from_raw(width, height, cells))
    }

    fn packed_bits(&mut self, width: usize, height: usize) -> Result<BinaryGrid, GridError> {
        let row_bytes = width.div_ceil(8);
        let needed = row_bytes * height;
        let raster = &self.bytes[self.pos..];
        if raster.len() < needed {
            let rows_present = raster.len() / row_bytes;
            return Err(GridError::Truncated {
                offset: self.bytes.len(),
                expected: width * (height - rows_present),
            });
        }
        let mut cells = Vec::with_capacity(width * height);
        for row in raster[..needed].chunks_exact(row_bytes) {
            cells.extend((0..width).map(|c| (row[c / 8] >> (7 - c % 8)) & 1));
        }
        self.pos += needed;
        Ok(BinaryGrid::from_raw(width, height, cells))
    }

    fn plain_gray(&mut self, width: usize, height: usize) -> Result<BinaryGrid, GridError> {
        let total = width * height;
        let mut gray = Vec::with_capacity(total);
        while gray.len() < total {
            self.skip_whitespace_and_comments();
            let start = self.pos;
            while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
                self.pos += 1;
            }
            if start == self.pos {
                return match self.bytes.get(self.pos) {
                    None => Err(GridError::Truncated {
                        offset: self.pos,
                        expected: total - gray.len(),
                    }),
                    Some(&other) => Err(GridError::InvalidPixel {
                        offset: self.pos,
                        value: (other as char).to_string(),
                    }),
                };
            }
            let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap_or_default();
            match text.parse::<u16>() {
                Ok(v) if v <= 255 => gray.push(v as u8),
                _ => {
                    return Err(GridError::InvalidPixel {
                        offset: start,
                        value: text.to_string(),
                    })
                }
            }
        }
        BinaryGrid::from_gray(width, height, &gray)
    }

    fn packed_gray(&mut self, width: usize, height: usize) -> Result<BinaryGrid, GridError> {
        let total = width * height;
        let raster = &self.bytes[self.pos..];
        if raster.len() < total {
            return Err(GridError::Truncated {
                offset: self.bytes.len(),
                expected: total - raster.len(),
            });
        }
        self.pos += total;
        BinaryGrid::from_gray(width, height, &raster[..total])
    }
}
