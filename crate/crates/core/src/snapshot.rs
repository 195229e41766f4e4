//! `RNLS1` field snapshots.
//!
//! Layout (little-endian): the bytes `R N L S`, `u32` version (= 1), `u32 d`,
//! `u32 k`, `d` x `u32` dims, `d` x `f64` lengths, then interleaved `f64`
//! `(re, im)` pairs in row-major order, last axis fastest.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{Grid, GridSpec, MAX_DIM};
use crate::scalar::{lit, to_f64, Real};

pub const MAGIC: [u8; 4] = *b"RNLS";
pub const VERSION: u32 = 1;
pub const FORMAT_NAME: &str = "RNLS1";

pub fn write_field<T: Real, W: Write>(field: &Field<T>, mut out: W) -> Result<()> {
    let spec = field.grid().spec();
    let mut buf = Vec::with_capacity(16 + 12 * spec.d() + 16 * field.len());
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(spec.d() as u32).to_le_bytes());
    buf.extend_from_slice(&(spec.k() as u32).to_le_bytes());
    for &n in spec.dims() {
        buf.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for &l in spec.lengths() {
        buf.extend_from_slice(&l.to_le_bytes());
    }
    for z in field.values() {
        buf.extend_from_slice(&to_f64(z.re).to_le_bytes());
        buf.extend_from_slice(&to_f64(z.im).to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

/// Reads a snapshot and the grid it was written on.
pub fn read_field<T: Real, R: Read>(mut input: R) -> Result<Field<T>> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let mut cur = Cursor { bytes: &bytes, pos: 0 };
    if cur.take(4)? != MAGIC {
        return Err(Error::Format("bad magic bytes".into()));
    }
    let version = cur.u32()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let d = cur.u32()? as usize;
    let k = cur.u32()? as usize;
    if d == 0 || d > MAX_DIM {
        return Err(Error::Format(format!("dimension {d} out of range")));
    }
    let dims = (0..d).map(|_| cur.u32().map(|n| n as usize)).collect::<Result<Vec<_>>>()?;
    let lengths = (0..d).map(|_| cur.f64()).collect::<Result<Vec<_>>>()?;
    let spec = GridSpec::new(d, k, &dims, &lengths)?;
    let total = spec.len();
    if cur.remaining() != 16 * total {
        return Err(Error::Format(format!("expected {} payload bytes, found {}", 16 * total, cur.remaining())));
    }
    let mut values = Vec::with_capacity(total);
    for _ in 0..total {
        let re = cur.f64()?;
        let im = cur.f64()?;
        values.push(Complex::new(lit(re), lit(im)));
    }
    let grid: Arc<Grid<T>> = Grid::new(spec);
    Field::from_values(&grid, values)
}

pub fn save<T: Real>(field: &Field<T>, path: impl AsRef<Path>) -> Result<()> {
    let file = fs::File::create(path)?;
    write_field(field, std::io::BufWriter::new(file))
}

pub fn load<T: Real>(path: impl AsRef<Path>) -> Result<Field<T>> {
    read_field(fs::File::open(path)?)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Format("truncated snapshot".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}
