//! Field serialization.
//!
//! Binary layout (little-endian): 4-byte magic `YFP1`, `n` as `u32`, `L` as
//! `f64`, then `n^3` values as `f64` in row-major `(i, j, k)` order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::GridSpec3D;
use crate::scalar::Real;

pub const FIELD_MAGIC: &[u8; 4] = b"YFP1";
pub const FIELD_HEADER_LEN: usize = 16;

pub fn write_field<T: Real, W: Write>(field: &ScalarField<T>, mut out: W) -> Result<()> {
    let grid = field.grid();
    let n = u32::try_from(grid.points_per_axis())
        .map_err(|_| Error::Format("n does not fit in 32 bits".into()))?;
    out.write_all(FIELD_MAGIC)?;
    out.write_all(&n.to_le_bytes())?;
    out.write_all(&grid.box_length().as_f64().to_le_bytes())?;
    for &v in field.values() {
        out.write_all(&v.as_f64().to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_field<T: Real, R: Read>(mut input: R) -> Result<ScalarField<T>> {
    let mut header = [0u8; FIELD_HEADER_LEN];
    input
        .read_exact(&mut header)
        .map_err(|e| Error::Format(format!("truncated header: {e}")))?;
    if &header[0..4] != FIELD_MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let n = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let l = f64::from_le_bytes(header[8..16].try_into().unwrap());
    let grid = GridSpec3D::new(T::lit(l), n)?;
    let mut values = Vec::with_capacity(grid.len());
    let mut buf = [0u8; 8];
    for _ in 0..grid.len() {
        input
            .read_exact(&mut buf)
            .map_err(|e| Error::Format(format!("truncated payload: {e}")))?;
        values.push(T::lit(f64::from_le_bytes(buf)));
    }
    if input.read(&mut buf)? != 0 {
        return Err(Error::Format("trailing bytes after payload".into()));
    }
    ScalarField::from_values(grid, values)
}

pub fn save_field<T: Real>(field: &ScalarField<T>, path: impl AsRef<Path>) -> Result<()> {
    write_field(field, BufWriter::new(File::create(path)?))
}

pub fn load_field<T: Real>(path: impl AsRef<Path>) -> Result<ScalarField<T>> {
    read_field(BufReader::new(File::open(path)?))
}

/// CSV with header `i,j,k,value`, one row per grid point.
pub fn write_field_csv<T: Real, W: Write>(field: &ScalarField<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "j", "k", "value"])?;
    let grid = field.grid();
    for (idx, v) in field.values().iter().enumerate() {
        let (i, j, k) = grid.unravel(idx);
        w.serialize((i, j, k, v.as_f64()))?;
    }
    w.flush()?;
    Ok(())
}
