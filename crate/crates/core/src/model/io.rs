//! Binary and CSV matrix containers.
//!
//! Binary layout: the 8-byte magic `TOPOMAT1`, rows and columns as little-endian `u64`,
//! then `rows * cols` entries in row-major order, each as little-endian `f64` real part
//! followed by imaginary part.

use std::io::{Read, Write};

use crate::error::{Result, TopoError};
use crate::linalg::{c64, CMat};

pub const MAGIC: &[u8; 8] = b"TOPOMAT1";

pub fn write_matrix<W: Write>(mut w: W, m: &CMat) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            w.write_all(&m[(i, j)].re.to_le_bytes())?;
            w.write_all(&m[(i, j)].im.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_matrix<R: Read>(mut r: R) -> Result<CMat> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(TopoError::InvalidSpec("not a matrix container".into()));
    }
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    let rows = u64::from_le_bytes(buf) as usize;
    r.read_exact(&mut buf)?;
    let cols = u64::from_le_bytes(buf) as usize;
    let mut data = vec![0u8; rows * cols * 16];
    r.read_exact(&mut data)?;
    let f = |k: usize| f64::from_le_bytes(data[8 * k..8 * k + 8].try_into().unwrap());
    Ok(CMat::from_fn(rows, cols, |i, j| {
        let k = 2 * (i * cols + j);
        c64::new(f(k), f(k + 1))
    }))
}

/// Writes `row,col,re,im` lines for every entry.
pub fn write_matrix_csv<W: Write>(w: W, m: &CMat) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["row", "col", "re", "im"]).map_err(csv_err)?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.write_record(&[
                i.to_string(),
                j.to_string(),
                format!("{:e}", m[(i, j)].re),
                format!("{:e}", m[(i, j)].im),
            ])
            .map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> TopoError {
    TopoError::Io(std::io::Error::other(e.to_string()))
}
