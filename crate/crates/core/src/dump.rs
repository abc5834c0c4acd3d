//! Binary field snapshots.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! offset size  content
//! 0      6     magic bytes "NLSKP1"
//! 6      1     dimension d (1 or 2)
//! 7      1     0 = real samples, 1 = complex samples
//! 8      4*d   grid points per axis, u32
//! ..     8*d   box lengths per axis, f64
//! ..     rest  samples, f64, x-fastest; complex fields interleave re, im
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ComplexField, ScalarField};
use crate::grid::PeriodicGrid;

const MAGIC: &[u8; 6] = b"NLSKP1";

/// A snapshot of either field flavor, as stored on disk.
#[derive(Debug, Clone)]
pub enum FieldDump {
    Scalar(ScalarField),
    Complex(ComplexField),
}

impl FieldDump {
    pub fn grid(&self) -> &Arc<PeriodicGrid> {
        match self {
            FieldDump::Scalar(f) => &f.grid,
            FieldDump::Complex(f) => &f.grid,
        }
    }

    pub fn into_complex(self) -> ComplexField {
        match self {
            FieldDump::Scalar(f) => f.to_complex(),
            FieldDump::Complex(f) => f,
        }
    }
}

fn header(grid: &PeriodicGrid, complex: bool) -> Vec<u8> {
    let mut buf = Vec::with_capacity(8 + 12 * grid.dim());
    buf.extend_from_slice(MAGIC);
    buf.push(grid.dim() as u8);
    buf.push(u8::from(complex));
    for &n in grid.shape() {
        buf.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for &l in grid.lengths() {
        buf.extend_from_slice(&l.to_le_bytes());
    }
    buf
}

pub fn write_field(path: &Path, dump: &FieldDump) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    let put = |w: &mut BufWriter<File>, bytes: &[u8]| -> Result<()> {
        w.write_all(bytes).map_err(|e| Error::io(path, e))
    };
    match dump {
        FieldDump::Scalar(f) => {
            put(&mut w, &header(&f.grid, false))?;
            for &v in &f.data {
                put(&mut w, &v.to_le_bytes())?;
            }
        }
        FieldDump::Complex(f) => {
            put(&mut w, &header(&f.grid, true))?;
            for z in &f.data {
                put(&mut w, &z.re.to_le_bytes())?;
                put(&mut w, &z.im.to_le_bytes())?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_field(path: &Path) -> Result<FieldDump> {
    let mut r = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
    let mut take = |n: usize| -> Result<Vec<u8>> {
        let mut buf = vec![0u8; n];
        r.read_exact(&mut buf).map_err(|e| Error::io(path, e))?;
        Ok(buf)
    };
    let magic = take(6)?;
    if magic != MAGIC {
        return Err(Error::Dump(format!("{}: bad magic {magic:02x?}", path.display())));
    }
    let dim = take(1)?[0] as usize;
    if !(1..=2).contains(&dim) {
        return Err(Error::Dump(format!("{}: dimension {dim} not supported", path.display())));
    }
    let complex = match take(1)?[0] {
        0 => false,
        1 => true,
        other => return Err(Error::Dump(format!("{}: bad sample flag {other}", path.display()))),
    };
    let mut shape = Vec::with_capacity(dim);
    for _ in 0..dim {
        let b = take(4)?;
        shape.push(u32::from_le_bytes(b.try_into().unwrap()) as usize);
    }
    let mut lengths = Vec::with_capacity(dim);
    for _ in 0..dim {
        let b = take(8)?;
        lengths.push(f64::from_le_bytes(b.try_into().unwrap()));
    }
    let grid = Arc::new(
        PeriodicGrid::new(&shape, &lengths)
            .map_err(|e| Error::Dump(format!("{}: {e}", path.display())))?,
    );
    let n = grid.len();
    let floats_expected = if complex { 2 * n } else { n };
    let payload = take(8 * floats_expected)?;
    // the payload must end exactly at the sample count
    let mut extra = [0u8; 1];
    match r.read(&mut extra) {
        Ok(0) => {}
        Ok(_) => {
            return Err(Error::Dump(format!("{}: trailing bytes after samples", path.display())))
        }
        Err(e) => return Err(Error::io(path, e)),
    }
    let floats: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if complex {
        let data: Vec<Complex64> =
            floats.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
        Ok(FieldDump::Complex(ComplexField { grid, data }))
    } else {
        Ok(FieldDump::Scalar(ScalarField { grid, data: floats }))
    }
}
