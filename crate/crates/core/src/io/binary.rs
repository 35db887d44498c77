//! Raw little-endian matrix format.
//!
//! Layout: 8-byte magic (`LKRMATR1` real, `LKRMATC1` complex), rows and
//! columns as `u64`, then the entries row by row as `f64`, with complex
//! entries stored as (re, im) pairs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::prelude::*;

pub const MAGIC_REAL: [u8; 8] = *b"LKRMATR1";
pub const MAGIC_COMPLEX: [u8; 8] = *b"LKRMATC1";
pub const HEADER_LEN: usize = 24;

/// Parsed header of a binary matrix file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BinaryHeader {
    pub rows: usize,
    pub cols: usize,
    pub complex: bool,
}

impl BinaryHeader {
    pub fn row_bytes(&self) -> usize {
        self.cols * if self.complex { 16 } else { 8 }
    }
}

pub fn write_binary<T: Scalar>(path: impl AsRef<Path>, a: &Matrix<T>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_binary_to(&mut w, a)?;
    w.flush()?;
    Ok(())
}

pub fn write_binary_to<T: Scalar, W: Write>(w: &mut W, a: &Matrix<T>) -> Result<()> {
    w.write_all(if T::IS_COMPLEX { &MAGIC_COMPLEX } else { &MAGIC_REAL })?;
    w.write_all(&(a.nrows() as u64).to_le_bytes())?;
    w.write_all(&(a.ncols() as u64).to_le_bytes())?;
    for z in a.as_slice() {
        w.write_all(&z.re().to_f64().unwrap_or(f64::NAN).to_le_bytes())?;
        if T::IS_COMPLEX {
            w.write_all(&z.im().to_f64().unwrap_or(f64::NAN).to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_header<R: Read>(r: &mut R) -> Result<BinaryHeader> {
    let mut h = [0u8; HEADER_LEN];
    r.read_exact(&mut h)?;
    let complex = match &h[..8] {
        m if m == MAGIC_REAL => false,
        m if m == MAGIC_COMPLEX => true,
        _ => return Err(Error::Parse { line: 0, msg: "not a binary matrix file (bad magic)".into() }),
    };
    let rows = u64::from_le_bytes(h[8..16].try_into().expect("8 bytes")) as usize;
    let cols = u64::from_le_bytes(h[16..24].try_into().expect("8 bytes")) as usize;
    Ok(BinaryHeader { rows, cols, complex })
}

/// Decodes `nrows` full rows following the current position.
pub(crate) fn read_rows<T: Scalar, R: Read>(r: &mut R, h: &BinaryHeader, nrows: usize) -> Result<Matrix<T>> {
    if h.complex && !T::IS_COMPLEX {
        return Err(Error::InvalidArgument("complex file cannot be read into a real matrix".into()));
    }
    let mut buf = vec![0u8; nrows * h.row_bytes()];
    r.read_exact(&mut buf)?;
    let width = if h.complex { 16 } else { 8 };
    let f = |b: &[u8]| f64::from_le_bytes(b.try_into().expect("8 bytes"));
    let data = buf
        .chunks_exact(width)
        .map(|c| {
            let re = T::Real::lit(f(&c[..8]));
            let im = if h.complex { T::Real::lit(f(&c[8..])) } else { T::Real::zero() };
            T::from_parts(re, im).expect("complex target")
        })
        .collect();
    Matrix::from_vec(nrows, h.cols, data)
}

pub fn read_binary<T: Scalar>(path: impl AsRef<Path>) -> Result<Matrix<T>> {
    let mut r = BufReader::new(File::open(path)?);
    read_binary_from(&mut r)
}

pub fn read_binary_from<T: Scalar, R: Read>(r: &mut R) -> Result<Matrix<T>> {
    let h = read_header(r)?;
    read_rows(r, &h, h.rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::sketch::gaussian_matrix;

    #[test]
    fn round_trip_is_bitwise() {
        let a = gaussian_matrix::<f64>(7, 5, 1);
        let mut buf = Vec::new();
        write_binary_to(&mut buf, &a).unwrap();
        assert_eq!(buf.len(), HEADER_LEN + 7 * 5 * 8);
        let b: Matrix<f64> = read_binary_from(&mut buf.as_slice()).unwrap();
        assert!(a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| x.to_bits() == y.to_bits()));
        let c = gaussian_matrix::<c64>(3, 4, 2);
        let mut buf = Vec::new();
        write_binary_to(&mut buf, &c).unwrap();
        assert_eq!(read_binary_from::<c64, _>(&mut buf.as_slice()).unwrap(), c);
        assert!(read_binary_from::<f64, _>(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn real_file_into_complex() {
        let a = gaussian_matrix::<f64>(2, 2, 3);
        let mut buf = Vec::new();
        write_binary_to(&mut buf, &a).unwrap();
        let c: Matrix<c64> = read_binary_from(&mut buf.as_slice()).unwrap();
        assert_eq!(c, a.to_complex());
    }

    #[test]
    fn bad_magic_and_truncation() {
        assert!(matches!(read_binary_from::<f64, _>(&mut &b"NOTAMATRIX0000000000000000"[..]), Err(Error::Parse { .. })));
        let a = gaussian_matrix::<f64>(3, 3, 1);
        let mut buf = Vec::new();
        write_binary_to(&mut buf, &a).unwrap();
        buf.truncate(buf.len() - 4);
        assert!(matches!(read_binary_from::<f64, _>(&mut buf.as_slice()), Err(Error::Io(_))));
    }
}
