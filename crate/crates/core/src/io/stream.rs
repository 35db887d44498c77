//! Row-block delivery for single-pass sketching.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::factor::{BasisChoice, SampleBundle};
use crate::io::binary::{read_header, read_rows, BinaryHeader};
use crate::prelude::*;
use crate::rng::stream;
use crate::sketch::{gaussian_matrix, gaussian_matrix_stream};

enum Source<T: Scalar> {
    Binary { reader: Box<dyn Read + Send>, header: BinaryHeader },
    Memory(Arc<Matrix<T>>),
}

/// Consecutive row blocks of an `m x n` matrix, each row delivered once.
pub struct RowBlockStream<T: Scalar> {
    source: Source<T>,
    rows: usize,
    cols: usize,
    block_rows: usize,
    cursor: usize,
    block: usize,
    failed: bool,
}

impl<T: Scalar> RowBlockStream<T> {
    fn new(source: Source<T>, rows: usize, cols: usize, block_rows: usize) -> Result<Self> {
        if block_rows == 0 {
            return Err(Error::InvalidArgument("block_rows must be positive".into()));
        }
        Ok(Self { source, rows, cols, block_rows, cursor: 0, block: 0, failed: false })
    }

    pub fn from_matrix(a: Arc<Matrix<T>>, block_rows: usize) -> Result<Self> {
        let (m, n) = a.shape();
        Self::new(Source::Memory(a), m, n, block_rows)
    }

    /// Streams any reader holding the binary matrix format.
    pub fn from_reader(mut reader: Box<dyn Read + Send>, block_rows: usize) -> Result<Self> {
        let header = read_header(&mut reader)?;
        if header.complex && !T::IS_COMPLEX {
            return Err(Error::InvalidArgument("complex file cannot be streamed into a real matrix".into()));
        }
        Self::new(Source::Binary { reader, header }, header.rows, header.cols, block_rows)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn block_rows(&self) -> usize {
        self.block_rows
    }

    /// Row offset of the next block.
    pub fn cursor(&self) -> usize {
        self.cursor
    }
}

impl<T: Scalar> Iterator for RowBlockStream<T> {
    /// `(first row, block)`.
    type Item = Result<(usize, Matrix<T>)>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.cursor >= self.rows {
            return None;
        }
        let start = self.cursor;
        let nr = self.block_rows.min(self.rows - start);
        let out = match &mut self.source {
            Source::Memory(a) => Ok(a.block(start, 0, nr, self.cols)),
            Source::Binary { reader, header } => read_rows(reader, header, nr)
                .map_err(|e| Error::Stream { block: self.block, msg: e.to_string() }),
        };
        match out {
            Ok(b) => {
                self.cursor += nr;
                self.block += 1;
                Some(Ok((start, b)))
            }
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

/// Opens a binary matrix file as a row-block stream.
pub fn stream_row_blocks<T: Scalar>(path: impl AsRef<Path>, block_rows: usize) -> Result<RowBlockStream<T>> {
    let f = BufReader::new(File::open(path)?);
    RowBlockStream::from_reader(Box::new(f), block_rows)
}

/// Builds a [`SampleBundle`] in one traversal of the stream.
///
/// Each block `A_b` (rows `r`) contributes `Y(r, :) = A_b Ω` and, when
/// `ell_tilde` is given, `Ỹ += A_b^* Ω̃(r, :)`. The test matrices are the
/// ones [`SampleBundle::one_sided`] and [`SampleBundle::two_sided`] draw
/// for the same seed.
pub fn streamed_bundle<T: Scalar>(
    blocks: &mut RowBlockStream<T>,
    ell: usize,
    ell_tilde: Option<usize>,
    seed: u64,
    choice: BasisChoice,
) -> Result<SampleBundle<T>> {
    let (m, n) = (blocks.nrows(), blocks.ncols());
    let omega: Matrix<T> = gaussian_matrix(n, ell, seed);
    let omega_t: Option<Matrix<T>> =
        ell_tilde.map(|lt| gaussian_matrix_stream(m, lt, seed, stream::TEST_MATRIX_LEFT));
    let mut y = Matrix::zeros(m, ell);
    let mut y_t = omega_t.as_ref().map(|o| Matrix::zeros(n, o.ncols()));
    for item in blocks.by_ref() {
        let (start, b) = item?;
        let yb = b.matmul(&omega);
        for i in 0..b.nrows() {
            y.row_mut(start + i).copy_from_slice(yb.row(i));
        }
        if let (Some(o), Some(acc)) = (&omega_t, &mut y_t) {
            let contrib = b.adjoint_matmul(&o.block(start, 0, b.nrows(), o.ncols()));
            for (a, c) in acc.as_mut_slice().iter_mut().zip(contrib.as_slice()) {
                *a += *c;
            }
        }
    }
    let bundle = SampleBundle::from_samples(omega, y, choice)?;
    match (omega_t, y_t) {
        (Some(o), Some(yt)) => bundle.with_adjoint_samples(o, yt),
        _ => Ok(bundle),
    }
}
