//! Comma-separated text. Real matrices have one field per entry; complex
//! matrices have two (real part, imaginary part).

use std::path::Path;

use crate::error::{Error, Result};
use crate::prelude::*;

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse { line, msg: format!("{other:?}") },
    }
}

pub fn write_csv<T: Scalar>(path: impl AsRef<Path>, a: &Matrix<T>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(csv_err)?;
    for i in 0..a.nrows() {
        let mut rec = Vec::with_capacity(a.ncols() * 2);
        for z in a.row(i) {
            rec.push(format!("{:e}", z.re()));
            if T::IS_COMPLEX {
                rec.push(format!("{:e}", z.im()));
            }
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// One value per line.
pub fn write_csv_vector<R: RealScalar>(path: impl AsRef<Path>, v: &[R]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(csv_err)?;
    for x in v {
        w.write_record([format!("{x:e}")]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<Matrix<T>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_path(path).map_err(csv_err)?;
    let per = if T::IS_COMPLEX { 2 } else { 1 };
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|f| {
                let v: f64 = f.trim().parse().map_err(|_| Error::Parse { line: i + 1, msg: format!("bad number `{f}`") })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Parse { line: i + 1, msg: format!("non-finite value `{f}`") })
                }
            })
            .collect::<Result<_>>()?;
        if vals.len() % per != 0 {
            return Err(Error::Parse { line: i + 1, msg: "odd field count for a complex row".into() });
        }
        let c = vals.len() / per;
        if *cols.get_or_insert(c) != c {
            return Err(Error::Parse { line: i + 1, msg: format!("row has {c} entries, expected {}", cols.unwrap_or(0)) });
        }
        data.extend(vals.chunks(per).map(|p| {
            let im = if per == 2 { p[1] } else { 0.0 };
            T::from_parts(T::Real::lit(p[0]), T::Real::lit(im)).expect("field matches")
        }));
        rows += 1;
    }
    Matrix::from_vec(rows, cols.unwrap_or(0), data)
}
