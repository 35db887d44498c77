//! Matrix Market exchange format, dense and coordinate.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layout {
    Array,
    Coordinate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Complex,
    Pattern,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_header(line: &str, lineno: usize) -> Result<(Layout, Field, Symmetry)> {
    let toks: Vec<String> = line.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if toks.len() != 5 || toks[0] != "%%matrixmarket" || toks[1] != "matrix" {
        return Err(perr(lineno, format!("expected `%%MatrixMarket matrix <format> <field> <symmetry>`, got `{}`", line.trim())));
    }
    let layout = match toks[2].as_str() {
        "array" => Layout::Array,
        "coordinate" => Layout::Coordinate,
        other => return Err(perr(lineno, format!("unknown format `{other}`"))),
    };
    let field = match toks[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "complex" => Field::Complex,
        "pattern" => Field::Pattern,
        other => return Err(perr(lineno, format!("unknown field `{other}`"))),
    };
    let sym = match toks[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(perr(lineno, format!("unknown symmetry `{other}`"))),
    };
    if layout == Layout::Array && field == Field::Pattern {
        return Err(perr(lineno, "pattern field requires coordinate format"));
    }
    if sym == Symmetry::Hermitian && field != Field::Complex {
        return Err(perr(lineno, "hermitian symmetry requires a complex field"));
    }
    Ok((layout, field, sym))
}

fn parse_num<'a>(toks: &mut impl Iterator<Item = &'a str>, lineno: usize, what: &str) -> Result<f64> {
    let t = toks.next().ok_or_else(|| perr(lineno, format!("missing {what}")))?;
    let v: f64 = t.parse().map_err(|_| perr(lineno, format!("bad {what} `{t}`")))?;
    if !v.is_finite() {
        return Err(perr(lineno, format!("non-finite {what} `{t}`")));
    }
    Ok(v)
}

fn parse_index<'a>(toks: &mut impl Iterator<Item = &'a str>, lineno: usize, bound: usize, what: &str) -> Result<usize> {
    let t = toks.next().ok_or_else(|| perr(lineno, format!("missing {what}")))?;
    let v: usize = t.parse().map_err(|_| perr(lineno, format!("bad {what} `{t}`")))?;
    if v == 0 || v > bound {
        return Err(perr(lineno, format!("{what} {v} out of range 1..={bound}")));
    }
    Ok(v - 1)
}

fn parse_value<'a, T: Scalar>(toks: &mut impl Iterator<Item = &'a str>, field: Field, lineno: usize) -> Result<T> {
    let (re, im) = match field {
        Field::Pattern => (1.0, 0.0),
        Field::Real | Field::Integer => (parse_num(toks, lineno, "value")?, 0.0),
        Field::Complex => (parse_num(toks, lineno, "real part")?, parse_num(toks, lineno, "imaginary part")?),
    };
    T::from_parts(T::Real::lit(re), T::Real::lit(im))
        .ok_or_else(|| perr(lineno, "complex entry cannot be stored in a real matrix"))
}

fn mirror<T: Scalar>(v: T, sym: Symmetry) -> T {
    match sym {
        Symmetry::General | Symmetry::Symmetric => v,
        Symmetry::SkewSymmetric => -v,
        Symmetry::Hermitian => v.conj(),
    }
}

/// Reads a Matrix Market file into a dense matrix. Symmetric storage is
/// mirrored; duplicate coordinate entries are rejected.
pub fn read_matrix_market<T: Scalar>(path: impl AsRef<Path>) -> Result<Matrix<T>> {
    parse_matrix_market(BufReader::new(File::open(path)?))
}

pub fn parse_matrix_market<T: Scalar, R: BufRead>(reader: R) -> Result<Matrix<T>> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (lineno, header) = match lines.next() {
        Some((n, l)) => (n, l?),
        None => return Err(perr(1, "empty file")),
    };
    let (layout, field, sym) = parse_header(&header, lineno)?;

    let mut body = lines.filter_map(|(n, l)| match l {
        Ok(s) if s.trim().is_empty() || s.trim_start().starts_with('%') => None,
        other => Some((n, other)),
    });
    let (size_line, size) = body.next().ok_or_else(|| perr(lineno + 1, "missing size line"))?;
    let size = size?;
    let mut toks = size.split_whitespace();
    let dim = |t: Option<&str>, what: &str| -> Result<usize> {
        t.ok_or_else(|| perr(size_line, format!("missing {what}")))?
            .parse()
            .map_err(|_| perr(size_line, format!("bad {what}")))
    };
    let m = dim(toks.next(), "row count")?;
    let n = dim(toks.next(), "column count")?;
    if sym != Symmetry::General && m != n {
        return Err(perr(size_line, format!("{m}x{n} matrix cannot be symmetric")));
    }
    let mut a = Matrix::zeros(m, n);

    match layout {
        Layout::Array => {
            // column-major; symmetric variants store the lower triangle only
            let mut cells = Vec::new();
            for j in 0..n {
                let start = match sym {
                    Symmetry::General => 0,
                    Symmetry::Symmetric | Symmetry::Hermitian => j,
                    Symmetry::SkewSymmetric => j + 1,
                };
                cells.extend((start..m).map(|i| (i, j)));
            }
            let mut it = cells.into_iter();
            for (ln, line) in body {
                let line = line?;
                let mut toks = line.split_whitespace();
                let (i, j) = it.next().ok_or_else(|| perr(ln, "more entries than the size line declares"))?;
                let v: T = parse_value(&mut toks, field, ln)?;
                a[(i, j)] = v;
                if i != j && sym != Symmetry::General {
                    a[(j, i)] = mirror(v, sym);
                }
            }
            if it.next().is_some() {
                return Err(perr(size_line, "fewer entries than the size line declares"));
            }
        }
        Layout::Coordinate => {
            let nnz = dim(toks.next(), "entry count")?;
            let mut seen = HashSet::with_capacity(nnz);
            let mut count = 0;
            for (ln, line) in body {
                let line = line?;
                let mut toks = line.split_whitespace();
                let i = parse_index(&mut toks, ln, m, "row index")?;
                let j = parse_index(&mut toks, ln, n, "column index")?;
                if sym != Symmetry::General && i < j {
                    return Err(perr(ln, "symmetric storage expects the lower triangle"));
                }
                if !seen.insert((i, j)) {
                    return Err(perr(ln, format!("duplicate entry ({}, {})", i + 1, j + 1)));
                }
                let v: T = parse_value(&mut toks, field, ln)?;
                a[(i, j)] = v;
                if i != j && sym != Symmetry::General {
                    a[(j, i)] = mirror(v, sym);
                }
                count += 1;
            }
            if count != nnz {
                return Err(perr(size_line, format!("declared {nnz} entries, found {count}")));
            }
        }
    }
    Ok(a)
}

/// Writes `a` as a dense general array.
pub fn write_matrix_market<T: Scalar>(path: impl AsRef<Path>, a: &Matrix<T>) -> Result<()> {
    let mut w = std::io::BufWriter::new(File::create(path)?);
    write_matrix_market_to(&mut w, a)?;
    w.flush()?;
    Ok(())
}

pub fn write_matrix_market_to<T: Scalar, W: Write>(w: &mut W, a: &Matrix<T>) -> Result<()> {
    let field = if T::IS_COMPLEX { "complex" } else { "real" };
    writeln!(w, "%%MatrixMarket matrix array {field} general")?;
    writeln!(w, "{} {}", a.nrows(), a.ncols())?;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let z = a[(i, j)];
            if T::IS_COMPLEX {
                writeln!(w, "{:e} {:e}", z.re(), z.im())?;
            } else {
                writeln!(w, "{:e}", z.re())?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    fn parse<T: Scalar>(s: &str) -> Result<Matrix<T>> {
        parse_matrix_market(s.as_bytes())
    }

    #[test]
    fn array_is_column_major() {
        let a: Matrix<f64> = parse("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n").unwrap();
        assert_eq!(a, Matrix::from_rows(&[[1.0, 3.0], [2.0, 4.0]]));
    }

    #[test]
    fn coordinate_symmetric_mirrors() {
        let a: Matrix<f64> =
            parse("%%MatrixMarket matrix coordinate real symmetric\n% comment\n2 2 2\n1 1 1.5\n2 1 5\n").unwrap();
        assert_eq!(a[(0, 1)], 5.0);
        assert_eq!(a[(1, 0)], 5.0);
    }

    #[test]
    fn header_typo_names_line() {
        let e = parse::<f64>("%%MatrixMarkt matrix array real general\n1 1\n1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn rejects_bad_entries() {
        let dup = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n1 1 2\n";
        assert!(matches!(parse::<f64>(dup), Err(Error::Parse { line: 4, .. })));
        let oob = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n";
        assert!(matches!(parse::<f64>(oob), Err(Error::Parse { line: 3, .. })));
        let nan = "%%MatrixMarket matrix array real general\n1 1\nnan\n";
        assert!(matches!(parse::<f64>(nan), Err(Error::Parse { line: 3, .. })));
        let short = "%%MatrixMarket matrix array real general\n2 1\n1\n";
        assert!(parse::<f64>(short).is_err());
        let cplx = "%%MatrixMarket matrix array complex general\n1 1\n1 2\n";
        assert!(parse::<f64>(cplx).is_err());
    }

    #[test]
    fn hermitian_array() {
        let a: Matrix<c64> = parse("%%MatrixMarket matrix array complex hermitian\n2 2\n1 0\n2 3\n4 0\n").unwrap();
        assert_eq!(a[(1, 0)], c64::new(2.0, 3.0));
        assert_eq!(a[(0, 1)], c64::new(2.0, -3.0));
    }

    #[test]
    fn round_trip() {
        let a = crate::sketch::gaussian_matrix::<c64>(4, 3, 1);
        let mut buf = Vec::new();
        write_matrix_market_to(&mut buf, &a).unwrap();
        let b: Matrix<c64> = parse_matrix_market(buf.as_slice()).unwrap();
        assert_eq!(a, b);
    }
}
