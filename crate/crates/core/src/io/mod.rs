//! Matrix files and factor persistence.

pub mod binary;
pub mod delimited;
pub mod mm;
pub mod stream;

pub use binary::{read_binary, write_binary};
pub use delimited::{read_csv, write_csv, write_csv_vector};
pub use mm::{parse_matrix_market, read_matrix_market, write_matrix_market};
pub use stream::{stream_row_blocks, streamed_bundle, RowBlockStream};

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::{IdSide, InterpolativeDecomp, PartialEig, PartialQr, PartialSvd};
use crate::prelude::*;
use crate::sketch::SketchSpec;

pub const MANIFEST_NAME: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileFormat {
    Mm,
    Binary,
    Csv,
}

impl FileFormat {
    pub fn extension(self) -> &'static str {
        match self {
            FileFormat::Mm => "mtx",
            FileFormat::Binary => "bin",
            FileFormat::Csv => "csv",
        }
    }

    /// Guesses the format from a file extension.
    pub fn from_path(p: &Path) -> Option<Self> {
        match p.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "mtx" | "mm" => Some(FileFormat::Mm),
            "bin" | "lkr" => Some(FileFormat::Binary),
            "csv" => Some(FileFormat::Csv),
            _ => None,
        }
    }
}

impl fmt::Display for FileFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FileFormat::Mm => "mm",
            FileFormat::Binary => "binary",
            FileFormat::Csv => "csv",
        })
    }
}

impl FromStr for FileFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mm" | "mtx" => Ok(FileFormat::Mm),
            "binary" | "bin" => Ok(FileFormat::Binary),
            "csv" => Ok(FileFormat::Csv),
            other => Err(Error::InvalidArgument(format!("unknown file format `{other}`"))),
        }
    }
}

/// Reads a matrix, choosing the format by extension.
pub fn read_matrix<T: Scalar>(path: impl AsRef<Path>) -> Result<Matrix<T>> {
    let p = path.as_ref();
    match FileFormat::from_path(p) {
        Some(FileFormat::Mm) => read_matrix_market(p),
        Some(FileFormat::Binary) => read_binary(p),
        Some(FileFormat::Csv) => read_csv(p),
        None => Err(Error::InvalidArgument(format!("cannot infer the format of {}", p.display()))),
    }
}

pub fn write_matrix<T: Scalar>(path: impl AsRef<Path>, a: &Matrix<T>, format: FileFormat) -> Result<()> {
    match format {
        FileFormat::Mm => write_matrix_market(path, a),
        FileFormat::Binary => write_binary(path, a),
        FileFormat::Csv => write_csv(path, a),
    }
}

/// Any factorization that can be persisted.
#[derive(Clone, Debug)]
pub enum Factors<T: Scalar> {
    Svd(PartialSvd<T>),
    Eig(PartialEig<T>),
    Qr(PartialQr<T>),
    Id(InterpolativeDecomp<T>),
    Range(Matrix<T>),
}

impl<T: Scalar> Factors<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            Factors::Svd(_) => "svd",
            Factors::Eig(_) => "eig",
            Factors::Qr(_) => "qr",
            Factors::Id(_) => "id",
            Factors::Range(_) => "range",
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            Factors::Svd(f) => f.rank(),
            Factors::Eig(f) => f.rank(),
            Factors::Qr(f) => f.q.ncols(),
            Factors::Id(f) => f.rank(),
            Factors::Range(q) => q.ncols(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub rows: usize,
    pub cols: usize,
}

/// Provenance of a run, recorded in the manifest.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub m: usize,
    pub n: usize,
    pub spec: Option<SketchSpec>,
    pub seed: Option<u64>,
    pub passes: Option<u64>,
    pub matvecs: Option<u64>,
    pub est_error: Option<f64>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub extra: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub kind: String,
    pub scalar: String,
    pub format: FileFormat,
    pub rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id_side: Option<IdSide>,
    pub files: BTreeMap<String, FileEntry>,
    #[serde(flatten)]
    pub run: RunInfo,
}

impl Manifest {
    pub fn read(dir: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(dir.as_ref().join(MANIFEST_NAME))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })
    }
}

fn scalar_name<T: Scalar>() -> String {
    let bits = std::mem::size_of::<T::Real>() * 8;
    format!("{}{bits}", if T::IS_COMPLEX { "c" } else { "f" })
}

fn real_column<T: Scalar>(v: &[T::Real]) -> Matrix<T> {
    Matrix::from_fn(v.len(), 1, |i, _| T::from_real(v[i]))
}

fn index_column<T: Scalar>(v: &[usize]) -> Matrix<T> {
    Matrix::from_fn(v.len(), 1, |i, _| T::from_real(T::Real::from_count(v[i])))
}

/// Writes `path` through a temporary sibling that is renamed on success.
pub fn write_atomic(path: &Path, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    match write(&tmp) {
        Ok(()) => Ok(fs::rename(&tmp, path)?),
        Err(e) => {
            let _ = fs::remove_file(&tmp);
            Err(e)
        }
    }
}

/// Writes one file per factor and a JSON manifest into `dir`.
///
/// All factor files are written under temporary names first and renamed
/// once every write succeeded; the manifest is renamed last.
pub fn write_factors<T: Scalar>(f: &Factors<T>, dir: impl AsRef<Path>, format: FileFormat, run: &RunInfo) -> Result<Manifest> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let parts: Vec<(&str, Matrix<T>, bool)> = match f {
        Factors::Svd(s) => vec![("u", s.u.clone(), false), ("sigma", real_column(&s.sigma), true), ("v", s.v.clone(), false)],
        Factors::Eig(e) => vec![("u", e.u.clone(), false), ("lambda", real_column(&e.lambda), true)],
        Factors::Qr(q) => vec![("q", q.q.clone(), false), ("r", q.r.clone(), false)],
        Factors::Id(id) => vec![("j", index_column(&id.j), true), ("x", id.x.clone(), false)],
        Factors::Range(q) => vec![("q", q.clone(), false)],
    };

    let mut files = BTreeMap::new();
    let mut staged: Vec<(PathBuf, PathBuf)> = Vec::new();
    let result = (|| -> Result<()> {
        for (name, m, is_real_vec) in &parts {
            let fname = format!("{name}.{}", format.extension());
            let target = dir.join(&fname);
            let tmp = dir.join(format!(".{fname}.tmp"));
            if *is_real_vec && format == FileFormat::Csv {
                let v: Vec<T::Real> = m.as_slice().iter().map(|z| z.re()).collect();
                write_csv_vector(&tmp, &v)?;
            } else {
                write_matrix(&tmp, m, format)?;
            }
            staged.push((tmp, target));
            files.insert(name.to_string(), FileEntry { path: fname, rows: m.nrows(), cols: m.ncols() });
        }
        Ok(())
    })();
    if let Err(e) = result {
        for (tmp, _) in &staged {
            let _ = fs::remove_file(tmp);
        }
        return Err(e);
    }
    for (tmp, target) in &staged {
        fs::rename(tmp, target)?;
    }

    let manifest = Manifest {
        version: MANIFEST_VERSION,
        kind: f.kind().into(),
        scalar: scalar_name::<T>(),
        format,
        rank: f.rank(),
        id_side: if let Factors::Id(id) = f { Some(id.side) } else { None },
        files,
        run: run.clone(),
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    write_atomic(&dir.join(MANIFEST_NAME), |p| Ok(fs::write(p, text)?))?;
    Ok(manifest)
}

/// Reads back what [`write_factors`] wrote.
pub fn read_factors<T: Scalar>(dir: impl AsRef<Path>) -> Result<(Manifest, Factors<T>)> {
    let dir = dir.as_ref();
    let man = Manifest::read(dir)?;
    let load = |name: &str| -> Result<Matrix<T>> {
        let e = man.files.get(name).ok_or_else(|| Error::InvalidArgument(format!("manifest lacks `{name}`")))?;
        let m: Matrix<T> = read_matrix(dir.join(&e.path))?;
        if m.shape() != (e.rows, e.cols) {
            return Err(Error::DimensionMismatch(format!(
                "{} is {}x{}, manifest says {}x{}",
                e.path,
                m.nrows(),
                m.ncols(),
                e.rows,
                e.cols
            )));
        }
        Ok(m)
    };
    let reals = |m: Matrix<T>| -> Vec<T::Real> { m.as_slice().iter().map(|z| z.re()).collect() };
    let f = match man.kind.as_str() {
        "svd" => Factors::Svd(PartialSvd { u: load("u")?, sigma: reals(load("sigma")?), v: load("v")? }),
        "eig" => Factors::Eig(PartialEig { u: load("u")?, lambda: reals(load("lambda")?) }),
        "qr" => Factors::Qr(PartialQr { q: load("q")?, r: load("r")? }),
        "id" => {
            let j = reals(load("j")?).iter().map(|v| v.to_usize().unwrap_or(usize::MAX)).collect();
            let side = man.id_side.unwrap_or(IdSide::Column);
            Factors::Id(InterpolativeDecomp { j, x: load("x")?, side, swaps: 0 })
        }
        "range" => Factors::Range(load("q")?),
        other => return Err(Error::InvalidArgument(format!("unknown factor kind `{other}`"))),
    };
    Ok((man, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::column_id;
    use crate::sketch::{gaussian_matrix, SketchKind};

    fn sample_svd() -> PartialSvd<f64> {
        PartialSvd { u: gaussian_matrix(6, 3, 1), sigma: vec![3.0, 2.0, 1.0 / 3.0], v: gaussian_matrix(5, 3, 2) }
    }

    fn run() -> RunInfo {
        RunInfo {
            m: 6,
            n: 5,
            spec: Some(SketchSpec { kind: SketchKind::Gaussian, ell: 8, power_q: 1, seed: 42 }),
            seed: Some(42),
            passes: Some(3),
            matvecs: Some(16),
            est_error: Some(1.5e-3),
            extra: serde_json::Value::Null,
        }
    }

    #[test]
    fn binary_round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let s = sample_svd();
        let man = write_factors(&Factors::Svd(s.clone()), dir.path(), FileFormat::Binary, &run()).unwrap();
        assert_eq!(man.run.seed, Some(42));
        let (back, f) = read_factors::<f64>(dir.path()).unwrap();
        assert_eq!(back, man);
        let Factors::Svd(g) = f else { panic!("kind") };
        assert_eq!(g, s);
        let text = fs::read_to_string(dir.path().join(MANIFEST_NAME)).unwrap();
        assert!(text.contains("\"seed\": 42"));
        assert!(!dir.path().join(".u.bin.tmp").exists());
    }

    #[test]
    fn csv_sigma_one_per_line() {
        let dir = tempfile::tempdir().unwrap();
        write_factors(&Factors::Svd(sample_svd()), dir.path(), FileFormat::Csv, &run()).unwrap();
        let text = fs::read_to_string(dir.path().join("sigma.csv")).unwrap();
        let vals: Vec<f64> = text.lines().map(|l| l.parse().unwrap()).collect();
        assert_eq!(vals.len(), 3);
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn id_and_mm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let a = gaussian_matrix::<f64>(8, 10, 3);
        let id = column_id(&a, 4).unwrap();
        write_factors(&Factors::Id(id.clone()), dir.path(), FileFormat::Mm, &RunInfo::default()).unwrap();
        let (_, f) = read_factors::<f64>(dir.path()).unwrap();
        let Factors::Id(g) = f else { panic!("kind") };
        assert_eq!(g.j, id.j);
        assert_eq!(g.x, id.x);
    }

    #[test]
    fn unwritable_dir_fails() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain");
        fs::write(&file, "x").unwrap();
        assert!(write_factors(&Factors::Range(Matrix::<f64>::eye(3, 1)), file.join("sub"), FileFormat::Binary, &RunInfo::default()).is_err());
    }
}
