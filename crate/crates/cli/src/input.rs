use lowrank::linalg::singular_values;
use lowrank::oracle::{laplace_bie_matrix, synthetic_matrix, SpectrumKind, SyntheticSpec};
use lowrank::rng::mix;
use lowrank::sketch::haar_orthonormal;
use lowrank::{Error, Matrix, RealScalar, Result, Scalar};

use crate::args::InputArgs;

/// A generated input: either a spectrum for `U diag(σ) V^*` or the
/// Laplace potential matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum Synthetic {
    Spectrum(SpectrumKind),
    /// `σ_j = max(rho^j, floor)`.
    Tail { rho: f64, floor: f64 },
    Laplace(usize),
}

fn num<F: std::str::FromStr>(s: &str, what: &str) -> Result<F> {
    s.parse().map_err(|_| Error::InvalidArgument(format!("bad {what} `{s}`")))
}

pub fn parse_synthetic(s: &str) -> Result<Synthetic> {
    let parts: Vec<&str> = s.split(':').collect();
    let want = |n: usize| -> Result<()> {
        if parts.len() != n + 1 {
            return Err(Error::InvalidArgument(format!("`{}` takes {n} parameter(s), got `{s}`", parts[0])));
        }
        Ok(())
    };
    Ok(match parts[0] {
        "exact_rank" => {
            want(1)?;
            Synthetic::Spectrum(SpectrumKind::ExactRank { k: num(parts[1], "rank")? })
        }
        "power" => {
            want(1)?;
            Synthetic::Spectrum(SpectrumKind::PowerDecay { alpha: num(parts[1], "exponent")? })
        }
        "exp" => {
            want(1)?;
            Synthetic::Spectrum(SpectrumKind::ExpDecay { rho: num(parts[1], "ratio")? })
        }
        "flat" => {
            want(2)?;
            Synthetic::Spectrum(SpectrumKind::Flat { sigma: num(parts[1], "value")?, count: num(parts[2], "count")? })
        }
        "tail" => {
            want(2)?;
            Synthetic::Tail { rho: num(parts[1], "ratio")?, floor: num(parts[2], "floor")? }
        }
        "laplace" => {
            want(1)?;
            Synthetic::Laplace(num(parts[1], "node count")?)
        }
        other => return Err(Error::InvalidArgument(format!("unknown synthetic input `{other}`"))),
    })
}

/// `σ_j = max(rho^j, floor)` for `j = 1..=r`.
pub fn floored_tail(rho: f64, floor: f64, r: usize) -> Vec<f64> {
    (1..=r).map(|j| rho.powi(j as i32).max(floor)).collect()
}

pub struct Loaded<T: Scalar> {
    pub a: Matrix<T>,
    /// Singular values when known by construction.
    pub sigma: Option<Vec<f64>>,
    pub label: String,
}

/// Loads or generates the input. `hermitian` asks generated spectra for
/// the PSD matrix `U diag(σ) U^*`.
pub fn load<T: Scalar>(args: &InputArgs, hermitian: bool, seed: u64) -> Result<Loaded<T>> {
    if let Some(p) = &args.input {
        let a = lowrank::io::read_matrix::<T>(p)?;
        return Ok(Loaded { a, sigma: None, label: p.display().to_string() });
    }
    let Some(spec) = &args.synthetic else {
        return Err(Error::InvalidArgument("one of --input or --synthetic is required".into()));
    };
    let (m, n) = if hermitian { (args.n, args.n) } else { (args.m, args.n) };
    let kind = match parse_synthetic(spec)? {
        Synthetic::Laplace(nodes) => {
            let a: Matrix<T> = laplace_bie_matrix(nodes)?;
            let s = singular_values(&a)?.iter().map(|x| x.as_f64()).collect();
            return Ok(Loaded { a, sigma: Some(s), label: spec.clone() });
        }
        Synthetic::Tail { rho, floor } => SpectrumKind::Given { sigma: floored_tail(rho, floor, m.min(n)) },
        Synthetic::Spectrum(kind) => kind,
    };
    let syn = SyntheticSpec::new(m, n, kind, mix(seed, 0x5359_4e54));
    if hermitian {
        let sigma = syn.sigma()?;
        let u: Matrix<T> = haar_orthonormal(n, n, syn.seed);
        let us = Matrix::from_fn(n, n, |i, j| u[(i, j)].scale(T::Real::lit(sigma[j])));
        let a = us.matmul_adjoint(&u).hermitian_part();
        Ok(Loaded { a, sigma: Some(sigma), label: spec.clone() })
    } else {
        let (a, view) = synthetic_matrix::<T>(&syn)?;
        Ok(Loaded { a, sigma: Some(view.sigma), label: spec.clone() })
    }
}
