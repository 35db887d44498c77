use std::sync::Arc;

use lowrank::bounds::{gauss_mean_frobenius, gauss_mean_spectral, power_scheme_bound, SpectrumView};
use lowrank::factor::{
    column_id, direct_eig_hermitian, direct_svd, eig_nystrom_strict, eig_one_pass, eig_via_row_extraction,
    svd_one_pass_general, svd_via_row_extraction, BasisChoice, OnePassDiagnostics, PartialEig, PartialSvd,
    Truncate,
};
use lowrank::io::{streamed_bundle, write_factors, Factors, RowBlockStream, RunInfo};
use lowrank::linalg::dense_operator;
use lowrank::oracle::exact_projection_error;
use lowrank::rangefinder::{
    adaptive_range_finder, fast_range_finder, fast_range_finder_doubling, posterior_error_estimate, range_finder,
    RangeBasis,
};
use lowrank::rng::mix;
use lowrank::sketch::{SketchKind, SketchSpec};
use lowrank::{c64, Error, Matrix, Norm, RealScalar, Result, Scalar};
use serde_json::json;

use crate::args::{EigArgs, EigMethod, RunArgs, SvdArgs};
use crate::input::{load, Loaded};

/// Starting sample count of the structured fixed-precision ladder.
pub const DOUBLING_START: usize = 32;
/// Rows per block in single-pass runs.
pub const STREAM_BLOCK_ROWS: usize = 64;
/// Residuals are measured exactly only up to this dimension.
pub const EXACT_RESIDUAL_LIMIT: usize = 2000;

/// Scalars the CLI runs in. Structured sketches produce complex bases,
/// so they are only available in complex arithmetic.
pub trait CliScalar: Scalar {
    const NAME: &'static str;
    fn complexify(a: &Matrix<Self>) -> Matrix<c64>;
    fn structured(a: &Matrix<Self>, ell: usize, seed: u64, kind: SketchKind) -> Result<RangeBasis<Self>>;
    fn structured_adaptive(a: &Matrix<Self>, eps: f64, kind: SketchKind, r: usize, seed: u64) -> Result<RangeBasis<Self>>;
}

impl CliScalar for f64 {
    const NAME: &'static str = "f64";
    fn complexify(a: &Matrix<f64>) -> Matrix<c64> {
        a.to_complex()
    }
    fn structured(_: &Matrix<f64>, _: usize, _: u64, kind: SketchKind) -> Result<RangeBasis<f64>> {
        Err(Error::InvalidArgument(format!("{kind} sketches need complex arithmetic")))
    }
    fn structured_adaptive(_: &Matrix<f64>, _: f64, kind: SketchKind, _: usize, _: u64) -> Result<RangeBasis<f64>> {
        Err(Error::InvalidArgument(format!("{kind} sketches need complex arithmetic")))
    }
}

impl CliScalar for c64 {
    const NAME: &'static str = "c64";
    fn complexify(a: &Matrix<c64>) -> Matrix<c64> {
        a.clone()
    }
    fn structured(a: &Matrix<c64>, ell: usize, seed: u64, kind: SketchKind) -> Result<RangeBasis<c64>> {
        fast_range_finder(a, ell, seed, kind)
    }
    fn structured_adaptive(a: &Matrix<c64>, eps: f64, kind: SketchKind, r: usize, seed: u64) -> Result<RangeBasis<c64>> {
        fast_range_finder_doubling(a, eps, DOUBLING_START, kind, r, seed)
    }
}

pub fn resolve_seed(seed: Option<u64>) -> u64 {
    let s = seed.unwrap_or_else(rand::random);
    println!("seed: {s}");
    s
}

/// Like [`resolve_seed`] but reports on stderr, for commands whose stdout is CSV.
pub fn resolve_seed_quiet(seed: Option<u64>) -> u64 {
    let s = seed.unwrap_or_else(rand::random);
    eprintln!("seed: {s}");
    s
}

pub fn wants_complex(run: &RunArgs) -> bool {
    run.input.complex || run.sketch.is_structured()
}

fn check_run(run: &RunArgs) -> Result<()> {
    if run.adaptive == run.rank.is_some() {
        return Err(Error::InvalidArgument("give exactly one of --rank and --adaptive".into()));
    }
    if run.truncate && run.rank.is_none() {
        return Err(Error::InvalidArgument("--truncate needs --rank".into()));
    }
    if run.sketch.is_structured() && run.power > 0 {
        return Err(Error::InvalidArgument("power iterations need an unstructured sketch".into()));
    }
    if !(run.alpha > 1.0) || run.probes == 0 {
        return Err(Error::InvalidArgument("need --alpha > 1 and --probes >= 1".into()));
    }
    if let Some(t) = run.tol {
        if !(t > 0.0) {
            return Err(Error::InvalidArgument("--tol must be positive".into()));
        }
    }
    Ok(())
}

fn sample_count<T: Scalar>(run: &RunArgs, a: &Matrix<T>) -> Result<usize> {
    let k = run.rank.expect("rank mode");
    let ell = k + run.oversample;
    let cap = a.nrows().min(a.ncols());
    if k == 0 || ell > cap {
        return Err(Error::InvalidArgument(format!("need 1 <= k and k + p = {ell} <= {cap}")));
    }
    Ok(ell)
}

/// Stage A as configured.
pub fn stage_a<T: CliScalar>(a: &Matrix<T>, run: &RunArgs, seed: u64) -> Result<RangeBasis<T>> {
    if let (true, Some(eps)) = (run.adaptive, run.tol) {
        if run.sketch.is_structured() {
            return T::structured_adaptive(a, eps, run.sketch, run.probes, seed);
        }
        if run.power > 0 || run.sketch != SketchKind::Gaussian {
            return Err(Error::InvalidArgument("the adaptive finder uses Gaussian probes without power steps".into()));
        }
        return adaptive_range_finder(a, T::Real::lit(eps), run.probes, seed);
    }
    let ell = sample_count(run, a)?;
    if run.sketch.is_structured() {
        return T::structured(a, ell, seed, run.sketch);
    }
    range_finder(a, &SketchSpec { kind: run.sketch, ell, power_q: run.power, seed })
}

struct Report {
    rank: usize,
    passes: u64,
    matvecs: u64,
    est_error: f64,
    residual: Option<f64>,
    extra: serde_json::Value,
}

fn estimate<T: Scalar>(a: &Matrix<T>, q: &Matrix<T>, run: &RunArgs, seed: u64) -> Result<f64> {
    Ok(posterior_error_estimate(a, q, run.probes, T::Real::lit(run.alpha), mix(seed, 1))?.as_f64())
}

fn residual<T: Scalar>(a: &Matrix<T>, approx: impl FnOnce() -> Matrix<T>) -> Result<Option<f64>> {
    if a.nrows().min(a.ncols()) > EXACT_RESIDUAL_LIMIT {
        return Ok(None);
    }
    let r = a - &approx();
    Ok(Some(lowrank::linalg::spectral_norm(&r)?.as_f64()))
}

fn print_bounds(sigma: &Option<Vec<f64>>, run: &RunArgs, m: usize, n: usize) {
    let (Some(s), Some(k)) = (sigma, run.rank) else { return };
    let Ok(view) = SpectrumView::new(s.clone(), m, n) else { return };
    println!("optimal_error: {:e}", view.next(k));
    let p = run.oversample;
    if let Ok(v) = gauss_mean_spectral(k, p, &view) {
        println!("bound_mean_spectral: {v:e}");
    }
    if let Ok(v) = gauss_mean_frobenius(k, p, &view) {
        println!("bound_mean_frobenius: {v:e}");
    }
    if run.power > 0 {
        if let Ok(v) = power_scheme_bound(k, p, run.power, &view) {
            println!("bound_power_scheme: {v:e}");
        }
    }
}

fn finish<T: CliScalar>(
    command: &str,
    run: &RunArgs,
    loaded: &Loaded<T>,
    seed: u64,
    spec: Option<SketchSpec>,
    factors: Factors<T>,
    rep: Report,
) -> Result<()> {
    let (m, n) = loaded.a.shape();
    println!("input: {} ({m}x{n}, {})", loaded.label, T::NAME);
    println!("rank: {}", rep.rank);
    println!("passes: {}", rep.passes);
    println!("est_error: {:e}", rep.est_error);
    if let Some(r) = rep.residual {
        println!("residual: {r:e}");
    }
    print_bounds(&loaded.sigma, run, m, n);
    if let Some(dir) = &run.out {
        let info = RunInfo {
            m,
            n,
            spec,
            seed: Some(seed),
            passes: Some(rep.passes),
            matvecs: Some(rep.matvecs),
            est_error: Some(rep.est_error),
            extra: json!({
                "command": command,
                "input": loaded.label,
                "rank": run.rank,
                "oversample": run.oversample,
                "power": run.power,
                "sketch": run.sketch,
                "tol": run.tol,
                "probes": run.probes,
                "alpha": run.alpha,
                "truncate": run.truncate,
                "details": rep.extra,
            }),
        };
        write_factors(&factors, dir, run.format, &info)?;
        println!("wrote: {}", dir.display());
    }
    Ok(())
}

fn one_pass_json(d: &OnePassDiagnostics) -> serde_json::Value {
    if d.ill_conditioned {
        eprintln!("warning: one-pass system is ill conditioned (cond {:e})", d.cond);
    }
    json!({ "tau_min": d.tau_min, "cond": d.cond, "ill_conditioned": d.ill_conditioned, "basis": d.choice })
}

pub fn cmd_svd(args: &SvdArgs) -> Result<()> {
    check_run(&args.run)?;
    let seed = resolve_seed(args.run.seed);
    if wants_complex(&args.run) {
        svd_impl::<c64>(args, seed)
    } else {
        svd_impl::<f64>(args, seed)
    }
}

fn svd_impl<T: CliScalar>(args: &SvdArgs, seed: u64) -> Result<()> {
    let run = &args.run;
    let loaded = load::<T>(&run.input, false, seed)?;
    let a = &loaded.a;
    let (svd, q, passes, matvecs, spec, extra): (PartialSvd<T>, Matrix<T>, u64, u64, Option<SketchSpec>, _) =
        if args.single_pass {
            if run.adaptive || run.sketch != SketchKind::Gaussian {
                return Err(Error::InvalidArgument("--single-pass needs --rank and a Gaussian sketch".into()));
            }
            let ell = sample_count(run, a)?;
            let mut blocks = RowBlockStream::from_matrix(Arc::new(a.clone()), STREAM_BLOCK_ROWS)?;
            let ell_tilde = (2 * ell + 1).min(a.nrows());
            let bundle = streamed_bundle(&mut blocks, ell, Some(ell_tilde), seed, BasisChoice::Orthonormalize)?;
            let (f, d) = svd_one_pass_general(&bundle)?;
            (f, bundle.q.clone(), 1, (ell + ell_tilde) as u64, Some(SketchSpec::gaussian(ell, seed)), one_pass_json(&d))
        } else {
            let basis = stage_a(a, run, seed)?;
            let f = if args.row_extraction {
                svd_via_row_extraction(a, &basis.q)?
            } else {
                let op = dense_operator(a);
                direct_svd(&op, &basis.q)?
            };
            let extra = json!({ "postprocess": if args.row_extraction { "row_extraction" } else { "direct" } });
            {
                let mv = basis.matvecs + basis.rank() as u64;
                (f, basis.q, basis.passes + 1, mv, Some(basis.spec), extra)
            }
        };
    let svd = if run.truncate { svd.truncate(run.rank.expect("checked")) } else { svd };
    let est_error = estimate(a, &q, run, seed)?;
    let residual = residual(a, || svd.reconstruct())?;
    let rep = Report { rank: svd.rank(), passes, matvecs, est_error, residual, extra };
    finish("svd", run, &loaded, seed, spec, Factors::Svd(svd), rep)
}

pub fn cmd_eig(args: &EigArgs) -> Result<()> {
    check_run(&args.run)?;
    let seed = resolve_seed(args.run.seed);
    if wants_complex(&args.run) {
        eig_impl::<c64>(args, seed)
    } else {
        eig_impl::<f64>(args, seed)
    }
}

fn eig_impl<T: CliScalar>(args: &EigArgs, seed: u64) -> Result<()> {
    let run = &args.run;
    let loaded = load::<T>(&run.input, true, seed)?;
    let a = &loaded.a;
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!("eig needs a square input, got {}x{}", a.nrows(), a.ncols())));
    }
    let (eig, q, passes, matvecs, spec, extra): (PartialEig<T>, Matrix<T>, u64, u64, Option<SketchSpec>, _) =
        if args.single_pass {
            if run.adaptive || run.sketch != SketchKind::Gaussian || args.method != EigMethod::Direct {
                return Err(Error::InvalidArgument("--single-pass needs --rank, a Gaussian sketch and the direct method".into()));
            }
            let ell = sample_count(run, a)?;
            let mut blocks = RowBlockStream::from_matrix(Arc::new(a.clone()), STREAM_BLOCK_ROWS)?;
            let bundle = streamed_bundle(&mut blocks, ell, None, seed, BasisChoice::Orthonormalize)?;
            let (f, d) = eig_one_pass(&bundle)?;
            (f, bundle.q.clone(), 1, ell as u64, Some(SketchSpec::gaussian(ell, seed)), one_pass_json(&d))
        } else {
            let basis = stage_a(a, run, seed)?;
            let op = dense_operator(a);
            let (f, extra) = match args.method {
                EigMethod::Direct => (direct_eig_hermitian(&op, &basis.q)?, json!({ "method": "direct" })),
                EigMethod::Row => (eig_via_row_extraction(a, &basis.q)?, json!({ "method": "row_extraction" })),
                EigMethod::Nystrom => {
                    let r = eig_nystrom_strict(&op, &basis.q)?;
                    (r.eig, json!({ "method": "nystrom" }))
                }
            };
            {
                let mv = basis.matvecs + basis.rank() as u64;
                (f, basis.q, basis.passes + 1, mv, Some(basis.spec), extra)
            }
        };
    let eig = if run.truncate { eig.truncate(run.rank.expect("checked")) } else { eig };
    let est_error = estimate(a, &q, run, seed)?;
    let residual = residual(a, || eig.reconstruct())?;
    let rep = Report { rank: eig.rank(), passes, matvecs, est_error, residual, extra };
    finish("eig", run, &loaded, seed, spec, Factors::Eig(eig), rep)
}

pub fn cmd_id(run: &RunArgs) -> Result<()> {
    check_run(run)?;
    let seed = resolve_seed(run.seed);
    if wants_complex(run) {
        id_impl::<c64>(run, seed)
    } else {
        id_impl::<f64>(run, seed)
    }
}

fn id_impl<T: CliScalar>(run: &RunArgs, seed: u64) -> Result<()> {
    let loaded = load::<T>(&run.input, false, seed)?;
    let a = &loaded.a;
    let basis = stage_a(a, run, seed)?;
    let b = basis.q.adjoint_matmul(a);
    let k = run.rank.unwrap_or(basis.rank()).min(b.nrows()).min(b.ncols());
    let id = column_id(&b, k)?;
    let est_error = estimate(a, &basis.q, run, seed)?;
    let residual = residual(a, || id.reconstruct(a))?;
    let rep = Report {
        rank: id.rank(),
        passes: basis.passes + 1,
        matvecs: basis.matvecs + basis.rank() as u64,
        est_error,
        residual,
        extra: json!({ "swaps": id.swaps, "max_coefficient": id.max_coefficient().as_f64() }),
    };
    finish("id", run, &loaded, seed, Some(basis.spec), Factors::Id(id), rep)
}

pub fn cmd_range(run: &RunArgs) -> Result<()> {
    check_run(run)?;
    let seed = resolve_seed(run.seed);
    if wants_complex(run) {
        range_impl::<c64>(run, seed)
    } else {
        range_impl::<f64>(run, seed)
    }
}

fn range_impl<T: CliScalar>(run: &RunArgs, seed: u64) -> Result<()> {
    let loaded = load::<T>(&run.input, false, seed)?;
    let a = &loaded.a;
    let basis = stage_a(a, run, seed)?;
    let est_error = estimate(a, &basis.q, run, seed)?;
    let residual = if a.nrows().min(a.ncols()) <= EXACT_RESIDUAL_LIMIT {
        Some(exact_projection_error(a, &basis.q, Norm::Spectral)?.as_f64())
    } else {
        None
    };
    let rep = Report {
        rank: basis.rank(),
        passes: basis.passes,
        matvecs: basis.matvecs,
        est_error,
        residual,
        extra: json!({ "saturated": basis.saturated, "samples_used": basis.samples_used }),
    };
    finish("range", run, &loaded, seed, Some(basis.spec), Factors::Range(basis.q), rep)
}
