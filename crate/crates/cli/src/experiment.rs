use std::io::Write;

use lowrank::bounds::{gauss_deviation_simple, gauss_mean_frobenius, gauss_mean_spectral, power_scheme_bound, SpectrumView};
use lowrank::linalg::singular_values;
use lowrank::oracle::{exact_projection_error, mean, stderr};
use lowrank::rangefinder::{fast_range_finder, range_finder, AdaptiveState};
use lowrank::rng::mix;
use lowrank::sketch::{SketchKind, SketchSpec};
use lowrank::{c64, Error, Matrix, Norm, RealScalar, Result};

use crate::args::{ExperimentArgs, InputArgs, Mode};
use crate::input::{load, Loaded};
use crate::run::{resolve_seed_quiet, CliScalar};

/// Input used when an experiment names none.
pub const DEFAULT_INPUT: &str = "laplace:200";

pub fn cmd_experiment(args: &ExperimentArgs) -> Result<()> {
    let seed = resolve_seed_quiet(args.seed);
    if args.input.complex {
        experiment_impl::<c64>(args, seed)
    } else {
        experiment_impl::<f64>(args, seed)
    }
}

fn writer(args: &ExperimentArgs) -> Result<csv::Writer<Box<dyn Write>>> {
    let sink: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout()),
    };
    Ok(csv::Writer::from_writer(sink))
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::InvalidArgument(format!("csv output: {other:?}")),
    }
}

fn spectrum<T: CliScalar>(loaded: &Loaded<T>) -> Result<Vec<f64>> {
    match &loaded.sigma {
        Some(s) => Ok(s.clone()),
        None => Ok(singular_values(&loaded.a)?.iter().map(|x| x.as_f64()).collect()),
    }
}

fn experiment_impl<T: CliScalar>(args: &ExperimentArgs, seed: u64) -> Result<()> {
    let mut input: InputArgs = args.input.clone();
    if input.input.is_none() && input.synthetic.is_none() {
        input.synthetic = Some(DEFAULT_INPUT.into());
    }
    let loaded = load::<T>(&input, false, seed)?;
    let mut w = writer(args)?;
    match args.mode {
        Mode::ErrorCurve => error_curve(&loaded, args, seed, &mut w)?,
        Mode::ErrorHist => error_hist(&loaded, args, seed, &mut w)?,
        Mode::PowerCurve => power_curve(&loaded, args, seed, &mut w)?,
        Mode::Bounds => bounds_table(&loaded, args, seed, &mut w)?,
    }
    w.flush()?;
    Ok(())
}

type Out = csv::Writer<Box<dyn Write>>;

fn row(w: &mut Out, fields: &[String]) -> Result<()> {
    w.write_record(fields).map_err(csv_err)
}

/// `ell, σ_{ℓ+1}, ‖(I - QQ^*)A‖, estimate` as the adaptive finder grows `Q`.
fn error_curve<T: CliScalar>(loaded: &Loaded<T>, args: &ExperimentArgs, seed: u64, w: &mut Out) -> Result<()> {
    let a = &loaded.a;
    let sigma = spectrum(loaded)?;
    let cap = args.max_ell.min(a.nrows().min(a.ncols()));
    row(w, &["ell".into(), "sigma_opt".into(), "err_actual".into(), "err_estimate".into()])?;
    let mut state = AdaptiveState::new(a, args.probes, seed)?;
    while state.rank() < cap && !state.saturated() {
        state.step();
        let ell = state.rank();
        let q = state.basis();
        let e = exact_projection_error(a, &q, Norm::Spectral)?.as_f64();
        let opt = sigma.get(ell).copied().unwrap_or(0.0);
        row(w, &[ell.to_string(), fmt(opt), fmt(e), fmt(state.estimate().as_f64())])?;
    }
    Ok(())
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

/// One sketch of `ℓ` samples and its spectral (or Frobenius) error.
fn trial_error<T: CliScalar>(a: &Matrix<T>, ac: &Matrix<c64>, spec: SketchSpec, norm: Norm) -> Result<f64> {
    if spec.kind.is_structured() {
        let b = fast_range_finder(ac, spec.ell, spec.seed, spec.kind)?;
        Ok(exact_projection_error(ac, &b.q, norm)?)
    } else {
        let b = range_finder(a, &spec)?;
        Ok(exact_projection_error(a, &b.q, norm)?.as_f64())
    }
}

fn error_hist<T: CliScalar>(loaded: &Loaded<T>, args: &ExperimentArgs, seed: u64, w: &mut Out) -> Result<()> {
    let a = &loaded.a;
    let ac = T::complexify(a);
    row(w, &["trial".into(), "kind".into(), "ell".into(), "err".into()])?;
    for (ki, &kind) in args.kinds.iter().enumerate() {
        for t in 0..args.trials {
            let s = mix(mix(seed, ki as u64), t as u64);
            let spec = SketchSpec { kind, ell: args.ell, power_q: 0, seed: s };
            let e = trial_error(a, &ac, spec, Norm::Spectral)?;
            row(w, &[t.to_string(), kind.to_string(), args.ell.to_string(), fmt(e)])?;
        }
    }
    Ok(())
}

fn power_curve<T: CliScalar>(loaded: &Loaded<T>, args: &ExperimentArgs, seed: u64, w: &mut Out) -> Result<()> {
    let a = &loaded.a;
    let ac = T::complexify(a);
    row(w, &["q".into(), "trial".into(), "ell".into(), "err".into()])?;
    for q in 0..=args.q_max {
        for t in 0..args.trials {
            let spec = SketchSpec { kind: SketchKind::Gaussian, ell: args.ell, power_q: q, seed: mix(seed, t as u64) };
            let e = trial_error(a, &ac, spec, Norm::Spectral)?;
            row(w, &[q.to_string(), t.to_string(), args.ell.to_string(), fmt(e)])?;
        }
    }
    Ok(())
}

/// Each bound next to the Monte Carlo mean of the quantity it controls.
fn bounds_table<T: CliScalar>(loaded: &Loaded<T>, args: &ExperimentArgs, seed: u64, w: &mut Out) -> Result<()> {
    let a = &loaded.a;
    let ac = T::complexify(a);
    let (k, p) = (args.rank, args.oversample);
    let view = SpectrumView::new(spectrum(loaded)?, a.nrows(), a.ncols())?;
    let sample = |q: usize, norm: Norm| -> Result<Vec<f64>> {
        (0..args.trials)
            .map(|t| {
                let spec = SketchSpec::fixed_rank(SketchKind::Gaussian, k, p, q, mix(seed, t as u64));
                trial_error(a, &ac, spec, norm)
            })
            .collect()
    };
    row(w, &["bound".into(), "k".into(), "p".into(), "q".into(), "value".into(), "mc_mean".into(), "mc_stderr".into()])?;
    let mut emit = |name: &str, q: usize, value: f64, xs: &[f64]| -> Result<()> {
        row(w, &[name.into(), k.to_string(), p.to_string(), q.to_string(), fmt(value), fmt(mean(xs)), fmt(stderr(xs))])
    };
    let spec_err = sample(0, Norm::Spectral)?;
    let fro_err = sample(0, Norm::Frobenius)?;
    emit("mean_frobenius", 0, gauss_mean_frobenius(k, p, &view)?, &fro_err)?;
    emit("mean_spectral", 0, gauss_mean_spectral(k, p, &view)?, &spec_err)?;
    if p >= 4 {
        emit("deviation_spectral", 0, gauss_deviation_simple(k, p, &view)?.value, &spec_err)?;
    }
    for q in 1..=args.q_max {
        let xs = sample(q, Norm::Spectral)?;
        emit("power_scheme", q, power_scheme_bound(k, p, q, &view)?, &xs)?;
    }
    Ok(())
}
