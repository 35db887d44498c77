use std::io::Write;
use std::time::Instant;

use lowrank::linalg::{dense_operator, singular_values};
use lowrank::oracle::{synthetic_matrix, SpectrumKind, SyntheticSpec};
use lowrank::rangefinder::{fast_range_finder, range_finder};
use lowrank::rng::mix;
use lowrank::sketch::{SketchKind, SketchSpec};
use lowrank::{Error, Matrix, Result};

use crate::args::BenchArgs;
use crate::run::resolve_seed_quiet;

/// Singular value decay of the benchmark matrices.
pub const BENCH_DECAY: f64 = 0.9;

pub fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let seed = resolve_seed_quiet(args.seed);
    if args.sizes.is_empty() || args.ells.is_empty() {
        return Err(Error::InvalidArgument("need at least one size and one sample count".into()));
    }
    let sink: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let header = ["n", "ell", "gauss_flops", "srft_flops", "flop_ratio", "gauss_secs", "srft_secs", "full_svd_secs"];
    w.write_record(header).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    for (i, &n) in args.sizes.iter().enumerate() {
        let spec = SyntheticSpec::new(n, n, SpectrumKind::ExpDecay { rho: BENCH_DECAY }, mix(seed, i as u64));
        let (a, _): (Matrix<f64>, _) = synthetic_matrix(&spec)?;
        let full = if args.no_full_svd {
            String::new()
        } else {
            let t = Instant::now();
            singular_values(&a)?;
            format!("{:.6}", t.elapsed().as_secs_f64())
        };
        for &ell in &args.ells {
            if ell == 0 || ell > n {
                return Err(Error::InvalidArgument(format!("sample count {ell} is outside 1..={n}")));
            }
            let s = mix(seed, 1000 + ell as u64);
            let t = Instant::now();
            let g = range_finder(&dense_operator(&a), &SketchSpec::gaussian(ell, s))?;
            let gauss_secs = t.elapsed().as_secs_f64();
            let t = Instant::now();
            let f = fast_range_finder(&a, ell, s, SketchKind::Srft)?;
            let srft_secs = t.elapsed().as_secs_f64();
            let (gf, sf) = (g.work.flops, f.work.flops);
            let rec = [
                n.to_string(),
                ell.to_string(),
                gf.to_string(),
                sf.to_string(),
                format!("{:.4}", gf as f64 / sf as f64),
                format!("{gauss_secs:.6}"),
                format!("{srft_secs:.6}"),
                full.clone(),
            ];
            w.write_record(&rec).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        }
    }
    w.flush()?;
    eprintln!("note: timings depend on the machine and are not part of the reproducible output");
    Ok(())
}
