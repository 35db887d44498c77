//! Closed-form evaluators for the error bounds of randomized range finders.
//!
//! All evaluators work in `f64` on singular-value lists. Probabilistic
//! bounds come back as a [`BoundReport`] carrying the failure probability.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::small_svd;
use crate::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    Spectral,
    Frobenius,
}

/// A weakly decreasing, nonnegative singular-value list for an `m x n`
/// matrix. The list may be partial; missing values count as zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumView {
    pub sigma: Vec<f64>,
    pub m: usize,
    pub n: usize,
}

impl SpectrumView {
    pub fn new(sigma: Vec<f64>, m: usize, n: usize) -> Result<Self> {
        if sigma.len() > m.min(n) {
            return Err(Error::InvalidArgument(format!("{} singular values for a {m}x{n} matrix", sigma.len())));
        }
        if sigma.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::Domain("singular values must be finite and nonnegative".into()));
        }
        if sigma.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::Domain("singular values must be sorted descending".into()));
        }
        Ok(Self { sigma, m, n })
    }

    pub fn min_dim(&self) -> usize {
        self.m.min(self.n)
    }

    /// `σ_{k+1}` (zero-based `sigma[k]`).
    pub fn next(&self, k: usize) -> f64 {
        self.sigma.get(k).copied().unwrap_or(0.0)
    }

    /// The values `σ_{k+1}, σ_{k+2}, ...`.
    pub fn tail(&self, k: usize) -> &[f64] {
        &self.sigma[k.min(self.sigma.len())..]
    }

    /// `(Σ_{j>k} σ_j^2)^{1/2}`.
    pub fn tail_fro(&self, k: usize) -> f64 {
        self.tail(k).iter().map(|s| s * s).sum::<f64>().sqrt()
    }

    /// `(Σ_{j>k} σ_j^{2r})^{1/2}`.
    fn tail_pow(&self, k: usize, r: i32) -> f64 {
        self.tail(k).iter().map(|s| s.powi(2 * r)).sum::<f64>().sqrt()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub k: Option<usize>,
    pub p: Option<usize>,
    pub q: Option<usize>,
    pub ell: Option<usize>,
    pub t: Option<f64>,
    pub u: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub value: f64,
    pub params: BoundParams,
    pub failure_prob: Option<f64>,
    /// The failure probability is only known up to an unstated constant.
    pub order_only: bool,
    /// False when the hypotheses of the bound are not met by the inputs.
    pub guaranteed: bool,
}

impl BoundReport {
    fn new(name: &str, value: f64, params: BoundParams) -> Self {
        Self { name: name.into(), value, params, failure_prob: None, order_only: false, guaranteed: true }
    }
}

fn need_p(p: usize, min: usize) -> Result<()> {
    if p < min {
        return Err(Error::Domain(format!("oversampling p = {p} must be at least {min}")));
    }
    Ok(())
}

/// `sqrt(‖Σ₂‖² + ‖Σ₂ Ω₂ Ω₁^†‖²)` in the requested norm.
///
/// `sigma2` is the diagonal of `Σ₂`; rows of `Ω₂` beyond its length are
/// multiplied by zero. Fails when `Ω₁` is numerically rank deficient.
pub fn det_bound_rhs<T: Scalar>(sigma2: &[f64], omega1: &Matrix<T>, omega2: &Matrix<T>, norm: Norm) -> Result<f64> {
    if omega1.ncols() != omega2.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "Ω₁ has {} columns, Ω₂ has {}",
            omega1.ncols(),
            omega2.ncols()
        )));
    }
    if sigma2.len() > omega2.nrows() {
        return Err(Error::DimensionMismatch(format!("{} tail values but Ω₂ has {} rows", sigma2.len(), omega2.nrows())));
    }
    let k = omega1.nrows();
    if k > omega1.ncols() {
        return Err(Error::RankDeficient(format!("Ω₁ is {k}x{} and cannot have full row rank", omega1.ncols())));
    }
    let s = small_svd(omega1)?;
    let smax = s.sigma.first().map_or(0.0, |x| x.to_f64().unwrap_or(0.0));
    let smin = s.sigma.last().map_or(0.0, |x| x.to_f64().unwrap_or(0.0));
    if k > 0 && smin <= 1e-12 * smax {
        return Err(Error::RankDeficient(format!("Ω₁ has σ_min/σ_max = {:.3e}", smin / smax)));
    }
    // Ω₁^† = V Σ^{-1} U^*
    let vs = Matrix::from_fn(s.v.nrows(), k, |i, j| s.v[(i, j)].scale(s.sigma[j].recip()));
    let pinv = vs.matmul_adjoint(&s.u);
    let w = Matrix::from_fn(sigma2.len(), omega2.ncols(), |i, j| omega2[(i, j)].scale(T::Real::lit(sigma2[i])));
    let x = w.matmul(&pinv);
    let (a, b) = match norm {
        Norm::Spectral => {
            let sx = if x.nrows() == 0 || x.ncols() == 0 { 0.0 } else { spectral(&x)? };
            (sigma2.iter().fold(0.0f64, |m, &v| m.max(v)), sx)
        }
        Norm::Frobenius => {
            (sigma2.iter().map(|v| v * v).sum::<f64>().sqrt(), x.fro_norm().to_f64().unwrap_or(f64::NAN))
        }
    };
    Ok((a * a + b * b).sqrt())
}

fn spectral<T: Scalar>(x: &Matrix<T>) -> Result<f64> {
    Ok(crate::linalg::spectral_norm(x)?.to_f64().unwrap_or(f64::NAN))
}

/// Mean Frobenius error with Gaussian test matrices:
/// `(1 + k/(p-1))^{1/2} (Σ_{j>k} σ_j²)^{1/2}`.
pub fn gauss_mean_frobenius(k: usize, p: usize, spec: &SpectrumView) -> Result<f64> {
    need_p(p, 2)?;
    Ok((1.0 + k as f64 / (p as f64 - 1.0)).sqrt() * spec.tail_fro(k))
}

/// Mean spectral error with Gaussian test matrices:
/// `(1 + √(k/(p-1))) σ_{k+1} + (e√(k+p)/p) (Σ_{j>k} σ_j²)^{1/2}`.
pub fn gauss_mean_spectral(k: usize, p: usize, spec: &SpectrumView) -> Result<f64> {
    power_scheme_bound(k, p, 0, spec)
}

/// Deviation bound for the Gaussian range finder at parameters `t, u ≥ 1`.
pub fn gauss_deviation(k: usize, p: usize, spec: &SpectrumView, t: f64, u: f64, norm: Norm) -> Result<BoundReport> {
    need_p(p, 4)?;
    if t < 1.0 || u < 1.0 {
        return Err(Error::Domain(format!("deviation parameters must be at least 1, got t = {t}, u = {u}")));
    }
    let (kf, pf) = (k as f64, p as f64);
    let lead = 1.0 + t * (12.0 * kf / pf).sqrt();
    let c = E * (kf + pf).sqrt() / (pf + 1.0);
    let (s1, tail) = (spec.next(k), spec.tail_fro(k));
    let (name, value, fail) = match norm {
        Norm::Frobenius => ("gauss_deviation_frobenius", lead * tail + u * t * c * s1, 2.0 * (-u * u / 2.0).exp()),
        Norm::Spectral => ("gauss_deviation_spectral", lead * s1 + t * c * tail + u * t * c * s1, (-u * u / 2.0).exp()),
    };
    let params = BoundParams { k: Some(k), p: Some(p), t: Some(t), u: Some(u), ..Default::default() };
    let mut r = BoundReport::new(name, value, params);
    r.failure_prob = Some(5.0 * t.powf(-pf) + fail);
    Ok(r)
}

/// First simplified spectral deviation bound,
/// `(1 + 17√(1+k/p)) σ_{k+1} + (8√(k+p)/(p+1)) (Σ_{j>k} σ_j²)^{1/2}`,
/// failing with probability at most `6 e^{-p}`.
pub fn gauss_deviation_simple(k: usize, p: usize, spec: &SpectrumView) -> Result<BoundReport> {
    need_p(p, 4)?;
    let (kf, pf) = (k as f64, p as f64);
    let value = (1.0 + 17.0 * (1.0 + kf / pf).sqrt()) * spec.next(k) + 8.0 * (kf + pf).sqrt() / (pf + 1.0) * spec.tail_fro(k);
    let mut r = BoundReport::new("gauss_deviation_simple", value, BoundParams { k: Some(k), p: Some(p), ..Default::default() });
    r.failure_prob = Some(6.0 * (-pf).exp());
    Ok(r)
}

/// Second simplified spectral deviation bound,
/// `(1 + 8√((k+p) p ln p)) σ_{k+1} + 3√(k+p) (Σ_{j>k} σ_j²)^{1/2}`,
/// failing with probability at most `6 p^{-p}`.
pub fn gauss_deviation_simple_log(k: usize, p: usize, spec: &SpectrumView) -> Result<BoundReport> {
    need_p(p, 4)?;
    let (kf, pf) = (k as f64, p as f64);
    let value = (1.0 + 8.0 * ((kf + pf) * pf * pf.ln()).sqrt()) * spec.next(k) + 3.0 * (kf + pf).sqrt() * spec.tail_fro(k);
    let mut r = BoundReport::new("gauss_deviation_simple_log", value, BoundParams { k: Some(k), p: Some(p), ..Default::default() });
    r.failure_prob = Some(6.0 * pf.powf(-pf));
    Ok(r)
}

/// Mean spectral error of the power scheme with exponent `q`.
pub fn power_scheme_bound(k: usize, p: usize, q: usize, spec: &SpectrumView) -> Result<f64> {
    need_p(p, 2)?;
    let (kf, pf) = (k as f64, p as f64);
    let r = 2 * q as i32 + 1;
    let inner = (1.0 + (kf / (pf - 1.0)).sqrt()) * spec.next(k).powi(r)
        + E * (kf + pf).sqrt() / pf * spec.tail_pow(k, r);
    Ok(inner.powf(1.0 / r as f64))
}

/// Sample count `ceil(4 (√k + √(8 ln(kn)))² ln k)` for a subsampled
/// randomized Fourier transform to preserve a `k`-dimensional subspace
/// of `C^n`. The result may exceed `n`; see [`srft_sample_size_within`].
pub fn srft_sample_size(k: usize, n: usize) -> Result<usize> {
    if k < 2 {
        return Err(Error::Domain(format!("k = {k} must be at least 2")));
    }
    if n < k {
        return Err(Error::Domain(format!("n = {n} is smaller than k = {k}")));
    }
    let (kf, nf) = (k as f64, n as f64);
    let root = kf.sqrt() + (8.0 * (kf * nf).ln()).sqrt();
    Ok((4.0 * root * root * kf.ln()).ceil() as usize)
}

/// [`srft_sample_size`], failing when the count exceeds `n`.
pub fn srft_sample_size_within(k: usize, n: usize) -> Result<usize> {
    let ell = srft_sample_size(k, n)?;
    if ell > n {
        return Err(Error::SampleCountExceedsDimension { ell, n });
    }
    Ok(ell)
}

/// Error bound `√(1 + 7n/ℓ)` times `σ_{k+1}` (spectral) or the tail root
/// (Frobenius) for an SRFT with `ℓ` samples targeting rank `k`.
///
/// The failure probability is of order `1/k` with an unknown constant;
/// the report carries `1/k` and sets `order_only`. `guaranteed` is false
/// when `ℓ` is below [`srft_sample_size`] or above `n`.
pub fn srft_error_bound(n: usize, ell: usize, k: usize, spec: &SpectrumView, norm: Norm) -> Result<BoundReport> {
    if ell == 0 {
        return Err(Error::Domain("ℓ must be positive".into()));
    }
    let factor = (1.0 + 7.0 * n as f64 / ell as f64).sqrt();
    let base = match norm {
        Norm::Spectral => spec.next(k),
        Norm::Frobenius => spec.tail_fro(k),
    };
    let params = BoundParams { k: Some(k), ell: Some(ell), ..Default::default() };
    let mut r = BoundReport::new("srft_error", factor * base, params);
    r.failure_prob = Some(1.0 / k.max(1) as f64);
    r.order_only = true;
    r.guaranteed = ell <= n && srft_sample_size(k, n).map_or(false, |min| ell >= min);
    Ok(r)
}

/// Coefficient amplification of a rank-`k` interpolative decomposition
/// of an `n`-column matrix: `1 + √(1 + 4k(n-k))`.
pub fn id_amplification(k: usize, n: usize) -> f64 {
    let (kf, nf) = (k as f64, n as f64);
    1.0 + (1.0 + 4.0 * kf * (nf - kf)).sqrt()
}

/// Coarse mean spectral bound `[1 + 4√(k+p)/(p-1) · √min(m,n)] σ_{k+1}`.
pub fn intro_mean_bound(k: usize, p: usize, spec: &SpectrumView) -> Result<f64> {
    need_p(p, 2)?;
    let (kf, pf) = (k as f64, p as f64);
    let mn = spec.min_dim() as f64;
    Ok((1.0 + 4.0 * (kf + pf).sqrt() / (pf - 1.0) * mn.sqrt()) * spec.next(k))
}

/// Coarse deviation bound `[1 + 11√(k+p) · √min(m,n)] σ_{k+1}` with
/// failure probability `6 p^{-p}`.
pub fn intro_deviation_bound(k: usize, p: usize, spec: &SpectrumView) -> Result<BoundReport> {
    need_p(p, 4)?;
    let (kf, pf) = (k as f64, p as f64);
    let value = (1.0 + 11.0 * (kf + pf).sqrt() * (spec.min_dim() as f64).sqrt()) * spec.next(k);
    let mut r = BoundReport::new("intro_deviation", value, BoundParams { k: Some(k), p: Some(p), ..Default::default() });
    r.failure_prob = Some(6.0 * pf.powf(-pf));
    Ok(r)
}

/// Coarse mean bound for the rank-`2k` power scheme:
/// `[1 + 4√(2 min(m,n)/(k-1))]^{1/(2q+1)} σ_{k+1}`.
pub fn intro_power_bound(k: usize, q: usize, spec: &SpectrumView) -> Result<f64> {
    if k < 2 {
        return Err(Error::Domain(format!("k = {k} must be at least 2")));
    }
    let mn = spec.min_dim() as f64;
    let inner = 1.0 + 4.0 * (2.0 * mn / (k as f64 - 1.0)).sqrt();
    Ok(inner.powf(1.0 / (2 * q + 1) as f64) * spec.next(k))
}

/// [`intro_power_bound`] plus `σ_{k+1}`, for the SVD truncated to rank `k`.
pub fn intro_truncation_bound(k: usize, q: usize, spec: &SpectrumView) -> Result<f64> {
    Ok(spec.next(k) + intro_power_bound(k, q, spec)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::gaussian_matrix;

    fn flat(k: usize, head: f64, tail: f64, count: usize, mn: usize) -> SpectrumView {
        let mut s = vec![head; k];
        s.extend(std::iter::repeat(tail).take(count));
        SpectrumView::new(s, mn, mn).unwrap()
    }

    #[test]
    fn spectrum_view_validates() {
        assert!(SpectrumView::new(vec![1.0, 2.0], 3, 3).is_err());
        assert!(SpectrumView::new(vec![1.0, -0.5], 3, 3).is_err());
        assert!(SpectrumView::new(vec![1.0; 4], 3, 3).is_err());
    }

    #[test]
    fn det_bound_trivial_cases() {
        let o1 = gaussian_matrix::<f64>(3, 8, 1);
        let o2 = gaussian_matrix::<f64>(5, 8, 2);
        assert_eq!(det_bound_rhs(&[0.0; 5], &o1, &o2, Norm::Spectral).unwrap(), 0.0);
        let z = Matrix::zeros(5, 8);
        let s = [0.5, 0.4, 0.3, 0.2, 0.1];
        assert!((det_bound_rhs(&s, &o1, &z, Norm::Spectral).unwrap() - 0.5).abs() < 1e-15);
        let fro = s.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((det_bound_rhs(&s, &o1, &z, Norm::Frobenius).unwrap() - fro).abs() < 1e-15);
    }

    #[test]
    fn det_bound_rejects_rank_deficient() {
        let mut o1 = gaussian_matrix::<f64>(2, 5, 1);
        for j in 0..5 {
            o1[(1, j)] = 2.0 * o1[(0, j)];
        }
        let o2 = gaussian_matrix::<f64>(3, 5, 2);
        assert!(matches!(det_bound_rhs(&[1.0; 3], &o1, &o2, Norm::Spectral), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn gauss_mean_frobenius_values() {
        assert_eq!(gauss_mean_frobenius(5, 3, &flat(5, 1.0, 0.0, 3, 10)).unwrap(), 0.0);
        let v = gauss_mean_frobenius(20, 10, &flat(20, 2.0, 1.0, 1, 30)).unwrap();
        assert!((v - (1.0f64 + 20.0 / 9.0).sqrt()).abs() < 1e-15);
        assert!((v - 1.795).abs() < 1e-3);
        assert!(matches!(gauss_mean_frobenius(5, 1, &flat(5, 1.0, 0.0, 0, 10)), Err(Error::Domain(_))));
    }

    #[test]
    fn gauss_mean_spectral_values() {
        assert_eq!(gauss_mean_spectral(5, 5, &flat(5, 1.0, 0.0, 95, 100)).unwrap(), 0.0);
        let spec = flat(5, 1.0, 0.1, 95, 100);
        let v = gauss_mean_spectral(5, 5, &spec).unwrap();
        let want = (1.0 + (5.0f64 / 4.0).sqrt()) * 0.1 + E * 10f64.sqrt() / 5.0 * (95.0f64 * 0.01).sqrt();
        assert!((v - want).abs() < 1e-14);
        assert!(v >= 0.1);
        assert!(v <= intro_mean_bound(5, 5, &spec).unwrap());
    }

    #[test]
    fn deviation_constants() {
        let spec = flat(10, 1.0, 0.1, 40, 50);
        let r = gauss_deviation_simple(10, 10, &spec).unwrap();
        let coeff = 1.0 + 17.0 * 2f64.sqrt();
        assert!((coeff - 25.04).abs() < 5e-3);
        let want = coeff * 0.1 + 8.0 * 20f64.sqrt() / 11.0 * spec.tail_fro(10);
        assert!((r.value - want).abs() < 1e-13);
        assert!((r.failure_prob.unwrap() - 6.0 * (-10.0f64).exp()).abs() < 1e-18);
        let t = gauss_deviation(10, 10, &spec, E, 20f64.sqrt(), Norm::Spectral).unwrap();
        assert!((t.failure_prob.unwrap() - 6.0 * (-10.0f64).exp()).abs() < 1e-15);
        // the simplified form dominates the parametrized one at t = e, u = √(2p)
        assert!(t.value <= r.value);
        assert!(matches!(gauss_deviation(10, 3, &spec, 2.0, 2.0, Norm::Frobenius), Err(Error::Domain(_))));
    }

    #[test]
    fn second_simplified_form_dominates() {
        let spec = flat(10, 1.0, 0.1, 40, 50);
        let p = 6usize;
        let t = gauss_deviation(10, p, &spec, p as f64, (2.0 * p as f64 * (p as f64).ln()).sqrt(), Norm::Spectral).unwrap();
        let s = gauss_deviation_simple_log(10, p, &spec).unwrap();
        assert!(t.value <= s.value);
        assert!((s.failure_prob.unwrap() - t.failure_prob.unwrap()).abs() <= 1e-3 * s.failure_prob.unwrap());
    }

    #[test]
    fn power_scheme_limits() {
        let spec = flat(10, 1.0, 0.5, 90, 100);
        assert_eq!(power_scheme_bound(10, 5, 0, &spec).unwrap(), gauss_mean_spectral(10, 5, &spec).unwrap());
        let q = (100f64).ln().ceil() as usize;
        assert!(power_scheme_bound(10, 5, q, &spec).unwrap() <= 3.0 * 0.5);
        let mut prev = f64::INFINITY;
        for q in 0..8 {
            let b = power_scheme_bound(10, 5, q, &spec).unwrap();
            assert!(b <= prev && b >= 0.5);
            prev = b;
        }
    }

    #[test]
    fn srft_sample_size_formula() {
        let want = (4.0 * (10f64.sqrt() + (8.0 * 10240f64.ln()).sqrt()).powi(2) * 10f64.ln()).ceil() as usize;
        assert_eq!(srft_sample_size(10, 1024).unwrap(), want);
        assert!(matches!(srft_sample_size_within(10, 1024), Err(Error::SampleCountExceedsDimension { .. })));
        assert!(srft_sample_size_within(2, 4096).is_ok());
        assert!(matches!(srft_sample_size(1, 100), Err(Error::Domain(_))));
        assert!(srft_sample_size(11, 1024).unwrap() >= srft_sample_size(10, 1024).unwrap());
        assert!(srft_sample_size(10, 2048).unwrap() >= srft_sample_size(10, 1024).unwrap());
    }

    #[test]
    fn srft_error_factor() {
        let spec = flat(4, 1.0, 0.25, 60, 64);
        let r = srft_error_bound(64, 64, 4, &spec, Norm::Spectral).unwrap();
        assert!((r.value / 0.25 - 8f64.sqrt()).abs() < 1e-14);
        assert!(r.order_only);
        assert_eq!(r.failure_prob, Some(0.25));
        let z = flat(4, 1.0, 0.0, 60, 64);
        assert_eq!(srft_error_bound(64, 20, 4, &z, Norm::Frobenius).unwrap().value, 0.0);
    }

    #[test]
    fn id_amplification_values() {
        assert_eq!(id_amplification(0, 10), 2.0);
        assert!((id_amplification(8, 50) - (1.0 + 1345f64.sqrt())).abs() < 1e-13);
        assert!((id_amplification(8, 50) - 37.67).abs() < 5e-3);
        for n in 16..40 {
            assert!(id_amplification(8, n + 1) > id_amplification(8, n));
        }
    }

    #[test]
    fn intro_bounds_dominate() {
        let spec = flat(10, 1.0, 0.3, 90, 100);
        for p in [2usize, 5, 10] {
            assert!(gauss_mean_spectral(10, p, &spec).unwrap() <= intro_mean_bound(10, p, &spec).unwrap());
        }
        let d = gauss_deviation_simple_log(10, 5, &spec).unwrap();
        assert!(d.value <= intro_deviation_bound(10, 5, &spec).unwrap().value);
        for q in 0..4 {
            let detailed = power_scheme_bound(10, 10, q, &spec).unwrap();
            let coarse = intro_power_bound(10, q, &spec).unwrap();
            assert!(detailed <= coarse, "q = {q}");
            assert!(intro_truncation_bound(10, q, &spec).unwrap() >= coarse + 0.3 - 1e-15);
        }
    }
}
