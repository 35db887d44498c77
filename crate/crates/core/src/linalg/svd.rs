use crate::error::{Error, Result};
use crate::linalg::householder::{from_cols, to_cols, Reflector};
use crate::prelude::*;

/// Thin SVD `B = U diag(sigma) V^*` with `min(m,n)` singular triplets.
#[derive(Clone, Debug)]
pub struct SmallSvd<T: Scalar> {
    pub u: Matrix<T>,
    pub sigma: Vec<T::Real>,
    pub v: Matrix<T>,
}

impl<T: Scalar> SmallSvd<T> {
    pub fn reconstruct(&self) -> Matrix<T> {
        let us = Matrix::from_fn(self.u.nrows(), self.u.ncols(), |i, j| {
            self.u[(i, j)].scale(self.sigma[j])
        });
        us.matmul_adjoint(&self.v)
    }
}

/// Sweeps allowed per unit of `min(m,n)` before giving up.
pub const SVD_SWEEPS_PER_DIM: usize = 100;

/// Dense SVD by Householder bidiagonalization followed by implicit-shift QR
/// on the real bidiagonal.
///
/// Singular values are sorted descending. Each left singular vector has its
/// first significant entry real and nonnegative.
pub fn small_svd<T: Scalar>(b: &Matrix<T>) -> Result<SmallSvd<T>> {
    let (m, n) = b.shape();
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("SVD of an empty matrix".into()));
    }
    if !b.all_finite() {
        return Err(Error::NonFinite("SVD input".into()));
    }
    if m < n {
        let t = tall_svd(&b.adjoint())?;
        let mut out = SmallSvd { u: t.v, sigma: t.sigma, v: t.u };
        normalize_signs(&mut out);
        return Ok(out);
    }
    let mut out = tall_svd(b)?;
    normalize_signs(&mut out);
    Ok(out)
}

/// Singular values only.
pub fn singular_values<T: Scalar>(b: &Matrix<T>) -> Result<Vec<T::Real>> {
    if b.is_empty() {
        return Ok(Vec::new());
    }
    small_svd(b).map(|s| s.sigma)
}

/// Spectral norm via the full SVD.
pub fn spectral_norm<T: Scalar>(b: &Matrix<T>) -> Result<T::Real> {
    Ok(singular_values(b)?.first().copied().unwrap_or_else(T::Real::zero))
}

fn normalize_signs<T: Scalar>(s: &mut SmallSvd<T>) {
    let (m, k) = s.u.shape();
    for j in 0..k {
        let amax = (0..m).map(|i| s.u[(i, j)].modulus()).fold(T::Real::zero(), |a, b| a.max(b));
        if amax == T::Real::zero() {
            continue;
        }
        let thresh = amax * T::Real::lit(1e-8);
        let Some(i0) = (0..m).find(|&i| s.u[(i, j)].modulus() > thresh) else {
            continue;
        };
        let lead = s.u[(i0, j)];
        let c = lead.phase().conj();
        if c == T::one() {
            continue;
        }
        for i in 0..m {
            s.u[(i, j)] *= c;
        }
        s.u[(i0, j)] = T::from_real(lead.modulus());
        for i in 0..s.v.nrows() {
            s.v[(i, j)] *= c;
        }
    }
}

/// SVD for `m >= n`.
fn tall_svd<T: Scalar>(b: &Matrix<T>) -> Result<SmallSvd<T>> {
    let (m, n) = b.shape();
    let mut cols = to_cols(b);
    let mut left: Vec<Option<Reflector<T>>> = Vec::with_capacity(n);
    let mut right: Vec<Option<Reflector<T>>> = Vec::with_capacity(n);
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];

    for k in 0..n {
        let (h, beta) = Reflector::annihilate(&cols[k][k..], k);
        if let Some(h) = &h {
            for c in cols.iter_mut().skip(k + 1) {
                h.apply(c);
            }
        }
        d[k] = beta;
        left.push(h);
        if k + 2 <= n {
            // row k, columns k+1..n: reflect the conjugated row
            let row: Vec<T> = (k + 1..n).map(|j| cols[j][k].conj()).collect();
            let (g, gamma) = Reflector::annihilate(&row, k + 1);
            if let Some(g) = &g {
                // A <- A G acts on rows; apply G to each conjugated row segment
                for i in k + 1..m {
                    let mut r: Vec<T> = (0..n).map(|j| cols[j][i].conj()).collect();
                    g.apply(&mut r);
                    for j in k + 1..n {
                        cols[j][i] = r[j].conj();
                    }
                }
            }
            e[k] = gamma.conj();
            right.push(g);
        }
    }

    // U (m x n) and V (n x n) from the reflectors
    let mut u = {
        let mut q: Vec<Vec<T>> = (0..n)
            .map(|j| {
                let mut c = vec![T::zero(); m];
                c[j] = T::one();
                c
            })
            .collect();
        for h in left.iter().rev().flatten() {
            for c in q.iter_mut() {
                h.apply(c);
            }
        }
        q
    };
    let mut v = {
        let mut q: Vec<Vec<T>> = (0..n)
            .map(|j| {
                let mut c = vec![T::zero(); n];
                c[j] = T::one();
                c
            })
            .collect();
        for g in right.iter().rev().flatten() {
            for c in q.iter_mut() {
                g.apply(c);
            }
        }
        q
    };

    // phase scaling to a real nonnegative bidiagonal
    let mut s = vec![T::Real::zero(); n];
    let mut f = vec![T::Real::zero(); n];
    let mut r = T::one();
    for i in 0..n {
        let l = (d[i] * r).phase();
        s[i] = (l.conj() * d[i] * r).re();
        for x in u[i].iter_mut() {
            *x *= l;
        }
        for x in v[i].iter_mut() {
            *x *= r;
        }
        if i + 1 < n {
            let rn = l * e[i].phase().conj();
            f[i] = (l.conj() * e[i] * rn).re();
            r = rn;
        }
    }

    bidiagonal_qr(&mut s, &mut f, &mut u, &mut v, m, n)?;
    Ok(SmallSvd { u: from_cols(m, &u), sigma: s, v: from_cols(n, &v) })
}

#[inline]
fn rot<T: Scalar>(cols: &mut [Vec<T>], a: usize, b: usize, cs: T::Real, sn: T::Real) {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let (x, y) = cols.split_at_mut(hi);
    let (ca, cb) = if a < b { (&mut x[lo], &mut y[0]) } else { (&mut y[0], &mut x[lo]) };
    for (p, q) in ca.iter_mut().zip(cb.iter_mut()) {
        let t = p.scale(cs) + q.scale(sn);
        *q = q.scale(cs) - p.scale(sn);
        *p = t;
    }
}

/// Golub-Kahan implicit-shift QR on the real bidiagonal `(s, e)`; rotations
/// are accumulated into the columns of `u` and `v`.
fn bidiagonal_qr<T: Scalar>(
    s: &mut [T::Real],
    e: &mut [T::Real],
    u: &mut [Vec<T>],
    v: &mut [Vec<T>],
    m: usize,
    n: usize,
) -> Result<()> {
    let eps = T::Real::epsilon();
    let tiny = T::Real::min_positive_value() / eps;
    let zero = T::Real::zero();
    let two = T::Real::lit(2.0);
    let cap = SVD_SWEEPS_PER_DIM * m.min(n);
    let mut sweeps = 0usize;

    let mut p = n;
    let pp = n - 1;
    while p > 0 {
        let mut k: isize = p as isize - 2;
        while k >= 0 {
            let ku = k as usize;
            if e[ku].abs() <= tiny + eps * (s[ku].abs() + s[ku + 1].abs()) {
                e[ku] = zero;
                break;
            }
            k -= 1;
        }
        let kase;
        if k == p as isize - 2 {
            kase = 4;
        } else {
            let mut ks: isize = p as isize - 1;
            while ks > k {
                let ksu = ks as usize;
                let t = (if ksu != p { e[ksu].abs() } else { zero })
                    + (if ks != k + 1 { e[ksu - 1].abs() } else { zero });
                if s[ksu].abs() <= tiny + eps * t {
                    s[ksu] = zero;
                    break;
                }
                ks -= 1;
            }
            if ks == k {
                kase = 3;
            } else if ks == p as isize - 1 {
                kase = 1;
            } else {
                kase = 2;
                k = ks;
            }
        }
        let k = (k + 1) as usize;

        match kase {
            // deflate negligible s[p-1]
            1 => {
                let mut f = e[p - 2];
                e[p - 2] = zero;
                let mut j = p - 2;
                loop {
                    let t = s[j].hypot(f);
                    let cs = s[j] / t;
                    let sn = f / t;
                    s[j] = t;
                    if j != k {
                        f = -sn * e[j - 1];
                        e[j - 1] = cs * e[j - 1];
                    }
                    rot(v, j, p - 1, cs, sn);
                    if j == k {
                        break;
                    }
                    j -= 1;
                }
            }
            // split at negligible s[k-1]
            2 => {
                let mut f = e[k - 1];
                e[k - 1] = zero;
                for j in k..p {
                    let t = s[j].hypot(f);
                    let cs = s[j] / t;
                    let sn = f / t;
                    s[j] = t;
                    f = -sn * e[j];
                    e[j] = cs * e[j];
                    rot(u, j, k - 1, cs, sn);
                }
            }
            // one implicit QR sweep
            3 => {
                sweeps += 1;
                if sweeps > cap {
                    return Err(Error::KernelFailure(format!(
                        "SVD did not converge within {cap} sweeps"
                    )));
                }
                let scale = s[p - 1]
                    .abs()
                    .max(s[p - 2].abs())
                    .max(e[p - 2].abs())
                    .max(s[k].abs())
                    .max(e[k].abs());
                let sp = s[p - 1] / scale;
                let spm1 = s[p - 2] / scale;
                let epm1 = e[p - 2] / scale;
                let sk = s[k] / scale;
                let ek = e[k] / scale;
                let b = ((spm1 + sp) * (spm1 - sp) + epm1 * epm1) / two;
                let c = (sp * epm1) * (sp * epm1);
                let mut shift = zero;
                if b != zero || c != zero {
                    shift = (b * b + c).sqrt();
                    if b < zero {
                        shift = -shift;
                    }
                    shift = c / (b + shift);
                }
                let mut f = (sk + sp) * (sk - sp) + shift;
                let mut g = sk * ek;
                for j in k..p - 1 {
                    let t = f.hypot(g);
                    let cs = f / t;
                    let sn = g / t;
                    if j != k {
                        e[j - 1] = t;
                    }
                    f = cs * s[j] + sn * e[j];
                    e[j] = cs * e[j] - sn * s[j];
                    g = sn * s[j + 1];
                    s[j + 1] = cs * s[j + 1];
                    rot(v, j, j + 1, cs, sn);
                    let t = f.hypot(g);
                    let cs = f / t;
                    let sn = g / t;
                    s[j] = t;
                    f = cs * e[j] + sn * s[j + 1];
                    s[j + 1] = -sn * e[j] + cs * s[j + 1];
                    g = sn * e[j + 1];
                    e[j + 1] = cs * e[j + 1];
                    if j < m - 1 {
                        rot(u, j, j + 1, cs, sn);
                    }
                }
                e[p - 2] = f;
            }
            // convergence of s[k]
            _ => {
                let mut k = k;
                if s[k] <= zero {
                    s[k] = if s[k] < zero { -s[k] } else { zero };
                    for x in v[k].iter_mut() {
                        *x = -*x;
                    }
                }
                while k < pp {
                    if s[k] >= s[k + 1] {
                        break;
                    }
                    s.swap(k, k + 1);
                    v.swap(k, k + 1);
                    u.swap(k, k + 1);
                    k += 1;
                }
                p -= 1;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::matrix::orthonormality_defect;
    use crate::sketch::gaussian_matrix;

    fn check<T: Scalar>(b: &Matrix<T>) -> SmallSvd<T> {
        let s = small_svd(b).unwrap();
        let (m, n) = b.shape();
        let k = m.min(n);
        assert_eq!(s.u.shape(), (m, k));
        assert_eq!(s.v.shape(), (n, k));
        let s1 = s.sigma[0];
        let tol = T::Real::lit(1e-12) * T::Real::from_count(m.max(n)) * s1.max(T::Real::min_positive_value());
        assert!((&s.reconstruct() - b).fro_norm() <= tol, "reconstruction");
        assert!(orthonormality_defect(&s.u) <= T::Real::lit(1e-12) * T::Real::from_count(k));
        assert!(orthonormality_defect(&s.v) <= T::Real::lit(1e-12) * T::Real::from_count(k));
        for w in s.sigma.windows(2) {
            assert!(w[0] >= w[1] && w[1] >= T::Real::zero());
        }
        s
    }

    #[test]
    fn diagonal() {
        let s = check(&Matrix::from_diag(&[3.0, 1.0]));
        assert_eq!(s.sigma, vec![3.0, 1.0]);
    }

    #[test]
    fn swap_matrix() {
        let s = check(&Matrix::<f64>::from_rows(&[[0.0, 1.0], [1.0, 0.0]]));
        assert!((s.sigma[0] - 1.0).abs() < 1e-15 && (s.sigma[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn golden_ratio() {
        // eigenvalues of A^T A are (3 ± sqrt 5) / 2
        let s = check(&Matrix::<f64>::from_rows(&[[1.0, 1.0], [0.0, 1.0]]));
        let hi = ((3.0 + 5f64.sqrt()) / 2.0).sqrt();
        let lo = ((3.0 - 5f64.sqrt()) / 2.0).sqrt();
        assert!((s.sigma[0] - hi).abs() < 1e-9);
        assert!((s.sigma[1] - lo).abs() < 1e-9);
        assert!((hi - 1.6180339887).abs() < 1e-9);
    }

    #[test]
    fn shapes_and_fields() {
        for (m, n, seed) in [(10, 7, 1), (7, 10, 2), (1, 5, 3), (5, 1, 4), (30, 30, 5)] {
            check(&gaussian_matrix::<f64>(m, n, seed));
            check(&gaussian_matrix::<c64>(m, n, seed));
            check(&gaussian_matrix::<f32>(m, n, seed).map(|x| x as f64));
        }
    }

    #[test]
    fn rank_deficient_and_zero() {
        let a = Matrix::from_rows(&[[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [1.0, 2.0, 3.0]]);
        let s = check(&a);
        assert!(s.sigma[1] < 1e-14 * s.sigma[0]);
        let z = small_svd(&Matrix::<f64>::zeros(3, 2)).unwrap();
        assert_eq!(z.sigma, vec![0.0, 0.0]);
    }

    #[test]
    fn sign_convention() {
        let s = check(&gaussian_matrix::<c64>(6, 4, 8));
        for j in 0..4 {
            let first = (0..6).map(|i| s.u[(i, j)]).find(|z| z.norm() > 1e-8).unwrap();
            assert!(first.im == 0.0 && first.re > 0.0);
        }
    }

    #[test]
    fn graded_spectrum() {
        let a = Matrix::from_diag(&[1.0, 1e-5, 1e-10, 1e-15]);
        let q = crate::linalg::householder_qr(&gaussian_matrix::<f64>(4, 4, 3)).q;
        let b = q.matmul(&a).matmul_adjoint(&q);
        let s = check(&b);
        assert!((s.sigma[1] - 1e-5).abs() < 1e-15);
    }
}
