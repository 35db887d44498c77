use crate::error::{Error, Result};
use crate::linalg::householder::{from_cols, to_cols, Reflector};
use crate::prelude::*;

/// Eigenpairs of a Hermitian matrix: `B = V diag(lambda) V^*`.
#[derive(Clone, Debug)]
pub struct HermitianEig<T: Scalar> {
    pub v: Matrix<T>,
    pub lambda: Vec<T::Real>,
}

impl<T: Scalar> HermitianEig<T> {
    pub fn reconstruct(&self) -> Matrix<T> {
        let vl = Matrix::from_fn(self.v.nrows(), self.v.ncols(), |i, j| self.v[(i, j)].scale(self.lambda[j]));
        vl.matmul_adjoint(&self.v)
    }
}

/// QL sweeps allowed per unit of dimension.
pub const EIG_SWEEPS_PER_DIM: usize = 100;

/// Hermitian eigendecomposition by Householder tridiagonalization and
/// implicit QL.
///
/// The input is symmetrized as `(B + B^*)/2` first. Eigenvalues are sorted by
/// descending magnitude, and equal magnitudes by descending value.
pub fn small_eig_hermitian<T: Scalar>(b: &Matrix<T>) -> Result<HermitianEig<T>> {
    let (m, n) = b.shape();
    if m != n {
        return Err(Error::DimensionMismatch(format!("eig of a {m}x{n} matrix")));
    }
    if n == 0 {
        return Ok(HermitianEig { v: Matrix::zeros(0, 0), lambda: vec![] });
    }
    if !b.all_finite() {
        return Err(Error::NonFinite("eig input".into()));
    }
    let a = b.hermitian_part();
    let mut cols = to_cols(&a);
    let mut refl: Vec<Option<Reflector<T>>> = Vec::with_capacity(n);
    let mut diag = vec![T::Real::zero(); n];
    let mut sub = vec![T::zero(); n];

    for k in 0..n.saturating_sub(2) {
        let (h, beta) = Reflector::annihilate(&cols[k][k + 1..], k + 1);
        if let Some(h) = &h {
            // A <- H A H on the trailing block
            for c in cols.iter_mut().skip(k + 1) {
                h.apply(c);
            }
            for i in k + 1..n {
                let mut r: Vec<T> = (0..n).map(|j| cols[j][i].conj()).collect();
                h.apply(&mut r);
                for j in k + 1..n {
                    cols[j][i] = r[j].conj();
                }
            }
        }
        sub[k] = beta;
        refl.push(h);
    }
    for k in 0..n {
        diag[k] = cols[k][k].re();
    }
    if n >= 2 {
        sub[n - 2] = cols[n - 2][n - 1];
    }

    let mut z: Vec<Vec<T>> = (0..n)
        .map(|j| {
            let mut c = vec![T::zero(); n];
            c[j] = T::one();
            c
        })
        .collect();
    for h in refl.iter().rev().flatten() {
        for c in z.iter_mut() {
            h.apply(c);
        }
    }

    // real tridiagonal via a diagonal unitary similarity
    let mut e = vec![T::Real::zero(); n];
    let mut delta = T::one();
    for i in 0..n {
        if i > 0 {
            delta *= sub[i - 1].phase();
            for x in z[i].iter_mut() {
                *x *= delta;
            }
        }
        if i + 1 < n {
            e[i] = sub[i].modulus();
        }
    }

    tql2(&mut diag, &mut e, &mut z)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        diag[j].abs().partial_cmp(&diag[i].abs()).unwrap_or(std::cmp::Ordering::Equal)
    });
    // equal magnitudes (to rounding) go in descending value
    let scale = diag.iter().fold(T::Real::zero(), |a, &b| a.max(b.abs()));
    let close = T::Real::lit(64.0) * T::Real::epsilon() * scale;
    let mut i = 0;
    while i + 1 < n {
        let (a, b) = (diag[order[i]], diag[order[i + 1]]);
        if (a.abs() - b.abs()).abs() <= close && b > a {
            order.swap(i, i + 1);
        }
        i += 1;
    }

    let lambda: Vec<T::Real> = order.iter().map(|&i| diag[i]).collect();
    let mut v = from_cols(n, &order.iter().map(|&i| z[i].clone()).collect::<Vec<_>>());
    for j in 0..n {
        let amax = (0..n).map(|i| v[(i, j)].modulus()).fold(T::Real::zero(), |a, b| a.max(b));
        let thresh = amax * T::Real::lit(1e-8);
        if let Some(i0) = (0..n).find(|&i| v[(i, j)].modulus() > thresh) {
            let lead = v[(i0, j)];
            let c = lead.phase().conj();
            for i in 0..n {
                v[(i, j)] *= c;
            }
            v[(i0, j)] = T::from_real(lead.modulus());
        }
    }
    Ok(HermitianEig { v, lambda })
}

/// Implicit QL on the symmetric tridiagonal `(d, e)` with `e[i]` coupling
/// `i` and `i+1`; rotations are applied to the columns of `z`.
fn tql2<T: Scalar>(d: &mut [T::Real], e: &mut [T::Real], z: &mut [Vec<T>]) -> Result<()> {
    let n = d.len();
    let zero = T::Real::zero();
    let one = T::Real::one();
    let two = T::Real::lit(2.0);
    let eps = T::Real::epsilon();
    let cap = EIG_SWEEPS_PER_DIM * n.max(1);
    let mut sweeps = 0usize;
    let mut f = zero;
    let mut tst1 = zero;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            loop {
                sweeps += 1;
                if sweeps > cap {
                    return Err(Error::KernelFailure(format!(
                        "Hermitian eigensolver did not converge within {cap} sweeps"
                    )));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(one);
                if p < zero {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = one;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = zero;
                let mut s2 = zero;
                let mut i = m;
                while i > l {
                    i -= 1;
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = z.split_at_mut(i + 1);
                    let (zi, zi1) = (&mut lo[i], &mut hi[0]);
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let hv = *b;
                        *b = a.scale(s) + hv.scale(c);
                        *a = a.scale(c) - hv.scale(s);
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = zero;
    }
    Ok(())
}
