//! Gram matrices, Hermitian eigenvalues, empirical spectral distributions,
//! Kolmogorov distance, and spectral moments.
//!
//! The eigensolver is self-contained: Householder tridiagonalization
//! followed by implicit-shift QL iteration. Complex Hermitian input goes
//! through the 2N x 2N real symmetric embedding `[[X, -Y], [Y, X]]`, whose
//! spectrum is that of `X + iY` with every eigenvalue doubled.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::ensemble::{MatrixData, PhiSample};
use crate::error::{Error, Result};

/// Entrywise Hermitian tolerance for validated constructors.
const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues above `-1e-9 * scale` are clamped to zero; anything lower is
/// a numeric failure for a Gram matrix.
const PSD_CLAMP: f64 = 1e-9;

/// A Hermitian positive semidefinite matrix `G = (1/(N_a N_b)) A B* B A*`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    dim: usize,
    data: MatrixData,
}

impl GramMatrix {
    /// Wrap an explicit real symmetric matrix (row-major), validating
    /// symmetry.
    pub fn from_real(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::usage("matrix data length != dim^2"));
        }
        for i in 0..dim {
            for j in 0..i {
                if (data[i * dim + j] - data[j * dim + i]).abs() > HERMITIAN_TOL * scale_of(&data) {
                    return Err(Error::usage("matrix is not symmetric"));
                }
            }
        }
        Ok(Self { dim, data: MatrixData::Real(data) })
    }

    /// Wrap an explicit complex Hermitian matrix (row-major), validating
    /// Hermitian symmetry.
    pub fn from_complex(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::usage("matrix data length != dim^2"));
        }
        let scale = data.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
        for i in 0..dim {
            for j in 0..=i {
                if (data[i * dim + j] - data[j * dim + i].conj()).norm() > HERMITIAN_TOL * scale {
                    return Err(Error::usage("matrix is not Hermitian"));
                }
            }
        }
        Ok(Self { dim, data: MatrixData::Complex(data) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &MatrixData {
        &self.data
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        match &self.data {
            MatrixData::Real(v) => Complex64::new(v[i * self.dim + j], 0.0),
            MatrixData::Complex(v) => v[i * self.dim + j],
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.entry(i, i).re).sum()
    }
}

fn scale_of(data: &[f64]) -> f64 {
    data.iter().fold(1.0f64, |m, &x| m.max(x.abs()))
}

/// `G = (1/(N_a N_b)) A B* B A*`, the Gram matrix of
/// `(1/sqrt(N_a N_b)) A B*`. Real fast path when both samples are real.
pub fn gram_product(a: &PhiSample, b: &PhiSample) -> Result<GramMatrix> {
    if a.cols() != b.cols() {
        return Err(Error::usage(format!(
            "column mismatch: A has n = {}, B has n = {}",
            a.cols(),
            b.cols()
        )));
    }
    let (na, nb, n) = (a.rows(), b.rows(), a.cols());
    let scale = 1.0 / (na as f64 * nb as f64);
    match (a.data(), b.data()) {
        (MatrixData::Real(av), MatrixData::Real(bv)) => {
            // M = A B^T (N_a x N_b)
            let mut m = vec![0.0f64; na * nb];
            for i in 0..na {
                let arow = &av[i * n..(i + 1) * n];
                for j in 0..nb {
                    let brow = &bv[j * n..(j + 1) * n];
                    let mut acc = 0.0;
                    for c in 0..n {
                        acc += arow[c] * brow[c];
                    }
                    m[i * nb + j] = acc;
                }
            }
            // G = scale * M M^T, symmetric
            let mut g = vec![0.0f64; na * na];
            for i in 0..na {
                for i2 in 0..=i {
                    let mut acc = 0.0;
                    for j in 0..nb {
                        acc += m[i * nb + j] * m[i2 * nb + j];
                    }
                    let val = scale * acc;
                    g[i * na + i2] = val;
                    g[i2 * na + i] = val;
                }
            }
            Ok(GramMatrix { dim: na, data: MatrixData::Real(g) })
        }
        _ => {
            let ac: Vec<Complex64> = (0..na).flat_map(|i| (0..n).map(move |c| a.entry(i, c))).collect();
            let bc: Vec<Complex64> = (0..nb).flat_map(|j| (0..n).map(move |c| b.entry(j, c))).collect();
            let mut m = vec![Complex64::new(0.0, 0.0); na * nb];
            for i in 0..na {
                for j in 0..nb {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for c in 0..n {
                        acc += ac[i * n + c] * bc[j * n + c].conj();
                    }
                    m[i * nb + j] = acc;
                }
            }
            let mut g = vec![Complex64::new(0.0, 0.0); na * na];
            for i in 0..na {
                for i2 in 0..=i {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j in 0..nb {
                        acc += m[i * nb + j] * m[i2 * nb + j].conj();
                    }
                    let val = scale * acc;
                    g[i * na + i2] = val;
                    g[i2 * na + i] = val.conj();
                }
            }
            Ok(GramMatrix { dim: na, data: MatrixData::Complex(g) })
        }
    }
}

/// Householder reduction of a real symmetric matrix (row-major, destroyed)
/// to tridiagonal form. `d` receives the diagonal, `e` the subdiagonal with
/// `e[0] = 0`.
fn tridiagonalize(a: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64]) {
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let mut scale = 0.0;
            for k in 0..=l {
                scale += a[i * n + k].abs();
            }
            if scale == 0.0 {
                e[i] = a[i * n + l];
            } else {
                for k in 0..=l {
                    a[i * n + k] /= scale;
                    h += a[i * n + k] * a[i * n + k];
                }
                let mut f = a[i * n + l];
                let g = if f >= 0.0 { -libm::sqrt(h) } else { libm::sqrt(h) };
                e[i] = scale * g;
                h -= f * g;
                a[i * n + l] = f - g;
                f = 0.0;
                for j in 0..=l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[j * n + k] * a[i * n + k];
                    }
                    for k in (j + 1)..=l {
                        g += a[k * n + j] * a[i * n + k];
                    }
                    e[j] = g / h;
                    f += e[j] * a[i * n + j];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let fj = a[i * n + j];
                    let gj = e[j] - hh * fj;
                    e[j] = gj;
                    for k in 0..=j {
                        a[j * n + k] -= fj * e[k] + gj * a[i * n + k];
                    }
                }
            }
        } else {
            e[i] = a[i * n + l];
        }
        d[i] = h;
    }
    e[0] = 0.0;
    for i in 0..n {
        d[i] = a[i * n + i];
    }
}

/// Implicit-shift QL iteration on a symmetric tridiagonal matrix; `d`
/// ends up holding the (unsorted) eigenvalues.
fn tql_implicit(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    // Absolute deflation floor: a purely relative test stalls inside clusters
    // of (near-)zero eigenvalues, where |d[m]| + |d[m+1]| is itself round-off
    // sized. Dropping any e[m] below eps * ||T|| perturbs eigenvalues by no
    // more than the solver's intrinsic accuracy.
    let mut anorm = 0.0f64;
    for i in 0..n {
        let row = d[i].abs() + e[i].abs();
        if row > anorm {
            anorm = row;
        }
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd.max(anorm) {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 64 {
                return Err(Error::numeric(format!(
                    "QL iteration failed to converge at index {l} of {n}"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            let sign_r = if g >= 0.0 { r } else { -r };
            g = d[m] - d[l] + e[l] / (g + sign_r);
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                f = (d[i] - g) * s + 2.0 * c * b;
                p = s * f;
                d[i + 1] = g + p;
                g = c * f - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Eigenvalues of a real symmetric matrix (row-major copy-in), ascending.
pub fn symmetric_eigenvalues(matrix: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut a = matrix.to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if n == 1 {
        return Ok(vec![a[0]]);
    }
    tridiagonalize(&mut a, n, &mut d, &mut e);
    tql_implicit(&mut d, &mut e)?;
    d.sort_unstable_by(f64::total_cmp);
    Ok(d)
}

/// Eigenvalue list plus the count of slightly-negative values clamped to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub clamped_negatives: usize,
}

/// All eigenvalues of a Gram matrix, ascending, with round-off negatives
/// clamped to zero.
pub fn hermitian_eigenvalues_full(g: &GramMatrix) -> Result<EigenDecomposition> {
    let n = g.dim();
    let mut eigs = match g.data() {
        MatrixData::Real(v) => symmetric_eigenvalues(v, n)?,
        MatrixData::Complex(v) => {
            // [[X, -Y], [Y, X]] embedding: each eigenvalue appears twice.
            let mut emb = vec![0.0f64; 4 * n * n];
            let dim = 2 * n;
            for i in 0..n {
                for j in 0..n {
                    let z = v[i * n + j];
                    emb[i * dim + j] = z.re;
                    emb[(i + n) * dim + j + n] = z.re;
                    emb[i * dim + j + n] = -z.im;
                    emb[(i + n) * dim + j] = z.im;
                }
            }
            let doubled = symmetric_eigenvalues(&emb, dim)?;
            (0..n).map(|k| 0.5 * (doubled[2 * k] + doubled[2 * k + 1])).collect()
        }
    };
    let scale = eigs.iter().fold(1.0f64, |m, &x| m.max(x.abs()));
    let mut clamped = 0usize;
    for lam in eigs.iter_mut() {
        if *lam < 0.0 {
            if *lam < -PSD_CLAMP * scale {
                return Err(Error::numeric(format!(
                    "eigenvalue {lam} is negative beyond the PSD tolerance"
                )));
            }
            *lam = 0.0;
            clamped += 1;
        }
    }
    eigs.sort_unstable_by(f64::total_cmp);
    Ok(EigenDecomposition { eigenvalues: eigs, clamped_negatives: clamped })
}

/// Convenience wrapper discarding the clamp counter.
pub fn hermitian_eigenvalues(g: &GramMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eigenvalues_full(g)?.eigenvalues)
}

/// `(1/N) sum_i lambda_i^l`.
pub fn spectral_moment(eigs: &[f64], l: u32) -> f64 {
    if eigs.is_empty() {
        return 0.0;
    }
    let sum: f64 = eigs.iter().map(|&x| pow_int(x, l)).sum();
    sum / eigs.len() as f64
}

fn pow_int(x: f64, l: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..l {
        acc *= x;
    }
    acc
}

/// A cumulative distribution function that a Kolmogorov distance can be
/// computed against.
pub trait Cdf {
    /// `F(z)` (right-continuous).
    fn eval(&self, z: f64) -> f64;
    /// Left limit `F(z-)`.
    fn eval_left(&self, z: f64) -> f64;
    /// Points where the sup-distance scan must look (jumps / knots).
    fn breakpoints(&self) -> Vec<f64>;
}

/// Right-continuous step CDF of an eigenvalue multiset.
#[derive(Debug, Clone, PartialEq)]
pub struct EsdCurve {
    eigs: Vec<f64>,
}

impl EsdCurve {
    pub fn new(mut eigs: Vec<f64>) -> Self {
        eigs.sort_unstable_by(f64::total_cmp);
        Self { eigs }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigs
    }

    pub fn len(&self) -> usize {
        self.eigs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigs.is_empty()
    }
}

impl Cdf for EsdCurve {
    fn eval(&self, z: f64) -> f64 {
        let count = self.eigs.partition_point(|&x| x <= z);
        count as f64 / self.eigs.len() as f64
    }

    fn eval_left(&self, z: f64) -> f64 {
        let count = self.eigs.partition_point(|&x| x < z);
        count as f64 / self.eigs.len() as f64
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.eigs.clone()
    }
}

/// `sup_x |F(x) - G(x)|`, scanned over the union of both breakpoint sets
/// with both one-sided limits checked at every point.
pub fn kolmogorov_distance(f: &dyn Cdf, g: &dyn Cdf) -> f64 {
    let mut sup = 0.0f64;
    for z in f.breakpoints().into_iter().chain(g.breakpoints()) {
        sup = sup.max((f.eval(z) - g.eval(z)).abs());
        sup = sup.max((f.eval_left(z) - g.eval_left(z)).abs());
    }
    sup
}
