//! Reference distributions: the closed-form Marchenko-Pastur CDF and the
//! simulated free-convolution reference built from large i.i.d. baseline
//! matrices, with an explicit resolution tolerance.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ensemble::{raw_sample, MatrixData, MatrixRole, SeedSpec};
use crate::error::{Error, Result};
use crate::spectra::{gram_product, hermitian_eigenvalues, spectral_moment, Cdf};

/// Marchenko-Pastur CDF with ratio `y` (variance-one scaling: support edges
/// at `(1 +- sqrt(y))^2`, atom `1 - 1/y` at zero when y > 1).
///
/// The bulk integral uses Simpson's rule after `x = a + (b-a)(1-cos t)/2`,
/// which removes the square-root singularities at both edges.
pub fn mp_cdf(y: f64, x: f64) -> Result<f64> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::usage("aspect ratio y must be positive and finite"));
    }
    if x.is_nan() {
        return Err(Error::usage("mp_cdf at NaN"));
    }
    if x < 0.0 {
        return Ok(0.0);
    }
    let atom = (1.0 - 1.0 / y).max(0.0);
    let s = libm::sqrt(y);
    let a = (1.0 - s) * (1.0 - s);
    let b = (1.0 + s) * (1.0 + s);
    if x < a {
        return Ok(atom);
    }
    if x >= b {
        return Ok(1.0);
    }
    // theta at the upper limit of integration
    let c = (1.0 - 2.0 * (x - a) / (b - a)).clamp(-1.0, 1.0);
    let t_max = libm::acos(c);
    // density(x(t)) * x'(t) = (b-a)^2 sin^2 t / (8 pi y x(t)); when a = 0
    // the ratio sin^2 t / x(t) simplifies exactly to 2 (1 + cos t)/(b-a),
    // which also gives the finite t = 0 limit.
    let integrand = |t: f64| -> f64 {
        let ct = libm::cos(t);
        let ratio = if a == 0.0 {
            2.0 * (1.0 + ct) / (b - a)
        } else {
            let xt = a + (b - a) * (1.0 - ct) / 2.0;
            let st = libm::sin(t);
            st * st / xt
        };
        (b - a) * (b - a) * ratio / (8.0 * core::f64::consts::PI * y)
    };
    let steps = 2048usize; // even; ~1e-12 accurate for the smooth integrand
    let h = t_max / steps as f64;
    let mut acc = integrand(0.0) + integrand(t_max);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * integrand(i as f64 * h);
    }
    let bulk = acc * h / 3.0;
    Ok((atom + bulk).clamp(0.0, 1.0))
}

/// Which i.i.d. baseline the simulated reference is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    /// Entries +-1 with equal probability.
    Rademacher,
    /// Entries (g1 + i g2)/sqrt(2), g standard normal.
    ComplexGaussian,
}

impl BaselineKind {
    pub fn label(self) -> &'static str {
        match self {
            BaselineKind::Rademacher => "rademacher",
            BaselineKind::ComplexGaussian => "complex_gaussian",
        }
    }
}

fn standard_normal(rng: &mut ChaCha8Rng) -> (f64, f64) {
    // Box-Muller; u1 in (0, 1] to keep the log finite.
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    let r = libm::sqrt(-2.0 * libm::log(u1));
    let t = 2.0 * core::f64::consts::PI * u2;
    (r * libm::cos(t), r * libm::sin(t))
}

fn sample_baseline(
    kind: BaselineKind,
    rows: usize,
    cols: usize,
    child_seed: u64,
) -> crate::ensemble::PhiSample {
    let mut rng = ChaCha8Rng::seed_from_u64(child_seed);
    let data = match kind {
        BaselineKind::Rademacher => {
            let v: Vec<f64> = (0..rows * cols)
                .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
                .collect();
            MatrixData::Real(v)
        }
        BaselineKind::ComplexGaussian => {
            let inv = 1.0 / libm::sqrt(2.0);
            let v: Vec<Complex64> = (0..rows * cols)
                .map(|_| {
                    let (g1, g2) = standard_normal(&mut rng);
                    Complex64::new(g1 * inv, g2 * inv)
                })
                .collect();
            MatrixData::Complex(v)
        }
    };
    raw_sample(rows, cols, data, kind.label(), child_seed)
}

/// One baseline Gram draw at the given shape; deterministic in the child
/// seeds.
pub fn baseline_gram_sample(
    kind: BaselineKind,
    n: usize,
    n_a: usize,
    n_b: usize,
    child_seed_a: u64,
    child_seed_b: u64,
) -> Result<crate::spectra::GramMatrix> {
    if n == 0 || n_a == 0 || n_b == 0 {
        return Err(Error::usage("baseline shape must be positive"));
    }
    let a = sample_baseline(kind, n_a, n, child_seed_a);
    let b = sample_baseline(kind, n_b, n, child_seed_b);
    gram_product(&a, &b)
}

/// Eigenvalues (ascending) of one baseline Gram draw.
pub fn baseline_gram_eigenvalues(
    kind: BaselineKind,
    n: usize,
    n_a: usize,
    n_b: usize,
    child_seed_a: u64,
    child_seed_b: u64,
) -> Result<Vec<f64>> {
    hermitian_eigenvalues(&baseline_gram_sample(kind, n, n_a, n_b, child_seed_a, child_seed_b)?)
}

/// A pooled empirical CDF with a resolution tolerance `rho`, serving as the
/// stand-in for the limiting free-convolution law.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCdf {
    eigs: Vec<f64>,
    rho: f64,
    y_a: f64,
    y_b: f64,
    kind: BaselineKind,
    n_big: usize,
    trials: u64,
    seed: u64,
}

impl TabulatedCdf {
    /// Agreement tolerance for comparisons against this table.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigs
    }

    /// Pooled spectral moment `(1/count) sum lambda^l`.
    pub fn moment(&self, l: u32) -> f64 {
        spectral_moment(&self.eigs, l)
    }

    /// Mass of the simulated point atom at zero: eigenvalues below a
    /// relative threshold of the largest one.
    pub fn atom_at_zero(&self) -> f64 {
        let scale = self.eigs.last().copied().unwrap_or(0.0).max(1.0);
        let zeros = self.eigs.partition_point(|&x| x <= 1e-8 * scale);
        zeros as f64 / self.eigs.len() as f64
    }

    /// `x,cdf` rows preceded by `# key=value` parameter comments.
    pub fn export_csv(&self) -> String {
        let mut out = format!(
            "# baseline={}\n# y_a={:.16e}\n# y_b={:.16e}\n# n_big={}\n# trials={}\n# seed={}\n# rho={:.16e}\nx,cdf\n",
            self.kind.label(),
            self.y_a,
            self.y_b,
            self.n_big,
            self.trials,
            self.seed,
            self.rho
        );
        let count = self.eigs.len() as f64;
        for (i, &x) in self.eigs.iter().enumerate() {
            out.push_str(&format!("{x:.16e},{:.16e}\n", (i + 1) as f64 / count));
        }
        out
    }
}

impl Cdf for TabulatedCdf {
    fn eval(&self, z: f64) -> f64 {
        self.eigs.partition_point(|&x| x <= z) as f64 / self.eigs.len() as f64
    }

    fn eval_left(&self, z: f64) -> f64 {
        self.eigs.partition_point(|&x| x < z) as f64 / self.eigs.len() as f64
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.eigs.clone()
    }
}

/// Simulated reference law at aspect ratios `(y_a, y_b)`: pools the Gram
/// eigenvalues of `trials` independent baseline draws at size
/// `N_a = n_big`, `n = round(n_big y_a)`, `N_b = round(n / y_b)`.
///
/// The tolerance is `rho = 1/sqrt(n_big * trials) + 1/n_big`.
pub fn reference_cdf(
    y_a: f64,
    y_b: f64,
    kind: BaselineKind,
    n_big: usize,
    trials: u64,
    seed: SeedSpec,
) -> Result<TabulatedCdf> {
    if !(y_a > 0.0 && y_b > 0.0) {
        return Err(Error::usage("aspect ratios must be positive"));
    }
    if n_big == 0 || trials == 0 {
        return Err(Error::usage("n_big and trials must be positive"));
    }
    let n_a = n_big;
    let n = libm::round(n_big as f64 * y_a) as usize;
    let n_b = libm::round(n as f64 / y_b) as usize;
    if n == 0 || n_b == 0 {
        return Err(Error::usage("aspect ratios too small for this n_big"));
    }
    let mut eigs = Vec::with_capacity(n_a * trials as usize);
    for t in 0..trials {
        eigs.extend(baseline_gram_eigenvalues(
            kind,
            n,
            n_a,
            n_b,
            seed.child(t, MatrixRole::A),
            seed.child(t, MatrixRole::B),
        )?);
    }
    eigs.sort_unstable_by(f64::total_cmp);
    let rho = 1.0 / libm::sqrt(n_big as f64 * trials as f64) + 1.0 / n_big as f64;
    Ok(TabulatedCdf {
        eigs,
        rho,
        y_a,
        y_b,
        kind,
        n_big,
        trials,
        seed: seed.master,
    })
}
