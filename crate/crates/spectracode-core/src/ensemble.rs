//! The additive character, the component-wise codeword map, and sampling of
//! the random row matrices from the space of codeword assignments.
//!
//! Sampling is *with replacement*: each of the `N` rows is an independent
//! uniform draw from the `q^k` codewords, matching the probability space the
//! moment formulas are computed over.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codes::LinearCode;
use crate::error::{Error, Result};
use crate::galois::{Fe, FieldSpec};

/// `psi(z) = exp(2 pi i tr(z) / p)`, a p-th root of unity; `(-1)^z` when
/// q = 2.
pub fn character(spec: &FieldSpec, z: Fe) -> Result<Complex64> {
    let t = spec.trace(z)? as f64;
    let p = spec.characteristic() as f64;
    let angle = 2.0 * core::f64::consts::PI * t / p;
    Ok(Complex64::new(libm::cos(angle), libm::sin(angle)))
}

/// Component-wise character image of a codeword over a prime field.
pub fn epsilon_row(spec: &FieldSpec, codeword: &[u64]) -> Result<Vec<Complex64>> {
    codeword.iter().map(|&c| character(spec, Fe(c))).collect()
}

/// Which of the two sampled matrices a child seed is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixRole {
    A,
    B,
}

impl MatrixRole {
    fn tag(self) -> u64 {
        match self {
            MatrixRole::A => 0xA,
            MatrixRole::B => 0xB,
        }
    }
}

/// Master seed plus the counter-based derivation rule for per-trial,
/// per-role child seeds. Identical `SeedSpec` means bit-identical samples
/// regardless of execution schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedSpec {
    pub master: u64,
}

impl SeedSpec {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    /// Child seed for trial `trial` and matrix role `role`.
    pub fn child(&self, trial: u64, role: MatrixRole) -> u64 {
        let mut x = self.master ^ trial.wrapping_mul(0x9e3779b97f4a7c15) ^ (role.tag() << 56);
        // splitmix64 finalizer, twice.
        for _ in 0..2 {
            x = x.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = x;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            x = z ^ (z >> 31);
        }
        x
    }
}

/// Dense row-major storage; real for q = 2 (entries are +-1), complex
/// otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixData {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

/// An `N x n` character-image matrix of sampled codewords.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiSample {
    rows: usize,
    cols: usize,
    data: MatrixData,
    /// Drawn codeword (message) indices, one per row.
    drawn: Vec<u64>,
    label: String,
    seed: u64,
}

impl PhiSample {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &MatrixData {
        &self.data
    }

    pub fn drawn_indices(&self) -> &[u64] {
        &self.drawn
    }

    pub fn source_label(&self) -> &str {
        &self.label
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        match &self.data {
            MatrixData::Real(v) => Complex64::new(v[r * self.cols + c], 0.0),
            MatrixData::Complex(v) => v[r * self.cols + c],
        }
    }

    /// Entries as "re,im" CSV lines (or bare +-1 integers for the real path).
    pub fn export_csv(&self) -> String {
        let mut out = String::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                if c > 0 {
                    out.push(',');
                }
                match &self.data {
                    MatrixData::Real(v) => {
                        out.push_str(&format!("{}", v[r * self.cols + c] as i64));
                    }
                    MatrixData::Complex(v) => {
                        let e = v[r * self.cols + c];
                        out.push_str(&format!("{:.17e} {:.17e}", e.re, e.im));
                    }
                }
            }
            out.push('\n');
        }
        out
    }

    /// Deterministic fixed-message sample; the test hook for forcing
    /// particular rows.
    pub fn from_message_indices(code: &LinearCode, indices: &[u64]) -> Result<Self> {
        let count = code.codeword_count();
        for &i in indices {
            if (i as u128) >= count {
                return Err(Error::usage(format!("message index {i} out of range")));
            }
        }
        build_sample(code, indices.to_vec(), 0)
    }
}

/// Internal constructor for non-codeword matrices (i.i.d. baselines).
pub(crate) fn raw_sample(
    rows: usize,
    cols: usize,
    data: MatrixData,
    label: &str,
    seed: u64,
) -> PhiSample {
    PhiSample {
        rows,
        cols,
        data,
        drawn: Vec::new(),
        label: String::from(label),
        seed,
    }
}

fn build_sample(code: &LinearCode, drawn: Vec<u64>, seed: u64) -> Result<PhiSample> {
    let n = code.length();
    let rows = drawn.len();
    let field = code.field();
    let data = if field.order() == 2 {
        let mut v = Vec::with_capacity(rows * n);
        for &idx in &drawn {
            let cw = code.encode(&code.message_from_index(idx))?;
            v.extend(cw.iter().map(|&b| 1.0 - 2.0 * b as f64));
        }
        MatrixData::Real(v)
    } else {
        let mut v = Vec::with_capacity(rows * n);
        for &idx in &drawn {
            let cw = code.encode(&code.message_from_index(idx))?;
            v.extend(epsilon_row(field, &cw)?);
        }
        MatrixData::Complex(v)
    };
    Ok(PhiSample {
        rows,
        cols: n,
        data,
        drawn,
        label: String::from(code.label()),
        seed,
    })
}

/// Draw `n_rows` codewords uniformly with replacement (deterministic in the
/// child seed) and map them through the character.
pub fn sample_phi(code: &LinearCode, n_rows: usize, child_seed: u64) -> Result<PhiSample> {
    if n_rows == 0 {
        return Err(Error::usage("need at least one row"));
    }
    let count = code.codeword_count();
    if count > u64::MAX as u128 {
        return Err(Error::resource("q^k does not fit the sampling index range"));
    }
    let count = count as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(child_seed);
    let drawn: Vec<u64> = (0..n_rows).map(|_| rng.gen_range(0..count)).collect();
    build_sample(code, drawn, child_seed)
}
