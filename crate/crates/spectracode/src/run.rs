//! Experiment execution and artifact emission. Every experiment produces a
//! deterministic set of files plus a manifest with SHA-256 digests; trial
//! parallelism never changes emitted bytes because seeds are derived per
//! trial and reductions happen in trial order.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::json;
use sha2::{Digest, Sha256};

use spectracode_core::error::{Error, Result};
use spectracode_core::moments::{
    exact_expected_moment, report_from_trials, trial_gram_eigenvalues, trial_spectral_moments,
    ORACLE_MAX_L,
};
use spectracode_core::reference::reference_cdf;
use spectracode_core::spectra::{kolmogorov_distance, EsdCurve};
use spectracode_core::ensemble::SeedSpec;

use crate::config::{ExperimentConfig, ExperimentKind};

/// Salt so the reference table's RNG stream never coincides with the code
/// ensemble's stream at the same master seed.
const REFERENCE_SEED_SALT: u64 = 0x7265_665f_7365_6564;

const DEFAULT_N_BIG: usize = 1024;
const DEFAULT_REFERENCE_TRIALS: u64 = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
}

fn f17(v: f64) -> String {
    format!("{v:.16e}")
}

fn resolve_codes(config: &ExperimentConfig) -> Result<(spectracode_core::codes::LinearCode, spectracode_core::codes::LinearCode)> {
    let da = config.require_code_a()?;
    let db = config.code_b.as_ref().unwrap_or(da);
    let a = da.build()?;
    let b = db.build()?;
    if a.length() != b.length() {
        return Err(Error::usage("code_a and code_b must share the length n"));
    }
    Ok((a, b))
}

fn reference_seed(config: &ExperimentConfig) -> SeedSpec {
    SeedSpec::new(config.seed_or_default() ^ REFERENCE_SEED_SALT)
}

fn build_reference(config: &ExperimentConfig, y_a: f64, y_b: f64) -> Result<spectracode_core::reference::TabulatedCdf> {
    reference_cdf(
        y_a,
        y_b,
        config.baseline_kind()?,
        config.n_big.unwrap_or(DEFAULT_N_BIG),
        config.reference_trials.unwrap_or(DEFAULT_REFERENCE_TRIALS),
        reference_seed(config),
    )
}

fn run_moments(config: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let (code_a, code_b) = resolve_codes(config)?;
    let n = code_a.length();
    let (n_a, n_b) = config.resolve_sizes(n)?;
    let trials = config.trials.unwrap_or(256);
    let l_max = config.l_max.unwrap_or(3);
    let seed = SeedSpec::new(config.seed_or_default());
    let per_trial: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| trial_spectral_moments(&code_a, &code_b, n_a, n_b, l_max, seed, t))
        .collect::<Result<_>>()?;
    let mut report = report_from_trials(n, n_a, n_b, &per_trial)?;
    if config.oracle.unwrap_or(false) {
        if l_max > ORACLE_MAX_L {
            // fill the rows the oracle can reach; leave the rest empty
            for row in report.rows.iter_mut() {
                if row.l <= ORACLE_MAX_L {
                    row.oracle = Some(exact_expected_moment(&code_a, &code_b, n_a, n_b, row.l)?);
                }
            }
        } else {
            report.attach_oracle(&code_a, &code_b)?;
        }
    }
    Ok(vec![Artifact {
        name: "moments.csv".into(),
        bytes: report.to_csv().into_bytes(),
    }])
}

fn run_esd(config: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let (code_a, code_b) = resolve_codes(config)?;
    let n = code_a.length();
    let (n_a, n_b) = config.resolve_sizes(n)?;
    let trials = config.trials.unwrap_or(16);
    if trials == 0 {
        return Err(Error::usage("need at least one trial"));
    }
    let seed = SeedSpec::new(config.seed_or_default());
    let per_trial: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| trial_gram_eigenvalues(&code_a, &code_b, n_a, n_b, seed, t))
        .collect::<Result<_>>()?;
    let pooled: Vec<f64> = per_trial.into_iter().flatten().collect();
    let curve = EsdCurve::new(pooled);

    let mut esd_csv = String::from("index,lambda\n");
    for (i, &x) in curve.eigenvalues().iter().enumerate() {
        esd_csv.push_str(&format!("{i},{}\n", f17(x)));
    }

    let y_a = n as f64 / n_a as f64;
    let y_b = n as f64 / n_b as f64;
    let table = build_reference(config, y_a, y_b)?;
    let dist = kolmogorov_distance(&curve, &table);
    let kolmogorov = json!({
        "kolmogorov_distance": dist,
        "rho": table.rho(),
        "y_a": y_a,
        "y_b": y_b,
        "n": n,
        "n_a": n_a,
        "n_b": n_b,
        "trials": trials,
        "code_a": code_a.label(),
        "code_b": code_b.label(),
    });

    let plt = "\
set datafile separator ','\n\
set key left top\n\
set xlabel 'x'\n\
set ylabel 'ESD'\n\
plot 'esd.csv' every ::1 using 2:($0/{count}) with steps title 'empirical'\n"
        .replace("{count}", &curve.len().to_string());

    Ok(vec![
        Artifact { name: "esd.csv".into(), bytes: esd_csv.into_bytes() },
        Artifact {
            name: "kolmogorov.json".into(),
            bytes: pretty_json(&kolmogorov),
        },
        Artifact { name: "esd.plt".into(), bytes: plt.into_bytes() },
    ])
}

fn run_reference(config: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let y_a = config.y_a.ok_or_else(|| Error::usage("config field 'y_a' is required"))?;
    let y_b = config.y_b.ok_or_else(|| Error::usage("config field 'y_b' is required"))?;
    let table = build_reference(config, y_a, y_b)?;
    Ok(vec![Artifact {
        name: "reference.csv".into(),
        bytes: table.export_csv().into_bytes(),
    }])
}

fn run_dual_distance(config: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let code = config.require_code_a()?.build()?;
    let report = json!({
        "family": code.label(),
        "n": code.length(),
        "k": code.dimension(),
        "dual_distance": code.dual_distance()?,
    });
    Ok(vec![Artifact {
        name: "dual_distance.json".into(),
        bytes: pretty_json(&report),
    }])
}

/// Per-size mean Kolmogorov distance plus the C log log n / log n fit.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub fitted_c: f64,
    /// Bound slack per point: fitted bound minus observed distance. A
    /// converging family keeps this from shrinking as n grows.
    pub residuals: Vec<f64>,
    /// Least-squares slope of the slack against the point index (points
    /// ordered by increasing n); negative means the rate form underestimates
    /// the distance at large n.
    pub residual_trend: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub m: u32,
    pub n: usize,
    pub n_a: usize,
    pub n_b: usize,
    pub mean: f64,
    pub stderr: f64,
    pub fitted_bound: f64,
}

pub fn sweep_convergence(config: &ExperimentConfig) -> Result<SweepResult> {
    let ms = config
        .sweep_m
        .clone()
        .ok_or_else(|| Error::usage("config field 'sweep_m' is required for sweeps"))?;
    if ms.len() < 2 {
        return Err(Error::usage("a sweep needs at least 2 points to fit"));
    }
    let y_a = config.y_a.ok_or_else(|| Error::usage("config field 'y_a' is required"))?;
    let y_b = config.y_b.ok_or_else(|| Error::usage("config field 'y_b' is required"))?;
    for (name, y) in [("y_a", y_a), ("y_b", y_b)] {
        if !(y > 0.0) || y == 1.0 {
            return Err(Error::usage(format!(
                "sweep requires {name} in (0,1) or (1,inf), got {y}"
            )));
        }
    }
    let template = config.require_code_a()?;
    let trials = config.trials.unwrap_or(32);
    if trials == 0 {
        return Err(Error::usage("need at least one trial"));
    }
    let seed = SeedSpec::new(config.seed_or_default());
    let table = build_reference(config, y_a, y_b)?;

    let mut points = Vec::new();
    for &m in &ms {
        let code = template.at_m(m)?.build()?;
        let n = code.length();
        let n_a = (n as f64 / y_a).round() as usize;
        let n_b = (n as f64 / y_b).round() as usize;
        let dists: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let eigs = trial_gram_eigenvalues(&code, &code, n_a, n_b, seed, t)?;
                Ok(kolmogorov_distance(&EsdCurve::new(eigs), &table))
            })
            .collect::<Result<_>>()?;
        let mean = dists.iter().sum::<f64>() / trials as f64;
        let stderr = if trials > 1 {
            let ss: f64 = dists.iter().map(|d| (d - mean) * (d - mean)).sum();
            (ss / (trials - 1) as f64 / trials as f64).sqrt()
        } else {
            0.0
        };
        points.push(SweepPoint { m, n, n_a, n_b, mean, stderr, fitted_bound: 0.0 });
    }
    points.sort_by_key(|p| p.n);

    // least-squares C through the origin for d = C * log log n / log n
    let xs: Vec<f64> = points
        .iter()
        .map(|p| (p.n as f64).ln().ln() / (p.n as f64).ln())
        .collect();
    let sxy: f64 = points.iter().zip(&xs).map(|(p, x)| p.mean * x).sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    if sxx <= 0.0 {
        return Err(Error::numeric("degenerate sweep abscissae"));
    }
    let fitted_c = sxy / sxx;
    for (p, x) in points.iter_mut().zip(&xs) {
        p.fitted_bound = fitted_c * x;
    }
    let residuals: Vec<f64> = points.iter().map(|p| p.fitted_bound - p.mean).collect();
    let k = residuals.len() as f64;
    let i_bar = (k - 1.0) / 2.0;
    let r_bar = residuals.iter().sum::<f64>() / k;
    let num: f64 = residuals
        .iter()
        .enumerate()
        .map(|(i, r)| (i as f64 - i_bar) * (r - r_bar))
        .sum();
    let den: f64 = (0..residuals.len())
        .map(|i| (i as f64 - i_bar) * (i as f64 - i_bar))
        .sum();
    let residual_trend = num / den;

    Ok(SweepResult { points, fitted_c, residuals, residual_trend })
}

fn run_sweep(config: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let result = sweep_convergence(config)?;
    let mut csv = String::from("m,n,n_a,n_b,kolmogorov_mean,kolmogorov_stderr,fitted_bound\n");
    for p in &result.points {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p.m,
            p.n,
            p.n_a,
            p.n_b,
            f17(p.mean),
            f17(p.stderr),
            f17(p.fitted_bound)
        ));
    }
    let fit = json!({
        "fitted_c": result.fitted_c,
        "residuals": result.residuals,
        "residual_trend": result.residual_trend,
    });
    Ok(vec![
        Artifact { name: "sweep.csv".into(), bytes: csv.into_bytes() },
        Artifact { name: "fit.json".into(), bytes: pretty_json(&fit) },
    ])
}

fn pretty_json(v: &serde_json::Value) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(v).expect("json serialization");
    bytes.push(b'\n');
    bytes
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

fn write_artifacts(dir: &Path, mut artifacts: Vec<Artifact>) -> Result<RunOutput> {
    fs::create_dir_all(dir)
        .map_err(|e| Error::resource(format!("cannot create output dir {}: {e}", dir.display())))?;
    artifacts.sort_by(|a, b| a.name.cmp(&b.name));
    let manifest_entries: Vec<serde_json::Value> = artifacts
        .iter()
        .map(|a| {
            json!({
                "name": a.name,
                "bytes": a.bytes.len(),
                "sha256": sha256_hex(&a.bytes),
            })
        })
        .collect();
    let manifest = pretty_json(&json!({ "files": manifest_entries }));
    let mut files = Vec::new();
    for artifact in artifacts.into_iter().chain([Artifact {
        name: "manifest.json".into(),
        bytes: manifest,
    }]) {
        let path = dir.join(&artifact.name);
        fs::write(&path, &artifact.bytes)
            .map_err(|e| Error::resource(format!("cannot write {}: {e}", path.display())))?;
        files.push(path);
    }
    Ok(RunOutput { dir: dir.to_path_buf(), files })
}

fn dispatch(config: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let kind = config
        .kind
        .ok_or_else(|| Error::usage("no experiment kind given"))?;
    let mut artifacts = match kind {
        ExperimentKind::Moments => run_moments(config)?,
        ExperimentKind::Esd => run_esd(config)?,
        ExperimentKind::Sweep => run_sweep(config)?,
        ExperimentKind::DualDistance => run_dual_distance(config)?,
        ExperimentKind::Reference => run_reference(config)?,
    };
    // echo without the output path: where the files land must not change
    // their bytes
    let mut echoed = config.clone();
    echoed.out = None;
    let echo = serde_json::to_value(&echoed)
        .map_err(|e| Error::usage(format!("config echo failed: {e}")))?;
    artifacts.push(Artifact { name: "config.json".into(), bytes: pretty_json(&echo) });
    Ok(artifacts)
}

/// Run one experiment, writing its artifact files plus `manifest.json` into
/// the output directory. `threads` caps the rayon worker pool; any value
/// yields byte-identical files.
pub fn run_experiment(config: &ExperimentConfig, threads: Option<usize>) -> Result<RunOutput> {
    let dir = config.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let work = || -> Result<Vec<Artifact>> { dispatch(config) };
    let artifacts = match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::resource(format!("thread pool: {e}")))?;
            pool.install(work)?
        }
        None => work()?,
    };
    write_artifacts(&dir, artifacts)
}
