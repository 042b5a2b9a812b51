//! Seeded Monte Carlo over Haar-random networks.
//!
//! Sample `j` always draws its unitary from substream `j` of the master
//! seed and results are merged in sample order, so every estimate is a pure
//! function of its configuration, whatever the worker count.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{page_curve_density, SeriesTolerance};
use crate::error::{input, Error, Result};
use crate::gaussian::{
    build_initial_covariance, evolve, evolve_reduced, reduce_modes, renyi2_entropy, renyi2_profile,
    symplectic_eigenvalues, von_neumann_entropy, SqueezingConfig,
};
use crate::haar::{derive_substream, mix_seed, sample_haar_rows, sample_haar_unitary, SeededStream};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n: usize,
    pub squeezing: SqueezingConfig<f64>,
    pub subsystem_sizes: Vec<usize>,
    pub samples: usize,
    pub master_seed: u64,
    pub workers: usize,
    /// Also compute von Neumann entropies (one symmetric eigensolve per
    /// subsystem and sample).
    pub von_neumann: bool,
}

impl RunConfig {
    /// Equal squeezing `s` on `n` modes; Rényi-2 only, one worker.
    pub fn equal(n: usize, s: f64, subsystem_sizes: Vec<usize>, samples: usize, master_seed: u64) -> Result<Self> {
        let config = Self {
            n,
            squeezing: SqueezingConfig::equal(n, s)?,
            subsystem_sizes,
            samples,
            master_seed,
            workers: 1,
            von_neumann: false,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return input("need at least one mode");
        }
        if self.squeezing.len() != self.n {
            return input(format!("{} squeezing values for {} modes", self.squeezing.len(), self.n));
        }
        if let Some(k) = self.subsystem_sizes.iter().find(|&&k| k > self.n) {
            return input(format!("subsystem size {k} exceeds {} modes", self.n));
        }
        if self.samples == 0 {
            return input("need at least one sample");
        }
        if self.workers == 0 {
            return input("need at least one worker");
        }
        Ok(())
    }
}

/// Passive optics maps the vacuum to itself, so its entropies are exactly zero.
fn is_vacuum(squeezing: &SqueezingConfig<f64>) -> bool {
    squeezing.values().iter().all(|&s| s == 0.0)
}

/// Runs `f(j)` for `j in 0..samples` on `workers` threads, in index order.
fn run_indexed<T, F>(samples: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Send + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Numerical(format!("could not start worker pool: {e}")))?;
    pool.install(|| {
        (0..samples as u64)
            .into_par_iter()
            .map(|j| {
                f(j).map_err(|e| match e {
                    Error::Numerical(msg) => Error::Numerical(format!("sample {j}: {msg}")),
                    other => other,
                })
            })
            .collect()
    })
}

fn sample_stream(master_seed: u64, j: u64) -> SeededStream {
    // Worker ids are 32-bit; sample counts never get near that.
    derive_substream(SeededStream::new(master_seed, 0), j as u32)
}

/// Per-sample entropies: `s2[j][i]` is the Rényi-2 entropy of sample `j`
/// for `subsystem_sizes[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTable {
    pub subsystem_sizes: Vec<usize>,
    pub s2: Vec<Vec<f64>>,
    pub s1: Option<Vec<Vec<f64>>>,
}

impl SampleTable {
    pub fn column(&self, i: usize) -> Vec<f64> {
        self.s2.iter().map(|row| row[i]).collect()
    }
}

/// Draws every sample of `config` and records its entropies.
pub fn sample_entropies(config: &RunConfig) -> Result<SampleTable> {
    config.validate()?;
    let n = config.n;
    if is_vacuum(&config.squeezing) {
        let zeros = vec![0.0; config.subsystem_sizes.len()];
        return Ok(SampleTable {
            subsystem_sizes: config.subsystem_sizes.clone(),
            s2: vec![zeros.clone(); config.samples],
            s1: config.von_neumann.then(|| vec![zeros; config.samples]),
        });
    }
    let sigma0 = build_initial_covariance(&config.squeezing);
    let rows = run_indexed(config.samples, config.workers, |j| {
        let u = sample_haar_unitary::<f64>(n, sample_stream(config.master_seed, j));
        let sigma = evolve(&sigma0, &u)?;
        let profile = renyi2_profile(&sigma)?;
        // The global state is pure: the full system carries no entropy.
        let s2: Vec<f64> = config.subsystem_sizes.iter().map(|&k| if k == n { 0.0 } else { profile[k] }).collect();
        let s1 = if config.von_neumann {
            let mut out = Vec::with_capacity(config.subsystem_sizes.len());
            for &k in &config.subsystem_sizes {
                if k == 0 || k == n {
                    out.push(0.0);
                    continue;
                }
                // The global state is pure, so the smaller side carries the
                // same entropy at a fraction of the cost.
                let modes: Vec<usize> = if 2 * k <= n { (0..k).collect() } else { (k..n).collect() };
                let spectrum = symplectic_eigenvalues(&reduce_modes(&sigma, &modes)?)?;
                out.push(von_neumann_entropy(&spectrum));
            }
            Some(out)
        } else {
            None
        };
        Ok((s2, s1))
    })?;
    let (s2, s1): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    let s1 = if config.von_neumann { Some(s1.into_iter().map(Option::unwrap).collect()) } else { None };
    Ok(SampleTable { subsystem_sizes: config.subsystem_sizes.clone(), s2, s1 })
}

/// Mean, unbiased variance and the standard errors of both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
    /// Standard error of `variance` itself, from the fourth central moment.
    pub variance_stderr: f64,
    pub samples: usize,
}

impl Moments {
    pub fn of(xs: &[f64]) -> Self {
        let count = xs.len();
        let nf = count as f64;
        let mean = xs.iter().sum::<f64>() / nf;
        if count < 2 {
            return Self { mean, variance: 0.0, stderr: 0.0, variance_stderr: 0.0, samples: count };
        }
        let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / nf;
        let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / nf;
        let variance = m2 * nf / (nf - 1.0);
        let var_of_var = if count > 3 { (m4 - m2 * m2 * (nf - 3.0) / (nf - 1.0)) / nf } else { 0.0 };
        Self {
            mean,
            variance,
            stderr: (variance / nf).sqrt(),
            variance_stderr: var_of_var.max(0.0).sqrt(),
            samples: count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeStatistics {
    pub k: usize,
    pub mean_s2: f64,
    pub mean_s1: Option<f64>,
    pub variance_s2: f64,
    pub stderr_s2: f64,
    pub variance_stderr_s2: f64,
    pub samples: usize,
}

/// Empirical Page curve: one record per requested subsystem size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveEstimate {
    pub per_size: Vec<SizeStatistics>,
}

pub fn summarize(table: &SampleTable) -> CurveEstimate {
    let per_size = table
        .subsystem_sizes
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let m = Moments::of(&table.column(i));
            let mean_s1 = table
                .s1
                .as_ref()
                .map(|rows| rows.iter().map(|r| r[i]).sum::<f64>() / rows.len() as f64);
            SizeStatistics {
                k,
                mean_s2: m.mean,
                mean_s1,
                variance_s2: m.variance,
                stderr_s2: m.stderr,
                variance_stderr_s2: m.variance_stderr,
                samples: m.samples,
            }
        })
        .collect();
    CurveEstimate { per_size }
}

pub fn estimate_entropy_statistics(config: &RunConfig) -> Result<CurveEstimate> {
    Ok(summarize(&sample_entropies(config)?))
}

/// `k = r n`, insisting that it is an integer.
pub fn subsystem_for_fraction(n: usize, r: f64) -> Result<usize> {
    let k = r * n as f64;
    if !(0.0..=1.0).contains(&r) || (k - k.round()).abs() > 1e-9 {
        return input(format!("r = {r} does not give an integer subsystem at n = {n}"));
    }
    Ok(k.round() as usize)
}

/// Least-squares line through `(x, y)`; returns `(intercept, slope)`.
fn fit_line(points: &[(f64, f64)]) -> (f64, f64) {
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderPoint {
    pub n: usize,
    pub k: usize,
    /// `n α(s, r) - mean S₂`
    pub lambda_hat: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    /// Intercept of a least-squares line in `1/n`.
    pub value: f64,
    /// Bootstrap standard deviation of the intercept.
    pub uncertainty: f64,
    pub points: Vec<LadderPoint>,
}

/// Number of bootstrap resamples used for derived uncertainties.
pub const BOOTSTRAP_RESAMPLES: usize = 1000;

/// Estimates the constant correction `λ(s, r)` by extrapolating
/// `n α(s, r) - E S₂` to `n → ∞`. Ladder point `i` uses master seed
/// `mix_seed(seed, i)`, the bootstrap `mix_seed(seed, u64::MAX)`.
pub fn estimate_constant_term(n_ladder: &[usize], s: f64, r: f64, samples: usize, seed: u64, workers: usize) -> Result<ConstantEstimate> {
    if n_ladder.len() < 3 {
        return input(format!("need at least 3 ladder points, got {}", n_ladder.len()));
    }
    let alpha = page_curve_density(s, r, SeriesTolerance::default())?.value;
    let mut draws = Vec::with_capacity(n_ladder.len());
    for (i, &n) in n_ladder.iter().enumerate() {
        let k = subsystem_for_fraction(n, r)?;
        let squeezing = SqueezingConfig::equal(n, s)?;
        let column = sample_subsystem_entropies(&squeezing, k, samples, mix_seed(seed, i as u64), workers)?;
        draws.push((n, k, column));
    }
    let points: Vec<LadderPoint> = draws
        .iter()
        .map(|(n, k, xs)| {
            let m = Moments::of(xs);
            LadderPoint { n: *n, k: *k, lambda_hat: *n as f64 * alpha - m.mean, stderr: m.stderr }
        })
        .collect();
    let line: Vec<(f64, f64)> = points.iter().map(|p| (1.0 / p.n as f64, p.lambda_hat)).collect();
    let (value, _) = fit_line(&line);

    let mut rng = SeededStream::new(mix_seed(seed, u64::MAX), 0).rng();
    let mut intercepts = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let resampled: Vec<(f64, f64)> = draws
            .iter()
            .map(|(n, _, xs)| {
                let total: f64 = (0..xs.len()).map(|_| xs[rng.random_range(0..xs.len())]).sum();
                (1.0 / *n as f64, *n as f64 * alpha - total / xs.len() as f64)
            })
            .collect();
        intercepts.push(fit_line(&resampled).0);
    }
    let uncertainty = Moments::of(&intercepts).variance.sqrt();
    Ok(ConstantEstimate { value, uncertainty, points })
}

/// How the probed subsystem size follows `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SubsystemRule {
    /// `k = round(r n)`
    Ratio(f64),
    /// `k = ⌈√n⌉`
    SqrtCeil,
    Fixed(usize),
}

impl SubsystemRule {
    pub fn size(&self, n: usize) -> usize {
        match *self {
            Self::Ratio(r) => (r * n as f64).round() as usize,
            Self::SqrtCeil => {
                let mut k = (n as f64).sqrt().ceil() as usize;
                while k > 0 && (k - 1) * (k - 1) >= n {
                    k -= 1;
                }
                while k * k < n {
                    k += 1;
                }
                k
            }
            Self::Fixed(k) => k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalityPoint {
    pub n: usize,
    pub k: usize,
    pub mean: f64,
    pub variance: f64,
    /// Fraction of samples with `|S₂ - mean| ≥ ε`.
    pub strong_frequency: f64,
    /// Fraction of samples with `|S₂/mean - 1| ≥ ε`.
    pub weak_frequency: f64,
    pub samples: usize,
}

/// Rényi-2 entropies of the first `k` modes for `samples` Haar draws, using
/// only the first `k` rows of each unitary.
pub fn sample_subsystem_entropies(squeezing: &SqueezingConfig<f64>, k: usize, samples: usize, seed: u64, workers: usize) -> Result<Vec<f64>> {
    let n = squeezing.len();
    if k > n {
        return input(format!("subsystem size {k} exceeds {n} modes"));
    }
    if k == 0 || k == n || is_vacuum(squeezing) {
        return Ok(vec![0.0; samples]);
    }
    run_indexed(samples, workers, |j| {
        let rows = sample_haar_rows::<f64>(n, k, sample_stream(seed, j));
        renyi2_entropy(&evolve_reduced(squeezing, &rows)?)
    })
}

/// Deviation frequencies of the Rényi-2 entropy from its sample mean, one
/// point per `n`. Point `i` uses master seed `mix_seed(seed, i)`.
pub fn typicality_probe(
    n_list: &[usize],
    rule: SubsystemRule,
    s: f64,
    epsilon: f64,
    samples: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<TypicalityPoint>> {
    if !(epsilon > 0.0) {
        return input(format!("epsilon must be positive, got {epsilon}"));
    }
    let mut out = Vec::with_capacity(n_list.len());
    for (i, &n) in n_list.iter().enumerate() {
        let k = rule.size(n);
        let squeezing = SqueezingConfig::equal(n, s)?;
        let xs = sample_subsystem_entropies(&squeezing, k, samples, mix_seed(seed, i as u64), workers)?;
        let m = Moments::of(&xs);
        let strong = xs.iter().filter(|&&x| (x - m.mean).abs() >= epsilon).count();
        // A mean at rounding level means the state is unentangled; relative
        // deviations are meaningless there and counted as none.
        let weak = if m.mean > f64::entropy_floor() {
            xs.iter().filter(|&&x| (x / m.mean - 1.0).abs() >= epsilon).count()
        } else {
            0
        };
        out.push(TypicalityPoint {
            n,
            k,
            mean: m.mean,
            variance: m.variance,
            strong_frequency: strong as f64 / samples as f64,
            weak_frequency: weak as f64 / samples as f64,
            samples,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjectureEstimate {
    /// Mean of `∂S₂/∂(s_i²)` over samples.
    pub derivative: f64,
    pub stderr: f64,
    /// Fraction of unitaries whose individual derivative is negative.
    pub negative_fraction: f64,
    pub samples: usize,
}

/// Finite-difference derivative of `E S₂(first k modes)` with respect to
/// `s_i²`, both sides evaluated on the same unitaries. Falls back to a
/// one-sided difference when `s_i² < delta`.
pub fn conjecture_probe(
    squeezing: &SqueezingConfig<f64>,
    k: usize,
    mode_index: usize,
    delta: f64,
    samples: usize,
    seed: u64,
    workers: usize,
) -> Result<ConjectureEstimate> {
    let n = squeezing.len();
    if mode_index >= n {
        return input(format!("mode index {mode_index} out of range for {n} modes"));
    }
    if k == 0 || k >= n {
        return input(format!("subsystem size must lie in 1..{n}, got {k}"));
    }
    if !(delta > 0.0) {
        return input(format!("delta must be positive, got {delta}"));
    }
    let s_i = squeezing.values()[mode_index];
    let sign = if s_i < 0.0 { -1.0 } else { 1.0 };
    let upper = s_i * s_i + delta;
    let lower = (s_i * s_i - delta).max(0.0);
    let shifted = |sq: f64| -> Result<SqueezingConfig<f64>> {
        let mut v = squeezing.values().to_vec();
        v[mode_index] = sign * sq.sqrt();
        SqueezingConfig::new(v)
    };
    let (plus, minus) = (shifted(upper)?, shifted(lower)?);
    let derivs = run_indexed(samples, workers, |j| {
        let rows = sample_haar_rows::<f64>(n, k, sample_stream(seed, j));
        let hi = renyi2_entropy(&evolve_reduced(&plus, &rows)?)?;
        let lo = renyi2_entropy(&evolve_reduced(&minus, &rows)?)?;
        Ok((hi - lo) / (upper - lower))
    })?;
    let m = Moments::of(&derivs);
    let negative = derivs.iter().filter(|&&d| d < 0.0).count();
    Ok(ConjectureEstimate {
        derivative: m.mean,
        stderr: m.stderr,
        negative_fraction: negative as f64 / samples as f64,
        samples,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceCheck {
    /// `max |mean σ(U) - (Tr B/n) I|` over all entries.
    pub max_deviation: f64,
    /// Three times the largest entrywise standard error.
    pub envelope: f64,
    /// Largest `|deviation| / stderr` over entries.
    pub max_z: f64,
    /// `Tr B / n`, the predicted diagonal.
    pub target_diagonal: f64,
    pub mean: DMatrix<f64>,
    pub stderr: DMatrix<f64>,
}

/// Compares the Haar average of the reduced covariance of the first `k`
/// modes with `(Tr B/n) I`, `B = ½(Z + Z⁻¹)`.
pub fn mean_covariance_check(squeezing: &SqueezingConfig<f64>, k: usize, samples: usize, seed: u64, workers: usize) -> Result<CovarianceCheck> {
    let n = squeezing.len();
    if k == 0 || k > n {
        return input(format!("subsystem size must lie in 1..={n}, got {k}"));
    }
    if samples < 2 {
        return input("need at least two samples");
    }
    let target = squeezing.values().iter().map(|s| (2.0 * s).cosh()).sum::<f64>() / n as f64;
    let draws = run_indexed(samples, workers, |j| {
        let rows = sample_haar_rows::<f64>(n, k, sample_stream(seed, j));
        Ok(evolve_reduced(squeezing, &rows)?.into_entries())
    })?;
    let dim = 2 * k;
    let sf = samples as f64;
    let mut mean = DMatrix::zeros(dim, dim);
    for d in &draws {
        mean += d;
    }
    mean /= sf;
    let mut var = DMatrix::<f64>::zeros(dim, dim);
    for d in &draws {
        var += (d - &mean).map(|x| x * x);
    }
    let stderr = (var / (sf - 1.0) / sf).map(f64::sqrt);
    let mut max_deviation = 0.0f64;
    let mut max_z = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let expected = if i == j { target } else { 0.0 };
            let dev = (mean[(i, j)] - expected).abs();
            max_deviation = max_deviation.max(dev);
            if stderr[(i, j)] > 0.0 {
                max_z = max_z.max(dev / stderr[(i, j)]);
            } else if dev > 1e-12 {
                max_z = f64::INFINITY;
            }
        }
    }
    Ok(CovarianceCheck {
        max_deviation,
        envelope: 3.0 * stderr.max(),
        max_z,
        target_diagonal: target,
        mean,
        stderr,
    })
}
