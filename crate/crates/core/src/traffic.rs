//! Intermittent interval-map On/Off traffic sources.
//!
//! The map on `[0, 1]` with threshold `d`:
//!
//! ```text
//! f(x) = x + (1 - d) (x / d)^m1            for x in [0, d]
//! f(x) = x - d ((1 - x) / (1 - d))^m2      for x in (d, 1]
//! ```
//!
//! Orbit points in `(d, 1]` are On (one packet per iteration). Both fixed
//! points are marginally stable, so orbits linger near 0 (Off) and near 1
//! (On) with heavy-tailed sojourn times; `max(m1, m2) = 2` gives long-range
//! dependent output, `m1 = m2 = 1.5` short-range dependent output.

use rand::Rng as _;
use thiserror::Error;

use crate::rng::{self, stream};

/// Orbit points within this distance of 0 or 1 are reinjected.
pub const ENDPOINT_EPS: f64 = 1e-12;
pub const DEFAULT_BURN_IN: usize = 1_000;
/// Independent initial conditions averaged by [`estimate_rate`].
pub const RATE_INITIAL_CONDITIONS: u64 = 8;
pub const MAX_BISECTION_STEPS: usize = 60;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrafficError {
    #[error("invalid map parameters: {0}")]
    InvalidParams(String),
    #[error("calibration to rate {target} (tol {tol}) did not converge; closest d = {best_d} gave {best_rate}")]
    NoConvergence { target: f64, tol: f64, best_d: f64, best_rate: f64 },
    #[error("insufficient data for Hurst estimate: {0}")]
    InsufficientData(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErramilliParams {
    m1: f64,
    m2: f64,
    d: f64,
}

impl ErramilliParams {
    pub fn new(m1: f64, m2: f64, d: f64) -> Result<Self, TrafficError> {
        for (name, m) in [("m1", m1), ("m2", m2)] {
            if !(1.5..=2.0).contains(&m) {
                return Err(TrafficError::InvalidParams(format!("{name} = {m} outside [1.5, 2]")));
            }
        }
        if !(d > 0.0 && d < 1.0) {
            return Err(TrafficError::InvalidParams(format!("d = {d} outside (0, 1)")));
        }
        Ok(Self { m1, m2, d })
    }

    pub fn m1(&self) -> f64 {
        self.m1
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn with_d(self, d: f64) -> Result<Self, TrafficError> {
        Self::new(self.m1, self.m2, d)
    }
}

/// `base^m` for `base >= 0`, via `exp(m ln base)` with `0^m = 0`.
fn pow_nonneg(base: f64, m: f64) -> f64 {
    if base <= 0.0 {
        0.0
    } else {
        (m * base.ln()).exp()
    }
}

/// `1 - (1 - t)^m` without cancellation for small `t`.
fn one_minus_pow_complement(t: f64, m: f64) -> f64 {
    -(m * (-t).ln_1p()).exp_m1()
}

/// One application of the map, clamped into `[0, 1]`.
pub fn map_step(p: &ErramilliParams, x: f64) -> f64 {
    let d = p.d;
    let y = if x <= d {
        x + (1.0 - d) * pow_nonneg(x / d, p.m1)
    } else {
        x - d * pow_nonneg((1.0 - x) / (1.0 - d), p.m2)
    };
    y.clamp(0.0, 1.0)
}

/// Orbit point stored relative to the nearer laminar fixed point, so long
/// sojourns near 1 keep full precision.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Orbit {
    /// `x` in `[0, d]`.
    Off(f64),
    /// `1 - x`, with `x` in `(d, 1]`.
    On(f64),
}

/// A single On/Off source: map parameters, orbit state and the PRNG used for
/// initialization and endpoint reinjection.
#[derive(Debug, Clone)]
pub struct ErramilliSource {
    params: ErramilliParams,
    orbit: Orbit,
    rng: rng::Rng,
}

impl ErramilliSource {
    /// Uniform initial point, then [`DEFAULT_BURN_IN`] discarded iterations.
    pub fn new(params: ErramilliParams, seed: u64) -> Self {
        Self::with_burn_in(params, seed, DEFAULT_BURN_IN)
    }

    pub fn with_burn_in(params: ErramilliParams, seed: u64, burn_in: usize) -> Self {
        let mut rng = rng::stream_rng(seed, stream::SOURCES);
        let x0 = rng.random_range(f64::MIN_POSITIVE..1.0);
        let mut src = Self::from_rng(params, x0, rng);
        src.skip(burn_in);
        src
    }

    /// Starts exactly at `x0` with no burn-in. `seed` only drives reinjection.
    pub fn with_initial(params: ErramilliParams, x0: f64, seed: u64) -> Self {
        Self::from_rng(params, x0.clamp(0.0, 1.0), rng::stream_rng(seed, stream::SOURCES))
    }

    fn from_rng(params: ErramilliParams, x0: f64, rng: rng::Rng) -> Self {
        let orbit = if x0 <= params.d { Orbit::Off(x0) } else { Orbit::On(1.0 - x0) };
        Self { params, orbit, rng }
    }

    pub fn params(&self) -> &ErramilliParams {
        &self.params
    }

    /// Current orbit point.
    pub fn x(&self) -> f64 {
        match self.orbit {
            Orbit::Off(x) => x,
            Orbit::On(u) => 1.0 - u,
        }
    }

    pub fn is_on(&self) -> bool {
        matches!(self.orbit, Orbit::On(_))
    }

    fn advance(&mut self) {
        let ErramilliParams { m1, m2, d } = self.params;
        self.orbit = match self.orbit {
            Orbit::Off(x) => {
                let next = x + (1.0 - d) * pow_nonneg(x / d, m1);
                if next <= d {
                    Orbit::Off(next)
                } else {
                    let gap = d - x;
                    Orbit::On(gap + (1.0 - d) * one_minus_pow_complement(gap / d, m1))
                }
            }
            Orbit::On(u) => {
                let next = u + d * pow_nonneg(u / (1.0 - d), m2);
                if next < 1.0 - d {
                    Orbit::On(next)
                } else {
                    let gap = (1.0 - d) - u;
                    Orbit::Off((gap + d * one_minus_pow_complement(gap / (1.0 - d), m2)).clamp(0.0, d))
                }
            }
        };
        // Reinject from the (numerically) absorbing endpoints, keeping the state.
        self.orbit = match self.orbit {
            Orbit::Off(x) if x <= ENDPOINT_EPS => Orbit::Off(self.rng.random_range(ENDPOINT_EPS..d)),
            Orbit::On(u) if u <= ENDPOINT_EPS => Orbit::On(self.rng.random_range(ENDPOINT_EPS..1.0 - d)),
            other => other,
        };
    }

    /// Advances once; 1 (On, a packet) iff the new point lies in `(d, 1]`.
    pub fn next_bit(&mut self) -> u8 {
        self.advance();
        self.is_on() as u8
    }

    pub fn skip(&mut self, steps: usize) {
        for _ in 0..steps {
            self.advance();
        }
    }

    pub fn bits(&mut self, n: usize) -> Vec<u8> {
        (0..n).map(|_| self.next_bit()).collect()
    }
}

/// Mean On fraction over `samples` iterations after `burn_in`, averaged over
/// [`RATE_INITIAL_CONDITIONS`] seeded initial points.
pub fn estimate_rate(p: &ErramilliParams, burn_in: usize, samples: usize, seed: u64) -> f64 {
    if samples == 0 {
        return 0.0;
    }
    let total: f64 = (0..RATE_INITIAL_CONDITIONS)
        .map(|ic| {
            let ic_seed = rng::derive_seed(seed, stream::ESTIMATE ^ ic);
            let mut src = ErramilliSource::with_burn_in(*p, ic_seed, burn_in);
            let on: usize = (0..samples).map(|_| src.next_bit() as usize).sum();
            on as f64 / samples as f64
        })
        .sum();
    total / RATE_INITIAL_CONDITIONS as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationOptions {
    pub burn_in: usize,
    pub samples: usize,
    pub max_steps: usize,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self { burn_in: DEFAULT_BURN_IN, samples: 100_000, max_steps: MAX_BISECTION_STEPS }
    }
}

/// Threshold `d` whose estimated On rate is within `tol` of `target`.
pub fn calibrate_d(m1: f64, m2: f64, target: f64, tol: f64, seed: u64) -> Result<f64, TrafficError> {
    calibrate_d_with(m1, m2, target, tol, seed, &CalibrationOptions::default())
}

/// Bisection on `d`; the rate is non-increasing in `d` and every evaluation
/// reuses `seed`, so the objective is deterministic.
pub fn calibrate_d_with(
    m1: f64,
    m2: f64,
    target: f64,
    tol: f64,
    seed: u64,
    opts: &CalibrationOptions,
) -> Result<f64, TrafficError> {
    if !(target > 0.0 && target < 1.0) {
        return Err(TrafficError::InvalidParams(format!("target rate {target} outside (0, 1)")));
    }
    let base = ErramilliParams::new(m1, m2, 0.5)?;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut best = (0.5, f64::NAN);
    for _ in 0..opts.max_steps {
        let d = 0.5 * (lo + hi);
        let rate = estimate_rate(&base.with_d(d)?, opts.burn_in, opts.samples, seed);
        if best.1.is_nan() || (rate - target).abs() < (best.1 - target).abs() {
            best = (d, rate);
        }
        if (rate - target).abs() <= tol {
            return Ok(d);
        }
        if rate > target {
            lo = d;
        } else {
            hi = d;
        }
    }
    Err(TrafficError::NoConvergence { target, tol, best_d: best.0, best_rate: best.1 })
}

/// Block sizes for [`hurst_aggregated_variance`]: the two decades ending at
/// `len / 100`, four sizes per decade.
pub fn default_block_sizes(len: usize) -> Vec<usize> {
    let max = len / 100;
    if max < 100 {
        return Vec::new();
    }
    let top = (max as f64).log10();
    let mut sizes: Vec<usize> = (0..=8).map(|i| 10f64.powf(top - 2.0 + 0.25 * i as f64).round() as usize).collect();
    sizes.dedup();
    sizes
}

/// Aggregated-variance Hurst estimate: regress `ln var(block means)` on
/// `ln s` and return `1 + slope / 2`.
pub fn hurst_aggregated_variance<T: Copy + Into<f64>>(series: &[T], block_sizes: &[usize]) -> Result<f64, TrafficError> {
    let insufficient = |msg: String| Err(TrafficError::InsufficientData(msg));
    let mut sizes: Vec<usize> = block_sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 4 {
        return insufficient(format!("need at least 4 distinct block sizes, got {}", sizes.len()));
    }
    let (min, max) = (sizes[0], sizes[sizes.len() - 1]);
    if min == 0 || max < 100 * min {
        return insufficient(format!("block sizes {min}..{max} must span two decades"));
    }
    if series.len() < 100 * max {
        return insufficient(format!("series length {} below 100 x largest block {max}", series.len()));
    }

    let values: Vec<f64> = series.iter().map(|&v| v.into()).collect();
    let mut points = Vec::with_capacity(sizes.len());
    for &s in &sizes {
        let means: Vec<f64> = values.chunks_exact(s).map(|c| c.iter().sum::<f64>() / s as f64).collect();
        let mu = means.iter().sum::<f64>() / means.len() as f64;
        let var = means.iter().map(|m| (m - mu) * (m - mu)).sum::<f64>() / means.len() as f64;
        if var.is_nan() || var <= 0.0 {
            return insufficient(format!("zero variance of block means at block size {s}"));
        }
        points.push(((s as f64).ln(), var.ln()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(1.0 + sxy / sxx / 2.0)
}
