//! Signal generation for system identification experiments.
//!
//! The observed signal follows the linear model `y(n) = w*' x(n) + z(n)`:
//! an unknown tap vector `w*` applied to a tapped delay line of a stationary
//! AR(1) input, plus independent Gaussian noise. [`SampleStream`] produces
//! the `(regressor, desired, noise)` triples that adaptive filters consume.
//!
//! The delay line is pre-filled with `N - 1` stationary warm-up samples and
//! the AR recursion starts from a draw of its stationary distribution, so
//! every emitted regressor is fully populated and the stream is stationary
//! from the first sample.

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::rng::GaussianSource;
use std::collections::VecDeque;

/// The unknown system being identified: tap vector and observation noise
/// variance of `y(n) = w*' x(n) + z(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    true_weights: Vec<f64>,
    noise_variance: f64,
}

impl SystemModel {
    pub fn new(true_weights: Vec<f64>, noise_variance: f64) -> Result<Self> {
        if true_weights.is_empty() {
            return Err(Error::invalid("system needs at least one tap"));
        }
        if !true_weights.iter().all(|w| w.is_finite()) {
            return Err(Error::invalid("system taps must be finite"));
        }
        if !noise_variance.is_finite() || noise_variance < 0.0 {
            return Err(Error::invalid(format!(
                "noise variance must be finite and >= 0, got {noise_variance}"
            )));
        }
        Ok(Self {
            true_weights,
            noise_variance,
        })
    }

    /// Number of taps.
    pub fn order(&self) -> usize {
        self.true_weights.len()
    }

    pub fn true_weights(&self) -> &[f64] {
        &self.true_weights
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }
}

/// Stationary first-order autoregressive input process
/// `x(n) = pole * x(n-1) + w(n)` with i.i.d. zero-mean Gaussian innovations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ar1Process {
    pole: f64,
    innovation_variance: f64,
    seed: u64,
}

impl Ar1Process {
    pub fn new(pole: f64, innovation_variance: f64, seed: u64) -> Result<Self> {
        if !pole.is_finite() || pole.abs() >= 1.0 {
            return Err(Error::invalid(format!(
                "AR pole must satisfy |pole| < 1 for stationarity, got {pole}"
            )));
        }
        if !innovation_variance.is_finite() || innovation_variance <= 0.0 {
            return Err(Error::invalid(format!(
                "innovation variance must be finite and > 0, got {innovation_variance}"
            )));
        }
        Ok(Self {
            pole,
            innovation_variance,
            seed,
        })
    }

    pub fn pole(&self) -> f64 {
        self.pole
    }

    pub fn innovation_variance(&self) -> f64 {
        self.innovation_variance
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Marginal variance of the stationary process,
    /// `innovation_variance / (1 - pole^2)`.
    pub fn stationary_variance(&self) -> f64 {
        self.innovation_variance / (1.0 - self.pole * self.pole)
    }

    /// Same process parameters under a different seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..*self }
    }
}

/// One observation: the regressor `x(n) = [x(n), x(n-1), ...]`, the desired
/// response `y(n)`, and the noise realization `z(n)` kept for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePair {
    pub regressor: Vec<f64>,
    pub desired: f64,
    pub noise: f64,
}

/// Stateful AR(1) sampler, started from the stationary distribution.
struct Ar1Generator {
    pole: f64,
    sigma_w: f64,
    state: f64,
    rng: GaussianSource,
}

impl Ar1Generator {
    fn new(process: &Ar1Process) -> Self {
        let mut rng = GaussianSource::new(process.seed());
        let state = rng.next_standard() * process.stationary_variance().sqrt();
        Self {
            pole: process.pole(),
            sigma_w: process.innovation_variance().sqrt(),
            state,
            rng,
        }
    }

    fn next(&mut self) -> f64 {
        self.state = self.pole * self.state + self.sigma_w * self.rng.next_standard();
        self.state
    }
}

/// Generates `count` samples of the AR(1) process. Identical seeds give
/// bitwise-identical sequences.
pub fn generate_ar1(process: &Ar1Process, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::invalid("sample count must be >= 1"));
    }
    let mut gen = Ar1Generator::new(process);
    Ok((0..count).map(|_| gen.next()).collect())
}

/// Infinite iterator over [`SamplePair`]s for a given system and input
/// process. Input and noise use disjoint generators, so changing one seed
/// leaves the other stream untouched.
pub struct SampleStream {
    true_weights: Vec<f64>,
    sigma_z: f64,
    input: Ar1Generator,
    noise: GaussianSource,
    // Newest sample at the front; holds order-1 entries between calls.
    delay: VecDeque<f64>,
}

impl SampleStream {
    pub fn new(model: &SystemModel, process: &Ar1Process, noise_seed: u64) -> Self {
        let mut input = Ar1Generator::new(process);
        let order = model.order();
        let mut delay = VecDeque::with_capacity(order);
        // Warm-up: order-1 stationary samples so the first regressor is full.
        for _ in 0..order.saturating_sub(1) {
            delay.push_front(input.next());
        }
        Self {
            true_weights: model.true_weights().to_vec(),
            sigma_z: model.noise_variance().sqrt(),
            input,
            noise: GaussianSource::new(noise_seed),
            delay,
        }
    }
}

impl Iterator for SampleStream {
    type Item = SamplePair;

    fn next(&mut self) -> Option<SamplePair> {
        self.delay.push_front(self.input.next());
        let regressor: Vec<f64> = self.delay.iter().copied().collect();
        self.delay.pop_back();
        let noise = self.sigma_z * self.noise.next_standard();
        let desired = dot(&self.true_weights, &regressor) + noise;
        Some(SamplePair {
            regressor,
            desired,
            noise,
        })
    }
}

/// Materializes `count` samples of the stream.
pub fn stream_samples(
    model: &SystemModel,
    process: &Ar1Process,
    count: usize,
    noise_seed: u64,
) -> Result<Vec<SamplePair>> {
    if count == 0 {
        return Err(Error::invalid("sample count must be >= 1"));
    }
    Ok(SampleStream::new(model, process, noise_seed)
        .take(count)
        .collect())
}
