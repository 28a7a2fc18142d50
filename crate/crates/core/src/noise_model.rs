//! Grid discretization of the Gaussian white noise model
//! `dY_t = f(t) dt + (sigma / sqrt(n)) dW_t` on `[0,1]^d`.
//!
//! White noise is realized as `M^d` i.i.d. standard normal increments, the
//! Brownian-sheet increment over cell `i` being `z_i * M^{-d/2}`. Integrals
//! over `R^d` are folded back onto the unit cube (the noise on every
//! translate of the cube is the noise on the cube itself), which on the grid
//! is plain modular index arithmetic.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::conv::{ConvolutionMethod, ConvolutionPlan};
use crate::error::{Error, Result};
use crate::grid::{check_shape, GridFunction};
use crate::kernels::Kernel;

/// Noise scale, effective sample size and loss exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub sigma: f64,
    pub n: u64,
    pub p: f64,
}

impl ModelParams {
    /// `sigma = 0` is accepted as the noise-free degenerate model.
    pub fn new(sigma: f64, n: u64, p: f64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::invalid(format!("sigma must be >= 0, got {sigma}")));
        }
        if n < 2 {
            return Err(Error::invalid(format!("n must be >= 2, got {n}")));
        }
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::invalid(format!("p must be >= 1, got {p}")));
        }
        Ok(Self { sigma, n, p })
    }

    /// Standard deviation multiplier of the noise term, `sigma / sqrt(n)`.
    pub fn noise_level(&self) -> f64 {
        self.sigma / (self.n as f64).sqrt()
    }
}

/// Standard normal increments of the Brownian sheet on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseField {
    dim: usize,
    resolution: usize,
    increments: Vec<f64>,
    seed: u64,
}

impl NoiseField {
    /// Wraps caller-supplied increments (deterministic fields for tests).
    pub fn from_increments(dim: usize, resolution: usize, increments: Vec<f64>) -> Result<Self> {
        let len = check_shape(dim, resolution)?;
        if increments.len() != len {
            return Err(Error::invalid(format!(
                "expected {len} increments, got {}",
                increments.len()
            )));
        }
        Ok(Self {
            dim,
            resolution,
            increments,
            seed: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Cell volume `M^{-d}`, the variance of each Brownian increment.
    pub fn cell_volume(&self) -> f64 {
        (self.resolution as f64).powi(-(self.dim as i32))
    }

    /// Cyclic shift by `k` cells.
    pub fn shift(&self, k: &[isize]) -> Result<NoiseField> {
        let g = GridFunction::from_raw(self.dim, self.resolution, self.increments.clone());
        Ok(NoiseField {
            increments: g.shift(k)?.into_values(),
            ..self.clone()
        })
    }
}

/// SplitMix64 finalizer: a bijective 64-bit mixer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the substream `key` of experiment seed `seed`. Distinct keys give
/// statistically independent streams, independent of evaluation order.
pub fn stream_seed(seed: u64, key: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ key.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Draws `M^d` i.i.d. standard normals from a ChaCha stream keyed by `seed`.
pub fn sample_noise(dim: usize, resolution: usize, seed: u64) -> Result<NoiseField> {
    let len = check_shape(dim, resolution)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let increments: Vec<f64> = StandardNormal.sample_iter(&mut rng).take(len).collect();
    Ok(NoiseField {
        dim,
        resolution,
        increments,
        seed,
    })
}

/// Standardized noise process
/// `xi(t_i) = h^{-d/2} sum_j K((t_i - u_j)/h) z_j M^{-d/2}` with circular
/// index differences; each entry has variance close to `||K||_2^2`.
pub fn stochastic_convolution(noise: &NoiseField, kernel: &Kernel, h: f64) -> Result<GridFunction> {
    if kernel.dim() != noise.dim {
        return Err(Error::ResolutionMismatch {
            expected: format!("kernel dimension {}", noise.dim),
            actual: format!("{}", kernel.dim()),
        });
    }
    let plan = ConvolutionPlan::new(kernel, h, noise.resolution, ConvolutionMethod::Auto)?;
    Ok(standardized_noise(&plan, h, &noise.increments))
}

/// `(h M)^{d/2} (w * z)`: the standardized process for a prepared plan.
pub(crate) fn standardized_noise(plan: &ConvolutionPlan, h: f64, z: &[f64]) -> GridFunction {
    let d = plan.dim() as i32;
    let factor = (h * plan.resolution() as f64).powi(d).sqrt();
    let mut out = plan.apply(z);
    out.iter_mut().for_each(|v| *v *= factor);
    GridFunction::from_raw(plan.dim(), plan.resolution(), out)
}
