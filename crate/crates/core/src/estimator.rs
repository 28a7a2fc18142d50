//! Fixed-bandwidth kernel estimator
//! `f_hat(t) = h^{-d} int K((t - u)/h) dY_u`, split into its expectation
//! `K_h * f` and the centred stochastic term.

use serde::Serialize;

use crate::conv::{ConvolutionMethod, ConvolutionPlan};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::kernels::Kernel;
use crate::noise_model::{standardized_noise, ModelParams, NoiseField};
use crate::quadrature::median;

/// `h_n = C (log n / n)^{1/(2 beta + d)}`, optionally snapped to the nearest
/// power of two in log scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandwidthRule {
    pub c: f64,
    pub beta: f64,
    pub dim: usize,
    pub dyadic_snap: bool,
}

impl BandwidthRule {
    pub fn new(c: f64, beta: f64, dim: usize) -> Result<Self> {
        if !(c > 0.0) || !(beta > 0.0) || dim == 0 {
            return Err(Error::invalid(format!(
                "bandwidth rule needs C > 0, beta > 0, d >= 1 (got C={c}, beta={beta}, d={dim})"
            )));
        }
        Ok(Self {
            c,
            beta,
            dim,
            dyadic_snap: false,
        })
    }

    pub fn snapped(mut self) -> Self {
        self.dyadic_snap = true;
        self
    }
}

pub fn bandwidth(n: u64, rule: &BandwidthRule) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid(format!("n must be >= 2, got {n}")));
    }
    let nf = n as f64;
    let mut h = rule.c * (nf.ln() / nf).powf(1.0 / (2.0 * rule.beta + rule.dim as f64));
    if rule.dyadic_snap {
        h = 2f64.powi(h.log2().round() as i32);
    }
    if h >= 0.5 {
        return Err(Error::BandwidthTooLarge { h, n });
    }
    Ok(h)
}

/// Convolution with `K_h` on a fixed grid, prepared once and applied to many
/// signals and noise fields.
#[derive(Debug, Clone)]
pub struct SmoothingOperator {
    h: f64,
    plan: ConvolutionPlan,
}

impl SmoothingOperator {
    pub fn new(kernel: &Kernel, h: f64, resolution: usize) -> Result<Self> {
        Self::with_method(kernel, h, resolution, ConvolutionMethod::Auto)
    }

    pub fn with_method(
        kernel: &Kernel,
        h: f64,
        resolution: usize,
        method: ConvolutionMethod,
    ) -> Result<Self> {
        Ok(Self {
            h,
            plan: ConvolutionPlan::new(kernel, h, resolution, method)?,
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn plan(&self) -> &ConvolutionPlan {
        &self.plan
    }

    fn check_grid(&self, dim: usize, resolution: usize) -> Result<()> {
        if dim != self.plan.dim() || resolution != self.plan.resolution() {
            return Err(Error::ResolutionMismatch {
                expected: format!("{}^{}", self.plan.resolution(), self.plan.dim()),
                actual: format!("{resolution}^{dim}"),
            });
        }
        Ok(())
    }

    /// `K_h * f` on the grid.
    pub fn smooth(&self, f: &GridFunction) -> Result<GridFunction> {
        self.check_grid(f.dim(), f.resolution())?;
        Ok(GridFunction::from_raw(
            f.dim(),
            f.resolution(),
            self.plan.apply(f.values()),
        ))
    }

    /// Standardized noise process `xi` for the given increments.
    pub fn standardized_noise(&self, noise: &NoiseField) -> Result<GridFunction> {
        self.check_grid(noise.dim(), noise.resolution())?;
        Ok(standardized_noise(&self.plan, self.h, noise.increments()))
    }

    /// Centred term `Z = sigma / sqrt(n h^d) * xi`.
    pub fn stochastic_term(&self, params: &ModelParams, noise: &NoiseField) -> Result<GridFunction> {
        let xi = self.standardized_noise(noise)?;
        let d = self.plan.dim() as i32;
        Ok(xi.scale(params.noise_level() / self.h.powi(d).sqrt()))
    }

    /// Estimate from a precomputed expectation `bias_part = K_h * f`.
    pub fn estimate_with_bias(
        &self,
        bias_part: &GridFunction,
        params: &ModelParams,
        noise: &NoiseField,
    ) -> Result<EstimateRealization> {
        let estimate = if params.sigma == 0.0 {
            self.check_grid(noise.dim(), noise.resolution())?;
            bias_part.clone()
        } else {
            bias_part.add(&self.stochastic_term(params, noise)?)?
        };
        Ok(EstimateRealization {
            estimate,
            bias_part: bias_part.clone(),
            h: self.h,
            n: params.n,
            sigma: params.sigma,
            seed: noise.seed(),
        })
    }

    pub fn estimate(
        &self,
        f: &GridFunction,
        params: &ModelParams,
        noise: &NoiseField,
    ) -> Result<EstimateRealization> {
        if !(f.dim() == noise.dim() && f.resolution() == noise.resolution()) {
            return Err(Error::invalid(format!(
                "signal grid {}^{} does not match noise grid {}^{}",
                f.resolution(),
                f.dim(),
                noise.resolution(),
                noise.dim()
            )));
        }
        let bias_part = self.smooth(f)?;
        self.estimate_with_bias(&bias_part, params, noise)
    }
}

/// One realization of the estimator with its expectation kept alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRealization {
    pub estimate: GridFunction,
    /// `K_h * f`, the exact expectation of `estimate`.
    pub bias_part: GridFunction,
    pub h: f64,
    pub n: u64,
    pub sigma: f64,
    pub seed: u64,
}

impl EstimateRealization {
    /// `estimate - bias_part`.
    pub fn stochastic_part(&self) -> GridFunction {
        self.estimate
            .sub(&self.bias_part)
            .expect("estimate and bias share a grid")
    }
}

/// `K_h * f` by circular summation over the grid.
pub fn smooth(f: &GridFunction, kernel: &Kernel, h: f64) -> Result<GridFunction> {
    SmoothingOperator::new(kernel, h, f.resolution())?.smooth(f)
}

/// `smooth(f) + sigma / sqrt(n h^d) * stochastic_convolution(noise)`.
pub fn kernel_estimate(
    f: &GridFunction,
    kernel: &Kernel,
    h: f64,
    params: &ModelParams,
    noise: &NoiseField,
) -> Result<EstimateRealization> {
    if kernel.dim() != f.dim() {
        return Err(Error::invalid("kernel and signal dimensions differ"));
    }
    SmoothingOperator::new(kernel, h, f.resolution())?.estimate(f, params, noise)
}

/// Grid maximum of `|g|`. Under-approximates the essential supremum by at
/// most the modulus of continuity of `g` over one cell.
pub fn sup_norm(g: &GridFunction) -> f64 {
    g.sup_norm()
}

/// Relative excess over the median allowed for the last entries of a
/// sequence judged bounded.
pub const BOUNDED_TAIL_FACTOR: f64 = 1.5;

/// True when none of the last three entries exceeds 1.5 times the median.
pub fn bounded_tail(seq: &[f64]) -> bool {
    if seq.is_empty() {
        return true;
    }
    let med = median(seq);
    seq.iter()
        .rev()
        .take(3)
        .all(|&v| v <= BOUNDED_TAIL_FACTOR * med)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasProfileEntry {
    pub h: f64,
    pub bias_sup: f64,
    /// `h^{-beta} ||K_h * f - f||_inf`.
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasProfile {
    pub beta: f64,
    pub entries: Vec<BiasProfileEntry>,
    pub bounded: bool,
}

impl BiasProfile {
    pub fn normalized(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.normalized).collect()
    }
}

/// Normalized bias `h^{-beta} ||K_h * f - f||_inf` along a decreasing
/// bandwidth sequence, with the bounded-tail verdict.
pub fn bias_profile(
    f: &GridFunction,
    kernel: &Kernel,
    beta: f64,
    h_list: &[f64],
) -> Result<BiasProfile> {
    if !(beta > 0.0) {
        return Err(Error::invalid("beta must be positive"));
    }
    if h_list.is_empty() {
        return Err(Error::invalid("empty bandwidth list"));
    }
    if h_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("bandwidths must be strictly decreasing"));
    }
    let entries = h_list
        .iter()
        .map(|&h| {
            let bias_sup = smooth(f, kernel, h)?.sup_distance(f)?;
            Ok(BiasProfileEntry {
                h,
                bias_sup,
                normalized: h.powf(-beta) * bias_sup,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let normalized: Vec<f64> = entries.iter().map(|e| e.normalized).collect();
    Ok(BiasProfile {
        beta,
        bounded: bounded_tail(&normalized),
        entries,
    })
}
