//! Simulation lab for sup-norm kernel estimation in the Gaussian white noise
//! model `dY = f dt + (sigma / sqrt(n)) dW` on the periodic unit cube, with
//! maxiset membership diagnostics.
//!
//! Signals live on a regular grid ([`GridFunction`]); the white noise is a
//! field of i.i.d. cell increments ([`NoiseField`]); estimators are circular
//! convolutions with rescaled kernels ([`Kernel`]). On top of that sit the
//! Monte Carlo risk harness, the Lepski selector and the seminorm
//! diagnostics of the function zoo.

// `!(x > 0.0)` is used on purpose so that NaN fails argument checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod conv;
pub mod error;
pub mod estimator;
pub mod function_zoo;
pub mod grid;
pub mod kernels;
pub mod lepski;
pub mod noise_model;
pub mod quadrature;
pub mod report;
pub mod risk_harness;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use estimator::{bandwidth, bias_profile, kernel_estimate, smooth, sup_norm, BandwidthRule, EstimateRealization};
pub use function_zoo::{zoo_from_name, ZooFunction};
pub use grid::GridFunction;
pub use kernels::{check_conditions, kernel_from_name, Kernel};
pub use lepski::{adaptive_estimate, select, LepskiTrace, RegularityGrid};
pub use noise_model::{sample_noise, stochastic_convolution, ModelParams, NoiseField};
pub use risk_harness::{maxiset_verdict, mc_risk, psi, rate_fit, ExperimentConfig, Procedure, RiskReport, Verdict};
