//! Lepski selection of the regularity index from pairwise sup-norm
//! comparisons of fixed-bandwidth estimates that share one noise field.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::{bandwidth, BandwidthRule, EstimateRealization, SmoothingOperator};
use crate::grid::GridFunction;
use crate::kernels::{required_order, Kernel};
use crate::noise_model::{sample_noise, stream_seed, ModelParams, NoiseField};
use crate::risk_harness::psi;

/// Safety factor applied to the calibrated quantile.
pub const C1_SAFETY_FACTOR: f64 = 1.2;
/// Quantile of the pure-noise statistic used for calibration.
pub const C1_QUANTILE: f64 = 0.95;
/// Pure-noise replications used for calibration.
pub const C1_CALIBRATION_REPS: usize = 200;

/// Candidate regularities `beta_1 < ... < beta_L` with one kernel each.
#[derive(Debug, Clone)]
pub struct RegularityGrid {
    betas: Vec<f64>,
    kernels: Vec<Kernel>,
    c: f64,
    c1: f64,
}

impl RegularityGrid {
    pub fn new(betas: Vec<f64>, kernels: Vec<Kernel>, c: f64, c1: f64) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::invalid("regularity grid is empty"));
        }
        if betas.len() != kernels.len() {
            return Err(Error::invalid(format!(
                "{} regularities but {} kernels",
                betas.len(),
                kernels.len()
            )));
        }
        if betas.iter().any(|b| !(*b > 0.0) || b.fract() == 0.0) {
            return Err(Error::invalid(format!(
                "regularities must be positive non-integers, got {betas:?}"
            )));
        }
        if betas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("regularities must be strictly increasing"));
        }
        if kernels.iter().any(|k| k.dim() != kernels[0].dim()) {
            return Err(Error::invalid("kernels must share one dimension"));
        }
        for (b, k) in betas.iter().zip(&kernels) {
            if k.order() < required_order(*b) {
                return Err(Error::invalid(format!(
                    "kernel {} has order {} < {} required for beta = {b}",
                    k.name(),
                    k.order(),
                    required_order(*b)
                )));
            }
        }
        if !(c > 0.0) || !(c1 > 0.0) {
            return Err(Error::invalid(format!("C and C1 must be positive (C={c}, C1={c1})")));
        }
        Ok(Self { betas, kernels, c, c1 })
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn kernels(&self) -> &[Kernel] {
        &self.kernels
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn dim(&self) -> usize {
        self.kernels[0].dim()
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    pub fn with_c1(&self, c1: f64) -> Result<Self> {
        Self::new(self.betas.clone(), self.kernels.clone(), self.c, c1)
    }

    /// The grid without its largest regularity.
    pub fn without_last(&self) -> Result<Self> {
        let l = self.len() - 1;
        Self::new(self.betas[..l].to_vec(), self.kernels[..l].to_vec(), self.c, self.c1)
    }

    /// Bandwidths `h_{n, beta_i}` of the fixed-regularity rules.
    pub fn bandwidths(&self, n: u64) -> Result<Vec<f64>> {
        self.betas
            .iter()
            .map(|&b| bandwidth(n, &BandwidthRule::new(self.c, b, self.dim())?))
            .collect()
    }
}

/// Threshold `eta_n(gamma) = C1 psi_n(gamma)`.
pub fn eta(n: u64, gamma: f64, c1: f64, dim: usize) -> f64 {
    c1 * psi(n, gamma, dim)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LepskiTrace {
    pub selected: f64,
    pub selected_index: usize,
    /// `pairwise_distances[u][g]` for `g <= u`.
    pub pairwise_distances: Vec<Vec<f64>>,
    pub thresholds: Vec<f64>,
    pub feasible_set: Vec<f64>,
}

fn select_grids(estimates: &[&GridFunction], grid: &RegularityGrid, n: u64) -> Result<LepskiTrace> {
    if estimates.len() != grid.len() {
        return Err(Error::invalid(format!(
            "{} estimates for {} regularities",
            estimates.len(),
            grid.len()
        )));
    }
    let thresholds: Vec<f64> = grid
        .betas
        .iter()
        .map(|&g| eta(n, g, grid.c1, grid.dim()))
        .collect();
    let pairwise_distances = (0..grid.len())
        .map(|u| {
            (0..=u)
                .map(|g| estimates[u].sup_distance(estimates[g]))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let feasible: Vec<usize> = (0..grid.len())
        .filter(|&u| (0..=u).all(|g| pairwise_distances[u][g] <= thresholds[g]))
        .collect();
    let selected_index = *feasible.last().expect("the smallest regularity is always feasible");
    Ok(LepskiTrace {
        selected: grid.betas[selected_index],
        selected_index,
        pairwise_distances,
        thresholds,
        feasible_set: feasible.iter().map(|&i| grid.betas[i]).collect(),
    })
}

/// `beta_hat = max{u : ||f_u - f_g||_inf <= eta_n(g) for all g <= u}`.
pub fn select(estimates: &[EstimateRealization], grid: &RegularityGrid, n: u64) -> Result<LepskiTrace> {
    let grids: Vec<&GridFunction> = estimates.iter().map(|e| &e.estimate).collect();
    select_grids(&grids, grid, n)
}

/// Per-regularity smoothing operators for one `n`, prepared once and reused
/// across replications.
#[derive(Debug, Clone)]
pub struct LepskiPlan {
    grid: RegularityGrid,
    n: u64,
    operators: Vec<SmoothingOperator>,
}

impl LepskiPlan {
    pub fn new(grid: &RegularityGrid, n: u64, resolution: usize) -> Result<Self> {
        let operators = grid
            .bandwidths(n)?
            .into_iter()
            .zip(&grid.kernels)
            .map(|(h, k)| SmoothingOperator::new(k, h, resolution))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: grid.clone(),
            n,
            operators,
        })
    }

    /// Same operators with a different threshold constant.
    pub fn with_c1(mut self, c1: f64) -> Result<Self> {
        self.grid = self.grid.with_c1(c1)?;
        Ok(self)
    }

    pub fn operators(&self) -> &[SmoothingOperator] {
        &self.operators
    }

    pub fn bandwidths(&self) -> Vec<f64> {
        self.operators.iter().map(|o| o.h()).collect()
    }

    /// `K_{h_i} * f` for every regularity.
    pub fn bias_parts(&self, f: &GridFunction) -> Result<Vec<GridFunction>> {
        self.operators.iter().map(|o| o.smooth(f)).collect()
    }

    /// All per-regularity estimates from one shared noise field.
    pub fn estimates(
        &self,
        bias_parts: &[GridFunction],
        params: &ModelParams,
        noise: &NoiseField,
    ) -> Result<Vec<EstimateRealization>> {
        self.operators
            .iter()
            .zip(bias_parts)
            .map(|(o, b)| o.estimate_with_bias(b, params, noise))
            .collect()
    }

    pub fn run(
        &self,
        bias_parts: &[GridFunction],
        params: &ModelParams,
        noise: &NoiseField,
    ) -> Result<(LepskiTrace, EstimateRealization)> {
        let mut estimates = self.estimates(bias_parts, params, noise)?;
        let trace = select(&estimates, &self.grid, self.n)?;
        Ok((trace.clone(), estimates.swap_remove(trace.selected_index)))
    }
}

/// Computes the per-regularity estimates, selects `beta_hat` and returns the
/// trace together with `f_hat_{n, beta_hat}`.
pub fn adaptive_estimate(
    f: &GridFunction,
    grid: &RegularityGrid,
    params: &ModelParams,
    noise: &NoiseField,
) -> Result<(LepskiTrace, EstimateRealization)> {
    if grid.dim() != f.dim() {
        return Err(Error::invalid("regularity grid and signal dimensions differ"));
    }
    let plan = LepskiPlan::new(grid, params.n, f.resolution())?;
    let bias = plan.bias_parts(f)?;
    plan.run(&bias, params, noise)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct C1Calibration {
    pub c1: f64,
    pub quantile: f64,
    /// `max_{g <= u} ||f_u - f_g||_inf / psi_n(g)` per pure-noise replication.
    pub statistics: Vec<f64>,
}

/// Linearly interpolated empirical quantile.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

/// Calibrates `C1` as 1.2 times the 95th percentile of the normalized
/// pairwise distances over `reps` pure-noise replications (`f = 0`).
pub fn calibrate_c1(
    grid: &RegularityGrid,
    params: &ModelParams,
    resolution: usize,
    reps: usize,
    seed: u64,
) -> Result<C1Calibration> {
    if reps < 2 {
        return Err(Error::invalid("calibration needs at least 2 replications"));
    }
    if !(params.sigma > 0.0) {
        return Err(Error::invalid("calibration needs sigma > 0"));
    }
    let plan = LepskiPlan::new(grid, params.n, resolution)?;
    let zero = GridFunction::zeros(grid.dim(), resolution)?;
    let bias = plan.bias_parts(&zero)?;
    let psis: Vec<f64> = grid.betas.iter().map(|&g| psi(params.n, g, grid.dim())).collect();
    let statistics = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let noise = sample_noise(grid.dim(), resolution, stream_seed(seed, r))?;
            let est = plan.estimates(&bias, params, &noise)?;
            let mut stat: f64 = 0.0;
            for u in 0..est.len() {
                for g in 0..u {
                    stat = stat.max(est[u].estimate.sup_distance(&est[g].estimate)? / psis[g]);
                }
            }
            Ok(stat)
        })
        .collect::<Result<Vec<f64>>>()?;
    let q = quantile(&statistics, C1_QUANTILE);
    Ok(C1Calibration {
        c1: C1_SAFETY_FACTOR * q,
        quantile: q,
        statistics,
    })
}
