//! Monte Carlo sup-norm risk, rate fitting, inequality checks and the
//! three-channel maxiset verdict.
//!
//! Replication `r` at sample size `n` draws its noise from
//! `stream_seed(stream_seed(seed, n), r)`. Results are collected in
//! replication order and folded sequentially, so the thread count never
//! changes a report.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{bandwidth, bias_profile, bounded_tail, BandwidthRule, BiasProfile, SmoothingOperator};
use crate::function_zoo::{besov_seminorm, holder_class_seminorm, refinement_check, zoo_from_name, RefinementReport};
use crate::grid::GridFunction;
use crate::kernels::{kernel_from_name, Kernel};
use crate::lepski::{calibrate_c1, LepskiPlan, RegularityGrid, C1_CALIBRATION_REPS};
use crate::noise_model::{sample_noise, stream_seed, ModelParams};
use crate::quadrature::ls_slope;

/// `psi_n(beta) = (log n / n)^{beta / (2 beta + d)}`.
pub fn psi(n: u64, beta: f64, dim: usize) -> f64 {
    let nf = n as f64;
    (nf.ln() / nf).powf(target_exponent(beta, dim))
}

/// `beta / (2 beta + d)`.
pub fn target_exponent(beta: f64, dim: usize) -> f64 {
    beta / (2.0 * beta + dim as f64)
}

/// Tolerance on the fitted exponent.
pub const EXPONENT_TOLERANCE: f64 = 0.1;
/// Total growth of the last four ratios that marks a non-member.
pub const RATIO_GROWTH_FACTOR: f64 = 2.0;
/// Width of the Monte Carlo slack, in standard errors.
pub const SLACK_STANDARD_ERRORS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Procedure {
    Fixed {
        beta: f64,
        kernel: String,
    },
    Lepski {
        betas: Vec<f64>,
        kernels: Vec<String>,
        /// Calibrated from pure noise when absent.
        c1: Option<f64>,
    },
}

/// One Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub function: String,
    pub dim: usize,
    pub resolution: usize,
    pub sigma: f64,
    pub p: f64,
    pub c: f64,
    pub n_grid: Vec<u64>,
    pub replications: usize,
    pub seed: u64,
    pub procedure: Procedure,
    /// Regularity whose rate `psi_n(beta)` the risk is compared against.
    pub target_beta: f64,
}

impl ExperimentConfig {
    /// Fixed-regularity experiment with `sigma = 1`, `p = 2`, `C = 1` and
    /// ten replications.
    pub fn fixed(
        function: &str,
        beta: f64,
        kernel: &str,
        dim: usize,
        resolution: usize,
        n_grid: Vec<u64>,
    ) -> Self {
        Self {
            name: format!("fixed_beta={beta}"),
            function: function.to_string(),
            dim,
            resolution,
            sigma: 1.0,
            p: 2.0,
            c: 1.0,
            n_grid,
            replications: 10,
            seed: 0,
            procedure: Procedure::Fixed {
                beta,
                kernel: kernel.to_string(),
            },
            target_beta: beta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Validation(m));
        if self.dim == 0 {
            return fail("dimension must be >= 1".into());
        }
        if self.resolution < 2 || !self.resolution.is_power_of_two() {
            return fail(format!("resolution must be a power of two, got {}", self.resolution));
        }
        if self.replications < 2 {
            return fail(format!("replications must be >= 2, got {}", self.replications));
        }
        if !(self.c > 0.0) || !self.c.is_finite() {
            return fail(format!("C must be positive, got {}", self.c));
        }
        if !(self.target_beta > 0.0) || !self.target_beta.is_finite() {
            return fail(format!("target beta must be positive, got {}", self.target_beta));
        }
        ModelParams::new(self.sigma, 2, self.p).map_err(|e| Error::Validation(e.to_string()))?;
        if self.n_grid.is_empty() || self.n_grid[0] < 2 {
            return fail("n_grid must be nonempty with n >= 2".into());
        }
        if self.n_grid.len() >= 2 {
            let r0 = self.n_grid[1] as f64 / self.n_grid[0] as f64;
            for w in self.n_grid.windows(2) {
                let r = w[1] as f64 / w[0] as f64;
                if r < 2.0 || (r - r0).abs() > 1e-9 * r0 {
                    return fail(format!(
                        "n_grid must be geometric with ratio >= 2, got {:?}",
                        self.n_grid
                    ));
                }
            }
        }
        zoo_from_name(&self.function, self.dim, self.resolution)?;
        match &self.procedure {
            Procedure::Fixed { beta, kernel } => {
                let k = kernel_from_name(kernel, self.dim)?;
                if !(*beta > 0.0) {
                    return fail(format!("beta must be positive, got {beta}"));
                }
                if (k.order() as f64) < beta.ceil() {
                    return fail(format!(
                        "kernel {} has order {} below ceil(beta) = {}",
                        k.name(),
                        k.order(),
                        beta.ceil()
                    ));
                }
            }
            Procedure::Lepski { c1, .. } => {
                if let Some(c1) = c1 {
                    if !(*c1 > 0.0) {
                        return fail(format!("C1 must be positive, got {c1}"));
                    }
                }
                self.regularity_grid(1.0)
                    .map_err(|e| match e {
                        Error::InvalidArgument(m) => Error::Validation(m),
                        other => other,
                    })?;
            }
        }
        Ok(())
    }

    fn regularity_grid(&self, c1: f64) -> Result<RegularityGrid> {
        let Procedure::Lepski { betas, kernels, .. } = &self.procedure else {
            return Err(Error::invalid("not a Lepski procedure"));
        };
        let ks = kernels
            .iter()
            .map(|k| kernel_from_name(k, self.dim))
            .collect::<Result<Vec<_>>>()?;
        RegularityGrid::new(betas.clone(), ks, self.c, c1)
    }

    fn params(&self, n: u64) -> Result<ModelParams> {
        ModelParams::new(self.sigma, n, self.p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Member,
    NonMember,
    Boundary,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Member => "member",
            Verdict::NonMember => "non-member",
            Verdict::Boundary => "boundary",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskRow {
    pub n: u64,
    /// Bandwidth used; for the adaptive procedure, the bandwidth of the
    /// most frequently selected regularity.
    pub h: f64,
    /// Monte Carlo mean of `||f_hat - f||^p`.
    pub risk: f64,
    pub std_error: f64,
    /// `||E f_hat - f||`.
    pub bias_sup: f64,
    /// Monte Carlo mean of `||f_hat - E f_hat||^p`.
    pub variance_risk: f64,
    pub variance_std_error: f64,
    pub psi: f64,
    /// `risk / psi^p`.
    pub ratio: f64,
    /// Selection counts per candidate regularity (adaptive procedure only).
    pub selections: Option<Vec<usize>>,
    /// `||f_hat - f||` per replication.
    #[serde(skip)]
    pub loss_samples: Vec<f64>,
    /// `||f_hat - E f_hat||` per replication.
    #[serde(skip)]
    pub stochastic_samples: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskReport {
    pub name: String,
    pub function: String,
    pub target_beta: f64,
    pub dim: usize,
    pub p: f64,
    pub replications: usize,
    pub rows: Vec<RiskRow>,
    pub ratio_sequence: Vec<f64>,
    pub fitted_exponent: Option<f64>,
    pub target_exponent: f64,
    pub verdict: Option<Verdict>,
    /// Threshold constant used by the adaptive procedure.
    pub c1: Option<f64>,
    pub betas: Option<Vec<f64>>,
}

fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let r = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / r;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r - 1.0);
    (mean, (var / r).sqrt())
}

fn row_from_samples(
    n: u64,
    h: f64,
    bias_sup: f64,
    loss: Vec<f64>,
    stochastic: Vec<f64>,
    cfg: &ExperimentConfig,
) -> RiskRow {
    let p = cfg.p;
    let lp: Vec<f64> = loss.iter().map(|v| v.powf(p)).collect();
    let sp: Vec<f64> = stochastic.iter().map(|v| v.powf(p)).collect();
    let (risk, std_error) = mean_and_se(&lp);
    let (variance_risk, variance_std_error) = mean_and_se(&sp);
    let psi_n = psi(n, cfg.target_beta, cfg.dim);
    RiskRow {
        n,
        h,
        risk,
        std_error,
        bias_sup,
        variance_risk,
        variance_std_error,
        psi: psi_n,
        ratio: risk / psi_n.powf(p),
        selections: None,
        loss_samples: loss,
        stochastic_samples: stochastic,
    }
}

fn noise_free_row(n: u64, h: f64, bias_sup: f64, cfg: &ExperimentConfig) -> RiskRow {
    let psi_n = psi(n, cfg.target_beta, cfg.dim);
    let risk = bias_sup.powf(cfg.p);
    RiskRow {
        n,
        h,
        risk,
        std_error: 0.0,
        bias_sup,
        variance_risk: 0.0,
        variance_std_error: 0.0,
        psi: psi_n,
        ratio: risk / psi_n.powf(cfg.p),
        selections: None,
        loss_samples: vec![bias_sup; cfg.replications],
        stochastic_samples: vec![0.0; cfg.replications],
    }
}

/// Builds one item per `n`, collecting every inadmissible `n` into a single
/// error.
fn per_n<T>(n_grid: &[u64], build: impl Fn(u64) -> Result<T>) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(n_grid.len());
    let mut bad = Vec::new();
    let mut reason = None;
    for &n in n_grid {
        match build(n) {
            Ok(v) => out.push(v),
            Err(e) => {
                bad.push(n);
                reason.get_or_insert_with(|| e.to_string());
            }
        }
    }
    match reason {
        None => Ok(out),
        Some(reason) => Err(Error::Inadmissible {
            n_values: bad,
            reason,
        }),
    }
}

/// Key of the calibration substream, disjoint from every `n`.
const CALIBRATION_STREAM: u64 = u64::MAX;

/// Monte Carlo risk of the configured procedure at every `n`.
pub fn mc_risk(cfg: &ExperimentConfig) -> Result<RiskReport> {
    cfg.validate()?;
    let f = zoo_from_name(&cfg.function, cfg.dim, cfg.resolution)?.signal;
    let (rows, c1, betas) = match &cfg.procedure {
        Procedure::Fixed { beta, kernel } => {
            let k = kernel_from_name(kernel, cfg.dim)?;
            let rule = BandwidthRule::new(cfg.c, *beta, cfg.dim)?;
            let ops = per_n(&cfg.n_grid, |n| {
                SmoothingOperator::new(&k, bandwidth(n, &rule)?, cfg.resolution)
            })?;
            let rows = cfg
                .n_grid
                .iter()
                .zip(&ops)
                .map(|(&n, op)| fixed_row(cfg, &f, n, op))
                .collect::<Result<Vec<_>>>()?;
            (rows, None, None)
        }
        Procedure::Lepski { betas, c1, .. } => {
            let provisional = cfg.regularity_grid(1.0)?;
            let plans = per_n(&cfg.n_grid, |n| LepskiPlan::new(&provisional, n, cfg.resolution))?;
            let c1 = match c1 {
                Some(c1) => *c1,
                None if cfg.sigma == 0.0 => 1.0,
                None => {
                    let params = cfg.params(cfg.n_grid[0])?;
                    calibrate_c1(
                        &provisional,
                        &params,
                        cfg.resolution,
                        C1_CALIBRATION_REPS,
                        stream_seed(cfg.seed, CALIBRATION_STREAM),
                    )?
                    .c1
                }
            };
            let rows = cfg
                .n_grid
                .iter()
                .zip(plans)
                .map(|(&n, plan)| lepski_row(cfg, &f, n, &plan.with_c1(c1)?, betas.len()))
                .collect::<Result<Vec<_>>>()?;
            (rows, Some(c1), Some(betas.clone()))
        }
    };
    let mut report = RiskReport {
        name: cfg.name.clone(),
        function: cfg.function.clone(),
        target_beta: cfg.target_beta,
        dim: cfg.dim,
        p: cfg.p,
        replications: cfg.replications,
        ratio_sequence: rows.iter().map(|r| r.ratio).collect(),
        rows,
        fitted_exponent: None,
        target_exponent: target_exponent(cfg.target_beta, cfg.dim),
        verdict: None,
        c1,
        betas,
    };
    if report.rows.len() >= 4 {
        let fit = rate_fit(&report, cfg.target_beta, cfg.dim)?;
        report.fitted_exponent = Some(fit.fitted_exponent);
        report.verdict = Some(fit.verdict);
    }
    Ok(report)
}

fn fixed_row(cfg: &ExperimentConfig, f: &GridFunction, n: u64, op: &SmoothingOperator) -> Result<RiskRow> {
    let params = cfg.params(n)?;
    let residual = op.smooth(f)?.sub(f)?;
    let bias_sup = residual.sup_norm();
    if cfg.sigma == 0.0 {
        return Ok(noise_free_row(n, op.h(), bias_sup, cfg));
    }
    let base = stream_seed(cfg.seed, n);
    let samples = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|r| {
            let noise = sample_noise(cfg.dim, cfg.resolution, stream_seed(base, r))?;
            let z = op.stochastic_term(&params, &noise)?;
            Ok((residual.add(&z)?.sup_norm(), z.sup_norm()))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let (loss, stochastic) = samples.into_iter().unzip();
    Ok(row_from_samples(n, op.h(), bias_sup, loss, stochastic, cfg))
}

fn lepski_row(
    cfg: &ExperimentConfig,
    f: &GridFunction,
    n: u64,
    plan: &LepskiPlan,
    levels: usize,
) -> Result<RiskRow> {
    let params = cfg.params(n)?;
    let bias = plan.bias_parts(f)?;
    let base = stream_seed(cfg.seed, n);
    let runs = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|r| {
            let noise = sample_noise(cfg.dim, cfg.resolution, stream_seed(base, r))?;
            let (trace, est) = plan.run(&bias, &params, &noise)?;
            Ok((trace.selected_index, est.estimate))
        })
        .collect::<Result<Vec<(usize, GridFunction)>>>()?;
    let mut counts = vec![0usize; levels];
    let mut total = vec![0.0; f.len()];
    for (i, est) in &runs {
        counts[*i] += 1;
        total.iter_mut().zip(est.values()).for_each(|(t, v)| *t += v);
    }
    let reps = runs.len() as f64;
    let mean = GridFunction::new(f.dim(), f.resolution(), total.into_iter().map(|t| t / reps).collect())?;
    let bias_sup = mean.sup_distance(f)?;
    let mut loss = Vec::with_capacity(runs.len());
    let mut stochastic = Vec::with_capacity(runs.len());
    for (_, est) in &runs {
        loss.push(est.sup_distance(f)?);
        stochastic.push(est.sup_distance(&mean)?);
    }
    let mode = (0..levels).fold(0, |best, i| if counts[i] > counts[best] { i } else { best });
    let mut row = row_from_samples(n, plan.bandwidths()[mode], bias_sup, loss, stochastic, cfg);
    row.selections = Some(counts);
    Ok(row)
}

// ---------------------------------------------------------------------------
// Rate fitting

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub fitted_exponent: f64,
    pub target_exponent: f64,
    pub verdict: Verdict,
}

/// Slope of `log risk` against `log(log n / n)`, divided by `p`, with the
/// member / non-member / boundary verdict.
///
/// Member: the fitted exponent is at least the target minus 0.1 and none of
/// the last three ratios exceeds 1.5 times their median. Non-member: the
/// exponent falls short by more than 0.1, or the last four ratios increase
/// strictly by a total factor of at least 2. Boundary otherwise.
pub fn rate_fit(report: &RiskReport, beta: f64, dim: usize) -> Result<RateFit> {
    let ns: Vec<u64> = report.rows.iter().map(|r| r.n).collect();
    let risks: Vec<f64> = report.rows.iter().map(|r| r.risk).collect();
    rate_fit_values(&ns, &risks, report.p, beta, dim)
}

pub fn rate_fit_values(ns: &[u64], risks: &[f64], p: f64, beta: f64, dim: usize) -> Result<RateFit> {
    if ns.len() < 4 || ns.len() != risks.len() {
        return Err(Error::invalid(format!(
            "rate fit needs at least 4 rows, got {}",
            ns.len()
        )));
    }
    if risks.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::invalid("rate fit needs positive risks"));
    }
    let x: Vec<f64> = ns.iter().map(|&n| ((n as f64).ln() / n as f64).ln()).collect();
    let y: Vec<f64> = risks.iter().map(|r| r.ln()).collect();
    let fitted_exponent = ls_slope(&x, &y) / p;
    let target = target_exponent(beta, dim);
    let ratios: Vec<f64> = ns
        .iter()
        .zip(risks)
        .map(|(&n, r)| r / psi(n, beta, dim).powf(p))
        .collect();
    let tail = &ratios[ratios.len() - 4..];
    let growing = tail.windows(2).all(|w| w[1] > w[0]) && tail[3] >= RATIO_GROWTH_FACTOR * tail[0];
    let verdict = if fitted_exponent >= target - EXPONENT_TOLERANCE && bounded_tail(&ratios) {
        Verdict::Member
    } else if fitted_exponent < target - EXPONENT_TOLERANCE || growing {
        Verdict::NonMember
    } else {
        Verdict::Boundary
    };
    Ok(RateFit {
        fitted_exponent,
        target_exponent: target,
        verdict,
    })
}

// ---------------------------------------------------------------------------
// Inequality checks

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma1Row {
    pub n: u64,
    /// `bias^p <= risk + 3 se`.
    pub bias_ok: bool,
    /// `variance_risk <= 2^p risk (1 + 3 rel)`.
    pub variance_ok: bool,
    /// `risk <= 2^{p-1} (bias^p + variance_risk) (1 + 3 rel)`.
    pub decomposition_ok: bool,
}

impl Lemma1Row {
    pub fn holds(&self) -> bool {
        self.bias_ok && self.variance_ok && self.decomposition_ok
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma1Report {
    pub rows: Vec<Lemma1Row>,
    pub all_pass: bool,
}

fn rel(se: f64, mean: f64) -> f64 {
    if mean > 0.0 {
        se / mean
    } else {
        0.0
    }
}

/// Checks the bias and centred-moment inequalities, and the bias-variance
/// decomposition bound, row by row within three standard errors.
pub fn lemma1_check(report: &RiskReport) -> Lemma1Report {
    let p = report.p;
    let k = SLACK_STANDARD_ERRORS;
    let rows: Vec<Lemma1Row> = report
        .rows
        .iter()
        .map(|r| {
            let rel_risk = rel(r.std_error, r.risk);
            let rel_var = rel(r.variance_std_error, r.variance_risk);
            let combined = rel_risk.hypot(rel_var);
            let bias_p = r.bias_sup.powf(p);
            Lemma1Row {
                n: r.n,
                bias_ok: bias_p <= r.risk * (1.0 + k * rel_risk),
                variance_ok: r.variance_risk <= 2f64.powf(p) * r.risk * (1.0 + k * combined),
                decomposition_ok: r.risk
                    <= 2f64.powf(p - 1.0) * (bias_p + r.variance_risk) * (1.0 + k * combined),
            }
        })
        .collect();
    Lemma1Report {
        all_pass: rows.iter().all(Lemma1Row::holds),
        rows,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceBoundRow {
    pub h: f64,
    /// `(2 d sigma^2 ||K||^2 |log h| / (n h^d))^{p/2}`.
    pub bound: f64,
    /// Monte Carlo mean of `||Z||^p`.
    pub mc_moment: f64,
    pub std_error: f64,
    pub ratio: f64,
    #[serde(skip)]
    pub sup_samples: Vec<f64>,
}

impl VarianceBoundRow {
    /// Monte Carlo mean of `||Z||^q` on the same draws.
    pub fn moment(&self, q: f64) -> f64 {
        self.sup_samples.iter().map(|s| s.powf(q)).sum::<f64>() / self.sup_samples.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceBoundReport {
    pub delta: f64,
    pub p: f64,
    pub rows: Vec<VarianceBoundRow>,
    /// Ratio at the smallest bandwidth is at least `1 - delta`.
    pub pass: bool,
    /// Ratios never decrease as `h` decreases.
    pub nondecreasing: bool,
}

/// Monte Carlo `E ||Z||^p` for pure noise against the lower bound
/// `(2 d sigma^2 ||K||^2 |log h| / (n h^d))^{p/2}` along a decreasing dyadic
/// bandwidth sweep.
pub fn variance_lower_bound_check(
    kernel: &Kernel,
    h_list: &[f64],
    params: &ModelParams,
    delta: f64,
    reps: usize,
    resolution: usize,
    seed: u64,
) -> Result<VarianceBoundReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    if h_list.is_empty() || h_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("bandwidths must be nonempty and strictly decreasing"));
    }
    if h_list.iter().any(|h| h.log2().fract() != 0.0) {
        return Err(Error::invalid("bandwidths must be powers of two"));
    }
    if reps < 2 {
        return Err(Error::invalid("at least 2 replications are needed"));
    }
    let d = kernel.dim();
    let p = params.p;
    let rows = h_list
        .iter()
        .enumerate()
        .map(|(i, &h)| {
            let op = SmoothingOperator::new(kernel, h, resolution)?;
            let base = stream_seed(seed, i as u64);
            let sups = (0..reps as u64)
                .into_par_iter()
                .map(|r| {
                    let noise = sample_noise(d, resolution, stream_seed(base, r))?;
                    Ok(op.stochastic_term(params, &noise)?.sup_norm())
                })
                .collect::<Result<Vec<f64>>>()?;
            let (mc_moment, std_error) =
                mean_and_se(&sups.iter().map(|s| s.powf(p)).collect::<Vec<_>>());
            let bound = (2.0 * d as f64 * params.sigma.powi(2) * kernel.l2_norm().powi(2) * h.ln().abs()
                / (params.n as f64 * h.powi(d as i32)))
            .powf(p / 2.0);
            Ok(VarianceBoundRow {
                h,
                bound,
                mc_moment,
                std_error,
                ratio: mc_moment / bound,
                sup_samples: sups,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = rows.last().is_some_and(|r| r.ratio >= 1.0 - delta);
    let nondecreasing = rows.windows(2).all(|w| w[1].ratio >= w[0].ratio);
    Ok(VarianceBoundReport {
        delta,
        p,
        rows,
        pass,
        nondecreasing,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem1Check {
    /// `h_n^{-1} (log n / n)^{1/(2 beta + d)}` per `n`.
    pub values: Vec<f64>,
    pub max: f64,
    /// Largest `values[j] / values[i]` over `i < j`.
    pub max_growth: f64,
    pub pass: bool,
}

/// Certifies over the tested range that `h_n^{-1} <= C (log n / n)^{-1/(2 beta + d)}`
/// for a finite `C`: fails when the normalized sequence grows by a factor of
/// 2 or more.
pub fn theorem1_bandwidth_check(schedule: &[(u64, f64)], beta: f64, dim: usize) -> Result<Theorem1Check> {
    if schedule.is_empty() {
        return Err(Error::invalid("empty bandwidth schedule"));
    }
    let values: Vec<f64> = schedule
        .iter()
        .map(|&(n, h)| {
            let nf = n as f64;
            (nf.ln() / nf).powf(1.0 / (2.0 * beta + dim as f64)) / h
        })
        .collect();
    let mut max_growth: f64 = 1.0;
    let mut running_min = f64::INFINITY;
    for &v in &values {
        running_min = running_min.min(v);
        max_growth = max_growth.max(v / running_min);
    }
    Ok(Theorem1Check {
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        pass: max_growth < RATIO_GROWTH_FACTOR,
        max_growth,
        values,
    })
}

// ---------------------------------------------------------------------------
// Maxiset verdict

/// Coarsest grid used by the seminorm refinement channel.
pub fn seminorm_base_resolution(dim: usize) -> usize {
    if dim == 1 {
        1 << 10
    } else {
        1 << 6
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasChannel {
    pub verdict: Verdict,
    pub kernel: String,
    pub profile: BiasProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateChannel {
    pub verdict: Verdict,
    pub fitted_exponent: f64,
    pub target_exponent: f64,
    pub ratio_sequence: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeminormChannel {
    pub verdict: Verdict,
    /// Holder-space seminorm under refinement.
    pub holder: RefinementReport,
    /// Zygmund-type seminorm at integer `beta`.
    pub besov: Option<RefinementReport>,
    pub holder_member: bool,
    pub besov_member: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxisetVerdict {
    pub function: String,
    pub beta: f64,
    pub integer_beta: bool,
    pub bias: BiasChannel,
    pub rate: RateChannel,
    pub seminorm: SeminormChannel,
    pub bias_rate_agree: bool,
    pub all_agree: bool,
    pub verdict: Verdict,
}

fn membership(divergent: bool) -> Verdict {
    if divergent {
        Verdict::NonMember
    } else {
        Verdict::Member
    }
}

/// Kernel whose bias defines the maxiset condition for the configured
/// procedure.
fn bias_kernel(cfg: &ExperimentConfig) -> Result<Kernel> {
    match &cfg.procedure {
        Procedure::Fixed { kernel, .. } => kernel_from_name(kernel, cfg.dim),
        Procedure::Lepski { kernels, .. } => {
            let ks = kernels
                .iter()
                .map(|k| kernel_from_name(k, cfg.dim))
                .collect::<Result<Vec<_>>>()?;
            let need = crate::kernels::required_order(cfg.target_beta);
            let idx = ks.iter().position(|k| k.order() >= need).unwrap_or(ks.len() - 1);
            Ok(ks[idx].clone())
        }
    }
}

fn seminorm_refinement(
    name: &str,
    dim: usize,
    seminorm: impl Fn(&GridFunction) -> Result<f64> + Copy,
) -> Result<RefinementReport> {
    let base = seminorm_base_resolution(dim);
    match refinement_check(name, dim, base, seminorm) {
        Err(Error::Aliasing { top_frequency, .. }) => {
            refinement_check(name, dim, (8 * top_frequency).next_power_of_two(), seminorm)
        }
        other => other,
    }
}

/// Seminorm channel alone: Holder stability under refinement, plus the
/// Zygmund-type seminorm at integer `beta`.
pub fn seminorm_channel(function: &str, dim: usize, beta: f64) -> Result<SeminormChannel> {
    let holder = seminorm_refinement(function, dim, |g| holder_class_seminorm(g, beta))?;
    let integer = beta.fract() == 0.0;
    let besov = if integer {
        Some(seminorm_refinement(function, dim, |g| besov_seminorm(g, beta))?)
    } else {
        None
    };
    let holder_member = !holder.divergent;
    let besov_member = besov.as_ref().map(|b| !b.divergent);
    Ok(SeminormChannel {
        verdict: if integer {
            Verdict::Boundary
        } else {
            membership(holder.divergent)
        },
        holder,
        besov,
        holder_member,
        besov_member,
    })
}

/// Combines the noise-free bias channel along `h_{n,beta}`, the Monte Carlo
/// rate channel of `report` and the seminorm channel. At integer `beta` the
/// verdict is always `boundary`, with both seminorm memberships shown.
pub fn maxiset_verdict(cfg: &ExperimentConfig, report: &RiskReport) -> Result<MaxisetVerdict> {
    let beta = cfg.target_beta;
    let f = zoo_from_name(&cfg.function, cfg.dim, cfg.resolution)?.signal;
    let kernel = bias_kernel(cfg)?;
    let rule = BandwidthRule::new(cfg.c, beta, cfg.dim)?;
    let hs = cfg
        .n_grid
        .iter()
        .map(|&n| bandwidth(n, &rule))
        .collect::<Result<Vec<_>>>()?;
    let profile = bias_profile(&f, &kernel, beta, &hs)?;
    let bias = BiasChannel {
        verdict: membership(!profile.bounded),
        kernel: kernel.name().to_string(),
        profile,
    };
    let fit = rate_fit(report, beta, cfg.dim)?;
    let rate = RateChannel {
        verdict: fit.verdict,
        fitted_exponent: fit.fitted_exponent,
        target_exponent: fit.target_exponent,
        ratio_sequence: report.ratio_sequence.clone(),
    };
    let seminorm = seminorm_channel(&cfg.function, cfg.dim, beta)?;
    let integer_beta = beta.fract() == 0.0;
    let bias_rate_agree = bias.verdict == rate.verdict;
    let all_agree = bias_rate_agree && seminorm.verdict == bias.verdict;
    let verdict = if !integer_beta && bias_rate_agree {
        bias.verdict
    } else {
        Verdict::Boundary
    };
    Ok(MaxisetVerdict {
        function: cfg.function.clone(),
        beta,
        integer_beta,
        bias,
        rate,
        seminorm,
        bias_rate_agree,
        all_agree,
        verdict,
    })
}
