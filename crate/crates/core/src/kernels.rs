//! Compactly supported smoothing kernels and numerical certification of the
//! kernel classes `K(N)`: compact support (A1), square integrability (A2),
//! an L2 modulus of continuity `int (K(t+u) - K(u))^2 du <= C |t|^{2 gamma}`
//! (A3), unit mass (A4), integrable a.e. derivatives up to total order `N`
//! (A5) and vanishing moments of total degree `1..=N-1` (A6).
//!
//! Norms on `R^d` are sup-norms throughout.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{default_nodes, ls_slope, midpoint_box, midpoint_cube};

type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Shape {
    /// Indicator of `[-1/2, 1/2]^d`.
    Box,
    /// `norm * (1 - sum |x_i|^beta)_+^power`.
    Poly { beta: f64, power: u32, norm: f64 },
    /// Product of the 1-d kernel `sum_m weights[m] P_m(u)` on `[-1,1]`.
    Legendre { weights: Vec<f64> },
    Custom(Evaluator),
}

/// A compactly supported kernel with the metadata that enters every rate
/// formula.
#[derive(Clone)]
pub struct Kernel {
    name: String,
    dim: usize,
    shape: Shape,
    support_radius: f64,
    order: usize,
    gamma: f64,
    l2_norm: f64,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("support_radius", &self.support_radius)
            .field("order", &self.order)
            .field("gamma", &self.gamma)
            .field("l2_norm", &self.l2_norm)
            .finish()
    }
}

/// Legendre polynomial `P_m(u)` by the three-term recurrence.
fn legendre(m: usize, u: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, u);
    if m == 0 {
        return p0;
    }
    for k in 1..m {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * u * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        Err(Error::invalid("kernel dimension must be >= 1"))
    } else {
        Ok(())
    }
}

/// Indicator of `[-1/2,1/2]^d`: order 1, `gamma = 1/2`, unit L2 norm.
pub fn box_kernel(dim: usize) -> Result<Kernel> {
    check_dim(dim)?;
    Ok(Kernel {
        name: "box".into(),
        dim,
        shape: Shape::Box,
        support_radius: 0.5,
        order: 1,
        gamma: 0.5,
        l2_norm: 1.0,
    })
}

/// `c (1 - sum |x_i|^beta)_+^power`, normalized to unit mass by quadrature.
///
/// Declared order is 2 for `power = 1, beta >= 2` and 1 otherwise. The kernel
/// vanishes continuously at the edge of its support and is Lipschitz for
/// `beta >= 1`, so the declared L2-modulus exponent is 1.
pub fn poly_kernel(beta: f64, power: u32, dim: usize) -> Result<Kernel> {
    check_dim(dim)?;
    if !(beta >= 1.0) || !beta.is_finite() {
        return Err(Error::invalid(format!("poly kernel needs beta >= 1, got {beta}")));
    }
    if !(1..=2).contains(&power) {
        return Err(Error::invalid(format!(
            "poly kernel power must be 1 or 2, got {power}"
        )));
    }
    let raw = move |x: &[f64]| {
        let s: f64 = x.iter().map(|v| v.abs().powf(beta)).sum();
        (1.0 - s).max(0.0).powi(power as i32)
    };
    let nodes = match dim {
        1 => 1 << 18,
        2 => 1 << 11,
        _ => default_nodes(dim),
    };
    let mass = midpoint_cube(dim, 1.0, nodes, raw);
    let norm = 1.0 / mass;
    let l2_sq = norm * norm * midpoint_cube(dim, 1.0, nodes, |x| raw(x).powi(2));
    let order = if power == 1 && beta >= 2.0 { 2 } else { 1 };
    Ok(Kernel {
        name: format!("poly:beta={}:pow={}", fmt_num(beta), power),
        dim,
        shape: Shape::Poly { beta, power, norm },
        support_radius: 1.0,
        order,
        gamma: 1.0,
        l2_norm: l2_sq.sqrt(),
    })
}

/// Kernel of order `order` on `[-1,1]^d` built from orthonormal Legendre
/// polynomials: `K_1(u) = sum_{m < order} phi_m(0) phi_m(u)` with
/// `phi_m = sqrt((2m+1)/2) P_m`, and the product `prod_i K_1(x_i)` for
/// `d > 1`. Moments of every degree `1..order-1` vanish.
pub fn higher_order_kernel(order: usize, dim: usize) -> Result<Kernel> {
    check_dim(dim)?;
    if order == 0 {
        return Err(Error::invalid("kernel order must be >= 1"));
    }
    let weights: Vec<f64> = (0..order)
        .map(|m| (2.0 * m as f64 + 1.0) / 2.0 * legendre(m, 0.0))
        .collect();
    // Orthonormality gives int K_1^2 = sum_m phi_m(0)^2.
    let l2_sq_1d: f64 = weights
        .iter()
        .enumerate()
        .map(|(m, w)| w * legendre(m, 0.0))
        .sum();
    let edge: f64 = weights.iter().sum();
    let gamma = if edge.abs() < 1e-12 { 1.0 } else { 0.5 };
    Ok(Kernel {
        name: format!("order:N={order}"),
        dim,
        shape: Shape::Legendre { weights },
        support_radius: 1.0,
        order,
        gamma,
        l2_norm: l2_sq_1d.powi(dim as i32).sqrt(),
    })
}

impl Kernel {
    /// Wraps an arbitrary evaluator. `support_radius` must bound the support;
    /// the L2 norm is computed by quadrature.
    pub fn custom(
        name: impl Into<String>,
        dim: usize,
        support_radius: f64,
        order: usize,
        gamma: f64,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Kernel> {
        check_dim(dim)?;
        if !(support_radius > 0.0) {
            return Err(Error::invalid("support radius must be positive"));
        }
        let f: Evaluator = Arc::new(f);
        let g = f.clone();
        let l2_sq = midpoint_cube(dim, support_radius, default_nodes(dim), move |x| {
            let v = g(x);
            v * v
        });
        Ok(Kernel {
            name: name.into(),
            dim,
            shape: Shape::Custom(f),
            support_radius,
            order,
            gamma,
            l2_norm: l2_sq.sqrt(),
        })
    }

    /// `factor * K`, keeping the declared metadata.
    pub fn scaled(&self, factor: f64) -> Kernel {
        let inner = self.clone();
        let mut out = self.clone();
        out.name = format!("{}*{}", fmt_num(factor), self.name);
        out.shape = Shape::Custom(Arc::new(move |x| factor * inner.evaluate(x)));
        out.l2_norm = self.l2_norm * factor.abs();
        out
    }

    /// `x -> K(x - offset)`; the support radius grows by `max |offset_i|`.
    pub fn translated(&self, offset: &[f64]) -> Result<Kernel> {
        if offset.len() != self.dim {
            return Err(Error::invalid("offset dimension mismatch"));
        }
        let inner = self.clone();
        let off = offset.to_vec();
        let mut out = self.clone();
        out.name = format!("{}@shifted", self.name);
        out.support_radius =
            self.support_radius + offset.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        out.shape = Shape::Custom(Arc::new(move |x| {
            let y: Vec<f64> = x.iter().zip(&off).map(|(a, b)| a - b).collect();
            inner.evaluate(&y)
        }));
        Ok(out)
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match &self.shape {
            Shape::Box => {
                if x.iter().all(|v| v.abs() <= 0.5) {
                    1.0
                } else {
                    0.0
                }
            }
            Shape::Poly { beta, power, norm } => {
                let s: f64 = x.iter().map(|v| v.abs().powf(*beta)).sum();
                norm * (1.0 - s).max(0.0).powi(*power as i32)
            }
            Shape::Legendre { weights } => x
                .iter()
                .map(|&u| {
                    if u.abs() > 1.0 {
                        0.0
                    } else {
                        weights
                            .iter()
                            .enumerate()
                            .map(|(m, w)| w * legendre(m, u))
                            .sum()
                    }
                })
                .product(),
            Shape::Custom(f) => f(x),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `A` such that `K = 0` outside `[-A, A]^d`.
    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Declared L2-modulus exponent.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm
    }

    /// One-axis factor of a product kernel.
    fn axis_factor(&self) -> Option<Kernel> {
        match self.shape {
            Shape::Box | Shape::Legendre { .. } if self.dim > 1 => Some(Kernel {
                dim: 1,
                ..self.clone()
            }),
            _ => None,
        }
    }

    /// `int K` by midpoint quadrature over the support box.
    pub fn integral(&self) -> f64 {
        match self.axis_factor() {
            Some(k1) => k1.integral().powi(self.dim as i32),
            None => self.quad(|x| self.evaluate(x)),
        }
    }

    /// `int u^alpha K(u) du`.
    pub fn moment(&self, alpha: &[u32]) -> f64 {
        if let Some(k1) = self.axis_factor() {
            return alpha.iter().map(|&a| k1.moment(&[a])).product();
        }
        self.quad(|x| {
            let mono: f64 = x.iter().zip(alpha).map(|(u, &a)| u.powi(a as i32)).product();
            mono * self.evaluate(x)
        })
    }

    /// `int K^2` by quadrature.
    pub fn l2_norm_sq_quadrature(&self) -> f64 {
        match self.axis_factor() {
            Some(k1) => k1.l2_norm_sq_quadrature().powi(self.dim as i32),
            None => self.quad(|x| self.evaluate(x).powi(2)),
        }
    }

    fn quad(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        midpoint_cube(self.dim, self.support_radius, default_nodes(self.dim), f)
    }
}

pub(crate) fn fmt_num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// Registry key patterns accepted by [`kernel_from_name`].
pub const KERNEL_KEYS: &[&str] = &["box", "poly:beta=<b>:pow=<1|2>", "order:N=<n>"];

/// Builds a kernel from its registry name, e.g. `"box"`,
/// `"poly:beta=2:pow=1"` or `"order:N=4"`.
pub fn kernel_from_name(name: &str, dim: usize) -> Result<Kernel> {
    let unknown = || Error::UnknownName {
        kind: "kernel",
        name: name.to_string(),
        known: KERNEL_KEYS.join(", "),
    };
    let mut parts = name.trim().split(':');
    match parts.next() {
        Some("box") if parts.next().is_none() => box_kernel(dim),
        Some("poly") => {
            let (mut beta, mut power) = (None, None);
            for p in parts {
                match p.split_once('=') {
                    Some(("beta", v)) => beta = v.parse::<f64>().ok(),
                    Some(("pow", v)) => power = v.parse::<u32>().ok(),
                    _ => return Err(unknown()),
                }
            }
            match (beta, power) {
                (Some(b), Some(p)) => poly_kernel(b, p, dim),
                _ => Err(unknown()),
            }
        }
        Some("order") => match (parts.next().and_then(|p| p.strip_prefix("N=")), parts.next()) {
            (Some(v), None) => {
                let n = v.parse::<usize>().map_err(|_| unknown())?;
                higher_order_kernel(n, dim)
            }
            _ => Err(unknown()),
        },
        _ => Err(unknown()),
    }
}

/// Smallest integer strictly greater than `beta`: the kernel order needed for
/// regularity `beta`.
pub fn required_order(beta: f64) -> usize {
    beta.floor() as usize + 1
}

// ---------------------------------------------------------------------------
// Condition checks

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Condition {
    A1,
    A2,
    A3,
    A4,
    A5,
    A6,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionEntry {
    pub condition: Condition,
    pub holds: bool,
    pub measured: f64,
    pub tolerance: f64,
}

impl ConditionEntry {
    fn new(condition: Condition, measured: f64, tolerance: f64) -> Self {
        Self {
            condition,
            holds: measured.is_finite() && measured <= tolerance,
            measured,
            tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub order: usize,
    pub entries: Vec<ConditionEntry>,
    /// Fitted L2-modulus exponent used for A3.
    pub measured_gamma: f64,
}

impl ConditionReport {
    pub fn get(&self, c: Condition) -> &ConditionEntry {
        self.entries
            .iter()
            .find(|e| e.condition == c)
            .expect("every condition is reported")
    }

    pub fn all_hold(&self) -> bool {
        self.entries.iter().all(|e| e.holds)
    }
}

/// Allowed shortfall of the fitted L2-modulus exponent below the declared one.
pub const GAMMA_TOLERANCE: f64 = 0.1;
/// Allowed relative change of the a.e. derivative integrals under step
/// refinement.
pub const DERIVATIVE_REFINEMENT_TOLERANCE: f64 = 0.1;

/// Multi-indices `alpha in N^d` with `lo <= |alpha| <= hi`.
pub fn multi_indices(dim: usize, lo: usize, hi: usize) -> Vec<Vec<u32>> {
    fn rec(dim: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == dim {
            out.push(cur.clone());
            return;
        }
        for a in 0..=left {
            cur.push(a as u32);
            rec(dim, left - a, cur, out);
            cur.pop();
        }
    }
    let mut all = Vec::new();
    rec(dim, hi, &mut Vec::new(), &mut all);
    all.retain(|a| {
        let s: u32 = a.iter().sum();
        (lo as u32..=hi as u32).contains(&s)
    });
    all
}

/// Numerically verifies conditions A1 to A6 for membership in `K(order)`.
/// `tol` applies to the support, norm, mass and moment residuals; A3 and A5
/// use [`GAMMA_TOLERANCE`] and [`DERIVATIVE_REFINEMENT_TOLERANCE`].
pub fn check_conditions(k: &Kernel, order: usize, tol: f64) -> Result<ConditionReport> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let d = k.dim;
    let a = k.support_radius;

    // A1: sample a lattice of [-2A, 2A]^d and keep points outside the box.
    let probes = 64usize;
    let outside_max = {
        let mut worst = 0.0f64;
        let mut counter = vec![0usize; d];
        let mut x = vec![0.0; d];
        'outer: loop {
            for i in 0..d {
                x[i] = -2.0 * a + 4.0 * a * (counter[i] as f64 + 0.5) / probes as f64;
            }
            if x.iter().any(|v| v.abs() > a * (1.0 + 1e-9)) {
                worst = worst.max(k.evaluate(&x).abs());
            }
            let mut i = d;
            loop {
                if i == 0 {
                    break 'outer;
                }
                i -= 1;
                counter[i] += 1;
                if counter[i] < probes {
                    break;
                }
                counter[i] = 0;
            }
        }
        worst
    };

    let l2_quad = k.l2_norm_sq_quadrature();
    let l2_residual = (l2_quad - k.l2_norm * k.l2_norm).abs() / (k.l2_norm * k.l2_norm).max(1.0);

    let shifts: Vec<f64> = [8.0, 16.0, 32.0, 64.0]
        .iter()
        .map(|s| (a / s).min(1.0))
        .collect();
    let gamma_hat = l2_modulus_exponent(k, &shifts)?;
    let gamma_shortfall = (k.gamma - gamma_hat.min(1.0)).max(0.0);

    let mass_residual = (k.integral() - 1.0).abs();

    let derivative_residual = multi_indices(d, 1, order)
        .iter()
        .map(|alpha| derivative_refinement_change(k, alpha))
        .fold(0.0f64, f64::max);

    let moment_residual = multi_indices(d, 1, order.saturating_sub(1))
        .iter()
        .map(|alpha| k.moment(alpha).abs())
        .fold(0.0f64, f64::max);

    Ok(ConditionReport {
        order,
        measured_gamma: gamma_hat,
        entries: vec![
            ConditionEntry::new(Condition::A1, outside_max, tol),
            ConditionEntry::new(Condition::A2, l2_residual, tol),
            ConditionEntry::new(Condition::A3, gamma_shortfall, GAMMA_TOLERANCE),
            ConditionEntry::new(Condition::A4, mass_residual, tol),
            ConditionEntry::new(
                Condition::A5,
                derivative_residual,
                DERIVATIVE_REFINEMENT_TOLERANCE,
            ),
            ConditionEntry::new(Condition::A6, moment_residual, tol),
        ],
    })
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Central mixed difference quotient `D^alpha_delta K(x)`.
fn difference_quotient(k: &Kernel, alpha: &[u32], x: &[f64], delta: f64) -> f64 {
    let d = alpha.len();
    let total: u32 = alpha.iter().sum();
    let mut j = vec![0u32; d];
    let mut y = vec![0.0; d];
    let mut sum = 0.0;
    loop {
        let mut coeff = 1.0;
        for i in 0..d {
            y[i] = x[i] + (alpha[i] as f64 / 2.0 - j[i] as f64) * delta;
            coeff *= binomial(alpha[i], j[i]);
            if j[i] % 2 == 1 {
                coeff = -coeff;
            }
        }
        sum += coeff * k.evaluate(&y);
        let mut i = d;
        loop {
            if i == 0 {
                return sum / delta.powi(total as i32);
            }
            i -= 1;
            j[i] += 1;
            if j[i] <= alpha[i] {
                break;
            }
            j[i] = 0;
        }
    }
}

/// Integral of `|D^alpha K|` over points where the a.e. derivative is
/// resolved, i.e. where quotients at `delta` and `delta/2` agree.
fn ae_derivative_integral(k: &Kernel, alpha: &[u32], delta: f64) -> f64 {
    const AGREEMENT: f64 = 0.05;
    let nodes = match k.dim {
        1 => 1 << 14,
        2 => 1 << 8,
        _ => 1 << 5,
    };
    midpoint_cube(k.dim, k.support_radius, nodes, |x| {
        let coarse = difference_quotient(k, alpha, x, delta);
        let fine = difference_quotient(k, alpha, x, delta / 2.0);
        if (coarse - fine).abs() <= AGREEMENT * (1.0 + fine.abs()) {
            fine.abs()
        } else {
            0.0
        }
    })
}

/// Relative change of the a.e. derivative integral when the difference step
/// is halved; stays small for integrable derivatives and blows up otherwise.
fn derivative_refinement_change(k: &Kernel, alpha: &[u32]) -> f64 {
    let delta = k.support_radius / 64.0;
    let coarse = ae_derivative_integral(k, alpha, delta);
    let fine = ae_derivative_integral(k, alpha, delta / 2.0);
    (fine - coarse).abs() / coarse.max(1.0)
}

/// Exponent of the L2 modulus `int (K(u + t e_1) - K(u))^2 du ~ C t^{2 gamma}`,
/// estimated as half the least-squares slope in log-log coordinates. The raw
/// estimate is returned; callers cap it at 1.
pub fn l2_modulus_exponent(k: &Kernel, shifts: &[f64]) -> Result<f64> {
    if shifts.len() < 3 {
        return Err(Error::invalid(format!(
            "need at least 3 shifts, got {}",
            shifts.len()
        )));
    }
    if let Some(t) = shifts.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
        return Err(Error::invalid(format!("shift {t} outside (0, 1]")));
    }
    let mut logs_t = Vec::with_capacity(shifts.len());
    let mut logs_m = Vec::with_capacity(shifts.len());
    for &t in shifts {
        let m = l2_modulus(k, t);
        if !(m > 0.0) {
            return Err(Error::invalid(format!(
                "L2 modulus vanishes at shift {t}; kernel is degenerate"
            )));
        }
        logs_t.push(t.ln());
        logs_m.push(m.ln());
    }
    Ok(ls_slope(&logs_t, &logs_m) / 2.0)
}

/// `int (K(u + t e_1) - K(u))^2 du`.
pub fn l2_modulus(k: &Kernel, t: f64) -> f64 {
    let a = k.support_radius;
    let d = k.dim;
    let mut lo = vec![-a; d];
    let hi = vec![a; d];
    lo[0] = -a - t;
    let nodes = match d {
        1 => 1 << 16,
        2 => 1 << 10,
        _ => default_nodes(d),
    };
    midpoint_box(&lo, &hi, nodes, |x| {
        let mut y = x.to_vec();
        y[0] += t;
        let diff = k.evaluate(&y) - k.evaluate(x);
        diff * diff
    })
}

// ---------------------------------------------------------------------------
// Dyadic bandwidth schedules

/// Result of checking the bandwidth class conditions on `m_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HClassCheck {
    pub nondecreasing: bool,
    pub divergent: bool,
    pub bounded_increments: bool,
    pub max_increment: i32,
    pub increment_bound: i32,
}

impl HClassCheck {
    pub fn holds(&self) -> bool {
        self.nondecreasing && self.divergent && self.bounded_increments
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DyadicSchedule {
    pub n_grid: Vec<u64>,
    pub exponents: Vec<i32>,
    pub bandwidths: Vec<f64>,
    pub check: HClassCheck,
}

/// Checks `h_n = 2^{-m_n}` for: `m_n` nondecreasing, growing over the grid
/// (the finite-grid stand-in for divergence), and increments bounded by
/// `increment_bound`.
pub fn check_h_class(exponents: &[i32], increment_bound: i32) -> HClassCheck {
    let increments: Vec<i32> = exponents.windows(2).map(|w| w[1] - w[0]).collect();
    let max_increment = increments.iter().copied().max().unwrap_or(0);
    HClassCheck {
        nondecreasing: increments.iter().all(|&s| s >= 0),
        divergent: exponents.len() < 2 || exponents.last() > exponents.first(),
        bounded_increments: max_increment <= increment_bound,
        max_increment,
        increment_bound,
    }
}

/// Dyadic bandwidths `h_n = 2^{-m_n}` with
/// `m_n = round(-log2(C (log n / n)^{1/(2 beta + d)}))`.
///
/// `n_grid` must be strictly increasing with consecutive ratios of at least
/// 2 so that rounding cannot break monotonicity.
pub fn dyadic_schedule(n_grid: &[u64], beta: f64, dim: usize, c: f64) -> Result<DyadicSchedule> {
    if n_grid.is_empty() {
        return Err(Error::invalid("n_grid is empty"));
    }
    if !(beta > 0.0) || !(c > 0.0) || dim == 0 {
        return Err(Error::invalid("need beta > 0, C > 0 and d >= 1"));
    }
    if n_grid[0] < 2 {
        return Err(Error::invalid("every n must be >= 2"));
    }
    for w in n_grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::invalid(format!(
                "n_grid must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if w[1] < 2 * w[0] {
            return Err(Error::invalid(format!(
                "n_grid must have consecutive ratios >= 2 ({} then {})",
                w[0], w[1]
            )));
        }
    }
    let expo = 1.0 / (2.0 * beta + dim as f64);
    let exponents: Vec<i32> = n_grid
        .iter()
        .map(|&n| {
            let n = n as f64;
            let h = c * (n.ln() / n).powf(expo);
            (-h.log2()).round() as i32
        })
        .collect();
    let widest = n_grid
        .windows(2)
        .map(|w| (w[1] as f64 / w[0] as f64).log2() * expo)
        .fold(0.0f64, f64::max);
    let bound = widest.ceil() as i32 + 1;
    let check = check_h_class(&exponents, bound);
    if !check.holds() {
        return Err(Error::DyadicSchedule(format!(
            "exponents {exponents:?} fail {check:?}"
        )));
    }
    Ok(DyadicSchedule {
        n_grid: n_grid.to_vec(),
        bandwidths: exponents.iter().map(|&m| 2f64.powi(-m)).collect(),
        exponents,
        check,
    })
}
