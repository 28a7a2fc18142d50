//! Test signals of known regularity and grid seminorm diagnostics.
//!
//! Seminorms are maxima of difference quotients over a window of
//! `resolution / 4` cells. In two dimensions only axis and diagonal offsets
//! are scanned. Distances are sup-norm distances on the torus.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::kernels::{fmt_num, multi_indices};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularity {
    Finite(f64),
    Infinite,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZooFunction {
    pub signal: GridFunction,
    pub name: String,
    pub true_regularity: Regularity,
    /// Set when the regularity is an integer, where Holder and Besov spaces
    /// differ.
    pub is_integer_boundary: bool,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(Error::invalid(format!("zoo functions exist for d in {{1, 2}}, got {dim}")))
    }
}

fn is_integer(x: f64) -> bool {
    x.fract() == 0.0
}

/// Direction of the `j`-th lacunary term: `(1,0), (0,1), (1,1)` in turn.
fn direction(j: usize, dim: usize) -> [f64; 2] {
    if dim == 1 {
        return [1.0, 0.0];
    }
    match j % 3 {
        0 => [1.0, 0.0],
        1 => [0.0, 1.0],
        _ => [1.0, 1.0],
    }
}

/// Lacunary series `sum_{j=0}^{J} 2^{-j beta} cos(2 pi 2^j <v_j, t>)`.
pub fn weierstrass(beta: f64, levels: u32, dim: usize, resolution: usize) -> Result<ZooFunction> {
    check_dim(dim)?;
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::invalid(format!("beta must be positive, got {beta}")));
    }
    let limit = resolution / 8;
    let top = 1usize.checked_shl(levels).unwrap_or(usize::MAX);
    if levels >= usize::BITS || top > limit {
        return Err(Error::Aliasing {
            top_frequency: top,
            limit,
        });
    }
    let terms: Vec<(f64, f64, [f64; 2])> = (0..=levels as usize)
        .map(|j| {
            let freq = (1u64 << j) as f64;
            (freq.powf(-beta), 2.0 * PI * freq, direction(j, dim))
        })
        .collect();
    let signal = GridFunction::from_fn(dim, resolution, |t| {
        terms
            .iter()
            .map(|(amp, w, v)| {
                let phase: f64 = t.iter().zip(v).map(|(a, b)| a * b).sum();
                amp * (w * phase).cos()
            })
            .sum()
    })?;
    Ok(ZooFunction {
        signal,
        name: format!("weierstrass:beta={}:J={levels}", fmt_num(beta)),
        true_regularity: Regularity::Finite(beta),
        is_integer_boundary: is_integer(beta),
    })
}

/// Unit-amplitude 1-periodic triangle wave: `-1` at `t = 0`, `+1` at `t = 1/2`.
pub fn triangle_wave(resolution: usize) -> Result<ZooFunction> {
    if resolution < 4 {
        return Err(Error::invalid(format!(
            "triangle wave needs resolution >= 4, got {resolution}"
        )));
    }
    let signal = GridFunction::from_fn(1, resolution, |t| 1.0 - 4.0 * (t[0] - 0.5).abs())?;
    Ok(ZooFunction {
        signal,
        name: "triangle".into(),
        true_regularity: Regularity::Finite(1.0),
        is_integer_boundary: true,
    })
}

/// `+1` on `[0, 1/2)`, `-1` on `[1/2, 1)`.
pub fn step_function(resolution: usize) -> Result<ZooFunction> {
    let signal = GridFunction::from_fn(1, resolution, |t| if t[0] < 0.5 { 1.0 } else { -1.0 })?;
    Ok(ZooFunction {
        signal,
        name: "step".into(),
        true_regularity: Regularity::None,
        is_integer_boundary: false,
    })
}

/// `cos(2 pi (t_1 + ... + t_d))`.
pub fn cosine(dim: usize, resolution: usize) -> Result<ZooFunction> {
    check_dim(dim)?;
    let signal = GridFunction::from_fn(dim, resolution, |t| (2.0 * PI * t.iter().sum::<f64>()).cos())?;
    Ok(ZooFunction {
        signal,
        name: "cosine".into(),
        true_regularity: Regularity::Infinite,
        is_integer_boundary: false,
    })
}

pub fn zero(dim: usize, resolution: usize) -> Result<ZooFunction> {
    check_dim(dim)?;
    Ok(ZooFunction {
        signal: GridFunction::zeros(dim, resolution)?,
        name: "zero".into(),
        true_regularity: Regularity::Infinite,
        is_integer_boundary: false,
    })
}

pub const ZOO_KEYS: &[&str] = &["weierstrass:beta=<b>[:J=<j>]", "triangle", "step", "cosine", "zero"];

/// Default number of lacunary levels: the largest `J` with
/// `2^J <= resolution / 8`.
pub fn default_levels(resolution: usize) -> u32 {
    (resolution / 8).max(1).ilog2()
}

/// Builds a zoo function from a name such as `"weierstrass:beta=0.5:J=10"`,
/// `"triangle"`, `"step"`, `"cosine"` or `"zero"`.
pub fn zoo_from_name(name: &str, dim: usize, resolution: usize) -> Result<ZooFunction> {
    let unknown = || Error::UnknownName {
        kind: "function",
        name: name.to_string(),
        known: ZOO_KEYS.join(", "),
    };
    let one_dim = |z: Result<ZooFunction>| {
        if dim == 1 {
            z
        } else {
            Err(Error::invalid(format!("'{name}' is only defined for d = 1")))
        }
    };
    let mut parts = name.trim().split(':');
    let head = parts.next().unwrap_or_default();
    let rest: Vec<&str> = parts.collect();
    match (head, rest.is_empty()) {
        ("triangle", true) => one_dim(triangle_wave(resolution)),
        ("step", true) => one_dim(step_function(resolution)),
        ("cosine", true) => cosine(dim, resolution),
        ("zero", true) => zero(dim, resolution),
        ("weierstrass", false) => {
            let (mut beta, mut levels) = (None, None);
            for p in rest {
                match p.split_once('=') {
                    Some(("beta", v)) => beta = Some(v.parse::<f64>().map_err(|_| unknown())?),
                    Some(("J", v)) => levels = Some(v.parse::<u32>().map_err(|_| unknown())?),
                    _ => return Err(unknown()),
                }
            }
            let beta = beta.ok_or_else(unknown)?;
            weierstrass(beta, levels.unwrap_or_else(|| default_levels(resolution)), dim, resolution)
        }
        _ => Err(unknown()),
    }
}

// ---------------------------------------------------------------------------
// Seminorms

/// Offsets scanned at unit scale: the axes, plus both diagonals when `d = 2`.
fn directions(dim: usize) -> Vec<Vec<isize>> {
    let mut dirs: Vec<Vec<isize>> = (0..dim)
        .map(|a| (0..dim).map(|b| isize::from(a == b)).collect())
        .collect();
    if dim == 2 {
        dirs.push(vec![1, 1]);
        dirs.push(vec![1, -1]);
    }
    dirs
}

fn window(f: &GridFunction) -> usize {
    (f.resolution() / 4).max(1)
}

/// Maximum over grid points `x` and offsets `y = k v` (`1 <= k <= M/4`) of
/// `q(x, y) / ||y||^expo`.
fn scan(f: &GridFunction, expo: f64, second_order: bool) -> f64 {
    let m = f.resolution();
    let vals = f.values();
    let mut best: f64 = 0.0;
    for dir in directions(f.dim()) {
        for k in 1..=window(f) {
            let y: Vec<isize> = dir.iter().map(|&c| c * k as isize).collect();
            let fwd = f.shift(&y.iter().map(|c| -c).collect::<Vec<_>>()).expect("shape");
            let scale = (k as f64 / m as f64).powf(-expo);
            let diff = if second_order {
                let back = f.shift(&y).expect("shape");
                vals.iter()
                    .zip(fwd.values())
                    .zip(back.values())
                    .map(|((c, a), b)| (a + b - 2.0 * c).abs())
                    .fold(0.0, f64::max)
            } else {
                vals.iter()
                    .zip(fwd.values())
                    .map(|(c, a)| (a - c).abs())
                    .fold(0.0, f64::max)
            };
            best = best.max(diff * scale);
        }
    }
    best
}

/// `max |f(x) - f(y)| / ||x - y||^beta` over the pair window.
pub fn holder_seminorm(f: &GridFunction, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::invalid(format!("Holder exponent must lie in (0, 1], got {beta}")));
    }
    Ok(scan(f, beta, false))
}

/// `max |f(x + y) + f(x - y) - 2 f(x)| / ||y||` over the pair window.
pub fn zygmund_seminorm(f: &GridFunction) -> f64 {
    scan(f, 1.0, true)
}

/// Central difference `(g(x + e_a) - g(x - e_a)) M / 2` along `axis`.
fn central_difference(g: &GridFunction, axis: usize) -> GridFunction {
    let mut e = vec![0isize; g.dim()];
    e[axis] = 1;
    let fwd = g.shift(&e.iter().map(|c| -c).collect::<Vec<_>>()).expect("shape");
    let back = g.shift(&e).expect("shape");
    let half_m = 0.5 * g.resolution() as f64;
    fwd.zip_with(&back, |a, b| (a - b) * half_m).expect("shape")
}

/// Finite-difference derivatives of total order `m`, one per multi-index.
pub fn derivatives(f: &GridFunction, m: usize) -> Vec<GridFunction> {
    multi_indices(f.dim(), m, m)
        .into_iter()
        .map(|alpha| {
            let mut g = f.clone();
            for (axis, &a) in alpha.iter().enumerate() {
                for _ in 0..a {
                    g = central_difference(&g, axis);
                }
            }
            g
        })
        .collect()
}

fn split_beta(beta: f64) -> (usize, f64) {
    let m = beta.ceil() as usize - 1;
    (m, beta - m as f64)
}

fn derivative_seminorm(f: &GridFunction, beta: f64, zygmund_at_integer: bool) -> Result<f64> {
    let (m, alpha) = split_beta(beta);
    if f.resolution() < 8 * m {
        return Err(Error::invalid(format!(
            "resolution {} too coarse for derivatives of order {m} (need >= {})",
            f.resolution(),
            8 * m
        )));
    }
    let mut best: f64 = 0.0;
    for g in derivatives(f, m) {
        let v = if alpha == 1.0 && zygmund_at_integer {
            zygmund_seminorm(&g)
        } else {
            holder_seminorm(&g, alpha)?
        };
        best = best.max(v);
    }
    Ok(best)
}

/// Holder seminorm of the `m`-th finite-difference derivatives, where
/// `beta = m + alpha` with `alpha` in `(0, 1]`; the Zygmund seminorm is used
/// when `alpha = 1`.
pub fn higher_holder_seminorm(f: &GridFunction, beta: f64) -> Result<f64> {
    if !(beta > 1.0) || !beta.is_finite() {
        return Err(Error::invalid(format!("higher Holder exponent must exceed 1, got {beta}")));
    }
    derivative_seminorm(f, beta, true)
}

/// Seminorm of the Holder space at any `beta > 0`. Integer `beta` uses the
/// Lipschitz seminorm of the `(beta - 1)`-th derivatives.
pub fn holder_class_seminorm(f: &GridFunction, beta: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::invalid(format!("beta must be positive, got {beta}")));
    }
    derivative_seminorm(f, beta, false)
}

/// Seminorm of the Besov space `B^beta_{inf,inf}`: the Holder seminorm at
/// non-integer `beta`, the Zygmund seminorm of the `(beta - 1)`-th
/// derivatives at integer `beta`.
pub fn besov_seminorm(f: &GridFunction, beta: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::invalid(format!("beta must be positive, got {beta}")));
    }
    derivative_seminorm(f, beta, true)
}

// ---------------------------------------------------------------------------
// Refinement stability

/// Growth factor per grid doubling above which a seminorm is called
/// divergent.
pub fn divergence_factor() -> f64 {
    2f64.powf(0.1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementReport {
    pub resolutions: Vec<usize>,
    pub values: Vec<f64>,
    pub divergent: bool,
}

impl RefinementReport {
    pub fn ratios(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

/// True when every consecutive ratio is at least `2^{0.1}`.
pub fn is_divergent(values: &[f64]) -> bool {
    values.len() >= 3
        && values
            .windows(2)
            .all(|w| w[1] >= divergence_factor() * w[0] && w[1] > 0.0)
}

/// Evaluates `seminorm` on the named zoo function at `base`, `2 base` and
/// `4 base` cells per axis. Weierstrass names without an explicit `J` get
/// the default level count of each resolution, so finer grids carry more
/// terms of the series.
pub fn refinement_check(
    name: &str,
    dim: usize,
    base_resolution: usize,
    seminorm: impl Fn(&GridFunction) -> Result<f64>,
) -> Result<RefinementReport> {
    let resolutions = vec![base_resolution, 2 * base_resolution, 4 * base_resolution];
    let values = resolutions
        .iter()
        .map(|&m| seminorm(&zoo_from_name(name, dim, m)?.signal))
        .collect::<Result<Vec<_>>>()?;
    Ok(RefinementReport {
        divergent: is_divergent(&values),
        resolutions,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aliasing_guard() {
        assert!(weierstrass(0.5, 7, 1, 1024).is_ok());
        assert!(matches!(
            weierstrass(0.5, 8, 1, 1024),
            Err(Error::Aliasing { top_frequency: 256, limit: 128 })
        ));
    }

    #[test]
    fn single_term_is_cosine() {
        let w = weierstrass(0.7, 0, 1, 64).unwrap();
        let c = cosine(1, 64).unwrap();
        assert!(w.signal.sup_distance(&c.signal).unwrap() < 1e-15);
        assert_eq!(w.true_regularity, Regularity::Finite(0.7));
    }

    #[test]
    fn integer_boundary_flag() {
        assert!(weierstrass(1.0, 3, 1, 64).unwrap().is_integer_boundary);
        assert!(!weierstrass(1.5, 3, 1, 64).unwrap().is_integer_boundary);
        assert!(triangle_wave(64).unwrap().is_integer_boundary);
    }

    #[test]
    fn registry() {
        let w = zoo_from_name("weierstrass:beta=0.5", 1, 1024).unwrap();
        assert_eq!(w.name, "weierstrass:beta=0.5:J=7");
        assert!(zoo_from_name("weierstrass:beta=0.5:J=3", 2, 64).is_ok());
        assert!(zoo_from_name("triangle", 2, 64).is_err());
        match zoo_from_name("sawtooth", 1, 64) {
            Err(Error::UnknownName { known, .. }) => assert!(known.contains("triangle")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(weierstrass(0.5, 1, 3, 64).is_err());
    }

    #[test]
    fn step_values() {
        let s = step_function(8).unwrap().signal;
        assert_eq!(s.values(), &[1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0]);
        assert_eq!(s.sup_norm(), 1.0);
    }

    #[test]
    fn constant_has_zero_seminorms() {
        let c = GridFunction::from_fn(2, 32, |_| 3.0).unwrap();
        assert_eq!(holder_seminorm(&c, 0.5).unwrap(), 0.0);
        assert_eq!(zygmund_seminorm(&c), 0.0);
    }

    #[test]
    fn exponent_domain() {
        let c = cosine(1, 64).unwrap().signal;
        assert!(holder_seminorm(&c, 0.0).is_err());
        assert!(holder_seminorm(&c, 1.1).is_err());
        assert!(higher_holder_seminorm(&c, 1.0).is_err());
        let coarse = cosine(1, 8).unwrap().signal;
        assert!(higher_holder_seminorm(&coarse, 2.5).is_err());
    }

    #[test]
    fn divergence_rule() {
        assert!(is_divergent(&[1.0, 1.08, 1.17]));
        assert!(!is_divergent(&[1.0, 1.2, 1.21]));
        assert!(!is_divergent(&[1.0, 2.0]));
    }
}
