//! Circular convolution of grid data with a rescaled kernel `K_h`.
//!
//! The kernel is discretized as cell averages: the weight attached to grid
//! offset `k` is `int_{cell k} K_h(x) dx`, evaluated with a sub-cell midpoint
//! rule and renormalized so the weights carry the kernel's mass exactly. The
//! same weights serve the deterministic smooth `K_h * f` and the stochastic
//! integral against white-noise increments, so the estimate's expectation is
//! exactly the smooth of `f`.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::kernels::Kernel;

/// Grid cells per axis per bandwidth below which the discretization of `K_h`
/// is considered too coarse.
pub const MIN_CELLS_PER_BANDWIDTH: usize = 16;

/// Window size (number of weights) above which [`ConvolutionMethod::Auto`]
/// switches to the transform path.
const DIRECT_WINDOW_LIMIT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvolutionMethod {
    /// Circular summation over the kernel window; the reference path.
    Direct,
    /// Multiplication in the discrete Fourier domain.
    Fft,
    Auto,
}

/// Cell-averaged weights `w_k` for offsets `k in [-W, W]^d`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelWeights {
    dim: usize,
    resolution: usize,
    half_width: usize,
    weights: Vec<f64>,
}

fn sub_nodes(dim: usize) -> usize {
    match dim {
        1 => 32,
        2 => 8,
        _ => 4,
    }
}

/// Checks `M h >= 16` and that the scaled support does not wrap the period.
pub fn check_bandwidth(kernel: &Kernel, h: f64, resolution: usize) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::invalid(format!("bandwidth must be positive, got {h}")));
    }
    let cells = resolution as f64 * h;
    if cells < MIN_CELLS_PER_BANDWIDTH as f64 {
        return Err(Error::UnderResolvedBandwidth {
            cells_per_bandwidth: cells,
            required: MIN_CELLS_PER_BANDWIDTH,
        });
    }
    if 2.0 * kernel.support_radius() * h >= 1.0 {
        return Err(Error::KernelWraparound {
            support_radius: kernel.support_radius(),
            h,
        });
    }
    Ok(())
}

impl KernelWeights {
    pub fn new(kernel: &Kernel, h: f64, resolution: usize) -> Result<Self> {
        check_bandwidth(kernel, h, resolution)?;
        let dim = kernel.dim();
        let cells = resolution as f64 * h;
        let half_width = (kernel.support_radius() * cells + 0.5).ceil() as usize;
        if 2 * half_width + 1 > resolution {
            return Err(Error::KernelWraparound {
                support_radius: kernel.support_radius(),
                h,
            });
        }
        let side = 2 * half_width + 1;
        let len = side.pow(dim as u32);
        let s = sub_nodes(dim);
        let sub_count = s.pow(dim as u32);
        // Cell average of K(x / h) / h^d, times the cell volume M^{-d}.
        let scale = (cells.powi(dim as i32) * sub_count as f64).recip();

        let mut weights = Vec::with_capacity(len);
        let mut x = vec![0.0; dim];
        for flat in 0..len {
            let mut offset = vec![0isize; dim];
            let mut rem = flat;
            for axis in (0..dim).rev() {
                offset[axis] = (rem % side) as isize - half_width as isize;
                rem /= side;
            }
            let mut acc = 0.0;
            for sub in 0..sub_count {
                let mut r = sub;
                for axis in (0..dim).rev() {
                    let frac = ((r % s) as f64 + 0.5) / s as f64 - 0.5;
                    r /= s;
                    x[axis] = (offset[axis] as f64 + frac) / cells;
                }
                acc += kernel.evaluate(&x);
            }
            weights.push(acc * scale);
        }

        let discrete_mass: f64 = weights.iter().sum();
        if discrete_mass.abs() > 1e-12 {
            let mass = kernel.integral();
            let factor = mass / discrete_mass;
            weights.iter_mut().for_each(|w| *w *= factor);
        }
        Ok(Self {
            dim,
            resolution,
            half_width,
            weights,
        })
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `sum_k w_k^2 * M^d`: the discrete analogue of `h^{-d} ||K||_2^2`.
    pub fn energy(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>() * (self.resolution as f64).powi(self.dim as i32)
    }
}

/// A reusable convolution operator for one `(kernel, h, M)` triple.
#[derive(Clone)]
pub struct ConvolutionPlan {
    weights: KernelWeights,
    method: ConvolutionMethod,
    transform: Option<Transform>,
}

#[derive(Clone)]
struct Transform {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    kernel_spectrum: Vec<Complex64>,
}

impl std::fmt::Debug for ConvolutionPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConvolutionPlan")
            .field("half_width", &self.weights.half_width)
            .field("method", &self.method)
            .finish()
    }
}

impl ConvolutionPlan {
    pub fn new(
        kernel: &Kernel,
        h: f64,
        resolution: usize,
        method: ConvolutionMethod,
    ) -> Result<Self> {
        let weights = KernelWeights::new(kernel, h, resolution)?;
        let method = match method {
            ConvolutionMethod::Auto if weights.weights.len() <= DIRECT_WINDOW_LIMIT => {
                ConvolutionMethod::Direct
            }
            ConvolutionMethod::Auto => ConvolutionMethod::Fft,
            m => m,
        };
        let transform = (method == ConvolutionMethod::Fft).then(|| Transform::new(&weights));
        Ok(Self {
            weights,
            method,
            transform,
        })
    }

    pub fn method(&self) -> ConvolutionMethod {
        self.method
    }

    pub fn weights(&self) -> &KernelWeights {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.dim
    }

    pub fn resolution(&self) -> usize {
        self.weights.resolution
    }

    /// `out[i] = sum_k w_k * input[i - k]`, indices modulo `M`.
    pub fn apply(&self, input: &[f64]) -> Vec<f64> {
        match &self.transform {
            Some(t) => t.convolve(input, &self.weights),
            None => direct(input, &self.weights),
        }
    }
}

fn direct(input: &[f64], w: &KernelWeights) -> Vec<f64> {
    let m = w.resolution;
    let hw = w.half_width as isize;
    let side = 2 * w.half_width + 1;
    debug_assert_eq!(input.len(), m.pow(w.dim as u32));
    if w.dim == 1 {
        let mi = m as isize;
        return (0..m)
            .map(|i| {
                w.weights
                    .iter()
                    .enumerate()
                    .map(|(j, wk)| {
                        let src = (i as isize - (j as isize - hw)).rem_euclid(mi) as usize;
                        wk * input[src]
                    })
                    .sum()
            })
            .collect();
    }
    let dim = w.dim;
    let mut out = vec![0.0; input.len()];
    let mut idx = vec![0isize; dim];
    let mut off = vec![0isize; dim];
    for (flat, slot) in out.iter_mut().enumerate() {
        let mut rem = flat;
        for axis in (0..dim).rev() {
            idx[axis] = (rem % m) as isize;
            rem /= m;
        }
        let mut acc = 0.0;
        for (wflat, wk) in w.weights.iter().enumerate() {
            let mut r = wflat;
            for axis in (0..dim).rev() {
                off[axis] = (r % side) as isize - hw;
                r /= side;
            }
            let src = (0..dim).fold(0usize, |a, axis| {
                a * m + (idx[axis] - off[axis]).rem_euclid(m as isize) as usize
            });
            acc += wk * input[src];
        }
        *slot = acc;
    }
    out
}

impl Transform {
    fn new(w: &KernelWeights) -> Self {
        let m = w.resolution;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);
        let len = m.pow(w.dim as u32);
        let side = 2 * w.half_width + 1;
        let hw = w.half_width as isize;
        let mut embedded = vec![Complex64::new(0.0, 0.0); len];
        for (wflat, wk) in w.weights.iter().enumerate() {
            let mut r = wflat;
            let mut pos = 0usize;
            let mut stride = 1usize;
            for _axis in (0..w.dim).rev() {
                let k = (r % side) as isize - hw;
                r /= side;
                pos += k.rem_euclid(m as isize) as usize * stride;
                stride *= m;
            }
            embedded[pos].re += wk;
        }
        fft_nd(&mut embedded, w.dim, m, forward.as_ref());
        Self {
            forward,
            inverse,
            kernel_spectrum: embedded,
        }
    }

    fn convolve(&self, input: &[f64], w: &KernelWeights) -> Vec<f64> {
        let m = w.resolution;
        let mut buf: Vec<Complex64> = input.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_nd(&mut buf, w.dim, m, self.forward.as_ref());
        for (b, k) in buf.iter_mut().zip(&self.kernel_spectrum) {
            *b *= k;
        }
        fft_nd(&mut buf, w.dim, m, self.inverse.as_ref());
        let norm = (buf.len() as f64).recip();
        buf.iter().map(|c| c.re * norm).collect()
    }
}

/// In-place d-dimensional transform, one axis at a time.
fn fft_nd(data: &mut [Complex64], dim: usize, m: usize, fft: &dyn Fft<f64>) {
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    // Last axis is contiguous.
    fft.process_with_scratch(data, &mut scratch);
    if dim == 1 {
        return;
    }
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    let mut stride = m;
    for _axis in (0..dim - 1).rev() {
        let block = stride * m;
        for outer in (0..data.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + j * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, v) in line.iter().enumerate() {
                    data[base + j * stride] = *v;
                }
            }
        }
        stride = block;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{box_kernel, higher_order_kernel, poly_kernel};

    fn signal(len: usize) -> Vec<f64> {
        (0..len).map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0).collect()
    }

    #[test]
    fn weights_carry_unit_mass() {
        for k in [
            box_kernel(1).unwrap(),
            poly_kernel(2.0, 1, 1).unwrap(),
            higher_order_kernel(3, 1).unwrap(),
        ] {
            let w = KernelWeights::new(&k, 0.1, 512).unwrap();
            let s: f64 = w.weights().iter().sum();
            assert!((s - 1.0).abs() < 1e-9, "{}", k.name());
        }
    }

    #[test]
    fn under_resolved_and_wraparound() {
        let k = box_kernel(1).unwrap();
        assert!(matches!(
            KernelWeights::new(&k, 1.0 / 64.0, 512),
            Err(Error::UnderResolvedBandwidth { .. })
        ));
        let wide = higher_order_kernel(2, 1).unwrap();
        assert!(matches!(
            KernelWeights::new(&wide, 0.5, 512),
            Err(Error::KernelWraparound { .. })
        ));
    }

    #[test]
    fn fft_matches_direct_1d() {
        let k = higher_order_kernel(3, 1).unwrap();
        let x = signal(1024);
        let d = ConvolutionPlan::new(&k, 0.05, 1024, ConvolutionMethod::Direct).unwrap();
        let f = ConvolutionPlan::new(&k, 0.05, 1024, ConvolutionMethod::Fft).unwrap();
        let (a, b) = (d.apply(&x), f.apply(&x));
        let err = a.iter().zip(&b).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        assert!(err < 1e-12, "err={err}");
    }

    #[test]
    fn fft_matches_direct_2d() {
        let k = poly_kernel(2.0, 1, 2).unwrap();
        let x = signal(64 * 64);
        let d = ConvolutionPlan::new(&k, 0.3, 64, ConvolutionMethod::Direct).unwrap();
        let f = ConvolutionPlan::new(&k, 0.3, 64, ConvolutionMethod::Fft).unwrap();
        let (a, b) = (d.apply(&x), f.apply(&x));
        let err = a.iter().zip(&b).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        assert!(err < 1e-12, "err={err}");
    }

    #[test]
    fn box_energy_close_to_norm() {
        let k = box_kernel(1).unwrap();
        let h = 1.0 / 64.0;
        let w = KernelWeights::new(&k, h, 1 << 12).unwrap();
        let e = w.energy() * h;
        assert!((e - 1.0).abs() < 0.02, "e={e}");
    }
}
