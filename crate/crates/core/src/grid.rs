//! Samples of a 1-periodic function on a regular grid of `[0,1)^d`.

use crate::error::{Error, Result};

/// Values `f(i/M)` of a 1-periodic function for every multi-index
/// `i in {0..M-1}^d`, stored row-major (axis 0 varies slowest).
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    dim: usize,
    resolution: usize,
    values: Vec<f64>,
}

/// Number of grid points `M^d`, or `None` on overflow.
pub(crate) fn grid_len(dim: usize, resolution: usize) -> Option<usize> {
    let mut len = 1usize;
    for _ in 0..dim {
        len = len.checked_mul(resolution)?;
    }
    Some(len)
}

pub(crate) fn check_shape(dim: usize, resolution: usize) -> Result<usize> {
    if dim < 1 {
        return Err(Error::invalid(format!("dimension must be >= 1, got {dim}")));
    }
    if resolution < 2 {
        return Err(Error::invalid(format!(
            "resolution must be >= 2, got {resolution}"
        )));
    }
    grid_len(dim, resolution)
        .ok_or_else(|| Error::invalid(format!("grid {resolution}^{dim} is too large")))
}

impl GridFunction {
    pub fn new(dim: usize, resolution: usize, values: Vec<f64>) -> Result<Self> {
        let len = check_shape(dim, resolution)?;
        if values.len() != len {
            return Err(Error::invalid(format!(
                "expected {len} values for a {resolution}^{dim} grid, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite value at flat index {i}")));
        }
        Ok(Self {
            dim,
            resolution,
            values,
        })
    }

    pub fn zeros(dim: usize, resolution: usize) -> Result<Self> {
        let len = check_shape(dim, resolution)?;
        Ok(Self {
            dim,
            resolution,
            values: vec![0.0; len],
        })
    }

    /// Samples `f` at the grid points `i/M`.
    pub fn from_fn(dim: usize, resolution: usize, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let len = check_shape(dim, resolution)?;
        let mut point = vec![0.0; dim];
        let mut values = Vec::with_capacity(len);
        for flat in 0..len {
            let mut rem = flat;
            for axis in (0..dim).rev() {
                point[axis] = (rem % resolution) as f64 / resolution as f64;
                rem /= resolution;
            }
            values.push(f(&point));
        }
        Self::new(dim, resolution, values)
    }

    /// Internal constructor for buffers produced by convolution; skips the
    /// finiteness scan.
    pub(crate) fn from_raw(dim: usize, resolution: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(Some(values.len()), grid_len(dim, resolution));
        Self {
            dim,
            resolution,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Grid spacing `1/M`.
    pub fn spacing(&self) -> f64 {
        1.0 / self.resolution as f64
    }

    pub fn same_shape(&self, other: &GridFunction) -> bool {
        self.dim == other.dim && self.resolution == other.resolution
    }

    fn require_same_shape(&self, other: &GridFunction) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::ResolutionMismatch {
                expected: format!("{}^{}", self.resolution, self.dim),
                actual: format!("{}^{}", other.resolution, other.dim),
            })
        }
    }

    /// Value at a multi-index, taken modulo `M` on every axis.
    pub fn at(&self, index: &[isize]) -> f64 {
        self.values[self.flat_index(index)]
    }

    pub(crate) fn flat_index(&self, index: &[isize]) -> usize {
        debug_assert_eq!(index.len(), self.dim);
        let m = self.resolution as isize;
        index
            .iter()
            .fold(0usize, |acc, &i| acc * self.resolution + i.rem_euclid(m) as usize)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction::from_raw(
            self.dim,
            self.resolution,
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn scale(&self, alpha: f64) -> GridFunction {
        self.map(|v| alpha * v)
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn zip_with(
        &self,
        other: &GridFunction,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<GridFunction> {
        self.require_same_shape(other)?;
        Ok(GridFunction::from_raw(
            self.dim,
            self.resolution,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    /// Cyclic shift: the result satisfies `out[i + k] = self[i]`.
    pub fn shift(&self, k: &[isize]) -> Result<GridFunction> {
        if k.len() != self.dim {
            return Err(Error::invalid(format!(
                "shift has {} components for a {}-dimensional grid",
                k.len(),
                self.dim
            )));
        }
        let mut out = vec![0.0; self.values.len()];
        let mut index = vec![0isize; self.dim];
        for (flat, &v) in self.values.iter().enumerate() {
            let mut rem = flat;
            for axis in (0..self.dim).rev() {
                index[axis] = (rem % self.resolution) as isize + k[axis];
                rem /= self.resolution;
            }
            out[self.flat_index(&index)] = v;
        }
        Ok(GridFunction::from_raw(self.dim, self.resolution, out))
    }

    /// `max_i |g(i/M)|`, the grid surrogate of the essential supremum.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `max_i |self_i - other_i|` without allocating the difference.
    pub fn sup_distance(&self, other: &GridFunction) -> Result<f64> {
        self.require_same_shape(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Samples along axis 0 with every other coordinate index fixed to zero.
    pub fn axis_line(&self) -> Vec<f64> {
        let stride = self.values.len() / self.resolution;
        (0..self.resolution).map(|i| self.values[i * stride]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(GridFunction::zeros(0, 8).is_err());
        assert!(GridFunction::zeros(1, 1).is_err());
        assert!(GridFunction::new(1, 4, vec![0.0; 3]).is_err());
        assert!(GridFunction::new(1, 2, vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn from_fn_samples_grid_points() {
        let g = GridFunction::from_fn(2, 4, |x| x[0] + 10.0 * x[1]).unwrap();
        assert_eq!(g.len(), 16);
        assert_eq!(g.at(&[1, 2]), 0.25 + 10.0 * 0.5);
        // Periodic indexing.
        assert_eq!(g.at(&[5, -2]), g.at(&[1, 2]));
    }

    #[test]
    fn shift_is_cyclic() {
        let g = GridFunction::new(1, 4, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let s = g.shift(&[1]).unwrap();
        assert_eq!(s.values(), &[4.0, 1.0, 2.0, 3.0]);
        assert_eq!(g.shift(&[-3]).unwrap(), s);
    }

    #[test]
    fn sup_norm_of_cosine_hits_one() {
        let g = GridFunction::from_fn(1, 64, |x| (2.0 * std::f64::consts::PI * x[0]).cos())
            .unwrap();
        assert_eq!(g.sup_norm(), 1.0);
        assert_eq!(GridFunction::zeros(2, 8).unwrap().sup_norm(), 0.0);
    }
}
