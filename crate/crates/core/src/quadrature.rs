//! Composite midpoint quadrature on axis-aligned boxes.

/// Default nodes per axis: `2^16` in one dimension, `2^9` per axis in two,
/// and `2^6` per axis beyond.
pub fn default_nodes(dim: usize) -> usize {
    match dim {
        1 => 1 << 16,
        2 => 1 << 9,
        _ => 1 << 6,
    }
}

/// Midpoint rule for `int_{[lo,hi]} f` with `nodes` cells per axis.
pub fn midpoint_box(lo: &[f64], hi: &[f64], nodes: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
    let dim = lo.len();
    debug_assert_eq!(dim, hi.len());
    let step: Vec<f64> = lo
        .iter()
        .zip(hi)
        .map(|(a, b)| (b - a) / nodes as f64)
        .collect();
    let cell: f64 = step.iter().product();
    let mut counter = vec![0usize; dim];
    let mut x = vec![0.0; dim];
    let mut sum = 0.0;
    loop {
        for axis in 0..dim {
            x[axis] = lo[axis] + (counter[axis] as f64 + 0.5) * step[axis];
        }
        sum += f(&x);
        // Odometer increment, last axis fastest.
        let mut axis = dim;
        loop {
            if axis == 0 {
                return sum * cell;
            }
            axis -= 1;
            counter[axis] += 1;
            if counter[axis] < nodes {
                break;
            }
            counter[axis] = 0;
        }
    }
}

/// Midpoint rule over the cube `[-radius, radius]^dim`.
pub fn midpoint_cube(dim: usize, radius: f64, nodes: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
    midpoint_box(&vec![-radius; dim], &vec![radius; dim], nodes, f)
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
