//! `L^p` norms of lattice-supported exponential sums by DFT over one period.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Default grid budget: `256³` points.
pub const DEFAULT_BUDGET: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormOptions {
    pub oversample: usize,
    /// Largest admissible number of grid points.
    pub budget: usize,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self {
            oversample: 2,
            budget: DEFAULT_BUDGET,
        }
    }
}

/// Smallest integer `≥ n` whose prime factors are 2, 3 and 5.
pub fn fast_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for f in [2, 3, 5] {
            while r.is_multiple_of(f) {
                r /= f;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// `p` is an even integer, so `|f|^p` is a trigonometric polynomial.
pub fn is_even_integer(p: f64) -> bool {
    p.fract() == 0.0 && (p as i64) % 2 == 0 && p > 0.0
}

/// Per-axis DFT size for index extent `e` (max − min).
///
/// Axes with zero extent get size 1. For even `p` the size is at least
/// `(p/2)·e + 1`, which makes the periodic mean of `|f|^p` exact.
pub fn grid_size(e: usize, p: f64, oversample: usize) -> usize {
    if e == 0 {
        return 1;
    }
    let mut m = oversample * (e + 1);
    if is_even_integer(p) {
        m = m.max((p as usize / 2) * e + 1);
    }
    fast_size(m)
}

/// Bounding box `(min, extent)` of a set of lattice indices.
pub fn index_bounds(indices: &[[i64; 3]]) -> ([i64; 3], [usize; 3]) {
    let mut lo = [i64::MAX; 3];
    let mut hi = [i64::MIN; 3];
    for m in indices {
        for a in 0..3 {
            lo[a] = lo[a].min(m[a]);
            hi[a] = hi[a].max(m[a]);
        }
    }
    if indices.is_empty() {
        return ([0; 3], [0; 3]);
    }
    (lo, [0, 1, 2].map(|a| (hi[a] - lo[a]) as usize))
}

/// Grid dimensions for a point set, checked against the budget.
pub fn grid_dims(indices: &[[i64; 3]], p: f64, opts: &NormOptions) -> Result<[usize; 3]> {
    let (_, ext) = index_bounds(indices);
    let dims = ext.map(|e| grid_size(e, p, opts.oversample));
    let points = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .unwrap_or(usize::MAX);
    if points > opts.budget {
        return Err(Error::MemoryBudget {
            points,
            budget: opts.budget,
        });
    }
    Ok(dims)
}

fn check_args(p: f64, opts: &NormOptions) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!("p = {p} must be >= 1")));
    }
    if opts.oversample < 2 {
        return Err(Error::InvalidArgument("oversample must be >= 2".into()));
    }
    Ok(())
}

/// `(mean |f|^p)^{1/p}` over one period of `f(x) = Σ a_m e(h m·x)`, on a grid
/// sized for this point set.
pub fn lp_norm_points(indices: &[[i64; 3]], coeffs: &[Complex64], p: f64, opts: &NormOptions) -> Result<f64> {
    check_args(p, opts)?;
    let dims = grid_dims(indices, p, opts)?;
    lp_norm_on_grid(indices, coeffs, p, dims)
}

/// As [`lp_norm_points`] on a caller-chosen grid, which must cover the index extent.
pub fn lp_norm_on_grid(indices: &[[i64; 3]], coeffs: &[Complex64], p: f64, dims: [usize; 3]) -> Result<f64> {
    if indices.len() != coeffs.len() {
        return Err(Error::InvalidArgument(
            "indices and coefficients differ in length".into(),
        ));
    }
    if indices.is_empty() {
        return Ok(0.0);
    }
    let (lo, ext) = index_bounds(indices);
    for a in 0..3 {
        if ext[a] >= dims[a] {
            return Err(Error::InvalidArgument(format!(
                "grid axis {a} too small for extent {}",
                ext[a]
            )));
        }
    }
    if indices.len() == 1 {
        return Ok(coeffs[0].norm());
    }
    let [m0, m1, m2] = dims;
    let mut grid = vec![Complex64::new(0.0, 0.0); m0 * m1 * m2];
    for (m, c) in indices.iter().zip(coeffs) {
        let i = [0, 1, 2].map(|a| (m[a] - lo[a]) as usize);
        grid[(i[0] * m1 + i[1]) * m2 + i[2]] += c;
    }
    inverse_fft_3d(&mut grid, dims);
    // partial sums are added in chunk order so the result does not depend on scheduling
    let partials: Vec<f64> = grid
        .par_chunks(m2.max(1024))
        .map(|chunk| chunk.iter().map(|z| pow_abs(*z, p)).sum::<f64>())
        .collect();
    let sum: f64 = partials.iter().sum();
    Ok((sum / grid.len() as f64).powf(1.0 / p))
}

fn pow_abs(z: Complex64, p: f64) -> f64 {
    let a2 = z.norm_sqr();
    if p == 2.0 {
        a2
    } else if p == 4.0 {
        a2 * a2
    } else if p == 6.0 {
        a2 * a2 * a2
    } else {
        a2.powf(0.5 * p)
    }
}

fn plan(planner: &mut FftPlanner<f64>, n: usize) -> Arc<dyn Fft<f64>> {
    planner.plan_fft_inverse(n)
}

/// Unnormalized inverse DFT along every axis of a row-major `[m0][m1][m2]` array.
pub fn inverse_fft_3d(data: &mut [Complex64], dims: [usize; 3]) {
    let [m0, m1, m2] = dims;
    let mut planner = FftPlanner::new();
    if m2 > 1 {
        let f = plan(&mut planner, m2);
        data.par_chunks_mut(m2 * 64).for_each(|c| f.process(c));
    }
    if m1 > 1 {
        let f = plan(&mut planner, m1);
        data.par_chunks_mut(m1 * m2).for_each(|plane| {
            let mut line = vec![Complex64::new(0.0, 0.0); m1];
            let mut scratch = vec![Complex64::new(0.0, 0.0); f.get_inplace_scratch_len()];
            for j in 0..m2 {
                for i in 0..m1 {
                    line[i] = plane[i * m2 + j];
                }
                f.process_with_scratch(&mut line, &mut scratch);
                for i in 0..m1 {
                    plane[i * m2 + j] = line[i];
                }
            }
        });
    }
    if m0 > 1 {
        let f = plan(&mut planner, m0);
        let stride = m1 * m2;
        // columns along axis 0, processed in blocks of adjacent columns
        const BLOCK: usize = 64;
        let blocks: Vec<(usize, Vec<Complex64>)> = (0..stride.div_ceil(BLOCK))
            .into_par_iter()
            .map(|b| {
                let start = b * BLOCK;
                let width = BLOCK.min(stride - start);
                let mut buf = vec![Complex64::new(0.0, 0.0); width * m0];
                let mut scratch = vec![Complex64::new(0.0, 0.0); f.get_inplace_scratch_len()];
                for c in 0..width {
                    let col = &mut buf[c * m0..(c + 1) * m0];
                    for i in 0..m0 {
                        col[i] = data[i * stride + start + c];
                    }
                    f.process_with_scratch(col, &mut scratch);
                }
                (start, buf)
            })
            .collect();
        for (start, buf) in blocks {
            let width = buf.len() / m0;
            for c in 0..width {
                for i in 0..m0 {
                    data[i * stride + start + c] = buf[c * m0 + i];
                }
            }
        }
    }
}
