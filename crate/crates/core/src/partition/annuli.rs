//! Dyadic annuli `U_k` around a degenerate circle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::Interval;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// A piece not split around a circle (nondegenerate rows, plates).
    Full,
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub side: Side,
    pub k: u32,
    /// `s_k = 2^k s_0`.
    pub s: f64,
    /// Half-open radial interval `[lo, hi)`.
    pub radial: Interval,
    /// True when the annulus was cut short by the interval half-width.
    pub truncated: bool,
}

/// `i`-th of `m + 1` equally spaced points of `[a, b]`, exact at both ends.
pub fn split(a: f64, b: f64, m: usize, i: usize) -> f64 {
    if i == 0 {
        a
    } else if i >= m {
        b
    } else {
        a + (b - a) * i as f64 / m as f64
    }
}

/// `⌈x⌉` tolerant to rounding just above an integer.
pub(crate) fn ceil_count(x: f64) -> usize {
    ((x - 1e-9).ceil() as usize).max(1)
}

/// Annuli around `r0 = 1`; see [`dyadic_annuli_at`].
pub fn dyadic_annuli(n: u32, delta: f64, half_width: f64) -> Result<Vec<Annulus>> {
    dyadic_annuli_at(1.0, n, delta, half_width)
}

/// Right and left dyadic annuli covering `[r0 − Δ, r0 + Δ)`.
///
/// With `s_0 = δ^{1/n}`, `U_0 = [r0, r0 + s_0)` and
/// `U_k = [r0 + s_{k−1}, r0 + s_k)` for `k = 1..=K`, `K = ⌈log2(Δ/s_0)⌉`,
/// the last one cut at `r0 + Δ`. Left annuli are the mirror images.
/// Left annuli come first, each side ordered by `k`.
pub fn dyadic_annuli_at(r0: f64, n: u32, delta: f64, half_width: f64) -> Result<Vec<Annulus>> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta {delta} must lie in (0,1)")));
    }
    if n == 0 || !(half_width > 0.0) {
        return Err(Error::InvalidArgument("annuli need n >= 1 and Δ > 0".into()));
    }
    let s0 = delta.powf(1.0 / n as f64);
    let kmax = if s0 >= half_width {
        0
    } else {
        (half_width / s0).log2().ceil().max(0.0) as u32
    };
    let mut right = Vec::with_capacity(kmax as usize + 1);
    let mut left = Vec::with_capacity(kmax as usize + 1);
    for k in 0..=kmax {
        let s = s0 * f64::powi(2.0, k as i32);
        let inner = if k == 0 { 0.0 } else { 0.5 * s };
        if inner >= half_width {
            break;
        }
        let truncated = s > half_width;
        let outer_r = if s >= half_width { r0 + half_width } else { r0 + s };
        let outer_l = if s >= half_width { r0 - half_width } else { r0 - s };
        right.push(Annulus {
            side: Side::Right,
            k,
            s,
            radial: Interval::new(r0 + inner, outer_r),
            truncated,
        });
        left.push(Annulus {
            side: Side::Left,
            k,
            s,
            radial: Interval::new(outer_l, r0 - inner),
            truncated,
        });
    }
    if kmax == 0 && s0 >= half_width {
        log::debug!("s_0 = {s0} >= Δ = {half_width}: single truncated annulus per side");
    }
    left.extend(right);
    Ok(left)
}
