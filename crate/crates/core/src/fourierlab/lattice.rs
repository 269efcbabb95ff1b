//! Frequency lattices `h·Z^d` clipped to `N_δ` of a support set, with every
//! point assigned to the piece of a partition that owns it.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::{FootprintIndex, PartitionManifest};
use crate::profile::Profile;

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyLattice {
    pub spacing: f64,
    pub delta: f64,
    /// Ambient dimension, 2 or 3. In 2-D the last index is always 0.
    pub dim: usize,
    pub indices: Vec<[i64; 3]>,
    /// Owning piece for every point.
    pub box_of: Vec<u32>,
    /// Distance from every point to the underlying curve or surface.
    pub dist: Vec<f64>,
}

impl FrequencyLattice {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn point(&self, i: usize) -> [f64; 3] {
        self.indices[i].map(|m| m as f64 * self.spacing)
    }

    /// Point indices grouped by owning piece, pieces in increasing order.
    pub fn groups(&self) -> Vec<(u32, Vec<usize>)> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&i| (self.box_of[i], i));
        let mut out: Vec<(u32, Vec<usize>)> = Vec::new();
        for i in order {
            match out.last_mut() {
                Some((b, v)) if *b == self.box_of[i] => v.push(i),
                _ => out.push((self.box_of[i], vec![i])),
            }
        }
        out
    }

    pub fn num_boxes(&self) -> usize {
        self.groups().len()
    }
}

/// Parameter window `[α1, α2) × [r1, r2)` of a revolution surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub alpha: [f64; 2],
    pub r: [f64; 2],
}

impl Window {
    pub fn full(p: &Profile) -> Self {
        let d = p.domain();
        Self {
            alpha: [0.0, TAU],
            r: [d.lo, d.hi],
        }
    }

    pub fn contains(&self, alpha: f64, r: f64) -> bool {
        alpha >= self.alpha[0] && alpha < self.alpha[1] && r >= self.r[0] && r < self.r[1]
    }

    fn validate(&self, p: &Profile) -> Result<()> {
        let d = p.domain();
        let ok = 0.0 <= self.alpha[0]
            && self.alpha[0] < self.alpha[1]
            && self.alpha[1] <= TAU
            && d.lo <= self.r[0]
            && self.r[0] < self.r[1]
            && self.r[1] <= d.hi;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "window {self:?} must lie inside [0,2π) × the profile domain"
            )))
        }
    }
}

fn check_spacing(spacing: f64, delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta {delta} must lie in (0,1)")));
    }
    if !(spacing > 0.0) || spacing > delta {
        return Err(Error::InvalidArgument(format!(
            "lattice spacing {spacing} must lie in (0, delta = {delta}]"
        )));
    }
    Ok(())
}

/// Lattice on `N_δ` of the segment `[0,1] × {0}` in the plane, cut into `n`
/// tubes of length `1/n` (the last one closed).
pub fn discretize_segment(n: usize, delta: f64, spacing: f64) -> Result<FrequencyLattice> {
    check_spacing(spacing, delta)?;
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one tube".into()));
    }
    let m1 = (1.0 / spacing + 1e-9).floor() as i64;
    let m2 = (delta / spacing + 1e-9).floor() as i64;
    let mut lat = FrequencyLattice {
        spacing,
        delta,
        dim: 2,
        indices: Vec::new(),
        box_of: Vec::new(),
        dist: Vec::new(),
    };
    for i in 0..=m1 {
        let x = i as f64 * spacing;
        let tube = ((x * n as f64).floor() as usize).min(n - 1);
        for j in -m2..=m2 {
            lat.indices.push([i, j, 0]);
            lat.box_of.push(tube as u32);
            lat.dist.push((j as f64 * spacing).abs());
        }
    }
    if lat.is_empty() {
        return Err(Error::ResolutionTooCoarse("segment lattice is empty".into()));
    }
    Ok(lat)
}

/// Nearest point of the profile curve to `(ρ, z)` among `r ∈ [a, b]`:
/// safeguarded Newton on `(r − ρ) + (γ(r) − z)γ'(r)`. Returns `(r*, distance)`.
pub fn nearest_on_profile(p: &Profile, rho: f64, z: f64, a: f64, b: f64) -> (f64, f64) {
    let d2 = |r: f64| {
        let g = p.eval2(r)[0];
        (r - rho).powi(2) + (g - z).powi(2)
    };
    let grad = |r: f64| {
        let [g, g1, g2] = p.eval2(r);
        ((r - rho) + (g - z) * g1, 1.0 + g1 * g1 + (g - z) * g2)
    };
    let (ga, _) = grad(a);
    let (gb, _) = grad(b);
    let best_end = if d2(a) <= d2(b) { a } else { b };
    if !(ga < 0.0 && gb > 0.0) {
        return (best_end, d2(best_end).sqrt());
    }
    let (mut lo, mut hi) = (a, b);
    let mut r = rho.clamp(a, b);
    for _ in 0..60 {
        let (g, dg) = grad(r);
        if g < 0.0 {
            lo = r;
        } else {
            hi = r;
        }
        let mut next = if dg > 0.0 { r - g / dg } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - r).abs() <= 1e-15 * (1.0 + r.abs()) {
            r = next;
            break;
        }
        r = next;
    }
    let d = d2(r).min(d2(best_end));
    if d2(best_end) < d2(r) {
        (best_end, d.sqrt())
    } else {
        (r, d.sqrt())
    }
}

/// Lattice on `N_δ` of the revolution surface over `window`, each point
/// owned by the manifest box whose footprint contains its nearest surface point.
pub fn discretize_revolution(
    p: &Profile,
    manifest: &PartitionManifest,
    window: &Window,
    spacing: f64,
    meridian_only: bool,
) -> Result<FrequencyLattice> {
    let delta = manifest.delta;
    check_spacing(spacing, delta)?;
    window.validate(p)?;
    let index = FootprintIndex::new(manifest);

    // bounding box of the window patch, padded by δ
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    let samples = 129;
    for i in 0..samples {
        let a = window.alpha[0] + (window.alpha[1] - window.alpha[0]) * i as f64 / (samples - 1) as f64;
        for j in 0..samples {
            let r = window.r[0] + (window.r[1] - window.r[0]) * j as f64 / (samples - 1) as f64;
            let x = [r * a.cos(), r * a.sin(), p.eval2(r)[0]];
            for k in 0..3 {
                lo[k] = lo[k].min(x[k]);
                hi[k] = hi[k].max(x[k]);
            }
        }
    }
    let pad = delta + spacing;
    let lo_i = lo.map(|v| ((v - pad) / spacing).floor() as i64);
    let hi_i = hi.map(|v| ((v + pad) / spacing).ceil() as i64);
    let (j_lo, j_hi) = if meridian_only { (0, 0) } else { (lo_i[1], hi_i[1]) };
    let dom = p.domain();
    let rows: Vec<Vec<([i64; 3], u32, f64)>> = {
        use rayon::prelude::*;
        (lo_i[0]..=hi_i[0])
            .into_par_iter()
            .map(|i| {
                let mut out = Vec::new();
                for j in j_lo..=j_hi {
                    let (x, y) = (i as f64 * spacing, j as f64 * spacing);
                    let rho = x.hypot(y);
                    let alpha = y.atan2(x).rem_euclid(TAU);
                    let a = (rho - 1.01 * delta).max(dom.lo);
                    let b = (rho + 1.01 * delta).min(dom.hi);
                    if a >= b {
                        continue;
                    }
                    for k in lo_i[2]..=hi_i[2] {
                        let z = k as f64 * spacing;
                        let (r, d) = nearest_on_profile(p, rho, z, a, b);
                        if d > delta || !window.contains(alpha, r) {
                            continue;
                        }
                        match index.locate(alpha, r) {
                            Some(bx) => out.push(([i, j, k], bx as u32, d)),
                            None => continue,
                        }
                    }
                }
                out
            })
            .collect()
    };
    let mut lat = FrequencyLattice {
        spacing,
        delta,
        dim: 3,
        indices: Vec::new(),
        box_of: Vec::new(),
        dist: Vec::new(),
    };
    for (m, b, d) in rows.into_iter().flatten() {
        lat.indices.push(m);
        lat.box_of.push(b);
        lat.dist.push(d);
    }
    if lat.is_empty() {
        return Err(Error::ResolutionTooCoarse(format!(
            "no lattice point of spacing {spacing} within delta {delta} of the window"
        )));
    }
    Ok(lat)
}
