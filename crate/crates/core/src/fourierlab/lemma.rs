//! Numerical checks of the rescaled perturbed-cone graph.
//!
//! In rotated coordinates `ξ2 = ξ2' − ξ3'`, `ξ3 = ξ2' + ξ3'` the surface near a
//! perturbed-cone circle at `r0` is the graph `ξ3' = ψ(ξ1', ξ2')`, where
//! `ψ = ξ1'²/(4ξ2') + φ` and `φ` is small. With `s = s_k` the rescaled graph is
//! `ψ_k(η) = ψ(s^{n/2} η1, s η2 + r0) / s^n` on `|η1| ≤ 1/2`, `η2 ∈ [1/2, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::dyadic_annuli_at;
use crate::profile::Profile;
use crate::structure::{analyze_structure, DegeneracyCase};

/// Fixed-point tolerance for `ψ`.
pub const PSI_TOL: f64 = 1e-12;

/// The implicit graph function `ψ` of a profile about `r0`.
#[derive(Debug, Clone)]
pub struct ImplicitGraph<'a> {
    pub profile: &'a Profile,
    pub r0: f64,
    value: f64,
    slope: f64,
}

impl<'a> ImplicitGraph<'a> {
    pub fn new(profile: &'a Profile, r0: f64) -> Result<Self> {
        let [value, slope, _] = profile.eval2(r0);
        if slope.abs() < 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "γ'({r0}) vanishes: not a cone-like point"
            )));
        }
        Ok(Self {
            profile,
            r0,
            value,
            slope,
        })
    }

    /// `γ̃(R) = (γ(R) − γ(r0))/γ'(r0) + r0` and its first two derivatives.
    fn normalized(&self, r: f64) -> Result<[f64; 3]> {
        let d = self.profile.domain();
        if !(r >= d.lo && r <= d.hi) {
            return Err(Error::Domain { r, lo: d.lo, hi: d.hi });
        }
        let [g, g1, g2] = self.profile.eval2(r);
        Ok([
            (g - self.value) / self.slope + self.r0,
            g1 / self.slope,
            g2 / self.slope,
        ])
    }

    /// Solves `ξ3' = (ξ1'² + 2E(ξ2' + ξ3') − E²)/(4ξ2')` with `E = γ̃(R) − R`,
    /// `R = (ξ1'² + (ξ2' − ξ3')²)^{1/2}`, by fixed-point iteration from the cone.
    pub fn psi(&self, x1: f64, x2: f64) -> Result<f64> {
        let mut x3 = x1 * x1 / (4.0 * x2);
        let mut prev = f64::INFINITY;
        for it in 0..200 {
            let r = x1.hypot(x2 - x3);
            let e = self.normalized(r)?[0] - r;
            let next = (x1 * x1 + 2.0 * e * (x2 + x3) - e * e) / (4.0 * x2);
            let step = (next - x3).abs();
            x3 = next;
            // stop at the tolerance, or once rounding noise stops the contraction
            if step <= PSI_TOL * x3.abs() || step == 0.0 || (it > 8 && step >= prev) {
                return Ok(x3);
            }
            prev = step;
        }
        Err(Error::NoConvergence(format!("ψ fixed point at ({x1}, {x2})")))
    }

    /// `φ = ψ − ξ1'²/(4ξ2')`.
    pub fn phi(&self, x1: f64, x2: f64) -> Result<f64> {
        Ok(self.psi(x1, x2)? - x1 * x1 / (4.0 * x2))
    }

    /// Hessian of `ψ` by implicit differentiation of `F = ξ2' + ξ3' − γ̃(R) = 0`.
    pub fn hessian(&self, x1: f64, x2: f64) -> Result<[[f64; 2]; 2]> {
        let x3 = self.psi(x1, x2)?;
        let w = x2 - x3;
        let r = x1.hypot(w);
        let [_, t1, t2] = self.normalized(r)?;
        let (r1, rw) = (x1 / r, w / r);
        let r3 = r * r * r;
        let (r11, r1w, rww) = (w * w / r3, -x1 * w / r3, x1 * x1 / r3);
        // G(ξ1, w) = γ̃(R)
        let g1 = t1 * r1;
        let gw = t1 * rw;
        let g11 = t2 * r1 * r1 + t1 * r11;
        let g1w = t2 * r1 * rw + t1 * r1w;
        let gww = t2 * rw * rw + t1 * rww;
        // F and its partials in (ξ1', ξ2', ξ3'), with w = ξ2' − ξ3'
        let f = [-g1, 1.0 - gw, 1.0 + gw];
        let ff = [[-g11, -g1w, g1w], [-g1w, -gww, gww], [g1w, gww, -gww]];
        let d = [-f[0] / f[2], -f[1] / f[2]];
        let mut h = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                h[i][j] = -(ff[i][j] + ff[i][2] * d[j] + ff[j][2] * d[i] + ff[2][2] * d[i] * d[j]) / f[2];
            }
        }
        Ok(h)
    }
}

/// Where the Lemma is evaluated: the circle, its order and the scales `s_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaSetup {
    pub r0: f64,
    pub n: u32,
    pub delta: f64,
    /// Largest annulus index `K`.
    pub kmax: u32,
}

/// Locates the first perturbed-cone circle of `p` and its annuli at `δ`. A
/// cone has no distinguished circle; it uses `r0 = 1` (or the domain
/// midpoint) and the order `n_cone`.
pub fn lemma_setup(p: &Profile, delta: f64, n_cone: u32) -> Result<LemmaSetup> {
    let dec = analyze_structure(p)?;
    let d = dec
        .degenerate
        .iter()
        .find(|d| d.zero.case != DegeneracyCase::QuasiTorus)
        .ok_or_else(|| Error::InvalidArgument("profile has no perturbed-cone or cone zero".into()))?;
    let (r0, n, half) = if d.zero.case == DegeneracyCase::Cone {
        let dom = p.domain();
        let r0 = if dom.contains(1.0) { 1.0 } else { dom.mid() };
        (r0, n_cone, 0.25f64.min(0.5 * (r0 - dom.lo)).min(0.5 * (dom.hi - r0)))
    } else {
        (d.zero.r, d.zero.n, d.zero.delta)
    };
    let kmax = dyadic_annuli_at(r0, n, delta, half)?
        .iter()
        .map(|a| a.k)
        .max()
        .unwrap_or(0);
    Ok(LemmaSetup { r0, n, delta, kmax })
}

pub fn scale(setup: &LemmaSetup, k: u32) -> f64 {
    setup.delta.powf(1.0 / setup.n as f64) * f64::powi(2.0, k as i32)
}

/// Step of the finite-difference grid in `η`.
const FD_STEP: f64 = 1e-2;

/// Central difference weights for derivative orders 0..=3 on offsets −2..=2.
const STENCIL: [[f64; 5]; 4] = [
    [0.0, 0.0, 1.0, 0.0, 0.0],
    [0.0, -0.5, 0.0, 0.5, 0.0],
    [0.0, 1.0, -2.0, 1.0, 0.0],
    [-0.5, 1.0, 0.0, -1.0, 0.5],
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeRow {
    pub k: u32,
    pub s: f64,
    pub p: u32,
    pub q: u32,
    /// `max |D1^p D2^q ψ_k|` over the rescaled domain.
    pub psi_k: f64,
    /// `max |D1^p D2^q φ|` over the unrescaled domain.
    pub phi: f64,
    /// `min(s^{n−p−q}, 1)`.
    pub phi_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaTable {
    pub setup: LemmaSetup,
    pub rows: Vec<DerivativeRow>,
    /// For each order `j`, `max_k M_j(k) / min_k M_j(k)` with
    /// `M_j(k) = max_{p+q=j} max |D1^p D2^q ψ_k|`.
    pub order_variation: Vec<(u32, f64)>,
}

impl LemmaTable {
    pub fn max_variation(&self) -> f64 {
        self.order_variation.iter().map(|v| v.1).fold(1.0, f64::max)
    }

    pub fn max_phi_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.phi / r.phi_bound).fold(0.0, f64::max)
    }
}

/// Derivative maxima of `ψ_k` and `φ` for one `k` and all `p + q ≤ max_order`.
pub fn derivative_maxima(p: &Profile, setup: &LemmaSetup, k: u32, max_order: u32) -> Result<Vec<DerivativeRow>> {
    if max_order > 3 {
        return Err(Error::Capability {
            requested: max_order as usize,
            max: 3,
        });
    }
    let g = ImplicitGraph::new(p, setup.r0)?;
    let s = scale(setup, k);
    let n = setup.n as i32;
    let sn = s.powi(n);
    let sh = s.powf(0.5 * n as f64);
    // ψ_k and φ_k on a grid padded by two steps for the stencils
    let (n1, n2) = (101usize, 51usize);
    let pad = 2usize;
    let e1 = |i: usize| -0.5 + (i as f64 - pad as f64) * FD_STEP;
    let e2 = |j: usize| 0.5 + (j as f64 - pad as f64) * FD_STEP;
    let (m1, m2) = (n1 + 2 * pad, n2 + 2 * pad);
    let mut psi_k = vec![0.0; m1 * m2];
    let mut phi_k = vec![0.0; m1 * m2];
    for i in 0..m1 {
        for j in 0..m2 {
            let (x1, x2) = (sh * e1(i), s * e2(j) + setup.r0);
            let v = g.psi(x1, x2)?;
            psi_k[i * m2 + j] = v / sn;
            phi_k[i * m2 + j] = (v - x1 * x1 / (4.0 * x2)) / sn;
        }
    }
    let deriv = |data: &[f64], i: usize, j: usize, a: usize, b: usize| {
        let mut acc = 0.0;
        for (di, wa) in STENCIL[a].iter().enumerate() {
            if *wa == 0.0 {
                continue;
            }
            for (dj, wb) in STENCIL[b].iter().enumerate() {
                if *wb == 0.0 {
                    continue;
                }
                acc += wa * wb * data[(i + di - 2) * m2 + (j + dj - 2)];
            }
        }
        acc / FD_STEP.powi((a + b) as i32)
    };
    let mut rows = Vec::new();
    for order in 0..=max_order {
        for a in 0..=order {
            let b = order - a;
            let (mut mp, mut mf) = (0.0f64, 0.0f64);
            for i in pad..pad + n1 {
                for j in pad..pad + n2 {
                    mp = mp.max(deriv(&psi_k, i, j, a as usize, b as usize).abs());
                    mf = mf.max(deriv(&phi_k, i, j, a as usize, b as usize).abs());
                }
            }
            // D^{ab} φ = s^n s^{−a n/2} s^{−b} D^{ab} φ_k
            let phi = mf * sn / sh.powi(a as i32) / s.powi(b as i32);
            rows.push(DerivativeRow {
                k,
                s,
                p: a,
                q: b,
                psi_k: mp,
                phi,
                phi_bound: s.powi(n - order as i32).min(1.0),
            });
        }
    }
    Ok(rows)
}

/// Derivative table over `k = 1..=K` and the per-order variation across `k`.
pub fn lemma_derivative_check(p: &Profile, delta: f64, n_cone: u32, max_order: u32) -> Result<LemmaTable> {
    let setup = lemma_setup(p, delta, n_cone)?;
    let ks: Vec<u32> = (1..=setup.kmax.max(1)).collect();
    let mut rows = Vec::new();
    for &k in &ks {
        rows.extend(derivative_maxima(p, &setup, k, max_order)?);
    }
    let order_variation = (0..=max_order)
        .map(|j| {
            let per_k: Vec<f64> = ks
                .iter()
                .map(|&k| {
                    rows.iter()
                        .filter(|r| r.k == k && r.p + r.q == j)
                        .map(|r| r.psi_k)
                        .fold(0.0, f64::max)
                })
                .collect();
            let hi = per_k.iter().cloned().fold(0.0, f64::max);
            let lo = per_k.iter().cloned().fold(f64::INFINITY, f64::min);
            (j, if hi == 0.0 { 1.0 } else { hi / lo })
        })
        .collect();
    Ok(LemmaTable {
        setup,
        rows,
        order_variation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HessianReport {
    pub k: u32,
    pub s: f64,
    pub samples: usize,
    /// Largest `|det Hess ψ_k − s^{2−n} det Hess ψ| / |s^{2−n} det Hess ψ|`.
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    pub min_det: f64,
    pub max_det: f64,
}

impl HessianReport {
    pub fn pass(&self, tol: f64) -> bool {
        self.max_rel_error <= tol && self.min_det >= 0.1 && self.max_det <= 10.0
    }
}

/// Compares the finite-difference Hessian determinant of `ψ_k` with
/// `s^{2−n}` times the implicit-differentiation Hessian of `ψ` on a 5×5 grid.
pub fn hessian_identity_check(p: &Profile, setup: &LemmaSetup, k: u32) -> Result<HessianReport> {
    let g = ImplicitGraph::new(p, setup.r0)?;
    let s = scale(setup, k);
    let n = setup.n as i32;
    let sn = s.powi(n);
    let sh = s.powf(0.5 * n as f64);
    let psi_k = |e1: f64, e2: f64| -> Result<f64> { Ok(g.psi(sh * e1, s * e2 + setup.r0)? / sn) };
    let h = 1e-3;
    let mut rep = HessianReport {
        k,
        s,
        samples: 0,
        max_rel_error: 0.0,
        max_abs_error: 0.0,
        min_det: f64::INFINITY,
        max_det: 0.0,
    };
    for i in 0..5 {
        for j in 0..5 {
            let (e1, e2) = (-0.5 + 0.25 * i as f64, 0.5 + 0.125 * j as f64);
            let c = psi_k(e1, e2)?;
            let d11 = (psi_k(e1 + h, e2)? - 2.0 * c + psi_k(e1 - h, e2)?) / (h * h);
            let d22 = (psi_k(e1, e2 + h)? - 2.0 * c + psi_k(e1, e2 - h)?) / (h * h);
            let d12 = (psi_k(e1 + h, e2 + h)? - psi_k(e1 + h, e2 - h)? - psi_k(e1 - h, e2 + h)?
                + psi_k(e1 - h, e2 - h)?)
                / (4.0 * h * h);
            let fd = d11 * d22 - d12 * d12;
            let hp = g.hessian(sh * e1, s * e2 + setup.r0)?;
            let exact = s.powi(2 - n) * (hp[0][0] * hp[1][1] - hp[0][1] * hp[1][0]);
            let err = (fd - exact).abs();
            rep.max_abs_error = rep.max_abs_error.max(err);
            if exact != 0.0 {
                rep.max_rel_error = rep.max_rel_error.max(err / exact.abs());
            }
            rep.min_det = rep.min_det.min(fd.abs());
            rep.max_det = rep.max_det.max(fd.abs());
            rep.samples += 1;
        }
    }
    Ok(rep)
}
