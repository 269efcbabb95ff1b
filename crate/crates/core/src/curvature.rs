//! Shape operator, Gaussian curvature and principal curvatures, for graphs
//! `ξ3 = g(ξ1, ξ2)` and for surfaces of revolution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{cross, dot, norm, Vec3};
use crate::profile::Profile;

pub type Mat2 = [[f64; 2]; 2];

/// Value and first/second partials of a graph function at `(ξ1, ξ2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphJet2 {
    pub xi1: f64,
    pub xi2: f64,
    pub g: f64,
    pub g1: f64,
    pub g2: f64,
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
}

impl GraphJet2 {
    fn is_finite(&self) -> bool {
        [
            self.xi1, self.xi2, self.g, self.g1, self.g2, self.g11, self.g12, self.g22,
        ]
        .iter()
        .all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSample {
    pub r: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub lambda_rad: f64,
    pub lambda_ang: f64,
}

/// Differential of the Gauss map in graph coordinates.
pub fn shape_operator(j: &GraphJet2) -> Result<Mat2> {
    if !j.is_finite() {
        return Err(Error::InvalidArgument("nonfinite graph jet".into()));
    }
    let GraphJet2 {
        g1, g2, g11, g12, g22, ..
    } = *j;
    let w = (1.0 + g1 * g1 + g2 * g2).powf(-1.5);
    Ok([
        [
            w * (g11 * (1.0 + g2 * g2) - g1 * g2 * g12),
            w * (g12 * (1.0 + g2 * g2) - g1 * g2 * g22),
        ],
        [
            w * (g12 * (1.0 + g1 * g1) - g1 * g2 * g11),
            w * (g22 * (1.0 + g1 * g1) - g1 * g2 * g12),
        ],
    ])
}

pub fn gaussian_curvature_graph(j: &GraphJet2) -> f64 {
    let q = 1.0 + j.g1 * j.g1 + j.g2 * j.g2;
    (j.g11 * j.g22 - j.g12 * j.g12) / (q * q)
}

pub fn det2(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Magnitudes of the (real) eigenvalues of a 2×2 matrix, larger first.
pub fn eigen_magnitudes(m: &Mat2) -> (f64, f64) {
    let tr = m[0][0] + m[1][1];
    let det = det2(m);
    let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
    let (a, b) = ((0.5 * tr + disc).abs(), (0.5 * tr - disc).abs());
    if a >= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn radial_jet(p: &Profile, r: f64) -> Result<[f64; 3]> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("radius {r} must be positive")));
    }
    let j = p.eval_jet(r, 2)?;
    Ok([j.values[0], j.values[1], j.values[2]])
}

/// Graph jet of `g(ξ1, ξ2) = γ(|ξ|)` by the chain rule.
pub fn revolution_graph_jet(p: &Profile, xi1: f64, xi2: f64) -> Result<GraphJet2> {
    let r = xi1.hypot(xi2);
    let [g, d1, d2] = radial_jet(p, r)?;
    let (u1, u2) = (xi1 / r, xi2 / r);
    let t = d1 / r;
    Ok(GraphJet2 {
        xi1,
        xi2,
        g,
        g1: d1 * u1,
        g2: d1 * u2,
        g11: d2 * u1 * u1 + t * (1.0 - u1 * u1),
        g12: (d2 - t) * u1 * u2,
        g22: d2 * u2 * u2 + t * (1.0 - u2 * u2),
    })
}

/// Gaussian curvature along the circle `|ξ| = r`.
pub fn gaussian_curvature_profile(p: &Profile, r: f64) -> Result<f64> {
    let [_, d1, d2] = radial_jet(p, r)?;
    let q = 1.0 + d1 * d1;
    Ok(d1 * d2 / (r * q * q))
}

/// `(|λ_rad|, |λ_ang|)` along the circle `|ξ| = r`.
pub fn principal_curvatures(p: &Profile, r: f64) -> Result<(f64, f64)> {
    let [_, d1, d2] = radial_jet(p, r)?;
    let q = 1.0 + d1 * d1;
    Ok((d2.abs() / q.powf(1.5), d1.abs() / (r * q.sqrt())))
}

pub fn curvature_sample(p: &Profile, r: f64) -> Result<CurvatureSample> {
    let (lambda_rad, lambda_ang) = principal_curvatures(p, r)?;
    Ok(CurvatureSample {
        r,
        k: gaussian_curvature_profile(p, r)?,
        lambda_rad,
        lambda_ang,
    })
}

/// Principal curvature magnitudes of a parametric surface from its first and
/// second partial derivatives (`x_u, x_v, x_uu, x_uv, x_vv`).
pub fn parametric_principal_curvatures(xu: Vec3, xv: Vec3, xuu: Vec3, xuv: Vec3, xvv: Vec3) -> (f64, f64) {
    let n = cross(xu, xv);
    let nn = norm(n);
    let n = [n[0] / nn, n[1] / nn, n[2] / nn];
    let (e, f, g) = (dot(xu, xu), dot(xu, xv), dot(xv, xv));
    let (l, m, nn2) = (dot(xuu, n), dot(xuv, n), dot(xvv, n));
    let det_i = e * g - f * f;
    // Weingarten map I^{-1} II
    let w = [
        [(g * l - f * m) / det_i, (g * m - f * nn2) / det_i],
        [(e * m - f * l) / det_i, (e * nn2 - f * m) / det_i],
    ];
    eigen_magnitudes(&w)
}
