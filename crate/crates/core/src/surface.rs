//! Parametrized surface patches over `(α, r)` footprints.

use crate::geometry::{cross, normalize, Vec3};
use crate::profile::Profile;

/// A surface parametrized by an angle `α` and a second coordinate `r`
/// (the radius for surfaces of revolution, the height for the cylinder).
pub trait Surface: Sync {
    fn point(&self, alpha: f64, r: f64) -> Vec3;

    /// `(X, X_α, X_r)`.
    fn first_partials(&self, alpha: f64, r: f64) -> [Vec3; 3];

    /// `(X_αα, X_αr, X_rr)`.
    fn second_partials(&self, alpha: f64, r: f64) -> [Vec3; 3];

    /// Unit normal `X_r × X_α`, normalized.
    fn normal(&self, alpha: f64, r: f64) -> Vec3 {
        let [_, xa, xr] = self.first_partials(alpha, r);
        normalize(cross(xr, xa))
    }
}

/// `(r cos α, r sin α, γ(r))`.
#[derive(Debug, Clone, Copy)]
pub struct Revolution<'a> {
    pub profile: &'a Profile,
}

impl<'a> Revolution<'a> {
    pub fn new(profile: &'a Profile) -> Self {
        Self { profile }
    }
}

impl Surface for Revolution<'_> {
    fn point(&self, alpha: f64, r: f64) -> Vec3 {
        let (s, c) = alpha.sin_cos();
        [r * c, r * s, self.profile.value(r)]
    }

    fn first_partials(&self, alpha: f64, r: f64) -> [Vec3; 3] {
        let (s, c) = alpha.sin_cos();
        let [g, d1, _] = self.profile.eval2(r);
        [[r * c, r * s, g], [-r * s, r * c, 0.0], [c, s, d1]]
    }

    fn second_partials(&self, alpha: f64, r: f64) -> [Vec3; 3] {
        let (s, c) = alpha.sin_cos();
        let [_, _, d2] = self.profile.eval2(r);
        [[-r * c, -r * s, 0.0], [-s, c, 0.0], [0.0, 0.0, d2]]
    }
}

/// The unit cylinder `(cos α, sin α, t)`; the footprint's radial slot holds `t`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Cylinder;

impl Surface for Cylinder {
    fn point(&self, alpha: f64, t: f64) -> Vec3 {
        let (s, c) = alpha.sin_cos();
        [c, s, t]
    }

    fn first_partials(&self, alpha: f64, t: f64) -> [Vec3; 3] {
        let (s, c) = alpha.sin_cos();
        [[c, s, t], [-s, c, 0.0], [0.0, 0.0, 1.0]]
    }

    fn second_partials(&self, alpha: f64, _t: f64) -> [Vec3; 3] {
        let (s, c) = alpha.sin_cos();
        [[-c, -s, 0.0], [0.0; 3], [0.0; 3]]
    }
}
