//! Box frames fitted to surface patches and the flatness test.

use serde::{Deserialize, Serialize};

use crate::geometry::{add, cross, dot, normalize, scale, sub, BoxFrame, Vec3};
use crate::surface::Surface;

use super::CapFootprint;

/// Samples per side used for frames and flatness.
pub const FLAT_SAMPLES: usize = 33;
/// Default containment constant.
pub const DEFAULT_CONTAINMENT: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatnessReport {
    pub pass: bool,
    /// Largest distance from the sampled patch to the frame's central plane.
    pub deviation: f64,
    /// Largest dilation of the frame needed to contain the sampled `δ`-neighborhood.
    pub containment: f64,
}

fn grid(a: f64, b: f64, m: usize, i: usize) -> f64 {
    super::annuli::split(a, b, m - 1, i)
}

fn tangent_basis<S: Surface + ?Sized>(surf: &S, alpha: f64, r: f64) -> (Vec3, [Vec3; 3]) {
    let [x, xa, xr] = surf.first_partials(alpha, r);
    let n = normalize(cross(xr, xa));
    let tr = normalize(xr);
    let ta = cross(n, tr);
    (x, [tr, ta, n])
}

/// Frame at the footprint center spanned by the tangent directions and the
/// normal; halfwidths enclose the sampled patch padded by `δ`.
pub fn frame_for_patch<S: Surface + ?Sized>(surf: &S, fp: &CapFootprint, delta: f64) -> BoxFrame {
    let (am, rm) = (0.5 * (fp.alpha1 + fp.alpha2), 0.5 * (fp.r1 + fp.r2));
    let (center, axes) = tangent_basis(surf, am, rm);
    let mut ext = [0.0f64; 3];
    for i in 0..FLAT_SAMPLES {
        let a = grid(fp.alpha1, fp.alpha2, FLAT_SAMPLES, i);
        for j in 0..FLAT_SAMPLES {
            let r = grid(fp.r1, fp.r2, FLAT_SAMPLES, j);
            let d = sub(surf.point(a, r), center);
            for (e, ax) in ext.iter_mut().zip(&axes) {
                *e = e.max(dot(d, *ax).abs());
            }
        }
    }
    BoxFrame::new(center, axes, ext.map(|e| e + delta))
}

/// Samples the patch over `fp` and measures its distance to the frame's
/// central plane (the plane orthogonal to the frame axis closest to the
/// surface normal) and the dilation needed to contain `p ± δ n(p)`.
pub fn flatness_check<S: Surface + ?Sized>(
    frame: &BoxFrame,
    surf: &S,
    fp: &CapFootprint,
    delta: f64,
    c: f64,
) -> FlatnessReport {
    flatness_check_scaled(frame, surf, fp, delta, c, 1.0)
}

/// As [`flatness_check`] over the footprint inflated by `factor` about its center.
pub fn flatness_check_scaled<S: Surface + ?Sized>(
    frame: &BoxFrame,
    surf: &S,
    fp: &CapFootprint,
    delta: f64,
    c: f64,
    factor: f64,
) -> FlatnessReport {
    let (am, rm) = (0.5 * (fp.alpha1 + fp.alpha2), 0.5 * (fp.r1 + fp.r2));
    let (ha, hr) = (0.5 * (fp.alpha2 - fp.alpha1) * factor, 0.5 * (fp.r2 - fp.r1) * factor);
    let n0 = surf.normal(am, rm);
    let normal_axis = (0..3)
        .max_by(|&i, &j| dot(frame.axes[i], n0).abs().total_cmp(&dot(frame.axes[j], n0).abs()))
        .unwrap_or(2);
    let plane_n = frame.axes[normal_axis];
    let mut deviation = 0.0f64;
    let mut containment = 0.0f64;
    for i in 0..FLAT_SAMPLES {
        let a = grid(am - ha, am + ha, FLAT_SAMPLES, i);
        for j in 0..FLAT_SAMPLES {
            let r = grid(rm - hr, rm + hr, FLAT_SAMPLES, j);
            let p = surf.point(a, r);
            deviation = deviation.max(dot(sub(p, frame.center), plane_n).abs());
            let n = surf.normal(a, r);
            for sgn in [-1.0, 1.0] {
                containment = containment.max(frame.dilation_needed(add(p, scale(n, sgn * delta))));
            }
        }
    }
    FlatnessReport {
        pass: deviation <= delta * (1.0 + 1e-12) && containment <= c,
        deviation,
        containment,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{PieceCase, Stage};

    /// Unit sphere in polar coordinates about the north pole.
    struct Sphere;

    impl Surface for Sphere {
        fn point(&self, a: f64, t: f64) -> Vec3 {
            [t.sin() * a.cos(), t.sin() * a.sin(), t.cos()]
        }
        fn first_partials(&self, a: f64, t: f64) -> [Vec3; 3] {
            [
                self.point(a, t),
                [-t.sin() * a.sin(), t.sin() * a.cos(), 0.0],
                [t.cos() * a.cos(), t.cos() * a.sin(), -t.sin()],
            ]
        }
        fn second_partials(&self, _a: f64, _t: f64) -> [Vec3; 3] {
            unimplemented!()
        }
        fn normal(&self, a: f64, t: f64) -> Vec3 {
            self.point(a, t)
        }
    }

    struct Plane;

    impl Surface for Plane {
        fn point(&self, a: f64, r: f64) -> Vec3 {
            [a, r, 0.3 * a - 0.2 * r]
        }
        fn first_partials(&self, a: f64, r: f64) -> [Vec3; 3] {
            [self.point(a, r), [1.0, 0.0, 0.3], [0.0, 1.0, -0.2]]
        }
        fn second_partials(&self, _a: f64, _r: f64) -> [Vec3; 3] {
            [[0.0; 3]; 3]
        }
    }

    fn footprint(a1: f64, a2: f64, r1: f64, r2: f64) -> CapFootprint {
        CapFootprint {
            alpha1: a1,
            alpha2: a2,
            r1,
            r2,
            n: 0,
            stage: Stage::new(PieceCase::Nondegenerate, 0),
        }
    }

    fn polar_cap_frame(diameter: f64, delta: f64) -> BoxFrame {
        let half = 0.5 * diameter;
        BoxFrame::new(
            [0.0, 0.0, 1.0],
            [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            [half + delta, half + delta, 1.0 - half.cos() + delta],
        )
    }

    #[test]
    fn plane_is_flat() {
        let fp = footprint(0.0, 1.0, 0.0, 2.0);
        let delta = 1e-3;
        let f = frame_for_patch(&Plane, &fp, delta);
        let rep = flatness_check(&f, &Plane, &fp, delta, DEFAULT_CONTAINMENT);
        assert!(rep.pass);
        assert!(rep.deviation < 1e-14);
    }

    #[test]
    fn spherical_cap_sagitta() {
        let delta = f64::powi(2.0, -8);
        let d = delta.sqrt();
        let fp = footprint(0.0, std::f64::consts::TAU, 0.0, 0.5 * d);
        let rep = flatness_check(&polar_cap_frame(d, delta), &Sphere, &fp, delta, DEFAULT_CONTAINMENT);
        // sagitta oracle d²/8
        assert!((rep.deviation - d * d / 8.0).abs() < 1e-3 * delta);
        assert!(rep.pass);

        let fp4 = footprint(0.0, std::f64::consts::TAU, 0.0, 2.0 * d);
        let rep = flatness_check(
            &polar_cap_frame(4.0 * d, delta),
            &Sphere,
            &fp4,
            delta,
            DEFAULT_CONTAINMENT,
        );
        assert!((rep.deviation - 2.0 * delta).abs() < 0.01 * delta);
        assert!(!rep.pass);
    }
}
