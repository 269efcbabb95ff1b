//! Small fixed-size linear algebra: 3-vectors, affine maps and oriented boxes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

#[inline]
pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: Vec3, k: f64) -> Vec3 {
    [a[0] * k, a[1] * k, a[2] * k]
}

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn normalize(a: Vec3) -> Vec3 {
    scale(a, 1.0 / norm(a))
}

pub fn mat_vec(m: &Mat3, v: Vec3) -> Vec3 {
    [dot(m[0], v), dot(m[1], v), dot(m[2], v)]
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn det3(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn inverse3(m: &Mat3) -> Option<Mat3> {
    let d = det3(m);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let c = |i: usize, j: usize| {
        let (r0, r1) = ((i + 1) % 3, (i + 2) % 3);
        let (c0, c1) = ((j + 1) % 3, (j + 2) % 3);
        m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]
    };
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            // adjugate is the transposed cofactor matrix
            inv[j][i] = c(i, j) / d;
        }
    }
    Some(inv)
}

fn frobenius(m: &Mat3) -> f64 {
    m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

/// `x ↦ linear · x + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub linear: Mat3,
    pub offset: Vec3,
}

impl AffineMap {
    pub fn identity() -> Self {
        Self {
            linear: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            offset: [0.0; 3],
        }
    }

    pub fn new(linear: Mat3, offset: Vec3) -> Self {
        Self { linear, offset }
    }

    pub fn translation(t: Vec3) -> Self {
        Self {
            offset: t,
            ..Self::identity()
        }
    }

    pub fn diagonal(d: Vec3) -> Self {
        Self {
            linear: [[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]],
            offset: [0.0; 3],
        }
    }

    /// Rotation by `angle` about the ξ3 axis.
    pub fn rotation_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            linear: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
            offset: [0.0; 3],
        }
    }

    pub fn apply(&self, x: Vec3) -> Vec3 {
        add(mat_vec(&self.linear, x), self.offset)
    }

    /// Applies only the linear part (maps tangent vectors).
    pub fn apply_linear(&self, v: Vec3) -> Vec3 {
        mat_vec(&self.linear, v)
    }

    /// `self ∘ inner`: first `inner`, then `self`.
    pub fn compose(&self, inner: &AffineMap) -> AffineMap {
        AffineMap {
            linear: mat_mul(&self.linear, &inner.linear),
            offset: self.apply(inner.offset),
        }
    }

    pub fn inverse(&self) -> Result<AffineMap> {
        let inv = inverse3(&self.linear).ok_or_else(|| Error::InvalidArgument("singular affine map".into()))?;
        Ok(AffineMap {
            linear: inv,
            offset: scale(mat_vec(&inv, self.offset), -1.0),
        })
    }

    /// Frobenius condition number of the linear part (infinite when singular).
    pub fn condition(&self) -> f64 {
        match inverse3(&self.linear) {
            Some(inv) => frobenius(&self.linear) * frobenius(&inv),
            None => f64::INFINITY,
        }
    }
}

/// An oriented rectangular box: `center + Σ t_i axes_i` with `|t_i| ≤ halfwidths_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxFrame {
    pub center: Vec3,
    pub axes: [Vec3; 3],
    pub halfwidths: [f64; 3],
}

impl BoxFrame {
    /// Builds a frame, normalizing the axes and sorting halfwidths in descending order.
    pub fn new(center: Vec3, axes: [Vec3; 3], halfwidths: [f64; 3]) -> Self {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| halfwidths[b].total_cmp(&halfwidths[a]));
        Self {
            center,
            axes: order.map(|i| normalize(axes[i])),
            halfwidths: order.map(|i| halfwidths[i]),
        }
    }

    /// Coordinates of `x` in the frame basis (not normalized by the halfwidths).
    pub fn local(&self, x: Vec3) -> Vec3 {
        let d = sub(x, self.center);
        [dot(d, self.axes[0]), dot(d, self.axes[1]), dot(d, self.axes[2])]
    }

    /// Smallest `c` such that `x` lies in the box dilated by `c` about its center.
    pub fn dilation_needed(&self, x: Vec3) -> f64 {
        let l = self.local(x);
        (0..3).map(|i| l[i].abs() / self.halfwidths[i]).fold(0.0, f64::max)
    }

    pub fn contains(&self, x: Vec3, dilation: f64) -> bool {
        self.dilation_needed(x) <= dilation
    }

    /// Largest deviation (degrees) of any axis pair from orthogonality.
    pub fn max_orthogonality_defect_deg(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let c = dot(self.axes[i], self.axes[j]).clamp(-1.0, 1.0);
            worst = worst.max((c.acos().to_degrees() - 90.0).abs());
        }
        worst
    }

    pub fn volume(&self) -> f64 {
        8.0 * self.halfwidths.iter().product::<f64>()
    }

    /// Flattened axes, row per axis, as written to manifests.
    pub fn axes_flat(&self) -> [f64; 9] {
        let a = self.axes;
        [
            a[0][0], a[0][1], a[0][2], a[1][0], a[1][1], a[1][2], a[2][0], a[2][1], a[2][2],
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn arb_map() -> impl Strategy<Value = AffineMap> {
        (
            prop::array::uniform3(prop::array::uniform3(-2.0..2.0f64)),
            prop::array::uniform3(-5.0..5.0f64),
        )
            .prop_filter("well conditioned", |(m, _)| det3(m).abs() > 0.1)
            .prop_map(|(m, o)| AffineMap::new(m, o))
    }

    proptest! {
        #[test]
        fn inverse_round_trips(map in arb_map(), x in prop::array::uniform3(-3.0..3.0f64)) {
            let inv = map.inverse().unwrap();
            let back = inv.apply(map.apply(x));
            for i in 0..3 {
                prop_assert!((back[i] - x[i]).abs() < 1e-8 * (1.0 + map.condition()));
            }
        }

        #[test]
        fn composition_is_sequential_application(a in arb_map(), b in arb_map(), x in prop::array::uniform3(-3.0..3.0f64)) {
            let lhs = a.compose(&b).apply(x);
            let rhs = a.apply(b.apply(x));
            for i in 0..3 {
                prop_assert!((lhs[i] - rhs[i]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn frame_sorts_axes_with_halfwidths() {
        let f = BoxFrame::new(
            [0.0; 3],
            [[0.0, 0.0, 2.0], [1.0, 0.0, 0.0], [0.0, 3.0, 0.0]],
            [0.1, 1.0, 0.5],
        );
        assert_eq!(f.halfwidths, [1.0, 0.5, 0.1]);
        assert_eq!(f.axes[0], [1.0, 0.0, 0.0]);
        assert_eq!(f.axes[2], [0.0, 0.0, 1.0]);
        assert_eq!(f.max_orthogonality_defect_deg(), 0.0);
        assert!(f.contains([0.9, 0.4, 0.05], 1.0));
        assert_relative_eq!(f.dilation_needed([0.0, 0.0, 0.3]), 3.0);
    }

    #[test]
    fn rotation_preserves_length() {
        let r = AffineMap::rotation_z(0.7);
        assert_relative_eq!(norm(r.apply([1.0, 2.0, 3.0])), 14f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(det3(&r.linear), 1.0, epsilon = 1e-14);
    }
}
