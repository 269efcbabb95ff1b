use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use surfdec_core::curvature::{
    det2, eigen_magnitudes, gaussian_curvature_graph, gaussian_curvature_profile, principal_curvatures, shape_operator,
    GraphJet2,
};
use surfdec_core::partition::dyadic_annuli;
use surfdec_core::{Profile, ProfileSpec};

fn jet(xi1: f64, xi2: f64, g1: f64, g2: f64, g11: f64, g12: f64, g22: f64) -> GraphJet2 {
    GraphJet2 {
        xi1,
        xi2,
        g: 0.0,
        g1,
        g2,
        g11,
        g12,
        g22,
    }
}

/// `g = ξ1² ± ξ2²` at `(x, y)`.
fn quadric(x: f64, y: f64, sign: f64) -> GraphJet2 {
    jet(x, y, 2.0 * x, 2.0 * sign * y, 2.0, 0.0, 2.0 * sign)
}

/// Graph jet of `γ(|ξ|)` written out independently of the library's chain rule.
fn graph_oracle(p: &Profile, r: f64, angle: f64) -> GraphJet2 {
    let (x, y) = (r * angle.cos(), r * angle.sin());
    let j = p.eval_jet(r, 2).unwrap();
    let (d1, d2) = (j.values[1], j.values[2]);
    let xs = [x, y];
    let mut h = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let kron = if a == b { 1.0 } else { 0.0 };
            h[a][b] = d2 * xs[a] * xs[b] / (r * r) + d1 * (kron / r - xs[a] * xs[b] / (r * r * r));
        }
    }
    GraphJet2 {
        xi1: x,
        xi2: y,
        g: j.values[0],
        g1: d1 * x / r,
        g2: d1 * y / r,
        g11: h[0][0],
        g12: h[0][1],
        g22: h[1][1],
    }
}

fn profiles() -> Vec<Profile> {
    vec![
        ProfileSpec::named("torus").build().unwrap(),
        ProfileSpec::named("cone").with_params(&[1.0]).build().unwrap(),
        ProfileSpec::named("paraboloid").build().unwrap(),
        ProfileSpec::named("perturbed-cone")
            .with_params(&[3.0])
            .build()
            .unwrap(),
    ]
}

#[test]
fn shape_operator_examples() {
    assert_eq!(
        shape_operator(&quadric(0.0, 0.0, 1.0)).unwrap(),
        [[2.0, 0.0], [0.0, 2.0]]
    );
    assert_eq!(
        shape_operator(&jet(0.3, 0.1, 0.0, 0.0, 0.0, 0.0, 0.0)).unwrap(),
        [[0.0, 0.0], [0.0, 0.0]]
    );
    let m = shape_operator(&quadric(1.0, 0.0, 1.0)).unwrap();
    assert_relative_eq!(det2(&m), 4.0 / 25.0, max_relative = 1e-14);
    let bad = jet(0.0, 0.0, f64::NAN, 0.0, 0.0, 0.0, 0.0);
    assert!(shape_operator(&bad).is_err());
}

#[test]
fn gaussian_curvature_of_quadrics() {
    assert_eq!(gaussian_curvature_graph(&quadric(0.0, 0.0, 1.0)), 4.0);
    assert_eq!(gaussian_curvature_graph(&quadric(0.0, 0.0, -1.0)), -4.0);
    assert_relative_eq!(
        gaussian_curvature_graph(&quadric(1.0, 0.0, 1.0)),
        0.16,
        max_relative = 1e-14
    );
}

#[test]
fn profile_curvature_examples() {
    let [torus, cone, ..] = &profiles()[..] else {
        unreachable!()
    };
    assert_eq!(gaussian_curvature_profile(torus, 1.0).unwrap(), 0.0);
    // torus with tube radius ρ about the unit circle: K = cos φ / (ρ (1 + ρ cos φ))
    let (rho, cos_phi) = (0.5, 0.25 / 0.5);
    let oracle = cos_phi / (rho * (1.0 + rho * cos_phi));
    assert_relative_eq!(
        gaussian_curvature_profile(torus, 1.25).unwrap(),
        oracle,
        max_relative = 1e-13
    );
    assert_relative_eq!(oracle, 0.8, max_relative = 1e-15);
    for r in [0.6, 1.0, 1.9] {
        assert_eq!(gaussian_curvature_profile(cone, r).unwrap(), 0.0);
    }
    assert!(gaussian_curvature_profile(torus, 1.5).is_err());
}

#[test]
fn principal_curvature_examples() {
    let [torus, cone, ..] = &profiles()[..] else {
        unreachable!()
    };
    let (a, b) = principal_curvatures(torus, 1.0).unwrap();
    assert_relative_eq!(a, 2.0, max_relative = 1e-14);
    assert_eq!(b, 0.0);
    let (a, b) = principal_curvatures(cone, 1.0).unwrap();
    assert_eq!(a, 0.0);
    assert_relative_eq!(b, 0.5f64.sqrt(), max_relative = 1e-14);
    let (_, b) = principal_curvatures(cone, 2.0).unwrap();
    assert_relative_eq!(b, 0.35355, epsilon = 1e-5);
}

/// 100 seeded samples over four profiles: the revolution formula, the graph
/// formula, and the shape-operator eigenvalues all agree.
#[test]
fn curvature_formulas_agree_on_seeded_samples() {
    let ps = profiles();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let p = &ps[rng.random_range(0..ps.len())];
        let d = p.domain();
        let r = rng.random_range(d.lo..d.hi);
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        let j = graph_oracle(p, r, angle);
        let k_graph = gaussian_curvature_graph(&j);
        let k_prof = gaussian_curvature_profile(p, r).unwrap();
        // the absolute floor only matters where K vanishes exactly (the cone)
        assert!(
            (k_graph - k_prof).abs() <= 1e-8 * k_prof.abs() + 1e-14,
            "{} r={r}: {k_graph} vs {k_prof}",
            p.id()
        );

        let m = shape_operator(&j).unwrap();
        assert!((det2(&m) - k_graph).abs() <= 1e-10 * k_graph.abs() + 1e-14);

        // on the ξ2-axis the radial direction is ξ2
        let axis = graph_oracle(p, r, std::f64::consts::FRAC_PI_2);
        let (e1, e2) = eigen_magnitudes(&shape_operator(&axis).unwrap());
        let (lr, la) = principal_curvatures(p, r).unwrap();
        let mut got = [e1, e2];
        let mut want = [lr, la];
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(want) {
            assert!(
                (g - w).abs() <= 1e-6 * w + 1e-14,
                "{} r={r}: {got:?} vs {want:?}",
                p.id()
            );
        }
    }
}

/// Over the annuli `U_k`, `k ≥ 1`, of a quasi-torus of order `n`, `λ_rad/s^{n−2}`
/// and `λ_ang/s^{n−1}` stay in one band independent of `k`.
#[test]
fn quasi_torus_curvatures_scale_with_the_annulus() {
    let cases = [
        (ProfileSpec::named("torus").build().unwrap(), 2u32),
        (
            ProfileSpec::named("quasi-torus")
                .with_params(&[3.0])
                .with_domain(0.7, 1.3)
                .build()
                .unwrap(),
            3,
        ),
        (
            ProfileSpec::named("quasi-torus")
                .with_params(&[4.0])
                .with_domain(0.7, 1.3)
                .build()
                .unwrap(),
            4,
        ),
    ];
    for (p, n) in cases {
        let delta = f64::powi(2.0, -12);
        let mut rad = Vec::new();
        let mut ang = Vec::new();
        for a in dyadic_annuli(n, delta, 0.25).unwrap().into_iter().filter(|a| a.k >= 1) {
            for i in 0..16 {
                let r = a.radial.lo + (a.radial.hi - a.radial.lo) * (i as f64 + 0.5) / 16.0;
                let (lr, la) = principal_curvatures(&p, r).unwrap();
                rad.push(lr / a.s.powi(n as i32 - 2));
                ang.push(la / a.s.powi(n as i32 - 1));
            }
        }
        // on (s/2, s] the leading terms n(n−1)u^{n−2} and n u^{n−1} vary by 2^{n−2} and 2^{n−1}
        for (vals, spread) in [(&rad, 2f64.powi(n as i32 - 2)), (&ang, 2f64.powi(n as i32 - 1))] {
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(0.0, f64::max);
            assert!(lo > 0.0 && hi / lo <= 2.0 * spread, "n = {n}: band [{lo}, {hi}]");
        }
    }
}

proptest! {
    #[test]
    fn determinant_of_shape_operator_is_gaussian_curvature(
        g1 in -3.0f64..3.0, g2 in -3.0f64..3.0, g11 in -5.0f64..5.0, g12 in -5.0f64..5.0, g22 in -5.0f64..5.0,
    ) {
        let j = jet(0.0, 0.0, g1, g2, g11, g12, g22);
        let k = gaussian_curvature_graph(&j);
        let d = det2(&shape_operator(&j).unwrap());
        prop_assert!((d - k).abs() <= 1e-10 * k.abs().max(1e-12) + 1e-15);
    }

    #[test]
    fn eigen_magnitudes_multiply_to_the_curvature(which in 0usize..4, t in 0.02f64..0.98) {
        let ps = profiles();
        let p = &ps[which];
        let d = p.domain();
        let r = d.lo + t * (d.hi - d.lo);
        let (lr, la) = principal_curvatures(p, r).unwrap();
        let k = gaussian_curvature_profile(p, r).unwrap();
        prop_assert!((lr * la - k.abs()).abs() <= 1e-8 * k.abs().max(1e-300));
    }
}
