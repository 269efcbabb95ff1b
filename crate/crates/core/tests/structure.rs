use proptest::prelude::*;
use surfdec_core::structure::{analyze_structure, DecomposeOptions, VANISH_REL};
use surfdec_core::{
    decompose_interval, find_curvature_zeros, validate_expansion_radius, DegeneracyCase, Error, Interval, Profile,
    ProfileSpec, ZeroPoint,
};

fn spec(kind: &str, params: &[f64]) -> Profile {
    ProfileSpec::named(kind).with_params(params).build().unwrap()
}

fn builtins() -> Vec<Profile> {
    vec![
        spec("torus", &[]),
        spec("cone", &[1.0]),
        spec("perturbed-cone", &[3.0]),
        spec("paraboloid", &[]),
        ProfileSpec::named("quasi-torus")
            .with_params(&[3.0, 0.4])
            .with_domain(0.7, 1.3)
            .build()
            .unwrap(),
        spec("perturbed-cone", &[4.0, -0.5]),
    ]
}

#[test]
fn classification_table() {
    let z = find_curvature_zeros(&spec("torus", &[]), 1e-10).unwrap();
    assert_eq!(z.len(), 1);
    assert_eq!((z[0].case, z[0].n), (DegeneracyCase::QuasiTorus, 2));
    assert!((z[0].r - 1.0).abs() < 1e-9);

    let z = find_curvature_zeros(&spec("cone", &[1.0]), 1e-10).unwrap();
    assert_eq!(z.len(), 1);
    assert_eq!(z[0].case, DegeneracyCase::Cone);

    let z = find_curvature_zeros(&spec("perturbed-cone", &[3.0]), 1e-10).unwrap();
    assert_eq!(z.len(), 1);
    assert_eq!((z[0].case, z[0].n), (DegeneracyCase::PerturbedCone, 3));
    assert!((z[0].r - 1.0).abs() < 1e-9);

    assert!(find_curvature_zeros(&spec("paraboloid", &[]), 1e-10)
        .unwrap()
        .is_empty());
}

#[test]
fn flat_plane_is_rejected() {
    let plane = spec("power-series", &[1.0, 0.7]);
    match find_curvature_zeros(&plane, 1e-10) {
        Err(Error::UnclassifiableDegeneracy { .. }) => {}
        other => panic!("expected an unclassifiable degeneracy, got {other:?}"),
    }
}

#[test]
fn decomposition_around_one_zero() {
    let p = spec("quasi-torus", &[2.0]);
    let z = ZeroPoint {
        r: 1.0,
        n: 2,
        case: DegeneracyCase::QuasiTorus,
        delta: 0.0,
    };
    let d = decompose_interval(&p, &[z], &DecomposeOptions { cap: 0.2, eta: 0.5 }).unwrap();
    let i = d.degenerate[0].interval;
    assert!((i.lo - 0.8).abs() < 1e-15 && (i.hi - 1.2).abs() < 1e-15);
    assert_eq!(
        d.nondegenerate,
        vec![Interval::new(0.5, i.lo), Interval::new(i.hi, 2.0)]
    );

    let d = decompose_interval(&spec("paraboloid", &[]), &[], &DecomposeOptions::default()).unwrap();
    assert!(d.degenerate.is_empty());
    assert_eq!(d.nondegenerate, vec![Interval::new(0.5, 2.0)]);
}

#[test]
fn neighboring_zeros_get_disjoint_intervals() {
    // γ' vanishes at 1, 1.05 and 1.1: every Δ_i is at most half the gap
    let p = spec("power-series", &[1.0, 1.0, 0.0, 0.01, -0.2, 1.0]);
    let zeros = find_curvature_zeros(&p, 1e-10).unwrap();
    let d = decompose_interval(&p, &zeros, &DecomposeOptions { cap: 0.2, eta: 0.5 }).unwrap();
    let rs: Vec<f64> = d.degenerate.iter().map(|x| x.zero.r).collect();
    for (i, x) in d.degenerate.iter().enumerate() {
        let gap = [
            i.checked_sub(1).map(|j| rs[i] - rs[j]),
            rs.get(i + 1).map(|r| r - rs[i]),
        ]
        .into_iter()
        .flatten()
        .fold(f64::INFINITY, f64::min);
        assert!(x.zero.delta <= 0.5 * gap + 1e-12, "Δ = {} gap = {gap}", x.zero.delta);
    }
    assert!(d
        .degenerate
        .iter()
        .any(|x| (x.zero.r - 1.0).abs() < 1e-9 && x.zero.delta <= 0.05));
}

#[test]
fn expansion_radius_examples() {
    let torus = spec("torus", &[]);
    let z = find_curvature_zeros(&torus, 1e-10).unwrap()[0];
    assert!(validate_expansion_radius(&torus, &z, 0.1, 0.5));
    assert!(!validate_expansion_radius(&torus, &z, 0.45, 0.5));
    let cone = spec("cone", &[2.0]);
    let z = find_curvature_zeros(&cone, 1e-10).unwrap()[0];
    for delta in [0.01, 0.3, 0.7] {
        assert!(validate_expansion_radius(&cone, &z, delta, 0.5));
    }
}

#[test]
fn classification_is_stable_under_tolerance_halving() {
    for p in builtins() {
        let a = find_curvature_zeros(&p, 1e-10).unwrap();
        let b = find_curvature_zeros(&p, 5e-11).unwrap();
        assert_eq!(a.len(), b.len(), "{}", p.id());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((x.case, x.n), (y.case, y.n), "{}", p.id());
            assert!((x.r - y.r).abs() < 2e-10);
        }
    }
}

/// The defining derivative pattern of each detected zero, re-checked on exact jets.
fn check_pattern(p: &Profile, z: &ZeroPoint) -> Result<(), String> {
    let j = p.eval_jet(z.r, z.n as usize + 1).unwrap();
    let lead = j.values[z.n as usize].abs();
    let small = |m: usize| j.values[m].abs() <= VANISH_REL * lead.max(1.0);
    match z.case {
        DegeneracyCase::QuasiTorus => {
            if z.n < 2 || !(1..z.n as usize).all(small) || small(z.n as usize) {
                return Err(format!("quasi-torus pattern fails at {}: {:?}", z.r, j.values));
            }
        }
        DegeneracyCase::PerturbedCone => {
            if z.n < 3 || small(1) || !(2..z.n as usize).all(small) || small(z.n as usize) {
                return Err(format!("perturbed-cone pattern fails at {}: {:?}", z.r, j.values));
            }
        }
        DegeneracyCase::Cone => {
            if small(1) || !(2..=z.n as usize + 1).all(small) {
                return Err(format!("cone pattern fails: {:?}", j.values));
            }
        }
    }
    Ok(())
}

#[test]
fn detected_zeros_satisfy_their_pattern() {
    for p in builtins() {
        for z in find_curvature_zeros(&p, 1e-10).unwrap() {
            check_pattern(&p, &z).unwrap();
        }
    }
}

fn check_decomposition(p: &Profile) -> Result<(), TestCaseError> {
    let d = analyze_structure(p).unwrap();
    let pieces = d.pieces();
    let dom = p.domain();
    prop_assert_eq!(pieces.first().unwrap().0.lo, dom.lo);
    prop_assert_eq!(pieces.last().unwrap().0.hi, dom.hi);
    for w in pieces.windows(2) {
        prop_assert_eq!(w[0].0.hi, w[1].0.lo, "pieces must chain without gap or overlap");
    }
    for (iv, _) in &pieces {
        prop_assert!(iv.lo < iv.hi);
    }
    prop_assert!(d.nondegenerate.len() <= d.degenerate.len() + 1);
    for j in &d.nondegenerate {
        for i in 0..=64 {
            let r = j.lo + (j.hi - j.lo) * i as f64 / 64.0;
            let v = p.eval_jet(r, 2).unwrap();
            prop_assert!(
                v.values[1] * v.values[2] != 0.0,
                "γ'γ'' vanishes at {} inside {:?}",
                r,
                j
            );
        }
    }
    for x in &d.degenerate {
        check_pattern(p, &x.zero).map_err(TestCaseError::fail)?;
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn quasi_tori_decompose_the_domain(n in 2u32..5, tail in prop::collection::vec(-1.0f64..1.0, 0..3), w in 0.1f64..0.3) {
        let mut params = vec![n as f64];
        params.extend(tail);
        let p = ProfileSpec::named("quasi-torus").with_params(&params).with_domain(1.0 - w, 1.0 + w).build().unwrap();
        check_decomposition(&p)?;
    }

    #[test]
    fn perturbed_cones_decompose_the_domain(n in 3u32..6, tail in prop::collection::vec(-1.0f64..1.0, 0..3), w in 0.1f64..0.3) {
        let mut params = vec![n as f64];
        params.extend(tail);
        let p = ProfileSpec::named("perturbed-cone").with_params(&params).with_domain(1.0 - w, 1.0 + w).build().unwrap();
        check_decomposition(&p)?;
    }

    #[test]
    fn tori_decompose_the_domain(lo in 0.55f64..0.95, hi in 1.05f64..1.45) {
        let p = ProfileSpec::named("torus").with_domain(lo, hi).build().unwrap();
        check_decomposition(&p)?;
    }
}
