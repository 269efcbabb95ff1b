//! Rescaling maps taking a first-stage cap to unit size, and the sampled
//! certificates that justify them.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::parametric_principal_curvatures;
use crate::error::{Error, Result};
use crate::geometry::{add, dot, norm, scale, sub, AffineMap, Vec3};
use crate::profile::Profile;
use crate::structure::{analyze_structure, DegeneracyCase, LeadingModel};
use crate::surface::{Revolution, Surface};

use super::annuli::{dyadic_annuli_at, split, Side};
use super::caps::first_stage_caps;
use super::CapFootprint;

/// `L_k` for a cap at scale `s`, including the rotation that places the cap
/// center over the positive ξ2 axis and the mirror for left annuli.
///
/// Quasi-torus: `η = (ξ1/s^{1/2}, (ξ2 − r0)/s, (ξ3 − γ(r0))/(c_n s^n))`.
/// Perturbed cone: with `ξ3ₙ = (ξ3 − γ(r0))/γ'(r0) + r0`,
/// `ξ2' = (ξ2 + ξ3ₙ)/2`, `ξ3' = (ξ3ₙ − ξ2)/2`,
/// `η = (ξ1/s^{n/2}, (ξ2' − r0)/s, ξ3'/s^n)`.
pub fn rescale_map(model: &LeadingModel, side: Side, s: f64, alpha_center: f64) -> Result<AffineMap> {
    if !(s > 0.0) {
        return Err(Error::InvalidArgument("scale s must be positive".into()));
    }
    let n = model.n as i32;
    let sign = if side == Side::Left { -1.0 } else { 1.0 };
    let r0 = model.r0;
    let rot = AffineMap::rotation_z(FRAC_PI_2 - alpha_center);
    let map = match model.case {
        DegeneracyCase::QuasiTorus => {
            let v = 1.0 / (model.lead * s.powi(n));
            AffineMap::new(
                [[1.0 / s.sqrt(), 0.0, 0.0], [0.0, sign / s, 0.0], [0.0, 0.0, v]],
                [0.0, -sign * r0 / s, -model.value * v],
            )
            .compose(&rot)
        }
        DegeneracyCase::PerturbedCone => {
            let norm3 = AffineMap::new(
                [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0 / model.slope]],
                [0.0, 0.0, r0 - model.value / model.slope],
            );
            let turn = AffineMap::new([[1.0, 0.0, 0.0], [0.0, 0.5, 0.5], [0.0, -0.5, 0.5]], [0.0; 3]);
            let stretch = AffineMap::new(
                [
                    [1.0 / s.powf(0.5 * n as f64), 0.0, 0.0],
                    [0.0, sign / s, 0.0],
                    [0.0, 0.0, 1.0 / s.powi(n)],
                ],
                [0.0, -sign * r0 / s, 0.0],
            );
            stretch.compose(&turn).compose(&norm3).compose(&rot)
        }
        DegeneracyCase::Cone => return Err(Error::InvalidArgument("cone pieces are not rescaled".into())),
    };
    if !map.condition().is_finite() {
        return Err(Error::Structural("singular rescaling map".into()));
    }
    Ok(map)
}

/// Principal curvature magnitudes of the image of the patch under `map` at `(α, r)`.
pub fn rescaled_curvatures<S: Surface + ?Sized>(surf: &S, map: &AffineMap, alpha: f64, r: f64) -> (f64, f64) {
    let [_, xa, xr] = surf.first_partials(alpha, r);
    let [xaa, xar, xrr] = surf.second_partials(alpha, r);
    let l = |v: Vec3| map.apply_linear(v);
    parametric_principal_curvatures(l(xa), l(xr), l(xaa), l(xar), l(xrr))
}

fn unit_ball(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ];
        if dot(v, v) <= 1.0 {
            return v;
        }
    }
}

/// Distance from `y` to the image of the patch over `fp`, by projected Gauss–Newton from `(α, r)`.
pub fn distance_to_image<S: Surface + ?Sized>(
    surf: &S,
    map: &AffineMap,
    fp: &CapFootprint,
    y: Vec3,
    start: (f64, f64),
) -> f64 {
    let (mut a, mut r) = start;
    let mut best = f64::INFINITY;
    for _ in 0..12 {
        let [x, xa, xr] = surf.first_partials(a, r);
        let res = sub(map.apply(x), y);
        let d = norm(res);
        best = best.min(d);
        let (ja, jr) = (map.apply_linear(xa), map.apply_linear(xr));
        let (g11, g12, g22) = (dot(ja, ja), dot(ja, jr), dot(jr, jr));
        let (b1, b2) = (dot(ja, res), dot(jr, res));
        let det = g11 * g22 - g12 * g12;
        if !(det > 0.0) {
            break;
        }
        let da = (g22 * b1 - g12 * b2) / det;
        let dr = (g11 * b2 - g12 * b1) / det;
        let (na, nr) = ((a - da).clamp(fp.alpha1, fp.alpha2), (r - dr).clamp(fp.r1, fp.r2));
        if (na - a).abs() < 1e-15 && (nr - r).abs() < 1e-15 {
            break;
        }
        a = na;
        r = nr;
    }
    let x = surf.point(a, r);
    best.min(norm(sub(map.apply(x), y)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub samples: usize,
    /// Largest sampled distance to the rescaled cap, in units of `δ/s^n`.
    pub max_ratio: f64,
}

/// Samples `N_δ(θ)` over the cap, maps it by `map` and measures the distance
/// to the rescaled cap relative to `δ/s^n`.
pub fn containment_certificate<S: Surface + ?Sized>(
    surf: &S,
    map: &AffineMap,
    fp: &CapFootprint,
    delta: f64,
    s: f64,
    n: u32,
    samples: usize,
    seed: u64,
) -> ContainmentReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = delta / s.powi(n as i32);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let a = rng.random_range(fp.alpha1..fp.alpha2);
        let r = rng.random_range(fp.r1..fp.r2);
        let x = add(surf.point(a, r), scale(unit_ball(&mut rng), delta));
        let d = distance_to_image(surf, map, fp, map.apply(x), (a, r));
        worst = worst.max(d / unit);
    }
    ContainmentReport {
        samples,
        max_ratio: worst,
    }
}

/// Certificate summary for the sampled caps of one annulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateRow {
    pub piece: u32,
    pub side: Side,
    pub k: u32,
    pub s: f64,
    pub caps: usize,
    pub samples: usize,
    /// Largest containment ratio over the sampled caps, in units of `δ/s^n`.
    pub max_ratio: f64,
    /// Range of both rescaled principal curvature magnitudes; `None` for `k = 0`,
    /// whose cap touches the degenerate circle.
    pub curvature: Option<(f64, f64)>,
}

/// Rescaling certificates for `caps_per_k` seeded caps of every annulus of
/// every quasi-torus and perturbed-cone piece of `p`.
pub fn rescaling_certificates(
    p: &Profile,
    delta: f64,
    caps_per_k: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<CertificateRow>> {
    let dec = analyze_structure(p)?;
    let surf = Revolution::new(p);
    let mut jobs = Vec::new();
    for (piece, (_, zero)) in dec.pieces().into_iter().enumerate() {
        let Some(z) = zero else { continue };
        if z.case == DegeneracyCase::Cone {
            continue;
        }
        let model = LeadingModel::at(p, &z)?;
        let delta_eff = delta / model.lead.abs();
        for a in dyadic_annuli_at(z.r, z.n, delta_eff, z.delta)? {
            jobs.push((piece as u32, z, model, a));
        }
    }
    jobs.par_iter()
        .enumerate()
        .map(|(job, &(piece, z, model, a))| {
            let caps = first_stage_caps(z.case, z.n, z.r, &a, piece);
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(job as u64));
            let picks = rand::seq::index::sample(&mut rng, caps.len(), caps_per_k.min(caps.len())).into_vec();
            let mut max_ratio = 0.0f64;
            let mut curv = (f64::INFINITY, 0.0f64);
            for (i, &c) in picks.iter().enumerate() {
                let cap = &caps[c];
                let (ac, _) = cap.center();
                let map = rescale_map(&model, a.side, a.s, ac)?;
                let rep = containment_certificate(
                    &surf,
                    &map,
                    cap,
                    delta,
                    a.s,
                    z.n,
                    samples,
                    rng.random::<u64>() ^ i as u64,
                );
                max_ratio = max_ratio.max(rep.max_ratio);
                if a.k > 0 {
                    for ia in 0..5 {
                        for ir in 0..5 {
                            let al = split(cap.alpha1, cap.alpha2, 4, ia);
                            let r = split(cap.r1, cap.r2, 4, ir);
                            let (l1, l2) = rescaled_curvatures(&surf, &map, al, r);
                            curv = (curv.0.min(l1.min(l2)), curv.1.max(l1.max(l2)));
                        }
                    }
                }
            }
            Ok(CertificateRow {
                piece,
                side: a.side,
                k: a.k,
                s: a.s,
                caps: picks.len(),
                samples,
                max_ratio,
                curvature: (a.k > 0).then_some(curv),
            })
        })
        .collect()
}
