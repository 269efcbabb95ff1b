//! Footprint generators: nondegenerate grids, plates, and the two-stage
//! construction around degenerate circles.

use std::f64::consts::TAU;

use crate::profile::{Interval, Profile};
use crate::structure::DegeneracyCase;

use super::annuli::{ceil_count, split, Annulus, Side};
use super::{CapFootprint, PieceCase, Stage};

/// Angular (arclength) and radial dimensions of a first-stage cap at scale `s`.
pub fn first_stage_dims(case: DegeneracyCase, n: u32, s: f64) -> (f64, f64) {
    match case {
        DegeneracyCase::QuasiTorus => (s.sqrt(), s),
        _ => (s.powf(0.5 * n as f64), s),
    }
}

fn piece_case(case: DegeneracyCase) -> PieceCase {
    match case {
        DegeneracyCase::QuasiTorus => PieceCase::QuasiTorus,
        DegeneracyCase::PerturbedCone => PieceCase::PerturbedCone,
        DegeneracyCase::Cone => PieceCase::Cone,
    }
}

/// Number of first-stage sectors around the circle of radius `r0`.
pub fn first_stage_count(case: DegeneracyCase, n: u32, s: f64, r0: f64) -> usize {
    let (w, _) = first_stage_dims(case, n, s);
    ceil_count(TAU * r0 / w)
}

/// First-stage caps tiling one annulus: equal angular sectors, full radial extent.
pub fn first_stage_caps(case: DegeneracyCase, n: u32, r0: f64, annulus: &Annulus, piece: u32) -> Vec<CapFootprint> {
    let count = first_stage_count(case, n, annulus.s, r0);
    (0..count)
        .map(|j| CapFootprint {
            alpha1: split(0.0, TAU, count, j),
            alpha2: split(0.0, TAU, count, j + 1),
            r1: annulus.radial.lo,
            r2: annulus.radial.hi,
            n,
            stage: Stage {
                case: piece_case(case),
                piece,
                side: annulus.side,
                k: annulus.k,
                first: j as u32,
                second: 0,
            },
        })
        .collect()
}

/// First-stage caps of the right annulus `U_k` around `r0 = 1`, not truncated.
pub fn first_stage_caps_canonical(case: DegeneracyCase, k: u32, n: u32, delta: f64) -> Vec<CapFootprint> {
    let s0 = delta.powf(1.0 / n as f64);
    let s = s0 * f64::powi(2.0, k as i32);
    let inner = if k == 0 { 0.0 } else { 0.5 * s };
    let annulus = Annulus {
        side: Side::Right,
        k,
        s,
        radial: Interval::new(1.0 + inner, 1.0 + s),
        truncated: false,
    };
    first_stage_caps(case, n, 1.0, &annulus, 0)
}

/// Subdivision plan shared by every cap of one annulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondStage {
    /// `ρ = (δ/s^n)^{1/2}`; `None` when the caps are already flat.
    pub rho: Option<f64>,
    pub angular_splits: usize,
    pub radial_splits: usize,
}

impl SecondStage {
    /// `N = angular_splits · radial_splits` subcaps per cap.
    pub fn per_cap(&self) -> usize {
        self.angular_splits * self.radial_splits
    }

    pub fn plan(case: DegeneracyCase, n: u32, r0: f64, annulus: &Annulus, delta: f64) -> Self {
        let s = annulus.s;
        let sn = s.powi(n as i32);
        if annulus.k == 0 || delta >= sn * (1.0 - 1e-12) {
            return Self {
                rho: None,
                angular_splits: 1,
                radial_splits: 1,
            };
        }
        let rho = (delta / sn).sqrt();
        let (w, _) = first_stage_dims(case, n, s);
        let count = first_stage_count(case, n, s, r0);
        let cap_arc = TAU * r0 / count as f64;
        Self {
            rho: Some(rho),
            angular_splits: ceil_count(cap_arc / (w * rho)),
            radial_splits: ceil_count(annulus.radial.len() / (s * rho)),
        }
    }
}

/// Splits a first-stage cap into the subcap grid of `plan`; the cap itself
/// is returned when no refinement is needed.
pub fn second_stage_refine(cap: &CapFootprint, plan: &SecondStage) -> Vec<CapFootprint> {
    if plan.rho.is_none() {
        return vec![*cap];
    }
    let (ma, mr) = (plan.angular_splits, plan.radial_splits);
    let mut out = Vec::with_capacity(ma * mr);
    for i in 0..mr {
        for j in 0..ma {
            let mut sub = *cap;
            sub.r1 = split(cap.r1, cap.r2, mr, i);
            sub.r2 = split(cap.r1, cap.r2, mr, i + 1);
            sub.alpha1 = split(cap.alpha1, cap.alpha2, ma, j);
            sub.alpha2 = split(cap.alpha1, cap.alpha2, ma, j + 1);
            sub.stage.second = (i * ma + j + 1) as u32;
            out.push(sub);
        }
    }
    out
}

/// Profile arclength over `j`, tabulated on `panels` Simpson panels.
pub(crate) struct ArclengthTable {
    r: Vec<f64>,
    cum: Vec<f64>,
}

impl ArclengthTable {
    pub fn new(p: &Profile, j: Interval, panels: usize) -> Self {
        let speed = |r: f64| {
            let d1 = p.eval2(r)[1];
            (1.0 + d1 * d1).sqrt()
        };
        let mut r = Vec::with_capacity(panels + 1);
        let mut cum = Vec::with_capacity(panels + 1);
        r.push(j.lo);
        cum.push(0.0);
        for i in 0..panels {
            let a = split(j.lo, j.hi, panels, i);
            let b = split(j.lo, j.hi, panels, i + 1);
            let simpson = (b - a) / 6.0 * (speed(a) + 4.0 * speed(0.5 * (a + b)) + speed(b));
            r.push(b);
            cum.push(cum[i] + simpson);
        }
        Self { r, cum }
    }

    pub fn total(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    /// Radius at which the arclength from the left end equals `t`.
    pub fn invert(&self, t: f64) -> f64 {
        let i = self.cum.partition_point(|&c| c <= t).clamp(1, self.cum.len() - 1);
        let (c0, c1) = (self.cum[i - 1], self.cum[i]);
        let w = if c1 > c0 { (t - c0) / (c1 - c0) } else { 0.0 };
        self.r[i - 1] + w * (self.r[i] - self.r[i - 1])
    }
}

/// Grid of caps with radial arclength and angular arclength at most `δ^{1/2}`.
pub fn partition_nondegenerate(p: &Profile, j: Interval, delta: f64, piece: u32) -> Vec<CapFootprint> {
    square_grid(p, j, delta, PieceCase::Nondegenerate, piece)
}

pub(crate) fn square_grid(p: &Profile, j: Interval, delta: f64, case: PieceCase, piece: u32) -> Vec<CapFootprint> {
    let h = delta.sqrt();
    let table = ArclengthTable::new(p, j, 1024);
    let rows = ceil_count(table.total() / h);
    let bounds: Vec<f64> = (0..=rows)
        .map(|i| match i {
            0 => j.lo,
            i if i == rows => j.hi,
            i => table.invert(table.total() * i as f64 / rows as f64),
        })
        .collect();
    let mut out = Vec::new();
    for i in 0..rows {
        let (r1, r2) = (bounds[i], bounds[i + 1]);
        let count = ceil_count(TAU * r2 / h);
        for a in 0..count {
            out.push(CapFootprint {
                alpha1: split(0.0, TAU, count, a),
                alpha2: split(0.0, TAU, count, a + 1),
                r1,
                r2,
                n: 0,
                stage: Stage {
                    case,
                    piece,
                    side: Side::Full,
                    k: i as u32,
                    first: a as u32,
                    second: 0,
                },
            });
        }
    }
    out
}

/// Angular sectors of width `δ^{1/2}` spanning the full radial extent.
pub fn plate_footprints(radial: Interval, delta: f64, piece: u32) -> Vec<CapFootprint> {
    let count = ceil_count(TAU / delta.sqrt());
    (0..count)
        .map(|a| CapFootprint {
            alpha1: split(0.0, TAU, count, a),
            alpha2: split(0.0, TAU, count, a + 1),
            r1: radial.lo,
            r2: radial.hi,
            n: 1,
            stage: Stage {
                case: PieceCase::Cone,
                piece,
                side: Side::Full,
                k: 0,
                first: a as u32,
                second: 0,
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::annuli::dyadic_annuli;

    #[test]
    fn first_stage_dimensions() {
        let delta = f64::powi(2.0, -12);
        let caps = first_stage_caps_canonical(DegeneracyCase::QuasiTorus, 0, 2, delta);
        let (w, r) = first_stage_dims(DegeneracyCase::QuasiTorus, 2, delta.sqrt());
        assert!((w - 0.125).abs() < 1e-15 && (r - 1.0 / 64.0).abs() < 1e-15);
        assert!((caps[0].r2 - caps[0].r1 - 1.0 / 64.0).abs() < 1e-15);
        assert_eq!(caps.len(), 51); // ⌈2π·8⌉

        let (w, r) = first_stage_dims(DegeneracyCase::PerturbedCone, 3, 0.25);
        assert!((w - 0.125).abs() < 1e-15 && r == 0.25);
        let caps = first_stage_caps_canonical(DegeneracyCase::PerturbedCone, 2, 3, delta);
        assert!((caps[0].r2 - caps[0].r1 - 0.125).abs() < 1e-12);

        let caps = first_stage_caps_canonical(DegeneracyCase::QuasiTorus, 3, 2, delta);
        let oracle = TAU * f64::powf(2.0, 1.5);
        assert!((caps.len() as f64 - oracle).abs() <= 1.0);
    }

    #[test]
    fn subcap_dimensions() {
        let delta = f64::powi(2.0, -12);
        let a = dyadic_annuli(3, delta, 0.25).unwrap();
        let u2 = a.iter().find(|x| x.side == Side::Right && x.k == 2).unwrap();
        let plan = SecondStage::plan(DegeneracyCase::PerturbedCone, 3, 1.0, u2, delta);
        let rho = plan.rho.unwrap();
        assert!((rho * rho - f64::powi(2.0, -6)).abs() < 1e-15);
        // radial s ρ = 2^-5, angular s^{3/2} ρ = 2^-6
        assert!((0.25 * rho - 1.0 / 32.0).abs() < 1e-15);
        assert!((0.125 * rho - 1.0 / 64.0).abs() < 1e-15);
        let cap = first_stage_caps(DegeneracyCase::PerturbedCone, 3, 1.0, u2, 0)[0];
        let subs = second_stage_refine(&cap, &plan);
        assert_eq!(subs.len(), plan.per_cap());
        let sub_r = subs[0].r2 - subs[0].r1;
        assert!(sub_r <= 1.0 / 32.0 + 1e-15 && sub_r > 1.0 / 64.0);
        let sub_a = subs[0].alpha2 - subs[0].alpha1;
        assert!(sub_a <= 1.0 / 64.0 + 1e-15 && sub_a > 1.0 / 128.0);
    }

    #[test]
    fn quasi_torus_subcap_count() {
        let delta = f64::powi(2.0, -12);
        let a = dyadic_annuli(2, delta, 0.25).unwrap();
        let u4 = a.iter().find(|x| x.side == Side::Right && x.k == 4).unwrap();
        let plan = SecondStage::plan(DegeneracyCase::QuasiTorus, 2, 1.0, u4, delta);
        let oracle = 0.25f64.powi(2) / delta;
        let n = plan.per_cap() as f64;
        assert!(n <= 4.0 * oracle && n >= oracle / 4.0, "{n} vs {oracle}");
    }

    #[test]
    fn coarse_delta_is_unrefined() {
        let annulus = Annulus {
            side: Side::Right,
            k: 1,
            s: 0.2,
            radial: Interval::new(1.1, 1.2),
            truncated: false,
        };
        let plan = SecondStage::plan(DegeneracyCase::QuasiTorus, 2, 1.0, &annulus, 0.05);
        assert!(plan.rho.is_none());
        let cap = first_stage_caps(DegeneracyCase::QuasiTorus, 2, 1.0, &annulus, 0)[0];
        assert_eq!(second_stage_refine(&cap, &plan), vec![cap]);
    }

    #[test]
    fn plate_counts() {
        assert_eq!(plate_footprints(Interval::new(0.5, 2.0), 0.25, 0).len(), 13);
        let n = plate_footprints(Interval::new(0.5, 2.0), f64::powi(2.0, -8), 0).len() as f64;
        let oracle = TAU * 16.0;
        assert!(n / oracle < 2.0 && oracle / n < 2.0);
    }
}
