//! Zeros of `γ'γ''`, their classification, and the split of the profile
//! domain into degenerate intervals `I_i` and nondegenerate intervals `J_i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{Interval, Profile};

/// Default bisection width for roots of `γ'γ''`.
pub const DEFAULT_ROOT_TOL: f64 = 1e-10;
/// Default number of sign-scan samples over the domain.
pub const DEFAULT_SAMPLES: usize = 4096;
/// Relative threshold below which a Taylor coefficient counts as zero.
pub const VANISH_REL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegeneracyCase {
    Cone,
    QuasiTorus,
    PerturbedCone,
}

impl DegeneracyCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            DegeneracyCase::Cone => "cone",
            DegeneracyCase::QuasiTorus => "quasi-torus",
            DegeneracyCase::PerturbedCone => "perturbed-cone",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroPoint {
    pub r: f64,
    /// Order of the first non-vanishing case-defining derivative (1 for cones).
    pub n: u32,
    pub case: DegeneracyCase,
    /// Half-width `Δ_i` of the degenerate interval; zero until decomposed.
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegenerateInterval {
    pub zero: ZeroPoint,
    /// Half-open `[lo, hi)`.
    pub interval: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalDecomposition {
    pub domain: Interval,
    pub degenerate: Vec<DegenerateInterval>,
    /// Half-open `[lo, hi)` pieces where `γ'γ''` stays away from zero.
    pub nondegenerate: Vec<Interval>,
}

impl IntervalDecomposition {
    /// All pieces sorted by left endpoint: `(interval, Some(zero))` for degenerate ones.
    pub fn pieces(&self) -> Vec<(Interval, Option<ZeroPoint>)> {
        let mut out: Vec<(Interval, Option<ZeroPoint>)> = self
            .degenerate
            .iter()
            .map(|d| (d.interval, Some(d.zero)))
            .chain(self.nondegenerate.iter().map(|&j| (j, None)))
            .collect();
        out.sort_by(|a, b| a.0.lo.total_cmp(&b.0.lo));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroSearch {
    pub tol: f64,
    pub samples: usize,
}

impl Default for ZeroSearch {
    fn default() -> Self {
        Self {
            tol: DEFAULT_ROOT_TOL,
            samples: DEFAULT_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecomposeOptions {
    /// Upper bound on every `Δ_i`.
    pub cap: f64,
    /// Domination ratio for [`validate_expansion_radius`].
    pub eta: f64,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self { cap: 0.25, eta: 0.5 }
    }
}

fn vanishes(c: f64, scale: f64) -> bool {
    c.abs() <= VANISH_REL * scale
}

fn jet_scale(coeffs: &[f64]) -> f64 {
    coeffs[1..].iter().fold(1.0f64, |m, c| m.max(c.abs()))
}

/// Classifies the jet of `γ` at `r`. `Ok(None)` means `γ'γ''` does not vanish there.
pub fn classify_at(p: &Profile, r: f64) -> Result<Option<(DegeneracyCase, u32)>> {
    let max = p.max_order();
    let c = p.taylor_at(r, max)?;
    let scale = jet_scale(&c);
    let first_from = |m0: usize| (m0..=max).find(|&m| !vanishes(c[m], scale));
    if vanishes(c[1], scale) {
        return match first_from(2) {
            Some(n) => Ok(Some((DegeneracyCase::QuasiTorus, n as u32))),
            None => Err(Error::UnclassifiableDegeneracy {
                r,
                detail: format!("γ' and all derivatives up to order {max} vanish"),
            }),
        };
    }
    if max < 2 || !vanishes(c[2], scale) {
        return Ok(None);
    }
    Ok(Some(match first_from(3) {
        Some(n) => (DegeneracyCase::PerturbedCone, n as u32),
        None => (DegeneracyCase::Cone, 1),
    }))
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    while b - a > tol {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Finds and classifies the zeros of `γ'γ''` on the profile domain.
pub fn find_curvature_zeros(p: &Profile, tol: f64) -> Result<Vec<ZeroPoint>> {
    find_curvature_zeros_with(
        p,
        &ZeroSearch {
            tol,
            ..ZeroSearch::default()
        },
    )
}

pub fn find_curvature_zeros_with(p: &Profile, search: &ZeroSearch) -> Result<Vec<ZeroPoint>> {
    if !(search.tol > 0.0) || search.samples < 2 {
        return Err(Error::InvalidArgument(
            "zero search needs tol > 0 and at least two samples".into(),
        ));
    }
    let d = p.domain();
    let max = p.max_order();
    let grid: Vec<f64> = (0..search.samples)
        .map(|i| {
            if i + 1 == search.samples {
                d.hi
            } else {
                d.lo + d.len() * i as f64 / (search.samples - 1) as f64
            }
        })
        .collect();

    // identically vanishing h: affine (cone) or constant (plane) stretches
    let mut affine = 0usize;
    let mut constant = 0usize;
    for &r in &grid {
        let c = p.taylor_at(r, max)?;
        let scale = jet_scale(&c);
        if c[2..].iter().all(|&x| vanishes(x, scale)) {
            affine += 1;
            if vanishes(c[1], scale) {
                constant += 1;
            }
        }
    }
    if affine == grid.len() && constant == 0 {
        return Ok(vec![ZeroPoint {
            r: d.mid(),
            n: 1,
            case: DegeneracyCase::Cone,
            delta: 0.5 * d.len(),
        }]);
    }
    if affine > 0 {
        return Err(Error::UnclassifiableDegeneracy {
            r: d.mid(),
            detail: format!(
                "γ'γ'' vanishes identically at {affine} of {} samples without γ being a cone",
                grid.len()
            ),
        });
    }

    let h = |r: f64| {
        let [_, d1, d2] = p.eval2(r);
        d1 * d2
    };
    let dh = |r: f64| {
        let s = p.series_unchecked(r, 4).derivatives();
        s[2] * s[2] + s[1] * s[3]
    };

    let mut candidates = Vec::new();
    for f in [&h as &dyn Fn(f64) -> f64, &dh] {
        let vals: Vec<f64> = grid.iter().map(|&r| f(r)).collect();
        for i in 0..grid.len() {
            if vals[i] == 0.0 {
                candidates.push(grid[i]);
            } else if i + 1 < grid.len() && vals[i + 1] != 0.0 && (vals[i] < 0.0) != (vals[i + 1] < 0.0) {
                candidates.push(bisect(f, grid[i], grid[i + 1], search.tol));
            }
        }
    }
    candidates.sort_by(f64::total_cmp);

    let mut zeros: Vec<ZeroPoint> = Vec::new();
    for r in candidates {
        if let Some(last) = zeros.last() {
            if r - last.r < 2.0 * search.tol {
                continue;
            }
        }
        if let Some((case, n)) = classify_at(p, r)? {
            if case == DegeneracyCase::Cone {
                return Err(Error::UnclassifiableDegeneracy {
                    r,
                    detail: "γ'' vanishes to every available order at an isolated point".into(),
                });
            }
            zeros.push(ZeroPoint { r, n, case, delta: 0.0 });
        }
    }
    Ok(zeros)
}

/// The leading-order model of `γ` at a degenerate zero: `base(u) + lead · u^n`
/// with `u = r − r0`; `base` is constant (quasi-torus) or affine (perturbed cone).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeadingModel {
    pub r0: f64,
    pub n: u32,
    pub case: DegeneracyCase,
    pub value: f64,
    pub slope: f64,
    pub lead: f64,
}

impl LeadingModel {
    pub fn at(p: &Profile, z: &ZeroPoint) -> Result<Self> {
        let order = (z.n as usize).max(1);
        let c = p.series_unchecked(z.r, order + 1).coeffs().to_vec();
        let slope = match z.case {
            DegeneracyCase::QuasiTorus => 0.0,
            _ => c[1],
        };
        Ok(Self {
            r0: z.r,
            n: z.n,
            case: z.case,
            value: c[0],
            slope,
            lead: if z.case == DegeneracyCase::Cone { 0.0 } else { c[order] },
        })
    }

    /// Model value and its first two derivatives at `r`.
    pub fn eval2(&self, r: f64) -> [f64; 3] {
        let u = r - self.r0;
        let n = self.n as i32;
        let lead = |m: i32| -> f64 {
            if m > n {
                return 0.0;
            }
            let falling: f64 = (0..m).map(|k| (n - k) as f64).product();
            self.lead * falling * u.powi(n - m)
        };
        [self.value + self.slope * u + lead(0), self.slope + lead(1), lead(2)]
    }

    /// Derivatives of the leading term `lead · u^n` alone.
    pub fn lead_terms(&self, r: f64) -> [f64; 3] {
        let u = r - self.r0;
        let n = self.n as i32;
        let mut out = [0.0; 3];
        for (m, o) in out.iter_mut().enumerate() {
            let m = m as i32;
            if m <= n {
                let falling: f64 = (0..m).map(|k| (n - k) as f64).product();
                *o = self.lead * falling * u.powi(n - m);
            }
        }
        out
    }
}

/// True when, on a 256-point grid of `(r0 − Δ, r0 + Δ)`, the remainder
/// `γ − model` and its first two derivatives are dominated by `η` times the
/// corresponding derivatives of the leading term.
pub fn validate_expansion_radius(p: &Profile, z: &ZeroPoint, delta: f64, eta: f64) -> bool {
    if z.case == DegeneracyCase::Cone {
        return true;
    }
    if !(delta > 0.0) {
        return false;
    }
    let dom = p.domain();
    if z.r - delta < dom.lo || z.r + delta > dom.hi {
        return false;
    }
    let Ok(model) = LeadingModel::at(p, z) else {
        return false;
    };
    const GRID: usize = 256;
    (0..GRID).all(|i| {
        let r = z.r - delta + 2.0 * delta * i as f64 / (GRID - 1) as f64;
        let g = p.eval2(r);
        let m = model.eval2(r);
        let lead = model.lead_terms(r);
        (0..3).all(|k| {
            let rem = (g[k] - m[k]).abs();
            rem.is_finite() && rem <= eta * lead[k].abs() + 1e-14 * (1.0 + g[k].abs())
        })
    })
}

fn largest_valid_radius(p: &Profile, z: &ZeroPoint, upper: f64, eta: f64) -> f64 {
    if validate_expansion_radius(p, z, upper, eta) {
        return upper;
    }
    let (mut good, mut bad) = (0.0, upper);
    for _ in 0..60 {
        let mid = 0.5 * (good + bad);
        if validate_expansion_radius(p, z, mid, eta) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    good
}

/// Chooses `Δ_i` for every zero and returns the full domain decomposition.
pub fn decompose_interval(p: &Profile, zeros: &[ZeroPoint], opts: &DecomposeOptions) -> Result<IntervalDecomposition> {
    let dom = p.domain();
    if zeros.iter().any(|z| z.case == DegeneracyCase::Cone) {
        if zeros.len() != 1 {
            return Err(Error::Structural("a cone profile cannot carry further zeros".into()));
        }
        let z = ZeroPoint {
            delta: 0.5 * dom.len(),
            ..zeros[0]
        };
        return Ok(IntervalDecomposition {
            domain: dom,
            degenerate: vec![DegenerateInterval { zero: z, interval: dom }],
            nondegenerate: Vec::new(),
        });
    }
    for w in zeros.windows(2) {
        if !(w[0].r < w[1].r) {
            return Err(Error::Structural("zeros must be sorted and distinct".into()));
        }
    }
    let mut degenerate = Vec::with_capacity(zeros.len());
    for (i, z) in zeros.iter().enumerate() {
        if !dom.contains(z.r) {
            return Err(Error::Structural(format!("zero at {} outside the domain", z.r)));
        }
        let mut limit = opts.cap;
        limit = limit.min(0.5 * (z.r - dom.lo)).min(0.5 * (dom.hi - z.r));
        if i > 0 {
            limit = limit.min(0.5 * (z.r - zeros[i - 1].r));
        }
        if i + 1 < zeros.len() {
            limit = limit.min(0.5 * (zeros[i + 1].r - z.r));
        }
        if !(limit > 0.0) {
            return Err(Error::Structural(format!(
                "no room for a degenerate interval around r = {}",
                z.r
            )));
        }
        let delta = largest_valid_radius(p, z, limit, opts.eta);
        if !(delta > 0.0) {
            return Err(Error::Structural(format!(
                "leading-order model fails on every interval around r = {}",
                z.r
            )));
        }
        degenerate.push(DegenerateInterval {
            zero: ZeroPoint { delta, ..*z },
            interval: Interval::new(z.r - delta, z.r + delta),
        });
    }
    let mut nondegenerate = Vec::new();
    let mut cursor = dom.lo;
    for d in &degenerate {
        if d.interval.lo > cursor {
            nondegenerate.push(Interval::new(cursor, d.interval.lo));
        }
        cursor = d.interval.hi;
    }
    if dom.hi > cursor {
        nondegenerate.push(Interval::new(cursor, dom.hi));
    }
    if degenerate.is_empty() && nondegenerate.is_empty() {
        return Err(Error::Structural("empty domain".into()));
    }
    Ok(IntervalDecomposition {
        domain: dom,
        degenerate,
        nondegenerate,
    })
}

/// Runs the zero search and the decomposition with default settings.
pub fn analyze_structure(p: &Profile) -> Result<IntervalDecomposition> {
    analyze_structure_with(p, &DecomposeOptions::default())
}

pub fn analyze_structure_with(p: &Profile, opts: &DecomposeOptions) -> Result<IntervalDecomposition> {
    let zeros = find_curvature_zeros(p, DEFAULT_ROOT_TOL)?;
    decompose_interval(p, &zeros, opts)
}
