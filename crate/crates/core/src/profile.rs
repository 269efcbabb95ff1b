//! Profile curves `γ` generating surfaces of revolution
//! `ξ3 = γ(sqrt(ξ1² + ξ2²))`, with exact derivative jets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{factorial, Series};

/// Default cap on the derivative order served by [`Profile::eval_jet`].
pub const DEFAULT_MAX_ORDER: usize = 8;

/// The admissible radial range for every profile.
pub const RADIAL_RANGE: (f64, f64) = (0.5, 2.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        !(self.hi > self.lo)
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.lo && r <= self.hi
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    /// `γ(r) = slope · r`.
    Cone { slope: f64 },
    /// `γ(r) = (ρ² − (r−1)²)^{1/2}`, the upper half of a torus tube of minor radius ρ.
    Torus { minor_radius: f64 },
    /// `γ(r) = 1 + (r−1)^n + Σ_j tail_j (r−1)^{n+1+j}`.
    QuasiTorusCanonical { n: u32, tail: Vec<f64> },
    /// `γ(r) = r + (r−1)^n + Σ_j tail_j (r−1)^{n+1+j}`.
    PerturbedConeCanonical { n: u32, tail: Vec<f64> },
    /// `γ(r) = Σ_m coeffs_m (r − center)^m`, valid for `|r − center| < radius`.
    PowerSeries { center: f64, coeffs: Vec<f64>, radius: f64 },
}

impl ProfileKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProfileKind::Cone { .. } => "cone",
            ProfileKind::Torus { .. } => "torus",
            ProfileKind::QuasiTorusCanonical { .. } => "quasi-torus",
            ProfileKind::PerturbedConeCanonical { .. } => "perturbed-cone",
            ProfileKind::PowerSeries { .. } => "power-series",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Evaluator {
    Poly { center: f64, coeffs: Vec<f64> },
    Torus { rho2: f64 },
}

/// Derivatives `γ^{(m)}(r)` for `m = 0..=order`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub r: f64,
    pub values: Vec<f64>,
}

impl Jet {
    pub fn order(&self) -> usize {
        self.values.len() - 1
    }

    pub fn d(&self, m: usize) -> f64 {
        self.values[m]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    kind: ProfileKind,
    domain: Interval,
    max_order: usize,
    eval: Evaluator,
}

/// Builds a profile of the given kind on `domain`, checking every validity constraint.
pub fn make_profile(kind: ProfileKind, domain: Interval) -> Result<Profile> {
    Profile::new(kind, domain)
}

impl Profile {
    pub fn new(kind: ProfileKind, domain: Interval) -> Result<Self> {
        if !(domain.lo.is_finite() && domain.hi.is_finite()) || domain.is_empty() {
            return Err(Error::Construction(format!(
                "domain [{}, {}] must be a nonempty finite interval",
                domain.lo, domain.hi
            )));
        }
        if let ProfileKind::Torus { minor_radius } = &kind {
            let rho = *minor_radius;
            let half_width = (domain.lo - 1.0).abs().max((domain.hi - 1.0).abs());
            if rho > 0.0 && half_width >= rho {
                return Err(Error::Construction(format!(
                    "torus domain half-width Δ = {half_width} violates Δ<{rho} (Δ<{} required)",
                    fraction(rho)
                )));
            }
        }
        if domain.lo < RADIAL_RANGE.0 || domain.hi > RADIAL_RANGE.1 {
            return Err(Error::Construction(format!(
                "domain [{}, {}] must lie inside [{}, {}]",
                domain.lo, domain.hi, RADIAL_RANGE.0, RADIAL_RANGE.1
            )));
        }
        let eval = match &kind {
            ProfileKind::Cone { slope } => {
                check_finite(&[*slope], "cone slope")?;
                Evaluator::Poly {
                    center: 0.0,
                    coeffs: vec![0.0, *slope],
                }
            }
            ProfileKind::Torus { minor_radius } => {
                let rho = *minor_radius;
                if !(rho > 0.0 && rho.is_finite()) {
                    return Err(Error::Construction("torus minor radius must be positive".into()));
                }
                Evaluator::Torus { rho2: rho * rho }
            }
            ProfileKind::QuasiTorusCanonical { n, tail } => {
                if *n < 2 {
                    return Err(Error::Construction("quasi-torus order n must be >= 2".into()));
                }
                check_finite(tail, "quasi-torus tail")?;
                let mut coeffs = vec![0.0; *n as usize + 1 + tail.len()];
                coeffs[0] = 1.0;
                coeffs[*n as usize] = 1.0;
                coeffs[*n as usize + 1..].copy_from_slice(tail);
                Evaluator::Poly { center: 1.0, coeffs }
            }
            ProfileKind::PerturbedConeCanonical { n, tail } => {
                if *n < 3 {
                    return Err(Error::Construction("perturbed-cone order n must be >= 3".into()));
                }
                check_finite(tail, "perturbed-cone tail")?;
                let mut coeffs = vec![0.0; *n as usize + 1 + tail.len()];
                coeffs[0] = 1.0;
                coeffs[1] = 1.0;
                coeffs[*n as usize] = 1.0;
                coeffs[*n as usize + 1..].copy_from_slice(tail);
                Evaluator::Poly { center: 1.0, coeffs }
            }
            ProfileKind::PowerSeries { center, coeffs, radius } => {
                if coeffs.is_empty() {
                    return Err(Error::Construction("power series needs coefficients".into()));
                }
                check_finite(coeffs, "power-series coefficients")?;
                check_finite(&[*center], "power-series center")?;
                if !(*radius > 0.0) {
                    return Err(Error::Construction(
                        "power-series convergence radius must be positive".into(),
                    ));
                }
                let reach = (domain.lo - center).abs().max((domain.hi - center).abs());
                if reach >= *radius {
                    return Err(Error::Construction(format!(
                        "domain reaches {reach} from the center, beyond the convergence radius {radius}"
                    )));
                }
                Evaluator::Poly {
                    center: *center,
                    coeffs: coeffs.clone(),
                }
            }
        };
        Ok(Self {
            kind,
            domain,
            max_order: DEFAULT_MAX_ORDER,
            eval,
        })
    }

    pub fn with_max_order(mut self, max_order: usize) -> Self {
        self.max_order = max_order;
        self
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// True when the profile is an exact polynomial (no truncation remainder).
    pub fn is_polynomial(&self) -> bool {
        matches!(self.eval, Evaluator::Poly { .. })
    }

    /// Taylor series of `γ` around `r` with `len` coefficients; no domain check.
    pub fn series_unchecked(&self, r: f64, len: usize) -> Series {
        match &self.eval {
            Evaluator::Poly { center, coeffs } => {
                let x = Series::variable(r - center, len);
                Series::polynomial(coeffs, &x)
            }
            Evaluator::Torus { rho2 } => {
                let u = Series::variable(r - 1.0, len);
                let inner = (&u * &u).scale(-1.0).add_const(*rho2);
                inner.sqrt()
            }
        }
    }

    /// `(γ, γ', γ'')` at `r` without allocation or domain check.
    #[inline]
    pub fn eval2(&self, r: f64) -> [f64; 3] {
        match &self.eval {
            Evaluator::Poly { center, coeffs } => {
                let u = r - center;
                let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
                for &c in coeffs.iter().rev() {
                    d2 = d2 * u + 2.0 * d1;
                    d1 = d1 * u + v;
                    v = v * u + c;
                }
                [v, d1, d2]
            }
            Evaluator::Torus { rho2 } => {
                let u = r - 1.0;
                let w = rho2 - u * u;
                let g = w.sqrt();
                [g, -u / g, -rho2 / (w * g)]
            }
        }
    }

    /// `γ(r)` without domain check.
    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        self.eval2(r)[0]
    }

    fn check(&self, r: f64, order: usize) -> Result<()> {
        if !self.domain.contains(r) {
            return Err(Error::Domain {
                r,
                lo: self.domain.lo,
                hi: self.domain.hi,
            });
        }
        if order > self.max_order {
            return Err(Error::Capability {
                requested: order,
                max: self.max_order,
            });
        }
        Ok(())
    }

    /// Derivatives `γ^{(m)}(r)` for `m = 0..=order`.
    pub fn eval_jet(&self, r: f64, order: usize) -> Result<Jet> {
        self.check(r, order)?;
        let s = self.series_unchecked(r, order + 1);
        Ok(Jet {
            r,
            values: s.derivatives(),
        })
    }

    /// Taylor coefficients `γ^{(m)}(r0)/m!` for `m = 0..=order`.
    pub fn taylor_at(&self, r0: f64, order: usize) -> Result<Vec<f64>> {
        self.check(r0, order)?;
        Ok(self.series_unchecked(r0, order + 1).coeffs().to_vec())
    }

    pub fn spec(&self) -> ProfileSpec {
        ProfileSpec::from_profile(self)
    }

    /// Short human readable identifier, e.g. `torus(0.5)[0.6,1.4]`.
    pub fn id(&self) -> String {
        let spec = self.spec();
        let params: Vec<String> = spec.params.iter().map(|p| format!("{p}")).collect();
        format!(
            "{}({})[{},{}]",
            spec.kind,
            params.join(","),
            self.domain.lo,
            self.domain.hi
        )
    }
}

/// `m!` for small `m`.
pub fn factorial_f64(m: usize) -> f64 {
    factorial(m)
}

fn check_finite(xs: &[f64], what: &str) -> Result<()> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Construction(format!("{what} must be finite")))
    }
}

fn fraction(x: f64) -> String {
    for d in 1..=16u32 {
        let n = x * d as f64;
        if (n - n.round()).abs() < 1e-12 {
            let n = n.round() as i64;
            return if d == 1 { format!("{n}") } else { format!("{n}/{d}") };
        }
    }
    format!("{x}")
}

/// Serializable description of a profile: kind name, numeric parameters, domain.
///
/// Parameter layout per kind:
/// `cone: [slope]`, `torus: [minor_radius]`, `quasi-torus: [n, tail..]`,
/// `perturbed-cone: [n, tail..]`, `power-series: [center, c0, c1, ..]` with an
/// optional `radius` (omitted means the series is a polynomial).
/// `paraboloid` is accepted as shorthand for the power series `r²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub kind: String,
    #[serde(default)]
    pub params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

impl ProfileSpec {
    pub fn named(kind: &str) -> Self {
        Self {
            kind: kind.to_string(),
            params: Vec::new(),
            domain: None,
            radius: None,
        }
    }

    pub fn with_params(mut self, params: &[f64]) -> Self {
        self.params = params.to_vec();
        self
    }

    pub fn with_domain(mut self, lo: f64, hi: f64) -> Self {
        self.domain = Some([lo, hi]);
        self
    }

    pub fn default_domain(kind: &str) -> [f64; 2] {
        match kind {
            "torus" => [0.6, 1.4],
            _ => [RADIAL_RANGE.0, RADIAL_RANGE.1],
        }
    }

    pub fn build(&self) -> Result<Profile> {
        let [lo, hi] = self.domain.unwrap_or(Self::default_domain(&self.kind));
        let domain = Interval::new(lo, hi);
        let p = &self.params;
        let order_of = |what: &str| -> Result<u32> {
            let n = *p
                .first()
                .ok_or_else(|| Error::Construction(format!("{what} needs the order n as first parameter")))?;
            if n.fract() != 0.0 || n < 0.0 {
                return Err(Error::Construction(format!(
                    "{what} order must be a nonnegative integer"
                )));
            }
            Ok(n as u32)
        };
        let kind = match self.kind.as_str() {
            "cone" => ProfileKind::Cone {
                slope: p.first().copied().unwrap_or(1.0),
            },
            "torus" => ProfileKind::Torus {
                minor_radius: p.first().copied().unwrap_or(0.5),
            },
            "quasi-torus" => ProfileKind::QuasiTorusCanonical {
                n: order_of("quasi-torus")?,
                tail: p[1..].to_vec(),
            },
            "perturbed-cone" => ProfileKind::PerturbedConeCanonical {
                n: order_of("perturbed-cone")?,
                tail: p[1..].to_vec(),
            },
            "power-series" => {
                if p.len() < 2 {
                    return Err(Error::Construction(
                        "power-series needs [center, c0, ...]".into(),
                    ));
                }
                ProfileKind::PowerSeries {
                    center: p[0],
                    coeffs: p[1..].to_vec(),
                    radius: self.radius.unwrap_or(f64::INFINITY),
                }
            }
            "paraboloid" => ProfileKind::PowerSeries {
                center: 0.0,
                coeffs: vec![0.0, 0.0, 1.0],
                radius: f64::INFINITY,
            },
            other => {
                return Err(Error::Construction(format!(
                    "unknown profile kind `{other}` (expected cone, torus, quasi-torus, perturbed-cone, power-series, paraboloid)"
                )))
            }
        };
        Profile::new(kind, domain)
    }

    fn from_profile(p: &Profile) -> Self {
        let d = p.domain();
        let (kind, params, radius) = match p.kind() {
            ProfileKind::Cone { slope } => ("cone", vec![*slope], None),
            ProfileKind::Torus { minor_radius } => ("torus", vec![*minor_radius], None),
            ProfileKind::QuasiTorusCanonical { n, tail } => {
                let mut v = vec![*n as f64];
                v.extend_from_slice(tail);
                ("quasi-torus", v, None)
            }
            ProfileKind::PerturbedConeCanonical { n, tail } => {
                let mut v = vec![*n as f64];
                v.extend_from_slice(tail);
                ("perturbed-cone", v, None)
            }
            ProfileKind::PowerSeries { center, coeffs, radius } => {
                let mut v = vec![*center];
                v.extend_from_slice(coeffs);
                let radius = radius.is_finite().then_some(*radius);
                ("power-series", v, radius)
            }
        };
        Self {
            kind: kind.to_string(),
            params,
            domain: Some([d.lo, d.hi]),
            radius,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn torus() -> Profile {
        make_profile(ProfileKind::Torus { minor_radius: 0.5 }, Interval::new(0.6, 1.4)).unwrap()
    }

    /// Independent oracle: binomial series of (1/2)(1 − 4u²)^{1/2}.
    fn torus_series_oracle(order: usize) -> Vec<f64> {
        // (1 − x)^{1/2} = Σ_k binom(1/2, k) (−x)^k, with x = 4u²
        let mut coeffs = vec![0.0; order + 1];
        let mut binom = 1.0;
        for k in 0..=order / 2 {
            if k > 0 {
                binom *= (0.5 - (k as f64 - 1.0)) / k as f64;
            }
            coeffs[2 * k] = 0.5 * binom * (-4.0f64).powi(k as i32);
        }
        coeffs
    }

    #[test]
    fn cone_jet_is_linear() {
        let p = make_profile(ProfileKind::Cone { slope: 3.0 }, Interval::new(0.5, 2.0)).unwrap();
        let j = p.eval_jet(1.7, 4).unwrap();
        assert_relative_eq!(j.values[0], 5.1, epsilon = 1e-14);
        assert_eq!(&j.values[1..], &[3.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn torus_jet_at_center_matches_series_oracle() {
        let oracle = torus_series_oracle(4);
        let want: Vec<f64> = oracle.iter().enumerate().map(|(m, c)| c * factorial(m)).collect();
        assert_eq!(want, vec![0.5, 0.0, -2.0, 0.0, -24.0]);
        let j = torus().eval_jet(1.0, 4).unwrap();
        for (a, b) in j.values.iter().zip(&want) {
            assert_relative_eq!(*a, *b, epsilon = 1e-13);
        }
    }

    #[test]
    fn torus_jet_off_center_matches_closed_form() {
        // γ = (1/4 − u²)^{1/2}, γ' = −u/γ, γ'' = −(1/4)/γ³ at u = 1/4
        let u = 0.25f64;
        let g = (0.25 - u * u).sqrt();
        let j = torus().eval_jet(1.25, 2).unwrap();
        assert_relative_eq!(j.values[0], g, max_relative = 1e-14);
        assert_relative_eq!(j.values[1], -u / g, max_relative = 1e-14);
        assert_relative_eq!(j.values[2], -0.25 / g.powi(3), max_relative = 1e-14);
        assert_relative_eq!(j.values[0], 0.43301, epsilon = 1e-5);
        assert_relative_eq!(j.values[1], -0.57735, epsilon = 1e-5);
        assert_relative_eq!(j.values[2], -3.07920, epsilon = 1e-5);
    }

    #[test]
    fn torus_domain_violation_names_constraint() {
        let err = make_profile(ProfileKind::Torus { minor_radius: 0.5 }, Interval::new(0.4, 1.6)).unwrap_err();
        assert!(err.to_string().contains("Δ<1/2 required"), "{err}");
        let err = make_profile(ProfileKind::Torus { minor_radius: 0.5 }, Interval::new(0.5, 1.5)).unwrap_err();
        assert!(err.to_string().contains("Δ<1/2 required"), "{err}");
    }

    #[test]
    fn power_series_round_trip() {
        let p = make_profile(
            ProfileKind::PowerSeries {
                center: 1.0,
                coeffs: vec![1.0, 0.0, 1.0],
                radius: 1.0,
            },
            Interval::new(0.5, 1.5),
        )
        .unwrap();
        assert_eq!(p.taylor_at(1.0, 2).unwrap(), vec![1.0, 0.0, 1.0]);
        assert_relative_eq!(p.value(1.3), 1.09, epsilon = 1e-14);
    }

    #[test]
    fn taylor_coefficients() {
        let t = torus().taylor_at(1.0, 4).unwrap();
        for (a, b) in t.iter().zip([0.5, 0.0, -1.0, 0.0, -1.0]) {
            assert_relative_eq!(*a, b, epsilon = 1e-14);
        }
        let cone = make_profile(ProfileKind::Cone { slope: 1.0 }, Interval::new(0.5, 2.0)).unwrap();
        assert_eq!(cone.taylor_at(1.5, 3).unwrap(), vec![1.5, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn domain_and_capability_errors() {
        let t = torus();
        assert!(matches!(t.eval_jet(1.45, 2), Err(Error::Domain { .. })));
        assert!(matches!(
            t.eval_jet(1.0, 9),
            Err(Error::Capability { requested: 9, max: 8 })
        ));
        let t = t.with_max_order(12);
        assert_eq!(t.eval_jet(1.0, 12).unwrap().values.len(), 13);
    }

    #[test]
    fn torus_center_is_case_two_pattern() {
        let j = torus().eval_jet(1.0, 2).unwrap();
        assert_eq!(j.values[1], 0.0);
        assert!(j.values[2] != 0.0);
    }

    #[test]
    fn eval2_agrees_with_series() {
        let profiles = [
            torus(),
            ProfileSpec::named("perturbed-cone")
                .with_params(&[3.0, 0.5])
                .build()
                .unwrap(),
            ProfileSpec::named("paraboloid").build().unwrap(),
        ];
        for p in &profiles {
            for i in 0..20 {
                let r = p.domain().lo + p.domain().len() * i as f64 / 19.0;
                let fast = p.eval2(r);
                let slow = p.eval_jet(r, 2).unwrap();
                for m in 0..3 {
                    assert_relative_eq!(fast[m], slow.values[m], max_relative = 1e-12, epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn spec_round_trip() {
        for spec in [
            ProfileSpec::named("torus"),
            ProfileSpec::named("cone").with_params(&[2.0]),
            ProfileSpec::named("quasi-torus").with_params(&[4.0, 0.1, -0.2]),
            ProfileSpec::named("power-series").with_params(&[1.0, 1.0, 0.0, 1.0]),
        ] {
            let p = spec.build().unwrap();
            assert_eq!(p.spec().build().unwrap(), p);
        }
        assert!(ProfileSpec::named("sphere").build().is_err());
    }
}
