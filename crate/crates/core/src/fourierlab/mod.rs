//! Numerical decoupling experiments on frequency lattices.
//!
//! A test function is an exponential sum `f(x) = Σ a_ξ e(ξ·x)` over lattice
//! points `ξ ∈ h·Z^d` in `N_δ` of a surface (or a segment). Norms are periodic
//! means over one period `[0, 1/h)^d`, computed by DFT.

pub mod fit;
pub mod lattice;
pub mod lemma;
pub mod norm;
pub mod presets;
pub mod ratio;

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fit::{fit_loglog, sweep_and_fit, FitResult, XKey};
pub use lattice::{discretize_revolution, discretize_segment, nearest_on_profile, FrequencyLattice, Window};
pub use lemma::{hessian_identity_check, lemma_derivative_check, HessianReport, LemmaTable};
pub use norm::{lp_norm_points, NormOptions, DEFAULT_BUDGET};
pub use presets::{run_experiment, ExperimentSpec, Preset};
pub use ratio::{decoupling_ratio, lp_norm, prop5_experiment, ExperimentRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Constant,
    RandomPhase,
    SmoothIndicator,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Constant, Family::RandomPhase, Family::SmoothIndicator];

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Constant => "constant",
            Family::RandomPhase => "random-phase",
            Family::SmoothIndicator => "smooth-indicator",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown family {s:?}")))
    }
}

#[derive(Debug, Clone)]
pub struct TestFunction<'a> {
    pub lattice: &'a FrequencyLattice,
    pub coeffs: Vec<Complex64>,
    pub family: Family,
    pub seed: u64,
}

fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// `C^∞` bump: 1 on `[0, 1/2]`, 0 on `[1, ∞)`.
pub fn bump(t: f64) -> f64 {
    let t = t.abs();
    if t <= 0.5 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let u = 2.0 * (t - 0.5);
    let (a, b) = (smooth_step(1.0 - u), smooth_step(u));
    a / (a + b)
}

pub fn synth_test_function(lattice: &FrequencyLattice, family: Family, seed: u64) -> TestFunction<'_> {
    let coeffs = match family {
        Family::Constant => vec![Complex64::new(1.0, 0.0); lattice.len()],
        Family::RandomPhase => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..lattice.len())
                .map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..TAU)))
                .collect()
        }
        Family::SmoothIndicator => lattice
            .dist
            .iter()
            .map(|d| Complex64::new(bump(d / lattice.delta), 0.0))
            .collect(),
    };
    TestFunction {
        lattice,
        coeffs,
        family,
        seed,
    }
}
