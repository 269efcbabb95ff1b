//! Named experiment setups: a surface, its partition, and a parameter window.
//!
//! Windows are fixed across δ so that ratios at different δ are comparable.
//! Their angular width `asin(0.46/r_max)` keeps every frequency extent below
//! `0.5`, so at `δ = 2⁻⁷` with spacing `δ/2` the `L⁴` grid stays within `256³`.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::{build_partition, partition_cone_square, PartitionManifest};
use crate::profile::{Profile, ProfileSpec};

use super::lattice::{discretize_revolution, FrequencyLattice, Window};
use super::norm::NormOptions;
use super::ratio::{decoupling_ratio, ExperimentRecord};
use super::{synth_test_function, Family};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Torus around its degenerate circle `r = 1`.
    Torus,
    /// `γ(r) = r + (r − 1)³` around `r = 1`.
    PerturbedCone,
    /// Cone with full-length plates.
    ConePlates,
    /// Cone with square `δ^{1/2}` caps.
    ConeSquare,
    /// Inner half of the torus, `r ∈ [0.6, 1)`.
    TorusInner,
    /// Outer half of the torus, `r ∈ [1, 1.4)`.
    TorusOuter,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Torus,
        Preset::PerturbedCone,
        Preset::ConePlates,
        Preset::ConeSquare,
        Preset::TorusInner,
        Preset::TorusOuter,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Preset::Torus => "torus",
            Preset::PerturbedCone => "perturbed-cone",
            Preset::ConePlates => "cone-plates",
            Preset::ConeSquare => "cone-square",
            Preset::TorusInner => "torus-inner",
            Preset::TorusOuter => "torus-outer",
        }
    }

    pub fn case(&self) -> &'static str {
        match self {
            Preset::Torus | Preset::TorusInner | Preset::TorusOuter => "quasi-torus",
            Preset::PerturbedCone => "perturbed-cone",
            Preset::ConePlates => "cone",
            Preset::ConeSquare => "cone-square",
        }
    }

    pub fn profile(&self) -> Result<Profile> {
        match self {
            Preset::Torus | Preset::TorusInner | Preset::TorusOuter => ProfileSpec::named("torus").build(),
            Preset::PerturbedCone => ProfileSpec::named("perturbed-cone").with_params(&[3.0]).build(),
            Preset::ConePlates | Preset::ConeSquare => ProfileSpec::named("cone").with_params(&[1.0]).build(),
        }
    }

    pub fn window(&self) -> Window {
        let r: [f64; 2] = match self {
            Preset::TorusInner => [0.6, 1.0],
            Preset::TorusOuter => [1.0, 1.4],
            _ => [0.8, 1.2],
        };
        Window {
            alpha: [0.0, (0.46 / r[1]).asin()],
            r,
        }
    }

    pub fn partition(&self, p: &Profile, delta: f64) -> Result<PartitionManifest> {
        match self {
            Preset::ConeSquare => partition_cone_square(p, delta),
            _ => build_partition(p, delta),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown preset {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub preset: Preset,
    pub delta: f64,
    /// Lattice spacing as a fraction of δ.
    pub spacing_factor: f64,
    /// Restrict the lattice to the meridian plane `ξ2 = 0` (2-D reduction).
    pub meridian: bool,
    pub norm: NormOptions,
}

impl ExperimentSpec {
    pub fn new(preset: Preset, delta: f64) -> Self {
        Self {
            preset,
            delta,
            spacing_factor: 0.5,
            meridian: false,
            norm: NormOptions::default(),
        }
    }
}

/// Partition and lattice for one `(preset, δ)`, reusable across families and exponents.
pub struct PreparedExperiment {
    pub spec: ExperimentSpec,
    pub profile: Profile,
    pub manifest: PartitionManifest,
    pub lattice: FrequencyLattice,
}

impl PreparedExperiment {
    pub fn new(spec: &ExperimentSpec) -> Result<Self> {
        let profile = spec.preset.profile()?;
        let manifest = spec.preset.partition(&profile, spec.delta)?;
        let lattice = discretize_revolution(
            &profile,
            &manifest,
            &spec.preset.window(),
            spec.spacing_factor * spec.delta,
            spec.meridian,
        )?;
        Ok(Self {
            spec: spec.clone(),
            profile,
            manifest,
            lattice,
        })
    }

    pub fn measure(&self, family: Family, seed: u64, p: f64, q: f64) -> Result<ExperimentRecord> {
        let start = Instant::now();
        let f = synth_test_function(&self.lattice, family, seed);
        let mut rec = decoupling_ratio(&f, p, q, &self.spec.norm)?;
        rec.surface = self.spec.preset.as_str().into();
        rec.case = self.spec.preset.case().into();
        rec.seconds = start.elapsed().as_secs_f64();
        Ok(rec)
    }
}

pub fn run_experiment(spec: &ExperimentSpec, family: Family, seed: u64, p: f64, q: f64) -> Result<ExperimentRecord> {
    PreparedExperiment::new(spec)?.measure(family, seed, p, q)
}
