//! Run configuration: a flat JSON file overlaid by command line flags.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};
use surfdec_core::fourierlab::{Family, Preset};
use surfdec_core::ProfileSpec;

use crate::CliError;

/// Environment variable consulted when `--threads` is absent.
pub const THREADS_ENV: &str = "SURFDEC_THREADS";

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

fn one_or_many<'de, D, T>(d: D) -> Result<Option<Vec<T>>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    Ok(Option::<OneOrMany<T>>::deserialize(d)?.map(|v| match v {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(xs) => xs,
    }))
}

/// Every key is optional in a file; [`RunConfig::resolve`] fills defaults and
/// validates what the subcommand needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<[f64; 2]>,
    /// Convergence radius of a power-series profile.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(deserialize_with = "one_or_many", skip_serializing_if = "Option::is_none")]
    pub delta: Option<Vec<f64>>,
    #[serde(deserialize_with = "one_or_many", skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(deserialize_with = "one_or_many", skip_serializing_if = "Option::is_none")]
    pub family: Option<Vec<Family>>,
    #[serde(deserialize_with = "one_or_many", skip_serializing_if = "Option::is_none")]
    pub preset: Option<Vec<Preset>>,
    #[serde(
        rename = "N",
        deserialize_with = "one_or_many",
        skip_serializing_if = "Option::is_none"
    )]
    pub tubes: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 lets the pool choose.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Largest DFT grid, in points.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub memory_budget: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oversample: Option<usize>,
    /// Lattice spacing as a fraction of δ.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing_factor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meridian: Option<bool>,
    /// Radii sampled by `analyze`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Dilation constant of the flatness test.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub containment: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest: Option<PathBuf>,
    /// Caps per annulus for rescaling certificates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caps: Option<usize>,
    /// Neighborhood samples per certified cap.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cert_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_cone: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_order: Option<u32>,
    /// Fill the `seconds` CSV column (makes output nondeterministic).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<bool>,
}

macro_rules! overlay_fields {
    ($base:ident, $top:ident, $($f:ident),*) => {
        RunConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl RunConfig {
    /// Values set in `top` win.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        let base = self;
        overlay_fields!(
            base,
            top,
            command,
            profile,
            params,
            domain,
            radius,
            delta,
            p,
            q,
            family,
            preset,
            tubes,
            seed,
            out,
            threads,
            memory_budget,
            oversample,
            spacing_factor,
            meridian,
            samples,
            containment,
            manifest,
            caps,
            cert_samples,
            n_cone,
            max_order,
            timing
        )
    }

    pub fn profile_spec(&self) -> Option<ProfileSpec> {
        self.profile.as_ref().map(|kind| ProfileSpec {
            kind: kind.clone(),
            params: self.params.clone().unwrap_or_default(),
            domain: self.domain,
            radius: self.radius,
        })
    }

    pub fn require_profile(&self) -> Result<ProfileSpec, CliError> {
        self.profile_spec()
            .ok_or_else(|| CliError::Usage("missing profile: set \"profile\" in the config or pass --profile".into()))
    }

    pub fn deltas(&self) -> &[f64] {
        self.delta.as_deref().unwrap_or(&[])
    }

    /// Fills subcommand defaults and checks the invariants every run relies on.
    pub fn resolve(mut self, command: &str) -> Result<RunConfig, CliError> {
        self.command = Some(command.to_string());
        self.seed.get_or_insert(0);
        self.out.get_or_insert_with(|| PathBuf::from("surfdec-out"));
        if self.threads.is_none() {
            if let Ok(v) = std::env::var(THREADS_ENV) {
                let n = v
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("{THREADS_ENV}={v:?} is not a thread count")))?;
                self.threads = Some(n);
            }
        }
        self.threads.get_or_insert(0);
        match command {
            "analyze" => {
                self.require_profile()?;
                self.samples.get_or_insert(257);
            }
            "partition" | "verify" => {
                if command == "partition" || self.manifest.is_none() {
                    self.require_profile()?;
                    if self.delta.is_none() {
                        return Err(CliError::Usage("missing delta".into()));
                    }
                }
                self.containment.get_or_insert(1000.0);
                if command == "verify" {
                    self.caps.get_or_insert(10);
                    self.cert_samples.get_or_insert(10_000);
                }
            }
            "experiment" => {
                self.preset.get_or_insert_with(|| vec![Preset::Torus]);
                self.delta
                    .get_or_insert_with(|| vec![1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0]);
                self.p.get_or_insert_with(|| vec![4.0]);
                self.q.get_or_insert(4.0);
                self.family
                    .get_or_insert_with(|| vec![Family::Constant, Family::RandomPhase]);
                self.oversample.get_or_insert(2);
                self.spacing_factor.get_or_insert(0.5);
                self.meridian.get_or_insert(false);
                self.memory_budget
                    .get_or_insert(surfdec_core::fourierlab::DEFAULT_BUDGET);
                self.timing.get_or_insert(false);
            }
            "prop5" => {
                self.tubes.get_or_insert_with(|| vec![8, 16, 32, 64, 128]);
                self.delta.get_or_insert_with(|| vec![f64::powi(2.0, -10)]);
                self.p.get_or_insert_with(|| vec![4.0, 6.0]);
                self.family.get_or_insert_with(|| vec![Family::SmoothIndicator]);
                self.oversample.get_or_insert(2);
                self.memory_budget
                    .get_or_insert(surfdec_core::fourierlab::DEFAULT_BUDGET);
            }
            "lemma-check" => {
                self.require_profile()?;
                self.delta.get_or_insert_with(|| vec![f64::powi(2.0, -12)]);
                self.n_cone.get_or_insert(3);
                self.max_order.get_or_insert(3);
            }
            other => return Err(CliError::Usage(format!("unknown subcommand {other:?}"))),
        }
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), CliError> {
        let usage = |m: &str| Err(CliError::Usage(m.to_string()));
        if let Some(d) = &self.delta {
            if d.is_empty() {
                return usage("delta list must be nonempty");
            }
            if d.iter().any(|x| !(*x > 0.0 && *x < 1.0)) {
                return usage("delta must lie in (0,1)");
            }
        }
        if let Some(p) = &self.p {
            if p.is_empty() {
                return usage("p list must be nonempty");
            }
            if p.iter().any(|x| !(*x >= 1.0)) {
                return usage("p must be at least 1");
            }
        }
        if matches!(self.q, Some(q) if !(q >= 1.0)) {
            return usage("q must be at least 1");
        }
        if matches!(&self.family, Some(f) if f.is_empty()) {
            return usage("family list must be nonempty");
        }
        if matches!(&self.preset, Some(f) if f.is_empty()) {
            return usage("preset list must be nonempty");
        }
        if let Some(n) = &self.tubes {
            if n.is_empty() || n.contains(&0) {
                return usage("N must be a nonempty list of positive integers");
            }
        }
        if matches!(self.oversample, Some(o) if o < 2) {
            return usage("oversample must be at least 2");
        }
        if matches!(self.spacing_factor, Some(s) if !(s > 0.0 && s <= 1.0)) {
            return usage("spacing_factor must lie in (0,1]");
        }
        if matches!(self.samples, Some(s) if s < 2) {
            return usage("samples must be at least 2");
        }
        if matches!(self.containment, Some(c) if !(c >= 1.0)) {
            return usage("containment must be at least 1");
        }
        if matches!(self.max_order, Some(m) if m > 3) {
            return usage("max_order must be at most 3");
        }
        Ok(())
    }
}

/// Reads a flat JSON config. Parse errors carry the line and column.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}
