//! `surfdec` command line: argument parsing, configuration layering and the
//! subcommand pipelines.
//!
//! Exit codes: 0 on success, 1 when a check fails or a computation errors,
//! 2 for an invalid invocation or configuration.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use surfdec_core::fourierlab::{Family, Preset};

pub use config::{load_config, RunConfig, THREADS_ENV};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad config or parameters outside their domain.
    Usage(String),
    /// A check failed or the computation could not complete.
    Failed(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl From<surfdec_core::Error> for CliError {
    fn from(e: surfdec_core::Error) -> Self {
        use surfdec_core::Error as E;
        match e {
            E::Construction(_) | E::Domain { .. } | E::Capability { .. } | E::InvalidArgument(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Failed(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "surfdec",
    version,
    about = "Flat-box partitions and decoupling experiments for surfaces of revolution"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Curvature table and degeneracy decomposition of a profile.
    Analyze {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        profile: ProfileArgs,
        /// Number of radii in the curvature table.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Build the flat-box partition and write its manifest.
    Partition {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long, value_delimiter = ',')]
        delta: Option<Vec<f64>>,
        #[arg(long)]
        containment: Option<f64>,
    },
    /// Check tiling, flatness, counts, maximality and rescaling certificates.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long, value_delimiter = ',')]
        delta: Option<Vec<f64>>,
        /// Verify an existing manifest instead of building one.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        containment: Option<f64>,
        /// Caps per annulus for rescaling certificates.
        #[arg(long)]
        caps: Option<usize>,
        /// Neighborhood samples per certified cap.
        #[arg(long)]
        cert_samples: Option<usize>,
    },
    /// Measure decoupling ratios on preset surfaces.
    Experiment {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        lab: LabArgs,
        #[arg(long, value_delimiter = ',')]
        preset: Option<Vec<Preset>>,
        #[arg(long, value_delimiter = ',')]
        delta: Option<Vec<f64>>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        spacing_factor: Option<f64>,
        /// Restrict the lattice to the plane ξ2 = 0.
        #[arg(long)]
        meridian: bool,
        /// Fill the seconds column.
        #[arg(long)]
        timing: bool,
    },
    /// Line-segment baseline: ratio against the number of tubes.
    Prop5 {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        lab: LabArgs,
        #[arg(long = "N", value_delimiter = ',')]
        tubes: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        delta: Option<Vec<f64>>,
    },
    /// Derivative bounds and the Hessian identity of the rescaled perturbed cone.
    LemmaCheck {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long)]
        delta: Option<f64>,
        /// Order assumed for a pure cone.
        #[arg(long)]
        n_cone: Option<u32>,
        #[arg(long)]
        max_order: Option<u32>,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (`partition` also accepts a `.json` file).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; overrides SURFDEC_THREADS.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// cone, torus, quasi-torus, perturbed-cone, power-series or paraboloid.
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub params: Option<Vec<f64>>,
    /// Radial domain as `lo,hi`.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub domain: Option<Vec<f64>>,
    #[arg(long)]
    pub radius: Option<f64>,
}

#[derive(Debug, Args)]
pub struct LabArgs {
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub family: Option<Vec<Family>>,
    #[arg(long)]
    pub oversample: Option<usize>,
    #[arg(long)]
    pub memory_budget: Option<usize>,
}

fn flag(b: bool) -> Option<bool> {
    b.then_some(true)
}

impl CommonArgs {
    fn layer(&self) -> RunConfig {
        RunConfig {
            out: self.out.clone(),
            threads: self.threads,
            seed: self.seed,
            ..Default::default()
        }
    }
}

impl ProfileArgs {
    fn layer(&self) -> Result<RunConfig, CliError> {
        let domain = match self.domain.as_deref() {
            None => None,
            Some([lo, hi]) => Some([*lo, *hi]),
            Some(_) => return Err(CliError::Usage("--domain takes two values: lo,hi".into())),
        };
        Ok(RunConfig {
            profile: self.profile.clone(),
            params: self.params.clone(),
            domain,
            radius: self.radius,
            ..Default::default()
        })
    }
}

impl LabArgs {
    fn layer(&self) -> RunConfig {
        RunConfig {
            p: self.p.clone(),
            family: self.family.clone(),
            oversample: self.oversample,
            memory_budget: self.memory_budget,
            ..Default::default()
        }
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Analyze { .. } => "analyze",
            Command::Partition { .. } => "partition",
            Command::Verify { .. } => "verify",
            Command::Experiment { .. } => "experiment",
            Command::Prop5 { .. } => "prop5",
            Command::LemmaCheck { .. } => "lemma-check",
        }
    }

    fn common(&self) -> &CommonArgs {
        match self {
            Command::Analyze { common, .. }
            | Command::Partition { common, .. }
            | Command::Verify { common, .. }
            | Command::Experiment { common, .. }
            | Command::Prop5 { common, .. }
            | Command::LemmaCheck { common, .. } => common,
        }
    }

    /// The values given on the command line, as a config layer.
    fn flags(&self) -> Result<RunConfig, CliError> {
        let base = self.common().layer();
        let layer = match self {
            Command::Analyze { profile, samples, .. } => RunConfig {
                samples: *samples,
                ..profile.layer()?
            },
            Command::Partition {
                profile,
                delta,
                containment,
                ..
            } => RunConfig {
                delta: delta.clone(),
                containment: *containment,
                ..profile.layer()?
            },
            Command::Verify {
                profile,
                delta,
                manifest,
                containment,
                caps,
                cert_samples,
                ..
            } => RunConfig {
                delta: delta.clone(),
                manifest: manifest.clone(),
                containment: *containment,
                caps: *caps,
                cert_samples: *cert_samples,
                ..profile.layer()?
            },
            Command::Experiment {
                lab,
                preset,
                delta,
                q,
                spacing_factor,
                meridian,
                timing,
                ..
            } => RunConfig {
                preset: preset.clone(),
                delta: delta.clone(),
                q: *q,
                spacing_factor: *spacing_factor,
                meridian: flag(*meridian),
                timing: flag(*timing),
                ..lab.layer()
            },
            Command::Prop5 { lab, tubes, delta, .. } => RunConfig {
                tubes: tubes.clone(),
                delta: delta.clone(),
                ..lab.layer()
            },
            Command::LemmaCheck {
                profile,
                delta,
                n_cone,
                max_order,
                ..
            } => RunConfig {
                delta: delta.map(|d| vec![d]),
                n_cone: *n_cone,
                max_order: *max_order,
                ..profile.layer()?
            },
        };
        Ok(layer.overlay(base))
    }

    /// Config file, then flags, then defaults.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let file = match &self.common().config {
            Some(path) => load_config(path)?,
            None => RunConfig::default(),
        };
        if let Some(c) = &file.command {
            if c != self.name() {
                log::warn!("config was written for {c:?}; running {:?}", self.name());
            }
        }
        file.overlay(self.flags()?).resolve(self.name())
    }
}

fn init_logging() {
    let env = env_logger::Env::default().default_filter_or("info");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

/// Runs one invocation and returns its exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Resolves the configuration, echoes it and runs the pipeline on a pool of
/// the configured size.
pub fn execute(cmd: &Command) -> Result<(), CliError> {
    let cfg = cmd.resolve()?;
    let threads = cfg.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Failed(format!("thread pool: {e}")))?;
    log::info!("{} with {} threads", cmd.name(), pool.current_num_threads());
    pool.install(|| commands::dispatch(cmd.name(), &cfg))
}
