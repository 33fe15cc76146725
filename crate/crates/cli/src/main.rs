//! `umbilic`: generate test surfaces, analyse meshes and run the
//! verification suite. Reports go to stdout (or `--out`) as JSON, or CSV
//! with `--csv`.
//!
//! Exit codes: 0 success, 1 error (including usage errors), 2 validation
//! failure under `--strict`.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use umbilic::config::{Config, THREADS_ENV};
use umbilic::report::ReportFormat;

#[derive(Parser, Debug)]
#[command(name = "umbilic", version, about = "Curvature and rigidity diagnostics for nearly umbilical surfaces")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default)]
pub struct GlobalOpts {
    /// `key = value` config file; flags override it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// emit CSV instead of JSON
    #[arg(long, global = true)]
    pub csv: bool,
    /// exit 2 when a checked hypothesis or criterion fails
    #[arg(long, global = true)]
    pub strict: bool,
    /// worker threads (overrides UMB_THREADS)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub quadrature_tol: Option<f64>,
    #[arg(long, global = true)]
    pub bisection_tol: Option<f64>,
    #[arg(long, global = true)]
    pub solver_tol: Option<f64>,
    /// branch threshold on ‖A⁰‖²
    #[arg(long, global = true)]
    pub delta0_sq: Option<f64>,
    #[arg(long, global = true)]
    pub projection_slack: Option<f64>,
    #[arg(long, global = true)]
    pub gauss_constant: Option<f64>,
    #[arg(long, global = true)]
    pub fubini_samples: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a generated test surface as OFF/nOFF (or OBJ)
    Generate(GenerateArgs),
    /// Curvature, energy and rigidity report for a mesh
    Analyze(AnalyzeArgs),
    /// Tangent sphere at a vertex, optionally refined by least squares
    FitSphere(FitSphereArgs),
    /// Spherical conformal parametrization (before balancing)
    Parametrize(ParamArgs),
    /// Parametrization followed by Möbius balancing of the half-sphere areas
    Balance(ParamArgs),
    /// γ(ρ) profiles at sampled centres
    SweepGamma(SweepGammaArgs),
    /// Run the acceptance suite, or a single scaling family
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Icosphere,
    Harmonic,
    CodimLift,
    Ellipsoid,
    Neck,
    Torus,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long, default_value_t = 3)]
    pub level: u32,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// spherical-harmonic degree
    #[arg(long, default_value_t = 2)]
    pub l: u32,
    /// spherical-harmonic order
    #[arg(long, default_value_t = 2, allow_hyphen_values = true)]
    pub m: i32,
    /// ambient dimension of the codimension lift
    #[arg(long, default_value_t = 4)]
    pub dim: usize,
    /// ellipsoid semi-axes
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1.0, 1.2])]
    pub axes: Vec<f64>,
    /// neck radius
    #[arg(long, default_value_t = 0.1)]
    pub neck: f64,
    #[arg(long, default_value_t = 48)]
    pub segments: usize,
    #[arg(long, default_value_t = 2.0)]
    pub major: f64,
    #[arg(long, default_value_t = 0.7)]
    pub minor: f64,
    /// vertex jitter relative to the mean edge length
    #[arg(long)]
    pub jitter: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// output path; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// input mesh (.off, .noff, .obj); stdin when omitted or `-`
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// stop after curvature and energy
    #[arg(long)]
    pub skip_conformal: bool,
}

#[derive(Args, Debug)]
pub struct FitSphereArgs {
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    /// tangency vertex; the Fubini-selected vertex when omitted
    #[arg(long)]
    pub xi: Option<usize>,
    /// refine with the least-squares fit
    #[arg(long)]
    pub lsq: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ParamArgs {
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    /// also write the spherical image mesh here
    #[arg(long)]
    pub image: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepGammaArgs {
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    /// number of evenly strided centre vertices
    #[arg(long, default_value_t = 1)]
    pub centers: usize,
    /// radii per centre (default: `rho_samples` from the config)
    #[arg(long)]
    pub rhos: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// `(1 + ε Y₂₂) x` in R³
    Harmonic,
    /// `(x, ε Y₂₂)` in R^dim
    Lift,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// run one scaling family instead of the full suite
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// `lo:hi:count`, geometrically spaced
    #[arg(long, default_value = "0.01:0.1:4")]
    pub eps: String,
    #[arg(long, default_value_t = 4)]
    pub level: u32,
    #[arg(long, default_value_t = 4)]
    pub dim: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl GlobalOpts {
    /// Defaults, then the config file, then `UMB_THREADS`, then flags.
    pub fn config(&self) -> umbilic::Result<Config> {
        let cfg = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        let mut cfg = cfg.with_env()?;
        let flags: [(&str, Option<String>); 8] = [
            ("threads", self.threads.map(|v| v.to_string())),
            ("quadrature_tol", self.quadrature_tol.map(|v| v.to_string())),
            ("bisection_tol", self.bisection_tol.map(|v| v.to_string())),
            ("solver_tol", self.solver_tol.map(|v| v.to_string())),
            ("delta0_sq", self.delta0_sq.map(|v| v.to_string())),
            ("projection_slack", self.projection_slack.map(|v| v.to_string())),
            ("gauss_constant", self.gauss_constant.map(|v| v.to_string())),
            ("fubini_samples", self.fubini_samples.map(|v| v.to_string())),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        if self.csv {
            cfg.format = ReportFormat::Csv;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let cfg = match cli.global.config() {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Some(n) = cfg.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} threads ({THREADS_ENV}): {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli.command, &cfg, cli.global.strict) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
