//! Run configuration: tolerances, the large-deficit threshold, parallelism
//! and output format. Files use one `key = value` per line; `#` starts a
//! comment.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::conformal::{BALANCE_TOL, SOLVER_TOL};
use crate::error::{Error, Result};
use crate::report::ReportFormat;

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "UMB_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    /// monotonicity slack, relative to `1 + γ`; the telescoping identity is
    /// checked at twice this
    pub quadrature_tol: f64,
    /// half-area tolerance of the balancing bisection
    pub bisection_tol: f64,
    /// residual bound of the disk solve in the parametrization
    pub solver_tol: f64,
    /// `‖A⁰‖²` at which reports switch to the large-deficit branch;
    /// `None` means `e_n`
    pub delta0_sq: Option<f64>,
    /// slack in the spectral-gap bound of the degree-one projection
    pub projection_slack: f64,
    /// `C_n` in the pointwise Gauss estimate; `None` means `n − 1`
    pub gauss_constant: Option<f64>,
    pub fubini_samples: usize,
    pub rho_samples: usize,
    /// worker threads; `None` leaves the choice to rayon
    pub threads: Option<usize>,
    pub format: ReportFormat,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            quadrature_tol: 1e-6,
            bisection_tol: BALANCE_TOL,
            solver_tol: SOLVER_TOL,
            delta0_sq: None,
            projection_slack: 1e-2,
            gauss_constant: None,
            fubini_samples: 64,
            rho_samples: 50,
            threads: None,
            format: ReportFormat::Json,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidSpec(format!("bad value {value:?} for {key}")))
}

fn optional<T: FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    match value {
        "" | "auto" | "default" => Ok(None),
        v => parse(key, v).map(Some),
    }
}

impl Config {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "quadrature_tol" => self.quadrature_tol = parse(key, value)?,
            "bisection_tol" => self.bisection_tol = parse(key, value)?,
            "solver_tol" => self.solver_tol = parse(key, value)?,
            "delta0_sq" => self.delta0_sq = optional(key, value)?,
            "projection_slack" => self.projection_slack = parse(key, value)?,
            "gauss_constant" => self.gauss_constant = optional(key, value)?,
            "fubini_samples" => self.fubini_samples = parse(key, value)?,
            "rho_samples" => self.rho_samples = parse(key, value)?,
            "threads" => self.threads = optional(key, value)?,
            "format" => self.format = parse(key, value)?,
            other => return Err(Error::InvalidSpec(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: format!("expected key = value, got {line:?}"),
            })?;
            cfg.set(k, v).map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Config> {
        Config::parse(&std::fs::read_to_string(path)?)
    }

    /// Applies `UMB_THREADS` when set.
    pub fn with_env(mut self) -> Result<Config> {
        if let Ok(v) = std::env::var(THREADS_ENV) {
            self.threads = optional(THREADS_ENV, v.trim())?;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let tols = [
            ("quadrature_tol", self.quadrature_tol),
            ("bisection_tol", self.bisection_tol),
            ("solver_tol", self.solver_tol),
            ("projection_slack", self.projection_slack),
        ];
        for (k, v) in tols {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidSpec(format!("{k} must be positive, got {v}")));
            }
        }
        if let Some(d) = self.delta0_sq {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::InvalidSpec(format!("delta0_sq must be positive, got {d}")));
            }
        }
        if self.gauss_constant.is_some_and(|c| !(c > 0.0)) {
            return Err(Error::InvalidSpec("gauss_constant must be positive".into()));
        }
        if self.fubini_samples == 0 || self.rho_samples < 2 {
            return Err(Error::InvalidSpec("need at least one Fubini sample and two radii".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidSpec("threads must be at least 1".into()));
        }
        Ok(())
    }

    /// The `key = value` form read back by [`Config::parse`].
    pub fn to_text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("auto".to_string(), |x| format!("{x:e}"));
        format!(
            "quadrature_tol = {:e}\nbisection_tol = {:e}\nsolver_tol = {:e}\ndelta0_sq = {}\nprojection_slack = {:e}\n\
             gauss_constant = {}\nfubini_samples = {}\nrho_samples = {}\nthreads = {}\nformat = {}\n",
            self.quadrature_tol,
            self.bisection_tol,
            self.solver_tol,
            opt(self.delta0_sq),
            self.projection_slack,
            opt(self.gauss_constant),
            self.fubini_samples,
            self.rho_samples,
            self.threads.map_or("auto".to_string(), |t| t.to_string()),
            self.format,
        )
    }
}
