use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;
use umbilic::config::Config;
use umbilic::conformal::{moebius_balance_tol, parametrize_sphere_tol, MoebiusTransform, SphericalParam};
use umbilic::geometry::curvature;
use umbilic::mesh::io::{parse_obj, parse_off, write_off};
use umbilic::mesh::{load_mesh, normalize_area, save_mesh};
use umbilic::monotonicity::{default_rho_grid, gamma_profile, sample_vertices, select_fubini_center};
use umbilic::pipeline::analyze;
use umbilic::report::{float, render, Tabular};
use umbilic::spherefit::{lsq_sphere_oracle, tangent_sphere};
use umbilic::surfgen::{generate, FamilySpec, Jitter};
use umbilic::verify::{family_rows, family_slopes, run_all, FamilyRow, Outcome};
use umbilic::{EmbeddedMesh, Error, Result};

use crate::{Command, Family, GenerateArgs, Kind, VerifyArgs};

/// Runs one subcommand; `Ok(false)` is a validation failure under `strict`.
pub fn run(cmd: &Command, cfg: &Config, strict: bool) -> Result<bool> {
    match cmd {
        Command::Generate(args) => {
            let mesh = generate(&family_spec(args)?)?;
            match &args.out {
                Some(path) => save_mesh(&mesh, path, None)?,
                None => std::io::stdout().write_all(write_off(&mesh).as_bytes())?,
            }
            Ok(true)
        }
        Command::Analyze(args) => {
            let mesh = read_mesh(args.mesh.as_deref())?;
            let summary = analyze(&mesh, cfg, args.skip_conformal)?.summary();
            let text = match cfg.format {
                umbilic::report::ReportFormat::Json => umbilic::report::to_json(&summary)?,
                umbilic::report::ReportFormat::Csv => umbilic::report::to_csv(&summary.report)?,
            };
            emit(&text, args.report.as_deref())?;
            let r = &summary.report;
            Ok(!strict || (r.hypothesis_ok && r.large_branch_ok != Some(false)))
        }
        Command::FitSphere(args) => {
            let mesh = normalize_area(&read_mesh(args.mesh.as_deref())?)?;
            let curv = curvature(&mesh)?;
            let xi = match args.xi {
                Some(v) => v,
                None => select_fubini_center(&mesh, &curv, cfg.fubini_samples).vertex,
            };
            let mut fit = tangent_sphere(&mesh, &curv, xi)?;
            if args.lsq {
                fit = lsq_sphere_oracle(&mesh, &curv, &fit)?;
            }
            emit(&render(&fit, cfg.format)?, args.out.as_deref())?;
            Ok(true)
        }
        Command::Parametrize(args) | Command::Balance(args) => {
            let mesh = normalize_area(&read_mesh(args.mesh.as_deref())?)?;
            let mut param = parametrize_sphere_tol(&mesh, cfg.solver_tol)?;
            if matches!(cmd, Command::Balance(_)) {
                param = moebius_balance_tol(&param, cfg.bisection_tol)?.0;
            }
            if let Some(path) = &args.image {
                save_mesh(&param.image_mesh(3)?, path, None)?;
            }
            emit(&render(&ParamSummary::new(&param), cfg.format)?, args.out.as_deref())?;
            Ok(true)
        }
        Command::SweepGamma(args) => {
            if args.centers == 0 {
                return Err(Error::InvalidSpec("need at least one centre".into()));
            }
            let rhos = args.rhos.unwrap_or(cfg.rho_samples);
            if rhos < 2 {
                return Err(Error::InvalidSpec("need at least two radii".into()));
            }
            let mesh = normalize_area(&read_mesh(args.mesh.as_deref())?)?;
            let curv = curvature(&mesh)?;
            let profiles = sample_vertices(mesh.num_vertices(), args.centers)
                .into_iter()
                .map(|c| gamma_profile(&mesh, &curv, c, &default_rho_grid(&mesh, c, rhos)))
                .collect::<Result<Vec<_>>>()?;
            emit(&render(&profiles, cfg.format)?, args.out.as_deref())?;
            Ok(true)
        }
        Command::Verify(args) => verify(args, cfg, strict),
    }
}

fn family_spec(a: &GenerateArgs) -> Result<FamilySpec> {
    let mut spec = match a.kind {
        Kind::Icosphere => FamilySpec::icosphere(a.level),
        Kind::Harmonic => FamilySpec::harmonic(a.level, a.eps, a.l, a.m),
        Kind::CodimLift => FamilySpec::codim_lift(a.level, a.eps, a.l, a.m, a.dim),
        Kind::Ellipsoid => {
            let axes: [f64; 3] = a
                .axes
                .as_slice()
                .try_into()
                .map_err(|_| Error::InvalidSpec("--axes takes three values".into()))?;
            FamilySpec::ellipsoid(a.level, axes)
        }
        Kind::Neck => FamilySpec::catenoid_neck(a.neck, a.segments),
        Kind::Torus => FamilySpec::torus(a.major, a.minor, a.segments),
    };
    spec.jitter = a.jitter.map(|amplitude| Jitter { seed: a.seed, amplitude });
    Ok(spec)
}

/// Reads a mesh file, or OFF/nOFF/OBJ text from stdin for `None` or `-`.
fn read_mesh(path: Option<&Path>) -> Result<EmbeddedMesh> {
    match path {
        Some(p) if p != Path::new("-") => load_mesh(p, None),
        _ => {
            let mut text = String::new();
            std::io::stdin().read_to_string(&mut text)?;
            let header = text.split_whitespace().next().unwrap_or("");
            if header == "OFF" || header == "nOFF" {
                parse_off(&text)
            } else {
                parse_obj(&text)
            }
        }
    }
}

fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct ParamSummary {
    vertices: usize,
    seed: usize,
    half_areas: [[f64; 2]; 3],
    half_area_dev: f64,
    u_min: f64,
    u_max: f64,
    qc_error_max: f64,
    qc_error_mean: f64,
    transforms: Vec<MoebiusTransform>,
}

impl ParamSummary {
    fn new(p: &SphericalParam) -> Self {
        let qc = &p.quasi_conformal_error;
        ParamSummary {
            vertices: p.num_vertices(),
            seed: p.seed,
            half_areas: p.half_areas,
            half_area_dev: p.half_area_deviation(),
            u_min: p.u.iter().copied().fold(f64::INFINITY, f64::min),
            u_max: p.u.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            qc_error_max: qc.iter().copied().fold(0.0, f64::max),
            qc_error_mean: qc.iter().sum::<f64>() / qc.len().max(1) as f64,
            transforms: p.transforms.clone(),
        }
    }
}

impl Tabular for ParamSummary {
    fn columns(&self) -> Vec<String> {
        ["vertices", "seed", "half_area_dev", "u_min", "u_max", "qc_error_max", "qc_error_mean", "transforms"]
            .map(String::from)
            .to_vec()
    }

    fn rows(&self) -> Vec<Vec<String>> {
        vec![vec![
            self.vertices.to_string(),
            self.seed.to_string(),
            float(self.half_area_dev),
            float(self.u_min),
            float(self.u_max),
            float(self.qc_error_max),
            float(self.qc_error_mean),
            self.transforms.len().to_string(),
        ]]
    }
}

#[derive(Serialize)]
#[serde(transparent)]
struct Suite(Vec<Outcome>);

impl Tabular for Suite {
    fn columns(&self) -> Vec<String> {
        ["id", "name", "passed", "key", "value"].map(String::from).to_vec()
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.0
            .iter()
            .flat_map(|o| {
                let head = [o.id.to_string(), o.name.clone(), o.passed.to_string()];
                if o.measured.is_empty() {
                    return vec![[&head[..], &[String::new(), String::new()]].concat()];
                }
                o.measured
                    .iter()
                    .map(|(k, v)| [&head[..], &[k.clone(), float(*v)]].concat())
                    .collect()
            })
            .collect()
    }
}

/// Per-quantity median constant and log-log slope over a family.
#[derive(Serialize)]
struct ConstantRow {
    quantity: &'static str,
    constant: f64,
    slope: f64,
}

#[derive(Serialize)]
struct FamilyTable {
    family: String,
    ambient_dim: usize,
    level: u32,
    members: Vec<FamilyRow>,
    table: Vec<ConstantRow>,
}

impl Tabular for FamilyTable {
    fn columns(&self) -> Vec<String> {
        ["quantity", "constant", "slope"].map(String::from).to_vec()
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.table
            .iter()
            .map(|r| vec![r.quantity.to_string(), float(r.constant), float(r.slope)])
            .collect()
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    match v.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => v[n / 2],
        n => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

/// `lo:hi:count`, geometrically spaced.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidSpec(format!("expected lo:hi:count, got {text:?}"));
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, count] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let count: usize = count.trim().parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || count < 2 {
        return Err(Error::InvalidSpec(format!("need 0 < lo < hi and count >= 2, got {text:?}")));
    }
    Ok((0..count)
        .map(|k| lo * (hi / lo).powf(k as f64 / (count - 1) as f64))
        .collect())
}

fn verify(args: &VerifyArgs, cfg: &Config, strict: bool) -> Result<bool> {
    let Some(family) = args.family else {
        let outcomes = run_all(cfg);
        for o in &outcomes {
            eprintln!("{}", o.line());
        }
        let ok = outcomes.iter().all(|o| o.passed);
        emit(&render(&Suite(outcomes), cfg.format)?, args.out.as_deref())?;
        return Ok(!strict || ok);
    };
    let eps = parse_grid(&args.eps)?;
    let dim = match family {
        Family::Harmonic => 3,
        Family::Lift => args.dim,
    };
    let rows = family_rows(dim, &eps, args.level, cfg)?;
    let slopes = family_slopes(&rows);
    let col = |f: &dyn Fn(&FamilyRow) -> Option<f64>| median(rows.iter().filter_map(f).collect());
    let table = vec![
        ConstantRow { quantity: "funda", constant: col(&|r| Some(r.report.empirical_constants.funda)), slope: slopes.funda },
        ConstantRow { quantity: "gauss", constant: col(&|r| Some(r.report.empirical_constants.gauss)), slope: slopes.gauss },
        ConstantRow { quantity: "mean", constant: col(&|r| Some(r.report.empirical_constants.mean)), slope: slopes.mean },
        ConstantRow { quantity: "w22", constant: col(&|r| r.report.empirical_constants.w22), slope: slopes.w22 },
        ConstantRow { quantity: "u_inf", constant: col(&|r| r.report.empirical_constants.u_inf), slope: slopes.u_inf },
        ConstantRow { quantity: "u_l2", constant: col(&|r| r.report.empirical_constants.u_l2), slope: slopes.u_l2 },
    ];
    let hypothesis = rows.iter().all(|r| r.report.hypothesis_ok);
    let out = FamilyTable {
        family: format!("{family:?}").to_lowercase(),
        ambient_dim: dim,
        level: args.level,
        members: rows,
        table,
    };
    emit(&render(&out, cfg.format)?, args.out.as_deref())?;
    Ok(!strict || hypothesis)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_grids() {
        let g = parse_grid("0.01:0.1:3").unwrap();
        assert_eq!(g.len(), 3);
        assert!((g[1] - 0.1f64.sqrt() * 0.1).abs() < 1e-15);
        assert!((g[2] - 0.1).abs() < 1e-15);
        for bad in ["0.1:0.01:3", "0:0.1:3", "0.01:0.1:1", "0.01:0.1", "a:b:c"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }
}
