//! JSON and CSV output for reports. JSON floats use the shortest
//! representation that parses back to the same bits; CSV floats carry 17
//! significant digits.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monotonicity::MonotonicityProfile;
use crate::rigidity::RigidityReport;
use crate::spherefit::SphereFit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::InvalidSpec(format!("unknown report format {other:?}"))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        })
    }
}

/// Flat row view of a report for CSV output.
pub trait Tabular {
    fn columns(&self) -> Vec<String>;
    fn rows(&self) -> Vec<Vec<String>>;
}

pub fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

impl Tabular for RigidityReport {
    fn columns(&self) -> Vec<String> {
        [
            "ambient_dim",
            "chi",
            "a0_l2",
            "a_l2",
            "funda_deficit",
            "gauss_deficit",
            "mean_deficit",
            "w22_deficit",
            "u_inf",
            "u_l2",
            "half_area_dev",
            "c_funda",
            "c_gauss",
            "c_mean",
            "c_w22",
            "c_u_inf",
            "c_u_l2",
            "e_n",
            "hypothesis_ok",
            "delta0_sq",
            "sphere_fields",
            "large_branch_constant",
            "large_branch_ok",
        ]
        .map(String::from)
        .to_vec()
    }

    fn rows(&self) -> Vec<Vec<String>> {
        let c = &self.empirical_constants;
        let fields = serde_json::to_value(self.sphere_fields)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        vec![vec![
            self.ambient_dim.to_string(),
            self.chi.to_string(),
            float(self.a0_l2),
            float(self.a_l2),
            float(self.funda_deficit),
            float(self.gauss_deficit),
            float(self.mean_deficit),
            opt(self.w22_deficit),
            opt(self.u_inf),
            opt(self.u_l2),
            opt(self.half_area_dev),
            float(c.funda),
            float(c.gauss),
            float(c.mean),
            opt(c.w22),
            opt(c.u_inf),
            opt(c.u_l2),
            float(self.e_n),
            self.hypothesis_ok.to_string(),
            float(self.delta0_sq),
            fields,
            opt(self.large_branch_constant),
            self.large_branch_ok.map(|b| b.to_string()).unwrap_or_default(),
        ]]
    }
}

impl Tabular for MonotonicityProfile {
    fn columns(&self) -> Vec<String> {
        ["center", "rho", "gamma"].map(String::from).to_vec()
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.rho_samples
            .iter()
            .zip(&self.gamma)
            .map(|(r, g)| vec![self.center.to_string(), float(*r), float(*g)])
            .collect()
    }
}

impl Tabular for SphereFit {
    fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = (0..self.center.len()).map(|i| format!("center_{i}")).collect();
        cols.extend(
            ["radius", "l2_dist_sq", "hausdorff", "mean_deficit", "vertex_residual", "xi"].map(String::from),
        );
        cols
    }

    fn rows(&self) -> Vec<Vec<String>> {
        let mut row: Vec<String> = self.center.iter().map(|&c| float(c)).collect();
        row.extend([
            float(self.radius),
            float(self.l2_dist_sq),
            float(self.hausdorff),
            float(self.mean_deficit),
            float(self.vertex_residual),
            self.xi.map(|v| v.to_string()).unwrap_or_default(),
        ]);
        vec![row]
    }
}

/// Reports stacked row-wise under the first report's header.
impl<T: Tabular> Tabular for Vec<T> {
    fn columns(&self) -> Vec<String> {
        self.first().map(Tabular::columns).unwrap_or_default()
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.iter().flat_map(Tabular::rows).collect()
    }
}

pub fn to_json<T: Serialize + ?Sized>(report: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| Error::Serialize(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn to_csv<T: Tabular + ?Sized>(report: &T) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let ser = |e: csv::Error| Error::Serialize(e.to_string());
    w.write_record(report.columns()).map_err(ser)?;
    for row in report.rows() {
        w.write_record(row).map_err(ser)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialize(e.to_string()))
}

pub fn render<T: Serialize + Tabular + ?Sized>(report: &T, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => to_json(report),
        ReportFormat::Csv => to_csv(report),
    }
}

pub fn save_report<T: Serialize + Tabular + ?Sized>(report: &T, path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    std::fs::write(path, render(report, format)?)?;
    Ok(())
}

/// Reads a JSON report written by [`save_report`].
pub fn load_report<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Serialize(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile() -> MonotonicityProfile {
        MonotonicityProfile {
            center: 7,
            center_point: vec![0.0, 0.0, 1.0],
            rho_samples: vec![0.1, 0.2, 0.4],
            gamma: vec![std::f64::consts::PI, 3.1415926535897936, 1.0 / 3.0],
            deficit_total: 1e-300,
            deficit_annulus: 0.1 + 0.2,
            theta_infinity_proxy: 1.0 / 3.0,
            first_variation_residual: -0.0,
        }
    }

    #[test]
    fn csv_has_one_row_per_radius() {
        let text = to_csv(&profile()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "center,rho,gamma");
        let g: f64 = lines[2].split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(g.to_bits(), 3.1415926535897936f64.to_bits());
    }

    #[test]
    fn unwritable_path() {
        let err = save_report(&profile(), "/nonexistent/dir/out.json", ReportFormat::Json).unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }

    #[test]
    fn format_names() {
        assert_eq!("CSV".parse::<ReportFormat>().unwrap(), ReportFormat::Csv);
        assert_eq!(ReportFormat::Json.to_string(), "json");
        assert!("xml".parse::<ReportFormat>().is_err());
    }
}
