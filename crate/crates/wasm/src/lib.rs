//! Browser bindings: generate a test surface and analyse it, sample γ(ρ)
//! at a vertex, and show the Möbius balancing of the half-sphere areas.
//! Every entry point returns a JSON string for the page to plot.
//!
//! Build with `wasm-pack build --target web crates/wasm` and serve `www/`.

use serde::Serialize;
use umbilic::conformal::{moebius_balance, parametrize_sphere, MoebiusTransform};
use umbilic::geometry::curvature;
use umbilic::monotonicity::{default_rho_grid, gamma_profile};
use umbilic::pipeline::{analyze, AnalysisSummary};
use umbilic::surfgen::{generate, FamilySpec};
use umbilic::{config::Config, EmbeddedMesh};
use wasm_bindgen::prelude::*;

/// Largest subdivision level offered in the browser.
pub const MAX_LEVEL: u32 = 4;

/// `kind` is one of `icosphere`, `harmonic`, `lift`, `ellipsoid`, `neck`;
/// `param` is ε, the long semi-axis or the neck radius.
pub fn spec(kind: &str, level: u32, param: f64) -> Result<FamilySpec, String> {
    if level > MAX_LEVEL {
        return Err(format!("level {level} is above {MAX_LEVEL}"));
    }
    Ok(match kind {
        "icosphere" => FamilySpec::icosphere(level),
        "harmonic" => FamilySpec::harmonic(level, param, 2, 2),
        "lift" => FamilySpec::codim_lift(level, param, 2, 2, 4),
        "ellipsoid" => FamilySpec::ellipsoid(level, [1.0, 1.0, param]),
        "neck" => FamilySpec::catenoid_neck(param, 12 << level.min(3)),
        other => return Err(format!("unknown surface kind {other:?}")),
    })
}

fn build(kind: &str, level: u32, param: f64) -> Result<EmbeddedMesh, String> {
    generate(&spec(kind, level, param)?).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Shape {
    summary: AnalysisSummary,
    /// first three coordinates of every vertex, flattened
    positions: Vec<f64>,
    faces: Vec<[usize; 3]>,
    /// `|A⁰|²` per vertex, for colouring
    a0_sq: Vec<f64>,
}

pub fn analyze_json(kind: &str, level: u32, param: f64) -> Result<String, String> {
    let mesh = build(kind, level, param)?;
    let a = analyze(&mesh, &Config::default(), false).map_err(|e| e.to_string())?;
    let n = a.mesh.ambient_dim();
    let shape = Shape {
        positions: a.mesh.positions().chunks(n).flat_map(|p| p[..3].to_vec()).collect(),
        faces: a.mesh.faces().to_vec(),
        a0_sq: (0..a.mesh.num_vertices()).map(|v| a.curvature.a0_norm_sq(v)).collect(),
        summary: a.summary(),
    };
    serde_json::to_string(&shape).map_err(|e| e.to_string())
}

pub fn gamma_json(kind: &str, level: u32, param: f64, center: usize, count: usize) -> Result<String, String> {
    let mesh = build(kind, level, param)?;
    let curv = curvature(&mesh).map_err(|e| e.to_string())?;
    if center >= mesh.num_vertices() {
        return Err(format!("vertex {center} is not on the mesh"));
    }
    let rhos = default_rho_grid(&mesh, center, count.max(2));
    let p = gamma_profile(&mesh, &curv, center, &rhos).map_err(|e| e.to_string())?;
    serde_json::to_string(&p).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Balance {
    before: [[f64; 2]; 3],
    after: [[f64; 2]; 3],
    transforms: Vec<MoebiusTransform>,
    /// images on S² after balancing, flattened
    points: Vec<f64>,
}

pub fn balance_json(kind: &str, level: u32, param: f64) -> Result<String, String> {
    let mesh = build(kind, level, param)?;
    let before = parametrize_sphere(&mesh).map_err(|e| e.to_string())?;
    let (after, transforms) = moebius_balance(&before).map_err(|e| e.to_string())?;
    let out = Balance {
        before: before.half_areas,
        after: after.half_areas,
        transforms,
        points: after.points.iter().flatten().copied().collect(),
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = analyzeSurface)]
pub fn analyze_surface(kind: &str, level: u32, param: f64) -> Result<String, String> {
    analyze_json(kind, level, param)
}

#[wasm_bindgen(js_name = gammaProfile)]
pub fn gamma_profile_js(kind: &str, level: u32, param: f64, center: usize, count: usize) -> Result<String, String> {
    gamma_json(kind, level, param, center, count)
}

#[wasm_bindgen(js_name = balanceSphere)]
pub fn balance_sphere(kind: &str, level: u32, param: f64) -> Result<String, String> {
    balance_json(kind, level, param)
}
