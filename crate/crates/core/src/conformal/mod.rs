//! Spherical conformal parametrization of genus-zero meshes, Möbius
//! balancing of half-sphere areas, and the inverted surface used to bound
//! the conformal factor.

mod balance;
mod param;
mod stereo;

pub use balance::{
    composite_log_scale, dilation_area, dilation_area_curve, moebius_balance, moebius_balance_tol, MoebiusTransform,
    BALANCE_TOL,
    BISECTION_MAX_ITER, DILATION_MIN,
};
pub use param::{
    distortion, dual_area_factor, parametrize_sphere, parametrize_sphere_tol, quasi_conformal_errors, spherical_triangle_area,
    SphericalParam,
    SMOOTHING_ITERS, SOLVER_TOL,
};
pub use stereo::{
    boost, conformal_factor_of_inversion, inverse_stereographic, inversion, lorentz_identity, lorentz_mul,
    moebius_apply, stereographic, Lorentz, Pole, POLE_TOL,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dist, norm};
use crate::mesh::EmbeddedMesh;

/// Closest approach of the surface to the inversion pole.
pub const POLE_CLEARANCE: f64 = 1e-9;
const BILIPSCHITZ_PAIRS: usize = 2000;

/// `f̂ = Φ ∘ f ∘ Φ⁻¹` on the plane, with the pole vertex removed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvertedSurface {
    pub pole_vertex: usize,
    /// original index of each kept vertex
    pub vertex_map: Vec<usize>,
    /// `f̂(z)` in R^n
    pub positions: Vec<Vec<f64>>,
    /// `z = Φ(x)` in the plane `x₃ = 0`
    pub plane: Vec<[f64; 2]>,
    /// faces of the open surface, in kept-vertex indices
    pub faces: Vec<[usize; 3]>,
    /// `û` shifted so its value at the removed pole, `λ̂`, is zero
    pub u_hat: Vec<f64>,
    pub lambda_hat: f64,
    pub osc: f64,
    /// `|f̂(z) − f̂(w)| / |z − w|` over random vertex pairs
    pub bilipschitz: Vec<f64>,
    /// translation applied to the surface so the pole vertex sits at e₃
    pub translation: Vec<f64>,
}

impl InvertedSurface {
    pub fn bilipschitz_range(&self) -> (f64, f64) {
        self.bilipschitz
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)))
    }
}

/// Inverts surface and parametrization through `Φ`. The vertex whose image
/// is closest to e₃ is moved to e₃ by a translation of the surface and
/// dropped; `û(Φ(x)) = u(x) − 2 log(|f(x) − e₃| / |x − e₃|)`.
pub fn inversion_surface(mesh: &EmbeddedMesh, param: &SphericalParam) -> Result<InvertedSurface> {
    let nv = mesh.num_vertices();
    if param.num_vertices() != nv {
        return Err(Error::InvalidSpec("parametrization does not match mesh".into()));
    }
    let pole = (0..nv)
        .max_by(|&a, &b| param.points[a][2].total_cmp(&param.points[b][2]))
        .unwrap_or(0);
    let mut translation = mesh.position(pole).iter().map(|x| -x).collect::<Vec<f64>>();
    translation[2] += 1.0;

    let mut vertex_map = Vec::with_capacity(nv - 1);
    let mut new_index = vec![usize::MAX; nv];
    let mut positions = Vec::with_capacity(nv - 1);
    let mut plane = Vec::with_capacity(nv - 1);
    let mut u_hat = Vec::with_capacity(nv - 1);
    for v in 0..nv {
        if v == pole {
            continue;
        }
        let f: Vec<f64> = mesh.position(v).iter().zip(&translation).map(|(a, b)| a + b).collect();
        let mut fe = f.clone();
        fe[2] -= 1.0;
        let f_gap = norm(&fe);
        if f_gap < POLE_CLEARANCE {
            return Err(Error::PoleOnSurface(v));
        }
        let x = param.points[v];
        let x_gap = dist(&x, &[0.0, 0.0, 1.0]);
        let z = inversion(&x)?;
        new_index[v] = vertex_map.len();
        vertex_map.push(v);
        positions.push(inversion(&f)?);
        plane.push([z[0], z[1]]);
        u_hat.push(param.u[v] - 2.0 * (f_gap / x_gap).ln());
    }
    let faces: Vec<[usize; 3]> = param
        .faces
        .iter()
        .filter(|f| !f.contains(&pole))
        .map(|f| f.map(|v| new_index[v]))
        .collect();

    let ring: Vec<f64> = mesh.topology().neighbors(pole).iter().map(|&v| u_hat[new_index[v]]).collect();
    let lambda_hat = ring.iter().sum::<f64>() / ring.len() as f64;
    u_hat.iter_mut().for_each(|u| *u -= lambda_hat);
    let (lo, hi) = u_hat.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &u| (lo.min(u), hi.max(u)));

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let m = vertex_map.len();
    let mut bilipschitz = Vec::with_capacity(BILIPSCHITZ_PAIRS);
    while bilipschitz.len() < BILIPSCHITZ_PAIRS.min(m * (m - 1) / 2) {
        let a = rng.random_range(0..m);
        let b = rng.random_range(0..m);
        if a == b {
            continue;
        }
        let dz = dist(&plane[a], &plane[b]);
        if dz <= 0.0 {
            continue;
        }
        bilipschitz.push(dist(&positions[a], &positions[b]) / dz);
    }
    Ok(InvertedSurface {
        pole_vertex: pole,
        vertex_map,
        positions,
        plane,
        faces,
        u_hat,
        lambda_hat,
        osc: hi - lo,
        bilipschitz,
        translation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfSmallReport {
    pub delta: f64,
    /// `osc u` on the closed lower and upper half-spheres
    pub osc_lower: f64,
    pub osc_upper: f64,
    pub osc: f64,
    /// range of `|f(x) − e₃| / |x − e₃|` on S₃⁻
    pub quotient_lower: [f64; 2],
    /// range of `|f(x) + e₃| / |x + e₃|` on S₃⁺
    pub quotient_upper: [f64; 2],
    /// both quotient ranges inside `[1 − δ, 1 + δ]`
    pub quotient_ok: bool,
    pub p_vertex: usize,
    pub u_at_p: f64,
    /// `min u ≤ 0 ≤ max u`
    pub sign_change: bool,
    pub u_inf: f64,
    /// `‖u‖_∞ ≤ osc u + |u(p)|`
    pub bound_ok: bool,
}

/// Bounds `‖u‖_∞` for a surface already aligned with its
/// parametrization (`f ≈ id`). `delta` bounds `‖f − id‖_∞`.
pub fn conf_small_check(mesh: &EmbeddedMesh, param: &SphericalParam, delta: f64) -> Result<ConfSmallReport> {
    let nv = mesh.num_vertices();
    if param.num_vertices() != nv {
        return Err(Error::InvalidSpec("parametrization does not match mesh".into()));
    }
    let mut lower = (f64::INFINITY, f64::NEG_INFINITY);
    let mut upper = (f64::INFINITY, f64::NEG_INFINITY);
    let mut q_lower = [f64::INFINITY, 0.0f64];
    let mut q_upper = [f64::INFINITY, 0.0f64];
    let quotient = |f: &[f64], x: &[f64; 3], s: f64| {
        let mut fe = f.to_vec();
        fe[2] -= s;
        let mut xe = x.to_vec();
        xe[2] -= s;
        norm(&fe) / norm(&xe)
    };
    for v in 0..nv {
        let x = param.points[v];
        let f = mesh.position(v);
        let u = param.u[v];
        if x[2] <= 0.0 {
            lower = (lower.0.min(u), lower.1.max(u));
            let q = quotient(f, &x, 1.0);
            q_lower = [q_lower[0].min(q), q_lower[1].max(q)];
        }
        if x[2] >= 0.0 {
            upper = (upper.0.min(u), upper.1.max(u));
            let q = quotient(f, &x, -1.0);
            q_upper = [q_upper[0].min(q), q_upper[1].max(q)];
        }
    }
    let (umin, umax) = param.u.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &u| (a.min(u), b.max(u)));
    let p_vertex = (0..nv).min_by(|&a, &b| param.u[a].abs().total_cmp(&param.u[b].abs())).unwrap_or(0);
    let u_at_p = param.u[p_vertex];
    let u_inf = umax.abs().max(umin.abs());
    let osc = umax - umin;
    let within = |q: [f64; 2]| q[0] >= 1.0 - delta && q[1] <= 1.0 + delta;
    Ok(ConfSmallReport {
        delta,
        osc_lower: (lower.1 - lower.0).max(0.0),
        osc_upper: (upper.1 - upper.0).max(0.0),
        osc,
        quotient_lower: q_lower,
        quotient_upper: q_upper,
        quotient_ok: within(q_lower) && within(q_upper),
        p_vertex,
        u_at_p,
        sign_change: umin <= 0.0 && umax >= 0.0,
        u_inf,
        bound_ok: u_inf <= osc + u_at_p.abs() + 1e-15,
    })
}
