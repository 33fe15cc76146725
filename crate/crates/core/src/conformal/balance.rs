//! Möbius area balancing. The pulled-back area of a face is spread uniformly
//! over its triangle in a fixed stereographic chart; preimages of caps are
//! disks (or half-planes, or disk complements) in every chart, so half-sphere
//! areas are exact for this model and continuous in the dilation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::param::SphericalParam;
use super::stereo::{boost, lorentz_mul, moebius_apply, Lorentz};
use crate::error::{Error, Result};
use crate::linalg::{complete_basis, tree_sum};
use crate::quadrature::{triangle_quadric_area, Quadric, P2};

/// Dilations are confined to `[DILATION_MIN, 1/DILATION_MIN]`.
pub const DILATION_MIN: f64 = 1e-6;
pub const BALANCE_TOL: f64 = 1e-9;
pub const BISECTION_MAX_ITER: usize = 200;

/// `φ = T⁻¹ ∘ (z ↦ z/r) ∘ T` with `T` the stereographic chart from
/// `pole_sign · e_axis`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoebiusTransform {
    /// 1-based
    pub axis: usize,
    pub pole_sign: f64,
    pub dilation: f64,
}

impl MoebiusTransform {
    pub fn lorentz(&self) -> Lorentz {
        boost(self.axis - 1, -self.pole_sign * self.dilation.ln())
    }
}

struct Chart {
    pole: [f64; 3],
    e1: [f64; 3],
    e2: [f64; 3],
    tri: [P2; 3],
    chart_area: f64,
    weight: f64,
}

pub(crate) struct FaceCharts {
    charts: Vec<Chart>,
}

fn dot3(a: &[f64], b: &[f64]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl FaceCharts {
    /// One chart per face, projecting from the point opposite the face.
    pub(crate) fn new(param: &SphericalParam) -> FaceCharts {
        let charts = param
            .faces
            .par_iter()
            .zip(param.face_areas.par_iter())
            .map(|(tri, &weight)| {
                let corners = tri.map(|v| param.base_points[v]);
                let mut c: Vec<f64> = (0..3).map(|k| corners.iter().map(|p| p[k]).sum::<f64>()).collect();
                let n = dot3(&c, &c).sqrt();
                c.iter_mut().for_each(|t| *t /= -n);
                let pole = [c[0], c[1], c[2]];
                let basis = complete_basis(&[c], 3);
                let e1 = [basis[0][0], basis[0][1], basis[0][2]];
                let e2 = [basis[1][0], basis[1][1], basis[1][2]];
                let mut pts: [P2; 3] = corners.map(|x| {
                    let d = 1.0 - dot3(&x, &pole);
                    [dot3(&x, &e1) / d, dot3(&x, &e2) / d]
                });
                let signed = 0.5 * ((pts[1][0] - pts[0][0]) * (pts[2][1] - pts[0][1]) - (pts[2][0] - pts[0][0]) * (pts[1][1] - pts[0][1]));
                if signed < 0.0 {
                    pts.swap(1, 2);
                }
                Chart {
                    pole,
                    e1,
                    e2,
                    tri: pts,
                    chart_area: signed.abs(),
                    weight,
                }
            })
            .collect();
        FaceCharts { charts }
    }

    /// Pulled-back area of `{x : w·(x, 1) > 0}`.
    pub(crate) fn cap_area(&self, w: [f64; 4]) -> f64 {
        let parts: Vec<f64> = self
            .charts
            .par_iter()
            .map(|ch| {
                // w·x + w₄ > 0 with x the inverse chart image of p becomes
                // (w·P + w₄)|p|² + 2 w_t·p + (w₄ − w·P) > 0
                let wp = dot3(&w, &ch.pole);
                let g = Quadric {
                    alpha: -(wp + w[3]),
                    beta: [-dot3(&w, &ch.e1), -dot3(&w, &ch.e2)],
                    gamma: w[3] - wp,
                };
                let inside = triangle_quadric_area(&ch.tri, &g).clamp(0.0, ch.chart_area);
                ch.weight * inside / ch.chart_area
            })
            .collect();
        tree_sum(&parts)
    }
}

/// `[area_g(S_i⁺), area_g(S_i⁻)]` for the images under `l`.
pub(crate) fn half_areas(charts: &FaceCharts, l: &Lorentz) -> [[f64; 2]; 3] {
    std::array::from_fn(|i| {
        let w = l[i];
        [charts.cap_area(w), charts.cap_area(w.map(|t| -t))]
    })
}

fn dilation_area_with(charts: &FaceCharts, l: &Lorentz, axis: usize, r: f64) -> f64 {
    let m = lorentz_mul(&boost(axis, -r.ln()), l);
    charts.cap_area(m[axis].map(|t| -t))
}

/// `area_g(T⁻¹(B_r(0)))` for the chart `T` from `+e_axis` (0-based axis);
/// increasing in `r`.
pub fn dilation_area(param: &SphericalParam, axis: usize, r: f64) -> f64 {
    dilation_area_with(&FaceCharts::new(param), &param.lorentz, axis, r)
}

/// Several samples of [`dilation_area`] sharing one chart build.
pub fn dilation_area_curve(param: &SphericalParam, axis: usize, radii: &[f64]) -> Vec<f64> {
    let charts = FaceCharts::new(param);
    radii.iter().map(|&r| dilation_area_with(&charts, &param.lorentz, axis, r)).collect()
}

fn solve_dilation(area: impl Fn(f64) -> f64, target: f64, axis: usize, tol: f64) -> Result<f64> {
    let f0 = area(0.0) - target;
    if f0.abs() <= tol {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (DILATION_MIN.ln(), -DILATION_MIN.ln());
    if area(lo) - target > 0.0 || area(hi) - target < 0.0 {
        return Err(Error::BisectionFailure { axis: axis + 1 });
    }
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        let fm = area(mid) - target;
        if fm.abs() <= tol {
            return Ok(mid);
        }
        if fm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::BisectionFailure { axis: axis + 1 })
}

/// Balances the half-sphere areas along e₃, e₂, e₁ in turn. Each pass fixes
/// the half-spheres of the other axes, so the earlier splits survive.
pub fn moebius_balance(param: &SphericalParam) -> Result<(SphericalParam, Vec<MoebiusTransform>)> {
    moebius_balance_tol(param, BALANCE_TOL)
}

/// [`moebius_balance`] with an explicit bisection tolerance on the half-area.
pub fn moebius_balance_tol(param: &SphericalParam, tol: f64) -> Result<(SphericalParam, Vec<MoebiusTransform>)> {
    let charts = FaceCharts::new(param);
    let target = 0.5 * param.total_area();
    let mut out = param.clone();
    let mut passes = Vec::with_capacity(3);
    for axis in [2, 1, 0] {
        let log_r = solve_dilation(|s| dilation_area_with(&charts, &out.lorentz, axis, s.exp()), target, axis, tol)?;
        let pass = MoebiusTransform {
            axis: axis + 1,
            pole_sign: 1.0,
            dilation: log_r.exp(),
        };
        let b = pass.lorentz();
        for v in 0..out.points.len() {
            let (_, s) = moebius_apply(&b, &out.points[v]);
            out.u_moebius[v] += s.ln();
        }
        out.lorentz = lorentz_mul(&b, &out.lorentz);
        out.points = out.base_points.iter().map(|x| moebius_apply(&out.lorentz, x).0).collect();
        passes.push(pass);
    }
    out.transforms.extend(passes.iter().copied());
    out.refresh(&charts);
    Ok((out, passes))
}

/// `log s` with `Λ·(x, 1) = s·(φ(x), 1)`: the change of `u` under the
/// composite map, for checking the per-pass additive law.
pub fn composite_log_scale(l: &Lorentz, x: &[f64; 3]) -> f64 {
    moebius_apply(l, x).1.ln()
}
