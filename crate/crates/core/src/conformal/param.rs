//! Discrete spherical parametrization: intrinsic harmonic disk layout of the
//! punctured mesh, lifted to S² and lightly smoothed there.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::balance::{half_areas, FaceCharts, MoebiusTransform};
use super::stereo::{inverse_stereographic, lorentz_identity, Lorentz, Pole};
use crate::error::{Error, Result};
use crate::linalg::{conjugate_gradient, cotan_stiffness, dist, CsrMatrix};
use crate::mesh::EmbeddedMesh;
use crate::quadrature::FaceFrame;

pub const SOLVER_TOL: f64 = 1e-10;
pub const SMOOTHING_ITERS: usize = 50;
const SMOOTHING_STEP: f64 = 0.5;
/// Relative window inside which dual areas count as tied for the seed.
const SEED_TIE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalParam {
    /// image of each vertex on the unit sphere of span{e₁, e₂, e₃}
    pub points: Vec<[f64; 3]>,
    /// conformal factor `½ log(dualArea_Σ / dualArea_{S²})` of the current
    /// images, `g ≈ e^{2u} g_{S²}`
    pub u: Vec<f64>,
    /// accumulated `log s` of the Möbius passes applied since layout
    pub u_moebius: Vec<f64>,
    /// vertex mean of per-edge `log(|e|_Σ / |e|_{S²})`, a cross-check of `u`
    pub u_edge: Vec<f64>,
    /// `σ₁/σ₂` of each face map
    pub quasi_conformal_error: Vec<f64>,
    /// `half_areas[i] = [area_g(S_i⁺), area_g(S_i⁻)]`
    pub half_areas: [[f64; 2]; 3],
    pub seed: usize,
    pub faces: Vec<[usize; 3]>,
    /// surface areas of the faces
    pub face_areas: Vec<f64>,
    /// surface edge lengths `[|ab|, |bc|, |ca|]` per face
    pub face_lengths: Vec<[f64; 3]>,
    /// images before any balancing; `points` are their image under `lorentz`
    pub base_points: Vec<[f64; 3]>,
    pub lorentz: Lorentz,
    pub transforms: Vec<MoebiusTransform>,
}

impl SphericalParam {
    pub fn num_vertices(&self) -> usize {
        self.points.len()
    }

    pub fn total_area(&self) -> f64 {
        crate::linalg::tree_sum(&self.face_areas)
    }

    /// `max_i |area_g(S_i^±) − A/2|`, with `A = 4π` on normalized input.
    pub fn half_area_deviation(&self) -> f64 {
        let half = 0.5 * self.total_area();
        self.half_areas
            .iter()
            .flat_map(|p| p.iter())
            .map(|a| (a - half).abs())
            .fold(0.0, f64::max)
    }

    /// The image mesh on S² embedded in R^`dim`.
    pub fn image_mesh(&self, dim: usize) -> Result<EmbeddedMesh> {
        let mut pos = vec![0.0; dim * self.points.len()];
        for (v, p) in self.points.iter().enumerate() {
            pos[v * dim..v * dim + 3].copy_from_slice(p);
        }
        EmbeddedMesh::new(dim, pos, self.faces.clone())
    }

    /// Recomputes `u`, quasi-conformal errors, `u_edge` and half areas from
    /// the current points.
    pub(crate) fn refresh(&mut self, charts: &FaceCharts) {
        self.u = dual_area_factor(&self.points, &self.faces, &self.face_areas);
        self.quasi_conformal_error = quasi_conformal_errors(&self.points, &self.faces, &self.face_lengths);
        self.u_edge = edge_log_ratios(&self.points, &self.faces, &self.face_lengths);
        self.half_areas = half_areas(charts, &self.lorentz);
    }
}

/// Area of the spherical triangle with unit-vector corners.
pub fn spherical_triangle_area(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    let triple = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0]);
    let d = |p: &[f64; 3], q: &[f64; 3]| p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
    2.0 * triple.abs().atan2(1.0 + d(a, b) + d(b, c) + d(c, a))
}

/// `σ₁/σ₂` of a 2×2 matrix given by rows.
pub fn distortion(m: [[f64; 2]; 2]) -> f64 {
    let fro = m[0][0].powi(2) + m[0][1].powi(2) + m[1][0].powi(2) + m[1][1].powi(2);
    let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).abs();
    let disc = (fro * fro - 4.0 * det * det).max(0.0).sqrt();
    let s1 = (0.5 * (fro + disc)).sqrt();
    // σ₂ = det/σ₁ avoids the cancellation in fro − disc
    let s2 = if s1 > 0.0 { det / s1 } else { 0.0 };
    if s2 <= 0.0 {
        f64::INFINITY
    } else {
        (s1 / s2).max(1.0)
    }
}

/// Planar corners of a triangle with edge lengths `[|ab|, |bc|, |ca|]`.
fn layout_lengths(l: &[f64; 3]) -> [[f64; 2]; 3] {
    let (ab, bc, ca) = (l[0], l[1], l[2]);
    let x = (ab * ab + ca * ca - bc * bc) / (2.0 * ab);
    let y = (ca * ca - x * x).max(0.0).sqrt();
    [[0.0, 0.0], [ab, 0.0], [x, y]]
}

pub fn quasi_conformal_errors(points: &[[f64; 3]], faces: &[[usize; 3]], lengths: &[[f64; 3]]) -> Vec<f64> {
    faces
        .par_iter()
        .zip(lengths.par_iter())
        .map(|(&[a, b, c], l)| {
            let src = layout_lengths(l);
            let frame = FaceFrame::new(&points[a], &points[b], &points[c]);
            let dst = frame.local;
            // J · [p1 − p0, p2 − p0] = [q1 − q0, q2 − q0]
            let p = [[src[1][0], src[2][0]], [src[1][1], src[2][1]]];
            let q = [[dst[1][0] - dst[0][0], dst[2][0] - dst[0][0]], [dst[1][1] - dst[0][1], dst[2][1] - dst[0][1]]];
            let det = p[0][0] * p[1][1] - p[0][1] * p[1][0];
            let inv = [[p[1][1] / det, -p[0][1] / det], [-p[1][0] / det, p[0][0] / det]];
            let j: [[f64; 2]; 2] = std::array::from_fn(|r| std::array::from_fn(|s| q[r][0] * inv[0][s] + q[r][1] * inv[1][s]));
            distortion(j)
        })
        .collect()
}

fn edge_log_ratios(points: &[[f64; 3]], faces: &[[usize; 3]], lengths: &[[f64; 3]]) -> Vec<f64> {
    let nv = points.len();
    let mut sum = vec![0.0; nv];
    let mut count = vec![0usize; nv];
    for (tri, l) in faces.iter().zip(lengths) {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let r = (l[k] / dist(&points[a], &points[b])).ln();
            // each undirected edge is seen from both faces; both halves count
            sum[a] += r;
            sum[b] += r;
            count[a] += 1;
            count[b] += 1;
        }
    }
    (0..nv).map(|v| sum[v] / count[v].max(1) as f64).collect()
}

/// `½ log(dualArea_Σ / dualArea_{S²})` with spherical triangle areas.
pub fn dual_area_factor(points: &[[f64; 3]], faces: &[[usize; 3]], face_areas: &[f64]) -> Vec<f64> {
    let nv = points.len();
    let mut surf = vec![0.0; nv];
    let mut sph = vec![0.0; nv];
    for (tri, &a) in faces.iter().zip(face_areas) {
        let s = spherical_triangle_area(&points[tri[0]], &points[tri[1]], &points[tri[2]]);
        for &v in tri {
            surf[v] += a / 3.0;
            sph[v] += s / 3.0;
        }
    }
    (0..nv).map(|v| 0.5 * (surf[v] / sph[v]).ln()).collect()
}

fn choose_seed(dual: &[f64]) -> usize {
    let max = dual.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    dual.iter().position(|&a| a >= max * (1.0 - SEED_TIE)).unwrap_or(0)
}

pub fn parametrize_sphere(mesh: &EmbeddedMesh) -> Result<SphericalParam> {
    parametrize_sphere_tol(mesh, SOLVER_TOL)
}

/// [`parametrize_sphere`] with an explicit bound on the disk-solve residual.
pub fn parametrize_sphere_tol(mesh: &EmbeddedMesh, solver_tol: f64) -> Result<SphericalParam> {
    let chi = mesh.euler_characteristic();
    if chi != 2 || !mesh.is_connected() {
        return Err(Error::NotSphereType(chi));
    }
    let nv = mesh.num_vertices();
    let faces = mesh.faces().to_vec();
    let face_areas = mesh.face_areas();
    let seed = choose_seed(&mesh.dual_areas());
    let link = mesh.topology().neighbors(seed);

    // boundary of the punctured disk onto the unit circle by arc length
    let mut cum = vec![0.0; link.len() + 1];
    for k in 0..link.len() {
        cum[k + 1] = cum[k] + dist(mesh.position(link[k]), mesh.position(link[(k + 1) % link.len()]));
    }
    let perimeter = cum[link.len()];
    let mut plane = vec![[0.0; 2]; nv];
    let mut boundary = vec![false; nv];
    for (k, &v) in link.iter().enumerate() {
        let th = 2.0 * std::f64::consts::PI * cum[k] / perimeter;
        plane[v] = [th.cos(), th.sin()];
        boundary[v] = true;
    }

    let rest: Vec<[usize; 3]> = faces.iter().copied().filter(|f| !f.contains(&seed)).collect();
    let stiff = cotan_stiffness(nv, &rest, |v| mesh.position(v));
    let mut index = vec![usize::MAX; nv];
    let mut interior = Vec::new();
    for v in 0..nv {
        if v != seed && !boundary[v] {
            index[v] = interior.len();
            interior.push(v);
        }
    }
    let ni = interior.len();
    let mut trip = Vec::new();
    let mut rhs = [vec![0.0; ni], vec![0.0; ni]];
    for (i, &v) in interior.iter().enumerate() {
        for (w, val) in stiff.row(v) {
            if index[w] != usize::MAX {
                trip.push((i, index[w], val));
            } else if boundary[w] {
                rhs[0][i] -= val * plane[w][0];
                rhs[1][i] -= val * plane[w][1];
            }
        }
    }
    let lii = CsrMatrix::from_triplets(ni, trip);
    for (c, b) in rhs.iter().enumerate() {
        let (sol, res) = conjugate_gradient(&lii, b, None, 1e-12, 20 * ni + 1000);
        if res > solver_tol {
            return Err(Error::SolverFailure(res));
        }
        for (i, &v) in interior.iter().enumerate() {
            plane[v][c] = sol[i];
        }
    }

    let radius = splitting_dilation(&plane, seed, &faces, &face_areas);

    let mut points: Vec<[f64; 3]> = plane
        .iter()
        .map(|z| inverse_stereographic([radius * z[0], radius * z[1]], Pole::NORTH))
        .collect();
    points[seed] = [0.0, 0.0, 1.0];
    let volume: f64 = faces
        .iter()
        .map(|&[a, b, c]| {
            let (p, q, r) = (points[a], points[b], points[c]);
            p[0] * (q[1] * r[2] - q[2] * r[1]) - p[1] * (q[0] * r[2] - q[2] * r[0]) + p[2] * (q[0] * r[1] - q[1] * r[0])
        })
        .sum();
    if volume < 0.0 {
        points.iter_mut().for_each(|p| p[1] = -p[1]);
    }

    smooth_on_sphere(&mut points, &faces, &cotan_stiffness(nv, &faces, |v| mesh.position(v)));

    let face_lengths: Vec<[f64; 3]> = faces
        .iter()
        .map(|&[a, b, c]| {
            [
                dist(mesh.position(a), mesh.position(b)),
                dist(mesh.position(b), mesh.position(c)),
                dist(mesh.position(c), mesh.position(a)),
            ]
        })
        .collect();
    let mut param = SphericalParam {
        base_points: points.clone(),
        u_moebius: vec![0.0; nv],
        points,
        u: Vec::new(),
        u_edge: Vec::new(),
        quasi_conformal_error: Vec::new(),
        half_areas: [[0.0; 2]; 3],
        seed,
        faces,
        face_areas,
        face_lengths,
        lorentz: lorentz_identity(),
        transforms: Vec::new(),
    };
    let charts = FaceCharts::new(&param);
    param.refresh(&charts);
    Ok(param)
}

/// Dilation of the unit-disk layout after which faces with centroid above
/// the equator carry half the surface area. Left at the unit disk, the seed
/// star would cover the whole upper half-sphere.
fn splitting_dilation(plane: &[[f64; 2]], seed: usize, faces: &[[usize; 3]], areas: &[f64]) -> f64 {
    let s: Vec<f64> = plane.iter().map(|z| z[0] * z[0] + z[1] * z[1]).collect();
    let total: f64 = areas.iter().sum();
    let upper = |log_r: f64| -> f64 {
        let r2 = (2.0 * log_r).exp();
        let height = |v: usize| if v == seed { 1.0 } else { (r2 * s[v] - 1.0) / (r2 * s[v] + 1.0) };
        faces
            .iter()
            .zip(areas)
            .filter(|(f, _)| f.iter().map(|&v| height(v)).sum::<f64>() > 0.0)
            .map(|(_, a)| a)
            .sum()
    };
    let (mut lo, mut hi) = (-30.0, 30.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if upper(mid) < 0.5 * total {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

/// Damped descent of the conformal energy `E_D − A` over points on the
/// sphere. Its gradient is `(L_Σ − L_img) x`: surface cotan weights minus
/// the current image weights, so a face-wise similar image is a fixed point.
fn smooth_on_sphere(points: &mut [[f64; 3]], faces: &[[usize; 3]], stiff: &CsrMatrix) {
    for _ in 0..SMOOTHING_ITERS {
        let image = cotan_stiffness(points.len(), faces, |v| &points[v][..]);
        let next: Vec<[f64; 3]> = (0..points.len())
            .into_par_iter()
            .map(|v| {
                let mut acc = [0.0; 3];
                let mut wsum = 0.0;
                for (w, val) in stiff.row(v) {
                    if w == v {
                        continue;
                    }
                    wsum -= val;
                    for k in 0..3 {
                        acc[k] -= val * (points[w][k] - points[v][k]);
                    }
                }
                for (w, val) in image.row(v) {
                    if w == v {
                        continue;
                    }
                    for k in 0..3 {
                        acc[k] += val * (points[w][k] - points[v][k]);
                    }
                }
                if wsum <= 0.0 {
                    return points[v];
                }
                let mut p: [f64; 3] = std::array::from_fn(|k| points[v][k] + SMOOTHING_STEP * acc[k] / wsum);
                let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                p.iter_mut().for_each(|t| *t /= n);
                p
            })
            .collect();
        points.copy_from_slice(&next);
    }
}
