//! Discrete second fundamental form in arbitrary codimension.
//!
//! Each vertex gets a best-fit tangent plane from the second-moment matrix
//! of its 2-ring; the normal displacements of the 2-ring are then fit by a
//! quadratic map whose Hessian is `A`. The mean curvature vector follows
//! the convention `H = Δ_g f`, so the unit sphere has `H = -2x`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, complete_basis, corner_cot, dot, gram_schmidt_step, norm, norm_sq, sub, tree_sum};
use crate::mesh::EmbeddedMesh;

/// |H| below this counts as vanishing when choosing ν.
pub const NU_TOL: f64 = 1e-8;
const FRAME_RANK_TOL: f64 = 1e-12;
const REFINE_STEPS: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentFrame {
    pub tangent: [Vec<f64>; 2],
    /// orthonormal basis of the normal space, `n - 2` vectors
    pub normal: Vec<Vec<f64>>,
    /// share of second-moment mass outside the fitted plane
    pub residual: f64,
}

impl TangentFrame {
    /// Projects `w` onto the normal space.
    pub fn normal_part(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; w.len()];
        for nu in &self.normal {
            axpy(dot(w, nu), nu, &mut out);
        }
        out
    }
}

/// Per-vertex curvature data; `A` is stored by its three ambient-vector
/// coefficients `A(t_i, t_j)` in the vertex frame.
#[derive(Debug, Clone)]
pub struct CurvatureField {
    pub ambient_dim: usize,
    pub frames: Vec<TangentFrame>,
    pub a11: Vec<Vec<f64>>,
    pub a12: Vec<Vec<f64>>,
    pub a22: Vec<Vec<f64>>,
    pub h: Vec<Vec<f64>>,
    /// Gauss equation `<A11, A22> - |A12|^2`
    pub k_gauss: Vec<f64>,
    /// angle defect over mixed Voronoi area
    pub k_defect: Vec<f64>,
    pub nu: Vec<Vec<f64>>,
    pub dual_areas: Vec<f64>,
    pub mixed_areas: Vec<f64>,
    pub angle_defects: Vec<f64>,
}

impl CurvatureField {
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn a_norm_sq(&self, v: usize) -> f64 {
        norm_sq(&self.a11[v]) + 2.0 * norm_sq(&self.a12[v]) + norm_sq(&self.a22[v])
    }

    pub fn a0_norm_sq(&self, v: usize) -> f64 {
        let d = sub(&self.a11[v], &self.a22[v]);
        0.5 * norm_sq(&d) + 2.0 * norm_sq(&self.a12[v])
    }

    /// Tracefree part `(A0_11, A0_12, A0_22)`.
    pub fn a0(&self, v: usize) -> [Vec<f64>; 3] {
        let half: Vec<f64> = self.h[v].iter().map(|x| 0.5 * x).collect();
        [sub(&self.a11[v], &half), self.a12[v].clone(), sub(&self.a22[v], &half)]
    }

    /// `|A - ν g|^2` at a vertex.
    pub fn funda_deficit_sq(&self, v: usize) -> f64 {
        let nu = &self.nu[v];
        norm_sq(&sub(&self.a11[v], nu)) + 2.0 * norm_sq(&self.a12[v]) + norm_sq(&sub(&self.a22[v], nu))
    }

    /// Dual-area weighted sum of a per-vertex quantity.
    pub fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        let vals: Vec<f64> = (0..self.len()).map(|v| f(v) * self.dual_areas[v]).collect();
        tree_sum(&vals)
    }
}

/// Best-fit tangent planes from the area-weighted second moments of each
/// vertex's 2-ring.
pub fn fit_tangent_frames(mesh: &EmbeddedMesh) -> Result<Vec<TangentFrame>> {
    let dual = mesh.dual_areas();
    (0..mesh.num_vertices())
        .into_par_iter()
        .map(|v| frame_at(mesh, &dual, v))
        .collect()
}

fn frame_at(mesh: &EmbeddedMesh, dual: &[f64], v: usize) -> Result<TangentFrame> {
    let mut stencil = mesh.topology().k_ring(v, 2);
    stencil.push(v);
    let points: Vec<&[f64]> = stencil.iter().map(|&w| mesh.position(w)).collect();
    let weights: Vec<f64> = stencil.iter().map(|&w| dual[w]).collect();
    plane_fit(&points, &weights).ok_or(Error::RankDeficient(v))
}

/// Principal 2-plane of a weighted point set; `None` if the points do not
/// span a plane.
pub fn plane_fit(points: &[&[f64]], weights: &[f64]) -> Option<TangentFrame> {
    let n = points.first()?.len();
    let wsum: f64 = weights.iter().sum();
    let mut mean = vec![0.0; n];
    for (p, w) in points.iter().zip(weights) {
        axpy(w / wsum, p, &mut mean);
    }
    let mut cov = DMatrix::<f64>::zeros(n, n);
    for (p, w) in points.iter().zip(weights) {
        let d = sub(p, &mean);
        for i in 0..n {
            for j in 0..n {
                cov[(i, j)] += w * d[i] * d[j];
            }
        }
    }
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let (l1, l2) = (eig.eigenvalues[order[0]], eig.eigenvalues[order[1]]);
    if !(l1 > 0.0) || !(l2 > FRAME_RANK_TOL * l1) {
        return None;
    }
    let total: f64 = eig.eigenvalues.iter().map(|x| x.max(0.0)).sum();
    let residual = (total - l1 - l2).max(0.0) / total;
    let col = |k: usize| -> Vec<f64> { eig.eigenvectors.column(order[k]).iter().copied().collect() };
    let t1 = gram_schmidt_step(&col(0), &[])?;
    let t2 = gram_schmidt_step(&col(1), std::slice::from_ref(&t1))?;
    let normal = complete_basis(&[t1.clone(), t2.clone()], n);
    Some(TangentFrame {
        tangent: [t1, t2],
        normal,
        residual,
    })
}

struct QuadFit {
    /// gradient per normal direction
    grad: Vec<[f64; 2]>,
    /// Hessian `(h11, h12, h22)` per normal direction
    hess: Vec<[f64; 3]>,
}

/// Least-squares fit of `q(s) = g·s + ½ sᵀ Hess s` to the normal heights of
/// the 2-ring, all normal components at once.
fn quadratic_fit(mesh: &EmbeddedMesh, frame: &TangentFrame, stencil: &[usize], v: usize) -> Result<QuadFit> {
    let m = stencil.len();
    if m < 5 {
        return Err(Error::RankDeficient(v));
    }
    let k = frame.normal.len();
    let x0 = mesh.position(v);
    let mut design = DMatrix::<f64>::zeros(m, 5);
    let mut rhs = DMatrix::<f64>::zeros(m, k);
    for (row, &w) in stencil.iter().enumerate() {
        let d = sub(mesh.position(w), x0);
        let s1 = dot(&d, &frame.tangent[0]);
        let s2 = dot(&d, &frame.tangent[1]);
        design[(row, 0)] = s1;
        design[(row, 1)] = s2;
        design[(row, 2)] = 0.5 * s1 * s1;
        design[(row, 3)] = s1 * s2;
        design[(row, 4)] = 0.5 * s2 * s2;
        for (c, nu) in frame.normal.iter().enumerate() {
            rhs[(row, c)] = dot(&d, nu);
        }
    }
    // column scaling keeps the QR well conditioned at any mesh size
    let mut col_scale = [0.0; 5];
    for (c, s) in col_scale.iter_mut().enumerate() {
        *s = design.column(c).norm();
        if !(*s > 0.0) {
            return Err(Error::RankDeficient(v));
        }
    }
    for c in 0..5 {
        let s = col_scale[c];
        design.column_mut(c).iter_mut().for_each(|x| *x /= s);
    }
    let qr = design.qr();
    let r = qr.r();
    let rmax = (0..5).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if (0..5).any(|i| r[(i, i)].abs() <= 1e-10 * rmax) {
        return Err(Error::RankDeficient(v));
    }
    let qt_b = qr.q().transpose() * rhs;
    let sol = r
        .solve_upper_triangular(&qt_b)
        .ok_or(Error::RankDeficient(v))?;
    let mut grad = Vec::with_capacity(k);
    let mut hess = Vec::with_capacity(k);
    for c in 0..k {
        let p = |i: usize| sol[(i, c)] / col_scale[i];
        grad.push([p(0), p(1)]);
        hess.push([p(2), p(3), p(4)]);
    }
    Ok(QuadFit { grad, hess })
}

/// Fits `A` at every vertex. Frames are refined in place by tilting them
/// along the fitted gradient so that the final fit is a graph over the
/// true tangent plane to second order.
pub fn second_fundamental_form(mesh: &EmbeddedMesh, frames: &[TangentFrame]) -> Result<CurvatureField> {
    let n = mesh.ambient_dim();
    let dual = mesh.dual_areas();
    let mixed = mesh.mixed_areas();
    let defects = mesh.angle_defects();
    let per_vertex: Vec<(TangentFrame, [Vec<f64>; 3])> = (0..mesh.num_vertices())
        .into_par_iter()
        .map(|v| fit_vertex(mesh, frames[v].clone(), v))
        .collect::<Result<_>>()?;

    let nv = mesh.num_vertices();
    let mut field = CurvatureField {
        ambient_dim: n,
        frames: Vec::with_capacity(nv),
        a11: Vec::with_capacity(nv),
        a12: Vec::with_capacity(nv),
        a22: Vec::with_capacity(nv),
        h: Vec::with_capacity(nv),
        k_gauss: Vec::with_capacity(nv),
        k_defect: Vec::with_capacity(nv),
        nu: Vec::with_capacity(nv),
        dual_areas: dual.clone(),
        mixed_areas: mixed.clone(),
        angle_defects: defects.clone(),
    };
    for (v, (frame, [a11, a12, a22])) in per_vertex.into_iter().enumerate() {
        let h: Vec<f64> = a11.iter().zip(&a22).map(|(x, y)| x + y).collect();
        let hn = norm(&h);
        let nu = if hn > NU_TOL {
            h.iter().map(|x| x / hn).collect()
        } else {
            frame.normal[0].clone()
        };
        field.k_gauss.push(dot(&a11, &a22) - norm_sq(&a12));
        field.k_defect.push(defects[v] / mixed[v]);
        field.nu.push(nu);
        field.h.push(h);
        field.a11.push(a11);
        field.a12.push(a12);
        field.a22.push(a22);
        field.frames.push(frame);
    }
    Ok(field)
}

fn fit_vertex(mesh: &EmbeddedMesh, mut frame: TangentFrame, v: usize) -> Result<(TangentFrame, [Vec<f64>; 3])> {
    let n = mesh.ambient_dim();
    let stencil = mesh.topology().k_ring(v, 2);
    let mut fit = quadratic_fit(mesh, &frame, &stencil, v)?;
    for _ in 0..REFINE_STEPS {
        let mut t = frame.tangent.clone();
        for (c, nu) in frame.normal.iter().enumerate() {
            axpy(fit.grad[c][0], nu, &mut t[0]);
            axpy(fit.grad[c][1], nu, &mut t[1]);
        }
        let t1 = gram_schmidt_step(&t[0], &[]).ok_or(Error::RankDeficient(v))?;
        let t2 = gram_schmidt_step(&t[1], std::slice::from_ref(&t1)).ok_or(Error::RankDeficient(v))?;
        frame.normal = complete_basis(&[t1.clone(), t2.clone()], n);
        frame.tangent = [t1, t2];
        fit = quadratic_fit(mesh, &frame, &stencil, v)?;
    }
    let mut a = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for (c, nu) in frame.normal.iter().enumerate() {
        for (slot, coef) in a.iter_mut().zip(fit.hess[c]) {
            axpy(coef, nu, slot);
        }
    }
    Ok((frame, a))
}

/// Convenience: frames followed by the quadratic fit.
pub fn curvature(mesh: &EmbeddedMesh) -> Result<CurvatureField> {
    let frames = fit_tangent_frames(mesh)?;
    second_fundamental_form(mesh, &frames)
}

/// Cotangent Laplacian of the positions divided by the barycentric dual
/// area; an independent discretization of `H = Δ_g f`.
pub fn cotan_mean_curvature(mesh: &EmbeddedMesh) -> Vec<Vec<f64>> {
    let n = mesh.ambient_dim();
    let dual = mesh.dual_areas();
    let mut lap = vec![vec![0.0; n]; mesh.num_vertices()];
    for &[a, b, c] in mesh.faces() {
        let tri = [a, b, c];
        for k in 0..3 {
            // edge opposite corner k
            let o = tri[k];
            let i = tri[(k + 1) % 3];
            let j = tri[(k + 2) % 3];
            let w = 0.5 * corner_cot(mesh.position(o), mesh.position(i), mesh.position(j));
            let d = sub(mesh.position(j), mesh.position(i));
            axpy(w, &d, &mut lap[i]);
            axpy(-w, &d, &mut lap[j]);
        }
    }
    lap.into_iter()
        .zip(dual)
        .map(|(l, a)| l.into_iter().map(|x| x / a).collect())
        .collect()
}

/// Codimension threshold `e_n`.
pub fn e_n(ambient_dim: usize) -> f64 {
    match ambient_dim {
        3 => 4.0 * PI,
        4 => 8.0 * PI / 3.0,
        _ => 2.0 * PI,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub willmore: f64,
    pub a0_l2sq: f64,
    /// angle-defect total, exactly `2πχ`
    pub gauss_bonnet_int: f64,
    /// `∫ K dμ` with `K` from the Gauss equation
    pub gauss_equation_int: f64,
    pub e_n: f64,
    pub tau: f64,
    pub area: f64,
    pub chi: i64,
    /// `‖A⁰‖² < 2 e_n`
    pub hypothesis_ok: bool,
    /// `W - (½‖A⁰‖² + 2πχ)`
    pub identity_residual: f64,
}

pub fn willmore_energy(mesh: &EmbeddedMesh, curv: &CurvatureField) -> EnergyReport {
    let willmore = 0.25 * curv.integrate(|v| norm_sq(&curv.h[v]));
    let a0_l2sq = curv.integrate(|v| curv.a0_norm_sq(v));
    let gauss_bonnet_int = tree_sum(&curv.angle_defects);
    let gauss_equation_int = curv.integrate(|v| curv.k_gauss[v]);
    let chi = mesh.euler_characteristic();
    let en = e_n(mesh.ambient_dim());
    EnergyReport {
        willmore,
        a0_l2sq,
        gauss_bonnet_int,
        gauss_equation_int,
        e_n: en,
        tau: 2.0 * en - a0_l2sq,
        area: mesh.total_area(),
        chi,
        hypothesis_ok: a0_l2sq < 2.0 * en,
        identity_residual: willmore - (0.5 * a0_l2sq + 2.0 * PI * chi as f64),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GaussSource {
    /// `K` from the fitted `A` through the Gauss equation
    #[default]
    Equation,
    /// `K` from angle defects
    Defect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussEstimate {
    pub c_n: f64,
    pub source: GaussSource,
    pub residual: Vec<f64>,
    pub bound: Vec<f64>,
    pub violations: Vec<usize>,
}

impl GaussEstimate {
    pub fn holding_fraction(&self) -> f64 {
        1.0 - self.violations.len() as f64 / self.residual.len().max(1) as f64
    }
}

/// Default constant in `|K - |H/2|²| ≤ C_n |A⁰|²`.
pub fn default_gauss_constant(ambient_dim: usize) -> f64 {
    (ambient_dim - 1) as f64
}

/// Pointwise check of `|K - |H/2|²| ≤ C_n |A⁰|²`; `c_n = None` uses `n - 1`.
pub fn gauss_estimate_check(curv: &CurvatureField, c_n: Option<f64>, source: GaussSource, slack: f64) -> GaussEstimate {
    let c_n = c_n.unwrap_or_else(|| default_gauss_constant(curv.ambient_dim));
    let mut residual = Vec::with_capacity(curv.len());
    let mut bound = Vec::with_capacity(curv.len());
    let mut violations = Vec::new();
    for v in 0..curv.len() {
        let k = match source {
            GaussSource::Equation => curv.k_gauss[v],
            GaussSource::Defect => curv.k_defect[v],
        };
        let r = (k - 0.25 * norm_sq(&curv.h[v])).abs();
        let b = c_n * curv.a0_norm_sq(v);
        if r > b + slack {
            violations.push(v);
        }
        residual.push(r);
        bound.push(b);
    }
    GaussEstimate {
        c_n,
        source,
        residual,
        bound,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfgen::{generate, FamilySpec};

    fn sphere(level: u32) -> EmbeddedMesh {
        generate(&FamilySpec::icosphere(level)).unwrap()
    }

    #[test]
    fn planar_patch_in_r4_has_exact_normal_space() {
        let mut pts = vec![vec![0.0; 4]];
        for ring in 1..=2 {
            for k in 0..6 * ring {
                let a = 2.0 * PI * k as f64 / (6 * ring) as f64 + 0.1 * ring as f64;
                pts.push(vec![ring as f64 * a.cos(), 0.7 * ring as f64 * a.sin(), 0.0, 0.0]);
            }
        }
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let f = plane_fit(&refs, &vec![1.0; refs.len()]).unwrap();
        for nu in &f.normal {
            assert_eq!(nu[0], 0.0);
            assert_eq!(nu[1], 0.0);
        }
        assert!(f.residual < 1e-15);
    }

    #[test]
    fn collinear_points_have_no_plane() {
        let pts: Vec<Vec<f64>> = (0..8).map(|k| vec![k as f64, 2.0 * k as f64, -(k as f64)]).collect();
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        assert!(plane_fit(&refs, &vec![1.0; 8]).is_none());
    }

    #[test]
    fn round_sphere_curvature() {
        let m = sphere(4);
        let c = curvature(&m).unwrap();
        for v in 0..m.num_vertices() {
            let x = m.position(v);
            let err: f64 = c.h[v].iter().zip(x).map(|(h, x)| (h + 2.0 * x).powi(2)).sum::<f64>().sqrt();
            assert!(err < 2e-2, "vertex {v}: {err}");
            assert!(c.a0_norm_sq(v).sqrt() < 2e-2);
            assert!((c.k_gauss[v] - 1.0).abs() < 2e-2);
            let f = &c.frames[v];
            assert!(dot(&f.tangent[0], &f.tangent[1]).abs() < 1e-10);
            for nu in &f.normal {
                assert!(dot(nu, &f.tangent[0]).abs() < 1e-10);
            }
            assert!((norm(&c.nu[v]) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn pointwise_identities_are_exact() {
        let m = generate(&FamilySpec::codim_lift(3, 0.1, 2, 2, 5)).unwrap();
        let c = curvature(&m).unwrap();
        for v in 0..m.num_vertices() {
            let a2 = c.a_norm_sq(v);
            let rhs = c.a0_norm_sq(v) + 0.5 * norm_sq(&c.h[v]);
            assert!((a2 - rhs).abs() < 1e-8 * (1.0 + a2));
            let [b11, _, b22] = c.a0(v);
            assert!(norm(&crate::linalg::add(&b11, &b22)) < 1e-10);
            // Gauss equation pins K - |H|²/4 = -|A⁰|²/2
            let lhs = c.k_gauss[v] - 0.25 * norm_sq(&c.h[v]);
            assert!((lhs + 0.5 * c.a0_norm_sq(v)).abs() < 1e-9 * (1.0 + a2));
        }
    }

    #[test]
    fn radius_scaling() {
        let m = sphere(4).map_positions(|p| p.iter().map(|x| 3.0 * x).collect()).unwrap();
        let c = curvature(&m).unwrap();
        for v in (0..m.num_vertices()).step_by(97) {
            assert!((norm(&c.h[v]) - 2.0 / 3.0).abs() < 2e-2 * 2.0 / 3.0);
        }
    }

    #[test]
    fn too_few_neighbors_is_rank_deficient() {
        let m = sphere(1);
        let frames = fit_tangent_frames(&m).unwrap();
        let r = quadratic_fit(&m, &frames[0], &[1, 2, 3], 0);
        assert!(matches!(r, Err(Error::RankDeficient(0))));
    }

    #[test]
    fn energy_thresholds() {
        assert_eq!(e_n(3), 4.0 * PI);
        assert_eq!(e_n(4), 8.0 * PI / 3.0);
        assert_eq!(e_n(7), 2.0 * PI);
    }
}
