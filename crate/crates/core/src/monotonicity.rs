//! The monotonicity quantity
//!
//! ```text
//! γ(ρ) = ρ⁻² μ(B_ρ(x)) + (1/16) ∫_{B_ρ} |H|² + ½ ρ⁻² ∫_{B_ρ} (y − x)·H
//! ```
//!
//! evaluated exactly for the piecewise-linear surface carrying the
//! linearly interpolated mean curvature vector, together with the deficit
//! integrand `|¼H + (y − x)^⊥ / |y − x|²|²`, the averaged centre selection and
//! the density bounds.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CurvatureField;
use crate::linalg::{dist, dot, norm_sq, sub, tree_sum};
use crate::mesh::EmbeddedMesh;
use crate::quadrature::{triangle_disk_moments, FaceFrame, Moments};

/// Lower-density constant for `μ(B_ρ) ≥ c₀ ρ² / (1 + 4W)`: half of the
/// infimum of the left/right ratio measured on icosphere levels 1..=5.
pub const DENSITY_C0: f64 = 80.69;

/// Barycentric 3-point rule, exact for quadratics.
const RULE: [[f64; 3]; 3] = [
    [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
    [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
    [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityProfile {
    pub center: usize,
    pub center_point: Vec<f64>,
    pub rho_samples: Vec<f64>,
    pub gamma: Vec<f64>,
    /// deficit integral over the whole surface
    pub deficit_total: f64,
    /// deficit integral over `B_ρmax \ B_ρmin`, the telescoped quantity
    pub deficit_annulus: f64,
    /// γ at the largest radius; `W/4` up to the first-variation residual
    pub theta_infinity_proxy: f64,
    /// `μ + ½ ∫ (y − x)·H`, zero for the exact first variation
    pub first_variation_residual: f64,
}

impl MonotonicityProfile {
    /// Largest decrease between consecutive samples, relative to `1 + γ`.
    pub fn worst_decrease(&self) -> f64 {
        self.gamma
            .windows(2)
            .map(|w| (w[0] - w[1]) / (1.0 + w[0].abs()))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_monotone(&self, slack: f64) -> bool {
        self.gamma.windows(2).all(|w| w[1] >= w[0] - slack * (1.0 + w[0].abs()))
    }

    pub fn telescoping_gap(&self) -> f64 {
        let n = self.gamma.len();
        (self.gamma[n - 1] - self.gamma[0]) - self.deficit_annulus
    }
}

/// Per-face data shared across centres and radii.
struct FaceData {
    frame: FaceFrame,
    corners: [usize; 3],
    full: Moments,
    /// `H = h0 + s·hs + t·ht` in local face coordinates
    h0: Vec<f64>,
    hs: Vec<f64>,
    ht: Vec<f64>,
    /// `|H|²` as a quadratic in local coordinates
    h2: [f64; 6],
}

pub struct FaceTable {
    faces: Vec<FaceData>,
}

impl FaceTable {
    pub fn new(mesh: &EmbeddedMesh, curv: &CurvatureField) -> FaceTable {
        let faces = mesh
            .faces()
            .par_iter()
            .map(|&[a, b, c]| {
                let frame = FaceFrame::new(mesh.position(a), mesh.position(b), mesh.position(c));
                let [_, [l1, _], [pa, pb]] = frame.local;
                let h0 = curv.h[a].clone();
                let hs: Vec<f64> = curv.h[b].iter().zip(&h0).map(|(x, y)| (x - y) / l1).collect();
                let ht: Vec<f64> = (0..h0.len())
                    .map(|i| (curv.h[c][i] - h0[i] - pa * hs[i]) / pb)
                    .collect();
                let h2 = [
                    norm_sq(&h0),
                    2.0 * dot(&h0, &hs),
                    2.0 * dot(&h0, &ht),
                    norm_sq(&hs),
                    2.0 * dot(&hs, &ht),
                    norm_sq(&ht),
                ];
                let [p, q, r] = frame.local;
                FaceData {
                    full: Moments::triangle(p, q, r),
                    frame,
                    corners: [a, b, c],
                    h0,
                    hs,
                    ht,
                    h2,
                }
            })
            .collect();
        FaceTable { faces }
    }

    /// `(y − x)·H` as a quadratic in local coordinates of face `f`.
    fn cross_poly(&self, f: usize, x: &[f64]) -> [f64; 6] {
        let d = &self.faces[f];
        let d0 = sub(&d.frame.origin, x);
        let (e1, e2) = (&d.frame.e1, &d.frame.e2);
        [
            dot(&d0, &d.h0),
            dot(&d0, &d.hs) + dot(e1, &d.h0),
            dot(&d0, &d.ht) + dot(e2, &d.h0),
            dot(e1, &d.hs),
            dot(e1, &d.ht) + dot(e2, &d.hs),
            dot(e2, &d.ht),
        ]
    }
}

/// The three integrals entering γ over `B_ρ(x)`: area, `∫|H|²`, `∫(y−x)·H`.
fn ball_integrals(mesh: &EmbeddedMesh, table: &FaceTable, x: &[f64], rho: f64) -> [f64; 3] {
    let parts: Vec<[f64; 3]> = (0..table.faces.len())
        .map(|f| {
            let d = &table.faces[f];
            let far = d.corners.iter().all(|&v| dist(mesh.position(v), x) <= rho);
            let m = if far {
                d.full
            } else {
                let (c, off2) = d.frame.project(x);
                let r2 = rho * rho - off2;
                if r2 <= 0.0 {
                    return [0.0; 3];
                }
                triangle_disk_moments(&d.frame.local, c, r2.sqrt())
            };
            if m.m0 == 0.0 {
                return [0.0; 3];
            }
            [m.m0, m.integrate(&d.h2), m.integrate(&table.cross_poly(f, x))]
        })
        .collect();
    let col = |k: usize| tree_sum(&parts.iter().map(|p| p[k]).collect::<Vec<_>>());
    [col(0), col(1), col(2)]
}

fn check_center(mesh: &EmbeddedMesh, center: usize) -> Result<()> {
    if center >= mesh.num_vertices() {
        return Err(Error::CenterOffMesh(center));
    }
    Ok(())
}

/// γ(ρ) at a single radius.
pub fn gamma_at(mesh: &EmbeddedMesh, table: &FaceTable, center: usize, rho: f64) -> Result<f64> {
    check_center(mesh, center)?;
    let x = mesh.position(center);
    let [mu, h2, cross] = ball_integrals(mesh, table, x, rho);
    Ok(mu / (rho * rho) + h2 / 16.0 + 0.5 * cross / (rho * rho))
}

/// Geometric radius grid from three mean edge lengths to just past the
/// farthest vertex from `center`.
pub fn default_rho_grid(mesh: &EmbeddedMesh, center: usize, count: usize) -> Vec<f64> {
    let x = mesh.position(center);
    let far = (0..mesh.num_vertices())
        .map(|v| dist(mesh.position(v), x))
        .fold(0.0, f64::max);
    let lo = 3.0 * mesh.mean_edge_length();
    let hi = far * 1.001;
    let count = count.max(2);
    (0..count)
        .map(|k| lo * (hi / lo).powf(k as f64 / (count - 1) as f64))
        .collect()
}

pub fn gamma_profile(
    mesh: &EmbeddedMesh,
    curv: &CurvatureField,
    center: usize,
    rho_samples: &[f64],
) -> Result<MonotonicityProfile> {
    check_center(mesh, center)?;
    if rho_samples.is_empty()
        || rho_samples[0] <= 0.0
        || rho_samples.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::InvalidSpec("radii must be positive and increasing".into()));
    }
    let table = FaceTable::new(mesh, curv);
    let x = mesh.position(center).to_vec();
    let gamma: Vec<f64> = rho_samples
        .par_iter()
        .map(|&rho| {
            let [mu, h2, cross] = ball_integrals(mesh, &table, &x, rho);
            mu / (rho * rho) + h2 / 16.0 + 0.5 * cross / (rho * rho)
        })
        .collect();
    let [mu, _, cross] = ball_integrals(mesh, &table, &x, f64::INFINITY);
    let rmin = rho_samples[0];
    let rmax = *rho_samples.last().unwrap();
    Ok(MonotonicityProfile {
        center,
        center_point: x,
        rho_samples: rho_samples.to_vec(),
        theta_infinity_proxy: *gamma.last().unwrap(),
        gamma,
        deficit_total: deficit_region(mesh, curv, center, 0.0, f64::INFINITY),
        deficit_annulus: deficit_region(mesh, curv, center, rmin, rmax),
        first_variation_residual: mu + 0.5 * cross,
    })
}

/// `∫ |¼H(y) + (y − x)^⊥ / |y − x|²|² dμ(y)` over the whole surface, with
/// `⊥` taken from each face's own plane.
pub fn monotonicity_deficit(mesh: &EmbeddedMesh, curv: &CurvatureField, center: usize) -> Result<f64> {
    check_center(mesh, center)?;
    Ok(deficit_region(mesh, curv, center, 0.0, f64::INFINITY))
}

/// The deficit integral restricted to `r_in ≤ |y − x| ≤ r_out`. Faces cut
/// by either sphere are split along the crossing chord and the pieces
/// classified by side.
pub fn deficit_region(mesh: &EmbeddedMesh, curv: &CurvatureField, center: usize, r_in: f64, r_out: f64) -> f64 {
    let x = mesh.position(center);
    // a disk of radius 1e-3 h about the centre contributes nothing
    let hole = 1e-3 * mesh.mean_edge_length();
    let r_in = r_in.max(hole);
    let parts: Vec<f64> = mesh
        .faces()
        .par_iter()
        .map(|&tri| {
            let pos = [mesh.position(tri[0]), mesh.position(tri[1]), mesh.position(tri[2])];
            let frame = FaceFrame::new(pos[0], pos[1], pos[2]);
            let eye = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
            let mut pieces = Vec::new();
            for outer in split_by_sphere(&pos, x, eye, r_out, true, 0) {
                pieces.extend(split_by_sphere(&pos, x, outer, r_in, false, 0));
            }
            let h = |b: &[f64; 3]| -> Vec<f64> {
                (0..x.len())
                    .map(|i| b[0] * curv.h[tri[0]][i] + b[1] * curv.h[tri[1]][i] + b[2] * curv.h[tri[2]][i])
                    .collect()
            };
            pieces
                .iter()
                .map(|sub_tri| {
                    let pts: Vec<Vec<f64>> = sub_tri.iter().map(|b| lift(&pos, b)).collect();
                    let area = crate::linalg::triangle_area(&pts[0], &pts[1], &pts[2]);
                    RULE.iter()
                        .map(|w| {
                            let b: [f64; 3] = std::array::from_fn(|k| {
                                w[0] * sub_tri[0][k] + w[1] * sub_tri[1][k] + w[2] * sub_tri[2][k]
                            });
                            let y = lift(&pos, &b);
                            let d = sub(&y, x);
                            let dn = frame.normal_part(&d);
                            let r2 = norm_sq(&d);
                            let hy = h(&b);
                            let v: Vec<f64> = hy.iter().zip(&dn).map(|(hi, ni)| 0.25 * hi + ni / r2).collect();
                            area / 3.0 * norm_sq(&v)
                        })
                        .sum::<f64>()
                })
                .sum::<f64>()
        })
        .collect();
    tree_sum(&parts)
}

type Bary = [[f64; 3]; 3];

fn lift(pos: &[&[f64]; 3], b: &[f64; 3]) -> Vec<f64> {
    (0..pos[0].len())
        .map(|i| b[0] * pos[0][i] + b[1] * pos[1][i] + b[2] * pos[2][i])
        .collect()
}

/// Pieces of the barycentric sub-triangle `tri` lying inside (`keep_inside`)
/// or outside the sphere `|y − x| = r`.
fn split_by_sphere(pos: &[&[f64]; 3], x: &[f64], tri: Bary, r: f64, keep_inside: bool, depth: usize) -> Vec<Bary> {
    if r == f64::INFINITY {
        return if keep_inside { vec![tri] } else { vec![] };
    }
    if r <= 0.0 {
        return if keep_inside { vec![] } else { vec![tri] };
    }
    let pts: Vec<Vec<f64>> = tri.iter().map(|b| lift(pos, b)).collect();
    let s: Vec<f64> = pts.iter().map(|p| norm_sq(&sub(p, x)) - r * r).collect();
    let inside: Vec<bool> = s.iter().map(|v| *v < 0.0).collect();
    let n_in = inside.iter().filter(|b| **b).count();
    if n_in == 0 || n_in == 3 {
        // the circle may still cut an edge twice or sit inside the face
        let grazes = (0..3).any(|k| {
            let p = &pts[k];
            let q = &pts[(k + 1) % 3];
            let d = sub(q, p);
            let t = (dot(&sub(x, p), &d) / norm_sq(&d)).clamp(0.0, 1.0);
            let near: Vec<f64> = p.iter().zip(&d).map(|(pi, di)| pi + t * di).collect();
            (norm_sq(&sub(&near, x)) < r * r) != (n_in == 3)
        });
        let centroid: Vec<f64> = (0..x.len()).map(|i| (pts[0][i] + pts[1][i] + pts[2][i]) / 3.0).collect();
        let contains_foot = {
            let frame = FaceFrame::new(&pts[0], &pts[1], &pts[2]);
            let (z, off2) = frame.project(x);
            off2 < r * r && point_in(&frame.local, z)
        };
        if (grazes || (n_in == 0 && contains_foot)) && depth < 3 {
            return subdivide(tri)
                .into_iter()
                .flat_map(|t| split_by_sphere(pos, x, t, r, keep_inside, depth + 1))
                .collect();
        }
        let is_in = if grazes || contains_foot {
            norm_sq(&sub(&centroid, x)) < r * r
        } else {
            n_in == 3
        };
        return if is_in == keep_inside { vec![tri] } else { vec![] };
    }
    // the lone corner sits on the minority side
    let lone = (0..3).find(|&k| inside[k] == (n_in == 1)).unwrap();
    let (i, j, k) = (lone, (lone + 1) % 3, (lone + 2) % 3);
    let cut = |a: usize, b: usize| -> [f64; 3] {
        let p = &pts[a];
        let d = sub(&pts[b], p);
        let w = sub(p, x);
        let aa = norm_sq(&d);
        let bb = dot(&w, &d);
        let cc = norm_sq(&w) - r * r;
        let disc = (bb * bb - aa * cc).max(0.0).sqrt();
        // exactly one root in (0, 1) since the endpoints straddle the sphere
        let t = if cc < 0.0 { (-bb + disc) / aa } else { (-bb - disc) / aa };
        let t = t.clamp(0.0, 1.0);
        std::array::from_fn(|m| tri[a][m] + t * (tri[b][m] - tri[a][m]))
    };
    let a = cut(i, j);
    let b = cut(i, k);
    let lone_piece = [tri[i], a, b];
    let rest = [[a, tri[j], tri[k]], [a, tri[k], b]];
    let lone_inside = inside[i];
    let mut out = Vec::new();
    if lone_inside == keep_inside {
        out.push(lone_piece);
    } else {
        out.extend(rest);
    }
    out
}

fn point_in(tri: &[[f64; 2]; 3], z: [f64; 2]) -> bool {
    let orient = |a: [f64; 2], b: [f64; 2]| (b[0] - a[0]) * (z[1] - a[1]) - (b[1] - a[1]) * (z[0] - a[0]);
    orient(tri[0], tri[1]) >= 0.0 && orient(tri[1], tri[2]) >= 0.0 && orient(tri[2], tri[0]) >= 0.0
}

fn subdivide(t: Bary) -> [Bary; 4] {
    let mid = |a: [f64; 3], b: [f64; 3]| -> [f64; 3] { std::array::from_fn(|m| 0.5 * (a[m] + b[m])) };
    let (ab, bc, ca) = (mid(t[0], t[1]), mid(t[1], t[2]), mid(t[2], t[0]));
    [[t[0], ab, ca], [ab, t[1], bc], [ca, bc, t[2]], [ab, bc, ca]]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FubiniSelection {
    pub vertex: usize,
    pub deficit: f64,
    /// area-weighted mean of `D` over the sampled vertices
    pub mean: f64,
    pub samples: Vec<(usize, f64)>,
}

/// `D(ξ) = ∫ |H(ξ) + 4 (ξ − x)^{⊥_ξ} / |ξ − x|²|² dμ(x)` with the normal
/// projection of the fitted frame at `ξ` held fixed.
pub fn fubini_deficit(mesh: &EmbeddedMesh, curv: &CurvatureField, xi: usize) -> f64 {
    let p = mesh.position(xi);
    let frame = &curv.frames[xi];
    let hx = &curv.h[xi];
    let parts: Vec<f64> = mesh
        .faces()
        .iter()
        .map(|&tri| {
            let pos = [mesh.position(tri[0]), mesh.position(tri[1]), mesh.position(tri[2])];
            let area = crate::linalg::triangle_area(pos[0], pos[1], pos[2]);
            RULE.iter()
                .map(|b| {
                    let x = lift(&pos, b);
                    let d = sub(p, &x);
                    let r2 = norm_sq(&d);
                    let dn = frame.normal_part(&d);
                    let v: Vec<f64> = hx.iter().zip(&dn).map(|(h, n)| h + 4.0 * n / r2).collect();
                    area / 3.0 * norm_sq(&v)
                })
                .sum::<f64>()
        })
        .collect();
    tree_sum(&parts)
}

/// Evenly strided vertex sample of at most `max_samples` vertices.
pub fn sample_vertices(num_vertices: usize, max_samples: usize) -> Vec<usize> {
    let stride = num_vertices.div_ceil(max_samples.max(1)).max(1);
    (0..num_vertices).step_by(stride).collect()
}

/// Minimises `D` over a vertex sample. The minimum never exceeds the
/// area-weighted mean, which is the averaging step behind the selection.
pub fn select_fubini_center(mesh: &EmbeddedMesh, curv: &CurvatureField, max_samples: usize) -> FubiniSelection {
    let verts = sample_vertices(mesh.num_vertices(), max_samples);
    let samples: Vec<(usize, f64)> = verts
        .par_iter()
        .map(|&v| (v, fubini_deficit(mesh, curv, v)))
        .collect();
    let weighted: Vec<f64> = samples.iter().map(|&(v, d)| curv.dual_areas[v] * d).collect();
    let weights: Vec<f64> = samples.iter().map(|&(v, _)| curv.dual_areas[v]).collect();
    let mean = tree_sum(&weighted) / tree_sum(&weights);
    let &(vertex, deficit) = samples
        .iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)))
        .expect("nonempty mesh");
    FubiniSelection {
        vertex,
        deficit,
        mean,
        samples,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallRatio {
    pub vertex: usize,
    pub rho: f64,
    /// `μ(B_ρ) / (π ρ²)`
    pub ratio: f64,
    /// `μ(B_ρ) (1 + 4W) / ρ²`, compared against `c₀`
    pub lower_ratio: f64,
    /// whether the ball misses part of the surface
    pub proper: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCheck {
    pub ratios: Vec<BallRatio>,
    /// largest small-radius density ratio, a proxy for θ²
    pub li_yau_max: f64,
    pub li_yau_bound: f64,
    pub li_yau_ok: bool,
    pub c0: f64,
    pub lower_bound_ok: bool,
}

/// `μ(B_ρ(x))` for a vertex centre.
pub fn ball_area(mesh: &EmbeddedMesh, table: &FaceTable, center: usize, rho: f64) -> f64 {
    ball_integrals(mesh, table, mesh.position(center), rho)[0]
}

/// Density ratios on the requested `(vertex, ρ)` balls. `small_rho` sets
/// the radius of the Li–Yau proxy, evaluated at every sampled vertex.
pub fn density_checks(
    mesh: &EmbeddedMesh,
    curv: &CurvatureField,
    willmore: f64,
    ball_samples: &[(usize, f64)],
    small_rho: f64,
    c0: f64,
    li_yau_tol: f64,
) -> DensityCheck {
    let table = FaceTable::new(mesh, curv);
    let ratios: Vec<BallRatio> = ball_samples
        .par_iter()
        .map(|&(v, rho)| {
            let mu = ball_area(mesh, &table, v, rho);
            let x = mesh.position(v);
            let proper = (0..mesh.num_vertices()).any(|w| dist(mesh.position(w), x) > rho);
            BallRatio {
                vertex: v,
                rho,
                ratio: mu / (PI * rho * rho),
                lower_ratio: mu * (1.0 + 4.0 * willmore) / (rho * rho),
                proper,
            }
        })
        .collect();
    let mut centers: Vec<usize> = ball_samples.iter().map(|s| s.0).collect();
    centers.sort_unstable();
    centers.dedup();
    let li_yau_max = centers
        .par_iter()
        .map(|&v| ball_area(mesh, &table, v, small_rho) / (PI * small_rho * small_rho))
        .reduce(|| 0.0, f64::max);
    let li_yau_bound = willmore / (4.0 * PI);
    DensityCheck {
        lower_bound_ok: ratios.iter().filter(|r| r.proper).all(|r| r.lower_ratio >= c0),
        ratios,
        li_yau_max,
        li_yau_bound,
        li_yau_ok: li_yau_max <= li_yau_bound + li_yau_tol,
        c0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::curvature;
    use crate::surfgen::{generate, FamilySpec};

    #[test]
    fn off_mesh_center() {
        let m = generate(&FamilySpec::icosphere(1)).unwrap();
        let c = curvature(&m).unwrap();
        assert!(matches!(gamma_profile(&m, &c, 999, &[0.5, 1.0]), Err(Error::CenterOffMesh(999))));
        assert!(matches!(monotonicity_deficit(&m, &c, 42), Err(Error::CenterOffMesh(42))));
    }

    #[test]
    fn split_pieces_tile_the_face() {
        let p = [vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.1], vec![0.2, 0.9, -0.1]];
        let pos = [p[0].as_slice(), p[1].as_slice(), p[2].as_slice()];
        let eye = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let full = crate::linalg::triangle_area(pos[0], pos[1], pos[2]);
        for (x, r) in [([0.1, 0.1, 0.0], 0.5), ([0.4, 0.3, 0.05], 0.1), ([2.0, 2.0, 0.0], 0.3)] {
            let area = |pieces: Vec<Bary>| -> f64 {
                pieces
                    .iter()
                    .map(|t| {
                        let q: Vec<Vec<f64>> = t.iter().map(|b| lift(&pos, b)).collect();
                        crate::linalg::triangle_area(&q[0], &q[1], &q[2])
                    })
                    .sum()
            };
            let a_in = area(split_by_sphere(&pos, &x, eye, r, true, 0));
            let a_out = area(split_by_sphere(&pos, &x, eye, r, false, 0));
            assert!((a_in + a_out - full).abs() < 1e-12);
        }
    }
}
