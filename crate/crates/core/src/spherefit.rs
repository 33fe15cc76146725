//! Round 2-spheres in R^n: the tangent sphere at a vertex, a Gauss–Newton
//! least-squares sphere, distances from the surface, and the deficits after
//! recentring at the fitted centre.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CurvatureField, NU_TOL};
use crate::linalg::{axpy, complete_basis, dot, gram_schmidt_step, norm, norm_sq, sub, tree_sum};
use crate::mesh::EmbeddedMesh;

pub const HAUSDORFF_SAMPLES: usize = 10_000;
const GN_MAX_ITER: usize = 200;
const GN_STEP_TOL: f64 = 1e-12;

const RULE: [[f64; 3]; 3] = [
    [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
    [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
    [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereFit {
    pub center: Vec<f64>,
    pub radius: f64,
    /// orthonormal frame of the 3-space containing the sphere
    pub subspace: [Vec<f64>; 3],
    /// `∫ d(x, S)² dμ` by face quadrature
    pub l2_dist_sq: f64,
    /// sampled two-sided Hausdorff distance
    pub hausdorff: f64,
    /// `∫ |H + 2(x − c)|² dμ`
    pub mean_deficit: f64,
    /// `Σ_v dualArea(v) d(x_v, S)²`, the functional the oracle minimises
    pub vertex_residual: f64,
    pub xi: Option<usize>,
}

impl SphereFit {
    /// `d(x, S)` for `S` the round sphere in the affine 3-space.
    pub fn distance(&self, x: &[f64]) -> f64 {
        sphere_distance(x, &self.center, self.radius, &self.subspace)
    }

    /// Closest point of `S` to `x` (an arbitrary one when `x` projects onto
    /// the centre).
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let y = sub(x, &self.center);
        let a: Vec<f64> = self.subspace.iter().map(|b| dot(&y, b)).collect();
        let la = norm(&a);
        let mut out = self.center.clone();
        for (k, b) in self.subspace.iter().enumerate() {
            let coef = if la > 0.0 { a[k] / la } else if k == 0 { 1.0 } else { 0.0 };
            axpy(self.radius * coef, b, &mut out);
        }
        out
    }

    /// Evenly spread points on `S` (Fibonacci lattice).
    pub fn sample(&self, count: usize) -> Vec<Vec<f64>> {
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        (0..count)
            .map(|i| {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                let s = (1.0 - z * z).sqrt();
                let phi = golden * i as f64;
                let coords = [s * phi.cos(), s * phi.sin(), z];
                let mut p = self.center.clone();
                for (b, c) in self.subspace.iter().zip(coords) {
                    axpy(self.radius * c, b, &mut p);
                }
                p
            })
            .collect()
    }
}

pub fn sphere_distance(x: &[f64], center: &[f64], radius: f64, subspace: &[Vec<f64>; 3]) -> f64 {
    let y = sub(x, center);
    let mut rest = y.clone();
    let mut a2 = 0.0;
    for b in subspace {
        let a = dot(&y, b);
        a2 += a * a;
        axpy(-a, b, &mut rest);
    }
    ((a2.sqrt() - radius).powi(2) + norm_sq(&rest)).sqrt()
}

/// The sphere through `ξ` tangent to the surface there, with mean
/// curvature vector `H(ξ)`.
pub fn tangent_sphere(mesh: &EmbeddedMesh, curv: &CurvatureField, xi: usize) -> Result<SphereFit> {
    if xi >= mesh.num_vertices() {
        return Err(Error::CenterOffMesh(xi));
    }
    let h = &curv.h[xi];
    let hn = norm(h);
    if hn <= NU_TOL {
        return Err(Error::VanishingMeanCurvature(xi));
    }
    let frame = &curv.frames[xi];
    let eta: Vec<f64> = h.iter().map(|x| x / hn).collect();
    let mut center = mesh.position(xi).to_vec();
    axpy(2.0 / (hn * hn), h, &mut center);
    let fit = SphereFit {
        center,
        radius: 2.0 / hn,
        subspace: [frame.tangent[0].clone(), frame.tangent[1].clone(), eta],
        l2_dist_sq: 0.0,
        hausdorff: 0.0,
        mean_deficit: 0.0,
        vertex_residual: 0.0,
        xi: Some(xi),
    };
    Ok(with_deficits(mesh, curv, fit))
}

fn with_deficits(mesh: &EmbeddedMesh, curv: &CurvatureField, mut fit: SphereFit) -> SphereFit {
    fit.l2_dist_sq = l2_dist_sq(mesh, &fit);
    fit.hausdorff = hausdorff(mesh, &fit, HAUSDORFF_SAMPLES);
    fit.vertex_residual = vertex_residual(mesh, &curv.dual_areas, &fit);
    fit.mean_deficit = curv.integrate(|v| {
        let x = mesh.position(v);
        let w: Vec<f64> = (0..x.len())
            .map(|i| curv.h[v][i] + 2.0 * (x[i] - fit.center[i]))
            .collect();
        norm_sq(&w)
    });
    fit
}

fn vertex_residual(mesh: &EmbeddedMesh, dual: &[f64], fit: &SphereFit) -> f64 {
    let vals: Vec<f64> = (0..mesh.num_vertices())
        .map(|v| dual[v] * fit.distance(mesh.position(v)).powi(2))
        .collect();
    tree_sum(&vals)
}

fn lift(p: [&[f64]; 3], b: &[f64; 3]) -> Vec<f64> {
    (0..p[0].len())
        .map(|i| b[0] * p[0][i] + b[1] * p[1][i] + b[2] * p[2][i])
        .collect()
}

/// `∫ d(x, S)² dμ` with the barycentric 3-point rule.
pub fn l2_dist_sq(mesh: &EmbeddedMesh, fit: &SphereFit) -> f64 {
    let parts: Vec<f64> = mesh
        .faces()
        .par_iter()
        .enumerate()
        .map(|(f, &[a, b, c])| {
            let p = [mesh.position(a), mesh.position(b), mesh.position(c)];
            let area = mesh.face_area(f);
            RULE.iter()
                .map(|w| area / 3.0 * fit.distance(&lift(p, w)).powi(2))
                .sum::<f64>()
        })
        .collect();
    tree_sum(&parts)
}

/// Squared distance from `p` to triangle `abc` in any dimension.
pub fn point_triangle_dist_sq(p: &[f64], a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let ab = sub(b, a);
    let ac = sub(c, a);
    let ap = sub(p, a);
    let d1 = dot(&ab, &ap);
    let d2 = dot(&ac, &ap);
    let at = |s: f64, t: f64| -> f64 {
        (0..p.len())
            .map(|i| (a[i] + s * ab[i] + t * ac[i] - p[i]).powi(2))
            .sum()
    };
    if d1 <= 0.0 && d2 <= 0.0 {
        return norm_sq(&ap);
    }
    let bp = sub(p, b);
    let d3 = dot(&ab, &bp);
    let d4 = dot(&ac, &bp);
    if d3 >= 0.0 && d4 <= d3 {
        return norm_sq(&bp);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return at(d1 / (d1 - d3), 0.0);
    }
    let cp = sub(p, c);
    let d5 = dot(&ab, &cp);
    let d6 = dot(&ac, &cp);
    if d6 >= 0.0 && d5 <= d6 {
        return norm_sq(&cp);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return at(0.0, d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return at(1.0 - w, w);
    }
    let denom = 1.0 / (va + vb + vc);
    at(vb * denom, vc * denom)
}

/// Uniform grid over the first three coordinates. Distances in R^n are
/// bounded below by distances of the projections, which makes shell-by-
/// shell search exact.
struct FaceGrid {
    lo: [f64; 3],
    cell: f64,
    dims: [usize; 3],
    cells: Vec<Vec<usize>>,
}

impl FaceGrid {
    fn new(mesh: &EmbeddedMesh) -> FaceGrid {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in 0..mesh.num_vertices() {
            let p = mesh.position(v);
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let cell = (2.0 * mesh.mean_edge_length()).max(1e-12);
        let dims: [usize; 3] = std::array::from_fn(|k| (((hi[k] - lo[k]) / cell).floor() as usize + 1).max(1));
        let mut cells = vec![Vec::new(); dims[0] * dims[1] * dims[2]];
        for (f, tri) in mesh.faces().iter().enumerate() {
            let mut flo = [usize::MAX; 3];
            let mut fhi = [0usize; 3];
            for &v in tri {
                let p = mesh.position(v);
                for k in 0..3 {
                    let i = (((p[k] - lo[k]) / cell).floor() as usize).min(dims[k] - 1);
                    flo[k] = flo[k].min(i);
                    fhi[k] = fhi[k].max(i);
                }
            }
            for i in flo[0]..=fhi[0] {
                for j in flo[1]..=fhi[1] {
                    for k in flo[2]..=fhi[2] {
                        cells[(i * dims[1] + j) * dims[2] + k].push(f);
                    }
                }
            }
        }
        FaceGrid { lo, cell, dims, cells }
    }

    fn nearest_dist(&self, mesh: &EmbeddedMesh, p: &[f64]) -> f64 {
        let home: [i64; 3] = std::array::from_fn(|k| ((p[k] - self.lo[k]) / self.cell).floor() as i64);
        let mut best = f64::INFINITY;
        let max_ring = *self.dims.iter().max().unwrap() as i64 + 2;
        let mut seen = std::collections::HashSet::new();
        for ring in 0..=max_ring {
            // every cell in this shell is at least (ring - 1) cells away
            let bound = ((ring - 1).max(0) as f64) * self.cell;
            if bound * bound > best {
                break;
            }
            for i in home[0] - ring..=home[0] + ring {
                for j in home[1] - ring..=home[1] + ring {
                    for k in home[2] - ring..=home[2] + ring {
                        let on_shell = (i - home[0]).abs() == ring
                            || (j - home[1]).abs() == ring
                            || (k - home[2]).abs() == ring;
                        if !on_shell {
                            continue;
                        }
                        let idx = [i, j, k];
                        if (0..3).any(|d| idx[d] < 0 || idx[d] >= self.dims[d] as i64) {
                            continue;
                        }
                        let cell = (i as usize * self.dims[1] + j as usize) * self.dims[2] + k as usize;
                        for &f in &self.cells[cell] {
                            if !seen.insert(f) {
                                continue;
                            }
                            let [a, b, c] = mesh.faces()[f];
                            let d = point_triangle_dist_sq(p, mesh.position(a), mesh.position(b), mesh.position(c));
                            best = best.min(d);
                        }
                    }
                }
            }
        }
        best.sqrt()
    }
}

/// Two-sided sampled Hausdorff distance: mesh vertices and face barycentres
/// against `S` analytically, `count` points of `S` against the mesh.
pub fn hausdorff(mesh: &EmbeddedMesh, fit: &SphereFit, count: usize) -> f64 {
    let to_sphere = (0..mesh.num_vertices())
        .into_par_iter()
        .map(|v| fit.distance(mesh.position(v)))
        .chain((0..mesh.num_faces()).into_par_iter().map(|f| fit.distance(&mesh.face_centroid(f))))
        .reduce(|| 0.0, f64::max);
    let grid = FaceGrid::new(mesh);
    let samples = fit.sample(count);
    let to_mesh = samples
        .par_iter()
        .map(|p| grid.nearest_dist(mesh, p))
        .reduce(|| 0.0, f64::max);
    to_sphere.max(to_mesh)
}

/// Gauss–Newton minimisation of `Σ_v dualArea(v) d(x_v, S)²` over centre,
/// radius and 3-subspace, started from `init`.
pub fn lsq_sphere_oracle(mesh: &EmbeddedMesh, curv: &CurvatureField, init: &SphereFit) -> Result<SphereFit> {
    let n = mesh.ambient_dim();
    let nv = mesh.num_vertices();
    if nv < 4 {
        return Err(Error::InvalidSpec("need at least four vertices".into()));
    }
    let w: Vec<f64> = curv.dual_areas.clone();
    let mut c = init.center.clone();
    let mut r = init.radius;
    let mut basis: Vec<Vec<f64>> = init.subspace.to_vec();
    let m = n - 3;
    let np = n + 1 + 3 * m;

    let cost_of = |c: &[f64], r: f64, basis: &[Vec<f64>]| -> f64 {
        let sub3 = [basis[0].clone(), basis[1].clone(), basis[2].clone()];
        let vals: Vec<f64> = (0..nv)
            .map(|v| w[v] * sphere_distance(mesh.position(v), c, r, &sub3).powi(2))
            .collect();
        tree_sum(&vals)
    };
    let mut cost = cost_of(&c, r, &basis);
    let scale = init.radius.max(1e-300);
    for _iter in 0..GN_MAX_ITER {
        let comp = complete_basis(&basis, n);
        let mut jtj = nalgebra::DMatrix::<f64>::zeros(np, np);
        let mut jte = nalgebra::DVector::<f64>::zeros(np);
        let mut row = vec![0.0; np];
        for v in 0..nv {
            let sw = w[v].sqrt();
            let y = sub(mesh.position(v), &c);
            let a: Vec<f64> = basis.iter().map(|b| dot(&y, b)).collect();
            let la = norm(&a).max(1e-300);
            let q: Vec<f64> = comp.iter().map(|b| dot(&y, b)).collect();
            // radial residual
            row.iter_mut().for_each(|x| *x = 0.0);
            let ba: Vec<f64> = (0..n).map(|i| (0..3).map(|k| basis[k][i] * a[k]).sum::<f64>() / la).collect();
            for i in 0..n {
                row[i] = -sw * ba[i];
            }
            row[n] = -sw;
            for i in 0..m {
                for j in 0..3 {
                    row[n + 1 + i * 3 + j] = sw * a[j] / la * q[i];
                }
            }
            let e = sw * (la - r);
            accumulate(&mut jtj, &mut jte, &row, e);
            // out-of-subspace residuals
            for i in 0..m {
                row.iter_mut().for_each(|x| *x = 0.0);
                for k in 0..n {
                    row[k] = -sw * comp[i][k];
                }
                for j in 0..3 {
                    row[n + 1 + i * 3 + j] = -sw * a[j];
                }
                accumulate(&mut jtj, &mut jte, &row, sw * q[i]);
            }
        }
        // tiny Levenberg term keeps the system solvable for symmetric data
        for d in 0..np {
            jtj[(d, d)] += 1e-14 * (1.0 + jtj[(d, d)]);
        }
        let step = jtj
            .clone()
            .cholesky()
            .map(|ch| ch.solve(&(-&jte)))
            .ok_or(Error::NoConvergence(_iter))?;
        let mut t = 1.0;
        let mut accepted = false;
        let mut next = (c.clone(), r, basis.clone(), cost);
        for _ in 0..40 {
            let mut c2 = c.clone();
            for i in 0..n {
                c2[i] += t * step[i];
            }
            let r2 = r + t * step[n];
            let mut moved: Vec<Vec<f64>> = basis.clone();
            for j in 0..3 {
                for i in 0..m {
                    axpy(t * step[n + 1 + i * 3 + j], &comp[i], &mut moved[j]);
                }
            }
            let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(3);
            for b in &moved {
                match gram_schmidt_step(b, &ortho) {
                    Some(u) => ortho.push(u),
                    None => break,
                }
            }
            if ortho.len() == 3 && r2 > 0.0 {
                let c2cost = cost_of(&c2, r2, &ortho);
                if c2cost <= cost {
                    next = (c2, r2, ortho, c2cost);
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        let step_norm = t * step.norm() / scale;
        if !accepted {
            // no descent direction left: at a minimum to working precision
            break;
        }
        let rel = (cost - next.3) / cost.max(1e-300);
        (c, r, basis, cost) = next;
        if step_norm < GN_STEP_TOL || rel < 1e-15 {
            let fit = SphereFit {
                center: c,
                radius: r,
                subspace: [basis[0].clone(), basis[1].clone(), basis[2].clone()],
                l2_dist_sq: 0.0,
                hausdorff: 0.0,
                mean_deficit: 0.0,
                vertex_residual: 0.0,
                xi: init.xi,
            };
            return Ok(with_deficits(mesh, curv, fit));
        }
        if _iter + 1 == GN_MAX_ITER {
            return Err(Error::NoConvergence(GN_MAX_ITER));
        }
    }
    let fit = SphereFit {
        center: c,
        radius: r,
        subspace: [basis[0].clone(), basis[1].clone(), basis[2].clone()],
        l2_dist_sq: 0.0,
        hausdorff: 0.0,
        mean_deficit: 0.0,
        vertex_residual: 0.0,
        xi: init.xi,
    };
    Ok(with_deficits(mesh, curv, fit))
}

fn accumulate(jtj: &mut nalgebra::DMatrix<f64>, jte: &mut nalgebra::DVector<f64>, row: &[f64], e: f64) {
    let np = row.len();
    for i in 0..np {
        if row[i] == 0.0 {
            continue;
        }
        jte[i] += row[i] * e;
        for j in 0..np {
            jtj[(i, j)] += row[i] * row[j];
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecenterDeficits {
    /// `‖H + 2·id‖_{L²}`
    pub mean_l2: f64,
    /// `‖|id| − 1‖_{L²}`
    pub radial_l2: f64,
    pub max_norm: f64,
    pub radius_dev: f64,
}

/// Translates the mesh so the fitted centre sits at the origin.
pub fn recenter_unit(mesh: &EmbeddedMesh, curv: &CurvatureField, fit: &SphereFit) -> Result<(EmbeddedMesh, RecenterDeficits)> {
    let shift: Vec<f64> = fit.center.iter().map(|x| -x).collect();
    let moved = mesh.translated(&shift)?;
    let mean_sq = curv.integrate(|v| {
        let x = moved.position(v);
        (0..x.len()).map(|i| (curv.h[v][i] + 2.0 * x[i]).powi(2)).sum()
    });
    let radial_sq = curv.integrate(|v| (norm(moved.position(v)) - 1.0).powi(2));
    let max_norm = (0..moved.num_vertices())
        .map(|v| norm(moved.position(v)))
        .fold(0.0, f64::max);
    Ok((
        moved,
        RecenterDeficits {
            mean_l2: mean_sq.sqrt(),
            radial_l2: radial_sq.sqrt(),
            max_norm,
            radius_dev: (fit.radius - 1.0).abs(),
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainCheck {
    /// `max (2 d(x,S) − |H(ξ)|ξ−x|² + 4(ξ−x)^⊥|)` over quadrature points
    pub max_violation: f64,
    pub points: usize,
    /// `∫ 4 d(x,S)² dμ`
    pub lhs_sq_integral: f64,
    /// `∫ |H(ξ)|ξ−x|² + 4(ξ−x)^⊥|² dμ`
    pub rhs_sq_integral: f64,
}

/// Evaluates `2 d(x, S) ≤ |H(ξ) + 4 (ξ − x)^⊥ / |ξ − x|²| |ξ − x|²` at every
/// quadrature point for the tangent sphere `S` at `ξ`.
pub fn chain_inequality(mesh: &EmbeddedMesh, curv: &CurvatureField, fit: &SphereFit) -> Result<ChainCheck> {
    let xi = fit.xi.ok_or_else(|| Error::InvalidSpec("fit has no tangency vertex".into()))?;
    let p = mesh.position(xi);
    let frame = &curv.frames[xi];
    let h = &curv.h[xi];
    let per_face: Vec<(f64, f64, f64)> = mesh
        .faces()
        .par_iter()
        .enumerate()
        .map(|(f, &[a, b, c])| {
            let pos = [mesh.position(a), mesh.position(b), mesh.position(c)];
            let area = mesh.face_area(f);
            let mut worst = f64::NEG_INFINITY;
            let (mut l, mut r) = (0.0, 0.0);
            for w in RULE.iter() {
                let x = lift(pos, w);
                let d = sub(p, &x);
                let dn = frame.normal_part(&d);
                let r2 = norm_sq(&d);
                let v: Vec<f64> = h.iter().zip(&dn).map(|(hi, ni)| hi * r2 + 4.0 * ni).collect();
                let rhs = norm(&v);
                let lhs = 2.0 * fit.distance(&x);
                worst = worst.max(lhs - rhs);
                l += area / 3.0 * lhs * lhs;
                r += area / 3.0 * rhs * rhs;
            }
            (worst, l, r)
        })
        .collect();
    Ok(ChainCheck {
        max_violation: per_face.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max),
        points: 3 * mesh.num_faces(),
        lhs_sq_integral: tree_sum(&per_face.iter().map(|t| t.1).collect::<Vec<_>>()),
        rhs_sq_integral: tree_sum(&per_face.iter().map(|t| t.2).collect::<Vec<_>>()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::curvature;
    use crate::surfgen::{generate, FamilySpec};

    #[test]
    fn triangle_distance_regions() {
        let a = [0.0, 0.0, 0.0, 0.0];
        let b = [1.0, 0.0, 0.0, 0.0];
        let c = [0.0, 1.0, 0.0, 0.0];
        // interior, lifted off in the 4th coordinate
        assert!((point_triangle_dist_sq(&[0.2, 0.2, 0.0, 0.5], &a, &b, &c) - 0.25).abs() < 1e-15);
        // vertex region
        assert!((point_triangle_dist_sq(&[-1.0, -1.0, 0.0, 0.0], &a, &b, &c) - 2.0).abs() < 1e-15);
        // hypotenuse region
        let d = point_triangle_dist_sq(&[1.0, 1.0, 0.0, 0.0], &a, &b, &c);
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn off_mesh_and_flat_points() {
        let m = generate(&FamilySpec::icosphere(2)).unwrap();
        let mut c = curvature(&m).unwrap();
        assert!(matches!(tangent_sphere(&m, &c, 10_000), Err(Error::CenterOffMesh(_))));
        c.h[3] = vec![0.0; 3];
        assert!(matches!(tangent_sphere(&m, &c, 3), Err(Error::VanishingMeanCurvature(3))));
    }

    #[test]
    fn exact_points_recover_the_sphere() {
        let m = generate(&FamilySpec::icosphere(2)).unwrap();
        let m = m
            .embedded_in(5)
            .unwrap()
            .map_positions(|p| {
                let s = 1.0 / norm(p);
                let p: Vec<f64> = p.iter().map(|x| x * s).collect();
                // radius 1.7 in span{e1, e3, e5}, centred at (0.3, 0, -1, 2, 0.5)
                vec![0.3 + 1.7 * p[0], 0.0, -1.0 + 1.7 * p[1], 2.0, 0.5 + 1.7 * p[2]]
            })
            .unwrap();
        let c = curvature(&m).unwrap();
        let init = tangent_sphere(&m, &c, 0).unwrap();
        let fit = lsq_sphere_oracle(&m, &c, &init).unwrap();
        let want = [0.3, 0.0, -1.0, 2.0, 0.5];
        for (x, y) in fit.center.iter().zip(want) {
            assert!((x - y).abs() < 1e-10, "{:?}", fit.center);
        }
        assert!((fit.radius - 1.7).abs() < 1e-10);
        assert!(fit.vertex_residual < 1e-20, "{}", fit.vertex_residual);
        assert!(fit.vertex_residual <= init.vertex_residual);
    }
}
