//! Closeness to the round sphere: degree-one projection of the
//! parametrization, rotation extraction, the W^{2,2} deficit and the
//! conformal factor in L², assembled into a [`RigidityReport`].

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::conformal::SphericalParam;
use crate::error::{Error, Result};
use crate::geometry::{e_n, CurvatureField, EnergyReport};
use crate::linalg::{complete_basis, cotan_stiffness, dot, lowest_generalized_eigenpairs, tree_sum, CsrMatrix};
use crate::mesh::EmbeddedMesh;

/// Fourth eigenvalue of `−Δ_{S²}`: the first one above the linear functions.
pub const LAMBDA_4: f64 = 6.0;
/// Largest tolerated `max |Gram − I|` of the linear part.
pub const ALIGNMENT_LIMIT: f64 = 0.5;

/// Cotangent stiffness and lumped mass of the image mesh on S².
#[derive(Debug, Clone)]
pub struct LaplaceOperator {
    pub stiffness: CsrMatrix,
    pub mass: Vec<f64>,
}

impl LaplaceOperator {
    pub fn on_image(param: &SphericalParam) -> LaplaceOperator {
        let nv = param.num_vertices();
        let stiffness = cotan_stiffness(nv, &param.faces, |v| &param.points[v][..]);
        let mut mass = vec![0.0; nv];
        for &[a, b, c] in &param.faces {
            let area = crate::linalg::triangle_area(&param.points[a], &param.points[b], &param.points[c]);
            for v in [a, b, c] {
                mass[v] += area / 3.0;
            }
        }
        LaplaceOperator { stiffness, mass }
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// `Δ_{S²} x = −M⁻¹ L x` for a scalar field.
    pub fn laplacian(&self, x: &[f64]) -> Vec<f64> {
        self.stiffness.apply(x).iter().zip(&self.mass).map(|(y, m)| -y / m).collect()
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let t: Vec<f64> = (0..a.len()).map(|i| a[i] * b[i] * self.mass[i]).collect();
        tree_sum(&t)
    }

    pub fn norm_l2(&self, a: &[f64]) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }

    pub fn norm_l1(&self, a: &[f64]) -> f64 {
        let t: Vec<f64> = a.iter().zip(&self.mass).map(|(x, m)| x.abs() * m).collect();
        tree_sum(&t)
    }

    /// Dirichlet energy `xᵀ L x = ‖∇x‖²`.
    pub fn dirichlet(&self, x: &[f64]) -> f64 {
        dot(x, &self.stiffness.apply(x)).max(0.0)
    }

    /// Lowest `count` eigenvalues of `L v = λ M v`.
    pub fn eigenvalues(&self, count: usize) -> Result<Vec<f64>> {
        Ok(lowest_generalized_eigenpairs(&self.stiffness, &self.mass, count, 60)?.0)
    }
}

fn column(positions: &EmbeddedMesh, k: usize) -> Vec<f64> {
    (0..positions.num_vertices()).map(|v| positions.position(v)[k]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfFactorL2 {
    pub u_l2: f64,
    /// `‖M⁻¹Lu − (K e^{2u} − 1)‖_{L²}`
    pub gauss_residual: f64,
    /// `‖Δu + 2u‖_{L¹}`
    pub aux_l1: f64,
}

/// `u` in L² and the discrete residual of `−Δu = K e^{2u} − 1`, with the
/// angle-defect curvature of the surface vertex `v` placed at its image.
pub fn conf_factor_l2(param: &SphericalParam, curv: &CurvatureField, lap: &LaplaceOperator) -> ConfFactorL2 {
    let u = &param.u;
    let lu = lap.laplacian(u);
    let res: Vec<f64> = (0..u.len())
        .map(|v| -lu[v] - (curv.k_defect[v] * (2.0 * u[v]).exp() - 1.0))
        .collect();
    let aux: Vec<f64> = (0..u.len()).map(|v| lu[v] + 2.0 * u[v]).collect();
    ConfFactorL2 {
        u_l2: lap.norm_l2(u),
        gauss_residual: lap.norm_l2(&res),
        aux_l1: lap.norm_l1(&aux),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicProjection {
    /// `α_m = ⟨f, v_m⟩` for `m = 0..3`, each in R^n
    pub alpha: Vec<Vec<f64>>,
    /// columns `l_j` of the linear map, `l(x) = Σ_j x_j l_j`
    pub l: [Vec<f64>; 3],
    /// `α₀ v₀`
    pub offset: Vec<f64>,
    /// mass-weighted mean of the image points; the `v_i` are centred on it
    pub image_mean: [f64; 3],
    /// `‖f − α₀v₀ − Σ α_i v_i‖_{L²}`
    pub residual_l2: f64,
    /// `‖Δf + 2f‖_{L²}`
    pub eigen_defect_l2: f64,
    /// `‖f‖²_{L²}`
    pub f_norm_sq: f64,
    /// `residual_l2 ≤ eigen_defect_l2 / min(2, λ₄ − 2) + slack`
    pub gap_bound_ok: bool,
}

impl HarmonicProjection {
    pub fn bessel_gap(&self) -> f64 {
        self.f_norm_sq - self.alpha.iter().map(|a| dot(a, a)).sum::<f64>()
    }
}

/// Orthonormal (in the lumped mass) basis `v₀ ∝ 1`, `v_i ∝ x_i − x̄_i`.
/// Returns the basis, the mean, and for each `v_i` the coefficient
/// matrix `c` with `v_i = Σ_j c[i][j] (x_j − x̄_j)`.
fn degree_one_basis(param: &SphericalParam, lap: &LaplaceOperator) -> (Vec<Vec<f64>>, [f64; 3], [[f64; 3]; 3]) {
    let nv = param.num_vertices();
    let total: f64 = tree_sum(&lap.mass);
    let mean: [f64; 3] = std::array::from_fn(|k| lap.inner(&param.points.iter().map(|p| p[k]).collect::<Vec<_>>(), &vec![1.0; nv]) / total);
    let centred: Vec<Vec<f64>> = (0..3).map(|k| param.points.iter().map(|p| p[k] - mean[k]).collect()).collect();
    let mut basis = vec![vec![1.0 / total.sqrt(); nv]];
    let mut coef = [[0.0; 3]; 3];
    // Gram–Schmidt on the centred coordinates, tracking coefficients
    for i in 0..3 {
        let mut v = centred[i].clone();
        let mut c = [0.0; 3];
        c[i] = 1.0;
        for j in 0..i {
            let proj = lap.inner(&v, &basis[j + 1]);
            for k in 0..nv {
                v[k] -= proj * basis[j + 1][k];
            }
            for k in 0..3 {
                c[k] -= proj * coef[j][k];
            }
        }
        let n = lap.norm_l2(&v);
        v.iter_mut().for_each(|t| *t /= n);
        c.iter_mut().for_each(|t| *t /= n);
        coef[i] = c;
        basis.push(v);
    }
    (basis, mean, coef)
}

/// Projection of the surface positions onto constants and linear
/// functions of the image points.
pub fn harmonic_project(param: &SphericalParam, mesh: &EmbeddedMesh, lap: &LaplaceOperator, slack: f64) -> Result<HarmonicProjection> {
    let n = mesh.ambient_dim();
    let nv = mesh.num_vertices();
    if param.num_vertices() != nv {
        return Err(Error::InvalidSpec("parametrization does not match mesh".into()));
    }
    let (basis, image_mean, coef) = degree_one_basis(param, lap);
    let f: Vec<Vec<f64>> = (0..n).map(|k| column(mesh, k)).collect();
    let alpha: Vec<Vec<f64>> = basis.iter().map(|v| (0..n).map(|k| lap.inner(&f[k], v)).collect()).collect();
    let offset: Vec<f64> = (0..n).map(|k| alpha[0][k] * basis[0][0]).collect();
    // l_j = Σ_i α_i c[i][j]
    let l: [Vec<f64>; 3] = std::array::from_fn(|j| (0..n).map(|k| (0..3).map(|i| alpha[i + 1][k] * coef[i][j]).sum()).collect());
    let mut res_sq = 0.0;
    let mut eig_sq = 0.0;
    let mut f_sq = 0.0;
    for k in 0..n {
        let mut r = f[k].clone();
        for (m, v) in basis.iter().enumerate() {
            for i in 0..nv {
                r[i] -= alpha[m][k] * v[i];
            }
        }
        res_sq += lap.inner(&r, &r);
        let lf = lap.laplacian(&f[k]);
        let e: Vec<f64> = (0..nv).map(|i| lf[i] + 2.0 * f[k][i]).collect();
        eig_sq += lap.inner(&e, &e);
        f_sq += lap.inner(&f[k], &f[k]);
    }
    let residual_l2 = res_sq.sqrt();
    let eigen_defect_l2 = eig_sq.sqrt();
    Ok(HarmonicProjection {
        alpha,
        l,
        offset,
        image_mean,
        residual_l2,
        eigen_defect_l2,
        f_norm_sq: f_sq,
        gap_bound_ok: residual_l2 <= eigen_defect_l2 / 2f64.min(LAMBDA_4 - 2.0) + slack,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    /// Gram–Schmidt frame `(l̃₁, l̃₂, l̃₃)`
    pub frame: [Vec<f64>; 3],
    /// closest orthonormal frame in the Frobenius norm
    pub polar: [Vec<f64>; 3],
    pub gram_deviation: f64,
    /// `max_i |l̃_i − polar_i|`
    pub polar_gap: f64,
    /// `max_i |l̃_i − l_i|`
    pub frame_shift: f64,
    /// orthonormal completion: `rows[i]·(x − offset)` is the i-th aligned
    /// coordinate
    pub rows: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
}

fn gram(l: &[Vec<f64>; 3]) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| dot(&l[i], &l[j])))
}

/// Closest orthonormal frame `L (LᵀL)^{-1/2}`.
pub fn polar_frame(l: &[Vec<f64>; 3]) -> Option<[Vec<f64>; 3]> {
    let g = gram(l);
    let m = DMatrix::from_fn(3, 3, |i, j| g[i][j]);
    let eig = SymmetricEigen::new(m);
    if eig.eigenvalues.iter().any(|&x| x <= 0.0) {
        return None;
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| 1.0 / x.sqrt()));
    let inv_sqrt = &eig.eigenvectors * d * eig.eigenvectors.transpose();
    let n = l[0].len();
    Some(std::array::from_fn(|j| (0..n).map(|k| (0..3).map(|i| l[i][k] * inv_sqrt[(i, j)]).sum()).collect()))
}

/// Gram–Schmidt on `l₁, l₂, l₃` and the rigid motion taking the result to
/// `e₁, e₂, e₃` after removing `α₀v₀`.
pub fn extract_rotation(proj: &HarmonicProjection) -> Result<Alignment> {
    let g = gram(&proj.l);
    let mut dev: f64 = 0.0;
    for (i, row) in g.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            dev = dev.max((x - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    if !(dev <= ALIGNMENT_LIMIT) {
        return Err(Error::AlignmentFailure(dev));
    }
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(3);
    for col in &proj.l {
        let next = crate::linalg::gram_schmidt_step(col, &frame).ok_or(Error::AlignmentFailure(dev))?;
        frame.push(next);
    }
    let frame: [Vec<f64>; 3] = [frame[0].clone(), frame[1].clone(), frame[2].clone()];
    let polar = polar_frame(&proj.l).ok_or(Error::AlignmentFailure(dev))?;
    let diff = |a: &[Vec<f64>; 3], b: &[Vec<f64>; 3]| (0..3).map(|i| crate::linalg::dist(&a[i], &b[i])).fold(0.0, f64::max);
    let mut rows: Vec<Vec<f64>> = frame.to_vec();
    rows.extend(complete_basis(&rows, proj.offset.len()));
    Ok(Alignment {
        polar_gap: diff(&frame, &polar),
        frame_shift: diff(&frame, &proj.l),
        frame,
        polar,
        gram_deviation: dev,
        rows,
        offset: proj.offset.clone(),
    })
}

impl Alignment {
    pub fn apply(&self, mesh: &EmbeddedMesh) -> Result<EmbeddedMesh> {
        mesh.map_positions(|x| {
            let y: Vec<f64> = x.iter().zip(&self.offset).map(|(a, b)| a - b).collect();
            self.rows.iter().map(|r| dot(r, &y)).collect()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct W22Deficit {
    pub total: f64,
    pub l2: f64,
    pub gradient: f64,
    pub laplacian: f64,
}

/// `(‖d‖² + ‖∇d‖² + ‖Δd‖²)^{1/2}` for `d = f − id_{S²}` on the image mesh.
pub fn w22_deficit(aligned: &EmbeddedMesh, param: &SphericalParam, lap: &LaplaceOperator) -> W22Deficit {
    let n = aligned.ambient_dim();
    let nv = aligned.num_vertices();
    let (mut l2, mut grad, mut laplacian) = (0.0, 0.0, 0.0);
    for k in 0..n {
        let d: Vec<f64> = (0..nv)
            .map(|v| aligned.position(v)[k] - if k < 3 { param.points[v][k] } else { 0.0 })
            .collect();
        l2 += lap.inner(&d, &d);
        grad += lap.dirichlet(&d);
        let ld = lap.laplacian(&d);
        laplacian += lap.inner(&ld, &ld);
    }
    W22Deficit {
        total: (l2 + grad + laplacian).sqrt(),
        l2: l2.sqrt(),
        gradient: grad.sqrt(),
        laplacian: laplacian.sqrt(),
    }
}

/// `‖H + 2(x − c)‖_{L²}` at the translation `c` minimising it,
/// `c = mean(x + H/2)`.
pub fn mean_deficit(mesh: &EmbeddedMesh, curv: &CurvatureField) -> (f64, Vec<f64>) {
    let n = mesh.ambient_dim();
    let total = tree_sum(&curv.dual_areas);
    let c: Vec<f64> = (0..n)
        .map(|k| curv.integrate(|v| mesh.position(v)[k] + 0.5 * curv.h[v][k]) / total)
        .collect();
    let sq = curv.integrate(|v| {
        let x = mesh.position(v);
        (0..n).map(|k| (curv.h[v][k] + 2.0 * (x[k] - c[k])).powi(2)).sum()
    });
    (sq.sqrt(), c)
}

/// `‖K − 1‖_{L¹}` with the angle-defect curvature over mixed areas.
pub fn gauss_deficit(curv: &CurvatureField) -> f64 {
    let t: Vec<f64> = (0..curv.len())
        .map(|v| (curv.angle_defects[v] - curv.mixed_areas[v]).abs())
        .collect();
    tree_sum(&t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralCheck {
    pub eigenvalues: [f64; 9],
    /// max relative error of eigenvalues 2..4 against 2
    pub linear_error: f64,
    /// max relative error of eigenvalues 5..9 against 6
    pub quadratic_error: f64,
}

impl SpectralCheck {
    pub fn passes(&self) -> bool {
        self.linear_error <= 0.02 && self.quadratic_error <= 0.05
    }
}

pub fn spectral_check(lap: &LaplaceOperator) -> Result<SpectralCheck> {
    let vals = lap.eigenvalues(9)?;
    let eigenvalues: [f64; 9] = std::array::from_fn(|i| vals[i]);
    let linear_error = eigenvalues[1..4].iter().map(|x| (x / 2.0 - 1.0).abs()).fold(0.0, f64::max);
    let quadratic_error = eigenvalues[4..9].iter().map(|x| (x / LAMBDA_4 - 1.0).abs()).fold(0.0, f64::max);
    Ok(SpectralCheck {
        eigenvalues,
        linear_error,
        quadratic_error,
    })
}

/// Which set of sphere-closeness fields a report carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SphereFields {
    Computed,
    /// `‖A⁰‖ ≥ δ₀`: only the energy bound `‖A‖ ≤ C‖A⁰‖` is asserted
    LargeDeficit,
    NotSphereType,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalConstants {
    pub funda: f64,
    /// `‖K − 1‖_{L¹} / ‖A⁰‖²`
    pub gauss: f64,
    pub mean: f64,
    pub w22: Option<f64>,
    pub u_inf: Option<f64>,
    pub u_l2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub ambient_dim: usize,
    pub chi: i64,
    pub a0_l2: f64,
    pub a_l2: f64,
    pub funda_deficit: f64,
    pub gauss_deficit: f64,
    pub mean_deficit: f64,
    pub w22_deficit: Option<f64>,
    pub u_inf: Option<f64>,
    pub u_l2: Option<f64>,
    pub half_area_dev: Option<f64>,
    pub empirical_constants: EmpiricalConstants,
    pub e_n: f64,
    pub hypothesis_ok: bool,
    /// branch threshold on `‖A⁰‖²`
    pub delta0_sq: f64,
    pub sphere_fields: SphereFields,
    /// `C` with `‖A‖ ≤ C‖A⁰‖` from the Gauss equation and Gauss–Bonnet
    pub large_branch_constant: Option<f64>,
    pub large_branch_ok: Option<bool>,
}

impl RigidityReport {
    /// Every populated deficit.
    pub fn deficits(&self) -> Vec<(&'static str, f64)> {
        let mut out = vec![
            ("a0_l2", self.a0_l2),
            ("funda_deficit", self.funda_deficit),
            ("gauss_deficit", self.gauss_deficit),
            ("mean_deficit", self.mean_deficit),
        ];
        for (k, v) in [
            ("w22_deficit", self.w22_deficit),
            ("u_inf", self.u_inf),
            ("u_l2", self.u_l2),
            ("half_area_dev", self.half_area_dev),
        ] {
            if let Some(v) = v {
                out.push((k, v));
            }
        }
        out
    }
}

/// Outputs of the conformal stage, when it ran.
#[derive(Debug, Clone, Copy)]
pub struct SphereStage {
    pub w22: f64,
    pub u_inf: f64,
    pub u_l2: f64,
    pub half_area_dev: f64,
}

/// Fills the report. With `‖A⁰‖² ≥ δ₀²` (`delta0_sq`, default `e_n`) the
/// sphere fields are not claimed; instead `‖A‖ ≤ C‖A⁰‖` is checked, where
/// `|A|² = 2|A⁰|² + 2K` and Gauss–Bonnet with `χ ≤ 2` give
/// `C² = 2 + 8π/δ₀²`.
pub fn assemble_report(
    mesh: &EmbeddedMesh,
    curv: &CurvatureField,
    energy: &EnergyReport,
    sphere: Option<Result<SphereStage>>,
    delta0_sq: Option<f64>,
) -> RigidityReport {
    let n = mesh.ambient_dim();
    let a0_l2 = energy.a0_l2sq.max(0.0).sqrt();
    let a_sq = curv.integrate(|v| curv.a_norm_sq(v));
    let funda = curv.integrate(|v| curv.funda_deficit_sq(v)).max(0.0).sqrt();
    let gauss = gauss_deficit(curv);
    let (mean, _) = mean_deficit(mesh, curv);
    let delta0 = delta0_sq.unwrap_or(e_n(n));
    let large = energy.a0_l2sq >= delta0 && energy.a0_l2sq > 0.0;
    let chi = mesh.euler_characteristic();

    let (sphere_fields, stage) = match sphere {
        None => (SphereFields::Skipped, None),
        Some(_) if chi != 2 => (SphereFields::NotSphereType, None),
        Some(Err(Error::NotSphereType(_))) => (SphereFields::NotSphereType, None),
        Some(_) if large => (SphereFields::LargeDeficit, None),
        Some(Ok(s)) => (SphereFields::Computed, Some(s)),
        Some(Err(_)) => (SphereFields::Skipped, None),
    };
    let (large_branch_constant, large_branch_ok) = if large {
        let c = (2.0 + 8.0 * std::f64::consts::PI / delta0).sqrt();
        (Some(c), Some(a_sq.max(0.0).sqrt() <= c * a0_l2 * (1.0 + 1e-9)))
    } else {
        (None, None)
    };
    let ratio = |x: f64| if a0_l2 > 0.0 { x / a0_l2 } else { f64::INFINITY };
    RigidityReport {
        ambient_dim: n,
        chi,
        a0_l2,
        a_l2: a_sq.max(0.0).sqrt(),
        funda_deficit: funda,
        gauss_deficit: gauss,
        mean_deficit: mean,
        w22_deficit: stage.map(|s| s.w22),
        u_inf: stage.map(|s| s.u_inf),
        u_l2: stage.map(|s| s.u_l2),
        half_area_dev: stage.map(|s| s.half_area_dev),
        empirical_constants: EmpiricalConstants {
            funda: ratio(funda),
            gauss: if a0_l2 > 0.0 { gauss / (a0_l2 * a0_l2) } else { f64::INFINITY },
            mean: ratio(mean),
            w22: stage.map(|s| ratio(s.w22)),
            u_inf: stage.map(|s| ratio(s.u_inf)),
            u_l2: stage.map(|s| ratio(s.u_l2)),
        },
        e_n: e_n(n),
        hypothesis_ok: energy.hypothesis_ok,
        delta0_sq: delta0,
        sphere_fields,
        large_branch_constant,
        large_branch_ok,
    }
}
