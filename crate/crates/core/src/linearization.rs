//! The linearized isometric-embedding system `2F h' = 2G h + L_P g`.
//!
//! Unknowns are the Helmholtz potentials of `P` (spherical-harmonic
//! coefficients of degree `1..=L`) and the nodal values of `G`. At each node
//! the equation lives in the three-dimensional space of symmetric 2-tensors;
//! with frame coordinates `t = (T11, √2 T12, T22)` the Euclidean norm of `t`
//! is the tensor norm. `G` only enters along the direction of `h`, so it is
//! eliminated pointwise and the remaining two components form a dense
//! least-squares problem for the potentials.

use std::f64::consts::SQRT_2;

use faer::linalg::solvers::SolveLstsq;
use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Sym2, Vec3};
use crate::sphere::harmonics::sh_degree_order;
use crate::sphere::{same_grid, ScalarField, SymTensorField};
use crate::surface::{SurfaceGeometry, TangentField};

/// Singular values below this fraction of the largest are treated as kernel.
pub const KERNEL_THRESHOLD: f64 = 1e-8;
/// A drop of at least this factor between consecutive singular values,
/// below [`GAP_CEILING`] relative to the largest, marks the start of the
/// kernel even above [`KERNEL_THRESHOLD`]. Bending modes on coarse grids are
/// only approximately null.
pub const KERNEL_GAP: f64 = 1e3;
pub const GAP_CEILING: f64 = 1e-4;
/// Largest kernel the solver accepts: rotations plus conformal or
/// translational modes on exceptional surfaces.
pub const MAX_KERNEL: usize = 6;
/// Default floor on `|H|` for dividing by the mean curvature.
pub const MEAN_CURVATURE_FLOOR: f64 = 1e-8;

/// Projections removed along the numerical kernel.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct GaugeReport {
    pub kernel_dimension: usize,
    /// `σ_min / σ_max` over the retained singular values.
    pub smallest_retained_ratio: f64,
    /// Largest discarded ratio, 0 when the kernel is empty.
    pub largest_discarded_ratio: f64,
    /// Coefficients of the removed component in the kernel basis.
    pub projections: Vec<f64>,
}

/// Solution of the linearized system.
#[derive(Debug, Clone)]
pub struct VariationDatum {
    /// Normal speed of the reference surface.
    pub reference_speed: ScalarField,
    /// Normal speed of the deformed surface.
    pub normal_speed: ScalarField,
    /// Tangential part of the deformation.
    pub tangential: TangentField,
    /// `max |δg - 2F h'| / max |2F h'|`, recomputed from the solution.
    pub residual_norm: f64,
    pub gauge_report: GaugeReport,
}

#[inline]
pub(crate) fn tvec(t: &Sym2) -> Vec3 {
    [t[0], SQRT_2 * t[1], t[2]]
}

#[inline]
fn from_tvec(t: &Vec3) -> Sym2 {
    [t[0], t[1] / SQRT_2, t[2]]
}

/// `L_P g` in frame components for `P = ∇f + ε∇u`, from frame Hessians.
#[inline]
fn lie_derivative_frame(hf: &Sym2, hu: &Sym2) -> Vec3 {
    [
        2.0 * hf[0] + 2.0 * hu[1],
        SQRT_2 * (2.0 * hf[1] + hu[2] - hu[0]),
        2.0 * hf[2] - 2.0 * hu[1],
    ]
}

fn lie_derivative_nodal(surf: &SurfaceGeometry, p: &TangentField) -> Vec<Vec3> {
    let df = p.potential().derivatives(2);
    let du = p.stream().derivatives(2);
    (0..surf.node_count())
        .map(|k| {
            let fr = surf.frame_at(k);
            let hf = fr.tensor_to_frame(&surf.hessian_at(&df, k));
            let hu = fr.tensor_to_frame(&surf.hessian_at(&du, k));
            lie_derivative_frame(&hf, &hu)
        })
        .collect()
}

fn check_tangent(surf: &SurfaceGeometry, p: &TangentField) -> Result<()> {
    if same_grid(p.potential().grid(), surf.grid()) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// `δg_ab = 2G h_ab + ∇_a P_b + ∇_b P_a` in parameter coordinates.
pub fn metric_variation(surf: &SurfaceGeometry, normal_speed: &ScalarField, p: &TangentField) -> Result<SymTensorField> {
    if !same_grid(normal_speed.grid(), surf.grid()) {
        return Err(Error::GridMismatch);
    }
    check_tangent(surf, p)?;
    let lie = lie_derivative_nodal(surf, p);
    let out = (0..surf.node_count())
        .map(|k| {
            let fr = surf.frame_at(k);
            let h = tvec(&fr.tensor_to_frame(surf.second_form_at(k)));
            let t = linalg::axpy(&lie[k], 2.0 * normal_speed.values()[k], &h);
            fr.tensor_from_frame(&from_tvec(&t))
        })
        .collect();
    SymTensorField::new(surf.grid().clone(), out)
}

/// `F = G + div P / H`.
pub fn trace_reduction(surf: &SurfaceGeometry, normal_speed: &ScalarField, p: &TangentField) -> Result<ScalarField> {
    trace_reduction_with_floor(surf, normal_speed, p, MEAN_CURVATURE_FLOOR)
}

pub fn trace_reduction_with_floor(
    surf: &SurfaceGeometry,
    normal_speed: &ScalarField,
    p: &TangentField,
    floor: f64,
) -> Result<ScalarField> {
    let mean = checked_mean(surf, floor)?;
    let div = p.divergence(surf)?;
    let ratio = div.zip_with(&mean, |d, h| d / h)?;
    normal_speed.axpy(1.0, &ratio)
}

fn checked_mean(surf: &SurfaceGeometry, floor: f64) -> Result<ScalarField> {
    let mean = surf.mean_curvature();
    let min_abs = mean.values().iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    if !(min_abs >= floor) {
        return Err(Error::MeanCurvatureDegenerate { min_abs, floor });
    }
    Ok(mean)
}

fn check_pair(sigma: &SurfaceGeometry, sigma_prime: &SurfaceGeometry, fields: &[&ScalarField]) -> Result<()> {
    if !sigma.same_grid(sigma_prime) || fields.iter().any(|f| !same_grid(f.grid(), sigma.grid())) {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// `δg - 2F h'`, with `h'` pulled back through the shared grid.
pub fn isometry_residual(
    sigma: &SurfaceGeometry,
    sigma_prime: &SurfaceGeometry,
    reference_speed: &ScalarField,
    normal_speed: &ScalarField,
    p: &TangentField,
) -> Result<SymTensorField> {
    check_pair(sigma, sigma_prime, &[reference_speed, normal_speed])?;
    let dg = metric_variation(sigma, normal_speed, p)?;
    let target = sigma_prime.second_form().scale_by(reference_speed, 2.0)?;
    dg.sub(&target)
}

/// `2F(h' - h) - (L_P g - 2 (h/H) div P)`.
pub fn traceless_residual(
    sigma: &SurfaceGeometry,
    sigma_prime: &SurfaceGeometry,
    reference_speed: &ScalarField,
    normal_speed: &ScalarField,
    p: &TangentField,
) -> Result<SymTensorField> {
    check_pair(sigma, sigma_prime, &[reference_speed, normal_speed])?;
    check_tangent(sigma, p)?;
    let mean = checked_mean(sigma, MEAN_CURVATURE_FLOOR)?;
    let div = p.divergence(sigma)?;
    let lie = lie_derivative_nodal(sigma, p);
    let out = (0..sigma.node_count())
        .map(|k| {
            let fr = sigma.frame_at(k);
            let h = tvec(&fr.tensor_to_frame(sigma.second_form_at(k)));
            let hp = tvec(&fr.tensor_to_frame(sigma_prime.second_form_at(k)));
            let f = reference_speed.values()[k];
            let lhs = linalg::scale(&linalg::sub(&hp, &h), 2.0 * f);
            let rhs = linalg::axpy(&lie[k], -2.0 * div.values()[k] / mean.values()[k], &h);
            fr.tensor_from_frame(&from_tvec(&linalg::sub(&lhs, &rhs)))
        })
        .collect();
    SymTensorField::new(sigma.grid().clone(), out)
}

/// Largest frame norm over the nodes of a coordinate tensor field on `surf`.
pub fn frame_sup_norm(surf: &SurfaceGeometry, t: &SymTensorField) -> f64 {
    t.components()
        .iter()
        .enumerate()
        .map(|(k, c)| linalg::sym2_frame_norm2(&surf.frame_at(k).tensor_to_frame(c)).sqrt())
        .fold(0.0, f64::max)
}

/// Right-hand side of the linear system in frame coordinates.
#[derive(Debug, Clone)]
pub struct FrameTensorField(pub Vec<Vec3>);

impl FrameTensorField {
    /// Frame coordinates of a coordinate tensor field on `surf`.
    pub fn from_coordinates(surf: &SurfaceGeometry, t: &SymTensorField) -> Result<Self> {
        if !same_grid(t.grid(), surf.grid()) {
            return Err(Error::GridMismatch);
        }
        Ok(FrameTensorField(
            t.components()
                .iter()
                .enumerate()
                .map(|(k, c)| tvec(&surf.frame_at(k).tensor_to_frame(c)))
                .collect(),
        ))
    }

    /// `2F h'` expressed in the frame of `sigma`.
    pub fn scaled_second_form(sigma: &SurfaceGeometry, sigma_prime: &SurfaceGeometry, speed: &ScalarField) -> Result<Self> {
        check_pair(sigma, sigma_prime, &[speed])?;
        Ok(FrameTensorField(
            (0..sigma.node_count())
                .map(|k| {
                    let hp = tvec(&sigma.frame_at(k).tensor_to_frame(sigma_prime.second_form_at(k)));
                    linalg::scale(&hp, 2.0 * speed.values()[k])
                })
                .collect(),
        ))
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().map(linalg::norm).fold(0.0, f64::max)
    }
}

/// Assembled least-squares operator on one surface.
///
/// Row pair `2k, 2k+1` holds the two components orthogonal to `h` at node
/// `k`, weighted by the square root of the quadrature measure. Columns are
/// potential coefficients, `f` first then `u`, each for degrees `1..=L`.
#[derive(Debug, Clone)]
pub struct IsometryOperator {
    matrix: Mat<f64>,
    weights: Vec<f64>,
    complement: Vec<[Vec3; 2]>,
    h_unit: Vec<Vec3>,
    h_norm: Vec<f64>,
    unknowns_per_potential: usize,
}

fn complement_basis(u: &Vec3) -> [Vec3; 2] {
    let axis = if u[0].abs() <= u[1].abs() && u[0].abs() <= u[2].abs() {
        [1.0, 0.0, 0.0]
    } else if u[1].abs() <= u[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let a = linalg::cross(u, &axis);
    let a = linalg::scale(&a, 1.0 / linalg::norm(&a));
    [a, linalg::cross(u, &a)]
}

impl IsometryOperator {
    pub fn assemble(surf: &SurfaceGeometry) -> Result<Self> {
        let min_k = surf.min_principal_curvature();
        if !(min_k > 0.0) {
            return Err(Error::ConvexityViolation { min_curvature: min_k });
        }
        let grid = surf.grid();
        let n = surf.node_count();
        let nu = grid.coefficient_count() - 1;
        let mut weights = Vec::with_capacity(n);
        let mut complement = Vec::with_capacity(n);
        let mut h_unit = Vec::with_capacity(n);
        let mut h_norm = Vec::with_capacity(n);
        for k in 0..n {
            let h = tvec(&surf.frame_at(k).tensor_to_frame(surf.second_form_at(k)));
            let norm = linalg::norm(&h);
            let u = linalg::scale(&h, 1.0 / norm);
            weights.push(surf.measure_at(k).sqrt());
            complement.push(complement_basis(&u));
            h_unit.push(u);
            h_norm.push(norm);
        }
        let mut matrix = Mat::<f64>::zeros(2 * n, 2 * nu);
        for j in 0..nu {
            let (l, m) = sh_degree_order(j + 1);
            for k in 0..n {
                let y = grid.basis_derivatives(l, m, k);
                let chr = surf.christoffel_at(k);
                let hess = [
                    y[3] - chr[0][0] * y[1] - chr[1][0] * y[2],
                    y[4] - chr[0][1] * y[1] - chr[1][1] * y[2],
                    y[5] - chr[0][2] * y[1] - chr[1][2] * y[2],
                ];
                let hf = surf.frame_at(k).tensor_to_frame(&hess);
                let tf = lie_derivative_frame(&hf, &[0.0; 3]);
                let tu = lie_derivative_frame(&[0.0; 3], &hf);
                let q = &complement[k];
                let w = weights[k];
                matrix[(2 * k, j)] = w * linalg::dot(&q[0], &tf);
                matrix[(2 * k + 1, j)] = w * linalg::dot(&q[1], &tf);
                matrix[(2 * k, nu + j)] = w * linalg::dot(&q[0], &tu);
                matrix[(2 * k + 1, nu + j)] = w * linalg::dot(&q[1], &tu);
            }
        }
        Ok(IsometryOperator {
            matrix,
            weights,
            complement,
            h_unit,
            h_norm,
            unknowns_per_potential: nu,
        })
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn unknowns(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.matrix
    }

    /// Weighted complement components of a frame tensor field.
    pub fn project(&self, rhs: &FrameTensorField) -> Result<Mat<f64>> {
        if rhs.0.len() != self.weights.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Mat::from_fn(self.rows(), 1, |i, _| {
            let k = i / 2;
            self.weights[k] * linalg::dot(&self.complement[k][i % 2], &rhs.0[k])
        }))
    }

    /// `G` at each node: the component of `rhs - L_P g` along `h`.
    fn eliminated_normal_speed(&self, surf: &SurfaceGeometry, rhs: Option<&FrameTensorField>, p: &TangentField) -> Vec<f64> {
        let lie = lie_derivative_nodal(surf, p);
        (0..lie.len())
            .map(|k| {
                let r = match rhs {
                    Some(r) => linalg::sub(&r.0[k], &lie[k]),
                    None => linalg::scale(&lie[k], -1.0),
                };
                linalg::dot(&r, &self.h_unit[k]) / (2.0 * self.h_norm[k])
            })
            .collect()
    }

    fn tangent_from(&self, surf: &SurfaceGeometry, coeffs: &[f64]) -> Result<TangentField> {
        let nu = self.unknowns_per_potential;
        let mut f = vec![0.0; nu + 1];
        let mut u = vec![0.0; nu + 1];
        f[1..].copy_from_slice(&coeffs[..nu]);
        u[1..].copy_from_slice(&coeffs[nu..]);
        TangentField::from_coefficients(surf.grid(), &f, &u)
    }

    /// `(G, P)` for potential coefficients `coeffs` and right-hand side `rhs`.
    pub fn realize(
        &self,
        surf: &SurfaceGeometry,
        coeffs: &[f64],
        rhs: Option<&FrameTensorField>,
    ) -> Result<(ScalarField, TangentField)> {
        let p = self.tangent_from(surf, coeffs)?;
        let g = self.eliminated_normal_speed(surf, rhs, &p);
        Ok((ScalarField::new(surf.grid().clone(), g)?, p))
    }
}

/// Values strictly below the returned cut form the numerical kernel.
fn kernel_cut(singular: &[f64], smax: f64) -> f64 {
    let mut sorted = singular.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let n = sorted.len();
    let mut gap_cut = 0.0;
    let mut best = KERNEL_GAP;
    for k in 1..=MAX_KERNEL.min(n.saturating_sub(1)) {
        let (above, below) = (sorted[n - k - 1], sorted[n - k]);
        if below < GAP_CEILING * smax && above >= best * below {
            best = if below > 0.0 { above / below } else { f64::INFINITY };
            gap_cut = above;
        }
    }
    f64::max(KERNEL_THRESHOLD * smax, gap_cut)
}

/// Factorized operator: column-scaled thin SVD with the numerical kernel
/// split off.
#[derive(Debug)]
pub struct LinearizedIsometry {
    operator: IsometryOperator,
    column_scale: Vec<f64>,
    u: Mat<f64>,
    v: Mat<f64>,
    singular: Vec<f64>,
    retained: Vec<usize>,
    kernel: Vec<usize>,
}

impl LinearizedIsometry {
    pub fn new(surf: &SurfaceGeometry) -> Result<Self> {
        let operator = IsometryOperator::assemble(surf)?;
        // Columns are scaled by a fixed function of the degree, so that
        // numerically null combinations stay null.
        let mut scaled = operator.matrix.clone();
        let nu = operator.unknowns_per_potential;
        let column_scale: Vec<f64> = (0..scaled.ncols())
            .map(|j| {
                let l = sh_degree_order(j % nu + 1).0 as f64;
                1.0 / (1.0 + l * (l + 1.0))
            })
            .collect();
        for (j, s) in column_scale.iter().enumerate() {
            scaled.col_as_slice_mut(j).iter_mut().for_each(|v| *v *= s);
        }
        let svd = scaled
            .thin_svd()
            .map_err(|e| Error::SolverFailure(format!("singular value decomposition failed: {e:?}")))?;
        let singular: Vec<f64> = svd.S().column_vector().iter().copied().collect();
        let smax = singular.iter().cloned().fold(0.0, f64::max);
        if !(smax > 0.0) {
            return Err(Error::SolverFailure("operator vanishes".into()));
        }
        let cut = kernel_cut(&singular, smax);
        let (kernel, retained): (Vec<usize>, Vec<usize>) = (0..singular.len()).partition(|&i| singular[i] < cut);
        if kernel.len() > MAX_KERNEL {
            return Err(Error::SolverFailure(format!(
                "kernel dimension {} exceeds {MAX_KERNEL}",
                kernel.len()
            )));
        }
        Ok(LinearizedIsometry {
            operator,
            column_scale,
            u: svd.U().to_owned(),
            v: svd.V().to_owned(),
            singular,
            retained,
            kernel,
        })
    }

    pub fn operator(&self) -> &IsometryOperator {
        &self.operator
    }

    pub fn kernel_dimension(&self) -> usize {
        self.kernel.len()
    }

    /// Singular values of the column-scaled operator divided by the largest,
    /// in descending order.
    pub fn singular_value_ratios(&self) -> Vec<f64> {
        let smax = self.singular.iter().cloned().fold(0.0, f64::max);
        let mut r: Vec<f64> = self.singular.iter().map(|s| s / smax).collect();
        r.sort_by(|a, b| b.total_cmp(a));
        r
    }

    /// `D V_r Σ_r⁻¹`: maps coordinates along the retained left singular
    /// vectors to potential coefficients.
    pub(crate) fn range_map(&self) -> Mat<f64> {
        Mat::from_fn(self.v.nrows(), self.retained.len(), |r, c| {
            let i = self.retained[c];
            self.column_scale[r] * self.v[(r, i)] / self.singular[i]
        })
    }

    pub(crate) fn ratio_summary(&self) -> (f64, f64) {
        let smax = self.singular.iter().cloned().fold(0.0, f64::max);
        let kept = self.retained.iter().map(|&i| self.singular[i]).fold(f64::INFINITY, f64::min) / smax;
        let dropped = self.kernel.iter().map(|&i| self.singular[i]).fold(0.0, f64::max) / smax;
        (kept, dropped)
    }

    /// Kernel directions as potential coefficient vectors.
    pub fn kernel_coefficients(&self) -> Vec<Vec<f64>> {
        self.kernel
            .iter()
            .map(|&i| (0..self.v.nrows()).map(|r| self.v[(r, i)] * self.column_scale[r]).collect())
            .collect()
    }

    /// Kernel directions realised as `(G, P)` on `surf`.
    pub fn kernel_data(&self, surf: &SurfaceGeometry) -> Result<Vec<(ScalarField, TangentField)>> {
        self.kernel_coefficients()
            .iter()
            .map(|c| self.operator.realize(surf, c, None))
            .collect()
    }

    /// Minimum-norm least-squares coefficients over the retained subspace.
    pub fn solve_coefficients(&self, rhs: &FrameTensorField) -> Result<Vec<f64>> {
        let b = self.operator.project(rhs)?;
        let mut y = vec![0.0; self.v.nrows()];
        for &i in &self.retained {
            let ui = self.u.col_as_slice(i);
            let coef = ui.iter().zip(b.col_as_slice(0)).map(|(a, c)| a * c).sum::<f64>() / self.singular[i];
            for (r, slot) in y.iter_mut().enumerate() {
                *slot += coef * self.v[(r, i)];
            }
        }
        for (slot, s) in y.iter_mut().zip(&self.column_scale) {
            *slot *= s;
        }
        Ok(y)
    }

    /// Solve `2G h + L_P g = rhs` and fix the gauge against the kernel.
    pub fn solve_tensor(
        &self,
        surf: &SurfaceGeometry,
        rhs: &FrameTensorField,
    ) -> Result<(ScalarField, TangentField, GaugeReport)> {
        let coeffs = self.solve_coefficients(rhs)?;
        let (g, p) = self.operator.realize(surf, &coeffs, Some(rhs))?;
        let kernel = self.kernel_data(surf)?;
        let (g, p, projections) = remove_kernel(surf, g, p, &kernel)?;
        let (kept, dropped) = self.ratio_summary();
        Ok((
            g,
            p,
            GaugeReport {
                kernel_dimension: self.kernel.len(),
                smallest_retained_ratio: kept,
                largest_discarded_ratio: dropped,
                projections,
            },
        ))
    }

    /// Solve against `2F h'` for a pair sharing one grid.
    pub fn solve(
        &self,
        sigma: &SurfaceGeometry,
        sigma_prime: &SurfaceGeometry,
        reference_speed: &ScalarField,
    ) -> Result<VariationDatum> {
        let rhs = FrameTensorField::scaled_second_form(sigma, sigma_prime, reference_speed)?;
        let (g, p, gauge_report) = self.solve_tensor(sigma, &rhs)?;
        let residual_norm = relative_residual(sigma, &rhs, &g, &p)?;
        Ok(VariationDatum {
            reference_speed: reference_speed.clone(),
            normal_speed: g,
            tangential: p,
            residual_norm,
            gauge_report,
        })
    }
}

/// `max |2G h + L_P g - rhs| / max |rhs|` in the frame norm; 0 for a zero
/// right-hand side solved exactly.
pub fn relative_residual(surf: &SurfaceGeometry, rhs: &FrameTensorField, g: &ScalarField, p: &TangentField) -> Result<f64> {
    let dg = FrameTensorField::from_coordinates(surf, &metric_variation(surf, g, p)?)?;
    let err =
        dg.0.iter()
            .zip(&rhs.0)
            .map(|(a, b)| linalg::norm(&linalg::sub(a, b)))
            .fold(0.0, f64::max);
    let scale = rhs.sup_norm();
    if scale == 0.0 {
        Ok(err)
    } else {
        Ok(err / scale)
    }
}

/// `∫ (G₁G₂ + ⟨P₁, P₂⟩) dσ`.
pub fn deformation_inner_product(
    surf: &SurfaceGeometry,
    a: (&ScalarField, &TangentField),
    b: (&ScalarField, &TangentField),
) -> Result<f64> {
    let pa = a.1.frame_components(surf)?;
    let pb = b.1.frame_components(surf)?;
    let v: Vec<f64> = (0..surf.node_count())
        .map(|k| a.0.values()[k] * b.0.values()[k] + pa[k][0] * pb[k][0] + pa[k][1] * pb[k][1])
        .collect();
    Ok(surf.integrate_values(&v))
}

/// L² projection of `(G, P)` away from the span of `kernel`.
pub fn remove_kernel(
    surf: &SurfaceGeometry,
    g: ScalarField,
    p: TangentField,
    kernel: &[(ScalarField, TangentField)],
) -> Result<(ScalarField, TangentField, Vec<f64>)> {
    let d = kernel.len();
    if d == 0 {
        return Ok((g, p, Vec::new()));
    }
    let mut gram = Mat::<f64>::zeros(d, d);
    let mut b = Mat::<f64>::zeros(d, 1);
    for i in 0..d {
        for j in 0..=i {
            let v = deformation_inner_product(surf, (&kernel[i].0, &kernel[i].1), (&kernel[j].0, &kernel[j].1))?;
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
        b[(i, 0)] = deformation_inner_product(surf, (&g, &p), (&kernel[i].0, &kernel[i].1))?;
    }
    let c = gram.col_piv_qr().solve_lstsq(&b);
    let mut g = g;
    let mut p = p;
    let mut projections = Vec::with_capacity(d);
    for (i, (kg, kp)) in kernel.iter().enumerate() {
        let ci = c[(i, 0)];
        g = g.axpy(-ci, kg)?;
        p = p.axpy(-ci, kp)?;
        projections.push(ci);
    }
    Ok((g, p, projections))
}

/// Factorize on `sigma` and solve `2F h' = 2G h + L_P g`.
pub fn solve_linearized_isometry(
    sigma: &SurfaceGeometry,
    sigma_prime: &SurfaceGeometry,
    reference_speed: &ScalarField,
) -> Result<VariationDatum> {
    check_pair(sigma, sigma_prime, &[reference_speed])?;
    LinearizedIsometry::new(sigma)?.solve(sigma, sigma_prime, reference_speed)
}

#[cfg(test)]
mod tests;
