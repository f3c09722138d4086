//! Numerical isometric continuation: flow a reference surface by a normal
//! speed and carry a second surface along so that the two stay isometric,
//! recording the mass of the pair at every step.
//!
//! Each step takes an explicit Euler predictor from the linearized system
//! and then pulls the induced metric back onto the reference metric with
//! Gauss-Newton iterations. The least-squares solves reuse one SVD of the
//! initial operator as a right preconditioner for CGLS.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Vec3};
use crate::linearization::{
    relative_residual, FrameTensorField, GaugeReport, IsometryOperator, LinearizedIsometry, VariationDatum,
};
use crate::mass::{mass_scale, quasilocal_mass, MassReport};
use crate::sphere::{same_grid, ScalarField, SymTensorField};
use crate::surface::{SurfaceGeometry, TangentField};

/// Iteration controls for the continuation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationSettings {
    /// Accepted drift relative to the sup-norm of the target metric.
    pub relative_drift_tolerance: f64,
    /// Corrections continue while they pay off, down to this fraction of
    /// the tolerance.
    pub drift_goal_fraction: f64,
    pub max_corrections: usize,
    /// A stall is a relative decrease below `stall_decrease` over
    /// `stall_window` iterations.
    pub stall_window: usize,
    pub stall_decrease: f64,
    /// Relative tolerance on the CGLS normal-equation residual.
    pub krylov_tolerance: f64,
    /// Above this many CGLS iterations the preconditioner is rebuilt.
    pub krylov_refactor: usize,
    pub max_krylov: usize,
    /// Smallest admissible `min |H|` on either starting surface.
    pub mean_curvature_floor: f64,
}

impl Default for ContinuationSettings {
    fn default() -> Self {
        ContinuationSettings {
            relative_drift_tolerance: 1e-7,
            drift_goal_fraction: 1e-3,
            max_corrections: 50,
            stall_window: 10,
            stall_decrease: 0.1,
            krylov_tolerance: 1e-12,
            krylov_refactor: 60,
            max_krylov: 400,
            mean_curvature_floor: crate::linearization::MEAN_CURVATURE_FLOOR,
        }
    }
}

/// CGLS on `A W y = b` with `W` from a factorization of a nearby operator.
pub struct ReusedFactorization {
    factor: LinearizedIsometry,
    range: Mat<f64>,
}

impl std::fmt::Debug for ReusedFactorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ReusedFactorization")
            .field("kernel_dimension", &self.factor.kernel_dimension())
            .field("range", &self.range.ncols())
            .finish()
    }
}

/// Result of one preconditioned solve.
#[derive(Debug, Clone)]
pub struct KrylovSolution {
    pub normal_speed: ScalarField,
    pub tangential: TangentField,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    a.col_as_slice(0).iter().zip(b.col_as_slice(0)).map(|(x, y)| x * y).sum()
}

impl ReusedFactorization {
    pub fn new(surf: &SurfaceGeometry) -> Result<Self> {
        Ok(Self::from_factor(LinearizedIsometry::new(surf)?))
    }

    pub fn from_factor(factor: LinearizedIsometry) -> Self {
        let range = factor.range_map();
        ReusedFactorization { factor, range }
    }

    pub fn factor(&self) -> &LinearizedIsometry {
        &self.factor
    }

    pub fn gauge_report(&self) -> GaugeReport {
        let (kept, dropped) = self.factor.ratio_summary();
        GaugeReport {
            kernel_dimension: self.factor.kernel_dimension(),
            smallest_retained_ratio: kept,
            largest_discarded_ratio: dropped,
            projections: Vec::new(),
        }
    }

    /// Solve `2G h + L_P g = rhs` with the operator assembled on `surf`.
    pub fn solve(
        &self,
        surf: &SurfaceGeometry,
        op: &IsometryOperator,
        rhs: &FrameTensorField,
        settings: &ContinuationSettings,
    ) -> Result<KrylovSolution> {
        let a = op.matrix();
        let w = &self.range;
        let b = op.project(rhs)?;
        let apply = |y: &Mat<f64>| -> Mat<f64> { a * (w * y) };
        let apply_t = |z: &Mat<f64>| -> Mat<f64> { w.transpose() * (a.transpose() * z) };
        let mut y = Mat::<f64>::zeros(w.ncols(), 1);
        let mut r = b.clone();
        let mut s = apply_t(&r);
        let mut p = s.clone();
        let mut gamma = dot(&s, &s);
        let target = settings.krylov_tolerance * gamma.sqrt();
        let mut iterations = 0;
        let mut converged = gamma.sqrt() <= target || gamma == 0.0;
        while !converged && iterations < settings.max_krylov {
            let q = apply(&p);
            let qq = dot(&q, &q);
            if qq == 0.0 {
                break;
            }
            let alpha = gamma / qq;
            y += alpha * &p;
            r -= alpha * &q;
            s = apply_t(&r);
            let next = dot(&s, &s);
            iterations += 1;
            if next.sqrt() <= target {
                converged = true;
                break;
            }
            p = &s + (next / gamma) * &p;
            gamma = next;
        }
        let x = w * &y;
        let coeffs: Vec<f64> = x.col_as_slice(0).to_vec();
        let (normal_speed, tangential) = op.realize(surf, &coeffs, Some(rhs))?;
        Ok(KrylovSolution {
            normal_speed,
            tangential,
            iterations,
            converged,
        })
    }
}

/// Displace every node by `step (G ν + P)`.
pub fn displace(surf: &SurfaceGeometry, normal_speed: &ScalarField, p: &TangentField, step: f64) -> Result<SurfaceGeometry> {
    if !same_grid(normal_speed.grid(), surf.grid()) {
        return Err(Error::GridMismatch);
    }
    let w = p.ambient(surf)?;
    let moves: Vec<Vec3> = (0..surf.node_count())
        .map(|k| linalg::scale(&linalg::axpy(&w[k], normal_speed.values()[k], &surf.normal()[k]), step))
        .collect();
    move_nodes(surf, &moves)
}

fn move_nodes(surf: &SurfaceGeometry, moves: &[Vec3]) -> Result<SurfaceGeometry> {
    if moves.iter().all(|v| v.iter().all(|c| *c == 0.0)) {
        return Ok(surf.clone());
    }
    let pts: Vec<Vec3> = surf.positions().iter().zip(moves).map(|(x, d)| linalg::add(x, d)).collect();
    SurfaceGeometry::from_embedding(*surf.ambient(), surf.grid(), &pts)
}

/// One explicit step of `dX/ds = F ν`. Node `k` of the result is the image
/// of node `k`, so the grid keeps identifying points along the flow; use
/// [`SurfaceGeometry::graph_radius`] for the radial-graph representation.
pub fn normal_flow_step(surf: &SurfaceGeometry, speed: &ScalarField, ds: f64) -> Result<SurfaceGeometry> {
    if !same_grid(speed.grid(), surf.grid()) {
        return Err(Error::GridMismatch);
    }
    let moves: Vec<Vec3> = (0..surf.node_count())
        .map(|k| linalg::scale(&surf.normal()[k], ds * speed.values()[k]))
        .collect();
    move_nodes(surf, &moves)
}

/// Outcome of a drift correction.
#[derive(Debug, Clone)]
pub struct Correction {
    pub surface: SurfaceGeometry,
    pub drift: f64,
    pub tolerance: f64,
    /// Drift before each iteration and after the last.
    pub history: Vec<f64>,
    pub krylov_iterations: usize,
}

/// Gauss-Newton iterations pulling the induced metric of `surf` onto
/// `target`, with a factorization built on `surf`.
pub fn drift_correction(surf: &SurfaceGeometry, target: &SymTensorField) -> Result<Correction> {
    let settings = ContinuationSettings::default();
    let metric_gap = surf.metric_drift(target)?;
    if metric_gap == 0.0 {
        return Ok(Correction {
            surface: surf.clone(),
            drift: 0.0,
            tolerance: settings.relative_drift_tolerance * target.sup_norm(),
            history: vec![0.0],
            krylov_iterations: 0,
        });
    }
    let factor = ReusedFactorization::new(surf)?;
    drift_correction_with(&factor, surf, target, &settings)
}

pub fn drift_correction_with(
    factor: &ReusedFactorization,
    surf: &SurfaceGeometry,
    target: &SymTensorField,
    settings: &ContinuationSettings,
) -> Result<Correction> {
    let tolerance = settings.relative_drift_tolerance * target.sup_norm();
    let goal = tolerance * settings.drift_goal_fraction;
    let mut current = surf.clone();
    let mut drift = current.metric_drift(target)?;
    let mut history = vec![drift];
    let mut krylov_iterations = 0;
    loop {
        if drift <= goal {
            break;
        }
        let n = history.len();
        if n >= 2 && drift <= tolerance && drift > 0.5 * history[n - 2] {
            // accepted and no longer improving
            break;
        }
        if n > settings.stall_window {
            let before = history[n - 1 - settings.stall_window];
            if (before - drift) / before < settings.stall_decrease {
                break;
            }
        }
        if n > settings.max_corrections {
            break;
        }
        let gap = target.sub(&current.metric())?;
        let rhs = FrameTensorField::from_coordinates(&current, &gap)?;
        let op = IsometryOperator::assemble(&current)?;
        let sol = factor.solve(&current, &op, &rhs, settings)?;
        krylov_iterations += sol.iterations;
        let next = displace(&current, &sol.normal_speed, &sol.tangential, 1.0)?;
        let next_drift = next.metric_drift(target)?;
        if !(next_drift < drift) && drift <= tolerance {
            break;
        }
        current = next;
        drift = next_drift;
        history.push(drift);
    }
    if drift > tolerance {
        return Err(Error::DriftUncorrectable {
            drift,
            tolerance,
            iterations: history.len() - 1,
        });
    }
    Ok(Correction {
        surface: current,
        drift,
        tolerance,
        history,
        krylov_iterations,
    })
}

/// One retained point of a family.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub s: f64,
    pub sigma: SurfaceGeometry,
    pub sigma_prime: SurfaceGeometry,
    /// Predictor solve that produced this step; `None` at `s = 0`.
    pub datum: Option<VariationDatum>,
    pub drift: f64,
    pub report: MassReport,
    pub corrections: usize,
    pub krylov_iterations: usize,
}

/// One line of the family log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub s: f64,
    #[serde(rename = "E")]
    pub mass: f64,
    pub drift: f64,
    pub drift_tolerance: f64,
    #[serde(rename = "H_min")]
    pub min_mean: f64,
    #[serde(rename = "H_prime_min")]
    pub min_mean_reference: f64,
    pub sigma_convex: bool,
    pub sigma_prime_convex: bool,
    pub sigma_prime_mean_convex: bool,
    pub solver_residual: f64,
    pub corrections: usize,
}

/// A discrete family `Σ(s), Σ'(s)` with `s = k ds`, and optionally the
/// mirrored family run with `-F` for `s ≤ 0`.
#[derive(Debug, Clone)]
pub struct ContinuationFamily {
    pub ds: f64,
    pub steps: usize,
    pub drift_tolerance: f64,
    /// `∫ V H dσ` on the initial surface.
    pub scale: f64,
    pub records: Vec<StepRecord>,
    pub backward: Vec<StepRecord>,
}

impl ContinuationFamily {
    pub fn masses(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.report.mass).collect()
    }

    pub fn max_drift(&self) -> f64 {
        self.records.iter().chain(&self.backward).map(|r| r.drift).fold(0.0, f64::max)
    }

    pub fn log(&self) -> Vec<LogRecord> {
        let mut rows: Vec<&StepRecord> = self.backward.iter().skip(1).rev().collect();
        rows.extend(&self.records);
        rows.iter()
            .map(|r| LogRecord {
                s: r.s,
                mass: r.report.mass,
                drift: r.drift,
                drift_tolerance: self.drift_tolerance,
                min_mean: r.report.min_mean,
                min_mean_reference: r.report.min_mean_reference,
                sigma_convex: r.report.sigma_convex,
                sigma_prime_convex: r.report.sigma_prime_convex,
                sigma_prime_mean_convex: r.report.sigma_prime_mean_convex,
                solver_residual: r.datum.as_ref().map_or(0.0, |d| d.residual_norm),
                corrections: r.corrections,
            })
            .collect()
    }
}

/// Continue from `(sigma0, sigma_prime0)` to `s_max` in `steps` steps.
pub fn isometric_continuation(
    sigma0: &SurfaceGeometry,
    sigma_prime0: &SurfaceGeometry,
    speed: &ScalarField,
    s_max: f64,
    steps: usize,
) -> Result<ContinuationFamily> {
    let factor = ReusedFactorization::new(sigma0)?;
    isometric_continuation_with(
        &factor,
        sigma0,
        sigma_prime0,
        speed,
        s_max,
        steps,
        &ContinuationSettings::default(),
    )
}

/// As [`isometric_continuation`], also running `-F` to reach `-s_max`.
pub fn symmetric_continuation(
    sigma0: &SurfaceGeometry,
    sigma_prime0: &SurfaceGeometry,
    speed: &ScalarField,
    s_max: f64,
    steps: usize,
    settings: &ContinuationSettings,
) -> Result<ContinuationFamily> {
    let factor = ReusedFactorization::new(sigma0)?;
    symmetric_continuation_with(&factor, sigma0, sigma_prime0, speed, s_max, steps, settings)
}

/// Both directions share `factor`, which should come from `sigma0`.
pub fn symmetric_continuation_with(
    factor: &ReusedFactorization,
    sigma0: &SurfaceGeometry,
    sigma_prime0: &SurfaceGeometry,
    speed: &ScalarField,
    s_max: f64,
    steps: usize,
    settings: &ContinuationSettings,
) -> Result<ContinuationFamily> {
    let mut family = isometric_continuation_with(factor, sigma0, sigma_prime0, speed, s_max, steps, settings)?;
    let (mut backward, _) = run(factor, sigma0, sigma_prime0, &speed.scale(-1.0), s_max, steps, settings)?;
    for r in &mut backward {
        r.s = -r.s;
    }
    family.backward = backward;
    Ok(family)
}

pub fn isometric_continuation_with(
    factor: &ReusedFactorization,
    sigma0: &SurfaceGeometry,
    sigma_prime0: &SurfaceGeometry,
    speed: &ScalarField,
    s_max: f64,
    steps: usize,
    settings: &ContinuationSettings,
) -> Result<ContinuationFamily> {
    let (records, tol) = run(factor, sigma0, sigma_prime0, speed, s_max, steps, settings)?;
    Ok(ContinuationFamily {
        ds: s_max / steps as f64,
        steps,
        drift_tolerance: tol,
        scale: mass_scale(sigma0),
        records,
        backward: Vec::new(),
    })
}

fn run(
    factor: &ReusedFactorization,
    sigma0: &SurfaceGeometry,
    sigma_prime0: &SurfaceGeometry,
    speed: &ScalarField,
    s_max: f64,
    steps: usize,
    settings: &ContinuationSettings,
) -> Result<(Vec<StepRecord>, f64)> {
    if steps == 0 || !(s_max > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need steps > 0 and s_max > 0, got {steps} and {s_max}"
        )));
    }
    if !sigma0.same_grid(sigma_prime0) || !same_grid(speed.grid(), sigma0.grid()) {
        return Err(Error::GridMismatch);
    }
    for surf in [sigma0, sigma_prime0] {
        let min_abs = surf
            .mean_curvature()
            .values()
            .iter()
            .fold(f64::INFINITY, |a, h| a.min(h.abs()));
        if min_abs < settings.mean_curvature_floor {
            return Err(Error::MeanCurvatureDegenerate {
                min_abs,
                floor: settings.mean_curvature_floor,
            });
        }
    }
    let ds = s_max / steps as f64;
    let target0 = sigma_prime0.metric();
    let tol0 = settings.relative_drift_tolerance * target0.sup_norm();
    let drift0 = sigma0.metric_drift(&target0)?;
    if drift0 > tol0 {
        return Err(Error::DriftUncorrectable {
            drift: drift0,
            tolerance: tol0,
            iterations: 0,
        });
    }
    let mut records = vec![StepRecord {
        s: 0.0,
        sigma: sigma0.clone(),
        sigma_prime: sigma_prime0.clone(),
        datum: None,
        drift: drift0,
        report: quasilocal_mass(sigma0, sigma_prime0)?,
        corrections: 0,
        krylov_iterations: 0,
    }];
    let mut local: Option<ReusedFactorization> = None;
    for k in 0..steps {
        let last = records.last().expect("family starts with s = 0");
        let (sigma, sigma_prime) = (&last.sigma, &last.sigma_prime);
        let next_prime = normal_flow_step(sigma_prime, speed, ds)?;

        let rhs = FrameTensorField::scaled_second_form(sigma, sigma_prime, speed)?;
        let op = IsometryOperator::assemble(sigma)?;
        let active = local.as_ref().unwrap_or(factor);
        let mut sol = active.solve(sigma, &op, &rhs, settings)?;
        if !sol.converged || sol.iterations > settings.krylov_refactor {
            let fresh = ReusedFactorization::new(sigma)?;
            sol = fresh.solve(sigma, &op, &rhs, settings)?;
            local = Some(fresh);
        }
        let residual_norm = relative_residual(sigma, &rhs, &sol.normal_speed, &sol.tangential)?;
        let active = local.as_ref().unwrap_or(factor);
        let datum = VariationDatum {
            reference_speed: speed.clone(),
            normal_speed: sol.normal_speed.clone(),
            tangential: sol.tangential.clone(),
            residual_norm,
            gauge_report: active.gauge_report(),
        };
        let predicted = displace(sigma, &sol.normal_speed, &sol.tangential, ds)?;
        let corrected = drift_correction_with(active, &predicted, &next_prime.metric(), settings)?;
        let report = quasilocal_mass(&corrected.surface, &next_prime)?;
        records.push(StepRecord {
            s: (k + 1) as f64 * ds,
            sigma: corrected.surface,
            sigma_prime: next_prime,
            datum: Some(datum),
            drift: corrected.drift,
            report,
            corrections: corrected.history.len() - 1,
            krylov_iterations: sol.iterations + corrected.krylov_iterations,
        });
    }
    Ok((records, tol0))
}

/// Finite-difference `E'(0)` with a Richardson estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassDerivative {
    /// Richardson-extrapolated derivative.
    pub value: f64,
    /// `|extrapolated - unextrapolated|`.
    pub error: f64,
    /// The smaller of the two difference steps.
    pub step: f64,
    pub central: bool,
}

/// `E'(0)` from a family: central differences when the mirrored family is
/// present, second-order one-sided differences otherwise.
pub fn fd_mass_derivative(family: &ContinuationFamily) -> Result<MassDerivative> {
    if family.steps < 5 {
        return Err(Error::InvalidParameter(format!(
            "need at least 5 steps, family has {}",
            family.steps
        )));
    }
    let fwd = family.masses();
    if !family.backward.is_empty() {
        let bwd: Vec<f64> = family.backward.iter().map(|r| r.report.mass).collect();
        let j = family.steps / 4;
        let h = j as f64 * family.ds;
        let d1 = (fwd[j] - bwd[j]) / (2.0 * h);
        let d2 = (fwd[2 * j] - bwd[2 * j]) / (4.0 * h);
        let value = (4.0 * d1 - d2) / 3.0;
        Ok(MassDerivative {
            value,
            error: (value - d1).abs(),
            step: h,
            central: true,
        })
    } else {
        let j = family.steps / 4;
        let h = j as f64 * family.ds;
        let one_sided = |m: usize| (-3.0 * fwd[0] + 4.0 * fwd[m * j] - fwd[2 * m * j]) / (2.0 * m as f64 * h);
        let (d1, d2) = (one_sided(1), one_sided(2));
        let value = (4.0 * d1 - d2) / 3.0;
        Ok(MassDerivative {
            value,
            error: (value - d1).abs(),
            step: h,
            central: false,
        })
    }
}

/// `E'(0)` along the first-order family generated by one linear solve,
/// against a reference known only through its second fundamental form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderCheck {
    pub derivative: f64,
    pub derivative_error: f64,
    pub rhs: f64,
    /// Absolute when `rhs` is zero.
    pub relative_error: f64,
    pub solver_residual: f64,
}

/// The reference shares the metric of `sigma` and has second form
/// `reference_form`, whose trace must equal `H`. Its mean curvature evolves
/// by `δH' = -ΔF - (Ric' + |h'|²) F` with `Ric'` from its Gauss equation,
/// while `sigma` is moved by the solution `(G, P)` of the linear system.
pub fn first_order_family_derivative(
    factor: &LinearizedIsometry,
    sigma: &SurfaceGeometry,
    reference_form: &SymTensorField,
    speed: &ScalarField,
    step: f64,
) -> Result<FirstOrderCheck> {
    use crate::mass::first_variation_rhs_for;
    let n = sigma.node_count();
    let target = reference_form.scale_by(speed, 2.0)?;
    let rhs = FrameTensorField::from_coordinates(sigma, &target)?;
    let (g, p, _) = factor.solve_tensor(sigma, &rhs)?;
    let solver_residual = relative_residual(sigma, &rhs, &g, &p)?;

    let gauss = sigma.gauss_curvature_extrinsic();
    let lap = sigma.laplace_beltrami(speed)?;
    let ref_mean: Vec<f64> = (0..n)
        .map(|k| linalg::sym2_contract(sigma.inverse_metric_at(k), &reference_form.components()[k]))
        .collect();
    let ref_variation: Vec<f64> = (0..n)
        .map(|k| {
            let hp = &reference_form.components()[k];
            let norm2 = linalg::sym2_frame_norm2(&sigma.frame_at(k).tensor_to_frame(hp));
            let ric = -gauss.values()[k] + 0.5 * (ref_mean[k] * ref_mean[k] - norm2);
            -lap.values()[k] - (ric + norm2) * speed.values()[k]
        })
        .collect();
    let mass_at = |s: f64| -> Result<f64> {
        let moved = displace(sigma, &g, &p, s)?;
        let (v, h) = (moved.potential(), moved.mean_curvature());
        let integrand: Vec<f64> = (0..n)
            .map(|k| v.values()[k] * (h.values()[k] - ref_mean[k] - s * ref_variation[k]))
            .collect();
        Ok(moved.integrate_values(&integrand))
    };
    let central = |h: f64| -> Result<f64> { Ok((mass_at(h)? - mass_at(-h)?) / (2.0 * h)) };
    let d_coarse = central(2.0 * step)?;
    let d_fine = central(step)?;
    let derivative = (4.0 * d_fine - d_coarse) / 3.0;
    let rhs_value = first_variation_rhs_for(sigma, reference_form, speed)?;
    Ok(FirstOrderCheck {
        derivative,
        derivative_error: (derivative - d_fine).abs(),
        rhs: rhs_value,
        relative_error: if rhs_value == 0.0 {
            derivative.abs()
        } else {
            (derivative - rhs_value).abs() / rhs_value.abs()
        },
        solver_residual,
    })
}

#[cfg(test)]
mod tests;
