//! The quasi-local mass `E = ∫_Σ V (H - H') dσ` of a surface paired with
//! an isometric reference, and its first variation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Sym2};
use crate::sphere::{same_grid, ScalarField, SymTensorField};
use crate::surface::{SurfaceGeometry, TangentField};

/// Relative tolerance for a Penrose violation, in units of `∫ V H dσ`.
pub const PENROSE_TOLERANCE: f64 = 1e-8;

/// Mass of a pair together with the hypotheses of the Penrose sign check.
///
/// JSON field names: `E`, `scale`, `H_min`, `H_prime_min`, `sigma_convex`,
/// `sigma_prime_convex`, `sigma_prime_mean_convex`, `ric_nu_max`,
/// `ric_nu_nonpositive`, `hypotheses_met`, `penrose_margin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassReport {
    #[serde(rename = "E")]
    pub mass: f64,
    /// `∫ V H dσ`, the natural size of `E`.
    pub scale: f64,
    #[serde(rename = "H_min")]
    pub min_mean: f64,
    #[serde(rename = "H_prime_min")]
    pub min_mean_reference: f64,
    pub sigma_convex: bool,
    pub sigma_prime_convex: bool,
    pub sigma_prime_mean_convex: bool,
    pub ric_nu_max: f64,
    pub ric_nu_nonpositive: bool,
    pub hypotheses_met: bool,
    /// `E` when the hypotheses hold.
    pub penrose_margin: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PenroseVerdict {
    Holds,
    Violated,
    HypothesesNotMet,
}

fn check_pair(sigma: &SurfaceGeometry, sigma_prime: &SurfaceGeometry) -> Result<()> {
    if sigma.same_grid(sigma_prime) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// `∫_Σ V (H - H') dσ` with `H'` pulled back through the shared grid.
pub fn mass_value(sigma: &SurfaceGeometry, sigma_prime: &SurfaceGeometry) -> Result<f64> {
    check_pair(sigma, sigma_prime)?;
    let v = sigma.potential();
    let h = sigma.mean_curvature();
    let hp = sigma_prime.mean_curvature();
    let integrand: Vec<f64> = (0..sigma.node_count())
        .map(|k| v.values()[k] * (h.values()[k] - hp.values()[k]))
        .collect();
    Ok(sigma.integrate_values(&integrand))
}

/// `∫_Σ V H dσ`.
pub fn mass_scale(sigma: &SurfaceGeometry) -> f64 {
    let v = sigma.potential();
    let h = sigma.mean_curvature();
    let integrand: Vec<f64> = v.values().iter().zip(h.values()).map(|(a, b)| a * b).collect();
    sigma.integrate_values(&integrand)
}

pub fn quasilocal_mass(sigma: &SurfaceGeometry, sigma_prime: &SurfaceGeometry) -> Result<MassReport> {
    let mass = mass_value(sigma, sigma_prime)?;
    let ric_nu_max = sigma.ricci_normal().max();
    let sigma_convex = sigma.is_convex();
    let sigma_prime_mean_convex = sigma_prime.is_mean_convex();
    let hypotheses_met = sigma_convex && sigma_prime_mean_convex;
    Ok(MassReport {
        mass,
        scale: mass_scale(sigma),
        min_mean: sigma.min_mean_curvature(),
        min_mean_reference: sigma_prime.min_mean_curvature(),
        sigma_convex,
        sigma_prime_convex: sigma_prime.is_convex(),
        sigma_prime_mean_convex,
        ric_nu_max,
        ric_nu_nonpositive: ric_nu_max <= 0.0,
        hypotheses_met,
        penrose_margin: hypotheses_met.then_some(mass),
    })
}

/// Sign verdict: a violation needs the hypotheses and `E < -1e-8 ∫VH dσ`.
pub fn penrose_check(report: &MassReport) -> PenroseVerdict {
    penrose_check_with(report, PENROSE_TOLERANCE)
}

/// As [`penrose_check`] with `relative_tolerance` in place of `1e-8`.
pub fn penrose_check_with(report: &MassReport, relative_tolerance: f64) -> PenroseVerdict {
    if !report.hypotheses_met {
        PenroseVerdict::HypothesesNotMet
    } else if report.mass < -relative_tolerance * report.scale.abs() {
        PenroseVerdict::Violated
    } else {
        PenroseVerdict::Holds
    }
}

/// `δH = -ΔG - (Ric(ν,ν) + |h|²) G + ⟨P, ∇H⟩`.
pub fn mean_curvature_variation(surf: &SurfaceGeometry, normal_speed: &ScalarField, p: &TangentField) -> Result<ScalarField> {
    let lap = surf.laplace_beltrami(normal_speed)?;
    let grad = surf.gradient(&surf.mean_curvature())?;
    let pf = p.frame_components(surf)?;
    let ric = surf.ricci_normal();
    let norm2 = surf.second_form_norm2();
    let out = (0..surf.node_count())
        .map(|k| {
            -lap.values()[k] - (ric.values()[k] + norm2.values()[k]) * normal_speed.values()[k]
                + pf[k][0] * grad.e1.values()[k]
                + pf[k][1] * grad.e2.values()[k]
        })
        .collect();
    ScalarField::new(surf.grid().clone(), out)
}

/// `|h - h'|²` with indices raised by the metric of `sigma`.
fn difference_norm2(sigma: &SurfaceGeometry, k: usize, other: &Sym2) -> f64 {
    let h = sigma.second_form_at(k);
    let d = [h[0] - other[0], h[1] - other[1], h[2] - other[2]];
    linalg::sym2_frame_norm2(&sigma.frame_at(k).tensor_to_frame(&d))
}

/// `½ ∫_Σ F V |h - h'|² dσ` for the second fundamental form of `sigma_prime`.
pub fn first_variation_rhs(sigma: &SurfaceGeometry, sigma_prime: &SurfaceGeometry, speed: &ScalarField) -> Result<f64> {
    check_pair(sigma, sigma_prime)?;
    first_variation_rhs_for(sigma, &sigma_prime.second_form(), speed)
}

/// As [`first_variation_rhs`] with an explicit reference second form.
pub fn first_variation_rhs_for(sigma: &SurfaceGeometry, reference_form: &SymTensorField, speed: &ScalarField) -> Result<f64> {
    if !same_grid(sigma.grid(), reference_form.grid()) || !same_grid(sigma.grid(), speed.grid()) {
        return Err(Error::GridMismatch);
    }
    let v = sigma.potential();
    let integrand: Vec<f64> = (0..sigma.node_count())
        .map(|k| 0.5 * speed.values()[k] * v.values()[k] * difference_norm2(sigma, k, &reference_form.components()[k]))
        .collect();
    Ok(sigma.integrate_values(&integrand))
}

/// `½(|h'|² - |h|²) - (Ric(ν,ν) - Ric'(ν',ν'))`, each norm taken on its own
/// surface. Both Gauss equations turn this into `(K - K') + ½(H'² - H²)`,
/// which vanishes for isometric pairs with equal mean curvature.
pub fn gauss_subtraction_check(sigma: &SurfaceGeometry, sigma_prime: &SurfaceGeometry) -> Result<ScalarField> {
    check_pair(sigma, sigma_prime)?;
    let (a, b) = (sigma.second_form_norm2(), sigma_prime.second_form_norm2());
    let (ra, rb) = (sigma.ricci_normal(), sigma_prime.ricci_normal());
    let out = (0..sigma.node_count())
        .map(|k| 0.5 * (b.values()[k] - a.values()[k]) - (ra.values()[k] - rb.values()[k]))
        .collect();
    ScalarField::new(sigma.grid().clone(), out)
}

/// Both sides of `E(Σ,Σ') + E(Σ',Σ) = ∫ (V dσ - V' dσ') (H - H')`.
pub fn mass_swap_identity(sigma: &SurfaceGeometry, sigma_prime: &SurfaceGeometry) -> Result<(f64, f64)> {
    let lhs = mass_value(sigma, sigma_prime)? + mass_value(sigma_prime, sigma)?;
    let (v, vp) = (sigma.potential(), sigma_prime.potential());
    let (h, hp) = (sigma.mean_curvature(), sigma_prime.mean_curvature());
    let rhs = (0..sigma.node_count())
        .map(|k| {
            (v.values()[k] * sigma.measure_at(k) - vp.values()[k] * sigma_prime.measure_at(k)) * (h.values()[k] - hp.values()[k])
        })
        .sum();
    Ok((lhs, rhs))
}
