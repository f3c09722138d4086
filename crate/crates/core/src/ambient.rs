//! Closed-form geometry of the spatial Schwarzschild manifold.
//!
//! The metric is `g = dr²/V̄² + r² dS²` with static potential
//! `V̄ = sqrt(1 - 2m/r)`, defined for `r > 2m`. Everything here is evaluated
//! from hand-derived closed forms, listed below for coordinates `(r, θ, φ)`
//! with `V² = 1 - 2m/r`:
//!
//! ```text
//! Γ^r_rr = -m / (r² V²)     Γ^r_θθ = -r V²        Γ^r_φφ = -r V² sin²θ
//! Γ^θ_rθ = 1/r              Γ^θ_φφ = -sinθ cosθ
//! Γ^φ_rφ = 1/r              Γ^φ_θφ = cotθ
//!
//! R_rr = -2m / (r³ V²)      R_θθ = m / r           R_φφ = m sin²θ / r
//! V̄'  = m / (r² V̄)          V̄'' = -2m / (r³ V̄) - m² / (r⁴ V̄³)
//! ```
//!
//! Surfaces are handled in the Cartesian chart `x = r ω`, where the same
//! metric reads `g_ij = δ_ij + γ(r) x_i x_j` with `γ = 2m / (r² (r - 2m))`.
//! That chart has no pole singularity; its helpers are the `cartesian_*`
//! methods.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat3, Vec3};

/// Coordinate index of the areal radius.
pub const R: usize = 0;
/// Coordinate index of the colatitude.
pub const THETA: usize = 1;
/// Coordinate index of the longitude.
pub const PHI: usize = 2;

/// `Γ[i][j][k] = Γ^i_jk` in `(r, θ, φ)` coordinates.
pub type Christoffel = [[[f64; 3]; 3]; 3];

const POLE_GUARD: f64 = 1e-12;

/// The Schwarzschild spatial slice with mass `m ≥ 0` (`m = 0` is flat space).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientGeometry {
    mass: f64,
}

/// A point `(r, θ, φ)` validated against its ambient geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientPoint {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl AmbientPoint {
    /// Direction on the unit sphere.
    pub fn unit_vector(&self) -> Vec3 {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// Position in the Cartesian chart `x = r ω`.
    pub fn cartesian(&self) -> Vec3 {
        linalg::scale(&self.unit_vector(), self.r)
    }

    /// Inverse of [`AmbientPoint::cartesian`]; not validated.
    pub fn from_cartesian(x: &Vec3) -> Self {
        let r = linalg::norm(x);
        Self::from_unit(r, &linalg::scale(x, 1.0 / r))
    }

    fn from_unit(r: f64, w: &Vec3) -> Self {
        let rho = (w[0] * w[0] + w[1] * w[1]).sqrt();
        AmbientPoint {
            r,
            theta: rho.atan2(w[2]),
            phi: w[1].atan2(w[0]).rem_euclid(std::f64::consts::TAU),
        }
    }
}

impl AmbientGeometry {
    pub fn new(mass: f64) -> Result<Self> {
        if !mass.is_finite() || mass < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "mass must be finite and non-negative, got {mass}"
            )));
        }
        Ok(AmbientGeometry { mass })
    }

    pub fn flat() -> Self {
        AmbientGeometry { mass: 0.0 }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn horizon_radius(&self) -> f64 {
        2.0 * self.mass
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if r.is_finite() && r > self.horizon_radius() {
            Ok(())
        } else {
            Err(Error::Domain {
                r,
                horizon: self.horizon_radius(),
            })
        }
    }

    pub fn point(&self, r: f64, theta: f64, phi: f64) -> Result<AmbientPoint> {
        let p = AmbientPoint { r, theta, phi };
        self.validate(&p)?;
        Ok(p)
    }

    pub fn validate(&self, p: &AmbientPoint) -> Result<()> {
        self.check_radius(p.r)?;
        if !p.theta.is_finite() || p.theta.sin().abs() < POLE_GUARD || !p.phi.is_finite() {
            return Err(Error::PoleSingularity { theta: p.theta });
        }
        Ok(())
    }

    /// `V̄(r) = sqrt(1 - 2m/r)`. The horizon itself is admitted and gives 0.
    pub fn static_potential(&self, r: f64) -> Result<f64> {
        if r.is_finite() && r >= self.horizon_radius() && r > 0.0 {
            Ok((1.0 - self.horizon_radius() / r).max(0.0).sqrt())
        } else {
            Err(Error::Domain {
                r,
                horizon: self.horizon_radius(),
            })
        }
    }

    /// `dV̄/dr = m / (r² V̄)`; requires `r > 2m`.
    pub fn static_potential_derivative(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        Ok(self.potential_slope(r))
    }

    #[inline]
    pub(crate) fn potential_unchecked(&self, r: f64) -> f64 {
        (1.0 - 2.0 * self.mass / r).sqrt()
    }

    #[inline]
    pub(crate) fn potential_slope(&self, r: f64) -> f64 {
        if self.mass == 0.0 {
            0.0
        } else {
            self.mass / (r * r * self.potential_unchecked(r))
        }
    }

    #[inline]
    fn potential_curvature(&self, r: f64) -> f64 {
        if self.mass == 0.0 {
            return 0.0;
        }
        let m = self.mass;
        let v = self.potential_unchecked(r);
        -2.0 * m / (r.powi(3) * v) - m * m / (r.powi(4) * v.powi(3))
    }

    /// Diagonal coordinate metric `diag(1/V², r², r² sin²θ)`.
    pub fn metric(&self, p: &AmbientPoint) -> Result<Mat3> {
        self.validate(p)?;
        Ok(self.metric_unchecked(p.r, p.theta))
    }

    fn metric_unchecked(&self, r: f64, theta: f64) -> Mat3 {
        let v2 = 1.0 - 2.0 * self.mass / r;
        let s = theta.sin();
        [[1.0 / v2, 0.0, 0.0], [0.0, r * r, 0.0], [0.0, 0.0, r * r * s * s]]
    }

    pub fn inverse_metric(&self, p: &AmbientPoint) -> Result<Mat3> {
        let g = self.metric(p)?;
        Ok([
            [1.0 / g[0][0], 0.0, 0.0],
            [0.0, 1.0 / g[1][1], 0.0],
            [0.0, 0.0, 1.0 / g[2][2]],
        ])
    }

    pub fn christoffel(&self, p: &AmbientPoint) -> Result<Christoffel> {
        self.validate(p)?;
        Ok(self.christoffel_unchecked(p.r, p.theta))
    }

    fn christoffel_unchecked(&self, r: f64, theta: f64) -> Christoffel {
        let m = self.mass;
        let v2 = 1.0 - 2.0 * m / r;
        let (s, c) = theta.sin_cos();
        let mut g = [[[0.0; 3]; 3]; 3];
        g[R][R][R] = -m / (r * r * v2);
        g[R][THETA][THETA] = -r * v2;
        g[R][PHI][PHI] = -r * v2 * s * s;
        g[THETA][R][THETA] = 1.0 / r;
        g[THETA][THETA][R] = 1.0 / r;
        g[THETA][PHI][PHI] = -s * c;
        g[PHI][R][PHI] = 1.0 / r;
        g[PHI][PHI][R] = 1.0 / r;
        g[PHI][THETA][PHI] = c / s;
        g[PHI][PHI][THETA] = c / s;
        g
    }

    /// Coordinate components `R_ij` of the Ricci tensor.
    pub fn ricci(&self, p: &AmbientPoint) -> Result<Mat3> {
        self.validate(p)?;
        let m = self.mass;
        let r = p.r;
        let v2 = 1.0 - 2.0 * m / r;
        let s = p.theta.sin();
        Ok([
            [-2.0 * m / (r.powi(3) * v2), 0.0, 0.0],
            [0.0, m / r, 0.0],
            [0.0, 0.0, m * s * s / r],
        ])
    }

    /// `g^ij R_ij`, the scalar curvature of the slice.
    pub fn ricci_trace(&self, p: &AmbientPoint) -> Result<f64> {
        let ric = self.ricci(p)?;
        let ginv = self.inverse_metric(p)?;
        Ok(contract(&ginv, &ric))
    }

    /// `Ric(e_r, e_r)` for the outward unit radial vector `e_r = V̄ ∂_r`.
    pub fn ricci_radial(&self, r: f64) -> Result<f64> {
        let p = self.point(r, std::f64::consts::FRAC_PI_2, 0.0)?;
        let ric = self.ricci(&p)?;
        let v2 = 1.0 - self.horizon_radius() / r;
        Ok(ric[R][R] * v2)
    }

    /// Covariant Hessian `D_i D_j V̄`.
    pub fn potential_hessian(&self, p: &AmbientPoint) -> Result<Mat3> {
        self.validate(p)?;
        let gamma = self.christoffel_unchecked(p.r, p.theta);
        let dv = self.potential_slope(p.r);
        let mut hess = [[0.0; 3]; 3];
        hess[R][R] = self.potential_curvature(p.r);
        for i in 0..3 {
            for j in 0..3 {
                hess[i][j] -= gamma[R][i][j] * dv;
            }
        }
        Ok(hess)
    }

    /// `D_i D_j V̄ - R_ij V̄`, identically zero for a static slice.
    pub fn static_residual(&self, p: &AmbientPoint) -> Result<Mat3> {
        let hess = self.potential_hessian(p)?;
        let ric = self.ricci(p)?;
        let v = self.potential_unchecked(p.r);
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = hess[i][j] - ric[i][j] * v;
            }
        }
        Ok(out)
    }

    /// `|Ric|² = R_ij R^ij`, a function of `r` alone.
    pub fn ricci_norm(&self, r: f64) -> Result<f64> {
        let p = self.point(r, std::f64::consts::FRAC_PI_2, 0.0)?;
        let ric = self.ricci(&p)?;
        let ginv = self.inverse_metric(&p)?;
        let mut sum = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        sum += ginv[i][k] * ginv[j][l] * ric[i][j] * ric[k][l];
                    }
                }
            }
        }
        Ok(sum)
    }

    /// Acts on the sphere factor; `r` is untouched.
    pub fn apply_rotation(&self, rot: &Rotation, p: &AmbientPoint) -> AmbientPoint {
        let w = rot.apply(&p.unit_vector());
        AmbientPoint::from_unit(p.r, &w)
    }

    /// Pullback of the metric at `rot(p)` through the rotation, in the
    /// coordinates of `p`. Equals `metric(p)` because rotations are isometries.
    pub fn rotation_pullback_metric(&self, rot: &Rotation, p: &AmbientPoint) -> Result<Mat3> {
        self.validate(p)?;
        let q = self.apply_rotation(rot, p);
        let gq = self.metric(&q)?;
        let (st, ct) = p.theta.sin_cos();
        let (sp, cp) = p.phi.sin_cos();
        let e_theta = [ct * cp, ct * sp, -st];
        let e_phi = [-st * sp, st * cp, 0.0];
        let (st2, ct2) = q.theta.sin_cos();
        let (sp2, cp2) = q.phi.sin_cos();
        let f_theta = [ct2 * cp2, ct2 * sp2, -st2];
        let f_phi = [-sp2, cp2, 0.0];
        let images = [rot.apply(&e_theta), rot.apply(&e_phi)];
        // Jacobian of (r, θ, φ) -> (r', θ', φ').
        let mut jac = [[0.0; 3]; 3];
        jac[R][R] = 1.0;
        for (col, v) in images.iter().enumerate() {
            jac[THETA][col + 1] = linalg::dot(v, &f_theta);
            jac[PHI][col + 1] = linalg::dot(v, &f_phi) / st2;
        }
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for a in 0..3 {
                    for b in 0..3 {
                        out[i][j] += jac[a][i] * gq[a][b] * jac[b][j];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Christoffel symbols assembled from central differences of the metric
    /// with spacing `step` in every coordinate. Verification helper.
    pub fn christoffel_from_metric_fd(&self, p: &AmbientPoint, step: f64) -> Result<Christoffel> {
        self.validate(p)?;
        self.validate(&AmbientPoint { r: p.r - step, ..*p })?;
        let metric_at = |dr: f64, dt: f64| self.metric_unchecked(p.r + dr, p.theta + dt);
        let mut dg = [[[0.0; 3]; 3]; 3];
        let plus = [metric_at(step, 0.0), metric_at(0.0, step)];
        let minus = [metric_at(-step, 0.0), metric_at(0.0, -step)];
        for k in 0..2 {
            for i in 0..3 {
                for j in 0..3 {
                    dg[k][i][j] = (plus[k][i][j] - minus[k][i][j]) / (2.0 * step);
                }
            }
        }
        // Nothing depends on φ, so dg[PHI] stays zero.
        let ginv = self.inverse_metric(p)?;
        let mut gamma = [[[0.0; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    gamma[i][j][k] = (0..3)
                        .map(|l| 0.5 * ginv[i][l] * (dg[j][l][k] + dg[k][l][j] - dg[l][j][k]))
                        .sum();
                }
            }
        }
        Ok(gamma)
    }

    /// Ricci tensor assembled numerically from the closed-form connection,
    /// `R_jk = ∂_i Γ^i_jk - ∂_k Γ^i_ji + Γ^i_ip Γ^p_jk - Γ^i_kp Γ^p_ji`,
    /// with fourth-order central differences for the derivatives.
    pub fn ricci_from_connection_fd(&self, p: &AmbientPoint, step: f64) -> Result<Mat3> {
        self.validate(p)?;
        self.validate(&AmbientPoint {
            r: p.r - 2.0 * step,
            ..*p
        })?;
        let gamma = self.christoffel_unchecked(p.r, p.theta);
        let diff = |coord: usize| -> Christoffel {
            let at = |h: f64| {
                if coord == R {
                    self.christoffel_unchecked(p.r + h, p.theta)
                } else {
                    self.christoffel_unchecked(p.r, p.theta + h)
                }
            };
            let (p1, m1, p2, m2) = (at(step), at(-step), at(2.0 * step), at(-2.0 * step));
            let mut out = [[[0.0; 3]; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        out[i][j][k] = (8.0 * (p1[i][j][k] - m1[i][j][k]) - (p2[i][j][k] - m2[i][j][k])) / (12.0 * step);
                    }
                }
            }
            out
        };
        let d_gamma = [diff(R), diff(THETA), [[[0.0; 3]; 3]; 3]];
        let mut ric = [[0.0; 3]; 3];
        for j in 0..3 {
            for k in 0..3 {
                let mut s = 0.0;
                for i in 0..3 {
                    s += d_gamma[i][i][j][k] - d_gamma[k][i][j][i];
                    for q in 0..3 {
                        s += gamma[i][i][q] * gamma[q][j][k] - gamma[i][k][q] * gamma[q][j][i];
                    }
                }
                ric[j][k] = s;
            }
        }
        Ok(ric)
    }

    // Cartesian chart: g_ij = δ_ij + γ(r) x_i x_j.

    #[inline]
    fn chart_gamma(&self, r: f64) -> (f64, f64) {
        if self.mass == 0.0 {
            return (0.0, 0.0);
        }
        let m = self.mass;
        let gamma = 2.0 * m / (r * r * (r - 2.0 * m));
        let dgamma = gamma * (-2.0 / r - 1.0 / (r - 2.0 * m));
        (gamma, dgamma)
    }

    pub fn cartesian_metric(&self, x: &Vec3) -> Mat3 {
        let (gamma, _) = self.chart_gamma(linalg::norm(x));
        let mut g = linalg::IDENTITY;
        for i in 0..3 {
            for j in 0..3 {
                g[i][j] += gamma * x[i] * x[j];
            }
        }
        g
    }

    /// `g^ij = δ^ij - (2m/r) n^i n^j`.
    pub fn cartesian_inverse_metric(&self, x: &Vec3) -> Mat3 {
        let r = linalg::norm(x);
        let beta = 2.0 * self.mass / r;
        let mut g = linalg::IDENTITY;
        for i in 0..3 {
            for j in 0..3 {
                g[i][j] -= beta * x[i] * x[j] / (r * r);
            }
        }
        g
    }

    /// `∂_l g_ij`, indexed `[l][i][j]`.
    pub fn cartesian_metric_derivative(&self, x: &Vec3) -> [Mat3; 3] {
        let r = linalg::norm(x);
        let (gamma, dgamma) = self.chart_gamma(r);
        let mut out = [[[0.0; 3]; 3]; 3];
        for l in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let mut v = dgamma * x[l] / r * x[i] * x[j];
                    if i == l {
                        v += gamma * x[j];
                    }
                    if j == l {
                        v += gamma * x[i];
                    }
                    out[l][i][j] = v;
                }
            }
        }
        out
    }

    /// Christoffel symbols of the first kind `Γ_{k,ij}`, indexed `[k][i][j]`:
    /// `Γ_{k,ij} = ½ γ' r² n_i n_j n_k + γ δ_ij x_k`.
    pub fn cartesian_christoffel_first(&self, x: &Vec3) -> [Mat3; 3] {
        let r = linalg::norm(x);
        let (gamma, dgamma) = self.chart_gamma(r);
        let n = linalg::scale(x, 1.0 / r);
        let a = 0.5 * dgamma * r * r;
        let mut out = [[[0.0; 3]; 3]; 3];
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let mut v = a * n[i] * n[j] * n[k];
                    if i == j {
                        v += gamma * x[k];
                    }
                    out[k][i][j] = v;
                }
            }
        }
        out
    }

    /// `Ric_ij = (m/r³) (g_ij - 3 n_i n_j / V̄²)`.
    pub fn cartesian_ricci(&self, x: &Vec3) -> Mat3 {
        let r = linalg::norm(x);
        let g = self.cartesian_metric(x);
        if self.mass == 0.0 {
            return [[0.0; 3]; 3];
        }
        let c = self.mass / r.powi(3);
        let v2 = 1.0 - 2.0 * self.mass / r;
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = c * (g[i][j] - 3.0 * x[i] * x[j] / (r * r * v2));
            }
        }
        out
    }
}

fn contract(upper: &Mat3, lower: &Mat3) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += upper[i][j] * lower[i][j];
        }
    }
    s
}

/// An orthogonal map of the sphere factor, possibly orientation reversing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    matrix: Mat3,
}

impl Rotation {
    pub fn identity() -> Self {
        Rotation {
            matrix: linalg::IDENTITY,
        }
    }

    /// Right-handed rotation by `angle` about `axis` (Rodrigues).
    pub fn about_axis(axis: Vec3, angle: f64) -> Result<Self> {
        let len = linalg::norm(&axis);
        if !(len.is_finite() && len > 0.0) || !angle.is_finite() {
            return Err(Error::InvalidParameter("rotation axis must be non-zero".into()));
        }
        let k = linalg::scale(&axis, 1.0 / len);
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        let matrix = [
            [c + t * k[0] * k[0], t * k[0] * k[1] - s * k[2], t * k[0] * k[2] + s * k[1]],
            [t * k[0] * k[1] + s * k[2], c + t * k[1] * k[1], t * k[1] * k[2] - s * k[0]],
            [t * k[0] * k[2] - s * k[1], t * k[1] * k[2] + s * k[0], c + t * k[2] * k[2]],
        ];
        Ok(Rotation { matrix })
    }

    /// Reflection through the plane orthogonal to `normal`.
    pub fn reflection(normal: Vec3) -> Result<Self> {
        let len = linalg::norm(&normal);
        if !(len.is_finite() && len > 0.0) {
            return Err(Error::InvalidParameter("reflection normal must be non-zero".into()));
        }
        let n = linalg::scale(&normal, 1.0 / len);
        let mut matrix = linalg::IDENTITY;
        for i in 0..3 {
            for j in 0..3 {
                matrix[i][j] -= 2.0 * n[i] * n[j];
            }
        }
        Ok(Rotation { matrix })
    }

    /// Accepts any matrix orthogonal to within `1e-12`.
    pub fn from_matrix(matrix: Mat3) -> Result<Self> {
        let rot = Rotation { matrix };
        let err = rot.orthogonality_error();
        if !(err <= 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "matrix is not orthogonal (|R Rᵀ - I| = {err:e})"
            )));
        }
        Ok(rot)
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.matrix
    }

    /// Max-entry deviation of `R Rᵀ` from the identity.
    pub fn orthogonality_error(&self) -> f64 {
        let p = linalg::mat_mul(&self.matrix, &linalg::transpose(&self.matrix));
        let mut err: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                err = err.max((p[i][j] - linalg::IDENTITY[i][j]).abs());
            }
        }
        err
    }

    pub fn is_proper(&self) -> bool {
        linalg::determinant(&self.matrix) > 0.0
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        linalg::mat_vec(&self.matrix, v)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Rotation) -> Rotation {
        Rotation {
            matrix: linalg::mat_mul(&self.matrix, &other.matrix),
        }
    }

    pub fn inverse(&self) -> Rotation {
        Rotation {
            matrix: linalg::transpose(&self.matrix),
        }
    }

    /// Infinitesimal generator `x ↦ axis × x`, the rotation Killing field.
    pub fn killing_field(axis: &Vec3, x: &Vec3) -> Vec3 {
        linalg::cross(axis, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn potential_examples() {
        let g1 = AmbientGeometry::new(1.0).unwrap();
        assert_eq!(g1.static_potential(2.0).unwrap(), 0.0);
        assert!((g1.static_potential(3.0).unwrap() - 0.5773503).abs() < 1e-7);
        assert_eq!(AmbientGeometry::flat().static_potential(5.0).unwrap(), 1.0);
        assert!(g1.static_potential(1.5).is_err());
        assert!(g1.static_potential_derivative(2.0).is_err());
        let v = g1.static_potential(3.0).unwrap();
        assert!((g1.static_potential_derivative(3.0).unwrap() - 1.0 / (9.0 * v)).abs() < 1e-15);
    }

    #[test]
    fn flat_christoffels() {
        let g = AmbientGeometry::flat();
        let p = g.point(2.5, 0.7, 1.1).unwrap();
        let c = g.christoffel(&p).unwrap();
        assert_eq!(c[R][THETA][THETA], -2.5);
        assert_eq!(c[R][R][R], 0.0);
        assert!((c[PHI][THETA][PHI] - 0.7f64.cos() / 0.7f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn radial_christoffel_at_three() {
        let g = AmbientGeometry::new(1.0).unwrap();
        let p = g.point(3.0, 1.0, 0.0).unwrap();
        let c = g.christoffel(&p).unwrap();
        assert!((c[R][R][R] + 1.0 / 3.0).abs() < 1e-7);
    }

    #[test]
    fn ricci_examples() {
        let g = AmbientGeometry::new(1.0).unwrap();
        assert!((g.ricci_radial(3.0).unwrap() + 0.0740741).abs() < 1e-7);
        assert!((g.ricci_norm(3.0).unwrap() - 0.0082305).abs() < 1e-7);
        let flat = AmbientGeometry::flat();
        let p = flat.point(4.0, 1.0, 2.0).unwrap();
        assert_eq!(flat.ricci(&p).unwrap(), [[0.0; 3]; 3]);
        assert_eq!(flat.ricci_norm(4.0).unwrap(), 0.0);
    }

    #[test]
    fn static_residual_examples() {
        let g = AmbientGeometry::new(1.0).unwrap();
        let p = g.point(3.0, PI / 3.0, 1.0).unwrap();
        let res = g.static_residual(&p).unwrap();
        assert!(res.iter().flatten().all(|v| v.abs() < 1e-12));
        let g = AmbientGeometry::new(0.5).unwrap();
        let p = g.point(1.2, 0.4, 5.0).unwrap();
        assert!(g.static_residual(&p).unwrap().iter().flatten().all(|v| v.abs() < 1e-12));
        let flat = AmbientGeometry::flat();
        let p = flat.point(7.0, 2.0, 0.3).unwrap();
        assert!(flat.static_residual(&p).unwrap().iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn domain_errors() {
        let g = AmbientGeometry::new(1.0).unwrap();
        assert!(matches!(g.point(2.0, 1.0, 0.0), Err(Error::Domain { .. })));
        assert!(matches!(g.point(3.0, 0.0, 0.0), Err(Error::PoleSingularity { .. })));
        assert!(matches!(g.point(3.0, PI, 0.0), Err(Error::PoleSingularity { .. })));
        assert!(g.ricci_norm(1.0).is_err());
        assert!(AmbientGeometry::new(-1.0).is_err());
    }

    #[test]
    fn christoffel_fd_converges_at_second_order() {
        let g = AmbientGeometry::new(1.0).unwrap();
        let p = g.point(3.3, 0.9, 0.2).unwrap();
        let exact = g.christoffel(&p).unwrap();
        let err = |h: f64| {
            let fd = g.christoffel_from_metric_fd(&p, h).unwrap();
            let mut e: f64 = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        e = e.max((fd[i][j][k] - exact[i][j][k]).abs());
                    }
                }
            }
            e
        };
        let ratio = err(1e-2) / err(5e-3);
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn reflection_and_rotation() {
        let r = Rotation::reflection([0.0, 0.0, 1.0]).unwrap();
        assert!(!r.is_proper());
        assert!(r.orthogonality_error() < 1e-15);
        let q = Rotation::about_axis([0.0, 0.0, 1.0], PI / 2.0).unwrap();
        let v = q.apply(&[1.0, 0.0, 0.0]);
        assert!((v[1] - 1.0).abs() < 1e-15 && v[0].abs() < 1e-15);
        assert!(Rotation::from_matrix([[1.0, 0.1, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).is_err());
    }

    fn arb_rotation() -> impl Strategy<Value = Rotation> {
        (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -PI..PI)
            .prop_filter("axis", |(x, y, z, _)| x * x + y * y + z * z > 1e-3)
            .prop_map(|(x, y, z, a)| Rotation::about_axis([x, y, z], a).unwrap())
    }

    fn arb_point() -> impl Strategy<Value = (f64, AmbientPoint)> {
        (0.1..2.0f64, 0.0..1.0f64, 0.05..3.09f64, 0.0..6.2f64).prop_map(|(m, t, th, ph)| {
            let r = 2.0 * m + 1e-3 + t * 18.0 * m;
            (m, AmbientPoint { r, theta: th, phi: ph })
        })
    }

    proptest! {
        #[test]
        fn static_equation_holds((m, p) in arb_point()) {
            let g = AmbientGeometry::new(m).unwrap();
            let res = g.static_residual(&p).unwrap();
            for v in res.iter().flatten() {
                prop_assert!(v.abs() < 1e-10);
            }
        }

        #[test]
        fn scalar_curvature_vanishes((m, p) in arb_point()) {
            let g = AmbientGeometry::new(m).unwrap();
            prop_assert!(g.ricci_trace(&p).unwrap().abs() < 1e-12);
        }

        #[test]
        fn christoffels_are_symmetric((m, p) in arb_point()) {
            let c = AmbientGeometry::new(m).unwrap().christoffel(&p).unwrap();
            for i in 0..3 { for j in 0..3 { for k in 0..3 {
                prop_assert_eq!(c[i][j][k], c[i][k][j]);
            }}}
        }

        #[test]
        fn numeric_ricci_matches_closed_form((m, p) in arb_point()) {
            prop_assume!(p.r - 2.0 * m > 0.1 * m && p.theta.sin() > 0.2);
            let g = AmbientGeometry::new(m).unwrap();
            let step = 1e-4 * (p.r - 2.0 * m).min(1.0);
            let fd = g.ricci_from_connection_fd(&p, step).unwrap();
            let exact = g.ricci(&p).unwrap();
            for i in 0..3 { for j in 0..3 {
                prop_assert!((fd[i][j] - exact[i][j]).abs() < 1e-8, "{} vs {}", fd[i][j], exact[i][j]);
            }}
        }

        #[test]
        fn ricci_norm_decreases(m in 0.1..2.0f64, a in 0.0..1.0f64, b in 0.0..1.0f64) {
            prop_assume!((a - b).abs() > 1e-9);
            let g = AmbientGeometry::new(m).unwrap();
            let r1 = 2.0 * m * (1.0 + 1e-3 + 10.0 * a.min(b));
            let r2 = 2.0 * m * (1.0 + 1e-3 + 10.0 * a.max(b));
            prop_assert!(g.ricci_norm(r1).unwrap() > g.ricci_norm(r2).unwrap());
            prop_assert!((g.ricci_norm(r1).unwrap() - 6.0 * m * m / r1.powi(6)).abs() < 1e-12 * (m * m / r1.powi(6)).max(1.0));
        }

        #[test]
        fn rotation_preserves_radius_and_metric(rot in arb_rotation(), (m, p) in arb_point()) {
            let g = AmbientGeometry::new(m).unwrap();
            prop_assert!(rot.orthogonality_error() < 1e-14);
            let q = g.apply_rotation(&rot, &p);
            prop_assert_eq!(q.r, p.r);
            prop_assume!(q.theta.sin() > 1e-3);
            let pulled = g.rotation_pullback_metric(&rot, &p).unwrap();
            let orig = g.metric(&p).unwrap();
            for i in 0..3 { for j in 0..3 {
                prop_assert!((pulled[i][j] - orig[i][j]).abs() < 1e-12 * orig[i][j].abs().max(1.0));
            }}
        }

        #[test]
        fn rotations_compose(a in arb_rotation(), b in arb_rotation(), (_m, p) in arb_point()) {
            let g = AmbientGeometry::flat();
            let lhs = g.apply_rotation(&a, &g.apply_rotation(&b, &p)).unit_vector();
            let rhs = g.apply_rotation(&a.compose(&b), &p).unit_vector();
            for i in 0..3 { prop_assert!((lhs[i] - rhs[i]).abs() < 1e-13); }
        }

        #[test]
        fn cartesian_chart_matches_polar((m, p) in arb_point()) {
            let g = AmbientGeometry::new(m).unwrap();
            let x = p.cartesian();
            let gc = g.cartesian_metric(&x);
            let gi = g.cartesian_inverse_metric(&x);
            let prod = linalg::mat_mul(&gc, &gi);
            for i in 0..3 { for j in 0..3 {
                prop_assert!((prod[i][j] - linalg::IDENTITY[i][j]).abs() < 1e-10);
            }}
            // |∂_r|² = 1/V² in both charts
            let n = p.unit_vector();
            let v2 = 1.0 - 2.0 * m / p.r;
            prop_assert!((linalg::bilinear(&gc, &n, &n) * v2 - 1.0).abs() < 1e-10);
            // Ric(e_r, e_r) = -2m/r³
            let ric = g.cartesian_ricci(&x);
            let e_r = linalg::scale(&n, v2.sqrt());
            let rnn = linalg::bilinear(&ric, &e_r, &e_r);
            prop_assert!((rnn + 2.0 * m / p.r.powi(3)).abs() < 1e-12);
        }
    }

    #[test]
    fn cartesian_christoffel_matches_metric_derivative() {
        let g = AmbientGeometry::new(0.7).unwrap();
        let x = [1.3, -2.1, 0.8];
        let dg = g.cartesian_metric_derivative(&x);
        let c1 = g.cartesian_christoffel_first(&x);
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let want = 0.5 * (dg[i][k][j] + dg[j][k][i] - dg[k][i][j]);
                    assert!((c1[k][i][j] - want).abs() < 1e-14);
                }
            }
        }
        // metric derivative against central differences
        let h = 1e-5;
        for l in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[l] += h;
            xm[l] -= h;
            let (gp, gm) = (g.cartesian_metric(&xp), g.cartesian_metric(&xm));
            for i in 0..3 {
                for j in 0..3 {
                    assert!(((gp[i][j] - gm[i][j]) / (2.0 * h) - dg[l][i][j]).abs() < 1e-8);
                }
            }
        }
    }
}
