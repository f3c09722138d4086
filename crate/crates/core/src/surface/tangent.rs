//! Tangent vector fields through their Helmholtz potentials.

use faer::linalg::solvers::{Qr, SolveLstsq};
use faer::Mat;

use super::SurfaceGeometry;
use crate::error::{Error, Result};
use crate::linalg::{self, Vec3};
use crate::sphere::harmonics::sh_degree_order;
use crate::sphere::{same_grid, ScalarField};

/// `P = ∇f + ε∇u` with respect to the metric of whichever surface the field
/// is realised on; `ε` is the area form with `ε(e1, e2) = 1`. In frame
/// components `P_1 = f_1 + u_2` and `P_2 = f_2 - u_1`.
///
/// Both potentials are stored with vanishing mean harmonic.
#[derive(Debug, Clone)]
pub struct TangentField {
    potential: ScalarField,
    stream: ScalarField,
}

fn without_mean(f: &ScalarField) -> ScalarField {
    let mut c = f.coefficients();
    c[0] = 0.0;
    ScalarField::from_coefficients(f.grid(), &c).expect("coefficients come from the same grid")
}

impl TangentField {
    /// Potentials are projected onto their bandlimited part with zero mean.
    pub fn new(potential: &ScalarField, stream: &ScalarField) -> Result<Self> {
        potential.check(stream)?;
        Ok(TangentField {
            potential: without_mean(potential),
            stream: without_mean(stream),
        })
    }

    pub fn zero(grid: &std::sync::Arc<crate::sphere::SphereGrid>) -> Self {
        TangentField {
            potential: ScalarField::zeros(grid),
            stream: ScalarField::zeros(grid),
        }
    }

    pub fn gradient(f: &ScalarField) -> Self {
        TangentField {
            potential: without_mean(f),
            stream: ScalarField::zeros(f.grid()),
        }
    }

    /// `ε∇u`.
    pub fn rotated_gradient(u: &ScalarField) -> Self {
        TangentField {
            potential: ScalarField::zeros(u.grid()),
            stream: without_mean(u),
        }
    }

    /// From potential coefficient vectors (the mean entry is ignored).
    pub fn from_coefficients(grid: &std::sync::Arc<crate::sphere::SphereGrid>, f: &[f64], u: &[f64]) -> Result<Self> {
        let mut fc = f.to_vec();
        let mut uc = u.to_vec();
        if fc.len() != grid.coefficient_count() || uc.len() != grid.coefficient_count() {
            return Err(Error::GridMismatch);
        }
        fc[0] = 0.0;
        uc[0] = 0.0;
        Ok(TangentField {
            potential: ScalarField::from_coefficients(grid, &fc)?,
            stream: ScalarField::from_coefficients(grid, &uc)?,
        })
    }

    pub fn potential(&self) -> &ScalarField {
        &self.potential
    }

    pub fn stream(&self) -> &ScalarField {
        &self.stream
    }

    pub fn scale(&self, s: f64) -> Self {
        TangentField {
            potential: self.potential.scale(s),
            stream: self.stream.scale(s),
        }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &TangentField) -> Result<Self> {
        Ok(TangentField {
            potential: self.potential.axpy(s, &other.potential)?,
            stream: self.stream.axpy(s, &other.stream)?,
        })
    }

    fn check(&self, surf: &SurfaceGeometry) -> Result<()> {
        if same_grid(self.potential.grid(), surf.grid()) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Orthonormal-frame components at every node.
    pub fn frame_components(&self, surf: &SurfaceGeometry) -> Result<Vec<[f64; 2]>> {
        self.check(surf)?;
        let df = self.potential.derivatives(1);
        let du = self.stream.derivatives(1);
        Ok((0..surf.node_count())
            .map(|k| {
                let fr = surf.frame_at(k);
                let f = fr.covector_to_frame(&[df.t[k], df.p[k]]);
                let u = fr.covector_to_frame(&[du.t[k], du.p[k]]);
                [f[0] + u[1], f[1] - u[0]]
            })
            .collect())
    }

    /// Coordinate components `P_a`.
    pub fn covector(&self, surf: &SurfaceGeometry) -> Result<Vec<[f64; 2]>> {
        let fc = self.frame_components(surf)?;
        Ok(fc
            .iter()
            .enumerate()
            .map(|(k, v)| surf.frame_at(k).covector_from_frame(v))
            .collect())
    }

    /// The field as an ambient vector `P^a ∂_a X` in the Cartesian chart.
    pub fn ambient(&self, surf: &SurfaceGeometry) -> Result<Vec<Vec3>> {
        let fc = self.frame_components(surf)?;
        let jet = surf.jet();
        Ok(fc
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let up = surf.frame_at(k).vector_from_frame(v);
                linalg::add(&linalg::scale(&jet.t[k], up[0]), &linalg::scale(&jet.p[k], up[1]))
            })
            .collect())
    }

    /// `div P = Δf`.
    pub fn divergence(&self, surf: &SurfaceGeometry) -> Result<ScalarField> {
        self.check(surf)?;
        surf.laplace_beltrami(&self.potential)
    }

    /// `ε^ab ∇_a P_b = -Δu`.
    pub fn curl(&self, surf: &SurfaceGeometry) -> Result<ScalarField> {
        self.check(surf)?;
        Ok(surf.laplace_beltrami(&self.stream)?.scale(-1.0))
    }

    /// Helmholtz decomposition of a tangent field given in the Cartesian
    /// chart. Builds a one-off solver; use [`HelmholtzSolver`] to reuse it.
    pub fn from_ambient(surf: &SurfaceGeometry, w: &[Vec3]) -> Result<Self> {
        HelmholtzSolver::new(surf)?.decompose(surf, w)
    }

    /// Normal and tangential parts `(⟨K, ν⟩, K - ⟨K, ν⟩ν)` of the rotation
    /// Killing field `K = axis × x`.
    pub fn killing_data(surf: &SurfaceGeometry, solver: &HelmholtzSolver, axis: &Vec3) -> Result<(ScalarField, TangentField)> {
        let n = surf.node_count();
        let mut normal = Vec::with_capacity(n);
        let mut tangential = Vec::with_capacity(n);
        for k in 0..n {
            let kf = crate::ambient::Rotation::killing_field(axis, &surf.positions()[k]);
            let g = linalg::dot(&surf.conormal()[k], &kf);
            normal.push(g);
            tangential.push(linalg::axpy(&kf, -g, &surf.normal()[k]));
        }
        let p = solver.decompose(surf, &tangential)?;
        Ok((ScalarField::new(surf.grid().clone(), normal)?, p))
    }
}

/// Dense least-squares Poisson solver on a fixed surface, used to recover
/// Helmholtz potentials from divergence and curl.
pub struct HelmholtzSolver {
    qr: Qr<f64>,
    weights: Vec<f64>,
    coefficient_count: usize,
}

impl std::fmt::Debug for HelmholtzSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HelmholtzSolver")
            .field("unknowns", &(self.coefficient_count - 1))
            .finish()
    }
}

impl HelmholtzSolver {
    pub fn new(surf: &SurfaceGeometry) -> Result<Self> {
        let grid = surf.grid();
        let n = surf.node_count();
        let nc = grid.coefficient_count();
        let weights: Vec<f64> = (0..n).map(|k| surf.measure_at(k).sqrt()).collect();
        let mut a = Mat::<f64>::zeros(n, nc - 1);
        for col in 1..nc {
            let (l, m) = sh_degree_order(col);
            let dst = a.col_as_slice_mut(col - 1);
            for (k, slot) in dst.iter_mut().enumerate() {
                let y = grid.basis_derivatives(l, m, k);
                let chr = surf.christoffel_at(k);
                let hess = [
                    y[3] - chr[0][0] * y[1] - chr[1][0] * y[2],
                    y[4] - chr[0][1] * y[1] - chr[1][1] * y[2],
                    y[5] - chr[0][2] * y[1] - chr[1][2] * y[2],
                ];
                *slot = weights[k] * linalg::sym2_contract(surf.inverse_metric_at(k), &hess);
            }
        }
        Ok(HelmholtzSolver {
            qr: a.qr(),
            weights,
            coefficient_count: nc,
        })
    }

    /// Coefficients of the mean-free `f` minimising `‖Δf - rhs‖` in `L²(dσ)`.
    pub fn poisson(&self, rhs: &ScalarField) -> Result<Vec<f64>> {
        if rhs.values().len() != self.weights.len() {
            return Err(Error::GridMismatch);
        }
        let b = Mat::<f64>::from_fn(self.weights.len(), 1, |k, _| self.weights[k] * rhs.values()[k]);
        let x = self.qr.solve_lstsq(&b);
        let mut out = vec![0.0; self.coefficient_count];
        for i in 1..self.coefficient_count {
            out[i] = x[(i - 1, 0)];
        }
        Ok(out)
    }

    pub fn decompose(&self, surf: &SurfaceGeometry, w: &[Vec3]) -> Result<TangentField> {
        let (div, curl) = surf.ambient_divergence_curl(w)?;
        let f = self.poisson(&div)?;
        let u = self.poisson(&curl.scale(-1.0))?;
        TangentField::from_coefficients(surf.grid(), &f, &u)
    }
}
