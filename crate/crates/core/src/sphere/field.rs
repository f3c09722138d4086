//! Nodal fields on a [`SphereGrid`].

use std::sync::Arc;

use super::grid::{Derivatives, SphereGrid};
use crate::error::{Error, Result};

/// True when two grids describe the same discretisation.
pub fn same_grid(a: &SphereGrid, b: &SphereGrid) -> bool {
    std::ptr::eq(a, b) || a.bandlimit() == b.bandlimit()
}

/// A real field stored by its values at the grid nodes.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<SphereGrid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<SphereGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::GridMismatch);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("field has non-finite values".into()));
        }
        Ok(ScalarField { grid, values })
    }

    pub(crate) fn from_vec(grid: Arc<SphereGrid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.node_count());
        ScalarField { grid, values }
    }

    pub fn constant(grid: &Arc<SphereGrid>, value: f64) -> Self {
        ScalarField {
            values: vec![value; grid.node_count()],
            grid: grid.clone(),
        }
    }

    pub fn zeros(grid: &Arc<SphereGrid>) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Samples `f(θ, φ)` at every node.
    pub fn from_fn(grid: &Arc<SphereGrid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.node_count()).map(|k| f(grid.theta(k), grid.phi(k))).collect();
        ScalarField {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_coefficients(grid: &Arc<SphereGrid>, coeffs: &[f64]) -> Result<Self> {
        if coeffs.len() != grid.coefficient_count() {
            return Err(Error::GridMismatch);
        }
        Ok(ScalarField {
            values: grid.synthesize(coeffs),
            grid: grid.clone(),
        })
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.grid.analyze(&self.values)
    }

    pub fn derivatives(&self, order: usize) -> Derivatives {
        self.grid.synthesize_derivatives(&self.coefficients(), order)
    }

    /// Spectral interpolation at an arbitrary direction.
    pub fn interpolate(&self, theta: f64, phi: f64) -> f64 {
        self.grid.evaluate(&self.coefficients(), theta, phi)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check(other)?;
        Ok(ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &ScalarField) -> Result<Self> {
        self.zip_with(other, |a, b| a + s * b)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn check(&self, other: &ScalarField) -> Result<()> {
        if same_grid(&self.grid, &other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Removes spectral content above `lmax`.
    pub fn truncated(&self, lmax: usize) -> Self {
        let mut c = self.coefficients();
        self.grid.truncate(&mut c, lmax);
        ScalarField {
            values: self.grid.synthesize(&c),
            grid: self.grid.clone(),
        }
    }
}

/// Symmetric 2-tensor with coordinate components `(θθ, θφ, φφ)` per node.
#[derive(Debug, Clone)]
pub struct SymTensorField {
    grid: Arc<SphereGrid>,
    components: Vec<[f64; 3]>,
}

impl SymTensorField {
    pub fn new(grid: Arc<SphereGrid>, components: Vec<[f64; 3]>) -> Result<Self> {
        if components.len() != grid.node_count() {
            return Err(Error::GridMismatch);
        }
        Ok(SymTensorField { grid, components })
    }

    pub(crate) fn from_vec(grid: Arc<SphereGrid>, components: Vec<[f64; 3]>) -> Self {
        SymTensorField { grid, components }
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn components(&self) -> &[[f64; 3]] {
        &self.components
    }

    /// Component `0 = θθ`, `1 = θφ`, `2 = φφ` as a scalar field.
    pub fn component(&self, which: usize) -> ScalarField {
        ScalarField::from_vec(self.grid.clone(), self.components.iter().map(|c| c[which]).collect())
    }

    pub fn sub(&self, other: &SymTensorField) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &SymTensorField) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, s: f64) -> Self {
        SymTensorField {
            grid: self.grid.clone(),
            components: self.components.iter().map(|c| [c[0] * s, c[1] * s, c[2] * s]).collect(),
        }
    }

    /// Pointwise product with `factor · f`.
    pub fn scale_by(&self, f: &ScalarField, factor: f64) -> Result<Self> {
        if !same_grid(&self.grid, f.grid()) {
            return Err(Error::GridMismatch);
        }
        Ok(SymTensorField {
            grid: self.grid.clone(),
            components: self
                .components
                .iter()
                .zip(f.values())
                .map(|(c, v)| {
                    let s = factor * v;
                    [c[0] * s, c[1] * s, c[2] * s]
                })
                .collect(),
        })
    }

    fn zip_with(&self, other: &SymTensorField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !same_grid(&self.grid, &other.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(SymTensorField {
            grid: self.grid.clone(),
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| [f(a[0], b[0]), f(a[1], b[1]), f(a[2], b[2])])
                .collect(),
        })
    }

    /// Largest entry in the unit-sphere orthonormal frame
    /// `(θθ, θφ / sin θ, φφ / sin²θ)`, which removes the coordinate
    /// degeneracy of the φ components near the poles.
    pub fn sup_norm(&self) -> f64 {
        let mut m: f64 = 0.0;
        for (k, c) in self.components.iter().enumerate() {
            let s = self.grid.sin_theta(k);
            m = m.max(c[0].abs()).max((c[1] / s).abs()).max((c[2] / (s * s)).abs());
        }
        m
    }
}
