//! Seeded bandlimited random fields and named surface presets.
//!
//! Generator: `ChaCha8Rng::seed_from_u64(seed)` from `rand_chacha` 0.9.
//! Coefficients are drawn in index order `l = 1..=lmax`, `m = -l..=l`, each
//! uniform on `[-1, 1)` and scaled by `1 / (1 + l)²`. The mean coefficient
//! is zero.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sphere::harmonics::{real_ylm, sh_index};
use crate::sphere::{ScalarField, SphereGrid};

/// Name of the generator, recorded in reports.
pub const GENERATOR: &str = "chacha8/rand_chacha-0.9/uniform(-1,1)/(1+l)^-2";

pub fn random_coefficients(grid: &SphereGrid, seed: u64, lmax: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = vec![0.0; grid.coefficient_count()];
    for l in 1..=lmax.min(grid.bandlimit()) {
        let amp = 1.0 / ((1 + l) * (1 + l)) as f64;
        for m in -(l as i64)..=(l as i64) {
            c[sh_index(l, m)] = amp * rng.random_range(-1.0..1.0);
        }
    }
    c
}

/// Mean-free random field.
pub fn random_field(grid: &Arc<SphereGrid>, seed: u64, lmax: usize) -> ScalarField {
    ScalarField::from_coefficients(grid, &random_coefficients(grid, seed, lmax)).expect("coefficient count matches grid")
}

/// `base + amplitude · f / sup|f|` for a seeded random `f`.
pub fn random_field_around(grid: &Arc<SphereGrid>, seed: u64, lmax: usize, base: f64, amplitude: f64) -> ScalarField {
    let f = random_field(grid, seed, lmax);
    let s = f.sup_norm();
    if s == 0.0 {
        return ScalarField::constant(grid, base);
    }
    f.map(|v| base + amplitude * v / s)
}

/// Real part of the orthonormal complex harmonic `Y_l^m`; for negative `m`
/// the sine companion with the same normalisation.
pub fn complex_harmonic_real_part(l: usize, m: i64, theta: f64, phi: f64) -> f64 {
    if m == 0 {
        real_ylm(l, 0, theta, phi)
    } else {
        real_ylm(l, m, theta, phi) / std::f64::consts::SQRT_2
    }
}

/// Radius function `r0 (1 + amplitude · Re Y_l^m)`.
pub fn perturbed_radius(grid: &Arc<SphereGrid>, r0: f64, amplitude: f64, l: usize, m: i64) -> Result<ScalarField> {
    if m.unsigned_abs() as usize > l {
        return Err(Error::InvalidParameter(format!("order {m} exceeds degree {l}")));
    }
    if l > grid.bandlimit() {
        return Err(Error::InvalidParameter(format!(
            "degree {l} exceeds bandlimit {}",
            grid.bandlimit()
        )));
    }
    Ok(ScalarField::from_fn(grid, |t, p| {
        r0 * (1.0 + amplitude * complex_harmonic_real_part(l, m, t, p))
    }))
}
