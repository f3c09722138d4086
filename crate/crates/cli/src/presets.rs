//! Surface and speed specifications.

use std::sync::Arc;

use qlm_core::ambient::{AmbientGeometry, Rotation};
use qlm_core::io::SurfaceFile;
use qlm_core::random::{perturbed_radius, random_coefficients, random_field, random_field_around};
use qlm_core::{ScalarField, SphereGrid, SurfaceGeometry};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceSpec {
    Round { r0: f64 },
    Perturbed { r0: f64, amplitude: f64, l: usize, m: i64 },
    File(String),
}

fn bad(field: &str, spec: &str, why: &str) -> CliError {
    CliError::config(
        field,
        format!("{why} in {spec:?}; expected `round <r0>`, `perturbed <r0> <amp> Y<l><m>` or `file <path>`"),
    )
}

/// `Y22`, `Y2-1` or, for degrees above 9, `Y10,3`.
fn parse_mode(mode: &str) -> Option<(usize, i64)> {
    let rest = mode.strip_prefix('Y')?;
    let (l, m): (usize, i64) = match rest.split_once(',') {
        Some((l, m)) => (l.parse().ok()?, m.parse().ok()?),
        None => {
            let (l, m) = rest.split_at(rest.char_indices().nth(1)?.0);
            (l.parse().ok()?, m.parse().ok()?)
        }
    };
    (m.unsigned_abs() as usize <= l).then_some((l, m))
}

impl SurfaceSpec {
    pub fn parse(field: &str, spec: &str) -> Result<Self, CliError> {
        let words: Vec<&str> = spec.split_whitespace().collect();
        let number = |w: &str| w.parse::<f64>().ok().filter(|v| v.is_finite());
        match words.as_slice() {
            ["round", r] => {
                let r0 = number(r).filter(|v| *v > 0.0).ok_or_else(|| bad(field, spec, "bad radius"))?;
                Ok(SurfaceSpec::Round { r0 })
            }
            ["perturbed", r, a, mode] => {
                let r0 = number(r).filter(|v| *v > 0.0).ok_or_else(|| bad(field, spec, "bad radius"))?;
                let amplitude = number(a).ok_or_else(|| bad(field, spec, "bad amplitude"))?;
                let (l, m) = parse_mode(mode).ok_or_else(|| bad(field, spec, "bad mode"))?;
                Ok(SurfaceSpec::Perturbed { r0, amplitude, l, m })
            }
            ["file", path] => Ok(SurfaceSpec::File(path.to_string())),
            _ => Err(bad(field, spec, "unrecognised surface")),
        }
    }

    pub fn radius(&self, field: &str, grid: &Arc<SphereGrid>) -> Result<ScalarField, CliError> {
        match self {
            SurfaceSpec::Round { r0 } => Ok(ScalarField::constant(grid, *r0)),
            SurfaceSpec::Perturbed { r0, amplitude, l, m } => {
                if *l > grid.bandlimit() {
                    return Err(CliError::config(
                        field,
                        format!("mode degree {l} exceeds the bandlimit {}", grid.bandlimit()),
                    ));
                }
                Ok(perturbed_radius(grid, *r0, *amplitude, *l, *m)?)
            }
            SurfaceSpec::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::config(field, format!("{path}: {e}")))?;
                let file = SurfaceFile::from_json(&text).map_err(|e| CliError::config(field, format!("{path}: {e}")))?;
                file.radius_on(grid)
                    .map_err(|e| CliError::config(field, format!("{path}: {e}")))
            }
        }
    }

    pub fn build(&self, field: &str, ambient: AmbientGeometry, grid: &Arc<SphereGrid>) -> Result<SurfaceGeometry, CliError> {
        Ok(SurfaceGeometry::from_graph(ambient, &self.radius(field, grid)?)?)
    }
}

/// The rotation used for `reference = "rotated"`, fixed by the seed.
pub fn seeded_rotation(seed: u64) -> Rotation {
    let c = random_coefficients(&SphereGrid::new(1).expect("small grid"), seed, 1);
    let axis = [c[1], c[2], c[3] + 1e-3];
    let angle = 0.3 + 2.0 * ((seed % 97) as f64 / 97.0);
    Rotation::about_axis(axis, angle).expect("axis is nonzero")
}

pub fn reference_surface(
    spec: &str,
    sigma: &SurfaceGeometry,
    ambient: AmbientGeometry,
    grid: &Arc<SphereGrid>,
    seed: u64,
) -> Result<SurfaceGeometry, CliError> {
    match spec {
        "rotated" => Ok(sigma.rigid_image(&seeded_rotation(seed))?),
        "same" => Ok(sigma.clone()),
        other => SurfaceSpec::parse("reference", other)?.build("reference", ambient, grid),
    }
}

/// Speeds are drawn from degrees up to 4.
pub fn speed_field(spec: &str, grid: &Arc<SphereGrid>, seed: u64) -> Result<ScalarField, CliError> {
    match spec {
        "one" => Ok(ScalarField::constant(grid, 1.0)),
        "zero" => Ok(ScalarField::zeros(grid)),
        "random" => Ok(random_field(grid, seed, 4)),
        "random-positive" => Ok(random_field_around(grid, seed, 4, 1.0, 0.5)),
        other => Err(CliError::config("speed", format!("unknown speed {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_presets() {
        assert_eq!(
            SurfaceSpec::parse("surface", "round 3").unwrap(),
            SurfaceSpec::Round { r0: 3.0 }
        );
        assert_eq!(
            SurfaceSpec::parse("surface", "perturbed 3 0.05 Y22").unwrap(),
            SurfaceSpec::Perturbed {
                r0: 3.0,
                amplitude: 0.05,
                l: 2,
                m: 2
            }
        );
        assert_eq!(
            SurfaceSpec::parse("surface", "perturbed 3 0.1 Y3-1").unwrap(),
            SurfaceSpec::Perturbed {
                r0: 3.0,
                amplitude: 0.1,
                l: 3,
                m: -1
            }
        );
        assert_eq!(
            SurfaceSpec::parse("surface", "perturbed 3 0.1 Y12,5").unwrap(),
            SurfaceSpec::Perturbed {
                r0: 3.0,
                amplitude: 0.1,
                l: 12,
                m: 5
            }
        );
        for bad in ["round", "round -1", "perturbed 3 0.1 Y13", "perturbed 3 x Y22", "ellipsoid 3"] {
            assert!(SurfaceSpec::parse("surface", bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn rotation_is_seeded() {
        assert_eq!(seeded_rotation(4), seeded_rotation(4));
        assert_ne!(seeded_rotation(4), seeded_rotation(5));
        assert!(seeded_rotation(4).is_proper());
    }
}
