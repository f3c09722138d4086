//! JSON exchange format for star-shaped surfaces.
//!
//! ```json
//! { "schema_version": 1, "n_lat": 8, "n_lon": 16, "rho": [ ... ] }
//! ```
//!
//! `rho` holds the radius at the Gauss-Legendre × equispaced nodes in
//! row-major order: colatitude index outer, longitude index inner, with
//! colatitudes increasing from the north pole and longitudes starting at 0.
//! `n_lon` must be `2 n_lat`; the file grid has bandlimit `n_lat - 1`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::{ScalarField, SphereGrid};
use crate::surface::SurfaceGeometry;

pub const SURFACE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceFile {
    pub schema_version: u32,
    pub n_lat: usize,
    pub n_lon: usize,
    pub rho: Vec<f64>,
}

impl SurfaceFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: SurfaceFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        file.validate()?;
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }

    pub fn from_surface(surf: &SurfaceGeometry) -> Result<Self> {
        let grid = surf.grid();
        Ok(SurfaceFile {
            schema_version: SURFACE_SCHEMA_VERSION,
            n_lat: grid.n_lat(),
            n_lon: grid.n_lon(),
            rho: surf.graph_radius()?.into_values(),
        })
    }

    fn validate(&self) -> Result<()> {
        if self.schema_version != SURFACE_SCHEMA_VERSION {
            return Err(Error::Format(format!(
                "schema_version {} is not supported (expected {SURFACE_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.n_lat < 2 || self.n_lon != 2 * self.n_lat {
            return Err(Error::Format(format!(
                "n_lon must be 2 n_lat, got {} x {}",
                self.n_lat, self.n_lon
            )));
        }
        if self.rho.len() != self.n_lat * self.n_lon {
            return Err(Error::Format(format!(
                "rho has {} values, expected {}",
                self.rho.len(),
                self.n_lat * self.n_lon
            )));
        }
        if self.rho.iter().any(|r| !r.is_finite() || *r <= 0.0) {
            return Err(Error::Format("rho must be finite and positive".into()));
        }
        Ok(())
    }

    /// The radius on `grid`, spectrally resampled when the file was written
    /// at another bandlimit.
    pub fn radius_on(&self, grid: &Arc<SphereGrid>) -> Result<ScalarField> {
        self.validate()?;
        if grid.n_lat() == self.n_lat {
            return ScalarField::new(grid.clone(), self.rho.clone());
        }
        let source = ScalarField::new(SphereGrid::new(self.n_lat - 1)?, self.rho.clone())?;
        Ok(ScalarField::from_fn(grid, |t, p| source.interpolate(t, p)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::AmbientGeometry;
    use crate::random::perturbed_radius;

    #[test]
    fn round_trip_and_resampling() {
        let grid = SphereGrid::new(8).unwrap();
        let rho = perturbed_radius(&grid, 3.0, 0.05, 2, 2).unwrap();
        let surf = SurfaceGeometry::from_graph(AmbientGeometry::new(1.0).unwrap(), &rho).unwrap();
        let file = SurfaceFile::from_surface(&surf).unwrap();
        let back = SurfaceFile::from_json(&file.to_json()).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.radius_on(&grid).unwrap().values(), rho.values());

        let fine = SphereGrid::new(12).unwrap();
        let want = perturbed_radius(&fine, 3.0, 0.05, 2, 2).unwrap();
        let got = back.radius_on(&fine).unwrap();
        for (a, b) in got.values().iter().zip(want.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn malformed_files_are_rejected() {
        for text in [
            r#"{"schema_version": 2, "n_lat": 2, "n_lon": 4, "rho": [1,1,1,1,1,1,1,1]}"#,
            r#"{"schema_version": 1, "n_lat": 2, "n_lon": 5, "rho": [1,1,1,1,1,1,1,1,1,1]}"#,
            r#"{"schema_version": 1, "n_lat": 2, "n_lon": 4, "rho": [1,1,1]}"#,
            r#"{"schema_version": 1, "n_lat": 2, "n_lon": 4, "rho": [1,1,1,1,1,1,1,-1]}"#,
            r#"{"schema_version": 1, "n_lat": 2, "n_lon": 4, "rho": [1,1,1,1,1,1,1,1], "extra": 0}"#,
            "not json",
        ] {
            assert!(matches!(SurfaceFile::from_json(text), Err(Error::Format(_))), "{text}");
        }
    }
}
