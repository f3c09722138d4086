use std::f64::consts::PI;

use super::*;
use crate::ambient::{AmbientPoint, Rotation};
use crate::random::{perturbed_radius, random_field};

fn schwarzschild() -> AmbientGeometry {
    AmbientGeometry::new(1.0).unwrap()
}

fn perturbed(l: usize, mass: f64) -> SurfaceGeometry {
    let grid = SphereGrid::new(l).unwrap();
    let rho = perturbed_radius(&grid, 3.0, 0.05, 2, 2).unwrap();
    SurfaceGeometry::from_graph(AmbientGeometry::new(mass).unwrap(), &rho).unwrap()
}

#[test]
fn round_sphere_closed_forms() {
    let grid = SphereGrid::new(24).unwrap();
    let s = SurfaceGeometry::round(schwarzschild(), &grid, 3.0).unwrap();
    let v = (1.0f64 / 3.0).sqrt();
    for k in 0..s.node_count() {
        let st = grid.sin_theta(k);
        let g = s.metric_at(k);
        assert!((g[0] - 9.0).abs() < 1e-12 && g[1].abs() < 1e-12 && (g[2] - 9.0 * st * st).abs() < 1e-12);
        assert!((s.mean[k] - 2.0 * v / 3.0).abs() < 1e-11);
        assert!((s.mean[k] - 0.3849002).abs() < 1e-7);
        assert!((s.gauss[k] - 1.0 / 9.0).abs() < 1e-11);
        assert!((s.ric_normal[k] + 2.0 / 27.0).abs() < 1e-11);
        assert!((s.area_element[k] - linalg::sym2_det(g).sqrt()).abs() < 1e-15);
        let h = s.second_form_at(k);
        assert!((h[0] - 3.0 * v).abs() < 1e-10, "{h:?}");
    }
    assert!((s.area() - 36.0 * PI).abs() < 1e-10);
    assert!(s.is_convex());
}

#[test]
fn near_horizon_is_almost_minimal() {
    let grid = SphereGrid::new(12).unwrap();
    let s = SurfaceGeometry::round(schwarzschild(), &grid, 2.0 + 1e-6).unwrap();
    assert!(s.mean_curvature().sup_norm() < 1e-3);
    assert!(matches!(
        SurfaceGeometry::round(schwarzschild(), &grid, 2.0),
        Err(Error::HorizonViolation { .. })
    ));
}

#[test]
fn round_sphere_residuals_vanish() {
    let grid = SphereGrid::new(15).unwrap();
    let s = SurfaceGeometry::round(schwarzschild(), &grid, 3.0).unwrap();
    assert!(s.gauss_curvature().residual().sup_norm() < 1e-10);
    assert!(s.codazzi_residual().sup_norm() < 1e-10);
    assert!(s.potential_laplace_residual().sup_norm() < 1e-10);
    assert!(s.potential_gradient_residual().sup_norm() < 1e-10);
}

#[test]
fn flat_limit_potential_identities() {
    let s = perturbed(15, 0.0);
    assert!(s.potential_laplace_residual().sup_norm() < 1e-10);
    assert!(s.potential_gradient_residual().sup_norm() < 1e-12);
}

#[test]
fn residuals_decay_with_bandlimit() {
    let build = |l: usize, mass: f64| {
        let grid = SphereGrid::new(l).unwrap();
        let rho = perturbed_radius(&grid, 3.0, 0.2, 2, 2).unwrap();
        SurfaceGeometry::from_graph(AmbientGeometry::new(mass).unwrap(), &rho).unwrap()
    };
    for mass in [1.0, 0.0] {
        let lo = build(15, mass);
        let hi = build(31, mass);
        let gauss = (
            lo.gauss_curvature().residual().sup_norm(),
            hi.gauss_curvature().residual().sup_norm(),
        );
        let codazzi = (lo.codazzi_residual().sup_norm(), hi.codazzi_residual().sup_norm());
        assert!(gauss.0 / gauss.1 >= 50.0, "gauss m={mass} {gauss:?}");
        assert!(codazzi.0 / codazzi.1 >= 50.0, "codazzi m={mass} {codazzi:?}");
        if mass > 0.0 {
            let lap = (
                lo.potential_laplace_residual().sup_norm(),
                hi.potential_laplace_residual().sup_norm(),
            );
            let grad = (
                lo.potential_gradient_residual().sup_norm(),
                hi.potential_gradient_residual().sup_norm(),
            );
            assert!(lap.0 / lap.1 >= 50.0, "laplace {lap:?}");
            assert!(grad.0 / grad.1 >= 50.0, "gradient {grad:?}");
        }
    }
}

#[test]
fn gauss_bonnet() {
    let s = perturbed(31, 1.0);
    let total = s.integrate(&s.gauss_curvature_extrinsic()).unwrap();
    assert!((total - 4.0 * PI).abs() < 1e-8, "{total}");
}

/// Euclidean oracle for `ρ = 3(1 + ε sin²θ cos 2φ)` using the classical
/// first/second fundamental form coefficients of a parametrised surface.
#[test]
fn flat_graph_matches_euclidean_formulas() {
    let eps = 0.05 * 0.25 * (15.0 / (2.0 * PI)).sqrt();
    let grid = SphereGrid::new(20).unwrap();
    let rho = ScalarField::from_fn(&grid, |t, p| 3.0 * (1.0 + eps * t.sin().powi(2) * (2.0 * p).cos()));
    let s = SurfaceGeometry::from_graph(AmbientGeometry::flat(), &rho).unwrap();
    for k in (0..s.node_count()).step_by(5) {
        let (t, p) = (grid.theta(k), grid.phi(k));
        let (st, ct) = t.sin_cos();
        let (s2, c2) = (2.0 * p).sin_cos();
        let r = 3.0 * (1.0 + eps * st * st * c2);
        let rt = 3.0 * eps * 2.0 * st * ct * c2;
        let rp = -3.0 * eps * st * st * 2.0 * s2;
        let rtt = 3.0 * eps * 2.0 * (ct * ct - st * st) * c2;
        let rtp = -3.0 * eps * 2.0 * st * ct * 2.0 * s2;
        let rpp = -3.0 * eps * st * st * 4.0 * c2;
        let (sp, cp) = p.sin_cos();
        let w = [st * cp, st * sp, ct];
        let wt = [ct * cp, ct * sp, -st];
        let wp = [-st * sp, st * cp, 0.0];
        let wtp = [-ct * sp, ct * cp, 0.0];
        let wpp = [-st * cp, -st * sp, 0.0];
        let xt: Vec3 = std::array::from_fn(|i| rt * w[i] + r * wt[i]);
        let xp: Vec3 = std::array::from_fn(|i| rp * w[i] + r * wp[i]);
        let xtt: Vec3 = std::array::from_fn(|i| rtt * w[i] + 2.0 * rt * wt[i] - r * w[i]);
        let xtp: Vec3 = std::array::from_fn(|i| rtp * w[i] + rt * wp[i] + rp * wt[i] + r * wtp[i]);
        let xpp: Vec3 = std::array::from_fn(|i| rpp * w[i] + 2.0 * rp * wp[i] + r * wpp[i]);
        let nn = linalg::cross(&xt, &xp);
        let n = linalg::scale(&nn, 1.0 / linalg::norm(&nn));
        let (e, f, g) = (linalg::dot(&xt, &xt), linalg::dot(&xt, &xp), linalg::dot(&xp, &xp));
        let (l2, m2, n2) = (-linalg::dot(&xtt, &n), -linalg::dot(&xtp, &n), -linalg::dot(&xpp, &n));
        let det = e * g - f * f;
        let mean = (e * n2 - 2.0 * f * m2 + g * l2) / det;
        let gauss = (l2 * n2 - m2 * m2) / det;
        assert!((s.mean[k] - mean).abs() < 1e-9, "{} vs {mean}", s.mean[k]);
        assert!((s.gauss[k] - gauss).abs() < 1e-9);
        let gm = s.metric_at(k);
        assert!((gm[0] - e).abs() < 1e-9 && (gm[1] - f).abs() < 1e-9 && (gm[2] - g).abs() < 1e-9);
        assert!(s.ric_normal[k] == 0.0 && s.potential[k] == 1.0 && s.normal_potential[k] == 0.0);
    }
}

#[test]
fn flat_sphere_closed_forms() {
    let grid = SphereGrid::new(10).unwrap();
    let s = SurfaceGeometry::round(AmbientGeometry::flat(), &grid, 2.5).unwrap();
    for k in 0..s.node_count() {
        assert!((s.mean[k] - 0.8).abs() < 1e-12);
        assert!((s.gauss[k] - 0.16).abs() < 1e-12);
    }
    assert!((s.area() - 25.0 * PI).abs() < 1e-10);
}

#[test]
fn divergence_theorem_and_self_adjointness() {
    let s = perturbed(20, 1.0);
    let f = random_field(s.grid(), 11, 6);
    let g = random_field(s.grid(), 12, 6);
    let lf = s.laplace_beltrami(&f).unwrap();
    let lg = s.laplace_beltrami(&g).unwrap();
    assert!(s.integrate(&lf).unwrap().abs() < 1e-9);
    let a = s.integrate(&f.zip_with(&lg, |x, y| x * y).unwrap()).unwrap();
    let b = s.integrate(&g.zip_with(&lf, |x, y| x * y).unwrap()).unwrap();
    assert!((a - b).abs() < 1e-8);
}

#[test]
fn round_laplacian_eigenvalues() {
    let grid = SphereGrid::new(12).unwrap();
    let s = SurfaceGeometry::round(schwarzschild(), &grid, 3.0).unwrap();
    let y = ScalarField::from_fn(&grid, |t, p| crate::random::complex_harmonic_real_part(2, 2, t, p));
    let ly = s.laplace_beltrami(&y).unwrap();
    for k in 0..s.node_count() {
        assert!((ly.values()[k] + 6.0 / 9.0 * y.values()[k]).abs() < 1e-12);
    }
}

#[test]
fn helmholtz_round_trip() {
    let s = perturbed(16, 1.0);
    let f = random_field(s.grid(), 1, 5);
    let u = random_field(s.grid(), 2, 5);
    let p = TangentField::new(&f, &u).unwrap();
    let w = p.ambient(&s).unwrap();
    let q = TangentField::from_ambient(&s, &w).unwrap();
    let df = q.potential().axpy(-1.0, p.potential()).unwrap();
    let du = q.stream().axpy(-1.0, p.stream()).unwrap();
    assert!(
        df.sup_norm() < 1e-10 && du.sup_norm() < 1e-10,
        "{} {}",
        df.sup_norm(),
        du.sup_norm()
    );
    // ambient realisation is tangent
    for k in 0..s.node_count() {
        assert!(linalg::dot(&s.conormal()[k], &w[k]).abs() < 1e-12);
    }
    // div and curl identities
    let div = p.divergence(&s).unwrap();
    let curl = p.curl(&s).unwrap();
    let (div2, curl2) = s.ambient_divergence_curl(&w).unwrap();
    assert!(div.axpy(-1.0, &div2).unwrap().sup_norm() < 1e-6);
    assert!(curl.axpy(-1.0, &curl2).unwrap().sup_norm() < 1e-6);
}

#[test]
fn rotation_equivariance() {
    let grid = SphereGrid::new(31).unwrap();
    let rho = perturbed_radius(&grid, 3.0, 0.05, 2, 2).unwrap();
    let amb = schwarzschild();
    let s = SurfaceGeometry::from_graph(amb, &rho).unwrap();
    let rot = Rotation::about_axis([0.3, -0.5, 0.8], 0.7).unwrap();
    let inv = rot.inverse();
    let coeffs = rho.coefficients();
    let rotated_rho = ScalarField::from_fn(&grid, |t, p| {
        let q = amb.apply_rotation(
            &inv,
            &AmbientPoint {
                r: 1.0,
                theta: t,
                phi: p,
            },
        );
        grid.evaluate(&coeffs, q.theta, q.phi)
    });
    let sr = SurfaceGeometry::from_graph(amb, &rotated_rho).unwrap();
    let h = s.mean_curvature().coefficients();
    let k = s.gauss_curvature_extrinsic().coefficients();
    let mut err: f64 = 0.0;
    for node in 0..grid.node_count() {
        let q = amb.apply_rotation(
            &inv,
            &AmbientPoint {
                r: 1.0,
                theta: grid.theta(node),
                phi: grid.phi(node),
            },
        );
        err = err.max((sr.mean[node] - grid.evaluate(&h, q.theta, q.phi)).abs());
        err = err.max((sr.gauss[node] - grid.evaluate(&k, q.theta, q.phi)).abs());
    }
    assert!(err < 1e-9, "{err}");
}

#[test]
fn rigid_image_preserves_intrinsic_and_extrinsic_data() {
    let s = perturbed(12, 1.0);
    for rot in [
        Rotation::about_axis([1.0, 2.0, 0.5], 1.1).unwrap(),
        Rotation::reflection([0.2, 0.1, 1.0]).unwrap(),
    ] {
        let t = s.rigid_image(&rot).unwrap();
        for k in 0..s.node_count() {
            for c in 0..3 {
                assert!((s.metric[k][c] - t.metric[k][c]).abs() < 1e-12);
                assert!((s.second_form[k][c] - t.second_form[k][c]).abs() < 1e-12);
            }
            assert!((s.mean[k] - t.mean[k]).abs() < 1e-12);
        }
    }
}

#[test]
fn embedding_round_trip_and_graph_radius() {
    let s = perturbed(14, 1.0);
    let e = SurfaceGeometry::from_embedding(*s.ambient(), s.grid(), s.positions()).unwrap();
    for k in 0..s.node_count() {
        assert!((s.mean[k] - e.mean[k]).abs() < 1e-11);
    }
    let rho = e.graph_radius().unwrap();
    let want = s.graph().unwrap();
    assert!(rho.axpy(-1.0, want).unwrap().sup_norm() < 1e-11);
}

#[test]
fn errors_on_bad_input() {
    let grid = SphereGrid::new(7).unwrap();
    let other = SphereGrid::new(8).unwrap();
    let s = SurfaceGeometry::round(schwarzschild(), &grid, 3.0).unwrap();
    assert!(matches!(
        s.laplace_beltrami(&ScalarField::zeros(&other)),
        Err(Error::GridMismatch)
    ));
    let flat_points: Vec<Vec3> = (0..grid.node_count())
        .map(|k| [grid.unit_vector(k)[0] * 3.0, 0.0, 3.0])
        .collect();
    assert!(SurfaceGeometry::from_embedding(schwarzschild(), &grid, &flat_points).is_err());
}
