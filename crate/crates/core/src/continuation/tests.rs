use super::*;
use crate::ambient::{AmbientGeometry, Rotation};
use crate::random::{random_field, random_field_around};
use crate::sphere::SphereGrid;

fn schwarzschild() -> AmbientGeometry {
    AmbientGeometry::new(1.0).unwrap()
}

fn lumpy(l: usize) -> SurfaceGeometry {
    let grid = SphereGrid::new(l).unwrap();
    SurfaceGeometry::from_graph(schwarzschild(), &random_field_around(&grid, 5, 4, 3.0, 0.1)).unwrap()
}

fn radial_flow(r0: f64, s: f64) -> f64 {
    // dr/ds = sqrt(1 - 2/r), RK4
    let f = |r: f64| (1.0 - 2.0 / r).sqrt();
    let n = 1000;
    let h = s / n as f64;
    let mut r = r0;
    for _ in 0..n {
        let k1 = f(r);
        let k2 = f(r + 0.5 * h * k1);
        let k3 = f(r + 0.5 * h * k2);
        let k4 = f(r + h * k3);
        r += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    r
}

#[test]
fn round_sphere_normal_flow() {
    let grid = SphereGrid::new(10).unwrap();
    let s = SurfaceGeometry::round(schwarzschild(), &grid, 3.0).unwrap();
    let one = ScalarField::constant(&grid, 1.0);
    let moved = normal_flow_step(&s, &one, 0.01).unwrap();
    let rho = moved.graph_radius().unwrap();
    for v in rho.values() {
        assert!((v - 3.0057735027).abs() < 1e-9, "{v}");
    }

    let step_gap = |ds: f64| {
        let full = normal_flow_step(&s, &one, ds).unwrap();
        let half = normal_flow_step(&s, &one, 0.5 * ds).unwrap();
        let twice = normal_flow_step(&half, &one, 0.5 * ds).unwrap();
        (full.graph_radius().unwrap().values()[0] - twice.graph_radius().unwrap().values()[0]).abs()
    };
    let ratio = step_gap(0.02) / step_gap(0.01);
    assert!((3.5..=4.5).contains(&ratio), "{ratio}");

    let err =
        |ds: f64| (normal_flow_step(&s, &one, ds).unwrap().graph_radius().unwrap().values()[3] - radial_flow(3.0, ds)).abs();
    let ratio = err(0.02) / err(0.01);
    assert!((3.5..=4.5).contains(&ratio), "{ratio}");
}

#[test]
fn zero_speed_changes_nothing() {
    let s = lumpy(10);
    let zero = ScalarField::zeros(s.grid());
    let moved = normal_flow_step(&s, &zero, 0.1).unwrap();
    assert_eq!(moved.graph_radius().unwrap().values(), s.graph_radius().unwrap().values());

    let family = isometric_continuation(&s, &s, &zero, 0.05, 6).unwrap();
    assert_eq!(family.records.len(), 7);
    for r in &family.records {
        assert!(r.drift < 1e-12);
        assert_eq!(r.report.mass, 0.0);
    }
    let d = fd_mass_derivative(&family).unwrap();
    assert_eq!(d.value, 0.0);
}

#[test]
fn drift_correction_recovers_metric() {
    let grid = SphereGrid::new(10).unwrap();
    let s = SurfaceGeometry::round(schwarzschild(), &grid, 3.0).unwrap();
    let target = s.metric();
    let same = drift_correction(&s, &target).unwrap();
    assert_eq!(same.history.len(), 1);

    // no degree <= 1 content, which would include the kernel of the round sphere
    let high = |seed| {
        let f = random_field(&grid, seed, 3);
        f.axpy(-1.0, &f.truncated(1)).unwrap().scale(1e-3)
    };
    let (g, p) = (high(11), TangentField::new(&high(12), &high(13)).unwrap());
    let bent = displace(&s, &g, &p, 1.0).unwrap();
    assert!(bent.metric_drift(&target).unwrap() > 1e-5);
    let fixed = drift_correction(&bent, &target).unwrap();
    assert!(fixed.drift < 1e-9, "{:?}", fixed.history);
    let h = &fixed.history;
    for k in 0..h.len() - 1 {
        if h[k + 1] > 1e-12 {
            assert!(h[k + 1] / (h[k] * h[k]) < 1e3, "{h:?}");
        }
    }
    // congruent to the round sphere again
    let rho = fixed.surface.graph_radius().unwrap();
    let mean = rho.values().iter().sum::<f64>() / rho.values().len() as f64;
    assert!(
        rho.values().iter().all(|v| (v - mean).abs() < 1e-7),
        "{}",
        rho.max() - rho.min()
    );
}

#[test]
fn congruent_family_keeps_constraint_and_sign() {
    let s = lumpy(12);
    let t = s.rigid_image(&Rotation::about_axis([0.2, 0.5, 0.8], 0.7).unwrap()).unwrap();
    let speed = random_field_around(s.grid(), 21, 3, 1.0, 0.5);
    let settings = ContinuationSettings::default();
    let family = symmetric_continuation(&s, &t, &speed, 0.02, 8, &settings).unwrap();
    assert_eq!(family.backward.len(), 9);
    let scale = family.scale;
    for r in family.records.iter().chain(&family.backward) {
        assert!(r.drift <= family.drift_tolerance, "{} {}", r.drift, family.drift_tolerance);
        assert!(r.report.sigma_convex);
        assert!(r.report.mass >= -1e-8 * scale, "{} at {}", r.report.mass, r.s);
    }
    let d = fd_mass_derivative(&family).unwrap();
    assert!(d.central);
    assert!(d.value.abs() <= 1e-6 * scale, "{d:?} {scale}");
    assert!(first_variation_rhs_check(&s, &t, &speed) < 1e-12);

    let one_sided = isometric_continuation(&s, &t, &speed, 0.02, 8).unwrap();
    let d = fd_mass_derivative(&one_sided).unwrap();
    assert!(!d.central);
    assert!(d.value.abs() <= 1e-5 * scale, "{d:?}");

    let log = family.log();
    assert_eq!(log.len(), 17);
    assert!(log.windows(2).all(|w| w[0].s < w[1].s));
    let line = serde_json::to_value(&log[0]).unwrap();
    for key in [
        "s",
        "E",
        "drift",
        "H_min",
        "H_prime_min",
        "sigma_convex",
        "sigma_prime_mean_convex",
        "solver_residual",
    ] {
        assert!(line.get(key).is_some(), "{key}");
    }
}

fn first_variation_rhs_check(a: &SurfaceGeometry, b: &SurfaceGeometry, f: &ScalarField) -> f64 {
    crate::mass::first_variation_rhs(a, b, f).unwrap().abs()
}

#[test]
fn first_order_family_matches_rhs() {
    let s = lumpy(14);
    let factor = LinearizedIsometry::new(&s).unwrap();
    let eps = 0.05;
    let offset = random_field(s.grid(), 8, 3);
    let mean = s.mean_curvature();
    let form: Vec<[f64; 3]> = (0..s.node_count())
        .map(|k| {
            // smooth traceless offset: a multiple of the traceless second form
            let (h, g) = (s.second_form_at(k), s.metric_at(k));
            let half_mean = 0.5 * mean.values()[k];
            let a = eps * offset.values()[k];
            let t: Vec<f64> = (0..3).map(|c| h[c] + a * (h[c] - half_mean * g[c])).collect();
            [t[0], t[1], t[2]]
        })
        .collect();
    let form = SymTensorField::new(s.grid().clone(), form).unwrap();
    let speed = random_field_around(s.grid(), 9, 3, 1.0, 0.5);
    let check = first_order_family_derivative(&factor, &s, &form, &speed, 1e-3).unwrap();
    assert!(check.rhs > 0.0);
    assert!(check.relative_error < 1e-3, "{check:?}");
}

#[test]
fn bad_inputs_are_rejected() {
    let s = lumpy(8);
    let one = ScalarField::constant(s.grid(), 1.0);
    assert!(matches!(
        isometric_continuation(&s, &s, &one, 0.05, 0),
        Err(Error::InvalidParameter(_))
    ));
    let far = SurfaceGeometry::round(schwarzschild(), s.grid(), 3.5).unwrap();
    assert!(matches!(
        isometric_continuation(&s, &far, &one, 0.05, 5),
        Err(Error::DriftUncorrectable { .. })
    ));
    let other = SphereGrid::new(9).unwrap();
    assert!(matches!(
        normal_flow_step(&s, &ScalarField::zeros(&other), 0.1),
        Err(Error::GridMismatch)
    ));
    let short = isometric_continuation(&s, &s, &ScalarField::zeros(s.grid()), 0.05, 3).unwrap();
    assert!(fd_mass_derivative(&short).is_err());

    let factor = ReusedFactorization::new(&s).unwrap();
    let strict = ContinuationSettings {
        mean_curvature_floor: 1.0,
        ..Default::default()
    };
    assert!(matches!(
        isometric_continuation_with(&factor, &s, &s, &one, 0.05, 5, &strict),
        Err(Error::MeanCurvatureDegenerate { .. })
    ));
}

fn orbit_gap(base: &SurfaceGeometry, axis: &Vec3, rho: &ScalarField, guess: f64) -> (f64, f64) {
    let gap = |t: f64| {
        let r = base.rigid_image(&Rotation::about_axis(*axis, t).unwrap()).unwrap().graph_radius().unwrap();
        r.axpy(-1.0, rho).unwrap().sup_norm()
    };
    let (mut a, mut b) = (guess - 0.5 * guess.abs() - 1e-3, guess + 0.5 * guess.abs() + 1e-3);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let (c, d) = (b - phi * (b - a), a + phi * (b - a));
        if gap(c) < gap(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let t = 0.5 * (a + b);
    (t, gap(t))
}

#[test]
fn killing_speed_tracks_the_rotation_orbit_to_second_order() {
    let grid = SphereGrid::new(12).unwrap();
    let rho = crate::random::perturbed_radius(&grid, 3.0, 0.05, 2, 2).unwrap();
    let s = SurfaceGeometry::from_graph(schwarzschild(), &rho).unwrap();
    let axis = [0.3, -0.2, 1.0];
    let (f, _) = TangentField::killing_data(&s, &crate::surface::HelmholtzSolver::new(&s).unwrap(), &axis).unwrap();
    let speed = linalg::norm(&axis);
    let mut gaps = Vec::new();
    for (s_max, steps) in [(0.01, 5), (0.01, 20), (0.04, 20)] {
        let fam = isometric_continuation(&s, &s, &f, s_max, steps).unwrap();
        let last = fam.records.last().unwrap();
        let r = last.sigma.graph_radius().unwrap();
        let rp = last.sigma_prime.graph_radius().unwrap();
        assert!(r.axpy(-1.0, &rp).unwrap().sup_norm() < 1e-10);
        let (angle, gap) = orbit_gap(&s, &axis, &r, s_max * speed);
        assert!((angle / (s_max * speed) - 1.0).abs() < 0.05, "{angle}");
        gaps.push(gap);
    }
    // The speed is carried by the grid labels, which slip along the orbit;
    // the gap is second order in s and does not shrink with the step.
    assert!((gaps[0] / gaps[1] - 1.0).abs() < 0.05, "{gaps:?}");
    let order = (gaps[2] / gaps[1]).log2() / 2.0;
    assert!((order - 2.0).abs() < 0.2, "{gaps:?}");
}
