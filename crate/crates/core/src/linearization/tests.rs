use super::*;
use crate::ambient::{AmbientGeometry, Rotation};
use crate::random::{perturbed_radius, random_field};
use crate::sphere::SphereGrid;
use crate::surface::HelmholtzSolver;

fn perturbed(l: usize, mass: f64) -> SurfaceGeometry {
    let grid = SphereGrid::new(l).unwrap();
    let rho = perturbed_radius(&grid, 3.0, 0.05, 2, 2).unwrap();
    SurfaceGeometry::from_graph(AmbientGeometry::new(mass).unwrap(), &rho).unwrap()
}

fn lumpy(l: usize, mass: f64) -> SurfaceGeometry {
    let grid = SphereGrid::new(l).unwrap();
    let rho = crate::random::random_field_around(&grid, 5, 4, 3.0, 0.1);
    SurfaceGeometry::from_graph(AmbientGeometry::new(mass).unwrap(), &rho).unwrap()
}

#[test]
fn unit_normal_speed_gives_twice_second_form() {
    let s = perturbed(10, 1.0);
    let one = ScalarField::constant(s.grid(), 1.0);
    let dg = metric_variation(&s, &one, &TangentField::zero(s.grid())).unwrap();
    for k in 0..s.node_count() {
        for c in 0..3 {
            assert!((dg.components()[k][c] - 2.0 * s.second_form_at(k)[c]).abs() < 1e-13);
        }
    }
}

#[test]
fn killing_data_is_isometric() {
    let s = lumpy(31, 1.0);
    let solver = HelmholtzSolver::new(&s).unwrap();
    for axis in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.3, -0.4, 0.8]] {
        let (g, p) = TangentField::killing_data(&s, &solver, &axis).unwrap();
        let dg = metric_variation(&s, &g, &p).unwrap();
        assert!(frame_sup_norm(&s, &dg) < 1e-8, "{}", frame_sup_norm(&s, &dg));
    }
}

#[test]
fn metric_variation_matches_finite_differences() {
    let s0 = lumpy(16, 1.0);
    let base = SurfaceGeometry::from_embedding(*s0.ambient(), s0.grid(), s0.positions()).unwrap();
    let g = random_field(base.grid(), 21, 4).map(|v| 1.0 + v);
    let p = TangentField::new(&random_field(base.grid(), 22, 4), &random_field(base.grid(), 23, 4)).unwrap();
    let w = p.ambient(&base).unwrap();
    let exact = metric_variation(&base, &g, &p).unwrap();
    let err = |step: f64| {
        let pts: Vec<_> = (0..base.node_count())
            .map(|k| {
                let v = linalg::axpy(&w[k], g.values()[k], &base.normal()[k]);
                linalg::axpy(&base.positions()[k], step, &v)
            })
            .collect();
        let moved = SurfaceGeometry::from_embedding(*base.ambient(), base.grid(), &pts).unwrap();
        let fd = moved.metric().sub(&base.metric()).unwrap().scale(1.0 / step);
        frame_sup_norm(&base, &fd.sub(&exact).unwrap())
    };
    let ratio = err(1e-3) / err(5e-4);
    assert!((1.8..=2.2).contains(&ratio), "{ratio}");
}

#[test]
fn round_sphere_unit_speed() {
    let grid = SphereGrid::new(12).unwrap();
    let s = SurfaceGeometry::round(AmbientGeometry::new(1.0).unwrap(), &grid, 3.0).unwrap();
    let one = ScalarField::constant(&grid, 1.0);
    let sol = solve_linearized_isometry(&s, &s, &one).unwrap();
    assert_eq!(sol.gauge_report.kernel_dimension, 6);
    assert!(sol.normal_speed.axpy(-1.0, &one).unwrap().sup_norm() < 1e-8);
    assert!(sol.tangential.potential().sup_norm() < 1e-8 && sol.tangential.stream().sup_norm() < 1e-8);
    assert!(sol.residual_norm < 1e-10);
}

#[test]
fn zero_speed_gives_zero_solution() {
    let s = perturbed(10, 1.0);
    let zero = ScalarField::zeros(s.grid());
    let sol = solve_linearized_isometry(&s, &s, &zero).unwrap();
    assert!(sol.normal_speed.sup_norm() < 1e-12);
    assert!(sol.tangential.potential().sup_norm() < 1e-12);
    assert_eq!(sol.residual_norm, 0.0);
}

#[test]
fn congruent_pair_and_traceless_bound() {
    let s = lumpy(16, 1.0);
    let image = s.rigid_image(&Rotation::about_axis([0.2, 1.0, -0.3], 0.9).unwrap()).unwrap();
    let f = random_field(s.grid(), 31, 5).map(|v| 1.0 + v);
    let sol = solve_linearized_isometry(&s, &image, &f).unwrap();
    assert!(sol.residual_norm <= 1e-6, "{}", sol.residual_norm);
    let res = isometry_residual(&s, &image, &f, &sol.normal_speed, &sol.tangential).unwrap();
    let tl = traceless_residual(&s, &image, &f, &sol.normal_speed, &sol.tangential).unwrap();
    assert!(frame_sup_norm(&s, &tl) <= 10.0 * frame_sup_norm(&s, &res) + 1e-12);
    // Agrees with `(F, 0)` up to the gauge: the near-null modes removed.
    let kernel = LinearizedIsometry::new(&s).unwrap().kernel_data(&s).unwrap();
    let gap = sol.normal_speed.axpy(-1.0, &f).unwrap();
    let (rg, _, _) = remove_kernel(&s, gap, sol.tangential.clone(), &kernel).unwrap();
    assert!(rg.sup_norm() < 1e-6, "{:e}", rg.sup_norm());
}

#[test]
fn general_pair_is_solved_to_tolerance() {
    let s = lumpy(24, 1.0);
    let other = perturbed(24, 1.0);
    let grid = s.grid().clone();
    let other = SurfaceGeometry::from_graph(
        *other.ambient(),
        &ScalarField::new(grid.clone(), other.graph().unwrap().values().to_vec()).unwrap(),
    )
    .unwrap();
    let f = random_field(&grid, 41, 4).map(|v| 1.0 + v);
    let sol = solve_linearized_isometry(&s, &other, &f).unwrap();
    assert_eq!(sol.gauge_report.kernel_dimension, 6);
    assert!(sol.residual_norm <= 1e-6, "{}", sol.residual_norm);
}

#[test]
fn solution_is_linear_in_speed() {
    let s = lumpy(14, 1.0);
    let other = s.rigid_image(&Rotation::about_axis([0.0, 0.0, 1.0], 0.4).unwrap()).unwrap();
    let op = LinearizedIsometry::new(&s).unwrap();
    let f1 = random_field(s.grid(), 1, 4);
    let f2 = random_field(s.grid(), 2, 4).map(|v| v + 0.5);
    let sum = f1.axpy(2.0, &f2).unwrap();
    let a = op.solve(&s, &other, &f1).unwrap();
    let b = op.solve(&s, &other, &f2).unwrap();
    let c = op.solve(&s, &other, &sum).unwrap();
    let g = a
        .normal_speed
        .axpy(2.0, &b.normal_speed)
        .unwrap()
        .axpy(-1.0, &c.normal_speed)
        .unwrap();
    let p = a
        .tangential
        .axpy(2.0, &b.tangential)
        .unwrap()
        .axpy(-1.0, &c.tangential)
        .unwrap();
    assert!(g.sup_norm() < 1e-8);
    assert!(p.potential().sup_norm() < 1e-8 && p.stream().sup_norm() < 1e-8);
}

#[test]
fn kernel_contains_rotations() {
    let s = lumpy(24, 1.0);
    let op = LinearizedIsometry::new(&s).unwrap();
    assert_eq!(op.kernel_dimension(), 6);
    let kernel = op.kernel_data(&s).unwrap();
    let solver = HelmholtzSolver::new(&s).unwrap();
    for axis in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
        let (g, p) = TangentField::killing_data(&s, &solver, &axis).unwrap();
        let norm = deformation_inner_product(&s, (&g, &p), (&g, &p)).unwrap().sqrt();
        let (rg, rp, _) = remove_kernel(&s, g, p, &kernel).unwrap();
        let rest = deformation_inner_product(&s, (&rg, &rp), (&rg, &rp)).unwrap().sqrt();
        assert!(rest / norm < 1e-6, "{}", rest / norm);
    }
}

#[test]
fn flat_kernels_have_dimension_six() {
    let grid = SphereGrid::new(10).unwrap();
    let s = SurfaceGeometry::round(AmbientGeometry::flat(), &grid, 2.0).unwrap();
    assert_eq!(LinearizedIsometry::new(&s).unwrap().kernel_dimension(), 6);
    let flat = lumpy(24, 0.0);
    assert_eq!(LinearizedIsometry::new(&flat).unwrap().kernel_dimension(), 6);
}

#[test]
fn coarse_grids_separate_approximate_bendings() {
    for l in [9, 11, 12] {
        let f = LinearizedIsometry::new(&perturbed(l, 1.0)).unwrap();
        assert_eq!(f.kernel_dimension(), 6, "L = {l}");
        let (kept, dropped) = f.ratio_summary();
        assert!(kept > 1e3 * dropped, "L = {l}: {kept:e} vs {dropped:e}");
    }
    assert_eq!(kernel_cut(&[1.0, 0.5, 0.4], 1.0), KERNEL_THRESHOLD);
    assert_eq!(kernel_cut(&[1.0, 0.5, 2e-6, 1e-6], 1.0), 0.5);
    assert_eq!(kernel_cut(&[1.0, 1e-3, 1e-7, 0.0], 1.0), 1e-7);
}

#[test]
fn trace_reduction_on_round_sphere() {
    let grid = SphereGrid::new(12).unwrap();
    let s = SurfaceGeometry::round(AmbientGeometry::new(1.0).unwrap(), &grid, 3.0).unwrap();
    let y = ScalarField::from_fn(&grid, |t, p| crate::random::complex_harmonic_real_part(2, 2, t, p));
    let g = ScalarField::constant(&grid, 0.7);
    let f = trace_reduction(&s, &g, &TangentField::gradient(&y)).unwrap();
    let mean = 2.0 * (1.0f64 / 3.0).sqrt() / 3.0;
    for k in 0..grid.node_count() {
        let want = 0.7 - 6.0 / 9.0 * y.values()[k] / mean;
        assert!((f.values()[k] - want).abs() < 1e-10);
    }
    let one = trace_reduction(&s, &ScalarField::constant(&grid, 1.0), &TangentField::zero(&grid)).unwrap();
    assert!(one.values().iter().all(|v| *v == 1.0));
}

#[test]
fn degenerate_mean_curvature_is_rejected() {
    let grid = SphereGrid::new(8).unwrap();
    let s = SurfaceGeometry::round(AmbientGeometry::new(1.0).unwrap(), &grid, 2.0 + 1e-12).unwrap();
    // H ≈ √(2(r - 2m)) / 2 stays far above 1e-8 at any representable radius.
    assert!(trace_reduction(&s, &ScalarField::zeros(&grid), &TangentField::zero(&grid)).is_ok());
    let r = trace_reduction_with_floor(&s, &ScalarField::zeros(&grid), &TangentField::zero(&grid), 1e-5);
    assert!(matches!(r, Err(Error::MeanCurvatureDegenerate { .. })));
}

#[test]
fn traceless_identity_on_random_fields() {
    let s = lumpy(12, 1.0);
    let image = s.rigid_image(&Rotation::about_axis([1.0, 1.0, 0.0], 0.3).unwrap()).unwrap();
    let f = random_field(s.grid(), 3, 5);
    let g = random_field(s.grid(), 4, 5);
    let p = TangentField::new(&random_field(s.grid(), 5, 5), &random_field(s.grid(), 6, 5)).unwrap();
    let res = isometry_residual(&s, &image, &f, &g, &p).unwrap();
    let tl = traceless_residual(&s, &image, &f, &g, &p).unwrap();
    for k in 0..s.node_count() {
        let inv = s.inverse_metric_at(k);
        let h = s.second_form_at(k);
        let mean = s.mean_curvature().values()[k];
        let r = res.components()[k];
        let tr = linalg::sym2_contract(inv, &r);
        for c in 0..3 {
            let want = -(r[c] - h[c] / mean * tr);
            assert!((tl.components()[k][c] - want).abs() < 1e-10 * (1.0 + want.abs()));
        }
    }
}

#[test]
fn non_convex_surface_is_rejected() {
    let grid = SphereGrid::new(10).unwrap();
    let rho = perturbed_radius(&grid, 3.0, 0.6, 4, 2).unwrap();
    let s = SurfaceGeometry::from_graph(AmbientGeometry::new(1.0).unwrap(), &rho).unwrap();
    assert!(!s.is_convex());
    assert!(matches!(LinearizedIsometry::new(&s), Err(Error::ConvexityViolation { .. })));
}
