//! Closed surfaces in the ambient manifold, represented by a Cartesian
//! embedding `X: S² → R³` sampled on a [`SphereGrid`].
//!
//! Graphs `X = ρ ω` are the common case. General embeddings are needed once
//! a surface is deformed while keeping its parametrisation, which is how
//! two surfaces are identified point by point through the shared grid.

mod calculus;
mod frame;
mod tangent;

use std::sync::Arc;

pub use calculus::{FrameVectorField, GaussCurvature};
pub use frame::Frame;
pub use tangent::{HelmholtzSolver, TangentField};

use crate::ambient::AmbientGeometry;
use crate::error::{Error, Result};
use crate::linalg::{self, Sym2, Vec3};
use crate::sphere::{same_grid, Derivatives, ScalarField, SphereGrid, SymTensorField};

/// Embedding and its parameter derivatives at every node.
#[derive(Debug, Clone)]
pub struct Jet {
    pub x: Vec<Vec3>,
    pub t: Vec<Vec3>,
    pub p: Vec<Vec3>,
    pub tt: Vec<Vec3>,
    pub tp: Vec<Vec3>,
    pub pp: Vec<Vec3>,
    pub ttp: Vec<Vec3>,
    pub tpp: Vec<Vec3>,
}

impl Jet {
    fn from_components(d: [Derivatives; 3]) -> Self {
        let n = d[0].f.len();
        let pick = |sel: fn(&Derivatives) -> &Vec<f64>| -> Vec<Vec3> {
            (0..n).map(|k| [sel(&d[0])[k], sel(&d[1])[k], sel(&d[2])[k]]).collect()
        };
        Jet {
            x: pick(|d| &d.f),
            t: pick(|d| &d.t),
            p: pick(|d| &d.p),
            tt: pick(|d| &d.tt),
            tp: pick(|d| &d.tp),
            pp: pick(|d| &d.pp),
            ttp: pick(|d| &d.ttp),
            tpp: pick(|d| &d.tpp),
        }
    }

    /// Leibniz expansion of `ρ ω` with exact derivatives of the unit vector.
    fn from_graph(grid: &SphereGrid, rho: &Derivatives) -> Self {
        let n = grid.node_count();
        let mut jet = Jet {
            x: Vec::with_capacity(n),
            t: Vec::with_capacity(n),
            p: Vec::with_capacity(n),
            tt: Vec::with_capacity(n),
            tp: Vec::with_capacity(n),
            pp: Vec::with_capacity(n),
            ttp: Vec::with_capacity(n),
            tpp: Vec::with_capacity(n),
        };
        for k in 0..n {
            let (st, ct) = (grid.sin_theta(k), grid.cos_theta(k));
            let (sp, cp) = grid.phi(k).sin_cos();
            let w = [st * cp, st * sp, ct];
            let w_t = [ct * cp, ct * sp, -st];
            let w_p = [-st * sp, st * cp, 0.0];
            let w_tt = linalg::scale(&w, -1.0);
            let w_tp = [-ct * sp, ct * cp, 0.0];
            let w_pp = [-st * cp, -st * sp, 0.0];
            let w_ttp = linalg::scale(&w_p, -1.0);
            let w_tpp = [-ct * cp, -ct * sp, 0.0];
            let (r, rt, rp) = (rho.f[k], rho.t[k], rho.p[k]);
            let (rtt, rtp, rpp) = (rho.tt[k], rho.tp[k], rho.pp[k]);
            let (rttp, rtpp) = (rho.ttp[k], rho.tpp[k]);
            let comb = |terms: &[(f64, &Vec3)]| -> Vec3 {
                let mut out = [0.0; 3];
                for (c, v) in terms {
                    out = linalg::axpy(&out, *c, v);
                }
                out
            };
            jet.x.push(linalg::scale(&w, r));
            jet.t.push(comb(&[(rt, &w), (r, &w_t)]));
            jet.p.push(comb(&[(rp, &w), (r, &w_p)]));
            jet.tt.push(comb(&[(rtt, &w), (2.0 * rt, &w_t), (r, &w_tt)]));
            jet.tp.push(comb(&[(rtp, &w), (rt, &w_p), (rp, &w_t), (r, &w_tp)]));
            jet.pp.push(comb(&[(rpp, &w), (2.0 * rp, &w_p), (r, &w_pp)]));
            jet.ttp.push(comb(&[
                (rttp, &w),
                (rtt, &w_p),
                (2.0 * rtp, &w_t),
                (2.0 * rt, &w_tp),
                (rp, &w_tt),
                (r, &w_ttp),
            ]));
            jet.tpp.push(comb(&[
                (rtpp, &w),
                (2.0 * rtp, &w_p),
                (rt, &w_pp),
                (rpp, &w_t),
                (2.0 * rp, &w_tp),
                (r, &w_tpp),
            ]));
        }
        jet
    }

    fn rotated(&self, m: &linalg::Mat3) -> Self {
        let rot = |v: &Vec<Vec3>| v.iter().map(|x| linalg::mat_vec(m, x)).collect();
        Jet {
            x: rot(&self.x),
            t: rot(&self.t),
            p: rot(&self.p),
            tt: rot(&self.tt),
            tp: rot(&self.tp),
            pp: rot(&self.pp),
            ttp: rot(&self.ttp),
            tpp: rot(&self.tpp),
        }
    }
}

/// Geometry of one embedded surface, evaluated at every grid node.
///
/// Tensor components refer to the parameter coordinates `(θ, φ)`; `dσ` in
/// these coordinates is `area_element`, so quadrature uses
/// `weight · area_element / sin θ`.
#[derive(Debug, Clone)]
pub struct SurfaceGeometry {
    ambient: AmbientGeometry,
    grid: Arc<SphereGrid>,
    jet: Jet,
    graph: Option<ScalarField>,
    orientation: f64,
    metric: Vec<Sym2>,
    inverse_metric: Vec<Sym2>,
    area_element: Vec<f64>,
    normal: Vec<Vec3>,
    conormal: Vec<Vec3>,
    second_form: Vec<Sym2>,
    mean: Vec<f64>,
    second_form_norm2: Vec<f64>,
    principal: Vec<[f64; 2]>,
    ric_normal: Vec<f64>,
    ric_mixed: Vec<[f64; 2]>,
    gauss: Vec<f64>,
    potential: Vec<f64>,
    normal_potential: Vec<f64>,
    christoffel: Vec<[Sym2; 2]>,
    frame: Vec<Frame>,
}

/// Minimum of `N·X / (|N||X|)`, the cosine between the Euclidean normal
/// and the position vector. Positive everywhere for a radial graph.
pub const STAR_SHAPE_FLOOR: f64 = 1e-3;

impl SurfaceGeometry {
    /// The star-shaped graph `X = ρ ω`.
    pub fn from_graph(ambient: AmbientGeometry, rho: &ScalarField) -> Result<Self> {
        let min_rho = rho.min();
        if !(min_rho > ambient.horizon_radius()) {
            return Err(Error::HorizonViolation {
                min_rho,
                horizon: ambient.horizon_radius(),
            });
        }
        let grid = rho.grid().clone();
        let d = grid.synthesize_derivatives(&rho.coefficients(), 3);
        let mut jet = Jet::from_graph(&grid, &d);
        // Keep the exact nodal radii rather than their spectral projection.
        for (k, x) in jet.x.iter_mut().enumerate() {
            *x = linalg::scale(&grid.unit_vector(k), rho.values()[k]);
        }
        let mut s = Self::from_jet(ambient, grid, jet)?;
        s.graph = Some(rho.clone());
        Ok(s)
    }

    /// A round coordinate sphere of radius `r0`.
    pub fn round(ambient: AmbientGeometry, grid: &Arc<SphereGrid>, r0: f64) -> Result<Self> {
        Self::from_graph(ambient, &ScalarField::constant(grid, r0))
    }

    /// A general embedding from nodal positions. The positions are replaced
    /// by their bandlimited projection, which defines the surface.
    pub fn from_embedding(ambient: AmbientGeometry, grid: &Arc<SphereGrid>, points: &[Vec3]) -> Result<Self> {
        if points.len() != grid.node_count() {
            return Err(Error::GridMismatch);
        }
        let comps: [Derivatives; 3] = std::array::from_fn(|c| {
            let vals: Vec<f64> = points.iter().map(|x| x[c]).collect();
            grid.synthesize_derivatives(&grid.analyze(&vals), 3)
        });
        let jet = Jet::from_components(comps);
        Self::from_jet(ambient, grid.clone(), jet)
    }

    /// The image of this surface under an ambient rotation, keeping the
    /// parametrisation (so node `k` of the image is the image of node `k`).
    pub fn rigid_image(&self, rot: &crate::ambient::Rotation) -> Result<Self> {
        Self::from_jet(self.ambient, self.grid.clone(), self.jet.rotated(rot.matrix()))
    }

    fn from_jet(ambient: AmbientGeometry, grid: Arc<SphereGrid>, jet: Jet) -> Result<Self> {
        let n = grid.node_count();
        let horizon = ambient.horizon_radius();
        let mut min_r = f64::INFINITY;
        let mut cosines = Vec::with_capacity(n);
        for k in 0..n {
            let x = &jet.x[k];
            let r = linalg::norm(x);
            min_r = min_r.min(r);
            let nrm = linalg::cross(&jet.t[k], &jet.p[k]);
            cosines.push(linalg::dot(&nrm, x) / (linalg::norm(&nrm) * r));
        }
        if !(min_r > horizon) {
            return Err(Error::HorizonViolation { min_rho: min_r, horizon });
        }
        let orientation = if cosines.iter().sum::<f64>() >= 0.0 { 1.0 } else { -1.0 };
        let worst = cosines.iter().map(|c| orientation * c).fold(f64::INFINITY, f64::min);
        if !(worst > STAR_SHAPE_FLOOR) {
            return Err(Error::StarShapeLost { transversality: worst });
        }

        let mut s = SurfaceGeometry {
            ambient,
            grid: grid.clone(),
            graph: None,
            orientation,
            metric: Vec::with_capacity(n),
            inverse_metric: Vec::with_capacity(n),
            area_element: Vec::with_capacity(n),
            normal: Vec::with_capacity(n),
            conormal: Vec::with_capacity(n),
            second_form: Vec::with_capacity(n),
            mean: Vec::with_capacity(n),
            second_form_norm2: Vec::with_capacity(n),
            principal: Vec::with_capacity(n),
            ric_normal: Vec::with_capacity(n),
            ric_mixed: Vec::with_capacity(n),
            gauss: Vec::with_capacity(n),
            potential: Vec::with_capacity(n),
            normal_potential: Vec::with_capacity(n),
            christoffel: Vec::with_capacity(n),
            frame: Vec::with_capacity(n),
            jet,
        };
        for k in 0..n {
            s.push_node(k)?;
        }
        Ok(s)
    }

    fn push_node(&mut self, k: usize) -> Result<()> {
        let amb = &self.ambient;
        let j = &self.jet;
        let x = j.x[k];
        let r = linalg::norm(&x);
        let gm = amb.cartesian_metric(&x);
        let gi = amb.cartesian_inverse_metric(&x);
        let c1 = amb.cartesian_christoffel_first(&x);
        let ric = amb.cartesian_ricci(&x);
        let (xt, xp) = (j.t[k], j.p[k]);
        let gxt = linalg::mat_vec(&gm, &xt);
        let gxp = linalg::mat_vec(&gm, &xp);
        let metric = [linalg::dot(&xt, &gxt), linalg::dot(&xt, &gxp), linalg::dot(&xp, &gxp)];
        let det = linalg::sym2_det(&metric);
        if !(det > 0.0) || !(metric[0] > 0.0) {
            return Err(Error::InvalidParameter(format!("degenerate embedding at node {k}")));
        }
        let inv = linalg::sym2_inverse(&metric);
        let nrm = linalg::scale(&linalg::cross(&xt, &xp), self.orientation);
        let conormal = linalg::scale(&nrm, 1.0 / linalg::bilinear(&gi, &nrm, &nrm).sqrt());
        let normal = linalg::mat_vec(&gi, &conormal);
        let gamma = |a: &Vec3, b: &Vec3| -> Vec3 { std::array::from_fn(|c| linalg::bilinear(&c1[c], a, b)) };
        let second_derivs = [(&xt, &xt, &j.tt[k]), (&xt, &xp, &j.tp[k]), (&xp, &xp, &j.pp[k])];
        let mut h = [0.0; 3];
        let mut first_kind = [[0.0; 3]; 2];
        for (idx, (a, b, xab)) in second_derivs.iter().enumerate() {
            let g_ab = gamma(a, b);
            h[idx] = -(linalg::dot(&conormal, xab) + linalg::dot(&normal, &g_ab));
            let acc = linalg::add(&linalg::mat_vec(&gm, xab), &g_ab);
            first_kind[0][idx] = linalg::dot(&xt, &acc);
            first_kind[1][idx] = linalg::dot(&xp, &acc);
        }
        let mut chris = [[0.0; 3]; 2];
        for ab in 0..3 {
            chris[0][ab] = inv[0] * first_kind[0][ab] + inv[1] * first_kind[1][ab];
            chris[1][ab] = inv[1] * first_kind[0][ab] + inv[2] * first_kind[1][ab];
        }
        let mean = linalg::sym2_contract(&inv, &h);
        // Shape operator S = g⁻¹ h.
        let sh = [
            [inv[0] * h[0] + inv[1] * h[1], inv[0] * h[1] + inv[1] * h[2]],
            [inv[1] * h[0] + inv[2] * h[1], inv[1] * h[1] + inv[2] * h[2]],
        ];
        let norm2 = sh[0][0] * sh[0][0] + 2.0 * sh[0][1] * sh[1][0] + sh[1][1] * sh[1][1];
        let kdet = linalg::sym2_det(&h) / det;
        let disc = (0.25 * mean * mean - kdet).max(0.0).sqrt();
        let ric_nn = linalg::bilinear(&ric, &normal, &normal);
        let ric_nu = linalg::mat_vec(&ric, &normal);
        let gauss = -ric_nn + 0.5 * (mean * mean - norm2);
        let potential = amb.potential_unchecked(r);
        let normal_potential = amb.potential_slope(r) * linalg::dot(&x, &normal) / r;

        self.metric.push(metric);
        self.inverse_metric.push(inv);
        self.area_element.push(det.sqrt());
        self.normal.push(normal);
        self.conormal.push(conormal);
        self.second_form.push(h);
        self.mean.push(mean);
        self.second_form_norm2.push(norm2);
        self.principal.push([0.5 * mean - disc, 0.5 * mean + disc]);
        self.ric_normal.push(ric_nn);
        self.ric_mixed.push([linalg::dot(&xt, &ric_nu), linalg::dot(&xp, &ric_nu)]);
        self.gauss.push(gauss);
        self.potential.push(potential);
        self.normal_potential.push(normal_potential);
        self.christoffel.push(chris);
        self.frame.push(Frame::new(&metric));
        Ok(())
    }

    pub fn ambient(&self) -> &AmbientGeometry {
        &self.ambient
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn jet(&self) -> &Jet {
        &self.jet
    }

    /// Nodal positions in the Cartesian chart.
    pub fn positions(&self) -> &[Vec3] {
        &self.jet.x
    }

    /// The radius function when the surface was built as a graph.
    pub fn graph(&self) -> Option<&ScalarField> {
        self.graph.as_ref()
    }

    pub fn node_count(&self) -> usize {
        self.grid.node_count()
    }

    pub fn same_grid(&self, other: &SurfaceGeometry) -> bool {
        same_grid(&self.grid, &other.grid)
    }

    fn field(&self, v: Vec<f64>) -> ScalarField {
        ScalarField::from_vec(self.grid.clone(), v)
    }

    /// Induced metric `g_ab` in parameter coordinates.
    pub fn metric(&self) -> SymTensorField {
        SymTensorField::from_vec(self.grid.clone(), self.metric.clone())
    }

    pub fn metric_at(&self, k: usize) -> &Sym2 {
        &self.metric[k]
    }

    pub fn inverse_metric_at(&self, k: usize) -> &Sym2 {
        &self.inverse_metric[k]
    }

    /// Second fundamental form with respect to the outward normal.
    pub fn second_form(&self) -> SymTensorField {
        SymTensorField::from_vec(self.grid.clone(), self.second_form.clone())
    }

    pub fn second_form_at(&self, k: usize) -> &Sym2 {
        &self.second_form[k]
    }

    /// Outward unit normal as an ambient vector.
    pub fn normal(&self) -> &[Vec3] {
        &self.normal
    }

    /// The normal with its index lowered by the ambient metric.
    pub fn conormal(&self) -> &[Vec3] {
        &self.conormal
    }

    pub fn mean_curvature(&self) -> ScalarField {
        self.field(self.mean.clone())
    }

    /// `|h|² = h_ab h^ab`.
    pub fn second_form_norm2(&self) -> ScalarField {
        self.field(self.second_form_norm2.clone())
    }

    /// `Ric(ν, ν)`.
    pub fn ricci_normal(&self) -> ScalarField {
        self.field(self.ric_normal.clone())
    }

    /// `Ric(∂_a, ν)` in parameter coordinates.
    pub fn ricci_mixed_at(&self, k: usize) -> [f64; 2] {
        self.ric_mixed[k]
    }

    /// Gauss curvature from the Gauss equation.
    pub fn gauss_curvature_extrinsic(&self) -> ScalarField {
        self.field(self.gauss.clone())
    }

    /// `V`, the static potential restricted to the surface.
    pub fn potential(&self) -> ScalarField {
        self.field(self.potential.clone())
    }

    /// `ν(V̄)`.
    pub fn normal_derivative_potential(&self) -> ScalarField {
        self.field(self.normal_potential.clone())
    }

    /// `√det g` in parameter coordinates.
    pub fn area_element(&self) -> &[f64] {
        &self.area_element
    }

    /// `Γ^c_ab`, indexed `[c][ab]` with `ab ∈ {θθ, θφ, φφ}`.
    pub fn christoffel_at(&self, k: usize) -> &[Sym2; 2] {
        &self.christoffel[k]
    }

    pub fn frame_at(&self, k: usize) -> &Frame {
        &self.frame[k]
    }

    /// Sign making `θ × φ` derivatives point outward.
    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    /// Principal curvatures, ascending.
    pub fn principal_curvatures_at(&self, k: usize) -> [f64; 2] {
        self.principal[k]
    }

    pub fn min_principal_curvature(&self) -> f64 {
        self.principal.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min)
    }

    /// Strict positivity of `h` against `g` at every node.
    pub fn is_convex(&self) -> bool {
        self.min_principal_curvature() > 0.0
    }

    pub fn min_mean_curvature(&self) -> f64 {
        self.mean.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn is_mean_convex(&self) -> bool {
        self.min_mean_curvature() > 0.0
    }

    /// Quadrature measure at node `k`: `∫ f dσ ≈ Σ f_k μ_k`.
    #[inline]
    pub fn measure_at(&self, k: usize) -> f64 {
        self.grid.weight(k) * self.area_element[k] / self.grid.sin_theta(k)
    }

    pub fn integrate(&self, f: &ScalarField) -> Result<f64> {
        if !same_grid(f.grid(), &self.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(self.integrate_values(f.values()))
    }

    pub(crate) fn integrate_values(&self, f: &[f64]) -> f64 {
        f.iter().enumerate().map(|(k, v)| v * self.measure_at(k)).sum()
    }

    pub fn area(&self) -> f64 {
        (0..self.node_count()).map(|k| self.measure_at(k)).sum()
    }

    /// Smallest radius over the nodes.
    pub fn min_radius(&self) -> f64 {
        self.jet.x.iter().map(linalg::norm).fold(f64::INFINITY, f64::min)
    }

    /// Minimum cosine between the Euclidean normal and the radial direction.
    pub fn radial_transversality(&self) -> f64 {
        (0..self.node_count())
            .map(|k| {
                let nrm = linalg::cross(&self.jet.t[k], &self.jet.p[k]);
                self.orientation * linalg::dot(&nrm, &self.jet.x[k]) / (linalg::norm(&nrm) * linalg::norm(&self.jet.x[k]))
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Radius of the surface along each grid direction, found by a Newton
    /// solve for the parameter point whose image is radial to that direction.
    pub fn graph_radius(&self) -> Result<ScalarField> {
        if let Some(g) = &self.graph {
            return Ok(g.clone());
        }
        let grid = &self.grid;
        let coeffs: [Vec<f64>; 3] = std::array::from_fn(|c| {
            let v: Vec<f64> = self.jet.x.iter().map(|x| x[c]).collect();
            grid.analyze(&v)
        });
        let eval = |t: f64, p: f64| -> (Vec3, Vec3, Vec3) {
            let tab = crate::sphere::harmonics::legendre_table(grid.bandlimit(), t);
            let mut x = [0.0; 3];
            let mut xt = [0.0; 3];
            let mut xp = [0.0; 3];
            for l in 0..=grid.bandlimit() {
                for m in -(l as i64)..=(l as i64) {
                    let lam = tab[crate::sphere::harmonics::packed_index(l, m.unsigned_abs() as usize)];
                    let tr = crate::sphere::harmonics::longitude_factor(m, p);
                    let idx = crate::sphere::harmonics::sh_index(l, m);
                    for c in 0..3 {
                        let cf = coeffs[c][idx];
                        x[c] += cf * lam[0] * tr[0];
                        xt[c] += cf * lam[1] * tr[0];
                        xp[c] += cf * lam[0] * tr[1];
                    }
                }
            }
            (x, xt, xp)
        };
        let mut out = Vec::with_capacity(grid.node_count());
        for k in 0..grid.node_count() {
            let w = grid.unit_vector(k);
            let (mut t, mut p) = (grid.theta(k), grid.phi(k));
            let mut rho = linalg::norm(&self.jet.x[k]);
            let mut converged = false;
            for _ in 0..50 {
                let (x, xt, xp) = eval(t, p);
                let res = linalg::sub(&x, &linalg::scale(&w, rho));
                // Solve [xt xp -w] d = -res.
                let cols = [xt, xp, linalg::scale(&w, -1.0)];
                let m = [
                    [cols[0][0], cols[1][0], cols[2][0]],
                    [cols[0][1], cols[1][1], cols[2][1]],
                    [cols[0][2], cols[1][2], cols[2][2]],
                ];
                let det = linalg::determinant(&m);
                if det.abs() < 1e-300 {
                    break;
                }
                let rhs = linalg::scale(&res, -1.0);
                let solve_col = |c: usize| {
                    let mut mc = m;
                    for row in 0..3 {
                        mc[row][c] = rhs[row];
                    }
                    linalg::determinant(&mc) / det
                };
                let (dt, dp, dr) = (solve_col(0), solve_col(1), solve_col(2));
                t += dt;
                p += dp;
                rho += dr;
                if linalg::norm(&res) < 1e-14 * rho {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::StarShapeLost {
                    transversality: self.radial_transversality(),
                });
            }
            out.push(rho);
        }
        Ok(self.field(out))
    }

    /// Largest entry of `g - target` in the unit-sphere frame
    /// `(θθ, θφ/sinθ, φφ/sin²θ)`.
    pub fn metric_drift(&self, target: &SymTensorField) -> Result<f64> {
        let diff = self.metric().sub(target)?;
        Ok(diff.sup_norm())
    }
}

#[cfg(test)]
mod tests;
