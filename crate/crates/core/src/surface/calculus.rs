//! Intrinsic operators, quadrature and pointwise identity residuals.
//!
//! Derivatives of derived quantities are taken spectrally from fields that
//! are smooth on the whole sphere: scalars, and ambient-frame tensors such
//! as the tangential projector and the ambient image of `h`. Coordinate
//! components are only ever formed pointwise, so the residuals measure the
//! spectral truncation of the geometry rather than pole artifacts.

use super::SurfaceGeometry;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat3, Sym2, Vec3};
use crate::sphere::{same_grid, Derivatives, ScalarField};

/// A tangent vector field given by its components in the orthonormal frame.
#[derive(Debug, Clone)]
pub struct FrameVectorField {
    pub e1: ScalarField,
    pub e2: ScalarField,
}

impl FrameVectorField {
    /// Largest pointwise length.
    pub fn sup_norm(&self) -> f64 {
        self.e1
            .values()
            .iter()
            .zip(self.e2.values())
            .fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }
}

/// Gauss curvature from the Gauss equation and from the metric alone.
#[derive(Debug, Clone)]
pub struct GaussCurvature {
    pub extrinsic: ScalarField,
    pub intrinsic: ScalarField,
}

impl GaussCurvature {
    /// `K_extrinsic - K_intrinsic`.
    pub fn residual(&self) -> ScalarField {
        self.extrinsic
            .zip_with(&self.intrinsic, |a, b| a - b)
            .expect("both curvatures live on the surface grid")
    }
}

const SYM: [[usize; 2]; 2] = [[0, 1], [1, 2]];

fn sym3_from(m: &Mat3) -> [f64; 6] {
    [m[0][0], m[0][1], m[0][2], m[1][1], m[1][2], m[2][2]]
}

fn mat3_from(v: &[f64; 6]) -> Mat3 {
    [[v[0], v[1], v[2]], [v[1], v[3], v[4]], [v[2], v[4], v[5]]]
}

/// Spectral derivatives of a symmetric 3×3 field, returned per node.
struct AmbientTensorJet {
    t: Vec<Mat3>,
    p: Vec<Mat3>,
    tt: Vec<Mat3>,
    tp: Vec<Mat3>,
    pp: Vec<Mat3>,
}

impl SurfaceGeometry {
    fn check_field(&self, f: &ScalarField) -> Result<()> {
        if same_grid(f.grid(), &self.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    fn ambient_tensor_jet(&self, values: &[Mat3], order: usize) -> AmbientTensorJet {
        let comps: Vec<Derivatives> = (0..6)
            .map(|c| {
                let v: Vec<f64> = values.iter().map(|m| sym3_from(m)[c]).collect();
                self.grid.synthesize_derivatives(&self.grid.analyze(&v), order)
            })
            .collect();
        let n = self.node_count();
        let gather = |sel: fn(&Derivatives) -> &Vec<f64>| -> Vec<Mat3> {
            if sel(&comps[0]).is_empty() {
                return Vec::new();
            }
            (0..n)
                .map(|k| mat3_from(&std::array::from_fn(|c| sel(&comps[c])[k])))
                .collect()
        };
        AmbientTensorJet {
            t: gather(|d| &d.t),
            p: gather(|d| &d.p),
            tt: gather(|d| &d.tt),
            tp: gather(|d| &d.tp),
            pp: gather(|d| &d.pp),
        }
    }

    /// `Hess f` in parameter coordinates at node `k`.
    pub(crate) fn hessian_at(&self, d: &Derivatives, k: usize) -> Sym2 {
        let chr = &self.christoffel[k];
        let (ft, fp) = (d.t[k], d.p[k]);
        [
            d.tt[k] - chr[0][0] * ft - chr[1][0] * fp,
            d.tp[k] - chr[0][1] * ft - chr[1][1] * fp,
            d.pp[k] - chr[0][2] * ft - chr[1][2] * fp,
        ]
    }

    pub(crate) fn laplacian_from(&self, d: &Derivatives) -> Vec<f64> {
        (0..self.node_count())
            .map(|k| linalg::sym2_contract(&self.inverse_metric[k], &self.hessian_at(d, k)))
            .collect()
    }

    /// Laplace-Beltrami operator of the induced metric.
    pub fn laplace_beltrami(&self, f: &ScalarField) -> Result<ScalarField> {
        self.check_field(f)?;
        Ok(self.field(self.laplacian_from(&f.derivatives(2))))
    }

    /// `∇f` as frame components.
    pub fn gradient(&self, f: &ScalarField) -> Result<FrameVectorField> {
        self.check_field(f)?;
        let d = f.derivatives(1);
        let (mut e1, mut e2) = (Vec::new(), Vec::new());
        for k in 0..self.node_count() {
            let v = self.frame[k].covector_to_frame(&[d.t[k], d.p[k]]);
            e1.push(v[0]);
            e2.push(v[1]);
        }
        Ok(FrameVectorField {
            e1: self.field(e1),
            e2: self.field(e2),
        })
    }

    /// `Hess f` in the orthonormal frame at every node.
    pub fn hessian_frame(&self, f: &ScalarField) -> Result<Vec<Sym2>> {
        self.check_field(f)?;
        let d = f.derivatives(2);
        Ok((0..self.node_count())
            .map(|k| self.frame[k].tensor_to_frame(&self.hessian_at(&d, k)))
            .collect())
    }

    /// Divergence and curl of a tangent vector field given in the
    /// Cartesian chart, `(g^ab Q_ab, ε^ab Q_ab)` with `Q_ab = g(∇_a W, ∂_b)`.
    pub fn ambient_divergence_curl(&self, w: &[Vec3]) -> Result<(ScalarField, ScalarField)> {
        if w.len() != self.node_count() {
            return Err(Error::GridMismatch);
        }
        let comps: Vec<Derivatives> = (0..3)
            .map(|c| {
                let v: Vec<f64> = w.iter().map(|x| x[c]).collect();
                self.grid.synthesize_derivatives(&self.grid.analyze(&v), 1)
            })
            .collect();
        let mut div = Vec::with_capacity(self.node_count());
        let mut curl = Vec::with_capacity(self.node_count());
        for k in 0..self.node_count() {
            let x = self.jet.x[k];
            let gm = self.ambient.cartesian_metric(&x);
            let c1 = self.ambient.cartesian_christoffel_first(&x);
            let xs = [self.jet.t[k], self.jet.p[k]];
            let dw = [
                [comps[0].t[k], comps[1].t[k], comps[2].t[k]],
                [comps[0].p[k], comps[1].p[k], comps[2].p[k]],
            ];
            let mut q = [[0.0; 2]; 2];
            for a in 0..2 {
                let gamma: Vec3 = std::array::from_fn(|c| linalg::bilinear(&c1[c], &xs[a], &w[k]));
                for b in 0..2 {
                    q[a][b] = linalg::bilinear(&gm, &xs[b], &dw[a]) + linalg::dot(&xs[b], &gamma);
                }
            }
            let inv = &self.inverse_metric[k];
            div.push(inv[0] * q[0][0] + inv[1] * (q[0][1] + q[1][0]) + inv[2] * q[1][1]);
            curl.push((q[0][1] - q[1][0]) / self.area_element[k]);
        }
        Ok((self.field(div), self.field(curl)))
    }

    /// Gauss curvature by the Gauss equation and, independently, by the
    /// Brioschi formula applied to the induced metric.
    pub fn gauss_curvature(&self) -> GaussCurvature {
        let n = self.node_count();
        let proj: Vec<Mat3> = (0..n)
            .map(|k| {
                let gm = self.ambient.cartesian_metric(&self.jet.x[k]);
                let nu = self.conormal[k];
                std::array::from_fn(|i| std::array::from_fn(|j| gm[i][j] - nu[i] * nu[j]))
            })
            .collect();
        let dj = self.ambient_tensor_jet(&proj, 2);
        let j = &self.jet;
        let mut intrinsic = Vec::with_capacity(n);
        for k in 0..n {
            let m = &proj[k];
            let b = |u: &Vec3, mm: &Mat3, v: &Vec3| linalg::bilinear(mm, u, v);
            let (xt, xp, xtt, xtp, xpp, xttp, xtpp) = (&j.t[k], &j.p[k], &j.tt[k], &j.tp[k], &j.pp[k], &j.ttp[k], &j.tpp[k]);
            let (mt, mp, mtt, mtp, mpp) = (&dj.t[k], &dj.p[k], &dj.tt[k], &dj.tp[k], &dj.pp[k]);
            let e = self.metric[k][0];
            let f = self.metric[k][1];
            let g = self.metric[k][2];
            let e_u = 2.0 * b(xtt, m, xt) + b(xt, mt, xt);
            let e_v = 2.0 * b(xtp, m, xt) + b(xt, mp, xt);
            let f_u = b(xtt, m, xp) + b(xt, m, xtp) + b(xt, mt, xp);
            let f_v = b(xtp, m, xp) + b(xt, m, xpp) + b(xt, mp, xp);
            let g_u = 2.0 * b(xtp, m, xp) + b(xp, mt, xp);
            let g_v = 2.0 * b(xpp, m, xp) + b(xp, mp, xp);
            let e_vv = 2.0 * b(xtpp, m, xt) + b(xt, mpp, xt) + 4.0 * b(xtp, mp, xt) + 2.0 * b(xtp, m, xtp);
            let g_uu = 2.0 * b(xttp, m, xp) + b(xp, mtt, xp) + 4.0 * b(xtp, mt, xp) + 2.0 * b(xtp, m, xtp);
            let f_uv = b(xttp, m, xp)
                + b(xt, mtp, xp)
                + b(xt, m, xtpp)
                + b(xtt, mp, xp)
                + b(xtp, mt, xp)
                + b(xtt, m, xpp)
                + b(xtp, m, xtp)
                + b(xt, mt, xpp)
                + b(xt, mp, xtp);
            let m1 = [
                [-0.5 * e_vv + f_uv - 0.5 * g_uu, 0.5 * e_u, f_u - 0.5 * e_v],
                [f_v - 0.5 * g_u, e, f],
                [0.5 * g_v, f, g],
            ];
            let m2 = [[0.0, 0.5 * e_v, 0.5 * g_u], [0.5 * e_v, e, f], [0.5 * g_u, f, g]];
            let det = e * g - f * f;
            intrinsic.push((linalg::determinant(&m1) - linalg::determinant(&m2)) / (det * det));
        }
        GaussCurvature {
            extrinsic: self.gauss_curvature_extrinsic(),
            intrinsic: self.field(intrinsic),
        }
    }

    /// `∇^a h_ab - ∇_b H - Ric(∂_b, ν)` in the orthonormal frame.
    pub fn codazzi_residual(&self) -> FrameVectorField {
        let n = self.node_count();
        let j = &self.jet;
        // Ambient image of h: Σ h^cd (G X_c) ⊗ (G X_d).
        let lifted: Vec<Mat3> = (0..n)
            .map(|k| {
                let gm = self.ambient.cartesian_metric(&j.x[k]);
                let y = [linalg::mat_vec(&gm, &j.t[k]), linalg::mat_vec(&gm, &j.p[k])];
                let inv = &self.inverse_metric[k];
                let h = &self.second_form[k];
                // h^cd = g^ca h_ab g^bd
                let hu = raise(inv, h);
                std::array::from_fn(|r| {
                    std::array::from_fn(|s| {
                        let mut acc = 0.0;
                        for c in 0..2 {
                            for d in 0..2 {
                                acc += hu[SYM[c][d]] * y[c][r] * y[d][s];
                            }
                        }
                        acc
                    })
                })
            })
            .collect();
        let dh = self.ambient_tensor_jet(&lifted, 1);
        let dmean = self.mean_curvature().derivatives(1);
        let (mut e1, mut e2) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for k in 0..n {
            let x1 = [j.t[k], j.p[k]];
            let x2 = [j.tt[k], j.tp[k], j.pp[k]];
            let hm = &lifted[k];
            let dhm = [dh.t[k], dh.p[k]];
            let h = &self.second_form[k];
            let chr = &self.christoffel[k];
            let inv = &self.inverse_metric[k];
            // ∂_c h_ab
            let dh_ab = |c: usize, a: usize, b: usize| -> f64 {
                linalg::bilinear(hm, &x2[SYM[a][c]], &x1[b])
                    + linalg::bilinear(hm, &x1[a], &x2[SYM[b][c]])
                    + linalg::bilinear(&dhm[c], &x1[a], &x1[b])
            };
            let cov = |c: usize, a: usize, b: usize| -> f64 {
                let mut v = dh_ab(c, a, b);
                for d in 0..2 {
                    v -= chr[d][SYM[c][a]] * h[SYM[d][b]] + chr[d][SYM[c][b]] * h[SYM[a][d]];
                }
                v
            };
            let grad_h = [dmean.t[k], dmean.p[k]];
            let mut res = [0.0; 2];
            for b in 0..2 {
                let mut div = 0.0;
                for a in 0..2 {
                    for c in 0..2 {
                        div += inv[SYM[a][c]] * cov(c, a, b);
                    }
                }
                res[b] = div - grad_h[b] - self.ric_mixed[k][b];
            }
            let f = self.frame[k].covector_to_frame(&res);
            e1.push(f[0]);
            e2.push(f[1]);
        }
        FrameVectorField {
            e1: self.field(e1),
            e2: self.field(e2),
        }
    }

    /// `ΔV + Ric(ν,ν) V + H ν(V̄)`.
    pub fn potential_laplace_residual(&self) -> ScalarField {
        let lap = self.laplacian_from(&self.potential().derivatives(2));
        self.field(
            (0..self.node_count())
                .map(|k| lap[k] + self.ric_normal[k] * self.potential[k] + self.mean[k] * self.normal_potential[k])
                .collect(),
        )
    }

    /// `∇_a ν(V̄) - Ric(∂_a, ν) V - h_ab ∇^b V` in the orthonormal frame.
    pub fn potential_gradient_residual(&self) -> FrameVectorField {
        let dn = self.normal_derivative_potential().derivatives(1);
        let dv = self.potential().derivatives(1);
        let n = self.node_count();
        let (mut e1, mut e2) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for k in 0..n {
            let inv = &self.inverse_metric[k];
            let h = &self.second_form[k];
            let up = [inv[0] * dv.t[k] + inv[1] * dv.p[k], inv[1] * dv.t[k] + inv[2] * dv.p[k]];
            let dnu = [dn.t[k], dn.p[k]];
            let res: [f64; 2] = std::array::from_fn(|a| {
                dnu[a] - self.ric_mixed[k][a] * self.potential[k] - (h[SYM[a][0]] * up[0] + h[SYM[a][1]] * up[1])
            });
            let f = self.frame[k].covector_to_frame(&res);
            e1.push(f[0]);
            e2.push(f[1]);
        }
        FrameVectorField {
            e1: self.field(e1),
            e2: self.field(e2),
        }
    }
}

/// `T^ab = g^ac T_cd g^db` for symmetric `T`.
pub(crate) fn raise(inv: &Sym2, t: &Sym2) -> Sym2 {
    let m = |a: usize, b: usize| -> f64 {
        let mut acc = 0.0;
        for c in 0..2 {
            for d in 0..2 {
                acc += inv[SYM[a][c]] * t[SYM[c][d]] * inv[SYM[d][b]];
            }
        }
        acc
    };
    [m(0, 0), m(0, 1), m(1, 1)]
}
