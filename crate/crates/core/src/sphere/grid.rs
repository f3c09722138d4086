//! Gauss-Legendre × equispaced-longitude grid and its harmonic transforms.

use std::f64::consts::PI;
use std::sync::Arc;

use super::harmonics::{longitude_factor, packed_count, packed_index, sh_count, sh_index};
use crate::error::{Error, Result};
use crate::linalg::Vec3;

/// Nodal values of a field and its angular derivatives up to the mixed
/// third-order terms that the curvature formulas need.
#[derive(Debug, Clone, Default)]
pub struct Derivatives {
    pub f: Vec<f64>,
    pub t: Vec<f64>,
    pub p: Vec<f64>,
    pub tt: Vec<f64>,
    pub tp: Vec<f64>,
    pub pp: Vec<f64>,
    pub ttp: Vec<f64>,
    pub tpp: Vec<f64>,
}

/// Tensor grid with `L + 1` Gauss-Legendre colatitudes and `2(L + 1)`
/// longitudes. Node `k = i * n_lon + j` sits at `(theta[i], phi[j])`.
#[derive(Debug)]
pub struct SphereGrid {
    bandlimit: usize,
    n_lat: usize,
    n_lon: usize,
    theta: Vec<f64>,
    sin_theta: Vec<f64>,
    cos_theta: Vec<f64>,
    gl_weights: Vec<f64>,
    phi: Vec<f64>,
    /// `[λ, λ', λ'', λ''']` per latitude, packed by degree and order.
    legendre: Vec<[f64; 4]>,
    /// `T_m(φ_j)` and derivatives, indexed `(m + L) * n_lon + j`.
    trig: Vec<[f64; 3]>,
}

impl SphereGrid {
    pub fn new(bandlimit: usize) -> Result<Arc<Self>> {
        if bandlimit < 1 {
            return Err(Error::InvalidParameter("bandlimit must be at least 1".into()));
        }
        let n_lat = bandlimit + 1;
        let n_lon = 2 * n_lat;
        let (nodes, gl_weights) = gauss_legendre(n_lat);
        let theta: Vec<f64> = nodes.iter().map(|x| x.acos()).collect();
        let sin_theta = theta.iter().map(|t| t.sin()).collect();
        let cos_theta = nodes.clone();
        let phi: Vec<f64> = (0..n_lon).map(|j| 2.0 * PI * j as f64 / n_lon as f64).collect();
        let np = packed_count(bandlimit);
        let mut legendre = Vec::with_capacity(n_lat * np);
        for &t in &theta {
            legendre.extend(super::harmonics::legendre_table(bandlimit, t));
        }
        let mut trig = Vec::with_capacity((2 * bandlimit + 1) * n_lon);
        for m in -(bandlimit as i64)..=(bandlimit as i64) {
            for &p in &phi {
                trig.push(longitude_factor(m, p));
            }
        }
        Ok(Arc::new(SphereGrid {
            bandlimit,
            n_lat,
            n_lon,
            theta,
            sin_theta,
            cos_theta,
            gl_weights,
            phi,
            legendre,
            trig,
        }))
    }

    pub fn bandlimit(&self) -> usize {
        self.bandlimit
    }

    pub fn n_lat(&self) -> usize {
        self.n_lat
    }

    pub fn n_lon(&self) -> usize {
        self.n_lon
    }

    pub fn node_count(&self) -> usize {
        self.n_lat * self.n_lon
    }

    pub fn coefficient_count(&self) -> usize {
        sh_count(self.bandlimit)
    }

    #[inline]
    pub fn lat_index(&self, node: usize) -> usize {
        node / self.n_lon
    }

    #[inline]
    pub fn lon_index(&self, node: usize) -> usize {
        node % self.n_lon
    }

    pub fn colatitudes(&self) -> &[f64] {
        &self.theta
    }

    pub fn longitudes(&self) -> &[f64] {
        &self.phi
    }

    #[inline]
    pub fn theta(&self, node: usize) -> f64 {
        self.theta[self.lat_index(node)]
    }

    #[inline]
    pub fn phi(&self, node: usize) -> f64 {
        self.phi[self.lon_index(node)]
    }

    #[inline]
    pub fn sin_theta(&self, node: usize) -> f64 {
        self.sin_theta[self.lat_index(node)]
    }

    #[inline]
    pub fn cos_theta(&self, node: usize) -> f64 {
        self.cos_theta[self.lat_index(node)]
    }

    /// Quadrature weight for the round measure `sin θ dθ dφ`.
    #[inline]
    pub fn weight(&self, node: usize) -> f64 {
        self.gl_weights[self.lat_index(node)] * 2.0 * PI / self.n_lon as f64
    }

    pub fn unit_vector(&self, node: usize) -> Vec3 {
        let i = self.lat_index(node);
        let (sp, cp) = self.phi[self.lon_index(node)].sin_cos();
        [self.sin_theta[i] * cp, self.sin_theta[i] * sp, self.cos_theta[i]]
    }

    /// `∫ f dS` over the unit sphere.
    pub fn integrate_round(&self, values: &[f64]) -> f64 {
        values.iter().enumerate().map(|(k, v)| v * self.weight(k)).sum()
    }

    #[inline]
    fn trig_at(&self, m: i64, j: usize) -> [f64; 3] {
        self.trig[(m + self.bandlimit as i64) as usize * self.n_lon + j]
    }

    #[inline]
    fn legendre_at(&self, i: usize, l: usize, m: usize) -> [f64; 4] {
        self.legendre[i * packed_count(self.bandlimit) + packed_index(l, m)]
    }

    /// `Y_lm` and its derivatives at a node, in the order of [`Derivatives`].
    pub fn basis_derivatives(&self, l: usize, m: i64, node: usize) -> [f64; 8] {
        let lam = self.legendre_at(self.lat_index(node), l, m.unsigned_abs() as usize);
        let tr = self.trig_at(m, self.lon_index(node));
        [
            lam[0] * tr[0],
            lam[1] * tr[0],
            lam[0] * tr[1],
            lam[2] * tr[0],
            lam[1] * tr[1],
            lam[0] * tr[2],
            lam[2] * tr[1],
            lam[1] * tr[2],
        ]
    }

    /// Spectral coefficients by quadrature; exact for fields of degree ≤ L.
    pub fn analyze(&self, values: &[f64]) -> Vec<f64> {
        assert_eq!(values.len(), self.node_count());
        let lmax = self.bandlimit as i64;
        let dphi = 2.0 * PI / self.n_lon as f64;
        let mut coeffs = vec![0.0; self.coefficient_count()];
        let mut fourier = vec![0.0; 2 * self.bandlimit + 1];
        for i in 0..self.n_lat {
            let row = &values[i * self.n_lon..(i + 1) * self.n_lon];
            for m in -lmax..=lmax {
                let mut acc = 0.0;
                for (j, v) in row.iter().enumerate() {
                    acc += v * self.trig_at(m, j)[0];
                }
                fourier[(m + lmax) as usize] = acc * dphi * self.gl_weights[i];
            }
            for l in 0..=self.bandlimit {
                for m in -(l as i64)..=(l as i64) {
                    let lam = self.legendre_at(i, l, m.unsigned_abs() as usize)[0];
                    coeffs[sh_index(l, m)] += fourier[(m + lmax) as usize] * lam;
                }
            }
        }
        coeffs
    }

    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        self.synthesize_derivatives(coeffs, 0).f
    }

    /// Nodal values and derivatives of a bandlimited field. `order` selects
    /// how many derivative groups are filled: 0 values only, 1 adds first
    /// derivatives, 2 adds second, 3 adds the mixed `θθφ` and `θφφ` terms.
    pub fn synthesize_derivatives(&self, coeffs: &[f64], order: usize) -> Derivatives {
        assert_eq!(coeffs.len(), self.coefficient_count());
        let n = self.node_count();
        let lmax = self.bandlimit as i64;
        let nm = 2 * self.bandlimit + 1;
        let mut out = Derivatives {
            f: vec![0.0; n],
            ..Default::default()
        };
        let alloc = |cond: bool| if cond { vec![0.0; n] } else { Vec::new() };
        out.t = alloc(order >= 1);
        out.p = alloc(order >= 1);
        out.tt = alloc(order >= 2);
        out.tp = alloc(order >= 2);
        out.pp = alloc(order >= 2);
        out.ttp = alloc(order >= 3);
        out.tpp = alloc(order >= 3);
        let n_theta_derivs = order.min(2) + 1;
        let mut a = vec![[0.0; 3]; nm];
        for i in 0..self.n_lat {
            for (mi, m) in (-lmax..=lmax).enumerate() {
                let k = m.unsigned_abs() as usize;
                let mut acc = [0.0; 3];
                for l in k..=self.bandlimit {
                    let c = coeffs[sh_index(l, m)];
                    if c == 0.0 {
                        continue;
                    }
                    let lam = self.legendre_at(i, l, k);
                    for d in 0..n_theta_derivs {
                        acc[d] += c * lam[d];
                    }
                }
                a[mi] = acc;
            }
            for j in 0..self.n_lon {
                let node = i * self.n_lon + j;
                let mut v = [0.0; 8];
                for (mi, m) in (-lmax..=lmax).enumerate() {
                    let ac = a[mi];
                    if ac == [0.0; 3] {
                        continue;
                    }
                    let tr = self.trig_at(m, j);
                    v[0] += ac[0] * tr[0];
                    if order >= 1 {
                        v[1] += ac[1] * tr[0];
                        v[2] += ac[0] * tr[1];
                    }
                    if order >= 2 {
                        v[3] += ac[2] * tr[0];
                        v[4] += ac[1] * tr[1];
                        v[5] += ac[0] * tr[2];
                    }
                    if order >= 3 {
                        v[6] += ac[2] * tr[1];
                        v[7] += ac[1] * tr[2];
                    }
                }
                out.f[node] = v[0];
                if order >= 1 {
                    out.t[node] = v[1];
                    out.p[node] = v[2];
                }
                if order >= 2 {
                    out.tt[node] = v[3];
                    out.tp[node] = v[4];
                    out.pp[node] = v[5];
                }
                if order >= 3 {
                    out.ttp[node] = v[6];
                    out.tpp[node] = v[7];
                }
            }
        }
        out
    }

    /// Evaluates a bandlimited expansion at an arbitrary direction.
    pub fn evaluate(&self, coeffs: &[f64], theta: f64, phi: f64) -> f64 {
        assert_eq!(coeffs.len(), self.coefficient_count());
        // Poles are fine for values; nudge to keep the derivative recurrences finite.
        let t = if theta.sin().abs() < 1e-300 { theta + 1e-300 } else { theta };
        let tab = super::harmonics::legendre_table(self.bandlimit, t);
        let mut acc = 0.0;
        for l in 0..=self.bandlimit {
            for m in -(l as i64)..=(l as i64) {
                let lam = tab[packed_index(l, m.unsigned_abs() as usize)][0];
                acc += coeffs[sh_index(l, m)] * lam * longitude_factor(m, phi)[0];
            }
        }
        acc
    }

    /// Drops every coefficient with degree above `lmax`.
    pub fn truncate(&self, coeffs: &mut [f64], lmax: usize) {
        for c in coeffs.iter_mut().skip(sh_count(lmax)) {
            *c = 0.0;
        }
    }
}

/// Nodes (descending in x, so ascending colatitude) and weights of the
/// `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (z * p1 - p0) / (z * z - 1.0))
}
