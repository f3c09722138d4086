//! Orthonormal tangent frame built from the induced metric.

use crate::linalg::Sym2;

/// `e1 = a ∂θ`, `e2 = b ∂θ + c ∂φ`, with dual coframe
/// `θ¹ = p dθ + q dφ`, `θ² = r dφ`.
///
/// The area form is `ε = √det g dθ∧dφ`, so `ε(e1, e2) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl Frame {
    pub fn new(g: &Sym2) -> Self {
        let sq = g[0].sqrt();
        let sdet = (g[0] * g[2] - g[1] * g[1]).sqrt();
        Frame {
            a: 1.0 / sq,
            b: -g[1] / (sq * sdet),
            c: sq / sdet,
            p: sq,
            q: g[1] / sq,
            r: sdet / sq,
        }
    }

    /// Coordinate components `T_ab` to frame components `T_ij`.
    #[inline]
    pub fn tensor_to_frame(&self, t: &Sym2) -> Sym2 {
        let (a, b, c) = (self.a, self.b, self.c);
        [
            a * a * t[0],
            a * (b * t[0] + c * t[1]),
            b * b * t[0] + 2.0 * b * c * t[1] + c * c * t[2],
        ]
    }

    #[inline]
    pub fn tensor_from_frame(&self, t: &Sym2) -> Sym2 {
        let (p, q, r) = (self.p, self.q, self.r);
        [
            p * p * t[0],
            p * (q * t[0] + r * t[1]),
            q * q * t[0] + 2.0 * q * r * t[1] + r * r * t[2],
        ]
    }

    /// Covector `ω_a` to frame components `ω(e_i)`.
    #[inline]
    pub fn covector_to_frame(&self, w: &[f64; 2]) -> [f64; 2] {
        [self.a * w[0], self.b * w[0] + self.c * w[1]]
    }

    #[inline]
    pub fn covector_from_frame(&self, w: &[f64; 2]) -> [f64; 2] {
        [self.p * w[0], self.q * w[0] + self.r * w[1]]
    }

    /// Coordinate components `v^a` of `v1 e1 + v2 e2`.
    #[inline]
    pub fn vector_from_frame(&self, v: &[f64; 2]) -> [f64; 2] {
        [v[0] * self.a + v[1] * self.b, v[1] * self.c]
    }
}
