//! Real orthonormal spherical harmonics.
//!
//! `Y_lm(θ, φ) = λ_l|m|(θ) T_m(φ)` with `T_0 = 1`, `T_m = √2 cos mφ` and
//! `T_-m = √2 sin mφ`. The associated Legendre factors `λ_lm` carry the full
//! normalisation (no Condon-Shortley phase), so `∫ Y_lm Y_l'm' dS = δδ`.
//!
//! Coefficient vectors are ordered by `l² + l + m`.

use std::f64::consts::PI;

/// Position of `(l, m)` in a coefficient vector.
#[inline]
pub fn sh_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

/// Inverse of [`sh_index`].
pub fn sh_degree_order(idx: usize) -> (usize, i64) {
    let l = (idx as f64).sqrt() as usize;
    let l = if (l + 1) * (l + 1) <= idx {
        l + 1
    } else if l * l > idx {
        l - 1
    } else {
        l
    };
    (l, idx as i64 - (l * l + l) as i64)
}

/// Number of coefficients up to degree `lmax`.
#[inline]
pub fn sh_count(lmax: usize) -> usize {
    (lmax + 1) * (lmax + 1)
}

/// Position of `(l, m ≥ 0)` in a packed Legendre table.
#[inline]
pub fn packed_index(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

#[inline]
pub fn packed_count(lmax: usize) -> usize {
    (lmax + 1) * (lmax + 2) / 2
}

/// Normalised `λ_lm(θ)` and its first three θ-derivatives for all
/// `0 ≤ m ≤ l ≤ lmax`, packed by [`packed_index`]. Requires `sin θ ≠ 0`
/// for the derivatives.
pub fn legendre_table(lmax: usize, theta: f64) -> Vec<[f64; 4]> {
    let (s, c) = theta.sin_cos();
    let mut lam = vec![0.0; packed_count(lmax)];
    lam[0] = 1.0 / (4.0 * PI).sqrt();
    for m in 1..=lmax {
        let mf = m as f64;
        lam[packed_index(m, m)] = lam[packed_index(m - 1, m - 1)] * ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s;
    }
    for m in 0..lmax {
        let mf = m as f64;
        lam[packed_index(m + 1, m)] = (2.0 * mf + 3.0).sqrt() * c * lam[packed_index(m, m)];
        for l in (m + 2)..=lmax {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let l1 = lf - 1.0;
            let b = ((l1 * l1 - mf * mf) / (4.0 * l1 * l1 - 1.0)).sqrt();
            lam[packed_index(l, m)] = a * (c * lam[packed_index(l - 1, m)] - b * lam[packed_index(l - 2, m)]);
        }
    }
    let cot = c / s;
    let csc2 = 1.0 / (s * s);
    let mut out = vec![[0.0; 4]; lam.len()];
    for l in 0..=lmax {
        let lf = l as f64;
        let ll = lf * (lf + 1.0);
        for m in 0..=l {
            let mf = m as f64;
            let v = lam[packed_index(l, m)];
            let prev = if m < l { lam[packed_index(l - 1, m)] } else { 0.0 };
            let coef = if l > 0 {
                ((2.0 * lf + 1.0) * (lf * lf - mf * mf) / (2.0 * lf - 1.0)).sqrt()
            } else {
                0.0
            };
            let d1 = (lf * c * v - coef * prev) / s;
            let q = ll - mf * mf * csc2;
            let d2 = -cot * d1 - q * v;
            let d3 = csc2 * d1 - cot * d2 - 2.0 * mf * mf * c * csc2 / s * v - q * d1;
            out[packed_index(l, m)] = [v, d1, d2, d3];
        }
    }
    out
}

/// `T_m(φ)` and its first two derivatives.
#[inline]
pub fn longitude_factor(m: i64, phi: f64) -> [f64; 3] {
    if m == 0 {
        return [1.0, 0.0, 0.0];
    }
    let k = m.unsigned_abs() as f64;
    let (s, c) = (k * phi).sin_cos();
    let r2 = std::f64::consts::SQRT_2;
    if m > 0 {
        [r2 * c, -k * r2 * s, -k * k * r2 * c]
    } else {
        [r2 * s, k * r2 * c, -k * k * r2 * s]
    }
}

/// Pointwise evaluation of one harmonic; valid at the poles too.
pub fn real_ylm(l: usize, m: i64, theta: f64, phi: f64) -> f64 {
    let k = m.unsigned_abs() as usize;
    assert!(k <= l, "order exceeds degree");
    let (s, c) = theta.sin_cos();
    let mut diag = 1.0 / (4.0 * PI).sqrt();
    for j in 1..=k {
        let jf = j as f64;
        diag *= ((2.0 * jf + 1.0) / (2.0 * jf)).sqrt() * s;
    }
    let lam = if l == k {
        diag
    } else {
        let kf = k as f64;
        let mut prev = diag;
        let mut cur = (2.0 * kf + 3.0).sqrt() * c * diag;
        for ll in (k + 2)..=l {
            let lf = ll as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - kf * kf)).sqrt();
            let l1 = lf - 1.0;
            let b = ((l1 * l1 - kf * kf) / (4.0 * l1 * l1 - 1.0)).sqrt();
            let next = a * (c * cur - b * prev);
            prev = cur;
            cur = next;
        }
        cur
    };
    lam * longitude_factor(m, phi)[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        for idx in 0..500 {
            let (l, m) = sh_degree_order(idx);
            assert!(m.unsigned_abs() as usize <= l);
            assert_eq!(sh_index(l, m), idx);
        }
    }

    #[test]
    fn low_degree_closed_forms() {
        let (t, p): (f64, f64) = (0.83, 2.1);
        let (s, c) = f64::sin_cos(t);
        let y10 = (3.0 / (4.0 * PI)).sqrt() * c;
        let y11 = (3.0 / (4.0 * PI)).sqrt() * s * p.cos();
        let y1m1 = (3.0 / (4.0 * PI)).sqrt() * s * p.sin();
        let y20 = (5.0 / (16.0 * PI)).sqrt() * (3.0 * c * c - 1.0);
        let y22 = (15.0 / (16.0 * PI)).sqrt() * s * s * (2.0 * p).cos();
        let y2m1 = (15.0 / (4.0 * PI)).sqrt() * s * c * p.sin();
        assert!((real_ylm(1, 0, t, p) - y10).abs() < 1e-15);
        assert!((real_ylm(1, 1, t, p) - y11).abs() < 1e-15);
        assert!((real_ylm(1, -1, t, p) - y1m1).abs() < 1e-15);
        assert!((real_ylm(2, 0, t, p) - y20).abs() < 1e-15);
        assert!((real_ylm(2, 2, t, p) - y22).abs() < 1e-15);
        assert!((real_ylm(2, -1, t, p) - y2m1).abs() < 1e-15);
    }

    #[test]
    fn table_matches_pointwise_and_derivatives() {
        let lmax = 12;
        let t = 0.71;
        let h = 1e-4;
        let tab = legendre_table(lmax, t);
        let tp = legendre_table(lmax, t + h);
        let tm = legendre_table(lmax, t - h);
        for l in 0..=lmax {
            for m in 0..=l {
                let k = packed_index(l, m);
                assert!((tab[k][0] - real_ylm(l, m as i64, t, 0.0) / if m > 0 { 2f64.sqrt() } else { 1.0 }).abs() < 1e-13);
                for d in 0..3 {
                    let fd = (tp[k][d] - tm[k][d]) / (2.0 * h);
                    let scale = 1.0 + (l * l) as f64;
                    assert!(
                        (fd - tab[k][d + 1]).abs() < 1e-6 * scale.powi(d as i32 + 1),
                        "l={l} m={m} d={d}"
                    );
                }
            }
        }
    }
}
