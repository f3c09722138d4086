//! Fixed-size vector helpers shared by the pointwise geometry kernels.

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// `a + s b`
#[inline]
pub fn axpy(a: &Vec3, s: f64, b: &Vec3) -> Vec3 {
    [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]]
}

#[inline]
pub fn mat_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    [dot(&m[0], v), dot(&m[1], v), dot(&m[2], v)]
}

/// `aᵀ M b`
#[inline]
pub fn bilinear(m: &Mat3, a: &Vec3, b: &Vec3) -> f64 {
    dot(a, &mat_vec(m, b))
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn transpose(a: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i];
        }
    }
    out
}

pub fn determinant(a: &Mat3) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// Symmetric 2x2 tensor stored as `[t11, t12, t22]`.
pub type Sym2 = [f64; 3];

#[inline]
pub fn sym2_det(t: &Sym2) -> f64 {
    t[0] * t[2] - t[1] * t[1]
}

#[inline]
pub fn sym2_inverse(t: &Sym2) -> Sym2 {
    let d = sym2_det(t);
    [t[2] / d, -t[1] / d, t[0] / d]
}

/// Full contraction `A^{ab} B_{ab}` of two symmetric 2-tensors.
#[inline]
pub fn sym2_contract(upper: &Sym2, lower: &Sym2) -> f64 {
    upper[0] * lower[0] + 2.0 * upper[1] * lower[1] + upper[2] * lower[2]
}

/// Frobenius norm squared of a tensor given in an orthonormal frame.
#[inline]
pub fn sym2_frame_norm2(t: &Sym2) -> f64 {
    t[0] * t[0] + 2.0 * t[1] * t[1] + t[2] * t[2]
}
