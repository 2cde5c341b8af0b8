//! Small fixed-size vector helpers.

use crate::C64;
#[allow(unused_imports)]
use num_traits::Float;

pub type Vec3 = [f64; 3];
pub type CVec3 = [C64; 3];

pub const CZERO3: CVec3 = [C64 { re: 0.0, im: 0.0 }; 3];

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Real vector crossed into a complex one: `a × v`.
#[inline]
pub fn rcross(a: Vec3, v: CVec3) -> CVec3 {
    [
        v[2] * a[1] - v[1] * a[2],
        v[0] * a[2] - v[2] * a[0],
        v[1] * a[0] - v[0] * a[1],
    ]
}

/// Bilinear `Σ aᵢ bᵢ` (no conjugation).
#[inline]
pub fn cdot(a: CVec3, b: CVec3) -> C64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Hermitian `Σ aᵢ b*ᵢ`.
#[inline]
pub fn hdot(a: CVec3, b: CVec3) -> C64 {
    a[0] * b[0].conj() + a[1] * b[1].conj() + a[2] * b[2].conj()
}

#[inline]
pub fn cnorm_sqr(a: CVec3) -> f64 {
    a[0].norm_sqr() + a[1].norm_sqr() + a[2].norm_sqr()
}

#[inline]
pub fn cscale(a: CVec3, s: C64) -> CVec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn cadd(a: CVec3, b: CVec3) -> CVec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn csub(a: CVec3, b: CVec3) -> CVec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn cconj(a: CVec3) -> CVec3 {
    [a[0].conj(), a[1].conj(), a[2].conj()]
}

#[inline]
pub fn real(a: Vec3) -> CVec3 {
    [C64::new(a[0], 0.0), C64::new(a[1], 0.0), C64::new(a[2], 0.0)]
}
