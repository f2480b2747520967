//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::TAU;

use nalgebra::Matrix2;
use planar_switching::matrix::{Complex, Mat2, MatrixSet, ONE};
use rand::Rng;

pub fn to_na(a: &Mat2) -> Matrix2<Complex> {
    Matrix2::new(a.m00(), a.m01(), a.m10(), a.m11())
}

/// Largest singular value from nalgebra's SVD.
pub fn svd_norm(a: &Mat2) -> f64 {
    let s = to_na(a).singular_values();
    s[0].max(s[1])
}

pub fn complex(rng: &mut impl Rng, scale: f64) -> Complex {
    Complex::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale))
}

pub fn phase(rng: &mut impl Rng) -> Complex {
    Complex::from_polar(1.0, rng.random_range(0.0..TAU))
}

pub fn random_matrix(rng: &mut impl Rng, scale: f64) -> Mat2 {
    Mat2::new(
        complex(rng, scale),
        complex(rng, scale),
        complex(rng, scale),
        complex(rng, scale),
    )
}

/// Haar-like unitary `e^{iδ}[[a, −b̄], [b, ā]]`.
pub fn random_unitary(rng: &mut impl Rng) -> Mat2 {
    let t = rng.random_range(0.0f64..1.0).sqrt().asin();
    let a = Complex::from_polar(t.cos(), rng.random_range(0.0..TAU));
    let b = Complex::from_polar(t.sin(), rng.random_range(0.0..TAU));
    Mat2::new(a, -b.conj(), b, a.conj()).scale(phase(rng))
}

/// Invertible matrix with condition number at most `max_cond`.
pub fn random_conditioned(rng: &mut impl Rng, max_cond: f64) -> Mat2 {
    loop {
        let s = random_matrix(rng, 1.0);
        if let Some(inv) = s.inverse() {
            if svd_norm(&s) * svd_norm(&inv) <= max_cond {
                return s;
            }
        }
    }
}

pub fn conjugate(s: &Mat2, a: &Mat2) -> Mat2 {
    *s * *a * s.inverse().unwrap()
}

pub fn set(ms: Vec<Mat2>) -> MatrixSet {
    MatrixSet::with_default_tol(ms).unwrap()
}

/// Left product `A_{w_n}⋯A_{w_1}` for a time-ordered word.
pub fn word_product(members: &[Mat2], word: &[usize]) -> Mat2 {
    word.iter().fold(Mat2::identity(), |p, &i| members[i] * p)
}

/// Brute-force `b_n` for `n = 1..=depth` by iterating over all words.
pub fn brute_force_rates(members: &[Mat2], depth: usize) -> Vec<f64> {
    let mut layer = vec![Mat2::identity()];
    let mut out = Vec::with_capacity(depth);
    for _ in 0..depth {
        layer = layer
            .iter()
            .flat_map(|p| members.iter().map(move |a| *a * *p))
            .collect();
        out.push(layer.iter().map(svd_norm).fold(0.0, f64::max));
    }
    out
}

/// Distance from `x` to the nearest fraction with denominator at most
/// `q_max`, scanning the continued-fraction convergents of `x`.
pub fn rational_distance(x: f64, q_max: u64) -> f64 {
    let (mut p0, mut q0, mut p1, mut q1) = (0f64, 1f64, 1f64, 0f64);
    let mut y = x;
    let mut best = f64::INFINITY;
    for _ in 0..64 {
        let a = y.floor();
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > q_max as f64 {
            break;
        }
        best = best.min((x - p2 / q2).abs());
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = y - a;
        if frac < 1e-15 {
            break;
        }
        y = 1.0 / frac;
    }
    best
}

/// Angle in `(0, 2π)` whose ratio to `2π` stays at least `1e-6` away from
/// every fraction with denominator at most 1000.
pub fn irrational_angle(rng: &mut impl Rng) -> f64 {
    loop {
        let x: f64 = rng.random_range(0.0..1.0);
        if rational_distance(x, 1000) >= 1e-6 {
            return TAU * x;
        }
    }
}

pub fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Angle `2πp/q` with `gcd(p, q) = 1`.
pub fn root_angle(rng: &mut impl Rng, q: u32) -> f64 {
    loop {
        let p = rng.random_range(1..q);
        if gcd(p, q) == 1 {
            return TAU * p as f64 / q as f64;
        }
    }
}

/// `c·U·[[e^{iθ}, b], [0, 1]]·U*` with unit-modulus `c`.
pub fn rotated_pair_member(u: &Mat2, c: Complex, theta: f64, b: Complex) -> Mat2 {
    Mat2::upper(Complex::from_polar(1.0, theta), b, ONE)
        .scale(c)
        .unitary_conjugate(&u.adjoint())
}
