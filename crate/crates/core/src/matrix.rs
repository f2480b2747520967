//! Closed-form linear algebra on 2×2 complex matrices.
//!
//! Everything here works with explicit formulas rather than iterative
//! decompositions: operator norms come from the eigenvalues of `A*A`,
//! eigenvalues from the quadratic formula and eigenvectors from the adjugate
//! of `A - λI`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Complex = Complex64;

pub const ZERO: Complex = Complex::new(0.0, 0.0);
pub const ONE: Complex = Complex::new(1.0, 0.0);

/// Relative tolerance used for every structural decision (triangularity,
/// eigenvector membership, determinant modulus, equal eigenvalues).
///
/// The absolute threshold for a matrix `A` is `rel * max(1, ‖A‖)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rel: f64,
}

impl Tolerance {
    pub const DEFAULT_REL: f64 = 1e-9;

    pub fn new(rel: f64) -> Result<Self> {
        if !(rel.is_finite() && rel > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive and finite, got {rel}"
            )));
        }
        Ok(Self { rel })
    }

    /// Absolute threshold for an object of magnitude `scale`.
    pub fn scaled(&self, scale: f64) -> f64 {
        self.rel * scale.max(1.0)
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rel: Self::DEFAULT_REL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x0: Complex,
    pub x1: Complex,
}

impl Vec2 {
    pub const fn new(x0: Complex, x1: Complex) -> Self {
        Self { x0, x1 }
    }

    pub fn real(x0: f64, x1: f64) -> Self {
        Self::new(Complex::new(x0, 0.0), Complex::new(x1, 0.0))
    }

    pub fn e0() -> Self {
        Self::new(ONE, ZERO)
    }

    pub fn e1() -> Self {
        Self::new(ZERO, ONE)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x0.norm_sqr() + self.x1.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.x0.norm().hypot(self.x1.norm())
    }

    pub fn scale(&self, s: Complex) -> Self {
        Self::new(self.x0 * s, self.x1 * s)
    }

    /// Hermitian inner product `⟨self, other⟩ = Σ self_i · conj(other_i)`.
    pub fn inner(&self, other: &Vec2) -> Complex {
        self.x0 * other.x0.conj() + self.x1 * other.x1.conj()
    }

    pub fn is_finite(&self) -> bool {
        self.x0.is_finite() && self.x1.is_finite()
    }

    /// Unit vector with the phase fixed so that the first coordinate of
    /// non-negligible size is real and positive. Returns `None` for the zero
    /// vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return None;
        }
        let u = self.scale(Complex::new(1.0 / n, 0.0));
        let pivot = if u.x0.norm() >= 1e-12 { u.x0 } else { u.x1 };
        let phase = pivot.conj() / pivot.norm();
        Some(u.scale(phase))
    }

    /// Unit vector orthogonal to `self` (assumed unit) completing a
    /// determinant-one unitary basis.
    pub fn orthogonal_complement(&self) -> Self {
        Self::new(-self.x1.conj(), self.x0.conj())
    }

    /// Distance between the lines spanned by two unit vectors,
    /// `sqrt(1 - |⟨u, v⟩|²)`.
    pub fn projective_distance(&self, other: &Vec2) -> f64 {
        (1.0 - self.inner(other).norm_sqr()).max(0.0).sqrt()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x0 + rhs.x0, self.x1 + rhs.x1)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x0 - rhs.x0, self.x1 - rhs.x1)
    }
}

/// A 2×2 complex matrix stored row-major.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub m: [[Complex; 2]; 2],
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]
        )
    }
}

impl Index<(usize, usize)> for Mat2 {
    type Output = Complex;
    fn index(&self, (r, c): (usize, usize)) -> &Complex {
        &self.m[r][c]
    }
}

impl IndexMut<(usize, usize)> for Mat2 {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex {
        &mut self.m[r][c]
    }
}

impl Mat2 {
    pub const fn new(m00: Complex, m01: Complex, m10: Complex, m11: Complex) -> Self {
        Self {
            m: [[m00, m01], [m10, m11]],
        }
    }

    pub fn real(m00: f64, m01: f64, m10: f64, m11: f64) -> Self {
        Self::new(
            Complex::new(m00, 0.0),
            Complex::new(m01, 0.0),
            Complex::new(m10, 0.0),
            Complex::new(m11, 0.0),
        )
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub fn diag(d0: Complex, d1: Complex) -> Self {
        Self::new(d0, ZERO, ZERO, d1)
    }

    pub fn upper(a: Complex, b: Complex, c: Complex) -> Self {
        Self::new(a, b, ZERO, c)
    }

    /// Real rotation by `theta` radians.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::real(c, -s, s, c)
    }

    pub fn from_columns(c0: Vec2, c1: Vec2) -> Self {
        Self::new(c0.x0, c1.x0, c0.x1, c1.x1)
    }

    pub fn column(&self, j: usize) -> Vec2 {
        Vec2::new(self.m[0][j], self.m[1][j])
    }

    pub fn m00(&self) -> Complex {
        self.m[0][0]
    }
    pub fn m01(&self) -> Complex {
        self.m[0][1]
    }
    pub fn m10(&self) -> Complex {
        self.m[1][0]
    }
    pub fn m11(&self) -> Complex {
        self.m[1][1]
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|z| z.is_finite())
    }

    pub fn scale(&self, s: Complex) -> Self {
        let mut out = *self;
        out.m.iter_mut().flatten().for_each(|z| *z *= s);
        out
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex::new(s, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        Self::new(
            self.m[0][0].conj(),
            self.m[1][0].conj(),
            self.m[0][1].conj(),
            self.m[1][1].conj(),
        )
    }

    pub fn det(&self) -> Complex {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> Complex {
        self.m[0][0] + self.m[1][1]
    }

    /// Adjugate, so that `A · adj(A) = det(A) · I`.
    pub fn adjugate(&self) -> Self {
        Self::new(self.m[1][1], -self.m[0][1], -self.m[1][0], self.m[0][0])
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == ZERO || !d.is_finite() {
            return None;
        }
        Some(self.adjugate().scale(d.inv()))
    }

    pub fn mul_vec(&self, v: &Vec2) -> Vec2 {
        Vec2::new(
            self.m[0][0] * v.x0 + self.m[0][1] * v.x1,
            self.m[1][0] * v.x0 + self.m[1][1] * v.x1,
        )
    }

    pub fn frobenius_sqr(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Entrywise modulus, as a real non-negative matrix.
    pub fn abs_entries(&self) -> Self {
        let mut out = *self;
        out.m
            .iter_mut()
            .flatten()
            .for_each(|z| *z = Complex::new(z.norm(), 0.0));
        out
    }

    /// Commutator `AB - BA`.
    pub fn commutator(&self, other: &Mat2) -> Self {
        *self * *other - *other * *self
    }

    /// `U* A U`, the matrix of `A` in the basis given by the columns of `U`
    /// when `U` is unitary.
    pub fn unitary_conjugate(&self, u: &Mat2) -> Self {
        u.adjoint() * *self * *u
    }

    /// `P⁻¹ A P` for an arbitrary invertible change of basis `P`.
    pub fn similarity(&self, p: &Mat2) -> Option<Self> {
        Some(p.inverse()? * *self * *p)
    }

    pub fn is_upper_triangular(&self, tol: &Tolerance) -> bool {
        self.m[1][0].norm() <= tol.scaled(operator_norm(self))
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let mut out = self;
        for r in 0..2 {
            for c in 0..2 {
                out.m[r][c] += rhs.m[r][c];
            }
        }
        out
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        self + (-rhs)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale_real(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.m;
        let b = &rhs.m;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Mul<Vec2> for Mat2 {
    type Output = Vec2;
    fn mul(self, rhs: Vec2) -> Vec2 {
        self.mul_vec(&rhs)
    }
}

/// Squared operator norm of the upper-triangular matrix `[[a, b], [0, c]]`:
///
/// `‖·‖² = ½(|a|²+|b|²+|c|²) + ½√((|a|²−|c|²)² + |b|²(2|a|²+|b|²+2|c|²))`.
pub fn upper_triangular_norm_sqr(a: Complex, b: Complex, c: Complex) -> f64 {
    let a2 = a.norm_sqr();
    let b2 = b.norm_sqr();
    let c2 = c.norm_sqr();
    let d = a2 - c2;
    0.5 * (a2 + b2 + c2) + 0.5 * (d * d + b2 * (2.0 * a2 + b2 + 2.0 * c2)).sqrt()
}

pub fn upper_triangular_norm(a: Complex, b: Complex, c: Complex) -> f64 {
    upper_triangular_norm_sqr(a, b, c).sqrt()
}

/// The two singular values `(σ_max, σ_min)` of `A`, from the eigenvalues of
/// the Hermitian matrix `A*A = [[p, q], [q̄, r]]`.
pub fn singular_values(a: &Mat2) -> (f64, f64) {
    let c0 = a.column(0);
    let c1 = a.column(1);
    let p = c0.norm_sqr();
    let r = c1.norm_sqr();
    let q = c1.inner(&c0);
    let half_gap = 0.5 * (p - r);
    let root = half_gap.hypot(q.norm());
    let big = 0.5 * (p + r) + root;
    if big == 0.0 {
        return (0.0, 0.0);
    }
    let det = a.det().norm();
    let smax = big.sqrt();
    (smax, det / smax)
}

/// Euclidean (spectral) operator norm.
pub fn operator_norm(a: &Mat2) -> f64 {
    singular_values(a).0
}

/// `(λ_big, λ_small)` ordered so that `|λ_big| ≥ |λ_small|`.
pub fn eigenvalues(a: &Mat2) -> (Complex, Complex) {
    let mean = 0.5 * a.trace();
    let half_diff = 0.5 * (a.m[0][0] - a.m[1][1]);
    let disc = (half_diff * half_diff + a.m[0][1] * a.m[1][0]).sqrt();
    let disc = if (mean.conj() * disc).re >= 0.0 {
        disc
    } else {
        -disc
    };
    let big = mean + disc;
    let small = if big != ZERO {
        a.det() / big
    } else {
        mean - disc
    };
    (big, small)
}

pub fn spectral_radius(a: &Mat2) -> f64 {
    let (big, small) = eigenvalues(a);
    big.norm().max(small.norm())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenData {
    pub eigenvalues: (Complex, Complex),
    /// One eigenvector per distinct eigenvalue (both basis vectors for a
    /// scalar matrix), unit norm.
    pub eigenvectors: Vec<Vec2>,
    pub diagonalizable: bool,
    pub scalar: bool,
    /// `|λ₁ − λ₂|`, kept so callers can report how close to defective the
    /// matrix is.
    pub eigenvalue_gap: f64,
}

/// Null vector of the singular matrix `b` from the larger column of its
/// adjugate; ties go to the first column.
fn null_vector(b: &Mat2) -> Option<Vec2> {
    let adj = b.adjugate();
    let c0 = adj.column(0);
    let c1 = adj.column(1);
    let pick = if c1.norm_sqr() > c0.norm_sqr() { c1 } else { c0 };
    pick.normalized()
}

pub fn eigen(a: &Mat2, tol: &Tolerance) -> EigenData {
    let norm = operator_norm(a);
    let thresh = tol.scaled(norm);
    let (l0, l1) = eigenvalues(a);
    let gap = (l0 - l1).norm();

    // A defective matrix perturbed by rounding splits its eigenvalue by
    // O(√ε·‖A‖), so equality is judged on the squared gap.
    if gap * gap <= tol.rel * norm.max(1.0).powi(2) {
        let lambda = 0.5 * (l0 + l1);
        let shifted = *a - Mat2::identity().scale(lambda);
        if shifted.max_abs_entry() <= thresh {
            return EigenData {
                eigenvalues: (l0, l1),
                eigenvectors: vec![Vec2::e0(), Vec2::e1()],
                diagonalizable: true,
                scalar: true,
                eigenvalue_gap: gap,
            };
        }
        let v = null_vector(&shifted).unwrap_or_else(Vec2::e0);
        return EigenData {
            eigenvalues: (l0, l1),
            eigenvectors: vec![v],
            diagonalizable: false,
            scalar: false,
            eigenvalue_gap: gap,
        };
    }

    let eigenvectors = [l0, l1]
        .iter()
        .map(|&l| {
            let shifted = *a - Mat2::identity().scale(l);
            null_vector(&shifted).unwrap_or_else(Vec2::e0)
        })
        .collect();
    EigenData {
        eigenvalues: (l0, l1),
        eigenvectors,
        diagonalizable: true,
        scalar: false,
        eigenvalue_gap: gap,
    }
}

/// Residual `‖A w − (w* A w) w‖` for a unit vector `w`; zero exactly when
/// `w` is an eigenvector.
pub fn eigen_residual(a: &Mat2, w: &Vec2) -> f64 {
    let aw = a.mul_vec(w);
    let rayleigh = aw.inner(w);
    (aw - w.scale(rayleigh)).norm()
}

/// Unitary `U` with `U e₀ = v / ‖v‖` and `det U = 1`.
pub fn unitary_with_first_column(v: &Vec2) -> Option<Mat2> {
    let n = v.norm();
    if n == 0.0 || !n.is_finite() {
        return None;
    }
    let u1 = v.scale(Complex::new(1.0 / n, 0.0));
    Some(Mat2::from_columns(u1, u1.orthogonal_complement()))
}

/// A finite, nonempty, ordered collection of matrices with its tolerance
/// policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSet {
    members: Vec<Mat2>,
    pub tol: Tolerance,
}

impl MatrixSet {
    pub fn new(members: Vec<Mat2>, tol: Tolerance) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptySet);
        }
        if let Some(index) = members.iter().position(|m| !m.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { members, tol })
    }

    pub fn with_default_tol(members: Vec<Mat2>) -> Result<Self> {
        Self::new(members, Tolerance::default())
    }

    pub fn members(&self) -> &[Mat2] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn get(&self, index: usize) -> Result<&Mat2> {
        self.members.get(index).ok_or(Error::IndexOutOfRange {
            index,
            len: self.members.len(),
        })
    }

    pub fn max_norm(&self) -> f64 {
        self.members.iter().map(operator_norm).fold(0.0, f64::max)
    }

    /// Same tolerance, members replaced by `f(member)`.
    pub fn map(&self, f: impl Fn(&Mat2) -> Mat2) -> Self {
        Self {
            members: self.members.iter().map(f).collect(),
            tol: self.tol,
        }
    }

    pub fn scaled(&self, c: Complex) -> Self {
        self.map(|m| m.scale(c))
    }

    pub fn conjugated_by_unitary(&self, u: &Mat2) -> Self {
        self.map(|m| m.unitary_conjugate(u))
    }
}

/// Result of rewriting a set in an orthonormal basis whose first vector is a
/// common eigenvector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triangularization {
    pub set: MatrixSet,
    /// The unitary whose columns are the new basis; `set[j] = U* A_j U`.
    pub basis: Mat2,
    /// Largest discarded lower-left modulus.
    pub max_residual: f64,
}

pub fn triangularize_in_basis(set: &MatrixSet, v1: &Vec2) -> Result<Triangularization> {
    let u = unitary_with_first_column(v1)
        .ok_or_else(|| Error::InvalidArgument("common eigenvector must be nonzero".into()))?;
    let mut members = Vec::with_capacity(set.len());
    let mut max_residual: f64 = 0.0;
    for (index, a) in set.members().iter().enumerate() {
        let mut t = a.unitary_conjugate(&u);
        let residual = t.m[1][0].norm();
        let allowed = set.tol.scaled(operator_norm(a));
        if residual > allowed {
            return Err(Error::NotCommonEigenvector {
                index,
                residual,
                allowed,
            });
        }
        max_residual = max_residual.max(residual);
        t.m[1][0] = ZERO;
        members.push(t);
    }
    Ok(Triangularization {
        set: MatrixSet {
            members,
            tol: set.tol,
        },
        basis: u,
        max_residual,
    })
}
