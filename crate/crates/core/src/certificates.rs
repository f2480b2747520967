//! Explicit uniform bounds on product norms.
//!
//! * [`kappa_certificate`] bounds products of a family without a common
//!   eigenvector by `max_j ‖A_j‖ / κ`, where
//!   `κ = min_{‖u‖=‖v‖=1} max_{X ∈ {I, A_1..A_N}} |⟨Xu, v⟩|`.
//! * [`bdd_certificate`] bounds upper-triangular families by `1 + 2M/(1−λ)`.
//! * [`linear_ceiling`] gives `1 + n·max_j ‖A_j‖` for upper-triangular
//!   families whose diagonals lie in the closed unit disc.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{operator_norm, Complex, Mat2, MatrixSet, Vec2};
use crate::structure::common_eigenvector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaCertificate {
    /// Certified lower bound for κ.
    pub kappa_lower: f64,
    /// Smallest value of the objective actually evaluated.
    pub kappa_grid: f64,
    /// Unit vectors `(u′, v′)` attaining `kappa_grid`.
    pub argmin_pair: (Vec2, Vec2),
    /// `max_j ‖A_j‖ / kappa_lower`
    pub bound: f64,
    pub grid_resolution: f64,
    pub lipschitz: f64,
    pub evaluations: u64,
}

/// `f(u, v) = max_X |⟨Xu, v⟩|` over `X ∈ {I} ∪ set`.
pub fn kappa_objective(members: &[Mat2], u: &Vec2, v: &Vec2) -> f64 {
    members
        .iter()
        .map(|x| x.mul_vec(u).inner(v).norm())
        .fold(u.inner(v).norm(), f64::max)
}

/// Point on the unit sphere of ℂ² modulo phase: `(cos a, e^{ib} sin a)`.
fn sphere_point(a: f64, b: f64) -> Vec2 {
    let (s, c) = a.sin_cos();
    Vec2::new(Complex::new(c, 0.0), Complex::from_polar(s, b))
}

/// Axis-aligned box in the parameters `(a_u, b_u, a_v, b_v)`.
#[derive(Debug, Clone, Copy)]
struct Cell {
    lo: [f64; 4],
    hi: [f64; 4],
}

impl Cell {
    fn center(&self) -> [f64; 4] {
        std::array::from_fn(|k| 0.5 * (self.lo[k] + self.hi[k]))
    }

    /// Per-coordinate contribution to the covering radius, measured as
    /// `‖u − u_c‖ + ‖v − v_c‖`. Moving `b` at fixed `a` traces a circle of
    /// radius `sin a`.
    fn contributions(&self) -> [f64; 4] {
        let half: [f64; 4] = std::array::from_fn(|k| 0.5 * (self.hi[k] - self.lo[k]));
        [
            half[0],
            self.hi[0].min(FRAC_PI_2).sin() * half[1],
            half[2],
            self.hi[2].min(FRAC_PI_2).sin() * half[3],
        ]
    }

    fn radius(&self) -> f64 {
        self.contributions().iter().sum()
    }

    fn split(&self) -> (Cell, Cell) {
        let c = self.contributions();
        let k = (0..4)
            .max_by(|&i, &j| c[i].partial_cmp(&c[j]).unwrap_or(Ordering::Equal))
            .unwrap_or(0);
        let mid = 0.5 * (self.lo[k] + self.hi[k]);
        let mut left = *self;
        let mut right = *self;
        left.hi[k] = mid;
        right.lo[k] = mid;
        (left, right)
    }
}

struct Queued {
    lower: f64,
    cell: Cell,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.lower == other.lower
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Queued {
    // min-heap on the lower bound
    fn cmp(&self, other: &Self) -> Ordering {
        other.lower.total_cmp(&self.lower)
    }
}

struct Minimizer<'a> {
    members: &'a [Mat2],
    best: f64,
    best_at: [f64; 4],
    evaluations: u64,
}

impl Minimizer<'_> {
    fn eval(&mut self, p: [f64; 4]) -> f64 {
        self.evaluations += 1;
        let u = sphere_point(p[0], p[1]);
        let v = sphere_point(p[2], p[3]);
        let f = kappa_objective(self.members, &u, &v);
        if f < self.best {
            self.best = f;
            self.best_at = p;
        }
        f
    }

    /// Compass search from the incumbent.
    fn polish(&mut self, mut step: f64) {
        let mut x = self.best_at;
        let mut fx = self.best;
        while step > 1e-10 {
            let mut improved = false;
            for k in 0..4 {
                for sign in [1.0, -1.0] {
                    let mut y = x;
                    y[k] += sign * step;
                    let fy = self.eval(y);
                    if fy < fx {
                        x = y;
                        fx = fy;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
    }
}

/// Certified lower bound on κ by Lipschitz branch-and-bound over both
/// projective spheres.
///
/// Every parameter cell is either refined until its covering radius is at
/// most `resolution`, or discarded because `f(center) − L·radius` already
/// exceeds the incumbent. Hence every point of the domain satisfies
/// `f ≥ kappa_grid − L·resolution`.
pub fn kappa_certificate(set: &MatrixSet, resolution: f64) -> Result<KappaCertificate> {
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "resolution must be positive, got {resolution}"
        )));
    }
    if common_eigenvector(set).is_some() {
        return Err(Error::CommonEigenvectorExists);
    }
    let max_norm = set.max_norm();
    // |⟨Xu, v⟩| is ‖X‖-Lipschitz in u and 1-Lipschitz in v
    let lipschitz = max_norm.max(1.0);

    let mut m = Minimizer {
        members: set.members(),
        best: f64::INFINITY,
        best_at: [0.0; 4],
        evaluations: 0,
    };
    let mut heap = BinaryHeap::new();
    let (na, nb) = (2usize, 4usize);
    for i in 0..na {
        for j in 0..nb {
            for k in 0..na {
                for l in 0..nb {
                    let cell = Cell {
                        lo: [
                            FRAC_PI_2 * i as f64 / na as f64,
                            TAU * j as f64 / nb as f64,
                            FRAC_PI_2 * k as f64 / na as f64,
                            TAU * l as f64 / nb as f64,
                        ],
                        hi: [
                            FRAC_PI_2 * (i + 1) as f64 / na as f64,
                            TAU * (j + 1) as f64 / nb as f64,
                            FRAC_PI_2 * (k + 1) as f64 / na as f64,
                            TAU * (l + 1) as f64 / nb as f64,
                        ],
                    };
                    let f = m.eval(cell.center());
                    heap.push(Queued {
                        lower: f - lipschitz * cell.radius(),
                        cell,
                    });
                }
            }
        }
    }

    while let Some(Queued { lower, cell }) = heap.pop() {
        if lower >= m.best {
            break;
        }
        if cell.radius() <= resolution {
            continue;
        }
        let (left, right) = cell.split();
        for child in [left, right] {
            let f = m.eval(child.center());
            let lb = f - lipschitz * child.radius();
            if lb < m.best {
                heap.push(Queued {
                    lower: lb,
                    cell: child,
                });
            }
        }
    }

    m.polish(resolution);

    let kappa_grid = m.best;
    let kappa_lower = (kappa_grid - lipschitz * resolution).max(0.0);
    if kappa_lower <= 0.0 {
        return Err(Error::ResolutionTooCoarse {
            resolution,
            kappa_lower,
        });
    }
    let p = m.best_at;
    Ok(KappaCertificate {
        kappa_lower,
        kappa_grid,
        argmin_pair: (sphere_point(p[0], p[1]), sphere_point(p[2], p[3])),
        bound: max_norm / kappa_lower,
        grid_resolution: resolution,
        lipschitz,
        evaluations: m.evaluations,
    })
}

/// [`kappa_certificate`] at `resolution`, halved on each
/// [`Error::ResolutionTooCoarse`] until `min_resolution` is passed.
pub fn kappa_certificate_adaptive(
    set: &MatrixSet,
    resolution: f64,
    min_resolution: f64,
) -> Result<KappaCertificate> {
    let mut res = resolution;
    loop {
        match kappa_certificate(set, res) {
            Err(Error::ResolutionTooCoarse { .. }) if res / 2.0 >= min_resolution => res /= 2.0,
            other => return other,
        }
    }
}

fn random_matrix(rng: &mut impl Rng) -> Mat2 {
    let mut z = || Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    Mat2::new(z(), z(), z(), z())
}

/// Samples `trials` random pairs `(B₁, B₂)` and checks
/// `max_X ‖B₁ X B₂‖ ≥ κ ‖B₁‖ ‖B₂‖`. Returns false on the first violation.
pub fn verify_bee(set: &MatrixSet, kappa: f64, trials: usize, seed: u64) -> bool {
    if kappa <= 0.0 {
        return true;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).all(|_| {
        let b1 = random_matrix(&mut rng);
        let b2 = random_matrix(&mut rng);
        bee_holds(set, kappa, &b1, &b2)
    })
}

pub fn bee_holds(set: &MatrixSet, kappa: f64, b1: &Mat2, b2: &Mat2) -> bool {
    let lhs = set
        .members()
        .iter()
        .map(|x| operator_norm(&(*b1 * *x * *b2)))
        .fold(operator_norm(&(*b1 * *b2)), f64::max);
    let rhs = kappa * operator_norm(b1) * operator_norm(b2);
    lhs >= rhs - 1e-12 * rhs.max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BddCertificate {
    pub lambda: f64,
    /// Largest off-diagonal modulus `M`.
    pub off_diagonal_max: f64,
    /// `1 + 2M / (1 − λ)`, valid in the basis the set is triangular in.
    pub bound: f64,
    pub basis_note: String,
    /// Columns of the triangularizing basis `P` in original coordinates.
    pub basis: Mat2,
    /// `‖P‖·‖P⁻¹‖`
    pub basis_condition: f64,
    /// `basis_condition · bound`, valid for products of the original set.
    pub original_bound: f64,
}

fn check_upper_triangular(set: &MatrixSet) -> Result<()> {
    for (j, a) in set.members().iter().enumerate() {
        if !a.is_upper_triangular(&set.tol) {
            return Err(Error::HypothesisViolated(format!(
                "member {j} is not upper triangular (lower-left {:e})",
                a.m10().norm()
            )));
        }
    }
    Ok(())
}

fn check_unit_disc_diagonal(set: &MatrixSet) -> Result<()> {
    for (j, a) in set.members().iter().enumerate() {
        let top = a.m00().norm().max(a.m11().norm());
        if top > 1.0 + set.tol.rel {
            return Err(Error::HypothesisViolated(format!(
                "member {j} has diagonal modulus {top} > 1"
            )));
        }
    }
    Ok(())
}

pub fn bdd_certificate(tri_set: &MatrixSet) -> Result<BddCertificate> {
    check_upper_triangular(tri_set)?;
    check_unit_disc_diagonal(tri_set)?;
    let tol = tri_set.tol;
    let mut lambda: Option<f64> = None;
    let mut off_diagonal_max: f64 = 0.0;
    for (j, a) in tri_set.members().iter().enumerate() {
        let b = a.m01().norm();
        off_diagonal_max = off_diagonal_max.max(b);
        if b <= tol.scaled(operator_norm(a)) {
            continue;
        }
        let low = a.m00().norm().min(a.m11().norm());
        if low >= 1.0 - tol.rel {
            return Err(Error::HypothesisViolated(format!(
                "member {j} is not diagonal and both diagonal moduli are 1"
            )));
        }
        lambda = Some(lambda.map_or(low, |l| l.max(low)));
    }
    let lambda = lambda.unwrap_or(0.5);
    let bound = 1.0 + 2.0 * off_diagonal_max / (1.0 - lambda);
    Ok(BddCertificate {
        lambda,
        off_diagonal_max,
        bound,
        basis_note: "input basis".into(),
        basis: Mat2::identity(),
        basis_condition: 1.0,
        original_bound: bound,
    })
}

/// Rewrite `set` as `P⁻¹ A_j P` and certify there. Entries below
/// `tol·‖A‖·cond(P)` that the basis change should have annihilated (the
/// lower-left of every member, the upper-right of unit-determinant members)
/// are set to zero.
pub fn bdd_certificate_in_basis(set: &MatrixSet, p: &Mat2) -> Result<BddCertificate> {
    let p_inv = p
        .inverse()
        .ok_or_else(|| Error::InvalidArgument("basis matrix is singular".into()))?;
    let condition = operator_norm(p) * operator_norm(&p_inv);
    let tol = set.tol;
    let mut members = Vec::with_capacity(set.len());
    for (j, a) in set.members().iter().enumerate() {
        let mut t = p_inv * *a * *p;
        let allowed = tol.scaled(operator_norm(a)) * condition;
        if t.m10().norm() > allowed {
            return Err(Error::NotCommonEigenvector {
                index: j,
                residual: t.m10().norm(),
                allowed,
            });
        }
        t.m[1][0] = Complex::new(0.0, 0.0);
        if (a.det().norm() - 1.0).abs() <= tol.rel && t.m01().norm() <= allowed {
            t.m[0][1] = Complex::new(0.0, 0.0);
        }
        members.push(t);
    }
    let tri = MatrixSet::new(members, tol)?;
    let mut cert = bdd_certificate(&tri)?;
    cert.basis_note = "eigenbasis of the unit-determinant members".into();
    cert.basis = *p;
    cert.basis_condition = condition;
    cert.original_bound = condition * cert.bound;
    Ok(cert)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearCeiling {
    pub slope: f64,
}

impl LinearCeiling {
    pub fn at(&self, n: usize) -> f64 {
        1.0 + n as f64 * self.slope
    }
}

pub fn linear_ceiling(tri_set: &MatrixSet) -> Result<LinearCeiling> {
    check_upper_triangular(tri_set)?;
    check_unit_disc_diagonal(tri_set)?;
    Ok(LinearCeiling {
        slope: tri_set.max_norm(),
    })
}
