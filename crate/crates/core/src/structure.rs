//! Algebraic predicates that decide which branch of the dichotomy applies:
//! common eigenvectors, simultaneous diagonalizability of the unit-determinant
//! members, and root-of-unity detection for eigenvalue ratios.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::matrix::{eigen, eigen_residual, operator_norm, EigenData, Mat2, MatrixSet, Vec2};

/// Returns a unit vector that is an eigenvector of every member, if one
/// exists. Scalar members accept any vector; candidates are drawn from the
/// first non-scalar member in eigenvector order.
pub fn common_eigenvector(set: &MatrixSet) -> Option<Vec2> {
    let eig: Vec<EigenData> = set.members().iter().map(|m| eigen(m, &set.tol)).collect();
    let Some(first) = eig.iter().position(|e| !e.scalar) else {
        return Some(Vec2::e0());
    };
    eig[first]
        .eigenvectors
        .iter()
        .copied()
        .find(|w| is_common_eigenvector(set, w))
}

pub fn is_common_eigenvector(set: &MatrixSet, w: &Vec2) -> bool {
    max_eigen_residual(set, w).is_some()
}

/// Largest eigen-residual over members, or `None` if some member rejects `w`.
fn max_eigen_residual(set: &MatrixSet, w: &Vec2) -> Option<f64> {
    let mut worst: f64 = 0.0;
    for a in set.members() {
        let r = eigen_residual(a, w);
        if r > set.tol.scaled(operator_norm(a)) {
            return None;
        }
        worst = worst.max(r);
    }
    Some(worst)
}

pub fn commute(a: &Mat2, b: &Mat2, rel: f64) -> bool {
    commutator_margin(a, b) <= rel
}

/// `‖AB − BA‖ / (‖A‖·‖B‖)`, zero if either factor vanishes.
pub fn commutator_margin(a: &Mat2, b: &Mat2) -> f64 {
    let scale = operator_norm(a) * operator_norm(b);
    if scale == 0.0 {
        return 0.0;
    }
    operator_norm(&a.commutator(b)) / scale
}

/// For 2×2 families: every member diagonalizable and all pairs commute.
/// The empty family is vacuously simultaneously diagonalizable.
pub fn is_simultaneously_diagonalizable(members: &[Mat2], tol: &crate::matrix::Tolerance) -> bool {
    if members.iter().any(|m| !eigen(m, tol).diagonalizable) {
        return false;
    }
    members.iter().enumerate().all(|(i, a)| {
        members[i + 1..]
            .iter()
            .all(|b| commute(a, b, tol.rel))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootOfUnityResult {
    pub is_root: bool,
    pub order: Option<u32>,
    /// For a root: the residual `|e^{iqφ} − 1|` at the reported order. For a
    /// rejection: the smallest residual seen over `q = 1..=q_max`.
    pub margin: f64,
    /// True when the answer came from a user annotation instead of a scan.
    pub forced: bool,
}

/// Distance `|e^{iqφ} − 1|`.
pub fn root_residual(angle: f64, q: u32) -> f64 {
    let t = angle.rem_euclid(TAU);
    2.0 * (0.5 * f64::from(q) * t).sin().abs()
}

/// Smallest `q ∈ [1, q_max]` with `|e^{iqφ} − 1| ≤ tol`.
pub fn root_of_unity_order(angle: f64, q_max: u32, tol: f64) -> RootOfUnityResult {
    let mut best = f64::INFINITY;
    for q in 1..=q_max.max(1) {
        let d = root_residual(angle, q);
        if d <= tol {
            return RootOfUnityResult {
                is_root: true,
                order: Some(q),
                margin: d,
                forced: false,
            };
        }
        best = best.min(d);
    }
    RootOfUnityResult {
        is_root: false,
        order: None,
        margin: best,
        forced: false,
    }
}

/// User knowledge about the eigenvalue ratio of one member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootAnnotation {
    /// The ratio is a primitive root of unity of this order.
    Root(u32),
    /// The ratio is not a root of unity.
    NotRoot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootPolicy {
    pub q_max: u32,
    pub tol: f64,
    /// Per-member overrides keyed by member index.
    pub forced: BTreeMap<usize, RootAnnotation>,
}

impl Default for RootPolicy {
    fn default() -> Self {
        Self {
            q_max: 4096,
            tol: 1e-9,
            forced: BTreeMap::new(),
        }
    }
}

impl RootPolicy {
    /// Classify the eigenvalue-ratio angle of member `index`.
    pub fn classify(&self, index: usize, angle: f64) -> RootOfUnityResult {
        match self.forced.get(&index) {
            Some(RootAnnotation::Root(q)) => RootOfUnityResult {
                is_root: true,
                order: Some(*q),
                margin: root_residual(angle, *q),
                forced: true,
            },
            Some(RootAnnotation::NotRoot) => RootOfUnityResult {
                is_root: false,
                order: None,
                margin: f64::NAN,
                forced: true,
            },
            None => root_of_unity_order(angle, self.q_max, self.tol),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberInfo {
    pub det_modulus: f64,
    /// `| |det| − 1 |`
    pub det_margin: f64,
    pub diagonalizable: bool,
    pub scalar: bool,
    pub eigenvalue_gap: f64,
    /// Arguments of the two eigenvalues, in `[0, 2π)`.
    pub eigen_angles: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub common_eigenvector: Option<Vec2>,
    pub common_eigenvector_residual: Option<f64>,
    pub unit_det_indices: Vec<usize>,
    pub unit_det_simdiag: bool,
    pub jordan_member: Option<usize>,
    pub nondiag_pair: Option<(usize, usize)>,
    /// Commutator margin of `nondiag_pair`, if any.
    pub nondiag_pair_margin: Option<f64>,
    pub members: Vec<MemberInfo>,
}

impl StructureReport {
    pub fn eigen_angles(&self) -> Vec<(f64, f64)> {
        self.members.iter().map(|m| m.eigen_angles).collect()
    }
}

pub fn analyze(set: &MatrixSet) -> StructureReport {
    let tol = set.tol;
    let eig: Vec<EigenData> = set.members().iter().map(|m| eigen(m, &tol)).collect();
    let members: Vec<MemberInfo> = set
        .members()
        .iter()
        .zip(&eig)
        .map(|(m, e)| {
            let det_modulus = m.det().norm();
            MemberInfo {
                det_modulus,
                det_margin: (det_modulus - 1.0).abs(),
                diagonalizable: e.diagonalizable,
                scalar: e.scalar,
                eigenvalue_gap: e.eigenvalue_gap,
                eigen_angles: (
                    e.eigenvalues.0.arg().rem_euclid(std::f64::consts::TAU),
                    e.eigenvalues.1.arg().rem_euclid(std::f64::consts::TAU),
                ),
            }
        })
        .collect();

    let common = common_eigenvector(set);
    let common_residual = common.and_then(|w| max_eigen_residual(set, &w));

    let unit_det_indices: Vec<usize> = members
        .iter()
        .enumerate()
        .filter(|(_, m)| m.det_margin <= tol.rel)
        .map(|(i, _)| i)
        .collect();
    let unit_members: Vec<Mat2> = unit_det_indices
        .iter()
        .map(|&i| set.members()[i])
        .collect();
    let unit_det_simdiag = is_simultaneously_diagonalizable(&unit_members, &tol);

    let jordan_member = unit_det_indices
        .iter()
        .copied()
        .find(|&i| !members[i].diagonalizable);

    let mut nondiag_pair = None;
    let mut nondiag_pair_margin = None;
    if !unit_det_simdiag {
        let diag: Vec<usize> = unit_det_indices
            .iter()
            .copied()
            .filter(|&i| members[i].diagonalizable)
            .collect();
        'outer: for (p, &k) in diag.iter().enumerate() {
            for &l in &diag[p + 1..] {
                let margin = commutator_margin(&set.members()[k], &set.members()[l]);
                if margin > tol.rel {
                    nondiag_pair = Some((k, l));
                    nondiag_pair_margin = Some(margin);
                    break 'outer;
                }
            }
        }
    }

    StructureReport {
        common_eigenvector: common,
        common_eigenvector_residual: common_residual,
        unit_det_indices,
        unit_det_simdiag,
        jordan_member,
        nondiag_pair,
        nondiag_pair_margin,
        members,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{triangularize_in_basis, Complex, Tolerance, ONE};
    use std::f64::consts::PI;

    fn i() -> Complex {
        Complex::new(0.0, 1.0)
    }

    fn set(ms: Vec<Mat2>) -> MatrixSet {
        MatrixSet::with_default_tol(ms).unwrap()
    }

    #[test]
    fn shared_upper_triangular_eigenvector() {
        let s = set(vec![
            Mat2::real(1.0, 1.0, 0.0, 1.0),
            Mat2::real(2.0, 0.0, 0.0, 1.0),
        ]);
        let v = common_eigenvector(&s).unwrap();
        assert!(v.projective_distance(&Vec2::e0()) < 1e-15);
        assert!(triangularize_in_basis(&s, &v).is_ok());
    }

    #[test]
    fn rotation_and_diagonal_share_nothing() {
        // R has eigenvectors (1, ∓i)/√2; diag(2,1) has the axes.
        let r = Mat2::real(0.0, -1.0, 1.0, 0.0);
        let e = eigen(&r, &Tolerance::default());
        for w in &e.eigenvectors {
            assert!((w.x0.norm() - w.x1.norm()).abs() < 1e-12);
        }
        let s = set(vec![r, Mat2::real(2.0, 0.0, 0.0, 1.0)]);
        assert_eq!(common_eigenvector(&s), None);
    }

    #[test]
    fn scalar_members_are_wildcards() {
        let a = Mat2::real(1.0, 2.0, 3.0, 4.0);
        let s = set(vec![Mat2::identity().scale_real(3.0), a]);
        let v = common_eigenvector(&s).unwrap();
        assert!(eigen_residual(&a, &v) < 1e-12);

        let all_scalar = set(vec![Mat2::identity(), Mat2::identity().scale(i())]);
        assert_eq!(common_eigenvector(&all_scalar), Some(Vec2::e0()));
    }

    #[test]
    fn simultaneous_diagonalizability_examples() {
        let tol = Tolerance::default();
        assert!(is_simultaneously_diagonalizable(
            &[Mat2::diag(i(), ONE), Mat2::real(-1.0, 0.0, 0.0, 1.0)],
            &tol
        ));
        let a = Mat2::diag(i(), ONE);
        let b = Mat2::upper(i(), ONE, ONE);
        let comm = a.commutator(&b);
        assert!((comm.m01() - (i() - ONE)).norm() < 1e-15);
        assert!(!is_simultaneously_diagonalizable(&[a, b], &tol));
        assert!(!is_simultaneously_diagonalizable(
            &[Mat2::real(1.0, 1.0, 0.0, 1.0)],
            &tol
        ));
        assert!(is_simultaneously_diagonalizable(&[], &tol));
    }

    #[test]
    fn root_orders() {
        let r = root_of_unity_order(PI, 4096, 1e-9);
        assert_eq!((r.is_root, r.order), (true, Some(2)));
        let r = root_of_unity_order(2.0 * PI / 3.0, 4096, 1e-9);
        assert_eq!((r.is_root, r.order), (true, Some(3)));
        let r = root_of_unity_order(-PI / 2.0, 4096, 1e-9);
        assert_eq!(r.order, Some(4));
    }

    #[test]
    fn one_radian_is_not_a_root_below_ten_thousand() {
        let r = root_of_unity_order(1.0, 10_000, 1e-9);
        assert!(!r.is_root);
        // exhaustive scan, independent of the early-exit loop
        let min = (1..=10_000u32)
            .map(|q| (Complex::from_polar(1.0, f64::from(q)) - ONE).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(min > 1e-9);
        assert!((r.margin - min).abs() < 1e-9);
    }

    #[test]
    fn forced_annotations_override_scan() {
        let mut policy = RootPolicy::default();
        policy.forced.insert(0, RootAnnotation::Root(7));
        policy.forced.insert(1, RootAnnotation::NotRoot);
        let r0 = policy.classify(0, TAU / 7.0);
        assert!(r0.is_root && r0.forced && r0.order == Some(7));
        assert!(r0.margin < 1e-12);
        let r1 = policy.classify(1, PI);
        assert!(!r1.is_root && r1.forced);
        assert!(policy.classify(2, PI).order == Some(2));
    }

    #[test]
    fn analyze_noncommuting_unit_pair() {
        let s = set(vec![Mat2::diag(i(), ONE), Mat2::upper(i(), ONE, ONE)]);
        let rep = analyze(&s);
        assert!(rep.common_eigenvector.unwrap().projective_distance(&Vec2::e0()) < 1e-15);
        assert_eq!(rep.unit_det_indices, vec![0, 1]);
        assert!(!rep.unit_det_simdiag);
        assert_eq!(rep.jordan_member, None);
        assert_eq!(rep.nondiag_pair, Some((0, 1)));
    }

    #[test]
    fn analyze_contraction_has_vacuous_unit_subset() {
        let s = set(vec![Mat2::real(0.5, 1.0, 0.0, 0.9)]);
        let rep = analyze(&s);
        assert!(rep.unit_det_indices.is_empty());
        assert!(rep.unit_det_simdiag);
        assert!((rep.members[0].det_modulus - 0.45).abs() < 1e-15);
    }

    #[test]
    fn analyze_finds_jordan_member() {
        let s = set(vec![Mat2::real(1.0, 1.0, 0.0, 1.0)]);
        let rep = analyze(&s);
        assert_eq!(rep.jordan_member, Some(0));
        assert_eq!(rep.nondiag_pair, None);
    }

    #[test]
    fn pair_selection_is_lexicographic() {
        let d = Mat2::diag(i(), ONE);
        let u = Mat2::upper(i(), ONE, ONE);
        let v = Mat2::upper(-ONE, ONE, ONE);
        let s = set(vec![d, d.scale_real(0.5), u, v]);
        let rep = analyze(&s);
        assert_eq!(rep.unit_det_indices, vec![0, 2, 3]);
        assert_eq!(rep.nondiag_pair, Some((0, 2)));
    }
}
