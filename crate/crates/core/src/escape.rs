//! Construction of an escaping switching law and initial vector for
//! marginally unstable families.
//!
//! The family is first put in upper-triangular form through a common
//! eigenvector. Then either a unit-determinant member is a nontrivial Jordan
//! block (its powers already grow linearly), or two unit-determinant,
//! individually diagonalizable members fail to commute. Such a pair is
//! normalized to
//!
//! ```text
//! A₁ = [[e^{iφ}, e^{iφ} − 1], [0, 1]],   A₂ = [[e^{iψ}, 0], [0, 1]]
//! ```
//!
//! and the construction splits on whether `e^{iφ}` and `e^{iψ}` are roots of
//! unity: a periodic commutator word (both), a greedy angle search (neither),
//! or the greedy search on `(A₁, A₁A₂)` followed by word expansion (mixed).

use std::f64::consts::{FRAC_PI_3, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{
    eigen, operator_norm, unitary_with_first_column, Complex, Mat2, MatrixSet, Tolerance, Vec2,
    ONE, ZERO,
};
use crate::structure::{
    commutator_margin, is_simultaneously_diagonalizable, RootOfUnityResult, RootPolicy,
    StructureReport,
};

pub const DEFAULT_SEARCH_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedPair {
    pub phi: f64,
    pub psi: f64,
    pub a1n: Mat2,
    pub a2n: Mat2,
    /// Change of basis `T` with `A_first = scales.0 · T · a1n · T⁻¹` (and
    /// likewise for the second matrix).
    pub to_original: Mat2,
    /// The lower-right diagonal entries divided out of each matrix.
    pub scales: (Complex, Complex),
    /// `‖T‖·‖T⁻¹‖`
    pub conditioning: f64,
    /// Off-diagonal of the first matrix after the shear, before scaling.
    pub a_prime: Complex,
}

impl NormalizedPair {
    pub fn from_original(&self) -> Mat2 {
        self.to_original
            .inverse()
            .expect("normalizing basis change is invertible")
    }

    /// Reassemble the two original matrices.
    pub fn originals(&self) -> (Mat2, Mat2) {
        let t = self.to_original;
        let ti = self.from_original();
        (
            (t * self.a1n * ti).scale(self.scales.0),
            (t * self.a2n * ti).scale(self.scales.1),
        )
    }

    /// Unit vector in original coordinates along the second normalized basis
    /// vector.
    pub fn escape_vector(&self) -> Vec2 {
        let w = self.to_original.column(1);
        w.scale(Complex::new(1.0 / w.norm(), 0.0))
    }
}

/// Bring a diagonalizable, non-commuting, unit-modulus-spectrum pair sharing
/// the eigenvector `v1` to the normal form above.
pub fn normalize_pair(ak: &Mat2, al: &Mat2, v1: &Vec2, tol: &Tolerance) -> Result<NormalizedPair> {
    let u = unitary_with_first_column(v1)
        .ok_or_else(|| Error::InvalidArgument("common eigenvector must be nonzero".into()))?;
    let unit_band = tol.rel.sqrt();
    let mut tri = [ak.unitary_conjugate(&u), al.unitary_conjugate(&u)];
    for (which, t) in tri.iter_mut().enumerate() {
        let allowed = tol.scaled(operator_norm(t));
        if t.m10().norm() > allowed {
            return Err(Error::NotCommonEigenvector {
                index: which,
                residual: t.m10().norm(),
                allowed,
            });
        }
        t.m[1][0] = ZERO;
        for d in [t.m00(), t.m11()] {
            if (d.norm() - 1.0).abs() > unit_band {
                return Err(Error::DegeneratePair(format!(
                    "diagonal entry {d} is not on the unit circle"
                )));
            }
        }
    }
    let scales = (tri[0].m11(), tri[1].m11());
    let n1 = tri[0].scale(scales.0.inv());
    let n2 = tri[1].scale(scales.1.inv());
    let r1 = n1.m00();
    let r2 = n2.m00();
    for r in [r1, r2] {
        if (r - ONE).norm() <= unit_band {
            return Err(Error::DegeneratePair(format!(
                "eigenvalue ratio {r} is 1, so the member is scalar or defective"
            )));
        }
    }

    // Shear onto the eigenvector of n2 for eigenvalue 1.
    let x = -n2.m01() / (r2 - ONE);
    let shear = Mat2::upper(ONE, x, ONE);
    let a_prime = (r1 - ONE) * x + n1.m01();
    if a_prime.norm() <= tol.scaled(operator_norm(&n1)) {
        return Err(Error::DegeneratePair(format!(
            "sheared off-diagonal {a_prime} vanishes: pair is simultaneously diagonalizable"
        )));
    }
    let s = ((r1 - ONE) / a_prime).sqrt();
    // conjugation by diag(s, 1/s) multiplies the off-diagonal by s²
    let d_inv = Mat2::diag(s.inv(), s);
    let inner = shear * d_inv;
    let inner_inv = inner
        .inverse()
        .ok_or_else(|| Error::DegeneratePair("singular normalizing basis".into()))?;
    let to_original = u * inner;
    let from_original = inner_inv * u.adjoint();
    let a1n = inner_inv * n1 * inner;
    let mut a2n = inner_inv * n2 * inner;
    a2n.m[0][1] = ZERO;
    a2n.m[1][0] = ZERO;
    let mut a1n = a1n;
    a1n.m[1][0] = ZERO;

    Ok(NormalizedPair {
        phi: r1.arg().rem_euclid(TAU),
        psi: r2.arg().rem_euclid(TAU),
        a1n,
        a2n,
        to_original,
        scales,
        conditioning: operator_norm(&to_original) * operator_norm(&from_original),
        a_prime,
    })
}

/// Ratio coordinate of the current vector `(α, 1)` in normalized
/// coordinates, together with the `(m, n)` choices made so far.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyState {
    pub alpha: Complex,
    pub theta: f64,
    pub step_log: Vec<(u64, u64)>,
}

impl GreedyState {
    pub fn new(alpha: Complex) -> Self {
        Self {
            alpha,
            theta: if alpha == ZERO { 0.0 } else { alpha.arg() },
            step_log: Vec::new(),
        }
    }

    /// One greedy step in place; returns the chosen `(m, n)`.
    pub fn advance(&mut self, phi: f64, psi: f64, search_cap: u64) -> Result<(u64, u64)> {
        let (m, n) = choose_step(self.theta, phi, psi, search_cap)?;
        let rot_psi = Complex::from_polar(1.0, (m as f64 * psi).rem_euclid(TAU));
        let rot_phi = Complex::from_polar(1.0, (n as f64 * phi).rem_euclid(TAU));
        let beta = rot_phi * (ONE + self.alpha * rot_psi) - ONE;
        self.alpha = beta;
        self.theta = beta.arg();
        self.step_log.push((m, n));
        Ok((m, n))
    }
}

/// Smallest `m` with `cos(mψ + θ) > 1/2`, then smallest `n` with
/// `cos(mψ + nφ + θ) < −1/2`.
pub fn choose_step(theta: f64, phi: f64, psi: f64, search_cap: u64) -> Result<(u64, u64)> {
    let m = (1..=search_cap)
        .find(|&m| (m as f64 * psi + theta).cos() > 0.5)
        .ok_or(Error::SearchCapExceeded { cap: search_cap })?;
    let base = m as f64 * psi + theta;
    let n = (1..=search_cap)
        .find(|&n| (base + n as f64 * phi).cos() < -0.5)
        .ok_or(Error::SearchCapExceeded { cap: search_cap })?;
    Ok((m, n))
}

/// Pure form of [`GreedyState::advance`].
pub fn case2_step(state: &GreedyState, phi: f64, psi: f64, search_cap: u64) -> Result<GreedyState> {
    let mut next = state.clone();
    next.advance(phi, psi, search_cap)?;
    Ok(next)
}

/// Arc width (in radians, on each side) accepted by the greedy search.
pub const ARC_HALF_WIDTH: f64 = FRAC_PI_3;

/// Greedy switching law: each step applies `m` copies of letter 2 and then
/// `n` copies of letter 1, and each letter expands to a fixed word over the
/// original member indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyRule {
    pub phi: f64,
    pub psi: f64,
    pub search_cap: u64,
    pub initial: GreedyState,
    /// Time-ordered member indices emitted for letter 1.
    pub letter1: Vec<usize>,
    /// Time-ordered member indices emitted for letter 2.
    pub letter2: Vec<usize>,
}

/// Letters (1 or 2) and the member-index word they expand to, up to a
/// requested length.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyExpansion {
    pub indices: Vec<usize>,
    /// Time (number of emitted indices) after each letter.
    pub letter_times: Vec<usize>,
    pub letters: Vec<u8>,
    /// Time after each completed greedy step.
    pub step_times: Vec<usize>,
    pub state: GreedyState,
}

impl GreedyRule {
    pub fn expand(&self, min_len: usize) -> Result<GreedyExpansion> {
        let mut out = GreedyExpansion {
            indices: Vec::with_capacity(min_len + 64),
            letter_times: Vec::new(),
            letters: Vec::new(),
            step_times: Vec::new(),
            state: self.initial.clone(),
        };
        while out.indices.len() < min_len {
            let (m, n) = out.state.advance(self.phi, self.psi, self.search_cap)?;
            for (letter, count, word) in [(2u8, m, &self.letter2), (1u8, n, &self.letter1)] {
                for _ in 0..count {
                    out.indices.extend_from_slice(word);
                    out.letters.push(letter);
                    out.letter_times.push(out.indices.len());
                }
            }
            out.step_times.push(out.indices.len());
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SequenceKind {
    Constant { index: usize },
    Periodic { word: Vec<usize> },
    Greedy { rule: GreedyRule },
}

/// A switching law, 1-indexed in time: `prefix(n)[t − 1] = σ(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchingSequence {
    pub kind: SequenceKind,
    pub description: String,
}

impl SwitchingSequence {
    pub fn constant(index: usize) -> Self {
        Self {
            kind: SequenceKind::Constant { index },
            description: format!("constant at member {index}"),
        }
    }

    pub fn periodic(word: Vec<usize>) -> Result<Self> {
        if word.is_empty() {
            return Err(Error::InvalidArgument("periodic word must be nonempty".into()));
        }
        let description = format!("periodic with period {} and word {:?}", word.len(), word);
        Ok(Self {
            kind: SequenceKind::Periodic { word },
            description,
        })
    }

    pub fn prefix(&self, len: usize) -> Result<Vec<usize>> {
        Ok(match &self.kind {
            SequenceKind::Constant { index } => vec![*index; len],
            SequenceKind::Periodic { word } => word.iter().copied().cycle().take(len).collect(),
            SequenceKind::Greedy { rule } => {
                let mut e = rule.expand(len)?;
                e.indices.truncate(len);
                e.indices
            }
        })
    }

    /// Times at which a structural unit finishes: period boundaries,
    /// completed greedy steps, nothing for constant laws.
    pub fn checkpoints(&self, len: usize) -> Result<Vec<usize>> {
        Ok(match &self.kind {
            SequenceKind::Constant { .. } => Vec::new(),
            SequenceKind::Periodic { word } => (1..=len / word.len()).map(|k| k * word.len()).collect(),
            SequenceKind::Greedy { rule } => {
                let e = rule.expand(len)?;
                e.step_times.into_iter().take_while(|&t| t <= len).collect()
            }
        })
    }

    /// Member indices the law can emit.
    pub fn alphabet(&self) -> Vec<usize> {
        let mut v = match &self.kind {
            SequenceKind::Constant { index } => vec![*index],
            SequenceKind::Periodic { word } => word.clone(),
            SequenceKind::Greedy { rule } => {
                rule.letter1.iter().chain(&rule.letter2).copied().collect()
            }
        };
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn validate_for(&self, set: &MatrixSet) -> Result<()> {
        for index in self.alphabet() {
            set.get(index)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    Jordan,
    BothRoots,
    NeitherRoot,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairIndices {
    Single(usize),
    Pair(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscapeWitness {
    pub sequence: SwitchingSequence,
    pub v0: Vec2,
    pub case_tag: CaseTag,
    pub pair_indices: PairIndices,
    pub normalization: Option<NormalizedPair>,
    /// One-period product in normalized coordinates (both-roots case).
    pub predicted_period_product: Option<Mat2>,
    pub root_checks: Option<(RootOfUnityResult, RootOfUnityResult)>,
    pub warnings: Vec<String>,
}

impl EscapeWitness {
    /// Structural claims: every emitted member has unit determinant, at most
    /// two members are used, and they are not simultaneously diagonalizable.
    pub fn check_structure(&self, set: &MatrixSet) -> Result<()> {
        self.sequence.validate_for(set)?;
        let alphabet = self.sequence.alphabet();
        if alphabet.len() > 2 {
            return Err(Error::HypothesisViolated(format!(
                "law uses {} members",
                alphabet.len()
            )));
        }
        if alphabet.len() == 1 && self.case_tag != CaseTag::Jordan {
            return Err(Error::HypothesisViolated(
                "constant law outside the Jordan case".into(),
            ));
        }
        let mut members = Vec::new();
        for &i in &alphabet {
            let a = set.get(i)?;
            let d = a.det().norm();
            if (d - 1.0).abs() > set.tol.rel {
                return Err(Error::NotUnitDeterminant {
                    index: i,
                    det_modulus: d,
                });
            }
            members.push(*a);
        }
        if is_simultaneously_diagonalizable(&members, &set.tol) {
            return Err(Error::HypothesisViolated(
                "emitted members are simultaneously diagonalizable".into(),
            ));
        }
        Ok(())
    }
}

pub fn jordan_witness(set: &MatrixSet, j: usize) -> Result<EscapeWitness> {
    let a = set.get(j)?;
    let e = eigen(a, &set.tol);
    if e.diagonalizable {
        return Err(Error::NotJordan { index: j });
    }
    let det_modulus = a.det().norm();
    if (det_modulus - 1.0).abs() > set.tol.rel {
        return Err(Error::NotUnitDeterminant {
            index: j,
            det_modulus,
        });
    }
    let u = unitary_with_first_column(&e.eigenvectors[0])
        .ok_or_else(|| Error::InvalidArgument("zero eigenvector".into()))?;
    Ok(EscapeWitness {
        sequence: SwitchingSequence::constant(j),
        v0: u.column(1),
        case_tag: CaseTag::Jordan,
        pair_indices: PairIndices::Single(j),
        normalization: None,
        predicted_period_product: None,
        root_checks: None,
        warnings: Vec::new(),
    })
}

/// Commutator `A₁A₂A₁⁻¹A₂⁻¹ = [[1, (1 − e^{iφ})(e^{iψ} − 1)], [0, 1]]`.
pub fn predicted_commutator(phi: f64, psi: f64) -> Mat2 {
    let ep = Complex::from_polar(1.0, phi);
    let es = Complex::from_polar(1.0, psi);
    Mat2::upper(ONE, (ONE - ep) * (es - ONE), ONE)
}

/// Time-ordered letters of one period for orders `q1` (of `e^{iφ}`) and `q2`
/// (of `e^{iψ}`): `2^{q2−1} 1^{q1−1} 2 1`, whose left product is
/// `A₁A₂A₁^{q1−1}A₂^{q2−1}`.
pub fn case1_letters(q1: u32, q2: u32) -> Vec<u8> {
    let mut w = Vec::with_capacity((q1 + q2) as usize);
    w.extend(std::iter::repeat_n(2u8, (q2 - 1) as usize));
    w.extend(std::iter::repeat_n(1u8, (q1 - 1) as usize));
    w.push(2);
    w.push(1);
    w
}

pub fn case1_witness(
    np: &NormalizedPair,
    indices: (usize, usize),
    q1: u32,
    q2: u32,
    tol: f64,
) -> Result<EscapeWitness> {
    if q1 < 2 || q2 < 2 {
        return Err(Error::InvalidArgument(format!(
            "root orders must be at least 2, got ({q1}, {q2})"
        )));
    }
    for (angle, order) in [(np.phi, q1), (np.psi, q2)] {
        let distance = crate::structure::root_residual(angle, order);
        if distance > tol {
            return Err(Error::NotRootsOfUnity {
                angle,
                order,
                distance,
            });
        }
    }
    let word = case1_letters(q1, q2)
        .into_iter()
        .map(|l| if l == 1 { indices.0 } else { indices.1 })
        .collect();
    let mut sequence = SwitchingSequence::periodic(word)?;
    sequence.description = format!(
        "periodic commutator word, period {} (orders {q1}, {q2})",
        q1 + q2
    );
    Ok(EscapeWitness {
        sequence,
        v0: np.escape_vector(),
        case_tag: CaseTag::BothRoots,
        pair_indices: PairIndices::Pair(indices.0, indices.1),
        normalization: Some(np.clone()),
        predicted_period_product: Some(predicted_commutator(np.phi, np.psi)),
        root_checks: None,
        warnings: Vec::new(),
    })
}

fn greedy_witness(
    np: &NormalizedPair,
    letter1: Vec<usize>,
    letter2: Vec<usize>,
    search_cap: u64,
    tag: CaseTag,
    pair: PairIndices,
) -> Result<EscapeWitness> {
    let rule = GreedyRule {
        phi: np.phi,
        psi: np.psi,
        search_cap,
        initial: GreedyState::new(ZERO),
        letter1,
        letter2,
    };
    // surface a search failure now rather than mid-simulation
    rule.expand(1)?;
    let description = format!(
        "greedy: per step m×{:?} then n×{:?} (φ = {}, ψ = {})",
        rule.letter2, rule.letter1, np.phi, np.psi
    );
    Ok(EscapeWitness {
        sequence: SwitchingSequence {
            kind: SequenceKind::Greedy { rule },
            description,
        },
        v0: np.escape_vector(),
        case_tag: tag,
        pair_indices: pair,
        normalization: Some(np.clone()),
        predicted_period_product: None,
        root_checks: None,
        warnings: Vec::new(),
    })
}

pub fn case2_witness(np: &NormalizedPair, indices: (usize, usize), search_cap: u64) -> Result<EscapeWitness> {
    greedy_witness(
        np,
        vec![indices.0],
        vec![indices.1],
        search_cap,
        CaseTag::NeitherRoot,
        PairIndices::Pair(indices.0, indices.1),
    )
}

/// Mixed case. `first_is_root` says whether the ratio of `ak` (member
/// `indices.0`) is the root of unity; labels are swapped so that the root
/// sits in the second slot, then the greedy search runs on
/// `(B₁, B₂) = (A₁, A₁A₂)` and every `B₂` expands to "2 then 1".
pub fn case3_witness(
    ak: &Mat2,
    al: &Mat2,
    v1: &Vec2,
    indices: (usize, usize),
    first_is_root: bool,
    search_cap: u64,
    tol: &Tolerance,
) -> Result<EscapeWitness> {
    let (a1, a2, i1, i2) = if first_is_root {
        (al, ak, indices.1, indices.0)
    } else {
        (ak, al, indices.0, indices.1)
    };
    let b1 = *a1;
    let b2 = *a1 * *a2;
    if commutator_margin(&b1, &b2) <= tol.rel {
        return Err(Error::DerivedPairDegenerate);
    }
    let np = normalize_pair(&b1, &b2, v1, tol)?;
    greedy_witness(
        &np,
        vec![i1],
        vec![i2, i1],
        search_cap,
        CaseTag::Mixed,
        PairIndices::Pair(i1, i2),
    )
}

pub fn build_escape_witness(
    set: &MatrixSet,
    report: &StructureReport,
    policy: &RootPolicy,
    search_cap: u64,
) -> Result<EscapeWitness> {
    let v1 = report.common_eigenvector.ok_or_else(|| {
        Error::NotMarginallyUnstable("members share no common eigenvector".into())
    })?;
    if report.unit_det_simdiag {
        return Err(Error::NotMarginallyUnstable(
            "unit-determinant members are simultaneously diagonalizable".into(),
        ));
    }
    if let Some(j) = report.jordan_member {
        let mut w = jordan_witness(set, j)?;
        if let Some((k, l)) = report.nondiag_pair {
            w.warnings.push(format!(
                "non-commuting pair ({k}, {l}) also available; Jordan member preferred"
            ));
        }
        return Ok(w);
    }
    let (k, l) = report.nondiag_pair.ok_or_else(|| {
        Error::NotMarginallyUnstable("no non-commuting unit-determinant pair".into())
    })?;
    let (ak, al) = (set.get(k)?, set.get(l)?);
    let np = normalize_pair(ak, al, &v1, &set.tol)?;
    let rk = policy.classify(k, np.phi);
    let rl = policy.classify(l, np.psi);

    let mut w = match (rk.is_root, rl.is_root) {
        (true, true) => case1_witness(
            &np,
            (k, l),
            rk.order.unwrap_or(0),
            rl.order.unwrap_or(0),
            policy.tol.max(1e-9),
        )?,
        (false, false) => case2_witness(&np, (k, l), search_cap)?,
        (first_is_root, _) => {
            case3_witness(ak, al, &v1, (k, l), first_is_root, search_cap, &set.tol)?
        }
    };
    for (idx, r) in [(k, &rk), (l, &rl)] {
        if !r.is_root && !r.forced && r.margin < NEAR_ROOT_MARGIN {
            w.warnings.push(format!(
                "member {idx}: eigenvalue ratio is within {:e} of a root of unity of order ≤ {}",
                r.margin, policy.q_max
            ));
        }
    }
    w.root_checks = Some((rk, rl));
    Ok(w)
}

/// Rejected roots closer than this get a warning in the witness.
pub const NEAR_ROOT_MARGIN: f64 = 1e-6;
