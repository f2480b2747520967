//! Four-regime classification with the certificate or witness that backs it.
//!
//! Exponential regimes are read off the JSR bracket. Inside the unit band the
//! structure decides: no common eigenvector gives a κ bound; a common
//! eigenvector with simultaneously diagonalizable unit-determinant members
//! gives the `1 + 2M/(1−λ)` bound; anything else is marginally unstable and
//! gets an escape witness plus the linear ceiling.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::certificates::{
    bdd_certificate_in_basis, kappa_certificate_adaptive, linear_ceiling, BddCertificate, KappaCertificate,
    LinearCeiling,
};
use crate::error::{Error, Result};
use crate::escape::{build_escape_witness, EscapeWitness, DEFAULT_SEARCH_CAP};
use crate::matrix::{eigen, spectral_radius, triangularize_in_basis, Mat2, MatrixSet, Vec2};
use crate::spectral::{
    jsr_bounds_with_rates, Enumeration, JsrBounds, RateSequence, SearchConfig, DEFAULT_WORK_BUDGET,
};
use crate::structure::{analyze, RootPolicy, StructureReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    ExponentiallyStable,
    ExponentiallyUnstable,
    MarginallyStable,
    MarginallyUnstable,
    Inconclusive,
}

impl Regime {
    pub fn is_stable(self) -> bool {
        matches!(self, Regime::ExponentiallyStable | Regime::MarginallyStable)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    Kappa(KappaCertificate),
    Bdd(BddCertificate),
}

impl Certificate {
    /// Uniform bound on `‖A_w‖` in the original basis.
    pub fn product_bound(&self) -> f64 {
        match self {
            Certificate::Kappa(k) => k.bound,
            Certificate::Bdd(b) => b.original_bound,
        }
    }
}

/// Band used when the caller does not give one.
pub const TRIANGULAR_BAND: f64 = 1e-6;
pub const DEFAULT_BAND: f64 = 1e-2;
pub const DEFAULT_KAPPA_RESOLUTION: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub depth: usize,
    /// `None` picks [`TRIANGULAR_BAND`] when the members share an eigenvector
    /// (the JSR is then exact) and [`DEFAULT_BAND`] otherwise.
    pub band: Option<f64>,
    pub assert_unit_jsr: bool,
    pub root_policy: RootPolicy,
    pub kappa_resolution: f64,
    /// Finest resolution tried when the starting one cannot certify κ > 0.
    pub min_kappa_resolution: f64,
    pub search_cap: u64,
    pub budget: u64,
    pub enumeration: Enumeration,
}

impl ClassifyOptions {
    pub fn new(depth: usize) -> Self {
        Self {
            depth,
            band: None,
            assert_unit_jsr: false,
            root_policy: RootPolicy::default(),
            kappa_resolution: DEFAULT_KAPPA_RESOLUTION,
            min_kappa_resolution: DEFAULT_KAPPA_RESOLUTION / 16.0,
            search_cap: DEFAULT_SEARCH_CAP,
            budget: DEFAULT_WORK_BUDGET,
            enumeration: Enumeration::Exact,
        }
    }
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self::new(8)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub regime: Regime,
    /// Bracket from enumeration.
    pub jsr: JsrBounds,
    /// `max_j ρ(A_j)`, which is the JSR when the members share an eigenvector.
    pub jsr_exact: Option<f64>,
    pub band: f64,
    pub rates: RateSequence,
    pub structure: StructureReport,
    pub certificate: Option<Certificate>,
    pub witness: Option<EscapeWitness>,
    pub linear_ceiling: Option<LinearCeiling>,
    pub margins: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl Verdict {
    /// Bracket the regime decision used.
    pub fn effective_bracket(&self) -> (f64, f64) {
        match self.jsr_exact {
            Some(r) => (r, r),
            None => (self.jsr.lower, self.jsr.upper),
        }
    }
}

pub fn classify(set: &MatrixSet, depth: usize, band: f64) -> Result<Verdict> {
    classify_with(
        set,
        &ClassifyOptions {
            band: Some(band),
            ..ClassifyOptions::new(depth)
        },
    )
}

/// Basis `[v1, v2]` in which simultaneously diagonalizable unit-determinant
/// members become diagonal and everything stays upper triangular.
fn eigenbasis_for_bdd(set: &MatrixSet, report: &StructureReport, v1: &Vec2) -> Mat2 {
    let mut v2 = v1.orthogonal_complement();
    for &i in &report.unit_det_indices {
        let e = eigen(&set.members()[i], &set.tol);
        if e.scalar || !e.diagonalizable {
            continue;
        }
        if let Some(w) = e
            .eigenvectors
            .iter()
            .max_by(|a, b| {
                a.projective_distance(v1)
                    .total_cmp(&b.projective_distance(v1))
            })
            .and_then(Vec2::normalized)
        {
            v2 = w;
        }
        break;
    }
    Mat2::from_columns(*v1, v2)
}

fn record_structure_margins(report: &StructureReport, margins: &mut BTreeMap<String, f64>) {
    if let Some(r) = report.common_eigenvector_residual {
        margins.insert("common_eigenvector_residual".into(), r);
    }
    if let Some(m) = report.nondiag_pair_margin {
        margins.insert("nondiag_pair_commutator".into(), m);
    }
    for (i, m) in report.members.iter().enumerate() {
        margins.insert(format!("member{i}.det_margin"), m.det_margin);
        margins.insert(format!("member{i}.eigenvalue_gap"), m.eigenvalue_gap);
    }
}

fn first_rate_violation(rates: &RateSequence, bound: f64) -> Option<(usize, f64)> {
    rates
        .values
        .iter()
        .enumerate()
        .find(|(_, &b)| b > bound * (1.0 + 1e-9) + 1e-9)
        .map(|(k, &b)| (k + 1, b))
}

pub fn classify_with(set: &MatrixSet, opts: &ClassifyOptions) -> Result<Verdict> {
    let structure = analyze(set);
    let cfg = SearchConfig {
        depth: opts.depth,
        budget: opts.budget,
        mode: opts.enumeration,
    };
    let (jsr, rates) = jsr_bounds_with_rates(set, &cfg)?;
    let jsr_exact = structure.common_eigenvector.map(|_| {
        set.members()
            .iter()
            .map(spectral_radius)
            .fold(0.0, f64::max)
    });
    let band = opts.band.unwrap_or(if jsr_exact.is_some() {
        TRIANGULAR_BAND
    } else {
        DEFAULT_BAND
    });
    if !(band > 0.0 && band.is_finite()) {
        return Err(Error::InvalidArgument(format!("band must be positive, got {band}")));
    }

    let mut margins = BTreeMap::new();
    record_structure_margins(&structure, &mut margins);
    let (lower, upper) = jsr_exact.map_or((jsr.lower, jsr.upper), |r| (r, r));
    margins.insert("jsr_lower_minus_one".into(), lower - 1.0);
    margins.insert("jsr_upper_minus_one".into(), upper - 1.0);

    let mut verdict = Verdict {
        regime: Regime::Inconclusive,
        jsr,
        jsr_exact,
        band,
        rates,
        structure,
        certificate: None,
        witness: None,
        linear_ceiling: None,
        margins,
        notes: Vec::new(),
    };

    if opts.assert_unit_jsr {
        verdict.notes.push("unit joint spectral radius asserted by caller".into());
    } else if (lower - 1.0).abs() > band {
        verdict.regime = if upper < 1.0 - band {
            Regime::ExponentiallyStable
        } else if lower > 1.0 + band {
            Regime::ExponentiallyUnstable
        } else {
            verdict.notes.push(format!(
                "bracket [{lower}, {upper}] is too wide to place against 1 ± {band}"
            ));
            Regime::Inconclusive
        };
        return Ok(verdict);
    }

    match marginal_branch(set, &mut verdict, opts) {
        Ok(()) => {}
        Err(e @ Error::WorkBudgetExceeded { .. }) => return Err(e),
        Err(e) => {
            verdict.regime = Regime::Inconclusive;
            verdict.certificate = None;
            verdict.witness = None;
            verdict.linear_ceiling = None;
            verdict.notes.push(format!("marginal analysis failed: {e}"));
        }
    }
    Ok(verdict)
}

fn marginal_branch(set: &MatrixSet, verdict: &mut Verdict, opts: &ClassifyOptions) -> Result<()> {
    let Some(v1) = verdict.structure.common_eigenvector else {
        let k = kappa_certificate_adaptive(set, opts.kappa_resolution, opts.min_kappa_resolution)?;
        verdict.margins.insert("kappa_lower".into(), k.kappa_lower);
        let cert = Certificate::Kappa(k);
        return accept_stable(verdict, cert);
    };

    if verdict.structure.unit_det_simdiag {
        let p = eigenbasis_for_bdd(set, &verdict.structure, &v1);
        let b = bdd_certificate_in_basis(set, &p)?;
        verdict.margins.insert("bdd_one_minus_lambda".into(), 1.0 - b.lambda);
        return accept_stable(verdict, Certificate::Bdd(b));
    }

    let witness = build_escape_witness(
        set,
        &verdict.structure,
        &opts.root_policy,
        opts.search_cap,
    )?;
    witness.check_structure(set)?;
    if let Some((rk, rl)) = &witness.root_checks {
        verdict.margins.insert("root_margin_first".into(), rk.margin);
        verdict.margins.insert("root_margin_second".into(), rl.margin);
    }
    if let Some(np) = &witness.normalization {
        verdict.margins.insert("normalization_condition".into(), np.conditioning);
    }
    let tri = triangularize_in_basis(set, &v1)?;
    let ceiling = linear_ceiling(&tri.set)?;
    if let Some((n, b)) = verdict
        .rates
        .values
        .iter()
        .enumerate()
        .map(|(k, &b)| (k + 1, b))
        .find(|&(n, b)| b > ceiling.at(n) * (1.0 + 1e-9) + 1e-9)
    {
        return Err(Error::HypothesisViolated(format!(
            "b_{n} = {b} exceeds the linear ceiling {}",
            ceiling.at(n)
        )));
    }
    verdict.notes.extend(witness.warnings.iter().cloned());
    verdict.witness = Some(witness);
    verdict.linear_ceiling = Some(ceiling);
    verdict.regime = Regime::MarginallyUnstable;
    Ok(())
}

fn accept_stable(verdict: &mut Verdict, cert: Certificate) -> Result<()> {
    let bound = cert.product_bound();
    if let Some((n, b)) = first_rate_violation(&verdict.rates, bound) {
        return Err(Error::HypothesisViolated(format!(
            "b_{n} = {b} exceeds the certified bound {bound}"
        )));
    }
    verdict.certificate = Some(cert);
    verdict.regime = Regime::MarginallyStable;
    Ok(())
}
