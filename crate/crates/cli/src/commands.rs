use planar_switching::escape::SequenceKind;
use planar_switching::spectral::{jsr_bounds_with_rates, DEFAULT_WORK_BUDGET};
use planar_switching::trajectory::CorollaryOptions;
use planar_switching::{
    classify_growth, classify_with, corollary_check, operator_norm, simulate, ClassifyOptions,
    Error as CoreError, MatrixSet, Regime, SearchConfig, Verdict,
};

use crate::input::{build_set, root_policy, ForcedRoot, InputDocument};
use crate::report::{BoundSummary, EscapeSummary, RatesSummary, ReportDocument, Settings};
use crate::{exit, CliError};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_Q_MAX: u32 = 4096;
pub const DEFAULT_DEPTH: usize = 8;
pub const DEFAULT_STEPS: usize = 1000;

/// Command-line values that take precedence over the document's options.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub q_max: Option<u32>,
    pub depth: Option<usize>,
    pub band: Option<f64>,
    pub steps: Option<usize>,
    pub assert_unit_jsr: bool,
    pub forced_roots: Vec<ForcedRoot>,
    pub forced_irrational: Vec<usize>,
}

pub fn resolve(doc: &InputDocument, o: &Overrides) -> Result<Settings, CliError> {
    let opts = &doc.options;
    let mut forced_roots = opts.forced_roots.clone();
    forced_roots.extend(o.forced_roots.iter().cloned());
    let mut forced_irrational = opts.forced_irrational.clone();
    forced_irrational.extend(o.forced_irrational.iter().copied());
    let n = doc.matrices.len();
    if let Some(f) = forced_roots.iter().find(|f| f.index >= n || f.order < 1) {
        return Err(CliError::Input(format!(
            "--force-root {} {} does not fit a set of {n} matrices",
            f.index, f.order
        )));
    }
    if let Some(i) = forced_irrational.iter().find(|&&i| i >= n) {
        return Err(CliError::Input(format!(
            "--force-irrational {i} does not fit a set of {n} matrices"
        )));
    }
    let s = Settings {
        tol: o.tol.or(opts.tol).unwrap_or(DEFAULT_TOL),
        q_max: o.q_max.or(opts.q_max).unwrap_or(DEFAULT_Q_MAX),
        depth: o.depth.or(opts.depth).unwrap_or(DEFAULT_DEPTH),
        band: o.band.or(opts.band),
        steps: o.steps.or(opts.steps).unwrap_or(DEFAULT_STEPS),
        assert_unit_jsr: o.assert_unit_jsr || opts.assert_unit_jsr.unwrap_or(false),
        forced_roots,
        forced_irrational,
    };
    if !(s.tol > 0.0 && s.tol < 1.0) {
        return Err(CliError::Input(format!("tolerance must lie in (0, 1), got {}", s.tol)));
    }
    if s.depth < 1 {
        return Err(CliError::Input("depth must be at least 1".into()));
    }
    if s.q_max < 1 {
        return Err(CliError::Input("qmax must be at least 1".into()));
    }
    if let Some(b) = s.band {
        if !(b > 0.0 && b.is_finite()) {
            return Err(CliError::Input(format!("band must be positive, got {b}")));
        }
    }
    Ok(s)
}

/// Report, optional CSV table and exit code of one command.
pub struct Outcome {
    pub report: ReportDocument,
    pub csv: Option<String>,
    pub code: i32,
}

pub fn regime_exit_code(regime: Regime) -> i32 {
    match regime {
        Regime::ExponentiallyStable | Regime::MarginallyStable => exit::STABLE,
        Regime::ExponentiallyUnstable | Regime::MarginallyUnstable => exit::UNSTABLE,
        Regime::Inconclusive => exit::INCONCLUSIVE,
    }
}

fn classify_options(s: &Settings) -> ClassifyOptions {
    let mut opts = ClassifyOptions::new(s.depth);
    opts.band = s.band;
    opts.assert_unit_jsr = s.assert_unit_jsr;
    opts.root_policy = root_policy(s.q_max, s.tol, &s.forced_roots, &s.forced_irrational);
    opts
}

fn run_classifier(set: &MatrixSet, s: &Settings) -> Result<Verdict, CliError> {
    Ok(classify_with(set, &classify_options(s))?)
}

pub fn classify(doc: InputDocument, s: Settings) -> Result<Outcome, CliError> {
    let set = build_set(&doc, s.tol)?;
    let verdict = run_classifier(&set, &s)?;
    let code = regime_exit_code(verdict.regime);
    let mut report = ReportDocument::new("classify", doc, s);
    report.verdict = Some(verdict);
    Ok(Outcome { report, csv: None, code })
}

pub fn jsr(doc: InputDocument, s: Settings) -> Result<Outcome, CliError> {
    let set = build_set(&doc, s.tol)?;
    let (bounds, _) = jsr_bounds_with_rates(&set, &SearchConfig::exact(s.depth))?;
    let mut report = ReportDocument::new("jsr", doc, s);
    report.jsr = Some(bounds);
    Ok(Outcome { report, csv: None, code: exit::STABLE })
}

pub fn bound(doc: InputDocument, s: Settings) -> Result<Outcome, CliError> {
    let set = build_set(&doc, s.tol)?;
    let v = run_classifier(&set, &s)?;
    let code = regime_exit_code(v.regime);
    let summary = BoundSummary {
        regime: v.regime,
        certificate: v.certificate,
        linear_ceiling: v.linear_ceiling,
        max_rate: v.rates.values.iter().copied().fold(0.0, f64::max),
        notes: v.notes,
    };
    let mut report = ReportDocument::new("bound", doc, s);
    report.bound = Some(summary);
    Ok(Outcome { report, csv: None, code })
}

pub fn rates(doc: InputDocument, s: Settings) -> Result<Outcome, CliError> {
    let set = build_set(&doc, s.tol)?;
    let (bounds, rates) = jsr_bounds_with_rates(&set, &SearchConfig::exact(s.depth))?;
    let rho_hat = bounds.upper;
    let csv = crate::report::rates_csv(&rates.values, rho_hat, &bounds);

    let mut copts = CorollaryOptions::new(s.depth);
    copts.assert_unit = s.assert_unit_jsr;
    copts.budget = DEFAULT_WORK_BUDGET;
    let corollary = if s.depth > copts.n_min {
        match corollary_check(&set, &copts) {
            Ok(r) => Some(r),
            Err(e @ CoreError::WorkBudgetExceeded { .. }) => return Err(e.into()),
            Err(_) => None,
        }
    } else {
        None
    };
    let mut report = ReportDocument::new("rates", doc, s);
    report.rates = Some(RatesSummary {
        rho_hat,
        rho_source: format!("jsr upper bound at depth {}", bounds.depth),
        jsr: bounds,
        corollary,
    });
    Ok(Outcome { report, csv: Some(csv), code: exit::STABLE })
}

pub fn escape(doc: InputDocument, s: Settings) -> Result<Outcome, CliError> {
    if s.steps == 0 {
        return Err(CliError::Input("escape needs at least one step".into()));
    }
    let set = build_set(&doc, s.tol)?;
    let verdict = run_classifier(&set, &s)?;
    if verdict.regime != Regime::MarginallyUnstable {
        let mut why = format!("classified as {:?}", verdict.regime);
        for note in &verdict.notes {
            why.push_str("; ");
            why.push_str(note);
        }
        return Err(CoreError::NotMarginallyUnstable(why).into());
    }
    let Some(witness) = verdict.witness else {
        return Err(CoreError::NotMarginallyUnstable("no escape witness was produced".into()).into());
    };

    let traj = simulate(&set, &witness.sequence, &witness.v0, s.steps)?;
    let realized_steps = match &witness.sequence.kind {
        SequenceKind::Greedy { rule } => rule.expand(s.steps)?.state.step_log,
        _ => Vec::new(),
    };
    let slope = set.members().iter().map(operator_norm).fold(0.0, f64::max);
    let v0_norm = witness.v0.norm();
    let max_ceiling_excess = traj
        .norms
        .iter()
        .enumerate()
        .map(|(n, &x)| x - (1.0 + n as f64 * slope) * v0_norm)
        .fold(f64::NEG_INFINITY, f64::max);
    let tail_from = (3 * s.steps / 4).max(1);
    let tail_min_ratio = (tail_from..=s.steps)
        .map(|n| traj.norms[n] / n as f64)
        .fold(f64::INFINITY, f64::min);
    let growth = classify_growth(&traj, 0.25);
    let csv = crate::report::trajectory_csv(&traj.norms);

    let steps = s.steps;
    let mut report = ReportDocument::new("escape", doc, s);
    report.escape = Some(EscapeSummary {
        witness,
        steps,
        realized_steps,
        final_norm: traj.norms[steps],
        tail_min_ratio,
        max_ceiling_excess,
        growth,
    });
    Ok(Outcome { report, csv: Some(csv), code: exit::STABLE })
}
