//! Trajectory simulation, finite-horizon growth labels, and the bounded vs.
//! linear dichotomy for the maximal product norms `b_n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Complex, MatrixSet, Vec2};
use crate::escape::SwitchingSequence;
use crate::spectral::{jsr_bounds_with_rates, Enumeration, SearchConfig, DEFAULT_WORK_BUDGET};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// `‖v_n‖` for `n = 0..=T`; saturates to infinity on overflow.
    pub norms: Vec<f64>,
    /// `ln ‖v_n‖`, always finite unless the vector hits zero.
    pub log_norms: Vec<f64>,
    pub checkpoints: Option<Vec<usize>>,
    pub sequence_used: SwitchingSequence,
    pub v0: Vec2,
    /// Unit vector along `v_T`.
    pub direction: Vec2,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.norms.len() - 1
    }
}

/// Run `v_{n+1} = A_{σ(n+1)} v_n` along explicit member indices. The state is
/// kept as a unit vector and an accumulated log-norm.
pub fn simulate_indices(set: &MatrixSet, indices: &[usize], v0: &Vec2) -> Result<(Vec<f64>, Vec2)> {
    let n0 = v0.norm();
    if !n0.is_finite() || n0 <= 0.0 {
        return Err(Error::InvalidArgument("initial vector must be finite and nonzero".into()));
    }
    let mut logs = Vec::with_capacity(indices.len() + 1);
    let mut dir = v0.scale(Complex::new(1.0 / n0, 0.0));
    let mut log = n0.ln();
    logs.push(log);
    for &i in indices {
        let a = set.get(i)?;
        let w = a.mul_vec(&dir);
        let r = w.norm();
        if r == 0.0 {
            log = f64::NEG_INFINITY;
            logs.push(log);
            continue;
        }
        log += r.ln();
        dir = w.scale(Complex::new(1.0 / r, 0.0));
        logs.push(log);
    }
    Ok((logs, dir))
}

pub fn simulate(set: &MatrixSet, seq: &SwitchingSequence, v0: &Vec2, steps: usize) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::InvalidArgument("trajectory length must be at least 1".into()));
    }
    seq.validate_for(set)?;
    let indices = seq.prefix(steps)?;
    let (log_norms, direction) = simulate_indices(set, &indices, v0)?;
    let checkpoints = seq.checkpoints(steps)?;
    Ok(Trajectory {
        norms: log_norms.iter().map(|l| l.exp()).collect(),
        log_norms,
        checkpoints: (!checkpoints.is_empty()).then_some(checkpoints),
        sequence_used: seq.clone(),
        v0: *v0,
        direction,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrowthClass {
    Bounded,
    Linear,
    Exponential,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthThresholds {
    /// Exponential when the fitted log-norm rise over the tail reaches this.
    pub exp_log_gain: f64,
    /// Exponential when the log-log exponent over the tail reaches this.
    pub exp_power: f64,
    /// Bounded needs `slope · tail_len ≤ this · tail max`.
    pub bounded_rise: f64,
    /// Bounded needs tail max/min at most this (unless decaying).
    pub bounded_ratio: f64,
    /// Linear needs `C/c` at most this, where `‖v_n‖/n ∈ [c, C]`.
    pub linear_ratio: f64,
}

impl Default for GrowthThresholds {
    fn default() -> Self {
        Self {
            exp_log_gain: 5.0,
            exp_power: 2.5,
            bounded_rise: 0.05,
            bounded_ratio: 10.0,
            linear_ratio: 1e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub classification: GrowthClass,
    /// Least-squares slope of `‖v_n‖` against `n` over the tail.
    pub slope: f64,
    pub sup_norm: f64,
    /// `[min, max]` of `‖v_n‖/n` over the tail.
    pub band: (f64, f64),
    /// Least-squares slope of `ln ‖v_n‖` against `n` over the tail.
    pub log_rate: f64,
    /// Least-squares slope of `ln ‖v_n‖` against `ln n` over the tail.
    pub power: f64,
    pub tail_start: usize,
    pub notes: Vec<String>,
}

pub const MIN_GROWTH_SAMPLES: usize = 100;

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

pub fn classify_growth(traj: &Trajectory, tail_fraction: f64) -> GrowthReport {
    classify_growth_with(traj, tail_fraction, &GrowthThresholds::default())
}

pub fn classify_growth_with(traj: &Trajectory, tail_fraction: f64, th: &GrowthThresholds) -> GrowthReport {
    classify_log_norms(&traj.log_norms, tail_fraction, th)
}

/// Growth label from `ln ‖v_n‖`, `n = 0..=T`.
pub fn classify_log_norms(log_norms: &[f64], tail_fraction: f64, th: &GrowthThresholds) -> GrowthReport {
    let total = log_norms.len().saturating_sub(1);
    let sup_norm = log_norms.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)).exp();
    let mut report = GrowthReport {
        classification: GrowthClass::Undetermined,
        slope: f64::NAN,
        sup_norm,
        band: (f64::NAN, f64::NAN),
        log_rate: f64::NAN,
        power: f64::NAN,
        tail_start: 0,
        notes: Vec::new(),
    };
    if total < MIN_GROWTH_SAMPLES {
        report.notes.push(format!(
            "need at least {MIN_GROWTH_SAMPLES} steps, got {total}"
        ));
        return report;
    }
    let f = tail_fraction.clamp(0.01, 1.0);
    let start = ((total as f64 * (1.0 - f)).floor() as usize).max(1);
    report.tail_start = start;
    if log_norms[start..].iter().any(|l| !l.is_finite()) {
        report.notes.push("trajectory reaches zero in the tail".into());
        report.classification = GrowthClass::Bounded;
        report.slope = 0.0;
        return report;
    }
    let ns: Vec<f64> = (start..=total).map(|n| n as f64).collect();
    let logs = &log_norms[start..];
    let len = (total - start) as f64;
    report.log_rate = ls_slope(&ns, logs);
    let log_ns: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    report.power = ls_slope(&log_ns, logs);

    let ratios: Vec<f64> = logs.iter().zip(&log_ns).map(|(l, ln)| (l - ln).exp()).collect();
    report.band = ratios
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));

    if report.log_rate * len >= th.exp_log_gain || report.power >= th.exp_power {
        report.classification = GrowthClass::Exponential;
        return report;
    }
    let norms: Vec<f64> = logs.iter().map(|l| l.exp()).collect();
    report.slope = ls_slope(&ns, &norms);
    let tail_max = norms.iter().fold(0.0f64, |a, &b| a.max(b));
    let tail_min = norms.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let decaying = report.log_rate < 0.0;
    if report.slope * len <= th.bounded_rise * tail_max
        && (tail_max <= th.bounded_ratio * tail_min || decaying)
    {
        report.classification = GrowthClass::Bounded;
        return report;
    }
    let (c, cap) = report.band;
    if report.slope > 0.0 && c > 0.0 && cap <= th.linear_ratio * c {
        report.classification = GrowthClass::Linear;
        return report;
    }
    report.notes.push(format!(
        "no label fits: slope {}, band [{c}, {cap}], log rate {}, power {}",
        report.slope, report.log_rate, report.power
    ));
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Alternative {
    /// `b_n/ϱⁿ` bounded away from zero and infinity.
    Constant,
    /// `b_n/(nϱⁿ)` bounded away from zero and infinity.
    Linear,
    Neither,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorollaryOptions {
    pub depth: usize,
    pub n_min: usize,
    pub band_ratio: f64,
    /// Largest accepted `|d ln s_n / d ln n|` for a sequence to count as flat.
    pub max_exponent: f64,
    /// Use `ϱ = 1` instead of the enumerated lower bound.
    pub assert_unit: bool,
    pub budget: u64,
}

impl CorollaryOptions {
    pub fn new(depth: usize) -> Self {
        Self {
            depth,
            n_min: 4,
            band_ratio: 1e2,
            max_exponent: 0.5,
            assert_unit: false,
            budget: DEFAULT_WORK_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceBand {
    pub min: f64,
    pub max: f64,
    /// Fitted log-log exponent over the window.
    pub exponent: f64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryReport {
    pub rho_hat: f64,
    pub rho_source: String,
    pub window: (usize, usize),
    pub rates: Vec<f64>,
    pub constant: SequenceBand,
    pub linear: SequenceBand,
    pub alternative: Alternative,
}

fn band_of(values: &[f64], ns: &[f64], opts: &CorollaryOptions) -> SequenceBand {
    let min = values.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let max = values.iter().fold(0.0f64, |a, &b| a.max(b));
    let log_ns: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let exponent = ls_slope(&log_ns, &logs);
    SequenceBand {
        min,
        max,
        exponent,
        within: min > 0.0 && max <= opts.band_ratio * min && exponent.abs() < opts.max_exponent,
    }
}

/// Which of `b_n/ϱⁿ` and `b_n/(nϱⁿ)` stays in a positive band over
/// `n ∈ [n_min, depth]`. The proxy `ϱ̂` is the enumerated lower bound (exact
/// when it is attained by a short word), or 1 when asserted.
pub fn corollary_check(set: &MatrixSet, opts: &CorollaryOptions) -> Result<CorollaryReport> {
    if opts.n_min < 1 || opts.depth < opts.n_min + 1 {
        return Err(Error::InvalidArgument(format!(
            "window [{}, {}] needs at least two points",
            opts.n_min, opts.depth
        )));
    }
    let cfg = SearchConfig {
        depth: opts.depth,
        budget: opts.budget,
        mode: Enumeration::Exact,
    };
    let (bounds, rates) = jsr_bounds_with_rates(set, &cfg)?;
    let (rho_hat, rho_source) = if opts.assert_unit {
        (1.0, "asserted".to_string())
    } else {
        (bounds.lower, format!("jsr lower bound at depth {}", opts.depth))
    };
    if rho_hat.is_nan() || rho_hat <= 0.0 {
        return Err(Error::HypothesisViolated(
            "joint spectral radius proxy is zero".into(),
        ));
    }
    let ns: Vec<f64> = (opts.n_min..=opts.depth).map(|n| n as f64).collect();
    let constant: Vec<f64> = ns
        .iter()
        .map(|&n| rates.b(n as usize) / rho_hat.powf(n))
        .collect();
    let linear: Vec<f64> = constant.iter().zip(&ns).map(|(c, n)| c / n).collect();
    let constant = band_of(&constant, &ns, opts);
    let linear = band_of(&linear, &ns, opts);
    let alternative = match (constant.within, linear.within) {
        (true, false) => Alternative::Constant,
        (false, true) => Alternative::Linear,
        (true, true) => Alternative::Both,
        (false, false) => Alternative::Neither,
    };
    Ok(CorollaryReport {
        rho_hat,
        rho_source,
        window: (opts.n_min, opts.depth),
        rates: rates.values,
        constant,
        linear,
        alternative,
    })
}
