use std::fmt::Write as _;

use planar_switching::certificates::LinearCeiling;
use planar_switching::trajectory::CorollaryReport;
use planar_switching::{Certificate, EscapeWitness, GrowthReport, JsrBounds, Regime, Verdict};
use serde::{Deserialize, Serialize};

use crate::input::{ForcedRoot, InputDocument};

pub const SCHEMA_VERSION: u32 = 1;

/// Options after merging the document with command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub tol: f64,
    pub q_max: u32,
    pub depth: usize,
    pub band: Option<f64>,
    pub steps: usize,
    pub assert_unit_jsr: bool,
    pub forced_roots: Vec<ForcedRoot>,
    pub forced_irrational: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EscapeSummary {
    pub witness: EscapeWitness,
    pub steps: usize,
    /// Greedy `(m, n)` choices realized within the simulated horizon.
    pub realized_steps: Vec<(u64, u64)>,
    pub final_norm: f64,
    /// Smallest `‖v_n‖/n` over the last quarter of the run.
    pub tail_min_ratio: f64,
    pub max_ceiling_excess: f64,
    pub growth: GrowthReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatesSummary {
    pub rho_hat: f64,
    pub rho_source: String,
    pub jsr: JsrBounds,
    pub corollary: Option<CorollaryReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundSummary {
    pub regime: Regime,
    pub certificate: Option<Certificate>,
    pub linear_ceiling: Option<LinearCeiling>,
    /// `max_n b_n` over the enumerated depth.
    pub max_rate: f64,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub command: String,
    pub input: InputDocument,
    pub settings: Settings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jsr: Option<JsrBounds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub escape: Option<EscapeSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<RatesSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundSummary>,
}

impl ReportDocument {
    pub fn new(command: &str, input: InputDocument, settings: Settings) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            input,
            settings,
            verdict: None,
            jsr: None,
            escape: None,
            rates: None,
            bound: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// `n, ‖v_n‖, ‖v_n‖/n` for `n = 0..=T`; the ratio is blank at `n = 0`.
pub fn trajectory_csv(norms: &[f64]) -> String {
    let mut out = String::from("n,norm,norm_over_n\n");
    for (n, &v) in norms.iter().enumerate() {
        let ratio = if n == 0 { String::new() } else { num(v / n as f64) };
        let _ = writeln!(out, "{n},{},{ratio}", num(v));
    }
    out
}

/// `n, b_n, b_n/ϱ̂ⁿ, b_n/(nϱ̂ⁿ)`, with the proxy recorded in a comment header.
pub fn rates_csv(rates: &[f64], rho_hat: f64, jsr: &JsrBounds) -> String {
    let mut out = format!(
        "# rho_hat={} (jsr upper bound at depth {}); jsr_lower={}\n",
        num(rho_hat),
        jsr.depth,
        num(jsr.lower)
    );
    out.push_str("n,b_n,b_n_over_rho_n,b_n_over_n_rho_n\n");
    for (k, &b) in rates.iter().enumerate() {
        let n = k + 1;
        let scaled = b / rho_hat.powi(n as i32);
        let _ = writeln!(out, "{n},{},{},{}", num(b), num(scaled), num(scaled / n as f64));
    }
    out
}
