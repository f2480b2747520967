//! Joint spectral radius brackets and the maximal-product-norm sequence
//! `b_n = max ‖A_{i_n}⋯A_{i_1}‖`, both from plain enumeration of every word.
//!
//! Products are accumulated by left multiplication, so the word
//! `[i_1, …, i_n]` (time order) stands for `A_{i_n}⋯A_{i_1}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{operator_norm, spectral_radius, Mat2, MatrixSet};

pub const DEFAULT_WORK_BUDGET: u64 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Enumeration {
    /// Every word of every length up to the depth.
    #[default]
    Exact,
    /// Drop a prefix once its norm falls below `lower^len`. The lower bound
    /// stays valid; `b_n` and the upper bound become approximate.
    Pruned,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub depth: usize,
    pub budget: u64,
    pub mode: Enumeration,
}

impl SearchConfig {
    pub fn exact(depth: usize) -> Self {
        Self {
            depth,
            budget: DEFAULT_WORK_BUDGET,
            mode: Enumeration::Exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSequence {
    /// `values[n - 1] = b_n`
    pub values: Vec<f64>,
    pub depth: usize,
    pub approximate: bool,
}

impl RateSequence {
    pub fn b(&self, n: usize) -> f64 {
        self.values[n - 1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsrBounds {
    pub lower: f64,
    pub upper: f64,
    pub depth: usize,
    /// Word (time order) whose product attains the lower bound.
    pub witness_word: Vec<usize>,
    /// Length at which the running minimum of `b_n^{1/n}` is attained.
    pub upper_length: usize,
    pub approximate: bool,
}

impl JsrBounds {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Number of matrix products needed to enumerate all words of length
/// `1..=depth` over `n` letters (saturating).
pub fn work_required(n: usize, depth: usize) -> u128 {
    let n = n as u128;
    let mut total: u128 = 0;
    let mut layer: u128 = 1;
    for _ in 0..depth {
        layer = layer.saturating_mul(n);
        total = total.saturating_add(layer);
    }
    total
}

struct Enumerator<'a> {
    members: &'a [Mat2],
    depth: usize,
    prune: bool,
    budget: u64,
    work: u64,
    max_norms: Vec<f64>,
    lower: f64,
    witness: Vec<usize>,
    word: Vec<usize>,
}

impl Enumerator<'_> {
    fn visit(&mut self, prefix: &Mat2) -> Result<()> {
        let len = self.word.len() + 1;
        for (i, a) in self.members.iter().enumerate() {
            self.work += 1;
            if self.work > self.budget {
                return Err(Error::WorkBudgetExceeded {
                    required: u128::from(self.work),
                    budget: self.budget,
                });
            }
            let product = *a * *prefix;
            let norm = operator_norm(&product);
            let slot = &mut self.max_norms[len - 1];
            *slot = slot.max(norm);

            let rho = spectral_radius(&product);
            let rate = if len == 1 {
                rho
            } else {
                rho.powf(1.0 / len as f64)
            };
            self.word.push(i);
            if rate > self.lower {
                self.lower = rate;
                self.witness.clone_from(&self.word);
            }
            let keep = !self.prune || norm >= self.lower.powi(len as i32);
            if len < self.depth && keep {
                self.visit(&product)?;
            }
            self.word.pop();
        }
        Ok(())
    }
}

struct Enumerated {
    max_norms: Vec<f64>,
    lower: f64,
    witness: Vec<usize>,
}

fn enumerate(set: &MatrixSet, cfg: &SearchConfig) -> Result<Enumerated> {
    if cfg.depth == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    if cfg.mode == Enumeration::Exact {
        let required = work_required(set.len(), cfg.depth);
        if required > u128::from(cfg.budget) {
            return Err(Error::WorkBudgetExceeded {
                required,
                budget: cfg.budget,
            });
        }
    }
    let mut e = Enumerator {
        members: set.members(),
        depth: cfg.depth,
        prune: cfg.mode == Enumeration::Pruned,
        budget: cfg.budget,
        work: 0,
        max_norms: vec![0.0; cfg.depth],
        lower: 0.0,
        witness: Vec::new(),
        word: Vec::with_capacity(cfg.depth),
    };
    e.visit(&Mat2::identity())?;
    Ok(Enumerated {
        max_norms: e.max_norms,
        lower: e.lower,
        witness: e.witness,
    })
}

pub fn rate_sequence(set: &MatrixSet, cfg: &SearchConfig) -> Result<RateSequence> {
    let e = enumerate(set, cfg)?;
    Ok(RateSequence {
        values: e.max_norms,
        depth: cfg.depth,
        approximate: cfg.mode == Enumeration::Pruned,
    })
}

/// Bracket from one enumeration pass, together with the `b_n` it used.
pub fn jsr_bounds_with_rates(set: &MatrixSet, cfg: &SearchConfig) -> Result<(JsrBounds, RateSequence)> {
    let e = enumerate(set, cfg)?;
    let (upper_length, upper) = e
        .max_norms
        .iter()
        .enumerate()
        .map(|(k, b)| {
            let n = k + 1;
            (n, if n == 1 { *b } else { b.powf(1.0 / n as f64) })
        })
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    let approximate = cfg.mode == Enumeration::Pruned;
    Ok((
        JsrBounds {
            lower: e.lower,
            upper,
            depth: cfg.depth,
            witness_word: e.witness,
            upper_length,
            approximate,
        },
        RateSequence {
            values: e.max_norms,
            depth: cfg.depth,
            approximate,
        },
    ))
}

pub fn jsr_bounds(set: &MatrixSet, cfg: &SearchConfig) -> Result<JsrBounds> {
    Ok(jsr_bounds_with_rates(set, cfg)?.0)
}

/// Gate for the unit-JSR hypothesis: the bracket meets `[1 − band, 1 + band]`
/// and the lower bound does not exceed `1 + band`.
pub fn bracket_admits_unit(bounds: &JsrBounds, band: f64) -> bool {
    bounds.upper >= 1.0 - band && bounds.lower <= 1.0 + band
}

pub fn assert_unit_jsr(set: &MatrixSet, cfg: &SearchConfig, band: f64) -> Result<(bool, JsrBounds)> {
    if band.is_nan() || band <= 0.0 {
        return Err(Error::InvalidArgument(format!("band must be positive, got {band}")));
    }
    let bounds = jsr_bounds(set, cfg)?;
    Ok((bracket_admits_unit(&bounds, band), bounds))
}
