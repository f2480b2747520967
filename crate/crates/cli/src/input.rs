//! Input document: matrices as nested `[re, im]` pairs plus analysis options.
//!
//! ```json
//! {
//!   "matrices": [ [[[1, 0], [1, 0]], [[0, 0], [1, 0]]] ],
//!   "options": { "depth": 10, "forced_roots": [{ "index": 0, "order": 4 }] }
//! }
//! ```

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use planar_switching::structure::{RootAnnotation, RootPolicy};
use planar_switching::{Complex, Mat2, MatrixSet, Tolerance};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// A complex entry written as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "[f64; 2]")]
pub struct Entry(pub [f64; 2]);

impl TryFrom<Vec<f64>> for Entry {
    type Error = String;

    fn try_from(v: Vec<f64>) -> Result<Self, String> {
        match v.as_slice() {
            &[re, im] => Ok(Entry([re, im])),
            _ => Err(format!("expected [re, im], got {} numbers", v.len())),
        }
    }
}

impl From<Entry> for [f64; 2] {
    fn from(e: Entry) -> Self {
        e.0
    }
}

/// One matrix: rows of entries.
pub type MatrixEntries = [[Entry; 2]; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcedRoot {
    pub index: usize,
    pub order: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assert_unit_jsr: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub forced_roots: Vec<ForcedRoot>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub forced_irrational: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDocument {
    pub matrices: Vec<MatrixEntries>,
    #[serde(default)]
    pub options: InputOptions,
}

pub fn parse_document(text: &str) -> Result<InputDocument, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: InputDocument = serde_path_to_error::deserialize(de).map_err(|e| {
        CliError::Input(format!("at `{}`: {}", e.path(), e.inner()))
    })?;
    validate(&doc)?;
    Ok(doc)
}

pub fn read_document(path: Option<&Path>) -> Result<InputDocument, CliError> {
    let text = match path {
        Some(p) if p != Path::new("-") => std::fs::read_to_string(p)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", p.display())))?,
        _ => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| CliError::Input(format!("cannot read standard input: {e}")))?;
            s
        }
    };
    parse_document(&text)
}

fn validate(doc: &InputDocument) -> Result<(), CliError> {
    if doc.matrices.is_empty() {
        return Err(CliError::Input("`matrices` must contain at least one matrix".into()));
    }
    for (k, m) in doc.matrices.iter().enumerate() {
        for (r, row) in m.iter().enumerate() {
            for (c, entry) in row.iter().enumerate() {
                if !entry.0.iter().all(|x| x.is_finite()) {
                    return Err(CliError::Input(format!(
                        "at `matrices[{k}][{r}][{c}]`: entries must be finite"
                    )));
                }
            }
        }
    }
    let n = doc.matrices.len();
    for f in &doc.options.forced_roots {
        if f.index >= n {
            return Err(CliError::Input(format!(
                "forced root refers to matrix {} but only {n} given",
                f.index
            )));
        }
        if f.order < 1 {
            return Err(CliError::Input("forced root order must be at least 1".into()));
        }
    }
    if let Some(&i) = doc.options.forced_irrational.iter().find(|&&i| i >= n) {
        return Err(CliError::Input(format!(
            "forced irrational refers to matrix {i} but only {n} given"
        )));
    }
    Ok(())
}

pub fn to_mat2(m: &MatrixEntries) -> Mat2 {
    let z = |e: Entry| Complex::new(e.0[0], e.0[1]);
    Mat2::new(z(m[0][0]), z(m[0][1]), z(m[1][0]), z(m[1][1]))
}

pub fn build_set(doc: &InputDocument, tol: f64) -> Result<MatrixSet, CliError> {
    let tol = Tolerance::new(tol).map_err(|e| CliError::Input(e.to_string()))?;
    MatrixSet::new(doc.matrices.iter().map(to_mat2).collect(), tol)
        .map_err(|e| CliError::Input(e.to_string()))
}

pub fn root_policy(q_max: u32, tol: f64, roots: &[ForcedRoot], irrational: &[usize]) -> RootPolicy {
    let mut forced = BTreeMap::new();
    for &i in irrational {
        forced.insert(i, RootAnnotation::NotRoot);
    }
    for f in roots {
        forced.insert(f.index, RootAnnotation::Root(f.order));
    }
    RootPolicy { q_max, tol, forced }
}
