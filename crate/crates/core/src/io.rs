//! Problem file format.
//!
//! ```json
//! {"n": 3, "label": "maxcut", "offset": 0.0, "terms": [[[0, 1], 1.0], [[1, 2], 1.0]]}
//! ```
//!
//! `terms` is a list of `[variables, weight]` pairs. Files are merged into
//! canonical form on load, so a write/read round trip is the identity on
//! canonical polynomials.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::problem::SpinPolynomial;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub n: usize,
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub offset: f64,
    pub terms: Vec<(Vec<usize>, f64)>,
}

impl From<&SpinPolynomial> for ProblemFile {
    fn from(poly: &SpinPolynomial) -> Self {
        Self {
            n: poly.num_variables(),
            label: poly.label().to_string(),
            offset: poly.offset(),
            terms: poly
                .terms()
                .iter()
                .map(|t| (t.variables().to_vec(), t.weight()))
                .collect(),
        }
    }
}

impl TryFrom<ProblemFile> for SpinPolynomial {
    type Error = crate::Error;

    fn try_from(file: ProblemFile) -> Result<Self> {
        Ok(SpinPolynomial::new(file.n, file.terms, file.label)?.with_offset(file.offset))
    }
}

pub fn to_json(poly: &SpinPolynomial) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ProblemFile::from(poly))?)
}

pub fn from_json(text: &str) -> Result<SpinPolynomial> {
    let file: ProblemFile = serde_json::from_str(text)?;
    file.try_into()
}

pub fn write_problem(path: impl AsRef<Path>, poly: &SpinPolynomial) -> Result<()> {
    let mut text = to_json(poly)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_problem(path: impl AsRef<Path>) -> Result<SpinPolynomial> {
    from_json(&fs::read_to_string(path)?)
}
