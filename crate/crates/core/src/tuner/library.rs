//! Transferred parameters, keyed by problem class and depth.
//!
//! The built-in library (`data/transfer_library.json`) holds angles in
//! rescaled-cost units, averaged over exactly optimized training instances.
//! Regenerate it with `cargo run --release -p qaoa-core --example build_transfer_library`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedules::Schedule;
use crate::simulator::QaoaParameters;

/// The shipped library file, verbatim.
pub const BUILTIN_LIBRARY_JSON: &str = include_str!("../../data/transfer_library.json");

/// Used when the library has no entry for a (class, depth) pair.
pub const FALLBACK_SCHEDULE: Schedule = Schedule::Linear { delta: 0.6 };

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LibraryEntry {
    pub class: String,
    pub p: usize,
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    #[serde(default)]
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferLibrary {
    pub version: u32,
    pub entries: Vec<LibraryEntry>,
}

impl Default for TransferLibrary {
    fn default() -> Self {
        Self::builtin()
    }
}

impl TransferLibrary {
    pub fn builtin() -> Self {
        serde_json::from_str(BUILTIN_LIBRARY_JSON).expect("bundled transfer library parses")
    }

    pub fn empty() -> Self {
        Self {
            version: 1,
            entries: Vec::new(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let lib: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        for e in &lib.entries {
            if e.gammas.len() != e.p || e.betas.len() != e.p {
                return Err(Error::invalid(format!(
                    "library entry {}/p{} has the wrong number of angles",
                    e.class, e.p
                )));
            }
        }
        Ok(lib)
    }

    pub fn lookup(&self, class: &str, p: usize) -> Option<QaoaParameters> {
        self.entries
            .iter()
            .find(|e| e.class == class && e.p == p)
            .map(|e| QaoaParameters {
                gammas: e.gammas.clone(),
                betas: e.betas.clone(),
            })
    }

    /// Library entry if present, else the fallback linear ramp. The string
    /// describes where the parameters came from.
    pub fn resolve(&self, class: &str, p: usize) -> Result<(QaoaParameters, String)> {
        match self.lookup(class, p) {
            Some(params) => Ok((params, format!("transfer:{class}:p{p}"))),
            None => Ok((
                FALLBACK_SCHEDULE.parameters(p)?,
                format!("transfer-fallback:{FALLBACK_SCHEDULE}:p{p}"),
            )),
        }
    }

    pub fn insert(&mut self, entry: LibraryEntry) {
        self.entries.retain(|e| !(e.class == entry.class && e.p == entry.p));
        self.entries.push(entry);
        self.entries.sort_by(|a, b| (&a.class, a.p).cmp(&(&b.class, b.p)));
    }
}
