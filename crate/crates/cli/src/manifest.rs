//! Run manifests: the fully resolved command, the digests of everything it
//! read, and the names of everything it wrote. Replaying a manifest reruns
//! the same command into another directory and must reproduce every output
//! byte for byte.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qaoa_core::problem::Limits;
use qaoa_core::tuner::BUILTIN_LIBRARY_JSON;

use crate::args::Command;
use crate::error::{read, read_json, CliError, Result};

pub const TOOL: &str = "qaoa";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Stand-in path for the transfer library compiled into the binary.
pub const BUILTIN_LIBRARY: &str = "builtin:transfer_library.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    #[serde(flatten)]
    pub command: Command,
    pub limits: Limits,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<InputDigest>,
    /// Output file names, relative to the directory of the first output.
    pub outputs: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn file_name(path: &Path) -> Result<String> {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .ok_or_else(|| CliError::Invalid(format!("output path `{}` has no file name", path.display())))
}

/// Where the manifest of a run writing `primary` goes: `dir/stem.manifest.json`.
pub fn manifest_path(primary: &Path) -> PathBuf {
    primary.with_extension("manifest.json")
}

impl RunManifest {
    /// Resolves input paths to absolute ones, hashes them and records the
    /// command with output paths reduced to bare file names.
    pub fn build(command: &mut Command, limits: Limits) -> Result<Self> {
        command.materialize_defaults();
        let mut inputs = Vec::new();
        for (role, path) in command.inputs_mut() {
            let absolute = std::fs::canonicalize(&*path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            *path = absolute;
            inputs.push(InputDigest {
                role: role.to_string(),
                path: path.display().to_string(),
                sha256: sha256_hex(&read(path)?),
            });
        }
        if command.uses_builtin_library() {
            inputs.push(InputDigest {
                role: "library".into(),
                path: BUILTIN_LIBRARY.into(),
                sha256: sha256_hex(BUILTIN_LIBRARY_JSON.as_bytes()),
            });
        }
        let mut recorded = command.clone();
        let outputs = recorded
            .outputs_mut()
            .into_iter()
            .map(|p| {
                let name = file_name(p)?;
                *p = PathBuf::from(&name);
                Ok(name)
            })
            .collect::<Result<Vec<_>>>()?;
        let seeds = command.seeds().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        Ok(Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: recorded,
            limits,
            seeds,
            inputs,
            outputs,
        })
    }

    /// Reads a manifest file, or the manifest embedded in a JSON result.
    pub fn load(path: &Path) -> Result<Self> {
        let value: serde_json::Value = read_json(path)?;
        let value = match value.get("manifest") {
            Some(inner) => inner.clone(),
            None => value,
        };
        let manifest: RunManifest = serde_json::from_value(value).map_err(|source| CliError::Parse {
            path: path.into(),
            source,
        })?;
        if manifest.tool != TOOL {
            return Err(CliError::Invalid(format!(
                "manifest was written by `{}`, not `{TOOL}`",
                manifest.tool
            )));
        }
        if manifest.version != VERSION {
            return Err(CliError::Invalid(format!(
                "manifest was written by {TOOL} {}; this is {VERSION}",
                manifest.version
            )));
        }
        Ok(manifest)
    }

    /// Checks that every recorded input still has its recorded digest.
    pub fn verify_inputs(&self) -> Result<()> {
        for input in &self.inputs {
            let actual = if input.path == BUILTIN_LIBRARY {
                sha256_hex(BUILTIN_LIBRARY_JSON.as_bytes())
            } else {
                sha256_hex(&read(Path::new(&input.path))?)
            };
            if actual != input.sha256 {
                return Err(CliError::DigestMismatch {
                    path: input.path.clone(),
                    expected: input.sha256.clone(),
                    actual,
                });
            }
        }
        Ok(())
    }

    /// The recorded command with its outputs placed in `out_dir`.
    pub fn command_in(&self, out_dir: &Path) -> Command {
        let mut command = self.command.clone();
        for p in command.outputs_mut() {
            *p = out_dir.join(&*p);
        }
        command
    }
}
