//! Solution-quality metrics, scaling fits and the depth-progression benchmark.

mod depth;
mod scaling;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use depth::{depth_progression_benchmark, DepthProgressionResult, ExactExecutor, Executor, SamplingExecutor};
pub use scaling::{
    coarse_ramp_scan, fit_exponential, fit_exponential_with, tts_points, BootstrapOptions, RampScan, RampScanPoint,
    ScalingFit, ScanObjective,
};

/// `(E - f_max) / (f_min - f_max)`: 1 at the optimum, 0 at the worst state.
pub fn approximation_ratio(energy: f64, f_min: f64, f_max: f64) -> Result<f64> {
    if f_min == f_max {
        return Err(Error::DegenerateSpectrum(f_min));
    }
    if f_min > f_max {
        return Err(Error::invalid(format!("f_min {f_min} exceeds f_max {f_max}")));
    }
    Ok((energy - f_max) / (f_min - f_max))
}

/// How many repetitions count as "solved".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TtsMode {
    /// Expected repetitions until the first optimal sample, `1 / overlap`.
    #[default]
    Expected,
    /// Repetitions for 99% success probability, `ln 0.01 / ln(1 - overlap)`
    /// (1 when the overlap is 1).
    Confidence99,
}

impl std::str::FromStr for TtsMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "expected" => Ok(TtsMode::Expected),
            "confidence99" => Ok(TtsMode::Confidence99),
            other => Err(Error::invalid(format!(
                "unknown TTS mode `{other}` (expected or confidence99)"
            ))),
        }
    }
}

/// Time-to-solution, in state preparations, for a given ground-state overlap.
pub fn time_to_solution(overlap: f64) -> Result<f64> {
    time_to_solution_with(overlap, TtsMode::Expected)
}

pub fn time_to_solution_with(overlap: f64, mode: TtsMode) -> Result<f64> {
    if overlap == 0.0 {
        return Err(Error::InfiniteTts);
    }
    if !(overlap > 0.0 && overlap <= 1.0 + 1e-12) {
        return Err(Error::invalid(format!("overlap {overlap} outside (0, 1]")));
    }
    Ok(match mode {
        TtsMode::Expected => 1.0 / overlap,
        TtsMode::Confidence99 if overlap >= 1.0 => 1.0,
        TtsMode::Confidence99 => 0.01f64.ln() / (1.0 - overlap).ln(),
    })
}
