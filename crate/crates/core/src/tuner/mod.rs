//! Shot-frugal fine-tuning of QAOA angles.
//!
//! The protocol: rescale the cost function, pick an initial point (transferred
//! parameters or a schedule), run a simple-model trust-region optimizer and
//! spend a fixed shot budget over a small stencil plus a few extra steps.

mod library;
mod protocol;
mod trust_region;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::QaoaParameters;

pub use library::{LibraryEntry, TransferLibrary, BUILTIN_LIBRARY_JSON, FALLBACK_SCHEDULE};
pub use protocol::{
    exact_metrics, run_protocol, run_protocol_with, ExactMetrics, InitialPoint, ProtocolOptions, ProtocolReport,
};
pub use trust_region::{minimize_noiseless, trust_region_minimize, NoiselessResult};

/// Internal model of the trust-region method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Linear interpolation over a simplex (COBYLA-like).
    Linear,
    /// Separable quadratic (gradient + diagonal curvature) fitted to the
    /// evaluated points; an approximation of a full quadratic-model method.
    Quadratic,
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(ModelKind::Linear),
            "quadratic" => Ok(ModelKind::Quadratic),
            other => Err(Error::invalid(format!("unknown model `{other}` (linear or quadratic)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub model: ModelKind,
    /// Initial trust-region radius ("rhobeg"); also the stencil displacement.
    pub initial_step: f64,
    /// Smallest radius the method shrinks to ("rhoend").
    pub final_step: f64,
    pub total_shot_budget: u64,
    /// Optimizer steps after the initial stencil.
    pub post_stencil_steps: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Linear,
            initial_step: 0.1,
            final_step: 1e-3,
            total_shot_budget: 10_000,
            post_stencil_steps: 2,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err(Error::invalid(format!(
                "initial_step must be positive, got {}",
                self.initial_step
            )));
        }
        if !(self.final_step > 0.0 && self.final_step < self.initial_step) {
            return Err(Error::invalid(format!(
                "need 0 < final_step < initial_step, got {} and {}",
                self.final_step, self.initial_step
            )));
        }
        Ok(())
    }
}

/// How a shot budget is split over the evaluations of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotPlan {
    /// Center plus one displacement per coordinate: `2p + 1`.
    pub stencil_size: usize,
    pub total_evaluations: usize,
    pub shots_per_evaluation: u64,
    /// Last evaluation also receives the division remainder.
    pub final_evaluation_shots: u64,
}

impl ShotPlan {
    pub fn shots_for(&self, index: usize) -> u64 {
        if index + 1 == self.total_evaluations {
            self.final_evaluation_shots
        } else {
            self.shots_per_evaluation
        }
    }

    pub fn total_shots(&self) -> u64 {
        self.shots_per_evaluation * (self.total_evaluations as u64 - 1) + self.final_evaluation_shots
    }
}

/// Splits `config.total_shot_budget` evenly over the stencil and the
/// post-stencil steps of a depth-`p` run.
pub fn allocate_shots(config: &OptimizerConfig, p: usize) -> Result<ShotPlan> {
    config.validate()?;
    if p == 0 {
        return Err(Error::invalid("cannot tune a depth-0 circuit"));
    }
    let stencil_size = 2 * p + 1;
    let total_evaluations = stencil_size + config.post_stencil_steps;
    let per = config.total_shot_budget / total_evaluations as u64;
    if per == 0 {
        return Err(Error::invalid(format!(
            "budget of {} shots cannot cover {total_evaluations} evaluations",
            config.total_shot_budget
        )));
    }
    let remainder = config.total_shot_budget % total_evaluations as u64;
    Ok(ShotPlan {
        stencil_size,
        total_evaluations,
        shots_per_evaluation: per,
        final_evaluation_shots: per + remainder,
    })
}

/// Averages optimized angle sets elementwise.
pub fn transfer_parameters(optimized: &[QaoaParameters]) -> Result<QaoaParameters> {
    let first = optimized
        .first()
        .ok_or_else(|| Error::invalid("no parameter sets to transfer"))?;
    let p = first.depth();
    if let Some(bad) = optimized.iter().find(|x| x.depth() != p) {
        return Err(Error::invalid(format!("mixed depths: {p} and {}", bad.depth())));
    }
    let m = optimized.len() as f64;
    let mean = |pick: fn(&QaoaParameters) -> &Vec<f64>| -> Vec<f64> {
        (0..p)
            .map(|j| optimized.iter().map(|x| pick(x)[j]).sum::<f64>() / m)
            .collect()
    };
    Ok(QaoaParameters {
        gammas: mean(|x| &x.gammas),
        betas: mean(|x| &x.betas),
    })
}

/// What the objective is asked to do for one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvaluationRequest {
    pub index: usize,
    pub shots: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub parameters: QaoaParameters,
    pub estimated_energy: f64,
    pub shots: u64,
    pub cumulative_shots: u64,
    pub seed: u64,
}

/// Every evaluation of a run, in order, with the running best.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvaluationLedger {
    pub records: Vec<EvaluationRecord>,
    pub best_index: usize,
}

impl EvaluationLedger {
    pub fn push(&mut self, parameters: QaoaParameters, estimated_energy: f64, shots: u64, seed: u64) {
        let cumulative_shots = self.total_shots() + shots;
        self.records.push(EvaluationRecord {
            parameters,
            estimated_energy,
            shots,
            cumulative_shots,
            seed,
        });
        let last = self.records.len() - 1;
        if estimated_energy < self.records[self.best_index].estimated_energy {
            self.best_index = last;
        }
    }

    pub fn total_shots(&self) -> u64 {
        self.records.last().map_or(0, |r| r.cumulative_shots)
    }

    pub fn best(&self) -> Option<&EvaluationRecord> {
        self.records.get(self.best_index)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}
