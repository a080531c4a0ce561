//! End-to-end tuning protocol: rescale, initialise, configure, allocate, optimize.

use serde::{Deserialize, Serialize};

use super::{allocate_shots, trust_region_minimize, EvaluationLedger, OptimizerConfig, ShotPlan, TransferLibrary};
use crate::error::Result;
use crate::metrics::approximation_ratio;
use crate::problem::{spectrum_with_limit, Limits, Spectrum, SpinPolynomial};
use crate::schedules::ScheduleSpec;
use crate::simulator::{energy, estimate_energy, ground_state_overlap, sample, QaoaParameters, Simulator, StateVector};

/// Where the initial angles come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialPoint {
    /// Library lookup for `class` (default: the problem's own class) at `depth`.
    Transfer {
        class: Option<String>,
        depth: usize,
    },
    Schedule(ScheduleSpec),
    Explicit(QaoaParameters),
}

#[derive(Debug, Clone)]
pub struct ProtocolOptions {
    /// Divide the cost by its scaling factor before tuning.
    pub rescale: bool,
    pub limits: Limits,
    pub library: TransferLibrary,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        Self {
            rescale: true,
            limits: Limits::default(),
            library: TransferLibrary::builtin(),
        }
    }
}

/// Exact quality of a parameter point, in the original (unrescaled) cost
/// units with the offset added back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactMetrics {
    pub energy: f64,
    pub approximation_ratio: f64,
    pub overlap: f64,
}

/// Exact metrics of `state` against `spectrum` (the spectrum of `poly`
/// without its offset; `state` may come from a rescaled copy of `poly`).
pub fn exact_metrics(state: &StateVector, poly: &SpinPolynomial, spectrum: &Spectrum) -> Result<ExactMetrics> {
    let energy = energy(state, spectrum)?;
    Ok(ExactMetrics {
        energy: energy + poly.offset(),
        approximation_ratio: approximation_ratio(energy, spectrum.f_min, spectrum.f_max)?,
        overlap: ground_state_overlap(state, spectrum)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub label: String,
    pub num_variables: usize,
    pub depth: usize,
    /// Scaling factor of the cost function (reported even when not applied).
    pub scale_factor: f64,
    pub rescaled: bool,
    pub init_source: String,
    pub config: OptimizerConfig,
    pub shot_plan: ShotPlan,
    pub initial_parameters: QaoaParameters,
    pub final_parameters: QaoaParameters,
    /// Ledger energies are in the units the optimizer saw (rescaled when
    /// `rescaled` is true, offset excluded).
    pub initial_estimated_energy: f64,
    pub final_estimated_energy: f64,
    pub f_min: Option<f64>,
    pub f_max: Option<f64>,
    pub initial_exact: Option<ExactMetrics>,
    pub final_exact: Option<ExactMetrics>,
    /// Set when the returned point is not better than the start: exact
    /// energy went up, or (without exact metrics) the start stayed best.
    pub no_improvement_found: bool,
    pub ledger: EvaluationLedger,
}

pub fn run_protocol(poly: &SpinPolynomial, init: &InitialPoint, config: &OptimizerConfig) -> Result<ProtocolReport> {
    run_protocol_with(poly, init, config, &ProtocolOptions::default())
}

pub fn run_protocol_with(
    poly: &SpinPolynomial,
    init: &InitialPoint,
    config: &OptimizerConfig,
    options: &ProtocolOptions,
) -> Result<ProtocolReport> {
    // a) rescale
    let scale_factor = poly.scale_factor()?;
    let working = if options.rescale {
        poly.rescale()?.0
    } else {
        poly.clone()
    };

    // b) initial parameters
    let (start, init_source) = match init {
        InitialPoint::Transfer { class, depth } => {
            let class = class.as_deref().unwrap_or(poly.class());
            options.library.resolve(class, *depth)?
        }
        InitialPoint::Schedule(spec) => (
            spec.schedule.parameters(spec.depth)?,
            format!("schedule:{}:p{}", spec.schedule, spec.depth),
        ),
        InitialPoint::Explicit(params) => (params.clone(), "explicit".to_string()),
    };

    // c) + d) optimizer configuration and shot plan
    let shot_plan = allocate_shots(config, start.depth())?;
    let sim = Simulator::with_limit(&working, options.limits.simulator)?;
    let objective = |params: &QaoaParameters, req: super::EvaluationRequest| {
        let state = sim.evolve(params);
        estimate_energy(&sample(&state, req.shots, req.seed)?, &working)
    };
    let (best, ledger) = trust_region_minimize(objective, &start, config)?;

    let exact_spectrum = if poly.num_variables() <= options.limits.brute_force {
        Some(spectrum_with_limit(poly, options.limits.brute_force)?)
    } else {
        None
    };
    let exact = |params: &QaoaParameters, spec: &Spectrum| exact_metrics(&sim.evolve(params), poly, spec);
    let (initial_exact, final_exact) = match &exact_spectrum {
        Some(spec) if spec.f_min < spec.f_max => (Some(exact(&start, spec)?), Some(exact(&best, spec)?)),
        _ => (None, None),
    };
    let no_improvement_found = match (&initial_exact, &final_exact) {
        (Some(a), Some(b)) => b.energy > a.energy,
        _ => ledger.best_index == 0,
    };

    Ok(ProtocolReport {
        label: poly.label().to_string(),
        num_variables: poly.num_variables(),
        depth: start.depth(),
        scale_factor,
        rescaled: options.rescale,
        init_source,
        config: config.clone(),
        shot_plan,
        initial_estimated_energy: ledger.records[0].estimated_energy,
        final_estimated_energy: ledger.best().expect("nonempty ledger").estimated_energy,
        f_min: exact_spectrum.as_ref().map(|s| s.f_min + poly.offset()),
        f_max: exact_spectrum.as_ref().map(|s| s.f_max + poly.offset()),
        initial_exact,
        final_exact,
        no_improvement_found,
        initial_parameters: start,
        final_parameters: best,
        ledger,
    })
}
