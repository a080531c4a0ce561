use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use qaoa_core::io::{read_problem, to_json};
use qaoa_core::metrics::{
    coarse_ramp_scan, depth_progression_benchmark, fit_exponential_with, time_to_solution_with, BootstrapOptions,
    DepthProgressionResult, ExactExecutor, Executor, RampScan, SamplingExecutor, ScalingFit, TtsMode,
};
use qaoa_core::problem::{gen_labs, gen_random_weighted_maxcut, spectrum_with_limit, Limits, SpinPolynomial};
use qaoa_core::seed::derive_seed;
use qaoa_core::tuner::{
    exact_metrics, run_protocol_with, InitialPoint, OptimizerConfig, ProtocolOptions, ProtocolReport, TransferLibrary,
};
use qaoa_core::{Error, QaoaParameters, Schedule, ScheduleSpec, Simulator};

use crate::args::{
    BenchDepthArgs, Command, EvolveArgs, Family, GenProblem, InitArg, ScaleStudyArgs, ScheduleArg, TuneArgs,
};
use crate::error::{read_json, CliError, Result};
use crate::manifest::RunManifest;

/// One emitted artifact; `path == None` means stdout.
pub struct Output {
    pub path: Option<PathBuf>,
    pub contents: String,
}

#[derive(Serialize)]
struct Payload<'a, T: Serialize> {
    manifest: &'a RunManifest,
    #[serde(flatten)]
    result: &'a T,
}

fn json_payload<T: Serialize>(manifest: &RunManifest, result: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(&Payload { manifest, result })?;
    text.push('\n');
    Ok(text)
}

/// 17 significant digits, so every value round-trips exactly.
fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn load_schedule(arg: &ScheduleArg) -> Result<Schedule> {
    match arg {
        ScheduleArg::Inline(s) => Ok(s.clone()),
        ScheduleArg::FourierFile(path) => {
            #[derive(serde::Deserialize)]
            struct FourierFile {
                u: Vec<f64>,
                v: Vec<f64>,
            }
            let f: FourierFile = read_json(path)?;
            let schedule = Schedule::Fourier { u: f.u, v: f.v };
            schedule.validate()?;
            Ok(schedule)
        }
    }
}

fn load_library(path: Option<&Path>) -> Result<TransferLibrary> {
    Ok(match path {
        Some(p) => TransferLibrary::load(p)?,
        None => TransferLibrary::builtin(),
    })
}

/// The polynomial the circuit actually sees, and the factor its energies
/// must be multiplied by to return to the original units.
fn working_copy(poly: &SpinPolynomial, no_rescale: bool) -> Result<(SpinPolynomial, f64)> {
    if no_rescale {
        Ok((poly.clone(), 1.0))
    } else {
        Ok(poly.rescale()?)
    }
}

pub fn execute(command: &Command, manifest: &RunManifest) -> Result<Vec<Output>> {
    let limits = manifest.limits;
    match command {
        Command::Gen { problem } => generate(problem),
        Command::Evolve(a) => evolve(a, limits, manifest),
        Command::Tune(a) => tune(a, limits, manifest),
        Command::ScaleStudy(a) => scale_study(a, limits, manifest),
        Command::BenchDepth(a) => bench_depth(a, limits, manifest),
        Command::Replay(_) => Err(CliError::Invalid("replay cannot be recorded in a manifest".into())),
    }
}

fn generate(problem: &GenProblem) -> Result<Vec<Output>> {
    let (poly, out) = match problem {
        GenProblem::Labs { n, out } => (gen_labs(*n)?, out),
        GenProblem::RegularMaxcut {
            n,
            degree,
            weights,
            seed,
            out,
        } => (gen_random_weighted_maxcut(*n, *degree, *weights, *seed)?, out),
    };
    let mut contents = to_json(&poly)?;
    contents.push('\n');
    Ok(vec![Output {
        path: Some(out.clone()),
        contents,
    }])
}

#[derive(Serialize)]
struct EvolveRecord {
    label: String,
    num_variables: usize,
    depth: usize,
    parameters_source: String,
    rescaled: bool,
    scale_factor: f64,
    parameters: QaoaParameters,
    /// Original units, offset included.
    energy: f64,
    approximation_ratio: Option<f64>,
    overlap: Option<f64>,
    tts_mode: TtsMode,
    /// `null` when the overlap is zero.
    tts: Option<f64>,
    f_min: Option<f64>,
    f_max: Option<f64>,
    uniform_overlap: Option<f64>,
}

fn evolve(a: &EvolveArgs, limits: Limits, manifest: &RunManifest) -> Result<Vec<Output>> {
    let poly = read_problem(&a.problem)?;
    let (params, source) = match (&a.schedule, &a.params) {
        (Some(s), _) => {
            let p = a.p.ok_or_else(|| CliError::Invalid("--schedule needs --p".into()))?;
            (load_schedule(s)?.parameters(p)?, format!("schedule:{s}:p{p}"))
        }
        (None, Some(path)) => {
            let raw: QaoaParameters = read_json(path)?;
            let params = QaoaParameters::new(raw.gammas, raw.betas)?;
            if let Some(p) = a.p.filter(|&p| p != params.depth()) {
                return Err(CliError::Invalid(format!(
                    "--p {p} but the parameter file has depth {}",
                    params.depth()
                )));
            }
            let name = path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            (params, format!("params:{name}"))
        }
        (None, None) => return Err(CliError::Invalid("give --schedule or --params".into())),
    };
    let scale_factor = poly.scale_factor()?;
    let (working, applied) = working_copy(&poly, a.no_rescale)?;
    let sim = Simulator::with_limit(&working, limits.simulator)?;
    let state = sim.evolve(&params);

    let mut record = EvolveRecord {
        label: poly.label().to_string(),
        num_variables: poly.num_variables(),
        depth: params.depth(),
        parameters_source: source,
        rescaled: !a.no_rescale,
        scale_factor,
        parameters: params,
        energy: sim.energy(&state)? * applied + poly.offset(),
        approximation_ratio: None,
        overlap: None,
        tts_mode: a.tts,
        tts: None,
        f_min: None,
        f_max: None,
        uniform_overlap: None,
    };
    if poly.num_variables() <= limits.brute_force {
        let spectrum = spectrum_with_limit(&poly, limits.brute_force)?;
        let m = exact_metrics(&state, &poly, &spectrum)?;
        record.energy = m.energy;
        record.approximation_ratio = Some(m.approximation_ratio);
        record.overlap = Some(m.overlap);
        record.tts = finite_tts(m.overlap, a.tts)?;
        record.f_min = Some(spectrum.f_min + poly.offset());
        record.f_max = Some(spectrum.f_max + poly.offset());
        record.uniform_overlap = Some(spectrum.uniform_overlap());
    }
    Ok(vec![Output {
        path: a.out.clone(),
        contents: json_payload(manifest, &record)?,
    }])
}

fn finite_tts(overlap: f64, mode: TtsMode) -> Result<Option<f64>> {
    match time_to_solution_with(overlap, mode) {
        Ok(t) => Ok(Some(t)),
        Err(Error::InfiniteTts) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn tune(a: &TuneArgs, limits: Limits, manifest: &RunManifest) -> Result<Vec<Output>> {
    let poly = read_problem(&a.problem)?;
    let init = match &a.init {
        InitArg::Transfer => InitialPoint::Transfer {
            class: a.class.clone(),
            depth: a.p,
        },
        InitArg::Schedule(s) => InitialPoint::Schedule(ScheduleSpec::new(load_schedule(s)?, a.p)),
    };
    let config = OptimizerConfig {
        model: a.model,
        initial_step: a.rhobeg,
        final_step: a.final_step,
        total_shot_budget: a.budget,
        post_stencil_steps: a.steps,
        seed: a.seed,
    };
    let options = ProtocolOptions {
        rescale: !a.no_rescale,
        limits,
        library: load_library(a.library.as_deref())?,
    };
    let report: ProtocolReport = run_protocol_with(&poly, &init, &config, &options)?;
    Ok(vec![Output {
        path: a.out.clone(),
        contents: json_payload(manifest, &report)?,
    }])
}

#[derive(Serialize)]
struct ScaleStudyRecord {
    family: Family,
    p: usize,
    schedule: String,
    /// The scan that picked the ramp, if one ran.
    delta_scan: Option<RampScan>,
    tts_mode: TtsMode,
    /// Mean overlap and uniform-sampling overlap per size.
    overlaps: Vec<SizeSummary>,
    /// `(N, mean TTS)` points given to the fit.
    points: Vec<(usize, f64)>,
    fit: ScalingFit,
}

#[derive(Serialize)]
struct SizeSummary {
    n: usize,
    overlap: f64,
    uniform_overlap: f64,
}

/// Per-instance results at one size.
#[derive(Default)]
struct SizeRuns {
    overlaps: Vec<f64>,
    tts: Vec<Option<f64>>,
    uniform_overlap: f64,
}

fn scale_study(a: &ScaleStudyArgs, limits: Limits, manifest: &RunManifest) -> Result<Vec<Output>> {
    if a.n_min > a.n_max {
        return Err(CliError::Invalid(format!(
            "--n-min {} exceeds --n-max {}",
            a.n_min, a.n_max
        )));
    }
    let instances = match a.family {
        Family::Labs => 1,
        Family::RegularMaxcut => a.instances.max(1),
    };
    let make = |n: usize, i: usize| -> Result<SpinPolynomial> {
        Ok(match a.family {
            Family::Labs => gen_labs(n)?,
            Family::RegularMaxcut => {
                let seed = derive_seed(a.seed, ((n as u64) << 32) | i as u64);
                gen_random_weighted_maxcut(n, a.degree, a.weights, seed)?
            }
        })
    };
    let (schedule, delta_scan) = match &a.schedule {
        Some(s) => (load_schedule(s)?, None),
        None => {
            let n = a.scan_n.unwrap_or(a.n_min);
            let (working, _) = working_copy(&make(n, 0)?, a.no_rescale)?;
            let scan = coarse_ramp_scan(&working, a.p, &a.scan_deltas, a.scan_objective)?;
            (Schedule::Linear { delta: scan.best_delta }, Some(scan))
        }
    };
    let params = schedule.parameters(a.p)?;

    let mut csv = csv::Writer::from_writer(Vec::new());
    csv.write_record(["N", "p", "overlap", "tts", "energy", "ar"])?;
    let mut by_size: BTreeMap<usize, SizeRuns> = BTreeMap::new();
    // no regular graph exists when n·degree is odd
    let sizes: Vec<usize> = (a.n_min..=a.n_max)
        .filter(|n| a.family == Family::Labs || (n * a.degree).is_multiple_of(2))
        .collect();
    for &n in &sizes {
        for i in 0..instances {
            let poly = make(n, i)?;
            let (working, _) = working_copy(&poly, a.no_rescale)?;
            let state = Simulator::with_limit(&working, limits.simulator)?.evolve(&params);
            let spectrum = spectrum_with_limit(&poly, limits.brute_force)?;
            let m = exact_metrics(&state, &poly, &spectrum)?;
            let tts = finite_tts(m.overlap, a.tts)?;
            csv.write_record([
                n.to_string(),
                a.p.to_string(),
                sci(m.overlap),
                sci(tts.unwrap_or(f64::INFINITY)),
                sci(m.energy),
                sci(m.approximation_ratio),
            ])?;
            let entry = by_size.entry(n).or_default();
            entry.overlaps.push(m.overlap);
            entry.tts.push(tts);
            entry.uniform_overlap += spectrum.uniform_overlap() / instances as f64;
        }
    }
    let csv_text = String::from_utf8(csv.into_inner().map_err(|e| CliError::Invalid(e.to_string()))?)
        .expect("csv output is utf-8");

    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let overlaps = by_size
        .iter()
        .map(|(&n, runs)| SizeSummary {
            n,
            overlap: mean(&runs.overlaps),
            uniform_overlap: runs.uniform_overlap,
        })
        .collect();
    // sizes where some instance never reaches the optimum have no finite TTS
    let points: Vec<(usize, f64)> = by_size
        .iter()
        .filter_map(|(&n, runs)| {
            runs.tts
                .iter()
                .copied()
                .collect::<Option<Vec<f64>>>()
                .map(|t| (n, mean(&t)))
        })
        .collect();
    let fit = fit_exponential_with(
        &points,
        &BootstrapOptions {
            resamples: a.resamples,
            confidence: a.confidence,
            seed: a.seed,
        },
    )?;
    let record = ScaleStudyRecord {
        family: a.family,
        p: a.p,
        schedule: schedule.to_string(),
        delta_scan,
        tts_mode: a.tts,
        overlaps,
        points,
        fit,
    };
    Ok(vec![
        Output {
            path: Some(a.out_csv.clone()),
            contents: csv_text,
        },
        Output {
            path: a.out_fit.clone(),
            contents: json_payload(manifest, &record)?,
        },
    ])
}

#[derive(Serialize)]
struct BenchDepthRecord {
    label: String,
    schedule: String,
    executor: &'static str,
    shots: u64,
    rescaled: bool,
    scale_factor: f64,
    n_qubits: usize,
    best_p: usize,
    /// `n_qubits · best_p`.
    product: usize,
    /// Original units, offset included; index = depth.
    energies: Vec<f64>,
}

fn bench_depth(a: &BenchDepthArgs, limits: Limits, manifest: &RunManifest) -> Result<Vec<Output>> {
    let poly = read_problem(&a.problem)?;
    let scale_factor = poly.scale_factor()?;
    let (working, applied) = working_copy(&poly, a.no_rescale)?;
    if working.num_variables() > limits.simulator {
        return Err(Error::ResourceLimit {
            what: "statevector simulation",
            requested: working.num_variables(),
            limit: limits.simulator,
        }
        .into());
    }
    let library = load_library(a.library.as_deref())?;
    let schedule = match &a.schedule {
        InitArg::Transfer => None,
        InitArg::Schedule(s) => Some(load_schedule(s)?),
    };
    let class = a.class.clone().unwrap_or_else(|| poly.class().to_string());
    let params_for_depth = |p: usize| match &schedule {
        Some(s) => s.parameters(p),
        None => library.resolve(&class, p).map(|(params, _)| params),
    };
    let (mut executor, name): (Box<dyn Executor>, _) = if a.shots == 0 {
        (Box::new(ExactExecutor::default()), "exact")
    } else {
        (Box::new(SamplingExecutor::default()), "sampling")
    };
    let result: DepthProgressionResult =
        depth_progression_benchmark(executor.as_mut(), &working, params_for_depth, a.p_max, a.shots, a.seed)?;
    let energies: Vec<f64> = result.energies.iter().map(|e| e * applied + poly.offset()).collect();

    let mut csv = csv::Writer::from_writer(Vec::new());
    csv.write_record(["p", "energy", "improved"])?;
    for (p, e) in energies.iter().enumerate() {
        csv.write_record([p.to_string(), sci(*e), (p >= 1 && p <= result.best_p).to_string()])?;
    }
    let csv_text = String::from_utf8(csv.into_inner().map_err(|e| CliError::Invalid(e.to_string()))?)
        .expect("csv output is utf-8");
    let record = BenchDepthRecord {
        label: poly.label().to_string(),
        schedule: a.schedule.to_string(),
        executor: name,
        shots: a.shots,
        rescaled: !a.no_rescale,
        scale_factor,
        n_qubits: result.n_qubits,
        best_p: result.best_p,
        product: result.product,
        energies,
    };
    Ok(vec![
        Output {
            path: Some(a.out_csv.clone()),
            contents: csv_text,
        },
        Output {
            path: a.out_json.clone(),
            contents: json_payload(manifest, &record)?,
        },
    ])
}
