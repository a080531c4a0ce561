use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use qaoa_core::metrics::{ScanObjective, TtsMode};
use qaoa_core::problem::WeightDist;
use qaoa_core::tuner::ModelKind;
use qaoa_core::Schedule;

#[derive(Debug, Parser)]
#[command(
    name = "qaoa",
    version,
    about = "QAOA parameter setting: simulate, tune and benchmark"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Everything a run depends on. Serialised into the run manifest, so field
/// names are part of the manifest schema.
#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", content = "config", rename_all = "kebab-case")]
pub enum Command {
    /// Write a problem instance file
    Gen {
        #[command(subcommand)]
        problem: GenProblem,
    },
    /// Evolve a parameter point exactly and report energy, AR and overlap
    Evolve(EvolveArgs),
    /// Fine-tune parameters under a shot budget
    Tune(TuneArgs),
    /// Ground-state overlap / time-to-solution versus problem size, with an exponential fit
    ScaleStudy(ScaleStudyArgs),
    /// Largest depth whose energy keeps improving on the previous one
    BenchDepth(BenchDepthArgs),
    /// Rerun a recorded command from its manifest
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum GenProblem {
    /// Low-autocorrelation binary sequence sidelobe energy
    Labs {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Random weighted regular-graph MaxCut
    RegularMaxcut {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        degree: usize,
        #[arg(long, default_value = "uniform01")]
        weights: WeightDist,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EvolveArgs {
    #[arg(long)]
    pub problem: PathBuf,
    /// Schedule spec, e.g. linear:0.6, root:0.6, tangent:0.6:0.4, fourier:<file>
    #[arg(long, requires = "p", required_unless_present = "params", conflicts_with = "params")]
    pub schedule: Option<ScheduleArg>,
    /// JSON file with explicit `gammas` and `betas`
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub p: Option<usize>,
    /// Simulate the cost function as given instead of rescaling it first
    #[arg(long)]
    pub no_rescale: bool,
    #[arg(long, default_value = "expected")]
    pub tts: TtsMode,
    /// Output file (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct TuneArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long)]
    pub p: usize,
    /// Total shots for the whole optimisation
    #[arg(long, default_value_t = 10_000)]
    pub budget: u64,
    /// Evaluations after the initial stencil
    #[arg(long, default_value_t = 2)]
    pub steps: usize,
    /// `transfer` or a schedule spec
    #[arg(long, default_value = "transfer")]
    pub init: InitArg,
    /// Problem class used for the transfer lookup (default: the problem's own)
    #[arg(long)]
    pub class: Option<String>,
    /// Initial trust-region radius
    #[arg(long, default_value_t = 0.1)]
    pub rhobeg: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub final_step: f64,
    #[arg(long, default_value = "linear")]
    pub model: ModelKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Transfer library file (default: the bundled one)
    #[arg(long)]
    pub library: Option<PathBuf>,
    #[arg(long)]
    pub no_rescale: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Labs,
    RegularMaxcut,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ScaleStudyArgs {
    #[arg(long, value_enum, default_value = "labs")]
    pub family: Family,
    #[arg(long, default_value_t = 6)]
    pub n_min: usize,
    #[arg(long, default_value_t = 13)]
    pub n_max: usize,
    #[arg(long, default_value_t = 8)]
    pub p: usize,
    /// Fixed schedule; when absent a linear ramp is chosen by an overlap scan at `--scan-n`
    #[arg(long)]
    pub schedule: Option<ScheduleArg>,
    /// Size of the instance used for the Δ scan (default: `--n-min`)
    #[arg(long)]
    pub scan_n: Option<usize>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1,1.1,1.2,1.3,1.4,1.5"
    )]
    pub scan_deltas: Vec<f64>,
    /// `overlap` (largest ground-state overlap) or `energy` (lowest expected cost)
    #[arg(long, default_value = "overlap")]
    pub scan_objective: ScanObjective,
    #[arg(long, default_value_t = 3)]
    pub degree: usize,
    #[arg(long, default_value = "uniform01")]
    pub weights: WeightDist,
    /// Random instances per size (regular-maxcut only)
    #[arg(long, default_value_t = 1)]
    pub instances: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub resamples: usize,
    #[arg(long, default_value_t = 0.95)]
    pub confidence: f64,
    #[arg(long, default_value = "expected")]
    pub tts: TtsMode,
    #[arg(long)]
    pub no_rescale: bool,
    /// Per-instance CSV
    #[arg(long)]
    pub out_csv: PathBuf,
    /// Fit record (stdout when absent)
    #[arg(long)]
    pub out_fit: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct BenchDepthArgs {
    #[arg(long)]
    pub problem: PathBuf,
    /// `transfer` or a schedule spec, evaluated at every depth
    #[arg(long, default_value = "linear:0.2")]
    pub schedule: InitArg,
    #[arg(long)]
    pub class: Option<String>,
    #[arg(long, default_value_t = 4)]
    pub p_max: usize,
    /// Shots per depth; 0 uses the exact (noiseless) executor
    #[arg(long, default_value_t = 0)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub library: Option<PathBuf>,
    #[arg(long)]
    pub no_rescale: bool,
    /// Per-depth CSV
    #[arg(long)]
    pub out_csv: PathBuf,
    /// Summary record (stdout when absent)
    #[arg(long)]
    pub out_json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct ReplayArgs {
    /// A `.manifest.json` file, or a JSON result embedding a manifest
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// A schedule given inline, or a Fourier schedule read from a JSON file
/// with `u` and `v` arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ScheduleArg {
    Inline(Schedule),
    FourierFile(PathBuf),
}

impl FromStr for ScheduleArg {
    type Err = qaoa_core::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.strip_prefix("fourier:") {
            Some(rest) if !rest.contains(':') => Ok(ScheduleArg::FourierFile(rest.into())),
            _ => Ok(ScheduleArg::Inline(s.parse()?)),
        }
    }
}

impl fmt::Display for ScheduleArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleArg::Inline(s) => s.fmt(f),
            ScheduleArg::FourierFile(p) => write!(f, "fourier:{}", p.display()),
        }
    }
}

impl From<ScheduleArg> for String {
    fn from(s: ScheduleArg) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for ScheduleArg {
    type Error = qaoa_core::Error;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum InitArg {
    Transfer,
    Schedule(ScheduleArg),
}

impl FromStr for InitArg {
    type Err = qaoa_core::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "transfer" => Ok(InitArg::Transfer),
            _ => Ok(InitArg::Schedule(s.parse()?)),
        }
    }
}

impl fmt::Display for InitArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitArg::Transfer => f.write_str("transfer"),
            InitArg::Schedule(s) => s.fmt(f),
        }
    }
}

impl From<InitArg> for String {
    fn from(s: InitArg) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for InitArg {
    type Error = qaoa_core::Error;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl InitArg {
    pub fn schedule_mut(&mut self) -> Option<&mut ScheduleArg> {
        match self {
            InitArg::Transfer => None,
            InitArg::Schedule(s) => Some(s),
        }
    }
}

impl Command {
    /// Input files by role.
    pub fn inputs_mut(&mut self) -> Vec<(&'static str, &mut PathBuf)> {
        fn fourier<'a>(s: Option<&'a mut ScheduleArg>, out: &mut Vec<(&'static str, &'a mut PathBuf)>) {
            if let Some(ScheduleArg::FourierFile(p)) = s {
                out.push(("schedule", p));
            }
        }
        let mut v = Vec::new();
        match self {
            Command::Gen { .. } | Command::Replay(_) => {}
            Command::Evolve(a) => {
                v.push(("problem", &mut a.problem));
                fourier(a.schedule.as_mut(), &mut v);
                if let Some(p) = a.params.as_mut() {
                    v.push(("params", p));
                }
            }
            Command::Tune(a) => {
                v.push(("problem", &mut a.problem));
                fourier(a.init.schedule_mut(), &mut v);
                if let Some(p) = a.library.as_mut() {
                    v.push(("library", p));
                }
            }
            Command::ScaleStudy(a) => fourier(a.schedule.as_mut(), &mut v),
            Command::BenchDepth(a) => {
                v.push(("problem", &mut a.problem));
                fourier(a.schedule.schedule_mut(), &mut v);
                if let Some(p) = a.library.as_mut() {
                    v.push(("library", p));
                }
            }
        }
        v
    }

    /// Output files; empty means the result goes to stdout.
    pub fn outputs_mut(&mut self) -> Vec<&mut PathBuf> {
        match self {
            Command::Gen { problem } => match problem {
                GenProblem::Labs { out, .. } | GenProblem::RegularMaxcut { out, .. } => vec![out],
            },
            Command::Evolve(a) => a.out.iter_mut().collect(),
            Command::Tune(a) => a.out.iter_mut().collect(),
            Command::ScaleStudy(a) => std::iter::once(&mut a.out_csv).chain(a.out_fit.as_mut()).collect(),
            Command::BenchDepth(a) => std::iter::once(&mut a.out_csv).chain(a.out_json.as_mut()).collect(),
            Command::Replay(_) => Vec::new(),
        }
    }

    /// Whether the bundled transfer library can influence the result.
    pub fn uses_builtin_library(&self) -> bool {
        match self {
            Command::Tune(a) => a.library.is_none() && a.init == InitArg::Transfer,
            Command::BenchDepth(a) => a.library.is_none() && a.schedule == InitArg::Transfer,
            _ => false,
        }
    }

    /// Fills in defaults that depend on other arguments.
    pub fn materialize_defaults(&mut self) {
        if let Command::ScaleStudy(a) = self {
            if a.schedule.is_none() && a.scan_n.is_none() {
                a.scan_n = Some(a.n_min);
            }
        }
    }

    pub fn seeds(&self) -> Vec<(&'static str, u64)> {
        match self {
            Command::Gen {
                problem: GenProblem::RegularMaxcut { seed, .. },
            } => vec![("instance", *seed)],
            Command::Tune(a) => vec![("optimizer", a.seed)],
            Command::ScaleStudy(a) => vec![("study", a.seed)],
            Command::BenchDepth(a) if a.shots > 0 => vec![("sampling", a.seed)],
            _ => Vec::new(),
        }
    }
}
