//! Low-dimensional parameter schedules and depth extension.
//!
//! Ramp-type schedules sample a normalised time `f_j = j / (p + 1)` for
//! `j = 1..=p` (note: not `(j - ½)/p`). Root and tangent schedules replace
//! `f` by `g(f)` in both `γ = Δ g` and `β = Δ (1 - g)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::QaoaParameters;

/// Tangent-schedule constant used when none is given.
pub const DEFAULT_TANGENT_C: f64 = 0.4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    /// `γ = Δ f`, `β = Δ (1 - f)`.
    Linear { delta: f64 },
    /// `γ = a₁ f + a₂`, `β = b₁ (1 - f) + b₂`.
    ExtendedLinear {
        gamma_slope: f64,
        gamma_offset: f64,
        beta_slope: f64,
        beta_offset: f64,
    },
    /// Linear ramp in `√f`: smaller increments late in the schedule.
    Root { delta: f64 },
    /// Linear ramp in a tangent-warped `f`: small steps mid-schedule.
    Tangent { delta: f64, c: f64 },
    /// `γ_j = Σ_k u_k sin((k-½)(j-½)π/p)`, `β_j = Σ_k v_k cos(…)`.
    Fourier { u: Vec<f64>, v: Vec<f64> },
}

/// A schedule together with the depth it is sampled at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub schedule: Schedule,
    pub depth: usize,
}

impl ScheduleSpec {
    pub fn new(schedule: Schedule, depth: usize) -> Self {
        Self { schedule, depth }
    }
}

fn ramp_time(j: usize, p: usize) -> f64 {
    j as f64 / (p + 1) as f64
}

fn tangent_warp(f: f64, c: f64) -> f64 {
    let t = (0.5 / c).tan();
    ((((f - 0.5) / c).tan()) + t) / (2.0 * t)
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        match self {
            Schedule::Tangent { c, .. } if *c == 0.0 => {
                Err(Error::invalid("tangent schedule constant c must be nonzero"))
            }
            Schedule::Fourier { u, v } if u.len() != v.len() => Err(Error::invalid(format!(
                "fourier coefficient lengths differ: {} vs {}",
                u.len(),
                v.len()
            ))),
            Schedule::Fourier { u, .. } if u.is_empty() => {
                Err(Error::invalid("fourier schedule needs at least one frequency"))
            }
            _ => Ok(()),
        }
    }

    /// Samples the schedule at depth `p`.
    pub fn parameters(&self, p: usize) -> Result<QaoaParameters> {
        self.validate()?;
        if p == 0 {
            return Err(Error::invalid("schedule depth must be at least 1"));
        }
        let ramp = |warp: &dyn Fn(f64) -> f64, delta: f64| {
            let (gammas, betas) = (1..=p)
                .map(|j| {
                    let g = warp(ramp_time(j, p));
                    (delta * g, delta * (1.0 - g))
                })
                .unzip();
            QaoaParameters { gammas, betas }
        };
        let params = match self {
            Schedule::Linear { delta } => ramp(&|f| f, *delta),
            Schedule::Root { delta } => ramp(&f64::sqrt, *delta),
            Schedule::Tangent { delta, c } => ramp(&|f| tangent_warp(f, *c), *delta),
            Schedule::ExtendedLinear {
                gamma_slope,
                gamma_offset,
                beta_slope,
                beta_offset,
            } => {
                let (gammas, betas) = (1..=p)
                    .map(|j| {
                        let f = ramp_time(j, p);
                        (gamma_slope * f + gamma_offset, beta_slope * (1.0 - f) + beta_offset)
                    })
                    .unzip();
                QaoaParameters { gammas, betas }
            }
            Schedule::Fourier { u, v } => {
                if u.len() > p {
                    return Err(Error::invalid(format!(
                        "fourier schedule has q = {} frequencies but depth p = {p}",
                        u.len()
                    )));
                }
                let angle = |k: usize, j: usize| (k as f64 - 0.5) * (j as f64 - 0.5) * PI / p as f64;
                let (gammas, betas) = (1..=p)
                    .map(|j| {
                        let g: f64 = u.iter().enumerate().map(|(k, uk)| uk * angle(k + 1, j).sin()).sum();
                        let b: f64 = v.iter().enumerate().map(|(k, vk)| vk * angle(k + 1, j).cos()).sum();
                        (g, b)
                    })
                    .unzip();
                QaoaParameters { gammas, betas }
            }
        };
        Ok(params)
    }
}

/// Samples `spec.schedule` at `spec.depth`.
pub fn to_parameters(spec: &ScheduleSpec) -> Result<QaoaParameters> {
    spec.schedule.parameters(spec.depth)
}

/// INTERP: extends optimized depth-`p` angles to a depth-`p+1` starting point.
///
/// `x'_j = (j-1)/p · x_{j-1} + (p-j+1)/p · x_j` for `j = 1..=p+1`. The
/// out-of-range neighbours `x_0` and `x_{p+1}` only ever carry a zero
/// coefficient and are never read.
pub fn interp_extend(params: &QaoaParameters) -> Result<QaoaParameters> {
    let p = params.depth();
    if p == 0 {
        return Err(Error::invalid("INTERP needs at least one layer"));
    }
    let extend = |x: &[f64]| -> Vec<f64> {
        (1..=p + 1)
            .map(|j| {
                let mut v = 0.0;
                if j > 1 {
                    v += (j - 1) as f64 / p as f64 * x[j - 2];
                }
                if j <= p {
                    v += (p - j + 1) as f64 / p as f64 * x[j - 1];
                }
                v
            })
            .collect()
    };
    Ok(QaoaParameters {
        gammas: extend(&params.gammas),
        betas: extend(&params.betas),
    })
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Linear { delta } => write!(f, "linear:{delta}"),
            Schedule::Root { delta } => write!(f, "root:{delta}"),
            Schedule::Tangent { delta, c } => write!(f, "tangent:{delta}:{c}"),
            Schedule::ExtendedLinear {
                gamma_slope,
                gamma_offset,
                beta_slope,
                beta_offset,
            } => write!(f, "extended:{gamma_slope}:{gamma_offset}:{beta_slope}:{beta_offset}"),
            Schedule::Fourier { u, v } => {
                let join = |x: &[f64]| x.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
                write!(f, "fourier:{}:{}", join(u), join(v))
            }
        }
    }
}

/// Parses `linear:Δ`, `root:Δ`, `tangent:Δ[:c]`, `extended:a1:a2:b1:b2` and
/// inline `fourier:u1,u2,…:v1,v2,…`.
impl FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let kind = parts.next().unwrap_or("");
        let rest: Vec<&str> = parts.collect();
        let num = |t: &str| -> Result<f64> {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad number `{t}` in schedule `{s}`")))
        };
        let list = |t: &str| -> Result<Vec<f64>> { t.split(',').map(num).collect() };
        let arity = |n: usize| -> Result<()> {
            if rest.len() == n {
                Ok(())
            } else {
                Err(Error::invalid(format!(
                    "schedule `{s}` expects {n} field(s) after `{kind}`"
                )))
            }
        };
        let schedule = match kind {
            "linear" => {
                arity(1)?;
                Schedule::Linear { delta: num(rest[0])? }
            }
            "root" => {
                arity(1)?;
                Schedule::Root { delta: num(rest[0])? }
            }
            "tangent" => match rest.len() {
                1 => Schedule::Tangent {
                    delta: num(rest[0])?,
                    c: DEFAULT_TANGENT_C,
                },
                _ => {
                    arity(2)?;
                    Schedule::Tangent {
                        delta: num(rest[0])?,
                        c: num(rest[1])?,
                    }
                }
            },
            "extended" => {
                arity(4)?;
                Schedule::ExtendedLinear {
                    gamma_slope: num(rest[0])?,
                    gamma_offset: num(rest[1])?,
                    beta_slope: num(rest[2])?,
                    beta_offset: num(rest[3])?,
                }
            }
            "fourier" => {
                arity(2)?;
                Schedule::Fourier {
                    u: list(rest[0])?,
                    v: list(rest[1])?,
                }
            }
            other => return Err(Error::invalid(format!("unknown schedule kind `{other}`"))),
        };
        schedule.validate()?;
        Ok(schedule)
    }
}
