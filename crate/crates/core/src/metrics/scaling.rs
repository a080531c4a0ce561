//! Exponential scaling fits `TTS(N) ≈ 2^{αN} + c`.
//!
//! For fixed α the optimal `c` is the mean residual, so the fit is a
//! one-dimensional search over α: a 1e-3 grid on [`ALPHA_RANGE`] followed by
//! golden-section refinement. Confidence intervals are percentile bootstraps
//! over the points; resample `i` draws from `derive_seed(seed, i)`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::time_to_solution;
use crate::problem::{spectrum, SpinPolynomial};
use crate::schedules::Schedule;
use crate::seed::{derive_seed, rng};
use crate::simulator::{energy, ground_state_overlap, Simulator};

pub const ALPHA_RANGE: (f64, f64) = (-1.0, 2.0);
const GRID_STEP: f64 = 1e-3;
const MAX_REDRAWS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOptions {
    pub resamples: usize,
    pub confidence: f64,
    pub seed: u64,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        Self {
            resamples: 1000,
            confidence: 0.95,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub alpha: f64,
    pub offset_c: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
    pub resamples: usize,
    pub seed: u64,
    /// Distinct problem sizes, ascending.
    pub n_values: Vec<usize>,
    /// `2^{αN} + c - tts` for each input point, in input order.
    pub residuals: Vec<f64>,
    pub sse: f64,
}

fn profile(points: &[(usize, f64)], alpha: f64) -> (f64, f64) {
    let m = points.len() as f64;
    let c = points.iter().map(|&(n, y)| y - (alpha * n as f64).exp2()).sum::<f64>() / m;
    let sse = points
        .iter()
        .map(|&(n, y)| ((alpha * n as f64).exp2() + c - y).powi(2))
        .sum();
    (c, sse)
}

fn best_alpha(points: &[(usize, f64)]) -> f64 {
    let steps = ((ALPHA_RANGE.1 - ALPHA_RANGE.0) / GRID_STEP).round() as usize;
    let grid_alpha = |i: usize| ALPHA_RANGE.0 + i as f64 * GRID_STEP;
    let (mut best_i, mut best_sse) = (0, f64::INFINITY);
    for i in 0..=steps {
        let sse = profile(points, grid_alpha(i)).1;
        if sse < best_sse {
            best_i = i;
            best_sse = sse;
        }
    }
    let mut lo = grid_alpha(best_i.saturating_sub(1));
    let mut hi = grid_alpha((best_i + 1).min(steps));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if profile(points, a).1 <= profile(points, b).1 {
            hi = b;
        } else {
            lo = a;
        }
    }
    let refined = 0.5 * (lo + hi);
    if profile(points, refined).1 <= best_sse {
        refined
    } else {
        grid_alpha(best_i)
    }
}

fn distinct_sizes(points: &[(usize, f64)]) -> Vec<usize> {
    let mut n: Vec<usize> = points.iter().map(|p| p.0).collect();
    n.sort_unstable();
    n.dedup();
    n
}

pub fn fit_exponential(points: &[(usize, f64)]) -> Result<ScalingFit> {
    fit_exponential_with(points, &BootstrapOptions::default())
}

/// Least-squares fit of `2^{αN} + c` with a bootstrap interval on α.
pub fn fit_exponential_with(points: &[(usize, f64)], options: &BootstrapOptions) -> Result<ScalingFit> {
    let n_values = distinct_sizes(points);
    if n_values.len() < 3 {
        return Err(Error::invalid(format!(
            "need at least 3 distinct N, got {}",
            n_values.len()
        )));
    }
    if let Some(&(n, y)) = points.iter().find(|p| !(p.1 > 0.0 && p.1.is_finite())) {
        return Err(Error::invalid(format!(
            "tts at N = {n} must be positive and finite, got {y}"
        )));
    }
    if options.resamples == 0 || !(options.confidence > 0.0 && options.confidence < 1.0) {
        return Err(Error::invalid(
            "bootstrap needs resamples >= 1 and confidence in (0, 1)",
        ));
    }
    let alpha = best_alpha(points);
    let (offset_c, sse) = profile(points, alpha);
    let residuals = points
        .iter()
        .map(|&(n, y)| (alpha * n as f64).exp2() + offset_c - y)
        .collect();

    let mut boot: Vec<f64> = (0..options.resamples)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut r = rng(derive_seed(options.seed, i as u64));
            for _ in 0..MAX_REDRAWS {
                let resample: Vec<(usize, f64)> = (0..points.len())
                    .map(|_| points[r.random_range(0..points.len())])
                    .collect();
                if distinct_sizes(&resample).len() >= 3 {
                    return Ok(best_alpha(&resample));
                }
            }
            Err(Error::RetryExhausted {
                what: "bootstrap resample with 3 distinct N".into(),
                attempts: MAX_REDRAWS,
            })
        })
        .collect::<Result<_>>()?;
    boot.sort_by(f64::total_cmp);
    let tail = (1.0 - options.confidence) / 2.0;
    // the percentile interval is widened to contain the point estimate
    let ci_low = quantile(&boot, tail).min(alpha);
    let ci_high = quantile(&boot, 1.0 - tail).max(alpha);

    Ok(ScalingFit {
        alpha,
        offset_c,
        ci_low,
        ci_high,
        confidence: options.confidence,
        resamples: options.resamples,
        seed: options.seed,
        n_values,
        residuals,
        sse,
    })
}

/// Linear-interpolated quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[i]
    }
}

/// What a ramp scan optimises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanObjective {
    /// Largest ground-state overlap.
    #[default]
    Overlap,
    /// Lowest expected energy.
    Energy,
}

impl std::str::FromStr for ScanObjective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "energy" => Ok(ScanObjective::Energy),
            "overlap" => Ok(ScanObjective::Overlap),
            other => Err(Error::invalid(format!(
                "unknown scan objective `{other}` (energy or overlap)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampScanPoint {
    pub delta: f64,
    /// Expected cost of `poly`, offset excluded.
    pub energy: f64,
    pub overlap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RampScan {
    pub objective: ScanObjective,
    pub best_delta: f64,
    pub points: Vec<RampScanPoint>,
}

/// Evaluates the depth-`p` linear ramp for each Δ and picks the best one
/// under `objective` (first wins on ties).
pub fn coarse_ramp_scan(poly: &SpinPolynomial, p: usize, deltas: &[f64], objective: ScanObjective) -> Result<RampScan> {
    if deltas.is_empty() {
        return Err(Error::invalid("empty Δ grid"));
    }
    let spec = spectrum(poly)?;
    let sim = Simulator::from_spectrum(&spec);
    let points = deltas
        .iter()
        .map(|&delta| {
            let state = sim.evolve(&Schedule::Linear { delta }.parameters(p)?);
            Ok(RampScanPoint {
                delta,
                energy: energy(&state, &spec)?,
                overlap: ground_state_overlap(&state, &spec)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let score = |q: &RampScanPoint| match objective {
        ScanObjective::Energy => q.energy,
        ScanObjective::Overlap => -q.overlap,
    };
    let best_delta = points
        .iter()
        .fold(None::<&RampScanPoint>, |best, q| match best {
            Some(b) if score(b) <= score(q) => Some(b),
            _ => Some(q),
        })
        .expect("nonempty scan")
        .delta;
    Ok(RampScan {
        objective,
        best_delta,
        points,
    })
}

/// Time-to-solution of each `(N, overlap)` pair, ready for fitting.
pub fn tts_points(overlaps: &[(usize, f64)]) -> Result<Vec<(usize, f64)>> {
    overlaps.iter().map(|&(n, o)| Ok((n, time_to_solution(o)?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn synthetic(alpha: f64, c: f64, ns: std::ops::RangeInclusive<usize>) -> Vec<(usize, f64)> {
        ns.map(|n| (n, (alpha * n as f64).exp2() + c)).collect()
    }

    #[test]
    fn recovers_clean_exponential() {
        let fit = fit_exponential(&synthetic(0.5, 0.0, 6..=14)).unwrap();
        assert!((0.49..=0.51).contains(&fit.alpha), "{fit:?}");
        assert!(fit.ci_low <= fit.alpha && fit.alpha <= fit.ci_high);
        assert_eq!(fit.n_values, (6..=14).collect::<Vec<_>>());
    }

    #[test]
    fn flat_data_gives_zero_alpha() {
        let pts: Vec<_> = (6..=12).map(|n| (n, 37.0)).collect();
        let fit = fit_exponential(&pts).unwrap();
        assert!(fit.alpha.abs() < 0.01);
        assert!((fit.offset_c + 1.0 - 37.0).abs() < 0.1, "{fit:?}");
    }

    #[test]
    fn noisy_generator_alpha_is_inside_ci() {
        let alpha = 0.546;
        let noise = Normal::new(0.0, 0.05).unwrap();
        let mut r = rng(5);
        let pts: Vec<_> = (6..=20)
            .map(|n| (n, (alpha * n as f64).exp2() * (1.0 + noise.sample(&mut r))))
            .collect();
        let fit = fit_exponential_with(
            &pts,
            &BootstrapOptions {
                seed: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(fit.ci_low <= alpha && alpha <= fit.ci_high, "{fit:?}");
        assert!(fit.ci_high > fit.ci_low);
    }

    #[test]
    fn beats_a_flat_line_on_growing_data() {
        let pts = synthetic(0.3, 2.0, 5..=12);
        let fit = fit_exponential(&pts).unwrap();
        let mean = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
        let flat: f64 = pts.iter().map(|p| (p.1 - mean).powi(2)).sum();
        assert!(fit.sse <= flat);
    }

    #[test]
    fn ci_narrows_with_more_points() {
        let alpha = 0.4;
        let noise = Normal::new(0.0, 0.1).unwrap();
        let width = |reps: usize| {
            let mut r = rng(11);
            let pts: Vec<_> = (6..=12)
                .flat_map(|n| std::iter::repeat_n(n, reps))
                .map(|n| (n, (alpha * n as f64).exp2() * (1.0 + noise.sample(&mut r))))
                .collect();
            let f = fit_exponential_with(
                &pts,
                &BootstrapOptions {
                    seed: 2,
                    ..Default::default()
                },
            )
            .unwrap();
            f.ci_high - f.ci_low
        };
        assert!(width(8) < width(1));
    }

    #[test]
    fn deterministic_given_seed() {
        let pts: Vec<_> = synthetic(0.5, 1.0, 6..=10)
            .into_iter()
            .map(|(n, y)| (n, y * (1.0 + 0.01 * n as f64)))
            .collect();
        let opts = BootstrapOptions {
            seed: 3,
            resamples: 200,
            ..Default::default()
        };
        assert_eq!(
            fit_exponential_with(&pts, &opts).unwrap(),
            fit_exponential_with(&pts, &opts).unwrap()
        );
    }

    #[test]
    fn ramp_scan_objectives() {
        let poly = crate::problem::gen_labs(7).unwrap().rescale().unwrap().0;
        let deltas = [0.0, 0.2, 0.4, 0.6];
        let by_overlap = coarse_ramp_scan(&poly, 4, &deltas, ScanObjective::Overlap).unwrap();
        let by_energy = coarse_ramp_scan(&poly, 4, &deltas, ScanObjective::Energy).unwrap();
        assert_eq!(by_overlap.points, by_energy.points);
        let spec = spectrum(&poly).unwrap();
        // Δ = 0 leaves the uniform superposition
        assert!((by_overlap.points[0].overlap - spec.uniform_overlap()).abs() < 1e-12);
        assert!((by_overlap.points[0].energy - spec.mean()).abs() < 1e-12);
        let best = |f: fn(&RampScanPoint) -> f64| {
            by_overlap
                .points
                .iter()
                .min_by(|a, b| f(a).total_cmp(&f(b)))
                .unwrap()
                .delta
        };
        assert_eq!(by_overlap.best_delta, best(|q| -q.overlap));
        assert_eq!(by_energy.best_delta, best(|q| q.energy));
        assert!(coarse_ramp_scan(&poly, 4, &[], ScanObjective::Energy).is_err());
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(fit_exponential(&[(6, 1.0), (6, 2.0), (6, 3.0)]).is_err());
        assert!(fit_exponential(&[(6, 1.0), (7, 2.0)]).is_err());
        assert!(fit_exponential(&[(6, 1.0), (7, 0.0), (8, 3.0)]).is_err());
    }
}
