//! Derivative-free trust-region minimisation with a simple internal model.
//!
//! The engine is ask/tell: it proposes one point at a time and is told the
//! (possibly noisy) objective value. It starts from a stencil of `n + 1`
//! points (the start plus `ρ_beg` along each coordinate), then alternates
//! model steps of length `ρ` with radius reductions whenever a step realises
//! less than a tenth of the predicted decrease. The radius never drops below
//! `ρ_end`.

use nalgebra::{DMatrix, DVector};

use super::{allocate_shots, EvaluationLedger, EvaluationRequest, ModelKind, OptimizerConfig};
use crate::error::{Error, Result};
use crate::seed::derive_seed;
use crate::simulator::QaoaParameters;

const SHRINK_RATIO: f64 = 0.1;

#[derive(Debug, Clone, Copy)]
enum Pending {
    Stencil,
    Step { base_value: f64, predicted: f64 },
    Geometry { replace: usize },
}

pub(crate) struct TrustRegion {
    model: ModelKind,
    rho: f64,
    rho_end: f64,
    dim: usize,
    start: Vec<f64>,
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    /// Interpolation set for the linear model (indices into `points`).
    simplex: Vec<usize>,
    pending: Option<Pending>,
    converged: bool,
}

impl TrustRegion {
    pub(crate) fn new(start: Vec<f64>, rho_begin: f64, rho_end: f64, model: ModelKind) -> Self {
        Self {
            model,
            rho: rho_begin,
            rho_end,
            dim: start.len(),
            start,
            points: Vec::new(),
            values: Vec::new(),
            simplex: Vec::new(),
            pending: None,
            converged: false,
        }
    }

    pub(crate) fn converged(&self) -> bool {
        self.converged
    }

    fn best(&self) -> usize {
        let pool: Box<dyn Iterator<Item = usize>> = match self.model {
            ModelKind::Linear if self.simplex.len() == self.dim + 1 => Box::new(self.simplex.iter().copied()),
            _ => Box::new(0..self.values.len()),
        };
        pool.min_by(|&a, &b| self.values[a].total_cmp(&self.values[b]))
            .expect("at least one evaluated point")
    }

    pub(crate) fn ask(&mut self) -> Vec<f64> {
        let n = self.points.len();
        if n <= self.dim {
            self.pending = Some(Pending::Stencil);
            let mut x = self.start.clone();
            if n > 0 {
                x[n - 1] += self.rho;
            }
            return x;
        }
        if self.model == ModelKind::Linear {
            if let Some((replace, x)) = self.geometry_step() {
                self.pending = Some(Pending::Geometry { replace });
                return x;
            }
        }
        let b = self.best();
        let (step, predicted) = match self.model {
            ModelKind::Linear => self.linear_step(b),
            ModelKind::Quadratic => self.quadratic_step(b),
        };
        self.pending = Some(Pending::Step {
            base_value: self.values[b],
            predicted,
        });
        self.points[b].iter().zip(&step).map(|(x, s)| x + s).collect()
    }

    pub(crate) fn tell(&mut self, x: Vec<f64>, value: f64) {
        let index = self.points.len();
        self.points.push(x);
        self.values.push(value);
        match self.pending.take() {
            Some(Pending::Stencil) | None => {
                self.simplex.push(index);
            }
            Some(Pending::Geometry { replace }) => {
                self.simplex[replace] = index;
            }
            Some(Pending::Step { base_value, predicted }) => {
                let ratio = if predicted > 0.0 {
                    (base_value - value) / predicted
                } else {
                    f64::NEG_INFINITY
                };
                if self.model == ModelKind::Linear {
                    self.absorb_into_simplex(index);
                }
                if ratio < SHRINK_RATIO {
                    if self.rho <= self.rho_end {
                        self.converged = true;
                    }
                    self.rho = (0.5 * self.rho).max(self.rho_end);
                }
            }
        }
    }

    /// Offsets of the simplex vertices (other than `b`) from vertex `b`.
    fn edges(&self, simplex: &[usize], b: usize) -> DMatrix<f64> {
        let others: Vec<usize> = simplex.iter().copied().filter(|&i| i != b).collect();
        DMatrix::from_fn(self.dim, self.dim, |r, c| self.points[others[r]][c] - self.points[b][c])
    }

    fn volume(&self, simplex: &[usize]) -> f64 {
        let b = simplex[0];
        self.edges(simplex, b).determinant().abs()
    }

    /// Swaps the new point into the simplex where it keeps the largest volume.
    fn absorb_into_simplex(&mut self, index: usize) {
        let keep = self.best_excluding(index);
        let candidate = (0..self.simplex.len())
            .filter(|&k| self.simplex[k] != keep || self.values[index] < self.values[keep])
            .map(|k| {
                let mut trial = self.simplex.clone();
                trial[k] = index;
                (k, self.volume(&trial))
            })
            .max_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((k, vol)) = candidate {
            if vol > 0.0 {
                self.simplex[k] = index;
            }
        }
    }

    fn best_excluding(&self, index: usize) -> usize {
        self.simplex
            .iter()
            .copied()
            .filter(|&i| i != index)
            .min_by(|&a, &b| self.values[a].total_cmp(&self.values[b]))
            .unwrap_or(index)
    }

    fn gradient(&self, b: usize) -> DVector<f64> {
        let others: Vec<usize> = self.simplex.iter().copied().filter(|&i| i != b).collect();
        let a = self.edges(&self.simplex, b);
        let rhs = DVector::from_iterator(others.len(), others.iter().map(|&i| self.values[i] - self.values[b]));
        a.svd(true, true)
            .solve(&rhs, 1e-14)
            .unwrap_or_else(|_| DVector::zeros(self.dim))
    }

    fn linear_step(&self, b: usize) -> (Vec<f64>, f64) {
        let g = self.gradient(b);
        let norm = g.norm();
        if norm == 0.0 || !norm.is_finite() {
            let mut s = vec![0.0; self.dim];
            s[0] = self.rho;
            return (s, 0.0);
        }
        let step = g.iter().map(|gi| -self.rho * gi / norm).collect();
        (step, self.rho * norm)
    }

    /// When the radius has shrunk well below the simplex size, replace the
    /// farthest vertex by a nearby point that keeps the simplex well shaped.
    fn geometry_step(&self) -> Option<(usize, Vec<f64>)> {
        let b = self.best();
        let dist = |i: usize| {
            self.points[i]
                .iter()
                .zip(&self.points[b])
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt()
        };
        let (k, far) = self
            .simplex
            .iter()
            .enumerate()
            .filter(|(_, &i)| i != b)
            .map(|(k, &i)| (k, dist(i)))
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        if far <= 2.0 * self.rho {
            return None;
        }
        let mut best: Option<(f64, Vec<f64>)> = None;
        for axis in 0..self.dim {
            for sign in [1.0, -1.0] {
                let mut x = self.points[b].clone();
                x[axis] += sign * self.rho;
                let mut edges = self.edges(&self.simplex, b);
                let row = self
                    .simplex
                    .iter()
                    .filter(|&&i| i != b)
                    .position(|&i| i == self.simplex[k])?;
                for c in 0..self.dim {
                    edges[(row, c)] = x[c] - self.points[b][c];
                }
                let vol = edges.determinant().abs();
                if best.as_ref().is_none_or(|(v, _)| vol > *v) {
                    best = Some((vol, x));
                }
            }
        }
        best.map(|(_, x)| (k, x))
    }

    /// Fits `m(x_b + d) = f_b + g·d + ½ Σ h_i d_i²` to the points nearest
    /// the best one, with a ridge penalty that keeps `h` at zero until the
    /// data asks for curvature.
    fn quadratic_step(&self, b: usize) -> (Vec<f64>, f64) {
        let n = self.dim;
        let xb = &self.points[b];
        let mut others: Vec<(f64, usize)> = (0..self.points.len())
            .filter(|&i| i != b)
            .map(|i| {
                let d2: f64 = self.points[i].iter().zip(xb).map(|(x, y)| (x - y).powi(2)).sum();
                (d2, i)
            })
            .collect();
        others.sort_by(|a, b| a.0.total_cmp(&b.0));
        others.truncate(2 * n + 1);
        let rows = others.len();
        let mut a = DMatrix::zeros(rows, 2 * n);
        let mut y = DVector::zeros(rows);
        for (r, &(_, i)) in others.iter().enumerate() {
            for c in 0..n {
                let d = self.points[i][c] - xb[c];
                a[(r, c)] = d;
                a[(r, n + c)] = 0.5 * d * d;
            }
            y[r] = self.values[i] - self.values[b];
        }
        let mut normal = a.transpose() * &a;
        let scale = self.rho.powi(4);
        for c in 0..n {
            normal[(c, c)] += 1e-12 * self.rho * self.rho;
            normal[(n + c, n + c)] += 1e-3 * scale;
        }
        let rhs = a.transpose() * y;
        let z = normal
            .svd(true, true)
            .solve(&rhs, 1e-300)
            .unwrap_or_else(|_| DVector::zeros(2 * n));
        let g: Vec<f64> = (0..n).map(|c| z[c]).collect();
        let h: Vec<f64> = (0..n).map(|c| z[n + c]).collect();
        let step = diagonal_trust_step(&g, &h, self.rho);
        let predicted = -(0..n)
            .map(|c| g[c] * step[c] + 0.5 * h[c] * step[c] * step[c])
            .sum::<f64>();
        if predicted <= 0.0 || !predicted.is_finite() {
            let mut s = vec![0.0; n];
            s[0] = self.rho;
            return (s, 0.0);
        }
        (step, predicted)
    }
}

/// Minimises `g·s + ½ Σ h_i s_i²` over `|s| ≤ radius`.
fn diagonal_trust_step(g: &[f64], h: &[f64], radius: f64) -> Vec<f64> {
    let step_at = |lambda: f64| -> Vec<f64> { g.iter().zip(h).map(|(gi, hi)| -gi / (hi + lambda)).collect() };
    let norm = |s: &[f64]| s.iter().map(|x| x * x).sum::<f64>().sqrt();
    let min_h = h.iter().copied().fold(f64::INFINITY, f64::min);
    if min_h > 0.0 {
        let s = step_at(0.0);
        if norm(&s) <= radius {
            return s;
        }
    }
    let gnorm = norm(g);
    if gnorm == 0.0 {
        return vec![0.0; g.len()];
    }
    let mut lo = if min_h > 0.0 { 0.0 } else { 1e-12 - min_h };
    let mut hi = lo + gnorm / radius + h.iter().map(|x| x.abs()).fold(0.0, f64::max) + 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if norm(&step_at(mid)) > radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = step_at(hi);
    let len = norm(&s);
    if len > radius {
        s.iter().map(|x| x * radius / len).collect()
    } else {
        s
    }
}

/// Runs the shot-budgeted optimizer from `start`.
///
/// The objective is called exactly `allocate_shots(config, p).total_evaluations`
/// times; evaluation `i` gets its planned shot count and the seed
/// `derive_seed(config.seed, i)`. Returns the best-so-far point of the ledger,
/// which need not be the last iterate.
pub fn trust_region_minimize<F>(
    mut objective: F,
    start: &QaoaParameters,
    config: &OptimizerConfig,
) -> Result<(QaoaParameters, EvaluationLedger)>
where
    F: FnMut(&QaoaParameters, EvaluationRequest) -> Result<f64>,
{
    let plan = allocate_shots(config, start.depth())?;
    let mut engine = TrustRegion::new(start.to_flat(), config.initial_step, config.final_step, config.model);
    let mut ledger = EvaluationLedger::default();
    for index in 0..plan.total_evaluations {
        let x = engine.ask();
        let params = QaoaParameters::from_flat(&x)?;
        let request = EvaluationRequest {
            index,
            shots: plan.shots_for(index),
            seed: derive_seed(config.seed, index as u64),
        };
        let value = objective(&params, request)?;
        if !value.is_finite() {
            return Err(Error::Objective(format!(
                "non-finite value {value} at evaluation {index}"
            )));
        }
        ledger.push(params, value, request.shots, request.seed);
        engine.tell(x, value);
    }
    let best = ledger
        .best()
        .expect("plan has at least one evaluation")
        .parameters
        .clone();
    Ok((best, ledger))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiselessResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Runs the same engine on an exact objective until the radius reaches
/// `final_step` without progress or `max_evaluations` is spent.
pub fn minimize_noiseless<F>(
    mut objective: F,
    start: &[f64],
    initial_step: f64,
    final_step: f64,
    max_evaluations: usize,
) -> Result<NoiselessResult>
where
    F: FnMut(&[f64]) -> f64,
{
    if start.is_empty() {
        return Err(Error::invalid("empty start point"));
    }
    if !(final_step > 0.0 && final_step < initial_step) {
        return Err(Error::invalid("need 0 < final_step < initial_step"));
    }
    let mut engine = TrustRegion::new(start.to_vec(), initial_step, final_step, ModelKind::Linear);
    let mut best = (start.to_vec(), f64::INFINITY);
    let mut evaluations = 0;
    while evaluations < max_evaluations && !engine.converged() {
        let x = engine.ask();
        let v = objective(&x);
        evaluations += 1;
        if v < best.1 {
            best = (x.clone(), v);
        }
        engine.tell(x, v);
    }
    Ok(NoiselessResult {
        x: best.0,
        value: best.1,
        evaluations,
    })
}
