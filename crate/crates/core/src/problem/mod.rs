//! Classical cost functions written as polynomials over spins `s_i ∈ {-1, +1}`.
//!
//! A [`SpinPolynomial`] is kept in canonical form: every term has strictly
//! increasing variable indices, terms sharing a variable set are merged, and
//! zero-weight terms are dropped. Constant parts (e.g. the LABS energy offset)
//! never live in the term list; they are carried in [`SpinPolynomial::offset`]
//! and are *not* included by [`SpinPolynomial::evaluate`].

mod generators;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use generators::{gen_labs, gen_maxcut, gen_random_weighted_maxcut, labs_energy, WeightDist};

/// Default largest N for which [`spectrum`] will enumerate all basis states.
pub const DEFAULT_BRUTE_FORCE_LIMIT: usize = 24;
/// Default largest N the statevector simulator accepts.
pub const DEFAULT_SIMULATOR_LIMIT: usize = 26;

/// Environment variable overriding the brute-force limit.
pub const BRUTE_FORCE_LIMIT_ENV: &str = "QAOA_BRUTE_FORCE_LIMIT";
/// Environment variable overriding the simulator limit.
pub const SIMULATOR_LIMIT_ENV: &str = "QAOA_SIMULATOR_LIMIT";
/// Costs within this fraction of the spectrum's magnitude of `f_min` count
/// as optimal.
pub const OPTIMUM_RTOL: f64 = 1e-10;

/// Size ceilings for exhaustive enumeration and dense simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub brute_force: usize,
    pub simulator: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            brute_force: DEFAULT_BRUTE_FORCE_LIMIT,
            simulator: DEFAULT_SIMULATOR_LIMIT,
        }
    }
}

impl Limits {
    /// Defaults, overridden by `QAOA_BRUTE_FORCE_LIMIT` / `QAOA_SIMULATOR_LIMIT`
    /// when they hold a valid integer.
    pub fn from_env() -> Self {
        let read = |key: &str, default: usize| {
            std::env::var(key)
                .ok()
                .and_then(|v| v.trim().parse().ok())
                .unwrap_or(default)
        };
        Self {
            brute_force: read(BRUTE_FORCE_LIMIT_ENV, DEFAULT_BRUTE_FORCE_LIMIT),
            simulator: read(SIMULATOR_LIMIT_ENV, DEFAULT_SIMULATOR_LIMIT),
        }
    }
}

/// One weighted monomial `w · s_{u1} ⋯ s_{uk}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinTerm {
    variables: Vec<usize>,
    weight: f64,
}

impl SpinTerm {
    pub fn variables(&self) -> &[usize] {
        &self.variables
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn order(&self) -> usize {
        self.variables.len()
    }

    /// Bitmask of the term's variables. Only meaningful for N ≤ 64.
    pub fn mask(&self) -> u64 {
        self.variables.iter().fold(0u64, |m, &v| m | (1u64 << v))
    }
}

/// Weighted spin polynomial `f(s)` plus a separately recorded constant offset.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinPolynomial {
    num_variables: usize,
    terms: Vec<SpinTerm>,
    offset: f64,
    label: String,
}

impl SpinPolynomial {
    /// Builds a canonical polynomial from raw `(variables, weight)` pairs.
    ///
    /// Variables inside a term may come in any order but must be distinct and
    /// `< num_variables`. Terms on the same set are summed; terms whose final
    /// weight is zero are dropped.
    pub fn new<I>(num_variables: usize, terms: I, label: impl Into<String>) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        if num_variables == 0 {
            return Err(Error::invalid("polynomial needs at least one variable"));
        }
        let mut merged: BTreeMap<(usize, Vec<usize>), f64> = BTreeMap::new();
        for (mut vars, weight) in terms {
            if !weight.is_finite() {
                return Err(Error::invalid(format!("non-finite weight {weight}")));
            }
            if vars.is_empty() {
                return Err(Error::invalid("empty term; constants belong in the offset"));
            }
            vars.sort_unstable();
            if vars.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::invalid(format!("repeated variable in term {vars:?}")));
            }
            if let Some(&v) = vars.last() {
                if v >= num_variables {
                    return Err(Error::invalid(format!(
                        "variable {v} out of range for N = {num_variables}"
                    )));
                }
            }
            *merged.entry((vars.len(), vars)).or_insert(0.0) += weight;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, w)| *w != 0.0)
            .map(|((_, variables), weight)| SpinTerm { variables, weight })
            .collect();
        Ok(Self {
            num_variables,
            terms,
            offset: 0.0,
            label: label.into(),
        })
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn num_variables(&self) -> usize {
        self.num_variables
    }

    pub fn terms(&self) -> &[SpinTerm] {
        &self.terms
    }

    /// Constant kept outside the polynomial; add it to any energy to recover
    /// the absolute objective value.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Problem class: the label up to the first `/`.
    pub fn class(&self) -> &str {
        self.label.split('/').next().unwrap_or("")
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(SpinTerm::order).max().unwrap_or(0)
    }

    /// `Σ_terms w · Π s_u`, offset excluded.
    pub fn evaluate(&self, assignment: &[i8]) -> Result<f64> {
        if assignment.len() != self.num_variables {
            return Err(Error::invalid(format!(
                "assignment has length {}, expected {}",
                assignment.len(),
                self.num_variables
            )));
        }
        if let Some(s) = assignment.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::invalid(format!("spin value {s} is not ±1")));
        }
        Ok(self
            .terms
            .iter()
            .map(|t| {
                let sign: i32 = t.variables.iter().map(|&v| assignment[v] as i32).product();
                t.weight * sign as f64
            })
            .sum())
    }

    /// Evaluates at the spin configuration encoded by basis index `z`.
    ///
    /// Requires N ≤ 64. A term contributes `-w` exactly when an odd number of
    /// its variables have bit 1.
    pub fn evaluate_basis(&self, z: u64) -> f64 {
        debug_assert!(self.num_variables <= 64);
        self.terms
            .iter()
            .map(|t| {
                if (z & t.mask()).count_ones() & 1 == 1 {
                    -t.weight
                } else {
                    t.weight
                }
            })
            .sum()
    }

    /// Cost of every basis state, `costs[z] = f(spins(z))`.
    pub fn cost_diagonal(&self, limit: usize) -> Result<Vec<f64>> {
        let n = self.num_variables;
        if n > limit || n >= 64 {
            return Err(Error::ResourceLimit {
                what: "cost diagonal",
                requested: n,
                limit,
            });
        }
        let masks: Vec<(u64, f64)> = self.terms.iter().map(|t| (t.mask(), t.weight)).collect();
        let dim = 1usize << n;
        let mut costs = vec![0.0; dim];
        costs
            .par_iter_mut()
            .with_min_len(1 << 10)
            .enumerate()
            .for_each(|(z, c)| {
                let z = z as u64;
                *c = masks
                    .iter()
                    .map(|&(m, w)| if (z & m).count_ones() & 1 == 1 { -w } else { w })
                    .sum();
            });
        Ok(costs)
    }

    /// Returns a copy with every weight (and the offset) divided by the
    /// scaling factor `sqrt(Σ_k mean_{order-k terms} w²)`, plus that factor.
    pub fn rescale(&self) -> Result<(SpinPolynomial, f64)> {
        let factor = self.scale_factor()?;
        let mut out = self.clone();
        for t in &mut out.terms {
            t.weight /= factor;
        }
        out.offset /= factor;
        Ok((out, factor))
    }

    pub fn scale_factor(&self) -> Result<f64> {
        let mut buckets: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
        for t in &self.terms {
            let e = buckets.entry(t.order()).or_insert((0, 0.0));
            e.0 += 1;
            e.1 += t.weight * t.weight;
        }
        let sum: f64 = buckets.values().map(|&(count, sq)| sq / count as f64).sum();
        if sum == 0.0 {
            return Err(Error::invalid("cannot rescale a polynomial with no nonzero weights"));
        }
        Ok(sum.sqrt())
    }

    /// Polynomial with every weight multiplied by `factor` (offset too).
    pub fn scaled(&self, factor: f64) -> SpinPolynomial {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.weight *= factor;
        }
        out.offset *= factor;
        out
    }
}

/// Spin vector for basis index `z` under the `s_i = 1 - 2 b_i` convention.
pub fn spins(z: u64, n: usize) -> Vec<i8> {
    (0..n).map(|i| 1 - 2 * ((z >> i) & 1) as i8).collect()
}

/// Basis index of a spin vector (inverse of [`spins`]).
pub fn basis_index(assignment: &[i8]) -> u64 {
    assignment
        .iter()
        .enumerate()
        .filter(|(_, &s)| s == -1)
        .fold(0u64, |z, (i, _)| z | (1 << i))
}

/// Full classical spectrum of a polynomial (offset excluded).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub costs: Vec<f64>,
    pub f_min: f64,
    pub f_max: f64,
    pub argmin_states: Vec<usize>,
}

impl Spectrum {
    pub fn from_costs(costs: Vec<f64>) -> Result<Self> {
        if costs.is_empty() {
            return Err(Error::invalid("empty cost vector"));
        }
        let f_min = costs.iter().copied().fold(f64::INFINITY, f64::min);
        let f_max = costs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // Degenerate optima of a rescaled cost can differ in the last bits.
        let tol = OPTIMUM_RTOL * f_min.abs().max(f_max.abs());
        let argmin_states = costs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c <= f_min + tol)
            .map(|(z, _)| z)
            .collect();
        Ok(Self {
            costs,
            f_min,
            f_max,
            argmin_states,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.costs.len().trailing_zeros() as usize
    }

    pub fn mean(&self) -> f64 {
        self.costs.iter().sum::<f64>() / self.costs.len() as f64
    }

    /// Probability of hitting an optimum by uniform random guessing.
    pub fn uniform_overlap(&self) -> f64 {
        self.argmin_states.len() as f64 / self.costs.len() as f64
    }
}

/// Enumerates all `2^N` states, using the default brute-force limit.
pub fn spectrum(poly: &SpinPolynomial) -> Result<Spectrum> {
    spectrum_with_limit(poly, DEFAULT_BRUTE_FORCE_LIMIT)
}

pub fn spectrum_with_limit(poly: &SpinPolynomial, limit: usize) -> Result<Spectrum> {
    if poly.num_variables() > limit {
        return Err(Error::ResourceLimit {
            what: "brute-force spectrum",
            requested: poly.num_variables(),
            limit,
        });
    }
    Spectrum::from_costs(poly.cost_diagonal(limit)?)
}
