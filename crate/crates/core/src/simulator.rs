//! Dense statevector simulation of the QAOA circuit.
//!
//! The state after `p` layers is
//!
//! ```text
//! |ψ(γ, β)⟩ = e^{-iβ_p H_M} e^{-iγ_p H_P} ⋯ e^{-iβ_1 H_M} e^{-iγ_1 H_P} |+⟩^N
//! ```
//!
//! `H_P` is diagonal with entries `costs[z] = f(spins(z))`, precomputed once
//! per problem. The mixer is the transverse field `H_M = -Σ_i X_i`, whose
//! ground state is the initial `|+⟩^N`; with this sign a positive linear ramp
//! anneals towards low cost. `e^{-iβ H_M}` factorises into `e^{+iβ X_i}` on
//! every qubit and is applied as 2×2 rotations over strided amplitude pairs.
//!
//! Reductions (norm, energy, overlap) sum in increasing basis-index order on
//! one thread, so their results are bit-reproducible. Layer updates are
//! elementwise and may run on the rayon pool above [`PARALLEL_MIN_QUBITS`].

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{Spectrum, SpinPolynomial, DEFAULT_SIMULATOR_LIMIT};
use crate::seed;

/// Below this size layer updates stay on the calling thread.
pub const PARALLEL_MIN_QUBITS: usize = 14;

/// QAOA angles: `gammas[j]` for the phase layer and `betas[j]` for the mixer
/// layer of round `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaParameters {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl QaoaParameters {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.len() != betas.len() {
            return Err(Error::invalid(format!(
                "gamma/beta length mismatch: {} vs {}",
                gammas.len(),
                betas.len()
            )));
        }
        Ok(Self { gammas, betas })
    }

    pub fn zeros(depth: usize) -> Self {
        Self {
            gammas: vec![0.0; depth],
            betas: vec![0.0; depth],
        }
    }

    pub fn depth(&self) -> usize {
        self.gammas.len()
    }

    /// `[γ_1 … γ_p, β_1 … β_p]`, the coordinate order used by the optimizers.
    pub fn to_flat(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }

    pub fn from_flat(x: &[f64]) -> Result<Self> {
        if !x.len().is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "flat parameter vector has odd length {}",
                x.len()
            )));
        }
        let p = x.len() / 2;
        Ok(Self {
            gammas: x[..p].to_vec(),
            betas: x[p..].to_vec(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|+⟩^N`: every amplitude equal to `2^{-N/2}`.
    pub fn plus(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let a = (dim as f64).sqrt().recip();
        Self {
            n_qubits,
            amplitudes: vec![Complex64::new(a, 0.0); dim],
        }
    }

    pub fn basis(n_qubits: usize, z: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if z >= dim {
            return Err(Error::invalid(format!("basis index {z} out of range")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[z] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amplitudes })
    }

    /// Wraps raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::invalid(format!("state dimension {dim} is not a power of two")));
        }
        Ok(Self {
            n_qubits: dim.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(Complex64::norm_sqr).collect()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::invalid("state dimensions differ"));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Phase layer `e^{-iγ H_P}`: amplitude `z` picks up `e^{-iγ costs[z]}`.
    pub fn apply_phase(&mut self, costs: &[f64], gamma: f64) -> Result<()> {
        if costs.len() != self.dim() {
            return Err(Error::invalid(format!(
                "cost diagonal has {} entries, state has {}",
                costs.len(),
                self.dim()
            )));
        }
        let rotate = |(a, &c): (&mut Complex64, &f64)| {
            let (s, co) = (gamma * c).sin_cos();
            *a *= Complex64::new(co, -s);
        };
        if self.n_qubits >= PARALLEL_MIN_QUBITS {
            self.amplitudes.par_iter_mut().zip(costs.par_iter()).for_each(rotate);
        } else {
            self.amplitudes.iter_mut().zip(costs.iter()).for_each(rotate);
        }
        Ok(())
    }

    /// Mixer layer `e^{-iβ H_M}` with `H_M = -Σ X_i`, i.e. `cos β·I + i sin β·X`
    /// on each qubit.
    pub fn apply_mixer(&mut self, beta: f64) {
        let (s, c) = beta.sin_cos();
        let is = Complex64::new(0.0, s);
        for q in 0..self.n_qubits {
            let stride = 1usize << q;
            let block = |chunk: &mut [Complex64]| {
                let (lo, hi) = chunk.split_at_mut(stride);
                for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (x0, x1) = (*a0, *a1);
                    *a0 = x0 * c + x1 * is;
                    *a1 = x0 * is + x1 * c;
                }
            };
            if self.n_qubits >= PARALLEL_MIN_QUBITS {
                self.amplitudes
                    .par_chunks_mut(2 * stride)
                    .with_min_len((1 << 12) / (2 * stride) + 1)
                    .for_each(block);
            } else {
                self.amplitudes.chunks_mut(2 * stride).for_each(block);
            }
        }
    }
}

/// Statevector simulator bound to one problem's cost diagonal.
#[derive(Debug, Clone)]
pub struct Simulator {
    n_qubits: usize,
    costs: Vec<f64>,
}

impl Simulator {
    pub fn new(poly: &SpinPolynomial) -> Result<Self> {
        Self::with_limit(poly, DEFAULT_SIMULATOR_LIMIT)
    }

    pub fn with_limit(poly: &SpinPolynomial, limit: usize) -> Result<Self> {
        let n = poly.num_variables();
        if n > limit {
            return Err(Error::ResourceLimit {
                what: "statevector simulation",
                requested: n,
                limit,
            });
        }
        Ok(Self {
            n_qubits: n,
            costs: poly.cost_diagonal(limit)?,
        })
    }

    /// Reuses the cost diagonal of an existing spectrum.
    pub fn from_spectrum(spectrum: &Spectrum) -> Self {
        Self {
            n_qubits: spectrum.num_qubits(),
            costs: spectrum.costs.clone(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn evolve(&self, params: &QaoaParameters) -> StateVector {
        let mut state = StateVector::plus(self.n_qubits);
        for (&gamma, &beta) in params.gammas.iter().zip(&params.betas) {
            state
                .apply_phase(&self.costs, gamma)
                .expect("cost diagonal matches state dimension");
            state.apply_mixer(beta);
        }
        state
    }

    /// Exact `⟨ψ|H_P|ψ⟩` against this simulator's own diagonal.
    pub fn energy(&self, state: &StateVector) -> Result<f64> {
        expectation(state, &self.costs)
    }

    pub fn evolve_energy(&self, params: &QaoaParameters) -> f64 {
        expectation(&self.evolve(params), &self.costs).expect("dimensions agree")
    }
}

/// Evolves `|+⟩^N` through the QAOA layers of `params` on `poly`.
pub fn evolve(poly: &SpinPolynomial, params: &QaoaParameters) -> Result<StateVector> {
    Ok(Simulator::new(poly)?.evolve(params))
}

fn expectation(state: &StateVector, costs: &[f64]) -> Result<f64> {
    if costs.len() != state.dim() {
        return Err(Error::invalid(format!(
            "state has dimension {}, costs have {}",
            state.dim(),
            costs.len()
        )));
    }
    Ok(state.amplitudes.iter().zip(costs).map(|(a, c)| a.norm_sqr() * c).sum())
}

/// `Σ_z |ψ_z|² costs[z]`.
pub fn energy(state: &StateVector, spectrum: &Spectrum) -> Result<f64> {
    expectation(state, &spectrum.costs)
}

/// Probability of measuring any optimal basis state.
pub fn ground_state_overlap(state: &StateVector, spectrum: &Spectrum) -> Result<f64> {
    if spectrum.costs.len() != state.dim() {
        return Err(Error::invalid(format!(
            "state has dimension {}, spectrum has {}",
            state.dim(),
            spectrum.costs.len()
        )));
    }
    Ok(spectrum
        .argmin_states
        .iter()
        .map(|&z| state.amplitudes[z].norm_sqr())
        .sum())
}

/// Measurement record: how often each basis index was observed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSet {
    pub counts: BTreeMap<u64, u64>,
    pub shots: u64,
    pub seed: u64,
}

/// Draws `shots` computational-basis measurements from `|ψ_z|²`.
///
/// Each shot inverts the cumulative distribution (prefix sums in index order)
/// at a uniform draw from `ChaCha20Rng::seed_from_u64(seed)`.
pub fn sample(state: &StateVector, shots: u64, seed: u64) -> Result<SampleSet> {
    if shots == 0 {
        return Err(Error::invalid("shots must be at least 1"));
    }
    let mut cdf = Vec::with_capacity(state.dim());
    let mut acc = 0.0;
    for a in &state.amplitudes {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    let total = acc;
    let last = state.dim() - 1;
    let mut rng = seed::rng(seed);
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        let u = rng.random::<f64>() * total;
        let mut z = cdf.partition_point(|&c| c <= u).min(last);
        // never land on a zero-probability state through rounding
        while z > 0 && state.amplitudes[z].norm_sqr() == 0.0 {
            z -= 1;
        }
        *counts.entry(z as u64).or_insert(0) += 1;
    }
    Ok(SampleSet { counts, shots, seed })
}

/// Sample mean of the cost, `Σ_z counts(z)/shots · f(spins(z))`.
///
/// Only the visited basis states are evaluated, so this works for problems too
/// large to enumerate.
pub fn estimate_energy(samples: &SampleSet, poly: &SpinPolynomial) -> Result<f64> {
    if samples.shots == 0 || samples.counts.is_empty() {
        return Err(Error::invalid("empty sample set"));
    }
    let total: f64 = samples
        .counts
        .iter()
        .map(|(&z, &count)| count as f64 * poly.evaluate_basis(z))
        .sum();
    Ok(total / samples.shots as f64)
}
