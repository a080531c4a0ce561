//! Depth-progression benchmark: the largest depth `p` up to which every added
//! layer still lowers the measured energy, reported as the product `N · p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::SpinPolynomial;
use crate::seed::derive_seed;
use crate::simulator::{estimate_energy, sample, QaoaParameters, Simulator};

/// Anything that can run a QAOA circuit and report an energy estimate.
pub trait Executor {
    fn estimate_energy(&mut self, poly: &SpinPolynomial, params: &QaoaParameters, shots: u64, seed: u64)
        -> Result<f64>;
}

#[derive(Default)]
struct SimulatorCache {
    entry: Option<(SpinPolynomial, Simulator)>,
}

impl SimulatorCache {
    fn get(&mut self, poly: &SpinPolynomial) -> Result<&Simulator> {
        let stale = self.entry.as_ref().is_none_or(|(p, _)| p != poly);
        if stale {
            self.entry = Some((poly.clone(), Simulator::new(poly)?));
        }
        Ok(&self.entry.as_ref().expect("just filled").1)
    }
}

/// Noiseless executor: returns the exact energy and ignores shots and seed.
#[derive(Default)]
pub struct ExactExecutor {
    cache: SimulatorCache,
}

impl Executor for ExactExecutor {
    fn estimate_energy(
        &mut self,
        poly: &SpinPolynomial,
        params: &QaoaParameters,
        _shots: u64,
        _seed: u64,
    ) -> Result<f64> {
        Ok(self.cache.get(poly)?.evolve_energy(params))
    }
}

/// Simulates the circuit exactly, then estimates the energy from `shots`
/// sampled bitstrings.
#[derive(Default)]
pub struct SamplingExecutor {
    cache: SimulatorCache,
}

impl Executor for SamplingExecutor {
    fn estimate_energy(
        &mut self,
        poly: &SpinPolynomial,
        params: &QaoaParameters,
        shots: u64,
        seed: u64,
    ) -> Result<f64> {
        let state = self.cache.get(poly)?.evolve(params);
        estimate_energy(&sample(&state, shots, seed)?, poly)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthProgressionResult {
    pub n_qubits: usize,
    /// Largest depth reached by an unbroken run of improvements; 0 if depth 1
    /// is already no better than the uniform state.
    pub best_p: usize,
    /// `n_qubits · best_p`.
    pub product: usize,
    /// Estimated energy at depth `0..=p_max` (index = depth).
    pub energies: Vec<f64>,
}

/// Estimates the energy at every depth `0..=p_max` with `params_for_depth`
/// and finds the largest `p` with `E(q) < E(q - 1)` for all `q ≤ p`.
///
/// Depths run in order; depth `p` uses `shots` shots and seed
/// `derive_seed(seed, p)`. A plain point-estimate comparison decides
/// "better", with no allowance for shot noise.
pub fn depth_progression_benchmark<E, F>(
    executor: &mut E,
    poly: &SpinPolynomial,
    params_for_depth: F,
    p_max: usize,
    shots: u64,
    seed: u64,
) -> Result<DepthProgressionResult>
where
    E: Executor + ?Sized,
    F: Fn(usize) -> Result<QaoaParameters>,
{
    if p_max == 0 {
        return Err(Error::invalid("p_max must be at least 1"));
    }
    let mut energies = Vec::with_capacity(p_max + 1);
    for p in 0..=p_max {
        let wrap = |e: Error| Error::Executor {
            depth: p,
            source: Box::new(e),
        };
        let params = if p == 0 {
            QaoaParameters::zeros(0)
        } else {
            params_for_depth(p)?
        };
        if params.depth() != p {
            return Err(Error::invalid(format!(
                "parameter source returned depth {} for p = {p}",
                params.depth()
            )));
        }
        let e = executor
            .estimate_energy(poly, &params, shots, derive_seed(seed, p as u64))
            .map_err(wrap)?;
        energies.push(e);
    }
    let best_p = energies.windows(2).take_while(|w| w[1] < w[0]).count();
    Ok(DepthProgressionResult {
        n_qubits: poly.num_variables(),
        best_p,
        product: poly.num_variables() * best_p,
        energies,
    })
}
