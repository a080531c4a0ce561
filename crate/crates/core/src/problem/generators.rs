use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::SpinPolynomial;
use crate::error::{Error, Result};
use crate::seed;

const MAX_PAIRING_ATTEMPTS: usize = 10_000;

/// Edge-weight distribution for random regular MaxCut instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightDist {
    /// All weights 1.
    Unit,
    /// Uniform on [0, 1).
    Uniform01,
    /// Standard normal.
    Gauss01,
}

impl WeightDist {
    pub fn name(self) -> &'static str {
        match self {
            WeightDist::Unit => "unit",
            WeightDist::Uniform01 => "uniform01",
            WeightDist::Gauss01 => "gauss01",
        }
    }
}

impl std::str::FromStr for WeightDist {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit" => Ok(WeightDist::Unit),
            "uniform01" => Ok(WeightDist::Uniform01),
            "gauss01" => Ok(WeightDist::Gauss01),
            other => Err(Error::invalid(format!(
                "unknown weight distribution `{other}` (expected unit, uniform01 or gauss01)"
            ))),
        }
    }
}

/// MaxCut as a minimisation: one term `w · s_u s_v` per edge, so the lowest
/// value is reached by the largest cut. Parallel edges add up.
pub fn gen_maxcut(edges: &[(usize, usize, f64)], n: usize) -> Result<SpinPolynomial> {
    for &(u, v, _) in edges {
        if u == v {
            return Err(Error::invalid(format!("self-loop on vertex {u}")));
        }
        if u >= n || v >= n {
            return Err(Error::invalid(format!("edge ({u}, {v}) out of range for n = {n}")));
        }
    }
    SpinPolynomial::new(n, edges.iter().map(|&(u, v, w)| (vec![u, v], w)), "maxcut")
}

/// Aperiodic-autocorrelation sidelobe energy `Σ_k (Σ_i s_i s_{i+k})²`
/// evaluated directly.
pub fn labs_energy(s: &[i8]) -> f64 {
    let n = s.len();
    (1..n)
        .map(|k| {
            let c: i64 = (0..n - k).map(|i| (s[i] * s[i + k]) as i64).sum();
            (c * c) as f64
        })
        .sum()
}

/// LABS sidelobe energy expanded into a spin polynomial of degree ≤ 4.
///
/// Squaring each autocorrelation gives products `s_i s_{i+k} s_j s_{j+k}`;
/// repeated spins cancel (`s² = 1`), and fully cancelled products go into the
/// offset, so `evaluate(s) + offset() == labs_energy(s)`.
pub fn gen_labs(n: usize) -> Result<SpinPolynomial> {
    if n < 3 {
        return Err(Error::invalid(format!("LABS needs n >= 3, got {n}")));
    }
    let mut terms: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut offset = 0.0;
    for k in 1..n {
        for i in 0..n - k {
            for j in 0..n - k {
                let mut set = BTreeSet::new();
                for v in [i, i + k, j, j + k] {
                    if !set.remove(&v) {
                        set.insert(v);
                    }
                }
                if set.is_empty() {
                    offset += 1.0;
                } else {
                    *terms.entry(set.into_iter().collect()).or_insert(0.0) += 1.0;
                }
            }
        }
    }
    Ok(SpinPolynomial::new(n, terms, format!("labs/n{n}"))?.with_offset(offset))
}

/// Random simple `degree`-regular graph on `n` vertices (pairing model with
/// rejection of self-loops and multi-edges) with i.i.d. edge weights.
///
/// The label is `maxcut-{degree}reg-{dist}/n{n}/seed{seed}` so the instance
/// class is everything before the first `/`.
pub fn gen_random_weighted_maxcut(n: usize, degree: usize, weights: WeightDist, seed: u64) -> Result<SpinPolynomial> {
    if degree == 0 || degree >= n {
        return Err(Error::invalid(format!(
            "need 0 < degree < n, got degree {degree}, n {n}"
        )));
    }
    if (n * degree) % 2 == 1 {
        return Err(Error::invalid(format!("n·degree = {} is odd", n * degree)));
    }
    let mut rng = seed::rng(seed);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, degree)).collect();
    let edges = (0..MAX_PAIRING_ATTEMPTS)
        .find_map(|_| {
            stubs.shuffle(&mut rng);
            pair_stubs(&stubs)
        })
        .ok_or_else(|| Error::RetryExhausted {
            what: format!("random {degree}-regular graph on {n} vertices"),
            attempts: MAX_PAIRING_ATTEMPTS,
        })?;
    let weighted: Vec<(usize, usize, f64)> = edges
        .into_iter()
        .map(|(u, v)| {
            let w = match weights {
                WeightDist::Unit => 1.0,
                WeightDist::Uniform01 => rng.random::<f64>(),
                WeightDist::Gauss01 => StandardNormal.sample(&mut rng),
            };
            (u, v, w)
        })
        .collect();
    Ok(gen_maxcut(&weighted, n)?.with_label(format!("maxcut-{degree}reg-{}/n{n}/seed{seed}", weights.name())))
}

/// Pairs consecutive stubs into edges; `None` on a self-loop or repeated edge.
fn pair_stubs(stubs: &[usize]) -> Option<BTreeSet<(usize, usize)>> {
    let mut edges = BTreeSet::new();
    for pair in stubs.chunks_exact(2) {
        let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
        if u == v || !edges.insert((u, v)) {
            return None;
        }
    }
    Some(edges)
}
