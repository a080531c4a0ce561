//! Regenerates `data/transfer_library.json`.
//!
//! For every problem class, each training instance is rescaled and its exact
//! QAOA energy minimised locally. Depth 1 starts from the best point of a
//! grid over the mean training energy; depth p + 1 starts from INTERP of the
//! depth-p mean. The stored entry is the elementwise mean over instances.
//!
//!     cargo run --release -p qaoa-core --example build_transfer_library

use std::f64::consts::PI;

use qaoa_core::problem::{gen_labs, gen_random_weighted_maxcut, SpinPolynomial, WeightDist};
use qaoa_core::schedules::interp_extend;
use qaoa_core::tuner::{minimize_noiseless, transfer_parameters, LibraryEntry, TransferLibrary};
use qaoa_core::{QaoaParameters, Simulator};

const TRAIN_SEEDS: std::ops::Range<u64> = 1000..1010;

fn simulators(instances: &[SpinPolynomial]) -> Vec<Simulator> {
    instances
        .iter()
        .map(|p| Simulator::new(&p.rescale().unwrap().0).unwrap())
        .collect()
}

fn depth_one_start(sims: &[Simulator]) -> QaoaParameters {
    let mut best = (f64::INFINITY, QaoaParameters::zeros(1));
    for i in 1..=40 {
        for j in -20..=20 {
            let params = QaoaParameters::new(vec![i as f64 * 0.025], vec![j as f64 * PI / 80.0]).unwrap();
            let e: f64 = sims.iter().map(|s| s.evolve_energy(&params)).sum();
            if e < best.0 {
                best = (e, params);
            }
        }
    }
    best.1
}

fn train(class: &str, instances: Vec<SpinPolynomial>, max_p: usize, lib: &mut TransferLibrary) {
    let sims = simulators(&instances);
    let mut start = depth_one_start(&sims);
    for p in 1..=max_p {
        let optimized: Vec<QaoaParameters> = sims
            .iter()
            .map(|sim| {
                let r = minimize_noiseless(
                    |x| sim.evolve_energy(&QaoaParameters::from_flat(x).unwrap()),
                    &start.to_flat(),
                    0.05,
                    1e-5,
                    4000,
                )
                .unwrap();
                QaoaParameters::from_flat(&r.x).unwrap()
            })
            .collect();
        let mean = transfer_parameters(&optimized).unwrap();
        eprintln!("{class} p={p}: {mean:?}");
        lib.insert(LibraryEntry {
            class: class.to_string(),
            p,
            gammas: mean.gammas.clone(),
            betas: mean.betas.clone(),
            provenance: format!(
                "mean of {} exactly optimized rescaled instances ({})",
                instances.len(),
                instances.iter().map(|i| i.label()).collect::<Vec<_>>().join(", ")
            ),
        });
        start = interp_extend(&mean).unwrap();
    }
}

fn main() {
    let mut lib = TransferLibrary::empty();
    for dist in [WeightDist::Unit, WeightDist::Uniform01, WeightDist::Gauss01] {
        let instances: Vec<_> = TRAIN_SEEDS
            .map(|s| gen_random_weighted_maxcut(10, 3, dist, s).unwrap())
            .collect();
        let class = instances[0].class().to_string();
        train(&class, instances, 5, &mut lib);
    }
    let labs: Vec<_> = (6..=10).map(|n| gen_labs(n).unwrap()).collect();
    train("labs", labs, 8, &mut lib);

    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/transfer_library.json");
    let mut text = serde_json::to_string_pretty(&lib).unwrap();
    text.push('\n');
    std::fs::write(path, text).unwrap();
    eprintln!("wrote {path}");
}
