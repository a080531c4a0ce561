//! Parameter setting for the Quantum Approximate Optimization Algorithm.
//!
//! The crate covers the full pipeline used to run QAOA under a tight shot
//! budget:
//!
//! * [`problem`] — classical cost functions as spin polynomials, instance
//!   generators (MaxCut, LABS), rescaling and a brute-force spectrum oracle.
//! * [`simulator`] — dense statevector evolution, exact energies, ground-state
//!   overlap and seeded shot sampling.
//! * [`schedules`] — linear/root/tangent/Fourier reparameterizations and the
//!   INTERP depth extension.
//! * [`tuner`] — parameter transfer, shot allocation, a COBYLA-style
//!   trust-region optimizer and the end-to-end tuning protocol.
//! * [`metrics`] — approximation ratio, time-to-solution, exponential scaling
//!   fits with bootstrap intervals and the depth-progression benchmark.
//!
//! # Conventions
//!
//! Basis index `z` stores variable `i` in bit `i` (bit 0 least significant)
//! and the spin of that variable is `s_i = 1 - 2 b_i`. All randomness comes
//! from `ChaCha20Rng` seeded through [`seed::derive_seed`], so results are
//! reproducible across platforms.

pub mod error;
pub mod io;
pub mod metrics;
pub mod problem;
pub mod schedules;
pub mod seed;
pub mod simulator;
pub mod tuner;

pub use error::{Error, Result};
pub use problem::{Limits, Spectrum, SpinPolynomial, SpinTerm};

pub use schedules::{Schedule, ScheduleSpec};
pub use simulator::{QaoaParameters, SampleSet, Simulator, StateVector};
