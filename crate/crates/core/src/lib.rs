//! Desk-scale random circuit sampling: circuit ensembles, exact and noisy
//! simulation, linear XEB benchmarking and spoofing, and sample-based
//! verification schemes with a verifier/prover harness.

pub mod circuit;
pub mod error;
pub mod estimate;
pub mod protocol;
pub mod rng;
pub mod sim;
pub mod verification;
pub mod xeb;

pub use circuit::{Circuit, Ensemble, Gate, GraphSpec, Layer};
pub use error::{Error, ProtocolErrorCode, Result};
pub use estimate::Estimate;
pub use sim::{NoiseModel, SampleSet, Statevector};
