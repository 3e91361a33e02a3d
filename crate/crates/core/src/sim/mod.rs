//! Exact statevector simulation, Born-rule sampling and trajectory-based
//! simulation of local depolarizing noise.

mod density;
mod noise;
mod sampling;
mod statevector;

pub use density::{evolve_density, exact_echo, DensityMatrix};
pub use noise::{
    estimate_fidelity, loschmidt_echo, noisy_trajectory, run_trajectories, sample_noisy, NoiseModel,
};
pub(crate) use sampling::{parse_err, parse_header};
pub use sampling::{sample, BornSampler, SampleMeta, SampleSet};
pub use statevector::{
    check_cap, fsim, hadamard, pauli_x, pauli_y, pauli_z, probability, qubit_cap, simulate, sqrt_w,
    sqrt_x, sqrt_y, Matrix2, Matrix4, Statevector, DEFAULT_QUBIT_CAP, QUBIT_CAP_ENV,
};
