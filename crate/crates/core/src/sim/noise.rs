use super::sampling::{BornSampler, SampleMeta, SampleSet};
use super::statevector::{check_cap, simulate, Statevector};
use crate::circuit::Circuit;
use crate::error::{invalid, Result};
use crate::estimate::Estimate;
use crate::rng::{base_seed, stream, LabRng};
use rand::Rng;
use rayon::prelude::*;

/// Local depolarizing noise: after every layer each qubit independently
/// suffers a uniformly random Pauli with probability `epsilon`. An optional
/// classical bit flip acts on every measured bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    epsilon: f64,
    measurement_flip: Option<f64>,
}

impl NoiseModel {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return invalid(format!("noise strength {epsilon} outside [0, 1]"));
        }
        Ok(Self {
            epsilon,
            measurement_flip: None,
        })
    }

    pub fn noiseless() -> Self {
        Self {
            epsilon: 0.0,
            measurement_flip: None,
        }
    }

    pub fn with_measurement_flip(mut self, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return invalid(format!("flip probability {p} outside [0, 1]"));
        }
        self.measurement_flip = Some(p);
        Ok(self)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn measurement_flip(&self) -> Option<f64> {
        self.measurement_flip
    }

    pub fn is_noiseless(&self) -> bool {
        self.epsilon == 0.0
    }

    /// One noise location on every qubit.
    pub fn inject<R: Rng + ?Sized>(&self, psi: &mut Statevector, rng: &mut R) {
        if self.epsilon == 0.0 {
            return;
        }
        for q in 0..psi.n_qubits() {
            if rng.gen::<f64>() < self.epsilon {
                match rng.gen_range(0..3) {
                    0 => psi.apply_x(q),
                    1 => psi.apply_y(q),
                    _ => psi.apply_z(q),
                }
            }
        }
    }

    /// Applies the readout flip channel to an outcome.
    pub fn flip_readout<R: Rng + ?Sized>(&self, x: u64, n: usize, rng: &mut R) -> u64 {
        match self.measurement_flip {
            Some(p) if p > 0.0 => {
                let mut out = x;
                for q in 0..n {
                    if rng.gen::<f64>() < p {
                        out ^= 1 << q;
                    }
                }
                out
            }
            _ => x,
        }
    }
}

/// Runs `f` for trajectories `0..count`, each on its own RNG stream derived
/// from `base`. Output order is the trajectory order.
pub fn run_trajectories<T, F>(count: usize, base: u64, tag: &str, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut LabRng) -> T + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(base, tag, i as u64);
            f(i, &mut rng)
        })
        .collect()
}

/// One pure-state unraveling of the noisy circuit.
pub fn noisy_trajectory<R: Rng + ?Sized>(
    c: &Circuit,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<Statevector> {
    let mut psi = Statevector::zero(c.n_qubits())?;
    for layer in c.layers() {
        psi.apply_layer(layer);
        noise.inject(&mut psi, rng);
    }
    Ok(psi)
}

/// Fidelity ⟨C|ρ_C|C⟩ as the trajectory mean of |⟨C|ψ⟩|².
pub fn estimate_fidelity<R: Rng + ?Sized>(
    c: &Circuit,
    noise: &NoiseModel,
    n_traj: usize,
    rng: &mut R,
) -> Result<Estimate> {
    if n_traj < 2 {
        return invalid("fidelity estimation needs at least two trajectories");
    }
    check_cap(c.n_qubits())?;
    let ideal = simulate(c)?;
    if noise.is_noiseless() {
        return Ok(Estimate::exact(1.0, n_traj));
    }
    let base = base_seed(rng);
    let values = run_trajectories(n_traj, base, "fidelity", |_, r| {
        noisy_trajectory(c, noise, r)
            .map(|psi| ideal.overlap(&psi))
            .expect("width checked above")
    });
    Ok(Estimate::from_values(&values))
}

/// Probability of returning to |0…0⟩ after running `C` and then `C†`, with
/// noise after every layer of both halves.
pub fn loschmidt_echo<R: Rng + ?Sized>(
    c: &Circuit,
    noise: &NoiseModel,
    n_traj: usize,
    rng: &mut R,
) -> Result<Estimate> {
    if n_traj < 1 {
        return invalid("echo needs at least one trajectory");
    }
    check_cap(c.n_qubits())?;
    let base = base_seed(rng);
    let values = run_trajectories(n_traj, base, "echo", |_, r| {
        let mut psi = Statevector::zero(c.n_qubits()).expect("width checked above");
        for layer in c.layers() {
            psi.apply_layer(layer);
            noise.inject(&mut psi, r);
        }
        for layer in c.layers().iter().rev() {
            psi.apply_layer_adjoint(layer);
            noise.inject(&mut psi, r);
        }
        psi.probability(0)
    });
    Ok(Estimate::from_values(&values))
}

/// `k` samples of the noisy circuit spread evenly over `n_traj`
/// trajectories, with readout flips applied.
pub fn sample_noisy<R: Rng + ?Sized>(
    c: &Circuit,
    noise: &NoiseModel,
    k: usize,
    n_traj: usize,
    rng: &mut R,
) -> Result<SampleSet> {
    if k == 0 || n_traj == 0 {
        return invalid("need at least one sample and one trajectory");
    }
    check_cap(c.n_qubits())?;
    let n = c.n_qubits();
    let n_traj = n_traj.min(k);
    let base = base_seed(rng);
    let per = k / n_traj;
    let extra = k % n_traj;
    let chunks = run_trajectories(n_traj, base, "samples", |i, r| {
        let psi = noisy_trajectory(c, noise, r).expect("width checked above");
        let sampler = BornSampler::from_state(&psi);
        let count = per + usize::from(i < extra);
        (0..count)
            .map(|_| {
                let x = sampler.draw(r);
                noise.flip_readout(x, n, r)
            })
            .collect::<Vec<u64>>()
    });
    SampleSet::new(
        c.id(),
        n,
        chunks.concat(),
        SampleMeta {
            seed: base,
            trajectories: n_traj,
            eps: noise.epsilon(),
        },
    )
}
