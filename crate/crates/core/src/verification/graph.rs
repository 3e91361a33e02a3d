//! Symmetry-based fidelity estimation for locally rotated graph states.
//!
//! The prepared state is |C⟩ = V|G⟩ with V = H^{⊗n}·R(θ) and R(θ) the
//! product of diag(1, e^{iθ_v}). Its symmetries are V K V† for K in the
//! stabilizer group of |G⟩, generated by K_v = X_v ∏_{w∈N(v)} Z_w.

use super::pauli::PauliString;
use crate::circuit::{build_rotated_graph_state, GraphSpec};
use crate::error::{invalid, Result};
use crate::estimate::Estimate;
use crate::rng::{base_seed, LabRng};
use crate::sim::{
    check_cap, hadamard, noisy_trajectory, run_trajectories, BornSampler, NoiseModel, Statevector,
};
use num_complex::Complex64;
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryOperator {
    /// Stabilizer of the unrotated graph state, with its sign.
    pub pauli: PauliString,
    /// θ_v of the local phase rotations.
    pub angles: Vec<f64>,
}

fn rotate_phases(psi: &mut Statevector, angles: &[f64], sign: f64) {
    for (v, &t) in angles.iter().enumerate() {
        if t != 0.0 {
            let m = [
                [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                [
                    Complex64::new(0.0, 0.0),
                    Complex64::from_polar(1.0, sign * t),
                ],
            ];
            psi.apply_matrix1(v, &m);
        }
    }
}

fn hadamard_wall(psi: &mut Statevector) {
    let h = hadamard();
    for q in 0..psi.n_qubits() {
        psi.apply_matrix1(q, &h);
    }
}

impl SymmetryOperator {
    pub fn n_qubits(&self) -> usize {
        self.pauli.n
    }

    pub fn word(&self) -> String {
        self.pauli.word()
    }

    pub fn sign(&self) -> i8 {
        self.pauli
            .sign()
            .expect("stabilizer elements are Hermitian")
    }

    /// V† ψ: undo the closing H wall, then the phase rotations.
    pub fn to_graph_frame(&self, psi: &mut Statevector) {
        hadamard_wall(psi);
        rotate_phases(psi, &self.angles, -1.0);
    }

    /// S ψ = V K V† ψ.
    pub fn apply(&self, psi: &Statevector) -> Statevector {
        let mut s = psi.clone();
        self.to_graph_frame(&mut s);
        let mut s = self.pauli.apply(&s);
        rotate_phases(&mut s, &self.angles, 1.0);
        hadamard_wall(&mut s);
        s
    }

    pub fn expectation(&self, psi: &Statevector) -> f64 {
        let mut s = psi.clone();
        self.to_graph_frame(&mut s);
        self.pauli.expectation(&s)
    }

    /// Mean eigenvalue over `shots` projective measurements of `psi`,
    /// performed with single-qubit rotations only.
    pub fn measure<R: Rng + ?Sized>(&self, psi: &Statevector, shots: usize, rng: &mut R) -> f64 {
        let mut s = psi.clone();
        self.to_graph_frame(&mut s);
        self.pauli.rotate_to_z(&mut s);
        let sampler = BornSampler::from_state(&s);
        (0..shots)
            .map(|_| self.pauli.eigenvalue(sampler.draw(rng)))
            .sum::<f64>()
            / shots as f64
    }
}

/// The n generators, one per vertex.
pub fn graph_symmetries(g: &GraphSpec) -> Vec<SymmetryOperator> {
    let n = g.n_vertices();
    (0..n)
        .map(|v| {
            let z = g
                .neighbours(v)
                .into_iter()
                .fold(0u64, |acc, w| acc | 1 << w);
            SymmetryOperator {
                pauli: PauliString::new(n, 1 << v, z),
                angles: g.angles().to_vec(),
            }
        })
        .collect()
}

/// Product of the generators selected by the bits of `subset`.
pub fn stabilizer_element(generators: &[SymmetryOperator], subset: u64) -> SymmetryOperator {
    let n = generators[0].n_qubits();
    let pauli = generators
        .iter()
        .enumerate()
        .filter(|(v, _)| subset >> v & 1 == 1)
        .fold(PauliString::identity(n), |acc, (_, s)| {
            acc.multiply(&s.pauli)
        });
    SymmetryOperator {
        pauli,
        angles: generators[0].angles.clone(),
    }
}

fn check_budget(n: usize, count: usize, shots: usize) -> Result<()> {
    if count < 2 || shots == 0 {
        return invalid("need at least two operators and one shot each");
    }
    if n == 0 || n > 63 {
        return invalid(format!("graph size {n} out of range"));
    }
    check_cap(n)
}

/// Average symmetry expectation over `n_stabilizers` uniformly drawn
/// elements of the full stabilizer group, each measured `shots` times on a
/// fresh state from `prepare`. For a stabilizer state this average is
/// ⟨C|ρ|C⟩ in expectation.
pub fn symmetry_average<F, R>(
    g: &GraphSpec,
    n_stabilizers: usize,
    shots: usize,
    prepare: F,
    rng: &mut R,
) -> Result<Estimate>
where
    F: Fn(&mut LabRng) -> Statevector + Sync,
    R: Rng + ?Sized,
{
    let n = g.n_vertices();
    check_budget(n, n_stabilizers, shots)?;
    let gens = graph_symmetries(g);
    let full = (1u64 << n) - 1;
    let base = base_seed(rng);
    let values = run_trajectories(n_stabilizers, base, "stabilizer", |_, r| {
        let op = stabilizer_element(&gens, r.gen::<u64>() & full);
        let psi = prepare(r);
        op.measure(&psi, shots, r)
    });
    Ok(Estimate::from_values(&values))
}

/// Fidelity of the noisy rotated graph state from the full-group average.
pub fn estimate_fidelity_graph<R: Rng + ?Sized>(
    g: &GraphSpec,
    noise: &NoiseModel,
    n_stabilizers: usize,
    shots: usize,
    rng: &mut R,
) -> Result<Estimate> {
    check_budget(g.n_vertices(), n_stabilizers, shots)?;
    let c = build_rotated_graph_state(g)?;
    symmetry_average(
        g,
        n_stabilizers,
        shots,
        |r| noisy_trajectory(&c, noise, r).expect("width checked above"),
        rng,
    )
}

/// Cheaper generator-only variant: measures each generator on
/// `trajectories` fresh states and returns the lower bound
/// F ≥ 1 − Σ_v (1 − ⟨S_v⟩)/2.
pub fn fidelity_bound_from_generators<R: Rng + ?Sized>(
    g: &GraphSpec,
    noise: &NoiseModel,
    trajectories: usize,
    shots: usize,
    rng: &mut R,
) -> Result<Estimate> {
    let n = g.n_vertices();
    check_budget(n, trajectories, shots)?;
    let c = build_rotated_graph_state(g)?;
    let gens = graph_symmetries(g);
    let base = base_seed(rng);
    let per_generator: Vec<Estimate> = gens
        .iter()
        .enumerate()
        .map(|(v, op)| {
            let values = run_trajectories(trajectories, base, &format!("generator-{v}"), |_, r| {
                let psi = noisy_trajectory(&c, noise, r).expect("width checked above");
                op.measure(&psi, shots, r)
            });
            Estimate::from_values(&values)
        })
        .collect();
    let value = 1.0
        - per_generator
            .iter()
            .map(|e| (1.0 - e.value) / 2.0)
            .sum::<f64>();
    let std_error = per_generator
        .iter()
        .map(|e| (e.std_error / 2.0).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(Estimate {
        value,
        std_error,
        n_samples: trajectories * n,
    })
}
