//! Exact evolution of the noisy channel. ρ is stored as a 2n-qubit vector
//! with row bits on qubits `0..n` and column bits on `n..2n`, so the width
//! cap applies to 2n.

use super::noise::NoiseModel;
use super::statevector::{check_cap, Statevector};
use super::statevector::{fsim, hadamard, pauli_y, sqrt_w, sqrt_x, sqrt_y, Matrix2, Matrix4};
use crate::circuit::{Circuit, Gate, Layer};
use crate::error::{invalid, Result};
use num_complex::Complex64;

fn conj2(m: Matrix2) -> Matrix2 {
    m.map(|row| row.map(|v| v.conj()))
}

fn conj4(m: Matrix4) -> Matrix4 {
    m.map(|row| row.map(|v| v.conj()))
}

fn transpose2(m: Matrix2) -> Matrix2 {
    std::array::from_fn(|r| std::array::from_fn(|k| m[k][r]))
}

fn transpose4(m: Matrix4) -> Matrix4 {
    std::array::from_fn(|r| std::array::from_fn(|k| m[k][r]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    vec: Statevector,
}

impl DensityMatrix {
    /// |0…0⟩⟨0…0|.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return invalid("density matrix needs at least one qubit");
        }
        check_cap(2 * n_qubits)?;
        Ok(Self {
            n_qubits,
            vec: Statevector::zero(2 * n_qubits)?,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// ⟨row|ρ|col⟩.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.vec.amplitudes()[row | col << self.n_qubits]
    }

    pub fn trace(&self) -> f64 {
        (0..1usize << self.n_qubits)
            .map(|x| self.entry(x, x).re)
            .sum()
    }

    /// Diagonal of ρ: the outcome distribution.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..1usize << self.n_qubits)
            .map(|x| self.entry(x, x).re.max(0.0))
            .collect()
    }

    /// ⟨ψ|ρ|ψ⟩.
    pub fn fidelity(&self, psi: &Statevector) -> Result<f64> {
        if psi.n_qubits() != self.n_qubits {
            return invalid("state and density matrix widths differ");
        }
        let a = psi.amplitudes();
        let dim = a.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for col in 0..dim {
            let mut row_sum = Complex64::new(0.0, 0.0);
            for (row, ar) in a.iter().enumerate() {
                row_sum += ar.conj() * self.entry(row, col);
            }
            acc += row_sum * a[col];
        }
        Ok(acc.re)
    }

    /// ρ → UρU†.
    pub fn apply_gate(&mut self, g: &Gate) {
        self.vec.apply_gate(g);
        self.apply_column(g, false);
    }

    /// ρ → U†ρU.
    pub fn apply_gate_adjoint(&mut self, g: &Gate) {
        self.vec.apply_gate_adjoint(g);
        self.apply_column(g, true);
    }

    // Column side: conj(U), or conj(U†) = Uᵀ for the adjoint.
    fn apply_column(&mut self, g: &Gate, adjoint: bool) {
        let n = self.n_qubits;
        let v = &mut self.vec;
        let m1 = |m: Matrix2| if adjoint { transpose2(m) } else { conj2(m) };
        let sign = if adjoint { 1.0 } else { -1.0 };
        match *g {
            Gate::H(q) => v.apply_matrix1(q + n, &hadamard()),
            Gate::SqrtX(q) => v.apply_matrix1(q + n, &m1(sqrt_x())),
            Gate::SqrtY(q) => v.apply_matrix1(q + n, &m1(sqrt_y())),
            Gate::SqrtW(q) => v.apply_matrix1(q + n, &m1(sqrt_w())),
            Gate::PauliX(q) => v.apply_x(q + n),
            Gate::PauliY(q) => v.apply_matrix1(q + n, &conj2(pauli_y())),
            Gate::PauliZ(q) => v.apply_z(q + n),
            Gate::FSim { a, b, theta, phi } => {
                let m = fsim(theta, phi);
                let m = if adjoint { transpose4(m) } else { conj4(m) };
                v.apply_matrix2(a + n, b + n, &m)
            }
            Gate::CZ(a, b) => v.apply_cz(a + n, b + n),
            Gate::CNOT { control, target } => v.apply_cnot(control + n, target + n),
            Gate::ZZ { a, b, angle } => v.apply_gate(&Gate::ZZ {
                a: a + n,
                b: b + n,
                angle: sign * angle,
            }),
            Gate::DiagonalPhase { theta, mask } => v.apply_gate(&Gate::DiagonalPhase {
                theta: sign * theta,
                mask: mask << n,
            }),
        }
    }

    pub fn apply_layer(&mut self, layer: &Layer) {
        for g in &layer.gates {
            self.apply_gate(g);
        }
    }

    pub fn apply_layer_adjoint(&mut self, layer: &Layer) {
        for g in &layer.gates {
            self.apply_gate_adjoint(g);
        }
    }

    /// Depolarizing channel with Pauli probability `eps` on qubit `q`:
    /// populations relax toward each other by 2ε/3, coherences shrink by
    /// 1 − 4ε/3.
    pub fn depolarize(&mut self, q: usize, eps: f64) {
        if eps == 0.0 {
            return;
        }
        let (rb, cb) = (1usize << q, 1usize << (q + self.n_qubits));
        let mix = 2.0 * eps / 3.0;
        let shrink = 1.0 - 4.0 * eps / 3.0;
        let amps = self.vec.amplitudes_mut();
        for i in 0..amps.len() {
            if i & (rb | cb) != 0 {
                continue;
            }
            let (i00, i11) = (i, i | rb | cb);
            let (a, b) = (amps[i00], amps[i11]);
            amps[i00] = a * (1.0 - mix) + b * mix;
            amps[i11] = b * (1.0 - mix) + a * mix;
            amps[i | rb] *= shrink;
            amps[i | cb] *= shrink;
        }
    }

    /// One noise location on every qubit.
    pub fn apply_noise(&mut self, noise: &NoiseModel) {
        for q in 0..self.n_qubits {
            self.depolarize(q, noise.epsilon());
        }
    }

    /// Outcome distribution after the readout flip channel, if any.
    pub fn readout_probabilities(&self, noise: &NoiseModel) -> Vec<f64> {
        let mut p = self.probabilities();
        if let Some(f) = noise.measurement_flip().filter(|&f| f > 0.0) {
            for q in 0..self.n_qubits {
                let bit = 1usize << q;
                for x in 0..p.len() {
                    if x & bit == 0 {
                        let (a, b) = (p[x], p[x | bit]);
                        p[x] = (1.0 - f) * a + f * b;
                        p[x | bit] = (1.0 - f) * b + f * a;
                    }
                }
            }
        }
        p
    }
}

/// The noisy output state of `c`, with noise after every layer.
pub fn evolve_density(c: &Circuit, noise: &NoiseModel) -> Result<DensityMatrix> {
    let mut rho = DensityMatrix::zero(c.n_qubits())?;
    for layer in c.layers() {
        rho.apply_layer(layer);
        rho.apply_noise(noise);
    }
    Ok(rho)
}

/// Exact Loschmidt echo: ⟨0|ρ|0⟩ after `C`, then `C†`, with noise after
/// every layer of both halves.
pub fn exact_echo(c: &Circuit, noise: &NoiseModel) -> Result<f64> {
    let mut rho = evolve_density(c, noise)?;
    for layer in c.layers().iter().rev() {
        rho.apply_layer_adjoint(layer);
        rho.apply_noise(noise);
    }
    Ok(rho.entry(0, 0).re)
}
