//! Bipartition spoofer: drop every gate that straddles a cut, simulate the
//! two halves independently, and sample their product distribution. The
//! cost is exponential only in the larger block.

use super::expected_xeb;
use crate::circuit::{mask_qubits, Circuit, Ensemble, Gate, Layer};
use crate::error::{invalid, Result};
use crate::rng::{base_seed, stream};
use crate::sim::{check_cap, simulate, BornSampler, SampleMeta, SampleSet, Statevector};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

/// A proper, nonempty split of the register into block A and its complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bipartition {
    n: usize,
    block_a: u64,
}

impl Bipartition {
    pub fn new(n: usize, block_a: &[usize]) -> Result<Self> {
        if n == 0 || n > 64 {
            return invalid(format!("register size {n} out of range"));
        }
        let mut mask = 0u64;
        for &q in block_a {
            if q >= n {
                return invalid(format!("qubit {q} outside the {n}-qubit register"));
            }
            mask |= 1 << q;
        }
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        if mask == 0 || mask == full {
            return invalid("bipartition must be nonempty and proper");
        }
        Ok(Self { n, block_a: mask })
    }

    /// Qubits `0..k` against the rest.
    pub fn first(n: usize, k: usize) -> Result<Self> {
        Self::new(n, &(0..k).collect::<Vec<_>>())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block_a(&self) -> Vec<usize> {
        mask_qubits(self.block_a)
    }

    pub fn block_b(&self) -> Vec<usize> {
        (0..self.n).filter(|q| self.block_a >> q & 1 == 0).collect()
    }
}

fn remap(g: &Gate, index: &[usize]) -> Gate {
    let m = |q: usize| index[q];
    match *g {
        Gate::H(q) => Gate::H(m(q)),
        Gate::SqrtX(q) => Gate::SqrtX(m(q)),
        Gate::SqrtY(q) => Gate::SqrtY(m(q)),
        Gate::SqrtW(q) => Gate::SqrtW(m(q)),
        Gate::PauliX(q) => Gate::PauliX(m(q)),
        Gate::PauliY(q) => Gate::PauliY(m(q)),
        Gate::PauliZ(q) => Gate::PauliZ(m(q)),
        Gate::FSim { a, b, theta, phi } => Gate::FSim {
            a: m(a),
            b: m(b),
            theta,
            phi,
        },
        Gate::CZ(a, b) => Gate::CZ(m(a), m(b)),
        Gate::CNOT { control, target } => Gate::CNOT {
            control: m(control),
            target: m(target),
        },
        Gate::ZZ { a, b, angle } => Gate::ZZ {
            a: m(a),
            b: m(b),
            angle,
        },
        Gate::DiagonalPhase { theta, mask } => Gate::DiagonalPhase {
            theta,
            mask: mask_qubits(mask)
                .into_iter()
                .fold(0, |acc, q| acc | 1 << m(q)),
        },
    }
}

/// The two block circuits with crossing gates removed, and the number of
/// gates removed.
pub fn split_circuit(c: &Circuit, cut: &Bipartition) -> Result<(Circuit, Circuit, usize)> {
    if cut.n() != c.n_qubits() {
        return invalid("bipartition size does not match the circuit");
    }
    let (qa, qb) = (cut.block_a(), cut.block_b());
    let mut index = vec![0usize; c.n_qubits()];
    for (i, &q) in qa.iter().enumerate() {
        index[q] = i;
    }
    for (i, &q) in qb.iter().enumerate() {
        index[q] = i;
    }
    let mut deleted = 0;
    let mut la = Vec::with_capacity(c.depth());
    let mut lb = Vec::with_capacity(c.depth());
    for layer in c.layers() {
        let (mut ga, mut gb) = (Vec::new(), Vec::new());
        for g in &layer.gates {
            let s = g.support_mask();
            if s & !cut.block_a == 0 {
                ga.push(remap(g, &index));
            } else if s & cut.block_a == 0 {
                gb.push(remap(g, &index));
            } else {
                deleted += 1;
            }
        }
        la.push(Layer::new(ga));
        lb.push(Layer::new(gb));
    }
    Ok((
        Circuit::new(qa.len(), la, Ensemble::Custom, c.seed())?,
        Circuit::new(qb.len(), lb, Ensemble::Custom, c.seed())?,
        deleted,
    ))
}

fn scatter(x: u64, qubits: &[usize]) -> u64 {
    qubits
        .iter()
        .enumerate()
        .fold(0, |acc, (i, &q)| acc | ((x >> i) & 1) << q)
}

/// The spoofer's output state ψ_A ⊗ ψ_B on the full register.
pub fn product_state(c: &Circuit, cut: &Bipartition) -> Result<Statevector> {
    check_cap(c.n_qubits())?;
    let (ca, cb, _) = split_circuit(c, cut)?;
    let (pa, pb) = (simulate(&ca)?, simulate(&cb)?);
    let (qa, qb) = (cut.block_a(), cut.block_b());
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << c.n_qubits()];
    for (xb, &b) in pb.amplitudes().iter().enumerate() {
        let hi = scatter(xb as u64, &qb);
        for (xa, &a) in pa.amplitudes().iter().enumerate() {
            amps[(hi | scatter(xa as u64, &qa)) as usize] = a * b;
        }
    }
    Statevector::from_amplitudes(amps)
}

/// `k` spoofed samples: independent Born draws from each block, merged.
pub fn spoof_samples<R: Rng + ?Sized>(
    c: &Circuit,
    cut: &Bipartition,
    k: usize,
    rng: &mut R,
) -> Result<SampleSet> {
    if k == 0 {
        return invalid("need at least one sample");
    }
    let (ca, cb, _) = split_circuit(c, cut)?;
    let (sa, sb) = (
        BornSampler::from_state(&simulate(&ca)?),
        BornSampler::from_state(&simulate(&cb)?),
    );
    let (qa, qb) = (cut.block_a(), cut.block_b());
    let base = base_seed(rng);
    let mut r = stream(base, "spoof", 0);
    let outcomes = (0..k)
        .map(|_| scatter(sa.draw(&mut r), &qa) | scatter(sb.draw(&mut r), &qb))
        .collect();
    SampleSet::new(
        c.id(),
        c.n_qubits(),
        outcomes,
        SampleMeta {
            seed: base,
            trajectories: 0,
            eps: 0.0,
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpoofReport {
    /// Expected χ of the spoofed samples.
    pub chi: f64,
    /// |⟨C|ψ_A ⊗ ψ_B⟩|².
    pub fidelity: f64,
    pub deleted_gates: usize,
}

/// Exact expected XEB and true fidelity of the spoofer's product state.
pub fn spoof_xeb_exact(c: &Circuit, cut: &Bipartition) -> Result<SpoofReport> {
    let ideal = simulate(c)?;
    let spoof = product_state(c, cut)?;
    let (_, _, deleted_gates) = split_circuit(c, cut)?;
    Ok(SpoofReport {
        chi: expected_xeb(&ideal.probabilities(), &spoof.probabilities()),
        fidelity: ideal.overlap(&spoof),
        deleted_gates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_grid_rcs, GridOptions};
    use crate::rng::seeded;
    use crate::xeb::{estimate_xeb, ideal_xeb};

    #[test]
    fn trivial_cuts_rejected() {
        assert!(Bipartition::new(4, &[]).is_err());
        assert!(Bipartition::new(4, &[0, 1, 2, 3]).is_err());
        assert!(Bipartition::new(4, &[4]).is_err());
    }

    #[test]
    fn uncut_circuit_is_reproduced_exactly() {
        // 2×3 grid cut between rows: the only vertical couplers are pattern 2
        // (down), so a depth-2 circuit has no crossing gates.
        let c = build_grid_rcs(2, 3, 2, GridOptions::default(), 1).unwrap();
        let cut = Bipartition::first(6, 3).unwrap();
        let (_, _, deleted) = split_circuit(&c, &cut).unwrap();
        assert_eq!(deleted, 0);
        let report = spoof_xeb_exact(&c, &cut).unwrap();
        assert!((report.fidelity - 1.0).abs() < 1e-12);
        let ideal = ideal_xeb(&simulate(&c).unwrap().probabilities());
        assert!((report.chi - ideal).abs() < 1e-10);
    }

    #[test]
    fn samples_match_exact_expectation() {
        let c = build_grid_rcs(2, 3, 6, GridOptions::default(), 2).unwrap();
        let cut = Bipartition::new(6, &[0, 1, 3]).unwrap();
        let report = spoof_xeb_exact(&c, &cut).unwrap();
        assert!(report.deleted_gates > 0);
        let s = spoof_samples(&c, &cut, 40_000, &mut seeded(3)).unwrap();
        let r = estimate_xeb(&s, &c).unwrap();
        assert!(
            (r.chi - report.chi).abs() < 4.0 * r.std_error,
            "{r:?} vs {report:?}"
        );
    }

    #[test]
    fn product_state_is_normalized_and_factorizes() {
        let c = build_grid_rcs(2, 2, 5, GridOptions::default(), 4).unwrap();
        let cut = Bipartition::new(4, &[1, 2]).unwrap();
        let psi = product_state(&c, &cut).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        let (ca, cb, _) = split_circuit(&c, &cut).unwrap();
        let (pa, pb) = (simulate(&ca).unwrap(), simulate(&cb).unwrap());
        // x = qubit1=1 (block a index 0), qubit3=1 (block b index 1)
        let x = 0b1010;
        let expected = pa.amplitudes()[0b01] * pb.amplitudes()[0b10];
        assert!((psi.amplitudes()[x] - expected).norm() < 1e-12);
    }
}
