use crate::circuit::{Circuit, Gate, Layer};
use crate::error::{invalid, Error, Result};
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

pub type Matrix2 = [[Complex64; 2]; 2];
pub type Matrix4 = [[Complex64; 4]; 4];

/// Default ceiling on statevector width: 2^24 amplitudes, 256 MiB.
pub const DEFAULT_QUBIT_CAP: usize = 24;

/// Environment variable overriding [`DEFAULT_QUBIT_CAP`].
pub const QUBIT_CAP_ENV: &str = "RCS_LAB_MAX_QUBITS";

pub fn qubit_cap() -> usize {
    std::env::var(QUBIT_CAP_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&c: &usize| (1..=30).contains(&c))
        .unwrap_or(DEFAULT_QUBIT_CAP)
}

pub fn check_cap(n: usize) -> Result<()> {
    let cap = qubit_cap();
    if n > cap {
        return Err(Error::ResourceLimit { n, cap });
    }
    Ok(())
}

const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const ZERO: Complex64 = c(0.0, 0.0);
const ONE: Complex64 = c(1.0, 0.0);

/// √P = e^{iπ/4}(I − iP)/√2 for a Hermitian involution P.
fn sqrt_of_involution(p: Matrix2) -> Matrix2 {
    let pre = c(0.5, 0.5);
    let mut m = [[ZERO; 2]; 2];
    for r in 0..2 {
        for k in 0..2 {
            let id = if r == k { ONE } else { ZERO };
            m[r][k] = pre * (id - c(0.0, 1.0) * p[r][k]);
        }
    }
    m
}

pub fn pauli_x() -> Matrix2 {
    [[ZERO, ONE], [ONE, ZERO]]
}

pub fn pauli_y() -> Matrix2 {
    [[ZERO, c(0.0, -1.0)], [c(0.0, 1.0), ZERO]]
}

pub fn pauli_z() -> Matrix2 {
    [[ONE, ZERO], [ZERO, -ONE]]
}

pub fn hadamard() -> Matrix2 {
    let h = c(FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

pub fn sqrt_x() -> Matrix2 {
    sqrt_of_involution(pauli_x())
}

pub fn sqrt_y() -> Matrix2 {
    sqrt_of_involution(pauli_y())
}

pub fn sqrt_w() -> Matrix2 {
    let a = c(FRAC_1_SQRT_2, -FRAC_1_SQRT_2);
    sqrt_of_involution([[ZERO, a], [a.conj(), ZERO]])
}

/// fSim(θ, φ) in the basis |00⟩, |01⟩, |10⟩, |11⟩.
pub fn fsim(theta: f64, phi: f64) -> Matrix4 {
    let (s, co) = theta.sin_cos();
    let mut m = [[ZERO; 4]; 4];
    m[0][0] = ONE;
    m[1][1] = c(co, 0.0);
    m[1][2] = c(0.0, -s);
    m[2][1] = c(0.0, -s);
    m[2][2] = c(co, 0.0);
    m[3][3] = Complex64::from_polar(1.0, -phi);
    m
}

pub(crate) fn dagger2(m: Matrix2) -> Matrix2 {
    [
        [m[0][0].conj(), m[1][0].conj()],
        [m[0][1].conj(), m[1][1].conj()],
    ]
}

pub(crate) fn dagger4(m: Matrix4) -> Matrix4 {
    let mut out = [[ZERO; 4]; 4];
    for (r, row) in out.iter_mut().enumerate() {
        for (k, v) in row.iter_mut().enumerate() {
            *v = m[k][r].conj();
        }
    }
    out
}

/// Dense state of `n` qubits; amplitude index bit `q` is qubit `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// |0…0⟩.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_cap(n_qubits)?;
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[0] = ONE;
        Ok(Self { n_qubits, amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() || !amps.len().is_power_of_two() || amps.len() < 2 {
            return invalid("amplitude count must be a power of two ≥ 2");
        }
        let n_qubits = amps.len().trailing_zeros() as usize;
        check_cap(n_qubits)?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return invalid(format!("state norm {norm} differs from 1"));
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn probability(&self, x: u64) -> f64 {
        self.amps[x as usize].norm_sqr()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Statevector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// |⟨self|other⟩|².
    pub fn overlap(&self, other: &Statevector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// |self⟩ ⊗ |other⟩ with `self` on the low qubits.
    pub fn tensor(&self, other: &Statevector) -> Result<Statevector> {
        let n = self.n_qubits + other.n_qubits;
        check_cap(n)?;
        let lo = self.amps.len();
        let mut amps = vec![ZERO; lo * other.amps.len()];
        for (j, b) in other.amps.iter().enumerate() {
            for (i, a) in self.amps.iter().enumerate() {
                amps[j * lo + i] = a * b;
            }
        }
        Ok(Statevector { n_qubits: n, amps })
    }

    pub fn apply_matrix1(&mut self, q: usize, m: &Matrix2) {
        let step = 1usize << q;
        let len = self.amps.len();
        let mut base = 0;
        while base < len {
            for i in base..base + step {
                let j = i + step;
                let (a, b) = (self.amps[i], self.amps[j]);
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[j] = m[1][0] * a + m[1][1] * b;
            }
            base += 2 * step;
        }
    }

    /// Applies a 4×4 matrix whose row/column index is `2·bit(a) + bit(b)`.
    pub fn apply_matrix2(&mut self, a: usize, b: usize, m: &Matrix4) {
        let (ba, bb) = (1usize << a, 1usize << b);
        for i in 0..self.amps.len() {
            if i & (ba | bb) != 0 {
                continue;
            }
            let idx = [i, i | bb, i | ba, i | ba | bb];
            let v = idx.map(|k| self.amps[k]);
            for (r, &k) in idx.iter().enumerate() {
                self.amps[k] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
            }
        }
    }

    fn apply_diagonal_parity(&mut self, mask: u64, theta: f64) {
        let ph = Complex64::from_polar(1.0, theta);
        for (x, amp) in self.amps.iter_mut().enumerate() {
            if (x as u64 & mask).count_ones() & 1 == 1 {
                *amp *= ph;
            }
        }
    }

    pub fn apply_x(&mut self, q: usize) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                self.amps.swap(i, i | bit);
            }
        }
    }

    pub fn apply_z(&mut self, q: usize) {
        let bit = 1usize << q;
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & bit != 0 {
                *amp = -*amp;
            }
        }
    }

    pub fn apply_y(&mut self, q: usize) {
        let bit = 1usize << q;
        let (mi, pi) = (c(0.0, -1.0), c(0.0, 1.0));
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let j = i | bit;
                let (a, b) = (self.amps[i], self.amps[j]);
                self.amps[i] = mi * b;
                self.amps[j] = pi * a;
            }
        }
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        let (bc, bt) = (1usize << control, 1usize << target);
        for i in 0..self.amps.len() {
            if i & bc != 0 && i & bt == 0 {
                self.amps.swap(i, i | bt);
            }
        }
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) {
        let both = (1usize << a) | (1usize << b);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & both == both {
                *amp = -*amp;
            }
        }
    }

    fn apply_zz(&mut self, a: usize, b: usize, angle: f64) {
        let same = Complex64::from_polar(1.0, -angle / 2.0);
        let diff = same.conj();
        for (i, amp) in self.amps.iter_mut().enumerate() {
            let parity = ((i >> a) ^ (i >> b)) & 1;
            *amp *= if parity == 0 { same } else { diff };
        }
    }

    pub fn apply_gate(&mut self, g: &Gate) {
        match *g {
            Gate::H(q) => self.apply_matrix1(q, &hadamard()),
            Gate::SqrtX(q) => self.apply_matrix1(q, &sqrt_x()),
            Gate::SqrtY(q) => self.apply_matrix1(q, &sqrt_y()),
            Gate::SqrtW(q) => self.apply_matrix1(q, &sqrt_w()),
            Gate::PauliX(q) => self.apply_x(q),
            Gate::PauliY(q) => self.apply_y(q),
            Gate::PauliZ(q) => self.apply_z(q),
            Gate::FSim { a, b, theta, phi } => self.apply_matrix2(a, b, &fsim(theta, phi)),
            Gate::CZ(a, b) => self.apply_cz(a, b),
            Gate::CNOT { control, target } => self.apply_cnot(control, target),
            Gate::ZZ { a, b, angle } => self.apply_zz(a, b, angle),
            Gate::DiagonalPhase { theta, mask } => self.apply_diagonal_parity(mask, theta),
        }
    }

    pub fn apply_gate_adjoint(&mut self, g: &Gate) {
        match *g {
            Gate::H(_)
            | Gate::PauliX(_)
            | Gate::PauliY(_)
            | Gate::PauliZ(_)
            | Gate::CZ(..)
            | Gate::CNOT { .. } => self.apply_gate(g),
            Gate::SqrtX(q) => self.apply_matrix1(q, &dagger2(sqrt_x())),
            Gate::SqrtY(q) => self.apply_matrix1(q, &dagger2(sqrt_y())),
            Gate::SqrtW(q) => self.apply_matrix1(q, &dagger2(sqrt_w())),
            Gate::FSim { a, b, theta, phi } => self.apply_matrix2(a, b, &dagger4(fsim(theta, phi))),
            Gate::ZZ { a, b, angle } => self.apply_zz(a, b, -angle),
            Gate::DiagonalPhase { theta, mask } => self.apply_diagonal_parity(mask, -theta),
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
}

/// U_C|0…0⟩.
pub fn simulate(c: &Circuit) -> Result<Statevector> {
    let mut psi = Statevector::zero(c.n_qubits())?;
    for layer in c.layers() {
        psi.apply_layer(layer);
    }
    Ok(psi)
}

/// Born probability |⟨x|C|0⟩|².
pub fn probability(c: &Circuit, x: u64) -> Result<f64> {
    let n = c.n_qubits();
    if n < 64 && x >> n != 0 {
        return invalid(format!("outcome {x:#b} has more than {n} bits"));
    }
    Ok(simulate(c)?.probability(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_grid_rcs, build_iqp, Ensemble, GridOptions};
    use std::f64::consts::PI;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn empty_circuit_is_zero_state() {
        let psi = simulate(&Circuit::empty(2).unwrap()).unwrap();
        assert_eq!(psi.amplitudes(), &[ONE, ZERO, ZERO, ZERO]);
    }

    #[test]
    fn single_hadamard() {
        let circ =
            Circuit::new(1, vec![Layer::new(vec![Gate::H(0)])], Ensemble::Custom, 0).unwrap();
        let psi = simulate(&circ).unwrap();
        for a in psi.amplitudes() {
            assert!(close(*a, c(FRAC_1_SQRT_2, 0.0)));
        }
    }

    #[test]
    fn square_roots_square_to_paulis() {
        let mul = |a: Matrix2, b: Matrix2| {
            let mut m = [[ZERO; 2]; 2];
            for r in 0..2 {
                for k in 0..2 {
                    m[r][k] = a[r][0] * b[0][k] + a[r][1] * b[1][k];
                }
            }
            m
        };
        let w = {
            let a = c(FRAC_1_SQRT_2, -FRAC_1_SQRT_2);
            [[ZERO, a], [a.conj(), ZERO]]
        };
        for (root, target) in [(sqrt_x(), pauli_x()), (sqrt_y(), pauli_y()), (sqrt_w(), w)] {
            let sq = mul(root, root);
            for r in 0..2 {
                for k in 0..2 {
                    assert!(close(sq[r][k], target[r][k]));
                }
            }
        }
    }

    #[test]
    fn identity_probabilities() {
        let c = Circuit::empty(3).unwrap();
        assert_eq!(probability(&c, 0).unwrap(), 1.0);
        assert_eq!(probability(&c, 0b101).unwrap(), 0.0);
        assert!(probability(&c, 0b1000).is_err());
    }

    #[test]
    fn single_qubit_iqp_probability() {
        for theta in [0.3, 1.1, PI / 3.0, 2.9] {
            let c = build_iqp(1, &[(theta, 1)], None, 0).unwrap();
            let expected = (theta / 2.0).cos().powi(2);
            assert!((probability(&c, 0).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn adjoint_undoes_every_gate() {
        let c = build_grid_rcs(2, 3, 6, GridOptions::default(), 4).unwrap();
        let gates = [
            Gate::ZZ {
                a: 0,
                b: 4,
                angle: 0.7,
            },
            Gate::DiagonalPhase {
                theta: 0.4,
                mask: 0b110101,
            },
            Gate::CNOT {
                control: 5,
                target: 1,
            },
            Gate::CZ(2, 3),
            Gate::PauliY(2),
            Gate::H(1),
        ];
        let mut psi = simulate(&c).unwrap();
        let reference = psi.clone();
        for g in c.gates().chain(gates.iter()) {
            psi.apply_gate(g);
        }
        let all: Vec<Gate> = c.gates().chain(gates.iter()).copied().collect();
        for g in all.iter().rev() {
            psi.apply_gate_adjoint(g);
        }
        for (a, b) in psi.amplitudes().iter().zip(reference.amplitudes()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn norm_is_preserved_layer_by_layer() {
        let c = build_grid_rcs(3, 3, 10, GridOptions::default(), 2).unwrap();
        let mut psi = Statevector::zero(9).unwrap();
        for layer in c.layers() {
            psi.apply_layer(layer);
            assert!((psi.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            Statevector::zero(DEFAULT_QUBIT_CAP + 1),
            Err(Error::ResourceLimit { .. })
        ));
    }
}
