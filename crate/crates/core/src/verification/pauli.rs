use crate::sim::{hadamard, Statevector};
use num_complex::Complex64;
use std::fmt;

/// i^phase · ∏_q X_q^{x_q} Z_q^{z_q}, with Z acting first on each qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    pub n: usize,
    pub x: u64,
    pub z: u64,
    phase: u8,
}

const I_POW: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            x: 0,
            z: 0,
            phase: 0,
        }
    }

    pub fn new(n: usize, x: u64, z: u64) -> Self {
        Self { n, x, z, phase: 0 }
    }

    /// Hermitian string with a `+` sign from letters I/X/Y/Z, qubit 0 first.
    pub fn from_word(word: &str) -> Option<Self> {
        let mut p = Self::identity(word.chars().count());
        for (q, c) in word.chars().enumerate() {
            let (x, z) = match c {
                'I' => (0, 0),
                'X' => (1, 0),
                'Y' => (1, 1),
                'Z' => (0, 1),
                _ => return None,
            };
            p.x |= x << q;
            p.z |= z << q;
        }
        p.phase = (p.y_mask().count_ones() % 4) as u8;
        Some(p)
    }

    pub fn negate(mut self) -> Self {
        self.phase = (self.phase + 2) % 4;
        self
    }

    pub fn multiply(&self, other: &PauliString) -> PauliString {
        debug_assert_eq!(self.n, other.n);
        let swaps = (self.z & other.x).count_ones() as u8;
        PauliString {
            n: self.n,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            phase: (self.phase + other.phase + 2 * swaps) % 4,
        }
    }

    /// Qubits carrying a Y letter.
    pub fn y_mask(&self) -> u64 {
        self.x & self.z
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    /// Overall factor in front of the letter word, as a power of i. Each Y
    /// letter absorbs a factor −i (XZ = −iY).
    pub fn word_phase(&self) -> u8 {
        (self.phase + 4 - (self.y_mask().count_ones() % 4) as u8) % 4
    }

    /// ±1 for Hermitian strings.
    pub fn sign(&self) -> Option<i8> {
        match self.word_phase() {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    pub fn letter(&self, q: usize) -> char {
        match (self.x >> q & 1, self.z >> q & 1) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (0, 1) => 'Z',
            _ => 'Y',
        }
    }

    pub fn word(&self) -> String {
        (0..self.n).map(|q| self.letter(q)).collect()
    }

    pub fn apply(&self, psi: &Statevector) -> Statevector {
        let a = psi.amplitudes();
        let pre = I_POW[self.phase as usize];
        let (x, z) = (self.x as usize, self.z as usize);
        let amps = (0..a.len())
            .map(|y| {
                let src = y ^ x;
                let s = if (src & z).count_ones() % 2 == 1 {
                    -1.0
                } else {
                    1.0
                };
                pre * s * a[src]
            })
            .collect();
        Statevector::from_amplitudes(amps).expect("Pauli strings are unitary")
    }

    pub fn expectation(&self, psi: &Statevector) -> f64 {
        psi.inner(&self.apply(psi)).re
    }

    /// Rotates `psi` so that measuring the support in the computational
    /// basis measures the letters: H for X, S†·H for Y.
    pub fn rotate_to_z(&self, psi: &mut Statevector) {
        let h = hadamard();
        let s_dag = [
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0)],
        ];
        for q in 0..self.n {
            match self.letter(q) {
                'X' => psi.apply_matrix1(q, &h),
                'Y' => {
                    psi.apply_matrix1(q, &s_dag);
                    psi.apply_matrix1(q, &h);
                }
                _ => {}
            }
        }
    }

    /// Eigenvalue attached to a measured bitstring after [`rotate_to_z`].
    ///
    /// [`rotate_to_z`]: PauliString::rotate_to_z
    pub fn eigenvalue(&self, outcome: u64) -> f64 {
        let parity = (outcome & self.support()).count_ones() % 2;
        let sign = f64::from(self.sign().unwrap_or(1));
        if parity == 1 {
            -sign
        } else {
            sign
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["+", "+i", "-", "-i"][self.word_phase() as usize];
        write!(f, "{prefix}{}", self.word())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_grid_rcs, GridOptions};
    use crate::rng::seeded;
    use crate::sim::sample;
    use crate::sim::simulate;

    #[test]
    fn xz_is_minus_i_y() {
        let x = PauliString::new(1, 1, 0);
        let z = PauliString::new(1, 0, 1);
        let xz = x.multiply(&z);
        assert_eq!(xz.letter(0), 'Y');
        assert_eq!(xz.word_phase(), 3);
        assert_eq!(xz.sign(), None);
        let zx = z.multiply(&x);
        assert_eq!(format!("{zx}"), "+iY");
        let y = PauliString::from_word("Y").unwrap();
        assert_eq!(y.sign(), Some(1));
        assert_eq!(y.multiply(&y), PauliString::identity(1));
        assert_eq!(format!("{}", y.negate()), "-Y");
    }

    #[test]
    fn expectation_matches_sampled_eigenvalues() {
        let c = build_grid_rcs(2, 2, 3, GridOptions::default(), 9).unwrap();
        let psi = simulate(&c).unwrap();
        let p = PauliString::from_word("IYZX").unwrap().negate();
        let exact = p.expectation(&psi);
        let mut rotated = psi.clone();
        p.rotate_to_z(&mut rotated);
        let s = sample(&rotated, 50_000, &mut seeded(1)).unwrap();
        let mean = s.outcomes().iter().map(|&o| p.eigenvalue(o)).sum::<f64>() / 50_000.0;
        assert!((mean - exact).abs() < 0.02, "{mean} vs {exact}");
    }

    #[test]
    fn square_matches_product() {
        let psi = simulate(&build_grid_rcs(1, 3, 2, GridOptions::default(), 2).unwrap()).unwrap();
        for (x, z) in [(0b101, 0b011), (0b111, 0b111), (0, 0b100)] {
            let p = PauliString::new(3, x, z);
            let back = p.apply(&p.apply(&psi));
            let sq = p.multiply(&p);
            let target = if sq.word_phase() == 0 { 1.0 } else { -1.0 };
            for (a, b) in back.amplitudes().iter().zip(psi.amplitudes()) {
                assert!((a - b * target).norm() < 1e-12);
            }
        }
    }
}
