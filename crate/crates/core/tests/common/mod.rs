//! Reference implementations for integration tests: full 2^n×2^n matrices
//! built gate by gate from textbook definitions, with no use of the
//! library's simulators.
#![allow(dead_code)]

use num_complex::Complex64 as C;
use rand::seq::SliceRandom;
use rand::Rng;
use rcs_lab::circuit::{Circuit, Ensemble, Gate, Layer};
use std::f64::consts::FRAC_1_SQRT_2;

pub const TOL: f64 = 1e-9;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Row-major square matrix.
#[derive(Clone, Debug)]
pub struct Dense {
    pub dim: usize,
    pub a: Vec<C>,
}

impl Dense {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            a: vec![C::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.a[i * dim + i] = c(1.0, 0.0);
        }
        m
    }

    pub fn get(&self, r: usize, k: usize) -> C {
        self.a[r * self.dim + k]
    }

    pub fn mul(&self, o: &Dense) -> Dense {
        let d = self.dim;
        let mut out = Dense::zeros(d);
        for r in 0..d {
            for k in 0..d {
                let x = self.a[r * d + k];
                if x == C::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    out.a[r * d + j] += x * o.a[k * d + j];
                }
            }
        }
        out
    }

    pub fn dagger(&self) -> Dense {
        let d = self.dim;
        let mut out = Dense::zeros(d);
        for r in 0..d {
            for k in 0..d {
                out.a[k * d + r] = self.a[r * d + k].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Dense {
        Dense {
            dim: self.dim,
            a: self.a.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, o: &Dense) -> Dense {
        Dense {
            dim: self.dim,
            a: self.a.iter().zip(&o.a).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn trace(&self) -> C {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }
}

type M2 = [[C; 2]; 2];
type M4 = [[C; 4]; 4];

fn one_qubit(g: &Gate) -> Option<(usize, M2)> {
    let h = FRAC_1_SQRT_2;
    let (p, m) = (c(0.5, 0.5), c(0.5, -0.5));
    Some(match *g {
        Gate::H(q) => (q, [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]]),
        // e^{iπ/4} R_x(π/2)
        Gate::SqrtX(q) => (q, [[p, m], [m, p]]),
        Gate::SqrtY(q) => (q, [[p, -p], [p, p]]),
        // (1+i)/2·I + (1−i)/2·W with W = (X + Y)/√2
        Gate::SqrtW(q) => {
            let w01 = c(h, -h);
            let w10 = c(h, h);
            (q, [[p, m * w01], [m * w10, p]])
        }
        Gate::PauliX(q) => (q, [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]),
        Gate::PauliY(q) => (q, [[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]]),
        Gate::PauliZ(q) => (q, [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]]),
        _ => return None,
    })
}

/// Basis |q_a q_b⟩ with q_a the high bit of the 4-dim index.
fn two_qubit(g: &Gate) -> Option<(usize, usize, M4)> {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let diag = |d: [C; 4]| {
        let mut m = [[z; 4]; 4];
        for i in 0..4 {
            m[i][i] = d[i];
        }
        m
    };
    Some(match *g {
        Gate::CZ(a, b) => (a, b, diag([o, o, o, -o])),
        Gate::CNOT { control, target } => {
            let mut m = diag([o, o, z, z]);
            m[2][3] = o;
            m[3][2] = o;
            (control, target, m)
        }
        Gate::ZZ { a, b, angle } => {
            let (e, f) = (
                C::from_polar(1.0, -angle / 2.0),
                C::from_polar(1.0, angle / 2.0),
            );
            (a, b, diag([e, f, f, e]))
        }
        Gate::FSim { a, b, theta, phi } => {
            let mut m = diag([
                o,
                c(theta.cos(), 0.0),
                c(theta.cos(), 0.0),
                C::from_polar(1.0, -phi),
            ]);
            m[1][2] = c(0.0, -theta.sin());
            m[2][1] = c(0.0, -theta.sin());
            (a, b, m)
        }
        _ => return None,
    })
}

/// The gate as a full matrix on n qubits (bit q of a basis index is qubit q).
pub fn gate_matrix(g: &Gate, n: usize) -> Dense {
    let dim = 1usize << n;
    let mut m = Dense::zeros(dim);
    if let Some((q, u)) = one_qubit(g) {
        for x in 0..dim {
            for y in 0..dim {
                if (x ^ y) & !(1 << q) == 0 {
                    m.a[y * dim + x] = u[y >> q & 1][x >> q & 1];
                }
            }
        }
    } else if let Some((qa, qb, u)) = two_qubit(g) {
        let sub = |v: usize| 2 * (v >> qa & 1) + (v >> qb & 1);
        let rest = !((1usize << qa) | (1 << qb));
        for x in 0..dim {
            for y in 0..dim {
                if (x ^ y) & rest == 0 {
                    m.a[y * dim + x] = u[sub(y)][sub(x)];
                }
            }
        }
    } else if let Gate::DiagonalPhase { theta, mask } = *g {
        for x in 0..dim {
            let odd = (x as u64 & mask).count_ones() % 2 == 1;
            m.a[x * dim + x] = if odd {
                C::from_polar(1.0, theta)
            } else {
                c(1.0, 0.0)
            };
        }
    } else {
        panic!("oracle has no matrix for {g:?}");
    }
    m
}

pub fn circuit_unitary(circ: &Circuit) -> Dense {
    let n = circ.n_qubits();
    circ.gates()
        .fold(Dense::identity(1 << n), |u, g| gate_matrix(g, n).mul(&u))
}

/// C|0…0⟩: the first column of the unitary.
pub fn oracle_state(circ: &Circuit) -> Vec<C> {
    let u = circuit_unitary(circ);
    (0..u.dim).map(|r| u.get(r, 0)).collect()
}

fn pauli(n: usize, q: usize, which: usize) -> Dense {
    let g = match which {
        0 => Gate::PauliX(q),
        1 => Gate::PauliY(q),
        _ => Gate::PauliZ(q),
    };
    gate_matrix(&g, n)
}

/// Noisy output state: after every layer, each qubit independently gets X,
/// Y or Z with probability ε/3 each.
pub fn oracle_density(circ: &Circuit, eps: f64) -> Dense {
    let n = circ.n_qubits();
    let dim = 1 << n;
    let mut rho = Dense::zeros(dim);
    rho.a[0] = c(1.0, 0.0);
    let paulis: Vec<[Dense; 3]> = (0..n)
        .map(|q| [pauli(n, q, 0), pauli(n, q, 1), pauli(n, q, 2)])
        .collect();
    for layer in circ.layers() {
        for g in &layer.gates {
            let u = gate_matrix(g, n);
            rho = u.mul(&rho).mul(&u.dagger());
        }
        if eps > 0.0 {
            for ps in &paulis {
                let mut next = rho.scale(1.0 - eps);
                for p in ps {
                    next = next.add(&p.mul(&rho).mul(p).scale(eps / 3.0));
                }
                rho = next;
            }
        }
    }
    rho
}

/// ⟨ψ|ρ|ψ⟩.
pub fn fidelity(rho: &Dense, psi: &[C]) -> f64 {
    let d = rho.dim;
    let mut acc = c(0.0, 0.0);
    for r in 0..d {
        for k in 0..d {
            acc += psi[r].conj() * rho.get(r, k) * psi[k];
        }
    }
    acc.re
}

pub fn purity(rho: &Dense) -> f64 {
    rho.mul(rho).trace().re
}

pub fn diagonal(rho: &Dense) -> Vec<f64> {
    (0..rho.dim).map(|i| rho.get(i, i).re).collect()
}

fn distinct<R: Rng>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut q: Vec<usize> = (0..n).collect();
    q.shuffle(rng);
    q.truncate(k);
    q
}

fn random_gate<R: Rng>(kind: usize, n: usize, rng: &mut R) -> Gate {
    let q = distinct(n, 2, rng);
    let angle = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    match kind {
        0 => Gate::H(q[0]),
        1 => Gate::SqrtX(q[0]),
        2 => Gate::SqrtY(q[0]),
        3 => Gate::SqrtW(q[0]),
        4 => Gate::PauliX(q[0]),
        5 => Gate::PauliY(q[0]),
        6 => Gate::PauliZ(q[0]),
        7 => Gate::CZ(q[0], q[1]),
        8 => Gate::CNOT {
            control: q[0],
            target: q[1],
        },
        9 => Gate::ZZ {
            a: q[0],
            b: q[1],
            angle,
        },
        10 => Gate::FSim {
            a: q[0],
            b: q[1],
            theta: angle,
            phi: rng.gen_range(-3.0..3.0),
        },
        _ => {
            let mut mask = 0;
            while mask == 0 {
                mask = rng.gen::<u64>() & ((1u64 << n) - 1);
            }
            Gate::DiagonalPhase { theta: angle, mask }
        }
    }
}

pub const GATE_KINDS: usize = 12;

/// Random circuit on `n ≥ 2` qubits containing every gate type at least
/// once, one gate per layer.
pub fn random_circuit<R: Rng>(n: usize, extra: usize, rng: &mut R) -> Circuit {
    assert!(n >= 2);
    let mut kinds: Vec<usize> = (0..GATE_KINDS).collect();
    kinds.extend((0..extra).map(|_| rng.gen_range(0..GATE_KINDS)));
    kinds.shuffle(rng);
    let layers = kinds
        .into_iter()
        .map(|k| Layer::new(vec![random_gate(k, n, rng)]))
        .collect();
    Circuit::new(n, layers, Ensemble::Custom, rng.gen()).unwrap()
}
