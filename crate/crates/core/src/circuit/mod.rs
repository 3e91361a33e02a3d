//! Circuit representation shared by every task: layered gate lists over `n`
//! qubits plus the ensemble metadata they were drawn from.

mod ensembles;
mod schema;

pub use ensembles::{
    build_grid_rcs, build_iqp, build_rotated_graph_state, build_rr_graph_rcs, haar_rotation_layers,
    pack_into_layers, random_iqp, random_regular_graph, GridOptions,
};
pub use schema::{parse, serialize};

use crate::error::{invalid, Result};
use sha2::{Digest, Sha256};
use std::fmt;

/// Widest supported register; masks and outcomes are stored in a `u64`.
pub const MAX_QUBITS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H(usize),
    SqrtX(usize),
    SqrtY(usize),
    /// Square root of W = (X + Y)/√2.
    SqrtW(usize),
    FSim {
        a: usize,
        b: usize,
        theta: f64,
        phi: f64,
    },
    CZ(usize, usize),
    CNOT {
        control: usize,
        target: usize,
    },
    /// exp(-i·angle/2 · Z⊗Z).
    ZZ {
        a: usize,
        b: usize,
        angle: f64,
    },
    /// |x⟩ ↦ exp(iθ·(mask·x mod 2))|x⟩. Bit `q` of `mask` is qubit `q`.
    DiagonalPhase {
        theta: f64,
        mask: u64,
    },
    PauliX(usize),
    PauliY(usize),
    PauliZ(usize),
}

impl Gate {
    /// Qubits the gate acts on, in gate order.
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q)
            | Gate::SqrtX(q)
            | Gate::SqrtY(q)
            | Gate::SqrtW(q)
            | Gate::PauliX(q)
            | Gate::PauliY(q)
            | Gate::PauliZ(q) => vec![q],
            Gate::FSim { a, b, .. } | Gate::CZ(a, b) | Gate::ZZ { a, b, .. } => vec![a, b],
            Gate::CNOT { control, target } => vec![control, target],
            Gate::DiagonalPhase { mask, .. } => mask_qubits(mask),
        }
    }

    pub fn support_mask(&self) -> u64 {
        self.qubits().iter().fold(0u64, |m, &q| m | (1u64 << q))
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(
            self,
            Gate::FSim { .. } | Gate::CZ(..) | Gate::ZZ { .. } | Gate::CNOT { .. }
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::H(_) => "H",
            Gate::SqrtX(_) => "SX",
            Gate::SqrtY(_) => "SY",
            Gate::SqrtW(_) => "SW",
            Gate::FSim { .. } => "FSIM",
            Gate::CZ(..) => "CZ",
            Gate::CNOT { .. } => "CNOT",
            Gate::ZZ { .. } => "ZZ",
            Gate::DiagonalPhase { .. } => "DPHASE",
            Gate::PauliX(_) => "X",
            Gate::PauliY(_) => "Y",
            Gate::PauliZ(_) => "Z",
        }
    }

    pub(crate) fn validate(&self, n: usize) -> Result<()> {
        let finite = match *self {
            Gate::FSim { theta, phi, .. } => theta.is_finite() && phi.is_finite(),
            Gate::ZZ { angle, .. } => angle.is_finite(),
            Gate::DiagonalPhase { theta, .. } => theta.is_finite(),
            _ => true,
        };
        if !finite {
            return invalid(format!("{} has a non-finite angle", self.name()));
        }
        if let Gate::DiagonalPhase { mask, .. } = *self {
            if mask == 0 {
                return invalid("DPHASE mask must be nonzero");
            }
            if n < 64 && mask >> n != 0 {
                return invalid(format!("DPHASE mask wider than {n} qubits"));
            }
            return Ok(());
        }
        let qs = self.qubits();
        for &q in &qs {
            if q >= n {
                return invalid(format!(
                    "{} acts on qubit {q}, register has {n}",
                    self.name()
                ));
            }
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return invalid(format!(
                "{} endpoints coincide (qubit {})",
                self.name(),
                qs[0]
            ));
        }
        Ok(())
    }
}

pub(crate) fn mask_qubits(mask: u64) -> Vec<usize> {
    (0..64).filter(|&q| mask >> q & 1 == 1).collect()
}

/// Gates that act simultaneously on disjoint qubits.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Layer {
    pub gates: Vec<Gate>,
}

impl Layer {
    pub fn new(gates: Vec<Gate>) -> Self {
        Self { gates }
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ensemble {
    GridRcs,
    RrGraphRcs,
    Iqp,
    RotatedGraphState,
    Custom,
}

impl Ensemble {
    pub fn tag(self) -> &'static str {
        match self {
            Ensemble::GridRcs => "grid-rcs",
            Ensemble::RrGraphRcs => "rr-graph-rcs",
            Ensemble::Iqp => "iqp",
            Ensemble::RotatedGraphState => "rotated-graph-state",
            Ensemble::Custom => "custom",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Some(match tag {
            "grid-rcs" => Ensemble::GridRcs,
            "rr-graph-rcs" => Ensemble::RrGraphRcs,
            "iqp" => Ensemble::Iqp,
            "rotated-graph-state" => Ensemble::RotatedGraphState,
            "custom" => Ensemble::Custom,
            _ => return None,
        })
    }
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// A layered circuit acting on `|0…0⟩`, measured in the computational basis.
///
/// Construction through [`Circuit::new`] checks that every qubit index is in
/// range and that no qubit is touched twice within a layer; the fields are
/// read-only afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    layers: Vec<Layer>,
    ensemble: Ensemble,
    seed: u64,
}

impl Circuit {
    pub fn new(n_qubits: usize, layers: Vec<Layer>, ensemble: Ensemble, seed: u64) -> Result<Self> {
        if n_qubits == 0 {
            return invalid("circuit needs at least one qubit");
        }
        if n_qubits > MAX_QUBITS {
            return invalid(format!("at most {MAX_QUBITS} qubits are representable"));
        }
        for (i, layer) in layers.iter().enumerate() {
            let mut used = 0u64;
            for gate in &layer.gates {
                gate.validate(n_qubits)
                    .map_err(|e| crate::Error::InvalidArgument(format!("layer {i}: {e}")))?;
                let support = gate.support_mask();
                if used & support != 0 {
                    return invalid(format!("layer {i}: qubit used by more than one gate"));
                }
                used |= support;
            }
        }
        Ok(Self {
            n_qubits,
            layers,
            ensemble,
            seed,
        })
    }

    pub fn empty(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, Vec::new(), Ensemble::Custom, 0)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Number of layers `d`.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn ensemble(&self) -> Ensemble {
        self.ensemble
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.layers.iter().flat_map(|l| l.gates.iter())
    }

    pub fn gate_count(&self) -> usize {
        self.gates().count()
    }

    pub fn two_qubit_gate_count(&self) -> usize {
        self.gates().filter(|g| g.is_two_qubit()).count()
    }

    /// Short content hash of the canonical serialization.
    pub fn id(&self) -> String {
        let digest = Sha256::digest(serialize(self).as_bytes());
        digest[..6].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Circuit with the given layers appended (validated as usual).
    pub fn with_appended(&self, more: &[Layer]) -> Result<Self> {
        let mut layers = self.layers.clone();
        layers.extend_from_slice(more);
        Self::new(self.n_qubits, layers, self.ensemble, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphSpec {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
    angles: Vec<f64>,
}

impl GraphSpec {
    pub fn new(n_vertices: usize, edges: Vec<(usize, usize)>, angles: Vec<f64>) -> Result<Self> {
        if n_vertices == 0 || n_vertices > MAX_QUBITS {
            return invalid(format!("graph needs 1..={MAX_QUBITS} vertices"));
        }
        if angles.len() != n_vertices {
            return invalid(format!(
                "{} rotation angles for {n_vertices} vertices",
                angles.len()
            ));
        }
        let mut seen = std::collections::HashSet::new();
        for &(a, b) in &edges {
            if a >= n_vertices || b >= n_vertices {
                return invalid(format!("edge ({a},{b}) references a missing vertex"));
            }
            if a == b {
                return invalid(format!("self-loop at vertex {a}"));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return invalid(format!("duplicate edge ({a},{b})"));
            }
        }
        Ok(Self {
            n_vertices,
            edges,
            angles,
        })
    }

    /// Graph without local rotations.
    pub fn unrotated(n_vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        Self::new(n_vertices, edges, vec![0.0; n_vertices])
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn neighbours(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }
}

/// Formats an outcome as a bitstring with qubit 0 leftmost.
pub fn format_bits(x: u64, n: usize) -> String {
    (0..n)
        .map(|q| if x >> q & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Parses a bitstring with qubit 0 leftmost.
pub fn parse_bits(s: &str) -> Result<u64> {
    if s.is_empty() || s.len() > MAX_QUBITS {
        return invalid(format!("bitstring length {} out of range", s.len()));
    }
    let mut x = 0u64;
    for (q, c) in s.chars().enumerate() {
        match c {
            '0' => {}
            '1' => x |= 1 << q,
            other => return invalid(format!("bad character {other:?} in bitstring")),
        }
    }
    Ok(x)
}
