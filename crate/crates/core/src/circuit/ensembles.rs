use super::{Circuit, Ensemble, Gate, GraphSpec, Layer};
use crate::error::{invalid, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    pub fsim_theta: f64,
    pub fsim_phi: f64,
    /// Redraw a qubit's single-qubit gate if it equals the one it got in the
    /// previous cycle.
    pub no_repeat: bool,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            fsim_theta: FRAC_PI_2,
            fsim_phi: PI / 6.0,
            no_repeat: false,
        }
    }
}

/// Couplers of pattern `k` (0: right, 1: left, 2: down, 3: up) of a
/// row-major `rows × cols` grid.
fn grid_couplers(rows: usize, cols: usize, k: usize) -> Vec<(usize, usize)> {
    let idx = |r: usize, c: usize| r * cols + c;
    let mut out = Vec::new();
    match k % 4 {
        0 | 1 => {
            let start = k % 4;
            for r in 0..rows {
                let mut c = start;
                while c + 1 < cols {
                    out.push((idx(r, c), idx(r, c + 1)));
                    c += 2;
                }
            }
        }
        _ => {
            let start = k % 4 - 2;
            for c in 0..cols {
                let mut r = start;
                while r + 1 < rows {
                    out.push((idx(r, c), idx(r + 1, c)));
                    r += 2;
                }
            }
        }
    }
    out
}

/// Grid random circuit: `depth` cycles, each a layer of single-qubit gates
/// drawn uniformly from {√X, √Y, √W} followed by an fSim layer on the next
/// coupler pattern. Patterns with no couplers on this grid (e.g. "up" on a
/// two-row grid) are dropped from the cycle, so every cycle contributes two
/// layers unless the grid has no couplers at all.
pub fn build_grid_rcs(
    rows: usize,
    cols: usize,
    depth: usize,
    options: GridOptions,
    seed: u64,
) -> Result<Circuit> {
    if rows == 0 || cols == 0 {
        return invalid(format!(
            "grid dimensions must be positive, got {rows}x{cols}"
        ));
    }
    let n = rows * cols;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut previous: Vec<Option<u8>> = vec![None; n];
    let patterns: Vec<usize> = (0..4)
        .filter(|&k| !grid_couplers(rows, cols, k).is_empty())
        .collect();
    let mut layers = Vec::with_capacity(2 * depth);
    for cycle in 0..depth {
        let mut singles = Vec::with_capacity(n);
        for (q, prev) in previous.iter_mut().enumerate() {
            let mut choice: u8 = rng.gen_range(0..3);
            if options.no_repeat {
                while Some(choice) == *prev {
                    choice = rng.gen_range(0..3);
                }
            }
            *prev = Some(choice);
            singles.push(match choice {
                0 => Gate::SqrtX(q),
                1 => Gate::SqrtY(q),
                _ => Gate::SqrtW(q),
            });
        }
        layers.push(Layer::new(singles));
        if patterns.is_empty() {
            continue;
        }
        let couplers: Vec<Gate> = grid_couplers(rows, cols, patterns[cycle % patterns.len()])
            .into_iter()
            .map(|(a, b)| Gate::FSim {
                a,
                b,
                theta: options.fsim_theta,
                phi: options.fsim_phi,
            })
            .collect();
        layers.push(Layer::new(couplers));
    }
    Circuit::new(n, layers, Ensemble::GridRcs, seed)
}

/// Random `degree`-regular simple graph on `n` vertices from the pairing
/// model, rejecting pairings with loops or multi-edges.
pub fn random_regular_graph<R: Rng + ?Sized>(
    n: usize,
    degree: usize,
    rng: &mut R,
) -> Result<Vec<(usize, usize)>> {
    if n == 0 || degree >= n || !(n * degree).is_multiple_of(2) {
        return invalid(format!("no {degree}-regular graph on {n} vertices"));
    }
    if degree == 0 {
        return Ok(Vec::new());
    }
    let mut points: Vec<usize> = (0..n)
        .flat_map(|v| std::iter::repeat_n(v, degree))
        .collect();
    for _ in 0..100_000 {
        points.shuffle(rng);
        let mut seen = std::collections::HashSet::new();
        let mut edges = Vec::with_capacity(points.len() / 2);
        let mut ok = true;
        for pair in points.chunks(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a == b || !seen.insert((a, b)) {
                ok = false;
                break;
            }
            edges.push((a, b));
        }
        if ok {
            edges.sort_unstable();
            return Ok(edges);
        }
    }
    invalid(format!(
        "pairing model failed to produce a simple {degree}-regular graph on {n} vertices"
    ))
}

/// First-fit packing of mutually commuting gates into layers of disjoint
/// gates.
pub fn pack_into_layers(gates: impl IntoIterator<Item = Gate>) -> Vec<Layer> {
    let mut layers: Vec<(u64, Layer)> = Vec::new();
    for gate in gates {
        let support = gate.support_mask();
        match layers.iter_mut().find(|(used, _)| used & support == 0) {
            Some((used, layer)) => {
                *used |= support;
                layer.gates.push(gate);
            }
            None => layers.push((support, Layer::new(vec![gate]))),
        }
    }
    layers.into_iter().map(|(_, l)| l).collect()
}

/// Order-preserving packing: a gate joins the last layer only if it is
/// disjoint from everything already there.
fn pack_sequential(gates: impl IntoIterator<Item = Gate>) -> Vec<Layer> {
    let mut layers: Vec<(u64, Layer)> = Vec::new();
    for gate in gates {
        let support = gate.support_mask();
        match layers.last_mut() {
            Some((used, layer)) if *used & support == 0 => {
                *used |= support;
                layer.gates.push(gate);
            }
            _ => layers.push((support, Layer::new(vec![gate]))),
        }
    }
    layers.into_iter().map(|(_, l)| l).collect()
}

fn phase(q: usize, theta: f64) -> Gate {
    Gate::DiagonalPhase {
        theta,
        mask: 1 << q,
    }
}

/// One layer of independent Haar-random single-qubit unitaries, written as
/// five layers `P(λ−π/2) · √X · P(π−θ) · √X · P(φ−π/2)` which equals
/// `U3(θ, φ, λ)` up to a global phase.
pub fn haar_rotation_layers<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Layer> {
    let mut stages: [Vec<Gate>; 5] = Default::default();
    for q in 0..n {
        let u: f64 = rng.gen();
        let theta = 2.0 * u.sqrt().acos();
        let phi = rng.gen_range(0.0..2.0 * PI);
        let lambda = rng.gen_range(0.0..2.0 * PI);
        stages[0].push(phase(q, lambda - FRAC_PI_2));
        stages[1].push(Gate::SqrtX(q));
        stages[2].push(phase(q, PI - theta));
        stages[3].push(Gate::SqrtX(q));
        stages[4].push(phase(q, phi - FRAC_PI_2));
    }
    stages.into_iter().map(Layer::new).collect()
}

/// Random-regular-graph circuit: per depth step, Haar-random single-qubit
/// rotations followed by π/2 ZZ rotations on the edges of a fresh random
/// `degree`-regular graph.
pub fn build_rr_graph_rcs(n: usize, degree: usize, depth: usize, seed: u64) -> Result<Circuit> {
    if n == 0 || degree >= n || !(n * degree).is_multiple_of(2) {
        return invalid(format!(
            "no {degree}-regular graph on {n} vertices (need n·degree even and degree < n)"
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layers = Vec::new();
    for _ in 0..depth {
        layers.extend(haar_rotation_layers(n, &mut rng));
        let edges = random_regular_graph(n, degree, &mut rng)?;
        layers.extend(pack_into_layers(edges.into_iter().map(|(a, b)| Gate::ZZ {
            a,
            b,
            angle: FRAC_PI_2,
        })));
    }
    Circuit::new(n, layers, Ensemble::RrGraphRcs, seed)
}

/// IQP circuit: a Hadamard wall, the phase gates `Z(θ, mask)` in order with
/// `cnot_layers[i]` (when given) applied right after phase gate `i`, and a
/// closing Hadamard wall that turns the computational-basis measurement into
/// an X-basis one.
pub fn build_iqp(
    n: usize,
    phase_gates: &[(f64, u64)],
    cnot_layers: Option<&[Vec<(usize, usize)>]>,
    seed: u64,
) -> Result<Circuit> {
    if n == 0 || n > super::MAX_QUBITS {
        return invalid(format!("IQP register size {n} out of range"));
    }
    for &(_, mask) in phase_gates {
        if mask == 0 {
            return invalid("phase gate mask must be nonzero");
        }
        if n < 64 && mask >> n != 0 {
            return invalid(format!("phase mask wider than {n} bits"));
        }
    }
    let cnots = cnot_layers.unwrap_or(&[]);
    if cnots.len() > phase_gates.len() {
        return invalid("more CNOT layers than phase gates");
    }
    let wall = || Layer::new((0..n).map(Gate::H).collect());
    let mut layers = vec![wall()];
    let mut pending: Vec<Gate> = Vec::new();
    for (i, &(theta, mask)) in phase_gates.iter().enumerate() {
        pending.push(Gate::DiagonalPhase { theta, mask });
        if let Some(cl) = cnots.get(i) {
            layers.extend(pack_sequential(pending.drain(..)));
            let layer = Layer::new(
                cl.iter()
                    .map(|&(control, target)| Gate::CNOT { control, target })
                    .collect(),
            );
            if !layer.is_empty() {
                layers.push(layer);
            }
        }
    }
    layers.extend(pack_sequential(pending));
    layers.push(wall());
    Circuit::new(n, layers, Ensemble::Iqp, seed)
}

/// IQP circuit with `n_gates` phase gates of uniformly random nonzero masks
/// and angles in [0, 2π).
pub fn random_iqp(n: usize, n_gates: usize, seed: u64) -> Result<Circuit> {
    if n == 0 || n > super::MAX_QUBITS {
        return invalid(format!("IQP register size {n} out of range"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let gates: Vec<(f64, u64)> = (0..n_gates)
        .map(|_| {
            let mut mask = 0;
            while mask == 0 {
                mask = rng.gen::<u64>() & full;
            }
            (rng.gen_range(0.0..2.0 * PI), mask)
        })
        .collect();
    build_iqp(n, &gates, None, seed)
}

/// Locally rotated graph state measured in the X basis: H wall, CZ on every
/// edge, a phase rotation by θ_v on each vertex, closing H wall.
pub fn build_rotated_graph_state(g: &GraphSpec) -> Result<Circuit> {
    let n = g.n_vertices();
    let wall = || Layer::new((0..n).map(Gate::H).collect());
    let mut layers = vec![wall()];
    layers.extend(pack_into_layers(
        g.edges().iter().map(|&(a, b)| Gate::CZ(a, b)),
    ));
    let rotations: Vec<Gate> = g
        .angles()
        .iter()
        .enumerate()
        .filter(|(_, &t)| t != 0.0)
        .map(|(v, &t)| phase(v, t))
        .collect();
    if !rotations.is_empty() {
        layers.push(Layer::new(rotations));
    }
    layers.push(wall());
    Circuit::new(n, layers, Ensemble::RotatedGraphState, 0)
}
