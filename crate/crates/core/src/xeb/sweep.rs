use super::expected_xeb;
use crate::circuit::{build_grid_rcs, build_rr_graph_rcs, Circuit, GridOptions};
use crate::error::{invalid, Result};
use crate::estimate::Estimate;
use crate::rng::{base_seed, derive_seed};
use crate::sim::{
    check_cap, evolve_density, exact_echo, noisy_trajectory, run_trajectories, simulate,
    BornSampler, NoiseModel,
};
use rand::Rng;
use serde::Serialize;
use std::fmt::{self, Write as _};

/// Circuit family a sweep draws from; `build` takes the number of cycles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnsembleSpec {
    Grid {
        rows: usize,
        cols: usize,
        options: GridOptions,
    },
    RrGraph {
        n: usize,
        degree: usize,
    },
}

impl EnsembleSpec {
    pub fn grid(rows: usize, cols: usize) -> Self {
        EnsembleSpec::Grid {
            rows,
            cols,
            options: GridOptions::default(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        match *self {
            EnsembleSpec::Grid { rows, cols, .. } => rows * cols,
            EnsembleSpec::RrGraph { n, .. } => n,
        }
    }

    pub fn build(&self, cycles: usize, seed: u64) -> Result<Circuit> {
        match *self {
            EnsembleSpec::Grid {
                rows,
                cols,
                options,
            } => build_grid_rcs(rows, cols, cycles, options, seed),
            EnsembleSpec::RrGraph { n, degree } => build_rr_graph_rcs(n, degree, cycles, seed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Xeb,
    Fidelity,
    Echo,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantity::Xeb => "xeb",
            Quantity::Fidelity => "fidelity",
            Quantity::Echo => "echo",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayPoint {
    /// Builder depth argument.
    pub cycles: usize,
    /// Mean number of layers (noise locations per qubit) of the circuits.
    pub depth: f64,
    pub mean: f64,
    pub std_error: f64,
    pub n_circuits: usize,
    pub n_traj: usize,
}

impl DecayPoint {
    pub fn ln_mean(&self) -> f64 {
        self.mean.ln()
    }

    pub fn ln_std_error(&self) -> f64 {
        self.std_error / self.mean
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayCurve {
    pub quantity: Quantity,
    pub n: usize,
    pub eps: f64,
    /// Ordered by strictly increasing depth.
    pub points: Vec<DecayPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CircuitRecord {
    pub cycles: usize,
    pub depth: usize,
    pub circuit_id: String,
    pub xeb: Estimate,
    pub fidelity: Estimate,
    pub echo: Option<Estimate>,
}

/// How noisy quantities are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Monte-Carlo average over pure-state trajectories.
    #[default]
    Trajectories,
    /// Exact channel evolution of ρ; needs 2n within the width cap.
    Exact,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub ensemble: EnsembleSpec,
    pub eps: f64,
    /// Builder depths (cycles); must be strictly increasing.
    pub depths: Vec<usize>,
    pub n_circuits: usize,
    pub n_traj: usize,
    /// `None` scores each trajectory by its exact expected XEB; `Some(m)`
    /// draws `m` samples per trajectory and scores those instead.
    pub samples_per_traj: Option<usize>,
    pub with_echo: bool,
    pub engine: Engine,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub seed: u64,
    pub n_traj: usize,
    pub xeb: DecayCurve,
    pub fidelity: DecayCurve,
    pub echo: Option<DecayCurve>,
    pub circuits: Vec<CircuitRecord>,
}

impl SweepResult {
    /// CSV with header `n,eps,depth,quantity,mean,stderr,n_circuits,n_traj,seed`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,eps,depth,quantity,mean,stderr,n_circuits,n_traj,seed\n");
        let curves = [Some(&self.xeb), Some(&self.fidelity), self.echo.as_ref()];
        for curve in curves.into_iter().flatten() {
            for p in &curve.points {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    curve.n,
                    curve.eps,
                    p.depth,
                    curve.quantity,
                    p.mean,
                    p.std_error,
                    p.n_circuits,
                    p.n_traj,
                    self.seed
                );
            }
        }
        out
    }
}

/// Combined standard error of the mean over circuits: the larger of the
/// between-circuit spread and the propagated within-circuit errors.
fn aggregate(per_circuit: &[Estimate]) -> (f64, f64) {
    let k = per_circuit.len() as f64;
    let values: Vec<f64> = per_circuit.iter().map(|e| e.value).collect();
    let between = Estimate::from_values(&values);
    let within = per_circuit
        .iter()
        .map(|e| e.std_error.powi(2))
        .sum::<f64>()
        .sqrt()
        / k;
    (between.value, between.std_error.max(within))
}

/// Noisy XEB and fidelity decay curves over `config.depths`, averaged over
/// independently drawn circuits.
pub fn xeb_decay_sweep<R: Rng + ?Sized>(config: &SweepConfig, rng: &mut R) -> Result<SweepResult> {
    if config.depths.is_empty() {
        return invalid("sweep needs at least one depth");
    }
    if config.depths.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("sweep depths must be strictly increasing");
    }
    if config.n_circuits == 0 {
        return invalid("sweep needs at least one circuit");
    }
    if config.engine == Engine::Trajectories && config.n_traj < 2 {
        return invalid("trajectory sweep needs at least two trajectories");
    }
    if config.samples_per_traj == Some(0) {
        return invalid("samples per trajectory must be positive");
    }
    let noise = NoiseModel::new(config.eps)?;
    let n = config.ensemble.n_qubits();
    check_cap(match config.engine {
        Engine::Trajectories => n,
        Engine::Exact => 2 * n,
    })?;
    let base = base_seed(rng);
    let mut circuits = Vec::new();
    let mut curves: [Vec<DecayPoint>; 3] = Default::default();
    for &cycles in &config.depths {
        let mut records = Vec::with_capacity(config.n_circuits);
        for j in 0..config.n_circuits {
            let seed = derive_seed(base, &format!("circuit-{cycles}"), j as u64);
            let c = config.ensemble.build(cycles, seed)?;
            records.push(match config.engine {
                Engine::Trajectories => score_circuit(&c, cycles, &noise, config, base, j)?,
                Engine::Exact => score_circuit_exact(&c, cycles, &noise, config.with_echo)?,
            });
        }
        let depth = records.iter().map(|r| r.depth as f64).sum::<f64>() / config.n_circuits as f64;
        let n_traj = match config.engine {
            Engine::Trajectories => config.n_traj,
            Engine::Exact => 0,
        };
        let point = |ests: Vec<Estimate>| {
            let (mean, std_error) = aggregate(&ests);
            DecayPoint {
                cycles,
                depth,
                mean,
                std_error,
                n_circuits: config.n_circuits,
                n_traj,
            }
        };
        curves[0].push(point(records.iter().map(|r| r.xeb).collect()));
        curves[1].push(point(records.iter().map(|r| r.fidelity).collect()));
        if config.with_echo {
            curves[2].push(point(records.iter().filter_map(|r| r.echo).collect()));
        }
        circuits.extend(records);
    }
    let [xeb, fidelity, echo] = curves;
    if xeb.windows(2).any(|w| w[0].depth >= w[1].depth) {
        return invalid("sweep depths do not give strictly increasing layer counts");
    }
    let curve = |quantity, points| DecayCurve {
        quantity,
        n,
        eps: config.eps,
        points,
    };
    Ok(SweepResult {
        seed: base,
        n_traj: config.n_traj,
        xeb: curve(Quantity::Xeb, xeb),
        fidelity: curve(Quantity::Fidelity, fidelity),
        echo: config.with_echo.then(|| curve(Quantity::Echo, echo)),
        circuits,
    })
}

fn score_circuit(
    c: &Circuit,
    cycles: usize,
    noise: &NoiseModel,
    config: &SweepConfig,
    base: u64,
    index: usize,
) -> Result<CircuitRecord> {
    let ideal = simulate(c)?;
    let probs = ideal.probabilities();
    let scale = probs.len() as f64;
    let tag = format!("traj-{cycles}-{index}");
    let pairs = run_trajectories(config.n_traj, base, &tag, |_, r| {
        let psi = noisy_trajectory(c, noise, r).expect("width checked by caller");
        let fidelity = ideal.overlap(&psi);
        let noisy = psi.probabilities();
        let xeb = match config.samples_per_traj {
            None => expected_xeb(&probs, &noisy),
            Some(m) => {
                let sampler = BornSampler::new(&noisy);
                (0..m)
                    .map(|_| scale * probs[sampler.draw(r) as usize] - 1.0)
                    .sum::<f64>()
                    / m as f64
            }
        };
        (xeb, fidelity)
    });
    let (xs, fs): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let echo = if config.with_echo {
        let mut r = crate::rng::stream(base, &format!("echo-{cycles}"), index as u64);
        Some(crate::sim::loschmidt_echo(c, noise, config.n_traj, &mut r)?)
    } else {
        None
    };
    Ok(CircuitRecord {
        cycles,
        depth: c.depth(),
        circuit_id: c.id(),
        xeb: Estimate::from_values(&xs),
        fidelity: Estimate::from_values(&fs),
        echo,
    })
}

fn score_circuit_exact(
    c: &Circuit,
    cycles: usize,
    noise: &NoiseModel,
    with_echo: bool,
) -> Result<CircuitRecord> {
    let ideal = simulate(c)?;
    let rho = evolve_density(c, noise)?;
    let xeb = expected_xeb(&ideal.probabilities(), &rho.readout_probabilities(noise));
    let echo = if with_echo {
        Some(Estimate::exact(exact_echo(c, noise)?, 1))
    } else {
        None
    };
    Ok(CircuitRecord {
        cycles,
        depth: c.depth(),
        circuit_id: c.id(),
        xeb: Estimate::exact(xeb, 1),
        fidelity: Estimate::exact(rho.fidelity(&ideal)?, 1),
        echo,
    })
}
