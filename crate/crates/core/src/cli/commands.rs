use super::manifest::RunManifest;
use super::parse;
use super::*;
use anyhow::{bail, Context};
use rand::Rng;
use rcs_lab::circuit::{
    build_grid_rcs, build_iqp, build_rotated_graph_state, build_rr_graph_rcs, parse_bits,
    random_iqp, serialize, Circuit, GraphSpec, GridOptions,
};
use rcs_lab::protocol::{run_verifier, serve_prover, ChallengeSpec, ProverConfig, Strategy};
use rcs_lab::rng::{derive_seed, seeded, LabRng};
use rcs_lab::sim::{
    exact_echo, loschmidt_echo, sample, sample_noisy, simulate, NoiseModel, SampleSet,
};
use rcs_lab::verification::{
    bell_sample, estimate_fidelity_graph, estimate_purity, fidelity_bound_from_generators,
    fidelity_from_purity, plant_secret_iqp, verify_planted, BellSampleSet, PlantParams, SecretKey,
};
use rcs_lab::xeb::{
    estimate_xeb, extrapolate_fidelity, fit_decay_rate, spoof_samples, spoof_xeb_exact,
    xeb_decay_sweep, Bipartition, Engine, EnsembleSpec, SweepConfig,
};
use rcs_lab::Estimate;
use serde_json::json;
use std::f64::consts::PI;
use std::net::TcpListener;
use std::path::Path;
use std::time::Duration;

pub fn run(cli: Cli) -> anyhow::Result<i32> {
    let seed = cli.seed;
    let rng = |name: &str| seeded(derive_seed(seed, name, 0));
    match cli.command {
        Command::Generate(a) => generate(a, seed, &mut rng("generate")),
        Command::Sample(a) => sample_cmd(a, seed, &mut rng("sample")),
        Command::Xeb(a) => xeb(a),
        Command::Sweep(a) => sweep(a, seed, &mut rng("sweep")),
        Command::Spoof(a) => spoof(a, seed, &mut rng("spoof")),
        Command::Echo(a) => echo(a, &mut rng("echo")),
        Command::Extrapolate(a) => extrapolate(a),
        Command::Verify(VerifyCommand::Bell(a)) => verify_bell(a, seed, &mut rng("verify-bell")),
        Command::Verify(VerifyCommand::Graph(a)) => verify_graph(a, &mut rng("verify-graph")),
        Command::Verify(VerifyCommand::Planted(a)) => verify_planted_cmd(a),
        Command::Serve(a) => serve(a, &mut rng("serve")),
        Command::Challenge(a) => challenge(a, &mut rng("challenge")),
    }
}

fn need<T>(v: Option<T>, flag: &str, what: &str) -> anyhow::Result<T> {
    v.with_context(|| format!("{what} needs --{flag}"))
}

fn read_circuit(path: &Path) -> anyhow::Result<Circuit> {
    let text = read_text(path, "circuit")?;
    rcs_lab::circuit::parse(&text).with_context(|| format!("in circuit {}", path.display()))
}

fn read_text(path: &Path, what: &str) -> anyhow::Result<String> {
    if !path.exists() {
        bail!("{what} {} not found", path.display());
    }
    std::fs::read_to_string(path).with_context(|| format!("cannot read {what} {}", path.display()))
}

fn line(v: serde_json::Value) {
    println!("{v}");
}

fn est(e: &Estimate) -> serde_json::Value {
    json!({"value": e.value, "std_error": e.std_error, "n": e.n_samples})
}

fn graph_spec(
    n: usize,
    edges: Option<&str>,
    angles: &[String],
    rng: &mut LabRng,
) -> anyhow::Result<GraphSpec> {
    let edges = match edges {
        Some(s) => parse::pairs(s).map_err(anyhow::Error::msg)?,
        None if n >= 3 => (0..n).map(|v| (v, (v + 1) % n)).collect(),
        None if n == 2 => vec![(0, 1)],
        None => vec![],
    };
    let angles = if angles.is_empty() {
        (0..n).map(|_| rng.gen_range(0.0..2.0 * PI)).collect()
    } else {
        angles
            .iter()
            .map(|a| parse::angle(a))
            .collect::<Result<Vec<_>, _>>()
            .map_err(anyhow::Error::msg)?
    };
    Ok(GraphSpec::new(n, edges, angles)?)
}

fn generate(a: GenerateArgs, seed: u64, rng: &mut LabRng) -> anyhow::Result<i32> {
    let mut manifest = RunManifest::new("generate", seed);
    let circuit_seed = derive_seed(seed, "generate-circuit", 0);
    let c = match a.kind {
        GenerateKind::Grid => build_grid_rcs(
            need(a.rows, "rows", "grid")?,
            need(a.cols, "cols", "grid")?,
            need(a.depth, "depth", "grid")?,
            GridOptions::default(),
            circuit_seed,
        )?,
        GenerateKind::RrGraph => build_rr_graph_rcs(
            need(a.n, "n", "rr-graph")?,
            a.degree,
            need(a.depth, "depth", "rr-graph")?,
            circuit_seed,
        )?,
        GenerateKind::Iqp => {
            let n = need(a.n, "n", "iqp")?;
            if a.gates.is_empty() {
                random_iqp(n, a.n_gates.unwrap_or(2 * n), circuit_seed)?
            } else {
                let mut gates = Vec::new();
                for g in &a.gates {
                    let (theta, mask, width) = parse::phase_gate(g).map_err(anyhow::Error::msg)?;
                    if width != n {
                        bail!("phase gate `{g}` has a {width}-bit mask, register has {n} qubits");
                    }
                    gates.push((theta, mask));
                }
                let cnots = a
                    .cnots
                    .iter()
                    .map(|s| parse::pairs(s))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(anyhow::Error::msg)?;
                let cnots = (!cnots.is_empty()).then_some(cnots.as_slice());
                build_iqp(n, &gates, cnots, circuit_seed)?
            }
        }
        GenerateKind::Graph => {
            let n = need(a.n, "n", "graph")?;
            build_rotated_graph_state(&graph_spec(n, a.edges.as_deref(), &a.angles, rng)?)?
        }
        GenerateKind::Planted => {
            let n = need(a.n, "n", "planted")?;
            let key_path = need(a.key.clone(), "key", "planted")?;
            if !(2..=63).contains(&n) {
                bail!("planted circuits need 2 ≤ n ≤ 63, got {n}");
            }
            let s = match &a.secret {
                Some(bits) => {
                    if bits.len() != n {
                        bail!("secret has {} bits, register has {n} qubits", bits.len());
                    }
                    parse_bits(bits)?
                }
                None => loop {
                    let s = rng.gen::<u64>() & ((1u64 << n) - 1);
                    if s != 0 {
                        break s;
                    }
                },
            };
            let (c, key) = plant_secret_iqp(n, s, PlantParams::default(), rng)?;
            let key = match a.threshold {
                Some(t) => key.with_threshold(t)?,
                None => key,
            };
            key.save(&key_path)?;
            manifest.outputs.push(key_path);
            c
        }
    };
    manifest.emit(a.out.as_deref(), &serialize(&c))?;
    Ok(0)
}

fn noise_model(eps: f64, readout: Option<f64>) -> anyhow::Result<NoiseModel> {
    let noise = NoiseModel::new(eps)?;
    Ok(match readout {
        Some(p) => noise.with_measurement_flip(p)?,
        None => noise,
    })
}

fn sample_cmd(a: SampleArgs, seed: u64, rng: &mut LabRng) -> anyhow::Result<i32> {
    let c = read_circuit(&a.circuit)?;
    let noise = noise_model(a.eps, a.readout)?;
    if a.samples == 0 {
        bail!("--samples must be positive");
    }
    let set = if noise.is_noiseless() && noise.measurement_flip().is_none() {
        sample(&simulate(&c)?, a.samples, rng)?
    } else {
        sample_noisy(&c, &noise, a.samples, a.traj, rng)?
    };
    let set = set.with_circuit_id(c.id());
    RunManifest::new("sample", seed).emit(a.out.as_deref(), &set.to_text())?;
    Ok(0)
}

fn xeb(a: XebArgs) -> anyhow::Result<i32> {
    let c = read_circuit(&a.circuit)?;
    let s = SampleSet::from_text(&read_text(&a.samples, "sample file")?)?;
    if !s.circuit_id.is_empty() && s.circuit_id != c.id() {
        bail!("samples belong to circuit {}, not {}", s.circuit_id, c.id());
    }
    let r = estimate_xeb(&s, &c)?;
    line(
        json!({"circuit": r.circuit_id, "chi": r.chi, "std_error": r.std_error, "n_samples": r.n_samples}),
    );
    Ok(0)
}

fn sweep(a: SweepArgs, seed: u64, rng: &mut LabRng) -> anyhow::Result<i32> {
    let ensemble = match a.ensemble {
        SweepEnsemble::Grid => EnsembleSpec::grid(
            need(a.rows, "rows", "grid sweep")?,
            need(a.cols, "cols", "grid sweep")?,
        ),
        SweepEnsemble::RrGraph => EnsembleSpec::RrGraph {
            n: need(a.n, "n", "rr-graph sweep")?,
            degree: a.degree,
        },
    };
    let config = SweepConfig {
        ensemble,
        eps: a.eps,
        depths: a.depth.clone(),
        n_circuits: a.circuits,
        n_traj: a.traj,
        samples_per_traj: a.samples,
        with_echo: a.echo,
        engine: match a.engine {
            EngineArg::Trajectories => Engine::Trajectories,
            EngineArg::Exact => Engine::Exact,
        },
    };
    let r = xeb_decay_sweep(&config, rng)?;
    let rate = |c| fit_decay_rate(c).ok();
    let summary = json!({
        "n": ensemble.n_qubits(),
        "eps": a.eps,
        "eps_n": a.eps * ensemble.n_qubits() as f64,
        "xeb_rate": rate(&r.xeb),
        "fidelity_rate": rate(&r.fidelity),
        "echo_rate": r.echo.as_ref().and_then(rate),
    });
    RunManifest::new("sweep", seed).emit(a.out.as_deref(), &r.to_csv())?;
    if a.out.is_some() {
        line(summary);
    } else {
        eprintln!("{summary}");
    }
    Ok(0)
}

fn spoof(a: SpoofArgs, seed: u64, rng: &mut LabRng) -> anyhow::Result<i32> {
    let c = read_circuit(&a.circuit)?;
    let n = c.n_qubits();
    let cut = Bipartition::first(n, a.cut.unwrap_or(n / 2))?;
    if a.samples.is_some() && a.out.is_none() {
        bail!("--samples needs --out");
    }
    let r = spoof_xeb_exact(&c, &cut)?;
    line(json!({
        "circuit": c.id(),
        "cut": cut.block_a().len(),
        "chi": r.chi,
        "fidelity": r.fidelity,
        "deleted_gates": r.deleted_gates,
    }));
    if let Some(k) = a.samples {
        let s = spoof_samples(&c, &cut, k, rng)?;
        RunManifest::new("spoof", seed).emit(a.out.as_deref(), &s.to_text())?;
    }
    Ok(0)
}

fn echo(a: EchoArgs, rng: &mut LabRng) -> anyhow::Result<i32> {
    let c = read_circuit(&a.circuit)?;
    let noise = NoiseModel::new(a.eps)?;
    let e = if a.exact {
        Estimate::exact(exact_echo(&c, &noise)?, 1)
    } else {
        loschmidt_echo(&c, &noise, a.traj, rng)?
    };
    line(json!({"circuit": c.id(), "eps": a.eps, "echo": est(&e)}));
    Ok(0)
}

const SWEEP_HEADER: &str = "n,eps,depth,quantity,mean,stderr,n_circuits,n_traj,seed";

fn extrapolate(a: ExtrapolateArgs) -> anyhow::Result<i32> {
    let mut points = Vec::new();
    for path in &a.inputs {
        let text = read_text(path, "sweep file")?;
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(SWEEP_HEADER) {
            bail!("{} is not a sweep CSV", path.display());
        }
        for (i, l) in lines.enumerate() {
            let f: Vec<&str> = l.trim().split(',').collect();
            if f.len() != 9 {
                bail!("{}:{}: expected 9 fields", path.display(), i + 2);
            }
            if f[3] != a.quantity {
                continue;
            }
            let num = |k: usize| {
                f[k].parse::<f64>()
                    .with_context(|| format!("{}:{}: bad number `{}`", path.display(), i + 2, f[k]))
            };
            points.push((
                num(0)? * num(2)?,
                Estimate {
                    value: num(4)?,
                    std_error: num(5)?,
                    n_samples: num(6)? as usize,
                },
            ));
        }
    }
    let e = extrapolate_fidelity(&points, a.target)?;
    line(
        json!({"quantity": a.quantity, "target": a.target, "points": points.len(), "prediction": est(&e)}),
    );
    Ok(0)
}

fn verify_bell(a: BellArgs, seed: u64, rng: &mut LabRng) -> anyhow::Result<i32> {
    let c = read_circuit(&a.circuit)?;
    let set = match &a.input {
        Some(p) => {
            let set = BellSampleSet::from_text(&read_text(p, "Bell sample file")?)?;
            if set.n_pairs() != c.n_qubits() {
                bail!(
                    "Bell samples are for {} qubits, circuit has {}",
                    set.n_pairs(),
                    c.n_qubits()
                );
            }
            set
        }
        None => {
            let noise = NoiseModel::new(a.eps)?;
            let set = bell_sample(&c, &noise, a.samples, a.shots_per_pair, rng)?;
            if a.out.is_some() {
                RunManifest::new("verify-bell", seed).emit(a.out.as_deref(), &set.to_text())?;
            }
            set
        }
    };
    let purity = estimate_purity(&set)?;
    let fidelity = fidelity_from_purity(&purity);
    line(json!({
        "circuit": c.id(),
        "purity": est(&purity),
        "fidelity": fidelity.as_ref().ok().map(est),
        "note": fidelity.err().map(|e| e.to_string()),
    }));
    Ok(0)
}

fn verify_graph(a: GraphArgs, rng: &mut LabRng) -> anyhow::Result<i32> {
    let g = graph_spec(a.n, a.edges.as_deref(), &a.angles, rng)?;
    let noise = NoiseModel::new(a.eps)?;
    let (method, e) = if a.generators {
        (
            "generator-bound",
            fidelity_bound_from_generators(&g, &noise, a.circuits, a.samples, rng)?,
        )
    } else {
        (
            "symmetry-average",
            estimate_fidelity_graph(&g, &noise, a.circuits, a.samples, rng)?,
        )
    };
    line(json!({"n": a.n, "eps": a.eps, "method": method, "fidelity": est(&e)}));
    Ok(0)
}

fn verify_planted_cmd(a: PlantedArgs) -> anyhow::Result<i32> {
    let key = SecretKey::from_json(&read_text(&a.key, "key file")?)?;
    let key = match a.threshold {
        Some(t) => key.with_threshold(t)?,
        None => key,
    };
    let s = SampleSet::from_text(&read_text(&a.samples, "sample file")?)?;
    let v = verify_planted(&s, &key)?;
    line(json!({
        "accepted": v.accepted,
        "statistic": v.statistic,
        "threshold": v.threshold,
        "p_value": v.p_value,
        "n_samples": v.n_samples,
    }));
    Ok(if v.accepted { 0 } else { 1 })
}

fn serve(a: ServeArgs, rng: &mut LabRng) -> anyhow::Result<i32> {
    let strategy = match a.strategy {
        StrategyArg::Honest => Strategy::HonestSimulator,
        StrategyArg::Spoofer => Strategy::SpooferBipartition,
        StrategyArg::Uniform => Strategy::UniformRandom,
    };
    let mut config = ProverConfig::new(strategy, a.eps, a.traj)?;
    config.timeout = Duration::from_secs(a.timeout.max(1));
    let listener = TcpListener::bind(&a.endpoint).map_err(|e| rcs_lab::Error::Protocol {
        code: rcs_lab::ProtocolErrorCode::Transport,
        msg: format!("cannot listen on {}: {e}", a.endpoint),
    })?;
    line(
        json!({"listening": listener.local_addr()?.to_string(), "strategy": strategy.to_string()}),
    );
    serve_prover(&listener, &config, a.sessions, rng, |log| {
        line(json!({
            "session": log.session,
            "verdict": log.verdict,
            "error": log.error,
        }));
    })?;
    Ok(0)
}

fn challenge(a: ChallengeArgs, rng: &mut LabRng) -> anyhow::Result<i32> {
    let spec = ChallengeSpec {
        n: a.n,
        circuits: a.circuits,
        samples: a.samples,
        threshold: a.threshold,
        timeout: Duration::from_secs(a.timeout.max(1)),
        ..Default::default()
    };
    spec.validate()?;
    let report = run_verifier(&spec, &a.endpoint, rng)?;
    if let Some(path) = &a.keys {
        std::fs::write(path, serde_json::to_string_pretty(&report.keys)? + "\n")?;
    }
    line(json!({
        "session": report.session,
        "accepted": report.verdict.accepted,
        "passed": report.verdict.passed,
        "total": report.verdict.total,
        "p_values": report.circuits.iter().map(|v| v.p_value).collect::<Vec<_>>(),
    }));
    Ok(if report.verdict.accepted { 0 } else { 1 })
}
