use super::wire::{
    proto_err, Body, Challenge, Connection, Hello, Message, Response, SessionVerdict,
};
use crate::circuit::{parse, Circuit};
use crate::error::{invalid, Error, ProtocolErrorCode, Result};
use crate::rng::{base_seed, stream};
use crate::sim::{check_cap, sample, sample_noisy, simulate, NoiseModel, SampleMeta, SampleSet};
use crate::xeb::{spoof_samples, Bipartition};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::net::TcpListener;
use std::str::FromStr;
use std::time::Duration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Noisy trajectory simulation of the challenge circuit.
    HonestSimulator,
    /// Samples of the circuit cut in half, see [`spoof_samples`].
    SpooferBipartition,
    UniformRandom,
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "honest" | "honest-simulator" => Ok(Strategy::HonestSimulator),
            "spoofer" | "spoofer-bipartition" => Ok(Strategy::SpooferBipartition),
            "uniform" | "uniform-random" => Ok(Strategy::UniformRandom),
            other => invalid(format!(
                "unknown strategy `{other}` (honest, spoofer, uniform)"
            )),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::HonestSimulator => "honest-simulator",
            Strategy::SpooferBipartition => "spoofer-bipartition",
            Strategy::UniformRandom => "uniform-random",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProverConfig {
    pub strategy: Strategy,
    pub noise: NoiseModel,
    /// Trajectories per challenge circuit (honest strategy).
    pub trajectories: usize,
    /// Read timeout while waiting for the verifier.
    pub timeout: Duration,
}

impl ProverConfig {
    pub fn new(strategy: Strategy, eps: f64, trajectories: usize) -> Result<Self> {
        if trajectories == 0 {
            return invalid("trajectory budget must be positive");
        }
        Ok(Self {
            strategy,
            noise: NoiseModel::new(eps)?,
            trajectories,
            timeout: Duration::from_secs(60),
        })
    }
}

/// Samples for one challenge circuit under the configured strategy.
pub fn answer_circuit<R: Rng + ?Sized>(
    config: &ProverConfig,
    c: &Circuit,
    k: usize,
    rng: &mut R,
) -> Result<SampleSet> {
    if k == 0 {
        return invalid("challenge asks for zero samples");
    }
    let n = c.n_qubits();
    match config.strategy {
        Strategy::HonestSimulator if config.noise.is_noiseless() => {
            Ok(sample(&simulate(c)?, k, rng)?.with_circuit_id(c.id()))
        }
        Strategy::HonestSimulator => {
            Ok(
                sample_noisy(c, &config.noise, k, config.trajectories, rng)?
                    .with_circuit_id(c.id()),
            )
        }
        Strategy::SpooferBipartition => {
            if n < 2 {
                return invalid("cannot cut a single qubit");
            }
            spoof_samples(c, &Bipartition::first(n, n / 2)?, k, rng)
        }
        Strategy::UniformRandom => {
            if n > 64 {
                return invalid(format!("register size {n} out of range"));
            }
            let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            let outcomes = (0..k).map(|_| rng.gen::<u64>() & mask).collect();
            SampleSet::new(c.id(), n, outcomes, SampleMeta::default())
        }
    }
}

/// Outcome of one served session, as seen by the prover.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionLog {
    pub session: String,
    pub verdict: Option<SessionVerdict>,
    pub error: Option<String>,
}

fn expect_kind(m: &Message, kind: &str) -> Result<()> {
    if m.body.kind() == kind {
        Ok(())
    } else {
        Err(proto_err(
            ProtocolErrorCode::Malformed,
            format!("expected {kind}, got {}", m.body.kind()),
        ))
    }
}

fn answer_challenge<R: Rng + ?Sized>(
    config: &ProverConfig,
    ch: &Challenge,
    rng: &mut R,
) -> Result<Response> {
    let circuits: Vec<Circuit> = ch
        .circuits
        .iter()
        .map(|text| parse(text))
        .collect::<Result<_>>()
        .map_err(|e| proto_err(ProtocolErrorCode::Malformed, e.to_string()))?;
    for c in &circuits {
        if config.strategy == Strategy::HonestSimulator {
            check_cap(c.n_qubits())
                .map_err(|e| proto_err(ProtocolErrorCode::ProverFailure, e.to_string()))?;
        }
    }
    let samples = circuits
        .iter()
        .map(|c| answer_circuit(config, c, ch.samples, rng).map(|s| s.to_text()))
        .collect::<Result<_>>()
        .map_err(|e| proto_err(ProtocolErrorCode::ProverFailure, e.to_string()))?;
    Ok(Response { samples })
}

fn run_session<R: Rng + ?Sized>(
    conn: &mut Connection,
    config: &ProverConfig,
    session: &mut String,
    rng: &mut R,
) -> Result<SessionVerdict> {
    let hello = conn.recv()?;
    *session = hello.session.clone();
    expect_kind(&hello, "hello")?;
    conn.send(&Message::new(
        session.as_str(),
        Body::Hello(Hello {
            role: format!("prover/{}", config.strategy),
        }),
    ))?;
    let m = conn.recv()?;
    let ch = match m.body {
        Body::Challenge(ch) => ch,
        Body::Error(e) => return Err(proto_err(e.code, e.message)),
        other => {
            return Err(proto_err(
                ProtocolErrorCode::Malformed,
                format!("expected challenge, got {}", other.kind()),
            ))
        }
    };
    let response = answer_challenge(config, &ch, rng)?;
    conn.send(&Message::new(session.as_str(), Body::Response(response)))?;
    match conn.recv()?.body {
        Body::Verdict(v) => Ok(v),
        Body::Error(e) => Err(proto_err(e.code, e.message)),
        other => Err(proto_err(
            ProtocolErrorCode::Malformed,
            format!("expected verdict, got {}", other.kind()),
        )),
    }
}

/// Handles one verifier on an accepted connection. Failures are reported
/// in-band before the connection is dropped.
pub fn serve_connection<R: Rng + ?Sized>(
    mut conn: Connection,
    config: &ProverConfig,
    rng: &mut R,
) -> SessionLog {
    let mut session = String::new();
    match run_session(&mut conn, config, &mut session, rng) {
        Ok(v) => SessionLog {
            session,
            verdict: Some(v),
            error: None,
        },
        Err(e) => {
            conn.abort(&session, &e);
            SessionLog {
                session,
                verdict: None,
                error: Some(e.to_string()),
            }
        }
    }
}

/// Serves sessions one at a time, in arrival order, until `max_sessions`
/// have completed (forever when `None`). Session `i` draws its randomness
/// from a stream derived from `rng`, so a seeded prover is reproducible.
pub fn serve_prover<R, F>(
    listener: &TcpListener,
    config: &ProverConfig,
    max_sessions: Option<usize>,
    rng: &mut R,
    mut on_session: F,
) -> Result<usize>
where
    R: Rng + ?Sized,
    F: FnMut(&SessionLog),
{
    let base = base_seed(rng);
    let mut served = 0;
    for stream_result in listener.incoming() {
        if max_sessions.is_some_and(|m| served >= m) {
            break;
        }
        let tcp = match stream_result {
            Ok(s) => s,
            Err(_) => continue,
        };
        let log = match Connection::new(tcp, Some(config.timeout)) {
            Ok(conn) => {
                let mut r = stream(base, "session", served as u64);
                serve_connection(conn, config, &mut r)
            }
            Err(e) => SessionLog {
                session: String::new(),
                verdict: None,
                error: Some(e.to_string()),
            },
        };
        on_session(&log);
        served += 1;
        if max_sessions.is_some_and(|m| served >= m) {
            break;
        }
    }
    Ok(served)
}
