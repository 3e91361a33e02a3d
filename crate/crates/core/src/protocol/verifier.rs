use super::wire::{proto_err, Body, Challenge, Connection, Hello, Message, SessionVerdict};
use crate::circuit::{format_bits, serialize, Circuit, Gate};
use crate::error::{invalid, ProtocolErrorCode, Result};
use crate::rng::{base_seed, stream};
use crate::sim::SampleSet;
use crate::verification::{plant_secret_iqp, verify_planted, PlantParams, SecretKey, Verdict};
use rand::Rng;
use rayon::prelude::*;
use std::time::Duration;

/// What the verifier asks for and how it decides.
#[derive(Debug, Clone, PartialEq)]
pub struct ChallengeSpec {
    pub n: usize,
    pub circuits: usize,
    pub samples: usize,
    pub plant: PlantParams,
    /// Overrides the per-circuit acceptance threshold.
    pub threshold: Option<f64>,
    /// Fraction of circuits that must pass.
    pub quorum: f64,
    pub timeout: Duration,
}

impl Default for ChallengeSpec {
    fn default() -> Self {
        Self {
            n: 10,
            circuits: 5,
            samples: 10_000,
            plant: PlantParams::default(),
            threshold: None,
            quorum: 2.0 / 3.0,
            timeout: Duration::from_secs(60),
        }
    }
}

impl ChallengeSpec {
    pub fn validate(&self) -> Result<()> {
        if !(2..=63).contains(&self.n) {
            return invalid(format!("challenge width {} out of range", self.n));
        }
        if self.circuits == 0 || self.samples == 0 {
            return invalid("need at least one circuit and one sample");
        }
        if !(self.quorum > 0.0 && self.quorum <= 1.0) {
            return invalid(format!("quorum {} outside (0, 1]", self.quorum));
        }
        if let Some(t) = self.threshold {
            if !(t > 0.5 && t < 1.0) {
                return invalid(format!("threshold {t} outside (0.5, 1)"));
            }
        }
        Ok(())
    }
}

/// Verifier-side record of a finished session. Keys and per-circuit
/// verdicts stay here; only `verdict` went over the wire.
#[derive(Debug, Clone)]
pub struct SessionReport {
    pub session: String,
    pub verdict: SessionVerdict,
    pub circuits: Vec<Verdict>,
    pub keys: Vec<SecretKey>,
    /// Bytes the verifier wrote.
    pub sent: Vec<u8>,
    /// Bytes the verifier read.
    pub received: Vec<u8>,
}

/// Accepted iff at least `quorum` of the circuits passed.
pub fn aggregate(verdicts: &[Verdict], quorum: f64) -> SessionVerdict {
    let passed = verdicts.iter().filter(|v| v.accepted).count();
    let total = verdicts.len();
    SessionVerdict {
        accepted: total > 0 && passed as f64 >= quorum * total as f64 - 1e-9,
        passed,
        total,
    }
}

fn phase_masks(c: &Circuit) -> impl Iterator<Item = u64> + '_ {
    c.gates().filter_map(|g| match *g {
        Gate::DiagonalPhase { mask, .. } => Some(mask),
        _ => None,
    })
}

/// Fresh planted challenge circuits with nonzero random secrets. A circuit
/// is redrawn when its secret equals a phase mask anywhere in the challenge,
/// so no secret bitstring ever appears on the wire.
pub fn make_challenge<R: Rng + ?Sized>(
    spec: &ChallengeSpec,
    rng: &mut R,
) -> Result<Vec<(Circuit, SecretKey)>> {
    spec.validate()?;
    let base = base_seed(rng);
    let full = (1u64 << spec.n) - 1;
    let mut out: Vec<(Circuit, SecretKey)> = Vec::with_capacity(spec.circuits);
    for draw in 0u64.. {
        if out.len() == spec.circuits {
            break;
        }
        if draw >= 100 * spec.circuits as u64 {
            return invalid("could not draw challenge secrets distinct from all phase masks");
        }
        let mut r = stream(base, "challenge", draw);
        let s = loop {
            let s = r.gen::<u64>() & full;
            if s != 0 {
                break s;
            }
        };
        let (c, key) = plant_secret_iqp(spec.n, s, spec.plant, &mut r)?;
        let clash = out.iter().any(|(prev, k)| {
            phase_masks(prev).any(|m| m == s) || phase_masks(&c).any(|m| m == k.secret)
        });
        if clash {
            continue;
        }
        let key = match spec.threshold {
            Some(t) => key.with_threshold(t)?,
            None => key,
        };
        if spec.samples < key.min_samples {
            return invalid(format!(
                "{} samples per circuit, the key needs at least {}",
                spec.samples, key.min_samples
            ));
        }
        out.push((c, key));
    }
    Ok(out)
}

fn bad(msg: impl Into<String>) -> crate::Error {
    proto_err(ProtocolErrorCode::BadResponse, msg)
}

fn check_response(
    texts: &[String],
    circuits: &[(Circuit, SecretKey)],
    spec: &ChallengeSpec,
) -> Result<Vec<SampleSet>> {
    if texts.len() != circuits.len() {
        return Err(bad(format!(
            "{} sample sets for {} circuits",
            texts.len(),
            circuits.len()
        )));
    }
    texts
        .iter()
        .zip(circuits)
        .enumerate()
        .map(|(i, (text, (c, _)))| {
            let s = SampleSet::from_text(text).map_err(|e| bad(format!("sample set {i}: {e}")))?;
            if s.n_qubits() != spec.n {
                return Err(bad(format!(
                    "sample set {i} has {}-bit outcomes, expected {}",
                    s.n_qubits(),
                    spec.n
                )));
            }
            if s.len() != spec.samples {
                return Err(bad(format!(
                    "sample set {i} has {} outcomes, expected {}",
                    s.len(),
                    spec.samples
                )));
            }
            if s.circuit_id != c.id() {
                return Err(bad(format!(
                    "sample set {i} is labelled for another circuit"
                )));
            }
            Ok(s)
        })
        .collect()
}

fn run_session<R: Rng + ?Sized>(
    conn: &mut Connection,
    spec: &ChallengeSpec,
    session: &str,
    rng: &mut R,
) -> Result<(SessionVerdict, Vec<Verdict>, Vec<SecretKey>)> {
    conn.send(&Message::new(
        session,
        Body::Hello(Hello {
            role: "verifier".into(),
        }),
    ))?;
    let hello = conn.recv()?;
    match hello.body {
        Body::Hello(_) => {}
        Body::Error(e) => return Err(proto_err(ProtocolErrorCode::ProverFailure, e.message)),
        other => {
            return Err(proto_err(
                ProtocolErrorCode::Malformed,
                format!("expected hello, got {}", other.kind()),
            ))
        }
    }
    let circuits = make_challenge(spec, rng)?;
    conn.send(&Message::new(
        session,
        Body::Challenge(Challenge {
            circuits: circuits.iter().map(|(c, _)| serialize(c)).collect(),
            samples: spec.samples,
        }),
    ))?;
    let reply = conn.recv()?;
    if reply.session != session {
        return Err(bad(format!("reply for session `{}`", reply.session)));
    }
    let texts = match reply.body {
        Body::Response(r) => r.samples,
        Body::Error(e) => {
            return Err(proto_err(
                ProtocolErrorCode::ProverFailure,
                format!("prover reported {}: {}", e.code, e.message),
            ))
        }
        other => return Err(bad(format!("expected response, got {}", other.kind()))),
    };
    let sets = check_response(&texts, &circuits, spec)?;
    let verdicts = sets
        .par_iter()
        .zip(circuits.par_iter())
        .map(|(s, (_, key))| verify_planted(s, key))
        .collect::<Result<Vec<_>>>()?;
    let verdict = aggregate(&verdicts, spec.quorum);
    conn.send(&Message::new(session, Body::Verdict(verdict)))?;
    Ok((
        verdict,
        verdicts,
        circuits.into_iter().map(|(_, k)| k).collect(),
    ))
}

/// One verification session against the prover at `endpoint`.
pub fn run_verifier<R: Rng + ?Sized>(
    spec: &ChallengeSpec,
    endpoint: &str,
    rng: &mut R,
) -> Result<SessionReport> {
    spec.validate()?;
    let conn = Connection::connect(endpoint, spec.timeout)?;
    run_verifier_on(conn, spec, rng)
}

/// Same as [`run_verifier`] over an established connection.
pub fn run_verifier_on<R: Rng + ?Sized>(
    mut conn: Connection,
    spec: &ChallengeSpec,
    rng: &mut R,
) -> Result<SessionReport> {
    spec.validate()?;
    let session = format!("{:016x}", rng.gen::<u64>());
    match run_session(&mut conn, spec, &session, rng) {
        Ok((verdict, circuits, keys)) => Ok(SessionReport {
            session,
            verdict,
            circuits,
            keys,
            sent: conn.sent_bytes().to_vec(),
            received: conn.received_bytes().to_vec(),
        }),
        Err(e) => {
            conn.abort(&session, &e);
            Err(e)
        }
    }
}

/// Renderings of key material that must never appear in bytes sent to the
/// prover: the secret as a bitstring token, and β_honest and the threshold
/// in full and at 8 decimals.
pub fn secret_needles(key: &SecretKey) -> Vec<String> {
    let mut out = vec![format_bits(key.secret, key.n)];
    for x in [key.beta_honest, key.threshold] {
        out.push(x.to_string());
        out.push(format!("{x:.8}"));
    }
    out
}

/// Needles found in `bytes`. Bitstring needles only count as whole runs
/// of 0/1 characters.
pub fn scan_for_secrets(bytes: &[u8], keys: &[SecretKey]) -> Vec<String> {
    let text = String::from_utf8_lossy(bytes);
    let mut hits = Vec::new();
    for key in keys {
        let needles = secret_needles(key);
        let bits = &needles[0];
        let bit_runs = text
            .split(|c: char| c != '0' && c != '1')
            .any(|run| run == bits);
        if bit_runs {
            hits.push(bits.clone());
        }
        hits.extend(
            needles[1..]
                .iter()
                .filter(|s| text.contains(s.as_str()))
                .cloned(),
        );
    }
    hits
}
