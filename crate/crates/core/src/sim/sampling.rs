use super::Statevector;
use crate::circuit::{format_bits, parse_bits};
use crate::error::{invalid, Error, Result};
use rand::Rng;
use std::fmt::Write as _;

/// Inverse-CDF sampler over a fixed probability vector.
pub struct BornSampler {
    cumulative: Vec<f64>,
}

impl BornSampler {
    pub fn new(probs: &[f64]) -> Self {
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Self { cumulative }
    }

    pub fn from_state(psi: &Statevector) -> Self {
        Self::new(&psi.probabilities())
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let total = *self.cumulative.last().expect("nonempty distribution");
        let u = rng.gen::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= u);
        // rounding can leave u at or beyond the final partial sum
        i.min(self.cumulative.len() - 1) as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleMeta {
    pub seed: u64,
    pub trajectories: usize,
    pub eps: f64,
}

impl Default for SampleMeta {
    fn default() -> Self {
        Self {
            seed: 0,
            trajectories: 0,
            eps: 0.0,
        }
    }
}

/// Measured bitstrings of one circuit. Outcome bit `q` is qubit `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub circuit_id: String,
    n_qubits: usize,
    outcomes: Vec<u64>,
    pub meta: SampleMeta,
}

impl SampleSet {
    pub fn new(
        circuit_id: impl Into<String>,
        n_qubits: usize,
        outcomes: Vec<u64>,
        meta: SampleMeta,
    ) -> Result<Self> {
        if n_qubits == 0 || n_qubits > 64 {
            return invalid(format!("sample width {n_qubits} out of range"));
        }
        if n_qubits < 64 {
            if let Some(x) = outcomes.iter().find(|&&x| x >> n_qubits != 0) {
                return invalid(format!("outcome {x:#b} wider than {n_qubits} bits"));
            }
        }
        let circuit_id = circuit_id.into();
        if circuit_id.chars().any(char::is_whitespace) {
            return invalid("circuit id may not contain whitespace");
        }
        Ok(Self {
            circuit_id,
            n_qubits,
            outcomes,
            meta,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn outcomes(&self) -> &[u64] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn with_circuit_id(mut self, id: impl Into<String>) -> Self {
        self.circuit_id = id.into();
        self
    }

    /// Text form: a `# circuit=… n=… seed=… eps=… traj=…` header, then one
    /// bitstring per line with qubit 0 leftmost.
    pub fn to_text(&self) -> String {
        let id = if self.circuit_id.is_empty() {
            "-"
        } else {
            &self.circuit_id
        };
        let mut out = format!(
            "# circuit={id} n={} seed={} eps={} traj={}\n",
            self.n_qubits, self.meta.seed, self.meta.eps, self.meta.trajectories
        );
        out.reserve(self.outcomes.len() * (self.n_qubits + 1));
        for &x in &self.outcomes {
            let _ = writeln!(out, "{}", format_bits(x, self.n_qubits));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "empty sample file"))?;
        let fields = parse_header(header, 1)?;
        let get = |k: &str| {
            fields
                .iter()
                .find(|(key, _)| key == k)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| parse_err(1, &format!("header is missing `{k}`")))
        };
        let n: usize = get("n")?.parse().map_err(|_| parse_err(1, "bad `n`"))?;
        let meta = SampleMeta {
            seed: get("seed")?
                .parse()
                .map_err(|_| parse_err(1, "bad `seed`"))?,
            eps: get("eps")?.parse().map_err(|_| parse_err(1, "bad `eps`"))?,
            trajectories: get("traj")?
                .parse()
                .map_err(|_| parse_err(1, "bad `traj`"))?,
        };
        let id = get("circuit")?;
        let id = if id == "-" { "" } else { id };
        let mut outcomes = Vec::new();
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.len() != n {
                return Err(parse_err(
                    i + 1,
                    &format!("bitstring has {} bits, expected {n}", line.len()),
                ));
            }
            outcomes.push(parse_bits(line).map_err(|e| parse_err(i + 1, &e.to_string()))?);
        }
        Self::new(id, n, outcomes, meta)
    }
}

pub(crate) fn parse_err(line: usize, msg: &str) -> Error {
    Error::Parse {
        line,
        column: 1,
        msg: msg.to_string(),
    }
}

/// Splits a `# k=v k=v …` header line into pairs.
pub(crate) fn parse_header(line: &str, lineno: usize) -> Result<Vec<(String, String)>> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| parse_err(lineno, "header must start with `#`"))?;
    body.split_whitespace()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| parse_err(lineno, &format!("malformed header field `{kv}`")))
        })
        .collect()
}

/// `k` independent Born-rule draws from `psi`.
pub fn sample<R: Rng + ?Sized>(psi: &Statevector, k: usize, rng: &mut R) -> Result<SampleSet> {
    if k == 0 {
        return invalid("need at least one sample");
    }
    let sampler = BornSampler::from_state(psi);
    let outcomes = (0..k).map(|_| sampler.draw(rng)).collect();
    SampleSet::new("", psi.n_qubits(), outcomes, SampleMeta::default())
}
