//! Two-copy Bell sampling. Copy one lives on qubits `0..n`, copy two on
//! `n..2n`; pair `q` is rotated into the Bell basis by CNOT(q, q+n) then
//! H(q). The measured bits read as `bit(q) + 2·bit(q+n)` give the label
//! 0 → I, 1 → Z, 2 → X, 3 → Y.

use crate::error::{invalid, Error, Result};
use crate::estimate::Estimate;
use crate::rng::{base_seed, LabRng};
use crate::sim::{
    check_cap, noisy_trajectory, parse_err, parse_header, run_trajectories, BornSampler,
    NoiseModel, SampleMeta, Statevector,
};
use crate::Circuit;
use rand::Rng;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellLabel {
    I,
    X,
    Y,
    Z,
}

impl BellLabel {
    fn from_bits(first: bool, second: bool) -> Self {
        match (first, second) {
            (false, false) => BellLabel::I,
            (true, false) => BellLabel::Z,
            (false, true) => BellLabel::X,
            (true, true) => BellLabel::Y,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            BellLabel::I => 'I',
            BellLabel::X => 'X',
            BellLabel::Y => 'Y',
            BellLabel::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        Some(match c {
            'I' => BellLabel::I,
            'X' => BellLabel::X,
            'Y' => BellLabel::Y,
            'Z' => BellLabel::Z,
            _ => return None,
        })
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// One Bell outcome per pair, packed as two bit masks: `first` holds the
/// copy-one bits, `second` the copy-two bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BellOutcome {
    first: u64,
    second: u64,
}

impl BellOutcome {
    pub fn label(&self, q: usize) -> BellLabel {
        BellLabel::from_bits(self.first >> q & 1 == 1, self.second >> q & 1 == 1)
    }

    /// Number of singlet (Y) pairs.
    pub fn singlets(&self) -> u32 {
        (self.first & self.second).count_ones()
    }

    fn from_labels(labels: &[BellLabel]) -> Self {
        let mut o = BellOutcome {
            first: 0,
            second: 0,
        };
        for (q, l) in labels.iter().enumerate() {
            let (a, b) = match l {
                BellLabel::I => (0, 0),
                BellLabel::Z => (1, 0),
                BellLabel::X => (0, 1),
                BellLabel::Y => (1, 1),
            };
            o.first |= a << q;
            o.second |= b << q;
        }
        o
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellSampleSet {
    pub circuit_id: String,
    n: usize,
    outcomes: Vec<BellOutcome>,
    pub meta: SampleMeta,
    /// Outcomes drawn from each pair of trajectories.
    pub shots_per_pair: usize,
}

impl BellSampleSet {
    pub fn n_pairs(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[BellOutcome] {
        &self.outcomes
    }

    pub fn labels(&self, i: usize) -> Vec<BellLabel> {
        (0..self.n).map(|q| self.outcomes[i].label(q)).collect()
    }

    /// Header as for sample files plus `pairs=` and `shots=`, then one line
    /// of labels per outcome, pair 0 leftmost.
    pub fn to_text(&self) -> String {
        let id = if self.circuit_id.is_empty() {
            "-"
        } else {
            &self.circuit_id
        };
        let mut out = format!(
            "# circuit={id} n={} seed={} eps={} traj={} pairs={} shots={}\n",
            self.n,
            self.meta.seed,
            self.meta.eps,
            self.meta.trajectories,
            self.outcomes.len(),
            self.shots_per_pair
        );
        for o in &self.outcomes {
            for q in 0..self.n {
                out.push(o.label(q).as_char());
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "empty Bell sample file"))?;
        let fields = parse_header(header, 1)?;
        let get = |k: &str| {
            fields
                .iter()
                .find(|(key, _)| key == k)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| parse_err(1, &format!("header is missing `{k}`")))
        };
        let num = |k: &str| -> Result<u64> {
            get(k)?
                .parse()
                .map_err(|_| parse_err(1, &format!("bad `{k}`")))
        };
        let n = num("n")? as usize;
        if n == 0 || n > 64 {
            return Err(parse_err(1, "`n` out of range"));
        }
        let pairs = num("pairs")? as usize;
        let meta = SampleMeta {
            seed: num("seed")?,
            eps: get("eps")?.parse().map_err(|_| parse_err(1, "bad `eps`"))?,
            trajectories: num("traj")? as usize,
        };
        let shots_per_pair = num("shots")? as usize;
        let id = get("circuit")?;
        let mut outcomes = Vec::with_capacity(pairs);
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let labels: Option<Vec<BellLabel>> = line.chars().map(BellLabel::from_char).collect();
            match labels {
                Some(l) if l.len() == n => outcomes.push(BellOutcome::from_labels(&l)),
                Some(l) => {
                    return Err(parse_err(
                        i + 1,
                        &format!("{} labels, expected {n}", l.len()),
                    ))
                }
                None => return Err(parse_err(i + 1, "labels must be I, X, Y or Z")),
            }
        }
        if outcomes.len() != pairs {
            return Err(parse_err(
                1,
                &format!("header says {pairs} outcomes, file has {}", outcomes.len()),
            ));
        }
        Ok(Self {
            circuit_id: if id == "-" {
                String::new()
            } else {
                id.to_string()
            },
            n,
            outcomes,
            meta,
            shots_per_pair,
        })
    }
}

/// Rotates pair `q` of a 2n-qubit state into the Bell basis.
fn bell_rotate(joint: &mut Statevector, n: usize) {
    let h = crate::sim::hadamard();
    for q in 0..n {
        joint.apply_cnot(q, q + n);
        joint.apply_matrix1(q, &h);
    }
}

/// Bell samples from pairs of independently prepared states. Each call of
/// `prepare` yields one copy; every pair of copies is measured
/// `shots_per_pair` times (the last pair may be measured fewer times).
pub fn bell_sample_states<F, R>(
    n: usize,
    k: usize,
    shots_per_pair: usize,
    prepare: F,
    rng: &mut R,
) -> Result<BellSampleSet>
where
    F: Fn(&mut LabRng) -> Statevector + Sync,
    R: Rng + ?Sized,
{
    if n == 0 {
        return invalid("Bell sampling needs at least one pair");
    }
    if k == 0 || shots_per_pair == 0 {
        return invalid("need at least one Bell sample and one shot per pair");
    }
    check_cap(2 * n)?;
    let n_pairs = k.div_ceil(shots_per_pair);
    let base = base_seed(rng);
    let mask = (1u64 << n) - 1;
    let chunks = run_trajectories(n_pairs, base, "bell", |i, r| {
        let a = prepare(r);
        let b = prepare(r);
        let mut joint = a.tensor(&b).expect("width checked above");
        bell_rotate(&mut joint, n);
        let sampler = BornSampler::from_state(&joint);
        let shots = shots_per_pair.min(k - i * shots_per_pair);
        (0..shots)
            .map(|_| {
                let x = sampler.draw(r);
                BellOutcome {
                    first: x & mask,
                    second: x >> n & mask,
                }
            })
            .collect::<Vec<_>>()
    });
    Ok(BellSampleSet {
        circuit_id: String::new(),
        n,
        outcomes: chunks.into_iter().flatten().collect(),
        meta: SampleMeta {
            seed: base,
            trajectories: 2 * n_pairs,
            eps: 0.0,
        },
        shots_per_pair,
    })
}

/// Bell samples of the noisy circuit, two fresh trajectories per pair.
pub fn bell_sample<R: Rng + ?Sized>(
    c: &Circuit,
    noise: &NoiseModel,
    k: usize,
    shots_per_pair: usize,
    rng: &mut R,
) -> Result<BellSampleSet> {
    let mut set = bell_sample_states(
        c.n_qubits(),
        k,
        shots_per_pair,
        |r| noisy_trajectory(c, noise, r).expect("width checked by the sampler"),
        rng,
    )?;
    set.circuit_id = c.id();
    set.meta.eps = noise.epsilon();
    Ok(set)
}

/// Mean of (−1)^{#Y}: an unbiased estimate of tr[ρ 𝕊] = tr ρ².
pub fn estimate_purity(b: &BellSampleSet) -> Result<Estimate> {
    let outcomes = &b.outcomes;
    if outcomes.len() < 2 {
        return invalid("purity needs at least two Bell samples");
    }
    let values: Vec<f64> = outcomes
        .iter()
        .map(|o| if o.singlets() % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    Ok(Estimate::from_values(&values))
}

/// √P with first-order error propagation σ/(2√P).
pub fn fidelity_from_purity(p: &Estimate) -> Result<Estimate> {
    if p.value <= 2.0 * p.std_error || p.value <= 0.0 {
        return Err(Error::Indeterminate(format!(
            "purity {:.4} ± {:.4} is consistent with zero",
            p.value, p.std_error
        )));
    }
    let root = p.value.sqrt();
    Ok(Estimate {
        value: root,
        std_error: p.std_error / (2.0 * root),
        n_samples: p.n_samples,
    })
}

pub fn fidelity_from_bell(b: &BellSampleSet) -> Result<Estimate> {
    fidelity_from_purity(&estimate_purity(b)?)
}

impl fmt::Display for BellSampleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} Bell samples on {} pairs", self.len(), self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_grid_rcs, GridOptions};
    use crate::rng::seeded;

    #[test]
    fn identity_gives_only_i_and_z() {
        let c = Circuit::empty(1).unwrap();
        let b = bell_sample(&c, &NoiseModel::noiseless(), 4000, 50, &mut seeded(1)).unwrap();
        let mut counts = [0usize; 4];
        for i in 0..b.len() {
            counts[match b.labels(i)[0] {
                BellLabel::I => 0,
                BellLabel::Z => 1,
                BellLabel::X => 2,
                BellLabel::Y => 3,
            }] += 1;
        }
        assert_eq!(counts[2] + counts[3], 0);
        let frac = counts[0] as f64 / 4000.0;
        assert!((frac - 0.5).abs() < 0.03, "{counts:?}");
    }

    #[test]
    fn singlet_is_the_only_odd_label() {
        // |01⟩ − |10⟩ on (q, q+n) maps to bits (1, 1).
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = num_complex::Complex64::new(0.0, 0.0);
        let amps = vec![
            z,
            num_complex::Complex64::new(s, 0.0),
            num_complex::Complex64::new(-s, 0.0),
            z,
        ];
        let mut psi = Statevector::from_amplitudes(amps).unwrap();
        bell_rotate(&mut psi, 1);
        assert!((psi.probability(0b11) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pure_state_has_unit_purity() {
        let c = build_grid_rcs(2, 2, 4, GridOptions::default(), 3).unwrap();
        let b = bell_sample(&c, &NoiseModel::noiseless(), 2000, 20, &mut seeded(2)).unwrap();
        let p = estimate_purity(&b).unwrap();
        assert_eq!(p.value, 1.0);
        assert_eq!(fidelity_from_bell(&b).unwrap().value, 1.0);
    }

    #[test]
    fn fidelity_arithmetic_and_indeterminate() {
        let p = Estimate {
            value: 0.25,
            std_error: 0.01,
            n_samples: 100,
        };
        let f = fidelity_from_purity(&p).unwrap();
        assert!((f.value - 0.5).abs() < 1e-15);
        assert!((f.std_error - 0.01).abs() < 1e-15);
        let weak = Estimate {
            value: 0.01,
            std_error: 0.01,
            n_samples: 100,
        };
        assert!(matches!(
            fidelity_from_purity(&weak),
            Err(Error::Indeterminate(_))
        ));
    }

    #[test]
    fn text_round_trip_and_errors() {
        let c = build_grid_rcs(1, 3, 3, GridOptions::default(), 4).unwrap();
        let noise = NoiseModel::new(0.2).unwrap();
        let b = bell_sample(&c, &noise, 37, 5, &mut seeded(5)).unwrap();
        let back = BellSampleSet::from_text(&b.to_text()).unwrap();
        assert_eq!(back, b);
        assert!(BellSampleSet::from_text("").is_err());
        let bad = "# circuit=- n=2 seed=0 eps=0 traj=2 pairs=1 shots=1\nIQ\n";
        assert!(matches!(
            BellSampleSet::from_text(bad),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn seeded_runs_repeat() {
        let c = build_grid_rcs(2, 2, 3, GridOptions::default(), 6).unwrap();
        let noise = NoiseModel::new(0.05).unwrap();
        let a = bell_sample(&c, &noise, 100, 4, &mut seeded(7)).unwrap();
        let b = bell_sample(&c, &noise, 100, 4, &mut seeded(7)).unwrap();
        assert_eq!(a, b);
    }
}
