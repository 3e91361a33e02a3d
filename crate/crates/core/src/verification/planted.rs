//! Planted-bias IQP circuits.
//!
//! Every phase gate exp(iθ·(m·x mod 2)) with m·s = 0 commutes with the
//! shift x → x ⊕ s and leaves the parity x·s of the X-basis outcome
//! untouched. Gates with m·s = 1 and linearly independent masks each
//! multiply ⟨X_s⟩ by cos θ, so the bias Pr[x·s = 0] becomes
//! (1 + ∏ cos θ_g)/2.

use crate::circuit::{build_iqp, Circuit};
use crate::error::{invalid, Error, Result};
use crate::sim::{simulate, SampleSet};
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};
use std::f64::consts::PI;
use std::path::Path;

/// Construction knobs for [`plant_secret_iqp`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantParams {
    /// Gates with masks of odd overlap with s.
    pub planted: usize,
    pub planted_angle: f64,
    /// Random-angle gates with masks of even overlap with s.
    pub decoys: usize,
}

impl Default for PlantParams {
    fn default() -> Self {
        Self {
            planted: 3,
            planted_angle: PI / 8.0,
            decoys: 20,
        }
    }
}

/// Everything the verifier keeps private.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecretKey {
    pub circuit_id: String,
    pub n: usize,
    pub secret: u64,
    /// (θ, mask) of the planted gates.
    pub planted: Vec<(f64, u64)>,
    pub beta_honest: f64,
    pub threshold: f64,
    pub min_samples: usize,
}

impl SecretKey {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("key fields serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let key: SecretKey = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            msg: e.to_string(),
        })?;
        key.validate()?;
        Ok(key)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_json())?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > 63 || self.secret == 0 || self.secret >> self.n != 0 {
            return invalid("key secret must be a nonzero n-bit vector");
        }
        if !(0.5..1.0).contains(&self.threshold) || self.threshold == 0.5 {
            return invalid(format!("threshold {} outside (0.5, 1)", self.threshold));
        }
        if self.min_samples == 0 {
            return invalid("min_samples must be positive");
        }
        Ok(())
    }

    /// Same key with a different acceptance threshold; min_samples is
    /// recomputed for the new margin.
    pub fn with_threshold(mut self, threshold: f64) -> Result<Self> {
        self.threshold = threshold;
        self.min_samples = min_samples_for(self.beta_honest, threshold);
        self.validate()?;
        Ok(self)
    }
}

fn parity(x: u64) -> u64 {
    u64::from(x.count_ones() % 2 == 1)
}

/// Hoeffding: N ≥ ln(100) / (2δ²) keeps both error rates ≤ 1%, where δ is
/// the smaller distance from τ to 0.5 and to β_honest.
fn min_samples_for(beta_honest: f64, threshold: f64) -> usize {
    let delta = (threshold - 0.5).min(beta_honest - threshold);
    if delta <= 0.0 {
        return usize::MAX;
    }
    (100f64.ln() / (2.0 * delta * delta)).ceil() as usize
}

/// Pr[x·s = 0 mod 2] under `probs`.
pub fn bias(probs: &[f64], s: u64) -> f64 {
    probs
        .iter()
        .enumerate()
        .filter(|(x, _)| parity(*x as u64 & s) == 0)
        .map(|(_, p)| p)
        .sum()
}

fn random_mask<R: Rng + ?Sized>(n: usize, rng: &mut R) -> u64 {
    let full = (1u64 << n) - 1;
    loop {
        let m = rng.gen::<u64>() & full;
        if m != 0 {
            return m;
        }
    }
}

/// Inserts `v` into a GF(2) basis kept in reduced form; false if dependent.
fn insert_independent(basis: &mut Vec<u64>, mut v: u64) -> bool {
    for &b in basis.iter() {
        v = v.min(v ^ b);
    }
    if v == 0 {
        return false;
    }
    basis.push(v);
    basis.sort_unstable_by(|a, b| b.cmp(a));
    true
}

/// Builds a planted IQP circuit for secret `s` and its verification key.
/// β_honest is the exact bias of the ideal output distribution.
pub fn plant_secret_iqp<R: Rng + ?Sized>(
    n: usize,
    s: u64,
    params: PlantParams,
    rng: &mut R,
) -> Result<(Circuit, SecretKey)> {
    if !(2..=63).contains(&n) {
        return invalid(format!("planted IQP needs 2 ≤ n ≤ 63, got {n}"));
    }
    if s == 0 || s >> n != 0 {
        return invalid("secret must be a nonzero n-bit vector");
    }
    if params.planted == 0 || params.planted > n {
        return invalid(format!("planted gate count must be in 1..={n}"));
    }
    if !params.planted_angle.is_finite() || params.planted_angle.cos().abs() < 1e-9 {
        return invalid("planted angle must be finite and not an odd multiple of π/2");
    }
    let mut planted = Vec::with_capacity(params.planted);
    let mut basis = Vec::new();
    let mut tries = 0;
    while planted.len() < params.planted {
        tries += 1;
        if tries > 100_000 {
            return invalid("could not draw independent planted masks");
        }
        let m = random_mask(n, rng);
        if m != s && parity(m & s) == 1 && insert_independent(&mut basis, m) {
            planted.push((params.planted_angle, m));
        }
    }
    let mut decoys = Vec::with_capacity(params.decoys);
    while decoys.len() < params.decoys {
        let m = random_mask(n, rng);
        if m != s && parity(m & s) == 0 {
            decoys.push((rng.gen_range(0.0..2.0 * PI), m));
        }
    }
    // spread planted gates among the decoys
    let mut gates = decoys;
    for g in &planted {
        let at = rng.gen_range(0..=gates.len());
        gates.insert(at, *g);
    }
    let c = build_iqp(n, &gates, None, rng.gen())?;
    let beta_honest = bias(&simulate(&c)?.probabilities(), s);
    let threshold = (beta_honest + 0.5) / 2.0;
    let key = SecretKey {
        circuit_id: c.id(),
        n,
        secret: s,
        planted,
        beta_honest,
        threshold,
        min_samples: min_samples_for(beta_honest, threshold),
    };
    key.validate()?;
    Ok((c, key))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub accepted: bool,
    /// Empirical bias.
    pub statistic: f64,
    pub threshold: f64,
    /// Pr[Bin(N, 1/2) ≥ observed count].
    pub p_value: f64,
    pub n_samples: usize,
}

/// Upper binomial tail under the uniform null.
pub fn uniform_tail(count: u64, n: u64) -> f64 {
    if count == 0 {
        return 1.0;
    }
    let b = Binomial::new(0.5, n).expect("p = 1/2 is valid");
    b.sf(count - 1)
}

pub fn verify_planted(samples: &SampleSet, key: &SecretKey) -> Result<Verdict> {
    if samples.n_qubits() != key.n {
        return invalid(format!(
            "samples have {} bits, key expects {}",
            samples.n_qubits(),
            key.n
        ));
    }
    if samples.is_empty() || samples.len() < key.min_samples {
        return invalid(format!(
            "{} samples, at least {} required",
            samples.len(),
            key.min_samples
        ));
    }
    let even = samples
        .outcomes()
        .iter()
        .filter(|&&x| parity(x & key.secret) == 0)
        .count();
    let n = samples.len();
    let statistic = even as f64 / n as f64;
    Ok(Verdict {
        accepted: statistic >= key.threshold,
        statistic,
        threshold: key.threshold,
        p_value: uniform_tail(even as u64, n as u64),
        n_samples: n,
    })
}
