//! Linear cross-entropy benchmarking, noise sweeps, spoofing and fidelity
//! extrapolation.

mod extrapolate;
mod fit;
mod spoof;
mod sweep;

pub use extrapolate::extrapolate_fidelity;
pub use fit::{
    classify_phase_point, crossover_eps_n, fit_decay, fit_decay_rate, fit_line, LinearFit,
    PhaseClass, PhasePoint, BOUNDARY_STRONG, BOUNDARY_WEAK,
};
pub use spoof::{
    product_state, split_circuit, spoof_samples, spoof_xeb_exact, Bipartition, SpoofReport,
};
pub use sweep::{
    xeb_decay_sweep, CircuitRecord, DecayCurve, DecayPoint, Engine, EnsembleSpec, Quantity,
    SweepConfig, SweepResult,
};

use crate::circuit::Circuit;
use crate::error::{invalid, Result};
use crate::sim::{simulate, SampleSet};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XebResult {
    pub chi: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub circuit_id: String,
}

/// χ = 2^n · mean_x p_C(x) − 1 over the samples, with the standard error of
/// the per-sample terms.
pub fn estimate_xeb(samples: &SampleSet, c: &Circuit) -> Result<XebResult> {
    if samples.n_qubits() != c.n_qubits() {
        return invalid(format!(
            "samples have {} bits, circuit has {} qubits",
            samples.n_qubits(),
            c.n_qubits()
        ));
    }
    let probs = simulate(c)?.probabilities();
    let mut r = xeb_from_probabilities(samples, &probs)?;
    r.circuit_id = c.id();
    Ok(r)
}

/// [`estimate_xeb`] against a precomputed ideal distribution.
pub fn xeb_from_probabilities(samples: &SampleSet, probs: &[f64]) -> Result<XebResult> {
    if probs.len() != 1usize << samples.n_qubits() {
        return invalid("probability vector does not match the sample width");
    }
    if samples.is_empty() {
        return invalid("no samples");
    }
    let scale = probs.len() as f64;
    let terms: Vec<f64> = samples
        .outcomes()
        .iter()
        .map(|&x| scale * probs[x as usize] - 1.0)
        .collect();
    let e = crate::Estimate::from_values(&terms);
    Ok(XebResult {
        chi: e.value,
        std_error: e.std_error,
        n_samples: e.n_samples,
        circuit_id: samples.circuit_id.clone(),
    })
}

/// Expected χ of samples drawn from `dist`: 2^n Σ_x dist(x) p(x) − 1,
/// evaluated as 2^n Σ (p − 2^{-n})(dist − 2^{-n}) so that values near zero
/// keep their relative precision. Both inputs must be normalized.
pub fn expected_xeb(ideal: &[f64], dist: &[f64]) -> f64 {
    debug_assert_eq!(ideal.len(), dist.len());
    let scale = ideal.len() as f64;
    let u = 1.0 / scale;
    scale
        * ideal
            .iter()
            .zip(dist)
            .map(|(p, q)| (p - u) * (q - u))
            .sum::<f64>()
}

/// χ of ideal samples in expectation: 2^n Σ p² − 1.
pub fn ideal_xeb(ideal: &[f64]) -> f64 {
    expected_xeb(ideal, ideal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_grid_rcs, GridOptions};
    use crate::rng::seeded;
    use crate::sim::{sample, SampleMeta};
    use rand::Rng;

    #[test]
    fn deterministic_circuit_scores_one() {
        let c = Circuit::empty(1).unwrap();
        let s = SampleSet::new("", 1, vec![0; 20], SampleMeta::default()).unwrap();
        let r = estimate_xeb(&s, &c).unwrap();
        assert_eq!(r.chi, 1.0);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn width_mismatch_rejected() {
        let c = Circuit::empty(2).unwrap();
        let s = SampleSet::new("", 3, vec![0], SampleMeta::default()).unwrap();
        assert!(estimate_xeb(&s, &c).is_err());
    }

    #[test]
    fn uniform_samples_score_zero() {
        let c = build_grid_rcs(2, 3, 8, GridOptions::default(), 3).unwrap();
        let mut rng = seeded(11);
        let outcomes = (0..20_000).map(|_| rng.gen_range(0..64u64)).collect();
        let s = SampleSet::new("", 6, outcomes, SampleMeta::default()).unwrap();
        let r = estimate_xeb(&s, &c).unwrap();
        assert!(r.chi.abs() < 3.0 * r.std_error, "{r:?}");
    }

    #[test]
    fn ideal_samples_track_collision_sum() {
        let c = build_grid_rcs(2, 3, 8, GridOptions::default(), 5).unwrap();
        let psi = simulate(&c).unwrap();
        let s = sample(&psi, 50_000, &mut seeded(1)).unwrap();
        let r = estimate_xeb(&s, &c).unwrap();
        let exact = ideal_xeb(&psi.probabilities());
        assert!(
            (r.chi - exact).abs() < 3.0 * r.std_error,
            "{} vs {exact}",
            r.chi
        );
    }
}
