use super::sweep::DecayCurve;
use crate::error::{Error, Result};
use serde::Serialize;

/// Ordinary least-squares line `y = intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub intercept_se: f64,
    /// Covariance of (intercept, slope).
    pub covariance: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

impl LinearFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }

    /// Standard error of the fitted line at `x`.
    pub fn predict_se(&self, x: f64) -> f64 {
        (self.intercept_se.powi(2) + x * x * self.slope_se.powi(2) + 2.0 * x * self.covariance)
            .max(0.0)
            .sqrt()
    }
}

/// Least-squares fit with optional per-point standard errors. With errors
/// the fit is weighted and parameter uncertainties come from them; without,
/// the residual variance is used.
pub fn fit_line(xs: &[f64], ys: &[f64], sigmas: Option<&[f64]>) -> Result<LinearFit> {
    let k = xs.len();
    if k != ys.len() || sigmas.is_some_and(|s| s.len() != k) {
        return Err(Error::InvalidArgument("fit inputs differ in length".into()));
    }
    if k < 2 {
        return Err(Error::DegenerateFit(format!("{k} points")));
    }
    let weighted = sigmas.is_some_and(|s| s.iter().all(|&v| v > 0.0 && v.is_finite()));
    let weights: Vec<f64> = match sigmas {
        Some(s) if weighted => s.iter().map(|v| 1.0 / (v * v)).collect(),
        _ => vec![1.0; k],
    };
    let sw: f64 = weights.iter().sum();
    let mx = xs.iter().zip(&weights).map(|(x, w)| w * x).sum::<f64>() / sw;
    let my = ys.iter().zip(&weights).map(|(y, w)| w * y).sum::<f64>() / sw;
    let sxx: f64 = xs
        .iter()
        .zip(&weights)
        .map(|(x, w)| w * (x - mx).powi(2))
        .sum();
    if sxx <= 0.0 || !sxx.is_finite() {
        return Err(Error::DegenerateFit("all abscissae coincide".into()));
    }
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .zip(&weights)
        .map(|((x, y), w)| w * (x - mx) * (y - my))
        .sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .zip(&weights)
        .map(|((x, y), w)| w * (y - intercept - slope * x).powi(2))
        .sum();
    let tss: f64 = ys
        .iter()
        .zip(&weights)
        .map(|(y, w)| w * (y - my).powi(2))
        .sum();
    let scale = if weighted {
        1.0
    } else if k > 2 {
        rss / (k - 2) as f64
    } else {
        0.0
    };
    let slope_var = scale / sxx;
    let intercept_var = scale * (1.0 / sw + mx * mx / sxx);
    Ok(LinearFit {
        slope,
        intercept,
        slope_se: slope_var.sqrt(),
        intercept_se: intercept_var.sqrt(),
        covariance: -mx * slope_var,
        r_squared: if tss > 0.0 { 1.0 - rss / tss } else { 1.0 },
        n_points: k,
    })
}

/// Unweighted fit of `ln(mean)` against depth.
pub fn fit_decay(curve: &DecayCurve) -> Result<LinearFit> {
    if curve.points.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 depths, got {}",
            curve.points.len()
        )));
    }
    if let Some(p) = curve.points.iter().find(|p| p.mean <= 0.0) {
        return Err(Error::DegenerateFit(format!(
            "{} at depth {} is {} (consistent with zero)",
            curve.quantity, p.depth, p.mean
        )));
    }
    let xs: Vec<f64> = curve.points.iter().map(|p| p.depth).collect();
    let ys: Vec<f64> = curve.points.iter().map(|p| p.mean.ln()).collect();
    fit_line(&xs, &ys, None)
}

/// Decay rate per layer: minus the slope of ln(mean) against depth.
pub fn fit_decay_rate(curve: &DecayCurve) -> Result<f64> {
    Ok(-fit_decay(curve)?.slope)
}

/// Rates at or above this fraction of εn are classified weak-noise.
pub const BOUNDARY_WEAK: f64 = 0.8;
/// Rates at or below this fraction of εn are classified strong-noise.
pub const BOUNDARY_STRONG: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseClass {
    Weak,
    Strong,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub n: usize,
    pub eps: f64,
    pub rate: f64,
    /// ε·n, the decay rate of the fidelity.
    pub predicted: f64,
    pub class: PhaseClass,
}

pub fn classify_phase_point(n: usize, eps: f64, rate: f64) -> PhasePoint {
    let predicted = eps * n as f64;
    let class = if rate >= BOUNDARY_WEAK * predicted {
        PhaseClass::Weak
    } else if rate <= BOUNDARY_STRONG * predicted {
        PhaseClass::Strong
    } else {
        PhaseClass::Boundary
    };
    PhasePoint {
        n,
        eps,
        rate,
        predicted,
        class,
    }
}

/// Empirical crossover value of ε·n: where rate/(εn) crosses the midpoint of
/// the two classification thresholds, interpolated linearly in ε·n. Points
/// must be ordered by ε.
pub fn crossover_eps_n(points: &[PhasePoint]) -> Option<f64> {
    let mid = 0.5 * (BOUNDARY_WEAK + BOUNDARY_STRONG);
    points.windows(2).find_map(|w| {
        let (a, b) = (w[0], w[1]);
        let (ra, rb) = (a.rate / a.predicted, b.rate / b.predicted);
        if ra >= mid && rb < mid {
            let t = (ra - mid) / (ra - rb);
            Some(a.predicted + t * (b.predicted - a.predicted))
        } else {
            None
        }
    })
}
