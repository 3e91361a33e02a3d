use super::fit::fit_line;
use crate::error::{Error, Result};
use crate::estimate::Estimate;

/// Fits ln F linearly in a size proxy (typically n·d) and evaluates the fit
/// at `target`. When every point carries a positive standard error the fit
/// is weighted by the propagated errors of ln F; otherwise it is unweighted.
/// The returned error is the fit uncertainty at `target` mapped back through
/// the exponential.
pub fn extrapolate_fidelity(points: &[(f64, Estimate)], target: f64) -> Result<Estimate> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "extrapolation needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some((x, e)) = points.iter().find(|(_, e)| e.value <= 0.0) {
        return Err(Error::DegenerateFit(format!(
            "non-positive fidelity {} at size {x}",
            e.value
        )));
    }
    let xs: Vec<f64> = points.iter().map(|(x, _)| *x).collect();
    let ys: Vec<f64> = points.iter().map(|(_, e)| e.value.ln()).collect();
    let sig: Vec<f64> = points.iter().map(|(_, e)| e.std_error / e.value).collect();
    let fit = fit_line(&xs, &ys, Some(&sig))?;
    let value = fit.predict(target).exp();
    Ok(Estimate {
        value,
        std_error: value * fit.predict_se(target),
        n_samples: points.iter().map(|(_, e)| e.n_samples).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_model_is_reproduced() {
        let eps = 0.01f64;
        let pts: Vec<(f64, Estimate)> = [60.0, 80.0, 100.0]
            .iter()
            .map(|&nd| (nd, Estimate::exact((-eps * nd).exp(), 1)))
            .collect();
        let e = extrapolate_fidelity(&pts, 120.0).unwrap();
        assert!((e.value - (-1.2f64).exp()).abs() < 1e-12);
        assert!(e.std_error < 1e-12);
    }

    #[test]
    fn too_few_or_bad_points() {
        let one = [(1.0, Estimate::exact(0.5, 1))];
        assert!(extrapolate_fidelity(&one, 2.0).is_err());
        let neg = [
            (1.0, Estimate::exact(0.5, 1)),
            (2.0, Estimate::exact(-0.1, 1)),
            (3.0, Estimate::exact(0.2, 1)),
        ];
        assert!(extrapolate_fidelity(&neg, 4.0).is_err());
        let same = [
            (1.0, Estimate::exact(0.5, 1)),
            (1.0, Estimate::exact(0.4, 1)),
            (1.0, Estimate::exact(0.3, 1)),
        ];
        assert!(extrapolate_fidelity(&same, 4.0).is_err());
    }

    #[test]
    fn weighted_error_grows_away_from_data() {
        let pts: Vec<(f64, Estimate)> = [(10.0, 0.9), (20.0, 0.8), (30.0, 0.72)]
            .iter()
            .map(|&(x, v)| {
                (
                    x,
                    Estimate {
                        value: v,
                        std_error: 0.01,
                        n_samples: 100,
                    },
                )
            })
            .collect();
        let near = extrapolate_fidelity(&pts, 20.0).unwrap();
        let far = extrapolate_fidelity(&pts, 60.0).unwrap();
        assert!(far.std_error / far.value > near.std_error / near.value);
    }
}
