use serde::{Deserialize, Serialize};

/// A scalar estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

impl Estimate {
    /// Sample mean with standard error `s/√k` (`s` the unbiased sample
    /// standard deviation). A single value gets a zero error.
    pub fn from_values(values: &[f64]) -> Self {
        let k = values.len();
        assert!(k > 0, "estimate needs at least one value");
        let mean = values.iter().sum::<f64>() / k as f64;
        let std_error = if k > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
            (var / k as f64).sqrt()
        } else {
            0.0
        };
        Self {
            value: mean,
            std_error,
            n_samples: k,
        }
    }

    pub fn exact(value: f64, n_samples: usize) -> Self {
        Self {
            value,
            std_error: 0.0,
            n_samples,
        }
    }

    /// |self − other| in units of the combined standard error.
    pub fn z_distance(&self, other: &Estimate) -> f64 {
        let s = (self.std_error.powi(2) + other.std_error.powi(2)).sqrt();
        let d = (self.value - other.value).abs();
        if s == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / s
        }
    }
}

impl std::fmt::Display for Estimate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{:.6} ± {:.6} (k={})",
            self.value, self.std_error, self.n_samples
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_error() {
        let e = Estimate::from_values(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.value, 2.5);
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((e.std_error - sd / 2.0).abs() < 1e-15);
        assert_eq!(e.n_samples, 4);
    }

    #[test]
    fn constant_values_have_no_error() {
        let e = Estimate::from_values(&[1.0; 10]);
        assert_eq!(e.std_error, 0.0);
        assert_eq!(Estimate::from_values(&[0.3]).std_error, 0.0);
    }
}
