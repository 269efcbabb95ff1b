//! Log-log least-squares exponent fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::ratio::ExperimentRecord;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; 0 for three or fewer collinear points.
    pub stderr: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XKey {
    /// `δ⁻¹`
    InverseDelta,
    /// Number of tubes.
    Tubes,
}

/// Fits `log y = intercept + slope · log x`.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::InvalidArgument("a fit needs at least 3 (x, y) pairs".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument("log-log fit needs positive finite data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 1e-12 * (1.0 + mx * mx) {
        return Err(Error::InvalidArgument("x values must not all coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = if lx.len() > 2 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(FitResult {
        slope,
        intercept,
        stderr,
        points: lx.len(),
    })
}

/// Fits the ratio of `records` against `δ⁻¹` or the tube count.
pub fn sweep_and_fit(records: &[ExperimentRecord], key: XKey) -> Result<FitResult> {
    let mut xs = Vec::with_capacity(records.len());
    for r in records {
        let x = match key {
            XKey::InverseDelta => 1.0 / r.delta,
            XKey::Tubes => r
                .tubes
                .map(|n| n as f64)
                .ok_or_else(|| Error::InvalidArgument("record has no tube count".into()))?,
        };
        xs.push(x);
    }
    let ys: Vec<f64> = records.iter().map(|r| r.ratio).collect();
    fit_loglog(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_power_laws() {
        let f = fit_loglog(&[2.0, 4.0, 8.0], &[2.0, 4.0, 8.0]).unwrap();
        assert_relative_eq!(f.slope, 1.0, epsilon = 1e-12);
        assert!(f.stderr < 1e-12);
        let f = fit_loglog(&[2.0, 4.0, 8.0], &[3.0, 3.0, 3.0]).unwrap();
        assert_relative_eq!(f.slope, 0.0, epsilon = 1e-12);
        assert_relative_eq!(f.intercept, 3f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_loglog(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(fit_loglog(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(fit_loglog(&[1.0, 2.0, -1.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn stderr_of_noisy_line() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs
            .iter()
            .zip([1.0, 1.1, 0.9, 1.0])
            .map(|(x, e): (&f64, f64)| x.sqrt() * e)
            .collect();
        let f = fit_loglog(&xs, &ys).unwrap();
        assert!((f.slope - 0.5).abs() < 0.1);
        assert!(f.stderr > 0.0);
    }
}
