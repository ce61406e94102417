//! Power-law exponent fits.

use serde::Serialize;

use crate::error::{Error, Result};

/// Ordinary least squares fit of `ln tau` against `ln N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    /// Scaling exponent `a` in `tau ~ N^a`.
    pub exponent: f64,
    /// Intercept in log space.
    pub intercept: f64,
    /// Coefficient of determination of the log-log regression.
    pub r_squared: f64,
    pub points_used: usize,
}

/// Fits `tau ~ N^a` by OLS on `(ln N, ln tau)`.
pub fn fit_exponent(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "power-law fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    for &(n, tau) in points {
        if !(n.is_finite() && n > 0.0 && tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "power-law fit requires positive finite points, got ({n}, {tau})"
            )));
        }
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(n, t)| (n.ln(), t.ln())).collect();
    let count = logs.len() as f64;
    let x_bar = logs.iter().map(|&(x, _)| x).sum::<f64>() / count;
    let y_bar = logs.iter().map(|&(_, y)| y).sum::<f64>() / count;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for &(x, y) in &logs {
        let dx = x - x_bar;
        let dy = y - y_bar;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::InvalidArgument(
            "power-law fit requires at least two distinct sizes".into(),
        ));
    }
    let exponent = sxy / sxx;
    let intercept = y_bar - exponent * x_bar;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(FitResult {
        exponent,
        intercept,
        r_squared,
        points_used: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_is_recovered() {
        let points = [(10.0, 100.0), (100.0, 1e4), (1000.0, 1e6)];
        let fit = fit_exponent(&points).unwrap();
        assert!((fit.exponent - 2.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(fit.points_used, 3);
        // tau = N^2 exactly, so the log-space intercept vanishes.
        assert!(fit.intercept.abs() < 1e-12);
    }

    #[test]
    fn intercept_carries_the_prefactor() {
        // tau = 5 * N^1.5
        let points: Vec<(f64, f64)> = [10.0, 20.0, 40.0, 80.0]
            .iter()
            .map(|&n: &f64| (n, 5.0 * n.powf(1.5)))
            .collect();
        let fit = fit_exponent(&points).unwrap();
        assert!((fit.exponent - 1.5).abs() < 1e-10);
        assert!((fit.intercept - 5.0_f64.ln()).abs() < 1e-10);
        assert!(fit.r_squared > 0.999999);
    }

    #[test]
    fn noisy_points_reduce_r_squared() {
        let points = [(10.0, 105.0), (100.0, 0.8e4), (1000.0, 1.3e6)];
        let fit = fit_exponent(&points).unwrap();
        assert!(fit.r_squared < 1.0);
        assert!(fit.r_squared > 0.9);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert!(fit_exponent(&[(10.0, 1.0), (20.0, 2.0)]).is_err());
        assert!(fit_exponent(&[(10.0, 1.0), (20.0, 0.0), (30.0, 2.0)]).is_err());
        assert!(fit_exponent(&[(10.0, 1.0), (20.0, -1.0), (30.0, 2.0)]).is_err());
        assert!(fit_exponent(&[(10.0, 1.0), (10.0, 2.0), (10.0, 3.0)]).is_err());
        assert!(fit_exponent(&[(10.0, 1.0), (20.0, f64::NAN), (30.0, 2.0)]).is_err());
    }
}
