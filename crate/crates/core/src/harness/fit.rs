//! Power-law fits in log-log space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `τ ≈ prefactor · scale^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub exponent_stderr: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Ordinary least squares of `ln τ` on `ln scale`.
///
/// Needs at least four points, all strictly positive. The slope error comes
/// from the residual variance with `n − 2` degrees of freedom.
pub fn powerlaw_fit(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 4 {
        return Err(Error::invalid(format!(
            "a power-law fit needs at least 4 points, got {}",
            points.len()
        )));
    }
    if let Some(&(s, t)) = points.iter().find(|&&(s, t)| !(s > 0.0 && t > 0.0)) {
        return Err(Error::invalid(format!(
            "power-law fit needs positive data, got ({s}, {t})"
        )));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid(
            "power-law fit needs at least two distinct scales",
        ));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let sst: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    Ok(PowerLawFit {
        exponent: slope,
        prefactor: intercept.exp(),
        exponent_stderr: (ssr / (n - 2.0) / sxx).sqrt(),
        r_squared: if sst > 0.0 { 1.0 - ssr / sst } else { 1.0 },
        points: points.len(),
    })
}
