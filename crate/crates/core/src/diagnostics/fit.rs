//! Least-squares power-law fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Straight-line fit `y ≈ intercept + slope·x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (zero for two points or an exact fit).
    pub stderr: f64,
    pub r2: f64,
    pub n: usize,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return Err(Error::InvalidArgument(format!("line fit needs >= 2 paired points, got {n}")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("line fit with all abscissae equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let stderr = if n > 2 { (sse / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(LineFit {
        slope,
        intercept,
        stderr,
        r2,
        n,
    })
}

/// Coefficient of determination above which a fit is called a power law.
pub const POWER_LAW_R2: f64 = 0.99;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Exponent `a` in `value ≈ prefactor·(1+t)^a`.
    pub exponent: f64,
    pub prefactor: f64,
    pub r2: f64,
    pub samples: usize,
    pub power_law: bool,
}

/// Fits `log value` against `log(1+t)` over the samples with `t` in
/// `window`.
pub fn fit_decay(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|(t, _)| *t >= window.0 && *t <= window.1)
        .collect();
    if pts.len() < 8 {
        return Err(Error::InvalidArgument(format!(
            "decay fit needs >= 8 samples in [{}, {}], got {}",
            window.0,
            window.1,
            pts.len()
        )));
    }
    if let Some((t, v)) = pts.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(Error::InvalidArgument(format!("nonpositive value {v} at t = {t}")));
    }
    let x: Vec<f64> = pts.iter().map(|(t, _)| (1.0 + t).ln()).collect();
    let y: Vec<f64> = pts.iter().map(|(_, v)| v.ln()).collect();
    let f = fit_line(&x, &y)?;
    Ok(DecayFit {
        exponent: f.slope,
        prefactor: f.intercept.exp(),
        r2: f.r2,
        samples: f.n,
        power_law: f.r2 >= POWER_LAW_R2,
    })
}
