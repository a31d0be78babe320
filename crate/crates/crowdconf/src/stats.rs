//! Numeric substrate: inverse normal quantile and Wilson score intervals
//! for binomial proportions. Pure functions, no shared state.

use crate::error::{Error, Result};
use crate::model::Interval;

/// Inverse CDF of the standard normal distribution.
///
/// Closed-form rational approximation (Acklam), deterministic across
/// platforms; absolute error below 1e-8 on [1e-6, 1 - 1e-6].
pub fn inv_norm_quantile(t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::domain(format!("quantile argument must be in (0,1), got {t}")));
    }

    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const T_LOW: f64 = 0.02425;

    let x = if t < T_LOW {
        let q = (-2.0 * t.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if t <= 1.0 - T_LOW {
        let q = t - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - t).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    Ok(x)
}

/// Inputs of a Wilson interval computation, including the quantile
/// magnitude `z = |Phi^-1((1-c)/2)|` actually used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilsonParams {
    pub p_hat: f64,
    pub level: f64,
    pub n: u64,
    pub z: f64,
}

impl WilsonParams {
    pub fn new(p_hat: f64, level: f64, n: u64) -> Result<WilsonParams> {
        if !(0.0..=1.0).contains(&p_hat) {
            return Err(Error::domain(format!("proportion must be in [0,1], got {p_hat}")));
        }
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::domain(format!("confidence level must be in (0,1), got {level}")));
        }
        if n == 0 {
            return Err(Error::domain("trial count must be >= 1"));
        }
        let z = inv_norm_quantile((1.0 - level) / 2.0)?.abs();
        Ok(WilsonParams { p_hat, level, n, z })
    }
}

/// Wilson score interval for a binomial proportion.
///
/// The returned estimate is the midpoint of the two endpoints (the Wilson
/// center, not `p_hat`); endpoints always lie inside [0, 1].
pub fn wilson_interval(p_hat: f64, level: f64, n: u64) -> Result<Interval> {
    let params = WilsonParams::new(p_hat, level, n)?;
    let (p, z) = (params.p_hat, params.z);
    let nf = n as f64;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let lo = (center - half).clamp(0.0, 1.0);
    let hi = (center + half).clamp(0.0, 1.0);
    Interval::from_endpoints((lo + hi) / 2.0, lo, hi, level)
}

/// Large-n normal approximation of the Wilson interval: `p_hat +- z*sqrt(p_hat(1-p_hat)/n)`.
///
/// Endpoints are deliberately not clamped into [0, 1].
pub fn wilson_interval_approx(p_hat: f64, level: f64, n: u64) -> Result<Interval> {
    let params = WilsonParams::new(p_hat, level, n)?;
    let half = params.z * (p_hat * (1.0 - p_hat) / n as f64).sqrt();
    Interval::symmetric(p_hat, half, level)
}
