//! Descriptive statistics and simple linear regression primitives.
//!
//! Conventions used throughout the crate:
//!
//! - Variances and covariances are **sample** quantities (divisor `n − 1`),
//!   so `S_xx = (n − 1) · var(x)`.
//! - Standardized moments (`zscore_moment`) average with `1/n` but
//!   standardize with the sample (`n − 1`) standard deviation. This mixed
//!   convention is what reproduces the classic quartet diagnostics.
//!
//! All accumulation goes through Neumaier compensated summation so results
//! are independent of summation order at the tolerances the rest of the
//! crate asserts.

use serde::Serialize;

use crate::data::DatasetPair;
use crate::error::{Error, Result};

/// Neumaier compensated summation.
///
/// Keeps a running compensation term that captures the low-order bits lost
/// on each addition, including when the addend exceeds the running sum.
pub(crate) fn csum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn check_finite(v: &[f64]) -> Result<()> {
    for (i, x) in v.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::NonFinite(i));
        }
    }
    Ok(())
}

/// Arithmetic mean.
pub fn mean(v: &[f64]) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::EmptyVector);
    }
    check_finite(v)?;
    Ok(csum(v.iter().copied()) / v.len() as f64)
}

/// Sample variance with Bessel's correction (divisor `n − 1`).
pub fn variance(v: &[f64]) -> Result<f64> {
    if v.len() < 2 {
        return Err(Error::DegenerateSample(v.len()));
    }
    check_finite(v)?;
    let m = csum(v.iter().copied()) / v.len() as f64;
    let ss = csum(v.iter().map(|x| (x - m) * (x - m)));
    Ok(ss / (v.len() - 1) as f64)
}

/// Sample covariance (divisor `n − 1`), so `S_xy = (n − 1) · covariance`.
pub fn covariance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            xs: x.len(),
            ys: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::DegenerateSample(x.len()));
    }
    check_finite(x)?;
    check_finite(y)?;
    let mx = csum(x.iter().copied()) / x.len() as f64;
    let my = csum(y.iter().copied()) / y.len() as f64;
    let sp = csum(x.iter().zip(y.iter()).map(|(a, b)| (a - mx) * (b - my)));
    Ok(sp / (x.len() - 1) as f64)
}

/// Ordinary least-squares fit of `y = beta0 + beta1 · x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegressionFit {
    pub beta0: f64,
    pub beta1: f64,
    /// Coefficient of determination, `beta1² · S_xx / S_yy`.
    pub r_squared: f64,
}

/// Least-squares regression of the dataset's y on its x.
///
/// `r_squared` is defined as 1 when `S_yy == 0`: all y equal means the data
/// lie exactly on the (horizontal) fitted line.
pub fn linregress(d: &DatasetPair) -> Result<RegressionFit> {
    let n = d.len() as f64;
    let mx = csum(d.xs().iter().copied()) / n;
    let my = csum(d.ys().iter().copied()) / n;
    let sxx = csum(d.xs().iter().map(|x| (x - mx) * (x - mx)));
    if sxx == 0.0 {
        return Err(Error::VerticalData);
    }
    let syy = csum(d.ys().iter().map(|y| (y - my) * (y - my)));
    let sxy = csum(d.points().map(|(x, y)| (x - mx) * (y - my)));
    let beta1 = sxy / sxx;
    let beta0 = my - beta1 * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (beta1 * beta1 * sxx / syy).min(1.0)
    };
    Ok(RegressionFit {
        beta0,
        beta1,
        r_squared,
    })
}

/// Standardized moment `⟨z^order⟩` with `z = (v − v̄) / s`.
///
/// `s` is the sample (`n − 1`) standard deviation while the moment itself
/// averages with `1/n`; order 3 is the skewness and order 4 the kurtosis
/// used in the quartet diagnostics.
pub fn zscore_moment(v: &[f64], order: u32) -> Result<f64> {
    let var = variance(v)?;
    if var == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let sd = var.sqrt();
    let m = mean(v)?;
    let total = csum(v.iter().map(|x| ((x - m) / sd).powi(order as i32)));
    Ok(total / v.len() as f64)
}

/// Third and fourth standardized moments of both coordinates.
///
/// These diagnostics distinguish datasets that share identical first- and
/// second-order regression statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentReport {
    pub skew_x: f64,
    pub kurt_x: f64,
    pub skew_y: f64,
    pub kurt_y: f64,
}
