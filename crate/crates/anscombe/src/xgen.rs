//! Construction of x vectors that satisfy the two x constraints
//! (mean and sample variance) exactly.
//!
//! Two families are provided: an arithmetic grid with uniform spacing, and
//! a two-valued "bimodal" vector with `n − 1` grouped points plus a single
//! outlier. Both solve for their free parameters in closed form.

use crate::error::{Error, Result};
use crate::stats;

/// Which side of the mean the lone bimodal outlier sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BimodalBranch {
    /// Outlier above the mean (the grouped points sit just below it).
    OutlierHigh,
    /// Outlier below the mean.
    OutlierLow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XFamily {
    Uniform,
    Bimodal(BimodalBranch),
}

/// Declarative description of an x grid: count, target mean and variance,
/// and the construction family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XGridSpec {
    n: usize,
    mean: f64,
    variance: f64,
    family: XFamily,
}

impl XGridSpec {
    pub fn new(n: usize, mean: f64, variance: f64, family: XFamily) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter {
                what: "n",
                why: format!("need at least 3 points, got {n}"),
            });
        }
        if !mean.is_finite() || !variance.is_finite() {
            return Err(Error::InvalidParameter {
                what: "x grid",
                why: "mean and variance must be finite".into(),
            });
        }
        if variance <= 0.0 {
            return Err(Error::InvalidParameter {
                what: "variance",
                why: format!("must be positive, got {variance}"),
            });
        }
        Ok(Self {
            n,
            mean,
            variance,
            family,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn family(&self) -> XFamily {
        self.family
    }

    /// Builds the x vector for this spec.
    pub fn build(&self) -> Result<Vec<f64>> {
        match self.family {
            XFamily::Uniform => uniform_x(self.n, self.mean, self.variance),
            XFamily::Bimodal(branch) => bimodal_x(self.n, self.mean, self.variance, branch),
        }
    }
}

/// Source of the x vector for the generation pipeline: a constructed grid
/// or explicit user-supplied values.
#[derive(Debug, Clone, PartialEq)]
pub enum XSource {
    Grid(XFamily),
    Explicit(Vec<f64>),
}

/// Arithmetic grid `x_k = x0 + a·k`, `k = 1..n`, with spacing and offset
/// solved from the mean and sample-variance targets:
///
/// `a = sqrt(12·variance / (n(n+1)))`, `x0 = mean − a·(n+1)/2`.
///
/// For odd `n` this reduces to `a = σx·sqrt(6/(n·m))` with `m = (n+1)/2`.
pub fn uniform_x(n: usize, mean: f64, variance: f64) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidParameter {
            what: "n",
            why: format!("uniform grid needs at least 2 points, got {n}"),
        });
    }
    if variance <= 0.0 {
        return Err(Error::InvalidParameter {
            what: "variance",
            why: format!("must be positive, got {variance}"),
        });
    }
    let nf = n as f64;
    // Single square root keeps exact targets exact (e.g. a = 1 for the
    // classic n = 11, variance = 11 grid).
    let a = (variance * 12.0 / (nf * (nf + 1.0))).sqrt();
    let x0 = mean - a * (nf + 1.0) / 2.0;
    Ok((1..=n).map(|k| x0 + a * k as f64).collect())
}

/// Two-valued vector: `n − 1` copies of `x_a` followed by one `x_b`, with
///
/// `δx_b = ±(n−1)·σx/√n` and `δx_a = −δx_b/(n−1)`
///
/// so that the mean and sample variance hit their targets exactly. The
/// branch picks the sign of `δx_b`.
pub fn bimodal_x(n: usize, mean: f64, variance: f64, branch: BimodalBranch) -> Result<Vec<f64>> {
    if n < 3 {
        return Err(Error::InvalidParameter {
            what: "n",
            why: format!("bimodal grid needs at least 3 points, got {n}"),
        });
    }
    if variance <= 0.0 {
        return Err(Error::InvalidParameter {
            what: "variance",
            why: format!("must be positive, got {variance}"),
        });
    }
    let nf = n as f64;
    let magnitude = ((nf - 1.0) * (nf - 1.0) * variance / nf).sqrt();
    let delta_b = match branch {
        BimodalBranch::OutlierHigh => magnitude,
        BimodalBranch::OutlierLow => -magnitude,
    };
    let x_a = mean - delta_b / (nf - 1.0);
    let x_b = mean + delta_b;
    let mut xs = vec![x_a; n - 1];
    xs.push(x_b);
    Ok(xs)
}

/// Validates a user-supplied x vector and returns it sorted ascending.
pub fn custom_x(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 3 {
        return Err(Error::TooFewPoints(values.len()));
    }
    for (i, v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite(i));
        }
    }
    if stats::variance(values)? == 0.0 {
        return Err(Error::ConstantX);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted)
}
