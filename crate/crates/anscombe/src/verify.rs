//! Independent verification that a dataset meets a constraint set.
//!
//! Everything here recomputes statistics from the raw data through the
//! `stats` module and never trusts the solvers. `verify` reports instead
//! of failing: a dataset that misses its targets produces a report with
//! `passed == false`, not an error.

use std::fmt;

use serde::Serialize;

use crate::constraints::ConstraintSet;
use crate::data::DatasetPair;
use crate::error::Result;
use crate::stats::{self, MomentReport};

/// Statistics measured from the raw data.
///
/// `beta0` and `r_squared` are derived quantities: they are reported for
/// inspection but are not pass/fail constraints, since the six primary
/// targets already determine them.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeasuredStats {
    pub n: usize,
    pub mean_x: f64,
    pub var_x: f64,
    pub mean_y: f64,
    pub var_y: f64,
    pub beta1: f64,
    pub beta0: f64,
    pub r_squared: f64,
}

/// One target/measured comparison.
#[derive(Debug, Clone, Serialize)]
pub struct ConstraintCheck {
    pub name: &'static str,
    pub target: f64,
    pub measured: f64,
    pub residual: f64,
    pub passed: bool,
}

/// Outcome of verifying a dataset against a constraint set at an absolute
/// tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub measured: MeasuredStats,
    pub checks: Vec<ConstraintCheck>,
    pub passed: bool,
    pub tolerance: f64,
    /// Skewness/kurtosis diagnostics; absent when either coordinate has
    /// zero variance.
    pub moments: Option<MomentReport>,
}

impl VerificationReport {
    /// The failing check with the largest residual, if any.
    pub fn worst_failure(&self) -> Option<&ConstraintCheck> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .max_by(|a, b| a.residual.total_cmp(&b.residual))
    }
}

/// Recomputes every statistic from the raw data and compares absolutely
/// against the targets.
pub fn verify(d: &DatasetPair, c: &ConstraintSet, tolerance: f64) -> VerificationReport {
    let mean_x = stats::mean(d.xs()).expect("dataset is non-empty");
    let var_x = stats::variance(d.xs()).expect("dataset has at least 3 points");
    let mean_y = stats::mean(d.ys()).expect("dataset is non-empty");
    let var_y = stats::variance(d.ys()).expect("dataset has at least 3 points");
    let (beta1, beta0, r_squared) = match stats::linregress(d) {
        Ok(fit) => (fit.beta1, fit.beta0, fit.r_squared),
        Err(_) => (f64::NAN, f64::NAN, f64::NAN),
    };

    let measured = MeasuredStats {
        n: d.len(),
        mean_x,
        var_x,
        mean_y,
        var_y,
        beta1,
        beta0,
        r_squared,
    };

    let mut checks = Vec::with_capacity(6);
    let mut push = |name: &'static str, target: f64, value: f64| {
        let residual = (value - target).abs();
        checks.push(ConstraintCheck {
            name,
            target,
            measured: value,
            residual,
            // NaN residuals fail this comparison, as they must.
            passed: residual <= tolerance,
        });
    };
    push("n", c.n() as f64, d.len() as f64);
    push("mean_x", c.mean_x(), mean_x);
    push("var_x", c.var_x(), var_x);
    push("mean_y", c.mean_y(), mean_y);
    push("var_y", c.var_y(), var_y);
    push("beta1", c.beta1(), beta1);

    let passed = checks.iter().all(|c| c.passed);
    let moments = moment_report(d).ok();
    VerificationReport {
        measured,
        checks,
        passed,
        tolerance,
        moments,
    }
}

/// Skewness and kurtosis of the standardized coordinates.
pub fn moment_report(d: &DatasetPair) -> Result<MomentReport> {
    Ok(MomentReport {
        skew_x: stats::zscore_moment(d.xs(), 3)?,
        kurt_x: stats::zscore_moment(d.xs(), 4)?,
        skew_y: stats::zscore_moment(d.ys(), 3)?,
        kurt_y: stats::zscore_moment(d.ys(), 4)?,
    })
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<10} {:>14} {:>14} {:>12}  status",
            "constraint", "target", "measured", "|residual|"
        )?;
        for check in &self.checks {
            writeln!(
                f,
                "{:<10} {:>14.6} {:>14.6} {:>12.3e}  {}",
                check.name,
                check.target,
                check.measured,
                check.residual,
                if check.passed { "ok" } else { "FAIL" }
            )?;
        }
        writeln!(
            f,
            "derived    beta0 = {:.6}   r_squared = {:.6}",
            self.measured.beta0, self.measured.r_squared
        )?;
        if let Some(m) = &self.moments {
            writeln!(
                f,
                "moments    skew_x = {:.3}  kurt_x = {:.3}  skew_y = {:.3}  kurt_y = {:.3}",
                m.skew_x, m.kurt_x, m.skew_y, m.kurt_y
            )?;
        }
        write!(
            f,
            "overall    {} (tolerance {:.1e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.tolerance
        )
    }
}
