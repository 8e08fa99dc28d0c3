use serde::Serialize;

use crate::error::{Error, Result};

/// The six target statistics a generated dataset must satisfy:
/// sample size, mean and variance of x, mean and variance of y, and slope.
///
/// The intercept is always derived (`beta0 = mean_y − beta1 · mean_x`) and
/// never stored. Construction rejects constraint sets whose implied
/// coefficient of determination would exceed 1, i.e. `var_y < beta1²·var_x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintSet {
    n: usize,
    mean_x: f64,
    var_x: f64,
    mean_y: f64,
    var_y: f64,
    beta1: f64,
}

impl ConstraintSet {
    pub fn new(
        n: usize,
        mean_x: f64,
        var_x: f64,
        mean_y: f64,
        var_y: f64,
        beta1: f64,
    ) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter {
                what: "n",
                why: format!("need at least 3 points, got {n}"),
            });
        }
        for (name, v) in [
            ("mean_x", mean_x),
            ("var_x", var_x),
            ("mean_y", mean_y),
            ("var_y", var_y),
            ("beta1", beta1),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    what: "constraint",
                    why: format!("{name} is not finite"),
                });
            }
        }
        if var_x <= 0.0 {
            return Err(Error::InvalidParameter {
                what: "var_x",
                why: format!("must be positive, got {var_x}"),
            });
        }
        if var_y <= 0.0 {
            return Err(Error::InvalidParameter {
                what: "var_y",
                why: format!("must be positive, got {var_y}"),
            });
        }
        let min_var_y = beta1 * beta1 * var_x;
        if var_y < min_var_y {
            return Err(Error::InfeasibleConstraints { var_y, min_var_y });
        }
        Ok(Self {
            n,
            mean_x,
            var_x,
            mean_y,
            var_y,
            beta1,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mean_x(&self) -> f64 {
        self.mean_x
    }

    pub fn var_x(&self) -> f64 {
        self.var_x
    }

    pub fn mean_y(&self) -> f64 {
        self.mean_y
    }

    pub fn var_y(&self) -> f64 {
        self.var_y
    }

    pub fn beta1(&self) -> f64 {
        self.beta1
    }

    /// Derived intercept `mean_y − beta1 · mean_x`.
    pub fn beta0(&self) -> f64 {
        self.mean_y - self.beta1 * self.mean_x
    }

    /// Coefficient of determination implied by the six constraints,
    /// `beta1² · var_x / var_y`. In `[0, 1]` by the feasibility check.
    pub fn r_squared(&self) -> f64 {
        self.beta1 * self.beta1 * self.var_x / self.var_y
    }
}
