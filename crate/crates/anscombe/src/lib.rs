//! Inverse sampling of degenerate paired datasets.
//!
//! Given six regression constraints — sample size, mean and variance of x,
//! mean and variance of y, and slope — this crate constructs datasets that
//! satisfy all of them exactly while looking nothing alike: noisy lines,
//! parabolas, outlier patterns, two-valued grids, quartic waves. The
//! classic Anscombe quartet is embedded as a fixture and every construction
//! it uses is generalized.
//!
//! The pipeline has four steps:
//!
//! 1. build an x vector hitting the x constraints exactly ([`xgen`]),
//! 2. seed y values from a shape function near the target line ([`shapes`]),
//! 3. re-solve three y values (or two, on rank-deficient grids) so the y
//!    constraints close exactly ([`adjust`]),
//! 4. recompute everything from the raw data and check ([`mod@verify`]).
//!
//! ```
//! use anscombe::{generate, quartet, Branch, Plan, ShapeSpec, XFamily, XSource};
//!
//! let constraints = quartet::constraints();
//! let shape = ShapeSpec::LinearNoise { noise_sd: 1.17, seed: 7 };
//! let out = generate(
//!     &XSource::Grid(XFamily::Uniform),
//!     &shape,
//!     &constraints,
//!     &Plan::Auto(Branch::Plus),
//!     1e-9,
//! )
//! .unwrap();
//! assert!(out.report.passed);
//! ```

pub mod adjust;
pub mod constraints;
pub mod data;
pub mod error;
pub mod quartet;
pub mod shapes;
pub mod stats;
pub mod verify;
pub mod xgen;

pub use adjust::{
    adjust_group, adjust_triple, affine_reduction, generate, mid_index, solve_three_point_minimal,
    AdjustmentPlan, AffineReduction, Branch, Generated, Plan,
};
pub use constraints::ConstraintSet;
pub use data::DatasetPair;
pub use error::{Error, Result, Stage};
pub use shapes::{
    eval_line, quadratic_params_at, quadratic_variance_gap, reflect_across_line,
    shape_bimodal_noise, shape_linear_noise, shape_linear_outlier, shape_quadratic, shape_quartic,
    solve_quadratic_roots, solve_quadratic_shape, QuadBranch, QuadraticParams, ShapeEval,
    ShapeSpec,
};
pub use stats::{
    covariance, linregress, mean, variance, zscore_moment, MomentReport, RegressionFit,
};
pub use verify::{moment_report, verify, ConstraintCheck, MeasuredStats, VerificationReport};
pub use xgen::{bimodal_x, custom_x, uniform_x, BimodalBranch, XFamily, XGridSpec, XSource};
