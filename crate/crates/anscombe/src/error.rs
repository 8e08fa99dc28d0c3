use thiserror::Error;

/// Pipeline stage in which an error occurred.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    BuildX,
    Shape,
    Adjust,
    Verify,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Stage::BuildX => "x-generation",
            Stage::Shape => "shape",
            Stage::Adjust => "adjustment",
            Stage::Verify => "verification",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty vector")]
    EmptyVector,

    #[error("degenerate sample: need at least 2 values, got {0}")]
    DegenerateSample(usize),

    #[error("length mismatch: {xs} x-values vs {ys} y-values")]
    LengthMismatch { xs: usize, ys: usize },

    #[error("dataset needs at least 3 points, got {0}")]
    TooFewPoints(usize),

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("vertical data, slope undefined (zero x-variance)")]
    VerticalData,

    #[error("zero variance: z-scores undefined")]
    ZeroVariance,

    #[error("all x identical; no regression possible")]
    ConstantX,

    #[error("invalid {what}: {why}")]
    InvalidParameter { what: &'static str, why: String },

    #[error("infeasible: R\u{b2} would exceed 1 (var_y {var_y} < beta1\u{b2}\u{b7}var_x = {min_var_y})")]
    InfeasibleConstraints { var_y: f64, min_var_y: f64 },

    #[error("infeasible: variance below regression minimum (var_y {var_y} < {min_var_y})")]
    VarianceBelowMinimum { var_y: f64, min_var_y: f64 },

    #[error("no quadratic shape exists for these constraints")]
    NoQuadraticShape,

    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("bimodal shape requires exactly two distinct x values")]
    NotBimodal,

    #[error("bimodal shape requires one x value occurring exactly once")]
    NoLoneOutlier,

    #[error("degenerate triple: selected points share one x value; use the group adjustment")]
    DegenerateTriple,

    #[error(
        "infeasible: fixed points carry too much variance/covariance (discriminant {discriminant:.6e})"
    )]
    InfeasibleTriple { discriminant: f64 },

    #[error("infeasible pair adjustment (2\u{b7}c2 \u{2212} c1\u{b2} = {0:.6e} < 0)")]
    InfeasiblePair(f64),

    #[error(
        "off-group points violate the covariance constraint (required {required:.6}, found {found:.6})"
    )]
    InconsistentFixedCovariance { required: f64, found: f64 },

    #[error(
        "verification failed: constraint {constraint} residual {residual:.3e} exceeds tolerance {tolerance:.3e}"
    )]
    VerificationFailed {
        constraint: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("{stage} stage: {source}")]
    Pipeline {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_stage(self, stage: Stage) -> Error {
        Error::Pipeline {
            stage,
            source: Box::new(self),
        }
    }

    /// True for failures that can disappear under a different noise seed.
    ///
    /// Deterministic failures (bad parameters, infeasible constraint sets)
    /// return false; retrying those with new seeds is pointless.
    pub fn is_seed_dependent(&self) -> bool {
        match self {
            Error::InfeasibleTriple { .. } | Error::InfeasiblePair(_) => true,
            Error::Pipeline { source, .. } => source.is_seed_dependent(),
            _ => false,
        }
    }

    /// True when the failure declares that no solution exists for the given
    /// constraints/shape/seed combination, as opposed to invalid input.
    pub fn is_infeasibility(&self) -> bool {
        match self {
            Error::InfeasibleConstraints { .. }
            | Error::VarianceBelowMinimum { .. }
            | Error::NoQuadraticShape
            | Error::InfeasibleTriple { .. }
            | Error::InfeasiblePair(_)
            | Error::InconsistentFixedCovariance { .. } => true,
            Error::Pipeline { source, .. } => source.is_infeasibility(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
