//! Shape functions: initial y vectors patterned near the target regression
//! line, prior to constraint adjustment.
//!
//! Most shapes only approximate the y constraints and rely on a later
//! adjustment step. The quadratic family is special: its three parameters
//! (`q0`, `alpha`, `x*`) are solved so the emitted dataset satisfies all
//! six constraints with no adjustment at all.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::constraints::ConstraintSet;
use crate::data::DatasetPair;
use crate::error::{Error, Result};
use crate::stats::csum;

/// Target regression line `Y(x) = beta0 + beta1·x` for a constraint set.
pub fn eval_line(c: &ConstraintSet, x: f64) -> f64 {
    c.beta0() + c.beta1() * x
}

/// Which of the two quadratic solutions to take: extremum below or above
/// the x mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadBranch {
    Left,
    Right,
}

/// Parameters of the quadratic shape `y = q0 + alpha·(x − x*)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticParams {
    /// Coefficient of the quadratic term.
    pub alpha: f64,
    /// y value at the extremum.
    pub q0: f64,
    /// x position of the extremum.
    pub xstar: f64,
}

/// Declarative shape choice, including any noise parameters and seed.
///
/// Indices are 1-based, matching the adjustment plans.
#[derive(Debug, Clone, PartialEq)]
pub enum ShapeSpec {
    /// Every point exactly on the target line.
    OnLine,
    /// Line plus seeded Gaussian noise.
    LinearNoise { noise_sd: f64, seed: u64 },
    /// Parabola whose three parameters absorb the three y constraints.
    Quadratic { branch: QuadBranch },
    /// A different line plus a single forced outlier point.
    LinearOutlier {
        beta0p: f64,
        beta1p: f64,
        outlier_index: usize,
        outlier_y: f64,
    },
    /// Noise around the line at the grouped x of a two-valued grid; the
    /// lone outlier is pinned to the line.
    BimodalNoise { noise_sd: f64, seed: u64 },
    /// Line plus a scaled quartic with four real roots, optionally jittered.
    Quartic {
        f0: f64,
        roots: [f64; 4],
        jitter_sd: f64,
        seed: u64,
    },
}

/// Result of evaluating a shape: the seeded y vector plus any advisory
/// warnings (never errors).
#[derive(Debug, Clone)]
pub struct ShapeEval {
    pub ys: Vec<f64>,
    pub warnings: Vec<String>,
}

impl ShapeSpec {
    /// Replaces the seed on seeded shapes; no-op otherwise.
    pub fn with_seed(&self, seed: u64) -> ShapeSpec {
        match *self {
            ShapeSpec::LinearNoise { noise_sd, .. } => ShapeSpec::LinearNoise { noise_sd, seed },
            ShapeSpec::BimodalNoise { noise_sd, .. } => ShapeSpec::BimodalNoise { noise_sd, seed },
            ShapeSpec::Quartic {
                f0,
                roots,
                jitter_sd,
                ..
            } => ShapeSpec::Quartic {
                f0,
                roots,
                jitter_sd,
                seed,
            },
            ref other => other.clone(),
        }
    }

    /// True when the output actually depends on the seed (zero-width noise
    /// does not).
    pub fn is_seeded(&self) -> bool {
        match self {
            ShapeSpec::LinearNoise { noise_sd, .. } | ShapeSpec::BimodalNoise { noise_sd, .. } => {
                *noise_sd > 0.0
            }
            ShapeSpec::Quartic { jitter_sd, .. } => *jitter_sd > 0.0,
            _ => false,
        }
    }

    /// Evaluates the shape on an x grid.
    pub fn evaluate(&self, xs: &[f64], c: &ConstraintSet) -> Result<ShapeEval> {
        let mut warnings = Vec::new();
        let ys = match *self {
            ShapeSpec::OnLine => xs.iter().map(|&x| eval_line(c, x)).collect(),
            ShapeSpec::LinearNoise { noise_sd, seed } => {
                shape_linear_noise(xs, c, noise_sd, seed)?
            }
            ShapeSpec::Quadratic { branch } => {
                let params = solve_quadratic_shape(xs, c, branch)?;
                shape_quadratic(xs, &params)
            }
            ShapeSpec::LinearOutlier {
                beta0p,
                beta1p,
                outlier_index,
                outlier_y,
            } => {
                let product = (beta0p - c.beta0()) * (beta1p - c.beta1());
                if product >= 0.0 {
                    warnings.push(format!(
                        "outlier shape: (beta0' - beta0)(beta1' - beta1) = {product:.4} >= 0; \
                         a stiffer slope usually wants a lower intercept"
                    ));
                }
                shape_linear_outlier(xs, beta0p, beta1p, outlier_index, outlier_y)?
            }
            ShapeSpec::BimodalNoise { noise_sd, seed } => {
                shape_bimodal_noise(xs, c, noise_sd, seed)?
            }
            ShapeSpec::Quartic {
                f0,
                roots,
                jitter_sd,
                seed,
            } => shape_quartic(xs, c, f0, &roots, jitter_sd, seed)?,
        };
        Ok(ShapeEval { ys, warnings })
    }
}

/// Seeded Gaussian draws (ziggurat variates from a ChaCha stream).
fn gaussian_noise(count: usize, sd: f64, seed: u64) -> Result<Vec<f64>> {
    if !(sd.is_finite() && sd >= 0.0) {
        return Err(Error::InvalidParameter {
            what: "noise_sd",
            why: format!("must be finite and >= 0, got {sd}"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sd).expect("validated standard deviation");
    Ok((0..count).map(|_| normal.sample(&mut rng)).collect())
}

/// `y_k = Y(x_k) + η_k` with `η ~ N(0, noise_sd²)` from a deterministic
/// seeded generator.
pub fn shape_linear_noise(xs: &[f64], c: &ConstraintSet, noise_sd: f64, seed: u64) -> Result<Vec<f64>> {
    let noise = gaussian_noise(xs.len(), noise_sd, seed)?;
    Ok(xs
        .iter()
        .zip(noise)
        .map(|(&x, eta)| eval_line(c, x) + eta)
        .collect())
}

struct QuadContext<'a> {
    xs: &'a [f64],
    c: &'a ConstraintSet,
    mean_x: f64,
    sxx: f64,
}

impl<'a> QuadContext<'a> {
    fn new(xs: &'a [f64], c: &'a ConstraintSet) -> Self {
        let mean_x = csum(xs.iter().copied()) / xs.len() as f64;
        let sxx = csum(xs.iter().map(|x| (x - mean_x) * (x - mean_x)));
        Self { xs, c, mean_x, sxx }
    }

    /// Covariance-constraint denominator `Σ (x_k − x̄)(x_k − x*)²`.
    fn covariance_denominator(&self, xstar: f64) -> f64 {
        csum(
            self.xs
                .iter()
                .map(|&x| (x - self.mean_x) * (x - xstar) * (x - xstar)),
        )
    }

    fn params_with_alpha(&self, alpha: f64, xstar: f64) -> QuadraticParams {
        let n = self.xs.len() as f64;
        let s2 = csum(self.xs.iter().map(|&x| (x - xstar) * (x - xstar)));
        let q0 = self.c.mean_y() - alpha / n * s2;
        QuadraticParams { alpha, q0, xstar }
    }

    fn params_at(&self, xstar: f64) -> QuadraticParams {
        let alpha = self.c.beta1() * self.sxx / self.covariance_denominator(xstar);
        self.params_with_alpha(alpha, xstar)
    }

    /// Sample variance the quadratic shape would produce, minus the target.
    ///
    /// Infinite or NaN near the pole of `alpha(x*)`.
    fn variance_gap(&self, xstar: f64) -> f64 {
        let p = self.params_at(xstar);
        let n = self.xs.len() as f64;
        let s4 = csum(self.xs.iter().map(|&x| (x - xstar).powi(4)));
        let var_star = p.alpha * p.alpha / (n - 1.0) * s4
            - n * (p.q0 - self.c.mean_y()) * (p.q0 - self.c.mean_y()) / (n - 1.0);
        var_star - self.c.var_y()
    }
}

/// Quadratic parameters for a *given* extremum position.
///
/// `alpha` comes from the covariance constraint
/// `alpha = beta1·S_xx / Σ(x_k − x̄)(x_k − x*)²` and `q0` from the mean
/// constraint. The variance constraint is generally *not* satisfied unless
/// `x*` is a root of the variance gap; use [`solve_quadratic_shape`] for
/// that.
pub fn quadratic_params_at(xs: &[f64], c: &ConstraintSet, xstar: f64) -> Result<QuadraticParams> {
    let ctx = QuadContext::new(xs, c);
    let denom = ctx.covariance_denominator(xstar);
    if denom == 0.0 {
        return Err(Error::InvalidParameter {
            what: "xstar",
            why: "covariance denominator vanishes at this extremum position".into(),
        });
    }
    Ok(ctx.params_at(xstar))
}

/// Difference between the variance the quadratic shape would produce at
/// `x*` and the target variance. Roots of this function are valid extremum
/// positions. May be infinite near the denominator pole.
pub fn quadratic_variance_gap(xs: &[f64], c: &ConstraintSet, xstar: f64) -> f64 {
    QuadContext::new(xs, c).variance_gap(xstar)
}

const SCAN_POINTS: usize = 200;
const GAP_TOLERANCE: f64 = 1e-10;

/// All extremum positions at which the quadratic shape meets the variance
/// target, sorted ascending.
///
/// Scans `[min(x) − 2·range, max(x) + 2·range]` for sign changes of the
/// variance gap, then refines each bracket by bisection followed by secant
/// polishing. For `beta1 == 0` the covariance constraint instead forces
/// `Σ(x_k − x̄)(x_k − x*)² = 0`, which is linear in `x*` and has exactly one
/// solution.
pub fn solve_quadratic_roots(xs: &[f64], c: &ConstraintSet) -> Result<Vec<f64>> {
    let mut distinct = xs.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InvalidParameter {
            what: "x grid",
            why: "quadratic shape needs at least 3 distinct x values".into(),
        });
    }

    let ctx = QuadContext::new(xs, c);

    if c.beta1() == 0.0 {
        // Denominator is linear in x*: Σδx·x² − 2·x*·S_xx.
        let sdx_x2 = csum(xs.iter().map(|&x| (x - ctx.mean_x) * x * x));
        return Ok(vec![sdx_x2 / (2.0 * ctx.sxx)]);
    }

    let lo = distinct[0];
    let hi = distinct[distinct.len() - 1];
    let range = hi - lo;
    let scan_lo = lo - 2.0 * range;
    let scan_hi = hi + 2.0 * range;
    let step = (scan_hi - scan_lo) / (SCAN_POINTS - 1) as f64;

    let mut roots: Vec<f64> = Vec::new();
    let mut prev_x = scan_lo;
    let mut prev_f = ctx.variance_gap(prev_x);
    for i in 1..SCAN_POINTS {
        let x = scan_lo + step * i as f64;
        let f = ctx.variance_gap(x);
        if prev_f.is_finite() && f.is_finite() && (prev_f == 0.0 || prev_f.signum() != f.signum())
        {
            if let Some(root) = refine_root(&ctx, prev_x, prev_f, x, f) {
                if !roots.iter().any(|r| (r - root).abs() < 1e-6 * (1.0 + root.abs())) {
                    roots.push(root);
                }
            }
        }
        prev_x = x;
        prev_f = f;
    }
    roots.sort_by(f64::total_cmp);
    if roots.is_empty() {
        return Err(Error::NoQuadraticShape);
    }
    Ok(roots)
}

/// Bisection to 1e-12 in x*, then secant polishing; rejects pole
/// crossings where the gap never becomes small.
fn refine_root(ctx: &QuadContext, mut lo: f64, mut f_lo: f64, mut hi: f64, f_hi: f64) -> Option<f64> {
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_hi == 0.0 {
        return Some(hi);
    }
    // The iteration cap guards grids whose magnitude puts 1e-12 below one
    // ULP of the bracket endpoints.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < 1e-12 {
            break;
        }
        let f_mid = ctx.variance_gap(mid);
        if !f_mid.is_finite() {
            return None;
        }
        if f_mid == 0.0 {
            return Some(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let mut x0 = lo;
    let mut x1 = hi;
    let mut f0 = ctx.variance_gap(x0);
    let mut f1 = ctx.variance_gap(x1);
    for _ in 0..8 {
        if f1 == f0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        if !x2.is_finite() {
            break;
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = ctx.variance_gap(x1);
        if f1.abs() < 1e-14 {
            break;
        }
    }
    let best = if f1.abs() <= f0.abs() { (x1, f1) } else { (x0, f0) };
    (best.1.abs() < GAP_TOLERANCE).then_some(best.0)
}

/// Solves the three quadratic parameters so that the emitted dataset
/// satisfies all three y constraints exactly.
///
/// `Left` takes the extremum below the x mean, `Right` the one above. For
/// `beta1 == 0` there is a single extremum position and the branch instead
/// selects the sign of `alpha` (`Left` opens upward).
pub fn solve_quadratic_shape(
    xs: &[f64],
    c: &ConstraintSet,
    branch: QuadBranch,
) -> Result<QuadraticParams> {
    let roots = solve_quadratic_roots(xs, c)?;
    let ctx = QuadContext::new(xs, c);

    if c.beta1() == 0.0 {
        let xstar = roots[0];
        let n = xs.len() as f64;
        let s2 = csum(xs.iter().map(|&x| (x - xstar) * (x - xstar)));
        let s4 = csum(xs.iter().map(|&x| (x - xstar).powi(4)));
        let spread = (s4 - s2 * s2 / n) / (n - 1.0);
        if spread <= 0.0 {
            return Err(Error::NoQuadraticShape);
        }
        let magnitude = (c.var_y() / spread).sqrt();
        let alpha = match branch {
            QuadBranch::Left => magnitude,
            QuadBranch::Right => -magnitude,
        };
        return Ok(ctx.params_with_alpha(alpha, xstar));
    }

    let xstar = match branch {
        QuadBranch::Left => roots.iter().copied().rfind(|r| *r < ctx.mean_x),
        QuadBranch::Right => roots.iter().copied().find(|r| *r >= ctx.mean_x),
    }
    .ok_or(Error::NoQuadraticShape)?;
    Ok(ctx.params_at(xstar))
}

/// `y_k = q0 + alpha·(x_k − x*)²`.
pub fn shape_quadratic(xs: &[f64], params: &QuadraticParams) -> Vec<f64> {
    xs.iter()
        .map(|&x| params.q0 + params.alpha * (x - params.xstar) * (x - params.xstar))
        .collect()
}

/// Reflects every y across the target line: `y' = 2·Y(x) − y`.
///
/// Preserves all six constraints whenever the input satisfied them, and is
/// an involution.
pub fn reflect_across_line(d: &DatasetPair, c: &ConstraintSet) -> DatasetPair {
    let ys: Vec<f64> = d
        .points()
        .map(|(x, y)| 2.0 * eval_line(c, x) - y)
        .collect();
    d.with_ys(ys).expect("reflection preserves validity")
}

/// Straight line `beta0' + beta1'·x` with the point at `outlier_index`
/// (1-based) replaced by `outlier_y`.
pub fn shape_linear_outlier(
    xs: &[f64],
    beta0p: f64,
    beta1p: f64,
    outlier_index: usize,
    outlier_y: f64,
) -> Result<Vec<f64>> {
    if outlier_index == 0 || outlier_index > xs.len() {
        return Err(Error::IndexOutOfRange {
            index: outlier_index,
            n: xs.len(),
        });
    }
    Ok(xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if i + 1 == outlier_index {
                outlier_y
            } else {
                beta0p + beta1p * x
            }
        })
        .collect())
}

/// Noise around `Y(x)` for the grouped points of a two-valued grid; the
/// single point at the other x value is pinned to the line exactly (the
/// covariance constraint forces it there anyway).
pub fn shape_bimodal_noise(
    xs: &[f64],
    c: &ConstraintSet,
    noise_sd: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut distinct = xs.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() != 2 {
        return Err(Error::NotBimodal);
    }
    let count_first = xs.iter().filter(|&&x| x == distinct[0]).count();
    let lone = if count_first == 1 {
        distinct[0]
    } else if xs.len() - count_first == 1 {
        distinct[1]
    } else {
        return Err(Error::NoLoneOutlier);
    };
    let noise = gaussian_noise(xs.len() - 1, noise_sd, seed)?;
    let mut draws = noise.into_iter();
    Ok(xs
        .iter()
        .map(|&x| {
            if x == lone {
                eval_line(c, x)
            } else {
                eval_line(c, x) + draws.next().expect("one draw per grouped point")
            }
        })
        .collect())
}

/// `y_k = Y(x_k) + f0·Π(x_k − h_i)` over four distinct roots, then optional
/// Gaussian jitter.
pub fn shape_quartic(
    xs: &[f64],
    c: &ConstraintSet,
    f0: f64,
    roots: &[f64; 4],
    jitter_sd: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    if !f0.is_finite() {
        return Err(Error::InvalidParameter {
            what: "f0",
            why: "must be finite".into(),
        });
    }
    for (i, a) in roots.iter().enumerate() {
        if !a.is_finite() {
            return Err(Error::InvalidParameter {
                what: "quartic roots",
                why: "must be finite".into(),
            });
        }
        for b in &roots[i + 1..] {
            if a == b {
                return Err(Error::InvalidParameter {
                    what: "quartic roots",
                    why: format!("roots must be distinct, {a} repeats"),
                });
            }
        }
    }
    let jitter = if jitter_sd == 0.0 {
        vec![0.0; xs.len()]
    } else {
        gaussian_noise(xs.len(), jitter_sd, seed)?
    };
    Ok(xs
        .iter()
        .zip(jitter)
        .map(|(&x, eta)| {
            let poly: f64 = roots.iter().map(|h| x - h).product();
            eval_line(c, x) + f0 * poly + eta
        })
        .collect())
}
