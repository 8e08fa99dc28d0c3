//! Exact enforcement of the three y constraints (mean, variance, slope) by
//! re-solving a small set of y values, plus the end-to-end generation
//! pipeline.
//!
//! With the x vector fixed, the y constraints read
//!
//! ```text
//! (1)  Σ δy_k           = 0                    δy_k = y_k − ȳ_target
//! (2)  Σ δy_k²          = (n−1)·σy²_target
//! (3)  Σ δx_k·δy_k      = S_xx·β1_target       δx_k = x_k − x̄_measured
//! ```
//!
//! Three selected y values carry the slack. The two with extreme x among
//! the selection are expressed as affine functions of the third (the
//! "pivot") from the linear constraints (1) and (3); substituting into (2)
//! leaves a quadratic in the pivot whose ± root is the degeneracy branch.
//! All fixed-point sums exclude every selected index.
//!
//! When the selected points cannot span two x values (the two-valued grid
//! of the bimodal family), the covariance row is rank-deficient: it is
//! absorbed by pinning the lone off-group point, and a closed-form
//! two-point solve handles the remaining mean and variance constraints.
//!
//! Closure is checked with absolute tolerances, so extremely large targets
//! run into double-precision limits: one ULP of `S_yy = (n−1)·σy²` bounds
//! how tightly the variance can close. Statistics up to a few hundred in
//! magnitude at `n` up to a few hundred stay comfortably inside the
//! default 1e-9; beyond that, verification fails loudly rather than
//! passing on luck.

use crate::constraints::ConstraintSet;
use crate::data::DatasetPair;
use crate::error::{Error, Result, Stage};
use crate::shapes::ShapeSpec;
use crate::stats::csum;
use crate::verify::{verify, VerificationReport};
use crate::xgen::{custom_x, uniform_x, XGridSpec, XSource};

/// Sign of the square root in the pivot solution; each sign yields a valid
/// dataset whenever the discriminant is positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

/// Which three points to re-solve (1-based indices) and which degeneracy
/// branch to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdjustmentPlan {
    indices: [usize; 3],
    branch: Branch,
}

impl AdjustmentPlan {
    pub fn new(p1: usize, p2: usize, p3: usize, branch: Branch) -> Result<Self> {
        if p1 == 0 || p2 == 0 || p3 == 0 {
            return Err(Error::InvalidParameter {
                what: "plan indices",
                why: "indices are 1-based; 0 is out of range".into(),
            });
        }
        if p1 == p2 || p1 == p3 || p2 == p3 {
            return Err(Error::InvalidParameter {
                what: "plan indices",
                why: format!("indices must be distinct, got {p1}, {p2}, {p3}"),
            });
        }
        Ok(Self {
            indices: [p1, p2, p3],
            branch,
        })
    }

    /// Default selection: the points with minimal and maximal x plus the
    /// mid-point index (or a preferred interior index, e.g. an outlier).
    pub fn extremes_and_mid(xs: &[f64], preferred: Option<usize>, branch: Branch) -> Self {
        let argmin = xs
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i + 1)
            .expect("non-empty grid");
        let argmax = xs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i + 1)
            .expect("non-empty grid");
        let mut pivot = preferred.unwrap_or_else(|| mid_index(xs.len()));
        if pivot == argmin || pivot == argmax || pivot > xs.len() {
            pivot = (1..=xs.len())
                .find(|i| *i != argmin && *i != argmax)
                .expect("grids have at least 3 points");
        }
        Self {
            indices: [argmin, pivot, argmax],
            branch,
        }
    }

    pub fn indices(&self) -> [usize; 3] {
        self.indices
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    pub fn with_branch(&self, branch: Branch) -> Self {
        Self {
            indices: self.indices,
            branch,
        }
    }
}

/// Mid-point index, 1-based: `floor((n + 1) / 2)`.
pub fn mid_index(n: usize) -> usize {
    n.div_ceil(2)
}

/// The affine reduction of the three-unknown constraint system: the two
/// extreme selected values as affine functions of the pivot, plus the
/// coefficients of the quadratic the pivot must solve.
#[derive(Debug, Clone, Copy)]
pub struct AffineReduction {
    /// Selected indices ordered by x value (1-based).
    pub idx_lo: usize,
    pub idx_pivot: usize,
    pub idx_hi: usize,
    /// `δy_lo = a_lo + b_lo·δy_pivot`
    pub a_lo: f64,
    pub b_lo: f64,
    /// `δy_hi = a_hi + b_hi·δy_pivot`
    pub a_hi: f64,
    pub b_hi: f64,
    /// Offset of the pivot solution `δy_pivot = −pivot_offset ± √disc`.
    pub pivot_offset: f64,
    /// Scaled squared contribution of the affine constants.
    pub fixed_norm: f64,
    /// Scaled variance budget left for the three selected points.
    pub variance_budget: f64,
}

impl AffineReduction {
    pub fn discriminant(&self) -> f64 {
        self.variance_budget + self.pivot_offset * self.pivot_offset - self.fixed_norm
    }

    /// Pivot deviations for (Plus, Minus), if the discriminant allows them.
    pub fn pivot_roots(&self) -> Option<(f64, f64)> {
        let disc = self.discriminant();
        if disc < 0.0 {
            return None;
        }
        let sqrt = disc.sqrt();
        Some((-self.pivot_offset + sqrt, -self.pivot_offset - sqrt))
    }
}

fn validate_indices(indices: [usize; 3], n: usize) -> Result<()> {
    for idx in indices {
        if idx == 0 || idx > n {
            return Err(Error::IndexOutOfRange { index: idx, n });
        }
    }
    Ok(())
}

/// Computes the affine reduction for the given selected indices.
///
/// The two selected points with extreme x become affine in the pivot (the
/// selected point with middle x); the 2×2 system from the mean and
/// covariance constraints is solved exactly rather than assuming the two
/// affine constants coincide — they generally do not.
pub fn affine_reduction(
    d: &DatasetPair,
    c: &ConstraintSet,
    indices: [usize; 3],
) -> Result<AffineReduction> {
    let n = d.len();
    validate_indices(indices, n)?;
    let xs = d.xs();
    let ys = d.ys();

    // Order the selection by x; the outer pair must span two distinct x.
    let mut sel = indices;
    sel.sort_by(|a, b| xs[a - 1].total_cmp(&xs[b - 1]));
    let [idx_lo, idx_pivot, idx_hi] = sel;
    if xs[idx_lo - 1] == xs[idx_hi - 1] {
        return Err(Error::DegenerateTriple);
    }

    let mean_x = csum(xs.iter().copied()) / n as f64;
    let sxx = csum(xs.iter().map(|x| (x - mean_x) * (x - mean_x)));
    let dx = |idx: usize| xs[idx - 1] - mean_x;
    let dy = |idx: usize| ys[idx - 1] - c.mean_y();
    let selected = |k: usize| k + 1 == idx_lo || k + 1 == idx_pivot || k + 1 == idx_hi;

    // Fixed-point sums exclude all three selected indices.
    let fixed_dy = csum((0..n).filter(|&k| !selected(k)).map(|k| dy(k + 1)));
    let fixed_dy2 = csum(
        (0..n)
            .filter(|&k| !selected(k))
            .map(|k| dy(k + 1) * dy(k + 1)),
    );
    let fixed_dxdy = csum(
        (0..n)
            .filter(|&k| !selected(k))
            .map(|k| dx(k + 1) * dy(k + 1)),
    );

    // Right-hand sides restricted to the three unknowns.
    let r1 = -fixed_dy;
    let r2 = (n as f64 - 1.0) * c.var_y() - fixed_dy2;
    let r3 = sxx * c.beta1() - fixed_dxdy;

    let det = dx(idx_hi) - dx(idx_lo);
    let a_lo = (r1 * dx(idx_hi) - r3) / det;
    let b_lo = (dx(idx_pivot) - dx(idx_hi)) / det;
    let a_hi = (r3 - r1 * dx(idx_lo)) / det;
    let b_hi = (dx(idx_lo) - dx(idx_pivot)) / det;

    let scale = 1.0 + b_lo * b_lo + b_hi * b_hi;
    Ok(AffineReduction {
        idx_lo,
        idx_pivot,
        idx_hi,
        a_lo,
        b_lo,
        a_hi,
        b_hi,
        pivot_offset: (a_lo * b_lo + a_hi * b_hi) / scale,
        fixed_norm: (a_lo * a_lo + a_hi * a_hi) / scale,
        variance_budget: r2 / scale,
    })
}

/// Replaces the three planned y values so the whole dataset satisfies the
/// three y constraints exactly. All other coordinates are untouched.
pub fn adjust_triple(
    d: &DatasetPair,
    c: &ConstraintSet,
    plan: &AdjustmentPlan,
) -> Result<DatasetPair> {
    let red = affine_reduction(d, c, plan.indices())?;
    let (plus, minus) = red.pivot_roots().ok_or(Error::InfeasibleTriple {
        discriminant: red.discriminant(),
    })?;
    let pivot_dy = match plan.branch() {
        Branch::Plus => plus,
        Branch::Minus => minus,
    };

    let mut ys = d.ys().to_vec();
    ys[red.idx_lo - 1] = c.mean_y() + red.a_lo + red.b_lo * pivot_dy;
    ys[red.idx_pivot - 1] = c.mean_y() + pivot_dy;
    ys[red.idx_hi - 1] = c.mean_y() + red.a_hi + red.b_hi * pivot_dy;
    d.with_ys(ys)
}

/// Rank-deficient adjustment for grids where the free points share one x.
///
/// The covariance constraint cannot be met by points at a single x, so it
/// is absorbed by the off-group structure: a single off-group point has its
/// y pinned to the uniquely required value; several off-group points must
/// already satisfy the required aggregate and are left untouched. The mean
/// and variance constraints are then closed in exact form over the first
/// two free indices.
pub fn adjust_group(d: &DatasetPair, c: &ConstraintSet, free_indices: &[usize]) -> Result<DatasetPair> {
    let n = d.len();
    if free_indices.len() < 2 {
        return Err(Error::InvalidParameter {
            what: "free indices",
            why: format!("need at least 2, got {}", free_indices.len()),
        });
    }
    for &idx in free_indices {
        if idx == 0 || idx > n {
            return Err(Error::IndexOutOfRange { index: idx, n });
        }
    }
    let mut sorted = free_indices.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != free_indices.len() {
        return Err(Error::InvalidParameter {
            what: "free indices",
            why: "indices must be distinct".into(),
        });
    }

    let xs = d.xs();
    let shared_x = xs[free_indices[0] - 1];
    if free_indices.iter().any(|&i| xs[i - 1] != shared_x) {
        return Err(Error::InvalidParameter {
            what: "free indices",
            why: "all free indices must share one x value".into(),
        });
    }

    let mean_x = csum(xs.iter().copied()) / n as f64;
    let sxx = csum(xs.iter().map(|x| (x - mean_x) * (x - mean_x)));
    let dx_shared = shared_x - mean_x;
    let off: Vec<usize> = (1..=n).filter(|&i| xs[i - 1] != shared_x).collect();

    let mut ys = d.ys().to_vec();
    let required = sxx * c.beta1();
    match off.len() {
        0 => return Err(Error::ConstantX),
        1 => {
            // Covariance row has a single unknown left; pin it.
            let o = off[0];
            let weight = (xs[o - 1] - mean_x) - dx_shared;
            ys[o - 1] = c.mean_y() + required / weight;
        }
        _ => {
            let found = csum(
                off.iter()
                    .map(|&i| ((xs[i - 1] - mean_x) - dx_shared) * (ys[i - 1] - c.mean_y())),
            );
            if (found - required).abs() > 1e-9 * required.abs().max(1.0) {
                return Err(Error::InconsistentFixedCovariance { required, found });
            }
        }
    }

    // Mean + variance close over the first two free points.
    let (p, q) = (free_indices[0], free_indices[1]);
    let other = |k: usize| k + 1 != p && k + 1 != q;
    let sum_dy = csum((0..n).filter(|&k| other(k)).map(|k| ys[k] - c.mean_y()));
    let sum_dy2 = csum(
        (0..n)
            .filter(|&k| other(k))
            .map(|k| (ys[k] - c.mean_y()) * (ys[k] - c.mean_y())),
    );
    let c1 = -sum_dy;
    let c2 = (n as f64 - 1.0) * c.var_y() - sum_dy2;
    let disc = 2.0 * c2 - c1 * c1;
    if disc < 0.0 {
        return Err(Error::InfeasiblePair(disc));
    }
    let r = disc.sqrt();
    ys[p - 1] = c.mean_y() + (c1 + r) / 2.0;
    ys[q - 1] = c.mean_y() + (c1 - r) / 2.0;
    d.with_ys(ys)
}

/// Analytic minimal solution for `n == 3` on the uniform grid.
///
/// Returns both degenerate datasets; the second is the reflection of the
/// first across the regression line, and the two coincide exactly when the
/// variance sits at its regression minimum `beta1²·var_x`.
pub fn solve_three_point_minimal(c: &ConstraintSet) -> Result<(DatasetPair, DatasetPair)> {
    if c.n() != 3 {
        return Err(Error::InvalidParameter {
            what: "n",
            why: format!("minimal solution requires n = 3, got {}", c.n()),
        });
    }
    let xs = uniform_x(3, c.mean_x(), c.var_x())?;
    let dx3 = xs[2] - c.mean_x();
    let slope_term = c.beta1() * c.var_x() / dx3;
    let excess = c.var_y() - slope_term * slope_term;
    if excess < 0.0 {
        return Err(Error::VarianceBelowMinimum {
            var_y: c.var_y(),
            min_var_y: slope_term * slope_term,
        });
    }
    let spread = 2.0 / 3.0_f64.sqrt() * excess.sqrt();

    let build = |dy2: f64| {
        let dy1 = -0.5 * dy2 - slope_term;
        let dy3 = -0.5 * dy2 + slope_term;
        DatasetPair::new(
            xs.clone(),
            vec![c.mean_y() + dy1, c.mean_y() + dy2, c.mean_y() + dy3],
        )
    };
    Ok((build(-spread)?, build(spread)?))
}

/// How the pipeline should close the y constraints.
#[derive(Debug, Clone, PartialEq)]
pub enum Plan {
    /// Choose per shape: quadratic shapes need no adjustment, bimodal
    /// grids use the group solve, everything else the default triple with
    /// the given degeneracy branch.
    Auto(Branch),
    /// Skip the adjustment step (the shape must already satisfy the
    /// constraints for verification to pass).
    NoAdjust,
    Triple(AdjustmentPlan),
    /// Group solve over free indices sharing one x value (1-based).
    Group { free_indices: Vec<usize> },
}

/// A verified generation result.
#[derive(Debug, Clone)]
pub struct Generated {
    pub dataset: DatasetPair,
    pub report: VerificationReport,
    pub warnings: Vec<String>,
}

fn resolve_auto_plan(xs: &[f64], shape: &ShapeSpec, branch: Branch) -> Result<Plan> {
    Ok(match shape {
        ShapeSpec::Quadratic { .. } => Plan::NoAdjust,
        ShapeSpec::BimodalNoise { .. } => {
            let mut distinct = xs.to_vec();
            distinct.sort_by(f64::total_cmp);
            distinct.dedup();
            if distinct.len() != 2 {
                return Err(Error::NotBimodal);
            }
            let count_first = xs.iter().filter(|&&x| x == distinct[0]).count();
            let grouped = if count_first == 1 { distinct[1] } else { distinct[0] };
            let free_indices: Vec<usize> = xs
                .iter()
                .enumerate()
                .filter(|(_, &x)| x == grouped)
                .map(|(i, _)| i + 1)
                .take(2)
                .collect();
            Plan::Group { free_indices }
        }
        ShapeSpec::LinearOutlier { outlier_index, .. } => Plan::Triple(
            AdjustmentPlan::extremes_and_mid(xs, Some(*outlier_index), branch),
        ),
        _ => Plan::Triple(AdjustmentPlan::extremes_and_mid(xs, None, branch)),
    })
}

/// Warns when the selected x positions are crowded: nearby selections
/// produce large opposing y adjustments.
pub(crate) fn spread_warning(xs: &[f64], indices: [usize; 3]) -> Option<String> {
    let sel: Vec<f64> = indices.iter().map(|&i| xs[i - 1]).collect();
    let sel_spread = sel.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - sel.iter().copied().fold(f64::INFINITY, f64::min);
    let range = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - xs.iter().copied().fold(f64::INFINITY, f64::min);
    (range > 0.0 && sel_spread < 0.1 * range).then(|| {
        format!(
            "selected x positions span {:.1}% of the x range; expect large y adjustments",
            100.0 * sel_spread / range
        )
    })
}

/// Runs the full pipeline: build x, seed y from the shape, adjust, verify.
///
/// Never returns an unverified dataset: if the final report fails at
/// `tolerance`, the whole call fails with a verification-stage error.
pub fn generate(
    x_source: &XSource,
    shape: &ShapeSpec,
    c: &ConstraintSet,
    plan: &Plan,
    tolerance: f64,
) -> Result<Generated> {
    let xs = match x_source {
        XSource::Grid(family) => XGridSpec::new(c.n(), c.mean_x(), c.var_x(), *family)
            .and_then(|spec| spec.build())
            .map_err(|e| e.at_stage(Stage::BuildX))?,
        XSource::Explicit(values) => {
            let sorted = custom_x(values).map_err(|e| e.at_stage(Stage::BuildX))?;
            if sorted.len() != c.n() {
                return Err(Error::InvalidParameter {
                    what: "x values",
                    why: format!("expected {} values, got {}", c.n(), sorted.len()),
                }
                .at_stage(Stage::BuildX));
            }
            sorted
        }
    };

    let eval = shape.evaluate(&xs, c).map_err(|e| e.at_stage(Stage::Shape))?;
    let mut warnings = eval.warnings;
    let seeded = DatasetPair::new(xs.clone(), eval.ys).map_err(|e| e.at_stage(Stage::Shape))?;

    let resolved = match plan {
        Plan::Auto(branch) => {
            resolve_auto_plan(&xs, shape, *branch).map_err(|e| e.at_stage(Stage::Adjust))?
        }
        other => other.clone(),
    };
    let adjusted = match &resolved {
        Plan::NoAdjust => seeded,
        Plan::Triple(triple) => {
            if let Some(w) = spread_warning(&xs, triple.indices()) {
                warnings.push(w);
            }
            adjust_triple(&seeded, c, triple).map_err(|e| e.at_stage(Stage::Adjust))?
        }
        Plan::Group { free_indices } => {
            adjust_group(&seeded, c, free_indices).map_err(|e| e.at_stage(Stage::Adjust))?
        }
        Plan::Auto(_) => unreachable!("auto plan resolved above"),
    };

    let report = verify(&adjusted, c, tolerance);
    if !report.passed {
        let worst = report.worst_failure().expect("failed report has a failure");
        return Err(Error::VerificationFailed {
            constraint: worst.name.to_string(),
            residual: worst.residual,
            tolerance,
        }
        .at_stage(Stage::Verify));
    }
    Ok(Generated {
        dataset: adjusted,
        report,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quartet;
    use crate::shapes::{eval_line, QuadBranch};
    use crate::xgen::{bimodal_x, BimodalBranch, XFamily};

    fn grid() -> Vec<f64> {
        (4..=14).map(f64::from).collect()
    }

    /// Direct-summation residuals of the three constraint equations,
    /// independent of the solver path.
    fn closure_residuals(d: &DatasetPair, c: &ConstraintSet) -> (f64, f64, f64) {
        let n = d.len() as f64;
        let mx: f64 = d.xs().iter().sum::<f64>() / n;
        let sxx: f64 = d.xs().iter().map(|x| (x - mx) * (x - mx)).sum();
        let r1: f64 = d.ys().iter().map(|y| y - c.mean_y()).sum();
        let r2: f64 = d
            .ys()
            .iter()
            .map(|y| (y - c.mean_y()) * (y - c.mean_y()))
            .sum::<f64>()
            - (n - 1.0) * c.var_y();
        let r3: f64 = d
            .points()
            .map(|(x, y)| (x - mx) * (y - c.mean_y()))
            .sum::<f64>()
            - sxx * c.beta1();
        (r1, r2, r3)
    }

    fn assert_closed(d: &DatasetPair, c: &ConstraintSet, tol: f64) {
        let (r1, r2, r3) = closure_residuals(d, c);
        assert!(r1.abs() < tol, "mean residual {r1}");
        assert!(r2.abs() < tol, "variance residual {r2}");
        assert!(r3.abs() < tol, "covariance residual {r3}");
    }

    #[test]
    fn mid_index_rounds_half_up() {
        assert_eq!(mid_index(11), 6);
        assert_eq!(mid_index(3), 2);
        assert_eq!(mid_index(10), 5);
    }

    #[test]
    fn minimal_solution_matches_published_table() {
        let c = quartet::constraints();
        let c3 = ConstraintSet::new(3, c.mean_x(), c.var_x(), c.mean_y(), c.var_y(), c.beta1())
            .unwrap();
        let (first, second) = solve_three_point_minimal(&c3).unwrap();
        let expect_x = [5.6834, 9.0000, 12.3166];
        let expect_y1 = [6.5187, 6.1460, 9.8353];
        let expect_y2 = [5.1647, 8.8540, 8.4813];
        for k in 0..3 {
            assert!((first.xs()[k] - expect_x[k]).abs() < 1e-4);
            assert!((first.ys()[k] - expect_y1[k]).abs() < 1e-4);
            assert!((second.ys()[k] - expect_y2[k]).abs() < 1e-4);
        }
        assert_closed(&first, &c3, 1e-10);
        assert_closed(&second, &c3, 1e-10);
    }

    #[test]
    fn minimal_solution_branches_reflect() {
        let c3 = ConstraintSet::new(3, 2.0, 5.0, -1.0, 4.0, -0.5).unwrap();
        let (first, second) = solve_three_point_minimal(&c3).unwrap();
        for ((x, y1), (_, y2)) in first.points().zip(second.points()) {
            assert!((y2 - (2.0 * eval_line(&c3, x) - y1)).abs() < 1e-12);
        }
    }

    #[test]
    fn minimal_solution_collapses_at_variance_floor() {
        // var_y exactly beta1²·var_x puts all points on the line.
        let c3 = ConstraintSet::new(3, 9.0, 11.0, 7.5, 2.75, 0.5).unwrap();
        let (first, second) = solve_three_point_minimal(&c3).unwrap();
        for ((x, y1), (_, y2)) in first.points().zip(second.points()) {
            assert_eq!(y1, y2);
            assert!((y1 - eval_line(&c3, x)).abs() < 1e-12);
        }
    }

    #[test]
    fn triple_adjusts_line_seed_in_both_branches() {
        // Points on the line carry variance 2.75 < 4.125, so the
        // adjustment must add spread; both branches succeed and differ.
        let c = quartet::constraints();
        let seed = DatasetPair::new(
            grid(),
            grid().iter().map(|&x| eval_line(&c, x)).collect(),
        )
        .unwrap();
        let plus = adjust_triple(
            &seed,
            &c,
            &AdjustmentPlan::new(1, 6, 11, Branch::Plus).unwrap(),
        )
        .unwrap();
        let minus = adjust_triple(
            &seed,
            &c,
            &AdjustmentPlan::new(1, 6, 11, Branch::Minus).unwrap(),
        )
        .unwrap();
        assert_closed(&plus, &c, 1e-9);
        assert_closed(&minus, &c, 1e-9);
        assert_ne!(plus.ys(), minus.ys());
    }

    #[test]
    fn triple_keeps_existing_solution_on_one_branch() {
        let c = quartet::constraints();
        let params = crate::shapes::solve_quadratic_shape(&grid(), &c, QuadBranch::Right).unwrap();
        let ys = crate::shapes::shape_quadratic(&grid(), &params);
        let solved = DatasetPair::new(grid(), ys).unwrap();
        let plan = AdjustmentPlan::new(1, 6, 11, Branch::Plus).unwrap();
        let a = adjust_triple(&solved, &c, &plan).unwrap();
        let b = adjust_triple(&solved, &c, &plan.with_branch(Branch::Minus)).unwrap();
        let close = |p: &DatasetPair| {
            p.ys()
                .iter()
                .zip(solved.ys())
                .all(|(a, b)| (a - b).abs() < 1e-9)
        };
        assert!(
            close(&a) ^ close(&b),
            "exactly one branch should reproduce the already-valid input"
        );
    }

    #[test]
    fn triple_touches_only_planned_points() {
        let c = quartet::constraints();
        let spec = ShapeSpec::LinearNoise {
            noise_sd: 1.0,
            seed: 11,
        };
        let ys = spec.evaluate(&grid(), &c).unwrap().ys;
        let seed = DatasetPair::new(grid(), ys).unwrap();
        let plan = AdjustmentPlan::new(3, 7, 9, Branch::Minus).unwrap();
        let adjusted = adjust_triple(&seed, &c, &plan).unwrap();
        for k in 0..seed.len() {
            let planned = [3, 7, 9].contains(&(k + 1));
            if !planned {
                assert_eq!(seed.ys()[k], adjusted.ys()[k], "index {k} moved");
            }
        }
        assert_closed(&adjusted, &c, 1e-9);
    }

    #[test]
    fn triple_on_three_points_matches_minimal_solution() {
        let c3 = ConstraintSet::new(3, 9.0, 11.0, 7.5, 4.125, 0.5).unwrap();
        let (first, second) = solve_three_point_minimal(&c3).unwrap();
        let seed = DatasetPair::new(
            first.xs().to_vec(),
            first.xs().iter().map(|&x| eval_line(&c3, x)).collect(),
        )
        .unwrap();
        let minus = adjust_triple(
            &seed,
            &c3,
            &AdjustmentPlan::new(1, 2, 3, Branch::Minus).unwrap(),
        )
        .unwrap();
        let plus = adjust_triple(
            &seed,
            &c3,
            &AdjustmentPlan::new(1, 2, 3, Branch::Plus).unwrap(),
        )
        .unwrap();
        for k in 0..3 {
            assert!((minus.ys()[k] - first.ys()[k]).abs() < 1e-9);
            assert!((plus.ys()[k] - second.ys()[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn affine_constants_generally_differ() {
        // Regression guard: the two affine constants are not equal in
        // general, yet the constraints still close. Even the noiseless
        // line seed separates them (−2.5 vs +2.5 on this grid).
        let c = quartet::constraints();
        let line = DatasetPair::new(
            grid(),
            grid().iter().map(|&x| eval_line(&c, x)).collect(),
        )
        .unwrap();
        let red = affine_reduction(&line, &c, [1, 6, 11]).unwrap();
        assert!(
            (red.a_lo - red.a_hi).abs() > 1.0,
            "expected distinct affine constants, got {} vs {}",
            red.a_lo,
            red.a_hi
        );

        // Same check on a noisy seed; skip seeds whose noise exhausts the
        // variance budget (a declared, seed-dependent infeasibility).
        let mut checked = 0;
        for noise_seed in 0..20u64 {
            let spec = ShapeSpec::LinearNoise {
                noise_sd: 0.8,
                seed: noise_seed,
            };
            let ys = spec.evaluate(&grid(), &c).unwrap().ys;
            let seeded = DatasetPair::new(grid(), ys).unwrap();
            let red = affine_reduction(&seeded, &c, [1, 6, 11]).unwrap();
            match adjust_triple(
                &seeded,
                &c,
                &AdjustmentPlan::new(1, 6, 11, Branch::Plus).unwrap(),
            ) {
                Ok(adjusted) => {
                    assert!((red.a_lo - red.a_hi).abs() > 1e-3);
                    assert_closed(&adjusted, &c, 1e-9);
                    checked += 1;
                }
                Err(e) => assert!(e.is_seed_dependent(), "{e}"),
            }
        }
        assert!(checked >= 5, "only {checked} of 20 seeds were feasible");
    }

    #[test]
    fn affine_slopes_match_closed_forms() {
        let c = quartet::constraints();
        let seed = DatasetPair::new(
            grid(),
            grid().iter().map(|&x| eval_line(&c, x)).collect(),
        )
        .unwrap();
        let red = affine_reduction(&seed, &c, [1, 6, 11]).unwrap();
        let dx = |i: usize| grid()[i - 1] - 9.0;
        let b_lo_expected = (dx(11) - dx(6)) / (dx(1) - dx(11));
        let b_hi_expected = (dx(1) - dx(6)) / (dx(11) - dx(1));
        assert!((red.b_lo - b_lo_expected).abs() < 1e-12);
        assert!((red.b_hi - b_hi_expected).abs() < 1e-12);
    }

    #[test]
    fn degenerate_triple_is_rejected() {
        let c = quartet::constraints();
        let xs = bimodal_x(11, 9.0, 11.0, BimodalBranch::OutlierHigh).unwrap();
        let ys: Vec<f64> = xs.iter().map(|&x| eval_line(&c, x)).collect();
        let d = DatasetPair::new(xs, ys).unwrap();
        let err = adjust_triple(
            &d,
            &c,
            &AdjustmentPlan::new(1, 2, 3, Branch::Plus).unwrap(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::DegenerateTriple));
    }

    #[test]
    fn infeasible_triple_reports_discriminant() {
        // Fixed points already spend far more variance than the target
        // allows; no triple assignment can compensate.
        let c = ConstraintSet::new(11, 9.0, 11.0, 7.5, 4.125, 0.5).unwrap();
        let mut ys: Vec<f64> = grid().iter().map(|&x| eval_line(&c, x)).collect();
        ys[3] += 40.0;
        ys[7] -= 40.0;
        let d = DatasetPair::new(grid(), ys).unwrap();
        let err = adjust_triple(
            &d,
            &c,
            &AdjustmentPlan::new(1, 6, 11, Branch::Plus).unwrap(),
        )
        .unwrap_err();
        match err {
            Error::InfeasibleTriple { discriminant } => assert!(discriminant < 0.0),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn group_adjustment_reconstructs_fourth_pattern() {
        let c = quartet::constraints();
        let xs = bimodal_x(11, 9.0, 11.0, BimodalBranch::OutlierHigh).unwrap();
        // Noisy group seeds can exhaust the variance budget; take the
        // first feasible seed and check the reconstruction there.
        let adjusted = (0..20u64)
            .find_map(|noise_seed| {
                let spec = ShapeSpec::BimodalNoise {
                    noise_sd: 0.8,
                    seed: noise_seed,
                };
                let seeded =
                    DatasetPair::new(xs.clone(), spec.evaluate(&xs, &c).unwrap().ys).unwrap();
                adjust_group(&seeded, &c, &[1, 2]).ok()
            })
            .expect("some seed within 20 must be feasible");
        assert_eq!(adjusted.ys()[10], 12.5);
        assert_closed(&adjusted, &c, 1e-9);
        // Residual sums over the grouped points, forced by the pinned
        // outlier: Σδy = −5, Σδy² = 16.25.
        let group_dy: f64 = adjusted.ys()[..10].iter().map(|y| y - 7.5).sum();
        let group_dy2: f64 = adjusted.ys()[..10].iter().map(|y| (y - 7.5) * (y - 7.5)).sum();
        assert!((group_dy + 5.0).abs() < 1e-9, "Σδy = {group_dy}");
        assert!((group_dy2 - 16.25).abs() < 1e-9, "Σδy² = {group_dy2}");
    }

    #[test]
    fn group_adjustment_zero_noise_moves_exactly_two_points() {
        let c = quartet::constraints();
        let xs = bimodal_x(11, 9.0, 11.0, BimodalBranch::OutlierHigh).unwrap();
        let flat = DatasetPair::new(
            xs.clone(),
            ShapeSpec::BimodalNoise {
                noise_sd: 0.0,
                seed: 0,
            }
            .evaluate(&xs, &c)
            .unwrap()
            .ys,
        )
        .unwrap();
        let adjusted = adjust_group(&flat, &c, &[4, 9]).unwrap();
        let off_line: Vec<usize> = adjusted.ys()[..10]
            .iter()
            .enumerate()
            .filter(|(_, &y)| (y - 7.0).abs() > 1e-12)
            .map(|(i, _)| i + 1)
            .collect();
        assert_eq!(off_line, vec![4, 9]);
        assert_closed(&adjusted, &c, 1e-9);
    }

    #[test]
    fn published_fourth_dataset_verifies_loosely() {
        let c = quartet::constraints();
        let report = verify(&quartet::dataset(3), &c, quartet::HISTORICAL_TOLERANCE);
        assert!(report.passed, "{report}");
    }

    #[test]
    fn group_adjustment_rejects_scattered_free_points() {
        let c = quartet::constraints();
        let xs = bimodal_x(11, 9.0, 11.0, BimodalBranch::OutlierHigh).unwrap();
        let ys: Vec<f64> = xs.iter().map(|&x| eval_line(&c, x)).collect();
        let d = DatasetPair::new(xs, ys).unwrap();
        // Index 11 is the outlier; mixing it into the free set breaks the
        // shared-x requirement.
        assert!(adjust_group(&d, &c, &[1, 11]).is_err());
        assert!(adjust_group(&d, &c, &[5]).is_err());
    }

    #[test]
    fn group_adjustment_with_several_off_points() {
        // Two off-group points at x = ±1 around a group at x = 0; the
        // covariance requirement Σ(δx_k − δx_f)·δy_k = S_xx·β1 = 2 must
        // already hold for the fixed pair.
        let c = ConstraintSet::new(6, 0.0, 0.4, 0.0, 1.0, 1.0).unwrap();
        let xs = vec![0.0, 0.0, 0.0, 0.0, 1.0, -1.0];

        let consistent =
            DatasetPair::new(xs.clone(), vec![0.3, -0.1, 0.0, 0.0, 1.0, -1.0]).unwrap();
        let adjusted = adjust_group(&consistent, &c, &[1, 2]).unwrap();
        assert_closed(&adjusted, &c, 1e-9);
        // Fixed points, on-group and off-group alike, are untouched.
        assert_eq!(&adjusted.ys()[2..], &consistent.ys()[2..]);

        let inconsistent =
            DatasetPair::new(xs, vec![0.3, -0.1, 0.0, 0.0, 2.0, -1.0]).unwrap();
        let err = adjust_group(&inconsistent, &c, &[1, 2]).unwrap_err();
        assert!(matches!(err, Error::InconsistentFixedCovariance { .. }), "{err}");
    }

    #[test]
    fn group_adjustment_infeasible_pair() {
        let c = quartet::constraints();
        let xs = bimodal_x(11, 9.0, 11.0, BimodalBranch::OutlierHigh).unwrap();
        // Fixed group points way off the line soak up all the variance.
        let mut ys: Vec<f64> = xs.iter().map(|&x| eval_line(&c, x)).collect();
        ys[2] += 30.0;
        let d = DatasetPair::new(xs, ys).unwrap();
        let err = adjust_group(&d, &c, &[1, 2]).unwrap_err();
        assert!(matches!(err, Error::InfeasiblePair(_)));
    }

    #[test]
    fn generate_quadratic_without_adjustment() {
        let c = quartet::constraints();
        let out = generate(
            &XSource::Grid(XFamily::Uniform),
            &ShapeSpec::Quadratic {
                branch: QuadBranch::Right,
            },
            &c,
            &Plan::Auto(Branch::Plus),
            1e-8,
        )
        .unwrap();
        assert!(out.report.passed);
        // Concave-down parabola: strictly increasing then decreasing.
        let ys = out.dataset.ys();
        let peak = ys
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!(ys[..peak].windows(2).all(|w| w[0] < w[1]));
        assert!(ys[peak..].windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn generate_quartic_zero_weight_adjusts_three_points() {
        let c = quartet::constraints();
        let shape = ShapeSpec::Quartic {
            f0: 0.0,
            roots: [4.150, 7.480, 10.710, 13.850],
            jitter_sd: 0.0,
            seed: 0,
        };
        let out = generate(
            &XSource::Grid(XFamily::Uniform),
            &shape,
            &c,
            &Plan::Auto(Branch::Plus),
            1e-9,
        )
        .unwrap();
        let on_line = out
            .dataset
            .points()
            .filter(|(x, y)| (y - eval_line(&c, *x)).abs() < 1e-12)
            .count();
        assert_eq!(on_line, 8, "all but the adjusted triple stay on the line");
    }

    #[test]
    fn quartic_full_weight_needs_jitter_before_adjusting() {
        // At the published weight the smooth quartic leaves the default
        // triple with too little variance budget: the pre-positioned
        // points already carry Σδy² = 25.3 of the 41.25 total while the
        // mean/covariance rows force the triple above what remains. The
        // random deviations applied before adjusting are what make the
        // workflow solvable (for favorable draws).
        let c = quartet::constraints();
        let f0 = 2.0_f64.sqrt() * 1e-2;
        let roots = [4.150, 7.480, 10.710, 13.850];
        let dry = generate(
            &XSource::Grid(XFamily::Uniform),
            &ShapeSpec::Quartic {
                f0,
                roots,
                jitter_sd: 0.0,
                seed: 0,
            },
            &c,
            &Plan::Auto(Branch::Plus),
            1e-9,
        );
        match dry {
            Err(e) => assert!(e.is_infeasibility(), "{e}"),
            Ok(_) => panic!("expected the jitter-free full-weight quartic to be infeasible"),
        }

        let jittered = (0..30u64).find_map(|seed| {
            generate(
                &XSource::Grid(XFamily::Uniform),
                &ShapeSpec::Quartic {
                    f0,
                    roots,
                    jitter_sd: 0.35,
                    seed,
                },
                &c,
                &Plan::Auto(Branch::Plus),
                1e-9,
            )
            .ok()
        });
        let out = jittered.expect("some jitter draw within 30 seeds is adjustable");
        assert!(out.report.passed);
    }

    #[test]
    fn outlier_shape_pipeline_includes_outlier_in_triple() {
        // The outlier index replaces the mid-point in the default triple,
        // so the forced point participates in the constraint solve.
        let c = quartet::constraints();
        let shape = ShapeSpec::LinearOutlier {
            beta0p: 4.01,
            beta1p: 0.3454,
            outlier_index: 10,
            outlier_y: 12.74,
        };
        let out = generate(
            &XSource::Grid(XFamily::Uniform),
            &shape,
            &c,
            &Plan::Auto(Branch::Plus),
            1e-9,
        )
        .unwrap();
        assert!(out.report.passed);
        assert_closed(&out.dataset, &c, 1e-9);
        // Points outside the triple {1, 10, 11} keep the primed line.
        for (k, (x, y)) in out.dataset.points().enumerate() {
            if ![1, 10, 11].contains(&(k + 1)) {
                assert!(
                    (y - (4.01 + 0.3454 * x)).abs() < 1e-12,
                    "point {} moved off the seed line",
                    k + 1
                );
            }
        }
    }

    #[test]
    fn generate_with_explicit_x_and_group_plan() {
        let c = quartet::constraints();
        let out = generate(
            &XSource::Explicit(quartet::X_IV.to_vec()),
            &ShapeSpec::BimodalNoise {
                noise_sd: 1.0,
                seed: 5,
            },
            &c,
            &Plan::Auto(Branch::Plus),
            1e-9,
        )
        .unwrap();
        assert!(out.report.passed);
        assert_eq!(out.dataset.ys()[10], 12.5);
    }

    #[test]
    fn generate_propagates_stage_tags() {
        let c = quartet::constraints();
        let err = generate(
            &XSource::Explicit(vec![1.0, 2.0, 3.0]),
            &ShapeSpec::OnLine,
            &c,
            &Plan::Auto(Branch::Plus),
            1e-9,
        )
        .unwrap_err();
        assert!(err.to_string().contains("x-generation"), "{err}");
    }

    #[test]
    fn generate_many_seeds_all_verify_and_differ() {
        // Every seed either verifies at 1e-9 or reports a seed-dependent
        // infeasibility; all successes are pairwise distinct.
        let c = quartet::constraints();
        let mut seen: Vec<Vec<u64>> = Vec::new();
        for seed in 0..100 {
            match generate(
                &XSource::Grid(XFamily::Uniform),
                &ShapeSpec::LinearNoise {
                    noise_sd: 1.376_f64.sqrt(),
                    seed,
                },
                &c,
                &Plan::Auto(Branch::Plus),
                1e-9,
            ) {
                Ok(out) => {
                    assert!(out.report.passed, "seed {seed}");
                    let bits: Vec<u64> = out.dataset.ys().iter().map(|y| y.to_bits()).collect();
                    assert!(
                        !seen.contains(&bits),
                        "seed {seed} duplicated an earlier dataset"
                    );
                    seen.push(bits);
                }
                Err(e) => assert!(e.is_seed_dependent(), "seed {seed}: {e}"),
            }
        }
        // At the full noise level of the classic linear pattern roughly
        // 4 in 10 seeds leave enough variance budget for the triple.
        assert!(seen.len() >= 30, "only {} of 100 seeds succeeded", seen.len());
    }

    #[test]
    fn crowded_triple_emits_warning() {
        // 11 points on [4, 14]: any distinct triple spans at least 20% of
        // the range, so no warning there.
        assert!(spread_warning(&grid(), [5, 6, 7]).is_none());
        // A grid with a faraway point makes adjacent selections crowded.
        let xs = [0.0, 0.1, 0.2, 0.3, 100.0];
        let w = spread_warning(&xs, [1, 2, 3]).expect("crowded selection warns");
        assert!(w.contains("span"), "{w}");
        assert!(spread_warning(&xs, [1, 3, 5]).is_none());
    }
}
