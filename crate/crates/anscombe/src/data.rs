use crate::error::{Error, Result};

/// An ordered sequence of (x, y) observations of equal length.
///
/// This is the central object of the crate: every generator produces one and
/// every statistic consumes one. Construction enforces the invariants that
/// both sequences have the same length, hold at least three points, and
/// contain only finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetPair {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl DatasetPair {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch {
                xs: xs.len(),
                ys: ys.len(),
            });
        }
        if xs.len() < 3 {
            return Err(Error::TooFewPoints(xs.len()));
        }
        for (i, v) in xs.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(i));
            }
        }
        for (i, v) in ys.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(i));
            }
        }
        Ok(Self { xs, ys })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    /// Returns a copy with the pairs jointly sorted by ascending x (ties by y).
    ///
    /// Reordering pairs does not change any of the regression statistics.
    pub fn sorted_by_x(&self) -> DatasetPair {
        let mut pairs: Vec<(f64, f64)> = self.points().collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let (xs, ys) = pairs.into_iter().unzip();
        DatasetPair { xs, ys }
    }

    /// Replaces the y sequence, revalidating the invariants.
    pub fn with_ys(&self, ys: Vec<f64>) -> Result<DatasetPair> {
        DatasetPair::new(self.xs.clone(), ys)
    }
}
