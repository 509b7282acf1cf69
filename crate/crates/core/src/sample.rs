//! Paired loss samples, order statistics and empirical distribution values.
//!
//! Everything downstream works on ranks and order statistics of the two
//! coordinates. The empirical distribution function here always uses the
//! `n + 1` denominator, so `F_n(v) <= n / (n + 1) < 1` and survival values
//! `1 - F_n(v)` never vanish.

use crate::error::{Error, Result};

fn check_finite(v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// `n` paired observations `(x_i, y_i)`: `x` is the individual loss, `y` the
/// systemic loss whose extremes define the conditioning event.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl PairedSample {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                x: x.len(),
                y: y.len(),
            });
        }
        if x.len() < 2 {
            return Err(Error::TooShort {
                needed: 2,
                got: x.len(),
            });
        }
        check_finite(&x)?;
        check_finite(&y)?;
        Ok(Self { x, y })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let (x, y) = pairs.iter().copied().unzip();
        Self::new(x, y)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Applies `f` to every x value, keeping y.
    pub fn map_x(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.x.iter().map(|&v| f(v)).collect(), self.y.clone())
    }

    /// Applies `f` to every y value, keeping x.
    pub fn map_y(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.x.clone(), self.y.iter().map(|&v| f(v)).collect())
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.x, self.y)
    }
}

/// Ascending order statistics together with the original index of each one.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderStats {
    sorted: Vec<f64>,
    /// `permutation[i]` is the 0-based index in the input of `sorted[i]`.
    permutation: Vec<usize>,
}

impl OrderStats {
    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// The `i`-th smallest value, 1-based: `nth(1)` is the minimum and
    /// `nth(n)` the maximum.
    pub fn nth(&self, i: usize) -> f64 {
        self.sorted[i - 1]
    }

    /// Number of sample values `<= v`.
    pub fn count_le(&self, v: f64) -> usize {
        self.sorted.partition_point(|&s| s <= v)
    }
}

/// Stable ascending sort with index recovery. Equal values keep their input
/// order, so ranks are reproducible.
pub fn order_statistics(v: &[f64]) -> Result<OrderStats> {
    if v.is_empty() {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    check_finite(v)?;
    let mut permutation: Vec<usize> = (0..v.len()).collect();
    permutation.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let sorted = permutation.iter().map(|&i| v[i]).collect();
    Ok(OrderStats {
        sorted,
        permutation,
    })
}

/// `F_n(v) = #{i : sample_i <= v} / (n + 1)`.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    stats: OrderStats,
}

impl EmpiricalCdf {
    pub fn new(sample: &[f64]) -> Result<Self> {
        Ok(Self {
            stats: order_statistics(sample)?,
        })
    }

    pub fn from_order_stats(stats: OrderStats) -> Self {
        Self { stats }
    }

    pub fn value(&self, v: f64) -> f64 {
        self.stats.count_le(v) as f64 / (self.stats.len() + 1) as f64
    }

    pub fn order_stats(&self) -> &OrderStats {
        &self.stats
    }
}

pub fn empirical_cdf_value(sample: &[f64], v: f64) -> Result<f64> {
    if !v.is_finite() {
        return Err(Error::NonFinite { index: 0 });
    }
    Ok(EmpiricalCdf::new(sample)?.value(v))
}

pub(crate) fn check_tail_count(name: &'static str, k: usize, n: usize, min: usize) -> Result<()> {
    if k < min {
        return Err(Error::TailCount {
            name,
            value: k,
            n,
            reason: if min == 2 {
                "must be at least 2"
            } else {
                "must be at least 1"
            },
        });
    }
    if k >= n {
        return Err(Error::TailCount {
            name,
            value: k,
            n,
            reason: "must be smaller than n",
        });
    }
    Ok(())
}

/// Scale factor `4n / (k^2 (k - 1))` in front of the pair sum.
pub(crate) fn pair_sum_scale(n: usize, k: usize) -> f64 {
    let kf = k as f64;
    4.0 * n as f64 / (kf * kf * (kf - 1.0))
}

/// Intermediate-level tail Gini estimate by the literal double sum over all
/// pairs `i < j`:
///
/// ```text
/// 4n / (k^2 (k-1)) * sum_{i<j} (X_i - X_j)(F_n2(Y_i) - F_n2(Y_j))
///                     * I(X_i, X_j > 0, Y_i, Y_j > Y_(n-k,n))
/// ```
///
/// `O(n^2)`; this is the reference the fast estimator is checked against.
/// The threshold comparison is strict, so ties at `Y_(n-k,n)` leave fewer
/// than `k` points in the tail.
pub fn tg_bruteforce(sample: &PairedSample, k: usize) -> Result<f64> {
    let n = sample.len();
    check_tail_count("k", k, n, 2)?;
    let (x, y) = (sample.x(), sample.y());

    let mut ys = y.to_vec();
    ys.sort_by(f64::total_cmp);
    let threshold = ys[n - k - 1];

    let ecdf = |v: f64| y.iter().filter(|&&w| w <= v).count() as f64 / (n + 1) as f64;
    let f: Vec<f64> = y.iter().map(|&v| ecdf(v)).collect();

    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            if x[i] > 0.0 && x[j] > 0.0 && y[i] > threshold && y[j] > threshold {
                sum += (x[i] - x[j]) * (f[i] - f[j]);
            }
        }
    }
    Ok(pair_sum_scale(n, k) * sum)
}
