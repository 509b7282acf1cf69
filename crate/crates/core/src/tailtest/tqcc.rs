//! Tail quotient correlation and its permutation test.
//!
//! Both margins are moved to the unit Frechet scale (fitted GEV, or ranks if
//! the fit fails). With threshold `u`, and `A = max_i (u v X_i)/(u v Y_i)`,
//! `B = max_i (u v Y_i)/(u v X_i)`, the statistic is
//! `(A + B - 2) / (A B - 1)`, taken as 1 when `A = B = 1`. It is near 0 for
//! independent heavy-tailed margins and 1 for identical ones.

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::gev::{fit_gev, GevFit};
use crate::error::{Error, Result};
use crate::sample::{order_statistics, PairedSample};
use crate::simulation::RngStream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MarginTransform {
    Gev(GevFit),
    /// `-1 / log(rank / (n + 1))`
    Rank,
}

impl MarginTransform {
    pub fn name(&self) -> &'static str {
        match self {
            MarginTransform::Gev(_) => "gev",
            MarginTransform::Rank => "rank",
        }
    }
}

pub fn rank_frechet(v: &[f64]) -> Result<Vec<f64>> {
    let os = order_statistics(v)?;
    let denom = (v.len() + 1) as f64;
    Ok(v
        .iter()
        .map(|&x| -1.0 / (os.count_le(x) as f64 / denom).ln())
        .collect())
}

/// Unit Frechet margin by fitted GEV, with the rank transform as fallback.
pub fn frechet_margin(v: &[f64]) -> Result<(Vec<f64>, MarginTransform)> {
    match fit_gev(v) {
        Ok(fit) => Ok((
            v.iter().map(|&x| fit.gev.unit_frechet(x)).collect(),
            MarginTransform::Gev(fit),
        )),
        Err(Error::NonConvergence(_)) => Ok((rank_frechet(v)?, MarginTransform::Rank)),
        Err(e) => Err(e),
    }
}

/// Empirical `q`-quantile as the order statistic `X_(ceil(q n), n)`.
pub fn empirical_percentile(v: &[f64], q: f64) -> Result<f64> {
    let os = order_statistics(v)?;
    let n = os.len();
    let i = ((q * n as f64).ceil() as usize).clamp(1, n);
    Ok(os.nth(i))
}

pub const THRESHOLD_LEVEL: f64 = 0.95;
pub const MIN_EXCEEDANCES: usize = 10;

/// Smaller of the two empirical 95th percentiles.
pub fn tqcc_threshold(x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(empirical_percentile(x, THRESHOLD_LEVEL)?.min(empirical_percentile(y, THRESHOLD_LEVEL)?))
}

/// The quotient correlation for already-transformed margins at threshold `u`.
pub fn tqcc(x: &[f64], y: &[f64], u: f64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { x: x.len(), y: y.len() });
    }
    let relevant = x.iter().zip(y).filter(|(&a, &b)| a > u || b > u).count();
    if relevant < MIN_EXCEEDANCES {
        return Err(Error::InsufficientTail {
            needed: MIN_EXCEEDANCES,
            got: relevant,
        });
    }
    Ok(tqcc_unchecked(x, y, u))
}

fn tqcc_unchecked(x: &[f64], y: &[f64], u: f64) -> f64 {
    let (mut a, mut b) = (f64::MIN, f64::MIN);
    for (&xi, &yi) in x.iter().zip(y) {
        let (xu, yu) = (xi.max(u), yi.max(u));
        a = a.max(xu / yu);
        b = b.max(yu / xu);
    }
    let denom = a * b - 1.0;
    if denom <= 0.0 {
        1.0
    } else {
        (a + b - 2.0) / denom
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TqccStatistic {
    pub value: f64,
    pub threshold: f64,
    pub transforms: [MarginTransform; 2],
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Transforms both margins and evaluates the statistic at the 95th
/// percentile threshold.
pub fn tqcc_statistic(sample: &PairedSample) -> Result<TqccStatistic> {
    let (x, tx) = frechet_margin(sample.x())?;
    let (y, ty) = frechet_margin(sample.y())?;
    let threshold = tqcc_threshold(&x, &y)?;
    let value = tqcc(&x, &y, threshold)?;
    Ok(TqccStatistic {
        value,
        threshold,
        transforms: [tx, ty],
        x,
        y,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndependenceTestResult {
    pub statistic: f64,
    pub threshold: f64,
    pub p_value: f64,
    pub null_reps: usize,
    pub level: f64,
    /// `p_value < level`
    pub reject: bool,
    pub transforms: [MarginTransform; 2],
}

pub const MIN_NULL_REPS: usize = 200;
pub const DEFAULT_NULL_REPS: usize = 999;

/// Permutation p-value `(1 + #{null >= observed}) / (null_reps + 1)`, where
/// each null draw re-pairs the transformed `y` by a uniform random
/// permutation from stream `(seed, r)`.
pub fn tqcc_pvalue(sample: &PairedSample, null_reps: usize, seed: u64, level: f64) -> Result<IndependenceTestResult> {
    if null_reps < MIN_NULL_REPS {
        return Err(Error::invalid("null_reps", format!("{null_reps} < {MIN_NULL_REPS}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid("level", format!("{level} not in (0, 1)")));
    }
    let stat = tqcc_statistic(sample)?;
    // the threshold depends on the margins only, so it is fixed under the null
    let exceed: usize = (0..null_reps)
        .into_par_iter()
        .map(|r| {
            let mut y = stat.y.clone();
            y.shuffle(&mut RngStream::new(seed, r as u64).rng());
            usize::from(tqcc_unchecked(&stat.x, &y, stat.threshold) >= stat.value)
        })
        .sum();
    let p_value = (1 + exceed) as f64 / (null_reps + 1) as f64;
    Ok(IndependenceTestResult {
        statistic: stat.value,
        threshold: stat.threshold,
        p_value,
        null_reps,
        level,
        reject: p_value < level,
        transforms: stat.transforms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn frechet_pairs(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = RngStream::new(seed, 0).rng();
        let mut draw = || -1.0 / rng.random_range(1e-12..1.0f64).ln();
        let x = (0..n).map(|_| draw()).collect();
        let y = (0..n).map(|_| draw()).collect();
        (x, y)
    }

    #[test]
    fn comonotone_is_one() {
        let (x, _) = frechet_pairs(500, 1);
        let u = tqcc_threshold(&x, &x).unwrap();
        assert_eq!(tqcc(&x, &x, u).unwrap(), 1.0);
    }

    #[test]
    fn independent_near_zero() {
        let (x, y) = frechet_pairs(1565, 2);
        let u = tqcc_threshold(&x, &y).unwrap();
        let q = tqcc(&x, &y, u).unwrap();
        assert!((0.0..0.1).contains(&q), "{q}");
    }

    #[test]
    fn too_few_exceedances() {
        let x = vec![1.0; 40];
        assert!(matches!(tqcc(&x, &x, 2.0), Err(Error::InsufficientTail { .. })));
    }

    #[test]
    fn percentile_rule() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(empirical_percentile(&v, 0.95).unwrap(), 95.0);
        let w: Vec<f64> = (1..=100).map(|i| f64::from(i) / 2.0).collect();
        assert_eq!(tqcc_threshold(&v, &w).unwrap(), 47.5);
    }

    #[test]
    fn rank_transform_invariant_under_monotone_maps() {
        let (x, y) = frechet_pairs(300, 3);
        let rx = rank_frechet(&x).unwrap();
        let ry = rank_frechet(&y).unwrap();
        let rx2 = rank_frechet(&x.iter().map(|v| v.ln() * 3.0 + 1.0).collect::<Vec<_>>()).unwrap();
        let ry2 = rank_frechet(&y.iter().map(|v| v.powf(0.3)).collect::<Vec<_>>()).unwrap();
        assert_eq!(rx, rx2);
        assert_eq!(ry, ry2);
        let u = tqcc_threshold(&rx, &ry).unwrap();
        assert_eq!(tqcc(&rx, &ry, u).unwrap(), tqcc(&rx2, &ry2, u).unwrap());
    }

    #[test]
    fn pvalue_is_deterministic_and_bounded() {
        let (x, y) = frechet_pairs(400, 4);
        let s = PairedSample::new(x, y).unwrap();
        let a = tqcc_pvalue(&s, 299, 8, 0.05).unwrap();
        let b = tqcc_pvalue(&s, 299, 8, 0.05).unwrap();
        assert_eq!(a, b);
        assert!(a.p_value > 0.0 && a.p_value <= 1.0);
        assert_eq!(a.reject, a.p_value < 0.05);
        assert!(tqcc_pvalue(&s, 100, 8, 0.05).is_err());
    }

    #[test]
    fn comonotone_rejected() {
        let (x, _) = frechet_pairs(400, 5);
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let s = PairedSample::new(x, y).unwrap();
        let r = tqcc_pvalue(&s, 999, 1, 0.05).unwrap();
        assert!(r.p_value < 0.01, "{r:?}");
        assert!(r.reject);
    }
}
