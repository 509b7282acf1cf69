//! Tail Gini estimation at intermediate and extreme levels.
//!
//! The pipeline for one sample:
//!
//! 1. `tg_intermediate`: nonparametric estimate at level `k/n`, using only
//!    the `k` pairs with the largest `Y` and positive `X`.
//! 2. `hill_gamma1` and `eta_hat`: the extreme value index of `X` and the
//!    coefficient of tail dependence of `(X, Y)`.
//! 3. `tg_extreme`: power-law extrapolation from `k/n` down to `p` with
//!    ratio `d_n = k/(np)` and exponent `1 - 1/eta + gamma1`.
//!
//! `tg_hw_baseline` is the same extrapolation with `eta` fixed at 1, which
//! is the right exponent only under asymptotic dependence.

use crate::error::{Error, Result};
use crate::quad;
use crate::sample::{check_tail_count, order_statistics, pair_sum_scale, PairedSample};

/// Tail fractions `k/n`, `k1/n`, `k2/n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFractions {
    pub alpha: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

impl Default for TailFractions {
    fn default() -> Self {
        Self {
            alpha: 0.09,
            alpha1: 0.05,
            alpha2: 0.05,
        }
    }
}

impl TailFractions {
    pub fn new(alpha: f64, alpha1: f64, alpha2: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("alpha1", alpha1), ("alpha2", alpha2)] {
            if !(v > 0.0 && v <= 0.5) {
                return Err(Error::invalid(name, format!("{v} not in (0, 0.5]")));
            }
        }
        Ok(Self {
            alpha,
            alpha1,
            alpha2,
        })
    }
}

/// Tail counts and extreme level for one fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailConfig {
    /// Tail count for the intermediate estimate.
    pub k: usize,
    /// Tail count for the Hill estimator.
    pub k1: usize,
    /// Tail count for the eta estimator.
    pub k2: usize,
    /// Extreme level.
    pub p: f64,
}

impl TailConfig {
    pub fn new(k: usize, k1: usize, k2: usize, p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::invalid("p", format!("{p} not in (0, 1)")));
        }
        Ok(Self { k, k1, k2, p })
    }

    /// Rounds `alpha * n` etc. to the nearest count.
    pub fn from_fractions(n: usize, fractions: TailFractions, p: f64) -> Result<Self> {
        let count = |a: f64| (a * n as f64).round() as usize;
        let cfg = Self::new(
            count(fractions.alpha),
            count(fractions.alpha1),
            count(fractions.alpha2),
            p,
        )?;
        cfg.validate(n)?;
        Ok(cfg)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        check_tail_count("k", self.k, n, 2)?;
        check_tail_count("k1", self.k1, n, 1)?;
        check_tail_count("k2", self.k2, n, 1)?;
        extrapolation_ratio(self.k, n, self.p).map(|_| ())
    }

    pub fn d_n(&self, n: usize) -> Result<f64> {
        extrapolation_ratio(self.k, n, self.p)
    }
}

/// `d_n = k / (n p)`; rejects `p > k/n`.
pub fn extrapolation_ratio(k: usize, n: usize, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid("p", format!("{p} not in (0, 1)")));
    }
    let d = k as f64 / (n as f64 * p);
    // p = k/n is allowed up to rounding in the division above
    if d < 1.0 - 1e-12 {
        return Err(Error::InwardExtrapolation { p, k, n });
    }
    Ok(d.max(1.0))
}

/// Hill estimator of the extreme value index of `x`:
/// `(1/k1) sum_{i=1..k1} log X_(n-i+1,n) - log X_(n-k1,n)`.
///
/// Non-positive observations are fine as long as they sit below the
/// threshold order statistic; a non-positive threshold is an error.
pub fn hill_gamma1(x: &[f64], k1: usize) -> Result<f64> {
    let os = order_statistics(x)?;
    let n = os.len();
    check_tail_count("k1", k1, n, 1)?;
    let threshold = os.nth(n - k1);
    if threshold <= 0.0 {
        return Err(Error::NonPositiveThreshold { value: threshold });
    }
    Ok(top_log_excess(os.sorted(), k1, threshold))
}

fn top_log_excess(sorted: &[f64], k: usize, threshold: f64) -> f64 {
    let n = sorted.len();
    let mean_log = sorted[n - k..].iter().map(|v| v.ln()).sum::<f64>() / k as f64;
    mean_log - threshold.ln()
}

/// `T_i = 1 / max(1 - F_n1(X_i), 1 - F_n2(Y_i))`, with both empirical
/// distribution functions on the `n + 1` denominator. Every `T_i >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedSample {
    pub t: Vec<f64>,
}

impl TransformedSample {
    pub fn new(sample: &PairedSample) -> Result<Self> {
        let n = sample.len();
        let xs = order_statistics(sample.x())?;
        let ys = order_statistics(sample.y())?;
        let denom = (n + 1) as f64;
        let t = sample
            .x()
            .iter()
            .zip(sample.y())
            .map(|(&x, &y)| {
                let sx = 1.0 - xs.count_le(x) as f64 / denom;
                let sy = 1.0 - ys.count_le(y) as f64 / denom;
                1.0 / sx.max(sy)
            })
            .collect();
        Ok(Self { t })
    }
}

/// Estimator of the coefficient of tail dependence: the Hill estimator
/// applied to the `T_i` of [`TransformedSample`].
pub fn eta_hat(sample: &PairedSample, k2: usize) -> Result<f64> {
    check_tail_count("k2", k2, sample.len(), 1)?;
    let t = TransformedSample::new(sample)?;
    let os = order_statistics(&t.t)?;
    let n = os.len();
    Ok(top_log_excess(os.sorted(), k2, os.nth(n - k2)))
}

/// Intermediate-level estimate with tail bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntermediateTg {
    pub value: f64,
    /// Points with `Y_i > Y_(n-k,n)`; equals `k` unless there are ties at
    /// the threshold.
    pub in_tail: usize,
    /// Tail points that also have `X_i > 0`.
    pub positive_in_tail: usize,
    /// `k - in_tail`.
    pub ties_at_threshold: usize,
}

/// Intermediate-level tail Gini estimate. Same sum as
/// [`crate::sample::tg_bruteforce`] but only over the `O(k^2)` tail pairs.
pub fn tg_intermediate(sample: &PairedSample, k: usize) -> Result<IntermediateTg> {
    let n = sample.len();
    check_tail_count("k", k, n, 2)?;
    let ys = order_statistics(sample.y())?;
    let threshold = ys.nth(n - k);
    let first_above = ys.count_le(threshold);
    let in_tail = n - first_above;

    let mut tail: Vec<usize> = ys.permutation()[first_above..].to_vec();
    // Original index order makes the summation order identical to the
    // all-pairs loop.
    tail.sort_unstable();
    let x = sample.x();
    let denom = (n + 1) as f64;
    let pts: Vec<(f64, f64)> = tail
        .into_iter()
        .filter(|&i| x[i] > 0.0)
        .map(|i| (x[i], ys.count_le(sample.y()[i]) as f64 / denom))
        .collect();

    let mut sum = 0.0;
    for (a, &(xa, fa)) in pts.iter().enumerate() {
        for &(xb, fb) in &pts[a + 1..] {
            sum += (xa - xb) * (fa - fb);
        }
    }
    Ok(IntermediateTg {
        value: pair_sum_scale(n, k) * sum,
        in_tail,
        positive_in_tail: pts.len(),
        ties_at_threshold: k - in_tail,
    })
}

/// `d_n^(1 - 1/eta + gamma1) * theta_kn` with `d_n = k/(np)`, evaluated in
/// log space.
pub fn tg_extreme(
    theta_kn: f64,
    k: usize,
    n: usize,
    p: f64,
    gamma1_hat: f64,
    eta_hat: f64,
) -> Result<f64> {
    if !(eta_hat > 0.0) {
        return Err(Error::NonPositiveEta(eta_hat));
    }
    let d_n = extrapolation_ratio(k, n, p)?;
    Ok(extrapolate(theta_kn, d_n, extrapolation_exponent(gamma1_hat, eta_hat)))
}

/// `1 - 1/eta + gamma1`.
pub fn extrapolation_exponent(gamma1: f64, eta: f64) -> f64 {
    1.0 - 1.0 / eta + gamma1
}

fn extrapolate(theta_kn: f64, d_n: f64, exponent: f64) -> f64 {
    (exponent * d_n.ln()).exp() * theta_kn
}

/// Baseline extrapolation with `eta = 1`: `d_n^gamma1 * theta_kn`.
pub fn tg_hw_baseline(theta_kn: f64, d_n: f64, gamma1_hat: f64) -> Result<f64> {
    if !(d_n >= 1.0) {
        return Err(Error::invalid("d_n", format!("{d_n} < 1")));
    }
    Ok(extrapolate(theta_kn, d_n, gamma1_hat))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FitDiagnostics {
    pub in_tail: usize,
    pub positive_in_tail: usize,
    pub ties_at_threshold: usize,
}

/// Everything estimated for one sample and one [`TailConfig`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailGiniFit {
    pub theta_intermediate: f64,
    pub gamma1_hat: f64,
    pub eta_hat: f64,
    pub d_n: f64,
    pub theta_extreme: f64,
    pub theta_hw: f64,
    pub config: TailConfig,
    pub n: usize,
    pub diagnostics: FitDiagnostics,
}

impl TailGiniFit {
    /// Assembles a fit from already-estimated components.
    pub fn from_parts(
        theta_intermediate: f64,
        gamma1_hat: f64,
        eta_hat: f64,
        config: TailConfig,
        n: usize,
        diagnostics: FitDiagnostics,
    ) -> Result<Self> {
        let d_n = config.d_n(n)?;
        let theta_extreme = tg_extreme(theta_intermediate, config.k, n, config.p, gamma1_hat, eta_hat)?;
        let theta_hw = tg_hw_baseline(theta_intermediate, d_n, gamma1_hat)?;
        Ok(Self {
            theta_intermediate,
            gamma1_hat,
            eta_hat,
            d_n,
            theta_extreme,
            theta_hw,
            config,
            n,
            diagnostics,
        })
    }

    pub fn exponent(&self) -> f64 {
        extrapolation_exponent(self.gamma1_hat, self.eta_hat)
    }

    /// Heuristic lower-bound check on `k`: true when `k <= n^(1 - eta_hat)`,
    /// i.e. the tail is too thin for the plug-in eta.
    pub fn k_below_lower_bound(&self) -> bool {
        (self.config.k as f64) <= (self.n as f64).powf(1.0 - self.eta_hat)
    }
}

/// Runs the whole estimation pipeline on one sample.
pub fn fit_tail_gini(sample: &PairedSample, config: TailConfig) -> Result<TailGiniFit> {
    let n = sample.len();
    config.validate(n)?;
    let gamma1 = hill_gamma1(sample.x(), config.k1).map_err(Error::in_stage("hill_gamma1"))?;
    let eta = eta_hat(sample, config.k2).map_err(Error::in_stage("eta_hat"))?;
    let mid = tg_intermediate(sample, config.k).map_err(Error::in_stage("tg_intermediate"))?;
    let diagnostics = FitDiagnostics {
        in_tail: mid.in_tail,
        positive_in_tail: mid.positive_in_tail,
        ties_at_threshold: mid.ties_at_threshold,
    };
    TailGiniFit::from_parts(mid.value, gamma1, eta, config, n, diagnostics)
        .map_err(Error::in_stage("tg_extreme"))
}

/// `sqrt(k) (n/k)^(1/2 - 1/(2 eta))`, the rate at which the estimator's
/// relative error shrinks.
pub fn convergence_rate(k: usize, n: usize, eta: f64) -> f64 {
    let k = k as f64;
    k.sqrt() * (n as f64 / k).powf(0.5 - 0.5 / eta)
}

/// The constant `phi0` in `TG_p ~ phi0 p^(1/eta - 1) Q1(1 - p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitConstants {
    pub phi0: f64,
    /// `int_0^inf tau(x^(-1/gamma1), 1) dx`
    pub integral: f64,
    /// `2 (1 + gamma1 - 1/eta) / (1 - gamma1 + 1/eta)`
    pub prefactor: f64,
}

pub const PHI0_REL_TOL: f64 = 1e-8;

/// Evaluates `phi0` for a tail dependence function given along `y = 1`.
///
/// After the substitution `u = x^(-1/gamma1)` the integrand's kink sits at
/// `x = 1`, which is where the half-line is split. A non-integrable `tau`
/// is reported as [`Error::Divergent`].
pub fn phi0_constant(
    tau_at_one: impl Fn(f64) -> f64,
    gamma1: f64,
    eta: f64,
) -> Result<LimitConstants> {
    if !(gamma1 > 0.0 && gamma1 < 1.0) {
        return Err(Error::invalid("gamma1", format!("{gamma1} not in (0, 1)")));
    }
    if !(eta > 0.5 && eta <= 1.0) {
        return Err(Error::invalid("eta", format!("{eta} not in (1/2, 1]")));
    }
    let integrand = |x: f64| tau_at_one(x.powf(-1.0 / gamma1));
    let integral = quad::integrate_half_line(&integrand, PHI0_REL_TOL)?;
    let prefactor = 2.0 * (1.0 + gamma1 - 1.0 / eta) / (1.0 - gamma1 + 1.0 / eta);
    Ok(LimitConstants {
        phi0: prefactor * integral,
        integral,
        prefactor,
    })
}
