//! Replicated simulation experiments: ratio tables, sMSE sweeps over the
//! tail fractions and log-ratio normality diagnostics.

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::estimators::{fit_tail_gini, TailConfig, TailFractions, TailGiniFit};
use crate::simulation::{RngStream, SimModel};

/// One-at-a-time sweep: each list varies one fraction while the other two
/// stay at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub base: f64,
    pub alpha: Vec<f64>,
    pub alpha1: Vec<f64>,
    pub alpha2: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Alpha,
    Alpha1,
    Alpha2,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Alpha => "alpha",
            SweepParam::Alpha1 => "alpha1",
            SweepParam::Alpha2 => "alpha2",
        }
    }
}

impl SweepGrid {
    pub fn uniform(base: f64, values: &[f64]) -> Self {
        Self {
            base,
            alpha: values.to_vec(),
            alpha1: values.to_vec(),
            alpha2: values.to_vec(),
        }
    }

    pub fn point(&self, param: SweepParam, value: f64) -> TailFractions {
        let b = self.base;
        match param {
            SweepParam::Alpha => TailFractions { alpha: value, alpha1: b, alpha2: b },
            SweepParam::Alpha1 => TailFractions { alpha: b, alpha1: value, alpha2: b },
            SweepParam::Alpha2 => TailFractions { alpha: b, alpha1: b, alpha2: value },
        }
    }

    pub fn entries(&self) -> Vec<(SweepParam, f64)> {
        let mut out = Vec::new();
        for (param, values) in [
            (SweepParam::Alpha, &self.alpha),
            (SweepParam::Alpha1, &self.alpha1),
            (SweepParam::Alpha2, &self.alpha2),
        ] {
            out.extend(values.iter().map(|&v| (param, v)));
        }
        out
    }

    pub fn points(&self) -> Vec<TailFractions> {
        let mut pts: Vec<TailFractions> = Vec::new();
        for (param, v) in self.entries() {
            let pt = self.point(param, v);
            if !pts.contains(&pt) {
                pts.push(pt);
            }
        }
        pts
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub model: SimModel,
    /// Sample size per replication.
    pub n: usize,
    /// Number of replications.
    pub m: usize,
    pub p_levels: Vec<f64>,
    pub grid: Vec<TailFractions>,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::invalid("m", "need at least 2 replications"));
        }
        if self.grid.is_empty() || self.p_levels.is_empty() {
            return Err(Error::invalid("grid", "empty grid or no p levels"));
        }
        for g in &self.grid {
            for a in [g.alpha, g.alpha1, g.alpha2] {
                if a * (self.n as f64) < 10.0 {
                    return Err(Error::invalid(
                        "grid",
                        format!("tail fraction {a} leaves fewer than 10 points at n={}", self.n),
                    ));
                }
            }
            for &p in &self.p_levels {
                TailConfig::from_fractions(self.n, *g, p)?;
            }
        }
        Ok(())
    }

    /// Adds the points of `sweep` not already on the grid.
    pub fn with_sweep(mut self, sweep: &SweepGrid) -> Self {
        for pt in sweep.points() {
            if !self.grid.contains(&pt) {
                self.grid.push(pt);
            }
        }
        self
    }
}

/// True tail Gini values per extreme level.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrueValues {
    entries: Vec<(f64, f64)>,
}

impl TrueValues {
    pub fn new(entries: Vec<(f64, f64)>) -> Self {
        Self { entries }
    }

    pub fn get(&self, p: f64) -> Option<f64> {
        self.entries
            .iter()
            .find(|(q, _)| (q - p).abs() <= 1e-12 * p)
            .map(|&(_, v)| v)
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Extrapolation with the estimated eta.
    Aie,
    /// Baseline with eta fixed at 1.
    Hw,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Aie => "AIE",
            Method::Hw => "HW",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationRecord {
    pub replication: usize,
    pub fractions: TailFractions,
    pub p: f64,
    pub truth: f64,
    pub outcome: std::result::Result<TailGiniFit, String>,
}

impl ReplicationRecord {
    pub fn ratio(&self, method: Method) -> Option<f64> {
        let fit = self.outcome.as_ref().ok()?;
        Some(match method {
            Method::Aie => fit.theta_extreme / self.truth,
            Method::Hw => fit.theta_hw / self.truth,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioSummary {
    pub fractions: TailFractions,
    pub p: f64,
    pub method: Method,
    pub mean: f64,
    /// Sample standard deviation (`m - 1` denominator).
    pub sd: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub true_values: TrueValues,
    /// Ordered by replication, then grid point, then p.
    pub records: Vec<ReplicationRecord>,
    /// Replications with at least one failed fit.
    pub failed_replications: usize,
}

/// Largest tolerated share of failed replications.
pub const MAX_FAILURE_SHARE: f64 = 0.05;

/// Runs `spec.m` replications; replication `r` draws its sample from stream
/// `(spec.seed, r)` and is fitted at every grid point and extreme level.
pub fn run_replications(spec: &ExperimentSpec, true_values: &TrueValues) -> Result<ExperimentResult> {
    spec.validate()?;
    let mut truths = Vec::with_capacity(spec.p_levels.len());
    for &p in &spec.p_levels {
        let t = true_values
            .get(p)
            .ok_or_else(|| Error::invalid("true_values", format!("no true value for p={p}")))?;
        truths.push(t);
    }

    let per_rep: Vec<Vec<ReplicationRecord>> = (0..spec.m)
        .into_par_iter()
        .map(|r| {
            let sample = spec.model.sample_stream(spec.n, RngStream::new(spec.seed, r as u64));
            let mut out = Vec::with_capacity(spec.grid.len() * spec.p_levels.len());
            for &fractions in &spec.grid {
                for (&p, &truth) in spec.p_levels.iter().zip(&truths) {
                    let outcome = sample
                        .as_ref()
                        .map_err(|e| e.to_string())
                        .and_then(|s| {
                            TailConfig::from_fractions(spec.n, fractions, p)
                                .and_then(|cfg| fit_tail_gini(s, cfg))
                                .map_err(|e| e.to_string())
                        });
                    out.push(ReplicationRecord {
                        replication: r,
                        fractions,
                        p,
                        truth,
                        outcome,
                    });
                }
            }
            out
        })
        .collect();

    let failed_replications = per_rep
        .iter()
        .filter(|recs| recs.iter().any(|r| r.outcome.is_err()))
        .count();
    if failed_replications as f64 > MAX_FAILURE_SHARE * spec.m as f64 {
        return Err(Error::TooManyFailures {
            failed: failed_replications,
            total: spec.m,
        });
    }
    Ok(ExperimentResult {
        spec: spec.clone(),
        true_values: true_values.clone(),
        records: per_rep.into_iter().flatten().collect(),
        failed_replications,
    })
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let ss = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
    (mean, (ss / (n - 1.0)).sqrt())
}

impl ExperimentResult {
    pub fn ratios(&self, fractions: TailFractions, p: f64, method: Method) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.fractions == fractions && r.p == p)
            .filter_map(|r| r.ratio(method))
            .collect()
    }

    pub fn summary(&self, fractions: TailFractions, p: f64, method: Method) -> Option<RatioSummary> {
        let v = self.ratios(fractions, p, method);
        if v.len() < 2 {
            return None;
        }
        let (mean, sd) = mean_sd(&v);
        Some(RatioSummary {
            fractions,
            p,
            method,
            mean,
            sd,
            count: v.len(),
        })
    }

    pub fn summaries(&self) -> Vec<RatioSummary> {
        let mut out = Vec::new();
        for &g in &self.spec.grid {
            for &p in &self.spec.p_levels {
                for method in [Method::Aie, Method::Hw] {
                    out.extend(self.summary(g, p, method));
                }
            }
        }
        out
    }

    /// `(1/m) sum_i (ratio_i - 1)^2` over the successful AIE fits at one grid
    /// point; `None` if the point is absent or every fit failed.
    pub fn smse(&self, fractions: TailFractions, p: f64) -> Option<f64> {
        let v = self.ratios(fractions, p, Method::Aie);
        if v.is_empty() {
            return None;
        }
        Some(v.iter().map(|r| (r - 1.0).powi(2)).sum::<f64>() / v.len() as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmseRow {
    pub varying: SweepParam,
    pub value: f64,
    pub fractions: TailFractions,
    pub p: f64,
    /// `None` marks a grid point with no usable replications.
    pub smse: Option<f64>,
}

/// sMSE along each one-at-a-time sweep line, for every p level.
pub fn smse_grid(result: &ExperimentResult, sweep: &SweepGrid) -> Vec<SmseRow> {
    let mut rows = Vec::new();
    for &p in &result.spec.p_levels {
        for (param, value) in sweep.entries() {
            let fractions = sweep.point(param, value);
            rows.push(SmseRow {
                varying: param,
                value,
                fractions,
                p,
                smse: result.smse(fractions, p),
            });
        }
    }
    rows
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QqRow {
    pub sample_quantile: f64,
    pub normal_quantile: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QqDiagnostics {
    /// Log-ratios in replication order, before standardization.
    pub log_ratios: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
    pub rows: Vec<QqRow>,
    /// Pearson correlation between the paired quantiles.
    pub correlation: f64,
    /// Replications dropped for a non-positive ratio.
    pub excluded: usize,
}

pub const MIN_QQ_POINTS: usize = 30;

/// Standardizes `log_ratios` and pairs their order statistics with standard
/// normal quantiles at levels `i / (m + 1)`.
pub fn qq_against_normal(log_ratios: &[f64]) -> Result<QqDiagnostics> {
    let m = log_ratios.len();
    if m < MIN_QQ_POINTS {
        return Err(Error::TooShort {
            needed: MIN_QQ_POINTS,
            got: m,
        });
    }
    let (mean, sd) = mean_sd(log_ratios);
    if !(sd > 0.0) || log_ratios.iter().all(|&v| v == log_ratios[0]) {
        return Err(Error::Degenerate("log-ratios have zero spread".into()));
    }
    let mut z: Vec<f64> = log_ratios.iter().map(|v| (v - mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    let normal = Normal::standard();
    let rows: Vec<QqRow> = z
        .iter()
        .enumerate()
        .map(|(i, &s)| QqRow {
            sample_quantile: s,
            normal_quantile: normal.inverse_cdf((i + 1) as f64 / (m + 1) as f64),
        })
        .collect();
    Ok(QqDiagnostics {
        log_ratios: log_ratios.to_vec(),
        mean,
        sd,
        correlation: pearson(
            &rows.iter().map(|r| r.sample_quantile).collect::<Vec<_>>(),
            &rows.iter().map(|r| r.normal_quantile).collect::<Vec<_>>(),
        ),
        rows,
        excluded: 0,
    })
}

pub(crate) fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}

/// QQ diagnostics of `log(theta_p / TG_p)` for the AIE estimator at one
/// grid point and level.
pub fn logratio_diagnostics(result: &ExperimentResult, fractions: TailFractions, p: f64) -> Result<QqDiagnostics> {
    let ratios = result.ratios(fractions, p, Method::Aie);
    let excluded = ratios.iter().filter(|&&r| !(r > 0.0)).count();
    let logs: Vec<f64> = ratios.iter().filter(|&&r| r > 0.0).map(|r| r.ln()).collect();
    let mut diag = qq_against_normal(&logs)?;
    diag.excluded = excluded;
    Ok(diag)
}
