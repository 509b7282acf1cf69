//! Result tables. Column names here are the file format.

use tailgini::experiments::{QqDiagnostics, RatioSummary, SmseRow};
use tailgini::io::{fmt_num, Table, NA};
use tailgini::{ExperimentResult, IndependenceTestResult, Method, TailFractions, TailGiniFit};

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| NA.to_string(), fmt_num)
}

fn fractions_cells(f: &TailFractions) -> [String; 3] {
    [fmt_num(f.alpha), fmt_num(f.alpha1), fmt_num(f.alpha2)]
}

pub const FIT_COLUMNS: [&str; 15] = [
    "p",
    "n",
    "k",
    "k1",
    "k2",
    "theta_intermediate",
    "gamma1_hat",
    "eta_hat",
    "d_n",
    "exponent",
    "theta_extreme",
    "theta_hw",
    "in_tail",
    "positive_in_tail",
    "ties_at_threshold",
];

pub fn fit_table(fits: &[TailGiniFit]) -> Table {
    let mut t = Table::new(&FIT_COLUMNS);
    for f in fits {
        t.push(vec![
            fmt_num(f.config.p),
            f.n.to_string(),
            f.config.k.to_string(),
            f.config.k1.to_string(),
            f.config.k2.to_string(),
            fmt_num(f.theta_intermediate),
            fmt_num(f.gamma1_hat),
            fmt_num(f.eta_hat),
            fmt_num(f.d_n),
            fmt_num(f.exponent()),
            fmt_num(f.theta_extreme),
            fmt_num(f.theta_hw),
            f.diagnostics.in_tail.to_string(),
            f.diagnostics.positive_in_tail.to_string(),
            f.diagnostics.ties_at_threshold.to_string(),
        ]);
    }
    t
}

/// One row per (replication, grid point, p); `error` is empty on success.
pub fn records_table(result: &ExperimentResult) -> Table {
    let mut t = Table::new(&[
        "replication",
        "alpha",
        "alpha1",
        "alpha2",
        "p",
        "truth",
        "theta_intermediate",
        "gamma1_hat",
        "eta_hat",
        "theta_extreme",
        "theta_hw",
        "ratio_aie",
        "ratio_hw",
        "error",
    ]);
    for r in &result.records {
        let [a, a1, a2] = fractions_cells(&r.fractions);
        let mut row = vec![r.replication.to_string(), a, a1, a2, fmt_num(r.p), fmt_num(r.truth)];
        match &r.outcome {
            Ok(f) => row.extend([
                fmt_num(f.theta_intermediate),
                fmt_num(f.gamma1_hat),
                fmt_num(f.eta_hat),
                fmt_num(f.theta_extreme),
                fmt_num(f.theta_hw),
                opt(r.ratio(Method::Aie)),
                opt(r.ratio(Method::Hw)),
                String::new(),
            ]),
            Err(e) => {
                row.extend(std::iter::repeat_n(NA.to_string(), 7));
                row.push(e.clone());
            }
        }
        t.push(row);
    }
    t
}

pub fn smse_table(rows: &[SmseRow]) -> Table {
    let mut t = Table::new(&["varying", "value", "alpha", "alpha1", "alpha2", "p", "smse"]);
    for r in rows {
        let [a, a1, a2] = fractions_cells(&r.fractions);
        t.push(vec![
            r.varying.name().to_string(),
            fmt_num(r.value),
            a,
            a1,
            a2,
            fmt_num(r.p),
            opt(r.smse),
        ]);
    }
    t
}

pub fn summary_table(rows: &[RatioSummary]) -> Table {
    let mut t = Table::new(&["alpha", "alpha1", "alpha2", "p", "method", "mean", "sd", "count"]);
    for r in rows {
        let [a, a1, a2] = fractions_cells(&r.fractions);
        t.push(vec![
            a,
            a1,
            a2,
            fmt_num(r.p),
            r.method.name().to_string(),
            fmt_num(r.mean),
            fmt_num(r.sd),
            r.count.to_string(),
        ]);
    }
    t
}

pub fn qq_table(diags: &[(f64, QqDiagnostics)]) -> Table {
    let mut t = Table::new(&["p", "i", "sample_quantile", "normal_quantile", "correlation"]);
    for (p, d) in diags {
        for (i, r) in d.rows.iter().enumerate() {
            t.push(vec![
                fmt_num(*p),
                (i + 1).to_string(),
                fmt_num(r.sample_quantile),
                fmt_num(r.normal_quantile),
                fmt_num(d.correlation),
            ]);
        }
    }
    t
}

pub fn logratio_table(diags: &[(f64, QqDiagnostics)]) -> Table {
    let mut t = Table::new(&["p", "index", "log_ratio"]);
    for (p, d) in diags {
        for (i, v) in d.log_ratios.iter().enumerate() {
            t.push(vec![fmt_num(*p), i.to_string(), fmt_num(*v)]);
        }
    }
    t
}

pub fn indep_table(r: &IndependenceTestResult) -> Table {
    let mut t = Table::new(&[
        "statistic",
        "threshold",
        "p_value",
        "null_reps",
        "level",
        "reject",
        "transform_x",
        "transform_y",
    ]);
    t.push(vec![
        fmt_num(r.statistic),
        fmt_num(r.threshold),
        fmt_num(r.p_value),
        r.null_reps.to_string(),
        fmt_num(r.level),
        r.reject.to_string(),
        r.transforms[0].name().to_string(),
        r.transforms[1].name().to_string(),
    ]);
    t
}

pub fn theta_column(p: f64) -> String {
    format!("theta_{p}")
}

/// Header of the screening-and-estimation report.
pub fn pipeline_header(p_levels: &[f64]) -> Vec<String> {
    let mut h: Vec<String> = [
        "ticker",
        "n",
        "mean",
        "sd",
        "tqcc",
        "p_value",
        "retained",
        "gamma1_hat",
        "eta_hat",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.extend(p_levels.iter().map(|&p| theta_column(p)));
    h
}

pub struct PipelineRow {
    pub ticker: String,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    /// `None` for the index itself.
    pub test: Option<IndependenceTestResult>,
    /// Fits per p level, present only for retained tickers.
    pub fits: Vec<TailGiniFit>,
}

pub fn pipeline_table(rows: &[PipelineRow], p_levels: &[f64]) -> Table {
    let header = pipeline_header(p_levels);
    let mut t = Table {
        header,
        rows: Vec::new(),
    };
    for r in rows {
        let retained = r.test.as_ref().map(|t| !t.reject);
        let mut row = vec![
            r.ticker.clone(),
            r.n.to_string(),
            fmt_num(r.mean),
            fmt_num(r.sd),
            opt(r.test.as_ref().map(|t| t.statistic)),
            opt(r.test.as_ref().map(|t| t.p_value)),
            retained.map_or_else(|| NA.to_string(), |b| b.to_string()),
        ];
        let first = r.fits.first();
        row.push(opt(first.map(|f| f.gamma1_hat)));
        row.push(opt(first.map(|f| f.eta_hat)));
        for (i, _) in p_levels.iter().enumerate() {
            row.push(opt(r.fits.get(i).map(|f| f.theta_extreme)));
        }
        t.rows.push(row);
    }
    t
}
